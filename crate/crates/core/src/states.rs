//! State constructors: Fock, coherent, thermal, squeezed variants and the
//! analytic steady states of a driven two-level emitter.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{
    annihilation_op, validate_density, validate_density_with, ComplexMatrix, DensityMatrix, Tolerances,
};
use crate::wigner::{ln_factorial, SqueezedKind};

/// Largest tolerated probability weight lost by truncating a state.
pub const TAIL_LIMIT: f64 = 1e-9;
/// Largest tolerated population in the top levels of a padded workspace.
pub const PAD_LEAKAGE_LIMIT: f64 = 1e-8;
const PAD_EDGE_BAND: usize = 10;

/// Squeezing magnitude `z >= 0` and phase-space direction `θ ∈ [0, 2π)`.
///
/// The squeezed state has its Wigner function compressed by `e^{-2z}` along
/// the unit vector `(cos θ, -sin θ)` and stretched by `e^{2z}` perpendicular
/// to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    z: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(z: f64, theta: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("squeezing z={z}, theta={theta}")));
        }
        Ok(Self {
            z,
            theta: theta.rem_euclid(TAU),
        })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Phase `ϑ` of the operator `exp[(z e^{-iϑ} a² - z e^{iϑ} a†²)/2]`
    /// producing this phase-space orientation. The operator compresses the
    /// quadrature at angle `ϑ/2`, so `ϑ = -2θ`.
    pub fn operator_phase(&self) -> f64 {
        -2.0 * self.theta
    }

    /// Default padding used while exponentiating the squeeze generator.
    pub fn default_pad(&self, dim: usize) -> usize {
        let spread = (8.0 * (2.0 * self.z).exp()).ceil() as usize;
        (2 * dim).max(dim + spread)
    }
}

/// How the emitter is excited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveMode {
    Incoherent,
    Coherent,
}

/// Emitter parameters; rates share one arbitrary time unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub mode: DriveMode,
    pub gamma: f64,
    #[serde(default)]
    pub pump: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub delta: f64,
}

impl DriveConfig {
    pub fn incoherent(gamma: f64, pump: f64) -> Result<Self> {
        let d = Self {
            mode: DriveMode::Incoherent,
            gamma,
            pump,
            omega: 0.0,
            delta: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn coherent(gamma: f64, omega: f64, delta: f64) -> Result<Self> {
        let d = Self {
            mode: DriveMode::Coherent,
            gamma,
            pump: 0.0,
            omega,
            delta,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if ![self.pump, self.omega, self.delta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("drive parameters must be finite".into()));
        }
        match self.mode {
            DriveMode::Incoherent => {
                if self.pump < 0.0 {
                    return Err(Error::InvalidParameter(format!("pump must be >= 0, got {}", self.pump)));
                }
                if self.omega != 0.0 || self.delta != 0.0 {
                    return Err(Error::InvalidParameter("incoherent drive takes no omega/delta".into()));
                }
            }
            DriveMode::Coherent => {
                if self.omega < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "omega must be >= 0, got {}",
                        self.omega
                    )));
                }
                if self.pump != 0.0 {
                    return Err(Error::InvalidParameter("coherent drive takes no pump".into()));
                }
            }
        }
        Ok(())
    }

    /// Analytic steady-state excited population of the bare emitter.
    pub fn emitter_occupation(&self) -> f64 {
        match self.mode {
            DriveMode::Incoherent => self.pump / (self.gamma + self.pump),
            DriveMode::Coherent => coherent_occupation_and_coherence(self.gamma, self.omega, self.delta).0,
        }
    }

    /// Analytic steady state of the bare emitter.
    pub fn emitter_steady_state(&self) -> Result<DensityMatrix> {
        match self.mode {
            DriveMode::Incoherent => tls_steady_incoherent(self.gamma, self.pump),
            DriveMode::Coherent => tls_steady_coherent(self.gamma, self.omega, self.delta),
        }
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

pub fn fock_state(k: usize, dim: usize) -> Result<DensityMatrix> {
    if k >= dim {
        return Err(Error::OutOfRange { index: k, dim });
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(k, k)] = real(1.0);
    validate_density(&m)
}

/// Probability mass of a Poisson(`mean`) distribution at or above `dim`.
fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean == 0.0 {
        return if dim == 0 { 1.0 } else { 0.0 };
    }
    let ln_mean = mean.ln();
    let mut tail = 0.0;
    let mut k = dim;
    loop {
        let term = (-mean + k as f64 * ln_mean - ln_factorial(k)).exp();
        tail += term;
        if (k as f64 > mean && term < 1e-18 * tail.max(1e-300)) || k > dim + 10_000 {
            break;
        }
        k += 1;
    }
    tail
}

/// Truncated states keep their lost tail weight in the trace.
fn validate_truncated(m: &ComplexMatrix) -> Result<DensityMatrix> {
    validate_density_with(
        m,
        &Tolerances {
            trace: TAIL_LIMIT,
            ..Tolerances::default()
        },
    )
}

/// Coherent state `|α><α|` truncated to `dim` levels, without renormalization.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "dimension must be positive",
        });
    }
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, dim);
    if tail >= TAIL_LIMIT {
        let mut suggested = dim;
        while poisson_tail(mean, suggested) >= TAIL_LIMIT {
            suggested += 1;
        }
        return Err(Error::Truncation {
            tail,
            suggested_dim: suggested,
        });
    }
    let amp: Vec<Complex64> = (0..dim)
        .map(|n| {
            if n == 0 {
                return real((-mean / 2.0).exp());
            }
            let (r, phi) = (alpha.norm(), alpha.arg());
            if r == 0.0 {
                return zero();
            }
            let ln_mag = -mean / 2.0 + n as f64 * r.ln() - 0.5 * ln_factorial(n);
            Complex64::from_polar(ln_mag.exp(), n as f64 * phi)
        })
        .collect();
    let v = DVector::from_vec(amp);
    let m = &v * v.adjoint();
    validate_truncated(&m)
}

/// Thermal state with geometric populations `n^k/(1+n)^{k+1}`.
pub fn thermal_state(n_th: f64, dim: usize) -> Result<DensityMatrix> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(Error::InvalidParameter(format!("thermal occupation {n_th}")));
    }
    if dim == 0 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "dimension must be positive",
        });
    }
    let q = n_th / (1.0 + n_th);
    let tail = q.powi(dim as i32);
    if tail >= TAIL_LIMIT {
        let suggested = (TAIL_LIMIT.ln() / q.ln()).ceil() as usize + 1;
        return Err(Error::Truncation {
            tail,
            suggested_dim: suggested,
        });
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for k in 0..dim {
        m[(k, k)] = real(q.powi(k as i32) / (1.0 + n_th));
    }
    validate_truncated(&m)
}

/// Squeeze operator `exp[(z e^{-iϑ} a² - z e^{iϑ} a†²)/2]` at dimension `pad`.
pub fn squeeze_operator(sq: &SqueezeParams, pad: usize) -> Result<ComplexMatrix> {
    let a = annihilation_op(pad)?;
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let phase = sq.operator_phase();
    let c_minus = Complex64::from_polar(sq.z() / 2.0, -phase);
    let c_plus = Complex64::from_polar(sq.z() / 2.0, phase);
    let generator = a2 * c_minus - ad2 * c_plus;
    Ok(generator.exp())
}

/// Displacement operator `exp(α a† - α* a)` at dimension `pad`.
pub fn displacement_operator(alpha: Complex64, pad: usize) -> Result<ComplexMatrix> {
    let a = annihilation_op(pad)?;
    let generator = a.adjoint() * alpha - a * alpha.conj();
    Ok(generator.exp())
}

fn edge_population(m: &ComplexMatrix) -> f64 {
    let start = m.nrows().saturating_sub(PAD_EDGE_BAND);
    (start..m.nrows()).map(|k| m[(k, k)].re).sum()
}

fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.nrows();
    let prod = u * u.adjoint();
    let keep = n.saturating_sub(PAD_EDGE_BAND);
    let mut worst = 0.0f64;
    for i in 0..keep {
        for j in 0..keep {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - real(target)).norm());
        }
    }
    worst
}

/// `S ρ S†` evaluated in a `pad`-level workspace and truncated to `out_dim`.
pub fn squeeze_state(rho: &DensityMatrix, sq: &SqueezeParams, pad: usize, out_dim: usize) -> Result<DensityMatrix> {
    if pad < rho.dim() {
        return Err(Error::InvalidDimension {
            dim: pad,
            reason: "pad smaller than the input state",
        });
    }
    if out_dim == 0 || out_dim > pad {
        return Err(Error::InvalidDimension {
            dim: out_dim,
            reason: "output dimension must be in 1..=pad",
        });
    }
    let embedded = rho.embed(pad)?;
    if sq.z() == 0.0 {
        return embedded.truncate(out_dim);
    }
    let s = squeeze_operator(sq, pad)?;
    let defect = unitarity_defect(&s);
    let out = &s * embedded.matrix() * s.adjoint();
    let leakage = edge_population(&out).max(defect);
    if leakage > PAD_LEAKAGE_LIMIT {
        return Err(Error::PadTooSmall { pad, leakage });
    }
    truncate_output(&out, out_dim)
}

fn truncate_output(full: &ComplexMatrix, out_dim: usize) -> Result<DensityMatrix> {
    let kept = full.view((0, 0), (out_dim, out_dim)).into_owned();
    let tail = 1.0 - (0..out_dim).map(|k| kept[(k, k)].re).sum::<f64>();
    if tail >= TAIL_LIMIT {
        let mut suggested = out_dim;
        let mut rest = tail;
        while rest >= TAIL_LIMIT && suggested < full.nrows() {
            rest -= full[(suggested, suggested)].re;
            suggested += 1;
        }
        return Err(Error::Truncation {
            tail,
            suggested_dim: suggested,
        });
    }
    validate_truncated(&kept)
}

/// Squeezed coherent state `D(α) S(ξ) |0>`.
pub fn squeezed_coherent_state(
    alpha: Complex64,
    sq: &SqueezeParams,
    pad: usize,
    out_dim: usize,
) -> Result<DensityMatrix> {
    if out_dim == 0 || out_dim > pad {
        return Err(Error::InvalidDimension {
            dim: out_dim,
            reason: "output dimension must be in 1..=pad",
        });
    }
    let s = squeeze_operator(sq, pad)?;
    let d = displacement_operator(alpha, pad)?;
    let ket = &d * s.column(0);
    let full = &ket * ket.adjoint();
    let leakage = edge_population(&full)
        .max(unitarity_defect(&d))
        .max(unitarity_defect(&s));
    if leakage > PAD_LEAKAGE_LIMIT {
        return Err(Error::PadTooSmall { pad, leakage });
    }
    truncate_output(&full, out_dim)
}

/// Incoherently pumped emitter: `diag(γ/Γ, P/Γ)`, `Γ = γ + P`.
pub fn tls_steady_incoherent(gamma: f64, pump: f64) -> Result<DensityMatrix> {
    DriveConfig::incoherent(gamma, pump)?;
    let linewidth = gamma + pump;
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = real(gamma / linewidth);
    m[(1, 1)] = real(pump / linewidth);
    validate_density(&m)
}

/// `(n_σ, <σ>)` of the coherently driven emitter, with `<σ>` the `(0, 1)`
/// entry of its density matrix.
pub fn coherent_occupation_and_coherence(gamma: f64, omega: f64, delta: f64) -> (f64, Complex64) {
    let denom = gamma * gamma + 8.0 * omega * omega + 4.0 * delta * delta;
    let n = 4.0 * omega * omega / denom;
    let coherence = Complex64::new(2.0 * delta, -gamma) * (-2.0 * omega / denom);
    (n, coherence)
}

/// Laser-driven emitter `[[1 - n, s], [s*, n]]`.
pub fn tls_steady_coherent(gamma: f64, omega: f64, delta: f64) -> Result<DensityMatrix> {
    DriveConfig::coherent(gamma, omega, delta)?;
    let (n, s) = coherent_occupation_and_coherence(gamma, omega, delta);
    let m = ComplexMatrix::from_row_slice(2, 2, &[real(1.0 - n), s, s.conj(), real(n)]);
    validate_density(&m)
}

/// Textual state description used by the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Fock(usize),
    Coherent(Complex64),
    Thermal(f64),
    Squeezed(Box<StateSpec>, SqueezeParams),
    TlsIncoherent { gamma: f64, pump: f64 },
    TlsCoherent { gamma: f64, omega: f64, delta: f64 },
}

/// A closed-form Wigner evaluator matching a [`StateSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    Fock(usize),
    Coherent(Complex64),
    Thermal(f64),
    Squeezed(SqueezedKind, SqueezeParams),
    TlsIncoherent { gamma: f64, pump: f64 },
    TlsCoherent { gamma: f64, omega: f64, delta: f64 },
}

fn parse_floats(text: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(Error::Parse(format!(
            "{what}: expected {n} comma-separated numbers, got '{text}'"
        ))),
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("squeezed(") {
            let mut depth = 1usize;
            let mut close = None;
            for (i, ch) in rest.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            close = Some(i);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            let close = close.ok_or_else(|| Error::Parse(format!("unbalanced parentheses in '{text}'")))?;
            let inner: StateSpec = rest[..close].parse()?;
            let params = rest[close + 1..]
                .strip_prefix(':')
                .ok_or_else(|| Error::Parse(format!("'{text}': expected ':z,theta' after squeezed(...)")))?;
            let v = parse_floats(params, 2, "squeezed")?;
            return Ok(StateSpec::Squeezed(Box::new(inner), SqueezeParams::new(v[0], v[1])?));
        }
        let (kind, args) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("'{text}': expected kind:parameters")))?;
        match kind {
            "fock" => args
                .trim()
                .parse::<usize>()
                .map(StateSpec::Fock)
                .map_err(|e| Error::Parse(format!("fock: {e}"))),
            "coherent" => {
                let v = parse_floats(args, 2, "coherent")?;
                Ok(StateSpec::Coherent(Complex64::new(v[0], v[1])))
            }
            "thermal" => {
                let v = parse_floats(args, 1, "thermal")?;
                Ok(StateSpec::Thermal(v[0]))
            }
            "tls-inc" => {
                let v = parse_floats(args, 2, "tls-inc")?;
                Ok(StateSpec::TlsIncoherent {
                    gamma: v[0],
                    pump: v[1],
                })
            }
            "tls-coh" => {
                let v = parse_floats(args, 3, "tls-coh")?;
                Ok(StateSpec::TlsCoherent {
                    gamma: v[0],
                    omega: v[1],
                    delta: v[2],
                })
            }
            other => Err(Error::Parse(format!("unknown state kind '{other}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Fock(k) => write!(f, "fock:{k}"),
            StateSpec::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            StateSpec::Thermal(n) => write!(f, "thermal:{n}"),
            StateSpec::Squeezed(inner, sq) => write!(f, "squeezed({inner}):{},{}", sq.z(), sq.theta()),
            StateSpec::TlsIncoherent { gamma, pump } => write!(f, "tls-inc:{gamma},{pump}"),
            StateSpec::TlsCoherent { gamma, omega, delta } => write!(f, "tls-coh:{gamma},{omega},{delta}"),
        }
    }
}

impl StateSpec {
    /// Builds the density matrix at Fock dimension `dim`. Two-level states
    /// are zero-padded when `dim > 2`.
    pub fn build(&self, dim: usize) -> Result<DensityMatrix> {
        match self {
            StateSpec::Fock(k) => fock_state(*k, dim),
            StateSpec::Coherent(a) => coherent_state(*a, dim),
            StateSpec::Thermal(n) => thermal_state(*n, dim),
            StateSpec::TlsIncoherent { gamma, pump } => tls_steady_incoherent(*gamma, *pump)?.embed(dim.max(2)),
            StateSpec::TlsCoherent { gamma, omega, delta } => {
                tls_steady_coherent(*gamma, *omega, *delta)?.embed(dim.max(2))
            }
            StateSpec::Squeezed(inner, sq) => {
                let pad = sq.default_pad(dim);
                match inner.as_ref() {
                    StateSpec::Coherent(a) => {
                        let pad = pad + (4.0 * a.norm_sqr()).ceil() as usize;
                        squeezed_coherent_state(*a, sq, pad, dim)
                    }
                    other => squeeze_state(&other.build(dim)?, sq, pad, dim),
                }
            }
        }
    }

    /// The matching closed form, when one exists.
    pub fn closed_form(&self) -> Option<ClosedForm> {
        Some(match self {
            StateSpec::Fock(k) => ClosedForm::Fock(*k),
            StateSpec::Coherent(a) => ClosedForm::Coherent(*a),
            StateSpec::Thermal(n) => ClosedForm::Thermal(*n),
            StateSpec::TlsIncoherent { gamma, pump } => ClosedForm::TlsIncoherent {
                gamma: *gamma,
                pump: *pump,
            },
            StateSpec::TlsCoherent { gamma, omega, delta } => ClosedForm::TlsCoherent {
                gamma: *gamma,
                omega: *omega,
                delta: *delta,
            },
            StateSpec::Squeezed(inner, sq) => {
                let kind = match inner.as_ref() {
                    StateSpec::Fock(k) => SqueezedKind::Fock(*k),
                    StateSpec::Coherent(a) => SqueezedKind::Coherent(*a),
                    StateSpec::Thermal(n) => SqueezedKind::Thermal(*n),
                    _ => return None,
                };
                ClosedForm::Squeezed(kind, *sq)
            }
        })
    }

    /// Default Fock dimension for this state when none is given.
    pub fn default_dim(&self) -> usize {
        match self {
            StateSpec::TlsIncoherent { .. } | StateSpec::TlsCoherent { .. } => 2,
            StateSpec::Fock(k) => (k + 1).max(2),
            _ => 40,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{max_abs_diff, occupation};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn fock_examples() {
        let v = fock_state(0, 4).unwrap();
        assert_eq!(v.get(0, 0), real(1.0));
        let two = fock_state(2, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expected = if (i, j) == (2, 2) { 1.0 } else { 0.0 };
                assert_eq!(two.get(i, j), real(expected));
            }
        }
        assert!(matches!(fock_state(5, 5), Err(Error::OutOfRange { index: 5, dim: 5 })));
    }

    #[test]
    fn coherent_examples() {
        let vac = coherent_state(zero(), 6).unwrap();
        assert!(max_abs_diff(vac.matrix(), fock_state(0, 6).unwrap().matrix()) == 0.0);
        let one = coherent_state(real(1.0), 30).unwrap();
        assert_abs_diff_eq!(one.get(0, 0).re, (-1.0f64).exp(), epsilon = 1e-16);
        assert_abs_diff_eq!(one.get(0, 0).re, 0.3678794, epsilon = 1e-7);
        // Σ_{k>=30} e^{-1}/k! ≈ 1.4e-33
        assert!(1.0 - one.trace() < 1e-12);
        assert_abs_diff_eq!(one.purity(), 1.0, epsilon = 1e-9);
        let a = Complex64::new(0.6, -0.8);
        let st = coherent_state(a, 25).unwrap();
        // ρ[n][m] = e^{-|α|²} α^n α*^m / sqrt(n! m!)
        let expected = (-a.norm_sqr()).exp() * a * a * a.conj() / (2f64).sqrt();
        assert!((st.get(2, 1) - expected).norm() < 1e-15);
        match coherent_state(real(3.0), 10) {
            Err(Error::Truncation { suggested_dim, .. }) => {
                assert!(coherent_state(real(3.0), suggested_dim).is_ok());
                assert!(coherent_state(real(3.0), suggested_dim - 1).is_err());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn thermal_examples() {
        assert_eq!(thermal_state(0.0, 3).unwrap(), fock_state(0, 3).unwrap());
        let t = thermal_state(1.0, 40).unwrap();
        assert_abs_diff_eq!(t.get(0, 0).re, 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(t.get(1, 1).re, 0.25, epsilon = 1e-16);
        // Σ k q^k/(1+n) over k < 40 = n (1 - q^40 - 40 q^40 (1-q)) ≈ 1 - 3.8e-11
        assert_abs_diff_eq!(occupation(&t), 1.0, epsilon = 1e-8);
        assert!(matches!(thermal_state(1.0, 20), Err(Error::Truncation { .. })));
    }

    #[test]
    fn squeezing_basics() {
        let vac = fock_state(0, 30).unwrap();
        let none = SqueezeParams::new(0.0, 1.0).unwrap();
        assert_eq!(squeeze_state(&vac, &none, 60, 30).unwrap(), vac);

        let sq = SqueezeParams::new(0.5, 0.3).unwrap();
        let out = squeeze_state(&vac, &sq, 80, 40).unwrap();
        assert_abs_diff_eq!(occupation(&out), 0.5f64.sinh().powi(2), epsilon = 1e-8);
        assert_abs_diff_eq!(0.5f64.sinh().powi(2), 0.2715, epsilon = 1e-4);
        assert_abs_diff_eq!(out.purity(), 1.0, epsilon = 1e-8);

        let s = squeeze_operator(&sq, 60).unwrap();
        assert!(unitarity_defect(&s) < 1e-10);

        let big = SqueezeParams::new(1.5, 0.0).unwrap();
        assert!(matches!(
            squeeze_state(&vac, &big, 30, 30),
            Err(Error::PadTooSmall { .. })
        ));
        assert!(squeeze_state(&vac, &sq, 20, 30).is_err());
    }

    #[test]
    fn squeeze_theta_is_reduced() {
        let sq = SqueezeParams::new(0.2, -PI / 2.0).unwrap();
        assert_abs_diff_eq!(sq.theta(), 1.5 * PI, epsilon = 1e-15);
        assert!(SqueezeParams::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn two_level_steady_states() {
        let half = tls_steady_incoherent(1.0, 1.0).unwrap();
        assert_eq!((half.get(0, 0).re, half.get(1, 1).re), (0.5, 0.5));
        let ground = tls_steady_incoherent(2.0, 0.0).unwrap();
        assert_eq!((ground.get(0, 0).re, ground.get(1, 1).re), (1.0, 0.0));
        let inverted = tls_steady_incoherent(1.0, 3.0).unwrap();
        assert_eq!((inverted.get(0, 0).re, inverted.get(1, 1).re), (0.25, 0.75));

        let dark = tls_steady_coherent(1.0, 0.0, 0.3).unwrap();
        assert_eq!(dark.get(0, 0), real(1.0));
        assert_eq!(dark.get(0, 1), zero());

        let c = tls_steady_coherent(1.0, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(c.get(1, 1).re, 1.0 / 3.0, epsilon = 1e-15);
        assert!((c.get(0, 1) - Complex64::new(0.0, 1.0 / 3.0)).norm() < 1e-15);

        let strong = tls_steady_coherent(1.0, 1e4, 0.0).unwrap();
        assert_abs_diff_eq!(strong.get(1, 1).re, 0.5, epsilon = 1e-8);

        for omega in [0.01, 0.3, 1.0, 7.0] {
            for delta in [0.0, -1.0, 2.5] {
                let (n, s) = coherent_occupation_and_coherence(1.3, omega, delta);
                assert!(n * (1.0 - n) - s.norm_sqr() >= -1e-12);
                let ev = tls_steady_coherent(1.3, omega, delta).unwrap().eigenvalues();
                assert!(ev[0] >= -1e-14 && ev[1] <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn drive_config_validation() {
        assert!(DriveConfig::incoherent(0.0, 1.0).is_err());
        assert!(DriveConfig::incoherent(1.0, -1.0).is_err());
        assert!(DriveConfig::coherent(1.0, -0.1, 0.0).is_err());
        let bad = DriveConfig {
            mode: DriveMode::Incoherent,
            gamma: 1.0,
            pump: 1.0,
            omega: 0.5,
            delta: 0.0,
        };
        assert!(bad.validate().is_err());
        assert_abs_diff_eq!(
            DriveConfig::incoherent(1.0, 2.0).unwrap().emitter_occupation(),
            2.0 / 3.0,
            epsilon = 1e-16
        );
    }

    #[test]
    fn state_spec_parsing() {
        assert_eq!("fock:2".parse::<StateSpec>().unwrap(), StateSpec::Fock(2));
        assert_eq!(
            "coherent:1,-0.5".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent(Complex64::new(1.0, -0.5))
        );
        assert_eq!("thermal:1".parse::<StateSpec>().unwrap(), StateSpec::Thermal(1.0));
        assert_eq!(
            "tls-coh:1,0.5,0".parse::<StateSpec>().unwrap(),
            StateSpec::TlsCoherent {
                gamma: 1.0,
                omega: 0.5,
                delta: 0.0
            }
        );
        let sq: StateSpec = "squeezed(coherent:1,1):0.5,0.7853981633974483".parse().unwrap();
        match &sq {
            StateSpec::Squeezed(inner, p) => {
                assert_eq!(**inner, StateSpec::Coherent(Complex64::new(1.0, 1.0)));
                assert_eq!(p.z(), 0.5);
            }
            other => panic!("{other:?}"),
        }
        let nested: StateSpec = "squeezed(squeezed(fock:1):0.1,0):0.2,1".parse().unwrap();
        assert!(nested.closed_form().is_none());
        for bad in [
            "fock",
            "fock:x",
            "coherent:1",
            "squeezed(fock:1:0.5,0",
            "squeezed(fock:1)0.5,0",
            "laser:3",
        ] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad} should fail");
        }
        let round: StateSpec = sq.to_string().parse().unwrap();
        assert_eq!(round, sq);
    }

    #[test]
    fn squeezed_series_matches_closed_forms() {
        use crate::wigner::{squeezed_closed_at, wigner_series_at};
        let sq = SqueezeParams::new(0.4, 0.9).unwrap();
        let alpha = Complex64::new(0.7, -0.4);
        let dim = 50;
        let cases = [
            (
                squeeze_state(&fock_state(0, dim).unwrap(), &sq, 90, dim).unwrap(),
                SqueezedKind::Fock(0),
            ),
            (
                squeeze_state(&fock_state(1, dim).unwrap(), &sq, 90, dim).unwrap(),
                SqueezedKind::Fock(1),
            ),
            (
                squeeze_state(&thermal_state(0.5, dim).unwrap(), &sq, 90, dim).unwrap(),
                SqueezedKind::Thermal(0.5),
            ),
            (
                squeezed_coherent_state(alpha, &sq, 90, dim).unwrap(),
                SqueezedKind::Coherent(alpha),
            ),
        ];
        for (rho, kind) in &cases {
            for &(x, y) in &[(0.0, 0.0), (0.5, -0.3), (-0.8, 0.6), (1.1, 0.2)] {
                let series = wigner_series_at(rho, x, y).unwrap();
                let closed = squeezed_closed_at(*kind, &sq, x, y);
                assert!(
                    (series - closed).abs() < 1e-9,
                    "{kind:?} at ({x},{y}): {series} vs {closed}"
                );
            }
        }
    }
}
