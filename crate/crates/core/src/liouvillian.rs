//! Lindblad superoperators on column-stacked density matrices, steady-state
//! solving, and the cascaded emitter/detector model.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{
    annihilation_op, identity, lowering_2ls, number_op, occupation, partial_trace, tensor, validate_density,
    ComplexMatrix, DensityMatrix, SubsystemLayout,
};
use crate::states::{DriveConfig, DriveMode};

/// Largest Hamiltonian asymmetry accepted by [`build_liouvillian`].
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Pivot ratio below which the constrained system is treated as singular.
pub const PIVOT_RATIO_LIMIT: f64 = 1e-13;
/// Largest population allowed in the top detector level.
pub const DETECTOR_TOP_LIMIT: f64 = 1e-8;

/// Matrix of a linear map on `d x d` matrices, acting on `vec(ρ)` with
/// columns stacked (`vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`).
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `L(ρ)` as a matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Layout(format!("expected {0}x{0} operand", self.dim)));
        }
        let v = DVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        Ok(ComplexMatrix::from_column_slice(self.dim, self.dim, out.as_slice()))
    }

    /// Largest magnitude of the trace functional composed with `L`.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|i| self.matrix[(i * (d + 1), col)])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

fn check_square(m: &ComplexMatrix, d: usize, what: &str) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::Layout(format!(
            "{what} is {}x{}, expected {d}x{d}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Superoperator of `ρ ↦ -i[H, ρ] + Σ (r/2)(2cρc† - ρc†c - c†cρ)`.
pub fn build_liouvillian(h: &ComplexMatrix, collapses: &[(f64, ComplexMatrix)]) -> Result<Superoperator> {
    let d = h.nrows();
    check_square(h, d, "Hamiltonian")?;
    let asym = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let id = identity(d);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut m = (tensor(&id, h) - tensor(&h.transpose(), &id)) * minus_i;
    for (rate, c) in collapses {
        if !(rate.is_finite() && *rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("collapse rate {rate}")));
        }
        check_square(c, d, "collapse operator")?;
        if *rate == 0.0 {
            continue;
        }
        let cdc = c.adjoint() * c;
        let term =
            tensor(&c.conjugate(), c) * Complex64::new(2.0, 0.0) - tensor(&id, &cdc) - tensor(&cdc.transpose(), &id);
        m += term * Complex64::new(rate / 2.0, 0.0);
    }
    Ok(Superoperator { dim: d, matrix: m })
}

/// Adds `√(γ Γ)([ξρ, a†] + [a, ρξ†])` for source `ξ` and target `a`.
pub fn add_cascaded_coupling(
    l: &Superoperator,
    source: &ComplexMatrix,
    target: &ComplexMatrix,
    gamma_src: f64,
    gamma_tgt: f64,
) -> Result<Superoperator> {
    let d = l.dim;
    check_square(source, d, "source operator")?;
    check_square(target, d, "target operator")?;
    if !(gamma_src > 0.0 && gamma_tgt > 0.0 && gamma_src.is_finite() && gamma_tgt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cascade rates {gamma_src}, {gamma_tgt}"
        )));
    }
    let id = identity(d);
    let (xi, a) = (source, target);
    let ad_xi = a.adjoint() * xi;
    let xid_a = xi.adjoint() * a;
    let term =
        tensor(&a.conjugate(), xi) - tensor(&id, &ad_xi) + tensor(&xi.conjugate(), a) - tensor(&xid_a.transpose(), &id);
    let matrix = &l.matrix + term * Complex64::new((gamma_src * gamma_tgt).sqrt(), 0.0);
    Ok(Superoperator { dim: d, matrix })
}

/// Solution of `L vec(ρ) = 0`, `tr ρ = 1`.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L vec(ρ)‖∞` of the returned state.
    pub residual: f64,
}

pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    let d = l.dim;
    let n = d * d;
    let mut a = l.matrix.clone();
    let mut rhs = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for col in 0..n {
        a[(0, col)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i * (d + 1))] = Complex64::new(1.0, 0.0);
    }
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = a.lu();
    let diag = lu.u().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| {
        (lo.min(z.norm()), hi.max(z.norm()))
    });
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if ratio < PIVOT_RATIO_LIMIT {
        return Err(Error::NonUniqueSteadyState { pivot_ratio: ratio });
    }
    let x = lu
        .solve(&rhs)
        .ok_or(Error::NonUniqueSteadyState { pivot_ratio: ratio })?;
    let raw = ComplexMatrix::from_column_slice(d, d, x.as_slice());
    let herm = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let residual = (&l.matrix * DVector::from_column_slice(herm.as_slice()))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let rho = validate_density(&herm)?;
    Ok(SteadyState { rho, residual })
}

fn default_dim_a() -> usize {
    12
}

/// Detector oscillator: linewidth `Γ`, detuning from the drive frame and
/// Fock truncation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    #[serde(rename = "Gamma")]
    pub gamma: f64,
    #[serde(rename = "detuning", default)]
    pub detuning_a: f64,
    #[serde(rename = "dim", default = "default_dim_a")]
    pub dim_a: usize,
}

impl DetectorConfig {
    pub fn new(gamma: f64, detuning_a: f64, dim_a: usize) -> Result<Self> {
        let d = Self {
            gamma,
            detuning_a,
            dim_a,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "detector Gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !self.detuning_a.is_finite() {
            return Err(Error::InvalidParameter("detector detuning must be finite".into()));
        }
        if self.dim_a < 3 {
            return Err(Error::InvalidDimension {
                dim: self.dim_a,
                reason: "detector needs at least 3 levels",
            });
        }
        Ok(())
    }
}

/// Drive plus detector, as read from scenario files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub drive: DriveConfig,
    pub detector: DetectorConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.drive.validate()?;
        s.detector.validate()?;
        Ok(s)
    }
}

/// Composite emitter/detector operators, emitter first.
#[derive(Clone, Debug)]
pub struct CascadeOperators {
    pub hamiltonian: ComplexMatrix,
    pub collapses: Vec<(f64, ComplexMatrix)>,
    pub xi: ComplexMatrix,
    pub a: ComplexMatrix,
    pub layout: SubsystemLayout,
}

pub fn cascade_operators(drive: &DriveConfig, det: &DetectorConfig) -> Result<CascadeOperators> {
    drive.validate()?;
    det.validate()?;
    let id_e = identity(2);
    let id_a = identity(det.dim_a);
    let sigma = lowering_2ls();
    let xi = tensor(&sigma, &id_a);
    let a = tensor(&id_e, &annihilation_op(det.dim_a)?);
    let mut h = tensor(&id_e, &number_op(det.dim_a)) * Complex64::new(det.detuning_a, 0.0);
    let mut collapses = vec![(drive.gamma, xi.clone())];
    match drive.mode {
        DriveMode::Incoherent => {
            if drive.pump > 0.0 {
                collapses.push((drive.pump, xi.adjoint()));
            }
        }
        DriveMode::Coherent => {
            let xd_x = xi.adjoint() * &xi;
            h += xd_x * Complex64::new(drive.delta, 0.0) + (&xi + xi.adjoint()) * Complex64::new(drive.omega, 0.0);
        }
    }
    collapses.push((det.gamma, a.clone()));
    Ok(CascadeOperators {
        hamiltonian: h,
        collapses,
        xi,
        a,
        layout: SubsystemLayout::new(vec![2, det.dim_a])?,
    })
}

/// Steady state of the cascaded model together with derived quantities.
#[derive(Clone, Debug)]
pub struct CascadeResult {
    /// Reduced detector state `ρ̃_a`.
    pub rho_obs: DensityMatrix,
    /// Reduced emitter state.
    pub rho_emitter: DensityMatrix,
    /// Bare-emitter occupation from the analytic steady state.
    pub n_sigma: f64,
    /// `tr(a†a ρ̃_a)`.
    pub n_obs: f64,
    pub residual: f64,
}

pub fn cascade_liouvillian(drive: &DriveConfig, det: &DetectorConfig) -> Result<(Superoperator, CascadeOperators)> {
    let ops = cascade_operators(drive, det)?;
    let l = build_liouvillian(&ops.hamiltonian, &ops.collapses)?;
    let l = add_cascaded_coupling(&l, &ops.xi, &ops.a, drive.gamma, det.gamma)?;
    Ok((l, ops))
}

pub fn cascade_observed_state(drive: &DriveConfig, det: &DetectorConfig) -> Result<CascadeResult> {
    let (l, ops) = cascade_liouvillian(drive, det)?;
    let ss = steady_state(&l)?;
    let rho_obs = partial_trace(ss.rho.matrix(), &ops.layout, 1)?;
    let top = rho_obs.get(det.dim_a - 1, det.dim_a - 1).re;
    if top >= DETECTOR_TOP_LIMIT {
        return Err(Error::DetectorTruncation {
            population: top,
            suggested_dim: det.dim_a + det.dim_a / 2 + 2,
        });
    }
    let rho_emitter = partial_trace(ss.rho.matrix(), &ops.layout, 0)?;
    let n_obs = occupation(&rho_obs);
    Ok(CascadeResult {
        rho_obs,
        rho_emitter,
        n_sigma: drive.emitter_occupation(),
        n_obs,
        residual: ss.residual,
    })
}
