//! Wigner functions of single-mode states in the truncated Fock basis.
//!
//! A density matrix `ρ` maps to phase space through
//!
//! ```text
//! W(α) = Σ_{m,n} ρ[m][n] · W_n^m(α),      α = x + iy = r e^{iφ}
//! ```
//!
//! where `W_μ^ν` is the Wigner function of the operator `|ν><μ|`:
//!
//! ```text
//! W_μ^ν(r, φ) = (2/π) e^{-2r²} (-1)^ν sqrt(ν!/μ!) (2r e^{iφ})^{μ-ν} L_ν^{μ-ν}(4r²),   μ >= ν
//! W_μ^ν       = conj(W_ν^μ),                                                       μ <  ν
//! ```
//!
//! With this pairing a coherent state `|β><β|` is centred at `(Re β, Im β)`
//! and a two-level coherence `ρ[0][1]` multiplies `W_1^0 ∝ r e^{iφ}`.
//! For several modes the same coefficients multiply per mode; only the single
//! mode case is evaluated here.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::DensityMatrix;
use crate::states::SqueezeParams;

/// Entries with modulus at or below this are skipped by the series.
pub const SERIES_ENTRY_CUTOFF: f64 = 1e-16;
/// Largest tolerated imaginary part of a series value.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-10;
const FIELD_BOUND_SLACK: f64 = 1e-9;

/// `ln n!` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `0.5 · ln(lo! / hi!)` for `lo <= hi`, summed over the non-shared factors.
fn half_ln_factorial_ratio(lo: usize, hi: usize) -> f64 {
    -0.5 * (lo + 1..=hi).map(|k| (k as f64).ln()).sum::<f64>()
}

/// Associated Laguerre polynomial `L_n^k(x)` by upward three-term recurrence.
pub fn laguerre_assoc(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for m in 2..=n {
        let mf = m as f64;
        let next = ((2.0 * mf - 1.0 + kf - x) * cur - (mf - 1.0 + kf) * prev) / mf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[j] = L_j^k(x)` for `j = 0..out.len()`.
fn laguerre_sequence(k: usize, x: f64, out: &mut [f64]) {
    let kf = k as f64;
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 1.0 + kf - x;
    for m in 2..out.len() {
        let mf = m as f64;
        out[m] = ((2.0 * mf - 1.0 + kf - x) * out[m - 1] - (mf - 1.0 + kf) * out[m - 2]) / mf;
    }
}

/// Magnitude-and-sign part shared by both branches: `(2/π)e^{-2r²}(-1)^j sqrt(j!/(j+d)!) (2r)^d L_j^d(4r²)`.
fn coefficient_radial(j: usize, d: usize, r: f64, half_ln_ratio: f64, laguerre: f64) -> f64 {
    let gauss = FRAC_2_PI * (-2.0 * r * r).exp();
    let scale = if d == 0 {
        1.0
    } else if r == 0.0 {
        return 0.0;
    } else {
        (half_ln_ratio + d as f64 * (2.0 * r).ln()).exp()
    };
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * gauss * scale * laguerre
}

/// The phase-space coefficient `W_μ^ν(r, φ)`.
pub fn wigner_coefficient(mu: usize, nu: usize, r: f64, phi: f64) -> Complex64 {
    let (j, d) = (mu.min(nu), mu.abs_diff(nu));
    let radial = coefficient_radial(
        j,
        d,
        r,
        half_ln_factorial_ratio(j, j + d),
        laguerre_assoc(j, d, 4.0 * r * r),
    );
    if d == 0 {
        return Complex64::new(radial, 0.0);
    }
    let angle = if mu >= nu { d as f64 * phi } else { -(d as f64) * phi };
    Complex64::from_polar(radial, angle)
}

/// Polar form of a Cartesian phase-space point; the origin maps to `φ = 0`.
pub fn to_polar(x: f64, y: f64) -> (f64, f64) {
    let r = x.hypot(y);
    let phi = if r == 0.0 { 0.0 } else { y.atan2(x) };
    (r, phi)
}

/// Uniform, endpoint-inclusive rectangular sampling of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, y_min: f64, y_max: f64, ny: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            nx,
            ny,
        };
        g.check()?;
        Ok(g)
    }

    /// Square grid `[-half, half]²` with `n` samples per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, n, -half, half, n)
    }

    fn check(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::InvalidGrid(format!("bad bounds {self:?}")));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid("at least two samples per axis".into()));
        }
        Ok(())
    }

    /// Parses `xmin:xmax:nx,ymin:ymax:ny`.
    pub fn parse(text: &str) -> Result<Self> {
        let axes: Vec<&str> = text.split(',').collect();
        if axes.len() != 2 {
            return Err(Error::Parse(format!(
                "grid '{text}': expected xmin:xmax:nx,ymin:ymax:ny"
            )));
        }
        let axis = |s: &str| -> Result<(f64, f64, usize)> {
            let p: Vec<&str> = s.split(':').collect();
            if p.len() != 3 {
                return Err(Error::Parse(format!("grid axis '{s}': expected min:max:n")));
            }
            let lo = p[0]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let hi = p[1]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            let n = p[2]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))?;
            Ok((lo, hi, n))
        };
        let (x0, x1, nx) = axis(axes[0])?;
        let (y0, y1, ny) = axis(axes[1])?;
        Self::new(x0, x1, nx, y0, y1, ny)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        if ix + 1 == self.nx {
            self.x_max
        } else {
            self.x_min + ix as f64 * self.dx()
        }
    }

    pub fn y(&self, iy: usize) -> f64 {
        if iy + 1 == self.ny {
            self.y_max
        } else {
            self.y_min + iy as f64 * self.dy()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 3.0,
            y_min: -3.0,
            y_max: 3.0,
            nx: 301,
            ny: 301,
        }
    }
}

/// Real Wigner values on a grid, stored row-major with `y` as the row index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerField {
    grid: PhaseGrid,
    values: Vec<f64>,
}

impl WignerField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        grid.check()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let worst = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > FRAC_2_PI + FIELD_BOUND_SLACK {
            return Err(Error::InvalidParameter(format!("|W| = {worst} exceeds 2/π")));
        }
        Ok(Self { grid, values })
    }

    /// Evaluates `f(x, y)` at every grid point, one row per task.
    pub fn from_fn<F>(grid: PhaseGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let values = sample_rows(&grid, |x, y| Ok(f(x, y)))?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn scaled(&self, c: f64) -> WignerField {
        WignerField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Builds a field without the |W| <= 2/π check, for derived quantities
    /// such as moment integrands.
    pub fn unchecked(grid: PhaseGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        WignerField { grid, values }
    }
}

fn sample_rows<F>(grid: &PhaseGrid, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let rows: Vec<Result<Vec<f64>>> = (0..grid.ny)
        .into_par_iter()
        .map(|iy| {
            let y = grid.y(iy);
            (0..grid.nx).map(|ix| f(grid.x(ix), y)).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(values)
}

/// Precomputed series data for repeated point evaluation of one state.
pub struct SeriesEvaluator {
    /// `(row, col, ρ[row][col])` in row-major order.
    entries: Vec<(usize, usize, Complex64)>,
    /// `half_ln_ratio[j][d] = 0.5 ln(j!/(j+d)!)`
    half_ln_ratio: Vec<Vec<f64>>,
    /// Highest Laguerre degree needed for each offset `d`.
    max_degree: Vec<Option<usize>>,
    dim: usize,
}

impl SeriesEvaluator {
    pub fn new(rho: &DensityMatrix) -> Self {
        let dim = rho.dim();
        let mut entries = Vec::new();
        let mut max_degree = vec![None; dim];
        for m in 0..dim {
            for n in 0..dim {
                let v = rho.get(m, n);
                if v.norm() > SERIES_ENTRY_CUTOFF {
                    entries.push((m, n, v));
                    let (j, d) = (m.min(n), m.abs_diff(n));
                    max_degree[d] = Some(max_degree[d].map_or(j, |old: usize| old.max(j)));
                }
            }
        }
        let half_ln_ratio = (0..dim)
            .map(|j| (0..dim - j).map(|d| half_ln_factorial_ratio(j, j + d)).collect())
            .collect();
        Self {
            entries,
            half_ln_ratio,
            max_degree,
            dim,
        }
    }

    /// Complex series value at `(x, y)`; the imaginary part is round-off for
    /// Hermitian input.
    pub fn eval_complex(&self, x: f64, y: f64) -> Complex64 {
        let (r, phi) = to_polar(x, y);
        let arg = 4.0 * r * r;
        let mut laguerre: Vec<Vec<f64>> = vec![Vec::new(); self.dim];
        for (d, deg) in self.max_degree.iter().enumerate() {
            if let Some(jmax) = deg {
                laguerre[d] = vec![0.0; jmax + 1];
                laguerre_sequence(d, arg, &mut laguerre[d]);
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &(m, n, value) in &self.entries {
            // pairs ρ[m][n] with W_μ^ν, μ = n, ν = m
            let (j, d) = (m.min(n), m.abs_diff(n));
            let radial = coefficient_radial(j, d, r, self.half_ln_ratio[j][d], laguerre[d][j]);
            let coeff = if d == 0 {
                Complex64::new(radial, 0.0)
            } else {
                let angle = if n >= m { d as f64 * phi } else { -(d as f64) * phi };
                Complex64::from_polar(radial, angle)
            };
            acc += value * coeff;
        }
        acc
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let w = self.eval_complex(x, y);
        if w.im.abs() > IMAGINARY_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue { residue: w.im.abs() });
        }
        Ok(w.re)
    }
}

/// Wigner function of `rho` on `grid` from the Fock-basis series.
pub fn wigner_series(rho: &DensityMatrix, grid: &PhaseGrid) -> Result<WignerField> {
    grid.check()?;
    let eval = SeriesEvaluator::new(rho);
    let values = sample_rows(grid, |x, y| eval.eval(x, y))?;
    WignerField::new(*grid, values)
}

/// Point value of the series.
pub fn wigner_series_at(rho: &DensityMatrix, x: f64, y: f64) -> Result<f64> {
    SeriesEvaluator::new(rho).eval(x, y)
}

pub fn fock_closed_at(k: usize, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    FRAC_2_PI * sign * (-2.0 * r2).exp() * laguerre_assoc(k, 0, 4.0 * r2)
}

pub fn coherent_closed_at(alpha: Complex64, x: f64, y: f64) -> f64 {
    let (dx, dy) = (x - alpha.re, y - alpha.im);
    FRAC_2_PI * (-2.0 * (dx * dx + dy * dy)).exp()
}

pub fn thermal_closed_at(n_th: f64, x: f64, y: f64) -> f64 {
    let s = 1.0 + 2.0 * n_th;
    FRAC_2_PI / s * (-2.0 * (x * x + y * y) / s).exp()
}

pub fn wigner_fock_closed(k: usize, grid: &PhaseGrid) -> Result<WignerField> {
    WignerField::from_fn(*grid, |x, y| fock_closed_at(k, x, y))
}

pub fn wigner_coherent_closed(alpha: Complex64, grid: &PhaseGrid) -> Result<WignerField> {
    WignerField::from_fn(*grid, |x, y| coherent_closed_at(alpha, x, y))
}

pub fn wigner_thermal_closed(n_th: f64, grid: &PhaseGrid) -> Result<WignerField> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return Err(Error::InvalidParameter(format!("thermal occupation {n_th}")));
    }
    WignerField::from_fn(*grid, |x, y| thermal_closed_at(n_th, x, y))
}

/// State families with a closed-form squeezed Wigner function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SqueezedKind {
    Fock(usize),
    Coherent(Complex64),
    Thermal(f64),
}

/// Squeezed-frame quadratures: `e^{2z}` weights `u`, `e^{-2z}` weights `v`.
fn squeezed_quadratures(sq: &SqueezeParams, x: f64, y: f64) -> (f64, f64) {
    let (s, c) = sq.theta().sin_cos();
    (x * c - y * s, x * s + y * c)
}

pub fn squeezed_closed_at(kind: SqueezedKind, sq: &SqueezeParams, x: f64, y: f64) -> f64 {
    let (grow, shrink) = ((2.0 * sq.z()).exp(), (-2.0 * sq.z()).exp());
    match kind {
        SqueezedKind::Fock(k) => {
            let (u, v) = squeezed_quadratures(sq, x, y);
            let q = grow * u * u + shrink * v * v;
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            FRAC_2_PI * sign * (-2.0 * q).exp() * laguerre_assoc(k, 0, 4.0 * q)
        }
        SqueezedKind::Coherent(alpha) => {
            let (u, v) = squeezed_quadratures(sq, x - alpha.re, y - alpha.im);
            FRAC_2_PI * (-2.0 * grow * u * u - 2.0 * shrink * v * v).exp()
        }
        SqueezedKind::Thermal(n_th) => {
            let (u, v) = squeezed_quadratures(sq, x, y);
            let s = 1.0 + 2.0 * n_th;
            FRAC_2_PI / s * (-2.0 / s * (grow * u * u + shrink * v * v)).exp()
        }
    }
}

pub fn wigner_squeezed_closed(kind: SqueezedKind, sq: &SqueezeParams, grid: &PhaseGrid) -> Result<WignerField> {
    if let SqueezedKind::Thermal(n) = kind {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter(format!("thermal occupation {n}")));
        }
    }
    WignerField::from_fn(*grid, |x, y| squeezed_closed_at(kind, sq, x, y))
}

pub fn tls_incoherent_closed_at(gamma: f64, pump: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let linewidth = gamma + pump;
    2.0 * (-2.0 * r2).exp() / (PI * linewidth) * (gamma - pump * (1.0 - 4.0 * r2))
}

/// Coherently driven emitter; `r cos φ = x` and `r sin φ = y`.
pub fn tls_coherent_closed_at(gamma: f64, omega: f64, delta: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let denom = gamma * gamma + 8.0 * omega * omega + 4.0 * delta * delta;
    let bracket =
        gamma * gamma + 4.0 * delta * delta - 8.0 * omega * (2.0 * delta * x + gamma * y) + 16.0 * omega * omega * r2;
    2.0 * (-2.0 * r2).exp() / (PI * denom) * bracket
}

fn check_rates(gamma: f64, others: &[f64]) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay rate must be positive, got {gamma}"
        )));
    }
    if others.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("rates must be finite".into()));
    }
    Ok(())
}

pub fn wigner_tls_incoherent(gamma: f64, pump: f64, grid: &PhaseGrid) -> Result<WignerField> {
    check_rates(gamma, &[pump])?;
    if pump < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pump must be non-negative, got {pump}"
        )));
    }
    WignerField::from_fn(*grid, |x, y| tls_incoherent_closed_at(gamma, pump, x, y))
}

pub fn wigner_tls_coherent(gamma: f64, omega: f64, delta: f64, grid: &PhaseGrid) -> Result<WignerField> {
    check_rates(gamma, &[omega, delta])?;
    WignerField::from_fn(*grid, |x, y| tls_coherent_closed_at(gamma, omega, delta, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// `Σ_j (-1)^j C(n+k, n-j) x^j / j!`
    fn laguerre_by_sum(n: usize, k: usize, x: f64) -> f64 {
        let binom = |a: usize, b: usize| -> f64 { (0..b).map(|i| (a - i) as f64 / (i + 1) as f64).product() };
        (0..=n)
            .map(|j| {
                let fact: f64 = (1..=j).map(|i| i as f64).product();
                let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * binom(n + k, n - j) * x.powi(j as i32) / fact
            })
            .sum()
    }

    #[test]
    fn laguerre_values() {
        for k in 0..5 {
            assert_eq!(laguerre_assoc(0, k, 3.7), 1.0);
        }
        for x in [0.0, 0.3, 2.0, 7.5] {
            assert_abs_diff_eq!(laguerre_assoc(1, 1, x), 2.0 - x, epsilon = 1e-15);
        }
        let direct = laguerre_by_sum(3, 2, 4.0);
        assert_abs_diff_eq!(laguerre_assoc(3, 2, 4.0), direct, epsilon = 1e-13);
        // L_3^2(4) = 10 - 40 + 40 - 64/6
        assert_abs_diff_eq!(direct, -2.0 / 3.0, epsilon = 1e-13);
        for (n, k, x) in [(7, 0, 1.3), (5, 3, 9.0), (10, 2, 0.25)] {
            let a = laguerre_assoc(n, k, x);
            let b = laguerre_by_sum(n, k, x);
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "L_{n}^{k}({x}): {a} vs {b}");
        }
        let mut seq = [0.0; 8];
        laguerre_sequence(3, 2.2, &mut seq);
        for (j, v) in seq.iter().enumerate() {
            assert_eq!(*v, laguerre_assoc(j, 3, 2.2));
        }
    }

    #[test]
    fn low_order_coefficients() {
        let two_pi = FRAC_2_PI;
        assert_abs_diff_eq!(wigner_coefficient(0, 0, 0.0, 0.3).re, two_pi, epsilon = 1e-15);
        assert_abs_diff_eq!(wigner_coefficient(1, 1, 0.0, 1.1).re, -two_pi, epsilon = 1e-15);
        let w10 = wigner_coefficient(1, 0, 0.5, PI / 2.0);
        let expected = Complex64::new(0.0, two_pi * (-0.5f64).exp());
        assert!((w10 - expected).norm() < 1e-15);
    }

    #[test]
    fn coefficient_vanishes_off_diagonal_at_origin() {
        for (mu, nu) in [(1, 0), (0, 3), (4, 2)] {
            assert_eq!(wigner_coefficient(mu, nu, 0.0, 0.7), Complex64::new(0.0, 0.0));
        }
    }

    proptest! {
        #[test]
        fn coefficient_conjugate_swap(mu in 0usize..8, nu in 0usize..8, r in 0.0f64..3.0, phi in -4.0f64..4.0) {
            let a = wigner_coefficient(mu, nu, r, phi);
            let b = wigner_coefficient(nu, mu, r, phi);
            prop_assert!((a.conj() - b).norm() <= 1e-15 * a.norm().max(1.0));
        }

        #[test]
        fn coefficient_bounded(mu in 0usize..12, nu in 0usize..12, r in 0.0f64..4.0, phi in -4.0f64..4.0) {
            // |W_μ^ν| <= 2/π: each is the Wigner function of a unit-norm operator |ν><μ|
            prop_assert!(wigner_coefficient(mu, nu, r, phi).norm() <= FRAC_2_PI + 1e-12);
        }
    }

    #[test]
    fn series_evaluator_matches_coefficients() {
        let rho = states::coherent_state(Complex64::new(0.7, -0.4), 20).unwrap();
        let eval = SeriesEvaluator::new(&rho);
        for &(x, y) in &[(0.3, -0.2), (-1.1, 0.8), (0.0, 0.0), (2.0, 1.5)] {
            let (r, phi) = to_polar(x, y);
            let mut direct = Complex64::new(0.0, 0.0);
            for m in 0..rho.dim() {
                for n in 0..rho.dim() {
                    direct += rho.get(m, n) * wigner_coefficient(n, m, r, phi);
                }
            }
            let fast = eval.eval_complex(x, y);
            assert!((fast - direct).norm() < 1e-13, "{fast} vs {direct}");
        }
    }

    #[test]
    fn series_examples() {
        let grid = PhaseGrid::square(2.0, 21).unwrap();
        let vac = states::fock_state(0, 3).unwrap();
        let w = wigner_series(&vac, &grid).unwrap();
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let (x, y) = (grid.x(ix), grid.y(iy));
                assert_abs_diff_eq!(
                    w.at(ix, iy),
                    FRAC_2_PI * (-2.0 * (x * x + y * y)).exp(),
                    epsilon = 1e-15
                );
            }
        }
        let two = states::fock_state(2, 4).unwrap();
        assert_abs_diff_eq!(wigner_series_at(&two, 0.0, 0.0).unwrap(), FRAC_2_PI, epsilon = 1e-15);
        let th = states::thermal_state(1.0, 60).unwrap();
        assert_abs_diff_eq!(
            wigner_series_at(&th, 0.0, 0.0).unwrap(),
            2.0 / (3.0 * PI),
            epsilon = 1e-15
        );
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(fock_closed_at(1, 0.0, 0.0), -FRAC_2_PI, epsilon = 1e-16);
        assert_abs_diff_eq!(fock_closed_at(1, 0.5, 0.0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(fock_closed_at(1, 0.3, 0.4), 0.0, epsilon = 1e-16);
        let alpha = Complex64::new(1.0, 1.0);
        assert_abs_diff_eq!(coherent_closed_at(alpha, 1.0, 1.0), FRAC_2_PI, epsilon = 1e-16);
        for angle in [0.0, 1.0, 2.5, -2.0] {
            let d: f64 = 0.8;
            let v = coherent_closed_at(alpha, 1.0 + d * f64::cos(angle), 1.0 + d * f64::sin(angle));
            assert_abs_diff_eq!(v, FRAC_2_PI * (-2.0 * d * d).exp(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(thermal_closed_at(1.0, 0.0, 0.0), 2.0 / (3.0 * PI), epsilon = 1e-16);
        assert_eq!(
            thermal_closed_at(0.0, 0.4, -0.9),
            coherent_closed_at(Complex64::new(0.0, 0.0), 0.4, -0.9)
        );

        assert_abs_diff_eq!(tls_incoherent_closed_at(1.0, 1.0, 0.0, 0.0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(tls_incoherent_closed_at(1.0, 3.0, 0.0, 0.0), -1.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(
            tls_incoherent_closed_at(2.0, 0.0, 0.3, 0.2),
            fock_closed_at(0, 0.3, 0.2),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            tls_coherent_closed_at(1.0, 0.0, 0.4, 0.3, 0.2),
            fock_closed_at(0, 0.3, 0.2),
            epsilon = 1e-16
        );
        // Ω = γ/2, Δ = 0, r = 1/4, φ = π/2: bracket = 1 - 4·0.25 + 4·0.0625 = 0.25
        let expected = 2.0 * (-0.125f64).exp() / (3.0 * PI) * 0.25;
        assert_abs_diff_eq!(
            tls_coherent_closed_at(1.0, 0.5, 0.0, 0.0, 0.25),
            expected,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(expected, 0.04681, epsilon = 1e-5);
    }

    #[test]
    fn squeezed_closed_forms_reduce_and_pin_origin() {
        let flat = SqueezeParams::new(0.0, 0.7).unwrap();
        let sq = SqueezeParams::new(0.5, PI / 4.0).unwrap();
        let alpha = Complex64::new(1.0, 1.0);
        for &(x, y) in &[(0.2, -0.3), (1.0, 0.4), (-1.5, 2.0)] {
            assert_abs_diff_eq!(
                squeezed_closed_at(SqueezedKind::Fock(2), &flat, x, y),
                fock_closed_at(2, x, y),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                squeezed_closed_at(SqueezedKind::Coherent(alpha), &flat, x, y),
                coherent_closed_at(alpha, x, y),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                squeezed_closed_at(SqueezedKind::Thermal(1.0), &flat, x, y),
                thermal_closed_at(1.0, x, y),
                epsilon = 1e-15
            );
        }
        for k in 0..5usize {
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(
                squeezed_closed_at(SqueezedKind::Fock(k), &sq, 0.0, 0.0),
                sign * FRAC_2_PI,
                epsilon = 1e-16
            );
        }
        assert_abs_diff_eq!(
            squeezed_closed_at(SqueezedKind::Thermal(2.0), &sq, 0.0, 0.0),
            FRAC_2_PI / 5.0,
            epsilon = 1e-16
        );
    }

    #[test]
    fn coherent_drive_field_stays_non_negative() {
        let grid = PhaseGrid::square(3.0, 241).unwrap();
        for omega in [0.08, 0.2, 0.5, 2.0] {
            for delta in [0.0, 1.0] {
                let f = wigner_tls_coherent(1.0, omega, delta, &grid).unwrap();
                let min = f.values().iter().copied().fold(f64::INFINITY, f64::min);
                assert!(min >= 0.0, "Ω={omega} Δ={delta}: min {min}");
            }
        }
    }

    #[test]
    fn grid_parse_and_errors() {
        let g = PhaseGrid::parse("-3:3:301,-2:2.5:11").unwrap();
        assert_eq!((g.nx, g.ny, g.y_max), (301, 11, 2.5));
        assert_eq!(g.x(300), 3.0);
        assert!(PhaseGrid::parse("-3:3:1,-3:3:5").is_err());
        assert!(PhaseGrid::parse("3:-3:10,-3:3:5").is_err());
        assert!(PhaseGrid::parse("nonsense").is_err());
    }

    #[test]
    fn non_hermitian_series_input_is_rejected() {
        let rho = states::fock_state(0, 2).unwrap();
        let mut m = rho.into_matrix();
        m[(0, 1)] = Complex64::new(0.0, 0.2);
        let bad = DensityMatrix::from_trusted(m);
        assert!(matches!(
            wigner_series_at(&bad, 0.4, 0.1),
            Err(Error::ImaginaryResidue { .. })
        ));
    }
}
