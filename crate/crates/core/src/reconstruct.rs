//! Effective detector states.
//!
//! Two models relate the observed detector state `ρ̃` to an effective state
//! whose occupation equals a target `n`:
//!
//! * mixture: `ρ̃ = α|0><0| + (1 - α) ρ_a`;
//! * superposition: `ρ̃ ≈ |φ><φ|` with `|φ> = (α|0> + β|ψ>)/√N`, `ρ_a = |ψ><ψ|`.
//!
//! For the superposition the occupation of the model must equal that of `ρ̃`
//! and `<ψ|a†a|ψ> = n`. The fit maximizes `<φ|ρ̃|φ>` over unit `|φ>` obeying
//! both, which is the same as minimizing the Frobenius distance. The
//! decomposition of `|φ>` into `α`, `β`, `|ψ>` is not unique; the one with the
//! smallest vacuum weight `α` is returned.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{
    hermitian_eigen_desc, hermitian_eigenvalues, occupation, validate_density_with, ComplexMatrix, DensityMatrix,
    Tolerances,
};

/// `α` at or above `1 - DEGENERATE_MARGIN` means the input is vacuum.
pub const DEGENERATE_MARGIN: f64 = 1e-12;
/// Most negative eigenvalue accepted for a mixture effective state.
pub const NONPHYSICAL_LIMIT: f64 = -1e-8;
/// Tolerance on the occupation constraint of the fit.
pub const OCCUPATION_TOL: f64 = 1e-8;
/// Number of starting points of the fit.
pub const FIT_STARTS: usize = 8;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mixture,
    Superposition,
}

/// Weights of the fitted model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VacuumWeight {
    Mixture { alpha: f64 },
    Superposition { alpha: f64, beta: Complex64, norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Occupation of the effective state minus the target.
    pub occupation_error: f64,
    /// Smallest eigenvalue of the effective state before validation.
    pub positivity_margin: f64,
    /// Occupation of the model minus that of the observed state.
    pub model_occupation_error: f64,
    /// Set when the input carries no information about `|ψ>`.
    pub effective_state_undetermined: bool,
    /// Start index that produced the reported fit.
    pub best_start: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionResult {
    pub model: Model,
    pub weights: VacuumWeight,
    pub effective_state: DensityMatrix,
    /// `‖ρ̃ - model‖_F`.
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_target(n_target: f64) -> Result<()> {
    if !(n_target > 0.0 && n_target.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target occupation must be positive, got {n_target}"
        )));
    }
    Ok(())
}

/// Removes the vacuum excess so the remainder has occupation `n_target`.
pub fn strip_vacuum_mixture(rho_obs: &DensityMatrix, n_target: f64) -> Result<ReconstructionResult> {
    check_target(n_target)?;
    let observed = occupation(rho_obs);
    if observed > n_target {
        return Err(Error::Infeasible {
            observed,
            target: n_target,
        });
    }
    let alpha = 1.0 - observed / n_target;
    if alpha >= 1.0 - DEGENERATE_MARGIN {
        return Err(Error::Degenerate { vacuum_weight: alpha });
    }
    let mut m = rho_obs.matrix().clone();
    m[(0, 0)] -= Complex64::new(alpha, 0.0);
    m /= Complex64::new(1.0 - alpha, 0.0);
    let min_eigenvalue = hermitian_eigenvalues(&m)[0];
    if min_eigenvalue < NONPHYSICAL_LIMIT {
        return Err(Error::NonPhysical { min_eigenvalue });
    }
    let tol = Tolerances {
        positivity: -NONPHYSICAL_LIMIT,
        ..Tolerances::default()
    };
    let effective_state = validate_density_with(&m, &tol)?;

    let mut model = effective_state.matrix() * Complex64::new(1.0 - alpha, 0.0);
    model[(0, 0)] += Complex64::new(alpha, 0.0);
    let residual = frobenius(&(rho_obs.matrix() - &model));
    let occupation_error = occupation(&effective_state) - n_target;
    Ok(ReconstructionResult {
        model: Model::Mixture,
        weights: VacuumWeight::Mixture { alpha },
        effective_state,
        residual,
        diagnostics: Diagnostics {
            occupation_error,
            positivity_margin: min_eigenvalue,
            model_occupation_error: 0.0,
            effective_state_undetermined: false,
            best_start: None,
        },
    })
}

/// Objective data for a fixed observed state.
struct Fit<'a> {
    rho: &'a ComplexMatrix,
    /// `ρ̃` restricted to the non-vacuum block.
    block: ComplexMatrix,
    /// `<k|ρ̃|0>` for `k >= 1`.
    column: DVector<Complex64>,
    n_obs: f64,
    /// Smallest allowed occupation of the normalized non-vacuum part.
    floor: f64,
}

impl<'a> Fit<'a> {
    fn new(rho: &'a ComplexMatrix, n_obs: f64, floor: f64) -> Self {
        let d = rho.nrows();
        Self {
            rho,
            block: rho.view((1, 1), (d - 1, d - 1)).into_owned(),
            column: rho.view((1, 0), (d - 1, 1)).column(0).into_owned(),
            n_obs,
            floor,
        }
    }

    fn chi_occupation(chi: &DVector<Complex64>) -> f64 {
        chi.iter().enumerate().map(|(k, z)| (k + 1) as f64 * z.norm_sqr()).sum()
    }

    /// `|φ>` built from a unit non-vacuum direction `χ`.
    fn phi(&self, chi: &DVector<Complex64>) -> DVector<Complex64> {
        let s = self.n_obs / Self::chi_occupation(chi);
        let mut phi = DVector::zeros(chi.len() + 1);
        phi[0] = Complex64::new((1.0 - s).max(0.0).sqrt(), 0.0);
        for k in 0..chi.len() {
            phi[k + 1] = chi[k] * s.sqrt();
        }
        phi
    }

    fn value(&self, chi: &DVector<Complex64>) -> f64 {
        let phi = self.phi(chi);
        (phi.adjoint() * self.rho * &phi)[(0, 0)].re
    }

    /// Gradient of [`Self::value`] with respect to `χ`, as `2 ∂f/∂χ*`.
    fn gradient(&self, chi: &DVector<Complex64>) -> DVector<Complex64> {
        let nhat = Self::chi_occupation(chi);
        let s = (self.n_obs / nhat).min(1.0);
        let g = (s * (1.0 - s)).max(0.0).sqrt();
        let q = (chi.adjoint() * &self.block * chi)[(0, 0)].re;
        let p = (self.column.adjoint() * chi)[(0, 0)].re;
        let n_chi = DVector::from_iterator(chi.len(), chi.iter().enumerate().map(|(k, z)| z * (k + 1) as f64));
        let grad_s = &n_chi * Complex64::new(-2.0 * self.n_obs / (nhat * nhat), 0.0);
        let dg = if g > 1e-300 { (1.0 - 2.0 * s) / (2.0 * g) } else { 0.0 };
        let ds_coeff = -self.rho[(0, 0)].re + q + 2.0 * dg * p;
        grad_s * Complex64::new(ds_coeff, 0.0)
            + &self.block * chi * Complex64::new(2.0 * s, 0.0)
            + &self.column * Complex64::new(2.0 * g, 0.0)
    }

    /// Maps `χ` onto the feasible set `‖χ‖ = 1`, `n̂(χ) >= floor`.
    fn project(&self, chi: &DVector<Complex64>) -> Option<DVector<Complex64>> {
        let norm = chi.norm();
        if norm.is_nan() || norm <= 0.0 {
            return None;
        }
        let chi = chi / Complex64::new(norm, 0.0);
        if Self::chi_occupation(&chi) >= self.floor {
            return Some(chi);
        }
        let tilt = |lambda: f64| {
            let v = DVector::from_iterator(
                chi.len(),
                chi.iter().enumerate().map(|(k, z)| z * lambda.powi(k as i32)),
            );
            let n = v.norm();
            v / Complex64::new(n, 0.0)
        };
        let top = chi.len();
        if (top as f64) < self.floor || chi[top - 1].norm() == 0.0 && chi.iter().all(|z| z.norm() == 0.0) {
            return None;
        }
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        while Self::chi_occupation(&tilt(hi)) < self.floor {
            hi *= 2.0;
            if hi > 1e12 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if Self::chi_occupation(&tilt(mid)) < self.floor {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(tilt(hi))
    }

    /// Projected gradient ascent with a backtracking step.
    fn ascend(&self, start: DVector<Complex64>) -> Option<(DVector<Complex64>, f64)> {
        let mut chi = self.project(&start)?;
        let mut f = self.value(&chi);
        let mut step = 0.1;
        for _ in 0..MAX_ITERATIONS {
            let grad = self.gradient(&chi);
            let radial = (chi.adjoint() * &grad)[(0, 0)].re;
            let tangent = &grad - &chi * Complex64::new(radial, 0.0);
            if tangent.norm() < 1e-14 {
                break;
            }
            let mut improved = false;
            while step > 1e-16 {
                if let Some(candidate) = self.project(&(&chi + &tangent * Complex64::new(step, 0.0))) {
                    let fc = self.value(&candidate);
                    if fc > f {
                        let gain = fc - f;
                        chi = candidate;
                        f = fc;
                        step *= 1.5;
                        improved = gain > 1e-17;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Some((chi, f))
    }
}

fn with_phase_fixed(v: &DVector<Complex64>) -> DVector<Complex64> {
    let pivot = v.iter().copied().fold(
        Complex64::new(0.0, 0.0),
        |best, z| if z.norm() > best.norm() { z } else { best },
    );
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    v * phase
}

/// Fits a pure vacuum-plus-`|ψ>` superposition with `<ψ|a†a|ψ> = n_target`.
pub fn fit_superposition(rho_obs: &DensityMatrix, n_target: f64, seed: u64) -> Result<ReconstructionResult> {
    check_target(n_target)?;
    let d = rho_obs.dim();
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "fit needs at least two levels",
        });
    }
    let rho = rho_obs.matrix();
    let n_obs = occupation(rho_obs).max(0.0);
    let floor = n_obs.max(n_target);
    if floor > (d - 1) as f64 {
        return Err(Error::NoFeasibleFit {
            best_residual: f64::INFINITY,
        });
    }
    let fit = Fit::new(rho, n_obs, floor);

    let mut starts: Vec<DVector<Complex64>> = Vec::with_capacity(FIT_STARTS);
    let mut vac = DVector::zeros(d - 1);
    vac[0] = Complex64::new(1.0, 0.0);
    starts.push(vac);
    let dominant = hermitian_eigen_desc(rho).swap_remove(0).1;
    let tail = dominant.rows(1, d - 1).into_owned();
    let base = if tail.norm() > 1e-12 {
        with_phase_fixed(&tail)
    } else {
        starts[0].clone()
    };
    starts.push(base.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 2..FIT_STARTS {
        let noise = DVector::from_fn(d - 1, |_, _| {
            Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
        });
        starts.push(&base + noise);
    }

    let mut best: Option<(usize, DVector<Complex64>, f64)> = None;
    for (i, s) in starts.into_iter().enumerate() {
        if let Some((chi, f)) = fit.ascend(s) {
            if best.as_ref().is_none_or(|b| f > b.2) {
                best = Some((i, chi, f));
            }
        }
    }
    let (start, chi, _) = best.ok_or(Error::NoFeasibleFit {
        best_residual: f64::INFINITY,
    })?;
    let phi = fit.phi(&chi);
    let model = &phi * phi.adjoint();
    let residual = frobenius(&(rho - &model));
    let model_occ: f64 = phi.iter().enumerate().map(|(k, z)| k as f64 * z.norm_sqr()).sum();
    if (model_occ - n_obs).abs() > OCCUPATION_TOL {
        return Err(Error::NoFeasibleFit {
            best_residual: residual,
        });
    }

    // |φ> = α|0> + β|ψ> with β² = ñ/n and minimal α >= 0.
    let beta2 = n_obs / n_target;
    let perp2: f64 = phi.iter().skip(1).map(|z| z.norm_sqr()).sum();
    let phi0 = phi[0].re;
    let undetermined = beta2 <= 1e-24;
    let (alpha, psi) = if undetermined {
        let t = n_target / Fit::chi_occupation(&chi);
        let mut psi = DVector::zeros(d);
        psi[0] = Complex64::new((1.0 - t).max(0.0).sqrt(), 0.0);
        for k in 0..d - 1 {
            psi[k + 1] = chi[k] * t.sqrt();
        }
        (1.0, psi)
    } else {
        let radius = (beta2 - perp2).max(0.0).sqrt();
        let (alpha, sign) = if phi0 >= radius {
            (phi0 - radius, 1.0)
        } else {
            (radius - phi0, -1.0)
        };
        let beta = beta2.sqrt();
        let mut psi = &phi * Complex64::new(sign / beta, 0.0);
        psi[0] -= Complex64::new(alpha / beta, 0.0);
        (alpha, psi)
    };
    let beta = Complex64::new(beta2.sqrt(), 0.0);
    let overlap = psi[0];
    let norm = alpha * alpha + beta.norm_sqr() + 2.0 * (alpha * beta.conj() * overlap).re;
    let psi = &psi / Complex64::new(psi.norm(), 0.0);
    let effective = &psi * psi.adjoint();
    let min_eigenvalue = hermitian_eigenvalues(&effective)[0];
    let effective_state = validate_density_with(&effective, &Tolerances::default())?;
    let occupation_error = occupation(&effective_state) - n_target;
    Ok(ReconstructionResult {
        model: Model::Superposition,
        weights: VacuumWeight::Superposition { alpha, beta, norm },
        effective_state,
        residual,
        diagnostics: Diagnostics {
            occupation_error,
            positivity_margin: min_eigenvalue,
            model_occupation_error: model_occ - n_obs,
            effective_state_undetermined: undetermined,
            best_start: Some(start),
        },
    })
}
