//! Brute-force cross-checks for the analytic machinery.
//!
//! Nothing here shares code paths with the series evaluator or the
//! superoperator assembly: factorials, Laguerre polynomials and the master
//! equation right-hand side are recomputed from their definitions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::ComplexMatrix;
use crate::states::{DriveConfig, DriveMode};

/// Largest Fock index accepted by the quadrature.
pub const MAX_ORDER: usize = 8;

/// Polar product rule: composite Simpson in `|β|` on `[0, b_max]`,
/// trapezoid in `arg β`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub b_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // e^{-b²/2} L_4^k(b²) is still ~1e-3 at b = 6; 10 pushes it below 1e-13.
        Self {
            b_max: 10.0,
            n_radial: 2000,
            n_angular: 512,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.b_max > 0.0 && self.b_max.is_finite()) || self.n_radial < 64 || self.n_angular < 64 {
            return Err(Error::InvalidParameter(format!("quadrature {self:?}")));
        }
        Ok(())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `L_n^k(x)` from its explicit power series.
pub fn laguerre_explicit(n: usize, k: usize, x: f64) -> f64 {
    (0..=n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(n + k, n - i) * x.powi(i as i32) / factorial(i)
        })
        .sum()
}

/// Matrix element `<μ|D(β)|ν>` of the displacement operator.
pub fn displaced_fock_coefficient(mu: usize, nu: usize, beta: Complex64) -> Complex64 {
    let b2 = beta.norm_sqr();
    let gauss = (-b2 / 2.0).exp();
    if mu >= nu {
        let d = mu - nu;
        let norm = (factorial(nu) / factorial(mu)).sqrt();
        beta.powu(d as u32) * (norm * gauss * laguerre_explicit(nu, d, b2))
    } else {
        let d = nu - mu;
        let norm = (factorial(mu) / factorial(nu)).sqrt();
        (-beta.conj()).powu(d as u32) * (norm * gauss * laguerre_explicit(mu, d, b2))
    }
}

/// `(1/π²) ∫ d²β <μ|D(β)|ν> e^{αβ* - α*β}` with `d²β = d(Re β) d(Im β)`.
pub fn wigner_coefficient_bruteforce(
    mu: usize,
    nu: usize,
    alpha: Complex64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    if mu > MAX_ORDER || nu > MAX_ORDER {
        return Err(Error::CostGuard { mu, nu });
    }
    quad.validate()?;
    let n_r = quad.n_radial + quad.n_radial % 2;
    let h = quad.b_max / n_r as f64;
    let dtheta = 2.0 * PI / quad.n_angular as f64;
    let units: Vec<Complex64> = (0..quad.n_angular)
        .map(|k| Complex64::from_polar(1.0, k as f64 * dtheta))
        .collect();

    let shells: Vec<Complex64> = (0..=n_r)
        .into_par_iter()
        .map(|i| {
            let b = i as f64 * h;
            if b == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // <μ|D(b e^{iθ})|ν> = e^{i(μ-ν)θ} <μ|D(b)|ν>
            let radial = displaced_fock_coefficient(mu, nu, Complex64::new(b, 0.0));
            let ring: Complex64 = units
                .iter()
                .map(|u| {
                    let beta = u * b;
                    let kernel = Complex64::new(0.0, 2.0 * (alpha * beta.conj()).im).exp();
                    let turn = if mu >= nu {
                        u.powu((mu - nu) as u32)
                    } else {
                        u.conj().powu((nu - mu) as u32)
                    };
                    radial * turn * kernel
                })
                .sum();
            let weight = if i == n_r {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            ring * (weight * b * dtheta)
        })
        .collect();
    let total: Complex64 = shells.iter().sum();
    Ok(total * (h / 3.0) / (PI * PI))
}

/// Right-hand side of the cascaded master equation, from operator products.
#[derive(Clone, Debug)]
pub struct CascadeRhs {
    h: ComplexMatrix,
    collapses: Vec<(f64, ComplexMatrix)>,
    xi: ComplexMatrix,
    a: ComplexMatrix,
    coupling: f64,
}

fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    ComplexMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

impl CascadeRhs {
    pub fn new(drive: &DriveConfig, gamma_det: f64, detuning_det: f64, dim_a: usize) -> Self {
        let c = |v: f64| Complex64::new(v, 0.0);
        let sigma = ComplexMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0) } else { c(0.0) });
        let lower = ComplexMatrix::from_fn(
            dim_a,
            dim_a,
            |i, j| if j == i + 1 { c((j as f64).sqrt()) } else { c(0.0) },
        );
        let id2 = ComplexMatrix::identity(2, 2);
        let id_a = ComplexMatrix::identity(dim_a, dim_a);
        let xi = kron(&sigma, &id_a);
        let a = kron(&id2, &lower);
        let mut h = a.adjoint() * &a * c(detuning_det);
        let mut collapses = vec![(drive.gamma, xi.clone()), (gamma_det, a.clone())];
        match drive.mode {
            DriveMode::Incoherent => collapses.push((drive.pump, xi.adjoint())),
            DriveMode::Coherent => {
                h += xi.adjoint() * &xi * c(drive.delta) + (&xi + xi.adjoint()) * c(drive.omega);
            }
        }
        Self {
            h,
            collapses,
            xi,
            a,
            coupling: (drive.gamma * gamma_det).sqrt(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn eval(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mi = Complex64::new(0.0, -1.0);
        let mut out = (&self.h * rho - rho * &self.h) * mi;
        for (rate, c) in &self.collapses {
            let cd = c.adjoint();
            let cdc = &cd * c;
            out +=
                (c * rho * &cd * Complex64::new(2.0, 0.0) - rho * &cdc - &cdc * rho) * Complex64::new(rate / 2.0, 0.0);
        }
        let ad = self.a.adjoint();
        let xid = self.xi.adjoint();
        let xr = &self.xi * rho;
        let rx = rho * &xid;
        let casc = &xr * &ad - &ad * &xr + &self.a * &rx - &rx * &self.a;
        out + casc * Complex64::new(self.coupling, 0.0)
    }

    /// Classical fourth-order Runge-Kutta from `rho0` with step `dt` to `t_end`.
    pub fn propagate(&self, rho0: &ComplexMatrix, dt: f64, t_end: f64) -> ComplexMatrix {
        let steps = (t_end / dt).ceil() as usize;
        let half = Complex64::new(dt / 2.0, 0.0);
        let full = Complex64::new(dt, 0.0);
        let sixth = Complex64::new(dt / 6.0, 0.0);
        let two = Complex64::new(2.0, 0.0);
        let mut rho = rho0.clone();
        for _ in 0..steps {
            let k1 = self.eval(&rho);
            let k2 = self.eval(&(&rho + &k1 * half));
            let k3 = self.eval(&(&rho + &k2 * half));
            let k4 = self.eval(&(&rho + &k3 * full));
            rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        rho
    }

    /// Long-time state from the joint ground state, `t_end = 50/γ`, `dt = 10⁻²/γ`.
    pub fn long_time_state(&self, gamma: f64) -> ComplexMatrix {
        let d = self.dim();
        let mut rho0 = ComplexMatrix::zeros(d, d);
        rho0[(0, 0)] = Complex64::new(1.0, 0.0);
        self.propagate(&rho0, 1e-2 / gamma, 50.0 / gamma)
    }
}
