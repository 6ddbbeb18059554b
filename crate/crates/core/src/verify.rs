//! Self-verification suite run by `wigner verify`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_3, FRAC_PI_4, PI};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::fockspace::{identity, lowering_2ls, max_abs_diff};
use crate::liouvillian::{
    build_liouvillian, cascade_liouvillian, cascade_observed_state, steady_state, DetectorConfig,
};
use crate::oracle::{displaced_fock_coefficient, wigner_coefficient_bruteforce, CascadeRhs, QuadratureSpec};
use crate::states::{
    coherent_state, fock_state, thermal_state, tls_steady_coherent, tls_steady_incoherent, DriveConfig,
};
use crate::wigner::{
    wigner_coefficient, wigner_coherent_closed, wigner_fock_closed, wigner_series, wigner_thermal_closed,
    wigner_tls_coherent, wigner_tls_incoherent, PhaseGrid, WignerField,
};

pub const ORACLE_TOL: f64 = 1e-6;
pub const LOW_ORDER_REL_TOL: f64 = 1e-14;
pub const SERIES_TOL: f64 = 1e-8;
pub const STEADY_TOL: f64 = 1e-10;
pub const TIME_INTEGRATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn max_order(self) -> usize {
        match self {
            Level::Quick => 2,
            Level::Full => 4,
        }
    }
}

/// Deliberate corruption of one analytic coefficient, for testing the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Fault {
    pub mu: usize,
    pub nu: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<Check>,
    pub duration_seconds: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn check(name: impl Into<String>, error: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        passed: error.is_finite() && error <= tolerance,
        error,
        tolerance,
    }
}

/// Phase-space points used by the coefficient oracle.
pub fn oracle_points() -> [Complex64; 4] {
    [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::from_polar(1.2, FRAC_PI_4),
        Complex64::from_polar(2.0, -FRAC_PI_3),
    ]
}

fn analytic(mu: usize, nu: usize, alpha: Complex64, fault: Option<Fault>) -> Complex64 {
    let v = wigner_coefficient(mu, nu, alpha.norm(), alpha.arg());
    match fault {
        Some(f) if f.mu == mu && f.nu == nu => v * 1.001 + 1e-3,
        _ => v,
    }
}

fn coefficient_checks(level: Level, fault: Option<Fault>, out: &mut Vec<Check>) {
    let quad = QuadratureSpec::default();
    let n = level.max_order();
    for mu in 0..=n {
        for nu in 0..=n {
            for alpha in oracle_points() {
                let err = match wigner_coefficient_bruteforce(mu, nu, alpha, &quad) {
                    Ok(num) => (num - analytic(mu, nu, alpha, fault)).norm(),
                    Err(_) => f64::INFINITY,
                };
                let name = format!(
                    "coefficient W_{mu}^{nu}(alpha={:.3}{:+.3}i) vs quadrature",
                    alpha.re, alpha.im
                );
                out.push(check(name, err, ORACLE_TOL));
            }
        }
    }
}

/// The four low-order coefficients in closed form.
pub fn low_order_coefficient(mu: usize, nu: usize, r: f64, phi: f64) -> Complex64 {
    let g = (-2.0 * r * r).exp();
    match (mu, nu) {
        (0, 0) => Complex64::new(FRAC_2_PI * g, 0.0),
        (0, 1) => Complex64::from_polar(4.0 / PI * g * r, -phi),
        (1, 0) => Complex64::from_polar(4.0 / PI * g * r, phi),
        (1, 1) => Complex64::new(FRAC_2_PI * g * (4.0 * r * r - 1.0), 0.0),
        _ => unreachable!("only 0 and 1 are tabulated"),
    }
}

fn low_order_checks(fault: Option<Fault>, out: &mut Vec<Check>) {
    for (mu, nu) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut worst = 0.0f64;
        for &r in &[0.1, 0.37, 0.8, 1.3, 2.1] {
            for &phi in &[-2.5, 0.0, 0.6, 1.9, 3.0] {
                let alpha = Complex64::from_polar(r, phi);
                let a = analytic(mu, nu, alpha, fault);
                let b = low_order_coefficient(mu, nu, r, phi);
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
        out.push(check(
            format!("low-order coefficient W_{mu}^{nu}"),
            worst,
            LOW_ORDER_REL_TOL,
        ));
    }
}

fn unitarity_check(out: &mut Vec<Check>) {
    let mut worst = 0.0f64;
    for mu in 0..=3 {
        for beta in [Complex64::new(0.3, 0.1), Complex64::from_polar(1.5, 0.7)] {
            let s: f64 = (0..=60)
                .map(|nu| displaced_fock_coefficient(mu, nu, beta).norm_sqr())
                .sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    out.push(check("displacement matrix column norms", worst, 1e-10));
}

fn series_checks(level: Level, out: &mut Vec<Check>) {
    let n = match level {
        Level::Quick => 61,
        Level::Full => 301,
    };
    let g = PhaseGrid::square(3.0, n).expect("static grid");
    let diff = |a: crate::Result<WignerField>, b: crate::Result<WignerField>| match (a, b) {
        (Ok(a), Ok(b)) => crate::metrics::compare_fields(&a, &b)
            .map(|d| d.0)
            .unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    };
    for k in 0..=5 {
        let e = diff(
            fock_state(k, 40).and_then(|r| wigner_series(&r, &g)),
            wigner_fock_closed(k, &g),
        );
        out.push(check(format!("series vs closed form, Fock {k}"), e, SERIES_TOL));
    }
    for alpha in [Complex64::new(1.0, 1.0), Complex64::new(1.5, 0.0)] {
        let e = diff(
            coherent_state(alpha, 40).and_then(|r| wigner_series(&r, &g)),
            wigner_coherent_closed(alpha, &g),
        );
        out.push(check(format!("series vs closed form, coherent {alpha}"), e, SERIES_TOL));
    }
    for n_th in [0.5, 2.0] {
        let e = diff(
            thermal_state(n_th, 60).and_then(|r| wigner_series(&r, &g)),
            wigner_thermal_closed(n_th, &g),
        );
        out.push(check(format!("series vs closed form, thermal {n_th}"), e, SERIES_TOL));
    }
    let e = diff(
        tls_steady_incoherent(1.0, 2.0).and_then(|r| wigner_series(&r, &g)),
        wigner_tls_incoherent(1.0, 2.0, &g),
    );
    out.push(check("series vs closed form, incoherent emitter", e, SERIES_TOL));
    let e = diff(
        tls_steady_coherent(1.0, 0.5, 1.0).and_then(|r| wigner_series(&r, &g)),
        wigner_tls_coherent(1.0, 0.5, 1.0, &g),
    );
    out.push(check("series vs closed form, coherent emitter", e, SERIES_TOL));
}

fn steady_state_checks(out: &mut Vec<Check>) {
    let s = lowering_2ls();
    let zero = identity(2) * Complex64::new(0.0, 0.0);
    let mut worst = 0.0f64;
    for pump in [0.5, 1.0, 2.0] {
        let e = build_liouvillian(&zero, &[(1.0, s.clone()), (pump, s.adjoint())])
            .and_then(|l| steady_state(&l))
            .and_then(|ss| {
                Ok(max_abs_diff(
                    ss.rho.matrix(),
                    tls_steady_incoherent(1.0, pump)?.matrix(),
                ))
            })
            .unwrap_or(f64::INFINITY);
        worst = worst.max(e);
    }
    out.push(check("Lindblad steady state, incoherent emitter", worst, STEADY_TOL));
    let mut worst = 0.0f64;
    for omega in [0.01, 0.08, 0.2, 0.5, 1.0] {
        for delta in [0.0, 1.0] {
            let h = s.adjoint() * &s * Complex64::new(delta, 0.0) + (&s + s.adjoint()) * Complex64::new(omega, 0.0);
            let e = build_liouvillian(&h, &[(1.0, s.clone())])
                .and_then(|l| steady_state(&l))
                .and_then(|ss| {
                    Ok(max_abs_diff(
                        ss.rho.matrix(),
                        tls_steady_coherent(1.0, omega, delta)?.matrix(),
                    ))
                })
                .unwrap_or(f64::INFINITY);
            worst = worst.max(e);
        }
    }
    out.push(check("Lindblad steady state, coherent emitter", worst, STEADY_TOL));
}

fn cascade_checks(out: &mut Vec<Check>) {
    let drive = DriveConfig {
        mode: crate::states::DriveMode::Coherent,
        gamma: 1.0,
        pump: 0.0,
        omega: 1.0,
        delta: 0.0,
    };
    let det = DetectorConfig {
        gamma: 10.0,
        detuning_a: 0.0,
        dim_a: 12,
    };
    let err = cascade_liouvillian(&drive, &det)
        .and_then(|(l, _)| steady_state(&l))
        .map(|ss| {
            let rk = CascadeRhs::new(&drive, det.gamma, det.detuning_a, det.dim_a).long_time_state(drive.gamma);
            max_abs_diff(&rk, ss.rho.matrix())
        })
        .unwrap_or(f64::INFINITY);
    out.push(check(
        "cascade steady state vs time integration",
        err,
        TIME_INTEGRATION_TOL,
    ));
    let err = cascade_observed_state(&drive, &det)
        .and_then(|r| {
            Ok(max_abs_diff(
                r.rho_emitter.matrix(),
                drive.emitter_steady_state()?.matrix(),
            ))
        })
        .unwrap_or(f64::INFINITY);
    out.push(check(
        "cascade leaves the emitter unperturbed",
        err,
        TIME_INTEGRATION_TOL,
    ));
}

pub fn run(level: Level, fault: Option<Fault>) -> Report {
    let start = Instant::now();
    let mut checks = Vec::new();
    low_order_checks(fault, &mut checks);
    unitarity_check(&mut checks);
    coefficient_checks(level, fault, &mut checks);
    series_checks(level, &mut checks);
    steady_state_checks(&mut checks);
    if level == Level::Full {
        cascade_checks(&mut checks);
    }
    Report {
        level,
        checks,
        duration_seconds: start.elapsed().as_secs_f64(),
    }
}
