//! Scalar figures of merit for Wigner fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wigner::WignerField;

pub use crate::fockspace::occupation;

/// Largest `|W|` tolerated on the grid boundary when measuring negativity.
pub const BOUNDARY_LIMIT: f64 = 1e-8;

/// Summary of one field. `negativity` is `None` when the grid does not
/// cover the support of the field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMetrics {
    pub integral: f64,
    pub negativity: Option<f64>,
    pub min: f64,
    pub argmin: [f64; 2],
    pub max_abs: f64,
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if n == 1 || i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Trapezoid rule of `f(x, y, W)` over the grid.
pub fn integrate_with<F>(field: &WignerField, f: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let g = field.grid();
    let mut total = 0.0;
    for iy in 0..g.ny {
        let y = g.y(iy);
        let wy = trapezoid_weight(iy, g.ny);
        let mut row = 0.0;
        for ix in 0..g.nx {
            row += trapezoid_weight(ix, g.nx) * f(g.x(ix), y, field.at(ix, iy));
        }
        total += wy * row;
    }
    total * g.dx() * g.dy()
}

/// `∬ W dx dy`.
pub fn integrate_grid(field: &WignerField) -> f64 {
    integrate_with(field, |_, _, w| w)
}

/// `∬ W (x² + y²) dx dy`, which equals `<a†a> + 1/2`.
pub fn second_moment(field: &WignerField) -> f64 {
    integrate_with(field, |x, y, w| w * (x * x + y * y))
}

/// Largest `|W|` on the outermost rows and columns.
pub fn boundary_max(field: &WignerField) -> f64 {
    let g = field.grid();
    let mut m = 0.0f64;
    for ix in 0..g.nx {
        m = m.max(field.at(ix, 0).abs()).max(field.at(ix, g.ny - 1).abs());
    }
    for iy in 0..g.ny {
        m = m.max(field.at(0, iy).abs()).max(field.at(g.nx - 1, iy).abs());
    }
    m
}

/// Weight of the negative part, `∬ (|W| - W)/2`.
pub fn negativity_volume(field: &WignerField) -> Result<f64> {
    let boundary = boundary_max(field);
    if boundary >= BOUNDARY_LIMIT {
        return Err(Error::InsufficientExtent { boundary });
    }
    Ok(integrate_with(field, |_, _, w| (w.abs() - w) / 2.0))
}

pub fn field_metrics(field: &WignerField) -> FieldMetrics {
    let g = field.grid();
    let mut min = f64::INFINITY;
    let mut argmin = [g.x(0), g.y(0)];
    let mut max_abs = 0.0f64;
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let w = field.at(ix, iy);
            if w < min {
                min = w;
                argmin = [g.x(ix), g.y(iy)];
            }
            max_abs = max_abs.max(w.abs());
        }
    }
    FieldMetrics {
        integral: integrate_grid(field),
        negativity: negativity_volume(field).ok(),
        min,
        argmin,
        max_abs,
    }
}

/// Maximum and root-mean-square pointwise differences.
pub fn compare_fields(a: &WignerField, b: &WignerField) -> Result<(f64, f64)> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let n = a.values().len() as f64;
    let (mut l_inf, mut sq) = (0.0f64, 0.0);
    for (x, y) in a.values().iter().zip(b.values()) {
        let d = (x - y).abs();
        l_inf = l_inf.max(d);
        sq += d * d;
    }
    Ok((l_inf, (sq / n).sqrt()))
}
