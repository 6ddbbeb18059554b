//! Truncated Fock-space linear algebra.
//!
//! Basis ordering is ascending Fock index `0..dim`. Composite spaces are
//! ordered with the first subsystem as the major index, so the emitter of an
//! emitter ⊗ detector pair occupies contiguous detector blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Numerical acceptance thresholds for density matrices.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-12,
            trace: 1e-10,
            positivity: 1e-10,
        }
    }
}

/// A certified density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Zero-pads into a larger Fock space; the original block sits at the
    /// low-index corner.
    pub fn embed(&self, dim: usize) -> Result<DensityMatrix> {
        if dim < self.dim() {
            return Err(Error::InvalidDimension {
                dim,
                reason: "embedding dimension smaller than state",
            });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.matrix);
        Ok(DensityMatrix { matrix: m })
    }

    /// Keeps the leading `dim` levels. The result is re-validated, so a
    /// truncation that discards weight is reported as a trace error.
    pub fn truncate(&self, dim: usize) -> Result<DensityMatrix> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::InvalidDimension {
                dim,
                reason: "truncation dimension out of range",
            });
        }
        validate_density(&self.matrix.view((0, 0), (dim, dim)).into_owned())
    }

    /// Wraps a matrix that the caller has already certified.
    #[cfg(test)]
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        DensityMatrix { matrix }
    }
}

/// Ordered subsystem dimensions of a composite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Layout("subsystem dimensions must be positive".into()));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Bosonic annihilation operator, `<m|a|n> = sqrt(n) δ_{m,n-1}`.
pub fn annihilation_op(dim: usize) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "ladder operators need dim >= 2",
        });
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |m, n| {
        if m + 1 == n {
            Complex64::new((n as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `a†a` as a diagonal matrix.
pub fn number_op(dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |m, n| {
        if m == n {
            Complex64::new(m as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Two-level lowering operator on `{|g>, |e>}`.
pub fn lowering_2ls() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(2, 2);
    s[(0, 1)] = Complex64::new(1.0, 0.0);
    s
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Kronecker product, `A` major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Traces out every subsystem except `keep`, without validating the result.
pub fn partial_trace_matrix(rho: &ComplexMatrix, layout: &SubsystemLayout, keep: usize) -> Result<ComplexMatrix> {
    let total = layout.total();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::Layout(format!(
            "matrix is {}x{}, layout total is {total}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let dims = layout.dims();
    if keep >= dims.len() {
        return Err(Error::Layout(format!(
            "keep index {keep} with {} subsystems",
            dims.len()
        )));
    }
    let d_keep = dims[keep];
    let inner: usize = dims[keep + 1..].iter().product();
    let outer: usize = dims[..keep].iter().product();
    let mut out = ComplexMatrix::zeros(d_keep, d_keep);
    for i in 0..d_keep {
        for j in 0..d_keep {
            let mut acc = Complex64::new(0.0, 0.0);
            for o in 0..outer {
                for k in 0..inner {
                    let r = (o * d_keep + i) * inner + k;
                    let c = (o * d_keep + j) * inner + k;
                    acc += rho[(r, c)];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix of subsystem `keep`.
pub fn partial_trace(rho: &ComplexMatrix, layout: &SubsystemLayout, keep: usize) -> Result<DensityMatrix> {
    validate_density(&partial_trace_matrix(rho, layout, keep)?)
}

pub fn validate_density(rho: &ComplexMatrix) -> Result<DensityMatrix> {
    validate_density_with(rho, &Tolerances::default())
}

/// Certifies `rho` as a density matrix, symmetrizing away sub-tolerance
/// anti-Hermitian noise.
pub fn validate_density_with(rho: &ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(Error::InvalidDimension {
            dim: rho.nrows(),
            reason: "density matrix must be square and non-empty",
        });
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let asymmetry = max_abs_diff(rho, &rho.adjoint());
    if asymmetry >= tol.hermiticity {
        return Err(Error::NotHermitian { asymmetry });
    }
    let herm = (rho + rho.adjoint()).scale(0.5);
    let trace = herm.trace().re;
    if (trace - 1.0).abs() > tol.trace {
        return Err(Error::Trace { trace, tol: tol.trace });
    }
    let min_eigenvalue = hermitian_eigenvalues(&herm)[0];
    if min_eigenvalue < -tol.positivity {
        return Err(Error::Positivity { min_eigenvalue });
    }
    Ok(DensityMatrix { matrix: herm })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenpairs of a Hermitian matrix, sorted by descending eigenvalue.
pub fn hermitian_eigen_desc(m: &ComplexMatrix) -> Vec<(f64, nalgebra::DVector<Complex64>)> {
    let eig = m.clone().symmetric_eigen();
    let mut pairs: Vec<_> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `trace(a†a ρ)`; for a two-level state this is the excited population.
pub fn occupation(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|k| k as f64 * rho.get(k, k).re).sum()
}
