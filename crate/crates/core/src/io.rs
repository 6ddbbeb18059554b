//! File formats: matrix JSON, field CSV/JSON, metrics and run manifests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{validate_density, ComplexMatrix, DensityMatrix};
use crate::reconstruct::{Diagnostics, Model, ReconstructionResult, VacuumWeight};
use crate::wigner::{PhaseGrid, WignerField};

/// `{"dim": d, "re": [[...]], "im": [[...]]}`, rows first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dim: m.nrows(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let d = self.dim;
        let shaped = |v: &Vec<Vec<f64>>| v.len() == d && v.iter().all(|r| r.len() == d);
        if d == 0 || !shaped(&self.re) || !shaped(&self.im) {
            return Err(Error::Parse(format!("matrix JSON is not {d}x{d}")));
        }
        Ok(ComplexMatrix::from_fn(d, d, |i, j| {
            num_complex::Complex64::new(self.re[i][j], self.im[i][j])
        }))
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        validate_density(&self.to_matrix()?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_density(path: &Path) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    let m: MatrixJson = serde_json::from_str(&text)?;
    m.to_density()
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_json(path, &MatrixJson::from_matrix(rho.matrix()))
}

/// CSV with header `x,y,w`, one row per grid point, `x` varying fastest.
pub fn write_field_csv(path: &Path, field: &WignerField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field_csv_to(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn write_field_csv_to<W: Write>(w: &mut W, field: &WignerField) -> Result<()> {
    let g = field.grid();
    writeln!(w, "x,y,w")?;
    for iy in 0..g.ny {
        let y = g.y(iy);
        for ix in 0..g.nx {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", g.x(ix), y, field.at(ix, iy))?;
        }
    }
    Ok(())
}

/// Field as `{"grid": {...}, "values": [[row y0], [row y1], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub grid: PhaseGrid,
    pub values: Vec<Vec<f64>>,
}

impl FieldJson {
    pub fn from_field(field: &WignerField) -> Self {
        let g = *field.grid();
        Self {
            grid: g,
            values: field.values().chunks(g.nx).map(|r| r.to_vec()).collect(),
        }
    }

    pub fn to_field(&self) -> Result<WignerField> {
        if self.values.len() != self.grid.ny || self.values.iter().any(|r| r.len() != self.grid.nx) {
            return Err(Error::Parse("field values do not match the grid".into()));
        }
        WignerField::new(self.grid, self.values.concat())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionJson {
    pub model: Model,
    pub weights: VacuumWeight,
    pub effective_state: MatrixJson,
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

impl From<&ReconstructionResult> for ReconstructionJson {
    fn from(r: &ReconstructionResult) -> Self {
        Self {
            model: r.model,
            weights: r.weights,
            effective_state: MatrixJson::from_matrix(r.effective_state.matrix()),
            residual: r.residual,
            diagnostics: r.diagnostics.clone(),
        }
    }
}

/// Provenance written next to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            outputs: Vec::new(),
            duration_seconds: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{coherent_state, thermal_state};
    use crate::wigner::wigner_fock_closed;
    use num_complex::Complex64;

    #[test]
    fn matrix_json_roundtrip() {
        let rho = coherent_state(Complex64::new(0.3, -0.2), 12).unwrap();
        let text = serde_json::to_string(&MatrixJson::from_matrix(rho.matrix())).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_density().unwrap(), rho);
        let bad = MatrixJson {
            dim: 2,
            re: vec![vec![1.0, 0.0]],
            im: vec![vec![0.0, 0.0]],
        };
        assert!(bad.to_matrix().is_err());
        let not_state = MatrixJson {
            dim: 2,
            re: vec![vec![2.0, 0.0], vec![0.0, 0.0]],
            im: vec![vec![0.0; 2]; 2],
        };
        assert!(matches!(not_state.to_density(), Err(Error::Trace { .. })));
    }

    #[test]
    fn csv_layout_and_precision() {
        let g = PhaseGrid::new(-1.0, 1.0, 3, 0.0, 1.0, 2).unwrap();
        let f = wigner_fock_closed(0, &g).unwrap();
        let mut buf = Vec::new();
        write_field_csv_to(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,w");
        assert_eq!(lines.len(), 7);
        assert!(lines[2].starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
        let w: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(w, f.at(1, 0));
        assert!(lines[4].starts_with("-1.0000000000000000e0,1.0000000000000000e0,"));
    }

    #[test]
    fn field_json_roundtrip() {
        let g = PhaseGrid::new(-1.0, 1.0, 4, -2.0, 2.0, 3).unwrap();
        let f = wigner_fock_closed(1, &g).unwrap();
        let j = FieldJson::from_field(&f);
        assert_eq!(j.values.len(), 3);
        let back: FieldJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back.to_field().unwrap(), f);
    }

    #[test]
    fn files_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rho.json");
        let rho = thermal_state(0.5, 30).unwrap();
        write_density(&p, &rho).unwrap();
        assert_eq!(read_density(&p).unwrap(), rho);
    }
}
