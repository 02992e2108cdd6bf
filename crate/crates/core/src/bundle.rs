//! Problem instances stored as a directory of CSV files.
//!
//! | file           | header          | rows                    |
//! |----------------|-----------------|-------------------------|
//! | `grid.csv`     | `l,T,N,M`       | 1                       |
//! | `phi.csv`      | `phi`           | N+1                     |
//! | `omega.csv`    | `omega`         | N+1                     |
//! | `omega_xx.csv` | `omega_xx`      | N+1                     |
//! | `g.csv`        | `g`             | M+1                     |
//! | `gprime.csv`   | `gprime`        | M+1 (optional)          |
//! | `f.csv`        | `f_0,...,f_N`   | M+1                     |
//!
//! Lines starting with `#` are comments. When `gprime.csv` is missing, `g'`
//! is estimated by finite differences and a warning is returned.
//!
//! Bundles written from a known solution additionally carry `p_exact.csv`
//! (`p_exact`, M+1 rows) and `u_exact.csv` (same layout as `f.csv`); readers
//! that only need the problem ignore them.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{CoefficientTrace, Field, Grid, ProblemData};
use crate::report::{CsvTable, Metadata};

pub const GRID: &str = "grid.csv";
pub const PHI: &str = "phi.csv";
pub const OMEGA: &str = "omega.csv";
pub const OMEGA_XX: &str = "omega_xx.csv";
pub const G: &str = "g.csv";
pub const GPRIME: &str = "gprime.csv";
pub const F: &str = "f.csv";
pub const P_EXACT: &str = "p_exact.csv";
pub const U_EXACT: &str = "u_exact.csv";

#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub data: ProblemData<f64>,
    pub exact_p: Option<CoefficientTrace<f64>>,
    pub exact_u: Option<Field<f64>>,
    pub warnings: Vec<String>,
}

fn bundle_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Bundle {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    if !path.is_file() {
        return Err(bundle_err(path, "file not found"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_string).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| bundle_err(path, format!("row {}: cannot parse {cell:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

fn read_column(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let (header, rows) = read_table(path)?;
    if header.len() != 1 {
        return Err(bundle_err(path, format!("expected one column, found {}", header.len())));
    }
    if rows.len() != expected_len {
        return Err(bundle_err(
            path,
            format!("expected {expected_len} rows, found {}", rows.len()),
        ));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

fn read_matrix(path: &Path, rows_expected: usize, cols: usize) -> Result<Field<f64>> {
    let (header, rows) = read_table(path)?;
    if header.len() != cols {
        return Err(bundle_err(
            path,
            format!("expected {cols} columns, found {}", header.len()),
        ));
    }
    if rows.len() != rows_expected {
        return Err(bundle_err(
            path,
            format!("expected {rows_expected} rows, found {}", rows.len()),
        ));
    }
    Field::from_rows(rows)
}

fn count(path: &Path, name: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(bundle_err(
            path,
            format!("{name} must be a non-negative integer, got {v}"),
        ))
    }
}

/// Reads a problem bundle from `dir`.
pub fn read_bundle(dir: impl AsRef<Path>) -> Result<LoadedBundle> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(bundle_err(dir, "problem bundle directory not found"));
    }
    let at = |name: &str| -> PathBuf { dir.join(name) };

    let grid_path = at(GRID);
    let (header, rows) = read_table(&grid_path)?;
    let expected = ["l", "T", "N", "M"];
    if header != expected || rows.len() != 1 {
        return Err(bundle_err(&grid_path, "expected header l,T,N,M and one data row"));
    }
    let r = &rows[0];
    let grid = Grid::new(r[0], r[1], count(&grid_path, "N", r[2])?, count(&grid_path, "M", r[3])?)?;
    let (nodes, levels) = (grid.n() + 1, grid.m() + 1);

    let mut warnings = Vec::new();
    let gprime_path = at(GPRIME);
    let gprime = if gprime_path.exists() {
        Some(read_column(&gprime_path, levels)?)
    } else {
        warnings.push(format!(
            "warning: {} missing; estimating g' from g by finite differences",
            gprime_path.display()
        ));
        None
    };
    let data = ProblemData::new(
        grid,
        read_matrix(&at(F), levels, nodes)?,
        read_column(&at(PHI), nodes)?,
        read_column(&at(OMEGA), nodes)?,
        read_column(&at(OMEGA_XX), nodes)?,
        read_column(&at(G), levels)?,
        gprime,
    )?;

    let exact_p = match at(P_EXACT) {
        p if p.exists() => Some(CoefficientTrace::new(read_column(&p, levels)?)?),
        _ => None,
    };
    let exact_u = match at(U_EXACT) {
        p if p.exists() => Some(read_matrix(&p, levels, nodes)?),
        _ => None,
    };
    Ok(LoadedBundle {
        data,
        exact_p,
        exact_u,
        warnings,
    })
}

fn column(meta: &Metadata, name: &str, values: &[f64]) -> CsvTable {
    let mut t = CsvTable::new(meta.clone(), &[name]);
    for &v in values {
        t.push(vec![v]);
    }
    t
}

fn matrix(meta: &Metadata, field: &Field<f64>) -> CsvTable {
    let header: Vec<String> = (0..field.n_cols()).map(|i| format!("f_{i}")).collect();
    let mut t = CsvTable::new(meta.clone(), &header);
    for row in field.rows() {
        t.push(row.to_vec());
    }
    t
}

/// Writes `data` (and, when given, the known solution) as a bundle.
pub fn write_bundle(
    dir: impl AsRef<Path>,
    data: &ProblemData<f64>,
    exact: Option<(&Field<f64>, &CoefficientTrace<f64>)>,
    meta: &Metadata,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let grid = data.grid();
    let mut g = CsvTable::new(meta.clone(), &["l", "T", "N", "M"]);
    g.push(vec![grid.length(), grid.final_time(), grid.n() as f64, grid.m() as f64]);
    g.write(dir.join(GRID))?;
    column(meta, "phi", data.phi()).write(dir.join(PHI))?;
    column(meta, "omega", data.omega()).write(dir.join(OMEGA))?;
    column(meta, "omega_xx", data.omega_xx()).write(dir.join(OMEGA_XX))?;
    column(meta, "g", data.g()).write(dir.join(G))?;
    column(meta, "gprime", data.gprime()).write(dir.join(GPRIME))?;
    matrix(meta, data.f()).write(dir.join(F))?;
    if let Some((u, p)) = exact {
        column(meta, "p_exact", p.as_slice()).write(dir.join(P_EXACT))?;
        let mut t = matrix(meta, u);
        t.header = (0..u.n_cols()).map(|i| format!("u_{i}")).collect();
        t.write(dir.join(U_EXACT))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid, manufactured_problem};

    #[test]
    fn round_trip_preserves_every_sample() {
        let dir = tempfile::tempdir().unwrap();
        let man = manufactured_problem(&make_grid(1.0f64, 1.0, 12, 9).unwrap()).unwrap();
        write_bundle(
            dir.path(),
            &man.data,
            Some((&man.exact_u, &man.exact_p)),
            &Metadata::new(),
        )
        .unwrap();
        let loaded = read_bundle(dir.path()).unwrap();
        assert_eq!(loaded.data, man.data);
        assert_eq!(loaded.exact_p.unwrap(), man.exact_p);
        assert_eq!(loaded.exact_u.unwrap(), man.exact_u);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn missing_gprime_falls_back_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        let man = manufactured_problem(&make_grid(1.0f64, 1.0, 12, 40).unwrap()).unwrap();
        write_bundle(dir.path(), &man.data, None, &Metadata::new()).unwrap();
        std::fs::remove_file(dir.path().join(GPRIME)).unwrap();
        let loaded = read_bundle(dir.path()).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.data.gprime_estimated());
        for (a, b) in loaded.data.gprime().iter().zip(man.data.gprime()) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn missing_directory_and_files() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_bundle(dir.path().join("nope")),
            Err(Error::Bundle { .. })
        ));
        assert!(matches!(read_bundle(dir.path()), Err(Error::Bundle { .. })));
    }

    #[test]
    fn wrong_row_count_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let man = manufactured_problem(&make_grid(1.0f64, 1.0, 6, 3).unwrap()).unwrap();
        write_bundle(dir.path(), &man.data, None, &Metadata::new()).unwrap();
        std::fs::write(dir.path().join(PHI), "phi\n0\n1\n0\n").unwrap();
        let err = read_bundle(dir.path()).unwrap_err();
        assert!(err.to_string().contains("expected 7 rows"), "{err}");
    }

    #[test]
    fn hand_written_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let w = |name: &str, body: &str| std::fs::write(dir.path().join(name), body).unwrap();
        w(GRID, "l,T,N,M\n1,1,3,1\n");
        w(PHI, "phi\n0\n1\n1\n0\n");
        w(OMEGA, "# weights\nomega\n0\n0.5\n0.5\n0\n");
        w(OMEGA_XX, "omega_xx\n0\n-1\n-1\n0\n");
        w(G, "g\n1.0\n2.0\n");
        w(GPRIME, "gprime\n1.0\n1.0\n");
        w(F, "a,b,c,d\n0,1,2,0\n0, 3 ,4,0\n");
        let b = read_bundle(dir.path()).unwrap();
        assert_eq!(b.data.grid().n(), 3);
        assert_eq!(b.data.f().row(1), &[0.0, 3.0, 4.0, 0.0]);
        assert!(b.exact_p.is_none());
    }
}
