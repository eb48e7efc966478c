//! Field and restart output. All floats use 17 significant digits so text
//! files round-trip bit-exactly.

use crate::error::SolverError;
use std::io::Write;
use std::path::Path;

/// Columnar text snapshot: one row of `x y rho u v p` per solution point,
/// ordered by global element id then point index.
pub fn render_field(rows: &[[f64; 6]], t: f64) -> String {
    let mut s = String::new();
    s.push_str(&format!("# t = {t:.16e}\n"));
    s.push_str("# columns: x y rho u v p\n");
    for r in rows {
        s.push_str(&format!(
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
            r[0], r[1], r[2], r[3], r[4], r[5]
        ));
    }
    s
}

pub fn parse_field(text: &str) -> Result<(f64, Vec<[f64; 6]>), SolverError> {
    let mut t = 0.0;
    let mut rows = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# t =") {
            t = rest.trim().parse().map_err(|_| SolverError::Config(
                format!("snapshot line {}: bad time", lno + 1),
            ))?;
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(|v| v.parse()).collect();
        let vals = vals.map_err(|_| {
            SolverError::Config(format!("snapshot line {}: bad number", lno + 1))
        })?;
        if vals.len() != 6 {
            return Err(SolverError::Config(format!(
                "snapshot line {}: expected 6 columns",
                lno + 1
            )));
        }
        rows.push([vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]]);
    }
    Ok((t, rows))
}

/// Legacy-VTK-compatible unstructured output: each element's solution-point
/// grid is subdivided into (N-1)^2 quad cells.
pub fn render_vtk(rows: &[[f64; 6]], n: usize, t: f64) -> String {
    let np = n * n;
    let nelem = rows.len() / np;
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&format!("flow field at t = {t:.6e}\n"));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {} double\n", rows.len()));
    for r in rows {
        s.push_str(&format!("{:.16e} {:.16e} 0.0\n", r[0], r[1]));
    }
    let ncell = nelem * (n - 1) * (n - 1);
    s.push_str(&format!("CELLS {} {}\n", ncell, 5 * ncell));
    for e in 0..nelem {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let base = e * np + j * n + i;
                s.push_str(&format!(
                    "4 {} {} {} {}\n",
                    base,
                    base + 1,
                    base + 1 + n,
                    base + n
                ));
            }
        }
    }
    s.push_str(&format!("CELL_TYPES {ncell}\n"));
    for _ in 0..ncell {
        s.push_str("9\n");
    }
    s.push_str(&format!("POINT_DATA {}\n", rows.len()));
    s.push_str("SCALARS rho double\nLOOKUP_TABLE default\n");
    for r in rows {
        s.push_str(&format!("{:.16e}\n", r[2]));
    }
    s.push_str("SCALARS p double\nLOOKUP_TABLE default\n");
    for r in rows {
        s.push_str(&format!("{:.16e}\n", r[5]));
    }
    s.push_str("VECTORS velocity double\n");
    for r in rows {
        s.push_str(&format!("{:.16e} {:.16e} 0.0\n", r[3], r[4]));
    }
    s
}

/// Restart file: time plus the raw 5-component state. Connectivity is
/// reconstructed from the time, so nothing else needs to be carried.
pub fn render_restart(state: &[f64], t: f64) -> String {
    let mut s = String::new();
    s.push_str(&format!("# restart t = {t:.16e}\n"));
    s.push_str(&format!("# points = {}\n", state.len() / 5));
    for p in state.chunks_exact(5) {
        s.push_str(&format!(
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}\n",
            p[0], p[1], p[2], p[3], p[4]
        ));
    }
    s
}

pub fn parse_restart(text: &str) -> Result<(f64, Vec<f64>), SolverError> {
    let mut t = None;
    let mut state = Vec::new();
    for (lno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# restart t =") {
            t = Some(rest.trim().parse().map_err(|_| {
                SolverError::Config(format!("restart line {}: bad time", lno + 1))
            })?);
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            state.push(tok.parse().map_err(|_| {
                SolverError::Config(format!("restart line {}: bad number", lno + 1))
            })?);
        }
    }
    let t = t.ok_or_else(|| SolverError::Config("restart file lacks a time header".into()))?;
    if state.is_empty() || state.len() % 5 != 0 {
        return Err(SolverError::Config(
            "restart file state length is not a multiple of 5".into(),
        ));
    }
    Ok((t, state))
}

pub fn write_text(path: &Path, content: &str) -> Result<(), SolverError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| SolverError::io(dir.display().to_string(), e))?;
    }
    let mut f = std::fs::File::create(path)
        .map_err(|e| SolverError::io(path.display().to_string(), e))?;
    f.write_all(content.as_bytes())
        .map_err(|e| SolverError::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_bitwise() {
        let rows = vec![
            [0.1, 0.2, 1.0 / 3.0, -7.25e-13, 2.0f64.sqrt(), 101325.0],
            [1.5, -0.75, 0.9999999999999999, 0.1, 0.2, 0.3],
        ];
        let text = render_field(&rows, 0.12345678901234567);
        let (t, back) = parse_field(&text).unwrap();
        assert_eq!(t, 0.12345678901234567);
        assert_eq!(rows, back);
        assert_eq!(text, render_field(&back, t));
    }

    #[test]
    fn restart_round_trip_is_bitwise() {
        let state: Vec<f64> = (0..25).map(|i| (i as f64).sin() * 1e3).collect();
        let text = render_restart(&state, 1.5e-3);
        let (t, back) = parse_restart(&text).unwrap();
        assert_eq!(t, 1.5e-3);
        assert_eq!(state, back);
    }

    #[test]
    fn malformed_restart_is_rejected() {
        assert!(parse_restart("1 2 3 4 5\n").is_err()); // no header
        assert!(parse_restart("# restart t = 0.0\n1 2 3\n").is_err()); // not 5-aligned
        assert!(parse_restart("# restart t = zero\n").is_err());
    }

    #[test]
    fn vtk_has_expected_cell_count() {
        let n = 3;
        let rows: Vec<[f64; 6]> = (0..2 * n * n)
            .map(|i| [i as f64, 0.0, 1.0, 0.0, 0.0, 1.0])
            .collect();
        let text = render_vtk(&rows, n, 0.0);
        assert!(text.contains("CELLS 8 40"));
        assert!(text.contains("POINT_DATA 18"));
    }
}
