//! Plain-text mesh format, one subdomain per file.
//!
//! ```text
//! # comments start with '#', blank lines are ignored
//! VERTICES <count>
//! <x> <y>                      # one vertex per line, 0-based ids
//! CELLS <count>
//! <v0> <v1> <v2> <v3>          # counterclockwise vertex ids
//! BOUNDARY <count>
//! <v0> <v1> <tag> [arc <cx> <cy>]
//! ROTATION <0 or 1>
//! <cx> <cy> <omega>            # omega in radians per time unit; 0 = static
//! ```
//!
//! Sliding-interface membership uses boundary tags `sliding:<id>:<inner|outer>`.
//! Floats are written with 17 significant digits so files round-trip exactly.

use super::{BoundaryRecord, SubdomainMesh};
use crate::error::SolverError;
use crate::geometry::RigidRotation;

pub fn parse_subdomain(text: &str, path: &str) -> Result<SubdomainMesh, SolverError> {
    let err = |line: usize, msg: String| SolverError::MeshParse {
        path: path.to_string(),
        line,
        msg,
    };

    let mut mesh = SubdomainMesh::default();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut seen_sections: Vec<String> = Vec::new();
    while let Some((lno, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        let section = parts.next().unwrap();
        let count: usize = parts
            .next()
            .ok_or_else(|| err(lno, format!("section '{section}' is missing a count")))?
            .parse()
            .map_err(|_| err(lno, format!("invalid count in section '{section}'")))?;
        if parts.next().is_some() {
            return Err(err(lno, format!("trailing tokens after section '{section}'")));
        }
        if seen_sections.iter().any(|s| s == section) {
            return Err(err(lno, format!("duplicate section '{section}'")));
        }
        seen_sections.push(section.to_string());

        let mut take_record = |what: &str| -> Result<(usize, &str), SolverError> {
            lines
                .next()
                .ok_or_else(|| err(usize::MAX, format!("unexpected end of file reading {what}")))
        };

        match section {
            "VERTICES" => {
                for k in 0..count {
                    let (lno, rec) = take_record("a vertex")?;
                    let vals: Vec<&str> = rec.split_whitespace().collect();
                    if vals.len() != 2 {
                        return Err(err(lno, format!("vertex {k}: expected 2 coordinates")));
                    }
                    let x: f64 = vals[0]
                        .parse()
                        .map_err(|_| err(lno, format!("vertex {k}: bad x coordinate")))?;
                    let y: f64 = vals[1]
                        .parse()
                        .map_err(|_| err(lno, format!("vertex {k}: bad y coordinate")))?;
                    if !x.is_finite() || !y.is_finite() {
                        return Err(err(lno, format!("vertex {k}: non-finite coordinate")));
                    }
                    mesh.vertices.push([x, y]);
                }
            }
            "CELLS" => {
                for k in 0..count {
                    let (lno, rec) = take_record("a cell")?;
                    let vals: Vec<&str> = rec.split_whitespace().collect();
                    if vals.len() != 4 {
                        return Err(err(lno, format!("cell {k}: expected 4 vertex ids")));
                    }
                    let mut ids = [0usize; 4];
                    for (slot, tok) in ids.iter_mut().zip(&vals) {
                        *slot = tok
                            .parse()
                            .map_err(|_| err(lno, format!("cell {k}: bad vertex id '{tok}'")))?;
                    }
                    mesh.cells.push(ids);
                }
            }
            "BOUNDARY" => {
                for k in 0..count {
                    let (lno, rec) = take_record("a boundary face")?;
                    let vals: Vec<&str> = rec.split_whitespace().collect();
                    if vals.len() != 3 && vals.len() != 6 {
                        return Err(err(
                            lno,
                            format!("boundary face {k}: expected 'v0 v1 tag' or 'v0 v1 tag arc cx cy'"),
                        ));
                    }
                    let v0: usize = vals[0]
                        .parse()
                        .map_err(|_| err(lno, format!("boundary face {k}: bad vertex id")))?;
                    let v1: usize = vals[1]
                        .parse()
                        .map_err(|_| err(lno, format!("boundary face {k}: bad vertex id")))?;
                    let arc_center = if vals.len() == 6 {
                        if vals[3] != "arc" {
                            return Err(err(
                                lno,
                                format!("boundary face {k}: expected 'arc', found '{}'", vals[3]),
                            ));
                        }
                        let cx: f64 = vals[4]
                            .parse()
                            .map_err(|_| err(lno, format!("boundary face {k}: bad arc center")))?;
                        let cy: f64 = vals[5]
                            .parse()
                            .map_err(|_| err(lno, format!("boundary face {k}: bad arc center")))?;
                        Some([cx, cy])
                    } else {
                        None
                    };
                    mesh.boundary.push(BoundaryRecord {
                        v: [v0, v1],
                        tag: vals[2].to_string(),
                        arc_center,
                    });
                }
            }
            "ROTATION" => {
                for _ in 0..count.min(1) {
                    let (lno, rec) = take_record("a rotation spec")?;
                    let vals: Vec<&str> = rec.split_whitespace().collect();
                    if vals.len() != 3 {
                        return Err(err(lno, "rotation: expected 'cx cy omega'".into()));
                    }
                    let nums: Result<Vec<f64>, _> = vals.iter().map(|v| v.parse()).collect();
                    let nums =
                        nums.map_err(|_| err(lno, "rotation: bad number".into()))?;
                    mesh.rotation = Some(RigidRotation {
                        center: [nums[0], nums[1]],
                        omega: nums[2],
                    });
                }
                if count > 1 {
                    return Err(err(lno, "ROTATION section holds at most one record".into()));
                }
            }
            other => {
                return Err(err(lno, format!("unknown section '{other}'")));
            }
        }
    }
    if mesh.vertices.is_empty() || mesh.cells.is_empty() {
        return Err(err(0, "mesh must contain VERTICES and CELLS sections".into()));
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn read_subdomain(path: &str) -> Result<SubdomainMesh, SolverError> {
    let text = std::fs::read_to_string(path).map_err(|e| SolverError::io(path, e))?;
    parse_subdomain(&text, path)
}

pub fn write_subdomain(mesh: &SubdomainMesh) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    writeln!(s, "VERTICES {}", mesh.vertices.len()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{:.16e} {:.16e}", v[0], v[1]).unwrap();
    }
    writeln!(s, "CELLS {}", mesh.cells.len()).unwrap();
    for c in &mesh.cells {
        writeln!(s, "{} {} {} {}", c[0], c[1], c[2], c[3]).unwrap();
    }
    writeln!(s, "BOUNDARY {}", mesh.boundary.len()).unwrap();
    for b in &mesh.boundary {
        match b.arc_center {
            Some(c) => writeln!(
                s,
                "{} {} {} arc {:.16e} {:.16e}",
                b.v[0], b.v[1], b.tag, c[0], c[1]
            )
            .unwrap(),
            None => writeln!(s, "{} {} {}", b.v[0], b.v[1], b.tag).unwrap(),
        }
    }
    match mesh.rotation {
        Some(r) => {
            writeln!(s, "ROTATION 1").unwrap();
            writeln!(s, "{:.16e} {:.16e} {:.16e}", r.center[0], r.center[1], r.omega).unwrap();
        }
        None => writeln!(s, "ROTATION 0").unwrap(),
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_cell_mesh() {
        let text = "\
# unit square
VERTICES 4
0 0
1 0
1 1
0 1
CELLS 1
0 1 2 3
BOUNDARY 4
0 1 bottom
1 2 right
2 3 top
3 0 left
ROTATION 0
";
        let m = parse_subdomain(text, "test.msh").unwrap();
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.cells.len(), 1);
        assert_eq!(m.boundary.len(), 4);
        assert!(m.rotation.is_none());
    }

    #[test]
    fn parse_error_names_line() {
        let text = "VERTICES 2\n0 0\nnot-a-number 1\n";
        match parse_subdomain(text, "bad.msh") {
            Err(SolverError::MeshParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_vertex_count_is_error() {
        let text = "VERTICES 5\n0 0\n1 0\n";
        assert!(parse_subdomain(text, "bad.msh").is_err());
    }

    #[test]
    fn negative_area_cell_rejected() {
        let text = "VERTICES 4\n0 0\n1 0\n1 1\n0 1\nCELLS 1\n0 3 2 1\n";
        match parse_subdomain(text, "cw.msh") {
            Err(SolverError::Topology(msg)) => assert!(msg.contains("area")),
            other => panic!("expected topology error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "\
VERTICES 4
0.1234567890123456 -7.ues
";
        // malformed input must not panic
        assert!(parse_subdomain(text, "x").is_err());

        let m = parse_subdomain(
            "VERTICES 4\n0 0\n1.000000000000000055511151231257827e0 0\n1 1\n0 1\nCELLS 1\n0 1 2 3\nBOUNDARY 1\n0 1 sliding:0:inner arc 0.5 -0.25\nROTATION 1\n0.5 0.5 3.25\n",
            "y",
        )
        .unwrap();
        let text2 = write_subdomain(&m);
        let m2 = parse_subdomain(&text2, "z").unwrap();
        assert_eq!(m.vertices, m2.vertices);
        assert_eq!(m.cells, m2.cells);
        assert_eq!(m.boundary, m2.boundary);
        assert_eq!(m.rotation, m2.rotation);
        // writing again reproduces the text bit-exactly
        assert_eq!(text2, write_subdomain(&m2));
    }

    #[test]
    fn sliding_tag_parse() {
        let rec = BoundaryRecord {
            v: [0, 1],
            tag: "sliding:2:outer".into(),
            arc_center: None,
        };
        assert_eq!(rec.sliding(), Some((2, crate::mesh::SlidingSide::Outer)));
        let rec = BoundaryRecord {
            v: [0, 1],
            tag: "wall".into(),
            arc_center: None,
        };
        assert_eq!(rec.sliding(), None);
    }
}
