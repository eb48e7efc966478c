//! Multi-subdomain quadrilateral meshes: the per-subdomain description read
//! from mesh files, the built-in generators for the verification cases, and
//! the assembled global mesh with conforming face pairs and ordered sliding
//! interfaces.

pub mod assemble;
pub mod format;
pub mod generate;

pub use assemble::{assemble, AssembledMesh, InteriorFace, SlidingFaceRef, SlidingInterface};

use crate::error::SolverError;
use crate::geometry::{Point, RigidRotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlidingSide {
    Inner,
    Outer,
}

/// A boundary face record: a directed vertex pair plus a tag. Faces lying on
/// a circular arc carry the arc center so curved walls can be represented
/// exactly. Tags of the form `sliding:<id>:<inner|outer>` mark sliding
/// interface membership.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRecord {
    pub v: [usize; 2],
    pub tag: String,
    pub arc_center: Option<Point>,
}

impl BoundaryRecord {
    pub fn sliding(&self) -> Option<(usize, SlidingSide)> {
        let mut it = self.tag.split(':');
        if it.next() != Some("sliding") {
            return None;
        }
        let id = it.next()?.parse().ok()?;
        let side = match it.next()? {
            "inner" => SlidingSide::Inner,
            "outer" => SlidingSide::Outer,
            _ => return None,
        };
        Some((id, side))
    }
}

/// One subdomain as stored in a mesh file.
#[derive(Debug, Clone, Default)]
pub struct SubdomainMesh {
    pub vertices: Vec<Point>,
    /// counterclockwise vertex ids
    pub cells: Vec<[usize; 4]>,
    pub boundary: Vec<BoundaryRecord>,
    pub rotation: Option<RigidRotation>,
}

pub fn quad_area(v: &[Point; 4]) -> f64 {
    let mut a = 0.0;
    for i in 0..4 {
        let j = (i + 1) % 4;
        a += v[i][0] * v[j][1] - v[j][0] * v[i][1];
    }
    0.5 * a
}

impl SubdomainMesh {
    pub fn cell_corners(&self, c: usize) -> [Point; 4] {
        let ids = self.cells[c];
        [
            self.vertices[ids[0]],
            self.vertices[ids[1]],
            self.vertices[ids[2]],
            self.vertices[ids[3]],
        ]
    }

    /// Structural validation: index ranges, positive cell areas, and
    /// well-formed sliding tags.
    pub fn validate(&self) -> Result<(), SolverError> {
        for (i, cell) in self.cells.iter().enumerate() {
            for &v in cell {
                if v >= self.vertices.len() {
                    return Err(SolverError::Topology(format!(
                        "cell {i} references vertex {v} out of range"
                    )));
                }
            }
            let area = quad_area(&self.cell_corners(i));
            if !(area > 0.0) {
                return Err(SolverError::Topology(format!(
                    "cell {i} has non-positive area {area} (vertices must be counterclockwise)"
                )));
            }
        }
        for (i, b) in self.boundary.iter().enumerate() {
            for &v in &b.v {
                if v >= self.vertices.len() {
                    return Err(SolverError::Topology(format!(
                        "boundary record {i} references vertex {v} out of range"
                    )));
                }
            }
            if b.tag.starts_with("sliding") && b.sliding().is_none() {
                return Err(SolverError::Topology(format!(
                    "boundary record {i} has malformed sliding tag '{}'",
                    b.tag
                )));
            }
        }
        Ok(())
    }
}
