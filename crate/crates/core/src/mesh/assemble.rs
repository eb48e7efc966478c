//! Assembly of subdomain meshes into a single global mesh: offset numbering,
//! conforming interior-face pairing, sliding-face reordering into
//! counterclockwise rings, and interface radius correction.

use super::{SlidingSide, SubdomainMesh};
use crate::error::SolverError;
use crate::geometry::{
    ElementMap, ElementShape, FaceCurve, LocalFace, Point, RigidRotation, LOCAL_FACES,
};
use std::collections::HashMap;

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct InteriorFace {
    pub a: (usize, LocalFace),
    pub b: (usize, LocalFace),
    /// true when b's trace parameter runs opposite to a's
    pub flip: bool,
}

#[derive(Debug, Clone)]
pub struct BoundaryFaceRef {
    pub cell: usize,
    pub face: LocalFace,
    pub tag: String,
    pub arc_center: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct SlidingFaceRef {
    pub cell: usize,
    pub face: LocalFace,
    /// element-local trace direction runs clockwise around the interface
    pub reversed: bool,
    /// base (t = 0) angular span in the counterclockwise walk; theta1 > theta0
    pub theta0: f64,
    pub theta1: f64,
    /// vertex ids ordered in the counterclockwise walk direction
    pub verts: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct SlidingInterface {
    pub id: usize,
    pub center: Point,
    pub radius: f64,
    pub inner_subdomain: usize,
    pub outer_subdomain: usize,
    /// faces on the inner (left) side, counterclockwise, cyclically chained
    pub inner: Vec<SlidingFaceRef>,
    /// faces on the outer (right) side, counterclockwise, cyclically chained
    pub outer: Vec<SlidingFaceRef>,
}

#[derive(Debug, Clone)]
pub struct AssembledMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 4]>,
    pub cell_subdomain: Vec<usize>,
    pub rotations: Vec<Option<RigidRotation>>,
    pub interior: Vec<InteriorFace>,
    pub boundary: Vec<BoundaryFaceRef>,
    pub interfaces: Vec<SlidingInterface>,
    /// exact circular arcs keyed by (cell, local face index)
    pub arcs: HashMap<(usize, usize), FaceCurve>,
}

impl AssembledMesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Directed global vertex pair of a local face.
    pub fn face_verts(&self, cell: usize, face: LocalFace) -> [usize; 2] {
        let (a, b) = face.corner_slots();
        [self.cells[cell][a], self.cells[cell][b]]
    }

    pub fn cell_corners(&self, cell: usize) -> [Point; 4] {
        let ids = self.cells[cell];
        [
            self.vertices[ids[0]],
            self.vertices[ids[1]],
            self.vertices[ids[2]],
            self.vertices[ids[3]],
        ]
    }

    pub fn cell_motion(&self, cell: usize) -> Option<RigidRotation> {
        self.rotations[self.cell_subdomain[cell]].filter(|r| r.omega != 0.0)
    }

    /// Build the time-dependent mapping of one element: transfinite when the
    /// element owns at least one exact arc face, bilinear otherwise.
    pub fn element_map(&self, cell: usize) -> ElementMap {
        let corners = self.cell_corners(cell);
        let motion = self.cell_motion(cell);
        let mut has_arc = false;
        let faces: Vec<FaceCurve> = LOCAL_FACES
            .iter()
            .map(|&lf| {
                if let Some(arc) = self.arcs.get(&(cell, lf.index())) {
                    has_arc = true;
                    arc.clone()
                } else {
                    let (a, b) = lf.corner_slots();
                    FaceCurve::line(corners[a], corners[b])
                }
            })
            .collect();
        if has_arc {
            ElementMap::new(
                ElementShape::Transfinite {
                    corners,
                    faces: [
                        faces[0].clone(),
                        faces[1].clone(),
                        faces[2].clone(),
                        faces[3].clone(),
                    ],
                },
                motion,
            )
        } else {
            ElementMap::bilinear(corners, motion)
        }
    }
}

fn undirected(v: [usize; 2]) -> (usize, usize) {
    (v[0].min(v[1]), v[0].max(v[1]))
}

/// Assemble subdomain meshes into one mesh with unique continuous numbering.
pub fn assemble(subs: &[SubdomainMesh]) -> Result<AssembledMesh, SolverError> {
    if subs.is_empty() {
        return Err(SolverError::Topology("no subdomains to assemble".into()));
    }
    for (i, s) in subs.iter().enumerate() {
        s.validate().map_err(|e| {
            SolverError::Topology(format!("subdomain {i}: {e}"))
        })?;
    }

    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut cell_subdomain = Vec::new();
    let mut rotations = Vec::new();
    let mut boundary_global = Vec::new(); // (subdomain, record with global ids)

    for (s, sub) in subs.iter().enumerate() {
        let voff = vertices.len();
        vertices.extend_from_slice(&sub.vertices);
        for cell in &sub.cells {
            cells.push([
                cell[0] + voff,
                cell[1] + voff,
                cell[2] + voff,
                cell[3] + voff,
            ]);
            cell_subdomain.push(s);
        }
        rotations.push(sub.rotation);
        for rec in &sub.boundary {
            let mut rec = rec.clone();
            rec.v = [rec.v[0] + voff, rec.v[1] + voff];
            boundary_global.push((s, rec));
        }
    }

    // face table: undirected vertex pair -> owning (cell, local face) list
    let mut table: HashMap<(usize, usize), Vec<(usize, LocalFace)>> = HashMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for &lf in &LOCAL_FACES {
            let (a, b) = lf.corner_slots();
            table
                .entry(undirected([cell[a], cell[b]]))
                .or_default()
                .push((c, lf));
        }
    }
    for (key, owners) in &table {
        if owners.len() > 2 {
            return Err(SolverError::Topology(format!(
                "edge {key:?} shared by {} cells",
                owners.len()
            )));
        }
    }

    // resolve boundary records
    let mut claimed: HashMap<(usize, usize), ()> = HashMap::new();
    let mut boundary = Vec::new();
    let mut sliding_raw: HashMap<usize, (Vec<(usize, LocalFace)>, Vec<(usize, LocalFace)>)> =
        HashMap::new();
    for (sub, rec) in &boundary_global {
        let key = undirected(rec.v);
        let owners = table.get(&key).ok_or_else(|| {
            SolverError::Topology(format!(
                "boundary record {:?} does not match any cell face",
                rec.v
            ))
        })?;
        if owners.len() != 1 {
            return Err(SolverError::Topology(format!(
                "boundary record {:?} matches an interior face",
                rec.v
            )));
        }
        if claimed.insert(key, ()).is_some() {
            return Err(SolverError::Topology(format!(
                "duplicate boundary record for face {:?}",
                rec.v
            )));
        }
        let (cell, lf) = owners[0];
        match rec.sliding() {
            Some((id, side)) => {
                let entry = sliding_raw.entry(id).or_default();
                let list = match side {
                    SlidingSide::Inner => &mut entry.0,
                    SlidingSide::Outer => &mut entry.1,
                };
                if cell_subdomain[cell] != *sub {
                    return Err(SolverError::Topology(
                        "sliding record crossed subdomains".into(),
                    ));
                }
                list.push((cell, lf));
            }
            None => boundary.push(BoundaryFaceRef {
                cell,
                face: lf,
                tag: rec.tag.clone(),
                arc_center: rec.arc_center,
            }),
        }
    }

    // interior pairs: faces shared by two cells and not claimed as boundary
    let mut interior = Vec::new();
    let mut single_unclaimed = Vec::new();
    for (key, owners) in &table {
        if claimed.contains_key(key) {
            continue;
        }
        match owners.len() {
            2 => {
                let (ca, fa) = owners[0];
                let (cb, fb) = owners[1];
                let pa = {
                    let (x, y) = fa.corner_slots();
                    [cells[ca][x], cells[ca][y]]
                };
                let pb = {
                    let (x, y) = fb.corner_slots();
                    [cells[cb][x], cells[cb][y]]
                };
                let flip = if pa == pb {
                    false
                } else if pa[0] == pb[1] && pa[1] == pb[0] {
                    true
                } else {
                    unreachable!("face table key mismatch");
                };
                interior.push(InteriorFace {
                    a: (ca, fa),
                    b: (cb, fb),
                    flip,
                });
            }
            1 => single_unclaimed.push(*key),
            _ => unreachable!(),
        }
    }
    if !single_unclaimed.is_empty() {
        return Err(SolverError::Topology(format!(
            "{} exterior faces lack boundary records (first: {:?})",
            single_unclaimed.len(),
            single_unclaimed[0]
        )));
    }

    let mut mesh = AssembledMesh {
        vertices,
        cells,
        cell_subdomain,
        rotations,
        interior,
        boundary,
        interfaces: Vec::new(),
        arcs: HashMap::new(),
    };

    // sliding interfaces: pair sides, correct radii, reorder, register arcs
    let mut ids: Vec<usize> = sliding_raw.keys().copied().collect();
    ids.sort_unstable();
    for id in ids {
        let (inner_faces, outer_faces) = sliding_raw.remove(&id).unwrap();
        if inner_faces.is_empty() || outer_faces.is_empty() {
            return Err(SolverError::Topology(format!(
                "sliding interface {id} is missing one side"
            )));
        }
        let inner_sub = mesh.cell_subdomain[inner_faces[0].0];
        let outer_sub = mesh.cell_subdomain[outer_faces[0].0];
        for &(c, _) in &inner_faces {
            if mesh.cell_subdomain[c] != inner_sub {
                return Err(SolverError::Topology(format!(
                    "interface {id}: inner side spans multiple subdomains"
                )));
            }
        }
        for &(c, _) in &outer_faces {
            if mesh.cell_subdomain[c] != outer_sub {
                return Err(SolverError::Topology(format!(
                    "interface {id}: outer side spans multiple subdomains"
                )));
            }
        }
        let center = mesh.rotations[inner_sub]
            .ok_or_else(|| {
                SolverError::Topology(format!(
                    "interface {id}: inner subdomain lacks a rotation record (needed for the center)"
                ))
            })?
            .center;
        if let Some(outer_rot) = mesh.rotations[outer_sub] {
            let d = ((outer_rot.center[0] - center[0]).powi(2)
                + (outer_rot.center[1] - center[1]).powi(2))
            .sqrt();
            if d > 1e-12 {
                return Err(SolverError::Topology(format!(
                    "interface {id}: the two sides declare different centers ({d:e} apart)"
                )));
            }
        } else {
            return Err(SolverError::Topology(format!(
                "interface {id}: outer subdomain lacks a rotation record (needed for the center)"
            )));
        }

        let radius = correct_interface_radius(
            &mut mesh.vertices,
            center,
            inner_faces
                .iter()
                .chain(&outer_faces)
                .flat_map(|&(c, lf)| {
                    let v = mesh_face_verts(&mesh.cells, c, lf);
                    [v[0], v[1]]
                }),
        )?;

        let inner = order_sliding_ring(&mesh, center, &inner_faces)?;
        let outer = order_sliding_ring(&mesh, center, &outer_faces)?;

        for f in inner.iter().chain(outer.iter()) {
            let (t0, t1) = if f.reversed {
                (f.theta1, f.theta0)
            } else {
                (f.theta0, f.theta1)
            };
            mesh.arcs.insert(
                (f.cell, f.face.index()),
                FaceCurve::Arc {
                    center,
                    radius,
                    theta0: t0,
                    theta1: t1,
                },
            );
        }

        mesh.interfaces.push(SlidingInterface {
            id,
            center,
            radius,
            inner_subdomain: inner_sub,
            outer_subdomain: outer_sub,
            inner,
            outer,
        });
    }

    // exact arcs on curved wall boundaries
    let wall_arcs: Vec<(usize, LocalFace, Point)> = mesh
        .boundary
        .iter()
        .filter_map(|b| b.arc_center.map(|c| (b.cell, b.face, c)))
        .collect();
    for (cell, lf, center) in wall_arcs {
        let v = mesh.face_verts(cell, lf);
        let p0 = mesh.vertices[v[0]];
        let p1 = mesh.vertices[v[1]];
        let r0 = ((p0[0] - center[0]).powi(2) + (p0[1] - center[1]).powi(2)).sqrt();
        let r1 = ((p1[0] - center[0]).powi(2) + (p1[1] - center[1]).powi(2)).sqrt();
        if (r0 - r1).abs() > 1e-9 * r0.max(1.0) {
            return Err(SolverError::Geometry(format!(
                "arc boundary face {v:?}: endpoint radii differ ({r0} vs {r1})"
            )));
        }
        let t0 = (p0[1] - center[1]).atan2(p0[0] - center[0]);
        let mut t1 = (p1[1] - center[1]).atan2(p1[0] - center[0]);
        // shortest wrap
        if t1 - t0 > std::f64::consts::PI {
            t1 -= TWO_PI;
        } else if t0 - t1 > std::f64::consts::PI {
            t1 += TWO_PI;
        }
        mesh.arcs.insert(
            (cell, lf.index()),
            FaceCurve::Arc {
                center,
                radius: 0.5 * (r0 + r1),
                theta0: t0,
                theta1: t1,
            },
        );
    }

    Ok(mesh)
}

fn mesh_face_verts(cells: &[[usize; 4]], cell: usize, face: LocalFace) -> [usize; 2] {
    let (a, b) = face.corner_slots();
    [cells[cell][a], cells[cell][b]]
}

/// Move every listed vertex to the radius of the first one, keeping its
/// angle. Returns the reference radius.
fn correct_interface_radius(
    vertices: &mut [Point],
    center: Point,
    ids: impl IntoIterator<Item = usize>,
) -> Result<f64, SolverError> {
    let mut r_ref = None;
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            continue;
        }
        let v = vertices[id];
        let dx = v[0] - center[0];
        let dy = v[1] - center[1];
        let r = (dx * dx + dy * dy).sqrt();
        if r < 1e-300 {
            return Err(SolverError::Geometry(format!(
                "interface vertex {id} coincides with the interface center"
            )));
        }
        let r_ref = *r_ref.get_or_insert(r);
        let scale = r_ref / r;
        vertices[id] = [center[0] + dx * scale, center[1] + dy * scale];
    }
    r_ref.ok_or_else(|| SolverError::Topology("empty interface".into()))
}

/// Normalize face orientations to counterclockwise and chain the faces into a
/// single closed ring: the next face is the one whose starting vertex is the
/// ending vertex of the current face.
fn order_sliding_ring(
    mesh: &AssembledMesh,
    center: Point,
    faces: &[(usize, LocalFace)],
) -> Result<Vec<SlidingFaceRef>, SolverError> {
    let angle = |v: usize| -> f64 {
        let p = mesh.vertices[v];
        (p[1] - center[1]).atan2(p[0] - center[0])
    };
    // counterclockwise-directed faces
    let mut dir_faces = Vec::with_capacity(faces.len());
    for &(cell, lf) in faces {
        let v = mesh.face_verts(cell, lf);
        let a0 = angle(v[0]);
        let a1 = angle(v[1]);
        let mut span = a1 - a0;
        while span <= -std::f64::consts::PI {
            span += TWO_PI;
        }
        while span > std::f64::consts::PI {
            span -= TWO_PI;
        }
        let (verts, reversed, span) = if span >= 0.0 {
            ([v[0], v[1]], false, span)
        } else {
            ([v[1], v[0]], true, -span)
        };
        dir_faces.push((cell, lf, verts, reversed, span));
    }
    // chain by start vertex
    let mut by_start: HashMap<usize, usize> = HashMap::new();
    for (i, f) in dir_faces.iter().enumerate() {
        if by_start.insert(f.2[0], i).is_some() {
            return Err(SolverError::Topology(format!(
                "sliding ring branches at vertex {}",
                f.2[0]
            )));
        }
    }
    let mut ring = Vec::with_capacity(dir_faces.len());
    let mut visited = vec![false; dir_faces.len()];
    let mut cur = 0usize;
    let start_theta = angle(dir_faces[0].2[0]);
    let mut walk_theta = start_theta;
    for _ in 0..dir_faces.len() {
        if visited[cur] {
            return Err(SolverError::Topology(
                "sliding ring closes before visiting every face".into(),
            ));
        }
        visited[cur] = true;
        let (cell, lf, verts, reversed, span) = dir_faces[cur];
        ring.push(SlidingFaceRef {
            cell,
            face: lf,
            reversed,
            theta0: walk_theta,
            theta1: walk_theta + span,
            verts,
        });
        walk_theta += span;
        cur = match by_start.get(&verts[1]) {
            Some(&next) => next,
            None => {
                return Err(SolverError::Topology(format!(
                    "sliding ring has a gap after vertex {}",
                    verts[1]
                )))
            }
        };
    }
    if cur != 0 {
        return Err(SolverError::Topology(
            "sliding ring does not close into a loop".into(),
        ));
    }
    if (walk_theta - start_theta - TWO_PI).abs() > 1e-9 {
        return Err(SolverError::Topology(format!(
            "sliding ring spans {} instead of 2 pi",
            walk_theta - start_theta
        )));
    }
    Ok(ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    #[test]
    fn single_subdomain_assembly_is_identity() {
        let sub = generate::annulus(generate::AnnulusSpec {
            center: [0.0, 0.0],
            r_inner: 1.0,
            r_outer: 2.0,
            n_azimuthal: 8,
            n_radial: 2,
            inner_tag: "wall_inner".into(),
            outer_tag: "wall_outer".into(),
            inner_arc: false,
            outer_arc: false,
            rotation: None,
            theta_offset: 0.0,
        });
        let n_cells = sub.cells.len();
        let n_verts = sub.vertices.len();
        let m = assemble(std::slice::from_ref(&sub)).unwrap();
        assert_eq!(m.n_cells(), n_cells);
        assert_eq!(m.vertices.len(), n_verts);
        assert!(m.interfaces.is_empty());
        // interior faces shared by exactly two cells with consistent pairing
        for f in &m.interior {
            let va = m.face_verts(f.a.0, f.a.1);
            let vb = m.face_verts(f.b.0, f.b.1);
            if f.flip {
                assert_eq!([va[0], va[1]], [vb[1], vb[0]]);
            } else {
                assert_eq!(va, vb);
            }
        }
    }

    #[test]
    fn two_subdomain_offsets() {
        let (inner, outer) = generate::vortex_mesh([5.0, 5.0], 2.0, 5.0, 1.0);
        assert_eq!(inner.cells.len(), 20);
        assert_eq!(outer.cells.len(), 52);
        let m = assemble(&[inner, outer]).unwrap();
        assert_eq!(m.n_cells(), 72);
        // subdomain-2 cells start right after subdomain-1 cells
        assert_eq!(m.cell_subdomain[19], 0);
        assert_eq!(m.cell_subdomain[20], 1);
        assert_eq!(m.interfaces.len(), 1);
        let itf = &m.interfaces[0];
        assert_eq!(itf.inner.len(), 8);
        assert_eq!(itf.outer.len(), 16);
        assert!((itf.radius - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interface_vertices_on_common_radius() {
        let (inner, outer) = generate::vortex_mesh([0.5, 0.5], 0.2, 0.5, 5.0);
        let m = assemble(&[inner, outer]).unwrap();
        let itf = &m.interfaces[0];
        for f in itf.inner.iter().chain(itf.outer.iter()) {
            for &v in &f.verts {
                let p = m.vertices[v];
                let r = ((p[0] - itf.center[0]).powi(2) + (p[1] - itf.center[1]).powi(2)).sqrt();
                assert!((r - itf.radius).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn ring_chaining_and_spans() {
        let (inner, outer) = generate::vortex_mesh([0.0, 0.0], 2.0, 5.0, 0.0);
        let m = assemble(&[inner, outer]).unwrap();
        let itf = &m.interfaces[0];
        for side in [&itf.inner, &itf.outer] {
            let n = side.len();
            for (k, f) in side.iter().enumerate() {
                assert!(f.theta1 > f.theta0);
                let next = &side[(k + 1) % n];
                // vof chaining: end vertex of face k is start vertex of k+1
                assert_eq!(f.verts[1], next.verts[0]);
            }
            let total: f64 = side.iter().map(|f| f.theta1 - f.theta0).sum();
            assert!((total - TWO_PI).abs() < 1e-9);
        }
    }

    /// Scrambled record order must still produce a chained ring, and cells
    /// whose circle face runs clockwise are normalized by orientation fix-up.
    #[test]
    fn reorder_handles_permutation_and_reversal() {
        let sub_inner = generate::disk_butterfly([0.0, 0.0], 1.0, "sliding:0:inner", 1.0);
        let spec = generate::AnnulusSpec {
            center: [0.0, 0.0],
            r_inner: 1.0,
            r_outer: 2.0,
            n_azimuthal: 12,
            n_radial: 1,
            inner_tag: "sliding:0:outer".into(),
            outer_tag: "outer".into(),
            inner_arc: false,
            outer_arc: false,
            rotation: Some(RigidRotation {
                center: [0.0, 0.0],
                omega: 0.0,
            }),
            theta_offset: 0.1,
        };
        // corner cycle 2 turns the circle-adjacent faces into East faces
        // traversed clockwise around the center
        let mut sub_outer = generate::annulus_with_corner_cycle(spec, 2);
        sub_outer.boundary.reverse();
        let m = assemble(&[sub_inner, sub_outer]).unwrap();
        let ring = &m.interfaces[0].outer;
        assert_eq!(ring.len(), 12);
        for (k, f) in ring.iter().enumerate() {
            assert!(f.reversed, "cycled cells must be flagged reversed");
            assert!(f.theta1 > f.theta0);
            assert_eq!(f.verts[1], ring[(k + 1) % 12].verts[0]);
        }
    }

    #[test]
    fn unpaired_interface_side_is_error() {
        let sub = generate::disk_butterfly([0.0, 0.0], 1.0, "sliding:0:inner", 1.0);
        match assemble(&[sub]) {
            Err(SolverError::Topology(msg)) => assert!(msg.contains("missing one side")),
            other => panic!("expected topology error, got {other:?}"),
        }
    }

    #[test]
    fn three_concentric_subdomains() {
        let inner = generate::disk_butterfly([0.0, 0.0], 1.0, "sliding:0:inner", 1.0);
        let mid = generate::annulus(generate::AnnulusSpec {
            center: [0.0, 0.0],
            r_inner: 1.0,
            r_outer: 2.0,
            n_azimuthal: 10,
            n_radial: 2,
            inner_tag: "sliding:0:outer".into(),
            outer_tag: "sliding:1:inner".into(),
            inner_arc: false,
            outer_arc: false,
            rotation: Some(RigidRotation {
                center: [0.0, 0.0],
                omega: 0.5,
            }),
            theta_offset: 0.0,
        });
        let outer = generate::annulus(generate::AnnulusSpec {
            center: [0.0, 0.0],
            r_inner: 2.0,
            r_outer: 3.0,
            n_azimuthal: 14,
            n_radial: 2,
            inner_tag: "sliding:1:outer".into(),
            outer_tag: "farfield".into(),
            inner_arc: false,
            outer_arc: false,
            rotation: Some(RigidRotation {
                center: [0.0, 0.0],
                omega: 0.0,
            }),
            theta_offset: 0.0,
        });
        let total = inner.cells.len() + mid.cells.len() + outer.cells.len();
        let m = assemble(&[inner, mid, outer]).unwrap();
        assert_eq!(m.n_cells(), total);
        assert_eq!(m.interfaces.len(), 2);
        assert_eq!(m.interfaces[0].inner.len(), 8);
        assert_eq!(m.interfaces[0].outer.len(), 10);
        assert_eq!(m.interfaces[1].inner.len(), 10);
        assert_eq!(m.interfaces[1].outer.len(), 14);
    }

    /// Randomized jitter on interface vertices is healed by the radius fix.
    #[test]
    fn radius_correction_heals_jitter() {
        let (mut inner, outer) = generate::vortex_mesh([0.0, 0.0], 2.0, 5.0, 0.0);
        // apply mesh-generator-style jitter to the inner side's sliding ring
        let mut rng = 0xdeadbeefu64;
        let sliding_verts: Vec<usize> = inner
            .boundary
            .iter()
            .filter(|b| b.tag.starts_with("sliding"))
            .flat_map(|b| b.v)
            .collect();
        for &v in &sliding_verts {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1);
            let j = ((rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2e-8;
            let p = inner.vertices[v];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            inner.vertices[v] = [p[0] * (r + j) / r, p[1] * (r + j) / r];
        }
        let m = assemble(&[inner, outer]).unwrap();
        let itf = &m.interfaces[0];
        for f in itf.inner.iter().chain(itf.outer.iter()) {
            for &v in &f.verts {
                let p = m.vertices[v];
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                assert!((r - itf.radius).abs() <= 1e-13);
            }
        }
    }
}
