//! Structured mesh generators for the verification cases: annulus rings,
//! a butterfly disk, the square-with-rotating-disk mesh (72 elements, 20 of
//! them in the inner disk), and the rotating-square-cylinder meshes.

use super::{BoundaryRecord, SubdomainMesh};
use crate::geometry::{Point, RigidRotation};
use std::collections::HashMap;

const TWO_PI: f64 = std::f64::consts::TAU;

/// Builds a mesh incrementally, welding coincident vertices.
struct MeshBuilder {
    vertices: Vec<Point>,
    lookup: HashMap<(i64, i64), usize>,
    cells: Vec<[usize; 4]>,
    boundary: Vec<BoundaryRecord>,
    quantum: f64,
}

impl MeshBuilder {
    fn new(scale: f64) -> Self {
        MeshBuilder {
            vertices: Vec::new(),
            lookup: HashMap::new(),
            cells: Vec::new(),
            boundary: Vec::new(),
            quantum: scale * 1e-10,
        }
    }

    fn vertex(&mut self, p: Point) -> usize {
        let key = (
            (p[0] / self.quantum).round() as i64,
            (p[1] / self.quantum).round() as i64,
        );
        if let Some(&id) = self.lookup.get(&key) {
            return id;
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.lookup.insert(key, id);
        id
    }

    fn cell(&mut self, ids: [usize; 4]) {
        self.cells.push(ids);
    }

    fn tag(&mut self, v0: usize, v1: usize, tag: &str, arc_center: Option<Point>) {
        self.boundary.push(BoundaryRecord {
            v: [v0, v1],
            tag: tag.to_string(),
            arc_center,
        });
    }

    fn finish(self, rotation: Option<RigidRotation>) -> SubdomainMesh {
        SubdomainMesh {
            vertices: self.vertices,
            cells: self.cells,
            boundary: self.boundary,
            rotation,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnulusSpec {
    pub center: Point,
    pub r_inner: f64,
    pub r_outer: f64,
    pub n_azimuthal: usize,
    pub n_radial: usize,
    pub inner_tag: String,
    pub outer_tag: String,
    /// represent the inner/outer boundary as exact arcs
    pub inner_arc: bool,
    pub outer_arc: bool,
    pub rotation: Option<RigidRotation>,
    pub theta_offset: f64,
}

/// Annular ring of `n_azimuthal x n_radial` cells with uniform grid
/// distribution in the azimuthal and radial directions.
pub fn annulus(spec: AnnulusSpec) -> SubdomainMesh {
    annulus_with_corner_cycle(spec, 0)
}

/// Same as [`annulus`] but with each cell's corner list cyclically rotated;
/// `cycle = 2` makes circle-adjacent faces run clockwise, exercising the
/// orientation fix-up in sliding-face reordering.
pub fn annulus_with_corner_cycle(spec: AnnulusSpec, cycle: usize) -> SubdomainMesh {
    let mut b = MeshBuilder::new(spec.r_outer);
    let na = spec.n_azimuthal;
    let nr = spec.n_radial;
    let ring = |j: usize| spec.r_inner + (spec.r_outer - spec.r_inner) * j as f64 / nr as f64;
    let at = |r: f64, k: usize| -> Point {
        let th = spec.theta_offset + TWO_PI * (k % na) as f64 / na as f64;
        [
            spec.center[0] + r * th.cos(),
            spec.center[1] + r * th.sin(),
        ]
    };
    for j in 0..nr {
        for k in 0..na {
            let p = [
                b.vertex(at(ring(j), k)),
                b.vertex(at(ring(j + 1), k)),
                b.vertex(at(ring(j + 1), k + 1)),
                b.vertex(at(ring(j), k + 1)),
            ];
            let mut ids = p;
            ids.rotate_left(cycle % 4);
            b.cell(ids);
            if j == 0 {
                let arc = spec.inner_arc.then_some(spec.center);
                let tag = spec.inner_tag.clone();
                b.tag(p[0], p[3], &tag, arc);
            }
            if j == nr - 1 {
                let arc = spec.outer_arc.then_some(spec.center);
                let tag = spec.outer_tag.clone();
                b.tag(p[1], p[2], &tag, arc);
            }
        }
    }
    b.finish(spec.rotation)
}

/// Butterfly decomposition of a disk: a 2x2 core square block plus two rings
/// of 8 cells, 20 cells total with 8 faces on the bounding circle.
pub fn disk_butterfly(center: Point, radius: f64, rim_tag: &str, omega: f64) -> SubdomainMesh {
    let mut b = MeshBuilder::new(radius);
    let a = 0.45 * radius;
    let r_mid = 0.72 * radius;

    // 3x3 core grid
    let mut core = [[0usize; 3]; 3];
    for (i, row) in core.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = b.vertex([
                center[0] - a + a * i as f64,
                center[1] - a + a * j as f64,
            ]);
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            b.cell([
                core[i][j],
                core[i + 1][j],
                core[i + 1][j + 1],
                core[i][j + 1],
            ]);
        }
    }
    // core boundary walked counterclockwise from the bottom-right corner
    let ring0 = [
        core[2][0],
        core[2][1],
        core[2][2],
        core[1][2],
        core[0][2],
        core[0][1],
        core[0][0],
        core[1][0],
    ];
    let angles: Vec<f64> = ring0
        .iter()
        .map(|&v| {
            let p = b.vertices[v];
            (p[1] - center[1]).atan2(p[0] - center[0])
        })
        .collect();
    let onring = |b: &mut MeshBuilder, r: f64, th: f64| {
        b.vertex([center[0] + r * th.cos(), center[1] + r * th.sin()])
    };
    let ring1: Vec<usize> = angles.iter().map(|&th| onring(&mut b, r_mid, th)).collect();
    let ring2: Vec<usize> = angles.iter().map(|&th| onring(&mut b, radius, th)).collect();
    for k in 0..8 {
        let k1 = (k + 1) % 8;
        b.cell([ring0[k], ring1[k], ring1[k1], ring0[k1]]);
        b.cell([ring1[k], ring2[k], ring2[k1], ring1[k1]]);
        b.tag(ring2[k], ring2[k1], rim_tag, None);
    }
    b.finish(Some(RigidRotation { center, omega }))
}

/// Plain Cartesian block of `nx x ny` cells; every exterior face carries the
/// same boundary tag.
pub fn cartesian_block(
    origin: Point,
    width: f64,
    height: f64,
    nx: usize,
    ny: usize,
    tag: &str,
) -> SubdomainMesh {
    let mut b = MeshBuilder::new(width.max(height));
    let at = |bd: &mut MeshBuilder, i: usize, j: usize| {
        bd.vertex([
            origin[0] + width * i as f64 / nx as f64,
            origin[1] + height * j as f64 / ny as f64,
        ])
    };
    for j in 0..ny {
        for i in 0..nx {
            let p = [
                at(&mut b, i, j),
                at(&mut b, i + 1, j),
                at(&mut b, i + 1, j + 1),
                at(&mut b, i, j + 1),
            ];
            b.cell(p);
            if j == 0 {
                b.tag(p[0], p[1], tag, None);
            }
            if j == ny - 1 {
                b.tag(p[3], p[2], tag, None);
            }
            if i == 0 {
                b.tag(p[0], p[3], tag, None);
            }
            if i == nx - 1 {
                b.tag(p[1], p[2], tag, None);
            }
        }
    }
    b.finish(None)
}

/// Point on an axis-aligned square of half-width `h` around `center`, taken
/// along the ray at angle `th`.
fn square_perimeter(center: Point, h: f64, th: f64) -> Point {
    let (s, c) = th.sin_cos();
    let m = c.abs().max(s.abs());
    [center[0] + h * c / m, center[1] + h * s / m]
}

/// The 72-element verification mesh: a rotating butterfly disk of 20 cells
/// inside a square box, with 52 cells between the sliding circle and the box.
/// Returns (inner, outer) subdomains; `half` is the box half-width.
pub fn vortex_mesh(center: Point, r_s: f64, half: f64, omega: f64) -> (SubdomainMesh, SubdomainMesh) {
    let inner = disk_butterfly(center, r_s, "sliding:0:inner", omega);

    let mut b = MeshBuilder::new(half);
    let b1 = 0.7 * half; // intermediate square
    // 16 stations: the 5-per-side uniform grid of the intermediate square
    let mut stations = Vec::new();
    for side in 0..4 {
        for i in 0..4 {
            let t = -1.0 + 2.0 * i as f64 / 4.0;
            let p = match side {
                0 => [b1, b1 * t],
                1 => [-b1 * t, b1],
                2 => [-b1, -b1 * t],
                _ => [b1 * t, -b1],
            };
            stations.push((p[1]).atan2(p[0]));
        }
    }
    // two layers blending the circle into the intermediate square
    let layer = |b: &mut MeshBuilder, t: f64, th: f64| -> usize {
        let on_circle = [
            center[0] + r_s * th.cos(),
            center[1] + r_s * th.sin(),
        ];
        let on_square = square_perimeter(center, b1, th);
        b.vertex([
            (1.0 - t) * on_circle[0] + t * on_square[0],
            (1.0 - t) * on_circle[1] + t * on_square[1],
        ])
    };
    let n = stations.len();
    let mut rings = Vec::new();
    for lt in [0.0, 0.5, 1.0] {
        let ring: Vec<usize> = stations.iter().map(|&th| layer(&mut b, lt, th)).collect();
        rings.push(ring);
    }
    for j in 0..2 {
        for k in 0..n {
            let k1 = (k + 1) % n;
            let p = [rings[j][k], rings[j + 1][k], rings[j + 1][k1], rings[j][k1]];
            b.cell(p);
            if j == 0 {
                b.tag(p[0], p[3], "sliding:0:outer", None);
            }
        }
    }
    // picture frame from the intermediate square to the box: 4 cells per side
    // plus 4 corner cells
    let margin = 0.5 * (half - b1);
    let side_pts = |h: f64, span: f64, side: usize, i: usize| -> Point {
        let t = -span + 2.0 * span * i as f64 / 4.0;
        match side {
            0 => [center[0] + h, center[1] + t],
            1 => [center[0] - t, center[1] + h],
            2 => [center[0] - h, center[1] - t],
            _ => [center[0] + t, center[1] - h],
        }
    };
    for side in 0..4 {
        let mut inner_ids = Vec::new();
        let mut outer_ids = Vec::new();
        for i in 0..5 {
            inner_ids.push(b.vertex(side_pts(b1, b1, side, i)));
            outer_ids.push(b.vertex(side_pts(half, half - margin, side, i)));
        }
        for i in 0..4 {
            let p = [inner_ids[i], outer_ids[i], outer_ids[i + 1], inner_ids[i + 1]];
            b.cell(p);
            b.tag(p[1], p[2], "outer", None);
        }
        // corner cell between this side's end and the next side's start
        let next = (side + 1) % 4;
        let corner_dir = match side {
            0 => [1.0, 1.0],
            1 => [-1.0, 1.0],
            2 => [-1.0, -1.0],
            _ => [1.0, -1.0],
        };
        let sq_corner = b.vertex([
            center[0] + b1 * corner_dir[0],
            center[1] + b1 * corner_dir[1],
        ]);
        let dom_corner = b.vertex([
            center[0] + half * corner_dir[0],
            center[1] + half * corner_dir[1],
        ]);
        let out_end = b.vertex(side_pts(half, half - margin, side, 4));
        let out_next = b.vertex(side_pts(half, half - margin, next, 0));
        let p = [sq_corner, out_end, dom_corner, out_next];
        b.cell(p);
        b.tag(p[1], p[2], "outer", None);
        b.tag(p[2], p[3], "outer", None);
    }
    let outer = b.finish(Some(RigidRotation { center, omega: 0.0 }));
    (inner, outer)
}

/// Taylor-Couette meshes: inner ring 12x2 = 24 cells between the wall r_i and
/// the sliding circle, outer ring 16x2 = 32 cells out to the wall r_o, with
/// exact arc walls.
pub fn taylor_couette_mesh(
    r_i: f64,
    r_s: f64,
    r_o: f64,
    omega: f64,
) -> (SubdomainMesh, SubdomainMesh) {
    let inner = annulus(AnnulusSpec {
        center: [0.0, 0.0],
        r_inner: r_i,
        r_outer: r_s,
        n_azimuthal: 12,
        n_radial: 2,
        inner_tag: "wall_inner".into(),
        outer_tag: "sliding:0:inner".into(),
        inner_arc: true,
        outer_arc: false,
        rotation: Some(RigidRotation {
            center: [0.0, 0.0],
            omega,
        }),
        theta_offset: 0.0,
    });
    let outer = annulus(AnnulusSpec {
        center: [0.0, 0.0],
        r_inner: r_s,
        r_outer: r_o,
        n_azimuthal: 16,
        n_radial: 2,
        inner_tag: "sliding:0:outer".into(),
        outer_tag: "wall_outer".into(),
        inner_arc: false,
        outer_arc: true,
        rotation: Some(RigidRotation {
            center: [0.0, 0.0],
            omega: 0.0,
        }),
        theta_offset: 0.05,
    });
    (inner, outer)
}

/// Rotating square cylinder meshes. The cylinder is a diamond of diagonal
/// `d` centered at the origin inside a sliding circle of radius `0.6 d`; the
/// outer subdomain reaches a box of half-width `half`. Radial spacing in the
/// outer subdomain is geometrically graded.
pub fn square_cylinder_mesh(
    d: f64,
    half: f64,
    omega: f64,
    n_az: usize,
    inner_layers: usize,
    outer_layers: usize,
) -> (SubdomainMesh, SubdomainMesh) {
    assert!(n_az % 4 == 0, "station count must align diamond corners");
    let r_s = 0.6 * d;
    let h_diamond = 0.5 * d; // |x| + |y| = h
    let station = |k: usize| TWO_PI * (k % n_az) as f64 / n_az as f64;

    // inner: diamond wall -> sliding circle
    let mut b = MeshBuilder::new(r_s);
    let diamond = |th: f64| -> Point {
        let (s, c) = th.sin_cos();
        let r = h_diamond / (c.abs() + s.abs());
        [r * c, r * s]
    };
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for j in 0..=inner_layers {
        let t = j as f64 / inner_layers as f64;
        let ring: Vec<usize> = (0..n_az)
            .map(|k| {
                let th = station(k);
                let pd = diamond(th);
                let pc = [r_s * th.cos(), r_s * th.sin()];
                b.vertex([(1.0 - t) * pd[0] + t * pc[0], (1.0 - t) * pd[1] + t * pc[1]])
            })
            .collect();
        rings.push(ring);
    }
    for j in 0..inner_layers {
        for k in 0..n_az {
            let k1 = (k + 1) % n_az;
            let p = [rings[j][k], rings[j + 1][k], rings[j + 1][k1], rings[j][k1]];
            b.cell(p);
            if j == 0 {
                b.tag(p[0], p[3], "cylinder", None);
            }
            if j == inner_layers - 1 {
                b.tag(p[1], p[2], "sliding:0:inner", None);
            }
        }
    }
    let inner = b.finish(Some(RigidRotation {
        center: [0.0, 0.0],
        omega,
    }));

    // outer: sliding circle -> box, geometric grading
    let mut b = MeshBuilder::new(half);
    let growth = 1.15f64;
    let total: f64 = (0..outer_layers).map(|j| growth.powi(j as i32)).sum();
    let mut frac = vec![0.0];
    let mut acc = 0.0;
    for j in 0..outer_layers {
        acc += growth.powi(j as i32) / total;
        frac.push(acc);
    }
    let mut rings: Vec<Vec<usize>> = Vec::new();
    for &t in &frac {
        let ring: Vec<usize> = (0..n_az)
            .map(|k| {
                let th = station(k);
                let pc = [r_s * th.cos(), r_s * th.sin()];
                let pb = square_perimeter([0.0, 0.0], half, th);
                b.vertex([(1.0 - t) * pc[0] + t * pb[0], (1.0 - t) * pc[1] + t * pb[1]])
            })
            .collect();
        rings.push(ring);
    }
    for j in 0..outer_layers {
        for k in 0..n_az {
            let k1 = (k + 1) % n_az;
            let p = [rings[j][k], rings[j + 1][k], rings[j + 1][k1], rings[j][k1]];
            b.cell(p);
            if j == 0 {
                b.tag(p[0], p[3], "sliding:0:outer", None);
            }
            if j == outer_layers - 1 {
                b.tag(p[1], p[2], "farfield", None);
            }
        }
    }
    let outer = b.finish(Some(RigidRotation {
        center: [0.0, 0.0],
        omega: 0.0,
    }));
    (inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::quad_area;

    fn check_areas(m: &SubdomainMesh) {
        for i in 0..m.cells.len() {
            let a = quad_area(&m.cell_corners(i));
            assert!(a > 0.0, "cell {i} area {a}");
        }
        m.validate().unwrap();
    }

    #[test]
    fn annulus_counts_and_areas() {
        let m = annulus(AnnulusSpec {
            center: [1.0, -2.0],
            r_inner: 1.0,
            r_outer: 2.0,
            n_azimuthal: 12,
            n_radial: 2,
            inner_tag: "a".into(),
            outer_tag: "b".into(),
            inner_arc: true,
            outer_arc: true,
            rotation: None,
            theta_offset: 0.3,
        });
        assert_eq!(m.cells.len(), 24);
        assert_eq!(m.boundary.len(), 24);
        check_areas(&m);
    }

    #[test]
    fn butterfly_disk_counts() {
        let m = disk_butterfly([0.0, 0.0], 2.0, "sliding:0:inner", 1.0);
        assert_eq!(m.cells.len(), 20);
        assert_eq!(
            m.boundary.len(),
            8,
            "8 faces on the bounding circle"
        );
        check_areas(&m);
    }

    #[test]
    fn vortex_mesh_element_counts() {
        let (inner, outer) = vortex_mesh([5.0, 5.0], 2.0, 5.0, 1.0);
        assert_eq!(inner.cells.len(), 20);
        assert_eq!(outer.cells.len(), 52);
        check_areas(&inner);
        check_areas(&outer);
    }

    #[test]
    fn taylor_couette_counts() {
        let (inner, outer) = taylor_couette_mesh(1.0, 1.5, 2.0, 5.0);
        assert_eq!(inner.cells.len(), 24);
        assert_eq!(outer.cells.len(), 32);
        check_areas(&inner);
        check_areas(&outer);
    }

    #[test]
    fn cylinder_mesh_scale() {
        let (inner, outer) = square_cylinder_mesh(1.0, 50.0, std::f64::consts::FRAC_PI_2, 40, 4, 32);
        assert_eq!(inner.cells.len(), 160);
        assert_eq!(outer.cells.len(), 1280);
        check_areas(&inner);
        check_areas(&outer);
    }

    #[test]
    fn corner_cycle_preserves_areas() {
        let m = annulus_with_corner_cycle(
            AnnulusSpec {
                center: [0.0, 0.0],
                r_inner: 1.0,
                r_outer: 1.5,
                n_azimuthal: 8,
                n_radial: 1,
                inner_tag: "sliding:0:outer".into(),
                outer_tag: "far".into(),
                inner_arc: false,
                outer_arc: false,
                rotation: None,
                theta_offset: 0.0,
            },
            2,
        );
        check_areas(&m);
    }
}
