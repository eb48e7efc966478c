//! The flux-reconstruction spatial residual for the 2D compressible
//! Navier-Stokes equations in ALE form on an assembled multi-subdomain mesh:
//! solution/flux polynomials at Legendre solution points, common interface
//! values (conforming faces, weakly imposed boundaries, and dynamic mortars
//! on sliding interfaces), DG correction, corrected solution gradients, and
//! co-integration of the Jacobian determinant for the geometric conservation
//! law.
//!
//! State layout: five components per solution point, `[rho~, rho u~, rho v~,
//! E~, |J|_num]`, element-major. The first four are the transformed
//! conservative variables `Q~ = |J| Q`; physical values are recovered as
//! `Q = Q~ / |J|_num`.

use crate::basis::BasisSet;
use crate::error::SolverError;
use crate::exact::ExactSolution;
use crate::geometry::{outward_normal, ElementMap, LocalFace, Metrics, Point, LOCAL_FACES};
use crate::mesh::AssembledMesh;
use crate::mortar::{
    self, face_conservation_defect, project_back_breve, project_back_scaled, project_forward,
    MortarLayout, SideSpec,
};
use crate::physics::{inviscid_flux, rusanov, viscous_flux, Cons, FluidModel, WaveSpeedPolicy};
use crate::time::RkScheme;
use std::collections::HashMap;

/// How common viscous fluxes are exchanged across a sliding interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViscousMethod {
    /// project local gradients to mortars and evaluate the flux there
    GradientProjection,
    /// project local computational viscous fluxes with the scaled projector
    #[default]
    FluxProjection,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub viscous_method: ViscousMethod,
    pub wavespeed: WaveSpeedPolicy,
    /// worker count for the element-local phases
    pub workers: usize,
    /// co-integrate |J| with the flow (disable only for diagnostics)
    pub gcl: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            viscous_method: ViscousMethod::default(),
            wavespeed: WaveSpeedPolicy::default(),
            workers: 1,
            gcl: true,
        }
    }
}

/// Weakly imposed boundary conditions. The exterior state feeds the same
/// Riemann/average machinery as interior faces.
#[derive(Debug, Clone, Copy)]
pub enum BcKind {
    /// prescribed exterior state from an analytic solution
    Dirichlet(ExactSolution),
    /// exterior velocity equals the wall velocity, wall temperature fixed
    NoSlipIsothermal { t_wall: f64 },
    /// exterior velocity equals the wall velocity, no heat flux
    NoSlipAdiabatic,
    /// one-dimensional Riemann-invariant far field against a free stream
    Farfield(Cons),
}

impl BcKind {
    fn is_wall(&self) -> bool {
        matches!(
            self,
            BcKind::NoSlipIsothermal { .. } | BcKind::NoSlipAdiabatic
        )
    }
}

/// Face-point geometry at the current stage time.
#[derive(Debug, Clone, Copy, Default)]
struct FpGeom {
    x: f64,
    y: f64,
    /// outward unit normal
    nx: f64,
    ny: f64,
    /// face length scaling ||N||
    mag: f64,
    vgx: f64,
    vgy: f64,
}

#[derive(Debug, Clone)]
struct SlideFace {
    cell: usize,
    face: LocalFace,
    reversed: bool,
}

#[derive(Debug, Clone)]
struct InterfaceGeom {
    radius: f64,
    omega_inner: f64,
    omega_outer: f64,
    inner_start: f64,
    inner_spans: Vec<f64>,
    outer_start: f64,
    outer_spans: Vec<f64>,
    inner_faces: Vec<SlideFace>,
    outer_faces: Vec<SlideFace>,
}

struct BoundaryFaceBc {
    cell: usize,
    face: LocalFace,
    kind: BcKind,
    tag: String,
}

/// Scratch for one sliding interface during a residual evaluation.
struct InterfaceScratch {
    layout: MortarLayout,
    /// total mortar-space computational flux per mortar point, 5 comps
    breve: Vec<f64>,
    /// common solution on mortars, 4 comps
    qcom: Vec<f64>,
    /// back-projected totals per side face in walk order, 5 comps
    face_flux_inner: Vec<f64>,
    face_flux_outer: Vec<f64>,
}

pub struct Workspace {
    sp: Vec<Metrics>,
    fp: Vec<FpGeom>,
    /// physical conservative variables at solution points
    q: Vec<f64>,
    /// traces at face points, element-local order
    q_face: Vec<f64>,
    /// physical gradients at solution points (d/dx of 4 comps, then d/dy)
    grad: Vec<f64>,
    grad_face: Vec<f64>,
    /// common computational flux per face point in the face's +coordinate
    /// sense, 5 comps (the fifth is the grid-motion flux for the GCL)
    com_flux: Vec<f64>,
    /// common solution per face point, 4 comps
    com_q: Vec<f64>,
    interfaces: Vec<Option<InterfaceScratch>>,
}

/// Per-evaluation diagnostics, filled on request.
#[derive(Debug, Default, Clone)]
pub struct ResidualDiag {
    pub want_conservation: bool,
    /// E components: element integrals of the residual plus boundary flux
    /// integrals; machine-small when the scheme is conservative
    pub conservation: [f64; 4],
    pub want_defect: bool,
    /// max over sliding faces and components of the face-vs-mortars flux
    /// integral mismatch
    pub max_defect: f64,
    pub want_outflow_residual: bool,
    /// max over faces of || sum P_back P_forward - I ||
    pub max_outflow_residual: f64,
    pub want_forces: bool,
    /// restrict the force integral to these boundary tags; all no-slip
    /// walls when empty
    pub force_tags: Vec<String>,
    /// integrated fluid force on the selected boundary faces
    pub force: [f64; 2],
    pub want_mortar_rows: bool,
    pub mortar_rows: Vec<MortarRow>,
}

#[derive(Debug, Clone)]
pub struct MortarRow {
    pub interface: usize,
    pub mortar: usize,
    pub left_face: usize,
    pub right_face: usize,
    pub s_left: f64,
    pub o_left: f64,
    pub s_right: f64,
    pub o_right: f64,
}

pub struct Solver {
    pub n: usize,
    pub np: usize,
    pub basis: std::sync::Arc<BasisSet>,
    pub model: FluidModel,
    pub opts: SolverOptions,
    pub mesh: AssembledMesh,
    maps: Vec<ElementMap>,
    sp_base: Vec<Metrics>,
    fp_base: Vec<Metrics>,
    bc_faces: Vec<BoundaryFaceBc>,
    interfaces: Vec<InterfaceGeom>,
}

impl Solver {
    /// Build a solver for polynomial degree `p = n - 1`. `bc_table` maps
    /// boundary tags to conditions; every non-sliding tag must be covered.
    pub fn new(
        mesh: AssembledMesh,
        n: usize,
        model: FluidModel,
        bc_table: &HashMap<String, BcKind>,
        opts: SolverOptions,
    ) -> Result<Self, SolverError> {
        if n < 2 {
            return Err(SolverError::Config(
                "polynomial degree must be at least 1 (two points per direction)".into(),
            ));
        }
        let basis = BasisSet::cached(n)?;
        let nelem = mesh.n_cells();
        let np = n * n;

        let maps: Vec<ElementMap> = (0..nelem).map(|e| mesh.element_map(e)).collect();
        let samples = [0.0, 0.25, 0.5, 0.75, 1.0];
        for (e, map) in maps.iter().enumerate() {
            map.validate_jacobian(e, &samples)?;
        }

        let mut sp_base = vec![Metrics::default(); nelem * np];
        let mut fp_base = vec![Metrics::default(); nelem * 4 * n];
        for e in 0..nelem {
            for j in 0..n {
                for i in 0..n {
                    sp_base[e * np + j * n + i] =
                        maps[e].metrics(0.0, basis.points[i], basis.points[j]);
                }
            }
            for f in LOCAL_FACES {
                for k in 0..n {
                    let (xi, eta) = f.ref_point(basis.points[k]);
                    fp_base[(e * 4 + f.index()) * n + k] = maps[e].metrics(0.0, xi, eta);
                }
            }
        }

        let mut bc_faces = Vec::new();
        for b in &mesh.boundary {
            let kind = bc_table.get(&b.tag).ok_or_else(|| {
                SolverError::Config(format!("no boundary condition bound to tag '{}'", b.tag))
            })?;
            bc_faces.push(BoundaryFaceBc {
                cell: b.cell,
                face: b.face,
                kind: *kind,
                tag: b.tag.clone(),
            });
        }

        let mut interfaces = Vec::new();
        for itf in &mesh.interfaces {
            let omega = |s: usize| mesh.rotations[s].map(|r| r.omega).unwrap_or(0.0);
            interfaces.push(InterfaceGeom {
                radius: itf.radius,
                omega_inner: omega(itf.inner_subdomain),
                omega_outer: omega(itf.outer_subdomain),
                inner_start: itf.inner[0].theta0,
                inner_spans: itf.inner.iter().map(|f| f.theta1 - f.theta0).collect(),
                outer_start: itf.outer[0].theta0,
                outer_spans: itf.outer.iter().map(|f| f.theta1 - f.theta0).collect(),
                inner_faces: itf
                    .inner
                    .iter()
                    .map(|f| SlideFace {
                        cell: f.cell,
                        face: f.face,
                        reversed: f.reversed,
                    })
                    .collect(),
                outer_faces: itf
                    .outer
                    .iter()
                    .map(|f| SlideFace {
                        cell: f.cell,
                        face: f.face,
                        reversed: f.reversed,
                    })
                    .collect(),
            });
        }

        Ok(Solver {
            n,
            np,
            basis,
            model,
            opts,
            mesh,
            maps,
            sp_base,
            fp_base,
            bc_faces,
            interfaces,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.maps.len()
    }

    pub fn state_len(&self) -> usize {
        self.n_elements() * self.np * 5
    }

    pub fn workspace(&self) -> Workspace {
        let nelem = self.n_elements();
        let np = self.np;
        let n = self.n;
        Workspace {
            sp: vec![Metrics::default(); nelem * np],
            fp: vec![FpGeom::default(); nelem * 4 * n],
            q: vec![0.0; nelem * np * 4],
            q_face: vec![0.0; nelem * 4 * n * 4],
            grad: vec![0.0; nelem * np * 8],
            grad_face: vec![0.0; nelem * 4 * n * 8],
            com_flux: vec![0.0; nelem * 4 * n * 5],
            com_q: vec![0.0; nelem * 4 * n * 4],
            interfaces: (0..self.interfaces.len()).map(|_| None).collect(),
        }
    }

    /// Initialize the state from an analytic field at time `t0`.
    pub fn init_state(&self, exact: &ExactSolution, t0: f64) -> Vec<f64> {
        let mut state = vec![0.0; self.state_len()];
        for e in 0..self.n_elements() {
            for j in 0..self.n {
                for i in 0..self.n {
                    let m = self.maps[e].metrics(t0, self.basis.points[i], self.basis.points[j]);
                    let q = exact.evaluate(t0, m.x, m.y);
                    let p = e * self.np + j * self.n + i;
                    for c in 0..4 {
                        state[p * 5 + c] = m.jac * q[c];
                    }
                    state[p * 5 + 4] = m.jac;
                }
            }
        }
        state
    }

    /// Physical positions of all solution points at time `t`.
    pub fn sp_positions(&self, t: f64) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.n_elements() * self.np);
        for e in 0..self.n_elements() {
            for j in 0..self.n {
                for i in 0..self.n {
                    out.push(self.maps[e].map(t, self.basis.points[i], self.basis.points[j]));
                }
            }
        }
        out
    }

    /// Recover a physical primitive field (x, y, rho, u, v, p) at time `t`,
    /// ordered by global element id then point index.
    pub fn sample_primitives(&self, state: &[f64], t: f64) -> Vec<[f64; 6]> {
        let pos = self.sp_positions(t);
        let mut rows = Vec::with_capacity(pos.len());
        for (p, xy) in pos.iter().enumerate() {
            let jac = state[p * 5 + 4];
            let q = [
                state[p * 5] / jac,
                state[p * 5 + 1] / jac,
                state[p * 5 + 2] / jac,
                state[p * 5 + 3] / jac,
            ];
            let (rho, u, v, pr) = self.model.primitive(&q);
            rows.push([xy[0], xy[1], rho, u, v, pr]);
        }
        rows
    }

    /// L2 error of one primitive component (0 = rho, 1 = u, 2 = v, 3 = p)
    /// against an analytic solution at time `t`.
    pub fn l2_error(&self, state: &[f64], t: f64, exact: &ExactSolution, comp: usize) -> f64 {
        let rows = self.sample_primitives(state, t);
        let mut num = Vec::with_capacity(rows.len());
        let mut exa = Vec::with_capacity(rows.len());
        for row in &rows {
            num.push(row[2 + comp]);
            let q = exact.evaluate(t, row[0], row[1]);
            let (rho, u, v, p) = self.model.primitive(&q);
            exa.push([rho, u, v, p][comp]);
        }
        crate::norms::l2_error(&num, &exa)
    }

    /// One explicit step with stage-aware mortar rebuilds. The interface
    /// defect accumulates over every stage; the remaining diagnostics are
    /// collected from the first stage, whose state is the step's start.
    pub fn step(
        &self,
        scheme: &RkScheme,
        state: &mut Vec<f64>,
        t: f64,
        dt: f64,
        ws: &mut Workspace,
        mut diag: Option<&mut StepDiag>,
    ) -> Result<(), SolverError> {
        let mut captured: Option<SolverError> = None;
        let mut stage_idx = 0usize;
        let result = scheme.advance(state, t, dt, |y, ts, out| {
            if captured.is_some() {
                out.fill(f64::NAN);
                return;
            }
            let res = match diag.as_deref_mut() {
                None => self.residual(y, ts, out, ws, None),
                Some(d) => {
                    if stage_idx == 0 && d.first_stage.is_some() {
                        let fs = d.first_stage.as_mut().unwrap();
                        fs.want_defect = fs.want_defect || d.want_defect;
                        let r = self.residual(y, ts, out, ws, Some(fs));
                        d.max_defect = d.max_defect.max(fs.max_defect);
                        r
                    } else if d.want_defect {
                        let mut local = ResidualDiag {
                            want_defect: true,
                            ..Default::default()
                        };
                        let r = self.residual(y, ts, out, ws, Some(&mut local));
                        d.max_defect = d.max_defect.max(local.max_defect);
                        r
                    } else {
                        self.residual(y, ts, out, ws, None)
                    }
                }
            };
            stage_idx += 1;
            if let Err(e) = res {
                captured = Some(e);
                out.fill(f64::NAN);
            }
        });
        match result {
            Ok(()) => Ok(()),
            Err(stage) => Err(captured.unwrap_or(SolverError::Diverged {
                step: 0,
                stage,
                time: t,
            })),
        }
    }

    /// Physical-space gradients of the conservative variables at the solution
    /// points, including the interface common-solution correction; diagnostic
    /// helper for tests and force evaluation.
    pub fn gradients_for_diagnostics(&self, state: &[f64], t: f64) -> Vec<f64> {
        let mut ws = self.workspace();
        self.phase_geometry(t, &mut ws);
        self.phase_recover(state, &mut ws);
        self.phase_mortar_inviscid(t, &mut ws, None)
            .expect("interface update");
        self.phase_faces_inviscid(t, &mut ws).expect("face update");
        self.phase_gradients(&mut ws);
        ws.grad
    }

    /// Evaluate the residual dQ~/dt (and d|J|/dt in the fifth component) at
    /// time `t`.
    pub fn residual(
        &self,
        state: &[f64],
        t: f64,
        out: &mut [f64],
        ws: &mut Workspace,
        mut diag: Option<&mut ResidualDiag>,
    ) -> Result<(), SolverError> {
        assert_eq!(state.len(), self.state_len());
        assert_eq!(out.len(), self.state_len());

        self.phase_geometry(t, ws);
        self.phase_recover(state, ws);
        self.check_admissible(ws)?;
        self.phase_mortar_inviscid(t, ws, diag.as_deref_mut())?;
        self.phase_faces_inviscid(t, ws)?;
        if self.model.is_viscous() {
            self.phase_gradients(ws);
            self.phase_mortar_viscous(ws);
            self.phase_faces_viscous(ws);
        }
        self.phase_assemble(ws, out);
        self.finalize_diag(ws, out, diag);
        Ok(())
    }

    // ---------------------------------------------------------------- phases

    fn workers(&self) -> usize {
        self.opts.workers.max(1)
    }

    /// Run an element-chunked phase over two output buffers.
    fn par2<A: Send, B: Send>(
        &self,
        a: &mut [A],
        stride_a: usize,
        b: &mut [B],
        stride_b: usize,
        f: impl Fn(usize, &mut [A], &mut [B]) + Sync,
    ) {
        let nelem = self.n_elements();
        let w = self.workers().min(nelem);
        if w <= 1 {
            f(0, a, b);
            return;
        }
        let ch = nelem.div_ceil(w);
        std::thread::scope(|s| {
            for (idx, (ca, cb)) in a
                .chunks_mut(ch * stride_a)
                .zip(b.chunks_mut(ch * stride_b))
                .enumerate()
            {
                let f = &f;
                s.spawn(move || f(idx * ch, ca, cb));
            }
        });
    }

    fn phase_geometry(&self, t: f64, ws: &mut Workspace) {
        let np = self.np;
        let n = self.n;
        self.par2(
            &mut ws.sp,
            np,
            &mut ws.fp,
            4 * n,
            |e0, sp_chunk, fp_chunk| {
                let nel = sp_chunk.len() / np;
                for le in 0..nel {
                    let e = e0 + le;
                    let motion = self.maps[e].motion;
                    match motion {
                        None => {
                            sp_chunk[le * np..(le + 1) * np]
                                .copy_from_slice(&self.sp_base[e * np..(e + 1) * np]);
                            for f in 0..4 {
                                for k in 0..n {
                                    let m = self.fp_base[(e * 4 + f) * n + k];
                                    fp_chunk[(le * 4 + f) * n + k] =
                                        fp_geom(&m, LocalFace::from_index(f));
                                }
                            }
                        }
                        Some(rot) => {
                            let phi = rot.omega * t;
                            for p in 0..np {
                                sp_chunk[le * np + p] = crate::geometry::rotate_metrics(
                                    &self.sp_base[e * np + p],
                                    rot,
                                    phi,
                                );
                            }
                            for f in 0..4 {
                                for k in 0..n {
                                    let m = crate::geometry::rotate_metrics(
                                        &self.fp_base[(e * 4 + f) * n + k],
                                        rot,
                                        phi,
                                    );
                                    fp_chunk[(le * 4 + f) * n + k] =
                                        fp_geom(&m, LocalFace::from_index(f));
                                }
                            }
                        }
                    }
                }
            },
        );
    }

    fn phase_recover(&self, state: &[f64], ws: &mut Workspace) {
        let np = self.np;
        let n = self.n;
        let basis = &self.basis;
        self.par2(
            &mut ws.q,
            np * 4,
            &mut ws.q_face,
            4 * n * 4,
            |e0, qc, qf| {
                let nel = qc.len() / (np * 4);
                for le in 0..nel {
                    let e = e0 + le;
                    let st = &state[e * np * 5..(e + 1) * np * 5];
                    let q = &mut qc[le * np * 4..(le + 1) * np * 4];
                    for p in 0..np {
                        let jac = st[p * 5 + 4];
                        for c in 0..4 {
                            q[p * 4 + c] = st[p * 5 + c] / jac;
                        }
                    }
                    trace_to_faces(basis, n, 4, q, &mut qf[le * 4 * n * 4..(le + 1) * 4 * n * 4]);
                }
            },
        );
    }

    fn check_admissible(&self, ws: &Workspace) -> Result<(), SolverError> {
        for e in 0..self.n_elements() {
            for p in 0..self.np {
                let q: Cons = ws.q[(e * self.np + p) * 4..(e * self.np + p) * 4 + 4]
                    .try_into()
                    .unwrap();
                if let Err((rho, pr)) = self.model.admissible(&q) {
                    return Err(SolverError::Inadmissible {
                        element: e,
                        point: p,
                        rho,
                        p: pr,
                    });
                }
            }
        }
        Ok(())
    }

    fn phase_mortar_inviscid(
        &self,
        t: f64,
        ws: &mut Workspace,
        mut diag: Option<&mut ResidualDiag>,
    ) -> Result<(), SolverError> {
        let n = self.n;
        for (ii, itf) in self.interfaces.iter().enumerate() {
            let left = SideSpec {
                start: itf.inner_start + itf.omega_inner * t,
                spans: itf.inner_spans.clone(),
            };
            let right = SideSpec {
                start: itf.outer_start + itf.omega_outer * t,
                spans: itf.outer_spans.clone(),
            };
            let layout = mortar::update_connectivity(&self.basis, &left, &right)
                .map_err(|e| match e {
                    SolverError::InterfaceMisaligned(_) => SolverError::InterfaceMisaligned(ii),
                    other => other,
                })?;
            let nm = layout.mortars.len();
            let nfl = itf.inner_faces.len();
            let nfr = itf.outer_faces.len();

            // gather face traces in walk order
            let mut face_q_inner = vec![0.0; nfl * n * 4];
            let mut face_q_outer = vec![0.0; nfr * n * 4];
            for (fi, sf) in itf.inner_faces.iter().enumerate() {
                gather_ccw(
                    &ws.q_face,
                    sf,
                    n,
                    4,
                    &mut face_q_inner[fi * n * 4..(fi + 1) * n * 4],
                );
            }
            for (fi, sf) in itf.outer_faces.iter().enumerate() {
                gather_ccw(
                    &ws.q_face,
                    sf,
                    n,
                    4,
                    &mut face_q_outer[fi * n * 4..(fi + 1) * n * 4],
                );
            }

            // project to mortars, compute common values, convert to
            // mortar-space computational fluxes
            let mut breve = vec![0.0; nm * n * 5];
            let mut qcom = vec![0.0; nm * n * 4];
            let mut ql = vec![0.0; n * 4];
            let mut qr = vec![0.0; n * 4];
            for (im, m) in layout.mortars.iter().enumerate() {
                project_forward(
                    &m.fwd_left,
                    n,
                    4,
                    &face_q_inner[m.left * n * 4..(m.left + 1) * n * 4],
                    &mut ql,
                );
                project_forward(
                    &m.fwd_right,
                    n,
                    4,
                    &face_q_outer[m.right * n * 4..(m.right + 1) * n * 4],
                    &mut qr,
                );
                let l_mortar = itf.radius * m.span();
                for j in 0..n {
                    let theta = m.theta0 + self.basis.points[j] * m.span();
                    let (sin_t, cos_t) = theta.sin_cos();
                    let nrm = [cos_t, sin_t];
                    // both sides move tangentially, so vg . n vanishes; the
                    // average keeps the formula general
                    let vt = 0.5 * (itf.omega_inner + itf.omega_outer) * itf.radius;
                    let vg = [-vt * sin_t, vt * cos_t];
                    let qlj: Cons = ql[j * 4..j * 4 + 4].try_into().unwrap();
                    let qrj: Cons = qr[j * 4..j * 4 + 4].try_into().unwrap();
                    if self.model.admissible(&qlj).is_err() || self.model.admissible(&qrj).is_err()
                    {
                        // name the mortar by its left parent cell and index
                        return Err(SolverError::Inadmissible {
                            element: itf.inner_faces[m.left].cell,
                            point: im,
                            rho: qlj[0].min(qrj[0]),
                            p: self.model.pressure(&qlj).min(self.model.pressure(&qrj)),
                        });
                    }
                    let fstar = rusanov(&self.model, &qlj, &qrj, nrm, vg, self.opts.wavespeed);
                    let b = &mut breve[(im * n + j) * 5..(im * n + j) * 5 + 5];
                    for c in 0..4 {
                        b[c] = l_mortar * fstar[c];
                    }
                    b[4] = l_mortar * (-(vg[0] * nrm[0] + vg[1] * nrm[1]));
                    for c in 0..4 {
                        qcom[(im * n + j) * 4 + c] = 0.5 * (qlj[c] + qrj[c]);
                    }
                }
            }

            // back-project common fluxes (method 2) and common solutions
            let mut face_flux_inner = vec![0.0; nfl * n * 5];
            let mut face_flux_outer = vec![0.0; nfr * n * 5];
            let mut face_qc_inner = vec![0.0; nfl * n * 4];
            let mut face_qc_outer = vec![0.0; nfr * n * 4];
            for (im, m) in layout.mortars.iter().enumerate() {
                let bv = &breve[im * n * 5..(im + 1) * n * 5];
                let qv = &qcom[im * n * 4..(im + 1) * n * 4];
                project_back_breve(
                    &self.basis,
                    &m.fwd_left,
                    5,
                    bv,
                    &mut face_flux_inner[m.left * n * 5..(m.left + 1) * n * 5],
                );
                project_back_breve(
                    &self.basis,
                    &m.fwd_right,
                    5,
                    bv,
                    &mut face_flux_outer[m.right * n * 5..(m.right + 1) * n * 5],
                );
                project_back_scaled(
                    &self.basis,
                    &m.fwd_left,
                    m.s_left,
                    4,
                    qv,
                    &mut face_qc_inner[m.left * n * 4..(m.left + 1) * n * 4],
                );
                project_back_scaled(
                    &self.basis,
                    &m.fwd_right,
                    m.s_right,
                    4,
                    qv,
                    &mut face_qc_outer[m.right * n * 4..(m.right + 1) * n * 4],
                );
            }

            // write element slots; the inner side's outward normal is the
            // walk's radial normal, the outer side's is its negative
            for (fi, sf) in itf.inner_faces.iter().enumerate() {
                scatter_flux(
                    &face_flux_inner[fi * n * 5..(fi + 1) * n * 5],
                    sf,
                    n,
                    1.0,
                    &mut ws.com_flux,
                );
                scatter_vals(
                    &face_qc_inner[fi * n * 4..(fi + 1) * n * 4],
                    sf,
                    n,
                    4,
                    &mut ws.com_q,
                );
            }
            for (fi, sf) in itf.outer_faces.iter().enumerate() {
                scatter_flux(
                    &face_flux_outer[fi * n * 5..(fi + 1) * n * 5],
                    sf,
                    n,
                    -1.0,
                    &mut ws.com_flux,
                );
                scatter_vals(
                    &face_qc_outer[fi * n * 4..(fi + 1) * n * 4],
                    sf,
                    n,
                    4,
                    &mut ws.com_q,
                );
            }

            if let Some(d) = diag.as_deref_mut() {
                if d.want_outflow_residual {
                    for (lists, pick_left) in
                        [(&layout.left_lists, true), (&layout.right_lists, false)]
                    {
                        for list in lists.iter() {
                            let ops: Vec<(&[f64], f64)> = list
                                .iter()
                                .map(|&im| {
                                    let m = &layout.mortars[im];
                                    if pick_left {
                                        (m.fwd_left.as_slice(), m.s_left)
                                    } else {
                                        (m.fwd_right.as_slice(), m.s_right)
                                    }
                                })
                                .collect();
                            let r = mortar::outflow_identity_residual(&self.basis, &ops);
                            d.max_outflow_residual = d.max_outflow_residual.max(r);
                        }
                    }
                }
                if d.want_mortar_rows {
                    for (im, m) in layout.mortars.iter().enumerate() {
                        d.mortar_rows.push(MortarRow {
                            interface: ii,
                            mortar: im,
                            left_face: m.left,
                            right_face: m.right,
                            s_left: m.s_left,
                            o_left: m.o_left,
                            s_right: m.s_right,
                            o_right: m.o_right,
                        });
                    }
                }
            }

            ws.interfaces[ii] = Some(InterfaceScratch {
                layout,
                breve,
                qcom,
                face_flux_inner,
                face_flux_outer,
            });
        }
        Ok(())
    }

    fn phase_faces_inviscid(&self, t: f64, ws: &mut Workspace) -> Result<(), SolverError> {
        let n = self.n;
        // conforming interior pairs: the common flux is computed once with
        // the a-side geometry and distributed to both slots
        for face in &self.mesh.interior {
            let (ea, fa) = face.a;
            let (eb, fb) = face.b;
            let sa = (ea * 4 + fa.index()) * n;
            let sb = (eb * 4 + fb.index()) * n;
            for k in 0..n {
                let kb = if face.flip { n - 1 - k } else { k };
                let ga = ws.fp[sa + k];
                let gb = ws.fp[sb + kb];
                let qa: Cons = ws.q_face[(sa + k) * 4..(sa + k) * 4 + 4].try_into().unwrap();
                let qb: Cons = ws.q_face[(sb + kb) * 4..(sb + kb) * 4 + 4]
                    .try_into()
                    .unwrap();
                let nrm = [ga.nx, ga.ny];
                let vg = [0.5 * (ga.vgx + gb.vgx), 0.5 * (ga.vgy + gb.vgy)];
                let fstar = rusanov(&self.model, &qa, &qb, nrm, vg, self.opts.wavespeed);
                let gcl = -(vg[0] * nrm[0] + vg[1] * nrm[1]);
                let siga = fa.orientation_sign();
                let sigb = -fb.orientation_sign();
                for c in 0..4 {
                    ws.com_flux[(sa + k) * 5 + c] = siga * ga.mag * fstar[c];
                    ws.com_flux[(sb + kb) * 5 + c] = sigb * ga.mag * fstar[c];
                    let qc = 0.5 * (qa[c] + qb[c]);
                    ws.com_q[(sa + k) * 4 + c] = qc;
                    ws.com_q[(sb + kb) * 4 + c] = qc;
                }
                ws.com_flux[(sa + k) * 5 + 4] = siga * ga.mag * gcl;
                ws.com_flux[(sb + kb) * 5 + 4] = sigb * ga.mag * gcl;
            }
        }

        // weakly imposed boundaries
        for bc in &self.bc_faces {
            let s = (bc.cell * 4 + bc.face.index()) * n;
            let sig = bc.face.orientation_sign();
            for k in 0..n {
                let g = ws.fp[s + k];
                let qi: Cons = ws.q_face[(s + k) * 4..(s + k) * 4 + 4].try_into().unwrap();
                let nrm = [g.nx, g.ny];
                let vg = [g.vgx, g.vgy];
                let ghost = self.ghost_state(&bc.kind, &qi, nrm, vg, t, [g.x, g.y])?;
                let fstar = rusanov(&self.model, &qi, &ghost, nrm, vg, self.opts.wavespeed);
                let gcl = -(vg[0] * nrm[0] + vg[1] * nrm[1]);
                for c in 0..4 {
                    ws.com_flux[(s + k) * 5 + c] = sig * g.mag * fstar[c];
                    ws.com_q[(s + k) * 4 + c] = 0.5 * (qi[c] + ghost[c]);
                }
                ws.com_flux[(s + k) * 5 + 4] = sig * g.mag * gcl;
            }
        }
        Ok(())
    }

    fn ghost_state(
        &self,
        kind: &BcKind,
        qi: &Cons,
        nrm: Point,
        vg: Point,
        t: f64,
        pos: Point,
    ) -> Result<Cons, SolverError> {
        let m = &self.model;
        let g = m.gamma;
        Ok(match kind {
            BcKind::Dirichlet(exact) => exact.evaluate(t, pos[0], pos[1]),
            BcKind::NoSlipIsothermal { t_wall } => {
                let p = m.pressure(qi);
                let rho = p / (m.gas_constant * t_wall);
                m.cons(rho, vg[0], vg[1], p)
            }
            BcKind::NoSlipAdiabatic => {
                let p = m.pressure(qi);
                m.cons(qi[0], vg[0], vg[1], p)
            }
            BcKind::Farfield(qinf) => {
                let (rho_i, u_i, v_i, p_i) = m.primitive(qi);
                let (rho_f, u_f, v_f, p_f) = m.primitive(qinf);
                let c_i = (g * p_i / rho_i).sqrt();
                let c_f = (g * p_f / rho_f).sqrt();
                let un_i = u_i * nrm[0] + v_i * nrm[1];
                let un_f = u_f * nrm[0] + v_f * nrm[1];
                let r_plus = un_i + 2.0 * c_i / (g - 1.0);
                let r_minus = un_f - 2.0 * c_f / (g - 1.0);
                let un_b = 0.5 * (r_plus + r_minus);
                let c_b = 0.25 * (g - 1.0) * (r_plus - r_minus);
                let (s, ut, vt) = if un_b >= 0.0 {
                    // outflow: entropy and tangential velocity from inside
                    (
                        p_i / rho_i.powf(g),
                        u_i - un_i * nrm[0],
                        v_i - un_i * nrm[1],
                    )
                } else {
                    (
                        p_f / rho_f.powf(g),
                        u_f - un_f * nrm[0],
                        v_f - un_f * nrm[1],
                    )
                };
                let rho_b = (c_b * c_b / (g * s)).powf(1.0 / (g - 1.0));
                let p_b = rho_b * c_b * c_b / g;
                m.cons(rho_b, ut + un_b * nrm[0], vt + un_b * nrm[1], p_b)
            }
        })
    }

    fn phase_gradients(&self, ws: &mut Workspace) {
        let np = self.np;
        let n = self.n;
        let basis = &self.basis;
        let q = &ws.q;
        let q_face = &ws.q_face;
        let com_q = &ws.com_q;
        let sp = &ws.sp;
        self.par2(
            &mut ws.grad,
            np * 8,
            &mut ws.grad_face,
            4 * n * 8,
            |e0, gc, gf| {
                let nel = gc.len() / (np * 8);
                let mut dxi = vec![0.0; np * 4];
                let mut deta = vec![0.0; np * 4];
                for le in 0..nel {
                    let e = e0 + le;
                    let qe = &q[e * np * 4..(e + 1) * np * 4];
                    let fslot = |f: usize| (e * 4 + f) * n;
                    // corrected derivative in xi
                    for j in 0..n {
                        for i in 0..n {
                            let row = &basis.deriv[i * n..(i + 1) * n];
                            let mut acc = [0.0; 4];
                            for (s, &d) in row.iter().enumerate() {
                                let v = &qe[(j * n + s) * 4..(j * n + s) * 4 + 4];
                                for c in 0..4 {
                                    acc[c] += d * v[c];
                                }
                            }
                            let w = fslot(LocalFace::West.index()) + j;
                            let eidx = fslot(LocalFace::East.index()) + j;
                            let gl = basis.gl_prime[i];
                            let gr = basis.gr_prime[i];
                            for c in 0..4 {
                                acc[c] += (com_q[w * 4 + c] - q_face[w * 4 + c]) * gl
                                    + (com_q[eidx * 4 + c] - q_face[eidx * 4 + c]) * gr;
                            }
                            dxi[(j * n + i) * 4..(j * n + i) * 4 + 4].copy_from_slice(&acc);
                        }
                    }
                    // corrected derivative in eta
                    for j in 0..n {
                        let gl = basis.gl_prime[j];
                        let gr = basis.gr_prime[j];
                        for i in 0..n {
                            let row = &basis.deriv[j * n..(j + 1) * n];
                            let mut acc = [0.0; 4];
                            for (s, &d) in row.iter().enumerate() {
                                let v = &qe[(s * n + i) * 4..(s * n + i) * 4 + 4];
                                for c in 0..4 {
                                    acc[c] += d * v[c];
                                }
                            }
                            let so = fslot(LocalFace::South.index()) + i;
                            let no = fslot(LocalFace::North.index()) + i;
                            for c in 0..4 {
                                acc[c] += (com_q[so * 4 + c] - q_face[so * 4 + c]) * gl
                                    + (com_q[no * 4 + c] - q_face[no * 4 + c]) * gr;
                            }
                            deta[(j * n + i) * 4..(j * n + i) * 4 + 4].copy_from_slice(&acc);
                        }
                    }
                    // chain rule to physical space with analytic metrics
                    let ge = &mut gc[le * np * 8..(le + 1) * np * 8];
                    for p in 0..np {
                        let m = &sp[e * np + p];
                        for c in 0..4 {
                            let qxi = dxi[p * 4 + c];
                            let qeta = deta[p * 4 + c];
                            ge[p * 8 + c] = (qxi * m.y_eta - qeta * m.y_xi) / m.jac;
                            ge[p * 8 + 4 + c] = (-qxi * m.x_eta + qeta * m.x_xi) / m.jac;
                        }
                    }
                    trace_to_faces(
                        basis,
                        n,
                        8,
                        ge,
                        &mut gf[le * 4 * n * 8..(le + 1) * 4 * n * 8],
                    );
                }
            },
        );
    }

    fn phase_mortar_viscous(&self, ws: &mut Workspace) {
        let n = self.n;
        for (ii, itf) in self.interfaces.iter().enumerate() {
            let scratch = ws.interfaces[ii].take();
            let Some(mut sc) = scratch else { continue };
            let nfl = itf.inner_faces.len();
            let nfr = itf.outer_faces.len();

            // local computational viscous normal fluxes per side face in walk
            // order, oriented along the walk's radial normal
            let mut fvis_inner = vec![0.0; nfl * n * 4];
            let mut fvis_outer = vec![0.0; nfr * n * 4];
            for (side_faces, fvis, radial_sign) in [
                (&itf.inner_faces, &mut fvis_inner, 1.0),
                (&itf.outer_faces, &mut fvis_outer, -1.0),
            ] {
                for (fi, sf) in side_faces.iter().enumerate() {
                    let slot = (sf.cell * 4 + sf.face.index()) * n;
                    for kw in 0..n {
                        let kl = if sf.reversed { n - 1 - kw } else { kw };
                        let g = ws.fp[slot + kl];
                        // the element's updated (back-projected common)
                        // solution and its own gradient trace
                        let qv: Cons = ws.com_q[(slot + kl) * 4..(slot + kl) * 4 + 4]
                            .try_into()
                            .unwrap();
                        let gx: Cons = ws.grad_face[(slot + kl) * 8..(slot + kl) * 8 + 4]
                            .try_into()
                            .unwrap();
                        let gy: Cons = ws.grad_face[(slot + kl) * 8 + 4..(slot + kl) * 8 + 8]
                            .try_into()
                            .unwrap();
                        let (fv, gv) = viscous_flux(&self.model, &qv, &gx, &gy, true);
                        // radial normal of the walk = radial_sign * outward
                        let nrx = radial_sign * g.nx;
                        let nry = radial_sign * g.ny;
                        for c in 0..4 {
                            fvis[(fi * n + kw) * 4 + c] = g.mag * (fv[c] * nrx + gv[c] * nry);
                        }
                    }
                }
            }

            match self.opts.viscous_method {
                ViscousMethod::FluxProjection => {
                    // project the local computational viscous flux to each
                    // mortar side with the scaled projector and average
                    let mut ml = vec![0.0; n * 4];
                    let mut mr = vec![0.0; n * 4];
                    for (im, m) in sc.layout.mortars.iter().enumerate() {
                        project_forward(
                            &m.fwd_left,
                            n,
                            4,
                            &fvis_inner[m.left * n * 4..(m.left + 1) * n * 4],
                            &mut ml,
                        );
                        project_forward(
                            &m.fwd_right,
                            n,
                            4,
                            &fvis_outer[m.right * n * 4..(m.right + 1) * n * 4],
                            &mut mr,
                        );
                        for j in 0..n {
                            for c in 0..4 {
                                sc.breve[(im * n + j) * 5 + c] +=
                                    0.5 * (m.s_left * ml[j * 4 + c] + m.s_right * mr[j * 4 + c]);
                            }
                        }
                    }
                }
                ViscousMethod::GradientProjection => {
                    // project gradients, evaluate the viscous flux from the
                    // mortar common solution and common gradient
                    let mut grad_inner = vec![0.0; nfl * n * 8];
                    let mut grad_outer = vec![0.0; nfr * n * 8];
                    for (side_faces, gbuf) in [
                        (&itf.inner_faces, &mut grad_inner),
                        (&itf.outer_faces, &mut grad_outer),
                    ] {
                        for (fi, sf) in side_faces.iter().enumerate() {
                            gather_ccw(
                                &ws.grad_face,
                                sf,
                                n,
                                8,
                                &mut gbuf[fi * n * 8..(fi + 1) * n * 8],
                            );
                        }
                    }
                    let mut gl = vec![0.0; n * 8];
                    let mut gr = vec![0.0; n * 8];
                    for (im, m) in sc.layout.mortars.iter().enumerate() {
                        project_forward(
                            &m.fwd_left,
                            n,
                            8,
                            &grad_inner[m.left * n * 8..(m.left + 1) * n * 8],
                            &mut gl,
                        );
                        project_forward(
                            &m.fwd_right,
                            n,
                            8,
                            &grad_outer[m.right * n * 8..(m.right + 1) * n * 8],
                            &mut gr,
                        );
                        let l_mortar = itf.radius * m.span();
                        for j in 0..n {
                            let theta = m.theta0 + self.basis.points[j] * m.span();
                            let (sin_t, cos_t) = theta.sin_cos();
                            let qv: Cons = sc.qcom[(im * n + j) * 4..(im * n + j) * 4 + 4]
                                .try_into()
                                .unwrap();
                            let mut gx = [0.0; 4];
                            let mut gy = [0.0; 4];
                            for c in 0..4 {
                                gx[c] = 0.5 * (gl[j * 8 + c] + gr[j * 8 + c]);
                                gy[c] = 0.5 * (gl[j * 8 + 4 + c] + gr[j * 8 + 4 + c]);
                            }
                            let (fv, gv) = viscous_flux(&self.model, &qv, &gx, &gy, true);
                            for c in 0..4 {
                                sc.breve[(im * n + j) * 5 + c] +=
                                    l_mortar * (fv[c] * cos_t + gv[c] * sin_t);
                            }
                        }
                    }
                }
            }

            // back-project the viscous additions (method 2 back projection of
            // the updated breve totals); recompute the face totals from
            // scratch to keep face and mortar integrals consistent
            sc.face_flux_inner.fill(0.0);
            sc.face_flux_outer.fill(0.0);
            for (im, m) in sc.layout.mortars.iter().enumerate() {
                let bv = &sc.breve[im * n * 5..(im + 1) * n * 5];
                project_back_breve(
                    &self.basis,
                    &m.fwd_left,
                    5,
                    bv,
                    &mut sc.face_flux_inner[m.left * n * 5..(m.left + 1) * n * 5],
                );
                project_back_breve(
                    &self.basis,
                    &m.fwd_right,
                    5,
                    bv,
                    &mut sc.face_flux_outer[m.right * n * 5..(m.right + 1) * n * 5],
                );
            }
            for (fi, sf) in itf.inner_faces.iter().enumerate() {
                scatter_flux(
                    &sc.face_flux_inner[fi * n * 5..(fi + 1) * n * 5],
                    sf,
                    n,
                    1.0,
                    &mut ws.com_flux,
                );
            }
            for (fi, sf) in itf.outer_faces.iter().enumerate() {
                scatter_flux(
                    &sc.face_flux_outer[fi * n * 5..(fi + 1) * n * 5],
                    sf,
                    n,
                    -1.0,
                    &mut ws.com_flux,
                );
            }
            ws.interfaces[ii] = Some(sc);
        }
    }

    fn phase_faces_viscous(&self, ws: &mut Workspace) {
        let n = self.n;
        for face in &self.mesh.interior {
            let (ea, fa) = face.a;
            let (eb, fb) = face.b;
            let sa = (ea * 4 + fa.index()) * n;
            let sb = (eb * 4 + fb.index()) * n;
            for k in 0..n {
                let kb = if face.flip { n - 1 - k } else { k };
                let g = ws.fp[sa + k];
                let qv: Cons = ws.com_q[(sa + k) * 4..(sa + k) * 4 + 4].try_into().unwrap();
                let mut gx = [0.0; 4];
                let mut gy = [0.0; 4];
                for c in 0..4 {
                    gx[c] = 0.5 * (ws.grad_face[(sa + k) * 8 + c] + ws.grad_face[(sb + kb) * 8 + c]);
                    gy[c] = 0.5
                        * (ws.grad_face[(sa + k) * 8 + 4 + c]
                            + ws.grad_face[(sb + kb) * 8 + 4 + c]);
                }
                let (fv, gv) = viscous_flux(&self.model, &qv, &gx, &gy, true);
                let fn_vis = |c: usize| fv[c] * g.nx + gv[c] * g.ny;
                let siga = fa.orientation_sign();
                let sigb = -fb.orientation_sign();
                for c in 0..4 {
                    let v = fn_vis(c);
                    ws.com_flux[(sa + k) * 5 + c] += siga * g.mag * v;
                    ws.com_flux[(sb + kb) * 5 + c] += sigb * g.mag * v;
                }
            }
        }
        for bc in &self.bc_faces {
            let s = (bc.cell * 4 + bc.face.index()) * n;
            let sig = bc.face.orientation_sign();
            let heat = !matches!(bc.kind, BcKind::NoSlipAdiabatic);
            for k in 0..n {
                let g = ws.fp[s + k];
                let qv: Cons = ws.com_q[(s + k) * 4..(s + k) * 4 + 4].try_into().unwrap();
                let gx: Cons = ws.grad_face[(s + k) * 8..(s + k) * 8 + 4].try_into().unwrap();
                let gy: Cons = ws.grad_face[(s + k) * 8 + 4..(s + k) * 8 + 8]
                    .try_into()
                    .unwrap();
                let (fv, gv) = viscous_flux(&self.model, &qv, &gx, &gy, heat);
                for c in 0..4 {
                    ws.com_flux[(s + k) * 5 + c] += sig * g.mag * (fv[c] * g.nx + gv[c] * g.ny);
                }
            }
        }
    }

    fn phase_assemble(&self, ws: &mut Workspace, out: &mut [f64]) {
        let np = self.np;
        let n = self.n;
        let basis = &self.basis;
        let viscous = self.model.is_viscous();
        let gcl_on = self.opts.gcl;
        let q = &ws.q;
        let grad = &ws.grad;
        let sp = &ws.sp;
        let com_flux = &ws.com_flux;
        let model = self.model;
        // out is the only output; chunk it alone via par2 with a dummy pair
        let mut dummy: Vec<u8> = vec![0; self.n_elements()];
        self.par2(out, np * 5, &mut dummy, 1, |e0, oc, _d| {
            let nel = oc.len() / (np * 5);
            let mut ft = vec![0.0; np * 5];
            let mut gt = vec![0.0; np * 5];
            let mut tr = vec![0.0; 4 * n * 5];
            for le in 0..nel {
                let e = e0 + le;
                // transformed fluxes at solution points
                for p in 0..np {
                    let m = &sp[e * np + p];
                    let qp: Cons = q[(e * np + p) * 4..(e * np + p) * 4 + 4].try_into().unwrap();
                    let (mut fx, mut gx) = inviscid_flux(&model, &qp);
                    if viscous {
                        let dx: Cons = grad[(e * np + p) * 8..(e * np + p) * 8 + 4]
                            .try_into()
                            .unwrap();
                        let dy: Cons = grad[(e * np + p) * 8 + 4..(e * np + p) * 8 + 8]
                            .try_into()
                            .unwrap();
                        let (fv, gv) = viscous_flux(&model, &qp, &dx, &dy, true);
                        for c in 0..4 {
                            fx[c] += fv[c];
                            gx[c] += gv[c];
                        }
                    }
                    let (f5v, g5v) = transform_fluxes(m, &qp, &fx, &gx);
                    ft[p * 5..p * 5 + 5].copy_from_slice(&f5v);
                    gt[p * 5..p * 5 + 5].copy_from_slice(&g5v);
                }
                // traces of the flux polynomials: W/E from F~, S/N from G~
                flux_traces(basis, n, &ft, &gt, &mut tr);

                let oe = &mut oc[le * np * 5..(le + 1) * np * 5];
                let cf = |f: usize, k: usize, c: usize| {
                    com_flux[((e * 4 + f) * n + k) * 5 + c]
                };
                for j in 0..n {
                    for i in 0..n {
                        let p = j * n + i;
                        let mut div = [0.0f64; 5];
                        // d/dxi of F~ along the row
                        {
                            let row = &basis.deriv[i * n..(i + 1) * n];
                            for (s, &d) in row.iter().enumerate() {
                                let f5 = &ft[(j * n + s) * 5..(j * n + s) * 5 + 5];
                                for c in 0..5 {
                                    div[c] += d * f5[c];
                                }
                            }
                            let gl = basis.gl_prime[i];
                            let gr = basis.gr_prime[i];
                            let w = LocalFace::West.index();
                            let ei = LocalFace::East.index();
                            for c in 0..5 {
                                div[c] += (cf(w, j, c) - tr[(w * n + j) * 5 + c]) * gl
                                    + (cf(ei, j, c) - tr[(ei * n + j) * 5 + c]) * gr;
                            }
                        }
                        // d/deta of G~ along the column
                        {
                            let row = &basis.deriv[j * n..(j + 1) * n];
                            for (s, &d) in row.iter().enumerate() {
                                let g5 = &gt[(s * n + i) * 5..(s * n + i) * 5 + 5];
                                for c in 0..5 {
                                    div[c] += d * g5[c];
                                }
                            }
                            let gl = basis.gl_prime[j];
                            let gr = basis.gr_prime[j];
                            let so = LocalFace::South.index();
                            let no = LocalFace::North.index();
                            for c in 0..5 {
                                div[c] += (cf(so, i, c) - tr[(so * n + i) * 5 + c]) * gl
                                    + (cf(no, i, c) - tr[(no * n + i) * 5 + c]) * gr;
                            }
                        }
                        for c in 0..4 {
                            oe[p * 5 + c] = -div[c];
                        }
                        oe[p * 5 + 4] = if gcl_on { -div[4] } else { 0.0 };
                    }
                }
            }
        });
    }

    fn finalize_diag(&self, ws: &mut Workspace, out: &[f64], diag: Option<&mut ResidualDiag>) {
        let Some(d) = diag else {
            return;
        };
        let n = self.n;
        let np = self.np;
        if d.want_conservation {
            let mut e_sum = [0.0f64; 4];
            for e in 0..self.n_elements() {
                for j in 0..n {
                    for i in 0..n {
                        let w = self.basis.weights[i] * self.basis.weights[j];
                        let p = e * np + j * n + i;
                        for c in 0..4 {
                            e_sum[c] += w * out[p * 5 + c];
                        }
                    }
                }
            }
            for bc in &self.bc_faces {
                let s = (bc.cell * 4 + bc.face.index()) * n;
                let sig = bc.face.orientation_sign();
                for k in 0..n {
                    for c in 0..4 {
                        e_sum[c] += sig * self.basis.weights[k] * ws.com_flux[(s + k) * 5 + c];
                    }
                }
            }
            d.conservation = e_sum;
        }
        if d.want_defect {
            let mut max_d = 0.0f64;
            for (ii, itf) in self.interfaces.iter().enumerate() {
                let Some(sc) = &ws.interfaces[ii] else { continue };
                for (lists, flux, nfaces) in [
                    (&sc.layout.left_lists, &sc.face_flux_inner, itf.inner_faces.len()),
                    (&sc.layout.right_lists, &sc.face_flux_outer, itf.outer_faces.len()),
                ] {
                    for fi in 0..nfaces {
                        let face_vals = &flux[fi * n * 5..(fi + 1) * n * 5];
                        let mortars: Vec<&[f64]> = lists[fi]
                            .iter()
                            .map(|&im| &sc.breve[im * n * 5..(im + 1) * n * 5])
                            .collect();
                        let defect = face_conservation_defect(&self.basis, 5, face_vals, &mortars);
                        for v in defect {
                            max_d = max_d.max(v);
                        }
                    }
                }
            }
            d.max_defect = d.max_defect.max(max_d);
        }
        if d.want_forces {
            let mut force = [0.0f64; 2];
            for bc in &self.bc_faces {
                let selected = if d.force_tags.is_empty() {
                    bc.kind.is_wall()
                } else {
                    d.force_tags.iter().any(|t| t == &bc.tag)
                };
                if !selected {
                    continue;
                }
                let s = (bc.cell * 4 + bc.face.index()) * n;
                for k in 0..n {
                    let g = ws.fp[s + k];
                    let qv: Cons = ws.q_face[(s + k) * 4..(s + k) * 4 + 4].try_into().unwrap();
                    let p = self.model.pressure(&qv);
                    let mut tx = 0.0;
                    let mut ty = 0.0;
                    if self.model.is_viscous() {
                        let gx: Cons = ws.grad_face[(s + k) * 8..(s + k) * 8 + 4]
                            .try_into()
                            .unwrap();
                        let gy: Cons = ws.grad_face[(s + k) * 8 + 4..(s + k) * 8 + 8]
                            .try_into()
                            .unwrap();
                        let (fv, gv) = viscous_flux(&self.model, &qv, &gx, &gy, false);
                        // viscous flux rows 1..2 are -tau . e_x / e_y
                        tx = -(fv[1] * g.nx + gv[1] * g.ny);
                        ty = -(fv[2] * g.nx + gv[2] * g.ny);
                    }
                    // fluid-on-body traction: sigma . n with n = -outward
                    let w = self.basis.weights[k] * g.mag;
                    force[0] += w * (p * g.nx - tx);
                    force[1] += w * (p * g.ny - ty);
                }
            }
            d.force = force;
        }
    }
}

/// Transformed computational fluxes at one point:
/// `F~ = (-x_t y_eta + y_t x_eta) Q + y_eta F - x_eta G` and the
/// corresponding `G~`; the fifth component carries the grid-motion flux of
/// the geometric conservation law.
#[inline]
pub fn transform_fluxes(m: &Metrics, q: &Cons, f: &Cons, g: &Cons) -> ([f64; 5], [f64; 5]) {
    // N_xi = (y_eta, -x_eta), N_eta = (-y_xi, x_xi)
    let vg_nxi = m.vg[0] * m.y_eta - m.vg[1] * m.x_eta;
    let vg_neta = -m.vg[0] * m.y_xi + m.vg[1] * m.x_xi;
    let mut f5 = [0.0; 5];
    let mut g5 = [0.0; 5];
    for c in 0..4 {
        f5[c] = -vg_nxi * q[c] + m.y_eta * f[c] - m.x_eta * g[c];
        g5[c] = -vg_neta * q[c] - m.y_xi * f[c] + m.x_xi * g[c];
    }
    f5[4] = -vg_nxi;
    g5[4] = -vg_neta;
    (f5, g5)
}

fn fp_geom(m: &Metrics, face: LocalFace) -> FpGeom {
    let (nv, mag) = outward_normal(m, face);
    FpGeom {
        x: m.x,
        y: m.y,
        nx: nv[0] / mag,
        ny: nv[1] / mag,
        mag,
        vgx: m.vg[0],
        vgy: m.vg[1],
    }
}

/// Interpolate element point values (np x c) to the four faces (4 x n x c).
fn trace_to_faces(basis: &BasisSet, n: usize, c: usize, vals: &[f64], out: &mut [f64]) {
    let fo = |f: LocalFace| f.index() * n * c;
    for k in 0..n {
        let mut s_acc = vec![0.0; c];
        let mut n_acc = vec![0.0; c];
        for j in 0..n {
            let v = &vals[(j * n + k) * c..(j * n + k) * c + c];
            let wl = basis.at_left[j];
            let wr = basis.at_right[j];
            for cc in 0..c {
                s_acc[cc] += wl * v[cc];
                n_acc[cc] += wr * v[cc];
            }
        }
        out[fo(LocalFace::South) + k * c..fo(LocalFace::South) + (k + 1) * c]
            .copy_from_slice(&s_acc);
        out[fo(LocalFace::North) + k * c..fo(LocalFace::North) + (k + 1) * c]
            .copy_from_slice(&n_acc);

        let mut w_acc = vec![0.0; c];
        let mut e_acc = vec![0.0; c];
        for i in 0..n {
            let v = &vals[(k * n + i) * c..(k * n + i) * c + c];
            let wl = basis.at_left[i];
            let wr = basis.at_right[i];
            for cc in 0..c {
                w_acc[cc] += wl * v[cc];
                e_acc[cc] += wr * v[cc];
            }
        }
        out[fo(LocalFace::West) + k * c..fo(LocalFace::West) + (k + 1) * c]
            .copy_from_slice(&w_acc);
        out[fo(LocalFace::East) + k * c..fo(LocalFace::East) + (k + 1) * c]
            .copy_from_slice(&e_acc);
    }
}

/// Traces of the transformed flux polynomials: F~ to the West/East faces,
/// G~ to the South/North faces (5 components).
fn flux_traces(basis: &BasisSet, n: usize, ft: &[f64], gt: &[f64], out: &mut [f64]) {
    let fo = |f: LocalFace| f.index() * n * 5;
    for k in 0..n {
        let mut acc = [[0.0f64; 5]; 4];
        for s in 0..n {
            let wl = basis.at_left[s];
            let wr = basis.at_right[s];
            let f_row = &ft[(k * n + s) * 5..(k * n + s) * 5 + 5];
            let g_col = &gt[(s * n + k) * 5..(s * n + k) * 5 + 5];
            for c in 0..5 {
                acc[0][c] += wl * g_col[c]; // south: G~(xi_k, 0)
                acc[1][c] += wr * f_row[c]; // east:  F~(1, eta_k)
                acc[2][c] += wr * g_col[c]; // north: G~(xi_k, 1)
                acc[3][c] += wl * f_row[c]; // west:  F~(0, eta_k)
            }
        }
        for (f, a) in [
            (LocalFace::South, 0usize),
            (LocalFace::East, 1),
            (LocalFace::North, 2),
            (LocalFace::West, 3),
        ] {
            out[fo(f) + k * 5..fo(f) + (k + 1) * 5].copy_from_slice(&acc[a]);
        }
    }
}

/// Gather a face's trace values into walk (counterclockwise) order.
fn gather_ccw(q_face: &[f64], sf: &SlideFace, n: usize, c: usize, out: &mut [f64]) {
    let slot = (sf.cell * 4 + sf.face.index()) * n;
    for kw in 0..n {
        let kl = if sf.reversed { n - 1 - kw } else { kw };
        out[kw * c..(kw + 1) * c].copy_from_slice(&q_face[(slot + kl) * c..(slot + kl) * c + c]);
    }
}

/// Scatter back-projected computational fluxes into the element slot,
/// converting from the walk's radial orientation to the face's +coordinate
/// sense: slot = orientation_sign * side_sign * value.
fn scatter_flux(face_ccw: &[f64], sf: &SlideFace, n: usize, side_sign: f64, com_flux: &mut [f64]) {
    let slot = (sf.cell * 4 + sf.face.index()) * n;
    let sig = sf.face.orientation_sign() * side_sign;
    for kw in 0..n {
        let kl = if sf.reversed { n - 1 - kw } else { kw };
        for c in 0..5 {
            com_flux[(slot + kl) * 5 + c] = sig * face_ccw[kw * 5 + c];
        }
    }
}

/// Scatter orientation-free point values (common solutions) into the slot.
fn scatter_vals(face_ccw: &[f64], sf: &SlideFace, n: usize, c: usize, com_q: &mut [f64]) {
    let slot = (sf.cell * 4 + sf.face.index()) * n;
    for kw in 0..n {
        let kl = if sf.reversed { n - 1 - kw } else { kw };
        com_q[(slot + kl) * c..(slot + kl) * c + c]
            .copy_from_slice(&face_ccw[kw * c..(kw + 1) * c]);
    }
}
