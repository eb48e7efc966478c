//! Case construction and run orchestration: read meshes, reorder and correct
//! interfaces, then loop over update-connectivity / project / flux / step,
//! writing snapshots, force histories and diagnostics.

use crate::config::RunConfig;
use crate::error::SolverError;
use crate::exact::{EulerVortex, ExactSolution, FlatCouette, TaylorCouette};
use crate::geometry::RigidRotation;
use crate::mesh::{assemble, format, generate, AssembledMesh};
use crate::physics::{FluidModel, WaveSpeedPolicy};
use crate::snapshot;
use crate::solver::{BcKind, ResidualDiag, Solver, SolverOptions, StepDiag, ViscousMethod};
use crate::time::RkScheme;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

pub struct CaseSetup {
    pub mesh: AssembledMesh,
    pub model: FluidModel,
    pub bcs: HashMap<String, BcKind>,
    pub init: ExactSolution,
    /// analytic solution for error measurement, when one exists
    pub exact: Option<ExactSolution>,
    /// reference force scale (dynamic pressure times diameter) for
    /// lift/drag coefficients
    pub force_scale: Option<f64>,
}

/// Build the mesh, fluid model and boundary bindings for a configuration.
pub fn build_case(cfg: &RunConfig) -> Result<CaseSetup, SolverError> {
    if let Some(preset) = &cfg.preset {
        build_preset(preset, cfg)
    } else {
        build_from_files(cfg)
    }
}

fn dirichlet_all(tags: &[&str], exact: ExactSolution) -> HashMap<String, BcKind> {
    tags.iter()
        .map(|t| (t.to_string(), BcKind::Dirichlet(exact)))
        .collect()
}

fn build_preset(name: &str, cfg: &RunConfig) -> Result<CaseSetup, SolverError> {
    let model = FluidModel::from_groups(cfg.gamma, cfg.mach, cfg.reynolds, cfg.prandtl);
    match name {
        "euler_vortex" => {
            let exact = ExactSolution::Vortex(EulerVortex {
                model,
                u_inf: 1.0,
                rho_inf: 1.0,
                mach: cfg.mach,
                theta: 0.5f64.atan(),
                eps: 1.0,
                r_c: 1.0,
                x0: 5.0,
                y0: 5.0,
            });
            let (inner, outer) = generate::vortex_mesh([5.0, 5.0], 2.0, 5.0, cfg.omega);
            Ok(CaseSetup {
                mesh: assemble(&[inner, outer])?,
                model,
                bcs: dirichlet_all(&["outer"], exact),
                init: exact,
                exact: Some(exact),
                force_scale: None,
            })
        }
        "taylor_couette" => {
            let p_ref = model.gas_constant; // rho = T = 1 at the inner boundary
            let exact = ExactSolution::Couette(TaylorCouette {
                model,
                center: [0.0, 0.0],
                r_i: 1.0,
                r_o: 2.0,
                v_theta_i: 1.0,
                v_theta_o: 0.0,
                rho: 1.0,
                p: p_ref,
            });
            let (inner, outer) = generate::taylor_couette_mesh(1.0, 1.5, 2.0, cfg.omega);
            let mut bcs = dirichlet_all(&["wall_inner"], exact);
            bcs.insert(
                "wall_outer".to_string(),
                BcKind::NoSlipIsothermal { t_wall: 1.0 },
            );
            Ok(CaseSetup {
                mesh: assemble(&[inner, outer])?,
                model,
                bcs,
                init: exact,
                exact: Some(exact),
                force_scale: None,
            })
        }
        "couette_conservation" => {
            let exact = ExactSolution::FlatCouette(FlatCouette {
                model,
                u_top: 1.0,
                height: 1.0,
                t_bottom: 1.0,
                t_top: 1.0,
                p: model.gas_constant,
            });
            let (inner, outer) = generate::vortex_mesh([0.5, 0.5], 0.2, 0.5, cfg.omega);
            Ok(CaseSetup {
                mesh: assemble(&[inner, outer])?,
                model,
                bcs: dirichlet_all(&["outer"], exact),
                init: exact,
                exact: Some(exact),
                force_scale: None,
            })
        }
        "free_stream_conforming" => {
            let q = model.cons(1.0, 1.0, 0.0, model.gas_constant);
            let exact = ExactSolution::FreeStream(q);
            let mesh = assemble(&[generate::annulus(generate::AnnulusSpec {
                center: [0.0, 0.0],
                r_inner: 0.5,
                r_outer: 1.5,
                n_azimuthal: 12,
                n_radial: 3,
                inner_tag: "inner".into(),
                outer_tag: "outer".into(),
                inner_arc: false,
                outer_arc: false,
                rotation: Some(RigidRotation {
                    center: [0.0, 0.0],
                    omega: cfg.omega,
                }),
                theta_offset: 0.0,
            })])?;
            Ok(CaseSetup {
                mesh,
                model,
                bcs: dirichlet_all(&["inner", "outer"], exact),
                init: exact,
                exact: Some(exact),
                force_scale: None,
            })
        }
        "free_stream_sliding" => {
            let q = model.cons(1.0, 1.0, 0.0, model.gas_constant);
            let exact = ExactSolution::FreeStream(q);
            let (inner, outer) = generate::vortex_mesh([0.5, 0.5], 0.2, 0.5, cfg.omega);
            Ok(CaseSetup {
                mesh: assemble(&[inner, outer])?,
                model,
                bcs: dirichlet_all(&["outer"], exact),
                init: exact,
                exact: Some(exact),
                force_scale: None,
            })
        }
        "rotating_cylinder" => {
            let q = model.cons(1.0, 1.0, 0.0, model.gas_constant);
            let (inner, outer) =
                generate::square_cylinder_mesh(1.0, 50.0, cfg.omega, 40, 4, 32);
            let mut bcs = HashMap::new();
            bcs.insert("cylinder".to_string(), BcKind::NoSlipAdiabatic);
            bcs.insert("farfield".to_string(), BcKind::Farfield(q));
            Ok(CaseSetup {
                mesh: assemble(&[inner, outer])?,
                model,
                bcs,
                init: ExactSolution::FreeStream(q),
                exact: None,
                // 1/2 rho U^2 D with unit free-stream values and D = 1
                force_scale: Some(0.5),
            })
        }
        other => Err(SolverError::Config(format!("unknown preset '{other}'"))),
    }
}

fn build_from_files(cfg: &RunConfig) -> Result<CaseSetup, SolverError> {
    let mut subs = Vec::new();
    for path in &cfg.mesh_files {
        subs.push(format::read_subdomain(path)?);
    }
    let mesh = assemble(&subs)?;
    let model = FluidModel::from_groups(cfg.gamma, cfg.mach, cfg.reynolds, cfg.prandtl);
    let q = model.cons(1.0, 1.0, 0.0, model.gas_constant);
    let mut bcs = HashMap::new();
    for (tag, kind) in &cfg.bc {
        let bc = match kind.as_str() {
            "dirichlet_freestream" => BcKind::Dirichlet(ExactSolution::FreeStream(q)),
            "farfield" => BcKind::Farfield(q),
            "noslip_adiabatic" => BcKind::NoSlipAdiabatic,
            other => match other.strip_prefix("noslip_isothermal:") {
                Some(t) => BcKind::NoSlipIsothermal {
                    t_wall: t.parse().map_err(|_| {
                        SolverError::Config(format!("bad wall temperature in '{other}'"))
                    })?,
                },
                None => {
                    return Err(SolverError::Config(format!(
                        "unknown boundary kind '{other}' for tag '{tag}'"
                    )))
                }
            },
        };
        bcs.insert(tag.clone(), bc);
    }
    Ok(CaseSetup {
        mesh,
        model,
        bcs,
        init: ExactSolution::FreeStream(q),
        exact: None,
        force_scale: Some(0.5),
    })
}

pub fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        viscous_method: if cfg.viscous_method == "gradient" {
            ViscousMethod::GradientProjection
        } else {
            ViscousMethod::FluxProjection
        },
        wavespeed: if cfg.wavespeed == "max" {
            WaveSpeedPolicy::MaxOfSides
        } else {
            WaveSpeedPolicy::AverageState
        },
        workers: cfg.workers.max(1),
        gcl: cfg.gcl,
    }
}

/// Largest stable time step estimate: minimum solution-point spacing over the
/// maximum convective speed, times a per-scheme factor.
pub fn suggest_dt(solver: &Solver, state: &[f64], scheme: &RkScheme) -> f64 {
    let n = solver.n;
    let np = solver.np;
    let pos = solver.sp_positions(0.0);
    let model = solver.model;
    let mut dt_min = f64::INFINITY;
    for e in 0..solver.n_elements() {
        let mut h = f64::INFINITY;
        for j in 0..n {
            for i in 0..n {
                let p = pos[e * np + j * n + i];
                if i + 1 < n {
                    let q = pos[e * np + j * n + i + 1];
                    h = h.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
                if j + 1 < n {
                    let q = pos[e * np + (j + 1) * n + i];
                    h = h.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
            }
        }
        let motion = solver.mesh.cell_motion(e);
        let mut lam = 0.0f64;
        for pidx in 0..np {
            let s = &state[(e * np + pidx) * 5..(e * np + pidx) * 5 + 5];
            let q = [s[0] / s[4], s[1] / s[4], s[2] / s[4], s[3] / s[4]];
            let (rho, u, v, pr) = model.primitive(&q);
            let c = (model.gamma * pr / rho).sqrt();
            let vg = match motion {
                Some(rot) => {
                    let xy = pos[e * np + pidx];
                    rot.omega * ((xy[0] - rot.center[0]).powi(2) + (xy[1] - rot.center[1]).powi(2)).sqrt()
                }
                None => 0.0,
            };
            lam = lam.max((u * u + v * v).sqrt() + vg + c);
        }
        dt_min = dt_min.min(h / lam);
    }
    let cfl = match scheme.name.as_str() {
        "ssp(4,2)" => 0.30,
        "ssp(8,3)" => 0.60,
        "ssp(10,4)" => 0.90,
        _ => 0.45, // ssp(5,4) and anything else
    };
    cfl * dt_min
}

pub struct RunArtifacts {
    pub t_end: f64,
    pub steps: usize,
    pub dt: f64,
    pub state: Vec<f64>,
    /// L2 errors of (rho, u, v, p) against the case's analytic solution
    pub errors: Option<[f64; 4]>,
    pub max_defect: f64,
    pub out_dir: Option<PathBuf>,
}

/// Execute a configured run: solver setup, initialization (or restart), the
/// time loop with periodic outputs, and the final artifact set.
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts, SolverError> {
    cfg.validate()?;
    let case = build_case(cfg)?;
    let opts = solver_options(cfg);
    let solver = Solver::new(case.mesh, cfg.p + 1, case.model, &case.bcs, opts)?;
    let scheme = RkScheme::by_name(&cfg.scheme)?;

    let (t0, mut state) = match &cfg.restart_from {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SolverError::io(path.clone(), e))?;
            let (t, st) = snapshot::parse_restart(&text)?;
            if st.len() != solver.state_len() {
                return Err(SolverError::Config(format!(
                    "restart state has {} values, expected {}",
                    st.len(),
                    solver.state_len()
                )));
            }
            (t, st)
        }
        None => (0.0, solver.init_state(&case.init, 0.0)),
    };

    let out_dir = cfg.out_dir.as_ref().map(PathBuf::from);
    if let Some(dir) = &out_dir {
        let mut manifest = String::new();
        writeln!(manifest, "# slidefr {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(manifest, "# elements = {}", solver.n_elements()).unwrap();
        writeln!(manifest, "# order n = {}", solver.n).unwrap();
        manifest.push_str(&cfg.render());
        snapshot::write_text(&dir.join("manifest.txt"), &manifest)?;
    }

    let span = cfg.t_end - t0;
    if span <= 0.0 {
        // dump the initial condition and stop
        if let Some(dir) = &out_dir {
            let rows = solver.sample_primitives(&state, t0);
            snapshot::write_text(&dir.join("field_final.txt"), &snapshot::render_field(&rows, t0))?;
            snapshot::write_text(&dir.join("restart_final.txt"), &snapshot::render_restart(&state, t0))?;
        }
        return Ok(RunArtifacts {
            t_end: t0,
            steps: 0,
            dt: 0.0,
            state,
            errors: None,
            max_defect: 0.0,
            out_dir,
        });
    }

    let dt_raw = if cfg.dt > 0.0 {
        cfg.dt
    } else {
        suggest_dt(&solver, &state, &scheme)
    };
    let steps = (span / dt_raw).ceil().max(1.0) as usize;
    let dt = span / steps as f64;

    let mut ws = solver.workspace();
    let has_walls = case.force_scale.is_some()
        && case
            .bcs
            .values()
            .any(|k| matches!(k, BcKind::NoSlipAdiabatic | BcKind::NoSlipIsothermal { .. }));

    let mut forces_csv = String::from("step,t,fx,fy,cd,cl\n");
    let mut conservation_csv = String::from("t,mass,momentum_x,momentum_y,energy\n");
    let mut mortar_csv = String::from("step,t,interface,mortar,left_face,right_face,s_left,o_left,s_right,o_right,max_defect,max_outflow_residual\n");
    let monitor_every = (steps / 200).max(1);
    let mut max_defect = 0.0f64;

    for step in 0..steps {
        let t = t0 + step as f64 * dt;
        let mut diag = StepDiag {
            want_defect: cfg.mortar_dump || cfg.conservation,
            max_defect: 0.0,
            first_stage: None,
        };
        let want_first = has_walls || cfg.mortar_dump || (cfg.conservation && step % monitor_every == 0);
        if want_first {
            diag.first_stage = Some(ResidualDiag {
                want_forces: has_walls,
                want_conservation: cfg.conservation && step % monitor_every == 0,
                want_mortar_rows: cfg.mortar_dump,
                want_outflow_residual: cfg.mortar_dump,
                ..Default::default()
            });
        }
        solver
            .step(&scheme, &mut state, t, dt, &mut ws, Some(&mut diag))
            .map_err(|e| match e {
                SolverError::Diverged { stage, time, .. } => {
                    // best effort: keep the last good state on disk
                    if let Some(dir) = &out_dir {
                        let _ = snapshot::write_text(
                            &dir.join("restart_last_good.txt"),
                            &snapshot::render_restart(&state, t),
                        );
                    }
                    SolverError::Diverged { step, stage, time }
                }
                other => other,
            })?;
        max_defect = max_defect.max(diag.max_defect);

        if let Some(first) = &diag.first_stage {
            if has_walls {
                let scale = case.force_scale.unwrap_or(1.0);
                writeln!(
                    forces_csv,
                    "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                    step,
                    t,
                    first.force[0],
                    first.force[1],
                    first.force[0] / scale,
                    first.force[1] / scale
                )
                .unwrap();
            }
            if first.want_conservation {
                writeln!(
                    conservation_csv,
                    "{:.10e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    first.conservation[0],
                    first.conservation[1],
                    first.conservation[2],
                    first.conservation[3]
                )
                .unwrap();
            }
            if cfg.mortar_dump {
                for row in &first.mortar_rows {
                    writeln!(
                        mortar_csv,
                        "{},{:.10e},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.3e},{:.3e}",
                        step,
                        t,
                        row.interface,
                        row.mortar,
                        row.left_face,
                        row.right_face,
                        row.s_left,
                        row.o_left,
                        row.s_right,
                        row.o_right,
                        diag.max_defect,
                        first.max_outflow_residual
                    )
                    .unwrap();
                }
            }
        }

        if let Some(dir) = &out_dir {
            if cfg.field_every > 0 && (step + 1) % cfg.field_every == 0 && step + 1 < steps {
                let tn = t0 + (step + 1) as f64 * dt;
                let rows = solver.sample_primitives(&state, tn);
                let path = dir.join(format!("fields/step_{:07}.txt", step + 1));
                snapshot::write_text(&path, &snapshot::render_field(&rows, tn))?;
            }
        }
    }

    let t_end = t0 + span;
    if let Some(dir) = &out_dir {
        let rows = solver.sample_primitives(&state, t_end);
        snapshot::write_text(&dir.join("field_final.txt"), &snapshot::render_field(&rows, t_end))?;
        if cfg.vtk {
            snapshot::write_text(
                &dir.join("field_final.vtk"),
                &snapshot::render_vtk(&rows, solver.n, t_end),
            )?;
        }
        snapshot::write_text(
            &dir.join("restart_final.txt"),
            &snapshot::render_restart(&state, t_end),
        )?;
        if has_walls {
            snapshot::write_text(&dir.join("forces.csv"), &forces_csv)?;
        }
        if cfg.conservation {
            snapshot::write_text(&dir.join("conservation.csv"), &conservation_csv)?;
        }
        if cfg.mortar_dump {
            snapshot::write_text(&dir.join("mortars.csv"), &mortar_csv)?;
        }
    }

    let errors = case.exact.map(|exact| {
        let mut errs = [0.0; 4];
        for comp in 0..4 {
            errs[comp] = solver.l2_error(&state, t_end, &exact, comp);
        }
        errs
    });

    Ok(RunArtifacts {
        t_end,
        steps,
        dt,
        state,
        errors,
        max_defect,
        out_dir,
    })
}
