//! Fluid model and flux functions for the 2D compressible Navier-Stokes
//! equations: conservative/primitive conversions, inviscid and viscous flux
//! vectors, and the moving-grid Rusanov solver used for common interface
//! fluxes.

use crate::geometry::Point;

/// Conservative variables [rho, rho u, rho v, E].
pub type Cons = [f64; 4];

/// Gas and transport properties. All quantities are nondimensional groups;
/// `mu = 0` selects the inviscid (Euler) path.
#[derive(Debug, Clone, Copy)]
pub struct FluidModel {
    pub gamma: f64,
    /// gas constant in p = rho R T
    pub gas_constant: f64,
    /// constant dynamic viscosity
    pub mu: f64,
    pub prandtl: f64,
}

impl FluidModel {
    pub fn inviscid(gamma: f64, gas_constant: f64) -> Self {
        FluidModel {
            gamma,
            gas_constant,
            mu: 0.0,
            prandtl: 0.72,
        }
    }

    /// Build a model from the usual nondimensional groups with reference
    /// density, speed and length equal to one: the Mach number fixes the gas
    /// constant through c = 1/Ma at unit reference temperature, the Reynolds
    /// number fixes mu.
    pub fn from_groups(gamma: f64, mach: f64, reynolds: f64, prandtl: f64) -> Self {
        let c = 1.0 / mach;
        let gas_constant = c * c / gamma;
        let mu = if reynolds > 0.0 && reynolds.is_finite() {
            1.0 / reynolds
        } else {
            0.0
        };
        FluidModel {
            gamma,
            gas_constant,
            mu,
            prandtl,
        }
    }

    pub fn cp(&self) -> f64 {
        self.gamma * self.gas_constant / (self.gamma - 1.0)
    }

    pub fn kappa(&self) -> f64 {
        self.mu * self.cp() / self.prandtl
    }

    pub fn is_viscous(&self) -> bool {
        self.mu > 0.0
    }

    pub fn pressure(&self, q: &Cons) -> f64 {
        (self.gamma - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0])
    }

    pub fn temperature(&self, q: &Cons) -> f64 {
        self.pressure(q) / (q[0] * self.gas_constant)
    }

    pub fn sound_speed(&self, q: &Cons) -> f64 {
        (self.gamma * self.pressure(q) / q[0]).sqrt()
    }

    pub fn cons(&self, rho: f64, u: f64, v: f64, p: f64) -> Cons {
        [
            rho,
            rho * u,
            rho * v,
            p / (self.gamma - 1.0) + 0.5 * rho * (u * u + v * v),
        ]
    }

    pub fn primitive(&self, q: &Cons) -> (f64, f64, f64, f64) {
        let rho = q[0];
        let u = q[1] / rho;
        let v = q[2] / rho;
        let p = self.pressure(q);
        (rho, u, v, p)
    }

    /// `Ok` for physically admissible states.
    pub fn admissible(&self, q: &Cons) -> Result<(), (f64, f64)> {
        let p = self.pressure(q);
        if q[0] > 0.0 && p > 0.0 && q.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err((q[0], p))
        }
    }
}

/// Inviscid flux vectors (F, G) of a state.
pub fn inviscid_flux(model: &FluidModel, q: &Cons) -> (Cons, Cons) {
    let (rho, u, v, p) = model.primitive(q);
    let e = q[3];
    (
        [rho * u, rho * u * u + p, rho * u * v, (e + p) * u],
        [rho * v, rho * u * v, rho * v * v + p, (e + p) * v],
    )
}

/// Viscous flux vectors (F_vis, G_vis) from a state and the gradients of the
/// conservative variables. `heat_flux` disables the conduction term for
/// adiabatic walls. Stokes' hypothesis: lambda = -2/3 mu.
pub fn viscous_flux(
    model: &FluidModel,
    q: &Cons,
    gx: &Cons,
    gy: &Cons,
    heat_flux: bool,
) -> (Cons, Cons) {
    let rho = q[0];
    let u = q[1] / rho;
    let v = q[2] / rho;

    // velocity gradients from conservative gradients
    let ux = (gx[1] - u * gx[0]) / rho;
    let uy = (gy[1] - u * gy[0]) / rho;
    let vx = (gx[2] - v * gx[0]) / rho;
    let vy = (gy[2] - v * gy[0]) / rho;

    let mu = model.mu;
    let lambda = -2.0 / 3.0 * mu;
    let div = ux + vy;
    let txx = 2.0 * mu * ux + lambda * div;
    let tyy = 2.0 * mu * vy + lambda * div;
    let txy = mu * (uy + vx);

    // T = (gamma-1)/R * (E/rho - (u^2+v^2)/2)
    let cfac = (model.gamma - 1.0) / model.gas_constant;
    let e_over_rho_x = (gx[3] - (q[3] / rho) * gx[0]) / rho;
    let e_over_rho_y = (gy[3] - (q[3] / rho) * gy[0]) / rho;
    let tx = cfac * (e_over_rho_x - (u * ux + v * vx));
    let ty = cfac * (e_over_rho_y - (u * uy + v * vy));

    let kappa = if heat_flux { model.kappa() } else { 0.0 };

    (
        [
            0.0,
            -txx,
            -txy,
            -(u * txx + v * txy + kappa * tx),
        ],
        [
            0.0,
            -txy,
            -tyy,
            -(u * txy + v * tyy + kappa * ty),
        ],
    )
}

/// How the sound speed entering the Rusanov wave speed is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveSpeedPolicy {
    /// speed of sound of the arithmetic-average state
    #[default]
    AverageState,
    /// maximum of the two sides' sound speeds
    MaxOfSides,
}

/// Moving-grid Rusanov flux: the common physical normal flux with respect to
/// the unit normal `n` pointing from the left state to the right state.
///
/// `F* = 1/2 [ (Fl + Fr) . n - lambda (Qr - Ql) ] - (vg . n) Qcom`
/// with `lambda = |(1/2 (vl + vr) - vg) . n| + c`.
pub fn rusanov(
    model: &FluidModel,
    ql: &Cons,
    qr: &Cons,
    n: Point,
    vg: Point,
    policy: WaveSpeedPolicy,
) -> Cons {
    let (fl, gl) = inviscid_flux(model, ql);
    let (fr, gr) = inviscid_flux(model, qr);

    let ul = ql[1] / ql[0];
    let vl = ql[2] / ql[0];
    let ur = qr[1] / qr[0];
    let vr = qr[2] / qr[0];
    let vn_rel = (0.5 * (ul + ur) - vg[0]) * n[0] + (0.5 * (vl + vr) - vg[1]) * n[1];

    let c = match policy {
        WaveSpeedPolicy::AverageState => {
            let avg = [
                0.5 * (ql[0] + qr[0]),
                0.5 * (ql[1] + qr[1]),
                0.5 * (ql[2] + qr[2]),
                0.5 * (ql[3] + qr[3]),
            ];
            model.sound_speed(&avg)
        }
        WaveSpeedPolicy::MaxOfSides => model.sound_speed(ql).max(model.sound_speed(qr)),
    };
    let lambda = vn_rel.abs() + c;
    let vg_n = vg[0] * n[0] + vg[1] * n[1];

    let mut out = [0.0; 4];
    for k in 0..4 {
        let fn_l = fl[k] * n[0] + gl[k] * n[1];
        let fn_r = fr[k] * n[0] + gr[k] * n[1];
        let qcom = 0.5 * (ql[k] + qr[k]);
        out[k] = 0.5 * (fn_l + fn_r - lambda * (qr[k] - ql[k])) - vg_n * qcom;
    }
    out
}
