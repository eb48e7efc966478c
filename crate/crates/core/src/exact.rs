//! Analytic solutions used for initialization, weakly imposed Dirichlet data
//! and error measurement.

use crate::physics::{Cons, FluidModel};

/// Isentropic vortex convected by a uniform flow.
#[derive(Debug, Clone, Copy)]
pub struct EulerVortex {
    pub model: FluidModel,
    pub u_inf: f64,
    pub rho_inf: f64,
    pub mach: f64,
    /// mean flow direction
    pub theta: f64,
    /// vortex strength
    pub eps: f64,
    /// vortex size
    pub r_c: f64,
    pub x0: f64,
    pub y0: f64,
}

impl EulerVortex {
    pub fn p_inf(&self) -> f64 {
        self.rho_inf * self.u_inf * self.u_inf / (self.model.gamma * self.mach * self.mach)
    }

    pub fn evaluate(&self, t: f64, x: f64, y: f64) -> Cons {
        let g = self.model.gamma;
        let (ub, vb) = (self.u_inf * self.theta.cos(), self.u_inf * self.theta.sin());
        let xr = x - self.x0 - ub * t;
        let yr = y - self.y0 - vb * t;
        let r2 = (xr * xr + yr * yr) / (self.r_c * self.r_c);
        let half_exp = ((1.0 - r2) / 2.0).exp();
        let u = self.u_inf * (self.theta.cos() - self.eps * yr / self.r_c * half_exp);
        let v = self.u_inf * (self.theta.sin() + self.eps * xr / self.r_c * half_exp);
        let core = 1.0 - (g - 1.0) * (self.eps * self.mach).powi(2) / 2.0 * (1.0 - r2).exp();
        let rho = self.rho_inf * core.powf(1.0 / (g - 1.0));
        let p = self.p_inf() * core.powf(g / (g - 1.0));
        self.model.cons(rho, u, v, p)
    }
}

/// Steady azimuthal flow between two concentric circular boundaries.
#[derive(Debug, Clone, Copy)]
pub struct TaylorCouette {
    pub model: FluidModel,
    pub center: [f64; 2],
    pub r_i: f64,
    pub r_o: f64,
    pub v_theta_i: f64,
    pub v_theta_o: f64,
    /// density and pressure of the reference state
    pub rho: f64,
    pub p: f64,
}

impl TaylorCouette {
    pub fn v_theta(&self, r: f64) -> f64 {
        let (ri, ro) = (self.r_i, self.r_o);
        let denom = ro / ri - ri / ro;
        self.v_theta_i * (ro / r - r / ro) / denom + self.v_theta_o * (r / ri - ri / r) / denom
    }

    pub fn evaluate(&self, _t: f64, x: f64, y: f64) -> Cons {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let r = (dx * dx + dy * dy).sqrt();
        let vt = self.v_theta(r);
        let u = -vt * dy / r;
        let v = vt * dx / r;
        self.model.cons(self.rho, u, v, self.p)
    }
}

/// Flat-plate Couette flow with viscous heating between isothermal plates.
#[derive(Debug, Clone, Copy)]
pub struct FlatCouette {
    pub model: FluidModel,
    pub u_top: f64,
    pub height: f64,
    pub t_bottom: f64,
    pub t_top: f64,
    pub p: f64,
}

impl FlatCouette {
    pub fn temperature(&self, y: f64) -> f64 {
        let eta = y / self.height;
        self.t_bottom
            + (self.t_top - self.t_bottom) * eta
            + self.model.mu * self.u_top * self.u_top / (2.0 * self.model.kappa())
                * (eta - eta * eta)
    }

    pub fn evaluate(&self, _t: f64, _x: f64, y: f64) -> Cons {
        let u = self.u_top * y / self.height;
        let temp = self.temperature(y);
        let rho = self.p / (self.model.gas_constant * temp);
        self.model.cons(rho, u, 0.0, self.p)
    }
}

/// Case-independent wrapper so drivers can hold any analytic solution.
#[derive(Debug, Clone, Copy)]
pub enum ExactSolution {
    Vortex(EulerVortex),
    Couette(TaylorCouette),
    FlatCouette(FlatCouette),
    FreeStream(Cons),
    /// manufactured affine field, mostly for tests
    Linear {
        base: Cons,
        grad_x: Cons,
        grad_y: Cons,
    },
}

impl ExactSolution {
    pub fn evaluate(&self, t: f64, x: f64, y: f64) -> Cons {
        match self {
            ExactSolution::Vortex(v) => v.evaluate(t, x, y),
            ExactSolution::Couette(c) => c.evaluate(t, x, y),
            ExactSolution::FlatCouette(c) => c.evaluate(t, x, y),
            ExactSolution::FreeStream(q) => *q,
            ExactSolution::Linear {
                base,
                grad_x,
                grad_y,
            } => {
                let mut q = *base;
                for c in 0..4 {
                    q[c] += x * grad_x[c] + y * grad_y[c];
                }
                q
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vortex() -> EulerVortex {
        EulerVortex {
            model: FluidModel::inviscid(1.4, 1.0 / (1.4 * 0.09)),
            u_inf: 1.0,
            rho_inf: 1.0,
            mach: 0.3,
            theta: 0.5f64.atan(),
            eps: 1.0,
            r_c: 1.0,
            x0: 5.0,
            y0: 5.0,
        }
    }

    #[test]
    fn vortex_far_field_is_free_stream() {
        let v = vortex();
        let q = v.evaluate(0.0, 40.0, -35.0);
        let expect = v
            .model
            .cons(1.0, v.theta.cos(), v.theta.sin(), v.p_inf());
        for k in 0..4 {
            assert!((q[k] - expect[k]).abs() < 1e-12, "comp {k}");
        }
    }

    #[test]
    fn vortex_center_velocity_is_mean_flow() {
        let v = vortex();
        // at the core, xr = yr = 0: velocity perturbation vanishes but the
        // density and pressure dips are strongest
        let q = v.evaluate(0.0, 5.0, 5.0);
        let (rho, u, vv, p) = v.model.primitive(&q);
        assert!((u - v.theta.cos()).abs() < 1e-14);
        assert!((vv - v.theta.sin()).abs() < 1e-14);
        assert!(rho < 1.0 && p < v.p_inf());
    }

    #[test]
    fn couette_boundary_values_and_midpoint() {
        let tc = TaylorCouette {
            model: FluidModel::inviscid(1.4, 1.0),
            center: [0.0, 0.0],
            r_i: 1.0,
            r_o: 2.0,
            v_theta_i: 1.0,
            v_theta_o: 0.0,
            rho: 1.0,
            p: 1.0,
        };
        assert!((tc.v_theta(1.0) - 1.0).abs() < 1e-14);
        assert!(tc.v_theta(2.0).abs() < 1e-14);
        // r = 1.5: (2/1.5 - 1.5/2) / (2 - 0.5)
        let expect = (2.0 / 1.5 - 1.5 / 2.0) / (2.0 - 0.5);
        assert!((tc.v_theta(1.5) - expect).abs() < 1e-14);
        assert!((expect - 0.3888888888888889).abs() < 1e-12);
        // velocity is azimuthal
        let q = tc.evaluate(0.0, 0.0, 1.5);
        let (_, u, v, _) = tc.model.primitive(&q);
        assert!((u + expect).abs() < 1e-14 && v.abs() < 1e-14);
    }

    #[test]
    fn flat_couette_profile() {
        let model = FluidModel {
            gamma: 1.4,
            gas_constant: 1.5625 / 1.4,
            mu: 0.01,
            prandtl: 0.72,
        };
        let fc = FlatCouette {
            model,
            u_top: 1.0,
            height: 1.0,
            t_bottom: 1.0,
            t_top: 1.0,
            p: model.gas_constant,
        };
        // walls at prescribed temperature, dissipation bump in between
        assert!((fc.temperature(0.0) - 1.0).abs() < 1e-14);
        assert!((fc.temperature(1.0) - 1.0).abs() < 1e-14);
        assert!(fc.temperature(0.5) > 1.0);
        let q = fc.evaluate(0.0, 0.3, 1.0);
        let (rho, u, _, p) = model.primitive(&q);
        assert!((u - 1.0).abs() < 1e-14);
        assert!((rho - 1.0).abs() < 1e-14);
        assert!((p - model.gas_constant).abs() < 1e-14);
    }
}
