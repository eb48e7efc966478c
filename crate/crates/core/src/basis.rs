//! One-dimensional Legendre point sets, Lagrange interpolation bases,
//! derivative/interpolation operators, quadrature rules and the derivative of
//! the DG-recovering correction function. All operators live on the unit
//! interval [0, 1]; every other module builds its tensor-product machinery
//! from these.

use crate::error::SolverError;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Evaluate the Legendre polynomial `P_n` and its derivative at `r` in [-1, 1].
pub fn legendre(n: usize, r: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = r;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * r * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // (1 - r^2) P_n'(r) = n (P_{n-1}(r) - r P_n(r))
    let dp = if (r * r - 1.0).abs() < 1e-14 {
        // endpoint limit: P_n'(+-1) = (+-1)^(n-1) n(n+1)/2
        let sign = if r > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    } else {
        (n as f64) * (r * p - p_prev) / (r * r - 1.0)
    };
    (p, dp)
}

/// Roots of the degree-`n` Legendre polynomial mapped from [-1, 1] to [0, 1],
/// in increasing order. Newton iteration from Chebyshev initial guesses,
/// converged to machine precision.
pub fn legendre_points(n: usize) -> Result<Vec<f64>, SolverError> {
    if n == 0 {
        return Err(SolverError::InvalidOrder(0));
    }
    let mut roots = vec![0.0; n];
    for i in 0..n {
        // descending guesses; store ascending
        let mut r = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, r);
            let dr = p / dp;
            r -= dr;
            if dr.abs() < 1e-15 {
                break;
            }
        }
        roots[n - 1 - i] = 0.5 * (r + 1.0);
    }
    // enforce exact symmetry about 0.5
    for i in 0..n / 2 {
        let s = 0.5 * (roots[i] + (1.0 - roots[n - 1 - i]));
        roots[i] = s;
        roots[n - 1 - i] = 1.0 - s;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.5;
    }
    Ok(roots)
}

/// A complete set of 1D operators for an `N`-point (degree `P = N-1`) scheme.
#[derive(Debug, Clone)]
pub struct BasisSet {
    /// Number of points per direction (N = P + 1).
    pub n: usize,
    /// Legendre points on [0, 1], strictly increasing.
    pub points: Vec<f64>,
    /// Gauss weights on [0, 1]; they sum to one.
    pub weights: Vec<f64>,
    /// Derivative matrix, `deriv[j][i] = h_i'(X_j)` stored row-major (j*n + i).
    pub deriv: Vec<f64>,
    /// Interpolation row to the left endpoint: `h_i(0)`.
    pub at_left: Vec<f64>,
    /// Interpolation row to the right endpoint: `h_i(1)`.
    pub at_right: Vec<f64>,
    /// Derivative of the left DG correction function at the points: `g_L'(X_j)`.
    pub gl_prime: Vec<f64>,
    /// Derivative of the right DG correction function at the points: `g_R'(X_j)`.
    pub gr_prime: Vec<f64>,
}

impl BasisSet {
    pub fn new(n: usize) -> Result<Self, SolverError> {
        let points = legendre_points(n)?;
        let mut weights = vec![0.0; n];
        for (i, &x) in points.iter().enumerate() {
            let r = 2.0 * x - 1.0;
            let (_, dp) = legendre(n, r);
            // [-1,1] weight / 2 maps the rule to the unit interval
            weights[i] = 1.0 / ((1.0 - r * r) * dp * dp);
        }

        let mut bary = vec![1.0; n];
        for i in 0..n {
            for s in 0..n {
                if s != i {
                    bary[i] /= points[i] - points[s];
                }
            }
        }

        let mut deriv = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = 0.0;
            for i in 0..n {
                if i != j {
                    let d = (bary[i] / bary[j]) / (points[j] - points[i]);
                    deriv[j * n + i] = d;
                    diag -= d;
                }
            }
            deriv[j * n + j] = diag;
        }

        let at_left = lagrange_row(&points, 0.0);
        let at_right = lagrange_row(&points, 1.0);

        // g_L is the right Radau polynomial mapped to [0,1]:
        //   g_L(xi) = (-1)^N (P_N(r) - P_{N-1}(r)) / 2,  r = 2 xi - 1,
        // so g_L(0) = 1, g_L(1) = 0 and g_L is orthogonal to P_{N-2}.
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut gl_prime = vec![0.0; n];
        let mut gr_prime = vec![0.0; n];
        for j in 0..n {
            let r = 2.0 * points[j] - 1.0;
            let (_, dpn) = legendre(n, r);
            let (_, dpn1) = legendre(n - 1, r);
            gl_prime[j] = sign * (dpn - dpn1);
            // g_R(xi) = g_L(1 - xi)
            let rm = 2.0 * (1.0 - points[j]) - 1.0;
            let (_, dqn) = legendre(n, rm);
            let (_, dqn1) = legendre(n - 1, rm);
            gr_prime[j] = -sign * (dqn - dqn1);
        }

        Ok(BasisSet {
            n,
            points,
            weights,
            deriv,
            at_left,
            at_right,
            gl_prime,
            gr_prime,
        })
    }

    /// Cached, shared basis for order `n`.
    pub fn cached(n: usize) -> Result<Arc<BasisSet>, SolverError> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<BasisSet>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap();
        if let Some(b) = map.get(&n) {
            return Ok(b.clone());
        }
        let b = Arc::new(BasisSet::new(n)?);
        map.insert(n, b.clone());
        Ok(b)
    }

    /// `h_i(xi) = prod_{s != i} (xi - X_s) / (X_i - X_s)`. Evaluation anywhere
    /// on the real line is legal; extrapolation is needed for boundary rows.
    pub fn lagrange_eval(&self, i: usize, xi: f64) -> f64 {
        debug_assert!(i < self.n);
        let mut v = 1.0;
        for s in 0..self.n {
            if s != i {
                v *= (xi - self.points[s]) / (self.points[i] - self.points[s]);
            }
        }
        v
    }

    /// Row of all `h_i(xi)`.
    pub fn lagrange_row(&self, xi: f64) -> Vec<f64> {
        lagrange_row(&self.points, xi)
    }

    /// Interpolate nodal samples to `xi`.
    pub fn interpolate(&self, samples: &[f64], xi: f64) -> f64 {
        debug_assert_eq!(samples.len(), self.n);
        let mut v = 0.0;
        for i in 0..self.n {
            v += samples[i] * self.lagrange_eval(i, xi);
        }
        v
    }

    /// `sum_i w_i f(X_i)`; exact for polynomials of degree <= 2N-1.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(
            samples.len(),
            self.n,
            "quadrature sample count must equal the basis order"
        );
        self.weights
            .iter()
            .zip(samples)
            .map(|(w, f)| w * f)
            .sum()
    }

    /// Derivative of the interpolant at node `j` from nodal samples.
    pub fn differentiate_at(&self, samples: &[f64], j: usize) -> f64 {
        let row = &self.deriv[j * self.n..(j + 1) * self.n];
        row.iter().zip(samples).map(|(d, f)| d * f).sum()
    }

    /// Correction-function derivative vector for one side.
    pub fn correction_derivative(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.gl_prime,
            Side::Right => &self.gr_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn lagrange_row(points: &[f64], xi: f64) -> Vec<f64> {
    let n = points.len();
    let mut row = vec![1.0; n];
    for i in 0..n {
        for s in 0..n {
            if s != i {
                row[i] *= (xi - points[s]) / (points[i] - points[s]);
            }
        }
    }
    row
}
