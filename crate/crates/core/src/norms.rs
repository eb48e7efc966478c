//! Error norms over solution-point values.

/// Root-mean-square error over all degrees of freedom:
/// `sqrt( sum (phi_i - phi_i_exact)^2 / N_DOF )`.
pub fn l2_error(numeric: &[f64], exact: &[f64]) -> f64 {
    assert_eq!(numeric.len(), exact.len());
    let n = numeric.len();
    let sum: f64 = numeric
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (sum / n as f64).sqrt()
}

/// Least-squares slope of log(err) against log(x); used for measured orders.
pub fn log_log_slope(x: &[f64], err: &[f64]) -> f64 {
    assert_eq!(x.len(), err.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

/// Coefficient of determination of the same fit.
pub fn log_log_r2(x: &[f64], err: &[f64]) -> f64 {
    let slope = log_log_slope(x, err);
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        let fit = slope * a + intercept;
        ss_res += (b - fit) * (b - fit);
        ss_tot += (b - my) * (b - my);
    }
    1.0 - ss_res / ss_tot
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_for_identical_fields() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(l2_error(&a, &a), 0.0);
    }

    #[test]
    fn uniform_offset_returns_offset() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b: Vec<f64> = a.iter().map(|v| v + 0.125).collect();
        assert!((l2_error(&a, &b) - 0.125).abs() < 1e-15);
    }

    /// Two-element hand case: rms of {0.3, -0.4}.
    #[test]
    fn hand_computed_rms() {
        let num = [1.3, 1.6];
        let exact = [1.0, 2.0];
        let expect = ((0.3f64 * 0.3 + 0.4 * 0.4) / 2.0).sqrt();
        assert!((l2_error(&num, &exact) - expect).abs() < 1e-15);
        assert!((expect - 0.35355339059327373).abs() < 1e-15);
    }

    #[test]
    fn slope_recovers_power_law() {
        let x = [1.0, 0.5, 0.25, 0.125];
        let err: Vec<f64> = x.iter().map(|v| 3.0 * v.powi(3)).collect();
        assert!((log_log_slope(&x, &err) - 3.0).abs() < 1e-12);
        assert!(log_log_r2(&x, &err) > 0.999999);
    }
}
