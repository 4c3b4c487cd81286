//! Special functions in log space: log-gamma, incomplete gamma for integer order, log-sum-exp.

pub use statrs::function::gamma::ln_gamma;

/// ln k!
pub fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// ln Σ exp(v_i); −∞ for an empty or all −∞ input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn ln_poisson_term(j: usize, ln_x: f64, x: f64) -> f64 {
    if j == 0 {
        -x
    } else {
        j as f64 * ln_x - ln_factorial(j) - x
    }
}

/// ln P[Poisson(x) ≥ k] = ln P(k, x), the regularized lower incomplete gamma.
pub fn ln_gamma_p_int(k: usize, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if (x as usize) >= k {
        // the head is not small; use the complement
        let q = ln_gamma_q_int(k, x).exp();
        return (-q).ln_1p();
    }
    let ln_x = x.ln();
    // terms decrease for j ≥ k > x; sum until negligible
    let first = ln_poisson_term(k, ln_x, x);
    let mut sum = 1.0;
    let mut ratio = 1.0;
    let mut j = k;
    loop {
        j += 1;
        ratio *= x / j as f64;
        sum += ratio;
        if ratio < 1e-17 * sum {
            break;
        }
    }
    first + sum.ln()
}

/// ln Q(k, x) = ln P[Poisson(x) ≤ k−1] for integer k ≥ 1, x ≥ 0. Overflow-free for any x.
pub fn ln_gamma_q_int(k: usize, x: f64) -> f64 {
    assert!(k >= 1, "order must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if (x as usize) + 1 < k {
        // head close to 1: ln(1 − P) with P from its fast tail series
        let lp = ln_gamma_p_int(k, x);
        return if lp < -0.7 { (-lp.exp()).ln_1p() } else { ln_gamma_q_head(k, x) };
    }
    ln_gamma_q_head(k, x)
}

fn ln_gamma_q_head(k: usize, x: f64) -> f64 {
    let ln_x = x.ln();
    // largest term of Σ_{j<k} x^j/j! sits at j = min(k−1, floor x)
    let jstar = ((x.floor() as usize).min(k - 1)).max(0);
    let peak = ln_poisson_term(jstar, ln_x, x);
    let mut sum = 1.0;
    let mut r = 1.0;
    for j in (0..jstar).rev() {
        r *= (j + 1) as f64 / x;
        sum += r;
        if r < 1e-18 * sum {
            break;
        }
    }
    r = 1.0;
    for j in jstar + 1..k {
        r *= x / j as f64;
        sum += r;
        if r < 1e-18 * sum {
            break;
        }
    }
    peak + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_q(k: usize, x: f64) -> f64 {
        let mut s = 0.0;
        let mut t = 1.0;
        for j in 0..k {
            if j > 0 {
                t *= x / j as f64;
            }
            s += t;
        }
        (-x).exp() * s
    }

    #[test]
    fn q_matches_naive() {
        for k in 1..25 {
            for &x in &[0.01, 0.5, 1.0, 3.0, 7.5, 20.0, 40.0] {
                let a = ln_gamma_q_int(k, x).exp();
                let b = naive_q(k, x);
                assert!((a - b).abs() <= 1e-13 * b.max(1e-300), "k={k} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn q_one_is_exponential() {
        assert!((ln_gamma_q_int(1, 1.0) + 1.0).abs() < 1e-15);
        assert!((ln_gamma_q_int(1, 3.5) + 3.5).abs() < 1e-15);
    }

    #[test]
    fn p_plus_q_is_one() {
        for &(k, x) in &[(5usize, 2.0), (50, 49.5), (200, 180.0), (3, 10.0)] {
            let p = ln_gamma_p_int(k, x).exp();
            let q = ln_gamma_q_int(k, x).exp();
            assert!((p + q - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn huge_argument_no_overflow() {
        let v = ln_gamma_q_int(10, 1e6);
        assert!(v.is_finite() && v < -9e5);
        let w = ln_gamma_q_int(2_000_000, 1e6);
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_basic() {
        let v = log_sum_exp(&[0.0, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn factorials() {
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
        assert_eq!(ln_factorial(0), 0.0);
    }
}
