//! Hermite functions, GUE and Ginibre determinantal kernels, Ginibre moduli, hole
//! probabilities and spectral-radius rescaling.

use crate::error::{invalid, Error, Result};
use crate::rng::RngStream;
use crate::special::{ln_factorial, ln_gamma_q_int};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const RAW_HERMITE_CAP: usize = 100;
pub const NORMALIZED_HERMITE_CAP: usize = 500;
pub const GUE_KERNEL_CAP: usize = 500;
/// Below this |x − y| the kernel uses the direct sum instead of Christoffel–Darboux.
pub const CD_SWITCH: f64 = 1e-6;
pub const MAX_CORRELATION_POINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HermiteMode {
    /// Monic probabilists' H_k.
    Raw,
    /// e^{−x²/4} H_k / √(√(2π) k!), orthonormal in L²(dx).
    Normalized,
}

/// Evaluation context for Hermite polynomials up to a fixed degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermiteBasis {
    pub max_degree: usize,
    pub mode: HermiteMode,
}

impl HermiteBasis {
    pub fn new(max_degree: usize, mode: HermiteMode) -> Result<Self> {
        let cap = match mode {
            HermiteMode::Raw => RAW_HERMITE_CAP,
            HermiteMode::Normalized => NORMALIZED_HERMITE_CAP,
        };
        if max_degree > cap {
            return Err(Error::OverflowGuard(format!("degree {max_degree} exceeds cap {cap}")));
        }
        Ok(Self { max_degree, mode })
    }

    /// Values of degrees 0..=max_degree at x.
    pub fn values(&self, x: f64) -> Vec<f64> {
        match self.mode {
            HermiteMode::Raw => raw_sequence(self.max_degree, x),
            HermiteMode::Normalized => normalized_hermite_sequence(self.max_degree, x).0,
        }
    }
}

fn raw_sequence(kmax: usize, x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(kmax + 1);
    v.push(1.0);
    if kmax >= 1 {
        v.push(x);
    }
    for k in 1..kmax {
        let next = x * v[k] - k as f64 * v[k - 1];
        v.push(next);
    }
    v
}

/// Normalized Hermite functions ℋ_0..=ℋ_kmax at x via the three-term recurrence run on a
/// rescaled state. Also returns the largest magnitude held by the recurrence state.
pub fn normalized_hermite_sequence(kmax: usize, x: f64) -> (Vec<f64>, f64) {
    const RESCALE_AT: f64 = 1e50;
    let mut ln_scale = -x * x / 4.0 - 0.25 * (2.0 * PI).ln();
    let mut prev = 0.0f64;
    let mut cur = 1.0f64;
    let mut out = Vec::with_capacity(kmax + 1);
    let mut worst = 1.0f64;
    out.push(ln_scale.exp());
    for k in 0..kmax {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        worst = worst.max(cur.abs());
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
        out.push(cur * ln_scale.exp());
    }
    (out, worst)
}

/// H_k(x) (raw) or ℋ_k(x) (normalized).
pub fn hermite(k: usize, x: f64, mode: HermiteMode) -> Result<f64> {
    let basis = HermiteBasis::new(k, mode)?;
    Ok(basis.values(x)[k])
}

fn check_gue_n(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    if n > GUE_KERNEL_CAP {
        return Err(Error::OverflowGuard(format!("N = {n} exceeds cap {GUE_KERNEL_CAP}")));
    }
    Ok(())
}

/// Σ_{l<N} ℋ_l(x)ℋ_l(y).
pub fn gue_kernel_direct(n: usize, x: f64, y: f64) -> Result<f64> {
    check_gue_n(n)?;
    let hx = normalized_hermite_sequence(n - 1, x).0;
    let hy = normalized_hermite_sequence(n - 1, y).0;
    Ok(hx.iter().zip(&hy).map(|(a, b)| a * b).sum())
}

/// Christoffel–Darboux form √N (ℋ_N(x)ℋ_{N−1}(y) − ℋ_N(y)ℋ_{N−1}(x))/(x − y), x ≠ y.
pub fn gue_kernel_cd(n: usize, x: f64, y: f64) -> Result<f64> {
    check_gue_n(n)?;
    if x == y {
        return Err(Error::SingularPoint("Christoffel–Darboux form needs x ≠ y".into()));
    }
    let hx = normalized_hermite_sequence(n, x).0;
    let hy = normalized_hermite_sequence(n, y).0;
    Ok((n as f64).sqrt() * (hx[n] * hy[n - 1] - hy[n] * hx[n - 1]) / (x - y))
}

/// GUE kernel K_N^H(x, y).
pub fn gue_kernel(n: usize, x: f64, y: f64) -> Result<f64> {
    if (x - y).abs() > CD_SWITCH {
        gue_kernel_cd(n, x, y)
    } else {
        gue_kernel_direct(n, x, y)
    }
}

/// One-point density of GUE eigenvalues, K_N^H(x, x)/N.
pub fn gue_density1(n: usize, x: f64) -> Result<f64> {
    Ok(gue_kernel_direct(n, x, x)? / n as f64)
}

/// One-point density of Ginibre eigenvalues, Q(N, |z|²)/(πN).
pub fn ginibre_density1(n: usize, z: Complex64) -> Result<f64> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    Ok(ln_gamma_q_int(n, z.norm_sqr()).exp() / (PI * n as f64))
}

/// Finite Ginibre kernel √(γ(z)γ(w)) Σ_{l<N} (z w̄)^l / l!, evaluated term-wise in log magnitude.
pub fn ginibre_kernel(n: usize, z: Complex64, w: Complex64) -> Result<Complex64> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let p = z * w.conj();
    let half = 0.5 * (z.norm_sqr() + w.norm_sqr());
    let (r, phi) = p.to_polar();
    let mut s = Complex64::new(0.0, 0.0);
    if r == 0.0 {
        s += (-half).exp();
    } else {
        let lr = r.ln();
        for l in 0..n {
            let lm = l as f64 * lr - ln_factorial(l) - half;
            s += Complex64::from_polar(lm.exp(), l as f64 * phi);
        }
    }
    Ok(s / PI)
}

/// Infinite Ginibre kernel π^{-1} exp(z w̄ − |z|²/2 − |w|²/2).
pub fn ginibre_kernel_infinite(z: Complex64, w: Complex64) -> Complex64 {
    (z * w.conj() - 0.5 * (z.norm_sqr() + w.norm_sqr())).exp() / PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    GueHermite { n: usize },
    GinibreFinite { n: usize },
    GinibreInfinite,
}

impl KernelSpec {
    /// Real-line weight γ_H(x) = e^{−x²/2}.
    pub fn gamma_h(x: f64) -> f64 {
        (-x * x / 2.0).exp()
    }

    /// Planar weight γ(z) = e^{−|z|²}/π.
    pub fn gamma(z: Complex64) -> f64 {
        (-z.norm_sqr()).exp() / PI
    }

    /// K(z, w); the GUE family reads the real parts.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        match *self {
            KernelSpec::GueHermite { n } => Ok(Complex64::new(gue_kernel(n, z.re, w.re)?, 0.0)),
            KernelSpec::GinibreFinite { n } => ginibre_kernel(n, z, w),
            KernelSpec::GinibreInfinite => Ok(ginibre_kernel_infinite(z, w)),
        }
    }
}

/// Complex determinant by partial-pivot elimination.
fn complex_det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let k = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..k {
            let f = a[r][col] / p;
            if f != Complex64::new(0.0, 0.0) {
                for c in col..k {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    det
}

/// det[K(z_i, z_j)] for up to 12 points.
pub fn correlation_det(spec: &KernelSpec, points: &[Complex64]) -> Result<f64> {
    let k = points.len();
    if k > MAX_CORRELATION_POINTS {
        return Err(Error::UnsupportedSize { size: k, max: MAX_CORRELATION_POINTS });
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut m = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in i..k {
            let v = spec.eval(points[i], points[j])?;
            m[i][j] = v;
            m[j][i] = v.conj();
        }
        m[i][i] = Complex64::new(m[i][i].re, 0.0);
    }
    Ok(complex_det(m).re)
}

/// Gap |e_N(Nz) − e^{Nz}𝟙_{|z|≤1}| and its bound r_N(z), in log form and normalized by e^{−N|z|}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExpGap {
    pub ln_gap: f64,
    pub ln_bound: f64,
    pub scaled_gap: f64,
    pub scaled_bound: f64,
}

impl TruncatedExpGap {
    pub fn gap(&self) -> f64 {
        self.ln_gap.exp()
    }
    pub fn bound(&self) -> f64 {
        self.ln_bound.exp()
    }
}

/// Width of the excluded band around |z| = 1.
pub const EDGE_BAND: f64 = 1e-6;

pub fn truncated_exp_gap(n: usize, z: Complex64) -> Result<TruncatedExpGap> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let r = z.norm();
    if (r - 1.0).abs() <= EDGE_BAND {
        return Err(Error::EdgeDegenerate { modulus: r });
    }
    let nf = n as f64;
    let nz = z * nf;
    let ln_gap = if r == 0.0 {
        // e_N(0) = 1 = e^0
        f64::NEG_INFINITY
    } else if r < 1.0 {
        // tail Σ_{k≥N} (Nz)^k/k! = T_N Σ_m Π_{j≤m} Nz/(N+j)
        let ln_t = nf * (nf * r).ln() - ln_factorial(n);
        let mut s = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut j = 0usize;
        loop {
            j += 1;
            term *= nz / (nf + j as f64);
            s += term;
            if term.norm() < 1e-17 * s.norm() || j > 10_000_000 {
                break;
            }
        }
        ln_t + s.norm().ln()
    } else {
        // head Σ_{k<N} (Nz)^k/k! = T_{N−1} Σ_m Π_{j<m} (N−1−j)/(Nz)
        let ln_t = (nf - 1.0) * (nf * r).ln() - ln_factorial(n - 1);
        let mut s = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for j in 0..n - 1 {
            term *= (nf - 1.0 - j as f64) / nz;
            s += term;
            if term.norm() < 1e-17 * s.norm() {
                break;
            }
        }
        ln_t + s.norm().ln()
    };
    let factor = if r <= 1.0 { (nf + 1.0) / (nf * (1.0 - r) + 1.0) } else { nf / (nf * (r - 1.0) + 1.0) };
    let ln_bound = nf - 0.5 * (2.0 * PI * nf).ln() + nf * r.ln() + factor.ln();
    let shift = -nf * r;
    Ok(TruncatedExpGap { ln_gap, ln_bound, scaled_gap: (ln_gap + shift).exp(), scaled_bound: (ln_bound + shift).exp() })
}

/// Moduli of the Ginibre eigenvalues in law: √Gamma(k, 1) for k = 1..N, uniformly permuted.
pub fn sample_ginibre_moduli(n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let g = Gamma::new(k as f64, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
        out.push(g.sample(rng).sqrt());
    }
    out.shuffle(rng);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleProbability {
    pub log_prob: f64,
    pub tail_bound: f64,
    pub truncation: usize,
}

pub fn default_hole_truncation(r: f64) -> usize {
    (4.0 * r * r).ceil() as usize + 50
}

/// log P(no infinite-Ginibre point in the disk of radius r) = Σ_k log Q(k, r²), with a
/// Chernoff bound on the dropped terms k > K.
pub fn hole_probability(r: f64, truncation: Option<usize>) -> Result<HoleProbability> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid("radius must be positive");
    }
    let r2 = r * r;
    let k = truncation.unwrap_or_else(|| default_hole_truncation(r));
    let min = (2.0 * r2).ceil() as usize;
    if (k as f64) < 2.0 * r2 {
        return Err(Error::TruncationTooSmall { k, min });
    }
    let log_prob: f64 = (1..=k).map(|j| ln_gamma_q_int(j, r2)).sum();
    // P(Gamma(j) ≤ r²) ≤ exp(−j I(r²/j)), I(a) = a − 1 − ln a, and I(r²/j) ≥ c for j > K
    let a = r2 / (k + 1) as f64;
    let c = a - 1.0 - a.ln();
    let first = (-c * (k + 1) as f64).exp();
    let sum_p = first / (1.0 - (-c).exp());
    // |log(1 − p)| ≤ p/(1 − p) with p ≤ first
    let tail_bound = sum_p / (1.0 - first);
    Ok(HoleProbability { log_prob, tail_bound, truncation: k })
}

/// Affine normalization of the Ginibre spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelRescale {
    pub n: usize,
    pub kappa: f64,
    pub center: f64,
    pub scale: f64,
}

pub const GUMBEL_MIN_N: usize = 15;

impl GumbelRescale {
    pub fn new(n: usize) -> Result<Self> {
        if n < GUMBEL_MIN_N {
            return Err(Error::KappaUndefined { n, reason: format!("N must be at least {GUMBEL_MIN_N}") });
        }
        let nf = n as f64;
        let kappa = (nf / (2.0 * PI)).ln() - 2.0 * nf.ln().ln();
        if !(kappa > 0.0) {
            return Err(Error::KappaUndefined { n, reason: format!("kappa_N = {kappa} is not positive") });
        }
        Ok(Self { n, kappa, center: 1.0 + (kappa / (4.0 * nf)).sqrt(), scale: (4.0 * nf * kappa).sqrt() })
    }

    pub fn apply(&self, rho: f64) -> f64 {
        self.scale * (rho - self.center)
    }
}

/// √(4Nκ_N)(ρ − 1 − √(κ_N/4N)).
pub fn gumbel_rescale(rho: f64, n: usize) -> Result<f64> {
    Ok(GumbelRescale::new(n)?.apply(rho))
}

/// Standard Gumbel CDF exp(−e^{−x}).
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_real_line, QuadOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermite_small_values() {
        assert!((hermite(2, 2.0, HermiteMode::Raw).unwrap() - 3.0).abs() < 1e-15);
        assert!((hermite(3, 1.0, HermiteMode::Raw).unwrap() + 2.0).abs() < 1e-15);
        assert!(matches!(hermite(101, 1.0, HermiteMode::Raw), Err(Error::OverflowGuard(_))));
        assert!(matches!(hermite(501, 1.0, HermiteMode::Normalized), Err(Error::OverflowGuard(_))));
    }

    #[test]
    fn raw_norm_identity() {
        let r = integrate_real_line(|x| hermite(2, x, HermiteMode::Raw).unwrap().powi(2) * (-x * x / 2.0).exp(), QuadOptions::default());
        assert!((r.value - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn normalized_matches_raw_definition() {
        for k in 0..30 {
            for &x in &[-3.0, -0.4, 0.0, 1.7, 5.0] {
                let raw = hermite(k, x, HermiteMode::Raw).unwrap();
                let expect = (-x * x / 4.0).exp() * raw / ((2.0 * PI).sqrt() * (ln_factorial(k)).exp()).sqrt();
                let got = hermite(k, x, HermiteMode::Normalized).unwrap();
                assert!((got - expect).abs() < 1e-12 * (1.0 + expect.abs()), "k={k} x={x}");
            }
        }
    }

    #[test]
    fn normalized_recurrence_is_overflow_free() {
        for &x in &[-50.0, -20.0, 0.0, 7.0, 33.3, 50.0] {
            let (v, worst) = normalized_hermite_sequence(500, x);
            assert!(worst <= 1e100);
            assert!(v.iter().all(|h| h.is_finite() && h.abs() <= 1.0));
        }
    }

    #[test]
    fn gue_kernel_n1_and_symmetry() {
        for &(x, y) in &[(0.3, -1.2), (2.0, 2.5)] {
            let k = gue_kernel(1, x, y).unwrap();
            let expect = (KernelSpec::gamma_h(x) * KernelSpec::gamma_h(y)).sqrt() / (2.0 * PI).sqrt();
            assert!((k - expect).abs() < 1e-15);
        }
        assert!((gue_kernel(7, 0.4, -1.1).unwrap() - gue_kernel(7, -1.1, 0.4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn density_values() {
        assert!((gue_density1(1, 0.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        for n in [1, 3, 8] {
            assert!((ginibre_density1(n, c(0.0, 0.0)).unwrap() - 1.0 / (PI * n as f64)).abs() < 1e-15);
        }
        let r = integrate_real_line(|x| gue_density1(10, x).unwrap(), QuadOptions::tol(1e-12));
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ginibre_density_matches_naive() {
        for n in 1..=20 {
            for &r2 in &[0.0f64, 0.3, 1.0, 4.0, 12.0, 30.0, 50.0] {
                let z = Complex64::from_polar(r2.sqrt(), 0.7);
                let mut s = 0.0;
                let mut t = 1.0;
                for l in 0..n {
                    if l > 0 {
                        t *= r2 / l as f64;
                    }
                    s += t;
                }
                let naive = KernelSpec::gamma(z) * s / n as f64;
                let got = ginibre_density1(n, z).unwrap();
                assert!((got - naive).abs() <= 1e-12 * naive, "n={n} r2={r2}");
            }
        }
    }

    #[test]
    fn ginibre_density_normalized() {
        let r = integrate(|rho: f64| 2.0 * PI * rho * ginibre_density1(8, c(rho, 0.0)).unwrap(), 0.0, 12.0, QuadOptions::tol(1e-12));
        assert!((r.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn ginibre_kernel_diagonal_and_hermitian() {
        let z = c(0.4, -0.9);
        let w = c(-1.3, 0.2);
        let kzz = ginibre_kernel(6, z, z).unwrap();
        assert!((kzz.re - 6.0 * ginibre_density1(6, z).unwrap()).abs() < 1e-14);
        let a = ginibre_kernel(6, z, w).unwrap();
        let b = ginibre_kernel(6, w, z).unwrap();
        assert!((a - b.conj()).norm() < 1e-15);
        // large N approaches the infinite kernel
        let big = ginibre_kernel(200, z, w).unwrap();
        assert!((big - ginibre_kernel_infinite(z, w)).norm() < 1e-14);
    }

    #[test]
    fn correlation_det_cases() {
        let spec = KernelSpec::GueHermite { n: 5 };
        let x = c(0.3, 0.0);
        let k1 = correlation_det(&spec, &[x]).unwrap();
        assert!((k1 - gue_kernel(5, 0.3, 0.3).unwrap()).abs() < 1e-15);
        assert!(correlation_det(&spec, &[x, x]).unwrap().abs() < 1e-10);
        let g = KernelSpec::GinibreFinite { n: 4 };
        assert!(correlation_det(&g, &[c(0.1, 0.2), c(0.1, 0.2)]).unwrap().abs() < 1e-10);
        let pts: Vec<Complex64> = (0..13).map(|i| c(i as f64 * 0.1, 0.0)).collect();
        assert!(matches!(correlation_det(&spec, &pts), Err(Error::UnsupportedSize { .. })));
    }

    #[test]
    fn truncated_gap_examples() {
        for z in [c(0.5, 0.0), c(2.0, 0.0), c(0.0, 0.6), c(-1.5, 0.5)] {
            let g = truncated_exp_gap(50, z).unwrap();
            assert!(g.ln_gap <= g.ln_bound, "{z} {g:?}");
        }
        assert!(matches!(truncated_exp_gap(50, c(1.0, 0.0)), Err(Error::EdgeDegenerate { .. })));
        let mut prev = f64::INFINITY;
        for n in [25, 50, 100, 200, 400] {
            let g = truncated_exp_gap(n, c(0.5, 0.0)).unwrap();
            assert!(g.scaled_gap < prev && g.scaled_gap <= g.scaled_bound);
            prev = g.scaled_gap;
        }
    }

    #[test]
    fn truncated_gap_matches_direct_sum() {
        // small N, direct evaluation safe
        let n = 10usize;
        for z in [c(0.5, 0.1), c(1.8, -0.3)] {
            let mut e = c(0.0, 0.0);
            let mut t = c(1.0, 0.0);
            for k in 0..n {
                if k > 0 {
                    t *= z * n as f64 / k as f64;
                }
                e += t;
            }
            let ind = if z.norm() <= 1.0 { (z * n as f64).exp() } else { c(0.0, 0.0) };
            let direct = (e - ind).norm();
            let g = truncated_exp_gap(n, z).unwrap();
            assert!((g.gap() - direct).abs() < 1e-10 * direct.max(1.0), "{z} {} {direct}", g.gap());
        }
    }

    #[test]
    fn hole_probability_examples() {
        let small = hole_probability(0.01, None).unwrap();
        assert!(small.log_prob >= -1e-3 && small.log_prob < 0.0);
        assert!(small.tail_bound < 1e-10);
        let one = hole_probability(1.0, Some(2)).unwrap();
        assert!((ln_gamma_q_int(1, 1.0) + 1.0).abs() < 1e-15);
        assert!(one.log_prob < -1.0);
        assert!(matches!(hole_probability(3.0, Some(10)), Err(Error::TruncationTooSmall { .. })));
        // 30-digit reference values of Σ_k log Q(k, r²)
        let oracle = [(3.0, -34.56960594606603), (4.0, -92.15759342963175), (5.0, -203.88699724082383), (10.0, -2742.6258754826404)];
        let mut prev = f64::INFINITY;
        for (r, expect) in oracle {
            let h = hole_probability(r, None).unwrap();
            assert!((h.log_prob - expect).abs() < 1e-9 * expect.abs(), "r={r}");
            assert!(h.tail_bound < 1e-10);
            let s = -h.log_prob / f64::powi(r, 4);
            assert!(s > 0.25 && s < prev);
            prev = s;
        }
    }

    #[test]
    fn gumbel_constants() {
        let g = GumbelRescale::new(1000).unwrap();
        assert!((g.kappa - 1.2043).abs() < 1e-3);
        assert!(gumbel_rescale(g.center, 1000).unwrap().abs() < 1e-14);
        assert!(matches!(GumbelRescale::new(14), Err(Error::KappaUndefined { .. })));
        // κ_N ≤ 0 below N = 164
        assert!(matches!(GumbelRescale::new(100), Err(Error::KappaUndefined { .. })));
        assert!(GumbelRescale::new(164).is_ok());
    }

    #[test]
    fn moduli_exponential_mean() {
        let mut rng = RngStream::new(10, 0);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_ginibre_moduli(1, &mut rng).unwrap()[0].powi(2)).sum::<f64>() / n as f64;
        assert!((0.99..=1.01).contains(&mean), "{mean}");
    }
}
