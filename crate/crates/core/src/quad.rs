//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite and infinite intervals.

use num_complex::Complex64;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 20_000 }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64) -> Self {
        Self { abs_tol, rel_tol: abs_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
}

fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s.scale(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + s.scale(WG[j / 2]);
        }
    }
    let k = kron.scale(h);
    let g = gauss.scale(h);
    (k, (k - g).magnitude())
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integrate `f` over [a, b], starting from `initial` equal pieces.
pub fn integrate_with<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    initial: usize,
    opts: QuadOptions,
) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: 0.0, converged: true };
    }
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(n0 * 4);
    let mut total = T::zero();
    let mut total_err = 0.0;
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let (v, e) = gk15(&f, lo, hi);
        total = total + v;
        total_err += e;
        heap.push(Piece { a: lo, b: hi, value: v, err: e });
    }
    let mut count = n0;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err <= target {
            return QuadResult { value: total, error: total_err, converged: true };
        }
        if count >= opts.max_intervals {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // interval exhausted floating-point resolution
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        total = total - p.value + v1 + v2;
        total_err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: p.b, value: v2, err: e2 });
        count += 1;
    }
    // re-sum to shed accumulated update roundoff
    let mut value = T::zero();
    let mut err = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        err += p.err;
    }
    let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
    QuadResult { value, error: err, converged: err <= target }
}

pub fn integrate<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult<T> {
    integrate_with(f, a, b, 1, opts)
}

/// ∫_ℝ f via x = t/(1−t²).
pub fn integrate_real_line<T: QuadValue, F: Fn(f64) -> T>(f: F, opts: QuadOptions) -> QuadResult<T> {
    let g = |t: f64| {
        let d = 1.0 - t * t;
        let x = t / d;
        let jac = (1.0 + t * t) / (d * d);
        let v = f(x);
        if jac.is_finite() && x.is_finite() {
            v.scale(jac)
        } else {
            T::zero()
        }
    };
    integrate_with(g, -1.0, 1.0, 8, opts)
}

/// ∫_a^∞ f via x = a + t/(1−t).
pub fn integrate_to_infinity<T: QuadValue, F: Fn(f64) -> T>(f: F, a: f64, opts: QuadOptions) -> QuadResult<T> {
    let g = |t: f64| {
        let d = 1.0 - t;
        let x = a + t / d;
        let jac = 1.0 / (d * d);
        if jac.is_finite() && x.is_finite() {
            f(x).scale(jac)
        } else {
            T::zero()
        }
    };
    integrate_with(g, 0.0, 1.0, 4, opts)
}

/// Nested 2-D integral over ℝ².
pub fn integrate_plane_real<F: Fn(f64, f64) -> f64>(f: F, opts: QuadOptions) -> QuadResult<f64> {
    let inner_opts = QuadOptions { abs_tol: opts.abs_tol * 0.1, rel_tol: opts.rel_tol * 0.1, ..opts };
    let mut all_ok = true;
    let cell = std::cell::Cell::new(true);
    let r = integrate_real_line(
        |x| {
            let r = integrate_real_line(|y| f(x, y), inner_opts);
            if !r.converged {
                cell.set(false);
            }
            r.value
        },
        opts,
    );
    all_ok &= cell.get();
    QuadResult { converged: r.converged && all_ok, ..r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_on_real_line() {
        let r = integrate_real_line(|x: f64| (-x * x / 2.0).exp(), QuadOptions::default());
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-11);
        assert!(r.converged);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, QuadOptions::tol(1e-12));
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 1.0, QuadOptions::default());
        assert!((r.value - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, PI, QuadOptions::default());
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn plane_gaussian() {
        let r = integrate_plane_real(|x, y| (-(x * x + y * y)).exp(), QuadOptions::tol(1e-10));
        assert!((r.value - PI).abs() < 1e-8);
    }
}
