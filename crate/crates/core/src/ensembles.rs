//! Gaussian matrix ensembles, spectra and Hadamard perturbation formulas.

use crate::error::{invalid, Error, Result};
use crate::rng::NormalSource;
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Hermitian matrix stored row-major; symmetry holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Build from the upper triangle `f(i, j)` for i ≤ j; the diagonal keeps only its real part.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if n == 0 {
            return invalid("matrix side must be positive");
        }
        let mut data = vec![C0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if i == j {
                    data[i * n + i] = Complex64::new(v.re, 0.0);
                } else {
                    data[i * n + j] = v;
                    data[j * n + i] = v.conj();
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_real_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_upper(n, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_real_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_real_upper(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Linear combination a·self + b·other.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if other.n != self.n {
            return invalid("dimension mismatch");
        }
        Self::from_upper(self.n, |i, j| self.get(i, j) * a + other.get(i, j) * b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// U*·self·U for a square U.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows != self.n || u.cols != self.n {
            return invalid("dimension mismatch");
        }
        let h = self.as_complex();
        let p = u.adjoint().matmul(&h.matmul(u)?)?;
        Self::from_upper(self.n, |i, j| {
            if i == j {
                p.get(i, i)
            } else {
                // average the two triangles to absorb roundoff asymmetry
                (p.get(i, j) + p.get(j, i).conj()) * 0.5
            }
        })
    }

    pub fn as_complex(&self) -> ComplexMatrix {
        ComplexMatrix { rows: self.n, cols: self.n, data: self.data.clone() }
    }

    fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            invalid("non-finite matrix entry")
        }
    }
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("matrix dimensions must be positive");
        }
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return invalid("dimension mismatch");
        }
        let mut data = vec![C0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C0 {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let out = &mut data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, data })
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigenvalues of one matrix draw together with the normalization applied to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Spectrum {
    /// Ascending real eigenvalues.
    Real { values: Vec<f64>, scale: f64 },
    Complex { values: Vec<Complex64>, scale: f64 },
}

impl Spectrum {
    pub fn len(&self) -> usize {
        match self {
            Spectrum::Real { values, .. } => values.len(),
            Spectrum::Complex { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scale(&self) -> f64 {
        match self {
            Spectrum::Real { scale, .. } | Spectrum::Complex { scale, .. } => *scale,
        }
    }

    pub fn real(&self) -> Option<&[f64]> {
        match self {
            Spectrum::Real { values, .. } => Some(values),
            Spectrum::Complex { .. } => None,
        }
    }

    pub fn complex(&self) -> Option<&[Complex64]> {
        match self {
            Spectrum::Complex { values, .. } => Some(values),
            Spectrum::Real { .. } => None,
        }
    }

    /// Multiply every eigenvalue by `s`; the recorded scale is multiplied too.
    pub fn rescaled(&self, s: f64) -> Self {
        match self {
            Spectrum::Real { values, scale } => {
                let mut v: Vec<f64> = values.iter().map(|x| x * s).collect();
                if s < 0.0 {
                    v.reverse();
                }
                Spectrum::Real { values: v, scale: scale * s }
            }
            Spectrum::Complex { values, scale } => {
                Spectrum::Complex { values: values.iter().map(|z| z * s).collect(), scale: scale * s }
            }
        }
    }
}

fn check_side(n: usize) -> Result<()> {
    if n == 0 {
        invalid("n must be at least 1")
    } else {
        Ok(())
    }
}

/// GUE: diagonal N(0,1), off-diagonal real and imaginary parts N(0,1/2).
/// Draw order: row-major over the upper triangle, (re, im) per off-diagonal entry.
pub fn sample_gue<R: NormalSource>(n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    check_side(n)?;
    HermitianMatrix::from_upper(n, |i, j| {
        if i == j {
            Complex64::new(rng.normal(1.0), 0.0)
        } else {
            let re = rng.normal(FRAC_1_SQRT_2);
            let im = rng.normal(FRAC_1_SQRT_2);
            Complex64::new(re, im)
        }
    })
}

/// GOE: diagonal N(0,1), off-diagonal N(0,1/2), real symmetric.
pub fn sample_goe<R: NormalSource>(n: usize, rng: &mut R) -> Result<HermitianMatrix> {
    check_side(n)?;
    HermitianMatrix::from_real_upper(n, |i, j| if i == j { rng.normal(1.0) } else { rng.normal(FRAC_1_SQRT_2) })
}

fn standard_complex<R: NormalSource>(rng: &mut R) -> Complex64 {
    let re = rng.normal(FRAC_1_SQRT_2);
    let im = rng.normal(FRAC_1_SQRT_2);
    Complex64::new(re, im)
}

/// Ginibre: i.i.d. entries with real and imaginary parts N(0,1/2).
pub fn sample_ginibre<R: NormalSource>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_side(n)?;
    ComplexMatrix::from_fn(n, n, |_, _| standard_complex(rng))
}

/// Complex Wishart (1/m)·A·A* with A an n×m standard complex Gaussian matrix.
pub fn sample_wishart<R: NormalSource>(n: usize, m: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if n == 0 || m == 0 {
        return invalid("Wishart dimensions must be positive");
    }
    let a = ComplexMatrix::from_fn(n, m, |_, _| standard_complex(rng))?;
    let inv_m = 1.0 / m as f64;
    HermitianMatrix::from_upper(n, |i, j| {
        let ri = &a.data[i * m..(i + 1) * m];
        let rj = &a.data[j * m..(j + 1) * m];
        let s: Complex64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum();
        s * inv_m
    })
}

const HAAR_RETRIES: usize = 8;

/// Haar unitary via Gram–Schmidt (positive real normalizers) on a Ginibre draw.
pub fn sample_haar_unitary<R: NormalSource>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    check_side(n)?;
    for _ in 0..=HAAR_RETRIES {
        let g = sample_ginibre(n, rng)?;
        if let Some(u) = gram_schmidt(&g) {
            return Ok(u);
        }
    }
    Err(Error::Numerical(format!("Ginibre draw singular after {HAAR_RETRIES} retries")))
}

/// Orthonormalize columns in order. Each projection is applied twice, which keeps
/// the result equal to classical Gram–Schmidt while holding orthogonality at roundoff level.
fn gram_schmidt(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = g.rows;
    let mut cols: Vec<Vec<Complex64>> = (0..g.cols).map(|j| (0..n).map(|i| g.get(i, j)).collect()).collect();
    for j in 0..cols.len() {
        if cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-300 {
            return None;
        }
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[k];
                let v = &mut rest[0];
                let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return None;
        }
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    ComplexMatrix::from_fn(n, g.cols, |i, j| cols[j][i]).ok()
}

/// All real eigenvalues in ascending order.
pub fn eigenvalues_hermitian(m: &HermitianMatrix) -> Result<Spectrum> {
    m.check_finite()?;
    let mut values = if m.is_real() {
        let a = Mat::<f64>::from_fn(m.n, m.n, |i, j| m.get(i, j).re);
        a.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?
    } else {
        m.to_faer()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?
    };
    values.sort_by(f64::total_cmp);
    Ok(Spectrum::Real { values, scale: 1.0 })
}

/// Eigenvalues of a square complex matrix (no particular order).
pub fn eigenvalues_complex(m: &ComplexMatrix) -> Result<Spectrum> {
    if m.rows != m.cols {
        return invalid("matrix must be square");
    }
    if !m.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return invalid("non-finite matrix entry");
    }
    let a = Mat::<Complex64>::from_fn(m.rows, m.cols, |i, j| m.get(i, j));
    let values = a.eigenvalues().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    Ok(Spectrum::Complex { values, scale: 1.0 })
}

#[derive(Debug, Clone)]
pub struct HadamardReport {
    pub eigenvalues: Vec<f64>,
    pub first_derivs: Vec<f64>,
    pub second_derivs: Vec<f64>,
    /// Column k is the unit eigenvector for eigenvalue k.
    pub eigvecs_used: ComplexMatrix,
}

/// Relative gap tolerance for simple-spectrum detection.
pub const HADAMARD_GAP_REL: f64 = 1e-8;

/// First and second t-derivatives at t=0 of the ordered eigenvalues of A + tB.
pub fn hadamard_derivatives(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HadamardReport> {
    if a.n != b.n {
        return invalid("dimension mismatch");
    }
    a.check_finite()?;
    b.check_finite()?;
    let n = a.n;
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let lam: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let norm = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = HADAMARD_GAP_REL * norm;
    let gap = lam.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if n > 1 && gap <= tol {
        return Err(Error::DegenerateSpectrum { gap, tol });
    }
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| u[(i, j)])?;
    // C = U* B U, C[k][i] = <u_k | B u_i>
    let c = vecs.adjoint().matmul(&b.as_complex().matmul(&vecs)?)?;
    let first: Vec<f64> = (0..n).map(|i| c.get(i, i).re).collect();
    let second: Vec<f64> = (0..n)
        .map(|i| {
            2.0 * (0..n)
                .filter(|&k| k != i)
                .map(|k| c.get(k, i).norm_sqr() / (lam[i] - lam[k]))
                .sum::<f64>()
        })
        .collect();
    Ok(HadamardReport { eigenvalues: lam, first_derivs: first, second_derivs: second, eigvecs_used: vecs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{ForcedDraws, RngStream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gue_n1_forced() {
        let m = sample_gue(1, &mut ForcedDraws::new(vec![0.7])).unwrap();
        assert_eq!(m.get(0, 0), c(0.7, 0.0));
    }

    #[test]
    fn gue_is_exactly_hermitian() {
        let m = sample_gue(2, &mut RngStream::new(1, 0)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m.get(i, j), m.get(j, i).conj());
            }
            assert_eq!(m.get(i, i).im, 0.0);
        }
    }

    #[test]
    fn zero_size_rejected() {
        let mut r = RngStream::new(1, 0);
        assert!(matches!(sample_gue(0, &mut r), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_goe(0, &mut r), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_ginibre(0, &mut r), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_wishart(0, 3, &mut r), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_wishart(3, 0, &mut r), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_haar_unitary(0, &mut r), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn goe_forced_and_real() {
        let m = sample_goe(1, &mut ForcedDraws::new(vec![-1.2])).unwrap();
        assert_eq!(m.get(0, 0).re, -1.2);
        let m3 = sample_goe(3, &mut RngStream::new(4, 0)).unwrap();
        assert!(m3.is_real());
    }

    #[test]
    fn ginibre_forced() {
        let m = sample_ginibre(1, &mut ForcedDraws::new(vec![0.3, -0.4])).unwrap();
        assert_eq!(m.get(0, 0), c(0.3, -0.4));
    }

    #[test]
    fn ginibre_streams_differ() {
        let a = sample_ginibre(2, &mut RngStream::new(5, 0)).unwrap();
        let b = sample_ginibre(2, &mut RngStream::new(5, 1)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_ne!(a.get(i, j), b.get(i, j));
            }
        }
    }

    #[test]
    fn wishart_forced_and_psd() {
        let w = sample_wishart(1, 1, &mut ForcedDraws::new(vec![1.0, 0.0])).unwrap();
        assert_eq!(w.get(0, 0), c(1.0, 0.0));
        let w = sample_wishart(20, 7, &mut RngStream::new(2, 0)).unwrap();
        let s = eigenvalues_hermitian(&w).unwrap();
        assert!(s.real().unwrap().iter().all(|&x| x >= -1e-10));
    }

    #[test]
    fn haar_n1_is_phase() {
        let draws = vec![0.3, -0.4];
        let u = sample_haar_unitary(1, &mut ForcedDraws::new(draws)).unwrap();
        let z = c(0.3, -0.4);
        assert!((u.get(0, 0) - z / z.norm()).norm() < 1e-15);
    }

    #[test]
    fn haar_unitarity() {
        let u = sample_haar_unitary(8, &mut RngStream::new(3, 0)).unwrap();
        let p = u.matmul(&u.adjoint()).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.get(i, j) - c(target, 0.0)).norm());
            }
        }
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn eig_small_cases() {
        let d = HermitianMatrix::diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let s = eigenvalues_hermitian(&d).unwrap();
        let v = s.real().unwrap();
        for (x, y) in v.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        let x = HermitianMatrix::from_real_upper(2, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        let v = eigenvalues_hermitian(&x).unwrap();
        let v = v.real().unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_nan_and_nonsquare() {
        let m = HermitianMatrix::diagonal(&[f64::NAN, 1.0]).unwrap();
        assert!(matches!(eigenvalues_hermitian(&m), Err(Error::InvalidArgument(_))));
        let r = ComplexMatrix::from_fn(2, 3, |_, _| c(1.0, 0.0)).unwrap();
        assert!(matches!(eigenvalues_complex(&r), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn complex_eig_small_cases() {
        let d = ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(0.0, 1.0),
            (1, 1) => c(2.0, 0.0),
            _ => c(0.0, 0.0),
        })
        .unwrap();
        let s = eigenvalues_complex(&d).unwrap();
        let v = s.complex().unwrap();
        assert!(v.iter().any(|z| (z - c(0.0, 1.0)).norm() < 1e-14));
        assert!(v.iter().any(|z| (z - c(2.0, 0.0)).norm() < 1e-14));
        let nil = ComplexMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }).unwrap();
        let s = eigenvalues_complex(&nil).unwrap();
        assert!(s.complex().unwrap().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn trace_identities() {
        let m = sample_gue(100, &mut RngStream::new(8, 0)).unwrap();
        let s: f64 = eigenvalues_hermitian(&m).unwrap().real().unwrap().iter().sum();
        assert!((s - m.trace()).abs() <= 1e-8 * m.trace().abs().max(1.0));
        let g = sample_ginibre(100, &mut RngStream::new(8, 1)).unwrap();
        let sc: Complex64 = eigenvalues_complex(&g).unwrap().complex().unwrap().iter().sum();
        assert!((sc - g.trace()).norm() < 1e-6 * g.frobenius());
    }

    #[test]
    fn hadamard_two_by_two() {
        let a = HermitianMatrix::diagonal(&[0.0, 2.0]).unwrap();
        let b = HermitianMatrix::from_real_upper(2, |i, j| if i == j { 0.0 } else { 1.0 }).unwrap();
        let r = hadamard_derivatives(&a, &b).unwrap();
        assert!(r.first_derivs.iter().all(|x| x.abs() < 1e-14));
        assert!((r.second_derivs[0] + 1.0).abs() < 1e-12);
        assert!((r.second_derivs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_identity_shift() {
        let a = sample_gue(5, &mut RngStream::new(11, 0)).unwrap();
        let r = hadamard_derivatives(&a, &HermitianMatrix::identity(5).unwrap()).unwrap();
        assert!(r.first_derivs.iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(r.second_derivs.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn hadamard_degenerate() {
        let a = HermitianMatrix::diagonal(&[1.0, 1.0, 2.0]).unwrap();
        let b = HermitianMatrix::identity(3).unwrap();
        assert!(matches!(hadamard_derivatives(&a, &b), Err(Error::DegenerateSpectrum { .. })));
    }
}
