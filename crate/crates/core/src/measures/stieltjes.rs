use super::{EmpiricalMeasure, GridMeasure, ReferenceLaw};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_with, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    MeasureBacked,
    CharacteristicSolved,
}

/// A Stieltjes transform z ↦ ∫ (z − t)^{-1} dμ(t), defined off the real line.
pub trait StieltjesField: Send + Sync {
    fn eval(&self, z: Complex64) -> Result<Complex64>;

    /// dS/dz; central differences unless overridden.
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let h = 1e-5 * (1.0 + z.norm()).min(z.im.abs() * 10.0);
        Ok((self.eval(z + h)? - self.eval(z - h)?) / (2.0 * h))
    }

    fn provenance(&self) -> Provenance;

    /// Real points where the boundary values are singular (atoms, density jumps).
    fn singular_at(&self, _x: f64) -> bool {
        false
    }

    /// Locations of sharp features, used to split inversion integrals.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

fn off_axis(z: Complex64) -> Result<()> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        invalid("Stieltjes transform needs Im z ≠ 0")
    } else {
        Ok(())
    }
}

/// S_μ(z) with the real-axis check.
pub fn stieltjes(field: &dyn StieltjesField, z: Complex64) -> Result<Complex64> {
    off_axis(z)?;
    field.eval(z)
}

/// Stieltjes transform of the semicircle on [−r, r], principal √(z−r)·√(z+r).
pub fn semicircle_radius_stieltjes(z: Complex64, r: f64) -> Result<Complex64> {
    off_axis(z)?;
    Ok((z - (z - r).sqrt() * (z + r).sqrt()) * (2.0 / (r * r)))
}

/// (z − √(z² − 4))/2 for the semicircle on [−2, 2].
pub fn semicircle_stieltjes(z: Complex64) -> Result<Complex64> {
    semicircle_radius_stieltjes(z, 2.0)
}

/// δ at a point.
#[derive(Debug, Clone, Copy)]
pub struct PointMass(pub f64);

impl StieltjesField for PointMass {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        Ok(1.0 / (z - self.0))
    }
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        Ok(-1.0 / ((z - self.0) * (z - self.0)))
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn singular_at(&self, x: f64) -> bool {
        x == self.0
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.0]
    }
}

/// Closure-backed field.
pub struct FnField<F> {
    f: F,
    provenance: Provenance,
}

impl<F> FnField<F>
where
    F: Fn(Complex64) -> Result<Complex64> + Send + Sync,
{
    pub fn new(f: F, provenance: Provenance) -> Self {
        Self { f, provenance }
    }
}

impl<F> StieltjesField for FnField<F>
where
    F: Fn(Complex64) -> Result<Complex64> + Send + Sync,
{
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        (self.f)(z)
    }
    fn provenance(&self) -> Provenance {
        self.provenance
    }
}

impl StieltjesField for EmpiricalMeasure {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        let s: Complex64 = self.atoms().iter().map(|&t| 1.0 / (z - t)).sum();
        Ok(s * self.weight())
    }
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        let s: Complex64 = self.atoms().iter().map(|&t| -1.0 / ((z - t) * (z - t))).sum();
        Ok(s * self.weight())
    }
    fn provenance(&self) -> Provenance {
        Provenance::MeasureBacked
    }
    fn singular_at(&self, x: f64) -> bool {
        self.atoms().binary_search_by(|a| a.total_cmp(&x)).is_ok()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.atoms().to_vec()
    }
}

impl StieltjesField for GridMeasure {
    /// Σ_k (m_k/w_k)·[log(z − a_k) − log(z − b_k)], exact for piecewise-constant densities.
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        let nodes = self.nodes();
        let logs: Vec<Complex64> = nodes.iter().map(|&x| (z - x).ln()).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..self.cells() {
            let m = self.masses()[k];
            if m != 0.0 {
                s += (logs[k] - logs[k + 1]) * (m / self.width(k));
            }
        }
        Ok(s)
    }
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..self.cells() {
            let m = self.masses()[k];
            if m != 0.0 {
                let (a, b) = (self.nodes()[k], self.nodes()[k + 1]);
                s += (1.0 / (z - a) - 1.0 / (z - b)) * (m / self.width(k));
            }
        }
        Ok(s)
    }
    fn provenance(&self) -> Provenance {
        Provenance::MeasureBacked
    }
    fn singular_at(&self, x: f64) -> bool {
        // a density jump at a node gives a logarithmic singularity
        let nodes = self.nodes();
        let Ok(k) = nodes.binary_search_by(|a| a.total_cmp(&x)) else { return false };
        let left = if k == 0 { 0.0 } else { self.density(k - 1) };
        let right = if k == self.cells() { 0.0 } else { self.density(k) };
        left != right
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.nodes().to_vec()
    }
}

impl StieltjesField for ReferenceLaw {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        off_axis(z)?;
        self.validate()?;
        if let Some(r) = self.semicircle_radius() {
            return semicircle_radius_stieltjes(z, r);
        }
        match *self {
            ReferenceLaw::MarchenkoPastur { c } => {
                let (lo, hi) = self.support().unwrap();
                let root = (z - lo).sqrt() * (z - hi).sqrt();
                Ok((z - (1.0 - c) - root) / (2.0 * c * z))
            }
            ReferenceLaw::Gumbel => self.expect(|t| 1.0 / (z - t), 1e-12),
            ReferenceLaw::Circular => Err(Error::Unsupported("circular law is planar".into())),
            _ => unreachable!(),
        }
    }
    fn provenance(&self) -> Provenance {
        match self {
            ReferenceLaw::Gumbel => Provenance::MeasureBacked,
            _ => Provenance::ClosedForm,
        }
    }
    fn singular_at(&self, x: f64) -> bool {
        self.atoms().iter().any(|(p, _)| *p == x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.atoms().iter().map(|(p, _)| *p).collect();
        if let Some((a, b)) = self.support() {
            v.push(a);
            v.push(b);
        }
        v
    }
}

/// Default ε sequence for inversion.
pub const DEFAULT_INVERSION_EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionResult {
    pub mass: f64,
    /// −(1/π)∫ Im S(x + iε) dx per ε.
    pub estimates: Vec<f64>,
    /// Order-1 Richardson values from consecutive pairs.
    pub extrapolated: Vec<f64>,
}

fn smeared_mass(field: &dyn StieltjesField, a: f64, b: f64, eps: f64) -> Result<f64> {
    let mut cuts: Vec<f64> = field.breakpoints().into_iter().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let err = std::cell::RefCell::new(None);
    let f = |x: f64| match field.eval(Complex64::new(x, eps)) {
        Ok(s) => -s.im / PI,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let opts = QuadOptions { abs_tol: 1e-9, rel_tol: 1e-10, max_intervals: 200_000 };
    let mut total = 0.0;
    for w in edges.windows(2) {
        let pieces = (((w[1] - w[0]) / eps).ceil() as usize).clamp(1, 16);
        total += integrate_with(f, w[0], w[1], pieces, opts).value;
    }
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(total)
}

/// μ([a, b]) from boundary values of S, extrapolating ε → 0 linearly.
pub fn stieltjes_invert(field: &dyn StieltjesField, a: f64, b: f64, eps_seq: &[f64], tol: f64) -> Result<InversionResult> {
    if !(a < b) {
        return invalid("need a < b");
    }
    if eps_seq.is_empty() || eps_seq.iter().any(|e| !(*e > 0.0)) {
        return invalid("ε sequence must be positive and nonempty");
    }
    let estimates: Vec<f64> = eps_seq.iter().map(|&e| smeared_mass(field, a, b, e)).collect::<Result<_>>()?;
    let extrapolated: Vec<f64> = (1..eps_seq.len())
        .map(|k| {
            let (e0, e1) = (eps_seq[k - 1], eps_seq[k]);
            let (i0, i1) = (estimates[k - 1], estimates[k]);
            (e0 * i1 - e1 * i0) / (e0 - e1)
        })
        .collect();
    let mass = *extrapolated.last().unwrap_or(&estimates[0]);
    if extrapolated.len() >= 2 {
        let prev = extrapolated[extrapolated.len() - 2];
        if (mass - prev).abs() > tol {
            let mut partial = estimates.clone();
            partial.extend(&extrapolated);
            return Err(Error::NoConvergence {
                message: format!("inversion estimates differ by {:e} > {tol:e}", (mass - prev).abs()),
                partial,
            });
        }
    }
    Ok(InversionResult { mass, estimates, extrapolated })
}

/// ε pair for the two-point Hilbert extrapolation.
pub const HILBERT_EPS: (f64, f64) = (1e-3, 5e-4);

/// Hilbert transform (principal value of ∫ dμ(t)/(x − t)) from Re S(x + iε), Richardson in ε.
pub fn hilbert_transform(field: &dyn StieltjesField, x: f64) -> Result<f64> {
    if field.singular_at(x) {
        return Err(Error::SingularPoint(format!("x = {x} is a singular point of the measure")));
    }
    let (e1, e2) = HILBERT_EPS;
    let h1 = field.eval(Complex64::new(x, e1))?.re;
    let h2 = field.eval(Complex64::new(x, e2))?.re;
    Ok((e1 * h2 - e2 * h1) / (e1 - e2))
}

/// ∫ log|x − y| dσ_β(y) for the semicircle on [−√(2β), √(2β)].
pub fn log_potential_semicircle(x: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() || !x.is_finite() {
        return invalid("need finite x and β > 0");
    }
    let r = (2.0 * beta).sqrt();
    let inside = |u: f64| 0.5 * beta.ln() + 0.5 * (u * u / beta - 2f64.ln() - 1.0);
    let ax = x.abs();
    if ax <= r {
        return Ok(inside(ax));
    }
    // d/du ∫log|u − y| = S(u) (real beyond the edge); u = r cosh s keeps the integrand smooth
    let smax = (ax / r).acosh();
    let g = |s: f64| {
        let (c, sh) = (s.cosh(), s.sinh());
        let su = (2.0 / (r * r)) * (r * c - r * sh);
        su * r * sh
    };
    let tail = integrate(g, 0.0, smax, QuadOptions::tol(1e-12)).value;
    Ok(inside(r) + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::GridMeasure;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_and_two_point() {
        assert!((PointMass(0.0).eval(c(0.0, 1.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        let m = EmpiricalMeasure::new(vec![-1.0, 1.0]).unwrap();
        for z in [c(0.3, 0.7), c(-2.0, -0.1), c(5.0, 3.0)] {
            let s = m.eval(z).unwrap();
            assert!((s - z / (z * z - 1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn semicircle_closed_form() {
        let s = semicircle_stieltjes(c(0.0, 2.0)).unwrap();
        assert!((s - c(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-14);
        let z = c(10.0, 1e-6);
        let s = semicircle_stieltjes(z).unwrap();
        assert!(((s - 1.0 / z) / (1.0 / z)).norm() < 0.02);
        let sm = semicircle_stieltjes(c(0.0, -2.0)).unwrap();
        assert!((sm - s_conj(c(0.0, 2.0))).norm() < 1e-15);
        assert!(matches!(semicircle_stieltjes(c(1.0, 0.0)), Err(Error::InvalidArgument(_))));
    }

    fn s_conj(z: Complex64) -> Complex64 {
        semicircle_stieltjes(z).unwrap().conj()
    }

    #[test]
    fn semicircle_functional_equation() {
        for k in 0..50 {
            let z = c(-4.0 + 0.17 * k as f64, if k % 2 == 0 { 0.05 + 0.1 * k as f64 } else { -0.3 * k as f64 });
            let s = semicircle_stieltjes(z).unwrap();
            assert!((s * s - z * s + 1.0).norm() < 1e-12, "{z}");
            assert!(s.norm() <= 1.0 / z.im.abs() + 1e-12);
        }
    }

    #[test]
    fn law_stieltjes_matches_quadrature() {
        for law in [ReferenceLaw::Semicircle, ReferenceLaw::SemicircleBeta { beta: 1.0 }, ReferenceLaw::MarchenkoPastur { c: 0.5 }, ReferenceLaw::MarchenkoPastur { c: 2.0 }] {
            for z in [c(0.3, 0.5), c(-1.0, -2.0), c(3.0, 0.1)] {
                let closed = law.eval(z).unwrap();
                let quad: Complex64 = law.expect(|t| 1.0 / (z - t), 1e-12).unwrap();
                assert!((closed - quad).norm() < 1e-8, "{law:?} {z} {closed} {quad}");
            }
        }
    }

    #[test]
    fn inversion_examples() {
        let eps = DEFAULT_INVERSION_EPS;
        let r = stieltjes_invert(&PointMass(0.0), -1.0, 1.0, &eps, 1e-3).unwrap();
        assert!((r.mass - 1.0).abs() < 1e-3);
        let r = stieltjes_invert(&ReferenceLaw::Semicircle, -2.0, 2.0, &eps, 1e-3).unwrap();
        assert!((r.mass - 1.0).abs() < 1e-3);
        let r = stieltjes_invert(&ReferenceLaw::Semicircle, 0.0, 2.0, &eps, 1e-3).unwrap();
        assert!((r.mass - 0.5).abs() < 1e-3);
        assert!(stieltjes_invert(&ReferenceLaw::Semicircle, 1.0, 0.0, &eps, 1e-3).is_err());
    }

    #[test]
    fn inversion_reports_nonconvergence() {
        // a field that is not a Stieltjes transform: −Im S grows as ε shrinks
        let bad = FnField::new(|z: Complex64| Ok(c(0.0, -1.0 / z.im.abs().sqrt())), Provenance::ClosedForm);
        match stieltjes_invert(&bad, 0.0, 1.0, &DEFAULT_INVERSION_EPS, 1e-3) {
            Err(Error::NoConvergence { partial, .. }) => assert!(!partial.is_empty()),
            other => panic!("expected no-convergence, got {other:?}"),
        }
    }

    #[test]
    fn grid_stieltjes_matches_quadrature() {
        let g = GridMeasure::new(vec![-1.0, 0.0, 0.5, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        for z in [c(0.2, 0.3), c(1.0, -0.5)] {
            let exact = g.eval(z).unwrap();
            let mut q = c(0.0, 0.0);
            for k in 0..g.cells() {
                let d = g.density(k);
                q += integrate(|t| d / (z - t), g.nodes()[k], g.nodes()[k + 1], QuadOptions::tol(1e-13)).value;
            }
            assert!((exact - q).norm() < 1e-12);
            let h = 1e-6;
            let fd = (g.eval(z + h).unwrap() - g.eval(z - h).unwrap()) / (2.0 * h);
            assert!((fd - g.derivative(z).unwrap()).norm() < 1e-6);
        }
    }

    #[test]
    fn hilbert_examples() {
        let r = 2f64.sqrt();
        let sigma1 = GridMeasure::from_law(&ReferenceLaw::SemicircleBeta { beta: 1.0 }, GridMeasure::uniform_nodes(-r, r, 2048).unwrap()).unwrap();
        assert!((hilbert_transform(&sigma1, 0.5).unwrap() - 0.5).abs() < 2e-3);
        let th = ReferenceLaw::OuLimit { theta: 2.0 };
        let (a, b) = th.support().unwrap();
        let g = GridMeasure::from_law(&th, GridMeasure::uniform_nodes(a, b, 2048).unwrap()).unwrap();
        assert!((hilbert_transform(&g, 0.3).unwrap() - 0.6).abs() < 2e-3);
        // symmetric measure at its centre
        let u = GridMeasure::uniform(-1.0, 1.0, 10).unwrap();
        assert!(hilbert_transform(&u, 0.0).unwrap().abs() < 1e-12);
        // closed-form law too
        assert!((hilbert_transform(&ReferenceLaw::SemicircleBeta { beta: 1.0 }, 0.5).unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn hilbert_singular_points() {
        let u = GridMeasure::uniform(-1.0, 1.0, 4).unwrap();
        assert!(matches!(hilbert_transform(&u, 1.0), Err(Error::SingularPoint(_))));
        // interior node with no jump is regular
        assert!(hilbert_transform(&u, 0.5).is_ok());
        let e = EmpiricalMeasure::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(hilbert_transform(&e, 1.0), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn log_potential_values() {
        let v0 = log_potential_semicircle(0.0, 1.0).unwrap();
        assert!((v0 + (2f64.ln() + 1.0) / 2.0).abs() < 1e-14);
        let ve = log_potential_semicircle(2f64.sqrt(), 1.0).unwrap();
        assert!((ve - (1.0 - 2f64.ln()) / 2.0).abs() < 1e-14);
        assert!((log_potential_semicircle(10.0, 1.0).unwrap() - 10f64.ln()).abs() < 1e-2);
    }

    /// Closed form outside the support of the radius-2 semicircle, used as an oracle.
    fn outside_radius_two(x: f64) -> f64 {
        let s = (x * x - 4.0).sqrt();
        x * x / 4.0 - x * s / 4.0 + ((x + s) / 2.0).ln() - 0.5
    }

    #[test]
    fn log_potential_outside_support_oracle() {
        // σ_2 is the radius-2 semicircle
        for &x in &[2.0001, 2.3, 3.0, 7.5, 40.0] {
            let v = log_potential_semicircle(x, 2.0).unwrap();
            assert!((v - outside_radius_two(x)).abs() < 1e-10, "{x}");
            assert!((log_potential_semicircle(-x, 2.0).unwrap() - v).abs() < 1e-14);
        }
        // direct quadrature oracle inside
        let law = ReferenceLaw::SemicircleBeta { beta: 1.0 };
        for &x in &[0.2, 1.0] {
            let (a, b) = law.support().unwrap();
            let q = integrate_with(|y| (x - y).abs().ln() * law.density(y).unwrap(), a, b, 64, QuadOptions::tol(1e-11)).value;
            assert!((q - log_potential_semicircle(x, 1.0).unwrap()).abs() < 1e-7);
        }
    }
}
