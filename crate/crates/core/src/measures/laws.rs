use super::{check_order, GridMeasure};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, integrate_real_line, integrate_with, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Limit laws with closed-form densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceLaw {
    /// Semicircle on [−2, 2].
    Semicircle,
    /// Semicircle on [−√(2β), √(2β)] with density (1/(βπ))√(2β − x²).
    SemicircleBeta { beta: f64 },
    /// Stationary law of the mean-field OU flow, density (θ/π)√(2/θ − x²).
    OuLimit { theta: f64 },
    /// Marchenko–Pastur with ratio c = n/m (unit variance).
    MarchenkoPastur { c: f64 },
    /// Uniform on the unit disk.
    Circular,
    /// Standard Gumbel, CDF exp(−e^{−x}).
    Gumbel,
}

impl ReferenceLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite"))
            }
        };
        match *self {
            ReferenceLaw::SemicircleBeta { beta } => ok(beta, "beta"),
            ReferenceLaw::OuLimit { theta } => ok(theta, "theta"),
            ReferenceLaw::MarchenkoPastur { c } => ok(c, "c"),
            _ => Ok(()),
        }
    }

    /// Support radius for the semicircle family.
    pub fn semicircle_radius(&self) -> Option<f64> {
        match *self {
            ReferenceLaw::Semicircle => Some(2.0),
            ReferenceLaw::SemicircleBeta { beta } => Some((2.0 * beta).sqrt()),
            ReferenceLaw::OuLimit { theta } => Some((2.0 / theta).sqrt()),
            _ => None,
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, ReferenceLaw::Circular)
    }

    /// Closed support of the continuous part on the line, `None` for unbounded or planar laws.
    pub fn support(&self) -> Option<(f64, f64)> {
        if let Some(r) = self.semicircle_radius() {
            return Some((-r, r));
        }
        match *self {
            ReferenceLaw::MarchenkoPastur { c } => {
                let s = c.sqrt();
                Some(((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)))
            }
            _ => None,
        }
    }

    /// Point masses (location, mass).
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            ReferenceLaw::MarchenkoPastur { c } if c > 1.0 => vec![(0.0, 1.0 - 1.0 / c)],
            _ => Vec::new(),
        }
    }

    /// Density of the continuous part on the real line.
    pub fn density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if let Some(r) = self.semicircle_radius() {
            let d = r * r - x * x;
            return Ok(if d > 0.0 { 2.0 / (PI * r * r) * d.sqrt() } else { 0.0 });
        }
        match *self {
            ReferenceLaw::MarchenkoPastur { c } => {
                let (a, b) = self.support().unwrap();
                if x <= a || x >= b || x <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok(((b - x) * (x - a)).sqrt() / (2.0 * PI * c * x))
                }
            }
            ReferenceLaw::Gumbel => Ok((-x - (-x).exp()).exp()),
            ReferenceLaw::Circular => Err(Error::Unsupported("circular law is planar; use planar_density".into())),
            _ => unreachable!(),
        }
    }

    /// Density with respect to area in the plane (circular law only).
    pub fn planar_density(&self, z: Complex64) -> Result<f64> {
        match self {
            ReferenceLaw::Circular => Ok(if z.norm() <= 1.0 { 1.0 / PI } else { 0.0 }),
            _ => Err(Error::Unsupported("law lives on the real line; use density".into())),
        }
    }

    /// ∫ f dμ including atoms, by quadrature adapted to the edge behaviour.
    pub fn expect<T, F>(&self, f: F, tol: f64) -> Result<T>
    where
        T: crate::quad::QuadValue,
        F: Fn(f64) -> T,
    {
        self.validate()?;
        let opts = QuadOptions::tol(tol);
        if let Some(r) = self.semicircle_radius() {
            // x = r sin φ turns the square-root edges into a smooth integrand
            let g = |phi: f64| {
                let c = phi.cos();
                f(r * phi.sin()).scale(2.0 / PI * c * c)
            };
            return Ok(integrate_with(g, -FRAC_PI_2, FRAC_PI_2, 8, opts).value);
        }
        match *self {
            ReferenceLaw::MarchenkoPastur { c } => {
                let (a, b) = self.support().unwrap();
                let h = 0.5 * (b - a);
                let g = |phi: f64| {
                    let x = a + h * (1.0 + phi.sin());
                    let cs = phi.cos();
                    if x <= 0.0 {
                        T::zero()
                    } else {
                        f(x).scale(h * h * cs * cs / (2.0 * PI * c * x))
                    }
                };
                let mut v = integrate_with(g, -FRAC_PI_2, FRAC_PI_2, 8, opts).value;
                for (x, m) in self.atoms() {
                    v = v + f(x).scale(m);
                }
                Ok(v)
            }
            ReferenceLaw::Gumbel => Ok(integrate_real_line(|x| f(x).scale((-x - (-x).exp()).exp()), opts).value),
            ReferenceLaw::Circular => Err(Error::Unsupported("circular law is planar".into())),
            _ => unreachable!(),
        }
    }

    /// ∫ x^k dμ.
    pub fn moment(&self, k: usize) -> Result<f64> {
        check_order(k)?;
        self.expect(|x: f64| x.powi(k as i32), 1e-13)
    }

    /// μ((−∞, x]) including atoms.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if let Some(r) = self.semicircle_radius() {
            if x <= -r {
                return Ok(0.0);
            }
            if x >= r {
                return Ok(1.0);
            }
            let u = x / r;
            return Ok(0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI);
        }
        match *self {
            ReferenceLaw::MarchenkoPastur { .. } => {
                let (a, b) = self.support().unwrap();
                let atom: f64 = self.atoms().iter().filter(|(p, _)| *p <= x).map(|(_, m)| m).sum();
                if x <= a {
                    return Ok(atom);
                }
                let hi = x.min(b);
                let h = 0.5 * (b - a);
                // same substitution restricted to [a, hi]
                let top = ((hi - a) / h - 1.0).clamp(-1.0, 1.0).asin();
                let span = (top + FRAC_PI_2).max(0.0);
                let g = |phi: f64| {
                    let xx = a + h * (1.0 + phi.sin());
                    let cs = phi.cos();
                    if xx <= 0.0 {
                        0.0
                    } else {
                        h * h * cs * cs / (2.0 * PI * self.mp_c() * xx)
                    }
                };
                let cont = if span > 0.0 { integrate(g, -FRAC_PI_2, top, QuadOptions::tol(1e-13)).value } else { 0.0 };
                Ok((atom + cont).min(1.0))
            }
            ReferenceLaw::Gumbel => Ok((-(-x).exp()).exp()),
            ReferenceLaw::Circular => Err(Error::Unsupported("circular law is planar".into())),
            _ => unreachable!(),
        }
    }

    fn mp_c(&self) -> f64 {
        match *self {
            ReferenceLaw::MarchenkoPastur { c } => c,
            _ => f64::NAN,
        }
    }

    /// P(|Z| ≤ r) for the circular law.
    pub fn radial_cdf(&self, r: f64) -> Result<f64> {
        match self {
            ReferenceLaw::Circular => Ok((r * r).clamp(0.0, 1.0)),
            _ => Err(Error::Unsupported("radial CDF is defined for the circular law".into())),
        }
    }

    /// Continuous part discretized on `cells` equal cells over its support, renormalized to mass one.
    pub fn to_grid(&self, cells: usize) -> Result<GridMeasure> {
        let (a, b) = self
            .support()
            .ok_or_else(|| Error::Unsupported("law has no bounded real support".into()))?;
        let nodes = GridMeasure::uniform_nodes(a, b, cells)?;
        let cdf: Vec<f64> = nodes.iter().map(|&x| self.cdf(x)).collect::<Result<_>>()?;
        let w: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
        GridMeasure::from_weights(nodes, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_density_at_zero() {
        assert!((ReferenceLaw::Semicircle.density(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(ReferenceLaw::Semicircle.density(2.5).unwrap(), 0.0);
    }

    #[test]
    fn mp_atom() {
        let law = ReferenceLaw::MarchenkoPastur { c: 2.0 };
        assert_eq!(law.atoms(), vec![(0.0, 0.5)]);
        assert!(ReferenceLaw::MarchenkoPastur { c: 0.5 }.atoms().is_empty());
    }

    #[test]
    fn circular_outside_disk() {
        assert_eq!(ReferenceLaw::Circular.planar_density(Complex64::new(1.5, 0.0)).unwrap(), 0.0);
        assert!((ReferenceLaw::Circular.planar_density(Complex64::new(0.1, 0.2)).unwrap() - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn invalid_params() {
        assert!(ReferenceLaw::MarchenkoPastur { c: 0.0 }.density(1.0).is_err());
        assert!(ReferenceLaw::OuLimit { theta: -1.0 }.density(0.0).is_err());
        assert!(ReferenceLaw::SemicircleBeta { beta: f64::NAN }.density(0.0).is_err());
    }

    #[test]
    fn ou_limit_is_rescaled_beta_semicircle() {
        let a = ReferenceLaw::OuLimit { theta: 0.5 };
        for &x in &[0.0, 0.7, 1.9] {
            let d = a.density(x).unwrap();
            let s = ReferenceLaw::Semicircle.density(x).unwrap();
            assert!((d - s).abs() < 1e-14);
            // σ_θ = σ_{β=1/θ}
            let b = ReferenceLaw::SemicircleBeta { beta: 2.0 }.density(x).unwrap();
            assert!((d - b).abs() < 1e-14);
        }
    }

    #[test]
    fn normalizations() {
        let laws = [
            ReferenceLaw::Semicircle,
            ReferenceLaw::SemicircleBeta { beta: 1.0 },
            ReferenceLaw::OuLimit { theta: 3.0 },
            ReferenceLaw::MarchenkoPastur { c: 0.5 },
            ReferenceLaw::MarchenkoPastur { c: 1.0 },
            ReferenceLaw::MarchenkoPastur { c: 2.0 },
            ReferenceLaw::Gumbel,
        ];
        for law in laws {
            let total: f64 = law.expect(|_| 1.0, 1e-12).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "{law:?} {total}");
        }
    }

    #[test]
    fn normalization_by_plain_quadrature() {
        // independent of the substitution used in expect()
        let law = ReferenceLaw::MarchenkoPastur { c: 0.5 };
        let (a, b) = law.support().unwrap();
        let r = integrate_with(|x| law.density(x).unwrap(), a, b, 64, QuadOptions::tol(1e-11));
        assert!((r.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn semicircle_moments_are_catalan() {
        for p in 0..=10usize {
            let m = ReferenceLaw::Semicircle.moment(2 * p).unwrap();
            let c = super::super::catalan(p).unwrap() as f64;
            assert!((m - c).abs() < 1e-9 * c.max(1.0), "p={p} {m} {c}");
            assert!(ReferenceLaw::Semicircle.moment(2 * p + 1).unwrap().abs() < 1e-9);
        }
        assert!((ReferenceLaw::Semicircle.moment(4).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mp_moments() {
        // E x = 1, E x² = 1 + c for unit-variance MP
        for &c in &[0.5, 2.0] {
            let law = ReferenceLaw::MarchenkoPastur { c };
            assert!((law.moment(1).unwrap() - 1.0).abs() < 1e-10);
            assert!((law.moment(2).unwrap() - (1.0 + c)).abs() < 1e-10);
        }
    }

    #[test]
    fn cdfs_consistent_with_density() {
        for law in [ReferenceLaw::Semicircle, ReferenceLaw::MarchenkoPastur { c: 0.5 }, ReferenceLaw::Gumbel] {
            for &x in &[-0.5, 0.3, 1.1, 1.9] {
                let h = 1e-5;
                let d = (law.cdf(x + h).unwrap() - law.cdf(x - h).unwrap()) / (2.0 * h);
                assert!((d - law.density(x).unwrap()).abs() < 1e-6, "{law:?} {x}");
            }
        }
        let mp2 = ReferenceLaw::MarchenkoPastur { c: 2.0 };
        assert!((mp2.cdf(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((mp2.cdf(10.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn moment_guard() {
        assert!(matches!(ReferenceLaw::Semicircle.moment(31), Err(Error::UnsupportedOrder { .. })));
    }
}
