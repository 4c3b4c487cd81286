//! Empirical, grid and reference spectral measures; moments and distribution distances.

mod bl;
mod laws;
mod stieltjes;

pub use bl::{bl_distance, bl_distance_with, BlMode, BlResult, SignedAtoms, BL_EXACT_MAX_POINTS};
pub use laws::ReferenceLaw;
pub use stieltjes::{
    hilbert_transform, log_potential_semicircle, semicircle_radius_stieltjes, semicircle_stieltjes,
    stieltjes, stieltjes_invert, FnField, InversionResult, PointMass, Provenance, StieltjesField,
    DEFAULT_INVERSION_EPS, HILBERT_EPS,
};

use crate::ensembles::Spectrum;
use crate::error::{invalid, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Highest moment order evaluated (overflow guard).
pub const MAX_MOMENT: usize = 30;

/// Uniform atomic measure on real points, atoms sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("empirical measure needs at least one atom");
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return invalid("non-finite atom");
        }
        atoms.sort_by(f64::total_cmp);
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    /// ∫ f dμ.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&x| f(x)).sum::<f64>() * self.weight()
    }

    pub fn moment(&self, k: usize) -> Result<f64> {
        check_order(k)?;
        Ok(self.expect(|x| x.powi(k as i32)))
    }
}

/// Uniform atomic measure on complex points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarMeasure {
    atoms: Vec<Complex64>,
}

impl PlanarMeasure {
    pub fn new(atoms: Vec<Complex64>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("planar measure needs at least one atom");
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Either variant of an empirical measure built from a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMeasure {
    Real(EmpiricalMeasure),
    Planar(PlanarMeasure),
}

/// Atoms at `values·scale`, mass 1/n each.
pub fn empirical_from_spectrum(s: &Spectrum, scale: f64) -> Result<SpectralMeasure> {
    if !(scale > 0.0) || !scale.is_finite() {
        return invalid("scale must be positive");
    }
    match s {
        Spectrum::Real { values, .. } => {
            Ok(SpectralMeasure::Real(EmpiricalMeasure::new(values.iter().map(|x| x * scale).collect())?))
        }
        Spectrum::Complex { values, .. } => {
            Ok(SpectralMeasure::Planar(PlanarMeasure::new(values.iter().map(|z| z * scale).collect())?))
        }
    }
}

/// Real-line version of [`empirical_from_spectrum`].
pub fn empirical_real(s: &Spectrum, scale: f64) -> Result<EmpiricalMeasure> {
    match empirical_from_spectrum(s, scale)? {
        SpectralMeasure::Real(m) => Ok(m),
        SpectralMeasure::Planar(_) => invalid("spectrum is complex"),
    }
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_MOMENT {
        Err(Error::UnsupportedOrder { order: k, max: MAX_MOMENT })
    } else {
        Ok(())
    }
}

/// Catalan number via the convolution recurrence.
pub fn catalan(p: usize) -> Result<u64> {
    check_order(p)?;
    let mut c = vec![1u64; p + 1];
    for q in 1..=p {
        c[q] = (0..q).map(|k| c[k] * c[q - 1 - k]).sum();
    }
    Ok(c[p])
}

/// Piecewise-constant density: `masses[k]` spread uniformly on `[nodes[k], nodes[k+1]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    nodes: Vec<f64>,
    masses: Vec<f64>,
}

impl GridMeasure {
    /// Validates the grid and renormalizes masses whose sum is within 1e−9 of one.
    pub fn new(nodes: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || masses.len() + 1 != nodes.len() {
            return invalid("need m+1 nodes for m cells");
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return invalid("grid nodes must be finite");
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("grid nodes must be strictly increasing");
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return invalid("cell masses must be nonnegative");
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("cell masses sum to {total}, not 1"));
        }
        let masses = masses.into_iter().map(|m| m / total).collect();
        Ok(Self { nodes, masses })
    }

    /// Uniform cells on [a, b].
    pub fn uniform_nodes(a: f64, b: f64, cells: usize) -> Result<Vec<f64>> {
        if cells == 0 || !(b > a) {
            return invalid("need a < b and at least one cell");
        }
        Ok((0..=cells).map(|k| a + (b - a) * k as f64 / cells as f64).collect())
    }

    /// Uniform probability on [a, b] with `cells` equal cells.
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        let nodes = Self::uniform_nodes(a, b, cells)?;
        Self::new(nodes, vec![1.0 / cells as f64; cells])
    }

    /// Cell masses proportional to `weights` (normalized here).
    pub fn from_weights(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return invalid("weights must have positive total");
        }
        Self::new(nodes, weights.into_iter().map(|w| w / total).collect())
    }

    /// Exact cell masses of the continuous part of `law` on the given nodes.
    pub fn from_law(law: &ReferenceLaw, nodes: Vec<f64>) -> Result<Self> {
        law.validate()?;
        if !law.atoms().is_empty() {
            return Err(Error::Unsupported("law with atoms cannot be a grid measure".into()));
        }
        let cdf: Vec<f64> = nodes.iter().map(|&x| law.cdf(x)).collect::<Result<_>>()?;
        let masses: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
        Self::from_weights(nodes, masses)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cells(&self) -> usize {
        self.masses.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        0.5 * (self.nodes[k] + self.nodes[k + 1])
    }

    pub fn density(&self, k: usize) -> f64 {
        self.masses[k] / self.width(k)
    }

    pub fn support_bounds(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Indices of the first and last cell carrying more than `mass_tol`.
    pub fn effective_support(&self, mass_tol: f64) -> Option<(usize, usize)> {
        let first = self.masses.iter().position(|&m| m > mass_tol)?;
        let last = self.masses.iter().rposition(|&m| m > mass_tol)?;
        Some((first, last))
    }

    /// μ((−∞, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.cells() {
            let (a, b) = (self.nodes[k], self.nodes[k + 1]);
            if x >= b {
                acc += self.masses[k];
            } else {
                if x > a {
                    acc += self.masses[k] * (x - a) / (b - a);
                }
                break;
            }
        }
        acc
    }

    /// μ([a, b]).
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }

    /// Exact ∫ x^k dμ.
    pub fn moment(&self, k: usize) -> Result<f64> {
        check_order(k)?;
        let p = k as i32 + 1;
        Ok((0..self.cells())
            .map(|c| {
                let (a, b) = (self.nodes[c], self.nodes[c + 1]);
                self.masses[c] * (b.powi(p) - a.powi(p)) / (p as f64 * (b - a))
            })
            .sum())
    }

    /// t·self + (1−t)·other on identical nodes.
    pub fn mix(&self, t: f64, other: &Self) -> Result<Self> {
        if self.nodes != other.nodes {
            return invalid("mixture needs identical grids");
        }
        if !(0.0..=1.0).contains(&t) {
            return invalid("mixture weight must lie in [0, 1]");
        }
        let masses = self.masses.iter().zip(&other.masses).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        Self::new(self.nodes.clone(), masses)
    }

    /// Push forward through x ↦ s·x for s > 0.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return invalid("scale must be positive");
        }
        Self::new(self.nodes.iter().map(|x| x * s).collect(), self.masses.clone())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node_left,node_right,mass\n");
        for k in 0..self.cells() {
            out.push_str(&format!("{:e},{:e},{:e}\n", self.nodes[k], self.nodes[k + 1], self.masses[k]));
        }
        out
    }

    /// Parse the CSV form; `#` comment lines are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some(h) if h.trim() == "node_left,node_right,mass" => {}
            _ => return invalid("missing header node_left,node_right,mass"),
        }
        let mut nodes = Vec::new();
        let mut masses = Vec::new();
        for (row, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return invalid(format!("row {row}: expected 3 columns"));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("row {row}: {e}")));
            let (l, r, m) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
            match nodes.last() {
                None => nodes.push(l),
                Some(&prev) if prev == l => {}
                Some(_) => return invalid(format!("row {row}: cells are not contiguous")),
            }
            nodes.push(r);
            masses.push(m);
        }
        Self::new(nodes, masses)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid measure serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GridMeasure = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(raw.nodes, raw.masses)
    }
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s: Vec<f64> = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Kolmogorov–Smirnov distance between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_basic() {
        let s = Spectrum::Real { values: vec![1.0, 2.0, 3.0], scale: 1.0 };
        let m = empirical_real(&s, 1.0).unwrap();
        assert_eq!(m.atoms(), &[1.0, 2.0, 3.0]);
        assert!((m.weight() - 1.0 / 3.0).abs() < 1e-16);
        let m = empirical_real(&Spectrum::Real { values: vec![2.0], scale: 1.0 }, 0.5).unwrap();
        assert_eq!(m.atoms(), &[1.0]);
        let e = Spectrum::Real { values: vec![], scale: 1.0 };
        assert!(matches!(empirical_real(&e, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0).unwrap(), 1);
        assert_eq!(catalan(3).unwrap(), 5);
        assert_eq!(catalan(10).unwrap(), 16796);
        // closed form binom(2p, p)/(p+1) at p = 30
        assert_eq!(catalan(30).unwrap(), 3_814_986_502_092_304);
        assert!(matches!(catalan(31), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn empirical_moments() {
        let m = EmpiricalMeasure::new(vec![-1.0, 1.0]).unwrap();
        assert!((m.moment(2).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(m.moment(31), Err(Error::UnsupportedOrder { .. })));
    }

    #[test]
    fn grid_validation_and_cdf() {
        assert!(GridMeasure::new(vec![0.0, 1.0], vec![0.5]).is_err());
        assert!(GridMeasure::new(vec![0.0, 0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(GridMeasure::new(vec![0.0, 1.0, 2.0], vec![-0.5, 1.5]).is_err());
        let g = GridMeasure::new(vec![0.0, 1.0, 3.0], vec![0.25, 0.75]).unwrap();
        assert!((g.cdf(0.5) - 0.125).abs() < 1e-15);
        assert!((g.cdf(2.0) - 0.625).abs() < 1e-15);
        assert_eq!(g.cdf(5.0), 1.0);
        assert!((g.moment(1).unwrap() - (0.25 * 0.5 + 0.75 * 2.0)).abs() < 1e-14);
    }

    #[test]
    fn grid_csv_and_json_round_trip() {
        let g = GridMeasure::new(vec![-1.0, 0.0, 0.5, 2.0], vec![0.2, 0.3, 0.5]).unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("node_left,node_right,mass\n"));
        let back = GridMeasure::from_csv(&csv).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        for (a, b) in back.masses().iter().zip(g.masses()) {
            assert!((a - b).abs() < 1e-15);
        }
        let j = GridMeasure::from_json(&g.to_json()).unwrap();
        assert_eq!(j, g);
    }

    #[test]
    fn ks_against_uniform() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_distance(&s, |x| x.clamp(0.0, 1.0)) - 0.005).abs() < 1e-12);
        assert_eq!(ks_two_sample(&s, &s), 0.0);
    }
}
