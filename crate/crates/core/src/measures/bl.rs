//! Bounded-Lipschitz distance sup{∫f d(μ−ν) : ‖f‖∞ + ‖f‖_lip ≤ 1} on the real line.
//!
//! For fixed sup-bound A and Lipschitz bound L the supremum g(A, L) is computed exactly by
//! a forward dynamic program over concave piecewise-linear value functions of f(x_i).
//! g(t, 1 − t) is concave in t and maximised by golden-section search.

use super::{EmpiricalMeasure, GridMeasure, PlanarMeasure, ReferenceLaw};
use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Merged supports above this size use the capped-W1 approximation.
pub const BL_EXACT_MAX_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlMode {
    Exact,
    CappedW1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlResult {
    pub value: f64,
    pub mode: BlMode,
    /// Optimal split between sup-norm and Lipschitz budgets (sup part).
    pub sup_budget: f64,
}

/// A finite real measure as (position, mass) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedAtoms {
    points: Vec<(f64, f64)>,
}

impl SignedAtoms {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(x, m)| !x.is_finite() || !m.is_finite()) {
            return invalid("non-finite atom");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn total_mass(&self) -> f64 {
        self.points.iter().map(|p| p.1).sum()
    }

    /// Continuous part on `cells` cells (half-masses at cell endpoints) plus atoms.
    pub fn from_law(law: &ReferenceLaw, cells: usize) -> Result<Self> {
        if law.is_planar() {
            return Err(Error::Unsupported("planar law".into()));
        }
        let atom_mass: f64 = law.atoms().iter().map(|a| a.1).sum();
        let g = law.to_grid(cells)?;
        let mut pts = grid_points(&g, 1.0 - atom_mass);
        pts.extend(law.atoms());
        Self::new(pts)
    }
}

fn grid_points(g: &GridMeasure, total: f64) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(2 * g.cells());
    for k in 0..g.cells() {
        let h = 0.5 * g.masses()[k] * total;
        pts.push((g.nodes()[k], h));
        pts.push((g.nodes()[k + 1], h));
    }
    pts
}

impl From<&EmpiricalMeasure> for SignedAtoms {
    fn from(m: &EmpiricalMeasure) -> Self {
        let w = m.weight();
        Self { points: m.atoms().iter().map(|&x| (x, w)).collect() }
    }
}

impl From<&GridMeasure> for SignedAtoms {
    fn from(g: &GridMeasure) -> Self {
        Self { points: grid_points(g, 1.0) }
    }
}

impl TryFrom<&PlanarMeasure> for SignedAtoms {
    type Error = Error;
    fn try_from(_: &PlanarMeasure) -> Result<Self> {
        Err(Error::Unsupported("bounded-Lipschitz distance is implemented for real measures".into()))
    }
}

/// Positions with signed mass differences μ − ν, sorted, merged, zero entries dropped.
fn merge(mu: &SignedAtoms, nu: &SignedAtoms) -> Vec<(f64, f64)> {
    let mut all: Vec<(f64, f64)> = mu.points.iter().copied().chain(nu.points.iter().map(|&(x, m)| (x, -m))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(all.len());
    for (x, d) in all {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += d,
            _ => out.push((x, d)),
        }
    }
    out.retain(|p| p.1 != 0.0);
    out
}

#[derive(Clone, Copy)]
struct Seg {
    raw_slope: f64,
    len: f64,
}

/// Concave piecewise-linear function on [−A, A] stored as slope segments split at the maximiser.
struct Profile {
    left: VecDeque<Seg>,
    right: VecDeque<Seg>,
    offset: f64,
    value_at_left: f64,
}

impl Profile {
    fn slope(&self, s: &Seg) -> f64 {
        s.raw_slope + self.offset
    }

    fn rebalance(&mut self) {
        while let Some(s) = self.left.back() {
            if self.slope(s) > 0.0 {
                break;
            }
            let s = self.left.pop_back().unwrap();
            self.right.push_front(s);
        }
        while let Some(s) = self.right.front() {
            if self.slope(s) <= 0.0 {
                break;
            }
            let s = self.right.pop_front().unwrap();
            self.left.push_back(s);
        }
    }

    /// Remove `amount` of length from the left end, tracking the left-end value.
    fn trim_left(&mut self, mut amount: f64) {
        while amount > 0.0 {
            let off = self.offset;
            let seg = match self.left.front_mut() {
                Some(s) => s,
                None => match self.right.front_mut() {
                    Some(s) => s,
                    None => return,
                },
            };
            let take = amount.min(seg.len);
            self.value_at_left += (seg.raw_slope + off) * take;
            seg.len -= take;
            amount -= take;
            if seg.len <= 0.0 {
                if !self.left.is_empty() {
                    self.left.pop_front();
                } else {
                    self.right.pop_front();
                }
            }
        }
    }

    fn trim_right(&mut self, mut amount: f64) {
        while amount > 0.0 {
            let seg = match self.right.back_mut() {
                Some(s) => s,
                None => match self.left.back_mut() {
                    Some(s) => s,
                    None => return,
                },
            };
            let take = amount.min(seg.len);
            seg.len -= take;
            amount -= take;
            if seg.len <= 0.0 {
                if !self.right.is_empty() {
                    self.right.pop_back();
                } else {
                    self.left.pop_back();
                }
            }
        }
    }

    fn max_value(&self) -> f64 {
        self.value_at_left + self.left.iter().map(|s| self.slope(s) * s.len).sum::<f64>()
    }
}

/// sup Σ d_i f(x_i) over |f| ≤ a, Lipschitz ≤ l.
fn bounded_lipschitz_value(pts: &[(f64, f64)], a: f64, l: f64) -> f64 {
    if pts.is_empty() || a <= 0.0 || l <= 0.0 {
        return 0.0;
    }
    let d0 = pts[0].1;
    let mut p = Profile {
        left: VecDeque::new(),
        right: VecDeque::new(),
        offset: d0,
        value_at_left: -a * d0,
    };
    p.right.push_back(Seg { raw_slope: 0.0, len: 2.0 * a });
    p.rebalance();
    for w in pts.windows(2) {
        let delta = l * (w[1].0 - w[0].0);
        let d = w[1].1;
        // window max: flat piece at the maximiser, domain grows by δ each side, then clip
        p.right.push_front(Seg { raw_slope: -p.offset, len: 2.0 * delta });
        p.trim_left(delta);
        p.trim_right(delta);
        p.offset += d;
        p.value_at_left -= a * d;
        p.rebalance();
    }
    p.max_value()
}

/// Capped-W1 lower bound: the W1 potential, scaled by (1−t) and clipped to [−t, t].
fn capped_w1_value(pts: &[(f64, f64)], t: f64) -> f64 {
    let mut phi = Vec::with_capacity(pts.len());
    let mut f = 0.0;
    let mut cum = 0.0;
    for (k, &(x, d)) in pts.iter().enumerate() {
        if k > 0 {
            f += -(cum as f64).signum() * (x - pts[k - 1].0);
        }
        phi.push(f);
        cum += d;
    }
    let (lo, hi) = phi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let centre = 0.5 * (lo + hi);
    pts.iter().zip(&phi).map(|(&(_, d), &v)| d * ((1.0 - t) * (v - centre)).clamp(-t, t)).sum()
}

fn golden_max(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    let ft = f(t);
    [(t, ft), (c, fc), (d, fd)].into_iter().fold((t, ft), |best, p| if p.1 > best.1 { p } else { best })
}

/// Bounded-Lipschitz distance between two probability measures on the line.
pub fn bl_distance(mu: &SignedAtoms, nu: &SignedAtoms) -> Result<BlResult> {
    bl_distance_with(mu, nu, BL_EXACT_MAX_POINTS)
}

/// As [`bl_distance`] with a custom exact-mode size limit.
pub fn bl_distance_with(mu: &SignedAtoms, nu: &SignedAtoms, exact_max_points: usize) -> Result<BlResult> {
    for (name, m) in [("first", mu), ("second", nu)] {
        if (m.total_mass() - 1.0).abs() > 1e-9 {
            return invalid(format!("{name} measure has total mass {}", m.total_mass()));
        }
        if m.points.iter().any(|p| p.1 < 0.0) {
            return invalid(format!("{name} measure has negative mass"));
        }
    }
    let pts = merge(mu, nu);
    if pts.is_empty() {
        return Ok(BlResult { value: 0.0, mode: BlMode::Exact, sup_budget: 0.0 });
    }
    let (mode, (t, v)) = if pts.len() <= exact_max_points {
        (BlMode::Exact, golden_max(|t| bounded_lipschitz_value(&pts, t, 1.0 - t)))
    } else {
        (BlMode::CappedW1, golden_max(|t| capped_w1_value(&pts, t)))
    };
    Ok(BlResult { value: v.max(0.0), mode, sup_budget: t })
}
