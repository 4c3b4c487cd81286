//! Log-gas energy functionals on grid measures, the Selberg normalization, Frostman
//! residuals, an equilibrium-measure solver and large-deviation probes.

use crate::ensembles::{eigenvalues_hermitian, sample_goe, sample_gue};
use crate::error::{invalid, Error, Result};
use crate::measures::{bl_distance, log_potential_semicircle, EmpiricalMeasure, GridMeasure, ReferenceLaw, SignedAtoms};
use crate::rng::RngStream;
use crate::special::ln_gamma;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const MAX_ENTROPY_CELLS: usize = 4096;
pub const SELBERG_MAX_N: usize = 10_000;
pub const FROSTMAN_MASS_TOL: f64 = 1e-6;
/// Cells used to discretize σ_β when measuring distances to it.
pub const REFERENCE_CELLS: usize = 4096;

/// Φ with Φ″(u) = log|u|.
fn phi(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.75 * u * u
    }
}

/// Mean of log|x − y| over x ∈ [a, b], y ∈ [c, d] (uniform), a < b, c < d.
fn cell_pair_log(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let num = phi(b - c) - phi(a - c) - phi(b - d) + phi(a - d);
    num / ((b - a) * (d - c))
}

/// Mean of log|x − y| over a cell of width w paired with itself.
fn self_cell_log(w: f64) -> f64 {
    w.ln() - 1.5
}

fn check_cells(mu: &GridMeasure) -> Result<()> {
    if mu.cells() > MAX_ENTROPY_CELLS {
        return Err(Error::UnsupportedSize { size: mu.cells(), max: MAX_ENTROPY_CELLS });
    }
    let (lo, hi) = mu.support_bounds();
    if !lo.is_finite() || !hi.is_finite() {
        return invalid("grid measure must have bounded support");
    }
    Ok(())
}

fn log_entry(nodes: &[f64], c: usize, d: usize) -> f64 {
    if c == d {
        self_cell_log(nodes[c + 1] - nodes[c])
    } else {
        cell_pair_log(nodes[c], nodes[c + 1], nodes[d], nodes[d + 1])
    }
}

/// Σ(μ) = ∫∫ log|x − y| dμ dμ with exact per-cell-pair integrals.
pub fn free_entropy(mu: &GridMeasure) -> Result<f64> {
    check_cells(mu)?;
    let nodes = mu.nodes();
    let m = mu.masses();
    // row sums collected in order so the total does not depend on the thread count
    let rows: Vec<f64> = (0..m.len())
        .into_par_iter()
        .map(|c| {
            if m[c] == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for d in 0..m.len() {
                if m[d] != 0.0 {
                    s += m[d] * log_entry(nodes, c, d);
                }
            }
            m[c] * s
        })
        .collect();
    Ok(rows.iter().sum())
}

/// Cell means of x²/2.
fn half_square_means(mu: &GridMeasure) -> Vec<f64> {
    mu.nodes().windows(2).map(|w| (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 6.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub sigma_entropy: f64,
    pub potential: f64,
    pub h_beta: f64,
    pub i_beta: f64,
    pub f_beta: f64,
    pub beta: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        invalid("beta must be positive")
    }
}

/// H_β(μ) = −(β/2)Σ(μ) + ∫ x²/2 dμ and I_β = H_β + F(β).
pub fn energy_h(mu: &GridMeasure, beta: f64) -> Result<EnergyBreakdown> {
    check_beta(beta)?;
    let sigma = free_entropy(mu)?;
    let potential: f64 = half_square_means(mu).iter().zip(mu.masses()).map(|(v, m)| v * m).sum();
    let h = -0.5 * beta * sigma + potential;
    let f = f_constant(beta)?;
    Ok(EnergyBreakdown { sigma_entropy: sigma, potential, h_beta: h, i_beta: h + f, f_beta: f, beta })
}

/// H_β as ½∫∫ f_β with f_β(x, y) = (x² + y²)/2 − β log|x − y|, assembled pairwise.
pub fn energy_h_direct(mu: &GridMeasure, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_cells(mu)?;
    let v = half_square_means(mu);
    let nodes = mu.nodes();
    let m = mu.masses();
    let rows: Vec<f64> = (0..m.len())
        .into_par_iter()
        .map(|c| {
            let mut s = 0.0;
            for d in 0..m.len() {
                s += m[d] * (v[c] + v[d] - beta * log_entry(nodes, c, d));
            }
            m[c] * s
        })
        .collect();
    Ok(0.5 * rows.iter().sum::<f64>())
}

/// F(β) = (β/4) log(β/2) − 3β/8, the limit of (1/N²) log Z_β^N.
pub fn f_constant(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(0.25 * beta * (0.5 * beta).ln() - 0.375 * beta)
}

/// log Z_β^N for Z_β^N = ∫ |Δ(λ)|^β exp(−(N/2)|λ|²) dλ over ℝ^N.
pub fn selberg_log_z(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n == 0 {
        return invalid("N must be at least 1");
    }
    if n > SELBERG_MAX_N {
        return Err(Error::OverflowGuard(format!("N = {n} exceeds cap {SELBERG_MAX_N}")));
    }
    let nf = n as f64;
    let mut s = 0.5 * nf * (2.0 * PI).ln() - (0.5 * nf + 0.25 * beta * nf * (nf - 1.0)) * nf.ln() - nf * ln_gamma(1.0 + 0.5 * beta);
    for j in 1..=n {
        s += ln_gamma(1.0 + 0.5 * beta * j as f64);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub c_beta: f64,
    pub residual_sup: f64,
    pub inequality_violations: usize,
    pub support_cells: usize,
}

/// U(x) = ∫ log|x − y| dμ(y) at the given points.
pub fn log_potential(mu: &GridMeasure, xs: &[f64]) -> Vec<f64> {
    let f1 = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
    let nodes = mu.nodes();
    let m = mu.masses();
    xs.par_iter()
        .map(|&x| {
            let mut s = 0.0;
            for d in 0..m.len() {
                if m[d] != 0.0 {
                    let (a, b) = (nodes[d], nodes[d + 1]);
                    s += m[d] / (b - a) * (f1(x - a) - f1(x - b));
                }
            }
            s
        })
        .collect()
}

/// Fit βU(x) − x²/2 = c on cells with mass > 1e−6 and count off-support cells where the
/// inequality βU ≤ x²/2 + c fails by more than 1e−6.
pub fn frostman_residual(mu: &GridMeasure, beta: f64) -> Result<FrostmanReport> {
    check_beta(beta)?;
    let xs: Vec<f64> = (0..mu.cells()).map(|k| mu.midpoint(k)).collect();
    let on: Vec<bool> = mu.masses().iter().map(|&m| m > FROSTMAN_MASS_TOL).collect();
    let support_cells = on.iter().filter(|&&b| b).count();
    if support_cells < 2 {
        return invalid(format!("effective support has {support_cells} cell(s); the measure is atom-like"));
    }
    let u = log_potential(mu, &xs);
    let g: Vec<f64> = xs.iter().zip(&u).map(|(x, u)| beta * u - 0.5 * x * x).collect();
    let c = g.iter().zip(&on).filter(|p| *p.1).map(|p| p.0).sum::<f64>() / support_cells as f64;
    let mut residual_sup: f64 = 0.0;
    let mut violations = 0;
    for (gk, &o) in g.iter().zip(&on) {
        if o {
            residual_sup = residual_sup.max((gk - c).abs());
        } else if *gk > c + 1e-6 {
            violations += 1;
        }
    }
    Ok(FrostmanReport { c_beta: c, residual_sup, inequality_violations: violations, support_cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once an accepted step lowers the energy by less than this.
    pub stop_tol: f64,
    pub initial_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { max_iters: 2000, stop_tol: 1e-13, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolveReport {
    pub beta: f64,
    pub iterations: usize,
    pub final_energy: f64,
    pub bl_distance_to_sigma_beta: f64,
    pub converged: bool,
    /// Energy after each accepted step, starting with the initial value.
    pub energy_trace: Vec<f64>,
}

/// Uniform grid on [−√(2β) − 0.5, √(2β) + 0.5].
pub fn equilibrium_grid(beta: f64, cells: usize) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let r = (2.0 * beta).sqrt() + 0.5;
    GridMeasure::uniform_nodes(-r, r, cells)
}

struct Discretized {
    logs: Vec<f64>,
    v: Vec<f64>,
    n: usize,
    beta: f64,
}

impl Discretized {
    fn new(nodes: &[f64], beta: f64) -> Self {
        let n = nodes.len() - 1;
        let logs: Vec<f64> = (0..n * n).into_par_iter().map(|k| log_entry(nodes, k / n, k % n)).collect();
        let v = nodes.windows(2).map(|w| (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 6.0).collect();
        Self { logs, v, n, beta }
    }

    fn apply(&self, m: &[f64]) -> Vec<f64> {
        (0..self.n).map(|c| self.logs[c * self.n..(c + 1) * self.n].iter().zip(m).map(|(l, x)| l * x).sum()).collect()
    }

    /// (energy, gradient) of −(β/2)mᵀLm + vᵀm.
    fn eval(&self, m: &[f64]) -> (f64, Vec<f64>) {
        let lm = self.apply(m);
        let quad: f64 = lm.iter().zip(m).map(|(a, b)| a * b).sum();
        let lin: f64 = self.v.iter().zip(m).map(|(a, b)| a * b).sum();
        let grad = lm.iter().zip(&self.v).map(|(l, v)| -self.beta * l + v).collect();
        (-0.5 * self.beta * quad + lin, grad)
    }
}

/// Minimize the discretized H_β over cell masses by entropic mirror descent with backtracking.
pub fn solve_equilibrium_with(beta: f64, nodes: Vec<f64>, opts: SolverOptions) -> Result<(GridMeasure, EquilibriumSolveReport)> {
    check_beta(beta)?;
    let r = (2.0 * beta).sqrt() + 0.5;
    let cells = nodes.len().saturating_sub(1);
    if cells < 2 {
        return invalid("grid needs at least two cells");
    }
    if cells > MAX_ENTROPY_CELLS {
        return Err(Error::UnsupportedSize { size: cells, max: MAX_ENTROPY_CELLS });
    }
    if nodes[0] > -r + 1e-12 || nodes[cells] < r - 1e-12 {
        return invalid(format!("grid must cover [{:.4}, {:.4}]", -r, r));
    }
    if nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("nodes must be strictly increasing");
    }
    let disc = Discretized::new(&nodes, beta);
    let mut m: Vec<f64> = (0..cells).map(|k| (nodes[k + 1] - nodes[k]) / (nodes[cells] - nodes[0])).collect();
    let (mut e, mut g) = disc.eval(&m);
    let mut trace = vec![e];
    let mut eta = opts.initial_step;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut accepted = false;
        while eta >= 1e-14 {
            let mut cand: Vec<f64> = m.iter().zip(&g).map(|(x, gi)| x * (-eta * (gi - gmin)).exp()).collect();
            let z: f64 = cand.iter().sum();
            cand.iter_mut().for_each(|x| *x /= z);
            let (ec, gc) = disc.eval(&cand);
            if !ec.is_finite() {
                return Err(Error::SolverFailure { message: "energy became non-finite".into(), trace });
            }
            if ec < e {
                let decrease = e - ec;
                m = cand;
                e = ec;
                g = gc;
                trace.push(e);
                eta *= 1.5;
                accepted = true;
                if decrease < opts.stop_tol {
                    converged = true;
                }
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            // no descent direction left at working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    let mu = GridMeasure::new(nodes, m)?;
    let reference = SignedAtoms::from_law(&ReferenceLaw::SemicircleBeta { beta }, REFERENCE_CELLS)?;
    let bl = bl_distance(&SignedAtoms::from(&mu), &reference)?.value;
    let report = EquilibriumSolveReport { beta, iterations, final_energy: e, bl_distance_to_sigma_beta: bl, converged, energy_trace: trace };
    Ok((mu, report))
}

pub fn solve_equilibrium(beta: f64, nodes: Vec<f64>, max_iters: usize) -> Result<(GridMeasure, EquilibriumSolveReport)> {
    solve_equilibrium_with(beta, nodes, SolverOptions { max_iters, ..SolverOptions::default() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdpProbe {
    /// (1/N²) log(count/trials); None when no deviation was observed.
    pub log_freq_over_n2: Option<f64>,
    /// (1/N²) log(1/trials), the smallest resolvable value.
    pub resolution_over_n2: f64,
    pub count: usize,
    pub trials: usize,
    pub mean_distance: f64,
}

/// Frequency of bl_distance(ESD of X/√N, σ_β) ≥ ε over independent GOE (β=1) or GUE (β=2)
/// draws; trial k uses stream k of the seed.
pub fn ldp_probe(beta: u8, n: usize, trials: usize, epsilon: f64, seed: u64) -> Result<LdpProbe> {
    if beta != 1 && beta != 2 {
        return Err(Error::Unsupported(format!("no sampler for beta = {beta}")));
    }
    if trials == 0 {
        return invalid("trials must be positive");
    }
    if n == 0 {
        return invalid("N must be at least 1");
    }
    let reference = SignedAtoms::from_law(&ReferenceLaw::SemicircleBeta { beta: beta as f64 }, REFERENCE_CELLS)?;
    let scale = 1.0 / (n as f64).sqrt();
    let distances: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64);
            let h = if beta == 1 { sample_goe(n, &mut rng)? } else { sample_gue(n, &mut rng)? };
            let spec = eigenvalues_hermitian(&h)?;
            let esd = EmpiricalMeasure::new(spec.real().unwrap().iter().map(|v| v * scale).collect())?;
            Ok(bl_distance(&SignedAtoms::from(&esd), &reference)?.value)
        })
        .collect::<Result<_>>()?;
    let count = distances.iter().filter(|&&d| d >= epsilon).count();
    let n2 = (n * n) as f64;
    let log_freq_over_n2 = (count > 0).then(|| (count as f64 / trials as f64).ln() / n2);
    Ok(LdpProbe {
        log_freq_over_n2,
        resolution_over_n2: -(trials as f64).ln() / n2,
        count,
        trials,
        mean_distance: distances.iter().sum::<f64>() / trials as f64,
    })
}

/// Rate function of the largest eigenvalue of X/√N (real Wigner):
/// x²/2 − ∫ log|x − y| dσ_1(y) − (log 2 + 1)/2 for x ≥ √2, +∞ below.
pub fn largest_eigenvalue_rate(x: f64) -> Result<f64> {
    if x.is_nan() {
        return invalid("x is NaN");
    }
    let edge = 2f64.sqrt();
    if x < edge - 1e-15 {
        return Ok(f64::INFINITY);
    }
    if x <= edge {
        return Ok(0.0);
    }
    Ok((0.5 * x * x - log_potential_semicircle(x, 1.0)? - 0.5 * (2f64.ln() + 1.0)).max(0.0))
}
