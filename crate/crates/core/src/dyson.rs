//! Interacting-particle SDEs: Dyson, generalized log-gas, Ornstein–Uhlenbeck and Wishart
//! families, with energy monitoring, the Johansson transition density and the empirical
//! measure martingale.

use crate::ensembles::{eigenvalues_hermitian, sample_goe, sample_gue, sample_wishart};
use crate::error::{invalid, Error, Result};
use crate::rng::NormalSource;
use crate::special::ln_factorial;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Per-pair interaction cap is 1/REG_EPS.
pub const REG_EPS: f64 = 1e-8;
pub const MAX_HALVINGS: u32 = 20;
pub const JOHANSSON_MAX_N: usize = 10;
pub const VANDERMONDE_MAX_N: usize = 12;
pub const MIN_MARTINGALE_RECORDS: usize = 100;
/// Fraction of the local gap a particle may drift in one step.
pub const STEP_GAP_FRACTION: f64 = 0.5;
/// The step follows this quantile of the per-particle gap/drift ratios, not the minimum.
/// Tracking the single tightest pair holds it at the step size where Euler most often
/// lands a gap near zero; shorter-lived outliers are pushed apart by the explicit drift.
pub const STIFF_QUANTILE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Dyson { beta: u8 },
    Generalized { alpha: f64, beta_n: f64 },
    Ou { theta: f64 },
    Wishart { m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub family: Family,
    pub n: usize,
    pub dt_max: f64,
    pub t_end: f64,
    pub record_times: Vec<f64>,
    pub ordering_guard: bool,
}

impl SdeConfig {
    pub fn new(family: Family, n: usize, dt_max: f64, t_end: f64, record_times: Vec<f64>) -> Result<Self> {
        let c = Self { family, n, dt_max, t_end, record_times, ordering_guard: true };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return invalid("N must be at least 1");
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) || !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return invalid("dt_max and t_end must be positive");
        }
        match self.family {
            Family::Dyson { beta } if beta != 1 && beta != 2 => return invalid("dyson beta must be 1 or 2"),
            Family::Generalized { alpha, beta_n } if !(alpha > 0.0 && beta_n > 0.0) => {
                return invalid("alpha_N and beta_N must be positive")
            }
            Family::Ou { theta } if !(theta > 0.0) => return invalid("theta must be positive"),
            Family::Wishart { m } if m < self.n => return invalid("wishart requires M >= N"),
            _ => {}
        }
        if self.record_times.windows(2).any(|w| w[1] < w[0]) {
            return invalid("record_times must be sorted");
        }
        if self.record_times.iter().any(|&t| !(t >= 0.0) || t > self.t_end) {
            return invalid("record_times must lie in [0, t_end]");
        }
        Ok(())
    }

    /// (α_N, β_N) of the generalized system, for the families that have one.
    pub fn generalized_coefficients(&self) -> Option<(f64, f64)> {
        let n = self.n as f64;
        match self.family {
            Family::Dyson { beta: 2 } => Some((n, 4.0 * n * n)),
            Family::Dyson { .. } => Some((n, 2.0 * n * n)),
            Family::Generalized { alpha, beta_n } => Some((alpha, beta_n)),
            _ => None,
        }
    }

    /// Whether the continuum system is collision-free (β_N ≥ 2N² or its analogue).
    pub fn non_colliding(&self) -> bool {
        let n = self.n as f64;
        match self.family {
            Family::Generalized { beta_n, .. } => beta_n >= 2.0 * n * n,
            _ => true,
        }
    }

    /// Coefficient c in the interaction drift c·Σ_{j≠i} k(x_i, x_j).
    fn interaction_coef(&self) -> f64 {
        let n = self.n as f64;
        match self.family {
            Family::Generalized { alpha, .. } => alpha / (n * n),
            _ => 1.0 / n,
        }
    }

    fn noise_coef(&self, x: f64) -> f64 {
        let n = self.n as f64;
        match self.family {
            Family::Dyson { beta } => (2.0 / (beta as f64 * n)).sqrt(),
            Family::Generalized { alpha, beta_n } => 2.0 * (alpha / beta_n).sqrt(),
            Family::Ou { .. } => (2.0 / n).sqrt(),
            Family::Wishart { .. } => (2.0 * x.max(0.0) / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub t: f64,
    pub positions: Vec<f64>,
}

impl ParticleState {
    pub fn new(t: f64, positions: Vec<f64>) -> Result<Self> {
        let s = Self { t, positions };
        s.check_ordered()?;
        Ok(s)
    }

    pub fn check_ordered(&self) -> Result<()> {
        if self.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularConfiguration("non-finite position".into()));
        }
        if let Some(w) = self.positions.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::SingularConfiguration(format!("positions not strictly increasing at {} >= {}", w[0], w[1])));
        }
        Ok(())
    }

    pub fn min_gap(&self) -> f64 {
        self.positions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

fn capped_inverse(d: f64) -> f64 {
    let cap = 1.0 / REG_EPS;
    (1.0 / d).clamp(-cap, cap)
}

fn pair_kernel(family: &Family, xi: f64, xj: f64) -> f64 {
    match family {
        Family::Wishart { .. } => (xi + xj) * capped_inverse(xi - xj),
        _ => capped_inverse(xi - xj),
    }
}

fn external_drift(config: &SdeConfig, x: f64) -> f64 {
    match config.family {
        Family::Ou { theta } => -theta * x,
        Family::Wishart { m } => m as f64 / config.n as f64,
        _ => 0.0,
    }
}

/// Full double-loop drift.
pub fn drift_reference(state: &ParticleState, config: &SdeConfig) -> Result<Vec<f64>> {
    state.check_ordered()?;
    let x = &state.positions;
    let c = config.interaction_coef();
    Ok((0..x.len())
        .map(|i| {
            let s: f64 = (0..x.len()).filter(|&j| j != i).map(|j| pair_kernel(&config.family, x[i], x[j])).sum();
            c * s + external_drift(config, x[i])
        })
        .collect())
}

fn drift_unchecked(x: &[f64], config: &SdeConfig, out: &mut [f64]) {
    let c = config.interaction_coef();
    out.iter_mut().for_each(|v| *v = 0.0);
    // every family's pair term is antisymmetric in (i, j)
    for i in 0..x.len() {
        let xi = x[i];
        let mut acc = 0.0;
        for j in i + 1..x.len() {
            let k = pair_kernel(&config.family, xi, x[j]);
            acc += k;
            out[j] -= k;
        }
        out[i] += acc;
    }
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = c * *o + external_drift(config, xi);
    }
}

/// Drift with each pair visited once.
pub fn drift(state: &ParticleState, config: &SdeConfig) -> Result<Vec<f64>> {
    state.check_ordered()?;
    let mut out = vec![0.0; state.positions.len()];
    drift_unchecked(&state.positions, config, &mut out);
    Ok(out)
}

fn admissible(y: &[f64], config: &SdeConfig) -> bool {
    if y.iter().any(|v| !v.is_finite()) {
        return false;
    }
    if matches!(config.family, Family::Wishart { .. }) && y.first().is_some_and(|&v| v < 0.0) {
        return false;
    }
    !config.ordering_guard || y.windows(2).all(|w| w[1] > w[0])
}

struct Stepper<'a> {
    config: &'a SdeConfig,
    drift: Vec<f64>,
    rejections: u64,
    reflections: u64,
}

impl Stepper<'_> {
    fn reflect(&self, mut y: Vec<f64>) -> Option<Vec<f64>> {
        if !self.config.non_colliding() || !self.config.ordering_guard {
            return None;
        }
        y.sort_by(f64::total_cmp);
        admissible(&y, self.config).then_some(y)
    }

    /// Walks the bridge tree depth first; no substep is cut more than MAX_HALVINGS times.
    fn advance<R: NormalSource>(&mut self, x0: &[f64], t0: f64, h0: f64, dw0: Vec<f64>, rng: &mut R) -> Result<Vec<f64>> {
        let mut x = x0.to_vec();
        let mut t = t0;
        let mut pending = vec![(h0, dw0, 0u32)];
        while let Some((h, dw, depth)) = pending.pop() {
            drift_unchecked(&x, self.config, &mut self.drift);
            let y: Vec<f64> = (0..x.len())
                .map(|i| x[i] + self.drift[i] * h + self.config.noise_coef(x[i]) * dw[i])
                .collect();
            if admissible(&y, self.config) {
                x = y;
                t += h;
                continue;
            }
            if depth >= MAX_HALVINGS {
                // The refined path has reached a pair below the resolution of the capped drift.
                // A collision-free system cannot meet there, so the pair is reflected.
                if let Some(sorted) = self.reflect(y) {
                    x = sorted;
                    t += h;
                    self.reflections += 1;
                    continue;
                }
                return Err(Error::CollisionAbort { t, halvings: depth, positions: x });
            }
            self.rejections += 1;
            // Brownian bridge: W(h/2) | W(h) ~ N(W(h)/2, h/4)
            let sd = (h / 4.0).sqrt();
            let first: Vec<f64> = dw.iter().map(|&w| 0.5 * w + rng.normal(sd)).collect();
            let second: Vec<f64> = dw.iter().zip(&first).map(|(w, a)| w - a).collect();
            pending.push((h / 2.0, second, depth + 1));
            pending.push((h / 2.0, first, depth + 1));
        }
        Ok(x)
    }
}

/// One accepted step, the number of halvings it needed and the pairs reflected at the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: ParticleState,
    pub rejections: u64,
    pub reflections: u64,
}

/// Euler–Maruyama step of length dt, halved with bridge splitting on ordering violations.
pub fn step_counted<R: NormalSource>(state: &ParticleState, dt: f64, config: &SdeConfig, rng: &mut R) -> Result<StepOutcome> {
    if !(dt > 0.0) || dt > config.dt_max * (1.0 + 1e-12) {
        return invalid(format!("dt = {dt} must lie in (0, dt_max]"));
    }
    state.check_ordered()?;
    let sd = dt.sqrt();
    let dw: Vec<f64> = (0..state.positions.len()).map(|_| rng.normal(sd)).collect();
    let mut stepper = Stepper { config, drift: vec![0.0; state.positions.len()], rejections: 0, reflections: 0 };
    let y = stepper.advance(&state.positions, state.t, dt, dw, rng)?;
    Ok(StepOutcome {
        state: ParticleState { t: state.t + dt, positions: y },
        rejections: stepper.rejections,
        reflections: stepper.reflections,
    })
}

pub fn step<R: NormalSource>(state: &ParticleState, dt: f64, config: &SdeConfig, rng: &mut R) -> Result<ParticleState> {
    Ok(step_counted(state, dt, config, rng)?.state)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    State(ParticleState),
    ZeroStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_gap: f64,
    pub rejections: u64,
    /// Substeps accepted by reflecting a pair at the halving limit.
    pub reflections: u64,
    pub steps: u64,
    pub start_time: f64,
    /// Containment energy 𝓔 at each record time.
    pub energy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub config: SdeConfig,
    pub states: Vec<ParticleState>,
    pub diagnostics: Diagnostics,
}

impl TrajectoryRecord {
    /// CSV rows `t,i,position`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,i,position\n");
        for st in &self.states {
            for (i, x) in st.positions.iter().enumerate() {
                s.push_str(&format!("{},{},{}\n", st.t, i, x));
            }
        }
        s
    }

    /// JSON summary: config, diagnostics and final positions.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "diagnostics": self.diagnostics,
            "final": self.states.last(),
        })
    }
}

fn zero_start_state<R: NormalSource>(config: &SdeConfig, rng: &mut R) -> Result<ParticleState> {
    let n = config.n;
    let nf = n as f64;
    let t0 = config.dt_max / 100.0;
    let values: Vec<f64> = match config.family {
        Family::Dyson { beta: 2 } => eig(&sample_gue(n, rng)?, (t0 / nf).sqrt())?,
        Family::Dyson { .. } => eig(&sample_goe(n, rng)?, (2.0 * t0 / nf).sqrt())?,
        Family::Generalized { alpha, beta_n } => {
            // noise 2√(α/β_N) corresponds to a GUE increment of variance 4α/β_N·t
            eig(&sample_gue(n, rng)?, (4.0 * alpha / beta_n * t0).sqrt())?
        }
        Family::Ou { theta } => {
            let var = (1.0 - (-2.0 * theta * t0).exp()) / (2.0 * theta);
            eig(&sample_goe(n, rng)?, (2.0 * var / nf).sqrt())?
        }
        Family::Wishart { m } => eig(&sample_wishart(n, m, rng)?, t0 * m as f64 / nf)?,
    };
    ParticleState::new(t0, values)
}

fn eig(m: &crate::ensembles::HermitianMatrix, scale: f64) -> Result<Vec<f64>> {
    Ok(eigenvalues_hermitian(m)?.real().unwrap().iter().map(|v| v * scale).collect())
}

/// Integrate from the initial condition to t_end, recording at record_times.
pub fn simulate<R: NormalSource>(config: &SdeConfig, rng: &mut R, initial: InitialCondition) -> Result<TrajectoryRecord> {
    config.validate()?;
    let mut state = match initial {
        InitialCondition::State(s) => {
            if s.positions.len() != config.n {
                return invalid("initial state size does not match N");
            }
            s.check_ordered()?;
            s
        }
        InitialCondition::ZeroStart => zero_start_state(config, rng)?,
    };
    let start = state.t;
    if config.record_times.iter().any(|&t| t < start) {
        return invalid(format!("record times must be >= start time {start}"));
    }
    let mut diag = Diagnostics { min_gap: state.min_gap(), rejections: 0, reflections: 0, steps: 0, start_time: start, energy: Vec::new() };
    let mut states = Vec::with_capacity(config.record_times.len());
    let mut rec = 0usize;
    let mut work = vec![0.0; config.n];
    let mut ratios = Vec::with_capacity(config.n);
    let emit = |st: &ParticleState, states: &mut Vec<ParticleState>, diag: &mut Diagnostics| -> Result<()> {
        diag.energy.push(energy(st, config)?.e);
        states.push(st.clone());
        Ok(())
    };
    while rec < config.record_times.len() && config.record_times[rec] <= state.t {
        emit(&state, &mut states, &mut diag)?;
        rec += 1;
    }
    let t_stop = config.t_end;
    while state.t < t_stop * (1.0 - 1e-15) {
        let target = config.record_times.get(rec).copied().unwrap_or(t_stop).min(t_stop);
        drift_unchecked(&state.positions, config, &mut work);
        let x = &state.positions;
        ratios.clear();
        for i in 0..x.len() {
            let left = if i > 0 { x[i] - x[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < x.len() { x[i + 1] - x[i] } else { f64::INFINITY };
            let gap = left.min(right);
            let d = work[i].abs();
            if d > 0.0 && gap.is_finite() {
                ratios.push(gap / d);
            }
        }
        let stiff = if ratios.is_empty() {
            f64::INFINITY
        } else {
            let k = ((STIFF_QUANTILE * ratios.len() as f64) as usize).min(ratios.len() - 1);
            *ratios.select_nth_unstable_by(k, f64::total_cmp).1
        };
        let mut dt = (STEP_GAP_FRACTION * stiff).min(config.dt_max);
        let remaining = target - state.t;
        let hit = dt >= remaining;
        if hit {
            dt = remaining;
        }
        let out = step_counted(&state, dt, config, rng)?;
        diag.rejections += out.rejections;
        diag.reflections += out.reflections;
        diag.steps += 1;
        state = out.state;
        if hit {
            state.t = target;
        }
        diag.min_gap = diag.min_gap.min(state.min_gap());
        while rec < config.record_times.len() && config.record_times[rec] <= state.t * (1.0 + 1e-15) {
            emit(&state, &mut states, &mut diag)?;
            rec += 1;
        }
    }
    Ok(TrajectoryRecord { config: config.clone(), states, diagnostics: diag })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub e_v: f64,
    pub e_w: f64,
    pub e: f64,
    /// Closed-form generator applied to 𝓔; present for families with (α_N, β_N).
    pub le: Option<f64>,
    pub lower_bound: f64,
}

/// 𝓔 = (1/N)Σx_i² − (1/2N²)Σ_{i≠j} log (x_i − x_j)² and L𝓔.
pub fn energy(state: &ParticleState, config: &SdeConfig) -> Result<EnergyReport> {
    state.check_ordered()?;
    let x = &state.positions;
    let n = x.len() as f64;
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let e_v = sq / n;
    let mut logs = 0.0;
    let mut inv_sq = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = x[j] - x[i];
            logs += d.ln();
            inv_sq += 1.0 / (d * d);
        }
    }
    let e_w = -2.0 * logs / (n * n);
    let le = config.generalized_coefficients().map(|(a, b)| {
        4.0 * a / b + a * (n - 1.0) / (n * n) + (4.0 * a / (n * n * b) - 2.0 * a / n.powi(4)) * 2.0 * inv_sq
    });
    Ok(EnergyReport { e_v, e_w, e: e_v + e_w, le, lower_bound: sq / (2.0 * n) + 1.0 / 16.0 })
}

/// Π_{i<j}(λ_j − λ_i) as (ln|Δ|, sign).
fn ln_vandermonde(l: &[f64]) -> (f64, f64) {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let d = l[j] - l[i];
            if d < 0.0 {
                sign = -sign;
            }
            ln += d.abs().ln();
        }
    }
    (ln, sign)
}

/// ln|det| and sign by partial pivoting.
fn ln_det(mut a: Vec<Vec<f64>>) -> (f64, f64) {
    let k = a.len();
    let mut ln = 0.0;
    let mut sign = 1.0;
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            sign = -sign;
        }
        let p = a[col][col];
        if p < 0.0 {
            sign = -sign;
        }
        ln += p.abs().ln();
        for r in col + 1..k {
            let f = a[r][col] / p;
            for c in col..k {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
        }
    }
    (ln, sign)
}

/// Transition density on ℝ^N (exchangeable) of dλ_i = Σ_{j≠i} 1/(λ_i − λ_j) dt + dB_i
/// from λ0 (None or all zeros → zero-start closed form).
pub fn johansson_density(n: usize, t: f64, lambda0: Option<&[f64]>, lambda: &[f64]) -> Result<f64> {
    if n == 0 || lambda.len() != n {
        return invalid("lambda must have N entries, N >= 1");
    }
    if n > JOHANSSON_MAX_N {
        return Err(Error::UnsupportedSize { size: n, max: JOHANSSON_MAX_N });
    }
    if !(t > 0.0) {
        return invalid("t must be positive");
    }
    let nf = n as f64;
    let sq: f64 = lambda.iter().map(|v| v * v).sum();
    let zero = match lambda0 {
        None => true,
        Some(l0) => {
            if l0.len() != n {
                return invalid("lambda0 must have N entries");
            }
            if l0.iter().all(|&v| v == 0.0) {
                true
            } else {
                ParticleState::new(0.0, l0.to_vec())?;
                false
            }
        }
    };
    let (ln_d, _) = ln_vandermonde(lambda);
    if ln_d == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if zero {
        // exp(−|λ|²/2t) Δ(λ)Δ(λ/t) / ((2πt)^{N/2} Π_{k=1}^N k!)
        let ln_norm = 0.5 * nf * (2.0 * PI * t).ln() + (1..=n).map(ln_factorial).sum::<f64>();
        let ln_rho = -sq / (2.0 * t) + 2.0 * ln_d - 0.5 * nf * (nf - 1.0) * t.ln() - ln_norm;
        return Ok(ln_rho.exp());
    }
    let l0 = lambda0.unwrap();
    let (ln_d0, _) = ln_vandermonde(l0);
    let mut shift = 0.0;
    let m: Vec<Vec<f64>> = lambda
        .iter()
        .map(|&li| {
            let row: Vec<f64> = l0.iter().map(|&lj| -(li - lj).powi(2) / (2.0 * t)).collect();
            let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            shift += mx;
            row.iter().map(|v| (v - mx).exp()).collect()
        })
        .collect();
    let (ln_m, sign_m) = ln_det(m);
    let (_, sign_d) = ln_vandermonde(lambda);
    let sign = sign_m * sign_d;
    if sign <= 0.0 {
        // roundoff in a vanishing determinant
        return Ok(0.0);
    }
    let ln_rho = ln_d - ln_d0 + ln_m + shift - ln_factorial(n) - 0.5 * nf * (2.0 * PI * t).ln();
    Ok(ln_rho.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VandermondeReport {
    pub delta: f64,
    pub laplacian_fd: f64,
}

/// Π_{i<j}(λ_j − λ_i).
pub fn vandermonde(lambda: &[f64]) -> f64 {
    let mut p = 1.0;
    for i in 0..lambda.len() {
        for j in i + 1..lambda.len() {
            p *= lambda[j] - lambda[i];
        }
    }
    p
}

/// Δ_N and its Laplacian by central differences with h = 1e−4.
pub fn vandermonde_and_harmonicity(lambda: &[f64]) -> Result<VandermondeReport> {
    if lambda.len() > VANDERMONDE_MAX_N {
        return Err(Error::UnsupportedSize { size: lambda.len(), max: VANDERMONDE_MAX_N });
    }
    let h = 1e-4;
    let d0 = vandermonde(lambda);
    let mut lap = 0.0;
    let mut p = lambda.to_vec();
    for i in 0..lambda.len() {
        p[i] = lambda[i] + h;
        let up = vandermonde(&p);
        p[i] = lambda[i] - h;
        let down = vandermonde(&p);
        p[i] = lambda[i];
        lap += (up - 2.0 * d0 + down) / (h * h);
    }
    Ok(VandermondeReport { delta: d0, laplacian_fd: lap })
}

/// Test function with bounded f, f′, f″ and a known sup|f′|.
pub struct TestFunction {
    pub f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub df: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub sup_df: f64,
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        Self { f: Box::new(move |_| c), df: Box::new(|_| 0.0), d2f: Box::new(|_| 0.0), sup_df: 0.0 }
    }

    /// f(x) = x; unbounded, but its drift terms vanish identically.
    pub fn identity() -> Self {
        Self { f: Box::new(|x| x), df: Box::new(|_| 1.0), d2f: Box::new(|_| 0.0), sup_df: 1.0 }
    }

    pub fn log_one_plus_square() -> Self {
        Self {
            f: Box::new(|x| (1.0 + x * x).ln()),
            df: Box::new(|x| 2.0 * x / (1.0 + x * x)),
            d2f: Box::new(|x| 2.0 * (1.0 - x * x) / (1.0 + x * x).powi(2)),
            sup_df: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub times: Vec<f64>,
    pub path: Vec<f64>,
    pub bracket_bound: f64,
}

/// Drift density of ⟨μ_N, f⟩ for the β = 1 system: ½∫∫ (f′(x) − f′(y))/(x − y) dμdμ + (1/2N)⟨μ, f″⟩,
/// with the diagonal integrand read as f″.
fn ito_drift(x: &[f64], f: &TestFunction) -> f64 {
    let n = x.len() as f64;
    let dfs: Vec<f64> = x.iter().map(|&v| (f.df)(v)).collect();
    let d2: f64 = x.iter().map(|&v| (f.d2f)(v)).sum();
    let mut off = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            off += (dfs[i] - dfs[j]) / (x[i] - x[j]);
        }
    }
    let double = (2.0 * off + d2) / (n * n);
    0.5 * double + d2 / (2.0 * n * n)
}

/// M_f^N along the record grid: ⟨μ_N(t), f⟩ − ⟨μ_N(t₀), f⟩ minus the trapezoid-integrated drift.
pub fn martingale_residual(trajectory: &TrajectoryRecord, f: &TestFunction) -> Result<MartingaleReport> {
    if trajectory.config.family != (Family::Dyson { beta: 1 }) {
        return invalid("martingale residual needs a dyson beta = 1 trajectory");
    }
    let states = &trajectory.states;
    if states.len() < MIN_MARTINGALE_RECORDS {
        return Err(Error::InsufficientResolution(format!(
            "{} records, need at least {MIN_MARTINGALE_RECORDS}",
            states.len()
        )));
    }
    let n = trajectory.config.n as f64;
    let pair = |s: &ParticleState| -> (f64, f64) {
        let mean = s.positions.iter().map(|&v| (f.f)(v)).sum::<f64>() / n;
        (mean, ito_drift(&s.positions, f))
    };
    let (m0, mut prev_drift) = pair(&states[0]);
    let mut integral = 0.0;
    let mut path = vec![0.0];
    let mut times = vec![states[0].t];
    for w in states.windows(2) {
        let (m1, d1) = pair(&w[1]);
        integral += 0.5 * (prev_drift + d1) * (w[1].t - w[0].t);
        prev_drift = d1;
        path.push(m1 - m0 - integral);
        times.push(w[1].t);
    }
    let span = states.last().unwrap().t - states[0].t;
    Ok(MartingaleReport { times, path, bracket_bound: 2.0 * span * f.sup_df * f.sup_df / (n * n) })
}
