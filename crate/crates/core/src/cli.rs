//! Batch experiment driver behind the `rmt-lab` binary.
//!
//! Every command writes `<out>.csv` and `<out>.json` when `--out` is given, otherwise it
//! prints one of them (`--format`). CSV files start with `# rmt-lab <version> config=<json>`;
//! JSON files carry `version`, `schema`, `config` and `result`.

use crate::dyson::{simulate, Family, InitialCondition, SdeConfig};
use crate::ensembles::{eigenvalues_complex, eigenvalues_hermitian, sample_ginibre, sample_goe, sample_gue, sample_wishart, Spectrum};
use crate::error::{invalid, Error, Result};
use crate::kernels::{ginibre_density1, ginibre_kernel, ginibre_kernel_infinite, gue_density1, gue_kernel, gumbel_cdf, hole_probability, sample_ginibre_moduli, GumbelRescale};
use crate::ldp::{energy_h, equilibrium_grid, frostman_residual, solve_equilibrium};
use crate::meanfield::{burgers_residual, solve_characteristic, CharacteristicQuery, Flow};
use crate::measures::{bl_distance, ks_distance, EmpiricalMeasure, PointMass, ReferenceLaw, SignedAtoms};
use crate::rng::RngStream;
use crate::VERSION;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "RMT_LAB_THREADS";
/// Cells used to discretize continuous reference laws for distances.
const REFERENCE_CELLS: usize = 4096;

#[derive(Debug, Parser, Serialize)]
#[command(name = "rmt-lab", version, about = "Random matrix laboratory")]
pub struct Cli {
    /// Worker threads (falls back to RMT_LAB_THREADS, then the hardware count). Never changes results.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Sample matrices and dump spectra: `trial,index,re,im`.
    Sample(SampleArgs),
    /// Compare empirical spectral distributions with a reference law.
    Esd(EsdArgs),
    /// Evaluate determinantal kernels on a line of points: `re,im,density,kernel_diag`.
    Kernel(KernelArgs),
    /// Simulate a particle system: `t,i,position`.
    Dyson(DysonArgs),
    /// Solve Stieltjes characteristics: `t,re_z,im_z,re_S,im_S,residual`.
    Burgers(BurgersArgs),
    /// Solve for the equilibrium measure; CSV is the grid measure.
    Ldp(LdpArgs),
    /// Hole probabilities of the infinite Ginibre process: `r,log_prob,log_prob_over_r4`.
    Holeprob(HoleArgs),
    /// Rescaled Ginibre spectral radii: `trial,rho,rescaled`.
    Gumbel(GumbelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; writes <out>.csv and <out>.json.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// What to print when --out is absent.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gue,
    Goe,
    Ginibre,
    Wishart,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub ensemble: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    /// Wishart column count.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Divide eigenvalues by √n (Gaussian ensembles only).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub normalize: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefKind {
    Semicircle,
    Mp,
    Circular,
}

#[derive(Debug, Args, Serialize)]
pub struct EsdArgs {
    #[arg(long, value_enum)]
    pub ensemble: EnsembleKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long = "ref", value_enum)]
    pub reference: RefKind,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Gue,
    Ginibre,
    GinibreInfinite,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub family: KernelFamily,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Imaginary part of every point (planar families).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub im: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdeFamilyKind {
    Dyson,
    Generalized,
    Ou,
    Wishart,
}

#[derive(Debug, Args, Serialize)]
pub struct DysonArgs {
    #[arg(long, value_enum, default_value_t = SdeFamilyKind::Dyson)]
    pub family: SdeFamilyKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub beta: u8,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta_n: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt_max: f64,
    /// Number of evenly spaced record times ending at t_end.
    #[arg(long, default_value_t = 1)]
    pub record: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Dyson,
    Ou,
}

#[derive(Debug, Args, Serialize)]
pub struct BurgersArgs {
    #[arg(long, value_enum, default_value_t = FlowKind::Dyson)]
    pub flow: FlowKind,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Times (repeatable).
    #[arg(long = "t", required = true)]
    pub times: Vec<f64>,
    /// `re_min,re_max,re_count,im_min,im_max,im_count`; the initial law is δ₀.
    #[arg(long, default_value = "-2,2,5,0.5,2,4", allow_hyphen_values = true)]
    pub z_grid: String,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct LdpArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 512)]
    pub grid_cells: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct HoleArgs {
    /// Radii (repeatable).
    #[arg(long = "r", required = true)]
    pub radii: Vec<f64>,
    /// Truncation K; defaults to ceil(4r²) + 50.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct GumbelArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Output of one command before it is written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv_body: String,
    pub result: Value,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Sample(a) => &a.common,
            Command::Esd(a) => &a.common,
            Command::Kernel(a) => &a.common,
            Command::Dyson(a) => &a.common,
            Command::Burgers(a) => &a.common,
            Command::Ldp(a) => &a.common,
            Command::Holeprob(a) => &a.common,
            Command::Gumbel(a) => &a.common,
        }
    }
}

fn draw_spectrum(kind: EnsembleKind, n: usize, m: Option<usize>, rng: &mut RngStream) -> Result<Spectrum> {
    match kind {
        EnsembleKind::Gue => eigenvalues_hermitian(&sample_gue(n, rng)?),
        EnsembleKind::Goe => eigenvalues_hermitian(&sample_goe(n, rng)?),
        EnsembleKind::Ginibre => eigenvalues_complex(&sample_ginibre(n, rng)?),
        EnsembleKind::Wishart => {
            let m = m.ok_or_else(|| Error::InvalidArgument("wishart needs --m".into()))?;
            eigenvalues_hermitian(&sample_wishart(n, m, rng)?)
        }
    }
}

/// Spectra of `trials` draws, trial k on stream k; scaled by 1/√n for Gaussian ensembles.
fn spectra(kind: EnsembleKind, n: usize, m: Option<usize>, trials: usize, seed: u64, normalize: bool) -> Result<Vec<Spectrum>> {
    if trials == 0 {
        return invalid("trials must be positive");
    }
    let scale = if normalize && kind != EnsembleKind::Wishart { 1.0 / (n as f64).sqrt() } else { 1.0 };
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64);
            Ok(draw_spectrum(kind, n, m, &mut rng)?.rescaled(scale))
        })
        .collect()
}

fn run_sample(a: &SampleArgs) -> Result<RunOutput> {
    let specs = spectra(a.ensemble, a.n, a.m, a.trials, a.common.seed, a.normalize)?;
    let mut csv = String::from("trial,index,re,im\n");
    for (t, s) in specs.iter().enumerate() {
        match s {
            Spectrum::Real { values, .. } => values.iter().enumerate().for_each(|(i, v)| csv.push_str(&format!("{t},{i},{v},0\n"))),
            Spectrum::Complex { values, .. } => {
                values.iter().enumerate().for_each(|(i, z)| csv.push_str(&format!("{t},{i},{},{}\n", z.re, z.im)))
            }
        }
    }
    Ok(RunOutput { csv_body: csv, result: json!({ "trials": a.trials, "eigenvalues_per_trial": a.n }) })
}

fn reference_law(a: &EsdArgs) -> Result<ReferenceLaw> {
    Ok(match a.reference {
        RefKind::Semicircle => match a.ensemble {
            EnsembleKind::Gue => ReferenceLaw::Semicircle,
            EnsembleKind::Goe => ReferenceLaw::SemicircleBeta { beta: 1.0 },
            _ => return invalid("semicircle reference needs gue or goe"),
        },
        RefKind::Mp => {
            if a.ensemble != EnsembleKind::Wishart {
                return invalid("mp reference needs the wishart ensemble");
            }
            let m = a.m.ok_or_else(|| Error::InvalidArgument("wishart needs --m".into()))?;
            ReferenceLaw::MarchenkoPastur { c: a.n as f64 / m as f64 }
        }
        RefKind::Circular => {
            if a.ensemble != EnsembleKind::Ginibre {
                return invalid("circular reference needs the ginibre ensemble");
            }
            ReferenceLaw::Circular
        }
    })
}

fn run_esd(a: &EsdArgs) -> Result<RunOutput> {
    if a.bins == 0 {
        return invalid("bins must be positive");
    }
    let law = reference_law(a)?;
    let specs = spectra(a.ensemble, a.n, a.m, a.trials, a.common.seed, true)?;
    if law == ReferenceLaw::Circular {
        let moduli: Vec<f64> = specs.iter().flat_map(|s| s.complex().unwrap().iter().map(|z| z.norm())).collect();
        let inside = moduli.iter().filter(|&&r| r <= 1.0).count() as f64 / moduli.len() as f64;
        let ks = ks_distance(&moduli, |r| (r * r).min(1.0));
        let top = moduli.iter().cloned().fold(1.0, f64::max);
        let mut csv = String::from("r_left,r_right,empirical_cdf,reference_cdf\n");
        let mut sorted = moduli.clone();
        sorted.sort_by(f64::total_cmp);
        for b in 0..a.bins {
            let (l, r) = (top * b as f64 / a.bins as f64, top * (b + 1) as f64 / a.bins as f64);
            let emp = sorted.partition_point(|&v| v <= r) as f64 / sorted.len() as f64;
            csv.push_str(&format!("{l},{r},{emp},{}\n", (r * r).min(1.0)));
        }
        return Ok(RunOutput { csv_body: csv, result: json!({ "fraction_in_unit_disk": inside, "radial_ks_distance": ks }) });
    }
    let reference = SignedAtoms::from_law(&law, REFERENCE_CELLS)?;
    let esds: Vec<EmpiricalMeasure> = specs.iter().map(|s| EmpiricalMeasure::new(s.real().unwrap().to_vec())).collect::<Result<_>>()?;
    let bl: Vec<f64> = esds
        .par_iter()
        .map(|e| Ok(bl_distance(&SignedAtoms::from(e), &reference)?.value))
        .collect::<Result<_>>()?;
    let pooled: Vec<f64> = esds.iter().flat_map(|e| e.atoms().iter().copied()).collect();
    let cdf = |x: f64| law.cdf(x).unwrap_or(f64::NAN);
    let ks = ks_distance(&pooled, cdf);
    let (lo, hi) = law.support().unwrap();
    let lo = pooled.iter().cloned().fold(lo, f64::min);
    let hi = pooled.iter().cloned().fold(hi, f64::max);
    let w = (hi - lo) / a.bins as f64;
    let mut counts = vec![0usize; a.bins];
    for &x in &pooled {
        counts[(((x - lo) / w) as usize).min(a.bins - 1)] += 1;
    }
    let mut csv = String::from("bin_left,bin_right,density,reference_density\n");
    for (b, &c) in counts.iter().enumerate() {
        let l = lo + w * b as f64;
        let r = l + w;
        let dens = c as f64 / (pooled.len() as f64 * w);
        csv.push_str(&format!("{l},{r},{dens},{}\n", law.density(0.5 * (l + r))?));
    }
    let mean_bl = bl.iter().sum::<f64>() / bl.len() as f64;
    Ok(RunOutput { csv_body: csv, result: json!({ "bl_distance": mean_bl, "bl_per_trial": bl, "ks_distance": ks }) })
}

fn run_kernel(a: &KernelArgs) -> Result<RunOutput> {
    if a.points < 2 || !(a.x_max > a.x_min) {
        return invalid("need at least two points and x_max > x_min");
    }
    let mut csv = String::from("re,im,density,kernel_diag\n");
    for k in 0..a.points {
        let x = a.x_min + (a.x_max - a.x_min) * k as f64 / (a.points - 1) as f64;
        let z = Complex64::new(x, a.im);
        let (dens, diag) = match a.family {
            KernelFamily::Gue => (gue_density1(a.n, x)?, gue_kernel(a.n, x, x)?),
            KernelFamily::Ginibre => (ginibre_density1(a.n, z)?, ginibre_kernel(a.n, z, z)?.re),
            KernelFamily::GinibreInfinite => {
                let d = ginibre_kernel_infinite(z, z).re;
                (d, d)
            }
        };
        csv.push_str(&format!("{x},{},{dens},{diag}\n", a.im));
    }
    Ok(RunOutput { csv_body: csv, result: json!({ "points": a.points }) })
}

fn run_dyson(a: &DysonArgs) -> Result<RunOutput> {
    let family = match a.family {
        SdeFamilyKind::Dyson => Family::Dyson { beta: a.beta },
        SdeFamilyKind::Generalized => Family::Generalized {
            alpha: a.alpha.ok_or_else(|| Error::InvalidArgument("generalized needs --alpha".into()))?,
            beta_n: a.beta_n.ok_or_else(|| Error::InvalidArgument("generalized needs --beta-n".into()))?,
        },
        SdeFamilyKind::Ou => Family::Ou { theta: a.theta.ok_or_else(|| Error::InvalidArgument("ou needs --theta".into()))? },
        SdeFamilyKind::Wishart => Family::Wishart { m: a.m.ok_or_else(|| Error::InvalidArgument("wishart needs --m".into()))? },
    };
    if a.record == 0 {
        return invalid("record must be positive");
    }
    let records: Vec<f64> = (1..=a.record).map(|k| a.t_end * k as f64 / a.record as f64).collect();
    let config = SdeConfig::new(family, a.n, a.dt_max, a.t_end, records)?;
    let mut rng = RngStream::new(a.common.seed, 0);
    let traj = simulate(&config, &mut rng, InitialCondition::ZeroStart)?;
    let last = traj.states.last().unwrap();
    // semicircle radius of the exact finite-time law from zero
    let radius = match family {
        Family::Dyson { .. } => Some(2.0 * a.t_end.sqrt()),
        Family::Ou { theta } => Some(2.0 * ((1.0 - (-2.0 * theta * a.t_end).exp()) / (2.0 * theta)).sqrt()),
        _ => None,
    };
    let bl = match radius {
        Some(r) => {
            let law = ReferenceLaw::SemicircleBeta { beta: r * r / 2.0 };
            let esd = EmpiricalMeasure::new(last.positions.clone())?;
            Some(bl_distance(&SignedAtoms::from(&esd), &SignedAtoms::from_law(&law, REFERENCE_CELLS)?)?.value)
        }
        None => None,
    };
    let mut result = traj.summary_json();
    result["bl_distance_final"] = json!(bl);
    let csv = traj.to_csv();
    Ok(RunOutput { csv_body: csv, result })
}

fn parse_grid(spec: &str) -> Result<Vec<Complex64>> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return invalid("z-grid needs re_min,re_max,re_count,im_min,im_max,im_count");
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("{s}: {e}")));
    let cnt = |s: &str| s.parse::<usize>().map_err(|e| Error::InvalidArgument(format!("{s}: {e}")));
    let (r0, r1, nr, i0, i1, ni) = (num(parts[0])?, num(parts[1])?, cnt(parts[2])?, num(parts[3])?, num(parts[4])?, cnt(parts[5])?);
    if nr == 0 || ni == 0 {
        return invalid("grid counts must be positive");
    }
    let lin = |a: f64, b: f64, n: usize, k: usize| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut out = Vec::with_capacity(nr * ni);
    for i in 0..ni {
        for r in 0..nr {
            out.push(Complex64::new(lin(r0, r1, nr, r), lin(i0, i1, ni, i)));
        }
    }
    Ok(out)
}

fn run_burgers(a: &BurgersArgs) -> Result<RunOutput> {
    let flow = match a.flow {
        FlowKind::Dyson => Flow::Dyson,
        FlowKind::Ou => Flow::Ou { theta: a.theta.ok_or_else(|| Error::InvalidArgument("ou needs --theta".into()))? },
    };
    let grid = parse_grid(&a.z_grid)?;
    let s0 = PointMass(0.0);
    let mut jobs = Vec::new();
    for &t in &a.times {
        for &z in &grid {
            jobs.push((t, z));
        }
    }
    let rows: Vec<(f64, Complex64, Complex64, f64, f64)> = jobs
        .par_iter()
        .map(|&(t, z)| {
            let sol = solve_characteristic(&CharacteristicQuery { s0: &s0, t, z, flow })?;
            let res = burgers_residual(flow, &s0, t, z, a.h)?;
            Ok((t, z, sol.s_value, res, sol.residual))
        })
        .collect::<Result<_>>()?;
    let mut csv = String::from("t,re_z,im_z,re_S,im_S,residual\n");
    let mut worst_pde: f64 = 0.0;
    let mut worst_foot: f64 = 0.0;
    for (t, z, s, res, foot) in &rows {
        csv.push_str(&format!("{t},{},{},{},{},{res}\n", z.re, z.im, s.re, s.im));
        worst_pde = worst_pde.max(*res);
        worst_foot = worst_foot.max(*foot);
    }
    Ok(RunOutput { csv_body: csv, result: json!({ "points": rows.len(), "max_pde_residual": worst_pde, "max_characteristic_residual": worst_foot }) })
}

fn run_ldp(a: &LdpArgs) -> Result<RunOutput> {
    let nodes = equilibrium_grid(a.beta, a.grid_cells)?;
    let (mu, report) = solve_equilibrium(a.beta, nodes, a.iters)?;
    let energy = energy_h(&mu, a.beta)?;
    let frostman = frostman_residual(&mu, a.beta)?;
    Ok(RunOutput { csv_body: mu.to_csv(), result: json!({ "solve": report, "energy": energy, "frostman": frostman }) })
}

fn run_holeprob(a: &HoleArgs) -> Result<RunOutput> {
    let mut csv = String::from("r,log_prob,log_prob_over_r4\n");
    let mut details = Vec::new();
    for &r in &a.radii {
        let h = hole_probability(r, a.truncation)?;
        csv.push_str(&format!("{r},{},{}\n", h.log_prob, h.log_prob / r.powi(4)));
        details.push(json!({ "r": r, "log_prob": h.log_prob, "tail_bound": h.tail_bound, "truncation": h.truncation }));
    }
    Ok(RunOutput { csv_body: csv, result: json!({ "radii": details }) })
}

fn run_gumbel(a: &GumbelArgs) -> Result<RunOutput> {
    if a.trials == 0 {
        return invalid("trials must be positive");
    }
    let g = GumbelRescale::new(a.n)?;
    let sqrt_n = (a.n as f64).sqrt();
    let rhos: Vec<f64> = (0..a.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(a.common.seed, k as u64);
            Ok(sample_ginibre_moduli(a.n, &mut rng)?.into_iter().fold(0.0, f64::max) / sqrt_n)
        })
        .collect::<Result<_>>()?;
    let rescaled: Vec<f64> = rhos.iter().map(|&r| g.apply(r)).collect();
    let ks = ks_distance(&rescaled, gumbel_cdf);
    let mut csv = String::from("trial,rho,rescaled\n");
    for (k, (r, s)) in rhos.iter().zip(&rescaled).enumerate() {
        csv.push_str(&format!("{k},{r},{s}\n"));
    }
    Ok(RunOutput { csv_body: csv, result: json!({ "kappa": g.kappa, "ks_distance": ks, "mean_rho": rhos.iter().sum::<f64>() / rhos.len() as f64 }) })
}

/// Run the parsed command without touching the filesystem.
pub fn execute(cli: &Cli) -> Result<RunOutput> {
    match &cli.command {
        Command::Sample(a) => run_sample(a),
        Command::Esd(a) => run_esd(a),
        Command::Kernel(a) => run_kernel(a),
        Command::Dyson(a) => run_dyson(a),
        Command::Burgers(a) => run_burgers(a),
        Command::Ldp(a) => run_ldp(a),
        Command::Holeprob(a) => run_holeprob(a),
        Command::Gumbel(a) => run_gumbel(a),
    }
}

/// Echoed configuration: the command with its parameters.
pub fn config_json(cli: &Cli) -> Value {
    serde_json::to_value(&cli.command).unwrap_or(Value::Null)
}

pub fn render_csv(cli: &Cli, out: &RunOutput) -> String {
    format!("# rmt-lab {VERSION} config={}\n{}", config_json(cli), out.csv_body)
}

pub fn render_json(cli: &Cli, out: &RunOutput) -> String {
    let doc = json!({ "version": VERSION, "schema": SCHEMA_VERSION, "config": config_json(cli), "result": out.result });
    let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
    s.push('\n');
    s
}

/// Process outcome: exit code and the text for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exit {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_exit(e: &Error) -> Exit {
    let code = if e.is_numerical() { 3 } else { 2 };
    let body = json!({ "error": e, "message": e.to_string(), "exit_code": code });
    Exit { code, stdout: String::new(), stderr: format!("{body}\n") }
}

fn thread_count(cli: &Cli) -> Result<Option<usize>> {
    if let Some(t) = cli.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map(Some).map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not an integer")))
        }
        _ => Ok(None),
    }
}

fn run_parsed(cli: &Cli) -> Result<String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_count(cli)? {
        if t == 0 {
            return invalid("threads must be positive");
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| Error::Numerical(e.to_string()))?;
    let out = pool.install(|| execute(cli))?;
    let common = cli.command.common();
    match &common.out {
        Some(prefix) => {
            let csv_path = with_suffix(prefix, "csv");
            let json_path = with_suffix(prefix, "json");
            if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&csv_path, render_csv(cli, &out))?;
            std::fs::write(&json_path, render_json(cli, &out))?;
            Ok(format!("{}\n{}\n", csv_path.display(), json_path.display()))
        }
        None => Ok(match common.format {
            Format::Csv => render_csv(cli, &out),
            Format::Json => render_json(cli, &out),
        }),
    }
}

fn with_suffix(prefix: &std::path::Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Parse arguments (program name first) and run.
pub fn run<I, T>(args: I) -> Exit
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Exit { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            return error_exit(&Error::InvalidArgument(e.to_string()));
        }
    };
    match run_parsed(&cli) {
        Ok(stdout) => Exit { code: 0, stdout, stderr: String::new() },
        Err(e) => error_exit(&e),
    }
}
