//! Statistical checks on the particle systems, each against an exact Gaussian or Itô oracle.

use rayon::prelude::*;
use rmt_lab::dyson::{energy, martingale_residual, simulate, step_counted, Family, InitialCondition, ParticleState, SdeConfig, TestFunction};
use rmt_lab::rng::RngStream;

fn records(t_end: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| t_end * k as f64 / count as f64).collect()
}

fn beta_one_run(n: usize, seed: u64, k: u64) -> rmt_lab::dyson::TrajectoryRecord {
    let config = SdeConfig::new(Family::Dyson { beta: 1 }, n, 1e-2, 1.0, records(1.0, 100)).unwrap();
    let mut rng = RngStream::new(seed, k);
    simulate(&config, &mut rng, InitialCondition::ZeroStart).unwrap()
}

#[test]
fn identity_martingale_has_gaussian_variance() {
    // f(x) = x: M(1) = √2 N^{-3/2} Σ B_i(1 − t₀), variance 2(1 − t₀)/N²
    let n = 16;
    let finals: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|k| {
            let traj = beta_one_run(n, 101, k);
            *martingale_residual(&traj, &TestFunction::identity()).unwrap().path.last().unwrap()
        })
        .collect();
    let mean = finals.iter().sum::<f64>() / finals.len() as f64;
    let var = finals.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (finals.len() - 1) as f64;
    let expect = 2.0 / (n * n) as f64;
    assert!((var / expect - 1.0).abs() < 0.3, "var {var} vs {expect}");
}

#[test]
fn log_test_function_rarely_exceeds_bracket() {
    let n = 12;
    let hits: Vec<bool> = (0..500u64)
        .into_par_iter()
        .map(|k| {
            let traj = beta_one_run(n, 202, k);
            let rep = martingale_residual(&traj, &TestFunction::log_one_plus_square()).unwrap();
            rep.path.last().unwrap().abs() > 5.0 * rep.bracket_bound.sqrt()
        })
        .collect();
    let frac = hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64;
    assert!(frac < 0.02, "exceedance fraction {frac}");
}

#[test]
fn constant_test_function_gives_zero_path() {
    let traj = beta_one_run(6, 303, 0);
    let rep = martingale_residual(&traj, &TestFunction::constant(2.5)).unwrap();
    assert!(rep.path.iter().all(|&m| m.abs() < 1e-14));
    assert_eq!(rep.bracket_bound, 0.0);
}

#[test]
fn bridge_splitting_keeps_increment_variance() {
    // At gap √dt the drift barely outruns the noise, so ~8% of steps need halving.
    // The midpoint feels no drift, so its increment is (σ/2)(dB₁ + dB₂) whatever
    // the splitting: variance σ²dt/2.
    let dt = 1e-2;
    let config = SdeConfig::new(Family::Dyson { beta: 1 }, 2, dt, 1.0, vec![1.0]).unwrap();
    let sigma2 = 2.0 / 2.0;
    let start = ParticleState::new(0.0, vec![-0.05, 0.05]).unwrap();
    let mut rng = RngStream::new(404, 0);
    let mut rejections = 0;
    let incs: Vec<f64> = (0..4000)
        .map(|_| {
            let out = step_counted(&start, dt, &config, &mut rng).unwrap();
            rejections += out.rejections;
            0.5 * (out.state.positions[0] + out.state.positions[1])
        })
        .collect();
    assert!(rejections > 100, "only {rejections} halvings");
    let var = incs.iter().map(|v| v * v).sum::<f64>() / incs.len() as f64;
    let expect = sigma2 * dt / 2.0;
    // 4000 samples: relative sd of the variance estimate ≈ 2.2%
    assert!((var / expect - 1.0).abs() < 0.1, "var {var} vs {expect}");
}

#[test]
fn energy_grows_at_most_linearly() {
    // For β_N ≥ 2N², L𝓔 ≤ 4α/β_N + α(N−1)/N², with equality at β_N = 2N². The mean sits
    // strictly below the line at 2N²: the log-gap term of a critical pair is a strict
    // local martingale (E log|Z_t| grows for planar Brownian motion), so only the bound holds.
    let n = 8;
    let nf = n as f64;
    let alpha = 1.0;
    let times = records(1.0, 10);
    let x0: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let s0 = ParticleState::new(0.0, x0).unwrap();
    for beta_n in [2.0 * nf * nf, 4.0 * nf * nf] {
        let config = SdeConfig::new(Family::Generalized { alpha, beta_n }, n, 1e-3, 1.0, times.clone()).unwrap();
        let e0 = energy(&s0, &config).unwrap().e;
        let slope = 4.0 * alpha / beta_n + alpha * (nf - 1.0) / (nf * nf);
        let series: Vec<Vec<f64>> = (0..200u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = RngStream::new(505, k);
                simulate(&config, &mut rng, InitialCondition::State(s0.clone())).unwrap().diagnostics.energy
            })
            .collect();
        for (j, &t) in times.iter().enumerate() {
            let vals: Vec<f64> = series.iter().map(|s| s[j]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt();
            let se = sd / (vals.len() as f64).sqrt();
            let bound = e0 + slope * t;
            assert!(mean <= bound + 4.0 * se + 5e-3, "beta_N={beta_n} t={t}: mean {mean} above {bound} (se {se})");
        }
    }
}

#[test]
fn same_stream_reproduces_trajectory() {
    let a = beta_one_run(10, 606, 3);
    let b = beta_one_run(10, 606, 3);
    assert_eq!(a, b);
    let c = beta_one_run(10, 606, 4);
    assert_ne!(a.states.last(), c.states.last());
}

#[test]
fn ou_stationary_variance() {
    // one OU particle: Var x(t) = (1 − e^{−2θt})/(2θ)·σ² with σ² = 2/N
    let theta = 1.0;
    let config = SdeConfig::new(Family::Ou { theta }, 1, 1e-3, 3.0, vec![3.0]).unwrap();
    let finals: Vec<f64> = (0..2000u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(707, k);
            let s = ParticleState::new(0.0, vec![0.0]).unwrap();
            simulate(&config, &mut rng, InitialCondition::State(s)).unwrap().states[0].positions[0]
        })
        .collect();
    let var = finals.iter().map(|v| v * v).sum::<f64>() / finals.len() as f64;
    let expect = 2.0 * (1.0 - (-6.0f64).exp()) / (2.0 * theta);
    assert!((var / expect - 1.0).abs() < 0.1, "var {var} vs {expect}");
}
