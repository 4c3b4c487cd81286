//! Mean-field limits: Stieltjes-transform characteristics for the Dyson and OU flows,
//! Burgers residuals and the stationary Hilbert-transform condition.

use crate::error::{invalid, Error, Result};
use crate::measures::{hilbert_transform, semicircle_radius_stieltjes, semicircle_stieltjes, GridMeasure, PointMass, StieltjesField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const MAX_NEWTON_ITERS: usize = 100;
/// Extra Newton steps taken after the tolerance is met.
pub const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Flow {
    Dyson,
    Ou { theta: f64 },
}

pub struct CharacteristicQuery<'a> {
    pub s0: &'a dyn StieltjesField,
    pub t: f64,
    pub z: Complex64,
    pub flow: Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSolution {
    pub r: Complex64,
    pub s_value: Complex64,
    pub newton_iters: usize,
    pub residual: f64,
}

/// Characteristic map r ↦ z(t) and its r-derivative.
fn foot_map(q: &CharacteristicQuery, r: Complex64) -> Result<(Complex64, Complex64)> {
    let s = q.s0.eval(r)?;
    let ds = q.s0.derivative(r)?;
    Ok(match q.flow {
        Flow::Dyson => (r + s * q.t - q.z, Complex64::new(1.0, 0.0) + ds * q.t),
        Flow::Ou { theta } => {
            let decay = (-theta * q.t).exp();
            let sh = (theta * q.t).sinh() / theta;
            (r * decay + s * sh - q.z, Complex64::new(decay, 0.0) + ds * sh)
        }
    })
}

/// Solve z = r + tS0(r) (Dyson) or z = re^{−θt} + S0(r)sinh(θt)/θ (OU) for r in the upper
/// half-plane by damped Newton, and return the transported value of S.
pub fn solve_characteristic(q: &CharacteristicQuery) -> Result<CharacteristicSolution> {
    if !(q.z.im > 0.0) || !q.z.re.is_finite() || !q.z.im.is_finite() {
        return invalid("characteristic query needs Im z > 0");
    }
    if !(q.t > 0.0) || !q.t.is_finite() {
        return invalid("characteristic query needs t > 0");
    }
    if let Flow::Ou { theta } = q.flow {
        if !(theta > 0.0) {
            return invalid("theta must be positive");
        }
    }
    let tol = 1e-12 * (1.0 + q.z.norm());
    let mut r = match q.flow {
        Flow::Dyson => q.z,
        Flow::Ou { theta } => q.z * (theta * q.t).exp(),
    };
    let (mut f, mut df) = foot_map(q, r)?;
    let mut res = f.norm();
    let mut iters = 0;
    while res >= tol {
        if iters == MAX_NEWTON_ITERS {
            return Err(Error::NoConvergence {
                message: format!("characteristic Newton stalled at residual {res:e}"),
                partial: vec![r.re, r.im, res],
            });
        }
        iters += 1;
        let delta = -f / df;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = r + delta * lambda;
            if cand.im > 0.0 {
                if let Ok((fc, dfc)) = foot_map(q, cand) {
                    if fc.norm() < res || lambda < 1e-12 {
                        r = cand;
                        f = fc;
                        df = dfc;
                        res = fc.norm();
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                message: format!("no damped Newton step decreases the residual {res:e}"),
                partial: vec![r.re, r.im, res],
            });
        }
    }
    // a few undamped steps past the tolerance, kept only while they help
    for _ in 0..POLISH_STEPS {
        let cand = r - f / df;
        match foot_map(q, cand) {
            Ok((fc, dfc)) if cand.im > 0.0 && fc.norm() < res => {
                (r, f, df, res) = (cand, fc, dfc, fc.norm());
                iters += 1;
            }
            _ => break,
        }
    }
    let s0 = q.s0.eval(r)?;
    let s_value = match q.flow {
        Flow::Dyson => s0,
        Flow::Ou { theta } => s0 * (theta * q.t).exp(),
    };
    Ok(CharacteristicSolution { r, s_value, newton_iters: iters, residual: res })
}

/// Characteristic-solved S_t(z) from δ₀ next to t^{−1/2}S_σ(z t^{−1/2}).
pub fn dyson_scaling_check(z: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
    let q = CharacteristicQuery { s0: &PointMass(0.0), t, z, flow: Flow::Dyson };
    let lhs = solve_characteristic(&q)?.s_value;
    let ts = t.sqrt();
    let rhs = semicircle_stieltjes(z / ts)? / ts;
    Ok((lhs, rhs))
}

/// Long-time OU limit θ(z − √(z² − 2/θ)), the Stieltjes transform of σ_θ.
pub fn ou_longtime(theta: f64, z: Complex64) -> Result<Complex64> {
    if !(theta > 0.0) {
        return invalid("theta must be positive");
    }
    semicircle_radius_stieltjes(z, (2.0 / theta).sqrt())
}

/// A time-dependent Stieltjes field S(t, z).
pub trait TimeField {
    fn eval(&self, t: f64, z: Complex64) -> Result<Complex64>;
}

/// The characteristic solution started from S0.
pub struct CharacteristicField<'a> {
    pub s0: &'a dyn StieltjesField,
    pub flow: Flow,
}

impl TimeField for CharacteristicField<'_> {
    fn eval(&self, t: f64, z: Complex64) -> Result<Complex64> {
        Ok(solve_characteristic(&CharacteristicQuery { s0: self.s0, t, z, flow: self.flow })?.s_value)
    }
}

/// A field held constant in time.
pub struct FrozenField<'a>(pub &'a dyn StieltjesField);

impl TimeField for FrozenField<'_> {
    fn eval(&self, _t: f64, z: Complex64) -> Result<Complex64> {
        self.0.eval(z)
    }
}

/// |∂_tS + S∂_zS − θ(z∂_zS + S)| by central differences (θ = 0 for Dyson).
pub fn burgers_residual_of(field: &dyn TimeField, flow: Flow, t: f64, z: Complex64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return invalid("h must be positive");
    }
    if !(z.im > 2.0 * h) {
        return Err(Error::Stencil(format!("Im z = {} must exceed 2h = {}", z.im, 2.0 * h)));
    }
    if !(t > h) {
        return Err(Error::Stencil(format!("t = {t} must exceed h = {h}")));
    }
    let s = field.eval(t, z)?;
    let st = (field.eval(t + h, z)? - field.eval(t - h, z)?) / (2.0 * h);
    let sz = (field.eval(t, z + h)? - field.eval(t, z - h)?) / (2.0 * h);
    let theta = match flow {
        Flow::Dyson => 0.0,
        Flow::Ou { theta } => theta,
    };
    Ok((st + s * sz - (z * sz + s) * theta).norm())
}

pub fn burgers_residual(flow: Flow, s0: &dyn StieltjesField, t: f64, z: Complex64, h: f64) -> Result<f64> {
    burgers_residual_of(&CharacteristicField { s0, flow }, flow, t, z, h)
}

/// Central fraction of the effective support on which the stationary condition is checked.
pub const STATIONARY_CENTRAL_FRACTION: f64 = 0.9;

/// sup |𝓗μ(x) − θx| over cell midpoints inside the central 90% of the effective support.
pub fn stationary_residual(mu: &GridMeasure, theta: f64) -> Result<f64> {
    let (first, last) = mu.effective_support(1e-6).ok_or_else(|| Error::InvalidArgument("measure has no mass".into()))?;
    let lo = mu.nodes()[first];
    let hi = mu.nodes()[last + 1];
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo) * STATIONARY_CENTRAL_FRACTION;
    let mut worst: f64 = 0.0;
    for k in first..=last {
        let x = mu.midpoint(k);
        if (x - mid).abs() > half {
            continue;
        }
        worst = worst.max((hilbert_transform(mu, x)? - theta * x).abs());
    }
    Ok(worst)
}
