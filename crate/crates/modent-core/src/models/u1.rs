//! Closed forms for the chiral current on the line.
//!
//! Half-line entropies of coherent excitations by a test function `f`:
//!
//! * vacuum: `S_t(f) = 2 pi Int_{-inf}^t (t - x) f'(x)^2 dx`;
//! * temperature `1/beta`:
//!   `S_t(f) = Int_{-inf}^t f'(x)^2 beta (1 - exp(2 pi (x - t)/beta)) dx`;
//! * reparametrized half-lines `t -> (-inf, h(t))` by composition.
//!
//! The two-variable surface truncates the same integrands at
//! `min(s, t)`. Every value is assembled from the primitive integrals
//! `A(u) = Int^u f'^2`, `B(u) = Int^u x f'^2` and the anchored
//! `E(v) = Int^v f'^2 exp(2 pi (x - v)/beta)`, so the `t`-dependence is
//! explicit (linear, or a single decaying exponential factor). Second
//! differences in `t` then cancel exactly instead of dying in quadrature
//! noise, and nothing overflows for any `beta`.

use crate::error::Result;
use crate::models::probe::SmoothProbe;
use crate::models::quad::{integrate_with_breaks, QuadratureParams};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Thermal state selector for the current models.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum U1State {
    Vacuum,
    Kms { beta: f64 },
    ReparamVacuum { reparam: Reparam },
}

/// A strictly increasing smooth time reparametrization.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reparam {
    Identity,
    Affine { scale: f64, offset: f64 },
    /// `h(t) = t + amplitude * tanh(t)`; increasing for `amplitude > -1`,
    /// with `h''` changing sign at `t = 0`.
    TanhWarp { amplitude: f64 },
}

impl Reparam {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Reparam::Identity => t,
            Reparam::Affine { scale, offset } => scale * t + offset,
            Reparam::TanhWarp { amplitude } => t + amplitude * t.tanh(),
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        match self {
            Reparam::Identity => 1.0,
            Reparam::Affine { scale, .. } => *scale,
            Reparam::TanhWarp { amplitude } => {
                let c = t.cosh();
                1.0 + amplitude / (c * c)
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match self {
            Reparam::Identity | Reparam::Affine { .. } => 0.0,
            Reparam::TanhWarp { amplitude } => {
                let c = t.cosh();
                -2.0 * amplitude * t.tanh() / (c * c)
            }
        }
    }

    /// Checks `h' > 0` on sampled points of `[lo, hi]`.
    pub fn is_increasing_on(&self, lo: f64, hi: f64, samples: usize) -> bool {
        (0..=samples).all(|k| {
            let t = lo + (hi - lo) * k as f64 / samples.max(1) as f64;
            self.d1(t) > 0.0
        })
    }
}

/// `A(u) = Int_{-inf}^u f'(x)^2 dx`.
pub fn a_integral(f: &SmoothProbe, u: f64, q: QuadratureParams) -> Result<f64> {
    let (lo, hi) = f.derivative_support();
    let top = u.min(hi);
    if top <= lo {
        return Ok(0.0);
    }
    integrate_with_breaks(|x| f.derivative(x).powi(2), lo, top, &f.breakpoints(), q)
}

/// `B(u) = Int_{-inf}^u x f'(x)^2 dx`.
pub fn b_integral(f: &SmoothProbe, u: f64, q: QuadratureParams) -> Result<f64> {
    let (lo, hi) = f.derivative_support();
    let top = u.min(hi);
    if top <= lo {
        return Ok(0.0);
    }
    integrate_with_breaks(
        |x| x * f.derivative(x).powi(2),
        lo,
        top,
        &f.breakpoints(),
        q,
    )
}

/// `E(v) = Int_{-inf}^v f'(x)^2 exp(2 pi (x - v)/beta) dx`, anchored at the
/// top limit so the integrand never exceeds 1.
fn e_integral(f: &SmoothProbe, v: f64, beta: f64, q: QuadratureParams) -> Result<f64> {
    let (lo, hi) = f.derivative_support();
    let top = v.min(hi);
    if top <= lo {
        return Ok(0.0);
    }
    integrate_with_breaks(
        |x| f.derivative(x).powi(2) * (TWO_PI * (x - top) / beta).exp(),
        lo,
        top,
        &f.breakpoints(),
        q,
    )
}

/// Vacuum half-line entropy `2 pi Int^t (t - x) f'^2 dx`.
pub fn vacuum_entropy(f: &SmoothProbe, t: f64, q: QuadratureParams) -> Result<f64> {
    vacuum_tf(f, t, t, q)
}

/// Vacuum two-variable surface: the same integral truncated at `min(s,t)`.
pub fn vacuum_tf(f: &SmoothProbe, s: f64, t: f64, q: QuadratureParams) -> Result<f64> {
    let u = s.min(t);
    Ok(TWO_PI * (t * a_integral(f, u, q)? - b_integral(f, u, q)?))
}

/// Thermal half-line entropy at inverse temperature `beta`.
pub fn kms_entropy(f: &SmoothProbe, t: f64, beta: f64, q: QuadratureParams) -> Result<f64> {
    kms_tf(f, t, t, beta, q)
}

/// Thermal two-variable surface:
/// `Int^{min(s,t)} f'^2 beta (1 - exp(2 pi (x - t)/beta)) dx`.
pub fn kms_tf(f: &SmoothProbe, s: f64, t: f64, beta: f64, q: QuadratureParams) -> Result<f64> {
    let u = s.min(t);
    let (lo, hi) = f.derivative_support();
    let v = u.min(hi);
    if v <= lo {
        return Ok(0.0);
    }
    let a = a_integral(f, u, q)?;
    let e = e_integral(f, v, beta, q)?;
    Ok(beta * (a - (TWO_PI * (v - t) / beta).exp() * e))
}

/// Closed-form first derivative of the vacuum entropy: `2 pi A(t)`.
pub fn vacuum_ds_dt(f: &SmoothProbe, t: f64, q: QuadratureParams) -> Result<f64> {
    Ok(TWO_PI * a_integral(f, t, q)?)
}

/// Closed-form first derivative of the thermal entropy:
/// `2 pi Int^t f'^2 exp(2 pi (x - t)/beta) dx`.
pub fn kms_ds_dt(f: &SmoothProbe, t: f64, beta: f64, q: QuadratureParams) -> Result<f64> {
    let (lo, hi) = f.derivative_support();
    let v = t.min(hi);
    if v <= lo {
        return Ok(0.0);
    }
    let e = e_integral(f, v, beta, q)?;
    Ok(TWO_PI * (TWO_PI * (v - t) / beta).exp() * e)
}

/// The boundary/bulk split of the second `t`-derivative of the entropy:
/// the mixed partial `d2T/dsdt` and the pure partial `d2T/dt2`, both at
/// `s = t - 0`.
///
/// * vacuum: `(2 pi f'(t)^2, 0)`;
/// * thermal: `(2 pi f'(t)^2, -(2 pi)^2/beta Int^t f'^2 e^{2 pi (x-t)/beta})`;
/// * reparametrized vacuum: `(2 pi h'(t)^2 f'(h(t))^2, 2 pi h''(t) A(h(t)))`.
pub fn second_derivative_terms(
    f: &SmoothProbe,
    t: f64,
    state: &U1State,
    q: QuadratureParams,
) -> Result<(f64, f64)> {
    match state {
        U1State::Vacuum => Ok((TWO_PI * f.derivative(t).powi(2), 0.0)),
        U1State::Kms { beta } => {
            let boundary = TWO_PI * f.derivative(t).powi(2);
            let bulk = -TWO_PI / beta * kms_ds_dt(f, t, *beta, q)?;
            Ok((boundary, bulk))
        }
        U1State::ReparamVacuum { reparam } => {
            let ht = reparam.value(t);
            let d1 = reparam.d1(t);
            let boundary = TWO_PI * d1 * d1 * f.derivative(ht).powi(2);
            let bulk = TWO_PI * reparam.d2(t) * a_integral(f, ht, q)?;
            Ok((boundary, bulk))
        }
    }
}

/// Entropy for the state selector: vacuum, thermal, or reparametrized
/// vacuum half-lines.
pub fn entropy(f: &SmoothProbe, t: f64, state: &U1State, q: QuadratureParams) -> Result<f64> {
    match state {
        U1State::Vacuum => vacuum_entropy(f, t, q),
        U1State::Kms { beta } => kms_entropy(f, t, *beta, q),
        U1State::ReparamVacuum { reparam } => vacuum_entropy(f, reparam.value(t), q),
    }
}

/// Two-variable surface for the state selector.
pub fn tf(f: &SmoothProbe, s: f64, t: f64, state: &U1State, q: QuadratureParams) -> Result<f64> {
    match state {
        U1State::Vacuum => vacuum_tf(f, s, t, q),
        U1State::Kms { beta } => kms_tf(f, s, t, *beta, q),
        U1State::ReparamVacuum { reparam } => {
            vacuum_tf(f, reparam.value(s), reparam.value(t), q)
        }
    }
}
