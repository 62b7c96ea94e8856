//! Commutative (sigma = 0) sample-set models.
//!
//! The base space is real-valued functions on a finite sample set `X` with
//! weights `mu`, `tau = diag(mu)` and `sigma = 0`. A complex probe
//! `f = u + i v` enters the doubled space as `u (+) C v`, with `C` the
//! pairing structure the purification chose on the (here: total) kernel of
//! `D`; since `C` is tau-orthogonal, the entropy of the subspace of
//! functions supported on `Y` is independent of the pairing and equals
//!
//! `S_Y(f) = 2 sum_{x in Y} mu(x) (Im f(x))^2`.
//!
//! A continuum cousin drives the non-smooth family checks: weight `w(x)`
//! on the line, half-line subspaces `L_t` of real functions supported left
//! of `t`, entropy `2 Int^t w (Im f)^2 dx` and surface
//! `2 Int^{min(s,t)} w (Im f)^2 dx`, which is increasing but not `C^1`
//! across the diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::probe::SmoothProbe;
use crate::models::quad::{integrate_with_breaks, QuadratureParams};
use crate::purify::PureSpace;
use crate::space::SymplecticHilbertSpace;

/// Closed-form entropy `2 sum_{x in Y} mu(x) (Im f(x))^2`.
pub fn abelian_entropy(weights: &[f64], y_mask: &[bool], im_f: &[f64]) -> Result<f64> {
    if weights.len() != y_mask.len() || weights.len() != im_f.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: y_mask.len().min(im_f.len()),
            context: "abelian sample arrays",
        });
    }
    Ok(weights
        .iter()
        .zip(y_mask)
        .zip(im_f)
        .filter(|((_, &in_y), _)| in_y)
        .map(|((&mu, _), &v)| 2.0 * mu * v * v)
        .sum())
}

/// The sample-set space: `tau = diag(weights)`, `sigma = 0`.
pub fn abelian_space(weights: &[f64]) -> Result<SymplecticHilbertSpace> {
    let n = weights.len();
    let tau = DMatrix::from_fn(n, n, |i, j| if i == j { weights[i] } else { 0.0 });
    SymplecticHilbertSpace::new(tau, DMatrix::zeros(n, n))
}

/// Base-space generators of the subspace of functions supported on `Y`.
pub fn y_subspace_generators(y_mask: &[bool]) -> Vec<DVector<f64>> {
    let n = y_mask.len();
    y_mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect()
}

/// Embeds the complex probe `u + i v` into the doubled space as
/// `u (+) C v`, using the purification's own pairing structure.
pub fn embed_complex_probe(
    pure: &PureSpace,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<DVector<f64>> {
    let base = pure.embed(u)?;
    if v.len() != pure.user_dim() && v.len() != pure.base_dim() {
        return Err(Error::DimensionMismatch {
            expected: pure.user_dim(),
            got: v.len(),
            context: "imaginary part of a complex probe",
        });
    }
    let mut v_padded = DVector::zeros(pure.base_dim());
    v_padded.rows_mut(0, v.len()).copy_from(v);
    let mirror = pure.embed_mirror(&(pure.c_matrix() * v_padded))?;
    Ok(base + mirror)
}

/// Continuum half-line entropy `2 Int_{-inf}^t w(x) v(x)^2 dx` for an
/// imaginary profile `v` and weight `w`.
pub fn halfline_entropy(
    weight: &SmoothProbe,
    im_f: &SmoothProbe,
    t: f64,
    q: QuadratureParams,
) -> Result<f64> {
    halfline_tf(weight, im_f, t, t, q)
}

/// Continuum surface `2 Int^{min(s,t)} w v^2 dx`; constant in `t` once
/// `t > s`, hence not `C^1` across the diagonal.
pub fn halfline_tf(
    weight: &SmoothProbe,
    im_f: &SmoothProbe,
    s: f64,
    t: f64,
    q: QuadratureParams,
) -> Result<f64> {
    let u = s.min(t);
    // The probe profile enters through its values here, not its derivative.
    let (lo, hi) = probe_value_window(im_f);
    let top = u.min(hi);
    if top <= lo {
        return Ok(0.0);
    }
    let mut breaks = im_f.breakpoints();
    breaks.extend(weight.breakpoints());
    integrate_with_breaks(
        |x| 2.0 * weight.value(x) * im_f.value(x).powi(2),
        lo,
        top,
        &breaks,
        q,
    )
}

/// Window outside which the probe's values vanish (bump) or are constant
/// but entropy-irrelevant only on the left (ramp, samples): for non-compact
/// kinds the window starts at the support edge and the caller's `t` caps
/// the right end.
fn probe_value_window(p: &SmoothProbe) -> (f64, f64) {
    match p {
        SmoothProbe::Bump {
            center, halfwidth, ..
        } => (center - halfwidth, center + halfwidth),
        // Ramps and samples keep a plateau on the right; integrate from the
        // left edge to wherever the time cut lands.
        SmoothProbe::Ramp { a, .. } => (*a, f64::INFINITY),
        SmoothProbe::UserSampled { xs, .. } => {
            if xs.is_empty() {
                (0.0, 0.0)
            } else {
                (xs[0], f64::INFINITY)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purify::{purify, PurifyOptions};
    use approx::assert_abs_diff_eq;

    #[test]
    fn real_probes_have_zero_entropy() {
        let s = abelian_entropy(&[0.5, 2.0], &[true, true], &[0.0, 0.0]).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn empty_region_has_zero_entropy() {
        let s = abelian_entropy(&[0.5, 2.0], &[false, false], &[1.0, -2.0]).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn closed_form_counts_imaginary_mass_on_y() {
        let s = abelian_entropy(&[0.5, 2.0, 1.0], &[true, false, true], &[3.0, 7.0, -1.0])
            .unwrap();
        assert_abs_diff_eq!(s, 2.0 * (0.5 * 9.0 + 1.0), epsilon = 1e-14);
    }

    #[test]
    fn complex_probe_embedding_survives_odd_padding() {
        // Three points: the kernel of D is odd-dimensional, so the
        // purification pads; the embedding must still work.
        let space = abelian_space(&[1.0, 0.5, 2.0]).unwrap();
        let pure = purify(&space, PurifyOptions::default()).unwrap();
        assert!(pure.padded());
        let u = DVector::from_vec(vec![1.0, 0.0, -2.0]);
        let v = DVector::from_vec(vec![0.0, 3.0, 1.0]);
        let h = embed_complex_probe(&pure, &u, &v).unwrap();
        assert_eq!(h.len(), pure.doubled_dim());
        // tau+ norm splits into the two copies.
        let norm2 = pure.tau_plus_form(&h, &h).unwrap();
        let expected = (1.0 + 2.0 * 4.0) + (0.5 * 9.0 + 2.0);
        assert_abs_diff_eq!(norm2, expected, epsilon = 1e-10);
    }

    #[test]
    fn halfline_surface_is_constant_past_the_diagonal() {
        let w = SmoothProbe::Ramp {
            a: -10.0,
            b: -9.0,
            slope: 1.0,
        }; // constant weight 1 on the region of interest
        let v = SmoothProbe::standard_bump();
        let q = QuadratureParams::default();
        let t1 = halfline_tf(&w, &v, 0.2, 0.5, q).unwrap();
        let t2 = halfline_tf(&w, &v, 0.2, 2.5, q).unwrap();
        assert_abs_diff_eq!(t1, t2, epsilon = 1e-12);
        let diag = halfline_entropy(&w, &v, 0.2, q).unwrap();
        let t3 = halfline_tf(&w, &v, 5.0, 0.2, q).unwrap();
        assert_abs_diff_eq!(diag, t3, epsilon = 1e-14);
    }
}
