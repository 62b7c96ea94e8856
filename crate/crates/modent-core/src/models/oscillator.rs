//! Finite collections of thermal oscillator modes.
//!
//! Mode `j` carries the forms `tau_j = m_j Re<.,.>` and `sigma_j = Im<.,.>`
//! on a complex line viewed as `R^2`; `m_j = 1` is the vacuum (pure) mode,
//! `m_j > 1` a thermal one. For a subspace spanned by a set `E` of whole
//! modes the entropy of a coherent excitation `f` is
//!
//! `S(f) = 2 sum_{j in E} arcoth(m_j) |f_j|^2`,
//!
//! infinite when a populated mode has `m_j = 1`. The spectral family
//! `L_t = span of modes with m_j < t` truncates the sum at `min(s, t)` in
//! the two-variable surface.
//!
//! Vectors use the interleaved real layout `(Re f_1, Im f_1, Re f_2, ...)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::modular::EntropyValue;
use crate::space::SymplecticHilbertSpace;

/// `arcoth(m) = ln((m+1)/(m-1)) / 2` for `m > 1`; infinity at `m = 1`.
/// Values of `m` within 1e-12 of 1 are treated as exactly 1.
pub fn arcoth(m: f64) -> f64 {
    if (m - 1.0).abs() <= 1e-12 {
        f64::INFINITY
    } else {
        0.5 * ((m + 1.0) / (m - 1.0)).ln()
    }
}

fn mode_amplitudes(m_diag: &[f64], f: &DVector<f64>) -> Result<Vec<f64>> {
    if f.len() != 2 * m_diag.len() {
        return Err(Error::DimensionMismatch {
            expected: 2 * m_diag.len(),
            got: f.len(),
            context: "oscillator mode vector",
        });
    }
    Ok((0..m_diag.len())
        .map(|j| f[2 * j] * f[2 * j] + f[2 * j + 1] * f[2 * j + 1])
        .collect())
}

/// Closed-form entropy `2 sum_{j in E} arcoth(m_j) |f_j|^2`.
pub fn oscillator_entropy(m_diag: &[f64], e_set: &[usize], f: &DVector<f64>) -> Result<EntropyValue> {
    let amp = mode_amplitudes(m_diag, f)?;
    let mut total = 0.0;
    for &j in e_set {
        if amp[j] == 0.0 {
            continue;
        }
        let a = arcoth(m_diag[j]);
        if a.is_infinite() {
            return Ok(EntropyValue::Infinite);
        }
        total += 2.0 * a * amp[j];
    }
    Ok(EntropyValue::Finite(total))
}

/// Entropy of the spectral family at `t`: modes with `m_j < t` contribute.
pub fn spectral_entropy(m_diag: &[f64], t: f64, f: &DVector<f64>) -> Result<EntropyValue> {
    let e_set: Vec<usize> = (0..m_diag.len()).filter(|&j| m_diag[j] < t).collect();
    oscillator_entropy(m_diag, &e_set, f)
}

/// Two-variable surface of the spectral family:
/// `2 sum_{m_j < min(s,t)} arcoth(m_j) |f_j|^2`.
pub fn spectral_tf(m_diag: &[f64], s: f64, t: f64, f: &DVector<f64>) -> Result<EntropyValue> {
    spectral_entropy(m_diag, s.min(t), f)
}

/// The `(tau, sigma)` pair of a diagonal mode collection in the interleaved
/// layout: `tau = diag(m_j) x I_2`, `sigma = Im<.,.>` blockwise.
pub fn oscillator_space(m_diag: &[f64]) -> Result<SymplecticHilbertSpace> {
    let n = 2 * m_diag.len();
    let mut tau = DMatrix::zeros(n, n);
    let mut sigma = DMatrix::zeros(n, n);
    for (j, &m) in m_diag.iter().enumerate() {
        tau[(2 * j, 2 * j)] = m;
        tau[(2 * j + 1, 2 * j + 1)] = m;
        sigma[(2 * j, 2 * j + 1)] = 1.0;
        sigma[(2 * j + 1, 2 * j)] = -1.0;
    }
    SymplecticHilbertSpace::new(tau, sigma)
}

/// Base-space generators of the spectral subspace `L_t`: both real
/// directions of every mode with `m_j < t`.
pub fn spectral_generators(m_diag: &[f64], t: f64) -> Vec<DVector<f64>> {
    let n = 2 * m_diag.len();
    let mut gens = Vec::new();
    for (j, &m) in m_diag.iter().enumerate() {
        if m < t {
            for k in 0..2 {
                let mut v = DVector::zeros(n);
                v[2 * j + k] = 1.0;
                gens.push(v);
            }
        }
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_mode_entropy_is_ln_three_at_m_two() {
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let s = oscillator_entropy(&[2.0], &[0], &f).unwrap();
        assert_abs_diff_eq!(s.finite().unwrap(), 3.0_f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn unit_mass_populated_mode_is_infinite() {
        let f = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(
            oscillator_entropy(&[1.0], &[0], &f).unwrap(),
            EntropyValue::Infinite
        );
        // Unpopulated vacuum mode stays finite.
        let g = DVector::from_vec(vec![0.0, 0.0, 0.3, 0.4]);
        let s = oscillator_entropy(&[1.0, 2.0], &[0, 1], &g).unwrap();
        assert_abs_diff_eq!(
            s.finite().unwrap(),
            2.0 * arcoth(2.0) * 0.25,
            epsilon = 1e-14
        );
    }

    #[test]
    fn support_off_the_index_set_gives_zero() {
        let f = DVector::from_vec(vec![1.0, 2.0, 0.0, 0.0]);
        let s = oscillator_entropy(&[2.0, 3.0], &[1], &f).unwrap();
        assert_eq!(s, EntropyValue::Finite(0.0));
    }

    #[test]
    fn spectral_surface_truncates_at_the_smaller_time() {
        let m = [2.0, 3.0];
        let f = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let t = spectral_tf(&m, 2.5, 3.5, &f).unwrap();
        // Only the m=2 mode is below min(s,t)=2.5.
        assert_abs_diff_eq!(t.finite().unwrap(), 2.0 * arcoth(2.0), epsilon = 1e-14);
        // s >= t collapses to the diagonal.
        let d = spectral_tf(&m, 4.0, 3.5, &f).unwrap();
        let s35 = spectral_entropy(&m, 3.5, &f).unwrap();
        assert_eq!(d, s35);
    }

    #[test]
    fn spectral_generators_follow_the_strict_threshold() {
        let m = [2.0, 3.0];
        assert_eq!(spectral_generators(&m, 2.0).len(), 0);
        assert_eq!(spectral_generators(&m, 2.5).len(), 2);
        assert_eq!(spectral_generators(&m, 3.5).len(), 4);
    }

    #[test]
    fn oscillator_space_validates() {
        let space = oscillator_space(&[1.5, 2.0, 7.0]).unwrap();
        let report = space.validate();
        assert!(report.is_valid);
        assert!(report.operator_norm_d <= 1.0 + 1e-12);
    }
}
