//! Real symplectic Hilbert spaces `(K, tau, sigma)`.
//!
//! `K` is a finite-dimensional real vector space carrying a positive definite
//! symmetric form `tau` (the one-particle metric) and an antisymmetric form
//! `sigma` (the symplectic form). The pair is admissible when
//!
//! ```text
//! sigma(f, g)^2 <= tau(f, f) tau(g, g)   for all f, g,
//! ```
//!
//! equivalently when the operator `D` defined by `sigma(f,g) = tau(f, D g)`
//! has operator norm at most 1 in the metric of `tau`. `D` is
//! tau-antisymmetric (`D^adj = -D`), so its squared modulus `-D^2` is
//! positive semidefinite; these facts drive the purification in
//! [`crate::purify`].
//!
//! Vectors are plain coordinate columns in the user's basis; `tau` and
//! `sigma` are Gram matrices in the same basis. Nothing here assumes the
//! basis is orthonormal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Numerical tolerances used across validation, subspace calculus and the
/// modular engine. All rank-like decisions are relative to the largest
/// singular value of the matrix at hand.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for rank decisions.
    pub rank_rel: f64,
    /// Slack allowed on the norm bound `|D| <= 1`.
    pub norm_slack: f64,
    /// Condition-number ceiling for basis solves in the modular engine.
    pub cond_max: f64,
    /// Relative threshold deciding whether a vector meets the purely
    /// infinite part (and hence has infinite entropy).
    pub infinite_rel: f64,
    /// How close an eigenvalue of the modular operator may come to 1 before
    /// the dual projector formula is refused.
    pub spectral_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-10,
            norm_slack: 1e-10,
            cond_max: 1e12,
            infinite_rel: 1e-8,
            spectral_gap: 1e-8,
        }
    }
}

impl Tolerances {
    /// Applies a `key=value` override; used by the CLI's `--tol-override`.
    pub fn set(&mut self, key: &str, value: f64) -> std::result::Result<(), String> {
        match key {
            "rank_rel" => self.rank_rel = value,
            "norm_slack" => self.norm_slack = value,
            "cond_max" => self.cond_max = value,
            "infinite_rel" => self.infinite_rel = value,
            "spectral_gap" => self.spectral_gap = value,
            other => return Err(format!("unknown tolerance key `{other}`")),
        }
        Ok(())
    }
}

/// A finite-dimensional real symplectic Hilbert space.
#[derive(Debug, Clone)]
pub struct SymplecticHilbertSpace {
    dim: usize,
    tau: DMatrix<f64>,
    sigma: DMatrix<f64>,
    tol: Tolerances,
}

/// Outcome of [`SymplecticHilbertSpace::validate`].
///
/// `is_valid` is the conjunction of the structural checks; the remaining
/// fields preserve the raw residuals so callers can report them.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub tau_symmetry_residual: f64,
    pub tau_min_eigenvalue: f64,
    pub tau_max_eigenvalue: f64,
    pub sigma_antisymmetry_residual: f64,
    /// Operator norm of `D` in the tau metric.
    pub operator_norm_d: f64,
    pub norm_bound_ok: bool,
    /// Dimension of `ker D` (relative rank threshold).
    pub kernel_dim_d: usize,
    /// True when `ker D` is odd-dimensional; purification will pad.
    pub kernel_odd: bool,
    pub messages: Vec<String>,
    pub is_valid: bool,
}

impl SymplecticHilbertSpace {
    /// Builds a space from Gram matrices in the user's basis. Only dimension
    /// coherence is enforced here; call [`Self::validate`] for the full
    /// structural check.
    pub fn new(tau: DMatrix<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let dim = tau.nrows();
        if tau.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: tau.ncols(),
                context: "tau must be square",
            });
        }
        if sigma.nrows() != dim || sigma.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: sigma.nrows(),
                context: "sigma must match tau",
            });
        }
        Ok(SymplecticHilbertSpace {
            dim,
            tau,
            sigma,
            tol: Tolerances::default(),
        })
    }

    /// Same as [`Self::new`] with explicit tolerances.
    pub fn with_tolerances(
        tau: DMatrix<f64>,
        sigma: DMatrix<f64>,
        tol: Tolerances,
    ) -> Result<Self> {
        let mut space = Self::new(tau, sigma)?;
        space.tol = tol;
        Ok(space)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self) -> &DMatrix<f64> {
        &self.tau
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    fn check_dim(&self, v: &DVector<f64>, context: &'static str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
                context,
            });
        }
        Ok(())
    }

    /// Evaluates `tau(f, g)`.
    pub fn tau_form(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        self.check_dim(f, "tau_form lhs")?;
        self.check_dim(g, "tau_form rhs")?;
        Ok((f.transpose() * &self.tau * g)[(0, 0)])
    }

    /// Evaluates `sigma(f, g)`.
    pub fn sigma_form(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        self.check_dim(f, "sigma_form lhs")?;
        self.check_dim(g, "sigma_form rhs")?;
        Ok((f.transpose() * &self.sigma * g)[(0, 0)])
    }

    /// Both forms at once.
    pub fn eval_forms(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<(f64, f64)> {
        Ok((self.tau_form(f, g)?, self.sigma_form(f, g)?))
    }

    /// The tau-norm `sqrt(tau(f, f))`.
    pub fn tau_norm(&self, f: &DVector<f64>) -> Result<f64> {
        Ok(self.tau_form(f, f)?.max(0.0).sqrt())
    }

    /// Change of basis to a tau-orthonormal frame: returns `w` with
    /// `w^T tau w = 1`. Coordinates transform by `x = w y`; the matrix of an
    /// operator `a` (acting on coordinates) transforms to `w^-1 a w`.
    ///
    /// Fails with [`Error::IllConditioned`] if `tau` is not positive definite
    /// within the rank tolerance.
    pub(crate) fn tau_orthonormal_frame(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let (values, vectors) = linalg::sym_eigen(&self.tau);
        let max = values.iter().cloned().fold(0.0_f64, f64::max);
        let floor = self.tol.rank_rel * max.max(f64::MIN_POSITIVE);
        if values.iter().any(|&l| l <= floor) {
            return Err(Error::IllConditioned {
                what: "tau Gram matrix",
                cond: if values.min() > 0.0 {
                    max / values.min()
                } else {
                    f64::INFINITY
                },
                max: 1.0 / self.tol.rank_rel,
            });
        }
        let w = &vectors * DMatrix::from_diagonal(&values.map(|l| 1.0 / l.sqrt()));
        let w_inv = DMatrix::from_diagonal(&values.map(|l| l.sqrt())) * vectors.transpose();
        Ok((w, w_inv))
    }

    /// Matrix of `D` (defined by `sigma(f,g) = tau(f, D g)`) in the
    /// tau-orthonormal frame `w`: this is just `w^T sigma w`, which is real
    /// antisymmetric.
    pub(crate) fn d_orthonormal(&self, w: &DMatrix<f64>) -> DMatrix<f64> {
        w.transpose() * &self.sigma * w
    }

    /// Structural validation: symmetry/antisymmetry residuals, positive
    /// definiteness of `tau`, the norm bound on `D`, and the parity of
    /// `ker D` (odd kernels are padded during purification).
    pub fn validate(&self) -> ValidationReport {
        let mut messages = Vec::new();
        let tau_sym = linalg::dist(&self.tau, &self.tau.transpose());
        let sigma_anti = (&self.sigma + self.sigma.transpose()).norm();
        let (tau_eigs, _) = linalg::sym_eigen(&self.tau);
        let tau_min = if self.dim > 0 { tau_eigs[0] } else { 1.0 };
        let tau_max = if self.dim > 0 {
            tau_eigs[self.dim - 1]
        } else {
            1.0
        };
        let scale = tau_max.abs().max(f64::MIN_POSITIVE);

        let mut norm_d = 0.0;
        let mut kernel_dim = 0;
        let tau_pd = tau_min > self.tol.rank_rel * scale;
        if tau_pd {
            if let Ok((w, _)) = self.tau_orthonormal_frame() {
                let d_on = self.d_orthonormal(&w);
                norm_d = linalg::op_norm(&d_on);
                kernel_dim = self.dim - linalg::rank(&d_on, self.tol.rank_rel);
            }
        } else {
            messages.push(format!(
                "tau is not positive definite: min eigenvalue {tau_min:.3e}"
            ));
        }

        let norm_bound_ok = tau_pd && norm_d <= 1.0 + self.tol.norm_slack;
        if tau_pd && !norm_bound_ok {
            messages.push(format!(
                "compatibility bound violated: |D| = {norm_d:.12e} > 1"
            ));
        }
        let kernel_odd = kernel_dim % 2 == 1;
        if kernel_odd {
            messages.push(format!(
                "ker D has odd dimension {kernel_dim}; purification will pad K by one \
                 tau-orthonormal dimension with vanishing sigma"
            ));
        }
        if tau_sym > 1e-12 * scale {
            messages.push(format!("tau symmetry residual {tau_sym:.3e}"));
        }
        if sigma_anti > 1e-12 * scale {
            messages.push(format!("sigma antisymmetry residual {sigma_anti:.3e}"));
        }

        let is_valid = tau_pd
            && norm_bound_ok
            && tau_sym <= 1e-10 * scale
            && sigma_anti <= 1e-10 * scale;
        ValidationReport {
            dim: self.dim,
            tau_symmetry_residual: tau_sym,
            tau_min_eigenvalue: tau_min,
            tau_max_eigenvalue: tau_max,
            sigma_antisymmetry_residual: sigma_anti,
            operator_norm_d: norm_d,
            norm_bound_ok,
            kernel_dim_d: kernel_dim,
            kernel_odd,
            messages,
            is_valid,
        }
    }

    /// Block-diagonal direct sum. Returns the summed space together with the
    /// coordinate offset of each summand, so vectors can be embedded with
    /// [`Self::embed_summand`].
    pub fn direct_sum(parts: &[&SymplecticHilbertSpace]) -> Result<(Self, Vec<usize>)> {
        if parts.is_empty() {
            return Err(Error::InvalidSummand("empty direct sum".into()));
        }
        let total: usize = parts.iter().map(|s| s.dim).sum();
        let mut tau = DMatrix::zeros(total, total);
        let mut sigma = DMatrix::zeros(total, total);
        let mut offsets = Vec::with_capacity(parts.len());
        let mut at = 0;
        for part in parts {
            offsets.push(at);
            tau.view_mut((at, at), (part.dim, part.dim)).copy_from(&part.tau);
            sigma
                .view_mut((at, at), (part.dim, part.dim))
                .copy_from(&part.sigma);
            at += part.dim;
        }
        let tol = parts[0].tol;
        Ok((
            SymplecticHilbertSpace {
                dim: total,
                tau,
                sigma,
                tol,
            },
            offsets,
        ))
    }

    /// Embeds a summand vector into a direct sum built by [`Self::direct_sum`].
    pub fn embed_summand(
        &self,
        offsets: &[usize],
        index: usize,
        f: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let at = *offsets.get(index).ok_or(Error::InvalidSummand(format!(
            "summand index {index} out of range"
        )))?;
        let end = offsets.get(index + 1).copied().unwrap_or(self.dim);
        let block = end - at;
        if f.len() != block {
            return Err(Error::DimensionMismatch {
                expected: block,
                got: f.len(),
                context: "embed_summand",
            });
        }
        let mut out = DVector::zeros(self.dim);
        out.rows_mut(at, block).copy_from(f);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn std_sigma2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    #[test]
    fn trivial_sigma_validates_with_zero_d() {
        let space =
            SymplecticHilbertSpace::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap();
        let report = space.validate();
        assert!(report.is_valid);
        assert_abs_diff_eq!(report.operator_norm_d, 0.0, epsilon = 1e-14);
        assert_eq!(report.kernel_dim_d, 2);
        assert!(!report.kernel_odd);
    }

    #[test]
    fn doubled_sigma_violates_the_bound_with_norm_two() {
        // sigma = 2 * standard form against tau = identity: |D| = 2.
        let space =
            SymplecticHilbertSpace::new(DMatrix::identity(2, 2), 2.0 * std_sigma2()).unwrap();
        let report = space.validate();
        assert!(!report.is_valid);
        assert!(!report.norm_bound_ok);
        assert_abs_diff_eq!(report.operator_norm_d, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn anisotropic_tau_rescales_the_norm_to_exactly_one() {
        // tau = diag(4, 1), sigma = 2 * standard: in the tau-orthonormal frame
        // D becomes the standard complex structure, so |D| = 1 (pure case).
        let tau = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let space = SymplecticHilbertSpace::new(tau, 2.0 * std_sigma2()).unwrap();
        let report = space.validate();
        assert!(report.is_valid);
        assert_abs_diff_eq!(report.operator_norm_d, 1.0, epsilon = 1e-12);
        assert_eq!(report.kernel_dim_d, 0);
    }

    #[test]
    fn odd_kernel_is_flagged_for_padding() {
        // 3-dimensional space with a rank-2 sigma: ker D is 1-dimensional.
        let mut sigma = DMatrix::zeros(3, 3);
        sigma[(0, 1)] = 0.5;
        sigma[(1, 0)] = -0.5;
        let space = SymplecticHilbertSpace::new(DMatrix::identity(3, 3), sigma).unwrap();
        let report = space.validate();
        assert!(report.is_valid);
        assert_eq!(report.kernel_dim_d, 1);
        assert!(report.kernel_odd);
        assert!(report.messages.iter().any(|m| m.contains("pad")));
    }

    #[test]
    fn eval_forms_is_bilinear_and_antisymmetric() {
        let tau = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let space = SymplecticHilbertSpace::new(tau, 0.4 * std_sigma2()).unwrap();
        let f = DVector::from_vec(vec![1.0, -2.0]);
        let g = DVector::from_vec(vec![0.5, 3.0]);
        let h = DVector::from_vec(vec![-1.0, 0.25]);
        let (t_fg, s_fg) = space.eval_forms(&f, &g).unwrap();
        let (t_gf, s_gf) = space.eval_forms(&g, &f).unwrap();
        assert_abs_diff_eq!(t_fg, t_gf, epsilon = 1e-14);
        assert_abs_diff_eq!(s_fg, -s_gf, epsilon = 1e-14);
        let combo = 2.0 * &g + 3.0 * &h;
        let (t_lin, s_lin) = space.eval_forms(&f, &combo).unwrap();
        let (t_fh, s_fh) = space.eval_forms(&f, &h).unwrap();
        assert_abs_diff_eq!(t_lin, 2.0 * t_fg + 3.0 * t_fh, epsilon = 1e-12);
        assert_abs_diff_eq!(s_lin, 2.0 * s_fg + 3.0 * s_fh, epsilon = 1e-12);
    }

    #[test]
    fn direct_sum_evaluates_blockwise() {
        let a = SymplecticHilbertSpace::new(DMatrix::identity(2, 2), 0.5 * std_sigma2()).unwrap();
        let b = SymplecticHilbertSpace::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 3.0])),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let (sum, offsets) = SymplecticHilbertSpace::direct_sum(&[&a, &b]).unwrap();
        assert_eq!(sum.dim(), 4);
        let fa = DVector::from_vec(vec![1.0, 2.0]);
        let fb = DVector::from_vec(vec![-1.0, 1.0]);
        let ea = sum.embed_summand(&offsets, 0, &fa).unwrap();
        let eb = sum.embed_summand(&offsets, 1, &fb).unwrap();
        // Cross terms vanish, blocks reproduce the summand forms.
        let (t_cross, s_cross) = sum.eval_forms(&ea, &eb).unwrap();
        assert_abs_diff_eq!(t_cross, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s_cross, 0.0, epsilon = 1e-14);
        let (t_aa, s_aa) = sum.eval_forms(&ea, &ea).unwrap();
        let (t_a, s_a) = a.eval_forms(&fa, &fa).unwrap();
        assert_abs_diff_eq!(t_aa, t_a, epsilon = 1e-14);
        assert_abs_diff_eq!(s_aa, s_a, epsilon = 1e-14);
    }

    #[test]
    fn cauchy_schwarz_holds_on_valid_spaces() {
        // Deterministic pseudo-random sweep; the bound must hold whenever
        // validation passes.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.random_range(1..6);
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let tau = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let anti = (&raw - raw.transpose()) * 0.5;
            let space = SymplecticHilbertSpace::new(tau, anti.clone()).unwrap();
            let report = space.validate();
            if !report.is_valid {
                // Rescale sigma inside the bound and retry.
                let scale = 0.9 / report.operator_norm_d.max(1e-12);
                let space =
                    SymplecticHilbertSpace::new(space.tau().clone(), anti * scale).unwrap();
                assert!(space.validate().is_valid);
                continue;
            }
            for _ in 0..20 {
                let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let g = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let (tff, _) = space.eval_forms(&f, &f).unwrap();
                let (tgg, _) = space.eval_forms(&g, &g).unwrap();
                let (_, sfg) = space.eval_forms(&f, &g).unwrap();
                assert!(sfg * sfg <= tff * tgg * (1.0 + 1e-9));
            }
        }
    }
}
