//! Purification: embedding `(K, tau, sigma)` into its doubling `K+ = K (+) K`
//! with a compatible complex structure.
//!
//! Write `sigma(f,g) = tau(f, D g)` with `|D| <= 1` and let `C` be the
//! orthogonal complex structure obtained from the polar data of `D` on
//! `(ker D)^perp` (sign fixed below) and by pairing a tau-orthonormal basis
//! on `ker D`. The doubled space carries
//!
//! ```text
//! i+ = [ -D            C sqrt(1+D^2) ]
//!      [ C sqrt(1+D^2)      D        ],        tau+ = tau (+) tau,
//! ```
//!
//! which squares to -1 and is tau+-antisymmetric, so
//! `<f,g>+ = tau+(f,g) + i sigma+(f,g)` with `sigma+(f,g) = tau+(f, -i+ g)`
//! is a complex scalar product. Restricted to `K (+) 0` the imaginary part
//! reproduces `sigma`, so the original space sits inside `K+` as a real
//! subspace; all entropy constructions happen in this doubling.
//!
//! Sign convention: on `(ker D)^perp` we take `C` with `C |D| = -D`. With
//! this choice a single thermal oscillator mode (`tau = m Re(f~ g)`,
//! `sigma = Im(f~ g)`, so `D` acts as `-i/m`) purifies to
//! `i+ = [[i/m, i s],[i s, -i/m]]` with `s = sqrt(1 - 1/m^2)`, the form used
//! by every worked example downstream, and the cut projector and modular
//! operator of the full-space subspace come out with the reference signs
//! (see `modular::tests`). The opposite sign gives a unitarily equivalent
//! doubling (conjugate by `1 (+) -1`) and identical entropies, but mirrored
//! matrices.
//!
//! When `ker D` is odd-dimensional no pairing exists; the base space is
//! padded by one extra tau-orthonormal dimension on which `sigma` vanishes.
//! Embedding then appends a zero coordinate, and all doubled-space data
//! lives over the padded base.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::space::{SymplecticHilbertSpace, Tolerances};

/// Options for [`purify`].
#[derive(Debug, Clone, Copy)]
pub struct PurifyOptions {
    /// Pad odd-dimensional `ker D` automatically (default). When disabled,
    /// an odd kernel is an error.
    pub allow_padding: bool,
}

impl Default for PurifyOptions {
    fn default() -> Self {
        PurifyOptions {
            allow_padding: true,
        }
    }
}

/// The purified doubling of a symplectic Hilbert space.
///
/// All matrices are stored both in user coordinates (the basis the space was
/// constructed in, possibly padded) and in an internal tau-orthonormal frame
/// in which `tau+` is the identity; spectral calculus and adjoints always
/// happen in the internal frame.
#[derive(Debug, Clone)]
pub struct PureSpace {
    base: SymplecticHilbertSpace,
    user_dim: usize,
    padded: bool,
    tol: Tolerances,
    // Single-space operators, user coordinates (base_dim x base_dim).
    d: DMatrix<f64>,
    abs_d: DMatrix<f64>,
    c: DMatrix<f64>,
    // Doubled-space data, user coordinates (2 base_dim square).
    i_plus: DMatrix<f64>,
    tau_plus: DMatrix<f64>,
    // Internal frame: x = w y blockwise; `w_plus = diag(w, w)`.
    w: DMatrix<f64>,
    w_inv: DMatrix<f64>,
    i_plus_on: DMatrix<f64>,
}

/// Builds the orthogonal complex structure attached to a real antisymmetric
/// matrix in an orthonormal frame: `c = -phase(d)` on the singular pairs of
/// `d`, completed by consecutive pairing on the kernel. Returns the kernel
/// dimension alongside.
///
/// Singular directions of an antisymmetric matrix come in two-dimensional
/// blocks; classifying them by thresholding eigenvalues of `-d^2` can split
/// a borderline block. Instead each partner is constructed directly as
/// `d v / |d v|`, which keeps blocks intact by construction and makes
/// `c^2 = -1` exact up to round-off regardless of spectral gaps.
fn antisymmetric_complex_structure(d: &DMatrix<f64>, rank_rel: f64) -> (DMatrix<f64>, usize) {
    let n = d.nrows();
    let (mu, u) = linalg::sym_eigen(&(-(d * d)));
    let s_max = mu.iter().map(|&m| m.max(0.0).sqrt()).fold(0.0_f64, f64::max);
    let cutoff = rank_rel * s_max.max(f64::MIN_POSITIVE);

    let mut c = DMatrix::zeros(n, n);
    let mut used = DMatrix::<f64>::zeros(n, n); // projector onto consumed directions
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut v: DVector<f64> = u.column(i).into_owned();
        v -= &used * &v;
        let len = v.norm();
        if len < 0.5 {
            // Mostly consumed as an earlier partner.
            continue;
        }
        v /= len;
        let mut w = d * &v;
        let s = w.norm();
        if s <= cutoff {
            kernel.push(v.clone());
            used += &v * v.transpose();
            continue;
        }
        w /= s;
        // w is exactly tau-orthogonal to v (antisymmetry); scrub residual
        // overlap with previously consumed directions.
        w -= &used * &w;
        w /= w.norm();
        // Pair action of c = -phase(d): v -> -w, w -> v.
        c += &v * w.transpose() - &w * v.transpose();
        used += &v * v.transpose() + &w * w.transpose();
    }
    let kernel_dim = kernel.len();
    for pair in kernel.chunks_exact(2) {
        // k1 -> k2 -> -k1.
        c += &pair[1] * pair[0].transpose() - &pair[0] * pair[1].transpose();
    }
    (c, kernel_dim)
}

/// Purifies a validated space. Fails with [`Error::NormViolation`] when the
/// compatibility bound does not hold, and with [`Error::OddKernel`] when
/// `ker D` is odd-dimensional and padding is disabled.
pub fn purify(space: &SymplecticHilbertSpace, options: PurifyOptions) -> Result<PureSpace> {
    let tol = space.tolerances();
    let user_dim = space.dim();

    // First pass to learn the kernel parity; may trigger padding.
    let (w0, _) = space.tau_orthonormal_frame()?;
    let d0 = space.d_orthonormal(&w0);
    let norm = linalg::op_norm(&d0);
    if norm > 1.0 + tol.norm_slack {
        return Err(Error::NormViolation { norm });
    }
    let (_, kernel_dim) = antisymmetric_complex_structure(&d0, tol.rank_rel);
    let needs_pad = kernel_dim % 2 == 1;
    if needs_pad && !options.allow_padding {
        return Err(Error::OddKernel { dim: kernel_dim });
    }

    let base = if needs_pad {
        let n = user_dim + 1;
        let mut tau = DMatrix::zeros(n, n);
        tau.view_mut((0, 0), (user_dim, user_dim))
            .copy_from(space.tau());
        tau[(user_dim, user_dim)] = 1.0;
        let mut sigma = DMatrix::zeros(n, n);
        sigma
            .view_mut((0, 0), (user_dim, user_dim))
            .copy_from(space.sigma());
        SymplecticHilbertSpace::with_tolerances(tau, sigma, tol)?
    } else {
        space.clone()
    };

    let n = base.dim();
    let (w, w_inv) = base.tau_orthonormal_frame()?;
    let d_on = base.d_orthonormal(&w);

    // Spectral data of -D^2 (symmetric PSD); |D| and sqrt(1 + D^2) come from
    // its spectrum, C from the pair-aware polar construction.
    let minus_d_sq = -(&d_on * &d_on);
    let (mu, u) = linalg::sym_eigen(&minus_d_sq);
    let abs_on = &u
        * DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            mu.iter().map(|&m| m.max(0.0).sqrt()),
        ))
        * u.transpose();
    let (c_on, post_kernel) = antisymmetric_complex_structure(&d_on, tol.rank_rel);
    debug_assert_eq!(post_kernel % 2, 0, "kernel parity after padding");

    // sqrt(1 + D^2) = sqrt(1 - (-D^2)), clamped against round-off above 1.
    let sqrt1 = &u
        * DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            mu.iter().map(|&m| (1.0 - m).max(0.0).sqrt()),
        ))
        * u.transpose();

    let cs = &c_on * &sqrt1;
    let mut i_on = DMatrix::zeros(2 * n, 2 * n);
    i_on.view_mut((0, 0), (n, n)).copy_from(&(-&d_on));
    i_on.view_mut((0, n), (n, n)).copy_from(&cs);
    i_on.view_mut((n, 0), (n, n)).copy_from(&cs);
    i_on.view_mut((n, n), (n, n)).copy_from(&d_on);

    debug_assert!(
        (&i_on * &i_on + DMatrix::identity(2 * n, 2 * n)).norm() < 1e-8 * (n as f64),
        "i+ must square to -1"
    );

    // Back to user coordinates.
    let to_user = |m: &DMatrix<f64>| -> DMatrix<f64> { &w * m * &w_inv };
    let d = to_user(&d_on);
    let abs_d = to_user(&abs_on);
    let c = to_user(&c_on);
    let mut w_plus = DMatrix::zeros(2 * n, 2 * n);
    w_plus.view_mut((0, 0), (n, n)).copy_from(&w);
    w_plus.view_mut((n, n), (n, n)).copy_from(&w);
    let mut w_plus_inv = DMatrix::zeros(2 * n, 2 * n);
    w_plus_inv.view_mut((0, 0), (n, n)).copy_from(&w_inv);
    w_plus_inv.view_mut((n, n), (n, n)).copy_from(&w_inv);
    let i_plus = &w_plus * &i_on * &w_plus_inv;

    let mut tau_plus = DMatrix::zeros(2 * n, 2 * n);
    tau_plus.view_mut((0, 0), (n, n)).copy_from(base.tau());
    tau_plus.view_mut((n, n), (n, n)).copy_from(base.tau());

    Ok(PureSpace {
        base,
        user_dim,
        padded: needs_pad,
        tol,
        d,
        abs_d,
        c,
        i_plus,
        tau_plus,
        w,
        w_inv,
        i_plus_on: i_on,
    })
}

impl PureSpace {
    /// The (possibly padded) base space the doubling was built over.
    pub fn base(&self) -> &SymplecticHilbertSpace {
        &self.base
    }

    /// Dimension of the base space before padding.
    pub fn user_dim(&self) -> usize {
        self.user_dim
    }

    /// Dimension of the base space actually used (padded if needed).
    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    /// Real dimension of the doubled space.
    pub fn doubled_dim(&self) -> usize {
        2 * self.base.dim()
    }

    /// True when the base space was padded by one dimension.
    pub fn padded(&self) -> bool {
        self.padded
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// `D` in user coordinates (`sigma(f,g) = tau(f, D g)`).
    pub fn d_matrix(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `|D| = sqrt(-D^2)` in user coordinates.
    pub fn abs_d_matrix(&self) -> &DMatrix<f64> {
        &self.abs_d
    }

    /// The complex structure `C` on the base space (`C^2 = -1`,
    /// `C |D| = -D`, pairing convention on `ker D`).
    pub fn c_matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// The complex structure of the doubling in user coordinates.
    pub fn i_plus(&self) -> &DMatrix<f64> {
        &self.i_plus
    }

    /// The complex structure in the internal tau+-orthonormal frame.
    pub(crate) fn i_plus_on(&self) -> &DMatrix<f64> {
        &self.i_plus_on
    }

    /// Gram matrix of `tau+` in user coordinates.
    pub fn tau_plus(&self) -> &DMatrix<f64> {
        &self.tau_plus
    }

    /// Embeds a base-space vector as `f (+) 0`. Accepts vectors of the
    /// original (pre-padding) dimension, which are zero-extended, or of the
    /// padded dimension.
    pub fn embed(&self, f: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.base.dim();
        let mut out = DVector::zeros(2 * n);
        if f.len() == n {
            out.rows_mut(0, n).copy_from(f);
        } else if f.len() == self.user_dim {
            out.rows_mut(0, self.user_dim).copy_from(f);
        } else {
            return Err(Error::DimensionMismatch {
                expected: self.user_dim,
                got: f.len(),
                context: "embed expects a base-space vector",
            });
        }
        Ok(out)
    }

    /// Embeds a base-space vector into the mirror copy: `g -> 0 (+) g`.
    /// Accepts pre-padding or padded lengths, like [`PureSpace::embed`].
    pub fn embed_mirror(&self, g: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.base.dim();
        let mut out = DVector::zeros(2 * n);
        if g.len() == n || g.len() == self.user_dim {
            out.rows_mut(n, g.len()).copy_from(g);
        } else {
            return Err(Error::DimensionMismatch {
                expected: self.user_dim,
                got: g.len(),
                context: "embed_mirror expects a base-space vector",
            });
        }
        Ok(out)
    }

    fn check_doubled(&self, v: &DVector<f64>, context: &'static str) -> Result<()> {
        if v.len() != self.doubled_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.doubled_dim(),
                got: v.len(),
                context,
            });
        }
        Ok(())
    }

    /// `tau+(f, g)` for doubled vectors in user coordinates.
    pub fn tau_plus_form(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        self.check_doubled(f, "tau_plus_form lhs")?;
        self.check_doubled(g, "tau_plus_form rhs")?;
        Ok((f.transpose() * &self.tau_plus * g)[(0, 0)])
    }

    /// `sigma+(f, g) = tau+(f, -i+ g)`.
    pub fn sigma_plus_form(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<f64> {
        self.check_doubled(f, "sigma_plus_form lhs")?;
        self.check_doubled(g, "sigma_plus_form rhs")?;
        let mig = -(&self.i_plus * g);
        Ok((f.transpose() * &self.tau_plus * mig)[(0, 0)])
    }

    /// The complex scalar product `<f, g>+ = tau+(f,g) + i sigma+(f,g)`,
    /// returned as `(re, im)`. Antilinear in `f`, linear in `g` with respect
    /// to multiplication by `i+`.
    pub fn complex_scalar(&self, f: &DVector<f64>, g: &DVector<f64>) -> Result<(f64, f64)> {
        Ok((self.tau_plus_form(f, g)?, self.sigma_plus_form(f, g)?))
    }

    /// Norm in the doubled space.
    pub fn norm_plus(&self, f: &DVector<f64>) -> Result<f64> {
        Ok(self.tau_plus_form(f, f)?.max(0.0).sqrt())
    }

    /// Converts doubled-space user coordinates to the internal orthonormal
    /// frame.
    pub(crate) fn to_internal(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.base.dim();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n)
            .copy_from(&(&self.w_inv * v.rows(0, n)));
        out.rows_mut(n, n)
            .copy_from(&(&self.w_inv * v.rows(n, n)));
        out
    }

    /// Inverse of [`Self::to_internal`].
    pub(crate) fn from_internal(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.base.dim();
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&(&self.w * v.rows(0, n)));
        out.rows_mut(n, n).copy_from(&(&self.w * v.rows(n, n)));
        out
    }

    /// Converts the matrix of an operator on the doubling from the internal
    /// frame to user coordinates.
    pub(crate) fn operator_from_internal(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.base.dim();
        let mut w_plus = DMatrix::zeros(2 * n, 2 * n);
        w_plus.view_mut((0, 0), (n, n)).copy_from(&self.w);
        w_plus.view_mut((n, n), (n, n)).copy_from(&self.w);
        let mut w_plus_inv = DMatrix::zeros(2 * n, 2 * n);
        w_plus_inv.view_mut((0, 0), (n, n)).copy_from(&self.w_inv);
        w_plus_inv.view_mut((n, n), (n, n)).copy_from(&self.w_inv);
        &w_plus * m * &w_plus_inv
    }
}
