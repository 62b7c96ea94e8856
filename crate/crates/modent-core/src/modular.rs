//! Modular data and the entropy form.
//!
//! The standard part `Ls = La (+) Lf` of a decomposed subspace is a standard
//! subspace of `Ls+ = La+ (+) Lf+`: it meets `i+ Ls` trivially and spans
//! `Ls+` over the complex structure. The Tomita operator is the real-linear
//! involution fixing `Ls` and negating `i+ Ls`; its polar decomposition
//! `S = J Delta^{1/2}` yields the modular operator `Delta` (symmetric
//! positive definite, complex-linear), the modular conjugation `J`
//! (tau+-orthogonal, anticommuting with `i+`), and the generator
//! `K = -log Delta` of the modular flow `U(x) = exp(-i+ x K)`.
//!
//! The entropy form is `R = c(K)(1 - J)c(K)` with
//! `c(lambda) = sqrt(lambda / (1 - exp(-lambda)))`, extended by zero on the
//! nonseparating part. Relative entropy between coherent excitations `g` and
//! `f` is the quadratic form value at `h = g - f`, infinite exactly when `h`
//! has a component on the purely infinite part.
//!
//! Everything is computed in the internal tau+-orthonormal frame, where the
//! adjoint of a real-linear (also antilinear) operator is the plain
//! transpose; antilinear operators are stored as real matrices and their
//! anticommutation with `i+` is an invariant, not a representation choice.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::purify::PureSpace;
use crate::subspace::{self, Decomposition};

/// Tomita data of the standard part of a decomposition.
#[derive(Debug, Clone)]
pub struct ModularData {
    dec: Decomposition,
    /// Orthonormal basis of `Ls+` (internal frame), columns `La+` then `Lf+`.
    basis_on: DMatrix<f64>,
    /// Number of columns of the `La+` block.
    abelian_cols: usize,
    delta_local: DMatrix<f64>,
    j_local: DMatrix<f64>,
    k_local: DMatrix<f64>,
    i_local: DMatrix<f64>,
    /// Ascending eigenvalues of `Delta` on `Ls+`.
    eigenvalues: Vec<f64>,
    condition: f64,
}

/// A relative-entropy result: a finite nonnegative number or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyValue {
    Finite(f64),
    Infinite,
}

impl EntropyValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, EntropyValue::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(&self) -> Option<f64> {
        match self {
            EntropyValue::Finite(v) => Some(*v),
            EntropyValue::Infinite => None,
        }
    }

    /// Collapses to `f64`, mapping the infinite case to `f64::INFINITY`.
    pub fn as_f64(&self) -> f64 {
        match self {
            EntropyValue::Finite(v) => *v,
            EntropyValue::Infinite => f64::INFINITY,
        }
    }
}

impl serde::Serialize for EntropyValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EntropyValue::Finite(v) => s.serialize_f64(*v),
            EntropyValue::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Builds the modular data of the standard part of `dec`.
///
/// The Tomita operator is assembled from the basis matrix `[B | i+ B]` of
/// `Ls+`, where `B` spans `Ls`; a condition number above the `cond_max`
/// tolerance means `Ls` is nearly non-standard inside `Ls+` and is refused.
pub fn modular_data(pure: &PureSpace, dec: &Decomposition) -> Result<ModularData> {
    let basis_on = dec.standard_plus_basis_on();
    let abelian_cols = dec.abelian_plus.dim();
    let k2 = basis_on.ncols();
    let tol = pure.tolerances();

    let i_local = basis_on.transpose() * pure.i_plus_on() * &basis_on;

    if k2 == 0 {
        return Ok(ModularData {
            dec: dec.clone(),
            basis_on,
            abelian_cols,
            delta_local: DMatrix::zeros(0, 0),
            j_local: DMatrix::zeros(0, 0),
            k_local: DMatrix::zeros(0, 0),
            i_local,
            eigenvalues: Vec::new(),
            condition: 1.0,
        });
    }

    // Standard basis of Ls in local coordinates, and its i+ image.
    let b_local = basis_on.transpose() * dec.standard_basis_on();
    let ib_local = &i_local * &b_local;
    let mut t = DMatrix::zeros(k2, k2);
    t.view_mut((0, 0), (k2, b_local.ncols())).copy_from(&b_local);
    t.view_mut((0, b_local.ncols()), (k2, ib_local.ncols()))
        .copy_from(&ib_local);

    let condition = linalg::condition_number(&t);
    if !condition.is_finite() || condition > tol.cond_max {
        return Err(Error::IllConditioned {
            what: "standard-part basis [B | i+ B]".into(),
            cond: condition,
            max: tol.cond_max,
        });
    }
    let t_inv = t.clone().try_inverse().ok_or_else(|| Error::IllConditioned {
        what: "standard-part basis [B | i+ B]".into(),
        cond: f64::INFINITY,
        max: tol.cond_max,
    })?;

    // Tomita involution: fixes Ls, negates i+ Ls.
    let mut signs = DMatrix::identity(k2, k2);
    for j in b_local.ncols()..k2 {
        signs[(j, j)] = -1.0;
    }
    let s_tom = &t * signs * t_inv;

    // Polar pieces; the tau+-adjoint is the transpose in local coordinates.
    let delta_local = {
        let d = s_tom.transpose() * &s_tom;
        (&d + d.transpose()) * 0.5
    };
    let (eigenvalue_vec, eigenvectors_local) = linalg::sym_eigen(&delta_local);
    let eigenvalues: Vec<f64> = eigenvalue_vec.iter().copied().collect();
    if eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::IllConditioned {
            what: "modular operator (nonpositive eigenvalue)".into(),
            cond: f64::INFINITY,
            max: tol.cond_max,
        });
    }
    let inv_sqrt =
        linalg::sym_apply_eigen(&eigenvalues, &eigenvectors_local, |l| 1.0 / l.sqrt());
    let j_local = &s_tom * inv_sqrt;
    let k_local = linalg::sym_apply_eigen(&eigenvalues, &eigenvectors_local, |l| -l.ln());

    Ok(ModularData {
        dec: dec.clone(),
        basis_on,
        abelian_cols,
        delta_local,
        j_local,
        k_local,
        i_local,
        eigenvalues,
        condition,
    })
}

impl ModularData {
    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    /// Dimension of `Ls+`.
    pub fn standard_plus_dim(&self) -> usize {
        self.basis_on.ncols()
    }

    /// Condition number of the `[B | i+ B]` basis matrix.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Ascending eigenvalues of the modular operator on `Ls+`.
    pub fn delta_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Ascending eigenvalues of `log Delta` on `Ls+`.
    pub fn log_delta_eigenvalues(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.eigenvalues.iter().map(|l| l.ln()).collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// The modular operator in user coordinates, extended by zero off `Ls+`.
    pub fn delta_matrix(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&(&self.basis_on * &self.delta_local * self.basis_on.transpose()))
    }

    /// The modular conjugation in user coordinates, zero off `Ls+`.
    pub fn j_matrix(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&(&self.basis_on * &self.j_local * self.basis_on.transpose()))
    }

    /// `K = -log Delta` in user coordinates, extended by zero on `L0+`
    /// (and vanishing on the purely infinite part, where no modular data
    /// exists).
    pub fn k_matrix(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&(&self.basis_on * &self.k_local * self.basis_on.transpose()))
    }

    /// Applies the modular flow `U(x) = exp(-i+ x K)` to a user-coordinate
    /// doubled vector. Acts as the identity on `L0+` (and on `La+`, where
    /// `K = 0`); refuses vectors with a component on the purely infinite
    /// part.
    pub fn modular_flow(&self, pure: &PureSpace, x: f64, f: &DVector<f64>) -> Result<DVector<f64>> {
        if f.len() != pure.doubled_dim() {
            return Err(Error::DimensionMismatch {
                expected: pure.doubled_dim(),
                got: f.len(),
                context: "modular flow input",
            });
        }
        let y = pure.to_internal(f);
        let norm = y.norm();
        let inf_part = self.dec.infinite.projector_on() * &y;
        let tol = pure.tolerances();
        if inf_part.norm() > tol.infinite_rel * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::InfiniteComponent {
                relative: inf_part.norm() / norm.max(f64::MIN_POSITIVE),
            });
        }
        if self.basis_on.ncols() == 0 {
            return Ok(f.clone());
        }
        let local = self.basis_on.transpose() * &y;
        let cos = linalg::sym_apply(&self.k_local, |l| (x * l).cos());
        let sin = linalg::sym_apply(&self.k_local, |l| (x * l).sin());
        let u_local = cos - &self.i_local * sin;
        let flowed = &y - &self.basis_on * &local + &self.basis_on * (u_local * local);
        Ok(pure.from_internal(&flowed))
    }
}

/// The positive quadratic form whose value at `g - f` is the relative
/// entropy between the coherent excitations `g` and `f`.
#[derive(Debug, Clone)]
pub struct EntropyForm {
    r_on: DMatrix<f64>,
    infinite_projector_on: DMatrix<f64>,
    infinite_dim: usize,
    infinite_rel: f64,
}

/// The stable branch of `c(lambda) = sqrt(lambda / (1 - exp(-lambda)))`.
///
/// Near zero the quotient is evaluated by its series
/// `1 + lambda/2 + lambda^2/12 + O(lambda^4)` to avoid the removable
/// singularity.
pub fn c_function(lambda: f64) -> f64 {
    let q = if lambda.abs() < 1e-4 {
        1.0 + lambda / 2.0 + lambda * lambda / 12.0
    } else {
        lambda / (-(-lambda).exp_m1())
    };
    q.sqrt()
}

/// Assembles the entropy form `R = c(K)(1 - J)c(K)`, extended by zero on
/// the nonseparating part.
pub fn entropy_form(pure: &PureSpace, md: &ModularData) -> EntropyForm {
    let nn = pure.doubled_dim();
    let r_on = if md.basis_on.ncols() == 0 {
        DMatrix::zeros(nn, nn)
    } else {
        let ck = linalg::sym_apply(&md.k_local, c_function);
        let one = DMatrix::identity(md.k_local.nrows(), md.k_local.ncols());
        let r_local = &ck * (one - &md.j_local) * &ck;
        let r_local = (&r_local + r_local.transpose()) * 0.5;
        &md.basis_on * r_local * md.basis_on.transpose()
    };
    EntropyForm {
        r_on,
        infinite_projector_on: md.dec.infinite.projector_on(),
        infinite_dim: md.dec.infinite.dim(),
        infinite_rel: pure.tolerances().infinite_rel,
    }
}

impl EntropyForm {
    /// Dimension of the purely infinite part feeding the infinity detector.
    pub fn infinite_dim(&self) -> usize {
        self.infinite_dim
    }

    /// Whether `h` (user doubled coordinates) has a component on the purely
    /// infinite part above the relative threshold.
    pub fn is_infinite(&self, pure: &PureSpace, h: &DVector<f64>) -> bool {
        if self.infinite_dim == 0 {
            return false;
        }
        let y = pure.to_internal(h);
        let norm = y.norm();
        (&self.infinite_projector_on * y).norm() > self.infinite_rel * norm.max(f64::MIN_POSITIVE)
    }

    /// Entropy of a single doubled vector `h`: `S(h) = tau+(h, R h)`, or
    /// `Infinite` when `h` touches the purely infinite part. Finite values
    /// within round-off below zero are clamped to zero.
    pub fn entropy(&self, pure: &PureSpace, h: &DVector<f64>) -> EntropyValue {
        if self.is_infinite(pure, h) {
            return EntropyValue::Infinite;
        }
        let y = pure.to_internal(h);
        let raw = (y.transpose() * &self.r_on * &y)[(0, 0)];
        let value = if raw < 0.0 && raw >= -1e-10 { 0.0 } else { raw };
        EntropyValue::Finite(value)
    }

    /// Relative entropy between the coherent excitations `g` and `f`
    /// (doubled user coordinates): the form value at `h = g - f`.
    pub fn relative_entropy(
        &self,
        pure: &PureSpace,
        g: &DVector<f64>,
        f: &DVector<f64>,
    ) -> EntropyValue {
        self.entropy(pure, &(g - f))
    }

    /// Entropy of a base-space vector, embedded as `h (+) 0` first.
    pub fn entropy_base(&self, pure: &PureSpace, h: &DVector<f64>) -> Result<EntropyValue> {
        Ok(self.entropy(pure, &pure.embed(h)?))
    }

    /// The symmetric bilinear pairing `S(u, v) = tau+(u, R v)` underlying
    /// the quadratic form; refuses vectors touching the purely infinite
    /// part, where the pairing is undefined.
    pub fn pairing(&self, pure: &PureSpace, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        for h in [u, v] {
            if self.is_infinite(pure, h) {
                let y = pure.to_internal(h);
                return Err(Error::InfiniteComponent {
                    relative: (&self.infinite_projector_on * &y).norm()
                        / y.norm().max(f64::MIN_POSITIVE),
                });
            }
        }
        let yu = pure.to_internal(u);
        let yv = pure.to_internal(v);
        Ok((yu.transpose() * &self.r_on * yv)[(0, 0)])
    }

    /// The form matrix pulled back to user coordinates:
    /// `S(h) = h^T F h` for user-coordinate `h`.
    pub fn form_matrix_user(&self, pure: &PureSpace) -> DMatrix<f64> {
        let nn = self.r_on.nrows();
        let mut to_int = DMatrix::zeros(nn, nn);
        for j in 0..nn {
            let mut e = DVector::zeros(nn);
            e[j] = 1.0;
            to_int.set_column(j, &pure.to_internal(&e));
        }
        to_int.transpose() * &self.r_on * to_int
    }
}

/// Reconstructs the factorial projector from modular data:
/// `P_f = a(Delta_f) + J b(Delta_f)` on `Lf+`, with `a(l) = 1/(1-l)` and
/// `b(l) = sqrt(l)/(1-l)`. Returned in user coordinates; must agree with
/// the decomposition's basis-built projector.
pub fn pf_via_modular(pure: &PureSpace, md: &ModularData) -> Result<DMatrix<f64>> {
    let nn = pure.doubled_dim();
    let a_cols = md.abelian_cols;
    let f_cols = md.basis_on.ncols() - a_cols;
    if f_cols == 0 {
        return Ok(DMatrix::zeros(nn, nn));
    }
    // Restrict to the Lf+ block of the local data.
    let delta_f = md.delta_local.view((a_cols, a_cols), (f_cols, f_cols)).into_owned();
    let j_f = md.j_local.view((a_cols, a_cols), (f_cols, f_cols)).into_owned();
    let (vals, vecs) = linalg::sym_eigen(&delta_f);
    let gap = pure.tolerances().spectral_gap;
    for &l in vals.iter() {
        if (l - 1.0).abs() < gap {
            return Err(Error::SpectralSingularity {
                eigenvalue: l,
                point: 1.0,
                tol: gap,
            });
        }
    }
    let a = linalg::sym_apply_eigen(vals.as_slice(), &vecs, |l| 1.0 / (1.0 - l));
    let b = linalg::sym_apply_eigen(vals.as_slice(), &vecs, |l| l.sqrt() / (1.0 - l));
    let p_local = a + j_f * b;
    let b_f = md.basis_on.columns(a_cols, f_cols).into_owned();
    Ok(pure.operator_from_internal(&(&b_f * p_local * b_f.transpose())))
}

/// Residuals of the structural identities tying together the Tomita data,
/// the entropy form, and the cut. All residuals are relative; a healthy
/// instance keeps every one near round-off.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InvariantReport {
    /// `max ||S b - b|| / ||b||` over a basis of `Ls`, for the Tomita
    /// involution `S = J Delta^{1/2}` reassembled from the polar pieces.
    pub tomita_fixed_point: f64,
    /// `||J^2 - 1||` on `Ls+`.
    pub j_squared: f64,
    /// `||J Delta J - Delta^{-1}|| / ||Delta^{-1}||` on `Ls+`.
    pub j_delta_j: f64,
    /// Most negative eigenvalue of the entropy form, over its largest one
    /// (zero when the form is positive semidefinite to round-off).
    pub form_negativity: f64,
    /// `||R - c(K)^2||`; bounded by one, with equality approached as the
    /// modular spectrum accumulates at zero.
    pub form_minus_c_squared: f64,
    /// `max ||R b||` over a tau+-orthonormal basis of the symplectic
    /// complement of `L`, relative to `||R||`: the form must vanish there.
    pub complement_kernel: f64,
    /// `max |S(Q h) - S(h)| / (1 + |S(h)|)` over the finite-entropy sample
    /// vectors: cutting is invisible to the entropy form.
    pub cut_invariance: f64,
    /// Sample vectors skipped by the infinite-entropy detector.
    pub samples_skipped: usize,
}

impl InvariantReport {
    /// Largest of the residuals, for a single-number health check.
    pub fn worst(&self) -> f64 {
        [
            self.tomita_fixed_point,
            self.j_squared,
            self.j_delta_j,
            self.form_negativity,
            (self.form_minus_c_squared - 1.0).max(0.0),
            self.complement_kernel,
            self.cut_invariance,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the structural identities of `md` and `form` on one instance.
///
/// `samples` are doubled user-coordinate vectors used for the cut-invariance
/// check; vectors flagged infinite are skipped and counted. Everything else
/// is evaluated on `Ls+` in the internal frame, where the identities are
/// exact statements about matrices.
pub fn invariant_report(
    pure: &PureSpace,
    md: &ModularData,
    form: &EntropyForm,
    samples: &[DVector<f64>],
) -> Result<InvariantReport> {
    let k2 = md.basis_on.ncols();
    let (tomita, j2, jdj, r_c2) = if k2 == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let one = DMatrix::identity(k2, k2);
        let sqrt_delta = linalg::sym_apply(&md.k_local, |l| (-l / 2.0).exp());
        let s_tom = &md.j_local * sqrt_delta;
        let b_local = md.basis_on.transpose() * md.dec.standard_basis_on();
        let mut tomita: f64 = 0.0;
        for j in 0..b_local.ncols() {
            let b = b_local.column(j).into_owned();
            tomita = tomita.max((&s_tom * &b - &b).norm() / b.norm().max(f64::MIN_POSITIVE));
        }
        let j2 = linalg::op_norm(&(&md.j_local * &md.j_local - &one));
        let delta_inv = linalg::sym_apply(&md.k_local, f64::exp);
        let jdj = linalg::op_norm(&(&md.j_local * &md.delta_local * &md.j_local - &delta_inv))
            / linalg::op_norm(&delta_inv).max(f64::MIN_POSITIVE);
        let ck2 = linalg::sym_apply(&md.k_local, |l| c_function(l) * c_function(l));
        let r_local = md.basis_on.transpose() * &form.r_on * &md.basis_on;
        let r_c2 = linalg::op_norm(&(r_local - ck2));
        (tomita, j2, jdj, r_c2)
    };

    let (r_vals, _) = linalg::sym_eigen(&form.r_on);
    let r_top = r_vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let negativity = r_vals
        .iter()
        .fold(0.0_f64, |a, &v| a.max(-v))
        / r_top.max(f64::MIN_POSITIVE);

    let l_prime = subspace::symplectic_complement(pure, &md.dec.l)?;
    let mut kernel: f64 = 0.0;
    let bp = l_prime.basis_on();
    for j in 0..bp.ncols() {
        let rb = &form.r_on * bp.column(j).into_owned();
        kernel = kernel.max(rb.norm() / r_top.max(f64::MIN_POSITIVE));
    }

    let mut cut_res: f64 = 0.0;
    let mut skipped = 0usize;
    for h in samples {
        match form.entropy(pure, h) {
            EntropyValue::Infinite => skipped += 1,
            EntropyValue::Finite(s) => {
                let cut = md.dec.cut(pure, h)?;
                let s_cut = form.entropy(pure, &cut).as_f64();
                cut_res = cut_res.max((s_cut - s).abs() / (1.0 + s.abs()));
            }
        }
    }

    Ok(InvariantReport {
        tomita_fixed_point: tomita,
        j_squared: j2,
        j_delta_j: jdj,
        form_negativity: negativity,
        form_minus_c_squared: r_c2,
        complement_kernel: kernel,
        cut_invariance: cut_res,
        samples_skipped: skipped,
    })
}
