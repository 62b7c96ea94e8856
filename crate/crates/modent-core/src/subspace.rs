//! Subspace calculus in the doubled space.
//!
//! A closed real subspace `L` of the base space (embedded as `L (+) 0` in
//! `K+`) splits `K+` into four mutually orthogonal, `i+`-invariant-where-it-
//! matters pieces:
//!
//! * the nonseparating part `L0+ = (L + i+ L)^perp`, invisible to `L`;
//! * the abelian part `La = L meet L'` (radical of `sigma` on `L`) and its
//!   complex span `La+ = La + i+ La`;
//! * the purely infinite part `Linf = L meet i+ L`, a complex subspace on
//!   which entropy diverges;
//! * the factorial remainder `Lf+ = (L0+ (+) La+ (+) Linf)^perp`, with
//!   `Lf = Lf+ meet L` a standard subspace of `Lf+`.
//!
//! The cut projector acts blockwise as `0 (+) (1 - P_a) (+) P_f (+) 1`,
//! where `P_a` is the orthogonal projector onto `La` and `P_f` is the
//! real-linear projector with image `Lf` and kernel the `sigma+`-complement
//! of `Lf` inside `Lf+`. Its kernel is exactly the symplectic complement of
//! `L`, and the entropy form vanishes there.
//!
//! All spans, intersections and complements run in the internal
//! tau+-orthonormal frame through singular-value thresholding and projector
//! algebra; bases are exposed in user coordinates on demand.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::purify::PureSpace;

/// A subspace of the doubled space, stored as an orthonormal basis in the
/// internal frame.
#[derive(Debug, Clone)]
pub struct Subspace {
    basis_on: DMatrix<f64>,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis_on.ncols()
    }

    /// Orthonormal basis in the internal frame (columns).
    pub(crate) fn basis_on(&self) -> &DMatrix<f64> {
        &self.basis_on
    }

    /// Basis columns converted to user coordinates. The columns are
    /// tau+-orthonormal rather than Euclidean-orthonormal.
    pub fn basis_user(&self, pure: &PureSpace) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.basis_on.nrows(), self.basis_on.ncols());
        for j in 0..self.basis_on.ncols() {
            let col = pure.from_internal(&self.basis_on.column(j).into_owned());
            out.set_column(j, &col);
        }
        out
    }

    /// Orthogonal projector onto the subspace in the internal frame.
    pub(crate) fn projector_on(&self) -> DMatrix<f64> {
        linalg::projector(&self.basis_on)
    }

    /// Distance from `v` (user coordinates) to the subspace, in the
    /// tau+-norm.
    pub fn distance(&self, pure: &PureSpace, v: &DVector<f64>) -> Result<f64> {
        let y = pure.to_internal(v);
        let residual = &y - self.projector_on() * &y;
        Ok(residual.norm())
    }

    /// Membership test with a relative tolerance.
    pub fn contains(&self, pure: &PureSpace, v: &DVector<f64>, tol_rel: f64) -> Result<bool> {
        let y = pure.to_internal(v);
        let norm = y.norm();
        Ok(self.distance(pure, v)? <= tol_rel * norm.max(f64::MIN_POSITIVE))
    }
}

fn hcat(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.iter().map(|m| m.nrows()).max().unwrap_or(0);
    let cols: usize = parts.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in parts {
        out.view_mut((0, at), (m.nrows(), m.ncols())).copy_from(*m);
        at += m.ncols();
    }
    out
}

/// Span of doubled-space vectors given in user coordinates.
pub fn span(pure: &PureSpace, generators: &[DVector<f64>]) -> Result<Subspace> {
    let nn = pure.doubled_dim();
    let mut cols = DMatrix::zeros(nn, generators.len());
    for (j, g) in generators.iter().enumerate() {
        if g.len() != nn {
            return Err(Error::DimensionMismatch {
                expected: nn,
                got: g.len(),
                context: "span generator",
            });
        }
        cols.set_column(j, &pure.to_internal(g));
    }
    Ok(Subspace {
        basis_on: linalg::orthonormal_span(&cols, pure.tolerances().rank_rel),
    })
}

/// Span of base-space vectors, embedded as `f (+) 0` first. Vectors may have
/// the pre-padding dimension.
pub fn span_base(pure: &PureSpace, generators: &[DVector<f64>]) -> Result<Subspace> {
    let embedded: Result<Vec<DVector<f64>>> = generators.iter().map(|g| pure.embed(g)).collect();
    span(pure, &embedded?)
}

/// Intersection of two subspaces.
pub fn intersect(pure: &PureSpace, a: &Subspace, b: &Subspace) -> Subspace {
    Subspace {
        basis_on: linalg::intersect_spans(
            a.basis_on(),
            b.basis_on(),
            pure.tolerances().rank_rel,
        ),
    }
}

/// Orthogonal complement of `a` inside `within` (tau+-orthogonal).
pub fn complement_within(pure: &PureSpace, a: &Subspace, within: &Subspace) -> Subspace {
    // Project `within`'s basis off `a` and re-orthonormalize.
    let residual = within.basis_on() - a.projector_on() * within.basis_on();
    Subspace {
        basis_on: linalg::orthonormal_span(&residual, pure.tolerances().rank_rel.max(1e-12)),
    }
}

/// Orthogonal complement of `a` in the whole doubled space.
pub fn orthogonal_complement(pure: &PureSpace, a: &Subspace) -> Subspace {
    let _ = pure;
    Subspace {
        basis_on: linalg::orthonormal_complement(a.basis_on(), 1e-12),
    }
}

/// The `i+`-span of a subspace: `span(A + i+ A)`.
pub fn i_span(pure: &PureSpace, a: &Subspace) -> Subspace {
    let ia = pure.i_plus_on() * a.basis_on();
    Subspace {
        basis_on: linalg::orthonormal_span(&hcat(&[a.basis_on(), &ia]), pure.tolerances().rank_rel),
    }
}

/// Symplectic complement of a base-space subspace, inside the base space:
/// `L' = { f in K : sigma(f, g) = 0 for all g in L }`, returned embedded in
/// `K (+) 0`. Fails when a generator of `l` leaves `K (+) 0`.
pub fn symplectic_complement(pure: &PureSpace, l: &Subspace) -> Result<Subspace> {
    let n = pure.base_dim();
    let base = base_block(pure, l)?;
    let sigma_on = base_sigma_on(pure);
    let constraints = base.transpose() * &sigma_on; // rows: sigma(b_j, .)
    let kernel = linalg::orthonormal_kernel(&constraints, pure.tolerances().rank_rel);
    // Embed into the doubled internal frame.
    let mut basis = DMatrix::zeros(2 * n, kernel.ncols());
    basis.view_mut((0, 0), (n, kernel.ncols())).copy_from(&kernel);
    Ok(Subspace { basis_on: basis })
}

/// `sigma+`-complement of `l` inside `ambient`:
/// `{ v in ambient : sigma+(v, w) = 0 for all w in l }`.
fn sigma_plus_complement_within(pure: &PureSpace, l: &Subspace, ambient: &Subspace) -> Subspace {
    // sigma+ in the internal frame has Gram matrix -i+.
    let gram = -(l.basis_on().transpose() * pure.i_plus_on() * ambient.basis_on());
    let kernel = linalg::orthonormal_kernel(&gram, pure.tolerances().rank_rel);
    Subspace {
        basis_on: ambient.basis_on() * kernel,
    }
}

/// The Gram matrix of `sigma` in the internal base frame. Since `sigma+`
/// restricts to `sigma` on `K (+) 0` and has internal Gram `-i+`, this is
/// the top-left block of `-i+`.
fn base_sigma_on(pure: &PureSpace) -> DMatrix<f64> {
    let n = pure.base_dim();
    -pure.i_plus_on().view((0, 0), (n, n)).into_owned()
}

/// Extracts the base-space block of a subspace that must lie in `K (+) 0`.
fn base_block(pure: &PureSpace, l: &Subspace) -> Result<DMatrix<f64>> {
    let n = pure.base_dim();
    let basis = l.basis_on();
    let lower = basis.view((n, 0), (n, basis.ncols()));
    let residual = lower.norm();
    if residual > 1e-8 * (basis.ncols().max(1) as f64).sqrt() {
        return Err(Error::NotInBaseSpace { residual });
    }
    Ok(basis.view((0, 0), (n, basis.ncols())).into_owned())
}

/// The four-way splitting of the doubled space induced by a base subspace,
/// together with its projectors.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// The input subspace `L` (embedded in `K (+) 0`).
    pub l: Subspace,
    /// `L0+`: the nonseparating part (complex subspace).
    pub nonseparating: Subspace,
    /// `La = L meet L'` (real subspace of `K (+) 0`).
    pub abelian: Subspace,
    /// `La+ = La + i+ La`.
    pub abelian_plus: Subspace,
    /// `Lf`: the factorial part of `L`.
    pub factorial: Subspace,
    /// `Lf+`: the complex carrier of the factorial part.
    pub factorial_plus: Subspace,
    /// `Linf = L meet i+ L` (complex subspace; entropy diverges here).
    pub infinite: Subspace,
    p_a_on: DMatrix<f64>,
    p_f_on: DMatrix<f64>,
    q_on: DMatrix<f64>,
}

/// Components of a doubled vector along the four-way splitting, in user
/// coordinates.
#[derive(Debug, Clone)]
pub struct ComponentSplit {
    pub nonseparating: DVector<f64>,
    pub abelian_plus: DVector<f64>,
    pub factorial_plus: DVector<f64>,
    pub infinite: DVector<f64>,
}

/// Computes the four-way decomposition for `L = span(generators)`, with the
/// generators given as doubled vectors lying in `K (+) 0` (use
/// [`decompose_base`] for base-space vectors).
pub fn decompose(pure: &PureSpace, generators: &[DVector<f64>]) -> Result<Decomposition> {
    let l = span(pure, generators)?;
    decompose_subspace(pure, l)
}

/// Same as [`decompose`] for base-space generators.
pub fn decompose_base(pure: &PureSpace, generators: &[DVector<f64>]) -> Result<Decomposition> {
    let l = span_base(pure, generators)?;
    decompose_subspace(pure, l)
}

fn decompose_subspace(pure: &PureSpace, l: Subspace) -> Result<Decomposition> {
    let nn = pure.doubled_dim();
    let tol = pure.tolerances();
    // Make sure L really lives in the base slot.
    base_block(pure, &l)?;

    let i_on = pure.i_plus_on();
    let il = Subspace {
        basis_on: linalg::orthonormal_span(&(i_on * l.basis_on()), tol.rank_rel),
    };

    // Purely infinite part: L meet i+ L, then enforce complex invariance.
    let infinite = {
        let raw = intersect(pure, &l, &il);
        i_clean(pure, raw)
    };

    // Nonseparating part: complement of L + i+ L.
    let l_plus_il = Subspace {
        basis_on: linalg::orthonormal_span(&hcat(&[l.basis_on(), il.basis_on()]), tol.rank_rel),
    };
    let nonseparating = i_clean(pure, orthogonal_complement(pure, &l_plus_il));

    // Abelian part: La = L meet L'.
    let l_prime = symplectic_complement(pure, &l)?;
    let abelian = intersect(pure, &l, &l_prime);
    let abelian_plus = i_span(pure, &abelian);

    // Factorial carrier: complement of everything else.
    let others = Subspace {
        basis_on: hcat(&[
            nonseparating.basis_on(),
            abelian_plus.basis_on(),
            infinite.basis_on(),
        ]),
    };
    let factorial_plus = i_clean(pure, orthogonal_complement(pure, &others));
    let factorial = intersect(pure, &factorial_plus, &l);

    // Dimension bookkeeping; failures mean the tolerance split a piece.
    let dims_ok = nonseparating.dim() + abelian_plus.dim() + infinite.dim() + factorial_plus.dim()
        == nn
        && abelian.dim() + factorial.dim() + infinite.dim() == l.dim()
        && 2 * factorial.dim() == factorial_plus.dim();
    if !dims_ok {
        return Err(Error::DegenerateDecomposition(format!(
            "pieces do not add up: dim L = {}, L0+ = {}, La = {}, Lf = {}, Lf+ = {}, Linf = {}, \
             ambient = {}",
            l.dim(),
            nonseparating.dim(),
            abelian.dim(),
            factorial.dim(),
            factorial_plus.dim(),
            infinite.dim(),
            nn
        )));
    }

    // P_a: orthogonal projector onto La.
    let p_a_on = abelian.projector_on();

    // P_f: image Lf, kernel the sigma+-complement of Lf inside Lf+.
    let p_f_on = if factorial.dim() == 0 {
        DMatrix::zeros(nn, nn)
    } else {
        let kernel_part = sigma_plus_complement_within(pure, &factorial, &factorial_plus);
        if kernel_part.dim() != factorial.dim() {
            return Err(Error::DegenerateDecomposition(format!(
                "factorial kernel has dimension {} instead of {}",
                kernel_part.dim(),
                factorial.dim()
            )));
        }
        // Solve for the projector in Lf+ coordinates.
        let b = factorial_plus.basis_on();
        let img = b.transpose() * factorial.basis_on();
        let ker = b.transpose() * kernel_part.basis_on();
        let u = hcat(&[&img, &ker]);
        let cond = linalg::condition_number(&u);
        if !cond.is_finite() || cond > tol.cond_max {
            return Err(Error::DegenerateDecomposition(format!(
                "image/kernel basis of P_f is ill-conditioned (cond = {cond:.3e})"
            )));
        }
        let mut target = DMatrix::zeros(u.nrows(), u.ncols());
        target
            .view_mut((0, 0), (img.nrows(), img.ncols()))
            .copy_from(&img);
        let u_inv = u.clone().try_inverse().ok_or_else(|| {
            Error::DegenerateDecomposition("image/kernel basis of P_f is singular".into())
        })?;
        let p_local = target * u_inv;
        b * p_local * b.transpose()
    };

    // Cut projector: 0 on L0+, 1 - P_a on La+, P_f on Lf+, identity on Linf.
    let q_on = (abelian_plus.projector_on() - &p_a_on) + &p_f_on + infinite.projector_on();

    Ok(Decomposition {
        l,
        nonseparating,
        abelian,
        abelian_plus,
        factorial,
        factorial_plus,
        infinite,
        p_a_on,
        p_f_on,
        q_on,
    })
}

/// Re-symmetrizes a subspace that is complex in exact arithmetic: spans it
/// jointly with its `i+` image so round-off cannot break invariance.
fn i_clean(pure: &PureSpace, s: Subspace) -> Subspace {
    if s.dim() == 0 {
        return s;
    }
    i_span(pure, &s)
}

impl Decomposition {
    /// The cut projector in user coordinates.
    pub fn cut_projector(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&self.q_on)
    }

    /// Orthogonal projector onto the abelian part `La`, user coordinates.
    pub fn p_abelian(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&self.p_a_on)
    }

    /// The factorial projector (image `Lf`, kernel its `sigma+`-complement in
    /// `Lf+`, zero off `Lf+`), user coordinates.
    pub fn p_factorial(&self, pure: &PureSpace) -> DMatrix<f64> {
        pure.operator_from_internal(&self.p_f_on)
    }

    /// Applies the cut projector to a user-coordinate vector.
    pub fn cut(&self, pure: &PureSpace, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != pure.doubled_dim() {
            return Err(Error::DimensionMismatch {
                expected: pure.doubled_dim(),
                got: v.len(),
                context: "cut projector input",
            });
        }
        Ok(pure.from_internal(&(&self.q_on * pure.to_internal(v))))
    }

    /// Splits a doubled vector along the four pieces (user coordinates).
    pub fn project_components(&self, pure: &PureSpace, v: &DVector<f64>) -> Result<ComponentSplit> {
        if v.len() != pure.doubled_dim() {
            return Err(Error::DimensionMismatch {
                expected: pure.doubled_dim(),
                got: v.len(),
                context: "project_components input",
            });
        }
        let y = pure.to_internal(v);
        let part = |s: &Subspace| pure.from_internal(&(s.projector_on() * &y));
        Ok(ComponentSplit {
            nonseparating: part(&self.nonseparating),
            abelian_plus: part(&self.abelian_plus),
            factorial_plus: part(&self.factorial_plus),
            infinite: part(&self.infinite),
        })
    }

    /// tau+-norm of the component of `v` on the purely infinite part.
    pub fn infinite_component_norm(&self, pure: &PureSpace, v: &DVector<f64>) -> Result<f64> {
        let y = pure.to_internal(v);
        Ok((self.infinite.projector_on() * y).norm())
    }

    /// Orthonormal basis (internal frame) of the standard part
    /// `Ls = La (+) Lf`.
    pub(crate) fn standard_basis_on(&self) -> DMatrix<f64> {
        hcat(&[self.abelian.basis_on(), self.factorial.basis_on()])
    }

    /// Orthonormal basis (internal frame) of `Ls+ = La+ (+) Lf+`.
    pub(crate) fn standard_plus_basis_on(&self) -> DMatrix<f64> {
        hcat(&[
            self.abelian_plus.basis_on(),
            self.factorial_plus.basis_on(),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purify::{purify, PurifyOptions};
    use crate::space::SymplecticHilbertSpace;
    use approx::assert_abs_diff_eq;

    fn std_sigma2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
    }

    fn oscillator_mode(m: f64) -> PureSpace {
        let space =
            SymplecticHilbertSpace::new(DMatrix::identity(2, 2) * m, std_sigma2()).unwrap();
        purify(&space, PurifyOptions::default()).unwrap()
    }

    #[test]
    fn pure_full_space_is_purely_infinite_with_nonseparating_mirror() {
        // Pure case, L = K: L is i+-invariant, so everything in K (+) 0 is
        // purely infinite and the mirror copy 0 (+) K is nonseparating.
        let pure = oscillator_mode(1.0);
        let gens = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        let dec = decompose_base(&pure, &gens).unwrap();
        assert_eq!(dec.infinite.dim(), 2);
        assert_eq!(dec.nonseparating.dim(), 2);
        assert_eq!(dec.abelian.dim(), 0);
        assert_eq!(dec.factorial.dim(), 0);
        // 0 (+) K sits inside the nonseparating part.
        let mirror = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        assert!(dec
            .nonseparating
            .contains(&pure, &mirror, 1e-9)
            .unwrap());
    }

    #[test]
    fn oscillator_full_space_is_purely_factorial_with_reference_cut() {
        // m = 2: L = K is factorial; the cut projector in the complex block
        // basis is [[1, sqrt(3)],[0, 0]].
        let pure = oscillator_mode(2.0);
        let gens = vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
        ];
        let dec = decompose_base(&pure, &gens).unwrap();
        assert_eq!(dec.factorial.dim(), 2);
        assert_eq!(dec.factorial_plus.dim(), 4);
        assert_eq!(dec.abelian.dim(), 0);
        assert_eq!(dec.infinite.dim(), 0);
        assert_eq!(dec.nonseparating.dim(), 0);
        let q = dec.cut_projector(&pure);
        let s3 = 3.0_f64.sqrt();
        let mut expected = DMatrix::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).copy_from(&DMatrix::identity(2, 2));
        expected
            .view_mut((0, 2), (2, 2))
            .copy_from(&(DMatrix::identity(2, 2) * s3));
        assert_abs_diff_eq!((q - expected).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn abelian_line_splits_into_abelian_and_nonseparating() {
        // sigma = 0 on R^2, L = span{e1}: La = L, no factorial or infinite
        // part, and L0+ picks up the two untouched directions.
        let space =
            SymplecticHilbertSpace::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap();
        let pure = purify(&space, PurifyOptions::default()).unwrap();
        let gens = vec![DVector::from_vec(vec![1.0, 0.0])];
        let dec = decompose_base(&pure, &gens).unwrap();
        assert_eq!(dec.abelian.dim(), 1);
        assert_eq!(dec.abelian_plus.dim(), 2);
        assert_eq!(dec.nonseparating.dim(), 2);
        assert_eq!(dec.factorial.dim(), 0);
        assert_eq!(dec.infinite.dim(), 0);
        // Q kills L' = K (+) 0 entirely.
        let q = dec.cut_projector(&pure);
        for gen in [
            DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]),
        ] {
            assert_abs_diff_eq!((&q * gen).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cut_projector_is_idempotent_and_kills_the_symplectic_complement() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let n = rng.random_range(2..6);
            let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let tau = &a * a.transpose() + DMatrix::identity(n, n) * 0.4;
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let space0 = SymplecticHilbertSpace::new(tau.clone(), (&raw - raw.transpose()) * 0.5)
                .unwrap();
            let norm = space0.validate().operator_norm_d;
            let sigma = space0.sigma() * (0.85 / norm.max(1e-9));
            let space = SymplecticHilbertSpace::new(tau, sigma).unwrap();
            let pure = purify(&space, PurifyOptions::default()).unwrap();
            let k = rng.random_range(1..=n);
            let gens: Vec<DVector<f64>> = (0..k)
                .map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)))
                .collect();
            let dec = match decompose_base(&pure, &gens) {
                Ok(d) => d,
                Err(e) => panic!("decomposition failed: {e}"),
            };
            let q = dec.q_on.clone();
            assert_abs_diff_eq!((&q * &q - &q).norm(), 0.0, epsilon = 1e-7);
            // ker Q contains L'.
            let l_prime = symplectic_complement(&pure, &dec.l).unwrap();
            assert_abs_diff_eq!((&q * l_prime.basis_on()).norm(), 0.0, epsilon = 1e-7);
            // The four pieces are mutually orthogonal and fill the space.
            let total = dec.nonseparating.dim()
                + dec.abelian_plus.dim()
                + dec.factorial_plus.dim()
                + dec.infinite.dim();
            assert_eq!(total, pure.doubled_dim());
            // P_f fixes Lf and kills its sigma+-complement inside Lf+.
            let pf = dec.p_f_on.clone();
            assert_abs_diff_eq!(
                (&pf * dec.factorial.basis_on() - dec.factorial.basis_on()).norm(),
                0.0,
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn components_resum_to_the_vector() {
        let pure = oscillator_mode(2.0);
        let gens = vec![DVector::from_vec(vec![1.0, 0.5])];
        let dec = decompose_base(&pure, &gens).unwrap();
        let v = DVector::from_vec(vec![0.3, -0.7, 1.1, 0.2]);
        let split = dec.project_components(&pure, &v).unwrap();
        let resum = &split.nonseparating + &split.abelian_plus + &split.factorial_plus
            + &split.infinite;
        assert_abs_diff_eq!((resum - v).norm(), 0.0, epsilon = 1e-10);
    }
}
