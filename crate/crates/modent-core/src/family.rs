//! One-parameter increasing families of subspaces and the two-variable
//! entropy surface.
//!
//! A family assigns to every `t` in a real interval a subspace `L_t`, with
//! `L_s` contained in `L_t` for `s <= t`. The central object is
//!
//! `T_f(s, t) = S_t(Q_s f)` for `s < t`, and `S_t(f)` for `s >= t`,
//!
//! where `S_t` is the entropy form of `L_t` and `Q_s` the cut projector of
//! `L_s`. The quotient-space presentation of the same function is never
//! materialized: in finite dimensions the identity above is exact on all
//! finite-entropy vectors, and the tie at `s = t` is broken toward the
//! upper branch so that `T_f` is constant in `s` on `{s >= t}`.
//!
//! Two backings coexist behind one interface:
//!
//! * matrix-backed: a user closure `t -> generators of L_t` over a fixed
//!   purified space. Decompositions and entropy forms are built on demand
//!   and memoized per `t` (keyed by the exact bit pattern, first insertion
//!   wins, safe under concurrent fills);
//! * model-backed: closed forms of the sample models (spectral oscillator
//!   families, chiral current half-lines at zero and positive temperature,
//!   commutative half-lines), evaluated by quadrature or mode sums.
//!
//! On top of the surface the module offers numerical certificates:
//! orthogonality probes for differential modular position
//! ([`dmp_check`]), finite-difference derivative reports with the
//! upper/lower curvature bounds ([`derivative_report`]), and a
//! monotonicity/supermodularity property suite ([`property_suite`]).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::linalg;
use crate::models::abelian;
use crate::models::oscillator;
use crate::models::probe::SmoothProbe;
use crate::models::quad::QuadratureParams;
use crate::models::u1::{self, U1State};
use crate::modular::{entropy_form, modular_data, EntropyForm, EntropyValue};
use crate::purify::PureSpace;
use crate::subspace::{decompose_base, Decomposition};

/// Generator closure of a matrix-backed family: base-space generators of
/// `L_t` (user coordinates, any count, spans need not be minimal).
pub type GeneratorFn = Box<dyn Fn(f64) -> Vec<DVector<f64>> + Send + Sync>;

/// A probe vector for the surface. Matrix-backed families take coordinate
/// vectors: base-space coordinates (embedded as `f (+) 0`) or doubled
/// coordinates, told apart by length. Continuum models take a test
/// function; the spectral oscillator model takes an interleaved
/// `(Re, Im)` coordinate vector.
#[derive(Debug, Clone)]
pub enum Probe {
    Vector(DVector<f64>),
    Function(SmoothProbe),
}

/// Closed-form model backings.
#[derive(Debug, Clone)]
pub enum ModelFamily {
    /// Chiral current half-lines `(-inf, t)` in the given state; the probe
    /// function excites a coherent state.
    U1 {
        state: U1State,
        quad: QuadratureParams,
    },
    /// Spectral family of a diagonal mode collection: `L_t` spans the
    /// modes with `m_j < t`.
    OscillatorSpectral { m_diag: Vec<f64> },
    /// Commutative half-lines with weight `w`: `S_t = 2 Int^t w (Im f)^2`,
    /// increasing but not `C^1` across the diagonal. The probe function is
    /// the imaginary profile.
    AbelianHalfline {
        weight: SmoothProbe,
        quad: QuadratureParams,
    },
}

/// Construction recipe consumed by [`build_family`].
pub enum FamilySpec {
    Matrix {
        pure: PureSpace,
        generators: GeneratorFn,
        domain: (f64, f64),
        /// Number of sampled inclusion checks; 0 skips attestation.
        attest_samples: usize,
    },
    Model {
        model: ModelFamily,
        domain: (f64, f64),
    },
}

/// Modular data of one family member, memoized per parameter value.
struct Stage {
    dec: Decomposition,
    form: EntropyForm,
}

struct MatrixFamily {
    pure: PureSpace,
    generators: GeneratorFn,
    cache: Mutex<HashMap<u64, Arc<Stage>>>,
}

enum Kind {
    Matrix(MatrixFamily),
    Model(ModelFamily),
}

/// A one-parameter family `t -> L_t` over a closed interval.
pub struct Family {
    kind: Kind,
    domain: (f64, f64),
    monotone_attested: bool,
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let backing = match &self.kind {
            Kind::Matrix(mf) => format!(
                "matrix ({} cached stages)",
                mf.cache.lock().map(|c| c.len()).unwrap_or(0)
            ),
            Kind::Model(model) => format!("{model:?}"),
        };
        f.debug_struct("Family")
            .field("backing", &backing)
            .field("domain", &self.domain)
            .field("monotone_attested", &self.monotone_attested)
            .finish()
    }
}

/// Builds a family from its spec. For matrix backings with
/// `attest_samples > 0` the generator spans are sampled at consecutive
/// grid points and checked for inclusion; a violation aborts construction
/// with [`Error::NotIncreasing`]. Model backings are increasing by
/// construction.
pub fn build_family(spec: FamilySpec) -> Result<Family> {
    match spec {
        FamilySpec::Matrix {
            pure,
            generators,
            domain,
            attest_samples,
        } => {
            check_domain_shape(domain)?;
            if attest_samples > 0 {
                attest_monotone(&pure, &generators, domain, attest_samples)?;
            }
            Ok(Family {
                kind: Kind::Matrix(MatrixFamily {
                    pure,
                    generators,
                    cache: Mutex::new(HashMap::new()),
                }),
                domain,
                monotone_attested: attest_samples > 0,
            })
        }
        FamilySpec::Model { model, domain } => {
            check_domain_shape(domain)?;
            Ok(Family {
                kind: Kind::Model(model),
                domain,
                monotone_attested: true,
            })
        }
    }
}

fn check_domain_shape(domain: (f64, f64)) -> Result<()> {
    if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
        return Err(Error::Unsupported(format!(
            "family domain [{}, {}] is empty or unbounded",
            domain.0, domain.1
        )));
    }
    Ok(())
}

/// Samples consecutive parameter pairs and checks that the earlier span
/// stays inside the later one, up to the purification's rank tolerance.
fn attest_monotone(
    pure: &PureSpace,
    generators: &GeneratorFn,
    domain: (f64, f64),
    samples: usize,
) -> Result<()> {
    let rank_rel = pure.tolerances().rank_rel;
    let tol = rank_rel.max(1e-9);
    let pts: Vec<f64> = (0..=samples)
        .map(|k| domain.0 + (domain.1 - domain.0) * k as f64 / samples as f64)
        .collect();
    for w in pts.windows(2) {
        let (s, t) = (w[0], w[1]);
        let gs = generators(s);
        if gs.is_empty() {
            continue;
        }
        let bs = DMatrix::from_columns(&gs);
        let bs_norm = bs.norm();
        if bs_norm == 0.0 {
            continue;
        }
        let gt = generators(t);
        let residual = if gt.is_empty() {
            1.0
        } else {
            let bt = DMatrix::from_columns(&gt);
            let q = linalg::orthonormal_span(&bt, rank_rel);
            (&bs - &q * (q.transpose() * &bs)).norm() / bs_norm
        };
        if residual > tol {
            return Err(Error::NotIncreasing { s, t, residual });
        }
    }
    Ok(())
}

impl MatrixFamily {
    fn build_stage(&self, t: f64) -> Result<Stage> {
        let gens = (self.generators)(t);
        let dec = decompose_base(&self.pure, &gens)?;
        let md = modular_data(&self.pure, &dec)?;
        let form = entropy_form(&self.pure, &md);
        Ok(Stage { dec, form })
    }

    /// The memoized stage at `t`. Decomposition happens outside the lock;
    /// if two threads race on the same key the first insertion wins and
    /// the loser's work is dropped, so readers never observe a torn entry.
    fn stage(&self, t: f64) -> Result<Arc<Stage>> {
        let key = t.to_bits();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let built = Arc::new(self.build_stage(t)?);
        Ok(self
            .cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(built)
            .clone())
    }

    /// Accepts base coordinates (embedding as `f (+) 0`) or doubled
    /// coordinates as-is.
    fn lift(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() == self.pure.doubled_dim() {
            Ok(v.clone())
        } else {
            self.pure.embed(v)
        }
    }

    fn eval(&self, v: &DVector<f64>, s: f64, t: f64) -> Result<EntropyValue> {
        let at_t = self.stage(t)?;
        if s >= t {
            Ok(at_t.form.entropy(&self.pure, v))
        } else {
            let at_s = self.stage(s)?;
            let cut = at_s.dec.cut(&self.pure, v)?;
            Ok(at_t.form.entropy(&self.pure, &cut))
        }
    }
}

fn eval_model(model: &ModelFamily, f: &Probe, s: f64, t: f64) -> Result<EntropyValue> {
    match (model, f) {
        (ModelFamily::U1 { state, quad }, Probe::Function(g)) => {
            Ok(EntropyValue::Finite(u1::tf(g, s, t, state, *quad)?))
        }
        (ModelFamily::OscillatorSpectral { m_diag }, Probe::Vector(v)) => {
            oscillator::spectral_tf(m_diag, s, t, v)
        }
        (ModelFamily::AbelianHalfline { weight, quad }, Probe::Function(g)) => Ok(
            EntropyValue::Finite(abelian::halfline_tf(weight, g, s, t, *quad)?),
        ),
        (ModelFamily::OscillatorSpectral { .. }, Probe::Function(_)) => Err(Error::Unsupported(
            "the spectral oscillator family takes a coordinate probe, not a test function".into(),
        )),
        (_, Probe::Vector(_)) => Err(Error::Unsupported(
            "continuum model families take a test-function probe, not a coordinate vector".into(),
        )),
    }
}

impl Family {
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Whether increasingness was certified at build time (sampled
    /// inclusions for matrix backings, structural for models).
    pub fn monotone_attested(&self) -> bool {
        self.monotone_attested
    }

    pub fn is_matrix_backed(&self) -> bool {
        matches!(self.kind, Kind::Matrix(_))
    }

    /// The purified ambient space of a matrix-backed family.
    pub fn pure(&self) -> Option<&PureSpace> {
        match &self.kind {
            Kind::Matrix(mf) => Some(&mf.pure),
            Kind::Model(_) => None,
        }
    }

    fn require_in_domain(&self, x: f64) -> Result<()> {
        if x < self.domain.0 || x > self.domain.1 || !x.is_finite() {
            return Err(Error::StencilOutOfDomain {
                lo: x,
                hi: x,
                dom_lo: self.domain.0,
                dom_hi: self.domain.1,
            });
        }
        Ok(())
    }

    fn eval(&self, f: &Probe, s: f64, t: f64) -> Result<EntropyValue> {
        match &self.kind {
            Kind::Matrix(mf) => match f {
                Probe::Vector(v) => mf.eval(&mf.lift(v)?, s, t),
                Probe::Function(_) => Err(Error::Unsupported(
                    "matrix-backed families take a coordinate probe, not a test function".into(),
                )),
            },
            Kind::Model(model) => eval_model(model, f, s, t),
        }
    }
}

/// The surface value `T_f(s, t)`; both arguments must lie in the domain.
pub fn tf(family: &Family, f: &Probe, s: f64, t: f64) -> Result<EntropyValue> {
    family.require_in_domain(s)?;
    family.require_in_domain(t)?;
    family.eval(f, s, t)
}

/// The diagonal `S_t(f) = T_f(t, t)`.
pub fn entropy(family: &Family, f: &Probe, t: f64) -> Result<EntropyValue> {
    tf(family, f, t, t)
}

/// The surface sampled on a grid. Rows follow `s_grid`, columns `t_grid`;
/// infinite cells carry `f64::INFINITY` in `values` and a flag in
/// `infinite` (row-major). The diagonal `S_t(f)` is stored separately and
/// equals the `s >= t` cells by construction.
#[derive(Debug, Clone)]
pub struct TfTable {
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: DMatrix<f64>,
    pub infinite: Vec<bool>,
    pub entropy_diagonal: Vec<f64>,
    pub probe: Probe,
}

impl TfTable {
    pub fn is_infinite(&self, i_s: usize, i_t: usize) -> bool {
        self.infinite[i_s * self.t_grid.len() + i_t]
    }
}

/// Fills the table with the crate's default execution strategy.
pub fn t_table(family: &Family, f: &Probe, s_grid: &[f64], t_grid: &[f64]) -> Result<TfTable> {
    t_table_with_mode(family, f, s_grid, t_grid, ExecMode::auto())
}

/// Fills the table with an explicit strategy. Cells are independent pure
/// computations, so both strategies produce bitwise identical tables.
pub fn t_table_with_mode(
    family: &Family,
    f: &Probe,
    s_grid: &[f64],
    t_grid: &[f64],
    mode: ExecMode,
) -> Result<TfTable> {
    for g in [s_grid, t_grid] {
        if g.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Unsupported(
                "table grids must be sorted in increasing order".into(),
            ));
        }
        for &x in g {
            family.require_in_domain(x)?;
        }
    }

    // For matrix backings, embed once and build every needed stage up
    // front (in parallel) so the cell fill only reads the cache.
    let probe = match (&family.kind, f) {
        (Kind::Matrix(mf), Probe::Vector(v)) => Probe::Vector(mf.lift(v)?),
        _ => f.clone(),
    };
    if let Kind::Matrix(mf) = &family.kind {
        let mut params: Vec<f64> = s_grid.iter().chain(t_grid.iter()).copied().collect();
        params.sort_by(f64::total_cmp);
        params.dedup_by(|a, b| a.to_bits() == b.to_bits());
        {
            let cache = mf.cache.lock().unwrap();
            params.retain(|p| !cache.contains_key(&p.to_bits()));
        }
        let built = exec::map_indexed(mode, params.len(), |k| {
            mf.build_stage(params[k])
                .map(|stage| (params[k].to_bits(), Arc::new(stage)))
        });
        let mut cache = mf.cache.lock().unwrap();
        for item in built {
            let (key, stage) = item?;
            cache.entry(key).or_insert(stage);
        }
    }

    let ns = s_grid.len();
    let nt = t_grid.len();
    let cells = exec::map_indexed(mode, ns * nt, |idx| {
        family.eval(&probe, s_grid[idx / nt], t_grid[idx % nt])
    });
    let mut values = DMatrix::zeros(ns, nt);
    let mut infinite = vec![false; ns * nt];
    for (idx, cell) in cells.into_iter().enumerate() {
        match cell? {
            EntropyValue::Finite(v) => values[(idx / nt, idx % nt)] = v,
            EntropyValue::Infinite => {
                values[(idx / nt, idx % nt)] = f64::INFINITY;
                infinite[idx] = true;
            }
        }
    }
    let diagonal = exec::map_indexed(mode, nt, |j| family.eval(&probe, t_grid[j], t_grid[j]));
    let mut entropy_diagonal = Vec::with_capacity(nt);
    for d in diagonal {
        entropy_diagonal.push(d?.finite().unwrap_or(f64::INFINITY));
    }
    Ok(TfTable {
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
        infinite,
        entropy_diagonal,
        probe,
    })
}

/// Outcome of the orthogonality probe for differential modular position at
/// a parameter pair `(s, t)`: the worst normalized pairing
/// `|S_t(u, v)| / sqrt(S_t(u) S_t(v) + 1)` over basis vectors `u` of
/// `img Q_s` and `v` of `ker Q_s`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DmpReport {
    pub s: f64,
    pub t: f64,
    pub tol: f64,
    pub residual: f64,
    pub holds: bool,
    pub samples_checked: usize,
    /// Basis vectors dropped because they touch the purely infinite part
    /// at `t`, where the pairing is undefined.
    pub skipped_infinite: usize,
}

/// Checks the orthogonality half of differential modular position on a
/// matrix-backed family: every vector of `img Q_s` must be `S_t`-orthogonal
/// to every vector of `ker Q_s`. By bilinearity a full basis-pair sweep is
/// exhaustive in finite dimensions; `max_pairs` caps the sweep (0 means
/// all pairs). For `s >= t` the projector is the identity on the relevant
/// part and the condition holds trivially.
pub fn dmp_check(
    family: &Family,
    s: f64,
    t: f64,
    max_pairs: usize,
    tol: f64,
) -> Result<DmpReport> {
    family.require_in_domain(s)?;
    family.require_in_domain(t)?;
    let mf = match &family.kind {
        Kind::Matrix(mf) => mf,
        Kind::Model(_) => {
            return Err(Error::Unsupported(
                "the duality check needs a matrix-backed family".into(),
            ))
        }
    };
    if s >= t {
        return Ok(DmpReport {
            s,
            t,
            tol,
            residual: 0.0,
            holds: true,
            samples_checked: 0,
            skipped_infinite: 0,
        });
    }
    let at_s = mf.stage(s)?;
    let at_t = mf.stage(t)?;
    let rank_rel = mf.pure.tolerances().rank_rel;
    let q = at_s.dec.cut_projector(&mf.pure);
    let img = linalg::orthonormal_span(&q, rank_rel);
    let ker = linalg::orthonormal_kernel(&q, rank_rel);

    let mut skipped = 0usize;
    let keep = |basis: &DMatrix<f64>, skipped: &mut usize| -> Vec<DVector<f64>> {
        (0..basis.ncols())
            .map(|j| basis.column(j).into_owned())
            .filter(|v| {
                let inf = at_t.form.is_infinite(&mf.pure, v);
                if inf {
                    *skipped += 1;
                }
                !inf
            })
            .collect()
    };
    let plus = keep(&img, &mut skipped);
    let minus = keep(&ker, &mut skipped);

    let mut worst = 0.0f64;
    let mut checked = 0usize;
    'outer: for u in &plus {
        for v in &minus {
            if max_pairs > 0 && checked >= max_pairs {
                break 'outer;
            }
            let su = at_t.form.entropy(&mf.pure, u).finite().unwrap_or(0.0);
            let sv = at_t.form.entropy(&mf.pure, v).finite().unwrap_or(0.0);
            let pair = at_t.form.pairing(&mf.pure, u, v)?;
            worst = worst.max(pair.abs() / (su * sv + 1.0).sqrt());
            checked += 1;
        }
    }
    Ok(DmpReport {
        s,
        t,
        tol,
        residual: worst,
        holds: worst <= tol,
        samples_checked: checked,
        skipped_infinite: skipped,
    })
}

/// Finite-difference derivatives of the diagonal entropy and of the
/// surface near the diagonal, step `h`, diagonal offset `epsilon = 2 h`.
///
/// The two residuals package the curvature bounds: the upper one compares
/// the diagonal's second derivative with the pure `t`-curvature just above
/// the diagonal (nonnegative deficit expected), the lower one with the sum
/// of the pure `t`- and `s`-curvatures just below it (nonnegative slack
/// expected, zero when the lower estimate saturates).
#[derive(Debug, Clone, serde::Serialize)]
pub struct DerivativeReport {
    pub t: f64,
    pub h: f64,
    pub epsilon: f64,
    pub ds_dt: f64,
    pub d2s_dt2: f64,
    pub d2t_dt2_minus: f64,
    pub d2t_dsdt_minus: f64,
    pub d2t_ds2_minus: f64,
    pub d2t_dt2_plus: f64,
    pub bound_residual_upper: f64,
    pub bound_residual_lower: f64,
}

/// Central-difference report at `t`. The step defaults to `1e-3` times the
/// domain length; the stencil `[t - 3h, t + 3h]` must fit in the domain
/// and carry finite entropies. A jump detector samples the diagonal on
/// `t + k h`, `k = -16..16`, and refuses stencils whose window intersects
/// an increment larger than `1e3` times the median increment: across a
/// step of the family only distributional (rectangle) statements survive,
/// and [`property_suite`] covers those.
pub fn derivative_report(
    family: &Family,
    f: &Probe,
    t: f64,
    h: Option<f64>,
) -> Result<DerivativeReport> {
    let (lo, hi) = family.domain;
    let h = match h {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(_) => {
            return Err(Error::Unsupported(
                "finite-difference step must be positive and finite".into(),
            ))
        }
        None => 1e-3 * (hi - lo),
    };
    let eps = 2.0 * h;
    if t - 3.0 * h < lo || t + 3.0 * h > hi {
        return Err(Error::StencilOutOfDomain {
            lo: t - 3.0 * h,
            hi: t + 3.0 * h,
            dom_lo: lo,
            dom_hi: hi,
        });
    }

    let diag = |x: f64| -> Result<f64> {
        match family.eval(f, x, x)? {
            EntropyValue::Finite(v) => Ok(v),
            EntropyValue::Infinite => Err(Error::InfiniteOnStencil { t: x }),
        }
    };
    let surf = |s: f64, x: f64| -> Result<f64> {
        match family.eval(f, s, x)? {
            EntropyValue::Finite(v) => Ok(v),
            EntropyValue::Infinite => Err(Error::InfiniteOnStencil { t: x }),
        }
    };

    // Jump detector on the diagonal.
    let mut xs = Vec::new();
    for k in -16i32..=16 {
        let x = t + k as f64 * h;
        if x >= lo && x <= hi {
            xs.push(x);
        }
    }
    let samples: Vec<f64> = xs.iter().map(|&x| diag(x)).collect::<Result<_>>()?;
    let scale = 1.0 + samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut increments: Vec<f64> = samples.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut sorted = increments.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = (1e3 * median).max(1e-9 * scale);
    for (k, inc) in increments.drain(..).enumerate() {
        let (a, b) = (xs[k], xs[k + 1]);
        if inc > threshold && b >= t - 3.0 * h && a <= t + 3.0 * h {
            return Err(Error::StencilStraddlesJump {
                t,
                increment: inc,
                threshold,
            });
        }
    }

    let s_m = diag(t - h)?;
    let s_0 = diag(t)?;
    let s_p = diag(t + h)?;
    let ds_dt = (s_p - s_m) / (2.0 * h);
    let d2s_dt2 = (s_p - 2.0 * s_0 + s_m) / (h * h);

    let s_lo = t - eps;
    let d2t_dt2_minus =
        (surf(s_lo, t + h)? - 2.0 * surf(s_lo, t)? + surf(s_lo, t - h)?) / (h * h);
    let d2t_ds2_minus =
        (surf(s_lo + h, t)? - 2.0 * surf(s_lo, t)? + surf(s_lo - h, t)?) / (h * h);
    let d2t_dsdt_minus = (surf(s_lo + h, t + h)? - surf(s_lo + h, t - h)?
        - surf(s_lo - h, t + h)?
        + surf(s_lo - h, t - h)?)
        / (4.0 * h * h);
    let s_hi = t + eps;
    let d2t_dt2_plus =
        (surf(s_hi, t + h)? - 2.0 * surf(s_hi, t)? + surf(s_hi, t - h)?) / (h * h);

    Ok(DerivativeReport {
        t,
        h,
        epsilon: eps,
        ds_dt,
        d2s_dt2,
        d2t_dt2_minus,
        d2t_dsdt_minus,
        d2t_ds2_minus,
        d2t_dt2_plus,
        bound_residual_upper: d2t_dt2_plus - d2s_dt2,
        bound_residual_lower: d2s_dt2 - (d2t_dt2_minus + d2t_ds2_minus),
    })
}

/// The property a table cell pair failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PropertyKind {
    IncreasingInT,
    IncreasingInS,
    ConstantOnCPlus,
    DiagonalIncreasing,
    Rectangle,
}

/// A single violated comparison; `slack` is the signed margin that should
/// have been nonnegative (or the absolute deviation for the constancy
/// check).
#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyFailure {
    pub kind: PropertyKind,
    pub s: f64,
    pub t: f64,
    pub s_hat: Option<f64>,
    pub t_hat: Option<f64>,
    pub slack: f64,
}

/// Aggregate outcome of the monotonicity and supermodularity checks.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyReport {
    pub tol: f64,
    pub max_finite_abs: f64,
    pub checks_run: usize,
    pub skipped_infinite: usize,
    pub failures: Vec<PropertyFailure>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Builds the square table on `grid` and runs [`check_table`] with
/// `tol = tol_rel * (1 + max finite |T|)`.
pub fn property_suite(
    family: &Family,
    f: &Probe,
    grid: &[f64],
    tol_rel: f64,
) -> Result<PropertyReport> {
    let table = t_table(family, f, grid, grid)?;
    Ok(check_table(&table, tol_rel))
}

/// Checks a filled table for the structural properties of the surface:
/// increasing in `t` and in `s` (all ordered pairs), constant in `s` on
/// `{s >= t}` against the stored diagonal, increasing diagonal, and the
/// rectangle inequality
/// `T(s_hat, t_hat) - T(s_hat, t) - T(s, t_hat) + T(s, t) >= -tol` on all
/// grid rectangles. Comparisons touching infinite cells are skipped and
/// counted, except that a finite/infinite mismatch on `{s >= t}` against
/// the diagonal is reported as a constancy failure.
pub fn check_table(table: &TfTable, tol_rel: f64) -> PropertyReport {
    let ns = table.s_grid.len();
    let nt = table.t_grid.len();
    let mut max_abs = 0.0f64;
    for i in 0..ns {
        for j in 0..nt {
            if !table.is_infinite(i, j) {
                max_abs = max_abs.max(table.values[(i, j)].abs());
            }
        }
    }
    let tol = tol_rel * (1.0 + max_abs);
    let mut failures = Vec::new();
    let mut checks = 0usize;
    let mut skipped = 0usize;

    let fin = |i: usize, j: usize| !table.is_infinite(i, j);
    let val = |i: usize, j: usize| table.values[(i, j)];

    // Increasing in t along every row.
    for i in 0..ns {
        for j in 0..nt {
            for j2 in (j + 1)..nt {
                if !(fin(i, j) && fin(i, j2)) {
                    skipped += 1;
                    continue;
                }
                checks += 1;
                let slack = val(i, j2) - val(i, j);
                if slack < -tol {
                    failures.push(PropertyFailure {
                        kind: PropertyKind::IncreasingInT,
                        s: table.s_grid[i],
                        t: table.t_grid[j],
                        s_hat: None,
                        t_hat: Some(table.t_grid[j2]),
                        slack,
                    });
                }
            }
        }
    }
    // Increasing in s along every column.
    for j in 0..nt {
        for i in 0..ns {
            for i2 in (i + 1)..ns {
                if !(fin(i, j) && fin(i2, j)) {
                    skipped += 1;
                    continue;
                }
                checks += 1;
                let slack = val(i2, j) - val(i, j);
                if slack < -tol {
                    failures.push(PropertyFailure {
                        kind: PropertyKind::IncreasingInS,
                        s: table.s_grid[i],
                        t: table.t_grid[j],
                        s_hat: Some(table.s_grid[i2]),
                        t_hat: None,
                        slack,
                    });
                }
            }
        }
    }
    // Constant in s once s >= t, pinned to the diagonal entropy.
    for i in 0..ns {
        for j in 0..nt {
            if table.s_grid[i] < table.t_grid[j] {
                continue;
            }
            let diag = table.entropy_diagonal[j];
            let cell_inf = !fin(i, j);
            if cell_inf != diag.is_infinite() {
                failures.push(PropertyFailure {
                    kind: PropertyKind::ConstantOnCPlus,
                    s: table.s_grid[i],
                    t: table.t_grid[j],
                    s_hat: None,
                    t_hat: None,
                    slack: f64::INFINITY,
                });
                continue;
            }
            if cell_inf {
                skipped += 1;
                continue;
            }
            checks += 1;
            let dev = (val(i, j) - diag).abs();
            if dev > tol {
                failures.push(PropertyFailure {
                    kind: PropertyKind::ConstantOnCPlus,
                    s: table.s_grid[i],
                    t: table.t_grid[j],
                    s_hat: None,
                    t_hat: None,
                    slack: dev,
                });
            }
        }
    }
    // Increasing diagonal.
    for j in 0..nt {
        for j2 in (j + 1)..nt {
            let (a, b) = (table.entropy_diagonal[j], table.entropy_diagonal[j2]);
            if a.is_infinite() || b.is_infinite() {
                skipped += 1;
                continue;
            }
            checks += 1;
            let slack = b - a;
            if slack < -tol {
                failures.push(PropertyFailure {
                    kind: PropertyKind::DiagonalIncreasing,
                    s: table.t_grid[j],
                    t: table.t_grid[j],
                    s_hat: None,
                    t_hat: Some(table.t_grid[j2]),
                    slack,
                });
            }
        }
    }
    // Rectangle inequality on all grid rectangles.
    for i in 0..ns {
        for i2 in (i + 1)..ns {
            for j in 0..nt {
                for j2 in (j + 1)..nt {
                    if !(fin(i, j) && fin(i, j2) && fin(i2, j) && fin(i2, j2)) {
                        skipped += 1;
                        continue;
                    }
                    checks += 1;
                    let slack = val(i2, j2) - val(i2, j) - val(i, j2) + val(i, j);
                    if slack < -tol {
                        failures.push(PropertyFailure {
                            kind: PropertyKind::Rectangle,
                            s: table.s_grid[i],
                            t: table.t_grid[j],
                            s_hat: Some(table.s_grid[i2]),
                            t_hat: Some(table.t_grid[j2]),
                            slack,
                        });
                    }
                }
            }
        }
    }

    PropertyReport {
        tol,
        max_finite_abs: max_abs,
        checks_run: checks,
        skipped_infinite: skipped,
        failures,
    }
}
