//! Turns configuration specs into engine objects.

use nalgebra::{DMatrix, DVector};

use modent_core::models::abelian::{abelian_space, embed_complex_probe};
use modent_core::models::discretize::discretize_u1;
use modent_core::models::oscillator::{oscillator_space, spectral_generators};
use modent_core::models::probe::SmoothProbe;
use modent_core::models::quad::QuadratureParams;
use modent_core::models::u1::U1State;
use modent_core::{
    build_family, Family, FamilySpec, ModelFamily, Probe, PureSpace, PurifyOptions,
    SymplecticHilbertSpace, Tolerances,
};

use crate::config::{ExperimentConfig, FamilyConfig, ModelSpec, ProbeSpec, SubspaceSpec};
use crate::error::CliError;

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::Config(format!("{what}: empty matrix")));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Config(format!("{what}: ragged rows")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// The space the engine commands operate on: explicit Gram pair, or a
/// finite named model. The continuum current models have no finite Gram
/// matrix and are rejected here; they live behind the `family` section.
pub fn space_from(config: &ExperimentConfig, tol: Tolerances) -> Result<SymplecticHilbertSpace, CliError> {
    let mut space = match (&config.space, &config.model) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either `space` or `model`, not both".into(),
            ))
        }
        (Some(spec), None) => {
            let tau = matrix_from_rows(&spec.tau, "space.tau")?;
            let sigma = matrix_from_rows(&spec.sigma, "space.sigma")?;
            SymplecticHilbertSpace::with_tolerances(tau, sigma, tol)?
        }
        (None, Some(model)) => match model {
            ModelSpec::Oscillator { m_diag } => oscillator_space(m_diag)?,
            ModelSpec::Abelian { weights } => abelian_space(weights)?,
            ModelSpec::U1Discretized { n, window, beta } => {
                let state = match beta {
                    Some(beta) => U1State::Kms { beta: *beta },
                    None => U1State::Vacuum,
                };
                discretize_u1(*n, *window, &state, QuadratureParams::default(), tol)?
                    .space()
                    .clone()
            }
            ModelSpec::U1Vacuum | ModelSpec::U1Kms { .. } => {
                return Err(CliError::Config(
                    "the continuum current has no finite Gram pair; use the `family` \
                     section with `family-scan` or `property-suite`"
                        .into(),
                ))
            }
        },
        (None, None) => {
            return Err(CliError::Config(
                "this command needs a `space` or `model` section".into(),
            ))
        }
    };
    space.set_tolerances(tol);
    Ok(space)
}

/// Base-coordinate generators from a subspace spec, dimension-checked.
pub fn generators(spec: &SubspaceSpec, dim: usize) -> Result<Vec<DVector<f64>>, CliError> {
    if spec.generators.is_empty() {
        return Err(CliError::Config("subspace: no generators".into()));
    }
    spec.generators
        .iter()
        .map(|row| {
            if row.len() != dim {
                return Err(CliError::Config(format!(
                    "subspace generator has length {}, space has dimension {dim}",
                    row.len()
                )));
            }
            Ok(DVector::from_row_slice(row))
        })
        .collect()
}

/// Function probes for the continuum models.
pub fn smooth_probe(spec: &ProbeSpec) -> Result<SmoothProbe, CliError> {
    match spec {
        ProbeSpec::Bump {
            center,
            halfwidth,
            amplitude,
        } => Ok(SmoothProbe::Bump {
            center: *center,
            halfwidth: *halfwidth,
            amplitude: *amplitude,
        }),
        ProbeSpec::Ramp { a, b, slope } => Ok(SmoothProbe::Ramp {
            a: *a,
            b: *b,
            slope: *slope,
        }),
        ProbeSpec::UserSampled { xs, values } => Ok(SmoothProbe::UserSampled {
            xs: xs.clone(),
            values: values.clone(),
        }),
        ProbeSpec::Vector { .. } => Err(CliError::Config(
            "expected a function probe (bump, ramp, user_sampled)".into(),
        )),
    }
}

/// Probe for the family commands: vectors feed matrix-backed families,
/// functions feed the continuum models. Complex vector probes (with an
/// `imaginary` part) only make sense against a concrete purification and
/// are handled by the `entropy` command instead.
pub fn family_probe(spec: &ProbeSpec) -> Result<Probe, CliError> {
    match spec {
        ProbeSpec::Vector {
            values,
            imaginary: None,
        } => Ok(Probe::Vector(DVector::from_row_slice(values))),
        ProbeSpec::Vector {
            imaginary: Some(_), ..
        } => Err(CliError::Config(
            "complex vector probes are for the `entropy` command".into(),
        )),
        _ => Ok(Probe::Function(smooth_probe(spec)?)),
    }
}

/// Doubled-space probe for the `entropy` command: base vectors embed as
/// `f (+) 0`, doubled vectors pass through, and an imaginary part builds
/// the complex probe `u + i v`.
pub fn doubled_probe(pure: &PureSpace, spec: &ProbeSpec) -> Result<DVector<f64>, CliError> {
    match spec {
        ProbeSpec::Vector { values, imaginary } => {
            let u = DVector::from_row_slice(values);
            if let Some(im) = imaginary {
                let v = DVector::from_row_slice(im);
                return Ok(embed_complex_probe(pure, &u, &v)?);
            }
            if u.len() == pure.doubled_dim() {
                Ok(u)
            } else {
                Ok(pure.embed(&u)?)
            }
        }
        _ => Err(CliError::Config(
            "the `entropy` command needs a vector probe".into(),
        )),
    }
}

/// Builds the configured one-parameter family.
pub fn family_from(config: &ExperimentConfig, tol: Tolerances) -> Result<Family, CliError> {
    let spec = config
        .family
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs a `family` section".into()))?;
    let quad = QuadratureParams::default();
    let family_spec = match spec {
        FamilyConfig::U1Vacuum { domain } => FamilySpec::Model {
            model: ModelFamily::U1 {
                state: U1State::Vacuum,
                quad,
            },
            domain: *domain,
        },
        FamilyConfig::U1Kms { beta, domain } => FamilySpec::Model {
            model: ModelFamily::U1 {
                state: U1State::Kms { beta: *beta },
                quad,
            },
            domain: *domain,
        },
        FamilyConfig::U1ReparamVacuum { reparam, domain } => FamilySpec::Model {
            model: ModelFamily::U1 {
                state: U1State::ReparamVacuum {
                    reparam: reparam.clone(),
                },
                quad,
            },
            domain: *domain,
        },
        FamilyConfig::SpectralOscillator { m_diag, domain } => {
            let mut space = oscillator_space(m_diag)?;
            space.set_tolerances(tol);
            let pure = modent_core::purify(&space, PurifyOptions::default())?;
            let m_diag = m_diag.clone();
            FamilySpec::Matrix {
                pure,
                generators: Box::new(move |t| spectral_generators(&m_diag, t)),
                domain: *domain,
                attest_samples: 0,
            }
        }
        FamilyConfig::AbelianHalfline { weight, domain } => FamilySpec::Model {
            model: ModelFamily::AbelianHalfline {
                weight: weight.clone(),
                quad,
            },
            domain: *domain,
        },
    };
    Ok(build_family(family_spec)?)
}

/// Ascending-grid check shared by the scan commands; grid order is a
/// configuration invariant, not a numerical finding.
pub fn require_sorted(grid: &[f64], what: &str) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Config(format!("{what}: empty grid")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config(format!(
            "{what}: grid must be strictly ascending"
        )));
    }
    Ok(())
}
