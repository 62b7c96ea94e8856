//! The JSON experiment configuration.
//!
//! One schema serves every subcommand: each command reads the sections it
//! needs and refuses with a configuration error (exit 2) when a required
//! one is missing. Unknown keys are rejected, so a typo cannot silently
//! fall back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use modent_core::models::probe::SmoothProbe;
use modent_core::models::u1::Reparam;
use modent_core::Tolerances;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Explicit Gram pair; mutually exclusive with `model`.
    pub space: Option<SpaceSpec>,
    /// Named model standing in for an explicit space.
    pub model: Option<ModelSpec>,
    /// Base-coordinate generators of the subspace under study.
    pub subspace: Option<SubspaceSpec>,
    /// Second subspace whose cut projector is applied to the probe before
    /// the entropy is evaluated a second time.
    pub cut: Option<SubspaceSpec>,
    /// One-parameter family for the scan commands.
    pub family: Option<FamilyConfig>,
    pub probe: Option<ProbeSpec>,
    /// Boundary-variable grid for `family-scan`; must be ascending.
    pub s_grid: Option<Vec<f64>>,
    /// Bulk-variable grid for `family-scan`; must be ascending.
    pub t_grid: Option<Vec<f64>>,
    /// Square grid shared by both axes (`property-suite`).
    pub grid: Option<Vec<f64>>,
    /// Points at which `family-scan` adds derivative reports.
    pub derivative_at: Vec<f64>,
    /// Finite-difference step for the derivative reports (default: a
    /// thousandth of the domain length).
    pub step: Option<f64>,
    /// Boundary parameter for `dmp-check`.
    pub s: Option<f64>,
    /// Bulk parameter for `dmp-check`; cut time for `convergence`.
    pub t: Option<f64>,
    /// Basis-pair budget for `dmp-check` (0 or absent: every pair).
    pub max_pairs: Option<usize>,
    /// Residual tolerance for `dmp-check`.
    pub check_tol: Option<f64>,
    /// Relative slack for the property suite.
    pub tol_rel: Option<f64>,
    /// Instances per section for `oracle-compare`.
    pub instances: Option<usize>,
    /// Discretization window for `convergence`.
    pub window: Option<(f64, f64)>,
    /// Mesh resolutions for `convergence`; must be ascending.
    pub resolutions: Option<Vec<usize>>,
    /// Inverse temperature for `convergence` (vacuum when absent).
    pub beta: Option<f64>,
    /// Seed for randomized sweeps; the `--seed` flag wins over this.
    pub seed: Option<u64>,
    /// Named tolerance overrides, applied before the command-line ones.
    pub tolerances: Option<BTreeMap<String, f64>>,
    /// Output directory; the `--out` flag wins over this.
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    /// Effective tolerances: defaults, then the config map, then the
    /// command-line `KEY=VALUE` overrides.
    pub fn effective_tolerances(&self, overrides: &[String]) -> Result<Tolerances, CliError> {
        let mut tol = Tolerances::default();
        if let Some(map) = &self.tolerances {
            for (key, value) in map {
                tol.set(key, *value).map_err(CliError::Config)?;
            }
        }
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE, got `{entry}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|e| CliError::Config(format!("tolerance `{key}`: {e}")))?;
            tol.set(key.trim(), value).map_err(CliError::Config)?;
        }
        Ok(tol)
    }
}

/// Explicit Gram matrices, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub tau: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

/// Base-coordinate generators, one vector per row.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    pub generators: Vec<Vec<f64>>,
}

/// Named models accepted wherever a space is: finite ones carry their Gram
/// pair, the continuum current models only support the family commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    U1Vacuum,
    U1Kms {
        beta: f64,
    },
    Oscillator {
        m_diag: Vec<f64>,
    },
    Abelian {
        weights: Vec<f64>,
    },
    U1Discretized {
        n: usize,
        window: (f64, f64),
        #[serde(default)]
        beta: Option<f64>,
    },
}

/// One-parameter families for the scan commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// Half-lines `(-inf, t)` of the current in the vacuum state.
    U1Vacuum { domain: (f64, f64) },
    /// Half-lines of the current at inverse temperature `beta`.
    U1Kms { beta: f64, domain: (f64, f64) },
    /// Half-lines of the vacuum current under a time reparametrization.
    U1ReparamVacuum { reparam: Reparam, domain: (f64, f64) },
    /// Oscillator spectral family: the mode `j` joins the subspace once
    /// the parameter passes its covariance eigenvalue `m_j`. The only
    /// matrix-backed family expressible in JSON, hence the only one
    /// `dmp-check` accepts.
    SpectralOscillator { m_diag: Vec<f64>, domain: (f64, f64) },
    /// Half-line family over a commutative continuum with weight profile
    /// `weight`.
    AbelianHalfline { weight: SmoothProbe, domain: (f64, f64) },
}

/// Probe specifications: a coordinate vector for matrix-backed targets, a
/// smooth function for the continuum models.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Coordinate vector. Base-space length embeds as `f (+) 0`, doubled
    /// length is used as-is; an `imaginary` part of base length turns it
    /// into the complex probe `values + i imaginary`.
    Vector {
        values: Vec<f64>,
        #[serde(default)]
        imaginary: Option<Vec<f64>>,
    },
    /// `amplitude * exp(-1/(1-u^2))` with `u = (x-center)/halfwidth`.
    Bump {
        center: f64,
        halfwidth: f64,
        amplitude: f64,
    },
    /// Flat left of `a`, slope `slope` on `(a, b)`, flat right of `b`.
    Ramp { a: f64, b: f64, slope: f64 },
    /// Linear interpolation of samples.
    UserSampled { xs: Vec<f64>, values: Vec<f64> },
}
