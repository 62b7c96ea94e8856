//! Subcommand implementations.
//!
//! Every command writes its artifacts through an [`OutputBundle`] and
//! returns an [`Outcome`]: `Clean` for a successful run, `CheckFailed`
//! when the computation finished but the thing being checked does not
//! hold (exit code 1, with all reports written).

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modent_core::linalg::op_norm;
use modent_core::models::abelian::{
    abelian_entropy, abelian_space, embed_complex_probe, y_subspace_generators,
};
use modent_core::models::discretize::discretize_u1;
use modent_core::models::oscillator::{oscillator_entropy, oscillator_space};
use modent_core::models::probe::SmoothProbe;
use modent_core::models::quad::QuadratureParams;
use modent_core::models::u1::{self, U1State};
use modent_core::{
    decompose_base, derivative_report, dmp_check, entropy_form, invariant_report, modular_data,
    pf_via_modular, property_suite, purify, t_table, EntropyValue, PurifyOptions,
    SymplecticHilbertSpace, Tolerances,
};

use crate::assemble;
use crate::bundle::{fmt_float, OutputBundle};
use crate::config::ExperimentConfig;
use crate::error::CliError;

/// How a completed run ends: clean, or with the checked property failing.
pub enum Outcome {
    Clean,
    CheckFailed(String),
}

pub fn validate(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let space = assemble::space_from(config, tol)?;
    let report = space.validate();
    bundle.write_json("validation.json", &report)?;
    if report.is_valid {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "space invalid: |D| = {:.6e}, norm bound ok = {}",
            report.operator_norm_d, report.norm_bound_ok
        )))
    }
}

pub fn decompose(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let space = assemble::space_from(config, tol)?;
    let spec = config
        .subspace
        .as_ref()
        .ok_or_else(|| CliError::Config("decompose needs a `subspace` section".into()))?;
    let gens = assemble::generators(spec, space.dim())?;
    let pure = purify(&space, PurifyOptions::default())?;
    let dec = decompose_base(&pure, &gens)?;
    let md = modular_data(&pure, &dec)?;
    bundle.timing("compute", started);

    let logs = md.log_delta_eigenvalues();
    let report = serde_json::json!({
        "dims": {
            "space": space.dim(),
            "doubled": pure.doubled_dim(),
            "subspace": dec.l.dim(),
            "nonseparating": dec.nonseparating.dim(),
            "abelian": dec.abelian.dim(),
            "factorial": dec.factorial.dim(),
            "infinite": dec.infinite.dim(),
            "standard_plus": md.standard_plus_dim(),
        },
        "condition": md.condition(),
        "log_delta_range": [logs.first(), logs.last()],
    });
    bundle.write_json("decomposition.json", &report)?;
    Ok(Outcome::Clean)
}

pub fn entropy(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let space = assemble::space_from(config, tol)?;
    let spec = config
        .subspace
        .as_ref()
        .ok_or_else(|| CliError::Config("entropy needs a `subspace` section".into()))?;
    let probe_spec = config
        .probe
        .as_ref()
        .ok_or_else(|| CliError::Config("entropy needs a `probe` section".into()))?;

    let pure = purify(&space, PurifyOptions::default())?;
    let gens = assemble::generators(spec, space.dim())?;
    let dec = decompose_base(&pure, &gens)?;
    let md = modular_data(&pure, &dec)?;
    let form = entropy_form(&pure, &md);
    let h = assemble::doubled_probe(&pure, probe_spec)?;
    let value = form.entropy(&pure, &h);

    let mut report = serde_json::json!({
        "entropy": value,
        "infinite_dim": dec.infinite.dim(),
    });
    if let Some(cut_spec) = &config.cut {
        let cut_gens = assemble::generators(cut_spec, space.dim())?;
        let dec_cut = decompose_base(&pure, &cut_gens)?;
        let qh = dec_cut.cut(&pure, &h)?;
        let cut_value = form.entropy(&pure, &qh);
        let delta = match (value, cut_value) {
            (EntropyValue::Finite(a), EntropyValue::Finite(b)) => serde_json::json!(a - b),
            _ => serde_json::json!("inf"),
        };
        report["cut_entropy"] = serde_json::json!(cut_value);
        report["delta"] = delta;
    }
    bundle.timing("compute", started);
    bundle.write_json("entropy.json", &report)?;
    Ok(Outcome::Clean)
}

pub fn family_scan(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let family = assemble::family_from(config, tol)?;
    let probe_spec = config
        .probe
        .as_ref()
        .ok_or_else(|| CliError::Config("family-scan needs a `probe` section".into()))?;
    let probe = assemble::family_probe(probe_spec)?;
    let s_grid = config
        .s_grid
        .as_ref()
        .or(config.grid.as_ref())
        .ok_or_else(|| CliError::Config("family-scan needs `s_grid` (or `grid`)".into()))?;
    let t_grid = config
        .t_grid
        .as_ref()
        .or(config.grid.as_ref())
        .ok_or_else(|| CliError::Config("family-scan needs `t_grid` (or `grid`)".into()))?;
    assemble::require_sorted(s_grid, "s_grid")?;
    assemble::require_sorted(t_grid, "t_grid")?;

    let table = t_table(&family, &probe, s_grid, t_grid)?;
    bundle.timing("table", started);

    let mut csv = String::from("s,t,value\n");
    for (i, &s) in table.s_grid.iter().enumerate() {
        for (j, &t) in table.t_grid.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_float(s),
                fmt_float(t),
                fmt_float(table.values[(i, j)])
            ));
        }
    }
    bundle.write_text("table.csv", &csv)?;

    let mut diag = String::from("t,entropy\n");
    for (j, &t) in table.t_grid.iter().enumerate() {
        diag.push_str(&format!(
            "{},{}\n",
            fmt_float(t),
            fmt_float(table.entropy_diagonal[j])
        ));
    }
    bundle.write_text("entropy.csv", &diag)?;

    if !config.derivative_at.is_empty() {
        let reports = config
            .derivative_at
            .iter()
            .map(|&t| derivative_report(&family, &probe, t, config.step))
            .collect::<Result<Vec<_>, _>>()?;
        bundle.write_json("derivatives.json", &reports)?;
    }
    Ok(Outcome::Clean)
}

pub fn dmp_check_cmd(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let family = assemble::family_from(config, tol)?;
    let s = config
        .s
        .ok_or_else(|| CliError::Config("dmp-check needs `s`".into()))?;
    let t = config
        .t
        .ok_or_else(|| CliError::Config("dmp-check needs `t`".into()))?;
    let max_pairs = config.max_pairs.unwrap_or(0);
    let check_tol = config.check_tol.unwrap_or(1e-8);
    let report = dmp_check(&family, s, t, max_pairs, check_tol)?;
    bundle.write_json("dmp.json", &report)?;
    if report.holds {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "cut at {s} is not orthogonal to the entropy form at {t} (residual {:.3e})",
            report.residual
        )))
    }
}

pub fn property_suite_cmd(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let family = assemble::family_from(config, tol)?;
    let probe_spec = config
        .probe
        .as_ref()
        .ok_or_else(|| CliError::Config("property-suite needs a `probe` section".into()))?;
    let probe = assemble::family_probe(probe_spec)?;
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("property-suite needs a `grid`".into()))?;
    assemble::require_sorted(grid, "grid")?;
    let tol_rel = config.tol_rel.unwrap_or(1e-8);
    let report = property_suite(&family, &probe, grid, tol_rel)?;
    bundle.timing("suite", started);
    bundle.write_json("properties.json", &report)?;
    if report.passed() {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "{} of {} comparisons violated",
            report.failures.len(),
            report.checks_run
        )))
    }
}

/// One section of the randomized oracle sweep.
#[derive(serde::Serialize)]
struct SweepSection {
    /// Which independent reference the engine is compared against.
    oracle: &'static str,
    /// Pass threshold for the per-instance residual.
    tolerance: f64,
    instances: usize,
    worst_residual: f64,
    passed: bool,
}

/// Random valid Gram pair away from the purity boundary, so modular data
/// stays uniformly well conditioned across the sweep.
fn random_space(rng: &mut ChaCha8Rng, n: usize) -> SymplecticHilbertSpace {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let tau = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let anti = (&raw - raw.transpose()) * 0.5;
    let space = SymplecticHilbertSpace::new(tau.clone(), anti.clone()).unwrap();
    let norm_d = space.validate().operator_norm_d;
    if norm_d > 1e-3 {
        SymplecticHilbertSpace::new(tau, anti * (0.75 / norm_d)).unwrap()
    } else {
        space
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn oracle_compare(
    config: &ExperimentConfig,
    _tol: Tolerances,
    seed: u64,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let instances = config.instances.unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("section,instance,residual\n");
    let mut sections: Vec<SweepSection> = Vec::new();

    // Engine vs the oscillator mode-sum closed form.
    {
        let tolerance = 1e-8;
        let mut worst: f64 = 0.0;
        for i in 0..instances {
            let n = rng.random_range(1..=8);
            let m_diag: Vec<f64> = (0..n).map(|_| rng.random_range(1.01..10.0)).collect();
            let mut e_set: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if e_set.is_empty() {
                e_set.push(rng.random_range(0..n));
            }
            let space = oscillator_space(&m_diag)?;
            let pure = purify(&space, PurifyOptions::default())?;
            let gens: Vec<DVector<f64>> = e_set
                .iter()
                .flat_map(|&j| {
                    [2 * j, 2 * j + 1].map(|k| {
                        DVector::from_fn(2 * n, |i, _| if i == k { 1.0 } else { 0.0 })
                    })
                })
                .collect();
            let dec = decompose_base(&pure, &gens)?;
            let md = modular_data(&pure, &dec)?;
            let form = entropy_form(&pure, &md);
            let f = random_vector(&mut rng, 2 * n);
            let engine = form
                .entropy_base(&pure, &f)?
                .finite()
                .expect("mixed modes have finite entropy");
            let closed = oscillator_entropy(&m_diag, &e_set, &f)?
                .finite()
                .expect("closed form finite for m > 1");
            let residual = (engine - closed).abs() / (1.0 + closed);
            worst = worst.max(residual);
            csv.push_str(&format!("oscillator_mode_sum,{i},{}\n", fmt_float(residual)));
        }
        sections.push(SweepSection {
            oracle: "oscillator_mode_sum",
            tolerance,
            instances,
            worst_residual: worst,
            passed: worst <= tolerance,
        });
    }

    // Engine vs the degenerate-space imaginary-part sum.
    {
        let tolerance = 1e-9;
        let mut worst: f64 = 0.0;
        for i in 0..instances {
            let n = rng.random_range(1..=6);
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..5.0)).collect();
            let mut mask: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            if !mask.iter().any(|&m| m) {
                mask[rng.random_range(0..n)] = true;
            }
            let space = abelian_space(&weights)?;
            let pure = purify(&space, PurifyOptions::default())?;
            let dec = decompose_base(&pure, &y_subspace_generators(&mask))?;
            let md = modular_data(&pure, &dec)?;
            let form = entropy_form(&pure, &md);
            let u = random_vector(&mut rng, n);
            let v = random_vector(&mut rng, n);
            let h = embed_complex_probe(&pure, &u, &v)?;
            let engine = form
                .entropy(&pure, &h)
                .finite()
                .expect("degenerate spaces have finite entropy");
            let closed = abelian_entropy(&weights, &mask, v.as_slice())?;
            let residual = (engine - closed).abs();
            worst = worst.max(residual);
            csv.push_str(&format!(
                "abelian_imaginary_sum,{i},{}\n",
                fmt_float(residual)
            ));
        }
        sections.push(SweepSection {
            oracle: "abelian_imaginary_sum",
            tolerance,
            instances,
            worst_residual: worst,
            passed: worst <= tolerance,
        });
    }

    // Structural identities of the modular data and the entropy form.
    {
        let tolerance = 1e-8;
        let mut worst: f64 = 0.0;
        for i in 0..instances {
            let n = rng.random_range(2..=6);
            let space = random_space(&mut rng, n);
            let pure = purify(&space, PurifyOptions::default())?;
            let k = rng.random_range(1..=n);
            let gens: Vec<DVector<f64>> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
            let dec = decompose_base(&pure, &gens)?;
            let md = modular_data(&pure, &dec)?;
            let form = entropy_form(&pure, &md);
            let mut samples: Vec<DVector<f64>> = (0..3)
                .map(|_| pure.embed(&random_vector(&mut rng, n)).unwrap())
                .collect();
            samples.push(random_vector(&mut rng, pure.doubled_dim()));
            let report = invariant_report(&pure, &md, &form, &samples)?;
            let residual = report.worst();
            worst = worst.max(residual);
            csv.push_str(&format!("modular_invariants,{i},{}\n", fmt_float(residual)));
        }
        sections.push(SweepSection {
            oracle: "modular_invariants",
            tolerance,
            instances,
            worst_residual: worst,
            passed: worst <= tolerance,
        });
    }

    // Factorial projector: basis solve vs spectral formula.
    {
        let tolerance = 1e-8;
        let mut worst: f64 = 0.0;
        let mut done = 0usize;
        let mut attempts = 0usize;
        while done < instances && attempts < 20 * instances {
            attempts += 1;
            let n = rng.random_range(2..=6);
            let space = random_space(&mut rng, n);
            let pure = purify(&space, PurifyOptions::default())?;
            let k = 2 * rng.random_range(1..=(n / 2).max(1));
            let gens: Vec<DVector<f64>> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
            let dec = decompose_base(&pure, &gens)?;
            if dec.abelian.dim() != 0 || dec.infinite.dim() != 0 || dec.factorial.dim() != k {
                continue;
            }
            let md = modular_data(&pure, &dec)?;
            let from_spectra = match pf_via_modular(&pure, &md) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let residual = op_norm(&(dec.p_factorial(&pure) - from_spectra));
            worst = worst.max(residual);
            csv.push_str(&format!("factorial_projector,{done},{}\n", fmt_float(residual)));
            done += 1;
        }
        sections.push(SweepSection {
            oracle: "factorial_projector",
            tolerance,
            instances: done,
            worst_residual: worst,
            passed: done == instances && worst <= tolerance,
        });
    }

    bundle.timing("sweeps", started);
    bundle.write_text("oracle.csv", &csv)?;
    bundle.write_json("oracle.json", &sections)?;
    let failed: Vec<&str> = sections
        .iter()
        .filter(|s| !s.passed)
        .map(|s| s.oracle)
        .collect();
    if failed.is_empty() {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "sections failed: {}",
            failed.join(", ")
        )))
    }
}

pub fn convergence(
    config: &ExperimentConfig,
    tol: Tolerances,
    bundle: &mut OutputBundle,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let probe = match &config.probe {
        Some(spec) => assemble::smooth_probe(spec)?,
        None => SmoothProbe::standard_bump(),
    };
    let t = config.t.unwrap_or(0.3);
    let window = config.window.unwrap_or((-6.0, 1.5));
    let resolutions = config
        .resolutions
        .clone()
        .unwrap_or_else(|| vec![16, 32, 64]);
    if resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Config("resolutions must be ascending".into()));
    }
    let state = match config.beta {
        Some(beta) => U1State::Kms { beta },
        None => U1State::Vacuum,
    };
    let quad = QuadratureParams::default();
    let reference = u1::entropy(&probe, t, &state, quad)?;

    let mut rows = Vec::new();
    let mut csv = String::from("resolution,entropy,reference,gap,ratio\n");
    for &n in &resolutions {
        let d = discretize_u1(n, window, &state, quad, tol)?;
        let mut gens = d.generators_left_of(t);
        if gens.len() % 2 == 1 {
            gens.pop();
        }
        let h = d.probe_vector_for_cut(&gens, &probe, quad)?;
        let pure = purify(d.space(), PurifyOptions::default())?;
        let dec = decompose_base(&pure, &gens)?;
        let md = modular_data(&pure, &dec)?;
        let form = entropy_form(&pure, &md);
        let engine = form
            .entropy(&pure, &pure.embed(&h)?)
            .finite()
            .ok_or_else(|| {
                CliError::Config("discretized cut has infinite entropy; widen the window".into())
            })?;
        let gap = reference - engine;
        csv.push_str(&format!(
            "{n},{},{},{},{}\n",
            fmt_float(engine),
            fmt_float(reference),
            fmt_float(gap),
            fmt_float(engine / reference)
        ));
        rows.push((n, engine, gap));
        log::info!("resolution {n}: entropy {engine:.6}, gap {gap:.6}");
    }
    bundle.timing("meshes", started);
    bundle.write_text("convergence.csv", &csv)?;

    let decreasing = rows.windows(2).all(|w| w[0].2 > w[1].2);
    let summary = serde_json::json!({
        "oracle": "continuum_halfline_entropy",
        "reference": reference,
        "cut_time": t,
        "window": window,
        "rows": rows
            .iter()
            .map(|(n, e, g)| serde_json::json!({"resolution": n, "entropy": e, "gap": g}))
            .collect::<Vec<_>>(),
        "gap_decreasing": decreasing,
    });
    bundle.write_json("convergence.json", &summary)?;
    if decreasing {
        Ok(Outcome::Clean)
    } else {
        Ok(Outcome::CheckFailed(
            "entropy gap is not strictly decreasing across the meshes".into(),
        ))
    }
}
