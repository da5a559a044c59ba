//! Monte Carlo experiment harness: runs algorithms × scenarios × trials with
//! deterministic per-trial sub-seeds and emits CSV rows plus a JSON summary.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aro::{aro_hjd, augment_mixing, augment_statistics, AugmentedSet};
use crate::hcjdi::h_cjdi;
use crate::kernels::CMat;
use crate::oracles::median;
use crate::orthogonal::{co_hjd, ro_hjd, Diagnostics, SweepConfig, TargetSets};
use crate::scenarios::{
    estimate_augmented_statistics, estimate_statistics, gen_ar1_sources, gen_problem,
    mix_observe, prewhiten, BssSpec, InnovationMode, ScenarioSpec,
};
use crate::{HjdError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    CoHjd,
    RoHjd,
    AroHjd,
    HCjdi,
    /// H-CJDi restricted to the Hermitian set (K₂ = 0).
    Cjdi,
    /// CO-HJD restricted to the Hermitian set (K₂ = 0), SOBI's JD stage.
    SobiJd,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::CoHjd => "co-hjd",
            Algorithm::RoHjd => "ro-hjd",
            Algorithm::AroHjd => "aro-hjd",
            Algorithm::HCjdi => "h-cjdi",
            Algorithm::Cjdi => "cjdi",
            Algorithm::SobiJd => "sobi-jd",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Synthetic(ScenarioSpec),
    Bss(BssSpec),
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: ScenarioKind,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub seed: u64,
    /// Optional SNR sweep (dB); overrides the scenario's snr_db per variant.
    #[serde(default)]
    pub snr_sweep: Option<Vec<f64>>,
    /// Optional ρ sweep (BSS scenarios only).
    #[serde(default)]
    pub rho_sweep: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HjdError::InvalidConfig("trials must be >= 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HjdError::InvalidConfig(
                "algorithms must name at least one algorithm".into(),
            ));
        }
        match &self.scenario {
            ScenarioKind::Synthetic(s) => s.validate()?,
            ScenarioKind::Bss(b) => {
                b.validate()?;
                if self.rho_sweep.as_deref().is_some_and(|v| v.is_empty()) {
                    return Err(HjdError::InvalidConfig("rho_sweep must be non-empty".into()));
                }
            }
        }
        if matches!(self.scenario, ScenarioKind::Synthetic(_)) && self.rho_sweep.is_some() {
            return Err(HjdError::InvalidConfig(
                "rho_sweep applies only to bss scenarios".into(),
            ));
        }
        Ok(())
    }
}

/// One per-sweep record of one algorithm run. Wall time is kept in memory
/// for interactive inspection but never serialized: output files must be
/// byte-identical across reruns.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResultRow {
    pub algorithm: &'static str,
    pub trial: usize,
    pub snr_db: Option<f64>,
    pub rho: Option<f64>,
    pub sweep: usize,
    pub pi: Option<f64>,
    pub cost: Option<f64>,
    pub max_sin: Option<f64>,
    pub max_sinh: Option<f64>,
    pub converged: bool,
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

/// Stable sub-seed derivation (splitmix64 of seed + index·golden-gamma).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rows_from_diag(
    algorithm: Algorithm,
    trial: usize,
    snr_db: Option<f64>,
    rho: Option<f64>,
    diag: &Diagnostics,
    wall_time_s: f64,
) -> Vec<ResultRow> {
    diag.records
        .iter()
        .map(|r| ResultRow {
            algorithm: algorithm.name(),
            trial,
            snr_db,
            rho,
            sweep: r.sweep,
            pi: r.pi,
            cost: Some(r.cost),
            max_sin: Some(r.max_sin),
            max_sinh: Some(r.max_sinh),
            converged: diag.converged,
            wall_time_s,
        })
        .collect()
}

fn failure_row(
    algorithm: Algorithm,
    trial: usize,
    snr_db: Option<f64>,
    rho: Option<f64>,
) -> Vec<ResultRow> {
    vec![ResultRow {
        algorithm: algorithm.name(),
        trial,
        snr_db,
        rho,
        sweep: 0,
        pi: None,
        cost: None,
        max_sin: None,
        max_sinh: None,
        converged: false,
        wall_time_s: 0.0,
    }]
}

fn run_algorithm_on_sets(
    algorithm: Algorithm,
    sets: &TargetSets,
    augmented: Option<(&AugmentedSet, &ndarray::Array2<f64>)>,
    ground_truth: &CMat,
    sweep: &SweepConfig,
) -> Result<Diagnostics> {
    match algorithm {
        Algorithm::CoHjd => {
            let mut local = sets.clone();
            Ok(co_hjd(&mut local, sweep, Some(ground_truth)).1)
        }
        Algorithm::SobiJd => {
            let mut local = TargetSets::new(sets.m.clone(), vec![])?;
            Ok(co_hjd(&mut local, sweep, Some(ground_truth)).1)
        }
        Algorithm::RoHjd => {
            let mut local = sets.clone();
            Ok(ro_hjd(&mut local, sweep, Some(ground_truth))?.1)
        }
        Algorithm::HCjdi => Ok(h_cjdi(&sets.m, &sets.n, sweep, Some(ground_truth))?.1),
        Algorithm::Cjdi => Ok(h_cjdi(&sets.m, &[], sweep, Some(ground_truth))?.1),
        Algorithm::AroHjd => {
            let (set, abar) = augmented.ok_or_else(|| {
                HjdError::InvalidConfig(
                    "aro-hjd needs paired M/N targets to build augmented statistics".into(),
                )
            })?;
            let mut local = set.clone();
            Ok(aro_hjd(&mut local, sweep, Some(abar)).1)
        }
    }
}

fn run_trial_synthetic(
    spec: &ScenarioSpec,
    algorithms: &[Algorithm],
    sweep: &SweepConfig,
    trial: usize,
    trial_seed: u64,
) -> Vec<ResultRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let (sets, gt) = match gen_problem(spec, &mut rng) {
        Ok(x) => x,
        Err(_) => {
            return algorithms
                .iter()
                .flat_map(|&a| failure_row(a, trial, spec.snr_db, None))
                .collect()
        }
    };
    let augmented = if algorithms.contains(&Algorithm::AroHjd) {
        let pairs = sets.m.len().min(sets.n.len());
        if pairs > 0 {
            let mbar = (0..pairs)
                .map(|k| augment_statistics(&sets.m[k], &sets.n[k]))
                .collect();
            AugmentedSet::new(mbar)
                .ok()
                .map(|s| (s, augment_mixing(&gt.a)))
        } else {
            None
        }
    } else {
        None
    };
    let mut rows = Vec::new();
    for &alg in algorithms {
        let start = std::time::Instant::now();
        let outcome = run_algorithm_on_sets(
            alg,
            &sets,
            augmented.as_ref().map(|(s, a)| (s, a)),
            &gt.a,
            sweep,
        );
        let wall = start.elapsed().as_secs_f64();
        match outcome {
            Ok(diag) => rows.extend(rows_from_diag(alg, trial, spec.snr_db, None, &diag, wall)),
            Err(_) => rows.extend(failure_row(alg, trial, spec.snr_db, None)),
        }
    }
    rows
}

fn run_trial_bss(
    spec: &BssSpec,
    algorithms: &[Algorithm],
    sweep: &SweepConfig,
    trial: usize,
    trial_seed: u64,
) -> Vec<ResultRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let snr = spec.snr_db;
    let rho = Some(spec.rho);
    let fail_all = |algorithms: &[Algorithm]| -> Vec<ResultRow> {
        algorithms
            .iter()
            .flat_map(|&a| failure_row(a, trial, snr, rho))
            .collect()
    };

    // A is drawn once per trial and shared by every algorithm.
    let mut a: CMat = ndarray::Array2::zeros((spec.m, spec.n));
    {
        use rand::Rng;
        use rand_distr::StandardNormal;
        for v in a.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v = num_complex::Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        }
    }

    let pipeline = |spec: &BssSpec, rng: &mut ChaCha8Rng| -> Result<(TargetSets, AugmentedSet, CMat)> {
        let sources = gen_ar1_sources(spec, rng)?;
        let x = mix_observe(&a, &sources, spec, rng)?;
        let (w, z) = prewhiten(&x, spec.n)?;
        let sets = estimate_statistics(&z, &spec.lags_m, &spec.lags_n)?;
        // Each augmented matrix realifies one (M_τ, N_τ) pair, so the
        // augmented set follows the pseudo-correlation lags. Lag 0 is
        // informative here: whitening only normalizes the Hermitian part,
        // and the lag-0 pseudo-correlation is the lowest-noise anchor for
        // the real/imaginary axes.
        let aug = estimate_augmented_statistics(&z, &spec.lags_n)?;
        Ok((sets, aug, w.dot(&a)))
    };

    let Ok((sets, aug, wa)) = pipeline(spec, &mut rng) else {
        return fail_all(algorithms);
    };
    // ARO-HJD needs sources with independent real/imaginary parts (C₂). When
    // the scenario is already C₂ it shares the exact data realization with
    // the other algorithms; otherwise a parallel C₂ record is generated.
    let aro_data = if algorithms.contains(&Algorithm::AroHjd) {
        if spec.innovation_mode == InnovationMode::C2 {
            Some((aug, augment_mixing(&wa)))
        } else {
            let mut c2 = spec.clone();
            c2.innovation_mode = InnovationMode::C2;
            pipeline(&c2, &mut rng)
                .ok()
                .map(|(_, aug2, wa2)| (aug2, augment_mixing(&wa2)))
        }
    } else {
        None
    };

    let mut rows = Vec::new();
    for &alg in algorithms {
        let start = std::time::Instant::now();
        let outcome = run_algorithm_on_sets(
            alg,
            &sets,
            aro_data.as_ref().map(|(s, abar)| (s, abar)),
            &wa,
            sweep,
        );
        let wall = start.elapsed().as_secs_f64();
        match outcome {
            Ok(diag) => rows.extend(rows_from_diag(alg, trial, snr, rho, &diag, wall)),
            Err(_) => rows.extend(failure_row(alg, trial, snr, rho)),
        }
    }
    rows
}

/// Scenario variants spanned by the snr/rho sweeps (single variant when no
/// sweep is configured).
fn variants(config: &ExperimentConfig) -> Vec<ScenarioKind> {
    let mut out = Vec::new();
    let base = config.scenario.clone();
    let snrs: Vec<Option<f64>> = match &config.snr_sweep {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let rhos: Vec<Option<f64>> = match &config.rho_sweep {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    for snr in &snrs {
        for rho in &rhos {
            let mut s = base.clone();
            match &mut s {
                ScenarioKind::Synthetic(spec) => {
                    if let Some(v) = snr {
                        spec.snr_db = Some(*v);
                    }
                }
                ScenarioKind::Bss(spec) => {
                    if let Some(v) = snr {
                        spec.snr_db = Some(*v);
                    }
                    if let Some(v) = rho {
                        spec.rho = *v;
                    }
                }
            }
            out.push(s);
        }
    }
    out
}

/// Runs the full campaign. Trials execute in parallel; output row order is
/// (variant, trial, algorithm) regardless of completion order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut rows = Vec::new();
    for (vi, variant) in variants(config).iter().enumerate() {
        let per_trial: Vec<Vec<ResultRow>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let trial_seed =
                    sub_seed(config.seed, (vi as u64) << 32 | trial as u64);
                match variant {
                    ScenarioKind::Synthetic(s) => {
                        run_trial_synthetic(s, &config.algorithms, &config.sweep, trial, trial_seed)
                    }
                    ScenarioKind::Bss(b) => {
                        run_trial_bss(b, &config.algorithms, &config.sweep, trial, trial_seed)
                    }
                }
            })
            .collect();
        rows.extend(per_trial.into_iter().flatten());
    }
    Ok(ExperimentResult { rows })
}

/// Final PI of each (algorithm, trial) group within an iterator of rows.
fn final_pis<'a>(
    rows: impl Iterator<Item = &'a ResultRow>,
    algorithm: &str,
) -> Vec<f64> {
    let mut last: BTreeMap<usize, Option<f64>> = BTreeMap::new();
    for r in rows.filter(|r| r.algorithm == algorithm) {
        last.insert(r.trial, r.pi);
    }
    last.into_values().flatten().collect()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VariantSummary {
    pub snr_db: Option<f64>,
    pub rho: Option<f64>,
    pub median_final_pi: BTreeMap<String, f64>,
    pub converged_trials: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub version: String,
    pub variants: Vec<VariantSummary>,
}

pub fn summarize(config: &ExperimentConfig, result: &ExperimentResult) -> Summary {
    let mut keys: Vec<(Option<u64>, Option<u64>)> = Vec::new();
    let mut seen: Vec<(Option<f64>, Option<f64>)> = Vec::new();
    for r in &result.rows {
        let key = (r.snr_db.map(f64::to_bits), r.rho.map(f64::to_bits));
        if !keys.contains(&key) {
            keys.push(key);
            seen.push((r.snr_db, r.rho));
        }
    }
    let variants = seen
        .iter()
        .map(|&(snr_db, rho)| {
            let group: Vec<&ResultRow> = result
                .rows
                .iter()
                .filter(|r| r.snr_db == snr_db && r.rho == rho)
                .collect();
            let mut median_final_pi = BTreeMap::new();
            let mut converged_trials = BTreeMap::new();
            for alg in &config.algorithms {
                let pis = final_pis(group.iter().copied(), alg.name());
                if !pis.is_empty() {
                    median_final_pi.insert(alg.name().to_string(), median(&pis));
                }
                let mut conv: BTreeMap<usize, bool> = BTreeMap::new();
                for r in group.iter().filter(|r| r.algorithm == alg.name()) {
                    conv.insert(r.trial, r.converged);
                }
                converged_trials
                    .insert(alg.name().to_string(), conv.values().filter(|&&c| c).count());
            }
            VariantSummary {
                snr_db,
                rho,
                median_final_pi,
                converged_trials,
            }
        })
        .collect();
    Summary {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        variants,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotAxis {
    Sweep,
    Snr,
    Rho,
}

/// Renders an aggregated CSV: one column per algorithm of median PI against
/// the chosen x-axis.
pub fn emit_plotdata(rows: &[ResultRow], algorithms: &[Algorithm], axis: PlotAxis) -> String {
    let mut out = String::new();
    let axis_name = match axis {
        PlotAxis::Sweep => "sweep",
        PlotAxis::Snr => "snr_db",
        PlotAxis::Rho => "rho",
    };
    out.push_str(axis_name);
    for a in algorithms {
        out.push(',');
        out.push_str(a.name());
    }
    out.push_str("\r\n");
    match axis {
        PlotAxis::Sweep => {
            let max_sweep = rows.iter().map(|r| r.sweep).max().unwrap_or(0);
            for sweep in 1..=max_sweep {
                out.push_str(&sweep.to_string());
                for a in algorithms {
                    // per trial: PI at this sweep, padding with the trial's
                    // final value once it has converged
                    let mut per_trial: BTreeMap<usize, Option<f64>> = BTreeMap::new();
                    for r in rows.iter().filter(|r| r.algorithm == a.name() && r.sweep <= sweep)
                    {
                        per_trial.insert(r.trial, r.pi);
                    }
                    let pis: Vec<f64> = per_trial.into_values().flatten().collect();
                    out.push(',');
                    if !pis.is_empty() {
                        out.push_str(&format!("{}", median(&pis)));
                    }
                }
                out.push_str("\r\n");
            }
        }
        PlotAxis::Snr | PlotAxis::Rho => {
            let key = |r: &ResultRow| match axis {
                PlotAxis::Snr => r.snr_db,
                _ => r.rho,
            };
            let mut values: Vec<f64> = Vec::new();
            for r in rows {
                if let Some(v) = key(r) {
                    if !values.iter().any(|&x| x == v) {
                        values.push(v);
                    }
                }
            }
            for v in values {
                out.push_str(&format!("{v}"));
                let group: Vec<&ResultRow> =
                    rows.iter().filter(|r| key(r) == Some(v)).collect();
                for a in algorithms {
                    let pis = final_pis(group.iter().copied(), a.name());
                    out.push(',');
                    if !pis.is_empty() {
                        out.push_str(&format!("{}", median(&pis)));
                    }
                }
                out.push_str("\r\n");
            }
        }
    }
    out
}

pub fn write_outputs(
    config: &ExperimentConfig,
    result: &ExperimentResult,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(out_dir.join("results.csv"))?;
    for row in &result.rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(std::io::Error::from)?;

    let summary = summarize(config, result);
    let mut f = std::fs::File::create(out_dir.join("summary.json"))?;
    let body = serde_json::to_string_pretty(&summary)?;
    f.write_all(body.as_bytes())?;
    f.write_all(b"\n")?;

    let sweep_csv = emit_plotdata(&result.rows, &config.algorithms, PlotAxis::Sweep);
    std::fs::write(out_dir.join("plot_sweep.csv"), sweep_csv)?;
    if config.snr_sweep.is_some() {
        let csv = emit_plotdata(&result.rows, &config.algorithms, PlotAxis::Snr);
        std::fs::write(out_dir.join("plot_snr.csv"), csv)?;
    }
    if config.rho_sweep.is_some() {
        let csv = emit_plotdata(&result.rows, &config.algorithms, PlotAxis::Rho);
        std::fs::write(out_dir.join("plot_rho.csv"), csv)?;
    }
    Ok(())
}

fn synthetic(
    name: &str,
    n: usize,
    trials: usize,
    cond: Option<f64>,
    snr: Option<f64>,
    mou: Option<f64>,
    algorithms: Vec<Algorithm>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        scenario: ScenarioKind::Synthetic(ScenarioSpec {
            n,
            k1: 5,
            k2: 5,
            cond_target: cond,
            snr_db: snr,
            mou_target: mou,
            seed: 0,
        }),
        algorithms,
        trials,
        sweep: SweepConfig::default(),
        seed: 20_240_817,
        snr_sweep: None,
        rho_sweep: None,
    }
}

fn bss_config(name: &str, noise: crate::scenarios::NoiseModel, snr: f64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        scenario: ScenarioKind::Bss(BssSpec {
            m: 5,
            n: 3,
            t: 1000,
            ar_coeffs: vec![
                num_complex::Complex64::new(0.95, 0.0),
                num_complex::Complex64::from_polar(0.85, std::f64::consts::PI / 4.0),
                num_complex::Complex64::from_polar(0.7, std::f64::consts::PI / 6.0),
            ],
            rho: 0.9,
            innovation_mode: InnovationMode::C1,
            noise,
            snr_db: Some(snr),
            lags_m: vec![1, 2, 3, 4, 5],
            lags_n: vec![0, 1, 2, 3, 4],
            seed: 0,
        }),
        algorithms: vec![
            Algorithm::CoHjd,
            Algorithm::RoHjd,
            Algorithm::AroHjd,
            Algorithm::HCjdi,
        ],
        trials: 20,
        sweep: SweepConfig::default(),
        seed: 20_240_817,
        snr_sweep: None,
        rho_sweep: None,
    }
}

/// Built-in Monte Carlo experiment families.
pub fn builtin_configs() -> Vec<ExperimentConfig> {
    let exact = |name: &str, n: usize, trials: usize| {
        synthetic(
            name,
            n,
            trials,
            Some(150.0),
            None,
            None,
            vec![Algorithm::HCjdi, Algorithm::Cjdi],
        )
    };
    let noisy = |name: &str, n: usize, trials: usize| {
        synthetic(
            name,
            n,
            trials,
            Some(150.0),
            Some(30.0),
            Some(1.0 - 1e-6),
            vec![Algorithm::HCjdi, Algorithm::Cjdi],
        )
    };
    let mut fig3 = bss_config("fig3", crate::scenarios::NoiseModel::White, 20.0);
    fig3.rho_sweep = Some(vec![0.1, 0.9]);
    vec![
        exact("fig1-small", 5, 100),
        exact("fig1-large", 50, 20),
        noisy("fig2-small", 5, 100),
        noisy("fig2-large", 50, 20),
        fig3,
        bss_config("fig4a", crate::scenarios::NoiseModel::White, 0.0),
        bss_config("fig4b", crate::scenarios::NoiseModel::Colored { base: 0.8 }, 0.0),
    ]
}

pub fn builtin_config(name: &str) -> Option<ExperimentConfig> {
    builtin_configs().into_iter().find(|c| c.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smoke_config() -> ExperimentConfig {
        ExperimentConfig {
            name: "smoke".to_string(),
            scenario: ScenarioKind::Synthetic(ScenarioSpec {
                n: 2,
                k1: 3,
                k2: 3,
                cond_target: Some(1.0),
                snr_db: None,
                mou_target: None,
                seed: 0,
            }),
            algorithms: vec![Algorithm::CoHjd],
            trials: 1,
            sweep: SweepConfig::default(),
            seed: 7,
            snr_sweep: None,
            rho_sweep: None,
        }
    }

    #[test]
    fn sub_seed_is_stable_and_spreads() {
        assert_eq!(sub_seed(1, 0), sub_seed(1, 0));
        assert_ne!(sub_seed(1, 0), sub_seed(1, 1));
        assert_ne!(sub_seed(1, 0), sub_seed(2, 0));
    }

    #[test]
    fn smoke_run_converges() {
        let config = smoke_config();
        let result = run_experiment(&config).unwrap();
        assert!(!result.rows.is_empty());
        let last = result.rows.last().unwrap();
        assert!(last.converged);
        assert!(last.pi.unwrap() < 1e-10);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let config = smoke_config();
        let dir1 = tempfile::tempdir().unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let r1 = run_experiment(&config).unwrap();
        write_outputs(&config, &r1, dir1.path()).unwrap();
        let r2 = run_experiment(&config).unwrap();
        write_outputs(&config, &r2, dir2.path()).unwrap();
        for f in ["results.csv", "summary.json", "plot_sweep.csv"] {
            let a = std::fs::read(dir1.path().join(f)).unwrap();
            let b = std::fs::read(dir2.path().join(f)).unwrap();
            assert_eq!(a, b, "{f} differs");
        }
    }

    #[test]
    fn plotdata_headers() {
        let empty = emit_plotdata(&[], &[Algorithm::CoHjd, Algorithm::HCjdi], PlotAxis::Sweep);
        assert_eq!(empty, "sweep,co-hjd,h-cjdi\r\n");
    }

    #[test]
    fn toml_roundtrip() {
        for config in builtin_configs() {
            let text = toml::to_string(&config).unwrap();
            let back: ExperimentConfig = toml::from_str(&text).unwrap();
            assert_eq!(back.name, config.name);
            assert_eq!(back.trials, config.trials);
            assert_eq!(back.algorithms, config.algorithms);
        }
    }

    #[test]
    fn builtin_names() {
        let names: Vec<String> = builtin_configs().into_iter().map(|c| c.name).collect();
        for want in [
            "fig1-small",
            "fig1-large",
            "fig2-small",
            "fig2-large",
            "fig3",
            "fig4a",
            "fig4b",
        ] {
            assert!(names.iter().any(|n| n == want), "missing {want}");
        }
        assert!(builtin_config("fig3").is_some());
        assert!(builtin_config("nope").is_none());
    }

    #[test]
    fn bss_smoke() {
        let mut config = bss_config("bss-smoke", crate::scenarios::NoiseModel::White, 20.0);
        config.trials = 1;
        let result = run_experiment(&config).unwrap();
        // all four algorithms produced rows
        for alg in ["co-hjd", "ro-hjd", "aro-hjd", "h-cjdi"] {
            assert!(
                result.rows.iter().any(|r| r.algorithm == alg),
                "no rows for {alg}"
            );
        }
    }
}
