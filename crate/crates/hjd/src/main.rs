use std::path::PathBuf;

use clap::{Parser, Subcommand};
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hjd::experiment::{builtin_config, builtin_configs, run_experiment, write_outputs, ExperimentConfig};
use hjd::hcjdi::HermitianizedSets;
use hjd::oracles::{
    block2_of, combined_local_cost, givens_local_cost, grid_search_combined, grid_search_givens,
    Block2,
};
use hjd::orthogonal::{co_hjd_rotation, SweepConfig, TargetSets};
use hjd::scenarios::{gen_problem, ScenarioSpec};
use hjd::Result;

#[derive(Parser)]
#[command(name = "hjd", about = "Hybrid joint diagonalization experiment harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment from a TOML config file or a built-in name.
    Run {
        /// Path to a TOML config, or a built-in name (see `hjd list-configs`).
        #[arg(long)]
        config: String,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: results/<config-name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the built-in experiment configurations.
    ListConfigs,
    /// Run a brute-force oracle check and print its result.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
}

#[derive(Subcommand)]
enum OracleOp {
    /// Compare the closed-form CO-HJD rotation against a 2-D grid search.
    GivensGrid {
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
    /// Evaluate the combined Givens+hyperbolic local cost over a 3-D grid
    /// around a random instance and report the best grid point.
    CombinedGrid {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 120)]
        grid: usize,
    },
}

fn load_config(name_or_path: &str) -> Result<ExperimentConfig> {
    if let Some(c) = builtin_config(name_or_path) {
        return Ok(c);
    }
    let text = std::fs::read_to_string(name_or_path)?;
    let config: ExperimentConfig = toml::from_str(&text)?;
    Ok(config)
}

fn cmd_run(
    config: String,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> Result<()> {
    let mut config = load_config(&config)?;
    if let Some(t) = trials {
        config.trials = t;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| hjd::HjdError::InvalidConfig(format!("rayon: {e}")))?;
    }
    let out_dir = out.unwrap_or_else(|| PathBuf::from("results").join(&config.name));
    let result = run_experiment(&config)?;
    write_outputs(&config, &result, &out_dir)?;
    println!(
        "wrote {} rows to {}",
        result.rows.len(),
        out_dir.display()
    );
    let summary = hjd::experiment::summarize(&config, &result);
    for v in &summary.variants {
        for (alg, pi) in &v.median_final_pi {
            let tag = match (v.snr_db, v.rho) {
                (Some(s), Some(r)) => format!(" [snr={s} dB, rho={r}]"),
                (Some(s), None) => format!(" [snr={s} dB]"),
                (None, Some(r)) => format!(" [rho={r}]"),
                (None, None) => String::new(),
            };
            println!("{alg}{tag}: median final PI = {pi:.3e}");
        }
    }
    Ok(())
}

fn cmd_oracle(op: OracleOp) -> Result<()> {
    match op {
        OracleOp::GivensGrid { instances, seed, grid } => {
            let mut worst = 0.0_f64;
            for i in 0..instances {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let spec = ScenarioSpec {
                    n: 2,
                    k1: 3,
                    k2: 3,
                    cond_target: None,
                    snr_db: None,
                    mou_target: None,
                    seed: 0,
                };
                let (sets, _) = gen_problem(&spec, &mut rng)?;
                let m_blocks: Vec<Block2> = sets.m.iter().map(|m| block2_of(m, 0, 1)).collect();
                let n_blocks: Vec<Block2> = sets.n.iter().map(|n| block2_of(n, 0, 1)).collect();
                let params = co_hjd_rotation(&sets, 0, 1, &SweepConfig::default());
                let closed =
                    givens_local_cost(&m_blocks, &n_blocks, params.theta, params.alpha);
                let best = grid_search_givens(&m_blocks, &n_blocks, grid, grid);
                let gap = closed - best.value;
                worst = worst.max(gap);
                println!(
                    "instance {i}: closed-form cost {closed:.9e}, grid best {:.9e}, gap {gap:.3e}",
                    best.value
                );
            }
            println!("worst closed-form excess over grid: {worst:.3e}");
        }
        OracleOp::CombinedGrid { seed, grid } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = ScenarioSpec {
                n: 2,
                k1: 3,
                k2: 3,
                cond_target: Some(20.0),
                snr_db: None,
                mou_target: None,
                seed: 0,
            };
            let (sets, _) = gen_problem(&spec, &mut rng)?;
            let herm = HermitianizedSets::new(&sets.m, &sets.n)?;
            let mt_blocks: Vec<Block2> =
                herm.mtilde.iter().map(|m| block2_of(m, 0, 1)).collect();
            let n_blocks: Vec<Block2> = herm.n.iter().map(|n| block2_of(n, 0, 1)).collect();
            for (axis, label) in [(0.0, "R(0)"), (std::f64::consts::FRAC_PI_2, "R(pi/2)")] {
                let best = grid_search_combined(&mt_blocks, &n_blocks, grid, grid, 2.0, axis);
                let at_identity = combined_local_cost(&mt_blocks, &n_blocks, 0.0, 0.0, axis);
                println!(
                    "{label}: grid best theta={:.6}, y={:.6}, cost={:.9e} (identity cost {:.9e})",
                    best.x, best.y, best.value, at_identity
                );
            }
            // sanity: diagonal sets stay at zero
            let diag: Vec<Array2<Complex64>> = (0..2)
                .map(|k| {
                    Array2::from_diag(&ndarray::arr1(&[
                        Complex64::new(1.0 + k as f64, 0.0),
                        Complex64::new(2.0 - k as f64, 0.0),
                    ]))
                })
                .collect();
            let diag_sets = TargetSets::new(diag.clone(), diag)?;
            let dm: Vec<Block2> = diag_sets.m.iter().map(|m| block2_of(m, 0, 1)).collect();
            let dn: Vec<Block2> = diag_sets.n.iter().map(|n| block2_of(n, 0, 1)).collect();
            let diag_best = grid_search_combined(&dm, &dn, 61, 61, 2.0, 0.0);
            println!("diagonal-input grid best cost: {:.3e}", diag_best.value);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, trials, seed, out, workers } => {
            cmd_run(config, trials, seed, out, workers)
        }
        Command::ListConfigs => {
            for c in builtin_configs() {
                let scenario = match &c.scenario {
                    hjd::experiment::ScenarioKind::Synthetic(s) => format!(
                        "synthetic n={} K1={} K2={} cond={:?} snr={:?} mou={:?}",
                        s.n, s.k1, s.k2, s.cond_target, s.snr_db, s.mou_target
                    ),
                    hjd::experiment::ScenarioKind::Bss(b) => format!(
                        "bss m={} n={} T={} rho={} noise={:?} snr={:?}",
                        b.m, b.n, b.t, b.rho, b.noise, b.snr_db
                    ),
                };
                let algs: Vec<&str> = c.algorithms.iter().map(|a| a.name()).collect();
                println!(
                    "{:<12} trials={:<4} algorithms=[{}] {}",
                    c.name,
                    c.trials,
                    algs.join(", "),
                    scenario
                );
            }
            Ok(())
        }
        Command::Oracle { op } => cmd_oracle(op),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
