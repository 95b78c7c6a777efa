use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tmcmc_core::diagnostics::{average_ks, DiagnosticsReport};
use tmcmc_core::kernels::{run_ensemble, TraceSummary};
use tmcmc_core::scaling::{ScalingFamily, Variant};
use tmcmc_core::{derive_seed, rng_from_seed, KernelKind, RecordPolicy};
use tmcmc_harness::config::{default_output_dir, ExperimentConfig, TargetSpec, OUT_DIR_ENV};
use tmcmc_harness::curves::{curves_csv, linear_grid, speed_curves};
use tmcmc_harness::limit::{run_limit_study, uniform_t_grid, LimitStudyConfig};
use tmcmc_harness::manifest::{OutputDir, RunManifest, RunRecord, SeedRecord};
use tmcmc_harness::table1::{reproduce_table1, INIT_HALF_WIDTH};
use tmcmc_harness::timing::{timing_benchmark, timing_csv};
use tmcmc_harness::{HarnessError, Result};

const EXIT_PARTIAL: u8 = 2;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(
    name = "tmcmc",
    version,
    about = "Additive TMCMC versus random-walk Metropolis experiments"
)]
struct Cli {
    /// Worker threads for chain ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Tmcmc,
    Rwm,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Tmcmc => KernelKind::Tmcmc,
            KernelArg::Rwm => KernelKind::Rwm,
        }
    }
}

#[derive(Args)]
struct ChainArgs {
    /// Target: iid:<marginal>, gaussian-measure:<kappa>[:<psi>] or @file.toml.
    #[arg(long, default_value = "iid:std-normal")]
    target: String,
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    #[arg(long, default_value_t = 0.25)]
    burn_in_frac: f64,
    /// Chains per cell; average K-S needs at least 2 (the study used 100).
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 20_130_101)]
    seed: u64,
    /// Update probability of the within-Gibbs variants.
    #[arg(long, default_value_t = 1.0)]
    gibbs_c: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the comparison table over dimensions, scales and kernels.
    Table1 {
        #[command(flatten)]
        common: ChainArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 100, 200])]
        dim: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2.4f64, 6.0])]
        scale: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [KernelArg::Rwm, KernelArg::Tmcmc])]
        kernel: Vec<KernelArg>,
    },
    /// Theoretical speed and acceptance curves.
    Curves {
        #[arg(long, default_value = "iid")]
        variant: String,
        #[arg(long, default_value_t = 1.0)]
        information: f64,
        #[arg(long = "gibbs-c", default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        xi: f64,
        #[arg(long, default_value_t = 0.01)]
        ell_min: f64,
        #[arg(long, default_value_t = 8.0)]
        ell_max: f64,
        #[arg(long, default_value_t = 800)]
        points: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [KernelArg::Tmcmc, KernelArg::Rwm])]
        kernel: Vec<KernelArg>,
    },
    /// Wall-clock comparison on the iid standard-normal target (single-threaded).
    Timing {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5, 10, 20, 50, 100])]
        dim: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        iters: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare sped-up chains with the limiting diffusion.
    Limit {
        #[arg(long, default_value = "std-normal")]
        marginal: String,
        #[arg(long, value_enum, default_value_t = KernelArg::Tmcmc)]
        kernel: KernelArg,
        /// Proposal scale (default: the optimal scale).
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [5usize, 20, 200])]
        dim: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        chains: usize,
        /// Diffusion paths; must equal --chains.
        #[arg(long)]
        sde_paths: Option<usize>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.05)]
        t_step: f64,
        #[arg(long, default_value_t = 0.5)]
        t_max: f64,
        #[arg(long, default_value_t = 7_001)]
        seed: u64,
        /// Compare each chain ensemble with itself.
        #[arg(long)]
        self_check: bool,
    },
    /// Run chains for one configuration and export the trace.
    Chain {
        #[command(flatten)]
        common: ChainArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        scale: f64,
        #[arg(long, value_enum, default_value_t = KernelArg::Tmcmc)]
        kernel: KernelArg,
        /// Record every coordinate instead of coordinate 1 only.
        #[arg(long)]
        all_coordinates: bool,
    },
}

fn experiment(
    common: &ChainArgs,
    dims: Vec<usize>,
    scales: Vec<f64>,
    kernels: Vec<KernelKind>,
    out: PathBuf,
) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        target: TargetSpec::parse(&common.target)?,
        kernels,
        dims,
        scales,
        gibbs_c: common.gibbs_c,
        n_iters: common.iters,
        n_chains: common.chains,
        burn_in_frac: common.burn_in_frac,
        n_lags: tmcmc_core::diagnostics::DEFAULT_LAGS,
        master_seed: common.seed,
        output_dir: out,
    })
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let out_path = cli.out.unwrap_or_else(default_output_dir);
    let out = OutputDir::create(&out_path)?;
    match cli.command {
        Command::Table1 {
            common,
            dim,
            scale,
            kernel,
        } => {
            let cfg = experiment(
                &common,
                dim,
                scale,
                kernel.into_iter().map(Into::into).collect(),
                out_path,
            )?;
            cfg.validate()?;
            let mut manifest = RunManifest::new("table1", &cfg)?;
            let report = reproduce_table1(&cfg, &out, &mut manifest)?;
            print!("{}", report.to_csv());
            let manifest = manifest.finish(&out)?;
            Ok(manifest.all_ok())
        }
        Command::Curves {
            variant,
            information,
            c,
            xi,
            ell_min,
            ell_max,
            points,
            kernel,
        } => {
            let v: Variant = variant.parse()?;
            let fam = ScalingFamily::new(v, information, c, xi)?;
            let kinds: Vec<KernelKind> = kernel.into_iter().map(Into::into).collect();
            let grid = linear_grid(ell_min, ell_max, points)?;
            let mut manifest = RunManifest::new("curves", &fam)?;
            let rows = speed_curves(&kinds, &fam, &grid)?;
            out.write(&mut manifest, "curves.csv", curves_csv(&rows).as_bytes())?;
            for r in rows.iter().filter(|r| r.marker != tmcmc_harness::curves::Marker::None) {
                println!(
                    "{} {:?}: ell = {:.4}, speed = {:.6}, acceptance = {:.4}",
                    r.kind, r.marker, r.ell, r.speed, r.acceptance
                );
            }
            manifest.finish(&out)?;
            Ok(true)
        }
        Command::Timing { dim, iters, reps, seed } => {
            let mut manifest = RunManifest::new(
                "timing",
                &serde_json::json!({ "dims": dim, "iters": iters, "reps": reps, "seed": seed }),
            )?;
            let rows = timing_benchmark(&dim, iters, reps, seed)?;
            for r in &rows {
                manifest.runs.push(RunRecord {
                    label: format!("d={} kernel={}", r.dim, r.kernel),
                    wall_clock_ns: r.rep_ns.iter().sum(),
                    ok: true,
                    error: None,
                });
            }
            let csv = timing_csv(&rows);
            out.write(&mut manifest, "timing.csv", csv.as_bytes())?;
            print!("{csv}");
            manifest.finish(&out)?;
            Ok(true)
        }
        Command::Limit {
            marginal,
            kernel,
            scale,
            dim,
            chains,
            sde_paths,
            dt,
            t_step,
            t_max,
            seed,
            self_check,
        } => {
            let cfg = LimitStudyConfig {
                marginal: marginal.parse()?,
                kernel: kernel.into(),
                ell: scale,
                dims: dim,
                n_chains: chains,
                n_sde_paths: sde_paths.unwrap_or(chains),
                t_grid: uniform_t_grid(t_step, t_max),
                dt,
                master_seed: seed,
                self_check,
            };
            cfg.validate()?;
            let mut manifest = RunManifest::new("limit", &cfg)?;
            let study = run_limit_study(&cfg, &out, &mut manifest)?;
            println!("ell = {:.4}, speed = {:.4}", study.ell, study.speed);
            for r in &study.results {
                println!(
                    "d = {:>4}: median K-S {:.4}, max K-S {:.4}",
                    r.dim, r.median_ks, r.max_ks
                );
            }
            manifest.finish(&out)?;
            Ok(true)
        }
        Command::Chain {
            common,
            dim,
            scale,
            kernel,
            all_coordinates,
        } => {
            let kind: KernelKind = kernel.into();
            let cfg = experiment(&common, vec![dim], vec![scale], vec![kind], out_path)?;
            cfg.validate()?;
            let model = cfg.target.build(dim)?;
            let kcfg = cfg.target.kernel(kind, scale, dim, cfg.gibbs_c)?;
            let mut manifest = RunManifest::new("chain", &cfg)?;
            let mut rng = rng_from_seed(derive_seed(cfg.master_seed, 0, 0));
            let init: Vec<f64> = (0..dim)
                .map(|_| rand::Rng::random_range(&mut rng, -INIT_HALF_WIDTH..INIT_HALF_WIDTH))
                .collect();
            let seeds: Vec<u64> = (0..cfg.n_chains)
                .map(|j| derive_seed(cfg.master_seed, 0, j as u64 + 1))
                .collect();
            for (j, &s) in seeds.iter().enumerate() {
                manifest.seeds.push(SeedRecord {
                    cell: 0,
                    chain: j as u64,
                    seed: s,
                });
            }
            let record = if all_coordinates {
                RecordPolicy::All
            } else {
                RecordPolicy::first_coordinate()
            };
            let traces = run_ensemble(&model, &kcfg, &vec![init; cfg.n_chains], &seeds, cfg.n_iters, &record)?;
            let mut report = DiagnosticsReport::for_chain(&traces[0], 0, cfg.burn_in_frac, cfg.n_lags)?;
            if traces.len() >= 2 && model.first_coordinate_cdf(0.0).is_some() {
                let cdf = |v: f64| model.first_coordinate_cdf(v).unwrap_or(f64::NAN);
                report.avg_ks = Some(average_ks(&traces, 0, &cdf, cfg.burn_in_frac)?);
            }
            for (j, t) in traces.iter().enumerate() {
                manifest.runs.push(RunRecord {
                    label: format!("chain {j}"),
                    wall_clock_ns: t.wall_clock_ns,
                    ok: true,
                    error: None,
                });
            }
            let mut csv = Vec::new();
            traces[0].write_csv(&mut csv).expect("writing to memory");
            out.write(&mut manifest, "chain.csv", &csv)?;
            let summary = serde_json::json!({
                "trace": TraceSummary::new(&kcfg, &traces[0]),
                "diagnostics": report,
            });
            out.write_json(&mut manifest, "chain.json", &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            manifest.finish(&out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some cells failed; see the manifest");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
