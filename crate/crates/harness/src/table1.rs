//! Reproduction of the acceptance/IACT/IPACT/AJS/K-S comparison table.
//!
//! Cells are enumerated dimension-major, then scale, then kernel. In cell
//! `i` the shared starting point is drawn from `derive_seed(master, i, 0)`
//! and chain `j` runs on `derive_seed(master, i, j + 1)`.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use tmcmc_core::diagnostics::{average_ks, DiagnosticsReport};
use tmcmc_core::kernels::run_ensemble;
use tmcmc_core::{derive_seed, rng_from_seed, KernelKind, RecordPolicy};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::manifest::{OutputDir, RunManifest, RunRecord, SeedRecord};
use crate::reference;

/// Half-width of the uniform box the starting coordinates are drawn from.
pub const INIT_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub cell: usize,
    pub dimension: usize,
    pub scaling: f64,
    pub kernel: KernelKind,
    /// Single-chain measures come from chain 0.
    pub diagnostics: Option<DiagnosticsReport>,
    pub error: Option<String>,
    pub wall_clock_ns: u64,
}

impl Table1Row {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    pub fn find(&self, dim: usize, scale: f64, kernel: KernelKind) -> Option<&Table1Row> {
        self.rows
            .iter()
            .find(|r| r.dimension == dim && (r.scaling - scale).abs() < 1e-12 && r.kernel == kernel)
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(Table1Row::ok)
    }

    /// `dimension,scaling,kernel,acc,iact,ipact,ajs,avg_ks,status`; measures
    /// of failed cells are left empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dimension,scaling,kernel,acc,iact,ipact,ajs,avg_ks,status\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{},", r.dimension, r.scaling, r.kernel);
            match &r.diagnostics {
                Some(d) => {
                    let ks = d.avg_ks.map(|v| v.to_string()).unwrap_or_default();
                    let _ = writeln!(s, "{},{},{},{},{},ok", d.acceptance_rate, d.iact, d.ipact, d.ajs, ks);
                }
                None => {
                    let msg = r.error.as_deref().unwrap_or("failed").replace([',', '\n'], ";");
                    let _ = writeln!(s, ",,,,,error: {msg}");
                }
            }
        }
        s
    }

    /// Side-by-side comparison with the published values, where present.
    pub fn comparison_csv(&self) -> String {
        let mut s = String::from(
            "dimension,scaling,kernel,acc,acc_ref,iact,iact_ref,ipact,ipact_ref,ajs,ajs_ref,avg_ks,avg_ks_ref\n",
        );
        for r in &self.rows {
            let (Some(d), Some(refrow)) = (&r.diagnostics, reference::lookup(r.dimension, r.scaling)) else {
                continue;
            };
            let k = r.kernel;
            let ks = d.avg_ks.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.dimension,
                r.scaling,
                k,
                d.acceptance_rate,
                reference::pick(refrow.acceptance, k),
                d.iact,
                reference::pick(refrow.iact, k),
                d.ipact,
                reference::pick(refrow.ipact, k),
                d.ajs,
                reference::pick(refrow.ajs, k),
                ks,
                reference::pick(refrow.avg_ks, k),
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    index: usize,
    dim: usize,
    scale: f64,
    kernel: KernelKind,
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &dim in &cfg.dims {
        for &scale in &cfg.scales {
            for &kernel in &cfg.kernels {
                out.push(Cell {
                    index: out.len(),
                    dim,
                    scale,
                    kernel,
                });
            }
        }
    }
    out
}

pub fn chain_seed(master: u64, cell: usize, chain: usize) -> u64 {
    derive_seed(master, cell as u64, chain as u64 + 1)
}

pub fn init_seed(master: u64, cell: usize) -> u64 {
    derive_seed(master, cell as u64, 0)
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<DiagnosticsReport> {
    let model = cfg.target.build(cell.dim)?;
    let kernel = cfg.target.kernel(cell.kernel, cell.scale, cell.dim, cfg.gibbs_c)?;
    let mut rng = rng_from_seed(init_seed(cfg.master_seed, cell.index));
    let init: Vec<f64> = (0..cell.dim)
        .map(|_| rng.random_range(-INIT_HALF_WIDTH..INIT_HALF_WIDTH))
        .collect();
    let inits = vec![init; cfg.n_chains];
    let seeds: Vec<u64> = (0..cfg.n_chains)
        .map(|j| chain_seed(cfg.master_seed, cell.index, j))
        .collect();
    let traces = run_ensemble(
        &model,
        &kernel,
        &inits,
        &seeds,
        cfg.n_iters,
        &RecordPolicy::first_coordinate(),
    )?;
    let mut report = DiagnosticsReport::for_chain(&traces[0], 0, cfg.burn_in_frac, cfg.n_lags)?;
    if traces.len() >= 2 && model.first_coordinate_cdf(0.0).is_some() {
        let cdf = |v: f64| model.first_coordinate_cdf(v).unwrap_or(f64::NAN);
        report.avg_ks = Some(average_ks(&traces, 0, &cdf, cfg.burn_in_frac)?);
    }
    Ok(report)
}

/// Runs every cell; a failing cell is recorded and the rest continue.
/// Writes `table1.csv`, `table1_vs_reference.csv` and `table1.json`.
pub fn reproduce_table1(cfg: &ExperimentConfig, out: &OutputDir, manifest: &mut RunManifest) -> Result<Table1Report> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for cell in cells(cfg) {
        for j in 0..cfg.n_chains {
            manifest.seeds.push(SeedRecord {
                cell: cell.index as u64,
                chain: j as u64,
                seed: chain_seed(cfg.master_seed, cell.index, j),
            });
        }
        let start = Instant::now();
        let result = run_cell(cfg, &cell);
        let wall_clock_ns = start.elapsed().as_nanos() as u64;
        let label = format!("d={} scale={} kernel={}", cell.dim, cell.scale, cell.kernel);
        let (diagnostics, error) = match result {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e.to_string())),
        };
        manifest.runs.push(RunRecord {
            label,
            wall_clock_ns,
            ok: error.is_none(),
            error: error.clone(),
        });
        rows.push(Table1Row {
            cell: cell.index,
            dimension: cell.dim,
            scaling: cell.scale,
            kernel: cell.kernel,
            diagnostics,
            error,
            wall_clock_ns,
        });
        // Flush after each cell so partial results survive a later failure.
        let partial = Table1Report { rows: rows.clone() };
        out.write(manifest, "table1.csv", partial.to_csv().as_bytes())?;
    }
    let report = Table1Report { rows };
    out.write(manifest, "table1_vs_reference.csv", report.comparison_csv().as_bytes())?;
    out.write_json(manifest, "table1.json", &report)?;
    Ok(report)
}
