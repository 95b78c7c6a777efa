//! Wall-clock comparison of the two kernels on the iid standard-normal target.
//!
//! Measurements run on the calling thread, one after another, alternating
//! kernels within each replication.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tmcmc_core::targets::{Marginal, TargetModel};
use tmcmc_core::{derive_seed, rng_from_seed, run_chain, KernelConfig, KernelKind, RecordPolicy};

use crate::error::{config_err, Result};

pub const TIMING_SCALE: f64 = 2.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub dim: usize,
    pub kernel: KernelKind,
    pub n_iters: usize,
    pub rep_ns: Vec<u64>,
}

impl TimingRow {
    pub fn mean_ns(&self) -> f64 {
        self.rep_ns.iter().map(|&t| t as f64).sum::<f64>() / self.rep_ns.len() as f64
    }

    pub fn per_iter_ns(&self) -> f64 {
        self.mean_ns() / self.n_iters as f64
    }
}

pub fn timing_benchmark(dims: &[usize], n_iters: usize, n_reps: usize, seed: u64) -> Result<Vec<TimingRow>> {
    if dims.is_empty() || n_iters == 0 || n_reps == 0 {
        return Err(config_err("timing needs dimensions, iterations and replications"));
    }
    let kinds = [KernelKind::Tmcmc, KernelKind::Rwm];
    let mut rows = Vec::new();
    for (di, &d) in dims.iter().enumerate() {
        let model = TargetModel::iid(Marginal::StdNormal, d)?;
        let mut rng = rng_from_seed(derive_seed(seed, di as u64, 0));
        let init = model.sample_exact(&mut rng).expect("iid targets have exact samplers");
        let mut pair: Vec<TimingRow> = kinds
            .iter()
            .map(|&kernel| TimingRow {
                dim: d,
                kernel,
                n_iters,
                rep_ns: Vec::with_capacity(n_reps),
            })
            .collect();
        for rep in 0..n_reps {
            for (ki, &kind) in kinds.iter().enumerate() {
                let cfg = KernelConfig::new(kind, TIMING_SCALE, d)?;
                let s = derive_seed(seed, di as u64, (rep * kinds.len() + ki + 1) as u64);
                let t = run_chain(&model, &cfg, &init, n_iters, s, &RecordPolicy::Nothing)?;
                pair[ki].rep_ns.push(t.wall_clock_ns);
            }
        }
        rows.extend(pair);
    }
    Ok(rows)
}

/// `dim,kernel,n_iters,mean_ns,per_iter_ns,rep_ns` with replications joined by `;`.
pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut s = String::from("dim,kernel,n_iters,mean_ns,per_iter_ns,rep_ns\n");
    for r in rows {
        let reps: Vec<String> = r.rep_ns.iter().map(u64::to_string).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.dim,
            r.kernel,
            r.n_iters,
            r.mean_ns(),
            r.per_iter_ns(),
            reps.join(";")
        );
    }
    s
}

/// Least-squares slope and `R²` of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}
