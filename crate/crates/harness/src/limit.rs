//! Sped-up chain coordinates against Euler–Langevin paths across dimensions.
//!
//! Every chain and diffusion path in one study starts coordinate 1 at a
//! single common draw `u0 ~ f`; the remaining chain coordinates are drawn
//! independently from `f`. Starting each member at its own stationary draw
//! swamps the dimension effect in sampling noise at 100 members.
//!
//! Seeds: `u0` from `derive_seed(master, 0, 0)`; in dimension slot `i`
//! chain `j` draws its start from `derive_seed(master, i + 1, 2j + 1)` and
//! runs on `derive_seed(master, i + 1, 2j + 2)`; diffusion paths use
//! `derive_seed(derive_seed(master, i + 1, 0), 0, j)`.

use serde::{Deserialize, Serialize};
use tmcmc_core::kernels::run_ensemble;
use tmcmc_core::scaling::{optimal_scale, speed, ScalingFamily};
use tmcmc_core::sde::{
    compare_ensembles, limit_check, sped_up_coordinate, LangevinSpec1D, LimitCheckConfig, LimitReport, TimeConvention,
    MIN_ENSEMBLE,
};
use tmcmc_core::targets::{information_constant, Marginal, TargetModel};
use tmcmc_core::{derive_seed, rng_from_seed, KernelConfig, KernelKind, RecordPolicy};

use crate::error::{config_err, Result};
use crate::manifest::{OutputDir, RunManifest, RunRecord, SeedRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStudyConfig {
    pub marginal: Marginal,
    pub kernel: KernelKind,
    /// `None` uses the optimal scale for the marginal.
    pub ell: Option<f64>,
    pub dims: Vec<usize>,
    pub n_chains: usize,
    pub n_sde_paths: usize,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub master_seed: u64,
    /// Compare each chain ensemble with itself instead of diffusion paths.
    pub self_check: bool,
}

impl LimitStudyConfig {
    pub fn defaults() -> Self {
        Self {
            marginal: Marginal::StdNormal,
            kernel: KernelKind::Tmcmc,
            ell: None,
            dims: vec![5, 20, 200],
            n_chains: 100,
            n_sde_paths: 100,
            t_grid: uniform_t_grid(0.05, 0.5),
            dt: 1e-3,
            master_seed: 7_001,
            self_check: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chains != self.n_sde_paths {
            return Err(config_err(format!(
                "ensemble sizes differ: {} chains vs {} diffusion paths",
                self.n_chains, self.n_sde_paths
            )));
        }
        if self.n_chains < MIN_ENSEMBLE {
            return Err(config_err(format!(
                "need at least {MIN_ENSEMBLE} chains, got {}",
                self.n_chains
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(config_err("dimensions must be positive"));
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(config_err("time grid must be non-empty and positive"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config_err(format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(ell) = self.ell {
            KernelConfig::new(self.kernel, ell, 1)?;
        }
        information_constant(&self.marginal)?;
        Ok(())
    }

    pub fn family(&self) -> Result<ScalingFamily> {
        Ok(ScalingFamily::iid(information_constant(&self.marginal)?)?)
    }

    pub fn scale(&self) -> Result<f64> {
        match self.ell {
            Some(l) => Ok(l),
            None => Ok(optimal_scale(self.kernel, &self.family()?).ell_opt),
        }
    }

    /// Limiting diffusion speed at the configured scale.
    pub fn speed(&self) -> Result<f64> {
        Ok(speed(self.kernel, &self.family()?, self.scale()?))
    }
}

/// `step, 2·step, …` up to and including `t_max`.
pub fn uniform_t_grid(step: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / step + 1e-9).floor() as usize;
    (1..=n).map(|i| (i as f64 * step * 1e9).round() / 1e9).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub dim: usize,
    pub median_ks: f64,
    pub max_ks: f64,
    pub report: LimitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitStudy {
    pub ell: f64,
    pub speed: f64,
    pub u0: f64,
    pub results: Vec<DimensionResult>,
}

impl LimitStudy {
    pub fn medians(&self) -> Vec<(usize, f64)> {
        self.results.iter().map(|r| (r.dim, r.median_ks)).collect()
    }
}

fn run_dimension(
    cfg: &LimitStudyConfig,
    slot: usize,
    d: usize,
    ell: f64,
    u0: f64,
    spec: &LangevinSpec1D,
) -> Result<LimitReport> {
    let model = TargetModel::iid(cfg.marginal, d)?;
    let kernel = KernelConfig::new(cfg.kernel, ell, d)?;
    let cell = slot as u64 + 1;
    let inits: Vec<Vec<f64>> = (0..cfg.n_chains as u64)
        .map(|j| {
            let mut rng = rng_from_seed(derive_seed(cfg.master_seed, cell, 2 * j + 1));
            let mut x: Vec<f64> = (0..d).map(|_| cfg.marginal.sample(&mut rng)).collect();
            x[0] = u0;
            x
        })
        .collect();
    let seeds: Vec<u64> = (0..cfg.n_chains as u64)
        .map(|j| derive_seed(cfg.master_seed, cell, 2 * j + 2))
        .collect();
    let t_max = cfg.t_grid.iter().copied().fold(0.0, f64::max);
    let n_iters = (d as f64 * t_max + 1e-9).floor() as usize + 1;
    let chains = run_ensemble(
        &model,
        &kernel,
        &inits,
        &seeds,
        n_iters,
        &RecordPolicy::first_coordinate(),
    )?;
    if cfg.self_check {
        let paths: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| sped_up_coordinate(c, d, &cfg.t_grid, TimeConvention::Step))
            .collect::<tmcmc_core::Result<_>>()?;
        return Ok(compare_ensembles(&paths, &paths, &cfg.t_grid)?);
    }
    let check = LimitCheckConfig {
        d,
        dt: cfg.dt,
        seed: derive_seed(cfg.master_seed, cell, 0),
        convention: TimeConvention::Step,
    };
    Ok(limit_check(&chains, spec, &cfg.t_grid, &check)?)
}

/// Validates the whole configuration before running anything, then writes
/// `limit_d<d>.csv` per dimension and `limit_summary.json`.
pub fn run_limit_study(cfg: &LimitStudyConfig, out: &OutputDir, manifest: &mut RunManifest) -> Result<LimitStudy> {
    cfg.validate()?;
    let ell = cfg.scale()?;
    let g = cfg.speed()?;
    let spec = LangevinSpec1D::for_marginal(cfg.marginal, g)?;
    let u0 = cfg
        .marginal
        .sample(&mut rng_from_seed(derive_seed(cfg.master_seed, 0, 0)));
    manifest.seeds.push(SeedRecord {
        cell: 0,
        chain: 0,
        seed: derive_seed(cfg.master_seed, 0, 0),
    });
    let mut results = Vec::new();
    for (slot, &d) in cfg.dims.iter().enumerate() {
        let start = std::time::Instant::now();
        let report = run_dimension(cfg, slot, d, ell, u0, &spec)?;
        manifest.runs.push(RunRecord {
            label: format!("d={d}"),
            wall_clock_ns: start.elapsed().as_nanos() as u64,
            ok: true,
            error: None,
        });
        for j in 0..cfg.n_chains as u64 {
            manifest.seeds.push(SeedRecord {
                cell: slot as u64 + 1,
                chain: j,
                seed: derive_seed(cfg.master_seed, slot as u64 + 1, 2 * j + 2),
            });
        }
        let mut csv = Vec::new();
        report.write_csv(&mut csv).expect("writing to memory");
        out.write(manifest, &format!("limit_d{d}.csv"), &csv)?;
        results.push(DimensionResult {
            dim: d,
            median_ks: report.median_ks(),
            max_ks: report.max_ks(),
            report,
        });
    }
    let study = LimitStudy {
        ell,
        speed: g,
        u0,
        results,
    };
    out.write_json(manifest, "limit_summary.json", &study)?;
    Ok(study)
}
