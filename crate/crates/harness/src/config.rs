//! Target specifications and experiment settings.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tmcmc_core::targets::{power_law_lambdas, Marginal, Psi, TargetModel, ThetaSchedule};
use tmcmc_core::{KernelConfig, KernelKind};

use crate::error::{config_err, HarnessError, Result};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "TMCMC_OUT";
pub const DEFAULT_OUT_DIR: &str = "tmcmc-out";

/// A target family with its parameters; the dimension is supplied later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TargetSpec {
    Iid {
        marginal: Marginal,
    },
    /// Replicated classes share the `d − k` free coordinates in
    /// proportion to `weights`, each class keeping at least one.
    Scaled {
        marginal: Marginal,
        #[serde(default)]
        lambda_exps: Vec<f64>,
        gammas: Vec<f64>,
        ks: Vec<f64>,
        weights: Vec<f64>,
        #[serde(default = "one")]
        alpha: f64,
    },
    /// `λ_j = j^{−κ}`.
    GaussianMeasure {
        kappa: f64,
        #[serde(default = "zero_psi")]
        psi: Psi,
    },
}

fn one() -> f64 {
    1.0
}

fn zero_psi() -> Psi {
    Psi::Zero
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec::Iid {
            marginal: Marginal::StdNormal,
        }
    }
}

/// Splits `total` into counts proportional to `weights`, each at least 1,
/// summing exactly to `total` (largest remainders first, ties by index).
pub fn apportion(weights: &[f64], total: usize) -> Vec<usize> {
    let m = weights.len();
    if m == 0 || total < m {
        return vec![0; m];
    }
    let free = (total - m) as f64;
    let wsum: f64 = weights.iter().sum();
    let shares: Vec<f64> = weights.iter().map(|w| free * w / wsum).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| 1 + s.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (shares[a] - shares[a].floor(), shares[b] - shares[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

impl TargetSpec {
    /// Parses `iid:<marginal>`, `gaussian-measure:<κ>[:<psi>]`, or
    /// `@<file.toml>` holding a `[target]` table or a bare spec.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix('@') {
            return Self::from_file(Path::new(path));
        }
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head.trim() {
            "iid" => {
                let marginal = if rest.is_empty() {
                    Marginal::StdNormal
                } else {
                    rest.parse()?
                };
                Ok(TargetSpec::Iid { marginal })
            }
            "gaussian-measure" => {
                let (k, psi) = rest.split_once(':').unwrap_or((rest, "zero"));
                let kappa: f64 = k
                    .trim()
                    .parse()
                    .map_err(|_| config_err(format!("gaussian-measure needs a numeric kappa, got `{k}`")))?;
                let spec = TargetSpec::GaussianMeasure {
                    kappa,
                    psi: psi.parse()?,
                };
                spec.build(1)?;
                Ok(spec)
            }
            other => Err(config_err(format!(
                "unknown target `{other}`; expected iid:<marginal>, gaussian-measure:<kappa>[:<psi>] or @file.toml"
            ))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wrapped {
            target: TargetSpec,
        }
        match toml::from_str::<Wrapped>(text) {
            Ok(w) => Ok(w.target),
            Err(_) => Ok(toml::from_str::<TargetSpec>(text)?),
        }
    }

    pub fn build(&self, d: usize) -> Result<TargetModel> {
        Ok(match self {
            TargetSpec::Iid { marginal } => TargetModel::iid(*marginal, d)?,
            TargetSpec::Scaled {
                marginal,
                lambda_exps,
                gammas,
                ks,
                weights,
                alpha,
            } => {
                if weights.len() != gammas.len() || weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
                    return Err(config_err("scaled target needs one positive weight per gamma"));
                }
                let k = lambda_exps.len();
                let w = weights.clone();
                let schedule = ThetaSchedule::new(
                    lambda_exps.clone(),
                    gammas.clone(),
                    ks.clone(),
                    Arc::new(move |i, d| apportion(&w, d.saturating_sub(k))[i]),
                    *alpha,
                )?;
                TargetModel::scaled(*marginal, schedule, d)?
            }
            TargetSpec::GaussianMeasure { kappa, psi } => {
                if !(kappa.is_finite() && *kappa >= 0.0) {
                    return Err(config_err(format!("kappa must be non-negative, got {kappa}")));
                }
                TargetModel::gaussian_measure(power_law_lambdas(d, *kappa), *psi)?
            }
        })
    }

    pub fn is_gaussian_measure(&self) -> bool {
        matches!(self, TargetSpec::GaussianMeasure { .. })
    }

    /// Kernel settings for this target: Gaussian-measure targets use the
    /// preconditioned proposal.
    pub fn kernel(&self, kind: KernelKind, ell: f64, d: usize, gibbs_c: f64) -> Result<KernelConfig> {
        let mut cfg = KernelConfig::new(kind, ell, d)?.with_gibbs(gibbs_c)?;
        if let TargetSpec::GaussianMeasure { kappa, .. } = self {
            cfg = cfg.with_preconditioner(power_law_lambdas(d, *kappa))?;
        }
        Ok(cfg)
    }

    pub fn label(&self) -> String {
        match self {
            TargetSpec::Iid { marginal } => format!("iid:{marginal}"),
            TargetSpec::Scaled { marginal, .. } => format!("scaled:{marginal}"),
            TargetSpec::GaussianMeasure { kappa, psi } => format!("gaussian-measure:{kappa}:{psi}"),
        }
    }
}

/// Settings shared by the chain-running commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub kernels: Vec<KernelKind>,
    pub dims: Vec<usize>,
    pub scales: Vec<f64>,
    pub gibbs_c: f64,
    pub n_iters: usize,
    pub n_chains: usize,
    pub burn_in_frac: f64,
    pub n_lags: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Full grid of the published study: five dimensions, two scales,
    /// both kernels, 10⁵ iterations, one chain per cell.
    pub fn table1_defaults() -> Self {
        Self {
            target: TargetSpec::default(),
            kernels: vec![KernelKind::Rwm, KernelKind::Tmcmc],
            dims: vec![2, 5, 10, 100, 200],
            scales: vec![2.4, 6.0],
            gibbs_c: 1.0,
            n_iters: 100_000,
            n_chains: 1,
            burn_in_frac: tmcmc_core::diagnostics::DEFAULT_BURN_IN,
            n_lags: tmcmc_core::diagnostics::DEFAULT_LAGS,
            master_seed: 20_130_101,
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernels.is_empty() || self.dims.is_empty() || self.scales.is_empty() {
            return Err(config_err("kernel, dimension and scale lists must be non-empty"));
        }
        for &d in &self.dims {
            self.target.build(d)?;
            for &kind in &self.kernels {
                for &ell in &self.scales {
                    self.target.kernel(kind, ell, d, self.gibbs_c)?;
                }
            }
        }
        if self.n_iters == 0 || self.n_chains == 0 {
            return Err(config_err("iterations and chains must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.burn_in_frac) {
            return Err(config_err(format!(
                "burn-in fraction {} outside [0, 1)",
                self.burn_in_frac
            )));
        }
        let kept = self.n_iters - (self.burn_in_frac * self.n_iters as f64).floor() as usize;
        if kept <= self.n_lags {
            return Err(config_err(format!(
                "{kept} post-burn-in iterations cannot support {} autocorrelation lags",
                self.n_lags
            )));
        }
        Ok(())
    }
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}
