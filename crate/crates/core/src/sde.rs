//! Euler–Maruyama simulation of the limiting Langevin diffusions and
//! comparison of sped-up chain coordinates against them.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::ks_two_sample;
use crate::error::{invalid, Error, Result};
use crate::kernels::ChainTrace;
use crate::seeding::{derive_seed, rng_from_seed, SimRng};
use crate::targets::{Marginal, Psi};

/// Smallest ensemble accepted by [`limit_check`].
pub const MIN_ENSEMBLE: usize = 100;
/// Number of grid lags reported in a [`LimitReport`].
pub const ACF_LAGS: usize = 5;
// Guards floor(d·t) against representation error, e.g. 100 · 0.29.
const INDEX_SLACK: f64 = 1e-9;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarSampler = Arc<dyn Fn(&mut SimRng) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type VectorSampler = Arc<dyn Fn(&mut SimRng) -> Vec<f64> + Send + Sync>;

/// `dU = √g dB + ½ g (log f)'(U) dt`.
#[derive(Clone)]
pub struct LangevinSpec1D {
    speed: f64,
    dlog_f: ScalarFn,
    u0_sampler: ScalarSampler,
}

impl fmt::Debug for LangevinSpec1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LangevinSpec1D")
            .field("speed", &self.speed)
            .finish_non_exhaustive()
    }
}

fn check_speed(speed: f64) -> Result<()> {
    // Zero is allowed and yields a constant path.
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(invalid(
            "speed",
            format!("must be non-negative and finite, got {speed}"),
        ));
    }
    Ok(())
}

impl LangevinSpec1D {
    pub fn new(speed: f64, dlog_f: ScalarFn, u0_sampler: ScalarSampler) -> Result<Self> {
        check_speed(speed)?;
        Ok(Self {
            speed,
            dlog_f,
            u0_sampler,
        })
    }

    /// Diffusion targeting `marginal`, started from an exact draw of it.
    /// Points where the score is undefined produce a non-finite drift.
    pub fn for_marginal(marginal: Marginal, speed: f64) -> Result<Self> {
        let m = marginal;
        let dlog: ScalarFn = Arc::new(move |u| m.dlog_f(u).unwrap_or(f64::NAN));
        let sampler: ScalarSampler = Arc::new(move |rng| marginal.sample(rng));
        Self::new(speed, dlog, sampler)
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn dlog_f(&self, u: f64) -> f64 {
        (self.dlog_f)(u)
    }

    pub fn sample_start(&self, rng: &mut SimRng) -> f64 {
        (self.u0_sampler)(rng)
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Euler path of length `n_steps + 1` starting from a draw of the
/// stationary law; the start consumes the stream before the increments.
pub fn euler_langevin_1d(spec: &LangevinSpec1D, dt: f64, n_steps: usize, seed: u64) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let mut rng = rng_from_seed(seed);
    let u0 = spec.sample_start(&mut rng);
    euler_langevin_1d_path(spec, u0, dt, n_steps, &mut rng)
}

/// Euler path from a given start.
pub fn euler_langevin_1d_path(
    spec: &LangevinSpec1D,
    u0: f64,
    dt: f64,
    n_steps: usize,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    check_dt(dt)?;
    let g = spec.speed;
    let half_drift = 0.5 * g * dt;
    let noise = (g * dt).sqrt();
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut u = u0;
    path.push(u);
    for step in 0..n_steps {
        let z: f64 = rng.sample(StandardNormal);
        if g > 0.0 {
            let drift = spec.dlog_f(u);
            if !drift.is_finite() {
                return Err(Error::NonFiniteDrift { step, value: u });
            }
            u += half_drift * drift + noise * z;
        }
        path.push(u);
    }
    Ok(path)
}

/// `dz = −g (z + diag(λ²) ∇Ψ(z)) dt + √(2g) diag(λ) dW`.
#[derive(Clone)]
pub struct LangevinSpecHilbert {
    speed: f64,
    lambdas: Vec<f64>,
    grad_psi: VectorFn,
    z0_sampler: VectorSampler,
}

impl fmt::Debug for LangevinSpecHilbert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LangevinSpecHilbert")
            .field("speed", &self.speed)
            .field("lambdas", &self.lambdas)
            .finish_non_exhaustive()
    }
}

impl LangevinSpecHilbert {
    pub fn new(speed: f64, lambdas: Vec<f64>, grad_psi: VectorFn, z0_sampler: VectorSampler) -> Result<Self> {
        check_speed(speed)?;
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid("lambdas", "must be a non-empty list of positive reals"));
        }
        Ok(Self {
            speed,
            lambdas,
            grad_psi,
            z0_sampler,
        })
    }

    /// Diffusion for the Gaussian-measure target with perturbation `psi`,
    /// started from the Gaussian reference measure `N(0, diag(λ²))`.
    pub fn for_gaussian_measure(lambdas: Vec<f64>, psi: Psi, speed: f64) -> Result<Self> {
        let ls = lambdas.clone();
        let grad: VectorFn = Arc::new(move |z| psi.gradient(z));
        let sampler: VectorSampler =
            Arc::new(move |rng| ls.iter().map(|l| l * rng.sample::<f64, _>(StandardNormal)).collect());
        Self::new(speed, lambdas, grad, sampler)
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn sample_start(&self, rng: &mut SimRng) -> Vec<f64> {
        (self.z0_sampler)(rng)
    }
}

/// Euler path of `n_steps + 1` states from a draw of the start law.
pub fn euler_langevin_hilbert(spec: &LangevinSpecHilbert, dt: f64, n_steps: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_dt(dt)?;
    let mut rng = rng_from_seed(seed);
    let mut z = spec.sample_start(&mut rng);
    if z.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: z.len(),
        });
    }
    let g = spec.speed;
    let noise = (2.0 * g * dt).sqrt();
    let mut path = Vec::with_capacity(n_steps + 1);
    path.push(z.clone());
    for step in 0..n_steps {
        let grad = (spec.grad_psi)(&z);
        for (j, zj) in z.iter_mut().enumerate() {
            let l = spec.lambdas[j];
            let w: f64 = rng.sample(StandardNormal);
            let drift = *zj + l * l * grad[j];
            if !drift.is_finite() {
                return Err(Error::NonFiniteDrift { step, value: *zj });
            }
            *zj += -g * drift * dt + noise * l * w;
        }
        path.push(z.clone());
    }
    Ok(path)
}

/// How chain time `t` maps onto iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeConvention {
    /// `x_{⌊dt⌋}`.
    Step,
    /// `(dt − k) x_{k+1} + (k + 1 − dt) x_k` with `k = ⌊dt⌋`.
    Interpolated,
}

/// Coordinate 1 of the chain on the sped-up clock; `x_0` is the start.
/// Requires `⌊d · max t⌋ + 1 ≤ n_iters`.
pub fn sped_up_coordinate(
    trace: &ChainTrace,
    d: usize,
    t_grid: &[f64],
    convention: TimeConvention,
) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(invalid("t_grid", format!("times must be non-negative, got {t}")));
    }
    let df = d as f64;
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let needed = (df * t_max + INDEX_SLACK).floor() as usize + 1;
    if needed > trace.n_iters {
        return Err(Error::TraceTooShort {
            needed,
            available: trace.n_iters,
        });
    }
    t_grid
        .iter()
        .map(|&t| {
            let s = df * t;
            let k = (s + INDEX_SLACK).floor() as usize;
            let xk = trace.value_after(k, 0)?;
            match convention {
                TimeConvention::Step => Ok(xk),
                TimeConvention::Interpolated => {
                    let w = (s - k as f64).max(0.0);
                    if w == 0.0 {
                        return Ok(xk);
                    }
                    let xk1 = trace.value_after(k + 1, 0)?;
                    Ok(w * xk1 + (1.0 - w) * xk)
                }
            }
        })
        .collect()
}

/// Per-time comparison of two ensembles of paths observed on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub t_grid: Vec<f64>,
    /// Two-sample K-S statistic at each grid time.
    pub ks: Vec<f64>,
    /// Row `i`, column `L − 1`: difference of across-ensemble correlations
    /// between grid times `i` and `i + L`; NaN past the end of the grid.
    pub acf_delta: Vec<[f64; ACF_LAGS]>,
    pub ensemble_size: usize,
}

impl LimitReport {
    pub fn median_ks(&self) -> f64 {
        median(&self.ks)
    }

    pub fn max_ks(&self) -> f64 {
        self.ks.iter().copied().fold(0.0, f64::max)
    }

    /// Mean absolute correlation difference at each lag over valid rows.
    pub fn mean_abs_acf_delta(&self) -> [f64; ACF_LAGS] {
        let mut out = [0.0; ACF_LAGS];
        for (lag, slot) in out.iter_mut().enumerate() {
            let vals: Vec<f64> = self
                .acf_delta
                .iter()
                .map(|row| row[lag])
                .filter(|v| v.is_finite())
                .collect();
            *slot = if vals.is_empty() {
                f64::NAN
            } else {
                vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64
            };
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t,ks_stat")?;
        for lag in 1..=ACF_LAGS {
            write!(w, ",acf_delta_lag{lag}")?;
        }
        writeln!(w)?;
        for (i, t) in self.t_grid.iter().enumerate() {
            write!(w, "{t},{}", self.ks[i])?;
            for v in &self.acf_delta[i] {
                if v.is_finite() {
                    write!(w, ",{v}")?;
                } else {
                    write!(w, ",")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn check_grid_ensemble(paths: &[Vec<f64>], len: usize, label: &str) -> Result<()> {
    if let Some(p) = paths.iter().find(|p| p.len() != len) {
        return Err(Error::EnsembleMismatch(format!(
            "{label} path has {} points, expected {len}",
            p.len()
        )));
    }
    Ok(())
}

fn across_correlation(paths: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let n = paths.len() as f64;
    let (mut si, mut sj) = (0.0, 0.0);
    for p in paths {
        si += p[i];
        sj += p[j];
    }
    let (mi, mj) = (si / n, sj / n);
    let (mut cij, mut cii, mut cjj) = (0.0, 0.0, 0.0);
    for p in paths {
        let (a, b) = (p[i] - mi, p[j] - mj);
        cij += a * b;
        cii += a * a;
        cjj += b * b;
    }
    if cii == 0.0 || cjj == 0.0 {
        return f64::NAN;
    }
    cij / (cii * cjj).sqrt()
}

/// Compares two ensembles of paths sampled on `t_grid`.
pub fn compare_ensembles(a: &[Vec<f64>], b: &[Vec<f64>], t_grid: &[f64]) -> Result<LimitReport> {
    if a.len() != b.len() {
        return Err(Error::EnsembleMismatch(format!(
            "ensemble sizes differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::EnsembleMismatch("ensembles need at least 2 members".into()));
    }
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "must not be empty"));
    }
    let m = t_grid.len();
    check_grid_ensemble(a, m, "first")?;
    check_grid_ensemble(b, m, "second")?;

    let mut ks = Vec::with_capacity(m);
    let mut acf_delta = Vec::with_capacity(m);
    for i in 0..m {
        let xa: Vec<f64> = a.iter().map(|p| p[i]).collect();
        let xb: Vec<f64> = b.iter().map(|p| p[i]).collect();
        ks.push(ks_two_sample(&xa, &xb)?);
        let mut row = [f64::NAN; ACF_LAGS];
        for (lag, slot) in row.iter_mut().enumerate() {
            let j = i + lag + 1;
            if j < m {
                *slot = across_correlation(a, i, j) - across_correlation(b, i, j);
            }
        }
        acf_delta.push(row);
    }
    Ok(LimitReport {
        t_grid: t_grid.to_vec(),
        ks,
        acf_delta,
        ensemble_size: a.len(),
    })
}

/// Settings for [`limit_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCheckConfig {
    pub d: usize,
    pub dt: f64,
    pub seed: u64,
    pub convention: TimeConvention,
}

impl LimitCheckConfig {
    pub fn new(d: usize, seed: u64) -> Self {
        Self {
            d,
            dt: 1e-3,
            seed,
            convention: TimeConvention::Step,
        }
    }
}

/// Compares sped-up coordinate 1 of each chain with a Langevin path.
/// SDE path `j` starts at chain `j`'s initial coordinate 1 and uses the
/// stream `derive_seed(seed, 0, j)`.
pub fn limit_check(
    chains: &[ChainTrace],
    spec: &LangevinSpec1D,
    t_grid: &[f64],
    cfg: &LimitCheckConfig,
) -> Result<LimitReport> {
    if chains.len() < MIN_ENSEMBLE {
        return Err(Error::EnsembleMismatch(format!(
            "need at least {MIN_ENSEMBLE} chains, got {}",
            chains.len()
        )));
    }
    check_dt(cfg.dt)?;
    let n0 = chains[0].n_iters;
    if chains.iter().any(|c| c.n_iters != n0) {
        return Err(Error::EnsembleMismatch("chains have different lengths".into()));
    }
    let chain_paths: Vec<Vec<f64>> = chains
        .par_iter()
        .map(|c| sped_up_coordinate(c, cfg.d, t_grid, cfg.convention))
        .collect::<Result<_>>()?;

    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let n_steps = (t_max / cfg.dt).ceil() as usize;
    let idx: Vec<usize> = t_grid
        .iter()
        .map(|t| ((t / cfg.dt).round() as usize).min(n_steps))
        .collect();
    let sde_paths: Vec<Vec<f64>> = chains
        .par_iter()
        .enumerate()
        .map(|(j, c)| {
            let u0 = c.value_after(0, 0)?;
            let mut rng = rng_from_seed(derive_seed(cfg.seed, 0, j as u64));
            let path = euler_langevin_1d_path(spec, u0, cfg.dt, n_steps, &mut rng)?;
            Ok(idx.iter().map(|&k| path[k]).collect())
        })
        .collect::<Result<_>>()?;

    compare_ensembles(&chain_paths, &sde_paths, t_grid)
}
