//! Additive TMCMC and random-walk Metropolis kernels, their within-Gibbs
//! variants and the preconditioned proposal for Gaussian-measure targets.
//!
//! Per step the random stream is consumed in a fixed order:
//!
//! 1. TMCMC only: one standard normal for `ε`;
//! 2. TMCMC: `⌈d/64⌉` words, bit `i mod 64` of word `⌊i/64⌋` is the sign of
//!    coordinate `i` (set = `+`); RWM: `d` standard normals;
//! 3. if `gibbs_c < 1`: `d` uniforms, `χ_i = [u_i < c]`;
//! 4. one uniform for the accept/reject decision.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seeding::{rng_from_seed, SimRng};
use crate::targets::TargetModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Tmcmc,
    Rwm,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Tmcmc => "tmcmc",
            KernelKind::Rwm => "rwm",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tmcmc" => Ok(KernelKind::Tmcmc),
            "rwm" => Ok(KernelKind::Rwm),
            other => Err(invalid("kernel", format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel parameters.
///
/// Without a preconditioner the proposal scale is `ℓ / d^{α/2}`. With a
/// preconditioner `λ` coordinate `i` moves by `sqrt(2ℓ²/d) · λ_i` times the
/// unit draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub ell: f64,
    pub d: usize,
    pub gibbs_c: f64,
    pub preconditioner: Option<Vec<f64>>,
    pub variance_exponent: f64,
}

impl KernelConfig {
    pub fn new(kind: KernelKind, ell: f64, d: usize) -> Result<Self> {
        let cfg = Self {
            kind,
            ell,
            d,
            gibbs_c: 1.0,
            preconditioner: None,
            variance_exponent: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tmcmc(ell: f64, d: usize) -> Result<Self> {
        Self::new(KernelKind::Tmcmc, ell, d)
    }

    pub fn rwm(ell: f64, d: usize) -> Result<Self> {
        Self::new(KernelKind::Rwm, ell, d)
    }

    pub fn with_gibbs(mut self, c: f64) -> Result<Self> {
        self.gibbs_c = c;
        self.validate()?;
        Ok(self)
    }

    pub fn with_preconditioner(mut self, lambdas: Vec<f64>) -> Result<Self> {
        self.preconditioner = Some(lambdas);
        self.validate()?;
        Ok(self)
    }

    pub fn with_variance_exponent(mut self, alpha: f64) -> Result<Self> {
        self.variance_exponent = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return Err(invalid("ell", format!("must be positive, got {}", self.ell)));
        }
        if self.d == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        if !(self.gibbs_c > 0.0 && self.gibbs_c <= 1.0) {
            return Err(invalid("gibbs_c", format!("must lie in (0, 1], got {}", self.gibbs_c)));
        }
        if !self.variance_exponent.is_finite() {
            return Err(invalid("variance_exponent", "must be finite"));
        }
        if let Some(p) = &self.preconditioner {
            if p.len() != self.d {
                return Err(invalid(
                    "preconditioner",
                    format!("length {} does not match d = {}", p.len(), self.d),
                ));
            }
            if p.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return Err(invalid("preconditioner", "entries must be positive"));
            }
        }
        Ok(())
    }

    /// Standard deviation of the unpreconditioned per-coordinate move.
    pub fn proposal_scale(&self) -> f64 {
        self.ell / (self.d as f64).powf(0.5 * self.variance_exponent)
    }

    fn preconditioned_step(&self) -> f64 {
        (2.0 * self.ell * self.ell / self.d as f64).sqrt()
    }
}

/// Outcome of a single Metropolis step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next: Vec<f64>,
    pub accepted: bool,
    /// `log π(y) − log π(x)` before capping at zero.
    pub log_alpha: f64,
    pub jump_norm: f64,
}

/// `|z| · scale` with `z` standard normal.
pub fn sample_half_normal<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z != 0.0 {
            return z.abs() * scale;
        }
    }
}

fn propose_into<R: Rng + ?Sized>(cfg: &KernelConfig, x: &[f64], rng: &mut R, y: &mut [f64], mask: &mut [bool]) {
    let base = if cfg.preconditioner.is_some() {
        1.0
    } else {
        cfg.proposal_scale()
    };
    match cfg.kind {
        KernelKind::Tmcmc => {
            let eps = sample_half_normal(base, rng);
            for chunk in y.chunks_mut(64) {
                let word = rng.next_u64();
                for (b, yi) in chunk.iter_mut().enumerate() {
                    *yi = if (word >> b) & 1 == 1 { eps } else { -eps };
                }
            }
        }
        KernelKind::Rwm => {
            for yi in y.iter_mut() {
                *yi = base * rng.sample::<f64, _>(StandardNormal);
            }
        }
    }
    if let Some(lambdas) = &cfg.preconditioner {
        let s = cfg.preconditioned_step();
        for (yi, l) in y.iter_mut().zip(lambdas) {
            *yi *= s * l;
        }
    }
    if cfg.gibbs_c < 1.0 {
        for (m, yi) in mask.iter_mut().zip(y.iter_mut()) {
            *m = rng.random::<f64>() < cfg.gibbs_c;
            if !*m {
                *yi = 0.0;
            }
        }
    } else {
        mask.iter_mut().for_each(|m| *m = true);
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi;
    }
}

/// Draws a proposal `y` and the update mask `χ`.
pub fn propose<R: Rng + ?Sized>(cfg: &KernelConfig, x: &[f64], rng: &mut R) -> Result<(Vec<f64>, Vec<bool>)> {
    cfg.validate()?;
    if x.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: x.len(),
        });
    }
    let mut y = vec![0.0; cfg.d];
    let mut mask = vec![false; cfg.d];
    propose_into(cfg, x, rng, &mut y, &mut mask);
    Ok((y, mask))
}

#[inline]
fn accept_draw<R: Rng + ?Sized>(log_alpha: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    // NaN ratios are rejected.
    u.ln() < log_alpha
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// One propose/accept step from `x`.
pub fn step<R: Rng + ?Sized>(model: &TargetModel, cfg: &KernelConfig, x: &[f64], rng: &mut R) -> Result<StepResult> {
    check_dims(model, cfg, x)?;
    let lp = model.log_density(x)?;
    if lp == f64::NEG_INFINITY {
        return Err(Error::ZeroDensityStart);
    }
    let (y, _) = propose(cfg, x, rng)?;
    let log_alpha = model.log_ratio(x, &y)?;
    let accepted = accept_draw(log_alpha, rng);
    Ok(if accepted {
        let jump_norm = distance(&y, x);
        StepResult {
            next: y,
            accepted,
            log_alpha,
            jump_norm,
        }
    } else {
        StepResult {
            next: x.to_vec(),
            accepted,
            log_alpha,
            jump_norm: 0.0,
        }
    })
}

fn check_dims(model: &TargetModel, cfg: &KernelConfig, x: &[f64]) -> Result<()> {
    cfg.validate()?;
    if cfg.d != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: cfg.d,
        });
    }
    if x.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            got: x.len(),
        });
    }
    Ok(())
}

/// Which coordinates a chain records after every iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordPolicy {
    All,
    Coordinates(Vec<usize>),
    Nothing,
}

impl RecordPolicy {
    pub fn first_coordinate() -> Self {
        RecordPolicy::Coordinates(vec![0])
    }

    fn resolve(&self, d: usize) -> Result<Vec<usize>> {
        match self {
            RecordPolicy::All => Ok((0..d).collect()),
            RecordPolicy::Nothing => Ok(Vec::new()),
            RecordPolicy::Coordinates(c) => {
                if let Some(&bad) = c.iter().find(|&&i| i >= d) {
                    return Err(invalid("record", format!("coordinate {bad} out of range for d = {d}")));
                }
                Ok(c.clone())
            }
        }
    }
}

/// Recorded output of [`run_chain`]. `states` holds the recorded
/// coordinates after each iteration (rejections repeat the state).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub recorded: Vec<usize>,
    /// Recorded coordinates of the starting point.
    pub initial: Vec<f64>,
    states: Vec<f64>,
    pub accepted: Vec<bool>,
    pub jump_norms: Vec<f64>,
    pub n_iters: usize,
    pub seed: u64,
    pub wall_clock_ns: u64,
}

impl ChainTrace {
    /// Assembles a trace from parts; `states` is row-major with one row of
    /// `recorded.len()` values per iteration.
    pub fn from_parts(
        recorded: Vec<usize>,
        initial: Vec<f64>,
        states: Vec<f64>,
        accepted: Vec<bool>,
        jump_norms: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        let n = accepted.len();
        let stride = recorded.len();
        if jump_norms.len() != n || states.len() != n * stride || initial.len() != stride {
            return Err(invalid("trace", "sequence lengths disagree"));
        }
        Ok(Self {
            recorded,
            initial,
            states,
            accepted,
            jump_norms,
            n_iters: n,
            seed,
            wall_clock_ns: 0,
        })
    }

    /// Recorded coordinates after iteration `t` (0-based).
    pub fn state(&self, t: usize) -> &[f64] {
        let s = self.recorded.len();
        &self.states[t * s..(t + 1) * s]
    }

    pub fn column_of(&self, coordinate: usize) -> Result<usize> {
        self.recorded
            .iter()
            .position(|&c| c == coordinate)
            .ok_or(Error::CoordinateNotRecorded(coordinate))
    }

    /// Values of `coordinate` after every iteration.
    pub fn series(&self, coordinate: usize) -> Result<Vec<f64>> {
        let col = self.column_of(coordinate)?;
        let s = self.recorded.len();
        Ok(self.states.iter().skip(col).step_by(s).copied().collect())
    }

    /// Value of `coordinate` after `k` iterations, `k = 0` being the start.
    pub fn value_after(&self, k: usize, coordinate: usize) -> Result<f64> {
        let col = self.column_of(coordinate)?;
        if k == 0 {
            Ok(self.initial[col])
        } else if k <= self.n_iters {
            Ok(self.state(k - 1)[col])
        } else {
            Err(Error::TraceTooShort {
                needed: k,
                available: self.n_iters,
            })
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.n_iters as f64
    }

    /// Writes `iter,accepted,jump_norm,x<c>...` rows (coordinates 1-based).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "iter,accepted,jump_norm")?;
        for c in &self.recorded {
            write!(w, ",x{}", c + 1)?;
        }
        writeln!(w)?;
        for t in 0..self.n_iters {
            write!(w, "{},{},{}", t + 1, u8::from(self.accepted[t]), self.jump_norms[t])?;
            for v in self.state(t) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// JSON-friendly summary of a chain run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSummary {
    pub config: KernelConfig,
    pub n_iters: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub wall_clock_ns: u64,
}

impl TraceSummary {
    pub fn new(cfg: &KernelConfig, trace: &ChainTrace) -> Self {
        Self {
            config: cfg.clone(),
            n_iters: trace.n_iters,
            seed: trace.seed,
            acceptance_rate: trace.acceptance_rate(),
            wall_clock_ns: trace.wall_clock_ns,
        }
    }
}

/// Runs `n_iters` steps from `init` with a stream seeded by `seed`.
///
/// The result is a pure function of its arguments apart from
/// `wall_clock_ns`, which times the iteration loop only.
pub fn run_chain(
    model: &TargetModel,
    cfg: &KernelConfig,
    init: &[f64],
    n_iters: usize,
    seed: u64,
    record: &RecordPolicy,
) -> Result<ChainTrace> {
    if n_iters == 0 {
        return Err(invalid("n_iters", "must be at least 1"));
    }
    check_dims(model, cfg, init)?;
    let mut lp = model.log_density(init)?;
    if lp == f64::NEG_INFINITY {
        return Err(Error::ZeroDensityStart);
    }
    let recorded = record.resolve(cfg.d)?;
    let stride = recorded.len();
    let initial: Vec<f64> = recorded.iter().map(|&c| init[c]).collect();

    let mut states = Vec::with_capacity(n_iters * stride);
    let mut accepted = Vec::with_capacity(n_iters);
    let mut jump_norms = Vec::with_capacity(n_iters);
    let mut x = init.to_vec();
    let mut y = vec![0.0; cfg.d];
    let mut mask = vec![false; cfg.d];
    let mut rng = rng_from_seed(seed);

    let start = Instant::now();
    for _ in 0..n_iters {
        propose_into(cfg, &x, &mut rng, &mut y, &mut mask);
        let lp_y = model.log_density_unchecked(&y);
        let ok = accept_draw(lp_y - lp, &mut rng);
        if ok {
            jump_norms.push(distance(&y, &x));
            std::mem::swap(&mut x, &mut y);
            lp = lp_y;
        } else {
            jump_norms.push(0.0);
        }
        accepted.push(ok);
        states.extend(recorded.iter().map(|&c| x[c]));
    }
    let wall_clock_ns = start.elapsed().as_nanos() as u64;

    Ok(ChainTrace {
        recorded,
        initial,
        states,
        accepted,
        jump_norms,
        n_iters,
        seed,
        wall_clock_ns,
    })
}

/// Runs one chain per `(init, seed)` pair on the current rayon pool;
/// output order follows input order.
pub fn run_ensemble(
    model: &TargetModel,
    cfg: &KernelConfig,
    inits: &[Vec<f64>],
    seeds: &[u64],
    n_iters: usize,
    record: &RecordPolicy,
) -> Result<Vec<ChainTrace>> {
    if inits.len() != seeds.len() {
        return Err(Error::EnsembleMismatch(format!(
            "{} starting points but {} seeds",
            inits.len(),
            seeds.len()
        )));
    }
    inits
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(x0, &s)| run_chain(model, cfg, x0, n_iters, s, record))
        .collect()
}

/// Convenience for tests and small tools: a fresh stream for `seed`.
pub fn stream(seed: u64) -> SimRng {
    rng_from_seed(seed)
}
