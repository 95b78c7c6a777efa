//! Chain performance measures: acceptance rate, average jump size,
//! integrated (partial) autocorrelation times and ensemble K-S distance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::ChainTrace;

pub const DEFAULT_BURN_IN: f64 = 0.25;
pub const DEFAULT_LAGS: usize = 25;

fn window_start(n: usize, burn_in_frac: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&burn_in_frac) {
        return Err(invalid(
            "burn_in_frac",
            format!("must lie in [0, 1), got {burn_in_frac}"),
        ));
    }
    let start = (burn_in_frac * n as f64).floor() as usize;
    if start >= n {
        return Err(Error::EmptyWindow);
    }
    Ok(start)
}

pub fn acceptance_rate(trace: &ChainTrace, burn_in_frac: f64) -> Result<f64> {
    let start = window_start(trace.n_iters, burn_in_frac)?;
    let w = &trace.accepted[start..];
    Ok(w.iter().filter(|&&a| a).count() as f64 / w.len() as f64)
}

/// Mean Euclidean jump over post-burn-in transitions, rejections as 0.
pub fn average_jump_size(trace: &ChainTrace, burn_in_frac: f64) -> Result<f64> {
    let start = window_start(trace.n_iters, burn_in_frac)?;
    let w = &trace.jump_norms[start..];
    Ok(w.iter().sum::<f64>() / w.len() as f64)
}

/// Post-burn-in values of `coordinate`.
pub fn post_burn_in_series(trace: &ChainTrace, coordinate: usize, burn_in_frac: f64) -> Result<Vec<f64>> {
    let start = window_start(trace.n_iters, burn_in_frac)?;
    let mut s = trace.series(coordinate)?;
    s.drain(..start);
    Ok(s)
}

/// `ρ_0..=ρ_max_lag` from the biased autocovariance.
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::TraceTooShort {
            needed: max_lag + 1,
            available: n,
        });
    }
    if series.iter().all(|&x| x == series[0]) {
        return Err(Error::ZeroVariance);
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>();
    if c0 <= 0.0 || !c0.is_finite() {
        return Err(Error::ZeroVariance);
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                centred[..n - k]
                    .iter()
                    .zip(&centred[k..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / c0
            }
        })
        .collect())
}

/// `1 + 2 Σ_{k=1}^{max_lag} ρ_k`.
pub fn iact(series: &[f64], max_lag: usize) -> Result<f64> {
    let rho = autocorrelation(series, max_lag)?;
    Ok(1.0 + 2.0 * rho[1..].iter().sum::<f64>())
}

/// Partial autocorrelations `π_1..=π_max_lag` by Durbin–Levinson.
pub fn partial_autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = autocorrelation(series, max_lag)?;
    pacf_from_acf(&rho)
}

/// Durbin–Levinson on `ρ_0..=ρ_K`; fails when `|π_k| ≥ 1`.
pub fn pacf_from_acf(rho: &[f64]) -> Result<Vec<f64>> {
    let max_lag = rho.len().saturating_sub(1);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    let mut pacf = Vec::with_capacity(max_lag);
    let mut v = 1.0;
    for k in 1..=max_lag {
        let num = rho[k] - (1..k).map(|j| phi[j - 1] * rho[k - j]).sum::<f64>();
        let p = num / v;
        if p.is_nan() || p.abs() >= 1.0 {
            return Err(Error::RecursionBreakdown { lag: k, value: p });
        }
        let prev = phi.clone();
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - p * prev[k - j - 1];
        }
        phi.push(p);
        v *= 1.0 - p * p;
        pacf.push(p);
    }
    Ok(pacf)
}

/// `1 + 2 Σ_{k=1}^{max_lag} π_k`.
pub fn ipact(series: &[f64], max_lag: usize) -> Result<f64> {
    let pacf = partial_autocorrelation(series, max_lag)?;
    Ok(1.0 + 2.0 * pacf.iter().sum::<f64>())
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Exact one-sample statistic `sup_x |F_n(x) − F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64 + ?Sized>(sample: &[f64], cdf: &F) -> Result<f64> {
    if sample.is_empty() {
        return Err(invalid("sample", "must not be empty"));
    }
    let s = sorted(sample);
    Ok(ks_sorted(&s, cdf))
}

fn ks_sorted<F: Fn(f64) -> f64 + ?Sized>(s: &[f64], cdf: &F) -> f64 {
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).abs().max((f - i as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("sample", "both samples must be non-empty"));
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Mean over post-burn-in iterations of the one-sample K-S statistic of
/// the across-chain values of `coordinate`.
pub fn average_ks<F: Fn(f64) -> f64 + Sync + ?Sized>(
    ensemble: &[ChainTrace],
    coordinate: usize,
    cdf: &F,
    burn_in_frac: f64,
) -> Result<f64> {
    if ensemble.len() < 2 {
        return Err(Error::EnsembleMismatch("need at least 2 chains".into()));
    }
    let n = ensemble[0].n_iters;
    if ensemble.iter().any(|t| t.n_iters != n) {
        return Err(Error::EnsembleMismatch("chains have different lengths".into()));
    }
    let start = window_start(n, burn_in_frac)?;
    let cols: Vec<usize> = ensemble
        .iter()
        .map(|t| t.column_of(coordinate))
        .collect::<Result<_>>()?;
    let per_t: Vec<f64> = (start..n)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(ensemble.len()),
            |buf: &mut Vec<f64>, t| {
                buf.clear();
                buf.extend(ensemble.iter().zip(&cols).map(|(tr, &c)| tr.state(t)[c]));
                buf.sort_by(f64::total_cmp);
                ks_sorted(buf, cdf)
            },
        )
        .collect();
    Ok(per_t.iter().sum::<f64>() / per_t.len() as f64)
}

/// All measures for one chain; `avg_ks` is filled in by the caller when an
/// ensemble is available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub acceptance_rate: f64,
    pub ajs: f64,
    pub iact: f64,
    pub ipact: f64,
    pub avg_ks: Option<f64>,
    pub burn_in_frac: f64,
    pub n_lags: usize,
}

impl DiagnosticsReport {
    pub fn for_chain(trace: &ChainTrace, coordinate: usize, burn_in_frac: f64, n_lags: usize) -> Result<Self> {
        let series = post_burn_in_series(trace, coordinate, burn_in_frac)?;
        Ok(Self {
            acceptance_rate: acceptance_rate(trace, burn_in_frac)?,
            ajs: average_jump_size(trace, burn_in_frac)?,
            iact: iact(&series, n_lags)?,
            ipact: ipact(&series, n_lags)?,
            avg_ks: None,
            burn_in_frac,
            n_lags,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;
    use crate::special::std_normal_cdf;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn trace_from(values: Vec<f64>, accepted: Vec<bool>) -> ChainTrace {
        let jumps = accepted.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        ChainTrace::from_parts(vec![0], vec![0.0], values, accepted, jumps, 0).unwrap()
    }

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let s = (1.0 - phi * phi).sqrt();
        let mut x: f64 = rng.sample(StandardNormal);
        (0..n)
            .map(|_| {
                x = phi * x + s * rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect()
    }

    #[test]
    fn acceptance_uses_only_the_window() {
        let mut acc = vec![false; 25];
        acc.extend(vec![true; 75]);
        let t = trace_from(vec![0.0; 100], acc);
        assert_eq!(acceptance_rate(&t, 0.25).unwrap(), 1.0);
        assert_eq!(acceptance_rate(&t, 0.0).unwrap(), 0.75);
        assert_eq!(average_jump_size(&t, 0.25).unwrap(), 1.0);
        assert!(acceptance_rate(&t, 1.0).is_err());
        let none = trace_from(vec![0.0; 10], vec![false; 10]);
        assert_eq!(average_jump_size(&none, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn acf_basics() {
        let x = ar1(0.5, 1000, 1);
        let rho = autocorrelation(&x, 10).unwrap();
        assert_eq!(rho.len(), 11);
        assert_eq!(rho[0], 1.0);
        assert!(autocorrelation(&[1.0; 50], 5).is_err());
        assert!(autocorrelation(&x[..5], 5).is_err());
    }

    #[test]
    fn ar1_references() {
        let x = ar1(0.8, 1_000_000, 7);
        let rho = autocorrelation(&x, 10).unwrap();
        for (k, r) in rho.iter().enumerate() {
            assert_abs_diff_eq!(*r, 0.8f64.powi(k as i32), epsilon = 0.01);
        }
        let geo: f64 = 1.0 + 2.0 * (1..=25).map(|k| 0.8f64.powi(k)).sum::<f64>();
        assert_abs_diff_eq!(iact(&x, 25).unwrap(), geo, epsilon = 0.15);
        assert_abs_diff_eq!(ipact(&x, 25).unwrap(), 2.6, epsilon = 0.1);
    }

    #[test]
    fn white_noise_times_are_one() {
        let x = ar1(0.0, 1_000_000, 9);
        assert_abs_diff_eq!(iact(&x, 25).unwrap(), 1.0, epsilon = 0.05);
        assert_abs_diff_eq!(ipact(&x, 25).unwrap(), 1.0, epsilon = 0.05);
    }

    #[test]
    fn constant_series_has_no_autocorrelation() {
        // 1.1 sums with rounding, so the centred values are not exactly zero.
        assert!(matches!(autocorrelation(&vec![1.1; 777], 25), Err(Error::ZeroVariance)));
    }

    #[test]
    fn durbin_levinson_breakdown() {
        assert!(matches!(
            pacf_from_acf(&[1.0, 1.0]),
            Err(Error::RecursionBreakdown { lag: 1, .. })
        ));
        let p = pacf_from_acf(&[1.0, 0.5, 0.25, 0.125]).unwrap();
        assert_abs_diff_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_hand_values() {
        let u = |x: f64| x.clamp(0.0, 1.0);
        assert_abs_diff_eq!(ks_statistic(&[0.25, 0.5, 0.75], &u).unwrap(), 0.25, epsilon = 1e-15);
        let n = 40;
        let q: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
        assert_abs_diff_eq!(ks_statistic(&q, &u).unwrap(), 0.5 / n as f64, epsilon = 1e-15);
        assert!(ks_statistic(&[], &u).is_err());
    }

    #[test]
    fn two_sample_with_ties() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            ks_two_sample(&[0.0, 1.0, 2.0, 3.0], &[1.5]).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn average_ks_degenerate_ensemble() {
        let chains: Vec<ChainTrace> = (0..10).map(|_| trace_from(vec![0.0; 8], vec![true; 8])).collect();
        let v = average_ks(&chains, 0, &std_normal_cdf, 0.25).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        assert!(average_ks(&chains[..1], 0, &std_normal_cdf, 0.25).is_err());
        let mut ragged = chains.clone();
        ragged.push(trace_from(vec![0.0; 4], vec![true; 4]));
        assert!(average_ks(&ragged, 0, &std_normal_cdf, 0.25).is_err());
    }

    #[test]
    fn report_for_chain() {
        let x = ar1(0.5, 4000, 3);
        let t = trace_from(x, vec![true; 4000]);
        let r = DiagnosticsReport::for_chain(&t, 0, DEFAULT_BURN_IN, DEFAULT_LAGS).unwrap();
        assert_eq!(r.acceptance_rate, 1.0);
        assert!(r.iact > 1.5 && r.iact < 4.5, "{}", r.iact);
        assert!(r.avg_ks.is_none());
    }
}
