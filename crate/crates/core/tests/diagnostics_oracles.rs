//! Kolmogorov–Smirnov and window checks against brute-force references.

use rand::Rng;
use rand_distr::StandardNormal;
use tmcmc_core::diagnostics::{acceptance_rate, average_ks, ks_statistic};
use tmcmc_core::kernels::stream;
use tmcmc_core::special::std_normal_cdf;
use tmcmc_core::ChainTrace;

/// `sup |F_n − F|` by counting, checking both one-sided limits at each point.
fn ks_brute(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for &x in sample {
        let le = sample.iter().filter(|&&y| y <= x).count() as f64 / n;
        let lt = sample.iter().filter(|&&y| y < x).count() as f64 / n;
        let f = cdf(x);
        d = d.max((le - f).abs()).max((lt - f).abs());
    }
    d
}

#[test]
fn one_sample_statistic_matches_brute_force() {
    let mut rng = stream(1);
    for n in [1, 2, 7, 50, 300] {
        let xs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let fast = ks_statistic(&xs, &std_normal_cdf).unwrap();
        assert!((fast - ks_brute(&xs, std_normal_cdf)).abs() < 1e-15);
    }
}

#[test]
fn normal_samples_stay_below_the_critical_value() {
    let mut rng = stream(2);
    let below = (0..100)
        .filter(|_| {
            let xs: Vec<f64> = (0..100).map(|_| rng.sample(StandardNormal)).collect();
            ks_statistic(&xs, &std_normal_cdf).unwrap() < 0.163
        })
        .count();
    assert!(below >= 97, "{below}/100");
}

#[test]
fn average_ks_of_exact_draws() {
    let (chains, iters) = (100, 400);
    let mut rng = stream(3);
    let columns: Vec<Vec<f64>> = (0..chains)
        .map(|_| (0..iters).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let traces: Vec<ChainTrace> = columns
        .iter()
        .map(|c| ChainTrace::from_parts(vec![0], vec![0.0], c.clone(), vec![true; iters], vec![0.0; iters], 0).unwrap())
        .collect();
    let avg = average_ks(&traces, 0, &std_normal_cdf, 0.25).unwrap();

    // Oracle: brute-force mean of D_100 over fresh samples.
    let mut orng = stream(4);
    let reps = 4000;
    let oracle = (0..reps)
        .map(|_| {
            let xs: Vec<f64> = (0..100).map(|_| orng.sample(StandardNormal)).collect();
            ks_brute(&xs, std_normal_cdf)
        })
        .sum::<f64>()
        / reps as f64;
    assert!((oracle - 0.0868).abs() < 0.003, "oracle {oracle}");
    assert!((avg - oracle).abs() < 0.01, "average {avg} vs {oracle}");
}

#[test]
fn acceptance_uses_the_post_burn_in_window() {
    let mut rng = stream(5);
    let n = 1000;
    let acc: Vec<bool> = (0..n)
        .map(|i| rng.random::<f64>() < if i < 300 { 0.9 } else { 0.2 })
        .collect();
    let tr = ChainTrace::from_parts(vec![], vec![], vec![], acc.clone(), vec![0.0; n], 0).unwrap();
    for b in [0.0, 0.1, 0.25, 0.5, 0.9] {
        let start = (b * n as f64) as usize;
        let manual = acc[start..].iter().filter(|&&a| a).count() as f64 / (n - start) as f64;
        assert_eq!(acceptance_rate(&tr, b).unwrap(), manual);
    }
}
