//! Distributional checks of the proposal and acceptance mechanics.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use tmcmc_core::kernels::{propose, sample_half_normal, stream};
use tmcmc_core::targets::{power_law_lambdas, Marginal, Psi, TargetModel};
use tmcmc_core::{derive_seed, run_chain, KernelConfig, KernelKind, RecordPolicy};

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn half_normal_moments() {
    let sigma = 1.7;
    let mut rng = stream(2024);
    let draws: Vec<f64> = (0..1_000_000).map(|_| sample_half_normal(sigma, &mut rng)).collect();
    assert!(draws.iter().all(|&x| x > 0.0));
    let mean_ref = sigma * (2.0 / std::f64::consts::PI).sqrt();
    let (m, se) = mean_and_se(&draws);
    assert!((m - mean_ref).abs() < 4.0 * se, "mean {m} vs {mean_ref}");
    let var_ref = sigma * sigma * (1.0 - 2.0 / std::f64::consts::PI);
    let sq: Vec<f64> = draws.iter().map(|x| (x - mean_ref) * (x - mean_ref)).collect();
    let (v, se_v) = mean_and_se(&sq);
    assert!((v - var_ref).abs() < 4.0 * se_v, "variance {v} vs {var_ref}");
}

#[test]
fn tmcmc_displacements_are_pairwise_uncorrelated() {
    let cfg = KernelConfig::tmcmc(2.0, 4).unwrap();
    let x = [0.0; 4];
    let mut rng = stream(5);
    let prods: Vec<f64> = (0..1_000_000)
        .map(|_| {
            let (y, _) = propose(&cfg, &x, &mut rng).unwrap();
            y[0] * y[2]
        })
        .collect();
    let (m, se) = mean_and_se(&prods);
    assert!(m.abs() < 4.0 * se, "covariance {m} (se {se})");
}

#[test]
fn tmcmc_pair_cancels_half_the_time() {
    let cfg = KernelConfig::tmcmc(1.0, 3).unwrap();
    // A zero start keeps the displacements exact in floating point.
    let x = [0.0; 3];
    let mut rng = stream(6);
    let n = 100_000;
    let zeros = (0..n)
        .filter(|_| {
            let (y, _) = propose(&cfg, &x, &mut rng).unwrap();
            (y[0] - x[0]) + (y[1] - x[1]) == 0.0
        })
        .count();
    let freq = zeros as f64 / n as f64;
    assert!((freq - 0.5).abs() <= 0.005, "frequency {freq}");
}

#[test]
fn vanishing_scale_accepts_everything() {
    let model = TargetModel::iid(Marginal::StdNormal, 10).unwrap();
    for kind in [KernelKind::Tmcmc, KernelKind::Rwm] {
        let cfg = KernelConfig::new(kind, 1e-5, 10).unwrap();
        let t = run_chain(&model, &cfg, &[0.5; 10], 2000, 1, &RecordPolicy::Nothing).unwrap();
        assert!(t.acceptance_rate() > 0.999, "{kind}: {}", t.acceptance_rate());
    }
}

fn batch_rates(kind: KernelKind, ell: f64, seed: u64) -> Vec<f64> {
    let model = TargetModel::iid(Marginal::StdNormal, 1).unwrap();
    let cfg = KernelConfig::new(kind, ell, 1).unwrap();
    (0..20u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(derive_seed(seed, 0, j));
            let x0: f64 = rng.sample(StandardNormal);
            let t = run_chain(
                &model,
                &cfg,
                &[x0],
                5000,
                derive_seed(seed, 1, j),
                &RecordPolicy::Nothing,
            )
            .unwrap();
            t.acceptance_rate()
        })
        .collect()
}

#[test]
fn one_dimensional_kernels_coincide() {
    for ell in [1.0, 2.4, 6.0] {
        let (mt, st) = mean_and_se(&batch_rates(KernelKind::Tmcmc, ell, 10));
        let (mr, sr) = mean_and_se(&batch_rates(KernelKind::Rwm, ell, 20));
        let se = (st * st + sr * sr).sqrt();
        assert!((mt - mr).abs() <= 3.0 * se, "ell {ell}: {mt} vs {mr} (se {se})");
    }
}

/// Final coordinate-1 values of `n` chains started from exact draws.
fn final_first_coordinates(model: &TargetModel, cfg: &KernelConfig, n: usize, steps: usize, seed: u64) -> Vec<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(derive_seed(seed, 0, j));
            let x0 = model.sample_exact(&mut rng).unwrap();
            let t = run_chain(
                model,
                cfg,
                &x0,
                steps,
                derive_seed(seed, 1, j),
                &RecordPolicy::first_coordinate(),
            )
            .unwrap();
            t.value_after(steps, 0).unwrap()
        })
        .collect()
}

fn assert_moments(label: &str, xs: &[f64], mean: f64, var: f64, fourth: f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let s2 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let se_m = (var / n).sqrt();
    let se_v = ((fourth - var * var) / n).sqrt();
    assert!((m - mean).abs() < 4.0 * se_m, "{label}: mean {m}, se {se_m}");
    assert!(
        (s2 - var).abs() < 4.0 * se_v,
        "{label}: variance {s2} vs {var}, se {se_v}"
    );
}

#[test]
fn exact_starts_stay_stationary() {
    let d = 5;
    let pi2 = std::f64::consts::PI.powi(2);
    let cases = [
        ("normal", TargetModel::iid(Marginal::StdNormal, d).unwrap(), 1.0, 3.0),
        (
            "logistic",
            TargetModel::iid(Marginal::Logistic, d).unwrap(),
            pi2 / 3.0,
            7.0 * pi2 * pi2 / 15.0,
        ),
    ];
    for (label, model, var, fourth) in &cases {
        for kind in [KernelKind::Tmcmc, KernelKind::Rwm] {
            for c in [1.0, 0.5] {
                let cfg = KernelConfig::new(kind, 2.4 * var.sqrt(), d)
                    .unwrap()
                    .with_gibbs(c)
                    .unwrap();
                let xs = final_first_coordinates(model, &cfg, 1000, 10_000, 77);
                assert_moments(&format!("{label} {kind} c={c}"), &xs, 0.0, *var, *fourth);
            }
        }
    }
    let lambdas = power_law_lambdas(d, 1.0);
    let gm = TargetModel::gaussian_measure(lambdas.clone(), Psi::Zero).unwrap();
    for kind in [KernelKind::Tmcmc, KernelKind::Rwm] {
        let cfg = KernelConfig::new(kind, 1.7, d)
            .unwrap()
            .with_preconditioner(lambdas.clone())
            .unwrap();
        let xs = final_first_coordinates(&gm, &cfg, 1000, 10_000, 78);
        assert_moments(&format!("gaussian-measure {kind}"), &xs, 0.0, 1.0, 3.0);
    }
}

#[test]
fn d100_tmcmc_acceptance_near_optimum() {
    let d = 100;
    let model = TargetModel::iid(Marginal::StdNormal, d).unwrap();
    let cfg = KernelConfig::tmcmc(2.4, d).unwrap();
    let mut rng = stream(31);
    let init: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let t = run_chain(&model, &cfg, &init, 100_000, 32, &RecordPolicy::Nothing).unwrap();
    let acc = tmcmc_core::diagnostics::acceptance_rate(&t, 0.25).unwrap();
    assert!((acc - 0.441).abs() <= 0.01, "acceptance {acc}");
}
