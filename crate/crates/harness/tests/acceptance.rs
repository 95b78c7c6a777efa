//! Acceptance suite: one PASS/FAIL line per criterion, preceded by one
//! line per individual check. Pass criterion numbers as arguments to run a
//! subset, e.g. `cargo test --test acceptance -- 1 6`.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use tmcmc_core::kernels::stream;
use tmcmc_core::scaling::{expected_min_exp_normal, optimal_scale, tmcmc_speed, ScalingFamily, Variant};
use tmcmc_core::targets::{information_constant, power_law_lambdas, Marginal, Psi, TargetModel};
use tmcmc_core::{derive_seed, run_chain, KernelConfig, KernelKind, RecordPolicy};
use tmcmc_harness::config::ExperimentConfig;
use tmcmc_harness::curves::relative_speed_off_peak;
use tmcmc_harness::limit::{run_limit_study, LimitStudyConfig};
use tmcmc_harness::manifest::{OutputDir, RunManifest};
use tmcmc_harness::reference::{self, TABLE1};
use tmcmc_harness::table1::reproduce_table1;
use tmcmc_harness::timing::timing_benchmark;

// Criterion 1
const ELL_TMCMC: f64 = 2.426;
const ELL_RWM: f64 = 2.381;
const ELL_DEPENDENT: f64 = 1.715;
const ELL_TOL: f64 = 0.005;
const ACC_TMCMC: f64 = 0.439;
const ACC_RWM: f64 = 0.234;
const ACC_TOL: f64 = 0.001;
const CONSTANTS_BUDGET_S: f64 = 5.0;
// Criterion 2
const TABLE_ITERS: usize = 100_000;
const TABLE_CHAINS: usize = 100;
const TABLE_ACC_TOL: f64 = 0.015;
const TABLE_IACT_REL: f64 = 0.15;
const TABLE_IPACT_REL: f64 = 0.10;
const ORDER_OF_MAGNITUDE: f64 = 1.0;
const KS_D100_TMCMC: f64 = 0.167;
const KS_D100_TOL: f64 = 0.01;
// Criterion 3
const ORACLE_SE: f64 = 3.0;
const SPEED_MC_DRAWS: usize = 10_000_000;
const MIN_EXP_MC_DRAWS: usize = 10_000_000;
const IDENTITY_TOL: f64 = 1e-12;
const INFORMATION_TOL: f64 = 1e-8;
// Criterion 4
const STATIONARY_STEPS: usize = 10_000;
const STATIONARY_CHAINS: usize = 1000;
const STATIONARY_SE: f64 = 4.0;
// Criterion 5
const LIMIT_KS_AT_200: f64 = 0.15;
const LIMIT_BUDGET_S: f64 = 600.0;
// Criterion 6
const OFF_PEAK_FACTOR: f64 = 2.5;
// Criterion 7
const TIMING_DIMS: [usize; 6] = [2, 5, 10, 20, 50, 100];
const TIMING_MIN_DIM: usize = 10;
const TIMING_ITERS: usize = 1_000_000;
const TIMING_REPS: usize = 5;

struct Criterion {
    id: u8,
    title: &'static str,
    failures: usize,
    checks: usize,
}

impl Criterion {
    fn new(id: u8, title: &'static str) -> Self {
        println!("== criterion {id}: {title}");
        Self {
            id,
            title,
            failures: 0,
            checks: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
        println!("   [{}] {}", if ok { "ok  " } else { "MISS" }, what.as_ref());
    }

    fn finish(self) -> bool {
        let ok = self.failures == 0;
        println!(
            "{} criterion {}: {} ({} of {} checks passed)",
            if ok { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.checks - self.failures,
            self.checks
        );
        ok
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_constants() -> bool {
    let mut c = Criterion::new(1, "theoretical constants");
    let start = Instant::now();
    let iid = ScalingFamily::iid(1.0).unwrap();
    let t = optimal_scale(KernelKind::Tmcmc, &iid);
    c.check(
        within(t.ell_opt, ELL_TMCMC, ELL_TOL),
        format!("TMCMC iid ell_opt {:.5} vs {ELL_TMCMC}", t.ell_opt),
    );
    c.check(
        within(t.acceptance_at_opt, ACC_TMCMC, ACC_TOL),
        format!("TMCMC iid acceptance {:.5} vs {ACC_TMCMC}", t.acceptance_at_opt),
    );
    let r = optimal_scale(KernelKind::Rwm, &iid);
    c.check(
        within(r.ell_opt, ELL_RWM, ELL_TOL),
        format!("RWM iid ell_opt {:.5} vs {ELL_RWM}", r.ell_opt),
    );
    c.check(
        within(r.acceptance_at_opt, ACC_RWM, ACC_TOL),
        format!("RWM iid acceptance {:.5} vs {ACC_RWM}", r.acceptance_at_opt),
    );
    let dep = optimal_scale(KernelKind::Tmcmc, &ScalingFamily::dependent());
    c.check(
        within(dep.ell_opt, ELL_DEPENDENT, ELL_TOL),
        format!("TMCMC dependent ell_opt {:.5} vs {ELL_DEPENDENT}", dep.ell_opt),
    );
    let dg = optimal_scale(KernelKind::Tmcmc, &ScalingFamily::dependent_gibbs(0.3).unwrap());
    c.check(
        within(dg.ell_opt, ELL_DEPENDENT * 0.3, ELL_TOL),
        format!(
            "TMCMC dependent-gibbs c=0.3 ell_opt {:.5} vs {:.5}",
            dg.ell_opt,
            ELL_DEPENDENT * 0.3
        ),
    );
    let (mut worst_t, mut worst_r) = (0.0f64, 0.0f64);
    for v in Variant::ALL {
        for i in [0.25, 1.0, 4.0] {
            for cc in [0.3, 0.7, 1.0] {
                for xi in [1.0, 10.0] {
                    let fam = ScalingFamily::new(v, i, cc, xi).unwrap();
                    worst_t = worst_t.max((optimal_scale(KernelKind::Tmcmc, &fam).acceptance_at_opt - ACC_TMCMC).abs());
                    worst_r = worst_r.max((optimal_scale(KernelKind::Rwm, &fam).acceptance_at_opt - ACC_RWM).abs());
                }
            }
        }
    }
    c.check(
        worst_t <= ACC_TOL,
        format!("TMCMC acceptance at optimum, all variants: max deviation {worst_t:.2e}"),
    );
    c.check(
        worst_r <= ACC_TOL,
        format!("RWM acceptance at optimum, all variants: max deviation {worst_r:.2e}"),
    );
    let secs = start.elapsed().as_secs_f64();
    c.check(
        secs < CONSTANTS_BUDGET_S,
        format!("elapsed {secs:.2}s < {CONSTANTS_BUDGET_S}s"),
    );
    c.finish()
}

fn log_ratio(a: f64, b: f64) -> f64 {
    (a / b).log10().abs()
}

fn criterion_table1() -> bool {
    let mut c = Criterion::new(2, "reference table reproduction");
    let dir = tempfile::tempdir().unwrap();
    let out = OutputDir::create(dir.path()).unwrap();
    let mut cfg = ExperimentConfig::table1_defaults();
    cfg.n_iters = TABLE_ITERS;
    cfg.n_chains = TABLE_CHAINS;
    cfg.output_dir = dir.path().to_path_buf();
    let mut manifest = RunManifest::new("table1", &cfg).unwrap();
    let start = Instant::now();
    let report = reproduce_table1(&cfg, &out, &mut manifest).unwrap();
    println!("   table computed in {:.1}s", start.elapsed().as_secs_f64());
    for refrow in TABLE1 {
        for kind in [KernelKind::Rwm, KernelKind::Tmcmc] {
            let cell = format!("d={:<3} ell={:<3} {:<5}", refrow.dim, refrow.scale, kind.to_string());
            let Some(row) = report.find(refrow.dim, refrow.scale, kind) else {
                c.check(false, format!("{cell}: missing"));
                continue;
            };
            let Some(d) = &row.diagnostics else {
                c.check(false, format!("{cell}: {}", row.error.as_deref().unwrap_or("failed")));
                continue;
            };
            let acc = reference::pick(refrow.acceptance, kind);
            c.check(
                within(d.acceptance_rate, acc, TABLE_ACC_TOL),
                format!(
                    "{cell} acceptance {:.4} vs {acc:.4} ± {TABLE_ACC_TOL}",
                    d.acceptance_rate
                ),
            );
            let iact = reference::pick(refrow.iact, kind);
            c.check(
                (d.iact - iact).abs() <= TABLE_IACT_REL * iact,
                format!("{cell} IACT {:.2} vs {iact} ± {:.0}%", d.iact, TABLE_IACT_REL * 100.0),
            );
            let ipact = reference::pick(refrow.ipact, kind);
            c.check(
                (d.ipact - ipact).abs() <= TABLE_IPACT_REL * ipact,
                format!(
                    "{cell} IPACT {:.3} vs {ipact} ± {:.0}%",
                    d.ipact,
                    TABLE_IPACT_REL * 100.0
                ),
            );
            let ajs = reference::pick(refrow.ajs, kind);
            c.check(
                log_ratio(d.ajs, ajs) <= ORDER_OF_MAGNITUDE,
                format!("{cell} AJS {:.3} vs {ajs} (order of magnitude)", d.ajs),
            );
            let ks_ref = reference::pick(refrow.avg_ks, kind);
            let ks = d.avg_ks.unwrap_or(f64::NAN);
            c.check(
                log_ratio(ks, ks_ref) <= ORDER_OF_MAGNITUDE,
                format!("{cell} avg K-S {ks:.4} vs {ks_ref} (order of magnitude)"),
            );
            if refrow.dim == 100 && refrow.scale == 2.4 && kind == KernelKind::Tmcmc {
                c.check(
                    within(ks, KS_D100_TMCMC, KS_D100_TOL),
                    format!("{cell} avg K-S {ks:.4} vs {KS_D100_TMCMC} ± {KS_D100_TOL} ({TABLE_CHAINS} chains)"),
                );
            }
        }
    }
    c.finish()
}

fn phi_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn mc_normal<F: Fn(f64) -> f64 + Sync>(f: F, n: usize, seed: u64) -> (f64, f64) {
    let chunks = 32usize;
    let per = n / chunks;
    let parts: Vec<(f64, f64)> = (0..chunks as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(derive_seed(seed, k, 0));
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per {
                let v = f(rng.sample(StandardNormal));
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let n = (per * chunks) as f64;
    let m = parts.iter().map(|p| p.0).sum::<f64>() / n;
    let v = parts.iter().map(|p| p.1).sum::<f64>() / n - m * m;
    (m, (v.max(0.0) / n).sqrt())
}

fn criterion_oracles() -> bool {
    let mut c = Criterion::new(3, "oracle equivalences");
    let mut rng = stream(3_003);
    for k in 0..10u64 {
        let v = Variant::ALL[rng.random_range(0..6)];
        let fam = ScalingFamily::new(
            v,
            rng.random_range(0.2..5.0),
            rng.random_range(0.2..1.0),
            rng.random_range(0.5..3.0),
        )
        .unwrap();
        let (pref, a) = (fam.prefactor(), fam.rate());
        let ell = rng.random_range(0.2..4.0) / a;
        // Half-line integral = ½ E[Z² Φ(−aℓ|Z|)].
        let (m, se) = mc_normal(
            |z| pref * 2.0 * ell * ell * z * z * phi_cdf(-a * ell * z.abs()),
            SPEED_MC_DRAWS,
            40 + k,
        );
        let q = tmcmc_speed(&fam, ell);
        let tol = ORACLE_SE * se;
        c.check(
            (q - m).abs() <= tol,
            format!("speed {v} ell={ell:.3}: quadrature {q:.6} vs MC {m:.6} (se {se:.1e})"),
        );
    }
    let points = [
        (-1.0, 2.0),
        (0.0, 1.0),
        (0.5, 0.3),
        (-2.0, 0.5),
        (1.0, 1.0),
        (-0.5, 3.0),
        (-5.0, 2.0),
        (0.2, 0.1),
        (-0.125, 0.5),
        (-3.0, 1.5),
    ];
    for (k, (mu, sigma)) in points.into_iter().enumerate() {
        let (m, se) = mc_normal(|z| (mu + sigma * z).exp().min(1.0), MIN_EXP_MC_DRAWS, 80 + k as u64);
        let v = expected_min_exp_normal(mu, sigma);
        c.check(
            (v - m).abs() <= ORACLE_SE * se,
            format!("E min(1,e^X) at ({mu}, {sigma}): {v:.6} vs MC {m:.6} (se {se:.1e})"),
        );
    }
    let mut worst = 0.0f64;
    for s in [0.01, 0.3, 1.0, 2.0, 5.0, 12.0] {
        let lhs = expected_min_exp_normal(-s * s / 2.0, s);
        let rhs = 2.0 * tmcmc_core::special::std_normal_cdf(-s / 2.0);
        worst = worst.max((lhs - rhs).abs());
    }
    c.check(
        worst <= IDENTITY_TOL,
        format!("identity at mu = -sigma²/2: max deviation {worst:.1e}"),
    );
    for sigma in [0.5, 1.0, 2.0, 5.0] {
        let i = information_constant(&Marginal::normal(sigma).unwrap()).unwrap();
        c.check(
            (i * sigma * sigma - 1.0).abs() <= INFORMATION_TOL,
            format!("information(N(0,{sigma}²))·σ² = {:.12}", i * sigma * sigma),
        );
    }
    c.finish()
}

fn criterion_stationarity() -> bool {
    let mut c = Criterion::new(4, "stationarity preservation");
    let d = 10;
    let lambdas = power_law_lambdas(d, 1.0);
    let targets = [
        (
            "iid normal",
            TargetModel::iid(Marginal::StdNormal, d).unwrap(),
            None,
            1.0,
        ),
        (
            "gaussian measure",
            TargetModel::gaussian_measure(lambdas.clone(), Psi::Zero).unwrap(),
            Some(lambdas.clone()),
            1.0,
        ),
    ];
    for (label, model, pre, var) in &targets {
        for kind in [KernelKind::Tmcmc, KernelKind::Rwm] {
            let mut cfg = KernelConfig::new(kind, 2.4, d).unwrap();
            if let Some(l) = pre {
                cfg = KernelConfig::new(kind, 1.7, d)
                    .unwrap()
                    .with_preconditioner(l.clone())
                    .unwrap();
            }
            let finals: Vec<f64> = (0..STATIONARY_CHAINS as u64)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream(derive_seed(4_004, 0, j));
                    let x0 = model.sample_exact(&mut rng).unwrap();
                    let t = run_chain(
                        model,
                        &cfg,
                        &x0,
                        STATIONARY_STEPS,
                        derive_seed(4_004, 1, j),
                        &RecordPolicy::first_coordinate(),
                    )
                    .unwrap();
                    t.value_after(STATIONARY_STEPS, 0).unwrap()
                })
                .collect();
            let n = finals.len() as f64;
            let mean = finals.iter().sum::<f64>() / n;
            let v = finals.iter().map(|x| x * x).sum::<f64>() / n;
            let se_m = (var / n).sqrt();
            let se_v = (2.0 * var * var / n).sqrt();
            c.check(
                mean.abs() <= STATIONARY_SE * se_m,
                format!("{label} {kind}: mean {mean:.4} within {STATIONARY_SE}·{se_m:.4}"),
            );
            c.check(
                (v - var).abs() <= STATIONARY_SE * se_v,
                format!("{label} {kind}: variance {v:.4} vs {var} within {STATIONARY_SE}·{se_v:.4}"),
            );
        }
    }
    c.finish()
}

fn criterion_limit() -> bool {
    let mut c = Criterion::new(5, "diffusion-limit study");
    let dir = tempfile::tempdir().unwrap();
    let out = OutputDir::create(dir.path()).unwrap();
    let cfg = LimitStudyConfig::defaults();
    let mut manifest = RunManifest::new("limit", &cfg).unwrap();
    let start = Instant::now();
    let study = run_limit_study(&cfg, &out, &mut manifest).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let m = study.medians();
    for (d, k) in &m {
        println!("   d = {d:>3}: median K-S {k:.4}");
    }
    let monotone = m.windows(2).all(|w| w[1].1 <= w[0].1);
    c.check(
        monotone,
        format!(
            "median K-S non-increasing over d = {:?}",
            m.iter().map(|p| p.0).collect::<Vec<_>>()
        ),
    );
    let last = m.iter().find(|p| p.0 == 200).map(|p| p.1).unwrap_or(f64::NAN);
    c.check(
        last <= LIMIT_KS_AT_200,
        format!("median K-S at d = 200: {last:.4} <= {LIMIT_KS_AT_200}"),
    );
    c.check(
        secs <= LIMIT_BUDGET_S,
        format!("elapsed {secs:.1}s <= {LIMIT_BUDGET_S}s"),
    );
    c.finish()
}

fn criterion_robustness() -> bool {
    let mut c = Criterion::new(6, "robustness ordering of speed curves");
    for v in Variant::ALL {
        for (i, cc, xi) in [(1.0, 1.0, 1.0), (0.25, 0.3, 10.0), (4.0, 0.7, 1.0)] {
            let fam = ScalingFamily::new(v, i, cc, xi).unwrap();
            let t = relative_speed_off_peak(KernelKind::Tmcmc, &fam, OFF_PEAK_FACTOR);
            let r = relative_speed_off_peak(KernelKind::Rwm, &fam, OFF_PEAK_FACTOR);
            c.check(
                r < t,
                format!(
                    "{v} (I={i}, c={}, xi={}): RWM keeps {r:.4} of peak, TMCMC {t:.4}",
                    fam.c, fam.xi
                ),
            );
        }
    }
    c.finish()
}

fn criterion_timing() -> bool {
    let mut c = Criterion::new(7, "per-iteration cost");
    let rows = timing_benchmark(&TIMING_DIMS, TIMING_ITERS, TIMING_REPS, 7_007).unwrap();
    for &d in &TIMING_DIMS {
        let get = |k| rows.iter().find(|r| r.dim == d && r.kernel == k).unwrap().per_iter_ns();
        let (t, r) = (get(KernelKind::Tmcmc), get(KernelKind::Rwm));
        if d >= TIMING_MIN_DIM {
            c.check(t < r, format!("d = {d}: TMCMC {t:.1} ns/iter < RWM {r:.1} ns/iter"));
        } else {
            println!("   [info] d = {d}: TMCMC {t:.1} ns/iter, RWM {r:.1} ns/iter");
        }
    }
    c.finish()
}

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let all: [(u8, fn() -> bool); 7] = [
        (1, criterion_constants),
        (2, criterion_table1),
        (3, criterion_oracles),
        (4, criterion_stationarity),
        (5, criterion_limit),
        (6, criterion_robustness),
        (7, criterion_timing),
    ];
    let mut summary = Vec::new();
    for (id, run) in all {
        if selected.is_empty() || selected.contains(&id) {
            summary.push((id, run()));
        }
    }
    println!("== summary");
    for (id, ok) in &summary {
        println!("{} criterion {id}", if *ok { "PASS" } else { "FAIL" });
    }
    if summary.iter().all(|s| s.1) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
