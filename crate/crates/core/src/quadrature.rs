//! Gauss–Legendre rules and a globally adaptive Gauss–Kronrod integrator.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Fixed-order Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f(x) dx`
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// 7-point Gauss / 15-point Kronrod pair (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Maximum number of subintervals before [`integrate_adaptive`] gives up.
pub const MAX_INTERVALS: usize = 4000;

/// Globally adaptive G7–K15 quadrature of `f` over `[a, b]`: the interval
/// with the largest error estimate is bisected until the summed estimate
/// drops below `abs_tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error_estimate: err,
                intervals: segments.len(),
            });
        }
        if err <= abs_tol {
            return Ok(total);
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error_estimate: err,
                intervals: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segments.swap_remove(worst);
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            return Err(Error::QuadratureNonConvergence {
                estimate: total,
                error_estimate: err,
                intervals: segments.len() + 1,
            });
        }
        segments.push(kronrod15(&f, s.a, m));
        segments.push(kronrod15(&f, m, s.b));
    }
}

/// `∫_{-∞}^{∞} f(x) dx` through the substitution `x = tan(t)`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, abs_tol: f64) -> Result<f64> {
    integrate_adaptive(
        |t: f64| {
            let x = t.tan();
            let v = f(x) * (1.0 + x * x);
            if v.is_nan() {
                0.0
            } else {
                v
            }
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1usize, 2, 5, 20, 200] {
            let rule = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            // ∫_0^1 x^deg = 1/(deg+1)
            let v = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert_relative_eq!(v, 1.0 / (deg as f64 + 1.0), max_relative = 1e-12);
            let wsum: f64 = rule.weights().iter().sum();
            assert_relative_eq!(wsum, 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let rule = GaussLegendre::new(200);
        let n = rule.nodes();
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        for i in 0..n.len() {
            assert_relative_eq!(n[i], -n[n.len() - 1 - i], epsilon = 1e-15);
        }
    }

    #[test]
    fn adaptive_handles_gaussian_on_real_line() {
        let v = integrate_real_line(|x| (-0.5 * x * x).exp(), 1e-12).unwrap();
        assert_relative_eq!(v, (2.0 * PI).sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-9).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn divergent_integral_is_reported() {
        let r = integrate_real_line(|x: f64| 1.0 / (1.0 + x.abs()), 1e-8);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
