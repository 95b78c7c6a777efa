//! Target densities: iid products, scaled (non-identical) products and
//! Gaussian-measure targets with a perturbing potential `Ψ`.
//!
//! All log-densities are unnormalised wherever a normalising constant is
//! unknown; only differences of log-densities feed the kernels.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_adaptive, integrate_real_line};
use crate::special::{std_normal_cdf, LN_SQRT_2PI};

/// A point of `R^d` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("coords", "state vector must have at least one coordinate"));
        }
        check_finite(&coords)?;
        Ok(Self(coords))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteCoordinate { index, value: x[index] }),
        None => Ok(()),
    }
}

/// One-dimensional marginal density `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Marginal {
    StdNormal,
    Normal {
        sigma: f64,
    },
    Logistic,
    StudentT {
        nu: f64,
    },
    /// Accepted for sampling; its log-density has a kink at zero.
    Laplace {
        scale: f64,
    },
}

impl Marginal {
    pub fn normal(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Ok(Marginal::Normal { sigma })
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu", format!("must be positive, got {nu}")));
        }
        Ok(Marginal::StudentT { nu })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("scale", format!("must be positive, got {scale}")));
        }
        Ok(Marginal::Laplace { scale })
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// `ln f(x)` (normalised).
    #[inline]
    pub fn log_f(&self, x: f64) -> f64 {
        match *self {
            Marginal::StdNormal => -0.5 * x * x - LN_SQRT_2PI,
            Marginal::Normal { sigma } => {
                let z = x / sigma;
                -0.5 * z * z - LN_SQRT_2PI - sigma.ln()
            }
            Marginal::Logistic => {
                let a = x.abs();
                -a - 2.0 * (-a).exp().ln_1p()
            }
            Marginal::StudentT { nu } => student_t_log_norm(nu) - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p(),
            Marginal::Laplace { scale } => -(2.0 * scale).ln() - x.abs() / scale,
        }
    }

    /// `Σ ln f(x_i)`, dispatching once for the whole slice.
    pub fn log_f_sum(&self, xs: &[f64]) -> f64 {
        match *self {
            Marginal::StdNormal => {
                let sq: f64 = xs.iter().map(|x| x * x).sum();
                -0.5 * sq - LN_SQRT_2PI * xs.len() as f64
            }
            Marginal::Normal { sigma } => {
                let sq: f64 = xs.iter().map(|x| x * x).sum();
                -0.5 * sq / (sigma * sigma) - (LN_SQRT_2PI + sigma.ln()) * xs.len() as f64
            }
            _ => xs.iter().map(|&x| self.log_f(x)).sum(),
        }
    }

    /// `(ln f)'(x)`; fails where the log-density has a kink.
    #[inline]
    pub fn dlog_f(&self, x: f64) -> Result<f64> {
        Ok(match *self {
            Marginal::StdNormal => -x,
            Marginal::Normal { sigma } => -x / (sigma * sigma),
            Marginal::Logistic => -(0.5 * x).tanh(),
            Marginal::StudentT { nu } => -(nu + 1.0) * x / (nu + x * x),
            Marginal::Laplace { scale } => {
                if x == 0.0 {
                    return Err(Error::NonDifferentiable { index: 0, value: x });
                }
                -x.signum() / scale
            }
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.log_f(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::StdNormal => std_normal_cdf(x),
            Marginal::Normal { sigma } => std_normal_cdf(x / sigma),
            Marginal::Logistic => 1.0 / (1.0 + (-x).exp()),
            Marginal::Laplace { scale } => {
                if x < 0.0 {
                    0.5 * (x / scale).exp()
                } else {
                    1.0 - 0.5 * (-x / scale).exp()
                }
            }
            Marginal::StudentT { .. } => {
                if x == 0.0 {
                    return 0.5;
                }
                if !x.is_finite() {
                    return if x > 0.0 { 1.0 } else { 0.0 };
                }
                // Tail mass beyond |x| on the tan-substituted half line.
                let a = x.abs().atan();
                let tail = integrate_adaptive(
                    |t: f64| {
                        let u = t.tan();
                        self.pdf(u) * (1.0 + u * u)
                    },
                    a,
                    std::f64::consts::FRAC_PI_2,
                    1e-13,
                )
                .unwrap_or(f64::NAN);
                if x > 0.0 {
                    1.0 - tail
                } else {
                    tail
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::StdNormal => rng.sample(StandardNormal),
            Marginal::Normal { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
            Marginal::Logistic => {
                let u: f64 = open_unit(rng);
                (u / (1.0 - u)).ln()
            }
            Marginal::StudentT { nu } => StudentT::new(nu).expect("validated nu").sample(rng),
            Marginal::Laplace { scale } => {
                let u: f64 = open_unit(rng) - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn student_t_log_norm(nu: f64) -> f64 {
    libm::lgamma(0.5 * (nu + 1.0)) - libm::lgamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln()
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::StdNormal => write!(f, "std-normal"),
            Marginal::Normal { sigma } => write!(f, "normal({sigma})"),
            Marginal::Logistic => write!(f, "logistic"),
            Marginal::StudentT { nu } => write!(f, "student-t({nu})"),
            Marginal::Laplace { scale } => write!(f, "laplace({scale})"),
        }
    }
}

/// Parses `name` or `name(param)`.
pub(crate) fn split_call(s: &str) -> Result<(&str, Option<f64>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| invalid("spec", format!("unbalanced parentheses in `{s}`")))?;
            let v: f64 = inner
                .trim()
                .parse()
                .map_err(|_| invalid("spec", format!("bad numeric argument in `{s}`")))?;
            Ok((s[..open].trim(), Some(v)))
        }
    }
}

impl FromStr for Marginal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_call(s)?;
        match (name, arg) {
            ("std-normal", None) => Ok(Marginal::StdNormal),
            ("normal", Some(sigma)) => Marginal::normal(sigma),
            ("logistic", None) => Ok(Marginal::Logistic),
            ("student-t", Some(nu)) => Marginal::student_t(nu),
            ("laplace", Some(b)) => Marginal::laplace(b),
            _ => Err(invalid("marginal", format!("unknown marginal `{s}`"))),
        }
    }
}

impl From<Marginal> for String {
    fn from(m: Marginal) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Marginal {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Absolute tolerance used for [`information_constant`].
pub const INFORMATION_TOL: f64 = 1e-8;

/// `I = E_f[(f'(X)/f(X))²]` by adaptive quadrature over the real line.
pub fn information_constant(marginal: &Marginal) -> Result<f64> {
    let v = integrate_real_line(
        |x| {
            let p = marginal.pdf(x);
            if p == 0.0 {
                return 0.0;
            }
            match marginal.dlog_f(x) {
                Ok(s) => s * s * p,
                // measure-zero kink
                Err(_) => 0.0,
            }
        },
        INFORMATION_TOL,
    )?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid("marginal", "information constant is not positive"))
    }
}

/// Replication count `r(i, d)` of scaling class `i` (0-based) in dimension `d`.
pub type ReplicationFn = Arc<dyn Fn(usize, usize) -> usize + Send + Sync>;

/// Scaling exponents and constants of a non-identically scaled product target.
///
/// The first `k` coordinates carry `1/θ_i² = K_i / d^{λ_i}`; the remaining
/// `d - k` coordinates are split into `m` classes with
/// `1/θ² = K_{k+i} / d^{γ_i}`, class `i` appearing `r(i, d)` times.
#[derive(Clone)]
pub struct ThetaSchedule {
    lambdas_exp: Vec<f64>,
    gammas: Vec<f64>,
    ks: Vec<f64>,
    r_counts: ReplicationFn,
    alpha: f64,
}

impl fmt::Debug for ThetaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThetaSchedule")
            .field("lambdas_exp", &self.lambdas_exp)
            .field("gammas", &self.gammas)
            .field("ks", &self.ks)
            .field("alpha", &self.alpha)
            .finish_non_exhaustive()
    }
}

/// Largest log-log growth rate of `d^{γ_i} r(i,d) / d^α` over the last
/// decade of the check grid that still counts as bounded.
pub const BOUNDEDNESS_SLOPE_TOL: f64 = 0.05;

impl ThetaSchedule {
    pub fn new(
        lambdas_exp: Vec<f64>,
        gammas: Vec<f64>,
        ks: Vec<f64>,
        r_counts: ReplicationFn,
        alpha: f64,
    ) -> Result<Self> {
        if gammas.is_empty() {
            return Err(invalid("gammas", "at least one replicated class is required"));
        }
        if ks.len() != lambdas_exp.len() + gammas.len() {
            return Err(invalid(
                "ks",
                format!(
                    "expected {} constants, got {}",
                    lambdas_exp.len() + gammas.len(),
                    ks.len()
                ),
            ));
        }
        if let Some(k) = ks.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(invalid("ks", format!("constants must be positive, got {k}")));
        }
        if lambdas_exp.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("lambdas_exp", "exponents must be decreasing"));
        }
        if gammas.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("gammas", "exponents must be decreasing"));
        }
        if !alpha.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        Ok(Self {
            lambdas_exp,
            gammas,
            ks,
            r_counts,
            alpha,
        })
    }

    /// Single class, `θ ≡ 1/√K`, replicated over all `d` coordinates.
    pub fn homogeneous(k_const: f64) -> Result<Self> {
        Self::new(vec![], vec![0.0], vec![k_const], Arc::new(|_, d| d), 1.0)
    }

    pub fn k(&self) -> usize {
        self.lambdas_exp.len()
    }

    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn replication(&self, class: usize, d: usize) -> usize {
        (self.r_counts)(class, d)
    }

    /// `θ_1(d), …, θ_d(d)` in the layout: the `k` singletons, one
    /// representative per class, then the remaining replicas class by class.
    pub fn thetas(&self, d: usize) -> Result<Vec<f64>> {
        let k = self.k();
        let counts: Vec<usize> = (0..self.m()).map(|i| self.replication(i, d)).collect();
        if counts.contains(&0) {
            return Err(invalid("r_counts", format!("every class needs r(i,{d}) >= 1")));
        }
        let total = k + counts.iter().sum::<usize>();
        if total != d {
            return Err(invalid(
                "r_counts",
                format!("k + sum r(i,{d}) = {total} does not equal d = {d}"),
            ));
        }
        let df = d as f64;
        let mut out = Vec::with_capacity(d);
        for i in 0..k {
            out.push((df.powf(self.lambdas_exp[i]) / self.ks[i]).sqrt());
        }
        let class_theta: Vec<f64> = (0..self.m())
            .map(|i| (df.powf(self.gammas[i]) / self.ks[k + i]).sqrt())
            .collect();
        out.extend_from_slice(&class_theta);
        for (i, &r) in counts.iter().enumerate() {
            out.extend(std::iter::repeat_n(class_theta[i], r - 1));
        }
        Ok(out)
    }

    /// Checks `d^{λ_1}/d^α` and every `d^{γ_i} r(i,d)/d^α` stay bounded on
    /// the grid `10², 10³, …` reaching at least `max(d, 10³)`.
    pub fn check_bounded(&self, d: usize) -> Result<()> {
        if let Some(&l1) = self.lambdas_exp.first() {
            if l1 > self.alpha + 1e-12 {
                return Err(Error::UnboundedSchedule(format!(
                    "lambda_1 = {l1} exceeds alpha = {}",
                    self.alpha
                )));
            }
        }
        let mut grid = vec![100usize, 1000];
        while *grid.last().unwrap() < d {
            let next = grid.last().unwrap().saturating_mul(10);
            grid.push(next);
        }
        for i in 0..self.m() {
            let terms: Vec<f64> = grid.iter().map(|&g| self.class_term(i, g)).collect();
            if let Some(bad) = terms.iter().find(|t| !t.is_finite()) {
                return Err(Error::UnboundedSchedule(format!("class {i} term is {bad}")));
            }
            let n = terms.len();
            let (prev, last) = (terms[n - 2], terms[n - 1]);
            if prev > 0.0 && last > 0.0 {
                let slope = (last / prev).log10() / (grid[n - 1] as f64 / grid[n - 2] as f64).log10();
                if slope > BOUNDEDNESS_SLOPE_TOL {
                    return Err(Error::UnboundedSchedule(format!(
                        "class {i}: d^gamma r(i,d)/d^alpha grows like d^{slope:.3} between d = {} and d = {}",
                        grid[n - 2],
                        grid[n - 1]
                    )));
                }
            }
        }
        Ok(())
    }

    fn class_term(&self, class: usize, d: usize) -> f64 {
        let df = d as f64;
        df.powf(self.gammas[class]) * self.replication(class, d) as f64 / df.powf(self.alpha)
    }

    /// `ξ_d = sqrt(Σ_i d^{γ_i} r(i,d) / (K_{k+i} d^α))`.
    pub fn xi(&self, d: usize) -> Result<f64> {
        self.check_bounded(d)?;
        let k = self.k();
        let sum: f64 = (0..self.m()).map(|i| self.class_term(i, d) / self.ks[k + i]).sum();
        Ok(sum.sqrt())
    }
}

/// Free-standing wrapper around [`ThetaSchedule::xi`].
pub fn xi_constant(schedule: &ThetaSchedule, d: usize) -> Result<f64> {
    schedule.xi(d)
}

/// Perturbing potential `Ψ` of a Gaussian-measure target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Psi {
    Zero,
    /// `Ψ(x) = ε Σ_j x_j² / (1 + x_j²)`
    QuadraticPerturbation {
        eps: f64,
    },
}

impl Psi {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Psi::Zero => 0.0,
            Psi::QuadraticPerturbation { eps } => eps * x.iter().map(|v| v * v / (1.0 + v * v)).sum::<f64>(),
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match *self {
            Psi::Zero => out.iter_mut().for_each(|g| *g = 0.0),
            Psi::QuadraticPerturbation { eps } => {
                for (g, &v) in out.iter_mut().zip(x) {
                    let s = 1.0 + v * v;
                    *g = 2.0 * eps * v / (s * s);
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Psi::Zero)
    }
}

impl fmt::Display for Psi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psi::Zero => write!(f, "zero"),
            Psi::QuadraticPerturbation { eps } => write!(f, "quadratic-perturbation({eps})"),
        }
    }
}

impl FromStr for Psi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match split_call(s)? {
            ("zero", None) => Ok(Psi::Zero),
            ("quadratic-perturbation", Some(eps)) if eps.is_finite() => Ok(Psi::QuadraticPerturbation { eps }),
            _ => Err(invalid("psi", format!("unknown potential `{s}`"))),
        }
    }
}

impl From<Psi> for String {
    fn from(p: Psi) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Psi {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `λ_j = j^{-κ}`, `j = 1..=d`.
pub fn power_law_lambdas(d: usize, kappa: f64) -> Vec<f64> {
    (1..=d).map(|j| (j as f64).powf(-kappa)).collect()
}

#[derive(Debug, Clone)]
enum Family {
    IidProduct {
        marginal: Marginal,
    },
    ScaledProduct {
        marginal: Marginal,
        schedule: ThetaSchedule,
        thetas: Vec<f64>,
        log_theta_sum: f64,
    },
    GaussianMeasure {
        lambdas: Vec<f64>,
        inv_var: Vec<f64>,
        psi: Psi,
    },
}

/// One of the three target families, fixed to a dimension `d`.
#[derive(Debug, Clone)]
pub struct TargetModel {
    family: Family,
    d: usize,
}

impl TargetModel {
    pub fn iid(marginal: Marginal, d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(Self {
            family: Family::IidProduct { marginal },
            d,
        })
    }

    pub fn scaled(marginal: Marginal, schedule: ThetaSchedule, d: usize) -> Result<Self> {
        check_dim(d)?;
        let thetas = schedule.thetas(d)?;
        if let Some(t) = thetas.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(invalid("theta", format!("scaling factors must be positive, got {t}")));
        }
        let log_theta_sum = thetas.iter().map(|t| t.ln()).sum();
        Ok(Self {
            family: Family::ScaledProduct {
                marginal,
                schedule,
                thetas,
                log_theta_sum,
            },
            d,
        })
    }

    pub fn gaussian_measure(lambdas: Vec<f64>, psi: Psi) -> Result<Self> {
        check_dim(lambdas.len())?;
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(invalid("lambdas", format!("must be strictly positive, got {l}")));
        }
        if lambdas.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("lambdas", "must be non-increasing"));
        }
        let d = lambdas.len();
        let inv_var = lambdas.iter().map(|l| 1.0 / (l * l)).collect();
        Ok(Self {
            family: Family::GaussianMeasure { lambdas, inv_var, psi },
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::IidProduct { .. } => "iid",
            Family::ScaledProduct { .. } => "scaled",
            Family::GaussianMeasure { .. } => "gaussian-measure",
        }
    }

    pub fn marginal(&self) -> Option<&Marginal> {
        match &self.family {
            Family::IidProduct { marginal } | Family::ScaledProduct { marginal, .. } => Some(marginal),
            Family::GaussianMeasure { .. } => None,
        }
    }

    pub fn lambdas(&self) -> Option<&[f64]> {
        match &self.family {
            Family::GaussianMeasure { lambdas, .. } => Some(lambdas),
            _ => None,
        }
    }

    pub fn psi(&self) -> Option<&Psi> {
        match &self.family {
            Family::GaussianMeasure { psi, .. } => Some(psi),
            _ => None,
        }
    }

    pub fn thetas(&self) -> Option<&[f64]> {
        match &self.family {
            Family::ScaledProduct { thetas, .. } => Some(thetas),
            _ => None,
        }
    }

    pub fn schedule(&self) -> Option<&ThetaSchedule> {
        match &self.family {
            Family::ScaledProduct { schedule, .. } => Some(schedule),
            _ => None,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| v.is_nan()) {
            return Err(Error::NonFiniteCoordinate { index, value: x[index] });
        }
        Ok(())
    }

    /// Unnormalised log-density; see the module docs.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.log_density_unchecked(x))
    }

    #[inline]
    pub(crate) fn log_density_unchecked(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::IidProduct { marginal } => marginal.log_f_sum(x),
            Family::ScaledProduct {
                marginal,
                thetas,
                log_theta_sum,
                ..
            } => log_theta_sum + x.iter().zip(thetas).map(|(&v, &t)| marginal.log_f(t * v)).sum::<f64>(),
            Family::GaussianMeasure { inv_var, psi, .. } => {
                let quad: f64 = x.iter().zip(inv_var).map(|(v, w)| v * v * w).sum();
                -psi.value(x) - 0.5 * quad
            }
        }
    }

    /// `log π(y) − log π(x)`.
    pub fn log_ratio(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        self.check_input(y)?;
        Ok(self.log_density_unchecked(y) - self.log_density_unchecked(x))
    }

    pub fn grad_log_density(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut g = vec![0.0; self.d];
        match &self.family {
            Family::IidProduct { marginal } => {
                for (i, (gi, &v)) in g.iter_mut().zip(x).enumerate() {
                    *gi = marginal
                        .dlog_f(v)
                        .map_err(|_| Error::NonDifferentiable { index: i, value: v })?;
                }
            }
            Family::ScaledProduct { marginal, thetas, .. } => {
                for (i, ((gi, &v), &t)) in g.iter_mut().zip(x).zip(thetas).enumerate() {
                    let s = marginal
                        .dlog_f(t * v)
                        .map_err(|_| Error::NonDifferentiable { index: i, value: v })?;
                    *gi = t * s;
                }
            }
            Family::GaussianMeasure { inv_var, psi, .. } => {
                psi.gradient_into(x, &mut g);
                for ((gi, &v), &w) in g.iter_mut().zip(x).zip(inv_var) {
                    *gi = -*gi - v * w;
                }
            }
        }
        Ok(g)
    }

    /// Exact draw from the target where one is available (every product
    /// family, and Gaussian-measure targets with `Ψ ≡ 0`).
    pub fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        match &self.family {
            Family::IidProduct { marginal } => Some((0..self.d).map(|_| marginal.sample(rng)).collect()),
            Family::ScaledProduct { marginal, thetas, .. } => {
                Some(thetas.iter().map(|t| marginal.sample(rng) / t).collect())
            }
            Family::GaussianMeasure { lambdas, psi, .. } if psi.is_zero() => Some(
                lambdas
                    .iter()
                    .map(|l| l * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            ),
            Family::GaussianMeasure { .. } => None,
        }
    }

    /// CDF of the first coordinate's marginal law, where it is known.
    pub fn first_coordinate_cdf(&self, v: f64) -> Option<f64> {
        match &self.family {
            Family::IidProduct { marginal } => Some(marginal.cdf(v)),
            Family::ScaledProduct { marginal, thetas, .. } => Some(marginal.cdf(thetas[0] * v)),
            Family::GaussianMeasure { lambdas, psi, .. } if psi.is_zero() => Some(std_normal_cdf(v / lambdas[0])),
            Family::GaussianMeasure { .. } => None,
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(invalid("d", "dimension must be at least 1"))
    } else {
        Ok(())
    }
}
