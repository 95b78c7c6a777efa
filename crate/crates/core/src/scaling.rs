//! Limiting diffusion speeds, acceptance rates and optimal scales.
//!
//! Every variant reduces to a prefactor `p` and a rate `a` such that
//!
//! * TMCMC speed `= p · 4ℓ² ∫₀^∞ u² Φ(−aℓu) φ(u) du`,
//! * TMCMC acceptance `= 4 ∫₀^∞ Φ(−aℓu) φ(u) du`,
//! * RWM speed `= p · 2ℓ² Φ(−aℓ)`, RWM acceptance `= 2Φ(−aℓ)`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelKind;
use crate::optimize::maximize_on_positive;
use crate::quadrature::GaussLegendre;
use crate::special::{log_std_normal_cdf, std_normal_cdf, std_normal_pdf};

/// Upper end of the truncated half line; `φ` beyond it is below 1e-22.
pub const HALF_LINE_CUTOFF: f64 = 10.0;
const HALF_LINE_NODES: usize = 200;
const GRID_POINTS: usize = 400;
const ELL_TOL: f64 = 1e-9;

fn half_line_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(HALF_LINE_NODES))
}

/// `∫₀^∞ w(u) φ(u) du` with the tail beyond [`HALF_LINE_CUTOFF`] dropped.
pub fn half_line_gaussian<F: Fn(f64) -> f64>(w: F) -> f64 {
    half_line_rule().integrate(0.0, HALF_LINE_CUTOFF, |u| w(u) * std_normal_pdf(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    Iid,
    IidGibbs,
    NonIid,
    NonIidGibbs,
    Dependent,
    DependentGibbs,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Iid,
        Variant::IidGibbs,
        Variant::NonIid,
        Variant::NonIidGibbs,
        Variant::Dependent,
        Variant::DependentGibbs,
    ];

    pub fn is_gibbs(self) -> bool {
        matches!(self, Variant::IidGibbs | Variant::NonIidGibbs | Variant::DependentGibbs)
    }

    pub fn is_dependent(self) -> bool {
        matches!(self, Variant::Dependent | Variant::DependentGibbs)
    }

    pub fn is_scaled(self) -> bool {
        matches!(self, Variant::NonIid | Variant::NonIidGibbs)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Iid => "iid",
            Variant::IidGibbs => "iid-gibbs",
            Variant::NonIid => "noniid",
            Variant::NonIidGibbs => "noniid-gibbs",
            Variant::Dependent => "dependent",
            Variant::DependentGibbs => "dependent-gibbs",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // Separators are optional: `NON_IID_GIBBS`, `non-iid-gibbs` and `noniid-gibbs` all parse.
        let squash = |t: &str| t.to_ascii_lowercase().replace(['_', '-'], "");
        let key = squash(s.trim());
        Variant::ALL
            .into_iter()
            .find(|v| squash(&v.to_string()) == key)
            .ok_or_else(|| invalid("variant", format!("unknown variant `{s}`")))
    }
}

/// Constants feeding the speed formulas. `information` and `xi` are
/// ignored by the dependent variants; `c` is ignored by non-Gibbs ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFamily {
    pub variant: Variant,
    pub information: f64,
    pub c: f64,
    pub xi: f64,
}

impl ScalingFamily {
    pub fn new(variant: Variant, information: f64, c: f64, xi: f64) -> Result<Self> {
        let fam = Self {
            variant,
            information,
            c: if variant.is_gibbs() { c } else { 1.0 },
            xi: if variant.is_scaled() { xi } else { 1.0 },
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn iid(information: f64) -> Result<Self> {
        Self::new(Variant::Iid, information, 1.0, 1.0)
    }

    pub fn iid_gibbs(information: f64, c: f64) -> Result<Self> {
        Self::new(Variant::IidGibbs, information, c, 1.0)
    }

    pub fn non_iid(information: f64, xi: f64) -> Result<Self> {
        Self::new(Variant::NonIid, information, 1.0, xi)
    }

    pub fn non_iid_gibbs(information: f64, c: f64, xi: f64) -> Result<Self> {
        Self::new(Variant::NonIidGibbs, information, c, xi)
    }

    pub fn dependent() -> Self {
        Self {
            variant: Variant::Dependent,
            information: 1.0,
            c: 1.0,
            xi: 1.0,
        }
    }

    pub fn dependent_gibbs(c: f64) -> Result<Self> {
        Self::new(Variant::DependentGibbs, 1.0, c, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.information > 0.0 && self.information.is_finite()) {
            return Err(invalid(
                "information",
                format!("must be positive, got {}", self.information),
            ));
        }
        if !(self.c > 0.0 && self.c <= 1.0) {
            return Err(invalid("c", format!("must lie in (0, 1], got {}", self.c)));
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(invalid("xi", format!("must be positive, got {}", self.xi)));
        }
        Ok(())
    }

    /// Multiplier in front of the speed.
    pub fn prefactor(&self) -> f64 {
        if self.variant.is_gibbs() {
            self.c
        } else {
            1.0
        }
    }

    /// Rate `a` in `Φ(−aℓu)`.
    pub fn rate(&self) -> f64 {
        let i = self.information;
        let c = self.c;
        match self.variant {
            Variant::Iid => i.sqrt() / 2.0,
            Variant::IidGibbs => (c * i).sqrt() / 2.0,
            Variant::NonIid => self.xi * i.sqrt() / 2.0,
            Variant::NonIidGibbs => self.xi * (c * i).sqrt() / 2.0,
            Variant::Dependent => std::f64::consts::FRAC_1_SQRT_2,
            Variant::DependentGibbs => std::f64::consts::FRAC_1_SQRT_2 / c,
        }
    }
}

/// Optimum of a speed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub ell_opt: f64,
    pub speed_at_opt: f64,
    pub acceptance_at_opt: f64,
}

/// `E[min(1, e^X)]` for `X ~ N(μ, σ²)`; `σ = 0` gives `min(1, e^μ)`.
pub fn expected_min_exp_normal(mu: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mu.exp().min(1.0);
    }
    let t = mu / sigma;
    let log_tail = mu + 0.5 * sigma * sigma + log_std_normal_cdf(-sigma - t);
    std_normal_cdf(t) + log_tail.exp()
}

/// `∫₀^∞ u² Φ(−bu) φ(u) du`.
pub fn second_moment_integral(b: f64) -> f64 {
    half_line_gaussian(|u| u * u * std_normal_cdf(-b * u))
}

pub fn tmcmc_speed(fam: &ScalingFamily, ell: f64) -> f64 {
    if ell <= 0.0 {
        return 0.0;
    }
    fam.prefactor() * 4.0 * ell * ell * second_moment_integral(fam.rate() * ell)
}

pub fn rwm_speed(fam: &ScalingFamily, ell: f64) -> f64 {
    if ell <= 0.0 {
        return 0.0;
    }
    fam.prefactor() * ell * ell * rwm_acceptance(fam, ell)
}

fn rwm_acceptance(fam: &ScalingFamily, ell: f64) -> f64 {
    2.0 * std_normal_cdf(-fam.rate() * ell)
}

fn tmcmc_acceptance(fam: &ScalingFamily, ell: f64) -> f64 {
    let a = fam.rate() * ell;
    4.0 * half_line_gaussian(|u| std_normal_cdf(-a * u))
}

pub fn speed(kind: KernelKind, fam: &ScalingFamily, ell: f64) -> f64 {
    match kind {
        KernelKind::Tmcmc => tmcmc_speed(fam, ell),
        KernelKind::Rwm => rwm_speed(fam, ell),
    }
}

/// Limiting acceptance rate at scale `ell`; 1 for `ell ≤ 0`.
pub fn theoretical_acceptance(kind: KernelKind, fam: &ScalingFamily, ell: f64) -> f64 {
    if ell <= 0.0 {
        return 1.0;
    }
    match kind {
        KernelKind::Tmcmc => tmcmc_acceptance(fam, ell),
        KernelKind::Rwm => rwm_acceptance(fam, ell),
    }
}

/// Grid bracketing on `(0, 10/a]` followed by golden-section refinement.
pub fn optimal_scale(kind: KernelKind, fam: &ScalingFamily) -> ScalingReport {
    let upper = 10.0 / fam.rate();
    let (ell_opt, speed_at_opt) = maximize_on_positive(|l| speed(kind, fam, l), upper, GRID_POINTS, ELL_TOL);
    ScalingReport {
        ell_opt,
        speed_at_opt,
        acceptance_at_opt: theoretical_acceptance(kind, fam, ell_opt),
    }
}

/// One row of a speed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ell: f64,
    pub speed: f64,
    pub acceptance: f64,
}

pub fn speed_curve(kind: KernelKind, fam: &ScalingFamily, ells: &[f64]) -> Vec<CurvePoint> {
    ells.iter()
        .map(|&ell| CurvePoint {
            ell,
            speed: speed(kind, fam, ell),
            acceptance: theoretical_acceptance(kind, fam, ell),
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut w: W) -> io::Result<()> {
    writeln!(w, "ell,speed,acceptance")?;
    for p in points {
        writeln!(w, "{},{},{}", p.ell, p.speed, p.acceptance)?;
    }
    Ok(())
}
