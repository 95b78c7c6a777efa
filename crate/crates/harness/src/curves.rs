//! Speed and acceptance curves over a grid of scales.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tmcmc_core::scaling::{optimal_scale, speed, theoretical_acceptance, ScalingFamily};
use tmcmc_core::KernelKind;

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Marker {
    None,
    /// Largest speed among the grid points.
    GridArgmax,
    /// Refined maximiser, appended after the grid rows.
    Optimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub kind: KernelKind,
    pub ell: f64,
    pub speed: f64,
    pub acceptance: f64,
    pub marker: Marker,
}

pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(config_err(format!(
            "need 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let h = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + h * i as f64).collect())
}

pub fn speed_curves(kinds: &[KernelKind], fam: &ScalingFamily, ell_grid: &[f64]) -> Result<Vec<CurveRow>> {
    if ell_grid.is_empty() || ell_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(config_err("scale grid must be non-empty and positive"));
    }
    fam.validate()?;
    let mut rows = Vec::new();
    for &kind in kinds {
        let start = rows.len();
        for &ell in ell_grid {
            rows.push(CurveRow {
                kind,
                ell,
                speed: speed(kind, fam, ell),
                acceptance: theoretical_acceptance(kind, fam, ell),
                marker: Marker::None,
            });
        }
        let best = (start..rows.len())
            .max_by(|&a, &b| rows[a].speed.total_cmp(&rows[b].speed))
            .expect("grid is non-empty");
        rows[best].marker = Marker::GridArgmax;
        let opt = optimal_scale(kind, fam);
        rows.push(CurveRow {
            kind,
            ell: opt.ell_opt,
            speed: opt.speed_at_opt,
            acceptance: opt.acceptance_at_opt,
            marker: Marker::Optimum,
        });
    }
    Ok(rows)
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut s = String::from("kind,ell,speed,acceptance,marker\n");
    for r in rows {
        let marker = match r.marker {
            Marker::None => "",
            Marker::GridArgmax => "grid-argmax",
            Marker::Optimum => "optimum",
        };
        let _ = writeln!(s, "{},{},{},{},{}", r.kind, r.ell, r.speed, r.acceptance, marker);
    }
    s
}

/// Speed at `factor · ℓ_opt` as a fraction of the peak speed.
pub fn relative_speed_off_peak(kind: KernelKind, fam: &ScalingFamily, factor: f64) -> f64 {
    let opt = optimal_scale(kind, fam);
    speed(kind, fam, factor * opt.ell_opt) / opt.speed_at_opt
}
