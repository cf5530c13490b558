//! Time-of-day volatility profile.
//!
//! `bar_alpha` is a jump-robust level of daily volatility built from bipower
//! variation. Returns above `bar_alpha * (1/m)^0.49` are treated as jumps and
//! dropped, and each slot's share of the remaining squared returns yields a
//! multiplicative factor `TOD(i)` that averages to about one across the day.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::ReturnGrid;

pub const DEFAULT_TRUNCATION_EXPONENT: f64 = 0.49;
pub const DEFAULT_TOD_CAP: f64 = 1.5;

/// Per-slot TOD factors plus the intermediate sums they are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct TodProfile {
    /// `None` where no day kept slot `i` after truncation.
    pub tod: Vec<Option<f64>>,
    pub bar_alpha: f64,
    /// Days on which slot `i` survived the raw truncation.
    pub den_noi: Vec<usize>,
    /// Sum over days of the truncated squared return at slot `i`.
    pub numer_tod: Vec<f64>,
    /// Returns that survived the raw truncation, over the whole sample.
    pub num_noi: usize,
    /// Realized variance of the whole sample.
    pub den_tod: f64,
    /// 0-based slots whose factor was substituted by [`cap_tod`].
    pub filled_slots: Vec<usize>,
}

impl TodProfile {
    pub fn m(&self) -> usize {
        self.tod.len()
    }

    /// 1-based slots with an undefined factor.
    pub fn undefined_slots(&self) -> Vec<usize> {
        self.tod
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_none())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn is_fully_defined(&self) -> bool {
        self.tod.iter().all(Option::is_some)
    }

    /// Factors with undefined slots left as NaN; only for display and diagnostics.
    pub fn values_or_nan(&self) -> Vec<f64> {
        self.tod.iter().map(|t| t.unwrap_or(f64::NAN)).collect()
    }
}

/// `sum_{j>=2} |r_j| |r_{j-1}|` over one day.
pub fn bipower_variation_day(day: &[f64]) -> Result<f64> {
    if day.len() < 2 {
        return Err(Error::Domain(format!(
            "bipower variation needs at least 2 returns, got {}",
            day.len()
        )));
    }
    Ok(day.windows(2).map(|w| w[0].abs() * w[1].abs()).sum())
}

/// `3 sqrt(pi/2) sqrt(mean_s BPV_s)`.
pub fn bar_alpha(grid: &ReturnGrid) -> f64 {
    let total: f64 = grid
        .iter_days()
        .map(|day| day.windows(2).map(|w| w[0].abs() * w[1].abs()).sum::<f64>())
        .sum();
    3.0 * (PI / 2.0).sqrt() * (total / grid.days() as f64).sqrt()
}

/// Threshold of the raw truncation, `bar_alpha * (1/m)^exponent`.
pub fn raw_truncation_level(bar_alpha: f64, m: usize, exponent: f64) -> f64 {
    bar_alpha * (1.0 / m as f64).powf(exponent)
}

/// `true` where `|r_j| <= bar_alpha * (1/m)^exponent`.
pub fn raw_truncation_mask(grid: &ReturnGrid, bar_alpha: f64, exponent: f64) -> Vec<bool> {
    let level = raw_truncation_level(bar_alpha, grid.m(), exponent);
    grid.returns().iter().map(|r| r.abs() <= level).collect()
}

/// Estimates the TOD profile of `grid`.
///
/// Fails with [`Error::Degenerate`] when every return is zero. A slot that is
/// truncated away on every day comes back as `None` rather than NaN.
pub fn tod_profile(grid: &ReturnGrid, exponent: f64) -> Result<TodProfile> {
    let m = grid.m();
    let den_tod: f64 = grid.returns().iter().map(|r| r * r).sum();
    if den_tod == 0.0 {
        return Err(Error::Degenerate(
            "realized variance is zero; TOD factors are undefined".into(),
        ));
    }
    let alpha = bar_alpha(grid);
    let mask = raw_truncation_mask(grid, alpha, exponent);
    let num_noi = mask.iter().filter(|&&kept| kept).count();

    let mut den_noi = vec![0usize; m];
    let mut numer_tod = vec![0.0f64; m];
    for (day_returns, day_mask) in grid.iter_days().zip(mask.chunks_exact(m)) {
        for slot in 0..m {
            if day_mask[slot] {
                den_noi[slot] += 1;
                numer_tod[slot] += day_returns[slot] * day_returns[slot];
            }
        }
    }

    let tod = den_noi
        .iter()
        .zip(&numer_tod)
        .map(|(&den, &numer)| (den > 0).then(|| (num_noi as f64 / den as f64) * numer / den_tod))
        .collect();

    Ok(TodProfile {
        tod,
        bar_alpha: alpha,
        den_noi,
        numer_tod,
        num_noi,
        den_tod,
        filled_slots: Vec::new(),
    })
}

/// Replaces every factor by `min(cap, factor)`; undefined slots get `cap` and
/// are listed in `filled_slots`.
pub fn cap_tod(profile: &TodProfile, cap: f64) -> Result<TodProfile> {
    if !(cap.is_finite() && cap > 0.0) {
        return Err(Error::config(
            "tod_cap",
            format!("must be positive, got {cap}"),
        ));
    }
    let mut capped = profile.clone();
    for (slot, factor) in capped.tod.iter_mut().enumerate() {
        match factor {
            Some(value) => *value = value.min(cap),
            None => {
                *factor = Some(cap);
                capped.filled_slots.push(slot);
            }
        }
    }
    Ok(capped)
}

/// Tiles the per-slot factors over every day of `grid`.
pub fn expand_tod(profile: &TodProfile, grid: &ReturnGrid) -> Result<Vec<f64>> {
    if profile.m() != grid.m() {
        return Err(Error::Structural(format!(
            "profile has {} slots, grid has m={}",
            profile.m(),
            grid.m()
        )));
    }
    let factors: Vec<f64> = profile
        .tod
        .iter()
        .enumerate()
        .map(|(slot, t)| {
            t.ok_or_else(|| {
                Error::Structural(format!(
                    "TOD slot {} is undefined; cap the profile first",
                    slot + 1
                ))
            })
        })
        .collect::<Result<_>>()?;
    Ok(factors.iter().copied().cycle().take(grid.len()).collect())
}
