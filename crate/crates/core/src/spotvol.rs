//! Delta-sequence estimates of daily squared volatility.
//!
//! A kernel `K` and bandwidth `h` give weights `f(x) = K(x/h)/h` on time
//! offsets `x = t_l - t_anchor`. With the indicator kernel on `[0, 1)` and
//! `h` equal to one day, anchoring at each day's first return picks exactly
//! that day's `m` slots, so the estimate is `(1/(m delta)) * sum` of the day's
//! truncated squared returns.

use crate::error::{Error, Result};
use crate::grid::ReturnGrid;

/// `fn0 * 1{x >= 0} * 1{x * fn0 < 1}`.
pub fn delta_sequence_weight(x: f64, fn0: f64) -> f64 {
    if x >= 0.0 && x * fn0 < 1.0 {
        fn0
    } else {
        0.0
    }
}

/// A kernel generating a delta sequence.
pub trait Kernel {
    /// Kernel value at the scaled offset `u = x / h`.
    fn value(&self, u: f64) -> f64;

    /// Half-open interval of `u` outside which the kernel vanishes.
    fn support(&self) -> (f64, f64);
}

/// `K(u) = 1{0 <= u < 1}`: a forward-looking flat window.
#[derive(Debug, Clone, Copy, Default)]
pub struct IndicatorKernel;

impl Kernel for IndicatorKernel {
    fn value(&self, u: f64) -> f64 {
        if (0.0..1.0).contains(&u) {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
}

/// Per-day squared-volatility estimates, annualized.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotVolSeries {
    pub sigmaq_daily: Vec<f64>,
    pub bandwidth_slots: usize,
}

/// Kernel-weighted sums of truncated squared returns, one per day, anchored
/// at the day's first observation.
///
/// Weights are applied as-is; a window that runs past the end of the sample is
/// not renormalized.
#[derive(Debug, Clone)]
pub struct SpotVolEstimator<K = IndicatorKernel> {
    pub kernel: K,
    pub bandwidth_slots: usize,
}

impl SpotVolEstimator<IndicatorKernel> {
    /// Indicator kernel with a one-day bandwidth.
    pub fn one_day(m: usize) -> Self {
        Self {
            kernel: IndicatorKernel,
            bandwidth_slots: m,
        }
    }
}

impl<K: Kernel> SpotVolEstimator<K> {
    pub fn estimate(&self, grid: &ReturnGrid, truncated_sq: &[f64]) -> Result<SpotVolSeries> {
        if truncated_sq.len() != grid.len() {
            return Err(Error::Structural(format!(
                "{} truncated squares for a grid of {} returns",
                truncated_sq.len(),
                grid.len()
            )));
        }
        if self.bandwidth_slots == 0 {
            return Err(Error::config("bandwidth_slots", "must be positive"));
        }
        let bw = self.bandwidth_slots as f64;
        let h = bw * grid.delta();
        let (lo, hi) = self.kernel.support();
        let n = grid.len() as i64;

        let sigmaq_daily = (0..grid.days())
            .map(|day| {
                let anchor = (day * grid.m()) as i64;
                let first = (anchor + (lo * bw).floor() as i64).clamp(0, n);
                let last = (anchor + (hi * bw).ceil() as i64 + 1).clamp(0, n);
                // Offsets are taken in whole slots so the window edge lands
                // exactly on u = 1.
                (first..last)
                    .map(|l| {
                        let u = (l - anchor) as f64 / bw;
                        self.kernel.value(u) / h * truncated_sq[l as usize]
                    })
                    .sum()
            })
            .collect();

        Ok(SpotVolSeries {
            sigmaq_daily,
            bandwidth_slots: self.bandwidth_slots,
        })
    }
}

/// Daily squared volatility with the indicator kernel and a one-day window.
pub fn daily_spot_variance(grid: &ReturnGrid, truncated_sq: &[f64]) -> Result<SpotVolSeries> {
    SpotVolEstimator::one_day(grid.m()).estimate(grid, truncated_sq)
}

/// Repeats each day's estimate over that day's `m` slots.
pub fn expand_daily(series: &SpotVolSeries, grid: &ReturnGrid) -> Result<Vec<f64>> {
    if series.sigmaq_daily.len() != grid.days() {
        return Err(Error::Structural(format!(
            "{} daily estimates for {} days",
            series.sigmaq_daily.len(),
            grid.days()
        )));
    }
    Ok(series
        .sigmaq_daily
        .iter()
        .flat_map(|&s| std::iter::repeat_n(s, grid.m()))
        .collect())
}
