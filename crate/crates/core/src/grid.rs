//! Regular intraday return panels.
//!
//! Returns are stored flat and day-major: slot `i` of day `s` (both 0-based
//! internally) lives at index `s * m + i`. User-facing output reports 1-based
//! day and slot numbers.

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trading days per financial year.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Five-minute slots in a 6h25m trading session.
pub const DEFAULT_SLOTS_PER_DAY: usize = 77;

/// Slot length in financial years for `m` equal slots per trading day.
pub fn default_delta(m: usize) -> f64 {
    1.0 / (TRADING_DAYS_PER_YEAR * m as f64)
}

/// Input file layout understood by [`load_returns`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// One log-return per line, day-major.
    Returns,
    /// `day_id,price` per line; consecutive lines with the same id form a day.
    Prices,
}

/// An `m x N` panel of intraday log-returns on a uniform grid of step `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnGrid {
    returns: Vec<f64>,
    m: usize,
    days: usize,
    delta: f64,
}

impl ReturnGrid {
    pub fn new(returns: Vec<f64>, m: usize, delta: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 slots per day, got m={m}"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if returns.is_empty() {
            return Err(Error::Structural("no returns".into()));
        }
        let remainder = returns.len() % m;
        if remainder != 0 {
            return Err(Error::Structural(format!(
                "{} values is not a multiple of m={m} (remainder {remainder})",
                returns.len()
            )));
        }
        if let Some(index) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let days = returns.len() / m;
        Ok(Self {
            returns,
            m,
            days,
            delta,
        })
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Slots per day.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of days `N`.
    pub fn days(&self) -> usize {
        self.days
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Total number of returns `n = m * N`.
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Returns of day `day` (0-based).
    pub fn day(&self, day: usize) -> &[f64] {
        &self.returns[day * self.m..(day + 1) * self.m]
    }

    pub fn iter_days(&self) -> std::slice::ChunksExact<'_, f64> {
        self.returns.chunks_exact(self.m)
    }

    /// Observation time `t_j = delta * j` of flat index `index` (0-based), so the
    /// first return closes at `delta`.
    pub fn time(&self, index: usize) -> f64 {
        self.delta * (index + 1) as f64
    }

    /// `t_index - t_anchor`, formed from the slot count so that offsets of a
    /// whole day come out as exactly `m * delta`. Subtracting two observation
    /// times can land one ulp short of that.
    pub fn time_offset(&self, index: usize, anchor: usize) -> f64 {
        self.delta * (index as f64 - anchor as f64)
    }

    /// All observation times.
    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    /// 1-based `(day, slot)` of a 0-based flat index.
    pub fn day_slot(&self, index: usize) -> (usize, usize) {
        (index / self.m + 1, index % self.m + 1)
    }

    /// The same grid with every return multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.returns.iter().map(|r| r * c).collect(),
            self.m,
            self.delta,
        )
    }

    pub fn into_returns(self) -> Vec<f64> {
        self.returns
    }
}

/// Builds a grid from per-day price blocks of `m + 1` prices each. No return
/// spans two blocks, so overnight moves are dropped.
pub fn prices_to_log_returns(blocks: &[Vec<f64>], delta: f64) -> Result<ReturnGrid> {
    let first = blocks
        .first()
        .ok_or_else(|| Error::Structural("no price blocks".into()))?;
    let width = first.len();
    if width < 3 {
        return Err(Error::Structural(format!(
            "a day needs at least 3 prices, got {width}"
        )));
    }
    let mut returns = Vec::with_capacity(blocks.len() * (width - 1));
    for (day, block) in blocks.iter().enumerate() {
        if block.len() != width {
            return Err(Error::Structural(format!(
                "day {} has {} prices, expected {width}",
                day + 1,
                block.len()
            )));
        }
        if let Some(pos) = block.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Domain(format!(
                "price {} at day {} position {} is not positive",
                block[pos],
                day + 1,
                pos + 1
            )));
        }
        returns.extend(block.windows(2).map(|w| w[1].ln() - w[0].ln()));
    }
    ReturnGrid::new(returns, width - 1, delta)
}

/// Reads a returns or prices file into a grid.
pub fn load_returns(path: &Path, m: usize, layout: Layout, delta: f64) -> Result<ReturnGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match layout {
        Layout::Returns => parse_returns(&text, m, delta).map_err(|e| with_path(e, path)),
        Layout::Prices => parse_prices(&text, m, delta).map_err(|e| with_path(e, path)),
    }
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    }
}

/// Parses one return per line. Blank lines are ignored.
pub fn parse_returns(text: &str, m: usize, delta: f64) -> Result<ReturnGrid> {
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        let value: f64 = token.parse().map_err(|_| Error::Parse {
            path: Default::default(),
            line: lineno + 1,
            message: format!("not a number: {token:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                index: values.len(),
            });
        }
        values.push(value);
    }
    if m == 0 {
        return Err(Error::Domain("m must be positive".into()));
    }
    let remainder = values.len() % m;
    if remainder != 0 {
        return Err(Error::Structural(format!(
            "{} values is not a multiple of m={m} (remainder {remainder})",
            values.len()
        )));
    }
    ReturnGrid::new(values, m, delta)
}

fn compare_day_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    }
}

/// Parses `day_id,price` lines; every day must carry `m + 1` prices.
pub fn parse_prices(text: &str, m: usize, delta: f64) -> Result<ReturnGrid> {
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    let mut current_id: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: Default::default(),
            line: lineno + 1,
            message,
        };
        let (id, price) = line
            .split_once(',')
            .ok_or_else(|| parse_err(format!("expected day_id,price, got {line:?}")))?;
        let (id, price) = (id.trim(), price.trim());
        let price: f64 = price
            .parse()
            .map_err(|_| parse_err(format!("not a number: {price:?}")))?;
        match &current_id {
            Some(cur) if cur == id => {}
            Some(cur) if compare_day_ids(id, cur) == Ordering::Less => {
                return Err(parse_err(format!(
                    "day ids must be non-decreasing ({id} after {cur})"
                )));
            }
            _ => {
                current_id = Some(id.to_string());
                blocks.push(Vec::with_capacity(m + 1));
            }
        }
        blocks.last_mut().expect("block pushed above").push(price);
    }
    for (day, block) in blocks.iter().enumerate() {
        if block.len() != m + 1 {
            return Err(Error::Structural(format!(
                "day {} has {} prices, expected m+1={}",
                day + 1,
                block.len(),
                m + 1
            )));
        }
    }
    prices_to_log_returns(&blocks, delta)
}
