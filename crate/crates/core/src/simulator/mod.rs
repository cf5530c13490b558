//! Synthetic five-minute log-price paths with known jumps.
//!
//! Variance follows a square-root diffusion discretized by full-truncation
//! Euler; an intraday U-shaped factor multiplies volatility; the price shock is
//! correlated with the variance shock (leverage); and jump times come from a
//! self-exciting Hawkes process with Gaussian sizes.

mod evaluate;
mod hawkes;
mod path;

pub use evaluate::{evaluate_detection, evaluate_indices, ConfusionSummary, SizeErrorStats};
pub use hawkes::{simulate_hawkes, simulate_hawkes_with};
pub use path::{simulate_path, SimPath};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{default_delta, DEFAULT_SLOTS_PER_DAY};

/// Random sub-streams of one seed; each block of the simulation draws from
/// its own so changing one block never shifts another's draws.
pub(crate) mod stream {
    pub const DIFFUSION: u64 = 0;
    pub const HAWKES: u64 = 1;
    pub const JUMP_SIZES: u64 = 2;
}

/// Square-root variance dynamics, in annualized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvParams {
    /// Long-run variance.
    pub theta: f64,
    /// Mean-reversion speed per year.
    pub kappa: f64,
    /// Volatility of variance.
    pub xi: f64,
    /// Correlation between price and variance shocks.
    pub rho: f64,
    pub v0: f64,
}

impl Default for SvParams {
    fn default() -> Self {
        Self {
            theta: 0.04,
            kappa: 5.0,
            xi: 0.5,
            rho: -0.5,
            v0: 0.04,
        }
    }
}

impl SvParams {
    /// Constant variance `sigma2`.
    pub fn constant(sigma2: f64) -> Self {
        Self {
            theta: sigma2,
            kappa: 0.0,
            xi: 0.0,
            rho: 0.0,
            v0: sigma2,
        }
    }

    pub fn satisfies_feller(&self) -> bool {
        2.0 * self.kappa * self.theta >= self.xi * self.xi
    }
}

/// Intraday volatility multiplier
/// `tau(u) = C + A exp(-a u) + B exp(-b (1 - u))` for `u` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiurnalShape {
    /// `A`: excess volatility at the open.
    pub open_amplitude: f64,
    /// `a`
    pub open_decay: f64,
    /// `B`: excess volatility at the close.
    pub close_amplitude: f64,
    /// `b`
    pub close_decay: f64,
    /// `C`; when absent it is chosen so that `tau^2` integrates to one over the day.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
}

impl Default for DiurnalShape {
    fn default() -> Self {
        Self {
            open_amplitude: 0.75,
            open_decay: 10.0,
            close_amplitude: 0.75,
            close_decay: 10.0,
            level: None,
        }
    }
}

/// `(1 - exp(-k)) / k`, the mean of `exp(-k u)` over `[0, 1]`.
fn mean_exp(k: f64) -> f64 {
    if k.abs() < 1e-12 {
        1.0
    } else {
        -(-k).exp_m1() / k
    }
}

impl DiurnalShape {
    /// `tau == 1`.
    pub fn flat() -> Self {
        Self {
            open_amplitude: 0.0,
            open_decay: 0.0,
            close_amplitude: 0.0,
            close_decay: 0.0,
            level: None,
        }
    }

    /// The constant `C`, solving `int_0^1 tau(u)^2 du = 1` when not given.
    pub fn level(&self) -> f64 {
        if let Some(c) = self.level {
            return c;
        }
        let (a_amp, a) = (self.open_amplitude, self.open_decay);
        let (b_amp, b) = (self.close_amplitude, self.close_decay);
        // int (A e^{-au} + B e^{-b(1-u)}) du
        let i1 = a_amp * mean_exp(a) + b_amp * mean_exp(b);
        // int (A e^{-au} + B e^{-b(1-u)})^2 du; the cross term is
        // 2AB e^{-b} int e^{(b-a)u} du.
        let i2 = a_amp * a_amp * mean_exp(2.0 * a)
            + b_amp * b_amp * mean_exp(2.0 * b)
            + 2.0 * a_amp * b_amp * (-b).exp() * mean_exp(a - b);
        -i1 + (i1 * i1 - i2 + 1.0).sqrt()
    }

    pub fn tau(&self, u: f64) -> f64 {
        self.tau_with_level(self.level(), u)
    }

    fn tau_with_level(&self, c: f64, u: f64) -> f64 {
        c + self.open_amplitude * (-self.open_decay * u).exp()
            + self.close_amplitude * (-self.close_decay * (1.0 - u)).exp()
    }

    /// Intraday fraction of slot `slot` (0-based): its midpoint.
    pub fn slot_fraction(slot: usize, m: usize) -> f64 {
        (slot as f64 + 0.5) / m as f64
    }

    /// `tau` at each of the `m` slot midpoints.
    pub fn slot_factors(&self, m: usize) -> Vec<f64> {
        let c = self.level();
        (0..m)
            .map(|i| self.tau_with_level(c, Self::slot_fraction(i, m)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesParams {
    /// Baseline intensity, events per year.
    pub mu: f64,
    /// Jump in intensity per event.
    pub alpha: f64,
    /// Decay rate per year.
    pub beta: f64,
}

impl Default for HawkesParams {
    fn default() -> Self {
        Self {
            mu: 25.0,
            alpha: 1000.0,
            beta: 2000.0,
        }
    }
}

impl HawkesParams {
    pub fn none() -> Self {
        Self {
            mu: 0.0,
            ..Self::default()
        }
    }

    /// Stationary mean intensity `mu / (1 - alpha/beta)`.
    pub fn mean_intensity(&self) -> f64 {
        self.mu / (1.0 - self.alpha / self.beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSizeParams {
    pub mean: f64,
    pub std_dev: f64,
}

impl Default for JumpSizeParams {
    fn default() -> Self {
        Self {
            mean: -0.004,
            std_dev: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub m: usize,
    pub days: usize,
    pub delta: f64,
    pub sv: SvParams,
    pub diurnal: DiurnalShape,
    pub hawkes: HawkesParams,
    pub jump_size: JumpSizeParams,
    /// Constant drift per year.
    pub drift: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_SLOTS_PER_DAY,
            days: 252,
            delta: default_delta(DEFAULT_SLOTS_PER_DAY),
            sv: SvParams::default(),
            diurnal: DiurnalShape::default(),
            hawkes: HawkesParams::default(),
            jump_size: JumpSizeParams::default(),
            drift: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Constant volatility `sigma`, no intraday pattern, no jumps.
    pub fn constant_volatility(sigma: f64, m: usize, days: usize, seed: u64) -> Self {
        Self {
            m,
            days,
            delta: default_delta(m),
            sv: SvParams::constant(sigma * sigma),
            diurnal: DiurnalShape::flat(),
            hawkes: HawkesParams::none(),
            drift: 0.0,
            seed,
            ..Self::default()
        }
    }

    /// Simulated span in years.
    pub fn horizon(&self) -> f64 {
        (self.m * self.days) as f64 * self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    field,
                    format!("must be finite and >= 0, got {v}"),
                ))
            }
        };
        if self.m < 2 {
            return Err(Error::config(
                "m",
                format!("must be at least 2, got {}", self.m),
            ));
        }
        if self.days == 0 {
            return Err(Error::config("days", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(
                "delta",
                format!("must be in (0, 1), got {}", self.delta),
            ));
        }
        nonneg("sv.theta", self.sv.theta)?;
        nonneg("sv.kappa", self.sv.kappa)?;
        nonneg("sv.xi", self.sv.xi)?;
        nonneg("sv.v0", self.sv.v0)?;
        if !(-1.0..=0.0).contains(&self.sv.rho) {
            return Err(Error::config(
                "sv.rho",
                format!("must be in [-1, 0], got {}", self.sv.rho),
            ));
        }
        nonneg("hawkes.mu", self.hawkes.mu)?;
        nonneg("hawkes.alpha", self.hawkes.alpha)?;
        if !(self.hawkes.beta.is_finite() && self.hawkes.alpha < self.hawkes.beta) {
            return Err(Error::config(
                "hawkes.alpha",
                format!(
                    "alpha {} must be below beta {} for a stationary process",
                    self.hawkes.alpha, self.hawkes.beta
                ),
            ));
        }
        nonneg("jump_size.std_dev", self.jump_size.std_dev)?;
        if !self.jump_size.mean.is_finite() {
            return Err(Error::config("jump_size.mean", "must be finite"));
        }
        if !self.drift.is_finite() {
            return Err(Error::config("drift", "must be finite"));
        }
        let d = &self.diurnal;
        for (field, v) in [
            ("diurnal.open_amplitude", d.open_amplitude),
            ("diurnal.open_decay", d.open_decay),
            ("diurnal.close_amplitude", d.close_amplitude),
            ("diurnal.close_decay", d.close_decay),
        ] {
            if !v.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        let c = d.level();
        if !c.is_finite() {
            return Err(Error::config(
                "diurnal.level",
                "no level normalizes tau^2 to one",
            ));
        }
        let min_tau = (0..=1000)
            .map(|k| d.tau_with_level(c, k as f64 / 1000.0))
            .chain(d.slot_factors(self.m))
            .fold(f64::INFINITY, f64::min);
        if min_tau.is_nan() || min_tau <= 0.0 {
            return Err(Error::config(
                "diurnal",
                format!("tau must be positive on [0, 1], minimum is {min_tau}"),
            ));
        }
        Ok(())
    }
}
