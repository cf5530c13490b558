//! Recursive threshold jump detection.
//!
//! A return is flagged when its absolute value exceeds
//! `round_multiplier * TOD(slot) * sigma_hat(day) * mc`, where `mc` is the
//! Brownian modulus of continuity over one slot. `sigma_hat` starts from a
//! crude truncation at `raw_multiplier * bar_alpha * mc` and is re-estimated
//! after every round with the flagged returns removed. Rounds continue until
//! one adds nothing new.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ReturnGrid;
use crate::spotvol::{daily_spot_variance, expand_daily};
use crate::tod::{
    cap_tod, expand_tod, tod_profile, TodProfile, DEFAULT_TOD_CAP, DEFAULT_TRUNCATION_EXPONENT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub raw_multiplier: f64,
    pub round_multiplier: f64,
    pub tod_cap: f64,
    pub max_rounds: usize,
    pub truncation_exponent: f64,
    /// Seed for the randomized jump-size estimate; `None` skips it.
    pub size_seed: Option<u64>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            raw_multiplier: 6.0,
            round_multiplier: 2.0,
            tod_cap: DEFAULT_TOD_CAP,
            max_rounds: 20,
            truncation_exponent: DEFAULT_TRUNCATION_EXPONENT,
            size_seed: None,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        positive("raw_multiplier", self.raw_multiplier)?;
        positive("round_multiplier", self.round_multiplier)?;
        positive("tod_cap", self.tod_cap)?;
        if !self.truncation_exponent.is_finite() {
            return Err(Error::config("truncation_exponent", "must be finite"));
        }
        if self.max_rounds == 0 {
            return Err(Error::config("max_rounds", "must be at least 1"));
        }
        Ok(())
    }
}

/// One detection round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// 0-based flat indices first flagged in this round, increasing.
    pub new_indices: Vec<usize>,
    pub thresholds: Vec<f64>,
    /// Daily squared-volatility estimate the thresholds were built from.
    pub sigmaq_daily: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub m: usize,
    pub days: usize,
    pub delta: f64,
    /// 0-based flat indices, strictly increasing.
    pub jump_indices: Vec<usize>,
    /// `delta * j` with `j` the 1-based index of the return.
    pub jump_times: Vec<f64>,
    /// Round in which each jump was flagged (1-based), aligned with `jump_indices`.
    pub detected_in_round: Vec<usize>,
    /// Threshold each jump exceeded, aligned with `jump_indices`.
    pub threshold_at_detection: Vec<f64>,
    pub jump_returns: Vec<f64>,
    pub rounds: Vec<RoundRecord>,
    pub sizes_deterministic: Vec<f64>,
    pub sizes_randomized: Option<Vec<f64>>,
    pub size_seed: Option<u64>,
    /// Daily squared volatility used for the size estimates.
    pub sigmaq_final: Vec<f64>,
    pub modulus_mc: f64,
    pub raw_threshold: f64,
    pub bar_alpha: f64,
    /// Capped TOD factors used in the thresholds.
    pub tod: Vec<f64>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl JumpReport {
    pub fn total(&self) -> usize {
        self.jump_indices.len()
    }

    pub fn round_counts(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.new_indices.len()).collect()
    }
}

/// `sqrt(2 delta log(1/delta))`.
pub fn modulus_of_continuity(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "modulus of continuity needs 0 < delta < 1, got {delta}"
        )));
    }
    Ok((2.0 * delta * (1.0 / delta).ln()).sqrt())
}

/// `raw_multiplier * bar_alpha * mc`, one level for every observation.
pub fn initial_raw_threshold(bar_alpha: f64, delta: f64, raw_multiplier: f64) -> Result<f64> {
    Ok(raw_multiplier * bar_alpha * modulus_of_continuity(delta)?)
}

/// `round_multiplier * tod(j) * sqrt(sigmaq(j)) * mc` for every observation.
pub fn round_thresholds(
    tod_glob: &[f64],
    sigmaq_glob: &[f64],
    delta: f64,
    round_multiplier: f64,
) -> Result<Vec<f64>> {
    if tod_glob.len() != sigmaq_glob.len() {
        return Err(Error::Structural(format!(
            "{} TOD factors vs {} variances",
            tod_glob.len(),
            sigmaq_glob.len()
        )));
    }
    let mc = modulus_of_continuity(delta)?;
    Ok(tod_glob
        .iter()
        .zip(sigmaq_glob)
        .map(|(t, s)| round_multiplier * t * s.sqrt() * mc)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeMode {
    /// Subtract `sigma_hat * sqrt(delta)`.
    Deterministic,
    /// Subtract `sigma_hat * Z * sqrt(delta)` with `Z` standard normal.
    Randomized,
}

/// Jump sizes net of an estimated Brownian contribution.
pub fn jump_sizes(
    grid: &ReturnGrid,
    sigmaq_glob: &[f64],
    jump_indices: &[usize],
    mode: SizeMode,
    seed: u64,
) -> Result<Vec<f64>> {
    if sigmaq_glob.len() != grid.len() {
        return Err(Error::Structural(format!(
            "{} variances for {} returns",
            sigmaq_glob.len(),
            grid.len()
        )));
    }
    if let Some(&bad) = jump_indices.iter().find(|&&j| j >= grid.len()) {
        return Err(Error::Structural(format!(
            "jump index {bad} out of range for {} returns",
            grid.len()
        )));
    }
    let sqrt_delta = grid.delta().sqrt();
    let r = grid.returns();
    Ok(match mode {
        SizeMode::Deterministic => jump_indices
            .iter()
            .map(|&j| r[j] - sigmaq_glob[j].sqrt() * sqrt_delta)
            .collect(),
        SizeMode::Randomized => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            jump_indices
                .iter()
                .map(|&j| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    r[j] - sigmaq_glob[j].sqrt() * z * sqrt_delta
                })
                .collect()
        }
    })
}

fn undefined_profile(m: usize) -> TodProfile {
    TodProfile {
        tod: vec![None; m],
        bar_alpha: 0.0,
        den_noi: vec![0; m],
        numer_tod: vec![0.0; m],
        num_noi: 0,
        den_tod: 0.0,
        filled_slots: Vec::new(),
    }
}

/// Runs the full detection procedure on `grid`.
pub fn detect_jumps(grid: &ReturnGrid, config: &DetectorConfig) -> Result<JumpReport> {
    config.validate()?;
    let delta = grid.delta();
    let n = grid.len();
    let r = grid.returns();
    let mc = modulus_of_continuity(delta)?;
    let mut warnings = Vec::new();

    let profile = match tod_profile(grid, config.truncation_exponent) {
        Ok(p) => p,
        Err(Error::Degenerate(msg)) => {
            warnings.push(format!("{msg}; using the TOD cap for every slot"));
            undefined_profile(grid.m())
        }
        Err(e) => return Err(e),
    };
    let capped = cap_tod(&profile, config.tod_cap)?;
    if profile.den_tod > 0.0 && !capped.filled_slots.is_empty() {
        warnings.push(format!(
            "TOD undefined at slots {:?}; replaced by cap {}",
            profile.undefined_slots(),
            config.tod_cap
        ));
    }
    let tod_glob = expand_tod(&capped, grid)?;

    let raw_threshold = initial_raw_threshold(profile.bar_alpha, delta, config.raw_multiplier)?;
    let raw_sq: Vec<f64> = r
        .iter()
        .map(|&x| if x.abs() <= raw_threshold { x * x } else { 0.0 })
        .collect();
    let mut sigmaq = daily_spot_variance(grid, &raw_sq)?;

    let mut detected_round = vec![0usize; n];
    let mut detected_threshold = vec![0.0f64; n];
    let mut test_series: Vec<f64> = r.to_vec();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut converged = false;

    for round in 1..=config.max_rounds {
        let sigmaq_glob = expand_daily(&sigmaq, grid)?;
        let thresholds = round_thresholds(&tod_glob, &sigmaq_glob, delta, config.round_multiplier)?;
        let new_indices: Vec<usize> = (0..n)
            .filter(|&j| detected_round[j] == 0 && test_series[j].abs() > thresholds[j])
            .collect();
        for &j in &new_indices {
            detected_round[j] = round;
            detected_threshold[j] = thresholds[j];
        }
        let done = new_indices.is_empty();

        if !done {
            // The next round tests, and re-estimates from, the raw returns
            // truncated at this round's thresholds.
            test_series = r
                .iter()
                .zip(&thresholds)
                .map(|(&x, &t)| if x.abs() <= t { x } else { 0.0 })
                .collect();
        }
        rounds.push(RoundRecord {
            round,
            new_indices,
            thresholds,
            sigmaq_daily: sigmaq.sigmaq_daily.clone(),
        });
        if done {
            converged = true;
            break;
        }
        let sq: Vec<f64> = test_series.iter().map(|x| x * x).collect();
        sigmaq = daily_spot_variance(grid, &sq)?;
    }
    if !converged {
        warnings.push(format!(
            "no convergence within {} rounds; last round still flagged new jumps",
            config.max_rounds
        ));
    }

    let jump_indices: Vec<usize> = (0..n).filter(|&j| detected_round[j] > 0).collect();
    let final_round = rounds.last().expect("max_rounds >= 1");
    let sigmaq_final = final_round.sigmaq_daily.clone();
    let sigmaq_final_glob = expand_daily(
        &crate::spotvol::SpotVolSeries {
            sigmaq_daily: sigmaq_final.clone(),
            bandwidth_slots: grid.m(),
        },
        grid,
    )?;
    let sizes_deterministic = jump_sizes(
        grid,
        &sigmaq_final_glob,
        &jump_indices,
        SizeMode::Deterministic,
        0,
    )?;
    let sizes_randomized = config
        .size_seed
        .map(|seed| {
            jump_sizes(
                grid,
                &sigmaq_final_glob,
                &jump_indices,
                SizeMode::Randomized,
                seed,
            )
        })
        .transpose()?;

    Ok(JumpReport {
        m: grid.m(),
        days: grid.days(),
        delta,
        jump_times: jump_indices.iter().map(|&j| grid.time(j)).collect(),
        detected_in_round: jump_indices.iter().map(|&j| detected_round[j]).collect(),
        threshold_at_detection: jump_indices
            .iter()
            .map(|&j| detected_threshold[j])
            .collect(),
        jump_returns: jump_indices.iter().map(|&j| r[j]).collect(),
        jump_indices,
        rounds,
        sizes_deterministic,
        sizes_randomized,
        size_seed: config.size_seed,
        sigmaq_final,
        modulus_mc: mc,
        raw_threshold,
        bar_alpha: profile.bar_alpha,
        tod: capped.tod.iter().map(|t| t.expect("capped")).collect(),
        converged,
        warnings,
    })
}
