//! On-disk formats. Every index written here is 1-based.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::JumpReport;
use crate::error::{Error, Result};
use crate::grid::ReturnGrid;
use crate::simulator::SimPath;
use crate::spotvol::SpotVolSeries;
use crate::tod::TodProfile;

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodProfileRecord {
    pub m: usize,
    pub bar_alpha: f64,
    pub tod: Vec<Option<f64>>,
    pub undefined_slots: Vec<usize>,
    pub num_noi: usize,
    pub den_tod: f64,
    pub den_noi: Vec<usize>,
    pub filled_slots: Vec<usize>,
}

impl From<&TodProfile> for TodProfileRecord {
    fn from(p: &TodProfile) -> Self {
        Self {
            m: p.m(),
            bar_alpha: p.bar_alpha,
            tod: p.tod.clone(),
            undefined_slots: p.undefined_slots(),
            num_noi: p.num_noi,
            den_tod: p.den_tod,
            den_noi: p.den_noi.clone(),
            filled_slots: p.filled_slots.iter().map(|s| s + 1).collect(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `slot,tod,den_noi`; undefined factors are left empty.
pub fn tod_csv(p: &TodProfile) -> String {
    let mut out = String::from("slot,tod,den_noi\n");
    for (i, (t, d)) in p.tod.iter().zip(&p.den_noi).enumerate() {
        writeln!(out, "{},{},{}", i + 1, opt(*t), d).unwrap();
    }
    out
}

/// `slot,tod` for plotting.
pub fn tod_plot_csv(p: &TodProfile) -> String {
    let mut out = String::from("slot,tod\n");
    for (i, t) in p.tod.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, opt(*t)).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotVolRecord {
    pub bandwidth_slots: usize,
    pub sigma_sq_annualized: Vec<f64>,
}

impl From<&SpotVolSeries> for SpotVolRecord {
    fn from(s: &SpotVolSeries) -> Self {
        Self {
            bandwidth_slots: s.bandwidth_slots,
            sigma_sq_annualized: s.sigmaq_daily.clone(),
        }
    }
}

/// `day,sigma_sq_annualized`.
pub fn spotvol_csv(s: &SpotVolSeries) -> String {
    let mut out = String::from("day,sigma_sq_annualized\n");
    for (d, v) in s.sigmaq_daily.iter().enumerate() {
        writeln!(out, "{},{}", d + 1, v).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecordJson {
    pub round: usize,
    pub new_detections: usize,
    pub new_indices: Vec<usize>,
    pub sigma_sq_daily: Vec<f64>,
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReportRecord {
    pub m: usize,
    pub days: usize,
    pub delta: f64,
    pub total_jumps: usize,
    pub round_counts: Vec<usize>,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub modulus_mc: f64,
    pub bar_alpha: f64,
    pub raw_threshold: f64,
    pub tod: Vec<f64>,
    pub jump_indices: Vec<usize>,
    pub jump_times: Vec<f64>,
    pub detected_in_round: Vec<usize>,
    pub threshold_at_detection: Vec<f64>,
    pub jump_returns: Vec<f64>,
    pub sizes_deterministic: Vec<f64>,
    pub sizes_randomized: Option<Vec<f64>>,
    pub size_seed: Option<u64>,
    pub sigma_sq_final: Vec<f64>,
    pub rounds: Vec<RoundRecordJson>,
}

impl From<&JumpReport> for JumpReportRecord {
    fn from(r: &JumpReport) -> Self {
        let one_based = |v: &[usize]| v.iter().map(|j| j + 1).collect::<Vec<_>>();
        Self {
            m: r.m,
            days: r.days,
            delta: r.delta,
            total_jumps: r.total(),
            round_counts: r.round_counts(),
            converged: r.converged,
            warnings: r.warnings.clone(),
            modulus_mc: r.modulus_mc,
            bar_alpha: r.bar_alpha,
            raw_threshold: r.raw_threshold,
            tod: r.tod.clone(),
            jump_indices: one_based(&r.jump_indices),
            jump_times: r.jump_times.clone(),
            detected_in_round: r.detected_in_round.clone(),
            threshold_at_detection: r.threshold_at_detection.clone(),
            jump_returns: r.jump_returns.clone(),
            sizes_deterministic: r.sizes_deterministic.clone(),
            sizes_randomized: r.sizes_randomized.clone(),
            size_seed: r.size_seed,
            sigma_sq_final: r.sigmaq_final.clone(),
            rounds: r
                .rounds
                .iter()
                .map(|k| RoundRecordJson {
                    round: k.round,
                    new_detections: k.new_indices.len(),
                    new_indices: one_based(&k.new_indices),
                    sigma_sq_daily: k.sigmaq_daily.clone(),
                    thresholds: k.thresholds.clone(),
                })
                .collect(),
        }
    }
}

impl JumpReportRecord {
    /// 0-based jump indices.
    pub fn zero_based_indices(&self) -> Result<Vec<usize>> {
        self.jump_indices
            .iter()
            .map(|&j| {
                j.checked_sub(1)
                    .ok_or_else(|| Error::Structural("jump index 0 in a 1-based report".into()))
            })
            .collect()
    }
}

/// `index,time_years,day,slot,return,threshold_at_detection,size_deterministic`,
/// plus `size_randomized` when `with_randomized` is set and sizes exist.
pub fn jumps_csv(r: &JumpReport, with_randomized: bool) -> String {
    let randomized = r.sizes_randomized.as_ref().filter(|_| with_randomized);
    let mut out =
        String::from("index,time_years,day,slot,return,threshold_at_detection,size_deterministic");
    if randomized.is_some() {
        out.push_str(",size_randomized");
    }
    out.push('\n');
    for (k, &j) in r.jump_indices.iter().enumerate() {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            j + 1,
            r.jump_times[k],
            j / r.m + 1,
            j % r.m + 1,
            r.jump_returns[k],
            r.threshold_at_detection[k],
            r.sizes_deterministic[k]
        )
        .unwrap();
        if let Some(sizes) = randomized {
            write!(out, ",{}", sizes[k]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `time_years,return,flagged` over every observation.
pub fn detection_plot_csv(grid: &ReturnGrid, r: &JumpReport) -> String {
    let mut flagged = vec![false; grid.len()];
    for &j in &r.jump_indices {
        flagged[j] = true;
    }
    let mut out = String::from("time_years,return,flagged\n");
    for (j, x) in grid.returns().iter().enumerate() {
        writeln!(out, "{},{},{}", grid.time(j), x, u8::from(flagged[j])).unwrap();
    }
    out
}

/// One return per line, in the format read by [`crate::grid::parse_returns`].
pub fn returns_text(grid: &ReturnGrid) -> String {
    let mut out = String::with_capacity(grid.len() * 24);
    for x in grid.returns() {
        writeln!(out, "{x}").unwrap();
    }
    out
}

/// Ground truth: `index,time_years,size`, one row per slot holding a jump.
pub fn truth_csv(path: &SimPath) -> String {
    let mut out = String::from("index,time_years,size\n");
    for (&j, &s) in path.true_jump_indices.iter().zip(&path.true_jump_sizes) {
        writeln!(out, "{},{},{}", j + 1, path.grid.time(j), s).unwrap();
    }
    out
}

/// Parses a truth CSV into 0-based indices and sizes.
pub fn parse_truth_csv(text: &str, source: &Path) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut indices = Vec::new();
    let mut sizes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(format!("expected 3 fields, got {}", fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| err(format!("bad index {:?}", fields[0])))?;
        if index == 0 {
            return Err(err("indices are 1-based".into()));
        }
        let size: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad size {:?}", fields[2])))?;
        indices.push(index - 1);
        sizes.push(size);
    }
    Ok((indices, sizes))
}
