use serde::{Deserialize, Serialize};

use super::SimPath;
use crate::detector::JumpReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeErrorStats {
    pub count: usize,
    /// Mean of `estimated - true`.
    pub mean: f64,
    pub mean_abs: f64,
    pub rmse: f64,
}

/// Detection quality against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub tolerance_slots: usize,
    pub detected: usize,
    pub actual: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `None` when nothing was detected.
    pub precision: Option<f64>,
    /// `None` when there is nothing to find.
    pub recall: Option<f64>,
    /// Matched `(detected, true)` 0-based index pairs.
    pub matches: Vec<(usize, usize)>,
    pub size_error: Option<SizeErrorStats>,
}

/// Matches detected to true indices within `tolerance` slots, each true jump
/// used at most once.
///
/// Detections are swept in increasing order and each takes the earliest
/// still-unmatched true jump in its window. For windows of equal width this
/// greedy sweep finds a maximum matching, so widening the tolerance never
/// lowers the number of matches.
pub fn evaluate_indices(
    detected: &[usize],
    detected_sizes: &[f64],
    truth: &[usize],
    true_sizes: &[f64],
    tolerance: usize,
) -> Result<ConfusionSummary> {
    if detected.len() != detected_sizes.len() || truth.len() != true_sizes.len() {
        return Err(Error::Structural(
            "indices and sizes differ in length".into(),
        ));
    }
    let mut det_order: Vec<usize> = (0..detected.len()).collect();
    det_order.sort_by_key(|&k| detected[k]);
    let mut true_order: Vec<usize> = (0..truth.len()).collect();
    true_order.sort_by_key(|&k| truth[k]);

    let mut matched_pairs: Vec<(usize, usize)> = Vec::new();
    let mut errors = Vec::new();
    let mut next = 0;
    for &dk in &det_order {
        let d = detected[dk];
        while next < true_order.len() && truth[true_order[next]] + tolerance < d {
            next += 1;
        }
        if next < true_order.len() && truth[true_order[next]] <= d + tolerance {
            let tk = true_order[next];
            matched_pairs.push((d, truth[tk]));
            errors.push(detected_sizes[dk] - true_sizes[tk]);
            next += 1;
        }
    }

    let tp = matched_pairs.len();
    let size_error = (!errors.is_empty()).then(|| {
        let k = errors.len() as f64;
        SizeErrorStats {
            count: errors.len(),
            mean: errors.iter().sum::<f64>() / k,
            mean_abs: errors.iter().map(|e| e.abs()).sum::<f64>() / k,
            rmse: (errors.iter().map(|e| e * e).sum::<f64>() / k).sqrt(),
        }
    });
    Ok(ConfusionSummary {
        tolerance_slots: tolerance,
        detected: detected.len(),
        actual: truth.len(),
        true_positives: tp,
        false_positives: detected.len() - tp,
        false_negatives: truth.len() - tp,
        precision: (!detected.is_empty()).then(|| tp as f64 / detected.len() as f64),
        recall: (!truth.is_empty()).then(|| tp as f64 / truth.len() as f64),
        matches: matched_pairs,
        size_error,
    })
}

/// Scores `report` against the jumps planted in `path`.
pub fn evaluate_detection(
    path: &SimPath,
    report: &JumpReport,
    tolerance_slots: usize,
) -> Result<ConfusionSummary> {
    if path.grid.m() != report.m || path.grid.days() != report.days {
        return Err(Error::Structural(format!(
            "simulated grid is {}x{}, report is {}x{}",
            path.grid.m(),
            path.grid.days(),
            report.m,
            report.days
        )));
    }
    evaluate_indices(
        &report.jump_indices,
        &report.sizes_deterministic,
        &path.true_jump_indices,
        &path.true_jump_sizes,
        tolerance_slots,
    )
}
