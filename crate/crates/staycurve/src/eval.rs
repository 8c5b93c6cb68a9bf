//! Scoring detector output against ground truth.
//!
//! Detected stays are matched one-to-one to ground-truth stays per day by
//! greatest temporal overlap, gated by a distance radius. The report
//! aggregates recall ("success rate"), false positives, signed duration
//! deviation over matched pairs, and descriptive statistics of the
//! inflection-class regions (slowdowns that were correctly not promoted to
//! stays).

use serde::Serialize;

use crate::detect::{StayClass, StayPoint};
use crate::geo::haversine_km;
use crate::io::GroundTruthStay;

/// Gates for admitting a detected/truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Maximum distance between the detected coordinate and the truth
    /// coordinate, metres.
    pub radius_m: f64,
    /// Minimum temporal overlap, minutes.
    pub min_overlap_min: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            radius_m: 500.0,
            min_overlap_min: 1.0,
        }
    }
}

/// One matched detected/truth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    /// Index into the truth list.
    pub truth_index: usize,
    /// Index into the detected list (always a Stay-class record).
    pub detected_index: usize,
    /// Temporal overlap, minutes.
    pub overlap_min: f64,
}

/// Greedy one-to-one matching of detected Stay records to ground truth.
///
/// A pair is admissible when both lie on the same day, their time spans
/// overlap by at least `min_overlap_min`, and their coordinates are within
/// `radius_m`. Admissible pairs are taken in order of descending overlap
/// (ties broken by list position, for determinism); each truth entry and
/// each detected record matches at most once. Candidate- and
/// inflection-class records never match.
pub fn match_stays(
    detected: &[StayPoint],
    truth: &[GroundTruthStay],
    cfg: &MatchConfig,
) -> Vec<MatchedPair> {
    let mut admissible = Vec::new();
    for (ti, t) in truth.iter().enumerate() {
        for (di, d) in detected.iter().enumerate() {
            if d.class != StayClass::Stay || d.day != t.day {
                continue;
            }
            let overlap = d.end_minute.min(t.departure_min) - d.start_minute.max(t.arrival_min);
            if overlap < cfg.min_overlap_min {
                continue;
            }
            let dist_m = haversine_km(d.latitude, d.longitude, t.latitude, t.longitude) * 1000.0;
            if dist_m > cfg.radius_m {
                continue;
            }
            admissible.push(MatchedPair {
                truth_index: ti,
                detected_index: di,
                overlap_min: overlap,
            });
        }
    }
    admissible.sort_by(|a, b| {
        b.overlap_min
            .total_cmp(&a.overlap_min)
            .then(a.truth_index.cmp(&b.truth_index))
            .then(a.detected_index.cmp(&b.detected_index))
    });

    let mut truth_used = vec![false; truth.len()];
    let mut detected_used = vec![false; detected.len()];
    let mut pairs = Vec::new();
    for pair in admissible {
        if truth_used[pair.truth_index] || detected_used[pair.detected_index] {
            continue;
        }
        truth_used[pair.truth_index] = true;
        detected_used[pair.detected_index] = true;
        pairs.push(pair);
    }
    pairs.sort_by_key(|p| p.truth_index);
    pairs
}

/// Descriptive statistics of inflection-class regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InflectionStats {
    pub count: usize,
    pub min_duration_min: Option<f64>,
    pub max_duration_min: Option<f64>,
    pub avg_duration_min: Option<f64>,
    /// How many lasted at least five minutes (long enough that a naive
    /// time-threshold method would report them as stays).
    pub count_at_least_5_min: usize,
}

/// Aggregated evaluation metrics.
///
/// Ratio fields are `None` when their denominator is empty (no truth, no
/// detected stays, no matches) rather than a misleading zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n_truth: usize,
    pub n_detected_stays: usize,
    pub n_candidates: usize,
    pub n_inflections: usize,
    pub n_matched: usize,
    /// Matched truth stays / all truth stays, percent.
    pub success_rate_pct: Option<f64>,
    /// Unmatched detected stays / all detected stays, percent.
    pub false_positive_pct: Option<f64>,
    /// Mean signed (estimated − actual) duration error, percent of actual.
    pub duration_dev_avg_pct: Option<f64>,
    pub duration_dev_std_pct: Option<f64>,
    /// Mean signed (estimated − actual) duration error, minutes.
    pub duration_dev_avg_min: Option<f64>,
    pub duration_dev_std_min: Option<f64>,
    pub inflection: InflectionStats,
}

fn mean_and_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Match and aggregate in one step.
pub fn report(detected: &[StayPoint], truth: &[GroundTruthStay], cfg: &MatchConfig) -> EvalReport {
    let pairs = match_stays(detected, truth, cfg);

    let n_detected_stays = detected
        .iter()
        .filter(|d| d.class == StayClass::Stay)
        .count();
    let n_candidates = detected
        .iter()
        .filter(|d| d.class == StayClass::Candidate)
        .count();

    let mut dev_min = Vec::with_capacity(pairs.len());
    let mut dev_pct = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let actual = truth[pair.truth_index].departure_min - truth[pair.truth_index].arrival_min;
        let dev = detected[pair.detected_index].estimated_duration_min - actual;
        dev_min.push(dev);
        if actual > 0.0 {
            dev_pct.push(dev / actual * 100.0);
        }
    }
    let min_stats = mean_and_std(&dev_min);
    let pct_stats = mean_and_std(&dev_pct);

    let inflection_durations: Vec<f64> = detected
        .iter()
        .filter(|d| d.class == StayClass::Inflection)
        .map(|d| d.estimated_duration_min)
        .collect();
    let inflection = InflectionStats {
        count: inflection_durations.len(),
        min_duration_min: inflection_durations.iter().copied().min_by(f64::total_cmp),
        max_duration_min: inflection_durations.iter().copied().max_by(f64::total_cmp),
        avg_duration_min: mean_and_std(&inflection_durations).map(|(m, _)| m),
        count_at_least_5_min: inflection_durations.iter().filter(|&&d| d >= 5.0).count(),
    };

    EvalReport {
        n_truth: truth.len(),
        n_detected_stays,
        n_candidates,
        n_inflections: inflection.count,
        n_matched: pairs.len(),
        success_rate_pct: (!truth.is_empty())
            .then(|| pairs.len() as f64 / truth.len() as f64 * 100.0),
        false_positive_pct: (n_detected_stays > 0)
            .then(|| (n_detected_stays - pairs.len()) as f64 / n_detected_stays as f64 * 100.0),
        duration_dev_avg_pct: pct_stats.map(|(m, _)| m),
        duration_dev_std_pct: pct_stats.map(|(_, s)| s),
        duration_dev_avg_min: min_stats.map(|(m, _)| m),
        duration_dev_std_min: min_stats.map(|(_, s)| s),
        inflection,
    }
}

impl EvalReport {
    /// Human-readable aligned table.
    pub fn render_table(&self) -> String {
        fn pct(v: Option<f64>) -> String {
            v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
        }
        let mut out = String::new();
        let mut row = |label: &str, value: String| {
            out.push_str(&format!("{label:<28} {value:>10}\n"));
        };
        row("truth stays", self.n_truth.to_string());
        row("detected stays", self.n_detected_stays.to_string());
        row("candidates", self.n_candidates.to_string());
        row("inflections", self.n_inflections.to_string());
        row("matched", self.n_matched.to_string());
        row("success rate (%)", pct(self.success_rate_pct));
        row("false positives (%)", pct(self.false_positive_pct));
        row("duration dev avg (%)", pct(self.duration_dev_avg_pct));
        row("duration dev std (%)", pct(self.duration_dev_std_pct));
        row("duration dev avg (min)", pct(self.duration_dev_avg_min));
        row("duration dev std (min)", pct(self.duration_dev_std_min));
        row(
            "inflection min (min)",
            pct(self.inflection.min_duration_min),
        );
        row(
            "inflection max (min)",
            pct(self.inflection.max_duration_min),
        );
        row(
            "inflection avg (min)",
            pct(self.inflection.avg_duration_min),
        );
        row(
            "inflections >= 5 min",
            self.inflection.count_at_least_5_min.to_string(),
        );
        out
    }
}
