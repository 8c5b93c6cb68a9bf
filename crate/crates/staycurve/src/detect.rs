//! Stay-point extraction from a day's displacement curve.
//!
//! Pipeline: build the curve, differentiate it twice, find spans where the
//! second derivative swings negative (deceleration that has not yet turned
//! back into acceleration), score each span by how flat the curve is inside
//! it, and classify the score against fixed thresholds. A flat curve means
//! no distance accumulated over elapsed time — the signature of a stay.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curve::{to_spatial_curve, SpatialCurve};
use crate::deriv::{zero_crossing_regions, DerivativeSeries};
use crate::io::Trajectory;

/// How the divisor that scales confidence decay is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum D1MinMode {
    /// The day's smallest first-derivative value, floored at
    /// `d1_min_floor`. Requires the whole day up front.
    #[default]
    DayMinimum,
    /// Always `d1_min_floor`. Usable online; the streaming detector fixes
    /// this mode so its results can be compared record-for-record against
    /// batch runs.
    Constant,
}

/// Tuning knobs for stay-point detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Slope below which a curve point counts as fully stationary, km/min.
    pub e: f64,
    /// Minimum confidence for the Stay class, percent.
    pub stay_threshold: f64,
    /// Minimum confidence for the Candidate class, percent.
    pub candidate_threshold: f64,
    /// Lower bound for the confidence-decay divisor, km/min.
    pub d1_min_floor: f64,
    /// Assumed speed for converting boundary displacement into travel time
    /// when estimating stay duration, km/h.
    pub travel_speed_kmh: f64,
    pub d1_min_mode: D1MinMode,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            e: 0.05,
            stay_threshold: 80.0,
            candidate_threshold: 60.0,
            d1_min_floor: 0.001,
            travel_speed_kmh: 50.0,
            d1_min_mode: D1MinMode::DayMinimum,
        }
    }
}

/// Classification of a detected region by its confidence score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StayClass {
    /// Confidence at or above the stay threshold: a genuine stop.
    Stay,
    /// Confidence in the candidate band: plausibly a stop, needs review.
    Candidate,
    /// Everything below: a slowdown that never became a stop.
    Inflection,
}

impl fmt::Display for StayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StayClass::Stay => "stay",
            StayClass::Candidate => "candidate",
            StayClass::Inflection => "inflection",
        })
    }
}

/// One detected stop (or slowdown) with its span, score, and location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StayPoint {
    pub day: NaiveDate,
    /// Curve index span `[k, w]` the record was built from. Internal
    /// bookkeeping; not part of the serialized record.
    #[serde(skip, default)]
    pub region: (usize, usize),
    pub start_minute: f64,
    pub end_minute: f64,
    pub estimated_duration_min: f64,
    #[serde(rename = "lat")]
    pub latitude: f64,
    #[serde(rename = "lon")]
    pub longitude: f64,
    pub confidence: f64,
    pub class: StayClass,
}

/// Confidence that a single curve point belongs to a stay, in percent.
///
/// Points at or below the flatness threshold `e` score 100. Above it the
/// score drops linearly at a rate set by `d1_min` (how slow the user's
/// slowest moment was that day), bottoming out at 0. Callers must floor
/// `d1_min` (see [`DetectorConfig::d1_min_floor`]) so the division is safe.
pub fn point_confidence(d1: f64, d1_min: f64, e: f64) -> f64 {
    let d1 = d1.max(0.0);
    if d1 <= e {
        return 100.0;
    }
    let ratio = (d1 - e) / d1_min;
    if ratio > 100.0 {
        0.0
    } else {
        (100.0 - ratio).clamp(0.0, 100.0)
    }
}

/// Best-scoring stay span inside the index window `[i, j]`.
///
/// The best mean confidence over all subregions of `[i, j]` is always
/// attained by a singleton — the maximum element — so `value` is that
/// maximum. To report a span useful for duration estimation, `[k, w]` is
/// grown outward from the leftmost argmax while per-point confidence stays
/// at or above `min(stay_threshold, value)`. Runs in O(j − i + 1).
pub fn region_confidence(
    confidences: &[f64],
    i: usize,
    j: usize,
    stay_threshold: f64,
) -> (usize, usize, f64) {
    assert!(i <= j && j < confidences.len(), "region out of bounds");
    let mut m = i;
    for idx in i..=j {
        if confidences[idx] > confidences[m] {
            m = idx;
        }
    }
    let value = confidences[m];
    let bar = stay_threshold.min(value);
    let mut k = m;
    while k > i && confidences[k - 1] >= bar {
        k -= 1;
    }
    let mut w = m;
    while w < j && confidences[w + 1] >= bar {
        w += 1;
    }
    (k, w, value)
}

/// Map a region confidence to its class.
pub fn classify(value: f64, cfg: &DetectorConfig) -> StayClass {
    if value >= cfg.stay_threshold {
        StayClass::Stay
    } else if value >= cfg.candidate_threshold {
        StayClass::Candidate
    } else {
        StayClass::Inflection
    }
}

/// Core duration rule shared by the batch and streaming detectors, phrased
/// on raw `(x, y)` pairs so both can call it with bit-identical inputs.
///
/// The stay lasts at least `x_w − x_k`. Each gap to an adjacent sample
/// (when one exists) contributes whatever portion of the gap cannot be
/// explained as travel at `travel_speed_kmh` over the displacement covered.
pub(crate) fn duration_from_span(
    before: Option<(f64, f64)>,
    first: (f64, f64),
    last: (f64, f64),
    after: Option<(f64, f64)>,
    travel_speed_kmh: f64,
) -> f64 {
    let travel_minutes = |d_km: f64| d_km / (travel_speed_kmh / 60.0);
    let mut duration = last.0 - first.0;
    if let Some((xb, yb)) = before {
        duration += ((first.0 - xb) - travel_minutes(first.1 - yb)).max(0.0);
    }
    if let Some((xa, ya)) = after {
        duration += ((xa - last.0) - travel_minutes(ya - last.1)).max(0.0);
    }
    duration
}

/// Estimated stay duration for curve span `[k, w]`, in minutes.
pub fn estimate_duration(curve: &SpatialCurve, k: usize, w: usize, cfg: &DetectorConfig) -> f64 {
    let p = &curve.points;
    assert!(k <= w && w < p.len(), "span out of bounds");
    let before = (k >= 1).then(|| (p[k - 1].x, p[k - 1].y));
    let after = (w + 1 < p.len()).then(|| (p[w + 1].x, p[w + 1].y));
    duration_from_span(
        before,
        (p[k].x, p[k].y),
        (p[w].x, p[w].y),
        after,
        cfg.travel_speed_kmh,
    )
}

/// Arithmetic mean of coordinates, accumulated in iteration order (the
/// batch and streaming detectors feed the same order, so results match
/// exactly).
pub(crate) fn mean_coordinate<I: Iterator<Item = (f64, f64)>>(coords: I) -> (f64, f64) {
    let mut lat = 0.0;
    let mut lon = 0.0;
    let mut n = 0usize;
    for (la, lo) in coords {
        lat += la;
        lon += lo;
        n += 1;
    }
    (lat / n as f64, lon / n as f64)
}

/// Mean coordinate of samples `k..=w`, the representative stay location.
pub fn representative_coordinate(trajectory: &Trajectory, k: usize, w: usize) -> (f64, f64) {
    mean_coordinate(
        trajectory.samples[k..=w]
            .iter()
            .map(|s| (s.latitude, s.longitude)),
    )
}

/// Detect stay-points in one day of samples.
///
/// Returns every scored region — Stay, Candidate, and Inflection — in
/// start-time order; callers filter by class as needed. Days with fewer
/// than two samples yield nothing. A day whose entire travelled distance
/// stays under `cfg.e` km has a flat curve with no sign changes to find, so
/// it is reported directly as one full-span Stay with confidence 100.
pub fn detect(trajectory: &Trajectory, cfg: &DetectorConfig) -> Vec<StayPoint> {
    let n = trajectory.samples.len();
    if n < 2 {
        return Vec::new();
    }
    let curve = to_spatial_curve(trajectory);
    if curve.total_distance_km() < cfg.e {
        let (lat, lon) = representative_coordinate(trajectory, 0, n - 1);
        let first = curve.points[0].x;
        let last = curve.points[n - 1].x;
        return vec![StayPoint {
            day: trajectory.day,
            region: (0, n - 1),
            start_minute: first,
            end_minute: last,
            estimated_duration_min: last - first,
            latitude: lat,
            longitude: lon,
            confidence: 100.0,
            class: StayClass::Stay,
        }];
    }

    let series = DerivativeSeries::of(&curve).expect("at least two samples");
    let d1_min = match cfg.d1_min_mode {
        D1MinMode::DayMinimum => series.d1_min.max(cfg.d1_min_floor),
        D1MinMode::Constant => cfg.d1_min_floor,
    };
    // Score in place: the slope column is not needed once each entry has
    // been mapped to its confidence.
    let mut confidences = series.d1;
    for c in &mut confidences {
        *c = point_confidence(*c, d1_min, cfg.e);
    }

    let mut stays = Vec::new();
    for region in zero_crossing_regions(&series.d2) {
        let (k, w, value) =
            region_confidence(&confidences, region.start, region.end, cfg.stay_threshold);
        let (lat, lon) = representative_coordinate(trajectory, k, w);
        stays.push(StayPoint {
            day: trajectory.day,
            region: (k, w),
            start_minute: curve.points[k].x,
            end_minute: curve.points[w].x,
            estimated_duration_min: estimate_duration(&curve, k, w, cfg),
            latitude: lat,
            longitude: lon,
            confidence: value,
            class: classify(value, cfg),
        });
    }
    stays
}
