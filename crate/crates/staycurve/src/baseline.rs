//! Classic distance/time-threshold stay-point detector, for comparison.
//!
//! The anchor-and-extend rule used by most prior stay-point extractors:
//! walk forward from an anchor sample while everything stays within a
//! distance radius of it; if the window covers enough elapsed time, it is a
//! stay. Simple and fast, but blind to how much ground was covered *inside*
//! the window — a slow loop through a parking lot reads the same as
//! standing still, which is exactly the failure mode the curve-based
//! detector avoids.

use crate::detect::representative_coordinate;
use crate::detect::{StayClass, StayPoint};
use crate::geo::haversine_km;
use crate::io::Trajectory;

/// Thresholds for the baseline detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    /// Window radius around the anchor sample, metres.
    pub distance_m: f64,
    /// Minimum elapsed time within the window, minutes.
    pub time_min: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            distance_m: 200.0,
            time_min: 20.0,
        }
    }
}

/// Detect stays by the anchor-and-extend threshold rule.
///
/// For each anchor index `a`, the window grows through every subsequent
/// sample within `distance_m` of the anchor. If the window's elapsed time
/// reaches `time_min`, a stay spanning it is emitted (mean coordinate,
/// confidence 100 — the method has no graded score) and the anchor jumps
/// past the window; otherwise the anchor advances one sample.
pub fn threshold_detect(trajectory: &Trajectory, cfg: &ThresholdConfig) -> Vec<StayPoint> {
    let samples = &trajectory.samples;
    let mut stays = Vec::new();
    let mut anchor = 0;
    while anchor < samples.len() {
        let a = &samples[anchor];
        let mut b = anchor + 1;
        while b < samples.len() {
            let d_m = haversine_km(
                a.latitude,
                a.longitude,
                samples[b].latitude,
                samples[b].longitude,
            ) * 1000.0;
            if d_m > cfg.distance_m {
                break;
            }
            b += 1;
        }
        let last = b - 1;
        let start_minute = a.minutes_since_midnight();
        let end_minute = samples[last].minutes_since_midnight();
        if last > anchor && end_minute - start_minute >= cfg.time_min {
            let (lat, lon) = representative_coordinate(trajectory, anchor, last);
            stays.push(StayPoint {
                day: trajectory.day,
                region: (anchor, last),
                start_minute,
                end_minute,
                estimated_duration_min: end_minute - start_minute,
                latitude: lat,
                longitude: lon,
                confidence: 100.0,
                class: StayClass::Stay,
            });
            anchor = b;
        } else {
            anchor += 1;
        }
    }
    stays
}
