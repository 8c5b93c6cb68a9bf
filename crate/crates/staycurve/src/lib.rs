//! Stay-point detection for GPS trajectories via displacement-curve analysis.
//!
//! A day of GPS fixes is rewritten as a 2D curve of cumulative travel
//! distance (km) against time of day (minutes since midnight). Stops are
//! flat stretches of that curve, so the detector differentiates the curve on
//! its non-uniform time grid, brackets candidate stops between
//! zero-crossings of the second derivative, scores each bracket with a
//! 0–100 confidence comparing first-derivative values against the day's
//! minimum speed, and classifies brackets as stays (confidence ≥ 80),
//! candidate stays ([60, 80)), or inflections — slow-downs without a stop —
//! which are kept but flagged so evaluation tooling can study them.
//!
//! Modules:
//! - [`io`]: CSV/GPX parsing, day splitting, ground-truth stay logs.
//! - [`curve`]: the trajectory → displacement-curve transform.
//! - [`deriv`]: non-uniform finite differences and the zero-crossing scan.
//! - [`detect`]: confidence scoring, classification, duration estimation.
//! - [`stream`]: online variant emitting the same records as samples arrive.
//! - [`baseline`]: classic distance/time-threshold detector for comparison.
//! - [`synth`]: scenario-driven trajectory generator with known ground truth.
//! - [`eval`]: detected-vs-truth matching and accuracy reporting.

pub mod baseline;
pub mod curve;
pub mod deriv;
pub mod detect;
pub mod error;
pub mod eval;
pub mod geo;
pub mod io;
pub mod stream;
pub mod synth;

pub use baseline::{threshold_detect, ThresholdConfig};
pub use curve::{to_spatial_curve, CurvePoint, SpatialCurve};
pub use deriv::{
    first_derivative, second_derivative, zero_crossing_regions, DerivativeSeries,
    ZeroCrossingRegion,
};
pub use detect::{
    classify, detect, estimate_duration, point_confidence, region_confidence,
    representative_coordinate, D1MinMode, DetectorConfig, StayClass, StayPoint,
};
pub use error::{Error, Result};
pub use eval::{match_stays, report, EvalReport, MatchConfig, MatchedPair};
pub use io::{
    parse_gpx, parse_ground_truth, parse_sample_fields, parse_trajectory_csv, split_by_day,
    write_ground_truth_csv, write_trajectory_csv, GroundTruthStay, LocationSample, Trajectory,
};
pub use stream::StreamingDetector;
pub use synth::{generate, PolicyKind, SamplingPolicy, Scenario, Segment};
