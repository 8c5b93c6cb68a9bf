//! Synthetic trajectory generation with known ground truth.
//!
//! A [`Scenario`] scripts one day as an alternating sequence of stays and
//! constant-speed moves along great circles. A [`SamplingPolicy`] decides
//! when the simulated device reports a fix — by distance travelled, by
//! elapsed time, or both — and how much positional error to add. The
//! scenario's stay segments double as the ground truth, so detector output
//! can be scored without any real-world labels.

use std::collections::VecDeque;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_km, intermediate_point, offset_meters};
use crate::io::{GroundTruthStay, LocationSample, Trajectory};

/// Periodic report interval for distance-based policies, minutes. Real
/// trackers send a keepalive fix when nothing moves; without it a stay
/// would be invisible to a distance-triggered device.
const KEEPALIVE_MIN: f64 = 2.0;

/// Tolerance for "the stay is where the previous segment ended", km.
const POSITION_TOLERANCE_KM: f64 = 0.001;

/// One building block of a scripted day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    /// Remain at (`lat`, `lon`) — which must be where the previous segment
    /// ended — for `duration_min` minutes.
    Stay {
        lat: f64,
        lon: f64,
        duration_min: f64,
    },
    /// Travel to (`to_lat`, `to_lon`) along the great circle at a constant
    /// `speed_kmh`.
    Move {
        to_lat: f64,
        to_lon: f64,
        speed_kmh: f64,
    },
}

/// A scripted day of movement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub day: NaiveDate,
    /// Minutes after midnight at which the day's track begins.
    pub start_minute: f64,
    pub start_lat: f64,
    pub start_lon: f64,
    pub segments: Vec<Segment>,
}

/// When the simulated device reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    /// A fix every `d_m` metres of travel (plus the keepalive interval
    /// while stationary) — models a dedicated logger at a fixed density.
    EveryMeters { d_m: f64 },
    /// A fix every 500 m or `min_interval_min` minutes, whichever comes
    /// first, plus a burst of `burst` fixes at 1-minute spacing after each
    /// stay begins or ends — models a phone's significant-change service
    /// waking the full-rate GPS briefly.
    Hybrid { min_interval_min: f64, burst: u32 },
}

/// Sampling cadence plus positional error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub kind: PolicyKind,
    /// Isotropic Gaussian position error, metres (0 disables).
    pub noise_sigma_m: f64,
    /// Fraction of fixes replaced by an outlier reading.
    pub outlier_rate: f64,
    /// Maximum outlier displacement, metres.
    pub outlier_max_m: f64,
}

impl SamplingPolicy {
    /// Noise-free distance logger at `d_m` metres per fix.
    pub fn sls(d_m: f64) -> Self {
        Self {
            kind: PolicyKind::EveryMeters { d_m },
            noise_sigma_m: 0.0,
            outlier_rate: 0.0,
            outlier_max_m: 0.0,
        }
    }

    /// Noise-free hybrid phone-style policy: 500 m / 5 min with 3-fix
    /// wake-up bursts.
    pub fn hybrid() -> Self {
        Self {
            kind: PolicyKind::Hybrid {
                min_interval_min: 5.0,
                burst: 3,
            },
            noise_sigma_m: 0.0,
            outlier_rate: 0.0,
            outlier_max_m: 0.0,
        }
    }

    fn distance_trigger_m(&self) -> f64 {
        match self.kind {
            PolicyKind::EveryMeters { d_m } => d_m,
            PolicyKind::Hybrid { .. } => 500.0,
        }
    }

    fn time_trigger_min(&self) -> f64 {
        match self.kind {
            PolicyKind::EveryMeters { .. } => KEEPALIVE_MIN,
            PolicyKind::Hybrid {
                min_interval_min, ..
            } => min_interval_min,
        }
    }

    fn burst(&self) -> u32 {
        match self.kind {
            PolicyKind::EveryMeters { .. } => 0,
            PolicyKind::Hybrid { burst, .. } => burst,
        }
    }
}

fn validate_coord(lat: f64, lon: f64, what: &str) -> Result<()> {
    if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return Err(Error::InvalidScenario(format!(
            "{what} latitude {lat} out of range"
        )));
    }
    if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
        return Err(Error::InvalidScenario(format!(
            "{what} longitude {lon} out of range"
        )));
    }
    Ok(())
}

fn positive_finite(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

fn validate(scenario: &Scenario, policy: &SamplingPolicy) -> Result<()> {
    if !scenario.start_minute.is_finite() || scenario.start_minute < 0.0 {
        return Err(Error::InvalidScenario(format!(
            "start_minute {} must be non-negative",
            scenario.start_minute
        )));
    }
    validate_coord(scenario.start_lat, scenario.start_lon, "start")?;

    let mut pos = (scenario.start_lat, scenario.start_lon);
    let mut total_min = 0.0;
    for (i, segment) in scenario.segments.iter().enumerate() {
        match *segment {
            Segment::Stay {
                lat,
                lon,
                duration_min,
            } => {
                validate_coord(lat, lon, "stay")?;
                if !positive_finite(duration_min) {
                    return Err(Error::InvalidScenario(format!(
                        "segment {i}: stay duration {duration_min} must be positive and finite"
                    )));
                }
                if haversine_km(pos.0, pos.1, lat, lon) > POSITION_TOLERANCE_KM {
                    return Err(Error::InvalidScenario(format!(
                        "segment {i}: stay at ({lat}, {lon}) is not where the previous segment ended ({}, {})",
                        pos.0, pos.1
                    )));
                }
                pos = (lat, lon);
                total_min += duration_min;
            }
            Segment::Move {
                to_lat,
                to_lon,
                speed_kmh,
            } => {
                validate_coord(to_lat, to_lon, "move target")?;
                if !positive_finite(speed_kmh) {
                    return Err(Error::InvalidScenario(format!(
                        "segment {i}: speed {speed_kmh} must be positive and finite"
                    )));
                }
                total_min += haversine_km(pos.0, pos.1, to_lat, to_lon) / (speed_kmh / 60.0);
                pos = (to_lat, to_lon);
            }
        }
    }
    if scenario.start_minute + total_min >= 1440.0 {
        return Err(Error::InvalidScenario(format!(
            "scenario runs past midnight: starts at minute {} and lasts {total_min:.1} min",
            scenario.start_minute
        )));
    }

    if !positive_finite(policy.distance_trigger_m()) {
        return Err(Error::InvalidScenario(
            "distance trigger must be positive".into(),
        ));
    }
    if !positive_finite(policy.time_trigger_min()) {
        return Err(Error::InvalidScenario(
            "time trigger must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&policy.outlier_rate) {
        return Err(Error::InvalidScenario(format!(
            "outlier_rate {} must lie in [0, 1]",
            policy.outlier_rate
        )));
    }
    let magnitude_ok = |v: f64| v.is_finite() && v >= 0.0;
    if !magnitude_ok(policy.noise_sigma_m) || !magnitude_ok(policy.outlier_max_m) {
        return Err(Error::InvalidScenario(
            "noise magnitudes must be non-negative and finite".into(),
        ));
    }
    if policy.outlier_rate > 0.0 && !positive_finite(policy.outlier_max_m) {
        return Err(Error::InvalidScenario(
            "outlier_rate > 0 requires a positive outlier_max_m".into(),
        ));
    }
    Ok(())
}

/// Emission state: applies the error model and deduplicates instants.
///
/// The simulated receiver is motion-gated, as real duty-cycled trackers
/// are: while nothing moves it re-reports its cached last fix instead of
/// taking a fresh (noisy) reading, so a stay is a run of identical
/// coordinates even under noise. Outlier glitches still break through at
/// `outlier_rate`, and every movement fix is a fresh reading.
struct Emitter<'a> {
    policy: &'a SamplingPolicy,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    day: NaiveDate,
    samples: Vec<LocationSample>,
    last_fix_minute: f64,
    last_emitted_ns: Option<i64>,
    distance_since_fix_km: f64,
    /// Last reported non-outlier coordinate (the receiver's position cache).
    cached: Option<(f64, f64)>,
    /// Pending burst fix times, ascending.
    scheduled: VecDeque<f64>,
}

impl<'a> Emitter<'a> {
    fn new(policy: &'a SamplingPolicy, day: NaiveDate, seed: u64) -> Self {
        Self {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: (policy.noise_sigma_m > 0.0)
                .then(|| Normal::new(0.0, policy.noise_sigma_m).expect("sigma is finite")),
            day,
            samples: Vec::new(),
            last_fix_minute: f64::NEG_INFINITY,
            last_emitted_ns: None,
            distance_since_fix_km: 0.0,
            cached: None,
            scheduled: VecDeque::new(),
        }
    }

    /// A fix while travelling: a fresh reading of (`lat`, `lon`).
    fn emit_moving(&mut self, minute: f64, lat: f64, lon: f64) {
        self.emit(minute, lat, lon, false);
    }

    /// A fix while stationary: re-reports the cached coordinate.
    fn emit_stationary(&mut self, minute: f64, lat: f64, lon: f64) {
        self.emit(minute, lat, lon, true);
    }

    /// Report a fix at `minute` for true position (`lat`, `lon`). A repeat
    /// of the previous instant is dropped (several triggers can coincide).
    fn emit(&mut self, minute: f64, lat: f64, lon: f64, stationary: bool) {
        self.last_fix_minute = minute;
        self.distance_since_fix_km = 0.0;
        let ns = (minute * 60e9).round() as i64;
        if self.last_emitted_ns == Some(ns) {
            return;
        }
        self.last_emitted_ns = Some(ns);

        let is_outlier =
            self.policy.outlier_rate > 0.0 && self.rng.gen::<f64>() < self.policy.outlier_rate;
        let (lat, lon) = if is_outlier {
            // A glitch reading; emitted but never cached.
            let angle = self.rng.gen_range(0.0..std::f64::consts::TAU);
            let dist = self.rng.gen_range(0.0..self.policy.outlier_max_m);
            offset_meters(lat, lon, dist * angle.cos(), dist * angle.sin())
        } else if let (true, Some(held)) = (stationary, self.cached) {
            held
        } else {
            let observed = match &self.noise {
                Some(noise) => {
                    let east = noise.sample(&mut self.rng);
                    let north = noise.sample(&mut self.rng);
                    offset_meters(lat, lon, east, north)
                }
                None => (lat, lon),
            };
            self.cached = Some(observed);
            observed
        };

        let midnight = self.day.and_hms_opt(0, 0, 0).expect("valid midnight");
        self.samples.push(LocationSample {
            timestamp: (midnight + Duration::nanoseconds(ns))
                .and_utc()
                .fixed_offset(),
            latitude: lat,
            longitude: lon,
        });
    }

    /// Queue burst fixes (hybrid policy) following an event at `minute`.
    fn schedule_burst(&mut self, minute: f64) {
        for i in 1..=self.policy.burst() {
            self.scheduled.push_back(minute + i as f64);
        }
    }

    fn next_scheduled(&self) -> Option<f64> {
        self.scheduled.front().copied()
    }

    fn consume_scheduled_through(&mut self, minute: f64) {
        while self.scheduled.front().is_some_and(|&t| t <= minute) {
            self.scheduled.pop_front();
        }
    }
}

/// Generate one day of samples plus its ground truth.
///
/// Fixes are produced at: the scenario start; every segment boundary (so
/// each leg is sampled end to end and stay arrivals/departures are always
/// observed); the policy's distance and time triggers in between; and any
/// hybrid wake-up bursts. Readings taken while travelling carry fresh
/// Gaussian noise; fixes reported during a stay repeat the receiver's
/// cached coordinate (motion-gated duty cycling), with outlier glitches
/// breaking through either way. Identical `(scenario, policy, seed)`
/// triples yield identical output.
pub fn generate(
    scenario: &Scenario,
    policy: &SamplingPolicy,
    seed: u64,
) -> Result<(Trajectory, Vec<GroundTruthStay>)> {
    validate(scenario, policy)?;

    let trigger_d_km = policy.distance_trigger_m() / 1000.0;
    let trigger_t_min = policy.time_trigger_min();
    let mut emitter = Emitter::new(policy, scenario.day, seed);
    let mut truth = Vec::new();

    let mut t = scenario.start_minute;
    let mut pos = (scenario.start_lat, scenario.start_lon);
    emitter.emit_moving(t, pos.0, pos.1);

    for segment in &scenario.segments {
        match *segment {
            Segment::Stay {
                lat,
                lon,
                duration_min,
            } => {
                let t_end = t + duration_min;
                truth.push(GroundTruthStay {
                    day: scenario.day,
                    arrival_min: t,
                    departure_min: t_end,
                    latitude: lat,
                    longitude: lon,
                    label: format!("stay{}", truth.len() + 1),
                });
                pos = (lat, lon);
                emitter.schedule_burst(t);
                loop {
                    let mut next = emitter.last_fix_minute + trigger_t_min;
                    if let Some(s) = emitter.next_scheduled() {
                        next = next.min(s);
                    }
                    if next > t_end {
                        break;
                    }
                    emitter.consume_scheduled_through(next);
                    emitter.emit_stationary(next, pos.0, pos.1);
                }
                t = t_end;
                emitter.schedule_burst(t);
                // Departure instant: observed before movement resumes.
                emitter.emit_stationary(t, pos.0, pos.1);
            }
            Segment::Move {
                to_lat,
                to_lon,
                speed_kmh,
            } => {
                let from = pos;
                let leg_km = haversine_km(from.0, from.1, to_lat, to_lon);
                let v_km_min = speed_kmh / 60.0;
                let t_start = t;
                let t_end = t + leg_km / v_km_min;
                loop {
                    let to_trigger_km = trigger_d_km - emitter.distance_since_fix_km;
                    let mut next =
                        (t + to_trigger_km / v_km_min).min(emitter.last_fix_minute + trigger_t_min);
                    if let Some(s) = emitter.next_scheduled() {
                        next = next.min(s);
                    }
                    if next > t_end {
                        break;
                    }
                    emitter.consume_scheduled_through(next);
                    emitter.distance_since_fix_km += v_km_min * (next - t);
                    t = next;
                    let fraction = if t_end > t_start {
                        (t - t_start) / (t_end - t_start)
                    } else {
                        1.0
                    };
                    pos = intermediate_point(from, (to_lat, to_lon), fraction);
                    emitter.emit_moving(t, pos.0, pos.1);
                }
                emitter.distance_since_fix_km += v_km_min * (t_end - t);
                t = t_end;
                pos = (to_lat, to_lon);
                // Leg end: always observe the destination so each leg is
                // sampled end to end along its own geodesic.
                emitter.emit_moving(t, pos.0, pos.1);
            }
        }
    }

    Ok((
        Trajectory {
            day: scenario.day,
            samples: emitter.samples,
        },
        truth,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::to_spatial_curve;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2017, 3, 1).unwrap()
    }

    /// 10 km due-north move endpoint from (35, 33).
    fn north_10km() -> (f64, f64) {
        offset_meters(35.0, 33.0, 0.0, 10_000.0)
    }

    #[test]
    fn constant_speed_leg_samples_by_distance() {
        let (to_lat, to_lon) = north_10km();
        let scenario = Scenario {
            day: day(),
            start_minute: 480.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![Segment::Move {
                to_lat,
                to_lon,
                speed_kmh: 60.0,
            }],
        };
        let (trajectory, truth) = generate(&scenario, &SamplingPolicy::sls(500.0), 1).unwrap();
        assert!(truth.is_empty());
        // 10 km at 500 m per fix: start + 20 fixes = 21 samples, 30 s apart.
        assert_eq!(trajectory.samples.len(), 21);
        for pair in trajectory.samples.windows(2) {
            let dt = pair[1].minutes_since_midnight() - pair[0].minutes_since_midnight();
            assert_relative_eq!(dt, 0.5, epsilon = 1e-6);
            let d_m = haversine_km(
                pair[0].latitude,
                pair[0].longitude,
                pair[1].latitude,
                pair[1].longitude,
            ) * 1000.0;
            assert_relative_eq!(d_m, 500.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn single_stay_keeps_one_location() {
        let scenario = Scenario {
            day: day(),
            start_minute: 600.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![Segment::Stay {
                lat: 35.0,
                lon: 33.0,
                duration_min: 30.0,
            }],
        };
        let (trajectory, truth) = generate(&scenario, &SamplingPolicy::sls(100.0), 9).unwrap();
        assert!(trajectory.samples.len() >= 2);
        for s in &trajectory.samples {
            assert_eq!((s.latitude, s.longitude), (35.0, 33.0));
        }
        assert_eq!(truth.len(), 1);
        assert_eq!(truth[0].arrival_min, 600.0);
        assert_eq!(truth[0].departure_min, 630.0);
        assert_eq!(truth[0].label, "stay1");
    }

    #[test]
    fn noisy_stay_fixes_repeat_the_cached_coordinate() {
        let (to_lat, to_lon) = north_10km();
        let scenario = Scenario {
            day: day(),
            start_minute: 480.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![
                Segment::Move {
                    to_lat,
                    to_lon,
                    speed_kmh: 60.0,
                },
                Segment::Stay {
                    lat: to_lat,
                    lon: to_lon,
                    duration_min: 40.0,
                },
                Segment::Move {
                    to_lat: 35.0,
                    to_lon: 33.0,
                    speed_kmh: 60.0,
                },
            ],
        };
        let policy = SamplingPolicy {
            noise_sigma_m: 30.0,
            ..SamplingPolicy::sls(100.0)
        };
        let (trajectory, truth) = generate(&scenario, &policy, 11).unwrap();
        let (arr, dep) = (truth[0].arrival_min, truth[0].departure_min);
        let in_stay: Vec<_> = trajectory
            .samples
            .iter()
            .filter(|s| {
                let m = s.minutes_since_midnight();
                m >= arr && m <= dep
            })
            .collect();
        assert!(
            in_stay.len() > 10,
            "keepalive fixes expected during the stay"
        );
        // All in-stay fixes re-report the arrival reading, which is a noisy
        // observation of the true stay location.
        let anchor = (in_stay[0].latitude, in_stay[0].longitude);
        for s in &in_stay {
            assert_eq!((s.latitude, s.longitude), anchor);
        }
        assert_ne!(anchor, (to_lat, to_lon), "the anchor reading is noisy");
        assert!(haversine_km(anchor.0, anchor.1, to_lat, to_lon) < 0.2);
        // Movement readings are all distinct fresh observations.
        let moving: Vec<_> = trajectory
            .samples
            .iter()
            .filter(|s| s.minutes_since_midnight() < arr)
            .collect();
        for pair in moving.windows(2) {
            assert_ne!(
                (pair[0].latitude, pair[0].longitude),
                (pair[1].latitude, pair[1].longitude)
            );
        }
    }

    #[test]
    fn same_seed_reproduces_identical_output() {
        let (to_lat, to_lon) = north_10km();
        let scenario = Scenario {
            day: day(),
            start_minute: 420.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![
                Segment::Move {
                    to_lat,
                    to_lon,
                    speed_kmh: 50.0,
                },
                Segment::Stay {
                    lat: to_lat,
                    lon: to_lon,
                    duration_min: 45.0,
                },
            ],
        };
        let policy = SamplingPolicy {
            noise_sigma_m: 30.0,
            outlier_rate: 0.05,
            outlier_max_m: 800.0,
            ..SamplingPolicy::hybrid()
        };
        let a = generate(&scenario, &policy, 42).unwrap();
        let b = generate(&scenario, &policy, 42).unwrap();
        assert_eq!(a, b);
        let c = generate(&scenario, &policy, 43).unwrap();
        assert_ne!(a.0.samples, c.0.samples);
    }

    #[test]
    fn hybrid_bursts_fire_after_arrival_and_departure() {
        let (to_lat, to_lon) = north_10km();
        let scenario = Scenario {
            day: day(),
            start_minute: 480.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![
                Segment::Stay {
                    lat: 35.0,
                    lon: 33.0,
                    duration_min: 20.0,
                },
                Segment::Move {
                    to_lat,
                    to_lon,
                    speed_kmh: 60.0,
                },
            ],
        };
        let (trajectory, _) = generate(&scenario, &SamplingPolicy::hybrid(), 3).unwrap();
        let minutes: Vec<f64> = trajectory
            .samples
            .iter()
            .map(|s| s.minutes_since_midnight())
            .collect();
        // Arrival burst at 481..483, departure burst at 501..503.
        for expected in [481.0, 482.0, 483.0, 501.0, 502.0, 503.0] {
            assert!(
                minutes.iter().any(|&m| (m - expected).abs() < 1e-6),
                "missing burst fix at {expected}: {minutes:?}"
            );
        }
    }

    #[test]
    fn stay_away_from_current_position_is_rejected() {
        let scenario = Scenario {
            day: day(),
            start_minute: 480.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![Segment::Stay {
                lat: 36.0,
                lon: 33.0,
                duration_min: 10.0,
            }],
        };
        assert!(matches!(
            generate(&scenario, &SamplingPolicy::sls(100.0), 0),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn scenario_running_past_midnight_is_rejected() {
        let scenario = Scenario {
            day: day(),
            start_minute: 1430.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![Segment::Stay {
                lat: 35.0,
                lon: 33.0,
                duration_min: 20.0,
            }],
        };
        assert!(matches!(
            generate(&scenario, &SamplingPolicy::sls(100.0), 0),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn nonpositive_speed_and_duration_are_rejected() {
        for segment in [
            Segment::Move {
                to_lat: 35.1,
                to_lon: 33.0,
                speed_kmh: 0.0,
            },
            Segment::Stay {
                lat: 35.0,
                lon: 33.0,
                duration_min: -5.0,
            },
        ] {
            let scenario = Scenario {
                day: day(),
                start_minute: 480.0,
                start_lat: 35.0,
                start_lon: 33.0,
                segments: vec![segment],
            };
            assert!(matches!(
                generate(&scenario, &SamplingPolicy::sls(100.0), 0),
                Err(Error::InvalidScenario(_))
            ));
        }
    }

    #[test]
    fn scenario_round_trips_through_json() {
        let (to_lat, to_lon) = north_10km();
        let scenario = Scenario {
            day: day(),
            start_minute: 480.0,
            start_lat: 35.0,
            start_lon: 33.0,
            segments: vec![
                Segment::Move {
                    to_lat,
                    to_lon,
                    speed_kmh: 60.0,
                },
                Segment::Stay {
                    lat: to_lat,
                    lon: to_lon,
                    duration_min: 90.0,
                },
            ],
        };
        let json = serde_json::to_string(&scenario).unwrap();
        assert!(json.contains("\"kind\":\"move\""));
        assert!(json.contains("\"kind\":\"stay\""));
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, scenario);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn clean_cumulative_distance_matches_path_length(
            legs in proptest::collection::vec(
                (1.0f64..8.0, 20.0f64..90.0, 0.0f64..std::f64::consts::TAU, 5.0f64..60.0),
                1..5,
            ),
            d_m in prop_oneof![Just(100.0f64), Just(250.0), Just(500.0)],
        ) {
            // Alternate move (length km, speed, bearing) and stay segments.
            let mut segments = Vec::new();
            let mut pos = (35.0, 33.0);
            let mut path_km = 0.0;
            for (km, speed, bearing, stay_min) in legs {
                let east = km * 1000.0 * bearing.cos();
                let north = km * 1000.0 * bearing.sin();
                let target = offset_meters(pos.0, pos.1, east, north);
                path_km += haversine_km(pos.0, pos.1, target.0, target.1);
                segments.push(Segment::Move { to_lat: target.0, to_lon: target.1, speed_kmh: speed });
                segments.push(Segment::Stay { lat: target.0, lon: target.1, duration_min: stay_min });
                pos = target;
            }
            let scenario = Scenario {
                day: day(),
                start_minute: 300.0,
                start_lat: 35.0,
                start_lon: 33.0,
                segments,
            };
            let (trajectory, truth) = generate(&scenario, &SamplingPolicy::sls(d_m), 7).unwrap();
            let curve = to_spatial_curve(&trajectory);
            prop_assert!(
                (curve.total_distance_km() - path_km).abs() <= 1e-3 * path_km,
                "cumulative {} vs path {}",
                curve.total_distance_km(),
                path_km
            );
            // Ground truth is ordered and non-overlapping.
            for pair in truth.windows(2) {
                prop_assert!(pair[0].departure_min <= pair[1].arrival_min);
            }
            // Samples are strictly ordered in time.
            for pair in trajectory.samples.windows(2) {
                prop_assert!(pair[0].timestamp < pair[1].timestamp);
            }
        }
    }
}
