//! Online stay-point detection over a live sample feed.
//!
//! Mirrors the batch detector exactly, under one restriction: the
//! confidence-decay divisor is the configured constant floor rather than the
//! day's minimum slope (which is unknowable mid-day). Derivatives for a
//! point are finalized only once enough neighbors have arrived to apply the
//! same stencil the batch path would use, so concatenating all `push`
//! outputs plus the final `flush` reproduces a batch run record for record.
//!
//! Memory stays proportional to the stencil width plus the currently open
//! region — independent of how many samples the day has.

use std::collections::VecDeque;

use chrono::{DateTime, FixedOffset, NaiveDate};

use crate::deriv::{d1_central, d1_left, d1_right, d2_central, d2_left4, d2_right4, sign};
use crate::detect::{
    classify, duration_from_span, mean_coordinate, point_confidence, region_confidence, D1MinMode,
    DetectorConfig, StayClass, StayPoint,
};
use crate::error::{Error, Result};
use crate::geo::haversine_km;
use crate::io::LocationSample;

/// A curve point awaiting derivative finalization.
#[derive(Debug, Clone, Copy)]
struct RawPoint {
    x: f64,
    y: f64,
    lat: f64,
    lon: f64,
}

/// A finalized curve point inside an open region.
#[derive(Debug, Clone, Copy)]
struct ScoredPoint {
    x: f64,
    y: f64,
    lat: f64,
    lon: f64,
    confidence: f64,
}

/// An in-progress deceleration region.
#[derive(Debug, Clone)]
struct OpenRegion {
    /// Absolute index (within the day) of the first region point.
    start: usize,
    /// Curve coordinates of the point just before the region (always
    /// exists: regions open on a sign change, never at index 0).
    before: (f64, f64),
    points: Vec<ScoredPoint>,
}

#[derive(Debug, Clone)]
struct DayState {
    date: NaiveDate,
    /// Count of accepted samples so far.
    n: usize,
    /// Cumulative travelled distance, km.
    cum_y: f64,
    /// The most recent ≤ 4 curve points (enough for every stencil).
    window: VecDeque<RawPoint>,
    /// Sign of the last finalized second derivative.
    prev_sign: Option<i8>,
    /// Curve coordinates of the last finalized point.
    prev_xy: Option<(f64, f64)>,
    open: Option<OpenRegion>,
    /// Records held back while the day still looks entirely stationary
    /// (total distance below the flatness threshold); a batch run of such a
    /// day reports one whole-day stay instead of scan results.
    pending: Vec<StayPoint>,
    /// True once cumulative distance has reached the flatness threshold,
    /// ruling the whole-day fallback out.
    released: bool,
    first_x: f64,
    lat_sum: f64,
    lon_sum: f64,
}

impl DayState {
    fn new(date: NaiveDate) -> Self {
        Self {
            date,
            n: 0,
            cum_y: 0.0,
            window: VecDeque::with_capacity(5),
            prev_sign: None,
            prev_xy: None,
            open: None,
            pending: Vec::new(),
            released: false,
            first_x: 0.0,
            lat_sum: 0.0,
            lon_sum: 0.0,
        }
    }

    fn route(&mut self, record: StayPoint, out: &mut Vec<StayPoint>) {
        if self.released {
            out.push(record);
        } else {
            self.pending.push(record);
        }
    }

    fn accept(&mut self, x: f64, lat: f64, lon: f64, cfg: &DetectorConfig) -> Vec<StayPoint> {
        let mut out = Vec::new();
        let y = match self.window.back() {
            Some(prev) => self.cum_y + haversine_km(prev.lat, prev.lon, lat, lon),
            None => 0.0,
        };
        self.cum_y = y;
        self.window.push_back(RawPoint { x, y, lat, lon });
        if self.window.len() > 4 {
            self.window.pop_front();
        }
        if self.n == 0 {
            self.first_x = x;
        }
        self.n += 1;
        self.lat_sum += lat;
        self.lon_sum += lon;
        if !self.released && self.cum_y >= cfg.e {
            self.released = true;
            out.append(&mut self.pending);
        }
        // A point's derivatives are final once its full stencil is present:
        // indices 0..=2 when the fourth point lands, then each index as its
        // right neighbor arrives. The last index waits for flush.
        if self.n == 4 {
            for idx in 0..=2 {
                self.finalize_index(idx, cfg, &mut out);
            }
        } else if self.n > 4 {
            self.finalize_index(self.n - 2, cfg, &mut out);
        }
        out
    }

    /// Compute the batch-identical derivatives for absolute index `idx`,
    /// score it, and advance the sign-change scan.
    fn finalize_index(&mut self, idx: usize, cfg: &DetectorConfig, out: &mut Vec<StayPoint>) {
        let base = self.n - self.window.len();
        let win: Vec<RawPoint> = self.window.iter().copied().collect();
        let at = |abs: usize| win[abs - base];

        let (d1, d2) = if idx == 0 {
            let (p0, p1, p2, p3) = (at(0), at(1), at(2), at(3));
            (
                d1_left(p1.x - p0.x, p2.x - p1.x, p0.y, p1.y, p2.y),
                d2_left4(&[p0.x, p1.x, p2.x, p3.x], &[p0.y, p1.y, p2.y, p3.y]),
            )
        } else if idx == self.n - 1 {
            let (p0, p1, p2, p3) = (at(idx - 3), at(idx - 2), at(idx - 1), at(idx));
            (
                d1_right(p2.x - p1.x, p3.x - p2.x, p1.y, p2.y, p3.y),
                d2_right4(&[p0.x, p1.x, p2.x, p3.x], &[p0.y, p1.y, p2.y, p3.y]),
            )
        } else {
            let (pp, pc, pn) = (at(idx - 1), at(idx), at(idx + 1));
            let (hp, hn) = (pc.x - pp.x, pn.x - pc.x);
            (
                d1_central(hp, hn, pp.y, pc.y, pn.y),
                d2_central(hp, hn, pp.y, pc.y, pn.y),
            )
        };

        let raw = at(idx);
        let scored = ScoredPoint {
            x: raw.x,
            y: raw.y,
            lat: raw.lat,
            lon: raw.lon,
            confidence: point_confidence(d1, cfg.d1_min_floor, cfg.e),
        };
        let s = sign(d2);

        if self.open.is_some() {
            if s == 1 {
                let region = self.open.take().unwrap();
                let record = self.build_record(region, Some((scored.x, scored.y)), cfg);
                self.route(record, out);
            } else {
                self.open.as_mut().unwrap().points.push(scored);
            }
        } else if let Some(prev) = self.prev_sign {
            if prev > s {
                self.open = Some(OpenRegion {
                    start: idx,
                    before: self.prev_xy.expect("a finalized predecessor exists"),
                    points: vec![scored],
                });
            }
        }
        self.prev_sign = Some(s);
        self.prev_xy = Some((scored.x, scored.y));
    }

    /// Turn a closed region into a stay-point record, exactly as the batch
    /// detector would: pick the best span, estimate duration from the same
    /// neighbors, and average the span's coordinates in arrival order.
    fn build_record(
        &self,
        region: OpenRegion,
        after: Option<(f64, f64)>,
        cfg: &DetectorConfig,
    ) -> StayPoint {
        let confidences: Vec<f64> = region.points.iter().map(|p| p.confidence).collect();
        let (k, w, value) =
            region_confidence(&confidences, 0, confidences.len() - 1, cfg.stay_threshold);
        let pk = region.points[k];
        let pw = region.points[w];
        let before = if k > 0 {
            let p = region.points[k - 1];
            (p.x, p.y)
        } else {
            region.before
        };
        let after = if w + 1 < region.points.len() {
            let p = region.points[w + 1];
            Some((p.x, p.y))
        } else {
            after
        };
        let (lat, lon) = mean_coordinate(region.points[k..=w].iter().map(|p| (p.lat, p.lon)));
        StayPoint {
            day: self.date,
            region: (region.start + k, region.start + w),
            start_minute: pk.x,
            end_minute: pw.x,
            estimated_duration_min: duration_from_span(
                Some(before),
                (pk.x, pk.y),
                (pw.x, pw.y),
                after,
                cfg.travel_speed_kmh,
            ),
            latitude: lat,
            longitude: lon,
            confidence: value,
            class: classify(value, cfg),
        }
    }

    fn fallback_record(&self) -> StayPoint {
        let last_x = self.window.back().expect("n >= 2").x;
        StayPoint {
            day: self.date,
            region: (0, self.n - 1),
            start_minute: self.first_x,
            end_minute: last_x,
            estimated_duration_min: last_x - self.first_x,
            latitude: self.lat_sum / self.n as f64,
            longitude: self.lon_sum / self.n as f64,
            confidence: 100.0,
            class: StayClass::Stay,
        }
    }

    fn finish(mut self, cfg: &DetectorConfig) -> Vec<StayPoint> {
        let mut out = Vec::new();
        if self.n >= 4 {
            self.finalize_index(self.n - 1, cfg, &mut out);
        }
        if let Some(region) = self.open.take() {
            let record = self.build_record(region, None, cfg);
            self.route(record, &mut out);
        }
        if self.cum_y < cfg.e {
            // The batch run would take the whole-day-stationary path and
            // report nothing but the full-span stay; drop scan results.
            return if self.n >= 2 {
                vec![self.fallback_record()]
            } else {
                Vec::new()
            };
        }
        out
    }
}

/// Incremental stay-point detector; one instance per device stream.
///
/// Feed samples in timestamp order with [`push`](Self::push); each call
/// returns the events determined so far. A change of calendar date flushes
/// the previous day automatically; call [`flush`](Self::flush) once the
/// feed ends to close out the final day.
#[derive(Debug, Clone)]
pub struct StreamingDetector {
    cfg: DetectorConfig,
    last_instant: Option<DateTime<FixedOffset>>,
    day: Option<DayState>,
    emitted: usize,
}

impl StreamingDetector {
    /// Create a detector. The config's divisor mode is forced to
    /// [`D1MinMode::Constant`]; the day-minimum variant cannot be computed
    /// online.
    pub fn new(cfg: DetectorConfig) -> Self {
        Self {
            cfg: DetectorConfig {
                d1_min_mode: D1MinMode::Constant,
                ..cfg
            },
            last_instant: None,
            day: None,
            emitted: 0,
        }
    }

    /// Consume one sample; return any events finalized by it.
    ///
    /// Samples must arrive in timestamp order: an earlier timestamp is
    /// rejected (state untouched), a repeated timestamp is dropped
    /// silently, matching how the batch pipeline deduplicates. A sample on
    /// a new calendar date first flushes the previous day; those events
    /// lead the returned list.
    pub fn push(&mut self, sample: &LocationSample) -> Result<Vec<StayPoint>> {
        if let Some(last) = self.last_instant {
            if sample.timestamp < last {
                return Err(Error::OutOfOrder {
                    got: sample.timestamp.to_rfc3339(),
                    last: last.to_rfc3339(),
                });
            }
            if sample.timestamp == last {
                return Ok(Vec::new());
            }
        }
        let date = sample.timestamp.date_naive();
        let mut out = Vec::new();
        if self.day.as_ref().is_some_and(|d| d.date != date) {
            let day = self.day.take().expect("checked above");
            out.extend(day.finish(&self.cfg));
        }
        let day = self.day.get_or_insert_with(|| DayState::new(date));
        out.extend(day.accept(
            sample.minutes_since_midnight(),
            sample.latitude,
            sample.longitude,
            &self.cfg,
        ));
        self.last_instant = Some(sample.timestamp);
        self.emitted += out.len();
        Ok(out)
    }

    /// Close out the current day and return its remaining events. Safe to
    /// call repeatedly; later calls return nothing until new samples arrive.
    pub fn flush(&mut self) -> Vec<StayPoint> {
        let out = match self.day.take() {
            Some(day) => day.finish(&self.cfg),
            None => Vec::new(),
        };
        self.emitted += out.len();
        out
    }

    /// Number of curve points currently buffered (stencil window plus any
    /// open region). Bounded by the open region's length, not by the total
    /// pushed.
    pub fn buffered_points(&self) -> usize {
        self.day.as_ref().map_or(0, |d| {
            d.window.len() + d.open.as_ref().map_or(0, |r| r.points.len()) + d.pending.len()
        })
    }

    /// Total events returned to the caller so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }
}
