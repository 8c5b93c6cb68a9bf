//! Transform of a day's GPS fixes into a displacement-over-time curve.
//!
//! Each sample maps to a 2D point: x is minutes since local midnight and
//! y is the cumulative great-circle distance walked along the trajectory so
//! far, in kilometres. Stationary periods appear as horizontal plateaus and
//! movement as rising slopes, so stay detection reduces to locating flat
//! regions of this curve.

use chrono::NaiveDate;

use crate::geo::haversine_km;
use crate::io::Trajectory;

/// One point of the displacement curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Minutes since local midnight (fractional).
    pub x: f64,
    /// Cumulative travelled distance since the day's first sample, km.
    pub y: f64,
    /// Index of the originating sample within the day's trajectory.
    pub source_index: usize,
}

/// A full day's displacement curve, in sample order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCurve {
    pub day: NaiveDate,
    pub points: Vec<CurvePoint>,
}

impl SpatialCurve {
    /// x coordinates of all points.
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// y coordinates of all points.
    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }

    /// Total distance travelled over the day, km.
    pub fn total_distance_km(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.y)
    }
}

/// Build the displacement curve for one day of samples.
///
/// The first point always has y = 0; each subsequent y adds the haversine
/// distance from the previous sample, so y is non-decreasing.
pub fn to_spatial_curve(trajectory: &Trajectory) -> SpatialCurve {
    let mut points = Vec::with_capacity(trajectory.samples.len());
    let mut cumulative_km = 0.0;
    for (i, sample) in trajectory.samples.iter().enumerate() {
        if i > 0 {
            let prev = &trajectory.samples[i - 1];
            cumulative_km += haversine_km(
                prev.latitude,
                prev.longitude,
                sample.latitude,
                sample.longitude,
            );
        }
        points.push(CurvePoint {
            x: sample.minutes_since_midnight(),
            y: cumulative_km,
            source_index: i,
        });
    }
    SpatialCurve {
        day: trajectory.day,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::offset_meters;
    use crate::io::LocationSample;
    use approx::assert_relative_eq;
    use chrono::DateTime;
    use proptest::prelude::*;

    fn day_of(samples: Vec<LocationSample>) -> Trajectory {
        Trajectory {
            day: samples[0].timestamp.date_naive(),
            samples,
        }
    }

    fn sample(ts: &str, lat: f64, lon: f64) -> LocationSample {
        LocationSample {
            timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
            latitude: lat,
            longitude: lon,
        }
    }

    #[test]
    fn single_sample_is_origin_of_distance() {
        let curve = to_spatial_curve(&day_of(vec![sample(
            "2017-03-01T08:00:00+02:00",
            35.1,
            33.3,
        )]));
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].x, 480.0);
        assert_eq!(curve.points[0].y, 0.0);
    }

    #[test]
    fn stationary_pair_gives_flat_curve() {
        let curve = to_spatial_curve(&day_of(vec![
            sample("2017-03-01T08:00:00+02:00", 35.1, 33.3),
            sample("2017-03-01T08:10:00+02:00", 35.1, 33.3),
        ]));
        let expected = [(480.0, 0.0), (490.0, 0.0)];
        for (p, (x, y)) in curve.points.iter().zip(expected) {
            assert_eq!(p.x, x);
            assert_eq!(p.y, y);
        }
    }

    #[test]
    fn distances_accumulate() {
        // Three samples, each one kilometre due north of the previous.
        let (lat0, lon0) = (35.0, 33.0);
        let (lat1, lon1) = offset_meters(lat0, lon0, 0.0, 1000.0);
        let (lat2, lon2) = offset_meters(lat1, lon1, 0.0, 1000.0);
        let curve = to_spatial_curve(&day_of(vec![
            sample("2017-03-01T08:00:00+02:00", lat0, lon0),
            sample("2017-03-01T08:05:00+02:00", lat1, lon1),
            sample("2017-03-01T08:10:00+02:00", lat2, lon2),
        ]));
        assert_eq!(curve.points[0].y, 0.0);
        assert_relative_eq!(curve.points[1].y, 1.0, max_relative = 1e-4);
        assert_relative_eq!(curve.points[2].y, 2.0, max_relative = 1e-4);
        assert_relative_eq!(curve.total_distance_km(), 2.0, max_relative = 1e-4);
    }

    #[test]
    fn sub_second_timestamps_keep_fractional_minutes() {
        let curve = to_spatial_curve(&day_of(vec![sample(
            "2017-03-01T08:00:30.500+02:00",
            35.1,
            33.3,
        )]));
        assert_relative_eq!(curve.points[0].x, 480.0 + 30.5 / 60.0, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn curve_is_monotone_and_same_length(
            rows in proptest::collection::vec((-80.0f64..80.0, -170.0f64..170.0), 1..50)
        ) {
            let base = DateTime::parse_from_rfc3339("2017-03-01T00:10:00+02:00").unwrap();
            let samples: Vec<LocationSample> = rows
                .iter()
                .enumerate()
                .map(|(i, &(lat, lon))| LocationSample {
                    timestamp: base + chrono::Duration::minutes(i as i64),
                    latitude: lat,
                    longitude: lon,
                })
                .collect();
            let curve = to_spatial_curve(&day_of(samples.clone()));
            prop_assert_eq!(curve.points.len(), samples.len());
            prop_assert_eq!(curve.points[0].y, 0.0);
            for pair in curve.points.windows(2) {
                prop_assert!(pair[1].y >= pair[0].y);
                prop_assert!(pair[1].x > pair[0].x);
            }
            for (i, p) in curve.points.iter().enumerate() {
                prop_assert_eq!(p.source_index, i);
            }
        }

        #[test]
        fn rigid_translation_in_longitude_keeps_distances(
            rows in proptest::collection::vec((-60.0f64..60.0, -80.0f64..80.0), 2..30),
            shift in -40.0f64..40.0,
        ) {
            let base = DateTime::parse_from_rfc3339("2017-03-01T00:10:00+02:00").unwrap();
            let build = |delta: f64| -> Vec<LocationSample> {
                rows.iter()
                    .enumerate()
                    .map(|(i, &(lat, lon))| LocationSample {
                        timestamp: base + chrono::Duration::minutes(i as i64),
                        latitude: lat,
                        longitude: lon + delta,
                    })
                    .collect()
            };
            let plain = to_spatial_curve(&day_of(build(0.0)));
            let shifted = to_spatial_curve(&day_of(build(shift)));
            for (a, b) in plain.points.iter().zip(&shifted.points) {
                // Shifting every point east by the same angle preserves all
                // pairwise great-circle distances.
                prop_assert!((a.y - b.y).abs() <= 1e-9 * (1.0 + a.y.abs()));
            }
        }
    }
}
