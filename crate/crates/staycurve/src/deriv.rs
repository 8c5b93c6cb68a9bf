//! Finite-difference derivatives on non-uniform grids and sign-change scans.
//!
//! The displacement curve is sampled wherever the GPS happened to report, so
//! all stencils here handle unequal spacing. Interior points use three-point
//! central differences; boundary points use one-sided stencils chosen so that
//! both the first and the second derivative converge at second order, which
//! keeps boundary noise from polluting the region scan.

use crate::curve::SpatialCurve;
use crate::error::{Error, Result};

/// Values at or below this magnitude count as zero during sign
/// classification of the second derivative.
pub(crate) const ZERO_TOLERANCE: f64 = 1e-9;

/// Three-way sign with a dead band: +1, 0, or -1.
pub(crate) fn sign(v: f64) -> i8 {
    if v > ZERO_TOLERANCE {
        1
    } else if v < -ZERO_TOLERANCE {
        -1
    } else {
        0
    }
}

/// First derivative at the middle of three points; `hp = x1-x0`, `hn = x2-x1`.
pub(crate) fn d1_central(hp: f64, hn: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    (hn * (y1 - y0) / hp + hp * (y2 - y1) / hn) / (hp + hn)
}

/// First derivative at the left end of three points.
pub(crate) fn d1_left(h1: f64, h2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * y0 + (h1 + h2) / (h1 * h2) * y1
        - h1 / (h2 * (h1 + h2)) * y2
}

/// First derivative at the right end of three points.
pub(crate) fn d1_right(h1: f64, h2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    y0 * h2 / (h1 * (h1 + h2)) - y1 * (h1 + h2) / (h1 * h2)
        + y2 * (h1 + 2.0 * h2) / (h2 * (h1 + h2))
}

/// Second derivative at the middle of three points.
pub(crate) fn d2_central(hp: f64, hn: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    2.0 * (hp * (y2 - y1) - hn * (y1 - y0)) / (hp * hn * (hp + hn))
}

/// Newton divided differences over four points: `(f[x0,x1,x2], f[x1,x2,x3],
/// f[x0,x1,x2,x3])`.
fn divided_differences_4(x: &[f64; 4], y: &[f64; 4]) -> (f64, f64, f64) {
    let f01 = (y[1] - y[0]) / (x[1] - x[0]);
    let f12 = (y[2] - y[1]) / (x[2] - x[1]);
    let f23 = (y[3] - y[2]) / (x[3] - x[2]);
    let f012 = (f12 - f01) / (x[2] - x[0]);
    let f123 = (f23 - f12) / (x[3] - x[1]);
    let f0123 = (f123 - f012) / (x[3] - x[0]);
    (f012, f123, f0123)
}

/// Second derivative of the cubic through four points, evaluated at `x[0]`.
pub(crate) fn d2_left4(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let (f012, _, f0123) = divided_differences_4(x, y);
    2.0 * f012 + 2.0 * f0123 * ((x[0] - x[1]) + (x[0] - x[2]))
}

/// Second derivative of the cubic through four points, evaluated at `x[3]`.
pub(crate) fn d2_right4(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let (_, f123, f0123) = divided_differences_4(x, y);
    2.0 * f123 + 2.0 * f0123 * ((x[3] - x[1]) + (x[3] - x[2]))
}

/// Approximates dy/dx at every grid point.
///
/// # Input
///
/// * `x` -- strictly increasing sample positions (at least 2)
/// * `y` -- sample values, same length as `x`
///
/// # Output
///
/// One derivative estimate per grid point. Interior points use the central
/// stencil, the two boundary points use one-sided three-point stencils; all
/// are exact for quadratics. With exactly two points both entries are the
/// secant slope.
pub fn first_derivative(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(x.len(), y.len(), "x and y must have the same length");
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientPoints(n));
    }
    if n == 2 {
        let slope = (y[1] - y[0]) / (x[1] - x[0]);
        return Ok(vec![slope, slope]);
    }
    let mut d = vec![0.0; n];
    d[0] = d1_left(x[1] - x[0], x[2] - x[1], y[0], y[1], y[2]);
    for i in 1..n - 1 {
        d[i] = d1_central(x[i] - x[i - 1], x[i + 1] - x[i], y[i - 1], y[i], y[i + 1]);
    }
    d[n - 1] = d1_right(
        x[n - 2] - x[n - 3],
        x[n - 1] - x[n - 2],
        y[n - 3],
        y[n - 2],
        y[n - 1],
    );
    Ok(d)
}

/// Approximates d²y/dx² at every grid point.
///
/// # Input
///
/// * `x` -- strictly increasing sample positions (at least 2)
/// * `y` -- sample values, same length as `x`
///
/// # Output
///
/// One estimate per grid point. Interior points use the central stencil
/// (exact for quadratics); boundary points use four-point one-sided stencils
/// (exact for cubics) so the boundary error order matches the interior. With
/// three points every entry is the single central value; with two points the
/// curvature is taken as zero.
pub fn second_derivative(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(x.len(), y.len(), "x and y must have the same length");
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientPoints(n));
    }
    if n == 2 {
        return Ok(vec![0.0, 0.0]);
    }
    if n == 3 {
        let v = d2_central(x[1] - x[0], x[2] - x[1], y[0], y[1], y[2]);
        return Ok(vec![v, v, v]);
    }
    let mut d = vec![0.0; n];
    d[0] = d2_left4(&[x[0], x[1], x[2], x[3]], &[y[0], y[1], y[2], y[3]]);
    for i in 1..n - 1 {
        d[i] = d2_central(x[i] - x[i - 1], x[i + 1] - x[i], y[i - 1], y[i], y[i + 1]);
    }
    d[n - 1] = d2_right4(
        &[x[n - 4], x[n - 3], x[n - 2], x[n - 1]],
        &[y[n - 4], y[n - 3], y[n - 2], y[n - 1]],
    );
    Ok(d)
}

/// First and second derivative of a displacement curve, with the day's
/// smallest first-derivative value (used to scale confidence).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSeries {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Minimum of `d1` over the day, before any floor is applied.
    pub d1_min: f64,
}

impl DerivativeSeries {
    /// Computes both derivatives in a single pass over the curve points.
    ///
    /// Produces values bit-identical to [`first_derivative`] and
    /// [`second_derivative`] on the curve's `x`/`y` columns, but reads each
    /// point once and allocates no intermediate column copies — on long
    /// days this keeps the whole pipeline memory-bound rather than
    /// copy-bound.
    pub fn of(curve: &SpatialCurve) -> Result<Self> {
        let p = &curve.points;
        let n = p.len();
        if n < 2 {
            return Err(Error::InsufficientPoints(n));
        }
        let x = |i: usize| p[i].x;
        let y = |i: usize| p[i].y;
        if n == 2 {
            let slope = (y(1) - y(0)) / (x(1) - x(0));
            return Ok(Self {
                d1: vec![slope, slope],
                d2: vec![0.0, 0.0],
                d1_min: f64::INFINITY.min(slope),
            });
        }
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        d1[0] = d1_left(x(1) - x(0), x(2) - x(1), y(0), y(1), y(2));
        for i in 1..n - 1 {
            let hp = x(i) - x(i - 1);
            let hn = x(i + 1) - x(i);
            let (y0, y1, y2) = (y(i - 1), y(i), y(i + 1));
            d1[i] = d1_central(hp, hn, y0, y1, y2);
            d2[i] = d2_central(hp, hn, y0, y1, y2);
        }
        d1[n - 1] = d1_right(
            x(n - 2) - x(n - 3),
            x(n - 1) - x(n - 2),
            y(n - 3),
            y(n - 2),
            y(n - 1),
        );
        if n == 3 {
            d2[0] = d2[1];
            d2[2] = d2[1];
        } else {
            d2[0] = d2_left4(&[x(0), x(1), x(2), x(3)], &[y(0), y(1), y(2), y(3)]);
            d2[n - 1] = d2_right4(
                &[x(n - 4), x(n - 3), x(n - 2), x(n - 1)],
                &[y(n - 4), y(n - 3), y(n - 2), y(n - 1)],
            );
        }
        let d1_min = d1.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { d1, d2, d1_min })
    }
}

/// A candidate slowdown: a maximal index span where the second derivative
/// dips from positive-or-flat to negative-or-flat and has not yet swung
/// positive again.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCrossingRegion {
    /// First index after the downward sign change.
    pub start: usize,
    /// Last index before the upward sign change (or the series end).
    pub end: usize,
}

/// Scan the second derivative for downward-then-upward sign changes.
///
/// A region opens at index `i` whenever the sign (within
/// [`ZERO_TOLERANCE`]) decreases from `i-1` to `i` — deceleration beginning
/// either sharply (`+` to `-`), or through flat travel (`+` to `0`, `0` to
/// `-`). It closes just before the first strictly positive sign that
/// follows, or at the final index if the sign never recovers. Regions are
/// disjoint and returned in index order.
pub fn zero_crossing_regions(d2: &[f64]) -> Vec<ZeroCrossingRegion> {
    let mut regions = Vec::new();
    if d2.is_empty() {
        return regions;
    }
    let mut open: Option<usize> = None;
    let mut prev = sign(d2[0]);
    for (i, &v) in d2.iter().enumerate().skip(1) {
        let s = sign(v);
        match open {
            None => {
                if prev > s {
                    open = Some(i);
                }
            }
            Some(start) => {
                if s == 1 {
                    regions.push(ZeroCrossingRegion { start, end: i - 1 });
                    open = None;
                }
            }
        }
        prev = s;
    }
    if let Some(start) = open {
        regions.push(ZeroCrossingRegion {
            start,
            end: d2.len() - 1,
        });
    }
    regions
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn linear_function_has_constant_slope() {
        let x = [0.0, 3.0, 7.0, 12.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let d1 = first_derivative(&x, &y).unwrap();
        for v in d1 {
            assert_relative_eq!(v, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn quadratic_slope_is_exact_on_uneven_grid() {
        let x = [0.0, 1.0, 2.5, 4.0];
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let d1 = first_derivative(&x, &y).unwrap();
        let expected = [0.0, 2.0, 5.0, 8.0];
        for (v, e) in d1.iter().zip(expected) {
            assert_relative_eq!(*v, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn quadratic_curvature_is_exact_on_uneven_grid() {
        let x = [0.0, 1.0, 2.5, 4.0, 7.5];
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let d2 = second_derivative(&x, &y).unwrap();
        for v in d2 {
            assert_relative_eq!(v, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn cubic_curvature_is_exact_at_boundaries() {
        let x = [0.0, 1.5, 2.0, 4.5, 5.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| v * v * v - 2.0 * v).collect();
        let d2 = second_derivative(&x, &y).unwrap();
        assert_relative_eq!(d2[0], 6.0 * x[0], epsilon = 1e-9);
        assert_relative_eq!(d2[x.len() - 1], 6.0 * x[x.len() - 1], epsilon = 1e-8);
    }

    #[test]
    fn two_points_give_secant_slope_and_zero_curvature() {
        let x = [10.0, 30.0];
        let y = [1.0, 5.0];
        assert_eq!(first_derivative(&x, &y).unwrap(), vec![0.2, 0.2]);
        assert_eq!(second_derivative(&x, &y).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn three_points_share_one_curvature_value() {
        let x = [0.0, 2.0, 3.0];
        let y = [0.0, 8.0, 27.0];
        let d2 = second_derivative(&x, &y).unwrap();
        assert_eq!(d2[0], d2[1]);
        assert_eq!(d2[1], d2[2]);
    }

    #[test]
    fn too_few_points_is_an_error() {
        assert!(matches!(
            first_derivative(&[1.0], &[1.0]),
            Err(Error::InsufficientPoints(1))
        ));
        assert!(matches!(
            second_derivative(&[], &[]),
            Err(Error::InsufficientPoints(0))
        ));
    }

    #[test]
    fn boundary_error_shrinks_at_second_order() {
        // Halving the step should cut the worst-case error roughly 4x for
        // every stencil, including the one-sided boundary ones.
        let max_err = |n: usize| -> (f64, f64) {
            let h = 1440.0 / n as f64;
            let x: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            let y: Vec<f64> = x.iter().map(|v| (v / 100.0).sin()).collect();
            let d1 = first_derivative(&x, &y).unwrap();
            let d2 = second_derivative(&x, &y).unwrap();
            let e1 = x
                .iter()
                .zip(&d1)
                .map(|(v, d)| (d - (v / 100.0).cos() / 100.0).abs())
                .fold(0.0f64, f64::max);
            let e2 = x
                .iter()
                .zip(&d2)
                .map(|(v, d)| (d + (v / 100.0).sin() / 10_000.0).abs())
                .fold(0.0f64, f64::max);
            (e1, e2)
        };
        let (coarse1, coarse2) = max_err(1440);
        let (fine1, fine2) = max_err(2880);
        assert!(
            (3.0..5.0).contains(&(coarse1 / fine1)),
            "d1 ratio {}",
            coarse1 / fine1
        );
        assert!(
            (3.0..5.0).contains(&(coarse2 / fine2)),
            "d2 ratio {}",
            coarse2 / fine2
        );
    }

    #[test]
    fn scan_finds_negative_dip_between_positive_flanks() {
        let regions = zero_crossing_regions(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(regions, vec![ZeroCrossingRegion { start: 1, end: 2 }]);
    }

    #[test]
    fn scan_closes_unfinished_region_at_series_end() {
        let regions = zero_crossing_regions(&[1.0, -1.0]);
        assert_eq!(regions, vec![ZeroCrossingRegion { start: 1, end: 1 }]);
    }

    #[test]
    fn scan_ignores_all_flat_series() {
        assert!(zero_crossing_regions(&[0.0, 0.0, 0.0, 0.0]).is_empty());
        assert!(zero_crossing_regions(&[]).is_empty());
        assert!(zero_crossing_regions(&[1.0]).is_empty());
    }

    #[test]
    fn scan_opens_when_flat_travel_turns_negative() {
        let regions = zero_crossing_regions(&[0.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(regions, vec![ZeroCrossingRegion { start: 2, end: 3 }]);
    }

    #[test]
    fn scan_treats_tiny_values_as_zero() {
        let regions = zero_crossing_regions(&[1.0, 1e-12, -1e-12, -1.0, 1.0]);
        // 1e-12 magnitudes sit inside the dead band, so the drop happens at
        // index 1 (+ to 0) and the region runs until the sign turns positive.
        assert_eq!(regions, vec![ZeroCrossingRegion { start: 1, end: 3 }]);
    }

    #[test]
    fn scan_finds_multiple_disjoint_regions() {
        let d2 = [1.0, -2.0, 1.0, 1.0, -3.0, 0.0, 1.0];
        let regions = zero_crossing_regions(&d2);
        assert_eq!(
            regions,
            vec![
                ZeroCrossingRegion { start: 1, end: 1 },
                ZeroCrossingRegion { start: 4, end: 5 },
            ]
        );
    }

    proptest! {
        #[test]
        fn random_quadratics_differentiate_exactly(
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
            c in -5.0f64..5.0,
            steps in proptest::collection::vec(0.1f64..10.0, 3..40),
        ) {
            let mut x = vec![0.0];
            for s in &steps {
                x.push(x.last().unwrap() + s);
            }
            let y: Vec<f64> = x.iter().map(|v| a * v * v + b * v + c).collect();
            let d1 = first_derivative(&x, &y).unwrap();
            let d2 = second_derivative(&x, &y).unwrap();
            for (v, d) in x.iter().zip(&d1) {
                let truth = 2.0 * a * v + b;
                prop_assert!((d - truth).abs() <= 1e-8 * truth.abs().max(1.0));
            }
            for d in &d2 {
                prop_assert!((d - 2.0 * a).abs() <= 1e-8 * (2.0 * a).abs().max(1.0));
            }
        }

        #[test]
        fn regions_are_sorted_disjoint_and_nonpositive_inside(
            d2 in proptest::collection::vec(-3.0f64..3.0, 0..60)
        ) {
            let regions = zero_crossing_regions(&d2);
            for r in &regions {
                prop_assert!(r.start <= r.end);
                prop_assert!(r.end < d2.len());
                for &v in &d2[r.start..=r.end] {
                    prop_assert!(sign(v) <= 0);
                }
            }
            for pair in regions.windows(2) {
                prop_assert!(pair[0].end < pair[1].start);
            }
        }

        #[test]
        fn series_minimum_matches_reported_value(
            rows in proptest::collection::vec((-80.0f64..80.0, -170.0f64..170.0), 2..30)
        ) {
            use crate::io::{LocationSample, Trajectory};
            use chrono::DateTime;
            let base = DateTime::parse_from_rfc3339("2017-03-01T06:00:00+00:00").unwrap();
            let samples: Vec<LocationSample> = rows
                .iter()
                .enumerate()
                .map(|(i, &(lat, lon))| LocationSample {
                    timestamp: base + chrono::Duration::minutes(2 * i as i64),
                    latitude: lat,
                    longitude: lon,
                })
                .collect();
            let curve = crate::curve::to_spatial_curve(&Trajectory {
                day: samples[0].timestamp.date_naive(),
                samples,
            });
            let series = DerivativeSeries::of(&curve).unwrap();
            let raw_min = series.d1.iter().copied().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(series.d1_min, raw_min);
            prop_assert_eq!(series.d1.len(), curve.points.len());
            prop_assert_eq!(series.d2.len(), curve.points.len());
        }

        #[test]
        fn fused_series_pass_is_bit_identical_to_the_column_functions(
            steps in proptest::collection::vec((0.1f64..7.0, -3.0f64..3.0), 2..40)
        ) {
            use crate::curve::{CurvePoint, SpatialCurve};
            let mut x = 0.0;
            let mut y = 10.0;
            let points: Vec<CurvePoint> = steps
                .iter()
                .enumerate()
                .map(|(i, &(dx, dy))| {
                    x += dx;
                    y += dy;
                    CurvePoint { x, y, source_index: i }
                })
                .collect();
            let curve = SpatialCurve {
                day: chrono::NaiveDate::from_ymd_opt(2017, 3, 1).unwrap(),
                points,
            };
            let series = DerivativeSeries::of(&curve).unwrap();
            let xs = curve.xs();
            let ys = curve.ys();
            prop_assert_eq!(&series.d1, &first_derivative(&xs, &ys).unwrap());
            prop_assert_eq!(&series.d2, &second_derivative(&xs, &ys).unwrap());
        }
    }
}
