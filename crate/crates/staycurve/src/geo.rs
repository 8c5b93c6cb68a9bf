//! Great-circle geometry on the mean-radius sphere.

/// Mean Earth radius in kilometers (IUGG arithmetic mean radius).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle distance between two points given in degrees, in kilometers.
///
/// Haversine form: symmetric, non-negative, and numerically stable at the
/// short ranges trajectory data produces. Positional error from treating the
/// Earth as a sphere is far below typical GPS noise.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let half_dphi = (lat2 - lat1).to_radians() / 2.0;
    let half_dlambda = (lon2 - lon1).to_radians() / 2.0;
    let a = half_dphi.sin().powi(2) + phi1.cos() * phi2.cos() * half_dlambda.sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Displace a point by meters east/north in the local tangent plane.
///
/// Accurate to well under a meter at the kilometer scales used here; only the
/// synthetic generator and tests need it.
pub fn offset_meters(lat: f64, lon: f64, east_m: f64, north_m: f64) -> (f64, f64) {
    let r_m = EARTH_RADIUS_KM * 1000.0;
    let dlat = (north_m / r_m).to_degrees();
    let dlon = (east_m / (r_m * lat.to_radians().cos())).to_degrees();
    (lat + dlat, lon + dlon)
}

/// Point a fraction `f` (0..=1) of the way along the great circle from `a` to `b`.
pub fn intermediate_point(a: (f64, f64), b: (f64, f64), f: f64) -> (f64, f64) {
    let va = to_unit_vector(a.0, a.1);
    let vb = to_unit_vector(b.0, b.1);
    let dot = (va[0] * vb[0] + va[1] * vb[1] + va[2] * vb[2]).clamp(-1.0, 1.0);
    let omega = dot.acos();
    if omega < 1e-12 {
        return a;
    }
    let (wa, wb) = (
        ((1.0 - f) * omega).sin() / omega.sin(),
        (f * omega).sin() / omega.sin(),
    );
    let v = [
        wa * va[0] + wb * vb[0],
        wa * va[1] + wb * vb[1],
        wa * va[2] + wb * vb[2],
    ];
    from_unit_vector(v)
}

fn to_unit_vector(lat: f64, lon: f64) -> [f64; 3] {
    let (phi, lambda) = (lat.to_radians(), lon.to_radians());
    [
        phi.cos() * lambda.cos(),
        phi.cos() * lambda.sin(),
        phi.sin(),
    ]
}

fn from_unit_vector(v: [f64; 3]) -> (f64, f64) {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let lat = (v[2] / norm).asin().to_degrees();
    let lon = v[1].atan2(v[0]).to_degrees();
    (lat, lon)
}
