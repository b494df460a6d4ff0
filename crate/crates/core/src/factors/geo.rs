use super::{FactorError, UserRecord};

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
pub const DEFAULT_GEOFENCE_M: f64 = 500.0;

/// A WGS-84 style latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    /// `lat` in [-90, 90], `lon` in (-180, 180].
    pub fn new(lat: f64, lon: f64) -> Result<Self, FactorError> {
        if !(-90.0..=90.0).contains(&lat) || !(lon > -180.0 && lon <= 180.0) {
            return Err(FactorError::InvalidLocation);
        }
        Ok(GeoPoint { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Haversine great-circle distance in meters.
pub fn geo_distance(p: GeoPoint, q: GeoPoint) -> f64 {
    let (lat1, lat2) = (p.lat.to_radians(), q.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (q.lon - p.lon).to_radians();
    let s_lat = libm::sin(dlat / 2.0);
    let s_lon = libm::sin(dlon / 2.0);
    let a = s_lat * s_lat + libm::cos(lat1) * libm::cos(lat2) * s_lon * s_lon;
    2.0 * EARTH_RADIUS_M * libm::asin(libm::sqrt(a.min(1.0)))
}

pub fn verify_location(record: &UserRecord, reported: GeoPoint, radius_m: f64) -> bool {
    geo_distance(record.home(), reported) <= radius_m
}
