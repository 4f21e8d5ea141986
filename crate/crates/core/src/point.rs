use serde::{Deserialize, Serialize};

/// A point in grid coordinates: degrees or meters depending on the projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointXY {
    pub x: f64,
    pub y: f64,
}

impl PointXY {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for PointXY {
    fn from(p: [f64; 2]) -> Self {
        Self::new(p[0], p[1])
    }
}

/// Geographic coordinates in degrees. Longitude is kept in `[0, 360)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointLonLat {
    pub lon: f64,
    pub lat: f64,
}

impl PointLonLat {
    pub fn new(lon: f64, lat: f64) -> Self {
        Self {
            lon: normalize_lon(lon),
            lat,
        }
    }

    /// Unit vector on the sphere.
    pub fn to_unit_vector(self) -> [f64; 3] {
        let (slon, clon) = self.lon.to_radians().sin_cos();
        let (slat, clat) = self.lat.to_radians().sin_cos();
        [clat * clon, clat * slon, slat]
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let lat = v[2].atan2(v[0].hypot(v[1])).to_degrees();
        let lon = v[1].atan2(v[0]).to_degrees();
        Self::new(lon, lat)
    }
}

/// Map a longitude into `[0, 360)`.
pub fn normalize_lon(lon: f64) -> f64 {
    let r = lon.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wrap a longitude difference into `[-180, 180)`.
pub(crate) fn wrap_lon_delta(d: f64) -> f64 {
    let r = (d + 180.0).rem_euclid(360.0) - 180.0;
    if r >= 180.0 {
        r - 360.0
    } else {
        r
    }
}
