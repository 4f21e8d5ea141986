//! Transforms between grid coordinates `(x, y)` and geographic `(lon, lat)`.
//!
//! `forward` maps grid coordinates to longitude/latitude, `inverse` maps back.
//! All projections are spherical.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{invalid_spec, Error, Result};
use crate::point::{wrap_lon_delta, PointLonLat, PointXY};

/// Default sphere radius in meters.
pub const EARTH_RADIUS: f64 = 6_371_229.0;

fn default_radius() -> f64 {
    EARTH_RADIUS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Degrees,
    Meters,
}

/// Serializable description of a projection, tagged by `"type"`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProjectionSpec {
    #[default]
    Lonlat,
    RotatedLonlat {
        north_pole: [f64; 2],
    },
    Schmidt {
        stretching_factor: f64,
    },
    RotatedSchmidt {
        stretching_factor: f64,
        north_pole: [f64; 2],
    },
    Mercator {
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default)]
        central_meridian: f64,
    },
    RotatedMercator {
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default)]
        central_meridian: f64,
        north_pole: [f64; 2],
    },
    Lambert {
        #[serde(default = "default_radius")]
        radius: f64,
        #[serde(default)]
        central_meridian: f64,
        standard_parallel_1: f64,
        standard_parallel_2: f64,
        /// Latitude whose cone radius anchors `y = 0`; defaults to the
        /// first standard parallel.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        latitude_of_origin: Option<f64>,
    },
}

impl ProjectionSpec {
    pub fn type_name(&self) -> &'static str {
        match self {
            Self::Lonlat => "lonlat",
            Self::RotatedLonlat { .. } => "rotated_lonlat",
            Self::Schmidt { .. } => "schmidt",
            Self::RotatedSchmidt { .. } => "rotated_schmidt",
            Self::Mercator { .. } => "mercator",
            Self::RotatedMercator { .. } => "rotated_mercator",
            Self::Lambert { .. } => "lambert",
        }
    }

    pub fn units(&self) -> Units {
        match self {
            Self::Lonlat
            | Self::RotatedLonlat { .. }
            | Self::Schmidt { .. }
            | Self::RotatedSchmidt { .. } => Units::Degrees,
            Self::Mercator { .. } | Self::RotatedMercator { .. } | Self::Lambert { .. } => {
                Units::Meters
            }
        }
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| invalid_spec(format!("projection: {e}")))
    }
}

/// Rotation taking the rotated frame (pole at its own z-axis) onto the
/// geographic frame where that pole sits at `north_pole`.
#[derive(Clone, Debug, PartialEq)]
struct Rotation {
    matrix: [[f64; 3]; 3],
    identity: bool,
}

impl Rotation {
    fn new(north_pole: [f64; 2]) -> Result<Self> {
        let [lon_p, lat_p] = north_pole;
        if !(lon_p.is_finite() && lat_p.is_finite()) || lat_p.abs() > 90.0 {
            return Err(invalid_spec(format!(
                "north_pole ({lon_p}, {lat_p}) is not a valid position"
            )));
        }
        let identity = lon_p == 0.0 && lat_p == 90.0;
        let (sz, cz) = lon_p.to_radians().sin_cos();
        let (sy, cy) = (90.0 - lat_p).to_radians().sin_cos();
        // R_z(lon_p) * R_y(90 - lat_p)
        let matrix = [
            [cz * cy, -sz, cz * sy],
            [sz * cy, cz, sz * sy],
            [-sy, 0.0, cy],
        ];
        Ok(Self { matrix, identity })
    }

    fn to_geographic(&self, p: PointLonLat) -> PointLonLat {
        if self.identity {
            return p;
        }
        let v = p.to_unit_vector();
        let m = &self.matrix;
        let w = [0, 1, 2].map(|r| m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2]);
        PointLonLat::from_unit_vector(w)
    }

    fn to_rotated(&self, p: PointLonLat) -> PointLonLat {
        if self.identity {
            return p;
        }
        let v = p.to_unit_vector();
        let m = &self.matrix;
        let w = [0, 1, 2].map(|c| m[0][c] * v[0] + m[1][c] * v[1] + m[2][c] * v[2]);
        PointLonLat::from_unit_vector(w)
    }
}

/// Schmidt stretching of latitude with factor `c`; longitude is unchanged.
fn schmidt_stretch(lat_deg: f64, c: f64) -> f64 {
    if c == 1.0 || lat_deg.abs() == 90.0 {
        return lat_deg;
    }
    let (mu, cos_lat) = lat_deg.to_radians().sin_cos();
    let a = 1.0 - c * c;
    let b = 1.0 + c * c;
    let denom = b + a * mu;
    let mu_s = (a + b * mu) / denom;
    let cos_s = 2.0 * c * cos_lat / denom;
    mu_s.atan2(cos_s).to_degrees()
}

#[derive(Clone, Debug, PartialEq)]
struct Lambert {
    radius: f64,
    central_meridian: f64,
    n: f64,
    f: f64,
    rho0: f64,
}

impl Lambert {
    fn new(radius: f64, central_meridian: f64, phi1: f64, phi2: f64, origin: f64) -> Result<Self> {
        for (name, v) in [("standard_parallel_1", phi1), ("standard_parallel_2", phi2)] {
            if !(v.abs() < 90.0) {
                return Err(invalid_spec(format!(
                    "{name} must satisfy |phi| < 90, got {v}"
                )));
            }
        }
        if !(origin.abs() < 90.0) {
            return Err(invalid_spec(format!(
                "latitude_of_origin must satisfy |phi| < 90, got {origin}"
            )));
        }
        let (p1, p2) = (phi1.to_radians(), phi2.to_radians());
        let t = |phi: f64| (FRAC_PI_4 + phi / 2.0).tan();
        let n = if phi1 == phi2 {
            p1.sin()
        } else {
            (p1.cos() / p2.cos()).ln() / (t(p2) / t(p1)).ln()
        };
        if n == 0.0 || !n.is_finite() {
            return Err(invalid_spec("standard parallels give a degenerate cone"));
        }
        let f = p1.cos() * t(p1).powf(n) / n;
        let rho0 = radius * f * t(origin.to_radians()).powf(-n);
        Ok(Self {
            radius,
            central_meridian,
            n,
            f,
            rho0,
        })
    }

    fn rho(&self, lat_deg: f64) -> f64 {
        self.radius * self.f * (FRAC_PI_4 + lat_deg.to_radians() / 2.0).tan().powf(-self.n)
    }

    fn xy_to_lonlat(&self, p: PointXY) -> Result<PointLonLat> {
        let sign = self.n.signum();
        let dy = self.rho0 - p.y;
        let rho = sign * p.x.hypot(dy);
        if rho == 0.0 || !rho.is_finite() {
            return Err(Error::ProjectionDomain(format!(
                "lambert: ({}, {}) maps to the cone apex",
                p.x, p.y
            )));
        }
        let theta = (sign * p.x).atan2(sign * dy);
        let lat = 2.0 * (self.radius * self.f / rho).powf(1.0 / self.n).atan() - FRAC_PI_2;
        let lon = self.central_meridian + (theta / self.n).to_degrees();
        Ok(PointLonLat::new(lon, lat.to_degrees()))
    }

    fn lonlat_to_xy(&self, q: PointLonLat) -> Result<PointXY> {
        let rho = self.rho(q.lat);
        if !rho.is_finite() || q.lat.abs() > 90.0 {
            return Err(Error::ProjectionDomain(format!(
                "lambert: latitude {} is not representable",
                q.lat
            )));
        }
        let theta = self.n * wrap_lon_delta(q.lon - self.central_meridian).to_radians();
        let (s, c) = theta.sin_cos();
        Ok(PointXY::new(rho * s, self.rho0 - rho * c))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Mercator {
    radius: f64,
    central_meridian: f64,
}

impl Mercator {
    fn xy_to_lonlat(&self, p: PointXY) -> PointLonLat {
        let lon = self.central_meridian + (p.x / self.radius).to_degrees();
        let lat = 2.0 * (p.y / self.radius).exp().atan() - FRAC_PI_2;
        PointLonLat::new(lon, lat.to_degrees())
    }

    fn lonlat_to_xy(&self, q: PointLonLat) -> Result<PointXY> {
        if !(q.lat.abs() < 90.0) {
            return Err(Error::ProjectionDomain(format!(
                "mercator: latitude {} has no finite image",
                q.lat
            )));
        }
        let x = self.radius * wrap_lon_delta(q.lon - self.central_meridian).to_radians();
        let y = self.radius * (FRAC_PI_4 + q.lat.to_radians() / 2.0).tan().ln();
        Ok(PointXY::new(x, y))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Lonlat,
    Rotated(Rotation),
    Schmidt(f64),
    RotatedSchmidt(f64, Rotation),
    Mercator(Mercator),
    RotatedMercator(Mercator, Rotation),
    Lambert(Lambert),
}

/// An immutable coordinate transform built from a [`ProjectionSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    spec: ProjectionSpec,
    kind: Kind,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid_spec(format!("{name} must be positive, got {v}")))
    }
}

impl Projection {
    pub fn new(spec: ProjectionSpec) -> Result<Self> {
        let kind = match &spec {
            ProjectionSpec::Lonlat => Kind::Lonlat,
            ProjectionSpec::RotatedLonlat { north_pole } => {
                Kind::Rotated(Rotation::new(*north_pole)?)
            }
            ProjectionSpec::Schmidt { stretching_factor } => {
                check_positive("stretching_factor", *stretching_factor)?;
                Kind::Schmidt(*stretching_factor)
            }
            ProjectionSpec::RotatedSchmidt {
                stretching_factor,
                north_pole,
            } => {
                check_positive("stretching_factor", *stretching_factor)?;
                Kind::RotatedSchmidt(*stretching_factor, Rotation::new(*north_pole)?)
            }
            ProjectionSpec::Mercator {
                radius,
                central_meridian,
            } => {
                check_positive("radius", *radius)?;
                Kind::Mercator(Mercator {
                    radius: *radius,
                    central_meridian: *central_meridian,
                })
            }
            ProjectionSpec::RotatedMercator {
                radius,
                central_meridian,
                north_pole,
            } => {
                check_positive("radius", *radius)?;
                Kind::RotatedMercator(
                    Mercator {
                        radius: *radius,
                        central_meridian: *central_meridian,
                    },
                    Rotation::new(*north_pole)?,
                )
            }
            ProjectionSpec::Lambert {
                radius,
                central_meridian,
                standard_parallel_1,
                standard_parallel_2,
                latitude_of_origin,
            } => {
                check_positive("radius", *radius)?;
                Kind::Lambert(Lambert::new(
                    *radius,
                    *central_meridian,
                    *standard_parallel_1,
                    *standard_parallel_2,
                    latitude_of_origin.unwrap_or(*standard_parallel_1),
                )?)
            }
        };
        Ok(Self { spec, kind })
    }

    pub fn lonlat() -> Self {
        Self {
            spec: ProjectionSpec::Lonlat,
            kind: Kind::Lonlat,
        }
    }

    pub fn spec(&self) -> &ProjectionSpec {
        &self.spec
    }

    pub fn units(&self) -> Units {
        self.spec.units()
    }

    /// Grid coordinates to geographic coordinates.
    pub fn forward(&self, p: PointXY) -> Result<PointLonLat> {
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::ProjectionDomain(format!(
                "non-finite point ({}, {})",
                p.x, p.y
            )));
        }
        let as_lonlat = || PointLonLat::new(p.x, p.y);
        let out = match &self.kind {
            Kind::Lonlat => as_lonlat(),
            Kind::Rotated(r) => r.to_geographic(as_lonlat()),
            Kind::Schmidt(c) => PointLonLat::new(p.x, schmidt_stretch(p.y, *c)),
            Kind::RotatedSchmidt(c, r) => {
                r.to_geographic(PointLonLat::new(p.x, schmidt_stretch(p.y, *c)))
            }
            Kind::Mercator(m) => m.xy_to_lonlat(p),
            Kind::RotatedMercator(m, r) => r.to_geographic(m.xy_to_lonlat(p)),
            Kind::Lambert(l) => l.xy_to_lonlat(p)?,
        };
        if !(out.lat.abs() <= 90.0) {
            return Err(Error::ProjectionDomain(format!(
                "({}, {}) maps outside the sphere",
                p.x, p.y
            )));
        }
        Ok(out)
    }

    /// Geographic coordinates to grid coordinates.
    pub fn inverse(&self, q: PointLonLat) -> Result<PointXY> {
        if !(q.lon.is_finite() && q.lat.is_finite()) || q.lat.abs() > 90.0 {
            return Err(Error::ProjectionDomain(format!(
                "invalid position ({}, {})",
                q.lon, q.lat
            )));
        }
        let xy = |p: PointLonLat| PointXY::new(p.lon, p.lat);
        Ok(match &self.kind {
            Kind::Lonlat => xy(q),
            Kind::Rotated(r) => xy(r.to_rotated(q)),
            Kind::Schmidt(c) => PointXY::new(q.lon, schmidt_stretch(q.lat, 1.0 / c)),
            Kind::RotatedSchmidt(c, r) => {
                let p = r.to_rotated(q);
                PointXY::new(p.lon, schmidt_stretch(p.lat, 1.0 / c))
            }
            Kind::Mercator(m) => m.lonlat_to_xy(q)?,
            Kind::RotatedMercator(m, r) => m.lonlat_to_xy(r.to_rotated(q))?,
            Kind::Lambert(l) => l.lonlat_to_xy(q)?,
        })
    }
}

impl Default for Projection {
    fn default() -> Self {
        Self::lonlat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn make(v: serde_json::Value) -> Projection {
        Projection::new(ProjectionSpec::from_json(v).unwrap()).unwrap()
    }

    #[test]
    fn lonlat_is_identity() {
        let p = Projection::lonlat();
        assert_eq!(
            p.forward(PointXY::new(30.0, 45.0)).unwrap(),
            PointLonLat::new(30.0, 45.0)
        );
        assert_eq!(
            p.inverse(PointLonLat::new(100.0, -20.0)).unwrap(),
            PointXY::new(100.0, -20.0)
        );
    }

    #[test]
    fn schmidt_unit_factor_is_identity() {
        let p = make(json!({"type": "schmidt", "stretching_factor": 1.0}));
        for lat in [-89.0, -30.5, 0.0, 12.25, 77.7] {
            assert_eq!(p.forward(PointXY::new(10.0, lat)).unwrap().lat, lat);
        }
    }

    #[test]
    fn schmidt_keeps_poles_and_longitude() {
        for c in [0.3, 2.0, 5.0] {
            let p = make(json!({"type": "schmidt", "stretching_factor": c}));
            assert_eq!(p.forward(PointXY::new(12.0, 90.0)).unwrap().lat, 90.0);
            assert_eq!(p.forward(PointXY::new(12.0, -90.0)).unwrap().lat, -90.0);
            assert_eq!(p.forward(PointXY::new(12.0, 33.0)).unwrap().lon, 12.0);
        }
    }

    #[test]
    fn schmidt_round_trip() {
        let p = make(json!({"type": "schmidt", "stretching_factor": 2.0}));
        let q = p.forward(PointXY::new(40.0, 20.0)).unwrap();
        let back = p.inverse(q).unwrap();
        assert!((back.y - 20.0).abs() < 1e-10);
        assert!((back.x - 40.0).abs() < 1e-10);
    }

    #[test]
    fn mercator_equator() {
        let r = 6_371_229.0;
        let p = make(json!({"type": "mercator", "radius": r, "central_meridian": 0.0}));
        assert_eq!(p.units(), Units::Meters);
        let x = 1.0e6;
        let q = p.forward(PointXY::new(x, 0.0)).unwrap();
        assert_eq!(q.lat, 0.0);
        assert!((q.lon - x * 180.0 / (std::f64::consts::PI * r)).abs() < 1e-12);
    }

    #[test]
    fn mercator_pole_is_a_domain_error() {
        let p = make(json!({"type": "mercator"}));
        assert!(matches!(
            p.inverse(PointLonLat::new(0.0, 90.0)),
            Err(Error::ProjectionDomain(_))
        ));
    }

    #[test]
    fn unrotated_pole_is_identity() {
        let p = make(json!({"type": "rotated_lonlat", "north_pole": [0.0, 90.0]}));
        let q = PointLonLat::new(123.456, -12.5);
        assert_eq!(p.forward(PointXY::new(q.lon, q.lat)).unwrap(), q);
    }

    #[test]
    fn rotated_pole_maps_to_north_pole_parameter() {
        let p = make(json!({"type": "rotated_lonlat", "north_pole": [40.0, 30.0]}));
        let q = p.forward(PointXY::new(0.0, 90.0)).unwrap();
        assert!((q.lon - 40.0).abs() < 1e-9 && (q.lat - 30.0).abs() < 1e-9);
    }

    #[test]
    fn lambert_apex_is_domain_error() {
        let p = make(json!({
            "type": "lambert", "standard_parallel_1": 30.0, "standard_parallel_2": 60.0,
            "latitude_of_origin": 45.0
        }));
        let Projection {
            kind: Kind::Lambert(l),
            ..
        } = &p
        else {
            unreachable!()
        };
        assert!(matches!(
            p.forward(PointXY::new(0.0, l.rho0)),
            Err(Error::ProjectionDomain(_))
        ));
    }

    #[test]
    fn lambert_single_parallel_uses_sine() {
        let l = Lambert::new(EARTH_RADIUS, 0.0, 40.0, 40.0, 40.0).unwrap();
        assert!((l.n - 40f64.to_radians().sin()).abs() < 1e-15);
        // origin latitude maps onto y = 0 at the central meridian
        let xy = l.lonlat_to_xy(PointLonLat::new(0.0, 40.0)).unwrap();
        assert!(xy.x.abs() < 1e-9 && xy.y.abs() < 1e-6);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ProjectionSpec::from_json(json!({"type": "stereographic"})).is_err());
        assert!(ProjectionSpec::from_json(json!({"type": "schmidt"})).is_err());
        let bad = ProjectionSpec::Schmidt {
            stretching_factor: 0.0,
        };
        assert!(Projection::new(bad).is_err());
        let bad = ProjectionSpec::Lambert {
            radius: EARTH_RADIUS,
            central_meridian: 0.0,
            standard_parallel_1: 90.0,
            standard_parallel_2: 45.0,
            latitude_of_origin: None,
        };
        assert!(Projection::new(bad).is_err());
        let bad = ProjectionSpec::Mercator {
            radius: -1.0,
            central_meridian: 0.0,
        };
        assert!(Projection::new(bad).is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = ProjectionSpec::RotatedSchmidt {
            stretching_factor: 2.5,
            north_pole: [10.0, 45.0],
        };
        let v = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["type"], "rotated_schmidt");
        assert_eq!(ProjectionSpec::from_json(v).unwrap(), spec);
    }
}
