use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{invalid_spec, Result};
use crate::projection::{ProjectionSpec, Units};
use crate::util::{canonical_json, fnv1a64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridType {
    Unstructured,
    RegularGaussian,
    ClassicGaussian,
    OctahedralGaussian,
    RegularLonlat,
    ShiftedLonlat,
    ShiftedLon,
    ShiftedLat,
    RegularRegional,
}

impl GridType {
    pub const ALL: [GridType; 9] = [
        GridType::Unstructured,
        GridType::RegularGaussian,
        GridType::ClassicGaussian,
        GridType::OctahedralGaussian,
        GridType::RegularLonlat,
        GridType::ShiftedLonlat,
        GridType::ShiftedLon,
        GridType::ShiftedLat,
        GridType::RegularRegional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GridType::Unstructured => "unstructured",
            GridType::RegularGaussian => "regular_gaussian",
            GridType::ClassicGaussian => "classic_gaussian",
            GridType::OctahedralGaussian => "octahedral_gaussian",
            GridType::RegularLonlat => "regular_lonlat",
            GridType::ShiftedLonlat => "shifted_lonlat",
            GridType::ShiftedLon => "shifted_lon",
            GridType::ShiftedLat => "shifted_lat",
            GridType::RegularRegional => "regular_regional",
        }
    }

    pub(crate) fn is_lonlat_family(self) -> bool {
        matches!(
            self,
            GridType::RegularLonlat
                | GridType::ShiftedLonlat
                | GridType::ShiftedLon
                | GridType::ShiftedLat
        )
    }
}

/// Configuration from which a [`Grid`](super::Grid) is built.
///
/// Field names follow the JSON representation; `N` is the Gaussian number or
/// the number of parallels between pole and equator for lon-lat grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "type")]
    pub kind: GridType,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pl: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub projection: ProjectionSpec,
    #[serde(default)]
    pub domain: Domain,
}

impl GridSpec {
    pub fn new(kind: GridType) -> Self {
        Self {
            kind,
            n: None,
            nx: None,
            ny: None,
            pl: None,
            points: None,
            projection: ProjectionSpec::Lonlat,
            domain: Domain::Global,
        }
    }

    pub fn with_n(kind: GridType, n: usize) -> Self {
        Self {
            n: Some(n),
            ..Self::new(kind)
        }
    }

    pub fn with_nx_ny(kind: GridType, nx: usize, ny: usize) -> Self {
        Self {
            nx: Some(nx),
            ny: Some(ny),
            ..Self::new(kind)
        }
    }

    pub fn unstructured(points: Vec<[f64; 2]>) -> Self {
        Self {
            points: Some(points),
            ..Self::new(GridType::Unstructured)
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| invalid_spec(format!("grid spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("grid spec serializes")
    }

    /// Sorted-key serialization with fixed float formatting.
    pub fn canonical(&self) -> String {
        canonical_json(&self.to_json())
    }

    /// 16 hex digits of FNV-1a over [`canonical`](Self::canonical).
    pub fn uid(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }

    /// Short name (`F16`, `O32`, `L64x33`, `S4`, ...) when the spec has one.
    pub fn name(&self) -> Option<String> {
        if self.projection != ProjectionSpec::Lonlat || self.domain != Domain::Global {
            return None;
        }
        let prefix = match self.kind {
            GridType::RegularGaussian => "F",
            GridType::OctahedralGaussian => "O",
            GridType::ClassicGaussian => "N",
            GridType::RegularLonlat => "L",
            GridType::ShiftedLonlat => "S",
            GridType::ShiftedLon => "SLON",
            GridType::ShiftedLat => "SLAT",
            GridType::Unstructured | GridType::RegularRegional => return None,
        };
        match (self.n, self.nx, self.ny) {
            (Some(n), None, None) => Some(format!("{prefix}{n}")),
            (None, Some(nx), Some(ny)) if self.kind.is_lonlat_family() => {
                Some(format!("{prefix}{nx}x{ny}"))
            }
            _ => None,
        }
    }

    /// Check that exactly the fields required by `type` are present.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind.as_str();
        let forbid = |present: bool, field: &str| -> Result<()> {
            if present {
                Err(invalid_spec(format!("{kind} grid does not take `{field}`")))
            } else {
                Ok(())
            }
        };
        let positive = |v: Option<usize>, field: &str| -> Result<()> {
            match v {
                Some(0) => Err(invalid_spec(format!("`{field}` must be positive"))),
                _ => Ok(()),
            }
        };
        positive(self.n, "N")?;
        positive(self.nx, "nx")?;
        positive(self.ny, "ny")?;
        if let Some(pl) = &self.pl {
            if pl.is_empty() || pl.len() % 2 != 0 {
                return Err(invalid_spec(format!(
                    "pl must have even, non-zero length (got {})",
                    pl.len()
                )));
            }
            if pl.contains(&0) {
                return Err(invalid_spec("pl entries must be positive"));
            }
        }
        let global_only = |spec: &Self| -> Result<()> {
            if !spec.domain.is_global() {
                return Err(invalid_spec(format!(
                    "{kind} grid requires a global domain"
                )));
            }
            if spec.projection.units() != Units::Degrees {
                return Err(invalid_spec(format!(
                    "{kind} grid requires a projection in degrees"
                )));
            }
            Ok(())
        };
        match self.kind {
            GridType::RegularGaussian | GridType::OctahedralGaussian => {
                if self.n.is_none() {
                    return Err(invalid_spec(format!("{kind} grid requires `N`")));
                }
                forbid(self.nx.is_some(), "nx")?;
                forbid(self.ny.is_some(), "ny")?;
                forbid(self.pl.is_some(), "pl")?;
                forbid(self.points.is_some(), "points")?;
                global_only(self)?;
            }
            GridType::ClassicGaussian => {
                let Some(pl) = &self.pl else {
                    return Err(invalid_spec("classic_gaussian grid requires `pl`"));
                };
                if let Some(n) = self.n {
                    if pl.len() != 2 * n {
                        return Err(invalid_spec(format!(
                            "pl has {} entries, expected 2N = {}",
                            pl.len(),
                            2 * n
                        )));
                    }
                }
                forbid(self.nx.is_some(), "nx")?;
                forbid(self.ny.is_some(), "ny")?;
                forbid(self.points.is_some(), "points")?;
                global_only(self)?;
            }
            GridType::RegularLonlat
            | GridType::ShiftedLonlat
            | GridType::ShiftedLon
            | GridType::ShiftedLat => {
                match (self.n, self.nx, self.ny) {
                    (Some(_), None, None) | (None, Some(_), Some(_)) => {}
                    _ => {
                        return Err(invalid_spec(format!(
                            "{kind} grid requires either `N` or both `nx` and `ny`"
                        )));
                    }
                }
                if matches!(self.kind, GridType::RegularLonlat | GridType::ShiftedLon)
                    && self.ny == Some(1)
                {
                    return Err(invalid_spec("pole-to-pole lon-lat grid needs ny >= 2"));
                }
                forbid(self.pl.is_some(), "pl")?;
                forbid(self.points.is_some(), "points")?;
                global_only(self)?;
            }
            GridType::RegularRegional => {
                if self.nx.is_none() || self.ny.is_none() {
                    return Err(invalid_spec("regular_regional grid requires `nx` and `ny`"));
                }
                if !matches!(self.domain, Domain::Rectangular { .. }) {
                    return Err(invalid_spec(
                        "regular_regional grid requires a rectangular domain",
                    ));
                }
                forbid(self.n.is_some(), "N")?;
                forbid(self.pl.is_some(), "pl")?;
                forbid(self.points.is_some(), "points")?;
            }
            GridType::Unstructured => {
                match &self.points {
                    Some(p) if !p.is_empty() => {}
                    _ => {
                        return Err(invalid_spec(
                            "unstructured grid requires non-empty `points`",
                        ))
                    }
                }
                if self
                    .points
                    .iter()
                    .flatten()
                    .flatten()
                    .any(|v| !v.is_finite())
                {
                    return Err(invalid_spec("unstructured grid points must be finite"));
                }
                forbid(self.n.is_some(), "N")?;
                forbid(self.nx.is_some(), "nx")?;
                forbid(self.ny.is_some(), "ny")?;
                forbid(self.pl.is_some(), "pl")?;
            }
        }
        Domain::new(self.domain.clone())?;
        Ok(())
    }
}
