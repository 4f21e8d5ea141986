//! Containment predicates for grid coordinates. All bounds are closed.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_spec, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Rectangular {
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
    },
    ZonalBand {
        ymin: f64,
        ymax: f64,
    },
    #[default]
    Global,
}

impl Domain {
    /// Validate bounds and return the domain.
    pub fn new(spec: Domain) -> Result<Self> {
        match spec {
            Domain::Rectangular {
                xmin,
                xmax,
                ymin,
                ymax,
            } => {
                check_interval("x", xmin, xmax)?;
                check_interval("y", ymin, ymax)?;
            }
            Domain::ZonalBand { ymin, ymax } => {
                check_interval("y", ymin, ymax)?;
                if ymin < -90.0 || ymax > 90.0 {
                    return Err(invalid_spec(format!(
                        "zonal band [{ymin}, {ymax}] exceeds [-90, 90]"
                    )));
                }
            }
            Domain::Global => {}
        }
        Ok(spec)
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let spec =
            serde_json::from_value(value).map_err(|e| invalid_spec(format!("domain: {e}")))?;
        Self::new(spec)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Domain::Rectangular {
                xmin,
                xmax,
                ymin,
                ymax,
            } => (xmin..=xmax).contains(&x) && (ymin..=ymax).contains(&y),
            Domain::ZonalBand { ymin, ymax } => (ymin..=ymax).contains(&y),
            Domain::Global => true,
        }
    }

    pub fn is_global(&self) -> bool {
        match *self {
            Domain::Global => true,
            Domain::ZonalBand { ymin, ymax } => ymin <= -90.0 && ymax >= 90.0,
            Domain::Rectangular { .. } => false,
        }
    }

    /// Whether x wraps around (the domain spans all longitudes).
    pub fn is_periodic_x(&self) -> bool {
        matches!(self, Domain::Global | Domain::ZonalBand { .. })
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Domain::Rectangular { .. } => "rectangular",
            Domain::ZonalBand { .. } => "zonal_band",
            Domain::Global => "global",
        }
    }
}

fn check_interval(axis: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(invalid_spec(format!("{axis}min {lo} > {axis}max {hi}")));
    }
    Ok(())
}
