//! Structured, reduced and unstructured grids.
//!
//! A [`Grid`] is an immutable, ordered set of points together with the
//! projection that maps its coordinates to longitude/latitude and the domain
//! it covers. Structured grids enumerate points parallel by parallel, north to
//! south, west to east within a parallel.

mod gaussian;
mod name;
mod spec;

use std::sync::OnceLock;

use serde::Serialize;

pub use gaussian::gaussian_latitudes;
pub use name::{classic_pl, load_classic_tables, parse_grid_name, register_classic_pl, CLASSIC_N};
pub use spec::{GridSpec, GridType};

use crate::domain::Domain;
use crate::error::{invalid_argument, invalid_spec, Error, Result};
use crate::point::{PointLonLat, PointXY};
use crate::projection::{Projection, Units};

/// Per-parallel point counts of the octahedral reduced Gaussian grid.
pub fn octahedral_nx(n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(invalid_argument("Gaussian number N must be at least 1"));
    }
    let last = 2 * n - 1;
    let mut nx = vec![0; 2 * n];
    for j in 0..n {
        nx[j] = 20 + 4 * j;
        nx[last - j] = nx[j];
    }
    Ok(nx)
}

/// Parallels of a structured grid and the uniform point spacing along each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuredGridData {
    y: Vec<f64>,
    nx: Vec<usize>,
    xmin: Vec<f64>,
    dx: Vec<f64>,
    /// `offset[j]` is the global index of the first point on parallel `j`.
    #[serde(skip)]
    offset: Vec<usize>,
}

impl StructuredGridData {
    pub fn new(y: Vec<f64>, nx: Vec<usize>, xmin: Vec<f64>, dx: Vec<f64>) -> Result<Self> {
        let ny = y.len();
        if ny == 0 || nx.len() != ny || xmin.len() != ny || dx.len() != ny {
            return Err(invalid_spec(
                "structured grid arrays must have equal, non-zero length",
            ));
        }
        if nx.contains(&0) {
            return Err(invalid_spec("every parallel needs at least one point"));
        }
        if y.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(invalid_spec("parallels must be strictly decreasing in y"));
        }
        let mut offset = Vec::with_capacity(ny + 1);
        offset.push(0);
        for &n in &nx {
            offset.push(offset.last().unwrap() + n);
        }
        Ok(Self {
            y,
            nx,
            xmin,
            dx,
            offset,
        })
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn nx(&self, j: usize) -> usize {
        self.nx[j]
    }

    pub fn nx_all(&self) -> &[usize] {
        &self.nx
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y[j]
    }

    pub fn y_all(&self) -> &[f64] {
        &self.y
    }

    pub fn xmin(&self, j: usize) -> f64 {
        self.xmin[j]
    }

    pub fn dx(&self, j: usize) -> f64 {
        self.dx[j]
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.xmin[j] + i as f64 * self.dx[j]
    }

    pub fn xy(&self, i: usize, j: usize) -> PointXY {
        PointXY::new(self.x(i, j), self.y[j])
    }

    pub fn size(&self) -> usize {
        *self.offset.last().unwrap()
    }

    /// Global index of point `i` on parallel `j`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offset[j] + i
    }

    /// Index of the first point of every parallel, plus the total at the end.
    pub fn offsets(&self) -> &[usize] {
        &self.offset
    }

    /// `(i, j)` of global index `n`.
    pub fn ij(&self, n: usize) -> (usize, usize) {
        let j = self.offset.partition_point(|&o| o <= n) - 1;
        (n - self.offset[j], j)
    }

    fn is_regular(&self) -> bool {
        let same = |v: &[f64]| v.iter().all(|&a| a == v[0]);
        self.nx.iter().all(|&n| n == self.nx[0]) && same(&self.dx) && same(&self.xmin)
    }

    /// Whether every parallel wraps exactly once around 360 degrees.
    fn spans_full_circle(&self) -> bool {
        self.nx
            .iter()
            .zip(&self.dx)
            .all(|(&n, &dx)| (n as f64 * dx - 360.0).abs() < 1e-9)
    }

    fn uniform_y(&self) -> bool {
        if self.y.len() < 2 {
            return true;
        }
        let d0 = self.y[0] - self.y[1];
        self.y
            .windows(2)
            .all(|w| ((w[0] - w[1]) - d0).abs() < 1e-10)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum GridImpl {
    Structured(StructuredGridData),
    Unstructured(Vec<PointXY>),
}

/// Interpretation classes a grid satisfies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GridClassification {
    pub structured: bool,
    pub regular: bool,
    pub reduced: bool,
    pub gaussian: bool,
    pub regular_gaussian: bool,
    pub reduced_gaussian: bool,
    pub regular_lonlat: bool,
    pub regular_periodic: bool,
    pub regular_regional: bool,
    pub unstructured: bool,
}

impl GridClassification {
    /// Names of all classes that hold.
    pub fn names(&self) -> Vec<&'static str> {
        [
            ("structured", self.structured),
            ("regular", self.regular),
            ("reduced", self.reduced),
            ("gaussian", self.gaussian),
            ("regular_gaussian", self.regular_gaussian),
            ("reduced_gaussian", self.reduced_gaussian),
            ("regular_lonlat", self.regular_lonlat),
            ("regular_periodic", self.regular_periodic),
            ("regular_regional", self.regular_regional),
            ("unstructured", self.unstructured),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.then_some(n))
        .collect()
    }
}

/// An immutable point set with projection and domain.
#[derive(Debug)]
pub struct Grid {
    inner: GridImpl,
    projection: Projection,
    domain: Domain,
    spec: GridSpec,
    classification: OnceLock<GridClassification>,
}

impl Grid {
    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let projection = Projection::new(spec.projection.clone())?;
        let domain = Domain::new(spec.domain.clone())?;
        let inner = build(&spec)?;
        Ok(Self {
            inner,
            projection,
            domain,
            spec,
            classification: OnceLock::new(),
        })
    }

    /// Build from a short name such as `O32`.
    pub fn from_name(name: &str) -> Result<Self> {
        Self::from_spec(parse_grid_name(name)?)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn name(&self) -> Option<String> {
        self.spec.name()
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn size(&self) -> usize {
        match &self.inner {
            GridImpl::Structured(s) => s.size(),
            GridImpl::Unstructured(p) => p.len(),
        }
    }

    pub fn structured(&self) -> Option<&StructuredGridData> {
        match &self.inner {
            GridImpl::Structured(s) => Some(s),
            GridImpl::Unstructured(_) => None,
        }
    }

    pub fn xy(&self, n: usize) -> Result<PointXY> {
        let size = self.size();
        if n >= size {
            return Err(Error::Index { index: n, size });
        }
        Ok(match &self.inner {
            GridImpl::Structured(s) => {
                let (i, j) = s.ij(n);
                s.xy(i, j)
            }
            GridImpl::Unstructured(p) => p[n],
        })
    }

    pub fn lonlat(&self, n: usize) -> Result<PointLonLat> {
        self.projection.forward(self.xy(n)?)
    }

    /// All points in enumeration order.
    pub fn points(&self) -> impl Iterator<Item = PointXY> + '_ {
        (0..self.size()).map(move |n| self.xy(n).expect("index in range"))
    }

    /// Whether x wraps around: global or zonal-band domain in degrees with
    /// every parallel covering the full circle.
    pub fn is_periodic_x(&self) -> bool {
        self.domain.is_periodic_x()
            && self.projection.units() == Units::Degrees
            && self.structured().is_some_and(|s| s.spans_full_circle())
    }

    pub fn uid(&self) -> String {
        self.spec.uid()
    }

    pub fn classify(&self) -> GridClassification {
        *self
            .classification
            .get_or_init(|| self.compute_classification())
    }

    fn compute_classification(&self) -> GridClassification {
        let Some(s) = self.structured() else {
            return GridClassification {
                unstructured: true,
                ..Default::default()
            };
        };
        let degrees = self.projection.units() == Units::Degrees;
        let global = self.domain.is_global() && degrees;
        let periodic = self.is_periodic_x();
        let regular = s.is_regular();
        let ny = s.ny();
        let gaussian = global
            && ny % 2 == 0
            && gaussian_latitudes(ny / 2)
                .map(|lats| {
                    lats.iter()
                        .zip(s.y_all())
                        .all(|(a, b)| (a - b).abs() < 1e-10)
                })
                .unwrap_or(false);
        GridClassification {
            structured: true,
            regular,
            reduced: !regular,
            gaussian,
            regular_gaussian: regular && gaussian,
            reduced_gaussian: !regular && gaussian,
            regular_lonlat: global && regular && periodic && s.uniform_y(),
            regular_periodic: regular && periodic && degrees,
            regular_regional: regular && !self.domain.is_global() && !periodic,
            unstructured: false,
        }
    }
}

fn build(spec: &GridSpec) -> Result<GridImpl> {
    let gaussian = |nx: Vec<usize>| -> Result<GridImpl> {
        let ny = nx.len();
        let y = gaussian_latitudes(ny / 2)?;
        let dx = nx.iter().map(|&n| 360.0 / n as f64).collect();
        Ok(GridImpl::Structured(StructuredGridData::new(
            y,
            nx,
            vec![0.0; ny],
            dx,
        )?))
    };
    match spec.kind {
        GridType::RegularGaussian => {
            let n = spec.n.unwrap();
            gaussian(vec![4 * n; 2 * n])
        }
        GridType::OctahedralGaussian => gaussian(octahedral_nx(spec.n.unwrap())?),
        GridType::ClassicGaussian => gaussian(spec.pl.clone().unwrap()),
        GridType::RegularLonlat
        | GridType::ShiftedLonlat
        | GridType::ShiftedLon
        | GridType::ShiftedLat => {
            let shift_x = matches!(spec.kind, GridType::ShiftedLonlat | GridType::ShiftedLon);
            let shift_y = matches!(spec.kind, GridType::ShiftedLonlat | GridType::ShiftedLat);
            let (nx, ny) = match (spec.n, spec.nx, spec.ny) {
                (Some(n), _, _) => (4 * n, if shift_y { 2 * n } else { 2 * n + 1 }),
                (None, Some(nx), Some(ny)) => (nx, ny),
                _ => unreachable!("validated"),
            };
            let dx = 360.0 / nx as f64;
            let y: Vec<f64> = if shift_y {
                let dy = 180.0 / ny as f64;
                (0..ny).map(|j| 90.0 - dy / 2.0 - j as f64 * dy).collect()
            } else {
                let dy = 180.0 / (ny - 1) as f64;
                (0..ny)
                    .map(|j| {
                        if j == ny - 1 {
                            -90.0
                        } else {
                            90.0 - j as f64 * dy
                        }
                    })
                    .collect()
            };
            let xmin = if shift_x { dx / 2.0 } else { 0.0 };
            Ok(GridImpl::Structured(StructuredGridData::new(
                y,
                vec![nx; ny],
                vec![xmin; ny],
                vec![dx; ny],
            )?))
        }
        GridType::RegularRegional => {
            let (nx, ny) = (spec.nx.unwrap(), spec.ny.unwrap());
            let Domain::Rectangular {
                xmin,
                xmax,
                ymin,
                ymax,
            } = spec.domain
            else {
                unreachable!("validated")
            };
            if ny > 1 && ymin == ymax {
                return Err(invalid_spec("regional grid with ny > 1 needs ymin < ymax"));
            }
            let dx = if nx > 1 {
                (xmax - xmin) / (nx - 1) as f64
            } else {
                0.0
            };
            let dy = if ny > 1 {
                (ymax - ymin) / (ny - 1) as f64
            } else {
                0.0
            };
            let y = (0..ny)
                .map(|j| {
                    if j == ny - 1 && ny > 1 {
                        ymin
                    } else {
                        ymax - j as f64 * dy
                    }
                })
                .collect();
            Ok(GridImpl::Structured(StructuredGridData::new(
                y,
                vec![nx; ny],
                vec![xmin; ny],
                vec![dx; ny],
            )?))
        }
        GridType::Unstructured => Ok(GridImpl::Unstructured(
            spec.points
                .iter()
                .flatten()
                .map(|&p| PointXY::from(p))
                .collect(),
        )),
    }
}
