//! Equal-area zonal partitioning: a polar cap at each end and collars of
//! near-square regions in between.

use std::f64::consts::PI;

use super::{balanced_bounds, Distribution};
use crate::error::{invalid_argument, Result};
use crate::grid::Grid;

/// Colatitude of a polar cap whose area equals one of `parts` equal regions.
fn polar_colatitude(parts: usize) -> f64 {
    2.0 * (1.0 / parts as f64).sqrt().asin()
}

/// Area of a spherical cap of colatitude `s` on the unit sphere.
fn cap_area(s: f64) -> f64 {
    4.0 * PI * (s / 2.0).sin().powi(2)
}

/// Number of regions in each zonal band, north to south.
pub fn eq_bands(parts: usize) -> Vec<usize> {
    match parts {
        0 => return Vec::new(),
        1 => return vec![1],
        2 => return vec![1, 1],
        _ => {}
    }
    let cap = polar_colatitude(parts);
    let region_area = 4.0 * PI / parts as f64;
    let ideal_angle = region_area.sqrt();
    let nb_collars = (((PI - 2.0 * cap) / ideal_angle).round() as usize).max(1);
    let fitted = (PI - 2.0 * cap) / nb_collars as f64;

    let mut bands = Vec::with_capacity(nb_collars + 2);
    bands.push(1);
    let mut discrepancy = 0.0;
    for k in 0..nb_collars {
        let top = cap + k as f64 * fitted;
        let ideal = (cap_area(top + fitted) - cap_area(top)) / region_area;
        let n = (ideal + discrepancy).round();
        discrepancy += ideal - n;
        bands.push(n as usize);
    }
    bands.push(1);
    bands
}

/// Points sorted north to south, then west to east.
fn sorted_points(grid: &Grid) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.size()).collect();
    if grid.structured().is_some() {
        return order;
    }
    let xy: Vec<_> = grid.points().collect();
    order.sort_by(|&a, &b| {
        xy[b]
            .y
            .total_cmp(&xy[a].y)
            .then(xy[a].x.total_cmp(&xy[b].x))
    });
    order
}

/// Partition into zonal bands, each split by x into regions of equal point count.
///
/// Partition sizes differ by at most one. Each band is a contiguous run of the
/// north-to-south, west-to-east ordering of points.
pub fn equal_regions_partition(grid: &Grid, parts: usize) -> Result<Distribution> {
    let size = grid.size();
    if parts == 0 || parts > size {
        return Err(invalid_argument(format!(
            "cannot split {size} points into {parts} partitions"
        )));
    }
    let order = sorted_points(grid);
    let bounds = balanced_bounds(size, parts);
    let xs: Vec<(f64, f64)> = grid.points().map(|p| (p.x, p.y)).collect();
    let mut part = vec![0; size];
    let mut first_region = 0;
    for regions in eq_bands(parts) {
        let band = &order[bounds[first_region]..bounds[first_region + regions]];
        let mut by_x = band.to_vec();
        by_x.sort_by(|&a, &b| {
            xs[a]
                .0
                .total_cmp(&xs[b].0)
                .then(xs[b].1.total_cmp(&xs[a].1))
        });
        let mut start = 0;
        for r in first_region..first_region + regions {
            let len = bounds[r + 1] - bounds[r];
            for &n in &by_x[start..start + len] {
                part[n] = r;
            }
            start += len;
        }
        first_region += regions;
    }
    Distribution::new(part, parts)
}
