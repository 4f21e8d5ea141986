use super::{balanced_bounds, Distribution};
use crate::error::{invalid_argument, Error, Result};
use crate::grid::Grid;

/// Number of bands for a checkerboard of `parts` blocks on an `nx` by `ny` index rectangle.
///
/// Picks the divisor of `parts` closest to `sqrt(parts * ny / nx)` among those
/// that leave every block at least one row and one column; ties go to the
/// smaller divisor.
fn choose_bands(parts: usize, nx: usize, ny: usize) -> Option<usize> {
    let target = (parts as f64 * ny as f64 / nx as f64).sqrt();
    (1..=parts)
        .filter(|d| parts.is_multiple_of(*d) && *d <= ny && parts / d <= nx)
        .min_by(|&a, &b| {
            let da = (a as f64 - target).abs();
            let db = (b as f64 - target).abs();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
}

/// Split the (i, j) index rectangle of a regular grid into `parts` near-equal blocks.
pub fn checkerboard_partition(grid: &Grid, parts: usize) -> Result<Distribution> {
    if parts == 0 {
        return Err(invalid_argument("number of partitions must be at least 1"));
    }
    let s = match grid.structured() {
        Some(s) if grid.classify().regular => s,
        _ => {
            return Err(Error::UnsupportedGrid(
                "checkerboard partitioning needs a regular grid".into(),
            ))
        }
    };
    let (nx, ny) = (s.nx(0), s.ny());
    if parts > nx * ny {
        return Err(invalid_argument(format!(
            "{parts} partitions exceed the {} grid points",
            nx * ny
        )));
    }
    let bands = choose_bands(parts, nx, ny).ok_or_else(|| {
        invalid_argument(format!(
            "no {parts}-block factorization fits a {nx}x{ny} grid"
        ))
    })?;
    let blocks = parts / bands;
    let jb = balanced_bounds(ny, bands);
    let ib = balanced_bounds(nx, blocks);
    let mut band_of_row = vec![0; ny];
    for b in 0..bands {
        band_of_row[jb[b]..jb[b + 1]].fill(b);
    }
    let mut block_of_col = vec![0; nx];
    for k in 0..blocks {
        block_of_col[ib[k]..ib[k + 1]].fill(k);
    }
    let mut part = Vec::with_capacity(nx * ny);
    for &b in &band_of_row {
        part.extend(block_of_col.iter().map(|&k| b * blocks + k));
    }
    Distribution::new(part, parts)
}
