//! Assignment of grid points to partitions.

mod checkerboard;
mod equal_regions;
mod matching;

use std::fmt::Write;

use serde::{Deserialize, Serialize};

pub use checkerboard::checkerboard_partition;
pub use equal_regions::{eq_bands, equal_regions_partition};
pub use matching::matching_mesh_partition;

use crate::error::{invalid_argument, Result};
use crate::grid::Grid;

/// Per-point partition assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub nb_partitions: usize,
    pub part: Vec<usize>,
    #[serde(default)]
    pub counts: Vec<usize>,
}

impl Distribution {
    /// Build from per-point partition indices, computing counts.
    pub fn new(part: Vec<usize>, nb_partitions: usize) -> Result<Self> {
        if nb_partitions == 0 {
            return Err(invalid_argument("number of partitions must be at least 1"));
        }
        let mut counts = vec![0; nb_partitions];
        for (n, &p) in part.iter().enumerate() {
            if p >= nb_partitions {
                return Err(invalid_argument(format!(
                    "point {n} assigned to partition {p} of {nb_partitions}"
                )));
            }
            counts[p] += 1;
        }
        Ok(Self {
            nb_partitions,
            part,
            counts,
        })
    }

    /// Every point in partition 0.
    pub fn serial(size: usize) -> Self {
        Self {
            nb_partitions: 1,
            part: vec![0; size],
            counts: vec![size],
        }
    }

    pub fn size(&self) -> usize {
        self.part.len()
    }

    pub fn partition(&self, n: usize) -> usize {
        self.part[n]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn min_count(&self) -> usize {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// `{"counts": [...], "nb_partitions": P, "part": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nb_partitions": self.nb_partitions,
            "counts": self.counts,
            "part": self.part,
        })
    }

    /// Parse the JSON form; counts are recomputed.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: Distribution = serde_json::from_str(text)?;
        Self::new(raw.part, raw.nb_partitions)
    }

    /// One partition index per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.part.len() * 3);
        for p in &self.part {
            writeln!(out, "{p}").unwrap();
        }
        out
    }
}

/// Check every distribution invariant against `grid`.
pub fn validate_distribution(dist: &Distribution, grid: &Grid) -> bool {
    let size = grid.size();
    if dist.nb_partitions == 0 || dist.part.len() != size || dist.counts.len() != dist.nb_partitions
    {
        return false;
    }
    let mut counts = vec![0usize; dist.nb_partitions];
    for &p in &dist.part {
        if p >= dist.nb_partitions {
            return false;
        }
        counts[p] += 1;
    }
    if counts != dist.counts {
        return false;
    }
    dist.nb_partitions > size || counts.iter().all(|&c| c > 0)
}

/// Split `total` items into `parts` contiguous chunks whose sizes differ by at most one.
pub(crate) fn balanced_bounds(total: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|k| total * k / parts).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let g = Grid::from_name("F1").unwrap();
        let d = Distribution::new(vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
        assert!(validate_distribution(&d, &g));
        let mut bad = d.clone();
        bad.part[0] = 2;
        assert!(!validate_distribution(&bad, &g));
        let mut bad = d.clone();
        bad.counts = vec![5, 3];
        assert!(!validate_distribution(&bad, &g));
        let empty_part = Distribution::new(vec![0; 8], 2).unwrap();
        assert!(!validate_distribution(&empty_part, &g));
        assert!(Distribution::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn json_and_text() {
        let d = Distribution::new(vec![1, 0, 1], 2).unwrap();
        assert_eq!(
            d.to_json().to_string(),
            r#"{"counts":[1,2],"nb_partitions":2,"part":[1,0,1]}"#
        );
        assert_eq!(
            Distribution::from_json_str(&d.to_json().to_string()).unwrap(),
            d
        );
        assert_eq!(d.to_text(), "1\n0\n1\n");
    }

    #[test]
    fn bounds_balanced() {
        let b = balanced_bounds(10, 3);
        assert_eq!(b, vec![0, 3, 6, 10]);
    }
}
