use super::Distribution;
use crate::error::Result;
use crate::geometry::{dot, in_convex_polygon, norm, sub, unit_vector, Vec3};
use crate::grid::Grid;
use crate::mesh::{Gidx, Mesh};
use crate::parallel::Comm;

/// Chord length under which a target point coincides with a mesh node.
const COINCIDENT: f64 = 1e-12;

/// Latitude bins of width one degree, indexing cells by their latitude span.
struct LatBins {
    bins: Vec<Vec<usize>>,
}

impl LatBins {
    fn bin(lat: f64) -> usize {
        ((lat + 90.0).floor() as isize).clamp(0, 179) as usize
    }

    fn new(spans: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut bins = vec![Vec::new(); 180];
        for (k, (lo, hi)) in spans.enumerate() {
            for bin in &mut bins[Self::bin(lo - 1e-9)..=Self::bin(hi + 1e-9)] {
                bin.push(k);
            }
        }
        Self { bins }
    }

    fn candidates(&self, lat: f64) -> &[usize] {
        &self.bins[Self::bin(lat)]
    }
}

/// Best claim of one rank on one target point; lower sorts first.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
enum Claim {
    /// Coincides with an owned node of this global index.
    Node(Gidx, usize),
    /// Inside an owned cell of this global index.
    Cell(Gidx, usize),
    Unclaimed,
}

impl Claim {
    fn part(self) -> Option<usize> {
        match self {
            Claim::Node(_, p) | Claim::Cell(_, p) => Some(p),
            Claim::Unclaimed => None,
        }
    }
}

/// Collective. Assign each point of `grid` to the partition of the mesh
/// element containing it. Points on a node take that node's partition;
/// points on shared sides go to the lower cell global index; points outside
/// every element take the nearest owned node's partition (lower partition on
/// equal distance). Every rank receives the same distribution.
pub fn matching_mesh_partition(grid: &Grid, mesh: &Mesh, comm: &Comm) -> Result<Distribution> {
    let me = mesh.my_part;
    let nb_parts = mesh.nb_parts.max(comm.size());
    let targets: Vec<Vec3> = (0..grid.size())
        .map(|n| grid.lonlat(n).map(|q| unit_vector(q.lon, q.lat)))
        .collect::<Result<_>>()?;
    let target_lat: Vec<f64> = targets
        .iter()
        .map(|v| v[2].clamp(-1.0, 1.0).asin().to_degrees())
        .collect();

    let node_vec: Vec<Vec3> = mesh
        .nodes
        .lonlat
        .iter()
        .map(|p| unit_vector(p[0], p[1]))
        .collect();
    let owned_nodes: Vec<usize> = (0..mesh.nodes.size())
        .filter(|&i| !mesh.nodes.ghost[i])
        .collect();
    let owned_cells: Vec<usize> = (0..mesh.cells.size())
        .filter(|&c| mesh.cells.partition[c] as usize == me)
        .collect();
    let lat_of = |i: usize| mesh.nodes.lonlat[i][1];
    let node_bins = LatBins::new(owned_nodes.iter().map(|&i| (lat_of(i), lat_of(i))));
    let cell_bins = LatBins::new(owned_cells.iter().map(|&c| {
        let lats = mesh.cells.nodes(c).iter().map(|&v| lat_of(v as usize));
        lats.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        })
    }));
    let tol = 1e-10f64.to_radians().sin();

    let claims: Vec<Claim> = targets
        .iter()
        .zip(&target_lat)
        .map(|(&p, &lat)| {
            let node = node_bins
                .candidates(lat)
                .iter()
                .map(|&k| owned_nodes[k])
                .find(|&i| norm(sub(node_vec[i], p)) < COINCIDENT);
            if let Some(i) = node {
                return Claim::Node(mesh.nodes.global_index[i], me);
            }
            let mut best = Claim::Unclaimed;
            for &k in cell_bins.candidates(lat) {
                let c = owned_cells[k];
                let verts: Vec<Vec3> = mesh
                    .cells
                    .nodes(c)
                    .iter()
                    .map(|&v| node_vec[v as usize])
                    .collect();
                if in_convex_polygon(p, &verts, tol) {
                    let claim = Claim::Cell(mesh.cells.global_index[c], me);
                    if claim < best {
                        best = claim;
                    }
                }
            }
            best
        })
        .collect();

    let all = comm.all_gather(claims);
    let mut part: Vec<Option<usize>> = (0..grid.size())
        .map(|n| {
            all.iter()
                .map(|c| c[n])
                .fold(Claim::Unclaimed, |a, b| if b < a { b } else { a })
                .part()
        })
        .collect();

    // nearest owned node for points no rank claimed
    let orphans: Vec<usize> = (0..part.len()).filter(|&n| part[n].is_none()).collect();
    if comm.all_reduce_sum_usize(orphans.len()) > 0 {
        let nearest: Vec<(f64, usize)> = orphans
            .iter()
            .map(|&n| {
                owned_nodes
                    .iter()
                    .map(|&i| (-dot(node_vec[i], targets[n]), me))
                    .fold((f64::INFINITY, me), |a, b| if b.0 < a.0 { b } else { a })
            })
            .collect();
        let all = comm.all_gather(nearest);
        for (k, &n) in orphans.iter().enumerate() {
            let (_, p) = all
                .iter()
                .map(|r| r[k])
                .fold((f64::INFINITY, usize::MAX), |a, b| {
                    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                        b
                    } else {
                        a
                    }
                });
            part[n] = Some(p);
        }
    }
    Distribution::new(part.into_iter().map(|p| p.unwrap_or(0)).collect(), nb_parts)
}
