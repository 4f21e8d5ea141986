//! Global connectivity of a structured grid, shared by every partition.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{Grid, StructuredGridData};
use crate::mesh::{ElementType, Idx};
use crate::partition::Distribution;
use crate::point::PointXY;

/// Options of the structured mesh generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MeshOptions {
    /// Close a global grid with triangle fans to a node at each pole.
    pub pole_elements: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct GlobalCell {
    pub kind: ElementType,
    pub nodes: [u32; 4],
    /// Multiple of 360 added to each vertex's x to make the cell contiguous.
    pub shift: [i8; 4],
}

impl GlobalCell {
    pub fn vertices(&self) -> &[u32] {
        &self.nodes[..self.kind.nb_nodes()]
    }
}

#[derive(Debug)]
pub(crate) struct EdgeTable {
    /// Node pairs, lower index first, sorted.
    pub nodes: Vec<[u32; 2]>,
    pub owner: Vec<Idx>,
    pub remote: Vec<Idx>,
}

impl EdgeTable {
    pub fn find(&self, a: u32, b: u32) -> Option<usize> {
        let key = if a < b { [a, b] } else { [b, a] };
        self.nodes.binary_search(&key).ok()
    }
}

/// Whole-grid nodes and cells with owners and owner-local indices.
///
/// Node `n` has global index `n + 1`; pole nodes follow the grid points.
/// Cell `c` has global index `c + 1`.
#[derive(Debug)]
pub struct Topology {
    pub(crate) nb_parts: usize,
    pub(crate) periodic: bool,
    pub(crate) node_xy: Vec<[f64; 2]>,
    pub(crate) node_lonlat: Vec<[f64; 2]>,
    pub(crate) node_part: Vec<Idx>,
    pub(crate) node_remote: Vec<Idx>,
    pub(crate) cells: Vec<GlobalCell>,
    pub(crate) cell_part: Vec<Idx>,
    pub(crate) cell_remote: Vec<Idx>,
    node_cell_offsets: Vec<usize>,
    node_cell_values: Vec<u32>,
    edges: OnceLock<EdgeTable>,
}

/// Cursor state of one parallel in a strip.
struct Row {
    offset: usize,
    n: usize,
    /// Last cursor position: `n` when the row wraps, `n - 1` otherwise.
    end: usize,
    xmin: f64,
    dx: f64,
}

impl Row {
    fn new(s: &StructuredGridData, j: usize, periodic: bool) -> Self {
        let n = s.nx(j);
        Self {
            offset: s.offsets()[j],
            n,
            end: if periodic { n } else { n - 1 },
            xmin: s.xmin(j),
            dx: s.dx(j),
        }
    }

    fn vertex(&self, i: usize) -> (u32, i8) {
        ((self.offset + i % self.n) as u32, (i / self.n) as i8)
    }

    /// Normalized position of cursor `i` along the parallel.
    fn position(&self, i: usize, periodic: bool) -> f64 {
        if periodic {
            (self.xmin + i as f64 * self.dx) / 360.0
        } else if self.end == 0 {
            0.0
        } else {
            i as f64 / self.end as f64
        }
    }
}

fn push_cell(cells: &mut Vec<GlobalCell>, verts: &[(u32, i8)]) {
    let mut nodes = [0u32; 4];
    let mut shift = [0i8; 4];
    for (k, &(n, s)) in verts.iter().enumerate() {
        nodes[k] = n;
        shift[k] = s;
    }
    let kind = ElementType::from_nb_nodes(verts.len()).expect("3 or 4 vertices");
    cells.push(GlobalCell { kind, nodes, shift });
}

/// Tessellate the strip between parallels `j` (north) and `j + 1`.
///
/// Two cursors walk east. A quadrilateral is emitted when both next points
/// are closer than half the finer spacing, otherwise a triangle advances the
/// cursor whose next point lies further west (the northern one on ties).
fn tessellate_strip(s: &StructuredGridData, j: usize, periodic: bool, cells: &mut Vec<GlobalCell>) {
    let a = Row::new(s, j, periodic);
    let b = Row::new(s, j + 1, periodic);
    let tol = 0.5 / a.n.max(b.n) as f64;
    let (mut ia, mut ib) = (0, 0);
    while ia < a.end || ib < b.end {
        if ia < a.end && ib < b.end {
            let ta = a.position(ia + 1, periodic);
            let tb = b.position(ib + 1, periodic);
            if (ta - tb).abs() < tol {
                push_cell(
                    cells,
                    &[
                        a.vertex(ia),
                        b.vertex(ib),
                        b.vertex(ib + 1),
                        a.vertex(ia + 1),
                    ],
                );
                ia += 1;
                ib += 1;
            } else if tb < ta {
                push_cell(cells, &[a.vertex(ia), b.vertex(ib), b.vertex(ib + 1)]);
                ib += 1;
            } else {
                push_cell(cells, &[a.vertex(ia), b.vertex(ib), a.vertex(ia + 1)]);
                ia += 1;
            }
        } else if ia < a.end {
            push_cell(cells, &[a.vertex(ia), b.vertex(ib), a.vertex(ia + 1)]);
            ia += 1;
        } else {
            push_cell(cells, &[a.vertex(ia), b.vertex(ib), b.vertex(ib + 1)]);
            ib += 1;
        }
    }
}

/// Rank of each entity among those of its partition, in index order.
fn ranks(parts: &[Idx], nb_parts: usize) -> Vec<Idx> {
    let mut next = vec![0 as Idx; nb_parts];
    parts
        .iter()
        .map(|&p| {
            let r = next[p as usize];
            next[p as usize] += 1;
            r
        })
        .collect()
}

impl Topology {
    pub fn build(grid: &Grid, dist: &Distribution, options: MeshOptions) -> Result<Self> {
        let s = grid.structured().ok_or_else(|| {
            Error::UnsupportedGrid("mesh generation needs a structured grid".into())
        })?;
        if dist.size() != grid.size() {
            return Err(Error::InvalidArgument(format!(
                "distribution of {} points for a grid of {}",
                dist.size(),
                grid.size()
            )));
        }
        let periodic = grid.is_periodic_x();
        let size = grid.size();
        let ny = s.ny();

        let mut node_xy: Vec<[f64; 2]> = Vec::with_capacity(size + 2);
        let mut node_lonlat = Vec::with_capacity(size + 2);
        for j in 0..ny {
            for i in 0..s.nx(j) {
                let p = s.xy(i, j);
                let q = grid.projection().forward(p)?;
                node_xy.push([p.x, p.y]);
                node_lonlat.push([q.lon, q.lat]);
            }
        }
        let mut node_part: Vec<Idx> = dist.part.iter().map(|&p| p as Idx).collect();

        let mut cells = Vec::with_capacity(2 * size);
        let caps = options.pole_elements && periodic && grid.domain().is_global();
        let north = caps && s.y(0) < 90.0;
        let south = caps && s.y(ny - 1) > -90.0;
        let mut pole_node = |y: f64, owner: Idx| -> Result<u32> {
            let q = grid.projection().forward(PointXY::new(0.0, y))?;
            node_xy.push([0.0, y]);
            node_lonlat.push([q.lon, q.lat]);
            node_part.push(owner);
            Ok((node_xy.len() - 1) as u32)
        };
        let (first_owner, last_owner) = (dist.part[0] as Idx, dist.part[size - 1] as Idx);
        let north_pole = if north {
            Some(pole_node(90.0, first_owner)?)
        } else {
            None
        };
        let south_pole = if south {
            Some(pole_node(-90.0, last_owner)?)
        } else {
            None
        };

        if let Some(pole) = north_pole {
            let row = Row::new(s, 0, true);
            for i in 0..row.n {
                push_cell(&mut cells, &[row.vertex(i), row.vertex(i + 1), (pole, 0)]);
            }
        }
        for j in 0..ny.saturating_sub(1) {
            tessellate_strip(s, j, periodic, &mut cells);
        }
        if let Some(pole) = south_pole {
            let row = Row::new(s, ny - 1, true);
            for i in 0..row.n {
                push_cell(&mut cells, &[row.vertex(i), (pole, 0), row.vertex(i + 1)]);
            }
        }

        let nb_parts = dist.nb_partitions;
        let node_remote = ranks(&node_part, nb_parts);
        let cell_part: Vec<Idx> = cells
            .iter()
            .map(|c| node_part[*c.vertices().iter().min().unwrap() as usize])
            .collect();
        // owner-local cell order: quadrilaterals, then triangles
        let mut nb_quads = vec![0 as Idx; nb_parts];
        for (c, &p) in cells.iter().zip(&cell_part) {
            if c.kind == ElementType::Quadrilateral {
                nb_quads[p as usize] += 1;
            }
        }
        let mut next_quad = vec![0 as Idx; nb_parts];
        let mut next_tri = nb_quads;
        let cell_remote = cells
            .iter()
            .zip(&cell_part)
            .map(|(c, &p)| {
                let next = if c.kind == ElementType::Quadrilateral {
                    &mut next_quad
                } else {
                    &mut next_tri
                };
                let r = next[p as usize];
                next[p as usize] += 1;
                r
            })
            .collect();

        let nb_nodes = node_xy.len();
        let mut node_cell_offsets = vec![0usize; nb_nodes + 1];
        for c in &cells {
            for &v in c.vertices() {
                node_cell_offsets[v as usize + 1] += 1;
            }
        }
        for n in 0..nb_nodes {
            node_cell_offsets[n + 1] += node_cell_offsets[n];
        }
        let mut fill = node_cell_offsets.clone();
        let mut node_cell_values = vec![0u32; node_cell_offsets[nb_nodes]];
        for (ci, c) in cells.iter().enumerate() {
            for &v in c.vertices() {
                node_cell_values[fill[v as usize]] = ci as u32;
                fill[v as usize] += 1;
            }
        }
        log::debug!(
            "topology: {} nodes, {} cells, {} partitions, periodic={periodic}",
            nb_nodes,
            cells.len(),
            nb_parts
        );
        Ok(Self {
            nb_parts,
            periodic,
            node_xy,
            node_lonlat,
            node_part,
            node_remote,
            cells,
            cell_part,
            cell_remote,
            node_cell_offsets,
            node_cell_values,
            edges: OnceLock::new(),
        })
    }

    pub fn nb_nodes(&self) -> usize {
        self.node_xy.len()
    }

    pub fn nb_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn nb_parts(&self) -> usize {
        self.nb_parts
    }

    /// Cells incident to global node `n`, ascending.
    pub(crate) fn node_cells(&self, n: u32) -> &[u32] {
        let n = n as usize;
        &self.node_cell_values[self.node_cell_offsets[n]..self.node_cell_offsets[n + 1]]
    }

    /// Global node indices of cell `c`.
    pub fn cell_nodes(&self, c: usize) -> &[u32] {
        self.cells[c].vertices()
    }

    pub fn cell_type(&self, c: usize) -> ElementType {
        self.cells[c].kind
    }

    pub fn cell_partition(&self, c: usize) -> usize {
        self.cell_part[c] as usize
    }

    pub fn node_partition(&self, n: usize) -> usize {
        self.node_part[n] as usize
    }

    pub fn node_lonlat(&self, n: usize) -> [f64; 2] {
        self.node_lonlat[n]
    }

    pub(crate) fn edges(&self) -> &EdgeTable {
        self.edges.get_or_init(|| {
            let mut pairs: Vec<([u32; 2], u32)> = Vec::with_capacity(self.cells.len() * 4);
            for (ci, c) in self.cells.iter().enumerate() {
                let v = c.vertices();
                for k in 0..v.len() {
                    let (a, b) = (v[k], v[(k + 1) % v.len()]);
                    pairs.push(([a.min(b), a.max(b)], ci as u32));
                }
            }
            pairs.sort_unstable();
            pairs.dedup_by_key(|(key, _)| *key);
            let owner: Vec<Idx> = pairs
                .iter()
                .map(|&(_, c)| self.cell_part[c as usize])
                .collect();
            let remote = ranks(&owner, self.nb_parts);
            EdgeTable {
                nodes: pairs.into_iter().map(|(k, _)| k).collect(),
                owner,
                remote,
            }
        })
    }
}
