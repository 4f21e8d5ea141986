//! Distributed mesh generation from structured grids.
//!
//! Every partition is cut from one shared [`Topology`]. Local nodes are the
//! owned nodes in global order followed by ghosts by halo level; local cells
//! are owned quadrilaterals, owned triangles, then one or two blocks per halo
//! level.

mod topology;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

pub use topology::{MeshOptions, Topology};

use crate::error::{invalid_argument, Error, Result};
use crate::grid::Grid;
use crate::mesh::{BlockConnectivity, Edges, ElementType, Gidx, Idx, Mesh, MISSING};
use crate::partition::Distribution;

/// Generate partition `my_part` of `nb_parts` without halo.
pub fn generate_structured_mesh(
    grid: &Grid,
    dist: &Distribution,
    my_part: usize,
    nb_parts: usize,
) -> Result<Mesh> {
    generate_structured_mesh_with(grid, dist, my_part, nb_parts, MeshOptions::default())
}

pub fn generate_structured_mesh_with(
    grid: &Grid,
    dist: &Distribution,
    my_part: usize,
    nb_parts: usize,
    options: MeshOptions,
) -> Result<Mesh> {
    if nb_parts != dist.nb_partitions {
        return Err(invalid_argument(format!(
            "{nb_parts} partitions requested for a distribution over {}",
            dist.nb_partitions
        )));
    }
    let topology = Arc::new(Topology::build(grid, dist, options)?);
    local_mesh(&topology, my_part)
}

/// Generate every partition from one shared topology.
pub fn generate_partitions(
    grid: &Grid,
    dist: &Distribution,
    options: MeshOptions,
) -> Result<Vec<Mesh>> {
    let topology = Arc::new(Topology::build(grid, dist, options)?);
    (0..dist.nb_partitions)
        .map(|p| local_mesh(&topology, p))
        .collect()
}

/// Serial mesh of the whole grid.
pub fn generate_mesh(grid: &Grid, options: MeshOptions) -> Result<Mesh> {
    generate_structured_mesh_with(grid, &Distribution::serial(grid.size()), 0, 1, options)
}

/// Partition `part` of `topology`, without halo.
pub fn local_mesh(topology: &Arc<Topology>, part: usize) -> Result<Mesh> {
    if part >= topology.nb_parts {
        return Err(invalid_argument(format!(
            "partition {part} out of {}",
            topology.nb_parts
        )));
    }
    let p = part as Idx;
    let mut mesh = Mesh {
        my_part: part,
        nb_parts: topology.nb_parts,
        topology: Some(Arc::clone(topology)),
        ..Default::default()
    };
    let owned_cells: Vec<u32> = (0..topology.nb_cells() as u32)
        .filter(|&c| topology.cell_part[c as usize] == p)
        .collect();
    let mut shifts: BTreeMap<u32, i8> = BTreeMap::new();
    for n in 0..topology.nb_nodes() as u32 {
        if topology.node_part[n as usize] == p {
            shifts.insert(n, 0);
        }
    }
    let owned_nodes: Vec<u32> = shifts.keys().copied().collect();
    let mut local = LocalIndex::default();
    for &n in &owned_nodes {
        push_node(&mut mesh, topology, &mut local, n, 0, 0);
    }
    let ghosts = ghost_shifts(topology, &owned_cells, &local, &mesh);
    for (&n, &s) in &ghosts {
        push_node(&mut mesh, topology, &mut local, n, s, 0);
    }
    push_cells(&mut mesh, topology, &mut local, &owned_cells, 0);
    Ok(mesh)
}

#[derive(Default)]
struct LocalIndex {
    nodes: HashMap<u32, Idx>,
    cells: HashSet<u32>,
}

impl LocalIndex {
    fn of(mesh: &Mesh) -> Self {
        Self {
            nodes: mesh
                .nodes
                .global_index
                .iter()
                .enumerate()
                .map(|(l, &g)| ((g - 1) as u32, l as Idx))
                .collect(),
            cells: mesh
                .cells
                .global_index
                .iter()
                .map(|&g| (g - 1) as u32)
                .collect(),
        }
    }
}

/// Multiple of 360 separating local node `l` from its canonical position.
fn local_shift(mesh: &Mesh, topology: &Topology, l: Idx) -> i8 {
    let g = (mesh.nodes.global_index[l as usize] - 1) as usize;
    ((mesh.nodes.xy[l as usize][0] - topology.node_xy[g][0]) / 360.0).round() as i8
}

/// Nodes of `cells` missing from the mesh, with the x shift that keeps each
/// one next to the cell it was reached through.
fn ghost_shifts(
    topology: &Topology,
    cells: &[u32],
    local: &LocalIndex,
    mesh: &Mesh,
) -> BTreeMap<u32, i8> {
    let mut shifts: BTreeMap<u32, i8> = BTreeMap::new();
    for &c in cells {
        let cell = &topology.cells[c as usize];
        let verts = cell.vertices();
        let anchor = verts.iter().enumerate().find_map(|(k, v)| {
            if let Some(&l) = local.nodes.get(v) {
                Some((k, local_shift(mesh, topology, l)))
            } else {
                shifts.get(v).map(|&s| (k, s))
            }
        });
        let Some((k, anchor_shift)) = anchor else {
            continue;
        };
        for (m, &v) in verts.iter().enumerate() {
            if !local.nodes.contains_key(&v) {
                let s = if topology.periodic {
                    cell.shift[m] - cell.shift[k] + anchor_shift
                } else {
                    0
                };
                shifts.entry(v).or_insert(s);
            }
        }
    }
    shifts
}

fn push_node(
    mesh: &mut Mesh,
    topology: &Topology,
    local: &mut LocalIndex,
    n: u32,
    shift: i8,
    halo: Idx,
) {
    let g = n as usize;
    let dx = 360.0 * shift as f64;
    let [x, y] = topology.node_xy[g];
    let [lon, lat] = topology.node_lonlat[g];
    let part = topology.node_part[g];
    local.nodes.insert(n, mesh.nodes.size() as Idx);
    mesh.nodes.push(
        [x + dx, y],
        [lon + dx, lat],
        g as Gidx + 1,
        part,
        topology.node_remote[g],
        part != mesh.my_part as Idx,
        halo,
    );
}

/// Append `cells` as a quadrilateral block and a triangle block.
fn push_cells(
    mesh: &mut Mesh,
    topology: &Topology,
    local: &mut LocalIndex,
    cells: &[u32],
    halo: Idx,
) {
    for kind in [ElementType::Quadrilateral, ElementType::Triangle] {
        let rows: Vec<u32> = cells
            .iter()
            .copied()
            .filter(|&c| topology.cells[c as usize].kind == kind)
            .collect();
        if rows.is_empty() {
            continue;
        }
        let values = rows
            .iter()
            .flat_map(|&c| {
                topology.cells[c as usize]
                    .vertices()
                    .iter()
                    .map(|v| local.nodes[v])
            })
            .collect();
        let block =
            BlockConnectivity::new(rows.len(), kind.nb_nodes(), values).expect("sized block");
        mesh.cells.add_block(kind, &block);
        for &c in &rows {
            local.cells.insert(c);
            mesh.cells.global_index.push(c as Gidx + 1);
            mesh.cells.partition.push(topology.cell_part[c as usize]);
            mesh.cells
                .remote_index
                .push(topology.cell_remote[c as usize]);
            mesh.cells.halo.push(halo);
        }
    }
}

/// Grow the halo by `depth` levels: each level adds every cell sharing a node
/// with the current node set, and that cell's missing nodes as ghosts.
pub fn build_halo(mesh: &mut Mesh, depth: usize) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    let topology = mesh
        .topology
        .clone()
        .ok_or_else(|| Error::State("halo growth needs a generated mesh".into()))?;
    let had_edges = mesh.has_edges();
    let mut local = LocalIndex::of(mesh);
    for _ in 0..depth {
        let level = mesh.halo_depth as Idx + 1;
        let mut new_cells: Vec<u32> = local
            .nodes
            .keys()
            .flat_map(|&n| topology.node_cells(n).iter().copied())
            .filter(|c| !local.cells.contains(c))
            .collect();
        new_cells.sort_unstable();
        new_cells.dedup();
        let ghosts = ghost_shifts(&topology, &new_cells, &local, mesh);
        for (&n, &s) in &ghosts {
            push_node(mesh, &topology, &mut local, n, s, level);
        }
        push_cells(mesh, &topology, &mut local, &new_cells, level);
        mesh.halo_depth += 1;
        log::debug!(
            "part {}: halo {} adds {} cells, {} nodes",
            mesh.my_part,
            level,
            new_cells.len(),
            ghosts.len()
        );
    }
    if had_edges {
        build_edges(mesh);
    }
    Ok(())
}

/// Build the unique undirected edges of all cells with up to two adjacent
/// local cells each. Owned edges come first in global order, then the rest by
/// halo level and global index.
pub fn build_edges(mesh: &mut Mesh) {
    let gidx = &mesh.nodes.global_index;
    // (lower gidx, higher gidx) -> (local nodes, local cells)
    let mut found: BTreeMap<(Gidx, Gidx), ([Idx; 2], Vec<Idx>)> = BTreeMap::new();
    for c in 0..mesh.cells.size() {
        let v = mesh.cells.nodes(c);
        for k in 0..v.len() {
            let (mut a, mut b) = (v[k], v[(k + 1) % v.len()]);
            if gidx[a as usize] > gidx[b as usize] {
                std::mem::swap(&mut a, &mut b);
            }
            let entry = found
                .entry((gidx[a as usize], gidx[b as usize]))
                .or_insert(([a, b], Vec::new()));
            entry.1.push(c as Idx);
        }
    }
    let my = mesh.my_part as Idx;
    let cells = &mesh.cells;
    struct Row {
        nodes: [Idx; 2],
        cells: [Idx; 2],
        gidx: Gidx,
        part: Idx,
        remote: Idx,
        halo: Idx,
    }
    let table = mesh.topology.as_ref().map(|t| t.edges());
    let mut rows: Vec<Row> = found
        .into_iter()
        .enumerate()
        .map(|(k, ((ga, gb), (nodes, mut adj)))| {
            adj.sort_by_key(|&c| cells.global_index[c as usize]);
            let halo = adj.iter().map(|&c| cells.halo[c as usize]).min().unwrap();
            let (gidx, part, remote) = match table {
                Some(t) => {
                    let e = t
                        .find((ga - 1) as u32, (gb - 1) as u32)
                        .expect("edge of a global cell");
                    (e as Gidx + 1, t.owner[e], t.remote[e])
                }
                None => (k as Gidx + 1, cells.partition[adj[0] as usize], MISSING),
            };
            Row {
                nodes,
                cells: [adj[0], adj.get(1).copied().unwrap_or(MISSING)],
                gidx,
                part,
                remote,
                halo,
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.part != my, if r.part == my { 0 } else { r.halo }, r.gidx));

    let mut edges = Edges::default();
    for (k, r) in rows.iter().enumerate() {
        edges.node_connectivity.push_row(&r.nodes).unwrap();
        edges.cell_connectivity.push_row(&r.cells).unwrap();
        edges.global_index.push(r.gidx);
        edges.partition.push(r.part);
        edges.remote_index.push(if table.is_none() && r.part == my {
            k as Idx
        } else {
            r.remote
        });
        edges.halo.push(if r.part == my { 0 } else { r.halo });
    }
    mesh.edges = edges;
}

/// Close the mesh at the poles; only meaningful before any partitioning, so
/// this regenerates a serial mesh of `grid` with pole fans.
pub fn pole_elements(grid: &Grid) -> Result<Mesh> {
    generate_mesh(
        grid,
        MeshOptions {
            pole_elements: true,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::equal_regions_partition;

    #[test]
    fn f1_serial() {
        let g = Grid::from_name("F1").unwrap();
        let mut m = generate_mesh(&g, MeshOptions::default()).unwrap();
        assert_eq!(m.nodes.size(), 8);
        assert_eq!(m.cells.size(), 4);
        assert_eq!(m.cells.count(ElementType::Quadrilateral), 4);
        assert_eq!(m.edges.size(), 0);
        build_edges(&mut m);
        assert_eq!(m.edges.size(), 12);
        let boundary = (0..12).filter(|&e| m.edges.cells(e)[1] == MISSING).count();
        assert_eq!(boundary, 8);
        m.validate().unwrap();
    }

    #[test]
    fn o32_node_count() {
        let g = Grid::from_name("O32").unwrap();
        let m = generate_mesh(&g, MeshOptions::default()).unwrap();
        assert_eq!(m.nodes.size(), 5248);
    }

    #[test]
    fn single_quad_edges() {
        let spec = crate::grid::GridSpec::from_json_str(
            r#"{"type":"regular_regional","nx":2,"ny":2,"domain":{"type":"rectangular","xmin":0,"xmax":1,"ymin":0,"ymax":1}}"#,
        )
        .unwrap();
        let mut m = generate_mesh(&Grid::from_spec(spec).unwrap(), MeshOptions::default()).unwrap();
        assert_eq!(m.cells.size(), 1);
        build_edges(&mut m);
        assert_eq!(m.edges.size(), 4);
        assert!((0..4).all(|e| m.edges.cells(e) == [0, MISSING]));
    }

    #[test]
    fn closed_sphere_euler() {
        let g = Grid::from_name("O16").unwrap();
        let mut m = pole_elements(&g).unwrap();
        build_edges(&mut m);
        let chi = m.nodes.size() as i64 - m.edges.size() as i64 + m.cells.size() as i64;
        assert_eq!(chi, 2);
        assert!((0..m.edges.size()).all(|e| m.edges.cells(e)[1] != MISSING));
    }

    #[test]
    fn owned_nodes_first_and_halo_prefix() {
        let g = Grid::from_name("O16").unwrap();
        let d = equal_regions_partition(&g, 4).unwrap();
        let mut parts = generate_partitions(&g, &d, MeshOptions::default()).unwrap();
        for m in &mut parts {
            build_halo(m, 2).unwrap();
            let owned = m.nb_owned_nodes();
            assert_eq!(owned, d.counts()[m.my_part]);
            assert!(m.nodes.ghost[owned..].iter().all(|&g| g));
            assert!(m.nodes.halo.windows(2).all(|w| w[0] <= w[1]));
            m.validate().unwrap();
        }
    }

    #[test]
    fn halo_growth_is_incremental() {
        let g = Grid::from_name("O16").unwrap();
        let d = equal_regions_partition(&g, 8).unwrap();
        let topo = Arc::new(Topology::build(&g, &d, MeshOptions::default()).unwrap());
        for p in 0..8 {
            let mut once = local_mesh(&topo, p).unwrap();
            build_halo(&mut once, 2).unwrap();
            let mut twice = local_mesh(&topo, p).unwrap();
            build_halo(&mut twice, 1).unwrap();
            build_halo(&mut twice, 1).unwrap();
            assert_eq!(once.to_json(), twice.to_json());
        }
    }

    #[test]
    fn periodic_ghosts_are_shifted() {
        let g = Grid::from_name("F4").unwrap();
        let d = crate::partition::checkerboard_partition(&g, 2).unwrap();
        let topo = Arc::new(Topology::build(&g, &d, MeshOptions::default()).unwrap());
        let mut m = local_mesh(&topo, 0).unwrap();
        build_halo(&mut m, 1).unwrap();
        let xs: Vec<f64> = m.nodes.xy.iter().map(|p| p[0]).collect();
        assert!(xs.iter().any(|&x| x < 0.0), "west ghosts wrap below 0");
        let mut gids = m.nodes.global_index.clone();
        gids.sort();
        gids.dedup();
        assert_eq!(gids.len(), m.nodes.size());
    }

    #[test]
    fn edges_rebuilt_after_halo() {
        let g = Grid::from_name("O8").unwrap();
        let d = equal_regions_partition(&g, 3).unwrap();
        let topo = Arc::new(Topology::build(&g, &d, MeshOptions::default()).unwrap());
        let mut m = local_mesh(&topo, 1).unwrap();
        build_edges(&mut m);
        let before = m.edges.size();
        build_halo(&mut m, 1).unwrap();
        assert!(m.edges.size() > before);
        m.validate().unwrap();
    }

    #[test]
    fn unstructured_rejected() {
        let g = Grid::from_spec(crate::grid::GridSpec::unstructured(vec![[0.0, 0.0]])).unwrap();
        assert!(matches!(
            generate_mesh(&g, MeshOptions::default()),
            Err(Error::UnsupportedGrid(_))
        ));
    }
}
