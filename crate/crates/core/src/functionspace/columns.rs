use std::ops::Range;

use super::{Columns, FunctionSpace};
use crate::error::{invalid_argument, Result};
use crate::grid::Grid;
use crate::mesh::{Gidx, Idx, Mesh};
use crate::parallel::Comm;
use crate::partition::Distribution;

/// Columns at mesh nodes, up to a halo depth.
#[derive(Debug)]
pub struct NodeColumns<'a> {
    mesh: &'a Mesh,
    halo: usize,
    columns: Columns,
}

impl<'a> NodeColumns<'a> {
    /// Collective. The mesh must already carry at least `halo` levels.
    pub fn new(mesh: &'a Mesh, halo: usize, comm: &Comm) -> Result<Self> {
        if mesh.halo_depth < halo {
            return Err(invalid_argument(format!(
                "mesh has halo {} but {halo} was requested",
                mesh.halo_depth
            )));
        }
        let n = mesh.nodes.nb_within_halo(halo);
        let nodes = &mesh.nodes;
        let columns = Columns::build(
            "NodeColumns",
            &nodes.partition[..n],
            &nodes.remote_index[..n],
            &nodes.global_index[..n],
            comm,
        )?;
        Ok(Self {
            mesh,
            halo,
            columns,
        })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn halo(&self) -> usize {
        self.halo
    }

    pub fn nb_nodes(&self) -> usize {
        self.size()
    }
}

impl FunctionSpace for NodeColumns<'_> {
    fn columns(&self) -> &Columns {
        &self.columns
    }

    fn owned_rows(&self) -> Vec<usize> {
        (0..self.size())
            .filter(|&i| !self.mesh.nodes.ghost[i])
            .collect()
    }
}

/// Columns at mesh edges, up to a halo depth.
#[derive(Debug)]
pub struct EdgeColumns<'a> {
    mesh: &'a Mesh,
    halo: usize,
    columns: Columns,
}

impl<'a> EdgeColumns<'a> {
    /// Collective. Edges must be built on every rank.
    pub fn new(mesh: &'a Mesh, halo: usize, comm: &Comm) -> Result<Self> {
        if mesh.halo_depth < halo {
            return Err(invalid_argument(format!(
                "mesh has halo {} but {halo} was requested",
                mesh.halo_depth
            )));
        }
        if !mesh.has_edges() && mesh.cells.size() > 0 {
            return Err(invalid_argument("edge columns need built edges"));
        }
        let e = &mesh.edges;
        let n = e.nb_within_halo(halo);
        let columns = Columns::build(
            "EdgeColumns",
            &e.partition[..n],
            &e.remote_index[..n],
            &e.global_index[..n],
            comm,
        )?;
        Ok(Self {
            mesh,
            halo,
            columns,
        })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn halo(&self) -> usize {
        self.halo
    }

    pub fn nb_edges(&self) -> usize {
        self.size()
    }
}

impl FunctionSpace for EdgeColumns<'_> {
    fn columns(&self) -> &Columns {
        &self.columns
    }

    fn owned_rows(&self) -> Vec<usize> {
        let me = self.mesh.my_part as Idx;
        (0..self.size())
            .filter(|&i| self.mesh.edges.partition[i] == me)
            .collect()
    }
}

/// Columns at the grid points a distribution assigns to this rank.
#[derive(Debug)]
pub struct StructuredColumns<'a> {
    grid: &'a Grid,
    points: Vec<usize>,
    columns: Columns,
}

impl<'a> StructuredColumns<'a> {
    /// Collective.
    pub fn new(grid: &'a Grid, dist: &Distribution, comm: &Comm) -> Result<Self> {
        if dist.size() != grid.size() || dist.nb_partitions != comm.size() {
            return Err(invalid_argument(format!(
                "distribution of {} points over {} parts for a grid of {} on {} ranks",
                dist.size(),
                dist.nb_partitions,
                grid.size(),
                comm.size()
            )));
        }
        let me = comm.rank();
        let points: Vec<usize> = (0..grid.size()).filter(|&n| dist.part[n] == me).collect();
        let gidx: Vec<Gidx> = points.iter().map(|&n| n as Gidx + 1).collect();
        let part = vec![me as Idx; points.len()];
        let remote: Vec<Idx> = (0..points.len() as Idx).collect();
        let columns = Columns::build("StructuredColumns", &part, &remote, &gidx, comm)?;
        Ok(Self {
            grid,
            points,
            columns,
        })
    }

    pub fn grid(&self) -> &'a Grid {
        self.grid
    }

    /// Grid index of each local column.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Maximal runs of consecutive grid indices held here.
    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut out: Vec<Range<usize>> = Vec::new();
        for &n in &self.points {
            match out.last_mut() {
                Some(r) if r.end == n => r.end += 1,
                _ => out.push(n..n + 1),
            }
        }
        out
    }
}

impl FunctionSpace for StructuredColumns<'_> {
    fn columns(&self) -> &Columns {
        &self.columns
    }

    fn owned_rows(&self) -> Vec<usize> {
        (0..self.size()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Kind;
    use crate::meshgen::{
        build_edges, build_halo, generate_mesh, generate_partitions, MeshOptions,
    };
    use crate::parallel::SimComm;
    use crate::partition::equal_regions_partition;

    fn partitioned(name: &str, parts: usize, halo: usize) -> Vec<Mesh> {
        let g = Grid::from_name(name).unwrap();
        let d = equal_regions_partition(&g, parts).unwrap();
        let mut meshes = generate_partitions(&g, &d, MeshOptions::default()).unwrap();
        for m in &mut meshes {
            build_halo(m, halo).unwrap();
            build_edges(m);
        }
        meshes
    }

    #[test]
    fn field_shapes() {
        let g = Grid::from_name("O4").unwrap();
        let mesh = generate_mesh(&g, MeshOptions::default()).unwrap();
        let fs = NodeColumns::new(&mesh, 0, &Comm::serial()).unwrap();
        assert_eq!(fs.nb_nodes(), fs.nb_owned());
        for levels in [0, 1, 3, 100] {
            for vars in [0, 1, 2] {
                let f = fs.create_field("f", Kind::Real64, levels, vars);
                let mut expect = vec![fs.nb_nodes()];
                if levels > 0 {
                    expect.push(levels);
                }
                if vars > 0 {
                    expect.push(vars);
                }
                assert_eq!(f.shape(), expect.as_slice());
            }
        }
    }

    #[test]
    fn insufficient_halo() {
        let g = Grid::from_name("O4").unwrap();
        let mesh = generate_mesh(&g, MeshOptions::default()).unwrap();
        assert!(NodeColumns::new(&mesh, 1, &Comm::serial()).is_err());
    }

    #[test]
    fn foreign_field_rejected() {
        let g = Grid::from_name("O4").unwrap();
        let mesh = generate_mesh(&g, MeshOptions::default()).unwrap();
        let c = Comm::serial();
        let a = NodeColumns::new(&mesh, 0, &c).unwrap();
        let b = NodeColumns::new(&mesh, 0, &c).unwrap();
        let f = a.create_field("f", Kind::Real64, 0, 0);
        assert!(b.halo_exchange(&f).is_err());
        assert!(a.halo_exchange(&f).is_ok());
    }

    #[test]
    fn node_exchange_gather_statistics() {
        let meshes = partitioned("O16", 4, 1);
        let results = SimComm::run(4, |c| {
            let m = &meshes[c.rank()];
            let fs = NodeColumns::new(m, 1, &c).unwrap();
            let f = fs.create_field("gidx", Kind::Int64, 2, 0);
            let owned = fs.nb_owned();
            f.array::<i64>()
                .unwrap()
                .host_view()
                .unwrap()
                .with_mut(|s| {
                    for i in 0..fs.size() {
                        let v = if i < owned {
                            m.nodes.global_index[i]
                        } else {
                            -1
                        };
                        s[2 * i] = v;
                        s[2 * i + 1] = 10 * v;
                    }
                })
                .unwrap();
            fs.halo_exchange(&f).unwrap();
            let vals = f.array::<i64>().unwrap().host_values().unwrap();
            for i in 0..fs.size() {
                assert_eq!(vals[2 * i], m.nodes.global_index[i]);
                assert_eq!(vals[2 * i + 1], 10 * m.nodes.global_index[i]);
            }
            let stats = fs.statistics(&f).unwrap();
            let g = fs.gather(&f).unwrap();
            (
                owned,
                stats,
                g.map(|g| g.array::<i64>().unwrap().host_values().unwrap()),
            )
        });
        assert_eq!(results.iter().map(|r| r.0).sum::<usize>(), 1600);
        let stats = &results[0].1;
        assert_eq!(stats[0].int_sum, Some(1600 * 1601 / 2));
        assert_eq!(stats[1].int_sum, Some(10 * 1600 * 1601 / 2));
        assert_eq!((stats[0].min, stats[0].max), (1.0, 1600.0));
        let root = results[0].2.as_ref().unwrap();
        for g in 0..1600 {
            assert_eq!(root[2 * g], g as i64 + 1);
        }
        assert!(results[1].2.is_none());
    }

    #[test]
    fn edge_columns_exchange() {
        let meshes = partitioned("O8", 3, 1);
        let ok = SimComm::run(3, |c| {
            let m = &meshes[c.rank()];
            let fs = EdgeColumns::new(m, 1, &c).unwrap();
            let f = fs.create_field("e", Kind::Int64, 0, 0);
            let me = m.my_part as Idx;
            f.array::<i64>()
                .unwrap()
                .host_view()
                .unwrap()
                .with_mut(|s| {
                    for (i, v) in s.iter_mut().enumerate() {
                        *v = if m.edges.partition[i] == me {
                            m.edges.global_index[i]
                        } else {
                            -1
                        };
                    }
                })
                .unwrap();
            fs.halo_exchange(&f).unwrap();
            let vals = f.array::<i64>().unwrap().host_values().unwrap();
            let total = fs.statistics(&f).unwrap()[0].count;
            (
                vals == m.edges.global_index[..fs.size()],
                total,
                fs.nb_global(),
            )
        });
        assert!(ok.iter().all(|r| r.0));
        assert_eq!(ok[0].1, ok[0].2);
    }

    #[test]
    fn structured_columns_round_trip() {
        let g = Grid::from_name("O8").unwrap();
        let d = equal_regions_partition(&g, 3).unwrap();
        let out = SimComm::run(3, |c| {
            let fs = StructuredColumns::new(&g, &d, &c).unwrap();
            let f = fs.create_field("x", Kind::Real64, 0, 0);
            let pts = fs.points().to_vec();
            f.array::<f64>()
                .unwrap()
                .host_view()
                .unwrap()
                .with_mut(|s| {
                    for (v, &n) in s.iter_mut().zip(&pts) {
                        *v = n as f64;
                    }
                })
                .unwrap();
            let global = fs.gather(&f).unwrap();
            let back = fs.create_field("x", Kind::Real64, 0, 0);
            fs.scatter(global.as_ref(), &back).unwrap();
            assert_eq!(
                back.array::<f64>().unwrap().host_values().unwrap(),
                f.array::<f64>().unwrap().host_values().unwrap()
            );
            (
                fs.ranges(),
                global.map(|f| f.array::<f64>().unwrap().host_values().unwrap()),
            )
        });
        let covered: usize = out.iter().flat_map(|r| r.0.iter()).map(|r| r.len()).sum();
        assert_eq!(covered, g.size());
        let root = out[0].1.as_ref().unwrap();
        assert!(root.iter().enumerate().all(|(k, &v)| v == k as f64));
    }
}
