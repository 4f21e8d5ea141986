//! Edge-based finite volumes on the median-dual mesh of a node-centred
//! spherical mesh.
//!
//! Dual geometry is built in 3D on the unit sphere. Each (edge, cell) pair
//! gives one dual face, the chord from the edge midpoint to the cell centroid,
//! with a normal scaled by the radius and oriented from node0 to node1. Face
//! values average the midpoint value (mean of the edge's nodes) and the
//! centroid value (mean of the cell's nodes). Node volumes are the spherical
//! areas enclosed by the faces. On closed dual cells the gradient carries a
//! local 2x2 correction so that it reproduces linear fields exactly.

use crate::error::{invalid_argument, Result};
use crate::field::{Field, Kind, Layout};
use crate::functionspace::{FunctionSpace, NodeColumns};
use crate::geometry::{
    add, cross, dot, east_north, normalize, scale, sub, triangle_area, unit_vector, Vec3,
};
use crate::mesh::{Mesh, MISSING};
use crate::parallel::Comm;

pub use crate::projection::EARTH_RADIUS;

#[derive(Clone, Copy, Debug)]
struct Face {
    edge: usize,
    cell: usize,
    normal: Vec3,
    tangent: Vec3,
}

/// Dual volumes and edge normals of a mesh partition.
#[derive(Debug)]
pub struct Method<'a> {
    nodes: NodeColumns<'a>,
    radius: f64,
    volume: Vec<f64>,
    edge_nodes: Vec<[usize; 2]>,
    faces: Vec<Face>,
    normal: Vec<Vec3>,
    node_edge_offsets: Vec<usize>,
    node_edges: Vec<(usize, f64)>,
    frame: Vec<(Vec3, Vec3)>,
    consistency: Vec<[[f64; 2]; 2]>,
    interior: Vec<bool>,
}

impl<'a> Method<'a> {
    /// Collective, on the earth radius.
    pub fn new(mesh: &'a Mesh, comm: &Comm) -> Result<Self> {
        Self::with_radius(mesh, EARTH_RADIUS, comm)
    }

    /// Collective. Needs built edges and, on more than one partition, a halo.
    pub fn with_radius(mesh: &'a Mesh, radius: f64, comm: &Comm) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid_argument(format!(
                "radius {radius} must be positive"
            )));
        }
        if !mesh.has_edges() {
            return Err(invalid_argument("finite volumes need built edges"));
        }
        if mesh.nb_parts > 1 && mesh.halo_depth < 1 {
            return Err(invalid_argument(
                "finite volumes on a partitioned mesh need halo >= 1",
            ));
        }
        let nodes = NodeColumns::new(mesh, mesh.halo_depth, comm)?;
        let n = mesh.nodes.size();
        let point: Vec<Vec3> = mesh
            .nodes
            .lonlat
            .iter()
            .map(|ll| unit_vector(ll[0], ll[1]))
            .collect();
        let centroid: Vec<Vec3> = (0..mesh.cells.size())
            .map(|c| {
                let sum = mesh
                    .cells
                    .nodes(c)
                    .iter()
                    .fold([0.0; 3], |s, &v| add(s, point[v as usize]));
                normalize(sum)
            })
            .collect();

        let ne = mesh.edges.size();
        let mut volume = vec![0.0; n];
        let mut edge_nodes = Vec::with_capacity(ne);
        let mut normal = Vec::with_capacity(ne);
        let mut faces = Vec::with_capacity(2 * ne);
        let mut closed = vec![true; n];
        for e in 0..ne {
            let [a, b] = mesh.edges.nodes(e).map(|v| v as usize);
            let (pa, pb) = (point[a], point[b]);
            let m = normalize(add(pa, pb));
            let mut s = [0.0; 3];
            let cells = mesh.edges.cells(e);
            for &c in cells.iter().filter(|&&c| c != MISSING) {
                let cc = centroid[c as usize];
                let mid = normalize(add(m, cc));
                let mut nrm = cross(sub(cc, m), mid);
                if dot(nrm, sub(pb, pa)) < 0.0 {
                    nrm = scale(nrm, -1.0);
                }
                s = add(s, nrm);
                faces.push(Face {
                    edge: e,
                    cell: c as usize,
                    normal: scale(nrm, radius),
                    tangent: scale(cross(mid, nrm), radius),
                });
                volume[a] += triangle_area(pa, m, cc).abs();
                volume[b] += triangle_area(pb, m, cc).abs();
            }
            if cells.contains(&MISSING) {
                closed[a] = false;
                closed[b] = false;
            }
            edge_nodes.push([a, b]);
            normal.push(scale(s, radius));
        }
        for v in &mut volume {
            *v *= radius * radius;
        }

        let mut degree = vec![0usize; n + 1];
        for &[a, b] in &edge_nodes {
            degree[a + 1] += 1;
            degree[b + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let node_edge_offsets = degree;
        let mut fill = node_edge_offsets.clone();
        let mut node_edges = vec![(0, 0.0); 2 * ne];
        for (e, &[a, b]) in edge_nodes.iter().enumerate() {
            node_edges[fill[a]] = (e, 1.0);
            fill[a] += 1;
            node_edges[fill[b]] = (e, -1.0);
            fill[b] += 1;
        }

        let is_pole: Vec<bool> = mesh
            .nodes
            .lonlat
            .iter()
            .map(|ll| ll[1].abs() == 90.0)
            .collect();
        let interior = (0..n)
            .map(|i| {
                let around = &node_edges[node_edge_offsets[i]..node_edge_offsets[i + 1]];
                !mesh.nodes.ghost[i]
                    && closed[i]
                    && !around.is_empty()
                    && !is_pole[i]
                    && around
                        .iter()
                        .all(|&(e, _)| edge_nodes[e].iter().all(|&v| !is_pole[v]))
            })
            .collect();
        let frame: Vec<(Vec3, Vec3)> = point.iter().map(|&p| east_north(p)).collect();

        // Per-node 2x2 correction that makes the gradient exact for fields
        // linear in the tangent plane, on skewed stencils too.
        let cell_mean: Vec<Vec3> = (0..mesh.cells.size())
            .map(|c| {
                let v = mesh.cells.nodes(c);
                let sum = v.iter().fold([0.0; 3], |s, &i| add(s, point[i as usize]));
                scale(sum, 1.0 / v.len() as f64)
            })
            .collect();
        let mut moment = vec![[[0.0; 2]; 2]; n];
        for f in &faces {
            let [a, b] = edge_nodes[f.edge];
            let q = add(
                scale(add(point[a], point[b]), 0.25),
                scale(cell_mean[f.cell], 0.5),
            );
            for (i, sign) in [(a, 1.0), (b, -1.0)] {
                let (east, north) = frame[i];
                let d = scale(sub(q, point[i]), sign * radius);
                let x = [dot(d, east), dot(d, north)];
                let nn = [dot(f.normal, east), dot(f.normal, north)];
                for r in 0..2 {
                    for c in 0..2 {
                        moment[i][r][c] += x[r] * nn[c];
                    }
                }
            }
        }
        let consistency = (0..n)
            .map(|i| {
                let m = moment[i].map(|row| row.map(|v| v / volume[i]));
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if !closed[i] || det.abs() < 1e-3 {
                    return [[1.0, 0.0], [0.0, 1.0]];
                }
                // inverse of the transpose
                [
                    [m[1][1] / det, -m[1][0] / det],
                    [-m[0][1] / det, m[0][0] / det],
                ]
            })
            .collect();

        Ok(Self {
            nodes,
            radius,
            volume,
            edge_nodes,
            faces,
            normal,
            node_edge_offsets,
            node_edges,
            frame,
            consistency,
            interior,
        })
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.nodes.mesh()
    }

    /// Function space of every field the operators accept.
    pub fn node_columns(&self) -> &NodeColumns<'a> {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Dual volume of each node in m².
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// Dual normal of each edge in m, pointing from node0 to node1.
    pub fn dual_normals(&self) -> &[Vec3] {
        &self.normal
    }

    /// Edges of node `i` with the sign +1 where `i` is node0.
    pub fn node_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.node_edges[self.node_edge_offsets[i]..self.node_edge_offsets[i + 1]]
    }

    /// Owned node with a closed dual cell away from the poles.
    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    /// Signed sum of the dual normals around node `i`, in m.
    pub fn closure(&self, i: usize) -> Vec3 {
        self.node_edges(i).iter().fold([0.0; 3], |s, &(e, sign)| {
            add(s, scale(self.normal[e], sign))
        })
    }

    /// Gradient of `levels` interleaved scalars per node, as (east, north)
    /// components interleaved after the level.
    pub fn gradient_values(&self, phi: &[f64], levels: usize) -> Vec<f64> {
        let n = self.volume.len();
        let centre = self.cell_means(levels, |i, k| phi[i * levels + k]);
        let mut acc = vec![[0.0; 3]; n * levels];
        for f in &self.faces {
            let [a, b] = self.edge_nodes[f.edge];
            for k in 0..levels {
                let (pa, pb) = (phi[a * levels + k], phi[b * levels + k]);
                let face = 0.25 * (pa + pb) + 0.5 * centre[f.cell * levels + k];
                acc[a * levels + k] = add(acc[a * levels + k], scale(f.normal, face - pa));
                acc[b * levels + k] = add(acc[b * levels + k], scale(f.normal, pb - face));
            }
        }
        let mut out = vec![0.0; n * levels * 2];
        for i in 0..n {
            let (east, north) = self.frame[i];
            let t = self.consistency[i];
            for k in 0..levels {
                let g = acc[i * levels + k];
                let (ge, gn) = (
                    dot(g, east) / self.volume[i],
                    dot(g, north) / self.volume[i],
                );
                out[(i * levels + k) * 2] = t[0][0] * ge + t[0][1] * gn;
                out[(i * levels + k) * 2 + 1] = t[1][0] * ge + t[1][1] * gn;
            }
        }
        out
    }

    /// Divergence of (east, north) vectors laid out as by [`Self::gradient_values`].
    pub fn divergence_values(&self, uv: &[f64], levels: usize) -> Vec<f64> {
        self.flux_sum(uv, levels, |f| f.normal)
    }

    /// Vertical vorticity of (east, north) vectors.
    pub fn curl_values(&self, uv: &[f64], levels: usize) -> Vec<f64> {
        self.flux_sum(uv, levels, |f| f.tangent)
    }

    fn cell_means<T>(&self, levels: usize, value: impl Fn(usize, usize) -> T) -> Vec<T>
    where
        T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        let cells = &self.mesh().cells;
        let mut out = vec![T::default(); cells.size() * levels];
        for c in 0..cells.size() {
            let v = cells.nodes(c);
            for k in 0..levels {
                let mut sum = T::default();
                for &i in v {
                    sum += value(i as usize, k);
                }
                out[c * levels + k] = sum * (1.0 / v.len() as f64);
            }
        }
        out
    }

    fn flux_sum(&self, uv: &[f64], levels: usize, side: impl Fn(&Face) -> Vec3) -> Vec<f64> {
        let n = self.volume.len();
        let vector = |i: usize, k: usize| {
            let (east, north) = self.frame[i];
            let r = (i * levels + k) * 2;
            V3(add(scale(east, uv[r]), scale(north, uv[r + 1])))
        };
        let centre = self.cell_means(levels, vector);
        let mut out = vec![0.0; n * levels];
        for f in &self.faces {
            let [a, b] = self.edge_nodes[f.edge];
            let s = side(f);
            for k in 0..levels {
                let ends = add(vector(a, k).0, vector(b, k).0);
                let face = add(scale(ends, 0.25), scale(centre[f.cell * levels + k].0, 0.5));
                let flux = dot(face, s);
                out[a * levels + k] += flux;
                out[b * levels + k] -= flux;
            }
        }
        for i in 0..n {
            for v in &mut out[i * levels..(i + 1) * levels] {
                *v /= self.volume[i];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Default)]
struct V3(Vec3);

impl std::ops::AddAssign for V3 {
    fn add_assign(&mut self, rhs: Self) {
        self.0 = add(self.0, rhs.0);
    }
}

impl std::ops::Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, s: f64) -> V3 {
        V3(scale(self.0, s))
    }
}

/// Differential operators over a [`Method`].
#[derive(Clone, Copy, Debug)]
pub struct Nabla<'m, 'a> {
    method: &'m Method<'a>,
}

impl<'m, 'a> Nabla<'m, 'a> {
    pub fn new(method: &'m Method<'a>) -> Self {
        Self { method }
    }

    pub fn method(&self) -> &'m Method<'a> {
        self.method
    }

    /// Collective. `scalar` must be halo exchanged; `grad` gets two variables
    /// (east, north) per level, with its halo refreshed.
    pub fn gradient(&self, scalar: &Field, grad: &Field) -> Result<()> {
        let levels = self.scalar_levels(scalar)?;
        self.expect_vector(grad, levels)?;
        let out = self.method.gradient_values(&values(scalar)?, levels);
        self.store(grad, &out)
    }

    /// Collective. `vector` must be halo exchanged.
    pub fn divergence(&self, vector: &Field, div: &Field) -> Result<()> {
        let levels = self.vector_levels(vector)?;
        self.expect_scalar(div, levels)?;
        let out = self.method.divergence_values(&values(vector)?, levels);
        self.store(div, &out)
    }

    /// Collective. `vector` must be halo exchanged.
    pub fn curl(&self, vector: &Field, curl: &Field) -> Result<()> {
        let levels = self.vector_levels(vector)?;
        self.expect_scalar(curl, levels)?;
        let out = self.method.curl_values(&values(vector)?, levels);
        self.store(curl, &out)
    }

    /// Collective. Divergence of the gradient, exchanging the halo in between.
    pub fn laplacian(&self, scalar: &Field, lap: &Field) -> Result<()> {
        let levels = self.scalar_levels(scalar)?;
        self.expect_scalar(lap, levels)?;
        let fs = &self.method.nodes;
        let grad = fs.create_field("gradient", Kind::Real64, level_dim(scalar), 2);
        self.gradient(scalar, &grad)?;
        self.divergence(&grad, lap)
    }

    fn check(&self, field: &Field) -> Result<()> {
        self.method.nodes.check(field)?;
        if field.kind() != Kind::Real64 {
            return Err(invalid_argument(format!(
                "field `{}` must be real64",
                field.name()
            )));
        }
        if *field.data().layout() != Layout::row_major(field.shape().len()) {
            return Err(invalid_argument(format!(
                "field `{}` must be row-major",
                field.name()
            )));
        }
        Ok(())
    }

    fn scalar_levels(&self, field: &Field) -> Result<usize> {
        self.check(field)?;
        if field.variables().is_some() {
            return Err(invalid_argument(format!(
                "field `{}` is not a scalar",
                field.name()
            )));
        }
        Ok(field.levels().unwrap_or(1))
    }

    fn vector_levels(&self, field: &Field) -> Result<usize> {
        self.check(field)?;
        if field.variables() != Some(2) {
            return Err(invalid_argument(format!(
                "field `{}` needs 2 variables",
                field.name()
            )));
        }
        Ok(field.levels().unwrap_or(1))
    }

    fn expect_scalar(&self, field: &Field, levels: usize) -> Result<()> {
        if self.scalar_levels(field)? != levels {
            return Err(invalid_argument(format!(
                "field `{}` needs {levels} levels",
                field.name()
            )));
        }
        Ok(())
    }

    fn expect_vector(&self, field: &Field, levels: usize) -> Result<()> {
        if self.vector_levels(field)? != levels {
            return Err(invalid_argument(format!(
                "field `{}` needs {levels} levels",
                field.name()
            )));
        }
        Ok(())
    }

    fn store(&self, field: &Field, out: &[f64]) -> Result<()> {
        field
            .array::<f64>()?
            .host_view()?
            .with_mut(|s| s.copy_from_slice(out))?;
        self.method.nodes.halo_exchange(field)
    }
}

fn level_dim(field: &Field) -> usize {
    field.levels().unwrap_or(0)
}

fn values(field: &Field) -> Result<Vec<f64>> {
    field.array::<f64>()?.host_values()
}

#[cfg(test)]
mod tests;
