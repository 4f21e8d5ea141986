//! Mesh containers: nodes, cells and edges with their parallel identity fields.

mod connectivity;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use connectivity::{
    BlockConnectivity, BlockView, BlockViewMut, Idx, IrregularConnectivity, MultiBlockConnectivity,
    MISSING,
};

use crate::error::{invalid_argument, Result};
use crate::meshgen::Topology;

/// Global (1-based) entity identifier.
pub type Gidx = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementType {
    Triangle,
    Quadrilateral,
}

impl ElementType {
    pub fn name(self) -> &'static str {
        match self {
            ElementType::Triangle => "triangle",
            ElementType::Quadrilateral => "quadrilateral",
        }
    }

    pub fn nb_nodes(self) -> usize {
        match self {
            ElementType::Triangle => 3,
            ElementType::Quadrilateral => 4,
        }
    }

    pub fn nb_edges(self) -> usize {
        self.nb_nodes()
    }

    pub fn from_nb_nodes(n: usize) -> Option<Self> {
        match n {
            3 => Some(ElementType::Triangle),
            4 => Some(ElementType::Quadrilateral),
            _ => None,
        }
    }
}

/// Per-node coordinates, identity fields and named extras.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Nodes {
    pub xy: Vec<[f64; 2]>,
    pub lonlat: Vec<[f64; 2]>,
    pub global_index: Vec<Gidx>,
    pub partition: Vec<Idx>,
    pub remote_index: Vec<Idx>,
    pub ghost: Vec<bool>,
    /// 0 for owned nodes and nodes of owned cells, k for nodes first reached at halo level k.
    pub halo: Vec<Idx>,
    #[serde(default)]
    pub fields: BTreeMap<String, Vec<f64>>,
}

impl Nodes {
    pub fn size(&self) -> usize {
        self.global_index.len()
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn push(
        &mut self,
        xy: [f64; 2],
        lonlat: [f64; 2],
        gidx: Gidx,
        part: Idx,
        remote: Idx,
        ghost: bool,
        halo: Idx,
    ) {
        self.xy.push(xy);
        self.lonlat.push(lonlat);
        self.global_index.push(gidx);
        self.partition.push(part);
        self.remote_index.push(remote);
        self.ghost.push(ghost);
        self.halo.push(halo);
    }

    /// Attach a named per-node field.
    pub fn add_field(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.size() {
            return Err(invalid_argument(format!(
                "field `{name}` has {} values for {} nodes",
                values.len(),
                self.size()
            )));
        }
        self.fields.insert(name.to_string(), values);
        Ok(())
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.get(name).map(Vec::as_slice)
    }

    /// Number of nodes whose halo level is at most `h`; they form a prefix.
    pub fn nb_within_halo(&self, h: usize) -> usize {
        self.halo.partition_point(|&l| l as usize <= h)
    }

    fn lengths_consistent(&self) -> bool {
        let n = self.size();
        [
            self.xy.len(),
            self.lonlat.len(),
            self.partition.len(),
            self.remote_index.len(),
            self.ghost.len(),
            self.halo.len(),
        ]
        .iter()
        .all(|&l| l == n)
            && self.fields.values().all(|f| f.len() == n)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cells {
    pub node_connectivity: MultiBlockConnectivity,
    /// Element type of each block of `node_connectivity`.
    pub block_types: Vec<ElementType>,
    pub global_index: Vec<Gidx>,
    pub partition: Vec<Idx>,
    pub remote_index: Vec<Idx>,
    pub halo: Vec<Idx>,
}

impl Cells {
    pub fn size(&self) -> usize {
        self.node_connectivity.rows()
    }

    pub fn element_type(&self, c: usize) -> ElementType {
        let (b, _) = self
            .node_connectivity
            .locate(c)
            .expect("cell index in range");
        self.block_types[b]
    }

    pub fn nodes(&self, c: usize) -> &[Idx] {
        self.node_connectivity.row(c)
    }

    pub(crate) fn add_block(&mut self, kind: ElementType, block: &BlockConnectivity) {
        self.node_connectivity.add_block(block);
        self.block_types.push(kind);
    }

    pub fn count(&self, kind: ElementType) -> usize {
        (0..self.node_connectivity.nb_blocks())
            .filter(|&b| self.block_types[b] == kind)
            .map(|b| self.node_connectivity.block(b).rows())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edges {
    /// Two nodes per edge, lower global index first.
    pub node_connectivity: BlockConnectivity,
    /// Up to two adjacent cells per edge, [`MISSING`] where absent.
    pub cell_connectivity: BlockConnectivity,
    pub global_index: Vec<Gidx>,
    pub partition: Vec<Idx>,
    pub remote_index: Vec<Idx>,
    pub halo: Vec<Idx>,
}

impl Default for Edges {
    fn default() -> Self {
        Self {
            node_connectivity: BlockConnectivity::empty(2),
            cell_connectivity: BlockConnectivity::empty(2),
            global_index: Vec::new(),
            partition: Vec::new(),
            remote_index: Vec::new(),
            halo: Vec::new(),
        }
    }
}

impl Edges {
    pub fn size(&self) -> usize {
        self.node_connectivity.rows()
    }

    pub fn nodes(&self, e: usize) -> [Idx; 2] {
        let r = self.node_connectivity.row(e);
        [r[0], r[1]]
    }

    pub fn cells(&self, e: usize) -> [Idx; 2] {
        let r = self.cell_connectivity.row(e);
        [r[0], r[1]]
    }

    pub fn nb_within_halo(&self, h: usize) -> usize {
        self.halo.partition_point(|&l| l as usize <= h)
    }
}

/// One partition of a distributed mesh: its owned cells plus halo cells.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub nodes: Nodes,
    pub cells: Cells,
    pub edges: Edges,
    pub halo_depth: usize,
    pub my_part: usize,
    pub nb_parts: usize,
    #[serde(skip)]
    pub(crate) topology: Option<Arc<Topology>>,
}

impl Mesh {
    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn cells(&self) -> &Cells {
        &self.cells
    }

    pub fn edges(&self) -> &Edges {
        &self.edges
    }

    pub fn has_edges(&self) -> bool {
        self.edges.size() > 0
    }

    /// Number of nodes owned by this partition.
    pub fn nb_owned_nodes(&self) -> usize {
        self.nodes.ghost.iter().take_while(|g| !**g).count()
    }

    pub fn nb_owned_cells(&self) -> usize {
        let p = self.my_part as Idx;
        self.cells.partition.iter().take_while(|&&q| q == p).count()
    }

    pub fn nb_owned_edges(&self) -> usize {
        let p = self.my_part as Idx;
        self.edges.partition.iter().take_while(|&&q| q == p).count()
    }

    /// Check sizes and index ranges of every table.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.size() as Idx;
        if !self.nodes.lengths_consistent() {
            return Err(invalid_argument("node fields differ in length"));
        }
        let nc = self.cells.size();
        if [
            self.cells.global_index.len(),
            self.cells.partition.len(),
            self.cells.remote_index.len(),
            self.cells.halo.len(),
        ]
        .iter()
        .any(|&l| l != nc)
        {
            return Err(invalid_argument("cell fields differ in length"));
        }
        if self.cells.block_types.len() != self.cells.node_connectivity.nb_blocks() {
            return Err(invalid_argument("every cell block needs an element type"));
        }
        let in_range = |v: Idx, size: Idx| v == MISSING || (0..size).contains(&v);
        if self
            .cells
            .node_connectivity
            .as_irregular()
            .values()
            .iter()
            .any(|&v| !(0..n).contains(&v))
        {
            return Err(invalid_argument(
                "cell connectivity refers to a missing node",
            ));
        }
        let ne = self.edges.size();
        if self.edges.cell_connectivity.rows() != ne
            || [
                self.edges.global_index.len(),
                self.edges.partition.len(),
                self.edges.remote_index.len(),
                self.edges.halo.len(),
            ]
            .iter()
            .any(|&l| l != ne)
        {
            return Err(invalid_argument("edge fields differ in length"));
        }
        if self
            .edges
            .node_connectivity
            .values()
            .iter()
            .any(|&v| !(0..n).contains(&v))
        {
            return Err(invalid_argument(
                "edge connectivity refers to a missing node",
            ));
        }
        if self
            .edges
            .cell_connectivity
            .values()
            .iter()
            .any(|&v| !in_range(v, nc as Idx))
        {
            return Err(invalid_argument(
                "edge connectivity refers to a missing cell",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("mesh serializes")
    }

    /// Read a JSON dump. The result has no link to a generating grid, so halo
    /// growth is unavailable and edges are numbered locally.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mesh: Mesh = serde_json::from_str(text)?;
        mesh.validate()?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Mesh {
        let mut m = Mesh {
            nb_parts: 1,
            ..Default::default()
        };
        for (k, p) in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .into_iter()
            .enumerate()
        {
            m.nodes.push(p, p, k as Gidx + 1, 0, k as Idx, false, 0);
        }
        let tri = BlockConnectivity::new(2, 3, vec![0, 1, 2, 0, 2, 3]).unwrap();
        m.cells.add_block(ElementType::Triangle, &tri);
        m.cells.global_index = vec![1, 2];
        m.cells.partition = vec![0, 0];
        m.cells.remote_index = vec![0, 1];
        m.cells.halo = vec![0, 0];
        m
    }

    #[test]
    fn element_types() {
        assert_eq!(ElementType::Triangle.nb_nodes(), 3);
        assert_eq!(ElementType::Quadrilateral.nb_edges(), 4);
        assert_eq!(
            ElementType::from_nb_nodes(4),
            Some(ElementType::Quadrilateral)
        );
        assert_eq!(ElementType::from_nb_nodes(5), None);
    }

    #[test]
    fn accessors() {
        let m = two_triangles();
        assert_eq!(m.nodes().size(), 4);
        assert_eq!(m.cells().size(), 2);
        assert_eq!(m.edges().size(), 0);
        assert!(!m.has_edges());
        assert_eq!(m.cells.element_type(1), ElementType::Triangle);
        assert_eq!(m.cells.count(ElementType::Quadrilateral), 0);
        m.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let mut m = two_triangles();
        m.nodes.add_field("h", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = m.to_json().to_string();
        let back = Mesh::from_json_str(&text).unwrap();
        assert_eq!(back.to_json().to_string(), text);
        assert_eq!(back.nodes, m.nodes);
        assert_eq!(back.cells, m.cells);
    }

    #[test]
    fn validation_catches_bad_indices() {
        let mut m = two_triangles();
        m.cells.node_connectivity.set(1, 2, 7);
        assert!(m.validate().is_err());
        let mut m = two_triangles();
        assert!(m.nodes.add_field("bad", vec![0.0]).is_err());
        m.nodes.halo.pop();
        assert!(m.validate().is_err());
    }
}
