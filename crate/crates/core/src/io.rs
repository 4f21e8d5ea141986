//! Text exporters: Gmsh MSH 2.2 ASCII meshes and SVG partition plots.

use std::fmt::Write;

use crate::error::Result;
use crate::grid::Grid;
use crate::mesh::{ElementType, Mesh};
use crate::partition::Distribution;

/// Gmsh element type code.
fn gmsh_type(kind: ElementType) -> u32 {
    match kind {
        ElementType::Triangle => 2,
        ElementType::Quadrilateral => 3,
    }
}

/// All local nodes and cells, tagged by global index. Coordinates are
/// (lon, lat, 0); the elementary tag of a cell is its partition plus one.
pub fn write_gmsh(mesh: &Mesh) -> String {
    let mut out = String::from("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let nodes = &mesh.nodes;
    writeln!(out, "{}", nodes.size()).unwrap();
    for i in 0..nodes.size() {
        let [lon, lat] = nodes.lonlat[i];
        writeln!(out, "{} {lon} {lat} 0", nodes.global_index[i]).unwrap();
    }
    out.push_str("$EndNodes\n$Elements\n");
    let cells = &mesh.cells;
    writeln!(out, "{}", cells.size()).unwrap();
    for c in 0..cells.size() {
        write!(
            out,
            "{} {} 2 1 {}",
            cells.global_index[c],
            gmsh_type(cells.element_type(c)),
            cells.partition[c] + 1
        )
        .unwrap();
        for &v in cells.nodes(c) {
            write!(out, " {}", nodes.global_index[v as usize]).unwrap();
        }
        out.push('\n');
    }
    out.push_str("$EndElements\n");
    out
}

/// Equirectangular scatter of the grid points on a 720×360 canvas, one
/// circle per point coloured by partition.
pub fn write_partition_svg(grid: &Grid, dist: &Distribution) -> Result<String> {
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"360\" viewBox=\"0 0 720 360\">\n\
         <rect width=\"720\" height=\"360\" fill=\"white\"/>\n",
    );
    for n in 0..grid.size() {
        let p = grid.lonlat(n)?;
        let lon = p.lon.rem_euclid(360.0);
        let hue = (dist.part[n] as f64 * 137.508).rem_euclid(360.0);
        writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"1.5\" fill=\"hsl({hue:.3},70%,50%)\"/>",
            2.0 * lon,
            2.0 * (90.0 - p.lat)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
