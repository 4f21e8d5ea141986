use std::f64::consts::PI;

use super::*;
use crate::geometry::norm;
use crate::grid::Grid;
use crate::mesh::{BlockConnectivity, ElementType};
use crate::meshgen::{build_edges, build_halo, generate_mesh, generate_partitions, MeshOptions};
use crate::parallel::SimComm;
use crate::partition::equal_regions_partition;

fn global_mesh(name: &str, poles: bool) -> Mesh {
    let g = Grid::from_name(name).unwrap();
    let mut m = generate_mesh(
        &g,
        MeshOptions {
            pole_elements: poles,
        },
    )
    .unwrap();
    build_edges(&mut m);
    m
}

fn fill(field: &Field, f: impl Fn(usize, usize) -> f64) {
    let width = field.shape()[1..].iter().product::<usize>();
    field
        .array::<f64>()
        .unwrap()
        .host_view()
        .unwrap()
        .with_mut(|s| {
            for (k, v) in s.iter_mut().enumerate() {
                *v = f(k / width, k % width);
            }
        })
        .unwrap();
}

fn read(field: &Field) -> Vec<f64> {
    field.array::<f64>().unwrap().host_values().unwrap()
}

#[test]
fn single_quad_quarters() {
    let mut m = Mesh::default();
    let d = 0.01;
    for (k, ll) in [[0.0, 0.0], [d, 0.0], [d, d], [0.0, d]]
        .into_iter()
        .enumerate()
    {
        m.nodes.push(ll, ll, k as i64 + 1, 0, k as i32, false, 0);
    }
    let block = BlockConnectivity::new(1, 4, vec![0, 1, 2, 3]).unwrap();
    m.cells.add_block(ElementType::Quadrilateral, &block);
    m.cells.global_index.push(1);
    m.cells.partition.push(0);
    m.cells.remote_index.push(0);
    m.cells.halo.push(0);
    m.nb_parts = 1;
    build_edges(&mut m);
    let method = Method::with_radius(&m, 1.0, &Comm::serial()).unwrap();
    let p: Vec<Vec3> = m
        .nodes
        .lonlat
        .iter()
        .map(|ll| unit_vector(ll[0], ll[1]))
        .collect();
    let area = crate::geometry::polygon_area(&p);
    for &v in method.volumes() {
        assert!(
            (v - area / 4.0).abs() < 1e-6 * area,
            "{v} vs {}",
            area / 4.0
        );
    }
    assert!(!method.is_interior(0));
}

#[test]
fn missing_edges_rejected() {
    let g = Grid::from_name("O4").unwrap();
    let m = generate_mesh(&g, MeshOptions::default()).unwrap();
    assert!(matches!(
        Method::new(&m, &Comm::serial()),
        Err(crate::Error::InvalidArgument(_))
    ));
}

#[test]
fn volumes_cover_sphere() {
    let m = global_mesh("O32", true);
    let method = Method::with_radius(&m, 2.0, &Comm::serial()).unwrap();
    let total: f64 = method.volumes().iter().sum();
    assert!((total - 16.0 * PI).abs() < 1e-9 * total);
    assert!(method.volumes().iter().all(|&v| v > 0.0));
}

#[test]
fn dual_cells_nearly_close() {
    let m = global_mesh("O16", true);
    let method = Method::with_radius(&m, 1.0, &Comm::serial()).unwrap();
    for i in 0..m.nodes.size() {
        let c = method.closure(i);
        let (east, north) = east_north(unit_vector(m.nodes.lonlat[i][0], m.nodes.lonlat[i][1]));
        let scale_len: f64 = method
            .node_edges(i)
            .iter()
            .map(|&(e, _)| norm(method.dual_normals()[e]))
            .sum();
        let tangential = dot(c, east).hypot(dot(c, north));
        assert!(
            tangential < 1e-2 * scale_len,
            "node {i}: {tangential} vs {scale_len}"
        );
    }
}

#[test]
fn operator_accuracy_o32() {
    let m = global_mesh("O32", false);
    let r = EARTH_RADIUS;
    let method = Method::new(&m, &Comm::serial()).unwrap();
    let nabla = Nabla::new(&method);
    let fs = method.node_columns();
    let lat = |i: usize| m.nodes.lonlat[i][1].to_radians();
    let interior: Vec<usize> = (0..m.nodes.size())
        .filter(|&i| method.is_interior(i))
        .collect();
    assert!(interior.len() > m.nodes.size() / 2);

    let phi = fs.create_field("lat", Kind::Real64, 0, 0);
    fill(&phi, |i, _| lat(i));
    let grad = fs.create_field("grad", Kind::Real64, 0, 2);
    nabla.gradient(&phi, &grad).unwrap();
    let g = read(&grad);
    let err = interior
        .iter()
        .map(|&i| (g[2 * i] * r).abs().max((g[2 * i + 1] * r - 1.0).abs()))
        .fold(0.0, f64::max);
    assert!(err < 5e-2, "gradient {err}");

    let curl = fs.create_field("curl", Kind::Real64, 0, 0);
    nabla.curl(&grad, &curl).unwrap();
    let c = read(&curl);
    // relative to the stencil scale |grad| / sqrt(V)
    let worst = interior
        .iter()
        .map(|&i| (c[i] * r * method.volumes()[i].sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 5e-2, "curl of gradient {worst}");

    let u0 = 20.0;
    let wind = fs.create_field("wind", Kind::Real64, 0, 2);
    fill(&wind, |i, v| if v == 0 { u0 * lat(i).cos() } else { 0.0 });
    let div = fs.create_field("div", Kind::Real64, 0, 0);
    nabla.divergence(&wind, &div).unwrap();
    let d = read(&div);
    let worst = interior
        .iter()
        .map(|&i| (d[i] * r / u0).abs())
        .fold(0.0, f64::max);
    assert!(worst < 5e-2, "divergence {worst}");

    nabla.curl(&wind, &curl).unwrap();
    let c = read(&curl);
    let scale_v = 2.0 * u0 / r;
    let worst = interior
        .iter()
        .map(|&i| (c[i] - scale_v * lat(i).sin()).abs() / scale_v)
        .fold(0.0, f64::max);
    assert!(worst < 0.1, "vorticity {worst}");

    let s = fs.create_field("s", Kind::Real64, 0, 0);
    fill(&s, |i, _| lat(i).sin());
    let lap = fs.create_field("lap", Kind::Real64, 0, 0);
    nabla.laplacian(&s, &lap).unwrap();
    let l = read(&lap);
    let lap_interior: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|&i| {
            method
                .node_edges(i)
                .iter()
                .all(|&(e, _)| method.edge_nodes[e].iter().all(|&v| method.is_interior(v)))
        })
        .collect();
    let worst = lap_interior
        .iter()
        .map(|&i| (l[i] + 2.0 * lat(i).sin() / (r * r)).abs() * r * r / 2.0)
        .fold(0.0, f64::max);
    assert!(worst < 0.15, "laplacian {worst}");
}

#[test]
fn constant_and_zero_fields() {
    let m = global_mesh("O8", true);
    let method = Method::new(&m, &Comm::serial()).unwrap();
    let nabla = Nabla::new(&method);
    let fs = method.node_columns();
    let phi = fs.create_field("c", Kind::Real64, 3, 0);
    fill(&phi, |_, k| 7.5 + k as f64);
    let grad = fs.create_field("g", Kind::Real64, 3, 2);
    nabla.gradient(&phi, &grad).unwrap();
    assert!(read(&grad).iter().all(|&v| v == 0.0));
    let lap = fs.create_field("l", Kind::Real64, 3, 0);
    nabla.laplacian(&phi, &lap).unwrap();
    assert!(read(&lap).iter().all(|&v| v == 0.0));
    let zero = fs.create_field("z", Kind::Real64, 3, 2);
    nabla.divergence(&zero, &lap).unwrap();
    assert!(read(&lap).iter().all(|&v| v == 0.0));
    nabla.curl(&zero, &lap).unwrap();
    assert!(read(&lap).iter().all(|&v| v == 0.0));
}

#[test]
fn levels_are_independent() {
    let m = global_mesh("O8", false);
    let method = Method::new(&m, &Comm::serial()).unwrap();
    let nabla = Nabla::new(&method);
    let fs = method.node_columns();
    let f = |i: usize| m.nodes.lonlat[i][1].to_radians().sin();
    let h = |i: usize| m.nodes.lonlat[i][0].to_radians().cos();
    let both = fs.create_field("b", Kind::Real64, 2, 0);
    fill(&both, |i, k| if k == 0 { f(i) } else { h(i) });
    let grad2 = fs.create_field("g", Kind::Real64, 2, 2);
    nabla.gradient(&both, &grad2).unwrap();
    let g2 = read(&grad2);
    for (k, func) in [(0, &f as &dyn Fn(usize) -> f64), (1, &h)] {
        let one = fs.create_field("o", Kind::Real64, 0, 0);
        fill(&one, |i, _| func(i));
        let g = fs.create_field("g1", Kind::Real64, 0, 2);
        nabla.gradient(&one, &g).unwrap();
        let g1 = read(&g);
        for i in 0..fs.size() {
            assert_eq!(g2[(i * 2 + k) * 2], g1[2 * i]);
            assert_eq!(g2[(i * 2 + k) * 2 + 1], g1[2 * i + 1]);
        }
    }
}

#[test]
fn wrong_fields_rejected() {
    let m = global_mesh("O4", false);
    let method = Method::new(&m, &Comm::serial()).unwrap();
    let nabla = Nabla::new(&method);
    let fs = method.node_columns();
    let scalar = fs.create_field("s", Kind::Real64, 0, 0);
    let vector = fs.create_field("v", Kind::Real64, 0, 2);
    let three = fs.create_field("t", Kind::Real64, 0, 3);
    let ints = fs.create_field("i", Kind::Int32, 0, 0);
    let foreign = Field::new("f", Kind::Real64, &[fs.size()]);
    assert!(nabla.divergence(&scalar, &scalar).is_err());
    assert!(nabla.divergence(&three, &scalar).is_err());
    assert!(nabla.gradient(&vector, &vector).is_err());
    assert!(nabla.gradient(&ints, &vector).is_err());
    assert!(nabla.gradient(&foreign, &vector).is_err());
    assert!(nabla.gradient(&scalar, &scalar).is_err());
}

#[test]
fn gauss_identity_distributed() {
    let g = Grid::from_name("O16").unwrap();
    let d = equal_regions_partition(&g, 4).unwrap();
    let mut meshes = generate_partitions(
        &g,
        &d,
        MeshOptions {
            pole_elements: true,
        },
    )
    .unwrap();
    for m in &mut meshes {
        build_halo(m, 1).unwrap();
        build_edges(m);
    }
    let sums = SimComm::run(4, |c| {
        let m = &meshes[c.rank()];
        let method = Method::new(m, &c).unwrap();
        let nabla = Nabla::new(&method);
        let fs = method.node_columns();
        let wind = fs.create_field("w", Kind::Real64, 0, 2);
        fill(&wind, |i, v| {
            let g = m.nodes.global_index[i] as f64;
            (g * 0.37 + v as f64 * 1.3).sin()
        });
        let div = fs.create_field("d", Kind::Real64, 0, 0);
        nabla.divergence(&wind, &div).unwrap();
        let dv = read(&div);
        let owned = fs.owned_rows();
        let weighted: f64 = owned.iter().map(|&i| method.volumes()[i] * dv[i]).sum();
        let magnitude: f64 = owned
            .iter()
            .map(|&i| (method.volumes()[i] * dv[i]).abs())
            .sum();
        (
            c.all_reduce_sum_f64(weighted),
            c.all_reduce_sum_f64(magnitude),
        )
    });
    let (total, magnitude) = sums[0];
    assert!(total.abs() < 1e-10 * magnitude, "{total} vs {magnitude}");
}

#[test]
fn gradient_exact_for_linear_fields() {
    let m = global_mesh("O16", true);
    let method = Method::with_radius(&m, 1.0, &Comm::serial()).unwrap();
    let fs = method.node_columns();
    let q: Vec<Vec3> = m
        .nodes
        .lonlat
        .iter()
        .map(|ll| unit_vector(ll[0], ll[1]))
        .collect();
    let phi = fs.create_field("phi", Kind::Real64, 0, 0);
    let grad = fs.create_field("g", Kind::Real64, 0, 2);
    for i in (0..m.nodes.size())
        .filter(|&i| method.is_interior(i))
        .step_by(37)
    {
        let (east, north) = east_north(q[i]);
        let dir = add(scale(east, 0.6), scale(north, -1.7));
        fill(&phi, |j, _| dot(dir, q[j]));
        Nabla::new(&method).gradient(&phi, &grad).unwrap();
        let g = read(&grad);
        assert!((g[2 * i] - 0.6).abs() < 1e-12 && (g[2 * i + 1] + 1.7).abs() < 1e-12);
    }
}
