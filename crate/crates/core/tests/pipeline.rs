use std::collections::HashMap;

use meshkit::field::Kind;
use meshkit::functionspace::{FunctionSpace, NodeColumns, StructuredColumns};
use meshkit::fvm::{Method, Nabla};
use meshkit::grid::Grid;
use meshkit::mesh::Mesh;
use meshkit::meshgen::{build_edges, build_halo, generate_mesh, generate_partitions, MeshOptions};
use meshkit::parallel::{Comm, SimComm};
use meshkit::partition::equal_regions_partition;

fn partitions(name: &str, parts: usize, options: MeshOptions) -> Vec<Mesh> {
    let grid = Grid::from_name(name).unwrap();
    let dist = equal_regions_partition(&grid, parts).unwrap();
    generate_partitions(&grid, &dist, options).unwrap()
}

#[test]
fn halo_grows_incrementally() {
    let once = partitions("O24", 6, MeshOptions::default());
    for (k, base) in once.into_iter().enumerate() {
        let mut stepwise = base.clone();
        build_halo(&mut stepwise, 1).unwrap();
        build_halo(&mut stepwise, 1).unwrap();
        let mut direct = base;
        build_halo(&mut direct, 2).unwrap();
        assert_eq!(stepwise.halo_depth, 2);
        assert_eq!(stepwise.to_json(), direct.to_json(), "partition {k}");
    }
}

#[test]
fn mesh_json_round_trip() {
    let mut meshes = partitions(
        "O12",
        3,
        MeshOptions {
            pole_elements: true,
        },
    );
    let m = &mut meshes[1];
    build_halo(m, 2).unwrap();
    build_edges(m);
    let text = m.to_json().to_string();
    let back = Mesh::from_json_str(&text).unwrap();
    assert_eq!(back.to_json().to_string(), text);
    assert!(Mesh::from_json_str("{\"nodes\": 3}").is_err());
}

#[test]
fn distributed_operators_match_serial() {
    let options = MeshOptions {
        pole_elements: true,
    };
    let grid = Grid::from_name("O20").unwrap();
    let mut global = generate_mesh(&grid, options).unwrap();
    build_edges(&mut global);
    let phi = |g: i64| ((g as f64) * 0.013).sin() + 0.1 * (g as f64 * 0.7).cos();

    let serial = {
        let method = Method::new(&global, &Comm::serial()).unwrap();
        let fs = method.node_columns();
        let s = fs.create_field("s", Kind::Real64, 0, 0);
        s.array::<f64>()
            .unwrap()
            .host_view()
            .unwrap()
            .with_mut(|v| {
                v.iter_mut()
                    .enumerate()
                    .for_each(|(i, x)| *x = phi(global.nodes.global_index[i]))
            })
            .unwrap();
        let lap = fs.create_field("l", Kind::Real64, 0, 0);
        Nabla::new(&method).laplacian(&s, &lap).unwrap();
        let values = lap.array::<f64>().unwrap().host_values().unwrap();
        let by_gidx: HashMap<i64, f64> = global
            .nodes
            .global_index
            .iter()
            .copied()
            .zip(values)
            .collect();
        by_gidx
    };
    let scale = serial.values().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut meshes = partitions("O20", 5, options);
    for m in &mut meshes {
        build_halo(m, 2).unwrap();
        build_edges(m);
    }
    let worst = SimComm::run(5, |c| {
        let m = &meshes[c.rank()];
        let method = Method::new(m, &c).unwrap();
        let fs = method.node_columns();
        let s = fs.create_field("s", Kind::Real64, 0, 0);
        s.array::<f64>()
            .unwrap()
            .host_view()
            .unwrap()
            .with_mut(|v| {
                v.iter_mut()
                    .enumerate()
                    .for_each(|(i, x)| *x = phi(m.nodes.global_index[i]))
            })
            .unwrap();
        let lap = fs.create_field("l", Kind::Real64, 0, 0);
        Nabla::new(&method).laplacian(&s, &lap).unwrap();
        let values = lap.array::<f64>().unwrap().host_values().unwrap();
        fs.owned_rows()
            .iter()
            .map(|&i| (values[i] - serial[&m.nodes.global_index[i]]).abs())
            .fold(0.0f64, f64::max)
    });
    for w in worst {
        assert!(w < 1e-9 * scale, "{w} vs {scale}");
    }
}

#[test]
fn node_columns_need_enough_halo() {
    let mut meshes = partitions("O8", 2, MeshOptions::default());
    build_halo(&mut meshes[0], 1).unwrap();
    assert!(NodeColumns::new(&meshes[0], 2, &Comm::serial()).is_err());
    assert!(Method::new(&meshes[1], &Comm::serial()).is_err());
}

#[test]
fn structured_columns_gather() {
    let grid = Grid::from_name("O12").unwrap();
    let dist = equal_regions_partition(&grid, 4).unwrap();
    let sizes = SimComm::run(4, |c| {
        let fs = StructuredColumns::new(&grid, &dist, &c).unwrap();
        let f = fs.create_field("x", Kind::Real64, 2, 0);
        let points = fs.points().to_vec();
        f.array::<f64>()
            .unwrap()
            .host_view()
            .unwrap()
            .with_mut(|v| {
                v.iter_mut()
                    .enumerate()
                    .for_each(|(k, x)| *x = (points[k / 2] * 2 + k % 2) as f64)
            })
            .unwrap();
        let global = fs.gather(&f).unwrap();
        global.map(|g| g.array::<f64>().unwrap().host_values().unwrap())
    });
    let all = sizes[0].as_ref().unwrap();
    assert_eq!(all.len(), 2 * grid.size());
    assert!(all.iter().enumerate().all(|(k, &v)| v == k as f64));
}
