//! Small 3-vector helpers for geometry on the unit sphere.

pub type Vec3 = [f64; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Unit vector of (lon, lat) in degrees.
pub fn unit_vector(lon: f64, lat: f64) -> Vec3 {
    let (sl, cl) = lon.to_radians().sin_cos();
    let (sp, cp) = lat.to_radians().sin_cos();
    [cp * cl, cp * sl, sp]
}

/// Unit east and north vectors at `p`. At the poles east is taken along +y.
pub fn east_north(p: Vec3) -> (Vec3, Vec3) {
    let h = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if h < 1e-14 {
        let east = [0.0, 1.0, 0.0];
        return (east, cross(p, east));
    }
    let east = [-p[1] / h, p[0] / h, 0.0];
    (east, cross(p, east))
}

/// Great-circle angle between unit vectors.
pub fn angle(a: Vec3, b: Vec3) -> f64 {
    norm(cross(a, b)).atan2(dot(a, b))
}

/// Signed area of the spherical triangle of unit vectors `a`, `b`, `c`
/// (positive when counterclockwise seen from outside).
pub fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let num = dot(a, cross(b, c));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Area of a convex spherical polygon, fanning from the first vertex.
pub fn polygon_area(vertices: &[Vec3]) -> f64 {
    (1..vertices.len().saturating_sub(1))
        .map(|k| triangle_area(vertices[0], vertices[k], vertices[k + 1]))
        .sum()
}

/// Whether `p` lies inside the convex spherical polygon with counterclockwise
/// vertices, allowing `tol` (a sine of angle) outside each side.
pub fn in_convex_polygon(p: Vec3, vertices: &[Vec3], tol: f64) -> bool {
    if vertices.iter().map(|&v| dot(v, p)).any(|d| d <= 0.0) {
        return false;
    }
    let n = vertices.len();
    (0..n).all(|k| {
        let a = vertices[k];
        let b = vertices[(k + 1) % n];
        let side = cross(a, b);
        let len = norm(side);
        len == 0.0 || dot(side, p) / len >= -tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn octant_area() {
        let a = triangle_area([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        assert!((a - PI / 2.0).abs() < 1e-15);
        let b = triangle_area([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]);
        assert!((b + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn east_north_frame() {
        let p = unit_vector(90.0, 0.0);
        let (e, n) = east_north(p);
        assert!((e[0] + 1.0).abs() < 1e-15 && (n[2] - 1.0).abs() < 1e-15);
        let (e, n) = east_north([0.0, 0.0, 1.0]);
        assert!(dot(e, n).abs() < 1e-15);
    }

    #[test]
    fn containment() {
        let quad = [
            unit_vector(0.0, 10.0),
            unit_vector(0.0, 0.0),
            unit_vector(10.0, 0.0),
            unit_vector(10.0, 10.0),
        ];
        assert!(in_convex_polygon(unit_vector(5.0, 5.0), &quad, 0.0));
        assert!(in_convex_polygon(unit_vector(0.0, 5.0), &quad, 1e-12));
        assert!(!in_convex_polygon(unit_vector(11.0, 5.0), &quad, 1e-12));
        assert!(!in_convex_polygon(unit_vector(185.0, -5.0), &quad, 1e-12));
    }

    #[test]
    fn angles() {
        assert!((angle(unit_vector(0.0, 0.0), unit_vector(90.0, 0.0)) - PI / 2.0).abs() < 1e-15);
    }
}
