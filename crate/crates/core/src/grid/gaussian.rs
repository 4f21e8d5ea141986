//! Gaussian latitudes: the roots of the Legendre polynomial of degree `2N`
//! mapped to latitudes in degrees, north to south.
//!
//! Roots are located by Newton iteration on `x = cos(colatitude)` using the
//! three-term Legendre recurrence. Near the poles `x` is too close to 1 for a
//! double to resolve the root, so every root gets a final Newton correction
//! in colatitude, where the polynomial is evaluated through its cosine series
//! `P_n(cos t) = sum_k g_k g_(n-k) cos((n-2k) t)` without ever forming `cos t`.

use std::f64::consts::PI;

use crate::error::{invalid_argument, Result};

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-15;

/// The `2N` Gaussian latitudes in degrees, strictly decreasing.
pub fn gaussian_latitudes(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid_argument("Gaussian number N must be at least 1"));
    }
    let degree = 2 * n;
    let series = CosineSeries::new(degree);
    let mut lats = vec![0.0; degree];
    for k in 0..n {
        let colat = colatitude_of_root(degree, k, &series);
        let lat = 90.0 - colat.to_degrees();
        lats[k] = lat;
        lats[degree - 1 - k] = -lat;
    }
    Ok(lats)
}

/// Colatitude (radians) of the k-th root counted from the north pole.
fn colatitude_of_root(degree: usize, k: usize, series: &CosineSeries) -> f64 {
    let guess = PI * (k as f64 + 0.75) / (degree as f64 + 0.5);
    let mut x = guess.cos();
    for _ in 0..MAX_ITERATIONS {
        let (p, dp) = legendre_with_derivative(degree, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() < TOLERANCE {
            break;
        }
    }
    let mut theta = x.clamp(-1.0, 1.0).acos();
    // Two corrections in colatitude: the first removes the representation
    // error of x, the second confirms convergence.
    for _ in 0..2 {
        let (p, dp_dtheta) = series.eval(theta);
        if dp_dtheta == 0.0 {
            break;
        }
        theta -= p / dp_dtheta;
    }
    theta
}

/// `(P_n(x), P_n'(x))` by the standard recurrence.
fn legendre_with_derivative(degree: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for l in 1..degree {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p - lf * p_prev) / (lf + 1.0);
        p_prev = p;
        p = next;
    }
    if degree == 0 {
        return (1.0, 0.0);
    }
    let dp = degree as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Cosine-series form of `P_n(cos t)`.
struct CosineSeries {
    degree: usize,
    /// `coeff[m]` multiplies `cos(m t)` for `m = degree, degree-2, ...`;
    /// indexed by `m`, zero where parity differs.
    coeff: Vec<f64>,
}

impl CosineSeries {
    fn new(degree: usize) -> Self {
        // g_k = (2k)! / (4^k (k!)^2)
        let mut g = vec![1.0; degree + 1];
        for k in 1..=degree {
            g[k] = g[k - 1] * (2 * k - 1) as f64 / (2 * k) as f64;
        }
        let mut coeff = vec![0.0; degree + 1];
        for k in 0..=degree {
            let m = (degree as isize - 2 * k as isize).unsigned_abs();
            coeff[m] += g[k] * g[degree - k];
        }
        Self { degree, coeff }
    }

    /// `(P_n(cos t), d/dt P_n(cos t))`.
    fn eval(&self, theta: f64) -> (f64, f64) {
        const RESYNC: usize = 32;
        let start = self.degree % 2;
        let (s2, c2) = (2.0 * theta).sin_cos();
        let (mut s, mut c) = (start as f64 * theta).sin_cos();
        let mut p = 0.0;
        let mut dp = 0.0;
        let mut step = 0;
        let mut m = start;
        while m <= self.degree {
            if step % RESYNC == 0 {
                let sc = (m as f64 * theta).sin_cos();
                s = sc.0;
                c = sc.1;
            }
            let a = self.coeff[m];
            p += a * c;
            dp -= a * m as f64 * s;
            let (sn, cn) = (s * c2 + c * s2, c * c2 - s * s2);
            s = sn;
            c = cn;
            m += 2;
            step += 1;
        }
        (p, dp)
    }
}
