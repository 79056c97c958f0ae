#![allow(dead_code)]

use bmchain::{Body, Polytope, Vector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn gaussian_points(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vector> {
    (0..m).map(|_| Vector::from_fn(n, |_, _| StandardNormal.sample(rng))).collect()
}

/// Hull of `m` Gaussian points, retried until full-dimensional.
pub fn random_polytope(rng: &mut ChaCha8Rng, n: usize, symmetric: bool) -> Polytope {
    loop {
        let m = rng.gen_range(n + 1..=3 * n + 6);
        let mut pts = gaussian_points(rng, n, m);
        if symmetric {
            let neg: Vec<Vector> = pts.iter().map(|p| -p).collect();
            pts.extend(neg);
        }
        if let Ok(p) = Polytope::from_vertices(&pts) {
            return p;
        }
    }
}

pub fn random_body(rng: &mut ChaCha8Rng, n: usize, symmetric: bool) -> Body {
    Body::Polytope(random_polytope(rng, n, symmetric))
}

// Planar brute force, written without the library's solvers.

type P2 = [f64; 2];

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Largest `r` with `c + r E` inside `{x : <a_i, x> <= b_i}` where `E` has
/// support `h_i` in direction `a_i`. Enumerates all vertex triples of the LP.
pub fn inscribed_radius(a: &[P2], b: &[f64], h: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let m = a.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let rows = [[a[i][0], a[i][1], h[i]], [a[j][0], a[j][1], h[j]], [a[k][0], a[k][1], h[k]]];
                let Some(x) = solve3(rows, [b[i], b[j], b[k]]) else { continue };
                let ok = (0..m).all(|q| a[q][0] * x[0] + a[q][1] * x[1] + h[q] * x[2] <= b[q] + 1e-12);
                if ok && x[2] > best {
                    best = x[2];
                }
            }
        }
    }
    best
}

/// Radius of the smallest disk containing the points, by checking every
/// pair and triple.
pub fn enclosing_radius(p: &[P2]) -> f64 {
    let dist = |a: P2, b: P2| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let covers = |c: P2, r: f64| p.iter().all(|&q| dist(q, c) <= r * (1.0 + 1e-12) + 1e-12);
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let c = [(p[i][0] + p[j][0]) / 2.0, (p[i][1] + p[j][1]) / 2.0];
            let r = dist(p[i], p[j]) / 2.0;
            if r < best && covers(c, r) {
                best = r;
            }
            for k in j + 1..p.len() {
                let (ax, ay, bx, by, cx, cy) = (p[i][0], p[i][1], p[j][0], p[j][1], p[k][0], p[k][1]);
                let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
                if d.abs() < 1e-14 {
                    continue;
                }
                let s = |x: f64, y: f64| x * x + y * y;
                let ux = (s(ax, ay) * (by - cy) + s(bx, by) * (cy - ay) + s(cx, cy) * (ay - by)) / d;
                let uy = (s(ax, ay) * (cx - bx) + s(bx, by) * (ax - cx) + s(cx, cy) * (bx - ax)) / d;
                let c = [ux, uy];
                let r = dist(c, p[i]);
                if r < best && covers(c, r) {
                    best = r;
                }
            }
        }
    }
    best
}

/// Linear map `rot(theta) diag(1, rho)` and its inverse.
fn frame(theta: f64, rho: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let (c, s) = (theta.cos(), theta.sin());
    let m = [[c, -s * rho], [s, c * rho]];
    let inv = [[c, s], [-s / rho, c / rho]];
    (m, inv)
}

fn apply(m: &[[f64; 2]; 2], x: P2) -> P2 {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

fn apply_t(m: &[[f64; 2]; 2], x: P2) -> P2 {
    [m[0][0] * x[0] + m[1][0] * x[1], m[0][1] * x[0] + m[1][1] * x[1]]
}

fn grid(steps: usize) -> impl Iterator<Item = (f64, f64)> {
    // rho on a log grid through 1, theta over a half turn.
    (0..steps).flat_map(move |i| {
        let theta = std::f64::consts::PI * i as f64 / steps as f64;
        (0..steps).map(move |j| {
            let e = -1.0 + 2.0 * j as f64 / (steps - 2) as f64;
            (theta, 4f64.powf(e))
        })
    })
}

/// Minimum of `R / r` over ellipses `E = rot(theta) diag(1, rho) B` on a
/// `steps x steps` grid, for the polygon with the given vertices and facets.
pub fn ellipse_ratio_oracle(vertices: &[P2], normals: &[P2], offsets: &[f64], steps: usize) -> f64 {
    grid(steps)
        .map(|(theta, rho)| {
            let (m, inv) = frame(theta, rho);
            let h: Vec<f64> = normals
                .iter()
                .map(|a| {
                    let t = apply_t(&m, *a);
                    (t[0] * t[0] + t[1] * t[1]).sqrt()
                })
                .collect();
            let r = inscribed_radius(normals, offsets, &h);
            let pulled: Vec<P2> = vertices.iter().map(|x| apply(&inv, *x)).collect();
            enclosing_radius(&pulled) / r
        })
        .fold(f64::INFINITY, f64::min)
}

/// Minimum over the same grid of diameter over inradius for a polygon
/// mapped by `rot(theta) diag(1, rho)`, both measured with the Euclidean norm.
pub fn diameter_inradius_oracle(vertices: &[P2], normals: &[P2], offsets: &[f64], steps: usize) -> f64 {
    grid(steps)
        .map(|(theta, rho)| {
            let (m, inv) = frame(theta, rho);
            let pts: Vec<P2> = vertices.iter().map(|x| apply(&m, *x)).collect();
            let mut diam = 0.0f64;
            for p in &pts {
                for q in &pts {
                    diam = diam.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                }
            }
            // Facets of the image: <inv^T a, x> <= b.
            let an: Vec<P2> = normals.iter().map(|a| apply_t(&inv, *a)).collect();
            let h: Vec<f64> = an.iter().map(|a| (a[0] * a[0] + a[1] * a[1]).sqrt()).collect();
            diam / inscribed_radius(&an, offsets, &h)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn polygon_data(p: &Polytope) -> (Vec<P2>, Vec<P2>, Vec<f64>) {
    let verts = p.vertices().iter().map(|x| [x[0], x[1]]).collect();
    let normals = p.facets().iter().map(|f| [f.normal[0], f.normal[1]]).collect();
    let offsets = p.facets().iter().map(|f| f.offset).collect();
    (verts, normals, offsets)
}
