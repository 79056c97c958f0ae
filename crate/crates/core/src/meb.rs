//! Minimum enclosing ball by Welzl's move-to-front recursion.

use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &Vector, scale: f64) -> bool {
        (p - &self.center).norm() <= self.radius + 1e-12 * scale
    }
}

/// Smallest ball with every support point on its boundary, centered in their
/// affine hull.
fn circumball(support: &[Vector], dim: usize) -> Ball {
    match support.len() {
        0 => Ball { center: Vector::zeros(dim), radius: -1.0 },
        1 => Ball { center: support[0].clone(), radius: 0.0 },
        k => {
            let s0 = &support[0];
            let q: Vec<Vector> = support[1..].iter().map(|s| s - s0).collect();
            let g = Matrix::from_fn(k - 1, k - 1, |i, j| 2.0 * q[i].dot(&q[j]));
            let rhs = Vector::from_fn(k - 1, |i, _| q[i].norm_squared());
            let x = g
                .clone()
                .lu()
                .solve(&rhs)
                .unwrap_or_else(|| g.svd(true, true).solve(&rhs, 1e-14).expect("svd solve"));
            let mut c = s0.clone();
            for (i, qi) in q.iter().enumerate() {
                c += qi * x[i];
            }
            let r = support.iter().map(|s| (s - &c).norm()).fold(0.0, f64::max);
            Ball { center: c, radius: r }
        }
    }
}

fn mtf(points: &mut Vec<Vector>, end: usize, support: &mut Vec<Vector>, dim: usize, scale: f64) -> Ball {
    let mut ball = circumball(support, dim);
    if support.len() == dim + 1 {
        return ball;
    }
    let mut i = 0;
    while i < end {
        if !ball.contains(&points[i], scale) {
            support.push(points[i].clone());
            ball = mtf(points, i, support, dim, scale);
            support.pop();
            let p = points.remove(i);
            points.insert(0, p);
        }
        i += 1;
    }
    ball
}

/// Minimum enclosing ball of a nonempty point set.
pub fn min_enclosing_ball(points: &[Vector]) -> Ball {
    assert!(!points.is_empty(), "empty point set");
    let dim = points[0].len();
    let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
    // Farthest-first order from the centroid tends to keep recursion shallow.
    let centroid = points.iter().fold(Vector::zeros(dim), |a, p| a + p) / points.len() as f64;
    let mut pts: Vec<Vector> = points.to_vec();
    pts.sort_by(|a, b| {
        let da = (a - &centroid).norm();
        let db = (b - &centroid).norm();
        db.partial_cmp(&da).unwrap()
    });
    let n = pts.len();
    let mut support = Vec::new();
    let mut ball = mtf(&mut pts, n, &mut support, dim, scale);
    // Guard against roundoff: the radius covers every point.
    ball.radius = points.iter().map(|p| (p - &ball.center).norm()).fold(ball.radius, f64::max);
    ball
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn square_ball() {
        let pts: Vec<Vector> = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [0.2, 0.3]]
            .iter()
            .map(|p| vector(p))
            .collect();
        let b = min_enclosing_ball(&pts);
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-12);
        assert!(b.center.norm() < 1e-12);
    }

    #[test]
    fn obtuse_triangle_uses_long_side() {
        let pts: Vec<Vector> = [[-1.0, 0.0], [1.0, 0.0], [0.0, 0.2]].iter().map(|p| vector(p)).collect();
        let b = min_enclosing_ball(&pts);
        assert!((b.radius - 1.0).abs() < 1e-12);
    }
}
