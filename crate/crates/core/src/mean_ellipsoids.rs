//! Geometric interpolation between the unit ball and an ellipsoid, and the
//! inner/outer mean chains built from it.
//!
//! For `E = {x : sum <x, v_i>^2 / α_i^2 <= 1}` the power `E_λ` has half-lengths
//! `α_i^λ` on the same axes. A path carries two chains in a frame where the
//! first ellipsoid is the ball:
//! `r_0 B + c_0`, `r_1 E + c_1` inside a body and the body inside
//! `R_0 B + d_0` and `R_1 E + d_1`.

use crate::convex_bodies::Ellipsoid;
use crate::error::{invalid, Error, Result};
use crate::linalg::orthonormalize;
use crate::{Matrix, Vector};

/// Relative tolerance for clustering half-lengths against a target.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Slack allowed when checking a weight against its window.
pub const WINDOW_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MeanPath {
    /// Orthonormal axes (columns) of the second ellipsoid.
    pub axes: Matrix,
    pub alphas: Vec<f64>,
    pub inner_radii: [f64; 2],
    pub outer_radii: [f64; 2],
    pub inner_centers: [Vector; 2],
    pub outer_centers: [Vector; 2],
}

#[derive(Debug, Clone)]
pub struct InnerMean {
    pub ellipsoid: Ellipsoid,
    pub radius: f64,
    /// Basis of the subspace that can carry contact normals.
    pub contact_subspace: Matrix,
}

#[derive(Debug, Clone)]
pub struct OuterMean {
    pub ellipsoid: Ellipsoid,
    pub radius: f64,
    pub mu: Vec<f64>,
    pub windows: Vec<(f64, f64)>,
    pub contact_subspace: Matrix,
    /// Contacts can exist only when the two outer centers agree.
    pub requires_equal_centers: bool,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return invalid(format!("lambda {lambda} outside [0, 1]"));
    }
    Ok(())
}

/// `E_λ` for an origin-centered ellipsoid given by axes and half-lengths.
pub fn power_interpolate(axes: &Matrix, alphas: &[f64], lambda: f64) -> Result<Ellipsoid> {
    check_lambda(lambda)?;
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return invalid("half-lengths must be positive");
    }
    let h: Vec<f64> = alphas.iter().map(|a| a.powf(lambda)).collect();
    Ellipsoid::from_axes(Vector::zeros(alphas.len()), axes, &h)
}

/// `[max(0, 1 - (1-λ) β^λ), min(1, λ β^(λ-1))]`.
pub fn mu_window(beta: f64, lambda: f64) -> (f64, f64) {
    let lo = (1.0 - (1.0 - lambda) * beta.powf(lambda)).max(0.0);
    let hi = if lambda == 0.0 { 0.0 } else { (lambda * beta.powf(lambda - 1.0)).min(1.0) };
    (lo, hi)
}

fn subspace_where(axes: &Matrix, alphas: &[f64], target: f64) -> Matrix {
    let cols: Vec<Vector> = alphas
        .iter()
        .enumerate()
        .filter(|(_, &a)| (a - target).abs() <= CLUSTER_TOL * target.max(a))
        .map(|(i, _)| axes.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        Matrix::zeros(axes.nrows(), 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

fn intersect_with_complement(basis: &Matrix, v: &Vector) -> Matrix {
    let n = basis.nrows();
    if basis.ncols() == 0 || v.norm() == 0.0 {
        return basis.clone();
    }
    // Span of the projections of `basis` columns orthogonal to the component of v in span(basis).
    let coef = basis.transpose() * v;
    if coef.norm() <= 1e-14 * v.norm() {
        return basis.clone();
    }
    let dir = basis * &coef;
    let dir = &dir / dir.norm();
    let cols: Vec<Vector> = (0..basis.ncols())
        .map(|j| {
            let c = basis.column(j).into_owned();
            let p = dir.dot(&c);
            c - &dir * p
        })
        .collect();
    let m = Matrix::from_columns(&cols);
    let o = orthonormalize(&m, 1e-10);
    if o.ncols() == 0 {
        Matrix::zeros(n, 0)
    } else {
        o
    }
}

impl MeanPath {
    pub fn new(
        axes: Matrix,
        alphas: Vec<f64>,
        inner_radii: [f64; 2],
        outer_radii: [f64; 2],
        inner_centers: [Vector; 2],
        outer_centers: [Vector; 2],
    ) -> Result<MeanPath> {
        let n = alphas.len();
        if axes.nrows() != n || axes.ncols() != n {
            return invalid("axes must be a square matrix matching the half-lengths");
        }
        if (axes.transpose() * &axes - Matrix::identity(n, n)).norm() > 1e-9 {
            return invalid("axes must be orthonormal");
        }
        if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return invalid("half-lengths must be positive");
        }
        if inner_radii.iter().chain(&outer_radii).any(|&r| !(r > 0.0) || !r.is_finite()) {
            return invalid("radii must be positive");
        }
        if inner_centers.iter().chain(&outer_centers).any(|c| c.len() != n) {
            return invalid("center dimension mismatch");
        }
        Ok(MeanPath { axes, alphas, inner_radii, outer_radii, inner_centers, outer_centers })
    }

    /// Path from an ellipsoid (origin-centered shape) with unit radii and the given centers.
    pub fn from_ellipsoid(e: &Ellipsoid, inner_centers: [Vector; 2], outer_centers: [Vector; 2]) -> Result<MeanPath> {
        MeanPath::new(e.axes().clone(), e.half_lengths().to_vec(), [1.0, 1.0], [1.0, 1.0], inner_centers, outer_centers)
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// Coordinates of `x` along the axes.
    fn coords(&self, x: &Vector) -> Vector {
        self.axes.transpose() * x
    }
}

/// `r_λ E_λ + c_λ`, contained in the Minkowski combination
/// `(1-λ)(r_0 B + c_0) + λ(r_1 E + c_1)`.
pub fn inner_mean(path: &MeanPath, lambda: f64) -> Result<InnerMean> {
    check_lambda(lambda)?;
    let [r0, r1] = path.inner_radii;
    let radius = r0.powf(1.0 - lambda) * r1.powf(lambda);
    let h: Vec<f64> = path.alphas.iter().map(|a| radius * a.powf(lambda)).collect();
    let c = &path.inner_centers[0] * (1.0 - lambda) + &path.inner_centers[1] * lambda;
    let ellipsoid = Ellipsoid::from_axes(c, &path.axes, &h)?;
    let v = subspace_where(&path.axes, &path.alphas, r0 / r1);
    let contact_subspace = intersect_with_complement(&v, &(&path.inner_centers[0] - &path.inner_centers[1]));
    Ok(InnerMean { ellipsoid, radius, contact_subspace })
}

/// `R_λ E_λ + d_λ`, containing `(R_0 B + d_0) ∩ (R_1 E + d_1)`. `mu` picks one
/// weight per axis inside its window; the default is the window midpoint.
pub fn outer_mean(path: &MeanPath, lambda: f64, mu: Option<&[f64]>) -> Result<OuterMean> {
    check_lambda(lambda)?;
    let n = path.dim();
    let [big_r0, big_r1] = path.outer_radii;
    let radius = big_r0.powf(1.0 - lambda) * big_r1.powf(lambda);
    let betas: Vec<f64> = path.alphas.iter().map(|a| a * big_r1 / big_r0).collect();
    let windows: Vec<(f64, f64)> = betas.iter().map(|&b| mu_window(b, lambda)).collect();
    let mu: Vec<f64> = match mu {
        None => windows.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
        Some(m) => {
            if m.len() != n {
                return invalid("mu length differs from the dimension");
            }
            for (i, (&x, &(lo, hi))) in m.iter().zip(&windows).enumerate() {
                if !(x >= lo - WINDOW_TOL && x <= hi + WINDOW_TOL) {
                    return Err(Error::OutsideWindow { index: i, mu: x, lo, hi });
                }
            }
            m.to_vec()
        }
    };
    let d0 = path.coords(&path.outer_centers[0]);
    let d1 = path.coords(&path.outer_centers[1]);
    let dl = Vector::from_fn(n, |i, _| (1.0 - mu[i]) * d0[i] + mu[i] * d1[i]);
    let center = &path.axes * dl;
    let h: Vec<f64> = path.alphas.iter().map(|a| radius * a.powf(lambda)).collect();
    let ellipsoid = Ellipsoid::from_axes(center, &path.axes, &h)?;
    let contact_subspace = subspace_where(&path.axes, &path.alphas, big_r0 / big_r1);
    let requires_equal_centers = lambda > 0.0 && lambda < 1.0;
    Ok(OuterMean { ellipsoid, radius, mu, windows, contact_subspace, requires_equal_centers })
}

/// Both means at one `λ`; the ratio is `(R_0/r_0)^(1-λ) (R_1/r_1)^λ`.
pub fn simultaneous_mean(path: &MeanPath, lambda: f64, mu: Option<&[f64]>) -> Result<(InnerMean, OuterMean, f64)> {
    let inner = inner_mean(path, lambda)?;
    let outer = outer_mean(path, lambda, mu)?;
    let ratio = outer.radius / inner.radius;
    Ok((inner, outer, ratio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub equality_expected: bool,
}

/// `((1-μ)x + μy)^2 / α^(2λ) <= (1-λ)x^2 + λ y^2/α^2` for `μ` in its window.
pub fn scalar_inequality_check(alpha: f64, lambda: f64, mu: f64, x: f64, y: f64) -> Result<ScalarCheck> {
    check_lambda(lambda)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return invalid("alpha must be positive");
    }
    if !x.is_finite() || !y.is_finite() {
        return invalid("x and y must be finite");
    }
    let (lo, hi) = mu_window(alpha, lambda);
    if !(mu >= lo - WINDOW_TOL && mu <= hi + WINDOW_TOL) {
        return Err(Error::OutsideWindow { index: 0, mu, lo, hi });
    }
    let m = (1.0 - mu) * x + mu * y;
    let lhs = m * m / alpha.powf(2.0 * lambda);
    let rhs = (1.0 - lambda) * x * x + lambda * y * y / (alpha * alpha);
    let equality_expected = lambda == 0.0 || lambda == 1.0 || (alpha == 1.0 && x == y) || (x == 0.0 && y == 0.0);
    Ok(ScalarCheck { lhs, rhs, equality_expected })
}
