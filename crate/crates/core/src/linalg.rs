//! Small dense helpers on top of nalgebra.

use crate::{Matrix, Vector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn matrix_rows(rows: &[Vec<f64>]) -> Matrix {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    Matrix::from_fn(m, n, |i, j| rows[i][j])
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Numerical rank by SVD with a relative cutoff.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Orthonormal basis (as columns) of the span of the given columns.
pub fn orthonormalize(m: &Matrix, rel_tol: f64) -> Matrix {
    let dim = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
    let mut cols: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > rel_tol * scale {
            cols.push(v / nv);
        }
    }
    if cols.is_empty() {
        Matrix::zeros(dim, 0)
    } else {
        Matrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the orthogonal complement of an orthonormal basis.
pub fn complement(basis: &Matrix) -> Matrix {
    let dim = basis.nrows();
    let mut cols: Vec<Vector> = (0..basis.ncols()).map(|j| basis.column(j).into_owned()).collect();
    let k = cols.len();
    let mut out = Vec::new();
    for i in 0..dim {
        if cols.len() == dim {
            break;
        }
        let mut v = Vector::zeros(dim);
        v[i] = 1.0;
        for _ in 0..2 {
            for q in &cols {
                let p = q.dot(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            let q = v / nv;
            cols.push(q.clone());
            out.push(q);
        }
    }
    debug_assert_eq!(out.len(), dim - k);
    if out.is_empty() {
        Matrix::zeros(dim, 0)
    } else {
        Matrix::from_columns(&out)
    }
}

/// A unit vector in the null space of `m`, if the columns are dependent.
pub fn null_vector(m: &Matrix, rel_tol: f64) -> Option<Vector> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return None;
    }
    let padded = if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sv = &svd.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let (idx, &smin) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if max == 0.0 || smin <= rel_tol * max {
        Some(v_t.row(idx).transpose().into_owned())
    } else {
        None
    }
}

/// Carathéodory reduction: moves nonnegative `weights` along null directions of
/// the selected columns until the supporting columns are independent. The
/// product `columns * weights` is preserved.
pub fn caratheodory(columns: &Matrix, weights: &mut [f64], rel_tol: f64) {
    for w in weights.iter_mut() {
        if *w < 0.0 {
            *w = 0.0;
        }
    }
    loop {
        let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        if support.is_empty() {
            return;
        }
        let sub = Matrix::from_columns(&support.iter().map(|&i| columns.column(i)).collect::<Vec<_>>());
        let Some(mut z) = null_vector(&sub, rel_tol) else { return };
        if !z.iter().any(|&x| x > 0.0) {
            z = -z;
        }
        let mut best = f64::INFINITY;
        let mut hit = usize::MAX;
        for (k, &i) in support.iter().enumerate() {
            if z[k] > 1e-14 {
                let t = weights[i] / z[k];
                if t < best {
                    best = t;
                    hit = k;
                }
            }
        }
        if hit == usize::MAX {
            return;
        }
        for (k, &i) in support.iter().enumerate() {
            weights[i] -= best * z[k];
            if weights[i] < 1e-15 {
                weights[i] = 0.0;
            }
        }
        weights[support[hit]] = 0.0;
    }
}

/// Isometric coordinates of a symmetric matrix: diagonal, then sqrt(2) times
/// the strict upper triangle.
pub fn vech(s: &Matrix) -> Vec<f64> {
    let n = s.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        out.push(s[(i, i)]);
    }
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            out.push(r2 * 0.5 * (s[(i, j)] + s[(j, i)]));
        }
    }
    out
}

pub fn unvech(x: &[f64], n: usize) -> Matrix {
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = x[i];
    }
    let mut k = n;
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            s[(i, j)] = x[k] / r2;
            s[(j, i)] = x[k] / r2;
            k += 1;
        }
    }
    s
}

/// Row-major flattening.
pub fn flatten(m: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn unflatten(x: &[f64], rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| x[i * cols + j])
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub fn sorted_eigen(s: &Matrix) -> (Vec<f64>, Matrix) {
    let n = s.nrows();
    let eig = symmetrize(s).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = Matrix::from_columns(&idx.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (vals, vecs)
}

pub fn sym_power(s: &Matrix, p: f64) -> Matrix {
    let (vals, vecs) = sorted_eigen(s);
    let d = Matrix::from_diagonal(&Vector::from_iterator(vals.len(), vals.iter().map(|v| v.max(0.0).powf(p))));
    &vecs * d * vecs.transpose()
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let g = gaussian_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vech_is_isometric() {
        let a = matrix_rows(&[vec![1.0, 2.0], vec![2.0, -3.0]]);
        let b = matrix_rows(&[vec![0.5, -1.0], vec![-1.0, 4.0]]);
        let fro = a.component_mul(&b).sum();
        let dot: f64 = vech(&a).iter().zip(vech(&b)).map(|(x, y)| x * y).sum();
        assert!((fro - dot).abs() < 1e-12);
        assert!((unvech(&vech(&a), 2) - a).norm() < 1e-12);
    }

    #[test]
    fn caratheodory_keeps_product() {
        let cols = matrix_rows(&[vec![1.0, 0.0, 1.0, 2.0], vec![0.0, 1.0, 1.0, 1.0]]);
        let mut w = vec![0.25; 4];
        let before = &cols * Vector::from_column_slice(&w);
        caratheodory(&cols, &mut w, 1e-10);
        let after = &cols * Vector::from_column_slice(&w);
        assert!((before - after).norm() < 1e-12);
        assert!(w.iter().filter(|&&x| x > 0.0).count() <= 2);
        assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn complement_spans_the_rest() {
        let b = orthonormalize(&matrix_rows(&[vec![1.0], vec![1.0], vec![0.0]]), 1e-12);
        let c = complement(&b);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * &c).norm() < 1e-12);
    }
}
