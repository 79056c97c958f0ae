//! Separation of two finite point sets relative to a linear subspace `U`.
//!
//! Either `conv(K) ∩ conv(L)` meets `U`, witnessed by two convex combinations,
//! or there are `a ∈ U` and `v, w ∈ U^⊥` with `<a + v, x> + margin <= <a + w, y>`
//! for every `x ∈ K`, `y ∈ L`.

use crate::error::{invalid, Error, Result};
use crate::linalg::{caratheodory, complement, orthonormalize};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::{Matrix, Vector};

/// Linear subspace given by an orthonormal basis (columns).
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Span of the given vectors (any spanning set; dependent vectors are dropped).
    pub fn span(ambient: usize, vectors: &[Vector]) -> Result<Subspace> {
        if vectors.iter().any(|v| v.len() != ambient) {
            return invalid("subspace vector dimension mismatch");
        }
        let basis = if vectors.is_empty() {
            Matrix::zeros(ambient, 0)
        } else {
            orthonormalize(&Matrix::from_columns(vectors), 1e-10)
        };
        Ok(Subspace { basis })
    }

    /// Span of the first `k` coordinate vectors.
    pub fn coordinate(ambient: usize, k: usize) -> Subspace {
        let basis = Matrix::from_fn(ambient, k, |i, j| if i == j { 1.0 } else { 0.0 });
        Subspace { basis }
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn project(&self, x: &Vector) -> Vector {
        &self.basis * (self.basis.transpose() * x)
    }
}

#[derive(Debug, Clone)]
pub enum Separation {
    Intersecting {
        point: Vector,
        k_weights: Vec<f64>,
        l_weights: Vec<f64>,
    },
    Separated {
        a: Vector,
        v: Vector,
        w: Vector,
        margin: f64,
    },
}

/// Largest support of a reduced witness: `2 (D + 1) - dim U`.
pub fn kirchberger_bound(ambient: usize, dim_u: usize) -> usize {
    2 * (ambient + 1) - dim_u
}

fn check_sets(k: &[Vector], l: &[Vector], u: &Subspace) -> Result<usize> {
    if k.is_empty() || l.is_empty() {
        return invalid("point sets must be nonempty");
    }
    let d = u.ambient();
    if k.iter().chain(l).any(|p| p.len() != d) {
        return invalid("point dimension differs from the subspace ambient dimension");
    }
    if k.iter().chain(l).any(|p| p.iter().any(|x| !x.is_finite())) {
        return invalid("non-finite coordinate");
    }
    Ok(d)
}

/// Decides whether `conv(K) ∩ conv(L) ∩ U` is empty.
pub fn separate(k: &[Vector], l: &[Vector], u: &Subspace) -> Result<Separation> {
    let d = check_sets(k, l, u)?;
    let scale = k.iter().chain(l).map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    let ks: Vec<Vector> = k.iter().map(|p| p / scale).collect();
    let ls: Vec<Vector> = l.iter().map(|p| p / scale).collect();
    let w = complement(u.basis());
    let nk = k.len();

    let lp = feasibility_program(&ks, &ls, &w, d);
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let k_weights = x[..nk].to_vec();
            let l_weights = x[nk..].to_vec();
            let point = k.iter().zip(&k_weights).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
            Ok(Separation::Intersecting { point, k_weights, l_weights })
        }
        LpOutcome::Infeasible { .. } => match separating_functional(k, l, &ks, &ls, u, &w)? {
            Some(s) => Ok(s),
            None => {
                // Touching within rounding: report the nearly common point.
                let mut found = None;
                for tol in TOUCH_TOLS {
                    if let Ok(c) = closest_combination(k, l, u, tol) {
                        found = Some(c);
                        break;
                    }
                }
                let Some((k_weights, l_weights, _)) = found else {
                    return Err(Error::Solver("sets neither meet nor separate within tolerance".into()));
                };
                let point = k.iter().zip(&k_weights).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
                Ok(Separation::Intersecting { point, k_weights, l_weights })
            }
        },
        other => Err(Error::Solver(format!("feasibility LP: {other:?}"))),
    }
}

/// Feasibility tolerances tried when the margin program finds no positive margin.
const TOUCH_TOLS: [f64; 3] = [1e-7, 1e-6, 1e-5];

/// Maximizes the separation margin over `(a, v, w)` with the l1 norm of their
/// coordinates (in the bases of `U` and `U^⊥`) bounded by one.
fn separating_functional(
    k: &[Vector],
    l: &[Vector],
    ks: &[Vector],
    ls: &[Vector],
    u: &Subspace,
    w: &Matrix,
) -> Result<Option<Separation>> {
    let du = u.dim();
    let dw = w.ncols();
    // Coordinates: alpha (du), beta (dw), gamma (dw), theta: each split +/-, then delta.
    let free = du + 2 * dw + 1;
    let nvar = 2 * free + 1;
    let delta = nvar - 1;
    let mut obj = vec![0.0; nvar];
    obj[delta] = 1.0;
    let mut lp = LinearProgram::maximize(obj);
    let ub: Vec<Vector> = ks.iter().map(|p| u.basis().transpose() * p).collect();
    let wb: Vec<Vector> = ks.iter().map(|p| w.transpose() * p).collect();
    let ul: Vec<Vector> = ls.iter().map(|p| u.basis().transpose() * p).collect();
    let wl: Vec<Vector> = ls.iter().map(|p| w.transpose() * p).collect();
    let put = |row: &mut Vec<f64>, idx: usize, val: f64| {
        row[idx] += val;
        row[free + idx] -= val;
    };
    let theta = du + 2 * dw;
    // <a, x> + <v, x> + delta - theta <= 0
    for i in 0..ks.len() {
        let mut row = vec![0.0; nvar];
        for j in 0..du {
            put(&mut row, j, ub[i][j]);
        }
        for j in 0..dw {
            put(&mut row, du + j, wb[i][j]);
        }
        put(&mut row, theta, -1.0);
        row[delta] = 1.0;
        lp.constrain(row, Relation::Le, 0.0);
    }
    // theta - <a, y> - <w, y> <= 0
    for i in 0..ls.len() {
        let mut row = vec![0.0; nvar];
        for j in 0..du {
            put(&mut row, j, -ul[i][j]);
        }
        for j in 0..dw {
            put(&mut row, du + dw + j, -wl[i][j]);
        }
        put(&mut row, theta, 1.0);
        lp.constrain(row, Relation::Le, 0.0);
    }
    let mut row = vec![0.0; nvar];
    for j in 0..theta {
        row[j] = 1.0;
        row[free + j] = 1.0;
    }
    lp.constrain(row, Relation::Le, 1.0);
    let x = match lp.solve() {
        LpOutcome::Optimal { x, .. } => x,
        other => return Err(Error::Solver(format!("margin LP: {other:?}"))),
    };
    let coord = |j: usize| x[j] - x[free + j];
    let alpha = Vector::from_fn(du, |j, _| coord(j));
    let beta = Vector::from_fn(dw, |j, _| coord(du + j));
    let gamma = Vector::from_fn(dw, |j, _| coord(du + dw + j));
    let a = u.basis() * alpha;
    let v = w * beta;
    let wv = w * gamma;
    let hi = k.iter().map(|p| (&a + &v).dot(p)).fold(f64::NEG_INFINITY, f64::max);
    let lo = l.iter().map(|p| (&a + &wv).dot(p)).fold(f64::INFINITY, f64::min);
    let margin = lo - hi;
    if !(margin > 0.0) {
        return Ok(None);
    }
    Ok(Some(Separation::Separated { a, v, w: wv, margin }))
}

/// Convex weights on `K` and `L` whose combinations meet in `U` up to the
/// relative residual `tol` (the smallest l1 residual the feasibility program
/// finds). Returns the weights and the largest residual coordinate.
pub fn closest_combination(k: &[Vector], l: &[Vector], u: &Subspace, tol: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let d = check_sets(k, l, u)?;
    let scale = k.iter().chain(l).map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    let ks: Vec<Vector> = k.iter().map(|p| p / scale).collect();
    let ls: Vec<Vector> = l.iter().map(|p| p / scale).collect();
    let w = complement(u.basis());
    let lp = feasibility_program(&ks, &ls, &w, d).feasibility_tolerance(tol);
    let nk = k.len();
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let (kw, lw) = least_squares_refit(&ks, &ls, &w, &normalized(&x[..nk]), &normalized(&x[nk..]));
            let pk = k.iter().zip(&kw).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
            let pl = l.iter().zip(&lw).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
            let res = (&pk - &pl).amax().max((w.transpose() * &pk).amax());
            Ok((kw, lw, res))
        }
        LpOutcome::Infeasible { residual } => Err(Error::Solver(format!(
            "no combination within tolerance (residual {:e})",
            residual * scale
        ))),
        other => Err(Error::Solver(format!("feasibility LP: {other:?}"))),
    }
}

/// Residual rows of the feasibility system for weights `x` over `K ∪ L`.
fn balance_residual(ks: &[Vector], ls: &[Vector], w: &Matrix, kw: &[f64], lw: &[f64]) -> f64 {
    let d = ks[0].len();
    let pk = ks.iter().zip(kw).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
    let pl = ls.iter().zip(lw).fold(Vector::zeros(d), |acc, (p, &t)| acc + p * t);
    ((&pk - &pl).norm_squared() + (w.transpose() * &pk).norm_squared()).sqrt()
}

/// Least-squares weights on the support of `(kw, lw)` with both sums fixed
/// to one. Kept only if they stay positive and lower the residual.
fn least_squares_refit(ks: &[Vector], ls: &[Vector], w: &Matrix, kw: &[f64], lw: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let d = ks[0].len();
    let sk: Vec<usize> = (0..kw.len()).filter(|&i| kw[i] > 0.0).collect();
    let sl: Vec<usize> = (0..lw.len()).filter(|&j| lw[j] > 0.0).collect();
    let m = sk.len() + sl.len();
    let rows = d + w.ncols();
    // Columns of the residual map restricted to the support.
    let a = Matrix::from_fn(rows, m, |r, c| {
        let (p, sign) = if c < sk.len() { (&ks[sk[c]], 1.0) } else { (&ls[sl[c - sk.len()]], -1.0) };
        if r < d {
            sign * p[r]
        } else if c < sk.len() {
            w.column(r - d).dot(p)
        } else {
            0.0
        }
    });
    let mut kkt = Matrix::zeros(m + 2, m + 2);
    kkt.view_mut((0, 0), (m, m)).copy_from(&(a.transpose() * &a));
    for c in 0..m {
        let side = if c < sk.len() { 0 } else { 1 };
        kkt[(m + side, c)] = 1.0;
        kkt[(c, m + side)] = 1.0;
    }
    let mut rhs = Vector::zeros(m + 2);
    rhs[m] = 1.0;
    rhs[m + 1] = 1.0;
    let Ok(sol) = kkt.svd(true, true).solve(&rhs, 1e-14) else {
        return (kw.to_vec(), lw.to_vec());
    };
    if (0..m).any(|c| !(sol[c] > 0.0)) {
        return (kw.to_vec(), lw.to_vec());
    }
    let mut nk = vec![0.0; kw.len()];
    let mut nl = vec![0.0; lw.len()];
    for (c, &i) in sk.iter().enumerate() {
        nk[i] = sol[c];
    }
    for (c, &j) in sl.iter().enumerate() {
        nl[j] = sol[sk.len() + c];
    }
    if balance_residual(ks, ls, w, &nk, &nl) < balance_residual(ks, ls, w, kw, lw) {
        (nk, nl)
    } else {
        (kw.to_vec(), lw.to_vec())
    }
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

fn feasibility_program(ks: &[Vector], ls: &[Vector], w: &Matrix, d: usize) -> LinearProgram {
    let (nk, nl) = (ks.len(), ls.len());
    let mut lp = LinearProgram::maximize(vec![0.0; nk + nl]);
    for i in 0..d {
        let mut row: Vec<f64> = ks.iter().map(|p| p[i]).collect();
        row.extend(ls.iter().map(|p| -p[i]));
        lp.constrain(row, Relation::Eq, 0.0);
    }
    for j in 0..w.ncols() {
        let col = w.column(j);
        let mut row: Vec<f64> = ks.iter().map(|p| col.dot(p)).collect();
        row.extend(std::iter::repeat(0.0).take(nl));
        lp.constrain(row, Relation::Eq, 0.0);
    }
    let mut row = vec![1.0; nk];
    row.extend(std::iter::repeat(0.0).take(nl));
    lp.constrain(row, Relation::Eq, 1.0);
    let mut row = vec![0.0; nk];
    row.extend(std::iter::repeat(1.0).take(nl));
    lp.constrain(row, Relation::Eq, 1.0);
    lp
}

fn support_size(w: &[f64]) -> usize {
    w.iter().filter(|&&x| x > 0.0).count()
}

/// Shrinks the support of an intersecting witness.
///
/// First each side is reduced by Carathéodory steps that keep the common point
/// fixed. If the support still exceeds `cap` (default: the Kirchberger bound),
/// null directions of the full feasibility system are followed, which may move
/// the common point inside `conv(K) ∩ conv(L) ∩ U`.
pub fn reduce_support(
    k: &[Vector],
    l: &[Vector],
    u: &Subspace,
    k_weights: &[f64],
    l_weights: &[f64],
    cap: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = check_sets(k, l, u)?;
    if k_weights.len() != k.len() || l_weights.len() != l.len() {
        return invalid("weight vector length mismatch");
    }
    let cap = cap.unwrap_or_else(|| kirchberger_bound(d, u.dim()));
    let scale = k.iter().chain(l).map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    let side = |pts: &[Vector], w: &[f64]| -> Vec<f64> {
        let cols = Matrix::from_fn(d + 1, pts.len(), |i, j| if i < d { pts[j][i] / scale } else { 1.0 });
        let mut w = w.to_vec();
        caratheodory(&cols, &mut w, 1e-10);
        w
    };
    let mut kw = side(k, k_weights);
    let mut lw = side(l, l_weights);
    if support_size(&kw) + support_size(&lw) > cap {
        let wc = complement(u.basis());
        let rows = d + wc.ncols() + 2;
        let (nk, nl) = (k.len(), l.len());
        let cols = Matrix::from_fn(rows, nk + nl, |i, j| {
            let (p, sign, is_k) = if j < nk { (&k[j], 1.0, true) } else { (&l[j - nk], -1.0, false) };
            if i < d {
                sign * p[i] / scale
            } else if i < d + wc.ncols() {
                if is_k {
                    wc.column(i - d).dot(p) / scale
                } else {
                    0.0
                }
            } else if i == d + wc.ncols() {
                if is_k { 1.0 } else { 0.0 }
            } else if is_k {
                0.0
            } else {
                1.0
            }
        });
        let mut all: Vec<f64> = kw.iter().chain(&lw).copied().collect();
        caratheodory(&cols, &mut all, 1e-10);
        kw = all[..nk].to_vec();
        lw = all[nk..].to_vec();
    }
    let s = support_size(&kw) + support_size(&lw);
    if s > cap {
        return Err(Error::ReductionInfeasible { support: s, cap });
    }
    let (sk, sl): (f64, f64) = (kw.iter().sum(), lw.iter().sum());
    Ok((kw.iter().map(|x| x / sk).collect(), lw.iter().map(|x| x / sl).collect()))
}

/// The tight instance in `R^n` with `U` spanned by the first `d` coordinates:
/// `K = {e_1..e_n, -(1/2n) sum e_i}`, `L = {-e_{d+1}..-e_n, (1/2n) sum e_i}`.
pub fn tight_instance(n: usize, d: usize) -> (Vec<Vector>, Vec<Vector>, Subspace) {
    let mut k: Vec<Vector> = (0..n).map(|i| Vector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    k.push(Vector::from_element(n, -1.0 / (2.0 * n as f64)));
    let mut l: Vec<Vector> = (d..n).map(|i| Vector::from_fn(n, |j, _| if i == j { -1.0 } else { 0.0 })).collect();
    l.push(Vector::from_element(n, 1.0 / (2.0 * n as f64)));
    (k, l, Subspace::coordinate(n, d))
}
