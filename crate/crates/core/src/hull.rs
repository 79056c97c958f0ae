//! Double description method for pointed polyhedral cones.
//!
//! `cone_rays` turns `{x : A x >= 0}` into its extreme rays. Both polytope
//! conversions go through it: facets of `conv(V)` are the extreme rays of the
//! cone dual to `cone{(1, v)}`, vertices of `{x : A x <= b}` are the extreme
//! rays of the homogenized cone with positive first coordinate.

use crate::error::{Error, Result};

#[derive(Clone)]
struct Ray {
    x: Vec<f64>,
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1u64 << (i % 64);
}

fn subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        for v in x.iter_mut() {
            *v /= n;
        }
    }
}

/// Extreme rays (unit length) of the pointed cone `{x in R^d : a_i . x >= 0}`.
pub fn cone_rays(rows: &[Vec<f64>], d: usize) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = rows.to_vec();
    for r in rows.iter_mut() {
        normalize(r);
    }
    let m = rows.len();
    let words = m.div_ceil(64).max(1);
    let eps = 1e-10;

    // Greedy choice of d independent rows for the starting simplicial cone.
    let mut chosen: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for q in &ortho {
            let p = dot(q, &v);
            for k in 0..d {
                v[k] -= p * q[k];
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-8 {
            for x in v.iter_mut() {
                *x /= nv;
            }
            ortho.push(v);
            chosen.push(i);
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return Err(Error::Unbounded("cone has a lineality space".into()));
    }
    let a0 = nalgebra::DMatrix::from_fn(d, d, |i, j| rows[chosen[i]][j]);
    let inv = a0
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular starting basis".into()))?;
    let mut rays: Vec<Ray> = (0..d)
        .map(|j| {
            let mut x: Vec<f64> = inv.column(j).iter().copied().collect();
            normalize(&mut x);
            let mut zeros = vec![0u64; words];
            for (k, &ci) in chosen.iter().enumerate() {
                if k != j {
                    set_bit(&mut zeros, ci);
                }
            }
            Ray { x, zeros }
        })
        .collect();

    let mut done = vec![false; m];
    for &c in &chosen {
        done[c] = true;
    }
    for k in 0..m {
        if done[k] {
            continue;
        }
        done[k] = true;
        let a = &rows[k];
        let vals: Vec<f64> = rays.iter().map(|r| dot(a, &r.x)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > eps).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -eps).collect();
        if neg.is_empty() {
            for i in 0..rays.len() {
                if vals[i].abs() <= eps {
                    set_bit(&mut rays[i].zeros, k);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common: Vec<u64> = rays[p].zeros.iter().zip(&rays[q].zeros).map(|(x, y)| x & y).collect();
                if popcount(&common) + 2 < d {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|r| r == p || r == q || !subset(&common, &rays[r].zeros));
                if !adjacent {
                    continue;
                }
                let (vp, vq) = (vals[p], vals[q]);
                let mut x: Vec<f64> = rays[q].x.iter().zip(&rays[p].x).map(|(xq, xp)| vp * xq - vq * xp).collect();
                normalize(&mut x);
                let mut zeros = common;
                set_bit(&mut zeros, k);
                next.push(Ray { x, zeros });
            }
        }
        for i in 0..rays.len() {
            if vals[i] > eps {
                next.push(rays[i].clone());
            } else if vals[i].abs() <= eps {
                let mut r = rays[i].clone();
                set_bit(&mut r.zeros, k);
                next.push(r);
            }
        }
        rays = next;
    }
    // Deduplicate.
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rays {
        if !out.iter().any(|o| o.iter().zip(&r.x).all(|(a, b)| (a - b).abs() < 1e-9)) {
            out.push(r.x);
        }
    }
    Ok(out)
}
