//! Fixed example data: the planar outer-mean counterexample and regular simplices.

use crate::convex_bodies::Polytope;
use crate::error::{invalid, Result};
use crate::linalg::complement;
use crate::mean_ellipsoids::MeanPath;
use crate::{Matrix, Vector};
use std::fmt::Write;

/// An ellipse for display: center, half-lengths and rotation of the first axis.
#[derive(Debug, Clone)]
pub struct PlaneEllipse {
    pub label: String,
    pub center: [f64; 2],
    pub half_lengths: [f64; 2],
    pub angle: f64,
    pub stroke: &'static str,
    pub dash: Option<&'static str>,
}

pub const FIGURE1_ALPHAS: [f64; 2] = [2.0, 0.25];
pub const FIGURE1_C1: [f64; 2] = [1.4, 0.8];
pub const FIGURE1_X: [f64; 2] = [-0.6, 0.8];

/// Unit disk at the origin and `diag(2, 1/4)` at `(7/5, 4/5)`, with equal radii.
pub fn figure1_path() -> MeanPath {
    let c0 = Vector::zeros(2);
    let c1 = Vector::from_column_slice(&FIGURE1_C1);
    MeanPath::new(
        Matrix::identity(2, 2),
        FIGURE1_ALPHAS.to_vec(),
        [1.0, 1.0],
        [1.0, 1.0],
        [c0.clone(), c1.clone()],
        [c0, c1],
    )
    .expect("valid path")
}

/// The four ellipses of the counterexample at `λ = 1/2`.
pub fn figure1_ellipses() -> Vec<PlaneEllipse> {
    let lam = 0.5;
    let h = [FIGURE1_ALPHAS[0].powf(lam), FIGURE1_ALPHAS[1].powf(lam)];
    vec![
        PlaneEllipse { label: "E0 + c0".into(), center: [0.0, 0.0], half_lengths: [1.0, 1.0], angle: 0.0, stroke: "#1f4fd1", dash: Some("8 5") },
        PlaneEllipse { label: "E1 + c1".into(), center: FIGURE1_C1, half_lengths: FIGURE1_ALPHAS, angle: 0.0, stroke: "#c62828", dash: Some("2 4") },
        PlaneEllipse {
            label: "E_lambda + c_lambda".into(),
            center: [(1.0 - lam) * 0.0 + lam * FIGURE1_C1[0], lam * FIGURE1_C1[1]],
            half_lengths: h,
            angle: 0.0,
            stroke: "#7b1fa2",
            dash: None,
        },
        PlaneEllipse { label: "E_lambda + x".into(), center: FIGURE1_X, half_lengths: h, angle: 0.0, stroke: "#111111", dash: Some("10 4 2 4") },
    ]
}

/// SVG 1.1 drawing on a fixed 800x600 viewport, scaled to fit the ellipses.
pub fn svg(ellipses: &[PlaneEllipse], points: &[([f64; 2], &str)]) -> String {
    let (w, h, pad) = (800.0, 600.0, 40.0);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for e in ellipses {
        let (c, s) = (e.angle.cos(), e.angle.sin());
        let ext = [
            ((e.half_lengths[0] * c).powi(2) + (e.half_lengths[1] * s).powi(2)).sqrt(),
            ((e.half_lengths[0] * s).powi(2) + (e.half_lengths[1] * c).powi(2)).sqrt(),
        ];
        for i in 0..2 {
            lo[i] = lo[i].min(e.center[i] - ext[i]);
            hi[i] = hi[i].max(e.center[i] + ext[i]);
        }
    }
    for (p, _) in points {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let k = ((w - 2.0 * pad) / (hi[0] - lo[0]).max(1e-9)).min((h - 2.0 * pad) / (hi[1] - lo[1]).max(1e-9));
    let ox = pad + ((w - 2.0 * pad) - k * (hi[0] - lo[0])) / 2.0;
    let oy = pad + ((h - 2.0 * pad) - k * (hi[1] - lo[1])) / 2.0;
    let px = |x: f64| ox + k * (x - lo[0]);
    let py = |y: f64| h - (oy + k * (y - lo[1]));
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    for e in ellipses {
        let dash = e.dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let (cx, cy) = (px(e.center[0]), py(e.center[1]));
        let _ = writeln!(
            s,
            "<g data-label=\"{}\" data-center=\"{},{}\" data-axes=\"{},{}\">",
            e.label, e.center[0], e.center[1], e.half_lengths[0], e.half_lengths[1]
        );
        let _ = writeln!(
            s,
            "  <ellipse cx=\"{cx:.3}\" cy=\"{cy:.3}\" rx=\"{:.3}\" ry=\"{:.3}\" transform=\"rotate({:.6} {cx:.3} {cy:.3})\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
            k * e.half_lengths[0],
            k * e.half_lengths[1],
            -e.angle.to_degrees(),
            e.stroke
        );
        let _ = writeln!(s, "  <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"3\" fill=\"{}\"/>", e.stroke);
        let _ = writeln!(
            s,
            "  <text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"13\" fill=\"{}\">{} ({}, {})</text>",
            cx + 6.0,
            cy - 6.0,
            e.stroke,
            e.label,
            e.center[0],
            e.center[1]
        );
        let _ = writeln!(s, "</g>");
    }
    for (p, label) in points {
        let _ = writeln!(s, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"black\"/>", px(p[0]), py(p[1]));
        let _ = writeln!(
            s,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"13\">{label}</text>",
            px(p[0]) + 6.0,
            py(p[1]) + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn figure1_svg() -> String {
    svg(&figure1_ellipses(), &[])
}

/// Regular simplex centered at the origin with inradius 1 (circumradius `n`).
pub fn regular_simplex(n: usize) -> Result<Polytope> {
    if n == 0 || n > crate::MAX_DIM {
        return invalid("simplex dimension out of range");
    }
    let ones = Matrix::from_element(n + 1, 1, 1.0 / ((n + 1) as f64).sqrt());
    let basis = complement(&ones);
    let m = (n + 1) as f64;
    let pts: Vec<Vector> = (0..=n)
        .map(|i| {
            let mut e = Vector::from_element(n + 1, -1.0 / m);
            e[i] += 1.0;
            let v = basis.transpose() * e;
            let norm = v.norm();
            v * (n as f64 / norm)
        })
        .collect();
    Polytope::from_vertices(&pts)
}

/// The square `[-1, 1]^2`.
pub fn square() -> Polytope {
    let p = |x: f64, y: f64| Vector::from_column_slice(&[x, y]);
    Polytope::from_vertices(&[p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0)]).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_radii() {
        for n in 2..=4 {
            let s = regular_simplex(n).unwrap();
            for v in s.vertices() {
                assert!((v.norm() - n as f64).abs() < 1e-12);
            }
            for f in s.facets() {
                assert!((f.offset - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn figure_has_four_centers() {
        let s = figure1_svg();
        assert_eq!(s.matches("<ellipse").count(), 4);
        for c in ["data-center=\"0,0\"", "data-center=\"1.4,0.8\"", "data-center=\"0.7,0.4\"", "data-center=\"-0.6,0.8\""] {
            assert!(s.contains(c), "{c}");
        }
    }
}
