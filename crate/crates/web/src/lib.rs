//! Browser bindings. Each operation takes and returns JSON strings so the page
//! needs no generated types; the plain functions are also callable natively.

use bmchain::demos::{figure1_path, FIGURE1_X};
use bmchain::io;
use bmchain::mean_ellipsoids::{outer_mean, MeanPath};
use bmchain::optimizer::{solve_distance_to_ball, SolveOptions};
use bmchain::separation::{separate, Separation, Subspace};
use bmchain::{Body, Ellipsoid, Error, Polytope, Vector};
use serde_json::json;
use wasm_bindgen::prelude::*;

const OUTLINE_POINTS: usize = 120;

fn outline(e: &Ellipsoid, scale: f64, shift: &Vector) -> Vec<[f64; 2]> {
    let c = e.center();
    (0..OUTLINE_POINTS)
        .map(|k| {
            let t = k as f64 * std::f64::consts::TAU / OUTLINE_POINTS as f64;
            let p = (e.support_point(&Vector::from_vec(vec![t.cos(), t.sin()])) - c) * scale + c + shift;
            [p[0], p[1]]
        })
        .collect()
}

fn xy(v: &Vector) -> [f64; 2] {
    [v[0], v[1]]
}

fn msg(e: Error) -> String {
    e.to_string()
}

fn points(text: &str, what: &str) -> Result<Vec<Vector>, String> {
    let rows: Vec<Vec<f64>> = io::parse(text).map_err(msg)?;
    let pts = io::points_from_json(&rows, what).map_err(msg)?;
    if pts[0].len() != 2 {
        return Err(format!("{what}: the page works in the plane"));
    }
    Ok(pts)
}

/// Distance of a planar polygon to the ball, with outlines of both ellipses and the contact points.
pub fn solve_polygon_json(vertices: &str) -> Result<String, String> {
    let pts = points(vertices, "vertices")?;
    let body = Body::Polytope(Polytope::from_vertices(&pts).map_err(msg)?);
    let res = solve_distance_to_ball(&body, &SolveOptions::default()).map_err(msg)?;
    let ch = &res.chain;
    let Body::Ellipsoid(e) = &ch.inner else { return Err("expected an ellipsoid chain".into()) };
    let hull = match &ch.middle {
        Body::Polytope(p) => p.vertices().iter().map(xy).collect::<Vec<_>>(),
        Body::Ellipsoid(_) => Vec::new(),
    };
    let contacts = |outer: bool| -> Vec<[f64; 2]> {
        res.certificate
            .as_ref()
            .map(|c| if outer { &c.outer } else { &c.inner }.iter().map(|p| xy(&p.y)).collect())
            .unwrap_or_default()
    };
    let v = json!({
        "status": res.status.as_str(),
        "ratio": res.ratio,
        "r": ch.r,
        "R": ch.big_r,
        "hull": hull,
        "inner": outline(e, ch.r, &ch.c),
        "outer": outline(e, ch.big_r, &ch.d),
        "inner_contacts": contacts(false),
        "outer_contacts": contacts(true),
        "verified": res.report.as_ref().map(|r| r.passed),
        "iterations": res.iterations,
    });
    Ok(v.to_string())
}

fn endpoint(path: &MeanPath, which: usize) -> Result<Ellipsoid, String> {
    let r = path.outer_radii[which];
    let h: Vec<f64> = path.alphas.iter().map(|a| if which == 0 { r } else { r * a }).collect();
    Ellipsoid::from_axes(path.outer_centers[which].clone(), &path.axes, &h).map_err(msg)
}

/// Outer mean along the built-in planar path for one choice of axis weights.
pub fn outer_mean_json(lambda: f64, mu0: f64, mu1: f64) -> Result<String, String> {
    let path = figure1_path();
    let windows = outer_mean(&path, lambda, None).map_err(msg)?.windows;
    let x = Vector::from_vec(FIGURE1_X.to_vec());
    let zero = Vector::zeros(2);
    let mean = outer_mean(&path, lambda, Some(&[mu0, mu1]));
    let (mean_outline, contains) = match &mean {
        Ok(m) => (outline(&m.ellipsoid, 1.0, &zero), Some(m.ellipsoid.quadratic(&x) <= 1.0)),
        Err(_) => (Vec::new(), None),
    };
    let v = json!({
        "lambda": lambda,
        "mu": [mu0, mu1],
        "windows": windows.iter().map(|(lo, hi)| [*lo, *hi]).collect::<Vec<_>>(),
        "start": outline(&endpoint(&path, 0)?, 1.0, &zero),
        "end": outline(&endpoint(&path, 1)?, 1.0, &zero),
        "mean": mean_outline,
        "error": mean.err().map(|e| e.to_string()),
        "x": FIGURE1_X,
        "contains_x": contains,
    });
    Ok(v.to_string())
}

/// Whether two planar point sets meet in the line through the origin at `angle`.
pub fn separate_json(k: &str, l: &str, angle: f64) -> Result<String, String> {
    let kp = points(k, "K")?;
    let lp = points(l, "L")?;
    let u = Subspace::span(2, &[Vector::from_vec(vec![angle.cos(), angle.sin()])]).map_err(msg)?;
    let v = match separate(&kp, &lp, &u).map_err(msg)? {
        Separation::Intersecting { point, k_weights, l_weights } => json!({
            "verdict": "intersecting",
            "point": xy(&point),
            "k_weights": k_weights,
            "l_weights": l_weights,
        }),
        Separation::Separated { a, v, w, margin } => json!({
            "verdict": "separated",
            "a": xy(&a),
            "v": xy(&v),
            "w": xy(&w),
            "margin": margin,
        }),
    };
    Ok(v.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = solvePolygon)]
pub fn solve_polygon(vertices: &str) -> Result<String, JsValue> {
    js(solve_polygon_json(vertices))
}

#[wasm_bindgen(js_name = outerMean)]
pub fn outer_mean_demo(lambda: f64, mu0: f64, mu1: f64) -> Result<String, JsValue> {
    js(outer_mean_json(lambda, mu0, mu1))
}

#[wasm_bindgen(js_name = separatePoints)]
pub fn separate_points(k: &str, l: &str, angle: f64) -> Result<String, JsValue> {
    js(separate_json(k, l, angle))
}
