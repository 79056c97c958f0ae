//! JSON schemas for bodies, chains, certificates and mean paths, and a
//! deterministic writer (sorted keys, 17 significant digits).

use crate::certificates::{Certificate, Chain, VerifyReport, WeightedPair};
use crate::convex_bodies::{Body, Ellipsoid, Polytope};
use crate::error::{Error, Result};
use crate::mean_ellipsoids::MeanPath;
use crate::separation::Subspace;
use crate::{Matrix, Vector, MAX_DIM};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FacetJson {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Polytope,
    Ellipsoid,
}

/// `{"type":"polytope","vertices":[...]}`, `{"type":"polytope","facets":[...]}`
/// or `{"type":"ellipsoid","center":[...],"shape":[[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyJson {
    #[serde(rename = "type")]
    pub kind: BodyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<FacetJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJson {
    pub inner: BodyJson,
    pub r: f64,
    pub c: Vec<f64>,
    pub middle: BodyJson,
    pub outer: BodyJson,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairJson {
    pub y: Vec<f64>,
    pub a: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub inner: Vec<PairJson>,
    pub outer: Vec<PairJson>,
    #[serde(default)]
    pub chain_ref: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanPathJson {
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    pub shape: Vec<Vec<f64>>,
    pub radii_inner: [f64; 2],
    pub radii_outer: [f64; 2],
    pub centers_inner: [Vec<f64>; 2],
    pub centers_outer: [Vec<f64>; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubspaceJson {
    Vectors(Vec<Vec<f64>>),
    Explicit { ambient: usize, basis: Vec<Vec<f64>> },
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

/// Parses JSON text, reporting line, column and field path on failure.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        format_err(format!("line {} column {} at `{}`: {}", inner.line(), inner.column(), path, inner))
    })
}

/// Like [`parse`] for an already parsed value; errors name the field path under `what`.
pub fn from_value<T: DeserializeOwned>(value: Value, what: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        format_err(format!("{what} at `{path}`: {}", e.into_inner()))
    })
}

fn vec_of(xs: &[f64], what: &str) -> Result<Vector> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(format_err(format!("{what}: non-finite entry")));
    }
    Ok(Vector::from_column_slice(xs))
}

fn dim_of(n: usize, what: &str) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(format_err(format!("{what}: dimension {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

fn points_of(rows: &[Vec<f64>], what: &str) -> Result<Vec<Vector>> {
    let Some(first) = rows.first() else {
        return Err(format_err(format!("{what}: empty point list")));
    };
    let n = first.len();
    dim_of(n, what)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if r.len() != n {
                return Err(format_err(format!("{what}[{i}]: expected {n} coordinates, found {}", r.len())));
            }
            vec_of(r, &format!("{what}[{i}]"))
        })
        .collect()
}

fn square_of(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format_err(format!("{what}: expected a {n}x{n} matrix")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(format_err(format!("{what}: non-finite entry")));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn body_from_json(b: &BodyJson) -> Result<Body> {
    match (b.kind, &b.vertices, &b.facets, &b.center, &b.shape) {
        (BodyKind::Polytope, Some(v), None, None, None) => {
            Ok(Body::Polytope(Polytope::from_vertices(&points_of(v, "vertices")?)?))
        }
        (BodyKind::Polytope, None, Some(f), None, None) => {
            let normals: Vec<Vec<f64>> = f.iter().map(|x| x.normal.clone()).collect();
            let normals = points_of(&normals, "facets.normal")?;
            let hs: Vec<(Vector, f64)> = normals
                .into_iter()
                .zip(f)
                .map(|(a, x)| if x.offset.is_finite() { Ok((a, x.offset)) } else { Err(format_err("facets.offset: non-finite")) })
                .collect::<Result<_>>()?;
            Ok(Body::Polytope(Polytope::from_facets(&hs)?))
        }
        (BodyKind::Polytope, ..) => Err(format_err("polytope needs exactly one of `vertices` or `facets`")),
        (BodyKind::Ellipsoid, None, None, Some(center), Some(shape)) => {
            dim_of(center.len(), "center")?;
            let c = vec_of(center, "center")?;
            let q = square_of(shape, center.len(), "shape")?;
            Ok(Body::Ellipsoid(Ellipsoid::new(c, q)?))
        }
        (BodyKind::Ellipsoid, ..) => Err(format_err("ellipsoid needs `center` and `shape` only")),
    }
}

pub fn body_to_json(b: &Body) -> BodyJson {
    match b {
        Body::Polytope(p) => BodyJson {
            kind: BodyKind::Polytope,
            vertices: Some(p.vertices().iter().map(to_vec).collect()),
            facets: None,
            center: None,
            shape: None,
        },
        Body::Ellipsoid(e) => BodyJson {
            kind: BodyKind::Ellipsoid,
            vertices: None,
            facets: None,
            center: Some(to_vec(e.center())),
            shape: Some(to_rows(e.shape())),
        },
    }
}

pub fn chain_from_json(c: &ChainJson) -> Result<Chain> {
    Chain::new(
        body_from_json(&c.inner)?,
        c.r,
        vec_of(&c.c, "c")?,
        body_from_json(&c.middle)?,
        body_from_json(&c.outer)?,
        c.big_r,
        vec_of(&c.d, "d")?,
    )
}

pub fn chain_to_json(c: &Chain) -> ChainJson {
    ChainJson {
        inner: body_to_json(&c.inner),
        r: c.r,
        c: to_vec(&c.c),
        middle: body_to_json(&c.middle),
        outer: body_to_json(&c.outer),
        big_r: c.big_r,
        d: to_vec(&c.d),
        ratio: Some(c.ratio()),
    }
}

fn pairs_from(ps: &[PairJson], what: &str) -> Result<Vec<WeightedPair>> {
    ps.iter()
        .enumerate()
        .map(|(i, p)| {
            if p.y.len() != p.a.len() {
                return Err(format_err(format!("{what}[{i}]: y and a differ in length")));
            }
            if !p.weight.is_finite() {
                return Err(format_err(format!("{what}[{i}].weight: non-finite")));
            }
            Ok(WeightedPair { y: vec_of(&p.y, what)?, a: vec_of(&p.a, what)?, weight: p.weight })
        })
        .collect()
}

pub fn certificate_from_json(c: &CertificateJson) -> Result<Certificate> {
    Ok(Certificate { inner: pairs_from(&c.inner, "inner")?, outer: pairs_from(&c.outer, "outer")? })
}

pub fn certificate_to_json(c: &Certificate, chain_ref: Value) -> CertificateJson {
    let conv = |ps: &[WeightedPair]| {
        ps.iter().map(|p| PairJson { y: to_vec(&p.y), a: to_vec(&p.a), weight: p.weight }).collect()
    };
    CertificateJson { inner: conv(&c.inner), outer: conv(&c.outer), chain_ref }
}

pub fn mean_path_from_json(p: &MeanPathJson) -> Result<MeanPath> {
    let n = p.shape.len();
    dim_of(n, "shape")?;
    let q = square_of(&p.shape, n, "shape")?;
    let e = Ellipsoid::new(Vector::zeros(n), q)?;
    let ci = [vec_of(&p.centers_inner[0], "centers_inner")?, vec_of(&p.centers_inner[1], "centers_inner")?];
    let co = [vec_of(&p.centers_outer[0], "centers_outer")?, vec_of(&p.centers_outer[1], "centers_outer")?];
    MeanPath::new(e.axes().clone(), e.half_lengths().to_vec(), p.radii_inner, p.radii_outer, ci, co)
}

pub fn points_from_json(rows: &[Vec<f64>], what: &str) -> Result<Vec<Vector>> {
    points_of(rows, what)
}

pub fn subspace_from_json(s: &SubspaceJson, ambient: usize) -> Result<Subspace> {
    let (amb, rows) = match s {
        SubspaceJson::Vectors(v) => (ambient, v),
        SubspaceJson::Explicit { ambient, basis } => (*ambient, basis),
    };
    if amb != ambient {
        return Err(format_err(format!("subspace ambient dimension {amb} differs from points ({ambient})")));
    }
    let mut vs = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != ambient {
            return Err(format_err(format!("subspace[{i}]: expected {ambient} coordinates")));
        }
        vs.push(vec_of(r, "subspace")?);
    }
    Subspace::span(ambient, &vs)
}

pub fn report_to_value(r: &VerifyReport) -> Value {
    let checks: serde_json::Map<String, Value> = r
        .checks
        .iter()
        .map(|c| {
            (
                c.name.to_string(),
                serde_json::json!({ "value": c.value, "threshold": c.threshold, "passed": c.passed }),
            )
        })
        .collect();
    serde_json::json!({
        "passed": r.passed,
        "support": r.support,
        "cardinality_bound": r.cardinality_bound,
        "inner_point_sum": to_vec(&r.inner_point_sum),
        "outer_point_sum": to_vec(&r.outer_point_sum),
        "checks": checks,
    })
}

struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            return writer.write_all(b"0.0");
        }
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with sorted keys and every float at 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    // Round-tripping through Value sorts object keys.
    let v = serde_json::to_value(value).map_err(|e| Error::Solver(e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Digits17);
    v.serialize(&mut ser).map_err(|e| Error::Solver(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::Solver(e.to_string()))
}
