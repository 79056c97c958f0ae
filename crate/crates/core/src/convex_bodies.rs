//! Polytopes and ellipsoids: support functions, gauges, affine images,
//! contact sets and extremal homothets.

use crate::error::{invalid, Error, Result};
use crate::hull::cone_rays;
use crate::linalg::{rank, sorted_eigen, sym_power};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::meb::min_enclosing_ball;
use crate::{Matrix, Vector, MAX_DIM};

/// Halfspace `<normal, x> <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
}

/// Full-dimensional polytope holding both vertex and facet descriptions.
#[derive(Debug, Clone)]
pub struct Polytope {
    vertices: Vec<Vector>,
    facets: Vec<Facet>,
}

/// `{x : (x - center)^T shape (x - center) <= 1}` with `shape` positive definite.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: Vector,
    shape: Matrix,
    shape_inv: Matrix,
    axes: Matrix,
    half_lengths: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum Body {
    Polytope(Polytope),
    Ellipsoid(Ellipsoid),
}

/// Boundary point `y` of two nested bodies with an outward normal `a` of the
/// outer body, scaled so `<a, y - ref> = 1` for the reference point used.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPair {
    pub y: Vector,
    pub a: Vector,
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("dimension must be positive");
    }
    if n > MAX_DIM {
        return invalid(format!("dimension {n} exceeds the supported maximum {MAX_DIM}"));
    }
    Ok(())
}

fn check_finite(v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        invalid("non-finite coordinate")
    }
}

/// Facets of the hull of `pts` (at least `n + 1` affinely spanning points).
fn hull_facets(pts: &[Vector], n: usize) -> Result<Vec<Facet>> {
    let g = pts.iter().fold(Vector::zeros(n), |a, p| a + p) / pts.len() as f64;
    let q: Vec<Vector> = pts.iter().map(|p| p - &g).collect();
    let spread = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if pts.len() <= n || spread == 0.0 {
        return invalid("points do not span a full-dimensional body");
    }
    let qm = Matrix::from_columns(&q);
    if rank(&qm, 1e-9) < n {
        return invalid("points do not span a full-dimensional body");
    }
    let rows: Vec<Vec<f64>> = q
        .iter()
        .map(|v| {
            let mut r = vec![1.0];
            r.extend(v.iter().map(|x| x / spread));
            r
        })
        .collect();
    let rays = cone_rays(&rows, n + 1)?;
    let mut facets: Vec<Facet> = Vec::new();
    for ray in rays {
        let a = Vector::from_iterator(n, ray[1..].iter().map(|x| -x));
        let na = a.norm();
        if na < 1e-12 {
            continue;
        }
        let normal = a / na;
        let offset = ray[0] * spread / na + normal.dot(&g);
        facets.push(Facet { normal, offset });
    }
    Ok(facets)
}

impl Polytope {
    /// Convex hull of a point set. Non-extreme points are dropped.
    pub fn from_vertices(points: &[Vector]) -> Result<Polytope> {
        if points.is_empty() {
            return invalid("no points");
        }
        let n = points[0].len();
        check_dim(n)?;
        for p in points {
            if p.len() != n {
                return invalid("points of mixed dimension");
            }
            check_finite(p)?;
        }
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut pts: Vec<Vector> = Vec::new();
        for p in points {
            if !pts.iter().any(|q| (q - p).norm() <= 1e-12 * scale) {
                pts.push(p.clone());
            }
        }
        // Points within tolerance of a facet but outside it split that facet
        // in two nearly parallel ones; dropping them and rebuilding removes the sliver.
        for _ in 0..4 {
            let facets = hull_facets(&pts, n)?;
            let (vertices, facets) = Self::assemble(&pts, facets, n, scale);
            if vertices.len() == pts.len() || vertices.len() <= n {
                if vertices.len() <= n || facets.len() <= n {
                    return Err(Error::Solver("hull construction lost full dimension".into()));
                }
                return Ok(Polytope { vertices, facets });
            }
            pts = vertices;
        }
        Err(Error::Solver("hull construction did not settle".into()))
    }

    /// Intersection of halfspaces `<a_i, x> <= b_i`; must be bounded and full-dimensional.
    pub fn from_facets(halfspaces: &[(Vector, f64)]) -> Result<Polytope> {
        if halfspaces.is_empty() {
            return Err(Error::Unbounded("no facets".into()));
        }
        let n = halfspaces[0].0.len();
        check_dim(n)?;
        let mut rows = Vec::with_capacity(halfspaces.len() + 1);
        for (a, b) in halfspaces {
            if a.len() != n {
                return invalid("facet normals of mixed dimension");
            }
            check_finite(a)?;
            if !b.is_finite() {
                return invalid("non-finite facet offset");
            }
            let na = a.norm();
            if na == 0.0 {
                return invalid("zero facet normal");
            }
            let mut r = vec![b / na];
            r.extend(a.iter().map(|x| -x / na));
            rows.push(r);
        }
        let mut t = vec![1.0];
        t.extend(std::iter::repeat(0.0).take(n));
        rows.push(t);
        let rays = cone_rays(&rows, n + 1)?;
        let tmax = rays.iter().map(|r| r[0].abs()).fold(0.0, f64::max);
        let mut vertices = Vec::new();
        for r in &rays {
            if r[0] > 1e-9 * tmax.max(1e-300) {
                vertices.push(Vector::from_iterator(n, r[1..].iter().map(|x| x / r[0])));
            } else {
                return Err(Error::Unbounded("halfspaces admit a recession direction".into()));
            }
        }
        if vertices.is_empty() {
            return invalid("halfspace system is empty");
        }
        Self::from_vertices(&vertices)
    }

    fn assemble(pts: &[Vector], facets: Vec<Facet>, n: usize, scale: f64) -> (Vec<Vector>, Vec<Facet>) {
        let tol = 1e-9 * scale;
        let mut clean: Vec<Facet> = Vec::new();
        for f in facets {
            if clean.iter().any(|c| (&c.normal - &f.normal).norm() < 1e-9 && (c.offset - f.offset).abs() < tol) {
                continue;
            }
            clean.push(f);
        }
        let vertices: Vec<Vector> = pts
            .iter()
            .filter(|p| {
                let tight: Vec<Vector> = clean
                    .iter()
                    .filter(|f| (f.normal.dot(p) - f.offset).abs() <= tol)
                    .map(|f| f.normal.clone())
                    .collect();
                tight.len() >= n && rank(&Matrix::from_columns(&tight), 1e-7) == n
            })
            .cloned()
            .collect();
        let facets: Vec<Facet> = clean
            .into_iter()
            .filter(|f| vertices.iter().filter(|v| (f.normal.dot(v) - f.offset).abs() <= tol).count() >= n)
            .collect();
        (vertices, facets)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn centroid(&self) -> Vector {
        self.vertices.iter().fold(Vector::zeros(self.dim()), |a, v| a + v) / self.vertices.len() as f64
    }

    pub fn scale(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Support value and an attaining vertex index.
    pub fn support_vertex(&self, u: &Vector) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, v) in self.vertices.iter().enumerate() {
            let s = u.dot(v);
            if s > best.0 {
                best = (s, i);
            }
        }
        best
    }

    /// Checks the vertex/facet consistency invariants.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let t = tol * self.scale().max(1.0);
        for v in &self.vertices {
            for f in &self.facets {
                if f.normal.dot(v) > f.offset + t {
                    return invalid("vertex violates a facet");
                }
            }
        }
        for f in &self.facets {
            if (f.normal.norm() - 1.0).abs() > 1e-9 {
                return invalid("facet normal not unit");
            }
            let on = self.vertices.iter().filter(|v| (f.normal.dot(v) - f.offset).abs() <= t).count();
            if on < self.dim() {
                return invalid("facet supported by too few vertices");
            }
        }
        Ok(())
    }

    pub fn affine_image(&self, b: &Matrix, t: &Vector) -> Result<Polytope> {
        let bi = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
        let vertices: Vec<Vector> = self.vertices.iter().map(|v| b * v + t).collect();
        let bit = bi.transpose();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let a = &bit * &f.normal;
                let normal = &a / a.norm();
                // Offsets from the image vertices keep both descriptions consistent
                // under ill-conditioned maps.
                let offset = vertices.iter().map(|v| normal.dot(v)).fold(f64::NEG_INFINITY, f64::max);
                Facet { offset, normal }
            })
            .collect();
        Ok(Polytope { vertices, facets })
    }
}

impl Ellipsoid {
    pub fn new(center: Vector, shape: Matrix) -> Result<Ellipsoid> {
        let n = center.len();
        check_dim(n)?;
        check_finite(&center)?;
        if shape.nrows() != n || shape.ncols() != n {
            return invalid("shape matrix dimension mismatch");
        }
        if !shape.iter().all(|x| x.is_finite()) {
            return invalid("non-finite shape entry");
        }
        let norm = shape.norm();
        if (&shape - shape.transpose()).norm() > 1e-9 * norm.max(1e-300) {
            return invalid("shape matrix is not symmetric");
        }
        let (vals, vecs) = sorted_eigen(&shape);
        let max = vals[n - 1];
        if vals[0] <= 1e-14 * max.max(0.0) || vals[0] <= 0.0 {
            return invalid("shape matrix is not positive definite");
        }
        let shape = crate::linalg::symmetrize(&shape);
        let shape_inv = sym_power(&shape, -1.0);
        let half_lengths = vals.iter().map(|l| 1.0 / l.sqrt()).collect();
        Ok(Ellipsoid { center, shape, shape_inv, axes: vecs, half_lengths })
    }

    /// Ellipsoid with orthonormal `axes` (columns) and matching half-lengths.
    pub fn from_axes(center: Vector, axes: &Matrix, half_lengths: &[f64]) -> Result<Ellipsoid> {
        if half_lengths.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return invalid("half-lengths must be positive");
        }
        let d = Matrix::from_diagonal(&Vector::from_iterator(
            half_lengths.len(),
            half_lengths.iter().map(|a| 1.0 / (a * a)),
        ));
        Ellipsoid::new(center, axes * d * axes.transpose())
    }

    pub fn ball(center: Vector, radius: f64) -> Ellipsoid {
        let n = center.len();
        Ellipsoid::from_axes(center, &Matrix::identity(n, n), &vec![radius; n]).expect("valid ball")
    }

    pub fn unit_ball(n: usize) -> Ellipsoid {
        Ellipsoid::ball(Vector::zeros(n), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    pub fn shape_inv(&self) -> &Matrix {
        &self.shape_inv
    }

    /// Principal axes as columns, ordered by decreasing half-length.
    pub fn axes(&self) -> &Matrix {
        &self.axes
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half_lengths
    }

    pub fn scale(&self) -> f64 {
        self.half_lengths.iter().cloned().fold(0.0, f64::max) + self.center.norm()
    }

    /// Symmetric square root of the shape: maps the ellipsoid, centered, onto the unit ball.
    pub fn whitening(&self) -> Matrix {
        sym_power(&self.shape, 0.5)
    }

    pub fn support(&self, u: &Vector) -> f64 {
        self.center.dot(u) + u.dot(&(&self.shape_inv * u)).max(0.0).sqrt()
    }

    pub fn support_point(&self, u: &Vector) -> Vector {
        let w = &self.shape_inv * u;
        let s = u.dot(&w).sqrt();
        &self.center + w / s
    }

    pub fn quadratic(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        d.dot(&(&self.shape * &d))
    }

    pub fn gauge(&self, x: &Vector, base: &Vector) -> Result<f64> {
        let q = base - &self.center;
        let qq = q.dot(&(&self.shape * &q));
        if qq >= 1.0 {
            return invalid("gauge base point is not interior");
        }
        let p = x - base;
        let pp = p.dot(&(&self.shape * &p));
        if pp == 0.0 {
            return Ok(0.0);
        }
        let pq = q.dot(&(&self.shape * &p));
        // Largest s with ||q + s p||_shape = 1; gauge is 1/s.
        let disc = pq * pq - pp * (qq - 1.0);
        let s = (-pq + disc.sqrt()) / pp;
        Ok(1.0 / s)
    }

    pub fn affine_image(&self, b: &Matrix, t: &Vector) -> Result<Ellipsoid> {
        let bi = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
        let shape = bi.transpose() * &self.shape * &bi;
        Ellipsoid::new(b * &self.center + t, crate::linalg::symmetrize(&shape))
    }

    pub fn is_unit_ball(&self, tol: f64) -> bool {
        let n = self.dim();
        self.center.norm() <= tol && (&self.shape - Matrix::identity(n, n)).norm() <= tol
    }

    pub fn is_ball(&self, tol: f64) -> bool {
        let h = &self.half_lengths;
        let max = h.iter().cloned().fold(0.0, f64::max);
        let min = h.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min <= tol * max
    }

    /// Circumscribed polytope from tangent halfspaces in a fixed direction set.
    pub fn outer_polytope(&self, density: usize) -> Result<Polytope> {
        let dirs = sphere_directions(self.dim(), density);
        let hs: Vec<(Vector, f64)> = dirs.into_iter().map(|u| {
            let h = self.support(&u);
            (u, h)
        }).collect();
        Polytope::from_facets(&hs)
    }
}

/// Deterministic set of unit directions covering the sphere.
pub fn sphere_directions(n: usize, density: usize) -> Vec<Vector> {
    let k = density.max(2 * n);
    match n {
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..k)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                Vector::from_column_slice(&[t.cos(), t.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let t = golden * i as f64;
                    Vector::from_column_slice(&[r * t.cos(), r * t.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut out = Vec::new();
            let total = 3usize.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let v = Vector::from_fn(n, |_, _| {
                    let d = (c % 3) as f64 - 1.0;
                    c /= 3;
                    d
                });
                let nv = v.norm();
                if nv > 0.0 {
                    out.push(v / nv);
                }
            }
            out
        }
    }
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Ellipsoid(e) => e.dim(),
        }
    }

    pub fn support(&self, u: &Vector) -> f64 {
        match self {
            Body::Polytope(p) => p.support_vertex(u).0,
            Body::Ellipsoid(e) => e.support(u),
        }
    }

    /// A point guaranteed to be interior.
    pub fn interior_point(&self) -> Vector {
        match self {
            Body::Polytope(p) => p.centroid(),
            Body::Ellipsoid(e) => e.center().clone(),
        }
    }

    /// Minkowski gauge of `x` relative to an interior base point (default: interior_point).
    pub fn gauge(&self, x: &Vector, base: Option<&Vector>) -> Result<f64> {
        let b = base.cloned().unwrap_or_else(|| self.interior_point());
        match self {
            Body::Polytope(p) => {
                let d = x - &b;
                let mut g = 0.0f64;
                for f in p.facets() {
                    let den = f.offset - f.normal.dot(&b);
                    if den <= 0.0 {
                        return invalid("gauge base point is not interior");
                    }
                    g = g.max(f.normal.dot(&d) / den);
                }
                Ok(g)
            }
            Body::Ellipsoid(e) => e.gauge(x, &b),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.gauge(x, None).map(|g| g <= 1.0 + tol).unwrap_or(false)
    }

    /// Max vertex norm for polytopes, max half-length plus center norm for ellipsoids.
    pub fn scale(&self) -> f64 {
        match self {
            Body::Polytope(p) => p.scale(),
            Body::Ellipsoid(e) => e.scale(),
        }
    }

    pub fn affine_image(&self, b: &Matrix, t: &Vector) -> Result<Body> {
        if b.nrows() != self.dim() || b.ncols() != self.dim() || t.len() != self.dim() {
            return invalid("affine map dimension mismatch");
        }
        Ok(match self {
            Body::Polytope(p) => Body::Polytope(p.affine_image(b, t)?),
            Body::Ellipsoid(e) => Body::Ellipsoid(e.affine_image(b, t)?),
        })
    }

    /// `r * self + c`.
    pub fn homothet(&self, r: f64, c: &Vector) -> Result<Body> {
        let n = self.dim();
        self.affine_image(&(Matrix::identity(n, n) * r), c)
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match self {
            Body::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        match self {
            Body::Ellipsoid(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_unit_ball(&self, tol: f64) -> bool {
        self.as_ellipsoid().is_some_and(|e| e.is_unit_ball(tol))
    }

    /// Whether `-self == self` within `tol * scale`.
    pub fn is_origin_symmetric(&self, tol: f64) -> bool {
        let t = tol * self.scale().max(1.0);
        match self {
            Body::Ellipsoid(e) => e.center().norm() <= t,
            Body::Polytope(p) => p
                .vertices()
                .iter()
                .all(|v| p.vertices().iter().any(|w| (v + w).norm() <= t)),
        }
    }

    /// Vertex set, or a circumscribed polytope's vertices for ellipsoids.
    pub fn to_polytope(&self, density: usize) -> Result<Polytope> {
        match self {
            Body::Polytope(p) => Ok(p.clone()),
            Body::Ellipsoid(e) => e.outer_polytope(density),
        }
    }
}

fn normalize_pair(y: Vector, a: Vector, reference: &Vector) -> Result<ContactPair> {
    let s = a.dot(&(&y - reference));
    if !(s > 1e-14 * a.norm() * (1.0 + y.norm())) {
        return invalid("reference point is not interior to the outer body");
    }
    Ok(ContactPair { a: a / s, y })
}

/// Contact pairs of `inner ⊆ outer`: boundary points shared within the relative
/// band `tol`, with outward normals of `outer` normalized against `reference`
/// (an interior point of `outer`). Fails if the inclusion is violated by more
/// than `tol`.
pub fn contacts(inner: &Body, outer: &Body, tol: f64, reference: &Vector) -> Result<Vec<ContactPair>> {
    if inner.dim() != outer.dim() || reference.len() != inner.dim() {
        return invalid("dimension mismatch");
    }
    let mut pairs: Vec<ContactPair> = Vec::new();
    match (inner, outer) {
        (_, Body::Polytope(p)) => {
            for f in p.facets() {
                let den = f.offset - f.normal.dot(reference);
                if den <= 0.0 {
                    return invalid("reference point is not interior to the outer body");
                }
                let mut candidates: Vec<Vector> = Vec::new();
                match inner {
                    Body::Polytope(q) => candidates.extend(q.vertices().iter().cloned()),
                    Body::Ellipsoid(e) => candidates.push(e.support_point(&f.normal)),
                }
                for y in candidates {
                    let act = (f.normal.dot(&y) - f.normal.dot(reference)) / den;
                    if act > 1.0 + tol {
                        return Err(Error::InclusionViolated { point: y.iter().copied().collect(), gauge: act });
                    }
                    if act >= 1.0 - tol {
                        pairs.push(normalize_pair(y, f.normal.clone(), reference)?);
                    }
                }
            }
        }
        (Body::Polytope(q), Body::Ellipsoid(e)) => {
            for v in q.vertices() {
                let g = e.quadratic(v).sqrt();
                if g > 1.0 + tol {
                    return Err(Error::InclusionViolated { point: v.iter().copied().collect(), gauge: g });
                }
                if g >= 1.0 - tol {
                    let a = e.shape() * (v - e.center());
                    pairs.push(normalize_pair(v.clone(), a, reference)?);
                }
            }
        }
        (Body::Ellipsoid(i), Body::Ellipsoid(o)) => {
            for (y, g) in ellipsoid_extremes(i, o, tol) {
                if g > 1.0 + tol {
                    return Err(Error::InclusionViolated { point: y.iter().copied().collect(), gauge: g });
                }
                let a = o.shape() * (&y - o.center());
                pairs.push(normalize_pair(y, a, reference)?);
            }
        }
    }
    let mut out: Vec<ContactPair> = Vec::new();
    for p in pairs {
        if !out.iter().any(|q| (&q.y - &p.y).norm() <= 1e-12 * (1.0 + p.y.norm()) && (&q.a - &p.a).norm() <= 1e-12 * p.a.norm()) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Points of `inner`'s boundary where the gauge of `outer` is within `tol` of
/// its maximum over `inner`, paired with that gauge.
fn ellipsoid_extremes(inner: &Ellipsoid, outer: &Ellipsoid, tol: f64) -> Vec<(Vector, f64)> {
    let n = inner.dim();
    let m = outer.whitening();
    let root_inv = sym_power(inner.shape(), -0.5);
    let g = &m * &root_inv;
    let t = &m * (inner.center() - outer.center());
    let mut out: Vec<(Vector, f64)> = Vec::new();
    if t.norm() <= 1e-12 * (1.0 + g.norm()) {
        let svd = g.clone().svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        for k in 0..n {
            let s = svd.singular_values[k];
            if s >= (1.0 - tol).min(smax * (1.0 - 1e-12)) {
                let u = v_t.row(k).transpose().into_owned();
                for sign in [1.0, -1.0] {
                    out.push((inner.center() + &root_inv * &u * sign, s));
                }
            }
        }
        return out;
    }
    let mut found: Vec<(Vector, f64)> = Vec::new();
    for k in 0..2 * n {
        let mut u = Vector::zeros(n);
        u[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
        for _ in 0..500 {
            let w = g.transpose() * (&t + &g * &u);
            let nw = w.norm();
            if nw == 0.0 {
                break;
            }
            u = w / nw;
        }
        let val = (&t + &g * &u).norm();
        if !found.iter().any(|(f, _)| (f - &u).norm() < 1e-7) {
            found.push((u, val));
        }
    }
    let best = found.iter().map(|f| f.1).fold(0.0, f64::max);
    for (u, val) in found {
        if val >= (1.0 - tol).min(best * (1.0 - 1e-12)) {
            out.push((inner.center() + &root_inv * &u, val));
        }
    }
    out
}

/// Largest `r` and translation `c` with `r * shape + c ⊆ container`.
pub fn inner_homothet(container: &Body, shape: &Body) -> Result<(f64, Vector)> {
    let n = container.dim();
    if shape.dim() != n {
        return invalid("dimension mismatch");
    }
    match container {
        Body::Polytope(p) => {
            let g = p.centroid();
            // Variables: r, c+ (n), c- (n).
            let mut obj = vec![0.0; 2 * n + 1];
            obj[0] = 1.0;
            let mut lp = LinearProgram::maximize(obj);
            for f in p.facets() {
                let mut row = Vec::with_capacity(2 * n + 1);
                row.push(shape.support(&f.normal));
                row.extend(f.normal.iter());
                row.extend(f.normal.iter().map(|x| -x));
                lp.constrain(row, Relation::Le, f.offset - f.normal.dot(&g));
            }
            match lp.solve() {
                LpOutcome::Optimal { x, .. } => {
                    let c = Vector::from_fn(n, |i, _| x[1 + i] - x[1 + n + i]) + g;
                    // Exact radius for this center; the LP may overshoot by its tolerance.
                    let r = p
                        .facets()
                        .iter()
                        .map(|f| (f.offset - f.normal.dot(&c)) / shape.support(&f.normal))
                        .fold(x[0], f64::min);
                    Ok((r, c))
                }
                LpOutcome::Unbounded => Err(Error::Unbounded("inner homothet".into())),
                other => Err(Error::Solver(format!("inner homothet LP: {other:?}"))),
            }
        }
        Body::Ellipsoid(e) => {
            let m = e.whitening();
            let mi = sym_power(e.shape(), -0.5);
            match shape {
                Body::Polytope(s) => {
                    let pts: Vec<Vector> = s.vertices().iter().map(|v| &m * v).collect();
                    let ball = min_enclosing_ball(&pts);
                    let r = 1.0 / ball.radius;
                    Ok((r, e.center() - &mi * &ball.center * r))
                }
                Body::Ellipsoid(s) => {
                    let img = s.affine_image(&m, &Vector::zeros(n))?;
                    let amax = img.half_lengths().iter().cloned().fold(0.0, f64::max);
                    let r = 1.0 / amax;
                    Ok((r, e.center() - s.center() * r))
                }
            }
        }
    }
}

/// Smallest `R` and translation `d` with `body ⊆ R * shape + d`.
pub fn outer_homothet(body: &Body, shape: &Body) -> Result<(f64, Vector)> {
    let n = body.dim();
    if shape.dim() != n {
        return invalid("dimension mismatch");
    }
    match shape {
        Body::Polytope(s) => {
            let g = body.interior_point();
            // maximize -R over R, d+ (n), d- (n).
            let mut obj = vec![0.0; 2 * n + 1];
            obj[0] = -1.0;
            let mut lp = LinearProgram::maximize(obj);
            for f in s.facets() {
                let mut row = Vec::with_capacity(2 * n + 1);
                row.push(f.offset);
                row.extend(f.normal.iter());
                row.extend(f.normal.iter().map(|x| -x));
                lp.constrain(row, Relation::Ge, body.support(&f.normal) - f.normal.dot(&g));
            }
            match lp.solve() {
                LpOutcome::Optimal { x, .. } => {
                    let d = Vector::from_fn(n, |i, _| x[1 + i] - x[1 + n + i]) + g;
                    let big_r = s
                        .facets()
                        .iter()
                        .filter(|f| f.offset > 0.0)
                        .map(|f| (body.support(&f.normal) - f.normal.dot(&d)) / f.offset)
                        .fold(x[0], f64::max);
                    Ok((big_r, d))
                }
                other => Err(Error::Solver(format!("outer homothet LP: {other:?}"))),
            }
        }
        Body::Ellipsoid(e) => {
            let m = e.whitening();
            let mi = sym_power(e.shape(), -0.5);
            match body {
                Body::Polytope(p) => {
                    let pts: Vec<Vector> = p.vertices().iter().map(|v| &m * v).collect();
                    let ball = min_enclosing_ball(&pts);
                    let big_r = ball.radius;
                    Ok((big_r, &mi * &ball.center - e.center() * big_r))
                }
                Body::Ellipsoid(k) => {
                    let img = k.affine_image(&m, &Vector::zeros(n))?;
                    let big_r = img.half_lengths().iter().cloned().fold(0.0, f64::max);
                    Ok((big_r, k.center() - e.center() * big_r))
                }
            }
        }
    }
}

/// `wa * A + wb * B` as a polytope; ellipsoids enter through circumscribed
/// polytopes with `density` tangent directions.
pub fn minkowski_combine(a: &Body, b: &Body, wa: f64, wb: f64, density: usize) -> Result<Polytope> {
    if a.dim() != b.dim() {
        return invalid("dimension mismatch");
    }
    if !(wa >= 0.0 && wb >= 0.0) || wa + wb == 0.0 {
        return invalid("weights must be nonnegative and not both zero");
    }
    let pa = a.to_polytope(density)?;
    let pb = b.to_polytope(density)?;
    let mut pts = Vec::with_capacity(pa.vertices().len() * pb.vertices().len());
    for u in pa.vertices() {
        for v in pb.vertices() {
            pts.push(u * wa + v * wb);
        }
    }
    Polytope::from_vertices(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn square() -> Body {
        let v: Vec<Vector> = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]].iter().map(|p| vector(p)).collect();
        Body::Polytope(Polytope::from_vertices(&v).unwrap())
    }

    #[test]
    fn square_descriptions() {
        let s = square();
        let p = s.as_polytope().unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        p.validate(1e-9).unwrap();
        assert!((s.gauge(&vector(&[2.0, 1.0]), None).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interior_points_are_dropped() {
        let v: Vec<Vector> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2], [0.5, 0.5]].iter().map(|p| vector(p)).collect();
        let p = Polytope::from_vertices(&v).unwrap();
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn facets_round_trip() {
        let hs = vec![
            (vector(&[1.0, 0.0]), 1.0),
            (vector(&[-1.0, 0.0]), 1.0),
            (vector(&[0.0, 1.0]), 1.0),
            (vector(&[0.0, -1.0]), 1.0),
            (vector(&[1.0, 1.0]), 5.0),
        ];
        let p = Polytope::from_facets(&hs).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.facets().len(), 4);
        let open = vec![(vector(&[1.0, 0.0]), 1.0), (vector(&[0.0, 1.0]), 1.0)];
        assert!(matches!(Polytope::from_facets(&open), Err(Error::Unbounded(_))));
    }

    #[test]
    fn segment_rejected() {
        let v: Vec<Vector> = [[0.0, 0.0], [1.0, 1.0]].iter().map(|p| vector(p)).collect();
        assert!(matches!(Polytope::from_vertices(&v), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ellipse_support() {
        let e = Ellipsoid::new(vector(&[1.4, 0.8]), Matrix::from_diagonal(&vector(&[0.25, 16.0]))).unwrap();
        assert!((e.support(&vector(&[1.0, 0.0])) - 3.4).abs() < 1e-12);
        assert!((e.gauge(&vector(&[-0.6, 0.8]), e.center()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn homothets_of_square() {
        let s = square();
        let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
        let (r, c) = inner_homothet(&s, &ball).unwrap();
        assert!((r - 1.0).abs() < 1e-12 && c.norm() < 1e-12);
        let (big_r, d) = outer_homothet(&s, &ball).unwrap();
        assert!((big_r - 2f64.sqrt()).abs() < 1e-12 && d.norm() < 1e-12);
        let e = Body::Ellipsoid(Ellipsoid::from_axes(vector(&[0.0, 0.0]), &Matrix::identity(2, 2), &[2.0, 1.0]).unwrap());
        let (r, _) = inner_homothet(&s, &e).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        // Polytope shape against polytope container, and ellipsoid container.
        let (r, _) = inner_homothet(&s, &s).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let (r, c) = inner_homothet(&ball, &s).unwrap();
        assert!((r - 1.0 / 2f64.sqrt()).abs() < 1e-12 && c.norm() < 1e-12);
        let (big_r, _) = outer_homothet(&ball, &s).unwrap();
        assert!((big_r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contacts_of_ball_in_square() {
        let s = square();
        let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
        let pairs = contacts(&ball, &s, 1e-7, &Vector::zeros(2)).unwrap();
        assert_eq!(pairs.len(), 4);
        for p in &pairs {
            assert!((p.y.norm() - 1.0).abs() < 1e-12);
            assert!((p.a.dot(&p.y) - 1.0).abs() < 1e-12);
        }
        let big = Body::Ellipsoid(Ellipsoid::ball(Vector::zeros(2), 1.2));
        assert!(matches!(contacts(&big, &s, 1e-7, &Vector::zeros(2)), Err(Error::InclusionViolated { .. })));
    }
}
