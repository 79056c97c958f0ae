//! Containment chains `r*L1 + c ⊆ K ⊆ R*L2 + d` and their optimality
//! certificates.
//!
//! A certificate is a pair of weighted contact families: inner pairs `(y, a)`
//! with `y` on the boundary of both `r*L1 + c` and `K` and `a` an outer normal
//! of `K` normalized by `<a, y - c> = 1`, and outer pairs `(z, b)` with `z` on
//! the boundary of both `K` and `R*L2 + d` and `b` an outer normal of
//! `R*L2 + d` normalized by `<b, z - d> = 1`. It certifies the chain when
//! `sum λ y a^T = sum μ z b^T` and `sum λ a = sum μ b = 0`.
//!
//! When no certificate exists on the current contacts, the separation step
//! returns a falsifier `(A, v, w)` with
//! `min <a, A y + v> >= max <b, A z + w> + margin`, which is a first-order
//! descent direction `x ↦ (I + tA) x` for the ratio `R / r`.

use crate::convex_bodies::{contacts, inner_homothet, outer_homothet, Body, ContactPair};
use crate::error::{invalid, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::linalg::{caratheodory, flatten, symmetrize, unflatten, unvech, vech};
use crate::separation::{closest_combination, separate, Separation, Subspace};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct Chain {
    pub inner: Body,
    pub r: f64,
    pub c: Vector,
    pub middle: Body,
    pub outer: Body,
    pub big_r: f64,
    pub d: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPair {
    pub y: Vector,
    pub a: Vector,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Certificate {
    pub inner: Vec<WeightedPair>,
    pub outer: Vec<WeightedPair>,
}

#[derive(Debug, Clone)]
pub struct Falsifier {
    pub matrix: Matrix,
    pub v: Vector,
    pub w: Vector,
    pub margin: f64,
    /// Reference points used to normalize inner and outer pairs.
    pub inner_ref: Vector,
    pub outer_ref: Vector,
}

#[derive(Debug, Clone)]
pub enum CertificateOutcome {
    Certificate(Certificate),
    Falsifier(Falsifier),
}

fn origin_interior(body: &Body) -> bool {
    let n = body.dim();
    body.gauge(&Vector::zeros(n), None).map(|g| g < 1.0 - 1e-12).unwrap_or(false)
}

impl Chain {
    pub fn new(inner: Body, r: f64, c: Vector, middle: Body, outer: Body, big_r: f64, d: Vector) -> Result<Chain> {
        let n = middle.dim();
        if inner.dim() != n || outer.dim() != n || c.len() != n || d.len() != n {
            return invalid("chain dimension mismatch");
        }
        if !(r > 0.0 && big_r > 0.0 && r.is_finite() && big_r.is_finite()) {
            return invalid("chain radii must be positive");
        }
        if !origin_interior(&inner) || !origin_interior(&outer) {
            return invalid("bounding bodies must contain the origin in their interior");
        }
        Ok(Chain { inner, r, c, middle, outer, big_r, d })
    }

    /// Chain with the extremal homothets of `inner` in `middle` and `middle` in `outer`.
    pub fn from_homothets(inner: Body, middle: Body, outer: Body) -> Result<Chain> {
        let (r, c) = inner_homothet(&middle, &inner)?;
        let (big_r, d) = outer_homothet(&middle, &outer)?;
        Chain::new(inner, r, c, middle, outer, big_r, d)
    }

    pub fn dim(&self) -> usize {
        self.middle.dim()
    }

    pub fn ratio(&self) -> f64 {
        self.big_r / self.r
    }

    pub fn scale(&self) -> f64 {
        self.middle.scale()
    }

    pub fn scaled_inner(&self) -> Result<Body> {
        self.inner.homothet(self.r, &self.c)
    }

    pub fn scaled_outer(&self) -> Result<Body> {
        self.outer.homothet(self.big_r, &self.d)
    }

    pub fn inner_contacts(&self, band: f64) -> Result<Vec<ContactPair>> {
        contacts(&self.scaled_inner()?, &self.middle, band, &self.c)
    }

    pub fn outer_contacts(&self, band: f64) -> Result<Vec<ContactPair>> {
        contacts(&self.middle, &self.scaled_outer()?, band, &self.d)
    }

    /// Verifies both inclusions within the relative band `tol`.
    pub fn check_inclusions(&self, tol: f64) -> Result<()> {
        self.inner_contacts(tol)?;
        self.outer_contacts(tol)?;
        Ok(())
    }

    /// Whether an ellipsoid sits in the middle, or both bounds are ellipsoids
    /// of one shape. These chains admit symmetric certificates.
    pub fn is_euclidean(&self) -> bool {
        if self.middle.as_ellipsoid().is_some() {
            return true;
        }
        match (self.inner.as_ellipsoid(), self.outer.as_ellipsoid()) {
            (Some(a), Some(b)) => {
                let s = a.shape().norm();
                (a.shape() - b.shape()).norm() <= 1e-9 * s
            }
            _ => false,
        }
    }

    /// Largest support of a reduced certificate.
    pub fn cardinality_bound(&self) -> usize {
        let n = self.dim();
        if self.is_euclidean() {
            n * (n + 5) / 2 + 1
        } else {
            (n + 1) * (n + 1)
        }
    }

    /// Rewrites ellipsoidal bounds to be origin-centered (absorbing the center in `c`, `d`).
    fn recentered(&self) -> Result<Chain> {
        let mut ch = self.clone();
        let n = self.dim();
        if let Some(e) = self.inner.as_ellipsoid() {
            ch.c = &self.c + e.center() * self.r;
            ch.inner = Body::Ellipsoid(e.affine_image(&Matrix::identity(n, n), &(-e.center()))?);
        }
        if let Some(e) = self.outer.as_ellipsoid() {
            ch.d = &self.d + e.center() * self.big_r;
            ch.outer = Body::Ellipsoid(e.affine_image(&Matrix::identity(n, n), &(-e.center()))?);
        }
        Ok(ch)
    }
}

impl Certificate {
    pub fn support_size(&self) -> usize {
        self.inner.len() + self.outer.len()
    }

    pub fn dim(&self) -> usize {
        self.inner.first().or(self.outer.first()).map(|p| p.y.len()).unwrap_or(0)
    }

    /// `sum λ y a^T` over inner pairs (equal to the outer sum for a valid certificate).
    pub fn inner_matrix(&self) -> Matrix {
        let n = self.dim();
        self.inner.iter().fold(Matrix::zeros(n, n), |m, p| m + &p.y * p.a.transpose() * p.weight)
    }

    pub fn outer_matrix(&self) -> Matrix {
        let n = self.dim();
        self.outer.iter().fold(Matrix::zeros(n, n), |m, p| m + &p.y * p.a.transpose() * p.weight)
    }

    /// `(sum λ y, sum μ z)`; recorded only, no condition is imposed on them.
    pub fn weighted_point_sums(&self) -> (Vector, Vector) {
        let n = self.dim();
        let s = |ps: &[WeightedPair]| ps.iter().fold(Vector::zeros(n), |acc, p| acc + &p.y * p.weight);
        (s(&self.inner), s(&self.outer))
    }

    /// Rescales every pair to `<a, y - ref> = 1`, compensating in the weight.
    pub fn renormalized(&self, inner_ref: &Vector, outer_ref: &Vector) -> Result<Certificate> {
        Ok(Certificate { inner: renormalize(&self.inner, inner_ref)?, outer: renormalize(&self.outer, outer_ref)? })
    }
}

fn renormalize(pairs: &[WeightedPair], reference: &Vector) -> Result<Vec<WeightedPair>> {
    pairs
        .iter()
        .map(|p| {
            let s = p.a.dot(&(&p.y - reference));
            if !(s > 0.0) {
                return invalid("reference point is not interior for a contact pair");
            }
            Ok(WeightedPair { y: p.y.clone(), a: &p.a / s, weight: p.weight * s })
        })
        .collect()
}

impl Falsifier {
    /// `min <a, A y + v>` over inner pairs minus `max <b, A z + w>` over outer pairs,
    /// after normalizing each pair against the stored references.
    pub fn evaluate(&self, inner: &[ContactPair], outer: &[ContactPair]) -> f64 {
        let val = |p: &ContactPair, reference: &Vector, shift: &Vector| {
            let s = p.a.dot(&(&p.y - reference));
            (&p.a / s).dot(&(&self.matrix * &p.y + shift))
        };
        let lo = inner.iter().map(|p| val(p, &self.inner_ref, &self.v)).fold(f64::INFINITY, f64::min);
        let hi = outer.iter().map(|p| val(p, &self.outer_ref, &self.w)).fold(f64::NEG_INFINITY, f64::max);
        lo - hi
    }

    /// Expresses the falsifier in the image frame of `x ↦ B x + t`.
    pub fn transport(&self, b: &Matrix, t: &Vector) -> Result<Falsifier> {
        let bi = b.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
        let m = b * &self.matrix * bi;
        let mt = &m * t;
        Ok(Falsifier {
            v: b * &self.v - &mt,
            w: b * &self.w - &mt,
            matrix: m,
            margin: self.margin,
            inner_ref: b * &self.inner_ref + t,
            outer_ref: b * &self.outer_ref + t,
        })
    }
}

pub fn transport_chain(chain: &Chain, b: &Matrix, t: &Vector) -> Result<Chain> {
    let zero = Vector::zeros(chain.dim());
    Ok(Chain {
        inner: chain.inner.affine_image(b, &zero)?,
        r: chain.r,
        c: b * &chain.c + t,
        middle: chain.middle.affine_image(b, t)?,
        outer: chain.outer.affine_image(b, &zero)?,
        big_r: chain.big_r,
        d: b * &chain.d + t,
    })
}

/// Image of a certificate under `x ↦ B x + t`: points map forward, normals by
/// `B^{-T}`, weights are unchanged.
pub fn transport_certificate(cert: &Certificate, b: &Matrix, t: &Vector) -> Result<Certificate> {
    let bi = b.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("singular linear map".into()))?;
    let bit = bi.transpose();
    let map = |ps: &[WeightedPair]| {
        ps.iter().map(|p| WeightedPair { y: b * &p.y + t, a: &bit * &p.a, weight: p.weight }).collect()
    };
    Ok(Certificate { inner: map(&cert.inner), outer: map(&cert.outer) })
}

/// Affine map `x ↦ B x + t` sending the chain's ellipsoid to the unit ball, if any.
fn ball_frame(chain: &Chain) -> Option<(Matrix, Vector)> {
    if let Some(e) = chain.middle.as_ellipsoid() {
        if e.is_unit_ball(1e-12) {
            return None;
        }
        let m = e.whitening();
        let t = -(&m * e.center());
        return Some((m, t));
    }
    if chain.is_euclidean() {
        let e = chain.inner.as_ellipsoid().expect("euclidean bounds");
        if e.is_unit_ball(1e-12) && chain.outer.is_unit_ball(1e-12) {
            return None;
        }
        let m = e.whitening();
        let t = -(&m * &chain.c);
        return Some((m, t));
    }
    None
}

#[derive(Clone, Copy, PartialEq)]
enum Form {
    General,
    Symmetric,
}

fn lp_form(chain: &Chain) -> (Form, Vector, Vector) {
    let n = chain.dim();
    if chain.middle.is_unit_ball(1e-12) {
        (Form::Symmetric, Vector::zeros(n), Vector::zeros(n))
    } else if chain.inner.is_unit_ball(1e-12) && chain.outer.is_unit_ball(1e-12) {
        (Form::Symmetric, chain.c.clone(), chain.d.clone())
    } else {
        (Form::General, chain.c.clone(), chain.d.clone())
    }
}

fn augmented(p: &ContactPair, reference: &Vector, form: Form) -> (Vector, Vector) {
    let a = &p.a / p.a.dot(&(&p.y - reference));
    let m = (&p.y - reference) * a.transpose();
    let mut coords = match form {
        Form::General => flatten(&m),
        Form::Symmetric => vech(&symmetrize(&m)),
    };
    coords.extend(a.iter());
    (Vector::from_vec(coords), a)
}

/// Searches for a certificate on the contacts of `chain` within the relative
/// band `tol`; otherwise returns a falsifier.
pub fn find_certificate(chain: &Chain, tol: f64) -> Result<CertificateOutcome> {
    let base = chain.recentered()?;
    let Some((b, t)) = ball_frame(&base) else {
        return direct(chain, &base, tol);
    };
    let framed = transport_chain(&base, &b, &t)?;
    let bi = b.clone().try_inverse().ok_or_else(|| Error::Solver("singular ball frame".into()))?;
    let ti = -(&bi * &t);
    Ok(match direct_raw(&framed, tol)? {
        CertificateOutcome::Certificate(c) => CertificateOutcome::Certificate(
            transport_certificate(&c, &bi, &ti)?.renormalized(&chain.c, &chain.d)?,
        ),
        CertificateOutcome::Falsifier(f) => CertificateOutcome::Falsifier(f.transport(&bi, &ti)?),
    })
}

fn direct(chain: &Chain, base: &Chain, tol: f64) -> Result<CertificateOutcome> {
    Ok(match direct_raw(base, tol)? {
        CertificateOutcome::Certificate(c) => CertificateOutcome::Certificate(c.renormalized(&chain.c, &chain.d)?),
        f => f,
    })
}

struct ContactSystem {
    inner: Vec<ContactPair>,
    outer: Vec<ContactPair>,
    pin: Vec<(Vector, Vector)>,
    pout: Vec<(Vector, Vector)>,
    form: Form,
    iref: Vector,
    oref: Vector,
    mdim: usize,
}

impl ContactSystem {
    fn build(chain: &Chain, tol: f64) -> Result<ContactSystem> {
        let n = chain.dim();
        let inner = chain.inner_contacts(tol)?;
        let outer = chain.outer_contacts(tol)?;
        if inner.is_empty() || outer.is_empty() {
            return invalid("chain has an empty contact set; it is not tight");
        }
        let (form, iref, oref) = lp_form(chain);
        let mdim = match form {
            Form::General => n * n,
            Form::Symmetric => n * (n + 1) / 2,
        };
        let pin = inner.iter().map(|p| augmented(p, &iref, form)).collect();
        let pout = outer.iter().map(|p| augmented(p, &oref, form)).collect();
        Ok(ContactSystem { inner, outer, pin, pout, form, iref, oref, mdim })
    }

    fn points(&self) -> (Vec<Vector>, Vec<Vector>, Subspace) {
        let n = self.iref.len();
        (
            self.pin.iter().map(|p| p.0.clone()).collect(),
            self.pout.iter().map(|p| p.0.clone()).collect(),
            Subspace::coordinate(self.mdim + n, self.mdim),
        )
    }

    fn certificate(&self, k_weights: &[f64], l_weights: &[f64]) -> Certificate {
        let pick = |pairs: &[ContactPair], aug: &[(Vector, Vector)], w: &[f64]| -> Vec<WeightedPair> {
            pairs
                .iter()
                .zip(aug)
                .zip(w)
                .filter(|(_, &w)| w > 0.0)
                .map(|((p, a), &w)| WeightedPair { y: p.y.clone(), a: a.1.clone(), weight: w })
                .collect()
        };
        Certificate { inner: pick(&self.inner, &self.pin, k_weights), outer: pick(&self.outer, &self.pout, l_weights) }
    }
}

fn direct_raw(chain: &Chain, tol: f64) -> Result<CertificateOutcome> {
    let n = chain.dim();
    let sys = ContactSystem::build(chain, tol)?;
    let (kpts, lpts, u) = sys.points();
    match separate(&kpts, &lpts, &u)? {
        Separation::Intersecting { k_weights, l_weights, .. } => {
            Ok(CertificateOutcome::Certificate(sys.certificate(&k_weights, &l_weights)))
        }
        Separation::Separated { a, v, w, .. } => {
            let mdim = sys.mdim;
            let coords: Vec<f64> = a.iter().take(mdim).copied().collect();
            let g = match sys.form {
                Form::General => unflatten(&coords, n, n),
                Form::Symmetric => unvech(&coords, n),
            };
            let p = Vector::from_iterator(n, v.iter().skip(mdim).copied());
            let q = Vector::from_iterator(n, w.iter().skip(mdim).copied());
            let m = -g.transpose();
            let mut f = Falsifier {
                v: -(&m * &sys.iref) - p,
                w: -(&m * &sys.oref) - q,
                matrix: m,
                margin: 0.0,
                inner_ref: sys.iref.clone(),
                outer_ref: sys.oref.clone(),
            };
            f.margin = f.evaluate(&sys.inner, &sys.outer);
            Ok(CertificateOutcome::Falsifier(f))
        }
    }
}

/// Certificate on the contacts within the band `tol` whose balance equations
/// hold up to the relative residual `residual_tol`. Near an optimum the
/// attainable residual shrinks with the falsifier margin.
pub fn nearest_certificate(chain: &Chain, tol: f64, residual_tol: f64) -> Result<Certificate> {
    let base = chain.recentered()?;
    let nearest = |ch: &Chain| -> Result<Certificate> {
        let sys = ContactSystem::build(ch, tol)?;
        let (kpts, lpts, u) = sys.points();
        let (kw, lw, _) = closest_combination(&kpts, &lpts, &u, residual_tol)?;
        Ok(sys.certificate(&kw, &lw))
    };
    let Some((b, t)) = ball_frame(&base) else {
        return nearest(&base)?.renormalized(&chain.c, &chain.d);
    };
    let framed = transport_chain(&base, &b, &t)?;
    let bi = b.clone().try_inverse().ok_or_else(|| Error::Solver("singular ball frame".into()))?;
    let ti = -(&bi * &t);
    transport_certificate(&nearest(&framed)?, &bi, &ti)?.renormalized(&chain.c, &chain.d)
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
    pub support: usize,
    pub cardinality_bound: usize,
    pub inner_point_sum: Vector,
    pub outer_point_sum: Vector,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Re-derives every certificate condition against the chain. Boundary and
/// support conditions use the relative tolerance `tol`; algebraic residuals
/// must be below `1e-7` relative to the magnitude of the sums.
pub fn verify_certificate(chain: &Chain, cert: &Certificate, tol: f64) -> Result<VerifyReport> {
    let n = chain.dim();
    if cert.inner.iter().chain(&cert.outer).any(|p| p.y.len() != n || p.a.len() != n) {
        return invalid("certificate dimension differs from the chain");
    }
    let scale = chain.scale().max(1e-300);
    let sin = chain.scaled_inner()?;
    let sout = chain.scaled_outer()?;
    let mut checks = Vec::new();
    let mut push = |name, value: f64, threshold: f64| {
        checks.push(Check { name, value, threshold, passed: value <= threshold });
    };
    let empty = if cert.inner.is_empty() || cert.outer.is_empty() { 1.0 } else { 0.0 };
    push("nonempty", empty, 0.0);
    let neg = cert
        .inner
        .iter()
        .chain(&cert.outer)
        .map(|p| if p.weight > 0.0 && p.weight.is_finite() { 0.0 } else { 1.0 })
        .fold(0.0, f64::max);
    push("weights_positive", neg, 0.0);

    let mut norm_err: f64 = 0.0;
    let mut inner_bd: f64 = 0.0;
    let mut inner_sup: f64 = 0.0;
    for p in &cert.inner {
        norm_err = norm_err.max((p.a.dot(&(&p.y - &chain.c)) - 1.0).abs());
        let g1 = chain.middle.gauge(&p.y, Some(&chain.c))?;
        let g2 = sin.gauge(&p.y, Some(&chain.c))?;
        inner_bd = inner_bd.max((g1 - 1.0).abs()).max((g2 - 1.0).abs());
        inner_sup = inner_sup.max((chain.middle.support(&p.a) - p.a.dot(&p.y)) / (p.a.norm() * scale));
    }
    let mut outer_bd: f64 = 0.0;
    let mut outer_sup: f64 = 0.0;
    for p in &cert.outer {
        norm_err = norm_err.max((p.a.dot(&(&p.y - &chain.d)) - 1.0).abs());
        let g1 = chain.middle.gauge(&p.y, Some(&chain.c))?;
        let g2 = sout.gauge(&p.y, Some(&chain.d))?;
        outer_bd = outer_bd.max((g1 - 1.0).abs()).max((g2 - 1.0).abs());
        outer_sup = outer_sup.max((sout.support(&p.a) - p.a.dot(&p.y)) / (p.a.norm() * scale));
    }
    push("normalization", norm_err, 1e-9);
    push("inner_boundary", inner_bd, tol);
    push("inner_support", inner_sup, tol);
    push("outer_boundary", outer_bd, tol);
    push("outer_support", outer_sup, tol);

    let mass_m: f64 = cert.inner.iter().chain(&cert.outer).map(|p| p.weight * p.y.norm() * p.a.norm()).sum();
    let res_m = (cert.inner_matrix() - cert.outer_matrix()).norm();
    push("matrix_residual", res_m, 1e-7 * mass_m.max(1e-300));
    for (name, ps) in [("inner_vector_residual", &cert.inner), ("outer_vector_residual", &cert.outer)] {
        let sum = ps.iter().fold(Vector::zeros(n), |acc, p| acc + &p.a * p.weight);
        let mass: f64 = ps.iter().map(|p| p.weight * p.a.norm()).sum();
        push(name, sum.norm(), 1e-7 * mass.max(1e-300));
    }
    let ti: f64 = cert.inner.iter().map(|p| p.weight * p.y.dot(&p.a)).sum();
    let to: f64 = cert.outer.iter().map(|p| p.weight * p.y.dot(&p.a)).sum();
    let tm: f64 = cert.inner.iter().chain(&cert.outer).map(|p| p.weight * p.y.dot(&p.a).abs()).sum();
    push("trace_identity", (ti - to).abs(), 1e-7 * tm.max(1e-300));

    let passed = checks.iter().all(|c| c.passed);
    let (inner_point_sum, outer_point_sum) = if cert.support_size() > 0 {
        cert.weighted_point_sums()
    } else {
        (Vector::zeros(n), Vector::zeros(n))
    };
    Ok(VerifyReport {
        checks,
        passed,
        support: cert.support_size(),
        cardinality_bound: chain.cardinality_bound(),
        inner_point_sum,
        outer_point_sum,
    })
}

/// Shrinks the certificate to a basic solution of its weight system
/// (matrix identity, both vector identities, unit trace). The support then
/// respects the chain's cardinality bound.
pub fn reduce_certificate(chain: &Chain, cert: &Certificate) -> Result<Certificate> {
    let n = chain.dim();
    let cert = cert.renormalized(&chain.c, &chain.d)?;
    let (ni, no) = (cert.inner.len(), cert.outer.len());
    let scale = chain.scale().max(1e-300);
    let rows = n * n + 2 * n + 1;
    let mut cols = Matrix::zeros(rows, ni + no);
    for (j, p) in cert.inner.iter().chain(&cert.outer).enumerate() {
        let is_inner = j < ni;
        let (reference, sign) = if is_inner { (&chain.c, 1.0) } else { (&chain.d, -1.0) };
        let m = (&p.y - reference) * p.a.transpose();
        for (k, x) in flatten(&m).into_iter().enumerate() {
            cols[(k, j)] = sign * x;
        }
        let off = if is_inner { n * n } else { n * n + n };
        for k in 0..n {
            cols[(off + k, j)] = p.a[k] * scale;
        }
        cols[(rows - 1, j)] = if is_inner { 1.0 } else { 0.0 };
    }
    let mut w: Vec<f64> = cert.inner.iter().chain(&cert.outer).map(|p| p.weight).collect();
    caratheodory(&cols, &mut w, 1e-9);
    let keep = |ps: &[WeightedPair], ws: &[f64]| -> Vec<WeightedPair> {
        ps.iter()
            .zip(ws)
            .filter(|(_, &w)| w > 0.0)
            .map(|(p, &w)| WeightedPair { weight: w, ..p.clone() })
            .collect()
    };
    let out = Certificate { inner: keep(&cert.inner, &w[..ni]), outer: keep(&cert.outer, &w[ni..]) };
    let bound = chain.cardinality_bound();
    if out.support_size() > bound {
        return Err(Error::ReductionInfeasible { support: out.support_size(), cap: bound });
    }
    Ok(out)
}

/// Inverse bookkeeping for [`euclidean_specialize`].
#[derive(Debug, Clone)]
pub struct Backmap {
    linear_inv: Matrix,
    shift_inv: Vector,
    swapped: Option<SwapData>,
    refs: (Vector, Vector),
}

#[derive(Debug, Clone)]
struct SwapData {
    r: f64,
    big_r: f64,
    c: Vector,
    d: Vector,
}

impl Backmap {
    /// Maps a certificate of the specialized chain to one of the original chain.
    pub fn certificate(&self, cert: &Certificate) -> Result<Certificate> {
        let framed = match &self.swapped {
            None => cert.clone(),
            Some(s) => {
                let n = s.c.len();
                let z = Vector::zeros(n);
                let c0 = cert.renormalized(&z, &z)?;
                let inner = c0
                    .outer
                    .iter()
                    .map(|p| WeightedPair { y: &p.y * s.r + &s.c, a: &p.a / s.r, weight: p.weight })
                    .collect();
                let outer = c0
                    .inner
                    .iter()
                    .map(|p| WeightedPair { y: &p.y * s.big_r + &s.d, a: &p.a / s.big_r, weight: p.weight })
                    .collect();
                Certificate { inner, outer }
            }
        };
        transport_certificate(&framed, &self.linear_inv, &self.shift_inv)?.renormalized(&self.refs.0, &self.refs.1)
    }
}

/// Affinely normalizes a chain so its ellipsoid becomes the unit ball in the
/// middle. Chains bounded by two ellipsoids of one shape are turned inside
/// out: `r B + c ⊆ K ⊆ R B + d` becomes `(1/R)(K - d) ⊆ B ⊆ (1/r)(K - c)`.
pub fn euclidean_specialize(chain: &Chain) -> Result<(Chain, Backmap)> {
    let n = chain.dim();
    let base = chain.recentered()?;
    let refs = (chain.c.clone(), chain.d.clone());
    if let Some(e) = base.middle.as_ellipsoid() {
        let m = e.whitening();
        let t = -(&m * e.center());
        let ch = transport_chain(&base, &m, &t)?;
        let bi = m.try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
        let ti = -(&bi * &t);
        return Ok((ch, Backmap { linear_inv: bi, shift_inv: ti, swapped: None, refs }));
    }
    if !base.is_euclidean() {
        return invalid("chain has no ellipsoid to normalize");
    }
    let e = base.inner.as_ellipsoid().expect("euclidean bounds");
    let m = e.whitening();
    let t = -(&m * &base.c);
    let framed = transport_chain(&base, &m, &t)?;
    let (r, big_r) = (framed.r, framed.big_r);
    let k_shape = framed.middle.clone();
    let swapped = Chain::new(
        k_shape.clone(),
        1.0 / big_r,
        -&framed.d / big_r,
        Body::Ellipsoid(crate::convex_bodies::Ellipsoid::unit_ball(n)),
        k_shape,
        1.0 / r,
        -&framed.c / r,
    )?;
    let bi = m.try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
    let ti = -(&bi * &t);
    let swap = SwapData { r, big_r, c: framed.c.clone(), d: framed.d.clone() };
    Ok((swapped, Backmap { linear_inv: bi, shift_inv: ti, swapped: Some(swap), refs }))
}

#[derive(Debug, Clone)]
pub struct HomothetyCheck {
    pub passed: bool,
    pub normals: Vec<Vector>,
    /// Convex weights on the normals summing to zero, when they exist.
    pub weights: Option<Vec<f64>>,
}

/// Necessary condition for `R` to be the least homothety ratio with
/// `K ⊆ R*C + v`: the origin lies in the convex hull of the outer normals at
/// the common boundary points.
pub fn homothety_optimality_check(k: &Body, c: &Body, big_r: f64, v: &Vector, tol: f64) -> Result<HomothetyCheck> {
    if !(big_r > 0.0) {
        return invalid("homothety ratio must be positive");
    }
    let outer = c.homothet(big_r, v)?;
    let reference = c.interior_point() * big_r + v;
    let pairs = contacts(k, &outer, tol, &reference)?;
    let normals: Vec<Vector> = pairs.iter().map(|p| &p.a / p.a.norm()).collect();
    if normals.is_empty() {
        return Ok(HomothetyCheck { passed: false, normals, weights: None });
    }
    let n = k.dim();
    let m = normals.len();
    let mut lp = LinearProgram::maximize(vec![0.0; m]);
    for i in 0..n {
        lp.constrain(normals.iter().map(|a| a[i]).collect(), Relation::Eq, 0.0);
    }
    lp.constrain(vec![1.0; m], Relation::Eq, 1.0);
    let weights = match lp.solve() {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    };
    Ok(HomothetyCheck { passed: weights.is_some(), normals, weights })
}
