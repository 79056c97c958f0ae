//! Descent over affine positions with certificate-based stopping.
//!
//! Each iteration rebuilds the chain from the two homothet subproblems in the
//! current frame, extracts contacts within a relative band and asks the
//! separation step for a certificate. A certificate at the final band stops
//! the search; a falsifier `(A, v, w)` gives the step `x ↦ (I + tA) x`, sized
//! by backtracking on the ratio.

use crate::certificates::{
    find_certificate, nearest_certificate, transport_certificate, transport_chain, verify_certificate, Certificate, CertificateOutcome,
    Chain, VerifyReport,
};
use crate::convex_bodies::{inner_homothet, outer_homothet, Body, ContactPair, Ellipsoid, Polytope};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::error::{invalid, Error, Result};
use crate::linalg::{gaussian_matrix, orthonormalize, sym_power};
use crate::mean_ellipsoids::{simultaneous_mean, MeanPath};
use crate::{Matrix, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Stop when the falsifier margin drops below this, and the final contact band.
    pub opt_tol: f64,
    pub max_iter: usize,
    pub initial_band: f64,
    pub band_floor: f64,
    pub seed: u64,
    /// Starting linear frame; identity when absent.
    pub initial_frame: Option<Matrix>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { opt_tol: 1e-8, max_iter: 500, initial_band: 1e-4, band_floor: 1e-9, seed: 0, initial_frame: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    CertifiedOptimal,
    ToleranceReached,
    IterationCap,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::CertifiedOptimal => "certified-optimal",
            Status::ToleranceReached => "tolerance-reached",
            Status::IterationCap => "iteration-cap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub iteration: usize,
    pub ratio: f64,
    pub band: f64,
    pub margin: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Optimal chain in the input coordinates.
    pub chain: Chain,
    pub ratio: f64,
    pub status: Status,
    pub certificate: Option<Certificate>,
    pub report: Option<VerifyReport>,
    /// Contact band at which the certificate was found.
    pub band: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    /// Linear frame reached by the descent.
    pub frame: Matrix,
}

enum Problem {
    /// Ellipsoidal bounds; the frame acts on the body.
    BallBounds { body: Body, anchor: Vector },
    /// Ellipsoid in the middle; the frame acts on the ball, inversely on the bounds.
    BallMiddle { inner: Body, outer: Body },
    /// Polytopes only; the frame acts on the middle body.
    General { inner: Body, middle: Body, outer: Body, anchor: Vector },
}

impl Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::BallBounds { body, .. } => body.dim(),
            Problem::BallMiddle { inner, .. } => inner.dim(),
            Problem::General { middle, .. } => middle.dim(),
        }
    }

    fn euclidean(&self) -> bool {
        !matches!(self, Problem::General { .. })
    }

    fn chain_at(&self, f: &Matrix) -> Result<Chain> {
        let n = self.dim();
        let ball = Body::Ellipsoid(Ellipsoid::unit_ball(n));
        match self {
            Problem::BallBounds { body, anchor } => {
                let k = body.affine_image(f, &-(f * anchor))?;
                Chain::from_homothets(ball.clone(), k, ball)
            }
            Problem::BallMiddle { inner, outer } => {
                let fi = f.clone().try_inverse().ok_or_else(|| Error::Solver("singular frame".into()))?;
                let z = Vector::zeros(n);
                Chain::from_homothets(inner.affine_image(&fi, &z)?, ball, outer.affine_image(&fi, &z)?)
            }
            Problem::General { inner, middle, outer, anchor } => {
                let m = middle.affine_image(f, &-(f * anchor))?;
                Chain::from_homothets(inner.clone(), m, outer.clone())
            }
        }
    }

    /// Frame after the step `I + t A` taken in framed coordinates.
    fn stepped(&self, f: &Matrix, a: &Matrix, t: f64) -> Matrix {
        let n = self.dim();
        let s = Matrix::identity(n, n) + a * t;
        let g = match self {
            Problem::BallMiddle { .. } => f * s,
            _ => s * f,
        };
        normalize_frame(g)
    }

    /// `A` with `stepped(from, A, 1) = to` up to scale.
    fn displacement(&self, from: &Matrix, to: &Matrix) -> Option<Matrix> {
        let n = self.dim();
        let fi = from.clone().try_inverse()?;
        let s = match self {
            Problem::BallMiddle { .. } => fi * to,
            _ => to * fi,
        };
        Some(s - Matrix::identity(n, n))
    }

    /// A step direction chosen at some frame, re-expressed at the frame reached
    /// after moving `t` along it.
    fn carried(&self, a: &Matrix, t: f64) -> Option<Matrix> {
        let n = self.dim();
        let s = (Matrix::identity(n, n) + a * t).try_inverse()?;
        Some(match self {
            Problem::BallMiddle { .. } => s * a,
            _ => a * s,
        })
    }

    /// Affine map from framed to input coordinates, and the chain expressed there.
    fn unframe(&self, chain: &Chain, f: &Matrix) -> Result<(Matrix, Vector, Chain)> {
        let n = self.dim();
        match self {
            Problem::BallBounds { body, anchor } | Problem::General { middle: body, anchor, .. } => {
                let fi = f.clone().try_inverse().ok_or_else(|| Error::Solver("singular frame".into()))?;
                let mut ch = transport_chain(chain, &fi, anchor)?;
                ch.middle = body.clone();
                if let Problem::General { inner, outer, .. } = self {
                    ch.inner = inner.clone();
                    ch.outer = outer.clone();
                }
                Ok((fi, anchor.clone(), ch))
            }
            Problem::BallMiddle { inner, outer } => {
                let z = Vector::zeros(n);
                let mut ch = transport_chain(chain, f, &z)?;
                ch.inner = inner.clone();
                ch.outer = outer.clone();
                Ok((f.clone(), z, ch))
            }
        }
    }
}

/// Residual accepted for a certificate once the falsifier margin is below tolerance.
const NEAREST_TOL: f64 = 5e-8;
/// Consecutive band widenings allowed after failed line searches.
const MAX_WIDEN: usize = 3;
/// Extra descent steps taken below the tolerance while no decomposition verifies.
const POLISH_STEPS: usize = 20;

/// `max_v min_i <a_i, A y_i + v>` over the pairs, or with `lower` unset,
/// `min_w max_j <b_j, A z_j + w>`.
fn best_shift(pairs: &[ContactPair], a: &Matrix, lower: bool) -> Option<f64> {
    let n = a.nrows();
    // Variables: v+ (n), v- (n), s+, s-.
    let mut obj = vec![0.0; 2 * n + 2];
    let sign = if lower { 1.0 } else { -1.0 };
    obj[2 * n] = sign;
    obj[2 * n + 1] = -sign;
    let mut lp = LinearProgram::maximize(obj);
    for p in pairs {
        let base = p.a.dot(&(a * &p.y));
        let mut row = vec![0.0; 2 * n + 2];
        for i in 0..n {
            row[i] = -sign * p.a[i];
            row[n + i] = sign * p.a[i];
        }
        row[2 * n] = sign;
        row[2 * n + 1] = -sign;
        lp.constrain(row, Relation::Le, sign * base);
    }
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Some(sign * value),
        _ => None,
    }
}

/// One-sided derivative of `log(R / r)` when the middle body moves by
/// `x ↦ (I + sA) x`, with both translations chosen optimally.
fn slope(chain: &Chain, a: &Matrix, band: f64) -> Option<f64> {
    let inner = chain.inner_contacts(band).ok()?;
    let outer = chain.outer_contacts(band).ok()?;
    Some(best_shift(&outer, a, false)? - best_shift(&inner, a, true)?)
}

/// Line search on the sign of the slope, for steps whose effect on the ratio
/// is below rounding. Returns the last point before the slope turns
/// nonnegative, provided the ratio has not grown beyond rounding.
fn slope_search(problem: &Problem, f: &Matrix, a: &Matrix, chain: &Chain, band: f64) -> Option<(f64, Matrix, Chain)> {
    if slope(chain, a, band)? >= 0.0 {
        return None;
    }
    let eval = |t: f64| -> Option<(f64, Matrix, Chain)> {
        let g = problem.stepped(f, a, t);
        let ch = problem.chain_at(&g).ok()?;
        let sl = slope(&ch, &problem.carried(a, t)?, band)?;
        Some((sl, g, ch))
    };
    let mut hi = 0.25;
    let mut lo = None;
    for _ in 0..40 {
        let t = hi * 0.5;
        match eval(t) {
            Some((sl, g, ch)) if sl < 0.0 => {
                lo = Some((t, g, ch));
                break;
            }
            _ => hi = t,
        }
    }
    let (mut t_lo, mut g_lo, mut ch_lo) = lo?;
    for _ in 0..30 {
        let mid = 0.5 * (t_lo + hi);
        match eval(mid) {
            Some((sl, g, ch)) if sl < 0.0 => {
                t_lo = mid;
                g_lo = g;
                ch_lo = ch;
            }
            _ => hi = mid,
        }
    }
    (ch_lo.ratio() <= chain.ratio() * (1.0 + ROUNDING)).then_some((t_lo, g_lo, ch_lo))
}

/// Steps of growing length from `f` along the displacement from `h` to `f`;
/// returns the best point if it improves on `chain`.
fn pattern_move(problem: &Problem, h: &Matrix, f: &Matrix, chain: &Chain) -> Option<(Matrix, Chain)> {
    let p = problem.displacement(h, f)?;
    let mut best: Option<(Matrix, Chain)> = None;
    let mut s = 0.5;
    for _ in 0..12 {
        let g = problem.stepped(f, &p, s);
        let Ok(ch) = problem.chain_at(&g) else { break };
        let target = best.as_ref().map_or(chain.ratio(), |b| b.1.ratio());
        if ch.ratio() >= target {
            break;
        }
        best = Some((g, ch));
        s *= 2.0;
    }
    best
}

fn nearest_within(chain: &Chain, band: f64) -> Option<Certificate> {
    [1.0, 10.0, 100.0].iter().find_map(|k| {
        let c = nearest_certificate(chain, band, k * NEAREST_TOL).ok()?;
        verify_certificate(chain, &c, (10.0 * band).max(1e-9)).ok()?.passed.then_some(c)
    })
}

/// Relative growth of the ratio tolerated as rounding in the slope search.
const ROUNDING: f64 = 1e-12;

fn normalize_frame(f: Matrix) -> Matrix {
    let n = f.nrows();
    let det = f.determinant().abs();
    if det > 0.0 && det.is_finite() {
        f / det.powf(1.0 / n as f64)
    } else {
        f
    }
}

fn descend(problem: &Problem, opts: &SolveOptions) -> Result<SolveResult> {
    let n = problem.dim();
    if !(opts.opt_tol > 0.0) || !(opts.band_floor > 0.0) || !(opts.initial_band > 0.0) {
        return invalid("tolerances must be positive");
    }
    let mut f = match &opts.initial_frame {
        Some(m) => {
            if m.nrows() != n || m.ncols() != n || m.determinant().abs() < 1e-12 {
                return invalid("initial frame must be an invertible square matrix of the body's dimension");
            }
            normalize_frame(m.clone())
        }
        None => Matrix::identity(n, n),
    };
    let final_band = opts.band_floor.max(opts.opt_tol);
    let mut band = opts.initial_band.max(final_band);
    let mut chain = problem.chain_at(&f)?;
    let mut trace = Vec::new();
    let mut status = Status::IterationCap;
    let mut found: Option<Certificate> = None;
    let mut iterations = 0;
    let mut widened = 0;
    let mut previous: Option<Matrix> = None;
    let mut polish = POLISH_STEPS;
    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let ratio = chain.ratio();
        let fs = match find_certificate(&chain, band)? {
            CertificateOutcome::Certificate(cert) => {
                trace.push(TraceEntry { iteration: iter, ratio, band, margin: None, step: None });
                if band <= final_band {
                    found = Some(cert);
                    status = Status::CertifiedOptimal;
                    break;
                }
                band = (band * 0.1).max(final_band);
                continue;
            }
            CertificateOutcome::Falsifier(fs) => fs,
        };
        let margin = fs.margin;
        if margin <= opts.opt_tol {
            trace.push(TraceEntry { iteration: iter, ratio, band, margin: Some(margin), step: None });
            if band > final_band {
                band = (band * 0.1).max(final_band);
                continue;
            }
            found = nearest_within(&chain, band);
            if found.is_some() || polish == 0 {
                status = if found.is_some() { Status::CertifiedOptimal } else { Status::ToleranceReached };
                break;
            }
            // Keep descending: the residual of the nearest decomposition can
            // exceed the margin by the number of coordinates.
            polish -= 1;
            trace.pop();
        }
        let mut t = 0.25;
        let mut accepted: Option<(f64, Matrix, Chain)> = None;
        for _ in 0..30 {
            let g = problem.stepped(&f, &fs.matrix, t);
            if let Ok(ch) = problem.chain_at(&g) {
                let rr = ch.ratio();
                match &accepted {
                    None if rr < ratio => accepted = Some((t, g, ch)),
                    Some((_, _, best)) if rr < best.ratio() => accepted = Some((t, g, ch)),
                    Some(_) => break,
                    None => {}
                }
            }
            t *= 0.5;
        }
        if accepted.is_none() {
            accepted = slope_search(problem, &f, &fs.matrix, &chain, band);
        }
        trace.push(TraceEntry { iteration: iter, ratio, band, margin: Some(margin), step: accepted.as_ref().map(|a| a.0) });
        if accepted.is_none() {
            previous = None;
        }
        match accepted {
            Some((_, g, ch)) => {
                let before = std::mem::replace(&mut f, g);
                chain = ch;
                widened = 0;
                // Zigzagging steps: extrapolate along the last two steps.
                if let Some((g, ch)) = previous.as_ref().and_then(|h| pattern_move(problem, h, &f, &chain)) {
                    previous = Some(std::mem::replace(&mut f, g));
                    chain = ch;
                } else {
                    previous = Some(before);
                }
                if margin < 10.0 * opts.opt_tol {
                    band = (band * 0.1).max(final_band);
                }
            }
            None if band > final_band && widened == 0 => band = (band * 0.1).max(final_band),
            None if widened < MAX_WIDEN => {
                // Nearly active contacts outside the band block the step.
                widened += 1;
                band = (band * 10.0).min(opts.initial_band.max(final_band));
            }
            None => {
                status = Status::ToleranceReached;
                break;
            }
        }
    }
    if found.is_none() {
        found = nearest_within(&chain, band);
    }
    if status == Status::CertifiedOptimal && !problem.euclidean() {
        status = Status::ToleranceReached;
    }
    let (b, t, out_chain) = problem.unframe(&chain, &f)?;
    let mut certificate = None;
    let mut report = None;
    if let Some(cert) = found {
        let c = transport_certificate(&cert, &b, &t)?.renormalized(&out_chain.c, &out_chain.d)?;
        let rep = verify_certificate(&out_chain, &c, (10.0 * band).max(1e-9))?;
        if status == Status::CertifiedOptimal && !rep.passed {
            status = Status::ToleranceReached;
        }
        certificate = Some(c);
        report = Some(rep);
    }
    Ok(SolveResult {
        ratio: out_chain.ratio(),
        chain: out_chain,
        status,
        certificate,
        report,
        band,
        iterations,
        trace,
        frame: f,
    })
}

/// Affinely optimal chain `r E + c ⊆ K ⊆ R E + d` over ellipsoids `E`; the
/// ratio is the Banach-Mazur distance from `K` to the ball.
pub fn solve_distance_to_ball(body: &Body, opts: &SolveOptions) -> Result<SolveResult> {
    let anchor = body.interior_point();
    descend(&Problem::BallBounds { body: body.clone(), anchor }, opts)
}

/// Affinely optimal chain `r L1 + c ⊆ E ⊆ R L2 + d` over ellipsoids `E`.
/// Both bodies must contain the origin in their interior.
pub fn solve_ball_between(l1: &Body, l2: &Body, opts: &SolveOptions) -> Result<SolveResult> {
    if l1.dim() != l2.dim() {
        return invalid("dimension mismatch");
    }
    descend(&Problem::BallMiddle { inner: l1.clone(), outer: l2.clone() }, opts)
}

/// Descent for chains of polytopes only. Such chains are never reported as
/// certified: the decomposition is necessary but not sufficient there.
pub fn solve_general(l1: &Body, middle: &Body, l2: &Body, opts: &SolveOptions) -> Result<SolveResult> {
    let anchor = middle.interior_point();
    descend(&Problem::General { inner: l1.clone(), middle: middle.clone(), outer: l2.clone(), anchor }, opts)
}

fn translated(body: &Body, shift: &Vector) -> Result<Body> {
    let n = body.dim();
    body.affine_image(&Matrix::identity(n, n), shift)
}

/// `K - K`.
pub fn difference_body(k: &Body) -> Result<Body> {
    match k {
        Body::Polytope(p) => {
            let mut pts = Vec::new();
            for a in p.vertices() {
                for b in p.vertices() {
                    pts.push(a - b);
                }
            }
            Ok(Body::Polytope(Polytope::from_vertices(&pts)?))
        }
        Body::Ellipsoid(e) => Ok(Body::Ellipsoid(Ellipsoid::new(Vector::zeros(e.dim()), e.shape() / 4.0)?)),
    }
}

/// Points `y, z` of `K` and a functional `b` (unit in the dual norm of `L`)
/// with `<y - z, b> = D(K, L)`.
#[derive(Debug, Clone)]
pub struct DiameterTriple {
    pub y: Vector,
    pub z: Vector,
    pub b: Vector,
}

#[derive(Debug, Clone)]
pub struct DiamRadResult {
    pub solve: SolveResult,
    /// `K` in the optimal position relative to the fixed `L`.
    pub position: Body,
    pub diameter: f64,
    pub inradius: f64,
    pub triples: Vec<DiameterTriple>,
}

fn dual_unit(l: &Body, x: &Vector) -> Result<Vector> {
    let n = l.dim();
    let z = Vector::zeros(n);
    match l {
        Body::Ellipsoid(e) => {
            let q = e.shape() * x;
            let g = x.dot(&q).sqrt();
            Ok(q / g)
        }
        Body::Polytope(p) => {
            let mut best = (f64::NEG_INFINITY, 0);
            for (i, f) in p.facets().iter().enumerate() {
                let v = f.normal.dot(x) / (f.offset - f.normal.dot(&z));
                if v > best.0 {
                    best = (v, i);
                }
            }
            let f = &p.facets()[best.1];
            Ok(&f.normal / f.offset)
        }
    }
}

/// Diameter and inradius of `K` measured by `L`.
pub fn diameter_inradius(k: &Body, l: &Body) -> Result<(f64, f64, Vec<DiameterTriple>)> {
    let z = Vector::zeros(l.dim());
    let pts: Vec<Vector> = match k {
        Body::Polytope(p) => p.vertices().to_vec(),
        Body::Ellipsoid(_) => return invalid("diameter triples need a polytope"),
    };
    let mut d = 0.0f64;
    for a in &pts {
        for b in &pts {
            d = d.max(l.gauge(&(a - b), Some(&z))?);
        }
    }
    let mut triples = Vec::new();
    for a in &pts {
        for b in &pts {
            let x = a - b;
            if l.gauge(&x, Some(&z))? >= d * (1.0 - 1e-9) {
                triples.push(DiameterTriple { y: a.clone(), z: b.clone(), b: dual_unit(l, &x)? * d });
            }
        }
    }
    for t in triples.iter_mut() {
        let s = (&t.y - &t.z).dot(&t.b);
        t.b *= d / s;
    }
    let (r, _) = inner_homothet(k, l)?;
    Ok((d, r, triples))
}

/// Position of `K` minimizing `D(K, L) / r(K, L)` for an origin-symmetric `L`,
/// through the chain `(1/D)(K - K) ⊆ L ⊆ (1/r)(K - c)`.
pub fn diameter_inradius_position(k: &Body, l: &Body, opts: &SolveOptions) -> Result<DiamRadResult> {
    if k.dim() != l.dim() {
        return invalid("dimension mismatch");
    }
    if !l.is_origin_symmetric(1e-9) {
        return invalid("L must be origin-symmetric");
    }
    let n = k.dim();
    let kc = translated(k, &-k.interior_point())?;
    let diff = difference_body(&kc)?;
    let (solve, position) = match l {
        Body::Ellipsoid(e) => {
            let s = solve_ball_between(&diff, &kc, opts)?;
            // Framed bounds are F^{-1} K; bring the unit ball back to L.
            let w = e.whitening();
            let wi = w.clone().try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
            let fi = s.frame.clone().try_inverse().ok_or_else(|| Error::Solver("singular frame".into()))?;
            let pos = kc.affine_image(&(wi * fi), &Vector::zeros(n))?;
            (s, pos)
        }
        Body::Polytope(_) => {
            let s = solve_general(&diff, l, &kc, opts)?;
            let fi = s.frame.clone().try_inverse().ok_or_else(|| Error::Solver("singular frame".into()))?;
            let pos = kc.affine_image(&fi, &Vector::zeros(n))?;
            (s, pos)
        }
    };
    let (diameter, inradius, triples) = diameter_inradius(&position, l)?;
    Ok(DiamRadResult { solve, position, diameter, inradius, triples })
}

/// Optimal chain `r K + c ⊆ E ⊆ R (-K) + d` over ellipsoids `E`.
pub fn grunbaum_chain(k: &Body, opts: &SolveOptions) -> Result<SolveResult> {
    let n = k.dim();
    let kc = translated(k, &-k.interior_point())?;
    let neg = kc.affine_image(&(-Matrix::identity(n, n)), &Vector::zeros(n))?;
    solve_ball_between(&kc, &neg, opts)
}

fn same_body(a: &Body, b: &Body) -> bool {
    let t = 1e-9 * a.scale().max(1.0);
    match (a, b) {
        (Body::Polytope(p), Body::Polytope(q)) => {
            p.vertices().len() == q.vertices().len()
                && p.vertices().iter().all(|v| q.vertices().iter().any(|w| (v - w).norm() <= t))
        }
        (Body::Ellipsoid(e), Body::Ellipsoid(f)) => {
            (e.center() - f.center()).norm() <= t && (e.shape() - f.shape()).norm() <= 1e-9 * e.shape().norm()
        }
        _ => false,
    }
}

fn ellipsoid_bounds(ch: &Chain) -> Result<(Ellipsoid, Vector, Vector)> {
    let (Some(a), Some(b)) = (ch.inner.as_ellipsoid(), ch.outer.as_ellipsoid()) else {
        return invalid("chain bounds must be ellipsoids");
    };
    if (a.shape() - b.shape()).norm() > 1e-9 * a.shape().norm() {
        return invalid("chain bounds must share one ellipsoid shape");
    }
    let n = ch.dim();
    let shape = Ellipsoid::new(Vector::zeros(n), a.shape().clone())?;
    Ok((shape, &ch.c + a.center() * ch.r, &ch.d + b.center() * ch.big_r))
}

/// Chain built from the inner and outer means of two chains for the same body.
pub fn improve_by_mean(a: &Chain, b: &Chain, lambda: f64, mu: Option<&[f64]>) -> Result<Chain> {
    if !same_body(&a.middle, &b.middle) {
        return invalid("chains describe different bodies");
    }
    let n = a.dim();
    let (ea, ca, da) = ellipsoid_bounds(a)?;
    let (eb, cb, db) = ellipsoid_bounds(b)?;
    let w = ea.whitening();
    let wi = w.clone().try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
    let z = Vector::zeros(n);
    let eb_frame = eb.affine_image(&w, &z)?;
    let path = MeanPath::new(
        eb_frame.axes().clone(),
        eb_frame.half_lengths().to_vec(),
        [a.r, b.r],
        [a.big_r, b.big_r],
        [&w * ca, &w * cb],
        [&w * da, &w * db],
    )?;
    let (inner, outer, _) = simultaneous_mean(&path, lambda, mu)?;
    let shape = Ellipsoid::from_axes(z.clone(), &path.axes, &path.alphas.iter().map(|x| x.powf(lambda)).collect::<Vec<_>>())?;
    let shape = Body::Ellipsoid(shape.affine_image(&wi, &z)?);
    Chain::new(
        shape.clone(),
        inner.radius,
        &wi * inner.ellipsoid.center(),
        a.middle.clone(),
        shape,
        outer.radius,
        &wi * outer.ellipsoid.center(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    /// Distance exceeds `dim - 1`, which forces a unique pair.
    ByDistanceBound,
    /// No second pair was found by restarts or the stretch probe.
    Probed,
}

impl Uniqueness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Uniqueness::ByDistanceBound => "unique (distance bound)",
            Uniqueness::Probed => "unique (probed)",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaureyLevel {
    pub dim: usize,
    pub ratio: f64,
    pub status: Status,
    pub distinct_pair: bool,
    /// Largest distance between outer centers over restarts, relative to scale.
    pub outer_center_spread: f64,
    /// Basis of the next subspace in this level's normalized coordinates.
    pub subspace: Option<Matrix>,
}

#[derive(Debug, Clone)]
pub struct MaureyResult {
    pub levels: Vec<MaureyLevel>,
    pub uniqueness: Uniqueness,
    pub ratio: f64,
}

fn restart_frames(n: usize, count: usize, seed: u64) -> Vec<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let f = Matrix::identity(n, n) + gaussian_matrix(n, n, &mut rng) * 0.3;
            if f.determinant().abs() > 0.1 {
                break f;
            }
        })
        .collect()
}

fn run_restarts(body: &Body, opts: &SolveOptions, frames: Vec<Matrix>, jobs: usize) -> Vec<Result<SolveResult>> {
    let jobs = jobs.max(1).min(frames.len().max(1));
    let solve = |f: Matrix| {
        let mut o = opts.clone();
        o.initial_frame = Some(f);
        solve_distance_to_ball(body, &o)
    };
    if jobs == 1 {
        return frames.into_iter().map(solve).collect();
    }
    let mut slots: Vec<Option<Result<SolveResult>>> = (0..frames.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let mine: Vec<(usize, Matrix)> =
                    frames.iter().cloned().enumerate().filter(|(i, _)| i % jobs == j).collect();
                let solve = &solve;
                s.spawn(move || mine.into_iter().map(|(i, f)| (i, solve(f))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("restart thread") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("filled")).collect()
}

/// Outer ellipsoid `R E + d` as (shape of the actual body, center).
fn outer_body(ch: &Chain) -> Option<(Matrix, Vector)> {
    let e = ch.outer.as_ellipsoid()?;
    Some((e.shape() / (ch.big_r * ch.big_r), &ch.d + e.center() * ch.big_r))
}

fn inner_body(ch: &Chain) -> Option<(Matrix, Vector)> {
    let e = ch.inner.as_ellipsoid()?;
    Some((e.shape() / (ch.r * ch.r), &ch.c + e.center() * ch.r))
}

/// Searches for a second optimal ellipsoid by stretching the normalized
/// ellipsoid across the complement of the contact directions.
fn stretch_probe(framed: &Chain, band: f64) -> Result<Option<(Matrix, Vector)>> {
    let n = framed.dim();
    let mut dirs: Vec<Vector> = Vec::new();
    for p in framed.inner_contacts(band)? {
        dirs.push((&p.y - &framed.c) / framed.r);
    }
    for p in framed.outer_contacts(band)? {
        dirs.push((&p.y - &framed.d) / framed.big_r);
    }
    let span = orthonormalize(&Matrix::from_columns(&dirs), 1e-6);
    if span.ncols() >= n {
        return Ok(None);
    }
    let comp = crate::linalg::complement(&span);
    let basis = Matrix::from_columns(
        &(0..span.ncols()).map(|j| span.column(j).into_owned()).chain((0..comp.ncols()).map(|j| comp.column(j).into_owned())).collect::<Vec<_>>(),
    );
    for s in [0.05, 0.02, 0.01, -0.02] {
        let mut h = vec![1.0; n];
        for hi in h.iter_mut().skip(span.ncols()) {
            *hi = 1.0 + s;
        }
        let e = Body::Ellipsoid(Ellipsoid::from_axes(Vector::zeros(n), &basis, &h)?);
        let (r, c) = inner_homothet(&framed.middle, &e)?;
        let (big_r, _) = outer_homothet(&framed.middle, &e)?;
        if big_r / r <= framed.ratio() * (1.0 + 1e-9) {
            let shape = e.as_ellipsoid().expect("ellipsoid").shape() / (r * r);
            return Ok(Some((shape, c)));
        }
    }
    Ok(None)
}

/// Recursive uniqueness probe for distance ellipsoids. Whenever a second
/// optimal pair is found, the body is projected onto the subspace where the
/// two normalized ellipsoids agree and whose normal to the center offset, and
/// the search continues there.
pub fn maurey_reduce(k: &Body, opts: &SolveOptions, restarts: usize, jobs: usize) -> Result<MaureyResult> {
    let mut levels = Vec::new();
    let mut body = k.clone();
    loop {
        let n = body.dim();
        let scale = body.scale().max(1e-300);
        let base = solve_distance_to_ball(&body, opts)?;
        let frames = restart_frames(n, restarts, opts.seed.wrapping_add(levels.len() as u64));
        let runs = run_restarts(&body, opts, frames, jobs);
        let (_, d0) = outer_body(&base.chain).expect("ellipsoid bounds");
        let (p0, c0) = inner_body(&base.chain).expect("ellipsoid bounds");
        let mut spread = 0.0f64;
        let mut other: Option<(Matrix, Vector)> = None;
        for run in runs {
            let run = run?;
            let (_, d1) = outer_body(&run.chain).expect("ellipsoid bounds");
            spread = spread.max((&d1 - &d0).norm() / scale);
            let (p1, c1) = inner_body(&run.chain).expect("ellipsoid bounds");
            let shape_gap = (&p1 / p1.norm() - &p0 / p0.norm()).norm();
            if other.is_none() && (shape_gap > 1e-4 || (&c1 - &c0).norm() > 1e-4 * scale) {
                other = Some((p1, c1));
            }
        }
        // Normalize the base pair to the ball.
        let w = sym_power(&p0, 0.5);
        let t = -(&w * &c0);
        let framed = transport_chain(&base.chain, &w, &t)?;
        if other.is_none() {
            if let Some((shape, c)) = stretch_probe(&framed, base.band.max(1e-7) * 10.0)? {
                let wi = w.clone().try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
                other = Some((&w * shape * &w, &wi * (c - &t)));
            }
        }
        let ratio = base.ratio;
        let Some((p1, c1)) = other else {
            levels.push(MaureyLevel { dim: n, ratio, status: base.status, distinct_pair: false, outer_center_spread: spread, subspace: None });
            let uniqueness = if ratio > n as f64 - 1.0 + 1e-9 { Uniqueness::ByDistanceBound } else { Uniqueness::Probed };
            return Ok(MaureyResult { levels, uniqueness, ratio });
        };
        // Second inner ellipsoid in the normalized frame, scaled to the same radius.
        let wi = w.clone().try_inverse().ok_or_else(|| Error::Solver("singular whitening".into()))?;
        let p1f = wi.transpose() * p1 * &wi;
        let c1f = &w * c1 + &t;
        let e1 = Ellipsoid::new(Vector::zeros(n), p1f)?;
        let r0 = framed.r;
        let alphas: Vec<f64> = e1.half_lengths().iter().map(|a| a / r0).collect();
        let cols: Vec<Vector> = (0..n)
            .filter(|&i| (alphas[i] - 1.0).abs() <= 1e-5)
            .map(|i| e1.axes().column(i).into_owned())
            .collect();
        let offset = &c1f - &framed.c;
        let sub = if cols.is_empty() {
            Matrix::zeros(n, 0)
        } else {
            let v = Matrix::from_columns(&cols);
            let coef = v.transpose() * &offset;
            if coef.norm() > 1e-9 * (1.0 + offset.norm()) {
                let dir = &v * &coef;
                let dir = &dir / dir.norm();
                let proj: Vec<Vector> = cols.iter().map(|c| c - &dir * dir.dot(c)).collect();
                orthonormalize(&Matrix::from_columns(&proj), 1e-8)
            } else {
                v
            }
        };
        levels.push(MaureyLevel {
            dim: n,
            ratio,
            status: base.status,
            distinct_pair: true,
            outer_center_spread: spread,
            subspace: Some(sub.clone()),
        });
        if sub.ncols() == 0 || sub.ncols() >= n {
            return Ok(MaureyResult { levels, uniqueness: Uniqueness::Probed, ratio });
        }
        let pts: Vec<Vector> = match &framed.middle {
            Body::Polytope(p) => p.vertices().iter().map(|v| sub.transpose() * v).collect(),
            Body::Ellipsoid(_) => return Ok(MaureyResult { levels, uniqueness: Uniqueness::Probed, ratio }),
        };
        body = if sub.ncols() == 1 {
            // A segment: the distance to the ball is 1.
            levels.push(MaureyLevel { dim: 1, ratio: 1.0, status: Status::CertifiedOptimal, distinct_pair: false, outer_center_spread: 0.0, subspace: None });
            return Ok(MaureyResult { levels, uniqueness: Uniqueness::Probed, ratio });
        } else {
            Body::Polytope(Polytope::from_vertices(&pts)?)
        };
    }
}
