mod common;

use bmchain::certificates::verify_certificate;
use bmchain::convex_bodies::outer_homothet;
use bmchain::demos::{regular_simplex, square};
use bmchain::optimizer::{
    diameter_inradius, diameter_inradius_position, grunbaum_chain, improve_by_mean, maurey_reduce, solve_ball_between,
    solve_distance_to_ball, SolveOptions, SolveResult, Status, Uniqueness,
};
use bmchain::{Body, Chain, Ellipsoid, Matrix, Polytope, Vector};
use common::{diameter_inradius_oracle, ellipse_ratio_oracle, polygon_data, random_body, v};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn ball(n: usize) -> Body {
    Body::Ellipsoid(Ellipsoid::unit_ball(n))
}

fn certified(res: &SolveResult) -> bool {
    res.status == Status::CertifiedOptimal && res.report.as_ref().is_some_and(|r| r.passed)
}

fn monotone(res: &SolveResult) -> bool {
    res.trace.windows(2).all(|w| w[1].ratio <= w[0].ratio * (1.0 + 1e-14))
}

fn triangle() -> Polytope {
    regular_simplex(2).unwrap()
}

fn cross() -> Polytope {
    Polytope::from_vertices(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, 0.0]), v(&[0.0, -1.0])]).unwrap()
}

fn negated(p: &Polytope) -> Polytope {
    Polytope::from_vertices(&p.vertices().iter().map(|x| -x).collect::<Vec<_>>()).unwrap()
}

/// Square cross-section of a body squeezed between the unit ball and the
/// ball of radius `sqrt 2`; only the square corners reach the outer sphere.
fn capped_bipyramid() -> Polytope {
    let w = 0.5f64.sqrt();
    let mut hs = vec![
        (v(&[1.0, 0.0, 0.0]), 1.0),
        (v(&[-1.0, 0.0, 0.0]), 1.0),
        (v(&[0.0, 1.0, 0.0]), 1.0),
        (v(&[0.0, -1.0, 0.0]), 1.0),
        (v(&[0.0, 0.0, 1.0]), 1.0),
        (v(&[0.0, 0.0, -1.0]), 1.0),
    ];
    for sx in [-0.5, 0.5] {
        for sy in [-0.5, 0.5] {
            for sz in [-w, w] {
                hs.push((v(&[sx, sy, sz]), 1.0));
            }
        }
    }
    Polytope::from_facets(&hs).unwrap()
}

#[test]
fn homothet_radii_of_standard_bodies() {
    for n in 2..=4 {
        let (big_r, d) = outer_homothet(&Body::Polytope(regular_simplex(n).unwrap()), &ball(n)).unwrap();
        assert!((big_r - n as f64).abs() < 1e-9 && d.norm() < 1e-9);
    }
    let fine: Vec<Vector> = (0..256)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 256.0;
            v(&[t.cos(), t.sin()])
        })
        .collect();
    let (big_r, _) = outer_homothet(&Body::Polytope(Polytope::from_vertices(&fine).unwrap()), &ball(2)).unwrap();
    assert!((big_r - 1.0).abs() < 1e-12);
}

#[test]
fn square_distance_is_root_two() {
    let res = solve_distance_to_ball(&Body::Polytope(square()), &opts()).unwrap();
    assert!(certified(&res) && monotone(&res));
    assert!((res.ratio - 2f64.sqrt()).abs() < 1e-9);
    let (verts, normals, offsets) = polygon_data(&square());
    let oracle = ellipse_ratio_oracle(&verts, &normals, &offsets, 40);
    assert!((res.ratio - oracle).abs() < 1e-9);
    assert_eq!(res.chain.inner_contacts(res.band).unwrap().len(), 4);
    assert_eq!(res.chain.outer_contacts(res.band).unwrap().len(), 4);
}

#[test]
fn fine_polygon_is_nearly_round() {
    let m = 64;
    let hs: Vec<(Vector, f64)> = (0..m)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            (v(&[t.cos(), t.sin()]), 1.0)
        })
        .collect();
    let res = solve_distance_to_ball(&Body::Polytope(Polytope::from_facets(&hs).unwrap()), &opts()).unwrap();
    assert!(certified(&res));
    let exact = 1.0 / (std::f64::consts::PI / m as f64).cos();
    assert!((res.ratio - exact).abs() < 1e-9);
    assert!(res.ratio - 1.0 < 2e-3);
}

#[test]
fn skewed_start_descends_monotonically() {
    let b = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 0.5]);
    let tri = Body::Polytope(triangle().affine_image(&b, &v(&[0.3, -0.2])).unwrap());
    let res = solve_distance_to_ball(&tri, &opts()).unwrap();
    assert!(certified(&res) && monotone(&res));
    assert!(res.trace.len() > 1 && res.trace[0].ratio > res.ratio + 0.1);
    assert!((res.ratio - 2.0).abs() < 1e-6);
}

#[test]
fn ball_between_examples() {
    let sq = Body::Polytope(square());
    let res = solve_ball_between(&sq, &sq, &opts()).unwrap();
    assert!(certified(&res));
    assert!((res.ratio - 2f64.sqrt()).abs() < 1e-9);
    let direct = solve_distance_to_ball(&sq, &opts()).unwrap();
    assert!((res.ratio - direct.ratio).abs() < 1e-9);

    let (cv, _, _) = polygon_data(&cross());
    let (_, qn, qo) = polygon_data(&square());
    let oracle = ellipse_ratio_oracle(&cv, &qn, &qo, 40);
    let res = solve_ball_between(&Body::Polytope(cross()), &sq, &opts()).unwrap();
    assert!(certified(&res));
    assert!((res.ratio - oracle).abs() < 1e-9);
    // Symmetric form: both weighted point sums vanish.
    let cert = res.certificate.as_ref().unwrap();
    let (si, so) = cert.weighted_point_sums();
    assert!(si.norm() < 1e-7 && so.norm() < 1e-7);

    let res = solve_ball_between(&ball(3), &ball(3), &opts()).unwrap();
    assert!((res.ratio - 1.0).abs() < 1e-12);
}

#[test]
fn diameter_inradius_examples() {
    let sq = Body::Polytope(square());
    let res = diameter_inradius_position(&sq, &sq, &opts()).unwrap();
    assert!(res.solve.certificate.is_some());
    assert!((res.diameter / res.inradius - 2.0).abs() < 1e-6);
    assert!(!res.triples.is_empty());

    let tri = Body::Polytope(triangle());
    let res = diameter_inradius_position(&tri, &ball(2), &opts()).unwrap();
    assert!(certified(&res.solve));
    let (verts, normals, offsets) = polygon_data(&triangle());
    let oracle = diameter_inradius_oracle(&verts, &normals, &offsets, 40);
    assert!((res.diameter / res.inradius - oracle).abs() < 1e-6);
    assert!((oracle - 2.0 * 3f64.sqrt()).abs() < 1e-9);
    for t in &res.triples {
        assert!(((&t.y - &t.z).dot(&t.b) - res.diameter).abs() < 1e-9 * res.diameter);
    }

    let thin = Body::Polytope(
        Polytope::from_vertices(&[v(&[5.0, 0.2]), v(&[-5.0, 0.2]), v(&[-5.0, -0.2]), v(&[5.0, -0.2])]).unwrap(),
    );
    let (d0, r0, _) = diameter_inradius(&thin, &ball(2)).unwrap();
    let res = diameter_inradius_position(&thin, &ball(2), &opts()).unwrap();
    assert!(res.diameter / res.inradius < d0 / r0 - 1.0);
    assert!(diameter_inradius_position(&tri, &tri, &opts()).is_err());
}

#[test]
fn grunbaum_examples() {
    let sq = Body::Polytope(square());
    let res = grunbaum_chain(&sq, &opts()).unwrap();
    assert!((res.ratio - 2f64.sqrt()).abs() < 1e-9);

    let tri = triangle();
    let res = grunbaum_chain(&Body::Polytope(tri.clone()), &opts()).unwrap();
    assert!(certified(&res));
    let (verts, _, _) = polygon_data(&tri);
    let (_, nn, no) = polygon_data(&negated(&tri));
    let oracle = ellipse_ratio_oracle(&verts, &nn, &no, 40);
    assert!((res.ratio - oracle).abs() < 1e-6);
}

fn ball_chain(body: &Body, shape: &Ellipsoid) -> Chain {
    let e = Body::Ellipsoid(shape.clone());
    Chain::from_homothets(e.clone(), body.clone(), e).unwrap()
}

#[test]
fn means_of_chains() {
    let sq = Body::Polytope(square());
    let a = Chain::new(ball(2), 0.5f64.sqrt(), Vector::zeros(2), sq.clone(), ball(2), 2f64.sqrt(), Vector::zeros(2)).unwrap();
    let b = Chain::new(ball(2), 0.25, Vector::zeros(2), sq.clone(), ball(2), 2.0, Vector::zeros(2)).unwrap();
    let m = improve_by_mean(&a, &b, 0.5, None).unwrap();
    assert!((m.ratio() - 4.0).abs() < 1e-12);
    m.check_inclusions(1e-9).unwrap();
    let same = improve_by_mean(&a, &a, 0.3, None).unwrap();
    assert!((same.r - a.r).abs() < 1e-12 && (same.big_r - a.big_r).abs() < 1e-12);
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = improve_by_mean(&a, &b, lambda, None).unwrap();
        let expected = (1.0 - lambda) * a.ratio().ln() + lambda * b.ratio().ln();
        assert!((m.ratio().ln() - expected).abs() < 1e-12);
    }
    let other = Chain::new(ball(2), 0.5, Vector::zeros(2), Body::Polytope(cross()), ball(2), 1.0, Vector::zeros(2)).unwrap();
    assert!(improve_by_mean(&a, &other, 0.5, None).is_err());
}

#[test]
fn mean_of_two_optimal_chains_is_optimal() {
    let body = Body::Polytope(capped_bipyramid());
    let round = ball_chain(&body, &Ellipsoid::unit_ball(3));
    let flat = ball_chain(&body, &Ellipsoid::from_axes(Vector::zeros(3), &Matrix::identity(3, 3), &[1.0, 1.0, 0.9]).unwrap());
    assert!((round.ratio() - 2f64.sqrt()).abs() < 1e-9);
    assert!((flat.ratio() - 2f64.sqrt()).abs() < 1e-9);
    let m = improve_by_mean(&round, &flat, 0.5, None).unwrap();
    assert!((m.ratio() - 2f64.sqrt()).abs() < 1e-9);
    m.check_inclusions(1e-9).unwrap();
    // Contacts stay in the plane of the square where both shapes agree.
    for p in m.inner_contacts(1e-9).unwrap().iter().chain(&m.outer_contacts(1e-9).unwrap()) {
        assert!(p.y[2].abs() < 1e-6, "{:?}", p.y);
    }
}

#[test]
fn maurey_examples() {
    let res = maurey_reduce(&Body::Polytope(square()), &opts(), 8, 2).unwrap();
    assert_eq!(res.uniqueness, Uniqueness::ByDistanceBound);
    assert_eq!(res.levels.len(), 1);
    assert!(res.levels[0].outer_center_spread <= 1e-5);

    let res = maurey_reduce(&Body::Polytope(capped_bipyramid()), &opts(), 8, 2).unwrap();
    let dims: Vec<usize> = res.levels.iter().map(|l| l.dim).collect();
    assert_eq!(dims, vec![3, 2]);
    assert!(res.levels[0].distinct_pair);
    assert!((res.levels[1].ratio - res.levels[0].ratio).abs() < 1e-4);
    assert!((res.ratio - 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn outer_centers_agree_across_restarts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for symmetric in [false, true] {
        let body = random_body(&mut rng, 2, symmetric);
        let res = maurey_reduce(&body, &opts(), 6, 2).unwrap();
        assert!(res.levels.iter().all(|l| l.outer_center_spread <= 1e-5));
    }
}

#[test]
fn restarted_solves_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let body = random_body(&mut rng, 3, false);
    let base = solve_distance_to_ball(&body, &opts()).unwrap();
    let frame = Matrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.0, 0.8, 0.1, 0.3, 0.0, 1.2]);
    let moved = solve_distance_to_ball(&body, &SolveOptions { initial_frame: Some(frame), ..opts() }).unwrap();
    assert!(certified(&base) && certified(&moved));
    assert!((base.ratio - moved.ratio).abs() < 1e-7);
    let cert = moved.certificate.as_ref().unwrap();
    assert!(verify_certificate(&moved.chain, cert, 1e-7).unwrap().passed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solves_descend_and_respect_bounds(seed in 0u64..100_000, n in 2usize..=3, symmetric in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let body = random_body(&mut rng, n, symmetric);
        let res = solve_distance_to_ball(&body, &opts()).unwrap();
        prop_assert!(monotone(&res));
        let bound = if symmetric { (n as f64).sqrt() } else { n as f64 };
        prop_assert!(res.ratio <= bound + 1e-6);
        if res.status == Status::CertifiedOptimal {
            prop_assert!(res.report.as_ref().is_some_and(|r| r.passed));
        }
    }
}
