mod common;

use approx::assert_abs_diff_eq;
use bmchain::convex_bodies::{contacts, inner_homothet, minkowski_combine, outer_homothet};
use bmchain::demos::square;
use bmchain::{Body, Ellipsoid, Error, Matrix, Polytope, Vector};
use common::v;
use proptest::prelude::*;

fn figure1_ellipse() -> Ellipsoid {
    Ellipsoid::new(v(&[1.4, 0.8]), Matrix::from_diagonal(&v(&[0.25, 16.0]))).unwrap()
}

fn triangle_in_circle() -> Polytope {
    let pts: Vec<Vector> = (0..3)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            v(&[t.cos(), t.sin()])
        })
        .collect();
    Polytope::from_vertices(&pts).unwrap()
}

#[test]
fn support_examples() {
    let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    assert_abs_diff_eq!(ball.support(&v(&[0.0, 1.0])), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(Body::Polytope(square()).support(&v(&[1.0, 1.0])), 2.0, epsilon = 1e-15);
    let e = figure1_ellipse();
    let h = e.support(&v(&[1.0, 0.0]));
    assert_abs_diff_eq!(h, 17.0 / 5.0, epsilon = 1e-14);
    // Dense boundary sampling: half-lengths 2 and 1/4.
    let sampled = (0..100_000)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 100_000.0;
            1.4 + 2.0 * t.cos()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((sampled - h).abs() < 1e-8);
}

#[test]
fn gauge_examples() {
    let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    assert_abs_diff_eq!(ball.gauge(&v(&[0.5, 0.0]), Some(&Vector::zeros(2))).unwrap(), 0.5, epsilon = 1e-15);
    let sq = Body::Polytope(square());
    assert_abs_diff_eq!(sq.gauge(&v(&[2.0, 1.0]), Some(&Vector::zeros(2))).unwrap(), 2.0, epsilon = 1e-15);
    let e = figure1_ellipse();
    assert_abs_diff_eq!(e.gauge(&v(&[-0.6, 0.8]), e.center()).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn gauge_rejects_boundary_base() {
    let sq = Body::Polytope(square());
    assert!(matches!(sq.gauge(&v(&[0.0, 0.0]), Some(&v(&[1.0, 0.0]))), Err(Error::InvalidArgument(_))));
}

#[test]
fn ball_in_square_touches_four_midpoints() {
    let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    let sq = Body::Polytope(square());
    let mut cs = contacts(&ball, &sq, 1e-9, &Vector::zeros(2)).unwrap();
    assert_eq!(cs.len(), 4);
    cs.sort_by(|p, q| p.y[0].atan2(p.y[1]).partial_cmp(&q.y[0].atan2(q.y[1])).unwrap());
    for c in &cs {
        assert!((c.y.norm() - 1.0).abs() < 1e-12);
        assert!(c.y.iter().filter(|x| x.abs() < 1e-12).count() == 1);
        assert!((&c.a - &c.y).norm() < 1e-12);
    }
}

#[test]
fn inscribed_triangle_touches_circle_at_vertices() {
    let tri = triangle_in_circle();
    let circle = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    let cs = contacts(&Body::Polytope(tri.clone()), &circle, 1e-9, &Vector::zeros(2)).unwrap();
    assert_eq!(cs.len(), 3);
    for c in &cs {
        assert!(tri.vertices().iter().any(|x| (x - &c.y).norm() < 1e-12));
        assert!((c.a.dot(&c.y) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn contacts_reject_violated_inclusion() {
    let big = Body::Ellipsoid(Ellipsoid::ball(Vector::zeros(2), 1.5));
    let sq = Body::Polytope(square());
    assert!(matches!(contacts(&big, &sq, 1e-9, &Vector::zeros(2)), Err(Error::InclusionViolated { .. })));
}

#[test]
fn affine_image_examples() {
    let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    let img = ball.affine_image(&Matrix::from_diagonal(&v(&[2.0, 0.25])), &v(&[1.4, 0.8])).unwrap();
    let e = img.as_ellipsoid().unwrap();
    assert!((e.shape() - figure1_ellipse().shape()).norm() < 1e-12);
    assert!((e.center() - v(&[1.4, 0.8])).norm() < 1e-15);

    let (c, s) = (std::f64::consts::FRAC_PI_4.cos(), std::f64::consts::FRAC_PI_4.sin());
    let rot = Matrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let diamond = square().affine_image(&rot, &Vector::zeros(2)).unwrap();
    let r2 = 2f64.sqrt();
    for want in [[r2, 0.0], [-r2, 0.0], [0.0, r2], [0.0, -r2]] {
        assert!(diamond.vertices().iter().any(|x| (x - v(&want)).norm() < 1e-12), "{want:?}");
    }
    assert!(matches!(
        Body::Polytope(square()).affine_image(&Matrix::zeros(2, 2), &Vector::zeros(2)),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn minkowski_examples() {
    let sq = Body::Polytope(square());
    let half = minkowski_combine(&sq, &sq, 0.5, 0.5, 16).unwrap();
    assert_eq!(half.vertices().len(), 4);
    for x in half.vertices() {
        assert!((x.amax() - 1.0).abs() < 1e-12 && (x[0].abs() - 1.0).abs() < 1e-12);
    }
    let tri = Body::Polytope(Polytope::from_vertices(&[v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap());
    let double = minkowski_combine(&tri, &tri, 1.0, 1.0, 16).unwrap();
    assert_eq!(double.vertices().len(), 3);
    for want in [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]] {
        assert!(double.vertices().iter().any(|x| (x - v(&want)).norm() < 1e-12));
    }
    let segment = Polytope::from_vertices(&[v(&[-1.0, 0.0]), v(&[1.0, 0.0])]);
    assert!(matches!(segment, Err(Error::InvalidArgument(_))));
}

#[test]
fn homothet_examples() {
    // Incircle of a triangle with inradius one.
    let tri = Body::Polytope(bmchain::demos::regular_simplex(2).unwrap());
    let ball = Body::Ellipsoid(Ellipsoid::unit_ball(2));
    let (r, c) = inner_homothet(&tri, &ball).unwrap();
    assert!((r - 1.0).abs() < 1e-12 && c.norm() < 1e-12);
    // Facet arithmetic: the half-axis 2 meets x = 1 first.
    let wide = Body::Ellipsoid(Ellipsoid::from_axes(Vector::zeros(2), &Matrix::identity(2, 2), &[2.0, 1.0]).unwrap());
    let (r, c) = inner_homothet(&Body::Polytope(square()), &wide).unwrap();
    assert!((r - 0.5).abs() < 1e-12 && c.norm() < 1e-12);
    let (big_r, d) = outer_homothet(&Body::Polytope(square()), &ball).unwrap();
    assert!((big_r - 2f64.sqrt()).abs() < 1e-12 && d.norm() < 1e-12);
}

fn direction() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, 3)
        .prop_filter("nonzero", |x| x.iter().map(|a| a * a).sum::<f64>() > 1e-4)
        .prop_map(|x| Vector::from_vec(x))
}

fn cloud() -> impl Strategy<Value = Polytope> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 5..12)
        .prop_filter_map("full-dimensional", |pts| {
            let pts: Vec<Vector> = pts.into_iter().map(Vector::from_vec).collect();
            let p = Polytope::from_vertices(&pts).ok()?;
            // Keep bodies whose interior comfortably contains the centroid.
            let g = p.centroid();
            p.facets().iter().all(|f| f.offset - f.normal.dot(&g) > 0.05).then_some(p)
        })
}

fn invertible() -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0f64..2.0, 9)
        .prop_map(|x| Matrix::from_vec(3, 3, x))
        .prop_filter("well conditioned", |m| m.determinant().abs() > 0.2 && m.norm() < 5.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_sublinear(p in cloud(), u in direction(), w in direction(), s in 0.1f64..10.0) {
        let b = Body::Polytope(p);
        prop_assert!(b.support(&(&u + &w)) <= b.support(&u) + b.support(&w) + 1e-9);
        prop_assert!((b.support(&(&u * s)) - s * b.support(&u)).abs() <= 1e-9 * s.max(1.0));
    }

    #[test]
    fn gauge_matches_facet_maximum(p in cloud(), x in direction()) {
        let g = p.centroid();
        let shifted = p.affine_image(&Matrix::identity(3, 3), &-&g).unwrap();
        let direct = Body::Polytope(shifted.clone()).gauge(&x, Some(&Vector::zeros(3))).unwrap();
        let dual = shifted.facets().iter().map(|f| f.normal.dot(&x) / f.offset).fold(0.0, f64::max);
        prop_assert!((direct - dual).abs() <= 1e-12 * dual.max(1.0));
    }

    #[test]
    fn affine_image_round_trip(p in cloud(), b in invertible(), t in direction()) {
        let body = Body::Polytope(p.clone());
        let img = body.affine_image(&b, &t).unwrap();
        let bi = b.clone().try_inverse().unwrap();
        let back = img.affine_image(&bi, &-(&bi * &t)).unwrap();
        let back = back.as_polytope().unwrap();
        let scale = p.scale();
        for (x, y) in p.vertices().iter().zip(back.vertices()) {
            prop_assert!((x - y).norm() <= 1e-9 * scale);
        }
        for (f, g) in p.facets().iter().zip(back.facets()) {
            prop_assert!((&f.normal - &g.normal).norm() <= 1e-9);
            prop_assert!((f.offset - g.offset).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn ellipsoid_images_stay_valid(b in invertible(), t in direction()) {
        let e = Ellipsoid::unit_ball(3).affine_image(&b, &t).unwrap();
        let q = e.shape();
        prop_assert!((q - q.transpose()).norm() <= 1e-12 * q.norm());
        let rebuilt = e.axes() * Matrix::from_diagonal(&Vector::from_iterator(3, e.half_lengths().iter().map(|a| a.powi(-2)))) * e.axes().transpose();
        prop_assert!((&rebuilt - q).norm() <= 1e-10 * q.norm());
    }

    #[test]
    fn contacts_support_the_outer_body(p in cloud()) {
        let body = Body::Polytope(p.clone());
        let ball = Body::Ellipsoid(Ellipsoid::unit_ball(3));
        let (big_r, d) = outer_homothet(&body, &ball).unwrap();
        let outer = ball.homothet(big_r, &d).unwrap();
        let tol = 1e-7;
        for c in contacts(&body, &outer, tol, &d).unwrap() {
            prop_assert!((c.a.dot(&(&c.y - &d)) - 1.0).abs() <= 1e-9);
            // Sampled boundary of the outer ball.
            for k in 0..64 {
                let t = k as f64 * 0.37;
                let x = &d + v(&[t.cos() * (2.0 * t).sin(), t.sin() * (2.0 * t).sin(), (2.0 * t).cos()]) * big_r;
                prop_assert!(c.a.dot(&x) <= c.a.dot(&c.y) + tol * c.a.norm() * outer.scale());
            }
        }
    }
}
