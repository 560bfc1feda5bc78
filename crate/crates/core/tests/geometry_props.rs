//! Seeded property sweeps over the set primitives: projection idempotence,
//! distance consistency, the projection Lipschitz bound, and the defining
//! prox-regularity inequality.

use moreau::geometry::{GeometryError, ProxSet, SafetyFactor};
use moreau::lab::{random_set, sample_feasible, sample_near, SET_KINDS};
use moreau::point::Point;
use moreau::rng::SplitMix64;

const SAMPLES_PER_KIND: usize = 1_000;

/// Admissible probe: within the trusted projection region of the set.
fn admissible_probe(set: &ProxSet, rng: &mut SplitMix64, gamma: f64) -> Point {
    let rho = set.prox_constant();
    let max_dist = if rho.is_finite() {
        0.95 * gamma * rho
    } else {
        2.0
    };
    loop {
        let p = sample_near(set, rng, max_dist);
        if set.distance(&p) < gamma * rho {
            return p;
        }
    }
}

#[test]
fn projection_idempotence_and_distance_consistency() {
    let gamma = SafetyFactor::default();
    let mut rng = SplitMix64::new(9001);
    for kind in SET_KINDS {
        for dim in [1usize, 2, 3] {
            if kind == "hole" && dim == 1 {
                continue; // disconnected on the line; still covered via d >= 2
            }
            for _ in 0..SAMPLES_PER_KIND / 3 {
                let set = random_set(kind, dim, &mut rng);
                let p = admissible_probe(&set, &mut rng, gamma.value());
                let q = set.project(&p, gamma).expect("admissible probe");
                // distance consistency
                assert!(
                    (p.distance_to(&q) - set.distance(&p)).abs() <= 1e-12,
                    "{kind}/{dim}: |p-proj| = {} vs d = {}",
                    p.distance_to(&q),
                    set.distance(&p)
                );
                // idempotence
                let q2 = set.project(&q, gamma).expect("projection is feasible");
                assert!(
                    q.distance_to(&q2) <= 1e-12,
                    "{kind}/{dim}: projection moved by {}",
                    q.distance_to(&q2)
                );
                // the projection is feasible
                assert!(set.distance(&q) <= 1e-12);
            }
        }
    }
}

#[test]
fn projection_lipschitz_bound() {
    let gamma = SafetyFactor::default();
    let lip = 1.0 / (1.0 - gamma.value());
    let mut rng = SplitMix64::new(9002);
    for kind in SET_KINDS {
        for dim in [1usize, 2, 3] {
            if kind == "hole" && dim == 1 {
                continue;
            }
            for _ in 0..SAMPLES_PER_KIND / 3 {
                let set = random_set(kind, dim, &mut rng);
                let p1 = admissible_probe(&set, &mut rng, gamma.value());
                // mix nearby and far pairs
                let p2 = if rng.next_f64() < 0.5 {
                    let step = rng.unit_vector(dim);
                    let cand = p1.add_scaled(rng.range(0.0, 0.05), &step);
                    if set.distance(&cand) < gamma.value() * set.prox_constant() {
                        cand
                    } else {
                        admissible_probe(&set, &mut rng, gamma.value())
                    }
                } else {
                    admissible_probe(&set, &mut rng, gamma.value())
                };
                let q1 = set.project(&p1, gamma).unwrap();
                let q2 = set.project(&p2, gamma).unwrap();
                assert!(
                    q1.distance_to(&q2) <= lip * p1.distance_to(&p2) * (1.0 + 1e-9) + 1e-12,
                    "{kind}/{dim}: |proj gap| {} vs {} allowed",
                    q1.distance_to(&q2),
                    lip * p1.distance_to(&p2)
                );
            }
        }
    }
}

#[test]
fn prox_inequality_for_projection_normals() {
    // zeta = p - proj(p) is a proximal normal at proj(p); the defining
    // inequality must hold against every feasible point
    let gamma = SafetyFactor::default();
    let mut rng = SplitMix64::new(9003);
    for kind in SET_KINDS {
        for dim in [1usize, 2, 3] {
            if kind == "hole" && dim == 1 {
                continue;
            }
            for _ in 0..SAMPLES_PER_KIND / 3 {
                let set = random_set(kind, dim, &mut rng);
                let rho = set.prox_constant();
                let p = admissible_probe(&set, &mut rng, gamma.value());
                let x = set.project(&p, gamma).unwrap();
                let zeta = &p - &x;
                let x_other = sample_feasible(&set, &mut rng);
                let lhs = zeta.dot(&(&x_other - &x));
                let quad = x_other.distance_to(&x).powi(2);
                let rhs = if rho.is_finite() {
                    zeta.norm() / (2.0 * rho) * quad
                } else {
                    0.0
                };
                assert!(
                    lhs <= rhs + 1e-9,
                    "{kind}/{dim}: <zeta, x'-x> = {lhs} > {rhs}"
                );
            }
        }
    }
}

#[test]
fn hole_prox_constant_is_exactly_the_radius() {
    // complement of the open ball of radius 2: the inequality holds with
    // rho = 2 on sampled boundary pairs and fails for any rho' > 2 * 1.01
    let set = ProxSet::complement_of_open_ball(Point::new(vec![0.0, 0.0]), 2.0).unwrap();
    assert_eq!(set.prox_constant(), 2.0);
    let mut rng = SplitMix64::new(9004);
    let rho_bad = 2.0 * 1.01;
    let mut violated_bad = false;
    for _ in 0..10_000 {
        // boundary point and inward proximal normal
        let u = rng.unit_vector(2);
        let x = u.scale(2.0);
        let zeta = u.scale(-rng.range(0.1, 3.0));
        // feasible comparison point (boundary and beyond)
        let v = rng.unit_vector(2);
        let x_other = v.scale(rng.range(2.0, 4.0));
        let lhs = zeta.dot(&(&x_other - &x));
        let quad = x_other.distance_to(&x).powi(2);
        assert!(
            lhs <= zeta.norm() / (2.0 * 2.0) * quad + 1e-9,
            "inequality must hold at rho = 2"
        );
        if lhs > zeta.norm() / (2.0 * rho_bad) * quad + 1e-4 {
            violated_bad = true;
        }
    }
    assert!(
        violated_bad,
        "no sampled pair violates the inflated constant {rho_bad}"
    );
}

#[test]
fn clip_constructor_and_prox_constant_examples() {
    let hole = ProxSet::complement_of_open_ball(Point::new(vec![0.0, 0.0]), 1.0).unwrap();
    let clipped = ProxSet::intersect_ball(hole, Point::new(vec![1.3, 0.0]), 0.5).unwrap();
    assert_eq!(clipped.prox_constant(), 1.0);

    let unit_box =
        ProxSet::hyperrectangle(Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 1.0])).unwrap();
    assert!(unit_box.prox_constant().is_infinite());
}

#[test]
fn clipped_points_are_limits_of_open_intersection_points() {
    // closure property of the clip: every point of base ∩ B_r[a] is a limit
    // of points of base ∩ B_r(a), realized by projecting a slight move
    // toward the clip center
    let mut rng = SplitMix64::new(9005);
    for dim in [2usize, 3] {
        for _ in 0..200 {
            let set = random_set("clipped", dim, &mut rng);
            let ProxSet::IntersectBall {
                ref base,
                ref center,
                radius,
            } = set
            else {
                unreachable!()
            };
            let y = sample_feasible(&set, &mut rng);
            assert!(base.distance(&y) <= 1e-9 && y.distance_to(center) <= radius + 1e-9);
            for t in [1e-3, 1e-5, 1e-7] {
                let moved = y.add_scaled(t, &(center - &y));
                let z = match base.project(&moved, SafetyFactor::default()) {
                    Ok(z) => z,
                    Err(GeometryError::OutOfReach { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                // strictly inside the clip ball, on the base, and close to y
                assert!(z.distance_to(center) < radius + 1e-12);
                assert!(base.distance(&z) <= 1e-9);
                assert!(
                    z.distance_to(&y) <= 20.0 * t * y.distance_to(center) + 1e-12,
                    "dim {dim}: moved {} for t = {t}",
                    z.distance_to(&y)
                );
            }
        }
    }
}

#[test]
fn out_of_reach_is_strict_at_gamma_rho() {
    let hole = ProxSet::complement_of_open_ball(Point::new(vec![0.0, 0.0]), 1.0).unwrap();
    let gamma = SafetyFactor::default();
    // distance exactly 0.9 = gamma * rho: rejected by the strict guard
    let err = hole
        .project(&Point::new(vec![0.1, 0.0]), gamma)
        .unwrap_err();
    assert!(matches!(err, GeometryError::OutOfReach { .. }));
    // just inside is fine
    let q = hole
        .project(&Point::new(vec![0.100001, 0.0]), gamma)
        .unwrap();
    assert!((q.distance_to(&Point::new(vec![1.0, 0.0]))) < 1e-9);
}

#[test]
fn clipped_projection_distance_matches_parametric_oracle() {
    // the boundary bisection must return the true nearest point; compare
    // against dense parametric minimization of ||y - p|| over the clipped set
    let gamma = SafetyFactor::default();
    let mut rng = SplitMix64::new(9006);
    for dim in [1usize, 2, 3] {
        let cases = if dim == 3 { 60 } else { 120 };
        for case in 0..cases {
            let set = random_set("clipped", dim, &mut rng);
            let p = admissible_probe(&set, &mut rng, gamma.value());
            let q = set.project(&p, gamma).unwrap();
            let reached = p.distance_to(&q);
            let oracle_dist = moreau::oracle::min_distance(&set, &p, 4.0 + reached);
            // two-sided at the oracle's own accuracy: a suboptimal
            // projection would overshoot at geometric scale
            assert!(
                (reached - oracle_dist).abs() <= 2e-6,
                "clipped/{dim} case {case}: projection reached {reached}, oracle found {oracle_dist}"
            );
            // and distance() agrees with both
            assert!((set.distance(&p) - reached).abs() <= 1e-12);
        }
    }
}
