//! Property sweeps tying the measure and residual layers together.

use moreau::lab::{builtin_scenarios, sample_admissible_trajectory, sample_feasible};
use moreau::measure::{BVTrajectory, ReferenceMeasure, TimeGrid};
use moreau::point::Point;
use moreau::residual::{self, Tolerances};
use moreau::rng::SplitMix64;

#[test]
fn inequality_values_dominate_the_atom_residual_sum() {
    // L(y) >= sum of m(t_k) * mass_k for every feasible test y, since the
    // pointwise defect is the per-atom infimum
    let mut rng = SplitMix64::new(7057);
    let tols = Tolerances::default();
    for s in builtin_scenarios() {
        for _ in 0..40 {
            let x = sample_admissible_trajectory(&s, &mut rng, 10);
            let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
            let report = match residual::integral_residual(&x, &nu, &s.moving_set, &tols) {
                Ok(r) => r,
                Err(e) => panic!("{}: {e}", s.name),
            };
            // random feasible test sampled on the same grid
            let values: Vec<Point> = x
                .grid()
                .times()
                .iter()
                .map(|&t| sample_feasible(&s.moving_set.at(t).unwrap(), &mut rng))
                .collect();
            let y = BVTrajectory::new(x.grid().clone(), values).unwrap();
            let l = residual::check_integral_inequality(&x, &y, &nu, &s.moving_set, &tols)
                .unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert!(
                l >= report.residual - 1e-9,
                "{}: L(y) = {l} below the residual sum {}",
                s.name,
                report.residual
            );
        }
    }
}

#[test]
fn variation_is_subadditive_under_concatenation() {
    // pasting two trajectories end to end: the concatenated variation equals
    // the sum plus the splice increment, and never less than either part
    let mut rng = SplitMix64::new(7058);
    for _ in 0..200 {
        let n1 = 2 + rng.index(6);
        let n2 = 2 + rng.index(6);
        let grid1: Vec<f64> = (0..=n1).map(|k| k as f64 / n1 as f64).collect();
        let grid2: Vec<f64> = (0..=n2).map(|k| 1.0 + k as f64 / n2 as f64).collect();
        let vals1: Vec<Point> = (0..=n1)
            .map(|_| Point::scalar(rng.range(-1.0, 1.0)))
            .collect();
        let vals2: Vec<Point> = (0..=n2)
            .map(|_| Point::scalar(rng.range(-1.0, 1.0)))
            .collect();
        let a = BVTrajectory::new(TimeGrid::new(grid1.clone()).unwrap(), vals1.clone()).unwrap();

        let mut times = grid1;
        times.extend_from_slice(&grid2[1..]);
        let mut vals = vals1.clone();
        vals.extend_from_slice(&vals2[1..]);
        let joined = BVTrajectory::new(TimeGrid::new(times).unwrap(), vals).unwrap();

        let b_var: f64 = vals2.windows(2).map(|w| w[1].distance_to(&w[0])).sum();
        let splice = vals2[1].distance_to(vals1.last().unwrap());
        let expected = a.variation() + (b_var - vals2[1].distance_to(&vals2[0])) + splice;
        assert!((joined.variation() - expected).abs() < 1e-12);
        assert!(joined.variation() + 1e-12 >= a.variation());
        assert!(joined.variation() >= 0.0);
    }
}

#[test]
fn piecewise_prox_constants_dominate_the_family_constant() {
    for s in builtin_scenarios() {
        let horizon = s.moving_set.horizon();
        for k in 0..=100 {
            let t = horizon * k as f64 / 100.0;
            let set = s.moving_set.at(t).unwrap();
            assert!(
                set.prox_constant() >= s.moving_set.rho(),
                "{} at t = {t}",
                s.name
            );
        }
    }
}
