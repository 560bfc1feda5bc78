//! Variational residual machinery and solution certificates.
//!
//! For a trajectory with density `v = dx/dν`, the pointwise defect at time
//! `t` is the infimum over the constraint set of
//! `f(y) = ⟨v, y − x⟩ + (‖v‖/2ρ)·‖y − x‖²`. Completing the square turns it
//! into a distance evaluation:
//!
//! `m = (‖v‖/2ρ)·(d(x − ρ·v/‖v‖; S)² − ρ²)  ∈ [−ρ‖v‖/2, 0]`,
//!
//! and for convex sets (`ρ = +∞`) it degenerates to the linear program
//! `inf_{y∈S} ⟨v, y − x⟩`, evaluated by support functions. The defect
//! vanishes exactly when `−v` is a proximal normal at `x`, so the integral of
//! `m` against ν certifies solutions: an admissible trajectory solves the
//! sweeping process iff the residual `R = ∫ m dν` is zero. Certificates
//! cross-check this against the independent projection characterization of
//! normal-cone membership and report any disagreement.
//!
//! Reports additionally carry the admissibility gap `∫ d(x(t); C(t)) dt` of
//! the right-continuous interpolant against the continuous-time family. The
//! atomic residual of an exactly-projected time-stepping output is zero by
//! construction even against the true moving set; the gap is what decays
//! under grid refinement, and `|R| + gap` vanishes iff the trajectory solves
//! the continuous-time process. Studies use that total defect as their error
//! indicator.

use crate::dynamics::{DynamicsError, MovingSet};
use crate::geometry::{GeometryError, ProxSet, SafetyFactor, DEFAULT_FEASIBILITY_TOL};
use crate::measure::{self, BVTrajectory, MeasureError, ReferenceMeasure};
use crate::point::Point;
use std::fmt;

/// Default certificate tolerance before variation scaling.
pub const DEFAULT_CERTIFICATE_TOL: f64 = 1e-7;

/// Simpson panels per grid cell for the admissibility-gap quadrature.
const GAP_PANELS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ResidualError {
    InfeasiblePoint {
        distance: f64,
        tol: f64,
    },
    InfeasibleTrajectory {
        time: f64,
        distance: f64,
    },
    InfeasibleTest {
        time: f64,
        distance: f64,
    },
    NotAbsolutelyContinuous {
        time: f64,
    },
    /// The residual route and the normal-cone route disagree on the verdict;
    /// this indicates a geometry bug, not a property of the trajectory.
    CrossCheckMismatch {
        residual_pass: bool,
        cone_pass: bool,
        worst_time: f64,
    },
    Degenerate(String),
    Dynamics(DynamicsError),
    Geometry(GeometryError),
}

impl fmt::Display for ResidualError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualError::InfeasiblePoint { distance, tol } => {
                write!(f, "infeasible point: distance {distance} > tolerance {tol}")
            }
            ResidualError::InfeasibleTrajectory { time, distance } => write!(
                f,
                "trajectory infeasible at t = {time} (distance {distance})"
            ),
            ResidualError::InfeasibleTest { time, distance } => {
                write!(f, "test trajectory infeasible at t = {time} (distance {distance})")
            }
            ResidualError::NotAbsolutelyContinuous { time } => write!(
                f,
                "dx has an atom at t = {time} with no reference-measure atom"
            ),
            ResidualError::CrossCheckMismatch {
                residual_pass,
                cone_pass,
                worst_time,
            } => write!(
                f,
                "certificate cross-check mismatch at t = {worst_time}: residual check {residual_pass}, normal-cone check {cone_pass}"
            ),
            ResidualError::Degenerate(msg) => write!(f, "{msg}"),
            ResidualError::Dynamics(e) => write!(f, "{e}"),
            ResidualError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ResidualError {}

impl From<DynamicsError> for ResidualError {
    fn from(e: DynamicsError) -> Self {
        ResidualError::Dynamics(e)
    }
}

impl From<GeometryError> for ResidualError {
    fn from(e: GeometryError) -> Self {
        ResidualError::Geometry(e)
    }
}

impl From<MeasureError> for ResidualError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::NotAbsolutelyContinuous { time } => {
                ResidualError::NotAbsolutelyContinuous { time }
            }
            other => ResidualError::Degenerate(other.to_string()),
        }
    }
}

/// Tolerances governing feasibility checks and certificate verdicts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Verdict threshold on the pointwise defect, scaled by
    /// `1 + variation(x)` (projection errors accumulate per atom).
    pub certificate_tol: f64,
    /// Feasibility tolerance for trajectory and test values.
    pub feasibility_tol: f64,
    /// Safety factor handed to projections and normal-cone probes.
    pub gamma: SafetyFactor,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            certificate_tol: DEFAULT_CERTIFICATE_TOL,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
            gamma: SafetyFactor::default(),
        }
    }
}

/// Certificate verdict per the residual-zero characterization.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    Solution,
    NotSolution { worst_time: f64, worst_m: f64 },
}

impl Certificate {
    pub fn is_solution(&self) -> bool {
        matches!(self, Certificate::Solution)
    }
}

/// One evaluated ν-atom.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomResidual {
    pub time: f64,
    pub mass: f64,
    pub norm_v: f64,
    /// Pointwise defect `m ≤ 0` (`-inf` when unbounded below).
    pub m: f64,
}

/// Full residual evaluation of a trajectory against a moving set.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub atoms: Vec<AtomResidual>,
    /// `R = Σ m(t_k)·m_k ≤ 0`; the diffuse part contributes nothing for
    /// piecewise-constant trajectories (`v = 0` there forces `m = 0`).
    pub residual: f64,
    /// `−(ρ/2)·∫‖v‖dν` (`-inf` in the convex case, where the bound is void).
    pub lower_bound: f64,
    /// `sup_t d(x(t); C(t))` sampled on the gap quadrature nodes.
    pub feasibility_gap_sup: f64,
    /// `∫₀ᵀ d(x(t); C(t)) dt` by per-cell Simpson quadrature.
    pub feasibility_gap_integral: f64,
    /// `|R| + ∫ gap dt`: zero iff the trajectory solves the continuous-time
    /// process; the error indicator used by refinement and studies.
    pub total_defect: f64,
    /// Set when some convex atom had an unbounded linear defect.
    pub unbounded: bool,
    pub certificate: Certificate,
    pub tolerances: Tolerances,
}

impl ResidualReport {
    /// Threshold actually used for the verdict.
    pub fn scaled_certificate_tol(&self, variation: f64) -> f64 {
        self.tolerances.certificate_tol * (1.0 + variation)
    }
}

/// Pointwise defect `m = inf_{y∈S} [⟨v, y−x⟩ + (‖v‖/2ρ)‖y−x‖²]`.
///
/// `x` must lie in `S` up to `feas_tol`. The result lies in
/// `[−ρ‖v‖/2, 0]`; it is zero iff `−v` is a proximal normal to `S` at `x`,
/// and `-inf` signals an unbounded linear defect on an unbounded convex set
/// (such a `v` cannot be a solution density).
pub fn pointwise_residual(
    set: &ProxSet,
    x: &Point,
    v: &Point,
    rho: f64,
    feas_tol: f64,
) -> Result<f64, ResidualError> {
    let d = set.distance(x);
    if d > feas_tol {
        return Err(ResidualError::InfeasiblePoint {
            distance: d,
            tol: feas_tol,
        });
    }
    let nv = v.norm();
    if nv == 0.0 {
        return Ok(0.0);
    }
    let m = if rho.is_finite() {
        let w = v.scale(1.0 / nv);
        let a = x.add_scaled(-rho, &w);
        let da = set.distance(&a);
        // factored to avoid cancellation for large rho
        nv / (2.0 * rho) * ((da - rho) * (da + rho))
    } else {
        set.support_min(v) - v.dot(x)
    };
    // Feasibility slack can push the exact value marginally above zero.
    Ok(m.min(0.0))
}

/// Evaluate `R = ∫ m dν` plus the admissibility gap of a trajectory against
/// a moving set. Requires `|dx| ≪ ν` and grid-time feasibility.
pub fn integral_residual(
    x: &BVTrajectory,
    nu: &ReferenceMeasure,
    c: &MovingSet,
    tol: &Tolerances,
) -> Result<ResidualReport, ResidualError> {
    check_compatible(x, c)?;
    let dens = measure::density(x, nu)?;
    let times = x.grid().times();

    // admissibility at grid times
    for (k, t) in times.iter().enumerate() {
        let d = c.at(*t)?.distance(&x.values()[k]);
        if d > tol.feasibility_tol {
            return Err(ResidualError::InfeasibleTrajectory {
                time: *t,
                distance: d,
            });
        }
    }

    let rho = c.rho();
    let mut atoms = Vec::with_capacity(dens.atom_values().len());
    let mut residual = 0.0f64;
    // the diffuse part of nu contributes nothing: v = 0 there for
    // piecewise-constant trajectories, and the defect of a zero density is 0
    let mut l1 = 0.0f64;
    let mut unbounded = false;
    for (t, mass, v) in dens.atom_values() {
        let set = c.at(*t)?;
        let m = pointwise_residual(&set, x.value_at(*t), v, rho, tol.feasibility_tol)?;
        if m == f64::NEG_INFINITY {
            unbounded = true;
        }
        residual += m * mass;
        l1 += v.norm() * mass;
        atoms.push(AtomResidual {
            time: *t,
            mass: *mass,
            norm_v: v.norm(),
            m,
        });
    }
    let (gap_sup, gap_integral) = feasibility_gap(x, c)?;
    let lower_bound = if rho.is_finite() {
        -(rho / 2.0) * l1
    } else {
        f64::NEG_INFINITY
    };

    let scaled = tol.certificate_tol * (1.0 + x.variation());
    let worst = atoms
        .iter()
        .filter(|a| a.m < 0.0)
        .min_by(|a, b| a.m.partial_cmp(&b.m).unwrap());
    let certificate = match worst {
        Some(a) if a.m < -scaled => Certificate::NotSolution {
            worst_time: a.time,
            worst_m: a.m,
        },
        _ => Certificate::Solution,
    };

    Ok(ResidualReport {
        atoms,
        residual,
        lower_bound,
        feasibility_gap_sup: gap_sup,
        feasibility_gap_integral: gap_integral,
        total_defect: residual.abs() + gap_integral,
        unbounded,
        certificate,
        tolerances: *tol,
    })
}

/// Left-hand side of the integral inequality for one continuous test `y`
/// sampled on the trajectory grid:
/// `L(y) = Σ [⟨v, y−x⟩ + (‖v‖/2ρ)‖y−x‖²]·m_k`.
///
/// Nonnegative for every admissible test iff the trajectory is a solution;
/// always bounded below by `Σ m(t_k)·m_k` since `m` is the pointwise infimum.
pub fn check_integral_inequality(
    x: &BVTrajectory,
    y_test: &BVTrajectory,
    nu: &ReferenceMeasure,
    c: &MovingSet,
    tol: &Tolerances,
) -> Result<f64, ResidualError> {
    check_compatible(x, c)?;
    if y_test.dim() != x.dim() {
        return Err(ResidualError::Degenerate(
            "test trajectory dimension differs".into(),
        ));
    }
    let dens = measure::density(x, nu)?;
    let rho = c.rho();
    let inv_two_rho = if rho.is_finite() {
        1.0 / (2.0 * rho)
    } else {
        0.0
    };
    let mut total = 0.0;
    for (t, mass, v) in dens.atom_values() {
        let y = y_test.value_at(*t);
        let d = c.at(*t)?.distance(y);
        if d > tol.feasibility_tol {
            return Err(ResidualError::InfeasibleTest {
                time: *t,
                distance: d,
            });
        }
        let diff = y - x.value_at(*t);
        total += (v.dot(&diff) + v.norm() * inv_two_rho * diff.dot(&diff)) * mass;
    }
    Ok(total)
}

/// Solution certificate with independent cross-check.
///
/// The residual route requires every atom defect `m ≥ −tol·(1+var)`; the
/// normal-cone route requires `−Δ_k` to pass the projection test at every
/// atom. The two characterizations must agree; a mismatch is reported as an
/// error rather than a verdict.
pub fn certify(
    x: &BVTrajectory,
    nu: &ReferenceMeasure,
    c: &MovingSet,
    tol: &Tolerances,
) -> Result<ResidualReport, ResidualError> {
    let report = integral_residual(x, nu, c, tol)?;
    let residual_pass = report.certificate.is_solution();

    let mut cone_pass = true;
    let mut worst_time = f64::NAN;
    for atom in x.differential_measure() {
        let set = c.at(atom.time)?;
        let x_k = &x.values()[atom.index];
        let zeta = -&atom.delta;
        let probe_scale = 1.0 + zeta.norm();
        let ok = set.normal_cone_contains(x_k, &zeta, tol.gamma, 1e-6 * probe_scale)?;
        if !ok {
            cone_pass = false;
            worst_time = atom.time;
            break;
        }
    }

    if residual_pass != cone_pass {
        let worst = match &report.certificate {
            Certificate::NotSolution { worst_time, .. } => *worst_time,
            Certificate::Solution => worst_time,
        };
        return Err(ResidualError::CrossCheckMismatch {
            residual_pass,
            cone_pass,
            worst_time: worst,
        });
    }
    Ok(report)
}

fn check_compatible(x: &BVTrajectory, c: &MovingSet) -> Result<(), ResidualError> {
    if x.dim() != c.dim() {
        return Err(ResidualError::Degenerate(format!(
            "trajectory dimension {} vs moving set dimension {}",
            x.dim(),
            c.dim()
        )));
    }
    if (x.horizon() - c.horizon()).abs() > 1e-12 * c.horizon().max(1.0) {
        return Err(ResidualError::Degenerate(format!(
            "trajectory horizon {} vs moving set horizon {}",
            x.horizon(),
            c.horizon()
        )));
    }
    Ok(())
}

/// Sup and integral of `t ↦ d(x(t); C(t))` over the horizon, by per-cell
/// Simpson quadrature on the piecewise-constant interpolant. Cell interiors
/// use the left value of the trajectory and the left limit of the family at
/// the cell end, matching right-continuity of both.
fn feasibility_gap(x: &BVTrajectory, c: &MovingSet) -> Result<(f64, f64), ResidualError> {
    let times = x.grid().times();
    let mut sup = 0.0f64;
    let mut integral = 0.0f64;
    for (k, w) in times.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        let xv = &x.values()[k];
        let h = (t1 - t0) / GAP_PANELS as f64;
        let mut cell = 0.0;
        for j in 0..=GAP_PANELS {
            let t = t0 + h * j as f64;
            let set = if j == GAP_PANELS {
                c.at_left_limit(t1)?
            } else {
                c.at(t)?
            };
            let g = set.distance(xv);
            sup = sup.max(g);
            let weight = if j == 0 || j == GAP_PANELS {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            cell += weight * g;
        }
        integral += cell * h / 3.0;
    }
    Ok((sup, integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MotionPath;
    use crate::measure::TimeGrid;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn pointwise_zero_density() {
        let set = ProxSet::interval(0.0, 1.0).unwrap();
        let m = pointwise_residual(
            &set,
            &Point::scalar(0.5),
            &Point::scalar(0.0),
            f64::INFINITY,
            1e-9,
        )
        .unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn pointwise_halfline_attains_claim_bound() {
        // S = (-inf, 0], x = 0, v = +1, rho = 1: the defect attains the
        // lower bound -rho*||v||/2 = -0.5.
        let set = ProxSet::halfspace(Point::scalar(1.0), 0.0).unwrap();
        let m =
            pointwise_residual(&set, &Point::scalar(0.0), &Point::scalar(1.0), 1.0, 1e-9).unwrap();
        assert!((m + 0.5).abs() < 1e-12, "got {m}");
    }

    #[test]
    fn pointwise_hole_outward_density_is_normal() {
        let set = ProxSet::complement_of_open_ball(Point::new(vec![0.0, 0.0]), 1.0).unwrap();
        let m = pointwise_residual(
            &set,
            &Point::new(vec![1.0, 0.0]),
            &Point::new(vec![1.0, 0.0]),
            1.0,
            1e-9,
        )
        .unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn pointwise_unbounded_on_halfspace() {
        let set = ProxSet::halfspace(Point::new(vec![0.0, 1.0]), 0.0).unwrap();
        let m = pointwise_residual(
            &set,
            &Point::new(vec![0.0, 0.0]),
            &Point::new(vec![1.0, 0.0]),
            f64::INFINITY,
            1e-9,
        )
        .unwrap();
        assert_eq!(m, f64::NEG_INFINITY);
    }

    #[test]
    fn pointwise_rejects_infeasible_base_point() {
        let set = ProxSet::interval(0.0, 1.0).unwrap();
        assert!(matches!(
            pointwise_residual(
                &set,
                &Point::scalar(2.0),
                &Point::scalar(1.0),
                f64::INFINITY,
                1e-9
            ),
            Err(ResidualError::InfeasiblePoint { .. })
        ));
    }

    fn jump_family() -> MovingSet {
        let base = ProxSet::interval(0.0, 1.0).unwrap();
        MovingSet::new(
            vec![
                (
                    0.0,
                    1.0,
                    base.clone(),
                    MotionPath::Constant(Point::scalar(0.0)),
                ),
                (1.0, 2.0, base, MotionPath::Constant(Point::scalar(2.0))),
            ],
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn exact_jump_solution_has_zero_residual() {
        let c = jump_family();
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let x = BVTrajectory::new(
            grid,
            vec![Point::scalar(0.0), Point::scalar(2.0), Point::scalar(2.0)],
        )
        .unwrap();
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        let report = integral_residual(&x, &nu, &c, &tols()).unwrap();
        assert_eq!(report.residual, 0.0);
        assert_eq!(report.feasibility_gap_integral, 0.0);
        assert_eq!(report.total_defect, 0.0);
        assert!(report.certificate.is_solution());

        let certified = certify(&x, &nu, &c, &tols()).unwrap();
        assert!(certified.certificate.is_solution());
    }

    #[test]
    fn wrong_jump_trajectory_is_flagged_with_hand_value() {
        // jumping to 3 instead of 2: one atom of mass 3, unit density, and
        // inf over [2,3] of (y - 3) = -1, so R = -3.
        let c = jump_family();
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let x = BVTrajectory::new(
            grid,
            vec![Point::scalar(0.0), Point::scalar(3.0), Point::scalar(3.0)],
        )
        .unwrap();
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        let report = certify(&x, &nu, &c, &tols()).unwrap();
        assert!(
            (report.residual + 3.0).abs() < 1e-12,
            "R = {}",
            report.residual
        );
        match &report.certificate {
            Certificate::NotSolution {
                worst_time,
                worst_m,
            } => {
                assert_eq!(*worst_time, 1.0);
                assert!((*worst_m + 1.0).abs() < 1e-12);
            }
            Certificate::Solution => panic!("expected NotSolution"),
        }
    }

    #[test]
    fn integral_inequality_examples() {
        let c = jump_family();
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let x = BVTrajectory::new(
            grid.clone(),
            vec![Point::scalar(0.0), Point::scalar(3.0), Point::scalar(3.0)],
        )
        .unwrap();
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();

        // y = x gives a zero integrand
        let zero = check_integral_inequality(&x, &x, &nu, &c, &tols()).unwrap();
        assert_eq!(zero, 0.0);

        // projecting the wrong trajectory back onto the set witnesses
        // non-solution: L(y) < 0
        let y = BVTrajectory::new(
            grid,
            vec![Point::scalar(0.0), Point::scalar(2.0), Point::scalar(2.0)],
        )
        .unwrap();
        let l = check_integral_inequality(&x, &y, &nu, &c, &tols()).unwrap();
        assert!(l < 0.0);
        // bounded below by the atom residual sum
        let report = integral_residual(&x, &nu, &c, &tols()).unwrap();
        assert!(l >= report.residual - 1e-9);

        // infeasible test is rejected
        let bad = BVTrajectory::new(
            TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap(),
            vec![Point::scalar(0.0), Point::scalar(5.0), Point::scalar(5.0)],
        )
        .unwrap();
        assert!(matches!(
            check_integral_inequality(&x, &bad, &nu, &c, &tols()),
            Err(ResidualError::InfeasibleTest { .. })
        ));
    }

    #[test]
    fn constant_trajectory_in_static_set_certifies() {
        let c = MovingSet::single(
            ProxSet::interval(0.0, 1.0).unwrap(),
            MotionPath::Constant(Point::scalar(0.0)),
            3.0,
        )
        .unwrap();
        let x = BVTrajectory::constant(TimeGrid::uniform(3.0, 3).unwrap(), Point::scalar(0.5));
        let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
        let report = certify(&x, &nu, &c, &tols()).unwrap();
        assert!(report.certificate.is_solution());
        assert_eq!(report.total_defect, 0.0);
    }

    #[test]
    fn infeasible_trajectory_is_rejected() {
        let c = jump_family();
        let x = BVTrajectory::new(
            TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap(),
            vec![Point::scalar(0.0), Point::scalar(5.0), Point::scalar(5.0)],
        )
        .unwrap();
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        assert!(matches!(
            integral_residual(&x, &nu, &c, &tols()),
            Err(ResidualError::InfeasibleTrajectory { .. })
        ));
    }

    #[test]
    fn convex_degeneration_matches_large_rho() {
        // with rho = 1e6 the quadratic correction is negligible and the
        // finite-rho formula agrees with the support-function value
        let set = ProxSet::interval(2.0, 3.0).unwrap();
        let x = Point::scalar(2.5);
        let v = Point::scalar(1.3);
        let inf_m = pointwise_residual(&set, &x, &v, f64::INFINITY, 1e-9).unwrap();
        let big_m = pointwise_residual(&set, &x, &v, 1e6, 1e-9).unwrap();
        assert!((inf_m - big_m).abs() < 1e-4, "{inf_m} vs {big_m}");
    }
}
