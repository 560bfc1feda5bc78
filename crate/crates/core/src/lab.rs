//! Built-in scenarios with known solutions, convergence studies, and the
//! set-approximation stability experiment.
//!
//! Each built-in family ships with an analytic note on the standing
//! hypotheses: values are nonempty, closed, connected, uniformly prox-regular
//! (H1); the family is lower semicontinuous in time — trivially, since within
//! pieces it is Hausdorff-continuous and jumps are declared (H2); and the
//! bounded selection-extension property along trajectories (H3) holds either
//! because the values are convex or because they are prox-regular with the
//! motion confined to a bounded region.

use crate::dynamics::{MotionPath, MovingSet};
use crate::geometry::ProxSet;
use crate::measure::{BVTrajectory, ReferenceMeasure, TimeGrid};
use crate::point::Point;
use crate::residual::{self, Certificate, ResidualError, Tolerances};
use crate::rng::SplitMix64;
use crate::solver::{self, SolveConfig, SolverError};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};
use std::fmt;

#[derive(Debug)]
pub enum LabError {
    UnknownScenario(String),
    /// A study invariant failed (monotone decay, boundedness, certificate).
    InvariantViolated(String),
    Solver(SolverError),
    Residual(ResidualError),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::UnknownScenario(name) => write!(f, "unknown scenario '{name}'"),
            LabError::InvariantViolated(msg) => write!(f, "study invariant violated: {msg}"),
            LabError::Solver(e) => write!(f, "{e}"),
            LabError::Residual(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<SolverError> for LabError {
    fn from(e: SolverError) -> Self {
        LabError::Solver(e)
    }
}

impl From<ResidualError> for LabError {
    fn from(e: ResidualError) -> Self {
        LabError::Residual(e)
    }
}

/// A named problem instance, optionally with a closed-form solution.
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub moving_set: MovingSet,
    pub x0: Point,
    /// Closed-form solution when one is known.
    pub reference: Option<fn(f64) -> Point>,
    /// Lipschitz bound on the motion speed, used to size feasibility slack
    /// in stability studies.
    pub motion_lipschitz: f64,
    /// Analytic note on (H1)-(H3) for this family.
    pub hypothesis_notes: &'static str,
    /// Default number of cells for the base solve grid.
    pub default_cells: usize,
}

fn ramp_reference(t: f64) -> Point {
    Point::scalar((t - 1.0).max(0.0))
}

fn jump_reference(t: f64) -> Point {
    Point::scalar(if t < 1.0 { 0.0 } else { 2.0 })
}

fn sine_play_reference(_t: f64) -> Point {
    Point::scalar(0.0)
}

fn sine_ride_reference(t: f64) -> Point {
    // play with unit half-width driven by 2 sin t: ride the lower edge while
    // the input rises, coast across the dead band, ride the upper edge down
    let x = if t <= FRAC_PI_6 {
        0.0
    } else if t <= FRAC_PI_2 {
        2.0 * t.sin() - 1.0
    } else if t <= PI {
        1.0
    } else if t <= 1.5 * PI {
        2.0 * t.sin() + 1.0
    } else {
        -1.0
    };
    Point::scalar(x)
}

fn hole_reference(t: f64) -> Point {
    Point::new(vec![1.0 + t, 0.0])
}

fn disk_reference(_t: f64) -> Point {
    Point::new(vec![0.0, 0.0])
}

/// The built-in scenario table.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let ramp = {
        let base = ProxSet::interval(-1.0, 1.0).expect("interval");
        let path = MotionPath::piecewise_linear(vec![
            (0.0, Point::scalar(0.0)),
            (2.0, Point::scalar(2.0)),
        ])
        .expect("path");
        Scenario {
            name: "ramp",
            description: "interval [t-1, t+1] dragging the state up from 0",
            moving_set: MovingSet::single(base, path, 2.0).expect("family"),
            x0: Point::scalar(0.0),
            reference: Some(ramp_reference),
            motion_lipschitz: 1.0,
            hypothesis_notes: "Values are compact intervals (convex, so prox-regular with \
                infinite constant, and connected). The translation t is 1-Lipschitz, hence the \
                family is Hausdorff-continuous and in particular lower semicontinuous. Convex \
                values give the bounded selection-extension property without any boundedness \
                assumption on the family.",
            default_cells: 8,
        }
    };
    let jump = {
        let base = ProxSet::interval(0.0, 1.0).expect("interval");
        Scenario {
            name: "jump",
            description: "interval [0,1] teleporting to [2,3] at t = 1",
            moving_set: MovingSet::new(
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
            .expect("family"),
            x0: Point::scalar(0.0),
            reference: Some(jump_reference),
            motion_lipschitz: 0.0,
            hypothesis_notes: "Compact convex values, constant within pieces. The single \
                declared discontinuity at t = 1 is right-continuous; distance functions to any \
                probe are upper semicontinuous there, so the family stays lower semicontinuous \
                on [0, 2]. Convexity gives the selection-extension property.",
            default_cells: 8,
        }
    };
    let sine_play = {
        let base = ProxSet::interval(-1.0, 1.0).expect("interval");
        let path = MotionPath::sinusoidal(1.0, 1.0, 0.0, Point::scalar(1.0)).expect("path");
        Scenario {
            name: "sine-play",
            description: "interval [sin t - 1, sin t + 1]; the dead band absorbs the drive",
            moving_set: MovingSet::single(base, path, 2.0 * PI).expect("family"),
            x0: Point::scalar(0.0),
            reference: Some(sine_play_reference),
            motion_lipschitz: 1.0,
            hypothesis_notes: "Compact convex values translated by sin t (1-Lipschitz), so the \
                family is Hausdorff-continuous; convexity gives the selection-extension \
                property. The drive amplitude equals the half-width, so the state never touches \
                the constraint and the solution is stationary.",
            default_cells: 16,
        }
    };
    let sine_ride = {
        let base = ProxSet::interval(-1.0, 1.0).expect("interval");
        let path = MotionPath::sinusoidal(2.0, 1.0, 0.0, Point::scalar(1.0)).expect("path");
        Scenario {
            name: "sine-ride",
            description: "interval [2 sin t - 1, 2 sin t + 1]; genuine hysteresis loop",
            moving_set: MovingSet::single(base, path, 2.0 * PI).expect("family"),
            x0: Point::scalar(0.0),
            reference: Some(sine_ride_reference),
            motion_lipschitz: 2.0,
            hypothesis_notes: "Same convex translated-interval structure as sine-play, with \
                drive amplitude 2 exceeding the half-width, so the state alternately rides the \
                lower and upper constraint edges.",
            default_cells: 16,
        }
    };
    let hole = {
        let base = ProxSet::complement_of_open_ball(Point::new(vec![0.0, 0.0]), 1.0).expect("hole");
        let path = MotionPath::piecewise_linear(vec![
            (0.0, Point::new(vec![0.0, 0.0])),
            (2.0, Point::new(vec![2.0, 0.0])),
        ])
        .expect("path");
        Scenario {
            name: "hole",
            description: "plane minus an open disk whose center drifts right, bulldozing the state",
            moving_set: MovingSet::single(base, path, 2.0).expect("family"),
            x0: Point::new(vec![1.0, 0.0]),
            reference: Some(hole_reference),
            motion_lipschitz: 1.0,
            hypothesis_notes: "Values are complements of open unit disks: closed, connected in \
                the plane, and uniformly prox-regular with constant 1. The center translation \
                is 1-Lipschitz, giving Hausdorff continuity. The trajectory of interest stays \
                in a bounded tube around the reference path, and prox-regular values with \
                bounded relevant region support the selection-extension property along such \
                trajectories.",
            default_cells: 8,
        }
    };
    let disk = {
        let base = ProxSet::ball(Point::new(vec![0.0, 0.0]), 1.0).expect("ball");
        let path = MotionPath::circular(1.0, 1.0, 0.0, 2).expect("path");
        Scenario {
            name: "disk",
            description: "unit disk orbiting the origin; the state grazes the boundary forever",
            moving_set: MovingSet::single(base, path, 2.0 * PI).expect("family"),
            x0: Point::new(vec![0.0, 0.0]),
            reference: Some(disk_reference),
            motion_lipschitz: 1.0,
            hypothesis_notes: "Compact convex values (unit disks) moved along a 1-Lipschitz \
                circular path: Hausdorff-continuous, convex, bounded, so all standing \
                hypotheses hold. The origin keeps distance exactly 1 from every center, so the \
                stationary trajectory rides the boundary without ever being pushed.",
            default_cells: 16,
        }
    };
    vec![ramp, jump, sine_play, sine_ride, hole, disk]
}

/// Look up a built-in scenario by case-insensitive name.
pub fn scenario(name: &str) -> Result<Scenario, LabError> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| LabError::UnknownScenario(name.to_string()))
}

/// Base solve grid for a scenario: the default uniform mesh with all jump
/// times inserted.
pub fn base_grid(s: &Scenario) -> TimeGrid {
    TimeGrid::uniform_with(
        s.moving_set.horizon(),
        s.default_cells,
        s.moving_set.jump_times(),
    )
    .expect("scenario grid")
}

/// One level of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: u32,
    pub h_max: f64,
    /// Continuous-time sup error against the reference, when one exists.
    pub sup_error: Option<f64>,
    /// Total defect against the true family (atomic residual + gap).
    pub defect: f64,
    /// Atomic residual part alone.
    pub residual: f64,
    pub variation: f64,
}

/// Solve the scenario on successively halved grids and report the defect
/// against the continuous-time family.
pub fn convergence_study(s: &Scenario, levels: u32) -> Result<Vec<ConvergenceRow>, LabError> {
    let mut grid = base_grid(s);
    let mut rows = Vec::with_capacity(levels as usize);
    for level in 0..levels {
        let cfg = SolveConfig::new(grid.clone());
        let x = solver::catching_up(&s.moving_set, &s.x0, &cfg)?;
        let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
        let report = residual::integral_residual(&x, &nu, &s.moving_set, &Tolerances::default())?;
        let sup_error = s.reference.map(|r| sup_error_against(&x, r));
        rows.push(ConvergenceRow {
            level,
            h_max: grid.max_step(),
            sup_error,
            defect: report.total_defect,
            residual: report.residual,
            variation: x.variation(),
        });
        grid = grid.refine_half();
    }
    Ok(rows)
}

/// Decay factor a convergence study must show per halving.
pub const CONVERGENCE_DECAY: f64 = 1.5;

/// Assert the study invariants: the defect decays by at least
/// [`CONVERGENCE_DECAY`] per halving (or sits at numerical zero), and the
/// sup error, when a reference exists, is bounded by twice the mesh.
pub fn check_convergence(rows: &[ConvergenceRow]) -> Result<(), LabError> {
    if rows.len() < 2 {
        return Err(LabError::InvariantViolated(
            "convergence study needs at least two levels".into(),
        ));
    }
    let floor = 1e-12 * (1.0 + rows[0].defect.abs());
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.defect > floor && b.defect * CONVERGENCE_DECAY > a.defect {
            return Err(LabError::InvariantViolated(format!(
                "defect {} at level {} does not decay by {CONVERGENCE_DECAY} from {}",
                b.defect, b.level, a.defect
            )));
        }
    }
    for row in rows {
        if let Some(err) = row.sup_error {
            if err > 2.0 * row.h_max + 1e-12 {
                return Err(LabError::InvariantViolated(format!(
                    "sup error {err} exceeds 2h = {} at level {}",
                    2.0 * row.h_max,
                    row.level
                )));
            }
        }
    }
    Ok(())
}

/// Continuous-time sup distance between a piecewise-constant trajectory and
/// a reference path, probed densely inside every cell.
pub fn sup_error_against(x: &BVTrajectory, reference: fn(f64) -> Point) -> f64 {
    const PROBES: usize = 8;
    let times = x.grid().times();
    let mut sup = 0.0f64;
    for (k, w) in times.windows(2).enumerate() {
        for j in 0..PROBES {
            let t = w[0] + (w[1] - w[0]) * j as f64 / PROBES as f64;
            sup = sup.max(x.values()[k].distance_to(&reference(t)));
        }
    }
    sup = sup.max(
        x.values()
            .last()
            .unwrap()
            .distance_to(&reference(*times.last().unwrap())),
    );
    sup
}

/// Sup distance between two piecewise-constant trajectories on the union of
/// their grids.
pub fn sup_distance(a: &BVTrajectory, b: &BVTrajectory) -> f64 {
    let mut sup = 0.0f64;
    for &t in a.grid().times().iter().chain(b.grid().times()) {
        sup = sup.max(a.value_at(t).distance_to(b.value_at(t)));
    }
    sup
}

/// One level of a stability study.
#[derive(Clone, Debug)]
pub struct StabilityRow {
    /// Mesh count: the approximate family freezes the target on mesh T/n.
    pub n: usize,
    /// Total defect of the approximate solution against the TRUE family.
    pub defect: f64,
    /// Atomic residual part against the true family.
    pub residual: f64,
    pub variation: f64,
    /// `‖x_n − x_{2n}‖_∞` to the next level, once it exists.
    pub sup_dist_to_next: Option<f64>,
}

#[derive(Debug)]
pub struct StabilityOutcome {
    pub rows: Vec<StabilityRow>,
    /// Certificate of the finest trajectory against the true family.
    pub final_certificate: Certificate,
}

/// Approximate the scenario family by piecewise-constant-in-time freezes on
/// meshes T/n for doubling n, solve each exactly by catching up, and watch
/// the defect against the true family vanish.
///
/// The freezes satisfy the stability hypotheses by construction: frozen
/// values are values of the target family (outer semicontinuity), and any
/// continuous selection of the target is approximated in sup-norm by its
/// frozen samples since the motion is Lipschitz.
pub fn stability_study(s: &Scenario, n_max: usize) -> Result<StabilityOutcome, LabError> {
    if n_max < 2 {
        return Err(LabError::InvariantViolated(
            "stability study needs n_max >= 2".into(),
        ));
    }
    let mut ns = Vec::new();
    let mut n = 8.min(n_max);
    loop {
        ns.push(n);
        if n >= n_max {
            break;
        }
        n = (n * 2).min(n_max);
    }

    let horizon = s.moving_set.horizon();
    let tols = Tolerances::default();
    let mut rows: Vec<StabilityRow> = Vec::with_capacity(ns.len());
    let mut trajectories: Vec<BVTrajectory> = Vec::with_capacity(ns.len());
    for &n in &ns {
        let mesh = TimeGrid::uniform_with(horizon, n, s.moving_set.jump_times())
            .map_err(|e| LabError::InvariantViolated(e.to_string()))?;
        let frozen = s.moving_set.freeze(&mesh);
        let cfg = SolveConfig::new(mesh);
        let x_n = solver::catching_up(&frozen, &s.x0, &cfg)?;
        let nu = ReferenceMeasure::canonical_or_lebesgue(&x_n);
        let report = residual::integral_residual(&x_n, &nu, &s.moving_set, &tols)?;

        // outer-semicontinuity surrogate: mid-cell infeasibility is bounded
        // by the mesh times the motion speed
        let mesh_slack = s.motion_lipschitz * horizon / n as f64 + 1e-9;
        if report.feasibility_gap_sup > mesh_slack {
            return Err(LabError::InvariantViolated(format!(
                "feasibility gap {} exceeds mesh slack {mesh_slack} at n = {n}",
                report.feasibility_gap_sup
            )));
        }

        if let Some(prev) = trajectories.last() {
            let d = sup_distance(prev, &x_n);
            rows.last_mut().unwrap().sup_dist_to_next = Some(d);
        }
        rows.push(StabilityRow {
            n,
            defect: report.total_defect,
            residual: report.residual,
            variation: x_n.variation(),
            sup_dist_to_next: None,
        });
        trajectories.push(x_n);
    }

    // vanishing-defect and bounded-variation invariants
    let floor = 1e-12 * (1.0 + rows[0].defect.abs());
    for w in rows.windows(2) {
        if w[1].defect > w[0].defect + floor {
            return Err(LabError::InvariantViolated(format!(
                "defect grew from {} (n = {}) to {} (n = {})",
                w[0].defect, w[0].n, w[1].defect, w[1].n
            )));
        }
    }
    let var_bound = rows.iter().map(|r| r.variation).fold(0.0f64, f64::max);
    if !var_bound.is_finite() {
        return Err(LabError::InvariantViolated("unbounded variations".into()));
    }
    // uniform variation bound surrogate: no growing trend across levels
    for w in rows.windows(2) {
        if w[1].variation > w[0].variation * 1.05 + 1e-9 {
            return Err(LabError::InvariantViolated(format!(
                "variation grew from {} (n = {}) to {} (n = {})",
                w[0].variation, w[0].n, w[1].variation, w[1].n
            )));
        }
    }

    let finest = trajectories.last().unwrap();
    let nu = ReferenceMeasure::canonical_or_lebesgue(finest);
    let final_report = residual::certify(finest, &nu, &s.moving_set, &tols)?;
    Ok(StabilityOutcome {
        rows,
        final_certificate: final_report.certificate,
    })
}

/// Set kinds exercised by the randomized geometry sweeps.
pub const SET_KINDS: [&str; 6] = ["halfspace", "ball", "box", "hole", "translate", "clipped"];

/// Random well-formed set of the given kind (parameters of order one).
pub fn random_set(kind: &str, dim: usize, rng: &mut SplitMix64) -> ProxSet {
    match kind {
        "halfspace" => {
            ProxSet::halfspace(rng.unit_vector(dim), rng.range(-1.0, 1.0)).expect("halfspace")
        }
        "ball" => {
            let center = Point::new((0..dim).map(|_| rng.range(-1.0, 1.0)).collect());
            ProxSet::ball(center, rng.range(0.5, 2.0)).expect("ball")
        }
        "box" => {
            let lower: Vec<f64> = (0..dim).map(|_| rng.range(-2.0, 0.0)).collect();
            let upper: Vec<f64> = lower.iter().map(|l| l + rng.range(0.2, 2.0)).collect();
            ProxSet::hyperrectangle(Point::new(lower), Point::new(upper)).expect("box")
        }
        "hole" => {
            let center = Point::new((0..dim).map(|_| rng.range(-1.0, 1.0)).collect());
            ProxSet::complement_of_open_ball(center, rng.range(0.5, 2.0)).expect("hole")
        }
        "translate" => {
            let inner = ["halfspace", "ball", "box", "hole"][rng.index(4)];
            let base = random_set(inner, dim, rng);
            let shift = Point::new((0..dim).map(|_| rng.range(-1.0, 1.0)).collect());
            ProxSet::translate(base, shift)
        }
        "clipped" => loop {
            let inner = ["halfspace", "ball", "box", "hole"][rng.index(4)];
            let base = random_set(inner, dim, rng);
            let radius = {
                let cap = base.prox_constant();
                let hi = if cap.is_finite() { 0.9 * cap } else { 1.5 };
                rng.range(0.3 * hi, hi)
            };
            // aim the clip ball near the base so the open intersection is
            // nonempty
            let anchor = sample_feasible(&base, rng);
            let dir = rng.unit_vector(dim);
            let center = anchor.add_scaled(rng.range(0.0, 0.8) * radius, &dir);
            if let Ok(set) = ProxSet::intersect_ball(base, center, radius) {
                break set;
            }
        },
        other => panic!("unknown set kind '{other}'"),
    }
}

/// Random point within distance `max_dist` of the set (always inside the
/// trusted projection region when `max_dist < γρ`).
pub fn sample_near(set: &ProxSet, rng: &mut SplitMix64, max_dist: f64) -> Point {
    let anchor = sample_feasible(set, rng);
    let dir = rng.unit_vector(anchor.dim());
    anchor.add_scaled(rng.range(0.0, max_dist), &dir)
}

/// Sample a random feasible point of a set (used to build admissible
/// trajectories for randomized sweeps).
pub fn sample_feasible(set: &ProxSet, rng: &mut SplitMix64) -> Point {
    match set {
        ProxSet::Halfspace { normal, offset } => {
            let dim = normal.dim();
            let raw = Point::new((0..dim).map(|_| rng.range(-2.0, 2.0)).collect());
            let excess = normal.dot(&raw) - offset;
            if excess > 0.0 {
                raw.add_scaled(-2.0 * excess, normal)
            } else {
                raw
            }
        }
        ProxSet::Ball { center, radius } => {
            let dir = rng.unit_vector(center.dim());
            let r = radius * rng.next_f64().powf(1.0 / center.dim() as f64);
            center.add_scaled(r, &dir)
        }
        ProxSet::Box { lower, upper } => Point::new(
            (0..lower.dim())
                .map(|i| {
                    if lower.get(i) == upper.get(i) {
                        lower.get(i)
                    } else {
                        rng.range(lower.get(i), upper.get(i))
                    }
                })
                .collect(),
        ),
        ProxSet::ComplementOfOpenBall { center, radius } => {
            let dir = rng.unit_vector(center.dim());
            center.add_scaled(radius * (1.0 + rng.next_f64()), &dir)
        }
        ProxSet::Translate { base, shift } => &sample_feasible(base, rng) + shift,
        ProxSet::IntersectBall {
            base,
            center,
            radius,
        } => {
            // rejection from the ball, with a projection fallback
            for _ in 0..200 {
                let dir = rng.unit_vector(center.dim());
                let r = radius * rng.next_f64().powf(1.0 / center.dim() as f64);
                let cand = center.add_scaled(r, &dir);
                if base.distance(&cand) == 0.0 {
                    return cand;
                }
            }
            let dir = rng.unit_vector(center.dim());
            let cand = center.add_scaled(radius * rng.next_f64(), &dir);
            set.project(&cand, crate::geometry::SafetyFactor::default())
                .unwrap_or_else(|_| sample_feasible(base, rng))
        }
    }
}

/// A random admissible trajectory for the scenario family: random grid
/// containing the jump times, random feasible value at every grid time.
pub fn sample_admissible_trajectory(
    s: &Scenario,
    rng: &mut SplitMix64,
    max_interior_times: usize,
) -> BVTrajectory {
    let horizon = s.moving_set.horizon();
    let mut times = vec![0.0, horizon];
    times.extend_from_slice(s.moving_set.jump_times());
    let n_extra = 2 + rng.index(max_interior_times.max(1));
    for _ in 0..n_extra {
        times.push(rng.range(0.0, horizon));
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let grid = TimeGrid::new(times).expect("sampled grid");
    let values = grid
        .times()
        .iter()
        .map(|&t| sample_feasible(&s.moving_set.at(t).expect("within horizon"), rng))
        .collect();
    BVTrajectory::new(grid, values).expect("sampled trajectory")
}
