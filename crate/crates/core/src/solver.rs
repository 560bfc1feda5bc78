//! Catching-up time stepping for the sweeping process.
//!
//! One step projects the previous state onto the set at the next grid time:
//! `x_{k+1} = proj_{C(t_{k+1})}(x_k)`. Each step is an exact projection, so
//! `−(x_{k+1} − x_k)` is a proximal normal at `x_{k+1}` and the output is an
//! exact differential-measure solution of the grid-frozen moving set. Jumps
//! of the family are ordinary steps at their declared times; the projection
//! realizes the measure atom of the solution.

use crate::dynamics::{DynamicsError, MovingSet};
use crate::geometry::{GeometryError, SafetyFactor};
use crate::measure::{BVTrajectory, MeasureError, ReferenceMeasure, TimeGrid};
use crate::point::Point;
use crate::residual::{self, ResidualError, Tolerances};
use std::fmt;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub grid: TimeGrid,
    pub gamma: SafetyFactor,
    /// Feasibility tolerance for the initial state and the output.
    pub projection_tol: f64,
    /// Cap on grid halvings during refinement.
    pub max_refinements: u32,
}

impl SolveConfig {
    pub fn new(grid: TimeGrid) -> SolveConfig {
        SolveConfig {
            grid,
            gamma: SafetyFactor::default(),
            projection_tol: 1e-10,
            max_refinements: 12,
        }
    }
}

/// One refinement level of the a posteriori log.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementRow {
    pub level: u32,
    pub h_max: f64,
    /// Total defect `|R| + ∫ gap dt` against the continuous-time family —
    /// the solver's stopping indicator.
    pub defect: f64,
    /// Atomic residual part alone.
    pub residual: f64,
    pub variation: f64,
}

/// Result of a refinement run: the finest trajectory, its log, and whether
/// the target was reached.
#[derive(Clone, Debug)]
pub struct RefinementOutcome {
    pub trajectory: BVTrajectory,
    pub log: Vec<RefinementRow>,
    pub converged: bool,
}

#[derive(Debug)]
pub enum SolverError {
    /// The initial state is not feasible for `C(0)`.
    InfeasibleStart {
        distance: f64,
        tol: f64,
    },
    /// The grid is too coarse (or a jump exceeds the prox reach): the step
    /// from `x_k` to `C(t_{k+1})` leaves the trusted projection region.
    StepOutOfReach {
        step: usize,
        time: f64,
        distance: f64,
        reach: f64,
    },
    /// The solve grid misses a declared jump time of the family.
    GridMissesJump {
        time: f64,
    },
    /// Refinement budget exhausted before reaching the target; carries the
    /// best run so far.
    BudgetExhausted {
        best: Box<RefinementOutcome>,
    },
    Dynamics(DynamicsError),
    Geometry(GeometryError),
    Residual(ResidualError),
    Measure(MeasureError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::InfeasibleStart { distance, tol } => {
                write!(f, "x0 infeasible: distance {distance} > tolerance {tol}")
            }
            SolverError::StepOutOfReach {
                step,
                time,
                distance,
                reach,
            } => write!(
                f,
                "step {step} out of prox reach at t = {time}: distance {distance} >= {reach}"
            ),
            SolverError::GridMissesJump { time } => {
                write!(f, "solve grid misses declared jump time {time}")
            }
            SolverError::BudgetExhausted { best } => write!(
                f,
                "refinement budget exhausted at defect {}",
                best.log.last().map(|r| r.defect).unwrap_or(f64::NAN)
            ),
            SolverError::Dynamics(e) => write!(f, "{e}"),
            SolverError::Geometry(e) => write!(f, "{e}"),
            SolverError::Residual(e) => write!(f, "{e}"),
            SolverError::Measure(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<DynamicsError> for SolverError {
    fn from(e: DynamicsError) -> Self {
        SolverError::Dynamics(e)
    }
}

impl From<ResidualError> for SolverError {
    fn from(e: ResidualError) -> Self {
        SolverError::Residual(e)
    }
}

impl From<MeasureError> for SolverError {
    fn from(e: MeasureError) -> Self {
        SolverError::Measure(e)
    }
}

/// Run the catching-up scheme on the configured grid.
///
/// The output is feasible at every grid time (projections are exact) and
/// certifies as a solution of its own grid discretization `C.freeze(grid)`.
pub fn catching_up(
    c: &MovingSet,
    x0: &Point,
    cfg: &SolveConfig,
) -> Result<BVTrajectory, SolverError> {
    for &t in c.jump_times() {
        if !cfg.grid.contains_time(t) {
            return Err(SolverError::GridMissesJump { time: t });
        }
    }
    let d0 = c.at(0.0)?.distance(x0);
    if d0 > cfg.projection_tol {
        return Err(SolverError::InfeasibleStart {
            distance: d0,
            tol: cfg.projection_tol,
        });
    }
    let times = cfg.grid.times();
    let mut values = Vec::with_capacity(times.len());
    values.push(x0.clone());
    for (k, &t) in times.iter().enumerate().skip(1) {
        let set = c.at(t)?;
        match set.project(values.last().unwrap(), cfg.gamma) {
            Ok(next) => values.push(next),
            Err(GeometryError::OutOfReach { distance, reach }) => {
                return Err(SolverError::StepOutOfReach {
                    step: k,
                    time: t,
                    distance,
                    reach,
                })
            }
            Err(e) => return Err(SolverError::Geometry(e)),
        }
    }
    Ok(BVTrajectory::new(cfg.grid.clone(), values).expect("grid and values agree"))
}

/// Solve, evaluate the total defect against the continuous-time family, and
/// halve every grid cell until `defect <= target` or the budget runs out.
pub fn refine_until(
    c: &MovingSet,
    x0: &Point,
    cfg: &SolveConfig,
    target_defect: f64,
) -> Result<RefinementOutcome, SolverError> {
    assert!(target_defect > 0.0, "target defect must be positive");
    let tols = Tolerances {
        feasibility_tol: cfg.projection_tol.max(1e-12),
        ..Tolerances::default()
    };
    let mut grid = cfg.grid.clone();
    let mut log = Vec::new();
    let mut best: Option<BVTrajectory> = None;
    for level in 0..=cfg.max_refinements {
        let level_cfg = SolveConfig {
            grid: grid.clone(),
            ..cfg.clone()
        };
        let x = catching_up(c, x0, &level_cfg)?;
        let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
        let report = residual::integral_residual(&x, &nu, c, &tols)?;
        log.push(RefinementRow {
            level,
            h_max: grid.max_step(),
            defect: report.total_defect,
            residual: report.residual,
            variation: x.variation(),
        });
        best = Some(x);
        if report.total_defect <= target_defect {
            return Ok(RefinementOutcome {
                trajectory: best.unwrap(),
                log,
                converged: true,
            });
        }
        grid = grid.refine_half();
    }
    Err(SolverError::BudgetExhausted {
        best: Box::new(RefinementOutcome {
            trajectory: best.unwrap(),
            log,
            converged: false,
        }),
    })
}
