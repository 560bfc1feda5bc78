//! Time-dependent moving sets `t ↦ C(t)` on `[0, T]`.
//!
//! A moving set is a finite sequence of pieces; on each piece the set is a
//! fixed prox-regular base translated along a motion path, so Hausdorff
//! distances within a piece are exact (`Haus(C(t), C(s)) = ‖shift(t) −
//! shift(s)‖`). Shape changes and teleports happen only at declared piece
//! boundaries. The family is right-continuous in time, matching the
//! right-continuous convention for solution trajectories.

use crate::geometry::ProxSet;
use crate::measure::TimeGrid;
use crate::point::Point;
use std::fmt;

/// Times at which two shifts are considered equal when detecting jumps.
const JUMP_DETECT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    OutOfHorizon { t: f64, horizon: f64 },
    CrossesJump { s: f64, t: f64 },
    InvalidFamily(String),
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::OutOfHorizon { t, horizon } => {
                write!(f, "time {t} outside the horizon [0, {horizon}]")
            }
            DynamicsError::CrossesJump { s, t } => {
                write!(f, "times {s} and {t} straddle a piece boundary")
            }
            DynamicsError::InvalidFamily(msg) => write!(f, "invalid moving set: {msg}"),
        }
    }
}

impl std::error::Error for DynamicsError {}

/// Translation path of a piece; evaluation is continuous in time.
#[derive(Clone, Debug, PartialEq)]
pub enum MotionPath {
    Constant(Point),
    /// Linear interpolation between knots `(time, shift)` with strictly
    /// increasing times; clamped outside the knot range.
    PiecewiseLinear(Vec<(f64, Point)>),
    /// `shift(t) = amplitude·sin(frequency·t + phase)·direction`
    /// (frequency in radians per unit time, direction unit-normalized).
    Sinusoidal {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        direction: Point,
    },
    /// `shift(t) = radius·(cos(ω t + phase), sin(ω t + phase), 0, …)`;
    /// requires dimension ≥ 2. Covers orbiting constraint sets, which a
    /// single-axis sinusoid cannot express.
    Circular {
        radius: f64,
        angular_frequency: f64,
        phase: f64,
        dim: usize,
    },
}

impl MotionPath {
    pub fn piecewise_linear(knots: Vec<(f64, Point)>) -> Result<MotionPath, DynamicsError> {
        if knots.is_empty() {
            return Err(DynamicsError::InvalidFamily("path needs knots".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(DynamicsError::InvalidFamily(
                "path knot times must be strictly increasing".into(),
            ));
        }
        Ok(MotionPath::PiecewiseLinear(knots))
    }

    pub fn sinusoidal(
        amplitude: f64,
        frequency: f64,
        phase: f64,
        direction: Point,
    ) -> Result<MotionPath, DynamicsError> {
        let dir = direction
            .unit()
            .ok_or_else(|| DynamicsError::InvalidFamily("sinusoid direction is zero".into()))?;
        Ok(MotionPath::Sinusoidal {
            amplitude,
            frequency,
            phase,
            direction: dir,
        })
    }

    pub fn circular(
        radius: f64,
        angular_frequency: f64,
        phase: f64,
        dim: usize,
    ) -> Result<MotionPath, DynamicsError> {
        if dim < 2 {
            return Err(DynamicsError::InvalidFamily(
                "circular motion needs dimension >= 2".into(),
            ));
        }
        Ok(MotionPath::Circular {
            radius,
            angular_frequency,
            phase,
            dim,
        })
    }

    pub fn shift_at(&self, t: f64) -> Point {
        match self {
            MotionPath::Constant(s) => s.clone(),
            MotionPath::PiecewiseLinear(knots) => {
                if t <= knots[0].0 {
                    return knots[0].1.clone();
                }
                let last = knots.last().unwrap();
                if t >= last.0 {
                    return last.1.clone();
                }
                let i = knots.partition_point(|(kt, _)| *kt <= t) - 1;
                let (t0, ref s0) = knots[i];
                let (t1, ref s1) = knots[i + 1];
                let w = (t - t0) / (t1 - t0);
                s0.add_scaled(w, &(s1 - s0))
            }
            MotionPath::Sinusoidal {
                amplitude,
                frequency,
                phase,
                direction,
            } => direction.scale(amplitude * (frequency * t + phase).sin()),
            MotionPath::Circular {
                radius,
                angular_frequency,
                phase,
                dim,
            } => {
                let ang = angular_frequency * t + phase;
                let mut c = vec![0.0; *dim];
                c[0] = radius * ang.cos();
                c[1] = radius * ang.sin();
                Point::new(c)
            }
        }
    }

    fn dim(&self, ambient: usize) -> usize {
        match self {
            MotionPath::Constant(s) => s.dim(),
            MotionPath::PiecewiseLinear(knots) => knots[0].1.dim(),
            MotionPath::Sinusoidal { direction, .. } => direction.dim(),
            MotionPath::Circular { dim, .. } => (*dim).max(ambient),
        }
    }
}

#[derive(Clone, Debug)]
struct Piece {
    /// Exclusive end of the piece interval (the next piece starts here);
    /// starts are implied by the partition.
    end: f64,
    base: ProxSet,
    path: MotionPath,
}

/// A moving constraint set: pieces partition `[0, T]`, each piece translates
/// a fixed base along its path, and `jump_times` lists the piece boundaries
/// where the family is discontinuous in Hausdorff distance.
#[derive(Clone, Debug)]
pub struct MovingSet {
    pieces: Vec<Piece>,
    horizon: f64,
    jump_times: Vec<f64>,
    rho: f64,
    dim: usize,
}

impl MovingSet {
    /// Build from `(start, end, base, path)` pieces covering `[0, horizon]`.
    /// The final piece may be the degenerate singleton `[T, T]` (used by
    /// grid freezes).
    pub fn new(
        pieces: Vec<(f64, f64, ProxSet, MotionPath)>,
        horizon: f64,
    ) -> Result<MovingSet, DynamicsError> {
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(DynamicsError::InvalidFamily(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if pieces.is_empty() {
            return Err(DynamicsError::InvalidFamily("no pieces".into()));
        }
        let dim = pieces[0].2.dim();
        let mut built = Vec::with_capacity(pieces.len());
        let mut cursor = 0.0;
        let n = pieces.len();
        for (i, (start, end, base, path)) in pieces.into_iter().enumerate() {
            if (start - cursor).abs() > 0.0 {
                return Err(DynamicsError::InvalidFamily(format!(
                    "piece {i} starts at {start}, expected {cursor}"
                )));
            }
            let last = i + 1 == n;
            if end < start || (!last && end <= start) {
                return Err(DynamicsError::InvalidFamily(format!(
                    "piece {i} has empty interval [{start}, {end})"
                )));
            }
            if base.dim() != dim || path.dim(dim) != dim {
                return Err(DynamicsError::InvalidFamily(
                    "piece dimensions disagree".into(),
                ));
            }
            check_connected(&base, dim)?;
            built.push(Piece { end, base, path });
            cursor = end;
        }
        if (cursor - horizon).abs() > 0.0 {
            return Err(DynamicsError::InvalidFamily(format!(
                "pieces end at {cursor}, horizon is {horizon}"
            )));
        }
        let rho = built
            .iter()
            .map(|p| p.base.prox_constant())
            .fold(f64::INFINITY, f64::min);
        let jump_times = detect_jumps(&built);
        Ok(MovingSet {
            pieces: built,
            horizon,
            jump_times,
            rho,
            dim,
        })
    }

    /// One piece covering the whole horizon.
    pub fn single(
        base: ProxSet,
        path: MotionPath,
        horizon: f64,
    ) -> Result<MovingSet, DynamicsError> {
        MovingSet::new(vec![(0.0, horizon, base, path)], horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Uniform prox constant: the minimum over pieces.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    fn piece_index(&self, t: f64) -> Result<usize, DynamicsError> {
        if t < 0.0 || t > self.horizon {
            return Err(DynamicsError::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        // Right-continuous: boundaries belong to the following piece.
        let i = self.pieces.partition_point(|p| p.end <= t);
        Ok(i.min(self.pieces.len() - 1))
    }

    /// The set at time `t` (right-continuous at piece boundaries).
    pub fn at(&self, t: f64) -> Result<ProxSet, DynamicsError> {
        let i = self.piece_index(t)?;
        let piece = &self.pieces[i];
        Ok(ProxSet::translate(
            piece.base.clone(),
            piece.path.shift_at(t),
        ))
    }

    /// The left limit `C(t−)`: the set of the piece just before `t` whenever
    /// `t` is a piece boundary, evaluated at time `t`.
    pub fn at_left_limit(&self, t: f64) -> Result<ProxSet, DynamicsError> {
        if t <= 0.0 {
            return self.at(0.0);
        }
        if t < 0.0 || t > self.horizon {
            return Err(DynamicsError::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        let i = self
            .pieces
            .partition_point(|p| p.end < t)
            .min(self.pieces.len() - 1);
        let piece = &self.pieces[i];
        Ok(ProxSet::translate(
            piece.base.clone(),
            piece.path.shift_at(t),
        ))
    }

    /// Exact Hausdorff distance bound between `C(s)` and `C(t)` for `s`, `t`
    /// in the same piece: translation families move isometrically.
    pub fn hausdorff_bound(&self, s: f64, t: f64) -> Result<f64, DynamicsError> {
        let i = self.piece_index(s)?;
        let j = self.piece_index(t)?;
        if i != j {
            return Err(DynamicsError::CrossesJump { s, t });
        }
        let path = &self.pieces[i].path;
        Ok(path.shift_at(t).distance_to(&path.shift_at(s)))
    }

    /// Distance a state at the left limit of a jump must travel to regain
    /// feasibility.
    pub fn jump_amplitude(&self, t_jump: f64, probe: &Point) -> Result<f64, DynamicsError> {
        Ok(self.at(t_jump)?.distance(probe))
    }

    /// Piecewise-constant-in-time freeze on a grid: on each cell
    /// `[t_k, t_{k+1})` the set is held at its value at `t_k`, and the final
    /// instant keeps the true value `C(T)`. The catching-up scheme solves the
    /// frozen family exactly.
    pub fn freeze(&self, grid: &TimeGrid) -> MovingSet {
        let times = grid.times();
        let mut pieces = Vec::with_capacity(times.len());
        for w in times.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let i = self.piece_index(t0).expect("grid time within horizon");
            let piece = &self.pieces[i];
            pieces.push((
                t0,
                t1,
                piece.base.clone(),
                MotionPath::Constant(piece.path.shift_at(t0)),
            ));
        }
        let t_end = *times.last().unwrap();
        let i = self.piece_index(t_end).expect("horizon end");
        let piece = &self.pieces[i];
        pieces.push((
            t_end,
            t_end,
            piece.base.clone(),
            MotionPath::Constant(piece.path.shift_at(t_end)),
        ));
        MovingSet::new(pieces, self.horizon).expect("freeze of a valid family is valid")
    }
}

fn detect_jumps(pieces: &[Piece]) -> Vec<f64> {
    let mut jumps = Vec::new();
    for w in pieces.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let t = a.end;
        let left = a.path.shift_at(t);
        let right = b.path.shift_at(t);
        let same_base = a.base == b.base;
        if !same_base || left.distance_to(&right) > JUMP_DETECT_TOL {
            jumps.push(t);
        }
    }
    jumps
}

/// Connectedness check per supported kind (a complement of a ball on the
/// line splits into two rays and is rejected).
fn check_connected(set: &ProxSet, dim: usize) -> Result<(), DynamicsError> {
    match set {
        ProxSet::ComplementOfOpenBall { .. } if dim < 2 => Err(DynamicsError::InvalidFamily(
            "complement of a ball is disconnected in dimension 1".into(),
        )),
        ProxSet::Translate { base, .. } => check_connected(base, dim),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SafetyFactor;

    fn ramp_interval() -> MovingSet {
        // C(t) = [t - 1, t + 1] on [0, 2]
        let base = ProxSet::interval(-1.0, 1.0).unwrap();
        let path = MotionPath::piecewise_linear(vec![
            (0.0, Point::scalar(0.0)),
            (2.0, Point::scalar(2.0)),
        ])
        .unwrap();
        MovingSet::single(base, path, 2.0).unwrap()
    }

    fn two_piece_jump() -> MovingSet {
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
    fn at_translates_the_base() {
        let c = ramp_interval();
        let s = c.at(1.0).unwrap();
        assert_eq!(s.distance(&Point::scalar(0.0)), 0.0);
        assert_eq!(s.distance(&Point::scalar(2.0)), 0.0);
        assert_eq!(s.distance(&Point::scalar(3.0)), 1.0);
        assert!(c.at(2.5).is_err());
    }

    #[test]
    fn at_is_right_continuous_at_jumps() {
        let c = two_piece_jump();
        assert_eq!(c.jump_times(), &[1.0]);
        let s = c.at(1.0).unwrap();
        // right-continuity: the value at the boundary is the new piece
        assert_eq!(s.distance(&Point::scalar(2.0)), 0.0);
        assert_eq!(s.distance(&Point::scalar(0.0)), 2.0);
        let left = c.at_left_limit(1.0).unwrap();
        assert_eq!(left.distance(&Point::scalar(0.0)), 0.0);
    }

    #[test]
    fn hausdorff_bound_is_shift_distance() {
        let c = ramp_interval();
        assert!((c.hausdorff_bound(0.25, 0.75).unwrap() - 0.5).abs() < 1e-15);

        let constant = MovingSet::single(
            ProxSet::interval(0.0, 1.0).unwrap(),
            MotionPath::Constant(Point::scalar(0.0)),
            1.0,
        )
        .unwrap();
        assert_eq!(constant.hausdorff_bound(0.1, 0.9).unwrap(), 0.0);

        let sine = MovingSet::single(
            ProxSet::interval(-1.0, 1.0).unwrap(),
            MotionPath::sinusoidal(1.0, 1.0, 0.0, Point::scalar(1.0)).unwrap(),
            std::f64::consts::PI,
        )
        .unwrap();
        let b = sine
            .hausdorff_bound(0.0, std::f64::consts::FRAC_PI_2)
            .unwrap();
        assert!((b - 1.0).abs() < 1e-12);

        assert!(matches!(
            two_piece_jump().hausdorff_bound(0.9, 1.1),
            Err(DynamicsError::CrossesJump { .. })
        ));
    }

    #[test]
    fn jump_amplitude_examples() {
        let c = two_piece_jump();
        assert_eq!(c.jump_amplitude(1.0, &Point::scalar(0.0)).unwrap(), 2.0);
        assert_eq!(c.jump_amplitude(1.0, &Point::scalar(2.5)).unwrap(), 0.0);
    }

    #[test]
    fn freeze_holds_cells_constant_and_keeps_final_value() {
        let c = ramp_interval();
        let grid = TimeGrid::uniform(2.0, 4).unwrap();
        let frozen = c.freeze(&grid);
        // mid-cell: frozen at the left endpoint
        let s = frozen.at(0.7).unwrap();
        assert_eq!(s.distance(&Point::scalar(1.5)), 0.0); // C(0.5) = [-0.5, 1.5]
        assert!((s.distance(&Point::scalar(1.6)) - 0.1).abs() < 1e-15);
        // the final instant keeps C(T)
        let end = frozen.at(2.0).unwrap();
        assert_eq!(end.distance(&Point::scalar(3.0)), 0.0);
        // every interior grid point is a genuine jump of the frozen family
        assert_eq!(frozen.jump_times().len(), 4);
        // prox constant preserved
        assert_eq!(frozen.rho(), f64::INFINITY);
        let _ = SafetyFactor::default();
    }

    #[test]
    fn rejects_disconnected_hole_on_the_line() {
        let hole1d = ProxSet::complement_of_open_ball(Point::scalar(0.0), 1.0).unwrap();
        assert!(MovingSet::single(hole1d, MotionPath::Constant(Point::scalar(0.0)), 1.0).is_err());
    }

    #[test]
    fn distance_to_probe_is_piecewise_continuous() {
        // numerical surrogate for lower semicontinuity away from jumps: the
        // probe distance moves at most at the translation speed within
        // pieces, and may only jump at declared jump times
        for (c, speed) in [(ramp_interval(), 1.0), (two_piece_jump(), 0.0)] {
            let probe = Point::scalar(-2.0);
            let mut prev: Option<(f64, f64)> = None;
            for k in 0..=400 {
                let t = 2.0 * k as f64 / 400.0;
                let d = c.at(t).unwrap().distance(&probe);
                if let Some((tp, dp)) = prev {
                    let crosses_jump = c.jump_times().iter().any(|&j| tp < j && j <= t);
                    if !crosses_jump {
                        assert!((d - dp).abs() <= speed * (t - tp) + 1e-12);
                    }
                }
                prev = Some((t, d));
            }
        }
    }
}
