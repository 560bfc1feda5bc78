//! Bounded-variation trajectories on a time grid and their measures.
//!
//! Trajectories are right-continuous and piecewise constant between grid
//! points: `x(t) = x_k` for `t ∈ [t_k, t_{k+1})`. Their differential measure
//! is then purely atomic, with one vector atom per nonzero increment, and all
//! integrals against a reference measure reduce to finite sums, so no
//! quadrature error enters the certificates.

use crate::point::Point;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureError {
    /// ν would be the zero measure (constant trajectory and no diffuse part).
    DegenerateMeasure,
    /// An increment of `dx` has no ν-atom to carry it.
    NotAbsolutelyContinuous {
        time: f64,
    },
    InvalidGrid(String),
    InvalidTrajectory(String),
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::DegenerateMeasure => {
                write!(f, "reference measure degenerates to the zero measure")
            }
            MeasureError::NotAbsolutelyContinuous { time } => write!(
                f,
                "dx has an atom at t = {time} with no reference-measure atom"
            ),
            MeasureError::InvalidGrid(msg) => write!(f, "invalid time grid: {msg}"),
            MeasureError::InvalidTrajectory(msg) => write!(f, "invalid trajectory: {msg}"),
        }
    }
}

impl std::error::Error for MeasureError {}

/// Strictly increasing times `0 = t_0 < t_1 < … < t_N = T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<TimeGrid, MeasureError> {
        if times.len() < 2 {
            return Err(MeasureError::InvalidGrid("need at least [0, T]".into()));
        }
        if times[0] != 0.0 {
            return Err(MeasureError::InvalidGrid(format!(
                "grid must start at 0, got {}",
                times[0]
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(MeasureError::InvalidGrid("non-finite grid time".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeasureError::InvalidGrid(
                "grid times must be strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { times })
    }

    /// Uniform grid with `cells` cells on `[0, horizon]`.
    pub fn uniform(horizon: f64, cells: usize) -> Result<TimeGrid, MeasureError> {
        if cells == 0 || horizon.is_nan() || horizon <= 0.0 {
            return Err(MeasureError::InvalidGrid(
                "uniform grid needs cells >= 1 and horizon > 0".into(),
            ));
        }
        let times = (0..=cells)
            .map(|k| {
                if k == cells {
                    horizon
                } else {
                    horizon * k as f64 / cells as f64
                }
            })
            .collect();
        TimeGrid::new(times)
    }

    /// Uniform grid with extra required times (jump times) merged in; times
    /// closer than `1e-12·max(1,T)` to an existing grid point are snapped.
    pub fn uniform_with(
        horizon: f64,
        cells: usize,
        extra: &[f64],
    ) -> Result<TimeGrid, MeasureError> {
        let base = TimeGrid::uniform(horizon, cells)?;
        let mut times = base.times;
        let snap = 1e-12 * horizon.max(1.0);
        for &t in extra {
            if t < 0.0 || t > horizon {
                return Err(MeasureError::InvalidGrid(format!(
                    "required time {t} outside [0, {horizon}]"
                )));
            }
            match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                Ok(_) => {}
                Err(i) => {
                    let near = (i > 0 && (times[i - 1] - t).abs() <= snap)
                        || (i < times.len() && (times[i] - t).abs() <= snap);
                    if near {
                        // replace the nearby point with the exact required time
                        let j = if i > 0 && (times[i - 1] - t).abs() <= snap {
                            i - 1
                        } else {
                            i
                        };
                        if times[j] != 0.0 && times[j] != horizon {
                            times[j] = t;
                        }
                    } else {
                        times.insert(i, t);
                    }
                }
            }
        }
        TimeGrid::new(times)
    }

    /// New grid with every cell halved (jump times are grid points and stay).
    pub fn refine_half(&self) -> TimeGrid {
        let mut times = Vec::with_capacity(self.times.len() * 2 - 1);
        for w in self.times.windows(2) {
            times.push(w[0]);
            times.push(0.5 * (w[0] + w[1]));
        }
        times.push(*self.times.last().unwrap());
        TimeGrid { times }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn max_step(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn contains_time(&self, t: f64) -> bool {
        self.times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
            .is_ok()
    }
}

/// One vector atom of a differential measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub time: f64,
    /// Grid index `k` such that the jump is `x_k − x_{k−1}`.
    pub index: usize,
    pub delta: Point,
}

/// Right-continuous, piecewise-constant trajectory of bounded variation.
#[derive(Clone, Debug, PartialEq)]
pub struct BVTrajectory {
    grid: TimeGrid,
    values: Vec<Point>,
}

impl BVTrajectory {
    pub fn new(grid: TimeGrid, values: Vec<Point>) -> Result<BVTrajectory, MeasureError> {
        if values.len() != grid.len() {
            return Err(MeasureError::InvalidTrajectory(format!(
                "{} values for {} grid times",
                values.len(),
                grid.len()
            )));
        }
        let dim = values[0].dim();
        if values.iter().any(|v| v.dim() != dim) {
            return Err(MeasureError::InvalidTrajectory(
                "trajectory values change dimension".into(),
            ));
        }
        Ok(BVTrajectory { grid, values })
    }

    pub fn constant(grid: TimeGrid, value: Point) -> BVTrajectory {
        let n = grid.len();
        BVTrajectory {
            grid,
            values: vec![value; n],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon()
    }

    /// Right-continuous evaluation: `x(t) = x_k` for `t ∈ [t_k, t_{k+1})`,
    /// `x(T) = x_N`; times past the ends clamp.
    pub fn value_at(&self, t: f64) -> &Point {
        let times = self.grid.times();
        if t >= *times.last().unwrap() {
            return self.values.last().unwrap();
        }
        let i = times.partition_point(|x| *x <= t);
        &self.values[i.saturating_sub(1)]
    }

    /// Total variation `Σ ‖x_k − x_{k−1}‖`; the supremum over subdivisions is
    /// attained on the grid for piecewise-constant paths.
    pub fn variation(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1].distance_to(&w[0]))
            .sum()
    }

    /// The atoms of the differential measure `dx` (zero increments omitted).
    pub fn differential_measure(&self) -> Vec<Atom> {
        let times = self.grid.times();
        let mut atoms = Vec::new();
        for (k, w) in self.values.windows(2).enumerate() {
            let delta = &w[1] - &w[0];
            if !delta.is_zero() {
                atoms.push(Atom {
                    time: times[k + 1],
                    index: k + 1,
                    delta,
                });
            }
        }
        atoms
    }
}

/// A positive Radon measure on `[0, T]`: finitely many atoms at grid times
/// plus a uniform Lebesgue-density part.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceMeasure {
    /// `(time, mass)` with strictly increasing times and positive masses.
    atoms: Vec<(f64, f64)>,
    lebesgue_weight: f64,
    horizon: f64,
}

impl ReferenceMeasure {
    pub fn new(
        atoms: Vec<(f64, f64)>,
        lebesgue_weight: f64,
        horizon: f64,
    ) -> Result<ReferenceMeasure, MeasureError> {
        if lebesgue_weight < 0.0 {
            return Err(MeasureError::InvalidGrid(
                "Lebesgue weight must be nonnegative".into(),
            ));
        }
        if atoms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(MeasureError::InvalidGrid(
                "measure atom times must be strictly increasing".into(),
            ));
        }
        if atoms
            .iter()
            .any(|(t, m)| *m <= 0.0 || *t < 0.0 || *t > horizon)
        {
            return Err(MeasureError::InvalidGrid(
                "measure atoms need positive mass and times in [0, T]".into(),
            ));
        }
        if atoms.is_empty() && lebesgue_weight == 0.0 {
            return Err(MeasureError::DegenerateMeasure);
        }
        Ok(ReferenceMeasure {
            atoms,
            lebesgue_weight,
            horizon,
        })
    }

    /// The canonical choice `ν = |dx| + λ₀·Lebesgue`: one atom of mass
    /// `‖Δ_k‖` per nonzero increment.
    pub fn canonical(
        x: &BVTrajectory,
        lebesgue_weight: f64,
    ) -> Result<ReferenceMeasure, MeasureError> {
        let atoms = x
            .differential_measure()
            .into_iter()
            .map(|a| (a.time, a.delta.norm()))
            .collect();
        ReferenceMeasure::new(atoms, lebesgue_weight, x.horizon())
    }

    /// `ν = |dx|` when the trajectory moves, pure unit-density Lebesgue when
    /// it is constant (any positive measure dominates a zero `dx`).
    pub fn canonical_or_lebesgue(x: &BVTrajectory) -> ReferenceMeasure {
        ReferenceMeasure::canonical(x, 0.0).unwrap_or_else(|_| {
            ReferenceMeasure::new(Vec::new(), 1.0, x.horizon()).expect("lebesgue")
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn lebesgue_weight(&self) -> f64 {
        self.lebesgue_weight
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum::<f64>() + self.lebesgue_weight * self.horizon
    }

    pub fn atom_mass_at(&self, t: f64) -> Option<f64> {
        self.atoms
            .binary_search_by(|(at, _)| at.partial_cmp(&t).unwrap())
            .ok()
            .map(|i| self.atoms[i].1)
    }
}

/// Radon–Nikodým density `v = dx/dν` of a piecewise-constant trajectory:
/// vector values at the ν-atoms, zero on the diffuse part.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    /// `(time, atom mass, v)` for every ν-atom, in time order.
    atom_values: Vec<(f64, f64, Point)>,
    dim: usize,
}

impl Density {
    pub fn atom_values(&self) -> &[(f64, f64, Point)] {
        &self.atom_values
    }

    /// `∫ ‖v‖ dν` (the diffuse part contributes nothing).
    pub fn l1_norm(&self) -> f64 {
        self.atom_values.iter().map(|(_, m, v)| m * v.norm()).sum()
    }

    /// Reconstruct `x(t_k) = x(0) + Σ_{t_j ≤ t_k} v(t_j)·m_j` and report the
    /// worst deviation from the stored values.
    pub fn reconstruction_error(&self, x: &BVTrajectory) -> f64 {
        let times = x.grid().times();
        let mut acc = x.values()[0].clone();
        let mut worst = 0.0f64;
        let mut ai = 0;
        for (k, t) in times.iter().enumerate() {
            while ai < self.atom_values.len() && self.atom_values[ai].0 <= *t {
                let (_, m, ref v) = self.atom_values[ai];
                acc = acc.add_scaled(m, v);
                ai += 1;
            }
            worst = worst.max(acc.distance_to(&x.values()[k]));
        }
        worst
    }
}

/// The density of `dx` with respect to `ν`: `v(t_k) = Δ_k / m_k` at atoms,
/// zero elsewhere. Fails when some increment has no matching ν-atom.
pub fn density(x: &BVTrajectory, nu: &ReferenceMeasure) -> Result<Density, MeasureError> {
    let dim = x.dim();
    let mut atom_values: Vec<(f64, f64, Point)> = nu
        .atoms()
        .iter()
        .map(|(t, m)| (*t, *m, Point::zeros(dim)))
        .collect();
    for atom in x.differential_measure() {
        let i = atom_values
            .binary_search_by(|(t, _, _)| t.partial_cmp(&atom.time).unwrap())
            .map_err(|_| MeasureError::NotAbsolutelyContinuous { time: atom.time })?;
        let mass = atom_values[i].1;
        atom_values[i].2 = atom.delta.scale(1.0 / mass);
    }
    Ok(Density { atom_values, dim })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(times: Vec<f64>, vals: Vec<f64>) -> BVTrajectory {
        BVTrajectory::new(
            TimeGrid::new(times).unwrap(),
            vals.into_iter().map(Point::scalar).collect(),
        )
        .unwrap()
    }

    #[test]
    fn variation_examples() {
        assert_eq!(
            traj(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).variation(),
            1.5
        );
        assert_eq!(
            traj(vec![0.0, 1.0, 2.0], vec![0.3, 0.3, 0.3]).variation(),
            0.0
        );
        let x = BVTrajectory::new(
            TimeGrid::new(vec![0.0, 1.0]).unwrap(),
            vec![Point::new(vec![0.0, 0.0]), Point::new(vec![3.0, 4.0])],
        )
        .unwrap();
        assert_eq!(x.variation(), 5.0);
    }

    #[test]
    fn differential_measure_examples() {
        let x = traj(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0]);
        let atoms = x.differential_measure();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].time, 2.0);
        assert_eq!(atoms[0].delta, Point::scalar(2.0));

        assert!(traj(vec![0.0, 1.0], vec![1.0, 1.0])
            .differential_measure()
            .is_empty());

        let atoms = traj(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]).differential_measure();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].delta, Point::scalar(1.0));
        assert_eq!(atoms[1].delta, Point::scalar(-0.5));
    }

    #[test]
    fn canonical_measure_examples() {
        let x = traj(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0]);
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        assert_eq!(nu.atoms(), &[(2.0, 2.0)]);

        let constant = traj(vec![0.0, 1.0, 3.0], vec![0.5, 0.5, 0.5]);
        assert!(matches!(
            ReferenceMeasure::canonical(&constant, 0.0),
            Err(MeasureError::DegenerateMeasure)
        ));
        let nu = ReferenceMeasure::canonical(&constant, 1.0).unwrap();
        assert_eq!(nu.total_mass(), 3.0);

        let x = traj(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]);
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        assert_eq!(nu.total_mass(), 1.5);
    }

    #[test]
    fn density_examples() {
        let x = traj(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.5]);
        let nu = ReferenceMeasure::canonical(&x, 0.0).unwrap();
        let v = density(&x, &nu).unwrap();
        // canonical densities are unit vectors
        for (_, _, vk) in v.atom_values() {
            assert!((vk.norm() - 1.0).abs() < 1e-15);
        }
        assert!(v.reconstruction_error(&x) <= 1e-12);
        assert!((v.l1_norm() - x.variation()).abs() <= 1e-12);

        // atom of mass 2 carrying a jump of size 1 gives half a unit vector
        let x = traj(vec![0.0, 1.0], vec![0.0, 1.0]);
        let nu = ReferenceMeasure::new(vec![(1.0, 2.0)], 0.0, 1.0).unwrap();
        let v = density(&x, &nu).unwrap();
        assert_eq!(v.atom_values()[0].2, Point::scalar(0.5));

        // missing atom → not absolutely continuous
        let nu = ReferenceMeasure::new(vec![(0.5, 1.0)], 0.0, 1.0).unwrap();
        assert!(matches!(
            density(&x, &nu),
            Err(MeasureError::NotAbsolutelyContinuous { .. })
        ));

        // constant trajectory has zero density against any measure
        let constant = traj(vec![0.0, 1.0], vec![0.7, 0.7]);
        let nu = ReferenceMeasure::new(vec![(0.5, 1.0)], 0.5, 1.0).unwrap();
        let v = density(&constant, &nu).unwrap();
        assert!(v.atom_values().iter().all(|(_, _, vk)| vk.is_zero()));
    }

    #[test]
    fn grid_construction_and_refinement() {
        let g = TimeGrid::uniform_with(2.0, 3, &[1.0]).unwrap();
        assert!(g.contains_time(1.0));
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.horizon(), 2.0);

        let fine = g.refine_half();
        assert_eq!(fine.len(), 2 * g.len() - 1);
        assert!(fine.contains_time(1.0));

        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn value_at_is_right_continuous() {
        let x = traj(vec![0.0, 1.0, 2.0], vec![0.0, 5.0, 7.0]);
        assert_eq!(x.value_at(0.999), &Point::scalar(0.0));
        assert_eq!(x.value_at(1.0), &Point::scalar(5.0));
        assert_eq!(x.value_at(2.0), &Point::scalar(7.0));
    }
}
