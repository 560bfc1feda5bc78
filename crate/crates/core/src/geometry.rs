//! Prox-regular set primitives with exact distance and projection.
//!
//! A closed set `S` is ρ-uniformly prox-regular when every proximal normal
//! `ζ` at `x ∈ S` satisfies `⟨ζ, x' − x⟩ ≤ (‖ζ‖/2ρ)‖x' − x‖²` for all
//! `x' ∈ S`. Equivalently, the nearest-point projection is single-valued and
//! `(1−γ)⁻¹`-Lipschitz on the open γρ-enlargement of `S`, for every
//! `γ ∈ (0,1)`. Convex sets have `ρ = +∞`; every coefficient `1/(2ρ)` then
//! evaluates to zero, which recovers the convex formulas without branching in
//! callers.
//!
//! All supported kinds have closed-form distance and projection, except the
//! ball intersection, which reduces to a one-dimensional bisection on the
//! ball boundary (the intersection of a ρ-prox-regular set with a closed ball
//! of radius `r < ρ` is again ρ-prox-regular, so nearest points stay unique
//! inside the reach).

use crate::point::Point;
use std::fmt;

/// Feasibility tolerance used when a point is required to lie in a set.
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-9;

/// Relative margin below the full reach ρ used by internal projections.
const REACH_MARGIN: f64 = 1e-9;

/// Iterations of the boundary bisection for ball intersections (~2^-70).
const BISECT_ITERS: u32 = 70;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// The point is too far from the set for the projection to be trusted.
    OutOfReach { distance: f64, reach: f64 },
    /// A point required to lie in the set does not, up to tolerance.
    InfeasiblePoint { distance: f64, tol: f64 },
    /// Set constructor invariant violated.
    InvalidSet(String),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::OutOfReach { distance, reach } => write!(
                f,
                "point out of projection reach: distance {distance} >= {reach}"
            ),
            GeometryError::InfeasiblePoint { distance, tol } => {
                write!(f, "infeasible point: distance {distance} > tolerance {tol}")
            }
            GeometryError::InvalidSet(msg) => write!(f, "invalid set: {msg}"),
        }
    }
}

impl std::error::Error for GeometryError {}

/// Safety factor γ ∈ (0,1) governing where the projection is trusted:
/// projections are accepted only at distance < γρ from the set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafetyFactor(f64);

impl SafetyFactor {
    pub fn new(gamma: f64) -> Result<Self, GeometryError> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(SafetyFactor(gamma))
        } else {
            Err(GeometryError::InvalidSet(format!(
                "safety factor must lie in (0,1), got {gamma}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for SafetyFactor {
    fn default() -> Self {
        SafetyFactor(0.9)
    }
}

/// A closed, uniformly prox-regular subset of R^d with exact distance and
/// projection.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxSet {
    /// `{ x : ⟨normal, x⟩ ≤ offset }`, normal stored with unit norm.
    Halfspace { normal: Point, offset: f64 },
    /// Closed ball of the given radius.
    Ball { center: Point, radius: f64 },
    /// Axis-aligned box `[lower, upper]`.
    Box { lower: Point, upper: Point },
    /// `{ x : ‖x − center‖ ≥ radius }`, the prototypical nonconvex example;
    /// prox-regular exactly with ρ = radius.
    ComplementOfOpenBall { center: Point, radius: f64 },
    /// `base + shift`.
    Translate {
        base: std::boxed::Box<ProxSet>,
        shift: Point,
    },
    /// `base ∩ B_radius[center]`, requires radius < ρ(base) and a nonempty
    /// interior intersection; keeps ρ(base).
    IntersectBall {
        base: std::boxed::Box<ProxSet>,
        center: Point,
        radius: f64,
    },
}

impl ProxSet {
    pub fn halfspace(normal: Point, offset: f64) -> Result<ProxSet, GeometryError> {
        let n = normal.norm();
        if n == 0.0 {
            return Err(GeometryError::InvalidSet(
                "halfspace normal must be nonzero".into(),
            ));
        }
        Ok(ProxSet::Halfspace {
            normal: normal.scale(1.0 / n),
            offset: offset / n,
        })
    }

    pub fn ball(center: Point, radius: f64) -> Result<ProxSet, GeometryError> {
        if radius > 0.0 {
            Ok(ProxSet::Ball { center, radius })
        } else {
            Err(GeometryError::InvalidSet(format!(
                "ball radius must be positive, got {radius}"
            )))
        }
    }

    pub fn hyperrectangle(lower: Point, upper: Point) -> Result<ProxSet, GeometryError> {
        if lower.dim() != upper.dim() {
            return Err(GeometryError::InvalidSet("box bound dims differ".into()));
        }
        if lower
            .coords()
            .iter()
            .zip(upper.coords())
            .any(|(l, u)| l > u)
        {
            return Err(GeometryError::InvalidSet(
                "box requires lower <= upper componentwise".into(),
            ));
        }
        Ok(ProxSet::Box { lower, upper })
    }

    /// One-dimensional interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<ProxSet, GeometryError> {
        ProxSet::hyperrectangle(Point::scalar(lo), Point::scalar(hi))
    }

    pub fn complement_of_open_ball(center: Point, radius: f64) -> Result<ProxSet, GeometryError> {
        if radius > 0.0 {
            Ok(ProxSet::ComplementOfOpenBall { center, radius })
        } else {
            Err(GeometryError::InvalidSet(format!(
                "complement-of-ball radius must be positive, got {radius}"
            )))
        }
    }

    /// Translation; nested translations are flattened.
    pub fn translate(base: ProxSet, shift: Point) -> ProxSet {
        debug_assert_eq!(base.dim(), shift.dim());
        match base {
            ProxSet::Translate { base, shift: s0 } => ProxSet::Translate {
                base,
                shift: &s0 + &shift,
            },
            other => ProxSet::Translate {
                base: std::boxed::Box::new(other),
                shift,
            },
        }
    }

    /// Clipping by a closed ball of radius `r < ρ(base)` whose open interior
    /// meets the base set. Nested clips are not supported.
    pub fn intersect_ball(
        base: ProxSet,
        center: Point,
        radius: f64,
    ) -> Result<ProxSet, GeometryError> {
        if radius <= 0.0 {
            return Err(GeometryError::InvalidSet(format!(
                "intersection ball radius must be positive, got {radius}"
            )));
        }
        if matches!(base.core_kind(), ProxSet::IntersectBall { .. }) {
            return Err(GeometryError::InvalidSet(
                "nested ball intersections are not supported".into(),
            ));
        }
        if radius >= base.prox_constant() {
            return Err(GeometryError::InvalidSet(format!(
                "intersection ball radius {radius} must be smaller than the prox constant {}",
                base.prox_constant()
            )));
        }
        let gap = base.distance(&center);
        if gap >= radius {
            return Err(GeometryError::InvalidSet(format!(
                "open intersection is empty: d(center, base) = {gap} >= radius {radius}"
            )));
        }
        Ok(ProxSet::IntersectBall {
            base: std::boxed::Box::new(base),
            center,
            radius,
        })
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ProxSet::Halfspace { normal, .. } => normal.dim(),
            ProxSet::Ball { center, .. } => center.dim(),
            ProxSet::Box { lower, .. } => lower.dim(),
            ProxSet::ComplementOfOpenBall { center, .. } => center.dim(),
            ProxSet::Translate { base, .. } => base.dim(),
            ProxSet::IntersectBall { base, .. } => base.dim(),
        }
    }

    /// The underlying kind with translations peeled off.
    fn core_kind(&self) -> &ProxSet {
        match self {
            ProxSet::Translate { base, .. } => base.core_kind(),
            other => other,
        }
    }

    /// Prox-regularity constant ρ; `+∞` for convex kinds. Ball intersections
    /// conservatively keep the base constant.
    pub fn prox_constant(&self) -> f64 {
        match self {
            ProxSet::Halfspace { .. } | ProxSet::Ball { .. } | ProxSet::Box { .. } => f64::INFINITY,
            ProxSet::ComplementOfOpenBall { radius, .. } => *radius,
            ProxSet::Translate { base, .. } => base.prox_constant(),
            ProxSet::IntersectBall { base, .. } => base.prox_constant(),
        }
    }

    /// Exact Euclidean distance to the set; zero iff the point belongs to it.
    pub fn distance(&self, p: &Point) -> f64 {
        match self {
            ProxSet::Halfspace { normal, offset } => (normal.dot(p) - offset).max(0.0),
            ProxSet::Ball { center, radius } => (p.distance_to(center) - radius).max(0.0),
            ProxSet::Box { lower, upper } => {
                let mut sq = 0.0;
                for i in 0..p.dim() {
                    let e = (lower.get(i) - p.get(i))
                        .max(p.get(i) - upper.get(i))
                        .max(0.0);
                    sq += e * e;
                }
                sq.sqrt()
            }
            ProxSet::ComplementOfOpenBall { center, radius } => {
                (radius - p.distance_to(center)).max(0.0)
            }
            ProxSet::Translate { base, shift } => base.distance(&(p - shift)),
            ProxSet::IntersectBall { .. } => p.distance_to(&self.intersect_nearest(p)),
        }
    }

    /// Membership up to tolerance.
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Nearest-point projection, trusted on the open γρ-enlargement.
    ///
    /// Fails with `OutOfReach` when `distance(p) >= γ·ρ`; beyond the reach
    /// nearest points of a prox-regular set need not be unique. Convex kinds
    /// (`ρ = +∞`) never fail.
    pub fn project(&self, p: &Point, gamma: SafetyFactor) -> Result<Point, GeometryError> {
        let rho = self.prox_constant();
        if rho.is_finite() {
            let d = self.distance(p);
            let reach = gamma.value() * rho;
            if d >= reach {
                return Err(GeometryError::OutOfReach { distance: d, reach });
            }
        }
        Ok(self.project_selection(p))
    }

    /// Projection trusted on the full open ρ-enlargement. Internal machinery
    /// (normal-cone probes, boundary bisection) is allowed closer to the
    /// reach than the caller-facing γρ guard.
    pub(crate) fn project_within_reach(&self, p: &Point) -> Result<Point, GeometryError> {
        let rho = self.prox_constant();
        if rho.is_finite() {
            let d = self.distance(p);
            let reach = rho * (1.0 - REACH_MARGIN);
            if d >= reach {
                return Err(GeometryError::OutOfReach { distance: d, reach });
            }
        }
        Ok(self.project_selection(p))
    }

    /// Total selection of the nearest-point map: agrees with the projection
    /// wherever it is single-valued, and makes a fixed (axis-aligned) choice
    /// on the measure-zero singular set (e.g. the center of a removed ball).
    fn project_selection(&self, p: &Point) -> Point {
        match self {
            ProxSet::Halfspace { normal, offset } => {
                let excess = normal.dot(p) - offset;
                if excess <= 0.0 {
                    p.clone()
                } else {
                    p.add_scaled(-excess, normal)
                }
            }
            ProxSet::Ball { center, radius } => {
                let d = p.distance_to(center);
                if d <= *radius {
                    p.clone()
                } else {
                    center.add_scaled(radius / d, &(p - center))
                }
            }
            ProxSet::Box { lower, upper } => Point::new(
                (0..p.dim())
                    .map(|i| p.get(i).max(lower.get(i)).min(upper.get(i)))
                    .collect(),
            ),
            ProxSet::ComplementOfOpenBall { center, radius } => {
                let d = p.distance_to(center);
                if d >= *radius {
                    p.clone()
                } else if d > 0.0 {
                    center.add_scaled(radius / d, &(p - center))
                } else {
                    // Singular center: every boundary point is nearest.
                    center.add_scaled(*radius, &Point::axis(p.dim(), 0))
                }
            }
            ProxSet::Translate { base, shift } => &base.project_selection(&(p - shift)) + shift,
            ProxSet::IntersectBall { .. } => self.intersect_nearest(p),
        }
    }

    /// Nearest point of `base ∩ B_r[a]`.
    ///
    /// If the base projection already lands in the ball it is the answer.
    /// Otherwise the nearest point lies on the sphere `‖y − a‖ = r`, and is
    /// located by bisecting `t ↦ ‖proj_base(a + t·r·u) − a‖ − r` along the
    /// ray `u = (p − a)/‖p − a‖`: negative at `t = 0` (the interior meets the
    /// base), positive at `q = p` (the base projection left the ball).
    fn intersect_nearest(&self, p: &Point) -> Point {
        let ProxSet::IntersectBall {
            base,
            center: a,
            radius: r,
        } = self
        else {
            unreachable!("intersect_nearest on a non-intersection set")
        };
        let q = base.project_selection(p);
        if q.distance_to(a) <= *r {
            return q;
        }
        // p = a would have landed in the first branch (d(a, base) < r).
        let u = (p - a).unit().expect("ray direction from ball center");
        let family = |t: f64| base.project_selection(&a.add_scaled(t * r, &u));
        let g = |t: f64| family(t).distance_to(a) - r;
        let mut lo = 0.0;
        let mut hi = (p.distance_to(a) / r).max(1.0);
        debug_assert!(g(lo) < 0.0);
        if g(hi) < 0.0 {
            // The full ray projects back inside the ball; fall back to the
            // ball surface point toward p if it is feasible for the base.
            let rim = a.add_scaled(*r, &u);
            if base.distance(&rim) <= 1e-12 {
                return rim;
            }
        }
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cand = family(0.5 * (lo + hi));
        // The sphere point toward p is an alternative candidate whenever it
        // is feasible; keep whichever is closer.
        let rim = a.add_scaled(*r, &u);
        if base.distance(&rim) <= 1e-12 && p.distance_to(&rim) < p.distance_to(&cand) {
            rim
        } else {
            cand
        }
    }

    /// Proximal-normal-cone membership via the projection characterization:
    /// `ζ ∈ N^P(S;x)` iff `x` is the projection of `x + s·ζ` for a probe step
    /// `s` inside the reach (`s = γρ/max(‖ζ‖,1)` for finite ρ, `s = 1` for
    /// convex sets). Zero vectors are always normal.
    pub fn normal_cone_contains(
        &self,
        x: &Point,
        zeta: &Point,
        gamma: SafetyFactor,
        tol: f64,
    ) -> Result<bool, GeometryError> {
        let d = self.distance(x);
        if d > tol {
            return Err(GeometryError::InfeasiblePoint { distance: d, tol });
        }
        let nz = zeta.norm();
        if nz == 0.0 {
            return Ok(true);
        }
        let rho = self.prox_constant();
        let s = if rho.is_finite() {
            gamma.value() * rho / nz.max(1.0)
        } else {
            1.0
        };
        let probe = x.add_scaled(s, zeta);
        let back = self.project_within_reach(&probe)?;
        Ok(back.distance_to(x) <= tol)
    }

    /// `inf_{y ∈ S} ⟨v, y⟩`, i.e. minus the support function at `−v`.
    /// `-inf` when the linear form is unbounded below on the set.
    ///
    /// Only meaningful for convex kinds (callers guard on `ρ = +∞`). For ball
    /// intersections the value is computed by maximizing the concave
    /// single-multiplier dual, which is exact by strong duality (the clipped
    /// interior is nonempty by construction).
    pub(crate) fn support_min(&self, v: &Point) -> f64 {
        debug_assert!(self.prox_constant().is_infinite());
        if v.is_zero() {
            return 0.0;
        }
        match self {
            ProxSet::Halfspace { normal, offset } => {
                let along = v.dot(normal);
                let perp = v.add_scaled(-along, normal);
                if perp.norm() > 1e-12 * v.norm() || along > 0.0 {
                    f64::NEG_INFINITY
                } else {
                    along * offset
                }
            }
            ProxSet::Ball { center, radius } => v.dot(center) - radius * v.norm(),
            ProxSet::Box { lower, upper } => (0..v.dim())
                .map(|i| (v.get(i) * lower.get(i)).min(v.get(i) * upper.get(i)))
                .sum(),
            ProxSet::Translate { base, shift } => base.support_min(v) + v.dot(shift),
            ProxSet::IntersectBall {
                base,
                center,
                radius,
            } => intersect_support_min(base, center, *radius, v),
            ProxSet::ComplementOfOpenBall { .. } => f64::NEG_INFINITY,
        }
    }
}

/// `inf ⟨v, y⟩` over `base ∩ B_r[a]` for convex `base`.
fn intersect_support_min(base: &ProxSet, a: &Point, r: f64, v: &Point) -> f64 {
    // Ball-inactive case: the minimizing face of the base alone meets the
    // ball; then the clipped minimum equals the base minimum.
    if let Some(m) = support_argmin_in_ball(base, a, r, v) {
        return m;
    }
    // Ball active: maximize the concave dual
    //   φ(λ) = λ·(d(z_λ)² − ‖z_λ − a‖² − r²) + ⟨v, a⟩,   z_λ = a − v/(2λ).
    // The difference of squares is evaluated via the inner-product identity
    // d² − ‖z−a‖² = ⟨a − p, 2z − p − a⟩ (p the base projection of z), which
    // stays stable for small λ where ‖z_λ‖ blows up.
    let nv = v.norm();
    let phi = |lam: f64| {
        let z = a.add_scaled(-0.5 / lam, v);
        let p = base.project_selection(&z);
        let sq_diff = (a - &p).dot(&(&(&z - &p) + &(&z - a)));
        lam * (sq_diff - r * r) + v.dot(a)
    };
    let lam0 = nv / (2.0 * r);
    let mut lo = (lam0 * 1e-9).ln();
    let mut hi = (lam0 * 1e9).ln();
    let inv_phi = 0.5 * (3.0 - 5.0_f64.sqrt());
    let mut x1 = lo + inv_phi * (hi - lo);
    let mut x2 = hi - inv_phi * (hi - lo);
    let mut f1 = phi(x1.exp());
    let mut f2 = phi(x2.exp());
    for _ in 0..120 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - inv_phi * (hi - lo);
            f2 = phi(x2.exp());
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + inv_phi * (hi - lo);
            f1 = phi(x1.exp());
        }
    }
    f1.max(f2)
}

/// Exact minimizing-face test: nearest point of `argmin_{y ∈ base} ⟨v, y⟩`
/// to `a`, if the face is nonempty; `Some(min)` when it meets `B_r[a]`.
fn support_argmin_in_ball(base: &ProxSet, a: &Point, r: f64, v: &Point) -> Option<f64> {
    match base {
        ProxSet::Ball { center, radius } => {
            let u = v.unit().expect("nonzero v");
            let y = center.add_scaled(-*radius, &u);
            (y.distance_to(a) <= r).then(|| v.dot(&y))
        }
        ProxSet::Box { lower, upper } => {
            let w = Point::new(
                (0..v.dim())
                    .map(|i| {
                        if v.get(i) > 0.0 {
                            lower.get(i)
                        } else if v.get(i) < 0.0 {
                            upper.get(i)
                        } else {
                            a.get(i).max(lower.get(i)).min(upper.get(i))
                        }
                    })
                    .collect(),
            );
            (w.distance_to(a) <= r).then(|| v.dot(&w))
        }
        ProxSet::Halfspace { normal, offset } => {
            let along = v.dot(normal);
            let perp = v.add_scaled(-along, normal);
            if perp.norm() > 1e-12 * v.norm() || along > 0.0 {
                None // unbounded over the halfspace alone; the ball must bind
            } else if along == 0.0 {
                Some(0.0)
            } else {
                let w = a.add_scaled(offset - normal.dot(a), normal);
                (w.distance_to(a) <= r).then(|| along * offset)
            }
        }
        ProxSet::Translate { base, shift } => {
            support_argmin_in_ball(base, &(a - shift), r, v).map(|m| m + v.dot(shift))
        }
        _ => None,
    }
}
