//! Independent brute-force oracles for the verification suites.
//!
//! This module exists for tests only: it evaluates reference values by dense
//! parametric sampling of the sets, using nothing but their defining
//! parameters and membership inequalities. It deliberately never calls the
//! distance, projection, or support-function code whose results it is used
//! to check.
//!
//! Sets are sampled in their natural parameters (polar grids for spheres
//! with the boundary radius on-grid, coordinate grids for boxes, tangent
//! plus depth grids for halfspaces), refined by zooming on the running
//! minimizer. For ball-clipped sets the boundary-boundary interface is
//! enumerated explicitly (circles down to closed-form corner points), so
//! every candidate active set is sampled with its boundary exactly on the
//! grid and the zoom converges at second order.

use crate::geometry::ProxSet;
use crate::point::Point;

/// Slack used by the membership filters: boundary candidates are generated
/// exactly on the defining surfaces, where smooth rounding patterns would
/// otherwise reject whole arcs; a point admitted an eps outside the set
/// moves the sampled minimum by at most `‖∇f‖·eps`, far below the compared
/// tolerances.
const MEMBER_SLACK: f64 = 1e-9;

/// Membership by defining inequalities, up to the boundary slack.
pub fn member(set: &ProxSet, y: &Point) -> bool {
    let eps = MEMBER_SLACK;
    match set {
        ProxSet::Halfspace { normal, offset } => normal.dot(y) <= offset + eps,
        ProxSet::Ball { center, radius } => y.distance_to(center) <= radius + eps,
        ProxSet::Box { lower, upper } => {
            (0..y.dim()).all(|i| lower.get(i) - eps <= y.get(i) && y.get(i) <= upper.get(i) + eps)
        }
        ProxSet::ComplementOfOpenBall { center, radius } => y.distance_to(center) >= radius - eps,
        ProxSet::Translate { base, shift } => member(base, &(y - shift)),
        ProxSet::IntersectBall {
            base,
            center,
            radius,
        } => member(base, y) && y.distance_to(center) <= radius + eps,
    }
}

/// The raw variational objective `⟨v, y−x⟩ + (‖v‖/2ρ)‖y−x‖²` (quadratic term
/// absent for `ρ = ∞`).
pub fn objective(x: &Point, v: &Point, rho: f64, y: &Point) -> f64 {
    let diff = y - x;
    let quad = if rho.is_finite() {
        v.norm() / (2.0 * rho) * diff.dot(&diff)
    } else {
        0.0
    };
    v.dot(&diff) + quad
}

/// Minimum of the variational objective over the set.
///
/// `spread` bounds how far from `x` the minimizer can be (for finite ρ any
/// value `> 2ρ` works because the objective is positive beyond; for convex
/// kinds pass a bound covering the set's parameters). Returns `+inf` when no
/// sample was feasible (does not happen for nonempty sets with `x ∈ S`).
pub fn min_objective(set: &ProxSet, x: &Point, v: &Point, rho: f64, spread: f64) -> f64 {
    let score = |y: &Point| objective(x, v, rho, y);
    let mut best = f64::INFINITY;
    sample_set(set, x, &score, spread, &|_| true, &mut best);
    best
}

/// Nearest-point distance from `p` to the set by the same parametric search
/// (an independent check of the projection machinery).
pub fn min_distance(set: &ProxSet, p: &Point, spread: f64) -> f64 {
    let score = |y: &Point| p.distance_to(y);
    let mut best = f64::INFINITY;
    sample_set(set, p, &score, spread, &|_| true, &mut best);
    best
}

/// Dispatch: sample `set` around `anchor`, keeping only points passing
/// `accept`, folding `score` into `best`.
fn sample_set(
    set: &ProxSet,
    anchor: &Point,
    score: &dyn Fn(&Point) -> f64,
    spread: f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    match set {
        ProxSet::Box { lower, upper } => {
            let dim = lower.dim();
            let lo: Vec<f64> = (0..dim).map(|i| lower.get(i)).collect();
            let hi: Vec<f64> = (0..dim).map(|i| upper.get(i)).collect();
            minimize_params(
                &lo,
                &hi,
                &[],
                |p| {
                    let y = Point::new(p.to_vec());
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        ProxSet::Ball { center, radius } => {
            sample_radial(center, 0.0, *radius, score, accept, best);
        }
        ProxSet::ComplementOfOpenBall { center, radius } => {
            let outer = radius + spread + anchor.distance_to(center);
            sample_radial(center, *radius, outer, score, accept, best);
        }
        ProxSet::Halfspace { normal, offset } => {
            let dim = normal.dim();
            // anchor on the boundary plane nearest the query point
            let p0 = anchor.add_scaled(offset - normal.dot(anchor), normal);
            let tangent = tangent_basis(normal);
            let mut lo = vec![-spread; dim];
            let mut hi = vec![spread; dim];
            lo[dim - 1] = 0.0; // depth into the halfspace
            hi[dim - 1] = spread;
            minimize_params(
                &lo[..dim],
                &hi[..dim],
                &[],
                |p| {
                    let mut y = p0.add_scaled(-p[dim - 1], normal);
                    for (i, e) in tangent.iter().enumerate() {
                        y = y.add_scaled(p[i], e);
                    }
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        ProxSet::Translate { base, shift } => {
            let anchor_base = anchor - shift;
            let score_shifted = |y: &Point| score(&(y + shift));
            let accept_shifted = |y: &Point| accept(&(y + shift));
            let mut inner_best = f64::INFINITY;
            sample_set(
                base,
                &anchor_base,
                &score_shifted,
                spread,
                &accept_shifted,
                &mut inner_best,
            );
            *best = best.min(inner_best);
        }
        ProxSet::IntersectBall {
            base,
            center,
            radius,
        } => {
            // base samples clipped by the ball
            let accept_clipped =
                |y: &Point| y.distance_to(center) <= radius + MEMBER_SLACK && accept(y);
            sample_set(base, anchor, score, spread, &accept_clipped, best);
            // clip sphere samples inside the base
            let accept_base = |y: &Point| member(base, y) && accept(y);
            sample_radial(center, *radius, *radius, score, &accept_base, best);
            // boundary-boundary interface: circles and corner points
            sample_interface(base, center, *radius, score, accept, best);
        }
    }
}

/// Polar sampling of a radial shell `r ∈ [r_lo, r_hi]` around `c` (the shell
/// bounds are on-grid; `r_lo == r_hi` samples a sphere).
fn sample_radial(
    c: &Point,
    r_lo: f64,
    r_hi: f64,
    score: &dyn Fn(&Point) -> f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    let dim = c.dim();
    let tau = std::f64::consts::TAU;
    let pi = std::f64::consts::PI;
    match dim {
        1 => {
            // the shell splits into two segments
            for sign in [-1.0, 1.0] {
                minimize_params(
                    &[r_lo],
                    &[r_hi],
                    &[],
                    |p| {
                        let y = Point::new(vec![c.get(0) + sign * p[0]]);
                        accept(&y).then(|| score(&y))
                    },
                    best,
                );
            }
        }
        2 => {
            minimize_params(
                &[0.0, r_lo],
                &[tau, r_hi],
                &[0],
                |p| {
                    let y = Point::new(vec![
                        c.get(0) + p[1] * p[0].cos(),
                        c.get(1) + p[1] * p[0].sin(),
                    ]);
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        3 => {
            minimize_params(
                &[0.0, 0.0, r_lo],
                &[tau, pi, r_hi],
                &[0],
                |p| {
                    let (theta, phi, r) = (p[0], p[1], p[2]);
                    let y = Point::new(vec![
                        c.get(0) + r * phi.sin() * theta.cos(),
                        c.get(1) + r * phi.sin() * theta.sin(),
                        c.get(2) + r * phi.cos(),
                    ]);
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        _ => panic!("oracle sampling supports dimensions 1..=3"),
    }
}

/// Candidates on and around `∂B_r[a] ∩ ∂(base)`.
///
/// The interface is enumerated as circles (point pairs in the plane) per
/// active base boundary, plus closed-form edge points for boxes in
/// dimension 3. Each circle is sampled three ways: exactly along the circle,
/// and in narrow tubes around it on both host surfaces (the clip sphere and
/// the base boundary). The tubes seed the zoom inside feasibility slivers
/// narrower than the global samplers' coarsest spacing, which would
/// otherwise never anchor a window there.
fn sample_interface(
    base: &ProxSet,
    a: &Point,
    r: f64,
    score: &dyn Fn(&Point) -> f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    // peel translations off the base
    if let ProxSet::Translate { base: inner, shift } = base {
        let a_base = a - shift;
        let score_shifted = |y: &Point| score(&(y + shift));
        let accept_shifted = |y: &Point| accept(&(y + shift));
        let mut inner_best = f64::INFINITY;
        sample_interface(
            inner,
            &a_base,
            r,
            &score_shifted,
            &accept_shifted,
            &mut inner_best,
        );
        *best = best.min(inner_best);
        return;
    }
    let accept_all = |y: &Point| member(base, y) && accept(y);
    let clip_inside = |y: &Point| y.distance_to(a) <= r + 1e-9;

    // interface circles: (axis from a, signed plane offset h, circle radius)
    // together with the base host surface carrying the second tube
    enum Host {
        Sphere { center: Point, radius: f64 },
        Plane,
    }
    let mut circles: Vec<(Point, f64, f64, Host)> = Vec::new();
    match base {
        ProxSet::Ball { center, radius } | ProxSet::ComplementOfOpenBall { center, radius } => {
            let d = center.distance_to(a);
            if d > 0.0 {
                let alpha = (d * d + r * r - radius * radius) / (2.0 * d);
                if r * r - alpha * alpha >= 0.0 {
                    let axis = (center - a).scale(1.0 / d);
                    circles.push((
                        axis,
                        alpha,
                        (r * r - alpha * alpha).sqrt(),
                        Host::Sphere {
                            center: center.clone(),
                            radius: *radius,
                        },
                    ));
                }
            }
        }
        ProxSet::Halfspace { normal, offset } => {
            let gap = normal.dot(a) - offset;
            if r * r - gap * gap >= 0.0 {
                circles.push((
                    normal.clone(),
                    -gap,
                    (r * r - gap * gap).sqrt(),
                    Host::Plane,
                ));
            }
        }
        ProxSet::Box { lower, upper } => {
            let dim = a.dim();
            for i in 0..dim {
                for bound in [lower.get(i), upper.get(i)] {
                    let gap = bound - a.get(i);
                    if r * r - gap * gap >= 0.0 {
                        circles.push((
                            Point::axis(dim, i),
                            gap,
                            (r * r - gap * gap).sqrt(),
                            Host::Plane,
                        ));
                    }
                }
            }
        }
        _ => {}
    }

    for (axis, h, rad, host) in &circles {
        // the circle itself (both constraints exactly active)
        circle_candidates(a, axis, *h, *rad, score, &accept_all, best);
        // tube on the clip sphere around the circle
        tube_on_sphere(a, r, axis, *h, score, &accept_all, best);
        // tube on the base boundary surface
        match host {
            Host::Sphere { center, radius } => {
                let q = a.add_scaled(*h, axis);
                let h_host = (&q - center).dot(axis);
                tube_on_sphere(
                    center,
                    *radius,
                    axis,
                    h_host,
                    score,
                    &|y| clip_inside(y) && accept(y),
                    best,
                );
            }
            Host::Plane => {
                let q = a.add_scaled(*h, axis);
                tube_on_plane(
                    &q,
                    axis,
                    *rad,
                    score,
                    &|y| member(base, y) && clip_inside(y) && accept(y),
                    best,
                );
            }
        }
    }

    if let ProxSet::Box { lower, upper } = base {
        let dim = a.dim();
        // edge points in dimension 3: two coordinates pinned
        if dim == 3 {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let k = 3 - i - j;
                    for bi in [lower.get(i), upper.get(i)] {
                        for bj in [lower.get(j), upper.get(j)] {
                            let gap2 = r * r - (bi - a.get(i)).powi(2) - (bj - a.get(j)).powi(2);
                            if gap2 < 0.0 {
                                continue;
                            }
                            for sign in [-1.0, 1.0] {
                                let mut coords = vec![0.0; 3];
                                coords[i] = bi;
                                coords[j] = bj;
                                coords[k] = a.get(k) + sign * gap2.sqrt();
                                let y = Point::new(coords);
                                if accept_all(&y) {
                                    *best = best.min(score(&y));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Half-width of the interface tubes, in radians on spheres and in length
/// units on planes; chosen above the coarsest global grid spacing so every
/// sliver overlaps a tube.
const TUBE_WIDTH: f64 = 0.4;

/// Sample a band of the sphere `(o, big_r)` around its circle at polar
/// offset `h` along `axis` (the circle row sits exactly mid-grid).
fn tube_on_sphere(
    o: &Point,
    big_r: f64,
    axis: &Point,
    h: f64,
    score: &dyn Fn(&Point) -> f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    let dim = o.dim();
    if dim < 2 {
        return;
    }
    let e = tangent_basis(axis);
    let phi0 = (h / big_r).clamp(-1.0, 1.0).acos();
    let point2 = |phi: f64| {
        o.add_scaled(big_r * phi.cos(), axis)
            .add_scaled(big_r * phi.sin(), &e[0])
    };
    match dim {
        2 => {
            // two interface points at polar angles ±phi0
            for sign in [-1.0, 1.0] {
                let center = sign * phi0;
                minimize_params(
                    &[center - TUBE_WIDTH],
                    &[center + TUBE_WIDTH],
                    &[],
                    |p| {
                        let y = point2(p[0]);
                        accept(&y).then(|| score(&y))
                    },
                    best,
                );
            }
        }
        3 => {
            minimize_params(
                &[0.0, phi0 - TUBE_WIDTH],
                &[std::f64::consts::TAU, phi0 + TUBE_WIDTH],
                &[0],
                |p| {
                    let (theta, phi) = (p[0], p[1]);
                    let y = o
                        .add_scaled(big_r * phi.cos(), axis)
                        .add_scaled(big_r * phi.sin() * theta.cos(), &e[0])
                        .add_scaled(big_r * phi.sin() * theta.sin(), &e[1]);
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        _ => {}
    }
}

/// Sample an annulus of the plane through `q` with normal `axis` around the
/// circle of the given radius (the circle row sits exactly mid-grid;
/// negative radii mirror through `q` and stay on the plane).
fn tube_on_plane(
    q: &Point,
    axis: &Point,
    rad: f64,
    score: &dyn Fn(&Point) -> f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    let dim = q.dim();
    if dim < 2 {
        return;
    }
    let e = tangent_basis(axis);
    match dim {
        2 => {
            for sign in [-1.0, 1.0] {
                let center = sign * rad;
                minimize_params(
                    &[center - TUBE_WIDTH],
                    &[center + TUBE_WIDTH],
                    &[],
                    |p| {
                        let y = q.add_scaled(p[0], &e[0]);
                        accept(&y).then(|| score(&y))
                    },
                    best,
                );
            }
        }
        3 => {
            minimize_params(
                &[0.0, rad - TUBE_WIDTH],
                &[std::f64::consts::TAU, rad + TUBE_WIDTH],
                &[0],
                |p| {
                    let y = q
                        .add_scaled(p[1] * p[0].cos(), &e[0])
                        .add_scaled(p[1] * p[0].sin(), &e[1]);
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        _ => {}
    }
}

/// Minimize over the circle `a + offset·axis + rad·(cos θ·e1 + sin θ·e2)`.
fn circle_candidates(
    a: &Point,
    axis: &Point,
    offset: f64,
    rad: f64,
    score: &dyn Fn(&Point) -> f64,
    accept: &dyn Fn(&Point) -> bool,
    best: &mut f64,
) {
    let center = a.add_scaled(offset, axis);
    let dim = a.dim();
    match dim {
        1 => {
            if accept(&center) {
                *best = best.min(score(&center));
            }
        }
        2 => {
            let e = tangent_basis(axis);
            for sign in [-1.0, 1.0] {
                let y = center.add_scaled(sign * rad, &e[0]);
                if accept(&y) {
                    *best = best.min(score(&y));
                }
            }
        }
        3 => {
            let e = tangent_basis(axis);
            minimize_params(
                &[0.0],
                &[std::f64::consts::TAU],
                &[0],
                |p| {
                    let y = center
                        .add_scaled(rad * p[0].cos(), &e[0])
                        .add_scaled(rad * p[0].sin(), &e[1]);
                    accept(&y).then(|| score(&y))
                },
                best,
            );
        }
        _ => panic!("oracle circles support dimensions 1..=3"),
    }
}

/// Orthonormal basis of the hyperplane orthogonal to `n` (unit).
fn tangent_basis(n: &Point) -> Vec<Point> {
    let dim = n.dim();
    let mut basis: Vec<Point> = Vec::new();
    for i in 0..dim {
        let mut e = Point::axis(dim, i);
        e = e.add_scaled(-e.dot(n), n);
        for b in &basis {
            e = e.add_scaled(-e.dot(b), b);
        }
        if let Some(u) = e.unit() {
            if u.norm() > 0.5 {
                basis.push(u);
            }
        }
        if basis.len() == dim - 1 {
            break;
        }
    }
    basis
}

/// Multiscale grid minimization over a parameter box, zooming on the running
/// best; windows clamp to the bounds except for periodic parameters.
fn minimize_params(
    lo: &[f64],
    hi: &[f64],
    periodic: &[usize],
    eval: impl Fn(&[f64]) -> Option<f64>,
    best: &mut f64,
) {
    // enough zoom for first-order (conical) minima of distance objectives,
    // where the window only shrinks linearly
    const LEVELS: u32 = 18;
    let dims = lo.len();
    let n: usize = match dims {
        1 => 601,
        2 => 41,
        _ => 15,
    };
    let mut c_lo = lo.to_vec();
    let mut c_hi = hi.to_vec();
    for _level in 0..LEVELS {
        let mut level_best: Option<(f64, Vec<f64>)> = None;
        let mut idx = vec![0usize; dims];
        'grid: loop {
            let p: Vec<f64> = (0..dims)
                .map(|i| c_lo[i] + (c_hi[i] - c_lo[i]) * idx[i] as f64 / (n - 1) as f64)
                .collect();
            if let Some(f) = eval(&p) {
                if level_best.as_ref().is_none_or(|(fb, _)| f < *fb) {
                    level_best = Some((f, p));
                }
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < n {
                    continue 'grid;
                }
                *slot = 0;
            }
            break;
        }
        let Some((f, p)) = level_best else { return };
        *best = best.min(f);
        for i in 0..dims {
            let spacing = (c_hi[i] - c_lo[i]) / (n - 1) as f64;
            let half = 2.5 * spacing;
            let (mut nl, mut nh) = (p[i] - half, p[i] + half);
            if !periodic.contains(&i) {
                nl = nl.max(lo[i]);
                nh = nh.min(hi[i]);
            }
            c_lo[i] = nl;
            c_hi[i] = nh;
        }
    }
}
