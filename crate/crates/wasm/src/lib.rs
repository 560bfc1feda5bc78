//! Browser demo: run the catching-up solver, break trajectories and watch
//! the certificate catch them, and inspect grid-refinement defect decay.
//!
//! Every export returns a JSON string; the static page in `www/` renders it
//! on a canvas with no framework.

use moreau::io::fmt_f64;
use moreau::lab::{self, Scenario};
use moreau::measure::{BVTrajectory, ReferenceMeasure};
use moreau::point::Point;
use moreau::residual::{self, Certificate, ResidualReport, Tolerances};
use moreau::rng::SplitMix64;
use moreau::solver::{self, SolveConfig};
use moreau::ProxSet;
use wasm_bindgen::prelude::*;

/// Frames used to sample the moving set for drawing.
const SET_SAMPLES: usize = 240;

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn json_point(p: &Point) -> String {
    let coords: Vec<String> = p.coords().iter().map(|c| fmt_f64(*c)).collect();
    format!("[{}]", coords.join(","))
}

/// Geometry of one set value, reduced to what the canvas needs.
fn set_descriptor(set: &ProxSet) -> String {
    match set {
        ProxSet::Translate { base, shift } => {
            let inner = set_descriptor(base);
            format!("{{\"shift\":{},\"base\":{inner}}}", json_point(shift))
        }
        ProxSet::Box { lower, upper } => format!(
            "{{\"kind\":\"box\",\"lower\":{},\"upper\":{}}}",
            json_point(lower),
            json_point(upper)
        ),
        ProxSet::Ball { center, radius } => format!(
            "{{\"kind\":\"ball\",\"center\":{},\"radius\":{}}}",
            json_point(center),
            fmt_f64(*radius)
        ),
        ProxSet::ComplementOfOpenBall { center, radius } => format!(
            "{{\"kind\":\"hole\",\"center\":{},\"radius\":{}}}",
            json_point(center),
            fmt_f64(*radius)
        ),
        ProxSet::Halfspace { normal, offset } => format!(
            "{{\"kind\":\"halfspace\",\"normal\":{},\"offset\":{}}}",
            json_point(normal),
            fmt_f64(*offset)
        ),
        ProxSet::IntersectBall {
            base,
            center,
            radius,
        } => format!(
            "{{\"kind\":\"clipped\",\"center\":{},\"radius\":{},\"base\":{}}}",
            json_point(center),
            fmt_f64(*radius),
            set_descriptor(base)
        ),
    }
}

fn trajectory_json(x: &BVTrajectory) -> String {
    let times: Vec<String> = x.grid().times().iter().map(|t| fmt_f64(*t)).collect();
    let values: Vec<String> = x.values().iter().map(json_point).collect();
    format!(
        "{{\"times\":[{}],\"values\":[{}]}}",
        times.join(","),
        values.join(",")
    )
}

fn frames_json(s: &Scenario) -> String {
    let horizon = s.moving_set.horizon();
    let mut frames = Vec::with_capacity(SET_SAMPLES + 1);
    for k in 0..=SET_SAMPLES {
        let t = horizon * k as f64 / SET_SAMPLES as f64;
        let set = s.moving_set.at(t).expect("sample within horizon");
        frames.push(format!(
            "{{\"t\":{},\"set\":{}}}",
            fmt_f64(t),
            set_descriptor(&set)
        ));
    }
    format!("[{}]", frames.join(","))
}

fn report_json(report: &ResidualReport) -> String {
    let (verdict, worst_time, worst_m) = match &report.certificate {
        Certificate::Solution => ("Solution".to_string(), f64::NAN, 0.0),
        Certificate::NotSolution {
            worst_time,
            worst_m,
        } => ("NotSolution".to_string(), *worst_time, *worst_m),
    };
    let profile: Vec<String> = report
        .atoms
        .iter()
        .map(|a| {
            format!(
                "{{\"t\":{},\"m\":{},\"mass\":{}}}",
                fmt_f64(a.time),
                fmt_f64(a.m),
                fmt_f64(a.mass)
            )
        })
        .collect();
    let num = |x: f64| {
        if x.is_finite() {
            fmt_f64(x)
        } else {
            "null".to_string()
        }
    };
    format!(
        "{{\"verdict\":\"{verdict}\",\"residual\":{},\"gap_integral\":{},\"gap_sup\":{},\"defect\":{},\"worst_time\":{},\"worst_m\":{},\"profile\":[{}]}}",
        num(report.residual),
        num(report.feasibility_gap_integral),
        num(report.feasibility_gap_sup),
        num(report.total_defect),
        num(worst_time),
        num(worst_m),
        profile.join(",")
    )
}

fn grid_for(s: &Scenario, level: u32) -> moreau::TimeGrid {
    let mut grid = lab::base_grid(s);
    for _ in 0..level {
        grid = grid.refine_half();
    }
    grid
}

fn error_json(msg: impl std::fmt::Display) -> String {
    format!("{{\"error\":\"{}\"}}", json_escape(&msg.to_string()))
}

/// Built-in scenario table as JSON.
#[wasm_bindgen]
pub fn scenario_list() -> String {
    let rows: Vec<String> = lab::builtin_scenarios()
        .iter()
        .map(|s| {
            format!(
                "{{\"name\":\"{}\",\"description\":\"{}\",\"dim\":{},\"horizon\":{},\"rho\":{}}}",
                s.name,
                json_escape(s.description),
                s.moving_set.dim(),
                fmt_f64(s.moving_set.horizon()),
                if s.moving_set.rho().is_finite() {
                    fmt_f64(s.moving_set.rho())
                } else {
                    "null".to_string()
                }
            )
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Solve a built-in scenario on its base grid refined `level` times; returns
/// the trajectory, set frames for drawing, the residual report against the
/// true family, and the reference path when one exists.
#[wasm_bindgen]
pub fn simulate(name: &str, level: u32) -> String {
    let s = match lab::scenario(name) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let grid = grid_for(&s, level);
    let cfg = SolveConfig::new(grid);
    let x = match solver::catching_up(&s.moving_set, &s.x0, &cfg) {
        Ok(x) => x,
        Err(e) => return error_json(e),
    };
    let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
    let report = match residual::integral_residual(&x, &nu, &s.moving_set, &Tolerances::default()) {
        Ok(r) => r,
        Err(e) => return error_json(e),
    };
    let reference = match s.reference {
        Some(r) => {
            let pts: Vec<String> = x
                .grid()
                .times()
                .iter()
                .map(|t| format!("{{\"t\":{},\"x\":{}}}", fmt_f64(*t), json_point(&r(*t))))
                .collect();
            format!("[{}]", pts.join(","))
        }
        None => "null".to_string(),
    };
    format!(
        "{{\"dim\":{},\"horizon\":{},\"trajectory\":{},\"frames\":{},\"report\":{},\"reference\":{}}}",
        s.moving_set.dim(),
        fmt_f64(s.moving_set.horizon()),
        trajectory_json(&x),
        frames_json(&s),
        report_json(&report),
        reference
    )
}

/// Kick the solver output by seeded noise of size `kick`, re-project the
/// kicked values so they stay feasible at grid times, and certify the result
/// against the true family. With `kick = 0` the certificate comes back
/// Solution; any real kick is caught as NotSolution with a localized worst
/// atom.
#[wasm_bindgen]
pub fn certify_perturbed(name: &str, level: u32, kick: f64, seed: u32) -> String {
    let s = match lab::scenario(name) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let grid = grid_for(&s, level);
    let cfg = SolveConfig::new(grid);
    let x = match solver::catching_up(&s.moving_set, &s.x0, &cfg) {
        Ok(x) => x,
        Err(e) => return error_json(e),
    };
    let mut rng = SplitMix64::new(seed as u64);
    let gamma = moreau::SafetyFactor::default();
    let mut values = x.values().to_vec();
    for (k, t) in x.grid().times().iter().enumerate().skip(1) {
        if kick > 0.0 {
            let dir = rng.unit_vector(values[k].dim());
            let kicked = values[k].add_scaled(kick, &dir);
            let set = s.moving_set.at(*t).expect("grid time");
            if let Ok(back) = set.project(&kicked, gamma) {
                values[k] = back;
            }
        }
    }
    let y = match BVTrajectory::new(x.grid().clone(), values) {
        Ok(y) => y,
        Err(e) => return error_json(e),
    };
    let nu = ReferenceMeasure::canonical_or_lebesgue(&y);
    let report = match residual::certify(&y, &nu, &s.moving_set, &Tolerances::default()) {
        Ok(r) => r,
        Err(e) => return error_json(e),
    };
    format!(
        "{{\"dim\":{},\"horizon\":{},\"trajectory\":{},\"frames\":{},\"report\":{}}}",
        s.moving_set.dim(),
        fmt_f64(s.moving_set.horizon()),
        trajectory_json(&y),
        frames_json(&s),
        report_json(&report),
    )
}

/// Grid-halving defect decay rows for a built-in scenario.
#[wasm_bindgen]
pub fn convergence(name: &str, levels: u32) -> String {
    let s = match lab::scenario(name) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let rows = match lab::convergence_study(&s, levels) {
        Ok(r) => r,
        Err(e) => return error_json(e),
    };
    let body: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{{\"level\":{},\"h\":{},\"defect\":{},\"sup_error\":{}}}",
                r.level,
                fmt_f64(r.h_max),
                fmt_f64(r.defect),
                r.sup_error.map(fmt_f64).unwrap_or_else(|| "null".into())
            )
        })
        .collect();
    format!("[{}]", body.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_emits_valid_shapes() {
        let out = simulate("ramp", 1);
        assert!(out.contains("\"trajectory\""), "{out}");
        assert!(out.contains("\"frames\""));
        assert!(!out.contains("\"error\""));
    }

    #[test]
    fn perturbed_run_flips_the_verdict() {
        let clean = certify_perturbed("hole", 1, 0.0, 7);
        assert!(clean.contains("\"verdict\":\"Solution\""), "{clean}");
        let kicked = certify_perturbed("hole", 1, 0.3, 7);
        assert!(kicked.contains("\"verdict\":\"NotSolution\""), "{kicked}");
    }

    #[test]
    fn unknown_scenario_reports_an_error() {
        assert!(simulate("nope", 0).contains("\"error\""));
    }
}
