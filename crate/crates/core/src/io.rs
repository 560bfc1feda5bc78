//! CSV and JSON writers (and the trajectory CSV reader).
//!
//! Floats are printed with the shortest round-trip representation, so
//! identical inputs produce byte-identical files and a written trajectory
//! parses back bit for bit.

use crate::config::ConfigError;
use crate::lab::{ConvergenceRow, StabilityRow};
use crate::measure::{BVTrajectory, TimeGrid};
use crate::point::Point;
use crate::residual::{Certificate, ResidualReport};
use crate::solver::RefinementRow;
use std::fmt::Write as _;

/// Shortest round-trip decimal form of a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// JSON number, with non-finite values mapped to `null`.
fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        "null".to_string()
    }
}

/// Trajectory CSV: a convention comment, a `t,x1..xd` header, one row per
/// grid time.
pub fn write_trajectory_csv(x: &BVTrajectory) -> String {
    let mut out = String::new();
    out.push_str(
        "# right-continuous piecewise-constant trajectory: x(t) = row k for t in [t_k, t_{k+1})\n",
    );
    out.push('t');
    for i in 1..=x.dim() {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for (t, v) in x.grid().times().iter().zip(x.values()) {
        out.push_str(&fmt_f64(*t));
        for c in v.coords() {
            let _ = write!(out, ",{}", fmt_f64(*c));
        }
        out.push('\n');
    }
    out
}

/// Parse the trajectory CSV format written by [`write_trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<BVTrajectory, ConfigError> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let mut nums = Vec::new();
        for tok in line.split(',') {
            let v: f64 = tok.trim().parse().map_err(|_| ConfigError {
                line: idx + 1,
                message: format!("bad number '{tok}' in trajectory CSV"),
            })?;
            nums.push(v);
        }
        if nums.len() < 2 {
            return Err(ConfigError {
                line: idx + 1,
                message: "trajectory rows need a time and at least one coordinate".into(),
            });
        }
        let d = nums.len() - 1;
        if *dim.get_or_insert(d) != d {
            return Err(ConfigError {
                line: idx + 1,
                message: "trajectory rows change dimension".into(),
            });
        }
        times.push(nums[0]);
        values.push(Point::new(nums[1..].to_vec()));
    }
    let grid = TimeGrid::new(times).map_err(|e| ConfigError {
        line: 0,
        message: e.to_string(),
    })?;
    BVTrajectory::new(grid, values).map_err(|e| ConfigError {
        line: 0,
        message: e.to_string(),
    })
}

/// Residual CSV: one row per ν-atom with the running residual sum.
pub fn write_residual_csv(report: &ResidualReport) -> String {
    let mut out = String::from("t,mass,norm_v,m,cumulative_R\n");
    let mut acc = 0.0;
    for a in &report.atoms {
        acc += a.m * a.mass;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(a.time),
            fmt_f64(a.mass),
            fmt_f64(a.norm_v),
            fmt_f64(a.m),
            fmt_f64(acc)
        );
    }
    out
}

/// Refinement log CSV. The `residual` column is the total defect against the
/// continuous-time family (the refinement stopping indicator); `sup_error`
/// stays empty when no reference solution is known.
pub fn write_refinement_csv(rows: &[RefinementRow], sup_errors: Option<&[f64]>) -> String {
    let mut out = String::from("level,h_max,residual,variation,sup_error_if_reference_known\n");
    for (i, r) in rows.iter().enumerate() {
        let sup = sup_errors
            .and_then(|s| s.get(i))
            .map(|v| fmt_f64(*v))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.level,
            fmt_f64(r.h_max),
            fmt_f64(r.defect),
            fmt_f64(r.variation),
            sup
        );
    }
    out
}

/// Certificate JSON record.
pub fn write_certificate_json(report: &ResidualReport, variation: f64) -> String {
    let (verdict, worst_time, worst_m) = match &report.certificate {
        Certificate::Solution => {
            let worst = report
                .atoms
                .iter()
                .min_by(|a, b| a.m.partial_cmp(&b.m).unwrap());
            (
                "Solution",
                worst.map(|a| a.time).unwrap_or(f64::NAN),
                worst.map(|a| a.m).unwrap_or(0.0),
            )
        }
        Certificate::NotSolution {
            worst_time,
            worst_m,
        } => ("NotSolution", *worst_time, *worst_m),
    };
    format!(
        "{{\n  \"verdict\": \"{verdict}\",\n  \"R\": {},\n  \"lower_bound\": {},\n  \"worst_time\": {},\n  \"worst_m\": {},\n  \"tolerances\": {{\n    \"certificate_tol\": {},\n    \"scaled_certificate_tol\": {},\n    \"feasibility_tol\": {},\n    \"gamma\": {}\n  }}\n}}\n",
        json_f64(report.residual),
        json_f64(report.lower_bound),
        json_f64(worst_time),
        json_f64(worst_m),
        json_f64(report.tolerances.certificate_tol),
        json_f64(report.scaled_certificate_tol(variation)),
        json_f64(report.tolerances.feasibility_tol),
        json_f64(report.tolerances.gamma.value()),
    )
}

/// Convergence study CSV.
pub fn write_convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("level,h_max,sup_error,defect,residual,variation\n");
    for r in rows {
        let sup = r.sup_error.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.level,
            fmt_f64(r.h_max),
            sup,
            fmt_f64(r.defect),
            fmt_f64(r.residual),
            fmt_f64(r.variation)
        );
    }
    out
}

/// Stability study CSV.
pub fn write_stability_csv(rows: &[StabilityRow]) -> String {
    let mut out = String::from("n,defect,residual,variation,sup_dist_to_next\n");
    for r in rows {
        let sup = r.sup_dist_to_next.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.defect),
            fmt_f64(r.residual),
            fmt_f64(r.variation),
            sup
        );
    }
    out
}

/// One-object JSON summary of a study run.
pub fn write_study_json(
    kind: &str,
    scenario: Option<&str>,
    seed: u64,
    passed: bool,
    detail: &str,
) -> String {
    let name = scenario
        .map(|s| format!("\"{s}\""))
        .unwrap_or_else(|| "null".to_string());
    format!(
        "{{\n  \"kind\": \"{kind}\",\n  \"scenario\": {name},\n  \"seed\": {seed},\n  \"passed\": {passed},\n  \"detail\": \"{detail}\"\n}}\n"
    )
}
