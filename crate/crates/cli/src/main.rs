//! Batch front door: solve, certify, and run studies from scenario configs.
//!
//! Exit codes: 0 success (certify: Solution), 1 certify found NotSolution,
//! 2 a catching-up step left the prox reach, 3 config or input error,
//! 4 a study invariant failed (or a refinement budget ran out).

use moreau::config::{Problem, ScenarioConfig};
use moreau::io;
use moreau::lab;
use moreau::measure::ReferenceMeasure;
use moreau::residual;
use moreau::solver::{self, RefinementRow, SolverError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE: &str = "\
moreau — sweeping processes driven by moving prox-regular sets

USAGE:
    moreau <command> [flags]

COMMANDS:
    solve            run the catching-up scheme; writes trajectory.csv and
                     refinement_log.csv (set --tol or target_defect to refine)
    certify          check a trajectory CSV against the config's moving set;
                     writes certificate.json and residual.csv
    converge         grid-halving convergence study on a built-in scenario;
                     writes convergence.csv and study.json
    stability        set-approximation stability study on a built-in scenario;
                     writes stability.csv and study.json
    list-scenarios   print the built-in scenario table

FLAGS:
    --config PATH       scenario config file (required except list-scenarios)
    --out DIR           output directory (default '.')
    --trajectory PATH   trajectory CSV (certify only)
    --tol X             target defect for refinement (solve)
    --levels N          number of grid levels (converge)
    --nmax N            finest mesh count (stability)
    --seed N            seed recorded in study summaries

EXIT CODES:
    0 success / Solution    1 NotSolution    2 step out of prox reach
    3 config or input error    4 study invariant failed / budget exhausted
";

struct Args {
    command: String,
    config: Option<PathBuf>,
    out: PathBuf,
    trajectory: Option<PathBuf>,
    tol: Option<f64>,
    levels: Option<u32>,
    nmax: Option<usize>,
    seed: Option<u64>,
}

fn parse_args() -> Result<Args, String> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(|| USAGE.to_string())?;
    let mut args = Args {
        command,
        config: None,
        out: PathBuf::from("."),
        trajectory: None,
        tol: None,
        levels: None,
        nmax: None,
        seed: None,
    };
    while let Some(flag) = argv.next() {
        let mut value = || {
            argv.next()
                .ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value()?)),
            "--out" => args.out = PathBuf::from(value()?),
            "--trajectory" => args.trajectory = Some(PathBuf::from(value()?)),
            "--tol" => {
                args.tol = Some(
                    value()?
                        .parse()
                        .map_err(|_| "bad --tol value".to_string())?,
                )
            }
            "--levels" => {
                args.levels = Some(
                    value()?
                        .parse()
                        .map_err(|_| "bad --levels value".to_string())?,
                )
            }
            "--nmax" => {
                args.nmax = Some(
                    value()?
                        .parse()
                        .map_err(|_| "bad --nmax value".to_string())?,
                )
            }
            "--seed" => {
                args.seed = Some(
                    value()?
                        .parse()
                        .map_err(|_| "bad --seed value".to_string())?,
                )
            }
            "--help" | "-h" => return Err(USAGE.to_string()),
            other => return Err(format!("unknown flag '{other}'\n\n{USAGE}")),
        }
    }
    Ok(args)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("moreau: {msg}");
    ExitCode::from(code)
}

/// stdout may be a closed pipe (e.g. piped into head); ignore write errors.
fn say(line: String) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn load_problem(args: &Args) -> Result<Problem, String> {
    let path = args.config.as_ref().ok_or("missing --config")?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut problem = ScenarioConfig::parse(&text)
        .and_then(|c| c.build())
        .map_err(|e| e.to_string())?;
    if let Some(t) = args.tol {
        problem.target_defect = Some(t);
    }
    if let Some(l) = args.levels {
        problem.levels = l;
    }
    if let Some(n) = args.nmax {
        problem.nmax = n;
    }
    if let Some(s) = args.seed {
        problem.seed = s;
    }
    Ok(problem)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_solve(args: &Args) -> ExitCode {
    let problem = match load_problem(args) {
        Ok(p) => p,
        Err(e) => return fail(3, e),
    };
    let cfg = problem.solve_config();
    let (trajectory, log, exhausted) = match problem.target_defect {
        None => match solver::catching_up(&problem.moving_set, &problem.x0, &cfg) {
            Ok(x) => {
                let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
                let report = match residual::integral_residual(
                    &x,
                    &nu,
                    &problem.moving_set,
                    &problem.tolerances,
                ) {
                    Ok(r) => r,
                    Err(e) => return fail(3, e),
                };
                let row = RefinementRow {
                    level: 0,
                    h_max: problem.grid.max_step(),
                    defect: report.total_defect,
                    residual: report.residual,
                    variation: x.variation(),
                };
                (x, vec![row], false)
            }
            Err(SolverError::StepOutOfReach {
                step,
                time,
                distance,
                reach,
            }) => {
                return fail(
                    2,
                    format!(
                        "step out of prox reach (step {step}, t = {time}, distance {distance} >= {reach})"
                    ),
                )
            }
            Err(e) => return fail(3, e),
        },
        Some(target) => {
            match solver::refine_until(&problem.moving_set, &problem.x0, &cfg, target) {
                Ok(out) => (out.trajectory, out.log, false),
                Err(SolverError::StepOutOfReach {
                    step,
                    time,
                    distance,
                    reach,
                }) => {
                    return fail(
                        2,
                        format!(
                            "step out of prox reach (step {step}, t = {time}, distance {distance} >= {reach})"
                        ),
                    )
                }
                Err(SolverError::BudgetExhausted { best }) => (best.trajectory, best.log, true),
                Err(e) => return fail(3, e),
            }
        }
    };

    // intermediate refinement trajectories are not kept, so the sup-error
    // column is filled only for single-solve runs
    let sup_errors: Option<Vec<f64>> = match (problem.reference, log.len()) {
        (Some(r), 1) => Some(vec![lab::sup_error_against(&trajectory, r)]),
        _ => None,
    };
    if let Err(e) = write_out(
        &args.out,
        "trajectory.csv",
        &io::write_trajectory_csv(&trajectory),
    )
    .and_then(|_| {
        write_out(
            &args.out,
            "refinement_log.csv",
            &io::write_refinement_csv(&log, sup_errors.as_deref()),
        )
    }) {
        return fail(3, e);
    }
    say(format!(
        "solved{}: {} grid times, defect {}",
        problem
            .name
            .as_deref()
            .map(|n| format!(" {n}"))
            .unwrap_or_default(),
        trajectory.grid().len(),
        io::fmt_f64(log.last().map(|r| r.defect).unwrap_or(f64::NAN)),
    ));
    if exhausted {
        return fail(4, "refinement budget exhausted before reaching the target");
    }
    ExitCode::SUCCESS
}

fn cmd_certify(args: &Args) -> ExitCode {
    let problem = match load_problem(args) {
        Ok(p) => p,
        Err(e) => return fail(3, e),
    };
    let traj_path = match &args.trajectory {
        Some(p) => p.clone(),
        None => return fail(3, "certify needs --trajectory"),
    };
    let text = match std::fs::read_to_string(&traj_path) {
        Ok(t) => t,
        Err(e) => return fail(3, format!("cannot read {}: {e}", traj_path.display())),
    };
    let x = match io::parse_trajectory_csv(&text) {
        Ok(x) => x,
        Err(e) => return fail(3, e),
    };
    let nu = ReferenceMeasure::canonical_or_lebesgue(&x);
    let report = match residual::certify(&x, &nu, &problem.moving_set, &problem.tolerances) {
        Ok(r) => r,
        Err(e) => return fail(3, e),
    };
    let verdict_is_solution = report.certificate.is_solution();
    if let Err(e) = write_out(
        &args.out,
        "certificate.json",
        &io::write_certificate_json(&report, x.variation()),
    )
    .and_then(|_| write_out(&args.out, "residual.csv", &io::write_residual_csv(&report)))
    {
        return fail(3, e);
    }
    say(format!(
        "verdict: {}  (R = {}, defect = {})",
        if verdict_is_solution {
            "Solution"
        } else {
            "NotSolution"
        },
        io::fmt_f64(report.residual),
        io::fmt_f64(report.total_defect),
    ));
    if verdict_is_solution {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_converge(args: &Args) -> ExitCode {
    let problem = match load_problem(args) {
        Ok(p) => p,
        Err(e) => return fail(3, e),
    };
    let name = match &problem.name {
        Some(n) => n.clone(),
        None => return fail(3, "converge needs a config naming a built-in scenario"),
    };
    let scenario = match lab::scenario(&name) {
        Ok(s) => s,
        Err(e) => return fail(3, e),
    };
    let rows = match lab::convergence_study(&scenario, problem.levels) {
        Ok(r) => r,
        Err(e) => return fail(3, e),
    };
    let check = lab::check_convergence(&rows);
    let passed = check.is_ok();
    let detail = check.err().map(|e| e.to_string()).unwrap_or_default();
    if let Err(e) = write_out(
        &args.out,
        "convergence.csv",
        &io::write_convergence_csv(&rows),
    )
    .and_then(|_| {
        write_out(
            &args.out,
            "study.json",
            &io::write_study_json("convergence", Some(&name), problem.seed, passed, &detail),
        )
    }) {
        return fail(3, e);
    }
    for r in &rows {
        say(format!(
            "level {}: h = {}, defect = {}, sup_error = {}",
            r.level,
            io::fmt_f64(r.h_max),
            io::fmt_f64(r.defect),
            r.sup_error.map(io::fmt_f64).unwrap_or_else(|| "-".into()),
        ));
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        fail(4, detail)
    }
}

fn cmd_stability(args: &Args) -> ExitCode {
    let problem = match load_problem(args) {
        Ok(p) => p,
        Err(e) => return fail(3, e),
    };
    let name = match &problem.name {
        Some(n) => n.clone(),
        None => return fail(3, "stability needs a config naming a built-in scenario"),
    };
    let scenario = match lab::scenario(&name) {
        Ok(s) => s,
        Err(e) => return fail(3, e),
    };
    match lab::stability_study(&scenario, problem.nmax) {
        Ok(out) => {
            let passed = out.final_certificate.is_solution();
            let detail = if passed {
                String::new()
            } else {
                "finest trajectory failed certification".to_string()
            };
            if let Err(e) = write_out(
                &args.out,
                "stability.csv",
                &io::write_stability_csv(&out.rows),
            )
            .and_then(|_| {
                write_out(
                    &args.out,
                    "study.json",
                    &io::write_study_json("stability", Some(&name), problem.seed, passed, &detail),
                )
            }) {
                return fail(3, e);
            }
            for r in &out.rows {
                say(format!(
                    "n = {}: defect = {}, variation = {}",
                    r.n,
                    io::fmt_f64(r.defect),
                    io::fmt_f64(r.variation),
                ));
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                fail(4, detail)
            }
        }
        Err(lab::LabError::InvariantViolated(msg)) => {
            let _ = write_out(
                &args.out,
                "study.json",
                &io::write_study_json("stability", Some(&name), problem.seed, false, &msg),
            );
            fail(4, msg)
        }
        Err(e) => fail(3, e),
    }
}

fn cmd_list_scenarios() -> ExitCode {
    for s in lab::builtin_scenarios() {
        say(s.name.to_string());
        say(format!("    {}", s.description));
        say(format!(
            "    dimension {}, horizon {}, jumps at {:?}, prox constant {}",
            s.moving_set.dim(),
            io::fmt_f64(s.moving_set.horizon()),
            s.moving_set.jump_times(),
            io::fmt_f64(s.moving_set.rho()),
        ));
        say(format!("    hypotheses: {}", s.hypothesis_notes));
        say(String::new());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let args = match parse_args() {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(3);
        }
    };
    match args.command.as_str() {
        "solve" => cmd_solve(&args),
        "certify" => cmd_certify(&args),
        "converge" => cmd_converge(&args),
        "stability" => cmd_stability(&args),
        "list-scenarios" => cmd_list_scenarios(),
        other => {
            eprintln!("moreau: unknown command '{other}'\n\n{USAGE}");
            ExitCode::from(3)
        }
    }
}
