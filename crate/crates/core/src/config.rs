//! Flat key-value scenario configs.
//!
//! The format is line-oriented and diff-friendly: `key = value` pairs, `#`
//! comments, and one `[piece]` section per moving-set piece. A config either
//! names a built-in scenario or describes the pieces explicitly. Unknown keys
//! are rejected.
//!
//! ```text
//! # drifting interval
//! dimension = 1
//! horizon = 2.0
//! x0 = 0.0
//! grid = uniform 0.5
//!
//! [piece]
//! start = 0.0
//! end = 2.0
//! set = box -1 1
//! motion = linear 0 0 ; 2 2
//! ```

use crate::dynamics::{MotionPath, MovingSet};
use crate::geometry::{ProxSet, SafetyFactor};
use crate::lab;
use crate::measure::TimeGrid;
use crate::point::Point;
use crate::residual::Tolerances;
use crate::solver::SolveConfig;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.message)
        } else {
            write!(f, "config: {}", self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Uniform cells of (at most) the given width; jump times are inserted.
    UniformH(f64),
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Default)]
struct PieceConfig {
    start: Option<f64>,
    end: Option<f64>,
    set: Option<(String, Vec<f64>, usize)>,
    motion: Option<(String, Vec<Vec<f64>>, usize)>,
    line: usize,
}

/// Parsed, unresolved config document.
#[derive(Debug, Clone, Default)]
pub struct ScenarioConfig {
    pub scenario: Option<String>,
    pub dimension: Option<usize>,
    pub horizon: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub gamma: Option<f64>,
    pub projection_tol: Option<f64>,
    pub feasibility_tol: Option<f64>,
    pub certificate_tol: Option<f64>,
    pub max_refinements: Option<u32>,
    pub target_defect: Option<f64>,
    pub levels: Option<u32>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
    pieces: Vec<PieceConfig>,
}

/// A fully resolved problem ready to solve or study.
#[derive(Debug)]
pub struct Problem {
    /// Built-in scenario name, when the config named one.
    pub name: Option<String>,
    pub moving_set: MovingSet,
    pub x0: Point,
    pub grid: TimeGrid,
    pub gamma: SafetyFactor,
    pub projection_tol: f64,
    pub max_refinements: u32,
    pub tolerances: Tolerances,
    pub target_defect: Option<f64>,
    pub levels: u32,
    pub nmax: usize,
    pub seed: u64,
    pub reference: Option<fn(f64) -> Point>,
}

impl Problem {
    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            grid: self.grid.clone(),
            gamma: self.gamma,
            projection_tol: self.projection_tol,
            max_refinements: self.max_refinements,
        }
    }
}

fn parse_floats(s: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| ConfigError::new(line, format!("expected a number, got '{tok}'")))
        })
        .collect()
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut in_piece = false;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line == "[piece]" {
                    in_piece = true;
                    cfg.pieces.push(PieceConfig {
                        line: lineno,
                        ..PieceConfig::default()
                    });
                    continue;
                }
                return Err(ConfigError::new(lineno, format!("unknown section {line}")));
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(lineno, "expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            if value.is_empty() {
                return Err(ConfigError::new(lineno, format!("empty value for '{key}'")));
            }
            if in_piece {
                cfg.parse_piece_key(key, value, lineno)?;
            } else {
                cfg.parse_top_key(key, value, lineno)?;
            }
        }
        Ok(cfg)
    }

    fn parse_top_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let num = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>()
                .map_err(|_| ConfigError::new(line, format!("expected a number, got '{v}'")))
        };
        match key {
            "scenario" => self.scenario = Some(value.to_string()),
            "dimension" => {
                self.dimension = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad dimension '{value}'")))?,
                )
            }
            "horizon" => self.horizon = Some(num(value)?),
            "x0" => self.x0 = Some(parse_floats(value, line)?),
            "grid" => {
                let (kind, rest) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ConfigError::new(line, "grid needs 'uniform h' or 'times …'"))?;
                self.grid = Some(match kind {
                    "uniform" => GridSpec::UniformH(num(rest.trim())?),
                    "times" => GridSpec::Times(parse_floats(rest, line)?),
                    other => {
                        return Err(ConfigError::new(
                            line,
                            format!("unknown grid kind '{other}'"),
                        ))
                    }
                });
            }
            "gamma" => self.gamma = Some(num(value)?),
            "projection_tol" => self.projection_tol = Some(num(value)?),
            "feasibility_tol" => self.feasibility_tol = Some(num(value)?),
            "certificate_tol" => self.certificate_tol = Some(num(value)?),
            "max_refinements" => {
                self.max_refinements = Some(value.parse().map_err(|_| {
                    ConfigError::new(line, format!("bad max_refinements '{value}'"))
                })?)
            }
            "target_defect" => self.target_defect = Some(num(value)?),
            "levels" => {
                self.levels = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad levels '{value}'")))?,
                )
            }
            "nmax" => {
                self.nmax = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad nmax '{value}'")))?,
                )
            }
            "seed" => {
                self.seed = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad seed '{value}'")))?,
                )
            }
            other => return Err(ConfigError::new(line, format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn parse_piece_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let piece = self.pieces.last_mut().expect("inside a piece section");
        match key {
            "start" => {
                piece.start = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad start '{value}'")))?,
                )
            }
            "end" => {
                piece.end = Some(
                    value
                        .parse()
                        .map_err(|_| ConfigError::new(line, format!("bad end '{value}'")))?,
                )
            }
            "set" => {
                let (kind, rest) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| ConfigError::new(line, "set needs a kind and parameters"))?;
                piece.set = Some((kind.to_string(), parse_floats(rest, line)?, line));
            }
            "motion" => {
                let (kind, rest) = value
                    .split_once(char::is_whitespace)
                    .map(|(k, r)| (k, r.trim()))
                    .unwrap_or((value, ""));
                let groups = if rest.is_empty() {
                    Vec::new()
                } else {
                    rest.split(';')
                        .map(|g| parse_floats(g, line))
                        .collect::<Result<Vec<_>, _>>()?
                };
                piece.motion = Some((kind.to_string(), groups, line));
            }
            other => {
                return Err(ConfigError::new(
                    line,
                    format!("unknown piece key '{other}'"),
                ))
            }
        }
        Ok(())
    }

    /// Resolve into a runnable problem: either load the named built-in (with
    /// optional overrides) or assemble the moving set from the pieces.
    pub fn build(&self) -> Result<Problem, ConfigError> {
        let (moving_set, x0, name, reference, default_grid) = if let Some(name) = &self.scenario {
            if !self.pieces.is_empty() {
                return Err(ConfigError::new(
                    0,
                    "a config names a scenario or lists pieces, not both",
                ));
            }
            let s = lab::scenario(name).map_err(|e| ConfigError::new(0, e.to_string()))?;
            let x0 = match &self.x0 {
                Some(coords) => Point::new(coords.clone()),
                None => s.x0.clone(),
            };
            let grid = lab::base_grid(&s);
            (
                s.moving_set,
                x0,
                Some(s.name.to_string()),
                s.reference,
                Some(grid),
            )
        } else {
            let dim = self
                .dimension
                .ok_or_else(|| ConfigError::new(0, "missing 'dimension'"))?;
            let horizon = self
                .horizon
                .ok_or_else(|| ConfigError::new(0, "missing 'horizon'"))?;
            let x0 = self
                .x0
                .as_ref()
                .ok_or_else(|| ConfigError::new(0, "missing 'x0'"))?;
            if x0.len() != dim {
                return Err(ConfigError::new(
                    0,
                    format!("x0 has {} coordinates, dimension is {dim}", x0.len()),
                ));
            }
            if self.pieces.is_empty() {
                return Err(ConfigError::new(0, "no scenario and no [piece] sections"));
            }
            let mut pieces = Vec::with_capacity(self.pieces.len());
            for (i, pc) in self.pieces.iter().enumerate() {
                let start = pc.start.ok_or_else(|| {
                    ConfigError::new(pc.line, format!("piece {i}: missing start"))
                })?;
                let end = pc
                    .end
                    .ok_or_else(|| ConfigError::new(pc.line, format!("piece {i}: missing end")))?;
                let set = build_set(pc, dim)?;
                let motion = build_motion(pc, dim)?;
                pieces.push((start, end, set, motion));
            }
            let moving_set =
                MovingSet::new(pieces, horizon).map_err(|e| ConfigError::new(0, e.to_string()))?;
            (moving_set, Point::new(x0.clone()), None, None, None)
        };

        let horizon = moving_set.horizon();
        let grid = match &self.grid {
            Some(GridSpec::UniformH(h)) => {
                if h.is_nan() || *h <= 0.0 {
                    return Err(ConfigError::new(
                        0,
                        format!("grid step must be positive, got {h}"),
                    ));
                }
                let cells = (horizon / h).round().max(1.0) as usize;
                TimeGrid::uniform_with(horizon, cells, moving_set.jump_times())
                    .map_err(|e| ConfigError::new(0, e.to_string()))?
            }
            Some(GridSpec::Times(times)) => TimeGrid::new(times.clone())
                .map_err(|e| ConfigError::new(0, e.to_string()))
                .and_then(|g| {
                    if (g.horizon() - horizon).abs() > 1e-12 * horizon.max(1.0) {
                        Err(ConfigError::new(
                            0,
                            format!("grid ends at {}, horizon is {horizon}", g.horizon()),
                        ))
                    } else if moving_set.jump_times().iter().any(|t| !g.contains_time(*t)) {
                        Err(ConfigError::new(0, "grid must contain all jump times"))
                    } else {
                        Ok(g)
                    }
                })?,
            None => match default_grid {
                Some(g) => g,
                None => TimeGrid::uniform_with(horizon, 16, moving_set.jump_times())
                    .map_err(|e| ConfigError::new(0, e.to_string()))?,
            },
        };

        let gamma = match self.gamma {
            Some(g) => SafetyFactor::new(g).map_err(|e| ConfigError::new(0, e.to_string()))?,
            None => SafetyFactor::default(),
        };
        let tolerances = Tolerances {
            certificate_tol: self
                .certificate_tol
                .unwrap_or(Tolerances::default().certificate_tol),
            feasibility_tol: self
                .feasibility_tol
                .unwrap_or(Tolerances::default().feasibility_tol),
            gamma,
        };
        Ok(Problem {
            name,
            moving_set,
            x0,
            grid,
            gamma,
            projection_tol: self.projection_tol.unwrap_or(1e-10),
            max_refinements: self.max_refinements.unwrap_or(12),
            tolerances,
            target_defect: self.target_defect,
            levels: self.levels.unwrap_or(5),
            nmax: self.nmax.unwrap_or(256),
            seed: self.seed.unwrap_or(0),
            reference,
        })
    }
}

fn build_set(pc: &PieceConfig, dim: usize) -> Result<ProxSet, ConfigError> {
    let (kind, params, line) = pc
        .set
        .as_ref()
        .ok_or_else(|| ConfigError::new(pc.line, "piece missing 'set'"))?;
    let line = *line;
    let expect = |n: usize| -> Result<(), ConfigError> {
        if params.len() == n {
            Ok(())
        } else {
            Err(ConfigError::new(
                line,
                format!(
                    "set '{kind}' needs {n} numbers in dimension {dim}, got {}",
                    params.len()
                ),
            ))
        }
    };
    let set = match kind.as_str() {
        "box" => {
            expect(2 * dim)?;
            ProxSet::hyperrectangle(
                Point::new(params[..dim].to_vec()),
                Point::new(params[dim..].to_vec()),
            )
        }
        "ball" => {
            expect(dim + 1)?;
            ProxSet::ball(Point::new(params[..dim].to_vec()), params[dim])
        }
        "halfspace" => {
            expect(dim + 1)?;
            ProxSet::halfspace(Point::new(params[..dim].to_vec()), params[dim])
        }
        "hole" => {
            expect(dim + 1)?;
            ProxSet::complement_of_open_ball(Point::new(params[..dim].to_vec()), params[dim])
        }
        other => {
            return Err(ConfigError::new(
                line,
                format!("unknown set kind '{other}'"),
            ))
        }
    };
    set.map_err(|e| ConfigError::new(line, e.to_string()))
}

fn build_motion(pc: &PieceConfig, dim: usize) -> Result<MotionPath, ConfigError> {
    let (kind, groups, line) = pc
        .motion
        .as_ref()
        .ok_or_else(|| ConfigError::new(pc.line, "piece missing 'motion'"))?;
    let line = *line;
    let path = match kind.as_str() {
        "constant" => {
            if groups.len() != 1 || groups[0].len() != dim {
                return Err(ConfigError::new(
                    line,
                    format!("constant motion needs {dim} numbers"),
                ));
            }
            Ok(MotionPath::Constant(Point::new(groups[0].clone())))
        }
        "linear" => {
            let mut knots = Vec::with_capacity(groups.len());
            for g in groups {
                if g.len() != dim + 1 {
                    return Err(ConfigError::new(
                        line,
                        format!("linear knots are 'time shift…' with {dim} shift numbers"),
                    ));
                }
                knots.push((g[0], Point::new(g[1..].to_vec())));
            }
            MotionPath::piecewise_linear(knots)
        }
        "sine" => {
            if groups.len() != 1 || groups[0].len() != 3 + dim {
                return Err(ConfigError::new(
                    line,
                    format!(
                        "sine motion is 'amplitude frequency phase dir…' with {dim} direction numbers"
                    ),
                ));
            }
            let g = &groups[0];
            MotionPath::sinusoidal(g[0], g[1], g[2], Point::new(g[3..].to_vec()))
        }
        "circle" => {
            if groups.len() != 1 || groups[0].len() != 3 {
                return Err(ConfigError::new(
                    line,
                    "circle motion is 'radius angular_frequency phase'",
                ));
            }
            let g = &groups[0];
            MotionPath::circular(g[0], g[1], g[2], dim)
        }
        other => {
            return Err(ConfigError::new(
                line,
                format!("unknown motion kind '{other}'"),
            ))
        }
    };
    path.map_err(|e| ConfigError::new(line, e.to_string()))
}
