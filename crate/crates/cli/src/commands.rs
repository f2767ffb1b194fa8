use std::fs;
use std::path::Path;

use mpec::diagnostics::{check_cq, classify_matrix, probe_sbcq, stackelberg_values, CqOptions};
use mpec::global::{global_solve, ProblemStatus};
use mpec::lower::{reaction_map, ReactionMode};
use mpec::reformulate::{
    build_fb, build_implicit, build_kkt, build_normal_map, natural_residual, residual_theta,
    SystemDoc,
};
use mpec::{DVector, MpecError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{Command, Mode, Target};
use crate::input::{load, parse_point, parse_vector, Problem};

pub const OK: u8 = 0;
pub const INFEASIBLE: u8 = 2;
pub const UNBOUNDED: u8 = 3;
pub const INPUT: u8 = 4;
pub const UNSUPPORTED: u8 = 5;
pub const INTERNAL: u8 = 1;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: INPUT,
            message: message.into(),
        }
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        Self {
            code: UNSUPPORTED,
            message: message.into(),
        }
    }
}

impl From<MpecError> for Failure {
    fn from(e: MpecError) -> Self {
        let code = match &e {
            MpecError::Input(_)
            | MpecError::Invalid(_)
            | MpecError::Parse(_)
            | MpecError::UnknownInstance { .. }
            | MpecError::Precondition(_) => INPUT,
            MpecError::Unsupported(_) | MpecError::Size { .. } => UNSUPPORTED,
            MpecError::Infeasible(_) => INFEASIBLE,
            MpecError::NotConverged(_) => INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Builder preconditions (e.g. strong monotonicity) are unsupported inputs
/// for `reformulate`, not malformed ones.
fn builder_failure(e: MpecError) -> Failure {
    match e {
        MpecError::Precondition(msg) => Failure::unsupported(format!("precondition failed: {msg}")),
        other => other.into(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequencePoint {
    x: Vec<f64>,
    y: Vec<f64>,
}

pub fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve { common } => {
            let problem = load(&common.input)?;
            let report = global_solve(problem.affine("solve")?)?;
            let code = match report.status {
                ProblemStatus::Solved => OK,
                ProblemStatus::Infeasible => INFEASIBLE,
                ProblemStatus::Unbounded => UNBOUNDED,
            };
            emit(&report, common.out.as_deref())?;
            Ok(code)
        }
        Command::Reformulate { common, to } => {
            let problem = load(&common.input)?;
            let doc = match (to, &problem) {
                (Target::Kkt, Problem::Affine(p)) => SystemDoc::Kkt(build_kkt(p).to_doc()),
                (Target::Kkt, Problem::Builtin(p)) => SystemDoc::Kkt(build_kkt(p).to_doc()),
                (Target::Fb, Problem::Affine(p)) => SystemDoc::Fb(build_fb(&build_kkt(p)).to_doc()),
                (Target::Fb, Problem::Builtin(p)) => {
                    SystemDoc::Fb(build_fb(&build_kkt(p)).to_doc())
                }
                (Target::Normal, _) => SystemDoc::NormalMap(
                    build_normal_map(problem.affine("reformulate --to normal")?)
                        .map_err(builder_failure)?
                        .to_doc(),
                ),
                (Target::Implicit, _) => SystemDoc::Implicit(
                    build_implicit(problem.affine("reformulate --to implicit")?)
                        .map_err(builder_failure)?
                        .to_doc(),
                ),
            };
            if let SystemDoc::Kkt(k) | SystemDoc::Fb(mpec::reformulate::FbDoc { system: k, .. }) =
                &doc
            {
                if let Some(w) = &k.warning {
                    eprintln!("mpec: warning: {w}");
                }
            }
            emit(&doc, common.out.as_deref())?;
            Ok(OK)
        }
        Command::CheckCq {
            common,
            point,
            radius,
            samples,
            seed,
        } => {
            let problem = load(&common.input)?;
            let (x, y) = parse_point(&point, problem.as_dyn())?;
            let report = check_cq(
                problem.as_dyn(),
                &x,
                &y,
                &CqOptions {
                    radius,
                    samples,
                    seed,
                },
            )?;
            emit(&report, common.out.as_deref())?;
            Ok(OK)
        }
        Command::ProbeSbcq {
            input,
            out,
            sequence,
            builtin_q1,
        } => {
            let input = input.unwrap_or_else(|| "builtin:q1".into());
            let problem = load(&input)?;
            let points = match (sequence, builtin_q1) {
                (Some(path), _) => read_sequence(&path)?,
                (None, Some(k)) => (1..=k)
                    .map(|k| (DVector::from_element(1, -1.0 / k as f64), DVector::zeros(1)))
                    .collect(),
                (None, None) => {
                    return Err(Failure::input(
                        "either --sequence or --builtin-q1 is required",
                    ))
                }
            };
            let result = probe_sbcq(problem.as_dyn(), &points)?;
            if let Some(w) = &result.warning {
                eprintln!("mpec: warning: {w}");
            }
            emit(&result, out.as_deref())?;
            Ok(OK)
        }
        Command::Residual { common, point } => {
            let problem = load(&common.input)?;
            let p = problem.affine("residual")?;
            let (x, y) = parse_point(&point, p)?;
            let theta = residual_theta(p, &x, &y)?;
            let nat = natural_residual(&y, &p.eval_map(&x, &y)?)?;
            let doc = json!({
                "x": x.as_slice(),
                "y": y.as_slice(),
                "theta": theta,
                "naturalResidual": nat.as_slice(),
            });
            emit(&doc, common.out.as_deref())?;
            Ok(OK)
        }
        Command::Classify { common } => {
            let problem = load(&common.input)?;
            let verdict = classify_matrix(&problem.affine("classify")?.vi.y_coef)?;
            emit(&verdict, common.out.as_deref())?;
            Ok(OK)
        }
        Command::ReactionMap {
            common,
            point,
            grid,
            mode,
        } => {
            let problem = load(&common.input)?;
            let mode = match mode {
                Mode::Enumerate => ReactionMode::Enumerate,
                Mode::Monotone => ReactionMode::Monotone,
            };
            let xs = match (point, grid) {
                (Some(p), _) => vec![parse_vector(&p, "--point")?],
                (None, Some(g)) => grid_points(&g, problem.as_dyn().n())?,
                (None, None) => return Err(Failure::input("either --point or --grid is required")),
            };
            let mut points = Vec::with_capacity(xs.len());
            for x in &xs {
                let result = reaction_map(problem.as_dyn(), x, mode)?;
                let mut entry = json!({ "x": x.as_slice() });
                if let (Value::Object(e), Value::Object(r)) = (&mut entry, to_value(&result)?) {
                    e.extend(r);
                }
                points.push(entry);
            }
            emit(
                &json!({ "mode": mode, "points": points }),
                common.out.as_deref(),
            )?;
            Ok(OK)
        }
        Command::Values {
            common,
            x,
            responses,
        } => {
            let problem = load(&common.input)?;
            let p = problem.as_dyn();
            let x = parse_vector(&x, "--x")?;
            if x.len() != p.n() {
                return Err(Failure::input(format!(
                    "--x has {} entries, expected n = {}",
                    x.len(),
                    p.n()
                )));
            }
            let set = match responses {
                Some(text) => text
                    .split(';')
                    .map(|r| {
                        let y = parse_vector(r, "--responses")?;
                        if y.len() != p.m() {
                            return Err(Failure::input(format!(
                                "response `{r}` has {} entries, expected m = {}",
                                y.len(),
                                p.m()
                            )));
                        }
                        Ok(y)
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => reaction_map(p, &x, ReactionMode::Enumerate)?.solutions,
            };
            let values = stackelberg_values(|x, y| p.objective_value(x, y), &set, &x)?;
            let doc = json!({
                "x": x.as_slice(),
                "responses": set.iter().map(|y| y.as_slice().to_vec()).collect::<Vec<_>>(),
                "optimistic": values.optimistic,
                "pessimistic": values.pessimistic,
            });
            emit(&doc, common.out.as_deref())?;
            Ok(OK)
        }
    }
}

fn read_sequence(path: &Path) -> Result<Vec<(DVector<f64>, DVector<f64>)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let points: Vec<SequencePoint> = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(points
        .into_iter()
        .map(|p| (DVector::from_vec(p.x), DVector::from_vec(p.y)))
        .collect())
}

/// `COUNT` evenly spaced values from `LO` to `HI`, endpoints included.
fn grid_points(spec: &str, n: usize) -> Result<Vec<DVector<f64>>, Failure> {
    if n != 1 {
        return Err(Failure::input(format!(
            "--grid needs a one-dimensional x, the problem has n = {n}"
        )));
    }
    let parts: Vec<&str> = spec.split(',').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(Failure::input("--grid expects LO,HI,COUNT"));
    };
    let parse = |s: &str| match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Failure::input(format!(
            "--grid: `{s}` is not a finite number"
        ))),
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    let count: usize = count
        .parse()
        .map_err(|_| Failure::input(format!("--grid: `{count}` is not a count")))?;
    if count < 2 || lo > hi {
        return Err(Failure::input("--grid needs LO ≤ HI and COUNT ≥ 2"));
    }
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| DVector::from_element(1, lo + (hi - lo) * i as f64 / last))
        .collect())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure {
        code: INTERNAL,
        message: format!("serialization failed: {e}"),
    })
}

/// Serializes completely before touching the destination.
fn emit<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Failure {
        code: INTERNAL,
        message: format!("serialization failed: {e}"),
    })?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure {
            code: INTERNAL,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
