use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use lbp::accuracy::{accuracy_csv_rows, exact_marginals, saw_accuracy, ACCURACY_CSV_HEADER, MAX_CONFIGURATIONS};
use lbp::bounds::{true_distance, BoundReport, SearchConfig};
use lbp::bp::{run_synchronous, Init, RunStatus};
use lbp::convergence::{condition_ordering_report, critical_eta, evaluate, Condition};
use lbp::report::fmt_g;
use lbp::residual::run_residual_scheduled;
use lbp::uniform::{message_product, udb_completely_uniform, UniformModel};
use lbp::{Error, Mrf, Strengths};

use crate::source::{parse_eta, Source};
use crate::{GraphSource, Schedule};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Budget(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Parse(m) | CliError::Budget(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NumericDegeneracy { .. } | Error::StateSpaceTooLarge(_) | Error::TreeTooLarge(_) | Error::Unavailable(_) => {
                CliError::Budget(e.to_string())
            }
            Error::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eta_cell(eta: Option<f64>) -> String {
    eta.map(fmt_g).unwrap_or_default()
}

const METHODS: [&str; 7] = ["true", "udb", "improved-udb", "ihler-udb", "nudb", "improved-nudb", "ihler-nudb"];

pub fn bounds(
    source: &GraphSource,
    eta: Option<&str>,
    methods: &str,
    iterations: Option<usize>,
    seeds: u64,
    max_iters: usize,
    tol: f64,
) -> Result<String, CliError> {
    let chosen: Vec<&str> = methods.split(',').map(str::trim).filter(|m| !m.is_empty()).collect();
    if chosen.is_empty() {
        return Err(CliError::Usage("--methods is empty".into()));
    }
    if let Some(bad) = chosen.iter().find(|m| !METHODS.contains(m)) {
        return Err(CliError::Usage(format!("unknown method '{bad}' (expected {})", METHODS.join(", "))));
    }
    let src = Source::load(source)?;
    let etas = eta.map(parse_eta).transpose()?;
    let models = src.models(etas.as_deref())?;
    let want = |m: &str| chosen.contains(&m);
    let seed_list: Vec<u64> = (0..seeds).collect();
    let rows: Vec<Result<String, CliError>> = models
        .par_iter()
        .map(|(eta, model)| {
            let strengths = Strengths::from_model(model)?;
            let n = iterations.unwrap_or(2 * model.num_nodes()).max(1);
            let report = BoundReport::compute(model, &strengths, n)?;
            let truth = if want("true") {
                match true_distance(model, &seed_list, SearchConfig { max_iters, tol, ..SearchConfig::default() }) {
                    Ok(t) => Some(t.per_node),
                    Err(Error::Unavailable(_)) => None,
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            let mut s = String::new();
            for v in 0..model.num_nodes() {
                let cell = |name: &str, x: f64| if want(name) { fmt_g(x) } else { String::new() };
                let cols = [
                    truth.as_ref().map(|t| fmt_g(t[v])).unwrap_or_default(),
                    cell("udb", report.udb.per_node[v]),
                    cell("improved-udb", report.improved_udb.per_node[v]),
                    cell("ihler-udb", report.ihler_udb.per_node[v]),
                    cell("nudb", report.nudb.per_node[v]),
                    cell("improved-nudb", report.improved_nudb.per_node[v]),
                    cell("ihler-nudb", report.ihler_nudb.per_node[v]),
                ];
                let _ = writeln!(s, "{},{v},{}", eta_cell(*eta), cols.join(","));
            }
            Ok(s)
        })
        .collect();
    let mut out = format!("{}\n", lbp::bounds::BOUND_CSV_HEADER);
    for r in rows {
        out += &r?;
    }
    Ok(out)
}

pub fn converge(
    source: &GraphSource,
    eta: Option<&str>,
    names: &[String],
    depth: Option<usize>,
    critical: bool,
    ordering: bool,
    tol: f64,
) -> Result<String, CliError> {
    let mut conditions: Vec<Condition> = if names.is_empty() {
        Condition::ALL_NAMES.iter().map(|n| n.parse().expect("known name")).collect()
    } else {
        names
            .iter()
            .flat_map(|n| n.split(','))
            .map(|n| n.trim().parse::<Condition>().map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    if let Some(d) = depth {
        for c in &mut conditions {
            if *c == (Condition::Bethe { depth: None }) {
                *c = Condition::Bethe { depth: Some(d) };
            }
        }
    }
    let src = Source::load(source)?;
    if critical {
        let Source::Generated(topology) = &src else {
            return Err(CliError::Usage("--critical needs --generate".into()));
        };
        if eta.is_some() {
            return Err(CliError::Usage("--critical searches over η; drop --eta".into()));
        }
        let rows: Vec<Result<String, CliError>> = conditions
            .par_iter()
            .map(|&c| Ok(format!("{topology},{c},{}\n", fmt_g(critical_eta(topology, c, tol)?))))
            .collect();
        let mut out = String::from("graph,condition,critical_eta\n");
        for r in rows {
            out += &r?;
        }
        return Ok(out);
    }
    let etas = eta.map(parse_eta).transpose()?;
    let models = src.models(etas.as_deref())?;
    if ordering {
        let rows: Vec<Result<String, CliError>> = models
            .par_iter()
            .map(|(eta, model)| {
                let s = Strengths::from_model(model)?;
                let n = depth.unwrap_or(2 * model.num_nodes()).max(1);
                let report = condition_ordering_report(model, &s, n)?;
                Ok(report.violations.iter().map(|v| format!("{},{},{}\n", eta_cell(*eta), v.premise, v.conclusion)).collect())
            })
            .collect();
        let mut out = String::from("eta,premise,conclusion\n");
        for r in rows {
            out += &r?;
        }
        return Ok(out);
    }
    let rows: Vec<Result<String, CliError>> = models
        .par_iter()
        .map(|(eta, model)| {
            let s = Strengths::from_model(model)?;
            let mut out = String::new();
            for &c in &conditions {
                let v = evaluate(model, &s, c)?;
                let witness = v.witness.map(|w| w.to_string()).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{witness}",
                    eta_cell(*eta),
                    v.condition,
                    fmt_g(v.statistic),
                    fmt_g(v.threshold),
                    v.holds
                );
            }
            Ok(out)
        })
        .collect();
    let mut out = String::from("eta,condition,statistic,threshold,holds,witness_edge\n");
    for r in rows {
        out += &r?;
    }
    Ok(out)
}

fn single_model(source: &GraphSource, eta: Option<f64>) -> Result<Mrf, CliError> {
    let src = Source::load(source)?;
    let etas = eta.map(|e| vec![e]);
    Ok(src.models(etas.as_deref())?.pop().expect("one model").1)
}

fn beliefs_csv(beliefs: &[Vec<f64>]) -> String {
    let mut s = String::from("node,state,belief\n");
    for (v, b) in beliefs.iter().enumerate() {
        for (x, p) in b.iter().enumerate() {
            let _ = writeln!(s, "{v},{x},{}", fmt_g(*p));
        }
    }
    s
}

fn status_text(s: &RunStatus) -> String {
    match s {
        RunStatus::Converged => "converged".into(),
        RunStatus::Oscillating { period } => format!("oscillating({period})"),
        RunStatus::MaxIters => "max_iters".into(),
    }
}

/// Returns the summary text and, for residual runs, the trace CSV.
pub fn run(
    source: &GraphSource,
    eta: Option<f64>,
    schedule: Schedule,
    seed: Option<u64>,
    max_iters: usize,
    tol: f64,
) -> Result<(String, Option<String>), CliError> {
    let model = single_model(source, eta)?;
    let init = seed.map_or(Init::Uniform, Init::Random);
    let (result, trace) = match schedule {
        Schedule::Sync => (run_synchronous(&model, init, max_iters, tol)?, None),
        Schedule::Residual => {
            let strengths = Strengths::from_model(&model)?;
            let (r, t) = run_residual_scheduled(&model, &strengths, init, max_iters, tol)?;
            (r, Some(t.to_csv()))
        }
    };
    let mut out = format!("# status: {}\n# iterations: {}\n", status_text(&result.status), result.iterations);
    out += &beliefs_csv(&result.beliefs);
    Ok((out, trace))
}

pub fn fixed_points(eta: &str, degree: Option<usize>, k: Option<usize>, curve: Option<f64>, points: usize) -> Result<String, CliError> {
    let k = match (degree, k) {
        (Some(d), None) if d >= 2 => d - 1,
        (None, Some(k)) if k >= 1 => k,
        (None, None) => return Err(CliError::Usage("give --degree or --k".into())),
        _ => return Err(CliError::Usage("need degree >= 2 or k >= 1".into())),
    };
    let etas = parse_eta(eta)?;
    if let Some(m) = curve {
        let [eta] = etas.as_slice() else {
            return Err(CliError::Usage("--curve needs a single --eta".into()));
        };
        let model = UniformModel::new(*eta, 1.0 - eta, k)?;
        let mut out = String::from("log_e,g\n");
        for (z, g) in model.error_variation_curve(m, points)? {
            let _ = writeln!(out, "{},{}", fmt_g(z), fmt_g(g));
        }
        return Ok(out);
    }
    let mut out = String::from("eta,fixed_points,quasi_fixed_points,regime,udb_cu,true_distance\n");
    for eta in etas {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(CliError::Usage(format!("eta = {eta} must lie in (0, 1)")));
        }
        let model = UniformModel::new(eta, 1.0 - eta, k)?;
        let set = model.fixed_points(1e-14);
        let list = |ps: &[lbp::uniform::FixedPoint<f64>]| {
            ps.iter().map(|p| format!("{}({})", fmt_g(p.x), if p.stable { "s" } else { "u" })).collect::<Vec<_>>().join(";")
        };
        let d = (eta.max(1.0 - eta) / eta.min(1.0 - eta)).sqrt();
        let udb = udb_completely_uniform(d, k + 1)?;
        let beliefs: Vec<f64> = set.fixed.iter().map(|p| message_product(p.x, k + 1)).collect();
        let mut truth = 0.0f64;
        for a in &beliefs {
            for b in &beliefs {
                truth = truth.max((a / b).ln().abs()).max(((1.0 - a) / (1.0 - b)).ln().abs());
            }
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_g(eta),
            list(&set.fixed),
            list(&set.quasi_fixed),
            set.regime,
            fmt_g(udb),
            fmt_g(truth)
        );
    }
    Ok(out)
}

pub fn accuracy(source: &GraphSource, eta: Option<f64>, node: Option<usize>, seed: Option<u64>, max_iters: usize, tol: f64) -> Result<String, CliError> {
    let model = single_model(source, eta)?;
    if let Some(v) = node {
        if v >= model.num_nodes() {
            return Err(CliError::Usage(format!("node {v} is out of range")));
        }
    }
    let run = run_synchronous(&model, seed.map_or(Init::Uniform, Init::Random), max_iters, tol)?;
    if run.status != RunStatus::Converged {
        return Err(CliError::Budget(format!("belief propagation did not converge ({})", status_text(&run.status))));
    }
    let strengths = Strengths::from_model(&model)?;
    let space: u128 = model.cardinalities().iter().map(|&k| k as u128).product();
    let exact = if space <= MAX_CONFIGURATIONS { Some(exact_marginals(&model)?) } else { None };
    let nodes: Vec<usize> = node.map_or_else(|| (0..model.num_nodes()).collect(), |v| vec![v]);
    let mut out = format!("{ACCURACY_CSV_HEADER}\n");
    for v in nodes {
        let b = saw_accuracy(&model, &strengths, v, &run.beliefs[v])?;
        out += &accuracy_csv_rows(v, &b, exact.as_ref().map(|e| e[v].as_slice()));
    }
    Ok(out)
}
