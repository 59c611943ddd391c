use std::fs;
use std::io::{self, Write};
use std::path::Path;

use slin_core::depgraph::{build_skeleton, build_wdg, check_condition, scc_decomposition, ConditionReport, Wdg};
use slin_core::lift::LiftError;
use slin_core::verify::{compare_flows, PolyField, SymbolicVerdict, VerifyError};
use slin_core::{parse_system, simulate as integrate, superlinearize, verify_symbolic, xumama_check, PolySystem, SuperLinearization};

use crate::document::{read_lift, LiftDocument};
use crate::{dot, traj, EXIT_DIVERGED, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE};

/// Whether verdicts are colored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Style {
    pub color: bool,
}

impl Style {
    /// `SLIN_COLOR=0` turns color off and `SLIN_COLOR=1` forces it on;
    /// otherwise color follows whether stdout is a terminal.
    pub fn from_env() -> Self {
        use std::io::IsTerminal;
        let color = match std::env::var("SLIN_COLOR").as_deref() {
            Ok("0") => false,
            Ok("1") => true,
            _ => io::stdout().is_terminal(),
        };
        Self { color }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn pass(&self) -> String {
        self.paint("32", "PASS")
    }

    fn fail(&self) -> String {
        self.paint("31", "FAIL")
    }
}

pub(crate) struct CliError {
    pub code: u8,
    pub message: String,
}

type CmdResult = Result<u8, CliError>;

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn io_err(e: io::Error) -> CliError {
    usage(format!("write failed: {e}"))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<PolySystem, CliError> {
    let text = read(path)?;
    parse_system(&text).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn load_lift(path: &Path) -> Result<SuperLinearization, CliError> {
    let text = read(path)?;
    read_lift(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn set(names: &[String], members: &[usize]) -> String {
    let inner: Vec<&str> = members.iter().map(|&v| names[v].as_str()).collect();
    format!("{{{}}}", inner.join(", "))
}

fn write_failure(out: &mut dyn Write, report: &ConditionReport, style: Style) -> io::Result<()> {
    writeln!(out, "{}  cycle condition violated; no conclusion", style.fail())?;
    for w in &report.witnesses {
        writeln!(out, "  gamma({},{}) = {}", w.from + 1, w.to + 1, w.weight)?;
    }
    Ok(())
}

/// Weights of edges inside strong components, as `gamma(i,j) = w` with 1-based indices.
fn intra_weights(g: &Wdg, comp_of: impl Fn(usize) -> usize) -> Vec<String> {
    g.edges()
        .filter(|&(i, j, _)| comp_of(i) == comp_of(j))
        .map(|(i, j, w)| format!("gamma({},{}) = {w}", i + 1, j + 1))
        .collect()
}

pub(crate) fn check(file: &Path, dot_out: Option<&Path>, out: &mut dyn Write, style: Style) -> CmdResult {
    let sys = load_system(file)?;
    let g = build_wdg(&sys);
    let scc = scc_decomposition(&g);
    let report = check_condition(&g, &scc);
    let names = sys.vars().names();
    if report.pass {
        let skeleton = build_skeleton(&g, &scc).map_err(|e| usage(format!("internal error: {e}")))?;
        writeln!(out, "{}  cycle condition holds", style.pass()).map_err(io_err)?;
        let comps: Vec<String> = scc.components().iter().map(|c| set(names, c)).collect();
        writeln!(out, "components: {}", comps.join(" ")).map_err(io_err)?;
        let weights = intra_weights(&g, |v| scc.component_of(v));
        if !weights.is_empty() {
            writeln!(out, "intra-component weights: {}", weights.join(", ")).map_err(io_err)?;
        }
        let layers: Vec<String> = skeleton
            .layers()
            .iter()
            .enumerate()
            .map(|(k, layer)| {
                let mut vars: Vec<usize> = layer.iter().flat_map(|&u| skeleton.members(u).iter().copied()).collect();
                vars.sort_unstable();
                format!("U{k} = {}", set(names, &vars))
            })
            .collect();
        writeln!(out, "layers: {}", layers.join("; ")).map_err(io_err)?;
        if let Some(path) = dot_out {
            write_file(path, dot::render(&g, &scc, &skeleton).as_bytes())?;
        }
        Ok(EXIT_OK)
    } else {
        write_failure(out, &report, style).map_err(io_err)?;
        if let Some(path) = dot_out {
            // The skeleton of a failing system is still a DAG.
            let skeleton = build_skeleton(&g, &scc).map_err(|e| usage(format!("internal error: {e}")))?;
            write_file(path, dot::render(&g, &scc, &skeleton).as_bytes())?;
        }
        Ok(EXIT_NEGATIVE)
    }
}

pub(crate) fn lift(
    file: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
    style: Style,
) -> CmdResult {
    let sys = load_system(file)?;
    let sl = match superlinearize(&sys) {
        Ok(sl) => sl,
        Err(LiftError::ConditionFailed(report)) => {
            write_failure(out, &report, style).map_err(io_err)?;
            return Ok(EXIT_NEGATIVE);
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let verdict = verify_symbolic(&sys, &sl).map_err(|e| usage(e.to_string()))?;
    let json = LiftDocument::from_lift(&sl).to_json();
    // The summary shares stdout only when the document goes to a file.
    let summary: &mut dyn Write = if output.is_some() { out } else { err };
    writeln!(summary, "n = {}, m = {}, lifted dimension = {}", sl.n(), sl.m(), sl.dim()).map_err(io_err)?;
    for o in sl.observables() {
        writeln!(summary, "  {} = {}", o.name, o.expansion).map_err(io_err)?;
    }
    let mark = if verdict.is_pass() { style.pass() } else { style.fail() };
    writeln!(summary, "symbolic verification: {mark}").map_err(io_err)?;
    match output {
        Some(path) => write_file(path, json.as_bytes())?,
        None => out.write_all(json.as_bytes()).map_err(io_err)?,
    }
    Ok(if verdict.is_pass() { EXIT_OK } else { EXIT_NEGATIVE })
}

pub(crate) fn verify(file: &Path, lift_path: &Path, out: &mut dyn Write, style: Style) -> CmdResult {
    let sys = load_system(file)?;
    let sl = load_lift(lift_path)?;
    match verify_symbolic(&sys, &sl) {
        Ok(SymbolicVerdict::Pass) => {
            writeln!(out, "{}  L_f q = A q + D holds for all {} rows", style.pass(), sl.dim()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Ok(SymbolicVerdict::Fail {
            row,
            coordinate,
            residual,
        }) => {
            writeln!(out, "{}  row {} ({coordinate}'): residual {residual}", style.fail(), row + 1).map_err(io_err)?;
            Ok(EXIT_NEGATIVE)
        }
        Err(e) => Err(usage(e.to_string())),
    }
}

fn parse_x0(text: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let x0 = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--x0: `{}` is not a number", s.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    if x0.len() != n {
        return Err(usage(format!("--x0 has {} entries but the system has {n} variables", x0.len())));
    }
    Ok(x0)
}

fn numeric_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::Divergence { .. } => CliError {
            code: EXIT_DIVERGED,
            message: e.to_string(),
        },
        other => usage(other.to_string()),
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn simulate(
    file: &Path,
    lift_path: Option<&Path>,
    x0: &str,
    t_end: f64,
    step: f64,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let sys = load_system(file)?;
    let x0 = parse_x0(x0, sys.dim())?;
    let (trajectory, max_error) = match lift_path {
        None => (integrate(&PolyField::of_system(&sys), &x0, t_end, step).map_err(numeric_error)?, None),
        Some(path) => {
            let sl = load_lift(path)?;
            if sl.n() != sys.dim() || sl.state_space() != sys.vars() {
                return Err(usage(VerifyError::StateMismatch.to_string()));
            }
            let cmp = compare_flows(&sys, &sl, &x0, t_end, step).map_err(numeric_error)?;
            (cmp.original, Some(cmp.max_error))
        }
    };
    let mut csv = Vec::new();
    traj::write_csv(&mut csv, sys.vars().names(), &trajectory).map_err(|e| usage(e.to_string()))?;
    let summary: &mut dyn Write = if output.is_some() { out } else { err };
    writeln!(summary, "{} samples, t = 0 .. {}", trajectory.len(), trajectory.times().last().copied().unwrap_or(0.0))
        .map_err(io_err)?;
    if let Some(e) = max_error {
        writeln!(summary, "max projection error: {e:e}").map_err(io_err)?;
    }
    match output {
        Some(path) => write_file(path, &csv)?,
        None => out.write_all(&csv).map_err(io_err)?,
    }
    Ok(EXIT_OK)
}

pub(crate) fn xumama(file: &Path, max_n: usize, out: &mut dyn Write) -> CmdResult {
    let sys = load_system(file)?;
    match xumama_check(&sys, max_n) {
        Some(cert) => {
            let alpha: Vec<String> = cert.alpha.iter().map(|a| a.to_string()).collect();
            writeln!(out, "N={}, alpha=[{}]", cert.order, alpha.join(", ")).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        None => {
            writeln!(out, "NOT FOUND up to {max_n}").map_err(io_err)?;
            Ok(EXIT_NEGATIVE)
        }
    }
}
