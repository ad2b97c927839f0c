//! Command-line front end. [`run`] is pure apart from file I/O so it can be
//! driven directly from tests; `main` only prints its [`Outcome`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use num::BigInt;
use serde::Serialize;
use serde_json::json;

use crate::discrete::{self, FiniteAbelianGroup};
use crate::divisor::{Divisor, DivisorTermJson};
use crate::embedding::{balance, embed};
use crate::error::Error;
use crate::graph::{homology_basis, GraphJson, GraphPoint, MetricGraph};
use crate::jacobian::{self, PathStrategy, BASIS_TAG};
use crate::rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Jacobian,
    AbelJacobi,
    IsPrincipal,
    LiftFunction,
    DiscreteJac,
    Trees,
    Embed,
    CheckBalance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "tropjac", version, about = "Exact divisor theory on metric graphs")]
pub struct Command {
    #[arg(value_enum)]
    pub command: CommandKind,
    /// Graph JSON file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Divisor JSON file.
    #[arg(long)]
    pub divisor: Option<PathBuf>,
    /// Base point (`v1` or `e1:1/3`); the gauge point for lift-function.
    #[arg(long)]
    pub base: Option<String>,
    /// Write the output document here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// With `embed`, emit a float CSV of segment endpoints instead of JSON.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    /// Malformed invocation or input documents: exit 2.
    Parse(String),
    /// Well-formed input rejected by the mathematics: exit 1.
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(msg) => Failure::Parse(msg),
            other => Failure::Domain(other),
        }
    }
}

fn error_document(kind: &str, detail: &str) -> String {
    json!({"error": {"kind": kind, "detail": detail}}).to_string() + "\n"
}

pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cmd = match Command::try_parse_from(args) {
        Ok(cmd) => cmd,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            return Outcome {
                code: 2,
                stdout: error_document("Usage", e.kind().as_str().unwrap_or("invalid arguments")),
                stderr: e.to_string(),
            };
        }
    };
    match execute(&cmd) {
        Ok(doc) => match &cmd.out {
            Some(path) => match fs::write(path, &doc) {
                Ok(()) => Outcome { code: 0, stdout: String::new(), stderr: String::new() },
                Err(e) => Outcome {
                    code: 2,
                    stdout: error_document("Io", &e.to_string()),
                    stderr: format!("cannot write {}: {e}\n", path.display()),
                },
            },
            None => Outcome { code: 0, stdout: doc, stderr: String::new() },
        },
        Err(Failure::Parse(msg)) => Outcome {
            code: 2,
            stdout: error_document("InvalidInput", &msg),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Domain(e)) => Outcome {
            code: 1,
            stdout: error_document(e.kind(), &e.to_string()),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(cmd: &Command) -> Result<MetricGraph, Failure> {
    let path = cmd.graph.as_ref().ok_or_else(|| Failure::Parse("--graph is required".into()))?;
    let doc: GraphJson =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Parse(format!("graph {}: {e}", path.display())))?;
    Ok(MetricGraph::from_json(&doc)?)
}

fn load_divisor(cmd: &Command, graph: &MetricGraph) -> Result<Divisor, Failure> {
    let path = cmd.divisor.as_ref().ok_or_else(|| Failure::Parse("--divisor is required".into()))?;
    let terms: Vec<DivisorTermJson> =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::Parse(format!("divisor {}: {e}", path.display())))?;
    Ok(Divisor::from_json(graph, &terms)?)
}

fn base_point(cmd: &Command, graph: &MetricGraph) -> Result<GraphPoint, Failure> {
    match &cmd.base {
        Some(s) => Ok(graph.parse_point(s)?),
        None => Ok(GraphPoint::Vertex(0)),
    }
}

fn to_json_line<T: Serialize>(doc: &T) -> String {
    serde_json::to_string(doc).expect("documents serialize") + "\n"
}

fn small_int(n: &BigInt) -> Result<u64, Failure> {
    u64::try_from(n).map_err(|_| Failure::Domain(Error::InternalInconsistency(format!("{n} does not fit the output format"))))
}

/// Right-aligned columns.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    rows.iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(x, w)| format!("{x:>w$}")).collect();
            cells.join("  ") + "\n"
        })
        .collect()
}

fn group_document(group: &FiniteAbelianGroup, format: Format) -> Result<String, Failure> {
    let order = group
        .order()
        .ok_or_else(|| Failure::Domain(Error::InternalInconsistency("Jacobian is infinite".into())))?;
    Ok(match format {
        Format::Json => {
            let factors = group.factors.iter().map(small_int).collect::<Result<Vec<_>, _>>()?;
            to_json_line(&json!({"factors": factors, "order": small_int(&order)?}))
        }
        Format::Text => format!("{group}\norder {order}\n"),
    })
}

fn execute(cmd: &Command) -> Result<String, Failure> {
    let graph = load_graph(cmd)?;
    match cmd.command {
        CommandKind::Jacobian => {
            let basis = homology_basis(&graph);
            let pm = jacobian::period_matrix(&graph, &basis);
            let rows: Vec<Vec<String>> =
                pm.gram.iter().map(|r| r.iter().map(rational::render).collect()).collect();
            Ok(match cmd.format {
                Format::Json => to_json_line(&json!({"gram": rows})),
                Format::Text => format!("genus {}\n{}", pm.genus(), table(&rows)),
            })
        }
        CommandKind::AbelJacobi => {
            let d = load_divisor(cmd, &graph)?;
            let base = base_point(cmd, &graph)?;
            let basis = homology_basis(&graph);
            let p = jacobian::abel_jacobi_divisor(&graph, &basis, &base, &d, PathStrategy::Bfs);
            let coords: Vec<String> = p.coords.iter().map(rational::render).collect();
            Ok(to_json_line(&json!({"coords": coords, "basis": BASIS_TAG})))
        }
        CommandKind::IsPrincipal => {
            let d = load_divisor(cmd, &graph)?;
            let principal = jacobian::is_principal(&graph, &d);
            Ok(match cmd.format {
                Format::Json => to_json_line(&json!({"principal": principal})),
                Format::Text => format!("principal: {principal}\n"),
            })
        }
        CommandKind::LiftFunction => {
            let d = load_divisor(cmd, &graph)?;
            let gauge = base_point(cmd, &graph)?;
            let f = jacobian::lift_to_function(&graph, &d, &gauge)?;
            Ok(to_json_line(&f.to_json(&graph)))
        }
        CommandKind::DiscreteJac => {
            let lap = discrete::discrete_jacobian_via_laplacian(&graph)?;
            let pairing = discrete::discrete_jacobian_via_pairing(&graph)?;
            if lap != pairing {
                return Err(Failure::Domain(Error::InternalInconsistency(format!(
                    "Laplacian gives {lap} but the cycle pairing gives {pairing}"
                ))));
            }
            group_document(&lap, cmd.format)
        }
        CommandKind::Trees => {
            let n = discrete::spanning_tree_count(&graph);
            Ok(match cmd.format {
                Format::Json => to_json_line(&json!({"spanning_trees": small_int(&n)?})),
                Format::Text => format!("{n}\n"),
            })
        }
        CommandKind::Embed => {
            let emb = embed(&graph)?;
            if cmd.plot {
                return Ok(emb.plot_csv());
            }
            Ok(to_json_line(&balance(&emb).to_json()))
        }
        CommandKind::CheckBalance => {
            let complex = balance(&embed(&graph)?);
            if !complex.is_balanced() {
                return Err(Failure::Domain(Error::CertificationFailure("completed complex is not balanced".into())));
            }
            let vertices = complex.embedding.subdivision.vertex_count();
            Ok(match cmd.format {
                Format::Json => {
                    to_json_line(&json!({"balanced": true, "vertices": vertices, "rays": complex.rays.len()}))
                }
                Format::Text => format!("balanced: true\nvertices: {vertices}\nrays: {}\n", complex.rays.len()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_table() {
        let rows = vec![vec!["3".to_string(), "1/2".to_string()], vec!["10".to_string(), "1".to_string()]];
        assert_eq!(table(&rows), " 3  1/2\n10    1\n");
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let out = run(["tropjac", "jacobian", "--bogus"]);
        assert_eq!(out.code, 2);
        assert!(out.stdout.contains("\"kind\":\"Usage\""));
    }

    #[test]
    fn missing_graph_is_a_parse_error() {
        let out = run(["tropjac", "trees"]);
        assert_eq!(out.code, 2);
        assert!(out.stdout.contains("--graph is required"));
    }
}
