use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use qalink_core::dinvariants::{correction_terms, owens_strle_quarter_test, SHARPNESS_CAVEAT};
use qalink_core::embedder::{SearchBudget, SearchStatus};
use qalink_core::obstruction::{qa_obstruction, ObstructionStatus};
use qalink_core::plumbing::{
    graph_11n50, is_rational, mirror_pretzel_plumbing, pretzel_plumbing, WeightedGraph,
};
use qalink_core::pretzel::{classify, verify_certificate, Normalized, QACertificate};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::{BudgetStatus, Output, Report, Timing, SCHEMA_VERSION};

pub const NOT_QA_DISCLAIMER: &str =
    "NOT_OBSTRUCTED means only that this obstruction is silent; it does not imply quasi-alternating";
pub const MIRROR_CONVENTION: &str = "convention: the graph is a negative definite plumbing X with boundary Y, the branched double cover of L; \
OBSTRUCTED means -Y bounds no negative definite 4-manifold with torsion-free H_1, so the mirror of L (and with it L) is not quasi-alternating";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Where a graph comes from, as typed on the command line.
#[derive(Debug, Clone)]
pub enum GraphInput {
    Builtin(String),
    File(String),
    Pretzel(String),
}

pub struct LoadedGraph {
    pub graph: WeightedGraph,
    pub inputs: Value,
}

fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|x| {
            x.trim().parse::<u64>().map_err(|_| CliError::Input(format!("not a positive integer: {x:?}")))
        })
        .collect()
}

fn builtin_graph(name: &str) -> Result<WeightedGraph, CliError> {
    if name == "11n50" {
        return Ok(graph_11n50());
    }
    let (kind, rest) =
        name.split_once(':').ok_or_else(|| CliError::Input(format!("unknown builtin {name:?}")))?;
    let (p, q) =
        rest.rsplit_once(':').ok_or_else(|| CliError::Input(format!("expected {kind}:p1,p2,...:q")))?;
    let p = parse_list(p)?;
    let q = q.trim().parse::<u64>().map_err(|_| CliError::Input(format!("bad q {q:?}")))?;
    let g = match kind {
        "pretzel" => pretzel_plumbing(&p, q),
        "mirror-pretzel" => mirror_pretzel_plumbing(&p, q),
        _ => return Err(CliError::Input(format!("unknown builtin family {kind:?}"))),
    };
    g.map_err(|e| CliError::Input(e.to_string()))
}

pub fn load_graph(input: &GraphInput) -> Result<LoadedGraph, CliError> {
    match input {
        GraphInput::Builtin(name) => {
            let graph = builtin_graph(name)?;
            Ok(LoadedGraph { graph, inputs: json!({ "builtin": name }) })
        }
        GraphInput::File(path) => {
            let text = read(path)?;
            let graph = WeightedGraph::parse(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
            Ok(LoadedGraph { graph, inputs: json!({ "graph_file": path }) })
        }
        GraphInput::Pretzel(text) => {
            let n: Normalized = text.parse().map_err(|e| CliError::Input(format!("{text}: {e}")))?;
            let s = &n.spec;
            if !(s.e() == 0 && s.m() == 1 && s.n() >= 2) {
                return Err(CliError::Input(format!(
                    "{text} normalizes to {s}; a plumbing is only generated for P(p1,...,pn,-q) with n >= 2"
                )));
            }
            let graph = pretzel_plumbing(s.p(), s.q()[0]).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(LoadedGraph {
                graph,
                inputs: json!({ "pretzel": text, "normal_form": s.to_string(), "mirrored": n.mirrored }),
            })
        }
    }
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.display().to_string(), source };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn elapsed(start: Instant) -> Timing {
    Timing { elapsed_us: start.elapsed().as_micros() as u64 }
}

fn graph_json(g: &WeightedGraph) -> Value {
    json!({
        "weights": g.weights(),
        "edges": g.edges().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
    })
}

#[derive(Serialize)]
struct WitnessJson {
    columns: Vec<usize>,
    rows: Vec<usize>,
    determinant: String,
}

#[derive(Serialize)]
struct ClassJson {
    rows_used: usize,
    columns: Vec<Vec<i64>>,
    admissible: bool,
    witness: Option<WitnessJson>,
}

#[derive(Serialize)]
struct RankJson {
    ambient_rank: usize,
    classes: usize,
    inadmissible: usize,
}

#[derive(Serialize)]
struct ObstructEvidence {
    graph: Value,
    discriminant: String,
    completeness_bound: usize,
    searched_rank: Option<usize>,
    reason: String,
    rational: Option<bool>,
    per_rank: Vec<RankJson>,
    classes: Vec<ClassJson>,
}

fn status_name(s: Option<SearchStatus>, status: ObstructionStatus) -> &'static str {
    match s {
        Some(SearchStatus::SolutionLimitReached) if status == ObstructionStatus::NotObstructed => {
            "stopped_at_admissible"
        }
        Some(SearchStatus::Complete) => "complete",
        Some(SearchStatus::NodeLimitReached) => "node_limit_reached",
        Some(SearchStatus::SolutionLimitReached) => "solution_limit_reached",
        None => "not_run",
    }
}

fn matrix_lines(columns: &[Vec<i64>], rows: usize, out: &mut String) {
    for r in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| format!("{:>2}", c[r])).collect();
        writeln!(out, "    [{}]", row.join(" ")).unwrap();
    }
}

pub fn cmd_obstruct(input: &GraphInput, budget: &SearchBudget) -> Result<Output, CliError> {
    let start = Instant::now();
    let loaded = load_graph(input)?;
    let g = &loaded.graph;
    let v = qa_obstruction(g, budget);
    let rational = match v.search {
        None => is_rational(g).ok(),
        Some(_) => None,
    };

    let classes: Vec<ClassJson> = v
        .classes
        .iter()
        .map(|c| ClassJson {
            rows_used: c.embedding.ambient_rank,
            columns: c.embedding.columns().to_vec(),
            admissible: c.report.admissible,
            witness: c.report.witness.as_ref().map(|w| WitnessJson {
                columns: w.columns.clone(),
                rows: w.rows.clone(),
                determinant: w.determinant.to_string(),
            }),
        })
        .collect();
    let evidence = ObstructEvidence {
        graph: graph_json(g),
        discriminant: v.discriminant.to_string(),
        completeness_bound: v.completeness_bound,
        searched_rank: v.searched_rank,
        reason: v.reason.clone(),
        rational,
        per_rank: v
            .evidence
            .iter()
            .map(|r| RankJson {
                ambient_rank: r.ambient_rank,
                classes: r.classes,
                inadmissible: r.inadmissible,
            })
            .collect(),
        classes,
    };

    let mut text = String::new();
    writeln!(text, "{}", v.status).unwrap();
    writeln!(text, "  {}", v.reason).unwrap();
    writeln!(
        text,
        "det Q = {}, rank {}, completeness bound {}",
        v.discriminant,
        g.vertex_count(),
        v.completeness_bound
    )
    .unwrap();
    if let Some(r) = rational {
        writeln!(text, "rational singularity: {}", if r { "yes" } else { "no" }).unwrap();
    }
    if let Some(n) = v.searched_rank {
        writeln!(text, "searched n <= {n}: {}, {} nodes", status_name(v.search, v.status), v.nodes).unwrap();
    }
    for r in &v.evidence {
        writeln!(text, "  n = {:>2}: {} classes, {} inadmissible", r.ambient_rank, r.classes, r.inadmissible)
            .unwrap();
    }
    for (i, c) in v.classes.iter().enumerate() {
        let state = if c.report.admissible { "admissible" } else { "inadmissible" };
        writeln!(text, "class {i} ({} rows): {state}", c.embedding.ambient_rank).unwrap();
        matrix_lines(c.embedding.columns(), c.embedding.ambient_rank, &mut text);
        if let Some(w) = &c.report.witness {
            writeln!(text, "  witness: columns {:?}, rows {:?}, minor {}", w.columns, w.rows, w.determinant)
                .unwrap();
        }
    }
    let notes = vec![NOT_QA_DISCLAIMER.to_string(), MIRROR_CONVENTION.to_string()];
    for n in &notes {
        writeln!(text, "note: {n}").unwrap();
    }

    let exit_code = if v.status == ObstructionStatus::Inconclusive { 2 } else { 0 };
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "obstruct".into(),
        inputs: loaded.inputs,
        verdict: v.status.to_string(),
        evidence: serde_json::to_value(evidence).expect("plain data"),
        notes,
        budget: Some(BudgetStatus {
            max_ambient_rank: budget.max_ambient_rank,
            node_limit: budget.node_limit,
            nodes_used: v.nodes,
            status: status_name(v.search, v.status).into(),
        }),
        timing: elapsed(start),
    };
    Ok(Output { report, text, exit_code })
}

pub fn cmd_classify(pretzel: &str, certificate_out: Option<&Path>) -> Result<Output, CliError> {
    let start = Instant::now();
    let n: Normalized = pretzel.parse().map_err(|e| CliError::Input(format!("{pretzel}: {e}")))?;
    let c = classify(&n.spec);
    let mut notes = Vec::new();
    if n.mirrored {
        notes.push("normal form is of the mirror; quasi-alternating status is mirror invariant".to_string());
    }
    let verified = c.certificate.as_ref().map(|cert| verify_certificate(cert).passed());
    let written = match (certificate_out, &c.certificate) {
        (Some(path), Some(cert)) => {
            let body = serde_json::to_string_pretty(cert).expect("plain data") + "\n";
            write_atomic(path, &body)?;
            Some(path.display().to_string())
        }
        (Some(_), None) => {
            notes.push("no certificate for this case; nothing written".into());
            None
        }
        _ => None,
    };

    let mut text = String::new();
    writeln!(text, "{}", c.verdict).unwrap();
    writeln!(text, "normal form: {}{}", n.spec, if n.mirrored { " (mirror)" } else { "" }).unwrap();
    writeln!(text, "case: {}", c.case.tag()).unwrap();
    if !c.note.is_empty() {
        writeln!(text, "  {}", c.note).unwrap();
    }
    writeln!(text, "determinant: {}", c.determinant).unwrap();
    if let Some(cert) = &c.certificate {
        writeln!(
            text,
            "certificate: {} resolutions, verification {}",
            cert.internal_nodes(),
            if verified == Some(true) { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    if let Some(p) = &written {
        writeln!(text, "certificate written to {p}").unwrap();
    }
    for note in &notes {
        writeln!(text, "note: {note}").unwrap();
    }

    let evidence = json!({
        "case": c.case,
        "tag": c.case.tag(),
        "note": c.note,
        "determinant": c.determinant.to_string(),
        "certificate": c.certificate,
        "certificate_verified": verified,
        "certificate_file": written,
    });
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "classify".into(),
        inputs: json!({ "pretzel": pretzel, "normal_form": n.spec.to_string(), "mirrored": n.mirrored }),
        verdict: c.verdict.to_string(),
        evidence,
        notes,
        budget: None,
        timing: elapsed(start),
    };
    Ok(Output { report, text, exit_code: 0 })
}

pub fn cmd_dinv(input: &GraphInput, mirror: bool) -> Result<Output, CliError> {
    let start = Instant::now();
    let loaded = load_graph(input)?;
    let table = correction_terms(&loaded.graph, mirror).map_err(|e| CliError::Input(e.to_string()))?;
    let max_d = table.max_d().expect("a definite form has at least one class").clone();
    let passes = owens_strle_quarter_test(&table);
    let verdict = if passes { "passes" } else { "fails" };

    let mut text = String::new();
    writeln!(text, "quarter test: {verdict} (max d = {max_d}{} 1/4)", if passes { " >" } else { " <=" })
        .unwrap();
    writeln!(text, "{} spin-c classes{}", table.entries.len(), if mirror { ", mirrored" } else { "" })
        .unwrap();
    for e in &table.entries {
        writeln!(
            text,
            "  residue {:?}: d = {}, max square {} at xi = {:?}",
            e.residue, e.d, e.max_square, e.representative.xi
        )
        .unwrap();
    }
    writeln!(text, "note: {SHARPNESS_CAVEAT}").unwrap();

    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "residue": e.residue,
                "representative": e.representative.xi,
                "max_square": e.max_square.to_string(),
                "d": e.d.to_string(),
            })
        })
        .collect();
    let mut inputs = loaded.inputs;
    inputs["mirror"] = json!(mirror);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "dinv".into(),
        inputs,
        verdict: verdict.into(),
        evidence: json!({
            "graph": graph_json(&loaded.graph),
            "max_d": max_d.to_string(),
            "quarter_test": verdict,
            "table": entries,
        }),
        notes: vec![SHARPNESS_CAVEAT.into()],
        budget: None,
        timing: elapsed(start),
    };
    Ok(Output { report, text, exit_code: 0 })
}

pub fn cmd_certify(path: &str) -> Result<Output, CliError> {
    let start = Instant::now();
    let body = read(path)?;
    let cert: QACertificate =
        serde_json::from_str(&body).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let v = verify_certificate(&cert);
    let verdict = if v.passed() { "PASS" } else { "FAIL" };

    let mut text = String::new();
    writeln!(text, "{verdict}").unwrap();
    writeln!(text, "{} nodes, {} resolutions", cert.nodes().len(), cert.internal_nodes()).unwrap();
    if let Some((node, reason)) = &v.failure {
        writeln!(text, "failing node {node}: {reason}").unwrap();
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        command: "certify".into(),
        inputs: json!({ "certificate_file": path }),
        verdict: verdict.into(),
        evidence: json!({
            "nodes": cert.nodes().len(),
            "resolutions": cert.internal_nodes(),
            "failure": v.failure.as_ref().map(|(p, r)| json!({ "path": p, "reason": r })),
        }),
        notes: Vec::new(),
        budget: None,
        timing: elapsed(start),
    };
    Ok(Output { report, text, exit_code: 0 })
}
