//! Command definitions and their reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use tatetrace_core::cgm::{cgm_decompose, cgm_poincare_identity, CgmError, GroupDatum};
use tatetrace_core::diagram::VertexSet;
use tatetrace_core::equiv::{
    check_motequiv, conclusions, critborel_check, pattern_from_towers, splitting_pattern, splitting_tower,
    CohinvPreset, CritborelHypotheses, DiagramIso, EquivError, MotequivClause, COHINV_PRESETS,
};
use tatetrace_core::motive::{ExtensionLattice, MotiveError};
use tatetrace_core::qform::{parse_rational, vishik_check, witt_index_over, QformError, QuadraticForm, Rational};
use tatetrace_core::weyl::{poincare_closed, WeylError};
use tatetrace_core::{DynkinDiagram, LaurentPoly};

use crate::workspace::{parse_labels, to_canonical_json, Workspace, WorkspaceError};

#[derive(Debug, Parser)]
#[command(name = "tatetrace", version, about = "Tate traces, Poincaré polynomials and motivic equivalence checks")]
pub struct Cli {
    /// Print a machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Workspace file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub workspace: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poincaré polynomial of the flag variety X_Θ of a split group.
    Poincare {
        /// Diagram spec such as `G2` or `A2;A1`.
        diagram: String,
        /// Comma-separated vertex labels; empty for the point.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        theta: String,
    },
    /// Decomposition of an isotropic X_Θ into shifted Levi pieces.
    Decompose {
        /// Group in the workspace, or a diagram spec for the split group.
        group: String,
        #[arg(long, default_value = "")]
        theta: String,
    },
    /// Tate traces of a motive at every node (or one).
    Trace {
        motive: String,
        #[arg(long)]
        node: Option<String>,
    },
    /// Isomorphism of two motives.
    Iso { left: String, right: String },
    /// Vishik's criterion for two quadrics, from their Witt tables.
    Vishik { left: String, right: String },
    /// Motivic equivalence of two groups from their Tits tables.
    Moteq {
        left: String,
        right: String,
        /// `id` or a label map such as `1:3,2:2,3:1`.
        #[arg(long, default_value = "id")]
        phi: String,
        #[arg(long, default_value = "")]
        theta0: String,
    },
    /// Greedy splitting tower of a motive.
    Tower { motive: String },
    /// Splitting pattern of a motive, directly and along all towers.
    Pattern { motive: String },
    /// Witt index of a form over Q or a multiquadratic extension.
    Witt {
        /// Workspace form name, or coefficients such as `1,1,-1` or `<1,1,-1>`.
        form: String,
        /// Square classes to adjoin, e.g. `-1,2`.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        over: String,
    },
    /// Comparison of generically split varieties by Poincaré polynomials
    /// and prime-to-p splitting.
    Critborel {
        /// One of the named type/prime presets.
        #[arg(long, conflicts_with = "diagram")]
        preset: Option<String>,
        #[arg(long)]
        diagram: Option<String>,
        #[arg(long)]
        theta: String,
        #[arg(long)]
        theta2: String,
        /// Split table names in the workspace.
        #[arg(long)]
        split: String,
        #[arg(long)]
        split2: String,
        #[arg(long)]
        inner_type: bool,
        #[arg(long)]
        generically_split: bool,
    },
    /// List the critborel presets.
    Presets,
    /// Rewrite the workspace as canonical JSON.
    Canon {
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Workspace(Box<WorkspaceError>),
    #[error(transparent)]
    Cgm(#[from] CgmError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Motive(#[from] MotiveError),
    #[error(transparent)]
    Qform(#[from] QformError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("this command needs --workspace")]
    NeedWorkspace,
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

impl From<WorkspaceError> for CliError {
    fn from(e: WorkspaceError) -> Self {
        CliError::Workspace(Box::new(e))
    }
}

/// A command's result: text for people, JSON for machines, and the verdict
/// that decides the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub verdict: Option<bool>,
    pub text: String,
    pub json: Value,
}

impl Report {
    fn info(text: String, json: Value) -> Self {
        Self { verdict: None, text, json }
    }

    fn verdict(holds: bool, text: String, json: Value) -> Self {
        Self { verdict: Some(holds), text, json }
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(false) => 1,
            _ => 0,
        }
    }
}

pub const INPUT_ERROR: i32 = 2;

fn fmt_set(s: &VertexSet) -> String {
    let parts: Vec<String> = s.iter().map(u32::to_string).collect();
    format!("{{{}}}", parts.join(","))
}

fn set_json(s: &VertexSet) -> Value {
    json!(s.iter().collect::<Vec<_>>())
}

fn poly_json(p: &LaurentPoly) -> Value {
    let map: BTreeMap<String, u64> = p.terms().map(|(e, c)| (e.to_string(), c)).collect();
    json!(map)
}

fn load(cli: &Cli) -> Result<Workspace, CliError> {
    let path = cli.workspace.as_ref().ok_or(CliError::NeedWorkspace)?;
    Ok(Workspace::load(path)?)
}

fn node_name(lattice: &ExtensionLattice, e: usize) -> String {
    lattice.name(e).to_string()
}

pub fn parse_form(text: &str) -> Result<QuadraticForm, CliError> {
    let inner = text.trim().trim_start_matches('<').trim_end_matches('>');
    let coeffs = inner
        .split(',')
        .map(str::trim)
        .map(|c| parse_rational(c).ok_or_else(|| CliError::Usage(format!("bad coefficient {c:?}"))))
        .collect::<Result<Vec<Rational>, _>>()?;
    Ok(QuadraticForm::new(coeffs)?)
}

fn parse_phi(text: &str, t: &tatetrace_core::equiv::TitsTable, t2: &tatetrace_core::equiv::TitsTable) -> Result<DiagramIso, CliError> {
    let labels: BTreeMap<u32, u32> = if text.trim() == "id" {
        t.diagram().labels().iter().map(|&l| (l, l)).collect()
    } else {
        text.split(',')
            .map(|pair| {
                let (a, b) = pair
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("bad map entry {pair:?}, expected a:b")))?;
                let parse = |s: &str| s.trim().parse::<u32>().map_err(|_| CliError::Usage(format!("bad label {s:?}")));
                Ok((parse(a)?, parse(b)?))
            })
            .collect::<Result<_, CliError>>()?
    };
    Ok(DiagramIso::new(t.star(), t2.star(), &labels)?)
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Poincare { diagram, theta } => cmd_poincare(diagram, theta),
        Command::Decompose { group, theta } => cmd_decompose(cli, group, theta),
        Command::Trace { motive, node } => cmd_trace(cli, motive, node.as_deref()),
        Command::Iso { left, right } => cmd_iso(cli, left, right),
        Command::Vishik { left, right } => cmd_vishik(cli, left, right),
        Command::Moteq { left, right, phi, theta0 } => cmd_moteq(cli, left, right, phi, theta0),
        Command::Tower { motive } => cmd_tower(cli, motive),
        Command::Pattern { motive } => cmd_pattern(cli, motive),
        Command::Witt { form, over } => cmd_witt(cli, form, over),
        Command::Critborel { preset, diagram, theta, theta2, split, split2, inner_type, generically_split } => {
            let hypotheses = CritborelHypotheses { inner_type: *inner_type, generically_split: *generically_split };
            cmd_critborel(cli, preset.as_deref(), diagram.as_deref(), theta, theta2, split, split2, hypotheses)
        }
        Command::Presets => Ok(cmd_presets()),
        Command::Canon { output } => cmd_canon(cli, output.as_ref()),
    }
}

pub fn cmd_poincare(diagram: &str, theta: &str) -> Result<Report, CliError> {
    let d = DynkinDiagram::parse(diagram).map_err(WorkspaceError::from)?;
    let theta = parse_labels(theta)?;
    // Enumeration for groups it can hold, the degree formula beyond.
    let p = match tatetrace_core::WeylGroup::of_diagram(&d) {
        Ok(w) => w.poincare(&theta)?,
        Err(WeylError::TooLarge { .. }) => poincare_closed(&d, &theta)?,
        Err(e) => return Err(e.into()),
    };
    Ok(Report::info(p.to_string(), json!({"diagram": diagram, "theta": set_json(&theta), "poincare": poly_json(&p), "text": p.to_string()})))
}

fn cmd_decompose(cli: &Cli, group: &str, theta: &str) -> Result<Report, CliError> {
    let ws = match &cli.workspace {
        Some(_) => Some(load(cli)?),
        None => None,
    };
    let datum = match ws.as_ref().and_then(|w| w.group(group)) {
        Some(g) => g.clone(),
        None => GroupDatum::split(DynkinDiagram::parse(group).map_err(WorkspaceError::from)?),
    };
    let theta = parse_labels(theta)?;
    let pieces = cgm_decompose(&datum, &theta)?;
    let check = cgm_poincare_identity(&datum, &theta)?;
    let mut text = String::from("shift  type  multiplicity  levi\n");
    let mut rows = Vec::new();
    for p in &pieces {
        let levi = p.levi_diagram().type_string();
        let on = if levi.is_empty() { "-".to_string() } else { format!("{levi} on {}", fmt_set(&p.levi_diagram().vertex_set())) };
        text.push_str(&format!("{:>5}  {}  {}  {on}\n", p.shift, fmt_set(&p.piece_type), p.multiplicity));
        rows.push(json!({
            "shift": p.shift,
            "type": set_json(&p.piece_type),
            "multiplicity": p.multiplicity,
            "levi": levi,
            "levi_vertices": set_json(&p.levi_diagram().vertex_set()),
        }));
    }
    text.push_str(&format!("residual: {}", check.residual));
    Ok(Report::verdict(
        check.holds,
        text,
        json!({"group": group, "theta": set_json(&theta), "pieces": rows, "residual": check.residual.to_string(), "identity_holds": check.holds}),
    ))
}

fn cmd_trace(cli: &Cli, motive: &str, node: Option<&str>) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let c = ws.catalog()?;
    let m = ws.motive(motive)?;
    let lat = c.lattice();
    let nodes: Vec<usize> = match node {
        Some(n) => vec![lat.node_by_name(n)?],
        None => lat.node_ids().collect(),
    };
    let mut text = Vec::new();
    let mut out = serde_json::Map::new();
    for e in nodes {
        let t = c.tate_trace(m, e)?;
        text.push(format!("{}: {}", lat.name(e), t));
        out.insert(node_name(lat, e), json!(t.to_string()));
    }
    let rank = c.rank(m)?;
    text.push(format!("rank: {rank}"));
    Ok(Report::info(text.join("\n"), json!({"motive": motive, "rank": rank, "traces": out})))
}

fn cmd_iso(cli: &Cli, left: &str, right: &str) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let c = ws.catalog()?;
    let (m, n) = (ws.motive(left)?, ws.motive(right)?);
    let lat = c.lattice();
    let verdict = c.is_isomorphic(m, n)?;
    let difference = c.first_trace_difference(m, n, lat.node_ids())?;
    let partial = c.trace_equal_on_partial_splitting_nodes(m, n).ok();
    let mut text = if verdict.isomorphic {
        format!("{left} ≅ {right}: isomorphic")
    } else {
        format!("{left} and {right} are not isomorphic")
    };
    if let Some(e) = difference {
        text.push_str(&format!("\ntraces differ at node {:?}: {} vs {}", lat.name(e), c.tate_trace(m, e)?, c.tate_trace(n, e)?));
    }
    text.push_str(&format!("\n{left} = {}\n{right} = {}", c.describe(m), c.describe(n)));
    text.push_str("\n(relative to the supplied lattice)");
    Ok(Report::verdict(
        verdict.isomorphic,
        text,
        json!({
            "isomorphic": verdict.isomorphic,
            "matching": verdict.matching,
            "first_difference": difference.map(|e| node_name(lat, e)),
            "traces_equal_on_partial_splitting_nodes": partial,
            "relative_to_lattice": true,
        }),
    ))
}

fn cmd_vishik(cli: &Cli, left: &str, right: &str) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let (t, t2) = (ws.witt_table(left)?, ws.witt_table(right)?);
    let v = vishik_check(t, t2)?;
    let lat = t.lattice();
    let mut text = if v.isomorphic {
        format!("the quadrics of {left} and {right} have isomorphic motives")
    } else {
        format!("the quadrics of {left} and {right} do not have isomorphic motives")
    };
    if v.dims_differ {
        text.push_str(&format!("\ndimensions differ: {} vs {}", t.dim(), t2.dim()));
    }
    if let Some(e) = v.first_difference {
        text.push_str(&format!("\nWitt indexes differ at node {:?}: {} vs {}", lat.name(e), t.get(e), t2.get(e)));
    }
    Ok(Report::verdict(
        v.isomorphic,
        text,
        json!({
            "isomorphic": v.isomorphic,
            "dims_differ": v.dims_differ,
            "first_difference": v.first_difference.map(|e| node_name(lat, e)),
            "relative_to_lattice": true,
        }),
    ))
}

fn cmd_moteq(cli: &Cli, left: &str, right: &str, phi: &str, theta0: &str) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let (t, t2) = (ws.tits_table(left)?, ws.tits_table(right)?);
    let phi = parse_phi(phi, t, t2)?;
    let theta0 = parse_labels(theta0)?;
    let v = check_motequiv(t, t2, &phi, &theta0)?;
    let lat = t.lattice();
    let checked: Vec<String> = v.checked.iter().map(|&e| node_name(lat, e)).collect();
    let mut text = format!(
        "{left} and {right} are {}motivically equivalent above {} (checked at p-special nodes: {})",
        if v.holds { "" } else { "not " },
        fmt_set(&theta0),
        checked.join(", ")
    );
    let mut failure = Value::Null;
    let mut pairs = Vec::new();
    if let Some((e, clause)) = v.failure {
        let (d, d2) = (t.distinguished(e), t2.distinguished(e));
        let what = match clause {
            MotequivClause::Distinguishedness => "the type is distinguished on one side only",
            MotequivClause::Bijection => "the distinguished sets do not correspond",
        };
        text.push_str(&format!("\nfails at node {:?}: {what} ({} vs {})", lat.name(e), fmt_set(d), fmt_set(d2)));
        failure = json!({"node": node_name(lat, e), "clause": format!("{clause:?}").to_lowercase()});
    } else {
        for (a, b) in conclusions(&v, &phi, &theta0)? {
            text.push_str(&format!("\nM(X_{}) ≅ M(X'_{})", fmt_set(&a), fmt_set(&b)));
            pairs.push(json!([set_json(&a), set_json(&b)]));
        }
    }
    text.push_str("\n(relative to the supplied lattice)");
    Ok(Report::verdict(
        v.holds,
        text,
        json!({
            "holds": v.holds,
            "theta0": set_json(&theta0),
            "phi": phi.label_map().into_iter().map(|(a, b)| (a.to_string(), json!(b))).collect::<serde_json::Map<_, _>>(),
            "checked": checked,
            "failure": failure,
            "conclusions": pairs,
            "relative_to_lattice": true,
        }),
    ))
}

fn cmd_tower(cli: &Cli, motive: &str) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let c = ws.catalog()?;
    let m = ws.motive(motive)?;
    let lat = c.lattice();
    let chain = splitting_tower(c, m)?;
    let mut lines = Vec::new();
    let mut steps = Vec::new();
    for &e in &chain {
        let t = c.tate_trace(m, e)?;
        lines.push(format!("{}: {}", lat.name(e), t));
        steps.push(json!({"node": node_name(lat, e), "trace": t.to_string()}));
    }
    Ok(Report::info(lines.join("\n"), json!({"motive": motive, "tower": steps})))
}

fn cmd_pattern(cli: &Cli, motive: &str) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let c = ws.catalog()?;
    let m = ws.motive(motive)?;
    let direct = splitting_pattern(c, m)?;
    let towers = pattern_from_towers(c, m);
    let fmt = |s: &std::collections::BTreeSet<LaurentPoly>| s.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    let mut text = format!("splitting pattern: {{{}}}", fmt(&direct).join("; "));
    let towers_json = match &towers {
        Ok(t) => {
            text.push_str(&format!("\nalong splitting towers: {{{}}}", fmt(t).join("; ")));
            json!(fmt(t))
        }
        Err(e) => {
            text.push_str(&format!("\nalong splitting towers: unavailable ({e})"));
            Value::Null
        }
    };
    Ok(Report::info(text, json!({"motive": motive, "pattern": fmt(&direct), "tower_pattern": towers_json})))
}

fn cmd_witt(cli: &Cli, form: &str, over: &str) -> Result<Report, CliError> {
    let ws = match &cli.workspace {
        Some(_) => Some(load(cli)?),
        None => None,
    };
    let q = match ws.as_ref().and_then(|w| w.form(form)) {
        Some(q) => q.clone(),
        None => parse_form(form)?,
    };
    let ext = over
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|d| parse_rational(d).ok_or_else(|| CliError::Usage(format!("bad square class {d:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let i = witt_index_over(&q, &ext);
    let field = if ext.is_empty() {
        "Q".to_string()
    } else {
        format!("Q({})", ext.iter().map(|d| format!("√{d}")).collect::<Vec<_>>().join(", "))
    };
    Ok(Report::info(
        format!("Witt index of {q} over {field}: {i}"),
        json!({"form": q.to_string(), "over": ext.iter().map(|d| d.to_string()).collect::<Vec<_>>(), "witt_index": i}),
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_critborel(
    cli: &Cli,
    preset: Option<&str>,
    diagram: Option<&str>,
    theta: &str,
    theta2: &str,
    split: &str,
    split2: &str,
    hypotheses: CritborelHypotheses,
) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let lat = ws.lattice()?;
    let (d, label) = match (preset, diagram) {
        (Some(name), _) => {
            let p = CohinvPreset::by_name(name).ok_or_else(|| CliError::Usage(format!("unknown preset {name:?}")))?;
            if p.prime != lat.prime() {
                return Err(CliError::Usage(format!("preset {} is for p = {}, the lattice has p = {}", p.name, p.prime, lat.prime())));
            }
            (p.diagram(), Some(p))
        }
        (None, Some(spec)) => (DynkinDiagram::parse(spec).map_err(WorkspaceError::from)?, None),
        (None, None) => return Err(CliError::Usage("give --preset or --diagram".into())),
    };
    let (th, th2) = (parse_labels(theta)?, parse_labels(theta2)?);
    let (p, p2) = (poincare_closed(&d, &th)?, poincare_closed(&d, &th2)?);
    let r = critborel_check(lat, &p, &p2, ws.split_table(split)?, ws.split_table(split2)?, hypotheses)?;
    let mut text = format!(
        "M(X_{}) {} M(X'_{})",
        fmt_set(&th),
        if r.holds { "≅" } else { "≇" },
        fmt_set(&th2)
    );
    if !r.poincare_equal {
        text.push_str(&format!("\nPoincaré polynomials differ: {p} vs {p2}"));
    }
    if let Some(e) = r.first_difference {
        text.push_str(&format!("\nprime-to-p splitting differs at node {:?}", lat.name(e)));
    }
    if let Some(pr) = label {
        text.push_str(&format!("\npreset {}: splitting is detected by the invariant {}", pr.name, pr.invariant));
    }
    text.push_str(&format!(
        "\nassumed: inner type = {}, generically split = {}",
        hypotheses.inner_type, hypotheses.generically_split
    ));
    Ok(Report::verdict(
        r.holds,
        text,
        json!({
            "holds": r.holds,
            "poincare_equal": r.poincare_equal,
            "poincare": [p.to_string(), p2.to_string()],
            "first_difference": r.first_difference.map(|e| node_name(lat, e)),
            "preset": label.map(|p| p.name),
            "invariant": label.map(|p| p.invariant),
            "hypotheses": {"inner_type": hypotheses.inner_type, "generically_split": hypotheses.generically_split},
        }),
    ))
}

fn cmd_presets() -> Report {
    let lines: Vec<String> =
        COHINV_PRESETS.iter().map(|p| format!("{}: type {}, p = {}, invariant {}", p.name, p.diagram, p.prime, p.invariant)).collect();
    let rows: Vec<Value> = COHINV_PRESETS
        .iter()
        .map(|p| json!({"name": p.name, "diagram": p.diagram, "prime": p.prime, "invariant": p.invariant}))
        .collect();
    Report::info(lines.join("\n"), json!(rows))
}

fn cmd_canon(cli: &Cli, output: Option<&PathBuf>) -> Result<Report, CliError> {
    let ws = load(cli)?;
    let text = to_canonical_json(&ws.file);
    match output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|source| CliError::Write { path: path.display().to_string(), source })?;
            Ok(Report::info(format!("wrote {}", path.display()), json!({"written": path.display().to_string()})))
        }
        None => Ok(Report::info(text.trim_end().to_string(), serde_json::from_str(&text).expect("canonical JSON parses"))),
    }
}
