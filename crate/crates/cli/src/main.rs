//! `onticlab`: build interferometer and construction scenarios, certify
//! them, derive and check non-overlap traces, and search for counter-models.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible instance,
//! 4 internal disagreement.

mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use onticlab::builders::{resolve_builder, Instance};
use onticlab::construction::{
    alpha2_grid, build_construction, build_restricted_protocol, empirical_boundary, feasible_overlap_bound,
    scan_feasibility, verify_condition, ConstructionError, Disjunct,
};
use onticlab::interfero::{detector_probabilities, mzi_zero_table, Figure, Phase};
use onticlab::nogo::{
    check_trace, check_witness, derive_nonoverlap, feasibility_search, Axiom, DerivationRequest,
    FeasibilityProblem, NogoError, SearchOutcome, Variant,
};
use onticlab::ontology::{
    check_ontic_indifference, check_possibilistic_completeness, classify_model, IndifferenceMode,
    IndifferenceVerdict, OntologicalModel,
};
use onticlab::scenario::QuantumScenario;
use onticlab::{CVector, Tolerances};
use serde_json::{json, Value};

use report::{sha256_hex, RunReport};

const SCAN_SCHEMA_VERSION: u32 = 1;
const DEFAULT_CONFIG: &str = "onticlab.toml";

#[derive(Parser)]
#[command(name = "onticlab", version, about = "Possibilistic ontological-model toolkit")]
struct Cli {
    /// Tolerance file (key = value); defaults to ./onticlab.toml if present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Emit::Table)]
    emit: Emit,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Pointwise,
    SetPreserving,
}

#[derive(Subcommand)]
enum Command {
    /// Detector probabilities and zero structure of an interferometer figure.
    Mzi {
        #[arg(long)]
        figure: u8,
        /// `0` or `pi`; both phases when omitted.
        #[arg(long)]
        phase: Option<String>,
        /// |α|² for figures 3 and 4.
        #[arg(long)]
        alpha2: Option<f64>,
    },
    /// Build and certify the non-overlap construction for |⟨φ|ψ⟩|² = alpha2.
    Construct {
        #[arg(long)]
        alpha2: f64,
        #[arg(long = "N")]
        n: usize,
        /// Also build the conjugating protocol around a fixed zero state.
        #[arg(long)]
        restricted: bool,
    },
    /// Feasibility of the construction over an (N, α²) grid.
    Scan {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Grid α² = k/steps for k = 1..steps-1.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Write the CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Derive and check a non-overlap trace; optionally cross-check by search.
    Prove {
        #[arg(long, conflicts_with = "scenario")]
        builder: Option<String>,
        /// Scenario JSON, or `{"builder": tag}`.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, default_value = "plain")]
        variant: Variant,
        #[arg(long)]
        zero_state: Option<String>,
        /// Measurement to run the argument on.
        #[arg(long)]
        measurement: Option<String>,
        /// Comma-separated subset of indifference, completeness, coverage, separability.
        #[arg(long, value_delimiter = ',')]
        axioms: Option<Vec<Axiom>>,
        /// Search models with up to this many ontic states.
        #[arg(long)]
        search: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Pointwise)]
        indifference: ModeArg,
        /// Drop the requirement that the supports overlap.
        #[arg(long)]
        no_overlap: bool,
        #[arg(long, default_value_t = onticlab::nogo::search::DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Classify a model and check it against its scenario.
    CheckModel {
        model: PathBuf,
        #[arg(long, conflicts_with = "scenario")]
        builder: Option<String>,
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Infeasible(String),
    Disagreement(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Disagreement(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Infeasible(m) | CliError::Disagreement(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Result of a command: its report, a human rendering, and an optional
/// error that sets the exit code after output is written.
struct Outcome {
    inputs: Value,
    results: Value,
    table: String,
    csv: Option<String>,
    failure: Option<CliError>,
}

fn load_tolerances(path: Option<&Path>) -> Result<Tolerances, CliError> {
    let (path, required) = match path {
        Some(p) => (p.to_path_buf(), true),
        None => (PathBuf::from(DEFAULT_CONFIG), false),
    };
    match std::fs::read_to_string(&path) {
        Ok(text) => toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        Err(_) if !required => Ok(Tolerances::default()),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

fn read_file(path: &Path) -> Result<(String, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let digest = sha256_hex(text.as_bytes());
    Ok((text, digest))
}

fn instance_from_value(value: Value, label: &str, tol: &Tolerances) -> Result<Instance, CliError> {
    if let Some(tag) = value.as_str().or_else(|| value.get("builder").and_then(Value::as_str)) {
        return resolve_builder(tag, tol).map_err(config_err);
    }
    let scenario = QuantumScenario::from_json_value(value, tol).map_err(|e| CliError::Config(format!("{label}: {e}")))?;
    Ok(Instance { tag: label.to_owned(), scenario, phi: "phi".into(), psi: "psi".into(), zero_state: None })
}

fn load_instance(builder: &Option<String>, scenario: &Option<PathBuf>, tol: &Tolerances) -> Result<(Instance, Value), CliError> {
    match (builder, scenario) {
        (Some(tag), _) => Ok((resolve_builder(tag, tol).map_err(config_err)?, json!({ "builder": tag }))),
        (None, Some(path)) => {
            let (text, digest) = read_file(path)?;
            let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let inst = instance_from_value(value, &path.display().to_string(), tol)?;
            Ok((inst, json!({ "scenario_file": path.display().to_string(), "scenario_sha256": digest })))
        }
        (None, None) => Err(CliError::Config("give --builder or --scenario".into())),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn cmd_mzi(figure: u8, phase: Option<String>, alpha2: Option<f64>, tol: &Tolerances) -> Result<Outcome, CliError> {
    let fig = Figure::from_number(figure).map_err(config_err)?;
    let phases = match &phase {
        Some(p) => vec![p.parse::<Phase>().map_err(config_err)?],
        None => vec![Phase::Zero, Phase::Pi],
    };
    let mut columns = Vec::new();
    let mut probabilities = serde_json::Map::new();
    let mut config = None;
    for &ph in &phases {
        let c = fig.config(alpha2, ph).map_err(config_err)?;
        let table = detector_probabilities(&c, fig.source(), tol).map_err(config_err)?;
        probabilities.insert(ph.member().to_owned(), Value::Object(table.iter().map(|(o, p)| (o.clone(), json!(p))).collect()));
        columns.push((ph, table));
        config = Some(c);
    }
    let config = config.expect("at least one phase");
    let zeros: Vec<String> = mzi_zero_table(&config, tol).map_err(config_err)?.iter().map(ToString::to_string).collect();

    let mut table = format!("figure {figure}, source {}", fig.source());
    if let Some(t) = config.transmissivity {
        let _ = write!(table, ", α² = {:.4}, T = {t:.4}", config.alpha * config.alpha);
    }
    table.push('\n');
    let _ = write!(table, "{:<8}", "outcome");
    for (ph, _) in &columns {
        let _ = write!(table, "{:>12}", ph.member());
    }
    table.push('\n');
    for (k, (o, _)) in columns[0].1.iter().enumerate() {
        let _ = write!(table, "{o:<8}");
        for (_, t) in &columns {
            let _ = write!(table, "{:>12.6}", t[k].1.max(0.0));
        }
        table.push('\n');
    }
    table.push_str("zeros:\n");
    for z in &zeros {
        let _ = writeln!(table, "  {z}");
    }
    Ok(Outcome {
        inputs: json!({ "figure": figure, "phase": phase, "alpha2": alpha2 }),
        results: json!({
            "figure": figure,
            "source": fig.source(),
            "alpha": config.alpha,
            "beta": config.beta,
            "with_bs3": config.with_bs3,
            "transmissivity": config.transmissivity,
            "probabilities": probabilities,
            "zeros": zeros,
        }),
        table,
        csv: None,
        failure: None,
    })
}

fn cmd_construct(alpha2: f64, n: usize, restricted: bool, emit: Emit, tol: &Tolerances) -> Result<Outcome, CliError> {
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        return Err(CliError::Config(format!("alpha2 must lie in (0, 1), got {alpha2}")));
    }
    if n < 1 {
        return Err(CliError::Config("N must be at least 1".into()));
    }
    let inputs = json!({ "alpha2": alpha2, "N": n, "restricted": restricted });
    let c = match build_construction(alpha2.sqrt(), (1.0 - alpha2).sqrt(), n, tol) {
        Ok(c) => c,
        Err(ConstructionError::Infeasible { m, n, minimal_n }) => {
            let msg = format!("infeasible: M = {m} > N = {n}; smallest feasible N is {minimal_n}");
            return Ok(Outcome {
                inputs,
                results: json!({ "feasible": false, "M": m, "N": n, "minimal_N": minimal_n }),
                table: format!("{msg}\n"),
                csv: None,
                failure: Some(CliError::Infeasible(msg)),
            });
        }
        Err(e) => return Err(config_err(e)),
    };
    let cert = verify_condition(&c, tol).map_err(|e| CliError::Disagreement(format!("certificate failed: {e}")))?;
    let audit = c.audit();
    let mut table = format!(
        "construction: α² = {alpha2}, β² = {:.6}, γ = {:.6}, M = {}, N = {}\n",
        c.beta * c.beta,
        c.gamma,
        c.m,
        c.n
    );
    for (k, d) in cert.per_n.iter().enumerate() {
        let which = match d {
            Disjunct::First { a0_overlap } => format!("⟨D{k}|φ⟩ = 0        (|⟨D{k}|φ⟩| = {a0_overlap:.1e})"),
            Disjunct::Second { c_overlap } => format!("⟨D{k}|U[{k}]ψ⟩ = 0   (|⟨D{k}|U[{k}]ψ⟩| = {c_overlap:.1e})"),
            Disjunct::Both { .. } => format!("both disjuncts hold for D{k}"),
        };
        let _ = writeln!(table, "  D{k}: {which}");
    }
    let _ = writeln!(table, "audit: worst deviation {:.2e}", audit.worst());
    let _ = writeln!(
        table,
        "bound: |⟨φ|ψ⟩|² = {alpha2} ≤ (N−1)/N = {:.6}",
        feasible_overlap_bound(c.n)
    );
    let mut results = json!({
        "feasible": true,
        "M": c.m,
        "N": c.n,
        "certificate": to_value(&cert),
        "audit": to_value(&audit),
    });
    let mut failure = None;
    if restricted {
        let p = build_restricted_protocol(&c.a0, &CVector::basis(c.dim(), 0), &c, tol)
            .map_err(|e| CliError::Disagreement(format!("restricted protocol: {e}")))?;
        let composite = p.composite_deviation(&c);
        let zero = p.zero_state_deviation();
        let ok = composite <= tol.unitary && zero <= tol.unitary;
        let _ = writeln!(
            table,
            "restricted: max |W†Ũ[m]W − U[m]| = {composite:.2e}, max |Ũ[m]|0⟩ − |0⟩| = {zero:.2e} ({})",
            if ok { "ok" } else { "FAILED" }
        );
        results["restricted"] = json!({ "composite_deviation": composite, "zero_state_deviation": zero, "ok": ok });
        if !ok {
            failure = Some(CliError::Disagreement("restricted protocol does not reproduce U[m]".into()));
        }
    }
    if emit == Emit::Json {
        results["bundle"] = to_value(&c);
    }
    Ok(Outcome { inputs, results, table, csv: None, failure })
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("ONTICLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("ONTICLAB_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_scan(n_min: usize, n_max: usize, steps: usize, out: Option<PathBuf>, tol: &Tolerances) -> Result<Outcome, CliError> {
    if n_min < 1 || n_max < n_min {
        return Err(CliError::Config("need 1 ≤ n-min ≤ n-max".into()));
    }
    if steps < 2 {
        return Err(CliError::Config("steps must be at least 2".into()));
    }
    let ns: Vec<usize> = (n_min..=n_max).collect();
    let grid = alpha2_grid(steps);
    let rows = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(config_err)?
            .install(|| scan_feasibility(&ns, &grid, tol)),
        None => scan_feasibility(&ns, &grid, tol),
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        writer.serialize(r).map_err(config_err)?;
    }
    let body = String::from_utf8(writer.into_inner().map_err(config_err)?).expect("csv is utf-8");
    let csv = format!("# onticlab scan schema_version={SCAN_SCHEMA_VERSION}\n{body}");
    if let Some(path) = &out {
        std::fs::write(path, &csv).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    let resolution = 1.0 / steps as f64;
    let mut table = format!("{:>4} {:>12} {:>12} {:>6}\n", "N", "boundary", "(N-1)/N", "agree");
    let mut boundary = Vec::new();
    for (n, b) in empirical_boundary(&rows) {
        let bound = feasible_overlap_bound(n);
        let agree = b.is_some_and(|b| b <= bound + 1e-12 && bound - b < resolution);
        let shown = b.map_or("-".to_owned(), |b| format!("{b:.4}"));
        let _ = writeln!(table, "{n:>4} {shown:>12} {bound:>12.4} {:>6}", if agree { "yes" } else { "no" });
        boundary.push(json!({ "N": n, "boundary": b, "bound": bound, "agree": agree }));
    }
    if let Some(path) = &out {
        let _ = writeln!(table, "wrote {}", path.display());
    }
    Ok(Outcome {
        inputs: json!({ "n_min": n_min, "n_max": n_max, "steps": steps }),
        results: json!({ "scan_schema_version": SCAN_SCHEMA_VERSION, "rows": to_value(&rows), "boundary": boundary }),
        table,
        csv: Some(csv),
        failure: None,
    })
}

struct ProveArgs {
    builder: Option<String>,
    scenario: Option<PathBuf>,
    phi: Option<String>,
    psi: Option<String>,
    variant: Variant,
    zero_state: Option<String>,
    measurement: Option<String>,
    axioms: Option<Vec<Axiom>>,
    search: Option<usize>,
    indifference: ModeArg,
    no_overlap: bool,
    budget: u64,
    trace_out: Option<PathBuf>,
    witness_out: Option<PathBuf>,
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json serializes") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn cmd_prove(a: ProveArgs, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (inst, source) = load_instance(&a.builder, &a.scenario, tol)?;
    let phi = a.phi.clone().unwrap_or(inst.phi.clone());
    let psi = a.psi.clone().unwrap_or(inst.psi.clone());
    let mut request = DerivationRequest::new(&phi, &psi);
    request.measurement = a.measurement.clone();
    if a.variant == Variant::Restricted {
        let z = a.zero_state.clone().or(inst.zero_state.clone()).unwrap_or_else(|| "zero".into());
        request = request.restricted(&z);
    }
    let axioms: Vec<Axiom> = a.axioms.clone().unwrap_or_else(|| Axiom::ALL.to_vec());
    let mode = match a.indifference {
        ModeArg::Pointwise => IndifferenceMode::Pointwise,
        ModeArg::SetPreserving => IndifferenceMode::SetPreservingOnly,
    };
    let inputs = json!({
        "source": source,
        "phi": phi,
        "psi": psi,
        "variant": a.variant,
        "zero_state": request.zero_state,
        "measurement": a.measurement,
        "axioms": axioms,
        "search": a.search,
        "indifference": mode,
        "overlap_required": !a.no_overlap,
        "budget": a.budget,
    });
    let mut table = String::new();
    let mut results = serde_json::Map::new();
    let mut failure = None;

    let trace_ok = match derive_nonoverlap(&inst.scenario, &request, tol) {
        Ok(trace) => {
            let verdict = check_trace(&trace, &inst.scenario, tol).map_err(config_err)?;
            let _ = writeln!(table, "trace ({} steps, {:?} variant):", trace.steps.len(), trace.variant);
            for (i, s) in trace.steps.iter().enumerate() {
                let refs = if s.refs.is_empty() { String::new() } else { format!(" {:?}", s.refs) };
                let _ = writeln!(table, "  {i:>3}. {}    [{:?}{refs}]", s.assertion, s.rule);
            }
            let _ = writeln!(table, "  ∴ {}", trace.conclusion);
            let trace_value = to_value(&trace);
            if let Some(path) = &a.trace_out {
                write_json(path, &trace_value)?;
            }
            results.insert("trace".into(), trace_value);
            match verdict {
                Ok(_) => {
                    let _ = writeln!(table, "check: ok");
                    results.insert("trace_check".into(), json!("ok"));
                    true
                }
                Err(f) => {
                    let _ = writeln!(table, "check: REJECTED at {f}");
                    results.insert("trace_check".into(), to_value(&f));
                    failure = Some(CliError::Disagreement(format!("derived trace rejected: {f}")));
                    false
                }
            }
        }
        Err(NogoError::ConditionNotMet { outcome }) => {
            let msg = format!("the either-or condition fails for outcome `{outcome}`; no trace");
            let _ = writeln!(table, "{msg}");
            results.insert("trace_check".into(), json!({ "condition_not_met": outcome }));
            failure = Some(CliError::Infeasible(msg));
            false
        }
        Err(NogoError::Internal(f)) => return Err(CliError::Disagreement(format!("derivation failed its own check: {f}"))),
        Err(e) => return Err(config_err(e)),
    };

    if let Some(k) = a.search {
        let problem = FeasibilityProblem::new(inst.scenario.clone(), &phi, &psi, k)
            .with_axioms(axioms.iter().copied())
            .overlap_required(!a.no_overlap)
            .mode(mode)
            .budget(a.budget);
        let outcome = feasibility_search(&problem, tol).map_err(config_err)?;
        let strong = problem.axioms.contains(&Axiom::OnticIndifference)
            && mode == IndifferenceMode::Pointwise
            && problem.require_overlap;
        match outcome {
            SearchOutcome::Sat(sat) => {
                let check = check_witness(&problem, &sat.witness, tol).map_err(config_err)?;
                let _ = writeln!(
                    table,
                    "search (K ≤ {k}): Sat with {} states after {} nodes; witness {}",
                    sat.states,
                    sat.explored,
                    if check.classification.is_epistemic() { "ψ-epistemic" } else { "ψ-ontic" }
                );
                for (m, p) in &check.indifference_violations {
                    let _ = writeln!(table, "  indifference violated: `{m}` on `{p}`");
                }
                let doc = to_value(&sat.witness.to_doc());
                if let Some(path) = &a.witness_out {
                    write_json(path, &doc)?;
                    let _ = writeln!(table, "  witness written to {}", path.display());
                }
                if !check.completeness_violations.is_empty() {
                    failure = Some(CliError::Disagreement("search witness is not possibilistically complete".into()));
                }
                if trace_ok && strong {
                    failure = Some(CliError::Disagreement(
                        "trace checks but the search found an overlapping model".into(),
                    ));
                }
                results.insert(
                    "search".into(),
                    json!({
                        "verdict": "sat",
                        "K": k,
                        "states": sat.states,
                        "explored": sat.explored,
                        "notes": sat.notes,
                        "witness_check": to_value(&check),
                        "witness": doc,
                    }),
                );
            }
            SearchOutcome::Unsat(u) => {
                let _ = writeln!(table, "search (K ≤ {k}): Unsat after {} nodes", u.explored);
                for l in &u.lemmas {
                    let _ = writeln!(table, "  {} × {}", l.fired, l.lemma);
                }
                for n in &u.notes {
                    let _ = writeln!(table, "  note: {n}");
                }
                let mut v = to_value(&u);
                v["verdict"] = json!("unsat");
                v["K"] = json!(k);
                results.insert("search".into(), v);
            }
        }
    }
    Ok(Outcome { inputs, results: Value::Object(results), table, csv: None, failure })
}

fn cmd_check_model(model: &Path, builder: &Option<String>, scenario: &Option<PathBuf>, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (text, digest) = read_file(model)?;
    let (m, embedded) = OntologicalModel::from_json_str(&text, tol).map_err(|e| CliError::Config(format!("{}: {e}", model.display())))?;
    let (inst, source) = match (builder, scenario, embedded) {
        (None, None, Some(v)) => (instance_from_value(v, "embedded scenario", tol)?, json!("embedded")),
        (b, s, _) => load_instance(b, s, tol)?,
    };
    let s = &inst.scenario;
    m.validate_against(s).map_err(config_err)?;
    let classification = classify_model(&m);
    let completeness = check_possibilistic_completeness(&m, s, tol).map_err(config_err)?;
    let mut table = format!("model {} ({} ontic states)\n", model.display(), m.space().size());
    let _ = writeln!(table, "classification: {}", match &classification {
        onticlab::ontology::Classification::PsiOntic => "ψ-ontic".to_owned(),
        onticlab::ontology::Classification::PsiEpistemic { first, second, overlap } =>
            format!("ψ-epistemic ({first} and {second} share {})", overlap.join(", ")),
    });
    if completeness.is_empty() {
        let _ = writeln!(table, "possibilistic completeness: ok");
    } else {
        let _ = writeln!(table, "possibilistic completeness: {} violations", completeness.len());
        for v in &completeness {
            let _ = writeln!(table, "  {}|{}@{} {}: {:?}", v.preparation, v.outcome, v.member, v.measurement, v.direction);
        }
    }
    let mut indifference = Vec::new();
    let _ = writeln!(table, "ontic indifference (member, preparation: pointwise / set-preserving):");
    for member in s.member_ids() {
        for prep in s.preparations().keys() {
            if !s.member_fixes(&member, prep, tol).map_err(config_err)? {
                continue;
            }
            let verdict = |mode| check_ontic_indifference(&m, s, &member, prep, mode, tol).map_err(config_err);
            let pointwise = verdict(IndifferenceMode::Pointwise)?;
            let set = verdict(IndifferenceMode::SetPreservingOnly)?;
            let show = |v: &IndifferenceVerdict| match v {
                IndifferenceVerdict::Ok => "ok".to_owned(),
                IndifferenceVerdict::Violation { lambda } => format!("Violation at {lambda}"),
            };
            let _ = writeln!(table, "  {member}, {prep}: {} / {}", show(&pointwise), show(&set));
            indifference.push(json!({
                "member": member,
                "preparation": prep,
                "pointwise": to_value(&pointwise),
                "set_preserving": to_value(&set),
            }));
        }
    }
    Ok(Outcome {
        inputs: json!({ "model_file": model.display().to_string(), "model_sha256": digest, "scenario": source }),
        results: json!({
            "classification": to_value(&classification),
            "completeness_violations": to_value(&completeness),
            "indifference": indifference,
        }),
        table,
        csv: None,
        failure: None,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let tol = load_tolerances(cli.config.as_deref())?;
    let (name, outcome) = match cli.command {
        Command::Mzi { figure, phase, alpha2 } => ("mzi", cmd_mzi(figure, phase, alpha2, &tol)?),
        Command::Construct { alpha2, n, restricted } => ("construct", cmd_construct(alpha2, n, restricted, cli.emit, &tol)?),
        Command::Scan { n_min, n_max, steps, out } => ("scan", cmd_scan(n_min, n_max, steps, out, &tol)?),
        Command::Prove {
            builder,
            scenario,
            phi,
            psi,
            variant,
            zero_state,
            measurement,
            axioms,
            search,
            indifference,
            no_overlap,
            budget,
            trace_out,
            witness_out,
        } => (
            "prove",
            cmd_prove(
                ProveArgs {
                    builder,
                    scenario,
                    phi,
                    psi,
                    variant,
                    zero_state,
                    measurement,
                    axioms,
                    search,
                    indifference,
                    no_overlap,
                    budget,
                    trace_out,
                    witness_out,
                },
                &tol,
            )?,
        ),
        Command::CheckModel { model, builder, scenario } => ("check-model", cmd_check_model(&model, &builder, &scenario, &tol)?),
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    match cli.emit {
        Emit::Table => print!("{}", outcome.table),
        Emit::Csv => match &outcome.csv {
            Some(csv) => print!("{csv}"),
            None => return Err(CliError::Config(format!("`{name}` has no CSV output"))),
        },
        Emit::Json => {
            let report = RunReport::new(name, outcome.inputs, tol, outcome.results, total_ms);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("onticlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
