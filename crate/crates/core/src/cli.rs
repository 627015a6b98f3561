//! Command-line front end: argument parsing, dispatch and report rendering.
//!
//! Reports are JSON objects with sorted keys and no timestamps, so the same
//! input and flags always produce byte-identical output. `run_hash` is the
//! SHA-256 of the report serialized without that field.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::ce::{build_ce, ce_first_page_check, CeBicomplex};
use crate::dgla::{cohomology, cohomology_lie, cohomology_morphism, DgLieAlgebra, DgModule, ValidationReport};
use crate::error::{Error, Result};
use crate::formality::{
    default_r_max, dgla_obstructions, formality_verdict, kaledin_class, linf_obstructions, minimal_model,
    transfer_criterion, FormalityInput, FormalityVerdict, ObstructionReport,
};
use crate::graded::GradedVectorSpace;
use crate::linf::{ce_linf, decalage, linf_first_page_check, LInfinityAlgebra, LInfinityMorphism, Taylor};
use crate::mc::{gauge_act, lattice_samples, lift_to_order, mc_check, quadraticity_check, TruncatedElement};
use crate::multilinear::Multilinear;
use crate::problem::{vector_spec, Problem, ProblemFile};
use crate::specseq::SpectralSequence;
use crate::linalg::SparseVec;

pub const ENGINE: &str = "ce-formality";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BOUNDS: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "ce-formality", version, about = "Exact spectral sequences, obstructions and formality certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Weight bound N on the arity of L∞ operations.
    #[arg(long, global = true, default_value_t = 5)]
    pub weight: usize,
    /// Number of columns l of the truncated Chevalley-Eilenberg complex.
    #[arg(long, global = true, default_value_t = 5)]
    pub columns: usize,
    /// Last page computed (ce-pages) or last obstruction d_r(e) (obstructions).
    #[arg(long, global = true)]
    pub max_page: Option<usize>,
    /// Truncation order m in t for the Kaledin class.
    #[arg(long, global = true, default_value_t = 2)]
    pub t_order: usize,
    /// Target order of t for mc-lift and quadraticity.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the axioms of the input and report the first failure with a witness.
    Validate { file: PathBuf },
    /// Cohomology of the underlying complex (and the induced bracket or map).
    Cohomology { file: PathBuf },
    /// Pages of the spectral sequence of the truncated CE complex.
    CePages { file: PathBuf },
    /// The Euler class in the second page.
    Euler { file: PathBuf },
    /// The sequence d_r(e) of formality obstructions.
    Obstructions { file: PathBuf },
    /// The transferred minimal L∞ structure on cohomology.
    MinimalModel { file: PathBuf },
    /// Formality verdict, with a witness or an explicit gauge certificate.
    Formality { file: PathBuf },
    /// Formality transfer along a morphism.
    Transfer { file: PathBuf },
    /// Higher derived brackets of an inner derivation.
    DerivedBrackets { file: PathBuf },
    /// The Kaledin class of the minimal model truncated in t.
    Kaledin { file: PathBuf },
    /// Maurer-Cartan equation of a truncated series, and an optional gauge action.
    McCheck { file: PathBuf },
    /// Lift a truncated MC element order by order, or report the obstruction class.
    McLift { file: PathBuf },
    /// Compare second-order liftability in L with all-order liftability in the formal model.
    Quadraticity { file: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Cohomology { .. } => "cohomology",
            Command::CePages { .. } => "ce-pages",
            Command::Euler { .. } => "euler",
            Command::Obstructions { .. } => "obstructions",
            Command::MinimalModel { .. } => "minimal-model",
            Command::Formality { .. } => "formality",
            Command::Transfer { .. } => "transfer",
            Command::DerivedBrackets { .. } => "derived-brackets",
            Command::Kaledin { .. } => "kaledin",
            Command::McCheck { .. } => "mc-check",
            Command::McLift { .. } => "mc-lift",
            Command::Quadraticity { .. } => "quadraticity",
        }
    }

    fn file(&self) -> &Path {
        match self {
            Command::Validate { file }
            | Command::Cohomology { file }
            | Command::CePages { file }
            | Command::Euler { file }
            | Command::Obstructions { file }
            | Command::MinimalModel { file }
            | Command::Formality { file }
            | Command::Transfer { file }
            | Command::DerivedBrackets { file }
            | Command::Kaledin { file }
            | Command::McCheck { file }
            | Command::McLift { file }
            | Command::Quadraticity { file } => file,
        }
    }
}

/// What the binary prints and returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    let path = cli.command.file();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return Outcome {
                code: EXIT_INVALID,
                stdout: String::new(),
                stderr: format!("cannot read {}: {e}\n", path.display()),
            }
        }
    };
    let mut report = Map::new();
    report.insert("engine".into(), json!({ "name": ENGINE, "version": VERSION }));
    report.insert("command".into(), json!(cli.command.name()));
    report.insert("bounds".into(), bounds(cli));
    let mut input = Map::new();
    input.insert("file".into(), json!(path.file_name().map(|f| f.to_string_lossy().into_owned())));
    input.insert("sha256".into(), json!(hex::encode(Sha256::digest(text.as_bytes()))));
    let parsed = ProblemFile::parse(&text);
    if let Ok(file) = &parsed {
        input.insert("kind".into(), json!(file.kind.name()));
        input.insert("name".into(), json!(file.name));
    }
    report.insert("input".into(), Value::Object(input));
    let result = parsed.and_then(|file| dispatch(cli, &file));
    let code = match result {
        Ok((code, value)) => {
            report.insert("status".into(), json!(if code == EXIT_OK { "ok" } else { "invalid" }));
            report.insert("result".into(), value);
            code
        }
        Err(e) => {
            let (status, code) = classify(&e);
            report.insert("status".into(), json!(status));
            report.insert("error".into(), error_json(&e));
            code
        }
    };
    report.insert("exit_code".into(), json!(code));
    let hash = hex::encode(Sha256::digest(serde_json::to_vec(&report).expect("reports serialize")));
    report.insert("run_hash".into(), json!(hash));
    let value = Value::Object(report);
    let stdout = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => render_text(&value),
    };
    Outcome { code, stdout, stderr: String::new() }
}

fn bounds(cli: &Cli) -> Value {
    let mut m = Map::new();
    let name = cli.command.name();
    let uses_columns = matches!(name, "ce-pages" | "euler" | "obstructions" | "formality" | "transfer" | "quadraticity");
    m.insert("weight".into(), json!(cli.weight));
    if uses_columns {
        m.insert("columns".into(), json!(cli.columns));
    }
    if matches!(name, "ce-pages" | "obstructions") {
        m.insert("max_page".into(), json!(cli.max_page));
    }
    if name == "kaledin" {
        m.insert("t_order".into(), json!(cli.t_order));
    }
    if matches!(name, "mc-lift" | "quadraticity") {
        m.insert("order".into(), json!(cli.order));
    }
    Value::Object(m)
}

pub fn classify(e: &Error) -> (&'static str, i32) {
    match e {
        Error::Invalid(_) | Error::Axiom { .. } | Error::Precondition(_) => ("invalid", EXIT_INVALID),
        Error::InsufficientBounds(_) => ("insufficient_bounds", EXIT_BOUNDS),
        Error::Consistency(_) | Error::Linalg(_) => ("internal_error", EXIT_INTERNAL),
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::Invalid(_) => "invalid_input",
        Error::Axiom { .. } => "axiom",
        Error::Precondition(_) => "precondition",
        Error::InsufficientBounds(_) => "insufficient_bounds",
        Error::Consistency(_) => "consistency",
        Error::Linalg(_) => "linear_algebra",
    };
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("message".into(), json!(e.to_string()));
    if let Error::Axiom { axiom, witness } = e {
        m.insert("axiom".into(), json!(axiom));
        m.insert("witness".into(), json!(witness));
    }
    Value::Object(m)
}

fn dispatch(cli: &Cli, file: &ProblemFile) -> Result<(i32, Value)> {
    let problem = file.build(cli.weight)?;
    if let Command::Validate { .. } = cli.command {
        return Ok(validate(&problem));
    }
    require_valid(&problem)?;
    let value = match &cli.command {
        Command::Validate { .. } => unreachable!("handled above"),
        Command::Cohomology { .. } => cohomology_cmd(&problem)?,
        Command::CePages { .. } => ce_pages(cli, &problem)?,
        Command::Euler { .. } => euler(cli, &problem)?,
        Command::Obstructions { .. } => obstructions(cli, &problem)?,
        Command::MinimalModel { .. } => minimal_model_cmd(cli, &problem)?,
        Command::Formality { .. } => formality(cli, &problem)?,
        Command::Transfer { .. } => transfer(cli, &problem, file.properties.m_formal)?,
        Command::DerivedBrackets { .. } => derived(&problem)?,
        Command::Kaledin { .. } => kaledin(cli, &problem)?,
        Command::McCheck { .. } => mc_check_cmd(&problem)?,
        Command::McLift { .. } => mc_lift_cmd(cli, &problem)?,
        Command::Quadraticity { .. } => quadraticity(cli, &problem)?,
    };
    Ok((EXIT_OK, value))
}

fn validation_json(name: &str, r: &ValidationReport) -> Value {
    json!({ "object": name, "passed": r.passed(), "checks": r.checks })
}

fn validations(problem: &Problem) -> Vec<(&'static str, ValidationReport)> {
    match problem {
        Problem::Dgla(l) => vec![("algebra", l.validate())],
        Problem::Linf(v) => vec![("algebra", v.validate())],
        Problem::Voronov(vd) => vec![("ambient", vd.ambient.validate()), ("algebra", vd.algebra.validate())],
        Problem::Morphism(f) => {
            vec![("source", f.source.validate()), ("target", f.target.validate()), ("morphism", f.validate())]
        }
        Problem::Mc(mc) => vec![("algebra", mc.algebra.validate())],
    }
}

fn validate(problem: &Problem) -> (i32, Value) {
    let reports = validations(problem);
    let passed = reports.iter().all(|(_, r)| r.passed());
    let first = reports
        .iter()
        .find_map(|(name, r)| r.first_failure().map(|f| json!({ "object": name, "axiom": f.axiom, "witness": f.witness, "residual": f.residual })));
    let value = json!({
        "passed": passed,
        "first_failure": first,
        "reports": reports.iter().map(|(n, r)| validation_json(n, r)).collect::<Vec<_>>(),
    });
    (if passed { EXIT_OK } else { EXIT_INVALID }, value)
}

fn require_valid(problem: &Problem) -> Result<()> {
    for (name, r) in validations(problem) {
        if let Some(f) = r.first_failure() {
            return Err(Error::Axiom {
                axiom: format!("{name}: {}", f.axiom),
                witness: f.witness.clone().unwrap_or_default(),
            });
        }
    }
    Ok(())
}

fn wrong_kind(what: &str) -> Error {
    Error::Invalid(format!("this command needs {what} input"))
}

fn as_dgla(problem: &Problem) -> Result<&DgLieAlgebra> {
    match problem {
        Problem::Dgla(l) => Ok(l),
        Problem::Mc(mc) => Ok(&mc.algebra),
        _ => Err(wrong_kind("a dgla")),
    }
}

/// The L∞[1] algebra behind the input: the décalage of a DG-Lie algebra or the
/// structure given directly.
fn as_linf(problem: &Problem, weight: usize) -> Result<LInfinityAlgebra> {
    match problem {
        Problem::Dgla(l) => Ok(decalage(l, weight)),
        Problem::Linf(v) => Ok(v.with_weight(weight)),
        Problem::Voronov(vd) => Ok(vd.algebra.with_weight(weight)),
        Problem::Mc(mc) => Ok(decalage(&mc.algebra, weight)),
        Problem::Morphism(_) => Err(wrong_kind("a dgla, linf or voronov")),
    }
}

fn space_json(sp: &GradedVectorSpace) -> Value {
    serde_json::to_value(sp.components()).expect("labels serialize")
}

fn vec_json(sp: &GradedVectorSpace, v: &SparseVec) -> Value {
    serde_json::to_value(vector_spec(sp, v)).expect("rationals serialize")
}

fn dims_json(dims: &std::collections::BTreeMap<i64, usize>) -> Value {
    serde_json::to_value(dims).expect("dims serialize")
}

fn multilinear_json(sp: &GradedVectorSpace, m: &Multilinear) -> Value {
    Value::Array(
        m.values()
            .iter()
            .map(|(t, v)| json!({ "inputs": t.iter().map(|&i| sp.label(i)).collect::<Vec<_>>(), "output": vec_json(sp, v) }))
            .collect(),
    )
}

fn taylor_json(sp: &GradedVectorSpace, t: &Taylor) -> Value {
    let mut m = Map::new();
    for (n, q) in t {
        if !q.is_zero() {
            m.insert(format!("{n}"), multilinear_json(sp, q));
        }
    }
    Value::Object(m)
}

fn morphism_json(f: &LInfinityMorphism) -> Value {
    let sp = f.source.space();
    let tp = f.target.space();
    let mut m = Map::new();
    for (n, c) in f.components() {
        let entries: Vec<Value> = c
            .values()
            .iter()
            .map(|(t, v)| json!({ "inputs": t.iter().map(|&i| sp.label(i)).collect::<Vec<_>>(), "output": vec_json(tp, v) }))
            .collect();
        if !entries.is_empty() {
            m.insert(format!("{n}"), Value::Array(entries));
        }
    }
    Value::Object(m)
}

fn series_json(sp: &GradedVectorSpace, x: &TruncatedElement) -> Value {
    json!({
        "order": x.order(),
        "coefficients": x.coefficients().iter().map(|c| vec_json(sp, c)).collect::<Vec<_>>(),
    })
}

fn pages_json(ss: &SpectralSequence) -> Value {
    Value::Array(
        ss.pages()
            .iter()
            .map(|page| {
                let cells: Vec<Value> = page.dims().iter().map(|(&(p, q), &d)| json!({ "p": p, "q": q, "dim": d })).collect();
                let diffs: Vec<Value> = page
                    .dims()
                    .keys()
                    .filter(|&&(p, q)| page.differential_rank(p, q) > 0)
                    .map(|&(p, q)| json!({ "from": [p, q], "rank": page.differential_rank(p, q) }))
                    .collect();
                json!({ "r": page.r, "cells": cells, "differentials": diffs })
            })
            .collect(),
    )
}

fn cohomology_cmd(problem: &Problem) -> Result<Value> {
    Ok(match problem {
        Problem::Dgla(_) | Problem::Mc(_) => {
            let l = as_dgla(problem)?;
            let (h, c) = cohomology_lie(l)?;
            c.verify()?;
            let reps: Map<String, Value> = (0..h.dim())
                .map(|i| (h.space().label(i).to_string(), vec_json(l.space(), c.inclusion.image(i))))
                .collect();
            json!({
                "dims": dims_json(&h.space().graded_dims()),
                "euler_characteristic": l.space().euler_characteristic(),
                "cohomology": crate::problem::AlgebraSpec::from_dgla(&h),
                "representatives": reps,
            })
        }
        Problem::Linf(_) | Problem::Voronov(_) => {
            let v = as_linf(problem, 1)?;
            let c = cohomology(&crate::linf::linear_complex(&v)?)?;
            json!({
                "dims": dims_json(&c.cohomology.graded_dims()),
                "space": space_json(&c.cohomology),
            })
        }
        Problem::Morphism(f) => {
            let hf = cohomology_morphism(f)?;
            let rank = hf.map.to_matrix().rank();
            json!({
                "source_dims": dims_json(&hf.source.space().graded_dims()),
                "target_dims": dims_json(&hf.target.space().graded_dims()),
                "rank": rank,
                "injective": rank == hf.source.dim(),
                "quasi_isomorphism": f.is_quasi_isomorphism()?,
            })
        }
    })
}

fn dgla_ce(problem: &Problem, columns: usize) -> Result<Option<(CeBicomplex, DgModule)>> {
    let module = match problem {
        Problem::Dgla(l) => DgModule::adjoint(l),
        Problem::Mc(mc) => DgModule::adjoint(&mc.algebra),
        Problem::Morphism(f) => DgModule::via_morphism(f)?,
        _ => return Ok(None),
    };
    Ok(Some((build_ce(&module, columns)?, module)))
}

fn ce_pages(cli: &Cli, problem: &Problem) -> Result<Value> {
    let l = cli.columns;
    if l == 0 {
        return Err(Error::InsufficientBounds("at least one column is needed".into()));
    }
    let r_max = cli.max_page.unwrap_or(l + 1);
    let (ss, complex, first_page) = match dgla_ce(problem, l)? {
        Some((ce, module)) => {
            ce.check_identities()?;
            let fp = ce_first_page_check(&module, l)?;
            let ss = SpectralSequence::compute(ce.filtered(), r_max)?;
            (ss, "CE(L, M)", serde_json::to_value(fp).expect("serializes"))
        }
        None => {
            let v = as_linf(problem, cli.weight)?;
            let ce = ce_linf(&LInfinityMorphism::identity(&v), l)?;
            linf_first_page_check(&ce)?;
            (SpectralSequence::compute(ce.filtered(), r_max)?, "CE(V, V)", json!({ "columns": l, "matches": true }))
        }
    };
    ss.check_invariants()?;
    let abutment = if r_max > l { Some(serde_json::to_value(ss.abutment_check()?).expect("serializes")) } else { None };
    let degeneration = (0..=r_max).find(|&k| ss.degenerates_at(k, None).degenerate);
    Ok(json!({
        "complex": complex,
        "dim": ss.complex().dim(),
        "pages": pages_json(&ss),
        "first_page": first_page,
        "degenerates_from_page": degeneration,
        "abutment": abutment,
        "cohomology": dims_json(&ss.complex().cohomology_dims()),
    }))
}

fn obstruction_report(cli: &Cli, problem: &Problem, r_max: usize) -> Result<ObstructionReport> {
    match problem {
        Problem::Dgla(l) => dgla_obstructions(l, cli.columns, r_max),
        Problem::Mc(mc) => dgla_obstructions(&mc.algebra, cli.columns, r_max),
        _ => linf_obstructions(&as_linf(problem, cli.weight)?, cli.columns, r_max),
    }
}

fn obstructions_json(r: &ObstructionReport) -> Value {
    json!({
        "grading": r.grading,
        "columns": r.columns,
        "r_max": r.r_max,
        "euler_cell": [r.euler.p, r.euler.q],
        "euler_class_zero": r.euler.is_zero(),
        "steps": r.steps.iter().map(|s| json!({
            "r": s.r,
            "cell": [s.cell.0, s.cell.1],
            "zero": s.is_zero(),
            "coordinates": s.coordinates,
        })).collect::<Vec<_>>(),
        "first_nonzero": r.first_nonzero().map(|s| json!({ "r": s.r, "cell": [s.cell.0, s.cell.1] })),
    })
}

fn euler(cli: &Cli, problem: &Problem) -> Result<Value> {
    let r = obstruction_report(cli, problem, 1)?;
    let e = &r.euler;
    Ok(json!({
        "grading": e.grading,
        "cell": [e.p, e.q],
        "zero": e.is_zero(),
        "coordinates": e.coordinates,
        "d1_vanishes": true,
    }))
}

fn obstructions(cli: &Cli, problem: &Problem) -> Result<Value> {
    let r_max = cli.max_page.unwrap_or_else(|| default_r_max(cli.columns));
    Ok(obstructions_json(&obstruction_report(cli, problem, r_max)?))
}

fn minimal_model_cmd(cli: &Cli, problem: &Problem) -> Result<Value> {
    let v = as_linf(problem, cli.weight)?;
    let mm = minimal_model(&v)?;
    let sp = mm.model.space();
    Ok(json!({
        "weight": mm.model.weight(),
        "space": space_json(sp),
        "dims": dims_json(&sp.graded_dims()),
        "operations": taylor_json(sp, mm.model.taylor()),
        "homotopy_abelian": mm.model.taylor().is_empty(),
        "projection_valid": mm.projection.validate().passed(),
        "inclusion_valid": mm.inclusion.validate().passed(),
    }))
}

fn formality(cli: &Cli, problem: &Problem) -> Result<Value> {
    let report = match problem {
        Problem::Dgla(l) => formality_verdict(FormalityInput::Dgla(l), cli.weight, cli.columns)?,
        Problem::Mc(mc) => formality_verdict(FormalityInput::Dgla(&mc.algebra), cli.weight, cli.columns)?,
        _ => {
            let v = as_linf(problem, cli.weight)?;
            formality_verdict(FormalityInput::Linf(&v), cli.weight, cli.columns)?
        }
    };
    let sp = report.minimal.model.space();
    let mut out = Map::new();
    out.insert("verdict".into(), json!(report.verdict.name()));
    out.insert("formal".into(), json!(report.verdict.is_formal()));
    match &report.verdict {
        FormalityVerdict::NotFormal { witness } => {
            out.insert(
                "witness".into(),
                json!({ "r": witness.r, "cell": [witness.cell.0, witness.cell.1], "coordinates": witness.coordinates }),
            );
            out.insert("unconditional".into(), json!(true));
        }
        FormalityVerdict::FormalUpTo { weight, columns, gauge } => {
            out.insert("up_to".into(), json!({ "weight": weight, "columns": columns }));
            out.insert("gauge".into(), morphism_json(gauge));
            out.insert("gauge_valid".into(), json!(gauge.validate().passed()));
            out.insert("formal_structure".into(), taylor_json(sp, report.gauge.reduced.taylor()));
        }
        FormalityVerdict::HomotopyAbelianUpTo { weight, columns } => {
            out.insert("up_to".into(), json!({ "weight": weight, "columns": columns }));
        }
    }
    out.insert("gauge_failure".into(), json!(report.gauge.failure.as_ref().map(|(i, _)| i)));
    out.insert("minimal_model".into(), json!({ "dims": dims_json(&sp.graded_dims()), "operations": taylor_json(sp, report.minimal.model.taylor()) }));
    out.insert("obstructions".into(), obstructions_json(&report.obstructions));
    Ok(Value::Object(out))
}

fn transfer(cli: &Cli, problem: &Problem, m_formal: Option<bool>) -> Result<Value> {
    let Problem::Morphism(f) = problem else {
        return Err(wrong_kind("a morphism"));
    };
    let report = transfer_criterion(f, cli.columns, m_formal, cli.weight)?;
    Ok(serde_json::to_value(report).expect("serializes"))
}

fn derived(problem: &Problem) -> Result<Value> {
    let Problem::Voronov(vd) = problem else {
        return Err(wrong_kind("a voronov"));
    };
    let sp = vd.algebra.space();
    Ok(json!({
        "space": space_json(sp),
        "weight": vd.algebra.weight(),
        "operations": taylor_json(sp, vd.algebra.taylor()),
        "relations_hold": vd.algebra.validate().passed(),
    }))
}

fn kaledin(cli: &Cli, problem: &Problem) -> Result<Value> {
    let v = as_linf(problem, cli.weight)?;
    let model = if v.is_minimal() { v } else { minimal_model(&v)?.model };
    let k = kaledin_class(&model, cli.t_order)?;
    let sp = model.space();
    Ok(json!({
        "order": k.order,
        "weight": k.weight,
        "identities": k.identities,
        "identities_hold": k.identities_hold(),
        "cohomology_dim": k.cohomology_dim,
        "class_coordinates": k.class_coordinates,
        "zero": k.is_zero(),
        "primitive": k.primitive.as_ref().map(|p| p.iter().map(|m| multilinear_json(sp, m)).collect::<Vec<_>>()),
    }))
}

fn mc_problem(problem: &Problem) -> Result<&crate::problem::McProblem> {
    match problem {
        Problem::Mc(mc) => Ok(mc),
        _ => Err(wrong_kind("an mc")),
    }
}

fn mc_check_cmd(problem: &Problem) -> Result<Value> {
    let mc = mc_problem(problem)?;
    let sp = mc.algebra.space();
    let r = mc_check(&mc.algebra, &mc.series)?;
    let mut out = Map::new();
    out.insert("series".into(), series_json(sp, &mc.series));
    out.insert("solution".into(), json!(r.is_solution()));
    out.insert("first_failure".into(), json!(r.first_failure()));
    out.insert("residuals".into(), Value::Array(r.residuals.iter().map(|c| vec_json(sp, c)).collect()));
    if let Some(a) = &mc.gauge {
        let y = gauge_act(&mc.algebra, a, &mc.series)?;
        let ry = mc_check(&mc.algebra, &y)?;
        out.insert("gauge".into(), series_json(sp, a));
        out.insert("gauge_image".into(), json!({ "series": series_json(sp, &y), "solution": ry.is_solution() }));
    }
    Ok(Value::Object(out))
}

fn mc_lift_cmd(cli: &Cli, problem: &Problem) -> Result<Value> {
    let mc = mc_problem(problem)?;
    let sp = mc.algebra.space();
    let target = cli.order.unwrap_or(mc.series.order() + 1);
    Ok(match lift_to_order(&mc.algebra, &mc.series, target)? {
        Ok(x) => json!({ "target_order": target, "lifted": true, "series": series_json(sp, &x) }),
        Err(ob) => json!({
            "target_order": target,
            "lifted": false,
            "obstructed_at": ob.target_order,
            "obstruction": vec_json(sp, &ob.obstruction),
            "class": ob.class.iter().map(|(i, c)| json!([i, c])).collect::<Vec<_>>(),
        }),
    })
}

fn quadraticity(cli: &Cli, problem: &Problem) -> Result<Value> {
    let l = as_dgla(problem)?;
    let cert = formality_verdict(FormalityInput::Dgla(l), cli.weight, cli.columns)?;
    if !cert.verdict.is_formal() {
        return Ok(json!({ "applicable": false, "verdict": cert.verdict.name() }));
    }
    let samples = lattice_samples(l, 1)?;
    let order = cli.order.unwrap_or(cli.weight);
    let r = quadraticity_check(l, &cert, &samples, order)?;
    Ok(json!({
        "applicable": true,
        "verdict": cert.verdict.name(),
        "max_order": r.max_order,
        "rows": r.rows,
        "images_coincide": r.images_coincide,
    }))
}

/// Indented `key: value` rendering of a report.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    text_into(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            Some(format!("[{}]", a.iter().map(|x| scalar(x).unwrap_or_default()).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn text_into(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        text_into(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        text_into(out, x, indent + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
