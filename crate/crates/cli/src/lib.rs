//! Command-line front end: argument handling, command dispatch and the JSON report.

pub mod parse;

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand};
use genquad::paperlab::{self, PaperlabError};
use genquad::{
    decompose, generalized_delta, indecomposables_up_to, represent_bounded, represent_definite,
    universality_report, AnalysisError, FieldContext, FieldElement, FieldError, GeneralizedForm, SearchError,
    SearchVerdict, Strategy,
};
use serde::Serialize;
use serde_json::{json, Value};

pub use parse::{parse_element, parse_form, ParseError, ParseErrorKind};

#[derive(Parser, Debug)]
#[command(name = "genquad", version, about = "Generalized quadratic forms over real quadratic fields")]
pub struct Cli {
    /// Worker threads for per-target searches
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub parallel: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArg {
    /// Squarefree D > 1; the field is Q(sqrt(D))
    #[arg(long = "d")]
    pub d: i64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Definiteness of the associated quadratic form
    Classify {
        #[command(flatten)]
        field: FieldArg,
        form: String,
    },
    /// Rational lower bound on the smallest eigenvalue of a definite form
    Delta {
        #[command(flatten)]
        field: FieldArg,
        form: String,
    },
    /// Decide whether the form represents a target
    Represent {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        target: String,
        /// Bounded search up to this coordinate height instead of the complete search
        #[arg(long)]
        height: Option<u64>,
        form: String,
    },
    /// Check every totally positive integer up to a trace bound
    Universal {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        trace_bound: u64,
        #[arg(long)]
        height: Option<u64>,
        form: String,
    },
    /// Indecomposable totally positive integers up to a trace bound
    Indecomposables {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        trace_bound: u64,
    },
    /// Split a totally positive integer into indecomposables
    Decompose {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        target: String,
    },
    /// Subform extraction and the semidefinite counterexample
    #[command(subcommand)]
    Paper(PaperCommand),
}

#[derive(Subcommand, Debug)]
pub enum PaperCommand {
    /// Verify the semidefinite counterexample over Q(sqrt2)
    Counterexample {
        #[arg(long)]
        trace_bound: u64,
    },
    /// Extract a universal quadratic subform from a definite generalized form
    Theorem {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        trace_bound: u64,
        form: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ParseError,
    PreconditionViolation,
    ContractFailure,
    BudgetExhausted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ParseError => 2,
            Status::PreconditionViolation => 3,
            Status::ContractFailure => 4,
            Status::BudgetExhausted => 5,
        }
    }
}

/// The single document printed on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// One-line human summary for stderr.
    #[serde(skip)]
    pub summary: String,
}

impl CommandReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

#[derive(Debug)]
struct Failure {
    status: Status,
    message: String,
}

impl Failure {
    fn new(status: Status, message: impl ToString) -> Failure {
        Failure {
            status,
            message: message.to_string(),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure::new(Status::ParseError, e)
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Failure {
        let status = match e {
            FieldError::UnitBudgetExhausted(_) => Status::BudgetExhausted,
            _ => Status::PreconditionViolation,
        };
        Failure::new(status, e)
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Failure {
        let status = match e {
            AnalysisError::DeltaNotFound => Status::BudgetExhausted,
            _ => Status::PreconditionViolation,
        };
        Failure::new(status, e)
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Failure {
        let status = match e {
            SearchError::CertificateMismatch => Status::ContractFailure,
            _ => Status::PreconditionViolation,
        };
        Failure::new(status, e)
    }
}

impl From<PaperlabError> for Failure {
    fn from(e: PaperlabError) -> Failure {
        match e {
            PaperlabError::Search(s) => s.into(),
            PaperlabError::Analysis(a) => a.into(),
            e if e.is_contract_failure() => Failure::new(Status::ContractFailure, e),
            e => Failure::new(Status::PreconditionViolation, e),
        }
    }
}

struct Outcome {
    result: Value,
    summary: String,
}

fn strings<'a>(xs: impl IntoIterator<Item = &'a FieldElement>) -> Vec<String> {
    xs.into_iter().map(ToString::to_string).collect()
}

fn one_based(vars: impl IntoIterator<Item = usize>) -> Vec<usize> {
    vars.into_iter().map(|v| v + 1).collect()
}

fn verdict_json(v: &SearchVerdict) -> Value {
    match v {
        SearchVerdict::Found { witness } => json!({
            "tag": "found",
            "assignment": strings(&witness.assignment),
            "value": witness.value.to_string(),
        }),
        other => serde_json::to_value(other).expect("verdicts serialize"),
    }
}

fn field(d: i64) -> Result<FieldContext, Failure> {
    Ok(FieldContext::new(d)?)
}

fn form(text: &str, ctx: &FieldContext) -> Result<GeneralizedForm, Failure> {
    Ok(parse_form(text, ctx)?)
}

fn classify(d: i64, text: &str) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let g = form(text, &ctx)?;
    let assoc = g.associated_form();
    let class = g.classify();
    Ok(Outcome {
        result: json!({
            "form": g.to_string(),
            "definiteness": class,
            "proper_variables": one_based(g.proper_variables()),
            "associated_columns": assoc.columns.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "associated_form": assoc.q.to_string(),
        }),
        summary: format!("{g}: {class}"),
    })
}

fn delta(d: i64, text: &str) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let g = form(text, &ctx)?;
    let cert = generalized_delta(&g)?;
    Ok(Outcome {
        result: json!({ "form": g.to_string(), "certificate": cert }),
        summary: format!("delta = {} after {} bisection steps", cert.delta, cert.iterations),
    })
}

fn represent(d: i64, text: &str, target: &str, height: Option<u64>) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let g = form(text, &ctx)?;
    let alpha = parse_element(target, &ctx)?;
    let verdict = match height {
        Some(h) => represent_bounded(&g, &alpha, h)?,
        None => {
            let cert = generalized_delta(&g)?;
            represent_definite(&g, &alpha, &cert)?
        }
    };
    let summary = match verdict.witness() {
        Some(w) => format!("{alpha} = G({})", strings(&w.assignment).join(", ")),
        None => format!("{alpha} is not represented ({})", verdict_json(&verdict)["tag"]),
    };
    Ok(Outcome {
        result: json!({
            "form": g.to_string(),
            "target": alpha.to_string(),
            "represented": verdict.is_found(),
            "verdict": verdict_json(&verdict),
        }),
        summary,
    })
}

fn universal(d: i64, text: &str, trace_bound: u64, height: Option<u64>) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let g = form(text, &ctx)?;
    let report = match height {
        Some(h) => universality_report(&ctx, &g, trace_bound, Strategy::Bounded(h))?,
        None => {
            let cert = generalized_delta(&g)?;
            universality_report(&ctx, &g, trace_bound, Strategy::Definite(&cert))?
        }
    };
    Ok(Outcome {
        result: json!({
            "form": g.to_string(),
            "trace_bound": report.trace_bound,
            "checked": report.checked,
            "universal_up_to_bound": report.is_universal_up_to_bound(),
            "failures": report.failures.iter().map(|(a, v)| json!({
                "target": a.to_string(),
                "verdict": v,
            })).collect::<Vec<_>>(),
        }),
        summary: format!(
            "{} targets up to trace {}, {} not represented",
            report.checked,
            report.trace_bound,
            report.failures.len()
        ),
    })
}

fn indecomposables(d: i64, trace_bound: u64) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let listing = indecomposables_up_to(&ctx, trace_bound);
    Ok(Outcome {
        result: json!({
            "trace_bound": trace_bound,
            "count": listing.elements.len(),
            "elements": strings(&listing.elements),
        }),
        summary: format!("{} indecomposables up to trace {trace_bound}", listing.elements.len()),
    })
}

fn decomposition(d: i64, target: &str) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let alpha = parse_element(target, &ctx)?;
    let parts = decompose(&ctx, &alpha)?;
    Ok(Outcome {
        result: json!({ "target": alpha.to_string(), "parts": strings(&parts) }),
        summary: format!("{alpha} = {}", strings(&parts).join(" + ")),
    })
}

fn counterexample(trace_bound: u64) -> Result<Outcome, Failure> {
    let report = paperlab::verify_counterexample(trace_bound)?;
    let failing = report.subform_checks.iter().filter(|c| !c.verdict.is_found()).count();
    let subforms: Vec<Value> = report
        .subform_checks
        .iter()
        .map(|c| json!({ "kept": one_based(c.kept.iter().copied()), "verdict": c.verdict }))
        .collect();
    let summary = format!(
        "{} targets represented by G up to trace {trace_bound} ({} through H); {failing}/{} subforms of S miss {}",
        report.targets.len(),
        report.via_h(),
        report.subform_checks.len(),
        report.subform_target
    );
    Ok(Outcome {
        result: json!({
            "trace_bound": report.trace_bound,
            "classify_g": report.classify_g,
            "classify_s": report.classify_s,
            "proper_variables": one_based(report.proper_variables.iter().copied()),
            "targets": report.targets.len(),
            "represented_via_s": report.targets.len() - report.via_h(),
            "represented_via_h": report.via_h(),
            "cross_checked": report.cross_checked,
            "cross_found": report.cross_found,
            "subform_target": report.subform_target.to_string(),
            "subforms_failing": failing,
            "subform_checks": subforms,
        }),
        summary,
    })
}

fn theorem(d: i64, text: &str, trace_bound: u64) -> Result<Outcome, Failure> {
    let ctx = field(d)?;
    let g = form(text, &ctx)?;
    let out = paperlab::theorem_pipeline(&ctx, &g, trace_bound)?;
    let samples: Vec<Value> = out
        .per_target
        .iter()
        .take(10)
        .map(|c| {
            json!({
                "alpha": c.alpha.to_string(),
                "n": c.n,
                "beta": c.beta.to_string(),
                "alpha_witness": strings(&c.alpha_witness),
            })
        })
        .collect();
    Ok(Outcome {
        result: json!({
            "form": g.to_string(),
            "subform": out.subform_generalized.to_string(),
            "kept": one_based(out.kept.iter().copied()),
            "delta": out.delta,
            "verified_to": out.verified_to,
            "certified": out.per_target.len(),
            "all_certified": out.all_certified(),
            "unrepresented": strings(&out.unrepresented),
            "sample_certificates": samples,
        }),
        summary: format!(
            "subform {} certified on {} targets up to trace {}, {} unrepresented",
            out.subform_generalized,
            out.per_target.len(),
            out.verified_to,
            out.unrepresented.len()
        ),
    })
}

fn dispatch(command: &Command) -> (String, Value, Result<Outcome, Failure>) {
    match command {
        Command::Classify { field, form } => {
            ("classify".into(), json!({ "d": field.d, "form": form }), classify(field.d, form))
        }
        Command::Delta { field, form } => ("delta".into(), json!({ "d": field.d, "form": form }), delta(field.d, form)),
        Command::Represent {
            field,
            target,
            height,
            form,
        } => (
            "represent".into(),
            json!({ "d": field.d, "form": form, "target": target, "height": height }),
            represent(field.d, form, target, *height),
        ),
        Command::Universal {
            field,
            trace_bound,
            height,
            form,
        } => (
            "universal".into(),
            json!({ "d": field.d, "form": form, "trace_bound": trace_bound, "height": height }),
            universal(field.d, form, *trace_bound, *height),
        ),
        Command::Indecomposables { field, trace_bound } => (
            "indecomposables".into(),
            json!({ "d": field.d, "trace_bound": trace_bound }),
            indecomposables(field.d, *trace_bound),
        ),
        Command::Decompose { field, target } => (
            "decompose".into(),
            json!({ "d": field.d, "target": target }),
            decomposition(field.d, target),
        ),
        Command::Paper(PaperCommand::Counterexample { trace_bound }) => (
            "paper counterexample".into(),
            json!({ "d": 2, "trace_bound": trace_bound }),
            counterexample(*trace_bound),
        ),
        Command::Paper(PaperCommand::Theorem {
            field,
            trace_bound,
            form,
        }) => (
            "paper theorem".into(),
            json!({ "d": field.d, "form": form, "trace_bound": trace_bound }),
            theorem(field.d, form, *trace_bound),
        ),
    }
}

/// Runs an already parsed command line.
pub fn run(cli: &Cli) -> CommandReport {
    let threads = usize::try_from(cli.parallel).expect("bounded by the parser");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    let (command, inputs, outcome) = pool.install(|| dispatch(&cli.command));
    match outcome {
        Ok(o) => CommandReport {
            command,
            inputs,
            result: o.result,
            status: Status::Ok,
            exit_code: 0,
            error: None,
            summary: o.summary,
        },
        Err(f) => CommandReport {
            summary: format!("{command}: {}", f.message),
            command,
            inputs,
            result: Value::Null,
            status: f.status,
            exit_code: f.status.exit_code(),
            error: Some(f.message),
        },
    }
}

/// What `main` should do with a command line: print help text, or emit a report.
pub enum Invocation {
    Help { text: String, exit_code: i32 },
    Report(CommandReport),
}

/// Parses `argv` (including the program name) and runs it. Usage errors become
/// parse-error reports.
pub fn run_command<I, T>(argv: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => Invocation::Report(run(&cli)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp
            | clap::error::ErrorKind::DisplayVersion
            | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => Invocation::Help {
                text: e.render().to_string(),
                exit_code: if e.use_stderr() { Status::ParseError.exit_code() } else { 0 },
            },
            _ => {
                let message = e.render().to_string().trim_end().to_string();
                let first = message.lines().next().unwrap_or_default().to_string();
                Invocation::Report(CommandReport {
                    command: String::new(),
                    inputs: Value::Null,
                    result: Value::Null,
                    status: Status::ParseError,
                    exit_code: Status::ParseError.exit_code(),
                    error: Some(message),
                    summary: first,
                })
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_errors_map_to_exit_codes() {
        let x = FieldElement::from_int(2, 1);
        let contract = PaperlabError::ProperCoordinateNonzero {
            alpha: x.clone(),
            beta: x.clone(),
            witness: vec![x.clone()],
        };
        assert_eq!(Failure::from(contract).status.exit_code(), 4);
        let failed = PaperlabError::CounterexampleFailed {
            alpha: x.clone(),
            reason: "test".into(),
        };
        assert_eq!(Failure::from(failed).status.exit_code(), 4);
        assert_eq!(Failure::from(PaperlabError::NotIntegral).status.exit_code(), 3);
        assert_eq!(Failure::from(PaperlabError::Search(SearchError::Unbounded)).status.exit_code(), 3);
        assert_eq!(Failure::from(AnalysisError::DeltaNotFound).status.exit_code(), 5);
        assert_eq!(Failure::from(FieldError::UnitBudgetExhausted(10)).status.exit_code(), 5);
    }
}
