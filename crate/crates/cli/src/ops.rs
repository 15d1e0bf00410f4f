//! Operations shared by the command line and the HTTP service. Both front
//! ends serialize the values returned here, so their outputs coincide.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::json;

use stratcheck_core::bisim::{check_a_bisimulation, BisimOptions, CandidateRelation};
use stratcheck_core::model::{export_graph, ExportFormat};
use stratcheck_core::por::{build_reduced_model, C3Mode, ReducedModel, ReductionParams};
use stratcheck_core::spec_lang::{parse_formula, parse_relation, parse_spec, validate, SpecDocument, SpecError};
use stratcheck_core::verify::{self, Limits, Method, ResultRecord, VerifyError};
use stratcheck_core::{build_global_model, Amas, Formula, GlobalModel};

pub const EXIT_TRUE: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_INPUT: i32 = 64;
pub const EXIT_UNAVAILABLE: i32 = 69;

#[derive(Debug, thiserror::Error)]
pub enum OpError {
    /// Unreadable, malformed or inconsistent input.
    #[error("{0}")]
    Input(String),
    /// A state or strategy-space limit was hit.
    #[error("{0}")]
    Limit(String),
}

impl OpError {
    pub fn exit_code(&self) -> i32 {
        match self {
            OpError::Input(_) => EXIT_INPUT,
            OpError::Limit(_) => EXIT_LIMIT,
        }
    }

    fn spec(origin: &str, e: SpecError) -> Self {
        OpError::Input(format!("{origin}:{e}"))
    }
}

/// A validated model file with its full global model.
pub struct Loaded {
    pub doc: SpecDocument,
    pub amas: Arc<Amas>,
    pub model: GlobalModel,
}

/// `origin` prefixes diagnostics, e.g. the file name.
pub fn load(origin: &str, text: &str) -> Result<Loaded, OpError> {
    let doc = parse_spec(text).map_err(|e| OpError::spec(origin, e))?;
    let amas = Arc::new(validate(&doc).map_err(|e| OpError::spec(origin, e))?);
    let model = build_global_model(amas.clone()).map_err(|e| OpError::Limit(e.to_string()))?;
    Ok(Loaded { doc, amas, model })
}

pub fn parse_c3(s: &str) -> Result<C3Mode, OpError> {
    match s {
        "safe" => Ok(C3Mode::Safe),
        "aggressive" => Ok(C3Mode::Aggressive),
        _ => Err(OpError::Input(format!("unknown C3 mode {s:?} (expected safe or aggressive)"))),
    }
}

pub fn c3_name(c3: C3Mode) -> &'static str {
    match c3 {
        C3Mode::Safe => "safe",
        C3Mode::Aggressive => "aggressive",
    }
}

/// Splits `a,b` into names; an empty string is the empty list.
pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

impl Loaded {
    /// `text` overrides the formula of the file.
    pub fn formula(&self, text: Option<&str>) -> Result<Formula, OpError> {
        let ast = match text {
            Some(t) => parse_formula(t).map_err(|e| OpError::spec("formula", e))?,
            None => self
                .doc
                .formula
                .clone()
                .ok_or_else(|| OpError::Input("no formula: add a FORMULA line or pass --formula".into()))?,
        };
        self.amas.resolve_formula(&ast).map_err(|e| OpError::spec("formula", e))
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub method: Method,
    pub por: bool,
    pub c3: C3Mode,
    pub formula: Option<String>,
    /// `None` disables the deadline.
    pub timeout: Option<Duration>,
    pub timings: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            method: Method::Bruteforce,
            por: false,
            c3: C3Mode::Safe,
            formula: None,
            timeout: Some(Duration::from_secs(60)),
            timings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutput {
    Done(ResultRecord),
    TimedOut { formula: String, method: Method, model: String },
}

impl VerifyOutput {
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyOutput::Done(r) => match r.truth {
                verify::Truth::True => EXIT_TRUE,
                verify::Truth::False => EXIT_FALSE,
                verify::Truth::Inconclusive => EXIT_INCONCLUSIVE,
            },
            VerifyOutput::TimedOut { .. } => EXIT_TIMEOUT,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            VerifyOutput::Done(r) => serde_json::to_value(r).expect("record serializes"),
            VerifyOutput::TimedOut { formula, method, model } => json!({
                "formula": formula,
                "method": method,
                "model": model,
                "truth": "timeout",
                "strategy": null,
            }),
        }
    }

    /// One line of JSON.
    pub fn to_bytes(&self) -> Vec<u8> {
        json_line(&self.to_json())
    }
}

pub fn json_line<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec(v).expect("value serializes");
    out.push(b'\n');
    out
}

/// Verifies the file's formula, on the reduced model when `por` is set.
pub fn run_verify(loaded: &Loaded, opts: &VerifyOptions) -> Result<VerifyOutput, OpError> {
    let formula = loaded.formula(opts.formula.as_deref())?;
    let reduced;
    let (model, label) = if opts.por {
        let params = ReductionParams::for_formula(&loaded.amas, &formula, opts.c3);
        reduced = build_reduced_model(loaded.amas.clone(), &params).map_err(|e| OpError::Limit(e.to_string()))?;
        (&reduced.model, "reduced")
    } else {
        (&loaded.model, "full")
    };
    let limits = opts.timeout.map_or_else(Limits::default, Limits::with_timeout);
    match verify::verify(model, &formula, opts.method, limits) {
        Ok(r) => Ok(VerifyOutput::Done(r.record(model, &formula, label, opts.timings))),
        Err(VerifyError::Timeout) => Ok(VerifyOutput::TimedOut {
            formula: loaded.amas.display_formula(&formula),
            method: opts.method,
            model: label.into(),
        }),
        Err(e) => Err(OpError::Limit(e.to_string())),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Defaults to the file's coalition.
    pub coalition: Option<Vec<String>>,
    /// Defaults to the formula's propositions.
    pub props: Option<Vec<String>>,
    /// Defaults to aggressive, the proviso of the highlighted TGC submodel.
    pub c3: Option<C3Mode>,
}

pub struct Reduction {
    /// Full model with the reduced part flagged.
    pub full: GlobalModel,
    pub reduced: ReducedModel,
    pub params: ReductionParams,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionStats {
    pub coalition: Vec<String>,
    pub visible: Vec<String>,
    pub c3: &'static str,
    pub full_states: usize,
    pub full_edges: usize,
    pub reduced_states: usize,
    pub reduced_edges: usize,
    /// Reduced over full states.
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

pub fn reduction_params(loaded: &Loaded, opts: &ReduceOptions) -> Result<ReductionParams, OpError> {
    let amas = &loaded.amas;
    let coalition = match &opts.coalition {
        Some(names) => names.clone(),
        None => loaded.doc.effective_coalition(),
    };
    let coalition = amas.resolve_agents(&coalition).map_err(|e| OpError::spec("coalition", e))?;
    let visible = match &opts.props {
        Some(names) => amas.resolve_props(names).map_err(|e| OpError::spec("props", e))?,
        None => match &loaded.doc.formula {
            Some(ast) => amas
                .resolve_formula(ast)
                .map_err(|e| OpError::spec("formula", e))?
                .props(),
            None => Vec::new(),
        },
    };
    Ok(ReductionParams::new(amas, coalition, visible, opts.c3.unwrap_or(C3Mode::Aggressive)))
}

pub fn run_reduce(loaded: &Loaded, opts: &ReduceOptions) -> Result<Reduction, OpError> {
    let params = reduction_params(loaded, opts)?;
    let start = Instant::now();
    let reduced = build_reduced_model(loaded.amas.clone(), &params).map_err(|e| OpError::Limit(e.to_string()))?;
    let elapsed = start.elapsed();
    let mut full = loaded.model.clone();
    full.mark_reduced(&reduced.model);
    Ok(Reduction {
        full,
        reduced,
        params,
        elapsed,
    })
}

impl Reduction {
    /// `timings` adds the reduction's wall time.
    pub fn stats(&self, timings: bool) -> ReductionStats {
        let amas = self.full.amas();
        ReductionStats {
            coalition: self.params.coalition.iter().map(|a| amas.agents[a.0].name.clone()).collect(),
            visible: self.params.visible.iter().map(|p| amas.propositions[p.0].clone()).collect(),
            c3: c3_name(self.params.c3),
            full_states: self.full.num_states(),
            full_edges: self.full.num_edges(),
            reduced_states: self.reduced.model.num_states(),
            reduced_edges: self.reduced.model.num_edges(),
            ratio: self.reduced.model.num_states() as f64 / self.full.num_states() as f64,
            elapsed_ms: timings.then_some(self.elapsed.as_millis() as u64),
        }
    }

    pub fn summary_line(&self) -> String {
        let s = self.stats(false);
        format!(
            "full: {} states / {} edges; reduced: {} / {}",
            s.full_states, s.full_edges, s.reduced_states, s.reduced_edges
        )
    }

    /// Statistics plus the full graph with the reduced part flagged.
    pub fn to_bytes(&self, timings: bool) -> Vec<u8> {
        let graph = stratcheck_core::model::GraphExport::from_model(&self.full, true);
        json_line(&json!({ "statistics": self.stats(timings), "graph": graph }))
    }

    pub fn export(&self, format: ExportFormat) -> Vec<u8> {
        export_graph(&self.full, format, true)
    }
}

pub fn parse_format(s: &str) -> Result<ExportFormat, OpError> {
    match s {
        "dot" => Ok(ExportFormat::Dot),
        "json" => Ok(ExportFormat::Json),
        _ => Err(OpError::Input(format!("unknown format {s:?} (expected dot or json)"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisimOutput {
    pub ok: bool,
    pub verdict: serde_json::Value,
}

impl BisimOutput {
    pub fn exit_code(&self) -> i32 {
        if self.ok {
            EXIT_TRUE
        } else {
            EXIT_FALSE
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        json_line(&self.verdict)
    }
}

/// Each input is `(origin, text)`. `coalition` overrides the relation file's.
pub fn run_bisim(
    left: (&str, &str),
    right: (&str, &str),
    relation: (&str, &str),
    coalition: Option<&[String]>,
    strict: bool,
) -> Result<BisimOutput, OpError> {
    let l = load(left.0, left.1)?;
    let r = load(right.0, right.1)?;
    let spec = parse_relation(relation.1, &l.doc, &r.doc).map_err(|e| OpError::spec(relation.0, e))?;
    if coalition.is_none() && spec.coalition.is_empty() {
        return Err(OpError::Input(
            "no coalition: add a COALITION line to the relation file or pass --coalition".into(),
        ));
    }
    let rel = CandidateRelation::resolve(&l.model, &r.model, &spec, coalition)
        .map_err(|e| OpError::Input(format!("{}: {e}", relation.0)))?;
    let verdict = check_a_bisimulation(&l.model, &r.model, &rel, BisimOptions { strict });
    Ok(BisimOutput {
        ok: verdict.ok(),
        verdict: verdict.to_json(&l.model, &r.model),
    })
}
