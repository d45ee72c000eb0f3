//! Term extraction: run a pipeline script, thread realizer terms through the
//! normalization steps and package the witness with its contract.

mod pipeline;
mod reverse;
mod script;
mod select;

use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::{print_closed, Formula};
use crate::kernel::{Term, Var};
use crate::normal_form::{NfError, NormalForm, Step, Trace};
use crate::oracles::DomainSpec;
use crate::sexpr::ParseError;

pub use pipeline::{run_pipeline, shape_of, Shape};
pub use reverse::{reverse_embed, round_trip, RoundTrip};
pub use script::{
    expand_combinators, parse_script, term_over, Occurrence, PipelineScript, ScriptStep,
};
pub use select::{select_by_comparison, selection};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Normalize(#[from] NfError),
    #[error("step {step}: {detail}")]
    ReplayFailure { step: usize, detail: String },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("no candidate passes the comparison")]
    NoCandidate,
    #[error("witness term is not closed: free {0}")]
    NotClosed(String),
    #[error("evaluation: {0}")]
    Eval(String),
}

/// One entry of the extraction log.
#[derive(Clone, Debug, PartialEq)]
pub enum Event {
    Rule(Step),
    Realize { terms: Vec<Term> },
    Select { evar: String, body: Term },
}

impl Event {
    pub fn to_json(&self) -> Value {
        match self {
            Event::Rule(s) => s.to_json(),
            Event::Realize { terms } => json!({
                "rule": "realize",
                "terms": terms.iter().map(Term::to_string).collect::<Vec<_>>(),
            }),
            Event::Select { evar, body } => {
                json!({"rule": "select", "evar": evar, "body": body.to_string()})
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExtractionResult {
    pub name: String,
    /// Standard universals of the final normal form.
    pub inputs: Vec<Var>,
    /// Standard existentials of the final normal form.
    pub slots: Vec<Var>,
    /// One closed term per slot, mapping the inputs to a finite list of candidates.
    pub witness: Vec<Term>,
    pub matrix: Formula,
    pub normal_form: NormalForm,
    /// `(∀x)(∃y1∈t1 x)...φ`, free only in the script's parameters.
    pub contract: Formula,
    pub events: Vec<Event>,
    /// The rule steps alone, replayable.
    pub trace: Trace,
    pub domain: DomainSpec,
    pub reverse: DomainSpec,
}

impl ExtractionResult {
    pub fn witness_json(&self) -> Value {
        match self.witness.as_slice() {
            [t] => Value::String(t.to_string()),
            ts => Value::Array(ts.iter().map(|t| Value::String(t.to_string())).collect()),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "witness": self.witness_json(),
            "contract": print_closed(&self.contract),
            "inputs": self.inputs.iter().map(|v| format!("{} : {}", v, v.ty)).collect::<Vec<_>>(),
            "slots": self.slots.iter().map(|v| format!("{} : {}", v, v.ty)).collect::<Vec<_>>(),
            "normal_form": print_closed(&self.normal_form.to_formula()),
            "trace": self.events.iter().map(Event::to_json).collect::<Vec<_>>(),
            "domain": self.domain.items(),
        })
    }
}
