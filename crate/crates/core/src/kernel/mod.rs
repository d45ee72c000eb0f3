//! Finite types and Gödel-T terms.

pub mod combinators;
pub mod eval;
pub mod reals;
pub mod syntax;
pub mod term;
pub mod typecheck;
pub mod types;

pub use eval::{
    default_value, eval, eval_with, readback, Env, EvalError, Foreign, Machine, PrimTable, Value,
    DEFAULT_FUEL,
};
pub use syntax::{parse_term, parse_term_str, Scope};
pub use term::{Name, Term, Var};
pub use typecheck::{infer_open, substitute, typecheck, TypeEnv, TypeError};
pub use types::{parse_type, parse_type_str, FinType};
