//! Internal and external formulas over finite types.

pub mod ast;
pub mod classify;
pub mod defs;
pub mod syntax;

pub use ast::{Bounded, Formula, Quant};
pub use classify::{is_bounded_number_quantifier, relativize_st, ClassifyError};
pub use defs::{
    definition_normal_form, expand_definition, lookup, registry, DefError, DefinitionEntry,
};
pub use syntax::{parse_formula, parse_formula_sexp, parse_formula_with, print_closed, split_with};
