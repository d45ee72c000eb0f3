//! Normal forms `(∀^st x)(∃^st y)φ` and the calculus that produces them.

mod driver;
mod rules;

use std::fmt;

use thiserror::Error;

use crate::formula::{DefError, Formula, Quant};
use crate::kernel::Var;

pub use driver::{replay, to_normal_form, NormalizeOptions, Step, Trace};
pub(crate) use rules::seq_element;
pub use rules::{
    apply_hac, idealize, monotone_collapse, nf_implies, prefix_infinitesimal, weaken, ImplMode,
    Rule,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub uvars: Vec<Var>,
    pub evars: Vec<Var>,
    pub matrix: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NfError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("monotonicity of {0} is not declared")]
    MonotonicityUndeclared(String),
    #[error("not pure: {0}")]
    NotPure(String),
    #[error(transparent)]
    Definition(#[from] DefError),
    #[error("step {index} ({rule}) does not replay")]
    Replay { index: usize, rule: String },
}

impl NormalForm {
    pub fn new(uvars: Vec<Var>, evars: Vec<Var>, matrix: Formula) -> NormalForm {
        NormalForm {
            uvars,
            evars,
            matrix,
        }
    }

    pub fn internal(matrix: Formula) -> NormalForm {
        NormalForm {
            uvars: vec![],
            evars: vec![],
            matrix,
        }
    }

    pub fn to_formula(&self) -> Formula {
        Formula::quant_block(
            Quant::AllSt,
            &self.uvars,
            Formula::quant_block(Quant::ExSt, &self.evars, self.matrix.clone()),
        )
    }

    /// Alpha-equivalence of the formulas, block order significant.
    pub fn alpha_eq(&self, other: &NormalForm) -> bool {
        self.uvars.len() == other.uvars.len()
            && self.evars.len() == other.evars.len()
            && self.to_formula().alpha_eq(&other.to_formula())
    }

    /// Alpha-equivalence up to reordering inside each block.
    pub fn alpha_eq_unordered(&self, other: &NormalForm) -> bool {
        if self.uvars.len() != other.uvars.len() || self.evars.len() != other.evars.len() {
            return false;
        }
        let perms_u = permutations(other.uvars.len());
        let perms_e = permutations(other.evars.len());
        let me = self.to_formula();
        perms_u.iter().any(|pu| {
            perms_e.iter().any(|pe| {
                let nf = NormalForm {
                    uvars: pu.iter().map(|&i| other.uvars[i].clone()).collect(),
                    evars: pe.iter().map(|&i| other.evars[i].clone()).collect(),
                    matrix: other.matrix.clone(),
                };
                me.alpha_eq(&nf.to_formula())
            })
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// Split the leading standard blocks; `Err` carries the reason the
/// formula is not a normal form.
pub fn recognize(f: &Formula) -> Result<NormalForm, String> {
    let mut uvars = Vec::new();
    let mut evars = Vec::new();
    let mut cur = f;
    while let Formula::Quant(Quant::AllSt, x, body) = cur {
        uvars.push(x.clone());
        cur = body;
    }
    while let Formula::Quant(Quant::ExSt, x, body) = cur {
        evars.push(x.clone());
        cur = body;
    }
    if let Formula::Quant(Quant::AllSt, ..) = cur {
        return Err("existential before universal".into());
    }
    if !cur.is_internal() {
        return Err("matrix is not internal".into());
    }
    let mut seen = std::collections::BTreeSet::new();
    for v in uvars.iter().chain(&evars) {
        if !seen.insert(v.name.clone()) {
            return Err(format!("variable {} bound twice", v.name));
        }
    }
    Ok(NormalForm {
        uvars,
        evars,
        matrix: cur.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn recognize_examples() {
        let f = parse_formula(
            "(with ((f (-> R R))) (forall-st ((k N)) (exists-st ((N N)) (forall ((x R) (y R)) \
             (implies (atom near x y N) (atom near (app f x) (app f y) k))))))",
        )
        .unwrap();
        let nf = recognize(&f).unwrap();
        assert_eq!(nf.uvars.len(), 1);
        assert_eq!(nf.evars.len(), 1);
        let g = parse_formula("(=0 x y)").unwrap();
        assert_eq!(recognize(&g).unwrap(), NormalForm::internal(g));
        let h = parse_formula("(exists-st ((y N)) (forall-st ((x N)) (=0 x y)))").unwrap();
        assert_eq!(recognize(&h).unwrap_err(), "existential before universal");
        let s = parse_formula("(st z)").unwrap();
        assert!(recognize(&s).is_err());
    }

    #[test]
    fn unordered_comparison() {
        let a = recognize(
            &parse_formula("(forall-st ((x N) (y N)) (=0 x (app (prim add) y 1)))").unwrap(),
        )
        .unwrap();
        let b = recognize(
            &parse_formula("(forall-st ((y N) (x N)) (=0 x (app (prim add) y 1)))").unwrap(),
        )
        .unwrap();
        assert!(!a.alpha_eq(&b));
        assert!(a.alpha_eq_unordered(&b));
    }
}
