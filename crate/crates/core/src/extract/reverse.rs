use super::{ExtractError, ExtractionResult};
use crate::formula::{Formula, Quant};
use crate::kernel::term::Subst;
use crate::kernel::{typecheck, Env, FinType, Machine, Term, TypeEnv, Var};
use crate::normal_form::{to_normal_form, NormalForm, NormalizeOptions};
use crate::oracles::{verify_with, DomainSpec, FiniteStructure, OracleError, VerificationReport};

/// From closed terms `t_i` and an internal `φ` with `(∀x)(∃y_i∈t_i x)φ`,
/// the normal form `(∀^st x)(∃^st y)φ` and the reasons it follows.
/// A term may also return a single witness instead of a candidate list.
pub fn reverse_embed(
    terms: &[Term],
    matrix: &Formula,
    inputs: &[Var],
    slots: &[Var],
) -> Result<(NormalForm, Vec<String>), ExtractError> {
    if terms.len() != slots.len() {
        return Err(ExtractError::TypeMismatch(format!(
            "{} terms for {} witnesses",
            terms.len(),
            slots.len()
        )));
    }
    if !matrix.is_internal() {
        return Err(ExtractError::TypeMismatch("matrix is not internal".into()));
    }
    let tys: Vec<FinType> = inputs.iter().map(|v| v.ty.clone()).collect();
    let mut why = Vec::new();
    for (t, y) in terms.iter().zip(slots) {
        if let Some((name, _)) = t.free_vars().into_iter().next() {
            return Err(ExtractError::NotClosed(name.to_string()));
        }
        let got =
            typecheck(t, &TypeEnv::new()).map_err(|e| ExtractError::TypeMismatch(e.to_string()))?;
        let list = FinType::arrows(&tys, FinType::seq(y.ty.clone()));
        let single = FinType::arrows(&tys, y.ty.clone());
        why.push(format!("{t} is closed, hence standard"));
        if got == list {
            why.push(format!(
                "standard inputs give a standard list; every entry, {y} included, is standard"
            ));
        } else if got == single {
            why.push(format!("standard inputs give a standard value for {y}"));
        } else {
            return Err(ExtractError::TypeMismatch(format!(
                "term for {y} has type {got}"
            )));
        }
    }
    why.push("the matrix is unchanged, so the standard witnesses satisfy it".into());
    Ok((
        NormalForm::new(inputs.to_vec(), slots.to_vec(), matrix.clone()),
        why,
    ))
}

#[derive(Clone, Debug)]
pub struct RoundTrip {
    pub normal_form: NormalForm,
    pub justification: Vec<String>,
    /// Re-normalizing the embedded formula gives it back.
    pub idempotent: bool,
    /// Per input, the original normal form implies the re-normalized one.
    pub implied: VerificationReport,
}

/// `(∃^st y)φ` with the universals renamed to `inputs`.
fn instance(nf: &NormalForm, inputs: &[Var]) -> Result<Formula, ExtractError> {
    if nf.uvars.len() != inputs.len() || nf.uvars.iter().zip(inputs).any(|(u, x)| u.ty != x.ty) {
        return Err(ExtractError::TypeMismatch(format!(
            "{nf} does not range over the extraction inputs"
        )));
    }
    let sigma: Subst = nf
        .uvars
        .iter()
        .zip(inputs)
        .map(|(u, x)| (u.name.clone(), x.term()))
        .collect();
    Ok(Formula::quant_block(Quant::ExSt, &nf.evars, nf.matrix.clone()).subst(&sigma))
}

/// Reverse-embed an extraction, re-normalize, and check on every input of
/// `domain` that `original` implies the result. The structures used for an
/// input list the witness candidates first in the witness types.
pub fn round_trip(
    r: &ExtractionResult,
    original: &NormalForm,
    domain: &DomainSpec,
) -> Result<RoundTrip, ExtractError> {
    let (rev, justification) = reverse_embed(&r.witness, &r.matrix, &r.inputs, &r.slots)?;
    let (renorm, _) = to_normal_form(&rev.to_formula(), &NormalizeOptions::default())?;
    let idempotent = renorm.alpha_eq(&rev);
    let claim = Formula::quant_block(
        Quant::All,
        &r.inputs,
        Formula::implies(
            instance(original, &r.inputs)?,
            instance(&renorm, &r.inputs)?,
        ),
    );
    let args: Vec<Term> = r.inputs.iter().map(Var::term).collect();
    let augment = |env: &Env, s: &FiniteStructure| -> Result<FiniteStructure, OracleError> {
        let mut out = s.clone();
        for (t, y) in r.witness.iter().zip(&r.slots) {
            let mut m = Machine::new(&s.prims, s.fuel);
            let v = m.eval(&Term::apps(t.clone(), args.iter().cloned()), env)?;
            out = out.with_candidates(&y.ty, v.as_seq()?.to_vec())?;
        }
        Ok(out)
    };
    let implied =
        verify_with(&claim, domain, &augment).map_err(|e| ExtractError::Eval(e.to_string()))?;
    Ok(RoundTrip {
        normal_form: renorm,
        justification,
        idempotent,
        implied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term_str;

    #[test]
    fn identity_example() {
        let x = Var::nat("x");
        let y = Var::nat("y");
        let id = parse_term_str("(lam (x N) x)").unwrap();
        let (nf, why) = reverse_embed(&[id], &Formula::eq(x.term(), y.term()), &[x], &[y]).unwrap();
        assert_eq!(
            nf.to_string(),
            "(forall-st ((x N)) (exists-st ((y N)) (=0 x y)))"
        );
        assert!(!why.is_empty());
    }

    #[test]
    fn open_term_rejected() {
        let x = Var::nat("x");
        let t = Term::lam(x.clone(), Term::var("z", FinType::nat()));
        let err = reverse_embed(
            &[t],
            &Formula::eq(x.term(), x.term()),
            std::slice::from_ref(&x),
            &[Var::nat("y")],
        );
        assert!(matches!(err, Err(ExtractError::NotClosed(_))));
    }
}
