use thiserror::Error;

use super::eval::builtin_type;
use super::term::{Name, Term, Var};
use super::types::FinType;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type mismatch at {path}: expected {expected}, found {found}")]
    Mismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
}

/// Scoped variable environment; later entries shadow earlier ones.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: Vec<(Name, FinType)>,
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn from_vars<'a>(vars: impl IntoIterator<Item = &'a Var>) -> TypeEnv {
        let mut env = TypeEnv::new();
        for v in vars {
            env.push(v.name.clone(), v.ty.clone());
        }
        env
    }

    pub fn push(&mut self, name: Name, ty: FinType) {
        self.entries.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &Name) -> Option<&FinType> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

fn mismatch(path: &str, expected: impl ToString, found: impl ToString) -> TypeError {
    TypeError::Mismatch {
        path: if path.is_empty() {
            "/".into()
        } else {
            path.to_string()
        },
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// The unique type of `t` under `env`.
pub fn typecheck(t: &Term, env: &TypeEnv) -> Result<FinType, TypeError> {
    let mut env = env.clone();
    check(t, &mut env, &mut String::new())
}

/// Type of an open term, reading free variable types off their annotations.
pub fn infer_open(t: &Term) -> Result<FinType, TypeError> {
    let env = TypeEnv::from_vars(
        t.free_vars()
            .into_iter()
            .map(|(name, ty)| Var { name, ty })
            .collect::<Vec<_>>()
            .iter(),
    );
    typecheck(t, &env)
}

fn check(t: &Term, env: &mut TypeEnv, path: &mut String) -> Result<FinType, TypeError> {
    let at = |path: &mut String, seg: &str, env: &mut TypeEnv, sub: &Term| {
        let len = path.len();
        path.push('/');
        path.push_str(seg);
        let r = check(sub, env, path);
        path.truncate(len);
        r
    };
    match t {
        Term::Var(v) => match env.lookup(&v.name) {
            None => Err(TypeError::UnboundVariable(v.name.to_string())),
            Some(ty) if *ty != v.ty => Err(mismatch(path, ty, &v.ty)),
            Some(ty) => Ok(ty.clone()),
        },
        Term::Zero | Term::Num(_) => Ok(FinType::Base),
        Term::Succ(u) => {
            let ty = at(path, "succ", env, u)?;
            expect(path, &FinType::Base, &ty)?;
            Ok(FinType::Base)
        }
        Term::Lam(x, body) => {
            env.push(x.name.clone(), x.ty.clone());
            let r = at(path, "body", env, body);
            env.pop();
            Ok(FinType::arrow(x.ty.clone(), r?))
        }
        Term::App(f, a) => {
            let tf = at(path, "fn", env, f)?;
            let ta = at(path, "arg", env, a)?;
            match tf {
                FinType::Arrow(dom, cod) => {
                    expect(path, &dom, &ta)?;
                    Ok(*cod)
                }
                other => Err(mismatch(path, format!("(-> {ta} _)"), other)),
            }
        }
        Term::Rec {
            ty,
            base,
            step,
            index,
        } => {
            let tb = at(path, "base", env, base)?;
            expect(path, ty, &tb)?;
            let ts = at(path, "step", env, step)?;
            let want = FinType::arrow(FinType::Base, FinType::arrow(ty.clone(), ty.clone()));
            expect(path, &want, &ts)?;
            let ti = at(path, "index", env, index)?;
            expect(path, &FinType::Base, &ti)?;
            Ok(ty.clone())
        }
        Term::SeqLit { elem, items } => {
            for (i, it) in items.iter().enumerate() {
                let ti = at(path, &i.to_string(), env, it)?;
                expect(path, elem, &ti)?;
            }
            Ok(FinType::seq(elem.clone()))
        }
        Term::Len(s) => {
            let ts = at(path, "len", env, s)?;
            match ts {
                FinType::Seq(_) => Ok(FinType::Base),
                other => Err(mismatch(path, "(* _)", other)),
            }
        }
        Term::Idx(s, i) => {
            let ts = at(path, "seq", env, s)?;
            let ti = at(path, "index", env, i)?;
            expect(path, &FinType::Base, &ti)?;
            match ts {
                FinType::Seq(e) => Ok(*e),
                other => Err(mismatch(path, "(* _)", other)),
            }
        }
        Term::Cat(a, b) => {
            let ta = at(path, "left", env, a)?;
            let tb = at(path, "right", env, b)?;
            if !matches!(ta, FinType::Seq(_)) {
                return Err(mismatch(path, "(* _)", ta));
            }
            expect(path, &ta, &tb)?;
            Ok(ta)
        }
        Term::Prim { name, ty } => {
            if let Some(b) = builtin_type(name) {
                expect(path, &b, ty)?;
            }
            Ok(ty.clone())
        }
    }
}

fn expect(path: &str, want: &FinType, got: &FinType) -> Result<(), TypeError> {
    if want == got {
        Ok(())
    } else {
        Err(mismatch(path, want, got))
    }
}

/// Substitute `s` for `x` in `t` after checking that `s` has `x`'s type.
pub fn substitute(t: &Term, x: &Var, s: &Term) -> Result<Term, TypeError> {
    let ts = infer_open(s)?;
    if ts != x.ty {
        return Err(mismatch("/", &x.ty, ts));
    }
    Ok(t.subst1(&x.name, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> FinType {
        FinType::Base
    }

    #[test]
    fn base_constants() {
        assert_eq!(typecheck(&Term::Zero, &TypeEnv::new()).unwrap(), n());
    }

    #[test]
    fn recursor_typing() {
        let step = Term::lam(
            Var::nat("n"),
            Term::lam(Var::nat("m"), Term::succ(Var::nat("m").term())),
        );
        let t = Term::rec(n(), Term::Num(3), step, Term::Num(2));
        assert_eq!(typecheck(&t, &TypeEnv::new()).unwrap(), n());
        let bad = Term::rec(n(), Term::Num(3), Term::Zero, Term::Num(2));
        assert!(matches!(
            typecheck(&bad, &TypeEnv::new()),
            Err(TypeError::Mismatch { .. })
        ));
    }

    #[test]
    fn sequence_projection() {
        let s = Term::seq(n(), vec![Term::Zero, Term::succ(Term::Zero)]);
        assert_eq!(
            typecheck(&Term::idx(s, Term::Num(1)), &TypeEnv::new()).unwrap(),
            n()
        );
    }

    #[test]
    fn unbound_and_mismatch_paths() {
        let t = Term::app(Term::Zero, Term::Zero);
        match typecheck(&t, &TypeEnv::new()) {
            Err(TypeError::Mismatch { path, .. }) => assert_eq!(path, "/"),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            typecheck(&Term::var("q", n()), &TypeEnv::new()),
            Err(TypeError::UnboundVariable("q".into()))
        );
    }

    #[test]
    fn substitute_checks_type() {
        let x = Var::nat("x");
        let f = Term::lam(Var::nat("z"), Term::Zero);
        assert!(substitute(&x.term(), &x, &f).is_err());
        assert_eq!(substitute(&x.term(), &x, &Term::Zero).unwrap(), Term::Zero);
    }
}
