//! Name resolution: surface trees to core terms with de Bruijn indices.
//! Binders shadow module constants; unbound names are reported with spans.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::surface::{SourceSpan, SurfaceDecl, SurfacePatternArg, SurfaceTerm};
use crate::syntax::{Binder, Declaration, Level, Pattern, PatternArg, Term};

#[derive(Clone, Debug)]
pub enum ResolveErrorKind {
    /// An identifier that is neither bound nor a known constant.
    Scope { name: String },
    /// A declaration name that already exists.
    Duplicate { name: String },
}

#[derive(Clone, Debug)]
pub struct ResolveError {
    pub kind: ResolveErrorKind,
    pub span: SourceSpan,
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ResolveErrorKind::Scope { name } => {
                write!(f, "{}: unbound identifier '{}'", self.span, name)
            }
            ResolveErrorKind::Duplicate { name } => {
                write!(f, "{}: duplicate declaration '{}'", self.span, name)
            }
        }
    }
}

impl std::error::Error for ResolveError {}

/// A resolved declaration together with the span of its name, for
/// diagnostics raised later by the checker.
#[derive(Clone, Debug)]
pub struct LocatedDeclaration {
    pub decl: Declaration,
    pub span: SourceSpan,
}

struct Scope<'a> {
    stack: Vec<String>,
    is_constant: &'a dyn Fn(&str) -> bool,
}

impl<'a> Scope<'a> {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.stack.iter().rev().position(|n| n == name)
    }
}

/// Resolves a single term against an ambient constant table. Binders from
/// `bound` (outermost first) are in scope.
pub fn resolve_term(
    term: &SurfaceTerm,
    bound: &[String],
    is_constant: &dyn Fn(&str) -> bool,
) -> Result<Term, ResolveError> {
    let mut scope = Scope {
        stack: bound.to_vec(),
        is_constant,
    };
    go(term, &mut scope)
}

fn go(term: &SurfaceTerm, scope: &mut Scope) -> Result<Term, ResolveError> {
    match term {
        SurfaceTerm::Ident(name, span) => {
            if let Some(idx) = scope.lookup(name) {
                Ok(Term::Var(idx))
            } else if (scope.is_constant)(name) {
                Ok(Term::Const(Arc::from(name.as_str())))
            } else {
                Err(ResolveError {
                    kind: ResolveErrorKind::Scope { name: name.clone() },
                    span: span.clone(),
                })
            }
        }
        SurfaceTerm::Universe(n, _) => Ok(Term::Universe(Level(*n))),
        SurfaceTerm::Pi {
            binder,
            domain,
            codomain,
            ..
        } => {
            let domain = go(domain, scope)?;
            scope.stack.push(binder.clone());
            let codomain = go(codomain, scope);
            scope.stack.pop();
            Ok(Term::Pi {
                binder: Binder::new(binder),
                domain: domain.rc(),
                codomain: codomain?.rc(),
            })
        }
        SurfaceTerm::Lam { binder, body, .. } => {
            scope.stack.push(binder.clone());
            let body = go(body, scope);
            scope.stack.pop();
            Ok(Term::Lam {
                binder: Binder::new(binder),
                body: body?.rc(),
            })
        }
        SurfaceTerm::App { fun, arg, .. } => Ok(Term::App {
            fun: go(fun, scope)?.rc(),
            arg: go(arg, scope)?.rc(),
        }),
        SurfaceTerm::Sigma {
            binder,
            first,
            second,
            ..
        } => {
            let first = go(first, scope)?;
            scope.stack.push(binder.clone());
            let second = go(second, scope);
            scope.stack.pop();
            Ok(Term::Sigma {
                binder: Binder::new(binder),
                first: first.rc(),
                second: second?.rc(),
            })
        }
        SurfaceTerm::Pair { fst, snd, .. } => Ok(Term::Pair {
            fst: go(fst, scope)?.rc(),
            snd: go(snd, scope)?.rc(),
        }),
        SurfaceTerm::Fst(inner, _) => Ok(Term::Fst(go(inner, scope)?.rc())),
        SurfaceTerm::Snd(inner, _) => Ok(Term::Snd(go(inner, scope)?.rc())),
        SurfaceTerm::IdType { ty, lhs, rhs, .. } => Ok(Term::IdType {
            ty: go(ty, scope)?.rc(),
            lhs: go(lhs, scope)?.rc(),
            rhs: go(rhs, scope)?.rc(),
        }),
        SurfaceTerm::Refl(inner, _) => Ok(Term::Refl(go(inner, scope)?.rc())),
        SurfaceTerm::J {
            motive_binders,
            motive,
            base_binder,
            base,
            lhs,
            rhs,
            proof,
            ..
        } => {
            let lhs = go(lhs, scope)?;
            let rhs = go(rhs, scope)?;
            let proof = go(proof, scope)?;
            scope.stack.push(motive_binders[0].clone());
            scope.stack.push(motive_binders[1].clone());
            scope.stack.push(motive_binders[2].clone());
            let motive = go(motive, scope);
            scope.stack.pop();
            scope.stack.pop();
            scope.stack.pop();
            scope.stack.push(base_binder.clone());
            let base = go(base, scope);
            scope.stack.pop();
            Ok(Term::J {
                motive_binders: [
                    Binder::new(&motive_binders[0]),
                    Binder::new(&motive_binders[1]),
                    Binder::new(&motive_binders[2]),
                ],
                motive: motive?.rc(),
                base_binder: Binder::new(base_binder),
                base: base?.rc(),
                lhs: lhs.rc(),
                rhs: rhs.rc(),
                proof: proof.rc(),
            })
        }
        SurfaceTerm::Unit(_) => Ok(Term::Unit),
        SurfaceTerm::Star(_) => Ok(Term::Star),
        SurfaceTerm::SharpTy(inner, _) => Ok(Term::SharpTy(go(inner, scope)?.rc())),
        SurfaceTerm::SharpIntro(inner, _) => Ok(Term::SharpIntro(go(inner, scope)?.rc())),
        SurfaceTerm::SharpElim(inner, _) => Ok(Term::SharpElim(go(inner, scope)?.rc())),
        SurfaceTerm::FlatTy(inner, _) => Ok(Term::FlatTy(go(inner, scope)?.rc())),
        SurfaceTerm::FlatIntro(inner, _) => Ok(Term::FlatIntro(go(inner, scope)?.rc())),
        SurfaceTerm::FlatLet {
            binder,
            motive_binder,
            motive,
            scrutinee,
            body,
            ..
        } => {
            let scrutinee = go(scrutinee, scope)?;
            scope.stack.push(motive_binder.clone());
            let motive = go(motive, scope);
            scope.stack.pop();
            scope.stack.push(binder.clone());
            let body = go(body, scope);
            scope.stack.pop();
            Ok(Term::FlatLet {
                binder: Binder::new(binder),
                motive_binder: Binder::new(motive_binder),
                motive: motive?.rc(),
                scrutinee: scrutinee.rc(),
                body: body?.rc(),
            })
        }
    }
}

/// Resolves a module's declarations in order. Earlier declarations of the
/// same module are in scope for later ones.
pub fn resolve(
    decls: &[SurfaceDecl],
    is_constant: &dyn Fn(&str) -> bool,
) -> Result<Vec<LocatedDeclaration>, ResolveError> {
    let mut out = Vec::new();
    let mut local: BTreeSet<String> = BTreeSet::new();
    let known = |local: &BTreeSet<String>, name: &str| -> bool {
        local.contains(name) || is_constant(name)
    };

    for decl in decls {
        let name = decl.name().to_string();
        if known(&local, &name) {
            return Err(ResolveError {
                kind: ResolveErrorKind::Duplicate { name },
                span: decl.name_span().clone(),
            });
        }
        let local_ref = &local;
        let lookup = move |n: &str| known(local_ref, n);
        let resolved = match decl {
            SurfaceDecl::Def { name, name_span, ty, body } => {
                let ty = resolve_term(ty, &[], &lookup)?;
                let body = resolve_term(body, &[], &lookup)?;
                LocatedDeclaration {
                    decl: Declaration::Def {
                        name: Arc::from(name.as_str()),
                        ty,
                        body,
                    },
                    span: name_span.clone(),
                }
            }
            SurfaceDecl::Postulate { name, name_span, ty } => {
                let ty = resolve_term(ty, &[], &lookup)?;
                LocatedDeclaration {
                    decl: Declaration::Postulate {
                        name: Arc::from(name.as_str()),
                        ty,
                    },
                    span: name_span.clone(),
                }
            }
            SurfaceDecl::Rewrite {
                name,
                name_span,
                head,
                head_span,
                args,
                rhs,
            } => {
                if !lookup(head) {
                    return Err(ResolveError {
                        kind: ResolveErrorKind::Scope { name: head.clone() },
                        span: head_span.clone(),
                    });
                }
                let mut pattern_args = Vec::new();
                let mut pattern_vars: Vec<String> = Vec::new();
                for arg in args {
                    match arg {
                        // A bare identifier that names a constant is a
                        // nullary constructor atom; anything else is a
                        // fresh pattern variable.
                        SurfacePatternArg::Var(v, _) if lookup(v) => {
                            pattern_args.push(PatternArg::Ctor {
                                head: Arc::from(v.as_str()),
                                vars: Vec::new(),
                            });
                        }
                        SurfacePatternArg::Var(v, _) => {
                            pattern_vars.push(v.clone());
                            pattern_args.push(PatternArg::Var(Arc::from(v.as_str())));
                        }
                        SurfacePatternArg::Ctor { head, head_span, vars } => {
                            if !lookup(head) {
                                return Err(ResolveError {
                                    kind: ResolveErrorKind::Scope { name: head.clone() },
                                    span: head_span.clone(),
                                });
                            }
                            let mut ctor_vars = Vec::new();
                            for (v, _) in vars {
                                pattern_vars.push(v.clone());
                                ctor_vars.push(Arc::from(v.as_str()) as Arc<str>);
                            }
                            pattern_args.push(PatternArg::Ctor {
                                head: Arc::from(head.as_str()),
                                vars: ctor_vars,
                            });
                        }
                    }
                }
                // The right-hand side sees the pattern variables as binders,
                // outermost first in order of first occurrence.
                let rhs = resolve_term(rhs, &pattern_vars, &lookup)?;
                LocatedDeclaration {
                    decl: Declaration::Rewrite {
                        name: Arc::from(name.as_str()),
                        lhs: Pattern {
                            head: Arc::from(head.as_str()),
                            args: pattern_args,
                        },
                        rhs,
                    },
                    span: name_span.clone(),
                }
            }
        };
        local.insert(name);
        out.push(resolved);
    }
    Ok(out)
}
