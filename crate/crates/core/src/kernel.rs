//! The typing judgments: bidirectional checking over polarity-flagged
//! telescopes, context promotion, the crispness side conditions on the
//! modal operators, declaration checking, and rewrite-rule admission.
//!
//! The two modalities are enforced as follows. Sharp formation and
//! introduction check their subterm under the promoted telescope (every
//! entry crisp). Sharp elimination demands a crisp subject. Flat formation
//! and introduction demand a crisp subterm *and* check it in the telescope
//! with cohesive entries removed, indices re-mapped; this matches the
//! empty-cohesive-zone premise of the flat rules and prevents any capture
//! of cohesive variables. Letflat binds the one and only crisp binder of
//! the term language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::equality::{EvalError, Normalizer, RValue, Value};
use crate::parser::{print_term_in, SourceSpan};
use crate::syntax::{
    free_vars, instantiate, shift, subst, Binder, Declaration, Entry, Level, Name, Pattern,
    Polarity, Telescope, Term,
};

/// Default reduction budget per conversion query.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Stable diagnostic codes. The negative corpus pins these exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticCode {
    ScopeError,
    TypeMismatch,
    NotAFunction,
    NotAPair,
    CrispnessViolation,
    FlatOnCohesiveType,
    SharpElimCohesive,
    UniverseError,
    MotiveMismatch,
    RewriteIllFormed,
    DuplicateName,
    FuelExhausted,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::ScopeError => "ScopeError",
            DiagnosticCode::TypeMismatch => "TypeMismatch",
            DiagnosticCode::NotAFunction => "NotAFunction",
            DiagnosticCode::NotAPair => "NotAPair",
            DiagnosticCode::CrispnessViolation => "CrispnessViolation",
            DiagnosticCode::FlatOnCohesiveType => "FlatOnCohesiveType",
            DiagnosticCode::SharpElimCohesive => "SharpElimCohesive",
            DiagnosticCode::UniverseError => "UniverseError",
            DiagnosticCode::MotiveMismatch => "MotiveMismatch",
            DiagnosticCode::RewriteIllFormed => "RewriteIllFormed",
            DiagnosticCode::DuplicateName => "DuplicateName",
            DiagnosticCode::FuelExhausted => "FuelExhausted",
        }
    }

    pub fn parse(s: &str) -> Option<DiagnosticCode> {
        Some(match s {
            "ScopeError" => DiagnosticCode::ScopeError,
            "TypeMismatch" => DiagnosticCode::TypeMismatch,
            "NotAFunction" => DiagnosticCode::NotAFunction,
            "NotAPair" => DiagnosticCode::NotAPair,
            "CrispnessViolation" => DiagnosticCode::CrispnessViolation,
            "FlatOnCohesiveType" => DiagnosticCode::FlatOnCohesiveType,
            "SharpElimCohesive" => DiagnosticCode::SharpElimCohesive,
            "UniverseError" => DiagnosticCode::UniverseError,
            "MotiveMismatch" => DiagnosticCode::MotiveMismatch,
            "RewriteIllFormed" => DiagnosticCode::RewriteIllFormed,
            "DuplicateName" => DiagnosticCode::DuplicateName,
            "FuelExhausted" => DiagnosticCode::FuelExhausted,
            _ => return None,
        })
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One telescope entry as rendered into a diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextEntry {
    pub name: String,
    pub ty: String,
    pub polarity: Polarity,
}

/// A structured checking error: stable code, message, optional source
/// span, and a dump of the telescope at the point of failure.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub context: Vec<ContextEntry>,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            span: None,
            context: Vec::new(),
        }
    }

    pub fn with_span(mut self, span: SourceSpan) -> Diagnostic {
        if self.span.is_none() {
            self.span = Some(span);
        }
        self
    }

    fn with_context(mut self, ctx: &Telescope) -> Diagnostic {
        if self.context.is_empty() {
            self.context = dump_telescope(ctx);
        }
        self
    }

    fn from_eval(err: EvalError, ctx: &Telescope) -> Diagnostic {
        let code = match err {
            EvalError::FuelExhausted => DiagnosticCode::FuelExhausted,
            EvalError::Internal(_) => DiagnosticCode::TypeMismatch,
        };
        Diagnostic::new(code, err.to_string()).with_context(ctx)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{}: error[{}]: {}", span, self.code, self.message)?,
            None => write!(f, "error[{}]: {}", self.code, self.message)?,
        }
        if !self.context.is_empty() {
            write!(f, "\n  in context:")?;
            for entry in &self.context {
                let sep = match entry.polarity {
                    Polarity::Crisp => "::",
                    Polarity::Cohesive => ":",
                };
                write!(f, "\n    {} {} {}", entry.name, sep, entry.ty)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

/// Renders a telescope for diagnostics, using the display names of entries.
pub fn dump_telescope(ctx: &Telescope) -> Vec<ContextEntry> {
    let mut names: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for entry in ctx.entries() {
        let ambient: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ty = print_term_in(&entry.ty, &ambient);
        let name = entry.name.as_str().to_string();
        out.push(ContextEntry {
            name: name.clone(),
            ty,
            polarity: entry.polarity,
        });
        names.push(name);
    }
    out
}

/// A user rewrite rule, stored on the record of its head constant.
#[derive(Clone, Debug)]
pub struct RewriteRule {
    pub name: Name,
    pub lhs: Pattern,
    pub rhs: Term,
}

/// One checked global: declared type, optional body, and the rewrite
/// rules keyed by this head.
#[derive(Clone, Debug)]
pub struct EnvRecord {
    pub name: Name,
    pub ty: Term,
    pub body: Option<Term>,
    pub rewrites: Vec<RewriteRule>,
}

/// The global table of checked declarations, in declaration order. Every
/// stored type and body is closed, so every constant is crisp.
#[derive(Clone, Debug, Default)]
pub struct Environment {
    records: Vec<EnvRecord>,
    index: BTreeMap<Name, usize>,
    rule_names: BTreeSet<Name>,
}

impl Environment {
    pub fn new() -> Environment {
        Environment::default()
    }

    pub fn lookup(&self, name: &Name) -> Option<&EnvRecord> {
        self.index.get(name).map(|&i| &self.records[i])
    }

    pub fn lookup_str(&self, name: &str) -> Option<&EnvRecord> {
        self.index.get(name).map(|&i| &self.records[i])
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn rewrites_for(&self, head: &Name) -> &[RewriteRule] {
        self.lookup(head).map(|r| r.rewrites.as_slice()).unwrap_or(&[])
    }

    pub fn records(&self) -> &[EnvRecord] {
        &self.records
    }

    /// Checks one declaration and installs it. See [`check_declaration`]
    /// for the pure version.
    pub fn declare(&mut self, decl: &Declaration, fuel: u64) -> Result<(), Diagnostic> {
        let checker = Checker::new(self, fuel);
        match decl {
            Declaration::Def { name, ty, body } => {
                self.fresh_name(name)?;
                let empty = Telescope::new();
                checker.infer_universe(&empty, ty)?;
                checker.check(&empty, body, ty)?;
                self.push_record(EnvRecord {
                    name: name.clone(),
                    ty: ty.clone(),
                    body: Some(body.clone()),
                    rewrites: Vec::new(),
                });
                Ok(())
            }
            Declaration::Postulate { name, ty } => {
                self.fresh_name(name)?;
                let empty = Telescope::new();
                checker.infer_universe(&empty, ty)?;
                self.push_record(EnvRecord {
                    name: name.clone(),
                    ty: ty.clone(),
                    body: None,
                    rewrites: Vec::new(),
                });
                Ok(())
            }
            Declaration::Rewrite { name, lhs, rhs } => {
                if self.rule_names.contains(name) || self.contains(name) {
                    return Err(Diagnostic::new(
                        DiagnosticCode::DuplicateName,
                        format!("duplicate declaration '{}'", name),
                    ));
                }
                let rule = checker.check_rewrite(name, lhs, rhs)?;
                let head_idx = *self.index.get(&lhs.head).expect("checked head");
                self.rule_names.insert(name.clone());
                self.records[head_idx].rewrites.push(rule);
                Ok(())
            }
        }
    }

    fn fresh_name(&self, name: &Name) -> Result<(), Diagnostic> {
        if self.contains(name) || self.rule_names.contains(name) {
            Err(Diagnostic::new(
                DiagnosticCode::DuplicateName,
                format!("duplicate declaration '{}'", name),
            ))
        } else {
            Ok(())
        }
    }

    fn push_record(&mut self, record: EnvRecord) {
        self.index.insert(record.name.clone(), self.records.len());
        self.records.push(record);
    }
}

/// Checks a declaration against `env`, returning the extended environment.
pub fn check_declaration(env: &Environment, decl: &Declaration) -> Result<Environment, Diagnostic> {
    let mut extended = env.clone();
    extended.declare(decl, DEFAULT_FUEL)?;
    Ok(extended)
}

/// Turns every cohesive entry crisp. Well-formedness is preserved: after
/// promotion every entry's type refers only to (now crisp) earlier entries.
pub fn promote(ctx: &Telescope) -> Telescope {
    Telescope::from_entries(
        ctx.entries()
            .iter()
            .map(|e| Entry {
                name: e.name.clone(),
                ty: e.ty.clone(),
                polarity: Polarity::Crisp,
            })
            .collect(),
    )
}

/// The first cohesive variable used by a term, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrispnessOffender {
    pub index: usize,
    pub name: String,
}

/// A term is crisp when every free variable refers to a crisp entry.
pub fn is_crisp(ctx: &Telescope, t: &Term) -> Result<(), CrispnessOffender> {
    for index in free_vars(t) {
        if let Some(entry) = ctx.lookup(index) {
            if entry.polarity == Polarity::Cohesive {
                return Err(CrispnessOffender {
                    index,
                    name: entry.name.as_str().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// The telescope with cohesive entries removed, together with the
/// old-to-new and new-to-old index maps (as telescope positions, oldest
/// first).
pub fn crisp_restriction(ctx: &Telescope) -> (Telescope, Vec<Option<usize>>, Vec<usize>) {
    let entries = ctx.entries();
    let mut old_to_new: Vec<Option<usize>> = vec![None; entries.len()];
    let mut new_to_old: Vec<usize> = Vec::new();
    let mut stripped: Vec<Entry> = Vec::new();
    for (old_pos, entry) in entries.iter().enumerate() {
        if entry.polarity == Polarity::Crisp {
            let new_pos = stripped.len();
            old_to_new[old_pos] = Some(new_pos);
            new_to_old.push(old_pos);
            // Re-map the entry's type: distance d from position old_pos
            // refers to old position old_pos-1-d, which must be crisp.
            let ty = crate::syntax::rename_free(&entry.ty, &|d| {
                let referenced_old = old_pos - 1 - d;
                let referenced_new = old_to_new[referenced_old]
                    .expect("crisp entry type must depend only on crisp entries");
                new_pos - 1 - referenced_new
            });
            stripped.push(Entry {
                name: entry.name.clone(),
                ty,
                polarity: Polarity::Crisp,
            });
        }
    }
    (Telescope::from_entries(stripped), old_to_new, new_to_old)
}

/// Re-maps a crisp term from the full telescope into the restriction.
fn restrict_term(t: &Term, ctx_len: usize, old_to_new: &[Option<usize>], new_len: usize) -> Term {
    crate::syntax::rename_free(t, &|idx| {
        let old_pos = ctx_len - 1 - idx;
        let new_pos = old_to_new[old_pos].expect("crisp term refers only to crisp entries");
        new_len - 1 - new_pos
    })
}

/// Re-maps a term from the restricted telescope back into the full one.
fn unrestrict_term(t: &Term, ctx_len: usize, new_to_old: &[usize]) -> Term {
    let new_len = new_to_old.len();
    crate::syntax::rename_free(t, &|idx| {
        let new_pos = new_len - 1 - idx;
        let old_pos = new_to_old[new_pos];
        ctx_len - 1 - old_pos
    })
}

/// Bidirectional checker over a frozen environment with a fuel budget for
/// conversion queries.
pub struct Checker<'e> {
    pub env: &'e Environment,
    pub fuel: u64,
}

impl<'e> Checker<'e> {
    pub fn new(env: &'e Environment, fuel: u64) -> Checker<'e> {
        Checker { env, fuel }
    }

    fn normalizer(&self) -> Normalizer<'e> {
        Normalizer::new(self.env, self.fuel)
    }

    fn eval_open(&self, ctx: &Telescope, t: &Term) -> Result<RValue, Diagnostic> {
        self.normalizer()
            .eval_open(ctx.len(), t)
            .map_err(|e| Diagnostic::from_eval(e, ctx))
    }

    fn quote(&self, ctx: &Telescope, v: &Value) -> Result<Term, Diagnostic> {
        self.normalizer()
            .quote(ctx.len(), v)
            .map_err(|e| Diagnostic::from_eval(e, ctx))
    }

    pub fn normalize(&self, ctx: &Telescope, t: &Term) -> Result<Term, Diagnostic> {
        self.normalizer()
            .normalize(ctx.len(), t)
            .map_err(|e| Diagnostic::from_eval(e, ctx))
    }

    fn types_convertible(&self, ctx: &Telescope, a: &Term, b: &Term) -> Result<bool, Diagnostic> {
        self.normalizer()
            .convertible(ctx.len(), a, b)
            .map_err(|e| Diagnostic::from_eval(e, ctx))
    }

    pub fn convertible_at(
        &self,
        ctx: &Telescope,
        a: &Term,
        b: &Term,
        ty: &Term,
    ) -> Result<bool, Diagnostic> {
        self.normalizer()
            .convertible_at(ctx.len(), a, b, ty)
            .map_err(|e| Diagnostic::from_eval(e, ctx))
    }

    fn print_in_ctx(&self, ctx: &Telescope, t: &Term) -> String {
        let names: Vec<String> = ctx
            .entries()
            .iter()
            .map(|e| e.name.as_str().to_string())
            .collect();
        let ambient: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        print_term_in(t, &ambient)
    }

    fn mismatch(&self, ctx: &Telescope, expected: &Term, found: &Term) -> Diagnostic {
        let expected_nf = self
            .normalize(ctx, expected)
            .unwrap_or_else(|_| expected.clone());
        let found_nf = self.normalize(ctx, found).unwrap_or_else(|_| found.clone());
        Diagnostic::new(
            DiagnosticCode::TypeMismatch,
            format!(
                "type mismatch: expected {}, found {}",
                self.print_in_ctx(ctx, &expected_nf),
                self.print_in_ctx(ctx, &found_nf)
            ),
        )
        .with_context(ctx)
    }

    /// Requires `t` to be a type and returns its universe level.
    pub fn infer_universe(&self, ctx: &Telescope, t: &Term) -> Result<Level, Diagnostic> {
        let ty = self.infer(ctx, t)?;
        match self.eval_open(ctx, &ty)?.as_ref() {
            Value::Universe(l) => Ok(*l),
            _ => Err(Diagnostic::new(
                DiagnosticCode::UniverseError,
                format!(
                    "expected a type, but {} has type {}",
                    self.print_in_ctx(ctx, t),
                    self.print_in_ctx(ctx, &ty)
                ),
            )
            .with_context(ctx)),
        }
    }

    /// Infers a type for `t`; the inferred type is valid in `ctx`.
    pub fn infer(&self, ctx: &Telescope, t: &Term) -> Result<Term, Diagnostic> {
        match t {
            Term::Var(i) => ctx.lookup_type(*i).ok_or_else(|| {
                Diagnostic::new(
                    DiagnosticCode::ScopeError,
                    format!("de Bruijn index {} out of range", i),
                )
                .with_context(ctx)
            }),
            Term::Const(name) => match self.env.lookup(name) {
                Some(record) => Ok(record.ty.clone()),
                None => Err(Diagnostic::new(
                    DiagnosticCode::ScopeError,
                    format!("unknown constant '{}'", name),
                )
                .with_context(ctx)),
            },
            Term::Universe(l) => Ok(Term::Universe(l.succ())),
            Term::Pi {
                binder,
                domain,
                codomain,
            } => {
                let l1 = self.infer_universe(ctx, domain)?;
                let inner = ctx.extended(Entry {
                    name: binder.clone(),
                    ty: (**domain).clone(),
                    polarity: Polarity::Cohesive,
                });
                let l2 = self.infer_universe(&inner, codomain)?;
                Ok(Term::Universe(l1.max(l2)))
            }
            Term::Lam { .. } => Err(Diagnostic::new(
                DiagnosticCode::TypeMismatch,
                "cannot infer the type of a bare function; it must be checked against a function type",
            )
            .with_context(ctx)),
            Term::App { fun, arg } => {
                // A redex of an un-annotated function infers like a let:
                // the argument's type types the binder.
                if let Term::Lam { binder, body } = fun.as_ref() {
                    let arg_ty = self.infer(ctx, arg)?;
                    let inner = ctx.extended(Entry {
                        name: binder.clone(),
                        ty: arg_ty,
                        polarity: Polarity::Cohesive,
                    });
                    let body_ty = self.infer(&inner, body)?;
                    return Ok(instantiate(&body_ty, arg));
                }
                let fun_ty = self.infer(ctx, fun)?;
                match self.eval_open(ctx, &fun_ty)?.as_ref() {
                    Value::Pi {
                        domain, codomain, ..
                    } => {
                        let domain = self.quote(ctx, domain)?;
                        self.check(ctx, arg, &domain)?;
                        let arg_v = self.eval_open(ctx, arg)?;
                        let result = self
                            .normalizer()
                            .apply_closure(codomain, &[arg_v])
                            .map_err(|e| Diagnostic::from_eval(e, ctx))?;
                        self.quote(ctx, &result)
                    }
                    _ => Err(Diagnostic::new(
                        DiagnosticCode::NotAFunction,
                        format!(
                            "cannot apply {} of non-function type {}",
                            self.print_in_ctx(ctx, fun),
                            self.print_in_ctx(ctx, &fun_ty)
                        ),
                    )
                    .with_context(ctx)),
                }
            }
            Term::Sigma {
                binder,
                first,
                second,
            } => {
                let l1 = self.infer_universe(ctx, first)?;
                let inner = ctx.extended(Entry {
                    name: binder.clone(),
                    ty: (**first).clone(),
                    polarity: Polarity::Cohesive,
                });
                let l2 = self.infer_universe(&inner, second)?;
                Ok(Term::Universe(l1.max(l2)))
            }
            Term::Pair { .. } => Err(Diagnostic::new(
                DiagnosticCode::TypeMismatch,
                "cannot infer the type of a bare pair; it must be checked against a pair type",
            )
            .with_context(ctx)),
            Term::Fst(p) => {
                let p_ty = self.infer(ctx, p)?;
                match self.eval_open(ctx, &p_ty)?.as_ref() {
                    Value::Sigma { first, .. } => self.quote(ctx, first),
                    _ => Err(self.not_a_pair(ctx, p, &p_ty)),
                }
            }
            Term::Snd(p) => {
                let p_ty = self.infer(ctx, p)?;
                match self.eval_open(ctx, &p_ty)?.as_ref() {
                    Value::Sigma { second, .. } => {
                        let fst = Term::Fst(p.clone());
                        let fst_v = self.eval_open(ctx, &fst)?;
                        let result = self
                            .normalizer()
                            .apply_closure(second, &[fst_v])
                            .map_err(|e| Diagnostic::from_eval(e, ctx))?;
                        self.quote(ctx, &result)
                    }
                    _ => Err(self.not_a_pair(ctx, p, &p_ty)),
                }
            }
            Term::IdType { ty, lhs, rhs } => {
                let l = self.infer_universe(ctx, ty)?;
                self.check(ctx, lhs, ty)?;
                self.check(ctx, rhs, ty)?;
                Ok(Term::Universe(l))
            }
            Term::Refl(p) => {
                let ty = self.infer(ctx, p)?;
                Ok(Term::IdType {
                    ty: ty.rc(),
                    lhs: p.clone(),
                    rhs: p.clone(),
                })
            }
            Term::J {
                motive_binders,
                motive,
                base_binder,
                base,
                lhs,
                rhs,
                proof,
            } => {
                // The endpoint type comes from whichever of the three
                // subjects is inferable; normal forms guarantee at least
                // the proof is (a stuck J has a neutral proof).
                let ty = self
                    .infer(ctx, lhs)
                    .or_else(|_| self.infer(ctx, rhs))
                    .or_else(|first_err| {
                        let proof_ty = self.infer(ctx, proof)?;
                        match self.eval_open(ctx, &proof_ty)?.as_ref() {
                            Value::IdType { ty, .. } => self.quote(ctx, ty),
                            _ => Err(first_err),
                        }
                    })?;
                self.check(ctx, lhs, &ty)?;
                self.check(ctx, rhs, &ty)?;
                let id_ty = Term::IdType {
                    ty: ty.clone().rc(),
                    lhs: lhs.clone(),
                    rhs: rhs.clone(),
                };
                self.check(ctx, proof, &id_ty)?;
                // Motive context: x : A, y : A, p : Id A x y.
                let ctx_m = ctx
                    .extended(Entry {
                        name: motive_binders[0].clone(),
                        ty: ty.clone(),
                        polarity: Polarity::Cohesive,
                    })
                    .extended(Entry {
                        name: motive_binders[1].clone(),
                        ty: shift(&ty, 1),
                        polarity: Polarity::Cohesive,
                    })
                    .extended(Entry {
                        name: motive_binders[2].clone(),
                        ty: Term::IdType {
                            ty: shift(&ty, 2).rc(),
                            lhs: Term::Var(1).rc(),
                            rhs: Term::Var(0).rc(),
                        },
                        polarity: Polarity::Cohesive,
                    });
                self.infer_universe(&ctx_m, motive).map_err(|d| {
                    Diagnostic::new(
                        DiagnosticCode::MotiveMismatch,
                        format!("identity motive is not a type family: {}", d.message),
                    )
                    .with_context(ctx)
                })?;
                // Base: x : A |- base : motive[x, x, refl x].
                let ctx_b = ctx.extended(Entry {
                    name: base_binder.clone(),
                    ty: ty.clone(),
                    polarity: Polarity::Cohesive,
                });
                let base_expected =
                    instantiate(&instantiate(motive, &Term::refl(Term::var(0))), &Term::var(0));
                self.check(&ctx_b, base, &base_expected)?;
                Ok(crate::syntax::instantiate_many(motive, &[lhs, rhs, proof]))
            }
            Term::Unit => Ok(Term::Universe(Level(0))),
            Term::Star => Ok(Term::Unit),
            Term::SharpTy(a) => {
                let promoted = promote(ctx);
                let l = self.infer_universe(&promoted, a)?;
                Ok(Term::Universe(l))
            }
            Term::SharpIntro(m) => {
                let promoted = promote(ctx);
                let inner = self.infer(&promoted, m)?;
                Ok(Term::SharpTy(inner.rc()))
            }
            Term::SharpElim(m) => {
                if let Err(offender) = is_crisp(ctx, m) {
                    return Err(Diagnostic::new(
                        DiagnosticCode::SharpElimCohesive,
                        format!(
                            "sharp elimination needs a crisp subject, but '{}' is cohesive",
                            offender.name
                        ),
                    )
                    .with_context(ctx));
                }
                let inner_ty = self.infer(ctx, m)?;
                match self.eval_open(ctx, &inner_ty)?.as_ref() {
                    Value::SharpTy(a) => self.quote(ctx, a),
                    _ => Err(Diagnostic::new(
                        DiagnosticCode::TypeMismatch,
                        format!(
                            "sharp elimination of {} whose type {} is not a sharp type",
                            self.print_in_ctx(ctx, m),
                            self.print_in_ctx(ctx, &inner_ty)
                        ),
                    )
                    .with_context(ctx)),
                }
            }
            Term::FlatTy(a) => {
                if let Err(offender) = is_crisp(ctx, a) {
                    return Err(Diagnostic::new(
                        DiagnosticCode::FlatOnCohesiveType,
                        format!(
                            "flat cannot be applied to a type mentioning the cohesive variable '{}'",
                            offender.name
                        ),
                    )
                    .with_context(ctx));
                }
                let (stripped, old_to_new, _) = crisp_restriction(ctx);
                let a_restricted = restrict_term(a, ctx.len(), &old_to_new, stripped.len());
                let l = self.infer_universe(&stripped, &a_restricted)?;
                Ok(Term::Universe(l))
            }
            Term::FlatIntro(m) => {
                if let Err(offender) = is_crisp(ctx, m) {
                    return Err(Diagnostic::new(
                        DiagnosticCode::CrispnessViolation,
                        format!(
                            "flat introduction needs a crisp subject, but '{}' is cohesive",
                            offender.name
                        ),
                    )
                    .with_context(ctx));
                }
                let (stripped, old_to_new, new_to_old) = crisp_restriction(ctx);
                let m_restricted = restrict_term(m, ctx.len(), &old_to_new, stripped.len());
                let inner_ty = self.infer(&stripped, &m_restricted)?;
                let inner_ty = unrestrict_term(&inner_ty, ctx.len(), &new_to_old);
                Ok(Term::FlatTy(inner_ty.rc()))
            }
            Term::FlatLet {
                binder,
                motive_binder,
                motive,
                scrutinee,
                body,
            } => {
                let scrutinee_ty = self.infer(ctx, scrutinee)?;
                let inner = match self.eval_open(ctx, &scrutinee_ty)?.as_ref() {
                    Value::FlatTy(a) => self.quote(ctx, a)?,
                    _ => {
                        return Err(Diagnostic::new(
                            DiagnosticCode::TypeMismatch,
                            format!(
                                "letflat scrutinee {} has type {}, which is not a flat type",
                                self.print_in_ctx(ctx, scrutinee),
                                self.print_in_ctx(ctx, &scrutinee_ty)
                            ),
                        )
                        .with_context(ctx))
                    }
                };
                // The inner type of a flat type is crisp; re-check
                // defensively so the crisp binder below is well-formed.
                if is_crisp(ctx, &inner).is_err() {
                    return Err(Diagnostic::new(
                        DiagnosticCode::FlatOnCohesiveType,
                        "letflat scrutinee type has a cohesive inner type",
                    )
                    .with_context(ctx));
                }
                let ctx_motive = ctx.extended(Entry {
                    name: motive_binder.clone(),
                    ty: Term::FlatTy(inner.clone().rc()),
                    polarity: Polarity::Cohesive,
                });
                self.infer_universe(&ctx_motive, motive).map_err(|d| {
                    Diagnostic::new(
                        DiagnosticCode::MotiveMismatch,
                        format!("letflat motive is not a type family: {}", d.message),
                    )
                    .with_context(ctx)
                })?;
                // Body: one new crisp entry u :: A; expected type is the
                // motive at u^flat.
                let ctx_body = ctx.extended(Entry {
                    name: binder.clone(),
                    ty: inner,
                    polarity: Polarity::Crisp,
                });
                let body_expected = subst(motive, 0, &Term::flat_intro(Term::var(0)));
                self.check(&ctx_body, body, &body_expected)?;
                Ok(instantiate(motive, scrutinee))
            }
        }
    }

    fn not_a_pair(&self, ctx: &Telescope, p: &Term, p_ty: &Term) -> Diagnostic {
        Diagnostic::new(
            DiagnosticCode::NotAPair,
            format!(
                "cannot project from {} of non-pair type {}",
                self.print_in_ctx(ctx, p),
                self.print_in_ctx(ctx, p_ty)
            ),
        )
        .with_context(ctx)
    }

    /// Checks `t` against `expected` (assumed to be a valid type in `ctx`).
    pub fn check(&self, ctx: &Telescope, t: &Term, expected: &Term) -> Result<(), Diagnostic> {
        let expected_v = self.eval_open(ctx, expected)?;
        match (t, expected_v.as_ref()) {
            (Term::Lam { binder, body }, Value::Pi { domain, codomain, .. }) => {
                let domain = self.quote(ctx, domain)?;
                let inner = ctx.extended(Entry {
                    name: binder.clone(),
                    ty: domain,
                    polarity: Polarity::Cohesive,
                });
                let fresh = Value::fresh(ctx.len());
                let body_expected_v = self
                    .normalizer()
                    .apply_closure(codomain, &[fresh])
                    .map_err(|e| Diagnostic::from_eval(e, ctx))?;
                let body_expected = self
                    .normalizer()
                    .quote(ctx.len() + 1, &body_expected_v)
                    .map_err(|e| Diagnostic::from_eval(e, ctx))?;
                self.check(&inner, body, &body_expected)
            }
            (Term::Lam { .. }, _) => Err(Diagnostic::new(
                DiagnosticCode::TypeMismatch,
                format!(
                    "function checked against non-function type {}",
                    self.print_in_ctx(ctx, expected)
                ),
            )
            .with_context(ctx)),
            (Term::Pair { fst, snd }, Value::Sigma { first, second, .. }) => {
                let first = self.quote(ctx, first)?;
                self.check(ctx, fst, &first)?;
                let fst_v = self.eval_open(ctx, fst)?;
                let snd_expected_v = self
                    .normalizer()
                    .apply_closure(second, &[fst_v])
                    .map_err(|e| Diagnostic::from_eval(e, ctx))?;
                let snd_expected = self.quote(ctx, &snd_expected_v)?;
                self.check(ctx, snd, &snd_expected)
            }
            (Term::Pair { .. }, _) => Err(Diagnostic::new(
                DiagnosticCode::TypeMismatch,
                format!(
                    "pair checked against non-pair type {}",
                    self.print_in_ctx(ctx, expected)
                ),
            )
            .with_context(ctx)),
            (Term::Refl(point), Value::IdType { ty, lhs, rhs }) => {
                let ty = self.quote(ctx, ty)?;
                self.check(ctx, point, &ty)?;
                let lhs = self.quote(ctx, lhs)?;
                let rhs = self.quote(ctx, rhs)?;
                let ok = self.convertible_at(ctx, point, &lhs, &ty)?
                    && self.convertible_at(ctx, point, &rhs, &ty)?;
                if ok {
                    Ok(())
                } else {
                    Err(Diagnostic::new(
                        DiagnosticCode::TypeMismatch,
                        format!(
                            "refl {} does not prove {}",
                            self.print_in_ctx(ctx, point),
                            self.print_in_ctx(ctx, expected)
                        ),
                    )
                    .with_context(ctx))
                }
            }
            (Term::SharpIntro(m), Value::SharpTy(a)) => {
                let a = self.quote(ctx, a)?;
                let promoted = promote(ctx);
                self.check(&promoted, m, &a)
            }
            (Term::FlatIntro(m), Value::FlatTy(a)) => {
                if let Err(offender) = is_crisp(ctx, m) {
                    return Err(Diagnostic::new(
                        DiagnosticCode::CrispnessViolation,
                        format!(
                            "flat introduction needs a crisp subject, but '{}' is cohesive",
                            offender.name
                        ),
                    )
                    .with_context(ctx));
                }
                let a = self.quote(ctx, a)?;
                let (stripped, old_to_new, _) = crisp_restriction(ctx);
                let m_restricted = restrict_term(m, ctx.len(), &old_to_new, stripped.len());
                let a_restricted = restrict_term(&a, ctx.len(), &old_to_new, stripped.len());
                self.check(&stripped, &m_restricted, &a_restricted)
            }
            _ => {
                let inferred = self.infer(ctx, t)?;
                if self.types_convertible(ctx, &inferred, expected)? {
                    Ok(())
                } else {
                    Err(self.mismatch(ctx, expected, &inferred))
                }
            }
        }
    }

    /// Admits a rewrite rule: the head must be a postulate, the pattern
    /// left-linear; a telescope of cohesive pattern variables is
    /// synthesized, the left-hand side's type inferred under it, and the
    /// right-hand side checked at that type.
    pub fn check_rewrite(
        &self,
        name: &Name,
        lhs: &Pattern,
        rhs: &Term,
    ) -> Result<RewriteRule, Diagnostic> {
        let ill = |msg: String| Diagnostic::new(DiagnosticCode::RewriteIllFormed, msg);
        let head = self
            .env
            .lookup(&lhs.head)
            .ok_or_else(|| ill(format!("rewrite head '{}' is not declared", lhs.head)))?;
        if head.body.is_some() {
            return Err(ill(format!(
                "rewrite head '{}' must be a postulate",
                lhs.head
            )));
        }
        if !lhs.is_left_linear() {
            return Err(ill(format!(
                "rewrite '{}' is not left-linear: a pattern variable repeats",
                name
            )));
        }

        let mut tele = Telescope::new();
        let mut cur_ty = head.ty.clone();
        let mut arg_terms: Vec<Term> = Vec::new();

        for arg in &lhs.args {
            let (domain, codomain) = match self.eval_open(&tele, &cur_ty)?.as_ref() {
                Value::Pi {
                    domain, codomain, ..
                } => (self.quote(&tele, domain)?, codomain.clone()),
                _ => {
                    return Err(ill(format!(
                        "rewrite '{}' applies head '{}' to too many arguments",
                        name, lhs.head
                    )))
                }
            };
            let arg_term = match arg {
                crate::syntax::PatternArg::Var(v) => {
                    for prior in arg_terms.iter_mut() {
                        *prior = shift(prior, 1);
                    }
                    tele.push(Entry {
                        name: Binder(v.clone()),
                        ty: domain,
                        polarity: Polarity::Cohesive,
                    });
                    Term::Var(0)
                }
                crate::syntax::PatternArg::Ctor { head: ctor, vars } => {
                    let ctor_record = self
                        .env
                        .lookup(ctor)
                        .ok_or_else(|| ill(format!("constructor '{}' is not declared", ctor)))?;
                    if ctor_record.body.is_some() {
                        return Err(ill(format!(
                            "constructor pattern head '{}' must be a postulate",
                            ctor
                        )));
                    }
                    let added = vars.len();
                    for prior in arg_terms.iter_mut() {
                        *prior = shift(prior, added as i64);
                    }
                    let mut ctor_ty = ctor_record.ty.clone();
                    for var in vars {
                        let (dom, cod) = match self.eval_open(&tele, &ctor_ty)?.as_ref() {
                            Value::Pi {
                                domain, codomain, ..
                            } => (self.quote(&tele, domain)?, codomain.clone()),
                            _ => {
                                return Err(ill(format!(
                                    "constructor '{}' applied to too many pattern variables",
                                    ctor
                                )))
                            }
                        };
                        tele.push(Entry {
                            name: Binder(var.clone()),
                            ty: dom,
                            polarity: Polarity::Cohesive,
                        });
                        let fresh = Value::fresh(tele.len() - 1);
                        let cod_v = self
                            .normalizer()
                            .apply_closure(&cod, &[fresh])
                            .map_err(|e| Diagnostic::from_eval(e, &tele))?;
                        ctor_ty = self
                            .normalizer()
                            .quote(tele.len(), &cod_v)
                            .map_err(|e| Diagnostic::from_eval(e, &tele))?;
                    }
                    let atom = Term::apps(
                        Term::Const(ctor.clone()),
                        (0..added).rev().map(Term::Var),
                    );
                    // The constructor's result type must match the head's
                    // expected domain, weakened past the new variables.
                    let expected_domain = shift(&domain, added as i64);
                    if !self.types_convertible(&tele, &ctor_ty, &expected_domain)? {
                        return Err(ill(format!(
                            "constructor '{}' builds {}, but '{}' expects {} here",
                            ctor,
                            self.print_in_ctx(&tele, &ctor_ty),
                            lhs.head,
                            self.print_in_ctx(&tele, &expected_domain)
                        )));
                    }
                    atom
                }
            };
            let arg_v = self.eval_open(&tele, &arg_term)?;
            let cod_v = self
                .normalizer()
                .apply_closure(&codomain, &[arg_v])
                .map_err(|e| Diagnostic::from_eval(e, &tele))?;
            cur_ty = self
                .normalizer()
                .quote(tele.len(), &cod_v)
                .map_err(|e| Diagnostic::from_eval(e, &tele))?;
            arg_terms.push(arg_term);
        }

        // The left- and right-hand sides share the type cur_ty.
        self.check(&tele, rhs, &cur_ty).map_err(|d| {
            Diagnostic::new(
                DiagnosticCode::RewriteIllFormed,
                format!("rewrite '{}' right-hand side does not type-check: {}", name, d.message),
            )
            .with_context(&tele)
        })?;

        Ok(RewriteRule {
            name: name.clone(),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
        })
    }
}

/// Infers with the default fuel budget.
pub fn infer(env: &Environment, ctx: &Telescope, t: &Term) -> Result<Term, Diagnostic> {
    Checker::new(env, DEFAULT_FUEL).infer(ctx, t)
}

/// Checks with the default fuel budget.
pub fn check(env: &Environment, ctx: &Telescope, t: &Term, expected: &Term) -> Result<(), Diagnostic> {
    Checker::new(env, DEFAULT_FUEL).check(ctx, t, expected)
}
