//! Definitional equality by normalization: evaluation into a semantic
//! domain, read-back to normal forms, and conversion checking.
//!
//! Reductions performed here: beta for functions, pairs, and J on refl;
//! the sharp computation rule (elimination over an introduction); flat
//! beta (letflat over an introduction); delta-unfolding of defined
//! constants; and user rewrite rules at constant-headed spines, first
//! match in declaration order. The sharp uniqueness rule lives in the
//! conversion relation: an introduction and a stuck value of sharp type
//! are compared by eliminating both sides.
//!
//! Every reduction step consumes fuel. The theory has no normalization
//! guarantee once user rewrites are admitted, so a conversion query that
//! runs out of fuel reports an error instead of diverging.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::kernel::{Environment, RewriteRule};
use crate::syntax::{Binder, Level, Name, PatternArg, RTerm, Term};

pub type RValue = Rc<Value>;

/// Semantic values. Neutrals are stuck: no reduction or rewrite applies
/// to any prefix of their spine.
#[derive(Clone, Debug)]
pub enum Value {
    Universe(Level),
    Pi {
        binder: Binder,
        domain: RValue,
        codomain: Closure,
    },
    Lam {
        binder: Binder,
        body: Closure,
    },
    Sigma {
        binder: Binder,
        first: RValue,
        second: Closure,
    },
    Pair {
        fst: RValue,
        snd: RValue,
    },
    Unit,
    Star,
    IdType {
        ty: RValue,
        lhs: RValue,
        rhs: RValue,
    },
    Refl(RValue),
    SharpTy(RValue),
    SharpIntro(RValue),
    FlatTy(RValue),
    FlatIntro(RValue),
    Neutral(Neutral),
}

#[derive(Clone, Debug)]
pub struct Neutral {
    pub head: Head,
    pub spine: Vec<Elim>,
}

#[derive(Clone, Debug)]
pub enum Head {
    /// A variable as a de Bruijn level.
    Var(usize),
    /// An unfoldable-free constant (postulate, or a definition while its
    /// unfolding is in progress).
    Const(Name),
}

#[derive(Clone, Debug)]
pub enum Elim {
    App(RValue),
    Fst,
    Snd,
    J {
        motive_binders: [Binder; 3],
        motive: Closure,
        base_binder: Binder,
        base: Closure,
        lhs: RValue,
        rhs: RValue,
    },
    SharpElim,
    FlatLet {
        binder: Binder,
        motive_binder: Binder,
        motive: Closure,
        body: Closure,
    },
}

/// Evaluation environment: one value per telescope entry, oldest first.
#[derive(Clone, Debug, Default)]
pub struct Env(pub Vec<RValue>);

impl Env {
    pub fn new() -> Env {
        Env(Vec::new())
    }

    /// The identity valuation for an open term over `depth` entries.
    pub fn identity(depth: usize) -> Env {
        Env((0..depth).map(Value::fresh).collect())
    }

    pub fn lookup(&self, idx: usize) -> Option<RValue> {
        let n = self.0.len();
        if idx < n {
            Some(self.0[n - 1 - idx].clone())
        } else {
            None
        }
    }

    pub fn pushed(&self, v: RValue) -> Env {
        let mut e = self.clone();
        e.0.push(v);
        e
    }
}

/// A term under an environment, delaying evaluation of `arity` binders.
#[derive(Clone, Debug)]
pub struct Closure {
    pub env: Env,
    pub body: RTerm,
}

impl Value {
    pub fn rc(self) -> RValue {
        Rc::new(self)
    }

    pub fn fresh(level: usize) -> RValue {
        Value::Neutral(Neutral {
            head: Head::Var(level),
            spine: Vec::new(),
        })
        .rc()
    }
}

#[derive(Clone, Debug)]
pub enum EvalError {
    /// The per-query reduction budget ran out.
    FuelExhausted,
    /// Evaluation hit an impossible shape; input was not checked.
    Internal(String),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::FuelExhausted => write!(f, "conversion fuel exhausted"),
            EvalError::Internal(msg) => write!(f, "internal evaluation error: {}", msg),
        }
    }
}

/// First-order matching of a rewrite pattern against an application spine
/// prefix. On success the pattern variables are bound in first-occurrence
/// order. Constructor-headed atoms match only constant-headed neutrals of
/// the named postulate with exactly the pattern's argument count.
pub fn match_rewrite<'r>(
    rules: &'r [RewriteRule],
    spine: &[Elim],
) -> Option<(&'r RewriteRule, Vec<RValue>)> {
    'rules: for rule in rules {
        let arity = rule.lhs.args.len();
        if spine.len() < arity {
            continue;
        }
        let mut bindings = Vec::new();
        for (arg, elim) in rule.lhs.args.iter().zip(&spine[..arity]) {
            let value = match elim {
                Elim::App(v) => v,
                _ => continue 'rules,
            };
            if !match_arg(arg, value, &mut bindings) {
                continue 'rules;
            }
        }
        return Some((rule, bindings));
    }
    None
}

fn match_arg(arg: &PatternArg, value: &RValue, bindings: &mut Vec<RValue>) -> bool {
    match arg {
        PatternArg::Var(_) => {
            bindings.push(value.clone());
            true
        }
        PatternArg::Ctor { head, vars } => match value.as_ref() {
            Value::Neutral(Neutral {
                head: Head::Const(c),
                spine,
            }) if c == head && spine.len() == vars.len() => {
                for elim in spine {
                    match elim {
                        Elim::App(v) => bindings.push(v.clone()),
                        _ => return false,
                    }
                }
                true
            }
            _ => false,
        },
    }
}

/// Normalization engine for one conversion query. Holds the frozen global
/// environment, the remaining fuel, and a per-query cache of unfolded
/// definitions.
pub struct Normalizer<'e> {
    env: &'e Environment,
    fuel: Cell<u64>,
    defs: RefCell<HashMap<Name, RValue>>,
}

impl<'e> Normalizer<'e> {
    pub fn new(env: &'e Environment, fuel: u64) -> Normalizer<'e> {
        Normalizer {
            env,
            fuel: Cell::new(fuel),
            defs: RefCell::new(HashMap::new()),
        }
    }

    fn tick(&self) -> Result<(), EvalError> {
        let left = self.fuel.get();
        if left == 0 {
            return Err(EvalError::FuelExhausted);
        }
        self.fuel.set(left - 1);
        Ok(())
    }

    fn closure(&self, env: &Env, body: &RTerm) -> Closure {
        Closure {
            env: env.clone(),
            body: body.clone(),
        }
    }

    pub fn apply_closure(&self, closure: &Closure, args: &[RValue]) -> Result<RValue, EvalError> {
        let mut env = closure.env.clone();
        for arg in args {
            env.0.push(arg.clone());
        }
        self.eval(&env, &closure.body)
    }

    pub fn eval(&self, env: &Env, t: &Term) -> Result<RValue, EvalError> {
        match t {
            Term::Var(i) => env
                .lookup(*i)
                .ok_or_else(|| EvalError::Internal(format!("unbound index {}", i))),
            Term::Const(name) => self.eval_const(name),
            Term::Universe(l) => Ok(Value::Universe(*l).rc()),
            Term::Pi {
                binder,
                domain,
                codomain,
            } => Ok(Value::Pi {
                binder: binder.clone(),
                domain: self.eval(env, domain)?,
                codomain: self.closure(env, codomain),
            }
            .rc()),
            Term::Lam { binder, body } => Ok(Value::Lam {
                binder: binder.clone(),
                body: self.closure(env, body),
            }
            .rc()),
            Term::App { fun, arg } => {
                let fun = self.eval(env, fun)?;
                let arg = self.eval(env, arg)?;
                self.apply(fun, arg)
            }
            Term::Sigma {
                binder,
                first,
                second,
            } => Ok(Value::Sigma {
                binder: binder.clone(),
                first: self.eval(env, first)?,
                second: self.closure(env, second),
            }
            .rc()),
            Term::Pair { fst, snd } => Ok(Value::Pair {
                fst: self.eval(env, fst)?,
                snd: self.eval(env, snd)?,
            }
            .rc()),
            Term::Fst(p) => {
                let p = self.eval(env, p)?;
                self.project_fst(p)
            }
            Term::Snd(p) => {
                let p = self.eval(env, p)?;
                self.project_snd(p)
            }
            Term::IdType { ty, lhs, rhs } => Ok(Value::IdType {
                ty: self.eval(env, ty)?,
                lhs: self.eval(env, lhs)?,
                rhs: self.eval(env, rhs)?,
            }
            .rc()),
            Term::Refl(p) => Ok(Value::Refl(self.eval(env, p)?).rc()),
            Term::J {
                motive_binders,
                motive,
                base_binder,
                base,
                lhs,
                rhs,
                proof,
            } => {
                let lhs = self.eval(env, lhs)?;
                let rhs = self.eval(env, rhs)?;
                let proof = self.eval(env, proof)?;
                self.eliminate_j(
                    motive_binders.clone(),
                    self.closure(env, motive),
                    base_binder.clone(),
                    self.closure(env, base),
                    lhs,
                    rhs,
                    proof,
                )
            }
            Term::Unit => Ok(Value::Unit.rc()),
            Term::Star => Ok(Value::Star.rc()),
            Term::SharpTy(a) => Ok(Value::SharpTy(self.eval(env, a)?).rc()),
            Term::SharpIntro(a) => {
                let v = self.eval(env, a)?;
                self.sharp_intro(v)
            }
            Term::SharpElim(a) => {
                let v = self.eval(env, a)?;
                self.sharp_elim(v)
            }
            Term::FlatTy(a) => Ok(Value::FlatTy(self.eval(env, a)?).rc()),
            Term::FlatIntro(a) => Ok(Value::FlatIntro(self.eval(env, a)?).rc()),
            Term::FlatLet {
                binder,
                motive_binder,
                motive,
                scrutinee,
                body,
            } => {
                let scrutinee = self.eval(env, scrutinee)?;
                self.flat_let(
                    binder.clone(),
                    motive_binder.clone(),
                    self.closure(env, motive),
                    scrutinee,
                    self.closure(env, body),
                )
            }
        }
    }

    fn eval_const(&self, name: &Name) -> Result<RValue, EvalError> {
        if let Some(v) = self.defs.borrow().get(name) {
            return Ok(v.clone());
        }
        let record = self
            .env
            .lookup(name)
            .ok_or_else(|| EvalError::Internal(format!("unknown constant '{}'", name)))?;
        let value = match &record.body {
            Some(body) => {
                self.tick()?;
                self.eval(&Env::new(), body)?
            }
            None => self.finish_neutral(Neutral {
                head: Head::Const(name.clone()),
                spine: Vec::new(),
            })?,
        };
        self.defs.borrow_mut().insert(name.clone(), value.clone());
        Ok(value)
    }

    pub fn apply(&self, fun: RValue, arg: RValue) -> Result<RValue, EvalError> {
        match fun.as_ref() {
            Value::Lam { body, .. } => {
                self.tick()?;
                self.apply_closure(body, &[arg])
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::App(arg));
                self.finish_neutral(n)
            }
            other => Err(EvalError::Internal(format!(
                "application of a non-function value: {:?}",
                value_head_name(other)
            ))),
        }
    }

    fn project_fst(&self, p: RValue) -> Result<RValue, EvalError> {
        match p.as_ref() {
            Value::Pair { fst, .. } => {
                self.tick()?;
                Ok(fst.clone())
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::Fst);
                Ok(Value::Neutral(n).rc())
            }
            other => Err(EvalError::Internal(format!(
                "first projection of a non-pair: {:?}",
                value_head_name(other)
            ))),
        }
    }

    fn project_snd(&self, p: RValue) -> Result<RValue, EvalError> {
        match p.as_ref() {
            Value::Pair { snd, .. } => {
                self.tick()?;
                Ok(snd.clone())
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::Snd);
                Ok(Value::Neutral(n).rc())
            }
            other => Err(EvalError::Internal(format!(
                "second projection of a non-pair: {:?}",
                value_head_name(other)
            ))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn eliminate_j(
        &self,
        motive_binders: [Binder; 3],
        motive: Closure,
        base_binder: Binder,
        base: Closure,
        lhs: RValue,
        rhs: RValue,
        proof: RValue,
    ) -> Result<RValue, EvalError> {
        match proof.as_ref() {
            Value::Refl(point) => {
                self.tick()?;
                self.apply_closure(&base, std::slice::from_ref(point))
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::J {
                    motive_binders,
                    motive,
                    base_binder,
                    base,
                    lhs,
                    rhs,
                });
                Ok(Value::Neutral(n).rc())
            }
            other => Err(EvalError::Internal(format!(
                "identity elimination of a non-proof: {:?}",
                value_head_name(other)
            ))),
        }
    }

    /// Sharp introduction. The uniqueness rule is NOT applied as a
    /// rewrite here: contracting an introduction over a stuck elimination
    /// can strip the promotion that licensed the elimination, producing a
    /// normal form outside the well-typed fragment. Uniqueness is instead
    /// validated by the conversion relation, which compares an
    /// introduction against a stuck value by eliminating both.
    fn sharp_intro(&self, v: RValue) -> Result<RValue, EvalError> {
        Ok(Value::SharpIntro(v).rc())
    }

    /// Sharp elimination; the computation rule cancels it over an
    /// introduction.
    fn sharp_elim(&self, v: RValue) -> Result<RValue, EvalError> {
        match v.as_ref() {
            Value::SharpIntro(inner) => {
                self.tick()?;
                Ok(inner.clone())
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::SharpElim);
                Ok(Value::Neutral(n).rc())
            }
            other => Err(EvalError::Internal(format!(
                "sharp elimination of a non-sharp value: {:?}",
                value_head_name(other)
            ))),
        }
    }

    /// Letflat is a positive eliminator: it reduces only on introduction
    /// forms and otherwise sticks.
    fn flat_let(
        &self,
        binder: Binder,
        motive_binder: Binder,
        motive: Closure,
        scrutinee: RValue,
        body: Closure,
    ) -> Result<RValue, EvalError> {
        match scrutinee.as_ref() {
            Value::FlatIntro(inner) => {
                self.tick()?;
                self.apply_closure(&body, std::slice::from_ref(inner))
            }
            Value::Neutral(n) => {
                let mut n = n.clone();
                n.spine.push(Elim::FlatLet {
                    binder,
                    motive_binder,
                    motive,
                    body,
                });
                Ok(Value::Neutral(n).rc())
            }
            other => Err(EvalError::Internal(format!(
                "letflat on a non-flat value: {:?}",
                value_head_name(other)
            ))),
        }
    }

    /// Completes a constant-headed neutral, firing the first matching
    /// rewrite rule if any. Variable-headed neutrals never rewrite.
    fn finish_neutral(&self, neutral: Neutral) -> Result<RValue, EvalError> {
        let head_name = match &neutral.head {
            Head::Const(c) => c.clone(),
            Head::Var(_) => return Ok(Value::Neutral(neutral).rc()),
        };
        let rules = self.env.rewrites_for(&head_name);
        if rules.is_empty() {
            return Ok(Value::Neutral(neutral).rc());
        }
        if let Some((rule, bindings)) = match_rewrite(rules, &neutral.spine) {
            self.tick()?;
            let arity = rule.lhs.args.len();
            let mut value = self.eval(&Env(bindings), &rule.rhs)?;
            for elim in &neutral.spine[arity..] {
                value = self.apply_elim(value, elim.clone())?;
            }
            Ok(value)
        } else {
            Ok(Value::Neutral(neutral).rc())
        }
    }

    fn apply_elim(&self, v: RValue, elim: Elim) -> Result<RValue, EvalError> {
        match elim {
            Elim::App(arg) => self.apply(v, arg),
            Elim::Fst => self.project_fst(v),
            Elim::Snd => self.project_snd(v),
            Elim::SharpElim => self.sharp_elim(v),
            Elim::J {
                motive_binders,
                motive,
                base_binder,
                base,
                lhs,
                rhs,
            } => self.eliminate_j(motive_binders, motive, base_binder, base, lhs, rhs, v),
            Elim::FlatLet {
                binder,
                motive_binder,
                motive,
                body,
            } => self.flat_let(binder, motive_binder, motive, v, body),
        }
    }

    /// Evaluates an open term under the identity valuation of a telescope
    /// with `depth` entries.
    pub fn eval_open(&self, depth: usize, t: &Term) -> Result<RValue, EvalError> {
        self.eval(&Env::identity(depth), t)
    }

    fn quote_closure(&self, depth: usize, closure: &Closure, arity: usize) -> Result<Term, EvalError> {
        let args: Vec<RValue> = (0..arity).map(|k| Value::fresh(depth + k)).collect();
        let v = self.apply_closure(closure, &args)?;
        self.quote(depth + arity, &v)
    }

    /// Reads a value back to a beta-normal, sharp-contracted term.
    pub fn quote(&self, depth: usize, v: &Value) -> Result<Term, EvalError> {
        match v {
            Value::Universe(l) => Ok(Term::Universe(*l)),
            Value::Pi {
                binder,
                domain,
                codomain,
            } => Ok(Term::Pi {
                binder: binder.clone(),
                domain: self.quote(depth, domain)?.rc(),
                codomain: self.quote_closure(depth, codomain, 1)?.rc(),
            }),
            Value::Lam { binder, body } => Ok(Term::Lam {
                binder: binder.clone(),
                body: self.quote_closure(depth, body, 1)?.rc(),
            }),
            Value::Sigma {
                binder,
                first,
                second,
            } => Ok(Term::Sigma {
                binder: binder.clone(),
                first: self.quote(depth, first)?.rc(),
                second: self.quote_closure(depth, second, 1)?.rc(),
            }),
            Value::Pair { fst, snd } => Ok(Term::Pair {
                fst: self.quote(depth, fst)?.rc(),
                snd: self.quote(depth, snd)?.rc(),
            }),
            Value::Unit => Ok(Term::Unit),
            Value::Star => Ok(Term::Star),
            Value::IdType { ty, lhs, rhs } => Ok(Term::IdType {
                ty: self.quote(depth, ty)?.rc(),
                lhs: self.quote(depth, lhs)?.rc(),
                rhs: self.quote(depth, rhs)?.rc(),
            }),
            Value::Refl(p) => Ok(Term::Refl(self.quote(depth, p)?.rc())),
            Value::SharpTy(a) => Ok(Term::SharpTy(self.quote(depth, a)?.rc())),
            Value::SharpIntro(a) => Ok(Term::SharpIntro(self.quote(depth, a)?.rc())),
            Value::FlatTy(a) => Ok(Term::FlatTy(self.quote(depth, a)?.rc())),
            Value::FlatIntro(a) => Ok(Term::FlatIntro(self.quote(depth, a)?.rc())),
            Value::Neutral(n) => self.quote_neutral(depth, n),
        }
    }

    fn quote_neutral(&self, depth: usize, n: &Neutral) -> Result<Term, EvalError> {
        let mut t = match &n.head {
            Head::Var(level) => {
                if *level >= depth {
                    return Err(EvalError::Internal(format!(
                        "variable level {} escapes depth {}",
                        level, depth
                    )));
                }
                Term::Var(depth - 1 - level)
            }
            Head::Const(name) => Term::Const(name.clone()),
        };
        for elim in &n.spine {
            t = match elim {
                Elim::App(arg) => Term::App {
                    fun: t.rc(),
                    arg: self.quote(depth, arg)?.rc(),
                },
                Elim::Fst => Term::Fst(t.rc()),
                Elim::Snd => Term::Snd(t.rc()),
                Elim::SharpElim => Term::SharpElim(t.rc()),
                Elim::J {
                    motive_binders,
                    motive,
                    base_binder,
                    base,
                    lhs,
                    rhs,
                } => Term::J {
                    motive_binders: motive_binders.clone(),
                    motive: self.quote_closure(depth, motive, 3)?.rc(),
                    base_binder: base_binder.clone(),
                    base: self.quote_closure(depth, base, 1)?.rc(),
                    lhs: self.quote(depth, lhs)?.rc(),
                    rhs: self.quote(depth, rhs)?.rc(),
                    proof: t.rc(),
                },
                Elim::FlatLet {
                    binder,
                    motive_binder,
                    motive,
                    body,
                } => Term::FlatLet {
                    binder: binder.clone(),
                    motive_binder: motive_binder.clone(),
                    motive: self.quote_closure(depth, motive, 1)?.rc(),
                    scrutinee: t.rc(),
                    body: self.quote_closure(depth, body, 1)?.rc(),
                },
            };
        }
        Ok(t)
    }

    /// Full normal form of an open term over `depth` entries.
    pub fn normalize(&self, depth: usize, t: &Term) -> Result<Term, EvalError> {
        let v = self.eval_open(depth, t)?;
        self.quote(depth, &v)
    }

    /// Conversion between two open terms at a common (already checked)
    /// type. Type-directed at function types so that eta holds for
    /// functions; structural on weak-head forms elsewhere.
    pub fn convertible_at(
        &self,
        depth: usize,
        t1: &Term,
        t2: &Term,
        ty: &Term,
    ) -> Result<bool, EvalError> {
        let v1 = self.eval_open(depth, t1)?;
        let v2 = self.eval_open(depth, t2)?;
        let ty = self.eval_open(depth, ty)?;
        self.conv_at(depth, &v1, &v2, &ty)
    }

    /// Conversion without a type annotation; eta for functions is still
    /// honored whenever either side is a lambda.
    pub fn convertible(&self, depth: usize, t1: &Term, t2: &Term) -> Result<bool, EvalError> {
        let v1 = self.eval_open(depth, t1)?;
        let v2 = self.eval_open(depth, t2)?;
        self.conv(depth, &v1, &v2)
    }

    pub fn conv_at(
        &self,
        depth: usize,
        v1: &RValue,
        v2: &RValue,
        ty: &RValue,
    ) -> Result<bool, EvalError> {
        match ty.as_ref() {
            Value::Pi { codomain, .. } => {
                let fresh = Value::fresh(depth);
                let b1 = self.apply(v1.clone(), fresh.clone())?;
                let b2 = self.apply(v2.clone(), fresh.clone())?;
                let bty = self.apply_closure(codomain, &[fresh])?;
                self.conv_at(depth + 1, &b1, &b2, &bty)
            }
            Value::Sigma { first, second, .. } => {
                let f1 = self.project_fst(v1.clone())?;
                let f2 = self.project_fst(v2.clone())?;
                if !self.conv_at(depth, &f1, &f2, first)? {
                    return Ok(false);
                }
                let s1 = self.project_snd(v1.clone())?;
                let s2 = self.project_snd(v2.clone())?;
                let sty = self.apply_closure(second, &[f1])?;
                self.conv_at(depth, &s1, &s2, &sty)
            }
            _ => self.conv(depth, v1, v2),
        }
    }

    pub fn conv(&self, depth: usize, v1: &RValue, v2: &RValue) -> Result<bool, EvalError> {
        match (v1.as_ref(), v2.as_ref()) {
            (Value::Universe(l1), Value::Universe(l2)) => Ok(l1 == l2),
            (
                Value::Pi {
                    domain: d1,
                    codomain: c1,
                    ..
                },
                Value::Pi {
                    domain: d2,
                    codomain: c2,
                    ..
                },
            ) => {
                if !self.conv(depth, d1, d2)? {
                    return Ok(false);
                }
                self.conv_closures(depth, c1, c2, 1)
            }
            (
                Value::Sigma {
                    first: f1,
                    second: s1,
                    ..
                },
                Value::Sigma {
                    first: f2,
                    second: s2,
                    ..
                },
            ) => {
                if !self.conv(depth, f1, f2)? {
                    return Ok(false);
                }
                self.conv_closures(depth, s1, s2, 1)
            }
            // Eta for functions: a lambda converts to anything applicable.
            (Value::Lam { .. }, _) | (_, Value::Lam { .. }) => {
                let applicable =
                    |v: &Value| matches!(v, Value::Lam { .. } | Value::Neutral(_));
                if !applicable(v1) || !applicable(v2) {
                    return Ok(false);
                }
                let fresh = Value::fresh(depth);
                let b1 = self.apply(v1.clone(), fresh.clone())?;
                let b2 = self.apply(v2.clone(), fresh)?;
                self.conv(depth + 1, &b1, &b2)
            }
            (Value::Pair { fst: a1, snd: b1 }, Value::Pair { fst: a2, snd: b2 }) => {
                Ok(self.conv(depth, a1, a2)? && self.conv(depth, b1, b2)?)
            }
            (Value::Unit, Value::Unit) | (Value::Star, Value::Star) => Ok(true),
            (
                Value::IdType {
                    ty: t1,
                    lhs: l1,
                    rhs: r1,
                },
                Value::IdType {
                    ty: t2,
                    lhs: l2,
                    rhs: r2,
                },
            ) => Ok(self.conv(depth, t1, t2)?
                && self.conv(depth, l1, l2)?
                && self.conv(depth, r1, r2)?),
            (Value::Refl(p1), Value::Refl(p2)) => self.conv(depth, p1, p2),
            (Value::SharpTy(a1), Value::SharpTy(a2))
            | (Value::FlatTy(a1), Value::FlatTy(a2))
            | (Value::SharpIntro(a1), Value::SharpIntro(a2))
            | (Value::FlatIntro(a1), Value::FlatIntro(a2)) => self.conv(depth, a1, a2),
            // Uniqueness for sharp: an introduction equals a stuck value
            // of sharp type exactly when eliminating both sides agrees.
            (Value::SharpIntro(a), Value::Neutral(n)) | (Value::Neutral(n), Value::SharpIntro(a)) => {
                let mut extended = n.clone();
                extended.spine.push(Elim::SharpElim);
                self.conv(depth, a, &Value::Neutral(extended).rc())
            }
            (Value::Neutral(n1), Value::Neutral(n2)) => self.conv_neutral(depth, n1, n2),
            _ => Ok(false),
        }
    }

    fn conv_closures(
        &self,
        depth: usize,
        c1: &Closure,
        c2: &Closure,
        arity: usize,
    ) -> Result<bool, EvalError> {
        let args: Vec<RValue> = (0..arity).map(|k| Value::fresh(depth + k)).collect();
        let b1 = self.apply_closure(c1, &args)?;
        let b2 = self.apply_closure(c2, &args)?;
        self.conv(depth + arity, &b1, &b2)
    }

    fn conv_neutral(&self, depth: usize, n1: &Neutral, n2: &Neutral) -> Result<bool, EvalError> {
        let heads_match = match (&n1.head, &n2.head) {
            (Head::Var(l1), Head::Var(l2)) => l1 == l2,
            (Head::Const(c1), Head::Const(c2)) => c1 == c2,
            _ => false,
        };
        if !heads_match || n1.spine.len() != n2.spine.len() {
            return Ok(false);
        }
        for (e1, e2) in n1.spine.iter().zip(&n2.spine) {
            let same = match (e1, e2) {
                (Elim::App(a1), Elim::App(a2)) => self.conv(depth, a1, a2)?,
                (Elim::Fst, Elim::Fst)
                | (Elim::Snd, Elim::Snd)
                | (Elim::SharpElim, Elim::SharpElim) => true,
                (
                    Elim::J {
                        motive: m1,
                        base: b1,
                        lhs: l1,
                        rhs: r1,
                        ..
                    },
                    Elim::J {
                        motive: m2,
                        base: b2,
                        lhs: l2,
                        rhs: r2,
                        ..
                    },
                ) => {
                    self.conv_closures(depth, m1, m2, 3)?
                        && self.conv_closures(depth, b1, b2, 1)?
                        && self.conv(depth, l1, l2)?
                        && self.conv(depth, r1, r2)?
                }
                (
                    Elim::FlatLet {
                        motive: m1,
                        body: b1,
                        ..
                    },
                    Elim::FlatLet {
                        motive: m2,
                        body: b2,
                        ..
                    },
                ) => {
                    self.conv_closures(depth, m1, m2, 1)?
                        && self.conv_closures(depth, b1, b2, 1)?
                }
                _ => false,
            };
            if !same {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn value_head_name(v: &Value) -> &'static str {
    match v {
        Value::Universe(_) => "universe",
        Value::Pi { .. } => "pi",
        Value::Lam { .. } => "lambda",
        Value::Sigma { .. } => "sigma",
        Value::Pair { .. } => "pair",
        Value::Unit => "unit",
        Value::Star => "star",
        Value::IdType { .. } => "identity type",
        Value::Refl(_) => "refl",
        Value::SharpTy(_) => "sharp type",
        Value::SharpIntro(_) => "sharp intro",
        Value::FlatTy(_) => "flat type",
        Value::FlatIntro(_) => "flat intro",
        Value::Neutral(_) => "neutral",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Environment, DEFAULT_FUEL};
    use crate::syntax::Term as T;

    fn env_with(source: &str) -> Environment {
        let mut env = Environment::new();
        let decls = crate::parser::parse_module(source, "<test>").expect("parse");
        let located = crate::parser::resolve(&decls, &|n| env.contains(n)).expect("resolve");
        for d in located {
            env.declare(&d.decl, DEFAULT_FUEL).expect("declaration checks");
        }
        env
    }

    fn norm<'a>(env: &'a Environment) -> Normalizer<'a> {
        Normalizer::new(env, DEFAULT_FUEL)
    }

    fn nf(env: &Environment, t: &T) -> T {
        norm(env).normalize(0, t).expect("normalizes")
    }

    fn conv(env: &Environment, a: &T, b: &T) -> bool {
        norm(env).convertible(0, a, b).expect("conversion runs")
    }

    #[test]
    fn beta_for_functions() {
        let env = Environment::new();
        let t = T::app(T::lam("x", T::var(0)), T::Star);
        assert_eq!(nf(&env, &t), T::Star);
    }

    #[test]
    fn sharp_computation_rule() {
        // (c^sharp)_sharp evaluates to c for a closed constant.
        let env = env_with("postulate A : Type 0 postulate c : A");
        let t = T::sharp_elim(T::sharp_intro(T::cst("c")));
        assert_eq!(nf(&env, &t), T::cst("c"));
    }

    #[test]
    fn sharp_uniqueness_holds_in_conversion() {
        // (m_sharp)^sharp is convertible to m for a postulated
        // m : Sharp A, but the normal form keeps the introduction: the
        // contraction could escape the promotion that typed it.
        let env = env_with("postulate A : Type 0 postulate m : Sharp A");
        let t = T::sharp_intro(T::sharp_elim(T::cst("m")));
        assert!(conv(&env, &t, &T::cst("m")));
        assert_eq!(nf(&env, &t), t);
    }

    #[test]
    fn flat_beta() {
        // letflat u := c^flat motive _. A in u evaluates to c.
        let env = env_with("postulate A : Type 0 postulate c : A");
        let t = T::flat_let(
            "u",
            "_",
            T::cst("A"),
            T::flat_intro(T::cst("c")),
            T::var(0),
        );
        assert_eq!(nf(&env, &t), T::cst("c"));
    }

    #[test]
    fn flat_let_sticks_on_neutral() {
        // letflat over a postulated scrutinee stays stuck.
        let env = env_with("postulate A : Type 0 postulate m : Flat A");
        let t = T::flat_let("u", "_", T::cst("A"), T::cst("m"), T::var(0));
        assert_eq!(nf(&env, &t), t);
    }

    #[test]
    fn double_sharp_collapses_by_uniqueness_twice() {
        // z_sharp_sharp^sharp^sharp is judgmentally z for z : Sharp (Sharp A).
        let env = env_with("postulate A : Type 0 postulate z : Sharp (Sharp A)");
        let t = T::sharp_intro(T::sharp_intro(T::sharp_elim(T::sharp_elim(T::cst("z")))));
        assert!(conv(&env, &t, &T::cst("z")));
    }

    #[test]
    fn computation_then_uniqueness_chain() {
        // y^sharp_sharp_sharp^sharp is judgmentally y for y : Sharp A.
        let env = env_with("postulate A : Type 0 postulate y : Sharp A");
        let t = T::sharp_intro(T::sharp_elim(T::sharp_elim(T::sharp_intro(T::cst("y")))));
        assert!(conv(&env, &t, &T::cst("y")));
    }

    const FUNCTOR_SRC: &str = "postulate A : Type 0
postulate B : Type 0
postulate C : Type 0
postulate f : A -> B
postulate g : B -> C
postulate u : Sharp A
postulate x : A
def sharp_map : (X : Type 0) -> (Y : Type 0) -> (X -> Y) -> Sharp X -> Sharp Y := fun X. fun Y. fun h. fun w. (h (w _sharp)) ^sharp
def compose : (X : Type 0) -> (Y : Type 0) -> (Z : Type 0) -> (Y -> Z) -> (X -> Y) -> X -> Z := fun X. fun Y. fun Z. fun h. fun k. fun a. h (k a)";

    #[test]
    fn sharp_functoriality_is_judgmental() {
        let env = env_with(FUNCTOR_SRC);
        let lhs = T::apps(
            T::cst("sharp_map"),
            [
                T::cst("B"),
                T::cst("C"),
                T::cst("g"),
                T::apps(
                    T::cst("sharp_map"),
                    [T::cst("A"), T::cst("B"), T::cst("f"), T::cst("u")],
                ),
            ],
        );
        let rhs = T::apps(
            T::cst("sharp_map"),
            [
                T::cst("A"),
                T::cst("C"),
                T::apps(
                    T::cst("compose"),
                    [T::cst("A"), T::cst("B"), T::cst("C"), T::cst("g"), T::cst("f")],
                ),
                T::cst("u"),
            ],
        );
        assert!(conv(&env, &lhs, &rhs));
    }

    #[test]
    fn sharp_naturality_is_judgmental() {
        let env = env_with(FUNCTOR_SRC);
        let lhs = T::apps(
            T::cst("sharp_map"),
            [
                T::cst("A"),
                T::cst("B"),
                T::cst("f"),
                T::sharp_intro(T::cst("x")),
            ],
        );
        let rhs = T::sharp_intro(T::app(T::cst("f"), T::cst("x")));
        assert!(conv(&env, &lhs, &rhs));
    }

    #[test]
    fn distinct_postulates_are_not_convertible() {
        let env = env_with("postulate A : Type 0 postulate a : A postulate b : A");
        assert!(!conv(&env, &T::cst("a"), &T::cst("b")));
    }

    #[test]
    fn eta_for_functions() {
        let env = env_with("postulate A : Type 0 postulate f : A -> A");
        let expanded = T::lam("x", T::app(T::cst("f"), T::var(0)));
        assert!(conv(&env, &T::cst("f"), &expanded));
    }

    #[test]
    fn no_eta_for_flat() {
        // letflat u := x motive _. Flat A in u^flat is NOT convertible to a
        // neutral x.
        let env = env_with("postulate A : Type 0 postulate x : Flat A");
        let expanded = T::flat_let(
            "u",
            "_",
            T::flat_ty(T::cst("A")),
            T::cst("x"),
            T::flat_intro(T::var(0)),
        );
        assert!(!conv(&env, &expanded, &T::cst("x")));
    }

    #[test]
    fn normalize_is_idempotent_on_stuck_letflat() {
        let env = env_with("postulate A : Type 0 postulate x : Flat A");
        let t = T::flat_let(
            "u",
            "_",
            T::flat_ty(T::cst("A")),
            T::cst("x"),
            T::flat_intro(T::var(0)),
        );
        let once = nf(&env, &t);
        let twice = nf(&env, &once);
        assert_eq!(once, twice);
    }

    const NAT_SRC: &str = "postulate Nat : Type 0
postulate zero : Nat
postulate suc : Nat -> Nat
postulate natrec : (C : Nat -> Type 0) -> C zero -> ((n : Nat) -> C n -> C (suc n)) -> (n : Nat) -> C n
rewrite natrec_zero : natrec C z s zero => z
rewrite natrec_suc : natrec C z s (suc n) => s n (natrec C z s n)
def plus : Nat -> Nat -> Nat := fun m. fun n. natrec (fun _. Nat) n (fun _. fun acc. suc acc) m";

    fn church(n: usize) -> T {
        let mut t = T::cst("zero");
        for _ in 0..n {
            t = T::app(T::cst("suc"), t);
        }
        t
    }

    #[test]
    fn recursor_computes_addition() {
        let env = env_with(NAT_SRC);
        let t = T::apps(T::cst("plus"), [church(2), church(3)]);
        assert_eq!(nf(&env, &t), church(5));
    }

    #[test]
    fn recursor_sticks_on_neutral_argument() {
        let env = env_with(NAT_SRC);
        let mut env2 = env.clone();
        let decls = crate::parser::parse_module("postulate w : Nat", "<t>").unwrap();
        let located = crate::parser::resolve(&decls, &|n| env2.contains(n)).unwrap();
        for d in located {
            env2.declare(&d.decl, DEFAULT_FUEL).unwrap();
        }
        let t = T::apps(T::cst("plus"), [T::cst("w"), church(1)]);
        let normal = nf(&env2, &t);
        // natrec is stuck on w: the head constant survives.
        match &normal {
            T::App { fun, .. } => {
                let mut head = fun.as_ref();
                while let T::App { fun, .. } = head {
                    head = fun.as_ref();
                }
                assert_eq!(*head, T::cst("natrec"));
            }
            other => panic!("expected stuck application, got {:?}", other),
        }
    }

    #[test]
    fn match_rewrite_binds_constructor_argument() {
        let env = env_with(NAT_SRC);
        let n = norm(&env);
        // Evaluate natrec C z s (suc (suc zero)) far enough to check the
        // match itself.
        let rules = env.rewrites_for(&std::sync::Arc::from("natrec"));
        assert_eq!(rules.len(), 2);
        let two = n.eval(&Env::new(), &church(2)).unwrap();
        let spine = vec![
            Elim::App(Value::fresh(0)),
            Elim::App(Value::fresh(1)),
            Elim::App(Value::fresh(2)),
            Elim::App(two),
        ];
        let (rule, bindings) = match_rewrite(rules, &spine).expect("matches");
        assert_eq!(&*rule.name, "natrec_suc");
        assert_eq!(bindings.len(), 4);
        // The last binding is the predecessor: suc zero.
        let pred = n.quote(3, &bindings[3]).unwrap();
        assert_eq!(pred, church(1));
    }

    #[test]
    fn match_rewrite_rejects_neutral_scrutinee() {
        let env = env_with(NAT_SRC);
        let rules = env.rewrites_for(&std::sync::Arc::from("natrec"));
        let spine = vec![
            Elim::App(Value::fresh(0)),
            Elim::App(Value::fresh(1)),
            Elim::App(Value::fresh(2)),
            Elim::App(Value::fresh(3)),
        ];
        assert!(match_rewrite(rules, &spine).is_none());
    }

    #[test]
    fn overlapping_rules_fire_in_declaration_order() {
        let env = env_with(
            "postulate A : Type 0
postulate a : A
postulate b : A
postulate pick : A -> A
rewrite pick_first : pick x => a
rewrite pick_second : pick x => b",
        );
        let t = T::app(T::cst("pick"), T::cst("b"));
        assert_eq!(nf(&env, &t), T::cst("a"));
    }

    #[test]
    fn j_computes_on_refl() {
        let env = env_with("postulate A : Type 0 postulate a : A");
        // J (x.y.p. A) (x. x) a a (refl a) evaluates to a.
        let t = T::J {
            motive_binders: [
                crate::syntax::Binder::new("x"),
                crate::syntax::Binder::new("y"),
                crate::syntax::Binder::new("p"),
            ],
            motive: T::cst("A").rc(),
            base_binder: crate::syntax::Binder::new("x"),
            base: T::var(0).rc(),
            lhs: T::cst("a").rc(),
            rhs: T::cst("a").rc(),
            proof: T::refl(T::cst("a")).rc(),
        };
        assert_eq!(nf(&env, &t), T::cst("a"));
    }

    #[test]
    fn quote_of_open_neutral() {
        let env = Environment::new();
        let n = norm(&env);
        let v = n
            .apply(Value::fresh(0), Value::Star.rc())
            .unwrap();
        let t = n.quote(1, &v).unwrap();
        assert_eq!(t, T::app(T::var(0), T::Star));
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        // A deliberately looping rewrite runs out of fuel instead of
        // diverging.
        let env = env_with(
            "postulate A : Type 0
postulate loop : A -> A
rewrite loop_loop : loop x => loop x",
        );
        let small = Normalizer::new(&env, 200);
        let t = T::app(T::cst("loop"), T::cst("loop"));
        match small.eval(&Env::new(), &T::app(T::cst("loop"), t)) {
            Err(EvalError::FuelExhausted) => {}
            other => panic!("expected fuel exhaustion, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn conversion_is_an_equivalence_on_samples() {
        let env = env_with(FUNCTOR_SRC);
        let samples = [
            T::cst("x"),
            T::app(T::cst("f"), T::cst("x")),
            T::sharp_intro(T::cst("x")),
            T::apps(
                T::cst("sharp_map"),
                [T::cst("A"), T::cst("B"), T::cst("f"), T::cst("u")],
            ),
        ];
        for a in &samples {
            assert!(conv(&env, a, a), "reflexive on {:?}", a);
            for b in &samples {
                assert_eq!(conv(&env, a, b), conv(&env, b, a), "symmetric");
                for c in &samples {
                    if conv(&env, a, b) && conv(&env, b, c) {
                        assert!(conv(&env, a, c), "transitive");
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod spine_tests {
    use super::*;
    use crate::kernel::{Environment, DEFAULT_FUEL};
    use crate::syntax::Term as T;

    #[test]
    fn rewrite_fires_under_a_longer_spine() {
        // The recursor returns a function; the rule matches on the prefix
        // and the remaining application is replayed onto the result.
        let mut env = Environment::new();
        let src = "postulate Nat : Type 0
postulate zero : Nat
postulate suc : Nat -> Nat
postulate natrec : (C : Nat -> Type 0) -> C zero -> ((n : Nat) -> C n -> C (suc n)) -> (n : Nat) -> C n
rewrite natrec_zero : natrec C z s zero => z
rewrite natrec_suc : natrec C z s (suc n) => s n (natrec C z s n)
def swallow : Nat -> Nat -> Nat := natrec (fun m. Nat -> Nat) (fun y. y) (fun n. fun acc. fun y. acc y)";
        let decls = crate::parser::parse_module(src, "<t>").unwrap();
        let located = crate::parser::resolve(&decls, &|n| env.contains(n)).unwrap();
        for d in located {
            env.declare(&d.decl, DEFAULT_FUEL).unwrap();
        }
        let norm = Normalizer::new(&env, DEFAULT_FUEL);
        let two = T::app(T::cst("suc"), T::app(T::cst("suc"), T::cst("zero")));
        let three = T::app(T::cst("suc"), two.clone());
        // swallow 2 3: the natrec spine carries the extra argument.
        let t = T::apps(T::cst("swallow"), [two, three.clone()]);
        assert_eq!(norm.normalize(0, &t).unwrap(), three);
    }
}
