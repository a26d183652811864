//! Core term language: de Bruijn syntax, polarity-flagged telescopes,
//! declarations, and the raw structural operations (shift, substitution,
//! free variables).
//!
//! Binder names are display-only. [`Binder`] compares equal to everything,
//! so derived equality on [`Term`] is structural and alpha-insensitive.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Name = Arc<str>;
pub type RTerm = Arc<Term>;

/// A universe index. `Type i` inhabits `Type (i+1)`; the hierarchy is
/// explicit, predicative, and non-cumulative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Level(pub u32);

impl Level {
    pub fn succ(self) -> Level {
        Level(self.0 + 1)
    }
    pub fn max(self, other: Level) -> Level {
        Level(self.0.max(other.0))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Display name attached to a binder. Irrelevant for equality.
#[derive(Clone)]
pub struct Binder(pub Name);

impl Binder {
    pub fn new(name: &str) -> Binder {
        Binder(Arc::from(name))
    }
    pub fn anon() -> Binder {
        Binder(Arc::from("_"))
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Binder {
    fn eq(&self, _other: &Binder) -> bool {
        true
    }
}
impl Eq for Binder {}

impl fmt::Debug for Binder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Whether a hypothesis may be used discontinuously (`crisp`, written
/// `x :: A`) or only continuously (`cohesive`, written `x : A`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Crisp,
    Cohesive,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Crisp => write!(f, "crisp"),
            Polarity::Cohesive => write!(f, "cohesive"),
        }
    }
}

/// Core terms. Every binder is cohesive except the body binder of
/// [`Term::FlatLet`], which is crisp; there is no crisp lambda.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(usize),
    Const(Name),
    Universe(Level),
    Pi {
        binder: Binder,
        domain: RTerm,
        codomain: RTerm,
    },
    Lam {
        binder: Binder,
        body: RTerm,
    },
    App {
        fun: RTerm,
        arg: RTerm,
    },
    Sigma {
        binder: Binder,
        first: RTerm,
        second: RTerm,
    },
    Pair {
        fst: RTerm,
        snd: RTerm,
    },
    Fst(RTerm),
    Snd(RTerm),
    IdType {
        ty: RTerm,
        lhs: RTerm,
        rhs: RTerm,
    },
    Refl(RTerm),
    /// Fully annotated identity eliminator. `motive` binds three cohesive
    /// variables (left endpoint, right endpoint, proof); `base` binds one.
    J {
        motive_binders: [Binder; 3],
        motive: RTerm,
        base_binder: Binder,
        base: RTerm,
        lhs: RTerm,
        rhs: RTerm,
        proof: RTerm,
    },
    Unit,
    Star,
    SharpTy(RTerm),
    SharpIntro(RTerm),
    SharpElim(RTerm),
    FlatTy(RTerm),
    FlatIntro(RTerm),
    /// `letflat u := scrutinee motive x. C in body`. The motive binds one
    /// cohesive variable of flat type; the body binds one crisp variable.
    FlatLet {
        binder: Binder,
        motive_binder: Binder,
        motive: RTerm,
        scrutinee: RTerm,
        body: RTerm,
    },
}

impl Term {
    pub fn rc(self) -> RTerm {
        Arc::new(self)
    }

    pub fn var(i: usize) -> Term {
        Term::Var(i)
    }

    pub fn cst(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    pub fn universe(l: u32) -> Term {
        Term::Universe(Level(l))
    }

    pub fn pi(name: &str, domain: Term, codomain: Term) -> Term {
        Term::Pi {
            binder: Binder::new(name),
            domain: domain.rc(),
            codomain: codomain.rc(),
        }
    }

    pub fn arrow(domain: Term, codomain: Term) -> Term {
        Term::pi("_", domain, shift(&codomain, 1))
    }

    pub fn lam(name: &str, body: Term) -> Term {
        Term::Lam {
            binder: Binder::new(name),
            body: body.rc(),
        }
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App {
            fun: fun.rc(),
            arg: arg.rc(),
        }
    }

    pub fn apps(fun: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    pub fn sigma(name: &str, first: Term, second: Term) -> Term {
        Term::Sigma {
            binder: Binder::new(name),
            first: first.rc(),
            second: second.rc(),
        }
    }

    pub fn pair(fst: Term, snd: Term) -> Term {
        Term::Pair {
            fst: fst.rc(),
            snd: snd.rc(),
        }
    }

    pub fn id_type(ty: Term, lhs: Term, rhs: Term) -> Term {
        Term::IdType {
            ty: ty.rc(),
            lhs: lhs.rc(),
            rhs: rhs.rc(),
        }
    }

    pub fn refl(point: Term) -> Term {
        Term::Refl(point.rc())
    }

    pub fn sharp_ty(inner: Term) -> Term {
        Term::SharpTy(inner.rc())
    }

    pub fn sharp_intro(inner: Term) -> Term {
        Term::SharpIntro(inner.rc())
    }

    pub fn sharp_elim(inner: Term) -> Term {
        Term::SharpElim(inner.rc())
    }

    pub fn flat_ty(inner: Term) -> Term {
        Term::FlatTy(inner.rc())
    }

    pub fn flat_intro(inner: Term) -> Term {
        Term::FlatIntro(inner.rc())
    }

    pub fn flat_let(binder: &str, motive_binder: &str, motive: Term, scrutinee: Term, body: Term) -> Term {
        Term::FlatLet {
            binder: Binder::new(binder),
            motive_binder: Binder::new(motive_binder),
            motive: motive.rc(),
            scrutinee: scrutinee.rc(),
            body: body.rc(),
        }
    }
}

/// Applies `f` to every free variable occurrence. `f(index, cutoff)` is
/// called for occurrences with `index >= cutoff`, where `cutoff` counts the
/// binders crossed, and must return a replacement term valid at that depth.
fn map_free(t: &Term, cutoff: usize, f: &impl Fn(usize, usize) -> Term) -> Term {
    match t {
        Term::Var(i) => {
            if *i >= cutoff {
                f(*i, cutoff)
            } else {
                Term::Var(*i)
            }
        }
        Term::Const(_) | Term::Universe(_) | Term::Unit | Term::Star => t.clone(),
        Term::Pi {
            binder,
            domain,
            codomain,
        } => Term::Pi {
            binder: binder.clone(),
            domain: map_free(domain, cutoff, f).rc(),
            codomain: map_free(codomain, cutoff + 1, f).rc(),
        },
        Term::Lam { binder, body } => Term::Lam {
            binder: binder.clone(),
            body: map_free(body, cutoff + 1, f).rc(),
        },
        Term::App { fun, arg } => Term::App {
            fun: map_free(fun, cutoff, f).rc(),
            arg: map_free(arg, cutoff, f).rc(),
        },
        Term::Sigma {
            binder,
            first,
            second,
        } => Term::Sigma {
            binder: binder.clone(),
            first: map_free(first, cutoff, f).rc(),
            second: map_free(second, cutoff + 1, f).rc(),
        },
        Term::Pair { fst, snd } => Term::Pair {
            fst: map_free(fst, cutoff, f).rc(),
            snd: map_free(snd, cutoff, f).rc(),
        },
        Term::Fst(p) => Term::Fst(map_free(p, cutoff, f).rc()),
        Term::Snd(p) => Term::Snd(map_free(p, cutoff, f).rc()),
        Term::IdType { ty, lhs, rhs } => Term::IdType {
            ty: map_free(ty, cutoff, f).rc(),
            lhs: map_free(lhs, cutoff, f).rc(),
            rhs: map_free(rhs, cutoff, f).rc(),
        },
        Term::Refl(p) => Term::Refl(map_free(p, cutoff, f).rc()),
        Term::J {
            motive_binders,
            motive,
            base_binder,
            base,
            lhs,
            rhs,
            proof,
        } => Term::J {
            motive_binders: motive_binders.clone(),
            motive: map_free(motive, cutoff + 3, f).rc(),
            base_binder: base_binder.clone(),
            base: map_free(base, cutoff + 1, f).rc(),
            lhs: map_free(lhs, cutoff, f).rc(),
            rhs: map_free(rhs, cutoff, f).rc(),
            proof: map_free(proof, cutoff, f).rc(),
        },
        Term::SharpTy(a) => Term::SharpTy(map_free(a, cutoff, f).rc()),
        Term::SharpIntro(a) => Term::SharpIntro(map_free(a, cutoff, f).rc()),
        Term::SharpElim(a) => Term::SharpElim(map_free(a, cutoff, f).rc()),
        Term::FlatTy(a) => Term::FlatTy(map_free(a, cutoff, f).rc()),
        Term::FlatIntro(a) => Term::FlatIntro(map_free(a, cutoff, f).rc()),
        Term::FlatLet {
            binder,
            motive_binder,
            motive,
            scrutinee,
            body,
        } => Term::FlatLet {
            binder: binder.clone(),
            motive_binder: motive_binder.clone(),
            motive: map_free(motive, cutoff + 1, f).rc(),
            scrutinee: map_free(scrutinee, cutoff, f).rc(),
            body: map_free(body, cutoff + 1, f).rc(),
        },
    }
}

/// Displaces free variables with index `>= cutoff` by `amount`.
/// Panics on index underflow, which indicates a kernel bug.
pub fn shift_above(t: &Term, cutoff: usize, amount: i64) -> Term {
    map_free(t, cutoff, &|i, _depth| {
        let shifted = i as i64 + amount;
        if shifted < 0 {
            panic!("shift: de Bruijn index underflow ({} by {})", i, amount);
        }
        Term::Var(shifted as usize)
    })
}

pub fn shift(t: &Term, amount: i64) -> Term {
    shift_above(t, 0, amount)
}

/// Capture-avoiding substitution of `replacement` for `Var(target)`.
/// Other indices are left untouched (no lowering); use [`instantiate`]
/// for beta-style substitution under a binder.
pub fn subst(t: &Term, target: usize, replacement: &Term) -> Term {
    map_free(t, 0, &|i, depth| {
        if i == target + depth {
            shift(replacement, depth as i64)
        } else {
            Term::Var(i)
        }
    })
}

/// Substitutes `arg` for the bound variable of `body` (which binds one),
/// lowering the remaining free indices.
pub fn instantiate(body: &Term, arg: &Term) -> Term {
    let widened = shift(arg, 1);
    let replaced = subst(body, 0, &widened);
    shift(&replaced, -1)
}

/// Simultaneously instantiates a term binding `args.len()` variables.
/// Arguments are given in binder order (outermost first) and must be valid
/// in the ambient context outside all of the binders.
pub fn instantiate_many(body: &Term, args: &[&Term]) -> Term {
    let n = args.len();
    let mut result = body.clone();
    for k in 0..n {
        // Instantiate the innermost remaining binder; its argument still
        // sits under the binders that have not been discharged yet.
        let arg = args[n - 1 - k];
        let remaining = (n - 1 - k) as i64;
        result = instantiate(&result, &shift(arg, remaining));
    }
    result
}

/// The set of free de Bruijn indices.
pub fn free_vars(t: &Term) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    collect_free(t, 0, &mut out);
    out
}

fn collect_free(t: &Term, depth: usize, out: &mut BTreeSet<usize>) {
    match t {
        Term::Var(i) => {
            if *i >= depth {
                out.insert(*i - depth);
            }
        }
        Term::Const(_) | Term::Universe(_) | Term::Unit | Term::Star => {}
        Term::Pi {
            domain, codomain, ..
        } => {
            collect_free(domain, depth, out);
            collect_free(codomain, depth + 1, out);
        }
        Term::Lam { body, .. } => collect_free(body, depth + 1, out),
        Term::App { fun, arg } => {
            collect_free(fun, depth, out);
            collect_free(arg, depth, out);
        }
        Term::Sigma { first, second, .. } => {
            collect_free(first, depth, out);
            collect_free(second, depth + 1, out);
        }
        Term::Pair { fst, snd } => {
            collect_free(fst, depth, out);
            collect_free(snd, depth, out);
        }
        Term::Fst(p) | Term::Snd(p) => collect_free(p, depth, out),
        Term::IdType { ty, lhs, rhs } => {
            collect_free(ty, depth, out);
            collect_free(lhs, depth, out);
            collect_free(rhs, depth, out);
        }
        Term::Refl(p) => collect_free(p, depth, out),
        Term::J {
            motive,
            base,
            lhs,
            rhs,
            proof,
            ..
        } => {
            collect_free(motive, depth + 3, out);
            collect_free(base, depth + 1, out);
            collect_free(lhs, depth, out);
            collect_free(rhs, depth, out);
            collect_free(proof, depth, out);
        }
        Term::SharpTy(a)
        | Term::SharpIntro(a)
        | Term::SharpElim(a)
        | Term::FlatTy(a)
        | Term::FlatIntro(a) => collect_free(a, depth, out),
        Term::FlatLet {
            motive,
            scrutinee,
            body,
            ..
        } => {
            collect_free(motive, depth + 1, out);
            collect_free(scrutinee, depth, out);
            collect_free(body, depth + 1, out);
        }
    }
}

/// Renames every free variable through `f` (index in the ambient telescope,
/// not adjusted for binders). Used to re-map indices when cohesive entries
/// are stripped from a telescope.
pub fn rename_free(t: &Term, f: &impl Fn(usize) -> usize) -> Term {
    map_free(t, 0, &|i, depth| Term::Var(f(i - depth) + depth))
}

/// One telescope entry: a named hypothesis with its type and polarity.
/// A crisp entry's type may mention only crisp entries to its left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: Binder,
    pub ty: Term,
    pub polarity: Polarity,
}

impl Entry {
    pub fn crisp(name: &str, ty: Term) -> Entry {
        Entry {
            name: Binder::new(name),
            ty,
            polarity: Polarity::Crisp,
        }
    }
    pub fn cohesive(name: &str, ty: Term) -> Entry {
        Entry {
            name: Binder::new(name),
            ty,
            polarity: Polarity::Cohesive,
        }
    }
}

/// An ordered dependent context. Entry types are scoped over strictly
/// earlier entries; de Bruijn index 0 refers to the last entry.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Telescope {
    entries: Vec<Entry>,
}

impl Telescope {
    pub fn new() -> Telescope {
        Telescope {
            entries: Vec::new(),
        }
    }

    pub fn from_entries(entries: Vec<Entry>) -> Telescope {
        Telescope { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, entry: Entry) {
        self.entries.push(entry);
    }

    pub fn extended(&self, entry: Entry) -> Telescope {
        let mut t = self.clone();
        t.push(entry);
        t
    }

    /// The entry referred to by de Bruijn index `idx`.
    pub fn lookup(&self, idx: usize) -> Option<&Entry> {
        let n = self.entries.len();
        if idx < n {
            Some(&self.entries[n - 1 - idx])
        } else {
            None
        }
    }

    /// The type of `Var(idx)`, shifted into scope at the telescope's end.
    pub fn lookup_type(&self, idx: usize) -> Option<Term> {
        self.lookup(idx).map(|e| shift(&e.ty, idx as i64 + 1))
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }
}

/// First-order left-linear rewrite pattern: a postulate head applied to
/// pattern variables or constructor-headed atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternArg {
    Var(Name),
    Ctor { head: Name, vars: Vec<Name> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub head: Name,
    pub args: Vec<PatternArg>,
}

impl Pattern {
    /// Pattern variables in first-occurrence order (left to right).
    pub fn var_names(&self) -> Vec<Name> {
        let mut out = Vec::new();
        for arg in &self.args {
            match arg {
                PatternArg::Var(v) => out.push(v.clone()),
                PatternArg::Ctor { vars, .. } => out.extend(vars.iter().cloned()),
            }
        }
        out
    }

    pub fn is_left_linear(&self) -> bool {
        let names = self.var_names();
        let mut seen = BTreeSet::new();
        names.iter().all(|n| seen.insert(n.clone()))
    }
}

/// A top-level declaration of a module file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Declaration {
    Def { name: Name, ty: Term, body: Term },
    Postulate { name: Name, ty: Term },
    Rewrite { name: Name, lhs: Pattern, rhs: Term },
}

impl Declaration {
    pub fn name(&self) -> &Name {
        match self {
            Declaration::Def { name, .. }
            | Declaration::Postulate { name, .. }
            | Declaration::Rewrite { name, .. } => name,
        }
    }
}
