//! Shared test support: a naive named-variable term representation with
//! capture-avoiding substitution (the independent oracle for the de
//! Bruijn operations), random well-scoped term and telescope generators,
//! and corpus-loading helpers.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cohesive_kernel::kernel::{Diagnostic, DiagnosticCode, DEFAULT_FUEL};
use cohesive_kernel::syntax::{Binder, Entry, Polarity, Telescope, Term};
use cohesive_kernel::Environment;

use proptest::prelude::*;

// ---------------------------------------------------------------------
// Named-variable oracle
// ---------------------------------------------------------------------

/// Named mirror of the core syntax. Binders carry real names; equality is
/// fully structural (names included), so conversions must rename
/// consistently before comparing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NTerm {
    Var(String),
    Const(String),
    Universe(u32),
    Pi(String, Box<NTerm>, Box<NTerm>),
    Lam(String, Box<NTerm>),
    App(Box<NTerm>, Box<NTerm>),
    Sigma(String, Box<NTerm>, Box<NTerm>),
    Pair(Box<NTerm>, Box<NTerm>),
    Fst(Box<NTerm>),
    Snd(Box<NTerm>),
    IdType(Box<NTerm>, Box<NTerm>, Box<NTerm>),
    Refl(Box<NTerm>),
    J {
        motive_binders: [String; 3],
        motive: Box<NTerm>,
        base_binder: String,
        base: Box<NTerm>,
        lhs: Box<NTerm>,
        rhs: Box<NTerm>,
        proof: Box<NTerm>,
    },
    Unit,
    Star,
    SharpTy(Box<NTerm>),
    SharpIntro(Box<NTerm>),
    SharpElim(Box<NTerm>),
    FlatTy(Box<NTerm>),
    FlatIntro(Box<NTerm>),
    FlatLet {
        binder: String,
        motive_binder: String,
        motive: Box<NTerm>,
        scrutinee: Box<NTerm>,
        body: Box<NTerm>,
    },
}

fn fresh_name(counter: &mut usize) -> String {
    let name = format!("n{}", *counter);
    *counter += 1;
    name
}

/// Converts a de Bruijn term to the named representation. `scope` lists
/// the ambient names, outermost first; binder names are generated fresh
/// so the result is canonical for a given counter start.
pub fn to_named(t: &Term, scope: &mut Vec<String>, counter: &mut usize) -> NTerm {
    match t {
        Term::Var(i) => {
            let n = scope.len();
            NTerm::Var(scope[n - 1 - i].clone())
        }
        Term::Const(c) => NTerm::Const(c.to_string()),
        Term::Universe(l) => NTerm::Universe(l.0),
        Term::Pi {
            domain, codomain, ..
        } => {
            let d = to_named(domain, scope, counter);
            let name = fresh_name(counter);
            scope.push(name.clone());
            let c = to_named(codomain, scope, counter);
            scope.pop();
            NTerm::Pi(name, Box::new(d), Box::new(c))
        }
        Term::Lam { body, .. } => {
            let name = fresh_name(counter);
            scope.push(name.clone());
            let b = to_named(body, scope, counter);
            scope.pop();
            NTerm::Lam(name, Box::new(b))
        }
        Term::App { fun, arg } => NTerm::App(
            Box::new(to_named(fun, scope, counter)),
            Box::new(to_named(arg, scope, counter)),
        ),
        Term::Sigma { first, second, .. } => {
            let f = to_named(first, scope, counter);
            let name = fresh_name(counter);
            scope.push(name.clone());
            let s = to_named(second, scope, counter);
            scope.pop();
            NTerm::Sigma(name, Box::new(f), Box::new(s))
        }
        Term::Pair { fst, snd } => NTerm::Pair(
            Box::new(to_named(fst, scope, counter)),
            Box::new(to_named(snd, scope, counter)),
        ),
        Term::Fst(p) => NTerm::Fst(Box::new(to_named(p, scope, counter))),
        Term::Snd(p) => NTerm::Snd(Box::new(to_named(p, scope, counter))),
        Term::IdType { ty, lhs, rhs } => NTerm::IdType(
            Box::new(to_named(ty, scope, counter)),
            Box::new(to_named(lhs, scope, counter)),
            Box::new(to_named(rhs, scope, counter)),
        ),
        Term::Refl(p) => NTerm::Refl(Box::new(to_named(p, scope, counter))),
        Term::J {
            motive,
            base,
            lhs,
            rhs,
            proof,
            ..
        } => {
            let l = to_named(lhs, scope, counter);
            let r = to_named(rhs, scope, counter);
            let pf = to_named(proof, scope, counter);
            let x = fresh_name(counter);
            let y = fresh_name(counter);
            let p = fresh_name(counter);
            scope.push(x.clone());
            scope.push(y.clone());
            scope.push(p.clone());
            let m = to_named(motive, scope, counter);
            scope.pop();
            scope.pop();
            scope.pop();
            let b_name = fresh_name(counter);
            scope.push(b_name.clone());
            let b = to_named(base, scope, counter);
            scope.pop();
            NTerm::J {
                motive_binders: [x, y, p],
                motive: Box::new(m),
                base_binder: b_name,
                base: Box::new(b),
                lhs: Box::new(l),
                rhs: Box::new(r),
                proof: Box::new(pf),
            }
        }
        Term::Unit => NTerm::Unit,
        Term::Star => NTerm::Star,
        Term::SharpTy(a) => NTerm::SharpTy(Box::new(to_named(a, scope, counter))),
        Term::SharpIntro(a) => NTerm::SharpIntro(Box::new(to_named(a, scope, counter))),
        Term::SharpElim(a) => NTerm::SharpElim(Box::new(to_named(a, scope, counter))),
        Term::FlatTy(a) => NTerm::FlatTy(Box::new(to_named(a, scope, counter))),
        Term::FlatIntro(a) => NTerm::FlatIntro(Box::new(to_named(a, scope, counter))),
        Term::FlatLet {
            motive,
            scrutinee,
            body,
            ..
        } => {
            let s = to_named(scrutinee, scope, counter);
            let m_name = fresh_name(counter);
            scope.push(m_name.clone());
            let m = to_named(motive, scope, counter);
            scope.pop();
            let b_name = fresh_name(counter);
            scope.push(b_name.clone());
            let b = to_named(body, scope, counter);
            scope.pop();
            NTerm::FlatLet {
                binder: b_name,
                motive_binder: m_name,
                motive: Box::new(m),
                scrutinee: Box::new(s),
                body: Box::new(b),
            }
        }
    }
}

pub fn named_free_vars(t: &NTerm) -> BTreeSet<String> {
    fn go(t: &NTerm, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match t {
            NTerm::Var(x) => {
                if !bound.iter().any(|b| b == x) {
                    out.insert(x.clone());
                }
            }
            NTerm::Const(_) | NTerm::Universe(_) | NTerm::Unit | NTerm::Star => {}
            NTerm::Pi(x, d, c) | NTerm::Sigma(x, d, c) => {
                go(d, bound, out);
                bound.push(x.clone());
                go(c, bound, out);
                bound.pop();
            }
            NTerm::Lam(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            NTerm::App(f, a) | NTerm::Pair(f, a) => {
                go(f, bound, out);
                go(a, bound, out);
            }
            NTerm::Fst(p)
            | NTerm::Snd(p)
            | NTerm::Refl(p)
            | NTerm::SharpTy(p)
            | NTerm::SharpIntro(p)
            | NTerm::SharpElim(p)
            | NTerm::FlatTy(p)
            | NTerm::FlatIntro(p) => go(p, bound, out),
            NTerm::IdType(a, b, c) => {
                go(a, bound, out);
                go(b, bound, out);
                go(c, bound, out);
            }
            NTerm::J {
                motive_binders,
                motive,
                base_binder,
                base,
                lhs,
                rhs,
                proof,
            } => {
                go(lhs, bound, out);
                go(rhs, bound, out);
                go(proof, bound, out);
                bound.push(motive_binders[0].clone());
                bound.push(motive_binders[1].clone());
                bound.push(motive_binders[2].clone());
                go(motive, bound, out);
                bound.pop();
                bound.pop();
                bound.pop();
                bound.push(base_binder.clone());
                go(base, bound, out);
                bound.pop();
            }
            NTerm::FlatLet {
                binder,
                motive_binder,
                motive,
                scrutinee,
                body,
            } => {
                go(scrutinee, bound, out);
                bound.push(motive_binder.clone());
                go(motive, bound, out);
                bound.pop();
                bound.push(binder.clone());
                go(body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Naive capture-avoiding substitution: binders clashing with the free
/// variables of the replacement (or the target) are renamed first.
pub fn named_subst(t: &NTerm, target: &str, replacement: &NTerm, counter: &mut usize) -> NTerm {
    let fv = named_free_vars(replacement);
    subst_go(t, target, replacement, &fv, counter)
}

fn rename_binder(
    name: &str,
    bodies: &mut [&mut NTerm],
    target: &str,
    fv: &BTreeSet<String>,
    counter: &mut usize,
) -> String {
    if name != target && !fv.contains(name) {
        return name.to_string();
    }
    let fresh = format!("r{}", {
        let c = *counter;
        *counter += 1;
        c
    });
    for body in bodies {
        **body = rename_free(body, name, &fresh);
    }
    fresh
}

fn rename_free(t: &NTerm, from: &str, to: &str) -> NTerm {
    // Renaming to a globally fresh name cannot capture.
    let replacement = NTerm::Var(to.to_string());
    let mut counter = usize::MAX / 2;
    subst_go(t, from, &replacement, &BTreeSet::new(), &mut counter)
}

fn subst_go(
    t: &NTerm,
    target: &str,
    replacement: &NTerm,
    fv: &BTreeSet<String>,
    counter: &mut usize,
) -> NTerm {
    macro_rules! s {
        ($e:expr) => {
            Box::new(subst_go($e, target, replacement, fv, counter))
        };
    }
    match t {
        NTerm::Var(x) => {
            if x == target {
                replacement.clone()
            } else {
                t.clone()
            }
        }
        NTerm::Const(_) | NTerm::Universe(_) | NTerm::Unit | NTerm::Star => t.clone(),
        NTerm::Pi(x, d, c) => {
            let d = subst_go(d, target, replacement, fv, counter);
            let mut c2 = (**c).clone();
            let x2 = rename_binder(x, &mut [&mut c2], target, fv, counter);
            let c2 = if x == target && x2 == *x {
                c2
            } else {
                subst_go(&c2, target, replacement, fv, counter)
            };
            NTerm::Pi(x2, Box::new(d), Box::new(c2))
        }
        NTerm::Sigma(x, d, c) => {
            let d = subst_go(d, target, replacement, fv, counter);
            let mut c2 = (**c).clone();
            let x2 = rename_binder(x, &mut [&mut c2], target, fv, counter);
            let c2 = if x == target && x2 == *x {
                c2
            } else {
                subst_go(&c2, target, replacement, fv, counter)
            };
            NTerm::Sigma(x2, Box::new(d), Box::new(c2))
        }
        NTerm::Lam(x, b) => {
            let mut b2 = (**b).clone();
            let x2 = rename_binder(x, &mut [&mut b2], target, fv, counter);
            let b2 = if x == target && x2 == *x {
                b2
            } else {
                subst_go(&b2, target, replacement, fv, counter)
            };
            NTerm::Lam(x2, Box::new(b2))
        }
        NTerm::App(f, a) => NTerm::App(s!(f), s!(a)),
        NTerm::Pair(f, a) => NTerm::Pair(s!(f), s!(a)),
        NTerm::Fst(p) => NTerm::Fst(s!(p)),
        NTerm::Snd(p) => NTerm::Snd(s!(p)),
        NTerm::IdType(a, b, c) => NTerm::IdType(s!(a), s!(b), s!(c)),
        NTerm::Refl(p) => NTerm::Refl(s!(p)),
        NTerm::SharpTy(p) => NTerm::SharpTy(s!(p)),
        NTerm::SharpIntro(p) => NTerm::SharpIntro(s!(p)),
        NTerm::SharpElim(p) => NTerm::SharpElim(s!(p)),
        NTerm::FlatTy(p) => NTerm::FlatTy(s!(p)),
        NTerm::FlatIntro(p) => NTerm::FlatIntro(s!(p)),
        NTerm::J {
            motive_binders,
            motive,
            base_binder,
            base,
            lhs,
            rhs,
            proof,
        } => {
            let lhs = subst_go(lhs, target, replacement, fv, counter);
            let rhs = subst_go(rhs, target, replacement, fv, counter);
            let proof = subst_go(proof, target, replacement, fv, counter);
            // Motive binds three; rename each against the replacement.
            let mut m2 = (**motive).clone();
            let x2 = rename_binder(&motive_binders[0], &mut [&mut m2], target, fv, counter);
            let y2 = rename_binder(&motive_binders[1], &mut [&mut m2], target, fv, counter);
            let p2 = rename_binder(&motive_binders[2], &mut [&mut m2], target, fv, counter);
            let shadowed = [&x2, &y2, &p2]
                .iter()
                .zip([&motive_binders[0], &motive_binders[1], &motive_binders[2]])
                .any(|(new, old)| *old == target && **new == *old);
            let m2 = if shadowed {
                m2
            } else {
                subst_go(&m2, target, replacement, fv, counter)
            };
            let mut b2 = (**base).clone();
            let bb = rename_binder(base_binder, &mut [&mut b2], target, fv, counter);
            let b2 = if base_binder == target && bb == *base_binder {
                b2
            } else {
                subst_go(&b2, target, replacement, fv, counter)
            };
            NTerm::J {
                motive_binders: [x2, y2, p2],
                motive: Box::new(m2),
                base_binder: bb,
                base: Box::new(b2),
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                proof: Box::new(proof),
            }
        }
        NTerm::FlatLet {
            binder,
            motive_binder,
            motive,
            scrutinee,
            body,
        } => {
            let scrutinee = subst_go(scrutinee, target, replacement, fv, counter);
            let mut m2 = (**motive).clone();
            let mb = rename_binder(motive_binder, &mut [&mut m2], target, fv, counter);
            let m2 = if motive_binder == target && mb == *motive_binder {
                m2
            } else {
                subst_go(&m2, target, replacement, fv, counter)
            };
            let mut b2 = (**body).clone();
            let ub = rename_binder(binder, &mut [&mut b2], target, fv, counter);
            let b2 = if binder == target && ub == *binder {
                b2
            } else {
                subst_go(&b2, target, replacement, fv, counter)
            };
            NTerm::FlatLet {
                binder: ub,
                motive_binder: mb,
                motive: Box::new(m2),
                scrutinee: Box::new(scrutinee),
                body: Box::new(b2),
            }
        }
    }
}

/// Renames all binders canonically so alpha-equivalent named terms become
/// equal. Free variables are untouched.
pub fn canonicalize(t: &NTerm) -> NTerm {
    fn go(t: &NTerm, map: &mut Vec<(String, String)>, counter: &mut usize) -> NTerm {
        match t {
            NTerm::Var(x) => {
                for (old, new) in map.iter().rev() {
                    if old == x {
                        return NTerm::Var(new.clone());
                    }
                }
                NTerm::Var(x.clone())
            }
            NTerm::Const(_) | NTerm::Universe(_) | NTerm::Unit | NTerm::Star => t.clone(),
            NTerm::Pi(x, d, c) => {
                let d = go(d, map, counter);
                let fresh = format!("c{}", {
                    let n = *counter;
                    *counter += 1;
                    n
                });
                map.push((x.clone(), fresh.clone()));
                let c = go(c, map, counter);
                map.pop();
                NTerm::Pi(fresh, Box::new(d), Box::new(c))
            }
            NTerm::Sigma(x, d, c) => {
                let d = go(d, map, counter);
                let fresh = format!("c{}", {
                    let n = *counter;
                    *counter += 1;
                    n
                });
                map.push((x.clone(), fresh.clone()));
                let c = go(c, map, counter);
                map.pop();
                NTerm::Sigma(fresh, Box::new(d), Box::new(c))
            }
            NTerm::Lam(x, b) => {
                let fresh = format!("c{}", {
                    let n = *counter;
                    *counter += 1;
                    n
                });
                map.push((x.clone(), fresh.clone()));
                let b = go(b, map, counter);
                map.pop();
                NTerm::Lam(fresh, Box::new(b))
            }
            NTerm::App(f, a) => NTerm::App(Box::new(go(f, map, counter)), Box::new(go(a, map, counter))),
            NTerm::Pair(f, a) => {
                NTerm::Pair(Box::new(go(f, map, counter)), Box::new(go(a, map, counter)))
            }
            NTerm::Fst(p) => NTerm::Fst(Box::new(go(p, map, counter))),
            NTerm::Snd(p) => NTerm::Snd(Box::new(go(p, map, counter))),
            NTerm::IdType(a, b, c) => NTerm::IdType(
                Box::new(go(a, map, counter)),
                Box::new(go(b, map, counter)),
                Box::new(go(c, map, counter)),
            ),
            NTerm::Refl(p) => NTerm::Refl(Box::new(go(p, map, counter))),
            NTerm::SharpTy(p) => NTerm::SharpTy(Box::new(go(p, map, counter))),
            NTerm::SharpIntro(p) => NTerm::SharpIntro(Box::new(go(p, map, counter))),
            NTerm::SharpElim(p) => NTerm::SharpElim(Box::new(go(p, map, counter))),
            NTerm::FlatTy(p) => NTerm::FlatTy(Box::new(go(p, map, counter))),
            NTerm::FlatIntro(p) => NTerm::FlatIntro(Box::new(go(p, map, counter))),
            NTerm::J {
                motive_binders,
                motive,
                base_binder,
                base,
                lhs,
                rhs,
                proof,
            } => {
                let lhs = go(lhs, map, counter);
                let rhs = go(rhs, map, counter);
                let proof = go(proof, map, counter);
                let fx = format!("c{}", { let n = *counter; *counter += 1; n });
                let fy = format!("c{}", { let n = *counter; *counter += 1; n });
                let fp = format!("c{}", { let n = *counter; *counter += 1; n });
                map.push((motive_binders[0].clone(), fx.clone()));
                map.push((motive_binders[1].clone(), fy.clone()));
                map.push((motive_binders[2].clone(), fp.clone()));
                let motive = go(motive, map, counter);
                map.pop();
                map.pop();
                map.pop();
                let fb = format!("c{}", { let n = *counter; *counter += 1; n });
                map.push((base_binder.clone(), fb.clone()));
                let base = go(base, map, counter);
                map.pop();
                NTerm::J {
                    motive_binders: [fx, fy, fp],
                    motive: Box::new(motive),
                    base_binder: fb,
                    base: Box::new(base),
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    proof: Box::new(proof),
                }
            }
            NTerm::FlatLet {
                binder,
                motive_binder,
                motive,
                scrutinee,
                body,
            } => {
                let scrutinee = go(scrutinee, map, counter);
                let fm = format!("c{}", { let n = *counter; *counter += 1; n });
                map.push((motive_binder.clone(), fm.clone()));
                let motive = go(motive, map, counter);
                map.pop();
                let fb = format!("c{}", { let n = *counter; *counter += 1; n });
                map.push((binder.clone(), fb.clone()));
                let body = go(body, map, counter);
                map.pop();
                NTerm::FlatLet {
                    binder: fb,
                    motive_binder: fm,
                    motive: Box::new(motive),
                    scrutinee: Box::new(scrutinee),
                    body: Box::new(body),
                }
            }
        }
    }
    go(t, &mut Vec::new(), &mut 0)
}

// ---------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------

pub const TEST_CONSTS: &[&str] = &["k0", "k1", "k2"];

/// Scope names used for open random terms: index i refers to `v{n-1-i}`.
pub fn scope_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{}", i)).collect()
}

/// Strategy for well-scoped terms over `scope` ambient entries.
pub fn arb_term(scope: usize) -> BoxedStrategy<Term> {
    let leaf = {
        let mut options: Vec<BoxedStrategy<Term>> = vec![
            Just(Term::Unit).boxed(),
            Just(Term::Star).boxed(),
            Just(Term::universe(0)).boxed(),
            prop::sample::select(TEST_CONSTS.to_vec())
                .prop_map(Term::cst)
                .boxed(),
        ];
        if scope > 0 {
            options.push((0..scope).prop_map(Term::Var).boxed());
        }
        prop::strategy::Union::new(options).boxed()
    };
    leaf.prop_recursive(3, 24, 3, move |inner| {
        // Binder-crossing children shift the scope; the recursive strategy
        // does not know depth, so we re-generate with the same strategy
        // and treat indices as the current scope plus crossed binders.
        // Over-large indices never arise because `inner` only produces
        // indices below `scope`, which stay valid under extra binders.
        let i = inner.clone();
        prop::strategy::Union::new(vec![
            (i.clone(), i.clone()).prop_map(|(a, b)| Term::app(a, b)).boxed(),
            (i.clone(), i.clone())
                .prop_map(|(a, b)| Term::pi("x", a, b))
                .boxed(),
            i.clone().prop_map(|b| Term::lam("x", b)).boxed(),
            (i.clone(), i.clone())
                .prop_map(|(a, b)| Term::sigma("x", a, b))
                .boxed(),
            (i.clone(), i.clone()).prop_map(|(a, b)| Term::pair(a, b)).boxed(),
            i.clone().prop_map(Term::flat_intro).boxed(),
            i.clone().prop_map(Term::flat_ty).boxed(),
            i.clone().prop_map(Term::sharp_intro).boxed(),
            i.clone().prop_map(Term::sharp_elim).boxed(),
            i.clone().prop_map(Term::sharp_ty).boxed(),
            i.clone().prop_map(|p| Term::Fst(p.rc())).boxed(),
            i.clone().prop_map(|p| Term::Snd(p.rc())).boxed(),
            (i.clone(), i.clone(), i.clone())
                .prop_map(|(a, b, c)| Term::id_type(a, b, c))
                .boxed(),
            i.clone().prop_map(Term::refl).boxed(),
            (i.clone(), i.clone(), i.clone())
                .prop_map(|(m, s, b)| Term::flat_let("u", "x", m, s, b))
                .boxed(),
            (i.clone(), i.clone(), i.clone(), i.clone(), i)
                .prop_map(|(m, b, l, r, p)| Term::J {
                    motive_binders: [Binder::new("x"), Binder::new("y"), Binder::new("p")],
                    motive: m.rc(),
                    base_binder: Binder::new("x"),
                    base: b.rc(),
                    lhs: l.rc(),
                    rhs: r.rc(),
                    proof: p.rc(),
                })
                .boxed(),
        ])
    })
    .boxed()
}

/// Strategy for telescopes satisfying the crisp-dependency invariant:
/// crisp entries get closed types or references to earlier crisp entries.
pub fn arb_telescope() -> BoxedStrategy<Telescope> {
    prop::collection::vec((any::<bool>(), 0..4usize), 0..6)
        .prop_map(|entries| {
            let mut tele = Telescope::new();
            let mut crisp_positions: Vec<usize> = Vec::new();
            for (idx, (crisp, pick)) in entries.into_iter().enumerate() {
                let len = tele.len();
                let ty = if crisp {
                    // Reference an earlier crisp entry when one exists.
                    if !crisp_positions.is_empty() {
                        let pos = crisp_positions[pick % crisp_positions.len()];
                        Term::Var(len - 1 - pos)
                    } else {
                        Term::universe(0)
                    }
                } else if len > 0 {
                    Term::Var(pick % len)
                } else {
                    Term::Unit
                };
                if crisp {
                    crisp_positions.push(len);
                    tele.push(Entry {
                        name: Binder::new(&format!("c{}", idx)),
                        ty,
                        polarity: Polarity::Crisp,
                    });
                } else {
                    tele.push(Entry {
                        name: Binder::new(&format!("h{}", idx)),
                        ty,
                        polarity: Polarity::Cohesive,
                    });
                }
            }
            tele
        })
        .boxed()
}

// ---------------------------------------------------------------------
// Corpus helpers
// ---------------------------------------------------------------------

pub fn corpus_manifest_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/manifest.txt")
}

pub fn load_corpus_env() -> Environment {
    let manifest =
        cohesive_kernel::corpus::CorpusManifest::load(&corpus_manifest_path()).expect("manifest");
    cohesive_kernel::corpus::build_environment(
        &manifest,
        DEFAULT_FUEL,
        &["prelude", "tier1", "tier2"],
    )
    .expect("corpus environment builds")
}

/// Declares each declaration of `source` into `env`.
pub fn declare_source(env: &mut Environment, source: &str) -> Result<(), Diagnostic> {
    let decls = cohesive_kernel::parser::parse_module(source, "<test>").expect("parse");
    let located = cohesive_kernel::parser::resolve(&decls, &|n| env.contains(n)).map_err(|e| {
        let code = match e.kind {
            cohesive_kernel::parser::ResolveErrorKind::Scope { .. } => DiagnosticCode::ScopeError,
            cohesive_kernel::parser::ResolveErrorKind::Duplicate { .. } => {
                DiagnosticCode::DuplicateName
            }
        };
        Diagnostic::new(code, e.to_string())
    })?;
    for d in located {
        env.declare(&d.decl, DEFAULT_FUEL)?;
    }
    Ok(())
}

pub fn env_from(source: &str) -> Environment {
    let mut env = Environment::new();
    declare_source(&mut env, source).expect("test environment declarations check");
    env
}
