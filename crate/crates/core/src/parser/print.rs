//! Core-term pretty-printer. Output re-parses and re-resolves to a
//! structurally equal term; binder names are freshened against constants,
//! keywords, and everything else in scope.

use std::collections::BTreeSet;

use crate::syntax::{free_vars, Term};

const KEYWORDS: &[&str] = &[
    "def", "postulate", "rewrite", "letflat", "motive", "in", "fun", "Type", "Unit", "star",
    "Sharp", "Flat", "Id", "refl", "J", "_sharp",
];

/// Prints a closed term.
pub fn print_term(t: &Term) -> String {
    print_term_in(t, &[])
}

/// Prints a term whose free variables refer to `ambient` names
/// (outermost first).
pub fn print_term_in(t: &Term, ambient: &[&str]) -> String {
    let mut reserved: BTreeSet<String> = KEYWORDS.iter().map(|s| s.to_string()).collect();
    collect_consts(t, &mut reserved);
    let mut p = Printer {
        names: ambient.iter().map(|s| s.to_string()).collect(),
        reserved,
        out: String::new(),
    };
    p.print(t, Prec::Term);
    p.out
}

fn collect_consts(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Const(name) => {
            out.insert(name.to_string());
        }
        Term::Var(_) | Term::Universe(_) | Term::Unit | Term::Star => {}
        Term::Pi {
            domain, codomain, ..
        } => {
            collect_consts(domain, out);
            collect_consts(codomain, out);
        }
        Term::Lam { body, .. } => collect_consts(body, out),
        Term::App { fun, arg } => {
            collect_consts(fun, out);
            collect_consts(arg, out);
        }
        Term::Sigma { first, second, .. } => {
            collect_consts(first, out);
            collect_consts(second, out);
        }
        Term::Pair { fst, snd } => {
            collect_consts(fst, out);
            collect_consts(snd, out);
        }
        Term::Fst(x) | Term::Snd(x) | Term::Refl(x) => collect_consts(x, out),
        Term::IdType { ty, lhs, rhs } => {
            collect_consts(ty, out);
            collect_consts(lhs, out);
            collect_consts(rhs, out);
        }
        Term::J {
            motive,
            base,
            lhs,
            rhs,
            proof,
            ..
        } => {
            collect_consts(motive, out);
            collect_consts(base, out);
            collect_consts(lhs, out);
            collect_consts(rhs, out);
            collect_consts(proof, out);
        }
        Term::SharpTy(x)
        | Term::SharpIntro(x)
        | Term::SharpElim(x)
        | Term::FlatTy(x)
        | Term::FlatIntro(x) => collect_consts(x, out),
        Term::FlatLet {
            motive,
            scrutinee,
            body,
            ..
        } => {
            collect_consts(motive, out);
            collect_consts(scrutinee, out);
            collect_consts(body, out);
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Term = 0,
    Star = 1,
    App = 2,
    Atom = 3,
}

struct Printer {
    names: Vec<String>,
    reserved: BTreeSet<String>,
    out: String,
}

impl Printer {
    /// The loosest level at which a term prints without parentheses.
    fn class_of(t: &Term) -> Prec {
        match t {
            Term::Pi { .. } | Term::Lam { .. } | Term::FlatLet { .. } => Prec::Term,
            Term::Sigma { .. } => Prec::Star,
            Term::App { .. }
            | Term::Fst(_)
            | Term::Snd(_)
            | Term::SharpIntro(_)
            | Term::SharpElim(_)
            | Term::FlatIntro(_) => Prec::App,
            _ => Prec::Atom,
        }
    }

    /// Postfix-shaped terms cannot head an application spine.
    fn heads_spine(t: &Term) -> bool {
        matches!(t, Term::App { .. }) || Self::class_of(t) == Prec::Atom
    }

    fn fresh(&mut self, hint: &str, used: bool) -> String {
        if !used {
            return "_".to_string();
        }
        let base = if hint.is_empty() || hint == "_" {
            "x".to_string()
        } else {
            hint.to_string()
        };
        let mut candidate = base.clone();
        while self.reserved.contains(&candidate) || self.names.contains(&candidate) {
            candidate.push('\'');
        }
        candidate
    }

    fn var_name(&self, idx: usize) -> String {
        let n = self.names.len();
        if idx < n {
            self.names[n - 1 - idx].clone()
        } else {
            // Out-of-scope index; diagnostics only, not re-parseable.
            format!("#{}", idx - n)
        }
    }

    fn print(&mut self, t: &Term, required: Prec) {
        let bare = match (t, required) {
            (Term::App { .. }, Prec::App) => true,
            _ => Self::class_of(t) >= required,
        };
        if !bare {
            self.out.push('(');
            self.print_bare(t);
            self.out.push(')');
        } else {
            self.print_bare(t);
        }
    }

    fn print_spine_head(&mut self, t: &Term) {
        if Self::heads_spine(t) {
            self.print_bare(t);
        } else {
            self.out.push('(');
            self.print_bare(t);
            self.out.push(')');
        }
    }

    fn print_bare(&mut self, t: &Term) {
        match t {
            Term::Var(i) => {
                let name = self.var_name(*i);
                self.out.push_str(&name);
            }
            Term::Const(name) => self.out.push_str(name),
            Term::Universe(l) => {
                self.out.push_str("Type ");
                self.out.push_str(&l.to_string());
            }
            Term::Pi {
                binder,
                domain,
                codomain,
            } => {
                let used = free_vars(codomain).contains(&0);
                let name = self.fresh(binder.as_str(), used);
                if used {
                    self.out.push('(');
                    self.out.push_str(&name);
                    self.out.push_str(" : ");
                    self.print(domain, Prec::Term);
                    self.out.push_str(") -> ");
                } else {
                    self.print(domain, Prec::Star);
                    self.out.push_str(" -> ");
                }
                self.names.push(name);
                self.print(codomain, Prec::Term);
                self.names.pop();
            }
            Term::Lam { binder, body } => {
                let used = free_vars(body).contains(&0);
                let name = self.fresh(binder.as_str(), used);
                self.out.push_str("fun ");
                self.out.push_str(if used { &name } else { "_" });
                self.out.push_str(". ");
                self.names.push(name);
                self.print(body, Prec::Term);
                self.names.pop();
            }
            Term::App { fun, arg } => {
                self.print_spine_head(fun);
                self.out.push(' ');
                self.print(arg, Prec::Atom);
            }
            Term::Sigma {
                binder,
                first,
                second,
            } => {
                let used = free_vars(second).contains(&0);
                let name = self.fresh(binder.as_str(), used);
                if used {
                    self.out.push('(');
                    self.out.push_str(&name);
                    self.out.push_str(" : ");
                    self.print(first, Prec::Term);
                    self.out.push_str(") * ");
                } else {
                    self.print(first, Prec::App);
                    self.out.push_str(" * ");
                }
                self.names.push(name);
                self.print(second, Prec::Star);
                self.names.pop();
            }
            Term::Pair { fst, snd } => {
                self.out.push('(');
                self.print(fst, Prec::Term);
                self.out.push_str(", ");
                self.print(snd, Prec::Term);
                self.out.push(')');
            }
            Term::Fst(inner) => {
                self.print(inner, Prec::App);
                self.out.push_str(" .1");
            }
            Term::Snd(inner) => {
                self.print(inner, Prec::App);
                self.out.push_str(" .2");
            }
            Term::IdType { ty, lhs, rhs } => {
                self.out.push_str("Id ");
                self.print(ty, Prec::Atom);
                self.out.push(' ');
                self.print(lhs, Prec::Atom);
                self.out.push(' ');
                self.print(rhs, Prec::Atom);
            }
            Term::Refl(inner) => {
                self.out.push_str("refl ");
                self.print(inner, Prec::Atom);
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
                let motive_fv = free_vars(motive);
                // Binder order: x (Var 2), y (Var 1), p (Var 0) in the motive.
                let x = self.fresh(motive_binders[0].as_str(), motive_fv.contains(&2));
                self.names.push(x.clone());
                let y = self.fresh(motive_binders[1].as_str(), motive_fv.contains(&1));
                self.names.push(y.clone());
                let p = self.fresh(motive_binders[2].as_str(), motive_fv.contains(&0));
                self.names.push(p.clone());
                self.out.push_str("J (");
                self.out.push_str(&x);
                self.out.push_str(". ");
                self.out.push_str(&y);
                self.out.push_str(". ");
                self.out.push_str(&p);
                self.out.push_str(". ");
                self.print(motive, Prec::Term);
                self.names.pop();
                self.names.pop();
                self.names.pop();
                self.out.push_str(") (");
                let b = self.fresh(base_binder.as_str(), free_vars(base).contains(&0));
                self.out.push_str(&b);
                self.out.push_str(". ");
                self.names.push(b);
                self.print(base, Prec::Term);
                self.names.pop();
                self.out.push_str(") ");
                self.print(lhs, Prec::Atom);
                self.out.push(' ');
                self.print(rhs, Prec::Atom);
                self.out.push(' ');
                self.print(proof, Prec::Atom);
            }
            Term::Unit => self.out.push_str("Unit"),
            Term::Star => self.out.push_str("star"),
            Term::SharpTy(inner) => {
                self.out.push_str("Sharp ");
                self.print(inner, Prec::Atom);
            }
            Term::SharpIntro(inner) => {
                self.print(inner, Prec::App);
                self.out.push_str(" ^sharp");
            }
            Term::SharpElim(inner) => {
                self.print(inner, Prec::App);
                self.out.push_str(" _sharp");
            }
            Term::FlatTy(inner) => {
                self.out.push_str("Flat ");
                self.print(inner, Prec::Atom);
            }
            Term::FlatIntro(inner) => {
                self.print(inner, Prec::App);
                self.out.push_str(" ^flat");
            }
            Term::FlatLet {
                binder,
                motive_binder,
                motive,
                scrutinee,
                body,
            } => {
                let body_used = free_vars(body).contains(&0);
                let motive_used = free_vars(motive).contains(&0);
                let u = self.fresh(binder.as_str(), body_used);
                self.out.push_str("letflat ");
                self.out.push_str(if body_used { &u } else { "_" });
                self.out.push_str(" := ");
                self.print(scrutinee, Prec::Term);
                self.out.push_str(" motive ");
                let x = self.fresh(motive_binder.as_str(), motive_used);
                self.out.push_str(if motive_used { &x } else { "_" });
                self.out.push_str(". ");
                self.names.push(x);
                self.print(motive, Prec::Term);
                self.names.pop();
                self.out.push_str(" in ");
                self.names.push(u);
                self.print(body, Prec::Term);
                self.names.pop();
            }
        }
    }
}
