//! Named surface trees with source spans, mirroring the core language.

use std::fmt;
use std::rc::Rc;

/// 1-based source location range within a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub file: Rc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: &str, start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> SourceSpan {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        SourceSpan {
            file: Rc::from(file),
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn point(file: &str, line: u32, col: u32) -> SourceSpan {
        SourceSpan::new(file, line, col, line, col)
    }

    /// Smallest span covering both inputs (assumed to be in the same file).
    pub fn join(&self, other: &SourceSpan) -> SourceSpan {
        let (sl, sc) = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let (el, ec) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan {
            file: self.file.clone(),
            start_line: sl,
            start_col: sc,
            end_line: el,
            end_col: ec,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

#[derive(Clone, Debug)]
pub enum SurfaceTerm {
    Ident(String, SourceSpan),
    Universe(u32, SourceSpan),
    Pi {
        binder: String,
        domain: Box<SurfaceTerm>,
        codomain: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Lam {
        binder: String,
        body: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    App {
        fun: Box<SurfaceTerm>,
        arg: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Sigma {
        binder: String,
        first: Box<SurfaceTerm>,
        second: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Pair {
        fst: Box<SurfaceTerm>,
        snd: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Fst(Box<SurfaceTerm>, SourceSpan),
    Snd(Box<SurfaceTerm>, SourceSpan),
    IdType {
        ty: Box<SurfaceTerm>,
        lhs: Box<SurfaceTerm>,
        rhs: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Refl(Box<SurfaceTerm>, SourceSpan),
    J {
        motive_binders: [String; 3],
        motive: Box<SurfaceTerm>,
        base_binder: String,
        base: Box<SurfaceTerm>,
        lhs: Box<SurfaceTerm>,
        rhs: Box<SurfaceTerm>,
        proof: Box<SurfaceTerm>,
        span: SourceSpan,
    },
    Unit(SourceSpan),
    Star(SourceSpan),
    SharpTy(Box<SurfaceTerm>, SourceSpan),
    SharpIntro(Box<SurfaceTerm>, SourceSpan),
    SharpElim(Box<SurfaceTerm>, SourceSpan),
    FlatTy(Box<SurfaceTerm>, SourceSpan),
    FlatIntro(Box<SurfaceTerm>, SourceSpan),
    FlatLet {
        binder: String,
        motive_binder: String,
        motive: Box<SurfaceTerm>,
        scrutinee: Box<SurfaceTerm>,
        body: Box<SurfaceTerm>,
        span: SourceSpan,
    },
}

impl SurfaceTerm {
    pub fn span(&self) -> &SourceSpan {
        match self {
            SurfaceTerm::Ident(_, s)
            | SurfaceTerm::Universe(_, s)
            | SurfaceTerm::Fst(_, s)
            | SurfaceTerm::Snd(_, s)
            | SurfaceTerm::Refl(_, s)
            | SurfaceTerm::Unit(s)
            | SurfaceTerm::Star(s)
            | SurfaceTerm::SharpTy(_, s)
            | SurfaceTerm::SharpIntro(_, s)
            | SurfaceTerm::SharpElim(_, s)
            | SurfaceTerm::FlatTy(_, s)
            | SurfaceTerm::FlatIntro(_, s) => s,
            SurfaceTerm::Pi { span, .. }
            | SurfaceTerm::Lam { span, .. }
            | SurfaceTerm::App { span, .. }
            | SurfaceTerm::Sigma { span, .. }
            | SurfaceTerm::Pair { span, .. }
            | SurfaceTerm::IdType { span, .. }
            | SurfaceTerm::J { span, .. }
            | SurfaceTerm::FlatLet { span, .. } => span,
        }
    }
}

#[derive(Clone, Debug)]
pub enum SurfacePatternArg {
    Var(String, SourceSpan),
    Ctor {
        head: String,
        head_span: SourceSpan,
        vars: Vec<(String, SourceSpan)>,
    },
}

#[derive(Clone, Debug)]
pub enum SurfaceDecl {
    Def {
        name: String,
        name_span: SourceSpan,
        ty: SurfaceTerm,
        body: SurfaceTerm,
    },
    Postulate {
        name: String,
        name_span: SourceSpan,
        ty: SurfaceTerm,
    },
    Rewrite {
        name: String,
        name_span: SourceSpan,
        head: String,
        head_span: SourceSpan,
        args: Vec<SurfacePatternArg>,
        rhs: SurfaceTerm,
    },
}

impl SurfaceDecl {
    pub fn name(&self) -> &str {
        match self {
            SurfaceDecl::Def { name, .. }
            | SurfaceDecl::Postulate { name, .. }
            | SurfaceDecl::Rewrite { name, .. } => name,
        }
    }

    pub fn name_span(&self) -> &SourceSpan {
        match self {
            SurfaceDecl::Def { name_span, .. }
            | SurfaceDecl::Postulate { name_span, .. }
            | SurfaceDecl::Rewrite { name_span, .. } => name_span,
        }
    }
}
