//! Recursive-descent parser from tokens to surface declarations.
//!
//! Precedence, loosest first: arrows, then `*`, then application; postfix
//! operators (`^sharp`, `_sharp`, `^flat`, `.1`, `.2`) apply to the whole
//! preceding application spine.

use super::lexer::{tokenize, Token, TokenKind};
use super::surface::{SourceSpan, SurfaceDecl, SurfacePatternArg, SurfaceTerm};
use super::ParseError;

pub fn parse_module(source: &str, file: &str) -> Result<Vec<SurfaceDecl>, ParseError> {
    let tokens = tokenize(source, file)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        file: file.to_string(),
    };
    let mut decls = Vec::new();
    while !p.at_end() {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: String,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn here(&self) -> SourceSpan {
        match self.tokens.get(self.pos) {
            Some(t) => t.span.clone(),
            None => match self.tokens.last() {
                Some(t) => t.span.clone(),
                None => SourceSpan::point(&self.file, 1, 1),
            },
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>, expected: Option<&str>) -> ParseError {
        ParseError {
            message: message.into(),
            span: self.here(),
            expected: expected.map(|s| s.to_string()),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        match self.peek() {
            Some(k) if *k == kind => Ok(self.bump().unwrap()),
            Some(k) => Err(self.error(
                format!("unexpected {}", k.describe()),
                Some(&kind.describe()),
            )),
            None => Err(self.error("unexpected end of file", Some(&kind.describe()))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let t = self.bump().unwrap();
                match t.kind {
                    TokenKind::Ident(name) => Ok((name, t.span)),
                    _ => unreachable!(),
                }
            }
            Some(k) => Err(self.error(
                format!("unexpected {}", k.describe()),
                Some("an identifier"),
            )),
            None => Err(self.error("unexpected end of file", Some("an identifier"))),
        }
    }

    fn decl(&mut self) -> Result<SurfaceDecl, ParseError> {
        match self.peek() {
            Some(TokenKind::KwDef) => {
                self.bump();
                let (name, name_span) = self.expect_ident()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.term()?;
                self.expect(TokenKind::Assign)?;
                let body = self.term()?;
                Ok(SurfaceDecl::Def {
                    name,
                    name_span,
                    ty,
                    body,
                })
            }
            Some(TokenKind::KwPostulate) => {
                self.bump();
                let (name, name_span) = self.expect_ident()?;
                self.expect(TokenKind::Colon)?;
                let ty = self.term()?;
                Ok(SurfaceDecl::Postulate {
                    name,
                    name_span,
                    ty,
                })
            }
            Some(TokenKind::KwRewrite) => {
                self.bump();
                let (name, name_span) = self.expect_ident()?;
                self.expect(TokenKind::Colon)?;
                let (head, head_span) = self.expect_ident()?;
                let mut args = Vec::new();
                loop {
                    match self.peek() {
                        Some(TokenKind::Ident(_)) => {
                            let (v, s) = self.expect_ident()?;
                            args.push(SurfacePatternArg::Var(v, s));
                        }
                        Some(TokenKind::LParen) => {
                            self.bump();
                            let (ctor, ctor_span) = self.expect_ident()?;
                            let mut vars = Vec::new();
                            while let Some(TokenKind::Ident(_)) = self.peek() {
                                vars.push(self.expect_ident()?);
                            }
                            self.expect(TokenKind::RParen)?;
                            args.push(SurfacePatternArg::Ctor {
                                head: ctor,
                                head_span: ctor_span,
                                vars,
                            });
                        }
                        _ => break,
                    }
                }
                self.expect(TokenKind::DArrow)?;
                let rhs = self.term()?;
                Ok(SurfaceDecl::Rewrite {
                    name,
                    name_span,
                    head,
                    head_span,
                    args,
                    rhs,
                })
            }
            Some(k) => Err(self.error(
                format!("unexpected {}", k.describe()),
                Some("'def', 'postulate', or 'rewrite'"),
            )),
            None => Err(self.error("unexpected end of file", Some("a declaration"))),
        }
    }

    /// Full term: lambdas, letflat, arrows.
    fn term(&mut self) -> Result<SurfaceTerm, ParseError> {
        match self.peek() {
            Some(TokenKind::KwFun) => {
                let start = self.here();
                self.bump();
                let (binder, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let body = self.term()?;
                let span = start.join(body.span());
                Ok(SurfaceTerm::Lam {
                    binder,
                    body: Box::new(body),
                    span,
                })
            }
            Some(TokenKind::KwLetflat) => {
                let start = self.here();
                self.bump();
                let (binder, _) = self.expect_ident()?;
                self.expect(TokenKind::Assign)?;
                let scrutinee = self.term()?;
                self.expect(TokenKind::KwMotive)?;
                let (motive_binder, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let motive = self.term()?;
                self.expect(TokenKind::KwIn)?;
                let body = self.term()?;
                let span = start.join(body.span());
                Ok(SurfaceTerm::FlatLet {
                    binder,
                    motive_binder,
                    motive: Box::new(motive),
                    scrutinee: Box::new(scrutinee),
                    body: Box::new(body),
                    span,
                })
            }
            _ => {
                let lhs = self.star_level()?;
                if let Some(TokenKind::Arrow) = self.peek() {
                    self.bump();
                    let rhs = self.term()?;
                    let span = lhs.span().join(rhs.span());
                    Ok(SurfaceTerm::Pi {
                        binder: "_".into(),
                        domain: Box::new(lhs),
                        codomain: Box::new(rhs),
                        span,
                    })
                } else {
                    Ok(lhs)
                }
            }
        }
    }

    /// True if the upcoming tokens open a dependent binder `( IDENT :`.
    fn at_binder_group(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::LParen))
            && matches!(self.peek_at(1), Some(TokenKind::Ident(_)))
            && matches!(self.peek_at(2), Some(TokenKind::Colon))
    }

    fn star_level(&mut self) -> Result<SurfaceTerm, ParseError> {
        if self.at_binder_group() {
            let start = self.here();
            self.bump(); // (
            let (binder, _) = self.expect_ident()?;
            self.expect(TokenKind::Colon)?;
            let ann = self.term()?;
            self.expect(TokenKind::RParen)?;
            match self.peek() {
                Some(TokenKind::Arrow) => {
                    self.bump();
                    let codomain = self.term()?;
                    let span = start.join(codomain.span());
                    Ok(SurfaceTerm::Pi {
                        binder,
                        domain: Box::new(ann),
                        codomain: Box::new(codomain),
                        span,
                    })
                }
                Some(TokenKind::Times) => {
                    self.bump();
                    let second = self.star_level()?;
                    let span = start.join(second.span());
                    Ok(SurfaceTerm::Sigma {
                        binder,
                        first: Box::new(ann),
                        second: Box::new(second),
                        span,
                    })
                }
                _ => Err(self.error(
                    "a dependent binder must be followed by an arrow or product",
                    Some("'->' or '*'"),
                )),
            }
        } else {
            let lhs = self.app_level()?;
            if let Some(TokenKind::Times) = self.peek() {
                self.bump();
                let rhs = self.star_level()?;
                let span = lhs.span().join(rhs.span());
                Ok(SurfaceTerm::Sigma {
                    binder: "_".into(),
                    first: Box::new(lhs),
                    second: Box::new(rhs),
                    span,
                })
            } else {
                Ok(lhs)
            }
        }
    }

    fn at_atom(&self) -> bool {
        match self.peek() {
            Some(TokenKind::Ident(_))
            | Some(TokenKind::KwType)
            | Some(TokenKind::KwUnit)
            | Some(TokenKind::KwStar)
            | Some(TokenKind::KwSharp)
            | Some(TokenKind::KwFlat)
            | Some(TokenKind::KwId)
            | Some(TokenKind::KwRefl)
            | Some(TokenKind::KwJ) => true,
            Some(TokenKind::LParen) => !self.at_binder_group(),
            _ => false,
        }
    }

    fn app_level(&mut self) -> Result<SurfaceTerm, ParseError> {
        let mut t = self.atom()?;
        while self.at_atom() {
            let arg = self.atom()?;
            let span = t.span().join(arg.span());
            t = SurfaceTerm::App {
                fun: Box::new(t),
                arg: Box::new(arg),
                span,
            };
        }
        loop {
            match self.peek() {
                Some(TokenKind::OpSharpIntro) => {
                    let tok = self.bump().unwrap();
                    let span = t.span().join(&tok.span);
                    t = SurfaceTerm::SharpIntro(Box::new(t), span);
                }
                Some(TokenKind::OpSharpElim) => {
                    let tok = self.bump().unwrap();
                    let span = t.span().join(&tok.span);
                    t = SurfaceTerm::SharpElim(Box::new(t), span);
                }
                Some(TokenKind::OpFlatIntro) => {
                    let tok = self.bump().unwrap();
                    let span = t.span().join(&tok.span);
                    t = SurfaceTerm::FlatIntro(Box::new(t), span);
                }
                Some(TokenKind::Proj1) => {
                    let tok = self.bump().unwrap();
                    let span = t.span().join(&tok.span);
                    t = SurfaceTerm::Fst(Box::new(t), span);
                }
                Some(TokenKind::Proj2) => {
                    let tok = self.bump().unwrap();
                    let span = t.span().join(&tok.span);
                    t = SurfaceTerm::Snd(Box::new(t), span);
                }
                _ => break,
            }
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<SurfaceTerm, ParseError> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let (name, span) = self.expect_ident()?;
                Ok(SurfaceTerm::Ident(name, span))
            }
            Some(TokenKind::KwType) => {
                let start = self.here();
                self.bump();
                match self.peek() {
                    Some(TokenKind::Nat(_)) => {
                        let tok = self.bump().unwrap();
                        let n = match tok.kind {
                            TokenKind::Nat(n) => n,
                            _ => unreachable!(),
                        };
                        Ok(SurfaceTerm::Universe(n, start.join(&tok.span)))
                    }
                    _ => Err(self.error("'Type' needs a universe index", Some("a number"))),
                }
            }
            Some(TokenKind::KwUnit) => {
                let tok = self.bump().unwrap();
                Ok(SurfaceTerm::Unit(tok.span))
            }
            Some(TokenKind::KwStar) => {
                let tok = self.bump().unwrap();
                Ok(SurfaceTerm::Star(tok.span))
            }
            Some(TokenKind::KwSharp) => {
                let start = self.here();
                self.bump();
                let inner = self.atom()?;
                let span = start.join(inner.span());
                Ok(SurfaceTerm::SharpTy(Box::new(inner), span))
            }
            Some(TokenKind::KwFlat) => {
                let start = self.here();
                self.bump();
                let inner = self.atom()?;
                let span = start.join(inner.span());
                Ok(SurfaceTerm::FlatTy(Box::new(inner), span))
            }
            Some(TokenKind::KwId) => {
                let start = self.here();
                self.bump();
                let ty = self.atom()?;
                let lhs = self.atom()?;
                let rhs = self.atom()?;
                let span = start.join(rhs.span());
                Ok(SurfaceTerm::IdType {
                    ty: Box::new(ty),
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    span,
                })
            }
            Some(TokenKind::KwRefl) => {
                let start = self.here();
                self.bump();
                let inner = self.atom()?;
                let span = start.join(inner.span());
                Ok(SurfaceTerm::Refl(Box::new(inner), span))
            }
            Some(TokenKind::KwJ) => {
                let start = self.here();
                self.bump();
                self.expect(TokenKind::LParen)?;
                let (x, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let (y, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let (p, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let motive = self.term()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::LParen)?;
                let (base_binder, _) = self.expect_ident()?;
                self.expect(TokenKind::Dot)?;
                let base = self.term()?;
                self.expect(TokenKind::RParen)?;
                let lhs = self.atom()?;
                let rhs = self.atom()?;
                let proof = self.atom()?;
                let span = start.join(proof.span());
                Ok(SurfaceTerm::J {
                    motive_binders: [x, y, p],
                    motive: Box::new(motive),
                    base_binder,
                    base: Box::new(base),
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                    proof: Box::new(proof),
                    span,
                })
            }
            Some(TokenKind::LParen) => {
                let start = self.here();
                self.bump();
                let first = self.term()?;
                match self.peek() {
                    Some(TokenKind::Comma) => {
                        self.bump();
                        let second = self.term()?;
                        let close = self.expect(TokenKind::RParen)?;
                        Ok(SurfaceTerm::Pair {
                            fst: Box::new(first),
                            snd: Box::new(second),
                            span: start.join(&close.span),
                        })
                    }
                    _ => {
                        self.expect(TokenKind::RParen)?;
                        Ok(first)
                    }
                }
            }
            Some(k) => Err(self.error(format!("unexpected {}", k.describe()), Some("a term"))),
            None => Err(self.error("unexpected end of file", Some("a term"))),
        }
    }
}
