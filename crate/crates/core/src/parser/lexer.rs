//! Lexer for the `.coh` surface syntax. ASCII keywords with a few Unicode
//! aliases; `--` comments run to end of line.

use super::surface::SourceSpan;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    KwDef,
    KwPostulate,
    KwRewrite,
    KwLetflat,
    KwMotive,
    KwIn,
    KwFun,
    KwType,
    KwUnit,
    KwStar,
    KwSharp,
    KwFlat,
    KwId,
    KwRefl,
    KwJ,
    Ident(String),
    Nat(u32),
    LParen,
    RParen,
    Colon,
    Comma,
    Dot,
    Assign,
    Arrow,
    DArrow,
    Times,
    Proj1,
    Proj2,
    OpSharpIntro,
    OpSharpElim,
    OpFlatIntro,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::KwDef => "'def'".into(),
            TokenKind::KwPostulate => "'postulate'".into(),
            TokenKind::KwRewrite => "'rewrite'".into(),
            TokenKind::KwLetflat => "'letflat'".into(),
            TokenKind::KwMotive => "'motive'".into(),
            TokenKind::KwIn => "'in'".into(),
            TokenKind::KwFun => "'fun'".into(),
            TokenKind::KwType => "'Type'".into(),
            TokenKind::KwUnit => "'Unit'".into(),
            TokenKind::KwStar => "'star'".into(),
            TokenKind::KwSharp => "'Sharp'".into(),
            TokenKind::KwFlat => "'Flat'".into(),
            TokenKind::KwId => "'Id'".into(),
            TokenKind::KwRefl => "'refl'".into(),
            TokenKind::KwJ => "'J'".into(),
            TokenKind::Ident(s) => format!("identifier '{}'", s),
            TokenKind::Nat(n) => format!("number {}", n),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
            TokenKind::Colon => "':'".into(),
            TokenKind::Comma => "','".into(),
            TokenKind::Dot => "'.'".into(),
            TokenKind::Assign => "':='".into(),
            TokenKind::Arrow => "'->'".into(),
            TokenKind::DArrow => "'=>'".into(),
            TokenKind::Times => "'*'".into(),
            TokenKind::Proj1 => "'.1'".into(),
            TokenKind::Proj2 => "'.2'".into(),
            TokenKind::OpSharpIntro => "'^sharp'".into(),
            TokenKind::OpSharpElim => "'_sharp'".into(),
            TokenKind::OpFlatIntro => "'^flat'".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span_from(&self, start: (u32, u32)) -> SourceSpan {
        // The end column points at the last consumed character.
        let end_col = if self.col > 1 { self.col - 1 } else { 1 };
        SourceSpan::new(self.file, start.0, start.1, self.line, end_col)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "def" => TokenKind::KwDef,
        "postulate" => TokenKind::KwPostulate,
        "rewrite" => TokenKind::KwRewrite,
        "letflat" => TokenKind::KwLetflat,
        "motive" => TokenKind::KwMotive,
        "in" => TokenKind::KwIn,
        "fun" => TokenKind::KwFun,
        "Type" => TokenKind::KwType,
        "Unit" => TokenKind::KwUnit,
        "star" => TokenKind::KwStar,
        "Sharp" => TokenKind::KwSharp,
        "Flat" => TokenKind::KwFlat,
        "Id" => TokenKind::KwId,
        "refl" => TokenKind::KwRefl,
        "J" => TokenKind::KwJ,
        "_sharp" => TokenKind::OpSharpElim,
        _ => return None,
    })
}

/// Turns UTF-8 source text into a token list, or the first lexical error.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
    };
    let mut tokens = Vec::new();

    loop {
        // Skip whitespace and comments.
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('-') if cur.peek2() == Some('-') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }

        let start = cur.here();
        let c = match cur.peek() {
            Some(c) => c,
            None => break,
        };

        let kind = if is_ident_start(c) {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if is_ident_continue(c) {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            keyword(&word).unwrap_or(TokenKind::Ident(word))
        } else if c.is_ascii_digit() {
            let mut n: u32 = 0;
            while let Some(c) = cur.peek() {
                if let Some(d) = c.to_digit(10) {
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(d))
                        .ok_or_else(|| ParseError {
                            message: "numeric literal too large".into(),
                            span: SourceSpan::point(file, start.0, start.1),
                            expected: None,
                        })?;
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Nat(n)
        } else {
            match c {
                '(' => {
                    cur.bump();
                    TokenKind::LParen
                }
                ')' => {
                    cur.bump();
                    TokenKind::RParen
                }
                ',' => {
                    cur.bump();
                    TokenKind::Comma
                }
                '*' | '×' => {
                    cur.bump();
                    TokenKind::Times
                }
                '→' => {
                    cur.bump();
                    TokenKind::Arrow
                }
                '♯' => {
                    cur.bump();
                    TokenKind::KwSharp
                }
                '♭' => {
                    cur.bump();
                    TokenKind::KwFlat
                }
                ':' => {
                    cur.bump();
                    if cur.peek() == Some('=') {
                        cur.bump();
                        TokenKind::Assign
                    } else {
                        TokenKind::Colon
                    }
                }
                '-' => {
                    cur.bump();
                    if cur.peek() == Some('>') {
                        cur.bump();
                        TokenKind::Arrow
                    } else {
                        return Err(ParseError {
                            message: "stray '-'".into(),
                            span: SourceSpan::point(file, start.0, start.1),
                            expected: Some("'->'".into()),
                        });
                    }
                }
                '=' => {
                    cur.bump();
                    if cur.peek() == Some('>') {
                        cur.bump();
                        TokenKind::DArrow
                    } else {
                        return Err(ParseError {
                            message: "stray '='".into(),
                            span: SourceSpan::point(file, start.0, start.1),
                            expected: Some("'=>'".into()),
                        });
                    }
                }
                '.' => {
                    cur.bump();
                    match cur.peek() {
                        Some('1') => {
                            cur.bump();
                            TokenKind::Proj1
                        }
                        Some('2') => {
                            cur.bump();
                            TokenKind::Proj2
                        }
                        _ => TokenKind::Dot,
                    }
                }
                '^' => {
                    cur.bump();
                    let mut word = String::new();
                    while let Some(c) = cur.peek() {
                        if is_ident_continue(c) {
                            word.push(c);
                            cur.bump();
                        } else {
                            break;
                        }
                    }
                    match word.as_str() {
                        "sharp" => TokenKind::OpSharpIntro,
                        "flat" => TokenKind::OpFlatIntro,
                        _ => {
                            return Err(ParseError {
                                message: format!("unknown postfix '^{}'", word),
                                span: cur.span_from(start),
                                expected: Some("'^sharp' or '^flat'".into()),
                            })
                        }
                    }
                }
                other => {
                    return Err(ParseError {
                        message: format!("illegal character '{}'", other),
                        span: SourceSpan::point(file, start.0, start.1),
                        expected: None,
                    })
                }
            }
        };

        tokens.push(Token {
            kind,
            span: cur.span_from(start),
        });
    }

    Ok(tokens)
}
