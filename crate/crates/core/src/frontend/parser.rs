//! Lexer and recursive-descent parser for the concrete syntax:
//!
//! ```text
//! def Name(x) = expr
//! expr   ::= case expr of { branch | branch | ... }  |  rexpr
//! branch ::= c(y1, ..., yn) -> expr   (nullary parentheses omitted)
//! rexpr  ::= F(expr) | c(expr, ..., expr) | x
//! ```
//!
//! Identifiers beginning with an uppercase letter are function names;
//! everything else names constructors or variables. `#` starts a comment
//! running to the end of the line.

use std::fmt;

use super::{Span, SurfaceBranch, SurfaceDef, SurfaceExpr, SurfaceProgram};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("{span}: syntax error: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    fn new(span: Span, message: impl Into<String>) -> ParseError {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Def,
    Case,
    Of,
    Arrow,
    Pipe,
    Equals,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Upper(String),
    Lower(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Def => write!(f, "'def'"),
            Tok::Case => write!(f, "'case'"),
            Tok::Of => write!(f, "'of'"),
            Tok::Arrow => write!(f, "'->'"),
            Tok::Pipe => write!(f, "'|'"),
            Tok::Equals => write!(f, "'='"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::Comma => write!(f, "','"),
            Tok::Upper(s) | Tok::Lower(s) => write!(f, "'{s}'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                chars.next();
                col += 1;
                out.push((Tok::LParen, span));
            }
            ')' => {
                chars.next();
                col += 1;
                out.push((Tok::RParen, span));
            }
            '{' => {
                chars.next();
                col += 1;
                out.push((Tok::LBrace, span));
            }
            '}' => {
                chars.next();
                col += 1;
                out.push((Tok::RBrace, span));
            }
            ',' => {
                chars.next();
                col += 1;
                out.push((Tok::Comma, span));
            }
            '|' => {
                chars.next();
                col += 1;
                out.push((Tok::Pipe, span));
            }
            '=' => {
                chars.next();
                col += 1;
                out.push((Tok::Equals, span));
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    out.push((Tok::Arrow, span));
                } else {
                    return Err(ParseError::new(span, "expected '->' after '-'"));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match ident.as_str() {
                    "def" => Tok::Def,
                    "case" => Tok::Case,
                    "of" => Tok::Of,
                    _ if ident.chars().next().unwrap().is_ascii_uppercase() => Tok::Upper(ident),
                    _ => Tok::Lower(ident),
                };
                out.push((tok, span));
            }
            c => {
                return Err(ParseError::new(span, format!("unexpected character '{c}'")));
            }
        }
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        let (tok, span) = self.next();
        if tok == want {
            Ok(span)
        } else {
            Err(ParseError::new(span, format!("expected {want}, found {tok}")))
        }
    }

    fn lower(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        let (tok, span) = self.next();
        match tok {
            Tok::Lower(name) => Ok((name, span)),
            other => Err(ParseError::new(
                span,
                format!("expected {what}, found {other}"),
            )),
        }
    }

    fn def(&mut self) -> Result<SurfaceDef, ParseError> {
        let span = self.expect(Tok::Def)?;
        let (tok, nspan) = self.next();
        let name = match tok {
            Tok::Upper(name) => name,
            other => {
                return Err(ParseError::new(
                    nspan,
                    format!("expected a function name (uppercase), found {other}"),
                ))
            }
        };
        self.expect(Tok::LParen)?;
        let (param, _) = self.lower("a parameter name (lowercase)")?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Equals)?;
        let body = self.expr()?;
        Ok(SurfaceDef {
            name,
            param,
            body,
            span,
        })
    }

    fn expr(&mut self) -> Result<SurfaceExpr, ParseError> {
        if *self.peek() == Tok::Case {
            let span = self.span();
            self.next();
            let scrutinee = self.expr()?;
            self.expect(Tok::Of)?;
            self.expect(Tok::LBrace)?;
            let mut branches = Vec::new();
            if *self.peek() != Tok::RBrace {
                loop {
                    branches.push(self.branch()?);
                    if *self.peek() == Tok::Pipe {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace)?;
            Ok(SurfaceExpr::Case {
                scrutinee: Box::new(scrutinee),
                branches,
                span,
            })
        } else {
            self.rexpr()
        }
    }

    fn branch(&mut self) -> Result<SurfaceBranch, ParseError> {
        let (ctor, span) = self.lower("a constructor pattern")?;
        let mut binders = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            loop {
                let (b, _) = self.lower("a pattern variable")?;
                binders.push(b);
                match self.next() {
                    (Tok::Comma, _) => continue,
                    (Tok::RParen, _) => break,
                    (other, s) => {
                        return Err(ParseError::new(
                            s,
                            format!("expected ',' or ')' in pattern, found {other}"),
                        ))
                    }
                }
            }
        }
        self.expect(Tok::Arrow)?;
        let body = self.expr()?;
        Ok(SurfaceBranch {
            ctor,
            binders,
            body,
            span,
        })
    }

    fn rexpr(&mut self) -> Result<SurfaceExpr, ParseError> {
        let (tok, span) = self.next();
        match tok {
            Tok::Upper(name) => {
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                if *self.peek() == Tok::Comma {
                    return Err(ParseError::new(
                        self.span(),
                        format!("functions are unary; {name} takes exactly one argument"),
                    ));
                }
                self.expect(Tok::RParen)?;
                Ok(SurfaceExpr::Call(name, Box::new(arg), span))
            }
            Tok::Lower(name) => {
                if *self.peek() == Tok::LParen {
                    self.next();
                    let mut args = Vec::new();
                    loop {
                        args.push(self.expr()?);
                        match self.next() {
                            (Tok::Comma, _) => continue,
                            (Tok::RParen, _) => break,
                            (other, s) => {
                                return Err(ParseError::new(
                                    s,
                                    format!("expected ',' or ')' in arguments, found {other}"),
                                ))
                            }
                        }
                    }
                    Ok(SurfaceExpr::Ctor(name, args, span))
                } else {
                    Ok(SurfaceExpr::Ident(name, span))
                }
            }
            other => Err(ParseError::new(
                span,
                format!("expected an expression, found {other}"),
            )),
        }
    }

    fn program(&mut self) -> Result<SurfaceProgram, ParseError> {
        let mut defs: Vec<SurfaceDef> = Vec::new();
        while *self.peek() != Tok::Eof {
            let def = self.def()?;
            if let Some(prev) = defs.iter().find(|d| d.name == def.name) {
                return Err(ParseError::new(
                    def.span,
                    format!(
                        "function {} is already defined at {}",
                        def.name, prev.span
                    ),
                ));
            }
            defs.push(def);
        }
        Ok(SurfaceProgram { defs })
    }
}

/// Parses a source file into a surface program.
pub fn parse(src: &str) -> Result<SurfaceProgram, ParseError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0 }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity() {
        let p = parse("def Main(x) = x").unwrap();
        assert_eq!(p.defs.len(), 1);
        assert_eq!(p.defs[0].name, "Main");
        assert!(matches!(p.defs[0].body, SurfaceExpr::Ident(ref n, _) if n == "x"));
    }

    #[test]
    fn parses_case_on_call() {
        // The relaxed surface grammar accepts non-variable scrutinees.
        let p = parse("def Main(x) = case Length(x) of { zero -> zero }").unwrap();
        match &p.defs[0].body {
            SurfaceExpr::Case { scrutinee, branches, .. } => {
                assert!(matches!(**scrutinee, SurfaceExpr::Call(ref n, _, _) if n == "Length"));
                assert_eq!(branches.len(), 1);
            }
            other => panic!("expected case, got {other:?}"),
        }
    }

    #[test]
    fn parses_ackermann_shape() {
        let src = "
def Main(a) = Ack(a)
def Ack(a) = case a of {
  pair(m, n) -> case m of {
    zero -> succ(n)
  | succ(x) -> case n of {
      zero -> Ack(pair(x, succ(zero)))
    | succ(y) -> Ack(pair(x, Ack(pair(succ(x), y))))
    }
  }
}
";
        let p = parse(src).unwrap();
        assert_eq!(p.defs.len(), 2);
        assert_eq!(p.defs[1].name, "Ack");
    }

    #[test]
    fn rejects_duplicate_definition() {
        let err = parse("def Main(x) = x def Main(y) = y").unwrap_err();
        assert!(err.message.contains("already defined"));
    }

    #[test]
    fn rejects_nary_call() {
        let err = parse("def Main(x) = F(x, x)").unwrap_err();
        assert!(err.message.contains("unary"));
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse("def Main(x) =\n  case x of zero -> x").unwrap_err();
        assert_eq!(err.span.line, 2);
    }

    #[test]
    fn parses_empty_case() {
        let p = parse("def Main(x) = case x of {}").unwrap();
        match &p.defs[0].body {
            SurfaceExpr::Case { branches, .. } => assert!(branches.is_empty()),
            other => panic!("expected case, got {other:?}"),
        }
    }
}
