use super::{BinaryOp, Node, UnaryOp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

/// Recursive-descent parser over a pre-lexed token stream.
pub(super) struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    variables: &'a [String],
    parameters: &'a [String],
    lex_error: Option<Error>,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                } else {
                    return Err(syntax(j, "malformed exponent"));
                }
            }
            let v: f64 = text[start..i]
                .parse()
                .map_err(|_| syntax(start, "malformed number"))?;
            if !v.is_finite() {
                return Err(syntax(start, "number out of range"));
            }
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(syntax(start, format!("unexpected character `{ch}`")));
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &str, variables: &'a [String], parameters: &'a [String]) -> Self {
        let (toks, lex_error) = match lex(text) {
            Ok(t) => (t, None),
            Err(e) => (vec![(Tok::End, text.len())], Some(e)),
        };
        Parser {
            toks,
            pos: 0,
            variables,
            parameters,
            lex_error,
        }
    }

    pub(super) fn parse(mut self) -> Result<Node> {
        if let Some(e) = self.lex_error.take() {
            return Err(e);
        }
        let node = self.expr()?;
        match self.peek() {
            (Tok::End, _) => Ok(node),
            (Tok::RParen, off) => Err(syntax(off, "unbalanced `)`")),
            (_, off) => Err(syntax(off, "expected operator or end of input")),
        }
    }

    fn peek(&self) -> (Tok, usize) {
        self.toks[self.pos].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let (Tok::Op(c @ ('+' | '-')), _) = self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let (Tok::Op(c @ ('*' | '/')), _) = self.peek() {
            self.bump();
            let rhs = self.factor()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if let (Tok::Op('^'), _) = self.peek() {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Node> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Constant(v)),
            // Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.
            Tok::Op('-') => Ok(Node::Unary(UnaryOp::Neg, Box::new(self.factor()?))),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(off)?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, off),
            Tok::End => Err(syntax(off, "unexpected end of input")),
            Tok::RParen => Err(syntax(off, "unexpected `)`")),
            Tok::Op(c) => Err(syntax(off, format!("unexpected operator `{c}`"))),
        }
    }

    fn identifier(&mut self, name: String, off: usize) -> Result<Node> {
        let called = matches!(self.peek().0, Tok::LParen);
        if let Some(op) = UnaryOp::from_name(&name) {
            if !called {
                return Err(Error::Arity {
                    name,
                    offset: off,
                    message: "function requires one parenthesized argument".into(),
                });
            }
            let (_, open) = self.bump();
            let arg = self.expr()?;
            self.expect_rparen(open)?;
            return Ok(Node::Unary(op, Box::new(arg)));
        }
        let node = if let Some(i) = self.variables.iter().position(|v| *v == name) {
            Node::Variable(i)
        } else if let Some(i) = self.parameters.iter().position(|v| *v == name) {
            Node::Parameter(i)
        } else {
            return Err(Error::UnknownIdentifier { name, offset: off });
        };
        if called {
            return Err(Error::Arity {
                name,
                offset: off,
                message: "symbol is not a function".into(),
            });
        }
        Ok(node)
    }

    fn expect_rparen(&mut self, open: usize) -> Result<()> {
        match self.bump() {
            (Tok::RParen, _) => Ok(()),
            (Tok::End, off) => Err(syntax(off, format!("unclosed `(` opened at offset {open}"))),
            (_, off) => Err(syntax(off, "expected `)`")),
        }
    }
}
