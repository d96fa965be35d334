//! Recursive-descent parser.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | variable | parameter | func "(" expr ")"
//!         | "e" "^" unary | "(" expr ")" ;
//! ```

use super::lexer::{tokenize, Token, TokenKind};
use super::{Expr, Func};
use crate::error::{Error, Result};

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    dim: usize,
    params: &'a [&'a str],
}

impl<'a> Parser<'a> {
    pub fn new(source: &str, dim: usize, params: &'a [&'a str]) -> Result<Self> {
        Ok(Parser {
            tokens: tokenize(source)?,
            pos: 0,
            dim,
            params,
        })
    }

    pub fn parse(mut self) -> Result<Expr> {
        if self.peek().kind == TokenKind::Eof {
            return Err(self.error_here("empty expression"));
        }
        let e = self.expr()?;
        if self.peek().kind != TokenKind::Eof {
            let t = self.peek().clone();
            return Err(Error::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected {} after expression", t.describe()),
            });
        }
        Ok(e)
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_kind_at(&self, offset: usize) -> &TokenKind {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: &str) -> Error {
        let t = self.peek();
        Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        if self.peek().kind == kind {
            self.bump();
            Ok(())
        } else {
            let t = self.peek().clone();
            Err(Error::Syntax {
                line: t.line,
                column: t.column,
                message: format!(
                    "expected {}, found {}",
                    Token {
                        kind,
                        line: 0,
                        column: 0
                    }
                    .describe(),
                    t.describe()
                ),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                TokenKind::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                TokenKind::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek().kind {
            TokenKind::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            TokenKind::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().kind == TokenKind::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.bump();
        match tok.kind {
            TokenKind::Number(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => self.identifier(name, tok.line, tok.column),
            _ => Err(Error::Syntax {
                line: tok.line,
                column: tok.column,
                message: format!("unexpected {}", tok.describe()),
            }),
        }
    }

    fn identifier(&mut self, name: String, line: usize, column: usize) -> Result<Expr> {
        if let Some(index) = variable_index(&name) {
            if index == 0 || index > self.dim {
                return Err(Error::VariableOutOfRange { index, dim: self.dim });
            }
            return Ok(Expr::Var(index - 1));
        }
        if self.params.contains(&name.as_str()) {
            return Ok(Expr::Param(name));
        }
        if let Some(func) = Func::from_name(&name) {
            if self.peek().kind == TokenKind::LParen {
                self.bump();
                let arg = self.expr()?;
                self.expect(TokenKind::RParen)?;
                return Ok(Expr::Call(func, Box::new(arg)));
            }
            return Err(Error::Syntax {
                line,
                column,
                message: format!("function `{name}` must be followed by `(`"),
            });
        }
        // `e^u` is sugar for `exp(u)`
        if name == "e" && *self.peek_kind_at(0) == TokenKind::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Call(Func::Exp, Box::new(exponent)));
        }
        Err(Error::UnknownIdentifier { name, line, column })
    }
}

/// `x<digits>` names variable `<digits>` (1-based).
fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().or(Some(usize::MAX))
}
