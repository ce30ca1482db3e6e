use std::f64::consts::PI;

use super::{Expr, ExprError, Func, Mode, Var};

/// Maximum nesting depth of the parsed tree.
pub const MAX_DEPTH: usize = 256;
const MAX_EXPONENT: i64 = 1024;
const MAX_RECURSION: usize = 4 * MAX_DEPTH;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, imag: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&b) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let single = |t| Ok((t, start));
        match b {
            b'+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            b'-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            b'*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            b'/' => {
                self.pos += 1;
                single(Tok::Slash)
            }
            b'^' => {
                self.pos += 1;
                single(Tok::Caret)
            }
            b'(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            b')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            b'0'..=b'9' | b'.' => self.number(start),
            b if b.is_ascii_alphabetic() || b == b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii identifier")
                    .to_string();
                Ok((Tok::Ident(word), start))
            }
            _ => Err(syntax(start, format!("unexpected byte 0x{b:02x}"))),
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ExprError> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(syntax(start, "malformed number".into()));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(syntax(save, "malformed exponent in number".into()));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text
            .parse()
            .map_err(|_| syntax(start, "malformed number".into()))?;
        if !value.is_finite() {
            return Err(syntax(start, "number literal out of range".into()));
        }
        let mut imag = false;
        if self.src.get(self.pos) == Some(&b'i') {
            let after = self.src.get(self.pos + 1);
            if !after.is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
                self.pos += 1;
                imag = true;
            }
        }
        if self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_' || *c == b'.')
        {
            return Err(syntax(self.pos, "unexpected character after number".into()));
        }
        Ok((Tok::Num { value, imag }, start))
    }
}

fn syntax(offset: usize, message: String) -> ExprError {
    ExprError::Syntax { offset, message }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
    mode: Mode,
}

/// Parse result paired with the depth of the produced subtree.
type Node = (Expr, usize);

pub(super) fn parse_expr(src: &[u8], mode: Mode) -> Result<Expr, ExprError> {
    let mut lexer = Lexer { src, pos: 0 };
    let (tok, at) = lexer.next()?;
    let mut p = Parser {
        lexer,
        tok,
        at,
        mode,
    };
    if p.tok == Tok::End {
        return Err(syntax(p.at, "empty expression".into()));
    }
    let (e, _) = p.expr(0)?;
    if p.tok != Tok::End {
        let msg = match p.tok {
            Tok::RParen => "unbalanced ')'".to_string(),
            _ => "unexpected token".to_string(),
        };
        return Err(syntax(p.at, msg));
    }
    Ok(e)
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn guard_rec(&self, rec: usize) -> Result<(), ExprError> {
        if rec > MAX_RECURSION {
            Err(syntax(self.at, "expression nested too deeply".into()))
        } else {
            Ok(())
        }
    }

    fn guard(&self, depth: usize) -> Result<(), ExprError> {
        if depth > MAX_DEPTH {
            Err(syntax(self.at, "expression nested too deeply".into()))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self, rec: usize) -> Result<Node, ExprError> {
        self.guard_rec(rec)?;
        let (mut lhs, mut d) = self.term(rec + 1)?;
        loop {
            let op = match self.tok {
                Tok::Plus => Expr::Add as fn(Box<Expr>, Box<Expr>) -> Expr,
                Tok::Minus => Expr::Sub,
                _ => break,
            };
            self.bump()?;
            let (rhs, rd) = self.term(rec + 1)?;
            d = d.max(rd) + 1;
            self.guard(d)?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, d))
    }

    fn term(&mut self, rec: usize) -> Result<Node, ExprError> {
        self.guard_rec(rec)?;
        let (mut lhs, mut d) = self.unary(rec + 1)?;
        loop {
            let op = match self.tok {
                Tok::Star => Expr::Mul as fn(Box<Expr>, Box<Expr>) -> Expr,
                Tok::Slash => Expr::Div,
                _ => break,
            };
            self.bump()?;
            let (rhs, rd) = self.unary(rec + 1)?;
            d = d.max(rd) + 1;
            self.guard(d)?;
            lhs = op(Box::new(lhs), Box::new(rhs));
        }
        Ok((lhs, d))
    }

    fn unary(&mut self, rec: usize) -> Result<Node, ExprError> {
        self.guard_rec(rec)?;
        if self.tok == Tok::Minus {
            self.bump()?;
            let (inner, d) = self.unary(rec + 1)?;
            return Ok((Expr::Neg(Box::new(inner)), d + 1));
        }
        self.power(rec + 1)
    }

    fn power(&mut self, rec: usize) -> Result<Node, ExprError> {
        let (mut base, mut d) = self.atom(rec + 1)?;
        while self.tok == Tok::Caret {
            self.bump()?;
            let negative = if self.tok == Tok::Minus {
                self.bump()?;
                true
            } else {
                false
            };
            let at = self.at;
            let n = match self.tok {
                Tok::Num { value, imag: false }
                    if value.fract() == 0.0 && value.abs() <= MAX_EXPONENT as f64 =>
                {
                    // Reject forms like `2.0` or `2e0`: only plain digit runs.
                    let text = &self.lexer.src[at..self.lexer.pos];
                    if !text.iter().all(u8::is_ascii_digit) {
                        return Err(syntax(at, "exponent must be an integer literal".into()));
                    }
                    value as i32
                }
                Tok::Num { .. } => {
                    return Err(syntax(at, "exponent must be an integer literal".into()))
                }
                Tok::End => return Err(syntax(at, "missing exponent".into())),
                _ => return Err(syntax(at, "exponent must be an integer literal".into())),
            };
            self.bump()?;
            d += 1;
            self.guard(d)?;
            base = Expr::Pow(Box::new(base), if negative { -n } else { n });
        }
        Ok((base, d))
    }

    fn atom(&mut self, rec: usize) -> Result<Node, ExprError> {
        self.guard_rec(rec)?;
        let at = self.at;
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num { value, imag } => {
                if imag && self.mode == Mode::RealSmooth {
                    return Err(ExprError::Mode {
                        offset: at,
                        message: "imaginary literal in a real_smooth expression".into(),
                    });
                }
                self.bump()?;
                Ok((if imag { Expr::Imag(value) } else { Expr::Real(value) }, 1))
            }
            Tok::Ident(name) => {
                self.bump()?;
                if let Some(f) = Func::from_name(&name) {
                    if self.tok != Tok::LParen {
                        return Err(syntax(self.at, format!("expected '(' after {name}")));
                    }
                    self.bump()?;
                    let (arg, d) = self.expr(rec + 1)?;
                    self.expect_rparen(at)?;
                    return Ok((Expr::Call(f, Box::new(arg)), d + 1));
                }
                let leaf = match name.as_str() {
                    "z" => self.var(Var::Z, at)?,
                    "x" => self.var(Var::X, at)?,
                    "y" => self.var(Var::Y, at)?,
                    "i" => {
                        if self.mode == Mode::RealSmooth {
                            return Err(ExprError::Mode {
                                offset: at,
                                message: "imaginary unit in a real_smooth expression".into(),
                            });
                        }
                        Expr::Imag(1.0)
                    }
                    "pi" => Expr::Real(PI),
                    _ => return Err(syntax(at, format!("unknown identifier '{name}'"))),
                };
                if self.tok == Tok::LParen {
                    return Err(syntax(self.at, format!("'{name}' is not a function")));
                }
                Ok((leaf, 1))
            }
            Tok::LParen => {
                self.bump()?;
                let (inner, d) = self.expr(rec + 1)?;
                self.expect_rparen(at)?;
                Ok((inner, d))
            }
            Tok::End => Err(syntax(at, "unexpected end of input".into())),
            Tok::RParen => Err(syntax(at, "unbalanced ')'".into())),
            _ => Err(syntax(at, "expected a number, variable or '('".into())),
        }
    }

    fn var(&self, v: Var, at: usize) -> Result<Expr, ExprError> {
        let ok = match self.mode {
            Mode::Analytic => v == Var::Z,
            Mode::RealSmooth => v != Var::Z,
        };
        if !ok {
            return Err(ExprError::Mode {
                offset: at,
                message: format!("variable not allowed in a {} expression", self.mode),
            });
        }
        Ok(Expr::Var(v))
    }

    fn expect_rparen(&mut self, open_at: usize) -> Result<(), ExprError> {
        match self.tok {
            Tok::RParen => self.bump(),
            Tok::End => Err(syntax(open_at, "unbalanced '('".into())),
            _ => Err(syntax(self.at, "expected ')'".into())),
        }
    }
}
