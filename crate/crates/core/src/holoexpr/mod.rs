//! Seed expressions: a small complex-analytic expression language.
//!
//! Two modes share one grammar. `Analytic` expressions are functions of the
//! complex variable `z`; `RealSmooth` expressions are real functions of `x`
//! and `y`. Exponents are integer literals only, so every expression is
//! single-valued on its domain. See `docs/expression-grammar.md` for the EBNF.

mod calculus;
mod parser;

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub use parser::MAX_DEPTH;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Analytic,
    RealSmooth,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Analytic => f.write_str("analytic"),
            Mode::RealSmooth => f.write_str("real_smooth"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("mode error at byte {offset}: {message}")]
    Mode { offset: usize, message: String },
    #[error("evaluation error: {0}")]
    Eval(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Z,
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    fn apply(self, v: Complex64) -> Complex64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Real(f64),
    /// Imaginary literal `v i`.
    Imag(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Point at which an expression is evaluated; must match the mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Z(Complex64),
    Xy(f64, f64),
}

/// A parsed expression tagged with its mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    mode: Mode,
    root: Expr,
}

/// Parses `src` in the given mode.
pub fn parse(src: &str, mode: Mode) -> Result<ExprAst, ExprError> {
    let root = parser::parse_expr(src.as_bytes(), mode)?;
    Ok(ExprAst { mode, root })
}

impl ExprAst {
    pub fn new(mode: Mode, root: Expr) -> Self {
        Self { mode, root }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Fully parenthesised text that reparses to the same tree.
    pub fn render(&self) -> String {
        let mut out = String::new();
        render_into(&self.root, &mut out);
        out
    }

    pub fn eval(&self, point: Point) -> Result<Complex64, ExprError> {
        let env = match (self.mode, point) {
            (Mode::Analytic, Point::Z(z)) => Env::Z(z),
            (Mode::RealSmooth, Point::Xy(x, y)) => Env::Xy(x, y),
            (mode, _) => {
                return Err(ExprError::Mode {
                    offset: 0,
                    message: format!("point shape does not match {mode} expression"),
                })
            }
        };
        let v = eval_node(&self.root, env)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(ExprError::Eval("non-finite result".into()));
        }
        match self.mode {
            Mode::Analytic => Ok(v),
            Mode::RealSmooth => Ok(Complex64::new(v.re, 0.0)),
        }
    }

    pub fn eval_z(&self, z: Complex64) -> Result<Complex64, ExprError> {
        self.eval(Point::Z(z))
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64, ExprError> {
        self.eval(Point::Xy(x, y)).map(|v| v.re)
    }

    /// Symbolic `d/dz`; only defined for analytic expressions.
    pub fn differentiate(&self) -> Result<ExprAst, ExprError> {
        if self.mode != Mode::Analytic {
            return Err(ExprError::Mode {
                offset: 0,
                message: "differentiation needs an analytic expression".into(),
            });
        }
        Ok(ExprAst {
            mode: Mode::Analytic,
            root: calculus::derivative(&self.root),
        })
    }

    /// True if the tree contains no variable.
    pub fn is_constant(&self) -> bool {
        calculus::is_constant(&self.root)
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Clone, Copy)]
enum Env {
    Z(Complex64),
    Xy(f64, f64),
}

fn eval_node(e: &Expr, env: Env) -> Result<Complex64, ExprError> {
    Ok(match e {
        Expr::Real(v) => Complex64::new(*v, 0.0),
        Expr::Imag(v) => Complex64::new(0.0, *v),
        Expr::Var(var) => match (var, env) {
            (Var::Z, Env::Z(z)) => z,
            (Var::X, Env::Xy(x, _)) => x.into(),
            (Var::Y, Env::Xy(_, y)) => y.into(),
            _ => return Err(ExprError::Eval("variable not bound in this mode".into())),
        },
        Expr::Neg(a) => -eval_node(a, env)?,
        Expr::Add(a, b) => eval_node(a, env)? + eval_node(b, env)?,
        Expr::Sub(a, b) => eval_node(a, env)? - eval_node(b, env)?,
        Expr::Mul(a, b) => eval_node(a, env)? * eval_node(b, env)?,
        Expr::Div(a, b) => {
            let num = eval_node(a, env)?;
            let den = eval_node(b, env)?;
            if den.re == 0.0 && den.im == 0.0 {
                return Err(ExprError::Eval("division by zero".into()));
            }
            num / den
        }
        Expr::Pow(a, n) => {
            let base = eval_node(a, env)?;
            if *n < 0 && base.re == 0.0 && base.im == 0.0 {
                return Err(ExprError::Eval("division by zero".into()));
            }
            base.powi(*n)
        }
        Expr::Call(f, a) => f.apply(eval_node(a, env)?),
    })
}

fn render_real(v: f64, out: &mut String) {
    // `{:?}` is the shortest round-trip representation and always carries a
    // decimal point or exponent.
    out.push_str(&format!("{v:?}"));
}

fn render_into(e: &Expr, out: &mut String) {
    match e {
        Expr::Real(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
            out.push_str("(-");
            render_real(-v, out);
            out.push(')');
        }
        Expr::Real(v) => render_real(*v, out),
        Expr::Imag(v) if *v < 0.0 => {
            out.push_str("(-");
            render_real(-v, out);
            out.push_str("i)");
        }
        Expr::Imag(v) => {
            render_real(*v, out);
            out.push('i');
        }
        Expr::Var(Var::Z) => out.push('z'),
        Expr::Var(Var::X) => out.push('x'),
        Expr::Var(Var::Y) => out.push('y'),
        Expr::Neg(a) => {
            out.push_str("(-");
            render_into(a, out);
            out.push(')');
        }
        Expr::Add(a, b) => render_binary(a, " + ", b, out),
        Expr::Sub(a, b) => render_binary(a, " - ", b, out),
        Expr::Mul(a, b) => render_binary(a, " * ", b, out),
        Expr::Div(a, b) => render_binary(a, " / ", b, out),
        Expr::Pow(a, n) => {
            out.push('(');
            render_into(a, out);
            out.push_str(&format!("^{n})"));
        }
        Expr::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            render_into(a, out);
            out.push(')');
        }
    }
}

fn render_binary(a: &Expr, op: &str, b: &Expr, out: &mut String) {
    out.push('(');
    render_into(a, out);
    out.push_str(op);
    render_into(b, out);
    out.push(')');
}
