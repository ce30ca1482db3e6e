use super::{Expr, Func, Var};

pub(super) fn is_constant(e: &Expr) -> bool {
    match e {
        Expr::Real(_) | Expr::Imag(_) => true,
        Expr::Var(_) => false,
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => is_constant(a),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            is_constant(a) && is_constant(b)
        }
    }
}

/// `d/dz` of an analytic tree.
pub(super) fn derivative(e: &Expr) -> Expr {
    match e {
        Expr::Real(_) | Expr::Imag(_) => Expr::Real(0.0),
        Expr::Var(Var::Z) => Expr::Real(1.0),
        Expr::Var(_) => Expr::Real(0.0),
        Expr::Neg(a) => neg(derivative(a)),
        Expr::Add(a, b) => add(derivative(a), derivative(b)),
        Expr::Sub(a, b) => sub(derivative(a), derivative(b)),
        Expr::Mul(a, b) => add(
            mul(derivative(a), (**b).clone()),
            mul((**a).clone(), derivative(b)),
        ),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = sub(
                mul(derivative(a), (**b).clone()),
                mul((**a).clone(), derivative(b)),
            );
            div(num, pow((**b).clone(), 2))
        }
        Expr::Pow(a, n) => {
            if *n == 0 {
                return Expr::Real(0.0);
            }
            mul(
                mul(Expr::Real(*n as f64), pow((**a).clone(), n - 1)),
                derivative(a),
            )
        }
        Expr::Call(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Exp => call(Func::Exp, inner),
                Func::Sin => call(Func::Cos, inner),
                Func::Cos => neg(call(Func::Sin, inner)),
                Func::Sinh => call(Func::Cosh, inner),
                Func::Cosh => call(Func::Sinh, inner),
            };
            mul(derivative(a), outer)
        }
    }
}

fn real(e: &Expr) -> Option<f64> {
    match e {
        Expr::Real(v) => Some(*v),
        _ => None,
    }
}

fn is_zero(e: &Expr) -> bool {
    real(e) == Some(0.0)
}

fn is_one(e: &Expr) -> bool {
    real(e) == Some(1.0)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Real(v) => Expr::Real(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    match (real(&a), real(&b)) {
        (Some(x), Some(y)) => Expr::Real(x + y),
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return neg(b);
    }
    match (real(&a), real(&b)) {
        (Some(x), Some(y)) => Expr::Real(x - y),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return Expr::Real(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    match (real(&a), real(&b)) {
        (Some(x), Some(y)) => Expr::Real(x * y),
        (None, Some(_)) => mul(b, a),
        (Some(x), None) => match b {
            // Fold a leading constant into an existing constant factor.
            Expr::Mul(l, r) if real(&l).is_some() => Expr::Mul(Box::new(Expr::Real(x * real(&l).unwrap())), r),
            b => Expr::Mul(Box::new(a), Box::new(b)),
        },
        (None, None) => match b {
            // Keep the constant in front: a * (c * r) -> c * (a * r).
            Expr::Mul(l, r) if real(&l).is_some() => Expr::Mul(l, Box::new(mul(a, *r))),
            b => Expr::Mul(Box::new(a), Box::new(b)),
        },
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return Expr::Real(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::Real(1.0),
        1 => a,
        n => match real(&a) {
            Some(v) => Expr::Real(v.powi(n)),
            None => Expr::Pow(Box::new(a), n),
        },
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}
