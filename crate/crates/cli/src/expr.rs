//! Arithmetic expressions from config strings, compiled to a slot-indexed
//! stack program so evaluation needs no lookups and is thread-safe.

use std::str::FromStr;

use meval::tokenizer::{Operation, Token};

#[derive(Debug, Clone, Copy)]
enum Op {
    Num(f64),
    Slot(usize),
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Pow,
    Neg,
    F1(fn(f64) -> f64),
    Atan2,
    Max(usize),
    Min(usize),
}

#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

fn unary(name: &str) -> Option<fn(f64) -> f64> {
    Some(match name {
        "sqrt" => f64::sqrt,
        "exp" => f64::exp,
        "ln" => f64::ln,
        "abs" => f64::abs,
        "sin" => f64::sin,
        "cos" => f64::cos,
        "tan" => f64::tan,
        "asin" => f64::asin,
        "acos" => f64::acos,
        "atan" => f64::atan,
        "sinh" => f64::sinh,
        "cosh" => f64::cosh,
        "tanh" => f64::tanh,
        "floor" => f64::floor,
        "ceil" => f64::ceil,
        "round" => f64::round,
        "signum" => f64::signum,
        _ => return None,
    })
}

impl Compiled {
    /// Parses `src` with the variables `vars`, which become slots in order.
    pub fn new(src: &str, vars: &[&str]) -> Result<Self, String> {
        let expr = meval::Expr::from_str(src).map_err(|e| format!("cannot parse '{src}': {e}"))?;
        let mut ops = Vec::new();
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for tok in expr.iter() {
            let (op, pops) = match tok {
                Token::Number(v) => (Op::Num(*v), 0),
                Token::Var(name) => match vars.iter().position(|v| v == name) {
                    Some(k) => (Op::Slot(k), 0),
                    None => match name.as_str() {
                        "pi" => (Op::Num(std::f64::consts::PI), 0),
                        "e" => (Op::Num(std::f64::consts::E), 0),
                        _ => return Err(format!("unknown variable '{name}' in '{src}' (allowed: {})", vars.join(", "))),
                    },
                },
                Token::Binary(o) => (
                    match o {
                        Operation::Plus => Op::Add,
                        Operation::Minus => Op::Sub,
                        Operation::Times => Op::Mul,
                        Operation::Div => Op::Div,
                        Operation::Rem => Op::Rem,
                        Operation::Pow => Op::Pow,
                    },
                    2,
                ),
                Token::Unary(Operation::Minus) => (Op::Neg, 1),
                Token::Unary(_) => continue,
                Token::Func(name, Some(n)) => match (name.as_str(), *n) {
                    ("max", k) if k >= 1 => (Op::Max(k), k),
                    ("min", k) if k >= 1 => (Op::Min(k), k),
                    ("atan2", 2) => (Op::Atan2, 2),
                    (f, 1) if unary(f).is_some() => (Op::F1(unary(f).unwrap()), 1),
                    _ => return Err(format!("unknown function '{name}' with {n} arguments in '{src}'")),
                },
                other => return Err(format!("unexpected token {other:?} in '{src}'")),
            };
            if depth < pops {
                return Err(format!("malformed expression '{src}'"));
            }
            depth = depth - pops + 1;
            max_depth = max_depth.max(depth);
            ops.push(op);
        }
        if depth != 1 {
            return Err(format!("malformed expression '{src}'"));
        }
        Ok(Self {
            ops,
            depth: max_depth,
        })
    }

    /// Whether the variable in slot `k` occurs.
    pub fn uses(&self, k: usize) -> bool {
        self.ops.iter().any(|op| matches!(op, Op::Slot(j) if *j == k))
    }

    /// Evaluates with `args[k]` bound to the k-th variable.
    pub fn eval(&self, args: &[f64]) -> f64 {
        let mut small = [0.0f64; 32];
        let mut big;
        let stack: &mut [f64] = if self.depth <= small.len() {
            &mut small
        } else {
            big = vec![0.0; self.depth];
            &mut big
        };
        let mut top = 0usize;
        for op in &self.ops {
            match *op {
                Op::Num(v) => {
                    stack[top] = v;
                    top += 1;
                }
                Op::Slot(k) => {
                    stack[top] = args[k];
                    top += 1;
                }
                Op::Neg => stack[top - 1] = -stack[top - 1],
                Op::F1(f) => stack[top - 1] = f(stack[top - 1]),
                Op::Max(n) | Op::Min(n) => {
                    let take = &stack[top - n..top];
                    let v = if matches!(op, Op::Max(_)) {
                        take.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                    } else {
                        take.iter().copied().fold(f64::INFINITY, f64::min)
                    };
                    top -= n;
                    stack[top] = v;
                    top += 1;
                }
                _ => {
                    let b = stack[top - 1];
                    let a = stack[top - 2];
                    top -= 1;
                    stack[top - 1] = match op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div => a / b,
                        Op::Rem => a % b,
                        Op::Pow => a.powf(b),
                        Op::Atan2 => a.atan2(b),
                        _ => unreachable!(),
                    };
                }
            }
        }
        stack[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_meval() {
        let cases = [
            "x + 1",
            "-x^2 + 3*y",
            "max(x, y, 0.5) - min(abs(x), 2)",
            "exp(-(1-y)/x)",
            "sqrt(x^2 + y^2) - 0.8",
            "atan2(y, x) + pi",
            "-(x - 2) % 3",
        ];
        for src in cases {
            let c = Compiled::new(src, &["x", "y"]).unwrap();
            for (x, y) in [(0.3, -1.2), (-0.7, 0.4), (2.0, 5.0)] {
                let want = meval::Expr::from_str(src)
                    .unwrap()
                    .eval_with_context(meval::Context::new().var("x", x).var("y", y))
                    .unwrap();
                let got = c.eval(&[x, y]);
                assert!(got == want || (got.is_nan() && want.is_nan()), "{src}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(Compiled::new("q + 1", &["x"]).is_err());
        assert!(Compiled::new("foo(x)", &["x"]).is_err());
        assert!(Compiled::new("x +", &["x"]).is_err());
    }
}
