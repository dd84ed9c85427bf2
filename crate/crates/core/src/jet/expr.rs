use std::fmt;
use std::sync::Arc;

use super::jet::{Jet, NVARS, TRIG_POLE_GUARD};
use super::EvalError;

/// Elementary functions accepted by the expression grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sec => "sec",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sec" => Func::Sec,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Tan | Func::Sec => {
                let c = v.cos();
                if c.abs() < TRIG_POLE_GUARD {
                    return Err(EvalError::Pole {
                        function: self.name(),
                        value: v,
                    });
                }
                Ok(if self == Func::Tan { v.sin() / c } else { 1.0 / c })
            }
            Func::Sqrt => {
                if v < 0.0 {
                    return Err(EvalError::Domain {
                        function: "sqrt",
                        value: v,
                    });
                }
                Ok(v.sqrt())
            }
        }
    }

    fn apply_jet(self, j: &Jet) -> Result<Jet, EvalError> {
        match self {
            Func::Sin => Ok(j.sin()),
            Func::Cos => Ok(j.cos()),
            Func::Tan => j.tan(),
            Func::Sec => j.sec(),
            Func::Sqrt => j.sqrt(),
        }
    }
}

/// Expression tree over the four coordinates of a chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, point: &[f64; NVARS]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => point[*i],
            Expr::Neg(a) => -a.eval(point)?,
            Expr::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Expr::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Expr::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Expr::Div(a, b) => {
                let num = a.eval(point)?;
                let den = b.eval(point)?;
                if den.abs() < f64::EPSILON {
                    return Err(EvalError::Pole {
                        function: "division",
                        value: den,
                    });
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let v = a.eval(point)?;
                if *n < 0 && v.abs() < f64::EPSILON {
                    return Err(EvalError::Pole {
                        function: "division",
                        value: v,
                    });
                }
                v.powi(*n)
            }
            Expr::Func(f, a) => f.apply(a.eval(point)?)?,
        })
    }

    pub fn eval_jet(&self, point: &[f64; NVARS], order: usize) -> Result<Jet, EvalError> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(*point, order, *c),
            Expr::Var(i) => Jet::variable(*point, order, *i),
            Expr::Neg(a) => -a.eval_jet(point, order)?,
            Expr::Add(a, b) => a.eval_jet(point, order)? + b.eval_jet(point, order)?,
            Expr::Sub(a, b) => a.eval_jet(point, order)? - b.eval_jet(point, order)?,
            Expr::Mul(a, b) => a.eval_jet(point, order)? * b.eval_jet(point, order)?,
            Expr::Div(a, b) => a.eval_jet(point, order)?.div(&b.eval_jet(point, order)?)?,
            Expr::Pow(a, n) => a.eval_jet(point, order)?.powi(*n)?,
            Expr::Func(f, a) => f.apply_jet(&a.eval_jet(point, order)?)?,
        })
    }

    fn fmt_with(&self, names: &[String; NVARS], f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => f.write_str(&names[*i]),
            Expr::Neg(a) => {
                f.write_str("(-")?;
                a.fmt_with(names, f)?;
                f.write_str(")")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => " * ",
                    _ => " / ",
                };
                f.write_str("(")?;
                a.fmt_with(names, f)?;
                f.write_str(op)?;
                b.fmt_with(names, f)?;
                f.write_str(")")
            }
            Expr::Pow(a, n) => {
                f.write_str("(")?;
                a.fmt_with(names, f)?;
                write!(f, ")^{n}")
            }
            Expr::Func(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_with(names, f)?;
                f.write_str(")")
            }
        }
    }
}

/// Names of the four coordinates of a chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart(Arc<[String; NVARS]>);

impl Chart {
    /// Panics on duplicate or non-identifier names.
    pub fn new(names: [&str; NVARS]) -> Self {
        for (i, n) in names.iter().enumerate() {
            assert!(
                n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                    && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
                "invalid coordinate name {n:?}"
            );
            assert!(Func::from_name(n).is_none(), "{n:?} is a function name");
            assert!(!names[..i].contains(n), "duplicate coordinate name {n:?}");
        }
        Self(Arc::new(names.map(String::from)))
    }

    /// Car configuration coordinates `(x, y, alpha, beta)`.
    pub fn car() -> Self {
        Self::new(["x", "y", "alpha", "beta"])
    }

    /// Second-jet coordinates `(x, y, p, q)` with `p = y'`, `q = y''`.
    pub fn jet() -> Self {
        Self::new(["x", "y", "p", "q"])
    }

    pub fn names(&self) -> &[String; NVARS] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

/// A scalar field: an expression tree bound to a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    chart: Chart,
    expr: Expr,
}

impl ScalarField {
    pub fn new(chart: Chart, expr: Expr) -> Self {
        Self { chart, expr }
    }

    pub fn parse(text: &str, chart: &Chart) -> Result<Self, super::ParseError> {
        Ok(Self {
            chart: chart.clone(),
            expr: super::parse::parse_expr(text, chart)?,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        Self::new(chart.clone(), Expr::Const(0.0))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, point: &[f64; NVARS]) -> Result<f64, EvalError> {
        self.expr.eval(point)
    }

    pub fn eval_jet(&self, point: &[f64; NVARS], order: usize) -> Result<Jet, EvalError> {
        assert!(order <= super::MAX_ORDER);
        self.expr.eval_jet(point, order)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt_with(self.chart.names(), f)
    }
}
