use std::fmt;

/// Elementary functions admitted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        match s {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }
}

/// Expression tree. Variables are 0-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Time,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Time => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Pow(a, _) | Expr::Call(_, a) => 1 + a.node_count(),
        }
    }

    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Time => true,
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_time() || b.depends_on_time()
            }
            Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on_time(),
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(i) => Some(*i),
            Expr::Num(_) | Expr::Time => None,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
        }
    }

    // Smart constructors with light constant folding.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (_, Some(y)) if y == 0.0 => a,
            _ if a == b => Expr::Num(0.0),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), _) if x == 0.0 => Expr::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, e: u32) -> Expr {
        match (a.as_num(), e) {
            (_, 0) => Expr::Num(1.0),
            (_, 1) => a,
            (Some(x), _) => Expr::Num(x.powi(e as i32)),
            _ => Expr::Pow(Box::new(a), e),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Num(v) if *v < 0.0 => 1,
            _ => 4,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let wrap = self.precedence() < min_prec;
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "0 - {}", -v)?;
                } else {
                    write!(f, "{v}")?;
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1)?,
            Expr::Time => write!(f, "t")?,
            Expr::Add(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " + ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " - ")?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "*")?;
                b.write_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "/")?;
                b.write_prec(f, 3)?;
            }
            Expr::Pow(a, e) => {
                a.write_prec(f, 4)?;
                write!(f, "^{e}")?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                write!(f, ")")?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Canonical printer; parsed expressions round-trip through it.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
