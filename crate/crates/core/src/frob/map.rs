use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::frob::{factor, Poly, PrimeField};

#[derive(Clone, PartialEq, Eq, Debug)]
enum Expr {
    Num(String),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Token {
    Num(String),
    X,
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '0'..='9' => {
                let mut digits = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    chars.next();
                }
                out.push(Token::Num(digits));
            }
            'x' | 'X' => {
                chars.next();
                out.push(Token::X);
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                chars.next();
                out.push(Token::Op(c));
            }
            other => return Err(Error::MapParse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Token::Num(_) | Token::X | Token::Op('('))) {
                // implicit multiplication: `2x`, `(x-1)(x+1)`
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        match self.peek().cloned() {
            Some(Token::Num(digits)) => {
                self.pos += 1;
                let e: i64 = digits
                    .parse()
                    .ok()
                    .filter(|e| *e <= 1 << 16)
                    .ok_or_else(|| Error::MapParse(format!("exponent `{digits}` too large")))?;
                Ok(Expr::Pow(Box::new(base), if negative { -e } else { e }))
            }
            _ => Err(Error::MapParse("exponent must be an integer literal".into())),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(d)) => {
                self.pos += 1;
                Ok(Expr::Num(d))
            }
            Some(Token::X) => {
                self.pos += 1;
                Ok(Expr::X)
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::MapParse("missing `)`".into()));
                }
                Ok(e)
            }
            Some(Token::Op(c)) => Err(Error::MapParse(format!("unexpected `{c}`"))),
            None => Err(Error::MapParse("unexpected end of expression".into())),
        }
    }
}

fn parse_expr(text: &str) -> Result<Expr> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::MapParse(format!("trailing input at token {}", parser.pos + 1)));
    }
    Ok(e)
}

/// A fraction `num / den` of polynomials.
type Frac = (Poly, Poly);

fn eval(e: &Expr, f: PrimeField) -> Result<Frac> {
    let one = Poly::one(f);
    Ok(match e {
        Expr::Num(d) => {
            let c = d.bytes().fold(0u64, |acc, b| (acc * 10 + u64::from(b - b'0')) % f.p());
            (Poly::constant(f, c), one)
        }
        Expr::X => (Poly::x(f), one),
        Expr::Neg(a) => {
            let (n, d) = eval(a, f)?;
            (n.neg(), d)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let (an, ad) = eval(a, f)?;
            let (bn, bd) = eval(b, f)?;
            let (l, r) = (an.mul(&bd), bn.mul(&ad));
            let n = if matches!(e, Expr::Add(..)) {
                l.add(&r)
            } else {
                l.sub(&r)
            };
            (n, ad.mul(&bd))
        }
        Expr::Mul(a, b) => {
            let (an, ad) = eval(a, f)?;
            let (bn, bd) = eval(b, f)?;
            (an.mul(&bn), ad.mul(&bd))
        }
        Expr::Div(a, b) => {
            let (an, ad) = eval(a, f)?;
            let (bn, bd) = eval(b, f)?;
            if bn.is_zero() {
                return Err(Error::MapParse(format!("division by zero modulo {}", f.p())));
            }
            (an.mul(&bd), ad.mul(&bn))
        }
        Expr::Pow(a, k) => {
            let (n, d) = eval(a, f)?;
            let (n, d) = if *k < 0 { (d, n) } else { (n, d) };
            if n.is_zero() && *k < 0 {
                return Err(Error::MapParse(format!("division by zero modulo {}", f.p())));
            }
            (n.pow(k.unsigned_abs()), d.pow(k.unsigned_abs()))
        }
    })
}

/// `Σ c_k X^k Z^(d-k)` with products taken by `mul`.
pub(crate) fn form_eval(c: &Poly, d: usize, x: &Poly, z: &Poly, mul: &dyn Fn(&Poly, &Poly) -> Poly) -> Poly {
    let f = c.field();
    let mut xp = vec![Poly::one(f)];
    let mut zp = vec![Poly::one(f)];
    for k in 1..=d {
        xp.push(mul(&xp[k - 1], x));
        zp.push(mul(&zp[k - 1], z));
    }
    (0..=d).fold(Poly::zero(f), |acc, k| {
        let ck = c.coeff(k);
        if ck == 0 {
            acc
        } else {
            acc.add(&mul(&xp[k], &zp[d - k]).scale(ck))
        }
    })
}

/// A point of `ℙ¹` over `𝔽_p[t]/(q)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ProjPoint {
    Finite(Poly),
    Infinity,
}

impl ProjPoint {
    /// The `𝔽_p` value of a rational finite point.
    pub fn rational(&self) -> Option<u64> {
        match self {
            ProjPoint::Finite(x) if x.deg() == 0 => Some(x.coeff(0)),
            _ => None,
        }
    }
}

/// A quadratic rational map `u / v` over `𝔽_p` with `gcd(u, v) = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMap {
    field: PrimeField,
    num: Poly,
    den: Poly,
    source: String,
}

/// The post-critical set of a map, seen from `𝔽_p`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PostCriticalSet {
    /// `𝔽_p`-rational finite post-critical points.
    pub residues: BTreeSet<u64>,
    pub contains_infinity: bool,
    /// Number of post-critical points, counting those over `𝔽_{p^2}` once per
    /// critical orbit they appear in.
    pub size: usize,
}

impl RationalMap {
    /// Parses an expression in `x` with integer coefficients and
    /// `+ - * / ^ ( )`, reducing modulo `p`.
    pub fn parse(text: &str, field: PrimeField) -> Result<Self> {
        let (num, den) = eval(&parse_expr(text)?, field)?;
        let mut map = Self::new(num, den)?;
        map.source = text.trim().to_string();
        Ok(map)
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::MapParse("zero denominator".into()));
        }
        let field = num.field();
        let g = num.gcd(&den);
        let (mut num, mut den) = (num.div_exact(&g), den.div_exact(&g));
        let degree = num.deg().max(den.deg());
        if degree != 2 || num.is_zero() {
            return Err(Error::MapDegree(if num.is_zero() { 0 } else { degree }));
        }
        let c = field.inv(den.lead());
        num = num.scale(c);
        den = den.scale(c);
        let source = format!("({num})/({den})");
        Ok(RationalMap {
            field,
            num,
            den,
            source,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// `(U, V)` with `f(X/Z) = U/V` for a point `(X : Z)`, over `mul`.
    pub(crate) fn apply_homogeneous(&self, x: &Poly, z: &Poly, mul: &dyn Fn(&Poly, &Poly) -> Poly) -> (Poly, Poly) {
        (form_eval(&self.num, 2, x, z, mul), form_eval(&self.den, 2, x, z, mul))
    }

    /// `f^n = U_n / V_n` as homogeneous degree-`2^n` forms in `(x : 1)`.
    pub fn iterate(&self, n: u32) -> (Poly, Poly) {
        let f = self.field;
        let mut uv = (Poly::x(f), Poly::one(f));
        for _ in 0..n {
            uv = self.apply_homogeneous(&uv.0, &uv.1, &|a, b| a.mul(b));
        }
        uv
    }

    /// `f(x)` for `x ∈ 𝔽_p`, with `None` for infinity.
    pub fn eval(&self, x: Option<u64>) -> Option<u64> {
        let f = self.field;
        let (u, v) = match x {
            Some(x) => (self.num.eval(x), self.den.eval(x)),
            None => (self.num.coeff(2), self.den.coeff(2)),
        };
        (v != 0).then(|| f.mul(u, f.inv(v)))
    }

    /// `u'v - uv'`; its roots are the finite critical points.
    pub fn wronskian(&self) -> Poly {
        self.num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()))
    }

    fn step(&self, pt: &ProjPoint, q: &Poly) -> ProjPoint {
        let f = self.field;
        let mul = |a: &Poly, b: &Poly| a.mulmod(b, q);
        let (x, z) = match pt {
            ProjPoint::Finite(x) => (x.clone(), Poly::one(f)),
            ProjPoint::Infinity => (Poly::one(f), Poly::zero(f)),
        };
        let (u, v) = self.apply_homogeneous(&x, &z, &mul);
        let (u, v) = (u.rem(q), v.rem(q));
        if v.is_zero() {
            return ProjPoint::Infinity;
        }
        let (_, vinv) = v.gcd_inverse(q);
        ProjPoint::Finite(u.mulmod(&vinv, q))
    }

    /// Forward orbits of the critical values. Critical points of degree 2
    /// over `𝔽_p` are followed in `𝔽_p[t]/(q)`.
    pub fn post_critical_set(&self) -> PostCriticalSet {
        let f = self.field;
        let w = self.wronskian();
        let mut starts: Vec<(Poly, ProjPoint)> = Vec::new();
        let line = Poly::x(f);
        if w.deg() < 2 || w.is_zero() {
            starts.push((line.clone(), ProjPoint::Infinity));
        }
        if !w.is_zero() {
            for (q, _) in factor(&w, 0) {
                let t = Poly::x(f).rem(&q);
                starts.push((q, ProjPoint::Finite(t)));
            }
        }
        let mut residues = BTreeSet::new();
        let mut contains_infinity = false;
        // rational points are shared between orbits; others are keyed by q
        let mut all = HashSet::new();
        for (q, c) in starts {
            let mut seen = HashSet::new();
            let mut pt = self.step(&c, &q);
            while seen.insert(pt.clone()) {
                match pt.rational() {
                    Some(r) => {
                        residues.insert(r);
                        all.insert((None, pt.clone()));
                    }
                    None if pt == ProjPoint::Infinity => {
                        contains_infinity = true;
                        all.insert((None, pt.clone()));
                    }
                    None => {
                        all.insert((Some(q.clone()), pt.clone()));
                    }
                }
                pt = self.step(&pt, &q);
            }
        }
        let size = all.len();
        PostCriticalSet {
            residues,
            contains_infinity,
            size,
        }
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
