//! Sequence expressions in the index `k = 1, 2, ...`.
//!
//! Three shapes are accepted: a constant `c`, a power `c*k^p` and a
//! geometric term `c*q^k`. Expressions are parsed as products, quotients and
//! powers of numbers, `k` and parentheses, then normalized, so `1/k`,
//! `2*k^-1.5`, `3^k`, `8^-k` and `0.35*(1/2)^k` all work. `·` and `×` may be
//! used for `*`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq)]
pub enum Sequence {
    Constant(BigRational),
    /// `coef * k^exponent`
    Power { coef: BigRational, exponent: BigRational },
    /// `coef * ratio^k`
    Geometric { coef: BigRational, ratio: BigRational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub input: String,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad sequence expression {:?}: {}", self.input, self.reason)
    }
}

impl std::error::Error for ParseError {}

/// `coef * k^kpow * ratio^k`, closed under the operations of the grammar.
#[derive(Clone, Debug)]
struct Mono {
    coef: BigRational,
    kpow: BigRational,
    ratio: BigRational,
}

impl Mono {
    fn constant(c: BigRational) -> Mono {
        Mono { coef: c, kpow: BigRational::zero(), ratio: BigRational::one() }
    }

    fn is_constant(&self) -> bool {
        self.kpow.is_zero() && self.ratio.is_one()
    }

    fn mul(self, o: Mono) -> Mono {
        Mono { coef: self.coef * o.coef, kpow: self.kpow + o.kpow, ratio: self.ratio * o.ratio }
    }

    fn recip(self) -> Result<Mono, String> {
        if self.coef.is_zero() || self.ratio.is_zero() {
            return Err("division by zero".into());
        }
        Ok(Mono { coef: self.coef.recip(), kpow: -self.kpow, ratio: self.ratio.recip() })
    }
}

fn rational_pow(base: &BigRational, e: &BigRational) -> Result<BigRational, String> {
    if e.is_integer() {
        let n = e.to_integer().to_i32().ok_or("exponent too large")?;
        if base.is_zero() && n < 0 {
            return Err("zero to a negative power".into());
        }
        return Ok(Pow::pow(base, n));
    }
    if base.is_negative() {
        return Err("fractional power of a negative number".into());
    }
    let v = base.to_f64().unwrap_or(f64::NAN).powf(e.to_f64().unwrap_or(f64::NAN));
    BigRational::from_float(v).ok_or_else(|| "power is not finite".into())
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Mono, String> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(self.power()?);
            } else if self.eat('/') {
                acc = acc.mul(self.power()?.recip()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Mono, String> {
        let base = self.unary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let exp = self.unary()?;
        if exp.is_constant() {
            return Ok(Mono {
                coef: rational_pow(&base.coef, &exp.coef)?,
                kpow: base.kpow * &exp.coef,
                ratio: rational_pow(&base.ratio, &exp.coef)?,
            });
        }
        // c^(m k) = (c^m)^k for constant c and integer m
        if base.is_constant() && exp.kpow.is_one() && exp.ratio.is_one() && exp.coef.is_integer() {
            return Ok(Mono {
                coef: BigRational::one(),
                kpow: BigRational::zero(),
                ratio: rational_pow(&base.coef, &exp.coef)?,
            });
        }
        Err("exponents must be constants or an integer multiple of k over a constant base".into())
    }

    fn unary(&mut self) -> Result<Mono, String> {
        if self.eat('-') {
            let mut m = self.unary()?;
            m.coef = -m.coef;
            return Ok(m);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Mono, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let m = self.expr()?;
                if !self.eat(')') {
                    return Err("missing ')'".into());
                }
                Ok(m)
            }
            Some('k') => {
                self.pos += 1;
                Ok(Mono { coef: BigRational::one(), kpow: BigRational::one(), ratio: BigRational::one() })
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number().map(Mono::constant),
            Some(c) => Err(format!("unexpected {c:?} at position {}", self.pos)),
            None => Err("unexpected end of input".into()),
        }
    }

    /// Decimal literal, read exactly: `12`, `0.35`, `1e-3`, `2.5E4`.
    fn number(&mut self) -> Result<BigRational, String> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0i32;
        let mut seen_dot = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == '.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            return Err(format!("malformed number at position {start}"));
        }
        let mut exp10 = -frac_len;
        if matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            let neg = if self.eat('-') {
                true
            } else {
                self.eat('+');
                false
            };
            let exp_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text: String = self.chars[exp_start..self.pos].iter().collect();
            let e: i32 = text.parse().map_err(|_| format!("malformed exponent at position {exp_start}"))?;
            exp10 += if neg { -e } else { e };
        }
        let mantissa: BigInt = digits.parse().map_err(|_| "malformed number".to_string())?;
        let scale: BigRational = Pow::pow(BigRational::from_integer(BigInt::from(10)), exp10);
        Ok(BigRational::from_integer(mantissa) * scale)
    }
}

impl FromStr for Sequence {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| ParseError { input: s.to_string(), reason };
        let chars: Vec<char> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '·' | '×' => '*',
                '−' => '-',
                other => other,
            })
            .collect();
        let mut p = Parser { chars, pos: 0, input: s };
        let m = p.expr().map_err(err)?;
        if p.pos != p.chars.len() {
            return Err(err(format!("trailing input at position {} of {:?}", p.pos, p.input)));
        }
        match (m.kpow.is_zero(), m.ratio.is_one()) {
            (true, true) => Ok(Sequence::Constant(m.coef)),
            (false, true) => Ok(Sequence::Power { coef: m.coef, exponent: m.kpow }),
            (true, false) => Ok(Sequence::Geometric { coef: m.coef, ratio: m.ratio }),
            (false, false) => Err(err("products of k^p and q^k are not supported".into())),
        }
    }
}

impl Sequence {
    /// The exact value at `k`, when it is rational.
    pub fn exact(&self, k: u64) -> Option<BigRational> {
        let kk = BigRational::from_integer(BigInt::from(k));
        match self {
            Sequence::Constant(c) => Some(c.clone()),
            Sequence::Power { coef, exponent } if exponent.is_integer() => {
                let e = exponent.to_integer().to_i32()?;
                Some(coef * Pow::pow(kk, e))
            }
            Sequence::Power { .. } => None,
            Sequence::Geometric { coef, ratio } => Some(coef * Pow::pow(ratio, i32::try_from(k).ok()?)),
        }
    }

    pub fn value(&self, k: u64) -> f64 {
        if let Some(v) = self.exact(k).and_then(|x| x.to_f64()) {
            return v;
        }
        match self {
            Sequence::Power { coef, exponent } => {
                coef.to_f64().unwrap_or(f64::NAN) * (k as f64).powf(exponent.to_f64().unwrap_or(f64::NAN))
            }
            _ => f64::NAN,
        }
    }

    /// The value at `k` as an integer; `None` if it is not one.
    pub fn integer(&self, k: u64) -> Option<BigInt> {
        self.exact(k).filter(|x| x.is_integer()).map(|x| x.to_integer())
    }

    /// Values at `k = 1..=count`.
    pub fn values(&self, count: usize) -> Vec<f64> {
        (1..=count as u64).map(|k| self.value(k)).collect()
    }

    /// Integer values at `k = 1..=count`, or the first `k` that is not an integer.
    pub fn integers(&self, count: usize) -> Result<Vec<BigInt>, u64> {
        (1..=count as u64).map(|k| self.integer(k).ok_or(k)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequence {
        s.parse().unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn shapes() {
        assert_eq!(seq("0.25"), Sequence::Constant(r(1, 4)));
        assert_eq!(seq("1/k"), Sequence::Power { coef: r(1, 1), exponent: r(-1, 1) });
        assert_eq!(seq("3^k"), Sequence::Geometric { coef: r(1, 1), ratio: r(3, 1) });
        assert_eq!(seq("8^-k"), Sequence::Geometric { coef: r(1, 1), ratio: r(1, 8) });
        assert_eq!(seq("2 · k^1.5"), Sequence::Power { coef: r(2, 1), exponent: r(3, 2) });
        assert_eq!(seq("0.3535*0.366^k"), Sequence::Geometric { coef: r(707, 2000), ratio: r(183, 500) });
        assert_eq!(seq("5/2^k"), Sequence::Geometric { coef: r(5, 1), ratio: r(1, 2) });
        assert_eq!(seq("1e-3"), Sequence::Constant(r(1, 1000)));
    }

    #[test]
    fn values() {
        assert_eq!(seq("3^k").integers(4).unwrap(), vec![3, 9, 27, 81].into_iter().map(BigInt::from).collect::<Vec<_>>());
        assert_eq!(seq("1/k").values(4), vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
        assert_eq!(seq("8^-k").value(2), 1.0 / 64.0);
        assert_eq!(seq("1/k").integers(3), Err(2));
        assert!((seq("k^0.5").value(2) - 2f64.sqrt()).abs() < 1e-15);
        // 3^40 is past exact f64 integers
        assert_eq!(seq("3^k").integer(40).unwrap(), BigInt::from(3u64).pow(40u32));
    }

    #[test]
    fn rejects() {
        for bad in ["", "k*2^k", "x", "2^k^2", "(1", "1/0", "k^k", "2^(k/2)"] {
            assert!(bad.parse::<Sequence>().is_err(), "{bad}");
        }
    }
}
