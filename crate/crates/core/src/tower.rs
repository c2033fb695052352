//! Level-index numbers: `exp2` iterated `level` times on an `f64` top.
//!
//! Canonical form: every `top` is at most `2^1000`, and `top > 1000` when
//! `level >= 1`, so `(level, top)` orders lexicographically. Level 0 may be
//! negative; higher levels are always huge positives.
//!
//! [`Bracket`] carries a lower and an upper [`Tower`] produced with directed
//! rounding, which is what every comparison in the set constructions uses.

use alloc::format;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// Largest top kept at any level, as a base-2 exponent.
pub const TOP_LOG2_MAX: f64 = 1000.0;
const TOP_MAX: f64 = 1.0715086071862673e301; // 2^1000
/// Relative widening applied after every rounded operation.
const REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tower {
    pub level: u32,
    pub top: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dir {
    Down,
    Up,
}

fn round(x: f64, dir: Dir) -> f64 {
    let pad = x.abs() * REL + f64::MIN_POSITIVE;
    match dir {
        Dir::Down => x - pad,
        Dir::Up => x + pad,
    }
}

fn precision(stage: &str, hint: String) -> Error {
    Error::Precision { stage: stage.into(), log2_hint: hint }
}

impl Tower {
    pub const ZERO: Tower = Tower { level: 0, top: 0.0 };

    pub fn from_f64(v: f64) -> Result<Tower> {
        if !v.is_finite() {
            return Err(precision("from_f64", format!("{v}")));
        }
        Ok(Tower { level: 0, top: v })
    }

    /// The value as `f64` when it sits at level 0.
    pub fn to_f64(&self) -> Option<f64> {
        (self.level == 0).then_some(self.top)
    }

    pub fn is_negative(&self) -> bool {
        self.level == 0 && self.top < 0.0
    }

    fn normalize(mut level: u32, mut top: f64, dir: Dir) -> Result<Tower> {
        if !top.is_finite() {
            return Err(precision("normalize", format!("level {level}, top {top}")));
        }
        while top > TOP_MAX {
            top = round(libm::log2(top), dir);
            level += 1;
        }
        while level > 0 && top <= TOP_LOG2_MAX {
            top = round(libm::exp2(top), dir);
            level -= 1;
        }
        if level == 0 && top < -TOP_MAX {
            return Err(precision("normalize", format!("{top}")));
        }
        Ok(Tower { level, top })
    }

    fn widen(&self, dir: Dir) -> Tower {
        // one relative step on the top covers any factor-2 change of the value at level >= 2
        Tower { level: self.level, top: round(self.top, dir) }
    }

    fn exp2_dir(&self, dir: Dir) -> Result<Tower> {
        if self.level == 0 {
            if self.top <= TOP_LOG2_MAX {
                return Tower::normalize(0, round(libm::exp2(self.top), dir).max(0.0), dir);
            }
            return Ok(Tower { level: 1, top: self.top });
        }
        Ok(Tower { level: self.level + 1, top: self.top })
    }

    fn log2_dir(&self, dir: Dir) -> Result<Tower> {
        match self.level {
            0 if self.top > 0.0 => Ok(Tower { level: 0, top: round(libm::log2(self.top), dir) }),
            0 => Err(precision("log2", format!("{}", self.top))),
            l => Tower::normalize(l - 1, self.top, dir),
        }
    }

    /// `log2` of a level-1 or level-0 positive value as `f64`.
    fn log2_f64(&self) -> Option<f64> {
        match self.level {
            0 if self.top > 0.0 => Some(libm::log2(self.top)),
            1 => Some(self.top),
            _ => None,
        }
    }

    fn add_dir(&self, other: &Tower, dir: Dir) -> Result<Tower> {
        let (a, b) = if self >= other { (self, other) } else { (other, self) };
        if a.level == 0 {
            return Tower::normalize(0, round(a.top + b.top, dir), dir);
        }
        if a.level == 1 {
            // a + b = 2^{p} (1 + b 2^{-p})
            let p = a.top;
            let ratio = if b.is_negative() {
                -libm::exp2(libm::log2(-b.top) - p)
            } else if b.top == 0.0 && b.level == 0 {
                0.0
            } else {
                libm::exp2(b.log2_f64().unwrap() - p)
            };
            let shift = libm::log1p(ratio) / core::f64::consts::LN_2;
            return Tower::normalize(1, round(p + shift, dir), dir);
        }
        // a >= 2^{2^1000}: |b| <= a keeps a + b within [a/2, 2a] unless b is negative and close
        // to a, which cannot happen since negatives live at level 0
        match (dir, b.is_negative(), b.level == 0 && b.top == 0.0) {
            (_, _, true) => Ok(*a),
            (Dir::Up, false, _) | (Dir::Down, true, _) => Ok(a.widen(dir)),
            _ => Ok(*a),
        }
    }

    fn neg_level0(&self) -> Result<Tower> {
        if self.level != 0 {
            return Err(precision("negate", self.hint()));
        }
        Ok(Tower { level: 0, top: -self.top })
    }

    fn sub_dir(&self, other: &Tower, dir: Dir) -> Result<Tower> {
        if other.level == 0 {
            return self.add_dir(&other.neg_level0()?, dir);
        }
        if self <= other {
            return Err(precision("subtract", format!("{} - {}", self.hint(), other.hint())));
        }
        if self.level == 1 {
            // both at level 1: 2^p - 2^q = 2^{p + log2(1 - 2^{q-p})}
            let shift = libm::log1p(-libm::exp2(other.top - self.top)) / core::f64::consts::LN_2;
            return Tower::normalize(1, round(self.top + shift, dir), dir);
        }
        // level >= 2 and other < self in canonical order gives other <= self / 2
        Ok(match dir {
            Dir::Down => self.widen(Dir::Down),
            Dir::Up => *self,
        })
    }

    /// A value strictly above `self` by a margin far wider than rounding:
    /// `max(1, 1e-9 |top|)` at level 0, a relative `1e-9` on the top above.
    pub fn inflate(&self) -> Tower {
        if self.level == 0 {
            let top = self.top + (1e-9 * self.top.abs()).max(1.0);
            return Tower::normalize(0, top, Dir::Up).unwrap_or(Tower { level: 1, top: TOP_LOG2_MAX + 1.0 });
        }
        Tower { level: self.level, top: self.top * (1.0 + 1e-9) }
    }

    /// Readable `2^2^...^top` form.
    pub fn hint(&self) -> String {
        let mut s = format!("{:e}", self.top);
        for _ in 0..self.level {
            s = format!("2^({s})");
        }
        s
    }
}

impl PartialOrd for Tower {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.level.cmp(&other.level).then(self.top.total_cmp(&other.top)))
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hint())
    }
}

/// An interval `[lo, hi]` of level-index numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: Tower,
    pub hi: Tower,
}

impl Bracket {
    pub fn exact(t: Tower) -> Bracket {
        Bracket { lo: t, hi: t }
    }

    pub fn from_f64(v: f64) -> Result<Bracket> {
        Ok(Bracket::exact(Tower::from_f64(v)?))
    }

    pub fn add(&self, other: &Bracket) -> Result<Bracket> {
        Ok(Bracket { lo: self.lo.add_dir(&other.lo, Dir::Down)?, hi: self.hi.add_dir(&other.hi, Dir::Up)? })
    }

    pub fn add_f64(&self, c: f64) -> Result<Bracket> {
        self.add(&Bracket::from_f64(c)?)
    }

    pub fn sub(&self, other: &Bracket) -> Result<Bracket> {
        Ok(Bracket { lo: self.lo.sub_dir(&other.hi, Dir::Down)?, hi: self.hi.sub_dir(&other.lo, Dir::Up)? })
    }

    pub fn exp2(&self) -> Result<Bracket> {
        Ok(Bracket { lo: self.lo.exp2_dir(Dir::Down)?, hi: self.hi.exp2_dir(Dir::Up)? })
    }

    pub fn log2(&self) -> Result<Bracket> {
        Ok(Bracket { lo: self.lo.log2_dir(Dir::Down)?, hi: self.hi.log2_dir(Dir::Up)? })
    }

    pub fn max(&self, other: &Bracket) -> Bracket {
        let pick = |a: Tower, b: Tower| if a >= b { a } else { b };
        Bracket { lo: pick(self.lo, other.lo), hi: pick(self.hi, other.hi) }
    }

    /// Every value of `self` is strictly below every value of `other`.
    pub fn certainly_below(&self, other: &Bracket) -> bool {
        self.hi < other.lo
    }

    /// Midpoint-free representative: the upper end.
    pub fn value(&self) -> Tower {
        self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: f64) -> Bracket {
        Bracket::from_f64(v).unwrap()
    }

    #[test]
    fn small_values_stay_exactish() {
        let x = t(3.0).exp2().unwrap();
        assert!(x.lo.top <= 8.0 && x.hi.top >= 8.0 && x.hi.top - x.lo.top < 1e-9);
        let y = t(10.0).add(&t(-4.0)).unwrap();
        assert!(y.lo.top <= 6.0 && y.hi.top >= 6.0);
    }

    #[test]
    fn lifting_and_ordering() {
        let big = t(2000.0).exp2().unwrap();
        assert_eq!(big.lo, Tower { level: 1, top: 2000.0 });
        let bigger = big.exp2().unwrap();
        assert!(big.certainly_below(&bigger));
        assert!(t(1e300).certainly_below(&big));
        let back = bigger.log2().unwrap();
        assert_eq!(back.lo.level, 1);
    }

    #[test]
    fn level_one_sums() {
        let a = t(2000.0).exp2().unwrap();
        let s = a.add(&a).unwrap();
        // 2^2000 + 2^2000 = 2^2001
        assert!(s.lo.top <= 2001.0 && s.hi.top >= 2001.0 && s.hi.top - s.lo.top < 1e-6);
        let d = s.sub(&a).unwrap();
        assert!(d.lo.top <= 2000.0 && d.hi.top >= 2000.0);
    }

    #[test]
    fn dominant_terms_absorb_small_ones() {
        let huge = t(5000.0).exp2().unwrap().exp2().unwrap();
        let sum = huge.add(&t(1e20)).unwrap();
        assert!(sum.lo.level == 2 && sum.hi.level == 2);
        assert!(sum.lo.top <= 5000.0 && sum.hi.top >= 5000.0);
        assert!(huge.sub(&huge).is_err());
    }

    #[test]
    fn inflation_is_strict() {
        for b in [t(0.0), t(1e21), t(3000.0).exp2().unwrap()] {
            assert!(b.hi < b.hi.inflate());
        }
    }
}
