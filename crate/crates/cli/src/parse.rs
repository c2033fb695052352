//! Command-line value parsers.

use num_bigint::BigInt;
use num_complex::Complex64;

/// `2`, `-0.5`, `3i`, `-i`, `0.5+0i`, `1e-3-2.5i`.
pub fn complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("bad complex number {s:?}");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // the imaginary part starts at the last sign that is not the leading one or an exponent sign
    let split = body
        .char_indices()
        .filter(|&(i, c)| (c == '+' || c == '-') && i > 0 && !body[..i].ends_with(['e', 'E']))
        .map(|(i, _)| i)
        .next_back();
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().map_err(|_| bad())?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

/// A comma-separated list taken as one argument value.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexList(pub Vec<Complex64>);

pub fn complex_list(s: &str) -> Result<ComplexList, String> {
    s.split(',').map(complex).collect::<Result<_, _>>().map(ComplexList)
}

/// A sorted, deduplicated integer set taken as one argument value.
#[derive(Clone, Debug, PartialEq)]
pub struct IntSet(pub Vec<BigInt>);

pub fn int_set_arg(s: &str) -> Result<IntSet, String> {
    int_set(s).map(IntSet)
}

/// Comma-separated integers and inclusive ranges: `0,1,5`, `-16..16`, `-3..-1,7`.
pub fn int_set(s: &str) -> Result<Vec<BigInt>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let num = |x: &str| x.trim().parse::<BigInt>().map_err(|_| format!("bad integer {x:?} in {s:?}"));
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if hi < lo {
                    return Err(format!("empty range {item:?}"));
                }
                let width = &hi - &lo;
                if width > BigInt::from(1u32 << 20) {
                    return Err(format!("range {item:?} is too long"));
                }
                let mut n = lo;
                while n <= hi {
                    out.push(n.clone());
                    n += 1;
                }
            }
            None => out.push(num(item)?),
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(complex("0.5+0i").unwrap(), c(0.5, 0.0));
        assert_eq!(complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(complex("3i").unwrap(), c(0.0, 3.0));
        assert_eq!(complex("1e-3-2.5i").unwrap(), c(1e-3, -2.5));
        assert_eq!(complex("-1e+2+1e-2i").unwrap(), c(-100.0, 0.01));
        assert_eq!(complex(" -0.5 + 1i").unwrap(), c(-0.5, 1.0));
        assert!(complex("1+").is_err());
        assert!(complex("abc").is_err());
    }

    #[test]
    fn int_sets() {
        let v = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(int_set("0,1,5").unwrap(), v(&[0, 1, 5]));
        assert_eq!(int_set("-2..2").unwrap(), v(&[-2, -1, 0, 1, 2]));
        assert_eq!(int_set("-3..-2,7,-3").unwrap(), v(&[-3, -2, 7]));
        assert!(int_set("3..1").is_err());
        assert!(int_set("a").is_err());
    }
}
