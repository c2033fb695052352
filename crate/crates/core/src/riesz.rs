//! Classical Riesz products `prod (1 + a_k cos(n_k t))` and partial-sum traces
//! for the Brown–Moran and Zafran series.
//!
//! The traces never decide convergence; they only report prefixes.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::trigcore::{multiply, Coefficient, SparseSpectrum};

#[derive(Clone, Debug, PartialEq)]
pub struct RieszParams {
    pub a: Vec<f64>,
    pub n: Vec<BigInt>,
}

impl RieszParams {
    pub fn new(a: Vec<f64>, n: Vec<BigInt>) -> Result<Self> {
        let p = RieszParams { a, n };
        p.validate(p.a.len().min(p.n.len()))?;
        Ok(p)
    }

    /// Checks amplitudes and lacunarity for the first `levels` terms.
    pub fn validate(&self, levels: usize) -> Result<()> {
        if self.a.len() < levels || self.n.len() < levels {
            return Err(Error::TooShort { needed: levels, available: self.a.len().min(self.n.len()) });
        }
        for k in 0..levels {
            let a = self.a[k];
            if !(-1.0..=1.0).contains(&a) {
                return Err(Error::Amplitude { index: k + 1, value: a });
            }
            if self.n[k] <= BigInt::zero() {
                return Err(Error::Invalid(alloc::format!("n_{} must be positive", k + 1)));
            }
            if k > 0 && self.n[k] < &self.n[k - 1] * 3u32 {
                return Err(Error::Lacunarity { index: k });
            }
        }
        Ok(())
    }
}

/// `prod_{k <= levels} (1 + a_k cos(n_k t))`, expanded exactly with [`multiply`].
pub fn riesz_partial(params: &RieszParams, levels: usize) -> Result<SparseSpectrum> {
    params.validate(levels)?;
    let mut acc = SparseSpectrum::one();
    for k in 0..levels {
        let half = params.a[k] / 2.0;
        let factor = SparseSpectrum::from_pairs([
            (BigInt::zero(), Coefficient::real(1.0)),
            (params.n[k].clone(), Coefficient::real(half)),
            (-params.n[k].clone(), Coefficient::real(half)),
        ]);
        acc = multiply(&acc, &factor);
    }
    Ok(acc)
}

/// Coefficient at `sum_k delta_k n_k` predicted by lacunarity: `prod_{delta_k != 0} a_k / 2`.
pub fn lacunary_coefficient(params: &RieszParams, deltas: &[i8]) -> (BigInt, f64) {
    let mut freq = BigInt::zero();
    let mut value = 1.0;
    for (k, &d) in deltas.iter().enumerate() {
        if d != 0 {
            freq += &params.n[k] * BigInt::from(d);
            value *= params.a[k] / 2.0;
        }
    }
    (freq, value)
}

/// Partial sums of `sum_{k <= levels} (a_k - b_k)^2`.
pub fn brown_moran_diagnostic(a: &[f64], b: &[f64], levels: usize) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < levels {
        return Err(Error::TooShort { needed: levels, available: a.len() });
    }
    Ok(partial_sums(a.iter().zip(b).take(levels).map(|(x, y)| (x - y) * (x - y))))
}

/// Partial sums of `sum_{k <= levels} |a_k|^m`.
pub fn zafran_criterion_diagnostic(a: &[f64], m: u32, levels: usize) -> Result<Vec<f64>> {
    if m < 1 {
        return Err(Error::Invalid("exponent m must be at least 1".into()));
    }
    if a.len() < levels {
        return Err(Error::TooShort { needed: levels, available: a.len() });
    }
    Ok(partial_sums(a.iter().take(levels).map(|x| libm::pow(x.abs(), f64::from(m)))))
}

fn partial_sums(terms: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut total = 0.0;
    terms
        .map(|t| {
            total += t;
            total
        })
        .collect()
}

/// `n_k = 3^k` for `k = 1..=levels`.
pub fn powers_of_three(levels: usize) -> Vec<BigInt> {
    let mut v = Vec::with_capacity(levels);
    let mut x = BigInt::one();
    for _ in 0..levels {
        x *= 3u32;
        v.push(x.clone());
    }
    v
}
