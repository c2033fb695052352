//! Serializable views of library values.

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use wpset_core::tower::{Bracket, Tower};
use wpset_core::trigcore::{Coefficient, ExactForm, L1Estimate, SparseSpectrum};

use crate::error::{invalid, CliError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRecord {
    pub sign: i8,
    /// 1-based; a repeated index is a power.
    pub eps_indices: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    /// Frequency as a decimal string, since it may exceed 64 bits.
    pub n: String,
    pub re: f64,
    pub im: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactRecord>,
}

pub fn spectrum_records(f: &SparseSpectrum) -> Vec<CoefficientRecord> {
    f.iter()
        .map(|(n, c)| CoefficientRecord {
            n: n.to_string(),
            re: c.value.re,
            im: c.value.im,
            exact: c.exact.as_ref().map(|e| ExactRecord { sign: e.sign, eps_indices: e.eps_indices.clone() }),
        })
        .collect()
}

/// Any JSON object with a `coefficients` list; other fields are ignored.
#[derive(Clone, Debug, Deserialize)]
pub struct PolynomialFile {
    pub coefficients: Vec<CoefficientRecord>,
}

pub fn spectrum_from_records(records: &[CoefficientRecord]) -> Result<SparseSpectrum, CliError> {
    let mut f = SparseSpectrum::new();
    for r in records {
        let n: BigInt = r.n.parse().map_err(|_| invalid(format!("bad frequency {:?}", r.n)))?;
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(invalid(format!("non-finite coefficient at {n}")));
        }
        if f.get(&n).is_some() {
            return Err(invalid(format!("frequency {n} listed twice")));
        }
        let value = Complex64::new(r.re, r.im);
        let coef = match &r.exact {
            Some(e) if e.sign == 1 || e.sign == -1 => Coefficient { value, exact: Some(ExactForm::new(e.sign, e.eps_indices.clone())) },
            Some(e) => return Err(invalid(format!("exact sign {} at {n}", e.sign))),
            None => Coefficient::float(value),
        };
        f.insert(n, coef);
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(z: Complex64) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Record {
    pub value: f64,
    pub error_bound: f64,
    pub grid_size: usize,
}

impl From<L1Estimate> for L1Record {
    fn from(e: L1Estimate) -> Self {
        L1Record { value: e.value, error_bound: e.error_bound, grid_size: e.grid_size }
    }
}

/// `exp2` applied `level` times to `top`; `hint` spells it out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerRecord {
    pub level: u32,
    pub top: f64,
    pub hint: String,
}

impl From<Tower> for TowerRecord {
    fn from(t: Tower) -> Self {
        TowerRecord { level: t.level, top: t.top, hint: t.hint() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketRecord {
    pub lo: TowerRecord,
    pub hi: TowerRecord,
}

impl From<Bracket> for BracketRecord {
    fn from(b: Bracket) -> Self {
        BracketRecord { lo: b.lo.into(), hi: b.hi.into() }
    }
}

/// JSON cannot hold non-finite floats; they become `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
