//! Riesz-type products built from modulated Rudin–Shapiro blocks.
//!
//! Level `k` contributes
//! `w_k(t) = eps_k P_{n_k}(m_k t) e^{i r_k t} + eps_k conj(P_{n_k}(m_k t)) e^{-i r_k t}`
//! and the partial product is `f_N = prod_{k <= N} (1 - w_k)`.
//!
//! The gap conditions on `m_k`, `r_k` make every frequency of `f_N` a unique
//! signed sum of block values `r_j + i m_j`, so single coefficients can be read
//! off without expanding the product ([`coeff_at`]).

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rudinshapiro::{eval_pair_at_phase, rs_signs};
use crate::trigcore::{multiply, Coefficient, ExactForm, SparseSpectrum};

/// Largest spectrum the materializing routines will build.
pub const MAX_MATERIALIZED: u128 = 1 << 24;

/// How `m_k` and `r_k` are picked from `R = reach_{k-1}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spacing {
    /// `m_1 = 2, r_1 = 1`, then `m_k = 2R + 2`, `r_k = 3R + 3`. Besides the
    /// gap conditions this keeps `r_k` more than `R` away from every multiple
    /// of `m_k`, so no difference of two elements of `A_k` is a frequency of
    /// the product.
    #[default]
    Separated,
    /// `m_1 = r_1 = 1`, then `m_k = r_k = 2R + 1`: the smallest values meeting
    /// the gap conditions. Differences `j m_k` inside `A_k` coincide with
    /// frequencies `r_k + (j - 1) m_k`.
    Minimal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RrsParams {
    pub eps: Vec<f64>,
    pub n: Vec<u32>,
    pub m: Vec<BigInt>,
    pub r: Vec<BigInt>,
    pub spacing: Spacing,
    // reach[k] = sum_{j < k} ((2^{n_j} - 1) m_j + r_j), the largest |s| levels below k produce
    reach: Vec<BigInt>,
    small: Option<SmallParams>,
}

#[derive(Clone, Debug, PartialEq)]
struct SmallParams {
    m: Vec<i128>,
    r: Vec<i128>,
    reach: Vec<i128>,
}

/// Smallest positive integer strictly inside `(2 log2(1/eps) - 5, 2 log2(1/eps) - 3)`.
pub fn rs_level_for(eps: f64) -> u32 {
    let lower = 2.0 * libm::log2(1.0 / eps) - 5.0;
    let n = libm::floor(lower) + 1.0;
    if n < 1.0 {
        1
    } else {
        n as u32
    }
}

/// `eps_k * 2^((n_k + 3) / 2)`; the product construction needs it below one.
pub fn flatness_ratio(eps: f64, n: u32) -> f64 {
    eps * libm::pow(2.0, (f64::from(n) + 3.0) / 2.0)
}

fn check_decay(eps: &[f64]) -> Result<()> {
    for (k, &e) in eps.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::EpsDecay { index: k + 1 });
        }
        if k > 0 && !(e < eps[k - 1] / 2.0) {
            return Err(Error::EpsDecay { index: k + 1 });
        }
    }
    Ok(())
}

impl RrsParams {
    /// Parameters from an eps sequence: `n_k` from the dyadic interval, then
    /// `m_k`, `r_k` by [`Spacing::Separated`].
    pub fn derive(eps: &[f64], levels: usize) -> Result<Self> {
        Self::derive_with(eps, levels, Spacing::default())
    }

    pub fn derive_with(eps: &[f64], levels: usize, spacing: Spacing) -> Result<Self> {
        if eps.len() < levels {
            return Err(Error::TooShort { needed: levels, available: eps.len() });
        }
        let eps = &eps[..levels];
        if let Some(&e1) = eps.first() {
            if !(e1 < 0.25) {
                return Err(Error::EpsDecay { index: 1 });
            }
        }
        check_decay(eps)?;
        let n: Vec<u32> = eps.iter().map(|&e| rs_level_for(e)).collect();
        let p = Self::assemble(eps.to_vec(), n, spacing);
        p.check_two_sided()?;
        Ok(p)
    }

    /// Parameters with explicit Rudin–Shapiro levels. Only the upper bound
    /// `eps_k 2^((n_k+3)/2) < 1` is enforced; see [`RrsParams::check_two_sided`].
    pub fn from_levels(eps: Vec<f64>, n: Vec<u32>) -> Result<Self> {
        Self::from_levels_with(eps, n, Spacing::default())
    }

    pub fn from_levels_with(eps: Vec<f64>, n: Vec<u32>, spacing: Spacing) -> Result<Self> {
        if eps.len() != n.len() {
            return Err(Error::LengthMismatch { left: eps.len(), right: n.len() });
        }
        check_decay(&eps)?;
        for k in 0..n.len() {
            if n[k] == 0 || (k > 0 && n[k] <= n[k - 1]) {
                return Err(Error::Invalid(alloc::format!("n must be increasing positive integers (k = {})", k + 1)));
            }
            let ratio = flatness_ratio(eps[k], n[k]);
            if !(ratio < 1.0) {
                return Err(Error::EpsBound { index: k + 1, value: ratio });
            }
        }
        Ok(Self::assemble(eps, n, spacing))
    }

    fn assemble(eps: Vec<f64>, n: Vec<u32>, spacing: Spacing) -> Self {
        let mut m = Vec::with_capacity(n.len());
        let mut r = Vec::with_capacity(n.len());
        let mut reach = Vec::with_capacity(n.len() + 1);
        let mut total = BigInt::zero();
        reach.push(total.clone());
        for &nk in &n {
            let (mk, rk) = match spacing {
                Spacing::Minimal => {
                    let v = &total * 2u32 + 1u32;
                    (v.clone(), v)
                }
                Spacing::Separated if m.is_empty() => (BigInt::from(2), BigInt::one()),
                Spacing::Separated => (&total * 2u32 + 2u32, &total * 3u32 + 3u32),
            };
            let span = (BigInt::one() << nk) - 1u32;
            total += &span * &mk + &rk;
            m.push(mk);
            r.push(rk);
            reach.push(total.clone());
        }
        let small = if total.bits() < 120 {
            Some(SmallParams {
                m: m.iter().map(|x| x.to_i128().unwrap()).collect(),
                r: r.iter().map(|x| x.to_i128().unwrap()).collect(),
                reach: reach.iter().map(|x| x.to_i128().unwrap()).collect(),
            })
        } else {
            None
        };
        RrsParams { eps, n, m, r, spacing, reach, small }
    }

    pub fn levels(&self) -> usize {
        self.eps.len()
    }

    /// Largest `|s|` produced by levels `1..=levels`.
    pub fn reach(&self, levels: usize) -> &BigInt {
        &self.reach[levels]
    }

    /// Enforces `1/2 < eps_k 2^((n_k+3)/2) < 1` at every level.
    pub fn check_two_sided(&self) -> Result<()> {
        for k in 0..self.levels() {
            let ratio = flatness_ratio(self.eps[k], self.n[k]);
            if !(ratio > 0.5 && ratio < 1.0) {
                return Err(Error::EpsBound { index: k + 1, value: ratio });
            }
        }
        Ok(())
    }

    /// Checks the gap conditions for `m` and `r` at every level.
    pub fn gaps_hold(&self) -> bool {
        (1..self.levels()).all(|k| {
            let bound = &self.reach[k] * 2u32;
            self.m[k] > bound && self.r[k] > bound
        })
    }

    /// Whether `r_k` sits more than `reach_{k-1}` away from every multiple of
    /// `m_k`, which makes `coeff(a - b) = 0` for distinct `a, b` in `A_k`.
    pub fn separated(&self, k: usize) -> bool {
        let rem = self.r[k - 1].mod_floor(&self.m[k - 1]);
        let dist = core::cmp::min(rem.clone(), &self.m[k - 1] - rem);
        dist > self.reach[k - 1]
    }
}

fn check_level(params: &RrsParams, k: usize) -> Result<()> {
    if k == 0 || k > params.levels() {
        return Err(Error::Invalid(alloc::format!("level {k} outside 1..={}", params.levels())));
    }
    Ok(())
}

/// The polynomial `w_k`, materialized. Coefficient `eps_k a_l` sits at
/// `+-(l m_k + r_k)` for `l = 0..2^{n_k}`, with exact form `sign(a_l) eps_k`.
pub fn w_poly(k: usize, params: &RrsParams) -> Result<SparseSpectrum> {
    check_level(params, k)?;
    let n = params.n[k - 1];
    if 2u128 << n > MAX_MATERIALIZED {
        return Err(Error::GridTooLarge { points: BigInt::from(2u128 << n) });
    }
    let eps = params.eps[k - 1];
    let (signs, _) = rs_signs(n);
    let (m, r) = (&params.m[k - 1], &params.r[k - 1]);
    let mut out = SparseSpectrum::new();
    let mut freq = r.clone();
    for &a in &signs {
        let c = Coefficient::with_exact(eps * f64::from(a), ExactForm::new(a, alloc::vec![k as u32]));
        out.insert(-freq.clone(), c.clone());
        out.insert(freq.clone(), c);
        freq += m;
    }
    Ok(out)
}

/// `||w_k||_2^2` from the block structure: `2^{n_k+1}` disjoint frequencies of modulus `eps_k`.
pub fn w_l2_norm_sq(k: usize, params: &RrsParams) -> f64 {
    let eps = params.eps[k - 1];
    eps * eps * libm::ldexp(1.0, params.n[k - 1] as i32 + 1)
}

/// The sup-norm bound `eps_k 2^((n_k + 3) / 2)`.
pub fn w_sup_bound(k: usize, params: &RrsParams) -> f64 {
    flatness_ratio(params.eps[k - 1], params.n[k - 1])
}

/// Reduces a frequency modulo a grid size.
pub fn residue_u64(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

/// `w_k(2 pi x / grid)`, evaluated through the Rudin–Shapiro recursion.
pub fn w_eval_at_phase(k: usize, params: &RrsParams, x: u64, grid: u64) -> f64 {
    let mult = BigInt::from(residue_u64(&params.m[k - 1], grid));
    let (p, _) = eval_pair_at_phase(params.n[k - 1], &mult, x, grid);
    let rx = (u128::from(residue_u64(&params.r[k - 1], grid)) * u128::from(x) % u128::from(grid)) as f64;
    let angle = 2.0 * core::f64::consts::PI * rx / grid as f64;
    let z = p * Complex64::new(libm::cos(angle), libm::sin(angle));
    2.0 * params.eps[k - 1] * z.re
}

/// `f_N(2 pi x / grid) = prod_{k <= N} (1 - w_k)`, pointwise.
pub fn partial_product_at_phase(params: &RrsParams, levels: usize, x: u64, grid: u64) -> f64 {
    (1..=levels).map(|k| 1.0 - w_eval_at_phase(k, params, x, grid)).product()
}

/// `f_N = prod_{k <= N} (1 - w_k)` expanded with exact coefficient forms.
pub fn partial_product(params: &RrsParams, levels: usize) -> Result<SparseSpectrum> {
    if levels > params.levels() {
        return Err(Error::TooShort { needed: levels, available: params.levels() });
    }
    let size: u128 = params.n[..levels].iter().map(|&n| (2u128 << n) + 1).product();
    if size > MAX_MATERIALIZED {
        return Err(Error::GridTooLarge { points: BigInt::from(size) });
    }
    let mut acc = SparseSpectrum::one();
    for k in 1..=levels {
        let factor = SparseSpectrum::one().sub_exact(&w_poly(k, params)?);
        acc = multiply(&acc, &factor);
    }
    Ok(acc)
}

impl SparseSpectrum {
    /// `self - other` for disjoint supports, keeping exact forms.
    fn sub_exact(&self, other: &SparseSpectrum) -> SparseSpectrum {
        let mut out = self.clone();
        for (f, c) in other.iter() {
            debug_assert!(self.get(f).is_none());
            out.insert(
                f.clone(),
                Coefficient { value: -c.value, exact: c.exact.as_ref().map(ExactForm::neg) },
            );
        }
        out
    }
}

/// `s = sum_j b_j c_j` with `b_j` in {-1, 0, 1} and `c_j = r_j + index_j m_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub b: Vec<i8>,
    pub index: Vec<BigInt>,
    pub c: Vec<BigInt>,
}

impl Representation {
    pub fn value(&self) -> BigInt {
        self.b.iter().zip(&self.c).map(|(&b, c)| c * BigInt::from(b)).sum()
    }
}

/// Greedy decomposition from the top level down; `None` when `s` has no representation.
pub fn unique_representation(s: &BigInt, params: &RrsParams, levels: usize) -> Option<Representation> {
    let mut rest = s.clone();
    let mut b = alloc::vec![0i8; levels];
    let mut index = alloc::vec![BigInt::zero(); levels];
    let mut c = alloc::vec![BigInt::zero(); levels];
    for j in (0..levels).rev() {
        if rest.is_zero() {
            break;
        }
        let below = &params.reach[j];
        if rest.abs() <= *below {
            continue;
        }
        let sign: i8 = if rest.is_positive() { 1 } else { -1 };
        let u = rest.abs() - &params.r[j];
        let shifted = &u + below;
        if shifted.is_negative() {
            return None;
        }
        let i = shifted.div_floor(&params.m[j]);
        if i >= BigInt::one() << params.n[j] {
            return None;
        }
        let cj = &params.r[j] + &i * &params.m[j];
        let left = &u - &i * &params.m[j];
        if left.abs() > *below {
            return None;
        }
        rest -= &cj * BigInt::from(sign);
        b[j] = sign;
        index[j] = i;
        c[j] = cj;
    }
    if rest.is_zero() {
        Some(Representation { b, index, c })
    } else {
        None
    }
}

/// `(level, block index)` pairs of the representation, using `i128` when it fits.
fn representation_terms(s: &BigInt, params: &RrsParams, levels: usize) -> Option<Vec<(usize, BigInt)>> {
    if let (Some(sp), Some(s)) = (&params.small, s.to_i128()) {
        let mut rest = s;
        let mut terms = Vec::new();
        for j in (0..levels).rev() {
            if rest == 0 {
                break;
            }
            let below = sp.reach[j];
            if rest.abs() <= below {
                continue;
            }
            let u = rest.abs() - sp.r[j];
            if u + below < 0 {
                return None;
            }
            let i = (u + below).div_euclid(sp.m[j]);
            if params.n[j] < 127 && i >= 1i128 << params.n[j] {
                return None;
            }
            if (u - i * sp.m[j]).abs() > below {
                return None;
            }
            let cj = sp.r[j] + i * sp.m[j];
            rest -= rest.signum() * cj;
            terms.push((j, BigInt::from(i)));
        }
        return if rest == 0 { Some(terms) } else { None };
    }
    let rep = unique_representation(s, params, levels)?;
    Some(
        rep.b
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .map(|(j, _)| (j, rep.index[j].clone()))
            .collect(),
    )
}

/// Sign of the Rudin–Shapiro coefficient `a_index` of `P_level`:
/// `(-1)` to the number of adjacent `11` pairs in the binary expansion.
pub fn rs_sign(level: u32, index: &BigInt) -> i8 {
    let mut sign = 1i8;
    let mut prev = false;
    for bit in (0..u64::from(level)).rev() {
        let cur = index.bit(bit);
        if cur && prev {
            sign = -sign;
        }
        prev = cur;
    }
    sign
}

/// Coefficient of `f_N` at `s`, read off the unique representation.
///
/// Each used level contributes `-eps_j a_{index_j}`; the conjugate half of
/// `w_j` carries the same `a`, so the sign of `b_j` does not enter.
pub fn coeff_at(s: &BigInt, params: &RrsParams, levels: usize) -> Coefficient {
    match representation_terms(s, params, levels) {
        None => Coefficient::real(0.0),
        Some(terms) => {
            let mut sign = 1i8;
            let mut value = 1.0;
            let mut idx = Vec::with_capacity(terms.len());
            for (j, i) in terms {
                let a = rs_sign(params.n[j], &i);
                sign *= -a;
                value *= params.eps[j];
                idx.push(j as u32 + 1);
            }
            Coefficient::with_exact(f64::from(sign) * value, ExactForm::new(sign, idx))
        }
    }
}

fn rs_sign_bits(index: u128) -> f64 {
    let pairs = (index & (index >> 1)).count_ones();
    if pairs.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Float value of [`coeff_at`] without building the exact form. Uses `i128`
/// arithmetic when the parameters allow it, which keeps double sums cheap.
pub fn coeff_value_at(s: &BigInt, params: &RrsParams, levels: usize) -> f64 {
    match (&params.small, s.to_i128()) {
        (Some(sp), Some(s)) => coeff_value_i128(s, params, sp, levels),
        _ => coeff_at(s, params, levels).value.re,
    }
}

/// [`coeff_value_at`] for a frequency already in `i128`; `None` when the
/// parameters are too large for the fast path.
pub fn coeff_value_at_i128(s: i128, params: &RrsParams, levels: usize) -> Option<f64> {
    params.small.as_ref().map(|sp| coeff_value_i128(s, params, sp, levels))
}

fn coeff_value_i128(s: i128, params: &RrsParams, sp: &SmallParams, levels: usize) -> f64 {
    let mut rest = s;
    let mut value = 1.0;
    for j in (0..levels).rev() {
        if rest == 0 {
            break;
        }
        let below = sp.reach[j];
        if rest.abs() <= below {
            continue;
        }
        let u = rest.abs() - sp.r[j];
        if u + below < 0 {
            return 0.0;
        }
        let i = (u + below).div_euclid(sp.m[j]);
        if params.n[j] < 127 && i >= 1i128 << params.n[j] {
            return 0.0;
        }
        if (u - i * sp.m[j]).abs() > below {
            return 0.0;
        }
        rest -= rest.signum() * (sp.r[j] + i * sp.m[j]);
        value *= -params.eps[j] * rs_sign_bits(i as u128);
    }
    if rest == 0 {
        value
    } else {
        0.0
    }
}
