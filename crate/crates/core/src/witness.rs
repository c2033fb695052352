//! Singularity witnesses for Riesz–Rudin–Shapiro products.
//!
//! Levels are grouped into consecutive blocks. Block `k` yields
//! `f_k = sum_{l in block} c_l sum_{n in A_l} sgn(mu(n)) e^{int}` with
//! `A_l = {r_l + i m_l : 0 <= i < 2^{n_l}}` and weights normalized by
//! `sum_{l in block} c_l 2^{n_l} eps_l = 1`. Against the product measure the
//! cross terms inside one `A_l` vanish, which drives `||f_k||_{L2(mu)}` to one
//! while `||f_k||_{L2}` stays small.
//!
//! All integrals against the measure are taken against a finite partial
//! product `f_N`; results always name `N`.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::rrs::{coeff_value_at, coeff_value_at_i128, RrsParams, MAX_MATERIALIZED};
use crate::trigcore::{Coefficient, SparseSpectrum};

/// How weights and block lengths are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightRule {
    /// `c_l = eps_l / sum_block 2^{n_l} eps_l^2`, the smallest `sum c_l^2 2^{n_l}`
    /// under the normalization. A block closes once its mass
    /// `sum 2^{n_l} eps_l^2` exceeds `growth` times the previous block's mass.
    LeastSquares { growth: f64 },
    /// `c_l = 1 / sum_block 2^{n_l} eps_l`, constant on the block. Block `k`
    /// closes once `sum 2^{n_l} eps_l >= 2^k`.
    Uniform,
}

impl Default for WeightRule {
    fn default() -> Self {
        WeightRule::LeastSquares { growth: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    /// 1-based levels `first..=last`.
    pub first: usize,
    pub last: usize,
    /// One weight per level of the block.
    pub weights: Vec<f64>,
}

impl Block {
    pub fn levels(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockPlan {
    pub rule: WeightRule,
    pub blocks: Vec<Block>,
}

impl BlockPlan {
    /// Level cutoffs `l_0 = 0 < l_1 < ...`: block `k` holds levels `l_{k-1}+1..=l_k`.
    pub fn cutoffs(&self) -> Vec<usize> {
        core::iter::once(0).chain(self.blocks.iter().map(|b| b.last)).collect()
    }

    pub fn block(&self, k: usize) -> Result<&Block> {
        self.blocks
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::Invalid(alloc::format!("block {k} outside 1..={}", self.blocks.len())))
    }
}

fn pow2(n: u32) -> f64 {
    libm::ldexp(1.0, n as i32)
}

/// `2^{n_l} eps_l^2`, the mass a level adds to a block.
pub fn level_mass(params: &RrsParams, l: usize) -> f64 {
    let e = params.eps[l - 1];
    pow2(params.n[l - 1]) * e * e
}

/// `2^{n_l} eps_l`.
pub fn level_weight_sum(params: &RrsParams, l: usize) -> f64 {
    pow2(params.n[l - 1]) * params.eps[l - 1]
}

/// Groups levels into `blocks` consecutive blocks and assigns weights.
///
/// Requires the two-sided bound `1/2 < eps_l 2^{(n_l+3)/2} < 1`, which gives
/// `2^{n_l} eps_l^2 > 1/32` at every level.
pub fn build_block_plan(params: &RrsParams, blocks: usize, rule: WeightRule) -> Result<BlockPlan> {
    params.check_two_sided()?;
    let mut out = Vec::with_capacity(blocks);
    let mut next = 1;
    let mut prev_mass = 0.0;
    for k in 1..=blocks {
        let first = next;
        let mut acc = 0.0;
        let target = match rule {
            WeightRule::LeastSquares { growth } => growth * prev_mass,
            WeightRule::Uniform => pow2(k as u32),
        };
        let measure = |l: usize| match rule {
            WeightRule::LeastSquares { .. } => level_mass(params, l),
            WeightRule::Uniform => level_weight_sum(params, l),
        };
        loop {
            if next > params.levels() {
                // every further level adds more than 1/32 of mass and at least
                // sqrt(2^n / 32) >= 1/4 of weight sum, which bounds what is missing
                let per_level = match rule {
                    WeightRule::LeastSquares { .. } => 1.0 / 32.0,
                    WeightRule::Uniform => 0.25,
                };
                let missing = libm::ceil((target - acc).max(0.0) / per_level) as usize + 1;
                return Err(Error::TooShort { needed: params.levels() + missing, available: params.levels() });
            }
            acc += measure(next);
            next += 1;
            let closed = match rule {
                WeightRule::LeastSquares { .. } => acc > target,
                WeightRule::Uniform => acc >= target,
            };
            if closed {
                break;
            }
        }
        let last = next - 1;
        let weights = (first..=last)
            .map(|l| match rule {
                WeightRule::LeastSquares { .. } => params.eps[l - 1] / acc,
                WeightRule::Uniform => 1.0 / acc,
            })
            .collect();
        prev_mass = (first..=last).map(|l| level_mass(params, l)).sum();
        out.push(Block { first, last, weights });
    }
    Ok(BlockPlan { rule, blocks: out })
}

/// `sum_{l in block} c_l 2^{n_l} eps_l`; the plan normalizes it to one.
pub fn block_normalization(plan: &BlockPlan, k: usize, params: &RrsParams) -> Result<f64> {
    let b = plan.block(k)?;
    Ok(b.levels().zip(&b.weights).map(|(l, c)| c * level_weight_sum(params, l)).sum())
}

/// `sum_{l in block} c_l^2 2^{n_l}`, the squared Lebesgue L2 norm of the witness.
pub fn block_l2_sum(plan: &BlockPlan, k: usize, params: &RrsParams) -> Result<f64> {
    let b = plan.block(k)?;
    Ok(b.levels().zip(&b.weights).map(|(l, c)| c * c * pow2(params.n[l - 1])).sum())
}

/// Materializes `f_k`. Signs are read from the partial product through the
/// block's last level, which fixes every coefficient on the block's `A_l`.
pub fn witness_poly(plan: &BlockPlan, k: usize, params: &RrsParams) -> Result<SparseSpectrum> {
    let b = plan.block(k)?;
    let size: u128 = b.levels().map(|l| 1u128 << params.n[l - 1]).sum();
    if size > MAX_MATERIALIZED {
        return Err(Error::GridTooLarge { points: BigInt::from(size) });
    }
    let mut out = SparseSpectrum::new();
    for (l, &c) in b.levels().zip(&b.weights) {
        let (m, r) = (&params.m[l - 1], &params.r[l - 1]);
        let mut freq = r.clone();
        for _ in 0..(1u64 << params.n[l - 1]) {
            let mu = coeff_value_at(&freq, params, b.last);
            if mu == 0.0 {
                return Err(Error::ZeroSign { freq });
            }
            out.insert(freq.clone(), Coefficient::real(c * mu.signum()));
            freq += m;
        }
    }
    Ok(out)
}

/// `1 + sum_{l in block} c_l^2 2^{n_l} (1 - 2^{n_l} eps_l^2)`, the squared
/// L2 norm of `f_k` against the product measure.
pub fn l2_mu_closed_form(plan: &BlockPlan, k: usize, params: &RrsParams) -> Result<f64> {
    let b = plan.block(k)?;
    let tail: f64 = b
        .levels()
        .zip(&b.weights)
        .map(|(l, c)| c * c * pow2(params.n[l - 1]) * (1.0 - level_mass(params, l)))
        .sum();
    Ok(1.0 + tail)
}

fn small_freqs(f: &SparseSpectrum) -> Option<Vec<(i128, Complex64)>> {
    f.iter().map(|(n, c)| n.to_i128().map(|n| (n, c.value))).collect()
}

/// `int |f|^2 f_N dt/2pi = sum_{a,b} f(a) conj(f(b)) f_N(b - a)`, term by term.
pub fn l2_mu_brute_force_spectrum(f: &SparseSpectrum, params: &RrsParams, levels: usize) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    match small_freqs(f) {
        Some(entries) if coeff_value_at_i128(0, params, levels).is_some() => {
            for &(a, ca) in &entries {
                let mut row = Complex64::new(0.0, 0.0);
                for &(b, cb) in &entries {
                    let mu = coeff_value_at_i128(b - a, params, levels).unwrap_or(0.0);
                    if mu != 0.0 {
                        row += cb.conj() * mu;
                    }
                }
                total += ca * row;
            }
        }
        _ => {
            for (a, ca) in f.iter() {
                for (b, cb) in f.iter() {
                    let mu = coeff_value_at(&(b - a), params, levels);
                    total += ca.value * cb.value.conj() * mu;
                }
            }
        }
    }
    total.re
}

/// [`l2_mu_brute_force_spectrum`] applied to the block's witness polynomial.
pub fn l2_mu_brute_force(plan: &BlockPlan, k: usize, params: &RrsParams, levels: usize) -> Result<f64> {
    let f = witness_poly(plan, k, params)?;
    Ok(l2_mu_brute_force_spectrum(&f, params, levels))
}

/// `int f dmu_N = sum_n f(n) f_N(-n)`.
pub fn mu_integral(f: &SparseSpectrum, params: &RrsParams, levels: usize) -> Complex64 {
    f.iter().map(|(n, c)| c.value * coeff_value_at(&-n, params, levels)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuDistance {
    pub l2_mu_sq: f64,
    pub mu_integral: Complex64,
    /// `sqrt(int |f|^2 dmu - 2 Re int f dmu + 1)`, which bounds `||f - 1||_{L1(mu)}`.
    pub distance: f64,
}

/// Upper bound for `||f_k - 1||_{L1(mu_N)}` via Cauchy–Schwarz, computed in coefficient space.
pub fn l1_mu_distance_to_one_spectrum(f: &SparseSpectrum, params: &RrsParams, levels: usize) -> MuDistance {
    let l2 = l2_mu_brute_force_spectrum(f, params, levels);
    let integral = mu_integral(f, params, levels);
    let sq = l2 - 2.0 * integral.re + 1.0;
    MuDistance { l2_mu_sq: l2, mu_integral: integral, distance: libm::sqrt(sq.max(0.0)) }
}

pub fn l1_mu_distance_to_one(plan: &BlockPlan, k: usize, params: &RrsParams, levels: usize) -> Result<MuDistance> {
    let f = witness_poly(plan, k, params)?;
    Ok(l1_mu_distance_to_one_spectrum(&f, params, levels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(levels: usize) -> RrsParams {
        let eps: Vec<f64> = (1..=levels).map(|k| 0.3535 * libm::pow(0.366, k as f64)).collect();
        RrsParams::derive(&eps, levels).unwrap()
    }

    #[test]
    fn single_level_blocks_for_increasing_masses() {
        let p = family(6);
        assert_eq!(p.n, alloc::vec![1, 4, 7, 10, 13, 16]);
        let plan = build_block_plan(&p, 4, WeightRule::default()).unwrap();
        assert_eq!(plan.cutoffs(), alloc::vec![0, 1, 2, 3, 4]);
        let c = plan.blocks[0].weights[0];
        assert!((c - 1.0 / level_weight_sum(&p, 1)).abs() < 1e-15);
    }

    #[test]
    fn not_enough_levels() {
        let p = family(2);
        assert!(matches!(build_block_plan(&p, 5, WeightRule::default()), Err(Error::TooShort { .. })));
    }

    #[test]
    fn constant_one_pairs_to_mass() {
        let p = family(3);
        let one = SparseSpectrum::one();
        assert_eq!(l2_mu_brute_force_spectrum(&one, &p, 3), 1.0);
    }

    #[test]
    fn closed_form_matches_brute_force() {
        let p = family(4);
        let plan = build_block_plan(&p, 3, WeightRule::default()).unwrap();
        for k in 1..=3 {
            assert!((block_normalization(&plan, k, &p).unwrap() - 1.0).abs() < 1e-12);
            let closed = l2_mu_closed_form(&plan, k, &p).unwrap();
            for levels in plan.blocks[k - 1].last..=4 {
                let brute = l2_mu_brute_force(&plan, k, &p, levels).unwrap();
                assert!((closed - brute).abs() < 1e-10, "k={k} N={levels}: {closed} vs {brute}");
                let d = l1_mu_distance_to_one(&plan, k, &p, levels).unwrap();
                assert!((d.mu_integral.re - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minimal_spacing_breaks_cross_term_cancellation() {
        let eps: Vec<f64> = (1..=3).map(|k| 0.3535 * libm::pow(0.366, k as f64)).collect();
        let p = RrsParams::derive_with(&eps, 3, crate::rrs::Spacing::Minimal).unwrap();
        let plan = build_block_plan(&p, 2, WeightRule::default()).unwrap();
        // A_1 = {1, 2}: the difference 1 = r_1 carries -eps_1
        let closed = l2_mu_closed_form(&plan, 1, &p).unwrap();
        let brute = l2_mu_brute_force(&plan, 1, &p, 3).unwrap();
        assert!((closed - brute).abs() > 1e-3, "{closed} {brute}");
    }

    #[test]
    fn uniform_rule_keeps_normalization() {
        let p = family(6);
        let plan = build_block_plan(&p, 2, WeightRule::Uniform).unwrap();
        for k in 1..=2 {
            assert!((block_normalization(&plan, k, &p).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
