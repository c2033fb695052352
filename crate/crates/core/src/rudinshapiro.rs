//! Rudin–Shapiro polynomial pairs.
//!
//! `P_0 = Q_0 = 1`, `P_{n+1} = P_n + e^{i 2^n t} Q_n`, `Q_{n+1} = P_n - e^{i 2^n t} Q_n`.

use alloc::vec::Vec;

use core::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::trigcore::{eval_on_grid, Coefficient, SparseSpectrum};
use crate::Result;

/// Coefficient sign vectors of `P_n` and `Q_n` (frequencies `0..2^n`).
pub fn rs_signs(level: u32) -> (Vec<i8>, Vec<i8>) {
    let mut p: Vec<i8> = alloc::vec![1];
    let mut q: Vec<i8> = alloc::vec![1];
    for _ in 0..level {
        let mut np = p.clone();
        np.extend(q.iter().copied());
        let mut nq = p;
        nq.extend(q.iter().map(|&x| -x));
        p = np;
        q = nq;
    }
    (p, q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RsPair {
    pub level: u32,
    pub p: SparseSpectrum,
    pub q: SparseSpectrum,
}

fn spectrum_from_signs(signs: &[i8]) -> SparseSpectrum {
    SparseSpectrum::from_pairs(
        signs
            .iter()
            .enumerate()
            .map(|(k, &s)| (BigInt::from(k), Coefficient::real(f64::from(s)))),
    )
}

pub fn rudin_shapiro_pair(level: u32) -> RsPair {
    let (p, q) = rs_signs(level);
    RsPair { level, p: spectrum_from_signs(&p), q: spectrum_from_signs(&q) }
}

/// `(P_n(mult * t), Q_n(mult * t))` at `t = 2 pi x / m`, by the recursion in O(n).
pub fn eval_pair_at_phase(level: u32, mult: &BigInt, x: u64, m: u64) -> (Complex64, Complex64) {
    let modulus = u128::from(m);
    let mult = mult.mod_floor(&BigInt::from(m)).to_u128().expect("residue below modulus");
    let mut k = mult * u128::from(x) % modulus;
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(1.0, 0.0);
    for _ in 0..level {
        let angle = 2.0 * PI * (k as f64 / m as f64);
        let z = Complex64::new(libm::cos(angle), libm::sin(angle)) * q;
        let np = p + z;
        q = p - z;
        p = np;
        k = 2 * k % modulus;
    }
    (p, q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessReport {
    pub level: u32,
    /// Every coefficient of `P_n` and `Q_n` is exactly +1 or -1.
    pub unit_coefficients: bool,
    /// `||P_n||_2^2 == 2^n` in exact arithmetic.
    pub l2_exact: bool,
    pub grid_size: usize,
    pub grid_sup: f64,
    pub sup_bound: f64,
    pub sup_ok: bool,
    /// Largest relative deviation of `|P|^2 + |Q|^2` from `2^{n+1}` on the grid.
    pub parallelogram_rel_err: f64,
    pub parallelogram_ok: bool,
}

impl FlatnessReport {
    pub fn all_pass(&self) -> bool {
        self.unit_coefficients && self.l2_exact && self.sup_ok && self.parallelogram_ok
    }
}

/// Relative padding on the sup bound, covering float rounding in grid evaluation.
pub const SUP_PADDING: f64 = 1e-6;

/// Checks the flatness properties on a grid of `oversample * 2^{n+1}` points.
pub fn verify_flatness(pair: &RsPair, oversample: usize) -> Result<FlatnessReport> {
    let n = pair.level;
    let unit_coefficients = pair.p.len() == 1usize << n
        && pair.q.len() == 1usize << n
        && pair
            .p
            .iter()
            .chain(pair.q.iter())
            .all(|(_, c)| c.value.im == 0.0 && (c.value.re == 1.0 || c.value.re == -1.0));
    // integer sum of squared integer coefficients, exact while 2^n < 2^53
    let l2_exact = pair.p.l2_norm_sq() == libm::ldexp(1.0, n as i32);
    let m = oversample.max(2) << (n + 1);
    let pv = eval_on_grid(&pair.p, m)?;
    let qv = eval_on_grid(&pair.q, m)?;
    let grid_sup = pv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sup_bound = libm::pow(2.0, f64::from(n + 1) / 2.0);
    let target = libm::ldexp(1.0, n as i32 + 1);
    let parallelogram_rel_err = pv
        .iter()
        .zip(qv.iter())
        .map(|(a, b)| ((a.norm_sqr() + b.norm_sqr()) - target).abs() / target)
        .fold(0.0, f64::max);
    Ok(FlatnessReport {
        level: n,
        unit_coefficients,
        l2_exact,
        grid_size: m,
        grid_sup,
        sup_bound,
        sup_ok: grid_sup <= sup_bound * (1.0 + SUP_PADDING),
        parallelogram_rel_err,
        parallelogram_ok: parallelogram_rel_err <= 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        let (p, q) = rs_signs(0);
        assert_eq!((p, q), (alloc::vec![1], alloc::vec![1]));
        let (p, _) = rs_signs(2);
        assert_eq!(p, alloc::vec![1, 1, 1, -1]);
    }

    #[test]
    fn flatness_passes_and_negative_control_fails() {
        for n in [0, 3, 12] {
            let report = verify_flatness(&rudin_shapiro_pair(n), 8).unwrap();
            assert!(report.all_pass(), "{report:?}");
        }
        let mut pair = rudin_shapiro_pair(4);
        pair.p.insert(BigInt::from(5), Coefficient::real(2.0));
        let report = verify_flatness(&pair, 8).unwrap();
        assert!(!report.unit_coefficients);
    }

    #[test]
    fn pointwise_recursion_matches_grid() {
        let pair = rudin_shapiro_pair(6);
        let grid = eval_on_grid(&pair.p, 256).unwrap();
        for x in [0u64, 1, 17, 200] {
            let (p, _) = eval_pair_at_phase(6, &BigInt::from(1), x, 256);
            assert!((p - grid[x as usize]).norm() < 1e-10);
        }
    }
}
