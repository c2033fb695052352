//! Spectral idempotents of finite-valued coefficient sequences and the
//! convolution-power bounds that follow from them.
//!
//! Every `f^m` here is the convolution power: its Fourier coefficients are
//! `f(n)^m`. L1 norms come from [`l1_norm`] and carry its quadrature bound.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::trigcore::{l1_norm, AffineSpectrum, Coefficient, L1Estimate, SparseSpectrum};

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `-0.0` becomes `+0.0`, so `total_cmp` agrees with `==`.
fn canonical(v: Complex64) -> Complex64 {
    Complex64::new(v.re + 0.0, v.im + 0.0)
}

/// Distinct coefficient values of `f`, sorted by real then imaginary part.
///
/// With `tol > 0`, values within `tol` of each other are merged into their
/// multiplicity-weighted mean. Clusters whose means are closer than `2 tol`,
/// or whose members stray more than `tol` from the mean, are ambiguous.
pub fn value_set(f: &SparseSpectrum, tol: f64) -> Result<Vec<Complex64>> {
    if !(tol >= 0.0) {
        return Err(Error::Invalid("tolerance must be nonnegative".into()));
    }
    let mut raw: Vec<Complex64> = f.iter().map(|(_, c)| canonical(c.value)).collect();
    raw.sort_by(cmp_complex);
    let mut distinct: Vec<(Complex64, usize)> = Vec::new();
    for v in raw {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    if tol == 0.0 {
        return Ok(distinct.into_iter().map(|(v, _)| v).collect());
    }
    // single-linkage clusters over the distinct values
    let d = distinct.len();
    let mut parent: Vec<usize> = (0..d).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..d {
        for j in i + 1..d {
            if (distinct[i].0 - distinct[j].0).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums: Vec<(Complex64, usize)> = alloc::vec![(Complex64::zero(), 0); d];
    for i in 0..d {
        let r = root(&mut parent, i);
        sums[r].0 += distinct[i].0 * distinct[i].1 as f64;
        sums[r].1 += distinct[i].1;
    }
    let mut means: Vec<Option<Complex64>> = alloc::vec![None; d];
    for i in 0..d {
        if sums[i].1 > 0 {
            means[i] = Some(sums[i].0 / sums[i].1 as f64);
        }
    }
    for i in 0..d {
        let mean = means[root(&mut parent, i)].unwrap();
        if (distinct[i].0 - mean).norm() > tol {
            return Err(Error::Ambiguous { first: distinct[i].0, second: mean });
        }
    }
    let mut reps: Vec<Complex64> = means.into_iter().flatten().collect();
    reps.sort_by(cmp_complex);
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if (reps[i] - reps[j]).norm() < 2.0 * tol {
                return Err(Error::Ambiguous { first: reps[i], second: reps[j] });
            }
        }
    }
    Ok(reps)
}

/// Smallest pairwise distance in `{0} ∪ values`.
pub fn min_gap_with_zero(values: &[Complex64]) -> f64 {
    let mut delta = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        delta = delta.min(a.norm());
        for b in &values[i + 1..] {
            delta = delta.min((a - b).norm());
        }
    }
    delta
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    /// Distinct nonzero coefficient values.
    pub values: Vec<Complex64>,
    /// `idempotents[i]` is the indicator of `{n : f(n) = values[i]}`.
    pub idempotents: Vec<SparseSpectrum>,
    /// Minimal distance in `{0} ∪ values`.
    pub delta: f64,
    pub lambda_max: f64,
}

impl SpectralDecomposition {
    /// `sum_i values[i] * idempotents[i]`.
    pub fn reconstruct(&self) -> SparseSpectrum {
        let mut out = SparseSpectrum::new();
        for (lambda, e) in self.values.iter().zip(&self.idempotents) {
            for (n, _) in e.iter() {
                out.insert(n.clone(), Coefficient::float(*lambda));
            }
        }
        out
    }

    /// The norm bound for each idempotent: `delta^{-k} 2^k ||f||^k` with `k`
    /// nonzero values (the spectrum also contains 0).
    pub fn idempotent_bound(&self, f_norm: f64) -> f64 {
        let k = self.values.len() as i32;
        libm::pow(2.0 * f_norm / self.delta, f64::from(k))
    }
}

/// Splits `f` coefficientwise into orthogonal idempotents, one per exact value.
pub fn idempotent_decompose(f: &SparseSpectrum) -> SpectralDecomposition {
    let values = value_set(f, 0.0).expect("zero tolerance never fails");
    let mut idempotents = alloc::vec![SparseSpectrum::new(); values.len()];
    for (n, c) in f.iter() {
        let i = values.binary_search_by(|v| cmp_complex(v, &canonical(c.value))).expect("value present");
        idempotents[i].insert(n.clone(), Coefficient::real(1.0));
    }
    let lambda_max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    SpectralDecomposition { delta: min_gap_with_zero(&values), values, idempotents, lambda_max }
}

/// The convolution power `f^m`: coefficients `f(n)^m`.
pub fn conv_power(f: &SparseSpectrum, m: u32) -> SparseSpectrum {
    let mut out = SparseSpectrum::new();
    for (n, c) in f.iter() {
        out.insert(n.clone(), Coefficient::float(c.value.powu(m)));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerRow {
    pub m: u32,
    pub power_l1: L1Estimate,
    /// `k delta^{-k} 2^k ||f||^k lambda_max^m` at the nominal `||f||`.
    pub bound: f64,
    /// Same with `||f||` replaced by its quadrature upper end.
    pub bound_padded: f64,
    /// `bound - ||f^m||`.
    pub margin: f64,
    /// `||f^m|| - err <= bound_padded`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerReport {
    pub values: Vec<Complex64>,
    pub delta: f64,
    pub lambda_max: f64,
    pub f_l1: L1Estimate,
    pub rows: Vec<PowerRow>,
}

impl PowerReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

fn power_bound(k: usize, delta: f64, lambda_max: f64, f_norm: f64, m: u32) -> f64 {
    let k = k as f64;
    k * libm::pow(2.0 * f_norm / delta, k) * libm::pow(lambda_max, f64::from(m))
}

/// Checks `||f^m|| <= k delta^{-k} 2^k ||f||^k lambda_max^m` for `m = 1..=m_max`.
pub fn conv_power_bound_check(f: &SparseSpectrum, m_max: u32, oversample: usize) -> Result<PowerReport> {
    let dec = idempotent_decompose(f);
    let f_l1 = l1_norm(f, oversample)?;
    let k = dec.values.len();
    let mut rows = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let power_l1 = l1_norm(&conv_power(f, m), oversample)?;
        let bound = power_bound(k, dec.delta, dec.lambda_max, f_l1.value, m);
        let bound_padded = power_bound(k, dec.delta, dec.lambda_max, f_l1.value + f_l1.error_bound, m);
        rows.push(PowerRow {
            m,
            power_l1,
            bound,
            bound_padded,
            margin: bound - power_l1.value,
            holds: power_l1.value - power_l1.error_bound <= bound_padded,
        });
    }
    Ok(PowerReport { values: dec.values, delta: dec.delta, lambda_max: dec.lambda_max, f_l1, rows })
}

/// Index of the nearest element of `lambda` for every coefficient of `f`, in frequency order.
pub fn snap_partition(f: &SparseSpectrum, lambda: &[Complex64]) -> Vec<usize> {
    f.iter()
        .map(|(_, c)| {
            let mut best = 0;
            for (i, l) in lambda.iter().enumerate() {
                if (c.value - l).norm() < (c.value - lambda[best]).norm() {
                    best = i;
                }
            }
            best
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedReport {
    /// `m = #Lambda - 1`.
    pub m: usize,
    pub delta: f64,
    pub lambda_max: f64,
    pub eps: f64,
    /// The snapped polynomial `f_0` and the remainder `g = f - f_0`.
    pub f0: SparseSpectrum,
    pub g: SparseSpectrum,
    pub g_l2: f64,
    /// `eps sqrt(#g)`.
    pub g_l2_bound: f64,
    pub g_l2_ok: bool,
    pub support_f: usize,
    /// Smallest nonzero `|f(n)|`.
    pub gamma: f64,
    pub f_l1: L1Estimate,
    /// Left side `gamma ||f||` of the Littlewood-type inequality.
    pub gamma_norm: f64,
    /// `ln(#f)`; the inequality asks for `gamma ||f|| >= L ln(#f)`.
    pub ln_support: f64,
    /// `C = m 2^{m+1} lambda_max^m / delta^m`.
    pub c_const: f64,
    pub power_l1: L1Estimate,
    /// `C lambda_max^{k-m} ||f||^m`.
    pub rhs: f64,
    pub holds: bool,
}

/// Snaps `f` to `Lambda` and compares `||f^k||` with `C lambda_max^{k-m} ||f||^m`.
pub fn perturbed_power_bound_check(
    f: &SparseSpectrum,
    lambda: &[Complex64],
    eps: f64,
    k: u32,
    oversample: usize,
) -> Result<PerturbedReport> {
    if !lambda.iter().any(|l| l.is_zero()) {
        return Err(Error::Invalid("Lambda must contain 0".into()));
    }
    let nonzero: Vec<Complex64> = lambda.iter().copied().filter(|l| !l.is_zero()).collect();
    let m = nonzero.len();
    if m + 1 != lambda.len() {
        return Err(Error::Invalid("Lambda has repeated values".into()));
    }
    if k as usize <= m {
        return Err(Error::Invalid(alloc::format!("k = {k} must exceed m = {m}")));
    }
    let delta = min_gap_with_zero(&nonzero);
    if !(eps >= 0.0 && eps < delta / 2.0) {
        return Err(Error::SnapTolerance { eps, half_gap: delta / 2.0 });
    }
    let lambda_max = nonzero.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let part = snap_partition(f, lambda);
    let mut f0 = SparseSpectrum::new();
    for ((n, c), &i) in f.iter().zip(&part) {
        if (c.value - lambda[i]).norm() > eps {
            return Err(Error::Hypothesis(alloc::format!(
                "coefficient {} at {n} is farther than {eps} from Lambda",
                c.value
            )));
        }
        f0.insert(n.clone(), Coefficient::float(lambda[i]));
    }
    let g = f.sub(&f0);
    let g_l2 = libm::sqrt(g.l2_norm_sq());
    let g_l2_bound = eps * libm::sqrt(g.len() as f64);
    let support_f = f.len();
    let gamma = f.iter().map(|(_, c)| c.abs()).reduce(f64::min).unwrap_or(0.0);
    let f_l1 = l1_norm(f, oversample)?;
    let power_l1 = l1_norm(&conv_power(f, k), oversample)?;
    let c_const = m as f64 * libm::pow(2.0, (m + 1) as f64) * libm::pow(lambda_max / delta, m as f64);
    let rhs = c_const * libm::pow(lambda_max, f64::from(k) - m as f64) * libm::pow(f_l1.value, m as f64);
    let rhs_padded = c_const
        * libm::pow(lambda_max, f64::from(k) - m as f64)
        * libm::pow(f_l1.value + f_l1.error_bound, m as f64);
    Ok(PerturbedReport {
        m,
        delta,
        lambda_max,
        eps,
        f0,
        g,
        g_l2,
        g_l2_bound,
        // Parseval bound; a relative slack absorbs float rounding in g
        g_l2_ok: g_l2 <= g_l2_bound * (1.0 + 1e-12),
        support_f,
        gamma,
        f_l1,
        gamma_norm: gamma * f_l1.value,
        ln_support: libm::log(support_f as f64),
        c_const,
        power_l1,
        rhs,
        holds: power_l1.value - power_l1.error_bound <= rhs_padded,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationReport {
    /// The values used as roots, with 0 added when it was missing.
    pub roots: Vec<Complex64>,
    /// `sup_n |P(f)(n)|`, including the unit part.
    pub residual: f64,
    pub product: AffineSpectrum,
}

/// Evaluates `prod_i (f - a_i unit)` in the affine representation. The
/// coefficients of a finitely supported `f` vanish off the support, so 0 is
/// added to the roots when absent.
pub fn annihilating_polynomial_check(f: &SparseSpectrum, values: &[Complex64]) -> AnnihilationReport {
    let mut roots = values.to_vec();
    if !roots.iter().any(|v| v.is_zero()) {
        roots.push(Complex64::zero());
    }
    let base = AffineSpectrum::from_sparse(f.clone());
    let mut product = AffineSpectrum::unit(Complex64::one());
    for &a in &roots {
        product = product.convolve(&base.sub_unit(a));
    }
    AnnihilationReport { roots, residual: product.sup_sequence(), product }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn real(pairs: &[(i64, f64)]) -> SparseSpectrum {
        SparseSpectrum::from_pairs(pairs.iter().map(|&(n, v)| (BigInt::from(n), Coefficient::real(v))))
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn value_set_examples() {
        assert_eq!(value_set(&real(&[(0, 1.0), (3, 1.0), (7, -1.0)]), 0.0).unwrap(), alloc::vec![c(-1.0), c(1.0)]);
        let vs = value_set(&real(&[(0, 1.0), (1, 1.05), (2, -1.0)]), 0.1).unwrap();
        assert_eq!(vs.len(), 2);
        assert!((vs[1] - c(1.025)).norm() < 1e-15);
        assert!(matches!(value_set(&real(&[(0, 1.0), (1, 1.15)]), 0.1), Err(Error::Ambiguous { .. })));
    }

    #[test]
    fn decomposition_of_two_values() {
        let f = real(&[(0, 1.0), (1, 1.0), (2, 2.0)]);
        let dec = idempotent_decompose(&f);
        assert_eq!(dec.values, alloc::vec![c(1.0), c(2.0)]);
        assert_eq!(dec.idempotents[0], real(&[(0, 1.0), (1, 1.0)]));
        assert_eq!(dec.idempotents[1], real(&[(2, 1.0)]));
        assert_eq!(dec.reconstruct(), f);
        assert_eq!(dec.delta, 1.0);
    }

    #[test]
    fn signed_zero_parts_are_one_value() {
        let f = SparseSpectrum::from_pairs([
            (BigInt::from(0), Complex64::new(-0.5, -0.0)),
            (BigInt::from(1), Complex64::new(-0.5, 0.0)),
        ]);
        let dec = idempotent_decompose(&f);
        assert_eq!(dec.values.len(), 1);
        assert_eq!(dec.reconstruct(), f);
    }

    #[test]
    fn power_bound_for_a_character() {
        let report = conv_power_bound_check(&real(&[(1, 1.0)]), 4, 8).unwrap();
        assert!(report.all_hold());
        assert!(report.rows.iter().all(|r| (r.power_l1.value - 1.0).abs() < 1e-12));
    }

    #[test]
    fn annihilation_of_sign_sequence() {
        let f = real(&[(0, 1.0), (1, 1.0), (2, 1.0), (3, -1.0)]);
        let report = annihilating_polynomial_check(&f, &[c(1.0), c(-1.0)]);
        assert_eq!(report.residual, 0.0);
        let report = annihilating_polynomial_check(&f, &[c(1.0)]);
        assert!(report.residual > 0.0);
    }

    #[test]
    fn snapping_rejects_wide_tolerance() {
        let f = real(&[(0, 1.0)]);
        let err = perturbed_power_bound_check(&f, &[c(0.0), c(1.0)], 0.5, 2, 8).unwrap_err();
        assert!(matches!(err, Error::SnapTolerance { .. }));
    }
}
