//! Arithmetic-progression splitting, L1-minimal interpolation of `1` on a
//! frequency set, and the Littlewood ratio harness.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fft::dft;
use crate::rudinshapiro::rudin_shapiro_pair;
use crate::trigcore::{eval_on_grid, l1_norm, l1_norm_on_grid, Coefficient, L1Estimate, SparseSpectrum};

/// The two-sided progression `residue + modulus * Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progression {
    pub modulus: BigInt,
    pub residue: BigInt,
    /// Support elements in the progression.
    pub count: usize,
}

impl Progression {
    pub fn contains(&self, n: &BigInt) -> bool {
        (n - &self.residue).mod_floor(&self.modulus).is_zero()
    }
}

/// Halves the support by residues modulo successive powers of two until a
/// class holds between `d` and `2d - 1` elements.
///
/// When both halves still hold at least `d` elements the smaller one is kept
/// (ties go to the smaller residue).
pub fn progression_split(support: &[BigInt], d: usize) -> Result<Progression> {
    if d == 0 {
        return Err(Error::Invalid("d must be positive".into()));
    }
    let set: BTreeSet<&BigInt> = support.iter().collect();
    if set.len() < d {
        return Err(Error::SupportTooSmall { size: set.len(), d });
    }
    let mut class: Vec<&BigInt> = set.into_iter().collect();
    let mut modulus = BigInt::one();
    let mut residue = BigInt::zero();
    while class.len() >= 2 * d {
        let next = &modulus * 2u32;
        let (even, odd): (Vec<&BigInt>, Vec<&BigInt>) =
            class.iter().partition(|n| (**n - &residue).mod_floor(&next).is_zero());
        let take_odd = match (even.len() >= d, odd.len() >= d) {
            (true, true) => odd.len() < even.len(),
            (false, _) => true,
            (true, false) => false,
        };
        if take_odd {
            residue += &modulus;
            class = odd;
        } else {
            class = even;
        }
        modulus = next;
    }
    Ok(Progression { modulus, residue, count: class.len() })
}

/// Minimize `||f||_1` over `supp f ⊂ candidate` with `f(n) = 1` on `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationProblem {
    pub lambda: Vec<BigInt>,
    pub candidate: Vec<BigInt>,
    pub grid_size: usize,
}

/// Default grid: `64 * (2 max|n| + 1)` points.
pub const BPB_OVERSAMPLE: usize = 64;

impl InterpolationProblem {
    pub fn new(lambda: Vec<BigInt>, candidate: Vec<BigInt>) -> Result<Self> {
        let deg = candidate.iter().map(|n| n.magnitude().to_usize().unwrap_or(usize::MAX)).max().unwrap_or(0);
        let grid_size = deg
            .checked_mul(2)
            .and_then(|x| x.checked_add(1))
            .and_then(|x| x.checked_mul(BPB_OVERSAMPLE))
            .ok_or(Error::GridTooLarge { points: BigInt::from(deg) * 2u32 * BPB_OVERSAMPLE })?;
        let p = InterpolationProblem { lambda, candidate, grid_size };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_empty() {
            return Err(Error::EmptySupport);
        }
        let cand: BTreeSet<&BigInt> = self.candidate.iter().collect();
        if let Some(n) = self.lambda.iter().find(|n| !cand.contains(n)) {
            return Err(Error::Invalid(alloc::format!("frequency {n} of Lambda is not in the candidate support")));
        }
        let deg = self.candidate.iter().map(|n| n.magnitude().clone()).max().unwrap_or_default();
        if BigInt::from(self.grid_size) <= BigInt::from(deg) * 2u32 {
            return Err(Error::Invalid(alloc::format!("grid of {} points is too coarse", self.grid_size)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpbResult {
    pub f: SparseSpectrum,
    pub l1: L1Estimate,
    /// Best grid objective after each iteration; nonincreasing.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `max_{n in Lambda} |f(n) - 1|`.
    pub constraint_residual: f64,
    /// `||f||_1 + err <= 1 + target_eps`.
    pub target_met: bool,
}

/// Solves `a x = b` for Hermitian positive definite `a` (row-major `n x n`).
fn solve_hermitian(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> Option<Vec<Complex64>> {
    let n = b.len();
    // Cholesky a = L L^*, L stored in the lower triangle
    for j in 0..n {
        let mut diag = a[j * n + j].re;
        for k in 0..j {
            diag -= a[j * n + k].norm_sqr();
        }
        if !(diag > 0.0) {
            return None;
        }
        let diag = libm::sqrt(diag);
        a[j * n + j] = Complex64::new(diag, 0.0);
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = s / diag;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i].re;
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i].conj() * b[k];
        }
        b[i] = s / a[i * n + i].re;
    }
    Some(b)
}

fn build(lambda: &[i64], free: &[i64], coeffs: &[Complex64]) -> SparseSpectrum {
    let mut f = SparseSpectrum::new();
    for &n in lambda {
        f.insert(BigInt::from(n), Coefficient::real(1.0));
    }
    for (&n, &c) in free.iter().zip(coeffs) {
        f.insert(BigInt::from(n), Coefficient::float(c));
    }
    f
}

fn grid_objective(f: &SparseSpectrum, m: usize) -> Result<(f64, Vec<Complex64>)> {
    let values = eval_on_grid(f, m)?;
    let obj = values.iter().map(|v| v.norm()).sum::<f64>() / m as f64;
    Ok((obj, values))
}

/// Iteratively reweighted least squares for the grid L1 norm under the
/// interpolation constraints. The constrained coefficients are pinned to 1,
/// so every iterate is feasible; the best iterate is returned.
pub fn bpb_minimize(problem: &InterpolationProblem, target_eps: f64, max_iter: usize, tol: f64) -> Result<BpbResult> {
    problem.validate()?;
    let small = |n: &BigInt| n.to_i64().ok_or_else(|| Error::GridTooLarge { points: n.clone() });
    let lambda: BTreeSet<i64> = problem.lambda.iter().map(small).collect::<Result<_>>()?;
    let candidate: BTreeSet<i64> = problem.candidate.iter().map(small).collect::<Result<_>>()?;
    let lambda: Vec<i64> = lambda.into_iter().collect();
    let free: Vec<i64> = candidate.into_iter().filter(|n| lambda.binary_search(n).is_err()).collect();
    let m = problem.grid_size;
    let mi = m as i64;
    let mut coeffs = alloc::vec![Complex64::zero(); free.len()];
    let mut best = build(&lambda, &free, &coeffs);
    let (mut best_obj, mut values) = grid_objective(&best, m)?;
    let scale = best_obj;
    let mut smoothing = scale;
    let floor = 1e-9 * scale;
    let mut history = alloc::vec![best_obj];
    let mut prev_obj = best_obj;
    let mut converged = free.is_empty();
    let mut iterations = 0;
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut weights: Vec<Complex64> = values
            .iter()
            .map(|v| Complex64::new(1.0 / libm::sqrt(v.norm_sqr() + smoothing * smoothing), 0.0))
            .collect();
        // weights[k] becomes sum_j w_j e^{-2 pi i j k / m}
        dft(&mut weights, -1.0);
        let w_hat = |k: i64| weights[k.rem_euclid(mi) as usize];
        let nf = free.len();
        let mut a = alloc::vec![Complex64::zero(); nf * nf];
        let mut b = alloc::vec![Complex64::zero(); nf];
        for (i, &p) in free.iter().enumerate() {
            for (j, &q) in free.iter().enumerate() {
                a[i * nf + j] = w_hat(p - q);
            }
            b[i] = -lambda.iter().map(|&n| w_hat(p - n)).sum::<Complex64>();
        }
        match solve_hermitian(a, b) {
            Some(x) => coeffs = x,
            None => break,
        }
        let candidate = build(&lambda, &free, &coeffs);
        let (obj, vals) = grid_objective(&candidate, m)?;
        values = vals;
        if obj < best_obj {
            best_obj = obj;
            best = candidate;
        }
        history.push(best_obj);
        let settled = smoothing <= floor;
        if settled && (prev_obj - obj).abs() <= tol * obj {
            converged = true;
        }
        prev_obj = obj;
        smoothing = (smoothing * 0.5).max(floor);
    }
    let l1 = l1_norm_on_grid(&best, m)?;
    let constraint_residual = lambda
        .iter()
        .map(|&n| (best.coeff(&BigInt::from(n)) - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(BpbResult {
        target_met: l1.value + l1.error_bound <= 1.0 + target_eps,
        f: best,
        l1,
        history,
        iterations,
        converged,
        constraint_residual,
    })
}

/// `||f||_1 / ln(#f)` with the quadrature error carried into an interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LittlewoodRatio {
    pub support: usize,
    pub l1: L1Estimate,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn littlewood_ratio(f: &SparseSpectrum, oversample: usize) -> Result<LittlewoodRatio> {
    if f.len() < 2 {
        return Err(Error::SupportTooSmall { size: f.len(), d: 2 });
    }
    if let Some((n, c)) = f.iter().find(|(_, c)| c.abs() < 1.0) {
        return Err(Error::Hypothesis(alloc::format!("|f({n})| = {} is below 1", c.abs())));
    }
    let l1 = l1_norm(f, oversample)?;
    let ln = libm::log(f.len() as f64);
    Ok(LittlewoodRatio {
        support: f.len(),
        l1,
        ratio: l1.value / ln,
        lower: (l1.value - l1.error_bound) / ln,
        upper: (l1.value + l1.error_bound) / ln,
    })
}

/// Coefficient 1 on `[-n, n]`.
pub fn dirichlet(n: u64) -> SparseSpectrum {
    let n = n as i64;
    SparseSpectrum::from_pairs((-n..=n).map(|k| (BigInt::from(k), Coefficient::real(1.0))))
}

/// Polynomial families swept by [`littlewood_empirical_l`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `D_N` for `N = 2^j`.
    Dirichlet,
    /// `P_j` of the Rudin–Shapiro pair, `2^j` coefficients.
    RudinShapiro,
}

impl Family {
    /// Members with size parameter `2^j` for `j = min_log..=max_log`.
    pub fn members(self, min_log: u32, max_log: u32) -> Vec<(u64, SparseSpectrum)> {
        (min_log..=max_log)
            .map(|j| {
                let size = 1u64 << j;
                let f = match self {
                    Family::Dirichlet => dirichlet(size),
                    Family::RudinShapiro => rudin_shapiro_pair(j).p,
                };
                (size, f)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalL {
    pub ratios: Vec<LittlewoodRatio>,
    /// Smallest observed ratio, a usable value for the constant `L`.
    pub min_ratio: f64,
}

pub fn littlewood_empirical_l(family: &[SparseSpectrum], oversample: usize) -> Result<EmpiricalL> {
    if family.is_empty() {
        return Err(Error::Invalid("empty family".into()));
    }
    let ratios = family.iter().map(|f| littlewood_ratio(f, oversample)).collect::<Result<Vec<_>>>()?;
    let min_ratio = ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(EmpiricalL { ratios, min_ratio })
}
