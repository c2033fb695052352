//! Sparse Fourier-coefficient arithmetic on the circle.
//!
//! A [`SparseSpectrum`] is a finitely supported map from integer frequencies to
//! complex coefficients. It stands for the trigonometric polynomial
//! `f(t) = sum_n c_n e^{int}`, or equally for the measure `f(t) dt / 2pi`.
//! Haar measure is normalized to total mass one, so every norm here is taken
//! against `dt / 2pi`.
//!
//! Two products exist. [`convolve`] multiplies Fourier sequences pointwise
//! (convolution of measures). [`multiply`] multiplies functions, which
//! convolves the coefficient sequences.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fft;

pub type Frequency = BigInt;

/// Largest grid [`l1_norm`] and [`eval_on_grid`] will allocate.
pub const MAX_GRID: u64 = 1 << 26;

/// Default oversampling factor for L1 quadrature.
pub const DEFAULT_OVERSAMPLE: usize = 64;

/// Exact signed monomial `sign * prod_k eps_k`, one factor per listed index.
///
/// Indices are 1-based and kept sorted, so a repeated index means a power.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactForm {
    pub sign: i8,
    pub eps_indices: Vec<u32>,
}

impl ExactForm {
    pub fn one() -> Self {
        ExactForm { sign: 1, eps_indices: Vec::new() }
    }

    pub fn new(sign: i8, mut eps_indices: Vec<u32>) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        eps_indices.sort_unstable();
        ExactForm { sign, eps_indices }
    }

    pub fn neg(&self) -> Self {
        ExactForm { sign: -self.sign, eps_indices: self.eps_indices.clone() }
    }

    pub fn mul(&self, other: &ExactForm) -> Self {
        let mut merged = Vec::with_capacity(self.eps_indices.len() + other.eps_indices.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.eps_indices, &other.eps_indices);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                merged.push(a[i]);
                i += 1;
            } else {
                merged.push(b[j]);
                j += 1;
            }
        }
        merged.extend_from_slice(&a[i..]);
        merged.extend_from_slice(&b[j..]);
        ExactForm { sign: self.sign * other.sign, eps_indices: merged }
    }

    /// Every index occurs at most once, i.e. the form is `+-prod eps_k^{l_k}` with `l_k` in {0,1}.
    pub fn is_lattice(&self) -> bool {
        self.eps_indices.windows(2).all(|w| w[0] < w[1]) && self.eps_indices.first() != Some(&0)
    }

    /// Evaluates with `eps[k - 1]` standing for `eps_k`.
    pub fn evaluate(&self, eps: &[f64]) -> f64 {
        let mag: f64 = self.eps_indices.iter().map(|&k| eps[k as usize - 1]).product();
        f64::from(self.sign) * mag
    }
}

/// A complex coefficient with an optional exact monomial form.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficient {
    pub value: Complex64,
    pub exact: Option<ExactForm>,
}

impl Coefficient {
    pub fn float(value: Complex64) -> Self {
        Coefficient { value, exact: None }
    }

    pub fn real(value: f64) -> Self {
        Coefficient::float(Complex64::new(value, 0.0))
    }

    pub fn with_exact(value: f64, exact: ExactForm) -> Self {
        Coefficient { value: Complex64::new(value, 0.0), exact: Some(exact) }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.exact.is_none()
    }

    pub fn abs(&self) -> f64 {
        self.value.norm()
    }

    fn mul(&self, other: &Coefficient) -> Coefficient {
        let exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => Some(a.mul(b)),
            _ => None,
        };
        Coefficient { value: self.value * other.value, exact }
    }
}

impl From<f64> for Coefficient {
    fn from(x: f64) -> Self {
        Coefficient::real(x)
    }
}

impl From<Complex64> for Coefficient {
    fn from(z: Complex64) -> Self {
        Coefficient::float(z)
    }
}

/// Finitely supported Fourier sequence. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseSpectrum {
    entries: BTreeMap<Frequency, Coefficient>,
}

impl SparseSpectrum {
    pub fn new() -> Self {
        SparseSpectrum { entries: BTreeMap::new() }
    }

    /// The constant function 1 (Lebesgue measure), with exact form `+1`.
    pub fn one() -> Self {
        let mut s = SparseSpectrum::new();
        s.insert(BigInt::zero(), Coefficient::with_exact(1.0, ExactForm::one()));
        s
    }

    pub fn monomial(freq: impl Into<Frequency>, coef: impl Into<Coefficient>) -> Self {
        let mut s = SparseSpectrum::new();
        s.insert(freq.into(), coef.into());
        s
    }

    /// Builds a spectrum from `(frequency, coefficient)` pairs; later pairs overwrite earlier ones.
    pub fn from_pairs<F, C, I>(pairs: I) -> Self
    where
        F: Into<Frequency>,
        C: Into<Coefficient>,
        I: IntoIterator<Item = (F, C)>,
    {
        let mut s = SparseSpectrum::new();
        for (f, c) in pairs {
            s.insert(f.into(), c.into());
        }
        s
    }

    /// Inserts, or removes the entry when the coefficient is an exact zero.
    pub fn insert(&mut self, freq: Frequency, coef: Coefficient) {
        if coef.is_zero() {
            self.entries.remove(&freq);
        } else {
            self.entries.insert(freq, coef);
        }
    }

    pub fn get(&self, freq: &Frequency) -> Option<&Coefficient> {
        self.entries.get(freq)
    }

    /// Coefficient value at `freq`, zero off the support.
    pub fn coeff(&self, freq: &Frequency) -> Complex64 {
        self.entries.get(freq).map_or(Complex64::zero(), |c| c.value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Frequency, &Coefficient)> {
        self.entries.iter()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &Frequency> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest `|n|` over the support, zero for the empty spectrum.
    pub fn max_abs_freq(&self) -> Frequency {
        let lo = self.entries.keys().next().map(|k| k.abs());
        let hi = self.entries.keys().next_back().map(|k| k.abs());
        match (lo, hi) {
            (Some(a), Some(b)) => a.max(b),
            _ => BigInt::zero(),
        }
    }

    pub fn scale(&self, c: Complex64) -> SparseSpectrum {
        let mut out = SparseSpectrum::new();
        if c.is_zero() {
            return out;
        }
        for (f, coef) in &self.entries {
            out.insert(f.clone(), Coefficient::float(coef.value * c));
        }
        out
    }

    /// Coefficientwise sum. Exact forms survive only where one side is absent.
    pub fn add(&self, other: &SparseSpectrum) -> SparseSpectrum {
        let mut out = self.clone();
        for (f, c) in &other.entries {
            match out.entries.get(f) {
                None => out.insert(f.clone(), c.clone()),
                Some(prev) => {
                    let v = prev.value + c.value;
                    out.insert(f.clone(), Coefficient::float(v));
                }
            }
        }
        out
    }

    pub fn neg(&self) -> SparseSpectrum {
        let mut out = SparseSpectrum::new();
        for (f, c) in &self.entries {
            out.insert(
                f.clone(),
                Coefficient { value: -c.value, exact: c.exact.as_ref().map(ExactForm::neg) },
            );
        }
        out
    }

    pub fn sub(&self, other: &SparseSpectrum) -> SparseSpectrum {
        self.add(&other.neg())
    }

    /// `f(-t)` conjugated equals `f(t)` pointwise, i.e. `f` is real-valued.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.entries.iter().all(|(f, c)| {
            let mirror = self.coeff(&-f);
            (mirror - c.value.conj()).norm() <= tol
        })
    }

    /// Sum of `|c_n|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.entries.values().map(|c| c.value.norm_sqr()).sum()
    }

    /// Membership in F(eps): every coefficient has modulus below `eps`.
    pub fn in_f_class(&self, eps: f64) -> bool {
        sup_coeff(self) < eps
    }

    /// Membership in G(a): every nonzero coefficient has modulus at least `a`.
    pub fn in_g_class(&self, a: f64) -> bool {
        self.entries.values().all(|c| c.abs() >= a)
    }
}

/// Pointwise product of Fourier sequences (convolution of measures).
pub fn convolve(a: &SparseSpectrum, b: &SparseSpectrum) -> SparseSpectrum {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = SparseSpectrum::new();
    for (f, x) in &small.entries {
        if let Some(y) = large.entries.get(f) {
            out.insert(f.clone(), x.mul(y));
        }
    }
    out
}

#[derive(Default)]
struct Accumulator {
    float_sum: Complex64,
    all_exact: bool,
    // (monomial indices, signed multiplicity, value of the +monomial)
    terms: Vec<(Vec<u32>, i64, Complex64)>,
}

impl Accumulator {
    fn fresh() -> Self {
        Accumulator { float_sum: Complex64::zero(), all_exact: true, terms: Vec::new() }
    }

    fn push(&mut self, c: Coefficient) {
        self.float_sum += c.value;
        match c.exact {
            Some(form) if self.all_exact => {
                let sign = i64::from(form.sign);
                let unit = c.value * f64::from(form.sign);
                match self.terms.iter_mut().find(|t| t.0 == form.eps_indices) {
                    Some(t) => t.1 += sign,
                    None => self.terms.push((form.eps_indices, sign, unit)),
                }
            }
            _ => {
                self.all_exact = false;
                self.terms.clear();
            }
        }
    }

    fn finish(self) -> Coefficient {
        if !self.all_exact {
            return Coefficient::float(self.float_sum);
        }
        let mut live = self.terms.into_iter().filter(|t| t.1 != 0);
        match (live.next(), live.next()) {
            (None, _) => Coefficient::float(Complex64::zero()),
            (Some((idx, mult, unit)), None) if mult.abs() == 1 => {
                let sign = if mult > 0 { 1 } else { -1 };
                Coefficient { value: unit * mult as f64, exact: Some(ExactForm { sign, eps_indices: idx }) }
            }
            (Some(first), second) => {
                let mut v = first.2 * first.1 as f64;
                if let Some(s) = second {
                    v += s.2 * s.1 as f64;
                }
                v += live.map(|t| t.2 * t.1 as f64).sum::<Complex64>();
                Coefficient::float(v)
            }
        }
    }
}

/// Pointwise product of functions: `out(n) = sum_m a(m) b(n - m)`.
///
/// When every contribution to a frequency carries an exact form, cancellation
/// is decided on the forms, and a lone surviving monomial keeps its form.
pub fn multiply(a: &SparseSpectrum, b: &SparseSpectrum) -> SparseSpectrum {
    let mut acc: BTreeMap<Frequency, Accumulator> = BTreeMap::new();
    for (fa, ca) in &a.entries {
        for (fb, cb) in &b.entries {
            acc.entry(fa + fb).or_insert_with(Accumulator::fresh).push(ca.mul(cb));
        }
    }
    let mut out = SparseSpectrum::new();
    for (f, a) in acc {
        out.insert(f, a.finish());
    }
    out
}

/// A multiple of the algebra unit plus a sparse part.
///
/// The unit is the Dirac mass at the identity, whose Fourier sequence is
/// constantly one, so the sequence of `c * unit + s` is `c + s(n)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineSpectrum {
    pub unit_scale: Complex64,
    pub sparse: SparseSpectrum,
}

impl AffineSpectrum {
    pub fn from_sparse(sparse: SparseSpectrum) -> Self {
        AffineSpectrum { unit_scale: Complex64::zero(), sparse }
    }

    pub fn unit(c: Complex64) -> Self {
        AffineSpectrum { unit_scale: c, sparse: SparseSpectrum::new() }
    }

    /// Fourier sequence value at `n`.
    pub fn sequence_at(&self, n: &Frequency) -> Complex64 {
        self.unit_scale + self.sparse.coeff(n)
    }

    /// `self - a * unit`.
    pub fn sub_unit(&self, a: Complex64) -> Self {
        AffineSpectrum { unit_scale: self.unit_scale - a, sparse: self.sparse.clone() }
    }

    /// Pointwise product of the two Fourier sequences.
    pub fn convolve(&self, other: &AffineSpectrum) -> AffineSpectrum {
        if self.unit_scale.is_zero() && other.unit_scale.is_zero() {
            return AffineSpectrum::from_sparse(convolve(&self.sparse, &other.sparse));
        }
        let c = self.unit_scale * other.unit_scale;
        let mut sparse = SparseSpectrum::new();
        let freqs: alloc::collections::BTreeSet<&Frequency> =
            self.sparse.frequencies().chain(other.sparse.frequencies()).collect();
        for f in freqs {
            let v = self.sequence_at(f) * other.sequence_at(f) - c;
            sparse.insert(f.clone(), Coefficient::float(v));
        }
        AffineSpectrum { unit_scale: c, sparse }
    }

    /// Supremum of the modulus of the Fourier sequence over all of Z.
    pub fn sup_sequence(&self) -> f64 {
        self.sparse
            .frequencies()
            .map(|f| self.sequence_at(f).norm())
            .fold(self.unit_scale.norm(), f64::max)
    }
}

pub fn l2_norm(f: &SparseSpectrum) -> f64 {
    libm::sqrt(f.l2_norm_sq())
}

pub fn sup_coeff(f: &SparseSpectrum) -> f64 {
    f.entries.values().map(Coefficient::abs).fold(0.0, f64::max)
}

pub fn min_nonzero_coeff(f: &SparseSpectrum) -> Result<f64> {
    f.entries
        .values()
        .map(Coefficient::abs)
        .reduce(f64::min)
        .ok_or(Error::EmptySupport)
}

pub fn support_size(f: &SparseSpectrum) -> usize {
    f.len()
}

fn residue(n: &Frequency, m: u64) -> usize {
    n.mod_floor(&BigInt::from(m)).to_usize().expect("residue below modulus")
}

/// Values `f(2 pi j / m)` for `j = 0..m`. Exact samples at every grid point;
/// they determine `f` when `m > 2 * max|n|`.
pub fn eval_on_grid(f: &SparseSpectrum, m: usize) -> Result<Vec<Complex64>> {
    if m == 0 {
        return Err(Error::Invalid("grid size must be positive".into()));
    }
    if m as u64 > MAX_GRID {
        return Err(Error::GridTooLarge { points: BigInt::from(m) });
    }
    let mut buckets = vec![Complex64::zero(); m];
    for (n, c) in &f.entries {
        buckets[residue(n, m as u64)] += c.value;
    }
    fft::dft(&mut buckets, 1.0);
    Ok(buckets)
}

/// Evaluates at `t = 2 pi j / m` with the phase reduced exactly, so huge
/// frequencies cost nothing in accuracy.
pub fn eval_at_grid_point(f: &SparseSpectrum, j: u64, m: u64) -> Complex64 {
    let big_j = BigInt::from(j);
    f.entries
        .iter()
        .map(|(n, c)| c.value * unit_phase(&(n * &big_j), m))
        .sum()
}

/// `exp(2 pi i k / m)` with `k` reduced modulo `m` first.
pub fn unit_phase(k: &BigInt, m: u64) -> Complex64 {
    let r = residue(k, m) as f64 / m as f64;
    let angle = 2.0 * PI * r;
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// Trapezoid estimate of the L1 norm with its Bernstein error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Estimate {
    pub value: f64,
    pub error_bound: f64,
    pub grid_size: usize,
    pub grid_max: f64,
}

/// `||f||_1` by trapezoid quadrature on `oversample * (2 max|n| + 1)` points.
///
/// The bound is `(pi * deg / M) * max_grid |f|`, from `||f'||_inf <= deg ||f||_inf`.
pub fn l1_norm(f: &SparseSpectrum, oversample: usize) -> Result<L1Estimate> {
    if oversample < 2 {
        return Err(Error::Invalid("oversample must be at least 2".into()));
    }
    if f.is_empty() {
        return Ok(L1Estimate { value: 0.0, error_bound: 0.0, grid_size: 0, grid_max: 0.0 });
    }
    let deg = f.max_abs_freq();
    let points = (&deg * 2u32 + 1u32) * BigInt::from(oversample);
    let m = match points.to_u64() {
        Some(m) if m <= MAX_GRID => m as usize,
        _ => return Err(Error::GridTooLarge { points }),
    };
    l1_norm_on_grid(f, m)
}

/// [`l1_norm`] on an explicit grid of `m > 2 max|n|` points.
pub fn l1_norm_on_grid(f: &SparseSpectrum, m: usize) -> Result<L1Estimate> {
    if f.is_empty() {
        return Ok(L1Estimate { value: 0.0, error_bound: 0.0, grid_size: m, grid_max: 0.0 });
    }
    let deg = f.max_abs_freq();
    if BigInt::from(m) <= &deg * 2u32 {
        return Err(Error::Invalid(alloc::format!("grid of {m} points does not resolve degree {deg}")));
    }
    let values = eval_on_grid(f, m)?;
    let mut sum = 0.0;
    let mut grid_max: f64 = 0.0;
    for v in &values {
        let a = v.norm();
        sum += a;
        grid_max = grid_max.max(a);
    }
    let deg = deg.to_f64().unwrap_or(f64::INFINITY);
    Ok(L1Estimate {
        value: sum / m as f64,
        error_bound: PI * deg / m as f64 * grid_max,
        grid_size: m,
        grid_max,
    })
}
