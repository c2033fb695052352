//! Quantitative lemmas and planar set constructions.
//!
//! Scales here collapse faster than any float can follow, so tiny positive
//! numbers are carried as their negated base-2 logarithm, itself a
//! [`Bracket`] of level-index numbers. Every inequality the construction
//! relies on is checked on the brackets, never on rounded midpoints.
//!
//! Indexing of the binary scaling: `s(n + 1)` is the product of `eps[i]`
//! over the set bits `i` of `n`, so `eps[0]` is the first factor and
//! `s(1) = 1`, `s(2) = eps[0]`, `s(2^l + 1) = eps[l]`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, LN_2, LOG2_E};
use core::ops::Mul;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::tower::{Bracket, Tower};
use crate::trigcore::{l1_norm, SparseSpectrum};

fn lg(x: f64) -> f64 {
    libm::log2(x)
}

/// Constants left free by the lemmas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// Littlewood constant in `||f||_1 >= L ln #f`.
    pub littlewood: f64,
    /// Interpolation growth constant.
    pub alpha: f64,
    pub lambda: f64,
    /// Always `4 / littlewood`.
    pub c: f64,
}

impl Constants {
    pub fn new(littlewood: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let consts = Constants { littlewood, alpha, lambda, c: 4.0 / littlewood };
        consts.validate()?;
        Ok(consts)
    }

    /// `alpha = 2`, `lambda = e`.
    pub fn with_littlewood(littlewood: f64) -> Result<Self> {
        Constants::new(littlewood, 2.0, E)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.littlewood) || !finite_pos(self.lambda) {
            return Err(Error::Invalid("constants must be finite and positive".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::Invalid(format!("alpha = {} must exceed 1", self.alpha)));
        }
        if (self.c - 4.0 / self.littlewood).abs() > 1e-12 * self.c.abs() {
            return Err(Error::Invalid(format!("c = {} differs from 4/L", self.c)));
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} = {v} must be finite and positive")))
    }
}

/// `ε(K, a)` in log form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonValue {
    /// `-log2 ε` from `a L ln d / (4 α^{2d})`.
    pub neglog2: Bracket,
    /// `-log2 ε` from `K exp(-2 ln α exp(4K / (aL)))`.
    pub neglog2_second_form: Bracket,
    pub log2_d: Bracket,
}

impl EpsilonValue {
    /// Plain float value when it is representable (it underflows quickly).
    pub fn to_f64(&self) -> Option<f64> {
        self.neglog2.hi.to_f64().map(|y| libm::exp2(-y))
    }
}

/// `log2 d` and `2 d log2 α` for `d = exp(4K / (aL))`, `a = 2^{-neglog2_a}`.
fn d_terms(k: f64, neglog2_a: &Bracket, consts: &Constants) -> Result<(Bracket, Bracket)> {
    let u = neglog2_a.add_f64(lg(4.0 * k / consts.littlewood))?;
    let log2_d = u.add_f64(lg(LOG2_E))?.exp2()?;
    let two_d_log2_alpha = log2_d.add_f64(1.0 + lg(lg(consts.alpha)))?.exp2()?;
    Ok((log2_d, two_d_log2_alpha))
}

/// `-log2 ε(K, a)` for `a = 2^{-neglog2_a}`.
pub fn neglog2_epsilon(k: f64, neglog2_a: &Bracket, consts: &Constants) -> Result<EpsilonValue> {
    positive("K", k)?;
    let (log2_d, main) = d_terms(k, neglog2_a, consts)?;
    // a L ln d: evaluated directly while a is a float, and equal to 4K by the choice of d otherwise
    let log2_numerator = match neglog2_a.hi.to_f64().filter(|y| y.abs() < 1000.0) {
        Some(y) => {
            let a = libm::exp2(-y);
            let ln_d = 4.0 * k / (a * consts.littlewood);
            lg(a * consts.littlewood * ln_d)
        }
        None => lg(4.0 * k),
    };
    Ok(EpsilonValue {
        neglog2: main.add_f64(2.0 - log2_numerator)?,
        neglog2_second_form: main.add_f64(-lg(k))?,
        log2_d,
    })
}

pub fn epsilon_from_lemma(k: f64, a: f64, consts: &Constants) -> Result<EpsilonValue> {
    positive("a", a)?;
    consts.validate()?;
    neglog2_epsilon(k, &Bracket::from_f64(-lg(a))?, consts)
}

/// `-log2 δ(ε, a, K)`: half the right-hand side of the lemma's sufficient bound.
pub fn neglog2_delta(eps_target: f64, neglog2_a: &Bracket, k: f64, consts: &Constants) -> Result<Bracket> {
    positive("epsTarget", eps_target)?;
    positive("K", k)?;
    if consts.lambda <= eps_target {
        return Err(Error::Invalid(format!(
            "lambda = {} must exceed epsTarget = {eps_target}",
            consts.lambda
        )));
    }
    let log_ratio = libm::log(consts.lambda / eps_target);
    // exp(-ln(λ/ε) exp(cK/a)) = 2^{-exp2(log2(log2e ln(λ/ε)) + exp2(neglog2_a + log2(cK) + log2 log2 e))}
    let exponent = neglog2_a
        .add_f64(lg(consts.c * k) + lg(LOG2_E))?
        .exp2()?
        .add_f64(lg(LOG2_E * log_ratio))?
        .exp2()?;
    let prefactor = lg(eps_target / (1.0 + eps_target)) + lg(k) - 1.0;
    exponent.add_f64(-prefactor)
}

pub fn delta_from_lemma(eps_target: f64, a: f64, k: f64, consts: &Constants) -> Result<Bracket> {
    positive("a", a)?;
    consts.validate()?;
    neglog2_delta(eps_target, &Bracket::from_f64(-lg(a))?, k, consts)
}

/// One evaluation of `ψ` at `x = 2^{-neglog2_x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiValue {
    pub from_epsilon: Bracket,
    /// `-log2 (δ(1, x, K) / b)`.
    pub from_delta: Bracket,
    pub psi: Bracket,
}

/// `ψ(x) = min(ε(b, x), δ(1, x, K) / b)`, all in `-log2` form.
pub fn psi_at(neglog2_x: &Bracket, b: f64, k: f64, consts: &Constants) -> Result<PsiValue> {
    let from_epsilon = neglog2_epsilon(b, neglog2_x, consts)?.neglog2;
    let from_delta = neglog2_delta(1.0, neglog2_x, k, consts)?.add_f64(lg(b))?;
    Ok(PsiValue { from_epsilon, from_delta, psi: from_epsilon.max(&from_delta) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiRow {
    pub neglog2_x: f64,
    pub value: PsiValue,
}

/// `ψ_1, ..., ψ_depth` on the grid `x = a 2^{-g}`, `g = 0..=PSI_GRID`.
///
/// The per-level functions coincide: each one takes `ε(b, ·)` for its first
/// argument, which does not depend on the level.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiTable {
    pub depth: usize,
    pub rows: Vec<PsiRow>,
}

pub const PSI_GRID: u32 = 32;

impl PsiTable {
    /// Lower and upper ends of `-log2 ψ` never decrease as `x` shrinks.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].value.psi.lo <= w[1].value.psi.lo && w[0].value.psi.hi <= w[1].value.psi.hi)
    }
}

pub fn psi_sequence(a: f64, b: f64, k: f64, consts: &Constants, depth: usize) -> Result<PsiTable> {
    positive("a", a)?;
    positive("K", k)?;
    if b <= a {
        return Err(Error::Invalid(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    consts.validate()?;
    let rows = (0..=PSI_GRID)
        .map(|g| {
            let neglog2_x = f64::from(g) - lg(a);
            Ok(PsiRow { neglog2_x, value: psi_at(&Bracket::from_f64(neglog2_x)?, b, k, consts)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PsiTable { depth, rows })
}

fn bit_length(n: u64) -> usize {
    (u64::BITS - n.leading_zeros()) as usize
}

/// `s(n + 1)`: product of `eps[i]` over the set bits `i` of `n`.
pub fn s_from_binary<T: Clone + One + Mul<Output = T>>(n: u64, eps: &[T]) -> Result<T> {
    let needed = bit_length(n);
    if eps.len() < needed {
        return Err(Error::TooShort { needed, available: eps.len() });
    }
    Ok((0..needed).filter(|i| n >> i & 1 == 1).fold(T::one(), |acc, i| acc * eps[i].clone()))
}

fn sum_bits(mask: u64, neglog2_eps: &[Tower]) -> Result<Bracket> {
    let needed = bit_length(mask);
    if neglog2_eps.len() < needed {
        return Err(Error::TooShort { needed, available: neglog2_eps.len() });
    }
    let mut acc = Bracket::exact(Tower::ZERO);
    for i in (0..needed).filter(|i| mask >> i & 1 == 1) {
        acc = acc.add(&Bracket::exact(neglog2_eps[i]))?;
    }
    Ok(acc)
}

/// `-log2 s(j)` for the 1-based index `j`.
pub fn s_neglog2(j: u64, neglog2_eps: &[Tower]) -> Result<Bracket> {
    if j == 0 {
        return Err(Error::Invalid("s is indexed from 1".into()));
    }
    sum_bits(j - 1, neglog2_eps)
}

/// `-log2 (s(j) / s(i))`, summing only the bits where the indices differ.
pub fn s_ratio_neglog2(j: u64, i: u64, neglog2_eps: &[Tower]) -> Result<Bracket> {
    let (x, y) = (j - 1, i - 1);
    sum_bits(x & !y, neglog2_eps)?.sub(&sum_bits(y & !x, neglog2_eps)?)
}

/// An open ring `inner < |z| < outer`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ring {
    pub inner: f64,
    pub outer: f64,
}

/// A ring described by `-log2` of its radii.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRing {
    pub neglog2_inner: f64,
    pub neglog2_outer: f64,
}

/// Annuli `L(w_k, t_k)`, `k = 1, 2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnnulusSeq {
    /// `t_k = 2^{-k}`, `w_k = t_k exp(-k^2 t_k^{-2})`, so `t_k sqrt(ln(t_k/w_k)) = k`.
    Gaussian,
    /// A finite prefix given by its radii.
    Explicit(Vec<Ring>),
}

impl AnnulusSeq {
    pub fn len(&self) -> Option<usize> {
        match self {
            AnnulusSeq::Gaussian => None,
            AnnulusSeq::Explicit(rings) => Some(rings.len()),
        }
    }

    /// `-log2 t_k` for a (possibly huge) index.
    pub fn neglog2_outer(&self, k: &Bracket) -> Result<Bracket> {
        match self {
            AnnulusSeq::Gaussian => Ok(*k),
            AnnulusSeq::Explicit(_) => Err(Error::Invalid("explicit annuli cannot be indexed symbolically".into())),
        }
    }

    /// `-log2 w_k = k + log2(e) k^2 4^k`.
    pub fn neglog2_inner(&self, k: &Bracket) -> Result<Bracket> {
        self.neglog2_outer(k)?;
        let quad = k.log2()?.add(&k.log2()?)?.add(k)?.add(k)?.add_f64(lg(LOG2_E))?.exp2()?;
        k.add(&quad)
    }

    /// The first `len` rings in log form.
    pub fn log_prefix(&self, len: usize) -> Vec<LogRing> {
        match self {
            AnnulusSeq::Gaussian => (1..=len)
                .map(|k| {
                    let k = k as f64;
                    LogRing { neglog2_inner: k + LOG2_E * k * k * libm::exp2(2.0 * k), neglog2_outer: k }
                })
                .collect(),
            AnnulusSeq::Explicit(rings) => rings
                .iter()
                .take(len)
                .map(|r| LogRing { neglog2_inner: -lg(r.inner), neglog2_outer: -lg(r.outer) })
                .collect(),
        }
    }

    /// The first `len` rings as floats; an inner radius below the float range becomes 0.
    pub fn rings(&self, len: usize) -> Vec<Ring> {
        match self {
            AnnulusSeq::Explicit(rings) => rings.iter().take(len).copied().collect(),
            AnnulusSeq::Gaussian => self
                .log_prefix(len)
                .iter()
                .map(|r| Ring { inner: libm::exp2(-r.neglog2_inner), outer: libm::exp2(-r.neglog2_outer) })
                .collect(),
        }
    }

    /// Checks `0 < w_k < t_k`, `t_k` strictly decreasing and
    /// `t_k sqrt(ln(t_k / w_k))` strictly increasing on the first `len` rings.
    pub fn check_invariants(&self, len: usize) -> Result<()> {
        let prefix = self.log_prefix(len);
        let mut prev: Option<(f64, f64)> = None;
        for (idx, ring) in prefix.iter().enumerate() {
            let (w, t) = (ring.neglog2_inner, ring.neglog2_outer);
            if !(w.is_finite() && t.is_finite() && w > t) {
                return Err(Error::Invalid(format!("annulus {}: need 0 < w < t", idx + 1)));
            }
            let growth = -t + 0.5 * lg((w - t) * LN_2);
            if let Some((pt, pg)) = prev {
                if t <= pt {
                    return Err(Error::Invalid(format!("annulus {}: t_k not decreasing", idx + 1)));
                }
                if growth <= pg {
                    return Err(Error::Invalid(format!(
                        "annulus {}: t_k sqrt(ln(t_k/w_k)) not increasing",
                        idx + 1
                    )));
                }
            }
            prev = Some((t, growth));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AvoidanceReport {
    /// `(frequency, ring index)` with the coefficient magnitude inside the open ring.
    pub violations: Vec<(BigInt, usize)>,
    /// Per ring, `#{n : |coeff(n)| > outer}`.
    pub above_outer: Vec<usize>,
}

impl AvoidanceReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn annuli_avoidance_check(spectrum: &SparseSpectrum, rings: &[Ring]) -> AvoidanceReport {
    let mut violations = Vec::new();
    let mut above_outer = vec![0; rings.len()];
    for (freq, c) in spectrum.iter() {
        let m = c.value.norm();
        for (idx, ring) in rings.iter().enumerate() {
            if m > ring.inner && m < ring.outer {
                violations.push((freq.clone(), idx));
            }
            if m > ring.outer {
                above_outer[idx] += 1;
            }
        }
    }
    AvoidanceReport { violations, above_outer }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SetUParams {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub consts: Constants,
    /// Number of components `s(j) A + B(0, r(j))`, `j = 1..=depth`.
    pub depth: usize,
}

/// One inductive step choosing `eps[n]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsStep {
    pub neglog2_eps: Tower,
    /// `-log2 ψ(a s(2^n))`.
    pub neglog2_psi: Bracket,
    /// `-log2 (w_{k_n} / 2)`.
    pub neglog2_half_inner: Bracket,
    pub below_psi: bool,
    pub below_half_inner: bool,
}

/// The annulus `L(w_{k_n}, t_{k_n})` selected at step `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecordedAnnulus {
    pub n: usize,
    /// `k_n`, an integer at least `1 - log2 s(2^n)`.
    pub index: Bracket,
    pub neglog2_outer: Bracket,
    pub neglog2_inner: Bracket,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// 1-based `j`.
    pub index: u64,
    pub neglog2_scale: Bracket,
    pub base: Vec<f64>,
    pub neglog2_radius: Tower,
    pub radius_rules: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetUChecks {
    pub eps_rules: bool,
    pub radius_rules: bool,
    pub scales_decreasing: bool,
    pub pairwise_disjoint: bool,
    pub annulus_avoiding: bool,
    /// Distances between components are at least `2^{-min_pair_gap}`.
    pub min_pair_gap: Option<Tower>,
    /// Distances from components to recorded annuli are at least `2^{-min_annulus_gap}`.
    pub min_annulus_gap: Option<Tower>,
}

impl SetUChecks {
    pub fn all_pass(&self) -> bool {
        self.eps_rules && self.radius_rules && self.scales_decreasing && self.pairwise_disjoint && self.annulus_avoiding
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetUSpec {
    pub params: SetUParams,
    pub annuli: AnnulusSeq,
    pub eps: Vec<EpsStep>,
    pub recorded: Vec<RecordedAnnulus>,
    pub components: Vec<Component>,
    /// `-log2 s(depth + 1)`: everything not built lies within `5/4` of this scale.
    pub neglog2_next_scale: Bracket,
    pub checks: SetUChecks,
}

impl SetUSpec {
    pub fn neglog2_eps(&self) -> Vec<Tower> {
        self.eps.iter().map(|e| e.neglog2_eps).collect()
    }
}

fn at_stage<T>(stage: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Precision { stage: inner, log2_hint } => Error::Precision { stage: format!("{stage}: {inner}"), log2_hint },
        other => other,
    })
}

/// `-log2` of a lower bound for `2^{-base} (1 - sum 2^{-offsets})`, when positive.
fn gap_neglog2(base: &Bracket, offsets: &[Bracket]) -> Option<Tower> {
    let mut sum = 0.0;
    for off in offsets {
        sum += match off.lo.to_f64() {
            Some(v) if v <= 0.0 => return None,
            Some(v) => libm::exp2(-v) * (1.0 + 1e-12),
            None => f64::MIN_POSITIVE,
        };
    }
    let factor = (1.0 - sum) * (1.0 - 1e-12);
    if factor <= 0.0 {
        return None;
    }
    base.add_f64(-lg(factor)).ok().map(|b| b.hi)
}

fn worst(acc: Option<Tower>, gap: Tower) -> Option<Tower> {
    Some(match acc {
        Some(prev) if prev >= gap => prev,
        _ => gap,
    })
}

/// Builds the first `depth` components of `U = ⋃ s(j) {-1, 1} + B(0, r(j))`.
pub fn build_set_u(annuli: &AnnulusSeq, params: &SetUParams) -> Result<SetUSpec> {
    let SetUParams { a, b, k, consts, depth } = *params;
    consts.validate()?;
    positive("K", k)?;
    if !(a > 0.0 && a < 1.0) || !(b > 2.0 && b.is_finite()) {
        return Err(Error::Invalid(format!("need 0 < a < 1 and b > 2, got a = {a}, b = {b}")));
    }
    if annuli.len().is_some() {
        return Err(Error::Invalid("the construction needs an annulus family indexed by every k".into()));
    }
    annuli.check_invariants(8)?;

    let steps = bit_length(depth as u64);
    let mut eps: Vec<EpsStep> = Vec::with_capacity(steps);
    let mut recorded = Vec::with_capacity(steps + 1);
    let mut prod = Bracket::exact(Tower::ZERO);
    for n in 0..=steps {
        let stage = format!("component {}", 1u64 << n);
        let index = at_stage(&stage, annulus_index(&prod))?;
        let outer = at_stage(&stage, annuli.neglog2_outer(&index))?;
        let inner = at_stage(&stage, annuli.neglog2_inner(&index))?;
        recorded.push(RecordedAnnulus { n, index, neglog2_outer: outer, neglog2_inner: inner });
        if n == steps {
            break;
        }
        let x = at_stage(&stage, prod.add_f64(-lg(a)))?;
        let psi = at_stage(&stage, psi_at(&x, b, k, &consts))?.psi;
        let half_inner = at_stage(&stage, inner.add_f64(1.0))?;
        let chosen = psi.max(&half_inner).hi.inflate();
        let exact = Bracket::exact(chosen);
        eps.push(EpsStep {
            neglog2_eps: chosen,
            neglog2_psi: psi,
            neglog2_half_inner: half_inner,
            below_psi: psi.certainly_below(&exact),
            below_half_inner: half_inner.certainly_below(&exact),
        });
        prod = at_stage(&stage, prod.add(&exact))?;
    }
    let eps_towers: Vec<Tower> = eps.iter().map(|e| e.neglog2_eps).collect();

    let mut components = Vec::with_capacity(depth);
    for j in 1..=depth as u64 {
        let stage = format!("component {j}");
        let scale = at_stage(&stage, s_neglog2(j, &eps_towers))?;
        let mut bounds = vec![at_stage(&stage, scale.add_f64(2.0))?];
        if j.is_power_of_two() {
            let m = j.trailing_zeros() as usize;
            // r(2^{n-1}) < t_{k_n} with n = m + 1, and r(2^n) < w_{k_n} / 2 with n = m
            bounds.push(at_stage(&stage, recorded[m + 1].neglog2_outer.add_f64(1.0))?);
            bounds.push(at_stage(&stage, recorded[m].neglog2_inner.add_f64(2.0))?);
        }
        let top = bounds.iter().skip(1).fold(bounds[0], |acc, x| acc.max(x));
        let radius = top.hi.inflate();
        let radius_rules = bounds.iter().all(|x| x.certainly_below(&Bracket::exact(radius)));
        components.push(Component {
            index: j,
            neglog2_scale: scale,
            base: vec![-1.0, 1.0],
            neglog2_radius: radius,
            radius_rules,
        });
    }
    let neglog2_next_scale = at_stage("next scale", s_neglog2(depth as u64 + 1, &eps_towers))?;

    let checks = verify_components(&components, &recorded, &eps_towers, &eps);
    Ok(SetUSpec { params: *params, annuli: annuli.clone(), eps, recorded, components, neglog2_next_scale, checks })
}

/// An integer `k >= y + 1` for `y` the upper end of `-log2 s`, so `t_k <= s / 2`;
/// it is `ceil(y) + 1` while `y` is a float.
fn annulus_index(neglog2_s: &Bracket) -> Result<Bracket> {
    let y = neglog2_s.hi;
    match y.to_f64() {
        Some(v) if v.abs() < 4.0e15 => Bracket::from_f64(libm::ceil(v) + 1.0),
        // every float this large is an integer; step past v + 1 with room to spare
        Some(v) => Bracket::from_f64(libm::ceil(v * (1.0 + 4.0 * f64::EPSILON)) + 4.0),
        // past float integers "+1" is invisible, so step well beyond y: k is some integer in [K, K + 1]
        None => {
            let k = y.inflate();
            Ok(Bracket { lo: k, hi: Bracket::exact(k).add_f64(1.0)?.hi })
        }
    }
}

fn verify_components(
    components: &[Component],
    recorded: &[RecordedAnnulus],
    eps_towers: &[Tower],
    eps: &[EpsStep],
) -> SetUChecks {
    let eps_rules = eps.iter().all(|e| e.below_psi && e.below_half_inner);
    let radius_rules = components.iter().all(|c| c.radius_rules);

    let mut scales_decreasing = true;
    let mut pairwise_disjoint = true;
    let mut min_pair_gap = None;
    for (idx, ci) in components.iter().enumerate() {
        let ri = Bracket::exact(ci.neglog2_radius);
        let own = ri.sub(&ci.neglog2_scale);
        // the two balls of one component: 2 s - 2 r
        match own.as_ref().ok().and_then(|off| gap_neglog2(&ci.neglog2_scale.add_f64(-1.0).ok()?, &[*off])) {
            Some(g) => min_pair_gap = worst(min_pair_gap, g),
            None => pairwise_disjoint = false,
        }
        for cj in &components[idx + 1..] {
            let rj = Bracket::exact(cj.neglog2_radius);
            let gap = (|| {
                let ratio = s_ratio_neglog2(cj.index, ci.index, eps_towers).ok()?;
                if ratio.lo <= Tower::ZERO {
                    return None;
                }
                let rj_off = rj.sub(&cj.neglog2_scale).ok()?.add(&ratio).ok()?;
                // nearest points of same-sign balls: s_i - r_i - s_j - r_j
                gap_neglog2(&ci.neglog2_scale, &[*own.as_ref().ok()?, ratio, rj_off])
            })();
            match gap {
                Some(g) => min_pair_gap = worst(min_pair_gap, g),
                None => {
                    pairwise_disjoint = false;
                    if cj.index == ci.index + 1 {
                        scales_decreasing = false;
                    }
                }
            }
        }
        if let Some(next) = components.get(idx + 1) {
            let ok = s_ratio_neglog2(next.index, ci.index, eps_towers).map(|r| r.lo > Tower::ZERO);
            scales_decreasing &= ok.unwrap_or(false);
        }
    }

    let mut annulus_avoiding = true;
    let mut min_annulus_gap = None;
    for comp in components {
        let s = comp.neglog2_scale;
        let r = Bracket::exact(comp.neglog2_radius);
        for ring in recorded {
            let (w, t) = (ring.neglog2_inner, ring.neglog2_outer);
            let gap = if s.certainly_below(&t) {
                // component outside the ring: s - r - t
                (|| gap_neglog2(&s, &[r.sub(&s).ok()?, t.sub(&s).ok()?]))()
            } else if w.certainly_below(&s) {
                // component inside the inner disc: w - s - r
                (|| gap_neglog2(&w, &[s.sub(&w).ok()?, r.sub(&w).ok()?]))()
            } else {
                None
            };
            match gap {
                Some(g) => min_annulus_gap = worst(min_annulus_gap, g),
                None => annulus_avoiding = false,
            }
        }
    }
    SetUChecks {
        eps_rules,
        radius_rules,
        scales_decreasing,
        pairwise_disjoint,
        annulus_avoiding,
        min_pair_gap,
        min_annulus_gap,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unknown {
    /// Unbuilt components may contain the point.
    BeyondDepth,
    /// Rounding cannot separate the point from a ball boundary.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Membership {
    In { component: u64, base: f64 },
    Out,
    Unknown(Unknown),
}

enum Side {
    In,
    Out,
    Unsure,
}

fn ball_side(z: Complex64, center_sign: f64, scale: &Bracket, neglog2_radius: Tower, neglog2_z: f64) -> Side {
    let zb = match Bracket::from_f64(neglog2_z + 2.0) {
        Ok(b) => b,
        Err(_) => return Side::Unsure,
    };
    if zb.certainly_below(scale) {
        // s <= |z| / 4 and r < s
        return Side::Out;
    }
    let (Some(s_lo_exp), Some(s_hi_exp)) = (scale.lo.to_f64(), scale.hi.to_f64()) else {
        return Side::Unsure;
    };
    if s_lo_exp.abs() > 1000.0 || s_hi_exp.abs() > 1000.0 {
        return Side::Unsure;
    }
    let r_hi = match neglog2_radius.to_f64() {
        Some(v) if v < 1070.0 => libm::exp2(-v) * (1.0 + 1e-12),
        Some(_) | None => f64::MIN_POSITIVE,
    };
    let r_lo = match neglog2_radius.to_f64() {
        Some(v) if v < 1070.0 => libm::exp2(-v) * (1.0 - 1e-12),
        _ => 0.0,
    };
    let exact_center = scale.lo == scale.hi && s_lo_exp == libm::round(s_lo_exp);
    if exact_center {
        let s = libm::exp2(-s_lo_exp) * center_sign;
        if z.re == s && z.im == 0.0 {
            return if r_lo > 0.0 || neglog2_radius.level > 0 || r_hi > 0.0 { Side::In } else { Side::Unsure };
        }
    }
    let s_lo = libm::exp2(-s_hi_exp) * (1.0 - 1e-12);
    let s_hi = libm::exp2(-s_lo_exp) * (1.0 + 1e-12);
    let x = z.re * center_sign;
    let near = if x < s_lo {
        s_lo - x
    } else if x > s_hi {
        x - s_hi
    } else {
        0.0
    };
    let far = (x - s_lo).abs().max((x - s_hi).abs());
    let pad = 4.0 * f64::EPSILON * (z.norm() + s_hi);
    let dmin = libm::hypot(near, z.im) - pad;
    let dmax = libm::hypot(far, z.im) + pad;
    if dmax < r_lo {
        Side::In
    } else if dmin > r_hi {
        Side::Out
    } else {
        Side::Unsure
    }
}

/// Decides `z ∈ U` against the built components.
pub fn membership_u(z: Complex64, spec: &SetUSpec) -> Membership {
    let modulus = z.norm();
    if modulus == 0.0 || !modulus.is_finite() {
        return Membership::Unknown(Unknown::BeyondDepth);
    }
    let neglog2_z = -lg(modulus);
    let mut unsure = false;
    for comp in &spec.components {
        for &base in &comp.base {
            match ball_side(z, base, &comp.neglog2_scale, comp.neglog2_radius, neglog2_z) {
                Side::In => return Membership::In { component: comp.index, base },
                Side::Out => {}
                Side::Unsure => unsure = true,
            }
        }
    }
    if unsure {
        return Membership::Unknown(Unknown::Boundary);
    }
    // unbuilt points satisfy |w| <= (5/4) s(depth + 1)
    match Bracket::from_f64(neglog2_z + lg(1.25)) {
        Ok(zb) if zb.certainly_below(&spec.neglog2_next_scale) => Membership::Out,
        _ => Membership::Unknown(Unknown::BeyondDepth),
    }
}

/// `(s(j) / s(n 2^m + 1)) A_j` with the scale kept as exponents of `eps[0], eps[1], ...`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub scale: Vec<i32>,
    /// `j`, naming the base set `A_j`.
    pub base: u64,
}

fn exponents(n: u64) -> Vec<i32> {
    (0..bit_length(n)).map(|i| (n >> i & 1) as i32).collect()
}

fn trim(mut v: Vec<i32>) -> Vec<i32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn combine(x: &[i32], y: &[i32], sign: i32) -> Vec<i32> {
    let len = x.len().max(y.len());
    trim((0..len).map(|i| x.get(i).copied().unwrap_or(0) + sign * y.get(i).copied().unwrap_or(0)).collect())
}

/// `B_{m,n} = ⋃_{j = n 2^m + 1}^{(n+1) 2^m} (s(j) / s(n 2^m + 1)) A_j`.
pub fn b_set(m: u32, n: u64) -> Result<BTreeSet<Atom>> {
    let width = 1u64.checked_shl(m).ok_or_else(|| Error::Invalid(format!("m = {m} too large")))?;
    let first = n.checked_mul(width).ok_or_else(|| Error::Invalid("index overflow".into()))?;
    let norm = exponents(first);
    Ok((first..first + width)
        .map(|idx| Atom { scale: combine(&exponents(idx), &norm, -1), base: idx + 1 })
        .collect())
}

/// The right-hand side of the halving recursion:
/// `B_{m-1,2n} ∪ (s((2n+1) 2^{m-1} + 1) / s(n 2^m + 1)) B_{m-1,2n+1}`.
pub fn b_set_recursion(m: u32, n: u64) -> Result<BTreeSet<Atom>> {
    if m == 0 {
        return Err(Error::Invalid("the recursion starts at m = 1".into()));
    }
    let half = 1u64 << (m - 1);
    let factor = combine(&exponents((2 * n + 1) * half), &exponents(n << m), -1);
    let mut out = b_set(m - 1, 2 * n)?;
    for atom in b_set(m - 1, 2 * n + 1)? {
        out.insert(Atom { scale: combine(&atom.scale, &factor, 1), base: atom.base });
    }
    Ok(out)
}

/// Points of `B_{m,n}` for concrete base sets (`a_list[j - 1] = A_j`) and factors.
pub fn expand_b_set(atoms: &BTreeSet<Atom>, a_list: &[Vec<Complex64>], eps: &[f64]) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for atom in atoms {
        if eps.len() < atom.scale.len() {
            return Err(Error::TooShort { needed: atom.scale.len(), available: eps.len() });
        }
        let base = a_list
            .get(atom.base as usize - 1)
            .ok_or(Error::TooShort { needed: atom.base as usize, available: a_list.len() })?;
        let scale = atom.scale.iter().zip(eps).fold(1.0, |acc, (&e, &x)| acc * libm::pow(x, f64::from(e)));
        out.extend(base.iter().map(|z| z * scale));
    }
    Ok(out)
}

/// Bound on `#Q` for a measure with small coefficients off `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSetReport {
    pub r: f64,
    /// `{n : |coeff(n)| >= 1}`.
    pub q: Vec<BigInt>,
    /// Frequencies outside `Q` with `|coeff| > e^{-r}`.
    pub hypothesis_violations: Vec<BigInt>,
    pub l1: f64,
    pub l1_error: f64,
    pub norm_limit: f64,
    /// `||f||_1 < sqrt(r) / 4` holds even at the top of the error bar.
    pub norm_ok: bool,
    /// Natural log of the smallest admissible `N`.
    pub ln_bound_n: f64,
    /// That `N`, when it fits in `u64`.
    pub bound_n: Option<u64>,
    /// `#Q < N`.
    pub q_below_bound: bool,
}

impl QSetReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypothesis_violations.is_empty() && self.norm_ok
    }
}

fn bound_holds(n: f64, r: f64) -> bool {
    n > 4.0 && libm::log(n / 4.0) * libm::log(libm::log(n)) >= r * r
}

/// Smallest `N` with `r <= sqrt(ln(N/4) ln ln N)`, as `(ln N, N)`.
fn smallest_bound_n(r: f64) -> (f64, Option<u64>) {
    let g = |x: f64| (x - libm::log(4.0)) * libm::log(x) - r * r;
    let (mut lo, mut hi) = (libm::log(4.0), 2.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi > 43.0 {
        return (hi, None);
    }
    let mut n = libm::ceil(libm::exp(hi)).max(5.0);
    while n > 5.0 && bound_holds(n - 1.0, r) {
        n -= 1.0;
    }
    while !bound_holds(n, r) {
        n += 1.0;
    }
    (libm::log(n), Some(n as u64))
}

pub fn q_set_diagnostic(spectrum: &SparseSpectrum, r: f64, oversample: usize) -> Result<QSetReport> {
    if !(r.is_finite() && r >= 2.0) {
        return Err(Error::Invalid(format!("r = {r} must be at least 2")));
    }
    let cutoff = libm::exp(-r);
    let mut q = Vec::new();
    let mut hypothesis_violations = Vec::new();
    for (freq, c) in spectrum.iter() {
        let m = c.value.norm();
        if m >= 1.0 {
            q.push(freq.clone());
        } else if m > cutoff {
            hypothesis_violations.push(freq.clone());
        }
    }
    let est = l1_norm(spectrum, oversample)?;
    let norm_limit = libm::sqrt(r) / 4.0;
    let (ln_bound_n, bound_n) = smallest_bound_n(r);
    let q_below_bound = match bound_n {
        Some(n) => (q.len() as u64) < n,
        None => true,
    };
    Ok(QSetReport {
        r,
        q,
        hypothesis_violations,
        l1: est.value,
        l1_error: est.error_bound,
        norm_limit,
        norm_ok: est.value + est.error_bound < norm_limit,
        ln_bound_n,
        bound_n,
        q_below_bound,
    })
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Complex64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CantorApprox {
    /// Ball index used for each generator.
    pub chosen: Vec<usize>,
    pub generators: Vec<Complex64>,
    /// Subset sums; point `i` sums the generators at the set bits of `i`.
    pub points: Vec<Complex64>,
    pub pairs_checked: usize,
    pub all_inside: bool,
    /// Smallest `(r^2 - |d ∓ c|^2) / r^2` over nonzero differences, best ball each time,
    /// evaluated in exact rational arithmetic.
    pub worst_margin: f64,
}

/// Subset sums of generators `p_j` (ball centers) whose differences stay in `⋃ ±B_k`.
///
/// Each new generator is smaller than half of every remaining budget
/// `min(r_{k_j}, |p_j|) - sum_{i > j} |p_i|`, so the tail after any generator
/// stays inside that generator's ball however far the sequence is continued.
pub fn cantor_from_balls(balls: &[Ball], depth: usize) -> Result<CantorApprox> {
    if balls.is_empty() {
        return Err(Error::Invalid("empty ball list".into()));
    }
    if let Some(b) = balls.iter().find(|b| !(b.radius > 0.0 && b.radius.is_finite() && b.center.norm().is_finite())) {
        return Err(Error::Invalid(format!("bad ball {:?}", b)));
    }
    let mut chosen = Vec::with_capacity(depth);
    let mut generators: Vec<Complex64> = Vec::with_capacity(depth);
    let mut budgets: Vec<f64> = Vec::with_capacity(depth);
    let mut next = 0usize;
    for step in 0..depth {
        let limit = budgets.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
        let pick = (next..balls.len()).find(|&k| {
            let m = balls[k].center.norm();
            m > 0.0 && m < limit
        });
        let Some(k) = pick else {
            return Err(Error::NoThreading { index: step + 1 });
        };
        let p = balls[k].center;
        for b in budgets.iter_mut() {
            *b -= p.norm();
        }
        budgets.push(balls[k].radius.min(p.norm()));
        generators.push(p);
        chosen.push(k);
        next = k + 1;
    }

    let points: Vec<Complex64> = (0..1usize << depth)
        .map(|mask| (0..depth).filter(|i| mask >> i & 1 == 1).map(|i| generators[i]).sum())
        .collect();
    let exact_gen: Vec<(BigRational, BigRational)> = generators.iter().map(|p| (rational(p.re), rational(p.im))).collect();
    let mut pairs_checked = 0;
    let mut all_inside = true;
    let mut worst_margin = f64::INFINITY;
    for u in 0..points.len() {
        for v in 0..points.len() {
            if u == v {
                continue;
            }
            pairs_checked += 1;
            // the difference as a signed combination of generators, exactly
            let coeffs: Vec<i32> = (0..depth).map(|i| (u >> i & 1) as i32 - (v >> i & 1) as i32).collect();
            let approx: Complex64 = coeffs.iter().zip(&generators).map(|(&c, p)| p * f64::from(c)).sum();
            let mut re = BigRational::zero();
            let mut im = BigRational::zero();
            for (&c, (gr, gi)) in coeffs.iter().zip(&exact_gen) {
                let c = BigRational::from_integer(BigInt::from(c));
                re += &c * gr;
                im += &c * gi;
            }
            if re.is_zero() && im.is_zero() {
                continue;
            }
            let size = approx.norm();
            let best = balls
                .iter()
                .filter(|b| b.center.norm() <= 2.0 * size + b.radius && size <= 2.0 * b.center.norm() + b.radius)
                .flat_map(|b| [1.0, -1.0].map(|sgn| (b, sgn)))
                .map(|(b, sgn)| {
                    let dr = &re - rational(b.center.re * sgn);
                    let di = &im - rational(b.center.im * sgn);
                    let r = rational(b.radius);
                    let r2 = &r * &r;
                    let slack = (&r2 - (&dr * &dr + &di * &di)) / &r2;
                    slack.to_f64().unwrap_or(f64::NEG_INFINITY)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            worst_margin = worst_margin.min(best);
            if best <= 0.0 {
                all_inside = false;
            }
        }
    }
    Ok(CantorApprox { chosen, generators, points, pairs_checked, all_inside, worst_margin })
}
