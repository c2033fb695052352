//! Independent recomputations of derived values, frozen to literals.

use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use wpset_core::approx::{bpb_minimize, dirichlet, InterpolationProblem};
use wpset_core::rrs::{partial_product, w_l2_norm_sq, w_poly, RrsParams};
use wpset_core::trigcore::l1_norm;
use wpset_core::wpsets::{delta_from_lemma, epsilon_from_lemma, q_set_diagnostic, s_from_binary, Constants};

fn unit_constants() -> Constants {
    Constants::new(1.0, 2.0, core::f64::consts::E).unwrap()
}

#[test]
fn epsilon_at_unit_parameters() {
    // 2 d log2(2) with d = e^4
    let oracle = 2.0 * libm::exp(4.0);
    assert_eq!(oracle, 109.19630006628847);
    let got = epsilon_from_lemma(1.0, 1.0, &unit_constants()).unwrap().neglog2;
    assert!((got.hi.to_f64().unwrap() - oracle).abs() <= 1e-9 * oracle);
    assert!((got.lo.to_f64().unwrap() - oracle).abs() <= 1e-9 * oracle);
}

#[test]
fn delta_at_unit_parameters() {
    // -log2 of (1/2)(1/2) exp(-e^4)
    let oracle = 2.0 + core::f64::consts::LOG2_E * libm::exp(4.0);
    assert_eq!(oracle, 80.76848029452879);
    let got = delta_from_lemma(1.0, 1.0, 1.0, &unit_constants()).unwrap();
    assert!((got.hi.to_f64().unwrap() - oracle).abs() <= 1e-9 * oracle);
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn binary_scaling_ratios_in_rationals() {
    let eps: Vec<BigRational> = (0..12).map(|i| rat(1, 3 + 2 * i)).collect();
    for l in 1..=6u32 {
        for q in 0..=8u64 {
            let base = (q << l) as u64;
            let s0 = s_from_binary(base, &eps).unwrap();
            // s(2^l q + 2^{l-1} + 1) / s(2^l q + 1) = eps_l (the l-th factor)
            let s_mid = s_from_binary(base + (1 << (l - 1)), &eps).unwrap();
            assert_eq!(&s_mid / &s0, eps[l as usize - 1]);
            // s(2^l q + 2^{l-1}) / s(2^l q + 1) = eps_1 ... eps_{l-1}
            let s_end = s_from_binary(base + (1 << (l - 1)) - 1, &eps).unwrap();
            let prefix = eps[..l as usize - 1].iter().fold(BigRational::one(), |acc, e| acc * e);
            assert_eq!(&s_end / &s0, prefix);
        }
    }
}

#[test]
fn rudin_shapiro_levels_for_powers_of_eight() {
    let eps: Vec<f64> = (1..=3).map(|k| libm::pow(8.0, -(k as f64))).collect();
    let params = RrsParams::derive(&eps, 3);
    // 2 log2(8^k) - 5 = 6k - 5, so n_k = 6k - 4
    let oracle = vec![2u32, 8, 14];
    match params {
        Ok(p) => assert_eq!(p.n, oracle),
        Err(e) => {
            // the lower flatness bound fails for these eps; the levels come from from_levels
            let p = RrsParams::from_levels(eps, oracle.clone()).unwrap();
            assert_eq!(p.n, oracle, "{e}");
        }
    }
}

#[test]
fn w_norm_matches_coefficient_sum() {
    let params = RrsParams::from_levels(vec![0.1, 0.01, 0.001], vec![2, 6, 12]).unwrap();
    for k in 1..=3 {
        let direct = w_poly(k, &params).unwrap().l2_norm_sq();
        // 2^{n_k} coefficients of size eps_k on each side
        let e = params.eps[k - 1];
        let oracle = e * e * libm::ldexp(2.0, params.n[k - 1] as i32);
        assert!((direct - oracle).abs() <= 1e-12 * oracle);
        assert!((w_l2_norm_sq(k, &params) - oracle).abs() <= 1e-12 * oracle);
    }
}

#[test]
fn partial_product_norm_is_the_level_product() {
    let params = RrsParams::from_levels(vec![0.2, 0.05, 0.01], vec![1, 3, 6]).unwrap();
    for levels in 1..=3 {
        let f = partial_product(&params, levels).unwrap();
        let oracle: f64 = (0..levels)
            .map(|k| 1.0 + libm::ldexp(params.eps[k] * params.eps[k], params.n[k] as i32 + 1))
            .product();
        assert!((f.l2_norm_sq() - oracle).abs() <= 1e-12 * oracle);
    }
    let f = partial_product(&params, 3).unwrap();
    assert_eq!(f.l2_norm_sq() > 1.0, true);
}

/// `L_N = 1/(2N+1) + (2/pi) sum_{k=1}^{N} tan(pi k / (2N+1)) / k`.
fn lebesgue_constant(n: u64) -> f64 {
    let m = (2 * n + 1) as f64;
    1.0 / m + 2.0 / PI * (1..=n).map(|k| libm::tan(PI * k as f64 / m) / k as f64).sum::<f64>()
}

#[test]
fn dirichlet_norms_match_the_lebesgue_constants() {
    let frozen = [(256u64, 3.5185198589479643), (512, 3.7990465888969456), (1024, 4.079770803324303)];
    for (n, value) in frozen {
        let oracle = lebesgue_constant(n);
        assert!((oracle - value).abs() <= 1e-12);
        let est = l1_norm(&dirichlet(n), 64).unwrap();
        assert!((est.value - oracle).abs() <= est.error_bound.max(1e-9), "N = {n}: {} vs {oracle}", est.value);
    }
}

#[test]
fn two_point_interpolation_norm() {
    // |1 + e^{it}| has mean 4/pi
    let problem = InterpolationProblem::new(vec![BigInt::from(0), BigInt::from(1)], vec![BigInt::from(0), BigInt::from(1)]).unwrap();
    let res = bpb_minimize(&problem, 1.0, 200, 1e-12).unwrap();
    assert!((res.l1.value - 4.0 / PI).abs() <= 1e-3);
}

#[test]
fn graham_mcgehee_bound_by_scan() {
    for (r, frozen) in [(2.0, 66u64), (3.0, 536)] {
        let mut n = 5u64;
        while libm::log(n as f64 / 4.0) * libm::log(libm::log(n as f64)) < r * r {
            n += 1;
        }
        assert_eq!(n, frozen);
        let rep = q_set_diagnostic(&wpset_core::trigcore::SparseSpectrum::one(), r, 8).unwrap();
        assert_eq!(rep.bound_n, Some(frozen));
    }
}
