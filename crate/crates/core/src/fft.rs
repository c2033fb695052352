//! Discrete Fourier transforms used for grid evaluation.
//!
//! Radix-2 for power-of-two lengths, Bluestein's chirp-z reduction otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

fn twiddle(num: u128, den: u128, sign: f64) -> Complex64 {
    // reduce before converting so large indices keep full precision
    let r = (num % den) as f64 / den as f64;
    let angle = sign * 2.0 * PI * r;
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

fn fft_pow2(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            data.swap(i, j);
        }
    }
    let roots: Vec<Complex64> = (0..n / 2)
        .map(|k| twiddle(k as u128, n as u128, sign))
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = roots[k * step];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Computes `out[j] = sum_k data[k] * exp(sign * 2 pi i k j / n)` in place.
pub(crate) fn dft(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        fft_pow2(data, sign);
        return;
    }
    let size = (2 * n - 1).next_power_of_two();
    let two_n = 2 * n as u128;
    // chirp c_k = exp(sign * pi i k^2 / n)
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k = k as u128;
            twiddle(k * k % two_n, two_n, sign)
        })
        .collect();
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for k in 0..n {
        a[k] = data[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[size - k] = chirp[k].conj();
    }
    fft_pow2(&mut a, -1.0);
    fft_pow2(&mut b, -1.0);
    for (x, y) in a.iter_mut().zip(b.iter()) {
        *x *= *y;
    }
    fft_pow2(&mut a, 1.0);
    let scale = 1.0 / size as f64;
    for k in 0..n {
        data[k] = a[k] * scale * chirp[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = data.len() as u128;
        (0..n)
            .map(|j| {
                data.iter()
                    .enumerate()
                    .map(|(k, c)| c * twiddle(k as u128 * j, n, sign))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        for n in [1usize, 2, 3, 5, 8, 12, 17, 64, 100] {
            let data: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(k as f64 * 0.3 - 1.0, (k * k) as f64 * 0.01))
                .collect();
            for sign in [1.0, -1.0] {
                let mut fast = data.clone();
                dft(&mut fast, sign);
                let slow = naive(&data, sign);
                for (x, y) in fast.iter().zip(slow.iter()) {
                    assert!((x - y).norm() < 1e-9, "n={n} {x} vs {y}");
                }
            }
        }
    }
}
