//! Lattice sums needed by the singular-kernel quadrature.

use statrs::function::gamma::{gamma, gamma_ur};
use std::f64::consts::PI;

/// Upper incomplete gamma function `Gamma(a, x)` for `x > 0` and `a > -1`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    assert!(x > 0.0, "upper incomplete gamma needs x > 0");
    if a > 0.0 {
        gamma_ur(a, x) * gamma(a)
    } else if a == 0.0 {
        exp_integral_e1(x)
    } else {
        // Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a
        (upper_incomplete_gamma(a + 1.0, x) - x.powf(a) * (-x).exp()) / a
    }
}

/// Exponential integral `E_1(x)` for `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum -= term / k as f64;
        }
        -0.577_215_664_901_532_9 - x.ln() + sum
    } else {
        // continued fraction (modified Lentz)
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Multiplicities of `|m|^2 = k` over nonzero `m` in `Z^dim`, for `k <= kmax`.
fn shell_counts(dim: usize, kmax: usize) -> Vec<u64> {
    let r = (kmax as f64).sqrt() as i64;
    let mut counts = vec![0u64; kmax + 1];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u64; kmax + 1];
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for m in -r..=r {
                let kk = k + (m * m) as usize;
                if kk <= kmax {
                    next[kk] += c;
                }
            }
        }
        counts = next;
    }
    counts[0] = 0;
    counts
}

/// Analytically continued Epstein zeta `Z(s) = sum' |m|^{-2s}` of the unit
/// cubic lattice in `dim` dimensions.
///
/// Evaluated with the theta-function split at unit scale, which converges
/// like `exp(-pi k)` and is valid for every `s` except the pole `s = dim/2`.
pub fn epstein_zeta(dim: usize, s: f64) -> f64 {
    let half = dim as f64 / 2.0;
    assert!((s - half).abs() > 1e-12, "Epstein zeta has a pole at s = N/2");
    if s.abs() < 1e-14 {
        return -1.0;
    }
    let inv_gamma_s = if s < 0.0 && s.fract() == 0.0 {
        return 0.0;
    } else {
        1.0 / gamma(s)
    };
    let counts = shell_counts(dim, 40);
    let mut sum = 0.0;
    for (k, &c) in counts.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let x = PI * k as f64;
        sum += c as f64
            * (upper_incomplete_gamma(s, x) / x.powf(s)
                + upper_incomplete_gamma(half - s, x) / x.powf(half - s));
    }
    PI.powf(s) * inv_gamma_s * (sum + 1.0 / (s - half) - 1.0 / s)
}
