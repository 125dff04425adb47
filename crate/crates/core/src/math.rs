//! Special functions: regularized incomplete gamma and Poisson tail probabilities.

use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 1000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Lanczos coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + 7.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Returns `(P(s, x), Q(s, x))`, the regularized lower and upper incomplete gamma.
fn gamma_pq(s: f64, x: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(
            "regularized_gamma_p",
            format!("shape must be positive, got {s}"),
        );
    }
    if !(x >= 0.0) {
        return domain(
            "regularized_gamma_p",
            format!("x must be non-negative, got {x}"),
        );
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = -x + s * x.ln() - ln_gamma(s);
    if x < s + 1.0 {
        let mut ap = s;
        let mut term = 1.0 / s;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                let p = (sum.ln() + log_prefactor).exp().min(1.0);
                return Ok((p, 1.0 - p));
            }
        }
        Err(Error::Degenerate(format!(
            "gamma series did not converge for s={s}, x={x}"
        )))
    } else {
        // Modified Lentz evaluation of the continued fraction for Q.
        let mut b = x + 1.0 - s;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - s);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                let q = (h.ln() + log_prefactor).exp().min(1.0);
                return Ok((1.0 - q, q));
            }
        }
        Err(Error::Degenerate(format!(
            "gamma continued fraction did not converge for s={s}, x={x}"
        )))
    }
}

/// Regularized lower incomplete gamma `P(s, x)`: the CDF at `x` of a
/// unit-scale gamma variable with shape `s`.
pub fn regularized_gamma_p(s: f64, x: f64) -> Result<f64> {
    gamma_pq(s, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma `Q(s, x) = 1 - P(s, x)`, computed
/// without cancellation.
pub fn regularized_gamma_q(s: f64, x: f64) -> Result<f64> {
    gamma_pq(s, x).map(|(_, q)| q)
}

/// `P(X <= k)` for `X ~ Poisson(lambda)`.
pub fn poisson_cdf(k: i64, lambda: f64) -> Result<f64> {
    if k < 0 {
        return domain("poisson_cdf", format!("k must be non-negative, got {k}"));
    }
    if !(lambda >= 0.0) {
        return domain(
            "poisson_cdf",
            format!("lambda must be non-negative, got {lambda}"),
        );
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    regularized_gamma_q(k as f64 + 1.0, lambda)
}

/// `P(X >= n)` for `X ~ Poisson(lambda)`; equals `P(n, lambda)` for `n >= 1`
/// and 1 for `n = 0`.
pub fn poisson_at_least(n: u64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return domain(
            "poisson_at_least",
            format!("lambda must be non-negative, got {lambda}"),
        );
    }
    if n == 0 {
        return Ok(1.0);
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    regularized_gamma_p(n as f64, lambda)
}

/// Poisson pmf values `P(X = 0..=k_max)` where `k_max` is the smallest index
/// beyond the mean whose upper tail mass is below `tail`.
pub fn poisson_pmf_truncated(lambda: f64, tail: f64) -> Vec<f64> {
    if lambda <= 0.0 {
        return vec![1.0];
    }
    let mut pmf = Vec::with_capacity((lambda + 10.0 * lambda.sqrt() + 20.0) as usize);
    let ln_l = lambda.ln();
    let mut cdf = 0.0;
    let mut k = 0u64;
    loop {
        let p = (k as f64 * ln_l - lambda - ln_gamma(k as f64 + 1.0)).exp();
        pmf.push(p);
        cdf += p;
        if k as f64 > lambda && 1.0 - cdf < tail {
            break;
        }
        k += 1;
        if k > 100_000 {
            break;
        }
    }
    pmf
}

/// `(e^x - 1) / x` with the series limit near zero.
pub fn expm1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// `(1 - e^{-x}) / x` with the series limit near zero.
pub fn one_minus_exp_neg_over_x(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Adaptive Simpson quadrature on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / dp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
