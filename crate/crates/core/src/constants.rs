//! Constants in the conjectured moment asymptotic `a_k g_k T (log T)^{k²}`
//! and the limit `Σ d_k(n)² n^{-2σ}` of the normalised moments.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{binomial, divisor_table, primes_up_to};
use crate::error::{Error, Result};
use crate::zeta_eval::zeta_point;

/// Prime cutoff used when no other is given.
pub const DEFAULT_P_MAX: u64 = 1_000_000;

/// Largest prime cutoff the series routines will sieve to.
const MAX_SIEVE: u64 = 10_000_000;

/// Orders of the local-factor expansion used for the prime tail.
const TAIL_ORDER: usize = 8;

/// `E_1(x) = ∫_x^∞ e^{-u}/u du` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return -EULER_GAMMA - x.ln() + sum;
    }
    // continued fraction, modified Lentz
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

/// Taylor coefficients `c_1..c_order` of `log(Σ_m q_m x^m)` given `q_0 = 1`.
fn log_series(q: &[f64], order: usize) -> Vec<f64> {
    let qm = |m: usize| q.get(m).copied().unwrap_or(0.0);
    let mut l = vec![0.0; order + 1];
    for m in 1..=order {
        let mut acc = m as f64 * qm(m);
        for j in 1..m {
            acc -= j as f64 * l[j] * qm(m - j);
        }
        l[m] = acc / m as f64;
    }
    l
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k) as f64
}

/// Result of the Euler product for `a_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArithmeticFactor {
    pub k: u32,
    pub value: f64,
    /// Estimated error after the tail correction.
    pub tail_estimate: f64,
    pub p_max: u64,
}

/// `a_k = Π_p (1 - 1/p)^{(k-1)²} Σ_{n<k} C(k-1, n)² p^{-n}`.
///
/// Primes up to `p_max` are multiplied exactly. The remaining primes are
/// handled through the expansion `log f(x) = Σ_{m>=2} c_m x^m` of the local
/// factor and `Σ_{p>P} p^{-m} ≈ E_1((m-1) log P)`; the reported estimate
/// allows a relative error `1/log P` in that prime sum.
pub fn arithmetic_factor(k: u32, p_max: u64, tol: f64) -> Result<ArithmeticFactor> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(2..=MAX_SIEVE).contains(&p_max) {
        return Err(Error::InvalidParameter(format!("p_max = {p_max} must lie in [2, {MAX_SIEVE}]")));
    }
    if k == 1 {
        return Ok(ArithmeticFactor { k, value: 1.0, tail_estimate: 0.0, p_max });
    }
    let km1 = (k - 1) as u64;
    let power = (km1 * km1) as f64;
    let q: Vec<f64> = (0..=km1).map(|n| binomial_f64(km1, n).powi(2)).collect();
    let local_log = |x: f64| {
        let mut rest = 0.0;
        for &qn in q[1..].iter().rev() {
            rest = (rest + qn) * x;
        }
        power * (-x).ln_1p() + rest.ln_1p()
    };
    let primes = primes_up_to(p_max as usize);
    let head: f64 = primes.iter().rev().map(|&p| local_log(1.0 / p as f64)).sum();

    let lq = log_series(&q, TAIL_ORDER + 1);
    let c: Vec<f64> = (0..=TAIL_ORDER + 1).map(|m| if m == 0 { 0.0 } else { lq[m] - power / m as f64 }).collect();
    let big_l = (p_max as f64).ln();
    let mut correction = 0.0;
    let mut uncertainty = 0.0;
    for m in 2..=TAIL_ORDER {
        let s = exp_integral_e1((m - 1) as f64 * big_l);
        correction += c[m] * s;
        uncertainty += c[m].abs() * s / big_l;
    }
    uncertainty += 2.0 * c[TAIL_ORDER + 1].abs() * (p_max as f64).powi(-(TAIL_ORDER as i32));
    let value = (head + correction).exp();
    let tail_estimate = value * uncertainty.exp_m1();
    if !(tail_estimate <= tol) {
        return Err(Error::ToleranceUnattainable {
            tol,
            reason: format!("prime tail beyond {p_max} is estimated at {tail_estimate:e}"),
        });
    }
    Ok(ArithmeticFactor { k, value, tail_estimate, p_max })
}

/// Barnes `G(n)` for integer `n >= 1`.
fn barnes_g_int(n: u32) -> BigUint {
    // G(1) = G(2) = 1, G(m+1) = (m-1)! G(m)
    let mut g = BigUint::one();
    let mut fact = BigUint::one(); // (m-1)!
    for m in 2..n {
        fact *= BigUint::from(m - 1);
        g *= &fact;
    }
    g
}

/// `g_k = G(k+1)² / G(2k+1)`, exact.
pub fn barnes_g_factor(k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let num = barnes_g_int(k + 1).pow(2);
    let den = barnes_g_int(2 * k + 1);
    Ok(BigRational::new(num.into(), den.into()))
}

/// `Σ d_k(n)² n^{-2σ}` with a bound on its error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DkSeries {
    pub value: f64,
    pub error_bound: f64,
    /// Primes up to this cutoff enter the Euler factor exactly.
    pub p_max: u64,
}

/// Log of `(1 - x)^{k²} Σ_m C(m+k-1, k-1)² x^m`, the local factor at `p`
/// of `Σ d_k(n)² n^{-s} / ζ(s)^{k²}`, with `x = p^{-s}`.
fn dk_local_log(k: u32, x: f64) -> f64 {
    let kf = k as f64;
    let mut sum = 0.0;
    let mut term = 1.0;
    let mut m = 0.0;
    while term > 1e-18 * sum || m == 0.0 {
        sum += term;
        let r = (m + kf) / (m + 1.0);
        term *= r * r * x;
        m += 1.0;
    }
    kf * kf * (-x).ln_1p() + sum.ln()
}

/// `Σ_{n>=1} d_k(n)² n^{-2σ}` for `σ > 1/2`.
///
/// The series factors as `ζ(2σ)^{k²} H_k(2σ)` with `H_k` an Euler product
/// converging like `Σ_p p^{-4σ}`. `H_k` is multiplied out over primes up to
/// a cutoff raised until the tail, bounded through `π(x) < 1.25506 x/log x`,
/// fits in `tol`.
pub fn dk_series(k: u32, sigma: f64, tol: f64) -> Result<DkSeries> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(sigma > 0.5) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("series diverges at sigma = {sigma}")));
    }
    let s = 2.0 * sigma;
    let zeta_s = zeta_point(Complex64::new(s, 0.0), 1e-13)?.re;
    let k2 = (k * k) as f64;
    let zeta_part = zeta_s.powf(k2);
    let zeta_err = zeta_part * k2 * 1e-13 / zeta_s;
    if k == 1 {
        return if zeta_err <= tol {
            Ok(DkSeries { value: zeta_part, error_bound: zeta_err, p_max: 0 })
        } else {
            Err(Error::ToleranceUnattainable { tol, reason: "zeta evaluation floor".into() })
        };
    }
    let c2 = k2 * ((k - 1) as f64).powi(2) / 4.0;
    let a = 2.0 * s;
    let mut p_max = 10_000u64;
    loop {
        let pm = p_max as f64;
        let prime_tail = 1.25506 * a / ((a - 1.0) * pm.powf(a - 1.0) * pm.ln());
        let log_bound = 2.0 * c2 * prime_tail;
        let head: f64 = primes_up_to(p_max as usize)
            .iter()
            .rev()
            .map(|&p| dk_local_log(k, (p as f64).powf(-s)))
            .sum();
        let value = zeta_part * head.exp();
        let error_bound = value * log_bound.exp_m1() + zeta_err * head.exp() + value * 1e-14;
        if error_bound <= tol {
            return Ok(DkSeries { value, error_bound, p_max });
        }
        if p_max >= MAX_SIEVE {
            return Err(Error::ToleranceUnattainable {
                tol,
                reason: format!("error bound {error_bound:e} with primes up to {p_max}"),
            });
        }
        p_max = (p_max * 10).min(MAX_SIEVE);
    }
}

/// `Σ_{n<=N} d_k(n)² n^{-2σ}` by direct summation.
pub fn dk_partial(k: u32, sigma: f64, big_n: u64) -> Result<f64> {
    if big_n == 0 {
        return Ok(0.0);
    }
    let n_max = usize::try_from(big_n).map_err(|_| Error::Overflow("N"))?;
    let d = divisor_table(k, n_max)?;
    Ok(d.iter().rev().map(|(n, dn)| (dn as f64).powi(2) * (n as f64).powf(-2.0 * sigma)).sum())
}

/// `Σ_{n>N} d_k(n)² n^{-2σ}`.
pub fn dk_tail(k: u32, sigma: f64, big_n: u64, tol: f64) -> Result<f64> {
    let total = dk_series(k, sigma, tol)?;
    Ok((total.value - dk_partial(k, sigma, big_n)?).max(0.0))
}

/// The leading-order moment prediction `a_k g_k T (log T)^{k²}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPrediction {
    pub k: u32,
    pub a_k: f64,
    pub g_k: BigRational,
}

impl MomentPrediction {
    pub fn new(k: u32) -> Result<Self> {
        let a = arithmetic_factor(k, DEFAULT_P_MAX, 1e-6)?;
        Ok(Self { k, a_k: a.value, g_k: barnes_g_factor(k)? })
    }

    pub fn g_k_f64(&self) -> f64 {
        self.g_k.to_f64().unwrap_or(0.0)
    }

    /// `a_k g_k`.
    pub fn leading_constant(&self) -> f64 {
        self.a_k * self.g_k_f64()
    }

    pub fn predicted(&self, t: f64) -> f64 {
        self.leading_constant() * t * t.ln().powi((self.k * self.k) as i32)
    }
}

/// `a_k g_k T (log T)^{k²}`.
pub fn ks_prediction(k: u32, t: f64) -> Result<f64> {
    if !(t > std::f64::consts::E) {
        return Err(Error::InvalidParameter(format!("T = {t} must exceed e")));
    }
    Ok(MomentPrediction::new(k)?.predicted(t))
}
