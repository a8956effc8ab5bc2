//! Euler–Maclaurin summation for `ζ(s)`:
//!
//! `ζ(s) = Σ_{n<M} n^{-s} + M^{1-s}/(s-1) + M^{-s}/2 + Σ_{j=1}^{m} T_j + R`,
//! `T_j = B_{2j}/(2j)! · s(s+1)…(s+2j-2) · M^{-s-2j+1}`,
//!
//! with `|R| <= |s+2m+1|/(σ+2m+1) · |T_{m+1}|` for `σ > -(2m+1)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Deepest correction supported.
pub const MAX_DEPTH: usize = 60;

/// Tolerances below this are refused; rounding in the main sum dominates.
pub const MIN_TOL: f64 = 1e-13;

const MAX_TERMS: f64 = 1e9;

/// `B_{2j}/(2j)!` for `j = 0..=MAX_DEPTH+1` (index 0 unused).
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_{2j}/(2j)! = (-1)^{j+1} 2 ζ(2j) / (2π)^{2j}
        let mut out = vec![0.0; MAX_DEPTH + 2];
        for (j, slot) in out.iter_mut().enumerate().skip(1) {
            let zeta_even = match j {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                _ => even_zeta(2 * j as i32),
            };
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign * 2.0 * zeta_even / (2.0 * PI).powi(2 * j as i32);
        }
        out
    })
}

/// `ζ(p)` for even `p >= 6`: 50 terms plus a short Euler–Maclaurin tail.
fn even_zeta(p: i32) -> f64 {
    let n = 50.0f64;
    let pf = p as f64;
    let head: f64 = (1..50).rev().map(|k| (k as f64).powi(-p)).sum();
    let tail = n.powi(1 - p) / (pf - 1.0) + 0.5 * n.powi(-p) + pf / 12.0 * n.powi(-p - 1)
        - pf * (pf + 1.0) * (pf + 2.0) / 720.0 * n.powi(-p - 3);
    head + tail
}

/// Main-sum length and correction depth for one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Plan {
    /// Cutoff `M`; the main sum runs over `n < M`.
    pub cutoff: u64,
    pub depth: usize,
}

/// `log` of the remainder bound after `depth` corrections, without the
/// `M` dependence: the bound is `exp(coef) · M^{-(σ+2·depth+1)}`.
fn log_bound_coefficient(s: Complex64, depth: usize) -> f64 {
    let b = bernoulli_ratios()[depth + 1].abs().ln();
    let rising: f64 = (0..=2 * depth).map(|i| (s + i as f64).norm().ln()).sum();
    let lead = ((s + (2 * depth + 1) as f64).norm() / (s.re + (2 * depth + 1) as f64)).ln();
    b + rising + lead
}

/// Remainder bound for a given plan.
pub fn remainder_bound(s: Complex64, plan: Plan) -> f64 {
    let exponent = s.re + (2 * plan.depth + 1) as f64;
    (log_bound_coefficient(s, plan.depth) - exponent * (plan.cutoff as f64).ln()).exp()
}

/// Cheapest plan meeting `tol` at `s`, where one correction term is charged
/// like `correction_cost` main-sum terms.
pub fn plan(s: Complex64, tol: f64, correction_cost: f64) -> Result<Plan> {
    if !(tol >= MIN_TOL) {
        return Err(Error::ToleranceUnattainable {
            tol,
            reason: format!("double-precision evaluation is limited to tol >= {MIN_TOL:e}"),
        });
    }
    let log_tol = tol.ln();
    let mut best: Option<(f64, Plan)> = None;
    for depth in 1..=MAX_DEPTH {
        let exponent = s.re + (2 * depth + 1) as f64;
        let log_m = (log_bound_coefficient(s, depth) - log_tol) / exponent;
        let m = log_m.exp().ceil().max(2.0);
        if m > MAX_TERMS {
            continue;
        }
        let cost = m + correction_cost * depth as f64;
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, Plan { cutoff: m as u64, depth }));
        }
    }
    best.map(|(_, p)| p).ok_or_else(|| Error::ToleranceUnattainable {
        tol,
        reason: format!("more than {MAX_TERMS:e} terms needed at s = {s}"),
    })
}

/// Everything in the formula except the main sum `Σ_{n<M} n^{-s}`.
pub fn tail(s: Complex64, plan: Plan) -> Complex64 {
    let m = plan.cutoff as f64;
    let log_m = m.ln();
    let m_pow = (-s * log_m).exp(); // M^{-s}
    let mut acc = m_pow * m / (s - 1.0) + m_pow * 0.5;
    let ratios = bernoulli_ratios();
    let inv_m2 = 1.0 / (m * m);
    // rising = s(s+1)…(s+2j-2) · M^{-s-2j+1}
    let mut rising = s * m_pow / m;
    for j in 1..=plan.depth {
        acc += rising * ratios[j];
        let k = (2 * j - 1) as f64;
        rising = rising * (s + k) * (s + k + 1.0) * inv_m2;
    }
    acc
}

/// `ζ(s)` by Euler–Maclaurin with absolute error at most `tol`.
pub fn zeta_point(s: Complex64, tol: f64) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    if !(s.re > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta_point needs Re s > 0, got {s}")));
    }
    let plan = plan(s, tol, 1.0)?;
    let mut main = Complex64::new(0.0, 0.0);
    for n in (1..plan.cutoff).rev() {
        main += (-s * (n as f64).ln()).exp();
    }
    Ok(main + tail(s, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_ratios_match_known_values() {
        let r = bernoulli_ratios();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs();
        assert!(close(r[1], 1.0 / 12.0));
        assert!(close(r[2], -1.0 / 720.0));
        assert!(close(r[3], 1.0 / 30240.0));
        // B_10 = 5/66
        assert!(close(r[5], 5.0 / 66.0 / 3_628_800.0));
    }

    #[test]
    fn plan_cutoff_scales_with_height() {
        let low = plan(Complex64::new(0.75, 100.0), 1e-10, 30.0).unwrap();
        let high = plan(Complex64::new(0.75, 1e5), 1e-10, 30.0).unwrap();
        assert!(high.cutoff > 100 * low.cutoff / 2);
        // M stays well below t: the Bernoulli series only needs 2πM to exceed t.
        assert!((high.cutoff as f64) < 0.3 * 1e5, "{high:?}");
        assert!(remainder_bound(Complex64::new(0.75, 1e5), high) <= 1e-10);
        assert!(matches!(plan(Complex64::new(0.75, 10.0), 1e-15, 1.0), Err(Error::ToleranceUnattainable { .. })));
    }

    #[test]
    fn pole_is_an_error() {
        assert!(matches!(zeta_point(Complex64::new(1.0, 0.0), 1e-10), Err(Error::Pole)));
    }
}
