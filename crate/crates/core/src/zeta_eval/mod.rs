//! Evaluation of `ζ(σ+it)` at single points and on dense vertical grids.

mod eta;
mod euler_maclaurin;
mod grid;
pub mod sweep;

use num_complex::Complex64;
use rayon::prelude::*;

pub use eta::zeta_eta;
pub use euler_maclaurin::{plan as em_plan, remainder_bound, zeta_point, Plan, MIN_TOL};
pub use grid::{LineSeries, TGrid};
pub use sweep::{DirichletTerms, DEFAULT_CHUNK, RESEED};

use crate::error::{Error, Result};

/// Relative cost of one Bernoulli correction (per point) against one
/// main-sum term (per point) in the vectorised sweep.
const LINE_CORRECTION_COST: f64 = 40.0;

/// `ζ` on every grid point with absolute error at most `tol`.
pub fn zeta_line(grid: &TGrid, tol: f64) -> Result<LineSeries> {
    zeta_line_chunked(grid, tol, DEFAULT_CHUNK)
}

/// As [`zeta_line`] with an explicit parallel chunk size. Each chunk picks
/// its own main-sum cutoff from the error bound at its highest ordinate.
pub fn zeta_line_chunked(grid: &TGrid, tol: f64, chunk: usize) -> Result<LineSeries> {
    let samples = zeta_segment(grid.sigma(), grid.t0(), grid.h(), grid.count(), tol, chunk)?;
    LineSeries::new(*grid, samples, format!("zeta(sigma={}, tol={tol:e})", grid.sigma()))
}

/// Samples `ζ(σ + i(t_start + j·h))`; `t_start` may be negative.
pub(crate) fn zeta_segment(
    sigma: f64,
    t_start: f64,
    h: f64,
    count: usize,
    tol: f64,
    chunk: usize,
) -> Result<Vec<Complex64>> {
    let chunk = chunk.max(1);
    let plans = (0..count.div_ceil(chunk))
        .map(|c| {
            let first = t_start + (c * chunk) as f64 * h;
            let last = t_start + (((c + 1) * chunk).min(count) - 1) as f64 * h;
            let height = first.abs().max(last.abs());
            let s = Complex64::new(sigma, height);
            if s == Complex64::new(1.0, 0.0) {
                return Err(Error::Pole);
            }
            em_plan(s, tol, LINE_CORRECTION_COST)
        })
        .collect::<Result<Vec<_>>>()?;
    let longest = plans.iter().map(|p| p.cutoff).max().unwrap_or(1);
    let mut terms = DirichletTerms::new();
    for n in 1..longest {
        terms.push(n, (n as f64).powf(-sigma));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    out.par_chunks_mut(chunk).zip(plans.par_iter()).enumerate().for_each(|(c, (piece, plan))| {
        let base = c * chunk;
        let t_first = t_start + base as f64 * h;
        sweep::sweep_into(terms.prefix(plan.cutoff as usize - 1), t_first, h, piece);
        for (j, z) in piece.iter_mut().enumerate() {
            let s = Complex64::new(sigma, t_start + (base + j) as f64 * h);
            *z += euler_maclaurin::tail(s, *plan);
        }
    });
    Ok(out)
}

/// Pointwise `f^k`.
pub fn pow_line(f: &LineSeries, k: u32) -> Result<LineSeries> {
    if k == 0 {
        return Err(Error::InvalidParameter("pow_line needs k >= 1".into()));
    }
    let exponent = i32::try_from(k).map_err(|_| Error::InvalidParameter(format!("k = {k} too large")))?;
    Ok(f.map(format!("({})^{k}", f.label), |z| z.powi(exponent)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Direct partial sum of `n^{-2}` plus the integral tail bracket.
    fn zeta2_oracle() -> (f64, f64) {
        let n = 1_000_000u64;
        let partial: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum();
        // Σ_{k>n} k^{-2} lies in (1/(n+1), 1/n)
        (partial + 1.0 / (n + 1) as f64, partial + 1.0 / n as f64)
    }

    #[test]
    fn zeta_at_two() {
        let (lo, hi) = zeta2_oracle();
        let z = zeta_point(Complex64::new(2.0, 0.0), 1e-12).unwrap();
        assert!(z.re >= lo - 1e-12 && z.re <= hi + 1e-12, "{z} not in [{lo}, {hi}]");
        assert!((z.re - PI * PI / 6.0).abs() < 1e-12);
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn zeta_at_three_quarters_matches_eta_route() {
        let s = Complex64::new(0.75, 0.0);
        let a = zeta_point(s, 1e-12).unwrap();
        let b = zeta_eta(s, 1e-12).unwrap();
        assert!((a - b).norm() < 1e-11);
        assert!((a.re + 3.441_285).abs() < 1e-6, "{a}");
    }

    #[test]
    fn routes_agree_in_the_strip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let s = Complex64::new(rng.gen_range(0.5..1.0), rng.gen_range(1.0..300.0));
            let a = zeta_point(s, 1e-11).unwrap();
            let b = zeta_eta(s, 1e-11).unwrap();
            assert!((a - b).norm() < 1e-9, "s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn line_matches_point_evaluation() {
        let grid = TGrid::new(0.75, 1.0, 100.0, 0.01).unwrap();
        let line = zeta_line(&grid, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let j = rng.gen_range(0..grid.count());
            let p = zeta_point(Complex64::new(0.75, grid.t(j)), 1e-10).unwrap();
            assert!((line.samples[j] - p).norm() < 1e-8, "t={}", grid.t(j));
        }
    }

    #[test]
    fn line_at_large_height() {
        let grid = TGrid::new(0.6, 99_000.0, 99_010.0, 0.005).unwrap();
        let line = zeta_line_chunked(&grid, 1e-9, 512).unwrap();
        for j in (0..grid.count()).step_by(157) {
            let p = zeta_point(Complex64::new(0.6, grid.t(j)), 1e-9).unwrap();
            assert!((line.samples[j] - p).norm() < 1e-8, "t={}", grid.t(j));
        }
    }

    #[test]
    fn single_point_grid() {
        let grid = TGrid::new(0.8, 3.0, 3.5, 1.0).unwrap();
        let line = zeta_line(&grid, 1e-10).unwrap();
        assert_eq!(line.len(), 1);
        let p = zeta_point(Complex64::new(0.8, 3.0), 1e-10).unwrap();
        assert!((line.samples[0] - p).norm() < 2e-10);
    }

    #[test]
    fn conjugate_symmetry() {
        let up = zeta_segment(0.7, 1.0, 0.05, 200, 1e-10, 64).unwrap();
        let down = zeta_segment(0.7, -1.0, -0.05, 200, 1e-10, 64).unwrap();
        for (a, b) in up.iter().zip(&down) {
            assert!((a - b.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn powers() {
        let grid = TGrid::new(0.75, 1.0, 30.0, 0.1).unwrap();
        let z = zeta_line(&grid, 1e-10).unwrap();
        assert_eq!(pow_line(&z, 1).unwrap().samples, z.samples);
        let z3 = pow_line(&z, 3).unwrap();
        for (a, b) in z.samples.iter().zip(&z3.samples) {
            assert!((a.norm().powi(3) - b.norm()).abs() <= 1e-13 * b.norm().max(1.0));
        }
        let c = LineSeries::from_fn(grid, "c", |_| Complex64::new(0.3, -1.2)).unwrap();
        let c4 = pow_line(&c, 4).unwrap();
        let expect = Complex64::new(0.3, -1.2).powi(4);
        assert!(c4.samples.iter().all(|z| (z - expect).norm() < 1e-14));
        assert!(pow_line(&c, 0).is_err());
    }
}
