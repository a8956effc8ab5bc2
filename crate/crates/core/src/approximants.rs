//! The smoothed Euler product `P_N`, the quotient `Z_N = ζ/P_N`, partial
//! Dirichlet sums of `ζ^k`, and their phases wrapped to `(-π, π]`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::arith::{divisor_table, smoothed_mangoldt_table};
use crate::error::{Error, Result};
use crate::zeros::IntervalSet;
use crate::zeta_eval::sweep::{sweep_grid, DirichletTerms};
use crate::zeta_eval::{LineSeries, TGrid, DEFAULT_CHUNK};

/// Reduces `x` modulo `2π` into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = x - two_pi * (x / two_pi).round();
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}

/// Wrapped phases on a grid, with an optional set of excluded ordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSeries {
    pub grid: TGrid,
    theta: Vec<f64>,
    mask: Option<IntervalSet>,
    excluded: Vec<bool>,
}

impl PhaseSeries {
    pub fn new(grid: TGrid, theta: Vec<f64>, mask: Option<IntervalSet>) -> Result<Self> {
        if theta.len() != grid.count() {
            return Err(Error::InvalidGrid(format!("{} phases for {} grid points", theta.len(), grid.count())));
        }
        let excluded: Vec<bool> = match &mask {
            Some(m) => (0..grid.count()).map(|j| m.contains(grid.t(j))).collect(),
            None => vec![false; grid.count()],
        };
        if let Some(j) = (0..theta.len()).find(|&j| !excluded[j] && !(theta[j] > -PI && theta[j] <= PI)) {
            return Err(Error::InvalidParameter(format!("phase {} at t = {} is not in (-pi, pi]", theta[j], grid.t(j))));
        }
        Ok(Self { grid, theta, mask, excluded })
    }

    /// The same phases with a different exclusion set.
    pub fn with_mask(self, mask: Option<IntervalSet>) -> Result<Self> {
        Self::new(self.grid, self.theta, mask)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mask(&self) -> Option<&IntervalSet> {
        self.mask.as_ref()
    }

    /// Per-point exclusion flags.
    pub fn excluded(&self) -> &[bool] {
        &self.excluded
    }

    pub fn retained_count(&self) -> usize {
        self.excluded.iter().filter(|&&e| !e).count()
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// `t,theta,masked` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,theta,masked")?;
        for (j, th) in self.theta.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{}", self.grid.t(j), th, u8::from(self.excluded[j]))?;
        }
        Ok(())
    }
}

/// `log P_N(s) = Σ_{2<=n<=N²} Λ_N(n) / (n^s log n)` at a fixed `σ`.
#[derive(Clone, Debug)]
pub struct SmoothedEulerProduct {
    pub big_n: u64,
    pub sigma: f64,
    terms: DirichletTerms,
}

impl SmoothedEulerProduct {
    /// `N < 2` gives the empty sum, so `P_N ≡ 1`.
    pub fn new(big_n: u64, sigma: f64) -> Result<Self> {
        let mut terms = DirichletTerms::new();
        if big_n >= 2 {
            let lambda = smoothed_mangoldt_table(big_n)?;
            for (n, l) in lambda.iter().filter(|&(_, l)| l > 0.0) {
                let nf = n as f64;
                terms.push(n as u64, l / (nf.powf(sigma) * nf.ln()));
            }
        }
        Ok(Self { big_n, sigma, terms })
    }

    /// Number of nonzero terms (prime powers below `N²` with positive weight).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &DirichletTerms {
        &self.terms
    }

    /// Direct evaluation of `log P_N(σ + it)`.
    pub fn log_at(&self, t: f64) -> Complex64 {
        self.terms.all().eval(t)
    }

    /// `log P_N` on a grid whose `σ` must match.
    pub fn log_line(&self, grid: &TGrid, chunk: usize) -> Result<LineSeries> {
        if grid.sigma() != self.sigma {
            return Err(Error::GridMismatch(format!("product built at sigma {} used on sigma {}", self.sigma, grid.sigma())));
        }
        let samples = sweep_grid(self.terms.all(), grid.t0(), grid.h(), grid.count(), chunk);
        LineSeries::new(*grid, samples, format!("log P_N(N={}, sigma={})", self.big_n, self.sigma))
    }
}

/// `log P_N` on `grid`.
pub fn log_p_line(big_n: u64, grid: &TGrid) -> Result<LineSeries> {
    SmoothedEulerProduct::new(big_n, grid.sigma())?.log_line(grid, DEFAULT_CHUNK)
}

/// `P_N^k = exp(k log P_N)` from a precomputed `log P_N`.
pub fn p_from_log(log_p: &LineSeries, k: u32) -> LineSeries {
    let kf = k as f64;
    log_p.map(format!("exp({k}*{})", log_p.label), |z| (z * kf).exp())
}

/// `θ_{P_N^k} = wrap(k · Im log P_N)`, the closed-form sine sum.
pub fn theta_from_log(log_p: &LineSeries, k: u32) -> PhaseSeries {
    let kf = k as f64;
    let theta = log_p.samples.iter().map(|z| wrap_phase(kf * z.im)).collect();
    PhaseSeries::new(log_p.grid, theta, None).expect("wrapped phases are in range")
}

pub fn p_n_line(big_n: u64, k: u32, grid: &TGrid) -> Result<LineSeries> {
    Ok(p_from_log(&log_p_line(big_n, grid)?, k))
}

pub fn theta_p_line(big_n: u64, k: u32, grid: &TGrid) -> Result<PhaseSeries> {
    Ok(theta_from_log(&log_p_line(big_n, grid)?, k))
}

/// `Z_N = ζ / P_N` and `θ_{Z_N} = wrap(arg ζ - arg P_N)`; points of `mask`
/// are flagged as excluded.
pub fn z_n_line(zeta: &LineSeries, p_n: &LineSeries, mask: Option<&IntervalSet>) -> Result<(LineSeries, PhaseSeries)> {
    let z = zeta.zip_with(p_n, format!("{} / {}", zeta.label, p_n.label), |a, b| a / b)?;
    let theta = zeta.samples.iter().zip(&p_n.samples).map(|(a, b)| wrap_phase(a.arg() - b.arg())).collect();
    let phases = PhaseSeries::new(zeta.grid, theta, mask.cloned())?;
    Ok((z, phases))
}

/// `f_N(σ + it) = Σ_{n<=N} d_k(n) n^{-σ-it}`; `N = 0` gives the zero series.
pub fn partial_sum_line(k: u32, big_n: u64, grid: &TGrid) -> Result<LineSeries> {
    partial_sum_line_chunked(k, big_n, grid, DEFAULT_CHUNK)
}

pub fn partial_sum_line_chunked(k: u32, big_n: u64, grid: &TGrid, chunk: usize) -> Result<LineSeries> {
    let mut terms = DirichletTerms::new();
    if big_n >= 1 {
        let n_max = usize::try_from(big_n).map_err(|_| Error::Overflow("N"))?;
        let d = divisor_table(k, n_max)?;
        for (n, dn) in d.iter() {
            terms.push(n as u64, dn as f64 * (n as f64).powf(-grid.sigma()));
        }
    } else if k == 0 {
        return Err(Error::InvalidParameter("divisor function needs k >= 1".into()));
    }
    let samples = sweep_grid(terms.all(), grid.t0(), grid.h(), grid.count(), chunk);
    LineSeries::new(*grid, samples, format!("f_N(k={k}, N={big_n})"))
}

/// `Σ c_j e^{i λ_j t}` evaluated directly at every grid point.
pub fn trig_polynomial_line(grid: &TGrid, terms: &[(f64, Complex64)]) -> Result<LineSeries> {
    LineSeries::from_fn(*grid, format!("trig polynomial ({} terms)", terms.len()), |t| {
        terms.iter().map(|&(lambda, c)| c * Complex64::from_polar(1.0, lambda * t)).sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::dirichlet_exp;
    use crate::arith::CoeffTable;
    use crate::meanvalue::fourier_coeff;
    use crate::zeta_eval::zeta_line;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
        assert!((wrap_phase(-3.0 * PI) - PI).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn wrap_is_periodic(x in -20.0f64..20.0, m in -50i32..50) {
            let a = wrap_phase(x);
            let b = wrap_phase(x + 2.0 * PI * m as f64);
            prop_assert!(a > -PI && a <= PI);
            // equal up to the rounding of x + 2πm, modulo the branch point
            let d = wrap_phase(a - b).abs();
            prop_assert!(d < 1e-12, "{} {}", a, b);
        }
    }

    #[test]
    fn p_two_at_real_point() {
        // Λ_2 is supported on {2, 3}; Λ_2(4) = 0 at the taper end.
        let sigma = 0.7;
        let e = SmoothedEulerProduct::new(2, sigma).unwrap();
        assert_eq!(e.len(), 2);
        let expect = (2f64.powf(-sigma) + (2.0 - 3f64.ln() / 2f64.ln()) * 3f64.powf(-sigma)).exp();
        let got = e.log_at(0.0).exp();
        assert!((got.re - expect).abs() < 1e-14 && got.im == 0.0);
        assert!(got.re > 1.0);
    }

    #[test]
    fn product_is_never_zero_and_phases_agree() {
        let grid = TGrid::new(0.75, 1.0, 200.0, 0.01).unwrap();
        let log_p = log_p_line(30, &grid).unwrap();
        let p = p_from_log(&log_p, 1);
        assert!(p.samples.iter().all(|z| z.norm() > 0.0));
        let theta = theta_from_log(&log_p, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let j = rng.gen_range(0..grid.count());
            let d = wrap_phase(p.samples[j].arg() - theta.theta()[j]);
            assert!(d.abs() < 1e-10, "t={}", grid.t(j));
        }
    }

    #[test]
    fn theta_is_zero_at_origin_and_linear_in_k() {
        let e = SmoothedEulerProduct::new(20, 0.8).unwrap();
        assert_eq!(e.log_at(0.0).im, 0.0);
        let grid = TGrid::new(0.8, 1.0, 50.0, 0.05).unwrap();
        let log_p = e.log_line(&grid, 256).unwrap();
        let t1 = theta_from_log(&log_p, 1);
        let t2 = theta_from_log(&log_p, 2);
        for (j, z) in log_p.samples.iter().enumerate() {
            assert_eq!(t2.theta()[j], wrap_phase(2.0 * z.im));
            assert!(wrap_phase(t2.theta()[j] - 2.0 * t1.theta()[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn line_matches_direct_evaluation() {
        let e = SmoothedEulerProduct::new(40, 0.6).unwrap();
        let grid = TGrid::new(0.6, 1000.0, 1100.0, 0.003).unwrap();
        let line = e.log_line(&grid, 5000).unwrap();
        for j in (0..grid.count()).step_by(311) {
            assert!((line.samples[j] - e.log_at(grid.t(j))).norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_product_is_one() {
        let grid = TGrid::new(0.75, 1.0, 20.0, 0.1).unwrap();
        let zeta = zeta_line(&grid, 1e-10).unwrap();
        let p = p_n_line(1, 1, &grid).unwrap();
        assert!(p.samples.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        let (z, th) = z_n_line(&zeta, &p, None).unwrap();
        assert_eq!(z.samples, zeta.samples);
        for (a, b) in zeta.samples.iter().zip(th.theta()) {
            assert_eq!(wrap_phase(a.arg()), *b);
        }
    }

    #[test]
    fn quotient_identities() {
        let grid = TGrid::new(0.75, 1.0, 300.0, 0.02).unwrap();
        let zeta = zeta_line(&grid, 1e-10).unwrap();
        let log_p = log_p_line(25, &grid).unwrap();
        let p = p_from_log(&log_p, 1);
        let theta_p = theta_from_log(&log_p, 1);
        let mask = IntervalSet::new(vec![(14.0, 14.3), (21.0, 21.1)]);
        let (z, theta_z) = z_n_line(&zeta, &p, Some(&mask)).unwrap();
        assert!(theta_z.excluded()[((14.1 - 1.0) / 0.02) as usize]);
        for k in [1u32, 2, 3] {
            let kf = k as f64;
            for j in 0..grid.count() {
                let (zz, pp) = (zeta.samples[j], p.samples[j]);
                assert!((z.samples[j].norm() * pp.norm() - zz.norm()).abs() <= 1e-13 * zz.norm().max(1.0));
                if theta_z.excluded()[j] {
                    continue;
                }
                let lhs = zz.norm().powi(2 * k as i32) * Complex64::from_polar(1.0, 2.0 * kf * theta_z.theta()[j]);
                let rhs = zz.powi(2 * k as i32) * Complex64::from_polar(1.0, -2.0 * kf * theta_p.theta()[j]);
                assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0), "t={}", grid.t(j));
                // θ_Z + θ_P ≡ arg ζ
                assert!(wrap_phase(theta_z.theta()[j] + theta_p.theta()[j] - zz.arg()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn partial_sums() {
        let grid = TGrid::new(0.75, 1.0, 10.0, 0.5).unwrap();
        let one = partial_sum_line(3, 1, &grid).unwrap();
        assert!(one.samples.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let two = partial_sum_line(1, 2, &grid).unwrap();
        for (j, z) in two.samples.iter().enumerate() {
            let t = grid.t(j);
            let expect = Complex64::new(1.0, 0.0) + Complex64::from_polar(2f64.powf(-0.75), -t * 2f64.ln());
            assert!((z - expect).norm() < 1e-14);
        }
        let zero = partial_sum_line(2, 0, &grid).unwrap();
        assert!(zero.samples.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn product_coefficients_match_dirichlet_exponential() {
        // Fourier coefficients of P_N^k at λ = -log n are the coefficients of
        // exp(k Σ Λ_N(n) n^{-s}/log n), scaled by n^{-σ}.
        let (big_n, k, sigma) = (3u64, 2u32, 0.75);
        let lambda = smoothed_mangoldt_table(big_n).unwrap();
        let n_max = 40;
        let a = CoeffTable::from_fn(n_max, |n| {
            if n < 2 || n > lambda.n_max() {
                0.0
            } else {
                k as f64 * lambda.get(n) / (n as f64).ln()
            }
        })
        .unwrap();
        let b = dirichlet_exp(&a).unwrap();
        let grid = TGrid::new(sigma, 1.0, 20_000.0, 0.05).unwrap();
        let p = p_n_line(big_n, k, &grid).unwrap();
        for n in [1usize, 2, 3, 4, 6, 8, 9, 12] {
            let c = fourier_coeff(&p, -(n as f64).ln()).unwrap();
            let expect = b.get(n) * (n as f64).powf(-sigma);
            assert!((c.value() - Complex64::new(expect, 0.0)).norm() < 5e-3, "n={n}: {:?} vs {expect}", c.value());
        }
    }

    #[test]
    fn phase_csv() {
        let grid = TGrid::new(0.75, 1.0, 1.2, 0.1).unwrap();
        let ph = PhaseSeries::new(grid, vec![0.0, PI, -1.0], Some(IntervalSet::new(vec![(1.05, 1.15)]))).unwrap();
        let mut out = Vec::new();
        ph.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "t,theta,masked");
        assert!(rows[2].ends_with(",1") && rows[1].ends_with(",0"));
        assert!(PhaseSeries::new(grid, vec![0.0, -PI, 0.0], None).is_err());
    }
}
