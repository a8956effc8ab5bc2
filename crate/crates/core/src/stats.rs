//! Phase and mass diagnostics: exceedance of `θ_{Z_N}`, the zero-one ratio,
//! the `1 - cos 2x = 2 sin² x` identity residual, mass carried by a set of
//! ordinates, and the distribution of `|ζ|^{2k}` along the range.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::approximants::PhaseSeries;
use crate::error::{Error, Result};
use crate::meanvalue::{EstimateRecord, Params, Quadrature};
use crate::zeros::IntervalSet;
use crate::zeta_eval::LineSeries;

/// Fraction of retained grid points with `|θ| >= ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exceedance {
    pub eps: f64,
    pub fraction: f64,
    pub retained_points: usize,
    pub masked_points: usize,
    /// Length of `t` inside the mask, clipped to the grid.
    pub masked_measure: f64,
}

pub fn phase_exceedance(theta: &PhaseSeries, eps: f64) -> Result<Exceedance> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let retained = theta.retained_count();
    if retained == 0 {
        return Err(Error::AllMasked);
    }
    let hits = theta
        .theta()
        .iter()
        .zip(theta.excluded())
        .filter(|&(th, &ex)| !ex && th.abs() >= eps)
        .count();
    let g = theta.grid;
    let masked_measure = theta.mask().map_or(0.0, |m| m.clip(g.t0(), g.t_last()).total_measure());
    Ok(Exceedance {
        eps,
        fraction: hits as f64 / retained as f64,
        retained_points: retained,
        masked_points: theta.len() - retained,
        masked_measure,
    })
}

fn check_inputs(zeta: &LineSeries, theta_p: &PhaseSeries) -> Result<Quadrature> {
    if zeta.grid != theta_p.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", zeta.grid, theta_p.grid)));
    }
    let flags = theta_p.mask().map(|_| theta_p.excluded());
    Quadrature::new(&zeta.grid, flags)
}

/// `∫ |ζ|^{2k} sin²(k θ_{Z_N}) dt / ∫ |ζ|^{2k} dt` over the points retained
/// by the mask of `theta_p`, which holds `θ_{P_N}` (not its multiple).
///
/// With `θ_{Z_N} = arg ζ - θ_{P_N}` the numerator integrand is
/// `(Im(ζ^k e^{-ikθ_{P_N}}))²`, so no argument of `ζ` is taken.
pub fn zero_one_ratio(k: u32, big_n: u64, zeta: &LineSeries, theta_p: &PhaseSeries) -> Result<EstimateRecord> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let q = check_inputs(zeta, theta_p)?;
    let (ki, kf) = (k as i32, k as f64);
    let (full, half) = q.integrate(|j| {
        let zk = zeta.samples[j].powi(ki);
        let rotated = zk * Complex64::from_polar(1.0, -kf * theta_p.theta()[j]);
        [Complex64::new(rotated.im * rotated.im, 0.0), Complex64::new(zk.norm_sqr(), 0.0)]
    });
    if !(full[1].re > 0.0) {
        return Err(Error::InvalidParameter("moment over the retained set vanishes".into()));
    }
    let value = full[0].re / full[1].re;
    let proxy = if half[1].re > 0.0 { 0.5 * (value - half[0].re / half[1].re).abs() } else { 0.0 };
    Ok(EstimateRecord {
        value_re: value,
        value_im: 0.0,
        error_proxy: proxy,
        retained_measure: q.measure(),
        params: Params::of(&zeta.grid).with_k(k).with_n(big_n),
    })
}

/// Terms of the identity `∫|ζ|^{2k} = Re ∫ ζ^{2k} e^{-2ikθ_P} + 2∫|ζ|^{2k} sin²(kθ_Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub moment: f64,
    pub cos_term: f64,
    pub sin2_term: f64,
    pub residual: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.moment
    }
}

/// Evaluates both sides of the identity on the retained points. The `sin²`
/// term uses the phase of `Z_N = ζ / P_N` from `p_n`; the cosine term uses
/// the closed-form phase in `theta_p`. The residual therefore only reflects
/// rounding and the agreement of the two phase routes.
pub fn sin2_identity_residual(
    k: u32,
    zeta: &LineSeries,
    p_n: &LineSeries,
    theta_p: &PhaseSeries,
) -> Result<IdentityResidual> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    zeta.grid.same_as(&p_n.grid)?;
    let q = check_inputs(zeta, theta_p)?;
    let (ki, kf) = (k as i32, k as f64);
    let (full, _) = q.integrate(|j| {
        let z = zeta.samples[j];
        let m = z.norm_sqr().powi(ki);
        let cos = (z.powi(2 * ki) * Complex64::from_polar(1.0, -2.0 * kf * theta_p.theta()[j])).re;
        let quotient = z / p_n.samples[j];
        let unit = quotient / quotient.norm();
        let s = unit.powi(ki).im;
        [Complex64::new(m, 0.0), Complex64::new(cos, 0.0), Complex64::new(2.0 * m * s * s, 0.0)]
    });
    let (moment, cos_term, sin2_term) = (full[0].re, full[1].re, full[2].re);
    Ok(IdentityResidual { moment, cos_term, sin2_term, residual: (moment - cos_term - sin2_term).abs() })
}

/// `∫_S |f|² / ∫ |f|²`, with the same Simpson weights in both integrals and
/// `S` entering as a pointwise indicator.
pub fn mass_on_set(f: &LineSeries, set: &IntervalSet) -> Result<f64> {
    let grid = f.grid;
    if grid.count() == 0 {
        return Err(Error::TooFewPoints(0));
    }
    let q = Quadrature::new(&grid, None)?;
    let (full, _) = q.integrate(|j| {
        let m = f.samples[j].norm_sqr();
        let inside = if set.contains(grid.t(j)) { m } else { 0.0 };
        [Complex64::new(inside, 0.0), Complex64::new(m, 0.0)]
    });
    if !(full[1].re > 0.0) {
        return Err(Error::InvalidParameter("series has no mass".into()));
    }
    Ok(full[0].re / full[1].re)
}

/// Share of `∫ |ζ|^{2k}` in one bin of `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

/// Distribution of `|ζ|^{2k}` over `bins` equal bins of `[t0, t_last]`.
/// The integrand is interpolated linearly between samples and integrated
/// exactly over each bin, so the masses sum to one.
pub fn density_profile(k: u32, zeta: &LineSeries, bins: usize) -> Result<Vec<Bin>> {
    if bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let grid = zeta.grid;
    if grid.count() < 2 {
        return Err(Error::TooFewPoints(grid.count()));
    }
    let g: Vec<f64> = zeta.samples.iter().map(|z| z.norm_sqr().powi(k as i32)).collect();
    let (t0, span, h) = (grid.t0(), grid.span(), grid.h());
    let edge = |i: usize| if i == bins { t0 + span } else { t0 + span * i as f64 / bins as f64 };
    let mut masses = vec![0.0; bins];
    // integral of the interpolant of segment j over [a, b] ⊆ [t_j, t_{j+1}]
    let piece = |j: usize, a: f64, b: f64| {
        let (ta, gj, gk) = (grid.t(j), g[j], g[j + 1]);
        let at = |t: f64| gj + (gk - gj) * (t - ta) / h;
        0.5 * (at(a) + at(b)) * (b - a)
    };
    let mut bin = 0;
    for j in 0..grid.count() - 1 {
        let (mut a, b) = (grid.t(j), grid.t(j + 1));
        while bin + 1 < bins && edge(bin + 1) < b {
            let e = edge(bin + 1);
            if e > a {
                masses[bin] += piece(j, a, e);
                a = e;
            }
            bin += 1;
        }
        masses[bin] += piece(j, a, b);
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter("series has no mass".into()));
    }
    Ok((0..bins).map(|i| Bin { lo: edge(i), hi: edge(i + 1), mass: masses[i] / total }).collect())
}

/// `bin_lo,bin_hi,mass` rows.
pub fn write_histogram_csv<W: Write>(bins: &[Bin], mut w: W) -> Result<()> {
    writeln!(w, "bin_lo,bin_hi,mass")?;
    for b in bins {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", b.lo, b.hi, b.mass)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximants::{log_p_line, p_from_log, theta_from_log, wrap_phase, z_n_line};
    use crate::zeta_eval::{zeta_line, TGrid};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid() -> TGrid {
        TGrid::new(0.75, 1.0, 200.0, 0.02).unwrap()
    }

    fn phases(theta: Vec<f64>, mask: Option<IntervalSet>) -> PhaseSeries {
        PhaseSeries::new(grid(), theta, mask).unwrap()
    }

    #[test]
    fn exceedance_basics() {
        let n = grid().count();
        let zero = phases(vec![0.0; n], None);
        assert_eq!(phase_exceedance(&zero, 0.1).unwrap().fraction, 0.0);
        let spread: Vec<f64> = (0..n).map(|j| wrap_phase(j as f64 * 0.37)).collect();
        let s = phases(spread, None);
        assert_eq!(phase_exceedance(&s, PI + 0.01).unwrap().fraction, 0.0);
        let mut prev = 1.0;
        for eps in [0.01, 0.5, 1.0, 2.0, 3.0] {
            let f = phase_exceedance(&s, eps).unwrap().fraction;
            assert!(f <= prev);
            prev = f;
        }
        assert!(phase_exceedance(&s, 0.0).is_err());
        let all = phases(vec![0.0; n], Some(IntervalSet::new(vec![(0.0, 1000.0)])));
        assert!(matches!(phase_exceedance(&all, 0.5), Err(Error::AllMasked)));
    }

    #[test]
    fn exceedance_skips_masked_points() {
        let g = grid();
        let theta: Vec<f64> = (0..g.count()).map(|j| if g.t(j) < 100.0 { 3.0 } else { 0.0 }).collect();
        let masked = phases(theta, Some(IntervalSet::new(vec![(0.0, 100.0)])));
        let e = phase_exceedance(&masked, 0.5).unwrap();
        assert_eq!(e.fraction, 0.0);
        assert!((e.masked_measure - 99.0).abs() < 1e-9);
    }

    #[test]
    fn zero_one_ratio_limits() {
        let g = grid();
        let z = zeta_line(&g, 1e-8).unwrap();
        let arg: Vec<f64> = z.samples.iter().map(|s| s.arg()).collect();
        // θ_P = arg ζ gives θ_Z ≡ 0
        let r0 = zero_one_ratio(1, 0, &z, &phases(arg.clone(), None)).unwrap();
        assert!(r0.value_re < 1e-20);
        for k in [1u32, 2] {
            let shifted: Vec<f64> = arg.iter().map(|a| wrap_phase(a - PI / (2.0 * k as f64))).collect();
            let r1 = zero_one_ratio(k, 0, &z, &phases(shifted, None)).unwrap();
            assert!((r1.value_re - 1.0).abs() < 1e-12, "k={k}: {}", r1.value_re);
        }
    }

    #[test]
    fn identity_residual_is_rounding_level() {
        let g = grid();
        let z = zeta_line(&g, 1e-8).unwrap();
        for n in [10u64, 100] {
            let log_p = log_p_line(n, &g).unwrap();
            let p = p_from_log(&log_p, 1);
            let th = theta_from_log(&log_p, 1);
            for k in [1u32, 2, 3] {
                let r = sin2_identity_residual(k, &z, &p, &th).unwrap();
                assert!(r.relative() < 1e-12, "N={n} k={k}: {r:?}");
            }
            let (_, theta_z) = z_n_line(&z, &p, None).unwrap();
            let ratio = zero_one_ratio(1, n, &z, &th).unwrap().value_re;
            assert!((0.0..=1.0).contains(&ratio));
            // the ratio equals the sin² share computed from θ_Z directly
            let r = sin2_identity_residual(1, &z, &p, &th).unwrap();
            assert!((ratio - r.sin2_term / (2.0 * r.moment)).abs() < 1e-10);
            assert_eq!(theta_z.len(), g.count());
        }
        let c = LineSeries::from_fn(g, "c", |_| Complex64::new(0.3, 0.4)).unwrap();
        let one = LineSeries::from_fn(g, "1", |_| Complex64::new(1.0, 0.0)).unwrap();
        let r = sin2_identity_residual(2, &c, &one, &phases(vec![0.0; g.count()], None)).unwrap();
        assert!(r.residual <= 1e-12 * r.moment, "{r:?}");
    }

    #[test]
    fn mass_on_set_limits_and_additivity() {
        let g = grid();
        let z = zeta_line(&g, 1e-8).unwrap();
        assert_eq!(mass_on_set(&z, &IntervalSet::new(vec![(0.0, 1000.0)])).unwrap(), 1.0);
        assert_eq!(mass_on_set(&z, &IntervalSet::empty()).unwrap(), 0.0);
        let a = IntervalSet::new(vec![(10.0, 20.0), (50.0, 51.0)]);
        let b = IntervalSet::new(vec![(30.0, 45.5)]);
        let sum = mass_on_set(&z, &a).unwrap() + mass_on_set(&z, &b).unwrap();
        assert!((mass_on_set(&z, &a.union(&b)).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn profile_normalisation() {
        let g = grid();
        let c = LineSeries::from_fn(g, "c", |_| Complex64::new(2.0, 0.0)).unwrap();
        let flat = density_profile(1, &c, 7).unwrap();
        for b in &flat {
            assert!((b.mass - 1.0 / 7.0).abs() < 1e-12);
        }
        let one = density_profile(2, &c, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].mass - 1.0).abs() < 1e-15);
        let z = zeta_line(&g, 1e-8).unwrap();
        let p = density_profile(1, &z, 13).unwrap();
        assert!((p.iter().map(|b| b.mass).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0].hi == w[1].lo));
        let mut out = Vec::new();
        write_histogram_csv(&p, &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("bin_lo,bin_hi,mass\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn zero_one_ratio_is_a_fraction(seed in proptest::collection::vec(-PI..PI, 16)) {
            let g = grid();
            let z = LineSeries::from_fn(g, "z", |t| Complex64::new((t * 0.3).sin() + 1.5, (t * 1.7).cos())).unwrap();
            let theta: Vec<f64> = (0..g.count()).map(|j| wrap_phase(seed[j % 16] + j as f64 * 1e-3)).collect();
            let r = zero_one_ratio(1, 0, &z, &phases(theta, None)).unwrap();
            prop_assert!(r.value_re >= 0.0 && r.value_re <= 1.0);
        }
    }
}
