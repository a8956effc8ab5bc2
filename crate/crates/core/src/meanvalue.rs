//! Time averages `(1/(t1 - t0)) ∫ ... dt` over a grid: inner products,
//! moments, Fourier coefficients and Besicovitch distances.
//!
//! Integrals use composite Simpson weights (a 3/8 panel closes an odd number
//! of intervals). Excluded points split the grid into runs; each run is
//! integrated on its own and the result is divided by the retained measure.
//! Sums are formed per fixed block and combined pairwise, so the result does
//! not depend on the thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximants::partial_sum_line;
use crate::error::{Error, Result};
use crate::zeros::IntervalSet;
use crate::zeta_eval::{pow_line, LineSeries, TGrid};

const BLOCK: usize = 4096;

/// Parameters identifying an estimate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<u32>,
    pub sigma: f64,
    pub t0: f64,
    #[serde(rename = "T")]
    pub t1: f64,
    pub h: f64,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    pub points: usize,
}

impl Params {
    pub fn of(grid: &TGrid) -> Self {
        Self {
            sigma: grid.sigma(),
            t0: grid.t0(),
            t1: grid.t1(),
            h: grid.h(),
            points: grid.count(),
            ..Self::default()
        }
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }
}

/// A time average together with a self-consistency error proxy: half the
/// change between the average over the first half of the range and over
/// the whole range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub value_re: f64,
    pub value_im: f64,
    pub error_proxy: f64,
    /// Length of `t` covered by retained points.
    pub retained_measure: f64,
    pub params: Params,
}

impl EstimateRecord {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

/// Simpson weights for a grid, optionally with excluded points, for the
/// whole range and for its first half.
#[derive(Clone, Debug)]
pub struct Quadrature {
    grid: TGrid,
    full: Vec<f64>,
    full_measure: f64,
    half: Vec<f64>,
    half_measure: f64,
}

/// Adds the weights of one run of `w.len()` consecutive retained points.
fn add_run_weights(w: &mut [f64], h: f64) {
    let n = w.len();
    match n {
        0 | 1 => {}
        2 => {
            w[0] += 0.5 * h;
            w[1] += 0.5 * h;
        }
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if intervals % 2 == 1 {
                let s = simpson_end;
                let c = 3.0 * h / 8.0;
                w[s] += c;
                w[s + 1] += 3.0 * c;
                w[s + 2] += 3.0 * c;
                w[s + 3] += c;
            }
        }
    }
}

fn run_weights(excluded: Option<&[bool]>, len: usize, h: f64) -> (Vec<f64>, f64) {
    let mut w = vec![0.0; len];
    let mut measure = 0.0;
    let mut start = 0;
    while start < len {
        if excluded.is_some_and(|e| e[start]) {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < len && !excluded.is_some_and(|e| e[end]) {
            end += 1;
        }
        add_run_weights(&mut w[start..end], h);
        measure += (end - start - 1) as f64 * h;
        start = end;
    }
    (w, measure)
}

fn pairwise<const M: usize>(parts: &[[Complex64; M]]) -> [Complex64; M] {
    match parts.len() {
        0 => [Complex64::new(0.0, 0.0); M],
        1 => parts[0],
        n => {
            let (a, b) = (pairwise(&parts[..n / 2]), pairwise(&parts[n / 2..]));
            std::array::from_fn(|i| a[i] + b[i])
        }
    }
}

impl Quadrature {
    pub fn new(grid: &TGrid, excluded: Option<&[bool]>) -> Result<Self> {
        let count = grid.count();
        if count < 3 {
            return Err(Error::TooFewPoints(count));
        }
        if let Some(e) = excluded {
            if e.len() != count {
                return Err(Error::InvalidGrid(format!("{} mask flags for {count} points", e.len())));
            }
        }
        let (full, full_measure) = run_weights(excluded, count, grid.h());
        if !(full_measure > 0.0) {
            return Err(Error::AllMasked);
        }
        let mid = grid.t0() + 0.5 * grid.span();
        let half_len = ((mid - grid.t0()) / grid.h() * (1.0 + 1e-12)).floor() as usize + 1;
        let (half, half_measure) = run_weights(excluded.map(|e| &e[..half_len]), half_len, grid.h());
        Ok(Self { grid: *grid, full, full_measure, half, half_measure })
    }

    /// Quadrature that skips grid points inside `mask`.
    pub fn excluding(grid: &TGrid, mask: &IntervalSet) -> Result<Self> {
        let flags: Vec<bool> = (0..grid.count()).map(|j| mask.contains(grid.t(j))).collect();
        Self::new(grid, Some(&flags))
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.full
    }

    pub fn measure(&self) -> f64 {
        self.full_measure
    }

    /// Integrals of `M` integrands sampled at each index, over the whole
    /// range and over its first half.
    pub fn integrate<const M: usize>(
        &self,
        g: impl Fn(usize) -> [Complex64; M] + Sync,
    ) -> ([Complex64; M], [Complex64; M]) {
        let parts: Vec<([Complex64; M], [Complex64; M])> = self
            .full
            .par_chunks(BLOCK)
            .enumerate()
            .map(|(b, w)| {
                let zero = [Complex64::new(0.0, 0.0); M];
                let (mut full, mut half) = (zero, zero);
                for (i, &wf) in w.iter().enumerate() {
                    let j = b * BLOCK + i;
                    let wh = self.half.get(j).copied().unwrap_or(0.0);
                    if wf == 0.0 && wh == 0.0 {
                        continue;
                    }
                    let v = g(j);
                    for m in 0..M {
                        full[m] += v[m] * wf;
                        half[m] += v[m] * wh;
                    }
                }
                (full, half)
            })
            .collect();
        let full: Vec<_> = parts.iter().map(|p| p.0).collect();
        let half: Vec<_> = parts.iter().map(|p| p.1).collect();
        (pairwise(&full), pairwise(&half))
    }

    /// Averages of `M` integrands, each with its error proxy.
    pub fn averages<const M: usize>(&self, g: impl Fn(usize) -> [Complex64; M] + Sync) -> [(Complex64, f64); M] {
        let (full, half) = self.integrate(g);
        std::array::from_fn(|m| {
            let v = full[m] / self.full_measure;
            let proxy = if self.half_measure > 0.0 { 0.5 * (v - half[m] / self.half_measure).norm() } else { 0.0 };
            (v, proxy)
        })
    }

    /// One average packaged with `params`.
    pub fn estimate(&self, params: Params, g: impl Fn(usize) -> Complex64 + Sync) -> EstimateRecord {
        let [(v, proxy)] = self.averages(|j| [g(j)]);
        EstimateRecord {
            value_re: v.re,
            value_im: v.im,
            error_proxy: proxy,
            retained_measure: self.full_measure,
            params,
        }
    }
}

/// `⟨f, g⟩ = (1/(t1 - t0)) ∫ f conj(g) dt`.
pub fn mean_inner(f: &LineSeries, g: &LineSeries) -> Result<EstimateRecord> {
    f.grid.same_as(&g.grid)?;
    let q = Quadrature::new(&f.grid, None)?;
    Ok(q.estimate(Params::of(&f.grid), |j| f.samples[j] * g.samples[j].conj()))
}

/// [`mean_inner`] over the grid points outside `mask`.
pub fn mean_inner_excluding(f: &LineSeries, g: &LineSeries, mask: &IntervalSet) -> Result<EstimateRecord> {
    f.grid.same_as(&g.grid)?;
    let q = Quadrature::excluding(&f.grid, mask)?;
    Ok(q.estimate(Params::of(&f.grid), |j| f.samples[j] * g.samples[j].conj()))
}

/// `M_k = ∫ |f|^{2k} dt` and its average `M_k / (t1 - t0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub integral: f64,
    pub normalized: EstimateRecord,
}

pub fn moment(k: u32, series: &LineSeries) -> Result<Moment> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order k must be >= 1".into()));
    }
    let q = Quadrature::new(&series.grid, None)?;
    let e = q.estimate(Params::of(&series.grid).with_k(k), |j| {
        Complex64::new(series.samples[j].norm_sqr().powi(k as i32), 0.0)
    });
    Ok(Moment { integral: e.value_re * q.measure(), normalized: e })
}

/// `(1/(t1 - t0)) ∫ f(t) e^{-iλt} dt`.
pub fn fourier_coeff(series: &LineSeries, lambda: f64) -> Result<EstimateRecord> {
    series.grid.check_nyquist(lambda)?;
    let grid = series.grid;
    let q = Quadrature::new(&grid, None)?;
    Ok(q.estimate(Params::of(&grid).with_lambda(lambda), |j| {
        series.samples[j] * Complex64::from_polar(1.0, -lambda * grid.t(j))
    }))
}

/// `‖ζ^k - f_N‖²` with `f_N` the partial Dirichlet sum of `ζ^k`.
pub fn besicovitch_dist2(k: u32, big_n: u64, zeta: &LineSeries) -> Result<EstimateRecord> {
    let sigma = zeta.grid.sigma();
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} is outside (1/2, 1)")));
    }
    let power = pow_line(zeta, k)?;
    let partial = partial_sum_line(k, big_n, &zeta.grid)?;
    let q = Quadrature::new(&zeta.grid, None)?;
    let mut e = q.estimate(Params::of(&zeta.grid).with_k(k).with_n(big_n), |j| {
        Complex64::new((power.samples[j] - partial.samples[j]).norm_sqr(), 0.0)
    });
    e.value_im = 0.0;
    Ok(e)
}
