//! Tables of zeta-zero ordinates and the exclusion sets built around them.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zeta_eval::zeta_point;

/// Finite union of disjoint half-open intervals `[a, b)`, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Normalises arbitrary intervals: empty or non-finite pieces are
    /// dropped, the rest sorted and overlapping or touching pieces merged.
    pub fn new(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(a, b)| a.is_finite() && b.is_finite() && a < b);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        let i = self.intervals.partition_point(|&(a, _)| a <= t);
        i > 0 && t < self.intervals[i - 1].1
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.intervals.iter().chain(&other.intervals).copied().collect())
    }

    /// Intersection with `[lo, hi)`.
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        IntervalSet::new(self.intervals.iter().map(|&(a, b)| (a.max(lo), b.min(hi))).collect())
    }
}

/// Strictly increasing ordinates of zeros on the critical line.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    pub source: String,
}

/// The first zero lies at 14.1347...; anything lower means a corrupt file.
const FIRST_ZERO_FLOOR: f64 = 14.0;

impl ZeroTable {
    pub fn new(ordinates: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        let lines: Vec<usize> = (1..=ordinates.len()).collect();
        Self::checked(ordinates, &lines, source.into())
    }

    fn checked(ordinates: Vec<f64>, lines: &[usize], source: String) -> Result<Self> {
        let first = *ordinates.first().ok_or(Error::EmptyZeroTable)?;
        if !(first > FIRST_ZERO_FLOOR) {
            return Err(Error::ZeroTableFloor { line: lines[0], value: first });
        }
        for (i, w) in ordinates.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::ZeroTableNotIncreasing { line: lines[i + 1], value: w[1], previous: w[0] });
            }
        }
        Ok(Self { ordinates, source })
    }

    /// Parses one ordinate per line; blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(reader: R, source: impl Into<String>) -> Result<Self> {
        let mut ordinates = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let value: f64 = text
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::ZeroTableParse { line: i + 1, text: text.to_string() })?;
            ordinates.push(value);
            lines.push(i + 1);
        }
        Self::checked(ordinates, &lines, source.into())
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// Ordinates inside `[lo, hi]`.
    pub fn between(&self, lo: f64, hi: f64) -> &[f64] {
        let a = self.ordinates.partition_point(|&g| g < lo);
        let b = self.ordinates.partition_point(|&g| g <= hi);
        &self.ordinates[a..b.max(a)]
    }
}

pub fn load_zero_table(path: impl AsRef<Path>) -> Result<ZeroTable> {
    let path = path.as_ref();
    let file = File::open(path)?;
    ZeroTable::parse(BufReader::new(file), path.display().to_string())
}

/// Union of `(γ - δ, γ + δ)` over all ordinates, clipped to `[t0, t1]`.
pub fn neighborhoods(zeros: &ZeroTable, delta: f64, t0: f64, t1: f64) -> Result<IntervalSet> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("neighbourhood radius must be positive, got {delta}")));
    }
    let near = zeros.between(t0 - delta, t1 + delta);
    Ok(IntervalSet::new(near.iter().map(|&g| (g - delta, g + delta)).collect()).clip(t0, t1))
}

/// `#{γ <= t}`.
pub fn count_zeros(zeros: &ZeroTable, t: f64) -> usize {
    zeros.ordinates.partition_point(|&g| g <= t)
}

/// Where `|ζ(1/2 + it)|` is smallest near a tabulated ordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalMinimum {
    pub ordinate: f64,
    pub t_min: f64,
    pub modulus: f64,
}

fn critical_modulus(t: f64) -> Result<f64> {
    Ok(zeta_point(Complex64::new(0.5, t), 1e-12)?.norm())
}

/// Minimises `|ζ(1/2 + it)|` over `[γ - window, γ + window]`: a coarse scan
/// followed by golden-section refinement around the best sample.
pub fn local_minimum(ordinate: f64, window: f64) -> Result<LocalMinimum> {
    const SAMPLES: usize = 40;
    let lo = ordinate - window;
    let step = 2.0 * window / SAMPLES as f64;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=SAMPLES {
        let t = lo + i as f64 * step;
        let m = critical_modulus(t)?;
        if m < best.1 {
            best = (t, m);
        }
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (critical_modulus(c)?, critical_modulus(d)?);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = critical_modulus(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = critical_modulus(d)?;
        }
    }
    let t_min = 0.5 * (a + b);
    let modulus = critical_modulus(t_min)?.min(best.1);
    Ok(LocalMinimum { ordinate, t_min, modulus })
}

/// Cross-checks every ordinate up to `t_max` against the evaluator; returns
/// the ones whose local minimum of `|ζ|` is not below `threshold`.
pub fn validate_ordinates(zeros: &ZeroTable, t_max: f64, window: f64, threshold: f64) -> Result<Vec<LocalMinimum>> {
    let mut bad = Vec::new();
    for &g in zeros.between(0.0, t_max) {
        let m = local_minimum(g, window)?;
        if !(m.modulus < threshold) {
            bad.push(m);
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOW: &str = "14.134725\n21.022040\n25.010858\n";

    #[test]
    fn parse_three_low_zeros() {
        let z = ZeroTable::parse(LOW.as_bytes(), "inline").unwrap();
        assert_eq!(z.ordinates(), &[14.134725, 21.022040, 25.010858]);
        assert_eq!(count_zeros(&z, 14.0), 0);
        assert_eq!(count_zeros(&z, 30.0), 3);
        assert_eq!(count_zeros(&z, 21.02204), 2);
    }

    #[test]
    fn comments_and_blank_lines() {
        let z = ZeroTable::parse("# header\n\n  14.5 \n#x\n20\n".as_bytes(), "inline").unwrap();
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(ZeroTable::parse("".as_bytes(), ""), Err(Error::EmptyZeroTable)));
        assert!(matches!(ZeroTable::parse("# only\n".as_bytes(), ""), Err(Error::EmptyZeroTable)));
        assert!(matches!(
            ZeroTable::parse("21.0\n14.5\n".as_bytes(), ""),
            Err(Error::ZeroTableNotIncreasing { line: 2, .. })
        ));
        assert!(matches!(
            ZeroTable::parse("14.5\n14.5\n".as_bytes(), ""),
            Err(Error::ZeroTableNotIncreasing { .. })
        ));
        assert!(matches!(
            ZeroTable::parse("14.5\nabc\n".as_bytes(), ""),
            Err(Error::ZeroTableParse { line: 2, .. })
        ));
        assert!(matches!(ZeroTable::parse("3.0\n".as_bytes(), ""), Err(Error::ZeroTableFloor { .. })));
        assert!(matches!(ZeroTable::parse("nan\n".as_bytes(), ""), Err(Error::ZeroTableParse { .. })));
    }

    #[test]
    fn decimal_strings_parse_to_nearest_double() {
        let z = ZeroTable::parse("14.134725141734693790\n".as_bytes(), "").unwrap();
        assert_eq!(z.ordinates()[0], 14.134725141734694);
    }

    #[test]
    fn separated_neighbourhoods_have_exact_measure() {
        let z = ZeroTable::parse(LOW.as_bytes(), "").unwrap();
        let s = neighborhoods(&z, 0.05, 1.0, 100.0).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.total_measure() - 0.3).abs() < 1e-12);
        assert!(s.contains(14.134725) && !s.contains(14.2));
    }

    #[test]
    fn overlapping_neighbourhoods_merge() {
        let z = ZeroTable::new(vec![20.0, 20.5, 30.0], "").unwrap();
        let s = neighborhoods(&z, 0.4, 1.0, 100.0).unwrap();
        assert_eq!(s.intervals(), &[(19.6, 20.9), (29.6, 30.4)]);
    }

    #[test]
    fn range_without_zeros_is_empty() {
        let z = ZeroTable::parse(LOW.as_bytes(), "").unwrap();
        assert!(neighborhoods(&z, 0.05, 1.0, 10.0).unwrap().is_empty());
        assert!(neighborhoods(&z, 0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn clipping_at_the_range_ends() {
        let z = ZeroTable::new(vec![14.5, 30.0], "").unwrap();
        let s = neighborhoods(&z, 1.0, 14.0, 30.5).unwrap();
        assert_eq!(s.intervals(), &[(14.0, 15.5), (29.0, 30.5)]);
    }

    #[test]
    fn low_zeros_are_minima_of_the_evaluator() {
        let z = ZeroTable::new(vec![14.134725141734694, 21.022039638771555, 25.010_857_580_145_69], "").unwrap();
        assert!(validate_ordinates(&z, 100.0, 0.05, 1e-6).unwrap().is_empty());
        let m = local_minimum(14.134725, 0.05).unwrap();
        assert!((m.t_min - 14.134725141734694).abs() < 1e-7, "{m:?}");
        // a point between zeros is not a zero
        let fake = ZeroTable::new(vec![17.5], "").unwrap();
        assert_eq!(validate_ordinates(&fake, 100.0, 0.05, 1e-3).unwrap().len(), 1);
    }

    proptest! {
        #[test]
        fn normalisation_is_idempotent(raw in proptest::collection::vec((0.0f64..100.0, 0.0f64..5.0), 0..40)) {
            let s = IntervalSet::new(raw.iter().map(|&(a, w)| (a, a + w)).collect());
            let again = IntervalSet::new(s.intervals().to_vec());
            prop_assert_eq!(&again, &s);
            prop_assert!(s.intervals().windows(2).all(|w| w[0].1 < w[1].0));
            let naive: f64 = raw.iter().map(|&(_, w)| w).sum();
            prop_assert!(s.total_measure() <= naive + 1e-9);
        }

        #[test]
        fn membership_matches_intervals(raw in proptest::collection::vec((0.0f64..50.0, 0.01f64..3.0), 0..20), t in 0.0f64..60.0) {
            let pieces: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, a + w)).collect();
            let s = IntervalSet::new(pieces.clone());
            prop_assert_eq!(s.contains(t), pieces.iter().any(|&(a, b)| a <= t && t < b));
        }
    }
}
