use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform samples `t_j = t0 + j·h`, `j < count`, of the vertical segment
/// `{sigma + it : t0 <= t <= t1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    sigma: f64,
    t0: f64,
    t1: f64,
    h: f64,
    count: usize,
}

impl TGrid {
    /// `count = floor((t1 - t0)/h) + 1`; the last sample may fall short of
    /// `t1` by less than `h`.
    pub fn new(sigma: f64, t0: f64, t1: f64, h: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::InvalidGrid(format!("sigma = {sigma} is outside (0, 1]")));
        }
        if !(t0 >= 1.0) || !t1.is_finite() {
            return Err(Error::InvalidGrid(format!("t0 = {t0} must be >= 1")));
        }
        if !(t1 > t0) {
            return Err(Error::InvalidGrid(format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("step h = {h} must be positive")));
        }
        let steps = ((t1 - t0) / h * (1.0 + 1e-12)).floor();
        if steps > (usize::MAX / 2) as f64 {
            return Err(Error::InvalidGrid("too many grid points".into()));
        }
        Ok(Self { sigma, t0, t1, h, count: steps as usize + 1 })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    /// Requested upper end `T`.
    pub fn t1(&self) -> f64 {
        self.t1
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.h
    }

    /// Last sample ordinate.
    pub fn t_last(&self) -> f64 {
        self.t(self.count - 1)
    }

    /// Length `t_last - t0` covered by the samples.
    pub fn span(&self) -> f64 {
        (self.count - 1) as f64 * self.h
    }

    /// Largest angular frequency the grid resolves.
    pub fn nyquist(&self) -> f64 {
        PI / self.h
    }

    /// Checks `h · max_frequency < π`.
    pub fn check_nyquist(&self, max_frequency: f64) -> Result<()> {
        if self.h * max_frequency.abs() < PI {
            Ok(())
        } else {
            Err(Error::AboveNyquist { lambda: max_frequency, bound: self.nyquist() })
        }
    }

    /// Default step resolving the fastest oscillation `e^{it log n_max}`.
    pub fn default_step(n_max: f64) -> f64 {
        0.05 / n_max.max(3.0).ln()
    }

    /// The same grid cut off at a lower end `t1`; its samples are a prefix.
    pub fn truncated(&self, t1: f64) -> Result<Self> {
        if !(t1 <= self.t1) {
            return Err(Error::InvalidGrid(format!("cannot extend a grid ending at {} to {t1}", self.t1)));
        }
        TGrid::new(self.sigma, self.t0, t1, self.h)
    }

    pub(crate) fn same_as(&self, other: &TGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Complex samples of a function on a [`TGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct LineSeries {
    pub grid: TGrid,
    pub samples: Vec<Complex64>,
    pub label: String,
}

const BINARY_MAGIC: [u8; 4] = *b"ZLSR";
const BINARY_VERSION: u32 = 1;

impl LineSeries {
    pub fn new(grid: TGrid, samples: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::InvalidGrid(format!("{} samples for {} grid points", samples.len(), grid.count())));
        }
        if let Some(j) = samples.iter().position(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at t = {}", grid.t(j))));
        }
        Ok(Self { grid, samples, label: label.into() })
    }

    /// Samples `f(t_j)` of a closure.
    pub fn from_fn(grid: TGrid, label: impl Into<String>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = (0..grid.count()).map(|j| f(grid.t(j))).collect();
        Self::new(grid, samples, label)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Pointwise map into a new series on the same grid.
    pub fn map(&self, label: impl Into<String>, f: impl Fn(Complex64) -> Complex64) -> LineSeries {
        LineSeries { grid: self.grid, samples: self.samples.iter().map(|&z| f(z)).collect(), label: label.into() }
    }

    /// Prefix of the series on [`TGrid::truncated`].
    pub fn truncated(&self, t1: f64) -> Result<LineSeries> {
        let grid = self.grid.truncated(t1)?;
        let samples = self.samples[..grid.count().min(self.len())].to_vec();
        LineSeries::new(grid, samples, self.label.clone())
    }

    /// Pointwise combination of two series on the same grid.
    pub fn zip_with(
        &self,
        other: &LineSeries,
        label: impl Into<String>,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<LineSeries> {
        self.grid.same_as(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Ok(LineSeries { grid: self.grid, samples, label: label.into() })
    }

    /// `t,re,im` rows, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re,im")?;
        for (j, z) in self.samples.iter().enumerate() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.grid.t(j), z.re, z.im)?;
        }
        Ok(())
    }

    /// Parses `t,re,im` rows back into `(t, z)` pairs.
    pub fn read_csv<R: Read>(mut r: R) -> Result<Vec<(f64, Complex64)>> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut lines = text.lines();
        if lines.next() != Some("t,re,im") {
            return Err(Error::Format("missing t,re,im header".into()));
        }
        lines
            .map(|line| {
                let fields: Vec<f64> = line
                    .split(',')
                    .map(|f| f.parse::<f64>().map_err(|e| Error::Format(format!("{line:?}: {e}"))))
                    .collect::<Result<_>>()?;
                match fields.as_slice() {
                    [t, re, im] => Ok((*t, Complex64::new(*re, *im))),
                    _ => Err(Error::Format(format!("expected 3 fields in {line:?}"))),
                }
            })
            .collect()
    }

    /// Binary form: magic `ZLSR`, u32 version, u64 count (16 bytes, little
    /// endian), then `re, im` f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        for z in &self.samples {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<Complex64>> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if header[..4] != BINARY_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let mut buf = vec![0u8; count * 16];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect())
    }
}
