//! Dense evaluation of finite Dirichlet polynomials `Σ a_n e^{-it log n}` on
//! uniform grids.
//!
//! Each term is carried as a unit rotation advanced by `e^{-ih log n}` per
//! grid step, so a grid point costs one complex multiply-add per term. The
//! rotations are re-seeded from direct exponentials every [`RESEED`] steps,
//! which bounds the multiplicative drift. Terms are processed in cache-sized
//! blocks with a fixed lane layout; the arithmetic is identical on every
//! instruction set, so results are bit-reproducible for a given chunking.

use num_complex::Complex64;
use rayon::prelude::*;

/// Steps between re-seeding the rotations from direct exponentials.
pub const RESEED: usize = 1 << 12;

/// Grid points per parallel work unit unless the caller overrides it.
pub const DEFAULT_CHUNK: usize = RESEED;

const LANES: usize = 8;
const BLOCK: usize = 512;

/// Frequencies `log n` and real amplitudes `a_n` of a Dirichlet polynomial.
#[derive(Clone, Debug, Default)]
pub struct DirichletTerms {
    pub log_n: Vec<f64>,
    pub amp: Vec<f64>,
}

impl DirichletTerms {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, n: u64, amp: f64) {
        self.log_n.push((n as f64).ln());
        self.amp.push(amp);
    }

    pub fn len(&self) -> usize {
        self.log_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_n.is_empty()
    }

    /// The first `len` terms.
    pub fn prefix(&self, len: usize) -> TermSlice<'_> {
        TermSlice { log_n: &self.log_n[..len], amp: &self.amp[..len] }
    }

    pub fn all(&self) -> TermSlice<'_> {
        self.prefix(self.len())
    }

    pub fn max_frequency(&self) -> f64 {
        self.log_n.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TermSlice<'a> {
    pub log_n: &'a [f64],
    pub amp: &'a [f64],
}

impl TermSlice<'_> {
    /// Direct evaluation at a single `t`.
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&l, &a) in self.log_n.iter().zip(self.amp) {
            let (s, c) = (t * l).sin_cos();
            acc += Complex64::new(a * c, -a * s);
        }
        acc
    }
}

const ROWS: usize = BLOCK / LANES;

type Row = [f64; LANES];

struct Block {
    re: [Row; ROWS],
    im: [Row; ROWS],
    wr: [Row; ROWS],
    wi: [Row; ROWS],
}

impl Block {
    fn new() -> Box<Self> {
        Box::new(Block {
            re: [[0.0; LANES]; ROWS],
            im: [[0.0; LANES]; ROWS],
            wr: [[1.0; LANES]; ROWS],
            wi: [[0.0; LANES]; ROWS],
        })
    }

    /// Loads terms as rotations at `t`; returns the number of rows in use.
    fn seed(&mut self, terms: TermSlice<'_>, t: f64, h: f64) -> usize {
        let len = terms.log_n.len();
        let rows = len.div_ceil(LANES);
        for i in 0..rows * LANES {
            let (r, l) = (i / LANES, i % LANES);
            if i < len {
                let lg = terms.log_n[i];
                let a = terms.amp[i];
                let (s, c) = (t * lg).sin_cos();
                self.re[r][l] = a * c;
                self.im[r][l] = -a * s;
                let (sh, ch) = (h * lg).sin_cos();
                self.wr[r][l] = ch;
                self.wi[r][l] = -sh;
            } else {
                self.re[r][l] = 0.0;
                self.im[r][l] = 0.0;
                self.wr[r][l] = 1.0;
                self.wi[r][l] = 0.0;
            }
        }
        rows
    }
}

#[inline(always)]
fn rotate(r: &mut Row, i: &mut Row, c: &Row, s: &Row) {
    for l in 0..LANES {
        let nr = r[l] * c[l] - i[l] * s[l];
        let ni = r[l] * s[l] + i[l] * c[l];
        r[l] = nr;
        i[l] = ni;
    }
}

#[inline(always)]
fn add(acc: &mut Row, v: &Row) {
    for l in 0..LANES {
        acc[l] += v[l];
    }
}

/// Sums the current values and advances every rotation by one step.
/// Two interleaved accumulators shorten the add dependency chain.
#[inline(always)]
fn step_generic(re: &mut [Row], im: &mut [Row], wr: &[Row], wi: &[Row]) -> (f64, f64) {
    let mut a = [[0.0f64; LANES]; 4];
    let rows = re.len();
    let mut j = 0;
    while j + 1 < rows {
        add(&mut a[0], &re[j]);
        add(&mut a[1], &im[j]);
        add(&mut a[2], &re[j + 1]);
        add(&mut a[3], &im[j + 1]);
        rotate(&mut re[j], &mut im[j], &wr[j], &wi[j]);
        rotate(&mut re[j + 1], &mut im[j + 1], &wr[j + 1], &wi[j + 1]);
        j += 2;
    }
    if j < rows {
        add(&mut a[0], &re[j]);
        add(&mut a[1], &im[j]);
        rotate(&mut re[j], &mut im[j], &wr[j], &wi[j]);
    }
    let [r0, i0, r1, i1] = a;
    let mut ar = r0;
    let mut ai = i0;
    add(&mut ar, &r1);
    add(&mut ai, &i1);
    (fold(ar), fold(ai))
}

#[inline(always)]
fn fold(v: Row) -> f64 {
    ((v[0] + v[4]) + (v[2] + v[6])) + ((v[1] + v[5]) + (v[3] + v[7]))
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use super::{fold, Block, LANES};
    use num_complex::Complex64;
    use std::arch::x86_64::*;

    /// Same operation order as the portable kernel, one row per register.
    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn run_block_avx512(block: &mut Block, rows: usize, out: &mut [Complex64]) {
        let re = block.re.as_mut_ptr() as *mut f64;
        let im = block.im.as_mut_ptr() as *mut f64;
        let wr = block.wr.as_ptr() as *const f64;
        let wi = block.wi.as_ptr() as *const f64;
        // SAFETY: every offset below is `j * LANES` with `j < rows <= ROWS`.
        unsafe {
            let rot = |j: usize| {
                let o = j * LANES;
                let r = _mm512_loadu_pd(re.add(o));
                let i = _mm512_loadu_pd(im.add(o));
                let c = _mm512_loadu_pd(wr.add(o));
                let s = _mm512_loadu_pd(wi.add(o));
                let nr = _mm512_sub_pd(_mm512_mul_pd(r, c), _mm512_mul_pd(i, s));
                let ni = _mm512_add_pd(_mm512_mul_pd(r, s), _mm512_mul_pd(i, c));
                _mm512_storeu_pd(re.add(o), nr);
                _mm512_storeu_pd(im.add(o), ni);
                (r, i)
            };
            for o in out.iter_mut() {
                let mut a0 = _mm512_setzero_pd();
                let mut a1 = _mm512_setzero_pd();
                let mut a2 = _mm512_setzero_pd();
                let mut a3 = _mm512_setzero_pd();
                let mut j = 0;
                while j + 1 < rows {
                    let (r0, i0) = rot(j);
                    let (r1, i1) = rot(j + 1);
                    a0 = _mm512_add_pd(a0, r0);
                    a1 = _mm512_add_pd(a1, i0);
                    a2 = _mm512_add_pd(a2, r1);
                    a3 = _mm512_add_pd(a3, i1);
                    j += 2;
                }
                if j < rows {
                    let (r0, i0) = rot(j);
                    a0 = _mm512_add_pd(a0, r0);
                    a1 = _mm512_add_pd(a1, i0);
                }
                let mut ar = [0.0; LANES];
                let mut ai = [0.0; LANES];
                _mm512_storeu_pd(ar.as_mut_ptr(), _mm512_add_pd(a0, a2));
                _mm512_storeu_pd(ai.as_mut_ptr(), _mm512_add_pd(a1, a3));
                o.re += fold(ar);
                o.im += fold(ai);
            }
        }
    }

    /// Same operation order as the portable kernel, one row per register pair.
    #[target_feature(enable = "avx2")]
    pub(super) unsafe fn run_block_avx2(block: &mut Block, rows: usize, out: &mut [Complex64]) {
        let re = block.re.as_mut_ptr() as *mut f64;
        let im = block.im.as_mut_ptr() as *mut f64;
        let wr = block.wr.as_ptr() as *const f64;
        let wi = block.wi.as_ptr() as *const f64;
        // SAFETY: every offset below is at most `j * LANES + 4` with `j < rows <= ROWS`.
        unsafe {
            let rot = |o: usize| {
                let r = _mm256_loadu_pd(re.add(o));
                let i = _mm256_loadu_pd(im.add(o));
                let c = _mm256_loadu_pd(wr.add(o));
                let s = _mm256_loadu_pd(wi.add(o));
                let nr = _mm256_sub_pd(_mm256_mul_pd(r, c), _mm256_mul_pd(i, s));
                let ni = _mm256_add_pd(_mm256_mul_pd(r, s), _mm256_mul_pd(i, c));
                _mm256_storeu_pd(re.add(o), nr);
                _mm256_storeu_pd(im.add(o), ni);
                (r, i)
            };
            for o in out.iter_mut() {
                let z = _mm256_setzero_pd();
                let (mut a0l, mut a0h, mut a1l, mut a1h) = (z, z, z, z);
                let (mut a2l, mut a2h, mut a3l, mut a3h) = (z, z, z, z);
                let mut j = 0;
                while j + 1 < rows {
                    let (r0l, i0l) = rot(j * LANES);
                    let (r0h, i0h) = rot(j * LANES + 4);
                    let (r1l, i1l) = rot((j + 1) * LANES);
                    let (r1h, i1h) = rot((j + 1) * LANES + 4);
                    a0l = _mm256_add_pd(a0l, r0l);
                    a0h = _mm256_add_pd(a0h, r0h);
                    a1l = _mm256_add_pd(a1l, i0l);
                    a1h = _mm256_add_pd(a1h, i0h);
                    a2l = _mm256_add_pd(a2l, r1l);
                    a2h = _mm256_add_pd(a2h, r1h);
                    a3l = _mm256_add_pd(a3l, i1l);
                    a3h = _mm256_add_pd(a3h, i1h);
                    j += 2;
                }
                if j < rows {
                    let (r0l, i0l) = rot(j * LANES);
                    let (r0h, i0h) = rot(j * LANES + 4);
                    a0l = _mm256_add_pd(a0l, r0l);
                    a0h = _mm256_add_pd(a0h, r0h);
                    a1l = _mm256_add_pd(a1l, i0l);
                    a1h = _mm256_add_pd(a1h, i0h);
                }
                let mut ar = [0.0; LANES];
                let mut ai = [0.0; LANES];
                _mm256_storeu_pd(ar.as_mut_ptr(), _mm256_add_pd(a0l, a2l));
                _mm256_storeu_pd(ar.as_mut_ptr().add(4), _mm256_add_pd(a0h, a2h));
                _mm256_storeu_pd(ai.as_mut_ptr(), _mm256_add_pd(a1l, a3l));
                _mm256_storeu_pd(ai.as_mut_ptr().add(4), _mm256_add_pd(a1h, a3h));
                o.re += fold(ar);
                o.im += fold(ai);
            }
        }
    }
}

#[inline(always)]
fn run_block_body(block: &mut Block, rows: usize, out: &mut [Complex64]) {
    let Block { re, im, wr, wi } = block;
    let (re, im, wr, wi) = (&mut re[..rows], &mut im[..rows], &wr[..rows], &wi[..rows]);
    for o in out.iter_mut() {
        let (sr, si) = step_generic(re, im, wr, wi);
        o.re += sr;
        o.im += si;
    }
}

fn run_block(block: &mut Block, rows: usize, out: &mut [Complex64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { simd::run_block_avx512(block, rows, out) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { simd::run_block_avx2(block, rows, out) };
        }
    }
    run_block_body(block, rows, out)
}

/// Adds `Σ a_n e^{-i t_j log n}` for `t_j = t_start + j·h` into `out`.
pub fn sweep_into(terms: TermSlice<'_>, t_start: f64, h: f64, out: &mut [Complex64]) {
    let mut block = Block::new();
    for (piece, sub) in out.chunks_mut(RESEED).enumerate() {
        let t = t_start + (piece * RESEED) as f64 * h;
        let mut start = 0;
        while start < terms.log_n.len() {
            let end = (start + BLOCK).min(terms.log_n.len());
            let slice = TermSlice { log_n: &terms.log_n[start..end], amp: &terms.amp[start..end] };
            let rows = block.seed(slice, t, h);
            run_block(&mut block, rows, sub);
            start = end;
        }
    }
}

/// Evaluates the polynomial on `t0 + j·h`, `j < count`, in parallel chunks.
pub fn sweep_grid(terms: TermSlice<'_>, t0: f64, h: f64, count: usize, chunk: usize) -> Vec<Complex64> {
    let chunk = chunk.max(1);
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    out.par_chunks_mut(chunk).enumerate().for_each(|(c, piece)| {
        sweep_into(terms, t0 + (c * chunk) as f64 * h, h, piece);
    });
    out
}

/// Largest `| |e^{-it log n}| - 1 |` over all terms after `steps` unrenormalised
/// rotation steps from `t0`; used to check the re-seeding interval.
pub fn rotation_drift(log_n: &[f64], t0: f64, h: f64, steps: usize) -> f64 {
    let mut worst = 0.0f64;
    for &l in log_n {
        let (s, c) = (t0 * l).sin_cos();
        let mut z = Complex64::new(c, -s);
        let (sh, ch) = (h * l).sin_cos();
        let w = Complex64::new(ch, -sh);
        for _ in 0..steps {
            z = Complex64::new(z.re * w.re - z.im * w.im, z.re * w.im + z.im * w.re);
        }
        worst = worst.max((z.norm() - 1.0).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(n_max: u64, sigma: f64) -> DirichletTerms {
        let mut t = DirichletTerms::new();
        for n in 1..=n_max {
            t.push(n, (n as f64).powf(-sigma));
        }
        t
    }

    #[test]
    fn sweep_matches_direct_sum() {
        let terms = terms(1500, 0.7);
        let (t0, h, count) = (1000.0, 0.013, 9000);
        let swept = sweep_grid(terms.all(), t0, h, count, 2500);
        for j in (0..count).step_by(97) {
            let direct = terms.all().eval(t0 + j as f64 * h);
            assert!((swept[j] - direct).norm() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn chunking_does_not_change_accuracy() {
        let terms = terms(700, 0.5);
        let a = sweep_grid(terms.all(), 5.0, 0.02, 10_000, 10_000);
        let b = sweep_grid(terms.all(), 5.0, 0.02, 10_000, 333);
        let worst = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-11, "{worst}");
        // and the same chunking is bit-reproducible
        assert_eq!(b, sweep_grid(terms.all(), 5.0, 0.02, 10_000, 333));
    }

    #[test]
    fn reseed_interval_bounds_drift() {
        let log_n: Vec<f64> = (1..20_000u64).step_by(7).map(|n| (n as f64).ln()).collect();
        assert!(rotation_drift(&log_n, 1.0e5, 0.01, RESEED) < 1e-12);
    }

    #[test]
    fn vector_kernels_match_portable_bits() {
        // 333 terms: an odd row count with a padded final row
        let terms = terms(333, 0.6);
        let run = |kernel: &dyn Fn(&mut Block, usize, &mut [Complex64])| {
            let mut block = Block::new();
            let rows = block.seed(terms.all(), 123.4, 0.017);
            let mut out = vec![Complex64::new(0.0, 0.0); 300];
            kernel(&mut block, rows, &mut out);
            out
        };
        let portable = run(&|b, r, o| run_block_body(b, r, o));
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx512f") {
                // SAFETY: the feature was detected at runtime.
                assert_eq!(portable, run(&|b, r, o| unsafe { simd::run_block_avx512(b, r, o) }));
            }
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the feature was detected at runtime.
                assert_eq!(portable, run(&|b, r, o| unsafe { simd::run_block_avx2(b, r, o) }));
            }
        }
        assert_eq!(portable, run(&run_block));
    }

    #[test]
    fn empty_terms_give_zero() {
        let empty = DirichletTerms::new();
        assert!(sweep_grid(empty.all(), 1.0, 0.1, 5, 2).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}
