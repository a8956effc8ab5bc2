//! Arithmetic functions on `1..=n_max`: divisor functions, von Mangoldt
//! weights and their smoothed variant, Dirichlet convolution and the
//! Dirichlet-series exponential.

use std::fmt::Debug;
use std::io::Write;

use crate::error::{Error, Result};

/// Whether a table holds exact integers or floating-point weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Exact,
    Floating,
}

/// Scalar types a [`CoeffTable`] can hold.
pub trait Coefficient: Copy + PartialEq + Debug + Send + Sync {
    const KIND: TableKind;
    fn zero() -> Self;
    fn one() -> Self;
    /// `acc + a * b`, or `None` if the result is not representable.
    fn checked_mul_add(acc: Self, a: Self, b: Self) -> Option<Self>;
    fn to_f64(self) -> f64;
    fn csv_field(self) -> String;
}

impl Coefficient for u64 {
    const KIND: TableKind = TableKind::Exact;
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn checked_mul_add(acc: Self, a: Self, b: Self) -> Option<Self> {
        a.checked_mul(b)?.checked_add(acc)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn csv_field(self) -> String {
        self.to_string()
    }
}

impl Coefficient for f64 {
    const KIND: TableKind = TableKind::Floating;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn checked_mul_add(acc: Self, a: Self, b: Self) -> Option<Self> {
        let r = a.mul_add(b, acc);
        r.is_finite().then_some(r)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn csv_field(self) -> String {
        format!("{self:.16e}")
    }
}

/// Values `c(1), ..., c(n_max)` of an arithmetic function.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable<T> {
    values: Vec<T>,
}

impl<T: Coefficient> CoeffTable<T> {
    /// Builds a table from `c(1), c(2), ...`.
    pub fn from_values(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("coefficient table needs n_max >= 1".into()));
        }
        Ok(Self { values })
    }

    pub fn from_fn(n_max: usize, f: impl Fn(usize) -> T) -> Result<Self> {
        Self::from_values((1..=n_max).map(f).collect())
    }

    /// The Dirichlet identity: 1 at n = 1 and 0 elsewhere.
    pub fn unit(n_max: usize) -> Result<Self> {
        Self::from_fn(n_max, |n| if n == 1 { T::one() } else { T::zero() })
    }

    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    pub fn kind(&self) -> TableKind {
        T::KIND
    }

    /// `c(n)` for `1 <= n <= n_max`.
    pub fn get(&self, n: usize) -> T {
        assert!(n >= 1 && n <= self.values.len(), "index {n} outside 1..={}", self.values.len());
        self.values[n - 1]
    }

    /// Values starting at `n = 1`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (usize, T)> + ExactSizeIterator + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }

    pub fn to_f64(&self) -> CoeffTable<f64> {
        CoeffTable { values: self.values.iter().map(|v| v.to_f64()).collect() }
    }

    /// Writes `n,value` rows under a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,value")?;
        for (n, v) in self.iter() {
            writeln!(w, "{n},{}", v.csv_field())?;
        }
        Ok(())
    }
}

/// Returns `(p, m)` when `n = p^m` for a prime `p` and `m >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let p = smallest_prime_factor(n);
    let mut rest = n;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d <= n / d {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

/// The von Mangoldt function: `log p` when `n = p^m`, else 0.
pub fn von_mangoldt(n: u64) -> f64 {
    match prime_power(n) {
        Some((p, _)) => (p as f64).ln(),
        None => 0.0,
    }
}

/// Smallest prime factor of every `n <= n_max` (0 and 1 map to themselves).
pub fn spf_sieve(n_max: usize) -> Vec<u32> {
    assert!(n_max < u32::MAX as usize);
    let mut spf = vec![0u32; n_max + 1];
    let mut primes = Vec::new();
    for i in 2..=n_max {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > n_max {
                break;
            }
            spf[ip] = p;
        }
    }
    if n_max >= 1 {
        spf[1] = 1;
    }
    spf
}

/// Primes up to and including `n`, by the sieve of Eratosthenes.
pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// `Λ(n)` for all `n <= n_max`, using a smallest-prime-factor sieve.
pub fn mangoldt_table(n_max: usize) -> Result<CoeffTable<f64>> {
    let spf = spf_sieve(n_max);
    CoeffTable::from_fn(n_max, |n| {
        if n < 2 {
            return 0.0;
        }
        let p = spf[n] as usize;
        let mut rest = n;
        while rest % p == 0 {
            rest /= p;
        }
        if rest == 1 {
            (p as f64).ln()
        } else {
            0.0
        }
    })
}

/// Taper applied to `Λ(n)`: 1 up to `N`, linear in `log n` down to 0 at `N²`.
pub fn smoothing_weight(n: u64, big_n: u64) -> f64 {
    if n <= big_n {
        1.0
    } else if n >= big_n * big_n {
        0.0
    } else {
        (2.0 - (n as f64).ln() / (big_n as f64).ln()).clamp(0.0, 1.0)
    }
}

/// `Λ_N(n)` on `1..=N²`: equal to `Λ(n)` for `n <= N` and tapered as
/// `Λ(n)(2 - log n / log N)` on `(N, N²]`.
pub fn smoothed_mangoldt_table(big_n: u64) -> Result<CoeffTable<f64>> {
    if big_n < 2 {
        return Err(Error::InvalidParameter(format!("smoothed von Mangoldt needs N >= 2, got {big_n}")));
    }
    let n_max = big_n
        .checked_mul(big_n)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or(Error::Overflow("N^2"))?;
    let lambda = mangoldt_table(n_max)?;
    CoeffTable::from_fn(n_max, |n| {
        let l = lambda.get(n);
        if l == 0.0 {
            0.0
        } else {
            l * smoothing_weight(n as u64, big_n)
        }
    })
}

/// `(a ⋆ b)(n) = Σ_{d|n} a(d) b(n/d)` for `n <= n_max`.
pub fn dirichlet_convolve<T: Coefficient>(a: &CoeffTable<T>, b: &CoeffTable<T>) -> Result<CoeffTable<T>> {
    if a.n_max() != b.n_max() {
        return Err(Error::LengthMismatch { left: a.n_max(), right: b.n_max() });
    }
    let n_max = a.n_max();
    let mut out = vec![T::zero(); n_max];
    for d in 1..=n_max {
        let ad = a.values[d - 1];
        if ad == T::zero() {
            continue;
        }
        for m in 1..=n_max / d {
            let slot = &mut out[d * m - 1];
            *slot = T::checked_mul_add(*slot, ad, b.values[m - 1]).ok_or(Error::Overflow("dirichlet convolution"))?;
        }
    }
    Ok(CoeffTable { values: out })
}

/// `a ⋆ 1`, i.e. `Σ_{d|n} a(d)`.
fn sum_over_divisors(a: &CoeffTable<u64>) -> Result<CoeffTable<u64>> {
    let n_max = a.n_max();
    let mut out = vec![0u64; n_max];
    for d in 1..=n_max {
        let ad = a.values[d - 1];
        let mut n = d;
        while n <= n_max {
            out[n - 1] = out[n - 1].checked_add(ad).ok_or(Error::Overflow("divisor function"))?;
            n += d;
        }
    }
    Ok(CoeffTable { values: out })
}

/// Exact `d_k(n)`, the number of ordered factorisations of `n` into `k`
/// factors, for `n <= n_max`.
pub fn divisor_table(k: u32, n_max: usize) -> Result<CoeffTable<u64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("divisor function needs k >= 1".into()));
    }
    let mut table = CoeffTable::from_fn(n_max, |_| 1u64)?;
    for _ in 1..k {
        table = sum_over_divisors(&table)?;
    }
    Ok(table)
}

/// Coefficients `b` with `exp(Σ a(n) n^{-s}) = Σ b(n) n^{-s}`, truncated at
/// `n_max`.
///
/// Differentiating in `s` gives `b(n) log n = Σ_{d|n, d>1} a(d) log d · b(n/d)`,
/// which is solved in increasing `n`: every `b(m)` is final by the time it is
/// pushed forward to its multiples.
pub fn dirichlet_exp(a: &CoeffTable<f64>) -> Result<CoeffTable<f64>> {
    let a1 = a.get(1);
    if a1 != 0.0 {
        return Err(Error::NonzeroConstantTerm(a1));
    }
    let n_max = a.n_max();
    let support: Vec<(usize, f64)> = a
        .iter()
        .filter(|&(n, v)| n > 1 && v != 0.0)
        .map(|(n, v)| (n, v * (n as f64).ln()))
        .collect();
    let mut acc = vec![0.0f64; n_max];
    let mut b = vec![0.0f64; n_max];
    b[0] = 1.0;
    for m in 1..=n_max {
        if m > 1 {
            b[m - 1] = acc[m - 1] / (m as f64).ln();
        }
        let bm = b[m - 1];
        if bm == 0.0 {
            continue;
        }
        for &(d, ad_log) in &support {
            let n = d * m;
            if n > n_max {
                break;
            }
            acc[n - 1] = ad_log.mul_add(bm, acc[n - 1]);
        }
    }
    Ok(CoeffTable { values: b })
}

/// Inverse of [`dirichlet_exp`]: the coefficients of `log(Σ b(n) n^{-s})`
/// for a table with `b(1) = 1`.
pub fn dirichlet_log(b: &CoeffTable<f64>) -> Result<CoeffTable<f64>> {
    if b.get(1) != 1.0 {
        return Err(Error::InvalidParameter(format!("dirichlet log needs b(1) = 1, got {}", b.get(1))));
    }
    let n_max = b.n_max();
    // (a·log)(n) = (b·log)(n) - Σ_{d|n, 1<d<n} (a·log)(d) b(n/d)
    let mut a_log = vec![0.0f64; n_max];
    let mut correction = vec![0.0f64; n_max];
    for n in 2..=n_max {
        let value = b.get(n) * (n as f64).ln() - correction[n - 1];
        a_log[n - 1] = value;
        if value == 0.0 {
            continue;
        }
        for m in 2..=n_max / n {
            correction[n * m - 1] = value.mul_add(b.get(m), correction[n * m - 1]);
        }
    }
    CoeffTable::from_fn(n_max, |n| if n == 1 { 0.0 } else { a_log[n - 1] / (n as f64).ln() })
}

/// Binomial coefficient as `u128`; callers keep arguments small.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}
