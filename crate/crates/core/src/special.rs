//! Scalar special functions shared by the analytic routes: the digamma
//! function, exact harmonic numbers, Bernoulli numbers and `ζ(1−2k)`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type BigRational = num_rational::BigRational;

/// Euler–Mascheroni constant γ = 0.577215664901532860606512090082…
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Largest Bernoulli index `2k` served from the cache.
pub const MAX_BERNOULLI_INDEX: usize = 120;

const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// `B_{2k}/(2k)` for `k = 1..=9`. At `y = 10` the first omitted term is
/// below `3e−19`.
const PSI_ASYMPTOTIC: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
];

/// `ln 10` as an unevaluated double-double.
const LN_10_HI: f64 = std::f64::consts::LN_10;
const LN_10_LO: f64 = -2.170_756_223_382_249_4e-16;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    /// Exact `a + b` (Knuth's TwoSum).
    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        Self::two_sum(s.hi, lo)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    /// `1/(hi + lo)` to roughly double-double accuracy.
    fn recip(self) -> Self {
        let r = 1.0 / self.hi;
        let residual = (-r).mul_add(self.hi, 1.0);
        let corr = r * (residual - r * self.lo);
        Self::two_sum(r, corr)
    }
}

/// Digamma function `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
///
/// Shifts the argument above 10 with `ψ(x) = ψ(x+1) − 1/x`, then applies
/// `ψ(y) ~ ln y − 1/(2y) − Σ_k B_{2k}/(2k y^{2k})`. The shifted argument and
/// the recurrence terms are carried in double-double, and for shifted
/// arguments `ln y` is split as `ln 10 + ln1p((y − 10)/10)`, which keeps the
/// cancellation for `x < 10` from amplifying the rounding of a full-size
/// logarithm.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("digamma needs a finite x > 0, got {x}")));
    }
    Ok(psi(x))
}

pub(crate) fn psi(x: f64) -> f64 {
    let mut acc = DoubleDouble::ZERO;
    let mut y = DoubleDouble { hi: x, lo: 0.0 };
    while y.hi < ASYMPTOTIC_THRESHOLD {
        acc = acc.add(y.recip().neg());
        y = DoubleDouble::two_sum(y.hi, 1.0).add(DoubleDouble { hi: y.lo, lo: 0.0 });
    }

    let inv = y.recip();
    let half_inv = DoubleDouble {
        hi: 0.5 * inv.hi,
        lo: 0.5 * inv.lo,
    };
    acc = acc.add(half_inv.neg());

    let inv2 = inv.hi * inv.hi;
    let mut power = inv2;
    let mut tail = 0.0;
    for c in PSI_ASYMPTOTIC {
        tail += c * power;
        power *= inv2;
    }
    acc = acc.add(DoubleDouble { hi: -tail, lo: 0.0 });
    // ln(hi + lo) = ln(hi) + lo/hi + O(ε²)
    acc = acc.add(DoubleDouble {
        hi: y.lo / y.hi,
        lo: 0.0,
    });

    let log = if x < ASYMPTOTIC_THRESHOLD {
        // y.hi ∈ [10, 11), so y.hi − 10 is exact.
        let small = ((y.hi - ASYMPTOTIC_THRESHOLD) / ASYMPTOTIC_THRESHOLD).ln_1p();
        DoubleDouble::two_sum(LN_10_HI, small).add(DoubleDouble {
            hi: LN_10_LO,
            lo: 0.0,
        })
    } else {
        DoubleDouble {
            hi: y.hi.ln(),
            lo: 0.0,
        }
    };
    let total = log.add(acc);
    total.hi + total.lo
}

/// Exact harmonic number `H_n = Σ_{k=1..n} 1/k`, with `H_0 = 0`.
pub fn harmonic_rational(n: u64) -> BigRational {
    if n == 0 {
        return BigRational::zero();
    }
    harmonic_range(1, n + 1)
}

/// `Σ_{k=lo}^{hi−1} 1/k` by binary splitting.
fn harmonic_range(lo: u64, hi: u64) -> BigRational {
    if hi - lo <= 16 {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for k in lo..hi {
            // num/den + 1/k
            num = num * k + &den;
            den *= k;
        }
        return BigRational::new(num, den);
    }
    let mid = lo + (hi - lo) / 2;
    harmonic_range(lo, mid) + harmonic_range(mid, hi)
}

/// `H_b − H_a` for `a ≤ b`, exactly.
pub(crate) fn harmonic_difference(b: u64, a: u64) -> BigRational {
    debug_assert!(a <= b);
    if a == b {
        BigRational::zero()
    } else {
        harmonic_range(a + 1, b + 1)
    }
}

fn bernoulli_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| even_bernoulli_numbers(MAX_BERNOULLI_INDEX / 2))
}

/// `B_2, B_4, …, B_{2n}` from the tangent numbers `T_k`:
/// `B_{2k} = (−1)^{k−1} 2k T_k / (4^k (4^k − 1))`.
///
/// The tangent numbers come from an integer-only triangle, so the only
/// rational operation is the final division.
fn even_bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut t = vec![BigInt::zero(); n + 1];
    if n == 0 {
        return Vec::new();
    }
    t[1] = BigInt::one();
    for k in 2..=n {
        t[k] = &t[k - 1] * (k - 1);
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = &t[j - 1] * (j - k) + &t[j] * (j - k + 2);
        }
    }
    (1..=n)
        .map(|k| {
            let four_k = BigInt::one() << (2 * k);
            let den = &four_k * (&four_k - 1u32);
            let mut num = &t[k] * (2 * k);
            if k % 2 == 0 {
                num = -num;
            }
            BigRational::new(num, den)
        })
        .collect()
}

/// Exact Bernoulli number `B_{k2}` for even `k2` in `2..=120`
/// (convention `B_2 = 1/6`).
pub fn bernoulli(k2: usize) -> Result<BigRational> {
    if k2 == 0 || k2 % 2 == 1 || k2 > MAX_BERNOULLI_INDEX {
        return Err(Error::Domain(format!(
            "Bernoulli index must be even and in 2..={MAX_BERNOULLI_INDEX}, got {k2}"
        )));
    }
    Ok(bernoulli_table()[k2 / 2 - 1].clone())
}

/// `ζ(1−2k) = −B_{2k}/(2k)`.
pub fn zeta_negative_odd(k: usize) -> Result<BigRational> {
    let b = bernoulli(2 * k)?;
    Ok(-b / BigInt::from(2 * k))
}

/// Nearest binary64 value of an exact rational.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
