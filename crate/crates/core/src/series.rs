//! The divergent Bernoulli series for `⟨I(A:B)⟩` in powers of `1/N`:
//!
//! ```text
//! ⟨I⟩ ~ (d_A²−1)(d_B²−1)/(2N) − Σ_{k≥1} B_{2k}/(2k N^{2k}) (d_A^{2k}−1)(d_B^{2k}−1)
//! ```
//!
//! Only even powers appear beyond the leading term. Since `|B_{2k}|` grows
//! like `2(2k)!/(2π)^{2k}` the terms eventually grow, and the series is used
//! with optimal (smallest-term) truncation.

use serde::Serialize;

use crate::dims::{leading_order, Dimensions};
use crate::error::{Error, Result};
use crate::special::{bernoulli, rational_to_f64, zeta_negative_odd, BigRational, MAX_BERNOULLI_INDEX};

pub const DEFAULT_K_MAX: usize = 40;

/// Largest order available: the Bernoulli cache stops at `B_120`.
pub const MAX_K: usize = MAX_BERNOULLI_INDEX / 2;

/// Above this order terms are assembled from log-magnitudes.
const DIRECT_PRODUCT_MAX_K: usize = 20;

/// Multiple of `ε·Σ|t|` added to the truncation error to cover rounding
/// in the terms and the running sum.
const ROUNDING_FLOOR_ULPS: f64 = 4.0;

#[derive(Debug, Clone, Serialize)]
pub struct SeriesExpansion {
    pub dims: Dimensions,
    /// `(d_A²−1)(d_B²−1)/(2N)`.
    pub leading: f64,
    /// `terms[k−1] = t_k` for `k = 1..=K`.
    pub terms: Vec<f64>,
    /// `partial_sums[0] = leading`, `partial_sums[k] = partial_sums[k−1] + t_k`.
    pub partial_sums: Vec<f64>,
    /// Truncation order: the first `k` with `|t_{k+1}| ≥ |t_k|`, or `K`.
    pub optimal_k: usize,
    /// `|t_{optimal_k+1}|` (or `|t_K|` when the terms shrink up to `K`)
    /// plus a rounding allowance.
    pub error_estimate: f64,
    /// First `k` with `|t_{k+1}| > |t_k|`.
    pub divergence_k: Option<usize>,
}

impl SeriesExpansion {
    pub fn k_max(&self) -> usize {
        self.terms.len()
    }

    /// `t_k`, 1-based.
    pub fn term(&self, k: usize) -> f64 {
        self.terms[k - 1]
    }

    pub fn optimal_value(&self) -> f64 {
        self.partial_sums[self.optimal_k]
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_K {
        return Err(Error::Domain(format!("series order k must be in 1..={MAX_K}, got {k}")));
    }
    Ok(())
}

/// `t_k = −B_{2k}/(2k N^{2k}) · (d_A^{2k}−1)(d_B^{2k}−1)`.
pub fn bernoulli_term(dims: &Dimensions, k: usize) -> Result<f64> {
    check_order(k)?;
    let b = bernoulli(2 * k)?;
    let coefficient = -rational_to_f64(&(b / BigRational::from_integer((2 * k).into())));
    scaled_term(dims, k, coefficient)
}

/// The same term written as `ζ(1−2k)/N^{2k} · (d_A^{2k}−1)(d_B^{2k}−1)`.
pub fn zeta_term(dims: &Dimensions, k: usize) -> Result<f64> {
    check_order(k)?;
    let coefficient = rational_to_f64(&zeta_negative_odd(k)?);
    scaled_term(dims, k, coefficient)
}

/// `coefficient · (d_A^{2k}−1)(d_B^{2k}−1)/N^{2k}`, rewritten as
/// `coefficient · (1 − d_A^{−2k})(1 − d_B^{−2k}) / d_E^{2k}` so that no
/// power of `N` is ever formed.
fn scaled_term(dims: &Dimensions, k: usize, coefficient: f64) -> Result<f64> {
    if dims.has_trivial_subsystem() {
        return Ok(0.0);
    }
    let two_k = 2 * k as i32;
    let pow_a = (dims.d_a() as f64).powi(two_k);
    let pow_b = (dims.d_b() as f64).powi(two_k);
    let pow_e = (dims.d_e() as f64).powi(two_k);

    let direct_ok = k <= DIRECT_PRODUCT_MAX_K && pow_e.is_finite() && pow_e.is_normal();
    let value = if direct_ok {
        coefficient * (1.0 - pow_a.recip()) * (1.0 - pow_b.recip()) / pow_e
    } else {
        let log_mag = coefficient.abs().ln() - f64::from(two_k) * (dims.d_e() as f64).ln()
            + (-pow_a.recip()).ln_1p()
            + (-pow_b.recip()).ln_1p();
        coefficient.signum() * log_mag.exp()
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::SeriesOverflow { k })
    }
}

/// Terms, partial sums and truncation diagnostics through order `k_max`.
pub fn expand(dims: &Dimensions, k_max: usize) -> Result<SeriesExpansion> {
    check_order(k_max)?;
    let leading = leading_order(dims);
    let terms = (1..=k_max)
        .map(|k| bernoulli_term(dims, k))
        .collect::<Result<Vec<_>>>()?;

    let mut partial_sums = Vec::with_capacity(k_max + 1);
    partial_sums.push(leading);
    for t in &terms {
        let last = *partial_sums.last().unwrap();
        partial_sums.push(last + t);
    }

    let mag = |k: usize| terms[k - 1].abs();
    let optimal_k = (1..k_max).find(|&k| mag(k + 1) >= mag(k)).unwrap_or(k_max);
    let divergence_k = (1..k_max).find(|&k| mag(k + 1) > mag(k));

    let truncation = if optimal_k < k_max {
        mag(optimal_k + 1)
    } else {
        mag(k_max)
    };
    let magnitude_sum: f64 = leading.abs() + (1..=optimal_k).map(mag).sum::<f64>();
    let error_estimate = truncation + ROUNDING_FLOOR_ULPS * f64::EPSILON * magnitude_sum;

    Ok(SeriesExpansion {
        dims: *dims,
        leading,
        terms,
        partial_sums,
        optimal_k,
        error_estimate,
        divergence_k,
    })
}

/// `(partial_sums[optimal_k], error_estimate)`.
pub fn optimal_truncation_value(dims: &Dimensions, k_max: usize) -> Result<(f64, f64)> {
    let s = expand(dims, k_max)?;
    Ok((s.optimal_value(), s.error_estimate))
}
