//! Validated dimension triples `(d_A, d_B, d_E)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total dimension `N` the Monte Carlo oracle will sample.
pub const MC_MAX_TOTAL_DIM: u64 = 4096;

/// A validated tripartite dimension triple.
///
/// `total` is the exact product `d_A·d_B·d_E`; `factorised` records whether
/// `d_A·d_B ≤ d_E`, the regime in which `S(AB)` needs no subsystem/environment
/// swap in Page's formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimensions {
    d_a: u64,
    d_b: u64,
    d_e: u64,
    total: u64,
    factorised: bool,
}

impl Dimensions {
    pub fn new(d_a: u64, d_b: u64, d_e: u64) -> Result<Self> {
        for (name, value) in [("d_A", d_a), ("d_B", d_b), ("d_E", d_e)] {
            if value == 0 {
                return Err(Error::InvalidDimension { name, value });
            }
        }
        let overflow = || Error::DimensionOverflow { d_a, d_b, d_e };
        let ab = d_a.checked_mul(d_b).ok_or_else(overflow)?;
        let total = ab.checked_mul(d_e).ok_or_else(overflow)?;
        Ok(Self {
            d_a,
            d_b,
            d_e,
            total,
            factorised: ab <= d_e,
        })
    }

    #[inline]
    pub fn d_a(&self) -> u64 {
        self.d_a
    }

    #[inline]
    pub fn d_b(&self) -> u64 {
        self.d_b
    }

    #[inline]
    pub fn d_e(&self) -> u64 {
        self.d_e
    }

    /// `N = d_A·d_B·d_E`.
    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `C = d_A·d_B`, the dimension of the joint system `AB`.
    #[inline]
    pub fn ab(&self) -> u64 {
        self.d_a * self.d_b
    }

    #[inline]
    pub fn is_factorised(&self) -> bool {
        self.factorised
    }

    /// True when either subsystem is one-dimensional.
    #[inline]
    pub fn has_trivial_subsystem(&self) -> bool {
        self.d_a == 1 || self.d_b == 1
    }

    /// The same triple with A and B exchanged.
    pub fn swapped_ab(&self) -> Self {
        Self {
            d_a: self.d_b,
            d_b: self.d_a,
            ..*self
        }
    }
}

impl std::fmt::Display for Dimensions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.d_a, self.d_b, self.d_e)
    }
}

/// `(su_product, cartan_product) = ((d_A²−1)(d_B²−1), (d_A−1)(d_B−1))`.
///
/// The first counts `dim[su(d_A) ⊗ su(d_B)]`, the second the tensor product
/// of the two Cartan subalgebras.
pub fn casimir_counts(dims: &Dimensions) -> (u128, u128) {
    let (a, b) = (dims.d_a as u128, dims.d_b as u128);
    ((a * a - 1) * (b * b - 1), (a - 1) * (b - 1))
}

/// Leading large-`N` value `(d_A²−1)(d_B²−1)/(2N)`.
pub fn leading_order(dims: &Dimensions) -> f64 {
    let (su, _) = casimir_counts(dims);
    su as f64 / (2.0 * dims.total as f64)
}
