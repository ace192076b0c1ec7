//! Exact averages: Page entropy, the diagonal (Dirichlet) entropy, the
//! Schur deficit between them, and the mutual information split into its
//! diagonal part and eigenvalue correction.
//!
//! Two independent evaluations are provided: binary64 through the digamma
//! function, and exact rationals through harmonic numbers (`ψ(n+1) = H_n − γ`,
//! with γ cancelling identically).

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dims::{casimir_counts, Dimensions};
use crate::error::{Error, Result};
use crate::special::{harmonic_difference, psi, BigRational};

/// Which form of Page's formula applies to `S(AB)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `d_A·d_B ≤ d_E`: the closed-form eigenvalue correction and the
    /// factorised integral both hold.
    Factorised,
    /// `d_A·d_B > d_E`: Page's formula for `S(AB)` swaps subsystem and
    /// environment, and the factorisation breaks.
    Swapped,
}

impl Regime {
    pub fn of(dims: &Dimensions) -> Self {
        if dims.is_factorised() {
            Regime::Factorised
        } else {
            Regime::Swapped
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Factorised => "Factorised",
            Regime::Swapped => "Swapped",
        }
    }
}

/// `⟨I(A:B)⟩` in nats with its diagonal / eigenvalue decomposition.
///
/// `total` is computed as `i_diag + delta_ev`, so that identity holds
/// bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformationBreakdown {
    pub total: f64,
    pub i_diag: f64,
    pub delta_ev: f64,
    pub regime: Regime,
    /// `total / [(d_A²−1)(d_B²−1)]`, only in the factorised regime and
    /// only when that count is nonzero.
    pub g_value: Option<f64>,
}

#[inline]
fn psi_int(n: u64) -> f64 {
    psi(n as f64 + 1.0)
}

/// Average von Neumann entropy of an `m`-dimensional factor of a Haar state
/// on `m·n` dimensions:
/// `ψ(m′n′+1) − ψ(n′+1) − (m′−1)/(2n′)` with `m′ = min(m,n)`, `n′ = max(m,n)`.
pub fn page_entropy(m: u64, n: u64) -> f64 {
    let (small, large) = (m.min(n), m.max(n));
    (psi_int(small * large) - psi_int(large)) - schur_deficit(m, n)
}

/// Average Shannon entropy of the `m` diagonal entries, `ψ(mn+1) − ψ(n+1)`.
///
/// No min/max swap: the diagonal is `Dir(n, …, n)` distributed in this
/// orientation whatever the relative sizes.
pub fn diagonal_entropy_avg(m: u64, n: u64) -> f64 {
    psi_int(m * n) - psi_int(n)
}

/// `(min(m,n) − 1) / (2·max(m,n))`.
pub fn schur_deficit(m: u64, n: u64) -> f64 {
    let (small, large) = (m.min(n), m.max(n));
    (small - 1) as f64 / (2 * large) as f64
}

/// `page_entropy(m, n) − diagonal_entropy_avg(m, n)`.
fn eigenvalue_gap(m: u64, n: u64) -> f64 {
    if m <= n {
        -schur_deficit(m, n)
    } else {
        (psi_int(n) - psi_int(m)) - schur_deficit(m, n)
    }
}

/// Diagonal mutual information
/// `ψ(N+1) − ψ(N/d_A+1) − ψ(N/d_B+1) + ψ(N/(d_A d_B)+1)`.
fn diagonal_mutual_information(dims: &Dimensions) -> f64 {
    let (a, b, e) = (dims.d_a(), dims.d_b(), dims.d_e());
    let n = dims.total();
    (psi_int(n) - psi_int(b * e)) - (psi_int(a * e) - psi_int(e))
}

/// `[(d_A²−1)(d_B²−1) − (d_A−1)(d_B−1)] / (2N)`.
fn eigenvalue_correction_closed_form(dims: &Dimensions) -> f64 {
    let (su, cartan) = casimir_counts(dims);
    (su - cartan) as f64 / (2 * dims.total() as u128) as f64
}

/// `⟨I(A:B)⟩ = ⟨S(A)⟩ + ⟨S(B)⟩ − ⟨S(AB)⟩` in both regimes.
///
/// In the factorised regime the eigenvalue correction comes from its
/// closed form; otherwise it is assembled from the per-entropy gaps between
/// Page and diagonal entropies, with the swapped digamma arguments for any
/// factor larger than its environment.
pub fn mutual_information_exact(dims: &Dimensions) -> MutualInformationBreakdown {
    let (a, b, e) = (dims.d_a(), dims.d_b(), dims.d_e());
    let regime = Regime::of(dims);
    let i_diag = diagonal_mutual_information(dims);
    let delta_ev = match regime {
        Regime::Factorised => eigenvalue_correction_closed_form(dims),
        Regime::Swapped => {
            (eigenvalue_gap(a, b * e) + eigenvalue_gap(b, a * e)) - eigenvalue_gap(a * b, e)
        }
    };
    let total = i_diag + delta_ev;
    let (su, _) = casimir_counts(dims);
    let g_value = (regime == Regime::Factorised && su != 0).then(|| total / su as f64);
    MutualInformationBreakdown {
        total,
        i_diag,
        delta_ev,
        regime,
        g_value,
    }
}

/// The factorised expression (diagonal part plus closed-form eigenvalue
/// correction) evaluated regardless of regime.
///
/// Equal to `mutual_information_exact` when `d_A·d_B ≤ d_E`; outside that
/// regime it is the value the factorised integral would report, which is
/// not the mutual information.
pub fn factorised_form_total(dims: &Dimensions) -> f64 {
    diagonal_mutual_information(dims) + eigenvalue_correction_closed_form(dims)
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `H_{mn} − H_{n′} − (m′−1)/(2n′)`.
pub fn page_entropy_rational(m: u64, n: u64) -> BigRational {
    let (small, large) = (m.min(n), m.max(n));
    harmonic_difference(small * large, large) - ratio((small - 1) as u128, 2 * large as u128)
}

/// Exact `H_{mn} − H_n`.
pub fn diagonal_entropy_rational(m: u64, n: u64) -> BigRational {
    harmonic_difference(m * n, n)
}

/// Exact `⟨I(A:B)⟩` from harmonic numbers, valid in both regimes.
pub fn mutual_information_rational(dims: &Dimensions) -> BigRational {
    let (a, b, e) = (dims.d_a(), dims.d_b(), dims.d_e());
    page_entropy_rational(a, b * e) + page_entropy_rational(b, a * e)
        - page_entropy_rational(a * b, e)
}

/// Exact `(i_diag, delta_ev)` with `i_diag + delta_ev` equal to
/// [`mutual_information_rational`].
pub fn mutual_information_rational_parts(dims: &Dimensions) -> (BigRational, BigRational) {
    let (a, b, e) = (dims.d_a(), dims.d_b(), dims.d_e());
    let i_diag = diagonal_entropy_rational(a, b * e) + diagonal_entropy_rational(b, a * e)
        - diagonal_entropy_rational(a * b, e);
    let delta_ev = mutual_information_rational(dims) - &i_diag;
    (i_diag, delta_ev)
}

/// Lubkin's average purity `⟨Tr ρ²⟩ = (m+n)/(mn+1)`.
pub fn lubkin_purity(m: u64, n: u64) -> BigRational {
    ratio(m as u128 + n as u128, m as u128 * n as u128 + 1)
}

/// `Σ_k ⟨P_k²⟩ = (n+1)/(mn+1)` for the diagonal of the `m`-dimensional factor.
pub fn diagonal_second_moment(m: u64, n: u64) -> BigRational {
    ratio(n as u128 + 1, m as u128 * n as u128 + 1)
}

/// Common per-generator Bloch variance `⟨r_a²⟩ = 2/(m(mn+1))`, the same for
/// Cartan and off-diagonal generators.
pub fn bloch_variance(m: u64, n: u64) -> Result<BigRational> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "su({m}) has no generators; the Bloch variance needs m >= 2"
        )));
    }
    let m = m as u128;
    Ok(ratio(2, m * (m * n as u128 + 1)))
}

impl MutualInformationBreakdown {
    pub fn is_zero(&self) -> bool {
        self.total.is_zero()
    }
}
