//! The convergent integral form of `⟨I(A:B)⟩`.
//!
//! Binet's second formula
//! `ψ(z+1) = ln z + 1/(2z) − 2∫₀^∞ t dt / [(t²+z²)(e^{2πt}−1)]`
//! applied to the four digamma terms of the diagonal mutual information
//! gives, for `d_A·d_B ≤ d_E`,
//!
//! ```text
//! ⟨I⟩ = (d_A²−1)(d_B²−1) [1/(2N) − 2J],
//! J   = ∫₀^∞ R(u) / (e^{2π u d_E} − 1) du,
//! R(u) = u(C² − u⁴) / [(u²+1)(u²+d_A²)(u²+d_B²)(u²+C²)],   C = d_A d_B.
//! ```
//!
//! `R` is odd under `u → C/u` (with the Jacobian), so folding at `u = √C`
//! leaves a pointwise non-negative integrand on `(0, √C]`. That form is the
//! one integrated here, and its positivity gives `⟨I⟩ < (d_A²−1)(d_B²−1)/(2N)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dims::{casimir_counts, leading_order, Dimensions};
use crate::error::{Error, Result};
use crate::quad::{geometric_breaks, integrate_refining, DEFAULT_BUDGET};

pub use crate::quad::QuadratureResult;

/// Default absolute tolerance on `J`.
pub const DEFAULT_TOL: f64 = 1e-14;

/// Bose–Einstein weight `1/(e^{2π x d_E} − 1)`.
#[inline]
pub fn bose_einstein(x: f64, d_e: f64) -> f64 {
    (2.0 * PI * x * d_e).exp_m1().recip()
}

/// `∫₀^∞ t dt / [(t²+z²)(e^{2πt}−1)]`, so that
/// `ψ(z+1) = ln z + 1/(2z) − 2·binet_tail(z)`.
pub fn binet_tail(z: f64, tol: f64) -> Result<QuadratureResult> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("Binet integral needs a finite z > 0, got {z}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    // For t ≥ T: t/(t²+z²) ≤ min(1/(2z), 1/T), and ∫_T^∞ dt/(e^{2πt}−1)
    // ≤ e^{−2πT} / (2π(1 − e^{−2πT})).
    let tail_bound = |t: f64| {
        let decay = (-2.0 * PI * t).exp();
        (0.5 / z).min(1.0 / t) * decay / (2.0 * PI * (1.0 - decay))
    };
    let mut upper = 1.0;
    while tail_bound(upper) > 0.1 * tol {
        upper += 1.0;
    }
    let breaks = geometric_breaks(0.5 * z.min(1.0), upper);
    let z2 = z * z;
    integrate_refining(
        |t| t / ((t * t + z2) * (2.0 * PI * t).exp_m1()),
        &breaks,
        tol,
        DEFAULT_BUDGET,
    )
}

/// The rational kernel `R(u)`.
pub fn kernel_r(u: f64, dims: &Dimensions) -> f64 {
    let (a, b, c) = (dims.d_a() as f64, dims.d_b() as f64, dims.ab() as f64);
    let u2 = u * u;
    // C − u² with a single rounding keeps the sign change at √C exact.
    let c_minus = (-u).mul_add(u, c);
    (u / (u2 + 1.0)) * (c_minus / (u2 + a * a)) * ((c + u2) / (u2 + b * b)) / (u2 + c * c)
}

/// `R(u) = common_factor · Σ_i s_i u / (u² + α_i²)` with poles
/// `α = (1, d_A, d_B, C)` and signs `(+1, −1, −1, +1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialFractionForm {
    pub poles: [f64; 4],
    pub signs: [f64; 4],
    /// `1/[(d_A²−1)(d_B²−1)]`.
    pub common_factor: f64,
}

impl PartialFractionForm {
    pub fn evaluate(&self, u: f64) -> f64 {
        let sum: f64 = self
            .poles
            .iter()
            .zip(&self.signs)
            .map(|(alpha, s)| s * u / (u * u + alpha * alpha))
            .sum();
        self.common_factor * sum
    }

    /// `J = common_factor · Σ_i s_i · binet_tail(α_i d_E)`: each partial
    /// fraction becomes one Binet integral after `t = u d_E`.
    pub fn j_from_binet(&self, d_e: f64, tol: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (alpha, s) in self.poles.iter().zip(&self.signs) {
            acc += s * binet_tail(alpha * d_e, tol)?.value;
        }
        Ok(self.common_factor * acc)
    }
}

/// Four-pole decomposition of `R`; refused when two poles coincide
/// (`d_A = 1`, `d_B = 1` or `d_A = d_B`). The integral itself stays valid in
/// those cases.
pub fn partial_fractions(dims: &Dimensions) -> Result<PartialFractionForm> {
    let poles = [1, dims.d_a(), dims.d_b(), dims.ab()];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if poles[i] == poles[j] {
                return Err(Error::DegeneratePoles { poles });
            }
        }
    }
    let (su, _) = casimir_counts(dims);
    Ok(PartialFractionForm {
        poles: poles.map(|p| p as f64),
        signs: [1.0, -1.0, -1.0, 1.0],
        common_factor: (su as f64).recip(),
    })
}

/// `R(u)·[f(u) − f(C/u)]` with `f(x) = 1/(e^{2π x d_E} − 1)`, for `0 < u ≤ √C`.
pub fn folded_integrand(u: f64, dims: &Dimensions) -> Result<f64> {
    let sqrt_c = (dims.ab() as f64).sqrt();
    if !(u > 0.0 && u <= sqrt_c) {
        return Err(Error::Domain(format!("folded integrand needs 0 < u <= sqrt(C) = {sqrt_c}, got {u}")));
    }
    Ok(folded_unchecked(u, dims, sqrt_c))
}

#[inline]
fn folded_unchecked(u: f64, dims: &Dimensions, sqrt_c: f64) -> f64 {
    if u == sqrt_c {
        return 0.0;
    }
    let d_e = dims.d_e() as f64;
    let c = dims.ab() as f64;
    kernel_r(u, dims) * (bose_einstein(u, d_e) - bose_einstein(c / u, d_e))
}

fn require_factorised(dims: &Dimensions) -> Result<()> {
    if dims.is_factorised() {
        Ok(())
    } else {
        Err(Error::Regime {
            d_a: dims.d_a(),
            d_b: dims.d_b(),
            d_e: dims.d_e(),
        })
    }
}

/// Folded-form quadrature of `J` with no regime check.
fn folded_j(dims: &Dimensions, tol: f64) -> Result<QuadratureResult> {
    let sqrt_c = (dims.ab() as f64).sqrt();
    // f(u) has poles at u = ik/d_E; the kernel's poles are at distance >= 1.
    let breaks = geometric_breaks(1.0 / dims.d_e() as f64, sqrt_c);
    integrate_refining(|u| folded_unchecked(u, dims, sqrt_c), &breaks, tol, DEFAULT_BUDGET)
}

/// `J(d_A, d_B, d_E)` to absolute accuracy `tol`, from the folded form.
pub fn compute_j(dims: &Dimensions, tol: f64) -> Result<QuadratureResult> {
    require_factorised(dims)?;
    folded_j(dims, tol)
}

/// `J` from the original semi-infinite integrand, truncated where the tail
/// drops below `tol/10`. Used to cross-check the folded form.
pub fn compute_j_unfolded(dims: &Dimensions, tol: f64) -> Result<QuadratureResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let d_e = dims.d_e() as f64;
    let c = dims.ab() as f64;
    // |R(u)| ≤ 1/(2C), and ∫_U^∞ f ≈ e^{−2π d_E U}/(2π d_E).
    let scale = 2.0 * PI * d_e;
    let upper = ((10.0 / (tol * 2.0 * c * scale)).ln() / scale).max(1.0 / d_e);
    let breaks = geometric_breaks(1.0 / d_e, upper);
    integrate_refining(
        |u| kernel_r(u, dims) * bose_einstein(u, d_e),
        &breaks,
        tol,
        DEFAULT_BUDGET,
    )
}

/// `(d_A²−1)(d_B²−1)[1/(2N) − 2J]` for a given `J`.
pub fn mutual_information_from_j(dims: &Dimensions, j: f64) -> f64 {
    let (su, _) = casimir_counts(dims);
    leading_order(dims) - 2.0 * su as f64 * j
}

/// `⟨I(A:B)⟩` from the integral; exactly 0 without quadrature when a
/// subsystem is trivial.
pub fn mutual_information_integral(dims: &Dimensions, tol: f64) -> Result<f64> {
    require_factorised(dims)?;
    if dims.has_trivial_subsystem() {
        return Ok(0.0);
    }
    let j = compute_j(dims, tol)?;
    Ok(mutual_information_from_j(dims, j.value))
}

/// The factorised integral expression evaluated outside its regime. For
/// `d_A·d_B > d_E` this is not the mutual information.
pub fn forced_factorised_integral(dims: &Dimensions, tol: f64) -> Result<f64> {
    if dims.has_trivial_subsystem() {
        return Ok(0.0);
    }
    let j = folded_j(dims, tol)?;
    Ok(mutual_information_from_j(dims, j.value))
}

/// `leading_order − ⟨I⟩ = 2(d_A²−1)(d_B²−1)·J`, strictly positive when
/// `d_A, d_B ≥ 2`.
pub fn bound_deficit(dims: &Dimensions, tol: f64) -> Result<f64> {
    require_factorised(dims)?;
    if dims.has_trivial_subsystem() {
        return Ok(0.0);
    }
    let (su, _) = casimir_counts(dims);
    Ok(2.0 * su as f64 * compute_j(dims, tol)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::page::{mutual_information_exact, mutual_information_rational};
    use crate::special::{digamma, rational_to_f64, EULER_GAMMA};

    fn dims(a: u64, b: u64, e: u64) -> Dimensions {
        Dimensions::new(a, b, e).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn binet_at_one_inverts_digamma_of_two() {
        let r = binet_tail(1.0, 1e-15).unwrap();
        assert!(r.converged);
        assert!((r.value - (EULER_GAMMA - 0.5) / 2.0).abs() < 1e-15);
        assert!((r.value - 0.038_607_8).abs() < 1e-7);
    }

    #[test]
    fn binet_large_argument() {
        let v = binet_tail(100.0, 1e-18).unwrap().value;
        let leading = 1.0 / (24.0 * 100.0 * 100.0);
        assert!(rel(v, leading) < 0.01);
        assert!(rel(v, 4.166_625_001_983_919e-6) < 1e-12);
    }

    #[test]
    fn binet_matches_digamma_at_42() {
        let v = binet_tail(42.0, 1e-18).unwrap().value;
        let psi = 42f64.ln() + 1.0 / 84.0 - 2.0 * v;
        assert!(rel(psi, digamma(43.0).unwrap()) < 1e-13);
    }

    #[test]
    fn binet_domain() {
        assert!(binet_tail(0.0, 1e-10).is_err());
        assert!(binet_tail(-1.0, 1e-10).is_err());
        assert!(binet_tail(1.0, 0.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let d = dims(2, 3, 7);
        assert_eq!(kernel_r(0.0, &d), 0.0);
        assert!(kernel_r(6f64.sqrt(), &d).abs() < 1e-16);
        assert!(rel(kernel_r(1.0, &d), 35.0 / 3700.0) < 1e-15);
        // exact zero where C − u² is exactly zero in binary64
        assert_eq!(kernel_r(2.0, &dims(2, 2, 4)), 0.0);
    }

    #[test]
    fn partial_fraction_examples() {
        let d = dims(2, 3, 7);
        let pf = partial_fractions(&d).unwrap();
        assert_eq!(pf.poles, [1.0, 2.0, 3.0, 6.0]);
        assert_eq!(pf.signs, [1.0, -1.0, -1.0, 1.0]);
        assert_eq!(pf.common_factor, 1.0 / 24.0);
        assert_eq!(pf.signs.iter().sum::<f64>(), 0.0);
        assert!(rel(pf.evaluate(1.0), kernel_r(1.0, &d)) < 1e-15);
        assert!(matches!(partial_fractions(&dims(2, 2, 4)), Err(Error::DegeneratePoles { .. })));
        assert!(matches!(partial_fractions(&dims(1, 3, 4)), Err(Error::DegeneratePoles { .. })));
    }

    #[test]
    fn partial_fraction_reconstruction_pointwise() {
        for (a, b) in [(2, 3), (2, 5), (3, 4), (4, 6)] {
            let d = dims(a, b, a * b);
            let pf = partial_fractions(&d).unwrap();
            for i in 1..200 {
                let u = i as f64 * 0.173;
                let (r, p) = (kernel_r(u, &d), pf.evaluate(u));
                assert!((r - p).abs() <= 1e-13 * r.abs().max(1e-3 / d.ab() as f64), "{d} u = {u}");
            }
        }
    }

    #[test]
    fn folded_endpoints_and_sign() {
        let d = dims(2, 3, 7);
        let sqrt_c = 6f64.sqrt();
        assert_eq!(folded_integrand(sqrt_c, &d).unwrap(), 0.0);
        assert!(folded_integrand(0.0, &d).is_err());
        assert!(folded_integrand(sqrt_c * 1.001, &d).is_err());
        for i in 1..1000 {
            let u = sqrt_c * i as f64 / 1000.0;
            assert!(folded_integrand(u, &d).unwrap() > 0.0, "u = {u}");
        }
    }

    #[test]
    fn folded_small_u_limit() {
        // R(u) ≈ u/C² and f(u) ≈ 1/(2π u d_E) near 0, so the integrand
        // tends to 1/(2π d_E C²).
        for (a, b, e) in [(2, 3, 7), (2, 2, 4), (4, 5, 21)] {
            let d = dims(a, b, e);
            let c = d.ab() as f64;
            let limit = 1.0 / (2.0 * PI * e as f64 * c * c);
            let v = folded_integrand(1e-6, &d).unwrap();
            assert!(v.is_finite());
            assert!(rel(v, limit) < 1e-4, "{d}: {v} vs {limit}");
        }
    }

    #[test]
    fn j_examples() {
        let j = compute_j(&dims(2, 3, 7), DEFAULT_TOL).unwrap();
        assert!(j.converged && j.abs_error_estimate <= DEFAULT_TOL && j.evaluations > 0);
        assert!(rel(j.value, 2.355_428_393_954_635e-5) < 1e-12);
        let j = compute_j(&dims(2, 2, 4), DEFAULT_TOL).unwrap();
        assert!(rel(j.value, 1.612_199_528_866_195_5e-4) < 1e-12);
        assert!(matches!(compute_j(&dims(3, 4, 2), DEFAULT_TOL), Err(Error::Regime { .. })));
    }

    #[test]
    fn integral_route_examples() {
        for (a, b, e) in [(2, 3, 7), (2, 2, 4)] {
            let d = dims(a, b, e);
            let exact = rational_to_f64(&mutual_information_rational(&d));
            let v = mutual_information_integral(&d, DEFAULT_TOL).unwrap();
            assert!(rel(v, exact) < 1e-13, "{d}: {v} vs {exact}");
        }
        assert_eq!(mutual_information_integral(&dims(1, 5, 9), DEFAULT_TOL).unwrap(), 0.0);
        assert!(matches!(
            mutual_information_integral(&dims(3, 4, 2), DEFAULT_TOL),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn forced_factorised_outside_regime() {
        let v = forced_factorised_integral(&dims(3, 4, 2), DEFAULT_TOL).unwrap();
        assert!((v - 2.483).abs() <= 1e-3);
        let j = folded_j(&dims(3, 4, 2), DEFAULT_TOL).unwrap();
        assert!(rel(j.value, 7.041_235_459_848_328e-5) < 1e-12);
    }

    #[test]
    fn bound_deficit_examples() {
        let d = dims(2, 2, 4);
        let deficit = bound_deficit(&d, DEFAULT_TOL).unwrap();
        assert!((deficit - 0.0029).abs() < 1e-4);
        let fraction = deficit / leading_order(&d);
        assert!((0.0102..0.0104).contains(&fraction), "{fraction}");
        let d = dims(2, 3, 7);
        let deficit = bound_deficit(&d, DEFAULT_TOL).unwrap();
        let expected = leading_order(&d) - mutual_information_exact(&d).total;
        assert!(rel(deficit, expected) < 1e-11);
        assert!((deficit - 0.001_130).abs() < 1e-6);
        assert_eq!(bound_deficit(&dims(1, 4, 9), DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn trivial_j_is_still_computable() {
        // Doubled pole at α = 1: the product-form integral is regular.
        let j = compute_j(&dims(1, 3, 5), DEFAULT_TOL).unwrap();
        assert!(j.converged && j.value.is_finite());
    }

    #[test]
    fn scale_inversion_antisymmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for (a, b) in [(2, 3), (2, 2), (3, 5), (6, 6)] {
            let d = dims(a, b, a * b);
            let c = d.ab() as f64;
            for _ in 0..10_000 {
                let u: f64 = rng.random_range(1e-6..10.0 * c);
                let lhs = kernel_r(c / u, &d) * (c / (u * u));
                let rhs = -kernel_r(u, &d);
                // near u = √C both sides pass through zero
                let scale = rhs.abs().max(1e-3 / (c * c));
                assert!((lhs - rhs).abs() <= 1e-13 * scale, "{d} u = {u}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn folded_equals_unfolded() {
        for (a, b, e) in [(2, 3, 7), (2, 2, 4), (3, 4, 24), (5, 6, 30)] {
            let d = dims(a, b, e);
            let tol = 1e-14;
            let folded = compute_j(&d, tol).unwrap().value;
            let unfolded = compute_j_unfolded(&d, tol).unwrap().value;
            assert!((folded - unfolded).abs() <= 2.0 * tol, "{d}: {folded} vs {unfolded}");
        }
    }

    #[test]
    fn binet_partial_fractions_reproduce_exact() {
        for (a, b, m) in [(2, 3, 1), (2, 3, 2), (2, 5, 1), (3, 4, 3), (4, 6, 2), (5, 6, 4)] {
            let d = dims(a, b, m * a * b);
            let pf = partial_fractions(&d).unwrap();
            let j = pf.j_from_binet(d.d_e() as f64, 1e-17).unwrap();
            let v = mutual_information_from_j(&d, j);
            let exact = rational_to_f64(&mutual_information_rational(&d));
            assert!(rel(v, exact) < 1e-12, "{d}: {v} vs {exact}");
        }
    }

    #[test]
    fn positivity_over_grid() {
        for a in 2..=6u64 {
            for b in 2..=6u64 {
                for m in [1, 2, 4] {
                    let d = dims(a, b, m * a * b);
                    let sqrt_c = (d.ab() as f64).sqrt();
                    for i in 1..=10_000 {
                        let u = (sqrt_c * i as f64 / 10_000.0).min(sqrt_c);
                        assert!(folded_integrand(u, &d).unwrap() >= 0.0, "{d} u = {u}");
                    }
                }
            }
        }
    }

    #[test]
    fn borel_sum_of_the_series() {
        use crate::series::{expand, DEFAULT_K_MAX};
        for a in 2..=4u64 {
            for b in 2..=4u64 {
                for m in 1..=3 {
                    let d = dims(a, b, m * a * b);
                    let s = expand(&d, DEFAULT_K_MAX).unwrap();
                    let v = mutual_information_integral(&d, DEFAULT_TOL).unwrap();
                    assert!(
                        (v - s.optimal_value()).abs() <= 2.0 * s.error_estimate,
                        "{d}: {v} vs {} (err {})",
                        s.optimal_value(),
                        s.error_estimate
                    );
                }
            }
        }
    }
}
