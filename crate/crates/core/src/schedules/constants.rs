//! Dilution constants derived from the convergence of `Σ i^(1−α)`.

use crate::error::{Error, Result};

/// Terms summed explicitly before switching to the integral bound.
const EXPLICIT_TERMS: u64 = 1_000_000;

/// `Σ_{i=1}^{n} i^(−s)`.
pub fn zeta_partial(s: f64, n: u64) -> f64 {
    // Summing small terms first keeps the rounding error negligible.
    (1..=n.max(1)).rev().map(|i| (i as f64).powf(-s)).sum()
}

/// Dilution constant for one-per-box transmitter sets.
///
/// `⌈3 + 2√2·(8·(1 + ζ_n(α−1)) / (1 − r^α))^(1/α)⌉` with `r^α = 1/(1+ε)` in
/// normalized units. For `α = 2` the partial sum grows like `log n`.
pub fn flat_constant(alpha: f64, epsilon: f64, n: u64) -> Result<u32> {
    if !(alpha >= 2.0) {
        return Err(Error::invalid(format!("alpha = {alpha} < 2")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon = {epsilon} must be positive")));
    }
    let one_minus = epsilon / (1.0 + epsilon);
    let tail = 1.0 + zeta_partial(alpha - 1.0, n);
    let d = 3.0 + 2.0 * std::f64::consts::SQRT_2 * (8.0 * tail / one_minus).powf(1.0 / alpha);
    Ok(d.ceil() as u32)
}

/// Upper bound on `Σ_{i>d} i^(1−α)` for `α > 2`.
pub fn tail_sum(alpha: f64, d: u64) -> f64 {
    let m = EXPLICIT_TERMS.max(d);
    let explicit: f64 = (d + 1..=m).rev().map(|i| (i as f64).powf(1.0 - alpha)).sum();
    explicit + (m as f64).powf(2.0 - alpha) / (alpha - 2.0)
}

/// Box-distance beyond which simultaneous transmitters cannot block the
/// closest same-box pair: the smallest `d` with
/// `Σ_{i>d} i^(1−α) ≤ min(1, ε) / (16·2^(α/2)·β)`.
///
/// The noise level cancels out of both cases of the bound; `β` enters
/// only as a conservative divisor since the bound is stated for `β = 1`.
pub fn selector_constant(alpha: f64, epsilon: f64, beta: f64, noise: f64) -> Result<u32> {
    if !(alpha > 2.0) {
        return Err(Error::Unsupported(format!("selector constant needs alpha > 2, got {alpha}")));
    }
    if !(epsilon > 0.0) || beta < 1.0 || noise < 1.0 {
        return Err(Error::invalid("epsilon > 0, beta >= 1 and noise >= 1 are required"));
    }
    let target = epsilon.min(1.0) / (16.0 * 2f64.powf(alpha / 2.0) * beta);
    // Walk the tail down term by term from the full sum.
    let mut tail = tail_sum(alpha, 0);
    let mut d: u64 = 0;
    while tail > target {
        d += 1;
        if d > EXPLICIT_TERMS {
            // Past the explicit range the integral bound alone decides.
            let d = (target * (alpha - 2.0)).powf(1.0 / (2.0 - alpha)).ceil();
            return Ok(d as u32);
        }
        tail -= (d as f64).powf(1.0 - alpha);
    }
    Ok(d as u32)
}

/// Selectivity `(2d+1)²` used for the selector schedules.
pub fn selector_k(alpha: f64, epsilon: f64, beta: f64, noise: f64) -> Result<u64> {
    let d = selector_constant(alpha, epsilon, beta, noise)? as u64;
    Ok((2 * d + 1) * (2 * d + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_constant_default_model() {
        assert_eq!(flat_constant(3.0, 0.5, 1000).unwrap(), 15);
        assert_eq!(flat_constant(3.0, 0.5, 100_000).unwrap(), 15);
        assert!(flat_constant(4.0, 0.5, 1000).unwrap() < 15);
        assert!(flat_constant(1.5, 0.5, 10).is_err());
    }

    #[test]
    fn flat_constant_grows_logarithmically_at_two() {
        let a = flat_constant(2.0, 0.5, 1 << 10).unwrap();
        let b = flat_constant(2.0, 0.5, 1 << 12).unwrap();
        let c = flat_constant(2.0, 0.5, 1 << 14).unwrap();
        assert!(b >= a && c >= b);
        assert!(c > a);
        assert!(c - b <= 3 && b - a <= 3);
    }

    #[test]
    fn selector_constant_is_minimal() {
        let d = selector_constant(3.0, 0.5, 1.0, 1.0).unwrap() as u64;
        let target = 0.5 / (16.0 * 2f64.powf(1.5));
        assert!(tail_sum(3.0, d) <= target);
        assert!(tail_sum(3.0, d - 1) > target);
        assert!(selector_constant(4.0, 0.5, 1.0, 1.0).unwrap() as u64 <= d);
        assert!(selector_constant(2.0, 0.5, 1.0, 1.0).is_err());
    }
}
