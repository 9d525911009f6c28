//! Small sampling helpers shared by the generators.

use rand::Rng;

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Exponential draw with the given rate (mean `1 / rate`) by inversion.
///
/// `rate` must be positive; the caller is responsible for rejecting `Exp(0)`.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    // 1 - U lies in (0, 1], so the logarithm is finite.
    -libm::log(1.0 - uniform(rng)) / rate
}

/// Bernoulli draw with success probability `p`.
#[inline]
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    uniform(rng) < p
}
