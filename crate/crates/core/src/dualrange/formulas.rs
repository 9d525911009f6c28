//! Closed forms and bounds for the limiting matched fraction.

use crate::{Error, Result};

/// Number of interior grid points used by [`lower_bound_sup`].
pub const LOWER_BOUND_GRID: usize = 512;

/// Matched fraction when every supply node has range `r` independently with
/// probability `pi` and range zero otherwise:
/// `(e^{2 pi r} - e^{2r}) / (e^{2 pi r} - e^{2r} / pi)`.
///
/// Evaluated as `expm1(-a) / (expm1(-a) - (1 - pi)/pi)` with
/// `a = 2 (1 - pi) r`, which is stable for large `r` and as `pi -> 1`.
/// The endpoints are taken as limits: `0` at `pi = 0` and `r / (r + 1/2)`
/// at `pi = 1`.
pub fn base0_fraction(r: f64, pi: f64) -> f64 {
    if pi <= 0.0 || r <= 0.0 {
        return 0.0;
    }
    if pi >= 1.0 {
        return r / (r + 0.5);
    }
    let num = libm::expm1(-2.0 * (1.0 - pi) * r);
    num / (num - (1.0 - pi) / pi)
}

/// Limiting matched fraction when `base = 0`.
pub fn closed_form_base0(extra: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    if !(extra >= 0.0) {
        return Err(Error::InvalidParameter { name: "extra", value: extra });
    }
    Ok(base0_fraction(extra, p))
}

/// Limiting matched fraction when every node has range `base`.
pub fn closed_form_extra0(base: f64) -> f64 {
    base / (base + 0.5)
}

fn check(base: f64, extra: f64, p: f64) -> Result<()> {
    if !(base >= 0.0 && base.is_finite()) {
        return Err(Error::InvalidParameter { name: "base", value: base });
    }
    if !(extra >= 0.0 && extra.is_finite()) {
        return Err(Error::InvalidParameter { name: "extra", value: extra });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter { name: "p", value: p });
    }
    Ok(())
}

/// Upper bound `m / (m + 1/2)` with `m = base + p extra`, the value of the
/// uniform allocation with the same mean.
pub fn upper_bound(base: f64, extra: f64, p: f64) -> Result<f64> {
    check(base, extra, p)?;
    Ok(closed_form_extra0(base + p * extra))
}

/// Lower bound from splitting demand into a flexible share `q` and an
/// inflexible share `1 - q`, for `q` in `(p, 1]`.
pub fn lower_bound_q(base: f64, extra: f64, p: f64, q: f64) -> Result<f64> {
    check(base, extra, p)?;
    if !(q > p && q <= 1.0) {
        return Err(Error::InvalidParameter { name: "q", value: q });
    }
    let inflexible = if q < 1.0 { (1.0 - q) * base0_fraction(base, (1.0 - q) / (1.0 - p)) } else { 0.0 };
    let flexible = q * base0_fraction(base + extra, p / q);
    Ok(inflexible + flexible)
}

/// The `q -> p` limit of [`lower_bound_q`]:
/// `(1 - p) base/(base + 1/2) + p (base + extra)/(base + extra + 1/2)`.
pub fn lower_bound_q_limit(base: f64, extra: f64, p: f64) -> Result<f64> {
    check(base, extra, p)?;
    Ok((1.0 - p) * closed_form_extra0(base) + p * closed_form_extra0(base + extra))
}

/// Supremum of [`lower_bound_q`] over `q = p + (1 - p) i / 512`,
/// `i = 1..=512`, together with the `q -> p` limit.
pub fn lower_bound_sup(base: f64, extra: f64, p: f64) -> Result<f64> {
    let mut best = lower_bound_q_limit(base, extra, p)?;
    if p >= 1.0 {
        return Ok(best);
    }
    for i in 1..=LOWER_BOUND_GRID {
        let q = p + (1.0 - p) * i as f64 / LOWER_BOUND_GRID as f64;
        if q > p {
            best = best.max(lower_bound_q(base, extra, p, q.min(1.0))?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(extra: f64, p: f64) -> f64 {
        let a = libm::exp(2.0 * p * extra);
        let b = libm::exp(2.0 * extra);
        (a - b) / (a - b / p)
    }

    #[test]
    fn base0_examples() {
        assert_eq!(closed_form_base0(0.0, 0.5).unwrap(), 0.0);
        let v = closed_form_base0(1.0, 0.5).unwrap();
        assert!((v - 0.38730).abs() < 5e-6, "{v}");
        assert!((v - direct(1.0, 0.5)).abs() < 1e-14);
        for &(e, p) in &[(0.3, 0.2), (2.0, 0.7), (5.0, 0.05)] {
            let v = closed_form_base0(e, p).unwrap();
            assert!((v - direct(e, p)).abs() < 1e-12);
        }
        let near_one = closed_form_base0(1.0, 0.9999).unwrap();
        assert!((near_one - 1.0 / 1.5).abs() < 1e-4);
        assert!(closed_form_base0(1.0, 1.0).is_err());
        assert!(closed_form_base0(1.0, 0.0).is_err());
    }

    #[test]
    fn extra0_examples() {
        assert_eq!(closed_form_extra0(0.0), 0.0);
        assert!((closed_form_extra0(1.0) - 2.0 / 3.0).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 1..50 {
            let v = closed_form_extra0(libm::pow(2.0, i as f64));
            assert!(v > prev && v < 1.0);
            prev = v;
        }
        assert!(prev > 0.999_999);
    }

    #[test]
    fn bound_examples() {
        assert!((upper_bound(1.0, 1.0, 0.5).unwrap() - 0.75).abs() < 1e-15);
        let lim = lower_bound_q_limit(1.0, 1.0, 0.5).unwrap();
        assert!((lim - 11.0 / 15.0).abs() < 1e-15);
        assert_eq!(upper_bound(0.7, 0.0, 0.3).unwrap(), closed_form_extra0(0.7));
        assert!(lower_bound_q(1.0, 1.0, 0.5, 0.5).is_err());
        assert!(lower_bound_q(1.0, 1.0, 0.5, 1.01).is_err());
    }

    #[test]
    fn lower_bound_q_tends_to_limit() {
        let q = 0.5 + 1e-7;
        let v = lower_bound_q(1.0, 1.0, 0.5, q).unwrap();
        assert!((v - 11.0 / 15.0).abs() < 1e-5);
    }

    #[test]
    fn sandwich() {
        for &(c, e, p) in &[(1.0, 1.0, 0.5), (0.1, 2.0, 0.6), (3.0, 0.0, 0.2), (0.0, 1.0, 0.5)] {
            let lo = lower_bound_sup(c, e, p).unwrap();
            let hi = upper_bound(c, e, p).unwrap();
            assert!(lo >= lower_bound_q_limit(c, e, p).unwrap());
            assert!(lo <= hi + 1e-12, "{c} {e} {p}: {lo} > {hi}");
        }
        // with base = 0 the bound at q = 1 is the exact closed form
        let lo = lower_bound_sup(0.0, 1.0, 0.5).unwrap();
        assert!(lo >= closed_form_base0(1.0, 0.5).unwrap() - 1e-15);
    }
}
