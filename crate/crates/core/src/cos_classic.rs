//! The original COS put formula, with payoff coefficients relative to the
//! strike: the expansion variable is `y = ln(F(T,T)/K)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::char_fn::{cf_unchecked, ModelParams};
use crate::cumulants::TruncationRange;
use crate::error::{ensure, Result};
use crate::option::{clamp_tiny_negative, to_kind, Fallback, Method, OptionSpec, PriceResult};

/// `∫_c^d e^y cos(kπ(y-a)/(b-a)) dy`.
pub fn chi(k: usize, c: f64, d: f64, a: f64, b: f64) -> f64 {
    let eta = k as f64 * PI / (b - a);
    let (sd, cd) = (eta * (d - a)).sin_cos();
    let (sc, cc) = (eta * (c - a)).sin_cos();
    let (ed, ec) = (d.exp(), c.exp());
    (cd * ed - cc * ec + eta * (sd * ed - sc * ec)) / (1.0 + eta * eta)
}

/// `∫_c^d cos(kπ(y-a)/(b-a)) dy`.
pub fn psi(k: usize, c: f64, d: f64, a: f64, b: f64) -> f64 {
    if k == 0 {
        return d - c;
    }
    let eta = k as f64 * PI / (b - a);
    ((eta * (d - a)).sin() - (eta * (c - a)).sin()) / eta
}

/// Cosine coefficient of the put payoff `K(1 - e^y)⁺` on `[a, b]`.
///
/// With the kink inside the range this is the usual closed form. A range
/// entirely above the kink gives zero, one entirely below it integrates the
/// linear branch over the whole range.
pub fn vk_put_classic(k: usize, strike: f64, a: f64, b: f64) -> f64 {
    let scale = 2.0 * strike / (b - a);
    if a >= 0.0 {
        return 0.0;
    }
    if b <= 0.0 {
        return scale * (psi(k, a, b, a, b) - chi(k, a, b, a, b));
    }
    if k == 0 {
        return scale * (a.exp_m1() - a);
    }
    let eta = k as f64 * PI / (b - a);
    let (s, c) = (eta * a).sin_cos();
    scale * ((a.exp() - c + eta * s) / (1.0 + eta * eta) - s / eta)
}

/// `φ(kπ/(b-a))` for `k = 0..n`.
pub(crate) fn phi_values(model: &ModelParams, t: f64, n: usize, range: &TruncationRange) -> Result<Vec<Complex64>> {
    let step = PI / range.width();
    (0..n)
        .map(|k| cf_unchecked(model, Complex64::new(k as f64 * step, 0.0), t))
        .collect()
}

/// Undiscounted COS sum `½Re φ₀ V₀ + Σ Re(φₖ e^{-iηₖ(x+a)}) Vₖ` for unit
/// strike coefficients `unit`, without any range checks.
pub(crate) fn classic_sum(phis: &[Complex64], unit: &[f64], strike: f64, x: f64, range: &TruncationRange) -> f64 {
    let step = PI / range.width();
    let shift = x + range.a;
    let mut sum = 0.5 * phis[0].re * unit[0];
    for k in 1..phis.len() {
        let (s, c) = (k as f64 * step * shift).sin_cos();
        sum += (phis[k].re * c + phis[k].im * s) * unit[k];
    }
    strike * sum
}

pub(crate) fn unit_coefficients(n: usize, range: &TruncationRange) -> Vec<f64> {
    (0..n).map(|k| vk_put_classic(k, 1.0, range.a, range.b)).collect()
}

fn check_inputs(model: &ModelParams, spec: &OptionSpec, n: usize, range: &TruncationRange) -> Result<()> {
    model.validate()?;
    spec.validate()?;
    range.validate()?;
    ensure(n >= 2, "N", n as f64, "must be at least 2")
}

fn put_from_sum(phis: &[Complex64], unit: &[f64], spec: &OptionSpec, range: &TruncationRange) -> PriceResult {
    let x = spec.log_moneyness();
    let (price, fallback) = if x >= range.b {
        (spec.discount * (spec.strike - spec.forward).max(0.0), Fallback::Intrinsic)
    } else if x <= range.a {
        (0.0, Fallback::Zero)
    } else {
        let p = spec.discount * classic_sum(phis, unit, spec.strike, x, range);
        (clamp_tiny_negative(p), Fallback::None)
    };
    PriceResult {
        price,
        kind: crate::option::OptionKind::Put,
        method: Method::Classic,
        n: phis.len(),
        range: Some(*range),
        fallback,
    }
}

/// Classic COS price of `spec`. Calls are priced as the put plus parity.
pub fn price_put_classic(model: &ModelParams, spec: &OptionSpec, n: usize, range: &TruncationRange) -> Result<PriceResult> {
    check_inputs(model, spec, n, range)?;
    let phis = phi_values(model, spec.t, n, range)?;
    let unit = unit_coefficients(n, range);
    Ok(to_kind(put_from_sum(&phis, &unit, spec, range), spec))
}

/// Classic COS prices for many strikes of one maturity. `spec` supplies the
/// forward, maturity, discount and kind; its strike is ignored. The
/// characteristic function is evaluated once for the whole strip.
pub fn price_strip_classic(
    model: &ModelParams,
    spec: &OptionSpec,
    n: usize,
    range: &TruncationRange,
    strikes: &[f64],
) -> Result<Vec<PriceResult>> {
    check_inputs(model, spec, n, range)?;
    let phis = phi_values(model, spec.t, n, range)?;
    let unit = unit_coefficients(n, range);
    strikes
        .iter()
        .map(|&k| {
            let s = spec.with_strike(k);
            s.validate()?;
            Ok(to_kind(put_from_sum(&phis, &unit, &s, range), &s))
        })
        .collect()
}

/// Whether `x = ln(K/F)` lies in the half of the range where the classic
/// expansion of the put payoff is still trustworthy, `x ≤ b/2`.
pub fn classic_reliable(x: f64, range: &TruncationRange) -> bool {
    x <= 0.5 * range.b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn quad(f: impl Fn(f64) -> f64, c: f64, d: f64) -> f64 {
        integrate(f, c, d, &[], 1e-15, 1_000_000).unwrap().value
    }

    #[test]
    fn chi_psi_trivial_cases() {
        assert!((chi(0, -1.0, 0.5, -2.0, 2.0) - (0.5f64.exp() - (-1f64).exp())).abs() < 1e-15);
        assert_eq!(chi(4, 0.3, 0.3, -2.0, 2.0), 0.0);
        assert_eq!(psi(0, -2.0, 2.0, -2.0, 2.0), 4.0);
        for k in 1..20 {
            assert!(psi(k, -2.0, 2.0, -2.0, 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chi_psi_match_quadrature() {
        let (a, b) = (-2.0, 2.0);
        for k in [1, 3, 17] {
            let w = k as f64 * PI / (b - a);
            let q = quad(|y| y.exp() * (w * (y - a)).cos(), -1.0, 0.0);
            assert!((chi(k, -1.0, 0.0, a, b) - q).abs() < 1e-12, "chi k={k}");
            let q = quad(|y| (w * (y - a)).cos(), -1.0, 0.0);
            assert!((psi(k, -1.0, 0.0, a, b) - q).abs() < 1e-12, "psi k={k}");
        }
    }

    #[test]
    fn v0_closed_form() {
        let v = vk_put_classic(0, 1.0, -1.0, 1.0);
        assert!((v - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn vk_is_chi_psi_composition() {
        let (a, b, strike) = (-1.7, 0.9, 1.3);
        for k in 0..200 {
            let direct = vk_put_classic(k, strike, a, b);
            let composed = 2.0 * strike / (b - a) * (-chi(k, a, 0.0, a, b) + psi(k, a, 0.0, a, b));
            assert!((direct - composed).abs() < 1e-14, "k={k}: {direct} {composed}");
        }
    }

    #[test]
    fn vk_matches_quadrature() {
        let (a, b) = (-2.0, 2.0);
        for k in 1..=10 {
            let w = k as f64 * PI / (b - a);
            let q = 2.0 / (b - a) * quad(|y| (1.0 - y.exp()) * (w * (y - a)).cos(), a, 0.0);
            assert!((vk_put_classic(k, 1.0, a, b) - q).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn vk_kink_outside_range() {
        assert_eq!(vk_put_classic(3, 1.0, 0.1, 0.5), 0.0);
        let (a, b) = (-1.0, -0.2);
        let w = 2.0 * PI / (b - a);
        let q = 2.0 / (b - a) * quad(|y| (1.0 - y.exp()) * (w * (y - a)).cos(), a, b);
        assert!((vk_put_classic(2, 1.0, a, b) - q).abs() < 1e-13);
    }

    #[test]
    fn vk_bounded() {
        let (a, b, strike) = (-0.3, 0.28, 1.0);
        let bound = 4.0 * strike / (b - a) * (b - a + f64::exp(b));
        for k in 0..20_000 {
            assert!(vk_put_classic(k, strike, a, b).abs() <= bound);
        }
    }
}
