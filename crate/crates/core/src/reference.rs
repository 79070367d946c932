//! Independent prices: the Black formula, a Fourier-inversion quadrature
//! pricer and implied volatility.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::char_fn::{cf_unchecked, ModelParams};
use crate::error::{ensure, Error, PriceBound, Result};
use crate::option::{Fallback, Method, OptionKind, OptionSpec, PriceResult};
use crate::quad::integrate;

/// Integrand evaluations allowed before the reference pricer gives up.
pub const MAX_EVALUATIONS: usize = 4_000_000;

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Black price on the forward with total volatility `sigma·√T`.
pub fn black_price(forward: f64, strike: f64, t: f64, sigma: f64, discount: f64, kind: OptionKind) -> f64 {
    let s = sigma * t.sqrt();
    let sign = match kind {
        OptionKind::Call => 1.0,
        OptionKind::Put => -1.0,
    };
    if s <= 0.0 {
        return discount * (sign * (forward - strike)).max(0.0);
    }
    let d1 = (forward / strike).ln() / s + 0.5 * s;
    let d2 = d1 - s;
    discount * sign * (forward * norm_cdf(sign * d1) - strike * norm_cdf(sign * d2))
}

/// Reference price by Lewis' inversion along `Im u = -½`:
///
/// `C = B[F - √(FK)/π ∫₀^∞ Re(e^{-iuz} φ(u - i/2)) / (u² + ¼) du]`,
/// `z = ln(K/F)`. The out-of-the-money side is computed from the integral
/// and the other side by parity. `tol` is the absolute error target on
/// the returned price.
pub fn price_reference(model: &ModelParams, spec: &OptionSpec, tol: f64) -> Result<PriceResult> {
    model.validate()?;
    spec.validate()?;
    ensure(tol >= 1e-12 && tol.is_finite(), "tol", tol, "must be at least 1e-12")?;
    let OptionSpec {
        forward: f,
        strike: k,
        t,
        discount,
        ..
    } = *spec;
    let z = spec.log_moneyness();
    let scale = discount * (f * k).sqrt() / PI;
    // error budget on the integral itself, split between the quadrature
    // and the neglected tail
    let int_tol = tol / scale;

    let phi = |u: f64| cf_unchecked(model, Complex64::new(u, -0.5), t);
    let envelope = |u: f64| -> Result<f64> { Ok(phi(u)?.norm() / (u * u + 0.25)) };

    // Tail cut: beyond U the integrand is bounded by env(U)·(U/u)² at worst
    // algebraic decay, so env(U)·U bounds the neglected part.
    let mut upper = 1.0;
    let cut = int_tol * 1e-3;
    let mut evaluations = 0;
    loop {
        let worst = (1..=8)
            .map(|j| {
                let u = upper * (1.0 + j as f64 / 8.0);
                envelope(u).map(|e| e * u)
            })
            .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))?;
        evaluations += 8;
        if worst < cut {
            break;
        }
        upper *= 2.0;
        if upper > 1e12 {
            return Err(Error::OracleConvergence {
                estimate: worst * scale,
                tol,
                evaluations,
            });
        }
    }

    // Start from segments no longer than half an oscillation of the
    // integrand, otherwise the Kronrod and Gauss rules can alias together
    // and agree on a wrong value.
    let phase = |u: f64| model.log_cf(Complex64::new(u, -0.5), t).im;
    let rate = z.abs() + ((phase(upper) - phase(0.5 * upper)) / (0.5 * upper)).abs();
    let seg = PI / (rate + 1.0);
    let mut breaks = Vec::new();
    let mut x = 0.25f64.min(seg);
    while x < seg {
        breaks.push(x);
        x *= 2.0;
    }
    let mut x = seg;
    while x < upper {
        breaks.push(x);
        x += seg;
    }
    let mut failure = None;
    let q = integrate(
        |u| match phi(u) {
            Ok(p) => {
                let (s, c) = (u * z).sin_cos();
                // Re[e^{-iuz} φ]
                (p.re * c + p.im * s) / (u * u + 0.25)
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        upper,
        &breaks,
        0.5 * int_tol,
        MAX_EVALUATIONS,
    )
    .map_err(|e| match e {
        Error::OracleConvergence { estimate, tol: _, evaluations } => Error::OracleConvergence {
            estimate: estimate * scale,
            tol,
            evaluations,
        },
        other => other,
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let integral = scale * q.value;
    let call = discount * f - integral;
    let put = discount * k - integral;
    let price = match spec.kind {
        OptionKind::Call if k >= f => call,
        OptionKind::Call => put + discount * (f - k),
        OptionKind::Put if k < f => put,
        OptionKind::Put => call - discount * (f - k),
    };
    Ok(PriceResult {
        price,
        kind: spec.kind,
        method: Method::Reference,
        n: evaluations + q.evaluations,
        range: None,
        fallback: Fallback::None,
    })
}

/// Black implied volatility of `price`.
///
/// The price is first reduced to its out-of-the-money part, then the total
/// volatility is bracketed and found by Newton steps that fall back to
/// bisection whenever they leave the bracket.
pub fn implied_vol(price: f64, forward: f64, strike: f64, t: f64, discount: f64, kind: OptionKind) -> Result<f64> {
    OptionSpec::new(forward, strike, t, discount, kind)?;
    ensure(price.is_finite(), "price", price, "must be finite")?;
    let (lower, upper) = match kind {
        OptionKind::Put => (discount * (strike - forward).max(0.0), discount * strike),
        OptionKind::Call => (discount * (forward - strike).max(0.0), discount * forward),
    };
    if price <= lower {
        return Err(Error::NoImpliedVol {
            price,
            bound: PriceBound::Lower,
        });
    }
    if price >= upper {
        return Err(Error::NoImpliedVol {
            price,
            bound: PriceBound::Upper,
        });
    }
    // time value is the out-of-the-money price at the same strike
    let otm_kind = if strike >= forward {
        OptionKind::Call
    } else {
        OptionKind::Put
    };
    let target = if otm_kind == kind {
        price
    } else {
        price - lower
    } / discount;
    let f_of = |s: f64| black_price(forward, strike, 1.0, s, 1.0, otm_kind) - target;

    let (mut lo, mut hi) = (0.0, 1.0);
    while f_of(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NoImpliedVol {
                price,
                bound: PriceBound::Upper,
            });
        }
    }
    // relative to the out-of-the-money target: deep in the wings vega is
    // tiny and an absolute price tolerance would leave σ loose
    let tol = 1e-14 * target;
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = f_of(s);
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d1 = (forward / strike).ln() / s + 0.5 * s;
        let vega = forward * norm_pdf(d1);
        let newton = s - r / vega;
        s = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(s / t.sqrt())
}
