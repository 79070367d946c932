//! COS pricing with payoff coefficients centered on the forward.
//!
//! The expansion variable is `X = ln(F(T,T)/F(0,T))` for every strike, so
//! the terms `Re[φ(ηₖ) e^{-iηₖa}]` are computed once per maturity and each
//! strike only changes the payoff coefficients `Vₖ(z)`, `z = ln(K/F)`.

use std::f64::consts::PI;

use crate::char_fn::ModelParams;
use crate::cos_classic::{classic_sum, phi_values, unit_coefficients};
use crate::cumulants::TruncationRange;
use crate::error::{ensure, Result};
use crate::option::{clamp_tiny_negative, to_kind, Fallback, Method, OptionKind, OptionSpec, PriceResult};

/// Strike-independent precomputation for one model, maturity, range and
/// series length.
#[derive(Debug, Clone, PartialEq)]
pub struct CosEngine {
    model: ModelParams,
    t: f64,
    range: TruncationRange,
    forward: f64,
    discount: f64,
    phi_terms: Vec<f64>,
}

/// Builds a [`CosEngine`], evaluating the characteristic function `n` times.
pub fn build_engine(
    model: &ModelParams,
    forward: f64,
    discount: f64,
    t: f64,
    n: usize,
    range: &TruncationRange,
) -> Result<CosEngine> {
    model.validate()?;
    range.validate()?;
    OptionSpec::put(forward, forward, t, discount)?;
    ensure(n >= 2, "N", n as f64, "must be at least 2")?;
    let step = PI / range.width();
    let phi_terms = phi_values(model, t, n, range)?
        .into_iter()
        .enumerate()
        .map(|(k, phi)| {
            let (s, c) = (k as f64 * step * range.a).sin_cos();
            // Re[φ e^{-iηa}]
            phi.re * c + phi.im * s
        })
        .collect();
    Ok(CosEngine {
        model: *model,
        t,
        range: *range,
        forward,
        discount,
        phi_terms,
    })
}

impl CosEngine {
    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn range(&self) -> &TruncationRange {
        &self.range
    }

    pub fn forward(&self) -> f64 {
        self.forward
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn n(&self) -> usize {
        self.phi_terms.len()
    }

    /// `Re[φ(ηₖ) e^{-iηₖa}]` for `k = 0..N`.
    pub fn phi_terms(&self) -> &[f64] {
        &self.phi_terms
    }

    /// Undiscounted expansion value of the put with log-moneyness `z`,
    /// without range checks.
    pub(crate) fn raw_put(&self, z: f64) -> f64 {
        let TruncationRange { a, b, .. } = self.range;
        let f = self.forward;
        let step = PI / (b - a);
        let (ea, ez) = (a.exp(), z.exp());
        let scale = 2.0 * f / (b - a);
        let mut sum = 0.5 * self.phi_terms[0] * scale * (ea - ez + ez * (z - a));
        for k in 1..self.phi_terms.len() {
            let eta = k as f64 * step;
            let (s, c) = (eta * (z - a)).sin_cos();
            let v = scale * ((ea - ez * (c + eta * s)) / (1.0 + eta * eta) + ez * s / eta);
            sum += self.phi_terms[k] * v;
        }
        sum
    }

    /// Put price at `strike`; `z < a` gives zero and `z > b` the discounted
    /// intrinsic value.
    pub fn price_put(&self, strike: f64) -> Result<PriceResult> {
        ensure(strike > 0.0 && strike.is_finite(), "K", strike, "must be positive")?;
        let z = (strike / self.forward).ln();
        let (price, fallback) = if z < self.range.a {
            (0.0, Fallback::Zero)
        } else if z > self.range.b {
            (self.discount * (strike - self.forward).max(0.0), Fallback::Intrinsic)
        } else {
            (clamp_tiny_negative(self.discount * self.raw_put(z)), Fallback::None)
        };
        Ok(PriceResult {
            price,
            kind: OptionKind::Put,
            method: Method::Improved,
            n: self.n(),
            range: Some(self.range),
            fallback,
        })
    }

    /// Price of `kind` at `strike`, calls via put–call parity.
    pub fn price(&self, strike: f64, kind: OptionKind) -> Result<PriceResult> {
        let spec = OptionSpec::new(self.forward, strike, self.t, self.discount, kind)?;
        Ok(to_kind(self.price_put(strike)?, &spec))
    }

    /// Prices a strip of strikes; element `i` equals `self.price(strikes[i], kind)`.
    pub fn price_strip(&self, strikes: &[f64], kind: OptionKind) -> Result<Vec<PriceResult>> {
        strikes.iter().map(|&k| self.price(k, kind)).collect()
    }
}

/// Cosine coefficient of the forward-centered put payoff `F(e^z - e^X)⁺` on `[a, b]`.
pub fn vk_put_improved(k: usize, z: f64, forward: f64, a: f64, b: f64) -> f64 {
    let scale = 2.0 * forward / (b - a);
    let (ea, ez) = (a.exp(), z.exp());
    if k == 0 {
        return scale * (ea - ez + ez * (z - a));
    }
    let eta = k as f64 * PI / (b - a);
    let (s, c) = (eta * (z - a)).sin_cos();
    scale * ((ea - ez * (c + eta * s)) / (1.0 + eta * eta) + ez * s / eta)
}

/// Single-strike improved COS price. Builds a throwaway engine; use
/// [`build_engine`] for more than one strike.
pub fn price_put_improved(model: &ModelParams, spec: &OptionSpec, n: usize, range: &TruncationRange) -> Result<PriceResult> {
    spec.validate()?;
    let engine = build_engine(model, spec.forward, spec.discount, spec.t, n, range)?;
    engine.price(spec.strike, spec.kind)
}

/// The improved put price on `range` and the raw classic COS sum on
/// `range` shifted by `-z`, both discounted. They are equal up to rounding.
pub fn shift_equivalence_check(
    model: &ModelParams,
    spec: &OptionSpec,
    n: usize,
    range: &TruncationRange,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let engine = build_engine(model, spec.forward, spec.discount, spec.t, n, range)?;
    let z = spec.log_moneyness();
    let improved = spec.discount * engine.raw_put(z);
    let shifted = range.shifted(z);
    shifted.validate()?;
    // the shifted range has the same width, so φ(ηₖ) is unchanged
    let phis = phi_values(model, spec.t, n, range)?;
    let unit = unit_coefficients(n, &shifted);
    let classic = spec.discount * classic_sum(&phis, &unit, spec.strike, z, &shifted);
    Ok((improved, classic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cos_classic::{chi, psi};
    use crate::quad::integrate;

    #[test]
    fn coefficients_vanish_at_lower_edge() {
        for k in 0..50 {
            assert!(vk_put_improved(k, -2.0, 1.0, -2.0, 2.0).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn coefficients_match_quadrature() {
        let (z, f, a, b) = (-0.3, 1.0, -2.0, 2.0);
        for k in 0..=10 {
            let w = k as f64 * PI / (b - a);
            let q = integrate(
                |y: f64| f * (z.exp() - y.exp()) * (w * (y - a)).cos(),
                a,
                z,
                &[],
                1e-15,
                1_000_000,
            )
            .unwrap()
            .value;
            let q = 2.0 / (b - a) * q;
            assert!((vk_put_improved(k, z, f, a, b) - q).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn coefficients_are_chi_psi_composition() {
        let (f, a, b) = (2016.0, -3.45125, 3.025);
        for z in [-3.0, -0.4, 0.0, 1.1, 2.9] {
            let strike = f * f64::exp(z);
            for k in 0..300 {
                let composed = 2.0 / (b - a) * (-f * chi(k, a, z, a, b) + strike * psi(k, a, z, a, b));
                let direct = vk_put_improved(k, z, f, a, b);
                assert!((direct - composed).abs() <= 1e-13 * f, "z={z} k={k}: {direct} {composed}");
            }
        }
    }
}
