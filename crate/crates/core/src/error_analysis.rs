//! Payoff expansions and the two-term decomposition of the COS error.
//!
//! Writing `v̂` for the full cosine series of the payoff on `[a, b]`, the
//! exact price splits as
//!
//! `reference - cos = B∫_{ℝ∖[a,b]} (v - v̂) f dy + B Σ_{k≥N} Re[φ(ηₖ)e^{-iηₖa}] Vₖ`
//!
//! The full series `v̂` is the even, `2(b-a)`-periodic extension of `v`
//! from `[a, b]`, so the first term needs no coefficients at all, only the
//! density `f`, which is itself recovered by a wide COS expansion.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::char_fn::{cf_unchecked, ModelParams};
use crate::cos_classic::vk_put_classic;
use crate::cos_improved::vk_put_improved;
use crate::cumulants::{model_range, TruncationRange};
use crate::error::{ensure, Result};
use crate::option::{Method, OptionKind, OptionSpec};
use crate::reference::price_reference;

/// Level of the auxiliary range used to recover the density.
pub const DENSITY_LEVEL: f64 = 20.0;
/// Number of cosine terms in the auxiliary density expansion.
pub const DENSITY_TERMS: usize = 1 << 14;

/// Which variable the put payoff is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Centering {
    /// `y = ln(F(T,T)/K)`, payoff `K(1 - e^y)⁺`.
    Classic,
    /// `y = ln(F(T,T)/F(0,T))`, payoff `F(e^z - e^y)⁺`.
    Improved,
}

impl Centering {
    pub fn from_method(m: Method) -> Option<Centering> {
        match m {
            Method::Classic => Some(Centering::Classic),
            Method::Improved => Some(Centering::Improved),
            Method::Reference => None,
        }
    }
}

/// Truncated cosine expansion of a put payoff on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffExpansion {
    pub coefficients: Vec<f64>,
    pub range: TruncationRange,
    pub centering: Centering,
    pub strike: f64,
    pub forward: f64,
}

impl PayoffExpansion {
    /// The first `m` cosine coefficients of the put payoff.
    pub fn new(centering: Centering, strike: f64, forward: f64, range: &TruncationRange, m: usize) -> Result<Self> {
        range.validate()?;
        OptionSpec::put(forward, strike, 1.0, 1.0)?;
        ensure(m >= 1, "M", m as f64, "must be at least 1")?;
        let TruncationRange { a, b, .. } = *range;
        let z = (strike / forward).ln();
        let coefficients = (0..m)
            .map(|k| match centering {
                Centering::Classic => vk_put_classic(k, strike, a, b),
                Centering::Improved => vk_put_improved(k, z.clamp(a, b), forward, a, b) + above_range_constant(k, z, forward, b),
            })
            .collect();
        Ok(PayoffExpansion {
            coefficients,
            range: *range,
            centering,
            strike,
            forward,
        })
    }

    /// The payoff itself in the expansion variable.
    pub fn payoff(&self, y: f64) -> f64 {
        match self.centering {
            Centering::Classic => self.strike * (-y.exp_m1()).max(0.0),
            Centering::Improved => (self.strike - self.forward * y.exp()).max(0.0),
        }
    }

    /// The untruncated series at `y`: the payoff at `y` folded into `[a, b]`.
    pub fn full_series(&self, y: f64) -> f64 {
        self.payoff(fold(y, &self.range))
    }

    /// Partial sum with half weight on the constant term.
    pub fn eval(&self, y: f64) -> f64 {
        payoff_expansion_eval(self, y)
    }

    /// `(b-a)/2 · Σ' Vₖ²`, which tends to `∫_a^b v² dy`.
    pub fn energy(&self) -> f64 {
        let c = &self.coefficients;
        let s: f64 = 0.5 * c[0] * c[0] + c[1..].iter().map(|v| v * v).sum::<f64>();
        0.5 * self.range.width() * s
    }
}

/// For `z > b` the improved payoff is linear in `e^y` over the whole range,
/// which [`vk_put_improved`] at `z = b` misses by the constant
/// `F(e^z - e^b)`.
fn above_range_constant(k: usize, z: f64, forward: f64, b: f64) -> f64 {
    if z > b && k == 0 {
        2.0 * forward * (z.exp() - b.exp())
    } else {
        0.0
    }
}

/// Maps `y` onto `[a, b]` by the even `2(b-a)`-periodic extension.
pub fn fold(y: f64, range: &TruncationRange) -> f64 {
    let w = range.width();
    let r = (y - range.a).rem_euclid(2.0 * w);
    range.a + if r > w { 2.0 * w - r } else { r }
}

/// `½V₀ + Σₖ Vₖ cos(kπ(y-a)/(b-a))`. Outside `[a, b]` this is the even
/// periodic extension, with period `2(b-a)`.
pub fn payoff_expansion_eval(exp: &PayoffExpansion, y: f64) -> f64 {
    let step = PI * (y - exp.range.a) / exp.range.width();
    let c = &exp.coefficients;
    let mut sum = 0.5 * c[0];
    for (k, v) in c.iter().enumerate().skip(1) {
        sum += v * (k as f64 * step).cos();
    }
    sum
}

/// One point of a payoff error profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub strike: f64,
    /// Log forward return `ln(F(T,T)/F(0,T))`.
    pub x: f64,
    /// `v - v̂` in price units.
    pub error: f64,
}

/// `v - v̂` for each strike on `points` equally spaced values of the log
/// forward return spanning `range`, the region that carries the density.
/// Both centerings are reported against the same variable: the classic
/// expansion is read at `y = x - ln(K/F)`.
pub fn payoff_error_profile(
    centering: Centering,
    strikes: &[f64],
    forward: f64,
    range: &TruncationRange,
    m: usize,
    points: usize,
) -> Result<Vec<ProfilePoint>> {
    ensure(points >= 2, "points", points as f64, "must be at least 2")?;
    let mut out = Vec::with_capacity(strikes.len() * points);
    for &strike in strikes {
        let e = PayoffExpansion::new(centering, strike, forward, range, m)?;
        let shift = match centering {
            Centering::Classic => (strike / forward).ln(),
            Centering::Improved => 0.0,
        };
        for j in 0..points {
            let x = range.a + range.width() * j as f64 / (points - 1) as f64;
            let y = x - shift;
            out.push(ProfilePoint {
                strike,
                x,
                error: e.payoff(y) - e.eval(y),
            });
        }
    }
    Ok(out)
}

/// Sup amplitude and signed mean of profile errors.
pub fn profile_stats(points: &[ProfilePoint]) -> (f64, f64) {
    let sup = points.iter().map(|p| p.error.abs()).fold(0.0, f64::max);
    let mean = points.iter().map(|p| p.error).sum::<f64>() / points.len().max(1) as f64;
    (sup, mean)
}

/// A partial sum of the series tail with a bound on what is left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTail {
    /// Undiscounted `Σ_{k=start}^{end-1} Re[φ(ηₖ)e^{-iηₖ(x+a)}] Vₖ`.
    pub sum: f64,
    /// Bound on `|Σ_{k≥end} …|`, infinite when `|φ|` is not seen to decay.
    pub remainder_bound: f64,
}

/// Term `k` of the put's COS sum (with the primed weight on `k = 0`) and
/// `|φ(ηₖ)|`. The classic terms carry the extra phase `e^{-iηₖx}`.
fn series_term(
    model: &ModelParams,
    spec: &OptionSpec,
    range: &TruncationRange,
    centering: Centering,
    k: usize,
) -> Result<(f64, f64)> {
    let TruncationRange { a, b, .. } = *range;
    let z = spec.log_moneyness();
    let eta = k as f64 * PI / (b - a);
    let phi = cf_unchecked(model, Complex64::new(eta, 0.0), spec.t)?;
    let (shift, v) = match centering {
        Centering::Classic => (z + a, vk_put_classic(k, spec.strike, a, b)),
        Centering::Improved => (a, vk_put_improved(k, z.clamp(a, b), spec.forward, a, b)),
    };
    let (s, c) = (eta * shift).sin_cos();
    let w = if k == 0 { 0.5 } else { 1.0 };
    Ok((w * (phi.re * c + phi.im * s) * v, phi.norm()))
}

/// Tail of the COS sum from `start` to `end` for the put at `spec.strike`.
pub fn series_tail(
    model: &ModelParams,
    spec: &OptionSpec,
    range: &TruncationRange,
    centering: Centering,
    start: usize,
    end: usize,
) -> Result<SeriesTail> {
    model.validate()?;
    spec.validate()?;
    range.validate()?;
    ensure(end >= start, "Nmax", end as f64, "must be at least Nstart")?;
    let mut sum = 0.0;
    for k in start..end {
        sum += series_term(model, spec, range, centering, k)?.0;
    }

    let TruncationRange { a, b, .. } = *range;
    // |Vₖ| ≤ 2·scale·(e^a + 2e^{max(z,b)}) for every k ≥ 1
    let scale = match centering {
        Centering::Classic => 2.0 * spec.strike / (b - a),
        Centering::Improved => 2.0 * spec.forward / (b - a),
    };
    let vmax = 2.0 * scale * (a.exp() + 2.0 * spec.log_moneyness().max(b).exp());
    let n = end.max(1);
    let m0 = series_term(model, spec, range, centering, n)?.1;
    let m1 = series_term(model, spec, range, centering, 2 * n)?.1;
    let remainder_bound = if m0 == 0.0 {
        0.0
    } else if m1 < m0 {
        // geometric envelope through |φ(η_n)| and |φ(η_2n)|
        let per_term = (m1 / m0).powf(1.0 / n as f64);
        vmax * m0 / (1.0 - per_term)
    } else {
        f64::INFINITY
    };
    Ok(SeriesTail { sum, remainder_bound })
}

/// The error of one COS price split into its two sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    pub cos_price: f64,
    pub reference: f64,
    /// `B∫_{ℝ∖[a,b]} (v - v̂) f dy`.
    pub payoff_term: f64,
    /// `B Σ_{k≥N} Re[φ(ηₖ)e^{-iηₖ(x+a)}] Vₖ`, summed until `|φ|` is negligible.
    pub tail_term: f64,
    /// `cos_price - reference`.
    pub observed: f64,
}

impl ErrorDecomposition {
    /// What the two terms leave unexplained; zero for an exact decomposition.
    pub fn residual(&self) -> f64 {
        self.observed + self.payoff_term + self.tail_term
    }
}

/// Largest series index summed by [`total_error_decomposition`].
const TAIL_CAP: usize = 1 << 22;

/// Decomposes the error of the `centering` COS put price for `spec`.
///
/// The density comes from a COS expansion with [`DENSITY_TERMS`] terms on
/// the [`DENSITY_LEVEL`] cumulant range (widened to cover `range`). The
/// tail is summed until `|φ(ηₖ)|` stays below `1e-18` for 64 consecutive
/// terms. `ref_tol` is passed to the reference pricer.
pub fn total_error_decomposition(
    model: &ModelParams,
    spec: &OptionSpec,
    centering: Centering,
    n: usize,
    range: &TruncationRange,
    ref_tol: f64,
) -> Result<ErrorDecomposition> {
    let put_spec = spec.with_kind(OptionKind::Put);
    let cos = match centering {
        Centering::Classic => crate::cos_classic::price_put_classic(model, &put_spec, n, range)?,
        Centering::Improved => crate::cos_improved::price_put_improved(model, &put_spec, n, range)?,
    };
    let reference = price_reference(model, &put_spec, ref_tol)?.price;

    let z = spec.log_moneyness();
    let expansion = PayoffExpansion::new(centering, spec.strike, spec.forward, range, 1)?;
    // expansion variable y and log forward return X differ by `shift`
    let shift = match centering {
        Centering::Classic => z,
        Centering::Improved => 0.0,
    };

    let aux = model_range(model, spec.t, DENSITY_LEVEL, true)?;
    let lo = aux.a.min(range.a + shift - 0.5 * range.width());
    let hi = aux.b.max(range.b + shift + 0.5 * range.width());
    let aux = TruncationRange::new(lo, hi)?;
    let density = density_grid(model, spec.t, &aux, DENSITY_TERMS)?;
    let h = aux.width() / DENSITY_TERMS as f64;
    let mut payoff = 0.0;
    for (j, f) in density.iter().enumerate() {
        let x = aux.a + j as f64 * h;
        let y = x - shift;
        if y >= range.a && y <= range.b {
            continue;
        }
        let w = if j == 0 || j == DENSITY_TERMS { 0.5 } else { 1.0 };
        payoff += w * (expansion.payoff(y) - expansion.full_series(y)) * f;
    }
    let payoff_term = spec.discount * payoff * h;

    let tail = if n >= TAIL_CAP {
        0.0
    } else {
        tail_until_negligible(model, spec, centering, range, n)?
    };

    Ok(ErrorDecomposition {
        cos_price: cos.price,
        reference,
        payoff_term,
        tail_term: spec.discount * tail,
        observed: cos.price - reference,
    })
}

fn tail_until_negligible(
    model: &ModelParams,
    spec: &OptionSpec,
    centering: Centering,
    range: &TruncationRange,
    n: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut quiet = 0;
    for k in n..TAIL_CAP {
        let (term, size) = series_term(model, spec, range, centering, k)?;
        sum += term;
        quiet = if size < 1e-18 { quiet + 1 } else { 0 };
        if quiet >= 64 {
            break;
        }
    }
    Ok(sum)
}

/// COS density of the log forward return at `a + j(b-a)/n`, `j = 0..=n`,
/// from the first `n` cosine terms, evaluated with one DCT-I.
pub fn density_grid(model: &ModelParams, t: f64, range: &TruncationRange, n: usize) -> Result<Vec<f64>> {
    ensure(n >= 2, "N", n as f64, "must be at least 2")?;
    let TruncationRange { a, b, .. } = *range;
    let step = PI / (b - a);
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..n {
        let phi = cf_unchecked(model, Complex64::new(k as f64 * step, 0.0), t)?;
        let (s, c) = (k as f64 * step * a).sin_cos();
        coeffs.push(phi.re * c + phi.im * s);
    }
    coeffs.push(0.0);
    Ok(dct1(&coeffs).into_iter().map(|v| v / (b - a)).collect())
}

/// `c₀ + (-1)^j c_n + 2Σ_{k=1}^{n-1} c_k cos(πkj/n)` for `j = 0..=n`, via
/// an FFT of the even extension.
fn dct1(c: &[f64]) -> Vec<f64> {
    let n = c.len() - 1;
    let mut buf: Vec<Complex64> = c
        .iter()
        .chain(c[1..n].iter().rev())
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(2 * n).process(&mut buf);
    buf.truncate(n + 1);
    buf.into_iter().map(|v| v.re).collect()
}
