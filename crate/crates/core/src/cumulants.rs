//! Analytic cumulants of the log forward return and the cosine-expansion
//! truncation range built from them.
//!
//! The closed forms for Heston are differences of exponentials divided by
//! powers of `κ` (up to `κ⁷` for the fourth cumulant), so they cancel
//! catastrophically when `κT` is small. Below [`SMALL_KAPPA_T`] the same
//! quantities are evaluated from the Taylor series in `T` of the Riccati
//! coefficients, which is exact up to rounding there.

use crate::char_fn::{HestonParams, ModelParams, SvjParams};
use crate::error::{ensure, Error, Result};

/// `κT` below which the series evaluation replaces the closed forms.
pub const SMALL_KAPPA_T: f64 = 0.05;

/// Cumulants `c₁, c₂, c₄` of `ln(F(T,T)/F(0,T))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantSet {
    pub c1: f64,
    pub c2: f64,
    /// Full fourth cumulant of the model.
    pub c4: f64,
    /// Fourth cumulant folded into the truncation range when requested.
    /// Equals `c4` except for SVJ, where only the jump part is kept.
    pub c4_range: f64,
    pub model: &'static str,
    pub t: f64,
}

/// Log-return interval `[a, b]` of the cosine expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRange {
    pub a: f64,
    pub b: f64,
    /// Truncation level the range was built with (`NaN` for explicit ranges).
    pub level: f64,
    pub used_c4: bool,
}

impl TruncationRange {
    /// An explicit range, not derived from cumulants.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let r = TruncationRange {
            a,
            b,
            level: f64::NAN,
            used_c4: false,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.a.is_finite(), "a", self.a, "must be finite")?;
        ensure(self.b.is_finite(), "b", self.b, "must be finite")?;
        ensure(self.a < self.b, "b", self.b, "must exceed a")
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// The same range translated by `-z`, i.e. `[a - z, b - z]`.
    pub fn shifted(&self, z: f64) -> TruncationRange {
        TruncationRange {
            a: self.a - z,
            b: self.b - z,
            ..*self
        }
    }
}

/// First cumulant of the Heston log forward return.
pub fn heston_c1(p: &HestonParams, t: f64) -> f64 {
    if p.kappa * t < SMALL_KAPPA_T {
        return heston_series(p, t)[0];
    }
    let HestonParams {
        kappa: k,
        theta,
        v0,
        ..
    } = *p;
    -(-k * t).exp_m1() * (theta - v0) / (2.0 * k) - 0.5 * theta * t
}

/// Second cumulant (variance) of the Heston log forward return.
pub fn heston_c2(p: &HestonParams, t: f64) -> f64 {
    if p.kappa * t < SMALL_KAPPA_T {
        return heston_series(p, t)[1];
    }
    let HestonParams {
        kappa: k,
        theta,
        sigma: s,
        rho: r,
        v0,
    } = *p;
    let e1 = (-k * t).exp();
    let e2 = e1 * e1;
    let k2 = k * k;
    let k3 = k2 * k;
    let s2 = s * s;
    let v0_part = v0 / (4.0 * k3)
        * (4.0 * k2 * (1.0 + (r * s * t - 1.0) * e1)
            + k * (4.0 * r * s * (e1 - 1.0) - 2.0 * s2 * t * e1)
            + s2 * (1.0 - e2));
    let theta_part = theta / (8.0 * k3)
        * (8.0 * k3 * t - 8.0 * k2 * (1.0 + r * s * t + (r * s * t - 1.0) * e1)
            + 2.0 * k * ((1.0 + 2.0 * e1) * s2 * t + 8.0 * (1.0 - e1) * r * s)
            + s2 * (e2 + 4.0 * e1 - 5.0));
    v0_part + theta_part
}

/// Fourth cumulant of the Heston log forward return, `c₄ᴬ + c₄ᴮ`.
pub fn heston_c4(p: &HestonParams, t: f64) -> f64 {
    if p.kappa * t < SMALL_KAPPA_T {
        return heston_series(p, t)[3];
    }
    heston_c4_closed_form(p, t)
}

fn heston_c4_closed_form(p: &HestonParams, t: f64) -> f64 {
    let HestonParams {
        kappa: k,
        theta,
        sigma: s,
        rho: r,
        v0,
    } = *p;
    let e1 = (-k * t).exp();
    let e2 = e1 * e1;
    let e3 = e2 * e1;
    let e4 = e2 * e2;
    let (t2, t3) = (t * t, t * t * t);
    let (r2, r3) = (r * r, r * r * r);
    let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
    let (k2, k3, k4, k5, k6, k7) = (k * k, k.powi(3), k.powi(4), k.powi(5), k.powi(6), k.powi(7));

    // v0 term
    let b_e1 = (t3 * r3 * s - 3.0 * t2 * r2) * k6
        - 1.5 * t * (t2 * r2 * s2 - 2.0 * t * r * (r2 + 2.0) * s + 4.0 * r2 + 2.0) * k5
        + (0.75 * t3 * r * s3 - 6.0 * t2 * (r2 + 0.375) * s2 + 6.0 * t * r * (r2 + 2.0) * s
            - 6.0 * r2)
            * k4
        - 0.125 * s * (t3 * s3 - 24.0 * t2 * r * s2 + (72.0 * t * r2 + 18.0 * t) * s - 48.0 * r3)
            * k3
        - 0.375 * s2 * (t2 * s2 - 7.0 * t * s * r - 3.0) * k2
        - 0.1875 * s3 * (t * s + 10.0 * r) * k
        + 0.375 * s4;
    let b_e2 = (-1.5 - 3.0 * t2 * r2 * s2 + 6.0 * t * s * r) * k4
        + 3.0 * s * (t2 * r * s2 + (-3.0 * t * r2 - 1.5 * t) * s + 3.0 * r) * k3
        - 0.75 * s2 * (t2 * s2 - 10.0 * t * s * r + 12.0 * r2 + 3.0) * k2
        - (9.0 * t * s - 30.0 * r) * s3 * k / 8.0
        - 0.375 * s4;
    let b_e3 = 9.0 * s2
        * ((t * s * r - 1.0) * k2 + (-0.5 * s2 * t + 5.0 / 3.0 * r * s) * k - s2 / 3.0)
        / 8.0;
    let b_const = -6.0
        * (k * r * s - 0.25 * s2 - k2)
        * ((r2 + 0.25) * k2 - 1.25 * k * r * s + 5.0 * s2 / 16.0);
    let c4_b = 2.0 * s2 * v0 / k7
        * (b_e1 * e1 + b_e2 * e2 + b_e3 * e3 - 3.0 * s4 * e4 / 32.0 + b_const);

    // theta term; the constant -3 in the κ⁴ coefficient below is required
    // for c₄ᴬ to vanish at T = 0 and to agree with the series evaluation
    let a_e1 = (t3 * r3 * s - 3.0 * t2 * r2) * k6
        - 1.5 * t * (t2 * r2 * s2 - 4.0 * t * r * (r2 + 1.0) * s + 8.0 * r2 + 2.0) * k5
        + (0.75 * t3 * r * s3 - 10.5 * t2 * (r2 + 3.0 / 14.0) * s2
            + (18.0 * t * r3 + 24.0 * t * r) * s
            - 18.0 * r2
            - 3.0)
            * k4
        - 0.125
            * (t3 * s3 - 42.0 * t2 * r * s2 + (240.0 * t * r2 + 54.0 * t) * s
                - 192.0 * r3
                - 192.0 * r)
            * s
            * k3
        - 0.75 * s2 * (t2 * s2 - 17.5 * t * s * r + 40.0 * r2 + 7.5) * k2
        - 27.0 * s3 * k / 16.0 * (t * s - 20.0 / 3.0 * r)
        - 21.0 * s4 / 16.0;
    let a_e2 = (-0.75 - 1.5 * t2 * r2 * s2 + 3.0 * t * s * r) * k4
        + 1.5 * s * (t2 * r * s2 + (-4.0 * t * r2 - 1.5 * t) * s + 4.0 * r) * k3
        - 0.375 * s2 * (t2 * s2 - 14.0 * t * s * r + 20.0 * r2 + 6.0) * k2
        + (-15.0 * t * s4 / 16.0 + 4.5 * r * s3) * k
        - 21.0 * s4 / 32.0;
    let a_e3 = 0.375 * s2 * ((t * s * r - 1.0) * k2 + (-0.5 * s2 * t + 2.0 * r * s) * k - 0.5 * s2);
    let a_poly = (-1.5 * t - 6.0 * t * r2) * k5
        + ((6.0 * t * r3 + 9.0 * t * r) * s + 18.0 * r2 + 3.75) * k4
        - 9.0 * s * (t * (r2 + 0.25) * s + 8.0 / 3.0 * r3 + 10.0 / 3.0 * r) * k3
        + 15.0 * s2 * k2 / 4.0 * (t * s * r + 10.0 * r2 + 2.2)
        + (-16.5 * r * s3 - 15.0 * t * s4 / 32.0) * k
        + 279.0 * s4 / 128.0;
    let c4_a = -2.0 * s2 * theta / k7
        * (a_e1 * e1 + a_e2 * e2 + a_e3 * e3 - 3.0 * s4 * e4 / 128.0 + a_poly);

    c4_a + c4_b
}

/// `[c₁, c₂, c₃, c₄]` from the Taylor series in `T` of the coefficients of
/// `ln φ(-is) = Σₙ (Aₙ(T) + v₀ Bₙ(T)) sⁿ`.
///
/// `B` solves `B' = ½(s² - s) - (κ - ρσs) B + ½σ²B²`, `A' = κθB`, both
/// starting at zero; matching powers of `s` gives a triangular system whose
/// solutions are entire functions of `T`.
fn heston_series(p: &HestonParams, t: f64) -> [f64; 4] {
    const TERMS: usize = 60;
    let HestonParams {
        kappa,
        theta,
        sigma,
        rho,
        v0,
    } = *p;
    // q[n][m] is the coefficient of (τ/T)^m in Bₙ₊₁(τ)
    let mut q = [[0.0f64; TERMS + 1]; 4];
    for m in 0..TERMS {
        for n in 0..4 {
            let mut rhs = match (n, m) {
                (0, 0) => -0.5,
                (1, 0) => 0.5,
                _ => 0.0,
            };
            rhs -= kappa * q[n][m];
            if n >= 1 {
                rhs += rho * sigma * q[n - 1][m];
            }
            // ½σ² Σ_{i+j=n-1} (Bᵢ Bⱼ)[m], indices shifted by one
            let mut quad = 0.0;
            for i in 0..n {
                let j = n - 1 - i;
                for l in 0..=m {
                    quad += q[i][l] * q[j][m - l];
                }
            }
            rhs += 0.5 * sigma * sigma * quad;
            q[n][m + 1] = t * rhs / (m as f64 + 1.0);
        }
    }
    let factorial = [1.0, 2.0, 6.0, 24.0];
    let mut out = [0.0; 4];
    for n in 0..4 {
        let b: f64 = q[n].iter().sum();
        let a: f64 = kappa
            * theta
            * t
            * q[n]
                .iter()
                .enumerate()
                .map(|(m, c)| c / (m as f64 + 1.0))
                .sum::<f64>();
        out[n] = factorial[n] * (a + v0 * b);
    }
    out
}

/// Cumulants of the plain Heston model.
pub fn heston_cumulants(p: &HestonParams, t: f64) -> CumulantSet {
    let c4 = heston_c4(p, t);
    CumulantSet {
        c1: heston_c1(p, t),
        c2: heston_c2(p, t),
        c4,
        c4_range: c4,
        model: "heston",
        t,
    }
}

/// Heston cumulants plus the lognormal jump contribution. The range
/// cumulant keeps only the jump part of `c₄`.
pub fn svj_cumulants(p: &SvjParams, t: f64) -> CumulantSet {
    let h = heston_cumulants(&p.heston, t);
    let alpha = p.alpha();
    let (a2, d2) = (alpha * alpha, p.delta * p.delta);
    let lt = p.lambda * t;
    let c4_jump = (a2 * a2 + 6.0 * d2 * a2 + 3.0 * d2 * d2) * lt;
    CumulantSet {
        c1: h.c1 + (alpha - p.kbar) * lt,
        c2: h.c2 + (a2 + d2) * lt,
        c4: h.c4 + c4_jump,
        c4_range: c4_jump,
        model: "svj",
        t,
    }
}

/// Sum of the two legs' Heston cumulants.
pub fn double_heston_cumulants(p1: &HestonParams, p2: &HestonParams, t: f64) -> CumulantSet {
    let (a, b) = (heston_cumulants(p1, t), heston_cumulants(p2, t));
    CumulantSet {
        c1: a.c1 + b.c1,
        c2: a.c2 + b.c2,
        c4: a.c4 + b.c4,
        c4_range: a.c4 + b.c4,
        model: "double-heston",
        t,
    }
}

/// Analytic cumulants for any supported model.
pub fn cumulants(model: &ModelParams, t: f64) -> Result<CumulantSet> {
    ensure(t > 0.0 && t.is_finite(), "T", t, "must be positive")?;
    model.validate()?;
    Ok(match model {
        ModelParams::Black { sigma } => CumulantSet {
            c1: -0.5 * sigma * sigma * t,
            c2: sigma * sigma * t,
            c4: 0.0,
            c4_range: 0.0,
            model: "black",
            t,
        },
        ModelParams::Heston(p) => heston_cumulants(p, t),
        ModelParams::Svj(p) => svj_cumulants(p, t),
        ModelParams::DoubleHeston(p1, p2) => double_heston_cumulants(p1, p2, t),
    })
}

/// `[c₁ - Lw, c₁ + Lw]` with `w = √|c₂|`, or `w = √(c₂ + √|c₄|)` when the
/// fourth cumulant is folded in.
pub fn truncation_range(c: &CumulantSet, level: f64, use_c4: bool) -> Result<TruncationRange> {
    ensure(level > 0.0 && level.is_finite(), "L", level, "must be positive")?;
    if !(c.c1.is_finite() && c.c2.is_finite() && c.c4_range.is_finite()) {
        return Err(Error::InvalidCumulants {
            c1: c.c1,
            c2: c.c2,
            c4: c.c4_range,
        });
    }
    let w = if use_c4 {
        (c.c2 + c.c4_range.abs().sqrt()).abs().sqrt()
    } else {
        c.c2.abs().sqrt()
    };
    let r = TruncationRange {
        a: c.c1 - level * w,
        b: c.c1 + level * w,
        level,
        used_c4: use_c4,
    };
    if r.a < r.b {
        Ok(r)
    } else {
        Err(Error::InvalidCumulants {
            c1: c.c1,
            c2: c.c2,
            c4: c.c4_range,
        })
    }
}

/// Convenience: analytic cumulants followed by [`truncation_range`].
pub fn model_range(model: &ModelParams, t: f64, level: f64, use_c4: bool) -> Result<TruncationRange> {
    truncation_range(&cumulants(model, t)?, level, use_c4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::char_fn::cgf_derivative_numeric;
    use proptest::prelude::*;

    fn volatile() -> HestonParams {
        HestonParams::new(0.1, 0.01, 2.0, 0.5, 0.0225).unwrap()
    }

    fn short_dated() -> HestonParams {
        HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn volatile_values() {
        let p = volatile();
        assert!((heston_c1(&p, 1.0) + 0.01095).abs() < 5e-5);
        assert!((heston_c2(&p, 1.0) - 0.01808).abs() < 5e-5);
        assert!((heston_c4(&p, 1.0) - 0.05827).abs() < 5e-4);
    }

    #[test]
    fn degenerate_cases() {
        let p = HestonParams::new(2.5, 0.1, 0.7, 0.3, 0.1).unwrap();
        assert!((heston_c1(&p, 1.0) + 0.05).abs() < 1e-15);
        let p = HestonParams::new(2.5, 0.1, 0.0, 0.3, 0.1).unwrap();
        assert!((heston_c2(&p, 3.0) - 0.3).abs() < 1e-14);
        assert_eq!(heston_c4(&p, 3.0), 0.0);
        let black = cumulants(&ModelParams::Black { sigma: 0.3 }, 2.0).unwrap();
        assert_eq!(black.c4, 0.0);
    }

    #[test]
    fn series_matches_closed_form_where_both_are_accurate() {
        for (k, t) in [(0.1, 1.0), (1.0, 0.1), (0.5, 0.3), (2.0, 0.5)] {
            let p = HestonParams::new(k, 0.04, 0.8, -0.6, 0.06).unwrap();
            let s = heston_series(&p, t);
            assert!(rel(s[0], heston_c1(&p, t)) < 1e-12);
            assert!(rel(s[1], heston_c2(&p, t)) < 1e-11);
            assert!(rel(s[3], heston_c4_closed_form(&p, t)) < 1e-8, "{k} {t}");
        }
    }

    #[test]
    fn short_dated_numeric_oracle() {
        let p = short_dated();
        let t = 2.0 / 365.0;
        let m = ModelParams::Heston(p);
        assert!(rel(heston_c1(&p, t), cgf_derivative_numeric(&m, t, 1).unwrap()) < 1e-6);
        assert!(rel(heston_c2(&p, t), cgf_derivative_numeric(&m, t, 2).unwrap()) < 1e-6);
        assert!(rel(heston_c4(&p, t), cgf_derivative_numeric(&m, t, 4).unwrap()) < 1e-4);
    }

    #[test]
    fn svj_cases() {
        let h = volatile();
        let base = heston_cumulants(&h, 1.0);
        let no_jumps = svj_cumulants(&SvjParams::new(h, 0.0, -0.1, 0.3).unwrap(), 1.0);
        assert_eq!((no_jumps.c1, no_jumps.c2, no_jumps.c4), (base.c1, base.c2, base.c4));
        assert_eq!(no_jumps.c4_range, 0.0);

        let delta: f64 = 0.3;
        let kbar = (0.5 * delta * delta).exp() - 1.0;
        let p = SvjParams::new(h, 0.7, kbar, delta).unwrap();
        assert!(p.alpha().abs() < 1e-15);
        let c = svj_cumulants(&p, 1.0);
        assert!((c.c1 - (base.c1 - kbar * 0.7)).abs() < 1e-15);
        assert!((c.c2 - (base.c2 + delta * delta * 0.7)).abs() < 1e-15);
        assert!((c.c4_range - 3.0 * delta.powi(4) * 0.7).abs() < 1e-15);

        let p = SvjParams::new(h, 0.5, -0.1, 0.3).unwrap();
        let c = svj_cumulants(&p, 1.0);
        let m = ModelParams::Svj(p);
        assert!(rel(c.c1, cgf_derivative_numeric(&m, 1.0, 1).unwrap()) < 1e-5);
        assert!(rel(c.c2, cgf_derivative_numeric(&m, 1.0, 2).unwrap()) < 1e-5);
        assert!(rel(c.c4, cgf_derivative_numeric(&m, 1.0, 4).unwrap()) < 1e-3);
    }

    #[test]
    fn double_heston_cases() {
        let h = volatile();
        let zero = HestonParams::new(1.0, 0.0, 0.5, 0.0, 0.0).unwrap();
        let single = heston_cumulants(&h, 1.0);
        let c = double_heston_cumulants(&h, &zero, 1.0);
        assert_eq!((c.c1, c.c2, c.c4), (single.c1, single.c2, single.c4));
        let c = double_heston_cumulants(&h, &h, 1.0);
        assert_eq!((c.c1, c.c2, c.c4), (2.0 * single.c1, 2.0 * single.c2, 2.0 * single.c4));

        let h2 = HestonParams::new(3.0, 0.05, 0.6, -0.4, 0.02).unwrap();
        let c = double_heston_cumulants(&h, &h2, 0.75);
        let m = ModelParams::DoubleHeston(h, h2);
        assert!(rel(c.c1, cgf_derivative_numeric(&m, 0.75, 1).unwrap()) < 1e-6);
        assert!(rel(c.c2, cgf_derivative_numeric(&m, 0.75, 2).unwrap()) < 1e-6);
    }

    #[test]
    fn range_levels() {
        let m = ModelParams::Heston(short_dated());
        let t = 2.0 / 365.0;
        for (l, b, strike) in [(12.0, 0.2810, 1.32), (16.0, 0.3747, 1.45), (24.0, 0.5622, 1.75)] {
            let r = model_range(&m, t, l, false).unwrap();
            assert!((r.b - b).abs() < 5e-4, "L={l}: {}", r.b);
            assert!(((r.b.exp() * 100.0).round() / 100.0 - strike).abs() < 1e-12);
        }
    }

    #[test]
    fn direct_substitution() {
        let c = CumulantSet {
            c1: 0.0,
            c2: 0.01,
            c4: 0.0,
            c4_range: 0.0,
            model: "test",
            t: 1.0,
        };
        let r = truncation_range(&c, 10.0, false).unwrap();
        assert!((r.a + 1.0).abs() < 1e-15 && (r.b - 1.0).abs() < 1e-15);
        assert!(truncation_range(&c, 0.0, false).is_err());
        let bad = CumulantSet { c2: f64::NAN, ..c };
        assert!(matches!(
            truncation_range(&bad, 10.0, false),
            Err(Error::InvalidCumulants { .. })
        ));
    }

    fn heston_family() -> impl Strategy<Value = (HestonParams, f64)> {
        (
            0.05..5.0f64,
            1e-4..0.5f64,
            1e-4..0.5f64,
            1e-3..3.0f64,
            -0.95..0.95f64,
            1.0 / 365.0..10.0f64,
        )
            .prop_map(|(k, th, v0, s, r, t)| (HestonParams::new(k, th, s, r, v0).unwrap(), t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn analytic_matches_numeric((p, t) in heston_family()) {
            let m = ModelParams::Heston(p);
            let c = heston_cumulants(&p, t);
            let n1 = cgf_derivative_numeric(&m, t, 1).unwrap();
            let n2 = cgf_derivative_numeric(&m, t, 2).unwrap();
            let n4 = cgf_derivative_numeric(&m, t, 4).unwrap();
            prop_assert!((c.c1 - n1).abs() <= (1e-5 * n1.abs()).max(1e-10), "c1 {} vs {}", c.c1, n1);
            prop_assert!((c.c2 - n2).abs() <= (1e-5 * n2.abs()).max(1e-10), "c2 {} vs {}", c.c2, n2);
            prop_assert!((c.c4 - n4).abs() <= (1e-3 * n4.abs()).max(1e-10), "c4 {} vs {}", c.c4, n4);
            prop_assert!(c.c2 >= 0.0);
        }

        #[test]
        fn range_symmetric_and_monotone((p, t) in heston_family(), l in 1.0..30.0f64) {
            let c = heston_cumulants(&p, t);
            let r = truncation_range(&c, l, false).unwrap();
            let mid = 0.5 * (r.a + r.b);
            prop_assert!((mid - c.c1).abs() <= 4.0 * f64::EPSILON * (c.c1.abs() + r.b - r.a));
            let wider = truncation_range(&c, l * 1.01, false).unwrap();
            prop_assert!(wider.b > r.b);
        }
    }
}
