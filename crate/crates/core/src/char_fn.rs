//! Characteristic functions of the log forward return `ln(F(T,T)/F(0,T))`.
//!
//! Every model is normalized so that `φ(0) = 1` and `φ(-i) = 1`, i.e. the
//! forward is a martingale. The Heston leg uses the rotation-free ("little
//! trap") form, rewritten so that the `1/σ²` factors cancel analytically.
//! This keeps the function smooth down to `σ = 0` and continuous in `u`.

use num_complex::Complex64;

use crate::error::{ensure, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Heston stochastic volatility parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    /// Mean reversion speed.
    pub kappa: f64,
    /// Long-run variance.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Spot/variance correlation.
    pub rho: f64,
    /// Initial variance.
    pub v0: f64,
}

impl HestonParams {
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, v0: f64) -> Result<Self> {
        let p = HestonParams {
            kappa,
            theta,
            sigma,
            rho,
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.kappa > 0.0 && self.kappa.is_finite(), "kappa", self.kappa, "must be positive")?;
        ensure(self.theta >= 0.0 && self.theta.is_finite(), "theta", self.theta, "must be non-negative")?;
        ensure(self.sigma >= 0.0 && self.sigma.is_finite(), "sigma", self.sigma, "must be non-negative")?;
        ensure(self.rho.abs() <= 1.0, "rho", self.rho, "must lie in [-1, 1]")?;
        ensure(self.v0 >= 0.0 && self.v0.is_finite(), "v0", self.v0, "must be non-negative")
    }

    /// `ln φ(u)` for the Heston log forward return.
    pub fn log_cf(&self, u: Complex64, t: f64) -> Complex64 {
        let HestonParams {
            kappa,
            theta,
            sigma,
            rho,
            v0,
        } = *self;
        let s2 = sigma * sigma;
        // iu + u², which vanishes at u = 0 and u = -i
        let w = I * u + u * u;
        let beta = kappa - rho * sigma * I * u;
        let mut d = (beta * beta + s2 * w).sqrt();
        // Off the real axis β + d can vanish (at u = -i when κ < ρσ). The
        // formula is even in d, so take the other root there.
        if (beta + d).norm() <= 1e-8 * beta.norm() {
            d = -d;
        }
        let bpd = beta + d;
        // (β - d) / σ² = -w / (β + d)
        let bmd_over_s2 = -w / bpd;
        let q = bmd_over_s2 / bpd;
        let g = q * s2;
        let one_minus_e = -expm1(-d * t);
        let e = (-d * t).exp();
        let big_d = bmd_over_s2 * one_minus_e / (1.0 - g * e);
        // ln((1 - g e^{-dT}) / (1 - g)) / σ², expressed through ln(1 + x)/x
        let x_over_s2 = q * one_minus_e / (1.0 - g);
        let log_term = x_over_s2 * ln1p_ratio(x_over_s2 * s2);
        let big_c = kappa * theta * (bmd_over_s2 * t - 2.0 * log_term);
        big_c + big_d * v0
    }
}

/// Heston dynamics plus lognormal jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvjParams {
    pub heston: HestonParams,
    /// Jump intensity per year.
    pub lambda: f64,
    /// Mean relative jump size, `E[e^J] - 1`.
    pub kbar: f64,
    /// Volatility of the log jump size.
    pub delta: f64,
}

impl SvjParams {
    pub fn new(heston: HestonParams, lambda: f64, kbar: f64, delta: f64) -> Result<Self> {
        let p = SvjParams {
            heston,
            lambda,
            kbar,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.heston.validate()?;
        ensure(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda", self.lambda, "must be non-negative")?;
        ensure(self.kbar > -1.0 && self.kbar.is_finite(), "kbar", self.kbar, "must exceed -1")?;
        ensure(self.delta >= 0.0 && self.delta.is_finite(), "delta", self.delta, "must be non-negative")
    }

    /// Mean of the log jump size, `ln(1 + k̄) - δ²/2`.
    pub fn alpha(&self) -> f64 {
        self.kbar.ln_1p() - 0.5 * self.delta * self.delta
    }

    /// Compensated compound Poisson part of `ln φ(u)`.
    pub fn jump_log_cf(&self, u: Complex64, t: f64) -> Complex64 {
        let jump = expm1(I * u * self.alpha() - 0.5 * self.delta * self.delta * u * u);
        self.lambda * t * (jump - I * u * self.kbar)
    }
}

/// Model selector for all pricing routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    /// Lognormal forward with volatility `sigma`.
    Black { sigma: f64 },
    Heston(HestonParams),
    Svj(SvjParams),
    /// Two independent variance factors driving one asset.
    DoubleHeston(HestonParams, HestonParams),
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Black { sigma } => {
                ensure(*sigma > 0.0 && sigma.is_finite(), "sigma", *sigma, "must be positive")
            }
            ModelParams::Heston(h) => h.validate(),
            ModelParams::Svj(s) => s.validate(),
            ModelParams::DoubleHeston(h1, h2) => {
                h1.validate()?;
                h2.validate()
            }
        }
    }

    /// Short lowercase tag, as used on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            ModelParams::Black { .. } => "black",
            ModelParams::Heston(_) => "heston",
            ModelParams::Svj(_) => "svj",
            ModelParams::DoubleHeston(..) => "double-heston",
        }
    }

    /// `ln φ(u)` without validation or overflow checks.
    pub fn log_cf(&self, u: Complex64, t: f64) -> Complex64 {
        match self {
            ModelParams::Black { sigma } => -0.5 * sigma * sigma * t * (u * u + I * u),
            ModelParams::Heston(h) => h.log_cf(u, t),
            ModelParams::Svj(s) => s.heston.log_cf(u, t) + s.jump_log_cf(u, t),
            ModelParams::DoubleHeston(h1, h2) => h1.log_cf(u, t) + h2.log_cf(u, t),
        }
    }
}

/// Characteristic function `φ(u) = E[exp(iu ln(F(T,T)/F(0,T)))]`.
pub fn cf(model: &ModelParams, u: Complex64, t: f64) -> Result<Complex64> {
    ensure(t > 0.0 && t.is_finite(), "T", t, "must be positive")?;
    model.validate()?;
    cf_unchecked(model, u, t)
}

/// [`cf`] without parameter validation, for hot loops over a model that was
/// validated once.
pub(crate) fn cf_unchecked(model: &ModelParams, u: Complex64, t: f64) -> Result<Complex64> {
    let l = model.log_cf(u, t);
    // exp of a very negative real part underflows to a legitimate zero
    if l.re.is_nan() || l.im.is_nan() || l.re == f64::INFINITY {
        return Err(Error::NumericalOverflow { u, t });
    }
    if l.re < -745.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let v = l.exp();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalOverflow { u, t })
    }
}

/// Numerical cumulant: the `order`-th derivative at 0 of
/// `g(s) = ln φ(-is)`, by central differences refined with Ridders'
/// Richardson extrapolation.
///
/// `order` must be 1, 2 or 4.
pub fn cgf_derivative_numeric(model: &ModelParams, t: f64, order: u32) -> Result<f64> {
    ensure(t > 0.0 && t.is_finite(), "T", t, "must be positive")?;
    model.validate()?;
    ensure(
        matches!(order, 1 | 2 | 4),
        "order",
        order as f64,
        "must be 1, 2 or 4",
    )?;
    let g = |s: f64| -> Result<f64> {
        let v = model.log_cf(Complex64::new(0.0, -s), t);
        if v.re.is_finite() && v.im.abs() <= 1e-9 * (1.0 + v.re.abs()) {
            Ok(v.re)
        } else {
            Err(Error::StencilOverflow { order, step: s })
        }
    };

    // Steps are measured in units of the distribution's own scale 1/√c₂.
    let pilot = 1e-4;
    let c2_pilot = (g(pilot)? - 2.0 * g(0.0)? + g(-pilot)?) / (pilot * pilot);
    let scale = (1.0 / c2_pilot.abs().sqrt()).clamp(1.0, 100.0);

    let diff = |h: f64| -> Result<f64> {
        Ok(match order {
            1 => (g(h)? - g(-h)?) / (2.0 * h),
            2 => (g(h)? - 2.0 * g(0.0)? + g(-h)?) / (h * h),
            _ => {
                (g(2.0 * h)? - 4.0 * g(h)? + 6.0 * g(0.0)? - 4.0 * g(-h)? + g(-2.0 * h)?)
                    / h.powi(4)
            }
        })
    };

    // Ridders' extrapolation tableau. The starting step shrinks until g is
    // finite, real and convex (as a cumulant generating function must be)
    // on three times the stencil width. Past a moment explosion the closed
    // forms continue analytically to values that can look finite and real.
    let reach = if order == 4 { 6.0 } else { 3.0 };
    let mut h = 0.1 * scale;
    loop {
        if h < 1e-6 {
            return Err(Error::StencilOverflow { order, step: h });
        }
        if stencil_is_admissible(&g, reach * h) {
            break;
        }
        h *= 0.5;
    }
    let first = diff(h)?;
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 16;
    let mut tab = [[0.0f64; NTAB]; NTAB];
    tab[0][0] = first;
    let mut best = first;
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        tab[0][i] = diff(h)?;
        let mut fac = CON2;
        for j in 1..=i {
            tab[j][i] = (tab[j - 1][i] * fac - tab[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (tab[j][i] - tab[j - 1][i]).abs().max((tab[j][i] - tab[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = tab[j][i];
            }
        }
        if i >= 6 && (tab[i][i] - tab[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    Ok(best)
}

fn stencil_is_admissible(g: &impl Fn(f64) -> Result<f64>, reach: f64) -> bool {
    const POINTS: usize = 64;
    let step = 2.0 * reach / POINTS as f64;
    let values: Result<Vec<f64>> = (0..=POINTS)
        .map(|j| g(-reach + j as f64 * step))
        .collect();
    let Ok(values) = values else {
        return false;
    };
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values
        .windows(3)
        .all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-10 * scale)
}

/// `e^z - 1` without cancellation for small `z`.
pub(crate) fn expm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * c - 2.0 * half * half,
        z.re.exp() * s,
    )
}

/// `ln(1 + x) / x`, equal to 1 at `x = 0`.
fn ln1p_ratio(x: Complex64) -> Complex64 {
    if x.norm_sqr() < 1e-300 {
        return Complex64::new(1.0, 0.0);
    }
    let re = 0.5 * (2.0 * x.re + x.re * x.re + x.im * x.im).ln_1p();
    let im = x.im.atan2(1.0 + x.re);
    Complex64::new(re, im) / x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn short_dated() -> ModelParams {
        ModelParams::Heston(HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap())
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Integrates the Heston Riccati system for `A(τ), B(τ)` with
    /// `ln φ = A + B·v0`, using classical RK4 with a fine fixed step.
    fn riccati_log_cf(p: &HestonParams, u: Complex64, t: f64, steps: usize) -> Complex64 {
        let w = I * u + u * u;
        let rhs = |b: Complex64| -> (Complex64, Complex64) {
            let db = -0.5 * w - (p.kappa - p.rho * p.sigma * I * u) * b
                + 0.5 * p.sigma * p.sigma * b * b;
            (p.kappa * p.theta * b, db)
        };
        let h = t / steps as f64;
        let (mut a, mut b) = (c(0.0), c(0.0));
        for _ in 0..steps {
            let (ka1, kb1) = rhs(b);
            let (ka2, kb2) = rhs(b + 0.5 * h * kb1);
            let (ka3, kb3) = rhs(b + 0.5 * h * kb2);
            let (ka4, kb4) = rhs(b + h * kb3);
            a += h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
            b += h / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
        }
        a + b * p.v0
    }

    #[test]
    fn phi_at_zero_is_one() {
        let h = HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap();
        let models = [
            ModelParams::Black { sigma: 0.55 },
            short_dated(),
            ModelParams::Svj(SvjParams::new(h, 0.5, -0.1, 0.3).unwrap()),
            ModelParams::DoubleHeston(h, HestonParams::new(2.0, 0.04, 0.5, 0.3, 0.02).unwrap()),
            // κ < ρσ puts a removable singularity at u = -i
            ModelParams::Heston(HestonParams::new(0.1, 0.01, 2.0, 0.5, 0.0225).unwrap()),
        ];
        for m in &models {
            let v = cf(m, c(0.0), 1.0).unwrap();
            assert!((v - 1.0).norm() <= 1e-14, "{m:?}: {v}");
            // martingale
            let v = cf(m, Complex64::new(0.0, -1.0), 1.0).unwrap();
            assert!((v - 1.0).norm() <= 1e-13, "{m:?}: {v}");
        }
    }

    #[test]
    fn black_closed_form() {
        let m = ModelParams::Black { sigma: 0.55 };
        let v = cf(&m, c(1.0), 1.0).unwrap();
        let expected = Complex64::new(-0.15125, -0.15125).exp();
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn heston_matches_riccati_ode() {
        let p = HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap();
        let t = 2.0 / 365.0;
        // η_k for the L = 12 range of width ≈ 0.562
        for k in [1, 7, 20, 45, 80, 110, 150, 190, 230, 255] {
            let u = k as f64 * std::f64::consts::PI / 0.5621;
            let exact = riccati_log_cf(&p, c(u), t, 20_000).exp();
            let v = cf(&ModelParams::Heston(p), c(u), t).unwrap();
            assert!((v - exact).norm() <= 1e-10, "k={k}: {v} vs {exact}");
        }
        // a long maturity, strongly non-Gaussian leg
        let p = HestonParams::new(0.1, 0.01, 2.0, 0.5, 0.0225).unwrap();
        for u in [0.3, 1.0, 4.0, 15.0, 60.0] {
            let exact = riccati_log_cf(&p, c(u), 1.0, 40_000).exp();
            let v = cf(&ModelParams::Heston(p), c(u), 1.0).unwrap();
            assert!((v - exact).norm() <= 1e-10, "u={u}: {v} vs {exact}");
        }
        // the shifted contour used by the reference pricer, where Re β < 0
        for u in [0.0, 0.5, 2.0, 10.0, 40.0] {
            let u = Complex64::new(u, -0.5);
            let exact = riccati_log_cf(&p, u, 1.0, 40_000).exp();
            let v = cf(&ModelParams::Heston(p), u, 1.0).unwrap();
            assert!((v - exact).norm() <= 1e-10, "u={u}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_vol_of_vol_is_deterministic_variance() {
        let p = HestonParams::new(1.5, 0.04, 0.0, -0.5, 0.09).unwrap();
        let t = 2.0;
        let var = p.theta * t + (p.v0 - p.theta) * (1.0 - (-p.kappa * t).exp()) / p.kappa;
        for u in [0.5, 2.0, 7.0] {
            let expected = (-0.5 * var * (c(u) * c(u) + I * u)).exp();
            let v = cf(&ModelParams::Heston(p), c(u), t).unwrap();
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn svj_without_jumps_is_heston() {
        let h = HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap();
        let svj = ModelParams::Svj(SvjParams::new(h, 0.0, -0.1, 0.3).unwrap());
        for u in [0.1, 1.0, 10.0, 100.0] {
            let a = cf(&svj, c(u), 0.5).unwrap();
            let b = cf(&ModelParams::Heston(h), c(u), 0.5).unwrap();
            assert!((a - b).norm() <= 1e-14);
        }
    }

    #[test]
    fn double_heston_is_product_of_legs() {
        let h1 = HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1).unwrap();
        let h2 = HestonParams::new(3.0, 0.02, 0.4, 0.2, 0.03).unwrap();
        let m = ModelParams::DoubleHeston(h1, h2);
        for u in [0.1, 1.0, 5.0, 25.0] {
            let a = cf(&m, c(u), 1.5).unwrap();
            let b = cf(&ModelParams::Heston(h1), c(u), 1.5).unwrap()
                * cf(&ModelParams::Heston(h2), c(u), 1.5).unwrap();
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn no_branch_cut_jumps() {
        // phase differences along a log-spaced grid stay far from 2π
        let p = HestonParams::new(0.1, 0.01, 2.0, 0.5, 0.0225).unwrap();
        for t in [2.0 / 365.0, 1.0, 10.0] {
            let mut prev = p.log_cf(c(1e-3), t).im;
            let n = 4000;
            for j in 1..=n {
                let u = 1e-3 * (1e7f64).powf(j as f64 / n as f64);
                let cur = p.log_cf(c(u), t).im;
                assert!((cur - prev).abs() < 2.0, "t={t}, u={u}: {prev} -> {cur}");
                prev = cur;
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(HestonParams::new(0.0, 0.1, 1.0, 0.0, 0.1).is_err());
        assert!(HestonParams::new(1.0, 0.1, 1.0, 1.5, 0.1).is_err());
        let h = HestonParams::new(1.0, 0.1, 1.0, 0.0, 0.1).unwrap();
        assert!(SvjParams::new(h, 0.5, -1.0, 0.1).is_err());
        assert!(cf(&ModelParams::Black { sigma: 0.2 }, c(1.0), 0.0).is_err());
        assert!(cgf_derivative_numeric(&ModelParams::Black { sigma: 0.2 }, 1.0, 3).is_err());
    }

    #[test]
    fn black_numeric_cumulants() {
        let m = ModelParams::Black { sigma: 0.2 };
        let c1 = cgf_derivative_numeric(&m, 1.0, 1).unwrap();
        let c2 = cgf_derivative_numeric(&m, 1.0, 2).unwrap();
        let c4 = cgf_derivative_numeric(&m, 1.0, 4).unwrap();
        assert!((c1 + 0.02).abs() < 1e-10, "{c1}");
        assert!((c2 - 0.04).abs() < 1e-9, "{c2}");
        assert!(c4.abs() < 1e-6, "{c4}");
    }

    fn any_model() -> impl Strategy<Value = ModelParams> {
        let heston = (0.05..5.0f64, 1e-4..0.5f64, 1e-3..3.0f64, -0.95..0.95f64, 1e-4..0.5f64)
            .prop_map(|(k, th, s, r, v)| HestonParams::new(k, th, s, r, v).unwrap());
        prop_oneof![
            (0.01..2.0f64).prop_map(|sigma| ModelParams::Black { sigma }),
            heston.clone().prop_map(ModelParams::Heston),
            (heston.clone(), 0.0..2.0f64, -0.5..0.5f64, 0.0..0.5f64)
                .prop_map(|(h, l, k, d)| ModelParams::Svj(SvjParams::new(h, l, k, d).unwrap())),
            (heston.clone(), heston).prop_map(|(a, b)| ModelParams::DoubleHeston(a, b)),
        ]
    }

    proptest! {
        #[test]
        fn hermitian_and_bounded(m in any_model(), t in 1.0/365.0..10.0f64, u in 0.0..500.0f64) {
            let a = cf(&m, c(u), t).unwrap();
            let b = cf(&m, c(-u), t).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-14);
            prop_assert!(a.norm() <= 1.0 + 1e-14);
            prop_assert!((cf(&m, c(0.0), t).unwrap() - 1.0).norm() <= 1e-14);
        }
    }
}
