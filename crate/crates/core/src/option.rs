//! European option contracts and priced results.

use std::fmt;

use crate::cumulants::TruncationRange;
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Put,
    Call,
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Put => "put",
            OptionKind::Call => "call",
        })
    }
}

/// A European option on the forward `F(0,T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionSpec {
    pub forward: f64,
    pub strike: f64,
    /// Maturity in years.
    pub t: f64,
    /// Discount factor `B(T)`.
    pub discount: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(forward: f64, strike: f64, t: f64, discount: f64, kind: OptionKind) -> Result<Self> {
        let s = OptionSpec {
            forward,
            strike,
            t,
            discount,
            kind,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn put(forward: f64, strike: f64, t: f64, discount: f64) -> Result<Self> {
        Self::new(forward, strike, t, discount, OptionKind::Put)
    }

    pub fn call(forward: f64, strike: f64, t: f64, discount: f64) -> Result<Self> {
        Self::new(forward, strike, t, discount, OptionKind::Call)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.forward > 0.0 && self.forward.is_finite(), "F", self.forward, "must be positive")?;
        ensure(self.strike > 0.0 && self.strike.is_finite(), "K", self.strike, "must be positive")?;
        ensure(self.t > 0.0 && self.t.is_finite(), "T", self.t, "must be positive")?;
        ensure(
            self.discount > 0.0 && self.discount <= 1.0,
            "B",
            self.discount,
            "must lie in (0, 1]",
        )
    }

    /// Log-moneyness `ln(K/F)`.
    pub fn log_moneyness(&self) -> f64 {
        (self.strike / self.forward).ln()
    }

    pub fn with_kind(self, kind: OptionKind) -> Self {
        OptionSpec { kind, ..self }
    }

    pub fn with_strike(self, strike: f64) -> Self {
        OptionSpec { strike, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Classic,
    Improved,
    Reference,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Classic => "classic",
            Method::Improved => "improved",
            Method::Reference => "reference",
        })
    }
}

/// How a COS price was produced when the strike left the expansion range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fallback {
    None,
    /// Strike above the range: discounted intrinsic value.
    Intrinsic,
    /// Strike below the range: zero put value.
    Zero,
}

impl fmt::Display for Fallback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fallback::None => "none",
            Fallback::Intrinsic => "intrinsic",
            Fallback::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceResult {
    pub price: f64,
    pub kind: OptionKind,
    pub method: Method,
    /// Series length for COS prices, integrand evaluations for the reference.
    pub n: usize,
    /// Expansion range, absent for the reference pricer.
    pub range: Option<TruncationRange>,
    pub fallback: Fallback,
}

/// Sums in `[-1e-12, 0)` are Gibbs noise and read as zero; anything more
/// negative is left visible.
pub(crate) fn clamp_tiny_negative(p: f64) -> f64 {
    if (-1e-12..0.0).contains(&p) {
        0.0
    } else {
        p
    }
}

/// Call from put by parity, `C = P + B(F - K)`.
pub fn call_from_put(put: &PriceResult, spec: &OptionSpec) -> PriceResult {
    PriceResult {
        price: put.price + spec.discount * (spec.forward - spec.strike),
        kind: OptionKind::Call,
        ..*put
    }
}

/// Returns `put` unchanged for a put spec and its parity call otherwise.
pub(crate) fn to_kind(put: PriceResult, spec: &OptionSpec) -> PriceResult {
    match spec.kind {
        OptionKind::Put => put,
        OptionKind::Call => call_from_put(&put, spec),
    }
}
