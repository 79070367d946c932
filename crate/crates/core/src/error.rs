use num_complex::Complex64;
use thiserror::Error;

/// Which no-arbitrage bound an option price violated during implied
/// volatility inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceBound {
    /// At or below the discounted intrinsic value.
    Lower,
    /// At or above `B·K` (put) or `B·F` (call).
    Upper,
}

impl std::fmt::Display for PriceBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriceBound::Lower => f.write_str("lower (intrinsic value)"),
            PriceBound::Upper => f.write_str("upper (discounted strike or forward)"),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("characteristic function overflow at u = {u}, T = {t}")]
    NumericalOverflow { u: Complex64, t: f64 },

    #[error("finite-difference stencil left the domain of the moment generating function (order {order}, step {step}); try a smaller step")]
    StencilOverflow { order: u32, step: f64 },

    #[error("invalid cumulants: c1 = {c1}, c2 = {c2}, c4 = {c4}")]
    InvalidCumulants { c1: f64, c2: f64, c4: f64 },

    #[error("reference quadrature did not converge: estimated error {estimate:e} > tolerance {tol:e} after {evaluations} evaluations")]
    OracleConvergence {
        estimate: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("no implied volatility: price {price} violates the {bound} bound")]
    NoImpliedVol { price: f64, bound: PriceBound },
}

impl Error {
    /// True for input validation failures, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::NoImpliedVol { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
