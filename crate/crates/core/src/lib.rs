//! European option pricing with Fourier cosine (COS) expansions.
//!
//! Two COS variants are provided: the classic formula, whose payoff
//! coefficients are centered on the strike, and a forward-centered variant
//! that stays accurate for strikes near the edge of the truncation range
//! and shares one characteristic-function pass across all strikes of a
//! maturity. Truncation ranges come from analytic cumulants, and an
//! adaptive quadrature pricer serves as an independent reference.
//!
//! ```
//! use cospricer::{price, HestonParams, Method, ModelParams, OptionSpec};
//! use cospricer::cumulants::model_range;
//!
//! let model = ModelParams::Heston(HestonParams::new(1.0, 0.1, 1.0, -0.9, 0.1)?);
//! let t = 2.0 / 365.0;
//! let range = model_range(&model, t, 12.0, false)?;
//! let spec = OptionSpec::call(1.0, 1.05, t, 1.0)?;
//! let cos = price(&model, &spec, Method::Improved, 256, &range, 1e-10)?;
//! let reference = price(&model, &spec, Method::Reference, 256, &range, 1e-12)?;
//! assert!((cos.price - reference.price).abs() < 1e-12);
//! # Ok::<(), cospricer::Error>(())
//! ```

pub mod char_fn;
pub mod cos_classic;
pub mod cos_improved;
pub mod cumulants;
pub mod error;
pub mod error_analysis;
pub mod option;
pub mod quad;
pub mod reference;

pub use num_complex;

pub use char_fn::{cf, HestonParams, ModelParams, SvjParams};
pub use cumulants::{CumulantSet, TruncationRange};
pub use error::{Error, PriceBound, Result};
pub use option::{call_from_put, Fallback, Method, OptionKind, OptionSpec, PriceResult};

/// Prices `spec` with the chosen method. `n` and `range` are ignored by the
/// reference pricer and `tol` by the COS methods.
pub fn price(
    model: &ModelParams,
    spec: &OptionSpec,
    method: Method,
    n: usize,
    range: &TruncationRange,
    tol: f64,
) -> Result<PriceResult> {
    match method {
        Method::Classic => cos_classic::price_put_classic(model, spec, n, range),
        Method::Improved => cos_improved::price_put_improved(model, spec, n, range),
        Method::Reference => reference::price_reference(model, spec, tol),
    }
}

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/truncation.md")]
    mod truncation {}
    #[doc = include_str!("../../../book/src/pricing.md")]
    mod pricing {}
    #[doc = include_str!("../../../book/src/reference.md")]
    mod reference {}
    #[doc = include_str!("../../../book/src/errors.md")]
    mod errors {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
