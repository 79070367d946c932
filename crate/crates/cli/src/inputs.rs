//! Command-line flags merged with the optional config file.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use cospricer::cumulants::model_range;
use cospricer::{HestonParams, Method, ModelParams, OptionKind, SvjParams, TruncationRange};

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Black,
    Heston,
    Svj,
    DoubleHeston,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Classic,
    Improved,
    Reference,
}

/// `auto` prices the out-of-the-money side: puts for `K ≤ F`, calls above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindName {
    Auto,
    Put,
    Call,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Profile,
    Decomposition,
}

/// Flags shared by every subcommand. All are optional here so that values
/// from `--config` can fill the gaps; defaults are applied afterwards.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat key=value file with defaults for any flag below
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelName>,
    /// Black volatility, or the Heston volatility of variance
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// Jump intensity (svj)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Mean relative jump size (svj)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kbar: Option<f64>,
    /// Log jump volatility (svj)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Second variance factor (double-heston)
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rho2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v02: Option<f64>,

    /// Maturity in years
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Forward [default: 1]
    #[arg(long = "F", global = true, allow_hyphen_values = true)]
    pub forward: Option<f64>,
    /// Strike (price)
    #[arg(long = "K", global = true, allow_hyphen_values = true)]
    pub strike: Option<f64>,
    /// Discount factor [default: 1]
    #[arg(long = "B", global = true, allow_hyphen_values = true)]
    pub discount: Option<f64>,
    /// Number of cosine terms [default: 256]
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Truncation level [default: 12]
    #[arg(long = "L", global = true, allow_hyphen_values = true)]
    pub level: Option<f64>,
    /// Widen the range with the fourth cumulant
    #[arg(long = "use-c4", global = true)]
    pub use_c4: bool,
    /// Explicit lower end of the range (with --range-b, overrides --L)
    #[arg(long = "range-a", global = true, allow_hyphen_values = true)]
    pub range_a: Option<f64>,
    #[arg(long = "range-b", global = true, allow_hyphen_values = true)]
    pub range_b: Option<f64>,
    /// Scales every printed price [default: 1]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub notional: Option<f64>,
    /// Pricing method for `price` [default: improved]
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodName>,
    /// Absolute tolerance of the reference pricer [default: 1e-12]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Option kind [default: auto]
    #[arg(long, global = true, value_enum)]
    pub kind: Option<KindName>,
    /// Strikes as `k1,k2,...` or `start:stop:step`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub strikes: Option<String>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Payoff expansion terms for error-analysis [default: N]
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    /// Grid points per strike for payoff profiles [default: 201]
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Which error-analysis table to emit [default: profile]
    #[arg(long, global = true, value_enum)]
    pub table: Option<Table>,
}

/// Fully resolved inputs.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub model: ModelParams,
    pub t: f64,
    pub forward: f64,
    pub strike: Option<f64>,
    pub discount: f64,
    pub n: usize,
    pub level: f64,
    pub use_c4: bool,
    pub explicit_range: Option<(f64, f64)>,
    pub notional: f64,
    pub method: Method,
    pub tol: f64,
    pub kind: KindName,
    pub strikes: Vec<f64>,
    pub out: Option<PathBuf>,
    pub m: Option<usize>,
    pub points: usize,
    pub table: Table,
}

fn pick<T: FromStr>(flag: Option<T>, config: &Config, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, config: &Config, key: &str) -> Result<Option<T>, CliError> {
    match (flag, config.raw(key)) {
        (Some(v), _) => Ok(Some(v)),
        (None, None) => Ok(None),
        (None, Some(s)) => T::from_str(s, true)
            .map(Some)
            .map_err(|_| CliError::Validation(format!("config key `{key}`: unknown value `{s}`"))),
    }
}

fn required<T>(v: Option<T>, key: &str, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("--{key} is required {what}")))
}

/// Parses `k1,k2,...` or `start:stop:step`. An empty string is an empty list.
pub fn parse_strikes(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("bad strike `{t}`")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err(CliError::Validation(format!("bad strike range `{s}`")));
            }
            // count first, then build each strike from its index so the
            // grid does not accumulate rounding
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(CliError::Validation(format!("bad strike list `{s}`"))),
    }
}

impl Flags {
    pub fn resolve(&self) -> Result<Inputs, CliError> {
        let config = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let c = &config;
        let f = |v: Option<f64>, key: &str| pick(v, c, key);

        let model_name = required(pick_enum(self.model, c, "model")?, "model", "")?;
        let heston = |suffix: &str, kappa, theta, sigma, rho, v0| -> Result<HestonParams, CliError> {
            let what = format!("for the {} model", model_label(model_name));
            let get = |v: Option<f64>, key: &str| -> Result<f64, CliError> {
                let key = format!("{key}{suffix}");
                required(pick(v, c, &key)?, &key, &what)
            };
            Ok(HestonParams {
                kappa: get(kappa, "kappa")?,
                theta: get(theta, "theta")?,
                sigma: get(sigma, "sigma")?,
                rho: get(rho, "rho")?,
                v0: get(v0, "v0")?,
            })
        };
        let leg1 = || heston("", self.kappa, self.theta, self.sigma, self.rho, self.v0);
        let model = match model_name {
            ModelName::Black => ModelParams::Black {
                sigma: required(f(self.sigma, "sigma")?, "sigma", "for the black model")?,
            },
            ModelName::Heston => ModelParams::Heston(leg1()?),
            ModelName::Svj => {
                let what = "for the svj model";
                ModelParams::Svj(SvjParams {
                    heston: leg1()?,
                    lambda: required(f(self.lambda, "lambda")?, "lambda", what)?,
                    kbar: required(f(self.kbar, "kbar")?, "kbar", what)?,
                    delta: required(f(self.delta, "delta")?, "delta", what)?,
                })
            }
            ModelName::DoubleHeston => ModelParams::DoubleHeston(
                leg1()?,
                heston("2", self.kappa2, self.theta2, self.sigma2, self.rho2, self.v02)?,
            ),
        };
        model.validate()?;

        let use_c4 = self.use_c4
            || match config.raw("use-c4") {
                None => false,
                Some(v) => v
                    .parse::<bool>()
                    .map_err(|_| CliError::Validation(format!("config key `use-c4`: expected true or false, got `{v}`")))?,
            };
        let explicit_range = match (f(self.range_a, "range-a")?, f(self.range_b, "range-b")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => return Err(CliError::Validation("--range-a and --range-b go together".into())),
        };
        let strikes = match (&self.strikes, config.raw("strikes")) {
            (Some(s), _) => parse_strikes(s)?,
            (None, Some(s)) => parse_strikes(s)?,
            (None, None) => Vec::new(),
        };
        let method = match pick_enum(self.method, c, "method")?.unwrap_or(MethodName::Improved) {
            MethodName::Classic => Method::Classic,
            MethodName::Improved => Method::Improved,
            MethodName::Reference => Method::Reference,
        };
        let notional = f(self.notional, "notional")?.unwrap_or(1.0);
        if !(notional > 0.0 && notional.is_finite()) {
            return Err(CliError::Validation(format!("--notional must be positive, got {notional}")));
        }
        Ok(Inputs {
            model,
            t: required(f(self.t, "T")?, "T", "")?,
            forward: f(self.forward, "F")?.unwrap_or(1.0),
            strike: f(self.strike, "K")?,
            discount: f(self.discount, "B")?.unwrap_or(1.0),
            n: pick(self.n, c, "N")?.unwrap_or(256),
            level: f(self.level, "L")?.unwrap_or(12.0),
            use_c4,
            explicit_range,
            notional,
            method,
            tol: f(self.tol, "tol")?.unwrap_or(1e-12),
            kind: pick_enum(self.kind, c, "kind")?.unwrap_or(KindName::Auto),
            strikes,
            out: match &self.out {
                Some(p) => Some(p.clone()),
                None => config.raw("out").map(PathBuf::from),
            },
            m: pick(self.m, c, "M")?,
            points: pick(self.points, c, "points")?.unwrap_or(201),
            table: pick_enum(self.table, c, "table")?.unwrap_or(Table::Profile),
        })
    }
}

fn model_label(m: ModelName) -> &'static str {
    match m {
        ModelName::Black => "black",
        ModelName::Heston => "heston",
        ModelName::Svj => "svj",
        ModelName::DoubleHeston => "double-heston",
    }
}

impl Inputs {
    pub fn range(&self) -> Result<TruncationRange, CliError> {
        Ok(match self.explicit_range {
            Some((a, b)) => TruncationRange::new(a, b)?,
            None => model_range(&self.model, self.t, self.level, self.use_c4)?,
        })
    }

    pub fn kind_at(&self, strike: f64) -> OptionKind {
        match self.kind {
            KindName::Put => OptionKind::Put,
            KindName::Call => OptionKind::Call,
            KindName::Auto if strike <= self.forward => OptionKind::Put,
            KindName::Auto => OptionKind::Call,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strike_lists_and_ranges() {
        assert_eq!(parse_strikes("").unwrap(), Vec::<f64>::new());
        assert_eq!(parse_strikes("1, 2.5").unwrap(), vec![1.0, 2.5]);
        let r = parse_strikes("1.00:1.32:0.01").unwrap();
        assert_eq!(r.len(), 33);
        assert!((r[32] - 1.32).abs() < 1e-12);
        assert!(parse_strikes("1:0:0.1").is_err());
        assert!(parse_strikes("a,b").is_err());
    }
}
