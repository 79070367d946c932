use std::fmt::Write;

use cospricer::char_fn::cgf_derivative_numeric;
use cospricer::cos_classic::price_strip_classic;
use cospricer::cos_improved::build_engine;
use cospricer::cumulants::{cumulants, truncation_range};
use cospricer::error_analysis::{payoff_error_profile, total_error_decomposition, Centering};
use cospricer::reference::price_reference;
use cospricer::{call_from_put, price, OptionKind, OptionSpec};

use crate::inputs::{Inputs, Table};
use crate::CliError;

/// Round-trippable: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cmd_price(inp: &Inputs) -> Result<String, CliError> {
    let strike = inp
        .strike
        .ok_or_else(|| CliError::Validation("--K is required".into()))?;
    let spec = OptionSpec::new(inp.forward, strike, inp.t, inp.discount, inp.kind_at(strike))?;
    let range = inp.range()?;
    let r = price(&inp.model, &spec, inp.method, inp.n, &range, inp.tol)?;
    let mut line = format!(
        "model={} method={} kind={} strike={} price={}",
        inp.model.name(),
        r.method,
        r.kind,
        num(strike),
        num(r.price * inp.notional)
    );
    match r.range {
        Some(range) => write!(line, " a={} b={} N={}", num(range.a), num(range.b), r.n),
        None => write!(line, " evaluations={}", r.n),
    }
    .unwrap();
    writeln!(line, " fallback={}", r.fallback).unwrap();
    Ok(line)
}

pub fn cmd_sweep(inp: &Inputs) -> Result<String, CliError> {
    let mut out = String::from("strike,kind,classic,improved,reference,err_classic,err_improved,fallback_classic,fallback_improved\n");
    if inp.strikes.is_empty() {
        return Ok(out);
    }
    let range = inp.range()?;
    let base = OptionSpec::put(inp.forward, inp.strikes[0], inp.t, inp.discount)?;
    let classic = price_strip_classic(&inp.model, &base, inp.n, &range, &inp.strikes)?;
    let engine = build_engine(&inp.model, inp.forward, inp.discount, inp.t, inp.n, &range)?;
    for (&strike, classic_put) in inp.strikes.iter().zip(&classic) {
        let spec = base.with_strike(strike).with_kind(inp.kind_at(strike));
        let classic = match spec.kind {
            OptionKind::Put => *classic_put,
            OptionKind::Call => call_from_put(classic_put, &spec),
        };
        let improved = engine.price(strike, spec.kind)?;
        let reference = price_reference(&inp.model, &spec, inp.tol)?.price;
        let s = inp.notional;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(strike),
            spec.kind,
            num(s * classic.price),
            num(s * improved.price),
            num(s * reference),
            num(s * (classic.price - reference)),
            num(s * (improved.price - reference)),
            classic.fallback,
            improved.fallback
        )
        .unwrap();
    }
    Ok(out)
}

pub fn cmd_cumulants(inp: &Inputs) -> Result<String, CliError> {
    let c = cumulants(&inp.model, inp.t)?;
    let mut out = String::from("quantity,analytic,numeric\n");
    for (name, order, value) in [("c1", 1, c.c1), ("c2", 2, c.c2), ("c4", 4, c.c4)] {
        // a model whose moment generating function blows up near zero has
        // no numeric estimate; leave the cell empty
        let numeric = match cgf_derivative_numeric(&inp.model, inp.t, order) {
            Ok(v) => num(v),
            Err(e) => {
                eprintln!("warning: numeric {name}: {e}");
                String::new()
            }
        };
        writeln!(out, "{name},{},{numeric}", num(value)).unwrap();
    }
    for (suffix, use_c4) in [("", false), ("_c4", true)] {
        let r = truncation_range(&c, inp.level, use_c4)?;
        writeln!(out, "a{suffix},{},", num(r.a)).unwrap();
        writeln!(out, "b{suffix},{},", num(r.b)).unwrap();
    }
    Ok(out)
}

pub fn cmd_error_analysis(inp: &Inputs) -> Result<String, CliError> {
    let range = inp.range()?;
    let centerings = [("classic", Centering::Classic), ("improved", Centering::Improved)];
    let s = inp.notional;
    let mut out = String::new();
    match inp.table {
        Table::Profile => {
            out.push_str("centering,strike,x,error\n");
            let m = inp.m.unwrap_or(inp.n);
            for (name, centering) in centerings {
                for p in payoff_error_profile(centering, &inp.strikes, inp.forward, &range, m, inp.points)? {
                    writeln!(out, "{name},{},{},{}", num(p.strike), num(p.x), num(s * p.error)).unwrap();
                }
            }
        }
        Table::Decomposition => {
            out.push_str("centering,strike,cos,reference,payoff_term,tail_term,observed,residual\n");
            for (name, centering) in centerings {
                for &strike in &inp.strikes {
                    let spec = OptionSpec::put(inp.forward, strike, inp.t, inp.discount)?;
                    let d = total_error_decomposition(&inp.model, &spec, centering, inp.n, &range, inp.tol)?;
                    writeln!(
                        out,
                        "{name},{},{},{},{},{},{},{}",
                        num(strike),
                        num(s * d.cos_price),
                        num(s * d.reference),
                        num(s * d.payoff_term),
                        num(s * d.tail_term),
                        num(s * d.observed),
                        num(s * d.residual())
                    )
                    .unwrap();
                }
            }
        }
    }
    Ok(out)
}
