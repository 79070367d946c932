//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    Segment { lo, hi, value, error }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut at `breaks` (points outside `(a, b)` are
/// ignored), then the segment with the largest error estimate is bisected
/// until the summed estimate drops below `tol`. More than `max_evals`
/// integrand calls is an [`Error::OracleConvergence`].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    max_evals: usize,
) -> Result<Quadrature> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.insert(0, a);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        heap.push(gk15(&mut f, w[0], w[1]));
        evaluations += 15;
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::OracleConvergence {
                estimate: f64::INFINITY,
                tol,
                evaluations,
            });
        }
        if error <= tol {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if evaluations + 30 > max_evals {
            return Err(Error::OracleConvergence {
                estimate: error,
                tol,
                evaluations,
            });
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // segment is at the resolution of f64
            return Err(Error::OracleConvergence {
                estimate: error,
                tol,
                evaluations,
            });
        }
        heap.push(gk15(&mut f, worst.lo, mid));
        heap.push(gk15(&mut f, mid, worst.hi));
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, &[], 1e-14, 1000).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn adapts_to_a_kink() {
        let q = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[], 1e-12, 100_000).unwrap();
        assert!((q.value - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        let q = integrate(|x: f64| (50.0 * x).cos() * x.exp(), 0.0, 3.0, &[1.0, 2.0], 1e-13, 100_000)
            .unwrap();
        let exact = (3f64.exp() * ((50.0 * 3f64).cos() + 50.0 * (150f64).sin()) - 1.0) / 2501.0;
        assert!((q.value - exact).abs() < 1e-12, "{} vs {exact}", q.value);
    }

    #[test]
    fn budget_is_enforced() {
        let e = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &[], 1e-15, 300).unwrap_err();
        assert!(matches!(e, Error::OracleConvergence { .. }));
    }
}
