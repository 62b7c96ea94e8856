//! Adaptive Gauss-Kronrod quadrature.
//!
//! A plain G7/K15 pair with globally adaptive bisection: the interval with
//! the largest error estimate is split until the accumulated estimate meets
//! the requested tolerance or the subdivision budget runs out. Good enough
//! for the smooth (or piecewise-smooth, when breakpoints are supplied)
//! integrands of the model entropies.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

/// Tolerances and budget for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureParams {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

// Kronrod-15 abscissae (positive half) and weights; rows 1, 3, 5, 7 embed
// the Gauss-7 rule.
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One G7/K15 evaluation on `[a, b]`: returns `(kronrod, |kronrod - gauss|)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut resk = 0.0;
    let mut resg = 0.0;
    for (i, (&x, &wk)) in XK.iter().zip(WK.iter()).enumerate() {
        let (lo, hi) = (f(mid - half * x), f(mid + half * x));
        let pair = if x == 0.0 { lo } else { lo + hi };
        resk += wk * pair;
        if i % 2 == 1 {
            // Odd rows are the embedded Gauss-7 nodes (the center is row 7).
            resg += WG[i / 2] * pair;
        }
    }
    (resk * half, (resk - resg).abs() * half.abs())
}

#[derive(PartialEq)]
struct Segment {
    err: f64,
    val: f64,
    a: f64,
    b: f64,
}

impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` to the requested tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, params: QuadratureParams) -> Result<f64> {
    integrate_with_breaks(f, a, b, &[], params)
}

/// Integrates `f` over `[a, b]`, pre-splitting at the given breakpoints
/// (kinks or jumps of the integrand). Breakpoints outside `(a, b)` are
/// ignored.
pub fn integrate_with_breaks(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    params: QuadratureParams,
) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(|p, q| p.total_cmp(q));
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        let (val, err) = gk15(&f, w[0], w[1]);
        total += val;
        total_err += err;
        heap.push(Segment {
            err,
            val,
            a: w[0],
            b: w[1],
        });
    }

    let mut splits = 0;
    loop {
        let tol = params.abs_tol.max(params.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        if splits >= params.max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
                tol,
            });
        }
        let worst = heap.pop().expect("nonempty segment heap");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval at floating-point resolution; cannot improve.
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
                tol,
            });
        }
        total -= worst.val;
        total_err -= worst.err;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (val, err) = gk15(&f, lo, hi);
            total += val;
            total_err += err;
            heap.push(Segment { err, val, a: lo, b: hi });
        }
        splits += 1;
    }
}
