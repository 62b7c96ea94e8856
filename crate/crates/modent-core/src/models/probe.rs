//! Test functions for the continuum models.
//!
//! Entropies of the current models only ever see the probe through `f` and
//! `f'` on a bounded set, so each kind carries an explicit derivative
//! evaluator. The ramp has piecewise-constant derivative and gives exact
//! elementary reference integrals; the bump is the standard smooth
//! compactly supported test function.

/// A real test function with an explicit derivative.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothProbe {
    /// `amplitude * exp(-1/(1-u^2))` with `u = (x-center)/halfwidth`,
    /// supported on `(center-halfwidth, center+halfwidth)`.
    Bump {
        center: f64,
        halfwidth: f64,
        amplitude: f64,
    },
    /// Piecewise-linear ramp: flat left of `a`, slope `slope` on `(a, b)`,
    /// flat right of `b`. The derivative is `slope` on `(a, b)` and zero
    /// elsewhere.
    Ramp { a: f64, b: f64, slope: f64 },
    /// Linear interpolation of samples; derivative is the segment slope.
    UserSampled { xs: Vec<f64>, values: Vec<f64> },
}

impl SmoothProbe {
    /// The standard bump `exp(-1/(1-x^2))` on `(-1, 1)`.
    pub fn standard_bump() -> Self {
        SmoothProbe::Bump {
            center: 0.0,
            halfwidth: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            SmoothProbe::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                let u = (x - center) / halfwidth;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (-1.0 / (1.0 - u * u)).exp()
                }
            }
            SmoothProbe::Ramp { a, b, slope } => {
                if x <= *a {
                    0.0
                } else if x >= *b {
                    slope * (b - a)
                } else {
                    slope * (x - a)
                }
            }
            SmoothProbe::UserSampled { xs, values } => {
                if xs.is_empty() {
                    return 0.0;
                }
                if x <= xs[0] {
                    return values[0];
                }
                if x >= *xs.last().unwrap() {
                    return *values.last().unwrap();
                }
                let i = xs.partition_point(|&p| p <= x) - 1;
                let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            SmoothProbe::Bump {
                center,
                halfwidth,
                amplitude,
            } => {
                let u = (x - center) / halfwidth;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let d = 1.0 - u * u;
                    amplitude * (-1.0 / d).exp() * (-2.0 * u / (d * d)) / halfwidth
                }
            }
            SmoothProbe::Ramp { a, b, slope } => {
                if x > *a && x < *b {
                    *slope
                } else {
                    0.0
                }
            }
            SmoothProbe::UserSampled { xs, values } => {
                if xs.len() < 2 || x <= xs[0] || x >= *xs.last().unwrap() {
                    return 0.0;
                }
                let i = xs.partition_point(|&p| p <= x) - 1;
                (values[i + 1] - values[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    /// Interval outside which the derivative vanishes.
    pub fn derivative_support(&self) -> (f64, f64) {
        match self {
            SmoothProbe::Bump {
                center, halfwidth, ..
            } => (center - halfwidth, center + halfwidth),
            SmoothProbe::Ramp { a, b, .. } => (*a, *b),
            SmoothProbe::UserSampled { xs, .. } => {
                if xs.is_empty() {
                    (0.0, 0.0)
                } else {
                    (xs[0], *xs.last().unwrap())
                }
            }
        }
    }

    /// Interior points where the derivative may be discontinuous; used to
    /// pre-split quadrature intervals.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            SmoothProbe::Bump { .. } | SmoothProbe::Ramp { .. } => Vec::new(),
            SmoothProbe::UserSampled { xs, .. } => xs.clone(),
        }
    }
}
