use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Activation function `f`, de-activation function `g` and nominal
/// activation function `h = f / g` of a queue-length argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateFamily {
    /// Constant rates `f ≡ σ`, `g ≡ 1`.
    Fixed { sigma: f64 },
    /// `r(x) = ln(1 + x)`, `f = r / (1 + r)`, `g = 1 / (1 + r)`, so `h = r`.
    LogLog,
    /// `f(x) = x^a`, `g ≡ c`.
    Polynomial { a: f64, c: f64 },
    /// Piecewise-linear interpolation through `(x, f, g)` points, held
    /// constant beyond the last point.
    Tabulated { points: Vec<(f64, f64, f64)> },
}

/// Shape property checked on the probe grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    IncreasingConcaveF,
    DecreasingConvexG,
    NondecreasingH,
}

const INV_REL_TOL: f64 = 1e-10;
const PROBES: usize = 64;

impl RateFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Fixed { sigma } if !(*sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::Domain(format!("σ = {sigma} must be positive")))
            }
            Self::Polynomial { a, c } if !(*a > 0.0 && *c > 0.0) => {
                Err(Error::Domain(format!("polynomial family needs a > 0, c > 0 (a = {a}, c = {c})")))
            }
            Self::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::Domain("tabulated family needs at least two points".into()));
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Domain("tabulated x values must increase".into()));
                }
                if points.iter().any(|p| p.1 < 0.0 || p.2 <= 0.0) {
                    return Err(Error::Domain("tabulated f must be ≥ 0 and g > 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match self {
            Self::Fixed { sigma } => *sigma,
            Self::LogLog => {
                let r = x.ln_1p();
                r / (1.0 + r)
            }
            Self::Polynomial { a, .. } => x.powf(*a),
            Self::Tabulated { points } => interpolate(points, x, |p| p.1),
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        match self {
            Self::Fixed { .. } => 1.0,
            Self::LogLog => 1.0 / (1.0 + x.ln_1p()),
            Self::Polynomial { c, .. } => *c,
            Self::Tabulated { points } => interpolate(points, x, |p| p.2),
        }
    }

    pub fn h(&self, x: f64) -> f64 {
        match self {
            Self::LogLog => x.ln_1p(),
            _ => self.f(x) / self.g(x),
        }
    }

    /// `f⁻¹(y)` for increasing `f`.
    pub fn f_inverse(&self, y: f64) -> Result<f64> {
        match self {
            Self::Fixed { .. } => Err(not_invertible("f", y, "f is constant")),
            Self::LogLog => {
                if !(0.0..1.0).contains(&y) {
                    return Err(not_invertible("f", y, "f maps onto [0, 1)"));
                }
                Ok((y / (1.0 - y)).exp_m1())
            }
            Self::Polynomial { a, .. } => {
                if y < 0.0 {
                    return Err(not_invertible("f", y, "f ≥ 0"));
                }
                Ok(y.powf(1.0 / a))
            }
            Self::Tabulated { .. } => invert_increasing(|x| self.f(x), y, "f"),
        }
    }

    /// `g⁻¹(y)` for decreasing `g`.
    pub fn g_inverse(&self, y: f64) -> Result<f64> {
        match self {
            Self::Fixed { .. } | Self::Polynomial { .. } => {
                Err(not_invertible("g", y, "g is constant"))
            }
            Self::LogLog => {
                if !(y > 0.0 && y <= 1.0) {
                    return Err(not_invertible("g", y, "g maps onto (0, 1]"));
                }
                Ok((1.0 / y - 1.0).exp_m1())
            }
            Self::Tabulated { .. } => invert_increasing(|x| -self.g(x), -y, "g"),
        }
    }

    /// `h⁻¹(y)` for non-decreasing `h`.
    pub fn h_inverse(&self, y: f64) -> Result<f64> {
        match self {
            Self::Fixed { .. } => Err(not_invertible("h", y, "h is constant")),
            Self::LogLog => {
                if y < 0.0 {
                    return Err(not_invertible("h", y, "h ≥ 0"));
                }
                Ok(y.exp_m1())
            }
            Self::Polynomial { a, c } => {
                if y < 0.0 {
                    return Err(not_invertible("h", y, "h ≥ 0"));
                }
                Ok((y * c).powf(1.0 / a))
            }
            Self::Tabulated { .. } => invert_increasing(|x| self.h(x), y, "h"),
        }
    }

    /// Checks a shape property by midpoint inequalities on 64 log-spaced
    /// probe points in `[10⁻³, 10⁶]`, plus monotonicity between neighbours.
    pub fn check_shape(&self, shape: Shape) -> Result<()> {
        let xs = probe_grid();
        let (name, func): (&str, Box<dyn Fn(f64) -> f64 + '_>) = match shape {
            Shape::IncreasingConcaveF => ("f", Box::new(|x| self.f(x))),
            // Convex decreasing g ⇔ −g concave increasing.
            Shape::DecreasingConvexG => ("g", Box::new(|x| -self.g(x))),
            Shape::NondecreasingH => ("h", Box::new(|x| self.h(x))),
        };
        let tol = |a: f64, b: f64| 1e-12 * (1.0 + a.abs().max(b.abs()));
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (func(a), func(b));
            if fb < fa - tol(fa, fb) {
                return Err(Error::Contract(format!("{name} is not monotone between {a} and {b}")));
            }
            if shape != Shape::NondecreasingH {
                let fm = func(0.5 * (a + b));
                if fm < 0.5 * (fa + fb) - tol(fa, fb) {
                    return Err(Error::Contract(format!(
                        "{name} fails the midpoint test on [{a}, {b}]"
                    )));
                }
                let f0 = func(0.0);
                let fh = func(0.5 * b);
                if fh < 0.5 * (f0 + fb) - tol(f0, fb) {
                    return Err(Error::Contract(format!(
                        "{name} fails the midpoint test on [0, {b}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Fixed { sigma } => format!("fixed(sigma={sigma})"),
            Self::LogLog => "loglog".into(),
            Self::Polynomial { a, c } => format!("poly(a={a};c={c})"),
            Self::Tabulated { points } => format!("tabulated({} points)", points.len()),
        }
    }
}

fn not_invertible(function: &'static str, argument: f64, reason: &str) -> Error {
    Error::NumericInverse {
        function,
        argument,
        reason: reason.into(),
    }
}

fn probe_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), 1e6f64.ln());
    (0..PROBES)
        .map(|j| (lo + (hi - lo) * j as f64 / (PROBES - 1) as f64).exp())
        .collect()
}

fn interpolate(points: &[(f64, f64, f64)], x: f64, val: impl Fn(&(f64, f64, f64)) -> f64) -> f64 {
    let first = &points[0];
    if x <= first.0 {
        return val(first);
    }
    let last = &points[points.len() - 1];
    if x >= last.0 {
        return val(last);
    }
    let j = points.partition_point(|p| p.0 <= x);
    let (a, b) = (&points[j - 1], &points[j]);
    let t = (x - a.0) / (b.0 - a.0);
    val(a) + t * (val(b) - val(a))
}

/// Smallest `x ≥ 0` with `func(x) ≥ y`, for non-decreasing `func`.
///
/// The bracket grows geometrically from `[0, 1]`; bisection stops at relative
/// width `1e-10`.
pub fn invert_increasing(func: impl Fn(f64) -> f64, y: f64, name: &'static str) -> Result<f64> {
    if func(0.0) >= y {
        if func(0.0) > y + 1e-12 * y.abs().max(1.0) {
            return Err(not_invertible(name, y.abs(), "argument lies outside the range"));
        }
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while func(hi) < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(not_invertible(name, y.abs(), "argument exceeds the range"));
        }
    }
    while hi - lo > INV_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if func(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
