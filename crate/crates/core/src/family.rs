//! Continuous grading functions: a closed catalog of c.d.f./density pairs on
//! a finite support interval.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use statrs::function::{beta, erf};

use crate::error::{Error, Result};

/// Tolerance on `cdf(a) = 0` and `cdf(b) = 1` for probability gradings.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

const ROOT_MAX_ITER: usize = 200;
const ROOT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Uniform,
    /// Triangular density on the support with peak at `mode`.
    Triangular { mode: f64 },
    /// Beta(α, β) rescaled from `[0, 1]` onto the support.
    Beta { alpha: f64, beta: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
    /// C.d.f. `t^p` of the rescaled variable `t = (x − a)/(b − a)`.
    Power { p: f64 },
    /// Linear interpolation through `(x, F(x))` knots spanning the support.
    PiecewiseLinearCdf { knots: Vec<(f64, f64)> },
}

/// A grading function on the nested intervals `[a, x]`, `x ∈ [a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrading", into = "RawGrading")]
pub struct ContinuousGrading {
    family: Family,
    a: f64,
    b: f64,
    /// Normalizer of the truncated normal, `P(α ≤ Z ≤ β)` of the standard
    /// normal at the standardized endpoints.
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrading {
    family: String,
    #[serde(default)]
    params: Map<String, Value>,
    support: [f64; 2],
}

fn param(params: &Map<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidParams(format!("missing numeric parameter {key:?}")))
}

fn only_keys(params: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    match params.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::InvalidParams(format!("unknown parameter {k:?}"))),
        None => Ok(()),
    }
}

impl TryFrom<RawGrading> for ContinuousGrading {
    type Error = Error;

    fn try_from(raw: RawGrading) -> Result<Self> {
        let [a, b] = raw.support;
        let p = &raw.params;
        let family = match raw.family.as_str() {
            "uniform" => {
                only_keys(p, &[])?;
                Family::Uniform
            }
            "triangular" => {
                only_keys(p, &["mode"])?;
                Family::Triangular {
                    mode: param(p, "mode")?,
                }
            }
            "beta" => {
                only_keys(p, &["alpha", "beta"])?;
                Family::Beta {
                    alpha: param(p, "alpha")?,
                    beta: param(p, "beta")?,
                }
            }
            "truncated_normal" => {
                only_keys(p, &["mean", "sd"])?;
                Family::TruncatedNormal {
                    mean: param(p, "mean")?,
                    sd: param(p, "sd")?,
                }
            }
            "power" => {
                only_keys(p, &["p"])?;
                Family::Power { p: param(p, "p")? }
            }
            "piecewise_linear_cdf" => {
                only_keys(p, &["knots"])?;
                let knots: Vec<(f64, f64)> = p
                    .get("knots")
                    .cloned()
                    .ok_or_else(|| Error::InvalidParams("missing parameter \"knots\"".into()))
                    .and_then(|v| {
                        serde_json::from_value(v).map_err(|e| Error::InvalidParams(e.to_string()))
                    })?;
                Family::PiecewiseLinearCdf { knots }
            }
            other => return Err(Error::InvalidParams(format!("unknown family {other:?}"))),
        };
        ContinuousGrading::new(family, a, b)
    }
}

impl From<ContinuousGrading> for RawGrading {
    fn from(g: ContinuousGrading) -> Self {
        let (family, params) = match &g.family {
            Family::Uniform => ("uniform", json!({})),
            Family::Triangular { mode } => ("triangular", json!({ "mode": mode })),
            Family::Beta { alpha, beta } => ("beta", json!({ "alpha": alpha, "beta": beta })),
            Family::TruncatedNormal { mean, sd } => {
                ("truncated_normal", json!({ "mean": mean, "sd": sd }))
            }
            Family::Power { p } => ("power", json!({ "p": p })),
            Family::PiecewiseLinearCdf { knots } => {
                ("piecewise_linear_cdf", json!({ "knots": knots }))
            }
        };
        RawGrading {
            family: family.to_string(),
            params: match params {
                Value::Object(m) => m,
                _ => unreachable!("params are built as objects"),
            },
            support: [g.a, g.b],
        }
    }
}

/// Standard normal upper tail `P(Z > z)`.
fn upper_tail(z: f64) -> f64 {
    0.5 * erf::erfc(z / std::f64::consts::SQRT_2)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl ContinuousGrading {
    pub fn new(family: Family, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParams(format!(
                "support [{a}, {b}] must be a finite interval with a < b"
            )));
        }
        let mut mass = 1.0;
        match &family {
            Family::Uniform => {}
            Family::Triangular { mode } => {
                if !(mode.is_finite() && a <= *mode && *mode <= b) {
                    return Err(Error::InvalidParams(format!(
                        "triangular mode {mode} outside [{a}, {b}]"
                    )));
                }
            }
            Family::Beta { alpha, beta } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)?;
            }
            Family::TruncatedNormal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidParams(format!("mean must be finite, got {mean}")));
                }
                positive("sd", *sd)?;
                let (lo, hi) = ((a - mean) / sd, (b - mean) / sd);
                mass = if lo > 0.0 {
                    upper_tail(lo) - upper_tail(hi)
                } else {
                    upper_tail(-hi) - upper_tail(-lo)
                };
                if !(mass > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "truncation interval carries no normal mass ({mass})"
                    )));
                }
            }
            Family::Power { p } => positive("p", *p)?,
            Family::PiecewiseLinearCdf { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidParams("need at least 2 knots".into()));
                }
                if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                    return Err(Error::InvalidParams("knots must be finite".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 <= w[0].1) {
                    return Err(Error::InvalidParams(
                        "knots must be strictly increasing in both coordinates".into(),
                    ));
                }
                let (first, last) = (knots[0].0, knots[knots.len() - 1].0);
                if first != a || last != b {
                    return Err(Error::InvalidParams(format!(
                        "knots span [{first}, {last}] but support is [{a}, {b}]"
                    )));
                }
            }
        }
        Ok(ContinuousGrading { family, a, b, mass })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        ContinuousGrading::new(Family::Uniform, a, b)
    }

    pub fn triangular(a: f64, mode: f64, b: f64) -> Result<Self> {
        ContinuousGrading::new(Family::Triangular { mode }, a, b)
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        ContinuousGrading::new(Family::Beta { alpha, beta }, 0.0, 1.0)
    }

    pub fn truncated_normal(mean: f64, sd: f64, a: f64, b: f64) -> Result<Self> {
        ContinuousGrading::new(Family::TruncatedNormal { mean, sd }, a, b)
    }

    pub fn power(p: f64) -> Result<Self> {
        ContinuousGrading::new(Family::Power { p }, 0.0, 1.0)
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        let a = knots.first().map_or(f64::NAN, |k| k.0);
        let b = knots.last().map_or(f64::NAN, |k| k.0);
        ContinuousGrading::new(Family::PiecewiseLinearCdf { knots }, a, b)
    }

    /// Same family moved onto another support interval.
    pub fn with_support(&self, a: f64, b: f64) -> Result<Self> {
        let family = match &self.family {
            Family::PiecewiseLinearCdf { knots } => {
                let scale = (b - a) / (self.b - self.a);
                Family::PiecewiseLinearCdf {
                    knots: knots
                        .iter()
                        .enumerate()
                        .map(|(i, &(x, y))| {
                            let x = if i == 0 {
                                a
                            } else if i == knots.len() - 1 {
                                b
                            } else {
                                a + (x - self.a) * scale
                            };
                            (x, y)
                        })
                        .collect(),
                }
            }
            // Rounding can push an endpoint mode just outside the new support.
            Family::Triangular { mode } => Family::Triangular {
                mode: (a + (mode - self.a) * (b - a) / (self.b - self.a)).clamp(a, b),
            },
            Family::TruncatedNormal { mean, sd } => {
                let scale = (b - a) / (self.b - self.a);
                Family::TruncatedNormal {
                    mean: a + (mean - self.a) * scale,
                    sd: sd * scale,
                }
            }
            other => other.clone(),
        };
        ContinuousGrading::new(family, a, b)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Position of `x` on the support rescaled to `[0, 1]`.
    fn unit(&self, x: f64) -> f64 {
        ((x - self.a) / self.width()).clamp(0.0, 1.0)
    }

    /// Grade `F(x)`; clamped outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return self.image().0;
        }
        if x >= self.b {
            return self.image().1;
        }
        match &self.family {
            Family::Uniform => self.unit(x),
            Family::Triangular { mode } => {
                let (a, b, c) = (self.a, self.b, *mode);
                if x <= c {
                    (x - a) * (x - a) / ((b - a) * (c - a))
                } else {
                    1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
                }
            }
            Family::Beta { alpha, beta } => beta::beta_reg(*alpha, *beta, self.unit(x)),
            Family::TruncatedNormal { mean, sd } => {
                let (lo, z) = ((self.a - mean) / sd, (x - mean) / sd);
                let v = if lo > 0.0 {
                    (upper_tail(lo) - upper_tail(z)) / self.mass
                } else {
                    (upper_tail(-z) - upper_tail(-lo)) / self.mass
                };
                v.clamp(0.0, 1.0)
            }
            Family::Power { p } => self.unit(x).powf(*p),
            Family::PiecewiseLinearCdf { knots } => {
                let i = knots.partition_point(|k| k.0 <= x).clamp(1, knots.len() - 1);
                let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Density `F'(x)`. Zero outside the support; may be zero or infinite at
    /// the endpoints themselves.
    pub fn density(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        let w = self.width();
        match &self.family {
            Family::Uniform => 1.0 / w,
            Family::Triangular { mode } => {
                let (a, b, c) = (self.a, self.b, *mode);
                if x < c || (x == c && c == b) {
                    2.0 * (x - a) / ((b - a) * (c - a))
                } else {
                    2.0 * (b - x) / ((b - a) * (b - c))
                }
            }
            Family::Beta { alpha, beta } => {
                let t = self.unit(x);
                let ln = (alpha - 1.0) * t.ln() + (beta - 1.0) * (1.0 - t).ln()
                    - beta::ln_beta(*alpha, *beta);
                ln.exp() / w
            }
            Family::TruncatedNormal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * self.mass * (2.0 * std::f64::consts::PI).sqrt())
            }
            Family::Power { p } => p * self.unit(x).powf(p - 1.0) / w,
            Family::PiecewiseLinearCdf { knots } => {
                let i = knots.partition_point(|k| k.0 <= x).clamp(1, knots.len() - 1);
                let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                (y1 - y0) / (x1 - x0)
            }
        }
    }

    /// `im(F) = [F(a), F(b)]`.
    pub fn image(&self) -> (f64, f64) {
        match &self.family {
            Family::PiecewiseLinearCdf { knots } => (knots[0].1, knots[knots.len() - 1].1),
            _ => (0.0, 1.0),
        }
    }

    pub fn is_probability(&self) -> bool {
        let (lo, hi) = self.image();
        lo.abs() <= PROBABILITY_TOLERANCE && (hi - 1.0).abs() <= PROBABILITY_TOLERANCE
    }

    /// Interior points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Triangular { mode } if *mode > self.a && *mode < self.b => vec![*mode],
            Family::PiecewiseLinearCdf { knots } => {
                knots[1..knots.len() - 1].iter().map(|k| k.0).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `F⁻¹(u)` for `u ∈ im(F)`; see [`invert_cdf`].
    pub fn invert(&self, u: f64) -> Result<f64> {
        let (lo, hi) = self.image();
        if !(u >= lo && u <= hi) {
            return Err(Error::OutsideImage { u, lo, hi });
        }
        if u == lo {
            return Ok(self.a);
        }
        if u == hi {
            return Ok(self.b);
        }
        let (a, b, w) = (self.a, self.b, self.width());
        let x = match &self.family {
            Family::Uniform => a + u * w,
            Family::Triangular { mode } => {
                let c = *mode;
                if u <= (c - a) / w {
                    a + (u * w * (c - a)).sqrt()
                } else {
                    b - ((1.0 - u) * w * (b - c)).sqrt()
                }
            }
            Family::Power { p } => a + w * u.powf(1.0 / p),
            Family::PiecewiseLinearCdf { knots } => {
                let i = knots.partition_point(|k| k.1 <= u).clamp(1, knots.len() - 1);
                let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                x0 + (x1 - x0) * (u - y0) / (y1 - y0)
            }
            Family::Beta { .. } | Family::TruncatedNormal { .. } => {
                return self.bracketed_root(u, hi - lo)
            }
        };
        Ok(x.clamp(a, b))
    }

    /// Illinois-modified regula falsi on `[a, b]`, falling back to bisection
    /// whenever a step fails to halve the bracket.
    fn bracketed_root(&self, u: f64, range: f64) -> Result<f64> {
        let tol = ROOT_REL_TOL * range;
        let (mut lo, mut hi) = (self.a, self.b);
        let (mut f_lo, mut f_hi) = (self.cdf(lo) - u, self.cdf(hi) - u);
        if f_lo > 0.0 || f_hi < 0.0 {
            return Err(Error::RootFinding(format!(
                "u = {u} not bracketed by cdf on [{lo}, {hi}]"
            )));
        }
        let mut side = 0i8;
        let mut width = hi - lo;
        for _ in 0..ROOT_MAX_ITER {
            let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
            let x = if secant > lo && secant < hi {
                secant
            } else {
                0.5 * (lo + hi)
            };
            let fx = self.cdf(x) - u;
            if fx.abs() <= tol {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
                f_lo = fx;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = x;
                f_hi = fx;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
            if hi - lo > 0.5 * width {
                let mid = 0.5 * (lo + hi);
                let fm = self.cdf(mid) - u;
                if fm.abs() <= tol {
                    return Ok(mid);
                }
                if fm < 0.0 {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                    f_hi = fm;
                }
                side = 0;
            }
            width = hi - lo;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                // Adjacent floats: nothing closer is representable.
                return Ok(if f_hi.abs() < f_lo.abs() { hi } else { lo });
            }
        }
        Err(Error::RootFinding(format!(
            "no root for u = {u} within {ROOT_MAX_ITER} iterations"
        )))
    }
}

/// Inverse grading `F⁻¹(u)`: closed form where the family has one, bracketed
/// root finding otherwise. The result satisfies
/// `|F(x) − u| ≤ 1e-12 · (F(b) − F(a))` up to floating-point resolution.
pub fn invert_cdf(f: &ContinuousGrading, u: f64) -> Result<f64> {
    f.invert(u)
}
