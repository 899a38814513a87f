//! Relative divergence of continuous grading functions.
//!
//! With `u = F(x)` the integral `∫_{im F} ln (d/du G(F⁻¹(u))) du` becomes
//! `∫_a^b f(x) ln(g(x)/f(x)) dx`, which is what [`divergence_continuous`]
//! integrates. [`riemann_divergence`] keeps the `u` form and evaluates the
//! pre-limit sum directly, so the two routes check each other.

use std::collections::BTreeSet;

use crate::discrete::{DivergenceResult, Flag};
use crate::error::{Error, Result};
use crate::family::ContinuousGrading;
use crate::ordered::CompensatedSum;
use crate::quadrature::{integrate, Integral, QuadratureSpec};

fn shared_support(f: &ContinuousGrading, g: &ContinuousGrading) -> Result<(f64, f64)> {
    let (fa, fb) = f.support();
    let (ga, gb) = g.support();
    if fa != ga || fb != gb {
        return Err(Error::SupportMismatch(fa, fb, ga, gb));
    }
    Ok((fa, fb))
}

fn breakpoints(f: &ContinuousGrading, g: &ContinuousGrading) -> Vec<f64> {
    let mut points = f.breakpoints();
    points.extend(g.breakpoints());
    points
}

/// `f ln(g/f)` with the conventions `0·ln(·) = 0` and `f·ln 0 = −∞`.
fn divergence_density(fx: f64, gx: f64) -> f64 {
    if fx == 0.0 {
        0.0
    } else if gx == 0.0 {
        f64::NEG_INFINITY
    } else {
        fx * (gx / fx).ln()
    }
}

fn to_result(integral: Integral) -> DivergenceResult {
    let mut flags = BTreeSet::new();
    if integral.value == f64::NEG_INFINITY {
        flags.insert(Flag::NegativeInfinity);
    }
    DivergenceResult {
        value: integral.value,
        terms_used: integral.cells,
        dropped_mass: 0.0,
        flags,
        error_estimate: Some(integral.error),
    }
}

/// Relative divergence of `f` from `g`, `∫ f ln(g/f) dx`, by adaptive
/// quadrature.
pub fn divergence_continuous(
    f: &ContinuousGrading,
    g: &ContinuousGrading,
    spec: &QuadratureSpec,
) -> Result<DivergenceResult> {
    let (a, b) = shared_support(f, g)?;
    let integral = integrate(
        |x| divergence_density(f.density(x), g.density(x)),
        a,
        b,
        &breakpoints(f, g),
        spec,
    )?;
    Ok(to_result(integral))
}

/// Classical differential entropy `−∫ f ln f dx`.
pub fn classical_entropy(f: &ContinuousGrading, spec: &QuadratureSpec) -> Result<DivergenceResult> {
    let (a, b) = f.support();
    let integral = integrate(
        |x| {
            let fx = f.density(x);
            if fx == 0.0 {
                0.0
            } else {
                -fx * fx.ln()
            }
        },
        a,
        b,
        &f.breakpoints(),
        spec,
    )?;
    Ok(to_result(integral))
}

/// Entropy measured against the uniform distribution on the same support,
/// `−∫ f ln((b − a) f) dx`. Zero for the uniform distribution itself.
pub fn corrected_entropy(f: &ContinuousGrading, spec: &QuadratureSpec) -> Result<DivergenceResult> {
    if !f.is_probability() {
        let (lo, hi) = f.image();
        return Err(Error::NotProbability { lo, hi });
    }
    let (a, b) = f.support();
    divergence_continuous(f, &ContinuousGrading::uniform(a, b)?, spec)
}

/// `D(F‖G) + D(G‖F)`.
pub fn symmetric_divergence(
    f: &ContinuousGrading,
    g: &ContinuousGrading,
    spec: &QuadratureSpec,
) -> Result<DivergenceResult> {
    let forward = divergence_continuous(f, g, spec)?;
    let backward = divergence_continuous(g, f, spec)?;
    let mut flags: BTreeSet<Flag> = forward.flags.union(&backward.flags).copied().collect();
    let value = if flags.contains(&Flag::NegativeInfinity) {
        f64::NEG_INFINITY
    } else {
        forward.value + backward.value
    };
    if forward.is_empty() && backward.is_empty() {
        flags.insert(Flag::Empty);
    }
    Ok(DivergenceResult {
        value,
        terms_used: forward.terms_used + backward.terms_used,
        dropped_mass: 0.0,
        flags,
        error_estimate: Some(
            forward.error_estimate.unwrap_or(0.0) + backward.error_estimate.unwrap_or(0.0),
        ),
    })
}

/// Riemann sum `Σ ln(Δ_k q / Δ_k u) Δ_k u` of `q = G ∘ F⁻¹` over `cells`
/// equal cells of `im(F)`.
pub fn riemann_divergence(f: &ContinuousGrading, g: &ContinuousGrading, cells: usize) -> Result<f64> {
    if cells < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 cells, got {cells}")));
    }
    shared_support(f, g)?;
    let (lo, hi) = f.image();
    let du = (hi - lo) / cells as f64;
    // G ∘ F⁻¹ is the identity when G = F.
    let same = f == g;
    let q = |k: usize| -> Result<f64> {
        let u = if k == cells { hi } else { lo + du * k as f64 };
        if same {
            Ok(u)
        } else {
            Ok(g.cdf(f.invert(u)?))
        }
    };
    let mut sum = CompensatedSum::default();
    let mut prev = q(0)?;
    let mut prev_u = lo;
    for k in 1..=cells {
        let next = q(k)?;
        let u = if k == cells { hi } else { lo + du * k as f64 };
        let (dq, du_k) = (next - prev, u - prev_u);
        if dq <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        sum.add((dq / du_k).ln() * du_k);
        prev = next;
        prev_u = u;
    }
    Ok(sum.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn unit() -> ContinuousGrading {
        ContinuousGrading::uniform(0.0, 1.0).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn identical_gradings() {
        let r = divergence_continuous(&unit(), &unit(), &spec()).unwrap();
        assert_eq!(r.value, 0.0);
        let t = ContinuousGrading::triangular(0.0, 0.2, 1.0).unwrap();
        assert!(divergence_continuous(&t, &t, &spec()).unwrap().value.abs() <= 1e-10);
        assert!(symmetric_divergence(&t, &t, &spec()).unwrap().value.abs() <= 2e-10);
    }

    #[test]
    fn power_against_uniform() {
        let p = ContinuousGrading::power(2.0).unwrap();
        let r = divergence_continuous(&p, &unit(), &spec()).unwrap();
        assert!((r.value - (0.5 - LN_2)).abs() < 1e-9, "{r:?}");
        assert!(r.error_estimate.unwrap() < 1e-8);
        let c = corrected_entropy(&p, &spec()).unwrap();
        assert!((c.value - (0.5 - LN_2)).abs() < 1e-9);
        let s = symmetric_divergence(&p, &unit(), &spec()).unwrap();
        assert!((s.value + 0.5).abs() < 1e-8, "{s:?}");
    }

    #[test]
    fn corrected_entropy_of_uniform_is_zero() {
        let u = ContinuousGrading::uniform(0.0, 10.0).unwrap();
        assert!(corrected_entropy(&u, &spec()).unwrap().value.abs() <= 1e-10);
        let classical = classical_entropy(&u, &spec()).unwrap().value;
        assert!((classical - 10f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn corrected_entropy_needs_probability() {
        let pl = ContinuousGrading::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert!(matches!(corrected_entropy(&pl, &spec()), Err(Error::NotProbability { .. })));
    }

    #[test]
    fn support_mismatch() {
        let other = ContinuousGrading::uniform(0.0, 2.0).unwrap();
        assert!(matches!(
            divergence_continuous(&unit(), &other, &spec()),
            Err(Error::SupportMismatch(..))
        ));
        assert!(riemann_divergence(&unit(), &other, 10).is_err());
    }

    #[test]
    fn riemann_identity_cases() {
        assert_eq!(riemann_divergence(&unit(), &unit(), 13).unwrap(), 0.0);
        let wide = ContinuousGrading::uniform(0.0, 2.0).unwrap();
        assert_eq!(riemann_divergence(&wide, &wide, 7).unwrap(), 0.0);
        assert!(riemann_divergence(&unit(), &unit(), 1).is_err());
    }

    #[test]
    fn riemann_power_against_uniform() {
        let p = ContinuousGrading::power(2.0).unwrap();
        let r = riemann_divergence(&p, &unit(), 100_000).unwrap();
        assert!((r - (0.5 - LN_2)).abs() < 1e-4, "{r}");
    }

    #[test]
    fn zero_reference_density_diverges() {
        // g vanishes on [0, 0.5] where f has mass.
        let f = unit();
        let g = ContinuousGrading::piecewise_linear(vec![(0.0, 0.0), (0.5, 1e-300), (1.0, 1.0)]).unwrap();
        let r = divergence_continuous(&f, &g, &spec()).unwrap();
        assert!(r.value.is_finite());
        let g = ContinuousGrading::truncated_normal(0.0, 0.01, 0.0, 1.0).unwrap();
        let r = divergence_continuous(&f, &g, &spec()).unwrap();
        assert!(r.is_negative_infinity(), "{r:?}");
        let s = symmetric_divergence(&f, &g, &spec()).unwrap();
        assert!(s.is_negative_infinity());
        assert_eq!(s.value, f64::NEG_INFINITY);
    }
}
