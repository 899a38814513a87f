//! Relative divergence on finite ordered sets and its probability and
//! measure specializations.
//!
//! | Function | Value |
//! |----------|-------|
//! | [`divergence_discrete`] | Σ ln(Δ_k G / Δ_k F) · Δ_k F |
//! | [`relative_entropy`] | Σ f_k ln(g_k / f_k) |
//! | [`shannon_entropy`] | −Σ f_k ln f_k |
//! | [`partition_entropy`] | −Σ μ(A_k) ln μ(A_k) |
//!
//! All of them run through the same per-increment kernel, so the
//! specializations agree with the general formula term by term.
//!
//! Note the sign: `relative_entropy` is the *negative* of the usual
//! Kullback-Leibler divergence and is never positive for probability
//! vectors. [`DivergenceResult::kl`] flips it back.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ordered::{rate_h, CompensatedSum, GradingSample, IncrementPair};

/// Absolute tolerance on the total mass of a [`ProbabilityVector`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Nonnegative weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    weights: Vec<f64>,
}

impl TryFrom<RawWeights> for ProbabilityVector {
    type Error = Error;

    fn try_from(raw: RawWeights) -> Result<Self> {
        ProbabilityVector::new(raw.weights)
    }
}

impl From<ProbabilityVector> for RawWeights {
    fn from(p: ProbabilityVector) -> Self {
        RawWeights { weights: p.weights }
    }
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        check_masses(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized(sum));
        }
        Ok(ProbabilityVector { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Running-sum (c.d.f.) grading of the weights.
    ///
    /// Only defined when every weight is positive.
    pub fn cdf(&self) -> Result<GradingSample> {
        GradingSample::cumulative(&self.weights)
    }
}

fn check_masses(masses: &[f64]) -> Result<()> {
    for (index, &value) in masses.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        if value < 0.0 {
            return Err(Error::Negative { index, value });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    NegativeInfinity,
    Empty,
}

/// A divergence value in nats together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    #[serde(serialize_with = "ser_extended", deserialize_with = "de_extended")]
    pub value: f64,
    /// Terms (or quadrature cells) that contributed to `value`.
    pub terms_used: usize,
    /// Reference mass `ΔG` carried by terms skipped because `ΔF = 0`.
    pub dropped_mass: f64,
    pub flags: BTreeSet<Flag>,
    /// Quadrature error estimate, for integral forms only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
}

impl DivergenceResult {
    pub fn is_negative_infinity(&self) -> bool {
        self.flags.contains(&Flag::NegativeInfinity)
    }

    pub fn is_empty(&self) -> bool {
        self.flags.contains(&Flag::Empty)
    }

    /// Conventional Kullback-Leibler orientation, `−value`.
    pub fn kl(&self) -> f64 {
        -self.value
    }
}

fn ser_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_extended<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Extended {
        Number(f64),
        Marker(String),
    }
    match Extended::deserialize(d)? {
        Extended::Number(v) => Ok(v),
        Extended::Marker(m) if m == "-inf" => Ok(f64::NEG_INFINITY),
        Extended::Marker(m) => Err(serde::de::Error::custom(format!(
            "expected a number or \"-inf\", got {m:?}"
        ))),
    }
}

/// Σ ΔF·ln(ΔG/ΔF) over paired increments. Terms with `ΔF = 0` are skipped.
pub(crate) fn divergence_from_increments(
    delta_f: impl IntoIterator<Item = f64>,
    delta_g: impl IntoIterator<Item = f64>,
) -> Result<DivergenceResult> {
    let mut sum = CompensatedSum::default();
    let mut terms_used = 0;
    let mut dropped = CompensatedSum::default();
    let mut diverged = false;
    for (df, dg) in delta_f.into_iter().zip(delta_g) {
        if df == 0.0 {
            dropped.add(dg);
            continue;
        }
        let rate = rate_h(IncrementPair::new(dg, df))?;
        terms_used += 1;
        if rate == f64::NEG_INFINITY {
            diverged = true;
        } else {
            sum.add(df * rate);
        }
    }
    let mut flags = BTreeSet::new();
    if terms_used == 0 {
        flags.insert(Flag::Empty);
    }
    let value = if diverged {
        flags.insert(Flag::NegativeInfinity);
        f64::NEG_INFINITY
    } else {
        sum.total()
    };
    Ok(DivergenceResult {
        value,
        terms_used,
        dropped_mass: dropped.total(),
        flags,
        error_estimate: None,
    })
}

/// Relative divergence of `f` from `g` over a finite ordered set.
pub fn divergence_discrete(f: &GradingSample, g: &GradingSample) -> Result<DivergenceResult> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    divergence_from_increments(f.increments(), g.increments())
}

/// `Σ f_k ln(g_k / f_k)`; zero for identical vectors, negative otherwise.
pub fn relative_entropy(f: &ProbabilityVector, g: &ProbabilityVector) -> Result<DivergenceResult> {
    if f.len() != g.len() {
        return Err(Error::LengthMismatch(f.len(), g.len()));
    }
    divergence_from_increments(f.weights.iter().copied(), g.weights.iter().copied())
}

/// Shannon entropy in nats: divergence of the c.d.f. from the position
/// function, whose increments are all 1.
pub fn shannon_entropy(f: &ProbabilityVector) -> Result<DivergenceResult> {
    divergence_from_increments(f.weights.iter().copied(), std::iter::repeat(1.0))
}

/// `−Σ μ(A_k) ln μ(A_k)` for cell masses of an arbitrary (not necessarily
/// normalized) measure.
pub fn partition_entropy(masses: &[f64]) -> Result<DivergenceResult> {
    check_masses(masses)?;
    divergence_from_increments(masses.iter().copied(), std::iter::repeat(1.0))
}
