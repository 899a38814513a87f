//! Grading functions on finite linearly ordered sets.
//!
//! A grading function assigns strictly increasing real grades to the
//! elements `w_0 ≺ w_1 ≺ … ≺ w_n` of an ordered set. Everything downstream
//! works with its increments `Δ_k F = F(w_k) − F(w_{k−1})` and with the rate
//! function `h(ΔG, ΔF) = ln(ΔG / ΔF)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite, strictly increasing sequence of grades `F(w_0), …, F(w_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGradingSample", into = "RawGradingSample")]
pub struct GradingSample {
    grades: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGradingSample {
    grades: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawGradingSample> for GradingSample {
    type Error = Error;

    fn try_from(raw: RawGradingSample) -> Result<Self> {
        let sample = GradingSample::new(raw.grades)?;
        match raw.labels {
            Some(labels) => sample.with_labels(labels),
            None => Ok(sample),
        }
    }
}

impl From<GradingSample> for RawGradingSample {
    fn from(sample: GradingSample) -> Self {
        RawGradingSample {
            grades: sample.grades,
            labels: sample.labels,
        }
    }
}

impl GradingSample {
    pub fn new(grades: Vec<f64>) -> Result<Self> {
        if grades.len() < 2 {
            return Err(Error::TooShort(grades.len()));
        }
        for (index, &value) in grades.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        for (index, pair) in grades.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::NotStrictlyIncreasing {
                    index: index + 1,
                    value: pair[1],
                    previous: pair[0],
                });
            }
        }
        Ok(GradingSample {
            grades,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.grades.len() {
            return Err(Error::LabelMismatch {
                grades: self.grades.len(),
                labels: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// The position function `G(w_k) = k` on `len` elements.
    pub fn position(len: usize) -> Result<Self> {
        GradingSample::new((0..len).map(|k| k as f64).collect())
    }

    /// Running-sum grading `F(w_k) = Σ_{i≤k} weights[i]`, starting from 0.
    ///
    /// Fails when any weight is zero, since the result would not be strictly
    /// increasing.
    pub fn cumulative(weights: &[f64]) -> Result<Self> {
        let mut grades = Vec::with_capacity(weights.len() + 1);
        let mut acc = 0.0;
        grades.push(acc);
        for &w in weights {
            acc += w;
            grades.push(acc);
        }
        GradingSample::new(grades)
    }

    pub fn grades(&self) -> &[f64] {
        &self.grades
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Number of elements (grades), always at least 2.
    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Restriction to the elements `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if end > self.grades.len() || end < start + 2 {
            return Err(Error::TooShort(end.saturating_sub(start)));
        }
        Ok(GradingSample {
            grades: self.grades[start..end].to_vec(),
            labels: self.labels.as_ref().map(|l| l[start..end].to_vec()),
        })
    }

    pub fn increments(&self) -> Vec<f64> {
        self.grades.windows(2).map(|p| p[1] - p[0]).collect()
    }
}

/// Increments `Δ_k F`; every entry is strictly positive.
pub fn increments(sample: &GradingSample) -> Vec<f64> {
    sample.increments()
}

/// Grade changes `ΔG` and `ΔF` of two grading functions over the same pair
/// of elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementPair {
    pub delta_g: f64,
    pub delta_f: f64,
}

impl IncrementPair {
    pub fn new(delta_g: f64, delta_f: f64) -> Self {
        IncrementPair { delta_g, delta_f }
    }
}

/// Divergence rate `h = ln(ΔG / ΔF)` of `F` from `G` per unit change of `F`.
///
/// Returns `f64::NEG_INFINITY` when `ΔG = 0`. Negative or non-finite
/// increments and `ΔF = 0` are rejected.
pub fn rate_h(pair: IncrementPair) -> Result<f64> {
    let IncrementPair { delta_g, delta_f } = pair;
    if !delta_g.is_finite() {
        return Err(Error::NonFinite {
            index: 0,
            value: delta_g,
        });
    }
    if !delta_f.is_finite() {
        return Err(Error::NonFinite {
            index: 1,
            value: delta_f,
        });
    }
    if delta_g < 0.0 {
        return Err(Error::Negative {
            index: 0,
            value: delta_g,
        });
    }
    if delta_f < 0.0 {
        return Err(Error::Negative {
            index: 1,
            value: delta_f,
        });
    }
    if delta_f == 0.0 {
        return Err(Error::ZeroReference);
    }
    if delta_g == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((delta_g / delta_f).ln())
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}
