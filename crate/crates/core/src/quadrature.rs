//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.
//!
//! Every node lies strictly inside its cell, so integrands are never
//! evaluated at the interval endpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered::CompensatedSum;

/// Upper bound on live cells before giving up.
const MAX_CELLS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Deepest bisection level of any cell.
    pub max_depth: u32,
    /// Distance trimmed from each end of the interval before integrating.
    #[serde(default)]
    pub endpoint_margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 60,
            endpoint_margin: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.abs_tol.is_finite()
            && self.rel_tol > 0.0
            && self.rel_tol.is_finite()
            && self.max_depth > 0
            && self.endpoint_margin >= 0.0
            && self.endpoint_margin.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid quadrature spec {self:?}")))
        }
    }
}

/// Outcome of [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    /// `−∞` when the integrand hit `−∞` at some node.
    pub value: f64,
    pub error: f64,
    pub cells: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // Largest error first; position breaks ties so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

enum Eval {
    Cell(Cell),
    Diverged,
}

fn gauss_kronrod(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, depth: u32) -> Result<Eval> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 {
            &[center]
        } else {
            &[center - half * x, center + half * x]
        };
        for &node in nodes {
            let y = f(node);
            if y == f64::NEG_INFINITY {
                return Ok(Eval::Diverged);
            }
            if !y.is_finite() {
                return Err(Error::NotANumber(node));
            }
            kronrod += wk * y;
            // Gauss nodes are the odd-indexed Kronrod nodes.
            if i % 2 == 1 {
                gauss += WG[i / 2] * y;
            }
        }
    }
    Ok(Eval::Cell(Cell {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        depth,
    }))
}

/// Integrates `f` over `[lo, hi]`, splitting first at `breakpoints`, until
/// the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    let (lo, hi) = (lo + spec.endpoint_margin, hi - spec.endpoint_margin);
    if !(lo < hi) {
        return Err(Error::InvalidParams(format!(
            "empty integration range [{lo}, {hi}] after endpoint margin"
        )));
    }
    let mut edges = vec![lo];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    edges.extend(interior);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut running_value = CompensatedSum::default();
    let mut running_error = CompensatedSum::default();
    for w in edges.windows(2) {
        match gauss_kronrod(&f, w[0], w[1], 0)? {
            Eval::Cell(c) => {
                running_value.add(c.value);
                running_error.add(c.error);
                heap.push(c);
            }
            Eval::Diverged => return Ok(diverged(heap.len() + 1)),
        }
    }

    loop {
        let (value, error) = (running_value.total(), running_error.total());
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            let (value, error) = totals(&heap);
            return Ok(Integral {
                value,
                error,
                cells: heap.len(),
            });
        }
        let worst = *heap.peek().expect("at least one cell");
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= spec.max_depth || heap.len() >= MAX_CELLS || mid <= worst.lo || mid >= worst.hi
        {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                cells: heap.len(),
            });
        }
        heap.pop();
        running_value.add(-worst.value);
        running_error.add(-worst.error);
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            match gauss_kronrod(&f, a, b, worst.depth + 1)? {
                Eval::Cell(c) => {
                    running_value.add(c.value);
                    running_error.add(c.error);
                    heap.push(c);
                }
                Eval::Diverged => return Ok(diverged(heap.len() + 1)),
            }
        }
    }
}

fn diverged(cells: usize) -> Integral {
    Integral {
        value: f64::NEG_INFINITY,
        error: 0.0,
        cells,
    }
}

fn totals(heap: &BinaryHeap<Cell>) -> (f64, f64) {
    // Sum in position order so the result does not depend on heap layout.
    let mut cells: Vec<&Cell> = heap.iter().collect();
    cells.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = CompensatedSum::default();
    let mut error = CompensatedSum::default();
    for c in cells {
        value.add(c.value);
        error.add(c.error);
    }
    (value.total(), error.total())
}
