//! Entropy of capacities (monotone, non-additive set functions) on finite
//! ground sets.
//!
//! Each maximal chain `∅ = C_0 ⊂ C_1 ⊂ … ⊂ C_n = S` of the Boolean lattice
//! adds one element at a time, so chains are permutations of the ground set.
//! Along a chain the capacity is a grading function, and its divergence from
//! the position function is `−Σ Δ_k μ ln Δ_k μ`. The entropy of the capacity
//! is the smallest such value over all chains.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::discrete::{divergence_from_increments, DivergenceResult};
use crate::error::{Error, Result};

/// Default cap on `n` for exhaustive search (10! ≈ 3.6M chains).
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 10;

/// Hard cap on `n` for exhaustive search; chain ranks must fit in a `u64`.
pub const MAX_EXHAUSTIVE_LIMIT: usize = 20;

/// Largest supported ground set (the table holds `2^n` values).
pub const MAX_GROUND_SIZE: usize = 24;

/// Capacity on the ground set `{1, …, n}`, stored as a table indexed by
/// subset bitmask (element `i` is bit `i − 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    ground_size: usize,
    values: Vec<f64>,
}

impl Capacity {
    /// Validates `values[∅] = 0`, nonnegativity and monotonicity over every
    /// cover pair `(A, A ∪ {e})`.
    pub fn new(ground_size: usize, values: Vec<f64>) -> Result<Self> {
        if ground_size == 0 || ground_size > MAX_GROUND_SIZE {
            return Err(Error::Capacity(format!(
                "ground size {ground_size} outside 1..={MAX_GROUND_SIZE}"
            )));
        }
        if values.len() != 1 << ground_size {
            return Err(Error::Capacity(format!(
                "expected {} subset values, got {}",
                1usize << ground_size,
                values.len()
            )));
        }
        for (mask, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Capacity(format!(
                    "value {v} of subset {{{}}} is not a finite nonnegative number",
                    subset_key(mask)
                )));
            }
        }
        if values[0] != 0.0 {
            return Err(Error::Capacity(format!(
                "value of the empty set is {}, expected 0",
                values[0]
            )));
        }
        for mask in 0..values.len() {
            for e in 0..ground_size {
                let bit = 1 << e;
                if mask & bit == 0 && values[mask | bit] < values[mask] {
                    return Err(Error::Capacity(format!(
                        "not monotone: mu({{{}}}) = {} exceeds mu({{{}}}) = {}",
                        subset_key(mask),
                        values[mask],
                        subset_key(mask | bit),
                        values[mask | bit]
                    )));
                }
            }
        }
        Ok(Capacity {
            ground_size,
            values,
        })
    }

    /// Builds the table by evaluating `mu` on every bitmask.
    pub fn from_fn(ground_size: usize, mu: impl Fn(usize) -> f64) -> Result<Self> {
        if ground_size > MAX_GROUND_SIZE {
            return Err(Error::Capacity(format!(
                "ground size {ground_size} outside 1..={MAX_GROUND_SIZE}"
            )));
        }
        Capacity::new(ground_size, (0..1usize << ground_size).map(mu).collect())
    }

    /// The additive measure with the given singleton masses.
    pub fn additive(masses: &[f64]) -> Result<Self> {
        Capacity::from_fn(masses.len(), |mask| {
            masses
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, m)| m)
                .sum()
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    /// Increments `μ(C_k) − μ(C_{k−1})` along the chain given by `order`
    /// (1-based elements).
    fn chain_increments<'a>(&'a self, order: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
        order.iter().scan(0usize, move |mask, &e| {
            let prev = self.values[*mask];
            *mask |= 1 << (e - 1);
            Some(self.values[*mask] - prev)
        })
    }

    fn chain_value(&self, order: &[usize]) -> DivergenceResult {
        divergence_from_increments(self.chain_increments(order), std::iter::repeat(1.0))
            .expect("validated capacity yields nonnegative finite increments")
    }
}

/// Canonical subset key: sorted 1-based elements joined by commas.
fn subset_key(mask: usize) -> String {
    let mut key = String::new();
    let mut bits = mask;
    let mut e = 1;
    while bits != 0 {
        if bits & 1 == 1 {
            if !key.is_empty() {
                key.push(',');
            }
            key.push_str(&e.to_string());
        }
        bits >>= 1;
        e += 1;
    }
    key
}

fn parse_subset_key(key: &str, ground_size: usize) -> Result<usize> {
    if key.is_empty() {
        return Ok(0);
    }
    let mut mask = 0usize;
    let mut last = 0usize;
    for part in key.split(',') {
        let e: usize = part
            .parse()
            .map_err(|_| Error::Capacity(format!("bad subset key {key:?}")))?;
        if e == 0 || e > ground_size {
            return Err(Error::Capacity(format!(
                "element {e} in key {key:?} outside 1..={ground_size}"
            )));
        }
        if e <= last {
            return Err(Error::Capacity(format!(
                "subset key {key:?} is not a sorted list of distinct elements"
            )));
        }
        last = e;
        mask |= 1 << (e - 1);
    }
    Ok(mask)
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Table<'a>(&'a [f64]);
        impl Serialize for Table<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.len()))?;
                for (mask, v) in self.0.iter().enumerate() {
                    map.serialize_entry(&subset_key(mask), v)?;
                }
                map.end()
            }
        }
        let mut st = s.serialize_struct("Capacity", 2)?;
        st.serialize_field("ground_size", &self.ground_size)?;
        st.serialize_field("values", &Table(&self.values))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            ground_size: usize,
            #[serde(deserialize_with = "unique_entries")]
            values: Vec<(String, f64)>,
        }

        fn unique_entries<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<(String, f64)>, D::Error> {
            struct Entries;
            impl<'de> Visitor<'de> for Entries {
                type Value = Vec<(String, f64)>;
                fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                    f.write_str("a map from subset keys to numbers")
                }
                fn visit_map<A: MapAccess<'de>>(
                    self,
                    mut map: A,
                ) -> std::result::Result<Self::Value, A::Error> {
                    let mut out = Vec::new();
                    while let Some(entry) = map.next_entry::<String, f64>()? {
                        out.push(entry);
                    }
                    Ok(out)
                }
            }
            d.deserialize_map(Entries)
        }

        let raw = Raw::deserialize(d)?;
        let n = raw.ground_size;
        if n == 0 || n > MAX_GROUND_SIZE {
            return Err(de::Error::custom(format!(
                "ground_size {n} outside 1..={MAX_GROUND_SIZE}"
            )));
        }
        let mut table: BTreeMap<usize, f64> = BTreeMap::new();
        for (key, v) in raw.values {
            let mask = parse_subset_key(&key, n).map_err(de::Error::custom)?;
            if table.insert(mask, v).is_some() {
                return Err(de::Error::custom(format!("duplicate subset key {key:?}")));
            }
        }
        let mut values = Vec::with_capacity(1 << n);
        for mask in 0..1usize << n {
            match table.get(&mask) {
                Some(&v) => values.push(v),
                None => {
                    return Err(de::Error::custom(format!(
                        "missing value for subset {:?}",
                        subset_key(mask)
                    )))
                }
            }
        }
        Capacity::new(n, values).map_err(de::Error::custom)
    }
}

/// Maximal chain of the Boolean lattice, given as the order in which the
/// 1-based elements are added.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MaximalChain {
    order: Vec<usize>,
}

impl TryFrom<Vec<usize>> for MaximalChain {
    type Error = Error;

    fn try_from(order: Vec<usize>) -> Result<Self> {
        MaximalChain::new(order)
    }
}

impl From<MaximalChain> for Vec<usize> {
    fn from(chain: MaximalChain) -> Self {
        chain.order
    }
}

impl MaximalChain {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 {
            return Err(Error::InvalidChain("empty order".into()));
        }
        let mut seen = vec![false; n];
        for &e in &order {
            if e == 0 || e > n || std::mem::replace(&mut seen[e - 1], true) {
                return Err(Error::InvalidChain(format!(
                    "{order:?} is not a permutation of 1..={n}"
                )));
            }
        }
        Ok(MaximalChain { order })
    }

    /// The chain `(1, 2, …, n)`.
    pub fn identity(n: usize) -> Self {
        MaximalChain {
            order: (1..=n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Bitmasks of `C_0 = ∅, C_1, …, C_n`.
    pub fn subsets(&self) -> Vec<usize> {
        let mut masks = Vec::with_capacity(self.order.len() + 1);
        let mut mask = 0;
        masks.push(mask);
        for &e in &self.order {
            mask |= 1 << (e - 1);
            masks.push(mask);
        }
        masks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    Greedy,
}

/// Capacity entropy with the chain that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntropyReport {
    pub entropy: f64,
    pub argmin_chain: MaximalChain,
    pub chains_examined: u64,
    pub method: Method,
}

/// Divergence of `μ` along `chain` from the chain's position function.
pub fn chain_divergence(mu: &Capacity, chain: &MaximalChain) -> Result<DivergenceResult> {
    if chain.len() != mu.ground_size {
        return Err(Error::LengthMismatch(chain.len(), mu.ground_size));
    }
    Ok(mu.chain_value(&chain.order))
}

/// [`capacity_entropy_with_limit`] at [`DEFAULT_EXHAUSTIVE_LIMIT`].
pub fn capacity_entropy(mu: &Capacity, method: Method) -> Result<CapacityEntropyReport> {
    capacity_entropy_with_limit(mu, method, DEFAULT_EXHAUSTIVE_LIMIT)
}

/// Entropy of `μ`.
///
/// `Exhaustive` takes the minimum over all `n!` chains; ties go to the
/// lexicographically first chain. `Greedy` grows one chain by always adding
/// the element with the smallest term `−Δ ln Δ` (lowest element on ties) and
/// reports its value, an upper bound on the exhaustive one.
pub fn capacity_entropy_with_limit(
    mu: &Capacity,
    method: Method,
    limit: usize,
) -> Result<CapacityEntropyReport> {
    match method {
        Method::Exhaustive => {
            let n = mu.ground_size;
            let limit = limit.min(MAX_EXHAUSTIVE_LIMIT);
            if n > limit {
                return Err(Error::ExhaustiveLimit { n, limit });
            }
            let (entropy, order, examined) = exhaustive_min(mu);
            Ok(CapacityEntropyReport {
                entropy,
                argmin_chain: MaximalChain { order },
                chains_examined: examined,
                method,
            })
        }
        Method::Greedy => {
            let chain = greedy_chain(mu);
            Ok(CapacityEntropyReport {
                entropy: mu.chain_value(&chain.order).value,
                argmin_chain: chain,
                chains_examined: 1,
                method,
            })
        }
    }
}

fn entropy_term(delta: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        -delta * delta.ln()
    }
}

fn greedy_chain(mu: &Capacity) -> MaximalChain {
    let n = mu.ground_size;
    let mut mask = 0usize;
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let base = mu.values[mask];
        let best = (0..n)
            .filter(|e| mask & (1 << e) == 0)
            .map(|e| (entropy_term(mu.values[mask | (1 << e)] - base), e))
            .fold(None, |best: Option<(f64, usize)>, cand| match best {
                Some(b) if b.0 <= cand.0 => Some(b),
                _ => Some(cand),
            })
            .expect("an unused element remains");
        mask |= 1 << best.1;
        order.push(best.1 + 1);
    }
    MaximalChain { order }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Permutation of `1..=n` with lexicographic rank `rank`.
fn unrank(n: usize, mut rank: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..=n).collect();
    let mut out = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i);
        let idx = (rank / f) as usize;
        rank %= f;
        out.push(pool.remove(idx));
    }
    out
}

/// Advances to the next permutation in lexicographic order; false after the
/// last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("pivot has a successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Lower value wins; equal values go to the lower permutation rank.
fn better(a: (f64, u64), b: (f64, u64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn exhaustive_min(mu: &Capacity) -> (f64, Vec<usize>, u64) {
    let n = mu.ground_size;
    let total = factorial(n);
    let workers = rayon::current_num_threads() as u64;
    let chunk = (total / (workers * 8)).max(1024).min(total);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();

    let (value, rank) = starts
        .par_iter()
        .map(|&start| {
            let end = (start + chunk).min(total);
            let mut perm = unrank(n, start);
            let mut best = (f64::INFINITY, u64::MAX);
            for rank in start..end {
                let v = mu.chain_value(&perm).value;
                if better((v, rank), best) {
                    best = (v, rank);
                }
                next_permutation(&mut perm);
            }
            best
        })
        .reduce(
            || (f64::INFINITY, u64::MAX),
            |a, b| if better(b, a) { b } else { a },
        );
    (value, unrank(n, rank), total)
}

/// Lexicographic stream of all `n!` maximal chains of the lattice on `n`
/// elements.
#[derive(Debug, Clone)]
pub struct Chains {
    next: Option<Vec<usize>>,
}

impl Iterator for Chains {
    type Item = MaximalChain;

    fn next(&mut self) -> Option<MaximalChain> {
        let current = self.next.take()?;
        let mut following = current.clone();
        if next_permutation(&mut following) {
            self.next = Some(following);
        }
        Some(MaximalChain { order: current })
    }
}

/// [`enumerate_chains_with_limit`] at [`DEFAULT_EXHAUSTIVE_LIMIT`].
pub fn enumerate_chains(n: usize) -> Result<Chains> {
    enumerate_chains_with_limit(n, DEFAULT_EXHAUSTIVE_LIMIT)
}

pub fn enumerate_chains_with_limit(n: usize, limit: usize) -> Result<Chains> {
    let limit = limit.min(MAX_EXHAUSTIVE_LIMIT);
    if n == 0 {
        return Err(Error::InvalidChain("ground set must be nonempty".into()));
    }
    if n > limit {
        return Err(Error::ExhaustiveLimit { n, limit });
    }
    Ok(Chains {
        next: Some((1..=n).collect()),
    })
}
