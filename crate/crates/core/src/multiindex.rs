//! Multi-indices, the graded truncated index set, and log-space weights.
//!
//! A chaos index is a finitely supported sequence of non-negative
//! integers. Truncating to `K` Gaussian modes and total order `N` gives the
//! finite set `I_{K,N}`, which is enumerated in graded order: all indices
//! of order `l` come before any index of order `l + 1`, and within one
//! grade the tuples appear in descending lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Range, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest index set `enumerate` will build.
pub const MAX_CARDINALITY: u128 = 10_000_000;

/// Above this argument `ln(x!)` switches from `lgamma` to Stirling's series.
pub const STIRLING_SWITCH: f64 = 1e15;

/// A chaos index `alpha = (alpha_1, ..., alpha_K)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(k: usize) -> Self {
        MultiIndex(vec![0; k])
    }

    /// The unit index `eps_{mode+1}` (modes are numbered from zero here).
    pub fn unit(k: usize, mode: usize) -> Self {
        let mut e = vec![0; k];
        e[mode] = 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Number of modes `K`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total order `|alpha|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Strict dominance `self < other`: `self <= other` and `self != other`.
    pub fn lt(&self, other: &MultiIndex) -> bool {
        self.le(other) && self != other
    }

    /// `self - other`, defined only when `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Number of non-zero components.
    pub fn support_len(&self) -> usize {
        self.0.iter().filter(|&&a| a > 0).count()
    }

    /// Label used in CSV headers, e.g. `a(0,2,0)`.
    pub fn label(&self) -> String {
        format!("a{self}")
    }

    /// Inverse of [`MultiIndex::label`].
    pub fn parse_label(s: &str) -> Option<MultiIndex> {
        let inner = s.strip_prefix("a(")?.strip_suffix(')')?;
        if inner.is_empty() {
            return Some(MultiIndex(Vec::new()));
        }
        inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), rhs.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// For every target ordinal, the ordered pairs `(i, j)` of ordinals whose
/// indices add up to the target. Stored CSR-style.
#[derive(Debug)]
struct PairTable {
    offsets: Vec<usize>,
    pairs: Vec<(u32, u32)>,
}

/// The truncated index set `I_{K,N}` in graded order.
#[derive(Debug)]
pub struct IndexSet {
    k: usize,
    n: usize,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
    grade_starts: Vec<usize>,
    pairs: OnceLock<PairTable>,
}

/// `C(k+n, n)`, or `None` once it passes `cap`.
fn capped_binomial(k: usize, n: usize, cap: u128) -> Option<u128> {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c.checked_mul(k as u128 + i)? / i;
        if c > cap {
            return None;
        }
    }
    Some(c)
}

impl IndexSet {
    /// Builds `I_{K,N}`: every index of length `k` with order at most `n`.
    pub fn enumerate(k: usize, n: usize) -> Result<IndexSet> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "mode count K must be at least 1".into(),
            ));
        }
        let size = capped_binomial(k, n, MAX_CARDINALITY).ok_or(Error::Capacity {
            k,
            n,
            size: capped_binomial(k, n, u128::MAX).unwrap_or(u128::MAX),
            cap: MAX_CARDINALITY,
        })?;

        let mut indices = Vec::with_capacity(size as usize);
        let mut grade_starts = Vec::with_capacity(n + 2);
        let mut scratch = vec![0u32; k];
        for grade in 0..=n {
            grade_starts.push(indices.len());
            fill_grade(&mut scratch, 0, grade as u32, &mut indices);
        }
        grade_starts.push(indices.len());
        debug_assert_eq!(indices.len() as u128, size);

        let position = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Ok(IndexSet {
            k,
            n,
            indices,
            position,
            grade_starts,
            pairs: OnceLock::new(),
        })
    }

    /// Number of modes `K`.
    pub fn modes(&self) -> usize {
        self.k
    }

    /// Maximal total order `N`.
    pub fn max_order(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, ordinal: usize) -> &MultiIndex {
        &self.indices[ordinal]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }

    /// Ordinal range of grade `l` (empty past `N`).
    pub fn grade(&self, l: usize) -> Range<usize> {
        if l > self.n {
            return self.indices.len()..self.indices.len();
        }
        self.grade_starts[l]..self.grade_starts[l + 1]
    }

    /// Order `|alpha|` of the index at `ordinal`.
    pub fn order_of(&self, ordinal: usize) -> usize {
        // grade_starts is sorted; the grade is the last start <= ordinal
        self.grade_starts.partition_point(|&s| s <= ordinal) - 1
    }

    /// Ordered pairs `(i, j)` with `indices[i] + indices[j] == indices[target]`,
    /// sorted by `i`. Includes the pairs involving the zero index.
    pub fn pairs(&self, target: usize) -> &[(u32, u32)] {
        let table = self.pairs.get_or_init(|| self.build_pairs());
        &table.pairs[table.offsets[target]..table.offsets[target + 1]]
    }

    fn build_pairs(&self) -> PairTable {
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut pairs = Vec::new();
        offsets.push(0);
        for gamma in &self.indices {
            let mut beta = vec![0u32; self.k];
            loop {
                let b = MultiIndex(beta.clone());
                let rest = gamma.checked_sub(&b).expect("beta <= gamma");
                let i = self.position[&b];
                let j = self.position[&rest];
                pairs.push((i as u32, j as u32));
                if !odometer_step(&mut beta, gamma.entries()) {
                    break;
                }
            }
            let start = *offsets.last().unwrap();
            pairs[start..].sort_unstable();
            offsets.push(pairs.len());
        }
        PairTable { offsets, pairs }
    }
}

fn fill_grade(scratch: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for v in (0..=remaining).rev() {
        scratch[pos] = v;
        fill_grade(scratch, pos + 1, remaining - v, out);
    }
    scratch[pos] = 0;
}

/// Advances `current` through the box `0 <= current <= bound`, first
/// component fastest. Returns `false` after wrapping back to zero.
fn odometer_step(current: &mut [u32], bound: &[u32]) -> bool {
    for (c, &b) in current.iter_mut().zip(bound) {
        if *c < b {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}

/// A natural logarithm of a positive weight. `+inf` encodes a weight too
/// large for `f64` even in log form; `-inf` encodes zero.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 + rhs.0)
    }
}

impl Sub for LogWeight {
    type Output = LogWeight;
    fn sub(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 - rhs.0)
    }
}

impl Neg for LogWeight {
    type Output = LogWeight;
    fn neg(self) -> LogWeight {
        LogWeight(-self.0)
    }
}

/// `ln(alpha!)` with `alpha! = prod alpha_i!`.
pub fn log_factorial(alpha: &MultiIndex) -> LogWeight {
    LogWeight(
        alpha
            .entries()
            .iter()
            .map(|&a| ln_factorial(a as f64))
            .sum(),
    )
}

/// `ln((2N)^{p alpha}) = p * sum_n alpha_n ln(2n)`, modes numbered from 1.
pub fn log_two_n_pow(alpha: &MultiIndex, p: f64) -> LogWeight {
    let s: f64 = alpha
        .entries()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(i, &a)| a as f64 * (2.0 * (i + 1) as f64).ln())
        .sum();
    LogWeight(p * s)
}

/// `ln((r^{|alpha|^3})!)`.
pub fn log_superfactorial_weight(alpha: &MultiIndex, r: f64) -> LogWeight {
    log_superfactorial(alpha.order(), r)
}

/// `ln((r^{m^3})!)` for a total order `m`.
pub fn log_superfactorial(order: u32, r: f64) -> LogWeight {
    if order == 0 {
        return LogWeight::ONE;
    }
    let ln_x = (order as f64).powi(3) * r.ln();
    let x = ln_x.exp();
    if x <= STIRLING_SWITCH {
        LogWeight(ln_factorial(r.powf((order as f64).powi(3))))
    } else {
        LogWeight(stirling_ln_factorial(x, ln_x))
    }
}

/// `ln(x!)` through `lgamma(x + 1)`.
pub fn ln_factorial(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    libm::lgamma(x + 1.0)
}

/// Stirling: `x ln x - x + ln(2 pi x)/2`, written in terms of `ln x` so an
/// overflowing `x` yields `+inf` instead of NaN.
pub fn stirling_ln_factorial(x: f64, ln_x: f64) -> f64 {
    if x.is_infinite() {
        return f64::INFINITY;
    }
    x * (ln_x - 1.0) + 0.5 * ((2.0 * std::f64::consts::PI).ln() + ln_x)
}

/// Iterator over all `beta` with `0 < beta < alpha`.
pub struct SubIndices {
    bound: Vec<u32>,
    current: Vec<u32>,
    done: bool,
}

impl Iterator for SubIndices {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        while !self.done {
            if !odometer_step(&mut self.current, &self.bound) {
                self.done = true;
                return None;
            }
            if self.current != self.bound {
                return Some(MultiIndex(self.current.clone()));
            }
        }
        None
    }
}

/// All `beta` with `0 < beta < alpha` in odometer order (first mode fastest).
/// There are `prod(alpha_i + 1) - 2` of them when `alpha != 0`.
pub fn sub_indices(alpha: &MultiIndex) -> SubIndices {
    SubIndices {
        bound: alpha.entries().to_vec(),
        current: vec![0; alpha.len()],
        done: alpha.is_zero(),
    }
}

/// Every ordered `k`-tuple of non-zero indices summing to `alpha`.
///
/// Built by splitting off a first part `beta_1` and recursing on the rest.
/// The count is `N(alpha, k)`; the iterator is empty when `k > |alpha|`.
/// `k = 1` yields the single tuple `(alpha)` for non-zero `alpha`.
pub fn decompositions(alpha: &MultiIndex, k: usize) -> std::vec::IntoIter<Vec<MultiIndex>> {
    let mut out = Vec::new();
    if k >= 1 && k as u32 <= alpha.order() {
        let mut prefix = Vec::with_capacity(k);
        split_into(alpha, k, &mut prefix, &mut out);
    }
    out.into_iter()
}

fn split_into(
    rest: &MultiIndex,
    parts: usize,
    prefix: &mut Vec<MultiIndex>,
    out: &mut Vec<Vec<MultiIndex>>,
) {
    if parts == 1 {
        prefix.push(rest.clone());
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    // beta_1 ranges over 0 < beta_1 <= rest, leaving at least parts-1 units
    let mut beta = vec![0u32; rest.len()];
    while odometer_step(&mut beta, rest.entries()) {
        let b = MultiIndex(beta.clone());
        let remainder = rest.checked_sub(&b).expect("beta <= rest");
        if (remainder.order() as usize) < parts - 1 {
            continue;
        }
        prefix.push(b);
        split_into(&remainder, parts - 1, prefix, out);
        prefix.pop();
    }
}
