//! Wick products, powers and analytic Wick functions on truncated fields.

use std::sync::Arc;

use rayon::prelude::*;

use super::analytic::{factorial, AnalyticFunction};
use super::field::{max_norm, ChaosField};
use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::scalar::{Coeff, Real};

/// `(f <> g)_gamma = sum_{beta <= gamma} f_beta g_{gamma - beta}`, pointwise
/// on the grid, projected onto the index set.
///
/// Each unordered pair `{beta, gamma - beta}` is accumulated as
/// `f_b g_c + f_c g_b`, so swapping `f` and `g` gives a bitwise identical
/// result.
pub fn wick_product<T: Coeff>(f: &ChaosField<T>, g: &ChaosField<T>) -> Result<ChaosField<T>> {
    f.check_same_shape(g)?;
    let set = f.index_set().clone();
    let n_x = f.n_x();
    let mut out = ChaosField::zeros(set.clone(), n_x);
    if n_x == 0 {
        return Ok(out);
    }
    out.data_mut()
        .par_chunks_mut(n_x)
        .enumerate()
        .for_each(|(gamma, acc)| {
            for &(i, j) in set.pairs(gamma) {
                let (i, j) = (i as usize, j as usize);
                if i > j {
                    continue;
                }
                let (fi, gj) = (f.coeff(i), g.coeff(j));
                if i == j {
                    for x in 0..n_x {
                        acc[x] = acc[x] + fi[x] * gj[x];
                    }
                } else {
                    let (fj, gi) = (f.coeff(j), g.coeff(i));
                    for x in 0..n_x {
                        acc[x] = acc[x] + (fi[x] * gj[x] + fj[x] * gi[x]);
                    }
                }
            }
        });
    Ok(out)
}

/// `f^{<>n}`, with `f^{<>0}` the unit field.
pub fn wick_power<T: Coeff>(f: &ChaosField<T>, n: usize) -> Result<ChaosField<T>> {
    let mut acc = ChaosField::unit(f.index_set().clone(), f.n_x());
    for _ in 0..n {
        acc = wick_product(&acc, f)?;
    }
    Ok(acc)
}

/// `u - u_0 H_0`.
pub fn deflate<T: Coeff>(u: &ChaosField<T>) -> ChaosField<T> {
    let mut out = u.clone();
    out.coeff_mut(0).fill(T::zero());
    out
}

/// `Phi^{(k)}(u_0) / k!` on the grid for `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct TaylorTable<T> {
    n_x: usize,
    rows: Vec<T>,
}

impl<T: Real> TaylorTable<T> {
    pub fn new(phi: &dyn AnalyticFunction<T>, u0: &[T], k_max: usize) -> Self {
        let n_x = u0.len();
        let mut rows = Vec::with_capacity((k_max + 1) * n_x);
        for k in 0..=k_max {
            let kf = factorial::<T>(k);
            rows.extend(u0.iter().map(|&x| phi.derivative(k, x) / kf));
        }
        TaylorTable { n_x, rows }
    }

    pub fn k_max(&self) -> usize {
        self.rows.len() / self.n_x.max(1) - 1
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.rows[k * self.n_x..(k + 1) * self.n_x]
    }
}

/// Wick powers `P_k = u~^{<>k}` of a deflated field, `k = 1..=N`, built
/// grade by grade.
///
/// `P_k` at an index of order `l` only reads `P_1` and `P_{k-1}` at orders
/// below `l`, so a grade can be completed as soon as every lower grade has
/// its first power set. The propagator relies on this to feed midpoint
/// values in while it sweeps upward.
#[derive(Clone, Debug)]
pub struct DeflatedPowers<T> {
    set: Arc<IndexSet>,
    n_x: usize,
    k_max: usize,
    // per ordinal: k_max blocks of n_x values, block k-1 holds P_k
    data: Vec<T>,
}

impl<T: Coeff> DeflatedPowers<T> {
    pub fn new(set: Arc<IndexSet>, n_x: usize) -> Self {
        let k_max = set.max_order().max(1);
        let data = vec![T::zero(); set.len() * k_max * n_x];
        DeflatedPowers {
            set,
            n_x,
            k_max,
            data,
        }
    }

    /// Fills every power from `u` (its expectation slot is ignored).
    pub fn from_field(u: &ChaosField<T>) -> Self {
        let mut p = Self::new(u.index_set().clone(), u.n_x());
        for grade in 1..=p.set.max_order() {
            for ord in p.set.grade(grade) {
                p.set_first_power(ord, u.coeff(ord));
            }
            p.fill_higher_powers(grade);
        }
        p
    }

    fn stride(&self) -> usize {
        self.k_max * self.n_x
    }

    /// `P_k` at `ordinal`, for `1 <= k <= N`.
    pub fn power(&self, k: usize, ordinal: usize) -> &[T] {
        let base = ordinal * self.stride() + (k - 1) * self.n_x;
        &self.data[base..base + self.n_x]
    }

    pub fn set_first_power(&mut self, ordinal: usize, values: &[T]) {
        let base = ordinal * self.stride();
        self.data[base..base + self.n_x].copy_from_slice(values);
    }

    /// Computes `P_k` for `2 <= k <= grade` on every index of `grade`,
    /// assuming all lower grades are complete.
    pub fn fill_higher_powers(&mut self, grade: usize) {
        if grade < 2 {
            return;
        }
        let range = self.set.grade(grade);
        let stride = self.stride();
        let (n_x, set) = (self.n_x, self.set.clone());
        let (lower, upper) = self.data.split_at_mut(range.start * stride);
        let lower: &[T] = lower;
        let block = |ord: usize, k: usize| &lower[ord * stride + (k - 1) * n_x..][..n_x];
        upper[..range.len() * stride]
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(offset, slot)| {
                let gamma = range.start + offset;
                for k in 2..=grade {
                    let acc = &mut slot[(k - 1) * n_x..k * n_x];
                    acc.fill(T::zero());
                    for &(i, j) in set.pairs(gamma) {
                        let (i, j) = (i as usize, j as usize);
                        // both parts non-zero, and P_{k-1} vanishes below order k-1
                        if i == 0 || j == 0 || set.order_of(j) < k - 1 {
                            continue;
                        }
                        let (a, b) = (block(i, 1), block(j, k - 1));
                        for x in 0..n_x {
                            acc[x] = acc[x] + a[x] * b[x];
                        }
                    }
                }
            });
    }
}

/// Writes `r_alpha = sum_{k=2}^{|alpha|} Phi^{(k)}(u_0)/k! * P_k[alpha]` into `out`.
pub fn remainder_from_powers<T: Real>(
    taylor: &TaylorTable<T>,
    powers: &DeflatedPowers<T>,
    ordinal: usize,
    out: &mut [T],
) {
    out.fill(T::zero());
    let order = powers.set.order_of(ordinal);
    for k in 2..=order {
        let (d, p) = (taylor.row(k), powers.power(k, ordinal));
        for x in 0..out.len() {
            out[x] = out[x] + d[x] * p[x];
        }
    }
}

/// The part of `(Phi^(u))_alpha` built from strictly lower coefficients.
/// Zero for `|alpha| = 1`.
pub fn remainder<T: Real>(
    phi: &dyn AnalyticFunction<T>,
    u: &ChaosField<T>,
    alpha: &MultiIndex,
) -> Result<Vec<T>> {
    let set = u.index_set();
    let ordinal = set
        .position(alpha)
        .ok_or_else(|| Error::InvalidArgument(format!("{alpha} not in index set")))?;
    let order = alpha.order() as usize;
    if order == 0 {
        return Err(Error::InvalidArgument(
            "remainder needs |alpha| >= 1".into(),
        ));
    }
    let mut out = vec![T::zero(); u.n_x()];
    if order == 1 {
        return Ok(out);
    }
    let taylor = TaylorTable::new(phi, u.coeff(0), order);
    let mut powers = DeflatedPowers::new(set.clone(), u.n_x());
    for grade in 1..=order {
        for ord in set.grade(grade) {
            powers.set_first_power(ord, u.coeff(ord));
        }
        powers.fill_higher_powers(grade);
    }
    remainder_from_powers(&taylor, &powers, ordinal, &mut out);
    Ok(out)
}

/// `Phi^(u)` through `Phi(u_0) H_0 + sum (Phi'(u_0) u_alpha + r_alpha) H_alpha`.
/// Exact on the truncated set.
pub fn wick_analytic<T: Real>(phi: &dyn AnalyticFunction<T>, u: &ChaosField<T>) -> ChaosField<T> {
    let set = u.index_set().clone();
    let n_x = u.n_x();
    let taylor = TaylorTable::new(phi, u.coeff(0), set.max_order().max(1));
    let powers = DeflatedPowers::from_field(u);
    let mut out = ChaosField::zeros(set.clone(), n_x);
    out.coeff_mut(0).copy_from_slice(taylor.row(0));
    let mut r = vec![T::zero(); n_x];
    for ord in 1..set.len() {
        remainder_from_powers(&taylor, &powers, ord, &mut r);
        let (d1, ua) = (taylor.row(1), u.coeff(ord));
        for (x, o) in out.coeff_mut(ord).iter_mut().enumerate() {
            *o = d1[x] * ua[x] + r[x];
        }
    }
    out
}

/// Result of the direct series route.
#[derive(Clone, Debug)]
pub struct DirectSeries<T> {
    pub field: ChaosField<T>,
    /// `sum_{n > n_max} |a_n| M^n` with `M` the max-norm of `u_0`; `+inf`
    /// when the series does not visibly converge.
    pub tail_bound: f64,
}

/// `sum_{n=0}^{n_max} a_n u^{<>n}` from the Taylor coefficients at zero.
pub fn wick_analytic_direct<T: Real>(
    phi: &dyn AnalyticFunction<T>,
    u: &ChaosField<T>,
    n_max: usize,
) -> Result<DirectSeries<T>> {
    let coeffs: Vec<T> = (0..=n_max)
        .map(|n| phi.taylor_coeff(n))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::MissingCoefficients(phi.name().to_string()))?;

    let mut acc = ChaosField::zeros(u.index_set().clone(), u.n_x());
    let mut power = ChaosField::unit(u.index_set().clone(), u.n_x());
    for (n, &a) in coeffs.iter().enumerate() {
        if n > 0 {
            power = wick_product(&power, u)?;
        }
        if !a.is_zero() {
            for (o, &p) in acc.data_mut().iter_mut().zip(power.data()) {
                *o = *o + a * p;
            }
        }
    }

    let m = max_norm(u.coeff(0)).as_f64();
    let tail_bound = series_tail(phi, n_max, m);
    Ok(DirectSeries {
        field: acc,
        tail_bound,
    })
}

fn series_tail<T: Real>(phi: &dyn AnalyticFunction<T>, n_max: usize, m: f64) -> f64 {
    const WINDOW: usize = 8;
    const MAX_TERMS: usize = 4000;
    let mut sum = 0.0;
    let mut recent = [0.0f64; WINDOW];
    for (step, n) in (n_max + 1..n_max + 1 + MAX_TERMS).enumerate() {
        let a = phi
            .taylor_coeff(n)
            .map(|c| c.as_f64().abs())
            .unwrap_or(f64::INFINITY);
        let term = if a == 0.0 { 0.0 } else { a * m.powi(n as i32) };
        if !term.is_finite() {
            return f64::INFINITY;
        }
        sum += term;
        recent[step % WINDOW] = term;
        if step >= WINDOW && recent.iter().cloned().fold(0.0, f64::max) <= 1e-17 * sum {
            return sum;
        }
    }
    f64::INFINITY
}
