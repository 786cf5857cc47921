use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::scalar::{Coeff, Real};

/// One time slice of a chaos expansion: a grid function for every index of
/// the truncated set, stored densely by ordinal. Ordinal 0 is the
/// expectation coefficient.
#[derive(Clone, Debug)]
pub struct ChaosField<T> {
    index_set: Arc<IndexSet>,
    n_x: usize,
    data: Vec<T>,
}

impl<T: Coeff> ChaosField<T> {
    pub fn zeros(index_set: Arc<IndexSet>, n_x: usize) -> Self {
        let data = vec![T::zero(); index_set.len() * n_x];
        ChaosField {
            index_set,
            n_x,
            data,
        }
    }

    /// The Wick unit: `1` in the expectation slot, zero elsewhere.
    pub fn unit(index_set: Arc<IndexSet>, n_x: usize) -> Self {
        let mut f = Self::zeros(index_set, n_x);
        f.coeff_mut(0).fill(T::one());
        f
    }

    /// Builds a field from `value(ordinal, alpha, grid_point)`.
    pub fn from_fn(
        index_set: Arc<IndexSet>,
        n_x: usize,
        mut value: impl FnMut(usize, &MultiIndex, usize) -> T,
    ) -> Self {
        let mut data = Vec::with_capacity(index_set.len() * n_x);
        for (ord, alpha) in index_set.indices().iter().enumerate() {
            for i in 0..n_x {
                data.push(value(ord, alpha, i));
            }
        }
        ChaosField {
            index_set,
            n_x,
            data,
        }
    }

    pub fn index_set(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    /// Grid length of every coefficient.
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Number of coefficients.
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn coeff(&self, ordinal: usize) -> &[T] {
        &self.data[ordinal * self.n_x..(ordinal + 1) * self.n_x]
    }

    pub fn coeff_mut(&mut self, ordinal: usize) -> &mut [T] {
        &mut self.data[ordinal * self.n_x..(ordinal + 1) * self.n_x]
    }

    pub fn coeff_of(&self, alpha: &MultiIndex) -> Option<&[T]> {
        self.index_set.position(alpha).map(|o| self.coeff(o))
    }

    pub fn set_coeff(&mut self, alpha: &MultiIndex, values: &[T]) -> Result<()> {
        let ord = self
            .index_set
            .position(alpha)
            .ok_or_else(|| Error::InvalidArgument(format!("{alpha} not in index set")))?;
        if values.len() != self.n_x {
            return Err(Error::ShapeMismatch(format!(
                "coefficient has length {}, field grid has {}",
                values.len(),
                self.n_x
            )));
        }
        self.coeff_mut(ord).copy_from_slice(values);
        Ok(())
    }

    /// Fills the coefficient at `alpha` with a constant.
    pub fn fill_coeff(&mut self, alpha: &MultiIndex, value: T) -> Result<()> {
        let ord = self
            .index_set
            .position(alpha)
            .ok_or_else(|| Error::InvalidArgument(format!("{alpha} not in index set")))?;
        self.coeff_mut(ord).fill(value);
        Ok(())
    }

    /// Flat storage, ordinal-major.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter_coeffs(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n_x.max(1)).take(self.len())
    }

    pub fn check_same_shape(&self, other: &ChaosField<T>) -> Result<()> {
        let (a, b) = (&self.index_set, &other.index_set);
        let same_set =
            Arc::ptr_eq(a, b) || (a.modes() == b.modes() && a.max_order() == b.max_order());
        if !same_set {
            return Err(Error::ShapeMismatch(format!(
                "index sets differ: (K={}, N={}) vs (K={}, N={})",
                a.modes(),
                a.max_order(),
                b.modes(),
                b.max_order()
            )));
        }
        if self.n_x != other.n_x {
            return Err(Error::ShapeMismatch(format!(
                "grid lengths differ: {} vs {}",
                self.n_x, other.n_x
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChaosField<T>) -> Result<ChaosField<T>> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ChaosField<T>) -> Result<ChaosField<T>> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> ChaosField<T> {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> ChaosField<T> {
        ChaosField {
            index_set: self.index_set.clone(),
            n_x: self.n_x,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &ChaosField<T>, f: impl Fn(T, T) -> T) -> Result<ChaosField<T>> {
        self.check_same_shape(other)?;
        Ok(ChaosField {
            index_set: self.index_set.clone(),
            n_x: self.n_x,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Keeps only the listed grid points, in the given order.
    pub fn select_points(&self, points: &[usize]) -> ChaosField<T> {
        let mut data = Vec::with_capacity(self.len() * points.len());
        for c in self.iter_coeffs() {
            data.extend(points.iter().map(|&i| c[i]));
        }
        ChaosField {
            index_set: self.index_set.clone(),
            n_x: points.len(),
            data,
        }
    }
}

impl<T: Real> ChaosField<T> {
    /// Largest absolute coefficient difference over all slots and points.
    pub fn max_abs_diff(&self, other: &ChaosField<T>) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    /// Max-norm of one coefficient.
    pub fn coeff_max_norm(&self, ordinal: usize) -> T {
        max_norm(self.coeff(ordinal))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn max_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}
