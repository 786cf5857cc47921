//! Weighted norms, growth certificates, moments and pathwise sampling.
//!
//! The squared norm of a field in the weighted scale is
//!
//! ```text
//! sum_alpha  alpha! |u_alpha|^2 / ( (r^{|alpha|^3})! (2N)^{p alpha} )
//! ```
//!
//! with `|u_alpha|` a spatial norm of the coefficient. Every weight is kept
//! as a logarithm and the sum is accumulated with log-sum-exp.

use crate::chaos::{max_norm, ChaosField};
use crate::error::{Error, Result};
use crate::multiindex::{
    log_factorial, log_superfactorial_weight, log_two_n_pow, IndexSet, MultiIndex,
};
use crate::scalar::Real;

/// Spatial norm applied to each coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SpatialNorm {
    /// Grid max-norm.
    #[default]
    Max,
    /// Trapezoidal `L^2` norm for the given grid spacing.
    L2 { spacing: f64 },
}

impl SpatialNorm {
    pub fn eval<T: Real>(&self, v: &[T]) -> f64 {
        match *self {
            SpatialNorm::Max => max_norm(v).as_f64(),
            SpatialNorm::L2 { spacing } => {
                let n = v.len();
                let sq: f64 = v
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let x = x.as_f64();
                        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                        w * x * x
                    })
                    .sum();
                (spacing * sq).sqrt()
            }
        }
    }
}

/// `ln(sum exp(x_i))`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(alpha! / ((r^{|alpha|^3})! (2N)^{p alpha}))`.
pub fn log_weight(alpha: &MultiIndex, r: f64, p: f64) -> f64 {
    (log_factorial(alpha) - log_superfactorial_weight(alpha, r) - log_two_n_pow(alpha, p)).ln()
}

fn check_rp(r: f64, p: f64) -> Result<()> {
    if !(r >= 2.0) || !(p >= 0.0) || !r.is_finite() || !p.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need r >= 2 and p >= 0, got r = {r}, p = {p}"
        )));
    }
    Ok(())
}

/// Log of every weighted term, by ordinal (`-inf` for zero coefficients).
pub fn log_terms<T: Real>(
    field: &ChaosField<T>,
    r: f64,
    p: f64,
    norm: SpatialNorm,
) -> Result<Vec<f64>> {
    check_rp(r, p)?;
    Ok(field
        .index_set()
        .indices()
        .iter()
        .enumerate()
        .map(|(ord, alpha)| {
            let n = norm.eval(field.coeff(ord));
            if n == 0.0 {
                f64::NEG_INFINITY
            } else {
                log_weight(alpha, r, p) + 2.0 * n.ln()
            }
        })
        .collect())
}

/// Log of the squared weighted norm with the max-norm in space.
pub fn fs_norm<T: Real>(field: &ChaosField<T>, r: f64, p: f64) -> Result<f64> {
    fs_norm_with(field, r, p, SpatialNorm::Max)
}

pub fn fs_norm_with<T: Real>(
    field: &ChaosField<T>,
    r: f64,
    p: f64,
    norm: SpatialNorm,
) -> Result<f64> {
    Ok(log_sum_exp(log_terms(field, r, p, norm)?))
}

/// Contributions of each grade to the squared norm.
#[derive(Clone, Debug, PartialEq)]
pub struct GradeTail {
    /// `ln c_l` for `l = 0..=N`.
    pub log_contributions: Vec<f64>,
    /// `ln(c_0 + ... + c_l)`.
    pub log_partial_sums: Vec<f64>,
    pub log_total: f64,
    /// `c_N / sum c_l`, zero for a zero field.
    pub top_share: f64,
}

impl GradeTail {
    pub fn contributions(&self) -> Vec<f64> {
        self.log_contributions.iter().map(|c| c.exp()).collect()
    }
}

pub fn tail_by_grade<T: Real>(field: &ChaosField<T>, r: f64, p: f64) -> Result<GradeTail> {
    tail_by_grade_with(field, r, p, SpatialNorm::Max)
}

pub fn tail_by_grade_with<T: Real>(
    field: &ChaosField<T>,
    r: f64,
    p: f64,
    norm: SpatialNorm,
) -> Result<GradeTail> {
    let terms = log_terms(field, r, p, norm)?;
    let set = field.index_set();
    let log_contributions: Vec<f64> = (0..=set.max_order())
        .map(|l| log_sum_exp(set.grade(l).map(|o| terms[o])))
        .collect();
    let mut log_partial_sums = Vec::with_capacity(log_contributions.len());
    let mut acc = f64::NEG_INFINITY;
    for &c in &log_contributions {
        acc = log_sum_exp([acc, c]);
        log_partial_sums.push(acc);
    }
    let log_total = acc;
    let top = *log_contributions.last().expect("grade 0 always exists");
    let top_share = if log_total == f64::NEG_INFINITY {
        0.0
    } else {
        (top - log_total).exp()
    };
    Ok(GradeTail {
        log_contributions,
        log_partial_sums,
        log_total,
        top_share,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub r: f64,
    pub p: f64,
    pub log_norm: f64,
    pub tail: GradeTail,
    pub norm: SpatialNorm,
}

pub fn norm_report<T: Real>(
    field: &ChaosField<T>,
    pairs: &[(f64, f64)],
    norm: SpatialNorm,
) -> Result<Vec<NormReport>> {
    pairs
        .iter()
        .map(|&(r, p)| {
            let tail = tail_by_grade_with(field, r, p, norm)?;
            Ok(NormReport {
                r,
                p,
                log_norm: tail.log_total,
                tail,
                norm,
            })
        })
        .collect()
}

/// Candidate `r_0` values for the growth certificate, searched in order.
pub const CERT_R: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];
/// Candidate `p_0` values for the growth certificate, searched in order.
pub const CERT_P: [f64; 5] = [0.0, 1.0, 2.0, 3.0, 4.0];

/// `ln(alpha! (2N)^{p alpha} (r^{|alpha|^3})!)`.
pub fn log_growth_bound(alpha: &MultiIndex, r: f64, p: f64) -> f64 {
    (log_factorial(alpha) + log_two_n_pow(alpha, p) + log_superfactorial_weight(alpha, r)).ln()
}

/// The first `(r_0, p_0)` on the candidate grid, ordered by `r_0` then
/// `p_0`, with `L_alpha <= alpha! (2N)^{p_0 alpha} (r_0^{|alpha|^3})!` for
/// every `|alpha| >= 1`.
pub fn sup_bound_certificate<T: Real>(set: &IndexSet, sup_table: &[T]) -> Option<(f64, f64)> {
    CERT_R.iter().find_map(|&r| {
        CERT_P
            .iter()
            .find(|&&p| {
                set.indices()
                    .iter()
                    .zip(sup_table)
                    .skip(1)
                    .all(|(alpha, &l)| {
                        let l = l.as_f64();
                        l == 0.0 || l.ln() <= log_growth_bound(alpha, r, p)
                    })
            })
            .map(|&p| (r, p))
    })
}

/// Mean and variance of the random field, pointwise on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentField<T> {
    pub mean: Vec<T>,
    pub variance: Vec<T>,
}

fn exact_factorial(alpha: &MultiIndex) -> f64 {
    alpha
        .entries()
        .iter()
        .map(|&a| (1..=a).map(f64::from).product::<f64>())
        .product()
}

/// `mean = u_0`, `variance = sum_{alpha > 0} alpha! u_alpha^2`.
pub fn moments<T: Real>(field: &ChaosField<T>) -> MomentField<T> {
    let n_x = field.n_x();
    let mean = field.coeff(0).to_vec();
    let mut variance = vec![T::zero(); n_x];
    for (ord, alpha) in field.index_set().indices().iter().enumerate().skip(1) {
        let w = T::lit(exact_factorial(alpha));
        for (v, &u) in variance.iter_mut().zip(field.coeff(ord)) {
            *v = *v + w * u * u;
        }
    }
    for v in &mut variance {
        *v = v.max(T::zero());
    }
    MomentField { mean, variance }
}

/// Probabilists' Hermite polynomial `h_n(x)`.
pub fn hermite_poly<T: Real>(n: usize, x: T) -> T {
    let (mut prev, mut cur) = (T::one(), x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - T::lit(k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `[h_0(x), ..., h_n(x)]`.
pub fn hermite_table<T: Real>(n: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    if n >= 1 {
        out.push(x);
    }
    for k in 1..n {
        let next = x * out[k] - T::lit(k as f64) * out[k - 1];
        out.push(next);
    }
    out
}

/// The `k`-th Hermite function (`k >= 1`), normalised in `L^2(R)`:
/// `xi_k(t) = pi^{-1/4} (2^{k-1} (k-1)!)^{-1/2} e^{-t^2/2} H_{k-1}(t)` with
/// `H` the physicists' polynomial.
pub fn hermite_function<T: Real>(k: usize, t: T) -> T {
    assert!(k >= 1, "Hermite functions are numbered from 1");
    let two = T::lit(2.0);
    let mut prev = T::zero();
    let mut cur = T::PI().powf(T::lit(-0.25)) * (-t * t / two).exp();
    for n in 0..k - 1 {
        let nf = T::lit(n as f64);
        let next = (two / (nf + T::one())).sqrt() * t * cur - (nf / (nf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `sum_alpha u_alpha prod_n h_{alpha_n}(g_n)` on the grid.
pub fn sample_realization<T: Real>(field: &ChaosField<T>, gaussians: &[T]) -> Result<Vec<T>> {
    let set = field.index_set();
    if gaussians.len() != set.modes() {
        return Err(Error::ShapeMismatch(format!(
            "{} Gaussian values for {} modes",
            gaussians.len(),
            set.modes()
        )));
    }
    let tables: Vec<Vec<T>> = gaussians
        .iter()
        .map(|&g| hermite_table(set.max_order(), g))
        .collect();
    let mut out = vec![T::zero(); field.n_x()];
    for (ord, alpha) in set.indices().iter().enumerate() {
        let w = alpha
            .entries()
            .iter()
            .zip(&tables)
            .fold(T::one(), |acc, (&a, tab)| acc * tab[a as usize]);
        if w.is_zero() {
            continue;
        }
        for (o, &u) in out.iter_mut().zip(field.coeff(ord)) {
            *o = *o + w * u;
        }
    }
    Ok(out)
}
