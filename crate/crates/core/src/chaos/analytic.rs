//! Analytic nonlinearities `Phi`, given by their derivatives.
//!
//! The derivative-plus-remainder form of `Phi^(u)` needs `Phi^{(k)}` at the
//! pointwise values of the expectation, so every function is supplied as
//! a derivative evaluator. Taylor coefficients at zero are optional and
//! only used by the direct series route.

use std::fmt::Debug;

use crate::scalar::Real;

pub trait AnalyticFunction<T: Real>: Send + Sync + Debug {
    fn name(&self) -> &str;

    /// `Phi^{(k)}(x)`.
    fn derivative(&self, k: usize, x: T) -> T;

    /// An upper bound for `sup |Phi^{(k)}|` on `[-m, m]`; `+inf` when none
    /// is available (outside the radius of validity, say).
    fn majorant(&self, k: usize, m: T) -> T;

    /// Taylor coefficient `a_n` at zero.
    fn taylor_coeff(&self, _n: usize) -> Option<T> {
        None
    }

    /// Radius of the disc where the Taylor series at zero converges, when
    /// `Phi` is not entire.
    fn radius(&self) -> Option<T> {
        None
    }

    fn value(&self, x: T) -> T {
        self.derivative(0, x)
    }
}

pub(crate) fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, j| acc * T::lit(j as f64))
}

/// `Phi(x) = sum_n a_n x^n` with finitely many terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    name: String,
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(name: impl Into<String>, coeffs: Vec<T>) -> Self {
        Polynomial {
            name: name.into(),
            coeffs,
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", Vec::new())
    }

    pub fn constant(c: T) -> Self {
        Self::new("constant", vec![c])
    }

    pub fn identity() -> Self {
        Self::new("identity", vec![T::zero(), T::one()])
    }

    /// `a0 + a1 x`.
    pub fn affine(a0: T, a1: T) -> Self {
        Self::new("affine", vec![a0, a1])
    }

    /// `u - u^2`.
    pub fn fisher_kpp() -> Self {
        Self::new("fisher_kpp", vec![T::zero(), T::one(), -T::one()])
    }

    /// `u - u^3`.
    pub fn allen_cahn() -> Self {
        Self::new(
            "allen_cahn",
            vec![T::zero(), T::one(), T::zero(), -T::one()],
        )
    }

    /// `a u - b u^n`.
    pub fn newell_whitehead_segel(a: T, b: T, n: usize) -> Self {
        let mut c = vec![T::zero(); n.max(1) + 1];
        c[1] = c[1] + a;
        c[n] = c[n] - b;
        Self::new("newell_whitehead_segel", c)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }
}

impl<T: Real> AnalyticFunction<T> for Polynomial<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn derivative(&self, k: usize, x: T) -> T {
        // Horner on sum_{n>=k} a_n n!/(n-k)! x^{n-k}
        let mut acc = T::zero();
        for n in (k..self.coeffs.len()).rev() {
            let falling = (n - k + 1..=n).fold(T::one(), |f, j| f * T::lit(j as f64));
            acc = acc * x + self.coeffs[n] * falling;
        }
        acc
    }

    fn majorant(&self, k: usize, m: T) -> T {
        let m = m.abs();
        let mut acc = T::zero();
        for n in (k..self.coeffs.len()).rev() {
            let falling = (n - k + 1..=n).fold(T::one(), |f, j| f * T::lit(j as f64));
            acc = acc * m + self.coeffs[n].abs() * falling;
        }
        acc
    }

    fn taylor_coeff(&self, n: usize) -> Option<T> {
        Some(self.coeffs.get(n).copied().unwrap_or_else(T::zero))
    }
}

/// `Phi(x) = a + b e^x`; the Fujita-Gelfand nonlinearity is `a = 2, b = -2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFamily<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> ExpFamily<T> {
    pub fn new(a: T, b: T) -> Self {
        ExpFamily { a, b }
    }

    pub fn exp() -> Self {
        Self::new(T::zero(), T::one())
    }

    pub fn fujita_gelfand() -> Self {
        Self::new(T::lit(2.0), T::lit(-2.0))
    }
}

impl<T: Real> AnalyticFunction<T> for ExpFamily<T> {
    fn name(&self) -> &str {
        "exp_family"
    }

    fn derivative(&self, k: usize, x: T) -> T {
        if k == 0 {
            self.a + self.b * x.exp()
        } else {
            self.b * x.exp()
        }
    }

    fn majorant(&self, k: usize, m: T) -> T {
        let e = m.abs().exp();
        if k == 0 {
            self.a.abs() + self.b.abs() * e
        } else {
            self.b.abs() * e
        }
    }

    fn taylor_coeff(&self, n: usize) -> Option<T> {
        Some(if n == 0 {
            self.a + self.b
        } else {
            self.b / factorial::<T>(n)
        })
    }
}

/// `Phi(x) = ln(1 + x)`. Not entire: the series at zero converges only for
/// `|x| < 1`, and the function itself needs `x > -1`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Log1p;

impl<T: Real> AnalyticFunction<T> for Log1p {
    fn name(&self) -> &str {
        "log1p"
    }

    fn derivative(&self, k: usize, x: T) -> T {
        if k == 0 {
            return x.ln_1p();
        }
        let sign = if k % 2 == 1 { T::one() } else { -T::one() };
        sign * factorial::<T>(k - 1) / (T::one() + x).powi(k as i32)
    }

    fn majorant(&self, k: usize, m: T) -> T {
        let m = m.abs();
        if m >= T::one() {
            return T::infinity();
        }
        if k == 0 {
            -(-m).ln_1p()
        } else {
            factorial::<T>(k - 1) / (T::one() - m).powi(k as i32)
        }
    }

    fn taylor_coeff(&self, n: usize) -> Option<T> {
        Some(if n == 0 {
            T::zero()
        } else {
            let sign = if n % 2 == 1 { T::one() } else { -T::one() };
            sign / T::lit(n as f64)
        })
    }

    fn radius(&self) -> Option<T> {
        Some(T::one())
    }
}

/// `Phi(x) = cos x + cosh x = 2 sum_n x^{4n} / (4n)!`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CosCosh;

impl<T: Real> AnalyticFunction<T> for CosCosh {
    fn name(&self) -> &str {
        "coscosh"
    }

    fn derivative(&self, k: usize, x: T) -> T {
        let trig = match k % 4 {
            0 => x.cos(),
            1 => -x.sin(),
            2 => -x.cos(),
            _ => x.sin(),
        };
        let hyp = if k.is_multiple_of(2) {
            x.cosh()
        } else {
            x.sinh()
        };
        trig + hyp
    }

    fn majorant(&self, _k: usize, m: T) -> T {
        T::one() + m.abs().cosh()
    }

    fn taylor_coeff(&self, n: usize) -> Option<T> {
        Some(if n.is_multiple_of(4) {
            T::lit(2.0) / factorial::<T>(n)
        } else {
            T::zero()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builtins() -> Vec<Box<dyn AnalyticFunction<f64>>> {
        vec![
            Box::new(Polynomial::new("cubic", vec![0.3, -1.0, 0.5, 2.0])),
            Box::new(Polynomial::<f64>::fisher_kpp()),
            Box::new(Polynomial::<f64>::allen_cahn()),
            Box::new(Polynomial::<f64>::newell_whitehead_segel(1.5, 0.5, 4)),
            Box::new(ExpFamily::<f64>::fujita_gelfand()),
            Box::new(ExpFamily::<f64>::exp()),
            Box::new(Log1p),
            Box::new(CosCosh),
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for phi in builtins() {
            for k in 1..=5 {
                for &x in &[-0.7, -0.2, 0.0, 0.4, 0.9] {
                    let fd =
                        (phi.derivative(k - 1, x + h) - phi.derivative(k - 1, x - h)) / (2.0 * h);
                    let d = phi.derivative(k, x);
                    let err = (fd - d).abs() / d.abs().max(1.0);
                    assert!(err <= 1e-6, "{} k={k} x={x}: {d} vs {fd}", phi.name());
                }
            }
        }
    }

    #[test]
    fn majorants_dominate_on_grid() {
        for phi in builtins() {
            for &m in &[0.25, 0.5, 0.9] {
                for k in 0..=6 {
                    let bound = phi.majorant(k, m);
                    let sup = (0..101)
                        .map(|i| -m + 2.0 * m * i as f64 / 100.0)
                        .map(|x| phi.derivative(k, x).abs())
                        .fold(0.0, f64::max);
                    assert!(bound >= sup * (1.0 - 1e-12), "{} k={k} m={m}", phi.name());
                }
            }
        }
        assert!(<Log1p as AnalyticFunction<f64>>::majorant(&Log1p, 2, 1.5).is_infinite());
    }

    #[test]
    fn taylor_coefficients_match_derivatives_at_zero() {
        for phi in builtins() {
            for n in 0..=8 {
                let a = phi.taylor_coeff(n).unwrap();
                let d = phi.derivative(n, 0.0) / factorial::<f64>(n);
                assert!(
                    (a - d).abs() <= 1e-14 * d.abs().max(1.0),
                    "{} n={n}",
                    phi.name()
                );
            }
        }
    }

    #[test]
    fn polynomial_presets() {
        let p = Polynomial::<f64>::newell_whitehead_segel(2.0, 3.0, 3);
        assert_eq!(p.coeffs(), &[0.0, 2.0, 0.0, -3.0]);
        assert_eq!(Polynomial::<f64>::zero().degree(), None);
        assert_eq!(Polynomial::<f64>::zero().derivative(0, 3.0), 0.0);
        assert_eq!(Polynomial::<f64>::identity().derivative(2, 3.0), 0.0);
        assert_eq!(Polynomial::affine(1.0, 2.0).value(3.0), 7.0);
    }

    #[test]
    fn f32_evaluation() {
        let phi = ExpFamily::<f32>::fujita_gelfand();
        assert!((phi.value(0.0f32)).abs() < 1e-6);
        assert!((phi.derivative(3, 0.0f32) + 2.0).abs() < 1e-6);
    }
}
