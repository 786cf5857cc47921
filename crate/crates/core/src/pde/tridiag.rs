//! Thomas algorithm and its cyclic (Sherman-Morrison) variant.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_pivot<T: Real>(row: usize, pivot: T, scale: T) -> Result<()> {
    if !pivot.is_finite() || pivot.abs() <= T::epsilon() * T::lit(64.0) * scale.max(T::one()) {
        return Err(Error::Singular {
            row,
            pivot: pivot.as_f64(),
        });
    }
    Ok(())
}

/// Solves `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal<T: Real>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    check_pivot(0, diag[0], diag[0].abs() + sup[0].abs())?;
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let pivot = diag[i] - sub[i] * c[i - 1];
        check_pivot(i, pivot, diag[i].abs() + sub[i].abs() + sup[i].abs())?;
        c[i] = sup[i] / pivot;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    Ok(d)
}

/// Cyclic system: as [`solve_tridiagonal`] plus the corner entries
/// `sub[0]` (row 0, column n-1) and `sup[n-1]` (row n-1, column 0).
pub fn solve_cyclic_tridiagonal<T: Real>(
    sub: &[T],
    diag: &[T],
    sup: &[T],
    rhs: &[T],
) -> Result<Vec<T>> {
    let n = diag.len();
    assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    assert!(n >= 3, "cyclic solve needs at least 3 unknowns");
    let top_right = sub[0];
    let bottom_left = sup[n - 1];
    let gamma = -diag[0];
    check_pivot(0, gamma, diag[0].abs())?;

    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - bottom_left * top_right / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs)?;

    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = bottom_left;
    let z = solve_tridiagonal(sub, &bb, sup, &u)?;

    let denom = T::one() + z[0] + top_right * z[n - 1] / gamma;
    check_pivot(n, denom, T::one())?;
    let fact = (x[0] + top_right * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64], cyclic: bool) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += sub[i] * x[i - 1];
                } else if cyclic {
                    v += sub[0] * x[n - 1];
                }
                if i + 1 < n {
                    v += sup[i] * x[i + 1];
                } else if cyclic {
                    v += sup[n - 1] * x[0];
                }
                v
            })
            .collect()
    }

    fn system() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(-1.0f64..1.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn residual_small_for_dominant_systems((sub, off, sup, rhs) in system()) {
            // strictly diagonally dominant: |d| >= |a| + |c| + margin
            let diag: Vec<f64> = off.iter().zip(&sub).zip(&sup)
                .map(|((o, a), c)| (2.1 + o.abs()) * if *o < 0.0 { -1.0 } else { 1.0 } * (a.abs() + c.abs()).max(1.0))
                .collect();
            let bnorm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for cyclic in [false, true] {
                let x = if cyclic {
                    solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs).unwrap()
                } else {
                    solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap()
                };
                let ax = apply(&sub, &diag, &sup, &x, cyclic);
                let res = ax.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                prop_assert!(res <= 1e-10 * bnorm.max(1e-300));
            }
        }
    }

    #[test]
    fn singular_system_is_reported() {
        let z = vec![0.0; 4];
        let err = solve_tridiagonal(&z, &[1.0, 0.0, 1.0, 1.0], &z, &[1.0; 4]).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 1, .. }));
    }
}
