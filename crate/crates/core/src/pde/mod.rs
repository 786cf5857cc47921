//! One-dimensional finite differences and Crank-Nicolson time stepping.
//!
//! The generator is `A = nu * d^2/dx^2 + c`. A step of the linear
//! equations solves
//!
//! ```text
//! (I - dt/2 L_{t+dt}) w = (I + dt/2 L_t) u + dt * source
//! ```
//!
//! with `L = A + diag(d)`, where `d` is a pointwise multiplication
//! operator. The zeroth (nonlinear) equation uses the same implicit
//! diffusion with an explicit Heun predictor-corrector for `Phi(u) + f`.

mod tridiag;

pub use tridiag::{solve_cyclic_tridiagonal, solve_tridiagonal};

use crate::chaos::AnalyticFunction;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Values above this magnitude abort a run as a blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// The last grid point is identified with the first.
    Periodic,
    /// Both end points are pinned to time-dependent boundary data.
    Dirichlet,
    /// Zero flux, by mirroring the first interior neighbour.
    Neumann,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Dirichlet values `g(t, side)`.
pub trait BoundaryData<T>: Send + Sync {
    fn value(&self, t: T, side: Side) -> T;
}

/// Boundary data for grids that do not use it.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoBoundaryData;

impl<T: Real> BoundaryData<T> for NoBoundaryData {
    fn value(&self, _t: T, _side: Side) -> T {
        T::zero()
    }
}

/// Boundary data from a closure.
pub struct FnBoundary<F>(pub F);

impl<T, F> BoundaryData<T> for FnBoundary<F>
where
    F: Fn(T, Side) -> T + Send + Sync,
{
    fn value(&self, t: T, side: Side) -> T {
        (self.0)(t, side)
    }
}

/// Edge treatment for one equation.
#[derive(Clone, Copy)]
pub enum Edge<'a, T> {
    Periodic,
    Neumann,
    Dirichlet(&'a dyn BoundaryData<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_x: usize,
    pub bc: BoundaryKind,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n_x: usize, bc: BoundaryKind) -> Result<Self> {
        if n_x < 8 {
            return Err(Error::InvalidArgument(format!(
                "grid needs n_x >= 8, got {n_x}"
            )));
        }
        if !(x_max > x_min) {
            return Err(Error::InvalidArgument("grid needs x_max > x_min".into()));
        }
        Ok(Grid1D {
            x_min,
            x_max,
            n_x,
            bc,
        })
    }

    pub fn spacing(&self) -> T {
        (self.x_max - self.x_min) / T::lit((self.n_x - 1) as f64)
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min + self.spacing() * T::lit(i as f64)
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    /// The grid's own edge treatment, with `bdata` used for Dirichlet.
    pub fn edge<'a>(&self, bdata: &'a dyn BoundaryData<T>) -> Edge<'a, T> {
        match self.bc {
            BoundaryKind::Periodic => Edge::Periodic,
            BoundaryKind::Neumann => Edge::Neumann,
            BoundaryKind::Dirichlet => Edge::Dirichlet(bdata),
        }
    }
}

/// `nu` and `c` in `A = nu * Laplacian + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearOperatorSpec<T> {
    pub diffusion: T,
    pub reaction_const: T,
}

impl<T: Real> LinearOperatorSpec<T> {
    pub fn new(diffusion: T, reaction_const: T) -> Result<Self> {
        if diffusion < T::zero() {
            return Err(Error::InvalidArgument(
                "diffusion must be non-negative".into(),
            ));
        }
        Ok(LinearOperatorSpec {
            diffusion,
            reaction_const,
        })
    }

    pub fn heat(diffusion: T) -> Self {
        LinearOperatorSpec {
            diffusion,
            reaction_const: T::zero(),
        }
    }
}

fn check_len<T>(what: &str, v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{what} has length {}, grid has {n}",
            v.len()
        )));
    }
    Ok(())
}

/// Second-order central differences `(u[i-1] - 2u[i] + u[i+1]) / h^2`.
///
/// Periodic grids wrap (and repeat the first value in the last slot),
/// Neumann grids mirror, Dirichlet grids take the neighbours of the end
/// points from the boundary data at time `t` and report zero on the pinned
/// end points themselves.
pub fn laplacian<T: Real>(
    field: &[T],
    grid: &Grid1D<T>,
    edge: Edge<'_, T>,
    t: T,
) -> Result<Vec<T>> {
    let n = grid.n_x;
    check_len("field", field, n)?;
    let inv_h2 = T::one() / (grid.spacing() * grid.spacing());
    let two = T::lit(2.0);
    let mut out = vec![T::zero(); n];
    match edge {
        Edge::Periodic => {
            let m = n - 1;
            for i in 0..m {
                let (l, r) = (field[(i + m - 1) % m], field[(i + 1) % m]);
                out[i] = (l - two * field[i] + r) * inv_h2;
            }
            out[m] = out[0];
        }
        Edge::Neumann => {
            for i in 0..n {
                let l = if i == 0 { field[1] } else { field[i - 1] };
                let r = if i == n - 1 {
                    field[n - 2]
                } else {
                    field[i + 1]
                };
                out[i] = (l - two * field[i] + r) * inv_h2;
            }
        }
        Edge::Dirichlet(bd) => {
            let (gl, gr) = (bd.value(t, Side::Left), bd.value(t, Side::Right));
            for i in 1..n - 1 {
                let l = if i == 1 { gl } else { field[i - 1] };
                let r = if i == n - 2 { gr } else { field[i + 1] };
                out[i] = (l - two * field[i] + r) * inv_h2;
            }
        }
    }
    Ok(out)
}

/// One Crank-Nicolson step of `u' = (nu Lap + c + diag) u + source`.
///
/// `diag` is held fixed over the step (callers pass its midpoint value) and
/// `source` is the midpoint source.
#[allow(clippy::too_many_arguments)]
pub fn imex_step<T: Real>(
    state: &[T],
    t: T,
    dt: T,
    diag: &[T],
    source: &[T],
    spec: &LinearOperatorSpec<T>,
    grid: &Grid1D<T>,
    edge: Edge<'_, T>,
) -> Result<Vec<T>> {
    let n = grid.n_x;
    check_len("state", state, n)?;
    check_len("diag", diag, n)?;
    check_len("source", source, n)?;
    if dt < T::zero() || !dt.is_finite() {
        return Err(Error::InvalidArgument(
            "time step must be finite and >= 0".into(),
        ));
    }
    let h = grid.spacing();
    let s = spec.diffusion / (h * h);
    let half = dt / T::lit(2.0);
    let two = T::lit(2.0);
    let c = spec.reaction_const;

    // unknown rows [lo, hi) and their neighbour values at time t
    let (lo, hi) = match edge {
        Edge::Periodic => (0, n - 1),
        Edge::Neumann => (0, n),
        Edge::Dirichlet(_) => (1, n - 1),
    };
    let m = hi - lo;
    let mut sub = vec![-half * s; m];
    let mut sup = vec![-half * s; m];
    let mut main = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in lo..hi {
        let (l, r) = match edge {
            Edge::Periodic => (state[(i + m - 1) % m], state[(i + 1) % m]),
            Edge::Neumann => (
                if i == 0 { state[1] } else { state[i - 1] },
                if i == n - 1 {
                    state[n - 2]
                } else {
                    state[i + 1]
                },
            ),
            Edge::Dirichlet(bd) => (
                if i == 1 {
                    bd.value(t, Side::Left)
                } else {
                    state[i - 1]
                },
                if i == n - 2 {
                    bd.value(t, Side::Right)
                } else {
                    state[i + 1]
                },
            ),
        };
        let react = c + diag[i];
        let lv = s * (l - two * state[i] + r) + react * state[i];
        // increment form: a steady state gives a zero right-hand side
        rhs.push(dt * (lv + source[i]));
        main.push(T::one() - half * (react - two * s));
    }

    let delta = match edge {
        Edge::Periodic => solve_cyclic_tridiagonal(&sub, &main, &sup, &rhs)?,
        Edge::Neumann => {
            sup[0] = sup[0] * two;
            sub[m - 1] = sub[m - 1] * two;
            solve_tridiagonal(&sub, &main, &sup, &rhs)?
        }
        Edge::Dirichlet(bd) => {
            let t1 = t + dt;
            let (gl, gr) = (bd.value(t1, Side::Left), bd.value(t1, Side::Right));
            rhs[0] = rhs[0] + half * s * (gl - bd.value(t, Side::Left));
            rhs[m - 1] = rhs[m - 1] + half * s * (gr - bd.value(t, Side::Right));
            let delta = solve_tridiagonal(&sub, &main, &sup, &rhs)?;
            let mut w = Vec::with_capacity(n);
            w.push(gl);
            w.extend(state[1..n - 1].iter().zip(&delta).map(|(&u, &d)| u + d));
            w.push(gr);
            return Ok(w);
        }
    };
    let mut w: Vec<T> = state[..m]
        .iter()
        .zip(&delta)
        .map(|(&u, &d)| u + d)
        .collect();
    if let Edge::Periodic = edge {
        w.push(w[0]);
    }
    Ok(w)
}

/// Errors with [`Error::BlowUp`] when any value is non-finite or beyond
/// [`BLOWUP_THRESHOLD`].
pub fn check_blowup<T: Real>(v: &[T], t: T) -> Result<()> {
    let threshold = T::lit(BLOWUP_THRESHOLD);
    for &x in v {
        if !(x.abs() <= threshold) {
            return Err(Error::BlowUp {
                t: t.as_f64(),
                value: x.as_f64(),
                threshold: BLOWUP_THRESHOLD,
            });
        }
    }
    Ok(())
}

/// Source of the zeroth equation sampled at the start and end of a step.
#[derive(Clone, Copy)]
pub struct SourcePair<'a, T> {
    pub start: &'a [T],
    pub end: &'a [T],
}

/// One step of `u' = A u + Phi(u) + f_0`: Crank-Nicolson diffusion and a
/// Heun predictor-corrector for the reaction and forcing.
#[allow(clippy::too_many_arguments)]
pub fn advance_nonlinear<T: Real>(
    state: &[T],
    t: T,
    dt: T,
    phi: &dyn AnalyticFunction<T>,
    f0: Option<SourcePair<'_, T>>,
    spec: &LinearOperatorSpec<T>,
    grid: &Grid1D<T>,
    edge: Edge<'_, T>,
) -> Result<Vec<T>> {
    let n = grid.n_x;
    check_len("state", state, n)?;
    let zero_diag = vec![T::zero(); n];
    let reaction = |u: &[T], f: Option<&[T]>| -> Vec<T> {
        match f {
            Some(f) => u.iter().zip(f).map(|(&x, &fx)| phi.value(x) + fx).collect(),
            None => u.iter().map(|&x| phi.value(x)).collect(),
        }
    };
    let n_start = reaction(state, f0.map(|p| p.start));
    let predictor = imex_step(state, t, dt, &zero_diag, &n_start, spec, grid, edge)?;
    check_blowup(&predictor, t + dt)?;
    let n_end = reaction(&predictor, f0.map(|p| p.end));
    let half = T::lit(0.5);
    let avg: Vec<T> = n_start
        .iter()
        .zip(&n_end)
        .map(|(&a, &b)| half * (a + b))
        .collect();
    let next = imex_step(state, t, dt, &zero_diag, &avg, spec, grid, edge)?;
    check_blowup(&next, t + dt)?;
    Ok(next)
}
