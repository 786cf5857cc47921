//! The propagator sweep: the nonlinear equation for the expectation, then
//! the linear equations for every higher coefficient, grade by grade,
//! inside one forward pass over the time grid.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::chaos::{AnalyticFunction, ChaosField, DeflatedPowers, TaylorTable};
use crate::error::{Error, Result};
use crate::multiindex::{IndexSet, MultiIndex};
use crate::pde::{
    advance_nonlinear, imex_step, BoundaryData, BoundaryKind, Edge, Grid1D, LinearOperatorSpec,
    SourcePair,
};
use crate::scalar::Real;

/// Upper limit on the number of time steps of one run.
pub const MAX_STEPS: f64 = 1e7;

/// Forcing `f(t) = sum_alpha f_alpha(t) H_alpha`.
pub trait Forcing<T: Real>: Send + Sync {
    /// Overwrites every coefficient of `out` with `f(t)`.
    fn eval(&self, t: T, out: &mut ChaosField<T>);

    /// True when `f` vanishes identically; lets the solver skip evaluations.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroForcing;

impl<T: Real> Forcing<T> for ZeroForcing {
    fn eval(&self, _t: T, out: &mut ChaosField<T>) {
        out.data_mut().fill(T::zero());
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Forcing from a closure that fills the field.
pub struct FnForcing<F>(pub F);

impl<T: Real, F> Forcing<T> for FnForcing<F>
where
    F: Fn(T, &mut ChaosField<T>) + Send + Sync,
{
    fn eval(&self, t: T, out: &mut ChaosField<T>) {
        (self.0)(t, out)
    }
}

/// Everything a run needs. The index set is the one of `initial`.
#[derive(Clone)]
pub struct ProblemSpec<T: Real> {
    pub phi: Arc<dyn AnalyticFunction<T>>,
    pub operator: LinearOperatorSpec<T>,
    pub grid: Grid1D<T>,
    /// Dirichlet data for the expectation equation; ignored otherwise.
    pub boundary: Arc<dyn BoundaryData<T>>,
    pub t_final: T,
    pub dt: T,
    pub initial: ChaosField<T>,
    pub forcing: Arc<dyn Forcing<T>>,
}

impl<T: Real> ProblemSpec<T> {
    pub fn index_set(&self) -> &Arc<IndexSet> {
        self.initial.index_set()
    }

    pub fn validate(&self) -> Result<()> {
        let (dt, t_final) = (self.dt.as_f64(), self.t_final.as_f64());
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !(t_final >= dt) || !t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need 0 < dt <= T, got dt = {dt}, T = {t_final}"
            )));
        }
        if (t_final / dt).ceil() > MAX_STEPS {
            return Err(Error::InvalidArgument(format!(
                "T/dt = {} exceeds the step cap {MAX_STEPS:e}",
                t_final / dt
            )));
        }
        if self.initial.n_x() != self.grid.n_x {
            return Err(Error::ShapeMismatch(format!(
                "initial data has {} grid points, grid has {}",
                self.initial.n_x(),
                self.grid.n_x
            )));
        }
        if !self.initial.is_finite() {
            return Err(Error::InvalidArgument("initial data is not finite".into()));
        }
        if self.operator.diffusion < T::zero() {
            return Err(Error::InvalidArgument(
                "diffusion must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Saved time levels `t_n = n dt`, with the last one clamped to `T`.
    pub fn time_levels(&self) -> Vec<T> {
        let steps = self.step_count();
        (0..=steps)
            .map(|n| {
                if n == steps {
                    self.t_final
                } else {
                    self.dt * T::lit(n as f64)
                }
            })
            .collect()
    }

    pub fn step_count(&self) -> usize {
        let ratio = (self.t_final / self.dt).as_f64();
        // absorb rounding in T/dt before taking the ceiling
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize
    }

    /// SHA-256 over the resolved problem: parameters, probes of `Phi`, the
    /// initial data and the forcing at `t = 0` and `t = T`.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let set = self.index_set();
        let mut head = String::new();
        let _ = write!(
            head,
            "K={};N={};phi={};nu={:e};c={:e};x=[{:e},{:e}];nx={};bc={:?};T={:e};dt={:e}",
            set.modes(),
            set.max_order(),
            self.phi.name(),
            self.operator.diffusion,
            self.operator.reaction_const,
            self.grid.x_min,
            self.grid.x_max,
            self.grid.n_x,
            self.grid.bc,
            self.t_final,
            self.dt,
        );
        h.update(head.as_bytes());
        for k in 0..=set.max_order().max(1) {
            for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                h.update(self.phi.derivative(k, T::lit(x)).as_f64().to_le_bytes());
            }
        }
        for v in self.initial.data() {
            h.update(v.as_f64().to_le_bytes());
        }
        let mut f = ChaosField::zeros(set.clone(), self.grid.n_x);
        for t in [T::zero(), self.t_final] {
            self.forcing.eval(t, &mut f);
            for v in f.data() {
                h.update(v.as_f64().to_le_bytes());
            }
        }
        for side in [crate::pde::Side::Left, crate::pde::Side::Right] {
            h.update(self.boundary.value(T::zero(), side).as_f64().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowUp,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetadata {
    pub digest: String,
    pub steps_planned: usize,
    pub steps_taken: usize,
    pub status: RunStatus,
    /// Time of the last completed level.
    pub t_reached: f64,
    /// Error message for runs that stopped early.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

/// Trajectory of a run. `snapshots[0]` is the initial field.
#[derive(Clone, Debug)]
pub struct SolutionBundle<T> {
    pub times: Vec<T>,
    pub snapshots: Vec<ChaosField<T>>,
    /// `L_alpha = sup_t |u_alpha(t)|_inf` per ordinal, over every computed level.
    pub sup_table: Vec<T>,
    pub metadata: RunMetadata,
}

impl<T: Real> SolutionBundle<T> {
    pub fn index_set(&self) -> &Arc<IndexSet> {
        self.snapshots[0].index_set()
    }

    pub fn last(&self) -> &ChaosField<T> {
        self.snapshots
            .last()
            .expect("bundle holds the initial snapshot")
    }

    pub fn is_complete(&self) -> bool {
        self.metadata.status == RunStatus::Completed
    }
}

/// Edge treatment of the coefficients above the expectation. Only the
/// expectation receives Dirichlet data; the fluctuation coefficients use
/// zero flux on a Dirichlet grid.
pub fn higher_edge<T: Real>(grid: &Grid1D<T>) -> Edge<'static, T> {
    match grid.bc {
        BoundaryKind::Periodic => Edge::Periodic,
        BoundaryKind::Neumann | BoundaryKind::Dirichlet => Edge::Neumann,
    }
}

fn update_sup<T: Real>(sup: &mut [T], field: &ChaosField<T>) {
    for (ord, s) in sup.iter_mut().enumerate() {
        *s = s.max(field.coeff_max_norm(ord));
    }
}

fn midpoint<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    a.iter().zip(b).map(|(&x, &y)| half * (x + y)).collect()
}

struct Forcings<T> {
    start: ChaosField<T>,
    mid: ChaosField<T>,
    end: ChaosField<T>,
}

impl<T: Real> Forcings<T> {
    fn new(set: &Arc<IndexSet>, n_x: usize) -> Self {
        Forcings {
            start: ChaosField::zeros(set.clone(), n_x),
            mid: ChaosField::zeros(set.clone(), n_x),
            end: ChaosField::zeros(set.clone(), n_x),
        }
    }

    fn load(&mut self, f: &dyn Forcing<T>, t: T, h: T) {
        f.eval(t, &mut self.start);
        f.eval(t + h / T::lit(2.0), &mut self.mid);
        f.eval(t + h, &mut self.end);
    }
}

/// Integrates the propagator system.
///
/// Each step advances `u_0` with the nonlinear stepper, then sweeps the
/// grades upward. Grade `l` uses `Phi'(u_0)` and the remainder at the step
/// midpoint, both built from the average of the old and new values of the
/// lower grades. Equations inside one grade run in parallel.
///
/// Snapshots are kept every `save_every` steps and at the final time. A
/// blow-up or a non-finite coefficient ends the run early with the status
/// recorded in the metadata; the bundle then holds the levels reached.
pub fn solve<T: Real>(problem: &ProblemSpec<T>, save_every: usize) -> Result<SolutionBundle<T>> {
    problem.validate()?;
    if save_every == 0 {
        return Err(Error::InvalidArgument(
            "save_every must be at least 1".into(),
        ));
    }
    let set = problem.index_set().clone();
    let n_x = problem.grid.n_x;
    let max_order = set.max_order();
    let levels = problem.time_levels();
    let steps = levels.len() - 1;
    let phi = problem.phi.as_ref();
    let grid = &problem.grid;
    let op = &problem.operator;
    let edge0 = grid.edge(problem.boundary.as_ref());
    let edge_hi = higher_edge(grid);

    let mut meta = RunMetadata {
        digest: problem.digest(),
        steps_planned: steps,
        steps_taken: 0,
        status: RunStatus::Completed,
        t_reached: 0.0,
        failure: None,
        warnings: Vec::new(),
    };
    let radius = phi.radius();
    let mut radius_warned = false;
    let mut check_radius = |u0: &[T], t: T, warnings: &mut Vec<String>| {
        if let Some(rho) = radius {
            let m = crate::chaos::max_norm(u0);
            if !radius_warned && m >= rho {
                radius_warned = true;
                warnings.push(format!(
                    "max |u_0| = {:.6e} at t = {:.6e} reaches the radius {:.3e} of the Taylor series of {}",
                    m.as_f64(),
                    t.as_f64(),
                    rho.as_f64(),
                    phi.name()
                ));
            }
        }
    };

    let mut current = problem.initial.clone();
    let mut sup_table = vec![T::zero(); set.len()];
    update_sup(&mut sup_table, &current);
    check_radius(current.coeff(0), levels[0], &mut meta.warnings);

    let mut times = vec![levels[0]];
    let mut snapshots = vec![current.clone()];
    let mut forcing = Forcings::new(&set, n_x);
    let forced = !problem.forcing.is_zero();
    let mut powers = DeflatedPowers::new(set.clone(), n_x);
    let mut next = ChaosField::zeros(set.clone(), n_x);

    for n in 0..steps {
        let (t, h) = (levels[n], levels[n + 1] - levels[n]);
        if forced {
            forcing.load(problem.forcing.as_ref(), t, h);
        }
        let f0 = forced.then(|| SourcePair {
            start: forcing.start.coeff(0),
            end: forcing.end.coeff(0),
        });
        let u0_new = match advance_nonlinear(current.coeff(0), t, h, phi, f0, op, grid, edge0) {
            Ok(v) => v,
            Err(e @ Error::BlowUp { .. }) => {
                meta.status = RunStatus::BlowUp;
                meta.failure = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        next.coeff_mut(0).copy_from_slice(&u0_new);
        let u0_mid = midpoint(current.coeff(0), &u0_new);
        let taylor = TaylorTable::new(phi, &u0_mid, max_order.max(1));
        if let Some(k) =
            (0..=taylor.k_max()).find(|&k| taylor.row(k).iter().any(|v| !v.is_finite()))
        {
            meta.status = RunStatus::BlowUp;
            meta.failure = Some(format!(
                "derivative {k} of {} overflows at the midpoint of t = {:.6e}",
                phi.name(),
                t.as_f64()
            ));
            break;
        }

        let mut failed = None;
        for grade in 1..=max_order {
            powers.fill_higher_powers(grade);
            let range = set.grade(grade);
            let (cur, pw, tay, fm) = (&current, &powers, &taylor, &forcing.mid);
            let results: Vec<Result<Vec<T>>> = range
                .clone()
                .into_par_iter()
                .map(|ord| {
                    let mut source = vec![T::zero(); n_x];
                    crate::chaos::remainder_from_powers(tay, pw, ord, &mut source);
                    if forced {
                        for (s, &f) in source.iter_mut().zip(fm.coeff(ord)) {
                            *s = *s + f;
                        }
                    }
                    imex_step(cur.coeff(ord), t, h, tay.row(1), &source, op, grid, edge_hi)
                })
                .collect();
            for (ord, res) in range.zip(results) {
                let w = match res {
                    Ok(w) if w.iter().all(|v| v.is_finite()) => w,
                    // a singular system here comes from overflowing data
                    Ok(_) | Err(Error::Singular { .. }) => {
                        failed = Some(Error::NonFinite {
                            ordinal: ord,
                            t: (t + h).as_f64(),
                        });
                        break;
                    }
                    Err(e) => return Err(e),
                };
                powers.set_first_power(ord, &midpoint(current.coeff(ord), &w));
                next.coeff_mut(ord).copy_from_slice(&w);
            }
            if failed.is_some() {
                break;
            }
        }
        if let Some(e) = failed {
            meta.status = RunStatus::NonFinite;
            meta.failure = Some(e.to_string());
            break;
        }

        std::mem::swap(&mut current, &mut next);
        update_sup(&mut sup_table, &current);
        check_radius(current.coeff(0), t + h, &mut meta.warnings);
        meta.steps_taken = n + 1;
        meta.t_reached = (t + h).as_f64();
        if (n + 1) % save_every == 0 || n + 1 == steps {
            times.push(t + h);
            snapshots.push(current.clone());
        }
    }

    if meta.status != RunStatus::Completed && times.last() != Some(&levels[meta.steps_taken]) {
        // keep the last good level so the partial bundle ends where the run did
        times.push(levels[meta.steps_taken]);
        snapshots.push(current);
    }

    Ok(SolutionBundle {
        times,
        snapshots,
        sup_table,
        metadata: meta,
    })
}

/// The graded enumeration: every index comes after all indices below it.
pub fn dependency_order(set: &IndexSet) -> Vec<MultiIndex> {
    set.indices().to_vec()
}

/// Checks that `beta < alpha` implies `beta` precedes `alpha` in the order.
pub fn certify_dependency_order(order: &[MultiIndex]) -> bool {
    order
        .iter()
        .enumerate()
        .all(|(i, alpha)| order[i + 1..].iter().all(|later| !later.lt(alpha)))
}

/// Largest difference between `solve` and independent per-coefficient
/// integrations, over all saved levels. Requires `Phi'' == 0`, where the
/// system decouples; the result is then exactly zero.
pub fn linear_crosscheck<T: Real>(problem: &ProblemSpec<T>, save_every: usize) -> Result<T> {
    let phi = problem.phi.as_ref();
    let probes = [-2.0, -1.0, -0.3, 0.0, 0.7, 1.0, 3.0];
    if probes
        .iter()
        .any(|&x| !phi.derivative(2, T::lit(x)).is_zero())
    {
        return Err(Error::InvalidArgument(format!(
            "linear cross-check needs Phi'' = 0, `{}` is not affine",
            phi.name()
        )));
    }
    let bundle = solve(problem, save_every)?;
    let set = problem.index_set().clone();
    let n_x = problem.grid.n_x;
    let levels = problem.time_levels();
    let grid = &problem.grid;
    let op = &problem.operator;
    let edge0 = grid.edge(problem.boundary.as_ref());
    let edge_hi = higher_edge(grid);
    let slope = vec![phi.derivative(1, T::zero()); n_x];
    let mut forcing = Forcings::new(&set, n_x);
    let forced = !problem.forcing.is_zero();

    let mut worst = T::zero();
    for ord in 0..set.len() {
        let mut u = problem.initial.coeff(ord).to_vec();
        let mut saved = 0;
        for n in 0..bundle.metadata.steps_taken {
            let (t, h) = (levels[n], levels[n + 1] - levels[n]);
            if forced {
                forcing.load(problem.forcing.as_ref(), t, h);
            }
            u = if ord == 0 {
                let f0 = forced.then(|| SourcePair {
                    start: forcing.start.coeff(0),
                    end: forcing.end.coeff(0),
                });
                advance_nonlinear(&u, t, h, phi, f0, op, grid, edge0)?
            } else {
                let source = if forced {
                    forcing.mid.coeff(ord).to_vec()
                } else {
                    vec![T::zero(); n_x]
                };
                imex_step(&u, t, h, &slope, &source, op, grid, edge_hi)?
            };
            if (n + 1) % save_every == 0 || n + 1 == levels.len() - 1 {
                saved += 1;
                let snap = bundle.snapshots[saved].coeff(ord);
                for (a, b) in snap.iter().zip(&u) {
                    worst = worst.max((*a - *b).abs());
                }
            }
        }
    }
    Ok(worst)
}
