//! Turns a [`RunConfig`] into a solver problem.

use std::sync::Arc;

use wickchaos::chaos::{AnalyticFunction, CosCosh, ExpFamily, Log1p, Polynomial};
use wickchaos::diagnostics::hermite_function;
use wickchaos::pde::{BoundaryData, FnBoundary, Side};
use wickchaos::propagator::{FnForcing, Forcing, ZeroForcing};
use wickchaos::{BoundaryKind, ChaosField, Field, Grid1D, IndexSet, LinearOperatorSpec, Problem};

use crate::config::{
    BoundaryConfig, CustomPhi, EquationConfig, ForcingConfig, InitialConfig, RunConfig,
};
use crate::CliError;

pub fn build_phi(cfg: &RunConfig) -> Arc<dyn AnalyticFunction<f64>> {
    match &cfg.equation {
        EquationConfig::FujitaGelfand { a, b } => Arc::new(ExpFamily::new(*a, *b)),
        EquationConfig::FisherKpp => Arc::new(Polynomial::fisher_kpp()),
        EquationConfig::AllenCahn => Arc::new(Polynomial::allen_cahn()),
        EquationConfig::NewellWhiteheadSegel { a, b, n } => {
            Arc::new(Polynomial::newell_whitehead_segel(*a, *b, *n))
        }
        EquationConfig::Log1pHeat => Arc::new(Log1p),
        EquationConfig::CosCoshHeat => Arc::new(CosCosh),
        EquationConfig::Custom => match cfg.phi.as_ref().expect("validated config") {
            CustomPhi::Polynomial { coeffs } => Arc::new(Polynomial::new("custom", coeffs.clone())),
            CustomPhi::Exp { a, b } => Arc::new(ExpFamily::new(*a, *b)),
            CustomPhi::Log1p => Arc::new(Log1p),
            CustomPhi::CosCosh => Arc::new(CosCosh),
        },
    }
}

/// `-2 ln(1 + e^{-x-t})`.
pub fn fujita_front(t: f64, x: f64) -> f64 {
    -2.0 * (-x - t).exp().ln_1p()
}

/// True when the run is the expanding-front example whose expectation has
/// the closed form [`fujita_front`].
pub fn has_closed_form(cfg: &RunConfig) -> bool {
    matches!(cfg.equation, EquationConfig::FujitaGelfand { a, b } if a == 2.0 && b == -2.0)
        && matches!(cfg.initial, InitialConfig::FrontProfile { .. })
        && matches!(cfg.forcing, ForcingConfig::Zero)
        && cfg.operator.diffusion == 1.0
        && cfg.operator.reaction == 0.0
}

fn boundary_kind(bc: BoundaryConfig) -> BoundaryKind {
    match bc {
        BoundaryConfig::Periodic => BoundaryKind::Periodic,
        BoundaryConfig::Dirichlet => BoundaryKind::Dirichlet,
        BoundaryConfig::Neumann => BoundaryKind::Neumann,
    }
}

fn initial_field(cfg: &RunConfig, set: &Arc<IndexSet>, xs: &[f64]) -> Field {
    let n_x = xs.len();
    let mut f = ChaosField::from_fn(set.clone(), n_x, |_, alpha, i| {
        let x = xs[i];
        match cfg.initial {
            InitialConfig::FrontProfile { value } => {
                if alpha.is_zero() {
                    fujita_front(0.0, x)
                } else {
                    value
                }
            }
            InitialConfig::GaussianBump {
                amplitude,
                center,
                width,
                fluctuation,
            } => {
                let bump = (-(x - center).powi(2) / (2.0 * width * width)).exp();
                match alpha.order() {
                    0 => amplitude * bump,
                    1 => fluctuation * bump,
                    _ => 0.0,
                }
            }
            InitialConfig::Constant { mean, fluctuation } => match alpha.order() {
                0 => mean,
                1 => fluctuation,
                _ => 0.0,
            },
        }
    });
    if cfg.domain.bc == BoundaryConfig::Periodic {
        for ord in 0..f.len() {
            let c = f.coeff_mut(ord);
            c[n_x - 1] = c[0];
        }
    }
    f
}

fn forcing(cfg: &RunConfig) -> Arc<dyn Forcing<f64>> {
    match cfg.forcing {
        ForcingConfig::Zero => Arc::new(ZeroForcing),
        ForcingConfig::Deterministic {
            amplitude,
            frequency,
        } => Arc::new(FnForcing(move |t: f64, f: &mut Field| {
            f.data_mut().fill(0.0);
            f.coeff_mut(0).fill(amplitude * (frequency * t).sin());
        })),
        ForcingConfig::WhiteNoiseModes { amplitude } => {
            Arc::new(FnForcing(move |t: f64, f: &mut Field| {
                f.data_mut().fill(0.0);
                let set = f.index_set().clone();
                // the grade-1 ordinals are the unit indices e_1, ..., e_K in order
                for (k, ord) in set.grade(1).enumerate() {
                    f.coeff_mut(ord)
                        .fill(amplitude * hermite_function(k + 1, t));
                }
            }))
        }
    }
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let set = Arc::new(IndexSet::enumerate(
        cfg.truncation.modes,
        cfg.truncation.order,
    )?);
    let d = &cfg.domain;
    let grid = Grid1D::new(d.x_min, d.x_max, d.n_x, boundary_kind(d.bc))?;
    let xs = grid.points();
    let initial = initial_field(cfg, &set, &xs);
    let boundary: Arc<dyn BoundaryData<f64>> = if has_closed_form(cfg) {
        let (lo, hi) = (d.x_min, d.x_max);
        Arc::new(FnBoundary(move |t: f64, side: Side| match side {
            Side::Left => fujita_front(t, lo),
            Side::Right => fujita_front(t, hi),
        }))
    } else {
        // hold the initial end values
        let (l, r) = (initial.coeff(0)[0], initial.coeff(0)[d.n_x - 1]);
        Arc::new(FnBoundary(move |_t: f64, side: Side| match side {
            Side::Left => l,
            Side::Right => r,
        }))
    };
    Ok(Problem {
        phi: build_phi(cfg),
        operator: LinearOperatorSpec::new(cfg.operator.diffusion, cfg.operator.reaction)?,
        grid,
        boundary,
        t_final: cfg.time.t_final,
        dt: cfg.time.dt,
        initial,
        forcing: forcing(cfg),
    })
}
