//! Chaos-expansion containers and the Wick algebra.

mod analytic;
mod field;
mod wick;

pub use analytic::{AnalyticFunction, CosCosh, ExpFamily, Log1p, Polynomial};
pub use field::{max_norm, ChaosField};
pub use wick::{
    deflate, remainder, remainder_from_powers, wick_analytic, wick_analytic_direct, wick_power,
    wick_product, DeflatedPowers, DirectSeries, TaylorTable,
};
