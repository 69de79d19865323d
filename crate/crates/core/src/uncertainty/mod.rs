//! Seeded Monte-Carlo propagation of parameter uncertainty.

mod prior;
mod propagate;
mod render;
mod scenario;

pub use prior::{sample, Distribution, ParamDraw, PriorSet, Symbol, UncertainParam, MIN_ACCEPTANCE};
pub use propagate::{
    draw_for, draw_samples, propagate, quantile_sorted, summarize, symbol_draws, McReport, McSample, McSummary,
    PropagateOptions,
};
pub use render::{fmt2, mc_table_csv, mc_table_text, scenario_text};
pub use scenario::{apply_draw, projects_report, scenario_report, BareHouse, Scenario, ScenarioReport, Setup};

use crate::retrofit::RetrofitError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UncertaintyError {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("truncation bounds accept only {mass:.3e} of the probability mass")]
    AcceptanceTooSmall { mass: f64 },
    #[error("no prior configured for {0}")]
    MissingPrior(Symbol),
    #[error("Monte-Carlo needs at least 2 draws, got {0}")]
    TooFewDraws(usize),
    #[error("{rejected} of {n} draws failed; first error: {first_error}")]
    TooManyRejections { rejected: usize, n: usize, first_error: String },
    #[error(transparent)]
    Retrofit(#[from] RetrofitError),
}
