//! Stock-wide runs: every dwelling evaluated, grouped by borough, and scaled
//! to borough dwelling counts.

mod aggregate;
mod evaluate;
mod export;
mod totals;

pub use aggregate::{aggregate_by_borough, BoroughAggregate, ProjectAggregate};
pub use evaluate::{
    dwelling_inputs, eligible_projects, evaluate_all, evaluate_dwelling, DwellingEstimate, E0Source, PortfolioConfig,
    Skipped, PORTFOLIO_DELTA_T,
};
pub use export::{
    boroughs_csv, export_heatmap_table, heatmap_file_name, heatmap_table, totals_csv, write_outputs, HeatmapRow,
    HeatmapSeries, HeatmapTable, BOROUGHS_HEADER, METRICS,
};
pub use totals::{read_counts, sample_counts, stock_totals, BoroughCount, DwellingCounts, ProjectTotal, StockTotals};

use serde::{Deserialize, Serialize};

use crate::ingest::{Borough, DwellingRecord, HouseRatios};
use crate::model::{BareHomeModel, ModelError};
use crate::retrofit::RetrofitError;

#[derive(Debug, thiserror::Error)]
pub enum PortfolioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Retrofit(#[from] RetrofitError),
    #[error("borough {borough} is missing from the {table}")]
    MissingBorough { borough: Borough, table: &'static str },
    #[error("borough {borough}: invalid dwelling count {dwellings} or house ratio {house_ratio}")]
    InvalidCount { borough: Borough, dwellings: f64, house_ratio: f64 },
    #[error("unknown metric {metric:?}; valid metrics: {valid}")]
    UnknownMetric { metric: String, valid: String },
    #[error("no dwelling could be evaluated ({skipped} skipped)")]
    Empty { skipped: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything a stock run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioRun {
    pub n_evaluated: usize,
    pub skipped: Vec<Skipped>,
    pub aggregates: Vec<BoroughAggregate>,
    pub totals: StockTotals,
}

/// Evaluates, aggregates and totals. `counts` defaults to the sample sizes.
pub fn run_portfolio(
    records: &[DwellingRecord],
    model: &BareHomeModel,
    config: &PortfolioConfig,
    counts: Option<&DwellingCounts>,
    ratios: &HouseRatios,
) -> Result<PortfolioRun, PortfolioError> {
    let (estimates, skipped) = evaluate_all(records, model, config);
    if estimates.is_empty() {
        return Err(PortfolioError::Empty { skipped: skipped.len() });
    }
    let aggregates = aggregate_by_borough(&estimates);
    let own;
    let counts = match counts {
        Some(c) => c,
        None => {
            own = sample_counts(&aggregates);
            &own
        }
    };
    let totals = stock_totals(&aggregates, counts, ratios)?;
    Ok(PortfolioRun { n_evaluated: estimates.len(), skipped, aggregates, totals })
}
