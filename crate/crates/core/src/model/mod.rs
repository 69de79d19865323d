//! The Bare-Home baseline: OLS of monthly consumption on volume with
//! categorical controls, cross-validation, and the rescale to bare E₀.

mod artifact;
mod cv;
mod design;
mod fit;
mod ols;
mod report;
mod rescale;

pub use artifact::{BareEstimate, BareHomeModel, ModelError, Prediction, Provenance, MODEL_VERSION};
pub use cv::{cross_validate, kfold_partition, CvError, CvReport};
pub use design::{Basis, ControlFamily, DesignMatrix, DesignSpec, EncodeError, Family, DESIGN_VERSION};
pub use fit::{fit_model, training_set, training_sha256, FitOptions};
pub use ols::{fit_ols, OlsError, RegressionFit, INTERCEPT};
pub use report::{coefficient_table, coefficient_table_csv};
pub use rescale::{
    presence_from_records, rescale_to_bare, DwellingGroup, GroupPresence, RescaleError, RescaleParams, Rescaled,
};

const MONTHS_PER_YEAR: f64 = 12.0;

/// kWh/yr → kWh/month. The regression is fitted in monthly units.
pub fn to_monthly(kwh_per_year: f64) -> f64 {
    kwh_per_year / MONTHS_PER_YEAR
}

/// kWh/month → kWh/yr.
pub fn to_annual(kwh_per_month: f64) -> f64 {
    kwh_per_month * MONTHS_PER_YEAR
}
