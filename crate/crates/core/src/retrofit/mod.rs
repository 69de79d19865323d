//! Closed-form savings, cost, carbon and money for the four retrofit
//! projects, and the rules for combining them.

mod compose;
mod cost;
mod params;
mod physics;

pub use compose::{
    compose, parse_projects, roi, DwellingInputs, GlazingTarget, Mode, Project, ProjectEstimate, SavingsEstimate,
    Targets, Warning,
};
pub use cost::{heat_pump_cost, lighting_cost, lighting_cost_for, loft_cost, windows_cost};
pub use params::{ConversionFactors, CostModel, FractionParams, LightingParams, ParamProfile, ThermalParams};
pub use physics::{
    carbon_savings, glazing_crossover, glazing_plan, heating_budget, hp_carbon_savings, hp_money_savings, hp_savings,
    insulation_fraction, insulation_savings_area, insulation_savings_fraction, lighting_savings, money_savings,
    roof_conductance, triple_savings_fraction, window_total_area, windows_area_estimate, windows_savings_area,
    windows_savings_fraction, Channel, GlazingRoute,
};

use crate::ingest::PropertyType;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RetrofitError {
    #[error("target loft thickness {target} is below the current {current}; removing insulation is not modelled")]
    TargetBelowCurrent { target: f64, current: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, 1], got {value}")]
    OutOfUnitRange { name: &'static str, value: f64 },
    #[error("window upgrade must lower the U-value (from {from} to {to})")]
    WindowsUOrder { from: f64, to: f64 },
    #[error("heating budget exhausted: prior savings {priors:.2} kWh exceed heating demand {heating:.2} kWh")]
    HeatingBudgetExhausted { heating: f64, priors: f64 },
    #[error("{project} is only available for houses, not {property_type}")]
    NotAHouse { project: Project, property_type: PropertyType },
    #[error("{0} requested more than once")]
    DuplicateProject(Project),
    #[error("unknown project {0:?} (expected loft, windows, led or hp)")]
    UnknownProject(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
