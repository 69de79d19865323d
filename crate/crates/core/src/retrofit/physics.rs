//! Closed-form savings. Energies are kWh/yr, thicknesses metres, areas m².

use serde::{Deserialize, Serialize};

use super::params::{positive, unit, ConversionFactors, FractionParams, LightingParams, ThermalParams};
use super::RetrofitError;
use crate::ingest::Fuel;

/// Composite roof conductance g(L) = κ_i / (κ_i/(κ_r/L_r) + L), W/(m²K).
pub fn roof_conductance(l: f64, t: &ThermalParams) -> f64 {
    if l <= 0.0 {
        return t.kr_over_lr;
    }
    t.kappa_i / (t.kappa_i / t.kr_over_lr + l)
}

/// Share of bare-roof heat loss removed by thickness `l`:
/// κ_r L / (κ_i L_r + κ_r L).
pub fn insulation_fraction(l: f64, kr_over_lr: f64, kappa_i: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    l / (kappa_i / kr_over_lr + l)
}

fn check_thickness(target: f64, current: f64) -> Result<(), RetrofitError> {
    if !(current >= 0.0 && current.is_finite() && target.is_finite()) {
        return Err(RetrofitError::InvalidParams(format!("loft thickness must be >= 0, got {current}")));
    }
    if target < current {
        return Err(RetrofitError::TargetBelowCurrent { target, current });
    }
    Ok(())
}

pub fn insulation_savings_area(area: f64, li_target: f64, li_current: f64, t: &ThermalParams) -> Result<f64, RetrofitError> {
    check_thickness(li_target, li_current)?;
    if !(area >= 0.0) {
        return Err(RetrofitError::NonPositive { name: "area", value: area });
    }
    let dg = roof_conductance(li_current, t) - roof_conductance(li_target, t);
    Ok(t.hours_factor * dg * t.delta_t * area)
}

pub fn insulation_savings_fraction(
    e0: f64,
    li_target: f64,
    li_current: f64,
    p: &FractionParams,
    t: &ThermalParams,
) -> Result<f64, RetrofitError> {
    check_thickness(li_target, li_current)?;
    positive("e0", e0)?;
    let f = |l| insulation_fraction(l, t.kr_over_lr, t.kappa_i);
    Ok(p.alpha_i * e0 * (f(li_target) - f(li_current)))
}

pub fn windows_savings_fraction(e0: f64, lambda: f64, p: &FractionParams, t: &ThermalParams) -> Result<f64, RetrofitError> {
    unit("lambda", lambda)?;
    positive("e0", e0)?;
    Ok((1.0 - lambda) * p.alpha_w * e0 * (t.u_single - t.u_double) / t.u_single)
}

/// Double-glazed windows upgraded to triple, E₀-anchored.
pub fn triple_savings_fraction(e0: f64, lambda: f64, p: &FractionParams, t: &ThermalParams) -> Result<f64, RetrofitError> {
    unit("lambda", lambda)?;
    positive("e0", e0)?;
    Ok(lambda * p.alpha_w * e0 * (t.u_double - t.u_triple) / t.u_single)
}

/// Total window area implied by the bare-home window share at ΔT_ref.
pub fn window_total_area(e0: f64, p: &FractionParams, t: &ThermalParams) -> f64 {
    p.alpha_w * e0 / (t.hours_factor * t.u_single * t.delta_t_ref)
}

/// Single-glazed area still in place, m².
pub fn windows_area_estimate(e0: f64, lambda: f64, p: &FractionParams, t: &ThermalParams) -> Result<f64, RetrofitError> {
    unit("lambda", lambda)?;
    positive("e0", e0)?;
    Ok((1.0 - lambda) * window_total_area(e0, p, t))
}

pub fn windows_savings_area(area: f64, from_u: f64, to_u: f64, t: &ThermalParams) -> Result<f64, RetrofitError> {
    if from_u <= to_u {
        return Err(RetrofitError::WindowsUOrder { from: from_u, to: to_u });
    }
    if !(area >= 0.0) {
        return Err(RetrofitError::NonPositive { name: "area", value: area });
    }
    Ok(t.hours_factor * (from_u - to_u) * t.delta_t * area)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlazingRoute {
    SupplementSinglesToDouble,
    UpgradeDoublesToTriple,
}

/// Picks the route with the larger per-E₀ saving; ties go to doubles.
pub fn glazing_plan(lambda: f64, t: &ThermalParams) -> Result<GlazingRoute, RetrofitError> {
    unit("lambda", lambda)?;
    Ok(if lambda * (t.u_double - t.u_triple) > (1.0 - lambda) * (t.u_single - t.u_double) {
        GlazingRoute::UpgradeDoublesToTriple
    } else {
        GlazingRoute::SupplementSinglesToDouble
    })
}

/// λ at which both routes save the same.
pub fn glazing_crossover(t: &ThermalParams) -> f64 {
    let a = t.u_single - t.u_double;
    a / (a + t.u_double - t.u_triple)
}

pub fn lighting_savings(e0: f64, lp: &LightingParams, p: &FractionParams) -> Result<f64, RetrofitError> {
    positive("e0", e0)?;
    unit("led_ratio", lp.led_ratio)?;
    Ok(p.alpha_l * (1.0 - p.beta) * (1.0 - lp.led_ratio) * e0)
}

/// Heating demand left for a heat pump after window and loft work.
pub fn heating_budget(e0: f64, prior_window: f64, prior_insulation: f64, p: &FractionParams) -> Result<f64, RetrofitError> {
    positive("e0", e0)?;
    if prior_window < 0.0 || prior_insulation < 0.0 {
        return Err(RetrofitError::InvalidParams("prior savings must be >= 0".into()));
    }
    let heating = p.alpha_h * e0;
    let used = prior_window + prior_insulation;
    if used > heating {
        return Err(RetrofitError::HeatingBudgetExhausted { heating, priors: used });
    }
    Ok(heating - used)
}

pub fn hp_savings(e0: f64, prior_window: f64, prior_insulation: f64, p: &FractionParams) -> Result<f64, RetrofitError> {
    Ok((1.0 - p.lambda_hp) * heating_budget(e0, prior_window, prior_insulation, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Heating(Fuel),
    Lighting,
}

fn co2_factor(fuel: Fuel, c: &ConversionFactors) -> f64 {
    match fuel {
        Fuel::Gas => c.gamma_co2_gas,
        Fuel::Electricity => c.gamma_co2_grid,
    }
}

fn gbp_factor(fuel: Fuel, c: &ConversionFactors) -> f64 {
    match fuel {
        Fuel::Gas => c.gamma_gbp_gas,
        Fuel::Electricity => c.gamma_gbp_elec,
    }
}

/// kgCO₂/yr
pub fn carbon_savings(kwh: f64, channel: Channel, c: &ConversionFactors) -> f64 {
    kwh * match channel {
        Channel::Heating(fuel) => co2_factor(fuel, c),
        Channel::Lighting => c.gamma_co2_grid,
    }
}

/// £/yr
pub fn money_savings(kwh: f64, channel: Channel, c: &ConversionFactors) -> f64 {
    kwh * match channel {
        Channel::Heating(fuel) => gbp_factor(fuel, c),
        Channel::Lighting => c.gamma_gbp_elec,
    }
}

pub fn hp_carbon_savings(
    e0: f64,
    prior_window: f64,
    prior_insulation: f64,
    fuel_t0: Fuel,
    c: &ConversionFactors,
    p: &FractionParams,
) -> Result<f64, RetrofitError> {
    let budget = heating_budget(e0, prior_window, prior_insulation, p)?;
    Ok((co2_factor(fuel_t0, c) - p.lambda_hp * c.gamma_co2_grid) * budget)
}

/// May be negative when λγ£;EL exceeds the current tariff.
pub fn hp_money_savings(
    e0: f64,
    prior_window: f64,
    prior_insulation: f64,
    fuel_t0: Fuel,
    c: &ConversionFactors,
    p: &FractionParams,
) -> Result<f64, RetrofitError> {
    let budget = heating_budget(e0, prior_window, prior_insulation, p)?;
    Ok((gbp_factor(fuel_t0, c) - p.lambda_hp * c.gamma_gbp_elec) * budget)
}
