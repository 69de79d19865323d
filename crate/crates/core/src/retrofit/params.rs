use serde::{Deserialize, Serialize};

use super::RetrofitError;

/// Heat-transfer constants. Conductances in W/(m²K), conductivity in W/(m·K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalParams {
    /// Bare-roof coefficient κ_r/L_r.
    pub kr_over_lr: f64,
    /// Insulant conductivity κ_i.
    pub kappa_i: f64,
    pub u_single: f64,
    pub u_double: f64,
    pub u_triple: f64,
    /// Internal minus external temperature, K.
    pub delta_t: f64,
    /// ΔT used only for the window-area back-estimate, K.
    pub delta_t_ref: f64,
    /// W → kWh/yr per 1000 h (8760 h / 1000).
    pub hours_factor: f64,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            kr_over_lr: 1.06,
            kappa_i: 0.03,
            u_single: 5.74,
            u_double: 2.7,
            u_triple: 0.7,
            delta_t: 10.0,
            delta_t_ref: 10.0,
            hours_factor: 8.76,
        }
    }
}

impl ThermalParams {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        positive("kr_over_lr", self.kr_over_lr)?;
        positive("kappa_i", self.kappa_i)?;
        positive("u_triple", self.u_triple)?;
        positive("delta_t", self.delta_t)?;
        positive("delta_t_ref", self.delta_t_ref)?;
        positive("hours_factor", self.hours_factor)?;
        if !(self.u_single > self.u_double && self.u_double > self.u_triple) {
            return Err(RetrofitError::InvalidParams(format!(
                "U-values must satisfy single > double > triple (got {}, {}, {})",
                self.u_single, self.u_double, self.u_triple
            )));
        }
        Ok(())
    }
}

/// Bare-Home demand fractions and efficiency ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FractionParams {
    pub alpha_i: f64,
    pub alpha_w: f64,
    pub alpha_l: f64,
    pub alpha_h: f64,
    /// LED-to-incandescent power ratio.
    pub beta: f64,
    /// Electricity drawn by a heat pump per unit of displaced heat.
    pub lambda_hp: f64,
}

impl Default for FractionParams {
    fn default() -> Self {
        FractionParams { alpha_i: 0.06, alpha_w: 0.12, alpha_l: 0.03, alpha_h: 0.6, beta: 0.25, lambda_hp: 0.25 }
    }
}

impl FractionParams {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        for (name, v) in [
            ("alpha_i", self.alpha_i),
            ("alpha_w", self.alpha_w),
            ("alpha_l", self.alpha_l),
            ("alpha_h", self.alpha_h),
            ("beta", self.beta),
            ("lambda_hp", self.lambda_hp),
        ] {
            open_unit(name, v)?;
        }
        if self.alpha_w + self.alpha_i + self.alpha_l >= 1.0 {
            return Err(RetrofitError::InvalidParams("alpha_w + alpha_i + alpha_l must be below 1".into()));
        }
        Ok(())
    }
}

/// Carbon (kgCO₂/kWh) and tariff (£/kWh) factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConversionFactors {
    pub gamma_co2_gas: f64,
    pub gamma_co2_grid: f64,
    pub gamma_gbp_gas: f64,
    pub gamma_gbp_elec: f64,
}

impl Default for ConversionFactors {
    fn default() -> Self {
        ConversionFactors { gamma_co2_gas: 0.184, gamma_co2_grid: 0.20, gamma_gbp_gas: 0.08, gamma_gbp_elec: 0.30 }
    }
}

impl ConversionFactors {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        positive("gamma_co2_gas", self.gamma_co2_gas)?;
        positive("gamma_co2_grid", self.gamma_co2_grid)?;
        positive("gamma_gbp_gas", self.gamma_gbp_gas)?;
        positive("gamma_gbp_elec", self.gamma_gbp_elec)
    }
}

/// Unit costs in £. Four fields are calibrated rather than sourced; see
/// [`CostModel::CALIBRATED`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostModel {
    /// £/(m²·cm)
    pub loft_material: f64,
    /// £/m²
    pub loft_install: f64,
    /// £/m²
    pub window_material: f64,
    /// £/day
    pub window_day_rate: f64,
    /// days/m²
    pub install_days_per_m2: f64,
    pub led_unit: f64,
    pub led_install_per_bulb: f64,
    pub hp_base: f64,
    pub hp_large_home: f64,
    /// m²; floor areas above this use `hp_large_home`.
    pub hp_area_threshold: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            loft_material: 1.5,
            loft_install: 15.0,
            window_material: 500.0,
            window_day_rate: 120.0,
            install_days_per_m2: 1.45,
            led_unit: 7.0,
            led_install_per_bulb: 3.6,
            hp_base: 11000.0,
            hp_large_home: 16000.0,
            hp_area_threshold: 123.0,
        }
    }
}

impl CostModel {
    /// Fields back-solved against published cost means rather than quoted.
    pub const CALIBRATED: [&'static str; 4] =
        ["install_days_per_m2", "led_install_per_bulb", "hp_area_threshold", "hp_large_home"];

    pub fn validate(&self) -> Result<(), RetrofitError> {
        for (name, v) in [
            ("loft_material", self.loft_material),
            ("loft_install", self.loft_install),
            ("window_material", self.window_material),
            ("window_day_rate", self.window_day_rate),
            ("install_days_per_m2", self.install_days_per_m2),
            ("led_unit", self.led_unit),
            ("led_install_per_bulb", self.led_install_per_bulb),
            ("hp_base", self.hp_base),
            ("hp_large_home", self.hp_large_home),
            ("hp_area_threshold", self.hp_area_threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(RetrofitError::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Bulb inventory. Only `led_ratio` affects savings; the rest cancel out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightingParams {
    pub n_bulbs: u32,
    /// m/N
    pub led_ratio: f64,
    /// W
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bulb_power: Option<f64>,
    /// h/yr
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hours_on: Option<f64>,
}

impl LightingParams {
    pub fn new(n_bulbs: u32, led_ratio: f64) -> Self {
        LightingParams { n_bulbs, led_ratio, bulb_power: None, hours_on: None }
    }

    pub fn validate(&self) -> Result<(), RetrofitError> {
        if self.n_bulbs == 0 {
            return Err(RetrofitError::InvalidParams("n_bulbs must be >= 1".into()));
        }
        unit("led_ratio", self.led_ratio)
    }

    /// Incandescent bulbs still in place.
    pub fn bulbs_to_replace(&self) -> u32 {
        ((1.0 - self.led_ratio) * f64::from(self.n_bulbs)).round() as u32
    }
}

/// Complete parameter set for one evaluation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamProfile {
    pub thermal: ThermalParams,
    pub fractions: FractionParams,
    pub conversion: ConversionFactors,
    pub cost: CostModel,
}

impl ParamProfile {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        self.thermal.validate()?;
        self.fractions.validate()?;
        self.conversion.validate()?;
        self.cost.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self, RetrofitError> {
        let p: ParamProfile = toml::from_str(text).map_err(|e| RetrofitError::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile serializes to TOML")
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<(), RetrofitError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RetrofitError::NonPositive { name, value: v })
    }
}

pub(crate) fn unit(name: &'static str, v: f64) -> Result<(), RetrofitError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(RetrofitError::OutOfUnitRange { name, value: v })
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<(), RetrofitError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(RetrofitError::InvalidParams(format!("{name} must lie in (0, 1), got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ParamProfile::default().validate().unwrap();
    }

    #[test]
    fn committed_profile_matches_defaults() {
        let text = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/default_profile.toml"));
        assert_eq!(ParamProfile::from_toml(text).unwrap(), ParamProfile::default());
    }

    #[test]
    fn partial_toml_overrides() {
        let p = ParamProfile::from_toml("[thermal]\ndelta_t = 8.0\n[conversion]\ngamma_co2_grid = 0.23\n").unwrap();
        assert_eq!(p.thermal.delta_t, 8.0);
        assert_eq!(p.thermal.u_single, 5.74);
        assert_eq!(p.conversion.gamma_co2_grid, 0.23);
        assert!(ParamProfile::from_toml("[thermal]\nbogus = 1\n").is_err());
        assert!(ParamProfile::from_toml("[thermal]\nu_double = 6.0\n").is_err());
        assert!(ParamProfile::from_toml("[fractions]\nalpha_w = 0.5\nalpha_i = 0.5\n").is_err());
    }

    #[test]
    fn bulbs_to_replace() {
        assert_eq!(LightingParams::new(12, 0.0).bulbs_to_replace(), 12);
        assert_eq!(LightingParams::new(12, 0.5).bulbs_to_replace(), 6);
        assert_eq!(LightingParams::new(12, 1.0).bulbs_to_replace(), 0);
        assert!(LightingParams::new(0, 0.0).validate().is_err());
    }
}
