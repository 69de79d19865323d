use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::UncertaintyError;

/// Truncations accepting less probability than this are refused.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Normal,
    PointMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertainParam {
    pub mean: f64,
    #[serde(default)]
    pub std: f64,
    pub distribution: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub high: Option<f64>,
    #[serde(default)]
    pub units: String,
}

impl UncertainParam {
    pub fn normal(mean: f64, std: f64, units: &str) -> Self {
        UncertainParam { mean, std, distribution: Distribution::Normal, low: None, high: None, units: units.into() }
    }

    pub fn point(mean: f64, units: &str) -> Self {
        UncertainParam { mean, std: 0.0, distribution: Distribution::PointMass, low: None, high: None, units: units.into() }
    }

    pub fn truncated(mut self, low: Option<f64>, high: Option<f64>) -> Self {
        self.low = low;
        self.high = high;
        self
    }

    pub fn validate(&self) -> Result<(), UncertaintyError> {
        let bad = |reason: String| Err(UncertaintyError::InvalidPrior(reason));
        if !self.mean.is_finite() {
            return bad(format!("mean must be finite, got {}", self.mean));
        }
        if !(self.std >= 0.0 && self.std.is_finite()) {
            return bad(format!("std must be >= 0, got {}", self.std));
        }
        if self.distribution == Distribution::PointMass && self.std != 0.0 {
            return bad("point mass must have std 0".into());
        }
        if let (Some(lo), Some(hi)) = (self.low, self.high) {
            if lo > hi {
                return bad(format!("truncation bounds out of order: [{lo}, {hi}]"));
            }
        }
        Ok(())
    }

    /// Probability mass of the untruncated distribution inside the bounds.
    pub fn acceptance_mass(&self) -> f64 {
        let lo = self.low.unwrap_or(f64::NEG_INFINITY);
        let hi = self.high.unwrap_or(f64::INFINITY);
        if self.distribution == Distribution::PointMass || self.std == 0.0 {
            return if (lo..=hi).contains(&self.mean) { 1.0 } else { 0.0 };
        }
        let n = Normal::new(self.mean, self.std).expect("validated std");
        n.cdf(hi) - n.cdf(lo)
    }

    fn inside(&self, v: f64) -> bool {
        self.low.is_none_or(|lo| v >= lo) && self.high.is_none_or(|hi| v <= hi)
    }
}

/// Draws one value; truncated normals are redrawn until inside the bounds.
pub fn sample<R: Rng + ?Sized>(prior: &UncertainParam, rng: &mut R) -> Result<f64, UncertaintyError> {
    prior.validate()?;
    let mass = prior.acceptance_mass();
    if mass < MIN_ACCEPTANCE {
        return Err(UncertaintyError::AcceptanceTooSmall { mass });
    }
    if prior.distribution == Distribution::PointMass || prior.std == 0.0 {
        return Ok(prior.mean);
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = prior.mean + prior.std * z;
        if prior.inside(v) {
            return Ok(v);
        }
    }
}

/// Every uncertain input, in sampling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    ExternalTemp,
    Setpoint,
    GasTariff,
    ElecTariff,
    LoftMaterial,
    LoftInstall,
    WindowDayRate,
    WindowMaterial,
    USingle,
    UDouble,
    HpCost,
    LedBulb,
    E0,
    AnnualCo2,
}

impl Symbol {
    pub const ALL: [Symbol; 14] = [
        Symbol::ExternalTemp,
        Symbol::Setpoint,
        Symbol::GasTariff,
        Symbol::ElecTariff,
        Symbol::LoftMaterial,
        Symbol::LoftInstall,
        Symbol::WindowDayRate,
        Symbol::WindowMaterial,
        Symbol::USingle,
        Symbol::UDouble,
        Symbol::HpCost,
        Symbol::LedBulb,
        Symbol::E0,
        Symbol::AnnualCo2,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Symbol::ExternalTemp => "external_temp",
            Symbol::Setpoint => "setpoint",
            Symbol::GasTariff => "gas_tariff",
            Symbol::ElecTariff => "elec_tariff",
            Symbol::LoftMaterial => "loft_material",
            Symbol::LoftInstall => "loft_install",
            Symbol::WindowDayRate => "window_day_rate",
            Symbol::WindowMaterial => "window_material",
            Symbol::USingle => "u_single",
            Symbol::UDouble => "u_double",
            Symbol::HpCost => "hp_cost",
            Symbol::LedBulb => "led_bulb",
            Symbol::E0 => "e0",
            Symbol::AnnualCo2 => "annual_co2",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Symbol::ExternalTemp => "annual average external temperature",
            Symbol::Setpoint => "internal setpoint",
            Symbol::GasTariff => "gas tariff",
            Symbol::ElecTariff => "electricity tariff",
            Symbol::LoftMaterial => "loft insulation material",
            Symbol::LoftInstall => "loft insulation installation",
            Symbol::WindowDayRate => "window installation day rate",
            Symbol::WindowMaterial => "double-glazed window material",
            Symbol::USingle => "single-glazing U-value",
            Symbol::UDouble => "double-glazing U-value",
            Symbol::HpCost => "heat pump cost and installation",
            Symbol::LedBulb => "LED bulb",
            Symbol::E0 => "bare-home annual demand",
            Symbol::AnnualCo2 => "bare-home annual CO2 emissions",
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One value per symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDraw(pub BTreeMap<Symbol, f64>);

impl ParamDraw {
    pub fn get(&self, s: Symbol) -> f64 {
        self.0[&s]
    }

    pub fn set(&mut self, s: Symbol, v: f64) {
        self.0.insert(s, v);
    }

    /// Internal minus external temperature, K.
    pub fn delta_t(&self) -> f64 {
        self.get(Symbol::Setpoint) - self.get(Symbol::ExternalTemp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSet(pub BTreeMap<Symbol, UncertainParam>);

impl Default for PriorSet {
    fn default() -> Self {
        let pos = Some(0.0);
        let n = UncertainParam::normal;
        PriorSet(BTreeMap::from([
            (Symbol::ExternalTemp, n(12.0, 2.0, "°C")),
            (Symbol::Setpoint, UncertainParam::point(20.13, "°C")),
            (Symbol::GasTariff, n(0.08, 0.01, "£/kWh").truncated(pos, None)),
            (Symbol::ElecTariff, n(0.30, 0.01, "£/kWh").truncated(pos, None)),
            (Symbol::LoftMaterial, n(1.5, 0.5, "£/(m²·cm)").truncated(pos, None)),
            (Symbol::LoftInstall, n(15.0, 5.0, "£/m²").truncated(pos, None)),
            (Symbol::WindowDayRate, n(120.0, 20.0, "£/day").truncated(pos, None)),
            (Symbol::WindowMaterial, n(500.0, 100.0, "£/m²").truncated(pos, None)),
            (Symbol::USingle, n(5.7, 0.7, "W/(m²K)").truncated(pos, None)),
            (Symbol::UDouble, n(2.7, 0.7, "W/(m²K)").truncated(pos, None)),
            (Symbol::HpCost, n(11000.0, 2000.0, "£").truncated(pos, None)),
            (Symbol::LedBulb, n(7.0, 2.0, "£").truncated(pos, None)),
            (Symbol::E0, n(29530.0, 28.0, "kWh/yr")),
            (Symbol::AnnualCo2, n(5906.0, 6.0, "kgCO2/yr")),
        ]))
    }
}

impl PriorSet {
    pub fn get(&self, s: Symbol) -> Result<&UncertainParam, UncertaintyError> {
        self.0.get(&s).ok_or(UncertaintyError::MissingPrior(s))
    }

    pub fn set(&mut self, s: Symbol, p: UncertainParam) {
        self.0.insert(s, p);
    }

    pub fn validate(&self) -> Result<(), UncertaintyError> {
        for s in Symbol::ALL {
            let p = self.get(s)?;
            p.validate().map_err(|e| UncertaintyError::InvalidPrior(format!("{s}: {e}")))?;
            if p.acceptance_mass() < MIN_ACCEPTANCE {
                return Err(UncertaintyError::AcceptanceTooSmall { mass: p.acceptance_mass() });
            }
        }
        Ok(())
    }

    /// All symbols at their means.
    pub fn central(&self) -> ParamDraw {
        ParamDraw(self.0.iter().map(|(k, v)| (*k, v.mean)).collect())
    }

    /// Every prior collapsed to a point mass at its mean.
    pub fn degenerate(&self) -> PriorSet {
        PriorSet(self.0.iter().map(|(k, v)| (*k, UncertainParam::point(v.mean, &v.units))).collect())
    }

    /// Every standard deviation multiplied by `s`.
    pub fn scaled(&self, s: f64) -> PriorSet {
        PriorSet(
            self.0
                .iter()
                .map(|(k, v)| {
                    let mut v = v.clone();
                    v.std *= s;
                    (*k, v)
                })
                .collect(),
        )
    }

    /// Draws all symbols in [`Symbol::ALL`] order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ParamDraw, UncertaintyError> {
        let mut out = BTreeMap::new();
        for s in Symbol::ALL {
            out.insert(s, sample(self.get(s)?, rng)?);
        }
        Ok(ParamDraw(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = UncertainParam::point(10.0, "K");
        assert!((0..100).all(|_| sample(&p, &mut rng).unwrap() == 10.0));
    }

    #[test]
    fn normal_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = UncertainParam::normal(12.0, 2.0, "°C");
        let n = 100_000;
        let m = (0..n).map(|_| sample(&p, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((m - 12.0).abs() < 0.02, "{m}");
    }

    #[test]
    fn half_normal_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = UncertainParam::normal(0.0, 1.0, "").truncated(Some(0.0), None);
        let n = 100_000;
        let vals: Vec<f64> = (0..n).map(|_| sample(&p, &mut rng).unwrap()).collect();
        assert!(vals.iter().all(|v| *v >= 0.0));
        let m = vals.iter().sum::<f64>() / n as f64;
        assert!((m - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.006, "{m}");
    }

    #[test]
    fn hopeless_truncation_is_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = UncertainParam::normal(0.0, 1.0, "").truncated(Some(6.0), None);
        assert!(matches!(sample(&p, &mut rng), Err(UncertaintyError::AcceptanceTooSmall { .. })));
        let bad = UncertainParam::normal(0.0, 1.0, "").truncated(Some(1.0), Some(0.0));
        assert!(matches!(sample(&bad, &mut rng), Err(UncertaintyError::InvalidPrior(_))));
        let pm = UncertainParam { std: 1.0, ..UncertainParam::point(1.0, "") };
        assert!(pm.validate().is_err());
    }

    #[test]
    fn default_priors_are_complete() {
        let p = PriorSet::default();
        p.validate().unwrap();
        let c = p.central();
        assert!((c.delta_t() - 8.13).abs() < 1e-12);
        let mut missing = p.clone();
        missing.0.remove(&Symbol::LedBulb);
        assert_eq!(missing.validate(), Err(UncertaintyError::MissingPrior(Symbol::LedBulb)));
    }

    #[test]
    fn priors_round_trip_json() {
        let p = PriorSet::default();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<PriorSet>(&s).unwrap(), p);
    }
}
