//! Single-dwelling what-if estimates: the request/response pair shared by
//! the HTTP service and the C interface.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::{AgeBand, Borough, BuiltForm, DwellingRecord, Fuel, PropertyType, MIN_FLOOR_AREA};
use crate::model::{BareHomeModel, ModelError};
use crate::retrofit::{
    compose, DwellingInputs, LightingParams, Mode, ParamProfile, Project, ProjectEstimate, RetrofitError,
    SavingsEstimate, Targets, Warning,
};
use crate::uncertainty::{
    apply_draw, propagate, McReport, McSample, ParamDraw, PriorSet, PropagateOptions, Symbol, UncertainParam,
    UncertaintyError,
};

/// Bare-house demand and emissions used by the preset, per year.
pub const BARE_HOUSE_E0: (f64, f64) = (29530.0, 28.0);
pub const BARE_HOUSE_CO2: (f64, f64) = (5906.0, 6.0);
/// Largest Monte-Carlo run a single request may ask for.
pub const MAX_MC_DRAWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Semi-detached 1930-1949 house, 109 m², gas, nothing retrofitted;
    /// E₀ 29530 ± 28 kWh/yr.
    BareHouse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DwellingProfile {
    pub property_type: PropertyType,
    pub built_form: BuiltForm,
    pub age_band: AgeBand,
    /// m²
    pub floor_area: f64,
    /// m; imputed from the model's group means when absent.
    pub floor_height: Option<f64>,
    /// Multi-glazed fraction λ.
    pub glazing: f64,
    pub led_ratio: f64,
    pub loft_cm: f64,
    pub fuel: Fuel,
    pub has_heat_pump: bool,
    pub n_bulbs: u32,
}

impl Default for DwellingProfile {
    fn default() -> Self {
        DwellingProfile {
            property_type: PropertyType::House,
            built_form: BuiltForm::SemiDetached,
            age_band: AgeBand::B1930To1949,
            floor_area: 109.0,
            floor_height: None,
            glazing: 0.0,
            led_ratio: 0.0,
            loft_cm: 0.0,
            fuel: Fuel::Gas,
            has_heat_pump: false,
            n_bulbs: 12,
        }
    }
}

impl DwellingProfile {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let bad = |field: &str, msg: String| Err(EstimateError::Invalid { field: format!("dwelling.{field}"), message: msg });
        if !(self.floor_area > MIN_FLOOR_AREA && self.floor_area.is_finite()) {
            return bad("floor_area", format!("must exceed {MIN_FLOOR_AREA} m², got {}", self.floor_area));
        }
        if let Some(h) = self.floor_height {
            if !(h > 0.0 && h.is_finite()) {
                return bad("floor_height", format!("must be positive, got {h}"));
            }
        }
        for (f, v) in [("glazing", self.glazing), ("led_ratio", self.led_ratio)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(f, format!("must lie in [0, 1], got {v}"));
            }
        }
        if !(self.loft_cm >= 0.0 && self.loft_cm.is_finite()) {
            return bad("loft_cm", format!("must be >= 0, got {}", self.loft_cm));
        }
        if self.n_bulbs == 0 {
            return bad("n_bulbs", "must be >= 1".into());
        }
        Ok(())
    }

    /// The profile as a record, for regression prediction.
    pub fn record(&self) -> DwellingRecord {
        DwellingRecord {
            id: "request".into(),
            borough: Borough::new(""),
            property_type: self.property_type,
            built_form: self.built_form,
            age_band: self.age_band,
            floor_area: self.floor_area,
            floor_height: self.floor_height,
            annual_consumption: 0.0,
            multi_glaze_proportion: self.glazing,
            low_energy_lighting: self.led_ratio,
            loft_insulation_thickness: self.loft_cm,
            main_fuel: self.fuel,
            has_heat_pump: self.has_heat_pump,
        }
    }

    pub fn inputs(&self, e0: f64) -> DwellingInputs {
        DwellingInputs {
            property_type: self.property_type,
            floor_area: self.floor_area,
            e0,
            glazing: self.glazing,
            lighting: LightingParams::new(self.n_bulbs, self.led_ratio),
            loft_cm: self.loft_cm,
            fuel: self.fuel,
            has_heat_pump: self.has_heat_pump,
            loft_area: None,
            window_area: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRequest {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Floor applied to per-draw money savings; off when absent.
    #[serde(default)]
    pub money_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateRequest {
    pub preset: Option<Preset>,
    pub dwelling: DwellingProfile,
    pub projects: Vec<Project>,
    pub targets: Targets,
    pub mode: Mode,
    /// Baseline demand override, kWh/yr.
    pub e0: Option<f64>,
    pub e0_std: Option<f64>,
    pub mc: Option<McRequest>,
    /// Partial parameter profile; missing fields keep their defaults.
    pub params: ParamProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E0Origin {
    Request,
    Preset,
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub std: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub e0: Quantity,
    pub co2: Quantity,
    pub origin: E0Origin,
    /// Regression prediction was negative and clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResponse {
    pub model_version: Option<String>,
    /// SHA-256 of the resolved parameter profile (compact JSON).
    pub params_hash: String,
    pub params: ParamProfile,
    pub dwelling: DwellingProfile,
    pub mode: Mode,
    pub baseline: Baseline,
    /// Projects evaluated together (heat pump after fabric).
    pub composed: SavingsEstimate,
    /// Each project evaluated on its own.
    pub standalone: Vec<ProjectEstimate>,
    pub demand_reduction_pct: f64,
    pub co2_reduction_pct: f64,
    pub mc: Option<McReport>,
    pub warnings: Vec<Warning>,
    /// Unit of every quantity field, keyed by field name.
    pub units: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("no baseline available: supply `e0`, a preset, or load a model")]
    NoBaseline,
    #[error(transparent)]
    Retrofit(#[from] RetrofitError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Uncertainty(#[from] UncertaintyError),
}

pub fn units() -> BTreeMap<String, String> {
    [
        ("energy", "kWh/yr"),
        ("carbon", "kgCO2/yr"),
        ("money", "GBP/yr"),
        ("cost", "GBP"),
        ("roi_years", "years"),
        ("e0", "kWh/yr"),
        ("co2", "kgCO2/yr"),
        ("floor_area", "m2"),
        ("floor_height", "m"),
        ("loft_cm", "cm"),
        ("demand_reduction_pct", "%"),
        ("co2_reduction_pct", "%"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn params_hash(p: &ParamProfile) -> String {
    let json = serde_json::to_vec(p).expect("profile serializes");
    hex::encode(Sha256::digest(json))
}

fn quantity(value: f64, std: f64, unit: &str) -> Quantity {
    Quantity { value, std, unit: unit.to_string() }
}

fn resolve_baseline(req: &EstimateRequest, model: Option<&BareHomeModel>, p: &ParamProfile) -> Result<Baseline, EstimateError> {
    let grid = p.conversion.gamma_co2_grid;
    let from = |e0: f64, std: f64, origin, clamped| Baseline {
        e0: quantity(e0, std, "kWh/yr"),
        co2: quantity(e0 * grid, std * grid, "kgCO2/yr"),
        origin,
        clamped,
    };
    if let Some(e0) = req.e0 {
        let std = req.e0_std.unwrap_or(0.0);
        if !(e0 > 0.0 && e0.is_finite()) {
            return Err(EstimateError::Invalid { field: "e0".into(), message: format!("must be positive, got {e0}") });
        }
        if !(std >= 0.0 && std.is_finite()) {
            return Err(EstimateError::Invalid { field: "e0_std".into(), message: format!("must be >= 0, got {std}") });
        }
        return Ok(from(e0, std, E0Origin::Request, false));
    }
    if req.preset == Some(Preset::BareHouse) {
        let (e, s) = BARE_HOUSE_E0;
        let (c, cs) = BARE_HOUSE_CO2;
        return Ok(Baseline {
            e0: quantity(e, s, "kWh/yr"),
            co2: quantity(c, cs, "kgCO2/yr"),
            origin: E0Origin::Preset,
            clamped: false,
        });
    }
    let model = model.ok_or(EstimateError::NoBaseline)?;
    let b = model.bare_e0(&req.dwelling.record())?;
    // per-dwelling scatter of the regression, carried to annual bare demand
    let std = model.fit.residual_variance.sqrt() * 12.0 * b.factor;
    Ok(from(b.e0_year, std, E0Origin::Model, b.clamped))
}

/// Priors centred on the resolved profile and baseline, with the default
/// spreads.
pub fn centred_priors(p: &ParamProfile, baseline: &Baseline) -> PriorSet {
    let mut priors = PriorSet::default();
    let mut recentre = |s: Symbol, mean: f64| {
        let mut u = priors.get(s).expect("default priors are complete").clone();
        u.mean = mean;
        priors.set(s, u);
    };
    recentre(Symbol::GasTariff, p.conversion.gamma_gbp_gas);
    recentre(Symbol::ElecTariff, p.conversion.gamma_gbp_elec);
    recentre(Symbol::LoftMaterial, p.cost.loft_material);
    recentre(Symbol::LoftInstall, p.cost.loft_install);
    recentre(Symbol::WindowDayRate, p.cost.window_day_rate);
    recentre(Symbol::WindowMaterial, p.cost.window_material);
    recentre(Symbol::USingle, p.thermal.u_single);
    recentre(Symbol::UDouble, p.thermal.u_double);
    recentre(Symbol::HpCost, p.cost.hp_base);
    recentre(Symbol::LedBulb, p.cost.led_unit);
    let ext = priors.get(Symbol::ExternalTemp).expect("default priors are complete").mean;
    priors.set(Symbol::Setpoint, UncertainParam::point(ext + p.thermal.delta_t, "°C"));
    let spread = |q: &Quantity, unit: &str| {
        if q.std > 0.0 {
            UncertainParam::normal(q.value, q.std, unit).truncated(Some(0.0), None)
        } else {
            UncertainParam::point(q.value, unit)
        }
    };
    priors.set(Symbol::E0, spread(&baseline.e0, "kWh/yr"));
    priors.set(Symbol::AnnualCo2, spread(&baseline.co2, "kgCO2/yr"));
    priors
}

fn dedup_warnings(ws: impl IntoIterator<Item = Warning>) -> Vec<Warning> {
    let mut out: Vec<Warning> = Vec::new();
    for w in ws {
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// Pure function of the request and the model.
pub fn estimate(req: &EstimateRequest, model: Option<&BareHomeModel>) -> Result<EstimateResponse, EstimateError> {
    req.dwelling.validate()?;
    req.params.validate()?;
    if let Some(mc) = &req.mc {
        if !(2..=MAX_MC_DRAWS).contains(&mc.n) {
            return Err(EstimateError::Invalid {
                field: "mc.n".into(),
                message: format!("must lie in [2, {MAX_MC_DRAWS}], got {}", mc.n),
            });
        }
    }
    let params = req.params.clone();
    let baseline = resolve_baseline(req, model, &params)?;
    let inputs = req.dwelling.inputs(baseline.e0.value);
    let composed = compose(&req.projects, &inputs, &req.targets, req.mode, &params)?;
    let standalone = req
        .projects
        .iter()
        .map(|p| compose(&[*p], &inputs, &req.targets, req.mode, &params).map(|e| e.projects[0].clone()))
        .collect::<Result<Vec<_>, _>>()?;

    let mc = match &req.mc {
        None => None,
        Some(m) => {
            let priors = centred_priors(&params, &baseline);
            let eval = |d: &ParamDraw| -> Result<McSample, RetrofitError> {
                let e0 = d.get(Symbol::E0);
                let e = compose(&req.projects, &req.dwelling.inputs(e0), &req.targets, req.mode, &apply_draw(&params, d))?;
                Ok(McSample {
                    energy: e.energy,
                    carbon: e.carbon,
                    money: e.money,
                    cost: e.cost,
                    e0,
                    annual_co2: d.get(Symbol::AnnualCo2),
                })
            };
            Some(propagate(eval, &priors, m.n, m.seed, PropagateOptions { money_floor: m.money_floor })?)
        }
    };

    let mut warnings = composed.warnings.clone();
    if baseline.clamped {
        warnings.push(Warning::ClampedPrediction);
    }
    Ok(EstimateResponse {
        model_version: model.map(|m| m.model_version.clone()),
        params_hash: params_hash(&params),
        demand_reduction_pct: 100.0 * composed.energy / baseline.e0.value,
        co2_reduction_pct: 100.0 * composed.carbon / baseline.co2.value,
        params,
        dwelling: req.dwelling.clone(),
        mode: req.mode,
        baseline,
        composed,
        standalone,
        mc,
        warnings: dedup_warnings(warnings),
        units: units(),
    })
}
