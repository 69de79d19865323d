use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cost::{heat_pump_cost, lighting_cost_for, loft_cost, windows_cost};
use super::params::{CostModel, LightingParams, ParamProfile};
use super::physics::{
    carbon_savings, glazing_plan, hp_carbon_savings, hp_money_savings, hp_savings, insulation_savings_area,
    insulation_savings_fraction, lighting_savings, money_savings, triple_savings_fraction, window_total_area,
    windows_savings_area, windows_savings_fraction, Channel, GlazingRoute,
};
use super::RetrofitError;
use crate::ingest::{Fuel, PropertyType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Project {
    LoftInsulation,
    Windows,
    Lighting,
    HeatPump,
}

impl Project {
    /// Evaluation order: thermal fabric first, heat pump last.
    pub const ALL: [Project; 4] = [Project::LoftInsulation, Project::Windows, Project::Lighting, Project::HeatPump];

    pub fn key(self) -> &'static str {
        match self {
            Project::LoftInsulation => "loft",
            Project::Windows => "windows",
            Project::Lighting => "led",
            Project::HeatPump => "hp",
        }
    }

    pub fn house_only(self) -> bool {
        matches!(self, Project::LoftInsulation | Project::HeatPump)
    }
}

impl fmt::Display for Project {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Project::LoftInsulation => "Loft Insulation",
            Project::Windows => "Double Glazed Windows",
            Project::Lighting => "Low Energy Lighting",
            Project::HeatPump => "Heat Pump",
        })
    }
}

impl FromStr for Project {
    type Err = RetrofitError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "loft" | "loft_insulation" | "insulation" => Ok(Project::LoftInsulation),
            "windows" | "glazing" => Ok(Project::Windows),
            "led" | "lighting" => Ok(Project::Lighting),
            "hp" | "heat_pump" | "heatpump" => Ok(Project::HeatPump),
            other => Err(RetrofitError::UnknownProject(other.to_string())),
        }
    }
}

/// Parses a comma-separated list such as `loft,windows,led`.
pub fn parse_projects(list: &str) -> Result<Vec<Project>, RetrofitError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Anchored on E₀.
    #[default]
    Fraction,
    /// Anchored on roof and window geometry.
    Area,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlazingTarget {
    #[default]
    Auto,
    Double,
    Triple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Targets {
    pub loft_cm: f64,
    pub glazing: GlazingTarget,
}

impl Default for Targets {
    fn default() -> Self {
        Targets { loft_cm: 15.0, glazing: GlazingTarget::Auto }
    }
}

/// Current state of one dwelling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellingInputs {
    pub property_type: PropertyType,
    /// m²
    pub floor_area: f64,
    /// Bare-home demand, kWh/yr.
    pub e0: f64,
    /// Multi-glazed fraction λ.
    pub glazing: f64,
    pub lighting: LightingParams,
    pub loft_cm: f64,
    pub fuel: Fuel,
    pub has_heat_pump: bool,
    /// Roof area for loft work; defaults to floor area.
    pub loft_area: Option<f64>,
    /// Total window area; defaults to the E₀-implied estimate.
    pub window_area: Option<f64>,
}

impl DwellingInputs {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        super::params::positive("floor_area", self.floor_area)?;
        super::params::positive("e0", self.e0)?;
        super::params::unit("glazing", self.glazing)?;
        self.lighting.validate()?;
        if !(self.loft_cm >= 0.0) {
            return Err(RetrofitError::InvalidParams(format!("loft_cm must be >= 0, got {}", self.loft_cm)));
        }
        for (name, v) in [("loft_area", self.loft_area), ("window_area", self.window_area)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(RetrofitError::NonPositive { name, value: v });
                }
            }
        }
        Ok(())
    }

    /// The state after every project has been carried out to `targets`.
    pub fn supplemented(&self, projects: &[Project], targets: &Targets) -> DwellingInputs {
        let mut out = self.clone();
        for p in projects {
            match p {
                Project::LoftInsulation => out.loft_cm = out.loft_cm.max(targets.loft_cm),
                Project::Windows => out.glazing = 1.0,
                Project::Lighting => out.lighting.led_ratio = 1.0,
                Project::HeatPump => out.has_heat_pump = true,
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Warning {
    /// Heat-pump running costs exceed the fuel they replace.
    NegativeMoney { project: Project, value: f64 },
    /// A back-solved cost default is in play.
    CalibratedCost { field: String },
    /// Triple glazing priced at the double-glazing material rate.
    TriplePriceAssumed,
    /// A regression prediction below zero was clamped.
    ClampedPrediction,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NegativeMoney { project, value } => {
                write!(f, "{project}: money savings are negative ({value:.2} £/yr); positive only when λ·γ£;EL < γ£(t0)")
            }
            Warning::CalibratedCost { field } => write!(f, "calibrated cost default in use: {field}"),
            Warning::TriplePriceAssumed => f.write_str("triple glazing priced at the double-glazing material rate"),
            Warning::ClampedPrediction => f.write_str("negative baseline prediction clamped to 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectEstimate {
    pub project: Project,
    /// kWh/yr
    pub energy: f64,
    /// kgCO₂/yr
    pub carbon: f64,
    /// £/yr
    pub money: f64,
    /// £
    pub cost: f64,
    pub roi_years: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<GlazingRoute>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SavingsEstimate {
    pub energy: f64,
    pub carbon: f64,
    pub money: f64,
    pub cost: f64,
    /// `cost / money`; `None` when savings never repay the cost.
    pub roi_years: Option<f64>,
    pub non_recoverable: bool,
    pub projects: Vec<ProjectEstimate>,
    pub warnings: Vec<Warning>,
}

impl SavingsEstimate {
    pub fn project(&self, p: Project) -> Option<&ProjectEstimate> {
        self.projects.iter().find(|e| e.project == p)
    }
}

pub fn roi(cost: f64, money: f64) -> Option<f64> {
    (money > 0.0).then(|| cost / money)
}

fn estimate(project: Project, energy: f64, carbon: f64, money: f64, cost: f64) -> ProjectEstimate {
    ProjectEstimate { project, energy, carbon, money, cost, roi_years: roi(cost, money), route: None }
}

fn calibrated(field: &str, value: f64, warnings: &mut Vec<Warning>) {
    let d = CostModel::default();
    let default = match field {
        "install_days_per_m2" => d.install_days_per_m2,
        "led_install_per_bulb" => d.led_install_per_bulb,
        "hp_area_threshold" => d.hp_area_threshold,
        _ => d.hp_large_home,
    };
    if value == default {
        warnings.push(Warning::CalibratedCost { field: field.to_string() });
    }
}

/// Evaluates `projects` on one dwelling. Windows and loft are evaluated
/// first; the heat pump sees the heating demand they leave behind.
pub fn compose(
    projects: &[Project],
    inputs: &DwellingInputs,
    targets: &Targets,
    mode: Mode,
    params: &ParamProfile,
) -> Result<SavingsEstimate, RetrofitError> {
    inputs.validate()?;
    if !(targets.loft_cm >= 0.0) {
        return Err(RetrofitError::InvalidParams(format!("target loft_cm must be >= 0, got {}", targets.loft_cm)));
    }
    let mut wanted = [false; 4];
    for p in projects {
        let i = Project::ALL.iter().position(|q| q == p).expect("listed project");
        if wanted[i] {
            return Err(RetrofitError::DuplicateProject(*p));
        }
        wanted[i] = true;
        if p.house_only() && inputs.property_type != PropertyType::House {
            return Err(RetrofitError::NotAHouse { project: *p, property_type: inputs.property_type });
        }
    }

    let (t, f, c, cm) = (&params.thermal, &params.fractions, &params.conversion, &params.cost);
    let heating = Channel::Heating(inputs.fuel);
    let mut out = SavingsEstimate::default();
    let (mut prior_w, mut prior_i) = (0.0, 0.0);

    for (p, _) in Project::ALL.iter().zip(wanted).filter(|(_, w)| *w) {
        let est = match p {
            Project::LoftInsulation => {
                let target = targets.loft_cm.max(inputs.loft_cm);
                let (lt, lc) = (target / 100.0, inputs.loft_cm / 100.0);
                let area = inputs.loft_area.unwrap_or(inputs.floor_area);
                let e = match mode {
                    Mode::Fraction => insulation_savings_fraction(inputs.e0, lt, lc, f, t)?,
                    Mode::Area => insulation_savings_area(area, lt, lc, t)?,
                };
                prior_i = e;
                let cost = if target > inputs.loft_cm { loft_cost(area, target - inputs.loft_cm, cm) } else { 0.0 };
                estimate(*p, e, carbon_savings(e, heating, c), money_savings(e, heating, c), cost)
            }
            Project::Windows => {
                let route = match targets.glazing {
                    GlazingTarget::Auto if inputs.glazing >= 1.0 => None,
                    GlazingTarget::Auto => Some(glazing_plan(inputs.glazing, t)?),
                    GlazingTarget::Double => Some(GlazingRoute::SupplementSinglesToDouble),
                    GlazingTarget::Triple => Some(GlazingRoute::UpgradeDoublesToTriple),
                };
                let total = inputs.window_area.unwrap_or_else(|| window_total_area(inputs.e0, f, t));
                let (e, area) = match route {
                    None => (0.0, 0.0),
                    Some(GlazingRoute::SupplementSinglesToDouble) => {
                        let area = (1.0 - inputs.glazing) * total;
                        let e = match mode {
                            Mode::Fraction => windows_savings_fraction(inputs.e0, inputs.glazing, f, t)?,
                            Mode::Area => windows_savings_area(area, t.u_single, t.u_double, t)?,
                        };
                        (e, area)
                    }
                    Some(GlazingRoute::UpgradeDoublesToTriple) => {
                        let area = inputs.glazing * total;
                        let e = match mode {
                            Mode::Fraction => triple_savings_fraction(inputs.e0, inputs.glazing, f, t)?,
                            Mode::Area => windows_savings_area(area, t.u_double, t.u_triple, t)?,
                        };
                        (e, area)
                    }
                };
                prior_w = e;
                if route == Some(GlazingRoute::UpgradeDoublesToTriple) && area > 0.0 {
                    out.warnings.push(Warning::TriplePriceAssumed);
                }
                let cost = windows_cost(area, cm);
                if cost > 0.0 {
                    calibrated("install_days_per_m2", cm.install_days_per_m2, &mut out.warnings);
                }
                let mut est = estimate(*p, e, carbon_savings(e, heating, c), money_savings(e, heating, c), cost);
                est.route = route;
                est
            }
            Project::Lighting => {
                let e = lighting_savings(inputs.e0, &inputs.lighting, f)?;
                let cost = lighting_cost_for(&inputs.lighting, cm);
                if cost > 0.0 {
                    calibrated("led_install_per_bulb", cm.led_install_per_bulb, &mut out.warnings);
                }
                estimate(
                    *p,
                    e,
                    carbon_savings(e, Channel::Lighting, c),
                    money_savings(e, Channel::Lighting, c),
                    cost,
                )
            }
            Project::HeatPump => {
                if inputs.has_heat_pump {
                    estimate(*p, 0.0, 0.0, 0.0, 0.0)
                } else {
                    let e = hp_savings(inputs.e0, prior_w, prior_i, f)?;
                    let co2 = hp_carbon_savings(inputs.e0, prior_w, prior_i, inputs.fuel, c, f)?;
                    let gbp = hp_money_savings(inputs.e0, prior_w, prior_i, inputs.fuel, c, f)?;
                    if gbp < 0.0 {
                        out.warnings.push(Warning::NegativeMoney { project: *p, value: gbp });
                    }
                    calibrated("hp_area_threshold", cm.hp_area_threshold, &mut out.warnings);
                    if inputs.floor_area > cm.hp_area_threshold {
                        calibrated("hp_large_home", cm.hp_large_home, &mut out.warnings);
                    }
                    estimate(*p, e, co2, gbp, heat_pump_cost(inputs.floor_area, cm))
                }
            }
        };
        out.projects.push(est);
    }

    for e in &out.projects {
        out.energy += e.energy;
        out.carbon += e.carbon;
        out.money += e.money;
        out.cost += e.cost;
    }
    out.roi_years = roi(out.cost, out.money);
    out.non_recoverable = out.cost > 0.0 && out.roi_years.is_none();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare() -> DwellingInputs {
        DwellingInputs {
            property_type: PropertyType::House,
            floor_area: 109.0,
            e0: 29530.0,
            glazing: 0.0,
            lighting: LightingParams::new(12, 0.0),
            loft_cm: 0.0,
            fuel: Fuel::Gas,
            has_heat_pump: false,
            loft_area: None,
            window_area: None,
        }
    }

    #[test]
    fn empty_set_is_zero() {
        let e = compose(&[], &bare(), &Targets::default(), Mode::Fraction, &ParamProfile::default()).unwrap();
        assert_eq!(e, SavingsEstimate::default());
    }

    #[test]
    fn eligibility_and_duplicates() {
        let flat = DwellingInputs { property_type: PropertyType::Flat, ..bare() };
        let p = ParamProfile::default();
        for proj in [Project::LoftInsulation, Project::HeatPump] {
            let err = compose(&[proj], &flat, &Targets::default(), Mode::Fraction, &p).unwrap_err();
            assert!(matches!(err, RetrofitError::NotAHouse { .. }));
        }
        assert!(compose(&[Project::Lighting, Project::Windows], &flat, &Targets::default(), Mode::Fraction, &p).is_ok());
        let dup = compose(&[Project::Lighting, Project::Lighting], &bare(), &Targets::default(), Mode::Fraction, &p);
        assert_eq!(dup.unwrap_err(), RetrofitError::DuplicateProject(Project::Lighting));
    }

    #[test]
    fn heat_pump_sees_reduced_budget() {
        let p = ParamProfile::default();
        let t = Targets::default();
        let alone = compose(&[Project::HeatPump], &bare(), &t, Mode::Fraction, &p).unwrap();
        assert!((alone.energy - 13288.5).abs() < 1e-9);
        let all = compose(&Project::ALL, &bare(), &t, Mode::Fraction, &p).unwrap();
        let hp = all.project(Project::HeatPump).unwrap();
        assert!(hp.energy < alone.energy);
        let w = all.project(Project::Windows).unwrap().energy;
        let i = all.project(Project::LoftInsulation).unwrap().energy;
        assert!((hp.energy - 0.75 * (17718.0 - w - i)).abs() < 1e-9);
    }

    #[test]
    fn order_of_request_does_not_matter() {
        let p = ParamProfile::default();
        let t = Targets::default();
        let a = compose(&[Project::HeatPump, Project::Windows], &bare(), &t, Mode::Fraction, &p).unwrap();
        let b = compose(&[Project::Windows, Project::HeatPump], &bare(), &t, Mode::Fraction, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn supplement_is_idempotent() {
        let p = ParamProfile::default();
        let t = Targets::default();
        let start = DwellingInputs { glazing: 0.85, loft_cm: 9.2, lighting: LightingParams::new(12, 0.53), ..bare() };
        let done = start.supplemented(&Project::ALL, &t);
        let e = compose(&Project::ALL, &done, &t, Mode::Fraction, &p).unwrap();
        assert_eq!((e.energy, e.cost), (0.0, 0.0));
    }

    #[test]
    fn triple_route_warns() {
        let p = ParamProfile::default();
        let d = DwellingInputs { glazing: 0.8, ..bare() };
        let e = compose(&[Project::Windows], &d, &Targets::default(), Mode::Fraction, &p).unwrap();
        assert_eq!(e.projects[0].route, Some(GlazingRoute::UpgradeDoublesToTriple));
        assert!(e.warnings.contains(&Warning::TriplePriceAssumed));
        let expected = 0.8 * 0.12 * 29530.0 * 2.0 / 5.74;
        assert!((e.energy - expected).abs() < 1e-9);
    }

    #[test]
    fn negative_hp_money_is_flagged_not_clamped() {
        let mut p = ParamProfile::default();
        p.conversion.gamma_gbp_gas = 0.05;
        let e = compose(&[Project::HeatPump], &bare(), &Targets::default(), Mode::Fraction, &p).unwrap();
        assert!(e.money < 0.0);
        assert!(e.non_recoverable);
        assert!(e.warnings.iter().any(|w| matches!(w, Warning::NegativeMoney { .. })));
    }

    #[test]
    fn project_names_parse() {
        assert_eq!(
            parse_projects("loft, windows,led,hp").unwrap(),
            vec![Project::LoftInsulation, Project::Windows, Project::Lighting, Project::HeatPump]
        );
        assert!(parse_projects("solar").is_err());
    }
}
