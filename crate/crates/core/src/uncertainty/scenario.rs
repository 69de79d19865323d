//! The bare-house scenarios A–D and their Monte-Carlo reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::prior::{ParamDraw, PriorSet, Symbol};
use super::propagate::{propagate, McReport, McSample, PropagateOptions};
use super::UncertaintyError;
use crate::ingest::{AgeBand, BuiltForm, Fuel, PropertyType};
use crate::retrofit::{
    compose, window_total_area, DwellingInputs, LightingParams, Mode, ParamProfile, Project, RetrofitError,
    SavingsEstimate, Targets,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
    C,
    D,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::A, Scenario::B, Scenario::C, Scenario::D];

    pub fn projects(self) -> &'static [Project] {
        use Project::*;
        match self {
            Scenario::A => &[Windows, LoftInsulation],
            Scenario::B => &[Windows, LoftInsulation, Lighting],
            Scenario::C => &[Windows, LoftInsulation, HeatPump],
            Scenario::D => &[Windows, LoftInsulation, Lighting, HeatPump],
        }
    }

    pub fn title(self) -> String {
        self.projects().iter().map(|p| title_of(*p)).collect::<Vec<_>>().join(" + ")
    }
}

fn title_of(p: Project) -> &'static str {
    match p {
        Project::LoftInsulation => "Loft Insulation (15cm)",
        Project::Windows => "Double Glazed Windows",
        Project::Lighting => "Low Energy Lighting",
        Project::HeatPump => "Heat Pumps",
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Scenario {
    type Err = UncertaintyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            "C" => Ok(Scenario::C),
            "D" => Ok(Scenario::D),
            other => Err(UncertaintyError::InvalidPrior(format!("unknown scenario {other:?} (expected A-D)"))),
        }
    }
}

/// Reference dwelling: semi-detached house, 1930-1949, 109 m², gas heated,
/// no retrofit work in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BareHouse {
    pub property_type: PropertyType,
    pub built_form: BuiltForm,
    pub age_band: AgeBand,
    pub floor_area: f64,
    pub fuel: Fuel,
    pub n_bulbs: u32,
}

impl Default for BareHouse {
    fn default() -> Self {
        BareHouse {
            property_type: PropertyType::House,
            built_form: BuiltForm::SemiDetached,
            age_band: AgeBand::B1930To1949,
            floor_area: 109.0,
            fuel: Fuel::Gas,
            n_bulbs: 12,
        }
    }
}

/// `base` with every sampled symbol substituted.
pub fn apply_draw(base: &ParamProfile, d: &ParamDraw) -> ParamProfile {
    let mut p = base.clone();
    p.thermal.delta_t = d.delta_t();
    p.thermal.u_single = d.get(Symbol::USingle);
    p.thermal.u_double = d.get(Symbol::UDouble);
    p.conversion.gamma_gbp_gas = d.get(Symbol::GasTariff);
    p.conversion.gamma_gbp_elec = d.get(Symbol::ElecTariff);
    p.cost.loft_material = d.get(Symbol::LoftMaterial);
    p.cost.loft_install = d.get(Symbol::LoftInstall);
    p.cost.window_day_rate = d.get(Symbol::WindowDayRate);
    p.cost.window_material = d.get(Symbol::WindowMaterial);
    p.cost.hp_base = d.get(Symbol::HpCost);
    p.cost.led_unit = d.get(Symbol::LedBulb);
    p
}

/// Everything fixed across draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub house: BareHouse,
    pub base: ParamProfile,
    pub targets: Targets,
    /// Total window area, m²; derived once from the central priors.
    pub window_area: f64,
}

impl Setup {
    pub fn new(priors: &PriorSet, base: ParamProfile, house: BareHouse) -> Setup {
        let central = priors.central();
        let mut t = base.thermal.clone();
        t.u_single = central.get(Symbol::USingle);
        let window_area = window_total_area(central.get(Symbol::E0), &base.fractions, &t);
        Setup { house, base, targets: Targets::default(), window_area }
    }

    pub fn profile(&self, d: &ParamDraw) -> ParamProfile {
        apply_draw(&self.base, d)
    }

    pub fn inputs(&self, d: &ParamDraw) -> DwellingInputs {
        DwellingInputs {
            property_type: self.house.property_type,
            floor_area: self.house.floor_area,
            e0: d.get(Symbol::E0),
            glazing: 0.0,
            lighting: LightingParams::new(self.house.n_bulbs, 0.0),
            loft_cm: 0.0,
            fuel: self.house.fuel,
            has_heat_pump: false,
            loft_area: None,
            window_area: Some(self.window_area),
        }
    }

    pub fn evaluate(&self, projects: &[Project], d: &ParamDraw) -> Result<SavingsEstimate, RetrofitError> {
        compose(projects, &self.inputs(d), &self.targets, Mode::Area, &self.profile(d))
    }

    pub fn sample(&self, projects: &[Project], d: &ParamDraw) -> Result<McSample, RetrofitError> {
        let e = self.evaluate(projects, d)?;
        Ok(McSample {
            energy: e.energy,
            carbon: e.carbon,
            money: e.money,
            cost: e.cost,
            e0: d.get(Symbol::E0),
            annual_co2: d.get(Symbol::AnnualCo2),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub title: String,
    pub projects: Vec<Project>,
    pub central: SavingsEstimate,
    pub central_demand_reduction_pct: f64,
    pub central_co2_reduction_pct: f64,
    pub mc: Option<McReport>,
}

/// Central evaluation plus, when `n > 0`, a seeded Monte-Carlo run.
pub fn projects_report(
    title: &str,
    projects: &[Project],
    setup: &Setup,
    priors: &PriorSet,
    n: usize,
    seed: u64,
    opts: PropagateOptions,
) -> Result<ScenarioReport, UncertaintyError> {
    priors.validate()?;
    let c = priors.central();
    let central = setup.evaluate(projects, &c)?;
    let mc = if n > 0 { Some(propagate(|d: &ParamDraw| setup.sample(projects, d), priors, n, seed, opts)?) } else { None };
    Ok(ScenarioReport {
        title: title.to_string(),
        projects: projects.to_vec(),
        central_demand_reduction_pct: 100.0 * central.energy / c.get(Symbol::E0),
        central_co2_reduction_pct: 100.0 * central.carbon / c.get(Symbol::AnnualCo2),
        central,
        mc,
    })
}

pub fn scenario_report(scenario: Scenario, priors: &PriorSet, n: usize, seed: u64) -> Result<ScenarioReport, UncertaintyError> {
    let setup = Setup::new(priors, ParamProfile::default(), BareHouse::default());
    let title = format!("Scenario {scenario}: {}", scenario.title());
    projects_report(&title, scenario.projects(), &setup, priors, n, seed, PropagateOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_scenario_energies() {
        let p = PriorSet::default();
        let want = [8439.0, 9104.0, 15401.0, 16066.0];
        for (s, w) in Scenario::ALL.into_iter().zip(want) {
            let r = scenario_report(s, &p, 0, 0).unwrap();
            assert!((r.central.energy - w).abs() / w < 3e-3, "{s}: {}", r.central.energy);
        }
    }

    #[test]
    fn scenario_c_demand_reduction() {
        let r = scenario_report(Scenario::C, &PriorSet::default(), 0, 0).unwrap();
        assert!((r.central_demand_reduction_pct - 52.0).abs() < 0.5, "{}", r.central_demand_reduction_pct);
    }

    #[test]
    fn empty_projects_zero_reduction() {
        let p = PriorSet::default();
        let setup = Setup::new(&p, ParamProfile::default(), BareHouse::default());
        let r = projects_report("none", &[], &setup, &p, 20, 1, PropagateOptions::default()).unwrap();
        assert_eq!(r.central_demand_reduction_pct, 0.0);
        assert_eq!(r.mc.unwrap().demand_reduction_pct.max, 0.0);
    }

    #[test]
    fn window_area_from_central_priors() {
        let s = Setup::new(&PriorSet::default(), ParamProfile::default(), BareHouse::default());
        assert!((s.window_area - 0.12 * 29530.0 / (8.76 * 5.7 * 10.0)).abs() < 1e-12);
    }

    #[test]
    fn scenario_names() {
        assert_eq!("b".parse::<Scenario>().unwrap(), Scenario::B);
        assert_eq!(
            Scenario::B.title(),
            "Double Glazed Windows + Loft Insulation (15cm) + Low Energy Lighting"
        );
    }
}
