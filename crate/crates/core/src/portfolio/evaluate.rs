use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PortfolioError;
use crate::ingest::{Borough, DwellingRecord, PropertyType};
use crate::model::BareHomeModel;
use crate::retrofit::{compose, DwellingInputs, LightingParams, Mode, ParamProfile, Project, ProjectEstimate, Targets};

/// Indoor-outdoor temperature difference assumed for stock runs, K.
pub const PORTFOLIO_DELTA_T: f64 = 10.0;

/// Where a stock run takes each dwelling's E₀ from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum E0Source {
    /// Regression prediction, rescaled to the bare home.
    #[default]
    Predicted,
    /// The record's own consumption, rescaled to the bare home.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PortfolioConfig {
    pub e0_source: E0Source,
    pub targets: Targets,
    pub profile: ParamProfile,
    /// Bulbs assumed per dwelling when pricing LED replacement.
    pub n_bulbs: u32,
}

impl Default for PortfolioConfig {
    fn default() -> Self {
        PortfolioConfig { e0_source: E0Source::Predicted, targets: Targets::default(), profile: ParamProfile::default(), n_bulbs: 12 }
    }
}

impl PortfolioConfig {
    /// The profile actually used: ΔT pinned to the stock-run value.
    pub fn effective_profile(&self) -> ParamProfile {
        let mut p = self.profile.clone();
        p.thermal.delta_t = PORTFOLIO_DELTA_T;
        p
    }
}

/// Projects evaluated for one dwelling, each on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellingEstimate {
    pub id: String,
    pub borough: Borough,
    pub property_type: PropertyType,
    pub floor_area: f64,
    /// Recorded consumption, kWh/yr.
    pub consumption: f64,
    /// Bare-home demand the savings are anchored on, kWh/yr.
    pub e0: f64,
    pub e0_clamped: bool,
    /// Only eligible projects appear; loft and heat pump are house-only.
    pub projects: BTreeMap<Project, ProjectEstimate>,
}

impl DwellingEstimate {
    pub fn eligible(&self, p: Project) -> bool {
        self.projects.contains_key(&p)
    }
}

pub fn eligible_projects(property_type: PropertyType) -> Vec<Project> {
    Project::ALL.into_iter().filter(|p| !p.house_only() || property_type == PropertyType::House).collect()
}

/// Engine inputs for a record's current state.
pub fn dwelling_inputs(record: &DwellingRecord, e0: f64, n_bulbs: u32) -> DwellingInputs {
    DwellingInputs {
        property_type: record.property_type,
        floor_area: record.floor_area,
        e0,
        glazing: record.multi_glaze_proportion,
        lighting: LightingParams::new(n_bulbs, record.low_energy_lighting),
        loft_cm: record.loft_insulation_thickness,
        fuel: record.main_fuel,
        has_heat_pump: record.has_heat_pump,
        loft_area: None,
        window_area: None,
    }
}

pub fn evaluate_dwelling(
    record: &DwellingRecord,
    model: &BareHomeModel,
    config: &PortfolioConfig,
) -> Result<DwellingEstimate, PortfolioError> {
    let bare = match config.e0_source {
        E0Source::Predicted => model.bare_e0(record)?,
        E0Source::Measured => model.bare_e0_measured(record)?,
    };
    let inputs = dwelling_inputs(record, bare.e0_year, config.n_bulbs);
    let profile = config.effective_profile();
    let mut projects = BTreeMap::new();
    for p in eligible_projects(record.property_type) {
        let est = compose(&[p], &inputs, &config.targets, Mode::Fraction, &profile)?;
        projects.insert(p, est.projects.into_iter().next().expect("one project in, one estimate out"));
    }
    Ok(DwellingEstimate {
        id: record.id.clone(),
        borough: record.borough.clone(),
        property_type: record.property_type,
        floor_area: record.floor_area,
        consumption: record.annual_consumption,
        e0: bare.e0_year,
        e0_clamped: bare.clamped,
        projects,
    })
}

/// A record the run could not evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

/// Evaluates every record in parallel; failures are logged and set aside.
pub fn evaluate_all(
    records: &[DwellingRecord],
    model: &BareHomeModel,
    config: &PortfolioConfig,
) -> (Vec<DwellingEstimate>, Vec<Skipped>) {
    let results: Vec<_> = records.par_iter().map(|r| (r, evaluate_dwelling(r, model, config))).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (r, res) in results {
        match res {
            Ok(e) => ok.push(e),
            Err(e) => {
                log::warn!("skipping dwelling {}: {e}", r.id);
                skipped.push(Skipped { id: r.id.clone(), reason: e.to_string() });
            }
        }
    }
    (ok, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{AgeBand, BuiltForm, Fuel};

    fn house() -> DwellingRecord {
        DwellingRecord {
            id: "h1".into(),
            borough: Borough::new("Camden"),
            property_type: PropertyType::House,
            built_form: BuiltForm::SemiDetached,
            age_band: AgeBand::B1930To1949,
            floor_area: 109.0,
            floor_height: Some(2.5),
            annual_consumption: 20000.0,
            multi_glaze_proportion: 0.0,
            low_energy_lighting: 0.0,
            loft_insulation_thickness: 0.0,
            main_fuel: Fuel::Gas,
            has_heat_pump: false,
        }
    }

    fn get(e: &DwellingEstimate, p: Project) -> &ProjectEstimate {
        &e.projects[&p]
    }

    #[test]
    fn fully_upgraded_house_saves_only_through_heat_pump() {
        let m = BareHomeModel::table1();
        let r = DwellingRecord { multi_glaze_proportion: 1.0, low_energy_lighting: 1.0, loft_insulation_thickness: 15.0, ..house() };
        let e = evaluate_dwelling(&r, &m, &PortfolioConfig::default()).unwrap();
        for p in [Project::LoftInsulation, Project::Windows, Project::Lighting] {
            let pe = get(&e, p);
            assert_eq!((pe.energy, pe.cost), (0.0, 0.0), "{p}");
        }
        assert!(get(&e, Project::HeatPump).energy > 0.0);
    }

    #[test]
    fn flats_have_no_house_only_projects() {
        let m = BareHomeModel::table1();
        let r = DwellingRecord { property_type: PropertyType::Flat, built_form: BuiltForm::MidTerrace, ..house() };
        let e = evaluate_dwelling(&r, &m, &PortfolioConfig::default()).unwrap();
        assert!(!e.eligible(Project::LoftInsulation) && !e.eligible(Project::HeatPump));
        assert!(e.eligible(Project::Windows) && e.eligible(Project::Lighting));
    }

    #[test]
    fn partly_upgraded_house_saves_less_than_bare_twin() {
        let m = BareHomeModel::table1();
        let cfg = PortfolioConfig::default();
        let bare = evaluate_dwelling(&house(), &m, &cfg).unwrap();
        let r = DwellingRecord { multi_glaze_proportion: 0.85, low_energy_lighting: 0.53, loft_insulation_thickness: 9.2, ..house() };
        let part = evaluate_dwelling(&r, &m, &cfg).unwrap();
        assert_eq!(part.e0, bare.e0);
        for p in [Project::LoftInsulation, Project::Windows, Project::Lighting] {
            assert!(get(&part, p).energy < get(&bare, p).energy, "{p}");
        }
        assert_eq!(get(&part, Project::Windows).route, Some(crate::retrofit::GlazingRoute::UpgradeDoublesToTriple));
    }

    #[test]
    fn measured_source_uses_recorded_consumption() {
        let m = BareHomeModel::table1();
        let cfg = PortfolioConfig { e0_source: E0Source::Measured, ..PortfolioConfig::default() };
        let e = evaluate_dwelling(&house(), &m, &cfg).unwrap();
        let want = 20000.0 * m.rescale.factor(crate::model::DwellingGroup::House).unwrap();
        assert!((e.e0 - want).abs() < 1e-9);
    }

    #[test]
    fn unencodable_records_are_skipped() {
        let m = BareHomeModel::table1();
        let bad = DwellingRecord { id: "bad".into(), floor_area: -1.0, ..house() };
        let (ok, skipped) = evaluate_all(&[house(), bad], &m, &PortfolioConfig::default());
        assert_eq!(ok.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].id, "bad");
    }
}
