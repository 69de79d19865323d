use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::evaluate::DwellingEstimate;
use crate::ingest::{Borough, PropertyType};
use crate::retrofit::Project;
use crate::uncertainty::McSummary;

/// Per-project statistics over the dwellings eligible for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectAggregate {
    pub n: usize,
    pub energy: McSummary,
    pub carbon: McSummary,
    pub money: McSummary,
    pub cost: McSummary,
    /// Over dwellings whose money savings are positive.
    pub roi_years: Option<McSummary>,
    pub roi_undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoroughAggregate {
    pub borough: Borough,
    pub n_dwellings: usize,
    pub n_houses: usize,
    /// m²
    pub floor_area: McSummary,
    /// Recorded consumption over all dwellings, kWh/yr.
    pub consumption: McSummary,
    /// Recorded consumption over houses only.
    pub house_consumption: Option<McSummary>,
    pub e0: McSummary,
    pub projects: BTreeMap<Project, ProjectAggregate>,
}

impl BoroughAggregate {
    pub fn mean_consumption(&self) -> f64 {
        self.consumption.mean
    }

    pub fn mean_floor_area(&self) -> f64 {
        self.floor_area.mean
    }
}

fn summary(values: &[f64]) -> McSummary {
    McSummary::from_values(values).expect("group is non-empty")
}

fn project_aggregate(rows: &[&DwellingEstimate], p: Project) -> Option<ProjectAggregate> {
    let ests: Vec<_> = rows.iter().filter_map(|d| d.projects.get(&p)).collect();
    if ests.is_empty() {
        return None;
    }
    let col = |f: fn(&crate::retrofit::ProjectEstimate) -> f64| summary(&ests.iter().map(|e| f(e)).collect::<Vec<_>>());
    let roi: Vec<f64> = ests.iter().filter_map(|e| e.roi_years).collect();
    Some(ProjectAggregate {
        n: ests.len(),
        energy: col(|e| e.energy),
        carbon: col(|e| e.carbon),
        money: col(|e| e.money),
        cost: col(|e| e.cost),
        roi_undefined: ests.len() - roi.len(),
        roi_years: McSummary::from_values(&roi),
    })
}

/// Groups by borough; output sorted by borough name. Input order does not
/// affect any value.
pub fn aggregate_by_borough(estimates: &[DwellingEstimate]) -> Vec<BoroughAggregate> {
    let mut groups: BTreeMap<&Borough, Vec<&DwellingEstimate>> = BTreeMap::new();
    for e in estimates {
        groups.entry(&e.borough).or_default().push(e);
    }
    groups
        .into_iter()
        .map(|(borough, rows)| {
            let houses: Vec<f64> =
                rows.iter().filter(|d| d.property_type == PropertyType::House).map(|d| d.consumption).collect();
            BoroughAggregate {
                borough: borough.clone(),
                n_dwellings: rows.len(),
                n_houses: houses.len(),
                floor_area: summary(&rows.iter().map(|d| d.floor_area).collect::<Vec<_>>()),
                consumption: summary(&rows.iter().map(|d| d.consumption).collect::<Vec<_>>()),
                house_consumption: McSummary::from_values(&houses),
                e0: summary(&rows.iter().map(|d| d.e0).collect::<Vec<_>>()),
                projects: Project::ALL.into_iter().filter_map(|p| project_aggregate(&rows, p).map(|a| (p, a))).collect(),
            }
        })
        .collect()
}
