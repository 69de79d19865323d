use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::aggregate::BoroughAggregate;
use super::PortfolioError;
use crate::ingest::{Borough, HouseRatios};
use crate::retrofit::{roi, Project};

/// Dwellings per borough in the stock being scaled to.
pub type DwellingCounts = BTreeMap<Borough, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoroughCount {
    pub borough: Borough,
    pub dwellings: f64,
    pub house_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectTotal {
    pub project: Project,
    /// Dwellings the totals are scaled over (houses only for house-only projects).
    pub dwellings: f64,
    /// kWh/yr
    pub energy: f64,
    /// kgCO₂/yr
    pub carbon: f64,
    /// £/yr
    pub money: f64,
    /// £
    pub cost: f64,
    pub roi_years: Option<f64>,
    /// Boroughs with no eligible sample for this project.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub uncovered: Vec<Borough>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockTotals {
    pub projects: Vec<ProjectTotal>,
    pub boroughs: Vec<BoroughCount>,
}

impl StockTotals {
    pub fn project(&self, p: Project) -> Option<&ProjectTotal> {
        self.projects.iter().find(|t| t.project == p)
    }
}

/// Borough mean × dwelling count (× house ratio for house-only projects),
/// summed over boroughs.
pub fn stock_totals(
    aggregates: &[BoroughAggregate],
    counts: &DwellingCounts,
    ratios: &HouseRatios,
) -> Result<StockTotals, PortfolioError> {
    let mut boroughs = Vec::with_capacity(aggregates.len());
    for a in aggregates {
        let dwellings = *counts
            .get(&a.borough)
            .ok_or_else(|| PortfolioError::MissingBorough { borough: a.borough.clone(), table: "dwelling counts" })?;
        let house_ratio = ratios
            .get(&a.borough)
            .ok_or_else(|| PortfolioError::MissingBorough { borough: a.borough.clone(), table: "house ratios" })?;
        if !(dwellings >= 0.0 && dwellings.is_finite()) || !(0.0..=1.0).contains(&house_ratio) {
            return Err(PortfolioError::InvalidCount { borough: a.borough.clone(), dwellings, house_ratio });
        }
        boroughs.push(BoroughCount { borough: a.borough.clone(), dwellings, house_ratio });
    }

    let projects = Project::ALL
        .into_iter()
        .map(|p| {
            let mut t = ProjectTotal {
                project: p,
                dwellings: 0.0,
                energy: 0.0,
                carbon: 0.0,
                money: 0.0,
                cost: 0.0,
                roi_years: None,
                uncovered: Vec::new(),
            };
            for (a, c) in aggregates.iter().zip(&boroughs) {
                let scale = if p.house_only() { c.dwellings * c.house_ratio } else { c.dwellings };
                match a.projects.get(&p) {
                    Some(pa) => {
                        t.dwellings += scale;
                        t.energy += pa.energy.mean * scale;
                        t.carbon += pa.carbon.mean * scale;
                        t.money += pa.money.mean * scale;
                        t.cost += pa.cost.mean * scale;
                    }
                    None if scale > 0.0 => t.uncovered.push(a.borough.clone()),
                    None => {}
                }
            }
            t.roi_years = roi(t.cost, t.money);
            t
        })
        .collect();
    Ok(StockTotals { projects, boroughs })
}

/// Counts equal to the sample sizes of the run itself.
pub fn sample_counts(aggregates: &[BoroughAggregate]) -> DwellingCounts {
    aggregates.iter().map(|a| (a.borough.clone(), a.n_dwellings as f64)).collect()
}

/// Reads `borough,dwellings` rows.
pub fn read_counts<R: Read>(reader: R) -> Result<DwellingCounts, PortfolioError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = DwellingCounts::new();
    for row in rdr.deserialize::<(String, f64)>() {
        let (b, n) = row?;
        out.insert(Borough::new(b.trim()), n);
    }
    Ok(out)
}
