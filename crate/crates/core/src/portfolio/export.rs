use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::{BoroughAggregate, ProjectAggregate};
use super::totals::StockTotals;
use super::PortfolioError;
use crate::ingest::Borough;
use crate::retrofit::Project;
use crate::uncertainty::McSummary;

/// Metrics accepted by [`heatmap_table`].
pub const METRICS: [&str; 7] = ["energy", "carbon", "money", "cost", "roi_years", "consumption", "floor_area"];

fn unit_of(metric: &str) -> &'static str {
    match metric {
        "energy" | "consumption" | "e0" => "kWh/yr",
        "carbon" => "kgCO2/yr",
        "money" => "GBP/yr",
        "cost" => "GBP",
        "roi_years" => "years",
        "floor_area" => "m2",
        other => unreachable!("no unit for metric {other}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub borough: Borough,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSeries {
    /// `None` for dwelling-level metrics such as consumption.
    pub project: Option<Project>,
    pub rows: Vec<HeatmapRow>,
}

/// One metric per borough, one series per project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapTable {
    pub metric: String,
    pub unit: String,
    pub series: Vec<HeatmapSeries>,
}

fn project_metric<'a>(pa: &'a ProjectAggregate, metric: &str) -> Option<&'a McSummary> {
    match metric {
        "energy" => Some(&pa.energy),
        "carbon" => Some(&pa.carbon),
        "money" => Some(&pa.money),
        "cost" => Some(&pa.cost),
        _ => pa.roi_years.as_ref(),
    }
}

fn row(borough: &Borough, s: &McSummary) -> HeatmapRow {
    HeatmapRow { borough: borough.clone(), n: s.n, mean: s.mean, std: s.std }
}

pub fn heatmap_table(aggregates: &[BoroughAggregate], metric: &str) -> Result<HeatmapTable, PortfolioError> {
    if !METRICS.contains(&metric) {
        return Err(PortfolioError::UnknownMetric { metric: metric.to_string(), valid: METRICS.join(", ") });
    }
    let series = match metric {
        "consumption" => vec![HeatmapSeries {
            project: None,
            rows: aggregates.iter().map(|a| row(&a.borough, &a.consumption)).collect(),
        }],
        "floor_area" => vec![HeatmapSeries {
            project: None,
            rows: aggregates.iter().map(|a| row(&a.borough, &a.floor_area)).collect(),
        }],
        _ => Project::ALL
            .into_iter()
            .map(|p| HeatmapSeries {
                project: Some(p),
                rows: aggregates
                    .iter()
                    .filter_map(|a| a.projects.get(&p).and_then(|pa| project_metric(pa, metric)).map(|s| row(&a.borough, s)))
                    .collect(),
            })
            .collect(),
    };
    Ok(HeatmapTable { metric: metric.to_string(), unit: unit_of(metric).to_string(), series })
}

impl HeatmapTable {
    pub fn to_json(&self) -> Result<String, PortfolioError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self, PortfolioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Long format: `borough,n,mean,std,project`; project is empty for
    /// dwelling-level metrics.
    pub fn to_csv(&self) -> Result<String, PortfolioError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["borough", "n", "mean", "std", "project"])?;
        for s in &self.series {
            let key = s.project.map_or("", Project::key);
            for r in &s.rows {
                w.write_record([r.borough.as_str(), &r.n.to_string(), &r.mean.to_string(), &r.std.to_string(), key])?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
    }
}

/// Writes CSV for a `.csv` path, JSON otherwise.
pub fn export_heatmap_table(aggregates: &[BoroughAggregate], metric: &str, path: &Path) -> Result<(), PortfolioError> {
    let t = heatmap_table(aggregates, metric)?;
    let body = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) { t.to_csv()? } else { t.to_json()? };
    fs::write(path, body)?;
    Ok(())
}

pub const BOROUGHS_HEADER: [&str; 12] =
    ["borough", "project", "metric", "n", "mean", "std", "min", "q25", "q50", "q75", "max", "unit"];

fn summary_record(borough: &Borough, project: &str, metric: &str, s: &McSummary) -> Vec<String> {
    let mut r = vec![borough.to_string(), project.to_string(), metric.to_string(), s.n.to_string()];
    r.extend([s.mean, s.std, s.min, s.q25, s.q50, s.q75, s.max].iter().map(f64::to_string));
    r.push(unit_of(metric).to_string());
    r
}

/// Long-format borough table: one row per borough, project and metric.
/// Dwelling-level rows carry the project `all` (and `house` for the
/// house-only consumption).
pub fn boroughs_csv(aggregates: &[BoroughAggregate]) -> Result<String, PortfolioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOROUGHS_HEADER)?;
    for a in aggregates {
        w.write_record(summary_record(&a.borough, "all", "consumption", &a.consumption))?;
        if let Some(h) = &a.house_consumption {
            w.write_record(summary_record(&a.borough, "house", "consumption", h))?;
        }
        w.write_record(summary_record(&a.borough, "all", "e0", &a.e0))?;
        w.write_record(summary_record(&a.borough, "all", "floor_area", &a.floor_area))?;
        for (p, pa) in &a.projects {
            for (m, s) in [("energy", &pa.energy), ("carbon", &pa.carbon), ("money", &pa.money), ("cost", &pa.cost)] {
                w.write_record(summary_record(&a.borough, p.key(), m, s))?;
            }
            if let Some(s) = &pa.roi_years {
                w.write_record(summary_record(&a.borough, p.key(), "roi_years", s))?;
            }
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

pub fn totals_csv(totals: &StockTotals) -> Result<String, PortfolioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["project", "dwellings", "energy_kwh", "carbon_kg", "money_gbp", "cost_gbp", "roi_years"])?;
    for t in &totals.projects {
        w.write_record([
            t.project.key().to_string(),
            t.dwellings.to_string(),
            t.energy.to_string(),
            t.carbon.to_string(),
            t.money.to_string(),
            t.cost.to_string(),
            t.roi_years.map_or_else(String::new, |r| r.to_string()),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv output is utf-8"))
}

pub fn heatmap_file_name(metric: &str) -> String {
    format!("heatmap_{metric}.json")
}

/// `portfolio_boroughs.csv`, `portfolio_totals.csv` and one
/// `heatmap_<metric>.json` per metric.
pub fn write_outputs(dir: &Path, aggregates: &[BoroughAggregate], totals: &StockTotals) -> Result<(), PortfolioError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("portfolio_boroughs.csv"), boroughs_csv(aggregates)?)?;
    fs::write(dir.join("portfolio_totals.csv"), totals_csv(totals)?)?;
    for m in METRICS {
        fs::write(dir.join(heatmap_file_name(m)), heatmap_table(aggregates, m)?.to_json()?)?;
    }
    Ok(())
}
