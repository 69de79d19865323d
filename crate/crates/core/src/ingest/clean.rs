use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{DwellingRecord, PropertyType};

/// Drops heat-pump dwellings and dwellings with an out-of-range floor
/// height. Order is preserved.
pub fn clean_for_regression(records: &[DwellingRecord]) -> Vec<DwellingRecord> {
    records
        .iter()
        .filter(|r| !r.has_heat_pump)
        .filter(|r| r.floor_height.is_none_or(super::record::height_in_range))
        .cloned()
        .collect()
}

/// Mean floor height per property type, m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightMeans(pub BTreeMap<PropertyType, f64>);

impl HeightMeans {
    /// London EPC averages.
    pub fn london() -> Self {
        HeightMeans(BTreeMap::from([
            (PropertyType::House, 2.53),
            (PropertyType::Flat, 2.53),
            (PropertyType::Maisonette, 2.52),
            (PropertyType::Bungalow, 2.49),
            (PropertyType::ParkHome, 2.55),
        ]))
    }

    pub fn get(&self, p: PropertyType) -> Option<f64> {
        self.0.get(&p).copied()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("no mean floor height configured for property type {0}")]
pub struct MissingHeightMean(pub PropertyType);

/// A record together with the volume used by the regression.
#[derive(Debug, Clone, PartialEq)]
pub struct SizedRecord {
    pub record: DwellingRecord,
    /// m
    pub height: f64,
    /// m³
    pub volume: f64,
    pub height_imputed: bool,
}

pub fn impute_height_and_volume(record: &DwellingRecord, means: &HeightMeans) -> Result<SizedRecord, MissingHeightMean> {
    let (height, imputed) = match record.valid_height() {
        Some(h) => (h, false),
        None => (means.get(record.property_type).ok_or(MissingHeightMean(record.property_type))?, true),
    };
    Ok(SizedRecord { record: record.clone(), height, volume: record.floor_area * height, height_imputed: imputed })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightStat {
    pub n: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightStatistics {
    pub groups: BTreeMap<PropertyType, HeightStat>,
    /// Property types with no valid height; omitted from `groups`.
    pub omitted: Vec<PropertyType>,
}

impl HeightStatistics {
    pub fn means(&self) -> HeightMeans {
        HeightMeans(self.groups.iter().map(|(k, v)| (*k, v.mean)).collect())
    }

    /// Means from the data, falling back to `fallback` for omitted groups.
    pub fn means_or(&self, fallback: &HeightMeans) -> HeightMeans {
        let mut m = fallback.clone();
        m.0.extend(self.groups.iter().map(|(k, v)| (*k, v.mean)));
        m
    }
}

pub fn height_statistics(records: &[DwellingRecord]) -> HeightStatistics {
    let mut buckets: BTreeMap<PropertyType, Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(h) = r.valid_height() {
            buckets.entry(r.property_type).or_default().push(h);
        }
    }
    let groups: BTreeMap<_, _> = buckets
        .into_iter()
        .map(|(p, mut hs)| {
            hs.sort_by(f64::total_cmp);
            let n = hs.len() as f64;
            let mean = hs.iter().sum::<f64>() / n;
            let var = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / n;
            (p, HeightStat { n: hs.len() as u64, mean, std: var.sqrt() })
        })
        .collect();
    let omitted = PropertyType::ALL.iter().filter(|p| !groups.contains_key(p)).copied().collect();
    HeightStatistics { groups, omitted }
}
