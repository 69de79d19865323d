//! Borough names and the registry that normalizes raw EPC labels onto them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

const HOUSE_RATIO_CSV: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/house_ratio.csv"));
const ALIASES_CSV: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/borough_aliases.csv"));

/// Canonical borough name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Borough(String);

impl Borough {
    pub fn new(name: impl Into<String>) -> Self {
        Borough(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Borough {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trim, case-fold, `&` → `and`, hyphens to spaces, collapse whitespace.
pub fn normalize_label(raw: &str) -> String {
    let lowered = raw.trim().to_lowercase().replace('&', " and ").replace(['-', '_', ','], " ");
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Known boroughs keyed by normalized label. Extensible with custom names
/// and aliases.
#[derive(Debug, Clone, Default)]
pub struct BoroughRegistry {
    by_key: BTreeMap<String, Borough>,
}

impl BoroughRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The 33 London local authorities plus the shipped alias table.
    pub fn london() -> Self {
        let mut reg = Self::empty();
        for (name, _) in parse_two_columns(HOUSE_RATIO_CSV) {
            reg.insert(&name);
        }
        for (alias, canonical) in parse_two_columns(ALIASES_CSV) {
            reg.alias(&alias, &canonical);
        }
        reg
    }

    pub fn insert(&mut self, canonical: &str) -> Borough {
        let b = Borough::new(canonical.trim());
        self.by_key.insert(normalize_label(canonical), b.clone());
        b
    }

    /// Maps `alias` onto an existing or new canonical name.
    pub fn alias(&mut self, alias: &str, canonical: &str) {
        let b = match self.by_key.get(&normalize_label(canonical)) {
            Some(b) => b.clone(),
            None => self.insert(canonical),
        };
        self.by_key.insert(normalize_label(alias), b);
    }

    pub fn resolve(&self, raw: &str) -> Option<Borough> {
        self.by_key.get(&normalize_label(raw)).cloned()
    }

    /// Distinct canonical names, sorted.
    pub fn boroughs(&self) -> Vec<Borough> {
        let mut v: Vec<Borough> = self.by_key.values().cloned().collect();
        v.sort();
        v.dedup();
        v
    }
}

/// House-to-dwelling ratio per borough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseRatios(pub BTreeMap<Borough, f64>);

impl HouseRatios {
    /// Ratios shipped in `data/house_ratio.csv`.
    pub fn london() -> Self {
        let map = parse_two_columns(HOUSE_RATIO_CSV)
            .into_iter()
            .map(|(b, r)| (Borough::new(b), r.parse::<f64>().expect("house_ratio.csv holds numeric ratios")))
            .collect();
        HouseRatios(map)
    }

    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self, csv::Error> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut map = BTreeMap::new();
        for row in rdr.deserialize::<(String, f64)>() {
            let (b, r) = row?;
            map.insert(Borough::new(b.trim()), r);
        }
        Ok(HouseRatios(map))
    }

    pub fn get(&self, b: &Borough) -> Option<f64> {
        self.0.get(b).copied()
    }
}

fn parse_two_columns(text: &str) -> Vec<(String, String)> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| l.split_once(','))
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .collect()
}
