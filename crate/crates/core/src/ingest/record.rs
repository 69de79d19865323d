use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::borough::Borough;

/// Error returned when a category label cannot be mapped onto a known level.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {family} label {label:?}")]
pub struct UnknownLabel {
    pub family: &'static str,
    pub label: String,
}

fn squash(label: &str) -> String {
    label
        .trim()
        .to_ascii_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropertyType {
    House,
    Flat,
    Bungalow,
    Maisonette,
    ParkHome,
}

impl PropertyType {
    pub const ALL: [PropertyType; 5] = [
        PropertyType::House,
        PropertyType::Flat,
        PropertyType::Bungalow,
        PropertyType::Maisonette,
        PropertyType::ParkHome,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PropertyType::House => "House",
            PropertyType::Flat => "Flat",
            PropertyType::Bungalow => "Bungalow",
            PropertyType::Maisonette => "Maisonette",
            PropertyType::ParkHome => "Park Home",
        }
    }

    pub fn is_house(self) -> bool {
        self == PropertyType::House
    }
}

impl FromStr for PropertyType {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match squash(s).as_str() {
            "house" => Ok(PropertyType::House),
            "flat" => Ok(PropertyType::Flat),
            "bungalow" => Ok(PropertyType::Bungalow),
            "maisonette" => Ok(PropertyType::Maisonette),
            "parkhome" => Ok(PropertyType::ParkHome),
            _ => Err(UnknownLabel { family: "property_type", label: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuiltForm {
    Detached,
    SemiDetached,
    EndTerrace,
    MidTerrace,
    EnclosedEndTerrace,
    EnclosedMidTerrace,
}

impl BuiltForm {
    pub const ALL: [BuiltForm; 6] = [
        BuiltForm::Detached,
        BuiltForm::SemiDetached,
        BuiltForm::EndTerrace,
        BuiltForm::MidTerrace,
        BuiltForm::EnclosedEndTerrace,
        BuiltForm::EnclosedMidTerrace,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BuiltForm::Detached => "Detached",
            BuiltForm::SemiDetached => "Semi-Detached",
            BuiltForm::EndTerrace => "End-Terrace",
            BuiltForm::MidTerrace => "Mid-Terrace",
            BuiltForm::EnclosedEndTerrace => "Enclosed End-Terrace",
            BuiltForm::EnclosedMidTerrace => "Enclosed Mid-Terrace",
        }
    }
}

impl FromStr for BuiltForm {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match squash(s).as_str() {
            "detached" => Ok(BuiltForm::Detached),
            "semidetached" => Ok(BuiltForm::SemiDetached),
            "endterrace" => Ok(BuiltForm::EndTerrace),
            "midterrace" => Ok(BuiltForm::MidTerrace),
            "enclosedendterrace" => Ok(BuiltForm::EnclosedEndTerrace),
            "enclosedmidterrace" => Ok(BuiltForm::EnclosedMidTerrace),
            _ => Err(UnknownLabel { family: "built_form", label: s.to_string() }),
        }
    }
}

/// Construction age band. Labels follow the EPC bands, with the last band
/// widened to 2012-2022.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    #[serde(rename = "pre1900")]
    Pre1900,
    #[serde(rename = "1900-1929")]
    B1900To1929,
    #[serde(rename = "1930-1949")]
    B1930To1949,
    #[serde(rename = "1950-1966")]
    B1950To1966,
    #[serde(rename = "1967-1975")]
    B1967To1975,
    #[serde(rename = "1976-1982")]
    B1976To1982,
    #[serde(rename = "1983-1990")]
    B1983To1990,
    #[serde(rename = "1991-1995")]
    B1991To1995,
    #[serde(rename = "1996-2002")]
    B1996To2002,
    #[serde(rename = "2003-2006")]
    B2003To2006,
    #[serde(rename = "2007-2011")]
    B2007To2011,
    #[serde(rename = "2012-2022")]
    B2012To2022,
}

impl AgeBand {
    pub const ALL: [AgeBand; 12] = [
        AgeBand::Pre1900,
        AgeBand::B1900To1929,
        AgeBand::B1930To1949,
        AgeBand::B1950To1966,
        AgeBand::B1967To1975,
        AgeBand::B1976To1982,
        AgeBand::B1983To1990,
        AgeBand::B1991To1995,
        AgeBand::B1996To2002,
        AgeBand::B2003To2006,
        AgeBand::B2007To2011,
        AgeBand::B2012To2022,
    ];

    /// First year of each band; the last band is open-ended.
    const STARTS: [u32; 12] = [0, 1900, 1930, 1950, 1967, 1976, 1983, 1991, 1996, 2003, 2007, 2012];

    pub fn label(self) -> &'static str {
        match self {
            AgeBand::Pre1900 => "pre1900",
            AgeBand::B1900To1929 => "1900-1929",
            AgeBand::B1930To1949 => "1930-1949",
            AgeBand::B1950To1966 => "1950-1966",
            AgeBand::B1967To1975 => "1967-1975",
            AgeBand::B1976To1982 => "1976-1982",
            AgeBand::B1983To1990 => "1983-1990",
            AgeBand::B1991To1995 => "1991-1995",
            AgeBand::B1996To2002 => "1996-2002",
            AgeBand::B2003To2006 => "2003-2006",
            AgeBand::B2007To2011 => "2007-2011",
            AgeBand::B2012To2022 => "2012-2022",
        }
    }

    pub fn from_year(year: u32) -> AgeBand {
        let idx = Self::STARTS.iter().rposition(|&start| year >= start).unwrap_or(0);
        Self::ALL[idx]
    }
}

impl FromStr for AgeBand {
    type Err = UnknownLabel;

    /// Accepts canonical labels, EPC labels ("England and Wales: 1930-1949",
    /// "England and Wales: before 1900", "2012 onwards") and bare years.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || UnknownLabel { family: "age_band", label: s.to_string() };
        let body = match s.rsplit_once(':') {
            Some((_, rest)) => rest,
            None => s,
        };
        let body = body.trim().to_ascii_lowercase();
        if body.is_empty() {
            return Err(err());
        }
        if matches!(body.as_str(), "pre1900" | "pre-1900" | "before 1900" | "pre 1900") {
            return Ok(AgeBand::Pre1900);
        }
        if let Some(band) = AgeBand::ALL.iter().find(|b| b.label() == body) {
            return Ok(*band);
        }
        if let Ok(year) = body.parse::<u32>() {
            if (1000..=2100).contains(&year) {
                return Ok(AgeBand::from_year(year));
            }
            return Err(err());
        }
        // "2012 onwards", "2012-2021", "2022 onwards"
        let leading: String = body.chars().take_while(|c| c.is_ascii_digit()).collect();
        if leading.len() == 4 {
            let year: u32 = leading.parse().map_err(|_| err())?;
            if year >= 2012 && (body.ends_with("onwards") || body.contains('-')) {
                return Ok(AgeBand::B2012To2022);
            }
        }
        Err(err())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Fuel {
    Gas,
    Electricity,
}

impl Fuel {
    pub fn label(self) -> &'static str {
        match self {
            Fuel::Gas => "Gas",
            Fuel::Electricity => "Electricity",
        }
    }
}

impl FromStr for Fuel {
    type Err = UnknownLabel;

    /// Matches EPC free-text fuel descriptions such as "mains gas (not community)".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        if lower.contains("electric") {
            Ok(Fuel::Electricity)
        } else if lower.contains("gas") && !lower.contains("lpg") && !lower.contains("bottled") {
            Ok(Fuel::Gas)
        } else {
            Err(UnknownLabel { family: "main_fuel", label: s.to_string() })
        }
    }
}

macro_rules! display_label {
    ($($ty:ty),*) => {
        $(impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        })*
    };
}

display_label!(PropertyType, BuiltForm, AgeBand, Fuel);

/// One cleaned EPC-style observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwellingRecord {
    pub id: String,
    pub borough: Borough,
    pub property_type: PropertyType,
    pub built_form: BuiltForm,
    pub age_band: AgeBand,
    /// m²
    pub floor_area: f64,
    /// m; `None` until imputed.
    pub floor_height: Option<f64>,
    /// kWh/year
    pub annual_consumption: f64,
    /// Fraction of window area already multi-glazed, in [0, 1].
    pub multi_glaze_proportion: f64,
    /// Fraction of light outlets already low-energy, in [0, 1].
    pub low_energy_lighting: f64,
    /// cm
    pub loft_insulation_thickness: f64,
    pub main_fuel: Fuel,
    pub has_heat_pump: bool,
}

/// Minimum admissible floor area (exclusive), m².
pub const MIN_FLOOR_AREA: f64 = 10.0;
/// Admissible floor height interval (inclusive), m.
pub const FLOOR_HEIGHT_RANGE: (f64, f64) = (1.0, 10.0);

pub fn height_in_range(h: f64) -> bool {
    h >= FLOOR_HEIGHT_RANGE.0 && h <= FLOOR_HEIGHT_RANGE.1
}

impl DwellingRecord {
    /// Checks the record-level invariants that do not depend on cleaning.
    /// Returns the name of the first violated rule.
    pub fn violation(&self) -> Option<&'static str> {
        if !(self.floor_area > MIN_FLOOR_AREA) {
            return Some("area ≤ 10 m²");
        }
        if !(self.annual_consumption > 0.0) {
            return Some("consumption ≤ 0");
        }
        if !(0.0..=1.0).contains(&self.multi_glaze_proportion) {
            return Some("multi_glaze_proportion outside [0,1]");
        }
        if !(0.0..=1.0).contains(&self.low_energy_lighting) {
            return Some("low_energy_lighting outside [0,1]");
        }
        if !(self.loft_insulation_thickness >= 0.0) {
            return Some("loft insulation < 0");
        }
        if let Some(h) = self.floor_height {
            if !(h > 0.0) {
                return Some("floor height ≤ 0");
            }
        }
        None
    }

    /// Height if it lies in the admissible interval.
    pub fn valid_height(&self) -> Option<f64> {
        self.floor_height.filter(|h| height_in_range(*h))
    }
}
