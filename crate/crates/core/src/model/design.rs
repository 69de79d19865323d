use serde::{Deserialize, Serialize};

use crate::ingest::{AgeBand, BuiltForm, DwellingRecord, PropertyType, SizedRecord};

/// Feature basis for the volume term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// `[V]`
    #[default]
    IdealGas,
    /// `[V, V⁻¹, V⁻²]`
    VanDerWaals,
}

impl Basis {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Basis::IdealGas => &["Volume"],
            Basis::VanDerWaals => &["Volume", "Volume^-1", "Volume^-2"],
        }
    }

    fn push_terms(self, v: f64, out: &mut Vec<f64>) {
        out.push(v);
        if self == Basis::VanDerWaals {
            out.push(1.0 / v);
            out.push(1.0 / (v * v));
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" | "ideal_gas" | "idealgas" => Ok(Basis::IdealGas),
            "vdw" | "van_der_waals" | "vanderwaals" => Ok(Basis::VanDerWaals),
            other => Err(format!("unknown basis {other:?} (expected ideal or vdw)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PropertyType,
    BuiltForm,
    AgeBand,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::PropertyType => "property_type",
            Family::BuiltForm => "built_form",
            Family::AgeBand => "age_band",
        }
    }

    fn label_of(self, r: &DwellingRecord) -> &'static str {
        match self {
            Family::PropertyType => r.property_type.label(),
            Family::BuiltForm => r.built_form.label(),
            Family::AgeBand => r.age_band.label(),
        }
    }
}

/// One categorical control. `reference` is the dropped level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlFamily {
    pub family: Family,
    pub reference: String,
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("unknown {family} category {label:?}")]
    UnknownCategory { family: &'static str, label: String },
    #[error("volume must be positive and finite, got {0}")]
    InvalidVolume(f64),
    #[error("invalid design spec: {0}")]
    InvalidSpec(String),
}

pub const DESIGN_VERSION: &str = "design-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub version: String,
    pub basis: Basis,
    pub families: Vec<ControlFamily>,
}

impl DesignSpec {
    /// House, Detached and pre-1900 are the reference levels.
    pub fn standard(basis: Basis) -> Self {
        let family = |family, reference: &str, levels: Vec<&str>| ControlFamily {
            family,
            reference: reference.to_string(),
            levels: levels.into_iter().map(str::to_string).collect(),
        };
        DesignSpec {
            version: DESIGN_VERSION.to_string(),
            basis,
            families: vec![
                family(
                    Family::PropertyType,
                    PropertyType::House.label(),
                    PropertyType::ALL[1..].iter().map(|p| p.label()).collect(),
                ),
                family(Family::BuiltForm, BuiltForm::Detached.label(), BuiltForm::ALL[1..].iter().map(|b| b.label()).collect()),
                family(Family::AgeBand, AgeBand::Pre1900.label(), AgeBand::ALL[1..].iter().map(|a| a.label()).collect()),
            ],
        }
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.version != DESIGN_VERSION {
            return Err(EncodeError::InvalidSpec(format!("unsupported design version {:?}", self.version)));
        }
        for f in &self.families {
            if f.levels.contains(&f.reference) {
                return Err(EncodeError::InvalidSpec(format!("{} reference {:?} also listed as a level", f.family.name(), f.reference)));
            }
            let mut seen = f.levels.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != f.levels.len() {
                return Err(EncodeError::InvalidSpec(format!("{} has duplicate levels", f.family.name())));
            }
        }
        Ok(())
    }

    /// Column names without the intercept.
    pub fn columns(&self) -> Vec<String> {
        self.basis
            .names()
            .iter()
            .map(|s| s.to_string())
            .chain(self.families.iter().flat_map(|f| f.levels.iter().cloned()))
            .collect()
    }

    pub fn width(&self) -> usize {
        self.basis.names().len() + self.families.iter().map(|f| f.levels.len()).sum::<usize>()
    }

    /// Basis terms of `volume` followed by one-hot dummies.
    pub fn encode_parts(&self, record: &DwellingRecord, volume: f64) -> Result<Vec<f64>, EncodeError> {
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(EncodeError::InvalidVolume(volume));
        }
        let mut out = Vec::with_capacity(self.width());
        self.basis.push_terms(volume, &mut out);
        for f in &self.families {
            let label = f.family.label_of(record);
            let pos = f.levels.iter().position(|l| l == label);
            if pos.is_none() && f.reference != label {
                return Err(EncodeError::UnknownCategory { family: f.family.name(), label: label.to_string() });
            }
            out.extend((0..f.levels.len()).map(|i| if Some(i) == pos { 1.0 } else { 0.0 }));
        }
        Ok(out)
    }

    pub fn encode(&self, sized: &SizedRecord) -> Result<Vec<f64>, EncodeError> {
        self.encode_parts(&sized.record, sized.volume)
    }
}

/// Column-major design matrix without the intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    cols: Vec<Vec<f64>>,
    rows: usize,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>) -> Self {
        let cols = vec![Vec::new(); names.len()];
        DesignMatrix { names, cols, rows: 0 }
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let mut m = Self::new(names);
        for r in rows {
            m.push_row(r);
        }
        m
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols.len(), "row width must match design width");
        for (c, v) in self.cols.iter_mut().zip(row) {
            c.push(*v);
        }
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.cols.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.cols[j]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[i]).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> DesignMatrix {
        DesignMatrix {
            names: self.names.clone(),
            cols: self.cols.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect(),
            rows: idx.len(),
        }
    }
}
