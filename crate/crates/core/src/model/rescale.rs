//! Undoes the retrofit work already present in the average dwelling so
//! that regression predictions refer to the bare home.

use serde::{Deserialize, Serialize};

use crate::ingest::{DwellingRecord, PropertyType};
use crate::retrofit::insulation_fraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DwellingGroup {
    House,
    Other,
}

impl From<PropertyType> for DwellingGroup {
    fn from(p: PropertyType) -> Self {
        if p.is_house() {
            DwellingGroup::House
        } else {
            DwellingGroup::Other
        }
    }
}

/// Mean retrofit presence within a dwelling group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupPresence {
    /// Mean multi-glazed fraction λ̄.
    pub glazing: f64,
    /// Mean LED ratio K/N.
    pub lighting: f64,
    /// Mean loft insulation, cm. `None` drops the insulation term.
    pub loft_cm: Option<f64>,
}

impl GroupPresence {
    pub const BARE: GroupPresence = GroupPresence { glazing: 0.0, lighting: 0.0, loft_cm: None };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleParams {
    pub alpha_w: f64,
    pub alpha_l: f64,
    pub alpha_i: f64,
    pub beta: f64,
    pub u_single: f64,
    pub u_double: f64,
    pub kr_over_lr: f64,
    pub kappa_i: f64,
    pub house: GroupPresence,
    pub other: GroupPresence,
}

impl Default for RescaleParams {
    /// London means: houses (0.85, 0.53, 9.2 cm), others (0.78, 0.60).
    fn default() -> Self {
        RescaleParams {
            alpha_w: 0.12,
            alpha_l: 0.03,
            alpha_i: 0.06,
            beta: 0.25,
            u_single: 5.74,
            u_double: 2.7,
            kr_over_lr: 1.06,
            kappa_i: 0.03,
            house: GroupPresence { glazing: 0.85, lighting: 0.53, loft_cm: Some(9.2) },
            other: GroupPresence { glazing: 0.78, lighting: 0.60, loft_cm: None },
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RescaleError {
    #[error("invalid rescale parameter {name} = {value}")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("rescale bracket is {0}; parameters are degenerate")]
    Degenerate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub value: f64,
    pub factor: f64,
    pub bracket: f64,
}

impl RescaleParams {
    pub fn presence(&self, group: DwellingGroup) -> &GroupPresence {
        match group {
            DwellingGroup::House => &self.house,
            DwellingGroup::Other => &self.other,
        }
    }

    pub fn validate(&self) -> Result<(), RescaleError> {
        let open = [("alpha_w", self.alpha_w), ("alpha_l", self.alpha_l), ("alpha_i", self.alpha_i), ("beta", self.beta)];
        for (name, value) in open {
            if !(value > 0.0 && value < 1.0) {
                return Err(RescaleError::InvalidParam { name, value });
            }
        }
        let pos = [("kr_over_lr", self.kr_over_lr), ("kappa_i", self.kappa_i), ("u_double", self.u_double)];
        for (name, value) in pos {
            if !(value > 0.0 && value.is_finite()) {
                return Err(RescaleError::InvalidParam { name, value });
            }
        }
        if !(self.u_single > self.u_double) {
            return Err(RescaleError::InvalidParam { name: "u_single", value: self.u_single });
        }
        for g in [&self.house, &self.other] {
            for (name, value) in [("glazing", g.glazing), ("lighting", g.lighting)] {
                if !(0.0..=1.0).contains(&value) {
                    return Err(RescaleError::InvalidParam { name, value });
                }
            }
            if let Some(l) = g.loft_cm {
                if !(l >= 0.0 && l.is_finite()) {
                    return Err(RescaleError::InvalidParam { name: "loft_cm", value: l });
                }
            }
        }
        Ok(())
    }

    /// `1 − Σ` retrofit shares present in the group's average dwelling.
    pub fn bracket(&self, group: DwellingGroup) -> f64 {
        let g = self.presence(group);
        let windows = self.alpha_w * g.glazing * (self.u_single - self.u_double) / self.u_single;
        let lighting = self.alpha_l * (1.0 - self.beta) * g.lighting;
        let loft = g
            .loft_cm
            .map_or(0.0, |cm| self.alpha_i * insulation_fraction(cm / 100.0, self.kr_over_lr, self.kappa_i));
        1.0 - windows - lighting - loft
    }

    pub fn factor(&self, group: DwellingGroup) -> Result<f64, RescaleError> {
        self.validate()?;
        let b = self.bracket(group);
        if !(b > 0.0) {
            return Err(RescaleError::Degenerate(b));
        }
        Ok(1.0 / b)
    }
}

pub fn rescale_to_bare(ebar: f64, group: DwellingGroup, params: &RescaleParams) -> Result<Rescaled, RescaleError> {
    let factor = params.factor(group)?;
    Ok(Rescaled { value: ebar * factor, factor, bracket: params.bracket(group) })
}

/// Group means of glazing, LED ratio and (houses only) loft thickness.
pub fn presence_from_records(records: &[DwellingRecord]) -> (Option<GroupPresence>, Option<GroupPresence>) {
    let mean = |group: DwellingGroup| {
        let rs: Vec<&DwellingRecord> =
            records.iter().filter(|r| DwellingGroup::from(r.property_type) == group).collect();
        if rs.is_empty() {
            return None;
        }
        let n = rs.len() as f64;
        Some(GroupPresence {
            glazing: rs.iter().map(|r| r.multi_glaze_proportion).sum::<f64>() / n,
            lighting: rs.iter().map(|r| r.low_energy_lighting).sum::<f64>() / n,
            loft_cm: (group == DwellingGroup::House)
                .then(|| rs.iter().map(|r| r.loft_insulation_thickness).sum::<f64>() / n),
        })
    };
    (mean(DwellingGroup::House), mean(DwellingGroup::Other))
}
