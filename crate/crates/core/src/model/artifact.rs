//! The persisted model: coefficients, encoding, height means and rescale
//! parameters, guarded by a schema version and a content checksum.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cv::CvReport;
use super::design::{Basis, DesignSpec, EncodeError};
use super::ols::{RegressionFit, INTERCEPT};
use super::rescale::{rescale_to_bare, DwellingGroup, RescaleError, RescaleParams};
use super::{to_annual, to_monthly};
use crate::ingest::{impute_height_and_volume, DwellingRecord, HeightMeans, MissingHeightMean};

pub const MODEL_VERSION: &str = "bare-home-v1";

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unsupported model_version {found:?} (this build reads {expected:?})")]
    Version { found: String, expected: &'static str },
    #[error("artifact checksum mismatch: stored {stored}, computed {computed}")]
    Checksum { stored: String, computed: String },
    #[error("model does not match its design: {0}")]
    SpecMismatch(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Height(#[from] MissingHeightMean),
    #[error(transparent)]
    Rescale(#[from] RescaleError),
    #[error("regression failed: {0}")]
    Fit(String),
    #[error("artifact JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("artifact I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// SHA-256 of the canonical CSV of the training records.
    pub training_sha256: Option<String>,
    pub n_records: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BareHomeModel {
    pub model_version: String,
    pub basis: Basis,
    pub design: DesignSpec,
    #[serde(flatten)]
    pub fit: RegressionFit,
    pub cv: Option<CvReport>,
    pub height_means: HeightMeans,
    pub rescale: RescaleParams,
    pub provenance: Provenance,
    /// SHA-256 of the pretty JSON with this field omitted.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub checksum: String,
}

/// One regression prediction, kWh/month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub ebar: f64,
    /// Linear predictor before clamping at zero.
    pub raw: f64,
    pub clamped: bool,
    pub volume: f64,
}

/// Bare-home demand derived from a record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BareEstimate {
    /// kWh/month before rescale.
    pub ebar_month: f64,
    pub factor: f64,
    /// kWh/yr after rescale.
    pub e0_year: f64,
    pub clamped: bool,
}

impl BareHomeModel {
    pub fn new(
        design: DesignSpec,
        fit: RegressionFit,
        cv: Option<CvReport>,
        height_means: HeightMeans,
        rescale: RescaleParams,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        let mut m = BareHomeModel {
            model_version: MODEL_VERSION.to_string(),
            basis: design.basis,
            design,
            fit,
            cv,
            height_means,
            rescale,
            provenance,
            checksum: String::new(),
        };
        m.validate()?;
        m.checksum = m.compute_checksum()?;
        Ok(m)
    }

    /// Published London coefficients (ideal-gas basis, 2,191,399 dwellings).
    // a standard error of 3.14 is data, not π
    #[allow(clippy::approx_constant)]
    pub fn table1() -> Self {
        // (coef, std err, t, p, ci low, ci high)
        const ROWS: [(f64, f64, f64, f64, f64, f64); 22] = [
            (1048.27, 3.14, 334.04, 0.00, 1042.12, 1054.42),
            (6.36, 0.01, 1235.61, 0.00, 6.35, 6.37),
            (-232.51, 1.41, -165.23, 0.00, -235.27, -229.75),
            (91.52, 4.69, 19.53, 0.00, 82.34, 100.71),
            (-209.86, 2.37, -88.42, 0.00, -214.51, -205.21),
            (245.74, 180.50, 1.36, 0.17, -108.03, 599.52),
            (-159.43, 2.15, -74.00, 0.00, -163.65, -155.21),
            (-205.89, 2.22, -92.83, 0.00, -210.23, -201.54),
            (-403.92, 2.00, -201.49, 0.00, -407.85, -399.99),
            (-218.63, 3.84, -56.86, 0.00, -226.16, -211.09),
            (-318.19, 3.88, -81.96, 0.00, -325.80, -310.58),
            (-70.09, 1.93, -36.39, 0.00, -73.86, -66.31),
            (-161.57, 2.02, -80.11, 0.00, -165.52, -157.62),
            (-304.83, 2.26, -135.09, 0.00, -309.25, -300.41),
            (-316.94, 2.47, -128.56, 0.00, -321.77, -312.11),
            (-482.46, 3.15, -153.05, 0.00, -488.64, -476.28),
            (-460.52, 3.02, -152.65, 0.00, -466.43, -454.60),
            (-486.21, 3.60, -135.24, 0.00, -493.26, -479.17),
            (-674.63, 3.14, -214.79, 0.00, -680.78, -668.47),
            (-814.28, 3.31, -245.74, 0.00, -820.78, -807.79),
            (-917.81, 3.50, -262.13, 0.00, -924.67, -910.94),
            (-1415.19, 4.37, -324.05, 0.00, -1423.75, -1406.63),
        ];
        let design = DesignSpec::standard(Basis::IdealGas);
        let mut columns = vec![INTERCEPT.to_string()];
        columns.extend(design.columns());
        let rows = &ROWS;
        assert_eq!(rows.len(), columns.len());
        let n_obs = 2_191_399u64;
        let fit = RegressionFit {
            coef: rows.iter().map(|r| r.0).collect(),
            stderr: rows.iter().map(|r| r.1).collect(),
            t: rows.iter().map(|r| Some(r.2)).collect(),
            p: rows.iter().map(|r| Some(r.3)).collect(),
            ci_low: rows.iter().map(|r| r.4).collect(),
            ci_high: rows.iter().map(|r| r.5).collect(),
            // only the cross-validated RMSE (675 kWh/month) is published
            residual_variance: 675.0 * 675.0,
            df_resid: n_obs - columns.len() as u64,
            n_obs,
            r_squared: None,
            columns,
        };
        let provenance = Provenance {
            source: "published London EPC regression".to_string(),
            training_sha256: None,
            n_records: n_obs,
        };
        Self::new(design, fit, None, HeightMeans::london(), RescaleParams::default(), provenance)
            .expect("built-in coefficients match the standard design")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.model_version != MODEL_VERSION {
            return Err(ModelError::Version { found: self.model_version.clone(), expected: MODEL_VERSION });
        }
        self.design.validate()?;
        if self.basis != self.design.basis {
            return Err(ModelError::SpecMismatch("basis differs from design basis".into()));
        }
        let mut expected = vec![INTERCEPT.to_string()];
        expected.extend(self.design.columns());
        if self.fit.columns != expected {
            return Err(ModelError::SpecMismatch("coefficient columns differ from the encoded columns".into()));
        }
        let p = expected.len();
        let f = &self.fit;
        for (name, len) in [
            ("coef", f.coef.len()),
            ("stderr", f.stderr.len()),
            ("t", f.t.len()),
            ("p", f.p.len()),
            ("ci_low", f.ci_low.len()),
            ("ci_high", f.ci_high.len()),
        ] {
            if len != p {
                return Err(ModelError::SpecMismatch(format!("{name} has {len} entries, design has {p}")));
            }
        }
        if !(f.residual_variance >= 0.0) {
            return Err(ModelError::SpecMismatch("residual_variance is negative".into()));
        }
        self.rescale.validate()?;
        Ok(())
    }

    fn unsigned_json(&self) -> Result<String, ModelError> {
        let mut copy = self.clone();
        copy.checksum.clear();
        Ok(serde_json::to_string_pretty(&copy)?)
    }

    pub fn compute_checksum(&self) -> Result<String, ModelError> {
        Ok(hex::encode(Sha256::digest(self.unsigned_json()?.as_bytes())))
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        let mut signed = self.clone();
        signed.checksum = self.compute_checksum()?;
        let mut s = serde_json::to_string_pretty(&signed)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let found = value.get("model_version").and_then(|v| v.as_str()).unwrap_or("<missing>");
        if found != MODEL_VERSION {
            return Err(ModelError::Version { found: found.to_string(), expected: MODEL_VERSION });
        }
        let model: BareHomeModel = serde_json::from_value(value)?;
        let computed = model.compute_checksum()?;
        if model.checksum != computed {
            return Err(ModelError::Checksum { stored: model.checksum.clone(), computed });
        }
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Linear predictor for an already-encoded feature vector.
    pub fn predict_features(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() + 1 != self.fit.coef.len() {
            return Err(ModelError::SpecMismatch(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.fit.coef.len() - 1
            )));
        }
        Ok(self.fit.predict(x))
    }

    /// Ē₀ in kWh/month; negative linear predictions are clamped to zero.
    pub fn predict_ebar(&self, record: &DwellingRecord) -> Result<Prediction, ModelError> {
        let sized = impute_height_and_volume(record, &self.height_means)?;
        let raw = self.predict_features(&self.design.encode(&sized)?)?;
        Ok(Prediction { ebar: raw.max(0.0), raw, clamped: raw < 0.0, volume: sized.volume })
    }

    /// E₀ in kWh/yr from the regression prediction.
    pub fn bare_e0(&self, record: &DwellingRecord) -> Result<BareEstimate, ModelError> {
        let pred = self.predict_ebar(record)?;
        let r = rescale_to_bare(pred.ebar, DwellingGroup::from(record.property_type), &self.rescale)?;
        Ok(BareEstimate { ebar_month: pred.ebar, factor: r.factor, e0_year: to_annual(r.value), clamped: pred.clamped })
    }

    /// E₀ in kWh/yr from the record's own measured consumption.
    pub fn bare_e0_measured(&self, record: &DwellingRecord) -> Result<BareEstimate, ModelError> {
        let ebar = to_monthly(record.annual_consumption);
        let r = rescale_to_bare(ebar, DwellingGroup::from(record.property_type), &self.rescale)?;
        Ok(BareEstimate { ebar_month: ebar, factor: r.factor, e0_year: to_annual(r.value), clamped: false })
    }
}
