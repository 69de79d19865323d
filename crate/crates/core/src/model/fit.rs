use sha2::{Digest, Sha256};

use super::artifact::{BareHomeModel, ModelError, Provenance};
use super::cv::{cross_validate, CvReport};
use super::design::{Basis, DesignMatrix, DesignSpec};
use super::ols::fit_ols;
use super::rescale::{presence_from_records, RescaleParams};
use super::to_monthly;
use crate::ingest::{
    clean_for_regression, height_statistics, impute_height_and_volume, write_canonical_csv, DwellingRecord, HeightMeans,
};

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub basis: Basis,
    /// `None` skips cross-validation.
    pub cv_k: Option<usize>,
    pub seed: u64,
    /// Heights for property types with no valid observation.
    pub fallback_heights: HeightMeans,
    /// Fractions and U-values; group presences are replaced by the
    /// training-set means when `presence_from_data` is set.
    pub rescale: RescaleParams,
    pub presence_from_data: bool,
    pub source: String,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            basis: Basis::IdealGas,
            cv_k: Some(10),
            seed: 0,
            fallback_heights: HeightMeans::london(),
            rescale: RescaleParams::default(),
            presence_from_data: true,
            source: "training records".to_string(),
        }
    }
}

/// Design matrix and kWh/month response for already-cleaned records.
pub fn training_set(
    records: &[DwellingRecord],
    spec: &DesignSpec,
    means: &HeightMeans,
) -> Result<(DesignMatrix, Vec<f64>), ModelError> {
    let mut x = DesignMatrix::new(spec.columns());
    let mut y = Vec::with_capacity(records.len());
    for r in records {
        let sized = impute_height_and_volume(r, means)?;
        x.push_row(&spec.encode(&sized)?);
        y.push(to_monthly(r.annual_consumption));
    }
    Ok((x, y))
}

pub fn training_sha256(records: &[DwellingRecord]) -> String {
    let mut buf = Vec::new();
    write_canonical_csv(records, &mut buf).expect("writing to memory cannot fail");
    hex::encode(Sha256::digest(&buf))
}

/// Cleans, fits, cross-validates and packages a model.
pub fn fit_model(records: &[DwellingRecord], opts: &FitOptions) -> Result<BareHomeModel, ModelError> {
    let cleaned = clean_for_regression(records);
    let means = height_statistics(&cleaned).means_or(&opts.fallback_heights);
    let spec = DesignSpec::standard(opts.basis);
    let (x, y) = training_set(&cleaned, &spec, &means)?;
    let fit = fit_ols(&x, &y).map_err(|e| ModelError::Fit(e.to_string()))?;
    let cv: Option<CvReport> = match opts.cv_k {
        Some(k) => Some(cross_validate(&x, &y, k, opts.seed).map_err(|e| ModelError::Fit(e.to_string()))?),
        None => None,
    };
    let mut rescale = opts.rescale.clone();
    if opts.presence_from_data {
        let (house, other) = presence_from_records(&cleaned);
        if let Some(h) = house {
            rescale.house = h;
        }
        if let Some(o) = other {
            rescale.other = o;
        }
    }
    let provenance = Provenance {
        source: opts.source.clone(),
        training_sha256: Some(training_sha256(records)),
        n_records: records.len() as u64,
    };
    BareHomeModel::new(spec, fit, cv, means, rescale, provenance)
}
