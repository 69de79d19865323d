use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::DesignMatrix;
use super::ols::{fit_ols, OlsError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CvError {
    #[error("k-fold cross-validation needs k >= 2, got {0}")]
    TooFewFolds(usize),
    #[error("cannot split {n} observations into {k} folds")]
    TooManyFolds { n: usize, k: usize },
    #[error("fold {fold}: {source}")]
    Fit { fold: usize, source: OlsError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub fold_sizes: Vec<usize>,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    /// Sample standard deviation across folds.
    pub std_rmse: f64,
}

/// Shuffles `0..n` with a seeded ChaCha8 stream and cuts it into `k`
/// contiguous folds; the first `n % k` folds get one extra element.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, CvError> {
    if k < 2 {
        return Err(CvError::TooFewFolds(k));
    }
    if k > n {
        return Err(CvError::TooManyFolds { n, k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

pub fn cross_validate(x: &DesignMatrix, y: &[f64], k: usize, seed: u64) -> Result<CvReport, CvError> {
    let folds = kfold_partition(x.rows(), k, seed)?;
    let fold_rmse = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; x.rows()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = (0..x.rows()).filter(|&i| !in_test[i]).collect();
            let ytrain: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let fit = fit_ols(&x.select_rows(&train), &ytrain).map_err(|source| CvError::Fit { fold: f, source })?;
            let sse: f64 = test.iter().map(|&i| (y[i] - fit.predict(&x.row(i))).powi(2)).sum();
            Ok((sse / test.len() as f64).sqrt())
        })
        .collect::<Result<Vec<f64>, CvError>>()?;
    let mean = fold_rmse.iter().sum::<f64>() / k as f64;
    let var = fold_rmse.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    Ok(CvReport {
        k,
        seed,
        fold_sizes: folds.iter().map(Vec::len).collect(),
        fold_rmse,
        mean_rmse: mean,
        std_rmse: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_covers_every_index_once() {
        let folds = kfold_partition(23, 5, 7).unwrap();
        assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![5, 5, 5, 4, 4]);
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert_eq!(folds, kfold_partition(23, 5, 7).unwrap());
        assert_ne!(folds, kfold_partition(23, 5, 8).unwrap());
    }

    #[test]
    fn bad_k() {
        assert_eq!(kfold_partition(10, 1, 0), Err(CvError::TooFewFolds(1)));
        assert_eq!(kfold_partition(3, 4, 0), Err(CvError::TooManyFolds { n: 3, k: 4 }));
    }

    #[test]
    fn noiseless_data_has_zero_rmse() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, ((i * 7) % 5) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 + 2.0 * r[0] - r[1]).collect();
        let x = DesignMatrix::from_rows(vec!["a".into(), "b".into()], &rows);
        let cv = cross_validate(&x, &y, 4, 1).unwrap();
        assert_eq!(cv.fold_rmse.len(), 4);
        assert!(cv.mean_rmse < 1e-9);
    }
}
