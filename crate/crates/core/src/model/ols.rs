//! Ordinary least squares via Householder QR.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::design::DesignMatrix;

pub const INTERCEPT: &str = "Intercept";

/// Relative pivot tolerance for the rank check.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OlsError {
    #[error("design has {rows} rows but response has {y} values")]
    DimensionMismatch { rows: usize, y: usize },
    #[error("need more observations than parameters ({n} rows, {p} parameters)")]
    TooFewObservations { n: usize, p: usize },
    #[error("design is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },
    #[error("non-finite value in design or response")]
    NonFinite,
}

/// Coefficient table. Index 0 is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub columns: Vec<String>,
    pub coef: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `None` where the standard error is zero.
    pub t: Vec<Option<f64>>,
    pub p: Vec<Option<f64>>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub residual_variance: f64,
    pub n_obs: u64,
    pub df_resid: u64,
    /// `None` when not reported.
    pub r_squared: Option<f64>,
}

impl RegressionFit {
    pub fn intercept(&self) -> f64 {
        self.coef[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.coef[1..]
    }

    /// `x` excludes the intercept.
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len() + 1, self.coef.len());
        self.coef[0] + self.coef[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == name).map(|i| self.coef[i])
    }
}

/// Fits `y = β0 + Xβ + ε`. The intercept column is prepended internally.
pub fn fit_ols(x: &DesignMatrix, y: &[f64]) -> Result<RegressionFit, OlsError> {
    let n = x.rows();
    if n != y.len() {
        return Err(OlsError::DimensionMismatch { rows: n, y: y.len() });
    }
    let p = x.width() + 1;
    if n <= p {
        return Err(OlsError::TooFewObservations { n, p });
    }
    if y.iter().any(|v| !v.is_finite()) || (0..x.width()).any(|j| x.column(j).iter().any(|v| !v.is_finite())) {
        return Err(OlsError::NonFinite);
    }

    let mut names = Vec::with_capacity(p);
    names.push(INTERCEPT.to_string());
    names.extend(x.names().iter().cloned());

    let mut a: Vec<Vec<f64>> = Vec::with_capacity(p);
    a.push(vec![1.0; n]);
    a.extend((0..x.width()).map(|j| x.column(j).to_vec()));
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut qty = y.to_vec();

    let mut deficient = Vec::new();
    for j in 0..p {
        let (head, tail) = a.split_at_mut(j + 1);
        let col = &mut head[j];
        let alpha = {
            let s = norm(&col[j..]);
            if col[j] > 0.0 { -s } else { s }
        };
        let mut v = col[j..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|e| e * e).sum();
        if vv > 0.0 {
            for c in tail.iter_mut() {
                reflect(&v, vv, &mut c[j..]);
            }
            reflect(&v, vv, &mut qty[j..]);
        }
        col[j] = alpha;
        if col_norms[j] == 0.0 || alpha.abs() <= RANK_TOL * col_norms[j] {
            deficient.push(names[j].clone());
        }
    }
    if !deficient.is_empty() {
        return Err(OlsError::RankDeficient { columns: deficient });
    }

    // R is upper triangular: R[i][j] = a[j][i] for i <= j.
    let r = |i: usize, j: usize| a[j][i];
    let mut coef = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|k| r(i, k) * coef[k]).sum();
        coef[i] = (qty[i] - s) / r(i, i);
    }

    // R⁻¹, column by column; diag((XᵀX)⁻¹) = row norms² of R⁻¹.
    let mut rinv = vec![vec![0.0; p]; p];
    for c in 0..p {
        for i in (0..=c).rev() {
            let e = if i == c { 1.0 } else { 0.0 };
            let s: f64 = ((i + 1)..=c).map(|k| r(i, k) * rinv[k][c]).sum();
            rinv[i][c] = (e - s) / r(i, i);
        }
    }

    let mut rss = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let fitted = coef[0] + (0..x.width()).map(|j| coef[j + 1] * x.column(j)[i]).sum::<f64>();
        rss += (yi - fitted).powi(2);
    }
    let df = n - p;
    let sigma2 = rss / df as f64;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r_squared = Some(if tss > 0.0 { 1.0 - rss / tss } else { 1.0 });

    let tdist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    let tcrit = tdist.inverse_cdf(0.975);
    let stderr: Vec<f64> = rinv.iter().map(|row| (sigma2 * row.iter().map(|v| v * v).sum::<f64>()).sqrt()).collect();
    let t: Vec<Option<f64>> = coef.iter().zip(&stderr).map(|(b, s)| (*s > 0.0).then(|| b / s)).collect();
    let pv = t.iter().map(|t| t.map(|t| (2.0 * (1.0 - tdist.cdf(t.abs()))).clamp(0.0, 1.0))).collect();

    Ok(RegressionFit {
        ci_low: coef.iter().zip(&stderr).map(|(b, s)| b - tcrit * s).collect(),
        ci_high: coef.iter().zip(&stderr).map(|(b, s)| b + tcrit * s).collect(),
        columns: names,
        coef,
        stderr,
        t,
        p: pv,
        residual_variance: sigma2,
        n_obs: n as u64,
        df_resid: df as u64,
        r_squared,
    })
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large volumes
    let m = v.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * v.iter().map(|e| (e / m).powi(2)).sum::<f64>().sqrt()
}

fn reflect(v: &[f64], vv: f64, c: &mut [f64]) {
    let s = 2.0 * v.iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>() / vv;
    for (ci, vi) in c.iter_mut().zip(v) {
        *ci -= s * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(names: &[&str], rows: &[Vec<f64>]) -> DesignMatrix {
        DesignMatrix::from_rows(names.iter().map(|s| s.to_string()).collect(), rows)
    }

    #[test]
    fn exact_line() {
        let x = design(&["x"], &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = [3.0, 5.0, 7.0, 9.0];
        let fit = fit_ols(&x, &y).unwrap();
        assert!((fit.coef[0] - 1.0).abs() < 1e-12);
        assert!((fit.coef[1] - 2.0).abs() < 1e-12);
        assert!(fit.residual_variance < 1e-20);
        assert_eq!(fit.columns, vec!["Intercept", "x"]);
    }

    #[test]
    fn textbook_standard_errors() {
        // y = [1,3,2,5,4], x = [1..5]: slope 0.8, intercept 0.6, s² = 1.2
        let x = design(&["x"], &(1..=5).map(|v| vec![v as f64]).collect::<Vec<_>>());
        let y = [1.0, 3.0, 2.0, 5.0, 4.0];
        let fit = fit_ols(&x, &y).unwrap();
        assert!((fit.coef[1] - 0.8).abs() < 1e-12);
        assert!((fit.coef[0] - 0.6).abs() < 1e-12);
        assert!((fit.residual_variance - 1.2).abs() < 1e-12);
        // se(slope) = sqrt(1.2 / 10), se(intercept) = sqrt(1.2 * (1/5 + 9/10))
        assert!((fit.stderr[1] - (0.12f64).sqrt()).abs() < 1e-12);
        assert!((fit.stderr[0] - (1.2f64 * 1.1).sqrt()).abs() < 1e-12);
        // t_{0.975, 3} = 3.182446305
        let half = fit.ci_high[1] - fit.coef[1];
        assert!((half - 3.182446305284263 * 0.12f64.sqrt()).abs() < 1e-8);
        assert!((fit.r_squared.unwrap() - 0.64).abs() < 1e-12);
        let p = fit.p[1].unwrap();
        assert!((p - 0.10408803866182788).abs() < 1e-6, "{p}");
    }

    #[test]
    fn collinear_columns_are_named() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64, (i % 3) as f64]).collect();
        let err = fit_ols(&design(&["a", "b", "c"], &rows), &[1.0; 10]).unwrap_err();
        assert_eq!(err, OlsError::RankDeficient { columns: vec!["b".into()] });
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 1.0]).collect();
        let err = fit_ols(&design(&["a", "always"], &rows), &[1.0; 10]).unwrap_err();
        assert_eq!(err, OlsError::RankDeficient { columns: vec!["always".into()] });
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 0.0]).collect();
        assert!(matches!(fit_ols(&design(&["a", "never"], &rows), &[1.0; 10]), Err(OlsError::RankDeficient { .. })));
    }

    #[test]
    fn shape_errors() {
        let x = design(&["x"], &[vec![1.0], vec![2.0]]);
        assert!(matches!(fit_ols(&x, &[1.0]), Err(OlsError::DimensionMismatch { .. })));
        assert!(matches!(fit_ols(&x, &[1.0, 2.0]), Err(OlsError::TooFewObservations { n: 2, p: 2 })));
        let x = design(&["x"], &[vec![1.0], vec![2.0], vec![f64::NAN]]);
        assert_eq!(fit_ols(&x, &[1.0, 2.0, 3.0]), Err(OlsError::NonFinite));
    }

    #[test]
    fn zero_residual_gives_no_t() {
        let x = design(&["x"], &[vec![1.0], vec![2.0], vec![3.0]]);
        let fit = fit_ols(&x, &[2.0, 4.0, 6.0]).unwrap();
        assert!(fit.stderr.iter().all(|s| *s < 1e-7));
    }
}
