use std::fmt::Write;

use super::ols::RegressionFit;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// Fixed-width coefficient table (Coef., Std.Err., t, P>|t|, 95% CI).
pub fn coefficient_table(fit: &RegressionFit) -> String {
    let w = fit.columns.iter().map(|c| c.len()).max().unwrap_or(0).max(12);
    let mut s = String::new();
    writeln!(s, "{:<w$} {:>10} {:>10} {:>10} {:>7} {:>10} {:>10}", "", "Coef.", "Std.Err.", "t", "P>|t|", "[0.025", "0.975]")
        .unwrap();
    for i in 0..fit.columns.len() {
        writeln!(
            s,
            "{:<w$} {:>10.2} {:>10.2} {:>10} {:>7} {:>10.2} {:>10.2}",
            fit.columns[i],
            fit.coef[i],
            fit.stderr[i],
            opt(fit.t[i]),
            opt(fit.p[i]),
            fit.ci_low[i],
            fit.ci_high[i]
        )
        .unwrap();
    }
    writeln!(s, "n = {}, residual variance = {:.2}", fit.n_obs, fit.residual_variance).unwrap();
    s
}

pub fn coefficient_table_csv(fit: &RegressionFit) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["column", "coef", "std_err", "t", "p", "ci_low", "ci_high"]).unwrap();
    for i in 0..fit.columns.len() {
        let o = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            fit.columns[i].clone(),
            fit.coef[i].to_string(),
            fit.stderr[i].to_string(),
            o(fit.t[i]),
            o(fit.p[i]),
            fit.ci_low[i].to_string(),
            fit.ci_high[i].to_string(),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
