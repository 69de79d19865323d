use std::fmt::Write;

use super::propagate::{McReport, McSummary};
use super::scenario::ScenarioReport;

/// Two decimals, ties to even.
pub fn fmt2(x: f64) -> String {
    let v = (x * 100.0).round_ties_even() / 100.0;
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.2}")
}

const ROWS: [&str; 8] = ["Sample Size", "Mean", "Std", "Min", "25%", "50%", "75%", "Max"];

fn cells(s: &McSummary) -> [String; 8] {
    [
        s.n.to_string(),
        fmt2(s.mean),
        fmt2(s.std),
        fmt2(s.min),
        fmt2(s.q25),
        fmt2(s.q50),
        fmt2(s.q75),
        fmt2(s.max),
    ]
}

fn columns(r: &McReport) -> Vec<(&'static str, &McSummary)> {
    vec![("kWh", &r.energy), ("kgCO2", &r.carbon), ("GBP", &r.money), ("Cost GBP", &r.cost)]
}

/// Rows Sample Size … Max, one column per output.
pub fn mc_table_text(r: &McReport) -> String {
    let cols = columns(r);
    let body: Vec<[String; 8]> = cols.iter().map(|(_, s)| cells(s)).collect();
    let width = body.iter().flatten().map(String::len).chain(cols.iter().map(|(h, _)| h.len())).max().unwrap_or(8) + 2;
    let mut out = String::new();
    write!(out, "{:<12}", "").unwrap();
    for (h, _) in &cols {
        write!(out, "{h:>width$}").unwrap();
    }
    out.push('\n');
    for (i, label) in ROWS.iter().enumerate() {
        write!(out, "{label:<12}").unwrap();
        for c in &body {
            write!(out, "{:>width$}", c[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn mc_table_csv(r: &McReport) -> String {
    let cols = columns(r);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![""];
    header.extend(cols.iter().map(|(h, _)| *h));
    w.write_record(&header).unwrap();
    let body: Vec<[String; 8]> = cols.iter().map(|(_, s)| cells(s)).collect();
    for (i, label) in ROWS.iter().enumerate() {
        let mut rec = vec![label.to_string()];
        rec.extend(body.iter().map(|c| c[i].clone()));
        w.write_record(&rec).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn pm(s: &McSummary) -> String {
    format!("{:.0} (±{:.0})", s.mean, s.std)
}

/// Human summary block with mean (±std) per quantity.
pub fn scenario_text(r: &ScenarioReport) -> String {
    let mut out = String::new();
    writeln!(out, "{}", r.title).unwrap();
    let c = &r.central;
    match &r.mc {
        Some(mc) => {
            writeln!(out, "  Energy savings (kWh/yr):     {}", pm(&mc.energy)).unwrap();
            writeln!(out, "  CO2 savings (kg/yr):         {}", pm(&mc.carbon)).unwrap();
            writeln!(out, "  Money savings (GBP/yr):      {}", pm(&mc.money)).unwrap();
            writeln!(out, "  Cost (GBP):                  {}", pm(&mc.cost)).unwrap();
            match &mc.roi_years {
                Some(roi) => writeln!(out, "  ROI (years):                 {:.1} (±{:.1})", roi.mean, roi.std).unwrap(),
                None => writeln!(out, "  ROI (years):                 not recoverable").unwrap(),
            }
            writeln!(out, "  Demand reduction (%):        {}", pm(&mc.demand_reduction_pct)).unwrap();
            writeln!(out, "  CO2 reduction (%):           {}", pm(&mc.co2_reduction_pct)).unwrap();
            writeln!(out, "  Draws: {} ({} rejected), seed {}", mc.n_requested, mc.n_rejected, mc.seed).unwrap();
        }
        None => {
            writeln!(out, "  Energy savings (kWh/yr):     {}", fmt2(c.energy)).unwrap();
            writeln!(out, "  CO2 savings (kg/yr):         {}", fmt2(c.carbon)).unwrap();
            writeln!(out, "  Money savings (GBP/yr):      {}", fmt2(c.money)).unwrap();
            writeln!(out, "  Cost (GBP):                  {}", fmt2(c.cost)).unwrap();
            match c.roi_years {
                Some(roi) => writeln!(out, "  ROI (years):                 {}", fmt2(roi)).unwrap(),
                None => writeln!(out, "  ROI (years):                 not recoverable").unwrap(),
            }
            writeln!(out, "  Demand reduction (%):        {}", fmt2(r.central_demand_reduction_pct)).unwrap();
            writeln!(out, "  CO2 reduction (%):           {}", fmt2(r.central_co2_reduction_pct)).unwrap();
        }
    }
    for w in &c.warnings {
        writeln!(out, "  warning: {w}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_round_to_even() {
        assert_eq!(fmt2(0.125), "0.12");
        assert_eq!(fmt2(0.375), "0.38");
        assert_eq!(fmt2(-2.5), "-2.50");
        assert_eq!(fmt2(2.0), "2.00");
        assert_eq!(fmt2(-0.001), "0.00");
    }

    #[test]
    fn table_layout() {
        let s = McSummary { n: 1000, mean: 1.0, std: 0.5, min: 0.0, q25: 0.5, q50: 1.0, q75: 1.5, max: 2.0 };
        let r = McReport {
            n_requested: 1000,
            n_rejected: 0,
            seed: 0,
            energy: s,
            carbon: s,
            money: s,
            cost: s,
            roi_years: None,
            roi_undefined: 0,
            demand_reduction_pct: s,
            co2_reduction_pct: s,
        };
        let t = mc_table_text(&r);
        assert_eq!(t.lines().count(), 9);
        assert!(t.lines().nth(1).unwrap().starts_with("Sample Size"));
        let c = mc_table_csv(&r);
        assert_eq!(c.lines().next().unwrap(), ",kWh,kgCO2,GBP,Cost GBP");
        assert_eq!(c.lines().nth(2).unwrap(), "Mean,1.00,1.00,1.00,1.00");
    }
}
