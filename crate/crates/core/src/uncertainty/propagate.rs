use std::fmt::Display;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::prior::{ParamDraw, PriorSet, Symbol};
use super::UncertaintyError;

/// Sample statistics in the layout of the published tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1).
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub max: f64,
}

impl McSummary {
    /// `None` for an empty slice. Order of `values` does not matter.
    pub fn from_values(values: &[f64]) -> Option<McSummary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        // a constant sample is summarised exactly
        let mean = if v[0] == v[n - 1] { v[0] } else { v.iter().sum::<f64>() / n as f64 };
        let std = if n > 1 && v[0] != v[n - 1] { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
        Some(McSummary {
            n,
            mean,
            std,
            min: v[0],
            q25: quantile_sorted(&v, 0.25),
            q50: quantile_sorted(&v, 0.5),
            q75: quantile_sorted(&v, 0.75),
            max: v[n - 1],
        })
    }
}

/// Linear interpolation between order statistics at rank (n − 1)·q.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// What one evaluation reports back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSample {
    /// kWh/yr
    pub energy: f64,
    /// kgCO₂/yr
    pub carbon: f64,
    /// £/yr
    pub money: f64,
    /// £
    pub cost: f64,
    /// Baseline demand the energy is compared with, kWh/yr.
    pub e0: f64,
    /// Baseline emissions the carbon is compared with, kgCO₂/yr.
    pub annual_co2: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Applies `max(money, floor)` to every draw before summarising.
    pub money_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n_requested: usize,
    pub n_rejected: usize,
    pub seed: u64,
    pub energy: McSummary,
    pub carbon: McSummary,
    pub money: McSummary,
    pub cost: McSummary,
    /// Over draws with positive money savings only.
    pub roi_years: Option<McSummary>,
    pub roi_undefined: usize,
    pub demand_reduction_pct: McSummary,
    pub co2_reduction_pct: McSummary,
}

/// The draw for index `i`: a pure function of `(seed, i)`.
pub fn draw_for(priors: &PriorSet, seed: u64, i: u64) -> Result<ParamDraw, UncertaintyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    priors.draw(&mut rng)
}

/// Evaluates draws `range` in parallel; result order follows the range.
pub fn draw_samples<F, E>(
    eval: &F,
    priors: &PriorSet,
    seed: u64,
    range: Range<u64>,
) -> Result<Vec<Result<McSample, String>>, UncertaintyError>
where
    F: Fn(&ParamDraw) -> Result<McSample, E> + Sync,
    E: Display,
{
    priors.validate()?;
    Ok(range
        .into_par_iter()
        .map(|i| {
            let d = draw_for(priors, seed, i).map_err(|e| e.to_string())?;
            eval(&d).map_err(|e| e.to_string())
        })
        .collect())
}

/// Reduces evaluated draws; aborts when more than half were rejected.
pub fn summarize(
    samples: &[Result<McSample, String>],
    seed: u64,
    opts: PropagateOptions,
) -> Result<McReport, UncertaintyError> {
    let n = samples.len();
    let ok: Vec<McSample> = samples
        .iter()
        .filter_map(|s| s.as_ref().ok())
        .map(|s| McSample { money: opts.money_floor.map_or(s.money, |f| s.money.max(f)), ..*s })
        .collect();
    let rejected = n - ok.len();
    if ok.is_empty() || rejected * 2 > n {
        let first = samples.iter().find_map(|s| s.as_ref().err()).cloned().unwrap_or_default();
        return Err(UncertaintyError::TooManyRejections { rejected, n, first_error: first });
    }
    let col = |f: fn(&McSample) -> f64| McSummary::from_values(&ok.iter().map(f).collect::<Vec<_>>()).unwrap();
    let roi: Vec<f64> = ok.iter().filter(|s| s.money > 0.0).map(|s| s.cost / s.money).collect();
    Ok(McReport {
        n_requested: n,
        n_rejected: rejected,
        seed,
        energy: col(|s| s.energy),
        carbon: col(|s| s.carbon),
        money: col(|s| s.money),
        cost: col(|s| s.cost),
        roi_undefined: ok.len() - roi.len(),
        roi_years: McSummary::from_values(&roi),
        demand_reduction_pct: col(|s| 100.0 * s.energy / s.e0),
        co2_reduction_pct: col(|s| 100.0 * s.carbon / s.annual_co2),
    })
}

/// Runs `n` seeded evaluations of `eval` under `priors`.
pub fn propagate<F, E>(eval: F, priors: &PriorSet, n: usize, seed: u64, opts: PropagateOptions) -> Result<McReport, UncertaintyError>
where
    F: Fn(&ParamDraw) -> Result<McSample, E> + Sync,
    E: Display,
{
    if n < 2 {
        return Err(UncertaintyError::TooFewDraws(n));
    }
    let samples = draw_samples(&eval, priors, seed, 0..n as u64)?;
    summarize(&samples, seed, opts)
}

/// Convenience: one symbol's draws, for diagnostics.
pub fn symbol_draws(priors: &PriorSet, symbol: Symbol, n: u64, seed: u64) -> Result<Vec<f64>, UncertaintyError> {
    (0..n).map(|i| draw_for(priors, seed, i).map(|d| d.get(symbol))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_statistics() {
        let s = McSummary::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.n, s.mean, s.min, s.max), (5, 3.0, 1.0, 5.0));
        assert_eq!((s.q25, s.q50, s.q75), (2.0, 3.0, 4.0));
        assert!((s.std - 2.5f64.sqrt()).abs() < 1e-15);
        let q = McSummary::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((q.q25, q.q50, q.q75), (1.75, 2.5, 3.25));
        assert!(McSummary::from_values(&[]).is_none());
        assert_eq!(McSummary::from_values(&[7.0]).unwrap().std, 0.0);
    }

    fn linear(d: &ParamDraw) -> Result<McSample, String> {
        let e0 = d.get(Symbol::E0);
        Ok(McSample { energy: 0.0225 * e0, carbon: 0.0045 * e0, money: 0.00675 * e0, cost: 84.0, e0, annual_co2: 5906.0 })
    }

    #[test]
    fn degenerate_priors_give_zero_spread() {
        let p = PriorSet::default().degenerate();
        let r = propagate(linear, &p, 50, 1, PropagateOptions::default()).unwrap();
        assert_eq!(r.energy.std, 0.0);
        assert_eq!(r.energy.mean, 0.0225 * 29530.0);
    }

    #[test]
    fn seeded_and_partition_invariant() {
        let p = PriorSet::default();
        let a = propagate(linear, &p, 400, 9, PropagateOptions::default()).unwrap();
        let b = propagate(linear, &p, 400, 9, PropagateOptions::default()).unwrap();
        assert_eq!(a, b);
        let mut parts = draw_samples(&linear, &p, 9, 250..400).unwrap();
        parts.extend(draw_samples(&linear, &p, 9, 0..250).unwrap());
        assert_eq!(summarize(&parts, 9, PropagateOptions::default()).unwrap(), a);
        let c = propagate(linear, &p, 400, 10, PropagateOptions::default()).unwrap();
        assert_ne!(a.energy.mean, c.energy.mean);
    }

    #[test]
    fn rejections() {
        let p = PriorSet::default();
        let flaky = |d: &ParamDraw| if d.get(Symbol::ExternalTemp) > 12.0 { Err("hot") } else { linear(d).map_err(|_| "x") };
        let r = propagate(flaky, &p, 1000, 3, PropagateOptions::default()).unwrap();
        assert!(r.n_rejected > 400 && r.n_rejected < 600, "{}", r.n_rejected);
        let always = |_: &ParamDraw| -> Result<McSample, &str> { Err("boom") };
        let e = propagate(always, &p, 10, 3, PropagateOptions::default()).unwrap_err();
        assert!(matches!(e, UncertaintyError::TooManyRejections { rejected: 10, n: 10, .. }));
        assert_eq!(propagate(linear, &p, 1, 0, PropagateOptions::default()), Err(UncertaintyError::TooFewDraws(1)));
    }

    #[test]
    fn money_floor_applies_per_draw() {
        let p = PriorSet::default();
        let neg = |d: &ParamDraw| linear(d).map(|s| McSample { money: d.get(Symbol::GasTariff) - 0.08, ..s });
        let raw = propagate(neg, &p, 500, 1, PropagateOptions::default()).unwrap();
        assert!(raw.money.min < 0.0);
        let clamped = propagate(neg, &p, 500, 1, PropagateOptions { money_floor: Some(0.0) }).unwrap();
        assert!(clamped.money.min >= 0.0);
    }
}
