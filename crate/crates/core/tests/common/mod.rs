//! Property suites and generators shared by the `properties` and
//! `acceptance` targets.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use retrofit_core::ingest::{
    AgeBand, Borough, BuiltForm, DwellingRecord, Fuel, HouseRatios, PropertyType,
};
use retrofit_core::model::{fit_ols, BareHomeModel, DesignMatrix};
use retrofit_core::portfolio::{aggregate_by_borough, evaluate_all, sample_counts, stock_totals, PortfolioConfig};
use retrofit_core::retrofit::{
    compose, glazing_plan, lighting_savings, DwellingInputs, FractionParams, LightingParams, Mode, ParamProfile,
    Project, Targets, ThermalParams,
};
use retrofit_core::uncertainty::{draw_samples, propagate, summarize, ParamDraw, PriorSet, PropagateOptions, Setup, BareHouse, McSample};

pub const FIXTURE: &str = include_str!("../fixtures/portfolio_10.csv");

// (project, energy, money, cost, roi) with counts = sample sizes
pub const TOTALS: [(Project, f64, f64, f64, f64); 4] = [
    (Project::LoftInsulation, 437.9280995169481, 35.034247961355845, 4053.9, 115.71248809084217),
    (Project::Windows, 7578.279543198607, 988.3332794651028, 22655.91864573502, 22.923359069722572),
    (Project::Lighting, 2562.132038511998, 768.6396115535994, 636.0, 0.8274358886012861),
    (Project::HeatPump, 29244.41698556977, 4065.03476019791, 33150.0, 8.154911816396389),
];

pub type Suite = fn(u32) -> Result<(), String>;

pub const SUITES: [(&str, Suite); 11] = [
    ("ols_residuals_orthogonal_to_design", ols_orthogonality),
    ("ols_constant_shift_moves_intercept_only", ols_constant_shift),
    ("lighting_invariant_to_bulb_count_power_and_hours", lighting_invariance),
    ("savings_monotone_in_e0", monotone_in_e0),
    ("savings_monotone_in_loft_target", monotone_in_loft_target),
    ("glazing_plan_invariant_to_u_scaling", glazing_u_scaling),
    ("mc_deterministic_under_seed", mc_determinism),
    ("mc_partitioning_matches_single_run", mc_partitioning),
    ("portfolio_permutation_invariant", portfolio_permutation),
    ("supplement_idempotent_and_leaves_nothing", supplement_idempotence),
    ("stock_totals_linear_in_counts", totals_linearity),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn run<S: Strategy>(cases: u32, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner(cases).run(&s, f).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

pub fn property_type() -> impl Strategy<Value = PropertyType> {
    prop::sample::select(PropertyType::ALL.to_vec())
}

pub fn record_strategy() -> impl Strategy<Value = DwellingRecord> {
    let boroughs = prop::sample::select(vec!["Camden", "Hackney", "Barking and Dagenham", "Lambeth"]);
    (
        boroughs,
        property_type(),
        prop::sample::select(BuiltForm::ALL.to_vec()),
        prop::sample::select(AgeBand::ALL.to_vec()),
        30.0..250.0f64,
        5_000.0..40_000.0f64,
        0.0..=1.0f64,
        0.0..=1.0f64,
        0.0..30.0f64,
        any::<bool>(),
    )
        .prop_map(|(b, p, f, a, area, cons, glaze, led, loft, hp)| DwellingRecord {
            id: String::new(),
            borough: Borough::new(b),
            property_type: p,
            built_form: f,
            age_band: a,
            floor_area: area,
            floor_height: Some(2.5),
            annual_consumption: cons,
            multi_glaze_proportion: glaze,
            low_energy_lighting: led,
            loft_insulation_thickness: loft,
            main_fuel: Fuel::Gas,
            has_heat_pump: hp,
        })
}

fn stock_strategy() -> impl Strategy<Value = Vec<DwellingRecord>> {
    prop::collection::vec(record_strategy(), 2..25).prop_map(|mut v| {
        for (i, r) in v.iter_mut().enumerate() {
            r.id = format!("r{i}");
        }
        v
    })
}

fn inputs(pt: PropertyType, e0: f64, glazing: f64, led: f64, loft: f64) -> DwellingInputs {
    DwellingInputs {
        property_type: pt,
        floor_area: 100.0,
        e0,
        glazing,
        lighting: LightingParams::new(12, led),
        loft_cm: loft,
        fuel: Fuel::Gas,
        has_heat_pump: false,
        loft_area: None,
        window_area: None,
    }
}

fn projects_for(pt: PropertyType) -> Vec<Project> {
    Project::ALL.into_iter().filter(|p| !p.house_only() || pt == PropertyType::House).collect()
}

fn design(rows: &[(f64, f64, f64)]) -> DesignMatrix {
    DesignMatrix::from_rows(vec!["a".into(), "b".into()], &rows.iter().map(|r| vec![r.0, r.1]).collect::<Vec<_>>())
}

pub fn ols_orthogonality(cases: u32) -> Result<(), String> {
    let rows = prop::collection::vec((0.0..100.0f64, -5.0..5.0f64, -1e3..1e3f64), 8..60);
    run(cases, rows, |rows| {
        let x = design(&rows);
        let y: Vec<f64> = rows.iter().map(|r| 3.0 + 2.0 * r.0 - 7.0 * r.1 + r.2).collect();
        let fit = fit_ols(&x, &y).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let resid: Vec<f64> = (0..y.len())
            .map(|i| y[i] - fit.coef[0] - fit.coef[1] * x.column(0)[i] - fit.coef[2] * x.column(1)[i])
            .collect();
        let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max) * y.len() as f64;
        prop_assert!(resid.iter().sum::<f64>().abs() < 1e-9 * scale);
        for j in 0..2 {
            let col = x.column(j);
            let cscale = scale * col.iter().map(|v| v.abs()).fold(1.0, f64::max);
            let dot: f64 = col.iter().zip(&resid).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-9 * cscale, "column {j}: {dot}");
        }
        Ok(())
    })
}

pub fn ols_constant_shift(cases: u32) -> Result<(), String> {
    let rows = prop::collection::vec((0.0..100.0f64, -5.0..5.0f64, -1e3..1e3f64), 8..60);
    run(cases, (rows, -1e4..1e4f64), |(rows, c)| {
        let x = design(&rows);
        let y: Vec<f64> = rows.iter().map(|r| 1.0 + 0.5 * r.0 + r.1 + r.2).collect();
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let fail = |e: retrofit_core::model::OlsError| TestCaseError::fail(e.to_string());
        let (a, b) = (fit_ols(&x, &y).map_err(fail)?, fit_ols(&x, &shifted).map_err(fail)?);
        prop_assert!(close(b.coef[0], a.coef[0] + c, 1e-8), "{} vs {}", b.coef[0], a.coef[0] + c);
        for j in 1..3 {
            prop_assert!((b.coef[j] - a.coef[j]).abs() < 1e-7 * (1.0 + a.coef[j].abs()));
        }
        prop_assert!(close(a.residual_variance, b.residual_variance, 1e-6));
        Ok(())
    })
}

pub fn lighting_invariance(cases: u32) -> Result<(), String> {
    let s = (1_000.0..60_000.0f64, 0.0..=1.0f64, 1u32..200, 1u32..200, 1.0..200.0f64, 0.5..24.0f64);
    run(cases, s, |(e0, ratio, n1, n2, power, hours)| {
        let p = FractionParams::default();
        let base = lighting_savings(e0, &LightingParams::new(n1, ratio), &p).unwrap();
        let other = LightingParams { n_bulbs: n2, led_ratio: ratio, bulb_power: Some(power), hours_on: Some(hours) };
        prop_assert_eq!(base, lighting_savings(e0, &other, &p).unwrap());
        prop_assert!(close(base, 0.03 * 0.75 * (1.0 - ratio) * e0, 1e-12));
        Ok(())
    })
}

pub fn monotone_in_e0(cases: u32) -> Result<(), String> {
    let s = (property_type(), 1_000.0..40_000.0f64, 1.0..3.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..15.0f64);
    run(cases, s, |(pt, e0, k, glazing, led, loft)| {
        let profile = ParamProfile::default();
        let projects = projects_for(pt);
        let t = Targets::default();
        let lo = compose(&projects, &inputs(pt, e0, glazing, led, loft), &t, Mode::Fraction, &profile).unwrap();
        let hi = compose(&projects, &inputs(pt, k * e0, glazing, led, loft), &t, Mode::Fraction, &profile).unwrap();
        for p in &projects {
            let (a, b) = (lo.project(*p).unwrap(), hi.project(*p).unwrap());
            prop_assert!(b.energy >= a.energy - 1e-9, "{p}: {} > {}", a.energy, b.energy);
            prop_assert!(b.carbon >= a.carbon - 1e-9);
        }
        prop_assert!(hi.energy >= lo.energy - 1e-9);
        Ok(())
    })
}

pub fn monotone_in_loft_target(cases: u32) -> Result<(), String> {
    let s = (5_000.0..40_000.0f64, 0.0..20.0f64, 0.0..30.0f64, 0.0..30.0f64, prop::bool::ANY);
    run(cases, s, |(e0, current, t1, t2, area_mode)| {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mode = if area_mode { Mode::Area } else { Mode::Fraction };
        let profile = ParamProfile::default();
        let x = inputs(PropertyType::House, e0, 0.0, 0.0, current);
        let eval = |target| {
            compose(&[Project::LoftInsulation], &x, &Targets { loft_cm: target, ..Targets::default() }, mode, &profile)
                .unwrap()
        };
        let (a, b) = (eval(lo), eval(hi));
        prop_assert!(b.energy >= a.energy - 1e-9 && b.cost >= a.cost - 1e-9, "{lo} -> {}, {hi} -> {}", a.energy, b.energy);
        prop_assert!(a.energy >= 0.0);
        Ok(())
    })
}

pub fn glazing_u_scaling(cases: u32) -> Result<(), String> {
    let s = (0.0..=1.0f64, 0.05..20.0f64, 3.2..8.0f64, 1.2..3.0f64, 0.2..1.1f64);
    run(cases, s, |(lambda, k, us, ud, ut)| {
        let t = ThermalParams { u_single: us, u_double: ud, u_triple: ut, ..ThermalParams::default() };
        let scaled = ThermalParams { u_single: k * us, u_double: k * ud, u_triple: k * ut, ..t.clone() };
        // skip draws sitting on the crossover, where rounding decides the tie
        let x = (us - ud) / (us - ut);
        prop_assume!((lambda - x).abs() > 1e-9);
        prop_assert_eq!(glazing_plan(lambda, &t).unwrap(), glazing_plan(lambda, &scaled).unwrap());
        Ok(())
    })
}

fn lighting_eval(setup: &Setup) -> impl Fn(&ParamDraw) -> Result<McSample, String> + Sync + '_ {
    move |d| setup.sample(&Project::ALL, d).map_err(|e| e.to_string())
}

pub fn mc_determinism(cases: u32) -> Result<(), String> {
    let priors = PriorSet::default();
    let setup = Setup::new(&priors, ParamProfile::default(), BareHouse::default());
    run(cases.min(32), (any::<u64>(), 2usize..80), |(seed, n)| {
        let a = propagate(lighting_eval(&setup), &priors, n, seed, PropagateOptions::default()).unwrap();
        let b = propagate(lighting_eval(&setup), &priors, n, seed, PropagateOptions::default()).unwrap();
        prop_assert_eq!(&a, &b);
        let c = propagate(lighting_eval(&setup), &priors, n, seed.wrapping_add(1), PropagateOptions::default()).unwrap();
        prop_assert_ne!(a.energy, c.energy);
        Ok(())
    })
}

pub fn mc_partitioning(cases: u32) -> Result<(), String> {
    let priors = PriorSet::default();
    let setup = Setup::new(&priors, ParamProfile::default(), BareHouse::default());
    run(cases.min(32), (any::<u64>(), 2u64..80, 0.0..1.0f64), |(seed, n, split)| {
        let k = (split * n as f64) as u64;
        let eval = lighting_eval(&setup);
        let whole = draw_samples(&eval, &priors, seed, 0..n).unwrap();
        let mut parts = draw_samples(&eval, &priors, seed, 0..k).unwrap();
        parts.extend(draw_samples(&eval, &priors, seed, k..n).unwrap());
        prop_assert_eq!(&whole, &parts);
        let opts = PropagateOptions::default();
        prop_assert_eq!(summarize(&whole, seed, opts).unwrap(), summarize(&parts, seed, opts).unwrap());
        Ok(())
    })
}

fn config() -> PortfolioConfig {
    PortfolioConfig { e0_source: retrofit_core::portfolio::E0Source::Measured, ..PortfolioConfig::default() }
}

pub fn portfolio_permutation(cases: u32) -> Result<(), String> {
    let model = BareHomeModel::table1();
    run(cases.min(64), (stock_strategy(), any::<u64>()), |(records, seed)| {
        let mut shuffled = records.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let a = aggregate_by_borough(&evaluate_all(&records, &model, &config()).0);
        let b = aggregate_by_borough(&evaluate_all(&shuffled, &model, &config()).0);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.borough, &y.borough);
            prop_assert_eq!(x.n_dwellings, y.n_dwellings);
            prop_assert_eq!(x.projects.keys().collect::<Vec<_>>(), y.projects.keys().collect::<Vec<_>>());
            for (p, pa) in &x.projects {
                let pb = &y.projects[p];
                prop_assert_eq!(pa.n, pb.n);
                for (s, t) in [(&pa.energy, &pb.energy), (&pa.money, &pb.money), (&pa.cost, &pb.cost)] {
                    prop_assert!(close(s.mean, t.mean, 1e-12) && close(s.std, t.std, 1e-9));
                    prop_assert_eq!((s.min, s.q50, s.max), (t.min, t.q50, t.max));
                }
            }
        }
        Ok(())
    })
}

pub fn supplement_idempotence(cases: u32) -> Result<(), String> {
    let s = (property_type(), 1_000.0..40_000.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..30.0f64, 0.0..30.0f64);
    run(cases, s, |(pt, e0, glazing, led, loft, target)| {
        let projects = projects_for(pt);
        let targets = Targets { loft_cm: target, ..Targets::default() };
        let x = inputs(pt, e0, glazing, led, loft);
        let once = x.supplemented(&projects, &targets);
        prop_assert_eq!(&once.supplemented(&projects, &targets), &once);
        let profile = ParamProfile::default();
        let after = compose(&projects, &once, &targets, Mode::Fraction, &profile).unwrap();
        for p in &projects {
            let e = after.project(*p).unwrap();
            prop_assert!(e.energy == 0.0 && e.cost == 0.0, "{p} after supplement: {e:?}");
        }
        Ok(())
    })
}

pub fn totals_linearity(cases: u32) -> Result<(), String> {
    let model = BareHomeModel::table1();
    run(cases.min(64), (stock_strategy(), 0.1..1e6f64), |(records, k)| {
        let aggs = aggregate_by_borough(&evaluate_all(&records, &model, &config()).0);
        let base = sample_counts(&aggs);
        let scaled = base.iter().map(|(b, n)| (b.clone(), k * n)).collect();
        let r = HouseRatios::london();
        let (t1, t2) = (stock_totals(&aggs, &base, &r).unwrap(), stock_totals(&aggs, &scaled, &r).unwrap());
        for (a, b) in t1.projects.iter().zip(&t2.projects) {
            prop_assert!(close(b.energy, k * a.energy, 1e-12) && close(b.cost, k * a.cost, 1e-12));
            prop_assert!(close(b.dwellings, k * a.dwellings, 1e-12));
            match (a.roi_years, b.roi_years) {
                (Some(x), Some(y)) => prop_assert!(close(x, y, 1e-12)),
                (x, y) => prop_assert_eq!(x, y),
            }
        }
        Ok(())
    })
}

/// `n` records following the published coefficients with Gaussian noise of
/// `sigma` kWh/month.
pub fn synthetic_records(n: usize, sigma: f64, seed: u64) -> Vec<DwellingRecord> {
    let table = BareHomeModel::table1();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    (0..n)
        .map(|i| {
            let mut r = DwellingRecord {
                id: format!("s{i}"),
                borough: Borough::new("Camden"),
                property_type: PropertyType::ALL[rng.random_range(0..PropertyType::ALL.len())],
                built_form: BuiltForm::ALL[rng.random_range(0..BuiltForm::ALL.len())],
                age_band: AgeBand::ALL[rng.random_range(0..AgeBand::ALL.len())],
                floor_area: rng.random_range(30.0..250.0),
                floor_height: Some(rng.random_range(2.2..3.2)),
                annual_consumption: 0.0,
                multi_glaze_proportion: 0.5,
                low_energy_lighting: 0.5,
                loft_insulation_thickness: 10.0,
                main_fuel: Fuel::Gas,
                has_heat_pump: false,
            };
            let mean = table.predict_ebar(&r).unwrap().raw;
            r.annual_consumption = 12.0 * (mean + noise.sample(&mut rng));
            r
        })
        .collect()
}
