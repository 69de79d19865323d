//! Ten-dwelling fixture checked against hand-computed borough means and
//! stock totals (measured-consumption E₀, central parameters).

use retrofit_core::ingest::{read_canonical_csv, Borough, BoroughRegistry, DwellingRecord, HouseRatios};
use retrofit_core::model::BareHomeModel;
use retrofit_core::portfolio::{
    aggregate_by_borough, evaluate_all, heatmap_table, run_portfolio, sample_counts, stock_totals, write_outputs,
    DwellingCounts, E0Source, PortfolioConfig,
};
use retrofit_core::retrofit::Project;

mod common;

use common::{FIXTURE, TOTALS};

fn records() -> Vec<DwellingRecord> {
    let (r, report) = read_canonical_csv(FIXTURE.as_bytes(), &BoroughRegistry::london()).unwrap();
    assert_eq!(report.rows_kept, 10, "{:?}", report.rejections);
    r
}

fn config() -> PortfolioConfig {
    PortfolioConfig { e0_source: E0Source::Measured, ..PortfolioConfig::default() }
}

fn close(got: f64, want: f64) {
    assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "got {got}, want {want}");
}

// (borough, project, n, energy, money, cost)
const BOROUGH_MEANS: [(&str, Project, usize, f64, f64, f64); 12] = [
    ("Barking and Dagenham", Project::LoftInsulation, 2, 33.430415984508485, 2.674433278760679, 990.0),
    ("Barking and Dagenham", Project::Windows, 3, 800.8167929023031, 131.72985921667785, 2483.861569744313),
    ("Barking and Dagenham", Project::Lighting, 3, 321.99624799244026, 96.59887439773208, 84.8),
    ("Barking and Dagenham", Project::HeatPump, 2, 11146.520680570598, 2154.993998243649, 13500.0),
    ("Camden", Project::LoftInsulation, 2, 775.0361672152555, 62.002893377220445, 3821.25),
    ("Camden", Project::Windows, 4, 911.5698638603269, 72.92558910882616, 2813.130642143054),
    ("Camden", Project::Lighting, 4, 313.18958037163657, 93.95687411149098, 71.55),
    ("Camden", Project::HeatPump, 2, 15199.800928050816, 101.33200618700553, 13500.0),
    ("Hackney", Project::LoftInsulation, 2, 136.9438727076251, 10.955509816610009, 1425.0),
    ("Hackney", Project::Windows, 3, 509.8499030167969, 100.48044845992155, 1317.2704559766223),
    ("Hackney", Project::Lighting, 3, 114.46165768271017, 34.33849730481305, 31.8),
    ("Hackney", Project::HeatPump, 2, 5066.600309350272, 33.777335395668516, 5500.0),
];

#[test]
fn borough_means_match_hand_computation() {
    let (est, skipped) = evaluate_all(&records(), &BareHomeModel::table1(), &config());
    assert!(skipped.is_empty());
    let aggs = aggregate_by_borough(&est);
    let names: Vec<_> = aggs.iter().map(|a| a.borough.as_str()).collect();
    assert_eq!(names, ["Barking and Dagenham", "Camden", "Hackney"]);
    assert_eq!(aggs.iter().map(|a| (a.n_dwellings, a.n_houses)).collect::<Vec<_>>(), [(3, 2), (4, 2), (3, 2)]);
    for (b, p, n, energy, money, cost) in BOROUGH_MEANS {
        let a = aggs.iter().find(|a| a.borough.as_str() == b).unwrap();
        let pa = &a.projects[&p];
        assert_eq!(pa.n, n, "{b} {p}");
        close(pa.energy.mean, energy);
        close(pa.money.mean, money);
        close(pa.cost.mean, cost);
    }
}

#[test]
fn totals_match_hand_computation() {
    let run = run_portfolio(&records(), &BareHomeModel::table1(), &config(), None, &HouseRatios::london()).unwrap();
    assert_eq!(run.n_evaluated, 10);
    for (p, energy, money, cost, roi) in TOTALS {
        let t = run.totals.project(p).unwrap();
        close(t.energy, energy);
        close(t.money, money);
        close(t.cost, cost);
        close(t.roi_years.unwrap(), roi);
    }
    // ratios: Barking and Dagenham 0.62, Camden 0.10, Hackney 0.16
    close(run.totals.project(Project::HeatPump).unwrap().dwellings, 3.0 * 0.62 + 4.0 * 0.10 + 3.0 * 0.16);
}

#[test]
fn project_sample_sizes_sum_to_eligible_dwellings() {
    let (est, _) = evaluate_all(&records(), &BareHomeModel::table1(), &config());
    let aggs = aggregate_by_borough(&est);
    for p in Project::ALL {
        let total: usize = aggs.iter().filter_map(|a| a.projects.get(&p)).map(|pa| pa.n).sum();
        assert_eq!(total, est.iter().filter(|e| e.eligible(p)).count(), "{p}");
    }
}

#[test]
fn doubling_counts_doubles_totals() {
    let (est, _) = evaluate_all(&records(), &BareHomeModel::table1(), &config());
    let aggs = aggregate_by_borough(&est);
    let base = sample_counts(&aggs);
    let doubled: DwellingCounts = base.iter().map(|(b, n)| (b.clone(), 2.0 * n)).collect();
    let r = HouseRatios::london();
    let (t1, t2) = (stock_totals(&aggs, &base, &r).unwrap(), stock_totals(&aggs, &doubled, &r).unwrap());
    for (a, b) in t1.projects.iter().zip(&t2.projects) {
        close(b.energy, 2.0 * a.energy);
        close(b.cost, 2.0 * a.cost);
        assert_eq!(a.roi_years, b.roi_years);
    }
}

#[test]
fn predicted_mode_runs_and_writes_outputs() {
    let run = run_portfolio(&records(), &BareHomeModel::table1(), &PortfolioConfig::default(), None, &HouseRatios::london())
        .unwrap();
    assert!(run.aggregates.iter().all(|a| a.e0.mean > 0.0));
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &run.aggregates, &run.totals).unwrap();
    let text = std::fs::read_to_string(dir.path().join("heatmap_roi_years.json")).unwrap();
    let t = retrofit_core::portfolio::HeatmapTable::from_json(&text).unwrap();
    assert_eq!(t, heatmap_table(&run.aggregates, "roi_years").unwrap());
    assert_eq!(t.series.len(), 4);
}

#[test]
fn unknown_borough_in_ratio_table_is_named() {
    let (est, _) = evaluate_all(&records(), &BareHomeModel::table1(), &config());
    let aggs = aggregate_by_borough(&est);
    let mut r = HouseRatios::london();
    r.0.remove(&Borough::new("Hackney"));
    let e = stock_totals(&aggs, &sample_counts(&aggs), &r).unwrap_err();
    assert!(e.to_string().contains("Hackney"), "{e}");
}
