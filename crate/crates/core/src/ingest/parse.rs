use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::borough::BoroughRegistry;
use super::record::{AgeBand, BuiltForm, DwellingRecord, Fuel, PropertyType};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("column map: field `{field}` points at column {column:?}, which is not in the header")]
    MissingColumn { field: &'static str, column: String },
    #[error("invalid column map: {0}")]
    BadColumnMap(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsumptionBasis {
    /// Column already holds kWh/year.
    #[default]
    Total,
    /// Column holds kWh/m²/year and is multiplied by floor area.
    PerSquareMetre,
}

/// Maps canonical fields onto source columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMap {
    pub id: String,
    pub borough: String,
    pub property_type: String,
    pub built_form: String,
    pub age_band: String,
    pub floor_area: String,
    #[serde(default)]
    pub floor_height: Option<String>,
    pub consumption: String,
    #[serde(default)]
    pub consumption_basis: ConsumptionBasis,
    pub multi_glaze_proportion: String,
    pub low_energy_lighting: String,
    /// Glazing and lighting cells are percentages (0–100).
    #[serde(default)]
    pub fractions_as_percent: bool,
    /// Numeric cm, or free text such as "Pitched, 250 mm loft insulation".
    #[serde(default)]
    pub loft_insulation: Option<String>,
    #[serde(default)]
    pub main_fuel: Option<String>,
    /// Boolean flag, or a main-heating description searched for "heat pump".
    pub heat_pump: String,
}

impl ColumnMap {
    /// UK EPC bulk-download headers.
    pub fn epc() -> Self {
        ColumnMap {
            id: "LMK_KEY".into(),
            borough: "LOCAL_AUTHORITY_LABEL".into(),
            property_type: "PROPERTY_TYPE".into(),
            built_form: "BUILT_FORM".into(),
            age_band: "CONSTRUCTION_AGE_BAND".into(),
            floor_area: "TOTAL_FLOOR_AREA".into(),
            floor_height: Some("FLOOR_HEIGHT".into()),
            consumption: "ENERGY_CONSUMPTION_CURRENT".into(),
            consumption_basis: ConsumptionBasis::PerSquareMetre,
            multi_glaze_proportion: "MULTI_GLAZE_PROPORTION".into(),
            low_energy_lighting: "LOW_ENERGY_LIGHTING".into(),
            fractions_as_percent: true,
            loft_insulation: Some("ROOF_DESCRIPTION".into()),
            main_fuel: Some("MAIN_FUEL".into()),
            heat_pump: "MAINHEAT_DESCRIPTION".into(),
        }
    }

    /// The header written by [`write_canonical_csv`].
    pub fn canonical() -> Self {
        ColumnMap {
            id: "id".into(),
            borough: "borough".into(),
            property_type: "property_type".into(),
            built_form: "built_form".into(),
            age_band: "age_band".into(),
            floor_area: "floor_area".into(),
            floor_height: Some("floor_height".into()),
            consumption: "annual_consumption".into(),
            consumption_basis: ConsumptionBasis::Total,
            multi_glaze_proportion: "multi_glaze_proportion".into(),
            low_energy_lighting: "low_energy_lighting".into(),
            fractions_as_percent: false,
            loft_insulation: Some("loft_insulation_thickness".into()),
            main_fuel: Some("main_fuel".into()),
            heat_pump: "has_heat_pump".into(),
        }
    }

    /// Loads a map from TOML or JSON (chosen by the leading character).
    pub fn from_str_any(text: &str) -> Result<Self, IngestError> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| IngestError::BadColumnMap(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| IngestError::BadColumnMap(e.to_string()))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub delimiter: u8,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { delimiter: b',' }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based data row (header excluded).
    pub row: u64,
    pub id: String,
    pub rule: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rejections: Vec<Rejection>,
    pub imputation_counts: BTreeMap<String, u64>,
}

impl IngestReport {
    fn impute(&mut self, field: &str) {
        *self.imputation_counts.entry(field.to_string()).or_insert(0) += 1;
    }

    pub fn is_consistent(&self) -> bool {
        self.rows_kept + self.rejections.len() as u64 == self.rows_read
    }
}

struct Resolved {
    id: usize,
    borough: usize,
    property_type: usize,
    built_form: usize,
    age_band: usize,
    floor_area: usize,
    floor_height: Option<usize>,
    consumption: usize,
    glazing: usize,
    lighting: usize,
    loft: Option<usize>,
    fuel: Option<usize>,
    heat_pump: usize,
}

fn resolve(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Resolved, IngestError> {
    let find = |field: &'static str, col: &str| {
        headers
            .iter()
            .position(|h| h.trim() == col)
            .ok_or_else(|| IngestError::MissingColumn { field, column: col.to_string() })
    };
    let opt = |field: &'static str, col: &Option<String>| col.as_deref().map(|c| find(field, c)).transpose();
    Ok(Resolved {
        id: find("id", &map.id)?,
        borough: find("borough", &map.borough)?,
        property_type: find("property_type", &map.property_type)?,
        built_form: find("built_form", &map.built_form)?,
        age_band: find("age_band", &map.age_band)?,
        floor_area: find("floor_area", &map.floor_area)?,
        floor_height: opt("floor_height", &map.floor_height)?,
        consumption: find("consumption", &map.consumption)?,
        glazing: find("multi_glaze_proportion", &map.multi_glaze_proportion)?,
        lighting: find("low_energy_lighting", &map.low_energy_lighting)?,
        loft: opt("loft_insulation", &map.loft_insulation)?,
        fuel: opt("main_fuel", &map.main_fuel)?,
        heat_pump: find("heat_pump", &map.heat_pump)?,
    })
}

fn cell<'r>(row: &'r csv::StringRecord, idx: usize, field: &str) -> Result<&'r str, String> {
    row.get(idx).map(str::trim).ok_or_else(|| format!("malformed row: missing {field} cell"))
}

fn number(raw: &str, field: &str) -> Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(format!("malformed numeric {field}: {raw:?}")),
    }
}

fn required_number(raw: &str, field: &str) -> Result<f64, String> {
    number(raw, field)?.ok_or_else(|| format!("missing {field}"))
}

/// Loft insulation in cm. `Ok(None)` means unknown (imputed as bare).
fn loft_cm(raw: &str) -> Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    if let Ok(v) = raw.parse::<f64>() {
        return if v.is_finite() { Ok(Some(v)) } else { Err(format!("malformed loft insulation {raw:?}")) };
    }
    let lower = raw.to_ascii_lowercase();
    if lower.contains("no insulation") {
        return Ok(Some(0.0));
    }
    // "Pitched, 250 mm loft insulation", "Pitched, 400+ mm loft insulation"
    if let Some(pos) = lower.find("mm") {
        let digits: String = lower[..pos]
            .trim_end()
            .trim_end_matches('+')
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if let Ok(mm) = digits.parse::<f64>() {
            return Ok(Some(mm / 10.0));
        }
    }
    Ok(None)
}

fn heat_pump_flag(raw: &str) -> bool {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => true,
        "false" | "0" | "no" | "n" | "" => false,
        other => other.contains("heat pump"),
    }
}

fn parse_row(
    row: &csv::StringRecord,
    cols: &Resolved,
    map: &ColumnMap,
    registry: &BoroughRegistry,
    report: &mut IngestReport,
) -> Result<DwellingRecord, String> {
    let id = cell(row, cols.id, "id")?.to_string();
    let borough_raw = cell(row, cols.borough, "borough")?;
    let borough = registry.resolve(borough_raw).ok_or_else(|| format!("unknown borough label {borough_raw:?}"))?;
    let property_type: PropertyType = cell(row, cols.property_type, "property_type")?.parse().map_err(|e: super::UnknownLabel| e.to_string())?;
    let built_form: BuiltForm = cell(row, cols.built_form, "built_form")?.parse().map_err(|e: super::UnknownLabel| e.to_string())?;
    let age_band: AgeBand = cell(row, cols.age_band, "age_band")?.parse().map_err(|e: super::UnknownLabel| e.to_string())?;

    let floor_area = required_number(cell(row, cols.floor_area, "floor_area")?, "floor_area")?;
    let floor_height = match cols.floor_height {
        Some(i) => number(cell(row, i, "floor_height")?, "floor_height")?,
        None => None,
    };
    let consumption_raw = required_number(cell(row, cols.consumption, "consumption")?, "consumption")?;
    let annual_consumption = match map.consumption_basis {
        ConsumptionBasis::Total => consumption_raw,
        ConsumptionBasis::PerSquareMetre => consumption_raw * floor_area,
    };
    let scale = if map.fractions_as_percent { 100.0 } else { 1.0 };
    let multi_glaze_proportion = match number(cell(row, cols.glazing, "multi_glaze_proportion")?, "multi_glaze_proportion")? {
        Some(v) => v / scale,
        None => {
            report.impute("multi_glaze_proportion");
            0.0
        }
    };
    let low_energy_lighting = match number(cell(row, cols.lighting, "low_energy_lighting")?, "low_energy_lighting")? {
        Some(v) => v / scale,
        None => {
            report.impute("low_energy_lighting");
            0.0
        }
    };
    let loft = match cols.loft {
        Some(i) => loft_cm(cell(row, i, "loft_insulation")?)?,
        None => None,
    };
    let loft_insulation_thickness = loft.unwrap_or_else(|| {
        report.impute("loft_insulation_thickness");
        0.0
    });
    let main_fuel = match cols.fuel.map(|i| cell(row, i, "main_fuel")).transpose()? {
        Some(raw) if !raw.is_empty() => raw.parse::<Fuel>().map_err(|e| e.to_string())?,
        _ => {
            report.impute("main_fuel");
            Fuel::Gas
        }
    };
    let has_heat_pump = heat_pump_flag(cell(row, cols.heat_pump, "heat_pump")?);
    if floor_height.is_none() {
        report.impute("floor_height");
    }

    let rec = DwellingRecord {
        id,
        borough,
        property_type,
        built_form,
        age_band,
        floor_area,
        floor_height,
        annual_consumption,
        multi_glaze_proportion,
        low_energy_lighting,
        loft_insulation_thickness,
        main_fuel,
        has_heat_pump,
    };
    match rec.violation() {
        Some(rule) => Err(rule.to_string()),
        None => Ok(rec),
    }
}

/// Parses an EPC-style CSV stream. Row-level problems become rejections in
/// the report; only configuration problems fail the whole call.
pub fn parse_epc_csv<R: Read>(
    stream: R,
    map: &ColumnMap,
    registry: &BoroughRegistry,
    opts: ParseOptions,
) -> Result<(Vec<DwellingRecord>, IngestReport), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(opts.delimiter).flexible(true).from_reader(stream);
    let headers = rdr.headers()?.clone();
    let cols = resolve(&headers, map)?;

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        let row_no = report.rows_read + 1;
        match rdr.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                report.rows_read += 1;
                // Imputations only count for kept rows.
                let mut scratch = IngestReport::default();
                match parse_row(&row, &cols, map, registry, &mut scratch) {
                    Ok(rec) => {
                        for (k, v) in scratch.imputation_counts {
                            *report.imputation_counts.entry(k).or_insert(0) += v;
                        }
                        records.push(rec);
                    }
                    Err(rule) => report.rejections.push(Rejection {
                        row: row_no,
                        id: row.get(cols.id).map(str::trim).unwrap_or("").to_string(),
                        rule,
                    }),
                }
            }
            Err(e) => {
                if e.is_io_error() {
                    return Err(e.into());
                }
                report.rows_read += 1;
                report.rejections.push(Rejection { row: row_no, id: String::new(), rule: format!("malformed row: {e}") });
            }
        }
    }
    report.rows_kept = records.len() as u64;
    Ok((records, report))
}

pub const CANONICAL_HEADER: [&str; 13] = [
    "id",
    "borough",
    "property_type",
    "built_form",
    "age_band",
    "floor_area",
    "floor_height",
    "annual_consumption",
    "multi_glaze_proportion",
    "low_energy_lighting",
    "loft_insulation_thickness",
    "main_fuel",
    "has_heat_pump",
];

/// Writes records with the fixed canonical header. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_canonical_csv<W: Write>(records: &[DwellingRecord], out: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CANONICAL_HEADER)?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.borough.to_string(),
            r.property_type.label().to_string(),
            r.built_form.label().to_string(),
            r.age_band.label().to_string(),
            r.floor_area.to_string(),
            r.floor_height.map(|h| h.to_string()).unwrap_or_default(),
            r.annual_consumption.to_string(),
            r.multi_glaze_proportion.to_string(),
            r.low_energy_lighting.to_string(),
            r.loft_insulation_thickness.to_string(),
            r.main_fuel.label().to_string(),
            r.has_heat_pump.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a canonical CSV back. Any rejection is reported in the report.
pub fn read_canonical_csv<R: Read>(stream: R, registry: &BoroughRegistry) -> Result<(Vec<DwellingRecord>, IngestReport), IngestError> {
    parse_epc_csv(stream, &ColumnMap::canonical(), registry, ParseOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "id,borough,property_type,built_form,age_band,floor_area,floor_height,annual_consumption,multi_glaze_proportion,low_energy_lighting,loft_insulation_thickness,main_fuel,has_heat_pump\n";

    fn parse(body: &str) -> (Vec<DwellingRecord>, IngestReport) {
        let text = format!("{HEADER}{body}");
        parse_epc_csv(text.as_bytes(), &ColumnMap::canonical(), &BoroughRegistry::london(), ParseOptions::default()).unwrap()
    }

    #[test]
    fn small_area_rejected() {
        let (recs, rep) = parse("a,Camden,Flat,Detached,1930-1949,9.5,2.5,5000,0.5,0.5,0,Gas,false\n");
        assert!(recs.is_empty());
        assert_eq!(rep.rejections.len(), 1);
        assert_eq!(rep.rejections[0].rule, "area ≤ 10 m²");
        assert_eq!(rep.rejections[0].id, "a");
    }

    #[test]
    fn empty_stream() {
        let (recs, rep) = parse("");
        assert!(recs.is_empty());
        assert_eq!(rep.rows_read, 0);
        assert!(rep.is_consistent());
    }

    #[test]
    fn bad_age_label_in_three_rows() {
        let (recs, rep) = parse(
            "a,Camden,House,Detached,1930-1949,100,2.5,20000,0.5,0.5,10,Gas,false\n\
             b,Camden,House,Detached,Victorian,100,2.5,20000,0.5,0.5,10,Gas,false\n\
             c,Brent,Flat,Mid-Terrace,1900-1929,60,,12000,1,0,,Electricity,false\n",
        );
        assert_eq!(recs.len(), 2);
        assert_eq!(rep.rejections.len(), 1);
        assert_eq!(rep.rejections[0].row, 2);
        assert!(rep.rejections[0].rule.contains("\"Victorian\""), "{}", rep.rejections[0].rule);
        assert!(rep.is_consistent());
        assert_eq!(rep.imputation_counts.get("floor_height"), Some(&1));
        assert_eq!(rep.imputation_counts.get("loft_insulation_thickness"), Some(&1));
        assert_eq!(recs[1].loft_insulation_thickness, 0.0);
        assert_eq!(recs[1].floor_height, None);
    }

    #[test]
    fn malformed_numeric_is_row_rejection() {
        let (recs, rep) = parse("a,Camden,House,Detached,1930-1949,abc,2.5,20000,0.5,0.5,10,Gas,false\n");
        assert!(recs.is_empty());
        assert!(rep.rejections[0].rule.starts_with("malformed numeric floor_area"));
    }

    #[test]
    fn missing_column_is_fatal() {
        let text = "id,borough\nx,Camden\n";
        let err = parse_epc_csv(text.as_bytes(), &ColumnMap::canonical(), &BoroughRegistry::london(), ParseOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingColumn { field: "property_type", .. }));
    }

    #[test]
    fn epc_headers_and_units() {
        let text = "LMK_KEY;LOCAL_AUTHORITY_LABEL;PROPERTY_TYPE;BUILT_FORM;CONSTRUCTION_AGE_BAND;TOTAL_FLOOR_AREA;FLOOR_HEIGHT;ENERGY_CONSUMPTION_CURRENT;MULTI_GLAZE_PROPORTION;LOW_ENERGY_LIGHTING;ROOF_DESCRIPTION;MAIN_FUEL;MAINHEAT_DESCRIPTION\n\
                    k1;Hammersmith & Fulham;House;Semi-Detached;England and Wales: 1930-1949;109;2.5;250;85;53;Pitched, 100 mm loft insulation;mains gas (not community);Boiler and radiators, mains gas\n\
                    k2;Barnet;House;Detached;England and Wales: 2012 onwards;150;;100;100;100;Pitched, 400+ mm loft insulation;electricity (not community);Air source heat pump, radiators, electric\n\
                    k3;Barnet;House;Detached;England and Wales: 1900-1929;150;;100;100;100;Pitched, 100 mm loft insulation;oil (not community);Boiler and radiators, oil\n";
        let (recs, rep) =
            parse_epc_csv(text.as_bytes(), &ColumnMap::epc(), &BoroughRegistry::london(), ParseOptions { delimiter: b';' }).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(rep.rejections.len(), 1);
        assert!(rep.rejections[0].rule.contains("oil"));
        let a = &recs[0];
        assert_eq!(a.borough.as_str(), "Hammersmith and Fulham");
        assert_eq!(a.annual_consumption, 250.0 * 109.0);
        assert!((a.multi_glaze_proportion - 0.85).abs() < 1e-12);
        assert!((a.low_energy_lighting - 0.53).abs() < 1e-12);
        assert_eq!(a.loft_insulation_thickness, 10.0);
        assert!(!a.has_heat_pump);
        let b = &recs[1];
        assert!(b.has_heat_pump);
        assert_eq!(b.loft_insulation_thickness, 40.0);
        assert_eq!(b.main_fuel, Fuel::Electricity);
        assert_eq!(b.age_band, AgeBand::B2012To2022);
    }

    #[test]
    fn column_map_from_toml() {
        let toml_text = toml::to_string(&ColumnMap::epc()).unwrap();
        assert_eq!(ColumnMap::from_str_any(&toml_text).unwrap(), ColumnMap::epc());
        let json = serde_json::to_string(&ColumnMap::canonical()).unwrap();
        assert_eq!(ColumnMap::from_str_any(&json).unwrap(), ColumnMap::canonical());
        assert!(ColumnMap::from_str_any("id = 3").is_err());
    }

    #[test]
    fn loft_text_forms() {
        assert_eq!(loft_cm("Pitched, 250 mm loft insulation").unwrap(), Some(25.0));
        assert_eq!(loft_cm("Pitched, 400+ mm loft insulation").unwrap(), Some(40.0));
        assert_eq!(loft_cm("Pitched, no insulation (assumed)").unwrap(), Some(0.0));
        assert_eq!(loft_cm("(another dwelling above)").unwrap(), None);
        assert_eq!(loft_cm("12.5").unwrap(), Some(12.5));
    }
}
