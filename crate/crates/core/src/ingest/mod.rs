//! EPC-style record ingestion: parsing, validation, cleaning, and volume
//! derivation.

mod borough;
mod clean;
mod parse;
mod record;

pub use borough::{normalize_label, Borough, BoroughRegistry, HouseRatios};
pub use clean::{
    clean_for_regression, height_statistics, impute_height_and_volume, HeightMeans, HeightStat, HeightStatistics,
    MissingHeightMean, SizedRecord,
};
pub use parse::{
    parse_epc_csv, read_canonical_csv, write_canonical_csv, ColumnMap, ConsumptionBasis, IngestError, IngestReport,
    ParseOptions, Rejection, CANONICAL_HEADER,
};
pub use record::{
    height_in_range, AgeBand, BuiltForm, DwellingRecord, Fuel, PropertyType, UnknownLabel, FLOOR_HEIGHT_RANGE,
    MIN_FLOOR_AREA,
};
