//! Bundled schema, query scripts and the five-order sample.

use std::io;
use std::path::Path;

pub const TPCH_SCHEMA: &str = include_str!("../assets/tpch.schema");

pub const SAMPLE_SCHEMA: &str = include_str!("../assets/sample/sample.schema");
pub const SAMPLE_ORDERS: &str = include_str!("../assets/sample/orders.tbl");
pub const SAMPLE_LINEITEM: &str = include_str!("../assets/sample/lineitem.tbl");
/// Revenue per (order date, order priority) over the sample.
pub const SAMPLE_REVENUE: &str = include_str!("../assets/sample/revenue.la");
/// Line counts per (line status, order date) over the sample.
pub const SAMPLE_STATUS_BY_DATE: &str = include_str!("../assets/sample/status_by_date.la");

pub const QUERY_NAMES: [&str; 7] = ["q3", "q4", "q6", "q11", "q12", "q12_low", "q14"];

pub fn query_script(name: &str) -> Option<&'static str> {
    Some(match name {
        "q3" => include_str!("../assets/queries/q3.la"),
        "q4" => include_str!("../assets/queries/q4.la"),
        "q6" => include_str!("../assets/queries/q6.la"),
        "q11" => include_str!("../assets/queries/q11.la"),
        "q12" => include_str!("../assets/queries/q12.la"),
        "q12_low" => include_str!("../assets/queries/q12_low.la"),
        "q14" => include_str!("../assets/queries/q14.la"),
        _ => return None,
    })
}

/// Writes the sample tables and schema into `dir`.
pub fn write_sample(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("sample.schema"), SAMPLE_SCHEMA)?;
    std::fs::write(dir.join("orders.tbl"), SAMPLE_ORDERS)?;
    std::fs::write(dir.join("lineitem.tbl"), SAMPLE_LINEITEM)
}
