//! Schema files, column-selective loading, and the synthetic dataset generator.

mod database;
mod generate;
mod schema;

use std::path::PathBuf;

pub use database::{load, read_records, Column, LoadedDatabase, RawRows, TableState};
pub use generate::{generate_mini, MiniConfig};
pub use schema::{AttributeSpec, SchemaError, SchemaSpec, TableSpec};

use crate::encoding::{AttrKind, EncodingError};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{table}.{column}, row {row}: {message}")]
    Parse { table: String, column: String, row: usize, message: String },
    #[error("{table}.{column}, row {row}: no field at position {position}")]
    MissingField { table: String, column: String, position: usize, row: usize },
    #[error("in {table}.{column}")]
    Encoding {
        table: String,
        column: String,
        #[source]
        source: EncodingError,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("unknown or unloaded table `{0}`")]
    UnknownTable(String),
    #[error("attribute `{0}` was not loaded")]
    NotLoaded(String),
    #[error("attribute `{attr}` is a {kind}")]
    WrongKind { attr: String, kind: AttrKind },
}
