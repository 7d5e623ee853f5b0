//! Differential re-evaluation of cached results under appended rows.

mod safety;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

pub use safety::{check_delta_safe, dependence, Dependence};

use crate::dsl::{typecheck, Script};
use crate::engine::{evaluate, evaluate_with, materialize, EngineError, EvalOptions, ResultTable, SortMode, View};
use crate::ingestion::{read_records, LoadError, LoadedDatabase, RawRows, SchemaSpec};
use crate::sparse::{ops, SparseError, TypedMatrix};

#[derive(Debug, thiserror::Error)]
pub enum IncrementalError {
    #[error("`{binding}` is not delta-safe: {reason}")]
    NotDeltaSafe { binding: String, reason: String },
    #[error("cached result is stale: {0}")]
    StaleCache(String),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("merging the update")]
    Kernel(#[from] SparseError),
    #[error("cache file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rows appended to one or more tables, in file column layout.
#[derive(Clone, Debug, Default)]
pub struct DeltaBatch {
    rows: RawRows,
}

impl DeltaBatch {
    pub fn new() -> Self {
        DeltaBatch::default()
    }

    pub fn from_rows(rows: RawRows) -> Self {
        DeltaBatch { rows }
    }

    pub fn push_row<S: AsRef<str>>(&mut self, table: &str, fields: &[S]) {
        self.rows.push_row(table, fields);
    }

    /// Reads the data file of every listed table that exists under `dir`.
    pub fn read_dir<'a>(
        spec: &SchemaSpec,
        dir: &Path,
        tables: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, LoadError> {
        let mut rows = RawRows::default();
        for name in tables {
            let t = spec.table(name).ok_or_else(|| LoadError::UnknownTable(name.to_string()))?;
            let path = dir.join(&t.path);
            if path.exists() {
                rows.tables.insert(name.to_string(), read_records(t, &path)?);
            }
        }
        Ok(DeltaBatch { rows })
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row_count(&self) -> usize {
        self.rows.row_count()
    }

    /// Tables receiving at least one row.
    pub fn tables(&self) -> BTreeSet<String> {
        self.rows.tables.iter().filter(|(_, v)| !v.is_empty()).map(|(k, _)| k.clone()).collect()
    }
}

/// Appends a batch. Dictionaries grow append-only and existing codes keep
/// their meaning; an empty batch leaves the database untouched.
pub fn apply_delta(db: &mut LoadedDatabase, batch: &DeltaBatch) -> Result<(), LoadError> {
    if batch.is_empty() {
        return Ok(());
    }
    db.append_rows(&batch.rows)
}

/// Sizes the cached result depends on: every dictionary and every table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Stamps {
    pub spaces: BTreeMap<String, u64>,
    pub tables: BTreeMap<String, u64>,
}

impl Stamps {
    fn of(db: &LoadedDatabase) -> Self {
        Stamps {
            spaces: db.dictionaries().map(|d| (d.space().to_string(), d.len() as u64)).collect(),
            tables: db.tables().map(|(t, s)| (t.to_string(), s.rows)).collect(),
        }
    }
}

/// A script together with its result at a known database state.
#[derive(Clone, Debug)]
pub struct CachedQuery {
    script: Script,
    result: TypedMatrix,
    stamps: Stamps,
}

impl CachedQuery {
    /// Evaluates `script` in full and caches the result.
    pub fn new(script: Script, db: &LoadedDatabase) -> Result<Self, IncrementalError> {
        let result = evaluate(&script, db)?.into_result().expect("evaluate rejects empty scripts");
        Ok(CachedQuery { script, result, stamps: Stamps::of(db) })
    }

    pub fn script(&self) -> &Script {
        &self.script
    }

    pub fn result(&self) -> &TypedMatrix {
        &self.result
    }

    pub fn table(&self, db: &LoadedDatabase, sort: SortMode) -> ResultTable {
        materialize(&self.result, db, sort)
    }

    fn check_fresh(&self, db: &LoadedDatabase) -> Result<(), IncrementalError> {
        let now = Stamps::of(db);
        if now != self.stamps {
            return Err(IncrementalError::StaleCache(format!(
                "cached at {:?} / {:?}, database now at {:?} / {:?}",
                self.stamps.spaces, self.stamps.tables, now.spaces, now.tables
            )));
        }
        Ok(())
    }
}

/// Appends `batch` to `db` and brings `cq` up to date by evaluating the
/// script over the appended rows only and adding that to the re-aligned
/// cached result. The cache is left unchanged on error; the database is
/// only modified once the script has been found delta-safe.
pub fn run_incremental(
    cq: &mut CachedQuery,
    db: &mut LoadedDatabase,
    batch: &DeltaBatch,
) -> Result<TypedMatrix, IncrementalError> {
    cq.check_fresh(db)?;
    if batch.is_empty() {
        return Ok(cq.result.clone());
    }
    let appended = batch.tables();
    let touched = check_delta_safe(&cq.script, db, &appended)?;
    apply_delta(db, batch)?;
    let ty = typecheck(&cq.script, db).map_err(EngineError::from)?;
    let ty = ty.result().expect("non-empty script").clone();
    let base = ops::realign(&cq.result, &ty.rows, &ty.cols)?;
    let merged = match touched {
        None => base,
        Some(table) => {
            let range = db.table_state(&table).and_then(|s| s.delta.clone()).expect("batch appended rows");
            let view = View::restricted(db, &table, range);
            let delta = evaluate_with(&cq.script, &view, EvalOptions::default())?
                .into_result()
                .expect("non-empty script");
            ops::add(&base, &delta)?
        }
    };
    cq.result = merged.clone();
    cq.stamps = Stamps::of(db);
    Ok(merged)
}
