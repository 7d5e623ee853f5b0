use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use csv::StringRecord;

use super::schema::{AttributeSpec, SchemaSpec, TableSpec};
use super::LoadError;
use crate::encoding::{
    encode_foreign_codes, intern_primary_keys, parse_decimal, AttrKind, Dictionary, EncodingError, Label,
};
use crate::sparse::{ops, CscBuilder, CscMatrix, Dimension, TypedMatrix};

/// Encoded storage of one attribute.
#[derive(Clone, Debug)]
pub enum Column {
    /// Primary key: row `i` has key index `i`; the projection is the identity.
    Key,
    /// Functional `|space| × #t` projection.
    Projection(Arc<CscMatrix>),
    Measure(Arc<[f64]>),
}

#[derive(Clone, Debug)]
pub struct TableState {
    pub rows: u64,
    /// Rows added by the most recent append, if this table took part in it.
    pub delta: Option<Range<u64>>,
}

/// Tables encoded in memory. Only the requested attributes (and the keys they
/// depend on) are present.
#[derive(Clone, Debug)]
pub struct LoadedDatabase {
    schema: Arc<SchemaSpec>,
    tables: BTreeMap<String, TableState>,
    columns: BTreeMap<String, Column>,
    dictionaries: BTreeMap<String, Dictionary>,
    generation: u64,
}

/// Raw appended records per table, in file column layout.
#[derive(Clone, Debug, Default)]
pub struct RawRows {
    pub tables: BTreeMap<String, Vec<StringRecord>>,
}

impl RawRows {
    pub fn push_row<S: AsRef<str>>(&mut self, table: &str, fields: &[S]) {
        let rec: StringRecord = fields.iter().map(|f| f.as_ref()).collect();
        self.tables.entry(table.to_string()).or_default().push(rec);
    }

    pub fn is_empty(&self) -> bool {
        self.tables.values().all(|v| v.is_empty())
    }

    pub fn row_count(&self) -> usize {
        self.tables.values().map(|v| v.len()).sum()
    }
}

pub fn read_records(table: &TableSpec, path: &Path) -> Result<Vec<StringRecord>, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(table.delimiter)
        .has_headers(table.header)
        .flexible(true)
        .quoting(table.delimiter != b'|')
        .from_reader(std::io::BufReader::new(file));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| LoadError::Csv { path: path.to_path_buf(), message: e.to_string() })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        out.push(rec);
    }
    Ok(out)
}

/// Loads the requested attributes. Paths in the schema are relative to `data_dir`.
pub fn load(spec: &SchemaSpec, data_dir: &Path, needed: &BTreeSet<String>) -> Result<LoadedDatabase, LoadError> {
    let mut db = LoadedDatabase::empty(spec, needed)?;
    let mut raw = RawRows::default();
    for table in db.tables.keys() {
        let t = spec.table(table).expect("closure only holds declared tables");
        let path: PathBuf = data_dir.join(&t.path);
        raw.tables.insert(table.clone(), read_records(t, &path)?);
    }
    db.append_rows(&raw)?;
    for t in db.tables.values_mut() {
        t.delta = None;
    }
    db.generation = 0;
    Ok(db)
}

impl LoadedDatabase {
    /// A database with the columns for `needed` declared but no rows.
    pub fn empty(spec: &SchemaSpec, needed: &BTreeSet<String>) -> Result<LoadedDatabase, LoadError> {
        let mut attrs: BTreeSet<String> = BTreeSet::new();
        for name in needed {
            let a = spec.attribute(name).ok_or_else(|| LoadError::UnknownAttribute(name.clone()))?;
            attrs.insert(a.name.clone());
            if let Some(pk) = spec.table(&a.table).and_then(|t| t.primary_key()) {
                attrs.insert(pk.name.clone());
            }
            if a.kind == AttrKind::ForeignKey {
                let pk = spec.linked_primary_key(&a.name).expect("validated schema links every foreign key");
                attrs.insert(pk.name.clone());
            }
        }
        let mut db = LoadedDatabase {
            schema: Arc::new(spec.clone()),
            tables: BTreeMap::new(),
            columns: BTreeMap::new(),
            dictionaries: BTreeMap::new(),
            generation: 0,
        };
        for name in attrs {
            let a = spec.attribute(&name).expect("resolved above").clone();
            db.tables.entry(a.table.clone()).or_insert(TableState { rows: 0, delta: None });
            let col = match a.kind {
                AttrKind::PrimaryKey => Column::Key,
                AttrKind::Measure => Column::Measure(Arc::from(Vec::new())),
                _ => Column::Projection(Arc::new(CscMatrix::zeros(0, 0))),
            };
            if a.kind.is_dimensional() {
                db.dictionaries.entry(a.space.clone()).or_insert_with(|| Dictionary::new(&a.space, a.value_type));
            }
            db.columns.insert(a.name.clone(), col);
        }
        Ok(db)
    }

    pub fn schema(&self) -> &SchemaSpec {
        &self.schema
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_loaded(&self, attr: &str) -> bool {
        self.schema.attribute(attr).is_some_and(|a| self.columns.contains_key(&a.name))
    }

    pub fn loaded_attributes(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(|s| s.as_str())
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &TableState)> {
        self.tables.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn table_state(&self, table: &str) -> Option<&TableState> {
        self.tables.get(table)
    }

    pub fn row_count(&self, table: &str) -> u64 {
        self.tables.get(table).map_or(0, |t| t.rows)
    }

    pub fn dictionary(&self, space: &str) -> Option<&Dictionary> {
        self.dictionaries.get(space)
    }

    pub fn dictionaries(&self) -> impl Iterator<Item = &Dictionary> {
        self.dictionaries.values()
    }

    pub fn attribute(&self, attr: &str) -> Result<&AttributeSpec, LoadError> {
        let a = self.schema.attribute(attr).ok_or_else(|| LoadError::UnknownAttribute(attr.to_string()))?;
        if !self.columns.contains_key(&a.name) {
            return Err(LoadError::NotLoaded(a.name.clone()));
        }
        Ok(a)
    }

    /// Row space `#t` of a table: its key space when it has a primary key.
    pub fn row_dim(&self, table: &str) -> Dimension {
        let rows = self.row_count(table);
        match self.schema.table(table).and_then(|t| t.primary_key()) {
            Some(pk) => Dimension::labels(&pk.space, rows),
            None => Dimension::rows(table, rows),
        }
    }

    pub fn space_dim(&self, space: &str) -> Dimension {
        let n = self.dictionaries.get(space).map_or(0, |d| d.len() as u64);
        Dimension::labels(space, n)
    }

    fn column(&self, attr: &str) -> Result<(&AttributeSpec, &Column), LoadError> {
        let a = self.attribute(attr)?;
        Ok((a, &self.columns[&a.name]))
    }

    /// Projection matrix `#t → space` of a dimension or key attribute.
    pub fn projection(&self, attr: &str) -> Result<TypedMatrix, LoadError> {
        let (a, col) = self.column(attr)?;
        match col {
            Column::Key => Ok(TypedMatrix::identity(self.row_dim(&a.table))),
            Column::Projection(m) => {
                Ok(ops::from_shared(m.clone(), self.space_dim(&a.space), self.row_dim(&a.table))
                    .expect("stored projections track dictionary and table sizes"))
            }
            Column::Measure(_) => Err(LoadError::WrongKind { attr: a.name.clone(), kind: a.kind }),
        }
    }

    /// Measure row vector `#t → 1`.
    pub fn measure(&self, attr: &str) -> Result<TypedMatrix, LoadError> {
        let (a, col) = self.column(attr)?;
        match col {
            Column::Measure(v) => Ok(TypedMatrix::dense_row(v.clone(), self.row_dim(&a.table))
                .expect("measure length tracks table size")),
            _ => Err(LoadError::WrongKind { attr: a.name.clone(), kind: a.kind }),
        }
    }

    pub fn measure_values(&self, attr: &str) -> Result<&[f64], LoadError> {
        match self.column(attr)? {
            (_, Column::Measure(v)) => Ok(v),
            (a, _) => Err(LoadError::WrongKind { attr: a.name.clone(), kind: a.kind }),
        }
    }

    /// Dictionary index of every row of a dimension or key attribute.
    pub fn codes(&self, attr: &str) -> Result<Cow<'_, [u64]>, LoadError> {
        let (a, col) = self.column(attr)?;
        match col {
            Column::Key => Ok(Cow::Owned((0..self.row_count(&a.table)).collect())),
            Column::Projection(m) => Ok(Cow::Borrowed(m.row_index())),
            Column::Measure(_) => Err(LoadError::WrongKind { attr: a.name.clone(), kind: a.kind }),
        }
    }

    /// Decoded value of one cell.
    pub fn label_at(&self, attr: &str, row: u64) -> Result<Label, LoadError> {
        let (a, col) = self.column(attr)?;
        match col {
            Column::Measure(v) => Ok(Label::Dec(v[row as usize].into())),
            Column::Key => Ok(self.dictionaries[&a.space].label(row).expect("key row in range").clone()),
            Column::Projection(m) => {
                let code = m.row_index()[row as usize];
                Ok(self.dictionaries[&a.space].label(code).expect("code in range").clone())
            }
        }
    }

    /// Appends raw records, growing dictionaries append-only. Tables named in
    /// `rows` get their `delta` range set; all others have it cleared. On
    /// error `self` is left unchanged.
    pub fn append_rows(&mut self, rows: &RawRows) -> Result<(), LoadError> {
        let mut next = self.clone();
        for name in rows.tables.keys() {
            if !next.tables.contains_key(name) {
                return Err(LoadError::UnknownTable(name.clone()));
            }
        }
        // keys first, so foreign keys in the same batch can reference new keys
        let mut ordered: Vec<(&String, &Vec<StringRecord>)> = rows.tables.iter().collect();
        ordered.sort_by_key(|(t, _)| self.schema.table(t).and_then(|t| t.primary_key()).is_none());
        let mut new_rows: BTreeMap<String, u64> = BTreeMap::new();
        for (table, recs) in &ordered {
            let spec = self.schema.table(table).expect("checked above").clone();
            if let Some(pk) = spec.primary_key() {
                if next.columns.contains_key(&pk.name) {
                    let offset = next.tables[*table].rows;
                    let labels = parse_column(&spec, pk, recs)?;
                    let dict = next.dictionaries.get_mut(&pk.space).expect("declared with the column");
                    intern_primary_keys(labels, dict, offset).map_err(|e| enc(pk, e))?;
                }
            }
            new_rows.insert(table.to_string(), recs.len() as u64);
        }
        for (table, recs) in &ordered {
            let spec = self.schema.table(table).expect("checked above").clone();
            let loaded: Vec<_> = spec.columns.iter().filter(|a| next.columns.contains_key(&a.name)).collect();
            for a in loaded {
                let updated = match (&next.columns[&a.name], a.kind) {
                    (Column::Key, _) => continue,
                    (Column::Measure(old), _) => {
                        let mut v = Vec::with_capacity(old.len() + recs.len());
                        v.extend_from_slice(old);
                        for (row, r) in recs.iter().enumerate() {
                            let raw = field(&spec, a, r, row)?;
                            if raw.is_empty() {
                                return Err(parse_err(a, row, "null value".into()));
                            }
                            v.push(parse_decimal(raw).map_err(|m| parse_err(a, row, m))?);
                        }
                        Column::Measure(Arc::from(v))
                    }
                    (Column::Projection(old), kind) => {
                        let labels = parse_column(&spec, a, recs)?;
                        let codes = if kind == AttrKind::ForeignKey {
                            encode_foreign_codes(labels, &next.dictionaries[&a.space])
                        } else {
                            let dict = next.dictionaries.get_mut(&a.space).expect("declared with the column");
                            labels.into_iter().map(|l| dict.intern(l)).collect()
                        }
                        .map_err(|e| enc(a, e))?;
                        Column::Projection(Arc::new(extend_projection(old, &codes)))
                    }
                };
                next.columns.insert(a.name.clone(), updated);
            }
        }
        for (name, t) in next.tables.iter_mut() {
            t.delta = new_rows.get(name).map(|&n| {
                let start = t.rows;
                t.rows += n;
                start..t.rows
            });
        }
        // dictionaries may have grown under projections of untouched tables
        let sizes: BTreeMap<String, u64> = next.dictionaries.iter().map(|(k, d)| (k.clone(), d.len() as u64)).collect();
        let schema = next.schema.clone();
        for (name, col) in next.columns.iter_mut() {
            if let Column::Projection(m) = col {
                let space = &schema.attribute(name).expect("loaded attributes are declared").space;
                if m.nrows() != sizes[space] {
                    *m = Arc::new(m.with_nrows(sizes[space]));
                }
            }
        }
        next.generation += 1;
        *self = next;
        Ok(())
    }

    /// Freezes or thaws every dictionary.
    pub fn set_frozen(&mut self, frozen: bool) {
        for d in self.dictionaries.values_mut() {
            if frozen {
                d.freeze()
            } else {
                d.thaw()
            }
        }
    }
}

fn extend_projection(old: &CscMatrix, codes: &[u64]) -> CscMatrix {
    let nrows = codes.iter().map(|&c| c + 1).max().unwrap_or(0).max(old.nrows());
    let mut b = CscBuilder::with_capacity(nrows, old.ncols() + codes.len() as u64, old.nnz() + codes.len());
    for &r in old.row_index() {
        b.push(r, 1.0);
        b.finish_col();
    }
    for &r in codes {
        b.push(r, 1.0);
        b.finish_col();
    }
    b.build()
}

fn field<'r>(t: &TableSpec, a: &AttributeSpec, r: &'r StringRecord, row: usize) -> Result<&'r str, LoadError> {
    r.get(a.position).ok_or_else(|| LoadError::MissingField {
        table: t.name.clone(),
        column: a.name.clone(),
        position: a.position,
        row,
    })
}

fn parse_column(t: &TableSpec, a: &AttributeSpec, recs: &[StringRecord]) -> Result<Vec<Label>, LoadError> {
    recs.iter()
        .enumerate()
        .map(|(row, r)| {
            let raw = field(t, a, r, row)?;
            Label::parse(raw, a.value_type).map_err(|m| parse_err(a, row, m))
        })
        .collect()
}

fn parse_err(a: &AttributeSpec, row: usize, message: String) -> LoadError {
    LoadError::Parse { table: a.table.clone(), column: a.name.clone(), row, message }
}

fn enc(a: &AttributeSpec, source: EncodingError) -> LoadError {
    LoadError::Encoding { table: a.table.clone(), column: a.name.clone(), source }
}
