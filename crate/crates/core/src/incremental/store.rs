use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{CachedQuery, IncrementalError, Stamps};
use crate::dsl::{typecheck, Script};
use crate::engine::EngineError;
use crate::ingestion::LoadedDatabase;
use crate::sparse::{CscMatrix, Dimension, Space, TypedMatrix};

const MAGIC: &str = "tla-cache 1";

fn format_dim(d: &Dimension) -> String {
    if d.is_unit() {
        return "1".into();
    }
    let parts: Vec<String> = d
        .components()
        .iter()
        .map(|c| match c.space() {
            Space::Labels(id) => format!("L:{id}:{}", c.card()),
            Space::Rows(t) => format!("R:{t}:{}", c.card()),
            _ => unreachable!("components are atomic"),
        })
        .collect();
    parts.join("*")
}

fn parse_dim(s: &str) -> Result<Dimension, IncrementalError> {
    let bad = || IncrementalError::Format(format!("bad dimension `{s}`"));
    if s == "1" {
        return Ok(Dimension::unit());
    }
    let mut comps = Vec::new();
    for part in s.split('*') {
        let f: Vec<&str> = part.split(':').collect();
        let [kind, name, card] = f[..] else { return Err(bad()) };
        let card: u64 = card.parse().map_err(|_| bad())?;
        comps.push(match kind {
            "L" => Dimension::labels(name, card),
            "R" => Dimension::rows(name, card),
            _ => return Err(bad()),
        });
    }
    Dimension::with_components(comps).ok_or_else(bad)
}

impl CachedQuery {
    /// Text form: stamps, result type, then one `row col value` line per stored cell.
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), IncrementalError> {
        writeln!(w, "{MAGIC}")?;
        for (k, v) in &self.stamps.spaces {
            writeln!(w, "space {k} {v}")?;
        }
        for (k, v) in &self.stamps.tables {
            writeln!(w, "table {k} {v}")?;
        }
        writeln!(w, "rows {}", format_dim(self.result.row_dim()))?;
        writeln!(w, "cols {}", format_dim(self.result.col_dim()))?;
        for (r, c, v) in self.result.entries() {
            writeln!(w, "{r} {c} {v}")?;
        }
        Ok(())
    }

    /// Reads a cache written by [`CachedQuery::write`] for `script`, checking
    /// that it was taken at the current state of `db`.
    pub fn read<R: BufRead>(r: R, script: Script, db: &LoadedDatabase) -> Result<Self, IncrementalError> {
        let fmt = |m: String| IncrementalError::Format(m);
        let mut lines = r.lines();
        if lines.next().transpose()?.as_deref() != Some(MAGIC) {
            return Err(fmt("missing header".into()));
        }
        let mut stamps = Stamps { spaces: BTreeMap::new(), tables: BTreeMap::new() };
        let (mut rows, mut cols) = (None, None);
        let mut triplets = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<u64>().map_err(|_| fmt(format!("line {}: bad number `{s}`", n + 2)));
            match f[..] {
                ["space", k, v] => {
                    stamps.spaces.insert(k.to_string(), num(v)?);
                }
                ["table", k, v] => {
                    stamps.tables.insert(k.to_string(), num(v)?);
                }
                ["rows", d] => rows = Some(parse_dim(d)?),
                ["cols", d] => cols = Some(parse_dim(d)?),
                [r, c, v] => {
                    let v: f64 = v.parse().map_err(|_| fmt(format!("line {}: bad value `{v}`", n + 2)))?;
                    triplets.push((num(r)?, num(c)?, v));
                }
                [] => {}
                _ => return Err(fmt(format!("line {}: unexpected `{line}`", n + 2))),
            }
        }
        let (Some(rows), Some(cols)) = (rows, cols) else { return Err(fmt("missing result type".into())) };
        let csc = CscMatrix::from_triplets(rows.card(), cols.card(), triplets);
        let result = TypedMatrix::sparse(csc, rows, cols).map_err(|e| fmt(e.to_string()))?;
        let ty = typecheck(&script, db).map_err(EngineError::from)?;
        let ty = ty.result().ok_or(EngineError::EmptyScript)?;
        if result.row_dim() != &ty.rows || result.col_dim() != &ty.cols {
            return Err(IncrementalError::StaleCache(format!(
                "cached type {} → {} differs from the script's {ty}",
                result.col_dim(),
                result.row_dim()
            )));
        }
        let cq = CachedQuery { script, result, stamps };
        cq.check_fresh(db)?;
        Ok(cq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_text_round_trip() {
        let d = Dimension::with_components(vec![Dimension::labels("a", 3), Dimension::rows("t", 4)]).unwrap();
        for x in [Dimension::unit(), Dimension::labels("k", 9), d] {
            assert_eq!(parse_dim(&format_dim(&x)).unwrap(), x);
        }
        assert!(parse_dim("Q:x:1").is_err());
    }
}
