use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::encoding::{AttrKind, ValueType};

#[derive(Clone, Debug, PartialEq)]
pub struct AttributeSpec {
    pub table: String,
    pub name: String,
    pub position: usize,
    pub kind: AttrKind,
    pub value_type: ValueType,
    /// Label space; shared by linked keys and by explicit `space=` declarations.
    pub space: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableSpec {
    pub name: String,
    pub path: PathBuf,
    pub delimiter: u8,
    pub header: bool,
    pub columns: Vec<AttributeSpec>,
}

impl TableSpec {
    pub fn primary_key(&self) -> Option<&AttributeSpec> {
        self.columns.iter().find(|c| c.kind == AttrKind::PrimaryKey)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemaSpec {
    pub tables: Vec<TableSpec>,
    /// `(primary key, foreign key)` attribute pairs.
    pub links: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
#[error("schema line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> SchemaError {
    SchemaError { line, message: message.into() }
}

impl SchemaSpec {
    pub fn table(&self, name: &str) -> Option<&TableSpec> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Resolves `attr` or `table.attr`.
    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        let (table, attr) = match name.split_once('.') {
            Some((t, a)) => (Some(t), a),
            None => (None, name),
        };
        self.tables
            .iter()
            .filter(|t| table.is_none_or(|n| n == t.name))
            .flat_map(|t| t.columns.iter())
            .find(|c| c.name == attr)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &AttributeSpec> {
        self.tables.iter().flat_map(|t| t.columns.iter())
    }

    /// The primary key a foreign key is linked to.
    pub fn linked_primary_key(&self, fk: &str) -> Option<&AttributeSpec> {
        self.links.iter().find(|(_, f)| f == fk).and_then(|(p, _)| self.attribute(p))
    }

    pub fn parse(text: &str) -> Result<SchemaSpec, SchemaError> {
        let mut tables: Vec<TableSpec> = Vec::new();
        let mut links: Vec<(String, String, usize)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let words: Vec<&str> = content.split_whitespace().collect();
            match words[0] {
                "table" => {
                    if words.len() < 3 {
                        return Err(err(line, "expected `table <name> <path> [delim=c] [header]`"));
                    }
                    let mut t = TableSpec {
                        name: words[1].to_string(),
                        path: PathBuf::from(words[2]),
                        delimiter: b'|',
                        header: false,
                        columns: Vec::new(),
                    };
                    for opt in &words[3..] {
                        if let Some(d) = opt.strip_prefix("delim=") {
                            let d = if d == "tab" { "\t" } else { d };
                            if d.len() != 1 {
                                return Err(err(line, format!("delimiter must be one byte, got `{d}`")));
                            }
                            t.delimiter = d.as_bytes()[0];
                        } else if *opt == "header" {
                            t.header = true;
                        } else {
                            return Err(err(line, format!("unknown table option `{opt}`")));
                        }
                    }
                    if tables.iter().any(|x| x.name == t.name) {
                        return Err(err(line, format!("table `{}` declared twice", t.name)));
                    }
                    tables.push(t);
                }
                "col" => {
                    if words.len() < 5 {
                        return Err(err(line, "expected `col <pos> <name> <kind> <type> [space=id]`"));
                    }
                    let table = tables.last_mut().ok_or_else(|| err(line, "`col` before any `table`"))?;
                    let position: usize =
                        words[1].parse().map_err(|_| err(line, format!("bad column position `{}`", words[1])))?;
                    let kind: AttrKind = words[3].parse().map_err(|m: String| err(line, m))?;
                    let value_type: ValueType = words[4].parse().map_err(|m: String| err(line, m))?;
                    let mut space = words[2].to_string();
                    for opt in &words[5..] {
                        match opt.strip_prefix("space=") {
                            Some(s) if !s.is_empty() => space = s.to_string(),
                            _ => return Err(err(line, format!("unknown column option `{opt}`"))),
                        }
                    }
                    if table.columns.iter().any(|c| c.position == position) {
                        return Err(err(line, format!("duplicate column position {position} in `{}`", table.name)));
                    }
                    if kind == AttrKind::PrimaryKey && table.primary_key().is_some() {
                        return Err(err(line, format!("table `{}` already has a primary key", table.name)));
                    }
                    table.columns.push(AttributeSpec {
                        table: table.name.clone(),
                        name: words[2].to_string(),
                        position,
                        kind,
                        value_type,
                        space,
                    });
                }
                "link" => {
                    if words.len() != 3 {
                        return Err(err(line, "expected `link <pk_attr> <fk_attr>`"));
                    }
                    links.push((words[1].to_string(), words[2].to_string(), line));
                }
                other => return Err(err(line, format!("unknown directive `{other}`"))),
            }
        }

        let mut names = BTreeSet::new();
        for c in tables.iter().flat_map(|t| t.columns.iter()) {
            if !names.insert(c.name.clone()) {
                return Err(err(0, format!("attribute `{}` declared twice", c.name)));
            }
        }
        let mut spec = SchemaSpec { tables, links: Vec::new() };
        for (pk, fk, line) in links {
            let p = spec.attribute(&pk).ok_or_else(|| err(line, format!("dangling link: no attribute `{pk}`")))?;
            let f = spec.attribute(&fk).ok_or_else(|| err(line, format!("dangling link: no attribute `{fk}`")))?;
            if p.kind != AttrKind::PrimaryKey {
                return Err(err(line, format!("`{pk}` is not a primary_key")));
            }
            if f.kind != AttrKind::ForeignKey {
                return Err(err(line, format!("`{fk}` is not a foreign_key")));
            }
            if p.value_type != f.value_type {
                return Err(err(line, format!("`{pk}` and `{fk}` have different value types")));
            }
            if spec.links.iter().any(|(_, f2)| *f2 == f.name) {
                return Err(err(line, format!("`{fk}` linked twice")));
            }
            let (pname, fname, space) = (p.name.clone(), f.name.clone(), p.space.clone());
            for c in spec.tables.iter_mut().flat_map(|t| t.columns.iter_mut()) {
                if c.name == fname {
                    c.space = space.clone();
                }
            }
            spec.links.push((pname, fname));
        }
        if let Some(f) = spec
            .attributes()
            .find(|a| a.kind == AttrKind::ForeignKey && spec.linked_primary_key(&a.name).is_none())
        {
            return Err(err(0, format!("foreign key `{}` has no link", f.name)));
        }
        let mut space_types: BTreeMap<&str, ValueType> = BTreeMap::new();
        for a in spec.attributes().filter(|a| a.kind.is_dimensional()) {
            if let Some(t) = space_types.insert(&a.space, a.value_type) {
                if t != a.value_type {
                    return Err(err(0, format!("space `{}` used with different value types", a.space)));
                }
            }
        }
        Ok(spec)
    }
}
