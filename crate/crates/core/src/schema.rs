//! Database schemas: tables, columns and key relations.
//!
//! Schemas are read from JSON documents of the form
//!
//! ```json
//! {
//!   "db_id": "school",
//!   "tables": [{"name": "assignments", "columns": ["id", "grade"]}],
//!   "primary_keys": ["assignments.id"],
//!   "foreign_keys": [["assignments.id", "graduates.id"]]
//! }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SchemaError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub db_id: String,
    pub tables: Vec<Table>,
    #[serde(default)]
    pub primary_keys: Vec<String>,
    #[serde(default)]
    pub foreign_keys: Vec<(String, String)>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Schema {
    /// Builds a schema and checks its invariants.
    pub fn new(
        db_id: impl Into<String>,
        tables: Vec<Table>,
        primary_keys: Vec<String>,
        foreign_keys: Vec<(String, String)>,
    ) -> Result<Self, SchemaError> {
        let schema = Schema {
            db_id: db_id.into(),
            tables,
            primary_keys,
            foreign_keys,
        };
        schema.check()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let schema: Schema = serde_json::from_str(text)?;
        schema.check()?;
        Ok(schema)
    }

    pub fn check(&self) -> Result<(), SchemaError> {
        let mut seen = BTreeMap::new();
        for table in &self.tables {
            if !is_identifier(&table.name) {
                return Err(SchemaError::BadIdentifier(table.name.clone()));
            }
            if seen.insert(table.name.to_lowercase(), ()).is_some() {
                return Err(SchemaError::DuplicateTable(table.name.clone()));
            }
            let mut cols = BTreeMap::new();
            for col in &table.columns {
                if !is_identifier(col) {
                    return Err(SchemaError::BadIdentifier(format!("{}.{}", table.name, col)));
                }
                if cols.insert(col.to_lowercase(), ()).is_some() {
                    return Err(SchemaError::DuplicateColumn {
                        table: table.name.clone(),
                        column: col.clone(),
                    });
                }
            }
        }
        let key_refs = self
            .primary_keys
            .iter()
            .chain(self.foreign_keys.iter().flat_map(|(a, b)| [a, b]));
        for key in key_refs {
            if self.resolve_key(key).is_none() {
                return Err(SchemaError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }

    /// Resolves a `table.column` key reference to exact schema names.
    pub fn resolve_key(&self, key: &str) -> Option<(&str, &str)> {
        let (t, c) = key.split_once('.')?;
        let table = self.table(t)?;
        let col = table.column(c)?;
        Some((&table.name, col))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name.eq_ignore_ascii_case(name))
    }

    /// All tables containing a column with this name.
    pub fn tables_with_column(&self, column: &str) -> impl Iterator<Item = &Table> + '_ {
        let column = column.to_string();
        self.tables.iter().filter(move |t| t.column(&column).is_some())
    }

    /// Foreign-key pairs touching `table`, as resolved `(table, column)` pairs.
    pub fn foreign_keys_of<'a>(
        &'a self,
        table: &'a str,
    ) -> impl Iterator<Item = ((&'a str, &'a str), (&'a str, &'a str))> + 'a {
        self.foreign_keys.iter().filter_map(move |(a, b)| {
            let a = self.resolve_key(a)?;
            let b = self.resolve_key(b)?;
            (a.0.eq_ignore_ascii_case(table) || b.0.eq_ignore_ascii_case(table)).then_some((a, b))
        })
    }
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&str> {
        self.columns
            .iter()
            .find(|c| c.eq_ignore_ascii_case(name))
            .map(String::as_str)
    }
}

/// A collection of schemas keyed by `db_id`.
#[derive(Debug, Clone, Default)]
pub struct SchemaSet {
    schemas: BTreeMap<String, Schema>,
}

impl SchemaSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, schema: Schema) {
        self.schemas.insert(schema.db_id.clone(), schema);
    }

    pub fn get(&self, db_id: &str) -> Option<&Schema> {
        self.schemas.get(db_id)
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.schemas.values()
    }

    /// Parses either a single schema object or an array of them.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let mut set = SchemaSet::new();
        let items = match value {
            serde_json::Value::Array(items) => items,
            other => vec![other],
        };
        for item in items {
            let schema: Schema = serde_json::from_value(item)?;
            schema.check()?;
            set.insert(schema);
        }
        Ok(set)
    }

    /// Loads a schema file, or every `*.json` file in a directory.
    pub fn load(path: &Path) -> Result<Self, SchemaError> {
        if path.is_dir() {
            let mut entries: Vec<_> = fs::read_dir(path)?
                .filter_map(Result::ok)
                .map(|e| e.path())
                .filter(|p| p.extension().is_some_and(|e| e == "json"))
                .collect();
            entries.sort();
            let mut set = SchemaSet::new();
            for p in entries {
                for schema in Self::from_json(&fs::read_to_string(&p)?)?.schemas.into_values() {
                    set.insert(schema);
                }
            }
            Ok(set)
        } else {
            Self::from_json(&fs::read_to_string(path)?)
        }
    }
}

impl FromIterator<Schema> for SchemaSet {
    fn from_iter<I: IntoIterator<Item = Schema>>(iter: I) -> Self {
        let mut set = SchemaSet::new();
        for s in iter {
            set.insert(s);
        }
        set
    }
}
