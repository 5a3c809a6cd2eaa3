//! Tabulated reference energies, kept as the printed decimal strings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming a directory that replaces the bundled fixtures.
pub const FIXTURE_ENV: &str = "QACTION_FIXTURES";
pub const FIXTURE_FILE: &str = "reference_tables.csv";

const BUNDLED: &str = include_str!("../../fixtures/reference_tables.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRow {
    pub table: String,
    /// Potential as `name;key=value;...`.
    pub potential: String,
    pub n: usize,
    #[serde(rename = "E_exact")]
    pub e_exact: String,
    #[serde(rename = "E_present")]
    pub e_present: String,
    #[serde(rename = "E_third")]
    pub e_third: String,
    pub third_label: String,
    /// Printed value believed to be a typesetting slip.
    pub anomaly: bool,
}

impl FixtureRow {
    pub fn exact(&self) -> f64 {
        self.e_exact.parse().unwrap_or(f64::NAN)
    }

    pub fn present(&self) -> f64 {
        self.e_present.parse().unwrap_or(f64::NAN)
    }

    pub fn third(&self) -> f64 {
        self.e_third.parse().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableFixture {
    pub table: String,
    pub potential: String,
    pub third_label: String,
    pub rows: Vec<FixtureRow>,
}

impl TableFixture {
    /// Builtin name and parameters of the fixture's potential.
    pub fn potential_spec(&self) -> Result<(String, std::collections::BTreeMap<String, f64>)> {
        let mut parts = self.potential.split(';');
        let name = parts.next().unwrap_or_default().trim().to_string();
        let mut params = std::collections::BTreeMap::new();
        for kv in parts {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Fixture(format!("bad parameter `{kv}`")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Fixture(format!("bad value in `{kv}`")))?;
            params.insert(k.trim().to_string(), v);
        }
        Ok((name, params))
    }

    /// Every table in a fixture file body.
    pub fn parse_all(text: &str) -> Result<Vec<TableFixture>> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut tables: Vec<TableFixture> = Vec::new();
        for rec in reader.deserialize() {
            let row: FixtureRow = rec.map_err(|e| Error::Fixture(e.to_string()))?;
            match tables.iter_mut().find(|t| t.table == row.table) {
                Some(t) => t.rows.push(row),
                None => tables.push(TableFixture {
                    table: row.table.clone(),
                    potential: row.potential.clone(),
                    third_label: row.third_label.clone(),
                    rows: vec![row],
                }),
            }
        }
        Ok(tables)
    }

    /// Fixture directory from the environment, if set.
    pub fn override_dir() -> Option<PathBuf> {
        std::env::var_os(FIXTURE_ENV).map(PathBuf::from)
    }

    /// All tables, from `dir` when given, else from the environment override, else
    /// the bundled copy.
    pub fn load_all(dir: Option<&Path>) -> Result<Vec<TableFixture>> {
        let dir = dir.map(Path::to_path_buf).or_else(Self::override_dir);
        match dir {
            Some(d) => {
                let path = d.join(FIXTURE_FILE);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
                Self::parse_all(&text)
            }
            None => Self::parse_all(BUNDLED),
        }
    }

    pub fn load(table: &str, dir: Option<&Path>) -> Result<TableFixture> {
        Self::load_all(dir)?
            .into_iter()
            .find(|t| t.table == table)
            .ok_or_else(|| Error::Fixture(format!("unknown table `{table}`")))
    }
}
