//! Bundled link catalog: one JSON file per link.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_diagram::{LinkDiagram, PdCode};

/// Overrides the catalog directory.
pub const CATALOG_ENV: &str = "FKB_CATALOG_DIR";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    #[serde(default)]
    pub knot_atlas: Option<String>,
    pub pd: Vec<[u32; 4]>,
    #[serde(default)]
    pub unknots: usize,
    #[serde(default)]
    pub components: BTreeMap<String, usize>,
    pub source: String,
}

impl CatalogEntry {
    /// The oriented diagram with component names applied.
    pub fn diagram(&self) -> Result<LinkDiagram> {
        let pd = PdCode {
            crossings: self.pd.clone(),
            unknots: self.unknots,
        };
        let mut d = LinkDiagram::from_pd(&pd)?;
        for (name, &idx) in &self.components {
            if idx >= d.num_components() {
                return Err(Error::Catalog(format!(
                    "{}: component {name} -> {idx} out of range",
                    self.name
                )));
            }
            d.set_name(idx, name);
        }
        Ok(d)
    }
}

pub fn default_dir() -> PathBuf {
    match std::env::var_os(CATALOG_ENV) {
        Some(d) => PathBuf::from(d),
        None => Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("data")
            .join("catalog"),
    }
}

pub fn load_from(dir: &Path, name: &str) -> Result<CatalogEntry> {
    let path = dir.join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
    let entry: CatalogEntry = serde_json::from_str(&text)?;
    Ok(entry)
}

pub fn load(name: &str) -> Result<CatalogEntry> {
    load_from(&default_dir(), name)
}

/// Names of all entries in a catalog directory, sorted.
pub fn list(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for e in
        std::fs::read_dir(dir).map_err(|e| Error::Catalog(format!("{}: {e}", dir.display())))?
    {
        let p = e?.path();
        if p.extension().and_then(|x| x.to_str()) == Some("json") {
            if let Some(stem) = p.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}
