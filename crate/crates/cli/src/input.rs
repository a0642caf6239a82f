use std::fs;
use std::path::Path;

use mtlab::learn::SampleMatrix;
use mtlab::{Gaussian, Table, UGraph};
use serde::de::DeserializeOwned;
use serde_json::Value;

/// Why a command could not run.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation: missing file, bad parameter, unsupported request.
    Usage(String),
    /// Input that exists but does not parse or validate.
    Input(String),
}

impl From<mtlab::Error> for Failure {
    fn from(e: mtlab::Error) -> Self {
        if e.is_input_format() {
            Failure::Input(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Parses `path`, looking inside a model bundle under `field` when present.
fn read_part<T: DeserializeOwned>(path: &Path, field: &str) -> Result<T, Failure> {
    let mut v = read_json(path)?;
    if let Some(inner) = v.get_mut(field) {
        v = inner.take();
    }
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn read_table(path: &Path) -> Result<Table, Failure> {
    read_part(path, "table")
}

pub fn read_graph(path: &Path) -> Result<UGraph, Failure> {
    read_part(path, "tree")
}

pub fn read_gaussian(path: &Path) -> Result<Gaussian, Failure> {
    read_part(path, "gaussian")
}

pub fn read_samples(path: &Path) -> Result<SampleMatrix, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(SampleMatrix::from_csv(file)?)
}
