//! `path.to.key=value` overrides. The value is read as a TOML value when it
//! parses as one and as a bare string otherwise.

use crate::error::{CliError, Result};
use toml::{Table, Value};

pub fn parse_override(text: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = text.split_once('=').ok_or_else(|| CliError::Config(format!("override {text:?} has no '='")))?;
    let path: Vec<String> = key.trim().split('.').map(|p| p.trim().to_string()).collect();
    if path.iter().any(|p| p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')) {
        return Err(CliError::Config(format!("bad override key {key:?}")));
    }
    let raw = raw.trim();
    let value = match format!("x = {raw}").parse::<Table>() {
        Ok(mut t) if t.len() == 1 => t.remove("x").expect("single key"),
        _ => Value::String(raw.to_string()),
    };
    Ok((path, value))
}

/// Sets `path` in `root`, creating intermediate tables.
pub fn apply(root: &mut Table, path: &[String], value: Value) -> Result<()> {
    let (last, parents) = path.split_last().ok_or_else(|| CliError::Config("empty override key".into()))?;
    let mut table = root;
    for p in parents {
        let entry = table.entry(p.clone()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override path {} crosses a non-table value at {p:?}", path.join("."))))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}
