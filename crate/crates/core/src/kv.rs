//! Flat `key=value` text files used for reports, manifests and run configs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Result, SdcorError};

pub fn write_kv(path: impl AsRef<Path>, pairs: &[(&str, String)]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_kv(pairs)).map_err(|e| SdcorError::io(path, e))
}

pub fn format_kv(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| SdcorError::invalid(format!("line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn read_kv(path: impl AsRef<Path>) -> Result<BTreeMap<String, String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SdcorError::io(path, e))?;
    parse_kv(&text)
}
