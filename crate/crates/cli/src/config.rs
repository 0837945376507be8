//! Flat `key = value` config files. Keys are the long flag names; `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: &[&str] = &[
    "n", "R", "trials", "seed", "samples", "m", "k", "omega", "universe", "threads", "json", "csv",
    "timing",
];

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", lineno + 1))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key {key:?}", lineno + 1));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Fills `slot` from the config when the flag was not given.
pub fn fill<T: std::str::FromStr>(
    slot: &mut Option<T>,
    cfg: &BTreeMap<String, String>,
    key: &str,
) -> Result<(), String> {
    if slot.is_none() {
        if let Some(v) = cfg.get(key) {
            *slot = Some(
                v.parse()
                    .map_err(|_| format!("config key {key}: cannot parse {v:?}"))?,
            );
        }
    }
    Ok(())
}
