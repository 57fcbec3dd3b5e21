//! Flat key=value config files mirroring the long command-line flags.
//! Values from the file are injected as defaults; flags given on the
//! command line win.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn load(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), lineno + 1);
        };
        out.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(out)
}

/// Merge config entries into the raw argument list ahead of parsing;
/// a key already present among the user flags is skipped.
pub fn merge_into_args(args: Vec<String>, config: &BTreeMap<String, String>) -> Vec<String> {
    let mut out = args.clone();
    for (key, value) in config {
        let flag = format!("--{key}");
        if args
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")))
        {
            continue;
        }
        out.push(flag);
        out.push(value.clone());
    }
    out
}
