//! Comma-separated tables with a `#` header block.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Shortest decimal that parses back to the same `f64`; empty for missing.
pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:?}"),
        None => String::new(),
    }
}

pub fn config_hash(canonical: &str, pulse_text: Option<&str>) -> String {
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    if let Some(t) = pulse_text {
        h.update(b"\0pulse_file\0");
        h.update(t.as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn header(hash: &str, canonical: &str, notes: &[String]) -> String {
    let mut out = String::new();
    writeln!(out, "# dce {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "# config-sha256 = {hash}").unwrap();
    for line in canonical.lines() {
        writeln!(out, "# {line}").unwrap();
    }
    for n in notes {
        writeln!(out, "# warning: {n}").unwrap();
    }
    out
}

/// A numeric table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Value of a `# key = value` header line.
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find_map(|h| h.split_once(" = ").filter(|(k, _)| *k == key).map(|(_, v)| v))
    }
}

pub fn parse_table(text: &str) -> Result<Table, String> {
    let mut header = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(h) = line.strip_prefix('#') {
            header.push(h.trim().to_string());
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match &columns {
            None => columns = Some(cells.iter().map(|c| c.to_string()).collect()),
            Some(cols) => {
                if cells.len() != cols.len() {
                    return Err(format!("line {}: {} cells, expected {}", i + 1, cells.len(), cols.len()));
                }
                let row = cells
                    .iter()
                    .map(|c| match *c {
                        "" => Ok(None),
                        s => s.parse::<f64>().map(Some).map_err(|_| format!("line {}: `{s}` is not numeric", i + 1)),
                    })
                    .collect::<Result<_, _>>()?;
                rows.push(row);
            }
        }
    }
    Ok(Table {
        header,
        columns: columns.ok_or("no column line")?,
        rows,
    })
}

pub fn read_table(path: &Path) -> Result<Table, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_table(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_exactly() {
        let vals = [0.1 + 0.2, 1e-300, 74.20657955128061, -0.0, 1e22, f64::MIN_POSITIVE, 5e-324];
        for v in vals {
            let s = fmt_value(Some(v));
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        let text = format!("# a = b\nx,y\n{},\n", fmt_value(Some(vals[0])));
        let t = parse_table(&text).unwrap();
        assert_eq!(t.rows, vec![vec![Some(vals[0]), None]]);
        assert_eq!(t.header_value("a"), Some("b"));
    }

    #[test]
    fn hash_covers_pulse_samples() {
        assert_ne!(config_hash("a = 1\n", None), config_hash("a = 1\n", Some("0 0\n1 0\n")));
        assert_eq!(config_hash("a = 1\n", None).len(), 64);
    }
}
