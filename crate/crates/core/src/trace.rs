//! Plain-text numeric traces: a versioned CSV layout shared by every
//! emitted artifact.
//!
//! ```text
//! # tmsq-trace v1
//! # key=value            (metadata, any number of lines)
//! tau_us,R               (column names)
//! 0e0,8.29e-1            (rows, shortest round-trip float formatting)
//! ```

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

pub const TRACE_VERSION_LINE: &str = "# tmsq-trace v1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TRACE_VERSION_LINE}")?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_string_lossless(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("trace text is ASCII")
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let bad = |msg: String| Error::InvalidData(msg);
        match lines.next() {
            Some(Ok(l)) if l == TRACE_VERSION_LINE => {}
            other => {
                return Err(bad(format!("missing trace version line, found {other:?}")));
            }
        }
        let mut trace = Trace::default();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta
                    .split_once('=')
                    .ok_or_else(|| bad(format!("line {}: malformed metadata", lineno + 2)))?;
                trace.metadata.push((k.to_string(), v.to_string()));
            } else if trace.columns.is_empty() {
                trace.columns = line.split(',').map(str::to_string).collect();
            } else {
                let row = line
                    .split(',')
                    .map(str::parse::<f64>)
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| bad(format!("line {}: {e}", lineno + 2)))?;
                if row.len() != trace.columns.len() {
                    return Err(bad(format!("line {}: wrong number of cells", lineno + 2)));
                }
                trace.rows.push(row);
            }
        }
        Ok(trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rows_round_trip_bit_exactly(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..20)) {
            let mut t = Trace::new(["a", "b", "c"]).with_meta("seed", 7);
            for r in &rows {
                t.push(r.clone());
            }
            let text = t.to_string_lossless();
            let back = Trace::read(text.as_bytes()).unwrap();
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn rejects_unversioned_input() {
        assert!(Trace::read("a,b\n1,2\n".as_bytes()).is_err());
    }
}
