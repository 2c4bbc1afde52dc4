use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tmsq_core::{FockDistribution, Trace};

use crate::{CliError, Scenario, VERSION};

pub(crate) struct Artifacts<'a> {
    scenario: &'a Scenario,
    command: &'static str,
    hash: String,
    pub written: Vec<PathBuf>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl<'a> Artifacts<'a> {
    pub fn new(scenario: &'a Scenario, command: &'static str) -> Result<Self, CliError> {
        let dir = &scenario.output_dir;
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            scenario,
            command,
            hash: scenario.hash(),
            written: Vec::new(),
        })
    }

    fn meta_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tool", "tmsq".into()),
            ("version", VERSION.into()),
            ("command", self.command.into()),
            ("config_hash", self.hash.clone()),
            ("seed", self.scenario.seed.to_string()),
        ]
    }

    pub fn meta_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        for (k, v) in self.meta_pairs() {
            m.insert(k.into(), Value::String(v));
        }
        m.insert(
            "config".into(),
            serde_json::to_value(self.scenario).expect("scenario serializes"),
        );
        Value::Object(m)
    }

    fn write_with(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.scenario.output_dir.join(name);
        let file = fs::File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush())
            .map_err(io_err(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn trace(&mut self, name: &str, mut trace: Trace) -> Result<(), CliError> {
        let mut metadata: Vec<(String, String)> = self
            .meta_pairs()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        metadata.append(&mut trace.metadata);
        trace.metadata = metadata;
        self.write_with(name, |w| trace.write(w))
    }

    pub fn fock_table(&mut self, name: &str, dist: &FockDistribution) -> Result<(), CliError> {
        let meta = self.meta_pairs();
        self.write_with(name, |w| {
            writeln!(w, "{}", tmsq_core::trace::TRACE_VERSION_LINE)?;
            for (k, v) in &meta {
                writeln!(w, "# {k}={v}")?;
            }
            writeln!(w, "# truncation_mass={:e}", dist.truncation_mass())?;
            dist.write_csv(w)
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<(), CliError> {
        let doc = json!({ "meta": self.meta_json(), "result": body });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes");
        self.write_with(name, |w| writeln!(w, "{text}"))
    }

    pub fn listing(&self) -> String {
        self.written
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }
}
