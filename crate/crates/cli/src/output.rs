//! In-memory output files, written together once a scenario has succeeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use emlab::snapshot::{self, Snapshot};

use crate::config::Config;
use crate::failure::{Failure, Outcome};

/// `# emlab <version> config_hash=<sha256> seed=<n>`
pub fn provenance(cfg: &Config) -> String {
    format!(
        "# emlab {} config_hash={} seed={}",
        env!("CARGO_PKG_VERSION"),
        cfg.hash(),
        cfg.str("run.seed")
    )
}

/// Floats in CSV output: 17 significant digits, round-trip exact.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A CSV table under construction.
pub struct Table {
    text: String,
    columns: usize,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            text: format!("{}\n", columns.join(",")),
            columns: columns.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width");
        let line: Vec<String> = cells.iter().map(|c| field(c)).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }
}

/// Every file a scenario produces, named relative to the output directory.
pub struct Outputs {
    header: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(cfg: &Config) -> Self {
        Self {
            header: provenance(cfg),
            files: Vec::new(),
        }
    }

    pub fn table(&mut self, name: &str, t: Table) {
        self.files.push((name.into(), format!("{}\n{}", self.header, t.text).into_bytes()));
    }

    /// The provenance line, then the little-endian snapshot payload.
    pub fn snapshot(&mut self, name: &str, s: &Snapshot) -> Outcome<()> {
        let mut bytes = format!("{}\n", self.header).into_bytes();
        snapshot::write_binary(&mut bytes, s).map_err(crate::failure::runtime)?;
        self.files.push((name.into(), bytes));
        Ok(())
    }


    /// Writes each file beside its destination and renames it into place.
    pub fn commit(self, dir: &Path) -> Outcome<Vec<PathBuf>> {
        let io = |what: &str, p: &Path, e: std::io::Error| Failure::Runtime(format!("{what} {}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files {
            let dest = dir.join(&name);
            let tmp = dir.join(format!(".{name}.partial"));
            fs::write(&tmp, &bytes).map_err(|e| io("cannot write", &tmp, e))?;
            fs::rename(&tmp, &dest).map_err(|e| io("cannot move into place", &dest, e))?;
            written.push(dest);
        }
        Ok(written)
    }
}

/// Reads a snapshot file, with or without a leading provenance line.
pub fn read_snapshot(path: &Path) -> Outcome<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))?;
    let payload = if bytes.starts_with(b"# ") {
        match bytes.iter().position(|&b| b == b'\n') {
            Some(p) => &bytes[p + 1..],
            None => &bytes[..0],
        }
    } else {
        &bytes[..]
    };
    snapshot::read_binary(&mut &payload[..])
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}
