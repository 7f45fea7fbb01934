use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Why a subcommand could not finish. Tolerance failures are not errors; they
/// are recorded in the [`Report`].
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Run(m) => write!(f, "run failed: {m}"),
        }
    }
}

pub fn run_err(context: &str) -> impl Fn(vacfield::Error) -> CliError + '_ {
    move |e| CliError::Run(format!("{context}: {e}"))
}

pub fn config_err(context: &str) -> impl Fn(vacfield::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{context}: {e}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable threshold, e.g. "<= 1e-8" or "in [3.2, 4.8]".
    pub limit: String,
    pub pass: bool,
}

#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.checks.push(Check { name: name.into(), value, limit: format!("<= {limit:e}"), pass: value <= limit });
    }

    pub fn below(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.checks.push(Check { name: name.into(), value, limit: format!("< {limit}"), pass: value < limit });
    }

    pub fn within(&mut self, name: impl Into<String>, value: f64, range: [f64; 2]) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit: format!("in [{}, {}]", range[0], range[1]),
            pass: value >= range[0] && value <= range[1],
        });
    }

    pub fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push(Check { name: name.into(), value: f64::from(u8::from(ok)), limit: "== 1".into(), pass: ok });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn print(&self, scenario: &str) {
        for c in &self.checks {
            println!("{} {:<44} {:>12.4e}  {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.limit);
        }
        let ok = self.checks.iter().filter(|c| c.pass).count();
        println!("{scenario}: {ok}/{} checks passed", self.checks.len());
    }
}

/// Scenario-scoped writer into the output directory.
pub struct Output {
    dir: PathBuf,
    prefix: String,
}

impl Output {
    pub fn new(dir: &Path, scenario: &str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), prefix: scenario.to_string() })
    }

    pub fn file_name(&self, suffix: &str) -> String {
        format!("{}_{suffix}", self.prefix)
    }

    pub fn create(&self, suffix: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(self.file_name(suffix));
        File::create(&path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn json<S: Serialize>(&self, suffix: &str, value: &S) -> Result<(), CliError> {
        let mut w = self.create(suffix)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))
    }

    /// Writes rows of floats under `header`, 17 significant digits each.
    pub fn table(&self, suffix: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut w = self.create(suffix)?;
        let io = |e: std::io::Error| CliError::Io(e.to_string());
        writeln!(w, "{}", header.join(",")).map_err(io)?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| vacfield::integrate::fmt_sig17(*v)).collect();
            writeln!(w, "{}", line.join(",")).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}
