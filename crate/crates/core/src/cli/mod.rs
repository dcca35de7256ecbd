//! Command-line front end.
//!
//! Every subcommand resolves a [`SweepConfig`] with the precedence
//! flags > config file > subcommand defaults > global defaults, evaluates its
//! grid in parallel and writes one table, CSV or JSON, in grid order.
//!
//! Exit codes: `0` success, `2` configuration or input errors, `3` numerical
//! failures (truncation, eigensolver, root finding). Errors are written to
//! stderr as a single JSON record.

pub mod commands;
pub mod config;
pub mod figs;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{parse_grid, ConfigMap, Format, SweepConfig, Truncation};
pub use table::{format_sig, Cell, Table};

use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ecs-metrology", version, about = "Entangled coherent state probes for lossy phase estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Degree of entanglement over an (alpha, beta) grid.
    Doe,
    /// Closed-form QFI over (alpha, beta, rate).
    Qfi,
    /// Optimal beta per (alpha, rate); --trace emits the grid scan.
    Eco,
    /// Optimal beta and ratio over an (alpha, rate) surface.
    EcoSurface,
    /// Energy-matched comparison with the coherent baseline over (n_av, gamma, rate).
    Compare,
    /// Output negativity over (alpha, beta, rate).
    Negativity,
    /// SLD identity residuals in the Fock representation.
    SldCheck,
    /// Photon-counting Fisher information over (alpha, beta, rate, phi).
    Cfi,
    /// Dataset of one figure (2-12).
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=12))]
        number: u8,
    },
}

impl Command {
    pub fn label(&self) -> String {
        match self {
            Command::Doe => "doe".into(),
            Command::Qfi => "qfi".into(),
            Command::Eco => "eco".into(),
            Command::EcoSurface => "eco-surface".into(),
            Command::Compare => "compare".into(),
            Command::Negativity => "negativity".into(),
            Command::SldCheck => "sld-check".into(),
            Command::Cfi => "cfi".into(),
            Command::Fig { number } => format!("fig {number}"),
        }
    }

    fn defaults(&self) -> Result<ConfigMap> {
        match self {
            Command::Fig { number } => figs::defaults(*number),
            Command::Eco | Command::EcoSurface => {
                Ok(ConfigMap::from_pairs(&[("alpha", "1"), ("rate", "0.001,0.1:0.8:8")]))
            }
            Command::Compare => Ok(ConfigMap::from_pairs(&[("n_av", "0.5:4:8"), ("gamma", "0")])),
            Command::Cfi => Ok(ConfigMap::from_pairs(&[("rate", "0.2"), ("phi", "0.1:1.5:15")])),
            _ => Ok(ConfigMap::default()),
        }
    }
}

/// Options shared by all subcommands. Grids are `a,b,c` or `start:stop:count`.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Ratio beta / alpha.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Photon loss rate R in [0, 1].
    #[arg(long, global = true)]
    pub rate: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Input mean photon number in mode a.
    #[arg(long = "n-av", global = true)]
    pub n_av: Option<String>,
    /// both | one
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// plus | minus
    #[arg(long, global = true)]
    pub sign: Option<String>,
    /// Oracle photon cutoff: auto | integer.
    #[arg(long, global = true)]
    pub truncation: Option<String>,
    #[arg(long = "grid-points", global = true)]
    pub grid_points: Option<String>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<String>,
    /// Append Fock-oracle columns and residuals.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Emit the full grid scan of `eco`.
    #[arg(long, global = true)]
    pub trace: bool,
}

impl Options {
    fn to_map(&self) -> Result<ConfigMap> {
        let mut m = ConfigMap::default();
        let pairs = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("rate", &self.rate),
            ("phi", &self.phi),
            ("n_av", &self.n_av),
            ("model", &self.model),
            ("sign", &self.sign),
            ("truncation", &self.truncation),
            ("grid_points", &self.grid_points),
            ("format", &self.format),
            ("output", &self.output),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                m.set(k, v.clone())?;
            }
        }
        if self.oracle {
            m.set("oracle", "true")?;
        }
        if self.trace {
            m.set("trace", "true")?;
        }
        Ok(m)
    }
}

/// Merged configuration of a parsed invocation.
pub fn resolve(cli: &Cli) -> Result<SweepConfig> {
    let file = match &cli.options.config {
        Some(path) => ConfigMap::read_file(path.as_ref())?,
        None => ConfigMap::default(),
    };
    let map = config::base_defaults().overlay(&cli.command.defaults()?).overlay(&file).overlay(&cli.options.to_map()?);
    SweepConfig::from_map(map)
}

pub fn execute(command: Command, cfg: &SweepConfig) -> Result<Table> {
    match command {
        Command::Doe => commands::doe(cfg),
        Command::Qfi => commands::qfi(cfg),
        Command::Eco => commands::eco(cfg),
        Command::EcoSurface => commands::eco_surface_table(cfg),
        Command::Compare => commands::compare(cfg),
        Command::Negativity => commands::negativity_sweep(cfg),
        Command::SldCheck => commands::sld_check(cfg),
        Command::Cfi => commands::cfi(cfg),
        Command::Fig { number } => figs::run(number, cfg),
    }
}

/// Serialized output of a finished run.
pub fn render(command: Command, cfg: &SweepConfig, table: &Table) -> String {
    match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": command.label(),
            "config": cfg.resolved.entries(),
        })),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn error_record(e: &Error) -> String {
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) } }).to_string()
}

/// Runs one invocation, writing data to `out` (unless `--output` is given) and
/// error records to `err`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let rendered = e.render().to_string();
            let record = json!({ "error": { "kind": "usage", "message": rendered.trim(), "exit_code": EXIT_CONFIG } });
            let _ = writeln!(err, "{record}");
            return EXIT_CONFIG;
        }
    };
    let result = resolve(&cli).and_then(|cfg| {
        let table = execute(cli.command, &cfg)?;
        let text = render(cli.command, &cfg, &table);
        match &cfg.output {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
            }
            None => out.write_all(text.as_bytes()).map_err(|e| Error::Config(format!("cannot write output: {e}"))),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{}", error_record(&e));
            exit_code(&e)
        }
    }
}

/// Entry point of the binary.
pub fn main_with_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
