use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channels::LossModel;
use crate::states::Sign;
use crate::{Error, Result};

/// Keys accepted on the command line and in config files.
pub const KEYS: [&str; 14] = [
    "alpha",
    "beta",
    "gamma",
    "rate",
    "phi",
    "n_av",
    "model",
    "sign",
    "truncation",
    "grid_points",
    "format",
    "output",
    "oracle",
    "trace",
];

/// Values used when neither flags, file nor the subcommand supply one.
pub fn base_defaults() -> ConfigMap {
    ConfigMap::from_pairs(&[
        ("alpha", "1"),
        ("beta", "0"),
        ("gamma", "0"),
        ("rate", "0"),
        ("phi", "0.5"),
        ("n_av", "0.5:4:8"),
        ("model", "both"),
        ("sign", "plus"),
        ("truncation", "auto"),
        ("grid_points", "401"),
        ("format", "csv"),
        ("oracle", "false"),
        ("trace", "false"),
    ])
}

/// Flat string-keyed configuration, merged before it is parsed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        Self(pairs.iter().map(|(k, v)| ((*k).to_owned(), (*v).to_owned())).collect())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        self.0.insert(key.to_owned(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    /// Entries of `other` replace those of `self`.
    pub fn overlay(mut self, other: &ConfigMap) -> Self {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    /// `key = value` lines; `#` starts a comment, blank lines are ignored.
    pub fn parse_file_contents(text: &str) -> Result<Self> {
        let mut map = ConfigMap::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().replace('-', "_");
            map.set(&key, v.trim()).map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(map)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Parses `"a,b,c"` where each item is a number or an inclusive
/// `start:stop:count` range.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(Error::Config(format!("empty item in grid '{spec}'")));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(parse_number(v)?),
            [start, stop, count] => {
                let (a, b) = (parse_number(start)?, parse_number(stop)?);
                let n: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad point count '{count}' in '{item}'")))?;
                match n {
                    0 => return Err(Error::Config(format!("range '{item}' has no points"))),
                    1 => out.push(a),
                    _ => {
                        let step = (b - a) / (n - 1) as f64;
                        out.extend((0..n).map(|i| if i + 1 == n { b } else { a + step * i as f64 }));
                    }
                }
            }
            _ => return Err(Error::Config(format!("grid item '{item}' is neither a number nor start:stop:count"))),
        }
    }
    Ok(out)
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("'{}' is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!("{key}: expected true|false, got '{other}'"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv|json)"))),
        }
    }
}

/// Photon-number cutoff of the Fock oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Chosen per probe from its largest amplitude.
    Auto,
    Fixed(usize),
}

impl FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Truncation::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Truncation::Fixed(n)),
            _ => Err(Error::Config(format!("truncation must be 'auto' or a positive integer, got '{s}'"))),
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rate: Vec<f64>,
    pub phi: Vec<f64>,
    pub n_av: Vec<f64>,
    pub model: LossModel,
    pub sign: Sign,
    pub truncation: Truncation,
    pub grid_points: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub oracle: bool,
    pub trace: bool,
    /// The merged key/value view, echoed into JSON metadata.
    pub resolved: ConfigMap,
}

impl SweepConfig {
    pub fn from_map(map: ConfigMap) -> Result<Self> {
        let req = |k: &str| map.get(k).ok_or_else(|| Error::Config(format!("missing value for '{k}'")));
        let grid = |k: &str| -> Result<Vec<f64>> {
            let g = parse_grid(req(k)?).map_err(|e| Error::Config(format!("{k}: {}", strip_prefix(&e))))?;
            if g.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config(format!("{k}: grid is not sorted ascending")));
            }
            Ok(g)
        };
        let rate = grid("rate")?;
        if let Some(r) = rate.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Config(format!("rate: {r} lies outside [0, 1]")));
        }
        let grid_points: usize = req("grid_points")?
            .trim()
            .parse()
            .map_err(|_| Error::Config("grid_points must be a positive integer".into()))?;
        if grid_points < 2 {
            return Err(Error::Config("grid_points must be at least 2".into()));
        }
        Ok(Self {
            alpha: grid("alpha")?,
            beta: grid("beta")?,
            gamma: grid("gamma")?,
            rate,
            phi: grid("phi")?,
            n_av: grid("n_av")?,
            model: req("model")?.parse()?,
            sign: req("sign")?.parse()?,
            truncation: req("truncation")?.parse()?,
            grid_points,
            format: req("format")?.parse()?,
            output: map.get("output").filter(|s| !s.is_empty()).map(PathBuf::from),
            oracle: parse_bool("oracle", req("oracle")?)?,
            trace: parse_bool("trace", req("trace")?)?,
            resolved: map,
        })
    }
}
