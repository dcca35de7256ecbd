//! Figure datasets: each figure is a subcommand run with its own defaults.

use super::commands;
use super::config::{ConfigMap, SweepConfig};
use super::table::Table;
use crate::{Error, Result};

pub const FIGURES: [u8; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Defaults of figure `n`; flags and config files still override them.
pub fn defaults(n: u8) -> Result<ConfigMap> {
    let pairs: &[(&str, &str)] = match n {
        2 => &[("alpha", "0:4:81"), ("beta", "0"), ("sign", "plus")],
        3 => &[("alpha", "0.4:3:27"), ("rate", "0"), ("model", "both"), ("sign", "plus")],
        4 => &[("alpha", "0.6,1,1.8,3"), ("rate", "0.001,0.05:0.8:16"), ("model", "both"), ("sign", "plus")],
        6 => &[("alpha", "0.6,1,1.8,3"), ("rate", "0.001,0.05:0.8:16"), ("model", "one"), ("sign", "plus")],
        5 => &[
            ("gamma", "-0.2,0.3,0.5,0.7"),
            ("rate", "0,0.1,0.3,0.5"),
            ("n_av", "0.1:4:40"),
            ("model", "both"),
            ("sign", "plus"),
        ],
        7 => &[
            ("gamma", "-0.2,0.3,0.5,0.7"),
            ("rate", "0,0.1,0.3,0.5"),
            ("n_av", "0.1:4:40"),
            ("model", "one"),
            ("sign", "plus"),
        ],
        8 => &[
            ("alpha", "1,1.8,3,5"),
            ("gamma", "-0.2,0,0.5,0.7"),
            ("rate", "0:1:21"),
            ("model", "both"),
            ("sign", "plus"),
        ],
        9 => &[
            ("alpha", "1,1.8,3,5"),
            ("gamma", "-0.2,0,0.5,0.7"),
            ("rate", "0:1:21"),
            ("model", "one"),
            ("sign", "plus"),
        ],
        10 => &[("alpha", "0.2:3:15"), ("rate", "0.001,0.1:0.9:9"), ("model", "both"), ("sign", "plus")],
        11 => &[
            ("gamma", "-1,0.3"),
            ("rate", "0,0.1,0.3,0.5"),
            ("n_av", "0.6:4:35"),
            ("model", "both"),
            ("sign", "minus"),
        ],
        12 => {
            &[("gamma", "-1,0.3"), ("rate", "0,0.1,0.3,0.5"), ("n_av", "0.6:4:35"), ("model", "one"), ("sign", "minus")]
        }
        other => return Err(Error::Config(format!("no figure {other} (available: 2-12)"))),
    };
    Ok(ConfigMap::from_pairs(pairs))
}

pub fn run(n: u8, cfg: &SweepConfig) -> Result<Table> {
    match n {
        2 => commands::doe_curve(cfg),
        3 | 4 | 6 | 10 => commands::eco_surface_table(cfg),
        5 | 7 | 11 | 12 => commands::comparison_curves(cfg),
        8 | 9 => commands::negativity_curves(cfg),
        other => Err(Error::Config(format!("no figure {other} (available: 2-12)"))),
    }
}
