use rayon::prelude::*;

use super::config::{SweepConfig, Truncation};
use super::table::{Cell, Table};
use crate::channels::LossScenario;
use crate::economical::{eco_surface, optimize_beta_with, EcoOptions, EcoResult};
use crate::entanglement::negativity;
use crate::fock_oracle::{
    auto_cutoff_for, ecs_fock, oracle_entropy_of_reduction, oracle_negativity_for, oracle_qfi_for, OracleOptions,
};
use crate::qfi::{cfi_pnrd, compare_at_fixed_energy, qfi_ecs};
use crate::sld_cfi::verify_sld_identities;
use crate::states::{degree_of_entanglement, ProbeSpec, Sign};
use crate::Result;

/// Evaluates `f` on every item in parallel and keeps grid order.
///
/// On failure the error of the earliest failing item is returned, so the
/// outcome does not depend on scheduling.
pub fn par_rows<T, F>(items: &[T], f: F) -> Result<Vec<Vec<Cell>>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<Cell>> + Sync + Send,
{
    items.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

fn product2(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn product3(a: &[f64], b: &[f64], c: &[f64]) -> Vec<(f64, f64, f64)> {
    product2(a, b).into_iter().flat_map(|(x, y)| c.iter().map(move |&z| (x, y, z))).collect()
}

pub fn cutoff_for(cfg: &SweepConfig, p: &ProbeSpec) -> usize {
    match cfg.truncation {
        Truncation::Auto => auto_cutoff_for(p),
        Truncation::Fixed(n) => n,
    }
}

fn with_oracle(mut cols: Vec<&'static str>, cfg: &SweepConfig, extra: &[&'static str]) -> Table {
    if cfg.oracle {
        cols.extend_from_slice(extra);
    }
    Table::new(&cols)
}

fn fill(mut table: Table, rows: Vec<Vec<Cell>>) -> Table {
    for r in rows {
        table.push(r);
    }
    table
}

/// Oracle QFI divided by the oracle mean photon number in mode `a`.
fn oracle_eco(p: &ProbeSpec, s: &LossScenario, cutoff: usize) -> Result<f64> {
    let q = oracle_qfi_for(p, s, cutoff, &OracleOptions::default())?;
    let (n_a, _) = ecs_fock(p, cutoff)?.number_a_moments();
    Ok(q.value / n_a)
}

pub fn doe(cfg: &SweepConfig) -> Result<Table> {
    let table =
        with_oracle(vec!["alpha", "beta", "sign", "gap", "doe"], cfg, &["doe_oracle", "oracle_residual", "cutoff"]);
    let rows = par_rows(&product2(&cfg.alpha, &cfg.beta), |&(a, b)| {
        let p = ProbeSpec::new(a, b, cfg.sign)?;
        let v = degree_of_entanglement(&p);
        let mut row = vec![a.into(), b.into(), cfg.sign.to_string().into(), (a - b).abs().into(), v.into()];
        if cfg.oracle {
            let n = cutoff_for(cfg, &p);
            let o = oracle_entropy_of_reduction(&ecs_fock(&p, n)?)?;
            row.extend([o.into(), (o - v).abs().into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

pub fn qfi(cfg: &SweepConfig) -> Result<Table> {
    let table = with_oracle(
        vec![
            "alpha",
            "beta",
            "rate",
            "model",
            "sign",
            "qfi",
            "variance_term",
            "coherence_penalty",
            "mean_photon_a",
            "eco_ratio",
            "separable_fallback",
        ],
        cfg,
        &["qfi_oracle", "oracle_residual", "eigen_residual", "cutoff"],
    );
    let rows = par_rows(&product3(&cfg.alpha, &cfg.beta, &cfg.rate), |&(a, b, r)| {
        let p = ProbeSpec::new(a, b, cfg.sign)?;
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let q = qfi_ecs(&p, &s)?;
        let mut row = vec![
            a.into(),
            b.into(),
            r.into(),
            cfg.model.to_string().into(),
            cfg.sign.to_string().into(),
            q.value.into(),
            q.variance_term.into(),
            q.coherence_penalty.into(),
            q.mean_photon_a.into(),
            q.eco_ratio.into(),
            q.separable_fallback.into(),
        ];
        if cfg.oracle {
            let n = cutoff_for(cfg, &p);
            let o = oracle_qfi_for(&p, &s, n, &OracleOptions::default())?;
            row.extend([o.value.into(), (o.value - q.value).abs().into(), o.eigen_residual.into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

pub fn negativity_sweep(cfg: &SweepConfig) -> Result<Table> {
    let table = with_oracle(
        vec!["alpha", "beta", "rate", "model", "negativity"],
        cfg,
        &["negativity_oracle", "oracle_residual", "cutoff"],
    );
    let rows = par_rows(&product3(&cfg.alpha, &cfg.beta, &cfg.rate), |&(a, b, r)| {
        let p = ProbeSpec::new(a, b, cfg.sign)?;
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let v = negativity(&p, &s)?.value;
        let mut row = vec![a.into(), b.into(), r.into(), cfg.model.to_string().into(), v.into()];
        if cfg.oracle {
            let n = cutoff_for(cfg, &p);
            let o = oracle_negativity_for(&p, &s, n)?;
            row.extend([o.into(), (o - v).abs().into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

fn eco_options(cfg: &SweepConfig) -> EcoOptions {
    EcoOptions { grid_points: cfg.grid_points, sign: cfg.sign, ..EcoOptions::default() }
}

const ECO_COLUMNS: [&str; 9] = ["alpha", "rate", "model", "sign", "beta_opt", "gap", "eco", "boundary", "refined"];

fn eco_table(cfg: &SweepConfig, results: &[EcoResult]) -> Result<Table> {
    let table = with_oracle(ECO_COLUMNS.to_vec(), cfg, &["eco_oracle", "oracle_residual", "cutoff"]);
    let rows = par_rows(results, |e| {
        let mut row = vec![
            e.alpha.into(),
            e.rate.into(),
            e.model.to_string().into(),
            cfg.sign.to_string().into(),
            e.beta_opt.into(),
            (e.alpha - e.beta_opt).abs().into(),
            e.eco_value.into(),
            e.boundary.into(),
            e.refined.into(),
        ];
        if cfg.oracle {
            let p = ProbeSpec::new(e.alpha, e.beta_opt, cfg.sign)?;
            let s = LossScenario::new(e.model, e.rate, 0.0)?;
            let n = cutoff_for(cfg, &p);
            let o = oracle_eco(&p, &s, n)?;
            row.extend([o.into(), (o - e.eco_value).abs().into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

/// Optimal `β` per `(α, R)`; with `trace` the full grid scan instead.
pub fn eco(cfg: &SweepConfig) -> Result<Table> {
    let opts = eco_options(cfg);
    let cells = product2(&cfg.alpha, &cfg.rate);
    let results: Vec<EcoResult> = cells
        .par_iter()
        .map(|&(a, r)| optimize_beta_with(a, &LossScenario::new(cfg.model, r, 0.0)?, &opts))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    if !cfg.trace {
        return eco_table(cfg, &results);
    }
    let mut table = Table::new(&["alpha", "rate", "beta", "ratio"]);
    for e in &results {
        for g in &e.grid_trace {
            table.push(vec![e.alpha.into(), e.rate.into(), g.beta.into(), g.ratio.into()]);
        }
    }
    Ok(table)
}

pub fn eco_surface_table(cfg: &SweepConfig) -> Result<Table> {
    let results = eco_surface(&cfg.alpha, &cfg.rate, cfg.model, &eco_options(cfg))?;
    eco_table(cfg, &results)
}

pub fn compare(cfg: &SweepConfig) -> Result<Table> {
    let table = with_oracle(
        vec!["n_av", "gamma", "rate", "model", "sign", "alpha", "beta", "qfi_ecs", "qfi_coherent", "advantage"],
        cfg,
        &["qfi_ecs_oracle", "oracle_residual", "cutoff"],
    );
    let rows = par_rows(&product3(&cfg.n_av, &cfg.gamma, &cfg.rate), |&(n_av, g, r)| {
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let c = compare_at_fixed_energy(n_av, g, cfg.sign, &s)?;
        let mut row = vec![
            n_av.into(),
            g.into(),
            r.into(),
            cfg.model.to_string().into(),
            cfg.sign.to_string().into(),
            c.alpha.into(),
            c.beta.into(),
            c.qfi_ecs.into(),
            c.qfi_coherent.into(),
            (c.qfi_ecs - c.qfi_coherent).into(),
        ];
        if cfg.oracle {
            let p = ProbeSpec::new(c.alpha, c.beta, cfg.sign)?;
            let n = cutoff_for(cfg, &p);
            let o = oracle_qfi_for(&p, &s, n, &OracleOptions::default())?.value;
            row.extend([o.into(), (o - c.qfi_ecs).abs().into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

pub fn sld_check(cfg: &SweepConfig) -> Result<Table> {
    let table = Table::new(&[
        "alpha",
        "beta",
        "rate",
        "model",
        "coefficient_a",
        "zero_mean_residual",
        "lyapunov_residual_projected",
        "lyapunov_residual_full",
        "tr_rho_l2",
        "qfi",
        "qfi_oracle",
        "qfi_residual",
        "support_null_contribution",
        "a_vanishes_with_positive_qfi",
        "basis_overlap",
        "cutoff",
    ]);
    let rows = par_rows(&product3(&cfg.alpha, &cfg.beta, &cfg.rate), |&(a, b, r)| {
        let p = ProbeSpec::new(a, b, cfg.sign)?;
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let n = cutoff_for(cfg, &p);
        let rep = verify_sld_identities(&p, &s, n)?;
        Ok(vec![
            a.into(),
            b.into(),
            r.into(),
            cfg.model.to_string().into(),
            rep.coefficient_a.into(),
            rep.zero_mean_residual.into(),
            rep.lyapunov_residual_projected.into(),
            rep.lyapunov_residual_full.into(),
            rep.tr_rho_l2.into(),
            rep.qfi.into(),
            rep.qfi_oracle.into(),
            rep.qfi_residual.into(),
            rep.support_null_contribution.into(),
            rep.a_vanishes_with_positive_qfi.into(),
            rep.basis_overlap.into(),
            n.into(),
        ])
    })?;
    Ok(fill(table, rows))
}

pub fn cfi(cfg: &SweepConfig) -> Result<Table> {
    let table = Table::new(&[
        "alpha",
        "beta",
        "rate",
        "phi",
        "model",
        "cfi",
        "qfi",
        "qfi_minus_cfi",
        "captured_probability",
        "cutoff",
    ]);
    let points: Vec<(f64, f64, f64, f64)> = product3(&cfg.alpha, &cfg.beta, &cfg.rate)
        .into_iter()
        .flat_map(|(a, b, r)| cfg.phi.iter().map(move |&f| (a, b, r, f)))
        .collect();
    let rows = par_rows(&points, |&(a, b, r, phi)| {
        let p = ProbeSpec::new(a, b, cfg.sign)?;
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let n = cutoff_for(cfg, &p);
        let c = cfi_pnrd(&p, &s, phi, n)?;
        let q = qfi_ecs(&p, &s)?.value;
        Ok(vec![
            a.into(),
            b.into(),
            r.into(),
            phi.into(),
            cfg.model.to_string().into(),
            c.value.into(),
            q.into(),
            (q - c.value).into(),
            c.captured_probability.into(),
            n.into(),
        ])
    })?;
    Ok(fill(table, rows))
}

/// `β = γα` negativity curves against `R` for each `(α, γ)`.
pub fn negativity_curves(cfg: &SweepConfig) -> Result<Table> {
    let table = with_oracle(
        vec!["alpha", "gamma", "beta", "rate", "model", "negativity"],
        cfg,
        &["negativity_oracle", "oracle_residual", "cutoff"],
    );
    let rows = par_rows(&product3(&cfg.alpha, &cfg.gamma, &cfg.rate), |&(a, g, r)| {
        let p = ProbeSpec::new(a, g * a, Sign::Plus)?;
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let v = negativity(&p, &s)?.value;
        let mut row = vec![a.into(), g.into(), (g * a).into(), r.into(), cfg.model.to_string().into(), v.into()];
        if cfg.oracle {
            let n = cutoff_for(cfg, &p);
            let o = oracle_negativity_for(&p, &s, n)?;
            row.extend([o.into(), (o - v).abs().into(), n.into()]);
        }
        Ok(row)
    })?;
    Ok(fill(table, rows))
}

/// Energy-matched QFI of `β = γα` probes, the `γ = 0` probe of the same sign
/// and the coherent baseline.
pub fn comparison_curves(cfg: &SweepConfig) -> Result<Table> {
    let table = Table::new(&[
        "gamma",
        "rate",
        "model",
        "sign",
        "n_av",
        "alpha",
        "beta",
        "qfi_ecs",
        "qfi_gamma_zero",
        "qfi_coherent",
    ]);
    let rows = par_rows(&product3(&cfg.gamma, &cfg.rate, &cfg.n_av), |&(g, r, n_av)| {
        let s = LossScenario::new(cfg.model, r, 0.0)?;
        let c = compare_at_fixed_energy(n_av, g, cfg.sign, &s)?;
        let zero = compare_at_fixed_energy(n_av, 0.0, cfg.sign, &s)?;
        Ok(vec![
            g.into(),
            r.into(),
            cfg.model.to_string().into(),
            cfg.sign.to_string().into(),
            n_av.into(),
            c.alpha.into(),
            c.beta.into(),
            c.qfi_ecs.into(),
            zero.qfi_ecs.into(),
            c.qfi_coherent.into(),
        ])
    })?;
    Ok(fill(table, rows))
}

/// `|α − β|` and DOE, one row per `(α, β)`.
pub fn doe_curve(cfg: &SweepConfig) -> Result<Table> {
    let table = with_oracle(vec!["gap", "doe"], cfg, &["doe_oracle", "oracle_residual", "cutoff"]);
    let full = doe(cfg)?;
    let rows = full
        .rows
        .into_iter()
        .map(|mut r| {
            let mut row = vec![r[3].clone(), r[4].clone()];
            row.extend(r.drain(5..));
            row
        })
        .collect();
    Ok(fill(table, rows))
}
