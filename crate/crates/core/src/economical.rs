//! QFI per input photon and its maximization over the second amplitude `β`.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{LossModel, LossScenario};
use crate::numeric::golden_section_max;
use crate::qfi::qfi_ecs;
use crate::states::{mean_photon_a, ProbeSpec, Sign};
use crate::{Error, Result};

/// `F_Q / ⟨n̂_a⟩`.
pub fn eco_ratio(p: &ProbeSpec, s: &LossScenario) -> Result<f64> {
    let n = mean_photon_a(p);
    if n <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(qfi_ecs(p, s)?.value / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EcoOptions {
    pub grid_points: usize,
    /// Gap kept below `α` at the top of the search interval.
    pub epsilon: f64,
    pub refine_tol: f64,
    /// Relative margin within which the optimum counts as the separable limit `4T`.
    pub boundary_rel: f64,
    pub sign: Sign,
}

impl Default for EcoOptions {
    fn default() -> Self {
        Self { grid_points: 401, epsilon: 1e-6, refine_tol: 1e-6, boundary_rel: 1e-9, sign: Sign::Plus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    pub beta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcoResult {
    pub alpha: f64,
    pub rate: f64,
    pub model: LossModel,
    pub beta_opt: f64,
    pub eco_value: f64,
    pub grid_trace: Vec<GridSample>,
    /// Golden-section refinement converged and did not lose to the grid.
    pub refined: bool,
    /// No interior `β` beats the separable limit `4T`; `beta_opt` is then `α − ε`.
    pub boundary: bool,
}

pub fn optimize_beta(alpha: f64, s: &LossScenario, grid_points: usize) -> Result<EcoResult> {
    optimize_beta_with(alpha, s, &EcoOptions { grid_points, ..EcoOptions::default() })
}

/// Grid search over `β ∈ [−α, α − ε]` followed by golden-section refinement
/// on the two cells around the best grid point. Ties go to the smaller `β`.
pub fn optimize_beta_with(alpha: f64, s: &LossScenario, opts: &EcoOptions) -> Result<EcoResult> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidProbe(format!("alpha must be positive, got {alpha}")));
    }
    if opts.grid_points < 2 {
        return Err(Error::Config("grid_points must be at least 2".into()));
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 2.0 * alpha) {
        return Err(Error::Config(format!("epsilon {} does not fit below alpha {alpha}", opts.epsilon)));
    }
    let ratio = |beta: f64| -> Result<f64> { eco_ratio(&ProbeSpec::new(alpha, beta, opts.sign)?, s) };

    let lo = -alpha;
    let hi = alpha - opts.epsilon;
    let step = (hi - lo) / (opts.grid_points - 1) as f64;
    let mut trace = Vec::with_capacity(opts.grid_points);
    for i in 0..opts.grid_points {
        let beta = if i + 1 == opts.grid_points { hi } else { lo + step * i as f64 };
        trace.push(GridSample { beta, ratio: ratio(beta)? });
    }
    let mut best = 0;
    for (i, g) in trace.iter().enumerate() {
        if g.ratio > trace[best].ratio {
            best = i;
        }
    }
    let (mut beta_opt, mut eco_value) = (trace[best].beta, trace[best].ratio);

    let left = trace[best.saturating_sub(1)].beta;
    let right = trace[(best + 1).min(trace.len() - 1)].beta;
    let mut failure = None;
    let g = golden_section_max(
        |b| match ratio(b) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        left,
        right,
        opts.refine_tol,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut refined = g.converged;
    if g.value > eco_value {
        beta_opt = g.x;
        eco_value = g.value;
    } else if g.value < eco_value {
        refined = false;
    }

    let mut boundary = false;
    if opts.sign == Sign::Plus {
        let separable = 4.0 * s.transmissivity();
        if eco_value <= separable * (1.0 + opts.boundary_rel) {
            boundary = true;
            beta_opt = hi;
            eco_value = separable;
        }
    }

    Ok(EcoResult { alpha, rate: s.rate(), model: s.model(), beta_opt, eco_value, grid_trace: trace, refined, boundary })
}

/// One [`EcoResult`] per `(α, R)` cell, `α` outermost, in grid order.
pub fn eco_surface(alpha_grid: &[f64], r_grid: &[f64], model: LossModel, opts: &EcoOptions) -> Result<Vec<EcoResult>> {
    check_sorted("alpha", alpha_grid)?;
    check_sorted("rate", r_grid)?;
    let cells: Vec<(f64, f64)> = alpha_grid.iter().flat_map(|&a| r_grid.iter().map(move |&r| (a, r))).collect();
    cells.par_iter().map(|&(a, r)| optimize_beta_with(a, &LossScenario::new(model, r, 0.0)?, opts)).collect()
}

fn check_sorted(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config(format!("{name} grid is not sorted ascending")));
    }
    Ok(())
}
