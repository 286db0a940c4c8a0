//! Dual coordinate descent for the L1-loss (hinge) linear SVM.
//!
//! Solves `min_a 1/2 a'Qa - sum(a)` subject to `0 <= a_i <= C` with
//! `Q_ij = y_i y_j x_i·x_j`, where each `x_i` carries an appended constant
//! 1 so the intercept is the last primal weight. The primal weights are
//! maintained as `w = sum_i a_i y_i x_i`. Inactive coordinates are shrunk
//! between sweeps; convergence is only declared after a full unshrunk
//! sweep whose largest projected-gradient violation is below `tol`.
//!
//! An epoch is `n` coordinate visits, so a sweep over a shrunk active set
//! counts as the fraction of the data it touched. `max_iter` bounds epochs
//! in this sense.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::{dot, LinearModel, SvmConfig};
use crate::cohort::FeatureMatrix;
use crate::error::{AuditError, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub sweep: usize,
    /// Coordinate visits so far divided by `n`.
    pub epochs: f64,
    /// Whether the sweep visited every coordinate.
    pub full_sweep: bool,
    pub max_violation: f64,
    pub primal: f64,
    /// Dual objective `sum(a) - 1/2 |w|^2`.
    pub dual: f64,
}

/// A trained model with its dual solution and per-epoch trace.
#[derive(Debug, Clone)]
pub struct Training {
    pub model: LinearModel,
    pub alphas: Vec<f64>,
    pub trace: Vec<EpochStats>,
}

fn check_inputs(x: &FeatureMatrix, config: &SvmConfig) -> Result<()> {
    config.validate()?;
    if x.n_rows < 2 {
        return Err(AuditError::InvalidArgument("training needs at least 2 rows".into()));
    }
    let pos = x.labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == x.n_rows {
        return Err(AuditError::DegenerateLabels);
    }
    if let Some(k) = x.data.iter().position(|v| !v.is_finite()) {
        return Err(AuditError::NonFiniteFeature {
            row: k / x.n_cols,
            col: k % x.n_cols,
        });
    }
    Ok(())
}

pub fn train(x: &FeatureMatrix, config: &SvmConfig, seed: u64) -> Result<LinearModel> {
    Ok(solve(x, config, seed, false)?.model)
}

/// Like [`train`], also returning the dual variables and recording primal
/// and dual objectives after every epoch.
pub fn train_traced(x: &FeatureMatrix, config: &SvmConfig, seed: u64) -> Result<Training> {
    solve(x, config, seed, true)
}

fn solve(x: &FeatureMatrix, config: &SvmConfig, seed: u64, traced: bool) -> Result<Training> {
    check_inputs(x, config)?;
    let n = x.n_rows;
    let d = x.n_cols;
    let c = config.c;
    let y: Vec<f64> = x.labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let qd: Vec<f64> = x.rows().map(|r| dot(r, r) + 1.0).collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut index: Vec<usize> = (0..n).collect();
    let mut active = n;
    let mut pg_max_old = f64::INFINITY;
    let mut pg_min_old = f64::NEG_INFINITY;
    let mut rng = seed::rng(seed);
    let mut trace = Vec::new();
    let mut converged = false;
    let budget = config.max_iter.saturating_mul(n);
    let mut visits = 0usize;
    let mut sweeps = 0;

    while visits < budget {
        index[..active].shuffle(&mut rng);
        let full_sweep = active == n;
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        let mut s = 0;
        while s < active {
            visits += 1;
            let i = index[s];
            let row = x.row(i);
            let g = y[i] * (dot(&w, row) + b) - 1.0;
            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += step * xj;
                }
                b += step;
            }
            s += 1;
        }
        sweeps += 1;

        let violation = pg_max.abs().max(pg_min.abs());
        let violation = if violation.is_finite() { violation } else { 0.0 };
        if traced {
            trace.push(EpochStats {
                sweep: sweeps,
                epochs: visits as f64 / n as f64,
                full_sweep,
                max_violation: violation,
                primal: primal_objective(x, &w, b, c),
                dual: dual_objective(&alpha, &w, b),
            });
        }

        if violation < config.tol {
            if full_sweep && active == n {
                converged = true;
                break;
            }
            // Converged on the shrunk set: re-check every coordinate.
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max <= 0.0 { f64::INFINITY } else { pg_max };
        pg_min_old = if pg_min >= 0.0 { f64::NEG_INFINITY } else { pg_min };
    }

    let model = LinearModel {
        column_names: x.column_names.clone(),
        training_objective: primal_objective(x, &w, b, c),
        weights: w,
        intercept: b,
        c,
        converged,
        iterations_used: visits.div_ceil(n),
    };
    Ok(Training { model, alphas: alpha, trace })
}

/// `1/2 (|w|^2 + b^2) + C sum_i max(0, 1 - y_i (w·x_i + b))`.
pub fn primal_objective(x: &FeatureMatrix, w: &[f64], b: f64, c: f64) -> f64 {
    let hinge: f64 = x
        .rows()
        .zip(&x.labels)
        .map(|(row, &l)| {
            let y = if l { 1.0 } else { -1.0 };
            (1.0 - y * (dot(w, row) + b)).max(0.0)
        })
        .sum();
    0.5 * (dot(w, w) + b * b) + c * hinge
}

/// `sum(a) - 1/2 (|w|^2 + b^2)` for `w, b` generated by `alpha`.
pub fn dual_objective(alpha: &[f64], w: &[f64], b: f64) -> f64 {
    alpha.iter().sum::<f64>() - 0.5 * (dot(w, w) + b * b)
}

/// Largest projected-gradient magnitude over `coords` for dual point
/// `alpha` with primal `(w, b)`.
pub fn kkt_violation(x: &FeatureMatrix, alpha: &[f64], w: &[f64], b: f64, c: f64, coords: &[usize]) -> f64 {
    coords
        .iter()
        .map(|&i| {
            let y = if x.labels[i] { 1.0 } else { -1.0 };
            let g = y * (dot(w, x.row(i)) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg.abs()
        })
        .fold(0.0, f64::max)
}
