//! Platt scaling of decision scores.
//!
//! Fits `P(y=1|s) = 1/(1+exp(A s + B))` by Newton's method with
//! backtracking on the regularized log-likelihood, using the smoothed
//! targets `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`. `A` is constrained
//! below `-MIN_SLOPE` so probability is strictly increasing in the score.

use serde::{Deserialize, Serialize};

use super::{train, CalibratedModel, LinearModel, SvmConfig};
use crate::cohort::FeatureMatrix;
use crate::error::{AuditError, Result};
use crate::resampling::kfold_indices;
use crate::seed;

pub const MIN_SLOPE: f64 = 1e-6;

const MAX_ITER: usize = 100;
const MIN_STEP: f64 = 1e-10;
const SIGMA: f64 = 1e-12;
const EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

/// Largest double below 1.
const ALMOST_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Kept strictly inside (0, 1) where the logistic saturates.
pub fn platt_probability(score: f64, a: f64, b: f64) -> f64 {
    let f = score * a + b;
    let p = if f >= 0.0 {
        let e = (-f).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + f.exp())
    };
    p.clamp(f64::MIN_POSITIVE, ALMOST_ONE)
}

/// Negative log-likelihood against smoothed targets.
fn objective(scores: &[f64], targets: &[f64], a: f64, b: f64) -> f64 {
    scores
        .iter()
        .zip(targets)
        .map(|(&s, &t)| {
            let f = s * a + b;
            if f >= 0.0 {
                t * f + (1.0 + (-f).exp()).ln()
            } else {
                (t - 1.0) * f + (1.0 + f.exp()).ln()
            }
        })
        .sum()
}

/// Newton iterations over (a, b), or over b alone when `fixed_a` is set.
fn newton(scores: &[f64], targets: &[f64], mut a: f64, mut b: f64, fixed_a: bool) -> (f64, f64) {
    let mut fval = objective(scores, targets, a, b);
    for _ in 0..MAX_ITER {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
        for (&s, &t) in scores.iter().zip(targets) {
            let f = s * a + b;
            let (p, q) = if f >= 0.0 {
                let e = (-f).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = f.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += s * s * d2;
            h22 += d2;
            h21 += s * d2;
            let d1 = t - p;
            g1 += s * d1;
            g2 += d1;
        }
        if fixed_a {
            g1 = 0.0;
        }
        if g1.abs() < EPS && g2.abs() < EPS {
            break;
        }
        let (da, db) = if fixed_a {
            (0.0, -g2 / h22)
        } else {
            let det = h11 * h22 - h21 * h21;
            (-(h22 * g1 - h21 * g2) / det, -(-h21 * g1 + h11 * g2) / det)
        };
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        while step >= MIN_STEP {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(scores, targets, na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if step < MIN_STEP {
            break;
        }
    }
    (a, b)
}

/// Fits Platt parameters to `(score, label)` pairs.
pub fn fit_platt(scores: &[f64], labels: &[bool]) -> Result<PlattParams> {
    if scores.len() != labels.len() {
        return Err(AuditError::DimensionMismatch {
            expected: scores.len(),
            found: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(AuditError::DegenerateLabels);
    }
    let hi = (pos + 1.0) / (pos + 2.0);
    let lo = 1.0 / (neg + 2.0);
    let targets: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();
    let b0 = ((neg + 1.0) / (pos + 1.0)).ln();

    let (mut a, mut b) = newton(scores, &targets, 0.0, b0, false);
    if !(a < -MIN_SLOPE) {
        a = -MIN_SLOPE;
        b = newton(scores, &targets, a, b0, true).1;
    }
    Ok(PlattParams { a, b })
}

/// Calibrates `model` on a held-out set.
pub fn calibrate(model: &LinearModel, x_cal: &FeatureMatrix, y_cal: &[bool]) -> Result<CalibratedModel> {
    let scores = model.decisions(x_cal)?;
    let p = fit_platt(&scores, y_cal)?;
    Ok(CalibratedModel {
        base: model.clone(),
        platt_a: p.a,
        platt_b: p.b,
    })
}

/// Trains on all of `x` and calibrates on out-of-fold scores from
/// `config.calibration_folds` label-stratified folds.
pub fn train_calibrated(x: &FeatureMatrix, config: &SvmConfig, seed: u64) -> Result<CalibratedModel> {
    config.validate()?;
    let folds = kfold_indices(
        &x.labels,
        config.calibration_folds,
        seed::derive(seed, 1),
        ["admit", "not-admit"],
    )?;
    let mut scores = vec![0.0; x.n_rows];
    for fold in 0..folds.k {
        let (train_idx, held_idx) = folds.split(fold);
        let sub = x.select_rows(&train_idx);
        let m = train(&sub, config, seed::derive(seed, 2 + fold as u64))?;
        for i in held_idx {
            scores[i] = m.score(x.row(i));
        }
    }
    let params = fit_platt(&scores, &x.labels)?;
    let base = train(x, config, seed)?;
    Ok(CalibratedModel {
        base,
        platt_a: params.a,
        platt_b: params.b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn separated_scores_give_confident_probabilities() {
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for i in 0..100 {
            let off = i as f64 * 0.02;
            scores.push(2.0 + off);
            labels.push(true);
            scores.push(-2.0 - off);
            labels.push(false);
        }
        let p = fit_platt(&scores, &labels).unwrap();
        assert!(p.a < 0.0);
        for (&s, &l) in scores.iter().zip(&labels) {
            let prob = platt_probability(s, p.a, p.b);
            if l {
                assert!(prob > 0.9, "{prob}");
            } else {
                assert!(prob < 0.1, "{prob}");
            }
        }
    }

    #[test]
    fn noise_scores_collapse_to_base_rate() {
        let mut rng = seed::rng(3);
        let scores: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let mut labels: Vec<bool> = (0..2000).map(|i| i % 10 < 3).collect();
        labels.shuffle(&mut rng);
        let base = 0.3;
        let p = fit_platt(&scores, &labels).unwrap();
        for &s in &scores {
            assert!((platt_probability(s, p.a, p.b) - base).abs() < 0.15);
        }
    }

    #[test]
    fn slope_is_negative_even_when_anticorrelated() {
        let scores: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let labels: Vec<bool> = (0..50).map(|i| i < 25).collect();
        let p = fit_platt(&scores, &labels).unwrap();
        assert!(p.a <= -MIN_SLOPE);
        assert!(platt_probability(1.0, p.a, p.b) < platt_probability(2.0, p.a, p.b));
    }

    #[test]
    fn monotone_in_score() {
        let p = PlattParams { a: -1.7, b: 0.3 };
        let mut prev = 0.0;
        for k in -50..50 {
            let prob = platt_probability(k as f64 * 0.2, p.a, p.b);
            assert!(prob > prev && prob < 1.0);
            prev = prob;
        }
    }

    #[test]
    fn single_class_calibration_set() {
        assert!(matches!(
            fit_platt(&[0.1, 0.2], &[true, true]),
            Err(AuditError::DegenerateLabels)
        ));
    }
}
