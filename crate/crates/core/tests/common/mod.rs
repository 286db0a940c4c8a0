#![allow(dead_code)]

use admission_audit::cohort::{FeatureMatrix, SensitiveVariable};
use admission_audit::seed;
use admission_audit::svm::primal_objective;
use admission_audit::synth::{LabelRule, PlantedBias, PlantedMetric, RuleKind, Subgroup, SynthConfig};
use rand::Rng;

/// Two square clusters of `per_class` points each, centred on `+center`
/// and `-center`, with coordinates jittered uniformly by `spread`.
pub fn clusters(per_class: usize, center: f64, spread: f64, seed: u64) -> FeatureMatrix {
    let mut rng = seed::rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..2 * per_class {
        let pos = i % 2 == 0;
        let c = if pos { center } else { -center };
        rows.push(vec![c + rng.random_range(-spread..spread), c + rng.random_range(-spread..spread)]);
        labels.push(pos);
    }
    let mask = vec![true; rows.len()];
    FeatureMatrix::from_rows(vec!["x1".into(), "x2".into()], &rows, labels, mask).unwrap()
}

/// Central-difference gradient of the primal objective over `(w, b)`.
pub fn numerical_gradient(x: &FeatureMatrix, w: &[f64], b: f64, c: f64, h: f64) -> Vec<f64> {
    let mut grad = Vec::with_capacity(w.len() + 1);
    for j in 0..=w.len() {
        let eval = |delta: f64| {
            let mut w2 = w.to_vec();
            let mut b2 = b;
            if j < w.len() {
                w2[j] += delta;
            } else {
                b2 += delta;
            }
            primal_objective(x, &w2, b2, c)
        };
        grad.push((eval(h) - eval(-h)) / (2.0 * h));
    }
    grad
}

pub fn margins(x: &FeatureMatrix, w: &[f64], b: f64) -> Vec<f64> {
    x.rows()
        .zip(&x.labels)
        .map(|(r, &l)| {
            let s: f64 = r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            if l {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Labels follow GPA ≥ 3.0 exactly, with no GPA within a quarter standard
/// deviation of the threshold.
pub fn separable_config(n: usize) -> SynthConfig {
    SynthConfig {
        n,
        label_rule: LabelRule {
            kind: RuleKind::GpaOnly,
            noise: 0.0,
            margin: 0.25,
            ..LabelRule::default()
        },
        ..SynthConfig::default()
    }
}

/// No subgroup score shifts; optionally a specificity plant on female
/// applicants.
pub fn gender_cohort(n: usize, plant_rate: Option<f64>) -> SynthConfig {
    SynthConfig {
        n,
        planted_bias: plant_rate.map(|rate| PlantedBias {
            variable: SensitiveVariable::Gender,
            subgroup: Subgroup::B,
            metric: PlantedMetric::Specificity,
            rate,
        }),
        ..SynthConfig::neutral()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Integer-only recount of every subgroup metric. Probabilities are given
/// in thousandths so Brier and balance are exact rationals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
    /// Sum of squared errors in millionths.
    pub sq_err: u64,
    pub n: u64,
    /// Sum of `1000 - k` over predicted negatives, and their count.
    pub neg_sum: u64,
    pub neg_n: u64,
    /// Sum of `k` over predicted positives, and their count.
    pub pos_sum: u64,
    pub pos_n: u64,
}

pub fn oracle_counts(y: &[bool], pred: &[bool], milli: &[u32], keep: impl Fn(usize) -> bool) -> OracleCounts {
    let mut o = OracleCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
        sq_err: 0,
        n: 0,
        neg_sum: 0,
        neg_n: 0,
        pos_sum: 0,
        pos_n: 0,
    };
    for i in 0..y.len() {
        if !keep(i) {
            continue;
        }
        o.n += 1;
        match (y[i], pred[i]) {
            (true, true) => o.tp += 1,
            (false, true) => o.fp += 1,
            (false, false) => o.tn += 1,
            (true, false) => o.fn_ += 1,
        }
        let target: i64 = if y[i] { 1000 } else { 0 };
        let e = target - milli[i] as i64;
        o.sq_err += (e * e) as u64;
        if pred[i] {
            o.pos_sum += milli[i] as u64;
            o.pos_n += 1;
        } else {
            o.neg_sum += 1000 - milli[i] as u64;
            o.neg_n += 1;
        }
    }
    o
}

pub fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl OracleCounts {
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.n)
    }
    pub fn specificity(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }
    pub fn sensitivity(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }
    pub fn brier(&self) -> Option<f64> {
        ratio(self.sq_err, self.n * 1_000_000)
    }
    pub fn balance_neg(&self) -> Option<f64> {
        ratio(self.neg_sum, self.neg_n * 1000)
    }
    pub fn balance_pos(&self) -> Option<f64> {
        ratio(self.pos_sum, self.pos_n * 1000)
    }
}

pub fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => (a - b).abs() <= tol,
        _ => false,
    }
}

/// `i / 2^j` rounded half away from zero to `places` decimals, by integer
/// arithmetic on the exact dyadic value.
pub fn dyadic_fixed(i: i64, j: u32, places: u32) -> String {
    let scaled = (i.unsigned_abs() as u128) * 10u128.pow(places);
    let denom = 1u128 << j;
    let mut q = scaled / denom;
    let r = scaled % denom;
    if 2 * r >= denom {
        q += 1;
    }
    let digits = format!("{:0width$}", q, width = places as usize + 1);
    let (int, frac) = digits.split_at(digits.len() - places as usize);
    let body = if places == 0 { int.to_string() } else { format!("{int}.{frac}") };
    if i < 0 && q != 0 {
        format!("-{body}")
    } else {
        body
    }
}
