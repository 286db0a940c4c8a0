//! Seeded synthetic applicant cohorts.
//!
//! Demographic marginals default to the published full-dataset shares and
//! the term mix reproduces the ~11,600 / ~7,900 split between the
//! test-required and test-optional regimes. Score distributions are not
//! published; the defaults below are synthetic and chosen so that every
//! (GPA vs 3.0) x (test vs 1080) quadrant carries mass.
//!
//! Each record is drawn from its own RNG stream, so changing a label knob
//! never perturbs the features of other records.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distr::{Bernoulli, Distribution, Uniform};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cohort::{
    ApplicantRecord, ApplicantTable, Concordance, Gender, Race, SensitiveVariable, Term,
};
use crate::error::{AuditError, Result};
use crate::seed;

const RACE_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RaceMarginals {
    pub white: f64,
    pub hispanic: f64,
    pub black: f64,
    pub asian: f64,
    pub other: f64,
}

impl Default for RaceMarginals {
    fn default() -> Self {
        RaceMarginals {
            white: 0.55,
            hispanic: 0.13,
            black: 0.12,
            asian: 0.07,
            other: 0.13,
        }
    }
}

impl RaceMarginals {
    fn weights(&self) -> [(Race, f64); 5] {
        [
            (Race::White, self.white),
            (Race::Hispanic, self.hispanic),
            (Race::Black, self.black),
            (Race::Asian, self.asian),
            (Race::Other, self.other),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemographicMarginals {
    pub female: f64,
    pub race: RaceMarginals,
    pub first_generation: f64,
    pub in_state: f64,
    pub beginning_student: f64,
}

impl Default for DemographicMarginals {
    fn default() -> Self {
        DemographicMarginals {
            female: 0.63,
            race: RaceMarginals::default(),
            first_generation: 0.24,
            in_state: 0.80,
            beginning_student: 0.92,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermWeight {
    pub term: Term,
    pub weight: f64,
}

/// Truncated normal with additive mean shifts per subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreModel {
    pub mean: f64,
    pub std: f64,
    #[serde(default)]
    pub female_shift: f64,
    #[serde(default)]
    pub non_white_shift: f64,
    #[serde(default)]
    pub first_gen_shift: f64,
}

impl ScoreModel {
    fn mean_for(&self, gender: Gender, race: Race, first_gen: bool) -> f64 {
        let mut m = self.mean;
        if gender == Gender::Female {
            m += self.female_shift;
        }
        if race != Race::White {
            m += self.non_white_shift;
        }
        if first_gen {
            m += self.first_gen_shift;
        }
        m
    }

    /// Same model with every subgroup shift removed.
    pub fn without_shifts(&self) -> Self {
        ScoreModel {
            female_shift: 0.0,
            non_white_shift: 0.0,
            first_gen_shift: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// GPA and test thresholds in test-required terms, GPA-only threshold
    /// afterwards.
    Policy,
    /// Admit iff the test score meets the test-required threshold.
    TestOnly,
    /// Admit iff GPA meets the test-required GPA threshold.
    GpaOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelRule {
    pub kind: RuleKind,
    pub gpa_min_required: f64,
    pub test_min_required: u32,
    pub gpa_min_optional: f64,
    /// Probability that a label is flipped after the rule is applied.
    pub noise: f64,
    /// Scores closer than this many standard deviations to a threshold the
    /// rule consults are redrawn, leaving a gap between the classes.
    pub margin: f64,
}

impl Default for LabelRule {
    fn default() -> Self {
        LabelRule {
            kind: RuleKind::Policy,
            gpa_min_required: 3.0,
            test_min_required: 1080,
            gpa_min_optional: 3.3,
            noise: 0.10,
            margin: 0.0,
        }
    }
}

impl LabelRule {
    /// Noise-free label for a record with the given effective scores.
    pub fn admits(&self, term: Term, gpa: Option<f64>, test: Option<u32>) -> bool {
        let gpa_at_least = |t: f64| gpa.is_some_and(|g| g >= t);
        let test_at_least = |t: u32| test.is_some_and(|s| s >= t);
        match self.kind {
            RuleKind::Policy if term.is_test_required() => {
                gpa_at_least(self.gpa_min_required) && test_at_least(self.test_min_required)
            }
            RuleKind::Policy => gpa_at_least(self.gpa_min_optional),
            RuleKind::TestOnly => test_at_least(self.test_min_required),
            RuleKind::GpaOnly => gpa_at_least(self.gpa_min_required),
        }
    }

    fn near_threshold(&self, term: Term, gpa: f64, test: f64, gpa_std: f64, test_std: f64) -> bool {
        let near_gpa = |t: f64| (gpa - t).abs() < self.margin * gpa_std;
        let near_test = |t: u32| (test - t as f64).abs() < self.margin * test_std;
        match self.kind {
            RuleKind::Policy if term.is_test_required() => {
                near_gpa(self.gpa_min_required) || near_test(self.test_min_required)
            }
            RuleKind::Policy => near_gpa(self.gpa_min_optional),
            RuleKind::TestOnly => near_test(self.test_min_required),
            RuleKind::GpaOnly => near_gpa(self.gpa_min_required),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subgroup {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedMetric {
    /// Rule-negative labels in the subgroup are flipped to positive. A model
    /// that sees the sensitive attribute lowers its bar for the subgroup and
    /// admits more of its true negatives: lower subgroup specificity.
    Specificity,
    /// Rule-positive labels in the subgroup are flipped to negative, raising
    /// the subgroup's bar: lower subgroup sensitivity.
    Sensitivity,
}

/// Subgroup-conditional label noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedBias {
    pub variable: SensitiveVariable,
    pub subgroup: Subgroup,
    pub metric: PlantedMetric,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub demographic_marginals: DemographicMarginals,
    pub term_mix: Vec<TermWeight>,
    pub gpa_model: ScoreModel,
    pub test_model: ScoreModel,
    pub gpa_test_correlation: f64,
    /// Share of reported test scores that arrive as ACT only.
    pub act_share: f64,
    /// Probability that a test-optional-term applicant submits no score.
    pub test_optional_missing: f64,
    pub label_rule: LabelRule,
    pub planted_bias: Option<PlantedBias>,
}

/// Cohort sizes reported for the two admission regimes.
pub const TEST_REQUIRED_SIZE: usize = 11_600;
pub const TEST_OPTIONAL_SIZE: usize = 7_900;

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: (TEST_REQUIRED_SIZE + TEST_OPTIONAL_SIZE) / 10,
            demographic_marginals: DemographicMarginals::default(),
            term_mix: default_term_mix(),
            gpa_model: ScoreModel {
                mean: 3.35,
                std: 0.45,
                female_shift: 0.04,
                non_white_shift: -0.03,
                first_gen_shift: -0.03,
            },
            test_model: ScoreModel {
                mean: 1110.0,
                std: 160.0,
                female_shift: -10.0,
                non_white_shift: -20.0,
                first_gen_shift: -20.0,
            },
            gpa_test_correlation: 0.45,
            act_share: 0.35,
            test_optional_missing: 0.5,
            label_rule: LabelRule::default(),
            planted_bias: None,
        }
    }
}

/// Fall terms carry more weight than Spring terms; totals match the
/// published regime sizes.
fn default_term_mix() -> Vec<TermWeight> {
    let required = TEST_REQUIRED_SIZE as f64 / (TEST_REQUIRED_SIZE + TEST_OPTIONAL_SIZE) as f64;
    let terms = Term::all();
    let count = |season, req: bool| {
        terms
            .iter()
            .filter(|t| t.season() == season && t.is_test_required() == req)
            .count() as f64
    };
    use crate::cohort::Season::{Fall, Spring};
    // Solve fall_req*f + spring_req*s = required, fall_opt*f + spring_opt*s = 1 - required.
    let (a, b, c, d) = (count(Fall, true), count(Spring, true), count(Fall, false), count(Spring, false));
    let det = a * d - b * c;
    let fall = (required * d - b * (1.0 - required)) / det;
    let spring = (a * (1.0 - required) - c * required) / det;
    terms
        .into_iter()
        .map(|term| TermWeight {
            term,
            weight: if term.season() == Fall { fall } else { spring },
        })
        .collect()
}

impl SynthConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Default config with every subgroup score shift removed.
    pub fn neutral() -> Self {
        let d = SynthConfig::default();
        SynthConfig {
            gpa_model: d.gpa_model.without_shifts(),
            test_model: d.test_model.without_shifts(),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(AuditError::config("n", "n must be ≥ 1"));
        }
        let m = &self.demographic_marginals;
        let probs = [
            ("demographic_marginals.female", m.female),
            ("demographic_marginals.first_generation", m.first_generation),
            ("demographic_marginals.in_state", m.in_state),
            ("demographic_marginals.beginning_student", m.beginning_student),
            ("demographic_marginals.race.white", m.race.white),
            ("demographic_marginals.race.hispanic", m.race.hispanic),
            ("demographic_marginals.race.black", m.race.black),
            ("demographic_marginals.race.asian", m.race.asian),
            ("demographic_marginals.race.other", m.race.other),
            ("act_share", self.act_share),
            ("test_optional_missing", self.test_optional_missing),
            ("label_rule.noise", self.label_rule.noise),
        ];
        if !(self.label_rule.margin >= 0.0 && self.label_rule.margin.is_finite()) {
            return Err(AuditError::config("label_rule.margin", "must be a non-negative number"));
        }
        for (field, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(AuditError::config(field, format!("{p} is not a probability")));
            }
        }
        let race_sum: f64 = m.race.weights().iter().map(|(_, w)| w).sum();
        if (race_sum - 1.0).abs() > RACE_SUM_TOLERANCE {
            return Err(AuditError::config(
                "demographic_marginals.race",
                format!("race marginals sum to {race_sum}, expected 1"),
            ));
        }
        if self.term_mix.is_empty()
            || self.term_mix.iter().any(|t| !(t.weight >= 0.0) || !t.weight.is_finite())
            || self.term_mix.iter().map(|t| t.weight).sum::<f64>() <= 0.0
        {
            return Err(AuditError::config("term_mix", "weights must be non-negative with a positive sum"));
        }
        for (field, model) in [("gpa_model", &self.gpa_model), ("test_model", &self.test_model)] {
            if !(model.std > 0.0) || !model.mean.is_finite() {
                return Err(AuditError::config(field, "std must be positive and mean finite"));
            }
        }
        if !(self.gpa_test_correlation.abs() < 1.0) {
            return Err(AuditError::config("gpa_test_correlation", "must lie in (-1, 1)"));
        }
        if let Some(p) = &self.planted_bias {
            if !(0.0..=1.0).contains(&p.rate) {
                return Err(AuditError::config("planted_bias.rate", format!("{} is not a probability", p.rate)));
            }
        }
        Ok(())
    }
}

fn categorical<R: Rng, T: Copy>(rng: &mut R, items: &[(T, f64)]) -> T {
    let total: f64 = items.iter().map(|(_, w)| w).sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for &(item, w) in items {
        acc += w;
        if u < acc {
            return item;
        }
    }
    items.iter().rev().find(|(_, w)| *w > 0.0).unwrap_or(&items[items.len() - 1]).0
}

fn bernoulli<R: Rng>(rng: &mut R, p: f64) -> bool {
    Bernoulli::new(p).expect("validated probability").sample(rng)
}

const MAX_REJECTIONS: usize = 10_000;

/// Draws (gpa, test) from a bivariate normal restricted to
/// [0,4] x [400,1600], and outside `skip`, by rejection.
fn draw_scores<R: Rng>(
    rng: &mut R,
    gpa_mean: f64,
    gpa_std: f64,
    test_mean: f64,
    test_std: f64,
    rho: f64,
    skip: impl Fn(f64, f64) -> bool,
) -> (f64, f64) {
    let tail = (1.0 - rho * rho).sqrt();
    for _ in 0..MAX_REJECTIONS {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let gpa = gpa_mean + gpa_std * z1;
        let test = test_mean + test_std * (rho * z1 + tail * z2);
        if (0.0..=4.0).contains(&gpa) && (400.0..=1600.0).contains(&test) && !skip(gpa, test) {
            return (gpa, test);
        }
    }
    (gpa_mean.clamp(0.0, 4.0), test_mean.clamp(400.0, 1600.0))
}

/// Generates `config.n` records. A pure function of `(config, seed)`.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<ApplicantTable> {
    config.validate()?;
    let concordance = Concordance::bundled();
    let m = &config.demographic_marginals;
    let race_weights = m.race.weights();
    let terms: Vec<(Term, f64)> = config.term_mix.iter().map(|t| (t.term, t.weight)).collect();
    let campuses = [(1u32, 0.45), (2, 0.30), (3, 0.15), (4, 0.10)];
    let older_age = Uniform::new_inclusive(19u32, 24).expect("valid range");
    let rule = &config.label_rule;

    let table = (0..config.n)
        .map(|i| {
            let mut rng = seed::stream(seed, i as u64);
            let gender = if bernoulli(&mut rng, m.female) { Gender::Female } else { Gender::Male };
            let race = categorical(&mut rng, &race_weights);
            let first_generation = bernoulli(&mut rng, m.first_generation);
            let in_state = bernoulli(&mut rng, m.in_state);
            let beginning_student = bernoulli(&mut rng, m.beginning_student);
            let term = categorical(&mut rng, &terms);
            let age = if beginning_student {
                categorical(&mut rng, &[(17u32, 0.3), (18, 0.6), (19, 0.1)])
            } else {
                older_age.sample(&mut rng)
            };
            let campuses_applied = categorical(&mut rng, &campuses);

            let (gpa, test) = draw_scores(
                &mut rng,
                config.gpa_model.mean_for(gender, race, first_generation),
                config.gpa_model.std,
                config.test_model.mean_for(gender, race, first_generation),
                config.test_model.std,
                config.gpa_test_correlation,
                |g, t| rule.near_threshold(term, g, t, config.gpa_model.std, config.test_model.std),
            );
            let gpa = (gpa * 100.0).round() / 100.0;
            let test = ((test / 10.0).round() * 10.0) as u32;

            let omit_test = !term.is_test_required() && bernoulli(&mut rng, config.test_optional_missing);
            let as_act = bernoulli(&mut rng, config.act_share);
            let (sat, act) = match (omit_test, as_act) {
                (true, _) => (None, None),
                (false, true) => (None, Some(concordance.act_for_sat(test))),
                (false, false) => (Some(test), None),
            };
            let effective_test = sat.or_else(|| act.map(|a| concordance.normalize(a).expect("act from table")));

            let mut admit = config.label_rule.admits(term, Some(gpa), effective_test);
            let plant_draw: f64 = rng.random();
            let noise_draw: f64 = rng.random();

            let mut record = ApplicantRecord {
                id: format!("S{i:06}"),
                term,
                beginning_student,
                campuses_applied,
                age,
                gender,
                race,
                first_generation,
                in_state,
                gpa: Some(gpa),
                sat,
                act,
                direct_admit: false,
            };
            if let Some(plant) = &config.planted_bias {
                let in_a = plant.variable.in_group_a(&record);
                let targeted = match plant.subgroup {
                    Subgroup::A => in_a,
                    Subgroup::B => !in_a,
                };
                let flips = match plant.metric {
                    PlantedMetric::Specificity => !admit,
                    PlantedMetric::Sensitivity => admit,
                };
                if targeted && flips && plant_draw < plant.rate {
                    admit = !admit;
                }
            }
            if noise_draw < config.label_rule.noise {
                admit = !admit;
            }
            record.direct_admit = admit;
            record
        })
        .collect();
    Ok(table)
}

/// Observed marginals of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n: usize,
    pub gender: BTreeMap<String, f64>,
    pub race: BTreeMap<String, f64>,
    pub first_generation: BTreeMap<String, f64>,
    pub in_state: BTreeMap<String, f64>,
    pub regime: BTreeMap<String, f64>,
    pub direct_admit_rate: f64,
    pub test_reported: f64,
    /// Mean GPA per subgroup label; `None` when the subgroup is empty.
    pub gpa_mean: BTreeMap<String, Option<f64>>,
    /// Mean SAT-scale test score per subgroup among records reporting one.
    pub test_mean: BTreeMap<String, Option<f64>>,
}

pub fn describe(table: &[ApplicantRecord], concordance: &Concordance) -> Result<CohortSummary> {
    if table.is_empty() {
        return Err(AuditError::EmptyCohort);
    }
    let n = table.len() as f64;
    let share = |pred: &dyn Fn(&ApplicantRecord) -> bool| table.iter().filter(|r| pred(r)).count() as f64 / n;
    let two = |yes: &str, no: &str, pred: &dyn Fn(&ApplicantRecord) -> bool| {
        let p = share(pred);
        BTreeMap::from([(yes.to_string(), p), (no.to_string(), 1.0 - p)])
    };

    let mut race = BTreeMap::new();
    for r in Race::ALL {
        race.insert(r.as_str().to_string(), share(&|x| x.race == r));
    }
    let mut gpa_mean = BTreeMap::new();
    let mut test_mean = BTreeMap::new();
    for var in SensitiveVariable::ALL {
        for (label, in_a) in [(var.group_a_label(), true), (var.group_b_label(), false)] {
            let members: Vec<&ApplicantRecord> = table.iter().filter(|r| var.in_group_a(r) == in_a).collect();
            let gpas: Vec<f64> = members.iter().filter_map(|r| r.gpa).collect();
            let tests: Vec<f64> = members
                .iter()
                .filter_map(|r| r.test_score(concordance).map(f64::from))
                .collect();
            gpa_mean.insert(label.to_string(), mean(&gpas));
            test_mean.insert(label.to_string(), mean(&tests));
        }
    }

    Ok(CohortSummary {
        n: table.len(),
        gender: two("Female", "Male", &|r| r.gender == Gender::Female),
        race,
        first_generation: two("First-Gen", "Not First-Gen", &|r| r.first_generation),
        in_state: two("In-State", "Out-Of-State", &|r| r.in_state),
        regime: two("Test-Required", "Test-Optional", &|r| r.term.is_test_required()),
        direct_admit_rate: share(&|r| r.direct_admit),
        test_reported: share(&|r| r.test_score(concordance).is_some()),
        gpa_mean,
        test_mean,
    })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_mix_matches_regime_sizes() {
        let mix = default_term_mix();
        let total: f64 = mix.iter().map(|t| t.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let req: f64 = mix.iter().filter(|t| t.term.is_test_required()).map(|t| t.weight).sum();
        assert!((req - 11_600.0 / 19_500.0).abs() < 1e-12);
        assert!(mix.iter().all(|t| t.weight > 0.0));
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig {
            n: 300,
            ..SynthConfig::default()
        };
        assert_eq!(generate(&cfg, 11).unwrap(), generate(&cfg, 11).unwrap());
        assert_ne!(generate(&cfg, 11).unwrap(), generate(&cfg, 12).unwrap());
    }

    #[test]
    fn noise_free_label_example() {
        let rule = LabelRule {
            noise: 0.0,
            ..LabelRule::default()
        };
        let t: Term = "FA2019".parse().unwrap();
        assert!(!rule.admits(t, Some(3.5), Some(900)));
        assert!(rule.admits(t, Some(3.0), Some(1080)));
        let t: Term = "SP2022".parse().unwrap();
        assert!(rule.admits(t, Some(3.3), None));
        assert!(!rule.admits(t, Some(3.29), Some(1500)));
    }

    #[test]
    fn invalid_marginals_name_the_field() {
        let mut cfg = SynthConfig::default();
        cfg.demographic_marginals.race.white = 0.6;
        let err = generate(&cfg, 1).unwrap_err().to_string();
        assert!(err.contains("demographic_marginals.race"), "{err}");

        let mut cfg = SynthConfig::default();
        cfg.demographic_marginals.female = 1.2;
        let err = generate(&cfg, 1).unwrap_err().to_string();
        assert!(err.contains("demographic_marginals.female"), "{err}");

        let cfg = SynthConfig {
            n: 0,
            ..SynthConfig::default()
        };
        assert!(generate(&cfg, 1).unwrap_err().to_string().contains("n must be ≥ 1"));
    }

    #[test]
    fn bounds_respected() {
        let cfg = SynthConfig {
            n: 2000,
            ..SynthConfig::default()
        };
        let table = generate(&cfg, 3).unwrap();
        for r in &table {
            let g = r.gpa.unwrap();
            assert!((0.0..=4.0).contains(&g));
            if let Some(s) = r.sat {
                assert!((400..=1600).contains(&s));
            }
            if let Some(a) = r.act {
                assert!((1..=36).contains(&a));
            }
            if r.term.is_test_required() {
                assert!(r.sat.is_some() || r.act.is_some());
            }
        }
    }

    #[test]
    fn describe_counts() {
        let mut table = generate(&SynthConfig { n: 4, ..SynthConfig::default() }, 5).unwrap();
        for (i, r) in table.iter_mut().enumerate() {
            r.gender = if i < 2 { Gender::Female } else { Gender::Male };
        }
        let s = describe(&table, &Concordance::bundled()).unwrap();
        assert_eq!(s.gender["Female"], 0.5);
        assert_eq!(s.gender["Male"], 0.5);
        assert!((s.race.values().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(describe(&[], &Concordance::bundled()).is_err());
    }

    #[test]
    fn config_json_defaults_fill_in() {
        let cfg: SynthConfig = serde_json::from_str(r#"{"n": 123}"#).unwrap();
        assert_eq!(cfg.n, 123);
        assert_eq!(cfg.demographic_marginals, DemographicMarginals::default());
        let back: SynthConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<SynthConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
