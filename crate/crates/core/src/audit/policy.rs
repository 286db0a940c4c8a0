use serde::{Deserialize, Serialize};

use crate::cohort::{ApplicantRecord, Concordance, SensitiveVariable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyThresholds {
    pub gpa_required: f64,
    pub test_required: u32,
    pub gpa_optional: f64,
}

impl Default for PolicyThresholds {
    fn default() -> Self {
        PolicyThresholds {
            gpa_required: 3.0,
            test_required: 1080,
            gpa_optional: 3.3,
        }
    }
}

impl PolicyThresholds {
    /// Both thresholds met; boundary values count as met.
    pub fn admits_required(&self, gpa: f64, test: u32) -> bool {
        gpa >= self.gpa_required && test >= self.test_required
    }

    pub fn admits_optional(&self, gpa: f64) -> bool {
        gpa >= self.gpa_optional
    }

    /// Right = GPA at or above the required GPA, upper = test at or above
    /// the required score.
    pub fn quadrant(&self, gpa: f64, test: u32) -> Quadrant {
        match (gpa >= self.gpa_required, test >= self.test_required) {
            (true, true) => Quadrant::UpperRight,
            (true, false) => Quadrant::LowerRight,
            (false, true) => Quadrant::UpperLeft,
            (false, false) => Quadrant::LowerLeft,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrant {
    UpperRight,
    LowerRight,
    UpperLeft,
    LowerLeft,
}

impl Quadrant {
    pub fn slug(self) -> &'static str {
        match self {
            Quadrant::UpperRight => "upper-right",
            Quadrant::LowerRight => "lower-right",
            Quadrant::UpperLeft => "upper-left",
            Quadrant::LowerLeft => "lower-left",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrantCounts {
    pub upper_right: usize,
    pub lower_right: usize,
    pub upper_left: usize,
    pub lower_left: usize,
}

impl QuadrantCounts {
    pub fn total(&self) -> usize {
        self.upper_right + self.lower_right + self.upper_left + self.lower_left
    }

    pub fn get(&self, q: Quadrant) -> usize {
        match q {
            Quadrant::UpperRight => self.upper_right,
            Quadrant::LowerRight => self.lower_right,
            Quadrant::UpperLeft => self.upper_left,
            Quadrant::LowerLeft => self.lower_left,
        }
    }

    fn bump(&mut self, q: Quadrant) {
        match q {
            Quadrant::UpperRight => self.upper_right += 1,
            Quadrant::LowerRight => self.lower_right += 1,
            Quadrant::UpperLeft => self.upper_left += 1,
            Quadrant::LowerLeft => self.lower_left += 1,
        }
    }
}

/// Share of admitted records in one subgroup under each rule. `None` when
/// the rule admits nobody.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub variable: SensitiveVariable,
    pub level: String,
    pub required: Option<f64>,
    pub optional: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub gpa: f64,
    pub test: u32,
    pub quadrant: Quadrant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyImpact {
    pub thresholds: PolicyThresholds,
    pub n_records: usize,
    /// Records without a GPA or a usable test score.
    pub n_excluded: usize,
    pub quadrants: QuadrantCounts,
    pub admitted_required: usize,
    pub admitted_optional: usize,
    /// Per sensitive variable, group B then group A.
    pub shares: Vec<ShareRow>,
    pub scatter: Vec<ScatterPoint>,
}

impl PolicyImpact {
    pub fn shares_for(&self, variable: SensitiveVariable) -> impl Iterator<Item = &ShareRow> {
        self.shares.iter().filter(move |r| r.variable == variable)
    }
}

/// Quadrant counts, admitted-demographic shares under both rules and the
/// scatter dataset for `table`.
pub fn policy_impact(table: &[ApplicantRecord], thresholds: PolicyThresholds, concordance: &Concordance) -> PolicyImpact {
    let included: Vec<(&ApplicantRecord, f64, u32)> = table
        .iter()
        .filter_map(|r| Some((r, r.gpa?, r.test_score(concordance)?)))
        .collect();
    let mut quadrants = QuadrantCounts::default();
    let scatter: Vec<ScatterPoint> = included
        .iter()
        .map(|&(_, gpa, test)| {
            let quadrant = thresholds.quadrant(gpa, test);
            quadrants.bump(quadrant);
            ScatterPoint { gpa, test, quadrant }
        })
        .collect();
    let req: Vec<&ApplicantRecord> = included
        .iter()
        .filter(|(_, g, t)| thresholds.admits_required(*g, *t))
        .map(|(r, _, _)| *r)
        .collect();
    let opt: Vec<&ApplicantRecord> = included
        .iter()
        .filter(|(_, g, _)| thresholds.admits_optional(*g))
        .map(|(r, _, _)| *r)
        .collect();
    let share = |admitted: &[&ApplicantRecord], v: SensitiveVariable, a: bool| {
        (!admitted.is_empty())
            .then(|| admitted.iter().filter(|r| v.in_group_a(r) == a).count() as f64 / admitted.len() as f64)
    };
    let mut shares = Vec::new();
    for v in SensitiveVariable::ALL {
        for (a, level) in [(false, v.group_b_label()), (true, v.group_a_label())] {
            shares.push(ShareRow {
                variable: v,
                level: level.to_string(),
                required: share(&req, v, a),
                optional: share(&opt, v, a),
            });
        }
    }
    PolicyImpact {
        thresholds,
        n_records: table.len(),
        n_excluded: table.len() - included.len(),
        quadrants,
        admitted_required: req.len(),
        admitted_optional: opt.len(),
        shares,
        scatter,
    }
}
