use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::IntegerInterval;
use crate::scalar::Scalar;

/// Identifies which inequality or identity a report verifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// `M'a <= Ma <= 3 M'a`.
    OperatorComparison,
    /// `|{M'a > 4λ}| <= 3 |{M_d a > λ}|` and the `3I_j` cover.
    Covering,
    /// Best-constant oscillation between half the BMO norm and the norm.
    Oscillation,
    /// `M#(|a|) <= M#(a)` pointwise.
    SharpAbs,
    /// Disjointness, `λ < avg <= 2λ`, union equals `{M_d a > λ}`.
    CzStructure,
    /// Weighted weak (1,1) against `Mw`.
    Weak11,
    /// `w(I) (a(I)/|I|)^p <= C Σ_I |a|^p w`.
    IntervalA,
    /// `w(I) (|S|/|I|)^p <= C w(S)`.
    IntervalB,
    /// Weighted weak (p,p) for `A_p` weights.
    WeakPp,
    /// Weighted strong-type ratio of `M`.
    StrongPp,
    /// `M̃_J f(U^{-m}x) = M'_J a_x(m)`.
    Transference,
    /// Ergodic weak (1,1).
    ErgodicWeak,
    /// Ergodic strong-type ratio.
    ErgodicStrong,
    /// Converse trend between the ergodic `A_p` constant and the operator norm.
    Converse,
    /// `A_p` constant trend of power weights.
    PowerWeight,
}

impl CheckId {
    pub const ALL: [CheckId; 15] = [
        CheckId::OperatorComparison,
        CheckId::Covering,
        CheckId::Oscillation,
        CheckId::SharpAbs,
        CheckId::CzStructure,
        CheckId::Weak11,
        CheckId::IntervalA,
        CheckId::IntervalB,
        CheckId::WeakPp,
        CheckId::StrongPp,
        CheckId::Transference,
        CheckId::ErgodicWeak,
        CheckId::ErgodicStrong,
        CheckId::Converse,
        CheckId::PowerWeight,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::OperatorComparison => "operator_comparison",
            CheckId::Covering => "covering",
            CheckId::Oscillation => "oscillation",
            CheckId::SharpAbs => "sharp_abs",
            CheckId::CzStructure => "cz_structure",
            CheckId::Weak11 => "weak11",
            CheckId::IntervalA => "interval_a",
            CheckId::IntervalB => "interval_b",
            CheckId::WeakPp => "weak_pp",
            CheckId::StrongPp => "strong_pp",
            CheckId::Transference => "transference",
            CheckId::ErgodicWeak => "ergodic_weak",
            CheckId::ErgodicStrong => "ergodic_strong",
            CheckId::Converse => "converse",
            CheckId::PowerWeight => "power_weight",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a check failed, or where its extreme ratio was attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { m: i64 },
    Interval { lo: i64, hi: i64 },
    Atom { x: usize },
    Orbit { x: usize, m: i64 },
    Text { detail: String },
}

impl From<IntegerInterval> for Witness {
    fn from(i: IntegerInterval) -> Self {
        Witness::Interval {
            lo: i.lo(),
            hi: i.hi(),
        }
    }
}

/// Outcome of one inequality verification.
///
/// For bound checks `ratio = lhs / (constant · rhs)` and `pass` was decided in
/// the checker's own arithmetic (exact or toleranced). Observation reports
/// carry no constant; their `ratio` is `lhs / rhs` and they always pass: the
/// boundedness they feed is judged across a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub check: CheckId,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: Option<f64>,
    pub ratio: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

impl InequalityReport {
    /// `lhs <= constant · rhs`.
    pub fn bound<T: Scalar>(check: CheckId, lhs: &T, rhs: &T, constant: &T) -> Self {
        let scaled = constant.clone() * rhs.clone();
        let pass = lhs.leq_tol(&scaled);
        Self {
            check,
            digest: String::new(),
            lhs: lhs.to_f64(),
            rhs: rhs.to_f64(),
            constant: Some(constant.to_f64()),
            ratio: safe_ratio(lhs.to_f64(), scaled.to_f64()),
            pass,
            witness: None,
            note: None,
        }
    }

    pub fn observation(check: CheckId, lhs: f64, rhs: f64) -> Self {
        Self {
            check,
            digest: String::new(),
            lhs,
            rhs,
            constant: None,
            ratio: safe_ratio(lhs, rhs),
            pass: true,
            witness: None,
            note: None,
        }
    }

    pub fn with_witness(mut self, witness: impl Into<Witness>) -> Self {
        self.witness = Some(witness.into());
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Marks the report failed for a reason beyond the numeric comparison.
    pub fn fail(mut self, note: impl Into<String>) -> Self {
        self.pass = false;
        self.note = Some(note.into());
        self
    }
}
