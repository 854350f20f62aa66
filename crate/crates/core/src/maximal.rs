//! Discrete Hardy–Littlewood maximal operators and mean oscillation.
//!
//! Every supremum over infinitely many intervals is reduced to a finite
//! family on which it is attained:
//!
//! * centered: radii up to the distance from `m` to the far end of the
//!   support; beyond that the sum is frozen while the length grows;
//! * uncentered: intervals inside the hull of `m` and the support, since
//!   trimming an interval back to that hull never lowers its average;
//! * dyadic: levels up to the first interval containing the support;
//! * sharp: intervals inside a caller-chosen range (the unrestricted
//!   supremum over ℤ degenerates for compactly supported data).
//!
//! When several intervals attain a supremum the witness is the shortest, then
//! the leftmost.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{DyadicInterval, IntegerInterval, MAX_LEVEL};
use crate::report::{CheckId, InequalityReport, Witness};
use crate::scalar::Scalar;
use crate::sequence::{PrefixSums, WindowedSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaximalOp {
    Centered,
    Uncentered,
    Dyadic,
    Sharp,
}

impl MaximalOp {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaximalOp::Centered => "centered",
            MaximalOp::Uncentered => "uncentered",
            MaximalOp::Dyadic => "dyadic",
            MaximalOp::Sharp => "sharp",
        }
    }
}

impl fmt::Display for MaximalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaximalOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centered" => Ok(MaximalOp::Centered),
            "uncentered" => Ok(MaximalOp::Uncentered),
            "dyadic" => Ok(MaximalOp::Dyadic),
            "sharp" => Ok(MaximalOp::Sharp),
            other => Err(Error::Parse(format!("unknown operator {other:?}"))),
        }
    }
}

/// Operator output on an evaluation window, with the interval attaining each value.
#[derive(Clone, Debug)]
pub struct MaximalResult<T: Scalar> {
    pub op: MaximalOp,
    pub truncation: Option<u64>,
    pub values: WindowedSequence<T>,
    pub witnesses: Vec<IntegerInterval>,
    /// Support hull of the input, `None` for the zero sequence.
    pub input_support: Option<IntegerInterval>,
    pub input_l1: T,
    /// Interval family bound used by the sharp operator.
    pub range: Option<IntegerInterval>,
}

impl<T: Scalar> MaximalResult<T> {
    pub fn eval_window(&self) -> IntegerInterval {
        self.values.window()
    }

    pub fn value(&self, m: i64) -> Option<&T> {
        self.values.get_ref(m)
    }

    pub fn witness(&self, m: i64) -> Option<IntegerInterval> {
        let i = usize::try_from(m - self.values.offset()).ok()?;
        self.witnesses.get(i).copied()
    }

    /// Points paired with their values.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &T)> + '_ {
        let offset = self.values.offset();
        self.values
            .values()
            .iter()
            .enumerate()
            .map(move |(i, v)| (offset + i as i64, v))
    }

    /// Largest value over the evaluation window, with its point.
    pub fn max(&self) -> (i64, T) {
        let mut best = (self.values.offset(), self.values.values()[0].clone());
        for (m, v) in self.iter() {
            if *v > best.1 {
                best = (m, v.clone());
            }
        }
        best
    }
}

fn is_better<T: Scalar>(v: &T, len: u64, best: &Option<(T, IntegerInterval)>) -> bool {
    match best {
        None => true,
        Some((b, i)) => *v > *b || (*v == *b && len < i.len()),
    }
}

/// For each `m` in `eval ∩ range`, the best `value(I)` over intervals
/// `I ⊆ range` containing `m` with `|I| <= max_len`.
///
/// For a fixed left end the running maximum over right ends, swept from the
/// right, is exactly the best interval with that left end covering each `m`.
fn sweep<T: Scalar>(
    range: IntegerInterval,
    eval: IntegerInterval,
    max_len: Option<u64>,
    mut value: impl FnMut(IntegerInterval) -> T,
) -> Vec<Option<(T, IntegerInterval)>> {
    let mut best: Vec<Option<(T, IntegerInterval)>> = vec![None; eval.len() as usize];
    let Some(target) = eval.intersect(&range) else {
        return best;
    };
    for lo in range.lo()..=target.hi() {
        let mut hi_cap = range.hi();
        if let Some(j) = max_len {
            hi_cap = hi_cap.min(lo + j as i64 - 1);
        }
        let hi_floor = lo.max(target.lo());
        if hi_cap < hi_floor {
            continue;
        }
        let mut run: Option<(T, IntegerInterval)> = None;
        for hi in (hi_floor..=hi_cap).rev() {
            let interval = IntegerInterval::new(lo, hi).expect("lo <= hi");
            let v = value(interval);
            // Sweeping right to left, equal values move to the shorter interval.
            if run.as_ref().map_or(true, |(b, _)| v >= *b) {
                run = Some((v, interval));
            }
            if hi <= target.hi() {
                let slot = &mut best[(hi - eval.lo()) as usize];
                let (rv, ri) = run.as_ref().expect("set above");
                if is_better(rv, ri.len(), slot) {
                    *slot = Some((rv.clone(), *ri));
                }
            }
        }
    }
    best
}

fn assemble<T: Scalar>(
    op: MaximalOp,
    truncation: Option<u64>,
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
    best: Vec<(T, IntegerInterval)>,
) -> MaximalResult<T> {
    let (values, witnesses): (Vec<T>, Vec<IntegerInterval>) = best.into_iter().unzip();
    MaximalResult {
        op,
        truncation,
        values: WindowedSequence::new(eval.lo(), values).expect("eval window is non-empty"),
        witnesses,
        input_support: a.support(),
        input_l1: a.l1_norm(),
        range,
    }
}

/// `M'a(m) = sup_r (2r+1)^{-1} Σ_{|n|<=r} |a(m-n)|` over integer radii `r >= 1`;
/// with `truncation = Some(J)` only `r < J` is admitted, so `J >= 2`.
pub fn centered_maximal<T: Scalar>(
    a: &WindowedSequence<T>,
    truncation: Option<u64>,
    eval: IntegerInterval,
) -> Result<MaximalResult<T>> {
    if let Some(j) = truncation {
        if j < 2 {
            return Err(Error::InvalidTruncation(j));
        }
    }
    let sums = a.abs_prefix_sums();
    let support = a.support();
    let best = eval
        .iter()
        .map(|m| {
            let mut r_cap = match support {
                None => 1,
                Some(s) => (m - s.lo())
                    .unsigned_abs()
                    .max((m - s.hi()).unsigned_abs())
                    .max(1),
            };
            if let Some(j) = truncation {
                r_cap = r_cap.min(j - 1);
            }
            // radii short of the support average to zero
            let r_min = support.map_or(1, |s| s.distance_to(m).max(1));
            let mut best = (T::zero(), IntegerInterval::centered(m, 1));
            for r in r_min..=r_cap {
                let interval = IntegerInterval::centered(m, r);
                let avg = sums.average(&interval);
                if avg > best.0 {
                    best = (avg, interval);
                }
            }
            best
        })
        .collect();
    Ok(assemble(
        MaximalOp::Centered,
        truncation,
        a,
        eval,
        None,
        best,
    ))
}

/// `Ma(m) = sup_{I ∋ m} |I|^{-1} Σ_{n∈I} |a(n)|` over all intervals, singletons
/// included; with `truncation = Some(J)` only intervals with `|I| <= J`.
pub fn uncentered_maximal<T: Scalar>(
    a: &WindowedSequence<T>,
    truncation: Option<u64>,
    eval: IntegerInterval,
) -> Result<MaximalResult<T>> {
    if truncation == Some(0) {
        return Err(Error::InvalidTruncation(0));
    }
    let sums = a.abs_prefix_sums();
    let best = match (a.support(), truncation) {
        (Some(s), None) => uncentered_outside_support(&sums, s, eval),
        (support, _) => {
            let range = support.map_or(eval, |s| s.hull(&eval));
            sweep(range, eval, truncation, |i| sums.average(&i))
                .into_iter()
                .map(|b| b.expect("every point of eval lies in range"))
                .collect()
        }
    };
    Ok(assemble(
        MaximalOp::Uncentered,
        truncation,
        a,
        eval,
        None,
        best,
    ))
}

/// Untruncated `Ma` when the support hull `s` is known. Widening an interval
/// past `s` only adds zeros, so points of `s` need intervals inside `s`, and a
/// point `m` right of `s` is best served by some `[lo, m]` with `lo ∈ s`
/// (mirrored on the left). Ties still go to the shortest interval.
fn uncentered_outside_support<T: Scalar>(
    sums: &PrefixSums<T>,
    s: IntegerInterval,
    eval: IntegerInterval,
) -> Vec<(T, IntegerInterval)> {
    let inside = eval
        .intersect(&s)
        .map(|t| sweep(s, t, None, |i| sums.average(&i)));
    eval.iter()
        .map(|m| {
            if s.contains(m) {
                let t = eval.intersect(&s).expect("m lies in both");
                let slot = &inside.as_ref().expect("intersection non-empty")[(m - t.lo()) as usize];
                return slot.clone().expect("every point of s lies in range");
            }
            let mut best: Option<(T, IntegerInterval)> = None;
            for k in 0..s.len() as i64 {
                let end = if m > s.hi() { s.hi() - k } else { s.lo() + k };
                let i = IntegerInterval::new(end.min(m), end.max(m)).expect("ordered");
                let v = sums.average(&i);
                // candidates come shortest first, so only strict gains move
                if best.as_ref().map_or(true, |(b, _)| v > *b) {
                    best = Some((v, i));
                }
            }
            best.expect("s is non-empty")
        })
        .collect()
}

/// `M_d a(m)`: the largest average of `|a|` over dyadic intervals (levels `>= 1`)
/// containing `m`.
pub fn dyadic_maximal<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
) -> Result<MaximalResult<T>> {
    let sums = a.abs_prefix_sums();
    let support = a.support();
    // per level, the last interval seen and the best over it and its ancestors;
    // eval is walked left to right, so neighbours reuse whole ancestor chains
    let mut memo: Vec<Option<(i64, (T, IntegerInterval))>> = vec![None; MAX_LEVEL as usize + 1];
    let best = eval
        .iter()
        .map(|m| {
            let mut chain = Vec::new();
            let mut d = DyadicInterval::containing(m, 1)?;
            let mut above = loop {
                if let Some((j, b)) = &memo[d.level() as usize] {
                    if *j == d.index() {
                        break Some(b.clone());
                    }
                }
                chain.push(d);
                // higher levels hold the same mass over longer intervals
                if support.map_or(true, |s| d.interval().contains_interval(&s))
                    || d.level() == MAX_LEVEL
                {
                    break None;
                }
                d = d.parent()?;
            };
            for d in chain.into_iter().rev() {
                let i = d.interval();
                let avg = match support {
                    Some(s) if s.intersect(&i).is_some() => sums.average(&i),
                    _ => T::zero(),
                };
                // equal values go to the lower level
                if above.as_ref().map_or(true, |(b, _)| avg >= *b) {
                    above = Some((avg, i));
                }
                memo[d.level() as usize] = Some((d.index(), above.clone().expect("set above")));
            }
            Ok(above.expect("level 1 always evaluated"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(MaximalOp::Dyadic, None, a, eval, None, best))
}

/// The stored window padded on each side by its own length.
pub fn default_sharp_range<T: Scalar>(a: &WindowedSequence<T>) -> IntegerInterval {
    let w = a.window();
    w.pad(w.len())
}

fn dense_values<T: Scalar>(a: &WindowedSequence<T>, range: IntegerInterval) -> Vec<T> {
    range.iter().map(|m| a.get(m)).collect()
}

fn check_range(eval: IntegerInterval, range: IntegerInterval) -> Result<()> {
    if range.contains_interval(&eval) {
        Ok(())
    } else {
        Err(Error::EvalOutsideRange { eval, range })
    }
}

/// Mean absolute deviation of `values` about their mean.
fn mean_oscillation<T: Scalar>(values: &[T]) -> T {
    let n = T::from_usize(values.len());
    let mean = values.iter().fold(T::zero(), |s, v| s + v.clone()) / n.clone();
    values
        .iter()
        .fold(T::zero(), |s, v| s + (v.clone() - mean.clone()).magnitude())
        / n
}

/// `M#a(m) = sup_{I ∋ m, I ⊆ range} |I|^{-1} Σ_{n∈I} |a(n) - a_I|`.
/// `range` defaults to [`default_sharp_range`].
pub fn sharp_maximal<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
) -> Result<MaximalResult<T>> {
    let range = range.unwrap_or_else(|| default_sharp_range(a));
    check_range(eval, range)?;
    let dense = dense_values(a, range);
    let best = sweep(range, eval, None, |i| {
        let start = (i.lo() - range.lo()) as usize;
        mean_oscillation(&dense[start..start + i.len() as usize])
    })
    .into_iter()
    .map(|b| b.expect("eval lies inside range"))
    .collect();
    Ok(assemble(MaximalOp::Sharp, None, a, eval, Some(range), best))
}

/// `‖a‖_★` restricted to an evaluation window and interval range.
#[derive(Clone, Debug, PartialEq)]
pub struct BmoReport<T> {
    pub norm: T,
    pub witness: IntegerInterval,
    pub range: IntegerInterval,
}

/// The maximum of `M#a` over `eval`, with the interval attaining it.
pub fn bmo_norm<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
) -> Result<BmoReport<T>> {
    let sharp = sharp_maximal(a, eval, range)?;
    let mut best: Option<(T, IntegerInterval)> = None;
    for (m, v) in sharp.iter() {
        let w = sharp.witness(m).expect("aligned with values");
        let better = match &best {
            None => true,
            Some((b, bw)) => *v > *b || (*v == *b && (w.len(), w.lo()) < (bw.len(), bw.lo())),
        };
        if better {
            best = Some((v.clone(), w));
        }
    }
    let (norm, witness) = best.expect("eval is non-empty");
    Ok(BmoReport {
        norm,
        witness,
        range: sharp.range.expect("sharp records its range"),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OscillationReport<T> {
    pub value: T,
    pub witness: IntegerInterval,
    /// A minimising constant on the witness interval.
    pub center: T,
}

/// `sup_I inf_b |I|^{-1} Σ_{n∈I} |a(n) - b|` over intervals `I ⊆ range` meeting
/// `eval`; the inner infimum is attained at a median of `a` on `I`.
pub fn best_constant_oscillation<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
) -> Result<OscillationReport<T>> {
    let range = range.unwrap_or_else(|| default_sharp_range(a));
    check_range(eval, range)?;
    let dense = dense_values(a, range);
    let first_hi = (eval.lo() - range.lo()) as usize;
    let last_lo = (eval.hi() - range.lo()) as usize;
    let mut best: Option<(T, IntegerInterval, T)> = None;
    let mut sorted: Vec<T> = Vec::with_capacity(dense.len());
    for l in 0..=last_lo {
        sorted.clear();
        for (r, v) in dense.iter().enumerate().skip(l) {
            let at = sorted.partition_point(|x| x < v);
            sorted.insert(at, v.clone());
            if r < first_hi {
                continue;
            }
            let median = sorted[(sorted.len() - 1) / 2].clone();
            let spread = sorted.iter().fold(T::zero(), |s, x| {
                s + (x.clone() - median.clone()).magnitude()
            }) / T::from_usize(sorted.len());
            let len = (r - l + 1) as u64;
            let better = match &best {
                None => true,
                Some((b, i, _)) => spread > *b || (spread == *b && len < i.len()),
            };
            if better {
                let lo = range.lo() + l as i64;
                let interval = IntegerInterval::new(lo, lo + len as i64 - 1).expect("non-empty");
                best = Some((spread, interval, median));
            }
        }
    }
    let (value, witness, center) = best.expect("eval is non-empty");
    Ok(OscillationReport {
        value,
        witness,
        center,
    })
}

/// Checks `value ≤ constant · bound` at every point of a common evaluation
/// window. A failing report carries the first violating point; a passing one
/// the point of largest ratio.
pub fn pointwise_bound<T: Scalar>(
    check: CheckId,
    value: &MaximalResult<T>,
    bound: &MaximalResult<T>,
    constant: &T,
) -> InequalityReport {
    assert_eq!(
        value.eval_window(),
        bound.eval_window(),
        "evaluation windows differ"
    );
    let mut worst: Option<(f64, InequalityReport)> = None;
    for ((m, v), (_, b)) in value.iter().zip(bound.iter()) {
        let report =
            InequalityReport::bound(check, v, b, constant).with_witness(Witness::Point { m });
        if !report.pass {
            return report;
        }
        if worst.as_ref().map_or(true, |(r, _)| report.ratio > *r) {
            worst = Some((report.ratio, report));
        }
    }
    worst.expect("evaluation window is non-empty").1
}

/// `M'a ≤ Ma ≤ 3M'a` at every point of `eval`. The report describes the
/// upper comparison; a failure of the lower one fails it with a note.
pub fn verify_operator_comparison<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
) -> Result<InequalityReport> {
    let centered = centered_maximal(a, None, eval)?;
    let uncentered = uncentered_maximal(a, None, eval)?;
    let lower = pointwise_bound(
        CheckId::OperatorComparison,
        &centered,
        &uncentered,
        &T::one(),
    );
    let report = pointwise_bound(
        CheckId::OperatorComparison,
        &uncentered,
        &centered,
        &T::from_int(3),
    );
    Ok(if lower.pass {
        report
    } else {
        let witness = lower
            .witness
            .clone()
            .expect("pointwise reports carry a point");
        report
            .fail("centered exceeds uncentered")
            .with_witness(witness)
    })
}

/// `½‖a‖_★ ≤ sup_I inf_b avg_I |a - b| ≤ ‖a‖_★` over the same interval family.
/// The report describes the upper bound; the lower one fails it with a note.
pub fn verify_oscillation_bounds<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
) -> Result<InequalityReport> {
    let bmo = bmo_norm(a, eval, range)?;
    let osc = best_constant_oscillation(a, eval, range)?;
    let report = InequalityReport::bound(CheckId::Oscillation, &osc.value, &bmo.norm, &T::one())
        .with_witness(osc.witness);
    let doubled = osc.value.clone() + osc.value.clone();
    Ok(if bmo.norm.leq_tol(&doubled) {
        report
    } else {
        report
            .fail("norm exceeds twice the best-constant oscillation")
            .with_witness(bmo.witness)
    })
}

/// `M#(|a|) ≤ M#(a)` at every point of `eval`.
pub fn verify_sharp_abs<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: Option<IntegerInterval>,
) -> Result<InequalityReport> {
    let range = Some(range.unwrap_or_else(|| default_sharp_range(a)));
    let of_abs = sharp_maximal(&a.abs(), eval, range)?;
    let of_a = sharp_maximal(a, eval, range)?;
    Ok(pointwise_bound(
        CheckId::SharpAbs,
        &of_abs,
        &of_a,
        &T::one(),
    ))
}
