//! Calderón–Zygmund decomposition on the dyadic grid, superlevel sets of the
//! maximal operators, and the weighted weak- and strong-type checkers built on
//! them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::interval::{check_coord, DyadicInterval, IntegerInterval, MAX_LEVEL};
use crate::maximal::{
    centered_maximal, dyadic_maximal, uncentered_maximal, MaximalOp, MaximalResult,
};
use crate::report::{CheckId, InequalityReport, Witness};
use crate::scalar::Scalar;
use crate::sequence::WindowedSequence;
use crate::weights::{ap_constant, check_exponent, power, weighted_norm_pow, WeightSequence};

/// Constant of the weighted weak (1,1) inequality against `Mw`.
pub const WEAK11_CONSTANT: i64 = 36;

/// Maximal dyadic intervals on which the average of `|a|` exceeds the height.
#[derive(Clone, Debug, PartialEq)]
pub struct CzDecomposition<T> {
    pub height: T,
    /// The quiet level the top-down selection started from.
    pub start_level: u32,
    /// Selected intervals, ordered left to right.
    pub intervals: Vec<DyadicInterval>,
    /// Average of `|a|` over each selected interval.
    pub averages: Vec<T>,
    /// Largest dyadic average among the intervals visited but not selected.
    pub residual_bound: T,
}

impl<T: Scalar> CzDecomposition<T> {
    /// Points covered by the selected intervals.
    pub fn union(&self) -> BTreeSet<i64> {
        self.intervals
            .iter()
            .flat_map(|d| d.interval().iter())
            .collect()
    }

    /// Points covered by the tripled intervals `3I_j`.
    pub fn tripled_union(&self) -> BTreeSet<i64> {
        self.intervals
            .iter()
            .flat_map(|d| d.tripled().iter())
            .collect()
    }
}

fn check_height<T: Scalar>(height: &T) -> Result<()> {
    if *height > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveHeight)
    }
}

/// Smallest level `N >= 1` with `2^N λ >= ‖a‖₁`; every dyadic interval there
/// averages at most `λ`.
pub fn quiet_level<T: Scalar>(l1: &T, height: &T) -> Result<u32> {
    check_height(height)?;
    (1..=MAX_LEVEL)
        .find(|&n| T::from_int(1i64 << n) * height.clone() >= *l1)
        .ok_or(Error::InvalidLevel(MAX_LEVEL + 1))
}

/// Decomposition of `|a|` at height `λ > 0`, selected top-down from
/// [`quiet_level`].
pub fn cz_decompose<T: Scalar>(a: &WindowedSequence<T>, height: &T) -> Result<CzDecomposition<T>> {
    let level = quiet_level(&a.l1_norm(), height)?;
    cz_decompose_from(a, height, level)
}

/// Decomposition started from a caller-chosen level, which must be quiet.
pub fn cz_decompose_from<T: Scalar>(
    a: &WindowedSequence<T>,
    height: &T,
    start_level: u32,
) -> Result<CzDecomposition<T>> {
    check_height(height)?;
    let mut out = CzDecomposition {
        height: height.clone(),
        start_level,
        intervals: Vec::new(),
        averages: Vec::new(),
        residual_bound: T::zero(),
    };
    let Some(support) = a.support() else {
        if start_level == 0 || start_level > MAX_LEVEL {
            return Err(Error::InvalidLevel(start_level));
        }
        return Ok(out);
    };
    let sums = a.abs_prefix_sums();
    let first = DyadicInterval::containing(support.lo(), start_level)?;
    let last = DyadicInterval::containing(support.hi(), start_level)?;
    let mut stack = Vec::new();
    for j in first.index()..=last.index() {
        let d = DyadicInterval::new(start_level, j)?;
        let avg = sums.average(&d.interval());
        if avg > *height {
            return Err(Error::NotQuiet(start_level));
        }
        out.residual_bound = T::max_of(out.residual_bound.clone(), avg);
        stack.push(d);
    }
    let mut selected = Vec::new();
    while let Some(d) = stack.pop() {
        let Some((left, right)) = d.children() else {
            continue;
        };
        for child in [left, right] {
            let sum = sums.sum(&child.interval());
            if sum.is_zero() {
                continue;
            }
            let avg = sum / T::from_int(child.size() as i64);
            if avg > *height {
                selected.push((child, avg));
            } else {
                out.residual_bound = T::max_of(out.residual_bound.clone(), avg);
                stack.push(child);
            }
        }
    }
    selected.sort_by_key(|(d, _)| d.lo());
    (out.intervals, out.averages) = selected.into_iter().unzip();
    Ok(out)
}

/// Window outside which the operator output provably stays at or below `λ`:
/// points at distance `>= R` from the support hull, where `R = ⌈‖a‖₁/(2λ)⌉`
/// for the centered operator and `⌈‖a‖₁/λ⌉` for the uncentered and dyadic ones.
pub fn decay_window<T: Scalar>(
    op: MaximalOp,
    support: IntegerInterval,
    l1: &T,
    height: &T,
) -> Result<IntegerInterval> {
    if *height <= T::zero() {
        return Err(Error::UnboundedSuperlevel);
    }
    let reach = match op {
        MaximalOp::Centered => l1.clone() / (T::from_int(2) * height.clone()),
        MaximalOp::Uncentered | MaximalOp::Dyadic => l1.clone() / height.clone(),
        MaximalOp::Sharp => return Err(Error::NoDecayBound),
    };
    let r = reach
        .ceil_to_i64()
        .filter(|r| *r <= 2 * crate::interval::MAX_COORD)
        .ok_or(Error::UnboundedSuperlevel)?
        .max(1);
    let pad = (r - 1) as u64;
    check_coord(support.lo() as i128 - pad as i128)?;
    check_coord(support.hi() as i128 + pad as i128)?;
    Ok(support.pad(pad))
}

/// `{m : g(m) > λ}` for an operator output whose evaluation window provably
/// holds the whole set.
pub fn superlevel_set<T: Scalar>(g: &MaximalResult<T>, height: &T) -> Result<Vec<i64>> {
    let Some(support) = g.input_support else {
        return if *height >= T::zero() {
            Ok(Vec::new())
        } else {
            Err(Error::UnboundedSuperlevel)
        };
    };
    let need = decay_window(g.op, support, &g.input_l1, height)?;
    let have = g.eval_window();
    if !have.contains_interval(&need) {
        return Err(Error::WindowTooSmall { have, need });
    }
    Ok(g.iter()
        .filter(|(_, v)| *v > height)
        .map(|(m, _)| m)
        .collect())
}

/// Evaluates `op` on its decay window and returns the superlevel set.
pub fn superlevel_of<T: Scalar>(
    op: MaximalOp,
    a: &WindowedSequence<T>,
    height: &T,
) -> Result<Vec<i64>> {
    let Some(support) = a.support() else {
        return if *height >= T::zero() {
            Ok(Vec::new())
        } else {
            Err(Error::UnboundedSuperlevel)
        };
    };
    let window = decay_window(op, support, &a.l1_norm(), height)?;
    let g = match op {
        MaximalOp::Centered => centered_maximal(a, None, window)?,
        MaximalOp::Uncentered => uncentered_maximal(a, None, window)?,
        MaximalOp::Dyadic => dyadic_maximal(a, window)?,
        MaximalOp::Sharp => return Err(Error::NoDecayBound),
    };
    superlevel_set(&g, height)
}

/// Disjointness, `λ < avg <= 2λ` and `∪ I_j = {M_d a > λ}`, checked in the
/// caller's arithmetic. The report compares the sizes of the two sets.
pub fn verify_cz_structure<T: Scalar>(
    a: &WindowedSequence<T>,
    height: &T,
) -> Result<InequalityReport> {
    let cz = cz_decompose(a, height)?;
    let union = cz.union();
    let dyadic: BTreeSet<i64> = superlevel_of(MaximalOp::Dyadic, a, height)?
        .into_iter()
        .collect();
    let mut report = InequalityReport::observation(
        CheckId::CzStructure,
        union.len() as f64,
        dyadic.len() as f64,
    );
    let total: u64 = cz.intervals.iter().map(|d| d.size()).sum();
    if total != union.len() as u64 {
        let overlap = cz
            .intervals
            .windows(2)
            .find(|p| p[0].hi() >= p[1].lo())
            .map(|p| p[1].interval());
        report = report.fail("selected intervals overlap");
        if let Some(i) = overlap {
            report = report.with_witness(i);
        }
        return Ok(report);
    }
    let twice = T::from_int(2) * height.clone();
    for (d, avg) in cz.intervals.iter().zip(&cz.averages) {
        if !(avg > height && *avg <= twice) {
            return Ok(report
                .fail(format!("average {avg} outside (λ, 2λ]"))
                .with_witness(d.interval()));
        }
    }
    if let Some(m) = union.symmetric_difference(&dyadic).next() {
        return Ok(report
            .fail("union differs from the dyadic superlevel set")
            .with_witness(Witness::Point { m: *m }));
    }
    Ok(report)
}

/// `|{M'a > 4λ}| <= 3 |{M_d a > λ}|`, together with `{M'a > 4λ} ⊆ ∪ 3I_j`
/// over the decomposition at height `λ`.
pub fn verify_covering_lemma<T: Scalar>(
    a: &WindowedSequence<T>,
    height: &T,
) -> Result<InequalityReport> {
    check_height(height)?;
    let four = T::from_int(4) * height.clone();
    let centered = superlevel_of(MaximalOp::Centered, a, &four)?;
    let dyadic = superlevel_of(MaximalOp::Dyadic, a, height)?;
    let cover = cz_decompose(a, height)?.tripled_union();
    let report = InequalityReport::bound(
        CheckId::Covering,
        &T::from_usize(centered.len()),
        &T::from_usize(dyadic.len()),
        &T::from_int(3),
    );
    Ok(match centered.iter().find(|m| !cover.contains(m)) {
        Some(&m) => report
            .fail("point of {M'a > 4λ} outside the tripled intervals")
            .with_witness(Witness::Point { m }),
        None => report,
    })
}

fn superlevel_in_window<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    height: &T,
) -> Result<Vec<i64>> {
    let set = superlevel_of(MaximalOp::Uncentered, a, height)?;
    if let (Some(&lo), Some(&hi)) = (set.first(), set.last()) {
        w.require_within("superlevel set", IntegerInterval::new(lo, hi)?)?;
    }
    Ok(set)
}

fn set_weight<T: Scalar>(w: &WeightSequence<T>, set: &[i64]) -> Result<T> {
    set.iter()
        .try_fold(T::zero(), |acc, &m| Ok(acc + w.at(m)?.clone()))
}

/// `Σ_{n} |a(n)| Mw(n)` with `Mw` the uncentered maximal function of the
/// zero-extended weight.
pub fn maximal_weight_pairing<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
) -> Result<T> {
    let Some(support) = a.support() else {
        return Ok(T::zero());
    };
    w.require_within("support", support)?;
    let mw = uncentered_maximal(w.as_sequence(), None, support)?;
    Ok(support
        .iter()
        .zip(mw.values.values())
        .fold(T::zero(), |acc, (m, v)| {
            acc + a.get(m).magnitude() * v.clone()
        }))
}

/// `w({Ma > λ}) <= (36/λ) Σ |a| Mw`.
pub fn weak11_with_mw<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    height: &T,
) -> Result<InequalityReport> {
    weak11_with_constant(a, w, height, &T::from_int(WEAK11_CONSTANT))
}

/// [`weak11_with_mw`] against a supplied constant in place of 36.
pub fn weak11_with_constant<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    height: &T,
    constant: &T,
) -> Result<InequalityReport> {
    check_height(height)?;
    let set = superlevel_in_window(a, w, height)?;
    let lhs = set_weight(w, &set)?;
    let rhs = maximal_weight_pairing(a, w)? / height.clone();
    let mut report = InequalityReport::bound(CheckId::Weak11, &lhs, &rhs, constant)
        .with_note("rhs = Σ|a|·Mw / λ");
    if let (Some(&lo), Some(&hi)) = (set.first(), set.last()) {
        report = report.with_witness(IntegerInterval::new(lo, hi)?);
    }
    Ok(report)
}

/// `w({Ma > λ}) <= (A²·36^p / λ^p) Σ |a|^p w` with `A` the windowed `A_p`
/// constant of `w`.
pub fn weighted_weak_pp<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    p: f64,
    height: &T,
) -> Result<InequalityReport> {
    let ap = ap_constant(w, p)?.constant;
    weighted_weak_pp_with(a, w, p, height, &ap)
}

/// [`weighted_weak_pp`] with a precomputed `A_p` constant.
///
/// The bound rests on `w(3I_j) <= A 3^p w(I_j)` for the decomposition at
/// height `λ/12`, so the tripled intervals must lie inside the weight window,
/// where `A` is known.
pub fn weighted_weak_pp_with<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    p: f64,
    height: &T,
    ap: &T,
) -> Result<InequalityReport> {
    check_exponent(p)?;
    check_height(height)?;
    let cz = cz_decompose(a, &(height.clone() / T::from_int(12)))?;
    for d in &cz.intervals {
        w.require_within("tripled interval", d.tripled())?;
    }
    let set = superlevel_in_window(a, w, height)?;
    let lhs = set_weight(w, &set)?;
    let rhs = weighted_norm_pow(a, w, p)? / power(height, p)?;
    let constant = ap.clone() * ap.clone() * power(&T::from_int(36), p)?;
    let mut report = InequalityReport::bound(CheckId::WeakPp, &lhs, &rhs, &constant)
        .with_note(format!("A = {ap}; rhs = Σ|a|^p·w / λ^p"));
    if let (Some(&lo), Some(&hi)) = (set.first(), set.last()) {
        report = report.with_witness(IntegerInterval::new(lo, hi)?);
    }
    Ok(report)
}

/// Strong-type ratios of `M` on a weighted space.
#[derive(Clone, Debug, PartialEq)]
pub struct StrongTypeReport {
    pub p: f64,
    /// `‖Ma‖_{ℓ^p_w} / ‖a‖_{ℓ^p_w}`, with `Ma` summed over the weight window.
    pub ratio_norm: f64,
    /// `Σ (Ma)^p w / Σ |a|^p Mw`.
    pub ratio_mw: f64,
    pub report: InequalityReport,
}

/// Both strong-type ratios for `p > 1`; boundedness is judged across a corpus.
pub fn strong_pp_check<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    p: f64,
) -> Result<StrongTypeReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let input = weighted_norm_pow(a, w, p)?;
    if input.is_zero() {
        return Err(Error::ZeroNorm);
    }
    let window = w.window();
    let ma = uncentered_maximal(a, None, window)?;
    let output = window
        .iter()
        .zip(ma.values.values())
        .try_fold(T::zero(), |acc, (m, v)| -> Result<T> {
            Ok(acc + power(v, p)? * w.at(m)?.clone())
        })?;
    let mut pairing = T::zero();
    let support = a.support().expect("non-zero norm");
    let mw = uncentered_maximal(w.as_sequence(), None, support)?;
    for (m, v) in support.iter().zip(mw.values.values()) {
        let x = a.get(m).magnitude();
        if !x.is_zero() {
            pairing = pairing + power(&x, p)? * v.clone();
        }
    }
    let out_norm = output.to_f64().powf(1.0 / p);
    let in_norm = input.to_f64().powf(1.0 / p);
    let ratio_mw = output.to_f64() / pairing.to_f64();
    let report = InequalityReport::observation(CheckId::StrongPp, out_norm, in_norm)
        .with_note(format!("Σ(Ma)^p·w / Σ|a|^p·Mw = {ratio_mw}"));
    Ok(StrongTypeReport {
        p,
        ratio_norm: report.ratio,
        ratio_mw,
        report,
    })
}
