//! Windowed Muckenhoupt weights: `A_p` constants, weighted norms and the
//! two interval inequalities that follow from the `A_p` condition.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::interval::IntegerInterval;
use crate::report::{CheckId, InequalityReport, Witness};
use crate::scalar::Scalar;
use crate::sequence::{PrefixSums, WindowedSequence};

/// A strictly positive sequence on its window. Outside the window the weight
/// is undefined, so every consumer checks containment.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence<T: Scalar> {
    base: WindowedSequence<T>,
}

impl<T: Scalar> WeightSequence<T> {
    pub fn new(base: WindowedSequence<T>) -> Result<Self> {
        if let Some(i) = base.values().iter().position(|v| *v <= T::zero()) {
            return Err(Error::NonPositiveWeight {
                index: base.offset() + i as i64,
            });
        }
        Ok(Self { base })
    }

    pub fn from_values(offset: i64, values: Vec<T>) -> Result<Self> {
        Self::new(WindowedSequence::new(offset, values)?)
    }

    pub fn constant(window: IntegerInterval, c: T) -> Result<Self> {
        Self::new(WindowedSequence::from_fn(window, |_| c.clone()))
    }

    pub fn window(&self) -> IntegerInterval {
        self.base.window()
    }

    pub fn as_sequence(&self) -> &WindowedSequence<T> {
        &self.base
    }

    pub fn values(&self) -> &[T] {
        self.base.values()
    }

    pub fn at(&self, m: i64) -> Result<&T> {
        self.base.get_ref(m).ok_or(Error::PointOutside {
            point: m,
            window: self.window(),
        })
    }

    pub fn scaled(&self, c: &T) -> Result<Self> {
        Self::new(self.base.map(|v| v.clone() * c.clone()))
    }

    /// `max w / min w` over the window.
    pub fn ratio_bound(&self) -> T {
        let values = self.values();
        let mut lo = values[0].clone();
        let mut hi = values[0].clone();
        for v in values {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        hi / lo
    }

    pub(crate) fn require_within(&self, what: &'static str, inner: IntegerInterval) -> Result<()> {
        let window = self.window();
        if window.contains_interval(&inner) {
            Ok(())
        } else {
            Err(Error::EscapesWindow {
                what,
                inner,
                window,
            })
        }
    }
}

/// `w(k) = (1 + |k|)^α` on `[-n, n]`.
pub fn power_weight(alpha: f64, n: u64) -> Result<WeightSequence<f64>> {
    if !alpha.is_finite() {
        return Err(Error::Parse(format!(
            "power weight exponent {alpha} is not finite"
        )));
    }
    let window = IntegerInterval::centered(0, n);
    WeightSequence::new(WindowedSequence::from_fn(window, |k| {
        (1.0 + k.unsigned_abs() as f64).powf(alpha)
    }))
}

/// Windowed `A_p` constant with the interval attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct ApReport<T> {
    pub p: f64,
    pub constant: T,
    pub witness: IntegerInterval,
    /// `p' = p/(p-1)`, infinite for `p = 1`.
    pub conjugate: f64,
    pub window: IntegerInterval,
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `x^p`, failing when the backend has no exact value.
pub(crate) fn power<T: Scalar>(x: &T, p: f64) -> Result<T> {
    x.pow_real(p).ok_or(Error::InexactExponent(p))
}

/// Visits every subinterval of the window with its `A_p` product, left end
/// ascending then length ascending, until `visit` breaks.
fn scan_ap<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    mut visit: impl FnMut(T, IntegerInterval) -> ControlFlow<()>,
) -> Result<()> {
    check_exponent(p)?;
    let window = w.window();
    let values = w.values();
    let n = values.len();
    if p == 1.0 {
        for l in 0..n {
            let mut sum = T::zero();
            let mut min = values[l].clone();
            for (r, v) in values.iter().enumerate().skip(l) {
                sum = sum + v.clone();
                if *v < min {
                    min = v.clone();
                }
                let avg = sum.clone() / T::from_usize(r - l + 1);
                let interval = IntegerInterval::new(window.lo() + l as i64, window.lo() + r as i64)
                    .expect("l <= r");
                if visit(avg / min.clone(), interval).is_break() {
                    return Ok(());
                }
            }
        }
        return Ok(());
    }
    let dual_exponent = -1.0 / (p - 1.0);
    let dual = values
        .iter()
        .map(|v| power(v, dual_exponent))
        .collect::<Result<Vec<T>>>()?;
    let outer = p - 1.0;
    // Reject inexact outer powers before scanning.
    power(&T::one(), outer)?;
    let direct = w.as_sequence().prefix_sums();
    let dual_sums = PrefixSums::new(&WindowedSequence::new(window.lo(), dual)?);
    for lo in window.iter() {
        for hi in lo..=window.hi() {
            let interval = IntegerInterval::new(lo, hi).expect("lo <= hi");
            let product = direct.average(&interval) * power(&dual_sums.average(&interval), outer)?;
            if visit(product, interval).is_break() {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// `max_I (avg_I w)(avg_I w^{-1/(p-1)})^{p-1}` over subintervals of the window
/// for `p > 1`, and `max_I avg_I w / min_I w` for `p = 1`.
///
/// Exact backends support only `p ∈ {1, 2}`; other exponents need irrational
/// powers and fail with [`Error::InexactExponent`].
pub fn ap_constant<T: Scalar>(w: &WeightSequence<T>, p: f64) -> Result<ApReport<T>> {
    let mut best: Option<(T, IntegerInterval)> = None;
    scan_ap(w, p, |v, interval| {
        let better = match &best {
            None => true,
            Some((b, i)) => v > *b || (v == *b && interval.len() < i.len()),
        };
        if better {
            best = Some((v, interval));
        }
        ControlFlow::Continue(())
    })?;
    let (constant, witness) = best.expect("window is non-empty");
    Ok(ApReport {
        p,
        constant,
        witness,
        conjugate: conjugate_exponent(p),
        window: w.window(),
    })
}

/// Decides whether the `A_p` constant is at most `threshold`, stopping at the
/// first interval whose product exceeds it. Returns that interval, if any.
pub fn ap_exceedance<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    threshold: &T,
) -> Result<Option<(T, IntegerInterval)>> {
    let mut found = None;
    scan_ap(w, p, |v, interval| {
        if v > *threshold {
            found = Some((v, interval));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(found)
}

/// `Σ_k |a(k)|^p w(k)`.
pub fn weighted_norm_pow<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    p: f64,
) -> Result<T> {
    check_exponent(p)?;
    let Some(support) = a.support() else {
        return Ok(T::zero());
    };
    w.require_within("support", support)?;
    let mut total = T::zero();
    for m in support.iter() {
        let v = a.get(m).magnitude();
        if !v.is_zero() {
            total = total + power(&v, p)? * w.at(m)?.clone();
        }
    }
    Ok(total)
}

/// `(Σ_k |a(k)|^p w(k))^{1/p}`.
pub fn weighted_norm<T: Scalar>(
    a: &WindowedSequence<T>,
    w: &WeightSequence<T>,
    p: f64,
) -> Result<f64> {
    Ok(weighted_norm_pow(a, w, p)?.to_f64().powf(1.0 / p))
}

/// `w(S) = Σ_{k∈S} w(k)`; repeated points count once.
pub fn weight_measure<T: Scalar>(w: &WeightSequence<T>, set: &[i64]) -> Result<T> {
    let mut points = set.to_vec();
    points.sort_unstable();
    points.dedup();
    points
        .iter()
        .try_fold(T::zero(), |acc, &m| Ok(acc + w.at(m)?.clone()))
}

fn interval_weight<T: Scalar>(w: &WeightSequence<T>, interval: &IntegerInterval) -> T {
    w.as_sequence()
        .slice(interval)
        .iter()
        .fold(T::zero(), |s, v| s + v.clone())
}

/// `w(I)(a(I)/|I|)^p <= A Σ_{m∈I} |a(m)|^p w(m)` with `A` the windowed `A_p`
/// constant of `w`. `a` enters through `|a|`.
pub fn check_interval_inequality_a<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    a: &WindowedSequence<T>,
    interval: IntegerInterval,
) -> Result<InequalityReport> {
    let constant = ap_constant(w, p)?.constant;
    interval_inequality_a_with(w, p, a, interval, &constant)
}

/// [`check_interval_inequality_a`] against a supplied constant.
pub fn interval_inequality_a_with<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    a: &WindowedSequence<T>,
    interval: IntegerInterval,
    constant: &T,
) -> Result<InequalityReport> {
    check_exponent(p)?;
    w.require_within("interval", interval)?;
    let mut mass = T::zero();
    let mut rhs = T::zero();
    for m in interval.iter() {
        let v = a.get(m).magnitude();
        if !v.is_zero() {
            rhs = rhs + power(&v, p)? * w.at(m)?.clone();
            mass = mass + v;
        }
    }
    if mass.is_zero() {
        return Err(Error::VanishesOn(interval));
    }
    let len = T::from_int(interval.len() as i64);
    let lhs = interval_weight(w, &interval) * power(&(mass / len), p)?;
    Ok(InequalityReport::bound(CheckId::IntervalA, &lhs, &rhs, constant).with_witness(interval))
}

/// `w(I)(|S|/|I|)^p <= A w(S)` for `∅ ≠ S ⊆ I`, evaluated as the first
/// inequality with `a = χ_S`.
pub fn check_interval_inequality_b<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    set: &[i64],
    interval: IntegerInterval,
) -> Result<InequalityReport> {
    let constant = ap_constant(w, p)?.constant;
    interval_inequality_b_with(w, p, set, interval, &constant)
}

/// [`check_interval_inequality_b`] against a supplied constant.
pub fn interval_inequality_b_with<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    set: &[i64],
    interval: IntegerInterval,
    constant: &T,
) -> Result<InequalityReport> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(&m) = set.iter().find(|&&m| !interval.contains(m)) {
        return Err(Error::PointOutside {
            point: m,
            window: interval,
        });
    }
    let indicator = WindowedSequence::from_fn(interval, |m| {
        if set.contains(&m) {
            T::one()
        } else {
            T::zero()
        }
    });
    let mut report = interval_inequality_a_with(w, p, &indicator, interval, constant)?;
    report.check = CheckId::IntervalB;
    Ok(report)
}

/// The second interval inequality over every non-empty `S ⊆ I` at once.
///
/// For a fixed size `k` the left side is fixed and `w(S)` is smallest on the
/// `k` lightest points, so checking those `|I|` sets settles all `2^|I| - 1`.
/// Returns the report with the largest ratio.
pub fn interval_inequality_b_all_subsets<T: Scalar>(
    w: &WeightSequence<T>,
    p: f64,
    interval: IntegerInterval,
    constant: &T,
) -> Result<InequalityReport> {
    w.require_within("interval", interval)?;
    let mut points: Vec<i64> = interval.iter().collect();
    points.sort_by(|x, y| {
        let (wx, wy) = (w.at(*x).expect("inside"), w.at(*y).expect("inside"));
        wx.partial_cmp(wy)
            .expect("weights are ordered")
            .then(x.cmp(y))
    });
    let mut worst: Option<InequalityReport> = None;
    for k in 1..=points.len() {
        let set = &points[..k];
        let report = interval_inequality_b_with(w, p, set, interval, constant)?;
        let replace = match &worst {
            None => true,
            Some(r) => {
                (!report.pass && r.pass) || (report.pass == r.pass && report.ratio > r.ratio)
            }
        };
        if replace {
            let detail = format!("{k} lightest points of {interval}");
            worst = Some(report.with_witness(Witness::Text { detail }));
        }
    }
    Ok(worst.expect("interval is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn iv(lo: i64, hi: i64) -> IntegerInterval {
        IntegerInterval::new(lo, hi).unwrap()
    }

    fn q(n: i64, d: i64) -> Exact {
        Exact::new(n.into(), d.into())
    }

    fn alternating() -> WeightSequence<Exact> {
        WeightSequence::from_values(1, (0..8).map(|i| q(1 + i % 2, 1)).collect()).unwrap()
    }

    #[test]
    fn constant_weights_have_constant_one() {
        let w = WeightSequence::constant(iv(-5, 5), 3.5f64).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let r = ap_constant(&w, p).unwrap();
            assert!((r.constant - 1.0).abs() < 1e-12);
            assert_eq!(r.witness, iv(-5, -5));
        }
        let exact = WeightSequence::constant(iv(0, 3), q(7, 3)).unwrap();
        assert_eq!(ap_constant(&exact, 2.0).unwrap().constant, q(1, 1));
    }

    #[test]
    fn alternating_a2() {
        let r = ap_constant(&alternating(), 2.0).unwrap();
        assert_eq!(r.constant, q(9, 8));
        assert_eq!(r.witness, iv(1, 2));
        assert_eq!(r.conjugate, 2.0);
        let a1 = ap_constant(&alternating(), 1.0).unwrap();
        assert_eq!(a1.constant, q(5, 3));
        assert_eq!(a1.witness, iv(2, 4));
        assert!(a1.conjugate.is_infinite());
    }

    #[test]
    fn exact_mode_rejects_irrational_powers() {
        assert_eq!(
            ap_constant(&alternating(), 1.5).unwrap_err(),
            Error::InexactExponent(0.5)
        );
        assert!(ap_constant(&alternating(), 3.0).is_err());
        assert_eq!(
            ap_constant(&alternating(), 0.5).unwrap_err(),
            Error::InvalidExponent(0.5)
        );
    }

    #[test]
    fn threshold_mode() {
        let w = alternating();
        assert_eq!(ap_exceedance(&w, 2.0, &q(9, 8)).unwrap(), None);
        let (v, i) = ap_exceedance(&w, 2.0, &q(1, 1)).unwrap().unwrap();
        assert!(v > q(1, 1));
        assert_eq!(i, iv(1, 2));
    }

    #[test]
    fn rejects_non_positive_weights() {
        assert_eq!(
            WeightSequence::from_values(3, vec![1.0, 0.0]).unwrap_err(),
            Error::NonPositiveWeight { index: 4 }
        );
    }

    #[test]
    fn norm_and_measure_examples() {
        let w1 = WeightSequence::constant(iv(-3, 3), 1.0).unwrap();
        let delta = WindowedSequence::delta(0);
        assert_eq!(weighted_norm(&delta, &w1, 3.0).unwrap(), 1.0);
        let ones = WindowedSequence::new(1, vec![1.0; 4]).unwrap();
        let w2 = WeightSequence::constant(iv(0, 5), 2.0).unwrap();
        assert!((weighted_norm(&ones, &w2, 2.0).unwrap() - 8f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            weighted_norm(&ones, &w1, 2.0),
            Err(Error::EscapesWindow { .. })
        ));
        assert_eq!(weight_measure(&w1, &[]).unwrap(), 0.0);
        assert_eq!(weight_measure(&w1, &[-1, 0, 0, 2]).unwrap(), 3.0);
        assert!(weight_measure(&w1, &[9]).is_err());
    }

    #[test]
    fn interval_a_examples() {
        let w = WeightSequence::constant(iv(-4, 4), q(1, 1)).unwrap();
        let ones = WindowedSequence::from_fn(iv(-4, 4), |_| q(1, 1));
        let r = check_interval_inequality_a(&w, 2.0, &ones, iv(-2, 3)).unwrap();
        assert!(r.pass);
        assert_eq!(r.ratio, 1.0);
        let delta = WindowedSequence::delta(0);
        let r = check_interval_inequality_a(&w, 2.0, &delta, iv(0, 1)).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.5, 1.0));
        assert!(r.pass);
        assert_eq!(
            check_interval_inequality_a(&w, 2.0, &delta, iv(1, 2)).unwrap_err(),
            Error::VanishesOn(iv(1, 2))
        );
    }

    #[test]
    fn interval_b_examples() {
        let w = WeightSequence::constant(iv(0, 8), q(1, 1)).unwrap();
        let r = check_interval_inequality_b(&w, 2.0, &[1], iv(1, 4)).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.25, 1.0));
        assert!(r.pass);
        let full: Vec<i64> = (1..=4).collect();
        let r = check_interval_inequality_b(&w, 2.0, &full, iv(1, 4)).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(
            check_interval_inequality_b(&w, 2.0, &[], iv(1, 4)).unwrap_err(),
            Error::EmptySet
        );
    }

    #[test]
    fn all_subsets_detects_a_too_small_constant() {
        let w = alternating();
        let a = ap_constant(&w, 2.0).unwrap().constant;
        assert!(
            interval_inequality_b_all_subsets(&w, 2.0, iv(1, 8), &a)
                .unwrap()
                .pass
        );
        let r = interval_inequality_b_all_subsets(&w, 2.0, iv(1, 2), &q(1, 2)).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn ratio_bounded_weights() {
        let w = WeightSequence::from_values(0, vec![1.0, 3.0, 2.0, 1.5, 3.0, 1.0]).unwrap();
        assert_eq!(w.ratio_bound(), 3.0);
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!(ap_constant(&w, p).unwrap().constant <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn power_weight_trend() {
        let a2 = |alpha: f64, n: u64| {
            ap_constant(&power_weight(alpha, n).unwrap(), 2.0)
                .unwrap()
                .constant
        };
        assert_eq!(a2(0.0, 64), 1.0);
        let mild: Vec<f64> = [16, 64, 256].iter().map(|&n| a2(0.4, n)).collect();
        let (lo, hi) = mild
            .iter()
            .fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(hi <= 2.0 * lo, "{mild:?}");
        assert!(a2(1.5, 256) >= 2.0 * a2(1.5, 16));
    }
}
