//! Brute-force reference implementations.
//!
//! Every function here sums directly from the definition, with no prefix
//! tables, sweeps or closed forms, so the optimized versions in
//! `ergomax-core` can be compared against it. Witness ties follow the same
//! rule: shortest interval, then leftmost.

use std::collections::BTreeSet;

use ergomax_core::{
    AtomFunction, DyadicInterval, FinitePermutationSystem, IntegerInterval, Scalar, WeightSequence,
    WindowedSequence,
};

pub type Best<T> = (T, IntegerInterval);

fn iv(lo: i64, hi: i64) -> IntegerInterval {
    IntegerInterval::new(lo, hi).expect("lo <= hi")
}

fn abs_sum<T: Scalar>(a: &WindowedSequence<T>, i: IntegerInterval) -> T {
    i.iter().fold(T::zero(), |s, n| s + a.get(n).magnitude())
}

fn abs_avg<T: Scalar>(a: &WindowedSequence<T>, i: IntegerInterval) -> T {
    abs_sum(a, i) / T::from_int(i.len() as i64)
}

fn offer<T: Scalar>(best: &mut Option<Best<T>>, v: T, i: IntegerInterval) {
    let better = match best {
        None => true,
        Some((b, bi)) => v > *b || (v == *b && (i.len(), i.lo()) < (bi.len(), bi.lo())),
    };
    if better {
        *best = Some((v, i));
    }
}

/// Centered maximal function at `m`, radii `1 <= r` (and `r < J` if truncated).
pub fn centered<T: Scalar>(a: &WindowedSequence<T>, truncation: Option<u64>, m: i64) -> Best<T> {
    let window = a.window();
    let reach = (m - window.lo())
        .unsigned_abs()
        .max((m - window.hi()).unsigned_abs())
        + 1;
    let r_max = truncation.map_or(reach, |j| (j - 1).min(reach));
    let mut best = None;
    for r in 1..=r_max.max(1) {
        let i = IntegerInterval::centered(m, r);
        offer(&mut best, abs_avg(a, i), i);
    }
    best.expect("r = 1 always evaluated")
}

/// Uncentered maximal function at `m` over every interval `I ∋ m` inside the
/// stored window widened to reach `m` (and `|I| <= J` if truncated).
pub fn uncentered<T: Scalar>(a: &WindowedSequence<T>, truncation: Option<u64>, m: i64) -> Best<T> {
    let hull = a.window().hull(&IntegerInterval::singleton(m));
    let mut best = None;
    for lo in hull.lo()..=m {
        for hi in m..=hull.hi() {
            let i = iv(lo, hi);
            if truncation.is_some_and(|j| i.len() > j) {
                continue;
            }
            offer(&mut best, abs_avg(a, i), i);
        }
    }
    best.expect("the singleton is always admissible")
}

/// Dyadic maximal function at `m` over levels `1..=N`, where `N` is the first
/// level whose intervals reach past every stored index and `m`. At that level
/// the interval containing `m` is `[1, 2^N]` or `[1 - 2^N, 0]`, holding all the
/// mass on its side of the origin, and higher levels only dilute it.
pub fn dyadic<T: Scalar>(a: &WindowedSequence<T>, m: i64) -> Best<T> {
    let window = a.window();
    let reach = [m, window.lo(), window.hi()]
        .iter()
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap();
    let mut best: Option<Best<T>> = None;
    let mut level = 1;
    loop {
        let d = DyadicInterval::containing(m, level)
            .expect("level in range")
            .interval();
        let v = abs_avg(a, d);
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, d));
        }
        if (1u64 << level) > reach {
            break;
        }
        level += 1;
    }
    best.expect("level 1 evaluated")
}

fn mean_oscillation<T: Scalar>(a: &WindowedSequence<T>, i: IntegerInterval) -> T {
    let n = T::from_int(i.len() as i64);
    let mean = i.iter().fold(T::zero(), |s, k| s + a.get(k)) / n.clone();
    i.iter()
        .fold(T::zero(), |s, k| s + (a.get(k) - mean.clone()).magnitude())
        / n
}

/// Sharp maximal function at `m` over intervals `I ∋ m`, `I ⊆ range`.
pub fn sharp<T: Scalar>(a: &WindowedSequence<T>, range: IntegerInterval, m: i64) -> Best<T> {
    let mut best = None;
    for lo in range.lo()..=m {
        for hi in m..=range.hi() {
            let i = iv(lo, hi);
            offer(&mut best, mean_oscillation(a, i), i);
        }
    }
    best.expect("m lies in range")
}

/// `sup_I inf_b avg_I |a - b|` over `I ⊆ range` meeting `eval`; the convex
/// piecewise-linear inner function is minimized at one of its data points.
pub fn best_constant<T: Scalar>(
    a: &WindowedSequence<T>,
    eval: IntegerInterval,
    range: IntegerInterval,
) -> Best<T> {
    let mut best = None;
    for lo in range.lo()..=eval.hi() {
        for hi in lo.max(eval.lo())..=range.hi() {
            let i = iv(lo, hi);
            let n = T::from_int(i.len() as i64);
            let inner = i
                .iter()
                .map(|c| {
                    let b = a.get(c);
                    i.iter()
                        .fold(T::zero(), |s, k| s + (a.get(k) - b.clone()).magnitude())
                        / n.clone()
                })
                .reduce(|x, y| if y < x { y } else { x })
                .expect("non-empty interval");
            offer(&mut best, inner, i);
        }
    }
    best.expect("eval lies in range")
}

fn dual_power<T: Scalar>(v: &T, p: f64) -> T {
    v.pow_real(-1.0 / (p - 1.0))
        .expect("exponent representable")
}

/// Windowed `A_p` constant from the definition.
pub fn ap_constant<T: Scalar>(w: &WeightSequence<T>, p: f64) -> T {
    let window = w.window();
    let at = |k: i64| w.at(k).expect("inside window").clone();
    let mut best: Option<T> = None;
    for lo in window.lo()..=window.hi() {
        for hi in lo..=window.hi() {
            let i = iv(lo, hi);
            let n = T::from_int(i.len() as i64);
            let avg = i.iter().fold(T::zero(), |s, k| s + at(k)) / n.clone();
            let v = if p == 1.0 {
                let min = i
                    .iter()
                    .map(at)
                    .reduce(|x, y| if y < x { y } else { x })
                    .unwrap();
                avg / min
            } else {
                let dual = i.iter().fold(T::zero(), |s, k| s + dual_power(&at(k), p)) / n;
                avg * dual.pow_real(p - 1.0).expect("exponent representable")
            };
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
    }
    best.expect("window is non-empty")
}

/// Calderón–Zygmund intervals at height `λ` as `(level, index)` pairs:
/// dyadic intervals averaging above `λ` none of whose ancestors below the
/// first level where every interval is quiet does.
pub fn cz_intervals<T: Scalar>(a: &WindowedSequence<T>, height: &T) -> Vec<(u32, i64)> {
    let Some(support) = a.support() else {
        return Vec::new();
    };
    let l1 = abs_sum(a, support);
    let mut top = 1;
    while T::from_int(1i64 << top) * height.clone() < l1 {
        top += 1;
    }
    let heavy = |d: &DyadicInterval| abs_avg(a, d.interval()) > *height;
    let mut out = Vec::new();
    for level in 1..top {
        let first = DyadicInterval::containing(support.lo(), level)
            .unwrap()
            .index();
        let last = DyadicInterval::containing(support.hi(), level)
            .unwrap()
            .index();
        for index in first..=last {
            let d = DyadicInterval::new(level, index).unwrap();
            if !heavy(&d) {
                continue;
            }
            let mut ancestor = d;
            let mut maximal = true;
            while ancestor.level() < top {
                ancestor = ancestor.parent().unwrap();
                if heavy(&ancestor) {
                    maximal = false;
                    break;
                }
            }
            if maximal {
                out.push((level, index));
            }
        }
    }
    out.sort_unstable_by_key(|&(level, index)| DyadicInterval::new(level, index).unwrap().lo());
    out
}

/// `{m ∈ window : value(m) > λ}` evaluated pointwise.
pub fn superlevel<T: Scalar>(
    window: IntegerInterval,
    height: &T,
    value: impl Fn(i64) -> T,
) -> BTreeSet<i64> {
    window.iter().filter(|&m| value(m) > *height).collect()
}

fn orbit_point<T: Scalar>(sys: &FinitePermutationSystem<T>, x: usize, k: i64) -> usize {
    // U^{-k}x by repeated application of the permutation or its inverse
    let mut y = x;
    if k >= 0 {
        for _ in 0..k {
            y = sys.inverse()[y];
        }
    } else {
        for _ in 0..-k {
            y = sys.perm()[y];
        }
    }
    y
}

/// `(2n+1)^{-1} Σ_{|k|<=n} g(U^{-k}x)`.
pub fn orbit_average<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    g: impl Fn(usize) -> T,
    x: usize,
    n: u64,
) -> T {
    let k = n as i64;
    (-k..=k).fold(T::zero(), |s, i| s + g(orbit_point(sys, x, i))) / T::from_int(2 * k + 1)
}

/// `max_{1<=n<=radius} (2n+1)^{-1} Σ_{|k|<=n} |f(U^{-k}x)|`.
pub fn ergodic_maximal<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    x: usize,
    radius: u64,
) -> T {
    (1..=radius)
        .map(|n| orbit_average(sys, |y| f.get(y).magnitude(), x, n))
        .reduce(|a, b| if b > a { b } else { a })
        .expect("radius >= 1")
}

/// Ergodic `A_p` product over atoms of positive mass and radii `1..=n_max`.
pub fn ergodic_ap<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    w: &AtomFunction<T>,
    p: f64,
    n_max: u64,
) -> T {
    let mut best: Option<T> = None;
    for x in (0..sys.n()).filter(|&x| *sys.mass(x) > T::zero()) {
        for n in 1..=n_max {
            let avg = orbit_average(sys, |y| w.get(y).clone(), x, n);
            let v = if p == 1.0 {
                let k = n as i64;
                let min = (-k..=k)
                    .map(|i| w.get(orbit_point(sys, x, i)).clone())
                    .reduce(|a, b| if b < a { b } else { a })
                    .unwrap();
                avg / min
            } else {
                let dual = orbit_average(sys, |y| dual_power(w.get(y), p), x, n);
                avg * dual.pow_real(p - 1.0).expect("exponent representable")
            };
            if best.as_ref().map_or(true, |b| v > *b) {
                best = Some(v);
            }
        }
    }
    best.expect("some atom carries mass")
}
