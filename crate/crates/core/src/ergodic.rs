//! Finite atomic measure-preserving systems: the maximal ergodic operator,
//! ergodic `A_p` weights, ergodic rectangles, and the orbit sequences that
//! carry maximal inequalities between ℤ and the system.
//!
//! `U` is the permutation `perm`; `U^{-k}x` applies the inverse permutation
//! `k` times. For the cycle `x -> x+1 (mod n)` this gives `U^{-k}x = x - k`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cz::WEAK11_CONSTANT;
use crate::error::{Error, Result};
use crate::interval::IntegerInterval;
use crate::maximal::centered_maximal;
use crate::report::{CheckId, InequalityReport, Witness};
use crate::scalar::Scalar;
use crate::sequence::WindowedSequence;
use crate::weights::{check_exponent, conjugate_exponent, power, WeightSequence};

/// A real function on the atoms of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct AtomFunction<T> {
    values: Vec<T>,
}

impl<T: Scalar> AtomFunction<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite { index: i as i64 });
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self { values: vec![c; n] }
    }

    /// Indicator of a single atom.
    pub fn indicator(n: usize, atom: usize) -> Self {
        let mut values = vec![T::zero(); n];
        values[atom] = T::one();
        Self { values }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Self {
        Self {
            values: (0..n).map(f).collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, x: usize) -> &T {
        &self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> AtomFunction<U> {
        AtomFunction {
            values: self.values.iter().map(f).collect(),
        }
    }
}

/// A probability space on atoms `0..n` with a mass-preserving permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePermutationSystem<T: Scalar> {
    masses: Vec<T>,
    perm: Vec<usize>,
    inverse: Vec<usize>,
    /// Each cycle in forward order, starting from its smallest atom.
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
    position: Vec<usize>,
}

/// Cycle structure of a validated system.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics<T> {
    pub cycles: Vec<Vec<usize>>,
    pub cycle_masses: Vec<T>,
    pub ergodic: bool,
}

impl<T: Scalar> FinitePermutationSystem<T> {
    /// Validates bijectivity, non-negative masses constant along `U`, and
    /// total mass one.
    pub fn new(masses: Vec<T>, perm: Vec<usize>) -> Result<Self> {
        let n = masses.len();
        if n == 0 {
            return Err(Error::EmptySet);
        }
        if perm.len() != n {
            return Err(Error::LengthMismatch {
                what: "perm",
                expected: n,
                found: perm.len(),
            });
        }
        let mut inverse = vec![usize::MAX; n];
        for (x, &y) in perm.iter().enumerate() {
            if y >= n || inverse[y] != usize::MAX {
                return Err(Error::NotPermutation { atom: x });
            }
            inverse[y] = x;
        }
        for (x, m) in masses.iter().enumerate() {
            if !m.is_finite_value() {
                return Err(Error::NonFinite { index: x as i64 });
            }
            if *m < T::zero() {
                return Err(Error::NegativeMass { atom: x });
            }
        }
        for x in 0..n {
            if !masses[perm[x]].identity_eq(&masses[x]) {
                return Err(Error::MassNotPreserved { atom: x });
            }
        }
        let total = masses.iter().fold(T::zero(), |s, m| s + m.clone());
        if !total.identity_eq(&T::one()) {
            return Err(Error::MassSum(total.to_f64()));
        }
        let mut cycles = Vec::new();
        let mut cycle_of = vec![usize::MAX; n];
        let mut position = vec![0; n];
        for start in 0..n {
            if cycle_of[start] != usize::MAX {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            loop {
                cycle_of[x] = cycles.len();
                position[x] = cycle.len();
                cycle.push(x);
                x = perm[x];
                if x == start {
                    break;
                }
            }
            cycles.push(cycle);
        }
        Ok(Self {
            masses,
            perm,
            inverse,
            cycles,
            cycle_of,
            position,
        })
    }

    /// Equal masses `1/n` on the cycle `x -> x+1 (mod n)`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let mass = T::one() / T::from_usize(n);
        Self::new(vec![mass; n], (0..n).map(|x| (x + 1) % n).collect())
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn mass(&self, x: usize) -> &T {
        &self.masses[x]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle_length(&self, x: usize) -> usize {
        self.cycles[self.cycle_of[x]].len()
    }

    /// `U^k x` for any integer `k`.
    pub fn shift(&self, x: usize, k: i64) -> usize {
        let cycle = &self.cycles[self.cycle_of[x]];
        let len = cycle.len() as i64;
        cycle[(self.position[x] as i64 + k).rem_euclid(len) as usize]
    }

    pub fn check_atom(&self, x: usize) -> Result<()> {
        if x < self.n() {
            Ok(())
        } else {
            Err(Error::NoSuchAtom {
                atom: x,
                n: self.n(),
            })
        }
    }

    pub fn check_function(&self, what: &'static str, f: &AtomFunction<T>) -> Result<()> {
        if f.len() == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what,
                expected: self.n(),
                found: f.len(),
            })
        }
    }

    /// Requires `w > 0` on every atom of positive mass.
    pub fn check_weight(&self, w: &AtomFunction<T>) -> Result<()> {
        self.check_function("weight", w)?;
        for x in 0..self.n() {
            if self.masses[x] > T::zero() && w.values[x] <= T::zero() {
                return Err(Error::NonPositiveAtomWeight { atom: x });
            }
        }
        Ok(())
    }

    /// `f ∘ U^{-k}`.
    pub fn pull_back(&self, f: &AtomFunction<T>, k: i64) -> AtomFunction<T> {
        AtomFunction::from_fn(self.n(), |x| f.values[self.shift(x, -k)].clone())
    }

    /// `∫ f dμ`.
    pub fn integral(&self, f: &AtomFunction<T>) -> T {
        f.values
            .iter()
            .zip(&self.masses)
            .fold(T::zero(), |s, (v, m)| s + v.clone() * m.clone())
    }

    fn positive_cycles(&self) -> impl Iterator<Item = &Vec<usize>> + '_ {
        self.cycles.iter().filter(|c| self.masses[c[0]] > T::zero())
    }

    /// The single cycle carrying all the mass, if the system is ergodic.
    pub fn main_cycle(&self) -> Result<&[usize]> {
        let mut positive = self.positive_cycles();
        match (positive.next(), positive.next()) {
            (Some(c), None) => Ok(c),
            _ => Err(Error::NotErgodic),
        }
    }

    pub fn diagnostics(&self) -> Diagnostics<T> {
        Diagnostics {
            cycles: self.cycles.clone(),
            cycle_masses: self
                .cycles
                .iter()
                .map(|c| c.iter().fold(T::zero(), |s, &x| s + self.masses[x].clone()))
                .collect(),
            ergodic: is_ergodic(self),
        }
    }
}

/// Validates a system description and reports its cycle structure.
pub fn validate_system<T: Scalar>(masses: Vec<T>, perm: Vec<usize>) -> Result<Diagnostics<T>> {
    Ok(FinitePermutationSystem::new(masses, perm)?.diagnostics())
}

/// Ergodic iff the atoms of positive mass form a single cycle.
pub fn is_ergodic<T: Scalar>(sys: &FinitePermutationSystem<T>) -> bool {
    sys.main_cycle().is_ok()
}

/// `M̃f` with the radius attaining it at each atom.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicMaximal<T> {
    pub values: AtomFunction<T>,
    pub radii: Vec<u64>,
}

/// `M̃_J f(x) = max_{1<=n<=J} (2n+1)^{-1} Σ_{|k|<=n} |f(U^{-k}x)|`, or the
/// supremum over all `n >= 1` when `truncation` is `None`.
///
/// Radii beyond the cycle length `L` of `x` never help: the window of radius
/// `n > L` is that of radius `n - L` plus two full cycles, so its average is a
/// mediant of the two, and some radius `n <= L` already reaches the cycle
/// average.
pub fn ergodic_maximal<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    truncation: Option<u64>,
) -> Result<ErgodicMaximal<T>> {
    sys.check_function("f", f)?;
    if truncation == Some(0) {
        return Err(Error::InvalidTruncation(0));
    }
    let n = sys.n();
    let mut values = Vec::with_capacity(n);
    let mut radii = Vec::with_capacity(n);
    for x in 0..n {
        let len = sys.cycle_length(x) as u64;
        let cap = truncation.map_or(len, |j| j.min(len)).max(1);
        let mut sum = f.values[x].magnitude();
        let mut best = (T::zero(), 1);
        for r in 1..=cap {
            let k = r as i64;
            sum = sum
                + f.values[sys.shift(x, -k)].magnitude()
                + f.values[sys.shift(x, k)].magnitude();
            let avg = sum.clone() / T::from_int(2 * k + 1);
            if r == 1 || avg > best.0 {
                best = (avg, r);
            }
        }
        values.push(best.0);
        radii.push(best.1);
    }
    Ok(ErgodicMaximal {
        values: AtomFunction { values },
        radii,
    })
}

/// `∫ |f|^p w dμ`.
pub fn weighted_lp_norm_pow<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    w: &AtomFunction<T>,
    p: f64,
) -> Result<T> {
    check_exponent(p)?;
    sys.check_function("f", f)?;
    sys.check_weight(w)?;
    let mut total = T::zero();
    for x in 0..sys.n() {
        let v = f.values[x].magnitude();
        if !v.is_zero() && !sys.masses[x].is_zero() {
            total = total + power(&v, p)? * w.values[x].clone() * sys.masses[x].clone();
        }
    }
    Ok(total)
}

/// `(∫ |f|^p w dμ)^{1/p}`.
pub fn weighted_lp_norm<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    w: &AtomFunction<T>,
    p: f64,
) -> Result<f64> {
    Ok(weighted_lp_norm_pow(sys, f, w, p)?.to_f64().powf(1.0 / p))
}

/// Ergodic `A_p` constant with the atom and radius attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicApReport<T> {
    pub p: f64,
    pub constant: T,
    pub atom: usize,
    /// Attaining radius `N`; `None` when the supremum is only approached as
    /// `N -> ∞`.
    pub radius: Option<u64>,
    pub conjugate: f64,
}

/// Symmetric orbit sums around one atom, split as `N = qL + r`: the window of
/// radius `N` holds `2q` full cycles plus the window of radius `r`.
struct OrbitWindows<T> {
    len: u64,
    cycle_sum: T,
    dual_cycle_sum: T,
    partial: Vec<T>,
    dual_partial: Vec<T>,
    minima: Vec<T>,
}

impl<T: Scalar> OrbitWindows<T> {
    fn new(
        sys: &FinitePermutationSystem<T>,
        w: &[T],
        dual: &[T],
        x: usize,
        cycle_sum: T,
        dual_cycle_sum: T,
    ) -> Self {
        let len = sys.cycle_length(x);
        let mut partial = vec![w[x].clone()];
        let mut dual_partial = vec![dual[x].clone()];
        let mut minima = vec![w[x].clone()];
        for r in 1..len {
            let (a, b) = (sys.shift(x, r as i64), sys.shift(x, -(r as i64)));
            partial.push(partial[r - 1].clone() + w[a].clone() + w[b].clone());
            dual_partial.push(dual_partial[r - 1].clone() + dual[a].clone() + dual[b].clone());
            let lower = if w[a] < w[b] {
                w[a].clone()
            } else {
                w[b].clone()
            };
            let prev = minima[r - 1].clone();
            minima.push(if lower < prev { lower } else { prev });
        }
        Self {
            len: len as u64,
            cycle_sum,
            dual_cycle_sum,
            partial,
            dual_partial,
            minima,
        }
    }

    fn split(&self, n: u64) -> (T, usize, T) {
        let q = T::from_int(2 * (n / self.len) as i64);
        let r = (n % self.len) as usize;
        (q, r, T::from_int(2 * n as i64 + 1))
    }

    fn product(&self, n: u64, p: f64) -> Result<T> {
        let (q2, r, count) = self.split(n);
        let direct =
            (q2.clone() * self.cycle_sum.clone() + self.partial[r].clone()) / count.clone();
        if p == 1.0 {
            let min = self.minima[(n as usize).min(self.len as usize - 1)].clone();
            return Ok(direct / min);
        }
        let dual = (q2 * self.dual_cycle_sum.clone() + self.dual_partial[r].clone()) / count;
        Ok(direct * power(&dual, p - 1.0)?)
    }

    /// The value approached as `N -> ∞`.
    fn limit(&self, p: f64) -> Result<T> {
        let l = T::from_int(self.len as i64);
        let direct = self.cycle_sum.clone() / l.clone();
        if p == 1.0 {
            return Ok(direct / self.minima[self.len as usize - 1].clone());
        }
        Ok(direct * power(&(self.dual_cycle_sum.clone() / l), p - 1.0)?)
    }

    /// Radii beyond `2L` where the product can peak. For fixed `r` the
    /// product is a function of `s = 1/(2N+1)` of the form
    /// `(α + βs)(γ + δs)^{p-1}`, which is log-concave, so its integer maximum
    /// sits next to the stationary point.
    fn peak_candidates(&self, p: f64) -> Vec<u64> {
        let mut out = Vec::new();
        if p == 1.0 {
            return out;
        }
        let l = self.len as f64;
        let alpha = self.cycle_sum.to_f64() / l;
        let gamma = self.dual_cycle_sum.to_f64() / l;
        for r in 0..self.len as usize {
            let c0 = (2 * r + 1) as f64;
            let beta = self.partial[r].to_f64() - c0 * alpha;
            let delta = self.dual_partial[r].to_f64() - c0 * gamma;
            let denom = beta * delta * p;
            if denom == 0.0 {
                continue;
            }
            let s = -(beta * gamma + (p - 1.0) * delta * alpha) / denom;
            if s.is_nan() || s <= 0.0 {
                continue;
            }
            let q = (1.0 / s - c0) / (2.0 * l);
            if !q.is_finite() || q > 1e12 {
                continue;
            }
            let base = q.floor().max(0.0) as u64;
            for q in base.saturating_sub(1)..=base + 2 {
                let n = q * self.len + r as u64;
                if n > 2 * self.len {
                    out.push(n);
                }
            }
        }
        out
    }
}

/// Ergodic `A_p` constant: the maximum over positive-mass atoms `x` and radii
/// `N` of `(avg w(U^k x))·(avg w(U^k x)^{-1/(p-1)})^{p-1}` over `|k| <= N`, or of
/// `avg / min` over the same window for `p = 1`.
///
/// With `n_max` the radii are `1..=n_max`. Without it the supremum over all
/// `N >= 1` is computed exactly: radii up to twice the cycle length, the
/// stationary points of each residue class, and the limit `N -> ∞`.
pub fn ergodic_ap_constant<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    w: &AtomFunction<T>,
    p: f64,
    n_max: Option<u64>,
) -> Result<ErgodicApReport<T>> {
    check_exponent(p)?;
    sys.check_weight(w)?;
    if n_max == Some(0) {
        return Err(Error::InvalidTruncation(0));
    }
    let dual: Vec<T> = if p == 1.0 {
        w.values.clone()
    } else {
        let e = -1.0 / (p - 1.0);
        w.values
            .iter()
            .map(|v| {
                if *v > T::zero() {
                    power(v, e)
                } else {
                    Ok(T::zero())
                }
            })
            .collect::<Result<_>>()?
    };
    let mut best: Option<(T, usize, Option<u64>)> = None;
    let mut consider = |v: T, x: usize, n: Option<u64>| {
        if best.as_ref().map_or(true, |(b, _, _)| v > *b) {
            best = Some((v, x, n));
        }
    };
    for cycle in sys.positive_cycles() {
        let cycle_sum = cycle
            .iter()
            .fold(T::zero(), |s, &x| s + w.values[x].clone());
        let dual_sum = cycle.iter().fold(T::zero(), |s, &x| s + dual[x].clone());
        let mut atoms = cycle.clone();
        atoms.sort_unstable();
        for x in atoms {
            let windows = OrbitWindows::new(
                sys,
                &w.values,
                &dual,
                x,
                cycle_sum.clone(),
                dual_sum.clone(),
            );
            match n_max {
                Some(cap) => {
                    for n in 1..=cap {
                        consider(windows.product(n, p)?, x, Some(n));
                    }
                }
                None => {
                    let mut radii: BTreeSet<u64> = (1..=2 * windows.len).collect();
                    radii.extend(windows.peak_candidates(p));
                    for n in radii {
                        consider(windows.product(n, p)?, x, Some(n));
                    }
                    consider(windows.limit(p)?, x, None);
                }
            }
        }
    }
    let (constant, atom, radius) = best.expect("some cycle carries mass");
    Ok(ErgodicApReport {
        p,
        constant,
        atom,
        radius,
        conjugate: conjugate_exponent(p),
    })
}

/// The unrolled orbit weight `k -> w(U^{-k}x)` on `[-radius, radius]`, on
/// which the all-intervals `A_p` constant can be computed.
pub fn orbit_weight<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    w: &AtomFunction<T>,
    x: usize,
    radius: u64,
) -> Result<WeightSequence<T>> {
    sys.check_atom(x)?;
    sys.check_function("weight", w)?;
    let r = radius as i64;
    WeightSequence::new(WindowedSequence::from_fn(
        IntegerInterval::new(-r, r)?,
        |k| w.values[sys.shift(x, -k)].clone(),
    ))
}

/// The orbit sequences `a_x(k) = f(U^{-k}x)` and `w_x(k) = w(U^{-k}x)` for
/// `|k| <= L + J`, zero beyond.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferTrace<T: Scalar> {
    pub x: usize,
    pub l: u64,
    pub j: u64,
    pub a: WindowedSequence<T>,
    pub w: WindowedSequence<T>,
}

pub fn orbit_trace<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    w: &AtomFunction<T>,
    x: usize,
    l: u64,
    j: u64,
) -> Result<TransferTrace<T>> {
    sys.check_atom(x)?;
    sys.check_function("f", f)?;
    sys.check_function("weight", w)?;
    let reach = (l + j) as i64;
    let window = IntegerInterval::new(-reach, reach)?;
    Ok(TransferTrace {
        x,
        l,
        j,
        a: WindowedSequence::from_fn(window, |k| f.values[sys.shift(x, -k)].clone()),
        w: WindowedSequence::from_fn(window, |k| w.values[sys.shift(x, -k)].clone()),
    })
}

/// `M̃_J f(U^{-m}x) = M'a_x(m)` for every `|m| <= L`, compared with the
/// identity tolerance of the backend (exact for rationals).
///
/// `M̃_J` takes radii `1..=J` while the truncated centered operator takes
/// `r < J`, so the centered side is evaluated with truncation `J + 1`.
pub fn verify_transference_identity<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    x: usize,
    l: u64,
    j: u64,
) -> Result<InequalityReport> {
    let ones = AtomFunction::constant(sys.n(), T::one());
    let trace = orbit_trace(sys, f, &ones, x, l, j)?;
    verify_transference_with_trace(sys, f, &trace)
}

/// [`verify_transference_identity`] against a supplied orbit sequence.
pub fn verify_transference_with_trace<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    trace: &TransferTrace<T>,
) -> Result<InequalityReport> {
    if trace.j == 0 {
        return Err(Error::InvalidTruncation(0));
    }
    let ergodic = ergodic_maximal(sys, f, Some(trace.j))?;
    let l = trace.l as i64;
    let centered = centered_maximal(&trace.a, Some(trace.j + 1), IntegerInterval::new(-l, l)?)?;
    let mut mismatches = 0usize;
    let mut first = None;
    for m in -l..=l {
        let atom = sys.shift(trace.x, -m);
        let lhs = ergodic.values.get(atom);
        let rhs = centered.value(m).expect("inside eval window");
        if !lhs.identity_eq(rhs) {
            mismatches += 1;
            first.get_or_insert(m);
        }
    }
    let report =
        InequalityReport::observation(CheckId::Transference, mismatches as f64, (2 * l + 1) as f64);
    Ok(match first {
        Some(m) => report
            .fail(format!(
                "{mismatches} of {} orbit points disagree",
                2 * l + 1
            ))
            .with_witness(Witness::Orbit { x: trace.x, m }),
        None => report,
    })
}

/// For `p = 1`: `∫_{M̃f > λ} w dμ <= (36·A/λ) ∫ |f| w dμ` with `A` the ergodic
/// `A_1` constant. For `p > 1` the report observes `‖M̃f‖_{L^p_w} / ‖f‖_{L^p_w}`.
/// `truncation` selects `M̃_J` in place of `M̃`.
pub fn ergodic_weak_pp<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    f: &AtomFunction<T>,
    w: &AtomFunction<T>,
    p: f64,
    height: &T,
    truncation: Option<u64>,
) -> Result<InequalityReport> {
    check_exponent(p)?;
    if *height <= T::zero() {
        return Err(Error::NonPositiveHeight);
    }
    let a = ergodic_ap_constant(sys, w, p, None)?.constant;
    let maximal = ergodic_maximal(sys, f, truncation)?;
    if p > 1.0 {
        let out = weighted_lp_norm(sys, &maximal.values, w, p)?;
        let input = weighted_lp_norm(sys, f, w, p)?;
        return Ok(
            InequalityReport::observation(CheckId::ErgodicStrong, out, input)
                .with_note(format!("ergodic A_p = {a}")),
        );
    }
    let mut lhs = T::zero();
    let mut top: Option<usize> = None;
    for x in 0..sys.n() {
        if maximal.values.get(x) > height {
            lhs = lhs + w.values[x].clone() * sys.masses[x].clone();
            if top.map_or(true, |t| maximal.values.get(x) > maximal.values.get(t)) {
                top = Some(x);
            }
        }
    }
    let rhs = weighted_lp_norm_pow(sys, f, w, 1.0)? / height.clone();
    let constant = T::from_int(WEAK11_CONSTANT) * a.clone();
    let mut report = InequalityReport::bound(CheckId::ErgodicWeak, &lhs, &rhs, &constant)
        .with_note(format!("ergodic A_1 = {a}; rhs = ∫|f|·w dμ / λ"));
    if let Some(x) = top {
        report = report.with_witness(Witness::Atom { x });
    }
    Ok(report)
}

/// A base `E` whose images `U^i E`, `|i| <= K`, are pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErgodicRectangle {
    pub base: Vec<usize>,
    pub k: u64,
}

impl ErgodicRectangle {
    pub fn length(&self) -> u64 {
        2 * self.k + 1
    }

    /// The levels `U^i E` for `i = -K..=K`.
    pub fn levels<T: Scalar>(&self, sys: &FinitePermutationSystem<T>) -> Vec<Vec<usize>> {
        let k = self.k as i64;
        (-k..=k)
            .map(|i| self.base.iter().map(|&x| sys.shift(x, i)).collect())
            .collect()
    }

    /// `μ(∪ U^i E)`.
    pub fn measure<T: Scalar>(&self, sys: &FinitePermutationSystem<T>) -> T {
        let atoms: BTreeSet<usize> = self.levels(sys).into_iter().flatten().collect();
        atoms
            .into_iter()
            .fold(T::zero(), |s, x| s + sys.mass(x).clone())
    }

    /// Disjointness of the levels.
    pub fn is_valid<T: Scalar>(&self, sys: &FinitePermutationSystem<T>) -> bool {
        let mut seen = BTreeSet::new();
        self.levels(sys)
            .into_iter()
            .flatten()
            .all(|x| seen.insert(x))
    }
}

fn rectangle_cycle<T: Scalar>(sys: &FinitePermutationSystem<T>, k: u64) -> Result<&[usize]> {
    let cycle = sys.main_cycle()?;
    let length = 2 * k + 1;
    if k == 0 || length > cycle.len() as u64 {
        return Err(Error::RectangleTooLong {
            length,
            cycle: cycle.len(),
        });
    }
    Ok(cycle)
}

/// Greedy base inside `F`: atoms of `F` in cycle order, each kept when its
/// cyclic distance to every kept atom is at least `2K+1`.
pub fn find_rectangle_base<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    k: u64,
    set: &[usize],
) -> Result<ErgodicRectangle> {
    let cycle = rectangle_cycle(sys, k)?;
    for &x in set {
        sys.check_atom(x)?;
    }
    let len = cycle.len();
    let mut positions: Vec<usize> = set
        .iter()
        .filter(|&&x| *sys.mass(x) > T::zero())
        .map(|&x| sys.position[x])
        .collect();
    positions.sort_unstable();
    positions.dedup();
    let Some(&first) = positions.first() else {
        return Err(Error::NullSet);
    };
    let gap = (2 * k + 1) as usize;
    let mut kept = vec![first];
    for &pos in &positions[1..] {
        let last = *kept.last().expect("non-empty");
        if pos - last >= gap && first + len - pos >= gap {
            kept.push(pos);
        }
    }
    Ok(ErgodicRectangle {
        base: kept.into_iter().map(|pos| cycle[pos]).collect(),
        k,
    })
}

/// Rectangle bases of length `2K+1` covering every atom of positive mass.
pub fn cover_by_rectangle_bases<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    k: u64,
) -> Result<Vec<ErgodicRectangle>> {
    let mut remaining: Vec<usize> = rectangle_cycle(sys, k)?.to_vec();
    let mut family = Vec::new();
    while !remaining.is_empty() {
        let rect = find_rectangle_base(sys, k, &remaining)?;
        remaining.retain(|x| !rect.base.contains(x));
        family.push(rect);
    }
    Ok(family)
}

/// `f(U^{-k}x) = a(k)` for `x ∈ F`, `|k| <= J`, and `f = 0` elsewhere, built on a
/// base of length `4J+1` so that the prescribed orbit segments do not collide.
pub fn rectangle_test_function<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    rect: &ErgodicRectangle,
    j: u64,
    a: &WindowedSequence<T>,
    set: &[usize],
) -> Result<AtomFunction<T>> {
    let length = 4 * j + 1;
    if j == 0 || rect.k != 2 * j || !rect.is_valid(sys) {
        return Err(Error::NotBase { length });
    }
    if set.iter().any(|x| !rect.base.contains(x)) {
        return Err(Error::NotBase { length });
    }
    let mut values = vec![T::zero(); sys.n()];
    let j = j as i64;
    for &x in set {
        for k in -j..=j {
            values[sys.shift(x, -k)] = a.get(k);
        }
    }
    Ok(AtomFunction { values })
}

/// Outcome of [`converse_probe`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub p: f64,
    pub j: u64,
    /// Ergodic `A_p` constant of the weight.
    pub a_p: f64,
    /// Largest `‖M̃f‖_{L^p_w} / ‖f‖_{L^p_w}` over the trials.
    pub b: f64,
    pub best_trial: usize,
    /// Ratio of the first trial: `a = δ_0` placed on the lightest atom.
    pub delta_ratio: f64,
    pub trials: usize,
}

/// Estimates the operator norm of `M̃` on `L^p_w` from rectangle-built test
/// functions and pairs it with the ergodic `A_p` constant.
///
/// Trial 0 places `δ_0` at the atom of least weight; later trials use random
/// non-negative integer `a` on `[-J, J]` and random sets inside random bases.
pub fn converse_probe<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    w: &AtomFunction<T>,
    p: f64,
    j: u64,
    trials: usize,
    seed: u64,
) -> Result<ConverseReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let cycle = rectangle_cycle(sys, 2 * j)?.to_vec();
    let a_p = ergodic_ap_constant(sys, w, p, None)?.constant.to_f64();
    let window = IntegerInterval::new(-(j as i64), j as i64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = 0.0;
    let mut best_trial = 0;
    let mut delta_ratio = 0.0;
    for trial in 0..trials.max(1) {
        let (a, candidates) = if trial == 0 {
            let lightest = *cycle
                .iter()
                .min_by(|x, y| {
                    w.get(**x)
                        .partial_cmp(w.get(**y))
                        .expect("weights are ordered")
                        .then(x.cmp(y))
                })
                .expect("cycle is non-empty");
            (WindowedSequence::delta(0), vec![lightest])
        } else {
            let a = WindowedSequence::from_fn(window, |_| T::from_int(rng.gen_range(0..10)));
            let mut picks: Vec<usize> = cycle
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if picks.is_empty() {
                picks.push(*cycle.choose(&mut rng).expect("cycle is non-empty"));
            }
            (a, picks)
        };
        if a.is_zero() {
            continue;
        }
        let rect = find_rectangle_base(sys, 2 * j, &candidates)?;
        let f = rectangle_test_function(sys, &rect, j, &a, &rect.base)?;
        let input = weighted_lp_norm(sys, &f, w, p)?;
        let output = weighted_lp_norm(sys, &ergodic_maximal(sys, &f, None)?.values, w, p)?;
        let ratio = output / input;
        if trial == 0 {
            delta_ratio = ratio;
        }
        if ratio > b {
            b = ratio;
            best_trial = trial;
        }
    }
    Ok(ConverseReport {
        p,
        j,
        a_p,
        b,
        best_trial,
        delta_ratio,
        trials: trials.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Exact {
        Exact::new(n.into(), d.into())
    }

    fn cycle(n: usize) -> FinitePermutationSystem<Exact> {
        FinitePermutationSystem::cycle(n).unwrap()
    }

    #[test]
    fn orientation_is_frozen() {
        let sys = cycle(5);
        assert_eq!(sys.shift(2, -1), 1);
        assert_eq!(sys.shift(0, -1), 4);
        assert_eq!(sys.shift(3, 7), 0);
        assert_eq!(sys.inverse()[0], 4);
    }

    #[test]
    fn validation() {
        let d = validate_system(vec![q(1, 5); 5], vec![1, 2, 3, 4, 0]).unwrap();
        assert_eq!(d.cycles, vec![vec![0, 1, 2, 3, 4]]);
        assert!(d.ergodic);
        let id = validate_system(vec![q(1, 2), q(1, 2)], vec![0, 1]).unwrap();
        assert!(!id.ergodic);
        assert_eq!(id.cycle_masses, vec![q(1, 2), q(1, 2)]);
        assert_eq!(
            validate_system(vec![q(3, 4), q(1, 4)], vec![1, 0]).unwrap_err(),
            Error::MassNotPreserved { atom: 0 }
        );
        assert_eq!(
            validate_system(vec![q(1, 2), q(1, 2)], vec![1, 1]).unwrap_err(),
            Error::NotPermutation { atom: 1 }
        );
        assert!(matches!(
            validate_system(vec![q(1, 3), q(1, 3)], vec![1, 0]),
            Err(Error::MassSum(_))
        ));
    }

    #[test]
    fn ergodicity_with_null_atoms() {
        let masses = vec![
            q(1, 5),
            q(1, 5),
            q(1, 5),
            q(1, 5),
            q(1, 5),
            q(0, 1),
            q(0, 1),
        ];
        let sys = FinitePermutationSystem::new(masses, vec![1, 2, 3, 4, 0, 5, 6]).unwrap();
        assert!(is_ergodic(&sys));
        let two = FinitePermutationSystem::new(vec![q(1, 4); 4], vec![1, 0, 3, 2]).unwrap();
        assert!(!is_ergodic(&two));
    }

    #[test]
    fn maximal_examples() {
        let sys = cycle(5);
        let f = AtomFunction::indicator(5, 0);
        let m1 = ergodic_maximal(&sys, &f, Some(1)).unwrap();
        assert_eq!(
            m1.values.values(),
            &[q(1, 3), q(1, 3), q(0, 1), q(0, 1), q(1, 3)]
        );
        let m = ergodic_maximal(&sys, &f, None).unwrap();
        assert!(m.values.values().iter().all(|v| *v >= q(1, 5)));
        // Radius 3 around atom 2 meets atom 0 twice.
        assert_eq!(m.values.get(2), &q(2, 7));
        assert_eq!(m.radii[2], 3);
        let c = ergodic_maximal(&sys, &AtomFunction::constant(5, q(2, 1)), None).unwrap();
        assert!(c.values.values().iter().all(|v| *v == q(2, 1)));
    }

    #[test]
    fn norms() {
        let sys = cycle(4);
        let ones = AtomFunction::constant(4, q(1, 1));
        assert_eq!(
            weighted_lp_norm_pow(&sys, &ones, &ones, 2.0).unwrap(),
            q(1, 1)
        );
        let f = AtomFunction::indicator(4, 1);
        assert_eq!(weighted_lp_norm_pow(&sys, &f, &ones, 2.0).unwrap(), q(1, 4));
    }

    #[test]
    fn ap_examples() {
        let sys = cycle(8);
        let ones = AtomFunction::constant(8, q(3, 1));
        assert_eq!(
            ergodic_ap_constant(&sys, &ones, 2.0, None)
                .unwrap()
                .constant,
            q(1, 1)
        );
        let alt = AtomFunction::from_fn(8, |x| q(1 + (x % 2) as i64, 1));
        let r = ergodic_ap_constant(&sys, &alt, 2.0, None).unwrap();
        // Every odd window is unbalanced by one atom, which keeps each product
        // strictly below the full-cycle value (3/2)(3/4).
        assert_eq!(r.constant, q(9, 8));
        assert_eq!(r.radius, None);
        let capped = ergodic_ap_constant(&sys, &alt, 2.0, Some(8)).unwrap();
        assert!(capped.constant < q(9, 8));
        assert_eq!(capped.radius, Some(8));
    }

    #[test]
    fn ap_supremum_can_lie_beyond_the_cycle() {
        let sys = FinitePermutationSystem::<f64>::cycle(2).unwrap();
        let w = AtomFunction::new(vec![5.0, 2.0]).unwrap();
        let within = ergodic_ap_constant(&sys, &w, 2.0, Some(2))
            .unwrap()
            .constant;
        let full = ergodic_ap_constant(&sys, &w, 2.0, None).unwrap();
        let scan = ergodic_ap_constant(&sys, &w, 2.0, Some(200))
            .unwrap()
            .constant;
        assert!(full.constant > within + 1e-3);
        assert_eq!(full.radius, None);
        assert!(scan < full.constant && full.constant - scan < 1e-5);
    }

    #[test]
    fn trace_example() {
        let sys = cycle(5);
        let f = AtomFunction::indicator(5, 0);
        let ones = AtomFunction::constant(5, q(1, 1));
        let t = orbit_trace(&sys, &f, &ones, 2, 1, 1).unwrap();
        assert_eq!(t.a.window(), IntegerInterval::new(-2, 2).unwrap());
        assert_eq!(t.a.support(), Some(IntegerInterval::singleton(2)));
        assert!(t.w.values().iter().all(|v| *v == q(1, 1)));
    }

    #[test]
    fn transference_and_corruption() {
        let sys = cycle(7);
        let f = AtomFunction::indicator(7, 0);
        for x in 0..7 {
            assert!(
                verify_transference_identity(&sys, &f, x, 2, 2)
                    .unwrap()
                    .pass
            );
        }
        let ones = AtomFunction::constant(7, q(1, 1));
        let mut trace = orbit_trace(&sys, &f, &ones, 3, 2, 2).unwrap();
        trace.a.set(1, q(5, 1));
        let r = verify_transference_with_trace(&sys, &f, &trace).unwrap();
        assert!(!r.pass);
        assert!(matches!(r.witness, Some(Witness::Orbit { x: 3, .. })));
    }

    #[test]
    fn ergodic_weak_example() {
        let sys = cycle(5);
        let f = AtomFunction::indicator(5, 0);
        let ones = AtomFunction::constant(5, q(1, 1));
        let r = ergodic_weak_pp(&sys, &f, &ones, 1.0, &q(1, 4), Some(1)).unwrap();
        assert!(r.pass);
        assert_eq!(r.lhs, 0.6);
        assert_eq!(r.constant, Some(36.0));
        assert_eq!(r.rhs, 0.8);
        // Untruncated, the far atoms reach 2/7 > 1/4 as well.
        let r = ergodic_weak_pp(&sys, &f, &ones, 1.0, &q(1, 4), None).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.pass);
        let zero = AtomFunction::constant(5, q(0, 1));
        assert!(
            ergodic_weak_pp(&sys, &zero, &ones, 1.0, &q(1, 1), None)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn rectangles() {
        let sys = cycle(7);
        let all: Vec<usize> = (0..7).collect();
        let rect = find_rectangle_base(&sys, 1, &all).unwrap();
        assert_eq!(rect.base, vec![0, 3]);
        assert!(rect.is_valid(&sys));
        assert_eq!(rect.measure(&sys), q(6, 7));
        let five = cycle(5);
        assert_eq!(find_rectangle_base(&five, 2, &[3]).unwrap().base, vec![3]);
        assert_eq!(
            find_rectangle_base(&five, 3, &[3]).unwrap_err(),
            Error::RectangleTooLong {
                length: 7,
                cycle: 5
            }
        );
        let family = cover_by_rectangle_bases(&five, 1).unwrap();
        let covered: BTreeSet<usize> = family.iter().flat_map(|r| r.base.clone()).collect();
        assert_eq!(covered.len(), 5);
        assert!(family.iter().all(|r| r.is_valid(&five)));
        assert_eq!(cover_by_rectangle_bases(&five, 2).unwrap().len(), 5);
    }

    #[test]
    fn test_function_example() {
        let sys = cycle(9);
        let rect = find_rectangle_base(&sys, 2, &[4]).unwrap();
        let a = WindowedSequence::new(-1, vec![q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        let f = rectangle_test_function(&sys, &rect, 1, &a, &[4]).unwrap();
        assert_eq!(f.get(3), &q(3, 1));
        assert_eq!(f.get(4), &q(2, 1));
        assert_eq!(f.get(5), &q(1, 1));
        assert_eq!(f.values().iter().filter(|v| !v.is_zero()).count(), 3);
        let short = find_rectangle_base(&sys, 1, &[4]).unwrap();
        assert!(rectangle_test_function(&sys, &short, 1, &a, &[4]).is_err());
    }

    #[test]
    fn converse_with_unit_weight() {
        let sys = FinitePermutationSystem::<f64>::cycle(32).unwrap();
        let ones = AtomFunction::constant(32, 1.0);
        let r = converse_probe(&sys, &ones, 2.0, 2, 8, 1).unwrap();
        assert!((r.a_p - 1.0).abs() < 1e-12);
        assert!(r.b >= 1.0 && r.b >= r.delta_ratio);
    }
}
