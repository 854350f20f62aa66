//! Finitely supported sequences on ℤ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{check_coord, IntegerInterval};
use crate::scalar::{Exact, Scalar};

/// A sequence stored on `[offset, offset + len - 1]` and zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct WindowedSequence<T> {
    offset: i64,
    values: Vec<T>,
}

impl<T: Scalar> WindowedSequence<T> {
    pub fn new(offset: i64, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        check_coord(offset as i128)?;
        check_coord(offset as i128 + values.len() as i128 - 1)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite {
                index: offset + i as i64,
            });
        }
        Ok(Self { offset, values })
    }

    pub fn zeros(window: IntegerInterval) -> Self {
        Self {
            offset: window.lo(),
            values: vec![T::zero(); window.len() as usize],
        }
    }

    pub fn from_fn(window: IntegerInterval, mut f: impl FnMut(i64) -> T) -> Self {
        Self {
            offset: window.lo(),
            values: window.iter().map(&mut f).collect(),
        }
    }

    /// The unit mass at `m`.
    pub fn delta(m: i64) -> Self {
        Self {
            offset: m,
            values: vec![T::one()],
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn window(&self) -> IntegerInterval {
        IntegerInterval::new(self.offset, self.offset + self.values.len() as i64 - 1)
            .expect("non-empty by construction")
    }

    /// `a(m)`, zero outside the stored window.
    pub fn get(&self, m: i64) -> T {
        self.get_ref(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn get_ref(&self, m: i64) -> Option<&T> {
        let i = m.checked_sub(self.offset)?;
        usize::try_from(i).ok().and_then(|i| self.values.get(i))
    }

    pub fn set(&mut self, m: i64, v: T) {
        let i = (m - self.offset) as usize;
        self.values[i] = v;
    }

    /// Smallest interval holding every non-zero entry.
    pub fn support(&self) -> Option<IntegerInterval> {
        let first = self.values.iter().position(|v| !v.is_zero())?;
        let last = self.values.iter().rposition(|v| !v.is_zero())?;
        Some(
            IntegerInterval::new(self.offset + first as i64, self.offset + last as i64)
                .expect("first <= last"),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| *v >= T::zero())
    }

    pub fn l1_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc + v.magnitude())
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| T::max_of(acc, v.magnitude()))
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.magnitude())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> WindowedSequence<U> {
        WindowedSequence {
            offset: self.offset,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Copy of the sequence stored on `window`, dropping or zero-padding as needed.
    pub fn reshaped(&self, window: IntegerInterval) -> Self {
        Self::from_fn(window, |m| self.get(m))
    }

    /// Stored values on `window ∩ stored window`, in order.
    pub fn slice(&self, window: &IntegerInterval) -> &[T] {
        match window.intersect(&self.window()) {
            Some(w) => {
                let a = (w.lo() - self.offset) as usize;
                let b = (w.hi() - self.offset) as usize;
                &self.values[a..=b]
            }
            None => &[],
        }
    }

    pub fn prefix_sums(&self) -> PrefixSums<T> {
        PrefixSums::new(self)
    }

    /// Prefix sums of `|a|`.
    pub fn abs_prefix_sums(&self) -> PrefixSums<T> {
        PrefixSums::from_iter(self.offset, self.values.iter().map(|v| v.magnitude()))
    }
}

impl WindowedSequence<f64> {
    /// Exact rational image (each float's binary value).
    pub fn to_exact(&self) -> WindowedSequence<Exact> {
        self.map(|v| Exact::from_f64(*v).expect("finite by construction"))
    }
}

impl WindowedSequence<Exact> {
    pub fn to_float(&self) -> WindowedSequence<f64> {
        self.map(|v| v.to_f64())
    }
}

/// Cumulative sums over the stored window; sums over any interval are
/// clipped to the window (zero extension).
#[derive(Clone, Debug)]
pub struct PrefixSums<T: Scalar> {
    offset: i64,
    // cumulative[i] = sum of the first i stored values.
    cumulative: Vec<T::Acc>,
}

impl<T: Scalar> PrefixSums<T> {
    pub fn new(a: &WindowedSequence<T>) -> Self {
        Self::from_iter(a.offset, a.values.iter().cloned())
    }

    fn from_iter(offset: i64, values: impl Iterator<Item = T>) -> Self {
        let mut cumulative = vec![T::acc_zero()];
        for v in values {
            let next = T::acc_add(cumulative.last().expect("non-empty"), &v);
            cumulative.push(next);
        }
        Self { offset, cumulative }
    }

    fn index_after(&self, k: i64) -> usize {
        // Number of stored entries with index <= k.
        let len = self.cumulative.len() as i64 - 1;
        (k - self.offset + 1).clamp(0, len) as usize
    }

    /// `T(k) = Σ_{n <= k} a(n)`.
    pub fn through(&self, k: i64) -> T {
        let i = self.index_after(k);
        T::acc_span(&self.cumulative[i], &self.cumulative[0])
    }

    /// `Σ_{n ∈ I} a(n)`.
    pub fn sum(&self, interval: &IntegerInterval) -> T {
        let upper = self.index_after(interval.hi());
        let lower = self.index_after(interval.lo() - 1);
        T::acc_span(&self.cumulative[upper], &self.cumulative[lower])
    }

    pub fn average(&self, interval: &IntegerInterval) -> T {
        self.sum(interval) / T::from_int(interval.len() as i64)
    }
}

/// `Σ_{m ∈ I} a(m)` by direct summation.
pub fn interval_sum<T: Scalar>(a: &WindowedSequence<T>, interval: &IntegerInterval) -> T {
    a.slice(interval)
        .iter()
        .fold(T::zero(), |acc, v| acc + v.clone())
}

/// `(1/|I|) Σ_{m ∈ I} a(m)`; `I` may extend past the stored window.
pub fn interval_average<T: Scalar>(a: &WindowedSequence<T>, interval: &IntegerInterval) -> T {
    interval_sum(a, interval) / T::from_int(interval.len() as i64)
}
