//! JSON input formats and the λ-grid mini-language.
//!
//! Numbers may be JSON numbers or strings holding a decimal or a fraction
//! `p/q`. In exact mode a JSON number is read from its shortest decimal form,
//! so `0.1` becomes one tenth.

use serde::Deserialize;
use serde_json::Value;

use crate::ergodic::{AtomFunction, FinitePermutationSystem};
use crate::error::{Error, Result};
use crate::interval::DyadicInterval;
use crate::scalar::Scalar;
use crate::sequence::WindowedSequence;
use crate::weights::WeightSequence;

/// Longest accepted array; keeps hostile inputs from exhausting memory.
pub const MAX_ENTRIES: usize = 1 << 22;

/// Most points an `auto` or `geom` grid may produce.
pub const MAX_GRID: usize = 256;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceFile {
    offset: i64,
    values: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    masses: Vec<Value>,
    perm: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFile {
    values: Vec<Value>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn check_len(what: &str, n: usize) -> Result<()> {
    if n > MAX_ENTRIES {
        Err(Error::Parse(format!(
            "{what} has {n} entries, more than {MAX_ENTRIES}"
        )))
    } else {
        Ok(())
    }
}

/// One JSON number or numeric string.
pub fn scalar_from_json<T: Scalar>(v: &Value) -> Result<T> {
    match v {
        Value::Number(n) => T::parse_text(&n.to_string()),
        Value::String(s) => T::parse_text(s),
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

fn scalars<T: Scalar>(what: &str, values: &[Value]) -> Result<Vec<T>> {
    check_len(what, values.len())?;
    values.iter().map(scalar_from_json).collect()
}

/// `{"offset": int, "values": [...]}`.
pub fn parse_sequence<T: Scalar>(text: &str) -> Result<WindowedSequence<T>> {
    let file: SequenceFile = serde_json::from_str(text).map_err(json_error)?;
    WindowedSequence::new(file.offset, scalars("values", &file.values)?)
}

/// A sequence file whose values are all strictly positive.
pub fn parse_weight<T: Scalar>(text: &str) -> Result<WeightSequence<T>> {
    WeightSequence::new(parse_sequence(text)?)
}

/// `{"masses": [...], "perm": [int, ...]}`.
pub fn parse_system<T: Scalar>(text: &str) -> Result<FinitePermutationSystem<T>> {
    let file: SystemFile = serde_json::from_str(text).map_err(json_error)?;
    check_len("perm", file.perm.len())?;
    FinitePermutationSystem::new(scalars("masses", &file.masses)?, file.perm)
}

/// `{"values": [...]}`, one value per atom.
pub fn parse_atom_function<T: Scalar>(text: &str) -> Result<AtomFunction<T>> {
    let file: AtomFile = serde_json::from_str(text).map_err(json_error)?;
    AtomFunction::new(scalars("values", &file.values)?)
}

/// Serializes a sequence in the input format, fractions as strings.
pub fn sequence_to_json<T: Scalar>(a: &WindowedSequence<T>) -> Value {
    serde_json::json!({
        "offset": a.offset(),
        "values": a.values().iter().map(scalar_to_json).collect::<Vec<_>>(),
    })
}

pub fn system_to_json<T: Scalar>(sys: &FinitePermutationSystem<T>) -> Value {
    serde_json::json!({
        "masses": sys.masses().iter().map(scalar_to_json).collect::<Vec<_>>(),
        "perm": sys.perm(),
    })
}

pub fn atom_function_to_json<T: Scalar>(f: &AtomFunction<T>) -> Value {
    serde_json::json!({ "values": f.values().iter().map(scalar_to_json).collect::<Vec<_>>() })
}

fn scalar_to_json<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        Value::String(v.to_string())
    } else {
        serde_json::Number::from_f64(v.to_f64()).map_or(Value::Null, Value::Number)
    }
}

/// Heights at which superlevel sets are examined.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaGrid {
    /// `0.5,1/3,2`
    List(Vec<String>),
    /// `geom:λ0:count`, the heights `λ0·2^{-i}` for `i < count`.
    Geometric { start: String, count: usize },
    /// `auto` or `auto:count`: halving from four times the largest value
    /// down past a quarter of the smallest positive dyadic average; with a
    /// count, that many rungs of the ladder spread evenly over it, both ends
    /// included.
    Auto { count: Option<usize> },
}

impl LambdaGrid {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::Parse(format!("invalid λ-grid {spec:?}"));
        let count = |t: &str| -> Result<usize> {
            let n: usize = t.trim().parse().map_err(|_| bad())?;
            if n == 0 || n > MAX_GRID {
                return Err(Error::Parse(format!(
                    "grid size {n} outside 1..={MAX_GRID}"
                )));
            }
            Ok(n)
        };
        if let Some(rest) = spec.strip_prefix("geom:") {
            let (start, n) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(LambdaGrid::Geometric {
                start: start.trim().to_string(),
                count: count(n)?,
            });
        }
        if spec == "auto" {
            return Ok(LambdaGrid::Auto { count: None });
        }
        if let Some(n) = spec.strip_prefix("auto:") {
            return Ok(LambdaGrid::Auto {
                count: Some(count(n)?),
            });
        }
        let items: Vec<String> = spec.split(',').map(|s| s.trim().to_string()).collect();
        if items.iter().any(String::is_empty) || items.len() > MAX_GRID {
            return Err(bad());
        }
        Ok(LambdaGrid::List(items))
    }

    /// Concrete positive heights for the sequence `a`, largest first for
    /// generated grids and in the given order for lists.
    pub fn resolve<T: Scalar>(&self, a: &WindowedSequence<T>) -> Result<Vec<T>> {
        let heights = match self {
            LambdaGrid::List(items) => items
                .iter()
                .map(|s| T::parse_text(s))
                .collect::<Result<Vec<T>>>()?,
            LambdaGrid::Geometric { start, count } => halvings(T::parse_text(start)?, *count, None),
            LambdaGrid::Auto { count } => {
                let top = a.max_abs();
                let Some(floor) = min_dyadic_average(a) else {
                    return Ok(Vec::new());
                };
                let quarter = T::from_int(4);
                let ladder = halvings(top * quarter.clone(), MAX_GRID, Some(floor / quarter));
                match count {
                    Some(k) if *k < ladder.len() => spread(ladder, *k),
                    _ => ladder,
                }
            }
        };
        if heights.iter().any(|h| *h <= T::zero()) {
            return Err(Error::NonPositiveHeight);
        }
        Ok(heights)
    }
}

fn halvings<T: Scalar>(start: T, count: usize, stop_below: Option<T>) -> Vec<T> {
    let two = T::from_int(2);
    let mut out = Vec::new();
    let mut h = start;
    for _ in 0..count {
        out.push(h.clone());
        if stop_below.as_ref().is_some_and(|s| h < *s) {
            break;
        }
        h = h / two.clone();
    }
    out
}

fn spread<T: Clone>(ladder: Vec<T>, k: usize) -> Vec<T> {
    if k == 1 {
        return vec![ladder[0].clone()];
    }
    let last = ladder.len() - 1;
    (0..k).map(|i| ladder[i * last / (k - 1)].clone()).collect()
}

/// Smallest positive average of `|a|` over dyadic intervals meeting the
/// support, for levels up to the first whose intervals are twice the support
/// width.
pub fn min_dyadic_average<T: Scalar>(a: &WindowedSequence<T>) -> Option<T> {
    let support = a.support()?;
    let sums = a.abs_prefix_sums();
    let top = (64 - (2 * support.len()).leading_zeros()).max(1);
    let mut best: Option<T> = None;
    for level in 1..=top {
        let first = DyadicInterval::containing(support.lo(), level).ok()?;
        let last = DyadicInterval::containing(support.hi(), level).ok()?;
        for index in first.index()..=last.index() {
            let interval = DyadicInterval::new(level, index).ok()?.interval();
            let avg = sums.average(&interval);
            if avg > T::zero() && best.as_ref().map_or(true, |b| avg < *b) {
                best = Some(avg);
            }
        }
    }
    best
}
