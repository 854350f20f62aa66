//! Seeded corpus generators.
//!
//! Random values are dyadic rationals (multiples of 1/16 or 1/8), so the
//! float and exact backends hold identical inputs and agree on every verdict.

use anyhow::{bail, ensure, Result};
use ergomax_core::{
    FinitePermutationSystem, IntegerInterval, Scalar, WeightSequence, WindowedSequence,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sequence family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceKind {
    Delta {
        position: i64,
    },
    Constant {
        value: f64,
        lo: i64,
        hi: i64,
    },
    /// `height` on `[lo, hi]`, zero on `pad` points either side.
    Step {
        lo: i64,
        hi: i64,
        height: f64,
        pad: u64,
    },
    /// Each point of `[offset, offset+len-1]` is non-zero with probability `density`.
    RandomSparse {
        offset: i64,
        len: u64,
        density: f64,
        signed: bool,
    },
    RandomDense {
        offset: i64,
        len: u64,
        signed: bool,
    },
    /// Mass placed on both sides of the boundaries between consecutive
    /// level-`level` dyadic intervals, so that small changes flip which
    /// intervals exceed a height.
    AdversarialDyadic {
        level: u32,
        blocks: u32,
    },
}

/// Names of the sequence families, for corpus specs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceFamily {
    Delta,
    Constant,
    Step,
    RandomSparse,
    RandomDense,
    AdversarialDyadic,
}

impl SequenceFamily {
    pub const ALL: [SequenceFamily; 6] = [
        SequenceFamily::Delta,
        SequenceFamily::Constant,
        SequenceFamily::Step,
        SequenceFamily::RandomSparse,
        SequenceFamily::RandomDense,
        SequenceFamily::AdversarialDyadic,
    ];
}

/// Weight family with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightKind {
    Constant {
        value: f64,
    },
    /// `low` at even indices, `high` at odd ones.
    Alternating {
        low: f64,
        high: f64,
    },
    /// `(1 + |k|)^alpha`.
    Power {
        alpha: f64,
    },
    /// Values `1 + j/16 <= rho`, so `max/min <= rho`.
    RandomBoundedRatio {
        rho: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    Constant,
    Alternating,
    Power,
    RandomBoundedRatio,
}

impl WeightFamily {
    pub const ALL: [WeightFamily; 4] = [
        WeightFamily::Constant,
        WeightFamily::Alternating,
        WeightFamily::Power,
        WeightFamily::RandomBoundedRatio,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemKind {
    /// Equal masses on `x -> x+1 (mod n)`.
    Cycle,
    /// Two cycles of lengths `⌊n/2⌋` and `⌈n/2⌉` with equal masses.
    TwoCycles,
    /// The `n`-cycle followed by `null` fixed points of mass zero.
    CycleWithNullAtoms { null: usize },
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lift<T: Scalar>(v: f64) -> Result<T> {
    match T::from_f64(v) {
        Some(x) => Ok(x),
        None => bail!("value {v} is not finite"),
    }
}

/// A random multiple of 1/8 in `(0, 8)`, negated half the time if `signed`.
fn dyadic_value(rng: &mut impl Rng, signed: bool) -> f64 {
    let v = rng.gen_range(1..64) as f64 / 8.0;
    if signed && rng.gen_bool(0.5) {
        -v
    } else {
        v
    }
}

pub fn generate_sequence<T: Scalar>(kind: &SequenceKind, seed: u64) -> Result<WindowedSequence<T>> {
    let mut rng = rng(seed);
    let values: (i64, Vec<f64>) = match *kind {
        SequenceKind::Delta { position } => (position, vec![1.0]),
        SequenceKind::Constant { value, lo, hi } => {
            let window = IntegerInterval::new(lo, hi)?;
            (lo, vec![value; window.len() as usize])
        }
        SequenceKind::Step {
            lo,
            hi,
            height,
            pad,
        } => {
            let inner = IntegerInterval::new(lo, hi)?;
            let outer = inner.pad(pad);
            let values = outer
                .iter()
                .map(|m| if inner.contains(m) { height } else { 0.0 })
                .collect();
            (outer.lo(), values)
        }
        SequenceKind::RandomSparse {
            offset,
            len,
            density,
            signed,
        } => {
            ensure!(len >= 1, "length must be positive");
            ensure!((0.0..=1.0).contains(&density), "density must lie in [0, 1]");
            let values = (0..len)
                .map(|_| {
                    if rng.gen_bool(density) {
                        dyadic_value(&mut rng, signed)
                    } else {
                        0.0
                    }
                })
                .collect();
            (offset, values)
        }
        SequenceKind::RandomDense {
            offset,
            len,
            signed,
        } => {
            ensure!(len >= 1, "length must be positive");
            (
                offset,
                (0..len).map(|_| dyadic_value(&mut rng, signed)).collect(),
            )
        }
        SequenceKind::AdversarialDyadic { level, blocks } => {
            ensure!((1..=20).contains(&level), "level must lie in 1..=20");
            ensure!(blocks >= 1, "need at least one block");
            let size = 1i64 << level;
            let start = -(blocks as i64 / 2) * size;
            let len = blocks as i64 * size;
            let mut values = vec![0.0; len as usize];
            for b in 0..blocks as i64 {
                // boundary between block b and b+1 sits after index (b+1)·size
                let last = (b + 1) * size - 1;
                let h = rng.gen_range(1..16) as f64 / 8.0;
                values[last as usize] = h;
                if last + 1 < len {
                    // the neighbour just across the boundary gets slightly more
                    values[(last + 1) as usize] = h + 0.125;
                }
            }
            (start + 1, values)
        }
    };
    let (offset, raw) = values;
    let lifted = raw.into_iter().map(lift).collect::<Result<Vec<T>>>()?;
    Ok(WindowedSequence::new(offset, lifted)?)
}

/// A weight on `window` with the bound on its `A_p` constants that its
/// construction guarantees, if any.
#[derive(Clone, Debug)]
pub struct GeneratedWeight<T: Scalar> {
    pub weight: WeightSequence<T>,
    /// Upper bound on the windowed `A_p` constant for every `p >= 1`.
    pub ap_bound: Option<f64>,
}

pub fn generate_weight<T: Scalar>(
    kind: &WeightKind,
    window: IntegerInterval,
    seed: u64,
) -> Result<GeneratedWeight<T>> {
    let mut rng = rng(seed);
    let (raw, ap_bound): (Vec<f64>, Option<f64>) = match *kind {
        WeightKind::Constant { value } => {
            ensure!(value > 0.0, "weights must be positive");
            (window.iter().map(|_| value).collect(), Some(1.0))
        }
        WeightKind::Alternating { low, high } => {
            ensure!(low > 0.0 && high > 0.0, "weights must be positive");
            let values = window
                .iter()
                .map(|k| if k.rem_euclid(2) == 0 { low } else { high })
                .collect();
            (values, Some(high.max(low) / high.min(low)))
        }
        WeightKind::Power { alpha } => {
            ensure!(alpha.is_finite(), "alpha must be finite");
            let values = window
                .iter()
                .map(|k| (1.0 + k.unsigned_abs() as f64).powf(alpha))
                .collect();
            (values, None)
        }
        WeightKind::RandomBoundedRatio { rho } => {
            ensure!(rho >= 1.0 && rho.is_finite(), "rho must be at least 1");
            let steps = ((rho - 1.0) * 16.0).floor() as u32;
            let values = window
                .iter()
                .map(|_| 1.0 + rng.gen_range(0..=steps) as f64 / 16.0)
                .collect();
            (values, Some(rho))
        }
    };
    let lifted = raw.into_iter().map(lift).collect::<Result<Vec<T>>>()?;
    Ok(GeneratedWeight {
        weight: WeightSequence::from_values(window.lo(), lifted)?,
        ap_bound,
    })
}

/// A weight of period `period` on `window`: one random-bounded-ratio tile
/// repeated, so windows of different sizes see the same local structure.
pub fn tiled_weight<T: Scalar>(
    rho: f64,
    period: u64,
    window: IntegerInterval,
    seed: u64,
) -> Result<GeneratedWeight<T>> {
    ensure!(period >= 1, "period must be positive");
    let tile_window = IntegerInterval::new(0, period as i64 - 1)?;
    let tile = generate_weight::<T>(&WeightKind::RandomBoundedRatio { rho }, tile_window, seed)?;
    let values = window
        .iter()
        .map(|k| tile.weight.values()[k.rem_euclid(period as i64) as usize].clone())
        .collect();
    Ok(GeneratedWeight {
        weight: WeightSequence::from_values(window.lo(), values)?,
        ap_bound: tile.ap_bound,
    })
}

/// Equal masses, so exact and float systems coincide up to the rounding of `1/n`.
pub fn generate_system<T: Scalar>(
    kind: SystemKind,
    n: usize,
) -> Result<FinitePermutationSystem<T>> {
    ensure!(n >= 1, "a system needs at least one atom");
    let (masses, perm) = match kind {
        SystemKind::Cycle => (
            vec![T::one() / T::from_usize(n); n],
            (0..n).map(|x| (x + 1) % n).collect(),
        ),
        SystemKind::TwoCycles => {
            ensure!(n >= 2, "two cycles need at least two atoms");
            let h = n / 2;
            let perm = (0..n)
                .map(|x| {
                    if x < h {
                        (x + 1) % h
                    } else {
                        h + (x - h + 1) % (n - h)
                    }
                })
                .collect();
            (vec![T::one() / T::from_usize(n); n], perm)
        }
        SystemKind::CycleWithNullAtoms { null } => {
            let mut masses = vec![T::one() / T::from_usize(n); n];
            masses.extend(std::iter::repeat(T::zero()).take(null));
            let mut perm: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
            perm.extend(n..n + null);
            (masses, perm)
        }
    };
    Ok(FinitePermutationSystem::new(masses, perm)?)
}

/// The same system with atoms renamed by a seeded permutation `σ`: atom `x`
/// becomes `σ(x)`.
pub fn relabel<T: Scalar>(
    sys: &FinitePermutationSystem<T>,
    seed: u64,
) -> Result<FinitePermutationSystem<T>> {
    let n = sys.n();
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.shuffle(&mut rng(seed));
    let mut masses = vec![T::zero(); n];
    let mut perm = vec![0; n];
    for x in 0..n {
        masses[sigma[x]] = sys.mass(x).clone();
        perm[sigma[x]] = sigma[sys.perm()[x]];
    }
    Ok(FinitePermutationSystem::new(masses, perm)?)
}

/// `(1 + d(x))^alpha` with `d(x) = min(x, n - x)` the distance to atom 0
/// along the cycle `x -> x+1`.
pub fn cycle_power_profile<T: Scalar>(n: usize, alpha: f64) -> Result<Vec<T>> {
    (0..n)
        .map(|x| lift((1.0 + x.min(n - x) as f64).powf(alpha)))
        .collect()
}

/// Random sequence spec of the given family with window length at most `max_len`.
pub fn sample_sequence_kind(
    family: SequenceFamily,
    max_len: u64,
    nonnegative: bool,
    rng: &mut impl Rng,
) -> SequenceKind {
    let max_len = max_len.max(1);
    let len = rng.gen_range(1..=max_len);
    let offset = rng.gen_range(-16..=16);
    match family {
        SequenceFamily::Delta => SequenceKind::Delta {
            position: rng.gen_range(-8..=8),
        },
        SequenceFamily::Constant => SequenceKind::Constant {
            value: rng.gen_range(1..=16) as f64 / 8.0,
            lo: offset,
            hi: offset + len as i64 - 1,
        },
        SequenceFamily::Step => {
            let pad = rng.gen_range(0..=(max_len - len) / 2);
            SequenceKind::Step {
                lo: offset,
                hi: offset + len as i64 - 1,
                height: rng.gen_range(1..=16) as f64 / 8.0,
                pad,
            }
        }
        SequenceFamily::RandomSparse => SequenceKind::RandomSparse {
            offset,
            len,
            density: [0.1, 0.25, 0.5][rng.gen_range(0..3)],
            signed: !nonnegative,
        },
        SequenceFamily::RandomDense => SequenceKind::RandomDense {
            offset,
            len,
            signed: !nonnegative,
        },
        SequenceFamily::AdversarialDyadic => {
            let level = rng.gen_range(1..=3u32);
            let blocks = ((max_len >> level).max(1) as u32).min(8);
            SequenceKind::AdversarialDyadic {
                level,
                blocks: rng.gen_range(1..=blocks),
            }
        }
    }
}

/// Random weight spec of the given family.
pub fn sample_weight_kind(family: WeightFamily, rng: &mut impl Rng) -> WeightKind {
    match family {
        WeightFamily::Constant => WeightKind::Constant {
            value: rng.gen_range(1..=16) as f64 / 4.0,
        },
        WeightFamily::Alternating => WeightKind::Alternating {
            low: 1.0,
            high: rng.gen_range(2..=16) as f64 / 2.0,
        },
        WeightFamily::Power => WeightKind::Power {
            alpha: [-0.5, 0.4, 1.0, 1.5][rng.gen_range(0..4)],
        },
        WeightFamily::RandomBoundedRatio => WeightKind::RandomBoundedRatio {
            rho: rng.gen_range(1..=8) as f64,
        },
    }
}
