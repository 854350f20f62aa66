//! Verification campaigns: seeded corpora run through every checker.
//!
//! Each job regenerates its inputs from a seed derived from the campaign seed
//! and the job key, so results do not depend on scheduling. Reports carry the
//! SHA-256 digest of their inputs and are sorted by it before serialization.

use std::collections::BTreeMap;

use anyhow::{anyhow, Result};
use ergomax_core::cz::{
    strong_pp_check, verify_covering_lemma, verify_cz_structure, weak11_with_constant,
    weighted_weak_pp_with, WEAK11_CONSTANT,
};
use ergomax_core::ergodic::{
    converse_probe, ergodic_ap_constant, ergodic_maximal, ergodic_weak_pp,
    verify_transference_identity, weighted_lp_norm,
};
use ergomax_core::io::{sequence_to_json, LambdaGrid};
use ergomax_core::maximal::{
    verify_operator_comparison, verify_oscillation_bounds, verify_sharp_abs,
};
use ergomax_core::weights::{
    ap_constant, interval_inequality_a_with, interval_inequality_b_all_subsets, power_weight,
};
use ergomax_core::{
    AtomFunction, CheckId, Exact, FinitePermutationSystem, InequalityReport, IntegerInterval,
    Scalar, WeightSequence, WindowedSequence, Witness,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{CampaignConfig, Mode};
use crate::generate::{
    self, cycle_power_profile, generate_sequence, generate_system, generate_weight, relabel,
    sample_sequence_kind, sample_weight_kind, tiled_weight, SequenceKind, SystemKind,
};

/// Allowed spread of the largest strong-type ratio across sizes.
pub const TREND_SPREAD: f64 = 1.1;
/// Windowed or ergodic `A_2` bound for the strong-type trend weights.
pub const TREND_A2_BOUND: f64 = 4.0;
/// Period of the tiled trend weights.
pub const TREND_PERIOD: u64 = 32;
/// Allowed spread of `B` across cycle lengths for the unit weight.
pub const CONVERSE_FLAT_SPREAD: f64 = 1.5;
/// Power-weight exponents for the `A_p` trend: one inside `A_2`, one outside.
pub const POWER_BOUNDED_ALPHA: f64 = 0.4;
pub const POWER_GROWING_ALPHA: f64 = 1.5;
pub const POWER_WINDOWS: [u64; 3] = [16, 64, 256];
pub const CONVERSE_ALPHA: f64 = 1.5;

/// One unit of work: a check applied to one generated instance.
#[derive(Clone, Debug)]
pub struct Job {
    pub check: CheckId,
    pub index: usize,
    pub p: Option<f64>,
    pub seed: u64,
}

fn job_seed(seed: u64, check: CheckId, index: usize, p: Option<f64>) -> u64 {
    let key = format!("{seed}:{check}:{index}:{p:?}");
    let hash = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(hash[..8].try_into().expect("eight bytes"))
}

fn is_trend(check: CheckId) -> bool {
    matches!(
        check,
        CheckId::StrongPp | CheckId::ErgodicStrong | CheckId::Converse | CheckId::PowerWeight
    )
}

fn uses_p(check: CheckId) -> bool {
    matches!(
        check,
        CheckId::IntervalA | CheckId::IntervalB | CheckId::WeakPp
    )
}

/// Every job of the campaign in a fixed order.
pub fn plan(config: &CampaignConfig) -> Vec<Job> {
    let corpus = &config.corpus;
    let mut jobs = Vec::new();
    let mut checks = config.checks.clone();
    checks.sort();
    checks.dedup();
    for check in checks {
        let count = match check {
            CheckId::StrongPp | CheckId::PowerWeight => {
                usize::from(!corpus.trend_windows.is_empty())
            }
            CheckId::ErgodicStrong | CheckId::Converse => {
                usize::from(!corpus.trend_cycles.is_empty())
            }
            CheckId::ErgodicWeak if corpus.system_sizes.is_empty() => 0,
            _ => corpus.instances,
        };
        let ps: Vec<Option<f64>> = if uses_p(check) {
            corpus.p_grid.iter().map(|p| Some(*p)).collect()
        } else {
            vec![None]
        };
        for index in 0..count {
            for &p in &ps {
                let seed = job_seed(config.seed, check, index, p);
                jobs.push(Job {
                    check,
                    index,
                    p,
                    seed,
                });
            }
        }
    }
    jobs
}

/// `SHA-256` of the canonical JSON of a check and its inputs.
pub fn digest(check: CheckId, inputs: &Value) -> String {
    let doc = json!({ "check": check, "inputs": inputs });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

fn float_json<T: Scalar>(a: &WindowedSequence<T>) -> Value {
    sequence_to_json(&a.map(Scalar::to_f64))
}

fn atoms_json<T: Scalar>(f: &AtomFunction<T>) -> Value {
    json!(f.values().iter().map(Scalar::to_f64).collect::<Vec<_>>())
}

type Outcome = Result<(Value, Vec<InequalityReport>)>;

struct Ctx<'a> {
    config: &'a CampaignConfig,
    job: &'a Job,
    rng: ChaCha8Rng,
}

impl Ctx<'_> {
    fn sequence<T: Scalar>(
        &mut self,
        max_len: u64,
        nonnegative: bool,
    ) -> Result<WindowedSequence<T>> {
        let kinds = &self.config.corpus.sequence_kinds;
        anyhow::ensure!(!kinds.is_empty(), "no sequence kinds configured");
        let family = kinds[self.job.index % kinds.len()];
        let kind = sample_sequence_kind(family, max_len, nonnegative, &mut self.rng);
        generate_sequence(&kind, self.rng.gen())
    }

    fn weight<T: Scalar>(&mut self, window: IntegerInterval) -> Result<WeightSequence<T>> {
        let kinds = &self.config.corpus.weight_kinds;
        anyhow::ensure!(!kinds.is_empty(), "no weight kinds configured");
        let seqs = self.config.corpus.sequence_kinds.len().max(1);
        let family = kinds[(self.job.index / seqs + self.job.index) % kinds.len()];
        let kind = sample_weight_kind(family, &mut self.rng);
        Ok(generate_weight(&kind, window, self.rng.gen())?.weight)
    }

    fn heights<T: Scalar>(&self, a: &WindowedSequence<T>) -> Result<Vec<T>> {
        Ok(LambdaGrid::parse(&self.config.corpus.lambda_grid)?.resolve(a)?)
    }

    fn p(&self) -> Result<f64> {
        self.job
            .p
            .ok_or_else(|| anyhow!("{} needs an exponent", self.job.check))
    }
}

fn with_height(report: InequalityReport, h: &impl Scalar) -> InequalityReport {
    let note = match &report.note {
        Some(n) => format!("λ = {h}; {n}"),
        None => format!("λ = {h}"),
    };
    report.with_note(note)
}

fn operator_comparison<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.max_len, false)?;
    let eval = a.window().pad(a.window().len());
    let report = verify_operator_comparison(&a, eval)?;
    Ok((json!({ "a": float_json(&a), "eval": eval }), vec![report]))
}

fn covering<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.max_len, true)?;
    let heights = ctx.heights(&a)?;
    let reports = heights
        .iter()
        .map(|h| Ok(with_height(verify_covering_lemma(&a, h)?, h)))
        .collect::<Result<_>>()?;
    Ok((
        json!({ "a": float_json(&a), "grid": ctx.config.corpus.lambda_grid }),
        reports,
    ))
}

fn cz_structure<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.max_len, true)?;
    let heights = ctx.heights(&a)?;
    let reports = heights
        .iter()
        .map(|h| Ok(with_height(verify_cz_structure(&a, h)?, h)))
        .collect::<Result<_>>()?;
    Ok((
        json!({ "a": float_json(&a), "grid": ctx.config.corpus.lambda_grid }),
        reports,
    ))
}

fn oscillation<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.sharp_max_len, false)?;
    let report = if ctx.job.check == CheckId::SharpAbs {
        verify_sharp_abs(&a, a.window(), None)?
    } else {
        verify_oscillation_bounds(&a, a.window(), None)?
    };
    Ok((json!({ "a": float_json(&a) }), vec![report]))
}

/// Heights whose weight window, the support padded by `pad(λ)`, fits in
/// `max_window` points, with the padding needed by the smallest of them.
fn fitting_heights<T: Scalar>(
    heights: Vec<T>,
    support: IntegerInterval,
    max_window: u64,
    pad: impl Fn(&T) -> Option<u64>,
) -> (Vec<T>, u64, usize) {
    let mut kept = Vec::new();
    let mut widest = 0;
    let mut skipped = 0;
    for h in heights {
        match pad(&h) {
            Some(r) if support.len() + 2 * r <= max_window => {
                widest = widest.max(r);
                kept.push(h);
            }
            _ => skipped += 1,
        }
    }
    (kept, widest, skipped)
}

fn ceil_ratio<T: Scalar>(num: &T, den: &T) -> Option<u64> {
    (num.clone() / den.clone())
        .ceil_to_i64()
        .and_then(|r| u64::try_from(r).ok())
}

fn weak11<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.max_len, false)?;
    let Some(support) = a.support() else {
        return Ok((json!({ "a": float_json(&a) }), Vec::new()));
    };
    let l1 = a.l1_norm();
    // {Ma > λ} lies within distance ⌈‖a‖₁/λ⌉ of the support
    let (heights, pad, skipped) = fitting_heights(
        ctx.heights(&a)?,
        support,
        ctx.config.corpus.max_weight_window,
        |h| ceil_ratio(&l1, h).map(|r| r + 1),
    );
    let w: WeightSequence<T> = ctx.weight(support.pad(pad))?;
    let constant = match &ctx.config.constants.weak11 {
        Some(c) => T::parse_text(c)?,
        None => T::from_int(WEAK11_CONSTANT),
    };
    let reports = heights
        .iter()
        .map(|h| Ok(with_height(weak11_with_constant(&a, &w, h, &constant)?, h)))
        .collect::<Result<_>>()?;
    let inputs = json!({
        "a": float_json(&a),
        "w": float_json(w.as_sequence()),
        "heights": heights.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
        "skipped": skipped,
        "constant": constant.to_f64(),
    });
    Ok((inputs, reports))
}

fn weak_pp<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let p = ctx.p()?;
    let a: WindowedSequence<T> = ctx.sequence(ctx.config.corpus.max_len, false)?;
    let Some(support) = a.support() else {
        return Ok((json!({ "a": float_json(&a), "p": p }), Vec::new()));
    };
    let l1 = a.l1_norm();
    // the tripled decomposition intervals at λ/12 stay within 24‖a‖₁/λ of the support
    let (heights, pad, skipped) = fitting_heights(
        ctx.heights(&a)?,
        support,
        ctx.config.corpus.max_weight_window,
        |h| ceil_ratio(&(T::from_int(24) * l1.clone()), h).map(|r| r + 4),
    );
    let w: WeightSequence<T> = ctx.weight(support.pad(pad))?;
    let inputs = json!({
        "a": float_json(&a),
        "w": float_json(w.as_sequence()),
        "p": p,
        "heights": heights.iter().map(Scalar::to_f64).collect::<Vec<_>>(),
        "skipped": skipped,
    });
    if heights.is_empty() {
        return Ok((inputs, Vec::new()));
    }
    let ap = ap_constant(&w, p)?.constant;
    let reports = heights
        .iter()
        .map(|h| Ok(with_height(weighted_weak_pp_with(&a, &w, p, h, &ap)?, h)))
        .collect::<Result<_>>()?;
    Ok((inputs, reports))
}

/// Failing reports first, then the largest ratio.
fn worse(candidate: &InequalityReport, current: &Option<InequalityReport>) -> bool {
    match current {
        None => true,
        Some(r) => {
            (!candidate.pass && r.pass) || (candidate.pass == r.pass && candidate.ratio > r.ratio)
        }
    }
}

fn interval_inequality<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let p = ctx.p()?;
    let len = ctx.rng.gen_range(1..=ctx.config.corpus.interval_max_len);
    let lo = ctx.rng.gen_range(-16..=16);
    let window = IntegerInterval::new(lo, lo + len as i64 - 1)?;
    let w: WeightSequence<T> = ctx.weight(window)?;
    let ap = ap_constant(&w, p)?.constant;
    let mut worst: Option<InequalityReport> = None;
    let mut inputs = json!({ "w": float_json(w.as_sequence()), "p": p });
    if ctx.job.check == CheckId::IntervalA {
        let kind = SequenceKind::RandomSparse {
            offset: lo,
            len,
            density: 0.6,
            signed: true,
        };
        let a: WindowedSequence<T> = generate_sequence(&kind, ctx.rng.gen())?;
        inputs["a"] = float_json(&a);
        for i_lo in window.iter() {
            for i_hi in i_lo..=window.hi() {
                let interval = IntegerInterval::new(i_lo, i_hi)?;
                // both sides vanish where a does
                let r = match interval_inequality_a_with(&w, p, &a, interval, &ap) {
                    Err(ergomax_core::Error::VanishesOn(_)) => continue,
                    r => r?,
                };
                if worse(&r, &worst) {
                    worst = Some(r);
                }
            }
        }
    } else {
        for i_lo in window.iter() {
            for i_hi in i_lo..=window.hi() {
                let interval = IntegerInterval::new(i_lo, i_hi)?;
                let r = interval_inequality_b_all_subsets(&w, p, interval, &ap)?;
                if worse(&r, &worst) {
                    worst = Some(r);
                }
            }
        }
    }
    let Some(report) = worst else {
        return Ok((inputs, Vec::new()));
    };
    let note = format!("A_p = {ap}; worst over every subinterval");
    Ok((inputs, vec![report.with_note(note)]))
}

fn random_atoms<T: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    signed: bool,
) -> Result<AtomFunction<T>> {
    let kind = SequenceKind::RandomSparse {
        offset: 0,
        len: n as u64,
        density: 0.7,
        signed,
    };
    let a: WindowedSequence<T> = generate_sequence(&kind, rng.gen())?;
    Ok(AtomFunction::new(a.into_values())?)
}

fn transference<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let (lo, hi) = ctx.config.corpus.transfer_cycle_range;
    let n = ctx.rng.gen_range(lo..=hi);
    let null = if ctx.job.index % 2 == 1 {
        ctx.rng.gen_range(1..=3)
    } else {
        0
    };
    let base: FinitePermutationSystem<T> =
        generate_system(SystemKind::CycleWithNullAtoms { null }, n)?;
    let sys = relabel(&base, ctx.rng.gen())?;
    let f: AtomFunction<T> = random_atoms(&mut ctx.rng, sys.n(), true)?;
    let x = ctx.rng.gen_range(0..sys.n());
    let l = ctx.rng.gen_range(1..=2 * n as u64);
    let j = ctx.rng.gen_range(1..=n as u64);
    let report = verify_transference_identity(&sys, &f, x, l, j)?;
    let inputs = json!({ "perm": sys.perm(), "cycle": n, "null": null, "f": atoms_json(&f), "x": x, "L": l, "J": j });
    Ok((inputs, vec![report]))
}

fn ergodic_weak<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    let sizes = &ctx.config.corpus.system_sizes;
    let n = sizes[ctx.job.index % sizes.len()];
    let null = if ctx.job.index % 3 == 2 { 2 } else { 0 };
    let base: FinitePermutationSystem<T> =
        generate_system(SystemKind::CycleWithNullAtoms { null }, n)?;
    let sys = relabel(&base, ctx.rng.gen())?;
    let f: AtomFunction<T> = random_atoms(&mut ctx.rng, sys.n(), true)?;
    let w: AtomFunction<T> = if ctx.job.index % 2 == 0 {
        let raw = (0..sys.n()).map(|_| 1.0 + ctx.rng.gen_range(0..=48) as f64 / 16.0);
        AtomFunction::new(raw.map(|v| T::from_f64(v).expect("finite")).collect())?
    } else {
        // the power profile along the cycle, carried over by the relabelling
        let profile: Vec<T> = cycle_power_profile(n, POWER_BOUNDED_ALPHA)?;
        let mut values = vec![T::one(); sys.n()];
        let start = (0..sys.n())
            .find(|&x| *sys.mass(x) > T::zero())
            .expect("cycle has mass");
        for (k, v) in profile.into_iter().enumerate() {
            values[sys.shift(start, -(k as i64))] = v;
        }
        AtomFunction::new(values)?
    };
    let truncation = (ctx.job.index % 4 >= 2).then(|| ctx.rng.gen_range(1..=n as u64));
    let as_sequence = WindowedSequence::new(0, f.values().to_vec())?;
    let heights = ctx.heights(&as_sequence)?;
    let reports = heights
        .iter()
        .map(|h| {
            Ok(with_height(
                ergodic_weak_pp(&sys, &f, &w, 1.0, h, truncation)?,
                h,
            ))
        })
        .collect::<Result<_>>()?;
    let inputs = json!({
        "perm": sys.perm(),
        "cycle": n,
        "null": null,
        "f": atoms_json(&f),
        "w": atoms_json(&w),
        "J": truncation,
        "grid": ctx.config.corpus.lambda_grid,
    });
    Ok((inputs, reports))
}

fn spread_report(
    check: CheckId,
    maxima: &[(u64, f64)],
    limit: f64,
    what: &str,
) -> InequalityReport {
    let hi = maxima.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    let lo = maxima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let detail = maxima
        .iter()
        .map(|(n, v)| format!("n={n}: {v:.6}"))
        .collect::<Vec<_>>()
        .join(", ");
    InequalityReport::bound(check, &hi, &lo, &limit)
        .with_witness(Witness::Text { detail })
        .with_note(format!(
            "{what}; largest/smallest across sizes must stay within {limit}"
        ))
}

/// Deltas on one period, dyadic blocks starting at 0 and random bumps near 0.
fn trend_probes(
    rng: &mut ChaCha8Rng,
    window: IntegerInterval,
) -> Result<Vec<WindowedSequence<f64>>> {
    let mut probes = Vec::new();
    let period = TREND_PERIOD as i64;
    for m in 0..period {
        if window.contains(m) {
            probes.push(WindowedSequence::delta(m));
        }
    }
    let mut size = 2;
    while size <= period && window.contains(size - 1) {
        probes.push(WindowedSequence::new(0, vec![1.0; size as usize])?);
        size *= 2;
    }
    for _ in 0..4 {
        let kind = SequenceKind::RandomDense {
            offset: -period / 2,
            len: TREND_PERIOD,
            signed: false,
        };
        let a: WindowedSequence<f64> = generate_sequence(&kind, rng.gen())?;
        if let Some(i) = a.window().intersect(&window) {
            probes.push(WindowedSequence::from_fn(i, |m| a.get(m)));
        }
    }
    Ok(probes)
}

fn strong_pp(ctx: &mut Ctx) -> Outcome {
    let windows = ctx.config.corpus.trend_windows.clone();
    let tiles: Vec<u64> = (0..ctx.config.corpus.trend_weights.max(1))
        .map(|_| ctx.rng.gen())
        .collect();
    let probe_seed: u64 = ctx.rng.gen();
    let mut maxima = Vec::new();
    let mut reports = Vec::new();
    for &n in &windows {
        let half = (n / 2) as i64;
        let window = IntegerInterval::new(-half, n as i64 - half - 1)?;
        let probes = trend_probes(&mut generate::rng(probe_seed), window)?;
        let mut best = 0.0f64;
        for &tile in &tiles {
            let w = tiled_weight::<f64>(TREND_A2_BOUND, TREND_PERIOD, window, tile)?.weight;
            let a2 = ap_constant(&w, 2.0)?;
            if !a2.constant.leq_tol(&TREND_A2_BOUND) {
                reports.push(
                    InequalityReport::bound(CheckId::StrongPp, &a2.constant, &TREND_A2_BOUND, &1.0)
                        .with_witness(a2.witness)
                        .with_note(format!(
                            "windowed A_2 of a trend weight exceeds {TREND_A2_BOUND} at n={n}"
                        )),
                );
            }
            for a in &probes {
                best = best.max(strong_pp_check(a, &w, 2.0)?.ratio_norm);
            }
        }
        maxima.push((n, best));
    }
    reports.push(spread_report(
        CheckId::StrongPp,
        &maxima,
        TREND_SPREAD,
        "max ‖Ma‖/‖a‖ in ℓ²_w over tiled weights with A_2 ≤ 4",
    ));
    let inputs =
        json!({ "windows": windows, "tiles": tiles, "probes": probe_seed, "period": TREND_PERIOD });
    Ok((inputs, reports))
}

fn power_trend(_ctx: &mut Ctx) -> Outcome {
    let mut series = Vec::new();
    for alpha in [POWER_BOUNDED_ALPHA, POWER_GROWING_ALPHA] {
        let mut constants = Vec::new();
        for n in POWER_WINDOWS {
            constants.push((n, ap_constant(&power_weight(alpha, n)?, 2.0)?.constant));
        }
        series.push(constants);
    }
    let bounded = spread_report(
        CheckId::PowerWeight,
        &series[0],
        2.0,
        &format!("windowed A_2 of (1+|k|)^{POWER_BOUNDED_ALPHA}"),
    );
    let first = series[1][0].1;
    let last = series[1][series[1].len() - 1].1;
    let growing = InequalityReport::bound(CheckId::PowerWeight, &(2.0 * first), &last, &1.0)
        .with_witness(Witness::Text {
            detail: format!(
                "A_2 at n={}: {first:.6}, at n={}: {last:.6}",
                POWER_WINDOWS[0], POWER_WINDOWS[2]
            ),
        })
        .with_note(format!(
            "windowed A_2 of (1+|k|)^{POWER_GROWING_ALPHA} must at least double"
        ));
    let inputs =
        json!({ "alphas": [POWER_BOUNDED_ALPHA, POWER_GROWING_ALPHA], "windows": POWER_WINDOWS });
    Ok((inputs, vec![bounded, growing]))
}

fn ergodic_strong(ctx: &mut Ctx) -> Outcome {
    let cycles = ctx.config.corpus.trend_cycles.clone();
    let tiles: Vec<u64> = (0..ctx.config.corpus.trend_weights.max(1))
        .map(|_| ctx.rng.gen())
        .collect();
    let probe_seed: u64 = ctx.rng.gen();
    let mut maxima = Vec::new();
    let mut reports = Vec::new();
    for &n in &cycles {
        let sys = FinitePermutationSystem::<f64>::cycle(n)?;
        let window = IntegerInterval::new(0, n as i64 - 1)?;
        let probes: Vec<AtomFunction<f64>> = trend_probes(&mut generate::rng(probe_seed), window)?
            .into_iter()
            .map(|a| AtomFunction::from_fn(n, |x| a.get(x as i64)))
            .collect();
        let mut best = 0.0f64;
        for &tile in &tiles {
            let w = tiled_weight::<f64>(TREND_A2_BOUND, TREND_PERIOD, window, tile)?.weight;
            let w = AtomFunction::new(w.values().to_vec())?;
            let a2 = ergodic_ap_constant(&sys, &w, 2.0, None)?.constant;
            if !a2.leq_tol(&TREND_A2_BOUND) {
                reports.push(
                    InequalityReport::bound(CheckId::ErgodicStrong, &a2, &TREND_A2_BOUND, &1.0)
                        .with_note(format!(
                            "ergodic A_2 of a trend weight exceeds {TREND_A2_BOUND} at n={n}"
                        )),
                );
            }
            for f in &probes {
                let out = weighted_lp_norm(&sys, &ergodic_maximal(&sys, f, None)?.values, &w, 2.0)?;
                best = best.max(out / weighted_lp_norm(&sys, f, &w, 2.0)?);
            }
        }
        maxima.push((n as u64, best));
    }
    reports.push(spread_report(
        CheckId::ErgodicStrong,
        &maxima,
        TREND_SPREAD,
        "max ‖M̃f‖/‖f‖ in L²_w over tiled weights with ergodic A_2 ≤ 4",
    ));
    let inputs =
        json!({ "cycles": cycles, "tiles": tiles, "probes": probe_seed, "period": TREND_PERIOD });
    Ok((inputs, reports))
}

/// `(A, B)` from the converse probe at each cycle length, `J = n/8`.
pub fn converse_series(
    cycles: &[usize],
    weight: impl Fn(usize) -> Result<Vec<f64>>,
    trials: usize,
    seed: u64,
) -> Result<Vec<(u64, f64, f64)>> {
    cycles
        .iter()
        .map(|&n| {
            let sys = FinitePermutationSystem::<f64>::cycle(n)?;
            let w = AtomFunction::new(weight(n)?)?;
            let r = converse_probe(&sys, &w, 2.0, (n / 8).max(1) as u64, trials, seed)?;
            Ok((n as u64, r.a_p, r.b))
        })
        .collect()
}

fn increasing_report(series: &[(u64, f64)], what: &str) -> InequalityReport {
    let detail = series
        .iter()
        .map(|(n, v)| format!("n={n}: {v:.6}"))
        .collect::<Vec<_>>()
        .join(", ");
    let worst = series
        .windows(2)
        .max_by(|x, y| (x[0].1 / x[1].1).total_cmp(&(y[0].1 / y[1].1)));
    let report = match worst {
        Some(pair) => InequalityReport::bound(CheckId::Converse, &pair[0].1, &pair[1].1, &1.0),
        None => InequalityReport::observation(CheckId::Converse, 0.0, 1.0),
    };
    let strictly = series.windows(2).all(|p| p[0].1 < p[1].1);
    let report = report
        .with_witness(Witness::Text { detail })
        .with_note(format!("{what} must increase strictly with n"));
    if strictly {
        report
    } else {
        report.fail(format!("{what} does not increase strictly with n"))
    }
}

fn converse(ctx: &mut Ctx) -> Outcome {
    let cycles = ctx.config.corpus.trend_cycles.clone();
    let trials = ctx.config.corpus.converse_trials;
    let seed: u64 = ctx.rng.gen();
    let flat = converse_series(&cycles, |n| Ok(vec![1.0; n]), trials, seed)?;
    let power = converse_series(
        &cycles,
        |n| cycle_power_profile(n, CONVERSE_ALPHA),
        trials,
        seed,
    )?;
    let pick = |s: &[(u64, f64, f64)], b: bool| -> Vec<(u64, f64)> {
        s.iter()
            .map(|&(n, a, bv)| (n, if b { bv } else { a }))
            .collect()
    };
    let mut flat_b = spread_report(
        CheckId::Converse,
        &pick(&flat, true),
        CONVERSE_FLAT_SPREAD,
        "B for w ≡ 1",
    );
    if let Some(&(n, a, _)) = flat.iter().find(|(_, a, _)| !a.leq_tol(&1.0)) {
        flat_b = flat_b.fail(format!("ergodic A_2 of w ≡ 1 is {a} at n={n}"));
    }
    let reports = vec![
        flat_b,
        increasing_report(&pick(&power, false), "ergodic A_2 of the power profile"),
        increasing_report(&pick(&power, true), "B for the power profile"),
    ];
    let inputs =
        json!({ "cycles": cycles, "trials": trials, "seed": seed, "alpha": CONVERSE_ALPHA });
    Ok((inputs, reports))
}

fn run_typed<T: Scalar>(ctx: &mut Ctx) -> Outcome {
    match ctx.job.check {
        CheckId::OperatorComparison => operator_comparison::<T>(ctx),
        CheckId::Covering => covering::<T>(ctx),
        CheckId::Oscillation | CheckId::SharpAbs => oscillation::<T>(ctx),
        CheckId::CzStructure => cz_structure::<T>(ctx),
        CheckId::Weak11 => weak11::<T>(ctx),
        CheckId::IntervalA | CheckId::IntervalB => interval_inequality::<T>(ctx),
        CheckId::WeakPp => weak_pp::<T>(ctx),
        CheckId::Transference => transference::<T>(ctx),
        CheckId::ErgodicWeak => ergodic_weak::<T>(ctx),
        CheckId::StrongPp => strong_pp(ctx),
        CheckId::PowerWeight => power_trend(ctx),
        CheckId::ErgodicStrong => ergodic_strong(ctx),
        CheckId::Converse => converse(ctx),
    }
}

/// Whether a job runs in rational arithmetic: exact mode, not a trend check,
/// and an exponent with a rational `A_p` evaluation.
pub fn runs_exact(mode: Mode, job: &Job) -> bool {
    mode == Mode::Exact && !is_trend(job.check) && job.p.map_or(true, |p| p == 1.0 || p == 2.0)
}

/// Runs one job; errors become failing reports so that they cannot pass silently.
pub fn run_job(config: &CampaignConfig, job: &Job) -> Vec<InequalityReport> {
    let exact = runs_exact(config.mode, job);
    let mut ctx = Ctx {
        config,
        job,
        rng: generate::rng(job.seed),
    };
    let outcome = if exact {
        run_typed::<Exact>(&mut ctx)
    } else {
        run_typed::<f64>(&mut ctx)
    };
    match outcome {
        Ok((inputs, mut reports)) => {
            let d = digest(job.check, &inputs);
            for r in &mut reports {
                r.digest = d.clone();
                if config.mode == Mode::Exact && !exact {
                    let note = r.note.take().map_or_else(String::new, |n| format!("; {n}"));
                    r.note = Some(format!("float backend{note}"));
                }
            }
            reports
        }
        Err(e) => {
            let key = json!({ "seed": config.seed, "index": job.index, "p": job.p });
            let mut r =
                InequalityReport::observation(job.check, 0.0, 0.0).fail(format!("error: {e:#}"));
            r.digest = digest(job.check, &key);
            vec![r]
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub reports: usize,
    pub failed: usize,
    /// Largest finite ratio observed.
    pub max_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub mode: Mode,
    pub reports: usize,
    pub failed: usize,
    pub checks: BTreeMap<String, CheckSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignOutcome {
    pub summary: Summary,
    pub reports: Vec<InequalityReport>,
}

impl CampaignOutcome {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// The report document, byte-identical for identical configs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}

fn summarize(config: &CampaignConfig, reports: &[InequalityReport]) -> Summary {
    let mut checks: BTreeMap<String, CheckSummary> = BTreeMap::new();
    for r in reports {
        let s = checks.entry(r.check.to_string()).or_default();
        s.reports += 1;
        if !r.pass {
            s.failed += 1;
            s.first_failure.get_or_insert_with(|| r.digest.clone());
        }
        if r.ratio.is_finite() {
            s.max_ratio = Some(s.max_ratio.map_or(r.ratio, |m| m.max(r.ratio)));
        }
    }
    Summary {
        seed: config.seed,
        mode: config.mode,
        reports: reports.len(),
        failed: reports.iter().filter(|r| !r.pass).count(),
        checks,
    }
}

/// Runs every planned job on a pool of `jobs` workers (all cores if `None`).
pub fn run_campaign(config: &CampaignConfig, jobs: Option<usize>) -> Result<CampaignOutcome> {
    config.validate()?;
    let plan = plan(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| anyhow!("cannot start worker pool: {e}"))?;
    let mut reports: Vec<InequalityReport> = pool.install(|| {
        plan.par_iter()
            .map(|job| run_job(config, job))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });
    reports.sort_by(|x, y| (&x.digest, x.check).cmp(&(&y.digest, y.check)));
    Ok(CampaignOutcome {
        summary: summarize(config, &reports),
        reports,
    })
}
