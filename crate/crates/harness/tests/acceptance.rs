//! Acceptance suite: one line per criterion, `[PASS]` or `[FAIL]`.
//! `cargo test --test acceptance -- AC-05` runs one criterion.
//!
//! Criteria in `UNATTAINABLE` assert an inequality that is false as stated;
//! they run in full and print `[FAIL]` when they fail, but only other failures
//! make the process exit 1.

use std::process::ExitCode;
use std::time::Instant;

use ergomax_core::cz::{verify_covering_lemma, verify_cz_structure};
use ergomax_core::io::LambdaGrid;
use ergomax_core::maximal::{
    centered_maximal, dyadic_maximal, uncentered_maximal, verify_operator_comparison,
    verify_oscillation_bounds, verify_sharp_abs,
};
use ergomax_core::{CheckId, Exact, InequalityReport, Scalar, WindowedSequence};
use ergomax_harness::campaign::{run_campaign, CampaignOutcome};
use ergomax_harness::config::{CampaignConfig, CorpusSpec, Mode};
use ergomax_harness::generate::{
    generate_sequence, rng, sample_sequence_kind, SequenceFamily, WeightFamily,
};
use ergomax_oracle as oracle;
use rand::Rng;

/// Relative tolerance for float-versus-oracle comparisons.
const ORACLE_TOLERANCE: f64 = 1e-12;

/// `M#(|a|) <= M#(a)` fails for signed sequences; see the AC-03 detail.
const UNATTAINABLE: &[u32] = &[3];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn campaign(checks: &[CheckId], mode: Mode, corpus: CorpusSpec) -> CampaignOutcome {
    let config = CampaignConfig {
        seed: 2024,
        mode,
        checks: checks.to_vec(),
        corpus,
        ..CampaignConfig::default()
    };
    run_campaign(&config, None).expect("campaign runs")
}

fn failures(out: &CampaignOutcome, check: CheckId) -> (usize, usize) {
    let rs: Vec<&InequalityReport> = out.reports.iter().filter(|r| r.check == check).collect();
    (rs.len(), rs.iter().filter(|r| !r.pass).count())
}

fn max_ratio(out: &CampaignOutcome, check: CheckId) -> f64 {
    out.reports
        .iter()
        .filter(|r| r.check == check && r.ratio.is_finite())
        .map(|r| r.ratio)
        .fold(0.0, f64::max)
}

fn random_real(len: u64, seed: u64) -> WindowedSequence<f64> {
    let mut r = rng(seed);
    let offset = r.gen_range(-64..=64);
    let values = (0..len).map(|_| r.gen_range(-4.0..4.0)).collect();
    WindowedSequence::new(offset, values).unwrap()
}

fn ac01() -> Verdict {
    let mut violations = 0;
    let mut checked = 0;
    for bits in 0u32..(1 << 16) {
        let values = (0..16).map(|i| ((bits >> i) & 1) as f64).collect();
        let a = WindowedSequence::new(-8, values).unwrap();
        if a.is_zero() {
            continue;
        }
        let r = verify_operator_comparison(&a, a.window().pad(16)).unwrap();
        violations += usize::from(!r.pass);
        checked += 1;
    }
    let mut r = rng(101);
    for i in 0..1000 {
        let a = random_real(r.gen_range(1..=256), 1000 + i);
        let eval = a.window().pad(8);
        let rep = verify_operator_comparison(&a, eval).unwrap();
        violations += usize::from(!rep.pass);
        checked += 1;
    }
    let delta = WindowedSequence::<Exact>::delta(0);
    let origin = ergomax_core::IntegerInterval::singleton(0);
    let m = uncentered_maximal(&delta, None, origin).unwrap();
    let c = centered_maximal(&delta, None, origin).unwrap();
    let tight = *m.value(0).unwrap() == Exact::from_int(3) * c.value(0).unwrap().clone();
    verdict(
        violations == 0 && tight,
        format!(
            "{checked} sequences, {violations} violations; δ_0: Ma(0) = 3M'a(0) exactly: {tight}"
        ),
    )
}

fn nonneg_corpus(count: u64, max_len: u64, seed: u64) -> Vec<WindowedSequence<Exact>> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let family = SequenceFamily::ALL[i as usize % SequenceFamily::ALL.len()];
            let kind = sample_sequence_kind(family, max_len, true, &mut r);
            generate_sequence(&kind, r.gen()).unwrap()
        })
        .collect()
}

fn ac02() -> Verdict {
    let grid = LambdaGrid::parse("auto:8").unwrap();
    let mut checks = 0;
    let mut violations = 0;
    for a in nonneg_corpus(500, 48, 202) {
        for h in grid.resolve(&a).unwrap() {
            let r = verify_covering_lemma(&a, &h).unwrap();
            checks += 1;
            violations += usize::from(!r.pass);
        }
    }
    verdict(
        violations == 0,
        format!("{checks} (sequence, λ) pairs in exact arithmetic, {violations} violations"),
    )
}

fn ac03() -> Verdict {
    let mut r = rng(303);
    let (mut oscillation, mut sharp_abs) = (0, 0);
    let mut worst: Option<InequalityReport> = None;
    let mut worst_input = None;
    for i in 0..500 {
        let family = SequenceFamily::ALL[i % SequenceFamily::ALL.len()];
        let kind = sample_sequence_kind(family, 64, false, &mut r);
        let a: WindowedSequence<f64> = generate_sequence(&kind, r.gen()).unwrap();
        oscillation += usize::from(
            !verify_oscillation_bounds(&a, a.window(), None)
                .unwrap()
                .pass,
        );
        let s = verify_sharp_abs(&a, a.window(), None).unwrap();
        if !s.pass {
            sharp_abs += 1;
            if worst.as_ref().map_or(true, |w| s.ratio > w.ratio) {
                worst_input = Some(a.clone());
                worst = Some(s);
            }
        }
    }
    let mut detail = format!(
        "500 signed sequences: two-sided oscillation bound {oscillation} violations; M#(|a|) <= M#(a) {sharp_abs} violations"
    );
    if let (Some(w), Some(a)) = (worst, worst_input) {
        let at = match w.witness {
            Some(ergomax_core::Witness::Point { m }) => format!(" at m = {m}"),
            _ => String::new(),
        };
        detail.push_str(&format!(
            "; worst ratio {:.4}{at} for a sequence on {}, within the factor-2 bound: {}. \
             The inequality is false for signed input: a = (-1, 1, 0, 0, 0) has M#(|a|)(4) = 12/25 > 2/5 = M#(a)(4)",
            w.ratio,
            a.window(),
            w.ratio <= 2.0
        ));
    }
    verdict(oscillation == 0 && sharp_abs == 0, detail)
}

fn ac04() -> Verdict {
    let grid = LambdaGrid::parse("auto:8").unwrap();
    let mut violations = 0;
    let mut decompositions = 0;
    for a in nonneg_corpus(500, 64, 404) {
        let heights = grid.resolve(&a).unwrap();
        for h in heights {
            decompositions += 1;
            violations += usize::from(!verify_cz_structure(&a, &h).unwrap().pass);
        }
    }
    verdict(
        violations == 0 && decompositions >= 500,
        format!(
            "{decompositions} exact decompositions over 500 sequences, {violations} violations"
        ),
    )
}

fn ac05() -> Verdict {
    let out = campaign(
        &[CheckId::Weak11],
        Mode::Exact,
        CorpusSpec {
            instances: 300,
            ..CorpusSpec::default()
        },
    );
    let (n, failed) = failures(&out, CheckId::Weak11);
    verdict(
        failed == 0 && n > 0,
        format!(
            "{n} reports in exact arithmetic, {failed} violations, max ratio {:.4}",
            max_ratio(&out, CheckId::Weak11)
        ),
    )
}

fn ac06() -> Verdict {
    let out = campaign(
        &[CheckId::IntervalA, CheckId::IntervalB],
        Mode::Exact,
        CorpusSpec {
            instances: 200,
            interval_max_len: 32,
            p_grid: vec![1.5, 2.0, 3.0],
            ..CorpusSpec::default()
        },
    );
    let (na, fa) = failures(&out, CheckId::IntervalA);
    let (nb, fb) = failures(&out, CheckId::IntervalB);
    verdict(
        fa + fb == 0 && nb == 600,
        format!(
            "200 weights x 3 exponents, every subinterval: A {na} worst-case reports ({fa} violations), B {nb} ({fb} violations); max ratios {:.4} / {:.4}",
            max_ratio(&out, CheckId::IntervalA),
            max_ratio(&out, CheckId::IntervalB)
        ),
    )
}

fn ac07() -> Verdict {
    let out = campaign(
        &[CheckId::WeakPp],
        Mode::Exact,
        CorpusSpec {
            instances: 100,
            weight_kinds: vec![
                WeightFamily::Constant,
                WeightFamily::Alternating,
                WeightFamily::RandomBoundedRatio,
            ],
            ..CorpusSpec::default()
        },
    );
    let (n, failed) = failures(&out, CheckId::WeakPp);
    verdict(
        failed == 0 && n > 0,
        format!(
            "{n} reports, {failed} violations, max ratio {:.2e}",
            max_ratio(&out, CheckId::WeakPp)
        ),
    )
}

fn trend_detail(out: &CampaignOutcome, check: CheckId) -> String {
    out.reports
        .iter()
        .filter(|r| r.check == check)
        .map(|r| match &r.witness {
            Some(ergomax_core::Witness::Text { detail }) => format!("[{detail}] pass={}", r.pass),
            _ => format!("ratio {:.4} pass={}", r.ratio, r.pass),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn ac08() -> Verdict {
    let out = campaign(
        &[CheckId::StrongPp, CheckId::PowerWeight],
        Mode::Float,
        CorpusSpec {
            trend_windows: vec![64, 256, 1024],
            trend_weights: 4,
            ..CorpusSpec::default()
        },
    );
    let pass = out.passed() && out.reports.len() == 3;
    verdict(
        pass,
        format!(
            "max ‖Ma‖/‖a‖ per window: {}; A_2 of power weights: {}",
            trend_detail(&out, CheckId::StrongPp),
            trend_detail(&out, CheckId::PowerWeight)
        ),
    )
}

fn ac09() -> Verdict {
    let out = campaign(
        &[CheckId::Transference],
        Mode::Exact,
        CorpusSpec {
            instances: 200,
            transfer_cycle_range: (5, 64),
            ..CorpusSpec::default()
        },
    );
    let (n, failed) = failures(&out, CheckId::Transference);
    verdict(
        failed == 0 && n == 200,
        format!("{n} exact instances, {failed} with mismatches"),
    )
}

fn ac10() -> Verdict {
    let weak = campaign(
        &[CheckId::ErgodicWeak],
        Mode::Exact,
        CorpusSpec {
            instances: 60,
            ..CorpusSpec::default()
        },
    );
    let strong = campaign(
        &[CheckId::ErgodicStrong],
        Mode::Float,
        CorpusSpec {
            trend_cycles: vec![32, 128, 512],
            trend_weights: 4,
            ..CorpusSpec::default()
        },
    );
    let (n, failed) = failures(&weak, CheckId::ErgodicWeak);
    verdict(
        failed == 0 && n > 0 && strong.passed(),
        format!(
            "weak (1,1): {n} reports, {failed} violations, max ratio {:.4}; strong (2,2): {}",
            max_ratio(&weak, CheckId::ErgodicWeak),
            trend_detail(&strong, CheckId::ErgodicStrong)
        ),
    )
}

fn ac11() -> Verdict {
    let out = campaign(
        &[CheckId::Converse],
        Mode::Float,
        CorpusSpec {
            trend_cycles: vec![32, 128, 512],
            converse_trials: 8,
            ..CorpusSpec::default()
        },
    );
    verdict(
        out.passed() && out.reports.len() == 3,
        trend_detail(&out, CheckId::Converse),
    )
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= ORACLE_TOLERANCE * x.abs().max(y.abs())
}

fn ac12() -> Verdict {
    let mut mismatches = 0;
    let mut compared = 0;
    // exhaustive {0,1,2}-valued windows up to length 6, exact with witnesses
    for len in 1..=6u32 {
        for code in 0..3u32.pow(len) {
            let values = (0..len)
                .map(|i| Exact::from_int(((code / 3u32.pow(i)) % 3) as i64))
                .collect();
            let a = WindowedSequence::new(-(len as i64) / 2, values).unwrap();
            let eval = a.window().pad(2);
            let ops = [
                (centered_maximal(&a, None, eval).unwrap(), 0),
                (uncentered_maximal(&a, None, eval).unwrap(), 1),
                (dyadic_maximal(&a, eval).unwrap(), 2),
                (uncentered_maximal(&a, Some(3), eval).unwrap(), 3),
            ];
            for (res, which) in &ops {
                for (m, v) in res.iter() {
                    let (ov, ow) = match which {
                        0 => oracle::centered(&a, None, m),
                        1 => oracle::uncentered(&a, None, m),
                        2 => oracle::dyadic(&a, m),
                        _ => oracle::uncentered(&a, Some(3), m),
                    };
                    compared += 1;
                    if *v != ov || res.witness(m) != Some(ow) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    // random large float windows at sampled points; the uncentered oracle is
    // cubic, so it sees the shorter windows only
    let mut r = rng(1212);
    for i in 0..40 {
        let a = random_real(r.gen_range(512..=4096), 5000 + i);
        for _ in 0..3 {
            let m = r.gen_range(a.window().lo() - 50..=a.window().hi() + 50);
            let eval = ergomax_core::IntegerInterval::singleton(m);
            let mut pairs = vec![
                (
                    *centered_maximal(&a, None, eval).unwrap().value(m).unwrap(),
                    oracle::centered(&a, None, m).0,
                ),
                (
                    *dyadic_maximal(&a, eval).unwrap().value(m).unwrap(),
                    oracle::dyadic(&a, m).0,
                ),
            ];
            if a.window().len() <= 768 {
                pairs.push((
                    *uncentered_maximal(&a, None, eval)
                        .unwrap()
                        .value(m)
                        .unwrap(),
                    oracle::uncentered(&a, None, m).0,
                ));
            }
            for (x, y) in pairs {
                compared += 1;
                mismatches += usize::from(!close(x, y));
            }
        }
    }
    for i in 0..20 {
        let a = random_real(r.gen_range(128..=512), 9000 + i);
        let m = r.gen_range(a.window().lo() - 20..=a.window().hi() + 20);
        let eval = ergomax_core::IntegerInterval::singleton(m);
        let x = *uncentered_maximal(&a, None, eval)
            .unwrap()
            .value(m)
            .unwrap();
        compared += 1;
        mismatches += usize::from(!close(x, oracle::uncentered(&a, None, m).0));
    }
    verdict(
        mismatches == 0,
        format!("{compared} values compared, {mismatches} mismatches"),
    )
}

fn ac13() -> Verdict {
    let mut config = CampaignConfig {
        checks: vec![CheckId::Weak11],
        ..CampaignConfig::default()
    };
    config.constants.weak11 = Some("1".into());
    let out = run_campaign(&config, None).expect("campaign runs");
    let caught: Vec<&InequalityReport> = out
        .reports
        .iter()
        .filter(|r| !r.pass && r.witness.is_some())
        .collect();
    let golden = run_campaign(
        &CampaignConfig {
            checks: vec![CheckId::Weak11],
            ..CampaignConfig::default()
        },
        None,
    )
    .expect("campaign runs");
    verdict(
        !caught.is_empty() && golden.passed(),
        format!(
            "constant 1: {} of {} weak (1,1) reports fail with a witness (max ratio {:.3}); constant 36 passes: {}",
            caught.len(),
            out.reports.len(),
            max_ratio(&out, CheckId::Weak11),
            golden.passed()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "operator comparison M'a <= Ma <= 3M'a", ac01),
        (2, "covering by tripled CZ intervals", ac02),
        (
            3,
            "sharp maximal two-sided bound and M#(|a|) <= M#(a)",
            ac03,
        ),
        (4, "CZ structure", ac04),
        (5, "weighted weak (1,1) with Mw", ac05),
        (6, "interval inequalities A and B", ac06),
        (7, "weighted weak (p,p)", ac07),
        (
            8,
            "strong type ratio stability and power-weight contrast",
            ac08,
        ),
        (9, "transference identity", ac09),
        (10, "ergodic weak (1,1) and strong (2,2) stability", ac10),
        (11, "converse trend", ac11),
        (12, "oracle equivalence", ac12),
        (13, "mutation sensitivity", ac13),
    ];
    let filter: Option<u32> = std::env::args()
        .nth(1)
        .and_then(|a| a.trim_start_matches("AC-").parse().ok());
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] AC-{id:02} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
        if !v.pass {
            if UNATTAINABLE.contains(&id) {
                println!("       AC-{id:02} is known to be unattainable as stated");
            } else {
                unexpected += 1;
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
