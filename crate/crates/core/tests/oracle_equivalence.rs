use ergomax_core::cz::cz_decompose;
use ergomax_core::ergodic::{ergodic_ap_constant, ergodic_maximal};
use ergomax_core::maximal::{
    best_constant_oscillation, centered_maximal, default_sharp_range, dyadic_maximal,
    sharp_maximal, uncentered_maximal,
};
use ergomax_core::weights::ap_constant;
use ergomax_core::{
    AtomFunction, Exact, FinitePermutationSystem, IntegerInterval, MaximalResult, Scalar,
    WeightSequence, WindowedSequence,
};
use ergomax_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn iv(lo: i64, hi: i64) -> IntegerInterval {
    IntegerInterval::new(lo, hi).unwrap()
}

fn q(n: i64) -> Exact {
    Exact::from_int(n)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn exact_seq(rng: &mut ChaCha8Rng, len: usize, signed: bool) -> WindowedSequence<Exact> {
    let offset = rng.gen_range(-8..8);
    let values = (0..len)
        .map(|_| {
            let v = if rng.gen_bool(0.3) {
                0
            } else {
                rng.gen_range(0..10)
            };
            if signed && rng.gen_bool(0.5) {
                q(-v)
            } else {
                q(v)
            }
        })
        .collect();
    WindowedSequence::new(offset, values).unwrap()
}

/// Every point of the evaluation window against the oracle, values and
/// witnesses.
fn assert_exact(result: &MaximalResult<Exact>, oracle: impl Fn(i64) -> (Exact, IntegerInterval)) {
    for (m, v) in result.iter() {
        let (ov, ow) = oracle(m);
        assert_eq!(*v, ov, "{:?} at {m}", result.op);
        assert_eq!(
            result.witness(m),
            Some(ow),
            "{:?} witness at {m}",
            result.op
        );
    }
}

fn check_all_exact(a: &WindowedSequence<Exact>) {
    let eval = a.window().pad(3);
    assert_exact(&centered_maximal(a, None, eval).unwrap(), |m| {
        oracle::centered(a, None, m)
    });
    assert_exact(&uncentered_maximal(a, None, eval).unwrap(), |m| {
        oracle::uncentered(a, None, m)
    });
    assert_exact(&dyadic_maximal(a, eval).unwrap(), |m| oracle::dyadic(a, m));
    for j in [2, 3, 5] {
        assert_exact(&centered_maximal(a, Some(j), eval).unwrap(), |m| {
            oracle::centered(a, Some(j), m)
        });
        assert_exact(&uncentered_maximal(a, Some(j), eval).unwrap(), |m| {
            oracle::uncentered(a, Some(j), m)
        });
    }
}

#[test]
fn all_binary_sequences_up_to_length_8() {
    for len in 1..=8usize {
        for bits in 0u32..(1 << len) {
            let values = (0..len).map(|i| q(((bits >> i) & 1) as i64)).collect();
            let a = WindowedSequence::new(-(len as i64) / 2, values).unwrap();
            check_all_exact(&a);
        }
    }
}

#[test]
fn random_exact_windows_up_to_64() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for len in 1..=64 {
        let a = exact_seq(&mut rng, len, true);
        check_all_exact(&a);
    }
}

#[test]
fn sharp_and_oscillation_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for len in 1..=10 {
        for _ in 0..3 {
            let a = exact_seq(&mut rng, len, true);
            let range = default_sharp_range(&a);
            let s = sharp_maximal(&a, a.window(), None).unwrap();
            assert_exact(&s, |m| oracle::sharp(&a, range, m));
            let osc = best_constant_oscillation(&a, a.window(), None).unwrap();
            let (ov, ow) = oracle::best_constant(&a, a.window(), range);
            assert_eq!(osc.value, ov);
            assert_eq!(osc.witness, ow);
        }
    }
}

#[test]
fn random_float_windows_up_to_4096() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for len in [100, 517, 1024, 4096] {
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = WindowedSequence::new(-(len as i64) / 3, values).unwrap();
        let points: Vec<i64> = (0..4)
            .map(|_| rng.gen_range(a.window().lo() - 20..=a.window().hi() + 20))
            .collect();
        for &m in &points {
            let eval = iv(m, m);
            let c = centered_maximal(&a, None, eval).unwrap();
            assert!(close(*c.value(m).unwrap(), oracle::centered(&a, None, m).0));
            let u = uncentered_maximal(&a, None, eval).unwrap();
            assert!(close(
                *u.value(m).unwrap(),
                oracle::uncentered(&a, None, m).0
            ));
            let d = dyadic_maximal(&a, eval).unwrap();
            assert!(close(*d.value(m).unwrap(), oracle::dyadic(&a, m).0));
            let t = uncentered_maximal(&a, Some(37), eval).unwrap();
            assert!(close(
                *t.value(m).unwrap(),
                oracle::uncentered(&a, Some(37), m).0
            ));
        }
    }
}

#[test]
fn float_full_windows_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for len in [1, 7, 33, 64] {
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..5.0)).collect();
        let a = WindowedSequence::new(3, values).unwrap();
        let eval = a.window().pad(2);
        let u = uncentered_maximal(&a, None, eval).unwrap();
        let c = centered_maximal(&a, Some(9), eval).unwrap();
        for m in eval.iter() {
            assert!(close(
                *u.value(m).unwrap(),
                oracle::uncentered(&a, None, m).0
            ));
            assert!(close(
                *c.value(m).unwrap(),
                oracle::centered(&a, Some(9), m).0
            ));
        }
        let s = sharp_maximal(&a, a.window(), None).unwrap();
        let range = default_sharp_range(&a);
        for m in a.window().iter() {
            assert!(close(*s.value(m).unwrap(), oracle::sharp(&a, range, m).0));
        }
    }
}

#[test]
fn ap_constants_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for len in 1..=24 {
        let values: Vec<Exact> = (0..len).map(|_| q(rng.gen_range(1..9))).collect();
        let w = WeightSequence::from_values(0, values).unwrap();
        for p in [1.0, 2.0] {
            let r = ap_constant(&w, p).unwrap();
            assert_eq!(r.constant, oracle::ap_constant(&w, p));
            assert!(r.witness.len() >= 1 && w.window().contains_interval(&r.witness));
        }
        let wf = WeightSequence::from_values(0, w.values().iter().map(|v| v.to_f64()).collect())
            .unwrap();
        for p in [1.5, 3.0] {
            let r = ap_constant(&wf, p).unwrap();
            assert!(close(r.constant, oracle::ap_constant(&wf, p)));
        }
    }
}

#[test]
fn cz_matches_exhaustive_dyadic_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for len in 1..=40 {
        let a = exact_seq(&mut rng, len, false);
        for (n, d) in [(1, 1), (1, 2), (3, 4), (2, 1), (1, 8)] {
            let height = q(n) / q(d);
            let cz = cz_decompose(&a, &height).unwrap();
            let got: Vec<(u32, i64)> = cz
                .intervals
                .iter()
                .map(|d| (d.level(), d.index()))
                .collect();
            assert_eq!(
                got,
                oracle::cz_intervals(&a, &height),
                "len {len} λ {height}"
            );
        }
    }
}

fn random_system(rng: &mut ChaCha8Rng, n: usize) -> FinitePermutationSystem<Exact> {
    // a random single cycle with equal masses
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut perm = vec![0; n];
    for i in 0..n {
        perm[order[i]] = order[(i + 1) % n];
    }
    FinitePermutationSystem::new(vec![q(1) / q(n as i64); n], perm).unwrap()
}

#[test]
fn ergodic_maximal_matches_orbit_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=12 {
        let sys = random_system(&mut rng, n);
        let f = AtomFunction::from_fn(n, |_| q(rng.gen_range(-4..5)));
        for j in [1, 2, 4] {
            let m = ergodic_maximal(&sys, &f, Some(j)).unwrap();
            for x in 0..n {
                assert_eq!(*m.values.get(x), oracle::ergodic_maximal(&sys, &f, x, j));
            }
        }
        // untruncated: scanning far past the cycle length changes nothing
        let m = ergodic_maximal(&sys, &f, None).unwrap();
        for x in 0..n {
            assert_eq!(
                *m.values.get(x),
                oracle::ergodic_maximal(&sys, &f, x, 4 * n as u64 + 3)
            );
        }
    }
}

#[test]
fn ergodic_ap_matches_scan_and_bounds_it() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for n in 1..=8 {
        let sys = random_system(&mut rng, n);
        let w = AtomFunction::from_fn(n, |_| q(rng.gen_range(1..6)));
        for p in [1.0, 2.0] {
            let capped = ergodic_ap_constant(&sys, &w, p, Some(n as u64)).unwrap();
            assert_eq!(capped.constant, oracle::ergodic_ap(&sys, &w, p, n as u64));
        }
        let wf = w.map(|v| v.to_f64());
        let sysf =
            FinitePermutationSystem::new(vec![1.0 / n as f64; n], sys.perm().to_vec()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let sup = ergodic_ap_constant(&sysf, &wf, p, None).unwrap().constant;
            let far = oracle::ergodic_ap(&sysf, &wf, p, 40 * n as u64 + 5);
            assert!(
                far <= sup * (1.0 + 1e-12),
                "p {p}: scan {far} above sup {sup}"
            );
            assert!(sup - far < 1e-3, "p {p}: sup {sup} far from scan {far}");
        }
    }
}
