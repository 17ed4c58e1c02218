use proptest::prelude::*;
use psearch_core::driver::is_sorted_at;
use psearch_core::problems::{gen_mol, mol_brute, planted_make, Line, MedianOfLines, PlantedInstance};
use psearch_core::{Driver, DriverConfig, Fault, InvariantKind, OracleAnswer, Scalar};

const DRIVERS: [Driver; 2] = [Driver::Boxsort, Driver::Quicksort];

fn line(a: i64, b: i64) -> Line {
    Line::new(a.into(), b.into())
}

#[test]
fn planted_pair_needs_one_call() {
    let p = PlantedInstance::new(vec![line(1, 0), line(2, -1)], (0, 1)).unwrap();
    for d in DRIVERS {
        let out = d.run(&p, 0, &DriverConfig::checked()).unwrap();
        assert_eq!(out.stats.oracle_calls, 1, "{d}");
        assert_eq!(out.stats.oracle_log, vec![(Scalar::from(1), OracleAnswer::At)], "{d}");
        assert_eq!(out.lambda, Scalar::from(1), "{d}");
        assert!(out.violations.is_empty(), "{d}: {:?}", out.violations);
    }
}

#[test]
fn parallel_lines_need_no_calls() {
    let p = MedianOfLines::new(vec![line(1, -1), line(1, -2), line(1, -3)]).unwrap();
    for d in DRIVERS {
        let out = d.run(&p, 5, &DriverConfig::checked()).unwrap();
        assert_eq!(out.lambda, Scalar::from(2), "{d}");
        assert_eq!(out.stats.median_requests, 0, "{d}");
        // sorted by value at λ*: intercept −3 lowest
        assert_eq!(out.perm, vec![2, 1, 0], "{d}");
    }
}

#[test]
fn single_item() {
    let p = MedianOfLines::new(vec![Line::new(2.into(), (-7).into())]).unwrap();
    for d in DRIVERS {
        let out = d.run(&p, 0, &DriverConfig::checked()).unwrap();
        assert_eq!(out.lambda, Scalar::new(7, 2).unwrap());
        assert_eq!(out.stats.comparisons_resolved, 0);
        assert_eq!(out.stats.median_requests, 0);
        assert_eq!(out.perm, vec![0]);
    }
}

#[test]
fn agrees_with_brute_force() {
    for n in [3usize, 5, 11, 31, 101, 333, 1001] {
        for seed in 0..6u64 {
            let inst = gen_mol(n, seed, 10_000).unwrap();
            let want = mol_brute(&inst);
            for d in DRIVERS {
                let out = d.run(&inst, seed ^ 0xabc, &DriverConfig::checked()).unwrap();
                assert_eq!(out.lambda, want, "{d} n={n} seed={seed}");
                assert_eq!(is_sorted_at(&inst, &out.perm, &out.lambda), Some(true));
                assert!(out.violations.is_empty(), "{d} n={n}: {:?}", out.violations);
                let st = &out.stats;
                assert_eq!(st.median_requests, st.oracle_calls + st.free_resolutions);
                assert_eq!(st.turns, st.median_requests);
            }
        }
    }
}

#[test]
fn small_coefficients_force_ties_and_parallels() {
    // coefficients in 1..=3 make many equal slopes and crossings
    for seed in 0..40u64 {
        let inst = gen_mol(7, seed, 3).unwrap();
        for d in DRIVERS {
            let out = d.run(&inst, seed, &DriverConfig::checked()).unwrap();
            assert_eq!(out.lambda, mol_brute(&inst));
            assert!(out.violations.is_empty(), "{d} seed={seed}: {:?}", out.violations);
        }
    }
}

#[test]
fn planted_recovery() {
    for n in [2usize, 3, 10, 64, 500] {
        for seed in 0..5u64 {
            let inst = planted_make(n, seed).unwrap();
            for d in DRIVERS {
                let out = d.run(&inst, seed, &DriverConfig::checked()).unwrap();
                assert_eq!(&out.lambda, inst.star(), "{d} n={n} seed={seed}");
                assert_eq!(out.interval.found(), Some(inst.star()));
                assert!(out.violations.is_empty(), "{d}: {:?}", out.violations);
            }
        }
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let inst = gen_mol(501, 9, 10_000).unwrap();
    for d in DRIVERS {
        let a = d.run(&inst, 42, &DriverConfig::default()).unwrap();
        let b = d.run(&inst, 42, &DriverConfig::default()).unwrap();
        assert_eq!(a.perm, b.perm);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.lambda, b.lambda);
    }
}

#[test]
fn boxsort_oracle_calls_stay_logarithmic() {
    for n in [101usize, 1001, 4001] {
        let bound = 5.0 * (n as f64).log2() + 10.0;
        for seed in 0..3u64 {
            let inst = gen_mol(n, seed, 10_000).unwrap();
            let out = Driver::Boxsort.run(&inst, seed, &DriverConfig::default()).unwrap();
            assert!((out.stats.oracle_calls as f64) <= bound, "n={n}: {}", out.stats.oracle_calls);
            assert!((out.stats.turns as f64) <= 12.0 * (n as f64).log2(), "n={n}: {} turns", out.stats.turns);
        }
    }
}

#[test]
fn active_weight_trace_starts_at_top_weight() {
    let inst = gen_mol(1001, 1, 10_000).unwrap();
    let out = Driver::Boxsort.run(&inst, 1, &DriverConfig::default()).unwrap();
    let trace = &out.stats.active_weight_trace;
    assert_eq!(trace.len() as u64, out.stats.turns);
    // 31 marks: every one of the 465 initial pairs carries weight 1
    assert!(trace[0].1 <= 465.0 && trace[0].1 > 0.0);
    assert!(trace.iter().all(|(_, w)| *w > 0.0));
    // each resolution removes weight w and activates at most w/2
    for pair in trace.windows(2) {
        assert!(pair[1].1 <= pair[0].1 * (1.0 + 1e-12), "{pair:?}");
    }
    let quick = Driver::Quicksort.run(&inst, 1, &DriverConfig::default()).unwrap();
    assert!(quick.stats.active_weight_trace.is_empty());
}

#[test]
fn unhalved_routing_is_caught() {
    let inst = gen_mol(1001, 3, 10_000).unwrap();
    let cfg = DriverConfig {
        fault: Some(Fault::UnhalvedRouting),
        ..DriverConfig::checked()
    };
    let out = Driver::Boxsort.run(&inst, 3, &cfg).unwrap();
    assert!(out.violations.iter().any(|v| v.kind == InvariantKind::WeightRule));
    // the fault skews scheduling only; the answer stays right
    assert_eq!(out.lambda, mol_brute(&inst));
}

#[test]
fn base_threshold_override() {
    let inst = gen_mol(301, 4, 10_000).unwrap();
    for t in [2usize, 3, 50, 1000] {
        let cfg = DriverConfig {
            base_threshold: Some(t),
            ..DriverConfig::checked()
        };
        let out = Driver::Boxsort.run(&inst, 4, &cfg).unwrap();
        assert_eq!(out.lambda, mol_brute(&inst), "threshold {t}");
        assert!(out.violations.is_empty(), "threshold {t}: {:?}", out.violations);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn drivers_find_median_root(half in 0usize..40, inst_seed: u64, run_seed: u64, coeff in 20u64..200) {
        let inst = gen_mol(2 * half + 1, inst_seed, coeff).unwrap();
        let want = mol_brute(&inst);
        for d in DRIVERS {
            let out = d.run(&inst, run_seed, &DriverConfig::checked()).unwrap();
            prop_assert_eq!(&out.lambda, &want);
            prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
            prop_assert!(out.interval.closure_contains(&want));
        }
    }

    #[test]
    fn drivers_find_planted(n in 2usize..80, inst_seed: u64, run_seed: u64) {
        let inst = planted_make(n, inst_seed).unwrap();
        for d in DRIVERS {
            let out = d.run(&inst, run_seed, &DriverConfig::checked()).unwrap();
            prop_assert_eq!(&out.lambda, inst.star());
            prop_assert!(out.violations.is_empty(), "{:?}", out.violations);
        }
    }
}
