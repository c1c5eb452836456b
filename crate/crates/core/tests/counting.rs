use momentlab::counting::{
    count_a1, count_apm, gap_is_zero, gap_within, lemma_ratio_sweep, min_gap_scan, BruteForce, Counter, DyadicBox,
    Lemma, Sign, DEFAULT_ALARM,
};
use proptest::prelude::*;

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn side() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![1u64, 2, 3, 4, 5, 8, 11, 16])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_matches_brute(n in side(), m in side(), k in side(), l in side(), s in sign(), e in -12.0f64..3.0) {
        let b = DyadicBox::new(n, m, k, l).unwrap();
        let delta = e.exp2();
        prop_assert_eq!(Counter::new(&b, s).count(delta).unwrap(), BruteForce::new(&b, s).count(delta).unwrap());
    }

    #[test]
    fn monotone_in_delta(n in side(), m in side(), s in sign(), e in -10.0f64..2.0, f in 0.0f64..3.0) {
        let b = DyadicBox::new(n, m, m, n).unwrap();
        let c = Counter::new(&b, s);
        prop_assert!(c.count(e.exp2()).unwrap() <= c.count((e + f).exp2()).unwrap());
    }

    #[test]
    fn nudged_delta_agrees(n in side(), k in side(), s in sign(), e in -8.0f64..2.0) {
        let b = DyadicBox::new(n, n, k, k).unwrap();
        let delta = e.exp2();
        let fast = Counter::new(&b, s);
        let brute = BruteForce::new(&b, s);
        for d in [delta.next_down(), delta, delta.next_up()] {
            prop_assert_eq!(fast.count(d).unwrap(), brute.count(d).unwrap());
        }
    }

    #[test]
    fn minus_gap_symmetries(q in prop::array::uniform4(1u64..200), d in 0.001f64..1.0) {
        let [n, m, k, l] = q;
        let w = gap_within(q, Sign::Minus, d);
        prop_assert_eq!(w, gap_within([m, n, k, l], Sign::Minus, d));
        prop_assert_eq!(w, gap_within([n, m, l, k], Sign::Minus, d));
        prop_assert_eq!(w, gap_within([k, l, n, m], Sign::Minus, d));
    }
}

#[test]
fn integer_gaps_sit_on_the_boundary() {
    // 9 and 16 make η = ±1 exactly, which the strict window excludes
    let b = DyadicBox::new(8, 8, 8, 8).unwrap();
    let fast = Counter::new(&b, Sign::Minus);
    let brute = BruteForce::new(&b, Sign::Minus);
    let at = fast.count(1.0).unwrap();
    let above = fast.count(1.0f64.next_up()).unwrap();
    assert_eq!(at, brute.count(1.0).unwrap());
    assert_eq!(above, brute.count(1.0f64.next_up()).unwrap());
    assert!(above > at);
    assert!(!gap_within([16, 16, 16, 9], Sign::Minus, 1.0));
    assert!(gap_within([16, 16, 16, 9], Sign::Minus, 1.0f64.next_up()));
}

#[test]
fn small_boxes() {
    let b = DyadicBox::new(2, 2, 2, 2).unwrap();
    assert_eq!(count_a1(&b, 0.1).unwrap().count, 0);
    assert_eq!(count_a1(&b, 0.3).unwrap().count, 8);
    assert_eq!(count_apm(&b, 0.3, Sign::Minus).unwrap().count, 8);
    let ones = DyadicBox::new(1, 1, 1, 1).unwrap();
    assert_eq!(count_apm(&ones, 0.05, Sign::Plus).unwrap().count, 0);
    assert_eq!(count_a1(&b, 1e-9).unwrap().count, 0);
}

#[test]
fn exact_zero_gaps() {
    assert!(gap_is_zero([2, 8, 18, 72], Sign::Plus));
    assert!(!gap_is_zero([2, 8, 18, 71], Sign::Plus));
    assert!(gap_is_zero([1, 16, 4, 9], Sign::Minus));
    assert!(gap_is_zero([2, 32, 8, 18], Sign::Minus));
    assert!(gap_is_zero([2, 18, 8, 8], Sign::Minus));
    assert!(!gap_is_zero([2, 18, 8, 9], Sign::Minus));
    assert!(!gap_within([1, 16, 4, 9], Sign::Minus, 10.0));
}

#[test]
fn rejects_bad_input() {
    assert!(DyadicBox::new(0, 1, 1, 1).is_err());
    assert!(DyadicBox::new(1, 1, 1, 1 << 30).is_err());
    let b = DyadicBox::new(2, 2, 2, 2).unwrap();
    assert!(count_a1(&b, 0.0).is_err());
    assert!(count_a1(&b, f64::NAN).is_err());
    assert!(min_gap_scan(301).is_err());
}

#[test]
fn reports_and_sweep() {
    let b = DyadicBox::new(4, 4, 4, 8).unwrap();
    let r = count_a1(&b, 0.5).unwrap();
    assert!(r.bound > 0.0);
    assert!((r.ratio - r.count as f64 / r.bound).abs() < 1e-12);
    assert!(r.csv_row().starts_with("4,4,4,8,"));

    let boxes = [DyadicBox::new(4, 4, 4, 4).unwrap(), DyadicBox::new(8, 8, 8, 8).unwrap()];
    let sweep = lemma_ratio_sweep(Lemma::A1, &boxes, &[0.25, 0.5, 1.0], DEFAULT_ALARM).unwrap();
    assert_eq!(sweep.rows.len(), 6);
    assert!(sweep.alarms.is_empty());
    assert_eq!(sweep.csv().lines().count(), 7);
}

#[test]
fn gap_scan_small() {
    let r = min_gap_scan(4).unwrap();
    assert!((r.raw_min - 0.049888052764659).abs() < 1e-12);
    assert_eq!(r.raw_witness, [2, 4, 3, 3]);
    for v in [10, 20, 30] {
        assert!(min_gap_scan(v).unwrap().normalized_min > 0.0);
    }
}
