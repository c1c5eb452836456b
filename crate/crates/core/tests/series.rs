use momentlab::series::{delta, eisenstein, eta_product_24, multiply, power, schoolbook_multiply, QSeries};
use proptest::prelude::*;
use rug::Integer;

fn series(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<i64>> {
    len.prop_flat_map(|n| prop::collection::vec(-1_000_000_000i64..1_000_000_000, n))
}

fn q(c: &[i64]) -> QSeries {
    QSeries::from_i64(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_matches_schoolbook(a in series(1..300), seed in any::<u64>()) {
        let b: Vec<i64> = a.iter().enumerate().map(|(i, &x)| x.wrapping_mul(seed as i64 | 1).wrapping_add(i as i64) % 1_000_000_007).collect();
        let (a, b) = (q(&a), q(&b));
        prop_assert_eq!(multiply(&a, &b).unwrap(), schoolbook_multiply(&a, &b).unwrap());
    }

    #[test]
    fn product_commutes(a in series(60..120)) {
        let b: Vec<i64> = a.iter().rev().cloned().collect();
        let (a, b) = (q(&a), q(&b));
        prop_assert_eq!(multiply(&a, &b).unwrap(), multiply(&b, &a).unwrap());
    }

    #[test]
    fn product_associates(a in series(50..100)) {
        let n = a.len();
        let b: Vec<i64> = (0..n as i64).map(|i| (i * 7919) % 1013 - 500).collect();
        let c: Vec<i64> = a.iter().map(|x| x / 3 + 1).collect();
        let (a, b, c) = (q(&a), q(&b), q(&c));
        let left = multiply(&multiply(&a, &b).unwrap(), &c).unwrap();
        let right = multiply(&a, &multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn power_is_repeated_product(a in series(1..80), e in 1u32..6) {
        let a = q(&a);
        let mut expect = a.clone();
        for _ in 1..e {
            expect = schoolbook_multiply(&expect, &a).unwrap();
        }
        prop_assert_eq!(power(&a, e).unwrap(), expect);
    }
}

#[test]
fn short_products() {
    assert_eq!(multiply(&q(&[1, 1]), &q(&[1, 1])).unwrap(), q(&[1, 2]));
    assert!(multiply(&q(&[1, 1]), &q(&[1, 1, 1])).is_err());
    assert!(QSeries::new(Vec::new()).is_err());
    assert!(power(&q(&[1, 1]), 0).is_err());
}

#[test]
fn large_operands_stay_exact() {
    let big = Integer::from(Integer::u_pow_u(10, 60));
    let a = QSeries::new((0..200).map(|i| Integer::from(&big + i)).collect()).unwrap();
    let b = QSeries::new((0..200).map(|i| Integer::from(&big * (i % 5 + 1)) * -1).collect()).unwrap();
    assert_eq!(multiply(&a, &b).unwrap(), schoolbook_multiply(&a, &b).unwrap());
}

#[test]
fn eisenstein_prefixes() {
    let e4 = eisenstein(4, 4).unwrap();
    assert_eq!(e4.coeffs(), &[1, 240, 2160, 6720].map(Integer::from)[..]);
    let e6 = eisenstein(6, 3).unwrap();
    assert_eq!(e6.coeffs(), &[1, -504, -16632].map(Integer::from)[..]);
    assert!(eisenstein(12, 5).is_err());
}

#[test]
fn delta_routes_agree() {
    let d = delta(3000).unwrap();
    assert_eq!(d, eta_product_24(3000).unwrap());
    let tau = [0, 1, -24, 252, -1472, 4830, -6048, -16744];
    for (n, &t) in tau.iter().enumerate() {
        assert_eq!(*d.coeff(n), t);
    }
}
