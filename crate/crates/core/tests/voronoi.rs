use momentlab::cuspform::CoefficientTable;
use momentlab::voronoi::{
    decompose_s, decompose_s_direct, resonance_sum_r, sample_grid, truncated_a, truncation_error_profile,
};
use proptest::prelude::*;
use rug::Float;
use std::sync::OnceLock;

fn table() -> &'static CoefficientTable {
    static T: OnceLock<CoefficientTable> = OnceLock::new();
    T.get_or_init(|| CoefficientTable::new(12, 20_000).unwrap())
}

fn rel(a: &Float, b: &Float) -> f64 {
    let d = Float::with_val(a.prec(), a - b).abs();
    (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncated_is_rescaled_r(x in 100.0f64..20_000.0, n in 1u64..100) {
        let prec = 128;
        let a = truncated_a(table(), x, n, prec).unwrap();
        let r = resonance_sum_r(table(), x, n, prec).unwrap();
        let scaled = Float::with_val(prec, Float::with_val(prec, 2).sqrt() * Float::with_val(prec, rug::float::Constant::Pi)) * a;
        prop_assert!(rel(&scaled, &r) <= (-(prec as f64) / 2.0).exp2());
    }

    #[test]
    fn fast_decomposition_matches_direct(x in 2.0f64..5000.0, y in 1u64..14) {
        let fast = decompose_s(table(), x, y, 128).unwrap();
        let direct = decompose_s_direct(table(), x, y, 128).unwrap();
        prop_assert!(fast.residual.to_f64() < 1e-25);
        let scale = fast.r4.to_f64().abs().max(1e-300);
        for i in 0..4 {
            let d = Float::with_val(128, &fast.s[i] - &direct.s[i]).abs().to_f64();
            prop_assert!(d <= 1e-25 * scale, "piece {}", i + 1);
        }
    }
}

#[test]
fn truncated_formula_error_at_ten_thousand() {
    let x = 10_000.5;
    let approx = truncated_a(table(), x, 1000, 128).unwrap();
    let exact = table().partial_sum(x).unwrap();
    let err = Float::with_val(128, approx - exact).abs().to_f64();
    assert!(err <= 10.0 * x.powi(6) / 1000f64.sqrt(), "{err:e}");
}

#[test]
fn rejects_bad_input() {
    assert!(truncated_a(table(), 50.0, 51, 128).is_err());
    assert!(truncated_a(table(), 1.0, 1, 128).is_err());
    assert!(truncated_a(table(), 100.0, 1, 32).is_err());
    assert!(decompose_s(table(), 100.0, 2001, 128).is_err());
    assert!(sample_grid(10.0, 5.0, 10, 1).is_err());
}

#[test]
fn grid_avoids_integers() {
    let g = sample_grid(1000.0, 2000.0, 300, 7).unwrap();
    assert_eq!(g.len(), 300);
    assert_eq!(g, sample_grid(1000.0, 2000.0, 300, 7).unwrap());
    for x in g {
        assert!((1000.0..=2000.0).contains(&x));
        let f = x - x.floor();
        assert!((0.09..=0.91).contains(&f), "{x}");
    }
}

#[test]
fn profile_shrinks_with_n() {
    let p = truncation_error_profile(table(), (5000.0, 10_000.0), &[16, 64, 256, 1024], 40, 3, 128).unwrap();
    assert!(p.rows.first().unwrap().max_rel_error > p.rows.last().unwrap().max_rel_error);
    assert!(p.slope().unwrap() < 0.0);
    let csv = p.csv();
    assert_eq!(csv.lines().next().unwrap(), "N,max_rel_error");
    assert_eq!(csv.lines().count(), 5);
}
