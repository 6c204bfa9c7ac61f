use proptest::prelude::*;
use tlfrac::fraccalc::{frac_integral_expansion, frac_integral_schauder_left};
use tlfrac::stieltjes::rs_integral_default;
use tlfrac::{DyadicIndex, HolderExpansion};

fn expansion(hurst: f64, depth: u32) -> impl Strategy<Value = HolderExpansion> {
    let levels: Vec<_> = (0..=depth).map(|m| prop::collection::vec(-1.0f64..1.0, 1usize << m)).collect();
    (-2.0f64..2.0, -2.0f64..2.0, levels).prop_map(move |(f0, f1, levels)| HolderExpansion::new(hurst, f0, f1, levels).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_index_round_trip(n in 1u64..(1 << 40)) {
        let idx = DyadicIndex::from_flat(n).unwrap();
        prop_assert_eq!(idx.flat(), n);
        prop_assert!(idx.shift() < 1 << idx.level());
    }

    #[test]
    fn samples_round_trip_on_their_grid(samples in prop::collection::vec(-5.0f64..5.0, 65), hurst in 0.05f64..1.0) {
        let x = HolderExpansion::from_dyadic_samples(&samples, hurst).unwrap();
        for (j, &v) in samples.iter().enumerate() {
            prop_assert!((x.eval(j as f64 / 64.0) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
        prop_assert_eq!(x.sample(6).len(), 65);
    }

    #[test]
    fn json_round_trip_is_exact(x in expansion(0.37, 5)) {
        let back = HolderExpansion::from_json(&x.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn combine_is_pointwise(x in expansion(0.6, 4), y in expansion(0.6, 4), a in -3.0f64..3.0, b in -3.0f64..3.0, t in 0.0f64..=1.0) {
        let z = x.combine(a, &y, b).unwrap();
        prop_assert!((z.eval(t) - (a * x.eval(t) + b * y.eval(t))).abs() <= 1e-12);
    }

    #[test]
    fn integral_of_tent_is_positive_and_monotone(m in 0u32..12, frac in 0.0f64..1.0, alpha in 0.01f64..3.0, t in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let idx = DyadicIndex::new(m, ((1u64 << m) as f64 * frac) as u64).unwrap();
        let a = frac_integral_schauder_left(alpha, idx, t).unwrap();
        prop_assert!(a >= -1e-15);
        // I^α of a nonnegative function is nondecreasing once α >= 1.
        if alpha >= 1.0 {
            let b = frac_integral_schauder_left(alpha, idx, (t + dt).min(1.0)).unwrap();
            prop_assert!(b >= a - 1e-15);
        }
    }

    #[test]
    fn integral_is_linear(x in expansion(0.7, 4), y in expansion(0.7, 4), alpha in 0.05f64..2.0, t in 0.0f64..=1.0) {
        let z = x.combine(2.0, &y, -0.5).unwrap();
        let lhs = frac_integral_expansion(&z, alpha, t, 4).unwrap();
        let rhs = 2.0 * frac_integral_expansion(&x, alpha, t, 4).unwrap()
            - 0.5 * frac_integral_expansion(&y, alpha, t, 4).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11);
    }

    #[test]
    fn stieltjes_increment_ignores_driver_shift(f in expansion(0.8, 5), g in expansion(0.7, 5), s in 0.0f64..=1.0, u in 0.0f64..=1.0) {
        // ∫_s^u f dg does not change when a constant is added to g.
        let (s, u) = if s <= u { (s, u) } else { (u, s) };
        let whole = rs_integral_default(&f, &g, u).unwrap() - rs_integral_default(&f, &g, s).unwrap();
        let gs = g.eval(s);
        let shifted = g.combine(1.0, &HolderExpansion::affine(0.7, -gs, -gs, 0).unwrap(), 1.0).unwrap();
        let again = rs_integral_default(&f, &shifted, u).unwrap() - rs_integral_default(&f, &shifted, s).unwrap();
        prop_assert!((whole - again).abs() <= 1e-11);
    }
}
