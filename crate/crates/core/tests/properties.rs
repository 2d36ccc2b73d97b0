use annulus_radial::config::ProblemConfig;
use annulus_radial::geometry::{AnnulusDomain, Extremum};
use annulus_radial::scan::{scan_extremum, BoxSpec, Interval, ScanConfig};
use annulus_radial::{Expr, Point};
use proptest::prelude::*;

fn config_text(n: u32, r0: f64, r1: f64, a1: f64, b1: f64, rho: f64, grid: usize) -> String {
    format!(
        "[domain]\nn = {n}\nR0 = {r0:?}\nR1 = {r1:?}\n\n[windows]\na1 = {a1:?}\nb1 = {b1:?}\na2 = 0.5\nb2 = 1.0\n\n\
         [thresholds]\nrho1 = {rho:?}\nrho2 = 0.2\ns1 = 3.0\ns2 = 4.0\nZmax = 50.0\n\n\
         [f]\nf1 = \"u^2 + exp(-r)\"\nf2 = \"v\"\n\n[numerics]\ngrid = {grid}\nanderson_depth = 3\n"
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(
        n in 2u32..8,
        r0 in 0.01f64..10.0,
        ratio in 1.01f64..50.0,
        a1 in 0.01f64..0.4,
        width in 0.05f64..0.5,
        rho in 1e-6f64..1.0,
        half_grid in 32usize..600,
    ) {
        let text = config_text(n, r0, r0 * ratio, a1, a1 + width, rho, 2 * half_grid);
        let cfg = ProblemConfig::from_toml_str(&text).unwrap();
        let again = ProblemConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.to_toml_string(), cfg.to_toml_string());
    }

    #[test]
    fn p_is_monotone_so_extremes_sit_at_endpoints(
        n in 2u32..7,
        r0 in 0.05f64..5.0,
        ratio in 1.05f64..20.0,
        a in 0.0f64..0.9,
        w in 0.01f64..0.1,
    ) {
        let d = AnnulusDomain::new(n, r0, r0 * ratio).unwrap();
        let b = (a + w).min(1.0);
        let exact_sup = d.extremize_p(a, b, Extremum::Sup).unwrap();
        let exact_inf = d.extremize_p(a, b, Extremum::Inf).unwrap();
        let sampled_sup = d.extremize_p_sampled(a, b, Extremum::Sup, 257).unwrap();
        let sampled_inf = d.extremize_p_sampled(a, b, Extremum::Inf, 257).unwrap();
        prop_assert!((exact_sup - sampled_sup).abs() <= 1e-12 * exact_sup);
        prop_assert!((exact_inf - sampled_inf).abs() <= 1e-12 * exact_inf);
    }

    /// Positive combinations of increasing functions of each axis reach their
    /// extremes exactly at the corners.
    #[test]
    fn monotone_expressions_hit_corners_exactly(
        c in prop::collection::vec(0.01f64..3.0, 4),
        lo in prop::collection::vec(0.0f64..2.0, 5),
        width in prop::collection::vec(0.1f64..3.0, 5),
    ) {
        let src = format!(
            "{} * r^2 + {} * exp(u) + {} * sqrt(v) + {} * atan(gu) * (1 + gv)",
            c[0], c[1], c[2], c[3]
        );
        let f = Expr::parse(&src).unwrap();
        let ax = |i: usize| Interval::new(lo[i], lo[i] + width[i]);
        let bx = BoxSpec::new(ax(0), ax(1), ax(2), ax(3), ax(4));
        let cfg = ScanConfig { points_per_axis: 7, ..ScanConfig::default() };
        let hi = Point::new(ax(0).hi, ax(1).hi, ax(2).hi, ax(3).hi, ax(4).hi);
        let low = Point::new(ax(0).lo, ax(1).lo, ax(2).lo, ax(3).lo, ax(4).lo);
        prop_assert_eq!(scan_extremum(&f, &bx, Extremum::Sup, &cfg).unwrap().value, f.eval(&hi).unwrap());
        prop_assert_eq!(scan_extremum(&f, &bx, Extremum::Inf, &cfg).unwrap().value, f.eval(&low).unwrap());
    }
}
