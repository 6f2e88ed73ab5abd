use std::f64::consts::PI;

use loglap_core::dump::{decode_field, encode_field};
use loglap_core::kernels::{
    compute_na, make_kernel, project_orthogonal, symbol_ratio_distance, Kernel, KernelFamily,
};
use loglap_core::nonlinearity::{offset_field, Family, Nonlinearity, OffsetProfile};
use loglap_core::solver::{apply_map_ta, contraction_factor, picard_solve, SolveOptions};
use loglap_core::spectral::{forward_ft, inverse_ft, Grid, RealField, SymbolSpec};
use proptest::prelude::*;

fn reference_kernel(grid: &Grid) -> Kernel {
    make_kernel(
        KernelFamily::Difference {
            w1: 1.0,
            w2: 2.0,
            c1: 1.0,
            a: 0.0,
        },
        grid,
    )
    .unwrap()
}

fn field_from(grid: Grid, seed_values: &[f64]) -> RealField {
    let values = (0..grid.len())
        .map(|j| seed_values[j % seed_values.len()] * (1.0 + (j as f64 * 0.37).sin()))
        .collect();
    RealField::new(grid, values).unwrap()
}

fn families() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::SaturatingSine),
        Just(Family::Rational),
        (0.1f64..3.0).prop_map(|knee| Family::ClippedLinear { knee }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ft_roundtrip_and_parseval(
        dim in 1usize..=3,
        values in prop::collection::vec(-10.0f64..10.0, 1..64),
        half_width in 0.5f64..20.0,
    ) {
        let n = [64, 16, 8][dim - 1];
        let g = Grid::new(dim, half_width, n).unwrap();
        let f = field_from(g, &values);
        let spectrum = forward_ft(&f).unwrap();
        let back = inverse_ft(&spectrum).unwrap();
        let err = back.sub(&f).unwrap().max_abs();
        prop_assert!(err <= 1e-12 * f.max_abs().max(1.0), "{err}");
        let (l2, hat_l2) = (f.l2(), spectrum.l2());
        prop_assert!((l2 - hat_l2).abs() <= 1e-12 * l2.max(1e-300), "{l2} {hat_l2}");
    }

    #[test]
    fn map_contracts_by_the_grid_factor(
        family in families(),
        gain in 0.0f64..0.3,
        v1 in prop::collection::vec(-5.0f64..5.0, 8),
        v2 in prop::collection::vec(-5.0f64..5.0, 8),
    ) {
        let g = Grid::new(1, 20.0, 256).unwrap();
        let k = reference_kernel(&g);
        let spec = SymbolSpec::with_default_eta(0.0, &g).unwrap();
        let h = offset_field(OffsetProfile::Gaussian { amplitude: 0.5, width: 1.0 }, &g).unwrap();
        let nl = Nonlinearity::new(family, gain, h).unwrap();
        let (a, b) = (field_from(g, &v1), field_from(g, &v2));
        let ta = apply_map_ta(&a, &k, &nl, &spec).unwrap();
        let tb = apply_map_ta(&b, &k, &nl, &spec).unwrap();
        let est = compute_na(&k, &spec);
        let q_discrete = contraction_factor(1, est.grid_value, gain);
        let lhs = ta.sub(&tb).unwrap().l2();
        prop_assert!(lhs <= q_discrete * a.sub(&b).unwrap().l2() + 1e-10);

        // norm bound with the same constant
        let rhs = (2.0 * PI).sqrt() * est.grid_value * nl.eval(&a).unwrap().l2();
        prop_assert!(ta.l2() <= rhs + 1e-10, "{} > {rhs}", ta.l2());
    }

    #[test]
    fn ratio_distance_is_a_metric(
        w1 in 0.4f64..0.9,
        dw in 0.1f64..1.0,
        c in 0.1f64..2.0,
    ) {
        let g = Grid::new(1, 20.0, 512).unwrap();
        let spec = SymbolSpec::with_default_eta(0.0, &g).unwrap();
        let make = |w1: f64, w2: f64, c1: f64| {
            make_kernel(KernelFamily::Difference { w1, w2, c1, a: 0.0 }, &g).unwrap()
        };
        let (x, y, z) = (make(w1, w1 + dw, c), make(w1, w1 + 2.0 * dw, c), make(1.0, 2.0, 1.0));
        let dxy = symbol_ratio_distance(&x, &y, &spec).unwrap();
        let dyz = symbol_ratio_distance(&y, &z, &spec).unwrap();
        let dxz = symbol_ratio_distance(&x, &z, &spec).unwrap();
        prop_assert_eq!(symbol_ratio_distance(&x, &x, &spec).unwrap(), 0.0);
        prop_assert!((dxy - symbol_ratio_distance(&y, &x, &spec).unwrap()).abs() <= 1e-15 * dxy);
        prop_assert!(dxz <= dxy + dyz + 1e-14);
        // N_a is a sup norm, so it moves by at most the distance
        let gap = (compute_na(&x, &spec).value - compute_na(&z, &spec).value).abs();
        prop_assert!(gap <= dxz + 1e-12);
    }

    #[test]
    fn dumps_roundtrip(
        dim in 1usize..=3,
        values in prop::collection::vec(-1e6f64..1e6, 1..32),
        half_width in 0.1f64..100.0,
    ) {
        let g = Grid::new(dim, half_width, 8).unwrap();
        let f = field_from(g, &values);
        let back = decode_field(&encode_field(&f)).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.values(), f.values());
    }
}

#[test]
fn fixed_point_is_independent_of_start() {
    let g = Grid::new(1, 20.0, 1024).unwrap();
    let k = reference_kernel(&g);
    let spec = SymbolSpec::new(0.0, 0.1).unwrap();
    let h = offset_field(
        OffsetProfile::Gaussian {
            amplitude: 0.5,
            width: 1.0,
        },
        &g,
    )
    .unwrap();
    let nl = Nonlinearity::new(Family::SaturatingSine, 0.1, h).unwrap();
    let opts = SolveOptions::default();
    let from_zero = picard_solve(&k, &nl, &spec, None, &opts).unwrap();
    let start =
        RealField::from_fn(g, |x| 3.0 * (2.0 * x[0]).cos() * (-x[0].abs() / 5.0).exp()).unwrap();
    let from_other = picard_solve(&k, &nl, &spec, Some(&start), &opts).unwrap();
    assert!(from_zero.converged && from_other.converged);
    let gap = from_zero
        .final_field
        .sub(&from_other.final_field)
        .unwrap()
        .l2();
    assert!(gap <= 10.0 * opts.tol, "{gap}");
    for rep in [&from_zero, &from_other] {
        assert!(rep.ratios_ok && rep.apriori_ok);
    }
}

#[test]
fn projected_kernels_pass_the_certificate() {
    let g = Grid::new(1, 20.0, 1024).unwrap();
    let spec = SymbolSpec::new(0.0, 0.1).unwrap();
    let raw = make_kernel(
        KernelFamily::Gaussian {
            width: 1.0,
            amplitude: 1.0,
        },
        &g,
    )
    .unwrap();
    let k = project_orthogonal(&raw, &spec, 1.0).unwrap();
    let est = compute_na(&k, &spec);
    assert!(est.orth_residual <= k.admissibility_threshold());
    let q = contraction_factor(1, est.value, 0.1);
    assert!(q < 0.9, "{q}");
}
