mod common;

use std::sync::Arc;

use haarmul_core::operator::{materialize, Basis, LinearOperator, Multiplication};
use haarmul_core::paraproduct::{
    apply_paraproduct, build_nine_term_resolution, decompose_multiplication, product_formula_coefficient,
    product_formula_coefficients, HaarMultiplier, Paraproduct, ParaproductKind, QLabel,
};
use haarmul_core::symbol::SymbolSequence;
use haarmul_core::{analyze, AlphaIndex, GridSpec, StepFunction, StepFunction64};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    prop_oneof![(1u32..=6).prop_map(|l| (1, l)), (1u32..=3).prop_map(|l| (2, l)), (1u32..=2).prop_map(|l| (3, l))]
        .prop_map(|(d, l)| GridSpec::new(d, l).unwrap())
}

fn pair_strategy() -> impl Strategy<Value = (StepFunction64, StepFunction64)> {
    grid_strategy().prop_flat_map(|g| {
        let n = g.cell_count();
        (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n))
            .prop_map(move |(a, b)| (StepFunction::new(g, a).unwrap(), StepFunction::new(g, b).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn product_formula_matches_pointwise_product((f, g) in pair_strategy()) {
        let oracle = analyze(&(&f * &g));
        let fast = product_formula_coefficients(&f, &g).unwrap();
        for (slot, (c, a)) in f.grid().haar_labels().enumerate() {
            prop_assert!((fast[slot] - oracle.coeffs()[slot]).abs() < 1e-10);
            if slot < 8 {
                let direct = product_formula_coefficient(&f, &g, c, AlphaIndex(a)).unwrap();
                prop_assert!((direct - oracle.coeffs()[slot]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn multiplication_identity((f, g) in pair_strategy()) {
        let dec = decompose_multiplication(&g);
        let rebuilt = dec.apply(&f).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&(&g * &f)) < 1e-10);
    }

    #[test]
    fn paraproduct_adjoint_pairs((f, g) in pair_strategy(), seed in any::<u64>()) {
        let b = SymbolSequence::random(f.grid(), seed, -2.0, 2.0);
        for kind in ParaproductKind::ALL {
            let lhs = apply_paraproduct(kind, &b, &f).unwrap().inner(&g);
            let rhs = f.inner(&apply_paraproduct(kind.adjoint(), &b, &g).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn nine_terms_sum_to_conjugated_operator((f, w) in pair_strategy(), seed in any::<u64>()) {
        let w = w.map(|v| v.exp());
        let sigma = SymbolSequence::random_signs(f.grid(), seed);
        let res = build_nine_term_resolution(&sigma, &w).unwrap();
        let want = res.conjugated.apply(&f);
        prop_assert!(res.apply_sum(&f).max_abs_diff(&want) < 1e-10 * want.max_abs().max(1.0));
    }
}

#[test]
fn materialized_adjoints_are_transposes() {
    let g = GridSpec::new(2, 2).unwrap();
    let w = StepFunction::<f64>::random(g, 5, 0.2, 4.0);
    let sigma = SymbolSequence::random_signs(g, 9);
    let res = build_nine_term_resolution(&sigma, &w).unwrap();
    for (q, op) in &res.terms {
        let m = materialize(op, Basis::Cell).unwrap();
        let adj = common::cell_matrix(&g, |f| op.apply_adjoint(f));
        let mt = m.transpose();
        for i in 0..g.cell_count() {
            for j in 0..g.cell_count() {
                assert!((mt.get(i, j) - adj[i][j]).abs() < 1e-12, "{q} ({i},{j})");
            }
        }
    }
}

#[test]
fn multiplier_is_diagonal_in_haar_basis() {
    let g = GridSpec::new(1, 4).unwrap();
    let sigma = SymbolSequence::random(g, 2, -3.0, 3.0);
    let op = HaarMultiplier::new(Arc::new(sigma.clone()), "sigma");
    let cells = common::cell_matrix(&g, |f| op.apply(f));
    let m = common::to_haar_basis(&g, &cells);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j && i > 0 { sigma.values()[i - 1] } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn paraproduct_kinds_in_haar_basis() {
    // P00_b is diagonal with entries b; P01_b maps h_I to b_I <f>_E h_I; P10 is its transpose.
    let g = GridSpec::new(1, 3).unwrap();
    let b = Arc::new(SymbolSequence::random(g, 4, -1.0, 1.0));
    let diag = Paraproduct::new(ParaproductKind::Diagonal, b.clone(), "b");
    let avg = Paraproduct::new(ParaproductKind::Averaging, b.clone(), "b");
    let ind = Paraproduct::new(ParaproductKind::Indicator, b.clone(), "b");
    let md = common::to_haar_basis(&g, &common::cell_matrix(&g, |f| diag.apply(f)));
    let ma = common::to_haar_basis(&g, &common::cell_matrix(&g, |f| avg.apply(f)));
    let mi = common::to_haar_basis(&g, &common::cell_matrix(&g, |f| ind.apply(f)));
    for i in 0..g.cell_count() {
        for j in 0..g.cell_count() {
            let want = if i == j && i > 0 { b.values()[i - 1] } else { 0.0 };
            assert!((md[i][j] - want).abs() < 1e-12);
            assert!((ma[i][j] - mi[j][i]).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_weight_leaves_one_term() {
    let g = GridSpec::new(1, 5).unwrap();
    let w = StepFunction::constant(g, 3.0);
    let sigma = SymbolSequence::constant(g, 1.0);
    let res = build_nine_term_resolution(&sigma, &w).unwrap();
    let f = StepFunction::<f64>::random(g, 1, -1.0, 1.0);
    for (q, op) in &res.terms {
        let out = op.apply(&f);
        if *q == QLabel::parse("q_00_00").unwrap() {
            assert!(out.max_abs_diff(&f.without_mean()) < 1e-12);
        } else {
            assert!(out.max_abs() < 1e-12, "{q}");
        }
    }
}

#[test]
fn multiplication_operator_matches_cellwise_product() {
    let g = GridSpec::new(3, 1).unwrap();
    let w = StepFunction::<f64>::random(g, 8, 0.5, 2.0);
    let m = materialize(&Multiplication::new(w.clone(), "w"), Basis::Cell).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            assert_eq!(m.get(i, j), if i == j { w.cells()[i] } else { 0.0 });
        }
    }
}
