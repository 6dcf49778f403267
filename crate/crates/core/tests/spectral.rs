mod common;

use std::sync::Arc;

use haarmul_core::linalg::DenseMatrix;
use haarmul_core::operator::{materialize, Basis, Composition, DenseOperator, LinearOperator, Multiplication, SharedOperator};
use haarmul_core::paraproduct::{build_nine_term_resolution, HaarMultiplier, QLabel};
use haarmul_core::spectral::{generalized_max_rayleigh, operator_norm, DiagonalForm, MethodUsed, NormMethod, NormOptions, QuadraticForm};
use haarmul_core::symbol::SymbolSequence;
use haarmul_core::{GridSpec, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_operator(seed: u64) -> SharedOperator<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = if seed % 2 == 0 { GridSpec::new(1, 8).unwrap() } else { GridSpec::new(2, 4).unwrap() };
    match seed % 3 {
        0 => {
            let n = g.cell_count();
            Arc::new(DenseOperator::new(g, DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))).unwrap())
        }
        1 => {
            let sigma = Arc::new(SymbolSequence::random(g, rng.gen(), -1.0, 1.0));
            let ops: Vec<SharedOperator<f64>> = vec![
                Arc::new(Multiplication::new(StepFunction::random(g, rng.gen(), 0.1, 3.0), "u")),
                Arc::new(HaarMultiplier::new(sigma, "sigma")),
                Arc::new(Multiplication::new(StepFunction::random(g, rng.gen(), 0.1, 3.0), "v")),
            ];
            Arc::new(Composition::new(ops).unwrap())
        }
        _ => {
            let w = StepFunction::<f64>::random(g, rng.gen(), 0.0, 1.0).map(|u| (4.0 * u).exp());
            let sigma = SymbolSequence::random_signs(g, rng.gen());
            let res = build_nine_term_resolution(&sigma, &w).unwrap();
            let q = QLabel::all()[rng.gen_range(0..9)];
            Arc::new(res.term(q).clone())
        }
    }
}

#[test]
fn power_iteration_agrees_with_dense() {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let op = random_operator(seed);
        let dense = operator_norm(op.as_ref(), &NormOptions::default().with_method(NormMethod::Dense)).unwrap();
        let power = operator_norm(op.as_ref(), &NormOptions::default().with_method(NormMethod::Power)).unwrap();
        assert_eq!(dense.method, MethodUsed::Dense);
        assert_eq!(power.method, MethodUsed::PowerIteration);
        let rel = (dense.value - power.value).abs() / dense.value;
        worst = worst.max(rel);
        assert!(rel < 1e-6, "seed {seed}: dense {} power {} ({} iterations)", dense.value, power.value, power.iterations);
    }
    eprintln!("worst relative gap {worst:e}");
}

#[test]
fn multiplier_norm_is_sup_of_symbol() {
    for l in 1..=8 {
        let g = GridSpec::new(1, l).unwrap();
        for seed in 0..3 {
            let sigma = SymbolSequence::<f64>::random(g, seed * 31 + l as u64, -2.0, 2.0);
            let op = HaarMultiplier::new(Arc::new(sigma.clone()), "sigma");
            let r = operator_norm(&op, &NormOptions::default().mean_zero().with_method(NormMethod::Dense)).unwrap();
            let want = sigma.sup_norm();
            assert!((r.value - want).abs() <= 1e-6 * want, "L={l}: {} vs {want}", r.value);
        }
    }
}

#[test]
fn dense_norm_matches_jacobi_oracle() {
    let g = GridSpec::new(2, 2).unwrap();
    for seed in 0..6u64 {
        let w = StepFunction::<f64>::random(g, seed, 0.1, 10.0);
        let sigma = SymbolSequence::random_signs(g, seed + 100);
        let res = build_nine_term_resolution(&sigma, &w).unwrap();
        for (q, op) in &res.terms {
            let oracle = common::top_singular_value(&common::cell_matrix(&g, |f| op.apply(f)));
            let got = operator_norm(op, &NormOptions::default()).unwrap().value;
            assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0), "{q}: {got} vs {oracle}");
        }
    }
}

#[test]
fn witness_certifies_the_value() {
    for seed in 0..20 {
        let op = random_operator(seed);
        for method in [NormMethod::Dense, NormMethod::Power] {
            let opts = NormOptions::default().with_method(method);
            let r = operator_norm(op.as_ref(), &opts).unwrap();
            let achieved = op.apply(&r.witness).norm() / r.witness.norm();
            assert!(achieved >= r.value - r.residual, "seed {seed}");
            assert!(achieved >= r.value * (1.0 - 10.0 * opts.tol), "seed {seed} {method:?}: {achieved} vs {}", r.value);
        }
    }
}

#[test]
fn power_iteration_is_deterministic() {
    let op = random_operator(4);
    let opts = NormOptions { seed: 17, ..NormOptions::default().with_method(NormMethod::Power) };
    let a = operator_norm(op.as_ref(), &opts).unwrap();
    let b = operator_norm(op.as_ref(), &opts).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.witness, b.witness);
}

#[test]
fn generalized_rayleigh_matches_cholesky_oracle() {
    // D_w against M_w on the mean-zero span, and the reverse.
    for (d, l, seed) in [(1, 4, 1u64), (1, 6, 2), (2, 2, 3), (2, 3, 4)] {
        let g = GridSpec::new(d, l).unwrap();
        let w = StepFunction::<f64>::random(g, seed, 0.0, 1.0).map(|u| (3.0 * u).exp());
        let cache = haarmul_core::CubeSumCache::new(&w);
        let dw: Vec<f64> = g.haar_labels().map(|(c, _)| cache.cube_average(c)).collect();
        let mw = common::drop_first(&common::to_haar_basis(&g, &common::cell_matrix(&g, |f| &w * f)));
        let n = dw.len();
        let mut dmat = common::zeros(n, n);
        for i in 0..n {
            dmat[i][i] = dw[i];
        }
        let opts = NormOptions::default().mean_zero();
        let upper = generalized_max_rayleigh(
            g,
            QuadraticForm::Diagonal(DiagonalForm::Haar { mean: None, coeffs: dw.clone() }),
            DiagonalForm::Cell(w.cells().to_vec()),
            &opts,
        )
        .unwrap();
        let lower = generalized_max_rayleigh(
            g,
            QuadraticForm::Diagonal(DiagonalForm::Cell(w.cells().to_vec())),
            DiagonalForm::Haar { mean: None, coeffs: dw.clone() },
            &opts,
        )
        .unwrap();
        let want_upper = common::generalized_max_eigenvalue(&dmat, &mw);
        let want_lower = common::generalized_max_eigenvalue(&mw, &dmat);
        assert!((upper.value - want_upper).abs() < 1e-9 * want_upper, "d={d} L={l}: {} vs {want_upper}", upper.value);
        assert!((lower.value - want_lower).abs() < 1e-9 * want_lower, "d={d} L={l}: {} vs {want_lower}", lower.value);
    }
}

#[test]
fn generalized_rayleigh_with_operator_numerator() {
    let g = GridSpec::new(1, 3).unwrap();
    let n = g.cell_count();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let s = r.transpose().matmul(&r);
    let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
    let a_op: SharedOperator<f64> = Arc::new(DenseOperator::new(g, s.clone()).unwrap());
    let got = generalized_max_rayleigh(g, QuadraticForm::Operator(a_op), DiagonalForm::Cell(b.clone()), &NormOptions::default()).unwrap();
    let a: common::Mat = (0..n).map(|i| (0..n).map(|j| s.get(i, j)).collect()).collect();
    let mut bm = common::zeros(n, n);
    for i in 0..n {
        bm[i][i] = b[i];
    }
    let want = common::generalized_max_eigenvalue(&a, &bm);
    assert!((got.value - want).abs() < 1e-9 * want, "{} vs {want}", got.value);
}

#[test]
fn cell_and_haar_materializations_share_a_norm() {
    let op = random_operator(1);
    let mc = materialize(op.as_ref(), Basis::Cell).unwrap();
    let mh = materialize(op.as_ref(), Basis::Haar).unwrap();
    let fro = |m: &DenseMatrix<f64>| (0..m.rows()).flat_map(|i| m.row(i).to_vec()).map(|v| v * v).sum::<f64>().sqrt();
    assert!((fro(&mc) - fro(&mh)).abs() < 1e-9 * fro(&mc));
}
