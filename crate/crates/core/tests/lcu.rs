mod common;

use common::{random_contract, random_model};
use nalgebra::DMatrix;
use num_complex::Complex64;
use vqpricer::fdm::{assemble_f, Grid};
use vqpricer::lcu::{
    build_cnz, build_cyc_dec, build_cyc_inc, build_dec, build_inc, build_j, decompose_boundary_generator, decompose_f,
    reconstruct, resource_report, TimeProfile,
};
use vqpricer::quantum::{apply_sequence, StateVector};

fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, f)
}

#[test]
fn register_building_blocks() {
    for n in 1..=4 {
        let dim = 1usize << n;
        let inc = from_fn(n, |i, j| (i == j + 1) as u8 as f64);
        let dec = from_fn(n, |i, j| (i + 1 == j) as u8 as f64);
        let cinc = from_fn(n, |i, j| (i == (j + 1) % dim) as u8 as f64);
        let cdec = from_fn(n, |i, j| (j == (i + 1) % dim) as u8 as f64);
        let cnz = from_fn(n, |i, j| {
            if i != j {
                0.0
            } else if i == dim - 1 {
                -1.0
            } else {
                1.0
            }
        });
        let j_op = from_fn(n, |i, j| if i == j { i as f64 } else { 0.0 });
        let cases = [
            ("inc", build_inc(n), inc),
            ("dec", build_dec(n), dec),
            ("cyc_inc", build_cyc_inc(n), cinc),
            ("cyc_dec", build_cyc_dec(n), cdec),
            ("cnz", build_cnz(n), cnz),
            ("j", build_j(n), j_op),
        ];
        for (name, sum, want) in cases {
            let got = reconstruct(&sum, 0.0).unwrap();
            assert!((got - want).amax() < 1e-12, "{name} n={n}");
        }
    }
}

#[test]
fn generator_reconstructs_for_random_markets() {
    for (d, q) in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1)] {
        for seed in 0..4 {
            let model = random_model(d, 10 + seed);
            let contract = random_contract(d, seed, seed % 2 == 1);
            let grid = Grid::for_contract(&contract, q).unwrap();
            let sys = assemble_f(&model, &contract, &grid).unwrap();
            let sum = decompose_f(&model, &contract, &grid).unwrap();
            assert!(sum.terms.iter().all(|t| t.profile == TimeProfile::Constant));
            let err = (reconstruct(&sum, 0.0).unwrap() - sys.f.to_dense()).amax();
            assert!(err < 1e-10, "d={d} q={q} seed={seed}: {err:e}");
        }
    }
}

#[test]
fn boundary_generator_builds_boundary_vector() {
    for (d, q) in [(1, 1), (1, 3), (2, 1), (2, 2), (3, 1)] {
        for seed in 0..3 {
            let model = random_model(d, 20 + seed);
            let contract = random_contract(d, 100 + seed, true);
            let grid = Grid::for_contract(&contract, q).unwrap();
            let sys = assemble_f(&model, &contract, &grid).unwrap();
            let g = decompose_boundary_generator(&model, &contract, &grid).unwrap();
            assert!(g.hadamard_prefix);
            for tau in [0.0, 0.5, 1.0] {
                let col = reconstruct(&g, tau).unwrap().column(0).into_owned();
                let want = sys.boundary_vector(tau);
                let err = col.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10, "d={d} q={q} seed={seed} tau={tau}: {err:e}");
            }
        }
    }
}

#[test]
fn knock_out_contract_has_no_boundary_terms() {
    let model = random_model(2, 3);
    let contract = random_contract(2, 3, false);
    let grid = Grid::for_contract(&contract, 2).unwrap();
    let g = decompose_boundary_generator(&model, &contract, &grid).unwrap();
    assert!(g.is_empty());
    assert_eq!(resource_report(&g, 0.01).terms, 0);
}

#[test]
fn every_term_is_unitary() {
    let model = random_model(2, 5);
    let contract = random_contract(2, 5, true);
    let grid = Grid::for_contract(&contract, 2).unwrap();
    let nq = grid.total_qubits();
    let amps: Vec<Complex64> =
        (0..1 << nq).map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64).cos())).collect();
    let psi = StateVector::from_amplitudes(amps).unwrap();
    for sum in [
        decompose_f(&model, &contract, &grid).unwrap(),
        decompose_boundary_generator(&model, &contract, &grid).unwrap(),
    ] {
        for k in 0..sum.len() {
            let mut s = psi.clone();
            apply_sequence(&mut s, &sum.term_gates(k)).unwrap();
            assert!((s.amp_norm() - psi.amp_norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn merged_terms_are_distinct() {
    let model = random_model(2, 8);
    let contract = random_contract(2, 8, true);
    let grid = Grid::for_contract(&contract, 3).unwrap();
    for sum in [
        decompose_f(&model, &contract, &grid).unwrap(),
        decompose_boundary_generator(&model, &contract, &grid).unwrap(),
    ] {
        for (i, a) in sum.terms.iter().enumerate() {
            assert!(a.coef != 0.0);
            for b in &sum.terms[i + 1..] {
                assert!(a.words != b.words || a.profile != b.profile);
            }
        }
        let rep = resource_report(&sum, 0.01);
        assert_eq!(rep.terms, sum.len());
        assert!(rep.max_gates_per_term as f64 >= rep.mean_gates_per_term);
    }
}
