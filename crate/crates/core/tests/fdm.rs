mod common;

use common::{dense_oracle, reference_contract, reference_model, random_contract, random_model};
use nalgebra::{DMatrix, DVector};
use vqpricer::fdm::{assemble_f, euler_solve, payoff_vector, DiscretizedBspde, Grid};
use vqpricer::market::{BoundaryKind, DerivativeContract, MarketModel};

#[test]
fn assembly_matches_direct_stencil_loop() {
    for d in [1, 2] {
        for qubits in [1, 2, 3] {
            for seed in 0..3 {
                let model = random_model(d, seed);
                let contract = random_contract(d, seed, seed > 0);
                let grid = Grid::for_contract(&contract, qubits).unwrap();
                let sys = assemble_f(&model, &contract, &grid).unwrap();
                let (f, cc, cd) = dense_oracle(&model, &contract, &grid);
                let err = (sys.f.to_dense() - &f).amax();
                assert!(err <= 1e-10 * f.amax().max(1.0), "d={d} q={qubits} seed={seed}: {err:e}");
                for tau in [0.0, 0.3, 1.0] {
                    let disc = (-model.r * tau).exp();
                    let c = sys.boundary_vector(tau);
                    for k in 0..c.len() {
                        let want = cc[k] + disc * cd[k];
                        assert!((c[k] - want).abs() <= 1e-10 * want.abs().max(1.0), "C[{k}]({tau})");
                    }
                }
            }
        }
    }
}

/// `(I - dt/2 F) V' = (I + dt/2 F) V + dt C(tau + dt/2)`.
fn crank_nicolson(sys: &DiscretizedBspde, v0: &[f64], dtau: f64, tau_end: f64) -> Vec<f64> {
    let f = sys.f.to_dense();
    let n = f.nrows();
    let steps = (tau_end / dtau).round() as usize;
    let dt = tau_end / steps as f64;
    let lhs = (DMatrix::identity(n, n) - &f * (dt / 2.0)).lu();
    let rhs = DMatrix::identity(n, n) + &f * (dt / 2.0);
    let mut v = DVector::from_column_slice(v0);
    for s in 0..steps {
        let c = DVector::from_vec(sys.boundary_vector((s as f64 + 0.5) * dt));
        v = lhs.solve(&(&rhs * &v + c * dt)).unwrap();
    }
    v.as_slice().to_vec()
}

fn linear_upper() -> DerivativeContract {
    let mut c = reference_contract();
    c.upper_kind = vec![BoundaryKind::Linear];
    c
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    num / b.iter().map(|y| y * y).sum::<f64>().sqrt()
}

#[test]
fn euler_agrees_with_crank_nicolson() {
    let model = reference_model();
    for contract in [reference_contract(), linear_upper()] {
        let grid = Grid::for_contract(&contract, 4).unwrap();
        let sys = assemble_f(&model, &contract, &grid).unwrap();
        let v0 = payoff_vector(&contract, &grid).unwrap();
        let eu = euler_solve(&sys, &v0, 1e-4, 0.5, &[]).unwrap();
        let cn = crank_nicolson(&sys, &v0, 1e-4, 0.5);
        assert!(rel_err(&eu.final_state, &cn) < 1e-3);
        assert!(eu.stability_warning.is_none());
    }
}

#[test]
fn euler_converges_at_first_order() {
    let model = reference_model();
    for contract in [reference_contract(), linear_upper()] {
        let grid = Grid::for_contract(&contract, 4).unwrap();
        let sys = assemble_f(&model, &contract, &grid).unwrap();
        let v0 = payoff_vector(&contract, &grid).unwrap();
        let reference = crank_nicolson(&sys, &v0, 1e-5, 0.4);
        let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| rel_err(&euler_solve(&sys, &v0, dt, 0.4, &[]).unwrap().final_state, &reference))
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.8..2.2).contains(&ratio), "ratio {ratio} from {errs:?}");
        }
    }
}

#[test]
fn unstable_step_warns_then_diverges() {
    let model = MarketModel::single(0.05, 0.5, 1.0).unwrap();
    let contract = reference_contract();
    let grid = Grid::for_contract(&contract, 5).unwrap();
    let sys = assemble_f(&model, &contract, &grid).unwrap();
    let v0 = payoff_vector(&contract, &grid).unwrap();
    let dt = 4.0 * sys.stability_bound();
    let err = euler_solve(&sys, &v0, dt, 200.0 * dt, &[]).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let ok = euler_solve(&sys, &v0, dt * 0.9 / 4.0 * 2.0, 0.0, &[]).unwrap();
    assert!(ok.stability_warning.is_some());
}

#[test]
fn snapshots_land_on_requested_times() {
    let model = reference_model();
    let contract = reference_contract();
    let grid = Grid::for_contract(&contract, 3).unwrap();
    let sys = assemble_f(&model, &contract, &grid).unwrap();
    let v0 = payoff_vector(&contract, &grid).unwrap();
    let taus = [0.0, 0.01234, 0.05, 0.1];
    let full = euler_solve(&sys, &v0, 1e-3, 0.1, &taus).unwrap();
    for &t in &taus {
        assert!(full.at(t).is_some(), "{t}");
    }
    assert_eq!(full.at(0.0).unwrap(), v0.as_slice());
    // off-grid snapshots split one step; later nodes stay on multiples of dtau
    let plain = euler_solve(&sys, &v0, 1e-3, 0.05, &[0.02]).unwrap();
    assert_eq!(plain.steps, 50);
    assert_eq!(full.steps, 101);
    assert!(rel_err(full.at(0.05).unwrap(), &plain.final_state) < 1e-4);
    let again = euler_solve(&sys, &v0, 1e-3, 0.1, &[0.05]).unwrap();
    assert_eq!(again.at(0.05).unwrap(), plain.final_state.as_slice());
}
