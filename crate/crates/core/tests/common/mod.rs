#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqpricer::fdm::Grid;
use vqpricer::lcu::{reconstruct, WeightedUnitarySum};
use vqpricer::market::{BoundaryKind, DerivativeContract, MarketModel};
use vqpricer::quantum::{
    ansatz_state, hadamard_test_exact, hadamard_test_probability, AnsatzCircuit, Component, GateOp, StateVector,
};
use vqpricer::vqs::derivative_state;

pub fn reference_model() -> MarketModel {
    MarketModel::single(0.001, 0.3, 1.0).unwrap()
}

pub fn reference_contract() -> DerivativeContract {
    DerivativeContract::double_barrier_call(1.0, 0.5, 2.0, 1.0)
}

/// Random model with a valid correlation matrix (equicorrelated).
pub fn random_model(d: usize, seed: u64) -> MarketModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = rng.random_range(0.001..0.08);
    let sigma: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..0.5)).collect();
    let c = rng.random_range(-0.4..0.8);
    let rho = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { c }).collect()).collect();
    let s0 = (0..d).map(|_| rng.random_range(0.9..1.1)).collect();
    MarketModel::new(r, sigma, rho, s0).unwrap()
}

/// Basket call with random face kinds; at least one face is linear when
/// `mixed` is set.
pub fn random_contract(d: usize, seed: u64, mixed: bool) -> DerivativeContract {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut kind = |force: bool| {
        if force || (mixed && rng.random_bool(0.5)) {
            BoundaryKind::Linear
        } else {
            BoundaryKind::KnockOut
        }
    };
    let lower_kind: Vec<_> = (0..d).map(|_| kind(false)).collect();
    let upper_kind: Vec<_> = (0..d).map(|i| kind(mixed && i == 0)).collect();
    let mut weights = vec![-1.0];
    weights.extend((0..d).map(|_| 1.0 / d as f64));
    DerivativeContract { maturity: 1.0, weights, lower: vec![0.5; d], upper: vec![2.0; d], lower_kind, upper_kind }
}

pub fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// `F` and `(c_const, c_disc)` from a direct loop over grid points and
/// their stencil neighbours, with exterior neighbours turned into ghost
/// values.
pub fn dense_oracle(
    model: &MarketModel,
    contract: &DerivativeContract,
    grid: &Grid,
) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let (d, n, len) = (grid.d(), grid.n_gr() as isize, grid.len());
    let mut f = DMatrix::zeros(len, len);
    let mut cc = vec![0.0; len];
    let mut cd = vec![0.0; len];
    for k in 0..len {
        let idx: Vec<isize> = (0..d).map(|a| grid.axis_index(k, a) as isize).collect();
        let x: Vec<f64> = (0..d).map(|a| grid.lower[a] + (idx[a] + 1) as f64 * grid.h[a]).collect();
        let mut put = |nb: &[isize], w: f64| {
            let outside: Vec<usize> = (0..d).filter(|&a| nb[a] < 0 || nb[a] >= n).collect();
            if outside.is_empty() {
                let mut flat = 0usize;
                for a in 0..d {
                    flat = flat * n as usize + nb[a] as usize;
                }
                f[(k, flat)] += w;
                return;
            }
            let dead = outside.iter().any(|&a| {
                let kind = if nb[a] < 0 { contract.lower_kind[a] } else { contract.upper_kind[a] };
                kind == BoundaryKind::KnockOut
            });
            if dead {
                return;
            }
            let s: Vec<f64> = (0..d).map(|a| grid.lower[a] + (nb[a] + 1) as f64 * grid.h[a]).collect();
            cc[k] += w * (0..d).map(|a| contract.weights[a + 1] * s[a]).sum::<f64>();
            cd[k] += w * contract.weights[0];
        };
        put(&idx, -model.r);
        for i in 0..d {
            let (si, hi) = (model.sigma[i], grid.h[i]);
            let diff = 0.5 * si * si * x[i] * x[i] / (hi * hi);
            let drift = model.r * x[i] / (2.0 * hi);
            put(&idx, -2.0 * diff);
            for s in [-1isize, 1] {
                let mut nb = idx.clone();
                nb[i] += s;
                put(&nb, diff + s as f64 * drift);
            }
            for j in i + 1..d {
                let c = si * model.sigma[j] * model.rho[i][j] * x[i] * x[j] / (4.0 * hi * grid.h[j]);
                for a in [-1isize, 1] {
                    for b in [-1isize, 1] {
                        let mut nb = idx.clone();
                        nb[i] += a;
                        nb[j] += b;
                        put(&nb, c * (a * b) as f64);
                    }
                }
            }
        }
    }
    (f, cc, cd)
}

/// Prefactor of `d|v~>/d theta_k` relative to the gate sequence.
pub fn derivative_prefactor(theta: &[f64], k: usize) -> Complex64 {
    if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -theta[0] / 2.0)
    }
}

fn derivative_gates(a: &AnsatzCircuit, theta: &[f64], k: usize) -> Vec<GateOp> {
    if k == 0 {
        a.gates(theta).unwrap()
    } else {
        a.gates_with_generator(theta, k).unwrap()
    }
}

/// `Re(kappa z)` from exact Hadamard tests, with the single-shot variance of
/// the sampled estimator.
fn hadamard_re(kappa: Complex64, bra: &[GateOp], ket: &[GateOp], base: &StateVector) -> (f64, f64) {
    let (mut value, mut var) = (0.0, 0.0);
    for (part, w) in [(Component::Real, kappa.re), (Component::Imag, -kappa.im)] {
        if w == 0.0 {
            continue;
        }
        let x = hadamard_test_exact(bra, ket, base, part).unwrap();
        let p = hadamard_test_probability(bra, ket, base, part).unwrap();
        assert!((p - (1.0 + x) / 2.0).abs() < 1e-12);
        value += w * x;
        var += w * w * (1.0 - x * x);
    }
    (value, var)
}

/// `M` and `V` assembled entry by entry from Hadamard-test circuits, plus
/// per-shot variances of each entry.
pub struct HadamardMv {
    pub m: DMatrix<f64>,
    pub v: DVector<f64>,
    pub m_var: DMatrix<f64>,
    pub v_var: DVector<f64>,
}

pub fn hadamard_mv(
    a: &AnsatzCircuit,
    theta: &[f64],
    base: &StateVector,
    l: &WeightedUnitarySum,
    u: &WeightedUnitarySum,
    tau: f64,
) -> HadamardMv {
    let np = a.num_params();
    let ops: Vec<_> = (0..np).map(|k| derivative_gates(a, theta, k)).collect();
    let mut m = DMatrix::zeros(np, np);
    let mut m_var = DMatrix::zeros(np, np);
    for i in 0..np {
        for j in 0..np {
            let kappa = derivative_prefactor(theta, i).conj() * derivative_prefactor(theta, j);
            let (x, s2) = hadamard_re(kappa, &ops[i], &ops[j], base);
            m[(i, j)] = x;
            m_var[(i, j)] = s2;
        }
    }
    let ops0 = a.gates(theta).unwrap();
    let lc = l.coefficients(tau);
    let uc = u.coefficients(tau);
    let zero = StateVector::zero(base.n());
    let mut v = DVector::zeros(np);
    let mut v_var = DVector::zeros(np);
    for j in 0..np {
        let cj = derivative_prefactor(theta, j).conj();
        for (k, lam) in lc.iter().enumerate() {
            let mut ket = ops0.clone();
            ket.extend(l.term_gates(k));
            let (x, s2) = hadamard_re(cj * theta[0] * *lam, &ops[j], &ket, base);
            v[j] += x;
            v_var[j] += s2;
        }
        let mut bra = vec![GateOp::Prepare(Arc::new(base.amps.clone()))];
        bra.extend(ops[j].iter().cloned());
        for (k, eta) in uc.iter().enumerate() {
            let (x, s2) = hadamard_re(cj * *eta, &bra, &u.term_gates(k), &zero);
            v[j] += x;
            v_var[j] += s2;
        }
    }
    HadamardMv { m, v, m_var, v_var }
}

/// `<d_j v~| (L v~ + u)>` by dense linear algebra.
pub fn dense_v(
    a: &AnsatzCircuit,
    theta: &[f64],
    base: &StateVector,
    l: &WeightedUnitarySum,
    u: &WeightedUnitarySum,
    tau: f64,
) -> DVector<f64> {
    let psi = ansatz_state(a, theta, base).unwrap().to_vec();
    let lmat = reconstruct(l, tau).unwrap().map(|x| Complex64::new(x, 0.0));
    let mut w = lmat * DVector::from_vec(psi);
    if !u.is_empty() {
        let ucol = reconstruct(u, tau).unwrap().column(0).map(|x| Complex64::new(x, 0.0));
        w += ucol;
    }
    DVector::from_fn(a.num_params(), |j, _| {
        let dj = derivative_state(a, theta, base, j).unwrap().to_vec();
        dj.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>().re
    })
}

/// Real random unit vector.
pub fn random_real_state(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..1 << n).map(|_| rng.random_range(0.0..1.0)).collect();
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    StateVector::from_real(&v.iter().map(|x| x / s).collect::<Vec<_>>()).unwrap()
}
