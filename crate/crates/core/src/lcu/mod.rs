//! Weighted sums of unitaries for the FDM generator `F` and the boundary
//! generator `G(tau)`, built from shift, `Z` and multi-controlled-`Z` words.
//!
//! Register `i` (asset `i`) occupies qubits `i n .. (i + 1) n`, most
//! significant first, matching the flat grid index.

mod sum;
mod word;

pub use sum::{reconstruct, Term, TimeProfile, WeightedUnitarySum};
pub use word::{cyc_shift_cost, mcz_cost, DiagWord, RegWord, Shift};

use serde::Serialize;
use sum::Op;

use crate::error::{PricingError, Result};
use crate::fdm::Grid;
use crate::market::{BoundaryKind, DerivativeContract, MarketModel};

type Poly = Vec<(f64, RegWord)>;

fn diag_term((s, w): (f64, DiagWord), c: f64) -> (f64, RegWord) {
    (s * c, RegWord::diag(w))
}

/// `J(n) = diag(0, 1, .., 2^n - 1) = (2^n - 1)/2 I - sum_q 2^{n-q-1} Z_q`.
fn j_poly(n: usize) -> Poly {
    let mut p = vec![(((1u64 << n) - 1) as f64 / 2.0, RegWord::IDENTITY)];
    // qubit q is 0-based here, so its weight is 2^{n-q-2}
    p.extend((0..n).map(|q| (-(2f64).powi(n as i32 - q as i32 - 2), RegWord::diag(DiagWord::z(q)))));
    p
}

/// `diag(x^(0..n_gr))` of one axis, `l I + h (J + I)`.
fn xhat_poly(n: usize, l: f64, h: f64) -> Poly {
    j_poly(n).into_iter().map(|(c, w)| if w.is_identity() { (l + h + h * c, w) } else { (h * c, w) }).collect()
}

fn inc_poly(n: usize) -> Poly {
    let (s, z) = DiagWord::cnz(n);
    vec![
        (0.5 * s, RegWord { left: DiagWord::IDENTITY, shift: Shift::CycInc, right: z }),
        (0.5, RegWord::shift(Shift::CycInc)),
    ]
}

fn dec_poly(n: usize) -> Poly {
    let (s, z) = DiagWord::cnz(n);
    vec![
        (0.5 * s, RegWord { left: z, shift: Shift::CycDec, right: DiagWord::IDENTITY }),
        (0.5, RegWord::shift(Shift::CycDec)),
    ]
}

/// `|0..0><0..0| = (I - X^n C^{n-1}Z X^n) / 2`.
fn p0_poly(n: usize) -> Poly {
    vec![(0.5, RegWord::IDENTITY), diag_term(DiagWord::c0z(n), -0.5)]
}

/// `|1..1><1..1| = (I - C^{n-1}Z) / 2`.
fn p1_poly(n: usize) -> Poly {
    vec![(0.5, RegWord::IDENTITY), diag_term(DiagWord::cnz(n), -0.5)]
}

fn poly_sum(poly: Poly, n: usize) -> WeightedUnitarySum {
    Op::local(1, 0, &poly).into_sum(n, 0.0)
}

pub fn build_j(n: usize) -> WeightedUnitarySum {
    poly_sum(j_poly(n), n)
}

/// `Inc(n) = sum_{i <= 2^n - 2} |i+1><i|`.
pub fn build_inc(n: usize) -> WeightedUnitarySum {
    poly_sum(inc_poly(n), n)
}

/// `Dec(n) = sum_{i >= 1} |i-1><i|`.
pub fn build_dec(n: usize) -> WeightedUnitarySum {
    poly_sum(dec_poly(n), n)
}

pub fn build_cyc_inc(n: usize) -> WeightedUnitarySum {
    poly_sum(vec![(1.0, RegWord::shift(Shift::CycInc))], n)
}

pub fn build_cyc_dec(n: usize) -> WeightedUnitarySum {
    poly_sum(vec![(1.0, RegWord::shift(Shift::CycDec))], n)
}

/// `C^{n-1}Z` as a one-term sum.
pub fn build_cnz(n: usize) -> WeightedUnitarySum {
    poly_sum(vec![diag_term(DiagWord::cnz(n), 1.0)], n)
}

struct Ctx<'a> {
    d: usize,
    n: usize,
    grid: &'a Grid,
}

impl Ctx<'_> {
    fn xhat(&self, i: usize) -> Op {
        Op::local(self.d, i, &xhat_poly(self.n, self.grid.lower[i], self.grid.h[i]))
    }

    fn one(&self, c: f64) -> Op {
        Op::scalar(self.d, c, TimeProfile::Constant)
    }

    /// `Dec - Inc` and `Inc + Dec - 2I`, left-multiplied by the coordinate diagonal.
    fn d1st(&self, i: usize) -> Op {
        let shifts = Op::local(self.d, i, &dec_poly(self.n)).add(Op::local(self.d, i, &inc_poly(self.n)).scale(-1.0));
        self.xhat(i).mul(&shifts)
    }

    fn d2nd(&self, i: usize) -> Op {
        let shifts =
            Op::local(self.d, i, &inc_poly(self.n)).add(Op::local(self.d, i, &dec_poly(self.n))).add(self.one(-2.0));
        self.xhat(i).mul(&self.xhat(i)).mul(&shifts)
    }

    /// Projector on the boundary layer of axis `i`: index 0 for `side < 0`,
    /// `n_gr - 1` otherwise.
    fn layer(&self, i: usize, side: i32) -> Op {
        let p = if side < 0 { p0_poly(self.n) } else { p1_poly(self.n) };
        Op::local(self.d, i, &p)
    }

    fn face(&self, i: usize, side: i32) -> f64 {
        if side < 0 {
            self.grid.lower[i]
        } else {
            self.grid.upper[i]
        }
    }

    fn layer_coord(&self, i: usize, side: i32) -> f64 {
        self.grid.coordinate(i, if side < 0 { 0 } else { self.grid.n_gr() - 1 })
    }
}

fn check_dims(model: &MarketModel, contract: &DerivativeContract, grid: &Grid) -> Result<()> {
    for len in [model.d(), contract.d()] {
        if len != grid.d() {
            return Err(PricingError::DimensionMismatch { expected: grid.d(), actual: len });
        }
    }
    Ok(())
}

/// `F = sum_i [s_i^2/2h_i^2 D2nd_i + r/2h_i D1st_i]
///    + sum_{i<j} s_i s_j rho_ij / 4 h_i h_j D1st_i D1st_j - r I`
/// fully distributed into weighted unitaries.
pub fn decompose_f(model: &MarketModel, contract: &DerivativeContract, grid: &Grid) -> Result<WeightedUnitarySum> {
    check_dims(model, contract, grid)?;
    let (d, n) = (grid.d(), grid.qubits_per_axis());
    let cx = Ctx { d, n, grid };
    let (r, sigma, h) = (model.r, &model.sigma, &grid.h);
    let mut op = cx.one(-r);
    for i in 0..d {
        op = op.add(cx.d2nd(i).scale(sigma[i].powi(2) / (2.0 * h[i] * h[i])));
        op = op.add(cx.d1st(i).scale(r / (2.0 * h[i])));
        for j in i + 1..d {
            let c = sigma[i] * sigma[j] * model.rho[i][j] / (4.0 * h[i] * h[j]);
            if c != 0.0 {
                op = op.add(cx.d1st(i).mul(&cx.d1st(j)).scale(c));
            }
        }
    }
    let sum = op.into_sum(n, r);
    assert!(sum.terms.iter().all(|t| t.coef.is_finite()), "non-finite coefficient in F decomposition");
    Ok(sum)
}

/// Value on a ghost node, as an operator: `e^{-r tau} a_0 + sum_m a_m s_m`,
/// where `s_m` is the face value for the axes in `outside`, the shifted
/// coordinate for `shifted`, and the coordinate diagonal otherwise.
fn ghost_op(cx: &Ctx, contract: &DerivativeContract, outside: &[(usize, i32)], shifted: Option<(usize, i32)>) -> Op {
    let mut op = Op::scalar(cx.d, contract.weights[0], TimeProfile::Discounted);
    for m in 0..cx.d {
        let a = contract.weights[m + 1];
        if a == 0.0 {
            continue;
        }
        if let Some(&(_, side)) = outside.iter().find(|(ax, _)| *ax == m) {
            op = op.add(cx.one(a * cx.face(m, side)));
        } else {
            op = op.add(cx.xhat(m).scale(a));
            if let Some((ax, s)) = shifted {
                if ax == m {
                    op = op.add(cx.one(a * s as f64 * cx.grid.h[m]));
                }
            }
        }
    }
    op
}

/// `G(tau)` with `|C(tau)> = 2^{nd/2} G(tau) H^{(x) nd} |0>`, expressed with
/// the Hadamard layer folded into every term. Coefficients carry their own
/// `e^{-r tau}` tags, so one sum serves every `tau`.
pub fn decompose_boundary_generator(
    model: &MarketModel,
    contract: &DerivativeContract,
    grid: &Grid,
) -> Result<WeightedUnitarySum> {
    check_dims(model, contract, grid)?;
    let (d, n) = (grid.d(), grid.qubits_per_axis());
    let cx = Ctx { d, n, grid };
    let (r, sigma, h) = (model.r, &model.sigma, &grid.h);
    let linear = |i: usize, side: i32| {
        let kind = if side < 0 { contract.lower_kind[i] } else { contract.upper_kind[i] };
        kind == BoundaryKind::Linear
    };
    let mut op = Op::zero(d);
    for i in 0..d {
        for s in [-1, 1] {
            if !linear(i, s) {
                continue;
            }
            let x = cx.layer_coord(i, s);
            let w = sigma[i].powi(2) * x * x / (2.0 * h[i] * h[i]) + s as f64 * r * x / (2.0 * h[i]);
            op = op.add(cx.layer(i, s).mul(&ghost_op(&cx, contract, &[(i, s)], None)).scale(w));
        }
        for j in i + 1..d {
            let c0 = sigma[i] * sigma[j] * model.rho[i][j] / (4.0 * h[i] * h[j]);
            if c0 == 0.0 {
                continue;
            }
            for si in [-1, 1] {
                for sj in [-1, 1] {
                    let c = c0 * (si * sj) as f64;
                    let inner = |a: usize, sa: i32| cx.one(1.0).add(cx.layer(a, sa).scale(-1.0));
                    if linear(i, si) {
                        let t = cx.layer(i, si).mul(&inner(j, sj)).mul(&cx.xhat(j));
                        let g = ghost_op(&cx, contract, &[(i, si)], Some((j, sj)));
                        op = op.add(t.mul(&g).scale(c * cx.layer_coord(i, si)));
                    }
                    if linear(j, sj) {
                        let t = cx.layer(j, sj).mul(&inner(i, si)).mul(&cx.xhat(i));
                        let g = ghost_op(&cx, contract, &[(j, sj)], Some((i, si)));
                        op = op.add(t.mul(&g).scale(c * cx.layer_coord(j, sj)));
                    }
                    if linear(i, si) && linear(j, sj) {
                        let t = cx.layer(i, si).mul(&cx.layer(j, sj));
                        let g = ghost_op(&cx, contract, &[(i, si), (j, sj)], None);
                        op = op.add(t.mul(&g).scale(c * cx.layer_coord(i, si) * cx.layer_coord(j, sj)));
                    }
                }
            }
        }
    }
    let norm = 2f64.powf((n * d) as f64 / 2.0);
    let mut sum = op.scale(norm).into_sum(n, r);
    sum.hadamard_prefix = true;
    Ok(sum)
}

/// Term and gate counts of a decomposition plus the complexity ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceReport {
    pub qubits: usize,
    pub terms: usize,
    pub discounted_terms: usize,
    pub max_gates_per_term: usize,
    pub mean_gates_per_term: f64,
    pub mcz_gates: usize,
    pub cyc_shift_gates: usize,
    /// `(item, value)` lines of the complexity table for the given `(d, n, eps)`.
    pub table: Vec<(String, String)>,
}

impl ResourceReport {
    /// Flat `key = value` block.
    pub fn to_kv_text(&self) -> String {
        let mut s = format!(
            "qubits = {}\nterms = {}\ndiscounted_terms = {}\nmax_gates_per_term = {}\nmean_gates_per_term = {:.3}\n\
             mcz_gates = {}\ncyc_shift_gates = {}\n",
            self.qubits,
            self.terms,
            self.discounted_terms,
            self.max_gates_per_term,
            self.mean_gates_per_term,
            self.mcz_gates,
            self.cyc_shift_gates
        );
        for (k, v) in &self.table {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

/// Counts for `sum`, with the complexity table evaluated at accuracy `eps`.
pub fn resource_report(sum: &WeightedUnitarySum, eps: f64) -> ResourceReport {
    let costs: Vec<usize> = (0..sum.len()).map(|k| sum.term_cost(k)).collect();
    let terms = costs.len();
    let (d, n) = (sum.d, sum.n);
    let nq = sum.qubits();
    let mut table = Vec::new();
    if terms > 0 {
        let log_inv = (1.0 / eps).ln();
        let dl = d as f64 * log_inv;
        let max = *costs.iter().max().unwrap();
        table = vec![
            ("table.d_log_inv_eps".into(), format!("{dl:.4}")),
            ("table.prep_p.gates".into(), "N_gate^p (oracle)".into()),
            ("table.prep_v.gates".into(), "N_gate^V (oracle)".into()),
            ("table.vqs.gates".into(), format!("O(poly(d log 1/eps)); controlled term <= {}", max + 2 * nq)),
            ("table.vqs.measurements".into(), "N_measure^VQS * N_tau".into()),
            ("table.swap.gates".into(), format!("{} cswap + 2 h", nq)),
            ("table.swap.measurements".into(), "N_SWAP (see plan)".into()),
            ("table.terms_over_d2n4".into(), format!("{:.4}", terms as f64 / (d * d * n.pow(4)) as f64)),
        ];
    }
    ResourceReport {
        qubits: if terms > 0 { nq } else { 0 },
        terms,
        discounted_terms: sum.terms.iter().filter(|t| t.profile == TimeProfile::Discounted).count(),
        max_gates_per_term: costs.iter().copied().max().unwrap_or(0),
        mean_gates_per_term: if terms > 0 { costs.iter().sum::<usize>() as f64 / terms as f64 } else { 0.0 },
        mcz_gates: if terms > 0 { mcz_cost(n) } else { 0 },
        cyc_shift_gates: if terms > 0 { cyc_shift_cost(n) } else { 0 },
        table,
    }
}
