use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::word::RegWord;
use crate::error::{PricingError, Result};
use crate::quantum::{apply_sequence, GateOp, StateVector};

/// Time dependence of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    Constant,
    /// Multiplied by `e^{-r tau}`.
    Discounted,
}

impl TimeProfile {
    fn mul(self, o: Self) -> Self {
        match (self, o) {
            (Self::Constant, p) | (p, Self::Constant) => p,
            _ => panic!("doubly discounted coefficient is outside the term algebra"),
        }
    }
}

/// One weighted unitary: a word per register.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub profile: TimeProfile,
    pub words: Vec<RegWord>,
}

/// `sum_k lambda_k(tau) U_k` over `d` registers of `n` qubits each.
///
/// With `hadamard_prefix` set every unitary is `U_k H^{(x) nd}`, the form
/// used to build a state from `|0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedUnitarySum {
    pub n: usize,
    pub d: usize,
    pub r: f64,
    pub hadamard_prefix: bool,
    pub terms: Vec<Term>,
}

impl WeightedUnitarySum {
    pub fn empty(n: usize, d: usize, r: f64) -> Self {
        Self { n, d, r, hadamard_prefix: false, terms: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn qubits(&self) -> usize {
        self.n * self.d
    }

    /// `lambda_k(tau)` for every term.
    pub fn coefficients(&self, tau: f64) -> Vec<f64> {
        let disc = (-self.r * tau).exp();
        self.terms
            .iter()
            .map(|t| match t.profile {
                TimeProfile::Constant => t.coef,
                TimeProfile::Discounted => t.coef * disc,
            })
            .collect()
    }

    /// Gate sequence of term `k`.
    pub fn term_gates(&self, k: usize) -> Vec<GateOp> {
        let nq = self.qubits();
        let mut ops = Vec::new();
        if self.hadamard_prefix {
            ops.extend((0..nq).map(GateOp::H));
        }
        for (reg, w) in self.terms[k].words.iter().enumerate() {
            let qs: Vec<usize> = (reg * self.n..(reg + 1) * self.n).collect();
            ops.extend(w.gates(&qs));
        }
        ops
    }

    /// Elementary-gate cost of term `k` under the ladder cost model.
    pub fn term_cost(&self, k: usize) -> usize {
        let h = if self.hadamard_prefix { self.qubits() } else { 0 };
        h + self.terms[k].words.iter().map(|w| w.gate_cost(self.n)).sum::<usize>()
    }

    /// `sum_k lambda_k(tau) U_k |psi>` on the normalized part of `psi`.
    pub fn apply(&self, psi: &StateVector, tau: f64) -> Result<Vec<Complex64>> {
        if psi.n() != self.qubits() {
            return Err(PricingError::DimensionMismatch { expected: self.qubits(), actual: psi.n() });
        }
        let coefs = self.coefficients(tau);
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        for (k, c) in coefs.iter().enumerate() {
            let mut s = psi.clone();
            apply_sequence(&mut s, &self.term_gates(k))?;
            for (o, a) in out.iter_mut().zip(&s.amps) {
                *o += *c * a;
            }
        }
        Ok(out)
    }

    /// Merge terms with equal words and profile (exact key match) and drop
    /// exact zeros. First-seen order is kept.
    pub fn merged(mut self) -> Self {
        let mut index: HashMap<(TimeProfile, Vec<RegWord>), usize> = HashMap::new();
        let mut out: Vec<Term> = Vec::new();
        for t in self.terms.drain(..) {
            match index.get(&(t.profile, t.words.clone())) {
                Some(&i) => out[i].coef += t.coef,
                None => {
                    index.insert((t.profile, t.words.clone()), out.len());
                    out.push(t);
                }
            }
        }
        out.retain(|t| t.coef != 0.0);
        self.terms = out;
        self
    }
}

/// Dense `sum_k lambda_k(tau) U_k`, built column by column from basis states.
pub fn reconstruct(sum: &WeightedUnitarySum, tau: f64) -> Result<DMatrix<f64>> {
    let nq = sum.qubits();
    if nq > 10 {
        return Err(PricingError::validation(format!("reconstruct is limited to 10 qubits, got {nq}")));
    }
    let dim = 1usize << nq;
    let mut m = DMatrix::zeros(dim, dim);
    let coefs = sum.coefficients(tau);
    let gates: Vec<_> = (0..sum.len()).map(|k| sum.term_gates(k)).collect();
    for col in 0..dim {
        let e = StateVector::basis(nq, col)?;
        for (c, ops) in coefs.iter().zip(&gates) {
            let mut s = e.clone();
            apply_sequence(&mut s, ops)?;
            for (row, a) in s.amps.iter().enumerate() {
                if a.im.abs() > 1e-12 {
                    return Err(PricingError::validation("term produced a complex amplitude"));
                }
                m[(row, col)] += c * a.re;
            }
        }
    }
    Ok(m)
}

/// Sparse operator polynomial used while expanding products.
#[derive(Debug, Clone)]
pub(crate) struct Op {
    pub d: usize,
    pub terms: Vec<(f64, TimeProfile, Vec<RegWord>)>,
}

impl Op {
    pub fn zero(d: usize) -> Self {
        Self { d, terms: Vec::new() }
    }

    pub fn scalar(d: usize, c: f64, profile: TimeProfile) -> Self {
        Self { d, terms: vec![(c, profile, vec![RegWord::IDENTITY; d])] }
    }

    /// A single-register polynomial placed on register `reg`.
    pub fn local(d: usize, reg: usize, poly: &[(f64, RegWord)]) -> Self {
        let terms = poly
            .iter()
            .map(|(c, w)| {
                let mut words = vec![RegWord::IDENTITY; d];
                words[reg] = *w;
                (*c, TimeProfile::Constant, words)
            })
            .collect();
        Self { d, terms }
    }

    pub fn add(mut self, o: Op) -> Self {
        self.terms.extend(o.terms);
        self
    }

    pub fn scale(mut self, c: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= c;
        }
        self
    }

    pub fn mul(&self, o: &Op) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (a, pa, wa) in &self.terms {
            for (b, pb, wb) in &o.terms {
                let words = wa.iter().zip(wb).map(|(x, y)| x.mul(y)).collect();
                terms.push((a * b, pa.mul(*pb), words));
            }
        }
        Self { d: self.d, terms }
    }

    pub fn into_sum(self, n: usize, r: f64) -> WeightedUnitarySum {
        let terms = self.terms.into_iter().map(|(coef, profile, words)| Term { coef, profile, words }).collect();
        WeightedUnitarySum { n, d: self.d, r, hadamard_prefix: false, terms }.merged()
    }
}
