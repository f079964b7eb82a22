use std::sync::Arc;

use num_complex::Complex64;

use super::StateVector;
use crate::error::{PricingError, Result};

/// Elementary and structured operations understood by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    RY(usize, f64),
    CZ(usize, usize),
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    Swap(usize, usize),
    /// `-1` phase on the basis states where every listed qubit is 1.
    MultiZ(Vec<usize>),
    /// `|k> -> |k+1 mod 2^m>` on a register listed most significant first.
    CycInc(Vec<usize>),
    /// `|k> -> |k-1 mod 2^m>`.
    CycDec(Vec<usize>),
    /// Householder reflection exchanging `|0>` and a fixed real-phase state
    /// on the leading `log2(len)` qubits. Stands in for an amplitude-loading
    /// oracle `U|0> = |psi>`.
    Prepare(Arc<Vec<Complex64>>),
    /// Apply `ops` on the subspace where `control` is 1.
    Controlled {
        control: usize,
        ops: Vec<GateOp>,
    },
}

impl GateOp {
    /// Qubits touched, including controls.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Self::RY(q, _) | Self::X(q) | Self::Y(q) | Self::Z(q) | Self::H(q) | Self::S(q) | Self::Sdg(q) => vec![*q],
            Self::CZ(a, b) | Self::Swap(a, b) => vec![*a, *b],
            Self::MultiZ(qs) | Self::CycInc(qs) | Self::CycDec(qs) => qs.clone(),
            Self::Prepare(psi) => (0..psi.len().trailing_zeros() as usize).collect(),
            Self::Controlled { control, ops } => {
                let mut v = vec![*control];
                v.extend(ops.iter().flat_map(|g| g.qubits()));
                v
            }
        }
    }

    /// Inverse operation.
    pub fn adjoint(&self) -> GateOp {
        match self {
            Self::RY(q, t) => Self::RY(*q, -t),
            Self::S(q) => Self::Sdg(*q),
            Self::Sdg(q) => Self::S(*q),
            Self::CycInc(qs) => Self::CycDec(qs.clone()),
            Self::CycDec(qs) => Self::CycInc(qs.clone()),
            Self::Controlled { control, ops } => Self::Controlled { control: *control, ops: adjoint_sequence(ops) },
            other => other.clone(),
        }
    }
}

/// Inverse of a gate sequence.
pub fn adjoint_sequence(ops: &[GateOp]) -> Vec<GateOp> {
    ops.iter().rev().map(GateOp::adjoint).collect()
}

fn bit(n: usize, q: usize) -> usize {
    1 << (n - 1 - q)
}

fn check(n: usize, g: &GateOp) -> Result<()> {
    match g {
        GateOp::Prepare(v) if !v.len().is_power_of_two() || v.len() > 1 << n => {
            return Err(PricingError::DimensionMismatch { expected: 1 << n, actual: v.len() });
        }
        GateOp::Controlled { control, ops } => {
            for op in ops {
                check(n, op)?;
                if op.qubits().contains(control) {
                    return Err(PricingError::validation(format!("qubit {control} is both control and target")));
                }
            }
        }
        _ => {}
    }
    match g.qubits().into_iter().find(|q| *q >= n) {
        Some(q) => Err(PricingError::IndexOutOfRange { index: q, limit: n }),
        None => Ok(()),
    }
}

/// Apply `gate` in place.
pub fn apply_gate(state: &mut StateVector, gate: &GateOp) -> Result<()> {
    check(state.n(), gate)?;
    apply_masked(state.n(), &mut state.amps, gate, 0);
    Ok(())
}

/// Apply a sequence in order.
pub fn apply_sequence(state: &mut StateVector, ops: &[GateOp]) -> Result<()> {
    for g in ops {
        check(state.n(), g)?;
    }
    for g in ops {
        apply_masked(state.n(), &mut state.amps, g, 0);
    }
    Ok(())
}

/// Pairs `(i0, i1)` differing in `b` (i0 has it clear) with the control mask set.
#[inline]
fn pairs(len: usize, b: usize, mask: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..len).filter(move |i| i & b == 0 && i & mask == mask).map(move |i| (i, i | b))
}

fn apply_masked(n: usize, amps: &mut [Complex64], gate: &GateOp, mask: usize) {
    let len = amps.len();
    let i = Complex64::new(0.0, 1.0);
    match gate {
        GateOp::RY(q, theta) => {
            let (s, c) = (theta / 2.0).sin_cos();
            for (a, b) in pairs(len, bit(n, *q), mask) {
                let (x, y) = (amps[a], amps[b]);
                amps[a] = x * c - y * s;
                amps[b] = x * s + y * c;
            }
        }
        GateOp::X(q) => {
            for (a, b) in pairs(len, bit(n, *q), mask) {
                amps.swap(a, b);
            }
        }
        GateOp::Y(q) => {
            for (a, b) in pairs(len, bit(n, *q), mask) {
                let (x, y) = (amps[a], amps[b]);
                amps[a] = -i * y;
                amps[b] = i * x;
            }
        }
        GateOp::H(q) => {
            let f = std::f64::consts::FRAC_1_SQRT_2;
            for (a, b) in pairs(len, bit(n, *q), mask) {
                let (x, y) = (amps[a], amps[b]);
                amps[a] = (x + y) * f;
                amps[b] = (x - y) * f;
            }
        }
        GateOp::Z(q) => phase(amps, mask | bit(n, *q), Complex64::new(-1.0, 0.0)),
        GateOp::S(q) => phase(amps, mask | bit(n, *q), i),
        GateOp::Sdg(q) => phase(amps, mask | bit(n, *q), -i),
        GateOp::CZ(a, b) => phase(amps, mask | bit(n, *a) | bit(n, *b), Complex64::new(-1.0, 0.0)),
        GateOp::MultiZ(qs) => {
            let m = qs.iter().fold(mask, |m, q| m | bit(n, *q));
            phase(amps, m, Complex64::new(-1.0, 0.0));
        }
        GateOp::Swap(a, b) => {
            let (ba, bb) = (bit(n, *a), bit(n, *b));
            for k in 0..len {
                if k & mask == mask && k & ba != 0 && k & bb == 0 {
                    amps.swap(k, k ^ ba ^ bb);
                }
            }
        }
        GateOp::CycInc(qs) => cyclic_shift(n, amps, qs, mask, 1),
        GateOp::CycDec(qs) => cyclic_shift(n, amps, qs, mask, -1),
        GateOp::Prepare(psi) => reflect(amps, psi, mask),
        GateOp::Controlled { control, ops } => {
            let m = mask | bit(n, *control);
            for g in ops {
                apply_masked(n, amps, g, m);
            }
        }
    }
}

fn phase(amps: &mut [Complex64], mask: usize, f: Complex64) {
    for (k, a) in amps.iter_mut().enumerate() {
        if k & mask == mask {
            *a *= f;
        }
    }
}

fn cyclic_shift(n: usize, amps: &mut [Complex64], qs: &[usize], mask: usize, delta: i64) {
    let m = qs.len();
    let bits: Vec<usize> = qs.iter().map(|q| bit(n, *q)).collect();
    let reg_mask: usize = bits.iter().fold(0, |a, b| a | b);
    let modulus = 1i64 << m;
    let src = amps.to_vec();
    for (k, a) in src.iter().enumerate() {
        if k & mask != mask {
            continue;
        }
        let val = bits.iter().fold(0i64, |acc, b| (acc << 1) | i64::from(k & b != 0));
        let new = (val + delta).rem_euclid(modulus);
        let mut idx = k & !reg_mask;
        for (j, b) in bits.iter().enumerate() {
            if (new >> (m - 1 - j)) & 1 == 1 {
                idx |= b;
            }
        }
        amps[idx] = *a;
    }
}

/// `I - 2 w w^dag / |w|^2` with `w = |0> - |psi>` on the leading qubits,
/// applied for every setting of the trailing qubits that satisfies `mask`.
fn reflect(amps: &mut [Complex64], psi: &[Complex64], mask: usize) {
    let dim = psi.len();
    let shift = (amps.len() / dim).trailing_zeros();
    let mut w: Vec<Complex64> = psi.iter().map(|p| -p).collect();
    w[0] += 1.0;
    let wn = w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    if wn < 1e-30 {
        return;
    }
    for lo in 0..1usize << shift {
        if lo & mask != mask {
            continue;
        }
        let idx = |k: usize| (k << shift) | lo;
        let dot: Complex64 = (0..dim).map(|k| w[k].conj() * amps[idx(k)]).sum();
        let f = 2.0 * dot / wn;
        for k in 0..dim {
            amps[idx(k)] -= f * w[k];
        }
    }
}
