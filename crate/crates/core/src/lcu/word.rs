use crate::quantum::GateOp;

/// Product of commuting diagonal unitaries on one `n`-qubit register:
/// `Z` on the qubits in `z_mask`, optionally `C^{n-1}Z` (phase on the
/// all-ones state) and `X^n C^{n-1}Z X^n` (phase on the all-zeros state).
///
/// All factors are diagonal with entries +-1, so products are XORs. For a
/// one-qubit register both controlled factors reduce to `+-Z` and are never
/// stored as flags; the constructors fold them into `z_mask` and a sign.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagWord {
    pub z_mask: u64,
    pub cnz: bool,
    pub c0z: bool,
}

impl DiagWord {
    pub const IDENTITY: DiagWord = DiagWord { z_mask: 0, cnz: false, c0z: false };

    pub fn z(q: usize) -> Self {
        Self { z_mask: 1 << q, ..Self::IDENTITY }
    }

    /// `(sign, word)` for `C^{n-1}Z`.
    pub fn cnz(n: usize) -> (f64, Self) {
        if n == 1 {
            (1.0, Self::z(0))
        } else {
            (1.0, Self { cnz: true, ..Self::IDENTITY })
        }
    }

    /// `(sign, word)` for `X^n C^{n-1}Z X^n`.
    pub fn c0z(n: usize) -> (f64, Self) {
        if n == 1 {
            (-1.0, Self::z(0))
        } else {
            (1.0, Self { c0z: true, ..Self::IDENTITY })
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn mul(self, o: Self) -> Self {
        Self { z_mask: self.z_mask ^ o.z_mask, cnz: self.cnz ^ o.cnz, c0z: self.c0z ^ o.c0z }
    }

    /// Diagonal entry at register value `k`.
    pub fn eval(&self, n: usize, k: usize) -> f64 {
        let mut s = 1.0;
        for q in 0..n {
            if self.z_mask >> q & 1 == 1 && k >> (n - 1 - q) & 1 == 1 {
                s = -s;
            }
        }
        if self.cnz && k == (1 << n) - 1 {
            s = -s;
        }
        if self.c0z && k == 0 {
            s = -s;
        }
        s
    }

    /// Gates on a register whose qubits are `qubits` (most significant first).
    pub fn gates(&self, qubits: &[usize]) -> Vec<GateOp> {
        let mut ops: Vec<GateOp> =
            (0..qubits.len()).filter(|q| self.z_mask >> q & 1 == 1).map(|q| GateOp::Z(qubits[q])).collect();
        if self.cnz {
            ops.push(GateOp::MultiZ(qubits.to_vec()));
        }
        if self.c0z {
            ops.extend(qubits.iter().map(|q| GateOp::X(*q)));
            ops.push(GateOp::MultiZ(qubits.to_vec()));
            ops.extend(qubits.iter().map(|q| GateOp::X(*q)));
        }
        ops
    }

    pub fn gate_cost(&self, n: usize) -> usize {
        self.z_mask.count_ones() as usize
            + usize::from(self.cnz) * mcz_cost(n)
            + usize::from(self.c0z) * (mcz_cost(n) + 2 * n)
    }
}

/// Cyclic shift on a register.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shift {
    #[default]
    None,
    CycInc,
    CycDec,
}

/// `left * shift * right` on one register. Words without a shift keep the
/// whole diagonal in `left`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegWord {
    pub left: DiagWord,
    pub shift: Shift,
    pub right: DiagWord,
}

impl RegWord {
    pub const IDENTITY: RegWord = RegWord { left: DiagWord::IDENTITY, shift: Shift::None, right: DiagWord::IDENTITY };

    pub fn diag(w: DiagWord) -> Self {
        Self { left: w, ..Self::IDENTITY }
    }

    pub fn shift(s: Shift) -> Self {
        Self { shift: s, ..Self::IDENTITY }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    /// Operator product; at most one factor may carry a shift.
    pub fn mul(&self, o: &Self) -> Self {
        match (self.shift, o.shift) {
            (Shift::None, _) => Self { left: self.left.mul(o.left), shift: o.shift, right: o.right },
            (_, Shift::None) => Self { left: self.left, shift: self.shift, right: self.right.mul(o.left) },
            _ => panic!("product of two shifted words is outside the term algebra"),
        }
    }

    /// Gates in application order: right diagonal, shift, left diagonal.
    pub fn gates(&self, qubits: &[usize]) -> Vec<GateOp> {
        let mut ops = self.right.gates(qubits);
        match self.shift {
            Shift::None => {}
            Shift::CycInc => ops.push(GateOp::CycInc(qubits.to_vec())),
            Shift::CycDec => ops.push(GateOp::CycDec(qubits.to_vec())),
        }
        ops.extend(self.left.gates(qubits));
        ops
    }

    pub fn gate_cost(&self, n: usize) -> usize {
        self.left.gate_cost(n) + self.right.gate_cost(n) + if self.shift == Shift::None { 0 } else { cyc_shift_cost(n) }
    }
}

/// Elementary-gate cost charged for `C^{n-1}Z`: one gate for `Z`/`CZ`,
/// otherwise a Toffoli ladder priced at `2 (n - 1)^2` elementary gates.
pub fn mcz_cost(n: usize) -> usize {
    if n <= 2 {
        1
    } else {
        2 * (n - 1) * (n - 1)
    }
}

/// Cost charged for a cyclic increment or decrement with `O(n)` ancillas:
/// `2 (n - 1)` Toffolis, `n - 1` CNOTs and one `X`.
pub fn cyc_shift_cost(n: usize) -> usize {
    3 * n.saturating_sub(1) + 1
}
