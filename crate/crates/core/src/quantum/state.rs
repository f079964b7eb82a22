use num_complex::Complex64;

use crate::error::{PricingError, Result};

/// Amplitudes of an `n`-qubit register times a complex global factor.
///
/// Qubit 0 is the most significant bit of the basis index, so basis index
/// `k` is grid point `k` in the flat layout of [`crate::fdm::Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    pub amps: Vec<Complex64>,
    pub scale: Complex64,
}

impl StateVector {
    /// `|0...0>` with unit scale.
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps, scale: Complex64::new(1.0, 0.0) }
    }

    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= 1 << n {
            return Err(PricingError::IndexOutOfRange { index: k, limit: 1 << n });
        }
        let mut s = Self::zero(n);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[k] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Encode a real vector: normalized amplitudes, scale = its norm.
    pub fn from_real(v: &[f64]) -> Result<Self> {
        if !v.len().is_power_of_two() {
            return Err(PricingError::validation(format!("vector length {} is not a power of two", v.len())));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(PricingError::domain("cannot encode a zero or non-finite vector"));
        }
        Ok(Self {
            n: v.len().trailing_zeros() as usize,
            amps: v.iter().map(|x| Complex64::new(x / norm, 0.0)).collect(),
            scale: Complex64::new(norm, 0.0),
        })
    }

    /// Normalized amplitudes as given, unit scale.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(PricingError::validation(format!("vector length {} is not a power of two", amps.len())));
        }
        Ok(Self { n: amps.len().trailing_zeros() as usize, amps, scale: Complex64::new(1.0, 0.0) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Norm of the amplitude array (1 for a normalized part).
    pub fn amp_norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Norm including the scale.
    pub fn norm(&self) -> f64 {
        self.scale.norm() * self.amp_norm()
    }

    /// Full vector `scale * amps`.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.amps.iter().map(|a| a * self.scale).collect()
    }

    /// Real parts of `scale * amps`.
    pub fn to_real(&self) -> Vec<f64> {
        self.amps.iter().map(|a| (a * self.scale).re).collect()
    }

    /// `|k> -> |k> (x) |0>`: append an ancilla as the new least significant qubit.
    pub fn with_ancilla(&self) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amps.len() * 2];
        for (k, a) in self.amps.iter().enumerate() {
            amps[k << 1] = *a;
        }
        Self { n: self.n + 1, amps, scale: self.scale }
    }

    /// Tensor product, `self` on the high qubits.
    pub fn tensor(&self, low: &StateVector) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * low.amps.len());
        for a in &self.amps {
            amps.extend(low.amps.iter().map(|b| a * b));
        }
        Self { n: self.n + low.n, amps, scale: self.scale * low.scale }
    }
}

/// `<a|b>` including both scales.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    Ok(a.scale.conj() * b.scale * amp_overlap(a, b)?)
}

/// `<a|b>` of the amplitude arrays only.
pub fn amp_overlap(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n != b.n {
        return Err(PricingError::DimensionMismatch { expected: a.n, actual: b.n });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}
