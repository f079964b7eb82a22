//! Matrix-free statevector simulation: gates, the layered ansatz, and the
//! SWAP / Hadamard interference tests used to read out overlaps.

mod ansatz;
mod gate;
mod measure;
mod state;

pub use ansatz::{ansatz_state, AnsatzCircuit, Entangler};
pub use gate::{adjoint_sequence, apply_gate, apply_sequence, GateOp};
pub use measure::{
    hadamard_overlap, hadamard_test_exact, hadamard_test_probability, hadamard_test_sample, sample_ancilla,
    swap_test_circuit_probability, swap_test_probability, swap_test_sample, Component, ShotEstimate,
};
pub use state::{amp_overlap, inner_product, StateVector};
