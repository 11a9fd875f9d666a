//! Dense pure-state simulation over a small active support, plus random
//! unitaries, Cliffords and stabilizer product states.

pub mod clifford;
pub mod gate;
pub(crate) mod kernel;
pub mod random;
pub mod serial;
pub mod state;
pub mod unitary;

pub use clifford::{sample_random_clifford, Tableau};
pub use gate::{circuit_unitary, Circuit, GatePlacement};
pub use random::{
    sample_haar_state, sample_haar_unitary, sample_haar_vector, sample_stabilizer_product, stabilizer_prep,
    stabilizer_product_vector, StabilizerProductLabel,
};
pub use serial::{read_circuit, write_circuit};
pub use state::{run_circuit, sample_computational, PureState, DEFAULT_CAP};
pub use unitary::DenseUnitary;
