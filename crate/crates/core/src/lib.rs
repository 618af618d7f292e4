pub mod encodings;
pub mod fermion;
pub mod pauli;
pub mod hamio;
pub mod simulator;
pub mod ansatz;
pub mod vqe;
pub mod scan;
