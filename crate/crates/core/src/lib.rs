//! Planar Pfaffian tensor contraction networks: exact and floating scalars,
//! sub-Pfaffians, network evaluation, certificates and polynomial systems.

pub mod certify;
pub mod exec;
pub mod expr;
pub mod network;
pub mod pfaffian;
pub mod polysys;
pub mod random;
pub mod registry;
pub mod scalar;
pub mod tensor;
