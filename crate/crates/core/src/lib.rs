//! Antiferromagnetic Ising model on line graphs.
//!
//! The model on `L(Γ)` is handled as a holant on `Γ`: edge spins of `Γ` are
//! the vertex spins of `L(Γ)`, and each vertex of `Γ` carries the symmetric
//! function `[exp(beta i (d - i) + mu i)]`. On top of that representation the
//! crate provides
//!
//! * [`chains`]: the half-edge Metropolis chain and censored Glauber dynamics,
//! * [`estimator`]: telescoping-product estimates of the partition function,
//! * [`windability`]: exact certificates that the vertex functions are windable,
//! * [`oracle`]: brute-force references for small instances.

pub mod chains;
pub mod cli;
pub mod estimator;
pub mod graph;
pub mod oracle;
pub mod signature;
pub mod windability;
