//! Neural fractional differential equations.
pub mod alloc;
pub mod autodiff;
pub mod data;
pub mod harness;
pub mod neuralfde;
pub mod nn;
pub mod numerics;
pub mod solvers;
