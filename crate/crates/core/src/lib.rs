//! Numerical solution of two-player nonzero-sum stochastic impulse games.
//!
//! The equilibrium value functions solve a coupled pair of quasi-variational
//! inequalities. This crate discretises them on a uniform grid
//! ([`grid`], [`operators`]), solves single QVIs by policy iteration
//! ([`howard`]), couples the players by relaxed policy iteration
//! ([`solver`]), and checks the results against the closed form of a linear
//! benchmark ([`benchmark`]) and by Monte Carlo simulation ([`montecarlo`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod error;
pub mod experiment;
pub mod game;
pub mod grid;
pub mod guess;
pub mod howard;
pub mod montecarlo;
pub mod operators;
pub mod solver;
pub mod tridiag;

pub use error::{Error, Result};
pub use game::{GameSpec, Player};
pub use grid::{Field, Grid};
pub use solver::{solve_system, SolveResult, SolverConfig};
