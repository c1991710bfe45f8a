pub mod error;
pub mod group;
pub mod quadrature;
pub mod operators;
pub mod inequalities;
pub mod trials;
pub mod cli;
