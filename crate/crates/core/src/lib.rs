//! Executable semantics for nondeterministic temporal structural equation
//! models, compilers from bounded automata and Turing machines into
//! "causal calculator" models, and bounded equivalence checks between the
//! two.

pub mod cli;
pub mod compile;
pub mod counterfactual;
pub mod equiv;
pub mod io;
pub mod machines;
pub mod tsem;
