pub mod catalog;
pub mod cyclotomic;
pub mod error;
pub mod fkb_ideal;
pub mod ideal_lattice;
pub mod link_diagram;
pub mod quantum_invariant;
pub mod skein_eval;

pub use error::{Error, Result};
