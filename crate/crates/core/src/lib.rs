pub mod polycalc;
pub mod admissible;
pub mod numerics;
pub mod gqe;
pub mod stability;
pub mod flow;
pub mod config;
pub mod cli;
