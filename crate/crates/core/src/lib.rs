pub mod algebra;
pub mod error;
pub mod linalg;
pub mod qubit_map;
pub mod factor;
pub mod compile;
pub mod sim;
pub mod experiments;
pub mod plot;
pub mod cli;
