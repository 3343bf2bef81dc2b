pub mod builtin;
pub mod cli;
pub mod domain;
pub mod error;
pub mod gradient;
pub mod kernel;
pub mod linalg;
pub mod maps;
pub mod metric;
pub mod point;
pub mod quadrature;
pub mod report;
pub mod runner;
pub mod sample;
pub mod scenario;
pub mod schwarz;
pub mod stats;
