pub mod cli;
pub mod data;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod path;
pub mod screening;
pub mod solver;
pub mod vecops;
