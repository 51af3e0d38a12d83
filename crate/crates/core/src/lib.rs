pub mod cli;
pub mod error;
pub mod gallery;
pub mod geometry;
pub mod io;
pub mod joint;
pub mod linalg;
pub mod range;
pub mod reducing;
