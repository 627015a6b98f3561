pub mod ce;
pub mod cli;
pub mod dgla;
pub mod error;
pub mod fixtures;
pub mod formality;
pub mod graded;
pub mod linalg;
pub mod linf;
pub mod mc;
pub mod multilinear;
pub mod power;
pub mod problem;
pub mod rational;
pub mod specseq;
