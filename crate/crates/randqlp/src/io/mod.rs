pub mod binary;
pub mod mtx;
pub mod tables;
