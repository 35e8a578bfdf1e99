pub mod construct;
pub mod explore;
pub mod ffield;
pub mod graph;
pub mod mpoly;
pub mod stats;
pub mod theta;
