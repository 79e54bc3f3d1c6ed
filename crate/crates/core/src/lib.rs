pub mod embedding;
pub mod graph;
pub mod oracle;
pub mod rounding;
pub mod sdp;
pub mod separators;
pub mod solver;
