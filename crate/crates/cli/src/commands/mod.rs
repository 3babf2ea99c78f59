pub mod enhance;
pub mod learn;
pub mod rt60;
pub mod simulate;
