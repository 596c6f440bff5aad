pub mod cli;
pub mod diagnosis;
pub mod discovery;
pub mod num;
pub mod repair;
pub mod stats;
pub mod trace;
