pub mod logic;
pub mod corelang;
pub mod speclang;
pub mod smt;
pub mod problem;
pub mod verify;
pub mod engine_fw;
pub mod engine_bw;
pub mod cdcl;
pub mod run;
