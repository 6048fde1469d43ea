//! Command-line front end for `flg-core`, plus the seeded random-network
//! generator and the batch property suite used by `oracle-test`.

pub mod commands;
pub mod config;
pub mod generate;
pub mod oracle;
