pub mod error;
pub mod lattice;
pub mod processes;
pub mod stoptimes;
pub mod snell;
pub mod oracle;
pub mod cascade;
pub mod expcli;
