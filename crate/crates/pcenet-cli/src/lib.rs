//! Serialization and export formats for net patches, plus the report
//! schema shared by the verification subcommands.

pub mod netfile;
pub mod obj;
pub mod report;
