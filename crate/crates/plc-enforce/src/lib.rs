//! Front end for `plc-enforce-core`: the `.plc` source format, generators for
//! the water transmission network and random terms, parallel exploration,
//! exports and the synthesis benchmark.

pub mod bench;
pub mod dsl;
pub mod export;
pub mod gen;
pub mod parallel;
pub mod sysref;

pub use dsl::{parse, ParseError, SourceFile};
pub use parallel::explore_parallel;
pub use sysref::{resolve, Resolved};
