//! Finite nonassociative binary systems over Cayley tables: quasigroups,
//! loops and metagroups, their classification, quotients by central
//! subgroups, smashed and smashed twisted products, and smashed twisted
//! wreath products, with exhaustive verification of every construction.

pub mod classify;
pub mod error;
pub mod extension;
pub mod gen;
pub mod identities;
pub mod io;
pub mod products;
pub mod subquot;
pub mod table;
pub mod wreath;

pub use classify::{classify, StructureReport};
pub use error::Error;
pub use table::{Element, Limits, MagmaTable};
