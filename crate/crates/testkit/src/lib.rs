//! Shared test support: fixture documents, a seeded generator of valid
//! analyses, and brute-force oracles written independently of `scha-core`'s
//! own algorithms.

pub mod fixtures;
pub mod gen;
pub mod oracle;
