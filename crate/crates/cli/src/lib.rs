//! Configuration, HTTP provider clients and the local HTTP service behind the
//! `nim` binary.

pub mod config;
pub mod http;
pub mod service;

use nim_core::decompose::ErrorClass;

/// Process exit codes.
pub mod exit {
    pub const INPUT: u8 = 2;
    pub const PROVIDER: u8 = 3;
    pub const ONTOLOGY: u8 = 4;
}

pub fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Input => exit::INPUT,
        ErrorClass::Provider => exit::PROVIDER,
        ErrorClass::Ontology => exit::ONTOLOGY,
    }
}
