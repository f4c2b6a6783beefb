//! Serialization for the sweep commands: fixed-layout CSV and JSON with run
//! metadata, plus the CSV parser the round-trip checks rely on.

pub mod output;
