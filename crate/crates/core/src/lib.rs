//! Build labelled crash datasets by mutating C/C++ code, and score
//! fault-localization predictions against them.

pub mod campaign;
pub mod dataset;
pub mod evaluation;
pub mod jsonl;
pub mod mutation;
pub mod prompting;
pub mod stacktrace;
