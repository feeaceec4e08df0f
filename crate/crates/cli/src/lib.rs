//! Experiment harness behind the `iscra` binary: instance sources, solver
//! dispatch and the CSV rows produced by `solve` and `sweep`.

pub mod experiment;
pub mod source;
