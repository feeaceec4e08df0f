//! Instance construction: hard-coded toy problems, AR(1) synthetic designs,
//! LIBSVM files and polynomial feature expansion.

mod libsvm;
mod poly;
mod synthetic;
mod toy;

pub use libsvm::{parse_libsvm, read_libsvm, write_libsvm, LibsvmData};
pub use poly::{poly_column_count, poly_expand};
pub use synthetic::{gen_synthetic, SyntheticSpec, PRESETS};
pub use toy::{exam31, exam41, exam42, toy_instance};
