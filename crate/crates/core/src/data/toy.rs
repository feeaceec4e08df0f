use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{GroundTruth, ProblemInstance};

/// The 4×5 design whose null space is spanned by `(2, 1, 1, 1, 1)`, with the
/// noiseless response of `x̄ = (2, 10, 0, 0, 0)`.
pub fn exam31() -> (ProblemInstance, GroundTruth) {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 5, &[
         1.0, 0.0, -2.0,  0.0,  0.0,
         1.0, 0.0,  0.0, -2.0,  0.0,
         1.0, 0.0,  0.0,  0.0, -2.0,
        -1.0, 2.0,  0.0,  0.0,  0.0,
    ]) * 0.5;
    let x_bar = DVector::from_vec(vec![2.0, 10.0, 0.0, 0.0, 0.0]);
    let b = &a * &x_bar;
    let inst = ProblemInstance::new(a, b).expect("hard-coded instance is valid");
    (inst, GroundTruth::new(x_bar, Some(DVector::zeros(4))))
}

/// Same instance as [`exam31`]; the iteration example reuses it.
pub fn exam42() -> (ProblemInstance, GroundTruth) {
    exam31()
}

/// The 3×4 design with `x̄ = (0, 0, 2, 10)` and constant noise `e` in every row.
pub fn exam41(e: f64) -> Result<(ProblemInstance, GroundTruth)> {
    if !(e > 0.0 && e <= 0.1) {
        return Err(Error::InvalidArgument(format!("noise level must lie in (0, 0.1], got {e}")));
    }
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(3, 4, &[
        1.0, -1.0, 0.0, 0.0,
        1.0,  0.0, 1.0, 0.0,
        2.0,  0.0, 0.0, 1.0,
    ]);
    let x_bar = DVector::from_vec(vec![0.0, 0.0, 2.0, 10.0]);
    let noise = DVector::from_element(3, e);
    let b = &a * &x_bar + &noise;
    let inst = ProblemInstance::new(a, b).expect("hard-coded instance is valid");
    Ok((inst, GroundTruth::new(x_bar, Some(noise))))
}

/// Looks up a toy by name; `e` is only used by `exam41` (default 0.05).
pub fn toy_instance(name: &str, e: Option<f64>) -> Result<(ProblemInstance, GroundTruth)> {
    match name {
        "exam31" => Ok(exam31()),
        "exam42" => Ok(exam42()),
        "exam41" => exam41(e.unwrap_or(0.05)),
        other => Err(Error::InvalidArgument(format!("unknown toy instance '{other}'"))),
    }
}
