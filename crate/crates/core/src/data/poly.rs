use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `C(d + p, p) − 1`, the number of monomials of degree 1..=p in `d` variables.
pub fn poly_column_count(d: usize, p: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 1..=p as u128 {
        c = c * (d as u128 + k) / k;
    }
    c - 1
}

/// All monomials of total degree 1..=p in graded lexicographic order.
///
/// Fails with `BudgetExceeded` when the output would hold more than
/// `max_entries` numbers.
pub fn poly_expand(a: &DMatrix<f64>, p: usize, max_entries: u128) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("polynomial order must be at least 1".into()));
    }
    let (m, d) = (a.nrows(), a.ncols());
    let count = poly_column_count(d, p);
    let entries = count * m as u128;
    if entries > max_entries {
        return Err(Error::BudgetExceeded { required: entries, budget: max_entries });
    }
    let count = count as usize;
    let mut out = DMatrix::zeros(m, count);
    // Each monomial of the previous degree, as (column in `out`, last variable).
    let mut frontier: Vec<(usize, usize)> = Vec::with_capacity(d);
    for j in 0..d {
        out.set_column(j, &a.column(j));
        frontier.push((j, j));
    }
    let mut next_col = d;
    for _ in 2..=p {
        let mut next = Vec::new();
        for &(parent, last) in &frontier {
            for j in last..d {
                let col = out.column(parent).component_mul(&a.column(j));
                out.set_column(next_col, &col);
                next.push((next_col, j));
                next_col += 1;
            }
        }
        frontier = next;
    }
    debug_assert_eq!(next_col, count);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_features_order_two() {
        let a = DMatrix::from_row_slice(1, 2, &[2.0, 3.0]);
        let e = poly_expand(&a, 2, u128::MAX).unwrap();
        assert_eq!(e.as_slice(), &[2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn order_one_is_identity() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(poly_expand(&a, 1, u128::MAX).unwrap(), a);
    }

    #[test]
    fn pyrim_count_and_budget() {
        assert_eq!(poly_column_count(27, 5), 201_375);
        let a = DMatrix::zeros(10, 27);
        assert!(matches!(poly_expand(&a, 5, 1_000_000), Err(Error::BudgetExceeded { .. })));
    }
}
