//! Proximal maps of the separable penalty and of its convex conjugate.
//!
//! For one coordinate the penalty is `f(x) = λw|x| − v·x` restricted to
//! `|x| ≤ μ`. Its conjugate is `f*(z) = μ·(|z + v| − λw)₊` for a finite box and
//! the indicator of `|z + v| ≤ λw` otherwise, so both proximal maps are
//! available in closed form.

use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::model::SeparablePenalty;

/// A point, a penalty and a positive step `t`.
#[derive(Debug, Clone, Copy)]
pub struct ProxQuery<'a> {
    pub point: &'a DVector<f64>,
    pub penalty: &'a SeparablePenalty,
    pub step: f64,
}

impl<'a> ProxQuery<'a> {
    pub fn new(point: &'a DVector<f64>, penalty: &'a SeparablePenalty, step: f64) -> Self {
        Self { point, penalty, step }
    }

    fn check(&self) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(Error::InvalidArgument(format!("prox step must be positive, got {}", self.step)));
        }
        check_len(self.penalty.len(), self.point.len())
    }
}

/// Per-coordinate penalty data: `λw`, `v`, `μ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Coord {
    pub lw: f64,
    pub tilt: f64,
    pub radius: f64,
}

impl Coord {
    #[inline]
    pub fn of(p: &SeparablePenalty, i: usize) -> Self {
        Self {
            lw: p.lambda * p.weights[i],
            tilt: p.tilt[i],
            radius: p.box_radius[i],
        }
    }
}

#[inline]
pub(crate) fn soft(z: f64, alpha: f64) -> f64 {
    let a = z.abs() - alpha;
    if a > 0.0 {
        a.copysign(z)
    } else {
        0.0
    }
}

/// `argmin_y t·f(y) + ½(y − u)²`.
#[inline]
pub(crate) fn prox_primal_coord(u: f64, c: Coord, t: f64) -> f64 {
    let y = soft(u + t * c.tilt, t * c.lw);
    if c.radius.is_finite() {
        y.clamp(-c.radius, c.radius)
    } else {
        y
    }
}

/// `argmin_z t·f*(z) + ½(z − u)²`.
#[inline]
pub(crate) fn prox_conj_coord(u: f64, c: Coord, t: f64) -> f64 {
    let y = u + c.tilt;
    let p = if c.radius.is_finite() {
        let a = y.abs();
        if a <= c.lw {
            y
        } else {
            (c.lw + (a - c.lw - t * c.radius).max(0.0)).copysign(y)
        }
    } else {
        y.clamp(-c.lw, c.lw)
    };
    p - c.tilt
}

/// `f*(z)` for one coordinate; `+∞` outside the domain.
#[inline]
pub(crate) fn conj_coord(z: f64, c: Coord) -> f64 {
    let a = (z + c.tilt).abs();
    if c.radius.is_finite() {
        c.radius * (a - c.lw).max(0.0)
    } else if a <= c.lw * (1.0 + 1e-12) + 1e-14 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Diagonal entry of the generalized Jacobian of the conjugate prox at `u`.
///
/// Returns `true` for 1, i.e. the coordinate is not in the primal active set.
#[inline]
pub(crate) fn jacobian_coord(u: f64, c: Coord, t: f64) -> bool {
    let a = (u + c.tilt).abs();
    if c.radius.is_finite() {
        if c.lw == 0.0 {
            a > t * c.radius
        } else {
            a <= c.lw || a > c.lw + t * c.radius
        }
    } else {
        c.lw > 0.0 && a <= c.lw
    }
}

/// Primal prox `prox_{t f}(u)`.
pub fn prox_primal(q: ProxQuery<'_>) -> Result<DVector<f64>> {
    q.check()?;
    let p = q.penalty;
    Ok(DVector::from_fn(q.point.len(), |i, _| prox_primal_coord(q.point[i], Coord::of(p, i), q.step)))
}

/// Conjugate prox `prox_{t f*}(u)`.
pub fn prox_conjugate(q: ProxQuery<'_>) -> Result<DVector<f64>> {
    q.check()?;
    let p = q.penalty;
    Ok(DVector::from_fn(q.point.len(), |i, _| prox_conj_coord(q.point[i], Coord::of(p, i), q.step)))
}

/// Conjugate value `f*(z)`, possibly `+∞`.
pub fn conjugate_value(penalty: &SeparablePenalty, z: &DVector<f64>) -> f64 {
    (0..z.len()).map(|i| conj_coord(z[i], Coord::of(penalty, i))).sum()
}

/// Moreau envelope `e_t f*(u) = min_z f*(z) + ‖z − u‖²/(2t)`.
pub fn moreau_envelope_conjugate(q: ProxQuery<'_>) -> Result<f64> {
    q.check()?;
    let t = q.step;
    let mut total = 0.0;
    for i in 0..q.point.len() {
        let c = Coord::of(q.penalty, i);
        let u = q.point[i];
        let p = prox_conj_coord(u, c, t);
        // The infinite-box branch projects onto the domain, where f* vanishes.
        let fp = if c.radius.is_finite() { conj_coord(p, c) } else { 0.0 };
        total += fp + (u - p) * (u - p) / (2.0 * t);
    }
    Ok(total)
}

/// 0/1 Jacobian diagonal of the conjugate prox for truncated-ℓ1 penalties.
pub fn prox_jacobian_diag(q: ProxQuery<'_>) -> Result<DVector<f64>> {
    q.check()?;
    if !q.penalty.is_truncated_l1() {
        return Err(Error::UnsupportedPenalty(
            "jacobian diagonal needs binary weights and zero tilt".into(),
        ));
    }
    Ok(jacobian_diag(q.point, q.penalty, q.step).map(|d| if d { 1.0 } else { 0.0 }))
}

/// Jacobian diagonal for any separable penalty, as booleans.
pub(crate) fn jacobian_diag(u: &DVector<f64>, penalty: &SeparablePenalty, t: f64) -> nalgebra::DVector<bool> {
    DVector::from_fn(u.len(), |i, _| jacobian_coord(u[i], Coord::of(penalty, i), t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn one(lambda: f64, w: f64, v: f64, mu: f64) -> SeparablePenalty {
        SeparablePenalty {
            lambda,
            weights: DVector::from_element(1, w),
            tilt: DVector::from_element(1, v),
            box_radius: DVector::from_element(1, mu),
        }
    }

    fn scalar(u: f64) -> DVector<f64> {
        DVector::from_element(1, u)
    }

    #[test]
    fn soft_threshold_textbook() {
        let p = one(0.3, 1.0, 0.0, f64::INFINITY);
        let u = scalar(1.0);
        assert_relative_eq!(prox_primal(ProxQuery::new(&u, &p, 1.0)).unwrap()[0], 0.7, epsilon = 1e-15);
        let z = DVector::zeros(1);
        assert_eq!(prox_primal(ProxQuery::new(&z, &p, 1.0)).unwrap()[0], 0.0);
    }

    #[test]
    fn boxed_free_coordinate_matches_grid() {
        let p = one(1.0, 0.0, 0.0, 2.0);
        let u = scalar(5.0);
        let got = prox_primal(ProxQuery::new(&u, &p, 1.0)).unwrap()[0];
        assert_eq!(got, 2.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut y = -6.0;
        while y <= 6.0 {
            let obj = 0.5 * (y - 5.0_f64).powi(2) + p.value(&scalar(y));
            if obj < best.0 {
                best = (obj, y);
            }
            y += 1e-4;
        }
        assert!((best.1 - got).abs() <= 1e-3);
    }

    #[test]
    fn conjugate_prox_examples() {
        let p = one(0.1, 1.0, 0.0, f64::INFINITY);
        let u = scalar(0.5);
        assert_relative_eq!(prox_conjugate(ProxQuery::new(&u, &p, 1.0)).unwrap()[0], 0.1);
        let p = one(0.1, 0.0, 0.0, 100.0);
        assert_eq!(prox_conjugate(ProxQuery::new(&u, &p, 0.01)).unwrap()[0], 0.0);
    }

    #[test]
    fn envelope_hand_value() {
        let p = one(0.1, 1.0, 0.0, f64::INFINITY);
        let u = scalar(0.5);
        assert_relative_eq!(moreau_envelope_conjugate(ProxQuery::new(&u, &p, 1.0)).unwrap(), 0.08, epsilon = 1e-15);
        let z = DVector::zeros(1);
        assert_eq!(moreau_envelope_conjugate(ProxQuery::new(&z, &p, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn jacobian_cases_and_ties() {
        let unit = one(0.1, 1.0, 0.0, f64::INFINITY);
        let d = |p: &SeparablePenalty, u: f64, t: f64| prox_jacobian_diag(ProxQuery::new(&scalar(u), p, t)).unwrap()[0];
        assert_eq!(d(&unit, 0.05, 1.0), 1.0);
        assert_eq!(d(&unit, 0.1, 1.0), 1.0);
        assert_eq!(d(&unit, 0.2, 1.0), 0.0);
        let free = one(0.1, 0.0, 0.0, 100.0);
        assert_eq!(d(&free, 0.5, 0.01), 0.0);
        assert_eq!(d(&free, 1.0, 0.01), 0.0);
        assert_eq!(d(&free, 1.5, 0.01), 1.0);
        let weighted = one(0.1, 0.5, 0.0, f64::INFINITY);
        assert!(prox_jacobian_diag(ProxQuery::new(&scalar(0.0), &weighted, 1.0)).is_err());
    }

    #[test]
    fn rejects_bad_step() {
        let p = one(0.1, 1.0, 0.0, f64::INFINITY);
        assert!(prox_primal(ProxQuery::new(&scalar(1.0), &p, 0.0)).is_err());
    }

    #[test]
    fn general_coordinate_obeys_moreau_identity() {
        let p = one(0.4, 0.7, -0.3, 1.5);
        for &u in &[-5.0, -1.0, -0.2, 0.0, 0.3, 0.9, 4.0] {
            for &t in &[0.1, 1.0, 7.0] {
                let x = prox_primal_coord(u, Coord::of(&p, 0), t);
                let z = prox_conj_coord(u / t, Coord::of(&p, 0), 1.0 / t);
                assert_relative_eq!(x + t * z, u, epsilon = 1e-12);
            }
        }
    }
}
