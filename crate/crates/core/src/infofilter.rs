//! Information-form position estimation for static targets.
//!
//! State is kept as the information pair `(y, Y)` where `Y = P^-1` and
//! `y = P^-1 * x_hat`. Because the targets do not move there is no
//! prediction step: folding in a measurement and fusing two estimates are
//! both plain additions, which makes estimate merging during reclustering
//! exact and order-insensitive up to floating-point rounding. The
//! moment-form `(x_hat, P)` is only materialized on demand.

use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

/// Additive information carried by one measurement: `dY = H^T R^-1 H`,
/// `dy = H^T R^-1 z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementContribution {
    pub vec: Vec2,
    pub mat: Mat2,
}

/// Information-form estimate. The zero state carries no information and
/// is the identity for both `update` and `fuse`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InfoState {
    /// Information vector `y = P^-1 * x_hat`.
    #[serde(rename = "y")]
    pub vec: Vec2,
    /// Information matrix `Y = P^-1`.
    #[serde(rename = "Y")]
    pub mat: Mat2,
}

impl InfoState {
    pub const ZERO: InfoState = InfoState { vec: Vec2::ZERO, mat: Mat2::ZERO };

    /// State holding exactly one measurement's information.
    pub fn from_contribution(c: &MeasurementContribution) -> Self {
        InfoState::ZERO.updated(c)
    }

    /// Fold one measurement into the estimate.
    pub fn updated(&self, c: &MeasurementContribution) -> InfoState {
        InfoState { vec: self.vec + c.vec, mat: self.mat + c.mat }
    }

    /// Merge two estimates of the same target. Commutative and, apart
    /// from floating-point rounding, associative.
    pub fn fused(&self, other: &InfoState) -> InfoState {
        InfoState { vec: self.vec + other.vec, mat: self.mat + other.mat }
    }

    /// Recover the moment form `(x_hat, P)`. Fails while the state holds
    /// no (or degenerate) information.
    pub fn recover(&self) -> Result<(Vec2, Mat2)> {
        let p = self.mat.try_inverse().ok_or(Error::UnrecoverableState)?;
        let x_hat = p * self.vec;
        Ok((x_hat, p))
    }
}

/// Information contribution of measurement `z` with noise covariance `r`,
/// for a direct position measurement (`H = I`): `dY = R^-1`, `dy = R^-1 z`.
///
/// `r` must be symmetric positive-definite and invertible at the working
/// precision; the result matrix is symmetrized to keep accumulated states
/// exactly symmetric.
pub fn contribution(z: Vec2, r: Mat2) -> Result<MeasurementContribution> {
    contribution_with_model(z, r, Mat2::IDENTITY)
}

/// As [`contribution`] but with an explicit linear measurement model `H`.
pub fn contribution_with_model(z: Vec2, r: Mat2, h: Mat2) -> Result<MeasurementContribution> {
    if !z.is_finite() {
        return Err(Error::InvalidDetection("non-finite measurement".into()));
    }
    if !r.is_spd() {
        return Err(Error::NonSpdCovariance);
    }
    let r_inv = r.try_inverse().ok_or(Error::NonSpdCovariance)?;
    let ht = h.transpose();
    Ok(MeasurementContribution {
        vec: ht * (r_inv * z),
        mat: (ht * r_inv * h).symmetrized(),
    })
}
