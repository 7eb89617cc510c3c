//! Quadratic smoothing of the duality gap.
//!
//! The gap is a maximum of linear functionals over the joint strategy
//! space and therefore nonsmooth. Subtracting a strongly convex penalty
//! `mu * d(z')` inside that maximum yields a smooth surrogate whose
//! unique maximizer has a closed form: one spectraplex projection per
//! player. The surrogate under-estimates the gap by at most `mu * d_max`,
//! so driving it down drives the gap down at a controlled offset.

use crate::error::{Error, Result};
use crate::game::{GameInstance, GradientPair};
use crate::herm::{frobenius_inner, HermitianMatrix};
use crate::spectraplex::{joint_distance, project_spectraplex, JointState};

/// Bound on the regularizer over the joint strategy space. The squared
/// diameter of a product of two spectraplexes is at most 4, so the
/// half-squared-distance regularizer never exceeds 2.
pub const D_MAX: f64 = 2.0;

/// Strong-convexity modulus of the half-squared-distance regularizer.
pub const SIGMA_D: f64 = 1.0;

/// Smoothing level, reference point, and the two constants that govern
/// how tightly the smoothed gap tracks the true one.
#[derive(Clone, Debug)]
pub struct SmoothingContext {
    mu: f64,
    center: JointState,
    d_max: f64,
    sigma_d: f64,
}

/// Closed-form maximizer together with the two superoperator images of
/// the query point, which the value computation reuses.
struct MaximizerParts {
    maximizer: JointState,
    phi_beta: HermitianMatrix,
    phi_star_alpha: HermitianMatrix,
}

impl SmoothingContext {
    /// Context at level `mu` centered on the maximally mixed pair of the
    /// game's dimensions, with the analytic `d_max` bound of 2.
    pub fn standard(g: &GameInstance, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(Error::NonPositiveParameter { name: "mu", value: mu });
        }
        Ok(Self {
            mu,
            center: JointState::maximally_mixed(g.dim_a(), g.dim_b()),
            d_max: D_MAX,
            sigma_d: SIGMA_D,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn center(&self) -> &JointState {
        &self.center
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn sigma_d(&self) -> f64 {
        self.sigma_d
    }

    fn check_game(&self, g: &GameInstance) -> Result<()> {
        if self.center.alpha().dim() != g.dim_a() {
            return Err(Error::DimensionMismatch {
                expected: self.center.alpha().dim(),
                found: g.dim_a(),
            });
        }
        if self.center.beta().dim() != g.dim_b() {
            return Err(Error::DimensionMismatch {
                expected: self.center.beta().dim(),
                found: g.dim_b(),
            });
        }
        Ok(())
    }

    /// Half the squared distance from `z` to the center.
    pub fn regularizer(&self, z: &JointState) -> Result<f64> {
        let dist = joint_distance(z, &self.center)?;
        Ok(0.5 * dist * dist)
    }

    /// Unique maximizer of the regularized objective
    /// `z' -> tr(a Phi(b')) - tr(a' Phi(b)) - mu * d(z')`.
    ///
    /// The objective decouples across the two blocks and the penalty is
    /// a separable quadratic, so each block is a single spectraplex
    /// projection of the center shifted by a scaled superoperator image.
    pub fn smoothed_maximizer(&self, g: &GameInstance, z: &JointState) -> Result<JointState> {
        let parts = self.maximizer_parts(g, z.alpha().matrix(), z.beta().matrix())?;
        Ok(parts.maximizer)
    }

    /// Value of the regularized objective at its maximizer.
    pub fn smoothed_gap(&self, g: &GameInstance, z: &JointState) -> Result<f64> {
        self.smoothed_gap_linear(g, z.alpha().matrix(), z.beta().matrix())
    }

    /// Gradient of the smoothed gap: the game's gradient field evaluated
    /// at the smoothed maximizer.
    pub fn smoothed_gap_gradient(&self, g: &GameInstance, z: &JointState) -> Result<GradientPair> {
        let parts = self.maximizer_parts(g, z.alpha().matrix(), z.beta().matrix())?;
        g.gradient_field(&parts.maximizer)
    }

    /// Gradient Lipschitz constant of the smoothed gap,
    /// `|F|^2 / (mu * sigma_d)` with the cached field norm.
    pub fn lipschitz_constant(&self, g: &GameInstance) -> f64 {
        let norm = g.field_norm().value;
        norm * norm / (self.mu * self.sigma_d)
    }

    /// Smoothed gap extended linearly to raw Hermitian pairs. The public
    /// entry points restrict to feasible states; the extension exists so
    /// directional probes off the feasible set stay well defined.
    fn smoothed_gap_linear(
        &self,
        g: &GameInstance,
        alpha: &HermitianMatrix,
        beta: &HermitianMatrix,
    ) -> Result<f64> {
        let parts = self.maximizer_parts(g, alpha, beta)?;
        let gain = frobenius_inner(&parts.phi_star_alpha, parts.maximizer.beta().matrix())?;
        let loss = frobenius_inner(parts.maximizer.alpha().matrix(), &parts.phi_beta)?;
        let penalty = self.regularizer(&parts.maximizer)?;
        Ok(gain - loss - self.mu * penalty)
    }

    fn maximizer_parts(
        &self,
        g: &GameInstance,
        alpha: &HermitianMatrix,
        beta: &HermitianMatrix,
    ) -> Result<MaximizerParts> {
        self.check_game(g)?;
        let phi_star_alpha = g.superop_adjoint_linear(alpha)?;
        let phi_beta = g.superop_linear(beta)?;
        let inv_mu = 1.0 / self.mu;
        let arg_beta = self.center.beta().matrix().add_scaled(inv_mu, &phi_star_alpha);
        let arg_alpha = self.center.alpha().matrix().add_scaled(-inv_mu, &phi_beta);
        let beta_prime = project_spectraplex(&arg_beta)?;
        let alpha_prime = project_spectraplex(&arg_alpha)?;
        Ok(MaximizerParts {
            maximizer: JointState::new(alpha_prime, beta_prime),
            phi_beta,
            phi_star_alpha,
        })
    }
}

/// Regularized objective evaluated directly from its definition, used by
/// tests as an independent route around the closed-form shortcut.
#[cfg(test)]
fn direct_objective(
    ctx: &SmoothingContext,
    g: &GameInstance,
    z: &JointState,
    candidate: &JointState,
) -> f64 {
    let gain = g
        .payoff_linear(z.alpha().matrix(), candidate.beta().matrix())
        .expect("dims agree");
    let loss = g
        .payoff_linear(candidate.alpha().matrix(), z.beta().matrix())
        .expect("dims agree");
    gain - loss - ctx.mu() * ctx.regularizer(candidate).expect("dims agree")
}
