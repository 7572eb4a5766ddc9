//! Arbitrage-free evolution of the Svensson family.
//!
//! Consistency forces `tau2 = tau1 / 2` and `beta3 > 0`. Then `beta2` and
//! `beta3` decay deterministically while `beta1` follows a Gaussian
//! Ornstein-Uhlenbeck type equation, so the reduced coordinate `gamma2(t)` is
//! normal with explicit mean and variance and `gamma1(t)` is deterministic.

mod monte_carlo;
mod probabilities;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::envelope_geometry::LineFamily;
use crate::error::{Error, Result};
use crate::shape::ShapeTag;
use crate::term_structure::{CurveKind, CurveParams, Sign};

pub use monte_carlo::{euler_gamma2_moments, sample_shapes, sample_shapes_threads};
pub use probabilities::{
    crossing_bands, forward_lambert_bounds, shape_bands, shape_probabilities, LambertBounds, ShapeBands, ShapeDistribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInitial")]
pub struct DynamicsInitial {
    beta0: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    tau1: f64,
}

#[derive(Deserialize)]
struct RawInitial {
    beta0: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    tau1: f64,
}

impl TryFrom<RawInitial> for DynamicsInitial {
    type Error = Error;
    fn try_from(r: RawInitial) -> Result<Self> {
        DynamicsInitial::new(r.beta0, r.beta1, r.beta2, r.beta3, r.tau1)
    }
}

impl DynamicsInitial {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, beta3: f64, tau1: f64) -> Result<Self> {
        if ![beta0, beta1, beta2, beta3, tau1].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("parameters must be finite".into()));
        }
        if !(tau1 > 0.0) {
            return Err(Error::Validation("tau1 must be positive".into()));
        }
        if !(beta3 > 0.0) {
            return Err(Error::Consistency("beta3 must be greater than 0".into()));
        }
        Ok(DynamicsInitial { beta0, beta1, beta2, beta3, tau1 })
    }

    /// Initial state taken from a Svensson parameter set with `tau2 = tau1 / 2`.
    pub fn from_params(p: &CurveParams) -> Result<Self> {
        let rel = (p.tau2() - p.tau1() / 2.0).abs() / p.tau1();
        if rel > 1e-12 {
            return Err(Error::Consistency(format!(
                "consistent dynamics need tau2 = tau1/2, got tau1 = {}, tau2 = {}",
                p.tau1(),
                p.tau2()
            )));
        }
        let b = p.beta();
        DynamicsInitial::new(b[0], b[1], b[2], b[3], p.tau1())
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn beta1(&self) -> f64 {
        self.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }
    pub fn beta3(&self) -> f64 {
        self.beta3
    }
    pub fn tau1(&self) -> f64 {
        self.tau1
    }
    pub fn tau2(&self) -> f64 {
        self.tau1 / 2.0
    }

    pub fn gamma1(&self, t: f64) -> f64 {
        self.beta2 / self.beta3 * (t / self.tau1).exp()
    }

    /// Parameters at time `t` with `gamma2(t) = g2`.
    pub fn params_at(&self, t: f64, g2: f64) -> Result<CurveParams> {
        let b2 = self.beta2 * (-t / self.tau1).exp();
        let b3 = self.beta3 * (-2.0 * t / self.tau1).exp();
        CurveParams::new([self.beta0, g2 * b3, b2, b3], self.tau1, self.tau2())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// Parameters at time `t` with `beta1` at its mean, and `gamma1(t)`.
pub fn evolve_params(init: &DynamicsInitial, t: f64) -> Result<(CurveParams, f64)> {
    check_time(t)?;
    let (mu, _) = gamma2_law(init, t)?;
    Ok((init.params_at(t, mu)?, init.gamma1(t)))
}

/// Mean and variance of `gamma2(t)`.
pub fn gamma2_law(init: &DynamicsInitial, t: f64) -> Result<(f64, f64)> {
    check_time(t)?;
    let tau = init.tau1;
    let g = (t / tau).exp();
    let mu = g * (init.beta2 / (init.beta3 * tau) * t + init.beta1 / init.beta3 + 2.0) - 2.0;
    let var = 2.0 * t * g * g / (init.beta3 * tau * tau);
    Ok((mu, var))
}

/// Shape-loss horizons. Entries of the branch not selected by the sign of `beta2` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizons {
    pub t_dagger_f: f64,
    pub t_star_f: f64,
    pub t_dagger_y: f64,
    pub t_star_star_y: f64,
    pub t_star_y: f64,
    /// Sign of `beta2`; `None` when `beta2 = 0`.
    pub branch: Option<Sign>,
    /// Set when `beta2 = 0`, where every horizon is reported as zero.
    pub degenerate: bool,
}

/// First coordinate of the yield envelope's cusp for `tau2 = tau1 / 2`. The
/// reduced plane picture depends only on the ratio of the time scales.
pub fn yield_cusp_gamma1() -> Result<f64> {
    static CUSP: OnceLock<Result<f64>> = OnceLock::new();
    CUSP.get_or_init(|| {
        let fam = LineFamily::new(CurveKind::Yield, 1.0, 0.5)?;
        let x = fam
            .cusp_abscissa()?
            .ok_or_else(|| Error::Internal("yield envelope has no cusp".into()))?;
        Ok(fam.envelope_point(x)[0])
    })
    .clone()
}

fn crossing_time(tau1: f64, ratio: f64) -> f64 {
    // solves (beta2/beta3) exp(t/tau1) = abscissa; `ratio` is abscissa * beta3 / beta2
    (tau1 * ratio.ln()).max(0.0)
}

pub fn horizons(init: &DynamicsInitial) -> Result<Horizons> {
    let (b2, b3, tau) = (init.beta2, init.beta3, init.tau1);
    let mut h = Horizons {
        t_dagger_f: 0.0,
        t_star_f: 0.0,
        t_dagger_y: 0.0,
        t_star_star_y: 0.0,
        t_star_y: 0.0,
        branch: Sign::of(b2),
        degenerate: b2 == 0.0,
    };
    match h.branch {
        None => {}
        Some(Sign::Positive) => {
            h.t_dagger_f = (tau * (-2.5 + (4.0 * b3 / b2).ln())).max(0.0);
            h.t_dagger_y = crossing_time(tau, yield_cusp_gamma1()? * b3 / b2);
        }
        Some(Sign::Negative) => {
            h.t_star_f = crossing_time(tau, 6.0 * b3 / b2.abs());
            h.t_star_star_y = crossing_time(tau, 5.0 * b3 / (4.0 * b2.abs()));
            h.t_star_y = h.t_star_f;
        }
    }
    Ok(h)
}

/// The shape that almost surely dominates as `t` grows.
pub fn long_run_shape(init: &DynamicsInitial) -> Result<ShapeTag> {
    match Sign::of(init.beta2) {
        Some(Sign::Positive) => Ok(ShapeTag::I),
        Some(Sign::Negative) => Ok(ShapeTag::N),
        None => Err(Error::Undetermined("long-run shape needs beta2 != 0".into())),
    }
}

/// Shapes a forward curve can ever reach from `init`.
pub fn trapped_set(init: &DynamicsInitial) -> Option<[ShapeTag; 3]> {
    match Sign::of(init.beta2)? {
        Sign::Positive => Some([ShapeTag::I, ShapeTag::H, ShapeTag::Hdh]),
        Sign::Negative => Some([ShapeTag::N, ShapeTag::D, ShapeTag::Hd]),
    }
}

#[cfg(test)]
mod tests;
