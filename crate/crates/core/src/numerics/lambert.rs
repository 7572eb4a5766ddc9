use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real branch of the Lambert W function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WBranch {
    Principal,
    MinusOne,
}

#[cfg(test)]
const INV_E: f64 = 0.367_879_441_171_442_33;

/// Solves `w * exp(w) = x` on the requested real branch by Halley iteration.
pub fn lambert_w(branch: WBranch, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w argument {x} is not finite")));
    }
    // p^2 = 2(e x + 1) measures the distance to the branch point
    let mut p2 = 2.0 * (std::f64::consts::E * x + 1.0);
    if p2 < 0.0 {
        if p2 > -1e-14 {
            p2 = 0.0;
        } else {
            return Err(Error::Domain(format!("lambert_w argument {x} < -1/e")));
        }
    }
    if branch == WBranch::MinusOne && x >= 0.0 {
        return Err(Error::Domain(format!("branch -1 requires x < 0, got {x}")));
    }
    if p2 == 0.0 {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let p = p2.sqrt();
    let mut w = match branch {
        WBranch::Principal => {
            if x < -0.32 {
                -1.0 + p - p2 / 3.0 + 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2
            } else if x < 3.0 {
                let l = x.ln_1p();
                l * (1.0 - (1.0 + l).ln() / (2.0 + l))
            } else {
                let l1 = x.ln();
                let l2 = l1.ln();
                l1 - l2 + l2 / l1
            }
        }
        WBranch::MinusOne => {
            if x < -0.25 {
                -1.0 - p - p2 / 3.0 - 11.0 / 72.0 * p2 * p - 43.0 / 540.0 * p2 * p2
            } else {
                let l1 = (-x).ln();
                let l2 = (-l1).ln();
                l1 - l2 + l2 / l1
            }
        }
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    // keep the result on its branch even when rounding pushes it across -1
    w = match branch {
        WBranch::Principal => w.max(-1.0),
        WBranch::MinusOne => w.min(-1.0),
    };
    if !w.is_finite() {
        return Err(Error::Numerical(format!("lambert_w did not converge at {x}")));
    }
    Ok(w)
}
