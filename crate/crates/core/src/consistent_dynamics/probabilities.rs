use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{gamma2_law, horizons, DynamicsInitial};
use crate::envelope_geometry::LineFamily;
use crate::error::{Error, Result};
use crate::numerics::{brent_root, lambert_w, normal_cdf, Bracket, WBranch};
use crate::shape::ShapeTag;
use crate::shape_oracle::classify_direct;
use crate::term_structure::{CurveKind, Sign};

/// Probabilities below this are reported as zero.
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDistribution {
    pub t: f64,
    pub kind: CurveKind,
    pub probs: BTreeMap<ShapeTag, f64>,
    /// Sample count for empirical distributions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl ShapeDistribution {
    pub fn prob(&self, shape: ShapeTag) -> f64 {
        self.probs.get(&shape).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

/// Partition of the `gamma2` axis at fixed `gamma1` into shape bands:
/// `shapes[k]` holds on `(cuts[k-1], cuts[k])` with the outer bands unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeBands {
    pub gamma1: f64,
    pub cuts: Vec<f64>,
    pub shapes: Vec<ShapeTag>,
}

impl ShapeBands {
    fn new(gamma1: f64, cuts: Vec<f64>, shapes: Vec<ShapeTag>) -> Self {
        debug_assert_eq!(cuts.len() + 1, shapes.len());
        let mut b = ShapeBands { gamma1, cuts: Vec::new(), shapes: vec![shapes[0]] };
        for (c, s) in cuts.into_iter().zip(shapes.into_iter().skip(1)) {
            if *b.shapes.last().unwrap() == s {
                continue;
            }
            b.cuts.push(c);
            b.shapes.push(s);
        }
        b
    }

    pub fn shape_at(&self, g2: f64) -> ShapeTag {
        let k = self.cuts.partition_point(|&c| c < g2);
        self.shapes[k]
    }

    /// Probability of each band under `N(mu, var)`.
    pub fn masses(&self, mu: f64, var: f64) -> BTreeMap<ShapeTag, f64> {
        let sd = var.sqrt();
        let z: Vec<f64> = self.cuts.iter().map(|c| (c - mu) / sd).collect();
        let mut out = BTreeMap::new();
        for (k, s) in self.shapes.iter().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { z[k - 1] };
            let hi = if k == z.len() { f64::INFINITY } else { z[k] };
            // difference of upper tails is accurate on the right
            let p = if lo > 0.0 { normal_cdf(-lo) - normal_cdf(-hi) } else { normal_cdf(hi) - normal_cdf(lo) };
            *out.entry(*s).or_insert(0.0) += p.max(0.0);
        }
        out.retain(|_, p| *p >= UNDERFLOW);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertBounds {
    /// `gamma2` where the vertical through `gamma1(t)` meets the first line.
    pub i0: f64,
    /// Envelope abscissa on the principal branch.
    pub x0: Option<f64>,
    /// Envelope abscissa on the lower branch.
    pub x_minus1: Option<f64>,
    pub eta_x0: Option<f64>,
    pub eta_x_minus1: Option<f64>,
}

/// Second coordinate of the forward envelope for `tau2 = tau1 / 2` at `u = x / tau1`.
fn forward_eta2(u: f64) -> f64 {
    -4.0 * (-u).exp() * (u * u - 1.5 * u + 1.0)
}

/// Intersections of the forward envelope with the vertical through `gamma1(t)`.
///
/// The abscissas solve `(x - 3 tau1/2) exp(-x/tau1) = tau1 beta2/(4 beta3) exp(t/tau1)`,
/// that is `x = tau1 (3/2 - W(-beta2/(4 beta3) exp(t/tau1 + 3/2)))`.
pub fn forward_lambert_bounds(init: &DynamicsInitial, t: f64) -> Result<LambertBounds> {
    super::check_time(t)?;
    let tau = init.tau1();
    let g1 = init.gamma1(t);
    let i0 = 2.0 + g1;
    let arg = -init.beta2() / (4.0 * init.beta3()) * (t / tau + 1.5).exp();
    let branch_point = -(-1.0f64).exp();
    let mut b = LambertBounds { i0, x0: None, x_minus1: None, eta_x0: None, eta_x_minus1: None };
    if arg < branch_point {
        return Ok(b);
    }
    let w0 = lambert_w(WBranch::Principal, arg)?;
    let u0 = 1.5 - w0;
    if u0 > 0.0 {
        b.x0 = Some(tau * u0);
        b.eta_x0 = Some(forward_eta2(u0));
    }
    if arg < 0.0 {
        let u1 = 1.5 - lambert_w(WBranch::MinusOne, arg)?;
        b.x_minus1 = Some(tau * u1);
        b.eta_x_minus1 = Some(forward_eta2(u1));
    }
    Ok(b)
}

fn forward_bands(init: &DynamicsInitial, t: f64) -> Result<ShapeBands> {
    use ShapeTag::*;
    let h = horizons(init)?;
    let b = forward_lambert_bounds(init, t)?;
    let g1 = init.gamma1(t);
    match Sign::of(init.beta2()) {
        Some(Sign::Positive) => {
            if t < h.t_dagger_f {
                if let (Some(lo), Some(hi)) = (b.eta_x0, b.eta_x_minus1) {
                    return Ok(ShapeBands::new(g1, vec![lo, hi, b.i0], vec![H, Hdh, H, I]));
                }
            }
            Ok(ShapeBands::new(g1, vec![b.i0], vec![H, I]))
        }
        Some(Sign::Negative) => {
            if t < h.t_star_f {
                if let Some(lo) = b.eta_x0 {
                    return Ok(ShapeBands::new(g1, vec![lo, b.i0], vec![N, Hd, D]));
                }
            }
            Ok(ShapeBands::new(g1, vec![b.i0], vec![N, D]))
        }
        None => crossing_bands(CurveKind::Forward, init, t),
    }
}

/// Bands from the crossings of the vertical through `gamma1(t)` with the
/// boundary lines and the envelope; each band is classified by a direct scan
/// of one representative point.
pub fn crossing_bands(kind: CurveKind, init: &DynamicsInitial, t: f64) -> Result<ShapeBands> {
    super::check_time(t)?;
    let (t1, t2) = (init.tau1(), init.tau2());
    let g1 = init.gamma1(t);
    let fam = LineFamily::new(kind, t1, t2)?;
    let bl = fam.boundary_lines()?;
    let mut cuts = Vec::new();
    for l in std::iter::once(bl.line0).chain(bl.line_inf) {
        if l.c != 0.0 {
            cuts.push(-(l.a + l.b * g1) / l.c);
        }
    }
    let x_max = match kind {
        CurveKind::Forward => 800.0 * t1,
        CurveKind::Yield => 1e8 * t1,
    };
    let n = 4000;
    let x_min = 1e-6 * t2;
    let f = |x: f64| fam.envelope_point(x)[0] - g1;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..n {
        let x = x_min * (x_max / x_min).powf(i as f64 / (n - 1) as f64);
        let v = f(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            cuts.push(fam.envelope_point(x)[1]);
        } else if let Some((xp, vp)) = prev {
            if vp != 0.0 && (vp < 0.0) != (v < 0.0) {
                let r = brent_root(f, Bracket::new(xp, x)?, 1e-14 * x)?;
                cuts.push(fam.envelope_point(r)[1]);
            }
        }
        prev = Some((x, v));
    }
    cuts.retain(|c| c.is_finite());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    let mut reps = Vec::with_capacity(cuts.len() + 1);
    match (cuts.first(), cuts.last()) {
        (Some(&lo), Some(&hi)) => {
            reps.push(lo - lo.abs().max(1.0));
            reps.extend(cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            reps.push(hi + hi.abs().max(1.0));
        }
        _ => reps.push(0.0),
    }
    let shapes = reps
        .iter()
        .map(|&g2| Ok(classify_direct(kind, &init.params_at(t, g2)?)?.tag))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeBands::new(g1, cuts, shapes))
}

/// Shape bands at time `t`: the closed-form Lambert bounds for forward curves,
/// crossings of the yield envelope otherwise.
pub fn shape_bands(kind: CurveKind, init: &DynamicsInitial, t: f64) -> Result<ShapeBands> {
    match kind {
        CurveKind::Forward => forward_bands(init, t),
        CurveKind::Yield => crossing_bands(kind, init, t),
    }
}

pub fn shape_probabilities(kind: CurveKind, init: &DynamicsInitial, t: f64) -> Result<ShapeDistribution> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!("time must be positive, got {t}")));
    }
    let (mu, var) = gamma2_law(init, t)?;
    let bands = shape_bands(kind, init, t)?;
    Ok(ShapeDistribution { t, kind, probs: bands.masses(mu, var), samples: None })
}
