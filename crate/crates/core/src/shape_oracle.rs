//! Direct shape classification from the sign changes of the curve slope.

use serde::{Deserialize, Serialize};

use crate::envelope_geometry::basis_polys;
use crate::error::{Error, Result};
use crate::expoly::{ExpPoly, ExpTerm};
use crate::numerics::{brent_root, Bracket};
use crate::shape::{Extremum, ExtremumKind, Shape, ShapeTag};
use crate::term_structure::{avg_exp_derivs, CurveKind, CurveParams, Sign};

/// Relative size below which a slope value or coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeSign {
    Positive,
    Negative,
    Zero,
}

/// Sign of the slope at zero maturity (the same for forward and yield curves).
pub fn initial_slope_sign(_kind: CurveKind, params: &CurveParams) -> SlopeSign {
    let [_, b1, b2, b3] = params.beta();
    let (t1, t2) = (params.tau1(), params.tau2());
    let v = (b2 - b1) / t1 + b3 / t2;
    let scale = (b1.abs() + b2.abs()) / t1 + b3.abs() / t2;
    if v.abs() <= 1e-12 * scale || scale == 0.0 {
        SlopeSign::Zero
    } else if v > 0.0 {
        SlopeSign::Positive
    } else {
        SlopeSign::Negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Geometric grid size on `(0, T_scan]`.
    pub points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { points: 2048 }
    }
}

/// Positive multiple of the slope as an exponential polynomial.
///
/// For the yield curve the stored form is `x^2 y'(x)`; below `switch` the raw
/// derivative is evaluated from the moment series instead.
#[derive(Debug, Clone)]
pub struct Slope {
    kind: CurveKind,
    params: CurveParams,
    poly: ExpPoly,
    reference: f64,
    switch: f64,
    /// A leading tail coefficient cancelled to within tolerance.
    tail_degenerate: bool,
}

impl Slope {
    pub fn new(kind: CurveKind, params: &CurveParams) -> Slope {
        let [_, b1, b2, b3] = params.beta();
        let [a, b, c] = basis_polys(kind, params.tau1(), params.tau2());
        let parts: Vec<(f64, &ExpPoly)> =
            [(b3, &a), (b2, &b), (b1, &c)].into_iter().filter(|(k, _)| *k != 0.0).collect();
        let mut raw_terms = Vec::new();
        let mut abs_terms = Vec::new();
        for (k, p) in &parts {
            for t in p.terms() {
                raw_terms.push(ExpTerm { rate: t.rate, poly: t.poly.iter().map(|c| c * k).collect() });
                abs_terms.push(ExpTerm { rate: t.rate, poly: t.poly.iter().map(|c| (c * k).abs()).collect() });
            }
        }
        let raw = ExpPoly::from_terms(raw_terms);
        let abs = ExpPoly::from_terms(abs_terms);
        // zero coefficients that cancelled down to rounding level
        let mut tail_degenerate = false;
        let mut kept = Vec::new();
        for ta in abs.terms() {
            let tr = raw.terms().iter().find(|t| t.rate == ta.rate);
            let poly: Vec<f64> = ta
                .poly
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    let v = tr.and_then(|t| t.poly.get(i).copied()).unwrap_or(0.0);
                    if v.abs() <= ZERO_TOL * m {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            kept.push(ExpTerm { rate: ta.rate, poly });
        }
        let poly = ExpPoly::from_terms(kept);
        if let (Some(first_abs), first_kept) = (abs.terms().first(), poly.terms().first()) {
            let lead_changed = match first_kept {
                None => true,
                Some(k) => k.rate != first_abs.rate || k.poly.len() != first_abs.poly.len(),
            };
            tail_degenerate = lead_changed;
        }
        let reference = poly.min_rate().unwrap_or(0.0);
        let switch = match kind {
            CurveKind::Forward => 0.0,
            CurveKind::Yield => params.tau1().max(params.tau2()),
        };
        Slope { kind, params: *params, poly, reference, switch, tail_degenerate }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn poly(&self) -> &ExpPoly {
        &self.poly
    }

    pub fn tail_degenerate(&self) -> bool {
        self.tail_degenerate
    }

    /// Positive multiple of the slope at `x` and a magnitude scale for it.
    pub fn value(&self, x: f64) -> (f64, f64) {
        if self.kind == CurveKind::Yield && x < self.switch {
            let [_, b1, b2, b3] = self.params.beta();
            let (t1, t2) = (self.params.tau1(), self.params.tau2());
            let [_, h1p] = avg_exp_derivs::<2>(x, t1);
            let c = h1p;
            let b = h1p + (-x / t1).exp() / t1;
            let a = if b3 != 0.0 {
                let [_, h2p] = avg_exp_derivs::<2>(x, t2);
                h2p + (-x / t2).exp() / t2
            } else {
                0.0
            };
            let v = b1 * c + b2 * b + b3 * a;
            let m = (b1 * c).abs() + (b2 * b).abs() + (b3 * a).abs();
            return (v, m);
        }
        self.poly.eval_scaled_with_magnitude(x, self.reference)
    }

    /// Abscissa beyond which the slope provably keeps the sign of its slowest
    /// decaying term. `None` if the slope vanishes identically.
    pub fn tail_bound(&self) -> Result<Option<f64>> {
        let terms = self.poly.terms();
        let Some(lead) = terms.first() else {
            return Ok(None);
        };
        let d = lead.poly.len() - 1;
        let l = lead.poly[d].abs();
        let c: f64 = lead.poly[..d].iter().map(|v| v.abs()).sum::<f64>() / l;
        let mut x = (2.0 * c).max(1.0);
        for t in &terms[1..] {
            let delta = t.rate - lead.rate;
            for i in (d + 1)..t.poly.len() {
                x = x.max((i - d) as f64 / delta);
            }
        }
        for _ in 0..200 {
            let rest: f64 = terms[1..]
                .iter()
                .map(|t| {
                    let delta = t.rate - lead.rate;
                    t.poly
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v.abs() * x.powi(i as i32 - d as i32))
                        .sum::<f64>()
                        * (-delta * x).exp()
                })
                .sum();
            if rest < 0.5 * l {
                return Ok(Some(x));
            }
            x *= 2.0;
        }
        Err(Error::Numerical("tail bound did not converge".into()))
    }

    /// Sign of the slope for large `x`.
    pub fn tail_sign(&self) -> Option<Sign> {
        let lead = self.poly.terms().first()?;
        Sign::of(*lead.poly.last()?)
    }
}

fn heuristic_horizon(params: &CurveParams) -> f64 {
    let [_, b1, b2, b3] = params.beta();
    let tmax = params.tau1().max(params.tau2());
    let norm = if b3 != 0.0 { b1.hypot(b2) / b3.abs() } else { b1.hypot(b2) / b2.abs().max(f64::MIN_POSITIVE) };
    20.0 * tmax * (1.0 + (1.0 + norm.min(1e300)).ln())
}

pub fn classify_direct(kind: CurveKind, params: &CurveParams) -> Result<Shape> {
    classify_direct_with(kind, params, &ScanConfig::default())
}

pub fn classify_direct_with(kind: CurveKind, params: &CurveParams, cfg: &ScanConfig) -> Result<Shape> {
    let slope = Slope::new(kind, params);
    if slope.is_zero() {
        return Ok(Shape::flat());
    }
    let Some(tail) = slope.tail_bound()? else {
        return Ok(Shape::flat());
    };
    let mut boundary = slope.tail_degenerate();
    let span = tail.max(heuristic_horizon(params));
    let tmin = params.tau1().min(params.tau2());
    let x_min = 1e-6 * tmin;
    let n = cfg.points.max(16);
    let grid = std::iter::once(0.0)
        .chain((0..n).map(|i| x_min * (span / x_min).powf(i as f64 / (n - 1) as f64)));

    let sign_at = |x: f64| {
        let (v, m) = slope.value(x);
        if v.abs() <= ZERO_TOL * m || v == 0.0 {
            None
        } else {
            Some((v > 0.0, v))
        }
    };
    if initial_slope_sign(kind, params) == SlopeSign::Zero {
        boundary = true;
    }

    let mut roots: Vec<(f64, bool)> = Vec::new(); // (x, slope was positive before)
    let mut first: Option<bool> = None;
    let mut prev: Option<(f64, bool)> = None;
    for x in grid {
        let Some((pos, _)) = sign_at(x) else { continue };
        if first.is_none() {
            first = Some(pos);
        }
        if let Some((xp, pp)) = prev {
            if pp != pos {
                let f = |t: f64| slope.value(t).0;
                let r = brent_root(f, Bracket::new(xp, x)?, 1e-12 * x.max(1.0))?;
                roots.push((r, pp));
            }
        }
        prev = Some((x, pos));
    }
    if let Some(ts) = slope.tail_sign() {
        let last = prev.map(|p| p.1);
        if last.is_some() && last != Some(ts == Sign::Positive) {
            return Err(Error::Internal("slope sign at scan horizon contradicts its tail".into()));
        }
    }
    let Some(first) = first else {
        return Ok(Shape { boundary_ambiguous: true, ..Shape::flat() });
    };

    // drop pairs of roots whose slope in between is indistinguishable from zero
    let mut i = 0;
    while i + 1 < roots.len() {
        let mid = 0.5 * (roots[i].0 + roots[i + 1].0);
        let (v, m) = slope.value(mid);
        if v.abs() <= ZERO_TOL * m {
            roots.drain(i..i + 2);
            boundary = true;
        } else {
            i += 1;
        }
    }

    let cap = params.family().extrema_cap();
    if roots.len() > cap {
        return Err(Error::Internal(format!(
            "{} extrema found, family allows at most {cap}",
            roots.len()
        )));
    }
    let first_sign = if first { Sign::Positive } else { Sign::Negative };
    let tag = ShapeTag::from_signs(first_sign, roots.len())
        .ok_or_else(|| Error::Internal("too many sign changes".into()))?;
    let extrema = roots
        .iter()
        .map(|&(x, pos)| Extremum { x, kind: if pos { ExtremumKind::Hump } else { ExtremumKind::Dip } })
        .collect();
    Ok(Shape { tag, extrema, boundary_ambiguous: boundary })
}
