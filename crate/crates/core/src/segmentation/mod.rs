//! Parameter-plane segmentation by winding numbers of the augmented envelope.
//!
//! A reduced point `g` is classified by `E(g) = 2 |wind(g)| + 1_D(g)`, the number
//! of extrema, where `D` holds the points whose slope sign differs between the
//! two ends of the family. The initial slope sign is read off the line at zero.

mod winding;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::envelope_geometry::{Horizon, LineCoeffs, LineFamily, Point};
use crate::error::{Error, Result};
use crate::shape::ShapeTag;
use crate::shape_oracle::Slope;
use crate::term_structure::{regime_of_ratio, to_gamma, CurveKind, CurveParams, Family, RegimeTag, Sign};

pub use winding::winding_number;
use winding::{IndexedLoop, Wind};

/// Boundary tolerance on distances in the reduced plane.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadrantLabel {
    Qn,
    Qi,
    Qh,
    Qd,
}

/// Quadrant by the slope signs at the two ends: increasing at both ends is `Qn`,
/// decreasing at both is `Qi`, up then down is `Qh`, down then up is `Qd`.
pub fn quadrant_label(line_alpha: f64, line_omega: f64, beta3: Sign) -> Option<QuadrantLabel> {
    let a = Sign::of(line_alpha)?;
    let w = Sign::of(line_omega)?;
    let (a, w) = if beta3 == Sign::Negative { (a.flip(), w.flip()) } else { (a, w) };
    Some(match (a, w) {
        (Sign::Positive, Sign::Positive) => QuadrantLabel::Qn,
        (Sign::Negative, Sign::Negative) => QuadrantLabel::Qi,
        (Sign::Positive, Sign::Negative) => QuadrantLabel::Qh,
        (Sign::Negative, Sign::Positive) => QuadrantLabel::Qd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub gamma1: f64,
    pub gamma2: f64,
    pub shape: ShapeTag,
    pub winding: i64,
    #[serde(rename = "in_D")]
    pub in_d: bool,
    pub boundary_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outcome {
    shape: ShapeTag,
    winding: i64,
    in_d: bool,
}

#[derive(Debug)]
struct Level {
    horizon: Horizon,
    loop_: IndexedLoop,
    line0: LineCoeffs,
    line_omega: LineCoeffs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    /// Envelope samples per level.
    pub samples: usize,
    /// Consecutive horizon doublings that must agree in the scale-inverted case.
    pub stable_doublings: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { samples: 2048, stable_doublings: 2 }
    }
}

/// Envelope classifier for one curve kind and pair of time scales. Envelopes are
/// built lazily and cached, so a single instance should be reused across points.
#[derive(Debug)]
pub struct EnvelopeClassifier {
    kind: CurveKind,
    family: LineFamily,
    regime: RegimeTag,
    cfg: ClassifierConfig,
    horizons: Vec<Horizon>,
    levels: Vec<OnceLock<Result<Level>>>,
}

impl EnvelopeClassifier {
    pub fn new(kind: CurveKind, tau1: f64, tau2: f64) -> Result<Self> {
        Self::with_config(kind, tau1, tau2, ClassifierConfig::default())
    }

    pub fn with_config(kind: CurveKind, tau1: f64, tau2: f64, cfg: ClassifierConfig) -> Result<Self> {
        let family = LineFamily::new(kind, tau1, tau2)?;
        let regime = regime_of_ratio(tau1 / tau2)?.tag;
        let horizons = if regime == RegimeTag::ScaleRegular {
            vec![Horizon::Infinite]
        } else {
            // envelope coordinates grow like exp(x |1/tau1 - 1/tau2|); stay well
            // inside the floating point range
            let growth = (1.0 / tau1 - 1.0 / tau2).abs();
            let cap = 300.0 / growth;
            let mut t = 8.0 * tau1.max(tau2);
            let mut hs = Vec::new();
            while t <= cap && hs.len() < 40 {
                hs.push(Horizon::Finite(t));
                t *= 2.0;
            }
            if hs.is_empty() {
                hs.push(Horizon::Finite(cap));
            }
            hs
        };
        let levels = horizons.iter().map(|_| OnceLock::new()).collect();
        Ok(EnvelopeClassifier { kind, family, regime, cfg, horizons, levels })
    }

    pub fn regime(&self) -> RegimeTag {
        self.regime
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    fn level(&self, k: usize) -> Result<&Level> {
        let r = self.levels[k].get_or_init(|| {
            let horizon = self.horizons[k];
            let env = self.family.envelope_curve(horizon, self.cfg.samples)?;
            let poly = env.augmented()?;
            Ok(Level {
                horizon,
                loop_: IndexedLoop::new(poly.vertices()),
                line0: env.line0.normalized(),
                line_omega: env.line_omega.normalized(),
            })
        });
        r.as_ref().map_err(|e| e.clone())
    }

    /// `None` when the point is within tolerance of the boundary at this level.
    fn classify_at(&self, level: &Level, q: Point, sign: Sign) -> Option<Outcome> {
        let tol = BOUNDARY_TOL * q[0].abs().max(q[1].abs()).max(1.0);
        if level.line0.distance(q) <= tol || level.line_omega.distance(q) <= tol {
            return None;
        }
        let Wind::Clear(w) = level.loop_.wind(q, tol) else {
            return None;
        };
        let l0 = level.line0.eval(q);
        let lw = level.line_omega.eval(q);
        let in_d = (l0 > 0.0) != (lw > 0.0);
        let e = 2 * w.unsigned_abs() as usize + usize::from(in_d);
        let first = if (l0 > 0.0) == (sign == Sign::Positive) { Sign::Positive } else { Sign::Negative };
        let shape = ShapeTag::from_signs(first, e)?;
        Some(Outcome { shape, winding: w, in_d })
    }

    /// Outcome at `q` with a flag set when the horizon ladder could not confirm it.
    fn classify_point(&self, q: Point, sign: Sign) -> Result<Option<(Outcome, bool)>> {
        if self.regime == RegimeTag::ScaleRegular {
            return Ok(self.classify_at(self.level(0)?, q, sign).map(|o| (o, false)));
        }
        let params = CurveParams::from_gamma(q[0], q[1], sign, self.family.tau1(), self.family.tau2())?;
        let x_tail = Slope::new(self.kind, &params).tail_bound()?.unwrap_or(0.0);
        let n = self.horizons.len();
        let start = self.horizons.iter().position(|h| h.value().is_some_and(|t| t >= x_tail));
        let Some(start) = start else {
            // sign changes may lie beyond every usable horizon
            return Ok(self.classify_at(self.level(n - 1)?, q, sign).map(|o| (o, true)));
        };
        let need = self.cfg.stable_doublings + 1;
        let mut run = 0;
        let mut prev: Option<Option<Outcome>> = None;
        for k in start..n {
            let o = self.classify_at(self.level(k)?, q, sign);
            run = if prev == Some(o) { run + 1 } else { 1 };
            prev = Some(o);
            if run >= need {
                return Ok(o.map(|o| (o, false)));
            }
        }
        Ok(prev.flatten().map(|o| (o, true)))
    }

    /// Classifies a reduced point; boundary points take the least-extrema shape
    /// among nearby points.
    pub fn classify_gamma(&self, gamma1: f64, gamma2: f64, sign: Sign) -> Result<SegmentRecord> {
        let q = [gamma1, gamma2];
        if let Some((o, unsure)) = self.classify_point(q, sign)? {
            return Ok(SegmentRecord { gamma1, gamma2, shape: o.shape, winding: o.winding, in_d: o.in_d, boundary_flag: unsure });
        }
        let scale = gamma1.abs().max(gamma2.abs()).max(1.0);
        for radius in [1e-6, 1e-5, 1e-4, 1e-3] {
            let eps = radius * scale;
            let mut best: Option<Outcome> = None;
            for k in 0..8 {
                let t = k as f64 * std::f64::consts::FRAC_PI_4;
                let p = [gamma1 + eps * t.cos(), gamma2 + eps * t.sin()];
                if let Some((o, _)) = self.classify_point(p, sign)? {
                    if best.is_none_or(|b| o.shape.extrema_count() < b.shape.extrema_count()) {
                        best = Some(o);
                    }
                }
            }
            if let Some(o) = best {
                return Ok(SegmentRecord { gamma1, gamma2, shape: o.shape, winding: o.winding, in_d: o.in_d, boundary_flag: true });
            }
        }
        Err(Error::Numerical(format!("no classifiable point near ({gamma1}, {gamma2})")))
    }

    pub fn classify(&self, params: &CurveParams) -> Result<SegmentRecord> {
        let g = to_gamma(params)?;
        self.check_taus(params)?;
        self.classify_gamma(g.gamma1, g.gamma2, g.beta3_sign)
    }

    fn check_taus(&self, params: &CurveParams) -> Result<()> {
        if params.tau1() != self.family.tau1() || params.tau2() != self.family.tau2() {
            return Err(Error::Argument("time scales differ from the classifier's".into()));
        }
        Ok(())
    }

    pub fn horizons(&self) -> &[Horizon] {
        &self.horizons
    }

    /// Horizon of a cached level, for diagnostics.
    pub fn level_horizon(&self, k: usize) -> Result<Horizon> {
        Ok(self.level(k)?.horizon)
    }
}

pub fn classify_via_envelope(kind: CurveKind, params: &CurveParams) -> Result<SegmentRecord> {
    to_gamma(params)?;
    EnvelopeClassifier::new(kind, params.tau1(), params.tau2())?.classify(params)
}

/// Nelson-Siegel shape from the closed-form region predicates.
///
/// Boundary cases resolve to the shape with fewer extrema.
pub fn classify_ns(beta1: f64, beta2: f64, kind: CurveKind) -> ShapeTag {
    if beta1 == 0.0 && beta2 == 0.0 {
        return ShapeTag::Flat;
    }
    match kind {
        CurveKind::Forward => {
            if beta2 <= 0.0 && beta1 <= beta2 {
                ShapeTag::N
            } else if beta2 >= 0.0 && beta1 >= beta2 {
                ShapeTag::I
            } else if beta2 > 0.0 {
                ShapeTag::H
            } else {
                ShapeTag::D
            }
        }
        CurveKind::Yield => {
            if beta1 <= -beta2.abs() {
                ShapeTag::N
            } else if beta1 >= beta2.abs() {
                ShapeTag::I
            } else if beta2 > 0.0 {
                ShapeTag::H
            } else {
                ShapeTag::D
            }
        }
    }
}

/// Shapes attainable in a family for a scale ratio and sign of `beta3`.
pub fn attainable_shapes(family: Family, r: f64, beta3_sign: Sign) -> Result<BTreeSet<ShapeTag>> {
    use ShapeTag::*;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("scale ratio must be positive, got {r}")));
    }
    let plus: &[ShapeTag] = match family {
        Family::NelsonSiegel => return Ok([N, I, H, D].into_iter().collect()),
        Family::Svensson => {
            let regime = regime_of_ratio(r).map_err(|_| Error::Argument("r = 1 is degenerate".into()))?;
            match regime.tag {
                RegimeTag::ScaleRegular => &[N, I, H, D, Hd, Hdh],
                RegimeTag::WeaklyScaleInverted => &[I, H, Dh],
                RegimeTag::StronglyScaleInverted => &[I, H, Dh, Hdh],
            }
        }
        Family::Bliss => {
            if r == 1.0 {
                return Err(Error::Argument("r = 1 is degenerate".into()));
            }
            if r > 1.0 {
                &[N, I, H, Hd]
            } else if r >= 0.5 {
                &[I, H]
            } else {
                &[I, H, Dh]
            }
        }
    };
    let set = plus.iter().copied();
    Ok(match beta3_sign {
        Sign::Positive => set.collect(),
        Sign::Negative => set.map(ShapeTag::mirror).collect(),
    })
}

/// Rectangle `[x0, x1] x [y0, y1]` in the reduced plane sampled at `nx * ny` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Argument("grid resolution must be at least 2 per axis".into()));
        }
        if !(self.x0 < self.x1 && self.y0 < self.y1) {
            return Err(Error::Argument("grid rectangle is empty".into()));
        }
        Ok(())
    }

    /// Nodes in row-major order (rows of constant `gamma2`).
    pub fn nodes(&self) -> Vec<Point> {
        let mut v = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = self.y0 + (self.y1 - self.y0) * j as f64 / (self.ny - 1) as f64;
            for i in 0..self.nx {
                let x = self.x0 + (self.x1 - self.x0) * i as f64 / (self.nx - 1) as f64;
                v.push([x, y]);
            }
        }
        v
    }
}

/// Classifies every grid node; `template` supplies the time scales and the sign of `beta3`.
pub fn segment_grid(kind: CurveKind, template: &CurveParams, grid: &Grid) -> Result<Vec<SegmentRecord>> {
    segment_grid_threads(kind, template, grid, 1)
}

pub fn segment_grid_threads(
    kind: CurveKind,
    template: &CurveParams,
    grid: &Grid,
    threads: usize,
) -> Result<Vec<SegmentRecord>> {
    grid.validate()?;
    let sign = Sign::of(template.beta3())
        .ok_or_else(|| Error::Family("segmentation needs beta3 != 0".into()))?;
    let clf = EnvelopeClassifier::new(kind, template.tau1(), template.tau2())?;
    let nodes = grid.nodes();
    let threads = threads.max(1).min(nodes.len());
    if threads == 1 {
        return nodes.iter().map(|p| clf.classify_gamma(p[0], p[1], sign)).collect();
    }
    let chunk = nodes.len().div_ceil(threads);
    let parts: Vec<Result<Vec<SegmentRecord>>> = std::thread::scope(|s| {
        let handles: Vec<_> = nodes
            .chunks(chunk)
            .map(|c| {
                let clf = &clf;
                s.spawn(move || c.iter().map(|p| clf.classify_gamma(p[0], p[1], sign)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(nodes.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub fn records_to_csv(records: &[SegmentRecord]) -> String {
    let mut s = String::from("gamma1,gamma2,shape,winding,in_D,boundary_flag\n");
    for r in records {
        s += &format!(
            "{},{},{},{},{},{}\n",
            r.gamma1, r.gamma2, r.shape, r.winding, r.in_d, r.boundary_flag
        );
    }
    s
}

#[cfg(test)]
mod tests;
