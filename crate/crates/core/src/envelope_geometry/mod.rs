//! Envelopes of the extremum-line families in the reduced `(g1, g2)` plane.
//!
//! A Svensson curve with `beta3 != 0` has an extremum at `x` exactly when its
//! reduced coordinates lie on the line `a(x) + b(x) g1 + c(x) g2 = 0`. The
//! envelope of these lines, closed through the limiting lines at the end points,
//! yields the shape regions via winding numbers.

pub mod closed_form;
mod family;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{brent_root, Bracket};
use crate::term_structure::{regime_of_ratio, CurveKind, CurveParams, RegimeTag};

pub(crate) use family::basis_polys;
pub use family::{LineFamily, Wronskians};

pub type Point = [f64; 2];

/// Line `a + b g1 + c g2 = 0` with orientation given by the sign of the left side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineCoeffs {
    pub fn eval(&self, p: Point) -> f64 {
        self.a + self.b * p[0] + self.c * p[1]
    }

    /// Same oriented line with `(b, c)` of unit length.
    pub fn normalized(&self) -> LineCoeffs {
        let n = self.b.hypot(self.c);
        if n == 0.0 || !n.is_finite() {
            return *self;
        }
        LineCoeffs { a: self.a / n, b: self.b / n, c: self.c / n }
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.eval(p).abs() / self.b.hypot(self.c)
    }

    pub fn intersect(&self, o: &LineCoeffs) -> Option<Point> {
        let det = self.b * o.c - self.c * o.b;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some([(self.c * o.a - self.a * o.c) / det, (self.a * o.b - self.b * o.a) / det])
    }
}

/// Right end of the line family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Infinite,
    Finite(f64),
}

impl Horizon {
    pub fn value(self) -> Option<f64> {
        match self {
            Horizon::Infinite => None,
            Horizon::Finite(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSample {
    pub x: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLines {
    pub line0: LineCoeffs,
    pub line_inf: Option<LineCoeffs>,
    pub m: Option<Point>,
    pub contact0: Point,
    pub contact_inf: Option<Point>,
}

/// Sampled envelope with its closing data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCurve {
    pub kind: CurveKind,
    pub tau1: f64,
    pub tau2: f64,
    pub regime: RegimeTag,
    pub samples: Vec<EnvelopeSample>,
    pub cusp: Option<EnvelopeSample>,
    pub line0: LineCoeffs,
    pub line_inf: Option<LineCoeffs>,
    pub contact0: Point,
    pub contact_inf: Option<Point>,
    #[serde(rename = "M")]
    pub m: Option<Point>,
    /// Truncation point; `None` for the family over the whole half line.
    pub horizon: Option<f64>,
    /// Line used to close the loop at the right end.
    pub line_omega: LineCoeffs,
    pub contact_omega: Point,
    pub m_omega: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedPolyline {
    vertices: Vec<Point>,
}

impl ClosedPolyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Argument("a closed polyline needs at least 3 vertices".into()));
        }
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Numerical("polyline vertex is not finite".into()));
        }
        Ok(ClosedPolyline { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
}

fn family_of(kind: CurveKind, params: &CurveParams) -> Result<LineFamily> {
    LineFamily::new(kind, params.tau1(), params.tau2())
}

/// Coefficients `(a, b, c)` of the extremum line at `x`.
pub fn basis_abc(kind: CurveKind, params: &CurveParams, x: f64) -> Result<LineCoeffs> {
    Ok(family_of(kind, params)?.coeffs(x))
}

pub fn wronskians(kind: CurveKind, params: &CurveParams, x: f64) -> Result<Wronskians> {
    Ok(family_of(kind, params)?.wronskians(x))
}

pub fn envelope_point(kind: CurveKind, params: &CurveParams, x: f64) -> Result<Point> {
    Ok(family_of(kind, params)?.envelope_point(x))
}

impl LineFamily {
    /// Zero of `W(a, b, c)`, if the regime has one.
    pub fn cusp_abscissa(&self) -> Result<Option<f64>> {
        let (t1, t2) = (self.tau1(), self.tau2());
        regime_of_ratio(t1 / t2)?;
        let Some(xf) = closed_form::forward_cusp(t1, t2) else {
            return Ok(None);
        };
        if self.kind() == CurveKind::Forward {
            return Ok(Some(xf));
        }
        let s0 = self.wabc_sign(xf);
        let mut hi = 2.0 * xf;
        let mut tries = 0;
        while self.wabc_sign(hi).signum() == s0.signum() {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(Error::Numerical("yield cusp not bracketed".into()));
            }
        }
        let x = brent_root(|x| self.wabc_sign(x), Bracket::new(xf, hi)?, 1e-13 * hi)?;
        Ok(Some(x))
    }

    pub fn boundary_lines(&self) -> Result<BoundaryLines> {
        let (t1, t2) = (self.tau1(), self.tau2());
        let regime = regime_of_ratio(t1 / t2)?.tag;
        let line0 = LineCoeffs { a: t1, b: t2, c: -t2 };
        let contact0 = closed_form::contact0(t1, t2);
        let (line_inf, contact_inf) = match (self.kind(), regime) {
            (CurveKind::Forward, RegimeTag::ScaleRegular) => {
                (Some(LineCoeffs { a: 0.0, b: -1.0, c: 0.0 }), Some(closed_form::forward_contact_inf()))
            }
            (CurveKind::Forward, _) => (None, None),
            // The yield family converges to the same line in every regime; the
            // envelope only reaches it in the scale-regular case.
            (CurveKind::Yield, r) => (
                Some(LineCoeffs { a: -t2, b: -t1, c: -t1 }),
                (r == RegimeTag::ScaleRegular).then(|| closed_form::yield_contact_inf(t1, t2)),
            ),
        };
        let m = line_inf.and_then(|l| line0.intersect(&l));
        Ok(BoundaryLines { line0, line_inf, m, contact0, contact_inf })
    }

    /// Abscissas used to discretize the envelope over `(0, T]`.
    pub fn sample_abscissas(&self, horizon: Horizon, n: usize) -> Result<Vec<f64>> {
        let (t1, t2) = (self.tau1(), self.tau2());
        let regime = regime_of_ratio(t1 / t2)?.tag;
        let x_min = 1e-6 * t1.min(t2);
        let x_max = match horizon {
            Horizon::Finite(t) => {
                if !(t > x_min) || !t.is_finite() {
                    return Err(Error::Argument(format!("horizon {t} is too small")));
                }
                t
            }
            Horizon::Infinite => {
                if regime != RegimeTag::ScaleRegular {
                    return Err(Error::Argument("scale-inverted families need a finite horizon".into()));
                }
                match self.kind() {
                    CurveKind::Forward => (50.0 / (1.0 / t2 - 1.0 / t1)).max(20.0 * t1),
                    CurveKind::Yield => 1e8 * t1,
                }
            }
        };
        let mut xs: Vec<f64> = (0..n)
            .map(|i| x_min * (x_max / x_min).powf(i as f64 / (n - 1) as f64))
            .collect();
        if let Some(xc) = self.cusp_abscissa()? {
            if xc < x_max {
                xs.push(xc);
                for k in 0..64 {
                    let x = xc * (0.9 + 0.2 * k as f64 / 63.0);
                    if x < x_max {
                        xs.push(x);
                    }
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Ok(xs)
    }

    pub fn envelope_curve(&self, horizon: Horizon, n: usize) -> Result<EnvelopeCurve> {
        if n < 3 {
            return Err(Error::Argument("envelope needs at least 3 samples".into()));
        }
        let (t1, t2) = (self.tau1(), self.tau2());
        let regime = regime_of_ratio(t1 / t2)?.tag;
        let bl = self.boundary_lines()?;
        let xs = self.sample_abscissas(horizon, n)?;
        let samples: Vec<EnvelopeSample> = xs
            .iter()
            .map(|&x| {
                let p = self.envelope_point(x);
                EnvelopeSample { x, gamma1: p[0], gamma2: p[1] }
            })
            .filter(|s| s.gamma1.is_finite() && s.gamma2.is_finite())
            .collect();
        let cusp = self.cusp_abscissa()?.and_then(|x| {
            let inside = horizon.value().is_none_or(|t| x < t);
            inside.then(|| {
                let p = self.envelope_point(x);
                EnvelopeSample { x, gamma1: p[0], gamma2: p[1] }
            })
        });
        let (line_omega, contact_omega, m_omega) = match horizon {
            Horizon::Infinite => (
                bl.line_inf.ok_or_else(|| Error::Argument("no limiting line at infinity".into()))?,
                bl.contact_inf.ok_or_else(|| Error::Argument("no contact point at infinity".into()))?,
                bl.m.ok_or_else(|| Error::Argument("no intersection point at infinity".into()))?,
            ),
            Horizon::Finite(t) => {
                let l = self.line_at(t);
                let last = samples.last().ok_or_else(|| Error::Numerical("empty envelope".into()))?;
                let m = bl
                    .line0
                    .intersect(&l)
                    .ok_or_else(|| Error::Numerical("closing lines are parallel".into()))?;
                (l, [last.gamma1, last.gamma2], m)
            }
        };
        Ok(EnvelopeCurve {
            kind: self.kind(),
            tau1: t1,
            tau2: t2,
            regime,
            samples,
            cusp,
            line0: bl.line0,
            line_inf: bl.line_inf,
            contact0: bl.contact0,
            contact_inf: bl.contact_inf,
            m: bl.m,
            horizon: horizon.value(),
            line_omega,
            contact_omega,
            m_omega,
        })
    }
}

pub fn cusp_abscissa(kind: CurveKind, params: &CurveParams) -> Result<Option<f64>> {
    family_of(kind, params)?.cusp_abscissa()
}

pub fn boundary_lines(kind: CurveKind, params: &CurveParams) -> Result<BoundaryLines> {
    family_of(kind, params)?.boundary_lines()
}

pub fn envelope_curve(kind: CurveKind, params: &CurveParams, horizon: Horizon, n: usize) -> Result<EnvelopeCurve> {
    family_of(kind, params)?.envelope_curve(horizon, n)
}

impl EnvelopeCurve {
    /// Closed loop `M -> contact0 -> samples -> contact at the right end -> M`.
    pub fn augmented(&self) -> Result<ClosedPolyline> {
        let mut v = Vec::with_capacity(self.samples.len() + 3);
        v.push(self.m_omega);
        v.push(self.contact0);
        v.extend(self.samples.iter().map(|s| [s.gamma1, s.gamma2]));
        if self.horizon.is_none() {
            v.push(self.contact_omega);
        }
        ClosedPolyline::new(v)
    }

    /// CSV with columns `x, gamma1, gamma2, segment`.
    pub fn to_csv(&self) -> String {
        let fmt = |x: Option<f64>, p: Point, tag: &str| {
            let xs = x.map(|v| format!("{v:.17e}")).unwrap_or_default();
            format!("{xs},{:.17e},{:.17e},{tag}\n", p[0], p[1])
        };
        let mut out = String::from("x,gamma1,gamma2,segment\n");
        out += &fmt(None, self.m_omega, "M");
        out += &fmt(Some(0.0), self.contact0, "contact0");
        for s in &self.samples {
            out += &fmt(Some(s.x), [s.gamma1, s.gamma2], "envelope");
        }
        if let Some(c) = &self.cusp {
            out += &fmt(Some(c.x), [c.gamma1, c.gamma2], "cusp");
        }
        out += &fmt(self.horizon, self.contact_omega, "contact_omega");
        out
    }
}

/// Closed augmented envelope of the family over `(0, T)`.
pub fn augmented_envelope(
    kind: CurveKind,
    params: &CurveParams,
    horizon: Horizon,
    n: usize,
) -> Result<ClosedPolyline> {
    if n < 3 {
        return Err(Error::Argument("envelope needs at least 3 samples".into()));
    }
    envelope_curve(kind, params, horizon, n.max(256))?.augmented()
}
