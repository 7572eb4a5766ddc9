use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::term_structure::{avg_exp_derivs, CurveKind};

use super::{LineCoeffs, Point};

/// Raw Wronskian values at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Wronskians {
    pub wbc: f64,
    pub wca: f64,
    pub wab: f64,
    pub wabc: f64,
}

/// The family of extremum lines `a(x) + b(x) g1 + c(x) g2 = 0` for one curve kind
/// and pair of time scales.
///
/// For the yield curve the polynomials are stored multiplied by `x^2`, which
/// removes the removable singularity at zero. Below `switch` the yield values
/// come from the moment series instead, since the scaled form cancels badly there.
#[derive(Debug, Clone)]
pub struct LineFamily {
    kind: CurveKind,
    tau1: f64,
    tau2: f64,
    switch: f64,
    abc: [ExpPoly; 3],
    d_abc: [ExpPoly; 3],
    dd_abc: [ExpPoly; 3],
    wbc: ExpPoly,
    wca: ExpPoly,
    wab: ExpPoly,
    wabc: ExpPoly,
    bc_rate: f64,
    abc_rate: f64,
    line_rate: f64,
}

fn w2(f: &ExpPoly, g: &ExpPoly, df: &ExpPoly, dg: &ExpPoly) -> ExpPoly {
    f.mul(dg).sub(&df.mul(g))
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `(a, b, c)` as exponential polynomials; multiplied by `x^2` for the yield curve.
pub(crate) fn basis_polys(kind: CurveKind, tau1: f64, tau2: f64) -> [ExpPoly; 3] {
    let (l1, l2) = (1.0 / tau1, 1.0 / tau2);
    match kind {
        CurveKind::Forward => [
            ExpPoly::term(l2, vec![l2, -l2 * l2]),
            ExpPoly::term(l1, vec![l1, -l1 * l1]),
            ExpPoly::term(l1, vec![-l1]),
        ],
        CurveKind::Yield => {
            let c = ExpPoly::constant(-tau1).add(&ExpPoly::term(l1, vec![tau1, 1.0]));
            let b = c.add(&ExpPoly::term(l1, vec![0.0, 0.0, l1]));
            let a = ExpPoly::constant(-tau2).add(&ExpPoly::term(l2, vec![tau2, 1.0, l2]));
            [a, b, c]
        }
    }
}

impl LineFamily {
    pub fn new(kind: CurveKind, tau1: f64, tau2: f64) -> Result<Self> {
        if !(tau1 > 0.0 && tau2 > 0.0 && tau1.is_finite() && tau2.is_finite()) {
            return Err(Error::Validation("time scales must be positive".into()));
        }
        if tau1 == tau2 {
            return Err(Error::DegenerateFamily);
        }
        let [a, b, c] = basis_polys(kind, tau1, tau2);
        let d_abc = [a.derivative(), b.derivative(), c.derivative()];
        let dd_abc = [d_abc[0].derivative(), d_abc[1].derivative(), d_abc[2].derivative()];
        let wbc = w2(&b, &c, &d_abc[1], &d_abc[2]);
        let wca = w2(&c, &a, &d_abc[2], &d_abc[0]);
        let wab = w2(&a, &b, &d_abc[0], &d_abc[1]);
        let minor = |i: usize, j: usize| d_abc[i].mul(&dd_abc[j]).sub(&dd_abc[i].mul(&d_abc[j]));
        let wabc = a.mul(&minor(1, 2)).sub(&b.mul(&minor(0, 2))).add(&c.mul(&minor(0, 1)));
        let bc_rate = wbc.min_rate().unwrap_or(0.0);
        let abc_rate = wabc.min_rate().unwrap_or(0.0);
        let line_rate = [&a, &b, &c].iter().filter_map(|p| p.min_rate()).fold(f64::INFINITY, f64::min);
        let switch = match kind {
            CurveKind::Forward => 0.0,
            CurveKind::Yield => tau1.max(tau2),
        };
        Ok(LineFamily {
            kind,
            tau1,
            tau2,
            switch,
            abc: [a, b, c],
            d_abc,
            dd_abc,
            wbc,
            wca,
            wab,
            wabc,
            bc_rate,
            abc_rate,
            line_rate,
        })
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }
    pub fn tau1(&self) -> f64 {
        self.tau1
    }
    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    fn raw_path(&self, x: f64) -> bool {
        self.kind == CurveKind::Yield && x < self.switch
    }

    /// Rows are derivative orders 0..=2, columns are `(a, b, c)`.
    fn yield_series_matrix(&self, x: f64) -> [[f64; 3]; 3] {
        let (t1, t2) = (self.tau1, self.tau2);
        let h1 = avg_exp_derivs::<4>(x, t1);
        let h2 = avg_exp_derivs::<4>(x, t2);
        let (e1, e2) = ((-x / t1).exp(), (-x / t2).exp());
        let mut m = [[0.0; 3]; 3];
        let (mut s1, mut s2) = (e1 / t1, e2 / t2);
        for (k, row) in m.iter_mut().enumerate() {
            *row = [h2[k + 1] + s2, h1[k + 1] + s1, h1[k + 1]];
            s1 *= -1.0 / t1;
            s2 *= -1.0 / t2;
        }
        m
    }

    fn scaled_matrix(&self, x: f64) -> [[f64; 3]; 3] {
        let rows = [&self.abc, &self.d_abc, &self.dd_abc];
        let mut m = [[0.0; 3]; 3];
        for (k, r) in rows.iter().enumerate() {
            for j in 0..3 {
                m[k][j] = r[j].eval(x);
            }
        }
        m
    }

    /// Raw basis values and their first two derivatives.
    pub fn derivative_matrix(&self, x: f64) -> [[f64; 3]; 3] {
        if self.kind == CurveKind::Forward {
            return self.scaled_matrix(x);
        }
        if x < self.switch {
            return self.yield_series_matrix(x);
        }
        // undo the x^2 scaling: (F/x^2)' = F'/x^2 - 2F/x^3, etc.
        let s = self.scaled_matrix(x);
        let mut m = [[0.0; 3]; 3];
        let (i1, i2, i3) = (1.0 / (x * x), 1.0 / x.powi(3), 1.0 / x.powi(4));
        for j in 0..3 {
            m[0][j] = s[0][j] * i1;
            m[1][j] = s[1][j] * i1 - 2.0 * s[0][j] * i2;
            m[2][j] = s[2][j] * i1 - 4.0 * s[1][j] * i2 + 6.0 * s[0][j] * i3;
        }
        m
    }

    /// Raw `(a, b, c)` at `x`.
    pub fn coeffs(&self, x: f64) -> LineCoeffs {
        let m = self.derivative_matrix(x);
        LineCoeffs { a: m[0][0], b: m[0][1], c: m[0][2] }
    }

    /// The extremum line at `x`, rescaled by a positive factor so that it stays
    /// representable for large `x`.
    pub fn line_at(&self, x: f64) -> LineCoeffs {
        let l = if self.raw_path(x) || x == 0.0 {
            self.coeffs(x)
        } else {
            let [a, b, c] = &self.abc;
            let r = self.line_rate;
            LineCoeffs { a: a.eval_scaled(x, r), b: b.eval_scaled(x, r), c: c.eval_scaled(x, r) }
        };
        l.normalized()
    }

    pub fn wronskians(&self, x: f64) -> Wronskians {
        if self.kind == CurveKind::Forward {
            return Wronskians {
                wbc: self.wbc.eval(x),
                wca: self.wca.eval(x),
                wab: self.wab.eval(x),
                wabc: self.wabc.eval(x),
            };
        }
        if self.raw_path(x) {
            let m = self.yield_series_matrix(x);
            let w = |i: usize, j: usize| m[0][i] * m[1][j] - m[1][i] * m[0][j];
            return Wronskians { wbc: w(1, 2), wca: w(2, 0), wab: w(0, 1), wabc: det3(m) };
        }
        let x4 = x.powi(4);
        Wronskians {
            wbc: self.wbc.eval(x) / x4,
            wca: self.wca.eval(x) / x4,
            wab: self.wab.eval(x) / x4,
            wabc: self.wabc.eval(x) / (x4 * x * x),
        }
    }

    /// Positive multiple of `W(a, b, c)(x)`, safe for large `x`.
    pub fn wabc_sign(&self, x: f64) -> f64 {
        if self.raw_path(x) {
            self.wronskians(x).wabc
        } else {
            self.wabc.eval_scaled(x, self.abc_rate)
        }
    }

    /// `(W(c,a)/W(b,c), W(a,b)/W(b,c))`.
    pub fn envelope_point(&self, x: f64) -> Point {
        if self.raw_path(x) {
            let w = self.wronskians(x);
            return [w.wca / w.wbc, w.wab / w.wbc];
        }
        let r = self.bc_rate;
        let d = self.wbc.eval_scaled(x, r);
        [self.wca.eval_scaled(x, r) / d, self.wab.eval_scaled(x, r) / d]
    }

    /// Derivative of the envelope, `W(a,b,c)/W(b,c)^2 * (c, -b)`.
    pub fn envelope_tangent(&self, x: f64) -> Point {
        let w = self.wronskians(x);
        let l = self.coeffs(x);
        let k = w.wabc / (w.wbc * w.wbc);
        [k * l.c, -k * l.b]
    }
}
