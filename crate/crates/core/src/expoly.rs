//! Exponential polynomials `sum_k p_k(x) exp(-lambda_k x)`.
//!
//! Basis functions, Wronskians and curve derivatives of the Svensson family are
//! all of this form. Keeping them symbolic lets us evaluate with a common
//! exponential factored out, which avoids underflow and cancellation for large x.

#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    /// Decay rate `lambda`.
    pub rate: f64,
    /// Polynomial coefficients, constant term first.
    pub poly: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

fn same_rate(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-13 * a.abs().max(b.abs())
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_eval_abs(p: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    p.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn trim(mut p: Vec<f64>) -> Vec<f64> {
    while p.last() == Some(&0.0) {
        p.pop();
    }
    p
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    pub fn term(rate: f64, poly: Vec<f64>) -> Self {
        ExpPoly::from_terms(vec![ExpTerm { rate, poly }])
    }

    pub fn constant(c: f64) -> Self {
        ExpPoly::term(0.0, vec![c])
    }

    pub fn from_terms(terms: Vec<ExpTerm>) -> Self {
        let mut terms = terms;
        terms.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        let mut out: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if same_rate(last.rate, t.rate) => {
                    last.poly = poly_add(&last.poly, &t.poly);
                }
                _ => out.push(t),
            }
        }
        let terms = out
            .into_iter()
            .filter_map(|t| {
                let poly = trim(t.poly);
                (!poly.is_empty()).then_some(ExpTerm { rate: t.rate, poly })
            })
            .collect();
        ExpPoly { terms }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest decay rate among nonzero terms.
    pub fn min_rate(&self) -> Option<f64> {
        self.terms.first().map(|t| t.rate)
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        ExpPoly::from_terms(self.terms.iter().chain(other.terms.iter()).cloned().collect())
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> ExpPoly {
        ExpPoly::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm { rate: t.rate, poly: t.poly.iter().map(|c| c * k).collect() })
                .collect(),
        )
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut poly = vec![0.0; a.poly.len() + b.poly.len() - 1];
                for (i, x) in a.poly.iter().enumerate() {
                    for (j, y) in b.poly.iter().enumerate() {
                        poly[i + j] += x * y;
                    }
                }
                terms.push(ExpTerm { rate: a.rate + b.rate, poly });
            }
        }
        ExpPoly::from_terms(terms)
    }

    pub fn derivative(&self) -> ExpPoly {
        ExpPoly::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let mut poly: Vec<f64> = t.poly.iter().map(|c| -t.rate * c).collect();
                    for (i, c) in t.poly.iter().enumerate().skip(1) {
                        poly[i - 1] += i as f64 * c;
                    }
                    ExpTerm { rate: t.rate, poly }
                })
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| poly_eval(&t.poly, x) * (-t.rate * x).exp()).sum()
    }

    /// `exp(reference * x) * self(x)`.
    pub fn eval_scaled(&self, x: f64, reference: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| poly_eval(&t.poly, x) * (-(t.rate - reference) * x).exp())
            .sum()
    }

    /// Scaled value together with the scaled sum of absolute term contributions,
    /// an upper bound on the rounding scale of the value.
    pub fn eval_scaled_with_magnitude(&self, x: f64, reference: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut m = 0.0;
        for t in &self.terms {
            let e = (-(t.rate - reference) * x).exp();
            v += poly_eval(&t.poly, x) * e;
            m += poly_eval_abs(&t.poly, x) * e;
        }
        (v, m)
    }

    /// Drops coefficients that are below `rel` times the largest coefficient
    /// magnitude of their own term, and terms whose coefficients are all tiny
    /// relative to the whole expression.
    pub fn pruned(&self, rel: f64) -> ExpPoly {
        let global = self
            .terms
            .iter()
            .flat_map(|t| t.poly.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()));
        ExpPoly::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    rate: t.rate,
                    poly: t.poly.iter().map(|&c| if c.abs() <= rel * global { 0.0 } else { c }).collect(),
                })
                .collect(),
        )
    }
}
