//! Curve parameters, point evaluation of forward and yield curves, reduced
//! coordinates and the scale regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Forward,
    Yield,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Forward => "forward",
            CurveKind::Yield => "yield",
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(CurveKind::Forward),
            "yield" => Ok(CurveKind::Yield),
            _ => Err(Error::Argument(format!("unknown curve kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    NelsonSiegel,
    Bliss,
    Svensson,
}

impl Family {
    /// Maximal number of local extrema a member curve can have.
    pub fn extrema_cap(self) -> usize {
        match self {
            Family::NelsonSiegel => 1,
            Family::Bliss => 2,
            Family::Svensson => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(v: f64) -> Option<Sign> {
        if v > 0.0 {
            Some(Sign::Positive)
        } else if v < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Svensson parameter vector. Nelson-Siegel is `beta3 = 0`, Bliss is `beta2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct CurveParams {
    beta: [f64; 4],
    tau1: f64,
    tau2: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    beta0: f64,
    beta1: f64,
    beta2: f64,
    beta3: f64,
    tau1: f64,
    tau2: f64,
}

impl TryFrom<RawParams> for CurveParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        CurveParams::new([r.beta0, r.beta1, r.beta2, r.beta3], r.tau1, r.tau2)
    }
}

impl From<CurveParams> for RawParams {
    fn from(p: CurveParams) -> Self {
        RawParams {
            beta0: p.beta[0],
            beta1: p.beta[1],
            beta2: p.beta[2],
            beta3: p.beta[3],
            tau1: p.tau1,
            tau2: p.tau2,
        }
    }
}

impl CurveParams {
    pub fn new(beta: [f64; 4], tau1: f64, tau2: f64) -> Result<Self> {
        for (i, b) in beta.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::Validation(format!("beta{i} must be finite")));
            }
        }
        if !(tau1.is_finite() && tau1 > 0.0) {
            return Err(Error::Validation("tau1 must be positive".into()));
        }
        if !(tau2.is_finite() && tau2 > 0.0) {
            return Err(Error::Validation("tau2 must be positive".into()));
        }
        if beta[3] != 0.0 && tau1 == tau2 {
            return Err(Error::DegenerateFamily);
        }
        Ok(CurveParams { beta, tau1, tau2 })
    }

    /// Nelson-Siegel curve; the second time scale is irrelevant and set to `tau`.
    pub fn nelson_siegel(beta0: f64, beta1: f64, beta2: f64, tau: f64) -> Result<Self> {
        CurveParams::new([beta0, beta1, beta2, 0.0], tau, tau)
    }

    /// Curve with `beta3 = 1` and the given reduced coordinates, scaled by `sign`.
    pub fn from_gamma(gamma1: f64, gamma2: f64, sign: Sign, tau1: f64, tau2: f64) -> Result<Self> {
        let s = sign.value();
        CurveParams::new([0.0, s * gamma2, s * gamma1, s], tau1, tau2)
    }

    pub fn beta(&self) -> [f64; 4] {
        self.beta
    }
    pub fn beta0(&self) -> f64 {
        self.beta[0]
    }
    pub fn beta1(&self) -> f64 {
        self.beta[1]
    }
    pub fn beta2(&self) -> f64 {
        self.beta[2]
    }
    pub fn beta3(&self) -> f64 {
        self.beta[3]
    }
    pub fn tau1(&self) -> f64 {
        self.tau1
    }
    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    pub fn family(&self) -> Family {
        if self.beta[3] == 0.0 {
            Family::NelsonSiegel
        } else if self.beta[2] == 0.0 {
            Family::Bliss
        } else {
            Family::Svensson
        }
    }

    pub fn forward_rate(&self, x: f64) -> f64 {
        forward_rate(self, x)
    }

    pub fn yield_rate(&self, x: f64) -> f64 {
        yield_rate(self, x)
    }
}

/// Reduced coordinates `(beta2/beta3, beta1/beta3)` with the sign of `beta3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta3_sign: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    ScaleRegular,
    WeaklyScaleInverted,
    StronglyScaleInverted,
}

impl RegimeTag {
    pub fn short(self) -> &'static str {
        match self {
            RegimeTag::ScaleRegular => "sr",
            RegimeTag::WeaklyScaleInverted => "wsi",
            RegimeTag::StronglyScaleInverted => "ssi",
        }
    }

    pub fn is_inverted(self) -> bool {
        self != RegimeTag::ScaleRegular
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub r: f64,
}

/// Regime of a scale ratio `r = tau1 / tau2`.
pub fn regime_of_ratio(r: f64) -> Result<Regime> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Argument(format!("scale ratio must be positive, got {r}")));
    }
    let tag = if r > 1.0 {
        RegimeTag::ScaleRegular
    } else if r == 1.0 {
        return Err(Error::DegenerateFamily);
    } else if r >= 1.0 / 3.0 {
        RegimeTag::WeaklyScaleInverted
    } else {
        RegimeTag::StronglyScaleInverted
    };
    Ok(Regime { tag, r })
}

pub fn regime_of(params: &CurveParams) -> Result<Regime> {
    regime_of_ratio(params.tau1 / params.tau2)
}

pub fn to_gamma(params: &CurveParams) -> Result<GammaPoint> {
    let b3 = params.beta[3];
    let beta3_sign = Sign::of(b3)
        .ok_or_else(|| Error::Family("beta3 = 0 has no reduced coordinates; use the Nelson-Siegel path".into()))?;
    Ok(GammaPoint { gamma1: params.beta[2] / b3, gamma2: params.beta[1] / b3, beta3_sign })
}

pub fn forward_rate(p: &CurveParams, x: f64) -> f64 {
    let [b0, b1, b2, b3] = p.beta;
    let u1 = x / p.tau1;
    let e1 = (-u1).exp();
    let mut f = b0 + b1 * e1 + b2 * u1 * e1;
    if b3 != 0.0 {
        let u2 = x / p.tau2;
        f += b3 * u2 * (-u2).exp();
    }
    f
}

/// Moments `J_n(z) = int_0^1 s^n exp(-s z) ds` for `n < N`.
///
/// `J_0(x/tau)` is the running average of `exp(-s/tau)` over `[0, x]`, and its
/// `m`-th derivative in `x` is `(-1/tau)^m J_m(x/tau)`.
pub(crate) fn exp_moments<const N: usize>(z: f64) -> [f64; N] {
    let mut j = [0.0; N];
    if z < 2.0 {
        for (n, slot) in j.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut sum = 1.0 / (n as f64 + 1.0);
            let mut k = 0usize;
            loop {
                k += 1;
                term *= -z / k as f64;
                let t = term / (n + k + 1) as f64;
                sum += t;
                if t.abs() <= 1e-17 * sum.abs() || k > 80 {
                    break;
                }
            }
            *slot = sum;
        }
    } else {
        let ez = (-z).exp();
        let mut prev = -(-z).exp_m1() / z;
        if N > 0 {
            j[0] = prev;
        }
        for (n, slot) in j.iter_mut().enumerate().skip(1) {
            prev = (n as f64 * prev - ez) / z;
            *slot = prev;
        }
    }
    j
}

/// Derivatives `h^{(m)}(x; tau)`, `m < N`, of `h(x; tau) = tau (1 - exp(-x/tau)) / x`.
pub(crate) fn avg_exp_derivs<const N: usize>(x: f64, tau: f64) -> [f64; N] {
    let mut j = exp_moments::<N>(x / tau);
    let mut scale = 1.0;
    for v in j.iter_mut() {
        *v *= scale;
        scale *= -1.0 / tau;
    }
    j
}

pub fn yield_rate(p: &CurveParams, x: f64) -> f64 {
    let [b0, b1, b2, b3] = p.beta;
    let [h1] = avg_exp_derivs::<1>(x, p.tau1);
    let e1 = (-x / p.tau1).exp();
    let mut y = b0 + b1 * h1 + b2 * (h1 - e1);
    if b3 != 0.0 {
        let [h2] = avg_exp_derivs::<1>(x, p.tau2);
        y += b3 * (h2 - (-x / p.tau2).exp());
    }
    y
}

/// Value of the curve of the requested kind.
pub fn curve_level(kind: CurveKind, p: &CurveParams, x: f64) -> f64 {
    match kind {
        CurveKind::Forward => forward_rate(p, x),
        CurveKind::Yield => yield_rate(p, x),
    }
}

/// First derivative in time-to-maturity. Well defined at `x = 0` for both kinds.
pub fn curve_derivative(kind: CurveKind, p: &CurveParams, x: f64) -> f64 {
    let [_, b1, b2, b3] = p.beta;
    let (t1, t2) = (p.tau1, p.tau2);
    match kind {
        CurveKind::Forward => {
            let e1 = (-x / t1).exp();
            let mut d = ((b2 - b1) / t1 - b2 * x / (t1 * t1)) * e1;
            if b3 != 0.0 {
                d += b3 * (1.0 / t2 - x / (t2 * t2)) * (-x / t2).exp();
            }
            d
        }
        CurveKind::Yield => {
            let [_, h1p] = avg_exp_derivs::<2>(x, t1);
            let e1 = (-x / t1).exp();
            let mut d = b1 * h1p + b2 * (h1p + e1 / t1);
            if b3 != 0.0 {
                let [_, h2p] = avg_exp_derivs::<2>(x, t2);
                d += b3 * (h2p + (-x / t2).exp() / t2);
            }
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: [f64; 4], t1: f64, t2: f64) -> CurveParams {
        CurveParams::new(beta, t1, t2).unwrap()
    }

    #[test]
    fn forward_examples() {
        assert!((forward_rate(&p([0.02, -0.01, 0.0, 0.0], 1.0, 0.5), 0.0) - 0.01).abs() < 1e-16);
        let v = forward_rate(&p([0.0, 0.0, 0.0, 1.0], 1.0, 0.5), 0.5);
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        for x in [0.0, 1.0, 100.0] {
            assert_eq!(forward_rate(&p([0.03, 0.0, 0.0, 0.0], 1.0, 0.5), x), 0.03);
        }
    }

    #[test]
    fn yield_examples() {
        let q = p([0.01, 0.02, -0.5, 0.7], 1.3, 0.4);
        assert!((yield_rate(&q, 0.0) - 0.03).abs() < 1e-15);
        assert!((yield_rate(&q, 1e-9) - 0.03).abs() < 1e-9);
        assert_eq!(yield_rate(&p([0.02, 0.0, 0.0, 0.0], 1.0, 0.5), 7.0), 0.02);
    }

    #[test]
    fn moments_match_quadrature_across_switch() {
        for &z in &[0.0, 1e-8, 0.3, 1.999_999, 2.0, 2.5, 10.0, 80.0] {
            let j = exp_moments::<5>(z);
            for (n, v) in j.iter().enumerate() {
                if z >= 2.0 {
                    // J_n(z) = n!/z^{n+1} (1 - e^{-z} sum_{k<=n} z^k/k!)
                    let mut fact = 1.0;
                    let mut part = 0.0;
                    let mut zk = 1.0;
                    for k in 0..=n {
                        if k > 0 {
                            fact *= k as f64;
                            zk *= z;
                        }
                        part += zk / fact;
                    }
                    let exact = fact / z.powi(n as i32 + 1) * (1.0 - (-z).exp() * part);
                    assert!((v - exact).abs() <= 1e-13 * exact, "z={z} n={n}");
                    continue;
                }
                // composite Simpson with many panels
                let m = 20_000;
                let h = 1.0 / m as f64;
                let f = |s: f64| s.powi(n as i32) * (-s * z).exp();
                let mut acc = f(0.0) + f(1.0);
                for i in 1..m {
                    acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
                }
                let q = acc * h / 3.0;
                assert!((v - q).abs() <= 1e-12 * q.abs().max(1e-3), "z={z} n={n} {v} {q}");
            }
        }
    }

    #[test]
    fn ns_hump_location() {
        let q = CurveParams::nelson_siegel(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(curve_derivative(CurveKind::Forward, &q, 1.0).abs() < 1e-16);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let q = p([0.01, -0.4, 0.9, -1.3], 1.7, 0.6);
        for kind in [CurveKind::Forward, CurveKind::Yield] {
            for &x in &[0.05f64, 0.7, 3.0, 15.0] {
                let h = 1e-5 * x.max(1.0);
                let fd = (curve_level(kind, &q, x + h) - curve_level(kind, &q, x - h)) / (2.0 * h);
                let d = curve_derivative(kind, &q, x);
                assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-3), "{kind:?} x={x}");
            }
        }
    }

    #[test]
    fn gamma_and_regime() {
        let g = to_gamma(&p([0.0, -4.0, 2.0, 4.0], 1.0, 0.5)).unwrap();
        assert_eq!((g.gamma1, g.gamma2, g.beta3_sign), (0.5, -1.0, Sign::Positive));
        let g = to_gamma(&p([0.0, 0.0, 0.0, -1.0], 1.0, 0.5)).unwrap();
        assert_eq!(g.beta3_sign, Sign::Negative);
        assert!(matches!(to_gamma(&p([0.0, 1.0, 1.0, 0.0], 1.0, 0.5)), Err(Error::Family(_))));
        assert_eq!(regime_of(&p([0.0; 4], 1.0, 0.5)).unwrap().tag, RegimeTag::ScaleRegular);
        assert_eq!(regime_of(&p([0.0; 4], 1.0, 3.0)).unwrap().tag, RegimeTag::WeaklyScaleInverted);
        assert_eq!(regime_of(&p([0.0; 4], 1.0, 3.6)).unwrap().tag, RegimeTag::StronglyScaleInverted);
        assert!(matches!(regime_of_ratio(1.0), Err(Error::DegenerateFamily)));
    }

    #[test]
    fn validation() {
        assert!(matches!(CurveParams::new([0.0, 0.0, 1.0, 1.0], 1.0, 1.0), Err(Error::DegenerateFamily)));
        assert!(CurveParams::new([0.0, 0.0, 1.0, 0.0], 1.0, 1.0).is_ok());
        let e = CurveParams::new([0.0; 4], 0.0, 1.0).unwrap_err();
        assert_eq!(e, Error::Validation("tau1 must be positive".into()));
        assert!(CurveParams::new([f64::NAN, 0.0, 0.0, 0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn families() {
        assert_eq!(p([0.0, 1.0, 1.0, 0.0], 1.0, 2.0).family(), Family::NelsonSiegel);
        assert_eq!(p([0.0, 1.0, 0.0, 1.0], 1.0, 2.0).family(), Family::Bliss);
        assert_eq!(p([0.0, 1.0, 1.0, 1.0], 1.0, 2.0).family(), Family::Svensson);
    }

    #[test]
    fn serde_round_trip_validates() {
        let q = p([0.01, 0.02, 0.03, 0.04], 1.5, 0.5);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(serde_json::from_str::<CurveParams>(&s).unwrap(), q);
        let bad = r#"{"beta0":0,"beta1":0,"beta2":0,"beta3":1,"tau1":1,"tau2":1}"#;
        assert!(serde_json::from_str::<CurveParams>(bad).is_err());
    }
}
