//! Closed-form Wronskians and anchor points of the Svensson line families.
//!
//! These are independent of the symbolic machinery in [`super::LineFamily`] and
//! serve as cross-checks for it.

/// `W(b_f, c_f)`.
pub fn forward_wbc(t1: f64, _t2: f64, x: f64) -> f64 {
    -(-2.0 * x / t1).exp() / t1.powi(3)
}

/// `W(c_f, a_f)`.
pub fn forward_wca(t1: f64, t2: f64, x: f64) -> f64 {
    let e = (-x * (1.0 / t1 + 1.0 / t2)).exp();
    e / (t1 * t1 * t2 * t2) * ((2.0 * t1 - t2) - x / t2 * (t1 - t2))
}

/// `W(a_f, b_f)`.
pub fn forward_wab(t1: f64, t2: f64, x: f64) -> f64 {
    let e = (-x * (1.0 / t1 + 1.0 / t2)).exp();
    (t1 - t2) * e / (t1.powi(3) * t2.powi(3)) * (2.0 * t1 * t2 - x * (t1 + t2) + x * x)
}

/// `W(a_f, b_f, c_f)`.
pub fn forward_wabc(t1: f64, t2: f64, x: f64) -> f64 {
    let e = (-x * (2.0 / t1 + 1.0 / t2)).exp();
    e / (t1.powi(5) * t2.powi(3))
        * (-(2.0 * t1 - t2).powi(2) + t1 * t1 + x / t2 * (t1 - t2).powi(2))
}

/// Single zero of `W(a_f, b_f, c_f)`, present unless `tau1/tau2` lies in `[1/3, 1)`.
pub fn forward_cusp(t1: f64, t2: f64) -> Option<f64> {
    let r = t1 / t2;
    if (1.0 / 3.0..=1.0).contains(&r) {
        return None;
    }
    Some(t2 * (3.0 * t1 - t2) / (t1 - t2))
}

fn yield_wabc_parts(t1: f64, t2: f64, x: f64, p2: f64, q2: f64) -> f64 {
    let e1 = (-x / t1).exp();
    let e2 = (-x / t2).exp();
    e1 / (x.powi(4) * t1.powi(3) * t2.powi(3)) * (e1 * e2 * p2 + e2 * q2 + e1 * t2.powi(4))
}

/// `W(a_y, b_y, c_y)` as obtained by differentiating the yield basis.
pub fn yield_wabc(t1: f64, t2: f64, x: f64) -> f64 {
    let p2 = -(t1 - t2).powi(2) * x * x
        + (-2.0 * t1.powi(3) + 5.0 * t1 * t1 * t2 - 2.0 * t1 * t2 * t2 - t2.powi(3)) * x
        + t2 * (4.0 * t1.powi(3) - 3.0 * t1 * t1 * t2 - t2.powi(3));
    let q2 = -t1 * printed_q2(t1, t2, x);
    yield_wabc_parts(t1, t2, x, p2, q2)
}

fn printed_q2(t1: f64, t2: f64, x: f64) -> f64 {
    x * x * (t1 - t2) + x * (t2 * t2 + t1 * t2 - 2.0 * t1 * t1) + t1 * t2 * (4.0 * t1 - 3.0 * t2)
}

/// The published polynomial form of `W(a_y, b_y, c_y)`, kept verbatim for comparison.
pub fn yield_wabc_printed(t1: f64, t2: f64, x: f64) -> f64 {
    let p2 = x * x * (t1 * t1 - 2.0 * t1 * t2 - t2 * t2)
        + x * (-2.0 * t1.powi(3) + 3.0 * t1 * t1 * t2 - 2.0 * t1 * t2 * t2 - t2.powi(3))
        + t2 * (4.0 * t1.powi(3) - 3.0 * t1 * t1 * t2 - t2.powi(3));
    yield_wabc_parts(t1, t2, x, p2, printed_q2(t1, t2, x))
}

/// Wronskians of `(f1, f2, f3, f4) = (e1/t1, x e1/t1^2, e2/t2, x e2/t2^2)` and
/// its leading subsystems, in order `W(f1), W(f1,f2), W(f1,f2,f3), W(f1,..,f4)`.
pub fn tchebycheff_wronskians(t1: f64, t2: f64, x: f64) -> [f64; 4] {
    let d = t2 - t1;
    [
        (-x / t1).exp() / t1,
        (-2.0 * x / t1).exp() / t1.powi(3),
        d * d / (t1.powi(5) * t2.powi(3)) * (-x * (2.0 / t1 + 1.0 / t2)).exp(),
        d.powi(4) / (t1.powi(7) * t2.powi(7)) * (-x * (2.0 / t1 + 2.0 / t2)).exp(),
    ]
}

/// Starting point of both envelopes on the line at zero maturity.
pub fn contact0(t1: f64, t2: f64) -> [f64; 2] {
    [t1 / (t2 * t2) * (t2 - 2.0 * t1), 2.0 * t1 / (t2 * t2) * (t2 - t1)]
}

/// Intersection of the limiting lines at zero and infinity (scale-regular only).
pub fn forward_m(t1: f64, t2: f64) -> [f64; 2] {
    [0.0, t1 / t2]
}

pub fn yield_m(t1: f64, t2: f64) -> [f64; 2] {
    [-(t1 * t1 + t2 * t2) / (2.0 * t1 * t2), (t1 * t1 - t2 * t2) / (2.0 * t1 * t2)]
}

pub fn forward_contact_inf() -> [f64; 2] {
    [0.0, 0.0]
}

pub fn yield_contact_inf(t1: f64, t2: f64) -> [f64; 2] {
    [0.0, -t2 / t1]
}
