use crate::error::{Error, Result};

/// Default absolute tolerance on the abscissa.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Argument(format!("bad bracket [{lo}, {hi}]")));
        }
        Ok(Bracket { lo, hi })
    }
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("non-finite function value at x = {x}")))
    }
}

/// Brent's method (zeroin). Returns a root inside `bracket` located to within `tol`.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = eval(&mut f, a)?;
    let mut fb = eval(&mut f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing { lo: a, hi: b });
    }
    let tol = tol.max(0.0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(&mut f, b)?;
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear() {
        let x = brent_root(|x| x - 1.0, Bracket::new(0.0, 2.0).unwrap(), 1e-12).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_root_is_half_pi() {
        let x = brent_root(f64::cos, Bracket::new(1.0, 2.0).unwrap(), 1e-12).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change() {
        let r = brent_root(|x| x * x + 1.0, Bracket::new(0.0, 1.0).unwrap(), 1e-12);
        assert!(matches!(r, Err(Error::Bracketing { .. })));
    }

    #[test]
    fn non_finite_is_numerical_error() {
        let r = brent_root(|x| if x > 0.5 { f64::NAN } else { -1.0 }, Bracket::new(0.0, 1.0).unwrap(), 1e-12);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn endpoint_zero() {
        let x = brent_root(|x| x, Bracket::new(0.0, 1.0).unwrap(), 1e-12).unwrap();
        assert_eq!(x, 0.0);
    }

    #[test]
    fn bad_bracket() {
        assert!(Bracket::new(1.0, 1.0).is_err());
    }
}
