//! Derivative-free minimization on a bracket.

use crate::error::Result;

/// `(3 − √5) / 2`
const GOLDEN: f64 = 0.381_966_011_250_105_1;
const SQRT_EPSILON: f64 = 1.490_116_119_384_765_6e-8;

/// Minimizer found on a bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Golden-section search on `[a, b]` until the bracket is narrower than `tol`.
///
/// Returns the best point evaluated.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut c = b - (1.0 - GOLDEN) * (b - a);
    let mut d = a + (1.0 - GOLDEN) * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (1.0 - GOLDEN) * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (1.0 - GOLDEN) * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(Minimum { x, fx, evaluations })
}

/// Brent's parabolic/golden hybrid on `[a, b]`, started from an interior
/// point `x0` with known value `f0`. Stops once the bracket is about `tol`
/// wide.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, x0: f64, f0: f64, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (f0, f0, f0);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let mut evaluations = 0;
    loop {
        let xm = 0.5 * (a + b);
        let tol1 = SQRT_EPSILON * x.abs() + 0.25 * tol;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u)?;
        evaluations += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            (v, fv) = (w, fw);
            (w, fw) = (x, fx);
            (x, fx) = (u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv) = (w, fw);
                (w, fw) = (u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok(Minimum { x, fx, evaluations })
}
