use num_complex::Complex64;

use crate::{Error, Result};

/// Secant iteration for an analytic `f`, stopping when `|ΔΩ| < rel·|Ω|`.
pub fn complex_secant<F>(mut f: F, x0: Complex64, x1: Complex64, rel: f64, max_iter: usize) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let (mut xa, mut xb) = (x0, x1);
    let (mut fa, mut fb) = (f(xa), f(xb));
    for _ in 0..max_iter {
        if fb.norm() == 0.0 {
            return Ok(xb);
        }
        let denom = fb - fa;
        if denom.norm() == 0.0 {
            break;
        }
        let step = fb * (xb - xa) / denom;
        let next = xb - step;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        xa = xb;
        fa = fb;
        xb = next;
        fb = f(xb);
        if step.norm() < rel * xb.norm() {
            return Ok(xb);
        }
    }
    Err(Error::RootNonConvergence { iterations: max_iter })
}
