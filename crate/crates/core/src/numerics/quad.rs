use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::Mat3;
use crate::{Error, Result};

/// Values that adaptive quadrature can accumulate.
pub trait Quadrable: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Quadrable for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quadrable for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Quadrable for Mat3 {
    fn zero() -> Self {
        Mat3::zero()
    }
    fn magnitude(&self) -> f64 {
        self.frobenius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-9, rel: 1e-8, max_depth: 40 }
    }
}

struct Segment<V> {
    a: f64,
    b: f64,
    fa: V,
    fm: V,
    fb: V,
    whole: V,
    depth: u32,
}

fn simpson<V: Quadrable>(a: f64, b: f64, fa: V, fm: V, fb: V) -> V {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Adaptive Simpson with Richardson correction. The error target is
/// `max(abs, rel·|I|)` where `|I|` comes from a coarse first pass.
pub fn adaptive_simpson<V, F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<V>
where
    V: Quadrable,
    F: FnMut(f64) -> V,
{
    if a == b {
        return Ok(V::zero());
    }
    // Seed on a few panels so that narrow features are not missed.
    const SEED: usize = 8;
    let h = (b - a) / SEED as f64;
    let mut stack: Vec<Segment<V>> = Vec::with_capacity(64);
    let mut estimate = V::zero();
    let mut left = f(a);
    for i in 0..SEED {
        let x0 = a + h * i as f64;
        let x1 = if i + 1 == SEED { b } else { x0 + h };
        let xm = 0.5 * (x0 + x1);
        let fm = f(xm);
        let fr = f(x1);
        let whole = simpson(x0, x1, left, fm, fr);
        estimate = estimate + whole;
        stack.push(Segment { a: x0, b: x1, fa: left, fm, fb: fr, whole, depth: 0 });
        left = fr;
    }
    let target = tol.abs.max(tol.rel * estimate.magnitude());
    let width = b - a;
    let mut total = V::zero();
    while let Some(seg) = stack.pop() {
        let m = 0.5 * (seg.a + seg.b);
        let lm = 0.5 * (seg.a + m);
        let rm = 0.5 * (m + seg.b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(seg.a, m, seg.fa, flm, seg.fm);
        let right = simpson(m, seg.b, seg.fm, frm, seg.fb);
        let diff = left + right - seg.whole;
        let local = target * (seg.b - seg.a) / width;
        if diff.magnitude() <= 15.0 * local {
            total = total + left + right + diff * (1.0 / 15.0);
        } else if seg.depth >= tol.max_depth {
            return Err(Error::Quadrature { a, b });
        } else {
            stack.push(Segment { a: seg.a, b: m, fa: seg.fa, fm: flm, fb: seg.fm, whole: left, depth: seg.depth + 1 });
            stack.push(Segment { a: m, b: seg.b, fa: seg.fm, fm: frm, fb: seg.fb, whole: right, depth: seg.depth + 1 });
        }
    }
    Ok(total)
}

/// Composite trapezoid on uniformly spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}
