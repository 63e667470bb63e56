use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::media::{Branch, Transverse};
use super::tensor::{GreenContext, Point};
use crate::domain::{EmitterSpec, LayerStack, Polarization};
use crate::numerics::{adaptive_simpson, Mat3, Quadrable, Tolerance};
use crate::{Error, Result};

/// Target for the z' quadratures. The integrands scale like `1/ω²`, so the
/// target is relative.
pub const Z_TOLERANCE: Tolerance = Tolerance { abs: 1e-300, rel: 1e-10, max_depth: 32 };

/// `∫ e^{−2β''s} ds` weighted by `ε''`, i.e. the contribution of a
/// semi-infinite layer per unit `|f(boundary)|²`. A transparent half-space
/// is taken in the limit `ε'' → 0`.
pub fn exterior_weight(eps: Complex64, beta: Complex64, omega: f64) -> f64 {
    if eps.im > 0.0 {
        eps.im / (2.0 * beta.im)
    } else if beta.im == 0.0 && beta.re > 0.0 {
        beta.re / (omega * omega)
    } else {
        0.0
    }
}

/// `∫ dz' ε''(z') f(z')` over every lossy region of the stack, including the
/// two half-spaces. Interior layers are split at `breaks`. Observation points
/// must not lie in the half-spaces, where `f` is assumed to decay as the
/// outgoing wave of that layer.
pub(crate) fn loss_integral<V, F>(ctx: &GreenContext<'_>, breaks: &[Point], mut f: F) -> Result<V>
where
    V: Quadrable,
    F: FnMut(&Point) -> V,
{
    let stack = ctx.stack;
    let c = &ctx.coeffs[0];
    let n = stack.last();
    let mut total = V::zero();
    for j in 1..n {
        let eps2 = c.eps[j].im;
        if !(eps2 > 0.0) {
            continue;
        }
        let d = c.thickness[j];
        let mut cuts: Vec<f64> = breaks.iter().filter(|p| p.layer == j).map(|p| p.local).collect();
        cuts.push(0.0);
        cuts.push(d);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let side = |s: f64| {
                if s == lo {
                    1
                } else if s == hi {
                    -1
                } else {
                    0
                }
            };
            let part = adaptive_simpson(|s| f(&Point::in_layer(stack, j, s).nudged(side(s))), lo, hi, Z_TOLERANCE)?;
            total = total + part * eps2;
        }
    }
    for j in [0, n] {
        if c.mirror[j] {
            continue;
        }
        let weight = exterior_weight(c.eps[j], c.beta[j], ctx.omega);
        if weight != 0.0 {
            total = total + f(&Point::in_layer(stack, j, 0.0)) * weight;
        }
    }
    Ok(total)
}

fn interior_point(stack: &LayerStack, p: &Point) -> Result<()> {
    if p.layer == 0 || p.layer == stack.last() {
        Err(Error::PositionOutOfRange(p.z))
    } else {
        Ok(())
    }
}

/// `c⁺_q(k, ω) = 4π ω⁴ ∫ dz' ε''(z') |g⁺_q(0⁺, z')|²`.
pub fn outcoupling_constant(stack: &LayerStack, q: Polarization, k: f64, omega: f64) -> Result<f64> {
    let ctx = GreenContext::new(stack, k, omega)?;
    outcoupling_in(&ctx, q)
}

pub(crate) fn outcoupling_in(ctx: &GreenContext<'_>, q: Polarization) -> Result<f64> {
    let tr = Transverse::along_x(ctx.k);
    let integral = loss_integral(ctx, &[], |p| ctx.outgoing_row(q, p, tr).iter().map(|x| x.norm_sqr()).sum::<f64>())?;
    let w2 = ctx.omega * ctx.omega;
    Ok(4.0 * PI * w2 * w2 * integral)
}

/// Closed form of the out-coupling constant for a transparent output
/// half-space: `π ω² / β_out`.
pub fn outcoupling_closed_form(stack: &LayerStack, k: f64, omega: f64) -> f64 {
    let out = &stack.layers[stack.last()];
    let beta = super::media::axial_wavenumber(out, k, omega);
    PI * omega * omega / beta.re
}

/// Sampled real function of frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
}

/// `4ω·d̂·Im G(z_A, z_A)·d̂` on a uniform frequency grid `(min, max, n)`.
pub fn local_coupling_spectrum(
    stack: &LayerStack,
    emitter: &EmitterSpec,
    k: f64,
    omega_range: (f64, f64, usize),
) -> Result<CouplingProfile> {
    let (lo, hi, n) = omega_range;
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let tr = Transverse::along_x(k);
    let mut omega = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    for i in 0..n {
        let w = lo + step * i as f64;
        let ctx = GreenContext::new(stack, k, w)?;
        let p = ctx.point(emitter.z_position);
        let g = ctx.tensor_at(&p, &p, tr);
        omega.push(w);
        value.push(4.0 * w * g.bilinear(&emitter.dipole, &emitter.dipole).im);
    }
    Ok(CouplingProfile { omega, value })
}

/// `S_q(ω) = ∫ dz ε''(z) d̂·G(z_A, z)·g⁺_q(0⁺, z)*`: amplitude with which a
/// dipole at the emitter feeds the outgoing q wave.
pub fn dipole_transfer(ctx: &GreenContext<'_>, emitter: &EmitterSpec, q: Polarization) -> Result<Complex64> {
    let tr = Transverse::along_x(ctx.k);
    let src = ctx.point(emitter.z_position);
    interior_point(ctx.stack, &src)?;
    let d = emitter.dipole;
    loss_integral(ctx, &[src], |p| {
        let g = ctx.tensor_at(&src, p, tr);
        let row = ctx.outgoing_row(q, p, tr);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += d[i] * g[(i, j)] * row[j].conj();
            }
        }
        acc
    })
}

fn zz() -> Mat3 {
    let mut m = Mat3::zero();
    m[(2, 2)] = Complex64::new(1.0, 0.0);
    m
}

/// Relative residual of `ω²∫ε'' G(z,z')G†(z'',z') dz' = Im_k G(z, z'')`,
/// with the contact terms of the singular `−ẑẑ δ/(εω²)` part included.
pub fn verify_im_identity(stack: &LayerStack, z: f64, z2: f64, k: f64, omega: f64) -> Result<f64> {
    verify_im_identity_with(stack, z, z2, Transverse::along_x(k), omega, Branch::Causal)
}

pub fn verify_im_identity_with(
    stack: &LayerStack,
    z: f64,
    z2: f64,
    tr: Transverse,
    omega: f64,
    branch: Branch,
) -> Result<f64> {
    let ctx = GreenContext::with_branch(stack, tr.k, omega, branch)?;
    let (p, p2) = (ctx.point(z), ctx.point(z2));
    interior_point(stack, &p)?;
    interior_point(stack, &p2)?;
    let integral: Mat3 =
        loss_integral(&ctx, &[p, p2], |s| ctx.tensor_at(&p, s, tr).matmul(&ctx.tensor_at(&p2, s, tr).adjoint()))?;
    let mut lhs = integral * (omega * omega);
    let eps = &ctx.coeffs[0].eps;
    if eps[p.layer].im > 0.0 {
        let c = -eps[p.layer].im / eps[p.layer];
        lhs = lhs + zz().matmul(&ctx.tensor_at(&p2, &p, tr).adjoint()).scale(c);
    }
    if eps[p2.layer].im > 0.0 {
        let c = -eps[p2.layer].im / eps[p2.layer].conj();
        lhs = lhs + ctx.tensor_at(&p, &p2, tr).matmul(&zz()).scale(c);
    }
    let forward = ctx.tensor_at(&p, &p2, tr);
    let backward = ctx.tensor_at(&p2, &p, tr).adjoint();
    let rhs = (forward - backward).scale(Complex64::new(0.0, -0.5));
    let scale = rhs.frobenius();
    if scale == 0.0 {
        return Ok((lhs - rhs).frobenius());
    }
    Ok((lhs - rhs).frobenius() / scale)
}
