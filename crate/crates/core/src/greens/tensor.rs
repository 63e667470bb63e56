use num_complex::Complex64;

use super::media::{e_p, e_s, Branch, Transverse};
use super::stack::{stack_coefficients_at, StackCoefficients};
use crate::domain::{LayerStack, Polarization};
use crate::numerics::Mat3;
use crate::{Error, Result};

/// A point on the z axis resolved to its layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub z: f64,
    pub layer: usize,
    pub local: f64,
    /// Side from which a coincident point is approached: `-1` below, `+1`
    /// above, `0` exactly on it.
    pub side: i8,
}

impl Point {
    pub fn locate(stack: &LayerStack, z: f64) -> Self {
        let (layer, local) = stack.locate(z);
        Self { z, layer, local, side: 0 }
    }

    /// Point at local coordinate `local` inside `layer`.
    pub fn in_layer(stack: &LayerStack, layer: usize, local: f64) -> Self {
        let z = if layer == 0 { local } else { stack.start(layer) + local };
        Self { z, layer, local, side: 0 }
    }

    pub fn nudged(mut self, side: i8) -> Self {
        self.side = side;
        self
    }

    fn after(&self, other: &Point) -> Option<bool> {
        if self.z != other.z {
            Some(self.z > other.z)
        } else if self.side != other.side {
            Some(self.side > other.side)
        } else if self.layer != other.layer {
            Some(self.layer > other.layer)
        } else {
            None
        }
    }
}

/// Nonlocal part of the per-k Green tensor `G(z, z', k, ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGreen {
    pub value: Mat3,
    pub z: f64,
    pub z_prime: f64,
    pub k: Transverse,
    pub omega: f64,
}

/// Stack coefficients of both polarizations at one `(|k|, ω)`, from which
/// the Green tensor can be assembled for any pair of points and either
/// sign of the in-plane direction.
#[derive(Debug, Clone)]
pub struct GreenContext<'a> {
    pub stack: &'a LayerStack,
    pub k: f64,
    pub omega: f64,
    pub coeffs: [StackCoefficients; 2],
}

fn index(q: Polarization) -> usize {
    match q {
        Polarization::S => 0,
        Polarization::P => 1,
    }
}

fn add_scaled(acc: &mut [Complex64; 3], v: &[Complex64; 3], c: Complex64) {
    for i in 0..3 {
        acc[i] += v[i] * c;
    }
}

impl<'a> GreenContext<'a> {
    pub fn new(stack: &'a LayerStack, k: f64, omega: f64) -> Result<Self> {
        Self::with_branch(stack, k, omega, Branch::Causal)
    }

    pub fn with_branch(stack: &'a LayerStack, k: f64, omega: f64, branch: Branch) -> Result<Self> {
        let w = Complex64::new(omega, 0.0);
        let coeffs = [
            stack_coefficients_at(stack, Polarization::S, k, w, branch),
            stack_coefficients_at(stack, Polarization::P, k, w, branch),
        ];
        if let Some(layer) = coeffs.iter().find_map(|c| c.degenerate) {
            return Err(Error::DegeneratePole { layer });
        }
        Ok(Self { stack, k, omega, coeffs })
    }

    pub fn coefficients(&self, q: Polarization) -> &StackCoefficients {
        &self.coeffs[index(q)]
    }

    pub fn point(&self, z: f64) -> Point {
        Point::locate(self.stack, z)
    }

    /// `(e_{q+}, e_{q−})` in layer `j` for in-plane direction `u`.
    fn vectors(&self, q: Polarization, j: usize, u: [f64; 2]) -> ([Complex64; 3], [Complex64; 3]) {
        match q {
            Polarization::S => (e_s(u), e_s(u)),
            Polarization::P => {
                let c = self.coefficients(q);
                (e_p(1.0, c.beta[j], self.k, c.kj[j], u), e_p(-1.0, c.beta[j], self.k, c.kj[j], u))
            }
        }
    }

    /// `E^{j>}`: wave of the upward family, unit forward amplitude at the
    /// top of layer `j`.
    pub fn upward_wave(&self, q: Polarization, j: usize, local: f64, u: [f64; 2]) -> [Complex64; 3] {
        let c = self.coefficients(q);
        let (plus, minus) = self.vectors(q, j, u);
        let phase = (Complex64::i() * c.beta[j] * (local - c.thickness[j])).exp();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        add_scaled(&mut out, &plus, phase);
        add_scaled(&mut out, &minus, c.r_up[j] / phase);
        out
    }

    /// `E^{j<}`: wave of the downward family, unit backward amplitude at the
    /// bottom of layer `j`.
    pub fn downward_wave(&self, q: Polarization, j: usize, local: f64, u: [f64; 2]) -> [Complex64; 3] {
        let c = self.coefficients(q);
        let (plus, minus) = self.vectors(q, j, u);
        let phase = (Complex64::i() * c.beta[j] * local).exp();
        let mut out = [Complex64::new(0.0, 0.0); 3];
        add_scaled(&mut out, &minus, phase.inv());
        add_scaled(&mut out, &plus, c.r_down[j] * phase);
        out
    }

    fn ordered(&self, p: &Point, src: &Point, u: [f64; 2], p_after: bool) -> Mat3 {
        let mut g = Mat3::zero();
        for q in Polarization::ALL {
            let c = self.coefficients(q);
            if c.mirror[p.layer] || c.mirror[src.layer] {
                continue;
            }
            let neg = [-u[0], -u[1]];
            let (left, right, weight) = if p_after {
                (
                    self.upward_wave(q, p.layer, p.local, u),
                    self.downward_wave(q, src.layer, src.local, neg),
                    c.a[p.layer] * c.b[src.layer],
                )
            } else {
                (
                    self.downward_wave(q, p.layer, p.local, u),
                    self.upward_wave(q, src.layer, src.local, neg),
                    c.b[p.layer] * c.a[src.layer],
                )
            };
            let pref = Complex64::new(0.0, 0.5 * q.xi()) * weight / c.norm;
            g = g + Mat3::outer(&left, &right).scale(pref);
        }
        g
    }

    /// Nonlocal tensor between resolved points; coincident points get the
    /// mean of the two one-sided limits.
    pub fn tensor_at(&self, p: &Point, src: &Point, tr: Transverse) -> Mat3 {
        match p.after(src) {
            Some(after) => self.ordered(p, src, tr.u, after),
            None => (self.ordered(p, src, tr.u, true) + self.ordered(p, src, tr.u, false)) * 0.5,
        }
    }

    pub fn tensor(&self, z: f64, z_prime: f64, tr: Transverse) -> Mat3 {
        self.tensor_at(&self.point(z), &self.point(z_prime), tr)
    }

    /// Row `g⁺_q(0⁺, z')`: amplitude of the outgoing `e_{q+}` wave just past
    /// the first interface of the output half-space, for a source at `src`.
    /// Points in the output half-space are taken beyond the observation point.
    pub fn outgoing_row(&self, q: Polarization, src: &Point, tr: Transverse) -> [Complex64; 3] {
        let c = self.coefficients(q);
        let n = c.beta.len() - 1;
        let zero = [Complex64::new(0.0, 0.0); 3];
        if c.mirror[n] || c.mirror[src.layer] {
            return zero;
        }
        let neg = [-tr.u[0], -tr.u[1]];
        let pref = Complex64::new(0.0, 0.5 * q.xi()) * c.a[n] / c.norm;
        let (wave, weight) = if src.layer == n {
            (self.upward_wave(q, n, src.local, neg), c.b[n] * c.r_down[n])
        } else {
            (self.downward_wave(q, src.layer, src.local, neg), c.b[src.layer])
        };
        let mut out = zero;
        add_scaled(&mut out, &wave, pref * weight);
        out
    }
}

/// Per-k Green tensor between two axial positions.
pub fn green_planar(stack: &LayerStack, z: f64, z_prime: f64, k: Transverse, omega: f64) -> Result<PlanarGreen> {
    let ctx = GreenContext::new(stack, k.k, omega)?;
    Ok(PlanarGreen { value: ctx.tensor(z, z_prime, k), z, z_prime, k, omega })
}
