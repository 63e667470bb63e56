use alloc::{vec, vec::Vec};

use num_complex::Complex64;

use super::media::{beta_causal, beta_continued, fresnel, mirror_reflection, Branch};
use crate::domain::{LayerStack, Polarization};

/// Generalized reflection/transmission data of a stack for one polarization.
///
/// `r_up[j]` is the reflection seen from the top of layer `j` looking toward
/// the last layer, `r_down[j]` the one seen from its bottom looking toward
/// layer 0. `a`/`b` are the amplitudes of the waves launched from layer 0 and
/// from the last layer; they are only defined up to a common scale, which
/// cancels against `norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackCoefficients {
    pub polarization: Polarization,
    pub k: f64,
    pub omega: Complex64,
    pub eps: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    /// `√ε·ω`, the wavenumber of the medium.
    pub kj: Vec<Complex64>,
    pub thickness: Vec<f64>,
    pub mirror: Vec<bool>,
    pub r_up: Vec<Complex64>,
    pub r_down: Vec<Complex64>,
    pub t_up: Vec<Complex64>,
    pub t_down: Vec<Complex64>,
    /// `D_j = 1 − r_down r_up e^{2iβd}`; equal to one in the half-spaces.
    pub d: Vec<Complex64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub norm: Complex64,
    /// Interior layer whose denominator vanishes exactly.
    pub degenerate: Option<usize>,
}

impl StackCoefficients {
    pub fn interior_denominators(&self) -> &[Complex64] {
        &self.d[1..self.d.len() - 1]
    }

    pub fn phase(&self, j: usize) -> Complex64 {
        (Complex64::i() * self.beta[j] * self.thickness[j]).exp()
    }

    fn interface(&self, from: usize, to: usize) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        if self.mirror[from] {
            (zero, zero)
        } else if self.mirror[to] {
            (mirror_reflection(self.polarization), zero)
        } else {
            fresnel(
                self.polarization,
                self.eps[from],
                self.beta[from],
                self.kj[from],
                self.eps[to],
                self.beta[to],
                self.kj[to],
            )
        }
    }
}

/// Coefficients on the real frequency axis with the causal branch.
pub fn stack_coefficients(stack: &LayerStack, q: Polarization, k: f64, omega: f64) -> StackCoefficients {
    stack_coefficients_at(stack, q, k, Complex64::new(omega, 0.0), Branch::Causal)
}

/// Coefficients at a possibly complex frequency.
pub fn stack_coefficients_at(
    stack: &LayerStack,
    q: Polarization,
    k: f64,
    omega: Complex64,
    branch: Branch,
) -> StackCoefficients {
    let count = stack.layers.len();
    let n = count - 1;
    let real_axis = omega.im == 0.0;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut c = StackCoefficients {
        polarization: q,
        k,
        omega,
        eps: vec![zero; count],
        beta: vec![zero; count],
        kj: vec![zero; count],
        thickness: (0..count).map(|j| stack.thickness(j)).collect(),
        mirror: stack.layers.iter().map(|l| l.permittivity.is_perfect_conductor()).collect(),
        r_up: vec![zero; count],
        r_down: vec![zero; count],
        t_up: vec![zero; count],
        t_down: vec![zero; count],
        d: vec![one; count],
        a: vec![zero; count],
        b: vec![zero; count],
        norm: one,
        degenerate: None,
    };
    for (j, layer) in stack.layers.iter().enumerate() {
        if c.mirror[j] {
            continue;
        }
        let eps = layer.permittivity.at_complex(omega);
        let beta = if real_axis { beta_causal(eps, k, omega.re) } else { beta_continued(eps, k, omega) };
        c.eps[j] = eps;
        c.beta[j] = match branch {
            Branch::Causal => beta,
            Branch::Flipped => -beta,
        };
        c.kj[j] = eps.sqrt() * omega;
    }
    let phase2: Vec<Complex64> = (0..count).map(|j| c.phase(j) * c.phase(j)).collect();

    for j in (0..n).rev() {
        let (r_fwd, t_fwd) = c.interface(j, j + 1);
        let (r_back, t_back) = c.interface(j + 1, j);
        let rt = c.r_up[j + 1] * phase2[j + 1];
        c.r_up[j] = r_fwd + t_back * rt * t_fwd / (one - r_back * rt);
    }
    for j in 0..n {
        let (r_back, t_back) = c.interface(j + 1, j);
        let (r_fwd, t_fwd) = c.interface(j, j + 1);
        let rt = c.r_down[j] * phase2[j];
        c.r_down[j + 1] = r_back + t_fwd * rt * t_back / (one - r_fwd * rt);
    }
    for j in 1..n {
        c.d[j] = one - c.r_down[j] * c.r_up[j] * phase2[j];
        if c.degenerate.is_none() && c.d[j].norm() == 0.0 {
            c.degenerate = Some(j);
        }
    }

    // Upward family: satisfies the outgoing condition in the last layer.
    let start = if c.mirror[0] {
        c.a[1] = one;
        1
    } else {
        c.a[0] = one;
        0
    };
    for j in start..n {
        let (_, t_fwd) = c.interface(j, j + 1);
        let (r_back, _) = c.interface(j + 1, j);
        c.a[j + 1] = t_fwd * c.a[j] * c.phase(j + 1) / (one - r_back * c.r_up[j + 1] * phase2[j + 1]);
    }
    // Downward family: outgoing in layer 0.
    let top = if c.mirror[n] {
        c.b[n - 1] = one;
        n - 1
    } else {
        c.b[n] = one;
        n
    };
    for j in (0..top).rev() {
        let (_, t_back) = c.interface(j + 1, j);
        let (r_fwd, _) = c.interface(j, j + 1);
        c.b[j] = t_back * c.b[j + 1] * c.phase(j) / (one - r_fwd * c.r_down[j] * phase2[j]);
    }
    for j in 0..count {
        let back = c.phase(j).inv() * c.d[j];
        c.t_up[j] = c.a[j] * back;
        c.t_down[j] = c.b[j] * back;
    }
    c.norm = c.a[1] * c.b[1] * c.beta[1] * c.phase(1).inv() * c.d[1];
    c
}
