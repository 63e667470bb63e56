use alloc::{format, vec, vec::Vec};
use core::f64::consts::PI;

#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::solve_real;
use crate::{Error, Result};

/// `α·(Γ/2) / (π·((ω − ω0)² + Γ²/4))`, unit area times `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub alpha: f64,
    pub center: f64,
    pub width: f64,
}

impl Lorentzian {
    pub fn eval(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        let hw = 0.5 * self.width;
        self.alpha * hw / (PI * (x * x + hw * hw))
    }

    fn gradient(&self, omega: f64) -> [f64; 3] {
        let x = omega - self.center;
        let hw = 0.5 * self.width;
        let q = x * x + hw * hw;
        let base = hw / (PI * q);
        let d_alpha = base;
        let d_center = self.alpha * hw * 2.0 * x / (PI * q * q);
        let d_width = self.alpha / (2.0 * PI) * (q - 2.0 * hw * hw) / (q * q);
        [d_alpha, d_center, d_width]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LorentzFit {
    pub lines: Vec<Lorentzian>,
    /// `‖y − model‖ / ‖y‖`.
    pub relative_residual: f64,
}

fn residuals(lines: &[Lorentzian], x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
    let mut cost = 0.0;
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let m: f64 = lines.iter().map(|l| l.eval(xi)).sum();
        out[i] = yi - m;
        cost += out[i] * out[i];
    }
    cost
}

fn initial_guess(x: &[f64], y: &[f64], n: usize) -> Vec<Lorentzian> {
    let len = y.len();
    let mut maxima: Vec<usize> = (1..len - 1).filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1]).collect();
    maxima.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    if maxima.is_empty() {
        let imax = (0..len).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
        maxima.push(imax);
    }
    let h = (x[len - 1] - x[0]) / (len - 1) as f64;
    maxima
        .iter()
        .take(n)
        .map(|&i| {
            let half = 0.5 * y[i];
            let mut lo = i;
            while lo > 0 && y[lo] > half {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < len && y[hi] > half {
                hi += 1;
            }
            let width = ((hi - lo) as f64 * h).max(2.0 * h);
            Lorentzian { alpha: y[i] * PI * width / 2.0, center: x[i], width }
        })
        .collect()
}

/// Levenberg–Marquardt least squares for a sum of `n` Lorentzians. Fails if
/// the relative residual exceeds `max_relative_residual`.
pub fn fit_lorentzians(x: &[f64], y: &[f64], n: usize, max_relative_residual: f64) -> Result<LorentzFit> {
    if x.len() != y.len() || x.len() < 3 * n + 1 || n == 0 {
        return Err(Error::Fit(format!("need more than {} samples for {} lines", 3 * n, n)));
    }
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(Error::Fit("profile has no signal".into()));
    }
    let mut lines = initial_guess(x, y, n);
    if lines.len() < n {
        return Err(Error::Fit(format!("found {} peaks, expected {}", lines.len(), n)));
    }
    let np = 3 * n;
    let mut r = vec![0.0; x.len()];
    let mut trial_r = vec![0.0; x.len()];
    let mut cost = residuals(&lines, x, y, &mut r);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for (i, &xi) in x.iter().enumerate() {
            let mut row = [0.0; 6];
            for (l, line) in lines.iter().enumerate() {
                row[3 * l..3 * l + 3].copy_from_slice(&line.gradient(xi));
            }
            for a in 0..np {
                jtr[a] += row[a] * r[i];
                for b in 0..np {
                    jtj[a * np + b] += row[a] * row[b];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for d in 0..np {
                a[d * np + d] *= 1.0 + lambda;
            }
            let mut step = jtr.clone();
            if !solve_real(&mut a, &mut step, np) {
                lambda *= 10.0;
                continue;
            }
            let trial: Vec<Lorentzian> = lines
                .iter()
                .enumerate()
                .map(|(l, line)| Lorentzian {
                    alpha: line.alpha + step[3 * l],
                    center: line.center + step[3 * l + 1],
                    width: line.width + step[3 * l + 2],
                })
                .collect();
            if trial.iter().any(|l| !(l.width > 0.0)) {
                lambda *= 10.0;
                continue;
            }
            let trial_cost = residuals(&trial, x, y, &mut trial_r);
            if trial_cost < cost {
                let rel_change = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
                lines = trial;
                cost = trial_cost;
                core::mem::swap(&mut r, &mut trial_r);
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel_change > 1e-14;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    lines.sort_by(|a, b| a.center.total_cmp(&b.center));
    let relative_residual = (cost / norm2).sqrt();
    if relative_residual > max_relative_residual {
        return Err(Error::Fit(format!("relative residual {relative_residual:.3e} above {max_relative_residual}")));
    }
    Ok(LorentzFit { lines, relative_residual })
}
