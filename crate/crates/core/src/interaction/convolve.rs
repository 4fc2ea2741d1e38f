//! Numerical convolution of line profiles.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::profile::LineProfile;
use crate::{Error, Result};

/// Sampled inputs must carry at least this many grid points per FWHM.
pub const MIN_POINTS_PER_FWHM: usize = 100;

/// Grid points per FWHM of the narrower analytic input.
const ANALYTIC_POINTS_PER_FWHM: f64 = 200.0;

/// The grid step never drops below the wider FWHM divided by this, which
/// bounds the cost when one input is delta-like.
const MAX_STEPS_PER_WIDE_FWHM: f64 = 4000.0;

/// Half-span of the convolution grid in units of the wider FWHM.
const HALF_SPAN_FWHM: f64 = 30.0;

/// Convolution `(a ⊗ b)(x) = ∫ a(y) b(x − y) dy`, returned as a sampled
/// profile.
///
/// The result is the unnormalized convolution integral, so its peak carries
/// the units of `a.peak · b.peak · MHz`. Callers comparing shapes use ratios
/// (see [`LineProfile::normalized`]).
///
/// Analytic inputs enter as exact cell integrals, so arbitrarily narrow
/// analytic profiles act as proper deltas. Sampled inputs are used at their
/// own resolution and must have at least [`MIN_POINTS_PER_FWHM`] points per
/// FWHM.
pub fn convolve_profiles(a: &LineProfile, b: &LineProfile) -> Result<LineProfile> {
    for p in [a, b] {
        if let Some(g) = p.grid() {
            let ppf = p.fwhm() / g.step();
            if ppf < MIN_POINTS_PER_FWHM as f64 {
                return Err(Error::Resolution {
                    points_per_fwhm: ppf,
                    required: MIN_POINTS_PER_FWHM,
                });
            }
        }
    }
    let wide = a.fwhm().max(b.fwhm());
    let narrow = a.fwhm().min(b.fwhm());
    let mut step = (narrow / ANALYTIC_POINTS_PER_FWHM).max(wide / MAX_STEPS_PER_WIDE_FWHM);
    for p in [a, b] {
        if let Some(g) = p.grid() {
            step = step.min(g.step());
        }
    }
    let half = (HALF_SPAN_FWHM * wide / step).ceil() as usize;
    let n = 2 * half + 1;

    let masses = |p: &LineProfile| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let y = p.center() + (k as f64 - half as f64) * step;
                p.mass(y - 0.5 * step, y + 0.5 * step)
            })
            .collect()
    };
    let ma = masses(a);
    let mb = masses(b);
    let full = fft_convolve(&ma, &mb);

    // full[j] sits at a.center + b.center + (j - 2*half) * step.
    let values: Vec<f64> = full[half..half + n]
        .iter()
        .map(|v| (v / step).max(0.0))
        .collect();
    let start = a.center() + b.center() - half as f64 * step;
    LineProfile::sampled(start, step, values)
}

fn fft_convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let out_len = x.len() + y.len() - 1;
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);

    let pad = |v: &[f64]| -> Vec<Complex<f64>> {
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&r| Complex::new(r, 0.0)).collect();
        buf.resize(size, Complex::new(0.0, 0.0));
        buf
    };
    let mut fx = pad(x);
    let mut fy = pad(y);
    forward.process(&mut fx);
    forward.process(&mut fy);
    for (u, v) in fx.iter_mut().zip(&fy) {
        *u *= v;
    }
    inverse.process(&mut fx);
    let scale = 1.0 / size as f64;
    fx[..out_len].iter().map(|c| c.re * scale).collect()
}

/// A profile discretized into cell masses, for evaluating its convolution with
/// a second, varying profile at a handful of points.
#[derive(Debug, Clone)]
pub struct MassGrid {
    positions: Vec<f64>,
    masses: Vec<f64>,
}

impl MassGrid {
    /// Cells of width `step` covering `center ± half_span` of `profile`.
    pub fn new(profile: &LineProfile, step: f64, half_span: f64) -> Self {
        let half = (half_span / step).ceil() as i64;
        let (positions, masses) = (-half..=half)
            .map(|k| {
                let y = profile.center() + k as f64 * step;
                (y, profile.mass(y - 0.5 * step, y + 0.5 * step))
            })
            .filter(|(_, m)| *m != 0.0)
            .unzip();
        Self { positions, masses }
    }

    /// `∫ profile(y) f(x − y) dy` by summing cell masses.
    pub fn convolve_at(&self, x: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.positions
            .iter()
            .zip(&self.masses)
            .map(|(&y, &m)| m * f(x - y))
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_widths_add() {
        let a = LineProfile::lorentzian(0.0, 22.0, 1.0).unwrap();
        let b = LineProfile::lorentzian(0.0, 36.0, 1.0).unwrap();
        let c = convolve_profiles(&a, &b).unwrap();
        assert!((c.fwhm() - 58.0).abs() < 0.1, "fwhm {}", c.fwhm());
        assert!(c.center().abs() < 1e-6);
    }

    #[test]
    fn centers_add() {
        let a = LineProfile::lorentzian(5.0, 10.0, 1.0).unwrap();
        let b = LineProfile::gaussian(-2.0, 8.0, 1.0).unwrap();
        let c = convolve_profiles(&a, &b).unwrap();
        assert!((c.center() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn coarse_sampled_input_is_rejected() {
        let l = LineProfile::lorentzian(0.0, 10.0, 1.0).unwrap();
        let step = 0.5;
        let values = (0..401).map(|i| l.evaluate(-100.0 + i as f64 * step)).collect();
        let coarse = LineProfile::sampled(-100.0, step, values).unwrap();
        assert!(matches!(
            convolve_profiles(&coarse, &l),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn mass_grid_matches_closed_form() {
        // Lorentzian ⊗ Lorentzian is Lorentzian with summed widths and
        // peak·peak·(π/2)·w1·w2/(w1 + w2) at the center.
        let f = LineProfile::lorentzian(0.0, 22.0, 1.0).unwrap();
        let l = LineProfile::lorentzian(0.0, 36.0, 1.0).unwrap();
        let g = MassGrid::new(&f, 0.05, 3000.0);
        let c0 = g.convolve_at(0.0, |x| l.evaluate(x));
        let expected = std::f64::consts::FRAC_PI_2 * 22.0 * 36.0 / 58.0;
        assert!((c0 / expected - 1.0).abs() < 1e-3);
        let c29 = g.convolve_at(29.0, |x| l.evaluate(x));
        assert!((c29 / c0 - 0.5).abs() < 1e-3);
    }
}
