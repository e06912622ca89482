//! Discrete analytic signal, instantaneous phase, frequency and period.

use std::f64::consts::PI;
use std::ops::Range;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::emd::zero_crossings;
use super::HhtError;

/// Fraction of samples dropped at each end when forming `valid_range`.
pub const BOUNDARY_TRIM: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSignal {
    /// Hilbert transform of the input.
    pub imaginary: Vec<f64>,
    /// Unwrapped instantaneous phase, radians.
    pub phase: Vec<f64>,
    /// Instantaneous angular frequency, radians per day.
    pub omega: Vec<f64>,
    /// Instantaneous period 2π/ω, days per cycle.
    pub tau: Vec<f64>,
    pub valid_range: Range<usize>,
}

impl AnalyticSignal {
    /// Writes `day,phase_rad,omega,tau` over `valid_range`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["day", "phase_rad", "omega", "tau"])?;
        for day in self.valid_range.clone() {
            w.write_record([
                day.to_string(),
                self.phase[day].to_string(),
                self.omega[day].to_string(),
                self.tau[day].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Imaginary part of the analytic signal: FFT, zero negative frequencies,
/// double positive ones, inverse FFT.
fn hilbert_imaginary(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        let gain = if k == 0 || (n.is_multiple_of(2) && k == half) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *c *= gain;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.im / n as f64).collect()
}

/// Removes 2π jumps so consecutive samples differ by at most π.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    for (i, &p) in wrapped.iter().enumerate() {
        if i > 0 {
            let d = p - wrapped[i - 1];
            if d > PI {
                offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            } else if d < -PI {
                offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Centered differences inside, one-sided at the two ends.
fn gradient(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| match i {
            0 => y[1] - y[0],
            i if i == n - 1 => y[n - 1] - y[n - 2],
            i => 0.5 * (y[i + 1] - y[i - 1]),
        })
        .collect()
}

pub fn valid_range(len: usize) -> Range<usize> {
    let trim = (len as f64 * BOUNDARY_TRIM).ceil() as usize;
    trim..len.saturating_sub(trim).max(trim)
}

/// Analytic signal of an oscillatory series with unit (one-day) spacing.
pub fn hilbert_transform(imf: &[f64]) -> Result<AnalyticSignal, HhtError> {
    if imf.len() < 8 {
        return Err(HhtError::TooShort { len: imf.len(), min: 8 });
    }
    if let Some(index) = imf.iter().position(|v| !v.is_finite()) {
        return Err(HhtError::NonFiniteInput { index });
    }
    if zero_crossings(imf) < 2 {
        return Err(HhtError::NotOscillatory);
    }
    let imaginary = hilbert_imaginary(imf);
    let wrapped: Vec<f64> = imf.iter().zip(&imaginary).map(|(re, im)| im.atan2(*re)).collect();
    let phase = unwrap_phase(&wrapped);
    let omega = gradient(&phase);
    let tau = omega.iter().map(|w| 2.0 * PI / w).collect();
    Ok(AnalyticSignal { imaginary, phase, omega, tau, valid_range: valid_range(imf.len()) })
}

/// Arithmetic mean of τ over `valid_range`.
pub fn mean_period(analytic: &AnalyticSignal) -> Result<f64, HhtError> {
    let window = &analytic.tau[analytic.valid_range.clone()];
    if window.is_empty() {
        return Err(HhtError::EmptyValidRange);
    }
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}
