//! Empirical mode decomposition by envelope-mean sifting.

use serde::{Deserialize, Serialize};

use super::spline::NaturalSpline;
use super::HhtError;

/// Sifting parameters. `max_imfs = None` means `⌊log₂(len)⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiftConfig {
    /// Stop when Σ(h_{k−1} − h_k)² / Σ h_{k−1}² drops below this and the
    /// candidate satisfies the IMF extrema/zero-crossing property.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    pub max_imfs: Option<usize>,
}

impl Default for SiftConfig {
    fn default() -> Self {
        Self { sd_threshold: 0.2, max_sift_iterations: 100, max_imfs: None }
    }
}

impl SiftConfig {
    pub fn imf_limit(&self, len: usize) -> usize {
        self.max_imfs.unwrap_or_else(|| len.max(1).ilog2() as usize)
    }
}

/// IMFs ordered from highest to lowest frequency, plus the residue.
#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
    pub source_length: usize,
    pub sift_config: SiftConfig,
    /// Sifting iterations spent on each IMF.
    pub sift_iterations: Vec<usize>,
}

impl ImfSet {
    pub fn len(&self) -> usize {
        self.imfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imfs.is_empty()
    }

    /// Σ IMF + residue at every sample.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            for (o, v) in out.iter_mut().zip(imf) {
                *o += v;
            }
        }
        out
    }

    /// Writes `day,imf1,…,imfK,residue`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["day".to_string()];
        header.extend((1..=self.imfs.len()).map(|k| format!("imf{k}")));
        header.push("residue".into());
        w.write_record(&header)?;
        for day in 0..self.source_length {
            let mut row = vec![day.to_string()];
            row.extend(self.imfs.iter().map(|imf| imf[day].to_string()));
            row.push(self.residue[day].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Indices of interior local maxima and minima. A flat run counts once, at
/// its middle, when both neighbours lie on the same side of it.
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = x.len();
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        let mut j = i;
        while j + 1 < n && x[j + 1] == x[i] {
            j += 1;
        }
        if j + 1 >= n {
            break;
        }
        let (left, right) = (x[i - 1], x[j + 1]);
        if x[i] > left && x[i] > right {
            maxima.push((i + j) / 2);
        } else if x[i] < left && x[i] < right {
            minima.push((i + j) / 2);
        }
        i = j + 1;
    }
    (maxima, minima)
}

/// Sign changes, ignoring samples that are exactly zero.
pub fn zero_crossings(x: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in x {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// |#extrema − #zero-crossings| ≤ 1.
pub fn satisfies_imf_property(x: &[f64]) -> bool {
    let (mx, mn) = extrema(x);
    (mx.len() + mn.len()).abs_diff(zero_crossings(x)) <= 1
}

/// Envelope through `points`, with the two extrema nearest each end mirrored
/// about that end.
fn envelope(x: &[f64], points: &[usize]) -> Vec<f64> {
    let n = x.len();
    let last = (n - 1) as f64;
    let mut xs = Vec::with_capacity(points.len() + 4);
    let mut ys = Vec::with_capacity(points.len() + 4);
    for &p in points.iter().take(2).rev() {
        xs.push(-(p as f64));
        ys.push(x[p]);
    }
    for &p in points {
        xs.push(p as f64);
        ys.push(x[p]);
    }
    for &p in points.iter().rev().take(2) {
        xs.push(2.0 * last - p as f64);
        ys.push(x[p]);
    }
    NaturalSpline::new(xs, ys).sample(n)
}

fn envelope_mean(x: &[f64]) -> Option<Vec<f64>> {
    let (maxima, minima) = extrema(x);
    if maxima.is_empty() || minima.is_empty() {
        return None;
    }
    let upper = envelope(x, &maxima);
    let lower = envelope(x, &minima);
    Some(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

fn sift(x: &[f64], config: &SiftConfig) -> (Vec<f64>, usize) {
    let mut h = x.to_vec();
    let mut iterations = 0;
    while iterations < config.max_sift_iterations {
        let Some(mean) = envelope_mean(&h) else { break };
        iterations += 1;
        let energy: f64 = h.iter().map(|v| v * v).sum();
        let change: f64 = mean.iter().map(|m| m * m).sum();
        for (v, m) in h.iter_mut().zip(&mean) {
            *v -= m;
        }
        let sd = if energy > 0.0 { change / energy } else { 0.0 };
        if sd < config.sd_threshold && satisfies_imf_property(&h) {
            break;
        }
    }
    (h, iterations)
}

/// Candidate modes whose peak amplitude is below this fraction of the
/// input's are round-off, not modes.
pub const NEGLIGIBLE_RESIDUE: f64 = 1e-12;

/// Decomposes `series` into IMFs plus a residue. Extraction stops when the
/// remainder has fewer than two interior extrema, the next candidate mode is
/// negligible next to the input, or the IMF limit is hit.
pub fn emd_decompose(series: &[f64], config: &SiftConfig) -> Result<ImfSet, HhtError> {
    if series.len() < 8 {
        return Err(HhtError::TooShort { len: series.len(), min: 8 });
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(HhtError::NonFiniteInput { index });
    }
    let limit = config.imf_limit(series.len());
    let mut residue = series.to_vec();
    let mut imfs = Vec::new();
    let mut sift_iterations = Vec::new();
    let peak = |x: &[f64]| x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = NEGLIGIBLE_RESIDUE * peak(series);
    while imfs.len() < limit {
        let (maxima, minima) = extrema(&residue);
        if maxima.len() + minima.len() < 2 {
            break;
        }
        let (imf, iterations) = sift(&residue, config);
        if peak(&imf) <= floor {
            break;
        }
        for (r, v) in residue.iter_mut().zip(&imf) {
            *r -= v;
        }
        imfs.push(imf);
        sift_iterations.push(iterations);
    }
    Ok(ImfSet {
        imfs,
        residue,
        source_length: series.len(),
        sift_config: SiftConfig { max_imfs: Some(limit), ..*config },
        sift_iterations,
    })
}
