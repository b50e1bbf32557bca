//! Wavelength grids, spectra, resampling, and analytic illuminant
//! generators for synthetic data.
//!
//! All spectra are relative spectral power distributions over a uniform
//! wavelength grid. Generators are normalized so the value at 560 nm is 1,
//! which makes spectra from different sources directly comparable; the
//! rest of the crate is invariant to overall spectral scale anyway.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod tables;
pub use tables::{DAYLIGHT_S0, DAYLIGHT_S1, DAYLIGHT_S2};

/// Uniform wavelength grid: `n_bins` bin centers starting at `start_nm`,
/// spaced `step_nm` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub start_nm: f64,
    pub step_nm: f64,
    pub n_bins: usize,
}

impl SpectralGrid {
    pub fn new(start_nm: f64, step_nm: f64, n_bins: usize) -> Result<Self> {
        if !(start_nm.is_finite() && step_nm.is_finite()) || step_nm <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step must be positive and finite, got start {start_nm}, step {step_nm}"
            )));
        }
        if n_bins < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 bins, got {n_bins}"
            )));
        }
        Ok(SpectralGrid {
            start_nm,
            step_nm,
            n_bins,
        })
    }

    /// 380-730 nm at 10 nm: 36 bins, matching common spectrometer layouts.
    pub fn default_visible() -> Self {
        SpectralGrid {
            start_nm: 380.0,
            step_nm: 10.0,
            n_bins: 36,
        }
    }

    pub fn end_nm(&self) -> f64 {
        self.start_nm + self.step_nm * (self.n_bins - 1) as f64
    }

    pub fn wavelength(&self, bin: usize) -> f64 {
        self.start_nm + self.step_nm * bin as f64
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_bins).map(|i| self.wavelength(i))
    }

    /// Index of the bin whose center is closest to `nm`.
    pub fn nearest_bin(&self, nm: f64) -> usize {
        let idx = ((nm - self.start_nm) / self.step_nm).round();
        (idx.max(0.0) as usize).min(self.n_bins - 1)
    }

    pub fn validate_matches(&self, other: &SpectralGrid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

/// A nonnegative relative spectral power distribution on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: SpectralGrid,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_bins {
            return Err(Error::InvalidSpectrum(format!(
                "grid has {} bins but {} values given",
                grid.n_bins,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpectrum(
                "values must be finite and nonnegative".into(),
            ));
        }
        Ok(Spectrum { grid, values })
    }

    pub fn constant(grid: SpectralGrid, value: f64) -> Result<Self> {
        Spectrum::new(grid, vec![value; grid.n_bins])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation at an arbitrary wavelength, holding edge
    /// values outside the grid span.
    pub fn sample(&self, nm: f64) -> f64 {
        let g = &self.grid;
        if nm <= g.start_nm {
            return self.values[0];
        }
        if nm >= g.end_nm() {
            return self.values[g.n_bins - 1];
        }
        let t = (nm - g.start_nm) / g.step_nm;
        let lo = t.floor() as usize;
        let frac = t - lo as f64;
        self.values[lo] * (1.0 - frac) + self.values[lo + 1] * frac
    }

    /// Scale so the (interpolated) value at 560 nm is 1.
    pub fn normalized_at_560(&self) -> Result<Spectrum> {
        let anchor = self.sample(560.0);
        if anchor <= 0.0 {
            return Err(Error::InvalidSpectrum(
                "cannot normalize: value at 560 nm is not positive".into(),
            ));
        }
        let values = self.values.iter().map(|v| v / anchor).collect();
        Spectrum::new(self.grid, values)
    }

    /// Write as two-column CSV: `wavelength_nm,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("wavelength_nm,value\n");
        for (nm, v) in self.grid.wavelengths().zip(&self.values) {
            out.push_str(&format!("{nm},{v}\n"));
        }
        out
    }

    /// Parse the CSV format produced by [`Spectrum::to_csv`]. The grid is
    /// inferred from the wavelength column, which must be uniformly spaced.
    pub fn from_csv(text: &str) -> Result<Spectrum> {
        let mut wavelengths = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("wavelength_nm")) {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::InvalidSpectrum(format!("short row {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidSpectrum(format!("row {i}: {e}")))
            };
            wavelengths.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        spectrum_from_samples(&wavelengths, &values)
    }
}

/// Build a spectrum from explicit (wavelength, value) samples, which must be
/// uniformly spaced and strictly increasing.
pub fn spectrum_from_samples(wavelengths: &[f64], values: &[f64]) -> Result<Spectrum> {
    if wavelengths.len() < 2 {
        return Err(Error::InvalidSpectrum(
            "need at least 2 spectral samples".into(),
        ));
    }
    if wavelengths.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} wavelengths vs {} values",
            wavelengths.len(),
            values.len()
        )));
    }
    let step = wavelengths[1] - wavelengths[0];
    for w in wavelengths.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 {
            return Err(Error::InvalidSpectrum(
                "wavelength samples must be uniformly spaced".into(),
            ));
        }
    }
    let grid = SpectralGrid::new(wavelengths[0], step, wavelengths.len())?;
    Spectrum::new(grid, values.to_vec())
}

/// Resample a spectrum onto a new grid by piecewise-linear interpolation at
/// the target bin centers. Outside the source span, edge values are held.
/// Negative interpolants are clamped to zero.
pub fn resample_spectrum(s: &Spectrum, target: SpectralGrid) -> Result<Spectrum> {
    if s.grid.n_bins < 2 {
        return Err(Error::InvalidSpectrum("source has fewer than 2 bins".into()));
    }
    let src_span = (s.grid.start_nm, s.grid.end_nm());
    let tgt_span = (target.start_nm, target.end_nm());
    if tgt_span.1 < src_span.0 || tgt_span.0 > src_span.1 {
        return Err(Error::NonOverlappingRanges {
            source: src_span,
            target: tgt_span,
        });
    }
    let values = target
        .wavelengths()
        .map(|nm| s.sample(nm).max(0.0))
        .collect();
    Spectrum::new(target, values)
}

// Second radiation constant c2 = h*c/k in nm*K.
const PLANCK_C2_NM_K: f64 = 1.4388e7;

fn planck_radiance(nm: f64, cct: f64) -> f64 {
    // Relative spectral radiance; the leading constant cancels under the
    // 560 nm normalization.
    let x = PLANCK_C2_NM_K / (nm * cct);
    nm.powi(-5) / x.exp_m1()
}

/// Blackbody spectrum at correlated color temperature `cct`, normalized so
/// the value at 560 nm equals 1.
pub fn planckian_spd(cct: f64, grid: SpectralGrid) -> Result<Spectrum> {
    if !(1000.0..=20000.0).contains(&cct) {
        return Err(Error::CctOutOfRange(cct, 1000.0, 20000.0));
    }
    let anchor = planck_radiance(560.0, cct);
    let values = grid
        .wavelengths()
        .map(|nm| planck_radiance(nm, cct) / anchor)
        .collect();
    Spectrum::new(grid, values)
}

/// Chromaticity coordinates of the CIE daylight locus at `cct`.
pub fn daylight_xy(cct: f64) -> (f64, f64) {
    let t = cct;
    let x = if t <= 7000.0 {
        -4.6070e9 / t.powi(3) + 2.9678e6 / t.powi(2) + 0.09911e3 / t + 0.244063
    } else {
        -2.0064e9 / t.powi(3) + 1.9018e6 / t.powi(2) + 0.24748e3 / t + 0.237040
    };
    let y = -3.000 * x * x + 2.870 * x - 0.275;
    (x, y)
}

/// CIE daylight-series illuminant at correlated color temperature `cct`,
/// synthesized from the standard S0/S1/S2 component tables, resampled to
/// `grid`, and normalized so the value at 560 nm equals 1.
pub fn daylight_spd(cct: f64, grid: SpectralGrid) -> Result<Spectrum> {
    if !(4000.0..=25000.0).contains(&cct) {
        return Err(Error::CctOutOfRange(cct, 4000.0, 25000.0));
    }
    let (x, y) = daylight_xy(cct);
    let m = 0.0241 + 0.2562 * x - 0.7341 * y;
    let m1 = (-1.3515 - 1.7703 * x + 5.9114 * y) / m;
    let m2 = (0.0300 - 31.4424 * x + 30.0717 * y) / m;

    let table_grid = SpectralGrid::default_visible();
    let values: Vec<f64> = (0..table_grid.n_bins)
        .map(|i| (DAYLIGHT_S0[i] + m1 * DAYLIGHT_S1[i] + m2 * DAYLIGHT_S2[i]).max(0.0))
        .collect();
    let on_table = Spectrum::new(table_grid, values)?;
    resample_spectrum(&on_table, grid)?.normalized_at_560()
}
