//! Illumination estimation: turn an RGB image statistic, a white point, a
//! multispectral vector, or a spectrometer reading into a spectral power
//! distribution on the model grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Matrix;
use crate::spectral::{resample_spectrum, spectrum_from_samples, SpectralGrid, Spectrum};

/// Floor applied to recovered spectra so downstream simulation stays
/// physical even when the linear recovery produces negative bins. The clamp
/// has zero gradient below the floor.
pub const SPD_FLOOR: f64 = 1e-6;

/// Sensor response to the scene illuminant, normalized so the reference
/// channel equals 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitePoint {
    values: Vec<f64>,
    reference: usize,
}

impl WhitePoint {
    pub fn new(values: Vec<f64>, reference: usize) -> Result<Self> {
        if reference >= values.len() {
            return Err(Error::DimensionMismatch(format!(
                "reference channel {reference} out of range for {} channels",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidMeasurement(
                "white point values must be finite and positive".into(),
            ));
        }
        let anchor = values[reference];
        let values = values.iter().map(|v| v / anchor).collect();
        Ok(WhitePoint { values, reference })
    }

    /// RGB white point with green as the reference channel.
    pub fn rgb(values: [f64; 3]) -> Result<Self> {
        WhitePoint::new(values.to_vec(), 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn channels(&self) -> usize {
        self.values.len()
    }

    pub fn as_rgb(&self) -> Result<[f64; 3]> {
        if self.values.len() != 3 {
            return Err(Error::DimensionMismatch(format!(
                "expected RGB white point, got {} channels",
                self.values.len()
            )));
        }
        Ok([self.values[0], self.values[1], self.values[2]])
    }
}

/// N x M linear map from an M-channel white point to an N-bin spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRecoveryMatrix {
    m: Matrix,
}

impl SpectralRecoveryMatrix {
    pub fn new(m: Matrix, grid: &SpectralGrid) -> Result<Self> {
        if m.rows() != grid.n_bins {
            return Err(Error::DimensionMismatch(format!(
                "recovery matrix has {} rows, grid has {} bins",
                m.rows(),
                grid.n_bins
            )));
        }
        if !m.is_finite() {
            return Err(Error::InvalidMeasurement(
                "recovery matrix entries must be finite".into(),
            ));
        }
        Ok(SpectralRecoveryMatrix { m })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn matrix_mut(&mut self) -> &mut Matrix {
        &mut self.m
    }

    pub fn channels(&self) -> usize {
        self.m.cols()
    }
}

/// One illumination observation attached to a scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IlluminationMeasurement {
    /// Per-channel means of the source camera image; a color constancy
    /// method turns these into a white point.
    RgbImageStats { values: [f64; 3] },
    /// Precomputed white point (e.g. the output of an external color
    /// constancy model), green-normalized RGB.
    WhitePoint { values: [f64; 3] },
    /// Response vector of an auxiliary multispectral sensor.
    MultispectralVector { values: Vec<f64> },
    /// Direct spectrometer reading.
    SpectrometerSpd {
        wavelengths_nm: Vec<f64>,
        values: Vec<f64>,
    },
}

impl IlluminationMeasurement {
    pub fn validate(&self) -> Result<()> {
        match self {
            IlluminationMeasurement::RgbImageStats { values }
            | IlluminationMeasurement::WhitePoint { values } => {
                if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(Error::InvalidMeasurement(
                        "RGB measurement values must be finite and positive".into(),
                    ));
                }
            }
            IlluminationMeasurement::MultispectralVector { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidMeasurement(
                        "multispectral vector is empty".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(Error::InvalidMeasurement(
                        "multispectral values must be finite and positive".into(),
                    ));
                }
            }
            IlluminationMeasurement::SpectrometerSpd {
                wavelengths_nm,
                values,
            } => {
                if wavelengths_nm.len() != values.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} wavelengths vs {} values",
                        wavelengths_nm.len(),
                        values.len()
                    )));
                }
                if values.len() < 2 {
                    return Err(Error::InvalidMeasurement(
                        "spectrometer reading needs at least 2 bins".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidMeasurement(
                        "spectrometer values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Gray-world white point: channel means normalized by the reference
/// channel (green for RGB, otherwise the strongest channel).
pub fn gray_world(channel_means: &[f64]) -> Result<WhitePoint> {
    if channel_means.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidMeasurement(
            "gray world needs strictly positive channel means".into(),
        ));
    }
    let reference = if channel_means.len() == 3 {
        1
    } else {
        channel_means
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    };
    WhitePoint::new(channel_means.to_vec(), reference)
}

/// Recover an SPD from a white point through the spectral recovery matrix,
/// clamping at [`SPD_FLOOR`].
pub fn recover_spd(
    wp: &WhitePoint,
    m: &SpectralRecoveryMatrix,
    grid: &SpectralGrid,
) -> Result<Spectrum> {
    if wp.channels() != m.channels() {
        return Err(Error::DimensionMismatch(format!(
            "white point has {} channels, recovery matrix expects {}",
            wp.channels(),
            m.channels()
        )));
    }
    if m.matrix().rows() != grid.n_bins {
        return Err(Error::DimensionMismatch(format!(
            "recovery matrix covers {} bins, grid has {}",
            m.matrix().rows(),
            grid.n_bins
        )));
    }
    let raw = m.matrix().mul_vec(wp.values())?;
    let values = raw.iter().map(|v| v.max(SPD_FLOOR)).collect();
    Spectrum::new(*grid, values)
}

/// Rebin a spectrometer reading onto the model grid and normalize the
/// 560 nm bin to 1. Absolute intensity is irrelevant downstream.
pub fn spd_from_spectrometer(measurement: &Spectrum, grid: &SpectralGrid) -> Result<Spectrum> {
    let resampled = resample_spectrum(measurement, *grid)?;
    resampled.normalized_at_560().map_err(|_| {
        Error::InvalidMeasurement("spectrometer reading has no power at 560 nm".into())
    })
}

/// Dispatch a measurement to the appropriate illumination path. The
/// spectrometer path never touches the recovery matrix; the other paths
/// require one.
pub fn estimate_illumination(
    meas: &IlluminationMeasurement,
    recovery: Option<&SpectralRecoveryMatrix>,
    grid: &SpectralGrid,
) -> Result<Spectrum> {
    meas.validate()?;
    match meas {
        IlluminationMeasurement::RgbImageStats { values } => {
            let wp = gray_world(values)?;
            let m = recovery.ok_or(Error::MissingRecovery("RGB image statistics"))?;
            recover_spd(&wp, m, grid)
        }
        IlluminationMeasurement::WhitePoint { values } => {
            let wp = WhitePoint::rgb(*values)?;
            let m = recovery.ok_or(Error::MissingRecovery("white point"))?;
            recover_spd(&wp, m, grid)
        }
        IlluminationMeasurement::MultispectralVector { values } => {
            let wp = gray_world(values)?;
            let m = recovery.ok_or(Error::MissingRecovery("multispectral vector"))?;
            recover_spd(&wp, m, grid)
        }
        IlluminationMeasurement::SpectrometerSpd {
            wavelengths_nm,
            values,
        } => {
            let s = spectrum_from_samples(wavelengths_nm, values)?;
            spd_from_spectrometer(&s, grid)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gray_world_divides_by_green() {
        let wp = gray_world(&[0.2, 0.4, 0.6]).unwrap();
        assert_eq!(wp.values(), &[0.5, 1.0, 1.5]);
    }

    #[test]
    fn gray_world_achromatic_and_scale_invariant() {
        let wp = gray_world(&[0.37, 0.37, 0.37]).unwrap();
        assert_eq!(wp.values(), &[1.0, 1.0, 1.0]);
        let a = gray_world(&[0.1, 0.5, 0.3]).unwrap();
        let b = gray_world(&[1.0, 5.0, 3.0]).unwrap();
        assert_eq!(a.values(), b.values());
        assert!(gray_world(&[0.0, 1.0, 1.0]).is_err());
    }

    fn grid() -> SpectralGrid {
        SpectralGrid::default_visible()
    }

    #[test]
    fn recovery_selects_column() {
        let g = grid();
        // Three columns, each a scaled ramp; wp (0,1,0) picks the middle one.
        let mut data = vec![0.0; g.n_bins * 3];
        for i in 0..g.n_bins {
            data[i * 3] = 0.3;
            data[i * 3 + 1] = 0.1 + 0.01 * i as f64;
            data[i * 3 + 2] = 0.7;
        }
        let m =
            SpectralRecoveryMatrix::new(Matrix::from_vec(g.n_bins, 3, data).unwrap(), &g).unwrap();
        // A white point with tiny side channels instead of exact zeros
        // (white points must be positive); contributions stay negligible.
        let wp = WhitePoint::new(vec![1e-300, 1.0, 1e-300], 1).unwrap();
        let spd = recover_spd(&wp, &m, &g).unwrap();
        for (i, v) in spd.values().iter().enumerate() {
            assert_relative_eq!(*v, 0.1 + 0.01 * i as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn recovery_clamps_to_floor() {
        let g = grid();
        let m = SpectralRecoveryMatrix::new(Matrix::zeros(g.n_bins, 3), &g).unwrap();
        let wp = WhitePoint::rgb([1.0, 1.0, 1.0]).unwrap();
        let spd = recover_spd(&wp, &m, &g).unwrap();
        assert!(spd.values().iter().all(|v| *v == SPD_FLOOR));
    }

    #[test]
    fn recovery_linear_above_floor() {
        let g = grid();
        let mut data = vec![0.0; g.n_bins * 3];
        for (i, v) in data.iter_mut().enumerate() {
            *v = 0.5 + 0.001 * (i % 17) as f64;
        }
        let m =
            SpectralRecoveryMatrix::new(Matrix::from_vec(g.n_bins, 3, data).unwrap(), &g).unwrap();
        let u = WhitePoint::new(vec![0.5, 1.0, 0.25], 1).unwrap();
        let v = WhitePoint::new(vec![0.25, 1.0, 0.5], 1).unwrap();
        let sum_wp = WhitePoint::new(
            u.values().iter().zip(v.values()).map(|(a, b)| a + b).collect(),
            1,
        )
        .unwrap();
        // sum_wp is renormalized by its green channel (2.0), so compare
        // against the half-sum of the individual recoveries.
        let su = recover_spd(&u, &m, &g).unwrap();
        let sv = recover_spd(&v, &m, &g).unwrap();
        let ssum = recover_spd(&sum_wp, &m, &g).unwrap();
        for i in 0..g.n_bins {
            assert_relative_eq!(
                ssum.values()[i],
                (su.values()[i] + sv.values()[i]) / 2.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn spectrometer_normalizes_and_ignores_scale() {
        let g = grid();
        let meas = Spectrum::constant(g, 7.0).unwrap();
        let spd = spd_from_spectrometer(&meas, &g).unwrap();
        assert!(spd.values().iter().all(|v| (*v - 1.0).abs() < 1e-12));

        let ramp: Vec<f64> = (0..36).map(|i| 1.0 + i as f64).collect();
        let a = spd_from_spectrometer(&Spectrum::new(g, ramp.clone()).unwrap(), &g).unwrap();
        let scaled: Vec<f64> = ramp.iter().map(|v| v * 7.0).collect();
        let b = spd_from_spectrometer(&Spectrum::new(g, scaled).unwrap(), &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }

        let zero = Spectrum::constant(g, 0.0).unwrap();
        assert!(spd_from_spectrometer(&zero, &g).is_err());
    }

    #[test]
    fn dispatch_contract() {
        let g = grid();
        let mut data = vec![0.0; g.n_bins * 3];
        for (i, v) in data.iter_mut().enumerate() {
            *v = 0.01 + 0.002 * (i % 11) as f64;
        }
        let m =
            SpectralRecoveryMatrix::new(Matrix::from_vec(g.n_bins, 3, data).unwrap(), &g).unwrap();

        // Spectrometer input bypasses the recovery matrix entirely.
        let spec_meas = IlluminationMeasurement::SpectrometerSpd {
            wavelengths_nm: g.wavelengths().collect(),
            values: vec![2.0; g.n_bins],
        };
        let with_m = estimate_illumination(&spec_meas, Some(&m), &g).unwrap();
        let without_m = estimate_illumination(&spec_meas, None, &g).unwrap();
        assert_eq!(with_m.values(), without_m.values());

        // White point (1,1,1) yields the row sums of the recovery matrix.
        let wp_meas = IlluminationMeasurement::WhitePoint {
            values: [1.0, 1.0, 1.0],
        };
        let spd = estimate_illumination(&wp_meas, Some(&m), &g).unwrap();
        for (i, v) in spd.values().iter().enumerate() {
            let row_sum: f64 = m.matrix().row(i).iter().sum();
            assert_relative_eq!(*v, row_sum.max(SPD_FLOOR), epsilon = 1e-12);
        }

        // Gray world on image statistics equals the white-point path on the
        // normalized means.
        let stats = IlluminationMeasurement::RgbImageStats {
            values: [0.2, 0.4, 0.6],
        };
        let via_stats = estimate_illumination(&stats, Some(&m), &g).unwrap();
        let wp = IlluminationMeasurement::WhitePoint {
            values: [0.5, 1.0, 1.5],
        };
        let via_wp = estimate_illumination(&wp, Some(&m), &g).unwrap();
        for (a, b) in via_stats.values().iter().zip(via_wp.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }

        // Non-spectrometer inputs require the recovery matrix.
        assert!(matches!(
            estimate_illumination(&stats, None, &g),
            Err(Error::MissingRecovery(_))
        ));
    }

    #[test]
    fn measurement_json_shape() {
        let meas = IlluminationMeasurement::WhitePoint {
            values: [0.5, 1.0, 1.5],
        };
        let text = serde_json::to_string(&meas).unwrap();
        assert!(text.contains("\"kind\":\"white_point\""));
        let back: IlluminationMeasurement = serde_json::from_str(&text).unwrap();
        assert_eq!(back, meas);
    }
}
