//! Model initialization from calibration data, with seeded defaults for
//! anything not measured.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::illumination::SpectralRecoveryMatrix;
use crate::math::Matrix;
use crate::npm::{NpmParameters, NUM_PATCHES};
use crate::spectral::SpectralGrid;

/// Calibration tensors to copy into the model; anything `None` falls back
/// to the seeded default.
#[derive(Debug, Clone, Default)]
pub struct InitTensors {
    /// 24 x N reflectances in [0, 1].
    pub reflectances: Option<Matrix>,
    /// 3 x N source sensitivity.
    pub s_source: Option<Matrix>,
    /// 3 x N target sensitivity.
    pub s_target: Option<Matrix>,
    /// N x M recovery matrix.
    pub recovery: Option<Matrix>,
}

fn default_sensitivity(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> Matrix {
    // Gaussian bumps at 610/540/460 nm (sigma 35 nm, unit peak) plus
    // U(0, 0.05) noise.
    let centers = [610.0, 540.0, 460.0];
    let sigma = 35.0;
    let mut m = Matrix::zeros(3, grid.n_bins);
    for (c, center) in centers.iter().enumerate() {
        for (j, nm) in grid.wavelengths().enumerate() {
            let t = (nm - center) / sigma;
            m.set(c, j, (-0.5 * t * t).exp() + rng.gen_range(0.0..0.05));
        }
    }
    m
}

fn default_reflectances(grid: &SpectralGrid, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(NUM_PATCHES, grid.n_bins);
    for v in m.data_mut() {
        *v = rng.gen_range(0.05..0.95);
    }
    m
}

fn default_recovery(grid: &SpectralGrid, channels: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(grid.n_bins, channels);
    let hi = 1.0 / grid.n_bins as f64;
    for v in m.data_mut() {
        *v = rng.gen_range(0.0..hi);
    }
    m
}

/// Build model parameters from whatever calibration is available.
///
/// `recovery_channels` sets the white-point channel count when no measured
/// recovery matrix is given; `None` (and no measured matrix) omits the
/// recovery matrix entirely, which is the spectrometer-only configuration.
pub fn init_from_calibration(
    grid: SpectralGrid,
    tensors: InitTensors,
    recovery_channels: Option<usize>,
    seed: u64,
) -> Result<NpmParameters> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_source = match tensors.s_source {
        Some(m) => m,
        None => default_sensitivity(&grid, &mut rng),
    };
    let s_target = match tensors.s_target {
        Some(m) => m,
        None => default_sensitivity(&grid, &mut rng),
    };
    let reflectances = match tensors.reflectances {
        Some(m) => m,
        None => default_reflectances(&grid, &mut rng),
    };
    let recovery = match (tensors.recovery, recovery_channels) {
        (Some(m), channels) => {
            if let Some(c) = channels {
                if m.cols() != c {
                    return Err(Error::DimensionMismatch(format!(
                        "measured recovery matrix has {} channels, configuration expects {c}",
                        m.cols()
                    )));
                }
            }
            Some(SpectralRecoveryMatrix::new(m, &grid)?)
        }
        (None, Some(c)) => Some(SpectralRecoveryMatrix::new(
            default_recovery(&grid, c, &mut rng),
            &grid,
        )?),
        (None, None) => None,
    };
    NpmParameters::new(grid, s_source, s_target, reflectances, recovery)
}
