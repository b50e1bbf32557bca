//! Synthetic two-camera dataset generation for desk-scale verification.
//!
//! Two synthetic cameras with diverging Gaussian-bump sensitivities
//! observe the embedded checker under a seeded mix of blackbody, daylight,
//! and smoothly perturbed illuminants. Scenes carry the illuminant as a
//! spectrometer reading; per-camera white points are emitted alongside so
//! white-point ingestion paths can be exercised on the same data.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::colorimetry::{
    spectrum_xyz, CameraProfile, ColorCorrectionMatrix, XyzColor, CIE_XBAR, CIE_YBAR, CIE_ZBAR,
};
use crate::data::{macbeth::MACBETH_REFLECTANCES, Dataset, SceneRecord, SplitIds};
use crate::error::{Error, Result};
use crate::illumination::IlluminationMeasurement;
use crate::math::Matrix;
use crate::npm::{
    estimate_transform_from_patches, normalize_by_neutral8, simulate_checker, CameraSide,
    CheckerRaw, NpmParameters, NUM_PATCHES,
};
use crate::spectral::{daylight_spd, planckian_spd, resample_spectrum, SpectralGrid, Spectrum};

pub const SOURCE_CAMERA_ID: &str = "cam_a";
pub const TARGET_CAMERA_ID: &str = "cam_b";

/// Configuration for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Fraction of illuminants drawn from the blackbody locus.
    pub planckian_fraction: f64,
    /// Fraction drawn from the daylight series; the remainder are smooth
    /// random perturbations of blackbody spectra.
    pub daylight_fraction: f64,
    pub cct_range: (f64, f64),
    /// Relative Gaussian noise applied to rendered patch values.
    pub noise_sigma: f64,
    /// Scale of the random divergence between the two synthetic cameras
    /// (0 = identical cameras).
    pub sensitivity_divergence: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_train: 120,
            n_val: 20,
            n_test: 30,
            planckian_fraction: 0.4,
            daylight_fraction: 0.4,
            cct_range: (2500.0, 9500.0),
            noise_sigma: 0.005,
            sensitivity_divergence: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::InvalidConfig(
                "synthetic split counts must all be at least 1".into(),
            ));
        }
        if self.planckian_fraction < 0.0
            || self.daylight_fraction < 0.0
            || self.planckian_fraction + self.daylight_fraction > 1.0 + 1e-12
        {
            return Err(Error::InvalidConfig(format!(
                "invalid illuminant mix: planckian {} + daylight {} must stay within [0, 1]",
                self.planckian_fraction, self.daylight_fraction
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if self.cct_range.0 >= self.cct_range.1 {
            return Err(Error::InvalidConfig(format!(
                "empty CCT range {:?}",
                self.cct_range
            )));
        }
        Ok(())
    }
}

/// Everything the generator produces.
#[derive(Debug, Clone)]
pub struct SyntheticOutput {
    pub dataset: Dataset,
    pub split: SplitIds,
    pub ground_truth: NpmParameters,
    /// Green-normalized white point of each camera per scene, keyed by
    /// (scene_id, camera_id).
    pub white_points: BTreeMap<(String, String), [f64; 3]>,
}

/// Gaussian-bump camera sensitivities: red peaks at 610 nm, green at
/// 540 nm, blue at 460 nm, sigma 35 nm, unit peak.
pub fn bump_sensitivities(grid: &SpectralGrid) -> Matrix {
    let centers = [610.0, 540.0, 460.0];
    let sigma = 35.0;
    let mut m = Matrix::zeros(3, grid.n_bins);
    for (c, center) in centers.iter().enumerate() {
        for (j, nm) in grid.wavelengths().enumerate() {
            let t = (nm - center) / sigma;
            m.set(c, j, (-0.5 * t * t).exp());
        }
    }
    m
}

fn perturbed_sensitivities(grid: &SpectralGrid, divergence: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut m = Matrix::zeros(3, grid.n_bins);
    let base_centers = [610.0, 540.0, 460.0];
    for (c, base) in base_centers.iter().enumerate() {
        let center = base + divergence * 12.0 * normal.sample(rng);
        let sigma = (35.0 * (1.0 + divergence * 0.15 * normal.sample(rng))).max(10.0);
        let gain = (1.0 + divergence * 0.2 * normal.sample(rng)).max(0.2);
        for (j, nm) in grid.wavelengths().enumerate() {
            let t = (nm - center) / sigma;
            m.set(c, j, gain * (-0.5 * t * t).exp());
        }
    }
    m
}

fn macbeth_reflectances(grid: &SpectralGrid) -> Result<Matrix> {
    let table_grid = SpectralGrid::default_visible();
    let mut m = Matrix::zeros(NUM_PATCHES, grid.n_bins);
    for (x, row) in MACBETH_REFLECTANCES.iter().enumerate() {
        let spectrum = Spectrum::new(table_grid, row.to_vec())?;
        let resampled = resample_spectrum(&spectrum, *grid)?;
        for (j, v) in resampled.values().iter().enumerate() {
            m.set(x, j, v.min(1.0));
        }
    }
    Ok(m)
}

/// Ground-truth model for the synthetic benchmark: embedded checker
/// reflectances plus two diverging bump cameras. No recovery matrix; the
/// generator describes illumination exactly via the spectrometer path.
pub fn synthetic_ground_truth(
    grid: &SpectralGrid,
    divergence: f64,
    rng: &mut ChaCha8Rng,
) -> Result<NpmParameters> {
    let s_source = perturbed_sensitivities(grid, divergence * 0.5, rng);
    let s_target = perturbed_sensitivities(grid, divergence * 0.5, rng);
    NpmParameters::new(
        *grid,
        s_source,
        s_target,
        macbeth_reflectances(grid)?,
        None,
    )
}

/// Reference illuminants for CCM fitting.
fn reference_illuminants(grid: &SpectralGrid) -> Result<(Spectrum, Spectrum)> {
    Ok((
        daylight_spd(6504.0, *grid)?,
        planckian_spd(2856.0, *grid)?,
    ))
}

/// Least-squares CCM (raw -> XYZ over the 24 patches) for a camera under a
/// reference illuminant, with both sides Neutral-8 anchored.
fn fit_ccm(
    params: &NpmParameters,
    side: CameraSide,
    illuminant: &Spectrum,
) -> Result<ColorCorrectionMatrix> {
    let raw = simulate_checker(params, side, illuminant)?;
    let raw_n = normalize_by_neutral8(&raw)?;

    let obs_grid = SpectralGrid::default_visible();
    let resample_table = |table: &[f64; 36]| -> Result<Vec<f64>> {
        let s = Spectrum::new(obs_grid, table.to_vec())?;
        Ok(resample_spectrum(&s, params.grid)?.values().to_vec())
    };
    let xbar = resample_table(&CIE_XBAR)?;
    let ybar = resample_table(&CIE_YBAR)?;
    let zbar = resample_table(&CIE_ZBAR)?;

    let mut xyz_patches: Vec<[f64; 3]> = Vec::with_capacity(NUM_PATCHES);
    for x in 0..NUM_PATCHES {
        let r = params.reflectances.row(x);
        let mut xyz = [0.0; 3];
        for (j, l) in illuminant.values().iter().enumerate() {
            let e = r[j] * l;
            xyz[0] += xbar[j] * e;
            xyz[1] += ybar[j] * e;
            xyz[2] += zbar[j] * e;
        }
        xyz_patches.push(xyz);
    }
    let anchor = xyz_patches[crate::npm::NEUTRAL8_INDEX][1];
    for p in &mut xyz_patches {
        for v in p.iter_mut() {
            *v /= anchor;
        }
    }
    let f = estimate_transform_from_patches(raw_n.patches(), &xyz_patches)?;
    ColorCorrectionMatrix::new(f.f)
}

/// Build the camera profile (D65 and A reference CCMs plus the true
/// sensitivities as calibration metadata) for one synthetic camera.
fn build_profile(params: &NpmParameters, side: CameraSide, id: &str) -> Result<CameraProfile> {
    let (d65, a) = reference_illuminants(&params.grid)?;
    let ccm_d65 = fit_ccm(params, side, &d65)?;
    let ccm_a = fit_ccm(params, side, &a)?;
    CameraProfile::new(id, ccm_d65, ccm_a)
        .with_sensitivity(params.sensitivity(side).clone(), params.grid)
}

fn sample_illuminant(
    config: &SyntheticConfig,
    grid: &SpectralGrid,
    rng: &mut ChaCha8Rng,
) -> Result<Spectrum> {
    let (lo, hi) = config.cct_range;
    let kind: f64 = rng.gen();
    if kind < config.planckian_fraction {
        let cct = rng.gen_range(lo.max(1000.0)..hi.min(20000.0));
        planckian_spd(cct, *grid)
    } else if kind < config.planckian_fraction + config.daylight_fraction {
        let cct = rng.gen_range(lo.max(4000.0)..hi.min(25000.0));
        daylight_spd(cct, *grid)
    } else {
        // Smooth random envelope over a blackbody base: low-frequency
        // modulation from a handful of knots, linearly interpolated.
        let cct = rng.gen_range(lo.max(1000.0)..hi.min(20000.0));
        let base = planckian_spd(cct, *grid)?;
        let knots: Vec<f64> = (0..5).map(|_| 1.0 + rng.gen_range(-0.35..0.35)).collect();
        let n = grid.n_bins;
        let values: Vec<f64> = base
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let pos = j as f64 / (n - 1) as f64 * (knots.len() - 1) as f64;
                let lo_k = pos.floor() as usize;
                let hi_k = (lo_k + 1).min(knots.len() - 1);
                let frac = pos - lo_k as f64;
                let envelope = knots[lo_k] * (1.0 - frac) + knots[hi_k] * frac;
                (v * envelope).max(0.0)
            })
            .collect();
        Spectrum::new(*grid, values)?.normalized_at_560()
    }
}

fn apply_noise(checker: &CheckerRaw, sigma: f64, rng: &mut ChaCha8Rng) -> Result<CheckerRaw> {
    if sigma == 0.0 {
        return Ok(checker.clone());
    }
    let normal = Normal::new(0.0, sigma).unwrap();
    let patches = checker
        .patches()
        .iter()
        .map(|p| {
            let mut out = [0.0; 3];
            for (c, v) in p.iter().enumerate() {
                out[c] = (v * (1.0 + normal.sample(rng))).max(0.0);
            }
            out
        })
        .collect();
    CheckerRaw::new(patches)
}

/// White point of a camera under an illuminant: the response to a perfect
/// reflector, green-normalized.
pub fn camera_white_point(
    params: &NpmParameters,
    side: CameraSide,
    spd: &Spectrum,
) -> Result<[f64; 3]> {
    let s = params.sensitivity(side);
    let mut wp = [0.0; 3];
    for (c, out) in wp.iter_mut().enumerate() {
        *out = s
            .row(c)
            .iter()
            .zip(spd.values())
            .map(|(a, b)| a * b)
            .sum();
    }
    if wp[1] <= 0.0 {
        return Err(Error::DegenerateColor(
            "synthetic white point has no green response".into(),
        ));
    }
    Ok([wp[0] / wp[1], 1.0, wp[2] / wp[1]])
}

/// Render the per-scene records for both cameras under the true model.
pub fn render_scene(
    ground_truth: &NpmParameters,
    scene_id: &str,
    spd: &Spectrum,
    noise_sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(SceneRecord, SceneRecord)> {
    let meas = IlluminationMeasurement::SpectrometerSpd {
        wavelengths_nm: spd.grid.wavelengths().collect(),
        values: spd.values().to_vec(),
    };
    let mut records = Vec::with_capacity(2);
    for (side, camera_id) in [
        (CameraSide::Source, SOURCE_CAMERA_ID),
        (CameraSide::Target, TARGET_CAMERA_ID),
    ] {
        let clean = simulate_checker(ground_truth, side, spd)?;
        let noisy = apply_noise(&clean, noise_sigma, rng)?;
        records.push(SceneRecord {
            scene_id: scene_id.to_string(),
            camera_id: camera_id.to_string(),
            checker: noisy,
            illumination: meas.clone(),
            exposure_tag: None,
        });
    }
    let target = records.pop().unwrap();
    let source = records.pop().unwrap();
    Ok((source, target))
}

/// Generate the full synthetic benchmark dataset.
pub fn generate_synthetic(config: &SyntheticConfig, grid: &SpectralGrid) -> Result<SyntheticOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ground_truth = synthetic_ground_truth(grid, config.sensitivity_divergence, &mut rng)?;

    let mut profiles = BTreeMap::new();
    for (side, id) in [
        (CameraSide::Source, SOURCE_CAMERA_ID),
        (CameraSide::Target, TARGET_CAMERA_ID),
    ] {
        profiles.insert(id.to_string(), build_profile(&ground_truth, side, id)?);
    }

    let total = config.n_train + config.n_val + config.n_test;
    let mut scenes = Vec::with_capacity(total * 2);
    let mut white_points = BTreeMap::new();
    let mut ids = Vec::with_capacity(total);
    for i in 0..total {
        let scene_id = format!("scene_{i:04}");
        let spd = sample_illuminant(config, grid, &mut rng)?;
        let (source, target) =
            render_scene(&ground_truth, &scene_id, &spd, config.noise_sigma, &mut rng)?;
        for (side, record) in [(CameraSide::Source, &source), (CameraSide::Target, &target)] {
            white_points.insert(
                (scene_id.clone(), record.camera_id.clone()),
                camera_white_point(&ground_truth, side, &spd)?,
            );
        }
        scenes.push(source);
        scenes.push(target);
        ids.push(scene_id);
    }

    let split = SplitIds {
        format_version: 1,
        train: ids[..config.n_train].to_vec(),
        val: ids[config.n_train..config.n_train + config.n_val].to_vec(),
        test: ids[config.n_train + config.n_val..].to_vec(),
    };
    Ok(SyntheticOutput {
        dataset: Dataset::build(scenes, profiles)?,
        split,
        ground_truth,
        white_points,
    })
}

/// Sanity helper used in tests: XYZ of an illuminant spectrum.
pub fn illuminant_xyz(spd: &Spectrum) -> Result<XyzColor> {
    spectrum_xyz(spd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SyntheticConfig {
        SyntheticConfig {
            n_train: 6,
            n_val: 2,
            n_test: 2,
            seed: 42,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn deterministic_generation() {
        let grid = SpectralGrid::default_visible();
        let a = generate_synthetic(&small_config(), &grid).unwrap();
        let b = generate_synthetic(&small_config(), &grid).unwrap();
        assert_eq!(a.ground_truth, b.ground_truth);
        assert_eq!(a.split, b.split);
        for (ra, rb) in a.dataset.scenes.iter().zip(&b.dataset.scenes) {
            assert_eq!(ra.checker, rb.checker);
            assert_eq!(ra.illumination, rb.illumination);
        }
    }

    #[test]
    fn zero_noise_matches_forward_model() {
        let grid = SpectralGrid::default_visible();
        let config = SyntheticConfig {
            noise_sigma: 0.0,
            ..small_config()
        };
        let out = generate_synthetic(&config, &grid).unwrap();
        for record in &out.dataset.scenes {
            let IlluminationMeasurement::SpectrometerSpd {
                wavelengths_nm,
                values,
            } = &record.illumination
            else {
                panic!("synthetic scenes carry spectrometer readings");
            };
            let spd = crate::spectral::spectrum_from_samples(wavelengths_nm, values).unwrap();
            let side = if record.camera_id == SOURCE_CAMERA_ID {
                CameraSide::Source
            } else {
                CameraSide::Target
            };
            let expected = simulate_checker(&out.ground_truth, side, &spd).unwrap();
            assert_eq!(record.checker, expected);
        }
    }

    #[test]
    fn zero_divergence_gives_identical_cameras() {
        let grid = SpectralGrid::default_visible();
        let config = SyntheticConfig {
            sensitivity_divergence: 0.0,
            noise_sigma: 0.0,
            ..small_config()
        };
        let out = generate_synthetic(&config, &grid).unwrap();
        assert_eq!(out.ground_truth.s_source, out.ground_truth.s_target);
        for (scene_id, _) in out.dataset.pairing.clone() {
            let pairs = out.dataset.paired_records(SOURCE_CAMERA_ID, TARGET_CAMERA_ID);
            let (s, t) = pairs
                .iter()
                .find(|(s, _)| s.scene_id == scene_id)
                .unwrap();
            assert_eq!(s.checker, t.checker);
        }
    }

    #[test]
    fn invalid_mix_rejected() {
        let config = SyntheticConfig {
            planckian_fraction: 0.7,
            daylight_fraction: 0.5,
            ..small_config()
        };
        assert!(generate_synthetic(&config, &SpectralGrid::default_visible()).is_err());
    }

    #[test]
    fn profiles_have_invertible_ccms_and_split_partitions() {
        let grid = SpectralGrid::default_visible();
        let out = generate_synthetic(&small_config(), &grid).unwrap();
        assert_eq!(out.dataset.profiles.len(), 2);
        assert_eq!(out.split.train.len(), 6);
        assert_eq!(out.split.val.len(), 2);
        assert_eq!(out.split.test.len(), 2);
        assert_eq!(out.white_points.len(), 20);
        for wp in out.white_points.values() {
            assert_eq!(wp[1], 1.0);
        }
    }
}
