//! Simulation and matching losses.
//!
//! The angular term is computed in radians so the two terms share a
//! magnitude scale. Measured patches with (near-)zero norm are skipped in
//! the angular mean with a warning; the L1 mean always runs over all
//! patches.

use crate::colorimetry::ColorCorrectionMatrix;
use crate::npm::{CheckerRaw, RawToRawTransform};

/// A measured patch below this norm counts as fully clipped/black and is
/// excluded from the angular term.
pub const ZERO_PATCH_NORM: f64 = 1e-12;

/// Norm guard matching the tape graph: sqrt(clamp(|u|^2, 1e-24)).
const NORM_FLOOR_SQ: f64 = 1e-24;

/// Angular-term inclusion mask derived from the measured patches.
pub fn angular_mask(measured: &[[f64; 3]]) -> Vec<bool> {
    measured
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt() > ZERO_PATCH_NORM)
        .collect()
}

/// Mean angular error (radians, over unmasked patches) plus `w` times the
/// mean per-patch L1 difference. Returns the loss and the skipped-patch
/// count. Exactly mirrors the differentiable graph.
pub fn angular_l1_loss(sim: &[[f64; 3]], meas: &[[f64; 3]], w: f64) -> (f64, usize) {
    debug_assert_eq!(sim.len(), meas.len());
    let mask = angular_mask(meas);
    let included = mask.iter().filter(|m| **m).count();
    let skipped = sim.len() - included;

    let mut angular = 0.0;
    let mut l1 = 0.0;
    for ((s, m), keep) in sim.iter().zip(meas).zip(&mask) {
        for c in 0..3 {
            l1 += (s[c] - m[c]).abs();
        }
        if !keep {
            continue;
        }
        let dot: f64 = (0..3).map(|c| s[c] * m[c]).sum();
        let nu = (0..3)
            .map(|c| s[c] * s[c])
            .sum::<f64>()
            .max(NORM_FLOOR_SQ)
            .sqrt();
        let nv = (0..3)
            .map(|c| m[c] * m[c])
            .sum::<f64>()
            .max(NORM_FLOOR_SQ)
            .sqrt();
        let cos = (dot / (nu * nv)).clamp(-1.0, 1.0);
        angular += cos.acos();
    }
    let angular_mean = if included > 0 {
        angular / included as f64
    } else {
        0.0
    };
    let l1_mean = l1 / sim.len() as f64;
    (angular_mean + w * l1_mean, skipped)
}

/// Simulation loss between a simulated and a measured checker (both in the
/// same normalization convention).
pub fn simulation_loss(simulated: &CheckerRaw, measured: &CheckerRaw, w: f64) -> f64 {
    let (loss, skipped) = angular_l1_loss(simulated.patches(), measured.patches(), w);
    if skipped > 0 {
        log::warn!("simulation loss skipped {skipped} zero-norm measured patches");
    }
    loss
}

/// Matching loss in XYZ space: compare C * F(source patch) against
/// C * target patch with the angular + L1 combination.
pub fn matching_loss(
    source_meas: &CheckerRaw,
    target_meas: &CheckerRaw,
    f: &RawToRawTransform,
    ccm: &ColorCorrectionMatrix,
    w: f64,
) -> f64 {
    let c = ccm.matrix();
    let mapped: Vec<[f64; 3]> = source_meas
        .patches()
        .iter()
        .map(|p| c.mul_vec(f.apply(*p)))
        .collect();
    let target_xyz: Vec<[f64; 3]> = target_meas
        .patches()
        .iter()
        .map(|p| c.mul_vec(*p))
        .collect();
    let (loss, skipped) = angular_l1_loss(&mapped, &target_xyz, w);
    if skipped > 0 {
        log::warn!("matching loss skipped {skipped} zero-norm target patches");
    }
    loss
}
