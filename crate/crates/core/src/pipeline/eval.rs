//! Evaluation protocol: transform the measured source checker, map both
//! checkers to XYZ through the target camera's interpolated CCM, convert
//! to Lab against the measured target Neutral 8, and average CIEDE2000
//! over the 24 patches.

use serde::{Deserialize, Serialize};

use crate::colorimetry::{ciede2000, interpolate_ccm, raw_to_xyz, xyz_to_lab, CameraProfile};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::npm::{
    compute_transform_for_illumination, estimate_transform_from_patches, normalize_by_neutral8,
    transform_checker, CheckerRaw, NpmParameters, RawToRawTransform, NUM_PATCHES,
};
use crate::pipeline::grads::PreparedIllum;
use crate::pipeline::train::{resolve_illumination, IlluminationSource};
use crate::spectral::Spectrum;

/// Mean patch color difference for one scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEvaluation {
    pub scene_id: String,
    pub mean_delta_e: f64,
}

/// Aggregate color-difference report over a test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub per_scene: Vec<SceneEvaluation>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    /// Mean delta E per patch index across scenes.
    pub per_patch_mean: Vec<f64>,
}

impl EvaluationReport {
    fn from_scene_scores(per_scene: Vec<SceneEvaluation>, patch_sums: [f64; NUM_PATCHES]) -> Self {
        let n = per_scene.len() as f64;
        let mut sorted: Vec<f64> = per_scene.iter().map(|s| s.mean_delta_e).collect();
        sorted.sort_by(f64::total_cmp);
        let median = if sorted.is_empty() {
            0.0
        } else if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        EvaluationReport {
            format_version: 1,
            mean: per_scene.iter().map(|s| s.mean_delta_e).sum::<f64>() / n.max(1.0),
            median,
            max: sorted.last().copied().unwrap_or(0.0),
            per_patch_mean: patch_sums.iter().map(|s| s / n.max(1.0)).collect(),
            per_scene,
        }
    }

    /// Plain-text summary table.
    pub fn summary(&self) -> String {
        format!(
            "scenes: {}\nmean dE00:   {:.4}\nmedian dE00: {:.4}\nmax dE00:    {:.4}\n",
            self.per_scene.len(),
            self.mean,
            self.median,
            self.max
        )
    }
}

/// Delta E of one scene given the transform to apply.
fn score_scene(
    source_n: &CheckerRaw,
    target_n: &CheckerRaw,
    transform: &RawToRawTransform,
    profile: &CameraProfile,
) -> Result<(f64, [f64; NUM_PATCHES])> {
    let mapped = transform_checker(source_n, transform);
    let ccm = interpolate_ccm(profile, target_n.neutral8())?;
    let white = raw_to_xyz(target_n.neutral8(), &ccm);
    if white.x <= 0.0 || white.y <= 0.0 || white.z <= 0.0 {
        return Err(Error::DegenerateColor(format!(
            "target Neutral 8 maps to non-positive XYZ {white:?}"
        )));
    }
    let mut per_patch = [0.0; NUM_PATCHES];
    let mut total = 0.0;
    for (x, (m, t)) in mapped.patches().iter().zip(target_n.patches()).enumerate() {
        let lab_m = xyz_to_lab(&raw_to_xyz(*m, &ccm), &white)?;
        let lab_t = xyz_to_lab(&raw_to_xyz(*t, &ccm), &white)?;
        let de = ciede2000(&lab_m, &lab_t);
        per_patch[x] = de;
        total += de;
    }
    Ok((total / NUM_PATCHES as f64, per_patch))
}

fn resolve_spd_for_eval(
    params: &NpmParameters,
    illum: &PreparedIllum,
) -> Result<Spectrum> {
    match illum {
        PreparedIllum::Fixed(s) => Ok(s.clone()),
        PreparedIllum::Recover(wp) => {
            let rec = params
                .recovery
                .as_ref()
                .ok_or(Error::MissingRecovery("evaluation scene"))?;
            let raw = rec.matrix().mul_vec(wp)?;
            Spectrum::new(
                params.grid,
                raw.iter()
                    .map(|v| v.max(crate::illumination::SPD_FLOOR))
                    .collect(),
            )
        }
    }
}

/// Evaluate the model on the paired scenes of a test split.
pub fn evaluate(
    params: &NpmParameters,
    test_set: &Dataset,
    source_camera: &str,
    target_camera: &str,
    illum_source: IlluminationSource,
) -> Result<EvaluationReport> {
    let pairs = test_set.paired_records(source_camera, target_camera);
    if pairs.is_empty() {
        return Err(Error::NoPairedScenes(
            source_camera.to_string(),
            target_camera.to_string(),
        ));
    }
    let profile = test_set.profile(target_camera)?;
    let mut per_scene = Vec::with_capacity(pairs.len());
    let mut patch_sums = [0.0; NUM_PATCHES];
    for (src, tgt) in pairs {
        let source_n = normalize_by_neutral8(&src.checker)?;
        let target_n = normalize_by_neutral8(&tgt.checker)?;
        let illum = resolve_illumination(src, illum_source, &params.grid)?;
        let spd = resolve_spd_for_eval(params, &illum)?;
        let transform = compute_transform_for_illumination(params, &spd)?;
        let (mean_de, per_patch) = score_scene(&source_n, &target_n, &transform, profile)?;
        for (sum, de) in patch_sums.iter_mut().zip(per_patch) {
            *sum += de;
        }
        per_scene.push(SceneEvaluation {
            scene_id: src.scene_id.clone(),
            mean_delta_e: mean_de,
        });
    }
    Ok(EvaluationReport::from_scene_scores(per_scene, patch_sums))
}

/// Evaluate a fixed (illumination-agnostic) transform with the identical
/// protocol.
pub fn evaluate_fixed_transform(
    transform: &RawToRawTransform,
    test_set: &Dataset,
    source_camera: &str,
    target_camera: &str,
) -> Result<EvaluationReport> {
    let pairs = test_set.paired_records(source_camera, target_camera);
    if pairs.is_empty() {
        return Err(Error::NoPairedScenes(
            source_camera.to_string(),
            target_camera.to_string(),
        ));
    }
    let profile = test_set.profile(target_camera)?;
    let mut per_scene = Vec::with_capacity(pairs.len());
    let mut patch_sums = [0.0; NUM_PATCHES];
    for (src, tgt) in pairs {
        let source_n = normalize_by_neutral8(&src.checker)?;
        let target_n = normalize_by_neutral8(&tgt.checker)?;
        let (mean_de, per_patch) = score_scene(&source_n, &target_n, transform, profile)?;
        for (sum, de) in patch_sums.iter_mut().zip(per_patch) {
            *sum += de;
        }
        per_scene.push(SceneEvaluation {
            scene_id: src.scene_id.clone(),
            mean_delta_e: mean_de,
        });
    }
    Ok(EvaluationReport::from_scene_scores(per_scene, patch_sums))
}

/// Illumination-agnostic baseline: one least-squares transform over all
/// normalized patches pooled from the paired training scenes.
pub fn baseline_global_transform(
    train_set: &Dataset,
    source_camera: &str,
    target_camera: &str,
) -> Result<RawToRawTransform> {
    let pairs = train_set.paired_records(source_camera, target_camera);
    if pairs.is_empty() {
        return Err(Error::NoPairedScenes(
            source_camera.to_string(),
            target_camera.to_string(),
        ));
    }
    let mut source_patches = Vec::with_capacity(pairs.len() * NUM_PATCHES);
    let mut target_patches = Vec::with_capacity(pairs.len() * NUM_PATCHES);
    for (src, tgt) in pairs {
        source_patches.extend_from_slice(normalize_by_neutral8(&src.checker)?.patches());
        target_patches.extend_from_slice(normalize_by_neutral8(&tgt.checker)?.patches());
    }
    estimate_transform_from_patches(&source_patches, &target_patches)
}

/// Largest absolute entry difference between two parameter sets, measured
/// over every tensor.
pub fn parameter_drift(a: &NpmParameters, b: &NpmParameters) -> f64 {
    let diff = |x: &crate::math::Matrix, y: &crate::math::Matrix| {
        x.data()
            .iter()
            .zip(y.data())
            .fold(0.0_f64, |acc, (p, q)| acc.max((p - q).abs()))
    };
    let mut d = diff(&a.s_source, &b.s_source)
        .max(diff(&a.s_target, &b.s_target))
        .max(diff(&a.reflectances, &b.reflectances));
    if let (Some(ra), Some(rb)) = (a.recovery.as_ref(), b.recovery.as_ref()) {
        d = d.max(diff(ra.matrix(), rb.matrix()));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::apply_split;
    use crate::data::synthetic::{generate_synthetic, SyntheticConfig};
    use crate::math::Mat3;

    fn synthetic(noise: f64, divergence: f64, seed: u64) -> crate::data::synthetic::SyntheticOutput {
        let config = SyntheticConfig {
            n_train: 6,
            n_val: 2,
            n_test: 4,
            noise_sigma: noise,
            sensitivity_divergence: divergence,
            seed,
            ..SyntheticConfig::default()
        };
        generate_synthetic(&config, &crate::spectral::SpectralGrid::default_visible()).unwrap()
    }

    #[test]
    fn identical_cameras_score_zero() {
        let out = synthetic(0.0, 0.0, 1);
        let splits = apply_split(&out.dataset, &out.split).unwrap();
        let report = evaluate(
            &out.ground_truth,
            &splits.test,
            "cam_a",
            "cam_b",
            IlluminationSource::Recorded,
        )
        .unwrap();
        assert!(report.mean < 1e-9, "mean {}", report.mean);
        assert_eq!(report.per_scene.len(), 4);
        assert_eq!(report.per_patch_mean.len(), 24);
    }

    #[test]
    fn exact_linear_relation_scores_near_zero() {
        // Build a target camera that is an exact 3x3 mix of the source:
        // the fitted transform reproduces the relation and dE vanishes.
        let out = synthetic(0.0, 0.0, 2);
        let mut gt = out.ground_truth.clone();
        let mix = Mat3::from_rows([[0.8, 0.15, 0.05], [0.1, 0.85, 0.05], [0.02, 0.08, 0.9]]);
        let mut target = gt.s_source.clone();
        for j in 0..gt.grid.n_bins {
            let col = [
                gt.s_source.get(0, j),
                gt.s_source.get(1, j),
                gt.s_source.get(2, j),
            ];
            let mixed = mix.mul_vec(col);
            for c in 0..3 {
                target.set(c, j, mixed[c].max(0.0));
            }
        }
        gt.s_target = target;

        // Re-render the test scenes under the mixed ground truth.
        let mut rng = rand::SeedableRng::seed_from_u64(9);
        let grid = gt.grid;
        let mut scenes = Vec::new();
        for i in 0..4 {
            let spd = crate::spectral::planckian_spd(3000.0 + 1500.0 * i as f64, grid).unwrap();
            let (s, t) =
                crate::data::synthetic::render_scene(&gt, &format!("s{i}"), &spd, 0.0, &mut rng)
                    .unwrap();
            scenes.push(s);
            scenes.push(t);
        }
        let ds = Dataset::build(scenes, out.dataset.profiles.clone()).unwrap();
        let report = evaluate(&gt, &ds, "cam_a", "cam_b", IlluminationSource::Recorded).unwrap();
        assert!(report.mean < 1e-6, "mean {}", report.mean);
    }

    #[test]
    fn report_mean_is_scene_average() {
        let out = synthetic(0.01, 1.0, 3);
        let splits = apply_split(&out.dataset, &out.split).unwrap();
        let report = evaluate(
            &out.ground_truth,
            &splits.test,
            "cam_a",
            "cam_b",
            IlluminationSource::Recorded,
        )
        .unwrap();
        let manual: f64 = report.per_scene.iter().map(|s| s.mean_delta_e).sum::<f64>()
            / report.per_scene.len() as f64;
        assert!((report.mean - manual).abs() < 1e-12);
        assert!(report.max >= report.median);
        assert!(report.per_scene.iter().all(|s| s.mean_delta_e >= 0.0));
    }

    #[test]
    fn baseline_single_scene_equals_per_scene_fit() {
        let out = synthetic(0.0, 1.0, 4);
        let one_id: std::collections::BTreeSet<String> =
            std::iter::once(out.split.train[0].clone()).collect();
        let one = out.dataset.subset(&one_id).unwrap();
        let baseline = baseline_global_transform(&one, "cam_a", "cam_b").unwrap();
        let pairs = one.paired_records("cam_a", "cam_b");
        let per_scene = crate::npm::estimate_transform(&pairs[0].0.checker, &pairs[0].1.checker)
            .unwrap();
        assert!(baseline.f.max_abs_diff(&per_scene.f) < 1e-12);
    }

    #[test]
    fn baseline_recovers_shared_linear_relation() {
        // All scenes related by the same matrix: pooling recovers it.
        let out = synthetic(0.0, 0.0, 5);
        let mix = Mat3::from_rows([[0.9, 0.08, 0.02], [0.05, 0.9, 0.05], [0.01, 0.04, 0.95]]);
        let mut scenes = Vec::new();
        for record in &out.dataset.scenes {
            let mut r = record.clone();
            if r.camera_id == "cam_b" {
                let patches = r
                    .checker
                    .patches()
                    .iter()
                    .map(|p| mix.mul_vec(*p))
                    .collect();
                r.checker = CheckerRaw::new(patches).unwrap();
            }
            scenes.push(r);
        }
        let ds = Dataset::build(scenes, out.dataset.profiles.clone()).unwrap();
        let baseline = baseline_global_transform(&ds, "cam_a", "cam_b").unwrap();
        // The normalization rescales rows by the Neutral-8 anchors, which
        // the mix matrix changes; fitting on renormalized patches still
        // recovers a matrix that matches all scenes exactly.
        let report = evaluate_fixed_transform(&baseline, &ds, "cam_a", "cam_b").unwrap();
        assert!(report.mean < 1e-6, "mean {}", report.mean);
    }
}
