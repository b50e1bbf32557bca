//! Dataset schemas, ingestion, deterministic splits, and synthetic data.
//!
//! A dataset directory holds `profiles/*.json` and `scenes/*.json`; each
//! scene file is one checker capture by one camera. Records sharing a
//! scene id across two cameras form a pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::colorimetry::CameraProfile;
use crate::error::{Error, Result};
use crate::illumination::IlluminationMeasurement;
use crate::npm::CheckerRaw;

pub mod macbeth;
pub mod pfm;
pub mod synthetic;

pub use macbeth::MACBETH_REFLECTANCES;

/// One checker capture: camera, patch values, and the illumination
/// observation for the scene. Checker values are assumed black-level
/// corrected and linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneRecord {
    pub scene_id: String,
    pub camera_id: String,
    pub checker: CheckerRaw,
    pub illumination: IlluminationMeasurement,
    pub exposure_tag: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SceneFile {
    #[serde(default = "default_format_version")]
    format_version: u32,
    scene_id: String,
    camera_id: String,
    checker: Vec<[f64; 3]>,
    illumination: IlluminationMeasurement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exposure_tag: Option<String>,
}

fn default_format_version() -> u32 {
    1
}

impl SceneRecord {
    pub fn to_json(&self) -> Result<String> {
        let file = SceneFile {
            format_version: 1,
            scene_id: self.scene_id.clone(),
            camera_id: self.camera_id.clone(),
            checker: self.checker.patches().to_vec(),
            illumination: self.illumination.clone(),
            exposure_tag: self.exposure_tag.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        let checker = CheckerRaw::new(file.checker).map_err(|e| Error::Schema {
            context: format!("{context} (scene {}, camera {})", file.scene_id, file.camera_id),
            message: e.to_string(),
        })?;
        file.illumination.validate().map_err(|e| Error::Schema {
            context: format!("{context} (scene {}, camera {})", file.scene_id, file.camera_id),
            message: e.to_string(),
        })?;
        Ok(SceneRecord {
            scene_id: file.scene_id,
            camera_id: file.camera_id,
            checker,
            illumination: file.illumination,
            exposure_tag: file.exposure_tag,
        })
    }
}

/// Scenes plus camera profiles, with pairing by scene id.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub scenes: Vec<SceneRecord>,
    pub profiles: BTreeMap<String, CameraProfile>,
    /// scene_id -> indices of the two records sharing it, ordered by
    /// camera id. Scene ids captured by one camera only are absent.
    pub pairing: BTreeMap<String, (usize, usize)>,
}

impl Dataset {
    pub fn build(
        scenes: Vec<SceneRecord>,
        profiles: BTreeMap<String, CameraProfile>,
    ) -> Result<Self> {
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        let mut by_scene: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, record) in scenes.iter().enumerate() {
            if !profiles.contains_key(&record.camera_id) {
                return Err(Error::Dataset(format!(
                    "scene {} references unknown camera {}",
                    record.scene_id, record.camera_id
                )));
            }
            let key = (record.scene_id.clone(), record.camera_id.clone());
            if !seen.insert(key) {
                return Err(Error::Dataset(format!(
                    "duplicate record for scene {} camera {}",
                    record.scene_id, record.camera_id
                )));
            }
            by_scene.entry(record.scene_id.clone()).or_default().push(idx);
        }
        let mut pairing = BTreeMap::new();
        for (scene_id, mut indices) in by_scene {
            if indices.len() == 2 {
                indices.sort_by(|a, b| scenes[*a].camera_id.cmp(&scenes[*b].camera_id));
                pairing.insert(scene_id, (indices[0], indices[1]));
            }
        }
        Ok(Dataset {
            scenes,
            profiles,
            pairing,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn scene_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .scenes
            .iter()
            .map(|s| s.scene_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        ids.sort();
        ids
    }

    pub fn profile(&self, camera_id: &str) -> Result<&CameraProfile> {
        self.profiles
            .get(camera_id)
            .ok_or_else(|| Error::Dataset(format!("no profile for camera {camera_id}")))
    }

    pub fn records_for_camera(&self, camera_id: &str) -> Vec<&SceneRecord> {
        self.scenes
            .iter()
            .filter(|s| s.camera_id == camera_id)
            .collect()
    }

    /// Paired records oriented as (source, target) for the given cameras.
    pub fn paired_records(
        &self,
        source_camera: &str,
        target_camera: &str,
    ) -> Vec<(&SceneRecord, &SceneRecord)> {
        let mut out = Vec::new();
        for (a, b) in self.pairing.values() {
            let (ra, rb) = (&self.scenes[*a], &self.scenes[*b]);
            if ra.camera_id == source_camera && rb.camera_id == target_camera {
                out.push((ra, rb));
            } else if rb.camera_id == source_camera && ra.camera_id == target_camera {
                out.push((rb, ra));
            }
        }
        out.sort_by(|x, y| x.0.scene_id.cmp(&y.0.scene_id));
        out
    }

    /// Restrict to the given scene ids (profiles are kept).
    pub fn subset(&self, ids: &BTreeSet<String>) -> Result<Dataset> {
        let scenes = self
            .scenes
            .iter()
            .filter(|s| ids.contains(&s.scene_id))
            .cloned()
            .collect();
        Dataset::build(scenes, self.profiles.clone())
    }

    /// The camera ids present, sorted.
    pub fn camera_ids(&self) -> Vec<String> {
        self.profiles.keys().cloned().collect()
    }
}

/// Scene-id lists for a train/val/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIds {
    #[serde(default = "default_format_version")]
    pub format_version: u32,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Datasets for a train/val/test partition.
#[derive(Debug, Clone)]
pub struct SplitDatasets {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

/// Partition scenes by scene id with a seeded shuffle. Paired records never
/// straddle splits because the split unit is the scene id.
pub fn deterministic_split(
    dataset: &Dataset,
    fractions: [f64; 3],
    seed: u64,
) -> Result<SplitDatasets> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 || fractions.iter().any(|f| *f < 0.0) {
        return Err(Error::InvalidConfig(format!(
            "split fractions {fractions:?} must be nonnegative and sum to 1"
        )));
    }
    let mut ids = dataset.scene_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n = ids.len() as f64;
    let cut1 = (fractions[0] * n).round() as usize;
    let cut2 = ((fractions[0] + fractions[1]) * n).round() as usize;
    let split = SplitIds {
        format_version: 1,
        train: ids[..cut1.min(ids.len())].to_vec(),
        val: ids[cut1.min(ids.len())..cut2.min(ids.len())].to_vec(),
        test: ids[cut2.min(ids.len())..].to_vec(),
    };
    apply_split(dataset, &split)
}

/// Materialize split datasets from explicit scene-id lists.
pub fn apply_split(dataset: &Dataset, split: &SplitIds) -> Result<SplitDatasets> {
    let as_set = |ids: &[String]| ids.iter().cloned().collect::<BTreeSet<_>>();
    Ok(SplitDatasets {
        train: dataset.subset(&as_set(&split.train))?,
        val: dataset.subset(&as_set(&split.val))?,
        test: dataset.subset(&as_set(&split.test))?,
    })
}

/// Load a dataset directory (`profiles/*.json`, `scenes/*.json`).
pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let mut profiles = BTreeMap::new();
    let profiles_dir = dir.join("profiles");
    if profiles_dir.is_dir() {
        for path in sorted_json_files(&profiles_dir)? {
            let text = fs::read_to_string(&path)?;
            let profile = CameraProfile::from_json(&text).map_err(|e| Error::Schema {
                context: path.display().to_string(),
                message: e.to_string(),
            })?;
            if profiles
                .insert(profile.camera_id.clone(), profile)
                .is_some()
            {
                return Err(Error::Dataset(format!(
                    "duplicate camera profile in {}",
                    path.display()
                )));
            }
        }
    }
    let mut scenes = Vec::new();
    let scenes_dir = dir.join("scenes");
    if scenes_dir.is_dir() {
        for path in sorted_json_files(&scenes_dir)? {
            let text = fs::read_to_string(&path)?;
            scenes.push(SceneRecord::from_json(
                &text,
                &path.display().to_string(),
            )?);
        }
    }
    Dataset::build(scenes, profiles)
}

/// Write a dataset directory in the layout `load_dataset` expects.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    let profiles_dir = dir.join("profiles");
    let scenes_dir = dir.join("scenes");
    fs::create_dir_all(&profiles_dir)?;
    fs::create_dir_all(&scenes_dir)?;
    for profile in dataset.profiles.values() {
        fs::write(
            profiles_dir.join(format!("{}.json", profile.camera_id)),
            profile.to_json()?,
        )?;
    }
    for scene in &dataset.scenes {
        fs::write(
            scenes_dir.join(format!("{}__{}.json", scene.scene_id, scene.camera_id)),
            scene.to_json()?,
        )?;
    }
    Ok(())
}

fn sorted_json_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "json").unwrap_or(false))
        .collect();
    files.sort();
    Ok(files)
}
