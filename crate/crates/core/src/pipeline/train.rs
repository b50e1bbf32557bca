//! Training configuration, scene preparation, and the epoch loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::colorimetry::interpolate_ccm;
use crate::data::{Dataset, SceneRecord};
use crate::error::{Error, Result};
use crate::illumination::{gray_world, spd_from_spectrometer, IlluminationMeasurement};
use crate::npm::{normalize_by_neutral8, CameraSide, CheckerRaw, NpmParameters};
use crate::pipeline::grads::{batch_loss, loss_gradients, PreparedIllum, PreparedScene};
use crate::pipeline::optim::{adam_step, OptimizerState, PlateauScheduler};
use crate::spectral::{spectrum_from_samples, SpectralGrid};

/// Which scenes feed the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// Both cameras per scene: two simulation losses plus the matching loss.
    Paired,
    /// Source-camera scenes only, simulation loss only.
    UnpairedSource,
    /// Target-camera scenes only, simulation loss only.
    UnpairedTarget,
}

/// Where the per-scene illumination comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IlluminationSource {
    /// Use each record's stored measurement as-is.
    Recorded,
    /// Ignore the stored measurement and run gray world over the source
    /// camera's checker patches (3-channel color constancy).
    GrayWorldFromChecker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Weight of the L1 term in both losses.
    pub l1_weight: f64,
    pub plateau_factor: f64,
    pub plateau_patience: usize,
    pub min_lr: f64,
    pub seed: u64,
    pub illumination_source: IlluminationSource,
    /// Camera roles; default to the two profile ids in sorted order.
    pub source_camera: Option<String>,
    pub target_camera: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::Paired,
            learning_rate: 0.01,
            batch_size: 4,
            max_epochs: 100,
            l1_weight: 1.0,
            plateau_factor: 0.5,
            plateau_patience: 10,
            min_lr: 1e-4,
            seed: 0,
            illumination_source: IlluminationSource::Recorded,
            source_camera: None,
            target_camera: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if self.l1_weight < 0.0 {
            return Err(Error::InvalidConfig("l1_weight must be >= 0".into()));
        }
        if !(0.0 < self.plateau_factor && self.plateau_factor <= 1.0) {
            return Err(Error::InvalidConfig(
                "plateau_factor must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Resolve source/target camera ids against a dataset.
    pub fn cameras(&self, dataset: &Dataset) -> Result<(String, String)> {
        match (&self.source_camera, &self.target_camera) {
            (Some(s), Some(t)) => {
                if s == t {
                    return Err(Error::InvalidConfig(
                        "source and target camera must differ".into(),
                    ));
                }
                Ok((s.clone(), t.clone()))
            }
            (None, None) => {
                let ids = dataset.camera_ids();
                if ids.len() != 2 {
                    return Err(Error::InvalidConfig(format!(
                        "dataset has {} cameras; set source_camera/target_camera explicitly",
                        ids.len()
                    )));
                }
                Ok((ids[0].clone(), ids[1].clone()))
            }
            _ => Err(Error::InvalidConfig(
                "set both source_camera and target_camera or neither".into(),
            )),
        }
    }
}

/// Resolve a record's illumination into the trainable form.
pub fn resolve_illumination(
    source_record: &SceneRecord,
    illum_source: IlluminationSource,
    grid: &SpectralGrid,
) -> Result<PreparedIllum> {
    match illum_source {
        IlluminationSource::GrayWorldFromChecker => {
            let means = checker_channel_means(&source_record.checker);
            Ok(PreparedIllum::Recover(
                gray_world(&means)?.values().to_vec(),
            ))
        }
        IlluminationSource::Recorded => match &source_record.illumination {
            IlluminationMeasurement::SpectrometerSpd {
                wavelengths_nm,
                values,
            } => {
                let s = spectrum_from_samples(wavelengths_nm, values)?;
                Ok(PreparedIllum::Fixed(spd_from_spectrometer(&s, grid)?))
            }
            IlluminationMeasurement::WhitePoint { values } => Ok(PreparedIllum::Recover(
                gray_world_normalized_rgb(values)?,
            )),
            IlluminationMeasurement::RgbImageStats { values } => Ok(PreparedIllum::Recover(
                gray_world(values)?.values().to_vec(),
            )),
            IlluminationMeasurement::MultispectralVector { values } => Ok(
                PreparedIllum::Recover(gray_world(values)?.values().to_vec()),
            ),
        },
    }
}

fn gray_world_normalized_rgb(values: &[f64; 3]) -> Result<Vec<f64>> {
    let wp = crate::illumination::WhitePoint::rgb(*values)?;
    Ok(wp.values().to_vec())
}

fn checker_channel_means(checker: &CheckerRaw) -> [f64; 3] {
    let mut sums = [0.0; 3];
    for p in checker.patches() {
        for c in 0..3 {
            sums[c] += p[c];
        }
    }
    let n = checker.patches().len() as f64;
    [sums[0] / n, sums[1] / n, sums[2] / n]
}

/// RGB white point used to interpolate the target camera's CCM for a
/// scene: the measurement-derived white point when the measurement is an
/// RGB observation, otherwise the measured target checker's Neutral 8.
fn ccm_white_point(
    illum: &PreparedIllum,
    source_record: &SceneRecord,
    target_n: &CheckerRaw,
    illum_source: IlluminationSource,
) -> [f64; 3] {
    if illum_source == IlluminationSource::Recorded {
        if let IlluminationMeasurement::SpectrometerSpd { .. }
        | IlluminationMeasurement::MultispectralVector { .. } = source_record.illumination
        {
            return target_n.neutral8();
        }
    }
    match illum {
        PreparedIllum::Recover(wp) if wp.len() == 3 => [wp[0], wp[1], wp[2]],
        _ => target_n.neutral8(),
    }
}

/// Build the training scenes for a dataset under the given mode.
pub fn prepare_scenes(
    dataset: &Dataset,
    config: &TrainConfig,
    grid: &SpectralGrid,
) -> Result<Vec<PreparedScene>> {
    let (source_cam, target_cam) = config.cameras(dataset)?;
    let mut scenes = Vec::new();
    match config.mode {
        TrainMode::Paired => {
            for (src, tgt) in dataset.paired_records(&source_cam, &target_cam) {
                let source_n = normalize_by_neutral8(&src.checker)?;
                let target_n = normalize_by_neutral8(&tgt.checker)?;
                let illum = resolve_illumination(src, config.illumination_source, grid)?;
                let wp = ccm_white_point(&illum, src, &target_n, config.illumination_source);
                let ccm = interpolate_ccm(dataset.profile(&target_cam)?, wp)?;
                scenes.push(PreparedScene::Paired {
                    scene_id: src.scene_id.clone(),
                    illum,
                    source_n,
                    target_n,
                    ccm,
                });
            }
            if scenes.is_empty() {
                return Err(Error::NoPairedScenes(source_cam, target_cam));
            }
        }
        TrainMode::UnpairedSource | TrainMode::UnpairedTarget => {
            let (camera, side) = if config.mode == TrainMode::UnpairedSource {
                (&source_cam, CameraSide::Source)
            } else {
                (&target_cam, CameraSide::Target)
            };
            for record in dataset.records_for_camera(camera) {
                let checker_n = normalize_by_neutral8(&record.checker)?;
                let illum = resolve_illumination(record, config.illumination_source, grid)?;
                scenes.push(PreparedScene::Single {
                    scene_id: record.scene_id.clone(),
                    illum,
                    side,
                    checker_n,
                });
            }
            if scenes.is_empty() {
                return Err(Error::EmptyDataset);
            }
        }
    }
    Ok(scenes)
}

/// Per-epoch record for the loss history CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

/// Training result: the best-validation parameters, the final state, and
/// the loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NpmParameters,
    pub final_params: NpmParameters,
    pub history: Vec<EpochStats>,
    pub initial_train_loss: f64,
    pub initial_val_loss: f64,
}

impl TrainOutcome {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,lr\n");
        for row in &self.history {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.epoch, row.train_loss, row.val_loss, row.lr
            ));
        }
        out
    }
}

/// Run seeded mini-batch training with Adam, projection, and the plateau
/// schedule. Returns the parameters with the best validation loss seen
/// (the initial parameters count as epoch-zero candidates).
pub fn train(
    train_set: &Dataset,
    val_set: &Dataset,
    config: &TrainConfig,
    init: NpmParameters,
) -> Result<TrainOutcome> {
    config.validate()?;
    let grid = init.grid;
    let train_scenes = prepare_scenes(train_set, config, &grid)?;
    let val_scenes = if val_set.is_empty() {
        Vec::new()
    } else {
        prepare_scenes(val_set, config, &grid)?
    };

    let mut params = init;
    let initial_train_loss = batch_loss(&params, &train_scenes, config.l1_weight)?;
    let initial_val_loss = if val_scenes.is_empty() {
        initial_train_loss
    } else {
        batch_loss(&params, &val_scenes, config.l1_weight)?
    };

    let mut best_val = initial_val_loss;
    let mut best_params = params.clone();
    let mut state = OptimizerState::new(&params);
    let mut scheduler = PlateauScheduler::new(
        config.learning_rate,
        config.plateau_factor,
        config.plateau_patience,
        config.min_lr,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::with_capacity(config.max_epochs);
    let mut order: Vec<usize> = (0..train_scenes.len()).collect();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let lr = scheduler.lr();
        let mut loss_sum = 0.0;
        let mut counted = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<PreparedScene> =
                chunk.iter().map(|i| train_scenes[*i].clone()).collect();
            match loss_gradients(&params, &batch, config.l1_weight) {
                Ok((loss, grads)) => {
                    adam_step(&mut state, &mut params, &grads, lr)?;
                    loss_sum += loss * batch.len() as f64;
                    counted += batch.len();
                }
                Err(Error::RankDeficient(msg)) => {
                    log::warn!("epoch {epoch}: skipping batch with singular solve: {msg}");
                }
                Err(e) => return Err(e),
            }
        }
        let train_loss = if counted > 0 {
            loss_sum / counted as f64
        } else {
            f64::NAN
        };
        let val_loss = if val_scenes.is_empty() {
            train_loss
        } else {
            batch_loss(&params, &val_scenes, config.l1_weight)?
        };
        if val_loss < best_val {
            best_val = val_loss;
            best_params = params.clone();
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
        scheduler.step(val_loss);
    }

    Ok(TrainOutcome {
        params: best_params,
        final_params: params,
        history,
        initial_train_loss,
        initial_val_loss,
    })
}
