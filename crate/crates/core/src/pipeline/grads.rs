//! Differentiable loss graphs over the model parameters.
//!
//! Each scene contributes either a single-camera simulation loss or the
//! full paired objective (both simulation losses plus the matching loss).
//! Gradients flow through the illumination recovery, the image formation
//! model, the Neutral-8 normalization, and the closed-form least-squares
//! solve. A plain (tape-free) evaluation of the identical arithmetic backs
//! validation passes and the finite-difference oracle.

use crate::colorimetry::ColorCorrectionMatrix;
use crate::error::{Error, Result};
use crate::illumination::SPD_FLOOR;
use crate::math::{Mat3, Matrix};
use crate::npm::{
    estimate_transform_from_patches, simulate_checker, CameraSide, CheckerRaw, NpmParameters,
    GREEN, NEUTRAL8_INDEX, NUM_PATCHES,
};
use crate::pipeline::losses::{angular_l1_loss, angular_mask};
use crate::pipeline::tape::{Tape, Var};
use crate::spectral::Spectrum;

/// Guard for the simulated Neutral-8 green anchor; below this the
/// normalization is considered degenerate and stops passing gradient.
const NEUTRAL8_FLOOR: f64 = 1e-9;

/// Norm guard squared, matching `losses::angular_l1_loss`.
const NORM_FLOOR_SQ: f64 = 1e-24;

/// Gradients per learnable tensor.
#[derive(Debug, Clone)]
pub struct ParamGrads {
    pub s_source: Matrix,
    pub s_target: Matrix,
    pub reflectances: Matrix,
    pub recovery: Option<Matrix>,
}

impl ParamGrads {
    pub fn zeros_like(params: &NpmParameters) -> Self {
        ParamGrads {
            s_source: Matrix::zeros(params.s_source.rows(), params.s_source.cols()),
            s_target: Matrix::zeros(params.s_target.rows(), params.s_target.cols()),
            reflectances: Matrix::zeros(params.reflectances.rows(), params.reflectances.cols()),
            recovery: params
                .recovery
                .as_ref()
                .map(|r| Matrix::zeros(r.matrix().rows(), r.matrix().cols())),
        }
    }

    fn accumulate(&mut self, other: &ParamGrads, scale: f64) {
        let acc = |dst: &mut Matrix, src: &Matrix| {
            for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
                *d += s * scale;
            }
        };
        acc(&mut self.s_source, &other.s_source);
        acc(&mut self.s_target, &other.s_target);
        acc(&mut self.reflectances, &other.reflectances);
        if let (Some(d), Some(s)) = (self.recovery.as_mut(), other.recovery.as_ref()) {
            acc(d, s);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.s_source.is_finite()
            && self.s_target.is_finite()
            && self.reflectances.is_finite()
            && self.recovery.as_ref().map(|r| r.is_finite()).unwrap_or(true)
    }

    pub fn max_abs(&self) -> f64 {
        let m = |mat: &Matrix| {
            mat.data()
                .iter()
                .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        };
        m(&self.s_source)
            .max(m(&self.s_target))
            .max(m(&self.reflectances))
            .max(self.recovery.as_ref().map(&m).unwrap_or(0.0))
    }
}

/// Illumination input for one scene, resolved at preparation time.
#[derive(Debug, Clone)]
pub enum PreparedIllum {
    /// Spectrometer path: the SPD is data, no gradient flows into it.
    Fixed(Spectrum),
    /// White-point path: the SPD is `recovery * wp`, so the recovery
    /// matrix learns from this scene.
    Recover(Vec<f64>),
}

/// One training scene with measured checkers already Neutral-8 normalized.
#[derive(Debug, Clone)]
pub enum PreparedScene {
    Paired {
        scene_id: String,
        illum: PreparedIllum,
        source_n: CheckerRaw,
        target_n: CheckerRaw,
        /// Target camera CCM interpolated at the scene's illuminant.
        ccm: ColorCorrectionMatrix,
    },
    Single {
        scene_id: String,
        illum: PreparedIllum,
        side: CameraSide,
        checker_n: CheckerRaw,
    },
}

impl PreparedScene {
    pub fn scene_id(&self) -> &str {
        match self {
            PreparedScene::Paired { scene_id, .. } => scene_id,
            PreparedScene::Single { scene_id, .. } => scene_id,
        }
    }
}

// ---------------------------------------------------------------------
// Plain (tape-free) loss path
// ---------------------------------------------------------------------

fn resolve_spd(params: &NpmParameters, illum: &PreparedIllum) -> Result<Spectrum> {
    match illum {
        PreparedIllum::Fixed(s) => Ok(s.clone()),
        PreparedIllum::Recover(wp) => {
            let rec = params
                .recovery
                .as_ref()
                .ok_or(Error::MissingRecovery("white-point training scene"))?;
            let raw = rec.matrix().mul_vec(wp)?;
            Spectrum::new(params.grid, raw.iter().map(|v| v.max(SPD_FLOOR)).collect())
        }
    }
}

/// Neutral-8 normalization with the same floor guard the graph uses.
fn normalize_sim(patches: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let anchor = patches[NEUTRAL8_INDEX][GREEN].max(NEUTRAL8_FLOOR);
    patches
        .iter()
        .map(|p| [p[0] / anchor, p[1] / anchor, p[2] / anchor])
        .collect()
}

fn sim_loss_plain(
    params: &NpmParameters,
    side: CameraSide,
    spd: &Spectrum,
    measured_n: &CheckerRaw,
    w: f64,
) -> Result<(f64, Vec<[f64; 3]>)> {
    let sim = simulate_checker(params, side, spd)?;
    let sim_n = normalize_sim(sim.patches());
    let (loss, _) = angular_l1_loss(&sim_n, measured_n.patches(), w);
    Ok((loss, sim_n))
}

/// Total loss of one scene under the current parameters, on the plain path.
pub fn scene_loss(params: &NpmParameters, scene: &PreparedScene, w: f64) -> Result<f64> {
    match scene {
        PreparedScene::Single {
            illum,
            side,
            checker_n,
            ..
        } => {
            let spd = resolve_spd(params, illum)?;
            Ok(sim_loss_plain(params, *side, &spd, checker_n, w)?.0)
        }
        PreparedScene::Paired {
            illum,
            source_n,
            target_n,
            ccm,
            ..
        } => {
            let spd = resolve_spd(params, illum)?;
            let (loss_s, sim_s_n) = sim_loss_plain(params, CameraSide::Source, &spd, source_n, w)?;
            let (loss_t, sim_t_n) = sim_loss_plain(params, CameraSide::Target, &spd, target_n, w)?;
            let f = estimate_transform_from_patches(&sim_s_n, &sim_t_n)?;
            let c = ccm.matrix();
            let mapped: Vec<[f64; 3]> = source_n
                .patches()
                .iter()
                .map(|p| c.mul_vec(f.apply(*p)))
                .collect();
            let target_xyz: Vec<[f64; 3]> = target_n
                .patches()
                .iter()
                .map(|p| c.mul_vec(*p))
                .collect();
            let (loss_m, _) = angular_l1_loss(&mapped, &target_xyz, w);
            Ok(loss_s + loss_t + loss_m)
        }
    }
}

/// Mean scene loss over a batch, plain path.
pub fn batch_loss(params: &NpmParameters, batch: &[PreparedScene], w: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    for scene in batch {
        total += scene_loss(params, scene, w)?;
    }
    Ok(total / batch.len() as f64)
}

// ---------------------------------------------------------------------
// Tape graph
// ---------------------------------------------------------------------

struct ParamLeaves {
    s_source: Var,
    s_target: Var,
    reflectances: Var,
    recovery: Option<Var>,
}

fn param_leaves(tape: &mut Tape, params: &NpmParameters) -> Result<ParamLeaves> {
    let n = params.grid.n_bins;
    Ok(ParamLeaves {
        s_source: tape.leaf(3, n, params.s_source.data().to_vec())?,
        s_target: tape.leaf(3, n, params.s_target.data().to_vec())?,
        reflectances: tape.leaf(NUM_PATCHES, n, params.reflectances.data().to_vec())?,
        recovery: match params.recovery.as_ref() {
            Some(r) => Some(tape.leaf(
                r.matrix().rows(),
                r.matrix().cols(),
                r.matrix().data().to_vec(),
            )?),
            None => None,
        },
    })
}

fn spd_var(
    tape: &mut Tape,
    leaves: &ParamLeaves,
    params: &NpmParameters,
    illum: &PreparedIllum,
) -> Result<Var> {
    match illum {
        PreparedIllum::Fixed(s) => tape.leaf(params.grid.n_bins, 1, s.values().to_vec()),
        PreparedIllum::Recover(wp) => {
            let rec = leaves
                .recovery
                .ok_or(Error::MissingRecovery("white-point training scene"))?;
            if tape.shape(rec).1 != wp.len() {
                return Err(Error::DimensionMismatch(format!(
                    "white point has {} channels, recovery expects {}",
                    wp.len(),
                    tape.shape(rec).1
                )));
            }
            let wp_leaf = tape.leaf(wp.len(), 1, wp.clone())?;
            let raw = tape.matmul(rec, wp_leaf)?;
            Ok(tape.clamp_min(raw, SPD_FLOOR))
        }
    }
}

fn sim_normalized_var(
    tape: &mut Tape,
    leaves: &ParamLeaves,
    side: CameraSide,
    spd: Var,
) -> Result<Var> {
    let s = match side {
        CameraSide::Source => leaves.s_source,
        CameraSide::Target => leaves.s_target,
    };
    let weighted = tape.row_scale(leaves.reflectances, spd)?;
    let st = tape.transpose(s);
    let sim = tape.matmul(weighted, st)?;
    let anchor = tape.index(sim, NEUTRAL8_INDEX * 3 + GREEN)?;
    let guarded = tape.clamp_min(anchor, NEUTRAL8_FLOOR);
    let inv = tape.recip(guarded);
    tape.scale_var(sim, inv)
}

/// Angular + L1 loss between a variable k x 3 tensor and constant patches.
fn angular_l1_var(tape: &mut Tape, sim: Var, meas: &[[f64; 3]], w: f64) -> Result<Var> {
    let k = meas.len();
    let mask = angular_mask(meas);
    let included = mask.iter().filter(|m| **m).count();

    let meas_flat: Vec<f64> = meas.iter().flatten().copied().collect();
    let meas_leaf = tape.leaf(k, 3, meas_flat)?;

    let diff = tape.sub(sim, meas_leaf)?;
    let absd = tape.abs(diff);
    let l1_sum = tape.sum(absd);
    let l1 = tape.scale_const(l1_sum, w / k as f64);

    let uv = tape.mul(sim, meas_leaf)?;
    let dots = tape.row_sum(uv);
    let uu = tape.mul(sim, sim)?;
    let nu2 = tape.row_sum(uu);
    let nu2c = tape.clamp_min(nu2, NORM_FLOOR_SQ);
    let nu = tape.sqrt(nu2c);
    let nv: Vec<f64> = meas
        .iter()
        .map(|p| {
            (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
                .max(NORM_FLOOR_SQ)
                .sqrt()
        })
        .collect();
    let nv_leaf = tape.leaf(k, 1, nv)?;
    let denom = tape.mul(nu, nv_leaf)?;
    let cos = tape.div(dots, denom)?;
    let ang = tape.acos_clamped(cos);
    let mask_vals: Vec<f64> = mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let mask_leaf = tape.leaf(k, 1, mask_vals)?;
    let masked = tape.mul(ang, mask_leaf)?;
    let ang_sum = tape.sum(masked);
    let ang_mean = tape.scale_const(
        ang_sum,
        if included > 0 {
            1.0 / included as f64
        } else {
            0.0
        },
    );
    tape.add(ang_mean, l1)
}

/// Gram-matrix conditioning guard shared with `estimate_transform`.
fn check_gram_condition(tape: &Tape, gram: Var) -> Result<()> {
    let m = Mat3::from_row_major(tape.value(gram))?;
    let cond = m.condition_estimate();
    if cond > 1e12 {
        return Err(Error::RankDeficient(format!(
            "simulated source Gram condition estimate {cond:.3e}"
        )));
    }
    Ok(())
}

/// Build the full loss graph for one scene and return the scalar output.
fn scene_graph(
    tape: &mut Tape,
    leaves: &ParamLeaves,
    params: &NpmParameters,
    scene: &PreparedScene,
    w: f64,
) -> Result<Var> {
    match scene {
        PreparedScene::Single {
            illum,
            side,
            checker_n,
            ..
        } => {
            let spd = spd_var(tape, leaves, params, illum)?;
            let sim_n = sim_normalized_var(tape, leaves, *side, spd)?;
            angular_l1_var(tape, sim_n, checker_n.patches(), w)
        }
        PreparedScene::Paired {
            illum,
            source_n,
            target_n,
            ccm,
            ..
        } => {
            let spd = spd_var(tape, leaves, params, illum)?;
            let sim_s = sim_normalized_var(tape, leaves, CameraSide::Source, spd)?;
            let sim_t = sim_normalized_var(tape, leaves, CameraSide::Target, spd)?;
            let loss_s = angular_l1_var(tape, sim_s, source_n.patches(), w)?;
            let loss_t = angular_l1_var(tape, sim_t, target_n.patches(), w)?;

            // F = (T^t S) (S^t S)^-1 with patches as rows.
            let s_t = tape.transpose(sim_s);
            let gram = tape.matmul(s_t, sim_s)?;
            check_gram_condition(tape, gram)?;
            let t_t = tape.transpose(sim_t);
            let tst = tape.matmul(t_t, sim_s)?;
            let gram_inv = tape.inverse3(gram)?;
            let f = tape.matmul(tst, gram_inv)?;

            let ccm_leaf = tape.leaf(3, 3, ccm.matrix().to_row_major().to_vec())?;
            let cf = tape.matmul(ccm_leaf, f)?;
            let cft = tape.transpose(cf);
            let src_leaf = tape.leaf(
                NUM_PATCHES,
                3,
                source_n.patches().iter().flatten().copied().collect(),
            )?;
            let mapped = tape.matmul(src_leaf, cft)?;
            let target_xyz: Vec<[f64; 3]> = target_n
                .patches()
                .iter()
                .map(|p| ccm.matrix().mul_vec(*p))
                .collect();
            let loss_m = angular_l1_var(tape, mapped, &target_xyz, w)?;

            let partial = tape.add(loss_s, loss_t)?;
            tape.add(partial, loss_m)
        }
    }
}

/// Forward value of the differentiable graph for one scene (test hook for
/// cross-checking the two loss paths).
pub fn scene_graph_loss(params: &NpmParameters, scene: &PreparedScene, w: f64) -> Result<f64> {
    let mut tape = Tape::new();
    let leaves = param_leaves(&mut tape, params)?;
    let out = scene_graph(&mut tape, &leaves, params, scene, w)?;
    Ok(tape.scalar(out))
}

/// Exact gradients of the batch-mean loss with respect to every learnable
/// tensor, plus the loss value itself.
pub fn loss_gradients(
    params: &NpmParameters,
    batch: &[PreparedScene],
    w: f64,
) -> Result<(f64, ParamGrads)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total_loss = 0.0;
    let mut grads = ParamGrads::zeros_like(params);
    for scene in batch {
        let mut tape = Tape::new();
        let leaves = param_leaves(&mut tape, params)?;
        let out = scene_graph(&mut tape, &leaves, params, scene, w)?;
        total_loss += tape.scalar(out) * scale;
        let node_grads = tape.backward(out)?;
        let scene_grads = ParamGrads {
            s_source: Matrix::from_vec(
                3,
                params.grid.n_bins,
                node_grads.get(leaves.s_source).to_vec(),
            )?,
            s_target: Matrix::from_vec(
                3,
                params.grid.n_bins,
                node_grads.get(leaves.s_target).to_vec(),
            )?,
            reflectances: Matrix::from_vec(
                NUM_PATCHES,
                params.grid.n_bins,
                node_grads.get(leaves.reflectances).to_vec(),
            )?,
            recovery: match (leaves.recovery, params.recovery.as_ref()) {
                (Some(v), Some(r)) => Some(Matrix::from_vec(
                    r.matrix().rows(),
                    r.matrix().cols(),
                    node_grads.get(v).to_vec(),
                )?),
                _ => None,
            },
        };
        grads.accumulate(&scene_grads, scale);
    }
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient("batch gradient".into()));
    }
    Ok((total_loss, grads))
}
