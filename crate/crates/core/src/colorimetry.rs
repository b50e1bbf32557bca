//! Color-space conversions, angular error, CIEDE2000, chromaticity, CCT
//! estimation, and color correction matrix interpolation.
//!
//! Conventions: XYZ tristimulus values are relative (a perfect reflector
//! under the scene illuminant has whatever scale the CCM produces; Lab
//! conversion renormalizes against an explicit white). All hue math in the
//! CIEDE2000 implementation follows the standard formulation with
//! kL = kC = kH = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{dot, norm, Mat3, Matrix};
use crate::spectral::{resample_spectrum, SpectralGrid, Spectrum};

mod observer;
pub use observer::{CIE_XBAR, CIE_YBAR, CIE_ZBAR};

/// CIE XYZ tristimulus values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyzColor {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl XyzColor {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        XyzColor { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// CIE 1976 L*a*b* coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// 3x3 matrix mapping camera raw RGB to XYZ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorCorrectionMatrix {
    m: Mat3,
}

impl ColorCorrectionMatrix {
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::DegenerateColor("CCM entries must be finite".into()));
        }
        if m.det().abs() <= 1e-12 {
            return Err(Error::SingularMatrix(
                "color correction matrix is not invertible".into(),
            ));
        }
        Ok(ColorCorrectionMatrix { m })
    }

    pub fn identity() -> Self {
        ColorCorrectionMatrix { m: Mat3::IDENTITY }
    }

    pub fn from_row_major(v: &[f64]) -> Result<Self> {
        ColorCorrectionMatrix::new(Mat3::from_row_major(v)?)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }
}

/// Per-camera color metadata: the two reference CCMs plus an optional
/// measured spectral sensitivity.
#[derive(Debug, Clone)]
pub struct CameraProfile {
    pub camera_id: String,
    pub ccm_d65: ColorCorrectionMatrix,
    pub ccm_a: ColorCorrectionMatrix,
    pub measured_sensitivity: Option<Matrix>,
    pub grid: Option<SpectralGrid>,
}

#[derive(Serialize, Deserialize)]
struct CameraProfileFile {
    camera_id: String,
    ccm_d65: Vec<f64>,
    ccm_a: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sensitivity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<SpectralGrid>,
}

impl CameraProfile {
    pub fn new(
        camera_id: impl Into<String>,
        ccm_d65: ColorCorrectionMatrix,
        ccm_a: ColorCorrectionMatrix,
    ) -> Self {
        CameraProfile {
            camera_id: camera_id.into(),
            ccm_d65,
            ccm_a,
            measured_sensitivity: None,
            grid: None,
        }
    }

    pub fn with_sensitivity(mut self, sensitivity: Matrix, grid: SpectralGrid) -> Result<Self> {
        if sensitivity.rows() != 3 || sensitivity.cols() != grid.n_bins {
            return Err(Error::DimensionMismatch(format!(
                "sensitivity must be 3x{}, got {}x{}",
                grid.n_bins,
                sensitivity.rows(),
                sensitivity.cols()
            )));
        }
        if sensitivity.data().iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::DegenerateColor(
                "sensitivity entries must be finite and nonnegative".into(),
            ));
        }
        self.measured_sensitivity = Some(sensitivity);
        self.grid = Some(grid);
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CameraProfileFile {
            camera_id: self.camera_id.clone(),
            ccm_d65: self.ccm_d65.matrix().to_row_major().to_vec(),
            ccm_a: self.ccm_a.matrix().to_row_major().to_vec(),
            sensitivity: self.measured_sensitivity.as_ref().map(|m| m.data().to_vec()),
            grid: self.grid,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CameraProfileFile = serde_json::from_str(text)?;
        let mut profile = CameraProfile::new(
            file.camera_id,
            ColorCorrectionMatrix::from_row_major(&file.ccm_d65)?,
            ColorCorrectionMatrix::from_row_major(&file.ccm_a)?,
        );
        if let Some(sens) = file.sensitivity {
            let grid = file.grid.ok_or_else(|| Error::Schema {
                context: "camera profile".into(),
                message: "sensitivity given without a grid".into(),
            })?;
            if sens.len() % 3 != 0 {
                return Err(Error::Schema {
                    context: "camera profile".into(),
                    message: "sensitivity length must be a multiple of 3".into(),
                });
            }
            let cols = sens.len() / 3;
            profile = profile.with_sensitivity(Matrix::from_vec(3, cols, sens)?, grid)?;
        }
        Ok(profile)
    }
}

/// Angle between two vectors in degrees, in [0, 180].
pub fn angular_error(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "angular error between {}- and {}-vectors",
            u.len(),
            v.len()
        )));
    }
    let nu = norm(u);
    let nv = norm(v);
    if nu <= 0.0 || nv <= 0.0 {
        return Err(Error::DegenerateColor(
            "angular error of a zero-norm vector".into(),
        ));
    }
    let cos = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(cos.acos().to_degrees())
}

/// McCamy's cubic approximation for correlated color temperature from xy
/// chromaticity.
pub fn estimate_cct(x: f64, y: f64) -> Result<f64> {
    let denom = 0.1858 - y;
    if denom.abs() < 1e-9 {
        return Err(Error::DegenerateColor(format!(
            "chromaticity y={y} too close to the McCamy pole"
        )));
    }
    let n = (x - 0.3320) / denom;
    Ok(449.0 * n.powi(3) + 3525.0 * n.powi(2) + 6823.3 * n + 5520.33)
}

const CCT_A: f64 = 2856.0;
const CCT_D65: f64 = 6504.0;

/// Blend the two reference CCMs for a given correlated color temperature.
/// Interpolation is linear in inverse CCT (mired), clamped to the D65/A
/// anchor range.
pub fn blend_ccms(profile: &CameraProfile, cct: f64) -> Result<ColorCorrectionMatrix> {
    let cct = cct.max(1.0);
    let g = ((1.0 / cct - 1.0 / CCT_A) / (1.0 / CCT_D65 - 1.0 / CCT_A)).clamp(0.0, 1.0);
    let blended = profile
        .ccm_d65
        .matrix()
        .scale(g)
        .add(&profile.ccm_a.matrix().scale(1.0 - g));
    ColorCorrectionMatrix::new(blended)
}

/// Interpolate the camera's CCM at the illuminant described by a raw white
/// point. The CCT is estimated from the chromaticity of `ccm_d65 * wp`.
pub fn interpolate_ccm(profile: &CameraProfile, white_point: [f64; 3]) -> Result<ColorCorrectionMatrix> {
    if white_point[1] <= 0.0 || white_point.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateColor(format!(
            "white point {white_point:?} needs a positive green channel"
        )));
    }
    let xyz = raw_to_xyz(white_point, &profile.ccm_d65);
    let (x, y) = xyz_to_xy(&xyz)?;
    let cct = estimate_cct(x, y)?;
    blend_ccms(profile, cct)
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

/// CIE 1976 L*a*b* relative to an explicit reference white.
pub fn xyz_to_lab(c: &XyzColor, white: &XyzColor) -> Result<LabColor> {
    if white.x <= 0.0 || white.y <= 0.0 || white.z <= 0.0 {
        return Err(Error::DegenerateColor(format!(
            "reference white must be strictly positive, got {white:?}"
        )));
    }
    let fx = lab_f(c.x / white.x);
    let fy = lab_f(c.y / white.y);
    let fz = lab_f(c.z / white.z);
    Ok(LabColor {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    })
}

/// Analytic inverse of [`xyz_to_lab`].
pub fn lab_to_xyz(c: &LabColor, white: &XyzColor) -> Result<XyzColor> {
    if white.x <= 0.0 || white.y <= 0.0 || white.z <= 0.0 {
        return Err(Error::DegenerateColor(format!(
            "reference white must be strictly positive, got {white:?}"
        )));
    }
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    Ok(XyzColor {
        x: lab_f_inv(fx) * white.x,
        y: lab_f_inv(fy) * white.y,
        z: lab_f_inv(fz) * white.z,
    })
}

/// CIEDE2000 color difference with kL = kC = kH = 1.
pub fn ciede2000(p: &LabColor, q: &LabColor) -> f64 {
    const POW7_25: f64 = 6103515625.0; // 25^7

    let c1 = (p.a * p.a + p.b * p.b).sqrt();
    let c2 = (q.a * q.a + q.b * q.b).sqrt();
    let c_bar = 0.5 * (c1 + c2);
    let c_bar7 = c_bar.powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW7_25)).sqrt());

    let a1p = (1.0 + g) * p.a;
    let a2p = (1.0 + g) * q.a;
    let c1p = (a1p * a1p + p.b * p.b).sqrt();
    let c2p = (a2p * a2p + q.b * q.b).sqrt();

    let h1p = hue_deg(p.b, a1p);
    let h2p = hue_deg(q.b, a2p);

    let dl = q.l - p.l;
    let dc = c2p - c1p;

    let dh = if c1p * c2p == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh_big = 2.0 * (c1p * c2p).sqrt() * (dh.to_radians() / 2.0).sin();

    let l_bar = 0.5 * (p.l + q.l);
    let c_bar_p = 0.5 * (c1p + c2p);
    let h_bar = if c1p * c2p == 0.0 {
        h1p + h2p
    } else {
        let sum = h1p + h2p;
        if (h1p - h2p).abs() <= 180.0 {
            0.5 * sum
        } else if sum < 360.0 {
            0.5 * (sum + 360.0)
        } else {
            0.5 * (sum - 360.0)
        }
    };

    let t = 1.0 - 0.17 * (h_bar - 30.0).to_radians().cos()
        + 0.24 * (2.0 * h_bar).to_radians().cos()
        + 0.32 * (3.0 * h_bar + 6.0).to_radians().cos()
        - 0.20 * (4.0 * h_bar - 63.0).to_radians().cos();

    let d_theta = 30.0 * (-(((h_bar - 275.0) / 25.0).powi(2))).exp();
    let c_bar_p7 = c_bar_p.powi(7);
    let rc = 2.0 * (c_bar_p7 / (c_bar_p7 + POW7_25)).sqrt();
    let rt = -rc * (2.0 * d_theta).to_radians().sin();

    let lm50 = l_bar - 50.0;
    let sl = 1.0 + 0.015 * lm50 * lm50 / (20.0 + lm50 * lm50).sqrt();
    let sc = 1.0 + 0.045 * c_bar_p;
    let sh = 1.0 + 0.015 * c_bar_p * t;

    let tl = dl / sl;
    let tc = dc / sc;
    let th = dh_big / sh;
    (tl * tl + tc * tc + th * th + rt * tc * th).sqrt()
}

fn hue_deg(b: f64, a: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let h = b.atan2(a).to_degrees();
    if h < 0.0 {
        h + 360.0
    } else {
        h
    }
}

/// Project XYZ to xy chromaticity.
pub fn xyz_to_xy(c: &XyzColor) -> Result<(f64, f64)> {
    let s = c.x + c.y + c.z;
    if s <= 0.0 {
        return Err(Error::DegenerateColor(
            "xy chromaticity of a zero-sum color".into(),
        ));
    }
    Ok((c.x / s, c.y / s))
}

/// Map raw RGB to XYZ through a color correction matrix.
pub fn raw_to_xyz(rgb: [f64; 3], ccm: &ColorCorrectionMatrix) -> XyzColor {
    let v = ccm.matrix().mul_vec(rgb);
    XyzColor::new(v[0], v[1], v[2])
}

/// Tristimulus integral of a spectrum against the CIE 1931 2-degree
/// observer (resampled onto the spectrum's grid).
pub fn spectrum_xyz(s: &Spectrum) -> Result<XyzColor> {
    let obs_grid = SpectralGrid::default_visible();
    let table = |data: &[f64; 36]| -> Result<Vec<f64>> {
        let spec = Spectrum::new(obs_grid, data.to_vec())?;
        Ok(resample_spectrum(&spec, s.grid)?.values().to_vec())
    };
    let xbar = table(&CIE_XBAR)?;
    let ybar = table(&CIE_YBAR)?;
    let zbar = table(&CIE_ZBAR)?;
    let mut xyz = [0.0; 3];
    for (i, v) in s.values().iter().enumerate() {
        xyz[0] += xbar[i] * v;
        xyz[1] += ybar[i] * v;
        xyz[2] += zbar[i] * v;
    }
    let scale = s.grid.step_nm;
    Ok(XyzColor::new(xyz[0] * scale, xyz[1] * scale, xyz[2] * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::daylight_spd;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn angular_error_basics() {
        assert_relative_eq!(
            angular_error(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(),
            0.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            angular_error(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(),
            90.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(
            angular_error(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap(),
            45.0,
            epsilon = 1e-9
        );
        assert!(angular_error(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn mccamy_at_known_points() {
        let d65 = estimate_cct(0.3127, 0.3290).unwrap();
        assert!((d65 - 6508.0).abs() < 20.0, "got {d65}");
        let a = estimate_cct(0.4476, 0.4074).unwrap();
        assert!((a - 2856.0).abs() < 150.0, "got {a}");
        assert_eq!(
            estimate_cct(0.35, 0.36).unwrap(),
            estimate_cct(0.35, 0.36).unwrap()
        );
    }

    fn test_profile() -> CameraProfile {
        let d65 = ColorCorrectionMatrix::from_row_major(&[
            1.8, -0.6, -0.1, -0.3, 1.6, -0.2, 0.0, -0.5, 1.7,
        ])
        .unwrap();
        let a = ColorCorrectionMatrix::from_row_major(&[
            1.4, -0.2, -0.3, -0.2, 1.3, -0.1, 0.1, -0.7, 2.3,
        ])
        .unwrap();
        CameraProfile::new("cam", d65, a)
    }

    #[test]
    fn ccm_blend_endpoints_and_midpoint() {
        let profile = test_profile();
        let at_d65 = blend_ccms(&profile, 6504.0).unwrap();
        assert!(at_d65.matrix().max_abs_diff(profile.ccm_d65.matrix()) < 1e-12);
        let hot = blend_ccms(&profile, 20000.0).unwrap();
        assert!(hot.matrix().max_abs_diff(profile.ccm_d65.matrix()) < 1e-12);
        let at_a = blend_ccms(&profile, 2856.0).unwrap();
        assert!(at_a.matrix().max_abs_diff(profile.ccm_a.matrix()) < 1e-12);
        let cold = blend_ccms(&profile, 2000.0).unwrap();
        assert!(cold.matrix().max_abs_diff(profile.ccm_a.matrix()) < 1e-12);

        // The 4000 K weight from the inverse-CCT formula directly.
        let g = (1.0 / 4000.0 - 1.0 / 2856.0) / (1.0 / 6504.0 - 1.0 / 2856.0);
        assert!((g - 0.51).abs() < 0.01, "weight {g}");
        let mid = blend_ccms(&profile, 4000.0).unwrap();
        let expected = profile
            .ccm_d65
            .matrix()
            .scale(g)
            .add(&profile.ccm_a.matrix().scale(1.0 - g));
        assert!(mid.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn interpolated_ccm_is_convex_combination() {
        let profile = test_profile();
        // A warm-ish white point in the camera's raw space.
        let wp = [1.4, 1.0, 0.5];
        let ccm = interpolate_ccm(&profile, wp).unwrap();
        let d = profile.ccm_d65.matrix().0;
        let a = profile.ccm_a.matrix().0;
        for i in 0..3 {
            for j in 0..3 {
                let lo = d[i][j].min(a[i][j]) - 1e-12;
                let hi = d[i][j].max(a[i][j]) + 1e-12;
                let v = ccm.matrix().0[i][j];
                assert!(v >= lo && v <= hi, "entry ({i},{j}) = {v} outside [{lo},{hi}]");
            }
        }
    }

    #[test]
    fn lab_reference_points() {
        let white = XyzColor::new(0.9505, 1.0, 1.089);
        let lab = xyz_to_lab(&white, &white).unwrap();
        assert_relative_eq!(lab.l, 100.0, epsilon = 1e-9);
        assert_relative_eq!(lab.a, 0.0, epsilon = 1e-9);
        assert_relative_eq!(lab.b, 0.0, epsilon = 1e-9);

        let black = xyz_to_lab(&XyzColor::new(0.0, 0.0, 0.0), &white).unwrap();
        assert_relative_eq!(black.l, 0.0, epsilon = 1e-9);

        // f(1/8) = 0.5 since 0.5^3 = 0.125, so L = 116*0.5 - 16 = 42.
        let eighth = XyzColor::new(white.x / 8.0, white.y / 8.0, white.z / 8.0);
        let lab = xyz_to_lab(&eighth, &white).unwrap();
        assert_relative_eq!(lab.l, 42.0, epsilon = 1e-9);
        assert_relative_eq!(lab.a, 0.0, epsilon = 1e-9);
        assert_relative_eq!(lab.b, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn ciede2000_reference_pair() {
        let p = LabColor {
            l: 50.0,
            a: 2.6772,
            b: -79.7751,
        };
        let q = LabColor {
            l: 50.0,
            a: 0.0,
            b: -82.7485,
        };
        assert!((ciede2000(&p, &q) - 2.0425).abs() < 1e-4);
        assert_relative_eq!(ciede2000(&p, &p), 0.0);
    }

    #[test]
    fn xy_basics() {
        assert_eq!(
            xyz_to_xy(&XyzColor::new(1.0, 1.0, 1.0)).unwrap(),
            (1.0 / 3.0, 1.0 / 3.0)
        );
        assert_eq!(
            xyz_to_xy(&XyzColor::new(2.0, 2.0, 2.0)).unwrap(),
            (1.0 / 3.0, 1.0 / 3.0)
        );
        assert_eq!(xyz_to_xy(&XyzColor::new(1.0, 0.0, 0.0)).unwrap(), (1.0, 0.0));
        assert!(xyz_to_xy(&XyzColor::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn raw_to_xyz_is_the_matrix_product() {
        let id = ColorCorrectionMatrix::identity();
        let c = raw_to_xyz([0.3, 0.7, 0.2], &id);
        assert_eq!(c.as_array(), [0.3, 0.7, 0.2]);
        let zero = raw_to_xyz([0.0, 0.0, 0.0], &id);
        assert_eq!(zero.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn daylight_6504_hits_d65_chromaticity() {
        let spd = daylight_spd(6504.0, SpectralGrid::default_visible()).unwrap();
        let xyz = spectrum_xyz(&spd).unwrap();
        let (x, y) = xyz_to_xy(&xyz).unwrap();
        assert!((x - 0.3127).abs() < 0.003, "x = {x}");
        assert!((y - 0.3290).abs() < 0.003, "y = {y}");
    }

    #[test]
    fn profile_json_roundtrip() {
        let profile = test_profile();
        let text = profile.to_json().unwrap();
        let back = CameraProfile::from_json(&text).unwrap();
        assert_eq!(back.camera_id, "cam");
        assert!(back
            .ccm_d65
            .matrix()
            .max_abs_diff(profile.ccm_d65.matrix())
            < 1e-15);
    }

    proptest! {
        #[test]
        fn angular_error_scale_invariant(
            u in proptest::array::uniform3(0.01_f64..10.0),
            v in proptest::array::uniform3(0.01_f64..10.0),
            alpha in 0.01_f64..100.0,
            beta in 0.01_f64..100.0,
        ) {
            let su: Vec<f64> = u.iter().map(|x| x * alpha).collect();
            let sv: Vec<f64> = v.iter().map(|x| x * beta).collect();
            let base = angular_error(&u, &v).unwrap();
            let scaled = angular_error(&su, &sv).unwrap();
            prop_assert!((base - scaled).abs() < 1e-8);
        }

        #[test]
        fn ciede2000_symmetric_and_nonnegative(
            l1 in 0.0_f64..100.0, a1 in -100.0_f64..100.0, b1 in -100.0_f64..100.0,
            l2 in 0.0_f64..100.0, a2 in -100.0_f64..100.0, b2 in -100.0_f64..100.0,
        ) {
            let p = LabColor { l: l1, a: a1, b: b1 };
            let q = LabColor { l: l2, a: a2, b: b2 };
            let pq = ciede2000(&p, &q);
            let qp = ciede2000(&q, &p);
            prop_assert!(pq >= 0.0);
            prop_assert!((pq - qp).abs() < 1e-9);
            prop_assert!(ciede2000(&p, &p) == 0.0);
        }

        #[test]
        fn lab_roundtrip_recovers_xyz(
            x in 0.001_f64..1.5, y in 0.001_f64..1.5, z in 0.001_f64..1.5,
        ) {
            let white = XyzColor::new(0.9505, 1.0, 1.089);
            let c = XyzColor::new(x, y, z);
            let lab = xyz_to_lab(&c, &white).unwrap();
            let back = lab_to_xyz(&lab, &white).unwrap();
            prop_assert!((back.x - c.x).abs() / c.x < 1e-9);
            prop_assert!((back.y - c.y).abs() / c.y < 1e-9);
            prop_assert!((back.z - c.z).abs() / c.z < 1e-9);
        }

        #[test]
        fn raw_to_xyz_linear(
            u in proptest::array::uniform3(-2.0_f64..2.0),
            v in proptest::array::uniform3(-2.0_f64..2.0),
        ) {
            let ccm = ColorCorrectionMatrix::from_row_major(
                &[1.8, -0.6, -0.1, -0.3, 1.6, -0.2, 0.0, -0.5, 1.7],
            ).unwrap();
            let sum = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
            let lhs = raw_to_xyz(sum, &ccm).as_array();
            let cu = raw_to_xyz(u, &ccm).as_array();
            let cv = raw_to_xyz(v, &ccm).as_array();
            for i in 0..3 {
                prop_assert!((lhs[i] - (cu[i] + cv[i])).abs() < 1e-9);
            }
        }
    }
}
