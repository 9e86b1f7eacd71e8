//! Structured-light depth sensor noise.
//!
//! Each pixel is displaced by a Gaussian offset (rounded to whole pixels,
//! labels travel with the sample), disparity `fx * baseline / z` is
//! quantized to multiples of `1 / scale_factor`, samples outside the depth
//! range are dropped, and pixels near depth discontinuities are
//! invalidated. The discontinuity test runs on the clean input: a
//! neighbour disagrees with the centre when its disparity is more than one
//! quantization step away from the centre's local planar extrapolation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::{CameraModel, DepthImage, IndexImage};

/// Where the Gaussian perturbation of size `sigma` is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDomain {
    /// Image-plane displacement of each sample, in pixels.
    #[default]
    PixelShift,
    /// Additive disparity noise, in pixels of disparity.
    Disparity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub scale_factor: f64,
    pub baseline: f64,
    pub sigma: f64,
    pub filter_size: usize,
    pub z_near: f64,
    pub z_far: f64,
    pub domain: NoiseDomain,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            scale_factor: 100.0,
            baseline: 0.075,
            sigma: 0.5,
            filter_size: 6,
            z_near: 0.01,
            z_far: 20.0,
            domain: NoiseDomain::PixelShift,
        }
    }
}

impl NoiseConfig {
    /// No perturbation, sub-nanometre quantization and no discontinuity
    /// filtering: valid pixels inside the depth range pass through.
    pub fn zero() -> Self {
        Self {
            scale_factor: 1e9,
            sigma: 0.0,
            filter_size: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let positive = [self.scale_factor, self.baseline, self.z_near, self.z_far];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SynthError::InvalidConfig(
                "noise scale, baseline and depth range must be positive".into(),
            ));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(SynthError::InvalidConfig(format!("sigma {} must be >= 0", self.sigma)));
        }
        if self.z_near >= self.z_far {
            return Err(SynthError::InvalidConfig(format!(
                "z_near {} must be below z_far {}",
                self.z_near, self.z_far
            )));
        }
        if self.filter_size < 1 {
            return Err(SynthError::InvalidConfig("filter_size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn quantization_step(&self) -> f64 {
        1.0 / self.scale_factor
    }
}

/// Disparity of depth `z` for a camera with focal length `fx`.
pub fn disparity(z: f64, fx: f64, baseline: f64) -> f64 {
    fx * baseline / z
}

pub fn simulate_kinect_noise<R: Rng + ?Sized>(
    depth: &DepthImage,
    cam: &CameraModel,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<DepthImage, SynthError> {
    Ok(simulate_kinect_noise_labeled(depth, &[], cam, cfg, rng)?.0)
}

/// As [`simulate_kinect_noise`], moving every label image together with the
/// depth samples.
pub fn simulate_kinect_noise_labeled<R: Rng + ?Sized>(
    depth: &DepthImage,
    labels: &[&IndexImage],
    cam: &CameraModel,
    cfg: &NoiseConfig,
    rng: &mut R,
) -> Result<(DepthImage, Vec<IndexImage>), SynthError> {
    cfg.validate()?;
    let (w, h) = depth.dims();
    if (w, h) != (cam.width(), cam.height()) {
        return Err(SynthError::Geometry(crate::geometry::GeometryError::DimensionMismatch {
            expected: (cam.width(), cam.height()),
            got: (w, h),
        }));
    }
    for l in labels {
        if l.dims() != (w, h) {
            return Err(SynthError::Geometry(crate::geometry::GeometryError::DimensionMismatch {
                expected: (w, h),
                got: l.dims(),
            }));
        }
    }
    let fb = cam.fx() * cfg.baseline;
    let step = cfg.quantization_step();

    // clean disparity and discontinuity mask on the input
    let clean: Vec<Option<f64>> = (0..w * h)
        .map(|i| depth.get_index(i).map(|z| fb / z))
        .collect();
    let edge = discontinuity_mask(&clean, w, h, cfg.filter_size, step);

    let normal = (cfg.sigma > 0.0).then(|| Normal::new(0.0, cfg.sigma).expect("sigma validated"));
    let mut out = DepthImage::invalid(w, h);
    let mut out_labels: Vec<IndexImage> = labels.iter().map(|_| IndexImage::zeros(w, h)).collect();
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            // draws happen for every pixel so streams do not depend on content
            let (src, extra) = match (cfg.domain, &normal) {
                (NoiseDomain::PixelShift, Some(n)) => {
                    let dr = n.sample(rng).round();
                    let dc = n.sample(rng).round();
                    let sr = (r as f64 + dr).clamp(0.0, (h - 1) as f64) as usize;
                    let sc = (c as f64 + dc).clamp(0.0, (w - 1) as f64) as usize;
                    (sr * w + sc, 0.0)
                }
                (NoiseDomain::Disparity, Some(n)) => (i, n.sample(rng)),
                (_, None) => (i, 0.0),
            };
            let (Some(_), Some(d_src)) = (clean[i], clean[src]) else {
                continue;
            };
            if edge[i] {
                continue;
            }
            let q = ((d_src + extra) * cfg.scale_factor).round() / cfg.scale_factor;
            if q <= 0.0 {
                continue;
            }
            let z = fb / q;
            if !(cfg.z_near..=cfg.z_far).contains(&z) {
                continue;
            }
            out.set_index(i, z);
            for (dst, l) in out_labels.iter_mut().zip(labels) {
                dst.values_mut()[i] = l.values()[src];
            }
        }
    }
    Ok((out, out_labels))
}

/// One-sided difference of smaller magnitude along an axis, so a slope is
/// never estimated across an edge when one side is smooth.
fn slope(prev: Option<f64>, centre: f64, next: Option<f64>) -> f64 {
    match (prev, next) {
        (Some(p), Some(n)) => {
            let (back, fwd) = (centre - p, n - centre);
            if back.abs() <= fwd.abs() {
                back
            } else {
                fwd
            }
        }
        (Some(p), None) => centre - p,
        (None, Some(n)) => n - centre,
        (None, None) => 0.0,
    }
}

/// Pixels where more than half of the valid window samples disagree with
/// the centre's planar extrapolation by more than `step`.
pub fn discontinuity_mask(
    disp: &[Option<f64>],
    w: usize,
    h: usize,
    filter_size: usize,
    step: f64,
) -> Vec<bool> {
    let mut mask = vec![false; w * h];
    if filter_size <= 1 {
        return mask;
    }
    let before = (filter_size / 2) as isize;
    let after = (filter_size - 1) as isize - before;
    let at = |r: isize, c: isize| -> Option<f64> {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            None
        } else {
            disp[r as usize * w + c as usize]
        }
    };
    for r in 0..h as isize {
        for c in 0..w as isize {
            let Some(d0) = at(r, c) else { continue };
            let gx = slope(at(r, c - 1), d0, at(r, c + 1));
            let gy = slope(at(r - 1, c), d0, at(r + 1, c));
            let mut valid = 0usize;
            let mut differ = 0usize;
            for dr in -before..=after {
                for dc in -before..=after {
                    let Some(d) = at(r + dr, c + dc) else { continue };
                    valid += 1;
                    let predicted = d0 + gy * dr as f64 + gx * dc as f64;
                    if (d - predicted).abs() > step {
                        differ += 1;
                    }
                }
            }
            if 2 * differ > valid {
                mask[r as usize * w + c as usize] = true;
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidTransform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cam() -> CameraModel {
        CameraModel::new(262.5, 262.5, 80.0, 60.0, 160, 120, RigidTransform::identity()).unwrap()
    }

    fn plane(z: f64) -> DepthImage {
        DepthImage::from_samples(160, 120, &vec![z; 160 * 120]).unwrap()
    }

    #[test]
    fn near_identity_on_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = NoiseConfig {
            sigma: 0.0,
            scale_factor: 1e9,
            ..Default::default()
        };
        let out = simulate_kinect_noise(&plane(2.0), &cam(), &cfg, &mut rng).unwrap();
        assert_eq!(out.valid_count(), 160 * 120);
        assert!(out.samples().iter().all(|z| (z - 2.0).abs() < 1e-6));
    }

    #[test]
    fn range_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = NoiseConfig::default();
        assert_eq!(simulate_kinect_noise(&plane(25.0), &cam(), &cfg, &mut rng).unwrap().valid_count(), 0);
        assert_eq!(simulate_kinect_noise(&plane(0.005), &cam(), &cfg, &mut rng).unwrap().valid_count(), 0);
    }

    #[test]
    fn disparities_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<f64> = (0..160 * 120).map(|i| 1.0 + (i % 160) as f64 * 0.01).collect();
        let depth = DepthImage::from_samples(160, 120, &samples).unwrap();
        for domain in [NoiseDomain::PixelShift, NoiseDomain::Disparity] {
            let cfg = NoiseConfig { domain, ..Default::default() };
            let out = simulate_kinect_noise(&depth, &cam(), &cfg, &mut rng).unwrap();
            assert!(out.valid_count() > 0);
            for i in 0..160 * 120 {
                if let Some(z) = out.get_index(i) {
                    let d = disparity(z, 262.5, 0.075) * 100.0;
                    assert!((d - d.round()).abs() < 1e-9 * d.max(1.0), "{d}");
                }
            }
        }
    }

    #[test]
    fn slanted_plane_survives_and_step_edge_is_cut() {
        // disparity affine in the column index: a slanted plane
        let mut samples = vec![0.0; 160 * 120];
        for r in 0..120 {
            for c in 0..160 {
                let d = 10.0 + 0.05 * c as f64 + 0.02 * r as f64;
                samples[r * 160 + c] = 262.5 * 0.075 / d;
            }
        }
        let disp: Vec<Option<f64>> = samples.iter().map(|z| Some(262.5 * 0.075 / z)).collect();
        assert!(discontinuity_mask(&disp, 160, 120, 6, 0.01).iter().all(|&m| !m));

        // a thin strip in front of a wall loses its pixels
        let mut disp = vec![Some(5.0); 40 * 40];
        for r in 0..40 {
            for c in 18..20 {
                disp[r * 40 + c] = Some(20.0);
            }
        }
        let mask = discontinuity_mask(&disp, 40, 40, 6, 0.01);
        assert!(mask[20 * 40 + 18] && mask[20 * 40 + 19]);
        assert!(!mask[20 * 40 + 5]);
    }

    #[test]
    fn validity_only_shrinks_and_labels_follow() {
        let mut samples = vec![0.0; 160 * 120];
        let mut inst = IndexImage::zeros(160, 120);
        for r in 0..120 {
            for c in 0..160 {
                if (40..80).contains(&c) {
                    samples[r * 160 + c] = 2.0;
                    inst.set(r, c, 3);
                } else if c % 7 != 0 {
                    samples[r * 160 + c] = 4.0;
                }
            }
        }
        let depth = DepthImage::from_samples(160, 120, &samples).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (out, labels) =
            simulate_kinect_noise_labeled(&depth, &[&inst], &cam(), &NoiseConfig::default(), &mut rng)
                .unwrap();
        for i in 0..160 * 120 {
            if out.get_index(i).is_some() {
                assert!(depth.get_index(i).is_some());
                let z = out.get_index(i).unwrap();
                // a human label only ever sits on a human depth
                if labels[0].values()[i] == 3 {
                    assert!((z - 2.0).abs() < 0.01);
                }
            }
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let depth = plane(3.0);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate_kinect_noise(&depth, &cam(), &NoiseConfig::default(), &mut rng).unwrap()
        };
        assert_eq!(run(4), run(4));
    }

    #[test]
    fn rejects_bad_config() {
        let bad = NoiseConfig { z_near: 30.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = NoiseConfig { filter_size: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
