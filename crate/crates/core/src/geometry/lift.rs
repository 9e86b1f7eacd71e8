//! Moving between pixels and points: depth backprojection and 2D mask lifting.

use super::{
    CameraModel, DepthImage, GeometryError, IndexImage, LabeledPointCloud, Provenance,
    SEMANTIC_HUMAN,
};

/// Optional label channels paired with a depth image.
#[derive(Clone, Copy, Debug, Default)]
pub struct LabelChannels<'a> {
    pub instance: Option<&'a IndexImage>,
    pub part: Option<&'a IndexImage>,
}

/// One world-frame point per valid pixel, in row-major order.
///
/// Pixels with a non-zero instance or part label become human points.
pub fn backproject_depth(
    depth: &DepthImage,
    labels: LabelChannels<'_>,
    cam: &CameraModel,
    camera_id: u32,
) -> Result<LabeledPointCloud, GeometryError> {
    for img in [labels.instance, labels.part].into_iter().flatten() {
        if img.dims() != depth.dims() {
            return Err(GeometryError::DimensionMismatch {
                expected: depth.dims(),
                got: img.dims(),
            });
        }
    }
    if (cam.width(), cam.height()) != depth.dims() {
        return Err(GeometryError::DimensionMismatch {
            expected: (cam.width(), cam.height()),
            got: depth.dims(),
        });
    }
    let n = depth.valid_count();
    let mut cloud = LabeledPointCloud {
        positions: Vec::with_capacity(n),
        semantic: Vec::with_capacity(n),
        instance: Vec::with_capacity(n),
        part: Vec::with_capacity(n),
        provenance: Some(Vec::with_capacity(n)),
    };
    let prov = cloud.provenance.as_mut().unwrap();
    for row in 0..depth.height() {
        for col in 0..depth.width() {
            let Some(z) = depth.get(row, col) else {
                continue;
            };
            let inst = labels.instance.map_or(0, |m| m.get(row, col));
            let part = labels.part.map_or(0, |m| m.get(row, col));
            cloud.positions.push(cam.unproject(row, col, z));
            cloud.semantic.push(if inst != 0 || part != 0 { SEMANTIC_HUMAN } else { 0 });
            cloud.instance.push(inst);
            cloud.part.push(u8::try_from(part).map_err(|_| {
                GeometryError::InvalidCloud(format!("part label {part} does not fit a part id"))
            })?);
            prov.push(Provenance {
                camera: camera_id,
                row: row as u32,
                col: col as u32,
            });
        }
    }
    Ok(cloud)
}

/// Per-point value of a 2D mask lifted onto the cloud.
///
/// Points with provenance use their source pixel (the provenance camera must
/// be `camera_id`); others are projected into the frame. Points landing on an
/// invalid depth pixel or outside the frame get 0.
pub fn project_2d_mask_to_3d(
    mask: &IndexImage,
    depth: &DepthImage,
    cam: &CameraModel,
    cloud: &LabeledPointCloud,
    camera_id: u32,
) -> Result<Vec<u32>, GeometryError> {
    if mask.dims() != depth.dims() || (cam.width(), cam.height()) != depth.dims() {
        return Err(GeometryError::DimensionMismatch {
            expected: depth.dims(),
            got: mask.dims(),
        });
    }
    let mut out = vec![0u32; cloud.len()];
    for (i, p) in cloud.positions.iter().enumerate() {
        let pixel = match cloud.provenance.as_ref().map(|v| v[i]) {
            Some(prov) => {
                if prov.camera != camera_id {
                    return Err(GeometryError::CameraMismatch {
                        point: i,
                        found: prov.camera,
                        expected: camera_id,
                    });
                }
                Some((prov.row as usize, prov.col as usize))
            }
            None => cam.project(p).map(|px| (px.row, px.col)),
        };
        if let Some((row, col)) = pixel {
            if row < depth.height() && col < depth.width() && depth.is_valid(row, col) {
                out[i] = mask.get(row, col);
            }
        }
    }
    Ok(out)
}
