//! Depth and index images, plus the binary fixture dumps.
//!
//! Dump layout: `width: u32 LE`, `height: u32 LE`, then `width * height`
//! row-major samples. Depth samples are `f64 LE` with `0.0` marking invalid
//! pixels; index samples are `u32 LE`.

use std::io::{Read, Write};

use super::GeometryError;

/// Per-pixel camera-frame depth (meters) with a validity flag.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthImage {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            depth: vec![0.0; width * height],
            valid: vec![false; width * height],
        }
    }

    /// Builds from raw samples; non-finite or non-positive values are invalid.
    pub fn from_samples(width: usize, height: usize, samples: &[f64]) -> Result<Self, GeometryError> {
        if samples.len() != width * height {
            return Err(GeometryError::DimensionMismatch {
                expected: (width, height),
                got: (samples.len(), 1),
            });
        }
        let mut img = Self::invalid(width, height);
        for (i, &z) in samples.iter().enumerate() {
            if z.is_finite() && z > 0.0 {
                img.depth[i] = z;
                img.valid[i] = true;
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.index(row, col);
        self.valid[i].then_some(self.depth[i])
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> Option<f64> {
        self.valid[i].then_some(self.depth[i])
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[self.index(row, col)]
    }

    /// Stores `z`; a non-finite or non-positive value invalidates the pixel.
    pub fn set(&mut self, row: usize, col: usize, z: f64) {
        let i = self.index(row, col);
        self.set_index(i, z);
    }

    pub fn set_index(&mut self, i: usize, z: f64) {
        if z.is_finite() && z > 0.0 {
            self.depth[i] = z;
            self.valid[i] = true;
        } else {
            self.depth[i] = 0.0;
            self.valid[i] = false;
        }
    }

    pub fn invalidate(&mut self, row: usize, col: usize) {
        let i = self.index(row, col);
        self.depth[i] = 0.0;
        self.valid[i] = false;
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Raw samples with `0.0` at invalid pixels.
    pub fn samples(&self) -> &[f64] {
        &self.depth
    }

    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        write_header(&mut w, self.width, self.height)?;
        for &z in &self.depth {
            w.write_all(&z.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(mut r: impl Read) -> Result<Self, GeometryError> {
        let (width, height) = read_header(&mut r)?;
        let mut buf = vec![0u8; width * height * 8];
        r.read_exact(&mut buf)
            .map_err(|_| GeometryError::ImageFormat("truncated depth samples".into()))?;
        let samples: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_samples(width, height, &samples)
    }
}

/// Per-pixel integer channel (instance id, part id, ...); 0 = background.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexImage {
    width: usize,
    height: usize,
    values: Vec<u32>,
}

impl IndexImage {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<u32>) -> Result<Self, GeometryError> {
        if values.len() != width * height {
            return Err(GeometryError::DimensionMismatch {
                expected: (width, height),
                got: (values.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u32) {
        self.values[row * self.width + col] = value;
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [u32] {
        &mut self.values
    }

    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Pixels equal to `value`.
    pub fn count_value(&self, value: u32) -> usize {
        self.values.iter().filter(|&&v| v == value).count()
    }

    /// Square (8-neighbourhood) dilation: zero pixels within `radius` of a
    /// labeled pixel take the label of the first such neighbour in row-major
    /// scan order.
    pub fn dilate(&self, radius: usize) -> IndexImage {
        let mut out = self.clone();
        let r = radius as isize;
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(row, col) != 0 {
                    continue;
                }
                'search: for dr in -r..=r {
                    for dc in -r..=r {
                        let (rr, cc) = (row as isize + dr, col as isize + dc);
                        if rr < 0 || cc < 0 || rr >= self.height as isize || cc >= self.width as isize {
                            continue;
                        }
                        let v = self.get(rr as usize, cc as usize);
                        if v != 0 {
                            out.set(row, col, v);
                            break 'search;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        write_header(&mut w, self.width, self.height)?;
        for &v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(mut r: impl Read) -> Result<Self, GeometryError> {
        let (width, height) = read_header(&mut r)?;
        let mut buf = vec![0u8; width * height * 4];
        r.read_exact(&mut buf)
            .map_err(|_| GeometryError::ImageFormat("truncated index samples".into()))?;
        let values = buf
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::from_values(width, height, values)
    }
}

fn write_header(w: &mut impl Write, width: usize, height: usize) -> std::io::Result<()> {
    w.write_all(&(width as u32).to_le_bytes())?;
    w.write_all(&(height as u32).to_le_bytes())
}

fn read_header(r: &mut impl Read) -> Result<(usize, usize), GeometryError> {
    let mut h = [0u8; 8];
    r.read_exact(&mut h)
        .map_err(|_| GeometryError::ImageFormat("missing 8-byte header".into()))?;
    let width = u32::from_le_bytes(h[0..4].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(h[4..8].try_into().unwrap()) as usize;
    Ok((width, height))
}
