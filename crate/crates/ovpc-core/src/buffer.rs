//! Scan accumulation: a ring buffer of posed scans that can be aligned into a
//! common frame, concatenated, and voxel-filtered into the per-frame cloud
//! fed to the visibility pipeline.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{transform_cloud, GeomError, Point3, PointCloud, Pose3, Vec3};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scan {
    /// Points in the sensor frame.
    pub cloud: PointCloud,
    /// Sensor-to-odometry transform.
    pub pose: Pose3,
    /// Seconds; must be non-decreasing across pushes.
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BufferConfig {
    pub capacity: usize,
    pub voxel_size: f64,
    /// A voxel emits a point only if it holds at least this many inputs;
    /// two measurements per voxel suppresses isolated outlier returns.
    pub min_points_per_voxel: usize,
}

impl Default for BufferConfig {
    fn default() -> Self {
        Self {
            capacity: 25,
            voxel_size: 0.2,
            min_points_per_voxel: 2,
        }
    }
}

impl BufferConfig {
    pub fn validate(&self) -> Result<(), BufferError> {
        if self.capacity < 1 {
            return Err(BufferError::InvalidConfig("capacity must be >= 1".into()));
        }
        if !(self.voxel_size > 0.0) {
            return Err(BufferError::InvalidConfig(format!(
                "voxel_size must be positive, got {}",
                self.voxel_size
            )));
        }
        if self.min_points_per_voxel < 1 {
            return Err(BufferError::InvalidConfig(
                "min_points_per_voxel must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum BufferError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("scan timestamp {got} is earlier than the last pushed {last}")]
    DecreasingTimestamp { got: f64, last: f64 },
    #[error("buffer is empty")]
    Empty,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Ring buffer of the most recent scans.
#[derive(Debug, Clone)]
pub struct CloudBuffer {
    scans: VecDeque<Scan>,
    capacity: usize,
    last_timestamp: Option<f64>,
}

impl CloudBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            scans: VecDeque::with_capacity(capacity),
            capacity: capacity.max(1),
            last_timestamp: None,
        }
    }

    pub fn len(&self) -> usize {
        self.scans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scans.is_empty()
    }

    pub fn scans(&self) -> impl Iterator<Item = &Scan> {
        self.scans.iter()
    }

    /// Appends a scan, evicting the oldest when full. Timestamps must be
    /// non-decreasing; violations leave the buffer unchanged.
    pub fn push_scan(&mut self, scan: Scan) -> Result<(), BufferError> {
        if let Some(last) = self.last_timestamp {
            if scan.timestamp < last {
                return Err(BufferError::DecreasingTimestamp {
                    got: scan.timestamp,
                    last,
                });
            }
        }
        self.last_timestamp = Some(scan.timestamp);
        if self.scans.len() == self.capacity {
            self.scans.pop_front();
        }
        self.scans.push_back(scan);
        Ok(())
    }

    /// Aligns every buffered scan into the `target` frame, concatenates, and
    /// voxel-filters the result.
    pub fn assemble(&self, target: &Pose3, cfg: &BufferConfig) -> Result<PointCloud, BufferError> {
        cfg.validate()?;
        if self.scans.is_empty() {
            return Err(BufferError::Empty);
        }
        let inv_target = target.inverse();
        let mut points = Vec::new();
        let mut intensity: Option<Vec<f64>> = None;
        let all_have_intensity = self.scans.iter().all(|s| s.cloud.intensity.is_some());
        if all_have_intensity {
            intensity = Some(Vec::new());
        }
        for scan in &self.scans {
            let to_target = inv_target * scan.pose;
            let aligned = transform_cloud(&scan.cloud, &to_target)?;
            points.extend(aligned.points);
            if let (Some(ref mut acc), Some(ref src)) = (intensity.as_mut(), aligned.intensity) {
                acc.extend(src.iter().copied());
            }
        }
        let merged = PointCloud { points, intensity };
        Ok(voxel_filter(
            &merged,
            cfg.voxel_size,
            cfg.min_points_per_voxel,
        ))
    }
}

/// Bins points into a cubic grid; every voxel holding at least `min_points`
/// inputs emits their centroid. Output is ordered by ascending (ix, iy, iz)
/// voxel index. Intensity, when present, is averaged per voxel.
pub fn voxel_filter(cloud: &PointCloud, voxel_size: f64, min_points: usize) -> PointCloud {
    #[derive(Default)]
    struct Acc {
        sum: Vec3,
        intensity_sum: f64,
        count: usize,
    }
    let mut voxels: BTreeMap<(i64, i64, i64), Acc> = BTreeMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let key = (
            (p.x / voxel_size).floor() as i64,
            (p.y / voxel_size).floor() as i64,
            (p.z / voxel_size).floor() as i64,
        );
        let acc = voxels.entry(key).or_default();
        acc.sum += p.coords;
        acc.count += 1;
        if let Some(ref ints) = cloud.intensity {
            acc.intensity_sum += ints[i];
        }
    }
    let mut points = Vec::new();
    let mut intensity = cloud.intensity.as_ref().map(|_| Vec::new());
    for acc in voxels.values() {
        if acc.count >= min_points {
            points.push(Point3::from(acc.sum / acc.count as f64));
            if let Some(ref mut ints) = intensity {
                ints.push(acc.intensity_sum / acc.count as f64);
            }
        }
    }
    PointCloud { points, intensity }
}
