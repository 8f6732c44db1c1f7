//! Wall-clock benchmark of the per-cloud map build (mesh + navigation map),
//! single-threaded, with an untimed warm-up pass.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::PointCloud;
use crate::ghpr::{build_ovpc_mesh, GhprConfig, GhprError};
use crate::traversability::{build_navmap, TravError, TraversabilityConfig};

pub const HISTOGRAM_BIN_MS: f64 = 2.0;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("iterations must be >= 1")]
    NoIterations,
    #[error("no input clouds")]
    NoClouds,
    #[error("timer resolution {resolution_us} us is coarser than 1 us")]
    TimerResolution { resolution_us: f64 },
    #[error("cloud {cloud_id}: {source}")]
    Mesh {
        cloud_id: usize,
        source: GhprError,
    },
    #[error("cloud {cloud_id}: {source}")]
    Navmap {
        cloud_id: usize,
        source: TravError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSample {
    pub cloud_id: usize,
    pub points: usize,
    pub iteration: usize,
    pub ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchStats {
    pub samples: Vec<BenchSample>,
    pub point_counts: Vec<usize>,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
    /// Counts per fixed 2 ms bin starting at zero.
    pub histogram: Vec<usize>,
}

impl BenchStats {
    pub fn samples_csv(&self) -> String {
        let mut out = String::from("cloud_id,points,iteration,ms\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{:.6}\n",
                s.cloud_id, s.points, s.iteration, s.ms
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "samples: {} ({} clouds)\n",
            self.samples.len(),
            self.point_counts.len()
        ));
        out.push_str(&format!(
            "mean: {:.3} ms  std: {:.3} ms  min: {:.3} ms  max: {:.3} ms\n",
            self.mean_ms, self.std_ms, self.min_ms, self.max_ms
        ));
        out.push_str("histogram (2 ms bins):\n");
        for (i, &count) in self.histogram.iter().enumerate() {
            if count > 0 {
                out.push_str(&format!(
                    "  [{:>6.1}, {:>6.1}) ms: {}\n",
                    i as f64 * HISTOGRAM_BIN_MS,
                    (i + 1) as f64 * HISTOGRAM_BIN_MS,
                    count
                ));
            }
        }
        out
    }
}

fn timer_resolution_us() -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let t0 = Instant::now();
        let mut dt = t0.elapsed();
        while dt.is_zero() {
            dt = t0.elapsed();
        }
        best = best.min(dt.as_secs_f64() * 1e6);
    }
    best
}

/// Times `build_ovpc_mesh` + `build_navmap` per cloud on the current thread.
///
/// One warm-up pass over all clouds runs untimed (it also surfaces pipeline
/// errors early); then `iterations` timed passes per cloud produce
/// `clouds * iterations` samples.
pub fn time_pipeline(
    clouds: &[PointCloud],
    ghpr_cfg: &GhprConfig,
    trav_cfg: &TraversabilityConfig,
    iterations: usize,
) -> Result<BenchStats, BenchError> {
    if iterations < 1 {
        return Err(BenchError::NoIterations);
    }
    if clouds.is_empty() {
        return Err(BenchError::NoClouds);
    }
    let resolution_us = timer_resolution_us();
    if resolution_us > 1.0 {
        return Err(BenchError::TimerResolution { resolution_us });
    }

    let run_one = |cloud_id: usize, cloud: &PointCloud| {
        let mesh =
            build_ovpc_mesh(cloud, ghpr_cfg).map_err(|source| BenchError::Mesh { cloud_id, source })?;
        let navmap = build_navmap(&mesh, trav_cfg, ghpr_cfg.viewpoint)
            .map_err(|source| BenchError::Navmap { cloud_id, source })?;
        Ok::<usize, BenchError>(std::hint::black_box(navmap.len()))
    };

    // Warm-up.
    for (cloud_id, cloud) in clouds.iter().enumerate() {
        run_one(cloud_id, cloud)?;
    }

    let mut samples = Vec::with_capacity(clouds.len() * iterations);
    for (cloud_id, cloud) in clouds.iter().enumerate() {
        for iteration in 0..iterations {
            let t0 = Instant::now();
            run_one(cloud_id, cloud)?;
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            samples.push(BenchSample {
                cloud_id,
                points: cloud.len(),
                iteration,
                ms,
            });
        }
    }

    // Welford accumulation over the samples.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut min_ms = f64::INFINITY;
    let mut max_ms = f64::NEG_INFINITY;
    for (k, s) in samples.iter().enumerate() {
        let delta = s.ms - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (s.ms - mean);
        min_ms = min_ms.min(s.ms);
        max_ms = max_ms.max(s.ms);
    }
    let std_ms = if samples.len() > 1 {
        (m2 / (samples.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let bins = (max_ms / HISTOGRAM_BIN_MS).floor() as usize + 1;
    let mut histogram = vec![0usize; bins];
    for s in &samples {
        histogram[(s.ms / HISTOGRAM_BIN_MS).floor() as usize] += 1;
    }
    Ok(BenchStats {
        point_counts: clouds.iter().map(PointCloud::len).collect(),
        samples,
        mean_ms: mean,
        std_ms,
        min_ms,
        max_ms,
        histogram,
    })
}
