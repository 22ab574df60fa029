//! Monte-Carlo sweeps over (R, u, e) and throughput measurement.
//!
//! Every frame draws its key and channel noise from a random stream keyed
//! by `(seed, e, frame)`, so aggregates do not depend on the worker count
//! and every `u` and every code rate at the same `e` sees the same frames.

mod csv_io;
pub mod manifest;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bits::BitBlock;
use crate::channel::{bsc_corrupt_with, efficiency, generate_key_with, stream_id, substream};
use crate::decoder::{ensemble_syndromes, DecodeResult, DecoderConfig, DecoderWorkspace};
use crate::error::{Error, Result};
use crate::matrix::MatrixEnsemble;
use crate::session::tag::{tag_key, truncated_tag};

pub use csv_io::{read_csv, write_csv, CSV_COLUMNS};

/// Frames run before timing starts.
pub const WARMUP_FRAMES: usize = 5;

const WARMUP_STREAM: u64 = 0x7761_726d;

/// Whether frames are really decoded. `NoOp` measures the harness alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    #[default]
    Full,
    NoOp,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub e_values: Vec<f64>,
    pub u_values: Vec<usize>,
    /// One ensemble per code rate, all with the same `n` and at least
    /// `max(u_values)` members. Smaller `u` use the leading members.
    pub ensembles: Vec<MatrixEnsemble>,
    pub frames: usize,
    pub warmup: usize,
    pub decoder: DecoderConfig,
    /// Worker threads; 0 picks one per logical CPU.
    pub threads: usize,
    pub seed: u64,
    pub tag_bits: u32,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Config("frames per point must be at least 1".into()));
        }
        if self.ensembles.is_empty() || self.e_values.is_empty() || self.u_values.is_empty() {
            return Err(Error::Config("sweep needs at least one ensemble, e and u".into()));
        }
        let n = self.ensembles[0].n();
        let max_u = *self.u_values.iter().max().unwrap();
        for ens in &self.ensembles {
            if ens.n() != n {
                return Err(Error::Config(format!("ensembles mix n = {n} and n = {}", ens.n())));
            }
            if ens.u() < max_u {
                return Err(Error::Config(format!(
                    "ensemble at R = {} has {} matrices, sweep asks for u = {max_u}",
                    rate_of(ens),
                    ens.u()
                )));
            }
        }
        if self.u_values.contains(&0) {
            return Err(Error::Config("u must be at least 1".into()));
        }
        if let Some(e) = self.e_values.iter().find(|e| !(**e > 0.0 && **e < 0.5)) {
            return Err(Error::Config(format!("crossover probability {e} outside (0, 0.5)")));
        }
        if self.tag_bits > 64 {
            return Err(Error::Config(format!("tag width {} exceeds 64 bits", self.tag_bits)));
        }
        self.decoder.validate()
    }
}

/// One line of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub e: f64,
    pub u: usize,
    /// Code rate `1 - m/n`.
    pub rate: f64,
    /// Single-matrix efficiency `m / (n h(e))`.
    pub f: f64,
    pub frames: usize,
    pub success_rate: f64,
    pub mean_iterations: f64,
    pub throughput_mbps: f64,
    pub mean_time_ms: f64,
    pub residual_error_rate: f64,
}

/// A grid point left out because its code cannot work at that `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub e: f64,
    pub rate: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedPoint>,
}

/// `start, start + step, ...` up to and including `stop`, with float drift
/// rounded away.
pub fn e_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if step <= 0.0 || stop < start {
        return vec![start];
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

fn rate_of(ens: &MatrixEnsemble) -> f64 {
    1.0 - ens.m() as f64 / ens.n() as f64
}

/// Key and noisy copy for one frame.
pub fn frame_pair(n: usize, e: f64, seed: u64, frame: u64) -> Result<(BitBlock, BitBlock)> {
    let id = stream_id(&[seed, e.to_bits(), frame]);
    let key = generate_key_with(n, &mut substream(id, 0))?;
    let (noisy, _) = bsc_corrupt_with(&key, e, &mut substream(id, 1));
    Ok((key, noisy))
}

/// Everything needed to simulate one grid point.
#[derive(Debug, Clone, Copy)]
pub struct PointSpec<'a> {
    /// Exactly the matrices to decode with.
    pub ensemble: &'a MatrixEnsemble,
    pub e: f64,
    pub decoder: &'a DecoderConfig,
    pub tag_bits: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub converged: bool,
    pub verified: bool,
    pub iterations: usize,
    pub residual_bits: usize,
    pub decode_time: Duration,
}

/// Aggregates over the measured frames of one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointStats {
    pub n: usize,
    pub frames: usize,
    /// Converged and tag-verified.
    pub successes: usize,
    pub converged: usize,
    /// Syndromes matched but the tag did not.
    pub undetected: usize,
    pub iterations: usize,
    pub residual_bits: usize,
    /// Sum of per-frame decoder wall-clock.
    pub decode_time: Duration,
    /// Iterations with a clean frame's initial check counted as one.
    pub timed_iterations: usize,
    /// Wall-clock of the measured batch.
    pub elapsed: Duration,
}

impl PointStats {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.frames.max(1) as f64
    }

    pub fn frame_error_rate(&self) -> f64 {
        1.0 - self.success_rate()
    }

    pub fn mean_iterations(&self) -> f64 {
        self.iterations as f64 / self.frames.max(1) as f64
    }

    /// Successfully reconciled bits per second, in Mbps.
    pub fn throughput_mbps(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs == 0.0 {
            0.0
        } else {
            (self.successes * self.n) as f64 / secs / 1e6
        }
    }

    pub fn mean_iteration_ms(&self) -> f64 {
        self.decode_time.as_secs_f64() * 1e3 / self.timed_iterations.max(1) as f64
    }

    pub fn mean_frame_ms(&self) -> f64 {
        self.decode_time.as_secs_f64() * 1e3 / self.frames.max(1) as f64
    }

    /// Bit error rate of Bob's output over all frames, failed ones included.
    pub fn residual_error_rate(&self) -> f64 {
        self.residual_bits as f64 / (self.frames.max(1) * self.n.max(1)) as f64
    }

    fn absorb(&mut self, o: &FrameOutcome) {
        self.frames += 1;
        self.successes += o.verified as usize;
        self.converged += o.converged as usize;
        self.undetected += (o.converged && !o.verified) as usize;
        self.iterations += o.iterations;
        self.timed_iterations += o.iterations.max(1);
        self.residual_bits += o.residual_bits;
        self.decode_time += o.decode_time;
    }
}

fn reconcile_frame(
    ws: &mut DecoderWorkspace,
    point: &PointSpec<'_>,
    frame: u64,
    key: &BitBlock,
    noisy: &BitBlock,
    mode: DecodeMode,
) -> Result<FrameOutcome> {
    let ens = point.ensemble;
    let syndromes = ensemble_syndromes(ens, key)?;
    let tag_key = tag_key(point.seed, frame as u32);
    let alice_tag = truncated_tag(key, tag_key, point.tag_bits);
    let t0 = Instant::now();
    let result = match mode {
        DecodeMode::Full => ws.decode(ens, noisy, &syndromes, point.e, point.decoder)?,
        DecodeMode::NoOp => DecodeResult {
            corrected: noisy.clone(),
            converged: false,
            iterations_used: 0,
            residual_syndrome_mismatches: 0,
        },
    };
    let decode_time = t0.elapsed();
    let verified = result.converged && truncated_tag(&result.corrected, tag_key, point.tag_bits) == alice_tag;
    Ok(FrameOutcome {
        converged: result.converged,
        verified,
        iterations: result.iterations_used,
        residual_bits: result.corrected.hamming_distance(key),
        decode_time,
    })
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

fn run_batch(
    pool: &rayon::ThreadPool,
    point: &PointSpec<'_>,
    frames: &[(u64, BitBlock, BitBlock)],
    mode: DecodeMode,
) -> Result<(Vec<FrameOutcome>, Duration)> {
    let start = Instant::now();
    let outcomes = pool.install(|| {
        frames
            .par_iter()
            .map_init(
                || DecoderWorkspace::new(point.ensemble),
                |ws, (id, key, noisy)| reconcile_frame(ws, point, *id, key, noisy, mode),
            )
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((outcomes, start.elapsed()))
}

fn make_frames(n: usize, e: f64, seed: u64, ids: impl Iterator<Item = u64>) -> Result<Vec<(u64, BitBlock, BitBlock)>> {
    ids.map(|id| frame_pair(n, e, seed, id).map(|(k, y)| (id, k, y))).collect()
}

fn run_point_in(
    pool: &rayon::ThreadPool,
    point: &PointSpec<'_>,
    warmup: usize,
    frames: usize,
    mode: DecodeMode,
) -> Result<(PointStats, Vec<FrameOutcome>)> {
    if frames == 0 {
        return Err(Error::Config("frames per point must be at least 1".into()));
    }
    let n = point.ensemble.n();
    if warmup > 0 {
        let warm = make_frames(
            n,
            point.e,
            stream_id(&[point.seed, WARMUP_STREAM]),
            0..warmup as u64,
        )?;
        run_batch(pool, point, &warm, mode)?;
    }
    // Frames are drawn before the clock starts; only reconciliation is timed.
    let batch = make_frames(n, point.e, point.seed, 0..frames as u64)?;
    let (outcomes, elapsed) = run_batch(pool, point, &batch, mode)?;
    let mut stats = PointStats {
        n,
        elapsed,
        ..PointStats::default()
    };
    for o in &outcomes {
        stats.absorb(o);
    }
    Ok((stats, outcomes))
}

/// Simulates one point: `warmup` untimed frames, then `frames` measured ones.
pub fn run_point(
    point: &PointSpec<'_>,
    warmup: usize,
    frames: usize,
    threads: usize,
    mode: DecodeMode,
) -> Result<PointStats> {
    let pool = build_pool(threads)?;
    run_point_in(&pool, point, warmup, frames, mode).map(|(s, _)| s)
}

/// Like [`run_point`], also returning every measured frame in order.
pub fn run_point_frames(
    point: &PointSpec<'_>,
    frames: usize,
    threads: usize,
) -> Result<(PointStats, Vec<FrameOutcome>)> {
    let pool = build_pool(threads)?;
    run_point_in(&pool, point, 0, frames, DecodeMode::Full)
}

#[derive(Debug, Clone)]
pub struct ThroughputReport {
    pub mbps: f64,
    pub mean_iteration_ms: f64,
    pub mean_frame_ms: f64,
    pub stats: PointStats,
    /// Set when no frame succeeded.
    pub diagnostic: Option<String>,
}

pub fn measure_throughput(
    point: &PointSpec<'_>,
    warmup: usize,
    frames: usize,
    threads: usize,
    mode: DecodeMode,
) -> Result<ThroughputReport> {
    let stats = run_point(point, warmup, frames, threads, mode)?;
    let diagnostic = (stats.successes == 0).then(|| {
        format!(
            "no frame reconciled at e = {} with u = {} ({} of {} converged); throughput is 0",
            point.e,
            point.ensemble.u(),
            stats.converged,
            stats.frames
        )
    });
    Ok(ThroughputReport {
        mbps: stats.throughput_mbps(),
        mean_iteration_ms: stats.mean_iteration_ms(),
        mean_frame_ms: stats.mean_frame_ms(),
        stats,
        diagnostic,
    })
}

/// Runs every (R, u, e) point of the grid.
///
/// Points where the single-matrix efficiency is at most 1 cannot be
/// decoded reliably by any code and are skipped.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let pool = build_pool(spec.threads)?;
    let mut out = SweepOutcome::default();
    for full in &spec.ensembles {
        let rate = rate_of(full);
        let mut feasible = Vec::new();
        for &e in &spec.e_values {
            let f = efficiency(full.m(), full.n(), e)?.value();
            if f <= 1.0 {
                log::warn!("skipping e = {e} at R = {rate}: f = {f:.4} <= 1");
                out.skipped.push(SkippedPoint { e, rate, f });
            } else {
                feasible.push((e, f));
            }
        }
        for &u in &spec.u_values {
            let ens = full.prefix(u)?;
            for &(e, f) in &feasible {
                let point = PointSpec {
                    ensemble: &ens,
                    e,
                    decoder: &spec.decoder,
                    tag_bits: spec.tag_bits,
                    seed: spec.seed,
                };
                let (stats, _) = run_point_in(&pool, &point, spec.warmup, spec.frames, DecodeMode::Full)?;
                log::info!(
                    "R = {rate} u = {u} e = {e}: success {:.3}, {:.2} iterations",
                    stats.success_rate(),
                    stats.mean_iterations()
                );
                out.rows.push(SweepRow {
                    e,
                    u,
                    rate,
                    f,
                    frames: stats.frames,
                    success_rate: stats.success_rate(),
                    mean_iterations: stats.mean_iterations(),
                    throughput_mbps: stats.throughput_mbps(),
                    mean_time_ms: stats.mean_iteration_ms(),
                    residual_error_rate: stats.residual_error_rate(),
                });
            }
        }
    }
    Ok(out)
}
