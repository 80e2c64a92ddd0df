//! The coordinator/worker pipeline.
//!
//! Batches of rows are dealt round-robin to R workers. In stage 1 each
//! worker turns its windows into a wide distance block, a density segment,
//! and neighbor rows, dropping the block before the next window; the
//! coordinator writes the gathered segments into full vectors by global row
//! offset, so arrival order cannot affect the result. The assembled density
//! vector is then shared with all workers for the stage-2 scan, whose
//! partial (mu, delta) vectors are merged the same way; unresolved entries
//! become mini centers and are resolved centrally. Stage 3 (potentials,
//! centers, labels) runs sequentially on the coordinator.
//!
//! Per-row results never depend on the batch split or worker count, which
//! makes the complete output bit-identical for every R, including R = 1.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::Arc;
use std::thread;

use serde::Serialize;

use crate::assign::{assign_labels, center_potential, select_centers};
use crate::density::{density_segment, estimate_dc};
use crate::distance::DistanceSource;
use crate::error::{Error, Result};
use crate::leading::{knn_from_block, resolve_minicenters, scan_leading, MiniCenterSet};
use crate::memory::MemoryMeter;
use crate::model::{
    ClusterCount, ClusterResult, DcMode, DensityVector, Kernel, KnnTable, LeadingStructure,
    RunConfig, ROOT,
};

/// Points drawn (without replacement) when estimating d_c from a percentile.
pub const DC_SAMPLE_SIZE: usize = 1000;

/// Deterministic batch-to-worker assignment: batch k goes to worker k mod R.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShardPlan {
    pub workers: usize,
    pub batches: usize,
    /// Per worker, ordered (row_offset, m) windows; disjoint, covering [0, n).
    pub assignments: Vec<Vec<(usize, usize)>>,
}

/// Splits `n` rows into ceil(n / batch_size) contiguous batches in index
/// order and deals them round-robin over `workers`. A pure function of its
/// arguments; the last batch may be short and trailing workers may be idle.
pub fn plan_shards(n: usize, batch_size: usize, workers: usize) -> ShardPlan {
    let b = batch_size.max(1);
    let workers = workers.max(1);
    let mut assignments = vec![Vec::new(); workers];
    let mut batches = 0;
    let mut offset = 0;
    while offset < n {
        let m = b.min(n - offset);
        assignments[batches % workers].push((offset, m));
        batches += 1;
        offset += m;
    }
    ShardPlan {
        workers,
        batches,
        assignments,
    }
}

pub struct StageOneOutput {
    pub rho: DensityVector,
    pub knn: KnnTable,
}

struct Stage1Window {
    offset: usize,
    m: usize,
    rho: Vec<f64>,
    ids: Vec<u32>,
    dists: Vec<f64>,
}

/// Everything a stage-1 worker shares read-only with its peers.
struct Stage1Ctx<'a> {
    source: &'a DistanceSource,
    dc: f64,
    kernel: Kernel,
    k: usize,
    meter: &'a Arc<MemoryMeter>,
    stop: &'a AtomicBool,
}

fn stage1_worker(
    worker: usize,
    windows: &[(usize, usize)],
    ctx: &Stage1Ctx<'_>,
    tx: &Sender<Result<Stage1Window>>,
) {
    let n = ctx.source.n();
    for &(offset, m) in windows {
        if ctx.stop.load(Ordering::Relaxed) {
            return;
        }
        let compute = || -> Result<Stage1Window> {
            let _lease = ctx.meter.lease((m * n) as u64);
            let block = ctx.source.block(offset, m)?;
            let rho = density_segment(&block, ctx.dc, ctx.kernel)?;
            let rows = knn_from_block(&block, ctx.k)?;
            Ok(Stage1Window {
                offset,
                m,
                rho,
                ids: rows.ids,
                dists: rows.dists,
            })
        };
        match compute() {
            Ok(out) => {
                // The receiver only shuts down on failure.
                if tx.send(Ok(out)).is_err() {
                    return;
                }
            }
            Err(e) => {
                ctx.stop.store(true, Ordering::Relaxed);
                let _ = tx.send(Err(Error::WorkerFailed {
                    worker,
                    offset,
                    m,
                    message: e.to_string(),
                }));
                return;
            }
        }
    }
}

/// Stage 1: density segments and neighbor rows for every batch, gathered
/// into full vectors by global row offset.
pub fn run_stage1(
    plan: &ShardPlan,
    source: &DistanceSource,
    dc: f64,
    kernel: Kernel,
    k: usize,
    meter: &Arc<MemoryMeter>,
) -> Result<StageOneOutput> {
    let n = source.n();
    let mut rho = vec![0.0; n];
    let mut knn = KnnTable::new_empty(n, k);
    let mut received = 0usize;
    let mut failure: Option<Error> = None;

    let stop = AtomicBool::new(false);
    let ctx = Stage1Ctx {
        source,
        dc,
        kernel,
        k,
        meter,
        stop: &stop,
    };
    let (tx, rx) = mpsc::channel();
    thread::scope(|scope| {
        for w in 1..plan.workers {
            let tx = tx.clone();
            let ctx = &ctx;
            let windows = plan.assignments[w].as_slice();
            scope.spawn(move || stage1_worker(w, windows, ctx, &tx));
        }
        stage1_worker(0, &plan.assignments[0], &ctx, &tx);
        drop(tx);
        for msg in rx {
            match msg {
                Ok(win) => {
                    rho[win.offset..win.offset + win.m].copy_from_slice(&win.rho);
                    knn.write_rows(win.offset, &win.ids, &win.dists);
                    received += 1;
                }
                Err(e) => {
                    if failure.is_none() {
                        failure = Some(e);
                    }
                }
            }
        }
    });

    if let Some(e) = failure {
        return Err(e);
    }
    if received != plan.batches {
        return Err(Error::Internal(format!(
            "stage 1 gathered {received} of {} batches",
            plan.batches
        )));
    }
    Ok(StageOneOutput {
        rho: DensityVector { rho, kernel, dc },
        knn,
    })
}

/// Stage 2: parallel inverse scans over the shared density vector, merged by
/// offset; unresolved points form the mini-center set, resolved centrally
/// with wide rows in chunks of at most `batch_size`.
pub fn run_stage2(
    plan: &ShardPlan,
    source: &DistanceSource,
    knn: &KnnTable,
    rho: &DensityVector,
    batch_size: usize,
    meter: &Arc<MemoryMeter>,
) -> Result<(LeadingStructure, usize)> {
    let n = source.n();
    let mut mu = vec![ROOT; n];
    let mut delta = vec![0.0; n];

    let (tx, rx) = mpsc::channel();
    thread::scope(|scope| {
        for w in 1..plan.workers {
            let tx = tx.clone();
            let windows = plan.assignments[w].as_slice();
            scope.spawn(move || {
                for &(offset, m) in windows {
                    if tx.send(scan_leading(knn, rho, offset, m)).is_err() {
                        return;
                    }
                }
            });
        }
        for &(offset, m) in &plan.assignments[0] {
            let _ = tx.send(scan_leading(knn, rho, offset, m));
        }
        drop(tx);
        for out in rx {
            mu[out.row_offset..out.row_offset + out.mu.len()].copy_from_slice(&out.mu);
            delta[out.row_offset..out.row_offset + out.delta.len()].copy_from_slice(&out.delta);
        }
    });

    let minis = MiniCenterSet::from_mu(&mu);
    let count = minis.len();
    resolve_minicenters(
        &minis,
        source,
        rho,
        &mut mu,
        &mut delta,
        batch_size,
        Some(meter),
    )?;
    Ok((LeadingStructure { mu, delta }, count))
}

/// Everything a run produces: the intermediate vectors, the final
/// clustering, and the run report.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub rho: DensityVector,
    pub knn: KnnTable,
    pub leading: LeadingStructure,
    pub gamma: Vec<f64>,
    pub result: ClusterResult,
    pub report: RunReport,
}

/// Reproducibility record for a run: the effective configuration plus stage
/// timings and tracked block memory.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub n: usize,
    pub dims: Option<usize>,
    pub metric: String,
    pub kernel: Kernel,
    pub dc_mode: String,
    pub dc: f64,
    pub k: usize,
    pub batch_size: usize,
    pub workers: usize,
    pub batches: usize,
    pub cluster_mode: String,
    pub clusters: usize,
    pub centers: Vec<usize>,
    pub mini_centers: usize,
    pub seed: u64,
    pub stage1_ms: f64,
    pub stage2_ms: f64,
    pub stage3_ms: f64,
    pub total_ms: f64,
    /// Highest simultaneous tracked distance-block entries.
    pub peak_block_entries: u64,
    /// Largest single tracked allocation, in entries.
    pub largest_block_entries: u64,
    /// The contract bound R * b * n + |M| * n the peak is measured against.
    pub block_budget_entries: u64,
}

/// Monotonic stopwatch; reads zero where no clock is available (wasm).
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

fn effective_workers(requested: Option<usize>, batches: usize) -> usize {
    match requested {
        Some(r) => r.max(1),
        None => thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .min(batches.max(1)),
    }
}

/// Runs the full pipeline: stage 1 (densities + neighbor tables), stage 2
/// (leading structure), stage 3 (potentials, centers, labels).
pub fn run_pipeline(source: &DistanceSource, config: &RunConfig) -> Result<PipelineOutput> {
    let n = source.n();
    config.validate(n)?;
    let total = Stopwatch::start();

    let (dc, dc_mode) = match config.dc {
        DcMode::Explicit(v) => (v, "explicit".to_string()),
        DcMode::Percentile(p) => (
            estimate_dc(source, p, DC_SAMPLE_SIZE, config.seed)?,
            format!("percentile {p}"),
        ),
    };

    let batch = config.batch_size.min(n);
    let workers = effective_workers(config.workers, n.div_ceil(batch));
    let plan = plan_shards(n, batch, workers);
    let meter = MemoryMeter::new();

    let clock = Stopwatch::start();
    let stage1 = run_stage1(&plan, source, dc, config.kernel, config.k, &meter)?;
    let stage1_ms = clock.elapsed_ms();

    let clock = Stopwatch::start();
    let (leading, mini_centers) =
        run_stage2(&plan, source, &stage1.knn, &stage1.rho, batch, &meter)?;
    let stage2_ms = clock.elapsed_ms();

    let clock = Stopwatch::start();
    let gamma = center_potential(&stage1.rho, &leading.delta)?;
    let centers = select_centers(&gamma, config.clusters)?;
    let result = assign_labels(&leading, &stage1.rho, &centers, source)?;
    let stage3_ms = clock.elapsed_ms();

    let report = RunReport {
        n,
        dims: source.dims(),
        metric: source.metric_name().to_string(),
        kernel: config.kernel,
        dc_mode,
        dc,
        k: config.k,
        batch_size: batch,
        workers,
        batches: plan.batches,
        cluster_mode: match config.clusters {
            ClusterCount::Explicit(c) => format!("explicit {c}"),
            ClusterCount::Auto => "auto".to_string(),
        },
        clusters: centers.len(),
        centers: result.centers.clone(),
        mini_centers,
        seed: config.seed,
        stage1_ms,
        stage2_ms,
        stage3_ms,
        total_ms: total.elapsed_ms(),
        peak_block_entries: meter.peak_entries(),
        largest_block_entries: meter.largest_entries(),
        block_budget_entries: ((workers * batch + mini_centers) * n) as u64,
    };

    Ok(PipelineOutput {
        rho: stage1.rho,
        knn: stage1.knn,
        leading,
        gamma,
        result,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::gaussian_blobs;
    use crate::metrics::ari;
    use crate::oracle::oracle_dp;

    #[test]
    fn plan_round_robin_with_short_tail() {
        let plan = plan_shards(10, 4, 2);
        assert_eq!(plan.batches, 3);
        assert_eq!(plan.assignments[0], vec![(0, 4), (8, 2)]);
        assert_eq!(plan.assignments[1], vec![(4, 4)]);
    }

    #[test]
    fn plan_oversized_batch_leaves_workers_idle() {
        let plan = plan_shards(5, 10, 3);
        assert_eq!(plan.batches, 1);
        assert_eq!(plan.assignments[0], vec![(0, 5)]);
        assert!(plan.assignments[1].is_empty());
        assert!(plan.assignments[2].is_empty());
    }

    #[test]
    fn plan_even_split() {
        let plan = plan_shards(1000, 128, 4);
        assert_eq!(plan.batches, 8);
        for w in 0..4 {
            assert_eq!(plan.assignments[w].len(), 2);
        }
        let mut covered: Vec<(usize, usize)> = plan.assignments.iter().flatten().copied().collect();
        covered.sort_unstable();
        let mut expect_offset = 0;
        for (offset, m) in covered {
            assert_eq!(offset, expect_offset);
            expect_offset += m;
        }
        assert_eq!(expect_offset, 1000);
    }

    fn fixed_config(k: usize, batch: usize, workers: usize, c: usize) -> RunConfig {
        RunConfig {
            kernel: Kernel::Gaussian,
            dc: DcMode::Percentile(2.0),
            k,
            batch_size: batch,
            workers: Some(workers),
            clusters: ClusterCount::Explicit(c),
            seed: 7,
        }
    }

    #[test]
    fn worker_count_does_not_change_any_output_bit() {
        let (data, _) = gaussian_blobs(400, 4, 3, 8.0, 1.0, 3).unwrap();
        let source = DistanceSource::euclidean(data);
        let base = run_pipeline(&source, &fixed_config(8, 64, 1, 4)).unwrap();
        for workers in [2usize, 4, 8] {
            let out = run_pipeline(&source, &fixed_config(8, 64, workers, 4)).unwrap();
            assert_eq!(out.rho.rho, base.rho.rho);
            assert_eq!(out.knn, base.knn);
            assert_eq!(out.leading, base.leading);
            assert_eq!(out.result, base.result);
        }
    }

    #[test]
    fn pipeline_matches_oracle_on_blobs() {
        let (data, truth) = gaussian_blobs(300, 3, 2, 10.0, 0.8, 5).unwrap();
        let source = DistanceSource::euclidean(data);
        let config = fixed_config(16, 97, 3, 3);
        let out = run_pipeline(&source, &config).unwrap();
        let oracle = oracle_dp(
            &source,
            out.report.dc,
            Kernel::Gaussian,
            ClusterCount::Explicit(3),
        )
        .unwrap();
        assert_eq!(out.leading.mu, oracle.leading.mu);
        assert_eq!(out.result.centers, oracle.result.centers);
        assert_eq!(out.result.labels, oracle.result.labels);
        // Well-separated blobs with the true C recover the ground truth.
        assert_eq!(ari(&out.result.labels, &truth).unwrap(), 1.0);
    }

    #[test]
    fn identical_configs_reproduce_bitwise() {
        let (data, _) = gaussian_blobs(200, 2, 4, 6.0, 1.0, 11).unwrap();
        let source = DistanceSource::euclidean(data);
        let config = RunConfig {
            workers: Some(3),
            ..RunConfig::default()
        };
        let a = run_pipeline(&source, &config).unwrap();
        let b = run_pipeline(&source, &config).unwrap();
        assert_eq!(a.result, b.result);
        assert_eq!(a.rho.rho, b.rho.rho);
        assert_eq!(a.report.dc.to_bits(), b.report.dc.to_bits());
    }

    #[test]
    fn tracked_memory_stays_within_contract() {
        let (data, _) = gaussian_blobs(512, 3, 2, 8.0, 1.0, 1).unwrap();
        let source = DistanceSource::euclidean(data);
        let config = fixed_config(8, 64, 4, 3);
        let out = run_pipeline(&source, &config).unwrap();
        let n = 512u64;
        assert!(out.report.peak_block_entries <= out.report.block_budget_entries);
        assert!(out.report.largest_block_entries < n * n);
        assert_eq!(
            out.report.block_budget_entries,
            (4 * 64 + out.report.mini_centers as u64) * n
        );
    }

    #[test]
    fn leading_structure_is_a_valid_tree() {
        let (data, _) = gaussian_blobs(150, 3, 2, 5.0, 1.0, 13).unwrap();
        let source = DistanceSource::euclidean(data);
        let out = run_pipeline(&source, &fixed_config(4, 32, 2, 3)).unwrap();
        out.leading.validate(&out.rho).unwrap();
    }

    #[test]
    fn invalid_k_is_rejected_before_any_work() {
        let (data, _) = gaussian_blobs(10, 2, 2, 5.0, 1.0, 0).unwrap();
        let source = DistanceSource::euclidean(data);
        let config = RunConfig {
            k: 10,
            ..RunConfig::default()
        };
        assert!(matches!(
            run_pipeline(&source, &config),
            Err(Error::InvalidConfig(_))
        ));
    }
}
