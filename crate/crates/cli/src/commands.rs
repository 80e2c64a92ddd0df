//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use faithdp::datagen::{five_spirals_with, gaussian_blobs, SpiralParams};
use faithdp::density::estimate_dc;
use faithdp::metrics::{ari, nmi};
use faithdp::oracle::{oracle_dp, ORACLE_MAX_POINTS};
use faithdp::parallel::DC_SAMPLE_SIZE;
use faithdp::{run_pipeline, ClusterCount, DataMatrix, DistanceSource, PrecomputedMatrix, ROOT};

use crate::io::{read_labels, read_matrix, write_fdpm, write_labels};
use crate::{
    run_config, BenchArgs, CliError, ClusterArgs, DataKind, EvalArgs, GenArgs, MetricArg,
    OracleArgs,
};

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn generate(args: &GenArgs) -> Result<(DataMatrix, Vec<u32>, serde_json::Value), CliError> {
    match args.kind {
        DataKind::Spirals5 => {
            let defaults = SpiralParams::default();
            let params = SpiralParams {
                a: args.spiral_a.unwrap_or(defaults.a),
                b: args.spiral_b.unwrap_or(defaults.b),
                t_start: args.t_start.unwrap_or(defaults.t_start),
                t_end: args.t_end.unwrap_or(defaults.t_end),
                noise_sigma: args.noise,
            };
            let (data, labels) = five_spirals_with(args.n, &params, args.seed)?;
            let meta = serde_json::json!({
                "kind": "spirals5",
                "n": args.n,
                "seed": args.seed,
                "a": params.a,
                "b": params.b,
                "t_start": params.t_start,
                "t_end": params.t_end,
                "noise_sigma": params.noise_sigma,
                "clusters": 5,
            });
            Ok((data, labels, meta))
        }
        DataKind::Blobs => {
            let (data, labels) = gaussian_blobs(
                args.n,
                args.clusters,
                args.dims,
                args.separation,
                args.sigma,
                args.seed,
            )?;
            let meta = serde_json::json!({
                "kind": "blobs",
                "n": args.n,
                "seed": args.seed,
                "clusters": args.clusters,
                "dims": args.dims,
                "separation": args.separation,
                "sigma": args.sigma,
            });
            Ok((data, labels, meta))
        }
    }
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let (data, labels, meta) = generate(args)?;
    ensure_dir(&args.out)?;
    write_fdpm(&args.out.join("points.fdpm"), &data)?;
    write_labels(&args.out.join("labels.csv"), &labels)?;
    let meta_path = args.out.join("meta.json");
    std::fs::write(&meta_path, format!("{:#}\n", meta))
        .map_err(|e| CliError::io(format!("{}: {e}", meta_path.display())))?;
    eprintln!(
        "wrote {} points to {}",
        data.n(),
        args.out.join("points.fdpm").display()
    );
    Ok(())
}

fn load_source(input: &Path, metric: MetricArg) -> Result<DistanceSource, CliError> {
    let data = read_matrix(input)?;
    match metric {
        MetricArg::Euclidean => Ok(DistanceSource::euclidean(data)),
        MetricArg::Cosine => Ok(DistanceSource::cosine(data)?),
        MetricArg::Precomputed => {
            if data.n() != data.d() {
                return Err(CliError::data(format!(
                    "precomputed distances must form a square matrix, got {} x {}",
                    data.n(),
                    data.d()
                )));
            }
            if data.n() > ORACLE_MAX_POINTS {
                return Err(CliError::guard(format!(
                    "precomputed matrices are limited to n <= {ORACLE_MAX_POINTS} \
                     (got {}); supply embeddings instead",
                    data.n()
                )));
            }
            let n = data.n();
            let store = PrecomputedMatrix::new(n, data.values().to_vec())?;
            Ok(DistanceSource::precomputed(store))
        }
    }
}

pub fn cluster(args: &ClusterArgs) -> Result<(), CliError> {
    let source = load_source(&args.input, args.metric)?;
    let config = run_config(
        args.kernel,
        args.dc,
        args.dc_percentile,
        args.k,
        args.batch,
        args.workers,
        args.clusters,
        args.seed,
    )?;
    let out = run_pipeline(&source, &config)?;
    ensure_dir(&args.out)?;
    write_labels(&args.out.join("labels.csv"), &out.result.labels)?;
    let report_path = args.out.join("report.json");
    let json =
        serde_json::to_string_pretty(&out.report).map_err(|e| CliError::io(e.to_string()))?;
    std::fs::write(&report_path, json + "\n")
        .map_err(|e| CliError::io(format!("{}: {e}", report_path.display())))?;
    eprintln!(
        "clustered {} points into {} clusters (|M| = {}, {:.1} ms)",
        out.report.n, out.report.clusters, out.report.mini_centers, out.report.total_ms
    );
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let source = load_source(&args.input, args.metric)?;
    // Resolve d_c exactly as the pipeline does so the two paths can be
    // diffed under identical configs.
    let dc = match args.dc {
        Some(v) => v,
        None => estimate_dc(&source, args.dc_percentile, DC_SAMPLE_SIZE, args.seed)?,
    };
    let clusters = match args.clusters {
        Some(c) => ClusterCount::Explicit(c),
        None => ClusterCount::Auto,
    };
    let out = oracle_dp(&source, dc, args.kernel.into(), clusters)?;
    ensure_dir(&args.out)?;
    write_labels(&args.out.join("labels.csv"), &out.result.labels)?;

    let vectors_path = args.out.join("vectors.csv");
    let mut w = BufWriter::new(
        File::create(&vectors_path)
            .map_err(|e| CliError::io(format!("{}: {e}", vectors_path.display())))?,
    );
    let mut emit = |line: String| {
        writeln!(w, "{line}").map_err(|e| CliError::io(format!("{}: {e}", vectors_path.display())))
    };
    emit("index,rho,mu,delta,gamma".to_string())?;
    for i in 0..out.rho.n() {
        emit(format!(
            "{i},{},{},{},{}",
            out.rho.rho[i], out.leading.mu[i], out.leading.delta[i], out.gamma[i]
        ))?;
    }
    w.flush()
        .map_err(|e| CliError::io(format!("{}: {e}", vectors_path.display())))?;
    eprintln!(
        "reference run: {} points, {} clusters, root at {}",
        out.rho.n(),
        out.result.centers.len(),
        out.leading
            .mu
            .iter()
            .position(|&m| m == ROOT)
            .unwrap_or(usize::MAX)
    );
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let pred = read_labels(&args.pred)?;
    let truth = read_labels(&args.truth)?;
    // Metric preconditions (equal lengths) are usage errors here.
    let nmi_v = nmi(&pred, &truth).map_err(|e| CliError::usage(e.to_string()))?;
    let ari_v = ari(&pred, &truth).map_err(|e| CliError::usage(e.to_string()))?;
    println!("{}", serde_json::json!({ "nmi": nmi_v, "ari": ari_v }));
    Ok(())
}

fn parse_sizes(list: &str) -> Result<Vec<usize>, CliError> {
    let mut sizes = Vec::new();
    for part in list.split(',') {
        let part = part.trim().to_lowercase();
        if part.is_empty() {
            continue;
        }
        let (digits, mult) = match part.strip_suffix('m') {
            Some(d) => (d, 1_000_000),
            None => match part.strip_suffix('k') {
                Some(d) => (d, 1000),
                None => (part.as_str(), 1),
            },
        };
        let base: usize = digits
            .parse()
            .map_err(|_| CliError::usage(format!("bad size `{part}`")))?;
        sizes.push(base * mult);
    }
    if sizes.is_empty() {
        return Err(CliError::usage("--sizes is empty"));
    }
    Ok(sizes)
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    let sizes = parse_sizes(&args.sizes)?;
    let mut rows = vec![
        "n,d,kernel,dc,k,batch,workers,clusters,mini_centers,stage1_ms,stage2_ms,stage3_ms,total_ms,peak_block_entries,distance_pairs,nmi,ari"
            .to_string(),
    ];
    for &n in &sizes {
        let (data, truth, default_c) = match args.kind {
            DataKind::Spirals5 => {
                let (d, t) = five_spirals_with(n, &SpiralParams::default(), args.seed)?;
                (d, t, 5)
            }
            DataKind::Blobs => {
                let (d, t) = gaussian_blobs(n, 5, args.dims, 10.0, 1.0, args.seed)?;
                (d, t, 5)
            }
        };
        let source = DistanceSource::euclidean(data);
        let config = run_config(
            args.kernel,
            None,
            args.dc_percentile,
            args.k,
            args.batch,
            args.workers,
            Some(args.clusters.unwrap_or(default_c)),
            args.seed,
        )?;
        let out = run_pipeline(&source, &config)?;
        let nmi_v = nmi(&out.result.labels, &truth)?;
        let ari_v = ari(&out.result.labels, &truth)?;
        // Distance work scales with n^2 plus the mini-center rows.
        let pairs = (n as u64) * (n as u64) + (out.report.mini_centers as u64) * (n as u64);
        let r = &out.report;
        let kernel = format!("{:?}", r.kernel).to_lowercase();
        rows.push(format!(
            "{n},{},{kernel},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{},{pairs},{nmi_v},{ari_v}",
            r.dims.unwrap_or(0),
            r.dc,
            r.k,
            r.batch_size,
            r.workers,
            r.clusters,
            r.mini_centers,
            r.stage1_ms,
            r.stage2_ms,
            r.stage3_ms,
            r.total_ms,
            r.peak_block_entries,
        ));
        eprintln!(
            "n={n}: {:.1} ms total, nmi={nmi_v:.4}, ari={ari_v:.4}",
            r.total_ms
        );
    }
    let table = rows.join("\n") + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, table)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        None => print!("{table}"),
    }
    Ok(())
}
