use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use mmrecon::bench::manifest::gen_matrix as write_matrices;
use mmrecon::bench::{e_grid, measure_throughput, run_sweep, write_csv, DecodeMode, PointSpec, SweepSpec, WARMUP_FRAMES};
use mmrecon::channel::{bsc_corrupt, efficiency, efficiency_of_bits, generate_key, ChannelModel};
use mmrecon::session::{alice_run, bob_run, disclosed_information, SessionConfig, SessionReport, StreamTransport};
use mmrecon::{BitBlock, DegreeProfile, MatrixEnsemble};

use crate::settings::Settings;

pub const DEFAULT_E: f64 = 0.02;
pub const DEFAULT_FRAMES: usize = 200;
pub const DEFAULT_K: usize = 16;

/// Published GPU figure, printed next to local results for scale only.
const REFERENCE_MBPS: f64 = 102.084;

pub fn gen_matrix(s: &Settings, out: &Path) -> anyhow::Result<()> {
    let (n, m, u) = (s.n(), s.m()?, s.u());
    let started = Instant::now();
    let (manifest, ens) = write_matrices(n, m, &DegreeProfile::Regular(s.degree()), u, s.matrix_seed(), out)?;
    println!("wrote {u} matrices of {m}x{n} to {} in {:.1?}", out.display(), started.elapsed());
    for ((name, hash), h) in manifest.files.iter().zip(ens.matrices()) {
        println!("  {name}  edges={}  max row degree={}  sha256={hash}", h.edge_count(), h.max_row_degree());
    }
    println!("ensemble sha256 {}", manifest.ensemble_hash);
    println!("manifest sha256 {}", manifest.hash());
    Ok(())
}

fn describe(ens: &MatrixEnsemble, e: f64) -> String {
    format!(
        "n={} m={} u={} R={:.4} e={e}",
        ens.n(),
        ens.m(),
        ens.u(),
        1.0 - ens.m() as f64 / ens.n() as f64
    )
}

pub fn simulate(s: &Settings, calibrate: bool) -> anyhow::Result<()> {
    let ens = s.ensemble()?;
    let e = s.e.unwrap_or(DEFAULT_E);
    let decoder = s.decoder()?;
    let frames = s.frames.unwrap_or(DEFAULT_FRAMES);
    let warmup = s.warmup.unwrap_or(WARMUP_FRAMES);
    let point = PointSpec { ensemble: &ens, e, decoder: &decoder, tag_bits: s.tag_bits(), seed: s.seed() };
    let report = measure_throughput(&point, warmup, frames, s.threads(), DecodeMode::Full)?;
    let st = &report.stats;
    let f = efficiency(ens.m(), ens.n(), e)?.value();
    let disclosed = ens.u() * ens.m() + s.tag_bits() as usize;

    println!("{}", describe(&ens, e));
    println!("f (single matrix)       {f:.4}");
    println!("f (all disclosed bits)  {:.4}", efficiency_of_bits(disclosed as f64, ens.n(), e)?.value());
    println!("frames                  {} (+{warmup} warmup)", st.frames);
    println!("success rate            {:.4} (FER {:.4})", st.success_rate(), st.frame_error_rate());
    println!("converged               {}", st.converged);
    println!("undetected errors       {}", st.undetected);
    println!("mean iterations         {:.3}", st.mean_iterations());
    println!("throughput              {:.3} Mbps (reconciled bits only)", report.mbps);
    println!("mean iteration time     {:.4} ms", report.mean_iteration_ms);
    println!("mean decode time        {:.4} ms per frame", report.mean_frame_ms);
    println!("residual bit error rate {:.3e}", st.residual_error_rate());
    if let Some(d) = &report.diagnostic {
        println!("note: {d}");
    }
    if calibrate {
        let idle = measure_throughput(&point, warmup, frames, s.threads(), DecodeMode::NoOp)?;
        let ratio = idle.stats.elapsed.as_secs_f64() / st.elapsed.as_secs_f64();
        println!("harness overhead        {:.2}% of the full run", 100.0 * ratio);
    }
    Ok(())
}

pub fn bench(s: &Settings) -> anyhow::Result<()> {
    let u_values = s.u_values.clone().unwrap_or_else(|| vec![1, 2, 3]);
    let max_u = *u_values.iter().max().context("u_values is empty")?;
    let spec = SweepSpec {
        e_values: s.e_values.clone().unwrap_or_else(|| e_grid(0.03, 0.10, 0.01)),
        u_values,
        ensembles: s.rate_ensembles(max_u)?,
        frames: s.frames.unwrap_or(DEFAULT_FRAMES),
        warmup: s.warmup.unwrap_or(WARMUP_FRAMES),
        decoder: s.decoder()?,
        threads: s.threads(),
        seed: s.seed(),
        tag_bits: s.tag_bits(),
    };
    let outcome = run_sweep(&spec)?;
    match &s.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&outcome, BufWriter::new(file))?;
        }
        None => write_csv(&outcome, io::stdout().lock())?,
    }
    for skip in &outcome.skipped {
        eprintln!("warning: skipped e={} at R={}: f={:.4} <= 1", skip.e, skip.rate, skip.f);
    }
    if let Some(best) = outcome.rows.iter().max_by(|a, b| a.throughput_mbps.total_cmp(&b.throughput_mbps)) {
        eprintln!(
            "peak {:.3} Mbps at e={} u={} R={} (reference GPU figure: {REFERENCE_MBPS} Mbps)",
            best.throughput_mbps, best.e, best.u, best.rate
        );
    }
    Ok(())
}

fn session_config(s: &Settings, ens: &MatrixEnsemble) -> anyhow::Result<SessionConfig> {
    let config = SessionConfig {
        session_id: s.session_id.unwrap_or(1),
        n: ens.n(),
        k: s.k.unwrap_or(DEFAULT_K),
        e: s.e.unwrap_or(DEFAULT_E),
        decoder: s.decoder()?,
        tag_bits: s.tag_bits(),
    };
    config.validate(ens)?;
    Ok(config)
}

fn read_key(path: &Path, bits: usize) -> anyhow::Result<BitBlock> {
    let bytes = std::fs::read(path).with_context(|| format!("reading key {}", path.display()))?;
    if bytes.len() != bits.div_ceil(8) {
        bail!("{} holds {} bytes; a {bits}-bit key needs {}", path.display(), bytes.len(), bits.div_ceil(8));
    }
    Ok(BitBlock::from_bytes_le(&bytes, bits)?)
}

fn simulated_key(s: &Settings, bits: usize) -> anyhow::Result<BitBlock> {
    Ok(generate_key(bits, s.key_seed.unwrap_or(1))?)
}

fn print_session(role: &str, report: &SessionReport) {
    let d = disclosed_information(report);
    println!("{role}: {} blocks of {} bits, u={}, e={}", report.blocks(), report.n, report.u, report.e);
    println!("  verified          {}", report.successful_blocks());
    println!("  failed            {}", report.blocks() - report.successful_blocks() - report.undetected_error_events());
    println!("  undetected errors {}", report.undetected_error_events());
    println!("  success rate      {:.4}", report.success_rate());
    println!("  mean iterations   {:.3}", report.mean_iterations());
    println!("  throughput        {:.3} Mbps over {:.3?}", report.throughput_mbps(), report.elapsed);
    println!("  disclosed/block   {} bits ({} syndrome + {} tag)", d.disclosed_bits_per_block, d.syndrome_bits_per_block, d.tag_bits_per_block);
    match (d.conservative_f, d.single_matrix_f) {
        (Some(c), Some(sm)) => println!("  f                 {c:.4} all disclosed bits, {sm:.4} single matrix"),
        _ => println!("  f                 undefined (no block reconciled)"),
    }
    let residual: Option<usize> = report.outcomes.iter().map(|o| o.residual_error_count).sum();
    if let Some(r) = residual {
        println!("  residual errors   {r} bits over all blocks");
    }
}

pub fn serve(s: &Settings, listen: &str) -> anyhow::Result<()> {
    let ens = s.ensemble()?;
    let config = session_config(s, &ens)?;
    let bits = config.k * config.n;
    let (noisy, reference) = match &s.key_file {
        Some(path) => (read_key(path, bits)?, None),
        None => {
            let alice = simulated_key(s, bits)?;
            let channel = ChannelModel::new(config.e, s.channel_seed.unwrap_or(2))?;
            (bsc_corrupt(&alice, &channel).0, Some(alice))
        }
    };
    let listener = TcpListener::bind(listen).with_context(|| format!("binding {listen}"))?;
    eprintln!("listening on {}", listener.local_addr()?);
    let (stream, peer) = listener.accept()?;
    log::info!("session from {peer}");
    let transport = StreamTransport::tcp(stream)?;
    let (corrected, report) = bob_run(&noisy, &ens, &config, transport, reference.as_ref())?;
    print_session("bob", &report);
    if let Some(path) = &s.output {
        let mut out = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        out.write_all(&corrected.to_bytes_le())?;
        println!("  corrected key     written to {}", path.display());
    }
    Ok(())
}

fn connect_with_retry(addr: &str, patience: Duration) -> anyhow::Result<TcpStream> {
    let deadline = Instant::now() + patience;
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) if Instant::now() < deadline && e.kind() == io::ErrorKind::ConnectionRefused => {
                std::thread::sleep(Duration::from_millis(100));
            }
            Err(e) => return Err(e).with_context(|| format!("connecting to {addr}")),
        }
    }
}

pub fn connect(s: &Settings, addr: &str) -> anyhow::Result<()> {
    let ens = s.ensemble()?;
    let config = session_config(s, &ens)?;
    let bits = config.k * config.n;
    let key = match &s.key_file {
        Some(path) => read_key(path, bits)?,
        None => simulated_key(s, bits)?,
    };
    let transport = StreamTransport::tcp(connect_with_retry(addr, Duration::from_secs(10))?)?;
    let report = alice_run(&key, &ens, &config, transport)?;
    print_session("alice", &report);
    Ok(())
}
