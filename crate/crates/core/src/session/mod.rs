//! One-way syndrome reconciliation between Alice and Bob.
//!
//! ```text
//! Alice                          Bob
//!   HELLO(version)        ->
//!                         <-     HELLO(version)
//!   PARAMS(n, m, u, k, e, tag, ensemble hash) ->
//!                         <-     PARAMS (echo) | ERROR
//!   SYNDROMES(b) x k      ->
//!                         <-     RESULT(b) x k
//!   VERIFY(kept blocks)   ->
//!   CLOSE                 ->
//! ```
//!
//! Each SYNDROMES message carries all `u` syndromes of one block plus a
//! verification tag of Alice's block. Bob decodes the blocks in parallel,
//! checks the tag of every syndrome-consistent decision, and answers with
//! one RESULT per block. Failed blocks are discarded; nothing is
//! retransmitted.

pub mod protocol;
pub mod tag;
pub mod transport;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::BitBlock;
use crate::channel::{binary_entropy, join_frames, split_key, FrameSet};
use crate::decoder::{ensemble_syndromes, DecoderConfig, DecoderWorkspace};
use crate::error::{Error, Result};
use crate::matrix::MatrixEnsemble;
use protocol::{
    hello_payload, parse_hello, parse_syndromes, parse_verify, syndromes_payload, verify_payload, BlockResult,
    BlockStatus, MessageKind, ProtocolMessage, SessionParams, PROTOCOL_VERSION,
};
use tag::{tag_key, truncated_tag};
pub use transport::{ChannelTransport, StreamTransport, Transport};

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub session_id: u64,
    /// Block length; must equal the ensemble's `n`.
    pub n: usize,
    /// Number of blocks per session.
    pub k: usize,
    /// Crossover probability Bob decodes with.
    pub e: f64,
    pub decoder: DecoderConfig,
    /// Verification tag width in bits, at most 64.
    pub tag_bits: u32,
}

impl SessionConfig {
    pub fn validate(&self, ensemble: &MatrixEnsemble) -> Result<()> {
        if self.n != ensemble.n() {
            return Err(Error::Config(format!("n = {} but ensemble has n = {}", self.n, ensemble.n())));
        }
        if self.k == 0 || self.k > u32::MAX as usize {
            return Err(Error::Config(format!("invalid block count k = {}", self.k)));
        }
        if self.tag_bits > 64 {
            return Err(Error::Config(format!("tag width {} exceeds 64 bits", self.tag_bits)));
        }
        if !(self.e > 0.0 && self.e < 0.5) {
            return Err(Error::Config(format!("crossover probability {} outside (0, 0.5)", self.e)));
        }
        self.decoder.validate()
    }

    fn params(&self, ensemble: &MatrixEnsemble) -> SessionParams {
        SessionParams {
            n: self.n as u32,
            m: ensemble.m() as u32,
            u: ensemble.u() as u16,
            k: self.k as u32,
            e: self.e,
            tag_bits: self.tag_bits as u8,
            ensemble_hash: ensemble.content_hash(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockOutcome {
    pub block_index: usize,
    pub status: BlockStatus,
    pub iterations_used: usize,
    /// `u * m` syndrome bits plus the tag.
    pub disclosed_bits: usize,
    /// Bit errors left in Bob's block; only known in simulation.
    pub residual_error_count: Option<usize>,
}

impl BlockOutcome {
    /// All syndromes matched, whether or not the tag agreed.
    pub fn converged(&self) -> bool {
        self.status != BlockStatus::Failed
    }

    pub fn verified(&self) -> bool {
        self.status == BlockStatus::Verified
    }
}

#[derive(Debug, Clone)]
pub struct SessionReport {
    pub n: usize,
    pub m: usize,
    pub u: usize,
    pub e: f64,
    pub tag_bits: u32,
    pub outcomes: Vec<BlockOutcome>,
    /// Decoder wall-clock time per block, aligned with `outcomes`.
    pub block_times: Vec<Duration>,
    pub elapsed: Duration,
}

impl SessionReport {
    fn empty(n: usize, m: usize, u: usize, e: f64, tag_bits: u32) -> Self {
        SessionReport {
            n,
            m,
            u,
            e,
            tag_bits,
            outcomes: Vec::new(),
            block_times: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn blocks(&self) -> usize {
        self.outcomes.len()
    }

    pub fn successful_blocks(&self) -> usize {
        self.outcomes.iter().filter(|o| o.verified()).count()
    }

    /// Converged-and-verified blocks over all blocks.
    pub fn success_rate(&self) -> f64 {
        if self.outcomes.is_empty() {
            0.0
        } else {
            self.successful_blocks() as f64 / self.outcomes.len() as f64
        }
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.outcomes.is_empty() {
            return 0.0;
        }
        self.outcomes.iter().map(|o| o.iterations_used as f64).sum::<f64>() / self.outcomes.len() as f64
    }

    /// Successfully reconciled sifted bits per second of session time, in Mbps.
    pub fn throughput_mbps(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs == 0.0 {
            return 0.0;
        }
        (self.successful_blocks() * self.n) as f64 / secs / 1e6
    }

    pub fn undetected_error_events(&self) -> usize {
        self.outcomes.iter().filter(|o| o.status == BlockStatus::TagMismatch).count()
    }

    /// Efficiency realised by one block's disclosure.
    pub fn f_actual(&self, block: usize) -> f64 {
        let h = binary_entropy(self.e).unwrap_or(f64::NAN);
        self.outcomes[block].disclosed_bits as f64 / (self.n as f64 * h)
    }
}

/// Disclosure accounting for a finished session.
#[derive(Debug, Clone, PartialEq)]
pub struct Disclosure {
    pub syndrome_bits_per_block: usize,
    pub tag_bits_per_block: usize,
    pub disclosed_bits_per_block: usize,
    pub total_disclosed_bits: usize,
    /// Every transmitted bit counted: `(u m + tag) / (n h(e))`.
    pub conservative_f: Option<f64>,
    /// Single-matrix accounting `m / (n h(e))`, as commonly reported for
    /// multi-matrix schemes.
    pub single_matrix_f: Option<f64>,
}

pub fn disclosed_information(report: &SessionReport) -> Disclosure {
    let syndrome_bits = report.u * report.m;
    let per_block = syndrome_bits + report.tag_bits as usize;
    let h = binary_entropy(report.e).ok().filter(|&h| h > 0.0);
    let defined = report.successful_blocks() > 0;
    let f = |bits: usize| h.filter(|_| defined).map(|h| bits as f64 / (report.n as f64 * h));
    Disclosure {
        syndrome_bits_per_block: syndrome_bits,
        tag_bits_per_block: report.tag_bits as usize,
        disclosed_bits_per_block: per_block,
        total_disclosed_bits: per_block * report.blocks(),
        conservative_f: f(per_block),
        single_matrix_f: f(report.m),
    }
}

/// A session that stopped early, with whatever was completed.
#[derive(Debug, Error)]
#[error("session aborted: {error}")]
pub struct SessionAbort {
    #[source]
    pub error: Error,
    pub partial: Box<SessionReport>,
}

fn abort(error: Error, partial: SessionReport) -> SessionAbort {
    SessionAbort { error, partial: Box::new(partial) }
}

fn check_hello(msg: ProtocolMessage, session_id: Option<u64>) -> Result<ProtocolMessage> {
    let msg = msg.expect(MessageKind::Hello)?;
    if let Some(id) = session_id {
        if msg.session_id != id {
            return Err(Error::Protocol(format!("session id {} does not match {id}", msg.session_id)));
        }
    }
    let version = parse_hello(&msg.payload)?;
    if version != PROTOCOL_VERSION {
        return Err(Error::Protocol(format!(
            "protocol version {version} not supported (expected {PROTOCOL_VERSION})"
        )));
    }
    Ok(msg)
}

/// Alice's side: send the syndromes of every block and collect Bob's verdicts.
pub fn alice_run<T: Transport>(
    key: &BitBlock,
    ensemble: &MatrixEnsemble,
    config: &SessionConfig,
    mut transport: T,
) -> Result<SessionReport, SessionAbort> {
    let start = Instant::now();
    let mut report = SessionReport::empty(config.n, ensemble.m(), ensemble.u(), config.e, config.tag_bits);
    let sid = config.session_id;
    let run = |report: &mut SessionReport, transport: &mut T| -> Result<()> {
        config.validate(ensemble)?;
        if key.len() != config.n * config.k {
            return Err(Error::Contract(format!(
                "key has {} bits, session needs k * n = {}",
                key.len(),
                config.n * config.k
            )));
        }
        let frames = split_key(key, config.n)?;

        transport.send(&ProtocolMessage::new(MessageKind::Hello, sid, 0, hello_payload()))?;
        if let Err(e) = transport.recv().and_then(|m| check_hello(m, Some(sid))) {
            if matches!(e, Error::Protocol(_)) {
                let _ = transport.send(&ProtocolMessage::error(sid, &e.to_string()));
            }
            return Err(e);
        }
        let params = config.params(ensemble);
        transport.send(&ProtocolMessage::new(MessageKind::Params, sid, 0, params.to_bytes()))?;
        let echo = transport.recv()?.expect(MessageKind::Params)?;
        if SessionParams::from_bytes(&echo.payload)? != params {
            return Err(Error::Protocol("Bob acknowledged different parameters".into()));
        }

        for (b, block) in frames.blocks().iter().enumerate() {
            let syndromes = ensemble_syndromes(ensemble, block)?;
            let tag = truncated_tag(block, tag_key(sid, b as u32), config.tag_bits);
            let payload = syndromes_payload(&syndromes, &tag);
            transport.send(&ProtocolMessage::new(MessageKind::Syndromes, sid, b as u32, payload))?;
        }

        let disclosed = ensemble.u() * ensemble.m() + config.tag_bits as usize;
        let mut results: Vec<Option<BlockResult>> = vec![None; config.k];
        for _ in 0..config.k {
            let msg = transport.recv()?.expect(MessageKind::Result)?;
            let b = msg.block_index as usize;
            if b >= config.k || results[b].is_some() {
                return Err(Error::Protocol(format!("unexpected RESULT for block {b}")));
            }
            results[b] = Some(BlockResult::from_bytes(&msg.payload)?);
        }
        let results: Vec<BlockResult> = results.into_iter().map(|r| r.expect("every block answered")).collect();
        for (b, r) in results.iter().enumerate() {
            report.outcomes.push(BlockOutcome {
                block_index: b,
                status: r.status,
                iterations_used: r.iterations as usize,
                disclosed_bits: disclosed,
                residual_error_count: None,
            });
            report.block_times.push(Duration::from_nanos(r.decode_nanos));
        }

        let kept: Vec<bool> = report.outcomes.iter().map(|o| o.verified()).collect();
        transport.send(&ProtocolMessage::new(MessageKind::Verify, sid, 0, verify_payload(&kept)))?;
        transport.send(&ProtocolMessage::new(MessageKind::Close, sid, 0, Vec::new()))?;
        Ok(())
    };
    let outcome = run(&mut report, &mut transport);
    report.elapsed = start.elapsed();
    match outcome {
        Ok(()) => Ok(report),
        Err(e) => Err(abort(e, report)),
    }
}

/// Bob's side: decode every block against Alice's syndromes.
///
/// Returns the concatenated per-block decisions. Blocks that fail are left
/// as decoded and marked in the report. With `reference` set (simulation),
/// the report also counts residual bit errors per block.
pub fn bob_run<T: Transport>(
    noisy_key: &BitBlock,
    ensemble: &MatrixEnsemble,
    config: &SessionConfig,
    mut transport: T,
    reference: Option<&BitBlock>,
) -> Result<(BitBlock, SessionReport), SessionAbort> {
    let start = Instant::now();
    let mut report = SessionReport::empty(config.n, ensemble.m(), ensemble.u(), config.e, config.tag_bits);
    let mut corrected = None;
    let run = |report: &mut SessionReport, transport: &mut T, corrected: &mut Option<BitBlock>| -> Result<()> {
        config.validate(ensemble)?;
        if noisy_key.len() != config.n * config.k {
            return Err(Error::Contract(format!(
                "noisy key has {} bits, session needs k * n = {}",
                noisy_key.len(),
                config.n * config.k
            )));
        }
        let hello = match transport.recv().and_then(|m| check_hello(m, None)) {
            Ok(m) => m,
            Err(e) => {
                if matches!(e, Error::Protocol(_)) {
                    let _ = transport.send(&ProtocolMessage::error(0, &e.to_string()));
                }
                return Err(e);
            }
        };
        let sid = hello.session_id;
        transport.send(&ProtocolMessage::new(MessageKind::Hello, sid, 0, hello_payload()))?;

        let msg = transport.recv()?.expect(MessageKind::Params)?;
        let params = SessionParams::from_bytes(&msg.payload)?;
        let ours = SessionConfig { session_id: sid, ..config.clone() }.params(ensemble);
        let mismatch = if params.ensemble_hash != ours.ensemble_hash {
            Some("ensemble content hash differs".to_string())
        } else if (params.n, params.m, params.u, params.k, params.tag_bits) != (ours.n, ours.m, ours.u, ours.k, ours.tag_bits) {
            Some(format!("parameters differ: Alice {params:?}, Bob {ours:?}"))
        } else {
            None
        };
        if let Some(why) = mismatch {
            let _ = transport.send(&ProtocolMessage::error(sid, &why));
            return Err(Error::Protocol(why));
        }
        transport.send(&ProtocolMessage::new(MessageKind::Params, sid, 0, params.to_bytes()))?;

        let frames = split_key(noisy_key, config.n)?;
        let mut received: Vec<Option<(Vec<BitBlock>, Vec<u8>)>> = vec![None; config.k];
        for _ in 0..config.k {
            let msg = transport.recv()?.expect(MessageKind::Syndromes)?;
            let b = msg.block_index as usize;
            if msg.session_id != sid || b >= config.k || received[b].is_some() {
                return Err(Error::Protocol(format!("unexpected SYNDROMES for block {b}")));
            }
            received[b] = Some(parse_syndromes(&msg.payload, ensemble.u(), ensemble.m(), config.tag_bits)?);
        }
        let jobs: Vec<(usize, Vec<BitBlock>, Vec<u8>)> = received
            .into_iter()
            .enumerate()
            .map(|(b, r)| {
                let (z, t) = r.expect("every block received");
                (b, z, t)
            })
            .collect();

        let decoded = jobs
            .into_par_iter()
            .map_init(
                || DecoderWorkspace::new(ensemble),
                |ws, (b, syndromes, alice_tag)| -> Result<(BitBlock, BlockResult)> {
                    let t0 = Instant::now();
                    let r = ws.decode(ensemble, &frames.blocks()[b], &syndromes, config.e, &config.decoder)?;
                    let status = if !r.converged {
                        BlockStatus::Failed
                    } else if truncated_tag(&r.corrected, tag_key(sid, b as u32), config.tag_bits) == alice_tag {
                        BlockStatus::Verified
                    } else {
                        BlockStatus::TagMismatch
                    };
                    let result = BlockResult {
                        status,
                        iterations: r.iterations_used as u32,
                        decode_nanos: t0.elapsed().as_nanos() as u64,
                    };
                    Ok((r.corrected, result))
                },
            )
            .collect::<Result<Vec<_>>>()?;

        let reference_frames = reference.map(|r| split_key(r, config.n)).transpose()?;
        let disclosed = ensemble.u() * ensemble.m() + config.tag_bits as usize;
        let mut blocks = Vec::with_capacity(config.k);
        for (b, (block, result)) in decoded.into_iter().enumerate() {
            transport.send(&ProtocolMessage::new(MessageKind::Result, sid, b as u32, result.to_bytes()))?;
            report.outcomes.push(BlockOutcome {
                block_index: b,
                status: result.status,
                iterations_used: result.iterations as usize,
                disclosed_bits: disclosed,
                residual_error_count: reference_frames
                    .as_ref()
                    .map(|f: &FrameSet| f.blocks()[b].hamming_distance(&block)),
            });
            report.block_times.push(Duration::from_nanos(result.decode_nanos));
            blocks.push(block);
        }
        *corrected = Some(join_frames(&FrameSet::new(blocks)?)?);

        let verify = transport.recv()?.expect(MessageKind::Verify)?;
        let kept = parse_verify(&verify.payload, config.k)?;
        let ours: Vec<bool> = report.outcomes.iter().map(|o| o.verified()).collect();
        if kept != ours {
            return Err(Error::Protocol("Alice kept a different set of blocks".into()));
        }
        transport.recv()?.expect(MessageKind::Close)?;
        Ok(())
    };
    let outcome = run(&mut report, &mut transport, &mut corrected);
    report.elapsed = start.elapsed();
    match (outcome, corrected) {
        (Ok(()), Some(c)) => Ok((c, report)),
        (Ok(()), None) => unreachable!("successful session always produces a key"),
        (Err(e), _) => Err(abort(e, report)),
    }
}

/// Runs both sides over an in-process transport on two threads.
pub fn run_in_process(
    alice_key: &BitBlock,
    bob_key: &BitBlock,
    ensemble: &MatrixEnsemble,
    config: &SessionConfig,
    simulate: bool,
) -> Result<(SessionReport, BitBlock, SessionReport)> {
    let (a, b) = ChannelTransport::pair();
    std::thread::scope(|s| {
        let bob = s.spawn(|| bob_run(bob_key, ensemble, config, b, simulate.then_some(alice_key)));
        let alice = alice_run(alice_key, ensemble, config, a);
        let bob = bob.join().expect("Bob's thread panicked");
        let alice = alice.map_err(|a| a.error)?;
        let (corrected, bob) = bob.map_err(|a| a.error)?;
        Ok((alice, corrected, bob))
    })
}
