//! Multi-matrix sum-product syndrome decoder.
//!
//! Bob holds a noisy key `y` and the syndromes `z^l = H_l x` of Alice's key
//! for each matrix of an ensemble. Decoding runs flooding belief
//! propagation: every check node of matrices `1..u` computes its
//! check-to-variable messages, then every variable node combines them with
//! its channel prior. Check messages carry the syndrome sign `(-1)^{z_j}`,
//! so the decoder searches for the word closest to `y` that satisfies all
//! `u` syndromes at once.
//!
//! All messages are log-likelihood ratios, positive favouring bit 0.

use crate::bits::BitBlock;
use crate::error::{Error, Result};
use crate::matrix::{MatrixEnsemble, ParityCheckMatrix};

/// How variable nodes combine check messages from different matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombiningMode {
    /// Variable-to-check messages in matrix `l` include the check messages
    /// of every matrix, as if the ensemble were one stacked Tanner graph.
    #[default]
    JointGraph,
    /// Each matrix runs its own message passing; only the final soft
    /// decision sums over matrices.
    Isolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Every message is saturated to `[-llr_clamp, llr_clamp]`.
    pub llr_clamp: f64,
    /// Weight of the previous variable-to-check message, in `[0, 1)`.
    pub damping: f64,
    pub combining_mode: CombiningMode,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iterations: 60,
            llr_clamp: 30.0,
            damping: 0.0,
            combining_mode: CombiningMode::JointGraph,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.llr_clamp > 0.0 && self.llr_clamp.is_finite()) {
            return Err(Error::Config(format!("llr_clamp {} must be positive", self.llr_clamp)));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::Config(format!("damping {} must lie in [0, 1)", self.damping)));
        }
        Ok(())
    }
}

/// Per-variable log-likelihood ratios.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Contract("empty LLR vector".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("LLR {i} is not finite")));
        }
        Ok(LlrVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Bit 1 where the LLR is negative; exact zeros decide 0.
    pub fn hard_decision(&self) -> BitBlock {
        hard_decision(&self.0)
    }
}

fn hard_decision(llrs: &[f64]) -> BitBlock {
    let words = llrs
        .chunks(64)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |w, (k, &l)| w | (((l < 0.0) as u64) << k))
        })
        .collect();
    BitBlock::from_words(words, llrs.len()).expect("LLR vectors are never empty")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub corrected: BitBlock,
    /// All `u` syndromes are satisfied by `corrected`.
    pub converged: bool,
    /// Full sweeps over the ensemble; 0 when the noisy key already matched.
    pub iterations_used: usize,
    /// Unsatisfied checks over all `u * m` checks.
    pub residual_syndrome_mismatches: usize,
}

/// `z = H key (mod 2)`.
pub fn compute_syndrome(matrix: &ParityCheckMatrix, key: &BitBlock) -> Result<BitBlock> {
    if key.len() != matrix.n() {
        return Err(Error::Contract(format!(
            "key has {} bits, matrix has {} columns",
            key.len(),
            matrix.n()
        )));
    }
    let mut z = BitBlock::zeros(matrix.m());
    for j in 0..matrix.m() {
        if row_parity(matrix, j, key) == 1 {
            z.set(j, true);
        }
    }
    Ok(z)
}

#[inline]
fn row_parity(matrix: &ParityCheckMatrix, j: usize, word: &BitBlock) -> u8 {
    matrix.row(j).iter().fold(0u8, |acc, &v| acc ^ word.bit(v as usize))
}

fn syndrome_matches(matrix: &ParityCheckMatrix, word: &BitBlock, z: &BitBlock) -> bool {
    (0..matrix.m()).all(|j| row_parity(matrix, j, word) == z.bit(j))
}

/// Number of checks of `matrix` that `word` fails against `z`.
pub fn syndrome_mismatches(matrix: &ParityCheckMatrix, word: &BitBlock, z: &BitBlock) -> usize {
    (0..matrix.m())
        .filter(|&j| row_parity(matrix, j, word) != z.bit(j))
        .count()
}

/// Channel LLRs of a binary symmetric channel observation:
/// `(1 - 2 y_i) ln((1 - e) / e)`.
pub fn init_priors(noisy_key: &BitBlock, e: f64) -> Result<LlrVector> {
    if !(e > 0.0 && e < 0.5) {
        return Err(Error::Domain(format!("crossover probability {e} outside (0, 0.5)")));
    }
    let magnitude = (-e).ln_1p() - e.ln();
    // Sign from the bit value without branching.
    let values = (0..noisy_key.len())
        .map(|i| magnitude * (1.0 - 2.0 * noisy_key.bit(i) as f64))
        .collect();
    Ok(LlrVector(values))
}

/// Message buffers for decoding against one ensemble shape.
///
/// Edge messages are indexed by the row-major edge ids of each matrix.
#[derive(Debug, Clone)]
pub struct DecoderWorkspace {
    v2c: Vec<Vec<f64>>,
    c2v: Vec<Vec<f64>>,
    priors: LlrVector,
    posterior: LlrVector,
    iteration: usize,
    var_sums: Vec<f64>,
    prefix: Vec<f64>,
}

impl DecoderWorkspace {
    pub fn new(ensemble: &MatrixEnsemble) -> Self {
        let n = ensemble.n();
        let max_row = ensemble
            .matrices()
            .iter()
            .map(|h| h.max_row_degree())
            .max()
            .unwrap_or(0);
        DecoderWorkspace {
            v2c: ensemble.matrices().iter().map(|h| vec![0.0; h.edge_count()]).collect(),
            c2v: ensemble.matrices().iter().map(|h| vec![0.0; h.edge_count()]).collect(),
            priors: LlrVector(vec![0.0; n]),
            posterior: LlrVector(vec![0.0; n]),
            iteration: 0,
            var_sums: vec![0.0; n],
            prefix: Vec::with_capacity(max_row + 1),
        }
    }

    /// Zeroes every message and the iteration counter, keeping capacity.
    pub fn reset(&mut self) {
        for buf in self.v2c.iter_mut().chain(self.c2v.iter_mut()) {
            buf.fill(0.0);
        }
        self.priors.0.fill(0.0);
        self.posterior.0.fill(0.0);
        self.var_sums.fill(0.0);
        self.iteration = 0;
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn priors(&self) -> &LlrVector {
        &self.priors
    }

    pub fn posterior(&self) -> &LlrVector {
        &self.posterior
    }

    pub fn v2c(&self, matrix_index: usize) -> &[f64] {
        &self.v2c[matrix_index]
    }

    pub fn c2v(&self, matrix_index: usize) -> &[f64] {
        &self.c2v[matrix_index]
    }

    pub fn v2c_mut(&mut self, matrix_index: usize) -> &mut [f64] {
        &mut self.v2c[matrix_index]
    }

    pub fn c2v_mut(&mut self, matrix_index: usize) -> &mut [f64] {
        &mut self.c2v[matrix_index]
    }

    /// Installs channel priors and sets every variable-to-check message to
    /// its variable's prior.
    pub fn load_priors(&mut self, ensemble: &MatrixEnsemble, priors: LlrVector, clamp: f64) -> Result<()> {
        self.check_shape(ensemble)?;
        if priors.len() != ensemble.n() {
            return Err(Error::Contract(format!(
                "{} priors for {} variables",
                priors.len(),
                ensemble.n()
            )));
        }
        self.priors = priors;
        self.posterior.0.copy_from_slice(&self.priors.0);
        for (h, v2c) in ensemble.matrices().iter().zip(self.v2c.iter_mut()) {
            for (msg, &v) in v2c.iter_mut().zip(h.edge_vars()) {
                *msg = self.priors.0[v as usize].clamp(-clamp, clamp);
            }
        }
        for c2v in &mut self.c2v {
            c2v.fill(0.0);
        }
        self.iteration = 0;
        Ok(())
    }

    fn check_shape(&self, ensemble: &MatrixEnsemble) -> Result<()> {
        let fits = self.v2c.len() == ensemble.u()
            && self.priors.len() == ensemble.n()
            && ensemble
                .matrices()
                .iter()
                .zip(&self.v2c)
                .all(|(h, buf)| h.edge_count() == buf.len());
        if fits {
            Ok(())
        } else {
            Err(Error::Contract("workspace was built for a different ensemble".into()))
        }
    }

    /// Decodes one frame, reusing this workspace.
    pub fn decode(
        &mut self,
        ensemble: &MatrixEnsemble,
        noisy_key: &BitBlock,
        syndromes: &[BitBlock],
        e: f64,
        config: &DecoderConfig,
    ) -> Result<DecodeResult> {
        self.decode_traced(ensemble, noisy_key, syndromes, e, config, |_, _| {})
    }

    /// Like [`decode`](Self::decode), calling `observer(iteration, hard)`
    /// with the hard decision after each sweep (iteration 0 is the noisy
    /// key itself).
    pub fn decode_traced<F>(
        &mut self,
        ensemble: &MatrixEnsemble,
        noisy_key: &BitBlock,
        syndromes: &[BitBlock],
        e: f64,
        config: &DecoderConfig,
        mut observer: F,
    ) -> Result<DecodeResult>
    where
        F: FnMut(usize, &BitBlock),
    {
        config.validate()?;
        check_inputs(ensemble, noisy_key, syndromes)?;
        let priors = init_priors(noisy_key, e)?;
        self.load_priors(ensemble, priors, config.llr_clamp)?;

        let all_match = |word: &BitBlock| {
            ensemble
                .matrices()
                .iter()
                .zip(syndromes)
                .all(|(h, z)| syndrome_matches(h, word, z))
        };

        let mut hard = noisy_key.clone();
        observer(0, &hard);
        let mut converged = all_match(&hard);
        while !converged && self.iteration < config.max_iterations {
            for (l, z) in syndromes.iter().enumerate() {
                c2v_update(self, ensemble, l, z, config);
            }
            self.iteration += 1;
            self.accumulate_posterior(ensemble);
            hard = self.posterior.hard_decision();
            observer(self.iteration, &hard);
            converged = all_match(&hard);
            if converged || self.iteration == config.max_iterations {
                break;
            }
            self.variable_pass(ensemble, config);
        }

        let residual = ensemble
            .matrices()
            .iter()
            .zip(syndromes)
            .map(|(h, z)| syndrome_mismatches(h, &hard, z))
            .sum();
        Ok(DecodeResult {
            corrected: hard,
            converged,
            iterations_used: self.iteration,
            residual_syndrome_mismatches: residual,
        })
    }

    /// `posterior_i = prior_i + sum over matrices and checks of c2v`.
    fn accumulate_posterior(&mut self, ensemble: &MatrixEnsemble) {
        let post = &mut self.posterior.0;
        post.copy_from_slice(&self.priors.0);
        for (h, c2v) in ensemble.matrices().iter().zip(&self.c2v) {
            for (&msg, &v) in c2v.iter().zip(h.edge_vars()) {
                post[v as usize] += msg;
            }
        }
    }

    /// Recomputes every variable-to-check message after a check pass.
    fn variable_pass(&mut self, ensemble: &MatrixEnsemble, config: &DecoderConfig) {
        match config.combining_mode {
            CombiningMode::JointGraph => {
                // The posterior already holds prior + all incoming messages.
                for l in 0..ensemble.u() {
                    let h = ensemble.get(l);
                    write_v2c(
                        &mut self.v2c[l],
                        &self.c2v[l],
                        h.edge_vars(),
                        &self.posterior.0,
                        config,
                    );
                }
            }
            CombiningMode::Isolated => {
                for l in 0..ensemble.u() {
                    v2c_update(self, ensemble, l, config);
                }
            }
        }
    }
}

fn check_inputs(ensemble: &MatrixEnsemble, noisy_key: &BitBlock, syndromes: &[BitBlock]) -> Result<()> {
    if noisy_key.len() != ensemble.n() {
        return Err(Error::Contract(format!(
            "noisy key has {} bits, ensemble has n = {}",
            noisy_key.len(),
            ensemble.n()
        )));
    }
    if syndromes.len() != ensemble.u() {
        return Err(Error::Contract(format!(
            "{} syndromes for {} matrices",
            syndromes.len(),
            ensemble.u()
        )));
    }
    if let Some(l) = syndromes.iter().position(|z| z.len() != ensemble.m()) {
        return Err(Error::Contract(format!(
            "syndrome {l} has {} bits, expected m = {}",
            syndromes[l].len(),
            ensemble.m()
        )));
    }
    Ok(())
}

/// `v2c_e = totals_var - c2v_e`, damped and clamped.
#[inline]
fn write_v2c(v2c: &mut [f64], c2v: &[f64], edge_vars: &[u32], totals: &[f64], config: &DecoderConfig) {
    let clamp = config.llr_clamp;
    if config.damping == 0.0 {
        for ((out, &own), &v) in v2c.iter_mut().zip(c2v).zip(edge_vars) {
            *out = (totals[v as usize] - own).clamp(-clamp, clamp);
        }
    } else {
        let keep = config.damping;
        for ((out, &own), &v) in v2c.iter_mut().zip(c2v).zip(edge_vars) {
            let fresh = totals[v as usize] - own;
            *out = ((1.0 - keep) * fresh + keep * *out).clamp(-clamp, clamp);
        }
    }
}

/// Recomputes all check-to-variable messages of matrix `l`:
/// `(-1)^{z_j} 2 atanh(prod over other edges of tanh(v2c / 2))`.
pub fn c2v_update(
    workspace: &mut DecoderWorkspace,
    ensemble: &MatrixEnsemble,
    l: usize,
    syndrome: &BitBlock,
    config: &DecoderConfig,
) {
    let h = ensemble.get(l);
    debug_assert_eq!(syndrome.len(), h.m());
    let clamp = config.llr_clamp;
    let v2c = &workspace.v2c[l];
    let c2v = &mut workspace.c2v[l];
    let prefix = &mut workspace.prefix;
    for j in 0..h.m() {
        let edges = h.row_edges(j);
        let sign = 1.0 - 2.0 * syndrome.bit(j) as f64;
        // prefix[k] = product of tanh over the first k edges of the row.
        prefix.clear();
        prefix.push(1.0);
        let mut acc = 1.0;
        for e in edges.clone() {
            acc *= (0.5 * v2c[e]).tanh();
            prefix.push(acc);
        }
        let mut suffix = 1.0;
        for (k, e) in edges.enumerate().rev() {
            let extrinsic = prefix[k] * suffix;
            c2v[e] = (sign * 2.0 * extrinsic.atanh()).clamp(-clamp, clamp);
            suffix *= (0.5 * v2c[e]).tanh();
        }
    }
}

/// Recomputes the variable-to-check messages of matrix `l` from the check
/// messages in scope: all matrices in joint-graph mode, matrix `l` alone in
/// isolated mode.
pub fn v2c_update(
    workspace: &mut DecoderWorkspace,
    ensemble: &MatrixEnsemble,
    l: usize,
    config: &DecoderConfig,
) {
    let sums = &mut workspace.var_sums;
    sums.copy_from_slice(&workspace.priors.0);
    let scope = match config.combining_mode {
        CombiningMode::JointGraph => 0..ensemble.u(),
        CombiningMode::Isolated => l..l + 1,
    };
    for k in scope {
        let h = ensemble.get(k);
        for (&msg, &v) in workspace.c2v[k].iter().zip(h.edge_vars()) {
            sums[v as usize] += msg;
        }
    }
    write_v2c(
        &mut workspace.v2c[l],
        &workspace.c2v[l],
        ensemble.get(l).edge_vars(),
        sums,
        config,
    );
}

/// Posterior LLRs from the current check messages of all matrices.
pub fn soft_decision<'w>(workspace: &'w mut DecoderWorkspace, ensemble: &MatrixEnsemble) -> &'w LlrVector {
    workspace.accumulate_posterior(ensemble);
    &workspace.posterior
}

/// Decodes with a fresh workspace.
pub fn decode(
    ensemble: &MatrixEnsemble,
    noisy_key: &BitBlock,
    syndromes: &[BitBlock],
    e: f64,
    config: &DecoderConfig,
) -> Result<DecodeResult> {
    DecoderWorkspace::new(ensemble).decode(ensemble, noisy_key, syndromes, e, config)
}

/// Computes Alice's `u` syndromes of `key`.
pub fn ensemble_syndromes(ensemble: &MatrixEnsemble, key: &BitBlock) -> Result<Vec<BitBlock>> {
    ensemble
        .matrices()
        .iter()
        .map(|h| compute_syndrome(h, key))
        .collect()
}
