//! Run settings shared by the config file and the command line.
//!
//! The config file is TOML-style `key = value` text, one key per line,
//! `#` starting a comment. Keys are the long flag names with `-` written
//! as `_`. Strings are quoted; lists use brackets:
//!
//! ```text
//! n = 16384
//! rate = 0.5
//! u_values = [1, 2, 3]
//! combining = "joint"
//! ```
//!
//! A flag given on the command line overrides the same key in the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use mmrecon::bench::manifest::{cached_ensemble, load_ensemble, Manifest, MANIFEST_FILE};
use mmrecon::decoder::{CombiningMode, DecoderConfig};
use mmrecon::{build_ensemble, DegreeProfile, MatrixEnsemble};
use serde::Deserialize;

pub const DEFAULT_N: usize = 1 << 14;
pub const DEFAULT_RATE: f64 = 0.5;
pub const DEFAULT_U: usize = 3;
pub const DEFAULT_DEGREE: usize = 3;

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Block length
    #[arg(long, help_heading = "Matrices")]
    pub n: Option<usize>,
    /// Checks per matrix; overrides --rate
    #[arg(long, help_heading = "Matrices")]
    pub m: Option<usize>,
    /// Code rate 1 - m/n
    #[arg(long, help_heading = "Matrices")]
    pub rate: Option<f64>,
    /// Matrices per ensemble
    #[arg(long, help_heading = "Matrices")]
    pub u: Option<usize>,
    /// Column degree of every variable node
    #[arg(long, help_heading = "Matrices")]
    pub degree: Option<usize>,
    /// Seed of the first matrix; member l uses seed + l
    #[arg(long, help_heading = "Matrices")]
    pub matrix_seed: Option<u64>,
    /// Directory holding (or receiving) alist files and a manifest
    #[arg(long, help_heading = "Matrices")]
    pub matrix_dir: Option<PathBuf>,

    #[arg(long, help_heading = "Decoder")]
    pub max_iterations: Option<usize>,
    /// Weight of the previous variable-to-check message, in [0, 1)
    #[arg(long, help_heading = "Decoder")]
    pub damping: Option<f64>,
    #[arg(long, help_heading = "Decoder")]
    pub llr_clamp: Option<f64>,
    /// `joint` or `isolated`
    #[arg(long, help_heading = "Decoder")]
    pub combining: Option<String>,

    /// Crossover probability of the channel
    #[arg(long, help_heading = "Simulation")]
    pub e: Option<f64>,
    /// Measured frames per point
    #[arg(long, help_heading = "Simulation")]
    pub frames: Option<usize>,
    /// Untimed frames run before measuring
    #[arg(long, help_heading = "Simulation")]
    pub warmup: Option<usize>,
    /// Worker threads (0: one per CPU)
    #[arg(long, help_heading = "Simulation")]
    pub threads: Option<usize>,
    /// Seed of the simulated keys and channel noise
    #[arg(long, help_heading = "Simulation")]
    pub seed: Option<u64>,
    /// Verification tag width in bits
    #[arg(long, help_heading = "Simulation")]
    pub tag_bits: Option<u32>,

    #[arg(long, value_delimiter = ',', num_args = 1.., help_heading = "Sweep")]
    pub e_values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1.., help_heading = "Sweep")]
    pub u_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1.., help_heading = "Sweep")]
    pub rates: Option<Vec<f64>>,
    /// Output file (CSV for bench, corrected key for serve)
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,

    /// Blocks per session
    #[arg(long, help_heading = "Session")]
    pub k: Option<usize>,
    #[arg(long, help_heading = "Session")]
    pub session_id: Option<u64>,
    /// Raw key file, k*n bits, little-endian bit order; simulated when absent
    #[arg(long, help_heading = "Session")]
    pub key_file: Option<PathBuf>,
    /// Seed of the simulated sifted key
    #[arg(long, help_heading = "Session")]
    pub key_seed: Option<u64>,
    /// Seed of the simulated channel noise on Bob's copy
    #[arg(long, help_heading = "Session")]
    pub channel_seed: Option<u64>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Settings::parse_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse_str(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// `self` wins wherever it is set.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(
            self, base, n, m, rate, u, degree, matrix_seed, matrix_dir, max_iterations, damping, llr_clamp,
            combining, e, frames, warmup, threads, seed, tag_bits, e_values, u_values, rates, output, k,
            session_id, key_file, key_seed, channel_seed
        )
    }

    /// Flags over the optional config file.
    pub fn resolve(flags: Settings, config: Option<&Path>) -> anyhow::Result<Settings> {
        Ok(match config {
            Some(p) => flags.over(Settings::from_file(p)?),
            None => flags,
        })
    }

    pub fn decoder(&self) -> anyhow::Result<DecoderConfig> {
        let d = DecoderConfig::default();
        let combining_mode = match self.combining.as_deref() {
            None | Some("joint") => CombiningMode::JointGraph,
            Some("isolated") => CombiningMode::Isolated,
            Some(other) => bail!("combining must be `joint` or `isolated`, not {other:?}"),
        };
        let cfg = DecoderConfig {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            llr_clamp: self.llr_clamp.unwrap_or(d.llr_clamp),
            damping: self.damping.unwrap_or(d.damping),
            combining_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    pub fn m_for_rate(&self, n: usize, rate: f64) -> anyhow::Result<usize> {
        if !(rate > 0.0 && rate < 1.0) {
            bail!("code rate {rate} outside (0, 1)");
        }
        Ok(((1.0 - rate) * n as f64).round() as usize)
    }

    pub fn m(&self) -> anyhow::Result<usize> {
        match self.m {
            Some(m) => Ok(m),
            None => self.m_for_rate(self.n(), self.rate.unwrap_or(DEFAULT_RATE)),
        }
    }

    pub fn u(&self) -> usize {
        self.u.unwrap_or(DEFAULT_U)
    }

    pub fn degree(&self) -> usize {
        self.degree.unwrap_or(DEFAULT_DEGREE)
    }

    pub fn matrix_seed(&self) -> u64 {
        self.matrix_seed.unwrap_or(1)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn tag_bits(&self) -> u32 {
        self.tag_bits.unwrap_or(64)
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(0)
    }

    /// The ensemble for a single code rate.
    ///
    /// An existing `matrix_dir` with a manifest is loaded as is (cut down
    /// to `u` members when `u` is given); otherwise matrices are built,
    /// and stored when `matrix_dir` is set.
    pub fn ensemble(&self) -> anyhow::Result<MatrixEnsemble> {
        if let Some(dir) = &self.matrix_dir {
            if dir.join(MANIFEST_FILE).exists() {
                let (manifest, ens) = load_ensemble(dir)?;
                self.check_manifest(&manifest)?;
                return Ok(match self.u {
                    Some(u) => ens.prefix(u)?,
                    None => ens,
                });
            }
        }
        let (n, m, u) = (self.n(), self.m()?, self.u());
        log::info!("building {u} PEG matrices of {m}x{n}");
        let ens = build_ensemble(n, m, &DegreeProfile::Regular(self.degree()), u, self.matrix_seed())?;
        if let Some(dir) = &self.matrix_dir {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            mmrecon::bench::manifest::write_ensemble(&ens, self.matrix_seed(), &self.degree().to_string(), dir)?;
        }
        Ok(ens)
    }

    fn check_manifest(&self, manifest: &Manifest) -> anyhow::Result<()> {
        if let Some(n) = self.n {
            if n != manifest.n {
                bail!("n = {n} requested but the matrix directory holds n = {}", manifest.n);
            }
        }
        if let Some(m) = self.m {
            if m != manifest.m {
                bail!("m = {m} requested but the matrix directory holds m = {}", manifest.m);
            }
        }
        Ok(())
    }

    /// One ensemble per entry of `rates` (or the single configured rate),
    /// each with `u` members. With `matrix_dir` set, ensembles are cached
    /// in subdirectories keyed by their parameters.
    pub fn rate_ensembles(&self, u: usize) -> anyhow::Result<Vec<MatrixEnsemble>> {
        let n = self.n();
        let shapes: Vec<usize> = match &self.rates {
            Some(rates) => rates.iter().map(|&r| self.m_for_rate(n, r)).collect::<anyhow::Result<_>>()?,
            None => vec![self.m()?],
        };
        shapes
            .into_iter()
            .map(|m| {
                let (degree, seed) = (self.degree(), self.matrix_seed());
                Ok(match &self.matrix_dir {
                    Some(root) => {
                        let dir = root.join(format!("n{n}-m{m}-d{degree}-s{seed}"));
                        cached_ensemble(&dir, n, m, degree, u, seed)?
                    }
                    None => build_ensemble(n, m, &DegreeProfile::Regular(degree), u, seed)?,
                })
            })
            .collect()
    }
}
