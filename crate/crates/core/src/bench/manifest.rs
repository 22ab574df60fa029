//! Matrix ensembles on disk: one alist file per member plus a manifest.
//!
//! ```text
//! # mmrecon matrix ensemble
//! n = 65536
//! m = 32768
//! u = 3
//! seed = 1
//! degree = 3
//! matrix = H0.alist <sha256>
//! matrix = H1.alist <sha256>
//! matrix = H2.alist <sha256>
//! ensemble = <sha256 over all members>
//! ```

use std::fmt::{self, Write as _};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{build_ensemble, load_alist, to_alist_string, DegreeProfile, MatrixEnsemble};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub n: usize,
    pub m: usize,
    pub u: usize,
    pub seed: u64,
    /// Column degree, or `irregular`.
    pub degree: String,
    /// File name and SHA-256 of each member, in order.
    pub files: Vec<(String, String)>,
    pub ensemble_hash: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn degree_label(profile: &DegreeProfile) -> String {
    match profile {
        DegreeProfile::Regular(d) => d.to_string(),
        DegreeProfile::PerColumn(_) => "irregular".into(),
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# mmrecon matrix ensemble")?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "u = {}", self.u)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "degree = {}", self.degree)?;
        for (name, hash) in &self.files {
            writeln!(f, "matrix = {name} {hash}")?;
        }
        writeln!(f, "ensemble = {}", self.ensemble_hash)
    }
}

impl Manifest {
    /// SHA-256 of the rendered manifest.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_string().as_bytes()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = std::collections::HashMap::new();
        let mut files = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, found {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "matrix" {
                let (name, hash) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| Error::parse(i + 1, "matrix entry needs a file name and a hash"))?;
                files.push((name.to_string(), hash.trim().to_string()));
            } else {
                fields.insert(key.to_string(), (i + 1, value.to_string()));
            }
        }
        let get = |k: &str| -> Result<&(usize, String)> {
            fields.get(k).ok_or_else(|| Error::Config(format!("manifest lacks `{k}`")))
        };
        let num = |k: &str| -> Result<u64> {
            let (line, v) = get(k)?;
            v.parse().map_err(|_| Error::parse(*line, format!("`{k}` is not a number: {v:?}")))
        };
        let manifest = Manifest {
            n: num("n")? as usize,
            m: num("m")? as usize,
            u: num("u")? as usize,
            seed: num("seed")?,
            degree: get("degree")?.1.clone(),
            files,
            ensemble_hash: get("ensemble")?.1.clone(),
        };
        if manifest.files.len() != manifest.u {
            return Err(Error::Config(format!(
                "manifest declares u = {} but lists {} matrices",
                manifest.u,
                manifest.files.len()
            )));
        }
        Ok(manifest)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::path_io(&path, e))?;
        Manifest::parse(&text)
    }
}

/// Builds `u` matrices and writes them with a manifest into `out_dir`.
pub fn gen_matrix(
    n: usize,
    m: usize,
    profile: &DegreeProfile,
    u: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<(Manifest, MatrixEnsemble)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::path_io(out_dir, e))?;
    let ensemble = build_ensemble(n, m, profile, u, seed)?;
    let manifest = write_ensemble(&ensemble, seed, &degree_label(profile), out_dir)?;
    Ok((manifest, ensemble))
}

/// Writes an existing ensemble. The manifest goes last, so a directory
/// with a manifest is always complete.
pub fn write_ensemble(ensemble: &MatrixEnsemble, seed: u64, degree: &str, out_dir: &Path) -> Result<Manifest> {
    let mut files = Vec::with_capacity(ensemble.u());
    for (l, h) in ensemble.matrices().iter().enumerate() {
        let name = format!("H{l}.alist");
        let text = to_alist_string(h);
        let path = out_dir.join(&name);
        fs::write(&path, &text).map_err(|e| Error::path_io(&path, e))?;
        files.push((name, hex(&Sha256::digest(text.as_bytes()))));
    }
    let manifest = Manifest {
        n: ensemble.n(),
        m: ensemble.m(),
        u: ensemble.u(),
        seed,
        degree: degree.to_string(),
        files,
        ensemble_hash: hex(&ensemble.content_hash()),
    };
    let path = out_dir.join(MANIFEST_FILE);
    let tmp = out_dir.join(format!("{MANIFEST_FILE}.tmp"));
    fs::write(&tmp, manifest.to_string()).map_err(|e| Error::path_io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::path_io(&path, e))?;
    Ok(manifest)
}

/// Loads the ensemble in `dir`, checking every file against the manifest.
pub fn load_ensemble(dir: &Path) -> Result<(Manifest, MatrixEnsemble)> {
    let manifest = Manifest::read(dir)?;
    let mut matrices = Vec::with_capacity(manifest.u);
    for (name, hash) in &manifest.files {
        let path: PathBuf = dir.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::path_io(&path, e))?;
        if hex(&Sha256::digest(&bytes)) != *hash {
            return Err(Error::Config(format!("{} does not match its manifest hash", path.display())));
        }
        matrices.push(load_alist(BufReader::new(&bytes[..]))?);
    }
    let ensemble = MatrixEnsemble::new(matrices)?;
    if (ensemble.n(), ensemble.m()) != (manifest.n, manifest.m) {
        return Err(Error::Config(format!(
            "{}: matrices are {}x{}, manifest says {}x{}",
            dir.display(),
            ensemble.m(),
            ensemble.n(),
            manifest.m,
            manifest.n
        )));
    }
    Ok((manifest, ensemble))
}

/// Loads a regular-degree ensemble from `dir` when one with matching
/// parameters and at least `u` members is there, otherwise builds and
/// stores it.
pub fn cached_ensemble(dir: &Path, n: usize, m: usize, degree: usize, u: usize, seed: u64) -> Result<MatrixEnsemble> {
    if let Ok(found) = Manifest::read(dir) {
        if (found.n, found.m, found.seed, found.degree.as_str()) == (n, m, seed, degree.to_string().as_str())
            && found.u >= u
        {
            if let Ok((_, ens)) = load_ensemble(dir) {
                return ens.prefix(u);
            }
        }
    }
    log::info!("building {u} PEG matrices {m}x{n} into {}", dir.display());
    gen_matrix(n, m, &DegreeProfile::Regular(degree), u, seed, dir).map(|(_, e)| e)
}
