//! On-disk cache of propagators and eigenvector matrices.
//!
//! Matrix file: magic `TQML`, version byte `0x01`, little-endian `u64` dimension, row-major
//! interleaved `f64` real/imaginary parts, then a little-endian `u64` FNV-1a checksum of every
//! preceding byte. A TOML sidecar records what the matrix is and the conventions used to build
//! it. Anything that fails to decode, validate or match is a miss.

use std::fs;
use std::path::{Path, PathBuf};

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::config::{hex_digest, MapSpec};
use super::output::write_atomic;
use crate::algebra::TorusOperator;
use crate::error::Result;
use crate::propagators::{Construction, Conventions, Propagator, UNITARITY_TOL};
use crate::spectral::EigenSystem;
use crate::C64;

pub const MAGIC: &[u8; 4] = b"TQML";
pub const VERSION: u8 = 0x01;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn encode_matrix(m: &Mat<C64>) -> Vec<u8> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(4 + 1 + 8 + 16 * n * n + 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let sum = fnv1a64(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Option<Mat<C64>> {
    if bytes.len() < 21 || &bytes[..4] != MAGIC || bytes[4] != VERSION {
        return None;
    }
    let n = u64::from_le_bytes(bytes[5..13].try_into().ok()?) as usize;
    let body = n.checked_mul(n)?.checked_mul(16)?;
    if bytes.len() != 13 + body + 8 {
        return None;
    }
    let (payload, tail) = bytes.split_at(13 + body);
    if fnv1a64(payload) != u64::from_le_bytes(tail.try_into().ok()?) {
        return None;
    }
    let f = |k: usize| f64::from_le_bytes(payload[13 + 8 * k..21 + 8 * k].try_into().unwrap());
    Some(Mat::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(f(k), f(k + 1))
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct Sidecar {
    format_version: u8,
    content: String,
    n: usize,
    variant: String,
    map: String,
    conventions: Conventions,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
    enabled: bool,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>, enabled: bool) -> Self {
        Cache { dir: dir.into(), enabled }
    }

    pub fn disabled() -> Self {
        Cache { dir: PathBuf::new(), enabled: false }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn map_text(map: &MapSpec) -> String {
        toml::to_string(map).expect("map spec serialises")
    }

    /// File stem for `(map spec hash, N, variant)`.
    pub fn key(map: &MapSpec, n: usize) -> String {
        let h = hex_digest(Self::map_text(map).as_bytes());
        format!("{}-{}-N{}-{}", map.label(), &h[..16], n, map.variant())
    }

    fn paths(&self, map: &MapSpec, n: usize, content: &str) -> (PathBuf, PathBuf) {
        let stem = format!("{}-{content}", Self::key(map, n));
        (self.dir.join(format!("{stem}.tqm")), self.dir.join(format!("{stem}.toml")))
    }

    fn sidecar(map: &MapSpec, n: usize, content: &str) -> Sidecar {
        Sidecar {
            format_version: VERSION,
            content: content.into(),
            n,
            variant: map.variant().into(),
            map: Self::map_text(map),
            conventions: Conventions::default(),
        }
    }

    fn get_matrix(&self, map: &MapSpec, n: usize, content: &str) -> Option<Mat<C64>> {
        if !self.enabled {
            return None;
        }
        let (bin, side) = self.paths(map, n, content);
        let meta: Sidecar = toml::from_str(&fs::read_to_string(side).ok()?).ok()?;
        if meta != Self::sidecar(map, n, content) {
            log::info!("cache sidecar mismatch for {}", bin.display());
            return None;
        }
        let m = decode_matrix(&fs::read(&bin).ok()?);
        if m.is_none() {
            log::warn!("cache file {} is corrupt; recomputing", bin.display());
        }
        m.filter(|m| m.nrows() == n)
    }

    fn put_matrix(&self, map: &MapSpec, n: usize, content: &str, m: &Mat<C64>) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        fs::create_dir_all(&self.dir)?;
        let (bin, side) = self.paths(map, n, content);
        write_atomic(&bin, &encode_matrix(m))?;
        let meta = toml::to_string(&Self::sidecar(map, n, content)).expect("sidecar serialises");
        write_atomic(&side, meta.as_bytes())
    }

    /// Cached propagator, accepted only if it is still unitary.
    pub fn get_propagator(&self, map: &MapSpec, n: usize) -> Option<Propagator> {
        let m = self.get_matrix(map, n, "propagator")?;
        let construction = match map {
            MapSpec::Cat { .. } => Construction::Metaplectic,
            MapSpec::PerturbedCat { epsilon, .. } if *epsilon == 0.0 => Construction::Metaplectic,
            MapSpec::PerturbedCat { .. } => Construction::Product,
            MapSpec::Parabolic { variant, .. } => match variant {
                crate::propagators::ParabolicVariant::Lattice => Construction::ParabolicLattice,
                crate::propagators::ParabolicVariant::Phase => Construction::ParabolicPhase,
            },
        };
        let op = TorusOperator::from_mat(m);
        if !(op.unitarity_defect() <= UNITARITY_TOL) {
            return None;
        }
        Propagator::checked(op, map.classical().ok()?, construction).ok()
    }

    pub fn put_propagator(&self, map: &MapSpec, n: usize, p: &Propagator) -> Result<()> {
        self.put_matrix(map, n, "propagator", p.op.mat())
    }

    /// Cached eigenvectors, re-certified against `u` (residuals and orthonormality).
    pub fn get_eigensystem(&self, map: &MapSpec, n: usize, u: &TorusOperator) -> Option<EigenSystem> {
        let v = self.get_matrix(map, n, "eigenvectors")?;
        match EigenSystem::from_vectors(u, v) {
            Ok(es) => Some(es),
            Err(e) => {
                log::warn!("cached eigenvectors for N = {n} failed certification: {e}");
                None
            }
        }
    }

    pub fn put_eigensystem(&self, map: &MapSpec, n: usize, es: &EigenSystem) -> Result<()> {
        self.put_matrix(map, n, "eigenvectors", es.vectors())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::GOLDEN;
    use crate::propagators::ParabolicVariant;
    use crate::spectral::diagonalize;

    fn spec() -> MapSpec {
        MapSpec::Parabolic { alpha: GOLDEN, variant: ParabolicVariant::Lattice }
    }

    #[test]
    fn encode_decode_bit_identical() {
        let m = Mat::from_fn(5, 5, |i, j| C64::new((i as f64 + 0.1).sin(), -(j as f64).exp() * 1e-300));
        let back = decode_matrix(&encode_matrix(&m)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(m[(i, j)].re.to_bits(), back[(i, j)].re.to_bits());
                assert_eq!(m[(i, j)].im.to_bits(), back[(i, j)].im.to_bits());
            }
        }
        let bytes = encode_matrix(&m);
        assert_eq!(&bytes[..4], b"TQML");
        assert_eq!(bytes[4], 1);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 5);
    }

    #[test]
    fn corruption_and_version_are_misses() {
        let m = Mat::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let mut bytes = encode_matrix(&m);
        bytes[20] ^= 1;
        assert!(decode_matrix(&bytes).is_none());
        let mut bytes = encode_matrix(&m);
        bytes[4] = 2;
        assert!(decode_matrix(&bytes).is_none());
        assert!(decode_matrix(&encode_matrix(&m)[..30]).is_none());
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path(), true);
        let map = spec();
        let p = map.propagator(21).unwrap();
        assert!(cache.get_propagator(&map, 21).is_none());
        cache.put_propagator(&map, 21, &p).unwrap();
        let q = cache.get_propagator(&map, 21).unwrap();
        assert_eq!((&p.op - &q.op).max_abs(), 0.0);

        let es = diagonalize(&p.op).unwrap();
        cache.put_eigensystem(&map, 21, &es).unwrap();
        let es2 = cache.get_eigensystem(&map, 21, &q.op).unwrap();
        assert_eq!(es.phases(), es2.phases());
        assert_eq!(es.residuals(), es2.residuals());

        // corrupt the eigenvector file: miss
        let (bin, _) = cache.paths(&map, 21, "eigenvectors");
        let mut bytes = fs::read(&bin).unwrap();
        let k = bytes.len() / 2;
        bytes[k] ^= 0x40;
        fs::write(&bin, bytes).unwrap();
        assert!(cache.get_eigensystem(&map, 21, &q.op).is_none());

        // other map parameters do not collide
        let other = MapSpec::Parabolic { alpha: 0.3, variant: ParabolicVariant::Lattice };
        assert!(cache.get_propagator(&other, 21).is_none());
    }
}
