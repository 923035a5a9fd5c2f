//! Exact Cayley ball enumeration.
//!
//! Elements are stored flat in breadth-first order, so the ball of radius
//! `n` is exactly the prefix of length `μ(K^n)` and membership in `K^n`
//! reduces to an index comparison.

use std::fs;
use std::hash::BuildHasher;
use std::io::Write;
use std::path::{Path, PathBuf};

use hashbrown::HashTable;
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{hex_digest, Element, GroupHandle};

pub const DEFAULT_BUDGET: usize = 20_000_000;
const CACHE_MAGIC: &str = "NEGTYPE-BALLS";
const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct EnumOptions {
    /// Maximum number of stored elements.
    pub budget: usize,
    /// Worker threads for frontier expansion; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            budget: DEFAULT_BUDGET,
            threads: None,
        }
    }
}

/// Exact balls `K^0 ⊂ K^1 ⊂ … ⊂ K^R` of a finitely generated group.
#[derive(Clone)]
pub struct BallTable {
    group: GroupHandle,
    arity: usize,
    coords: Vec<i64>,
    /// `sizes[n] = μ(K^n)`.
    sizes: Vec<u64>,
    index: HashTable<u32>,
}

impl std::fmt::Debug for BallTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BallTable")
            .field("group", &self.group.spec().short_name())
            .field("radius", &self.radius())
            .field("sizes", &self.sizes)
            .finish()
    }
}

#[inline]
fn hash_coords(c: &[i64]) -> u64 {
    FxBuildHasher.hash_one(c)
}

impl BallTable {
    fn empty(group: &GroupHandle) -> Self {
        BallTable {
            group: group.clone(),
            arity: group.arity(),
            coords: Vec::new(),
            sizes: Vec::new(),
            index: HashTable::new(),
        }
    }

    pub fn group(&self) -> &GroupHandle {
        &self.group
    }

    pub fn radius(&self) -> u32 {
        (self.sizes.len() - 1) as u32
    }

    /// `μ(K^0), …, μ(K^R)`.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// `μ(K^n)`; `n` must not exceed the radius.
    pub fn mu(&self, n: u32) -> u64 {
        self.sizes[n as usize]
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.arity.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the element stored at `idx` (breadth-first order).
    #[inline]
    pub fn coords(&self, idx: usize) -> &[i64] {
        &self.coords[idx * self.arity..(idx + 1) * self.arity]
    }

    pub fn element(&self, idx: usize) -> Element {
        Element::new(self.coords(idx))
    }

    /// Index of `c` in the table, if it lies within the horizon.
    #[inline]
    pub fn lookup(&self, c: &[i64]) -> Option<usize> {
        let h = hash_coords(c);
        self.index
            .find(h, |&i| self.coords(i as usize) == c)
            .map(|&i| i as usize)
    }

    /// Word length of the element stored at `idx`.
    #[inline]
    pub fn length_of_index(&self, idx: usize) -> u32 {
        self.sizes.partition_point(|&s| s as usize <= idx) as u32
    }

    /// Exact word length, or `None` when `s` lies beyond the horizon `K^R`.
    pub fn word_length(&self, s: &[i64]) -> Result<Option<u32>> {
        if s.len() != self.arity {
            return Err(Error::ShapeError {
                expected: self.arity,
                got: s.len(),
            });
        }
        Ok(self.lookup(s).map(|i| self.length_of_index(i)))
    }

    /// Index range of the sphere of radius `n`.
    pub fn sphere(&self, n: u32) -> std::ops::Range<usize> {
        let lo = if n == 0 { 0 } else { self.sizes[n as usize - 1] as usize };
        lo..self.sizes[n as usize] as usize
    }

    fn insert_if_new(&mut self, c: &[i64]) -> bool {
        let h = hash_coords(c);
        let coords = &self.coords;
        let arity = self.arity;
        if self
            .index
            .find(h, |&i| &coords[i as usize * arity..(i as usize + 1) * arity] == c)
            .is_some()
        {
            return false;
        }
        let idx = self.len() as u32;
        self.coords.extend_from_slice(c);
        let coords = &self.coords;
        self.index.insert_unique(h, idx, |&i| {
            hash_coords(&coords[i as usize * arity..(i as usize + 1) * arity])
        });
        true
    }

    /// SHA-256 of the sorted canonical encodings; independent of storage order.
    pub fn content_hash(&self) -> String {
        let mut all: Vec<&[i64]> = (0..self.len()).map(|i| self.coords(i)).collect();
        all.sort_unstable();
        let mut hasher = Sha256::new();
        for c in all {
            for v in c {
                hasher.update(v.to_le_bytes());
            }
        }
        hex_digest(hasher)
    }

    /// Writes the versioned cache file: a magic line, a JSON header line and
    /// a little-endian `i64` body in breadth-first (word length) order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = CacheHeader {
            version: CACHE_VERSION,
            group_id: self.group.id().to_string(),
            group: self.group.spec().short_name(),
            arity: self.arity,
            radius: self.radius(),
            mu: self.sizes.clone(),
        };
        let mut buf = Vec::with_capacity(self.coords.len() * 8 + 256);
        writeln!(buf, "{CACHE_MAGIC} {CACHE_VERSION}")?;
        serde_json::to_writer(&mut buf, &header)?;
        buf.push(b'\n');
        for v in &self.coords {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, buf)?;
        Ok(())
    }

    /// Loads a cache file, checking that it was written for `group`.
    pub fn load(path: &Path, group: &GroupHandle) -> Result<BallTable> {
        let bytes = fs::read(path)?;
        let corrupt = |m: &str| Error::CacheCorrupt(format!("{}: {m}", path.display()));
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| corrupt("missing magic line"))?;
        let magic = std::str::from_utf8(&bytes[..nl]).map_err(|_| corrupt("bad magic"))?;
        let version = magic
            .strip_prefix(CACHE_MAGIC)
            .map(str::trim)
            .ok_or_else(|| corrupt("bad magic"))?;
        if version != CACHE_VERSION.to_string() {
            return Err(Error::CacheMismatch(format!(
                "cache version {version}, expected {CACHE_VERSION}"
            )));
        }
        let rest = &bytes[nl + 1..];
        let hl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| corrupt("missing header"))?;
        let header: CacheHeader =
            serde_json::from_slice(&rest[..hl]).map_err(|e| corrupt(&e.to_string()))?;
        if header.group_id != group.id() {
            return Err(Error::CacheMismatch(format!(
                "cache was built for group {} ({}), not {}",
                header.group,
                header.group_id,
                group.spec().short_name()
            )));
        }
        if header.arity != group.arity()
            || header.mu.is_empty()
            || header.mu[0] != 1
            || header.mu.windows(2).any(|w| w[0] > w[1])
            || header.mu.len() != header.radius as usize + 1
        {
            return Err(corrupt("inconsistent header"));
        }
        let body = &rest[hl + 1..];
        let count = *header.mu.last().unwrap() as usize;
        if body.len() != count * header.arity * 8 {
            return Err(corrupt("body length does not match header"));
        }
        let mut table = BallTable::empty(group);
        table.coords.reserve(count * header.arity);
        let mut c = vec![0i64; header.arity];
        for chunk in body.chunks_exact(header.arity * 8) {
            for (slot, b) in c.iter_mut().zip(chunk.chunks_exact(8)) {
                *slot = i64::from_le_bytes(b.try_into().unwrap());
            }
            if !table.insert_if_new(&c) {
                return Err(corrupt("duplicate element"));
            }
        }
        table.sizes = header.mu;
        if !group.is_identity(table.coords(0)) {
            return Err(corrupt("first element is not the identity"));
        }
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheHeader {
    version: u32,
    group_id: String,
    group: String,
    arity: usize,
    radius: u32,
    mu: Vec<u64>,
}

pub fn enumerate_balls(g: &GroupHandle, radius: u32) -> Result<BallTable> {
    enumerate_balls_with(g, radius, &EnumOptions::default())
}

/// Breadth-first closure: layer `n+1` is `(layer n)·K` minus everything
/// already seen. Products are formed in parallel per frontier chunk and
/// merged sequentially in frontier order, so the table is identical for
/// every thread count.
pub fn enumerate_balls_with(g: &GroupHandle, radius: u32, opts: &EnumOptions) -> Result<BallTable> {
    #[cfg(feature = "parallel")]
    if let Some(n) = opts.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        return pool.install(|| enumerate_inner(g, radius, opts.budget));
    }
    enumerate_inner(g, radius, opts.budget)
}

const CHUNK: usize = 2048;

fn expand_chunk(table: &BallTable, lo: usize, hi: usize) -> Result<Vec<i64>> {
    let g = &table.group;
    let arity = table.arity;
    let mut out = Vec::new();
    let mut buf = vec![0i64; arity];
    for i in lo..hi {
        let x = table.coords(i);
        for s in g.generators().iter().skip(1) {
            g.mul_into(x, s.as_slice(), &mut buf)?;
            if table.lookup(&buf).is_none() {
                out.extend_from_slice(&buf);
            }
        }
    }
    Ok(out)
}

fn enumerate_inner(g: &GroupHandle, radius: u32, budget: usize) -> Result<BallTable> {
    let mut table = BallTable::empty(g);
    table.insert_if_new(g.identity().as_slice());
    table.sizes.push(1);
    for n in 1..=radius {
        let frontier = table.sphere(n - 1);
        let starts: Vec<usize> = frontier.clone().step_by(CHUNK).collect();
        let end = frontier.end;
        #[cfg(feature = "parallel")]
        let candidates: Vec<Result<Vec<i64>>> = {
            use rayon::prelude::*;
            let t = &table;
            starts
                .par_iter()
                .map(|&lo| expand_chunk(t, lo, (lo + CHUNK).min(end)))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let candidates: Vec<Result<Vec<i64>>> = starts
            .iter()
            .map(|&lo| expand_chunk(&table, lo, (lo + CHUNK).min(end)))
            .collect();
        for chunk in candidates {
            let chunk = chunk?;
            for c in chunk.chunks_exact(table.arity) {
                if table.insert_if_new(c) && table.len() > budget {
                    return Err(Error::BudgetExceeded {
                        budget,
                        radius_reached: n - 1,
                    });
                }
            }
        }
        table.sizes.push(table.len() as u64);
    }
    Ok(table)
}

/// Saves `table` to `path` and reads it back.
pub fn cache_roundtrip(table: &BallTable, path: &Path) -> Result<BallTable> {
    table.save(path)?;
    BallTable::load(path, table.group())
}

pub fn cache_path(dir: &Path, g: &GroupHandle, radius: u32) -> PathBuf {
    dir.join(format!("balls-{}-R{radius}.bin", &g.id()[..16]))
}

/// Reuses a cached table from `dir` when present, otherwise builds and stores it.
pub fn load_or_build(
    dir: Option<&Path>,
    g: &GroupHandle,
    radius: u32,
    opts: &EnumOptions,
) -> Result<BallTable> {
    let Some(dir) = dir else {
        return enumerate_balls_with(g, radius, opts);
    };
    let path = cache_path(dir, g, radius);
    if path.exists() {
        match BallTable::load(&path, g) {
            Ok(t) if t.radius() == radius => return Ok(t),
            Ok(_) | Err(Error::CacheCorrupt(_)) | Err(Error::CacheMismatch(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let table = enumerate_balls_with(g, radius, opts)?;
    table.save(&path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_group, GroupSpec};

    fn z(r: usize) -> GroupHandle {
        make_group(GroupSpec::free_abelian(r)).unwrap()
    }

    #[test]
    fn small_ball_sizes() {
        let t = enumerate_balls(&z(1), 4).unwrap();
        assert_eq!(t.sizes(), &[1, 3, 5, 7, 9]);
        let t = enumerate_balls(&z(2), 3).unwrap();
        assert_eq!(t.sizes(), &[1, 5, 13, 25]);
        let h = make_group(GroupSpec::heisenberg()).unwrap();
        let t = enumerate_balls(&h, 2).unwrap();
        assert_eq!(t.sizes(), &[1, 5, 17]);
    }

    #[test]
    fn heisenberg_ball_matches_word_oracle() {
        // Every product of at most two generators, formed directly.
        let h = make_group(GroupSpec::heisenberg()).unwrap();
        let mut words = std::collections::BTreeSet::new();
        for a in h.generators() {
            for b in h.generators() {
                words.insert(h.multiply(a, b).unwrap());
            }
        }
        let t = enumerate_balls(&h, 2).unwrap();
        let ball: std::collections::BTreeSet<_> = (0..t.len()).map(|i| t.element(i)).collect();
        assert_eq!(ball, words);
    }

    #[test]
    fn word_lengths() {
        let t = enumerate_balls(&z(2), 6).unwrap();
        assert_eq!(t.word_length(&[0, 0]).unwrap(), Some(0));
        assert_eq!(t.word_length(&[3, -2]).unwrap(), Some(5));
        assert_eq!(t.word_length(&[7, 0]).unwrap(), None);
        assert!(t.word_length(&[1]).is_err());
        let h = make_group(GroupSpec::heisenberg()).unwrap();
        let t = enumerate_balls(&h, 6).unwrap();
        assert_eq!(t.word_length(&[0, 0, 1]).unwrap(), Some(4));
    }

    #[test]
    fn budget_is_enforced() {
        let opts = EnumOptions {
            budget: 100,
            threads: None,
        };
        match enumerate_balls_with(&z(3), 10, &opts) {
            Err(Error::BudgetExceeded { radius_reached, .. }) => assert_eq!(radius_reached, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cache_roundtrip_and_failures() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z1.bin");
        let t = enumerate_balls(&z(1), 4).unwrap();
        let back = cache_roundtrip(&t, &path).unwrap();
        assert_eq!(back.sizes(), t.sizes());
        assert_eq!(back.content_hash(), t.content_hash());
        for i in 0..t.len() {
            assert_eq!(back.word_length(t.coords(i)).unwrap(), Some(t.length_of_index(i)));
        }

        let other = make_group(GroupSpec::FreeAbelian {
            rank: 1,
            generators: Some(vec![vec![2]]),
        })
        .unwrap();
        assert!(matches!(
            BallTable::load(&path, &other),
            Err(Error::CacheMismatch(_))
        ));

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(
            BallTable::load(&path, t.group()),
            Err(Error::CacheCorrupt(_))
        ));
    }

    #[test]
    fn load_or_build_reuses_cache() {
        let dir = tempfile::tempdir().unwrap();
        let g = z(2);
        let a = load_or_build(Some(dir.path()), &g, 5, &EnumOptions::default()).unwrap();
        assert!(cache_path(dir.path(), &g, 5).exists());
        let b = load_or_build(Some(dir.path()), &g, 5, &EnumOptions::default()).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
    }
}
