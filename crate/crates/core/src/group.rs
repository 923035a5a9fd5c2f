//! Group laws and canonical integer encodings.
//!
//! Every supported family encodes its elements as a fixed-arity tuple of
//! `i64`. Arithmetic is overflow-checked: a product that does not fit in an
//! `i64` coordinate aborts with [`Error::Overflow`] instead of wrapping.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Coords = SmallVec<[i64; 6]>;

/// A group element in its canonical encoding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub Coords);

impl Element {
    pub fn new(coords: &[i64]) -> Self {
        Element(Coords::from_slice(coords))
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Parses the report text form, e.g. `"(1,-1,0)"`.
    pub fn parse(text: &str) -> Result<Self> {
        let inner = text
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::DomainError(format!("not an element: {text:?}")))?;
        if inner.trim().is_empty() {
            return Ok(Element(Coords::new()));
        }
        inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::DomainError(format!("bad coordinate {c:?}: {e}")))
            })
            .collect::<Result<Coords>>()
            .map(Element)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Declarative description of a finitely generated group together with a
/// generating set. The generating set is symmetrized and the identity is
/// added by [`make_group`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    FreeAbelian {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<i64>>>,
    },
    /// Encodings `(a, b, c)` of the matrix with superdiagonal `a, b` and corner `c`.
    Heisenberg3 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<i64>>>,
    },
    /// Upper unitriangular integer matrices of the given size, generated by
    /// the listed matrices (full square matrices, row-major).
    Unitriangular {
        size: usize,
        matrices: Vec<Vec<Vec<i64>>>,
    },
    DirectProduct { factors: Vec<GroupSpec> },
}

impl GroupSpec {
    pub fn free_abelian(rank: usize) -> Self {
        GroupSpec::FreeAbelian {
            rank,
            generators: None,
        }
    }

    pub fn heisenberg() -> Self {
        GroupSpec::Heisenberg3 { generators: None }
    }

    pub fn short_name(&self) -> String {
        match self {
            GroupSpec::FreeAbelian { rank, .. } => format!("Z^{rank}"),
            GroupSpec::Heisenberg3 { .. } => "H3(Z)".to_string(),
            GroupSpec::Unitriangular { size, .. } => format!("UT({size},Z)"),
            GroupSpec::DirectProduct { factors } => factors
                .iter()
                .map(GroupSpec::short_name)
                .collect::<Vec<_>>()
                .join(" x "),
        }
    }
}

#[derive(Clone, Debug)]
enum Law {
    FreeAbelian(usize),
    Heisenberg,
    Unitriangular { size: usize, index: Vec<Vec<usize>> },
    Product(Vec<(usize, usize, Law)>),
}

#[inline]
fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::Overflow("addition"))
}

#[inline]
fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::Overflow("multiplication"))
}

#[inline]
fn neg(a: i64) -> Result<i64> {
    a.checked_neg().ok_or(Error::Overflow("negation"))
}

impl Law {
    fn arity(&self) -> usize {
        match self {
            Law::FreeAbelian(r) => *r,
            Law::Heisenberg => 3,
            Law::Unitriangular { size, .. } => size * (size - 1) / 2,
            Law::Product(parts) => parts.iter().map(|(_, len, _)| len).sum(),
        }
    }

    fn unitriangular(size: usize) -> Law {
        let mut index = vec![vec![usize::MAX; size]; size];
        let mut next = 0;
        for (i, row) in index.iter_mut().enumerate() {
            for slot in row.iter_mut().skip(i + 1) {
                *slot = next;
                next += 1;
            }
        }
        Law::Unitriangular { size, index }
    }

    fn mul_into(&self, a: &[i64], b: &[i64], out: &mut [i64]) -> Result<()> {
        match self {
            Law::FreeAbelian(_) => {
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = add(*x, *y)?;
                }
            }
            Law::Heisenberg => {
                out[0] = add(a[0], b[0])?;
                out[1] = add(a[1], b[1])?;
                out[2] = add(add(a[2], b[2])?, mul(a[0], b[1])?)?;
            }
            Law::Unitriangular { size, index } => {
                let m = *size;
                for i in 0..m {
                    for j in i + 1..m {
                        let mut acc = add(a[index[i][j]], b[index[i][j]])?;
                        for l in i + 1..j {
                            acc = add(acc, mul(a[index[i][l]], b[index[l][j]])?)?;
                        }
                        out[index[i][j]] = acc;
                    }
                }
            }
            Law::Product(parts) => {
                for (off, len, law) in parts {
                    let r = *off..*off + *len;
                    law.mul_into(&a[r.clone()], &b[r.clone()], &mut out[r])?;
                }
            }
        }
        Ok(())
    }

    fn inv_into(&self, a: &[i64], out: &mut [i64]) -> Result<()> {
        match self {
            Law::FreeAbelian(_) => {
                for (o, x) in out.iter_mut().zip(a) {
                    *o = neg(*x)?;
                }
            }
            Law::Heisenberg => {
                out[0] = neg(a[0])?;
                out[1] = neg(a[1])?;
                out[2] = add(mul(a[0], a[1])?, neg(a[2])?)?;
            }
            Law::Unitriangular { size, index } => {
                // Solve A X = I one superdiagonal at a time.
                let m = *size;
                for gap in 1..m {
                    for i in 0..m - gap {
                        let j = i + gap;
                        let mut acc = neg(a[index[i][j]])?;
                        for l in i + 1..j {
                            acc = add(acc, neg(mul(a[index[i][l]], out[index[l][j]])?)?)?;
                        }
                        out[index[i][j]] = acc;
                    }
                }
            }
            Law::Product(parts) => {
                for (off, len, law) in parts {
                    let r = *off..*off + *len;
                    law.inv_into(&a[r.clone()], &mut out[r])?;
                }
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match self {
            Law::FreeAbelian(r) => format!("free_abelian({r})"),
            Law::Heisenberg => "heisenberg3".into(),
            Law::Unitriangular { size, .. } => format!("unitriangular({size})"),
            Law::Product(parts) => format!(
                "product[{}]",
                parts
                    .iter()
                    .map(|(_, _, l)| l.describe())
                    .collect::<Vec<_>>()
                    .join(";")
            ),
        }
    }
}

/// An immutable, validated group with its symmetric generating set.
#[derive(Clone, Debug)]
pub struct GroupHandle {
    spec: GroupSpec,
    law: Law,
    arity: usize,
    generators: Vec<Element>,
    id: String,
}

impl GroupHandle {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Symmetric generating set; the identity comes first.
    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Hex digest identifying the group law and generating set.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn identity(&self) -> Element {
        Element(smallvec::smallvec![0; self.arity])
    }

    pub fn is_identity(&self, a: &[i64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    fn check(&self, a: &[i64]) -> Result<()> {
        if a.len() != self.arity {
            return Err(Error::ShapeError {
                expected: self.arity,
                got: a.len(),
            });
        }
        Ok(())
    }

    /// Writes `a * b` into `out` without allocating.
    #[inline]
    pub fn mul_into(&self, a: &[i64], b: &[i64], out: &mut [i64]) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        self.check(out)?;
        self.law.mul_into(a, b, out)
    }

    #[inline]
    pub fn inv_into(&self, a: &[i64], out: &mut [i64]) -> Result<()> {
        self.check(a)?;
        self.check(out)?;
        self.law.inv_into(a, out)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        let mut out = self.identity();
        self.mul_into(&a.0, &b.0, &mut out.0)?;
        Ok(out)
    }

    pub fn inverse(&self, a: &Element) -> Result<Element> {
        let mut out = self.identity();
        self.inv_into(&a.0, &mut out.0)?;
        Ok(out)
    }

    /// `a⁻¹ b`, the argument of a positive definite kernel `φ(a⁻¹b)`.
    pub fn left_quotient(&self, a: &Element, b: &Element) -> Result<Element> {
        let ai = self.inverse(a)?;
        self.multiply(&ai, b)
    }
}

fn validate_vectors(gens: &[Vec<i64>], arity: usize) -> Result<Vec<Element>> {
    if gens.is_empty() {
        return Err(Error::EmptySpec);
    }
    gens.iter()
        .map(|g| {
            if g.len() != arity {
                Err(Error::InvalidGenerator(format!(
                    "generator {g:?} has {} coordinates, expected {arity}",
                    g.len()
                )))
            } else {
                Ok(Element::new(g))
            }
        })
        .collect()
}

fn unit_vectors(rank: usize) -> Vec<Element> {
    (0..rank)
        .map(|i| {
            let mut v = vec![0; rank];
            v[i] = 1;
            Element::new(&v)
        })
        .collect()
}

fn matrix_to_element(size: usize, m: &[Vec<i64>]) -> Result<Element> {
    if m.len() != size || m.iter().any(|row| row.len() != size) {
        return Err(Error::InvalidGenerator(format!(
            "matrix is not {size}x{size}"
        )));
    }
    let mut coords = Coords::new();
    for i in 0..size {
        for j in 0..size {
            let v = m[i][j];
            match i.cmp(&j) {
                std::cmp::Ordering::Equal if v != 1 => {
                    return Err(Error::InvalidGenerator(format!(
                        "diagonal entry ({i},{i}) is {v}, not 1"
                    )))
                }
                std::cmp::Ordering::Greater if v != 0 => {
                    return Err(Error::InvalidGenerator(format!(
                        "entry ({i},{j}) below the diagonal is {v}"
                    )))
                }
                std::cmp::Ordering::Less => coords.push(v),
                _ => {}
            }
        }
    }
    Ok(Element(coords))
}

/// Law plus raw (unsymmetrized) generators of a spec.
fn build(spec: &GroupSpec) -> Result<(Law, Vec<Element>)> {
    match spec {
        GroupSpec::FreeAbelian { rank, generators } => {
            if *rank == 0 {
                return Err(Error::InvalidSpec("rank must be positive".into()));
            }
            let gens = match generators {
                Some(g) => validate_vectors(g, *rank)?,
                None => unit_vectors(*rank),
            };
            Ok((Law::FreeAbelian(*rank), gens))
        }
        GroupSpec::Heisenberg3 { generators } => {
            let gens = match generators {
                Some(g) => validate_vectors(g, 3)?,
                None => vec![Element::new(&[1, 0, 0]), Element::new(&[0, 1, 0])],
            };
            Ok((Law::Heisenberg, gens))
        }
        GroupSpec::Unitriangular { size, matrices } => {
            if *size < 3 {
                return Err(Error::InvalidSpec(format!(
                    "unitriangular size must be at least 3, got {size}"
                )));
            }
            if matrices.is_empty() {
                return Err(Error::EmptySpec);
            }
            let gens = matrices
                .iter()
                .map(|m| matrix_to_element(*size, m))
                .collect::<Result<Vec<_>>>()?;
            Ok((Law::unitriangular(*size), gens))
        }
        GroupSpec::DirectProduct { factors } => {
            if factors.is_empty() {
                return Err(Error::EmptySpec);
            }
            let built = factors.iter().map(build).collect::<Result<Vec<_>>>()?;
            let total: usize = built.iter().map(|(l, _)| l.arity()).sum();
            let mut parts = Vec::with_capacity(built.len());
            let mut gens = Vec::new();
            let mut off = 0;
            for (law, fgens) in built {
                let len = law.arity();
                for g in fgens {
                    let mut coords: Coords = smallvec::smallvec![0; total];
                    coords[off..off + len].copy_from_slice(&g.0);
                    gens.push(Element(coords));
                }
                parts.push((off, len, law));
                off += len;
            }
            Ok((Law::Product(parts), gens))
        }
    }
}

/// Validates a spec and returns a handle whose generating set is closed
/// under inversion and contains the identity.
pub fn make_group(spec: GroupSpec) -> Result<GroupHandle> {
    let (law, raw) = build(&spec)?;
    let arity = law.arity();
    let mut handle = GroupHandle {
        spec,
        law,
        arity,
        generators: Vec::new(),
        id: String::new(),
    };
    let mut gens = vec![handle.identity()];
    for g in raw {
        let gi = handle.inverse(&g)?;
        for cand in [g, gi] {
            if !gens.contains(&cand) {
                gens.push(cand);
            }
        }
    }
    let mut hasher = Sha256::new();
    hasher.update(handle.law.describe().as_bytes());
    for g in &gens {
        hasher.update(b"|");
        hasher.update(g.to_string().as_bytes());
    }
    handle.id = hex_digest(hasher);
    handle.generators = gens;
    Ok(handle)
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
