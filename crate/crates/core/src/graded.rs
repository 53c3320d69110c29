//! Finitely supported Z- and Z/2-graded vector spaces and homogeneous maps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Field, Matrix, Scalar, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Grading {
    Z,
    Z2,
}

impl Grading {
    /// Canonical representative of a degree: itself over Z, 0 or 1 over Z/2.
    pub fn normalize(self, d: i64) -> i64 {
        match self {
            Grading::Z => d,
            Grading::Z2 => d.rem_euclid(2),
        }
    }

    pub fn add(self, a: i64, b: i64) -> i64 {
        self.normalize(a + b)
    }
}

/// `(-1)^n`, as a field element.
pub fn sign(field: Field, n: i64) -> Scalar {
    if n.rem_euclid(2) == 0 {
        field.one()
    } else {
        -field.one()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedSpace {
    field: Field,
    grading: Grading,
    dims: BTreeMap<i64, usize>,
}

impl GradedSpace {
    /// Zero entries are dropped; over Z/2 degrees are reduced mod 2 and
    /// dimensions of equal parity add up.
    pub fn new(field: Field, grading: Grading, dims: impl IntoIterator<Item = (i64, usize)>) -> GradedSpace {
        let mut out = BTreeMap::new();
        for (d, n) in dims {
            if n > 0 {
                *out.entry(grading.normalize(d)).or_insert(0) += n;
            }
        }
        GradedSpace { field, grading, dims: out }
    }

    pub fn zero(field: Field, grading: Grading) -> GradedSpace {
        GradedSpace::new(field, grading, [])
    }

    /// A copy of k^n concentrated in one degree.
    pub fn concentrated(field: Field, grading: Grading, degree: i64, n: usize) -> GradedSpace {
        GradedSpace::new(field, grading, [(degree, n)])
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn dim(&self, d: i64) -> usize {
        self.dims.get(&self.grading.normalize(d)).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<i64, usize> {
        &self.dims
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.dims.keys().copied()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    /// Lowest and highest occupied degree.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.dims.keys().next()?, *self.dims.keys().next_back()?))
    }

    pub fn normalize(&self, d: i64) -> i64 {
        self.grading.normalize(d)
    }

    /// `M[n]`, with `M[n]^i = M^{i+n}`.
    pub fn shift(&self, n: i64) -> GradedSpace {
        GradedSpace::new(self.field, self.grading, self.dims.iter().map(|(d, k)| (d - n, *k)))
    }

    pub fn direct_sum(&self, other: &GradedSpace) -> Result<GradedSpace> {
        GradedSpace::direct_sum_all(&[self.clone(), other.clone()])
    }

    pub fn direct_sum_all(parts: &[GradedSpace]) -> Result<GradedSpace> {
        let first = parts.first().ok_or_else(|| Error::Usage("direct sum of no spaces".into()))?;
        for p in parts {
            if p.field != first.field || p.grading != first.grading {
                return Err(Error::Usage("direct sum of spaces over different fields or gradings".into()));
            }
        }
        Ok(GradedSpace::new(
            first.field,
            first.grading,
            parts.iter().flat_map(|p| p.dims.iter().map(|(d, n)| (*d, *n))),
        ))
    }

    /// Sums dimensions of equal parity.
    pub fn collapse_to_z2(&self) -> GradedSpace {
        GradedSpace::new(self.field, Grading::Z2, self.dims.iter().map(|(d, n)| (*d, *n)))
    }

    fn check_compatible(&self, other: &GradedSpace) -> Result<()> {
        if self != other {
            return Err(Error::Usage(format!("graded space mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

impl fmt::Debug for GradedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims.iter().map(|(d, n)| format!("{d}:{n}")).collect();
        write!(f, "{:?}{{{}}}", self.grading, dims.join(", "))
    }
}

/// A homogeneous map `source -> target` raising degree by `shift`. Blocks
/// are indexed by source degree; absent blocks are zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GradedMap {
    source: GradedSpace,
    target: GradedSpace,
    shift: i64,
    blocks: BTreeMap<i64, Matrix>,
}

impl GradedMap {
    pub fn zero(source: &GradedSpace, target: &GradedSpace, shift: i64) -> GradedMap {
        assert_eq!(source.field, target.field, "maps between spaces over different fields");
        assert_eq!(source.grading, target.grading, "maps between differently graded spaces");
        GradedMap {
            source: source.clone(),
            target: target.clone(),
            shift: source.grading.normalize(shift),
            blocks: BTreeMap::new(),
        }
    }

    pub fn identity(space: &GradedSpace) -> GradedMap {
        GradedMap::scalar(space, &space.field.one())
    }

    pub fn scalar(space: &GradedSpace, s: &Scalar) -> GradedMap {
        let mut m = GradedMap::zero(space, space, 0);
        for (&d, &n) in &space.dims {
            m.blocks.insert(d, Matrix::scalar(space.field, n, s));
        }
        m.prune();
        m
    }

    pub fn from_blocks(
        source: &GradedSpace,
        target: &GradedSpace,
        shift: i64,
        blocks: impl IntoIterator<Item = (i64, Matrix)>,
    ) -> Result<GradedMap> {
        let mut m = GradedMap::zero(source, target, shift);
        for (d, b) in blocks {
            m.set_block(d, b)?;
        }
        Ok(m)
    }

    pub fn source(&self) -> &GradedSpace {
        &self.source
    }

    pub fn target(&self) -> &GradedSpace {
        &self.target
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn field(&self) -> Field {
        self.source.field
    }

    pub fn grading(&self) -> Grading {
        self.source.grading
    }

    pub fn target_degree(&self, source_degree: i64) -> i64 {
        self.grading().add(source_degree, self.shift)
    }

    /// Shape of the block at source degree `d`.
    pub fn block_shape(&self, d: i64) -> (usize, usize) {
        (self.target.dim(self.target_degree(d)), self.source.dim(d))
    }

    /// The block at source degree `d`, or the canonical zero matrix.
    pub fn block(&self, d: i64) -> Matrix {
        let d = self.grading().normalize(d);
        match self.blocks.get(&d) {
            Some(b) => b.clone(),
            None => {
                let (r, c) = self.block_shape(d);
                Matrix::zeros(self.field(), r, c)
            }
        }
    }

    pub fn block_ref(&self, d: i64) -> Option<&Matrix> {
        self.blocks.get(&self.grading().normalize(d))
    }

    /// Nonzero blocks keyed by source degree.
    pub fn blocks(&self) -> &BTreeMap<i64, Matrix> {
        &self.blocks
    }

    pub fn set_block(&mut self, d: i64, block: Matrix) -> Result<()> {
        let d = self.grading().normalize(d);
        let shape = self.block_shape(d);
        if block.shape() != shape {
            return Err(Error::DimensionMismatch(format!(
                "block at degree {d} has shape {:?}, expected {:?}",
                block.shape(),
                shape
            )));
        }
        if block.is_zero() {
            self.blocks.remove(&d);
        } else {
            self.blocks.insert(d, block);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, b| !b.is_zero());
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &GradedMap) -> Result<GradedMap> {
        f.target.check_compatible(&self.source)?;
        let shift = self.grading().add(self.shift, f.shift);
        let mut out = GradedMap::zero(&f.source, &self.target, shift);
        for (&d, fb) in &f.blocks {
            if let Some(gb) = self.blocks.get(&f.target_degree(d)) {
                out.set_block(d, gb.mul(fb)?)?;
            }
        }
        Ok(out)
    }

    fn check_same_kind(&self, other: &GradedMap) -> Result<()> {
        self.source.check_compatible(&other.source)?;
        self.target.check_compatible(&other.target)?;
        if self.shift != other.shift {
            return Err(Error::Usage(format!("maps of different degrees {} and {}", self.shift, other.shift)));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_same_kind(other)?;
        let mut out = self.clone();
        for (&d, b) in &other.blocks {
            let sum = out.block(d).add(b)?;
            out.set_block(d, sum)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&-self.field().one())
    }

    pub fn scale(&self, s: &Scalar) -> GradedMap {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            *b = b.scale(s);
        }
        out.prune();
        out
    }

    /// Block-diagonal map between direct sums.
    pub fn direct_sum(&self, g: &GradedMap) -> Result<GradedMap> {
        if self.shift != g.shift {
            return Err(Error::Usage("direct sum of maps of different degrees".into()));
        }
        let src = [self.source.clone(), g.source.clone()];
        let tgt = [self.target.clone(), g.target.clone()];
        GradedMap::assemble(&src, &tgt, self.shift, &[((0, 0), self), ((1, 1), g)])
    }

    /// Builds a map between direct sums from its components.
    /// `parts[(r, c)]` maps `sources[c]` to `targets[r]`; missing parts are zero.
    pub fn assemble(
        sources: &[GradedSpace],
        targets: &[GradedSpace],
        shift: i64,
        parts: &[((usize, usize), &GradedMap)],
    ) -> Result<GradedMap> {
        let src = GradedSpace::direct_sum_all(sources)?;
        let tgt = GradedSpace::direct_sum_all(targets)?;
        let mut out = GradedMap::zero(&src, &tgt, shift);
        let grading = src.grading;
        for &((r, c), part) in parts {
            if part.source != sources[c] || part.target != targets[r] {
                return Err(Error::Usage(format!("component ({r},{c}) has the wrong source or target")));
            }
            if part.shift != out.shift {
                return Err(Error::Usage(format!("component ({r},{c}) has degree {}", part.shift)));
            }
            for (&d, b) in &part.blocks {
                let td = grading.add(d, shift);
                let row0 = offset(targets, r, td);
                let col0 = offset(sources, c, d);
                let mut block = out.block(d);
                block.place(row0, col0, b);
                out.set_block(d, block)?;
            }
        }
        Ok(out)
    }

    /// Component `(r, c)` of a map between direct sums.
    pub fn component(&self, sources: &[GradedSpace], targets: &[GradedSpace], r: usize, c: usize) -> Result<GradedMap> {
        let mut out = GradedMap::zero(&sources[c], &targets[r], self.shift);
        for (&d, b) in &self.blocks {
            let td = self.target_degree(d);
            let (rows, cols) = (targets[r].dim(td), sources[c].dim(d));
            if rows == 0 || cols == 0 {
                continue;
            }
            out.set_block(d, b.submatrix(offset(targets, r, td), offset(sources, c, d), rows, cols))?;
        }
        Ok(out)
    }

    /// `f[n]`: the same blocks between shifted spaces (no sign).
    pub fn shift_map(&self, n: i64) -> GradedMap {
        let grading = self.grading();
        GradedMap {
            source: self.source.shift(n),
            target: self.target.shift(n),
            shift: self.shift,
            blocks: self.blocks.iter().map(|(d, b)| (grading.normalize(d - n), b.clone())).collect(),
        }
    }

    /// Reinterprets a Z-graded map on the parity-collapsed spaces.
    pub fn collapse_to_z2(&self) -> Result<GradedMap> {
        let src = self.source.collapse_to_z2();
        let tgt = self.target.collapse_to_z2();
        let mut out = GradedMap::zero(&src, &tgt, self.shift);
        for (&d, b) in &self.blocks {
            let td = self.target_degree(d);
            let row0: usize = self.target.dims.range(..td).filter(|(e, _)| (*e - td) % 2 == 0).map(|(_, n)| n).sum();
            let col0: usize = self.source.dims.range(..d).filter(|(e, _)| (*e - d) % 2 == 0).map(|(_, n)| n).sum();
            let mut block = out.block(d);
            let mut acc = block.submatrix(row0, col0, b.rows(), b.cols());
            acc = acc.add(b)?;
            block.place(row0, col0, &acc);
            out.set_block(d, block)?;
        }
        Ok(out)
    }

    pub fn apply(&self, d: i64, v: &[Scalar]) -> Result<Vector> {
        self.block(d).mul_vec(v)
    }

    /// True when every block has full column rank.
    pub fn is_injective(&self) -> bool {
        self.source.degrees().all(|d| self.block(d).rank() == self.source.dim(d))
    }

    pub fn is_surjective(&self) -> bool {
        self.target.degrees().all(|td| {
            let d = self.grading().normalize(td - self.shift);
            self.block(d).rank() == self.target.dim(td)
        })
    }
}

/// Offset of part `k` inside a direct sum at degree `d`.
pub fn offset(parts: &[GradedSpace], k: usize, d: i64) -> usize {
    parts[..k].iter().map(|p| p.dim(d)).sum()
}

impl fmt::Debug for GradedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedMap({:?} -> {:?}, shift {}) ", self.source, self.target, self.shift)?;
        f.debug_map().entries(self.blocks.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn one_by_one(v: i64) -> Matrix {
        Matrix::from_ints(q(), &[&[v]])
    }

    /// d on X_3: identities k -> k in degrees 0 -> 1 -> 2.
    fn x3() -> (GradedSpace, GradedMap) {
        let s = GradedSpace::new(q(), Grading::Z, [(0, 1), (1, 1), (2, 1)]);
        let d = GradedMap::from_blocks(&s, &s, 1, [(0, one_by_one(1)), (1, one_by_one(1))]).unwrap();
        (s, d)
    }

    #[test]
    fn shift_moves_degrees() {
        let x1 = GradedSpace::concentrated(q(), Grading::Z, 0, 1);
        assert_eq!(x1.shift(-1).dims(), &BTreeMap::from([(1, 1)]));
        let s = GradedSpace::new(q(), Grading::Z2, [(0, 2), (1, 3)]);
        assert_eq!(s.shift(2), s);
        assert_eq!(s.shift(1).dim(0), 3);
    }

    #[test]
    fn composition_degrees() {
        let (s, d) = x3();
        assert_eq!(GradedMap::identity(&s).compose(&d).unwrap(), d);
        let dd = d.compose(&d).unwrap();
        assert_eq!(dd.shift(), 2);
        assert_eq!(dd.blocks().len(), 1);
        assert_eq!(dd.block(0), one_by_one(1));
        let z2 = GradedSpace::new(q(), Grading::Z2, [(0, 1), (1, 1)]);
        let f = GradedMap::from_blocks(&z2, &z2, 1, [(0, one_by_one(1)), (1, one_by_one(2))]).unwrap();
        assert_eq!(f.compose(&f).unwrap().shift(), 0);
    }

    #[test]
    fn mismatched_composition_is_a_usage_error() {
        let (s, d) = x3();
        let other = GradedSpace::concentrated(q(), Grading::Z, 0, 2);
        let g = GradedMap::identity(&other);
        assert!(matches!(g.compose(&d), Err(Error::Usage(_))));
        assert!(GradedMap::from_blocks(&s, &s, 1, [(0, Matrix::identity(q(), 2))]).is_err());
    }

    #[test]
    fn assemble_and_component_are_inverse() {
        let (s, d) = x3();
        let id = GradedMap::identity(&s);
        let parts = [s.clone(), s.clone()];
        let sum = GradedMap::assemble(&parts, &parts, 1, &[((0, 0), &d), ((1, 1), &d)]).unwrap();
        assert_eq!(sum.component(&parts, &parts, 1, 1).unwrap(), d);
        assert!(sum.component(&parts, &parts, 0, 1).unwrap().is_zero());
        assert_eq!(d.direct_sum(&d).unwrap(), sum);
        assert!(GradedMap::assemble(&parts, &parts, 1, &[((0, 0), &id)]).is_err());
    }

    #[test]
    fn collapse_sums_parities() {
        let (_, d) = x3();
        let c = d.collapse_to_z2().unwrap();
        assert_eq!(c.source().dims(), &BTreeMap::from([(0, 2), (1, 1)]));
        // degree 0 and 2 both map into degree 1 / out of degree 1
        assert_eq!(c.block(0), Matrix::from_ints(q(), &[&[1, 0]]));
        assert_eq!(c.block(1), Matrix::from_ints(q(), &[&[0], &[1]]));
    }

    fn space_strategy() -> impl Strategy<Value = GradedSpace> {
        proptest::collection::btree_map(-2i64..3, 1usize..3, 1..4)
            .prop_map(|dims| GradedSpace::new(Field::Rationals, Grading::Z, dims))
    }

    fn random_map(src: &GradedSpace, tgt: &GradedSpace, shift: i64, seed: &[i64]) -> GradedMap {
        let mut m = GradedMap::zero(src, tgt, shift);
        let mut k = 0;
        for d in src.degrees() {
            let (r, c) = m.block_shape(d);
            let mut b = Matrix::zeros(q(), r, c);
            for i in 0..r {
                for j in 0..c {
                    b.set(i, j, q().from_i64(seed[k % seed.len()]));
                    k += 1;
                }
            }
            m.set_block(d, b).unwrap();
        }
        m
    }

    proptest! {
        #[test]
        fn compose_is_associative(a in space_strategy(), b in space_strategy(), c in space_strategy(), d in space_strategy(),
                                  s1 in -1i64..2, s2 in -1i64..2, s3 in -1i64..2,
                                  seed in proptest::collection::vec(-3i64..4, 1..20)) {
            let f = random_map(&a, &b, s1, &seed);
            let g = random_map(&b, &c, s2, &seed[1..].iter().chain(&seed[..1]).copied().collect::<Vec<_>>());
            let h = random_map(&c, &d, s3, &seed);
            let left = h.compose(&g).unwrap().compose(&f).unwrap();
            let right = h.compose(&g.compose(&f).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn shifts_add(m in space_strategy(), a in -3i64..4, b in -3i64..4) {
            prop_assert_eq!(m.shift(a).shift(b), m.shift(a + b));
        }

        #[test]
        fn block_shapes_match(a in space_strategy(), b in space_strategy(), s in -2i64..3, seed in proptest::collection::vec(-3i64..4, 1..10)) {
            let f = random_map(&a, &b, s, &seed);
            for d in -6..6 {
                prop_assert_eq!(f.block(d).shape(), (b.dim(d + s), a.dim(d)));
            }
        }
    }
}
