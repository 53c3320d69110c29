//! JSON descriptors for spaces, maps, algebras and modules.
//!
//! Scalars travel as strings in the field's own notation ("1/2", "-3",
//! residues as "0".."p-1"); the field itself is supplied when decoding.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{CdgAlgebra, Family, Ring, RingElem, TableAlgebra, Terms};
use crate::error::{Error, Result};
use crate::graded::{GradedMap, GradedSpace, Grading};
use crate::linalg::{Field, Matrix};
use crate::module::CdgModule;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceDesc {
    pub grading: Grading,
    pub dims: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDesc {
    pub shift: i64,
    pub blocks: BTreeMap<String, Vec<Vec<String>>>,
}

/// `(label, coefficient)` pairs.
pub type TermsDesc = Vec<(String, String)>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDesc {
    pub grading: Grading,
    /// `(label, degree)`, unit first.
    pub basis: Vec<(String, i64)>,
    /// `(left, right, product)` for non-unit pairs with nonzero product.
    #[serde(default)]
    pub mul: Vec<(String, String, TermsDesc)>,
    #[serde(default)]
    pub diff: Vec<(String, TermsDesc)>,
    #[serde(default)]
    pub curvature: TermsDesc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AlgebraDesc {
    Base,
    InitialPoly {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trunc: Option<usize>,
    },
    DualNumbers,
    PolyU {
        ring: Ring,
        rho: [String; 2],
    },
    Z2Rho {
        ring: Ring,
        rho: [String; 2],
    },
    Table(TableDesc),
    Deformed {
        base: TableDesc,
        phi0: TermsDesc,
        #[serde(default)]
        phi1: Vec<(String, TermsDesc)>,
        #[serde(default)]
        phi2: Vec<(String, String, TermsDesc)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDesc {
    pub algebra: AlgebraDesc,
    pub space: SpaceDesc,
    pub d: MapDesc,
    #[serde(default)]
    pub actions: BTreeMap<String, MapDesc>,
}

fn parse_degree(s: &str) -> Result<i64> {
    s.parse().map_err(|_| Error::Parse(format!("bad degree {s:?}")))
}

impl SpaceDesc {
    pub fn from_space(s: &GradedSpace) -> SpaceDesc {
        SpaceDesc { grading: s.grading(), dims: s.dims().iter().map(|(d, n)| (d.to_string(), *n)).collect() }
    }

    pub fn to_space(&self, field: Field) -> Result<GradedSpace> {
        let dims = self.dims.iter().map(|(d, n)| Ok((parse_degree(d)?, *n))).collect::<Result<Vec<_>>>()?;
        Ok(GradedSpace::new(field, self.grading, dims))
    }
}

impl MapDesc {
    pub fn from_map(m: &GradedMap) -> MapDesc {
        let blocks = m
            .blocks()
            .iter()
            .map(|(d, b)| {
                let rows = (0..b.rows()).map(|r| (0..b.cols()).map(|c| b.get(r, c).to_string()).collect()).collect();
                (d.to_string(), rows)
            })
            .collect();
        MapDesc { shift: m.shift(), blocks }
    }

    pub fn to_map(&self, source: &GradedSpace, target: &GradedSpace) -> Result<GradedMap> {
        let f = source.field();
        let mut m = GradedMap::zero(source, target, self.shift);
        for (d, rows) in &self.blocks {
            let d = parse_degree(d)?;
            let (r, c) = m.block_shape(d);
            let entries = rows
                .iter()
                .map(|row| row.iter().map(|x| f.parse(x)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            m.set_block(d, Matrix::from_rows(f, r, c, entries)?)?;
        }
        Ok(m)
    }
}

fn terms_desc(t: &TableAlgebra, terms: &Terms) -> TermsDesc {
    terms.iter().map(|(k, v)| (t.labels()[*k].clone(), v.to_string())).collect()
}

fn terms_from(t: &TableAlgebra, d: &TermsDesc) -> Result<Terms> {
    d.iter()
        .map(|(l, v)| {
            let k = t.index_of(l).ok_or_else(|| Error::Parse(format!("unknown basis label {l:?}")))?;
            Ok((k, t.field().parse(v)?))
        })
        .collect()
}

impl TableDesc {
    pub fn from_table(t: &TableAlgebra) -> TableDesc {
        let n = t.len();
        let basis = (0..n).map(|i| (t.labels()[i].clone(), t.degree_of(i))).collect();
        let mut mul = Vec::new();
        for i in 1..n {
            for j in 1..n {
                let p = t.mul_terms(i, j);
                if !p.is_empty() {
                    mul.push((t.labels()[i].clone(), t.labels()[j].clone(), terms_desc(t, &p)));
                }
            }
        }
        let diff = (0..n)
            .filter_map(|i| {
                let d = t.diff_terms(i);
                (!d.is_empty()).then(|| (t.labels()[i].clone(), terms_desc(t, &d)))
            })
            .collect();
        TableDesc { grading: t.grading(), basis, mul, diff, curvature: terms_desc(t, t.curvature_terms()) }
    }

    pub fn to_table(&self, field: Field) -> Result<TableAlgebra> {
        let basis: Vec<(&str, i64)> = self.basis.iter().map(|(l, d)| (l.as_str(), *d)).collect();
        let mut t = TableAlgebra::new(field, self.grading, &basis)?;
        let idx =
            |t: &TableAlgebra, l: &str| t.index_of(l).ok_or_else(|| Error::Parse(format!("unknown basis label {l:?}")));
        for (a, b, p) in &self.mul {
            let (i, j) = (idx(&t, a)?, idx(&t, b)?);
            let terms = terms_from(&t, p)?;
            t.set_mul(i, j, terms)?;
        }
        for (a, p) in &self.diff {
            let i = idx(&t, a)?;
            let terms = terms_from(&t, p)?;
            t.set_diff(i, terms)?;
        }
        let c = terms_from(&t, &self.curvature)?;
        t.set_curvature(c)?;
        Ok(t)
    }
}

impl AlgebraDesc {
    pub fn from_algebra(a: &CdgAlgebra) -> AlgebraDesc {
        let rho = |r: &RingElem| [r.a.to_string(), r.b.to_string()];
        match a.family() {
            Family::Base => AlgebraDesc::Base,
            Family::InitialPoly => AlgebraDesc::InitialPoly { trunc: None },
            Family::InitialTrunc(n) => AlgebraDesc::InitialPoly { trunc: Some(*n) },
            Family::DualNumbers => AlgebraDesc::DualNumbers,
            Family::PolyU { ring, rho: r } => AlgebraDesc::PolyU { ring: *ring, rho: rho(r) },
            Family::Z2Rho { ring, rho: r } => AlgebraDesc::Z2Rho { ring: *ring, rho: rho(r) },
            Family::Table(t) => AlgebraDesc::Table(TableDesc::from_table(t)),
            Family::Deformed(df) => {
                let b = &df.base;
                AlgebraDesc::Deformed {
                    base: TableDesc::from_table(b),
                    phi0: terms_desc(b, &df.phi0),
                    phi1: df.phi1.iter().map(|(i, t)| (b.labels()[*i].clone(), terms_desc(b, t))).collect(),
                    phi2: df
                        .phi2
                        .iter()
                        .map(|((i, j), t)| (b.labels()[*i].clone(), b.labels()[*j].clone(), terms_desc(b, t)))
                        .collect(),
                }
            }
        }
    }

    pub fn to_algebra(&self, field: Field) -> Result<Arc<CdgAlgebra>> {
        let rho =
            |r: &[String; 2]| -> Result<RingElem> { Ok(RingElem { a: field.parse(&r[0])?, b: field.parse(&r[1])? }) };
        match self {
            AlgebraDesc::Base => Ok(CdgAlgebra::base(field)),
            AlgebraDesc::InitialPoly { trunc: None } => Ok(CdgAlgebra::initial_poly(field)),
            AlgebraDesc::InitialPoly { trunc: Some(n) } => CdgAlgebra::initial_trunc(field, *n),
            AlgebraDesc::DualNumbers => Ok(CdgAlgebra::dual_numbers(field)),
            AlgebraDesc::PolyU { ring, rho: r } => CdgAlgebra::poly_u(field, *ring, rho(r)?),
            AlgebraDesc::Z2Rho { ring, rho: r } => CdgAlgebra::z2_rho(field, *ring, rho(r)?),
            AlgebraDesc::Table(t) => Ok(CdgAlgebra::table(t.to_table(field)?)),
            AlgebraDesc::Deformed { base, phi0, phi1, phi2 } => {
                let b = base.to_table(field)?;
                let idx = |l: &str| b.index_of(l).ok_or_else(|| Error::Parse(format!("unknown basis label {l:?}")));
                let p0 = terms_from(&b, phi0)?;
                let p1 =
                    phi1.iter().map(|(l, t)| Ok((idx(l)?, terms_from(&b, t)?))).collect::<Result<BTreeMap<_, _>>>()?;
                let p2 = phi2
                    .iter()
                    .map(|(l, r, t)| Ok(((idx(l)?, idx(r)?), terms_from(&b, t)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                CdgAlgebra::deformed(b.clone(), p0, p1, p2)
            }
        }
    }
}

impl ModuleDesc {
    pub fn from_module(m: &CdgModule) -> ModuleDesc {
        ModuleDesc {
            algebra: AlgebraDesc::from_algebra(m.algebra()),
            space: SpaceDesc::from_space(m.space()),
            d: MapDesc::from_map(m.d()),
            actions: m.actions().iter().map(|(k, a)| (k.clone(), MapDesc::from_map(a))).collect(),
        }
    }

    pub fn to_module(&self, field: Field) -> Result<CdgModule> {
        let alg = self.algebra.to_algebra(field)?;
        let space = self.space.to_space(field)?;
        let d = self.d.to_map(&space, &space)?;
        let actions = self
            .actions
            .iter()
            .map(|(k, a)| Ok((k.clone(), a.to_map(&space, &space)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        CdgModule::new(&alg, space, d, actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{interval_precomplex, splitting_cone, Carrier, Splitting};

    fn q() -> Field {
        Field::Rationals
    }

    fn roundtrip(m: &CdgModule, f: Field) {
        let desc = ModuleDesc::from_module(m);
        let json = serde_json::to_string(&desc).unwrap();
        let back: ModuleDesc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, desc);
        assert_eq!(&back.to_module(f).unwrap(), m);
    }

    #[test]
    fn space_shape() {
        let s = GradedSpace::new(q(), Grading::Z2, [(0, 2), (1, 1)]);
        let v = serde_json::to_value(SpaceDesc::from_space(&s)).unwrap();
        assert_eq!(v, serde_json::json!({"grading": "Z2", "dims": {"0": 2, "1": 1}}));
    }

    #[test]
    fn algebra_shape() {
        let a = CdgAlgebra::initial_trunc(q(), 3).unwrap();
        let v = serde_json::to_value(AlgebraDesc::from_algebra(&a)).unwrap();
        assert_eq!(v, serde_json::json!({"family": "initial_poly", "trunc": 3}));
    }

    #[test]
    fn modules_roundtrip() {
        let kc = CdgAlgebra::initial_poly(q());
        roundtrip(&interval_precomplex(&kc, 2, 3, -1).unwrap(), q());
        let f5 = Field::prime(5).unwrap();
        let a = CdgAlgebra::z2_rho(f5, Ring::KEps, RingElem::new(f5, 0, 1)).unwrap();
        let s = Splitting { phi: a.element(0, &[0, 1]), psi: a.unit(), offset: 1 };
        roundtrip(&splitting_cone(&a, &s, Carrier::Z2).unwrap(), f5);
    }

    #[test]
    fn deformed_algebra_roundtrips() {
        let base = TableAlgebra::new(q(), Grading::Z, &[("1", 0), ("y", 2)]).unwrap();
        let a = CdgAlgebra::deformed(base, vec![(1, q().one())], BTreeMap::new(), BTreeMap::new()).unwrap();
        let desc = AlgebraDesc::from_algebra(&a);
        let json = serde_json::to_string(&desc).unwrap();
        let back: AlgebraDesc = serde_json::from_str(&json).unwrap();
        assert_eq!(*back.to_algebra(q()).unwrap(), *a);
    }

    #[test]
    fn malformed_entries_are_rejected() {
        let s = GradedSpace::concentrated(q(), Grading::Z, 0, 1);
        let bad = MapDesc { shift: 0, blocks: BTreeMap::from([("0".into(), vec![vec!["x".into()]])]) };
        assert!(matches!(bad.to_map(&s, &s), Err(Error::Parse(_))));
        let wrong = MapDesc { shift: 0, blocks: BTreeMap::from([("0".into(), vec![vec!["1".into(), "2".into()]])]) };
        assert!(wrong.to_map(&s, &s).is_err());
    }
}
