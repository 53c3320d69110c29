//! Concrete curved dg algebras.
//!
//! Polynomial families are infinite but locally finite; their bases are
//! given per degree by closed formulas, so every consumer works inside an
//! explicit degree window. Finite algebras are entered as tables.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::axioms::AxiomReport;
use crate::error::{Error, Result};
use crate::graded::{sign, Grading};
use crate::linalg::{Field, Scalar, Vector};

/// Coefficient ring of the `u`-families: `k` or `k[ε]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Ring {
    #[serde(rename = "k")]
    K,
    #[serde(rename = "k[eps]")]
    KEps,
}

impl Ring {
    fn rank(self) -> usize {
        match self {
            Ring::K => 1,
            Ring::KEps => 2,
        }
    }

    /// Product of ring basis elements (1, ε) as a coefficient vector.
    fn mul(self, field: Field, i: usize, j: usize) -> Vector {
        let mut v = vec![field.zero(); self.rank()];
        if i + j < self.rank() {
            v[i + j] = field.one();
        }
        v
    }
}

/// `a + bε`; `b` must vanish over `Ring::K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElem {
    pub a: Scalar,
    pub b: Scalar,
}

impl RingElem {
    pub fn new(field: Field, a: i64, b: i64) -> RingElem {
        RingElem { a: field.from_i64(a), b: field.from_i64(b) }
    }

    fn coeffs(&self, ring: Ring) -> Vector {
        match ring {
            Ring::K => vec![self.a.clone()],
            Ring::KEps => vec![self.a.clone(), self.b.clone()],
        }
    }
}

/// A homogeneous algebra element: coefficients on the basis of one degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Element {
    pub degree: i64,
    pub coeffs: Vector,
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn add(&self, other: &Element) -> Element {
        assert_eq!(self.degree, other.degree, "adding elements of different degrees");
        Element { degree: self.degree, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Element {
        Element { degree: self.degree, coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn sub(&self, other: &Element) -> Element {
        assert_eq!(self.degree, other.degree, "subtracting elements of different degrees");
        Element { degree: self.degree, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        self.coeffs.iter().enumerate().filter(|(_, v)| !v.is_zero())
    }
}

/// Sparse combination of table basis elements, by global index.
pub type Terms = Vec<(usize, Scalar)>;

/// A finite algebra given by structure constants. Index 0 is the unit, in
/// degree 0; products with it are implicit and never read from `mul`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TableAlgebra {
    field: Field,
    grading: Grading,
    labels: Vec<String>,
    degrees: Vec<i64>,
    mul: BTreeMap<(usize, usize), Terms>,
    diff: BTreeMap<usize, Terms>,
    curvature: Terms,
    by_degree: BTreeMap<i64, Vec<usize>>,
    local: Vec<usize>,
}

impl TableAlgebra {
    /// Starts a table with the given basis; the first entry is the unit.
    pub fn new(field: Field, grading: Grading, basis: &[(&str, i64)]) -> Result<TableAlgebra> {
        if basis.first().map(|b| grading.normalize(b.1)) != Some(0) {
            return Err(Error::Usage("table basis must start with the unit in degree 0".into()));
        }
        let mut labels = Vec::new();
        let mut degrees = Vec::new();
        for (l, d) in basis {
            if labels.iter().any(|x: &String| x == l) {
                return Err(Error::Usage(format!("duplicate basis label {l:?}")));
            }
            labels.push(l.to_string());
            degrees.push(grading.normalize(*d));
        }
        let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut local = vec![0; labels.len()];
        for (i, &d) in degrees.iter().enumerate() {
            let v = by_degree.entry(d).or_default();
            local[i] = v.len();
            v.push(i);
        }
        Ok(TableAlgebra {
            field,
            grading,
            labels,
            degrees,
            mul: BTreeMap::new(),
            diff: BTreeMap::new(),
            curvature: Vec::new(),
            by_degree,
            local,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degree_of(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check_terms(&self, terms: &Terms, degree: i64, what: &str) -> Result<()> {
        for (k, v) in terms {
            if *k >= self.len() {
                return Err(Error::Usage(format!("{what}: basis index {k} out of range")));
            }
            if v.field() != self.field {
                return Err(Error::Usage(format!("{what}: coefficient over the wrong field")));
            }
            if self.degrees[*k] != self.grading.normalize(degree) {
                return Err(Error::Usage(format!(
                    "{what}: term {} has degree {}, expected {}",
                    self.labels[*k], self.degrees[*k], degree
                )));
            }
        }
        Ok(())
    }

    pub fn set_mul(&mut self, i: usize, j: usize, terms: Terms) -> Result<()> {
        if i == 0 || j == 0 {
            return Err(Error::Usage("products with the unit are implicit".into()));
        }
        self.check_terms(&terms, self.degrees[i] + self.degrees[j], "mul")?;
        self.mul.insert((i, j), terms);
        Ok(())
    }

    pub fn set_diff(&mut self, i: usize, terms: Terms) -> Result<()> {
        self.check_terms(&terms, self.degrees[i] + 1, "diff")?;
        self.diff.insert(i, terms);
        Ok(())
    }

    pub fn set_curvature(&mut self, terms: Terms) -> Result<()> {
        self.check_terms(&terms, 2, "curvature")?;
        self.curvature = terms;
        Ok(())
    }

    /// Product of basis elements as global terms.
    pub fn mul_terms(&self, i: usize, j: usize) -> Terms {
        if i == 0 {
            return vec![(j, self.field.one())];
        }
        if j == 0 {
            return vec![(i, self.field.one())];
        }
        self.mul.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn diff_terms(&self, i: usize) -> Terms {
        self.diff.get(&i).cloned().unwrap_or_default()
    }

    pub fn curvature_terms(&self) -> &Terms {
        &self.curvature
    }

    fn dim(&self, d: i64) -> usize {
        self.by_degree.get(&self.grading.normalize(d)).map_or(0, Vec::len)
    }

    fn global(&self, d: i64, i: usize) -> usize {
        self.by_degree[&self.grading.normalize(d)][i]
    }

    fn to_element(&self, degree: i64, terms: &Terms) -> Element {
        let degree = self.grading.normalize(degree);
        let mut coeffs = vec![self.field.zero(); self.dim(degree)];
        for (k, v) in terms {
            let c = &coeffs[self.local[*k]] + v;
            coeffs[self.local[*k]] = c;
        }
        Element { degree, coeffs }
    }

    fn from_element(&self, e: &Element) -> Terms {
        e.terms().map(|(i, v)| (self.global(e.degree, i), v.clone())).collect()
    }
}

/// Data of a first-order deformation `A_φ[ε]` of a table algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Deformed {
    pub base: TableAlgebra,
    pub phi0: Terms,
    pub phi1: BTreeMap<usize, Terms>,
    pub phi2: BTreeMap<(usize, usize), Terms>,
    table: TableAlgebra,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Base,
    InitialPoly,
    /// `k[c]/c^n`.
    InitialTrunc(usize),
    DualNumbers,
    PolyU {
        ring: Ring,
        rho: RingElem,
    },
    Z2Rho {
        ring: Ring,
        rho: RingElem,
    },
    Table(TableAlgebra),
    Deformed(Box<Deformed>),
}

/// A designated algebra generator; module actions are stored per generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub element: Element,
}

impl Generator {
    pub fn degree(&self) -> i64 {
        self.element.degree
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CdgAlgebra {
    field: Field,
    family: Family,
}

pub const EPS: &str = "eps";

impl CdgAlgebra {
    fn wrap(field: Field, family: Family) -> Arc<CdgAlgebra> {
        Arc::new(CdgAlgebra { field, family })
    }

    pub fn base(field: Field) -> Arc<CdgAlgebra> {
        CdgAlgebra::wrap(field, Family::Base)
    }

    pub fn initial_poly(field: Field) -> Arc<CdgAlgebra> {
        CdgAlgebra::wrap(field, Family::InitialPoly)
    }

    pub fn initial_trunc(field: Field, n: usize) -> Result<Arc<CdgAlgebra>> {
        if n == 0 {
            return Err(Error::Usage("k[c]/c^n needs n >= 1".into()));
        }
        Ok(CdgAlgebra::wrap(field, Family::InitialTrunc(n)))
    }

    pub fn dual_numbers(field: Field) -> Arc<CdgAlgebra> {
        CdgAlgebra::wrap(field, Family::DualNumbers)
    }

    fn check_rho(field: Field, ring: Ring, rho: &RingElem) -> Result<()> {
        if rho.a.field() != field || rho.b.field() != field {
            return Err(Error::Usage("rho over the wrong field".into()));
        }
        if ring == Ring::K && !rho.b.is_zero() {
            return Err(Error::Usage("rho must lie in k when R = k".into()));
        }
        Ok(())
    }

    /// `R_ρ[u]` with `|u| = 2` and curvature `ρu`.
    pub fn poly_u(field: Field, ring: Ring, rho: RingElem) -> Result<Arc<CdgAlgebra>> {
        CdgAlgebra::check_rho(field, ring, &rho)?;
        Ok(CdgAlgebra::wrap(field, Family::PolyU { ring, rho }))
    }

    /// The Z/2-graded algebra `R` with curvature `ρ`: the finite model of
    /// `R_ρ[u, u^-1]`.
    pub fn z2_rho(field: Field, ring: Ring, rho: RingElem) -> Result<Arc<CdgAlgebra>> {
        CdgAlgebra::check_rho(field, ring, &rho)?;
        Ok(CdgAlgebra::wrap(field, Family::Z2Rho { ring, rho }))
    }

    pub fn table(table: TableAlgebra) -> Arc<CdgAlgebra> {
        CdgAlgebra::wrap(table.field, Family::Table(table))
    }

    /// `A_φ[ε]`: multiplication `m + φ2 ε`, predifferential `d + φ1 ε`,
    /// curvature `c_A + φ0 ε`. Basis: the base basis, then each base
    /// element times ε.
    pub fn deformed(
        base: TableAlgebra,
        phi0: Terms,
        phi1: BTreeMap<usize, Terms>,
        phi2: BTreeMap<(usize, usize), Terms>,
    ) -> Result<Arc<CdgAlgebra>> {
        base.check_terms(&phi0, 2, "phi0")?;
        for (i, t) in &phi1 {
            base.check_terms(t, base.degrees[*i] + 1, "phi1")?;
        }
        for ((i, j), t) in &phi2 {
            base.check_terms(t, base.degrees[*i] + base.degrees[*j], "phi2")?;
        }
        if base.labels.iter().any(|l| l == EPS) {
            return Err(Error::Usage(format!("base label {EPS:?} is reserved")));
        }
        let n = base.len();
        let mut basis: Vec<(String, i64)> = base.labels.iter().cloned().zip(base.degrees.iter().copied()).collect();
        for i in 0..n {
            let label = if i == 0 { EPS.to_string() } else { format!("{}*{EPS}", base.labels[i]) };
            basis.push((label, base.degrees[i]));
        }
        let refs: Vec<(&str, i64)> = basis.iter().map(|(l, d)| (l.as_str(), *d)).collect();
        let mut table = TableAlgebra::new(base.field, base.grading, &refs)?;
        let shift = |t: &Terms| -> Terms { t.iter().map(|(k, v)| (k + n, v.clone())).collect() };
        for i in 0..n {
            for j in 0..n {
                let ab = base.mul_terms(i, j);
                if i != 0 && j != 0 {
                    let mut t = ab.clone();
                    if let Some(p) = phi2.get(&(i, j)) {
                        t.extend(shift(p));
                    }
                    table.set_mul(i, j, t)?;
                }
                let abe = shift(&ab);
                if i != 0 {
                    table.set_mul(i, j + n, abe.clone())?;
                }
                if j != 0 {
                    table.set_mul(i + n, j, abe)?;
                }
                table.set_mul(i + n, j + n, vec![])?;
            }
            let mut d = base.diff_terms(i);
            if let Some(p) = phi1.get(&i) {
                d.extend(shift(p));
            }
            table.set_diff(i, d)?;
            table.set_diff(i + n, shift(&base.diff_terms(i)))?;
        }
        let mut c = base.curvature.clone();
        c.extend(shift(&phi0));
        table.set_curvature(c)?;
        Ok(CdgAlgebra::wrap(base.field, Family::Deformed(Box::new(Deformed { base, phi0, phi1, phi2, table }))))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn grading(&self) -> Grading {
        match &self.family {
            Family::Z2Rho { .. } => Grading::Z2,
            Family::Table(t) => t.grading,
            Family::Deformed(df) => df.table.grading,
            _ => Grading::Z,
        }
    }

    fn as_table(&self) -> Option<&TableAlgebra> {
        match &self.family {
            Family::Table(t) => Some(t),
            Family::Deformed(df) => Some(&df.table),
            _ => None,
        }
    }

    /// Dimension of the degree `d` part.
    pub fn dim(&self, d: i64) -> usize {
        let even_nonneg = |d: i64| d >= 0 && d % 2 == 0;
        match &self.family {
            Family::Base => usize::from(d == 0),
            Family::InitialPoly => usize::from(even_nonneg(d)),
            Family::InitialTrunc(n) => usize::from(even_nonneg(d) && ((d / 2) as usize) < *n),
            Family::DualNumbers => {
                if d == 0 {
                    2
                } else {
                    0
                }
            }
            Family::PolyU { ring, .. } => {
                if even_nonneg(d) {
                    ring.rank()
                } else {
                    0
                }
            }
            Family::Z2Rho { ring, .. } => {
                if d.rem_euclid(2) == 0 {
                    ring.rank()
                } else {
                    0
                }
            }
            Family::Table(_) | Family::Deformed(_) => self.as_table().unwrap().dim(d),
        }
    }

    /// Largest occupied degree, if the algebra is finite-dimensional.
    pub fn max_degree(&self) -> Option<i64> {
        match &self.family {
            Family::Base | Family::DualNumbers => Some(0),
            Family::InitialTrunc(n) => Some(2 * (*n as i64 - 1)),
            Family::InitialPoly | Family::PolyU { .. } => None,
            Family::Z2Rho { .. } => Some(1),
            Family::Table(_) | Family::Deformed(_) => self.as_table().unwrap().by_degree.keys().next_back().copied(),
        }
    }

    /// Smallest occupied degree.
    pub fn min_degree(&self) -> i64 {
        match self.as_table() {
            Some(t) => t.by_degree.keys().next().copied().unwrap_or(0),
            None => 0,
        }
    }

    /// Basis elements `(degree, index)` with degree in `lo..=hi`; Z/2
    /// algebras ignore the window.
    pub fn basis_in(&self, lo: i64, hi: i64) -> Vec<(i64, usize)> {
        let degrees: Vec<i64> = match self.grading() {
            Grading::Z2 => vec![0, 1],
            Grading::Z => (lo..=hi).collect(),
        };
        degrees.into_iter().flat_map(|d| (0..self.dim(d)).map(move |i| (d, i))).collect()
    }

    pub fn label(&self, d: i64, i: usize) -> String {
        let upow = |n: i64, name: &str| match n {
            0 => "1".to_string(),
            1 => name.to_string(),
            _ => format!("{name}^{n}"),
        };
        match &self.family {
            Family::Base => "1".into(),
            Family::InitialPoly | Family::InitialTrunc(_) => upow(d / 2, "c"),
            Family::DualNumbers | Family::Z2Rho { .. } => ["1", EPS][i].into(),
            Family::PolyU { .. } => match (i, d / 2) {
                (0, n) => upow(n, "u"),
                (_, 0) => EPS.into(),
                (_, n) => format!("{EPS}*{}", upow(n, "u")),
            },
            Family::Table(_) | Family::Deformed(_) => {
                let t = self.as_table().unwrap();
                t.labels[t.global(d, i)].clone()
            }
        }
    }

    pub fn zero(&self, d: i64) -> Element {
        let d = self.grading().normalize(d);
        Element { degree: d, coeffs: vec![self.field.zero(); self.dim(d)] }
    }

    pub fn basis_element(&self, d: i64, i: usize) -> Element {
        let mut e = self.zero(d);
        e.coeffs[i] = self.field.one();
        e
    }

    pub fn unit(&self) -> Element {
        self.basis_element(0, 0)
    }

    pub fn element(&self, d: i64, coeffs: &[i64]) -> Element {
        assert_eq!(coeffs.len(), self.dim(d), "coefficient count");
        Element {
            degree: self.grading().normalize(d),
            coeffs: coeffs.iter().map(|&c| self.field.from_i64(c)).collect(),
        }
    }

    pub fn mul_basis(&self, d1: i64, i: usize, d2: i64, j: usize) -> Element {
        let f = self.field;
        let d = self.grading().add(d1, d2);
        let coeffs = match &self.family {
            Family::Base | Family::InitialPoly | Family::InitialTrunc(_) => vec![f.one(); self.dim(d)],
            Family::DualNumbers => Ring::KEps.mul(f, i, j),
            Family::PolyU { ring, .. } | Family::Z2Rho { ring, .. } => ring.mul(f, i, j),
            Family::Table(_) | Family::Deformed(_) => {
                let t = self.as_table().unwrap();
                return t.to_element(d, &t.mul_terms(t.global(d1, i), t.global(d2, j)));
            }
        };
        Element { degree: d, coeffs }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let mut out = self.zero(self.grading().add(a.degree, b.degree));
        for (i, x) in a.terms() {
            for (j, y) in b.terms() {
                let p = self.mul_basis(a.degree, i, b.degree, j);
                out = out.add(&p.scale(&(x * y)));
            }
        }
        out
    }

    pub fn pow(&self, a: &Element, n: usize) -> Element {
        (0..n).fold(self.unit(), |acc, _| self.mul(&acc, a))
    }

    pub fn diff_basis(&self, d: i64, i: usize) -> Element {
        match self.as_table() {
            Some(t) => t.to_element(d + 1, &t.diff_terms(t.global(d, i))),
            None => self.zero(d + 1),
        }
    }

    pub fn diff(&self, a: &Element) -> Element {
        let mut out = self.zero(a.degree + 1);
        for (i, x) in a.terms() {
            out = out.add(&self.diff_basis(a.degree, i).scale(x));
        }
        out
    }

    pub fn curvature(&self) -> Element {
        let f = self.field;
        match &self.family {
            Family::InitialPoly | Family::InitialTrunc(_) => {
                let mut c = self.zero(2);
                if !c.coeffs.is_empty() {
                    c.coeffs[0] = f.one();
                }
                c
            }
            Family::PolyU { ring, rho } => Element { degree: 2, coeffs: rho.coeffs(*ring) },
            Family::Z2Rho { ring, rho } => Element { degree: 0, coeffs: rho.coeffs(*ring) },
            Family::Table(_) | Family::Deformed(_) => {
                let t = self.as_table().unwrap();
                t.to_element(2, &t.curvature)
            }
            Family::Base | Family::DualNumbers => self.zero(2),
        }
    }

    /// True when the predifferential vanishes identically.
    pub fn has_zero_differential(&self) -> bool {
        match self.as_table() {
            Some(t) => t.diff.values().all(|v| v.iter().all(|(_, s)| s.is_zero())),
            None => true,
        }
    }

    pub fn has_eps(&self) -> bool {
        matches!(
            &self.family,
            Family::DualNumbers
                | Family::PolyU { ring: Ring::KEps, .. }
                | Family::Z2Rho { ring: Ring::KEps, .. }
                | Family::Deformed(_)
        )
    }

    pub fn generators(&self) -> Vec<Generator> {
        let g = |name: &str, d: i64, i: usize| Generator { name: name.to_string(), element: self.basis_element(d, i) };
        match &self.family {
            Family::Base => vec![],
            Family::InitialPoly => vec![g("c", 2, 0)],
            Family::InitialTrunc(n) => {
                if *n >= 2 {
                    vec![g("c", 2, 0)]
                } else {
                    vec![]
                }
            }
            Family::DualNumbers => vec![g(EPS, 0, 1)],
            Family::PolyU { ring: Ring::K, .. } => vec![g("u", 2, 0)],
            Family::PolyU { ring: Ring::KEps, .. } => vec![g("u", 2, 0), g(EPS, 0, 1)],
            Family::Z2Rho { ring: Ring::K, .. } => vec![],
            Family::Z2Rho { ring: Ring::KEps, .. } => vec![g(EPS, 0, 1)],
            Family::Table(t) => (1..t.len()).map(|k| g(&t.labels[k], t.degrees[k], t.local[k])).collect(),
            Family::Deformed(df) => {
                let t = &df.table;
                let n = df.base.len();
                (1..=n).map(|k| g(&t.labels[k], t.degrees[k], t.local[k])).collect()
            }
        }
    }

    /// The basis element `(d, i)` as an ordered product of generators.
    pub fn word(&self, d: i64, i: usize) -> Vec<String> {
        let powers = |name: &str, n: i64| vec![name.to_string(); n as usize];
        match &self.family {
            Family::Base => vec![],
            Family::InitialPoly | Family::InitialTrunc(_) => powers("c", d / 2),
            Family::DualNumbers | Family::Z2Rho { .. } => powers(EPS, i as i64),
            Family::PolyU { .. } => {
                let mut w = powers(EPS, i as i64);
                w.extend(powers("u", d / 2));
                w
            }
            Family::Table(t) => {
                let k = t.global(d, i);
                if k == 0 {
                    vec![]
                } else {
                    vec![t.labels[k].clone()]
                }
            }
            Family::Deformed(df) => {
                let n = df.base.len();
                let k = df.table.global(d, i);
                match k {
                    0 => vec![],
                    k if k < n => vec![df.table.labels[k].clone()],
                    k if k == n => vec![EPS.to_string()],
                    k => vec![df.base.labels[k - n].clone(), EPS.to_string()],
                }
            }
        }
    }

    /// The quotient by ε, for the families that have one.
    pub fn epsilon_quotient(&self) -> Option<Arc<CdgAlgebra>> {
        let f = self.field;
        Some(match &self.family {
            Family::DualNumbers => CdgAlgebra::base(f),
            Family::PolyU { ring: Ring::KEps, rho } => {
                CdgAlgebra::wrap(f, Family::PolyU { ring: Ring::K, rho: RingElem { a: rho.a.clone(), b: f.zero() } })
            }
            Family::Z2Rho { ring: Ring::KEps, rho } => {
                CdgAlgebra::wrap(f, Family::Z2Rho { ring: Ring::K, rho: RingElem { a: rho.a.clone(), b: f.zero() } })
            }
            Family::Deformed(df) => CdgAlgebra::table(df.base.clone()),
            _ => return None,
        })
    }

    /// Image of a basis element under the ε-quotient map, as `(degree,
    /// index)` in the quotient, or `None` when it lies in the ε-part.
    fn eps_reduce_basis(&self, d: i64, i: usize) -> Option<(i64, usize)> {
        match &self.family {
            Family::DualNumbers | Family::PolyU { .. } | Family::Z2Rho { .. } => (i == 0).then_some((d, 0)),
            Family::Deformed(df) => {
                let k = df.table.global(d, i);
                (k < df.base.len()).then(|| (d, df.base.local[k]))
            }
            _ => Some((d, i)),
        }
    }

    pub fn describe(&self) -> String {
        let rho = |r: &RingElem| {
            if r.b.is_zero() {
                format!("{}", r.a)
            } else {
                format!("{}+{}eps", r.a, r.b)
            }
        };
        let ring = |r: &Ring| match r {
            Ring::K => "k",
            Ring::KEps => "k[eps]",
        };
        match &self.family {
            Family::Base => "k".into(),
            Family::InitialPoly => "k[c]".into(),
            Family::InitialTrunc(n) => format!("k[c]/c^{n}"),
            Family::DualNumbers => "k[eps]".into(),
            Family::PolyU { ring: r, rho: p } => format!("{}_{}[u]", ring(r), rho(p)),
            Family::Z2Rho { ring: r, rho: p } => format!("Z2({}, {})", ring(r), rho(p)),
            Family::Table(t) => format!("table({})", t.labels.join(",")),
            Family::Deformed(df) => format!("deformed(table({}))", df.base.labels.join(",")),
        }
    }
}

impl fmt::Debug for CdgAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CdgAlgebra({} over {})", self.describe(), self.field)
    }
}

fn show(alg: &CdgAlgebra, e: &Element) -> String {
    let parts: Vec<String> = e
        .terms()
        .map(|(i, v)| {
            let l = alg.label(e.degree, i);
            if v.is_one() {
                l
            } else {
                format!("{v}*{l}")
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Unit, associativity, Leibniz, `d(c) = 0`, `d(1) = 0` and
/// `d²a = ca − ac` on every basis element with degree in the window.
pub fn check_cdg_axioms(alg: &CdgAlgebra, lo: i64, hi: i64) -> AxiomReport {
    let mut rep = AxiomReport::new();
    let basis = alg.basis_in(lo, hi);
    let one = alg.unit();
    let c = alg.curvature();
    let f = alg.field();
    let el = |&(d, i): &(i64, usize)| alg.basis_element(d, i);
    let name = |&(d, i): &(i64, usize)| alg.label(d, i);

    rep.check(alg.diff(&one).is_zero(), "d(1)=0", || "1".into());
    rep.check(alg.diff(&c).is_zero(), "d(c)=0", || show(alg, &c));
    for x in &basis {
        let a = el(x);
        rep.check(alg.mul(&one, &a) == a && alg.mul(&a, &one) == a, "unit", || name(x));
        let dda = alg.diff(&alg.diff(&a));
        let comm = alg.mul(&c, &a).sub(&alg.mul(&a, &c));
        rep.check(dda == comm, "d^2=[c,-]", || name(x));
        for y in &basis {
            let b = el(y);
            let ab = alg.mul(&a, &b);
            let lhs = alg.diff(&ab);
            let rhs = alg.mul(&alg.diff(&a), &b).add(&alg.mul(&a, &alg.diff(&b)).scale(&sign(f, a.degree)));
            rep.check(lhs == rhs, "leibniz", || format!("({}, {})", name(x), name(y)));
            for z in &basis {
                let cz = el(z);
                let l = alg.mul(&ab, &cz);
                let r = alg.mul(&a, &alg.mul(&b, &cz));
                rep.check(l == r, "associativity", || format!("({}, {}, {})", name(x), name(y), name(z)));
            }
        }
    }
    rep
}

/// Smallest `n >= 1` with `c^n = 0` inside the window of degrees `<= hi`,
/// if any.
pub fn curvature_nilpotency(alg: &CdgAlgebra, hi: i64) -> Option<usize> {
    let c = alg.curvature();
    let mut p = alg.unit();
    for n in 1.. {
        p = alg.mul(&p, &c);
        if p.is_zero() {
            return Some(n);
        }
        if p.degree > hi || alg.grading() == Grading::Z2 && n > 64 {
            return None;
        }
    }
    None
}

/// The component identities making `(φ0, φ1, φ2)` a Hochschild 2-cocycle
/// compatible with the base's structure, on all base basis triples.
pub fn check_hochschild(alg: &CdgAlgebra) -> Result<AxiomReport> {
    let Family::Deformed(df) = alg.family() else {
        return Err(Error::Usage("Hochschild check needs a deformed algebra".into()));
    };
    let base = &df.base;
    let b = CdgAlgebra::table(base.clone());
    let f = alg.field();
    let n = base.len();
    let el = |k: usize| base.to_element(base.degrees[k], &vec![(k, f.one())]);
    let phi1 = |e: &Element| {
        let mut out = b.zero(e.degree + 1);
        for (k, v) in base.from_element(e) {
            if let Some(t) = df.phi1.get(&k) {
                out = out.add(&base.to_element(e.degree + 1, t).scale(&v));
            }
        }
        out
    };
    let phi2 = |x: &Element, y: &Element| {
        let deg = x.degree + y.degree;
        let mut out = b.zero(deg);
        for (i, u) in base.from_element(x) {
            for (j, v) in base.from_element(y) {
                if let Some(t) = df.phi2.get(&(i, j)) {
                    out = out.add(&base.to_element(deg, t).scale(&(&u * &v)));
                }
            }
        }
        out
    };
    let phi0 = base.to_element(2, &df.phi0);
    let c_a = b.curvature();
    let mut rep = AxiomReport::new();
    let label = |k: usize| base.labels[k].clone();

    let dphi0 = b.diff(&phi0).add(&phi1(&c_a));
    rep.check(dphi0.is_zero(), "hochschild-curvature-closed", || show(&b, &phi0));
    rep.check(phi1(&b.unit()).is_zero(), "hochschild-normalized", || "phi1(1)".into());
    for i in 0..n {
        let a = el(i);
        rep.check(phi2(&b.unit(), &a).is_zero() && phi2(&a, &b.unit()).is_zero(), "hochschild-normalized", || label(i));
        // (dφ1 + φ1 d)(a) = φ0 a − a φ0 + φ2(c, a) − φ2(a, c)
        let lhs = b.diff(&phi1(&a)).add(&phi1(&b.diff(&a)));
        let rhs = b.mul(&phi0, &a).sub(&b.mul(&a, &phi0)).add(&phi2(&c_a, &a)).sub(&phi2(&a, &c_a));
        rep.check(lhs == rhs, "hochschild-curvature", || label(i));
        for j in 0..n {
            let y = el(j);
            let s = sign(f, a.degree);
            let lhs = b.diff(&phi2(&a, &y)).add(&phi1(&b.mul(&a, &y)));
            let rhs = b
                .mul(&phi1(&a), &y)
                .add(&b.mul(&a, &phi1(&y)).scale(&s))
                .add(&phi2(&b.diff(&a), &y))
                .add(&phi2(&a, &b.diff(&y)).scale(&s));
            rep.check(lhs == rhs, "hochschild-leibniz", || format!("({}, {})", label(i), label(j)));
            for k in 0..n {
                let z = el(k);
                let lhs = b.mul(&a, &phi2(&y, &z)).add(&phi2(&a, &b.mul(&y, &z)));
                let rhs = phi2(&b.mul(&a, &y), &z).add(&b.mul(&phi2(&a, &y), &z));
                rep.check(lhs == rhs, "hochschild-assoc", || format!("({}, {}, {})", label(i), label(j), label(k)));
            }
        }
    }
    Ok(rep)
}

/// Identity between the Z/2 model and the parity collapse of the truncated
/// Laurent algebra `R_ρ[u, u^-1]` on degrees `2*lo ..= 2*hi`: the collapse
/// `r u^n ↦ r` is multiplicative and sends `ρu` to the curvature `ρ`.
pub fn check_laurent_collapse(z2: &CdgAlgebra, lo: i64, hi: i64) -> Result<AxiomReport> {
    let Family::Z2Rho { ring, rho } = z2.family() else {
        return Err(Error::Usage("Laurent collapse check needs a Z2Rho algebra".into()));
    };
    let f = z2.field();
    let mut rep = AxiomReport::new();
    // Laurent basis element r_i u^n, product r_i u^a · r_j u^b = (r_i r_j) u^(a+b)
    for a in lo..=hi {
        for b in lo..=hi {
            for i in 0..ring.rank() {
                for j in 0..ring.rank() {
                    let laurent = ring.mul(f, i, j);
                    let model = z2.mul_basis(2 * a, i, 2 * b, j);
                    rep.check(model.coeffs == laurent && model.degree == 0, "collapse-mul", || {
                        format!("{} u^{a} * {} u^{b}", z2.label(0, i), z2.label(0, j))
                    });
                }
            }
        }
    }
    let c = z2.curvature();
    rep.check(c.degree == 0 && c.coeffs == rho.coeffs(*ring), "collapse-curvature", || "rho u".into());
    rep.check(z2.has_zero_differential(), "collapse-differential", || "d".into());
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorphismKind {
    Identity,
    /// Out of `k[c]` or `k[c]/c^n`, determined by the image of `c`.
    FromInitial {
        c_image: Element,
    },
    /// `A -> A/ε`.
    EpsilonQuotient,
    /// Images of every source basis element, keyed by `(degree, index)`.
    Explicit(BTreeMap<(i64, usize), Element>),
}

#[derive(Clone, Debug)]
pub struct StrictMorphism {
    pub source: Arc<CdgAlgebra>,
    pub target: Arc<CdgAlgebra>,
    pub kind: MorphismKind,
}

impl StrictMorphism {
    pub fn identity(a: &Arc<CdgAlgebra>) -> StrictMorphism {
        StrictMorphism { source: a.clone(), target: a.clone(), kind: MorphismKind::Identity }
    }

    /// The unique strict morphism `k[c] -> A` (or `k[c]/c^n -> A` when
    /// `trunc = Some(n)`) sending `c` to the curvature of `A`.
    pub fn initial(target: &Arc<CdgAlgebra>, trunc: Option<usize>) -> Result<StrictMorphism> {
        let f = target.field();
        let c = target.curvature();
        let source = match trunc {
            None => CdgAlgebra::initial_poly(f),
            Some(n) => {
                let cn = target.pow(&c, n);
                if !cn.is_zero() {
                    return Err(Error::NotDefined(format!(
                        "curvature of {} has c^{n} != 0, so no morphism from k[c]/c^{n}",
                        target.describe()
                    )));
                }
                CdgAlgebra::initial_trunc(f, n)?
            }
        };
        if target.grading() == Grading::Z2 {
            return Err(Error::Unsupported("initial morphism into a Z/2-graded algebra".into()));
        }
        Ok(StrictMorphism { source, target: target.clone(), kind: MorphismKind::FromInitial { c_image: c } })
    }

    pub fn epsilon_quotient(a: &Arc<CdgAlgebra>) -> Result<StrictMorphism> {
        let target =
            a.epsilon_quotient().ok_or_else(|| Error::Unsupported(format!("{} has no epsilon", a.describe())))?;
        Ok(StrictMorphism { source: a.clone(), target, kind: MorphismKind::EpsilonQuotient })
    }

    pub fn explicit(
        source: &Arc<CdgAlgebra>,
        target: &Arc<CdgAlgebra>,
        images: BTreeMap<(i64, usize), Element>,
    ) -> StrictMorphism {
        StrictMorphism { source: source.clone(), target: target.clone(), kind: MorphismKind::Explicit(images) }
    }

    pub fn apply_basis(&self, d: i64, i: usize) -> Element {
        match &self.kind {
            MorphismKind::Identity => self.target.basis_element(d, i),
            MorphismKind::FromInitial { c_image } => self.target.pow(c_image, (d / 2) as usize),
            MorphismKind::EpsilonQuotient => match self.source.eps_reduce_basis(d, i) {
                Some((e, j)) => self.target.basis_element(e, j),
                None => self.target.zero(d),
            },
            MorphismKind::Explicit(m) => m.get(&(d, i)).cloned().unwrap_or_else(|| self.target.zero(d)),
        }
    }

    pub fn apply(&self, a: &Element) -> Element {
        let mut out = self.target.zero(a.degree);
        for (i, v) in a.terms() {
            let img = self.apply_basis(a.degree, i);
            if img.degree != out.degree {
                // degree mismatch is reported by check_strict
                return img;
            }
            out = out.add(&img.scale(v));
        }
        out
    }
}

/// Degree, unit, multiplicativity, compatibility with `d`, and `f(c) = c'`.
pub fn check_strict(f: &StrictMorphism, lo: i64, hi: i64) -> AxiomReport {
    let (s, t) = (&f.source, &f.target);
    let mut rep = AxiomReport::new();
    let basis = s.basis_in(lo, hi);
    rep.check(f.apply(&s.unit()) == t.unit(), "unital", || "1".into());
    let fc = f.apply(&s.curvature());
    rep.check(fc == t.curvature(), "curvature", || format!("f(c) = {}", show(t, &fc)));
    for &(d, i) in &basis {
        let a = s.basis_element(d, i);
        let fa = f.apply(&a);
        rep.check(fa.degree == t.grading().normalize(d), "degree", || s.label(d, i));
        if fa.degree != t.grading().normalize(d) {
            continue;
        }
        rep.check(f.apply(&s.diff(&a)) == t.diff(&fa), "commutes-with-d", || s.label(d, i));
        for &(e, j) in &basis {
            let b = s.basis_element(e, j);
            let lhs = f.apply(&s.mul(&a, &b));
            let rhs = t.mul(&fa, &f.apply(&b));
            rep.check(lhs == rhs, "multiplicative", || format!("({}, {})", s.label(d, i), s.label(e, j)));
        }
    }
    rep
}
