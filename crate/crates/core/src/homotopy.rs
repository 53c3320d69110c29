//! Decision procedures: homotopies, Hom-complex cohomology, splitting
//! (co)cycle tests and the two decompositions of finite objects.
//!
//! An unknown graded map is flattened into one variable per block entry;
//! every condition on it is linear and is solved exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Family, Ring};
use crate::error::{Error, Result};
use crate::graded::{sign, GradedMap, GradedSpace, Grading};
use crate::linalg::{Field, Matrix, Scalar, Vector};
use crate::module::{check_module_map, direct_sum_all, interval_precomplex, CdgModule, Splitting, Window};

/// Variable layout of an unknown map `source -> target` of fixed shift.
#[derive(Clone, Debug)]
pub struct MapLayout {
    source: GradedSpace,
    target: GradedSpace,
    shift: i64,
    /// source degree -> (offset, rows, cols)
    blocks: BTreeMap<i64, (usize, usize, usize)>,
    total: usize,
}

impl MapLayout {
    pub fn new(source: &GradedSpace, target: &GradedSpace, shift: i64) -> MapLayout {
        let shift = source.normalize(shift);
        let mut blocks = BTreeMap::new();
        let mut total = 0;
        for d in source.degrees() {
            let rows = target.dim(d + shift);
            let cols = source.dim(d);
            if rows > 0 {
                blocks.insert(d, (total, rows, cols));
                total += rows * cols;
            }
        }
        MapLayout { source: source.clone(), target: target.clone(), shift, blocks, total }
    }

    pub fn unknowns(&self) -> usize {
        self.total
    }

    fn var(&self, d: i64, r: usize, c: usize) -> Option<usize> {
        self.blocks.get(&self.source.normalize(d)).map(|&(off, _, cols)| off + r * cols + c)
    }

    pub fn to_map(&self, x: &[Scalar]) -> GradedMap {
        let f = self.source.field();
        let mut m = GradedMap::zero(&self.source, &self.target, self.shift);
        for (&d, &(off, rows, cols)) in &self.blocks {
            let mut b = Matrix::zeros(f, rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    b.set(r, c, x[off + r * cols + c].clone());
                }
            }
            m.set_block(d, b).expect("layout shapes");
        }
        m
    }

    pub fn from_map(&self, m: &GradedMap) -> Vector {
        let f = self.source.field();
        let mut x = vec![f.zero(); self.total];
        for (&d, &(off, _, cols)) in &self.blocks {
            for (r, c, v) in m.block(d).entries() {
                x[off + r * cols + c] = v.clone();
            }
        }
        x
    }
}

/// `coeff · left ∘ h ∘ right`; `None` stands for an identity.
struct Term<'a> {
    left: Option<&'a GradedMap>,
    right: Option<&'a GradedMap>,
    coeff: Scalar,
}

struct System<'a> {
    layout: &'a MapLayout,
    rows: Vec<BTreeMap<usize, Scalar>>,
    rhs: Vec<Scalar>,
}

impl<'a> System<'a> {
    fn new(layout: &'a MapLayout) -> System<'a> {
        System { layout, rows: Vec::new(), rhs: Vec::new() }
    }

    /// Imposes `Σ terms = target` on the source degrees accepted by `keep`.
    fn add(&mut self, terms: &[Term], target: &GradedMap, keep: &dyn Fn(i64) -> bool) {
        let f = self.layout.source.field();
        let y = target.source();
        for e in y.degrees().filter(|&e| keep(e)) {
            let xd = target.target_degree(e);
            let (nr, nc) = (target.target().dim(xd), y.dim(e));
            if nr == 0 || nc == 0 {
                continue;
            }
            let tb = target.block(e);
            let mut block_rows: Vec<Vec<BTreeMap<usize, Scalar>>> = vec![vec![BTreeMap::new(); nc]; nr];
            for t in terms {
                let hd = t.right.map_or(e, |r| r.target_degree(e));
                let Some(&(_, hrows, hcols)) = self.layout.blocks.get(&self.layout.source.normalize(hd)) else {
                    continue;
                };
                let rb = match t.right {
                    Some(r) => r.block(e).transpose(),
                    None => Matrix::identity(f, hcols),
                };
                let lb = match t.left {
                    Some(l) => l.block(hd + self.layout.shift),
                    None => Matrix::identity(f, hrows),
                };
                if rb.rows() != nc || rb.cols() != hcols || lb.rows() != nr || lb.cols() != hrows {
                    panic!("inconsistent term shapes in homotopy system");
                }
                for (r, row) in block_rows.iter_mut().enumerate() {
                    for (a, lv) in lb.row(r) {
                        for (c, cell) in row.iter_mut().enumerate() {
                            for (b, rv) in rb.row(c) {
                                let var = self.layout.var(hd, *a, *b).expect("block exists");
                                let v = &(lv * rv) * &t.coeff;
                                let cur = cell.remove(&var).unwrap_or_else(|| f.zero());
                                let s = &cur + &v;
                                if !s.is_zero() {
                                    cell.insert(var, s);
                                }
                            }
                        }
                    }
                }
            }
            for (r, row) in block_rows.into_iter().enumerate() {
                for (c, cell) in row.into_iter().enumerate() {
                    self.rows.push(cell);
                    self.rhs.push(tb.get(r, c));
                }
            }
        }
    }

    fn matrix(&self) -> Matrix {
        let f = self.layout.source.field();
        let mut m = Matrix::zeros(f, self.rows.len(), self.layout.total);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, v) in row {
                m.set(i, *j, v.clone());
            }
        }
        m
    }

    fn summary(&self) -> SystemSummary {
        let a = self.matrix();
        let mut aug = Matrix::zeros(a.field(), a.rows(), a.cols() + 1);
        aug.place(0, 0, &a);
        for (i, v) in self.rhs.iter().enumerate() {
            aug.set(i, a.cols(), v.clone());
        }
        SystemSummary { unknowns: a.cols(), equations: a.rows(), rank: a.rank(), augmented_rank: aug.rank() }
    }

    fn solve(&self) -> Option<GradedMap> {
        let x = self.matrix().solve(&self.rhs).expect("rhs length matches");
        x.map(|x| self.layout.to_map(&x))
    }
}

/// Size and consistency data of a homotopy system; inconsistent exactly
/// when `augmented_rank > rank`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub augmented_rank: usize,
}

impl SystemSummary {
    pub fn consistent(&self) -> bool {
        self.rank == self.augmented_rank
    }
}

#[derive(Clone, Debug)]
pub struct HomotopyResult {
    pub homotopy: Option<GradedMap>,
    pub system: SystemSummary,
}

fn in_window(w: Option<Window>) -> impl Fn(i64) -> bool {
    move |d| w.is_none_or(|(lo, hi)| lo <= d && d <= hi)
}

/// Adds `h act_M(g) = (-1)^{shift·|g|} act_N(g) h` for every generator.
fn add_linearity(sys: &mut System, m: &CdgModule, n: &CdgModule, shift: i64) {
    let f = m.field();
    for (name, a) in m.actions() {
        let b = &n.actions()[name];
        let target = GradedMap::zero(m.space(), n.space(), shift + a.shift());
        let terms = [
            Term { left: None, right: Some(a), coeff: f.one() },
            Term { left: Some(b), right: None, coeff: -sign(f, shift * a.shift()) },
        ];
        sys.add(&terms, &target, &|_| true);
    }
}

/// Solves `d_N h + h d_M = f` for `h` of degree −1, optionally requiring
/// `h` to commute with the actions. Equations are imposed on the source
/// degrees of `M` inside `window`.
pub fn solve_homotopy(
    m: &CdgModule,
    n: &CdgModule,
    f: &GradedMap,
    linear: bool,
    window: Option<Window>,
) -> HomotopyResult {
    let layout = MapLayout::new(m.space(), n.space(), -1);
    let mut sys = System::new(&layout);
    let one = m.field().one();
    let terms = [
        Term { left: Some(n.d()), right: None, coeff: one.clone() },
        Term { left: None, right: Some(m.d()), coeff: one },
    ];
    sys.add(&terms, f, &in_window(window));
    if linear {
        add_linearity(&mut sys, m, n, -1);
    }
    HomotopyResult { homotopy: sys.solve(), system: sys.summary() }
}

/// Some `h` with `dh + hd = 1` commuting with all actions. On modules with
/// an interior window the identity is required only there.
pub fn is_contractible(m: &CdgModule) -> HomotopyResult {
    solve_homotopy(m, m, &GradedMap::identity(m.space()), true, m.interior())
}

/// `h` with `dh + hd = f` for a strict map `f`.
pub fn null_homotopy(m: &CdgModule, n: &CdgModule, f: &GradedMap) -> Result<HomotopyResult> {
    let rep = check_module_map(m, n, f);
    if let Some(v) = rep.first_failure() {
        return Err(Error::PreconditionViolation(format!("map is not strict: {} {}", v.identity, v.witness)));
    }
    Ok(solve_homotopy(m, n, f, true, None))
}

/// Whether contractibility by module homotopies and by plain graded
/// homotopies agree.
pub fn homotopy_forget_agreement(m: &CdgModule) -> (bool, bool) {
    let id = GradedMap::identity(m.space());
    let with = solve_homotopy(m, m, &id, true, m.interior()).homotopy.is_some();
    let without = solve_homotopy(m, m, &id, false, m.interior()).homotopy.is_some();
    (with, without)
}

/// The Hom complex between two finite modules over the same algebra.
pub struct HomComplex<'a> {
    m: &'a CdgModule,
    n: &'a CdgModule,
    pieces: BTreeMap<i64, Piece>,
}

struct Piece {
    layout: MapLayout,
    /// Basis of the degree piece, in layout coordinates.
    basis: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct Cohomology {
    pub degree: i64,
    pub dim: usize,
    pub representatives: Vec<GradedMap>,
}

impl<'a> HomComplex<'a> {
    pub fn new(m: &'a CdgModule, n: &'a CdgModule) -> Result<HomComplex<'a>> {
        if **m.algebra() != **n.algebra() {
            return Err(Error::Usage("Hom between modules over different algebras".into()));
        }
        Ok(HomComplex { m, n, pieces: BTreeMap::new() })
    }

    /// Shifts `j` for which the degree piece can be nonzero.
    pub fn shift_range(&self) -> Vec<i64> {
        match self.m.grading() {
            Grading::Z2 => vec![0, 1],
            Grading::Z => match (self.m.space().support(), self.n.space().support()) {
                (Some((ml, mh)), Some((nl, nh))) => (nl - mh..=nh - ml).collect(),
                _ => vec![],
            },
        }
    }

    fn piece(&mut self, j: i64) -> &Piece {
        let j = self.m.space().normalize(j);
        let (m, n) = (self.m, self.n);
        self.pieces.entry(j).or_insert_with(|| {
            let layout = MapLayout::new(m.space(), n.space(), j);
            let mut sys = System::new(&layout);
            add_linearity(&mut sys, m, n, j);
            let basis = if sys.rows.is_empty() {
                (0..layout.total)
                    .map(|k| {
                        let mut v = vec![m.field().zero(); layout.total];
                        v[k] = m.field().one();
                        v
                    })
                    .collect()
            } else {
                sys.matrix().kernel_basis()
            };
            Piece { layout, basis }
        })
    }

    /// `D(f) = d_N f − (−1)^j f d_M`.
    pub fn differential(&self, f: &GradedMap) -> GradedMap {
        let j = f.shift();
        let s = sign(self.m.field(), j);
        self.n.d().compose(f).unwrap().sub(&f.compose(self.m.d()).unwrap().scale(&s)).unwrap()
    }

    pub fn piece_basis(&mut self, j: i64) -> Vec<GradedMap> {
        let p = self.piece(j);
        p.basis.iter().map(|v| p.layout.to_map(v)).collect()
    }

    /// Matrix of `D` from the piece basis of degree `j` into layout
    /// coordinates of degree `j + 1`.
    fn d_matrix(&mut self, j: i64) -> Matrix {
        let f = self.m.field();
        let src: Vec<GradedMap> = self.piece_basis(j);
        let target_layout = MapLayout::new(self.m.space(), self.n.space(), j + 1);
        let cols: Vec<Vector> = src.iter().map(|g| target_layout.from_map(&self.differential(g))).collect();
        if cols.is_empty() {
            return Matrix::zeros(f, target_layout.total, 0);
        }
        Matrix::from_columns(f, target_layout.total, &cols)
    }

    pub fn cohomology(&mut self, j: i64) -> Cohomology {
        let f = self.m.field();
        let dj = self.d_matrix(j);
        let dprev = self.d_matrix(j - 1);
        let cocycles: Vec<Vector> = dj.kernel_basis();
        let image_rank = dprev.rank();
        let dim = cocycles.len() - image_rank;
        let piece = self.piece(j);
        let n = piece.layout.total;
        // cocycles as layout vectors, then keep those independent of the image
        let mut span = dprev.clone();
        let mut reps = Vec::new();
        for z in &cocycles {
            if reps.len() == dim {
                break;
            }
            let mut v = vec![f.zero(); n];
            for (k, b) in piece.basis.iter().enumerate() {
                if z[k].is_zero() {
                    continue;
                }
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = &*vi + &(&z[k] * bi);
                }
            }
            let next = span.hstack(&Matrix::from_columns(f, n, &[v.clone()])).unwrap();
            if next.rank() > span.rank() {
                span = next;
                reps.push(piece.layout.to_map(&v));
            }
        }
        Cohomology { degree: j, dim, representatives: reps }
    }
}

pub fn hom_cohomology(m: &CdgModule, n: &CdgModule, j: i64) -> Result<Cohomology> {
    Ok(HomComplex::new(m, n)?.cohomology(j))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcyclicityReport {
    pub acyclic: bool,
    /// `(generator index, degree, dimension)` for every nonzero group.
    pub nonzero: Vec<(usize, i64, usize)>,
}

/// `H^j Hom(G, N) = 0` for every generator `G` and every relevant `j`.
pub fn acyclic_wrt(generators: &[CdgModule], n: &CdgModule) -> Result<AcyclicityReport> {
    let mut nonzero = Vec::new();
    for (k, g) in generators.iter().enumerate() {
        let mut hc = HomComplex::new(g, n)?;
        for j in hc.shift_range() {
            let h = hc.cohomology(j);
            if h.dim > 0 {
                nonzero.push((k, j, h.dim));
            }
        }
    }
    Ok(AcyclicityReport { acyclic: nonzero.is_empty(), nonzero })
}

fn check_len(v: &[Scalar], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch(format!("{what} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

/// `(m, n)` with `m ∈ M^j`, `n ∈ M^{j−i}` is a cocycle of `Hom(A_{φ,ψ}, M)`:
/// `d m = (−1)^{j+1} ψ n` and `d n = (−1)^{j+1} φ m`.
pub fn splitting_cocycle_test(m: &CdgModule, s: &Splitting, j: i64, mv: &[Scalar], nv: &[Scalar]) -> Result<bool> {
    let sp = m.space();
    check_len(mv, sp.dim(j), "m")?;
    check_len(nv, sp.dim(j - s.offset), "n")?;
    let f = m.field();
    let sg = sign(f, j + 1);
    let psi = m.act(&s.psi);
    let phi = m.act(&s.phi);
    let dm = m.d().apply(j, mv)?;
    let rhs1: Vector = psi.apply(j - s.offset, nv)?.iter().map(|x| x * &sg).collect();
    let dn = m.d().apply(j - s.offset, nv)?;
    let rhs2: Vector = phi.apply(j, mv)?.iter().map(|x| x * &sg).collect();
    Ok(dm == rhs1 && dn == rhs2)
}

/// `(h, k)` with `m = d h + (−1)^{j+1} ψ k` and `n = d k + (−1)^{j+1} φ h`,
/// if one exists.
pub fn splitting_boundary_test(
    m: &CdgModule,
    s: &Splitting,
    j: i64,
    mv: &[Scalar],
    nv: &[Scalar],
) -> Result<Option<(Vector, Vector)>> {
    let sp = m.space();
    let i = s.offset;
    check_len(mv, sp.dim(j), "m")?;
    check_len(nv, sp.dim(j - i), "n")?;
    let f = m.field();
    let sg = sign(f, j + 1);
    let (hd, kd) = (j - 1, j - i - 1);
    let (nh, nk) = (sp.dim(hd), sp.dim(kd));
    let (rm, rn) = (sp.dim(j), sp.dim(j - i));
    let mut a = Matrix::zeros(f, rm + rn, nh + nk);
    if rm > 0 {
        a.place(0, 0, &m.d().block(hd));
        a.place(0, nh, &m.act(&s.psi).block(kd).scale(&sg));
    }
    if rn > 0 {
        a.place(rm, 0, &m.act(&s.phi).block(hd).scale(&sg));
        a.place(rm, nh, &m.d().block(kd));
    }
    let rhs: Vector = mv.iter().chain(nv).cloned().collect();
    Ok(a.solve(&rhs)?.map(|x| (x[..nh].to_vec(), x[nh..].to_vec())))
}

/// True when `f` is a strict map whose every degree block is invertible.
pub fn strict_iso_check(m: &CdgModule, n: &CdgModule, f: &GradedMap) -> bool {
    if !check_module_map(m, n, f).passed() {
        return false;
    }
    let degrees: std::collections::BTreeSet<i64> = m.space().degrees().chain(n.space().degrees()).collect();
    degrees.into_iter().all(|d| f.block(d).is_invertible())
}

/// Interval multiplicities keyed by `(birth degree, length)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Barcode {
    pub bars: BTreeMap<(i64, usize), usize>,
}

impl Barcode {
    pub fn total(&self) -> usize {
        self.bars.values().sum()
    }

    /// Σ multiplicity × length.
    pub fn weighted_length(&self) -> usize {
        self.bars.iter().map(|((_, n), m)| n * m).sum()
    }

    pub fn covering(&self, degree: i64) -> usize {
        self.bars.iter().filter(|((a, n), _)| *a <= degree && degree < a + *n as i64).map(|(_, m)| m).sum()
    }
}

#[derive(Clone, Debug)]
pub struct BarcodeDecomposition {
    pub barcode: Barcode,
    /// Direct sum of interval precomplexes, bars in increasing (birth, length).
    pub canonical: CdgModule,
    /// Strict isomorphism `canonical -> P`.
    pub witness: GradedMap,
}

struct Bar {
    birth: i64,
    /// Chain vectors `d^t β` for `t = 0, 1, ...` while alive.
    chain: Vec<Vector>,
    length: Option<usize>,
}

fn std_vec(f: Field, n: usize, k: usize) -> Vector {
    let mut v = vec![f.zero(); n];
    v[k] = f.one();
    v
}

/// Coordinates of `v` in the span of `cols`, if it lies there.
fn express(f: Field, n: usize, cols: &[Vector], v: &[Scalar]) -> Option<Vector> {
    if cols.is_empty() {
        return v.iter().all(Scalar::is_zero).then(Vec::new);
    }
    Matrix::from_columns(f, n, cols).solve(v).expect("lengths agree")
}

/// Decomposes a finite precomplex into interval precomplexes.
///
/// Degrees are swept upward. Each live bar carries its chain; when the
/// images of live bars become dependent, the youngest dependent bar dies
/// after subtracting older chains from it, so `d` sends every chain
/// vector to the next one or to zero.
pub fn barcode_decompose(p: &CdgModule) -> Result<BarcodeDecomposition> {
    if !matches!(p.algebra().family(), Family::InitialPoly | Family::InitialTrunc(_)) {
        return Err(Error::Usage("barcode decomposition needs a precomplex".into()));
    }
    let f = p.field();
    let sp = p.space();
    let mut bars: Vec<Bar> = Vec::new();
    let Some((lo, hi)) = sp.support() else {
        return Ok(BarcodeDecomposition {
            barcode: Barcode::default(),
            canonical: CdgModule::zero(p.algebra()),
            witness: GradedMap::zero(sp, sp, 0),
        });
    };
    let mut live: Vec<usize> = Vec::new();
    for e in lo..=hi + 1 {
        let n = sp.dim(e);
        // push live bars forward into degree e
        let mut survivors: Vec<usize> = Vec::new();
        let mut images: Vec<Vector> = Vec::new();
        for &b in &live {
            let last = bars[b].chain.last().unwrap().clone();
            let w = p.d().apply(e - 1, &last).expect("shape");
            match express(f, n, &images, &w) {
                None => {
                    images.push(w.clone());
                    bars[b].chain.push(w);
                    survivors.push(b);
                }
                Some(lambda) => {
                    let birth = bars[b].birth;
                    let len = bars[b].chain.len();
                    for (k, l) in survivors.iter().zip(&lambda) {
                        if l.is_zero() {
                            continue;
                        }
                        let off = (birth - bars[*k].birth) as usize;
                        for t in 0..len {
                            let older = bars[*k].chain[off + t].clone();
                            let cur = &mut bars[b].chain[t];
                            for (x, y) in cur.iter_mut().zip(&older) {
                                *x = &*x - &(l * y);
                            }
                        }
                    }
                    bars[b].length = Some(len);
                }
            }
        }
        // new births fill out a basis of degree e
        for k in 0..n {
            let v = std_vec(f, n, k);
            if express(f, n, &images, &v).is_none() {
                images.push(v.clone());
                bars.push(Bar { birth: e, chain: vec![v], length: None });
                survivors.push(bars.len() - 1);
            }
        }
        live = survivors;
    }
    debug_assert!(live.is_empty(), "degree hi + 1 is zero, so every bar has died");

    let mut order: Vec<usize> = (0..bars.len()).collect();
    order.sort_by_key(|&b| (bars[b].birth, bars[b].length.unwrap(), b));
    let mut barcode = Barcode::default();
    let mut pieces = Vec::new();
    for &b in &order {
        let len = bars[b].length.unwrap();
        *barcode.bars.entry((bars[b].birth, len)).or_insert(0) += 1;
        pieces.push(interval_precomplex(p.algebra(), 1, len, bars[b].birth)?);
    }
    let canonical = direct_sum_all(&pieces)?;
    let mut witness = GradedMap::zero(canonical.space(), sp, 0);
    for e in lo..=hi {
        let cols: Vec<Vector> = order
            .iter()
            .filter_map(|&b| {
                let t = e - bars[b].birth;
                (t >= 0 && (t as usize) < bars[b].length.unwrap()).then(|| bars[b].chain[t as usize].clone())
            })
            .collect();
        if !cols.is_empty() {
            witness.set_block(e, Matrix::from_columns(f, sp.dim(e), &cols))?;
        }
    }
    Ok(BarcodeDecomposition { barcode, canonical, witness })
}

#[derive(Clone, Debug)]
pub struct Z2Decomposition {
    /// Strings `k(even) -1-> k(odd) -0->`.
    pub even_strings: usize,
    /// Strings `k(odd) -1-> k(even) -0->`.
    pub odd_strings: usize,
    /// Isolated even summands `k -> 0 -> k`.
    pub even_bars: usize,
    pub odd_bars: usize,
    pub canonical: CdgModule,
    /// Strict isomorphism `canonical -> M`.
    pub witness: GradedMap,
}

impl Z2Decomposition {
    pub fn strings(&self) -> usize {
        self.even_strings + self.odd_strings
    }
}

/// Decomposes a Z/2 complex over `Z2Rho(k, 0)` into strings and isolated
/// summands.
pub fn z2_decompose(m: &CdgModule) -> Result<Z2Decomposition> {
    let alg = m.algebra();
    match alg.family() {
        Family::Z2Rho { ring: Ring::K, rho } if rho.a.is_zero() => {}
        Family::Z2Rho { .. } => return Err(Error::Unsupported("z2_decompose needs R = k and rho = 0".into())),
        _ => return Err(Error::Usage("z2_decompose needs a Z2Rho module".into())),
    }
    let f = m.field();
    let sp = m.space();
    let dims = [sp.dim(0), sp.dim(1)];
    let d = [m.d().block(0), m.d().block(1)];
    // for each parity: sources whose images are independent
    let sources = |p: usize| -> Vec<Vector> {
        let mut imgs: Vec<Vector> = Vec::new();
        let mut out = Vec::new();
        for k in 0..dims[p] {
            let v = std_vec(f, dims[p], k);
            let w = d[p].mul_vec(&v).unwrap();
            if express(f, dims[1 - p], &imgs, &w).is_none() {
                imgs.push(w);
                out.push(v);
            }
        }
        out
    };
    let src = [sources(0), sources(1)];
    // homology representatives completing sources and images
    let homology = |p: usize| -> Vec<Vector> {
        let mut span: Vec<Vector> = src[p].clone();
        span.extend(src[1 - p].iter().map(|v| d[1 - p].mul_vec(v).unwrap()));
        let mut out = Vec::new();
        for z in d[p].kernel_basis() {
            if express(f, dims[p], &span, &z).is_none() {
                span.push(z.clone());
                out.push(z);
            }
        }
        out
    };
    let hom = [homology(0), homology(1)];
    let one = Matrix::from_ints(f, &[&[1]]);
    let zero1 = Matrix::from_ints(f, &[&[0]]);
    let empty = |r: usize, c: usize| Matrix::zeros(f, r, c);
    let z2 = |d0: Matrix, d1: Matrix| -> Result<CdgModule> {
        let s = GradedSpace::new(f, Grading::Z2, [(0, d0.cols()), (1, d1.cols())]);
        let dm = GradedMap::from_blocks(&s, &s, 1, [(0, d0), (1, d1)])?;
        CdgModule::new(alg, s, dm, BTreeMap::new())
    };
    let mut pieces = Vec::new();
    let mut cols: [Vec<Vector>; 2] = [Vec::new(), Vec::new()];
    for v in &src[0] {
        pieces.push(z2(one.clone(), zero1.clone())?);
        cols[0].push(v.clone());
        cols[1].push(d[0].mul_vec(v).unwrap());
    }
    for v in &src[1] {
        pieces.push(z2(zero1.clone(), one.clone())?);
        cols[0].push(d[1].mul_vec(v).unwrap());
        cols[1].push(v.clone());
    }
    for v in &hom[0] {
        pieces.push(z2(empty(0, 1), empty(1, 0))?);
        cols[0].push(v.clone());
    }
    for v in &hom[1] {
        pieces.push(z2(empty(1, 0), empty(0, 1))?);
        cols[1].push(v.clone());
    }
    let canonical = if pieces.is_empty() { CdgModule::zero(alg) } else { direct_sum_all(&pieces)? };
    let mut witness = GradedMap::zero(canonical.space(), sp, 0);
    for p in 0..2 {
        if !cols[p].is_empty() {
            witness.set_block(p as i64, Matrix::from_columns(f, dims[p], &cols[p]))?;
        }
    }
    Ok(Z2Decomposition {
        even_strings: src[0].len(),
        odd_strings: src[1].len(),
        even_bars: hom[0].len(),
        odd_bars: hom[1].len(),
        canonical,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CdgAlgebra, RingElem};
    use crate::module::{cone_of_map, direct_sum, shift_module, splitting_cone, Carrier};
    use std::sync::Arc;

    fn q() -> Field {
        Field::Rationals
    }

    fn kc() -> Arc<CdgAlgebra> {
        CdgAlgebra::initial_poly(q())
    }

    fn x(n: usize) -> CdgModule {
        interval_precomplex(&kc(), 1, n, 0).unwrap()
    }

    fn ints(rows: &[&[i64]]) -> Matrix {
        Matrix::from_ints(q(), rows)
    }

    #[test]
    fn even_intervals_are_contractible() {
        let r = is_contractible(&x(2));
        let h = r.homotopy.unwrap();
        // alternating 0 / 1: h sends degree 1 back to degree 0 by 1
        assert_eq!(h.block(1), ints(&[&[1]]));
        assert!(h.block(0).is_zero());
        for n in [1, 3, 5] {
            let r = is_contractible(&x(n));
            assert!(r.homotopy.is_none());
            assert!(!r.system.consistent());
        }
    }

    #[test]
    fn null_homotopies() {
        let m = x(3);
        let zero = GradedMap::zero(m.space(), m.space(), 0);
        assert!(null_homotopy(&m, &m, &zero).unwrap().homotopy.unwrap().is_zero());
        let id2 = GradedMap::identity(x(2).space());
        assert!(null_homotopy(&x(2), &x(2), &id2).unwrap().homotopy.is_some());
        let bad = GradedMap::from_blocks(m.space(), m.space(), 0, [(0, ints(&[&[1]]))]).unwrap();
        assert!(null_homotopy(&m, &m, &bad).is_err());
    }

    #[test]
    fn hom_between_intervals() {
        let h = hom_cohomology(&x(1), &x(1), 0).unwrap();
        assert_eq!(h.dim, 1);
        assert_eq!(h.representatives.len(), 1);
        let (x1, x2) = (x(1), x(2));
        let mut hc = HomComplex::new(&x1, &x1).unwrap();
        for j in -3..=3 {
            assert_eq!(hc.cohomology(j).dim, usize::from(j == 0));
        }
        let mut hc = HomComplex::new(&x1, &x2).unwrap();
        for j in -3..=3 {
            assert_eq!(hc.cohomology(j).dim, 0, "degree {j}");
        }
    }

    #[test]
    fn hom_into_contractible_vanishes_by_transport() {
        let n = x(2);
        let h = is_contractible(&n).homotopy.unwrap();
        for m in [x(1), x(3), direct_sum(&x(2), &shift_module(&x(1), -1)).unwrap()] {
            let mut hc = HomComplex::new(&m, &n).unwrap();
            for j in hc.shift_range() {
                assert_eq!(hc.cohomology(j).dim, 0);
                // every cocycle f is D(h f)
                for f in hc.piece_basis(j) {
                    if hc.differential(&f).is_zero() {
                        assert_eq!(hc.differential(&h.compose(&f).unwrap()), f);
                    }
                }
            }
        }
    }

    #[test]
    fn hom_differential_squares_to_zero() {
        let a = x(3);
        let b = direct_sum(&x(2), &shift_module(&x(3), 1)).unwrap();
        let mut hc = HomComplex::new(&a, &b).unwrap();
        for j in hc.shift_range() {
            for f in hc.piece_basis(j) {
                let dd = hc.differential(&hc.differential(&f));
                assert!(dd.is_zero());
            }
        }
    }

    #[test]
    fn cone_of_identity_is_contractible() {
        let m = x(3);
        let c = cone_of_map(&m, &m, &GradedMap::identity(m.space())).unwrap();
        assert!(is_contractible(&c.module).homotopy.is_some());
    }

    #[test]
    fn forget_agreement_small_cases() {
        assert_eq!(homotopy_forget_agreement(&x(2)), (true, true));
        assert_eq!(homotopy_forget_agreement(&x(3)), (false, false));
    }

    #[test]
    fn matrix_factorizations() {
        for ring in [Ring::K, Ring::KEps] {
            let rho = if ring == Ring::K { RingElem::new(q(), 1, 0) } else { RingElem::new(q(), 0, 1) };
            let a = CdgAlgebra::z2_rho(q(), ring, rho).unwrap();
            let phi = a.curvature();
            let s = Splitting { phi, psi: a.unit(), offset: 1 };
            let mf = splitting_cone(&a, &s, Carrier::Z2).unwrap();
            assert!(is_contractible(&mf).homotopy.is_some(), "{ring:?}");
        }
    }

    #[test]
    fn periodic_eps_module_is_not_contractible() {
        let a = CdgAlgebra::z2_rho(q(), Ring::KEps, RingElem::new(q(), 0, 0)).unwrap();
        let e = ints(&[&[0, 0], &[1, 0]]);
        let s = GradedSpace::new(q(), Grading::Z2, [(0, 2), (1, 2)]);
        let d = GradedMap::from_blocks(&s, &s, 1, [(0, e.clone()), (1, e.clone())]).unwrap();
        let eps = GradedMap::from_blocks(&s, &s, 0, [(0, e.clone()), (1, e)]).unwrap();
        let m = CdgModule::new(&a, s, d, BTreeMap::from([("eps".to_string(), eps)])).unwrap();
        assert!(crate::module::check_module_axioms(&m).passed());
        assert!(is_contractible(&m).homotopy.is_none());
        // dropping k[eps]-linearity, a k-homotopy exists
        let id = GradedMap::identity(m.space());
        assert!(solve_homotopy(&m, &m, &id, false, None).homotopy.is_some());
    }

    #[test]
    fn splitting_tests_reduce_to_classical_when_psi_is_zero() {
        // over Z2Rho(k, 0) with phi = psi = 0: cocycles are pairs of cycles
        let a = CdgAlgebra::z2_rho(q(), Ring::K, RingElem::new(q(), 0, 0)).unwrap();
        let m = crate::module::tests::z2_module(&a, ints(&[&[1]]), ints(&[&[0]]), None);
        let s = Splitting { phi: a.zero(0), psi: a.zero(0), offset: 1 };
        let zero = vec![q().zero()];
        assert!(splitting_cocycle_test(&m, &s, 0, &zero, &zero).unwrap());
        assert_eq!(splitting_boundary_test(&m, &s, 0, &zero, &zero).unwrap(), Some((zero.clone(), zero.clone())));
        let one = vec![q().one()];
        // odd generator is a cycle (d1 = 0) and a boundary (d0 = 1)
        assert!(splitting_cocycle_test(&m, &s, 1, &one, &zero).unwrap());
        assert!(splitting_boundary_test(&m, &s, 1, &one, &zero).unwrap().is_some());
        // even generator is not a cycle
        assert!(!splitting_cocycle_test(&m, &s, 0, &one, &zero).unwrap());
        assert!(splitting_cocycle_test(&m, &s, 0, &[], &zero).is_err());
    }

    /// mult(a, n) from ranks of iterated differentials.
    fn rank_formula(p: &CdgModule) -> Barcode {
        let (lo, hi) = p.space().support().unwrap();
        let f = p.field();
        let r = |a: i64, j: i64| -> usize {
            if j < 0 {
                return 0;
            }
            let mut m = Matrix::identity(f, p.space().dim(a));
            for t in 0..j {
                m = p.d().block(a + t).mul(&m).unwrap();
            }
            m.rank()
        };
        let mut out = Barcode::default();
        for a in lo..=hi {
            for n in 1..=(hi - a + 1) {
                let mult = r(a, n - 1) as i64 - r(a, n) as i64 - r(a - 1, n) as i64 + r(a - 1, n + 1) as i64;
                if mult > 0 {
                    out.bars.insert((a, n as usize), mult as usize);
                }
            }
        }
        out
    }

    #[test]
    fn barcodes() {
        let b = barcode_decompose(&x(3)).unwrap();
        assert_eq!(b.barcode.bars, BTreeMap::from([((0, 3), 1)]));
        let sum = direct_sum(&x(2), &shift_module(&x(1), -1)).unwrap();
        let b = barcode_decompose(&sum).unwrap();
        assert_eq!(b.barcode.bars, BTreeMap::from([((0, 2), 1), ((1, 1), 1)]));
        assert!(strict_iso_check(&b.canonical, &sum, &b.witness));
    }

    #[test]
    fn barcode_of_a_fixed_precomplex_matches_rank_formula() {
        // dims (2, 3, 2) in degrees 0, 1, 2
        let s = GradedSpace::new(q(), Grading::Z, [(0, 2), (1, 3), (2, 2)]);
        let d = GradedMap::from_blocks(
            &s,
            &s,
            1,
            [(0, ints(&[&[1, 2], &[0, 1], &[1, 3]])), (1, ints(&[&[1, 0, -1], &[2, 1, 0]]))],
        )
        .unwrap();
        let p = CdgModule::precomplex(&kc(), d).unwrap();
        let b = barcode_decompose(&p).unwrap();
        assert_eq!(b.barcode, rank_formula(&p));
        assert_eq!(b.barcode.weighted_length(), 7);
        assert!(strict_iso_check(&b.canonical, &p, &b.witness));
    }

    #[test]
    fn z2_lemma_displays() {
        let a = CdgAlgebra::z2_rho(q(), Ring::K, RingElem::new(q(), 0, 0)).unwrap();
        let m = crate::module::tests::z2_module(&a, ints(&[&[1]]), ints(&[&[0]]), None);
        let z = z2_decompose(&m).unwrap();
        assert_eq!((z.strings(), z.even_bars, z.odd_bars), (1, 0, 0));
        assert!(strict_iso_check(&z.canonical, &m, &z.witness));
        let s = GradedSpace::new(q(), Grading::Z2, [(0, 1)]);
        let m = CdgModule::new(&a, s.clone(), GradedMap::zero(&s, &s, 1), BTreeMap::new()).unwrap();
        let z = z2_decompose(&m).unwrap();
        assert_eq!((z.strings(), z.even_bars, z.odd_bars), (0, 1, 0));
        let curved = CdgAlgebra::z2_rho(q(), Ring::K, RingElem::new(q(), 1, 0)).unwrap();
        let mf = crate::module::tests::z2_module(&curved, ints(&[&[1]]), ints(&[&[1]]), None);
        assert!(matches!(z2_decompose(&mf), Err(Error::Unsupported(_))));
    }

    #[test]
    fn strict_iso_rejects_non_square_blocks() {
        let m = x(1);
        let n = direct_sum(&x(1), &x(1)).unwrap();
        let f = GradedMap::from_blocks(m.space(), n.space(), 0, [(0, ints(&[&[1], &[0]]))]).unwrap();
        assert!(!strict_iso_check(&m, &n, &f));
        assert!(strict_iso_check(&m, &m, &GradedMap::identity(m.space())));
    }
}
