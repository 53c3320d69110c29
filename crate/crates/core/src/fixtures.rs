//! Named example modules and seeded random generators.
//!
//! Random fixtures draw from ChaCha8 so a seed pins the output on every
//! platform.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{CdgAlgebra, Ring, RingElem, TableAlgebra};
use crate::error::Result;
use crate::graded::{GradedMap, GradedSpace, Grading};
use crate::linalg::{Field, Matrix, Scalar};
use crate::module::{
    direct_sum_all, free_module, interval_precomplex, shift_module, splitting_cone, Carrier, CdgModule, ShortExactSeq,
    Splitting,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `X_n` with `X = k^dim`, starting in degree 0.
pub fn interval(alg: &Arc<CdgAlgebra>, dim: usize, n: usize) -> Result<CdgModule> {
    interval_precomplex(alg, dim, n, 0)
}

/// The field `k` in degree 0 with zero differential and zero actions.
pub fn trivial_module(alg: &Arc<CdgAlgebra>) -> Result<CdgModule> {
    let s = GradedSpace::concentrated(alg.field(), alg.grading(), 0, 1);
    CdgModule::new(alg, s.clone(), GradedMap::zero(&s, &s, 1), BTreeMap::new())
}

fn random_matrix(f: Field, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let entries = (0..rows).map(|_| (0..cols).map(|_| f.from_i64(rng.gen_range(-2..=2))).collect()).collect();
    Matrix::from_rows(f, rows, cols, entries).expect("shape is given")
}

pub fn random_invertible(f: Field, rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let m = random_matrix(f, rng, n, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Degreewise change of basis `P d P^-1` on `d` and every action. The
/// returned map `M -> conj(M)` is `P`, a strict isomorphism.
pub fn conjugate(m: &CdgModule, rng: &mut ChaCha8Rng) -> Result<(CdgModule, GradedMap)> {
    let f = m.field();
    let sp = m.space();
    let mut p = GradedMap::zero(sp, sp, 0);
    let mut pinv = GradedMap::zero(sp, sp, 0);
    for d in sp.degrees() {
        let b = random_invertible(f, rng, sp.dim(d));
        pinv.set_block(d, b.inverse().expect("drawn invertible"))?;
        p.set_block(d, b)?;
    }
    let conj = |g: &GradedMap| -> Result<GradedMap> { p.compose(&g.compose(&pinv)?) };
    let d = conj(m.d())?;
    let actions = m.actions().iter().map(|(k, a)| Ok((k.clone(), conj(a)?))).collect::<Result<BTreeMap<_, _>>>()?;
    Ok((CdgModule::new(m.algebra(), sp.clone(), d, actions)?.with_interior(m.interior()), p))
}

/// A precomplex over `k[c]` or `k[c]/c^n` with support at most `max_support`
/// consecutive degrees, total dimension at most `max_total`, integer
/// entries in `-2..=2`. Over `k[c]/c^n` keep `max_support <= 2n` so that
/// `d^{2n} = 0`.
pub fn random_precomplex(
    alg: &Arc<CdgAlgebra>,
    rng: &mut ChaCha8Rng,
    max_support: usize,
    max_total: usize,
) -> Result<CdgModule> {
    let f = alg.field();
    let support = rng.gen_range(1..=max_support);
    let start = rng.gen_range(-2..=2);
    let mut left = max_total;
    let mut dims = Vec::new();
    for k in 0..support {
        let n = if left == 0 { 0 } else { rng.gen_range(if k == 0 { 1 } else { 0 }..=left.min(3)) };
        left -= n;
        dims.push((start + k as i64, n));
    }
    let s = GradedSpace::new(f, Grading::Z, dims.clone());
    let blocks = dims.windows(2).map(|w| (w[0].0, random_matrix(f, rng, w[1].1, w[0].1)));
    let d = GradedMap::from_blocks(&s, &s, 1, blocks)?;
    CdgModule::precomplex(alg, d)
}

/// A Z/2 complex over `Z2Rho(k, 0)` together with its string count. Built
/// from a canonical form with `r0` even strings, `r1` odd strings and
/// isolated summands, then conjugated.
pub fn random_z2_complex(f: Field, rng: &mut ChaCha8Rng, max_dim: usize) -> Result<(CdgModule, usize)> {
    let alg = CdgAlgebra::z2_rho(f, Ring::K, RingElem::new(f, 0, 0))?;
    let r0 = rng.gen_range(0..=max_dim / 2);
    let r1 = rng.gen_range(0..=max_dim / 2 - r0.min(max_dim / 2));
    let b0 = rng.gen_range(0..=max_dim - r0 - r1);
    let b1 = rng.gen_range(0..=max_dim - r0 - r1);
    let (n0, n1) = (r0 + r1 + b0, r0 + r1 + b1);
    // even basis: r0 string sources, r1 string targets, b0 bars; odd alike
    let mut d0 = Matrix::zeros(f, n1, n0);
    let mut d1 = Matrix::zeros(f, n0, n1);
    for k in 0..r0 {
        d0.set(k, k, f.one());
    }
    for k in 0..r1 {
        d1.set(r0 + k, r0 + k, f.one());
    }
    let s = GradedSpace::new(f, Grading::Z2, [(0, n0), (1, n1)]);
    let d = GradedMap::from_blocks(&s, &s, 1, [(0, d0), (1, d1)])?;
    let m = CdgModule::new(&alg, s, d, BTreeMap::new())?;
    Ok((conjugate(&m, rng)?.0, r0 + r1))
}

/// `k[y]/(y^2)`-free table with `|y| = 2`: the algebra `A` of the lifting
/// fixtures, with `y^2 = 0`.
pub fn ky2(f: Field) -> Result<TableAlgebra> {
    TableAlgebra::new(f, Grading::Z, &[("1", 0), ("y", 2)])
}

/// `A_φ[ε]` over `A = ky2` with `φ0 = y`, so the curvature is `yε`.
pub fn deformed_ky2(f: Field) -> Result<Arc<CdgAlgebra>> {
    CdgAlgebra::deformed(ky2(f)?, vec![(1, f.one())], BTreeMap::new(), BTreeMap::new())
}

fn small_complexes(alg: &Arc<CdgAlgebra>) -> Result<Vec<CdgModule>> {
    let k = trivial_module(alg)?;
    let f = alg.field();
    let s = GradedSpace::new(f, Grading::Z, [(0, 1), (1, 1)]);
    let d = GradedMap::from_blocks(&s, &s, 1, [(0, Matrix::identity(f, 1))])?;
    let kk = CdgModule::new(alg, s, d, BTreeMap::new())?;
    Ok(vec![k, kk])
}

/// A pair `(M, N)`: `M` over `A_φ[ε]` built from splitting cones and small
/// complexes, `N` over `A = ky2` with `ε` acting by zero once restricted.
/// Both are shifted and conjugated at random.
pub fn liftgoed_pair(f: Field, rng: &mut ChaCha8Rng) -> Result<(CdgModule, CdgModule)> {
    let b = deformed_ky2(f)?;
    let el = |label: &str| -> crate::algebra::Element {
        let d = if label.starts_with('y') { 2 } else { 0 };
        let i = (0..b.dim(d)).find(|&i| b.label(d, i) == label).expect("label exists");
        b.basis_element(d, i)
    };
    let carrier = Carrier::WindowedZ { hi: 4 };
    let cones = [
        Splitting { phi: el("eps"), psi: el("y"), offset: 1 },
        Splitting { phi: el("1"), psi: el("y*eps"), offset: 1 },
        Splitting { phi: el("y"), psi: el("eps"), offset: -1 },
    ];
    let mut m_parts = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let s = &cones[rng.gen_range(0..cones.len())];
        m_parts.push(shift_module(&splitting_cone(&b, s, carrier)?, rng.gen_range(-2..=2)));
    }
    if rng.gen_bool(0.5) {
        let extra = small_complexes(&b)?;
        m_parts.push(shift_module(&extra[rng.gen_range(0..extra.len())], rng.gen_range(-2..=2)));
    }
    let a = b.epsilon_quotient().expect("deformed algebras have eps");
    let mut n_options = small_complexes(&a)?;
    n_options.push(free_module(&a, None)?);
    let mut n_parts = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        n_parts.push(shift_module(&n_options[rng.gen_range(0..n_options.len())], rng.gen_range(-2..=2)));
    }
    let m = conjugate(&direct_sum_all(&m_parts)?, rng)?.0;
    let n = conjugate(&direct_sum_all(&n_parts)?, rng)?.0;
    Ok((m, n))
}

/// Every algebra family instance of the axiom sweep, labelled.
pub fn axiom_families(f: Field) -> Result<Vec<(String, Arc<CdgAlgebra>)>> {
    let mut out = vec![("k".to_string(), CdgAlgebra::base(f)), ("k[c]".to_string(), CdgAlgebra::initial_poly(f))];
    for n in 2..=4 {
        out.push((format!("k[c]/c^{n}"), CdgAlgebra::initial_trunc(f, n)?));
    }
    out.push(("k[eps]".to_string(), CdgAlgebra::dual_numbers(f)));
    for (name, ring, rho) in [
        ("0", Ring::K, RingElem::new(f, 0, 0)),
        ("1", Ring::K, RingElem::new(f, 1, 0)),
        ("eps", Ring::KEps, RingElem::new(f, 0, 1)),
    ] {
        out.push((format!("R_{name}[u]"), CdgAlgebra::poly_u(f, ring, rho.clone())?));
        out.push((format!("Z2Rho(R, {name})"), CdgAlgebra::z2_rho(f, ring, rho)?));
    }
    out.push(("ky2 deformed by y".to_string(), deformed_ky2(f)?));
    Ok(out)
}

fn block(f: Field, rows: &[&[i64]]) -> Matrix {
    Matrix::from_ints(f, rows)
}

/// Block matrix of `r x r` scalar blocks.
fn kron(f: Field, r: usize, rows: &[&[i64]]) -> Matrix {
    let (br, bc) = (rows.len(), rows.first().map_or(0, |x| x.len()));
    let mut m = Matrix::zeros(f, br * r, bc * r);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m.place(i * r, j * r, &Matrix::scalar(f, r, &f.from_i64(*v)));
        }
    }
    m
}

/// `0 -> X2[-1] -> X3 ⊕ X1[-1] -> X2 -> 0` with `X = k^r`. `literal` takes
/// the off-diagonal entries as drawn (`i_1 = [1 0]^t`, `p_1 = [1 0]`),
/// which is not exact.
pub fn derivedzero(alg: &Arc<CdgAlgebra>, r: usize, literal: bool) -> Result<ShortExactSeq> {
    let f = alg.field();
    let left = shift_module(&interval(alg, r, 2)?, -1);
    let middle = direct_sum_all(&[interval(alg, r, 3)?, shift_module(&interval(alg, r, 1)?, -1)])?;
    let right = interval(alg, r, 2)?;
    // left d is -1 after the shift, so i_2 = -1 keeps i strict
    let (i1, p1): (&[&[i64]], &[&[i64]]) =
        if literal { (&[&[1], &[0]], &[&[1, 0]]) } else { (&[&[1], &[1]], &[&[1, -1]]) };
    let i = GradedMap::from_blocks(left.space(), middle.space(), 0, [(1, kron(f, r, i1)), (2, kron(f, r, &[&[-1]]))])?;
    let p =
        GradedMap::from_blocks(middle.space(), right.space(), 0, [(0, Matrix::identity(f, r)), (1, kron(f, r, p1))])?;
    Ok(ShortExactSeq { left, middle, right, i, p })
}

/// The three modules over `Z2Rho(k[ε], ε)`, the maps `φ: M' -> M` and
/// `p: M -> M''`, and a strict isomorphism `cone(φ) -> M'[1] ⊕ M`.
#[derive(Clone, Debug)]
pub struct Prophor {
    pub m_prime: CdgModule,
    pub m: CdgModule,
    pub m_dprime: CdgModule,
    pub phi: GradedMap,
    pub p: GradedMap,
    pub witness: GradedMap,
}

fn z2_module(
    alg: &Arc<CdgAlgebra>,
    dims: (usize, usize),
    d: (Matrix, Matrix),
    eps: Option<(Matrix, Matrix)>,
) -> Result<CdgModule> {
    let f = alg.field();
    let s = GradedSpace::new(f, Grading::Z2, [(0, dims.0), (1, dims.1)]);
    let dm = GradedMap::from_blocks(&s, &s, 1, [(0, d.0), (1, d.1)])?;
    let mut actions = BTreeMap::new();
    if let Some((e0, e1)) = eps {
        actions.insert("eps".to_string(), GradedMap::from_blocks(&s, &s, 0, [(0, e0), (1, e1)])?);
    }
    CdgModule::new(alg, s, dm, actions)
}

pub fn prophor(f: Field) -> Result<Prophor> {
    let alg = CdgAlgebra::z2_rho(f, Ring::KEps, RingElem::new(f, 0, 1))?;
    let z = |r: usize, c: usize| Matrix::zeros(f, r, c);
    let m_prime = z2_module(&alg, (0, 1), (z(1, 0), z(0, 1)), None)?;
    let m = z2_module(
        &alg,
        (1, 2),
        (block(f, &[&[0], &[1]]), block(f, &[&[1, 0]])),
        Some((z(1, 1), block(f, &[&[0, 0], &[1, 0]]))),
    )?;
    let m_dprime = z2_module(&alg, (1, 1), (z(1, 1), block(f, &[&[1]])), None)?;
    let phi = GradedMap::from_blocks(m_prime.space(), m.space(), 0, [(1, block(f, &[&[0], &[1]]))])?;
    let p =
        GradedMap::from_blocks(m.space(), m_dprime.space(), 0, [(0, block(f, &[&[1]])), (1, block(f, &[&[1, 0]]))])?;
    // cone(φ) lives on M ⊕ M'[1]; the target is M'[1] ⊕ M
    let target = direct_sum_all(&[shift_module(&m_prime, 1), m.clone()])?;
    let cone = crate::module::cone_of_map(&m_prime, &m, &phi)?.module;
    let witness = GradedMap::from_blocks(
        cone.space(),
        target.space(),
        0,
        [(0, block(f, &[&[0, 1], &[1, 1]])), (1, Matrix::identity(f, 2))],
    )?;
    Ok(Prophor { m_prime, m, m_dprime, phi, p, witness })
}

/// `M = k[ε]` in both parities over `Z2Rho(k, 0)` with `d = ε` written as
/// a `k`-matrix, and the cocycle `(m, n) = (1, ε)` in odd degree for the
/// splitting `(0, 1)` of offset 1.
pub struct Ku {
    pub module: CdgModule,
    pub splitting: Splitting,
    pub degree: i64,
    pub m: Vec<Scalar>,
    pub n: Vec<Scalar>,
}

pub fn ku(f: Field) -> Result<Ku> {
    let alg = CdgAlgebra::z2_rho(f, Ring::K, RingElem::new(f, 0, 0))?;
    let e = block(f, &[&[0, 0], &[1, 0]]);
    let m = z2_module(&alg, (2, 2), (e.clone(), e), None)?;
    let s = Splitting { phi: alg.zero(0), psi: alg.unit(), offset: 1 };
    Ok(Ku { module: m, splitting: s, degree: 1, m: vec![f.one(), f.zero()], n: vec![f.zero(), f.one()] })
}

/// The 2-periodic module `(k[ε], k[ε], ε, ε)` over `Z2Rho(k[ε], 0)`.
pub fn periodic_eps(f: Field) -> Result<CdgModule> {
    let alg = CdgAlgebra::z2_rho(f, Ring::KEps, RingElem::new(f, 0, 0))?;
    let e = block(f, &[&[0, 0], &[1, 0]]);
    z2_module(&alg, (2, 2), (e.clone(), e.clone()), Some((e.clone(), e)))
}

/// Splitting cone `MF(ρ, 1)` over `Z2Rho(R, ρ)`.
pub fn mf(f: Field, ring: Ring, rho: RingElem) -> Result<CdgModule> {
    let alg = CdgAlgebra::z2_rho(f, ring, rho)?;
    let s = Splitting { phi: alg.curvature(), psi: alg.unit(), offset: 1 };
    splitting_cone(&alg, &s, Carrier::Z2)
}

/// `k_{0,0}` over `k`: the splitting cone of `(0, 0)` with offset -1.
pub fn k00(f: Field) -> Result<CdgModule> {
    let alg = CdgAlgebra::base(f);
    let s = Splitting { phi: alg.zero(2), psi: alg.zero(0), offset: -1 };
    splitting_cone(&alg, &s, Carrier::WindowedZ { hi: 4 })
}
