//! The builtin scenario catalog. Each scenario builds its fixtures, checks
//! them and records expectations plus witnesses.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use cdglab::algebra::{check_cdg_axioms, check_laurent_collapse, CdgAlgebra, Ring, RingElem, StrictMorphism};
use cdglab::bar::{
    ainf_contraction_check, build_bar, filtration_decay_check, lemma_homotopy, nilpotent_inverse, AinfReport,
    BarConvention, BarModule, BarWindow, BarWord,
};
use cdglab::descriptor::MapDesc;
use cdglab::fixtures;
use cdglab::graded::GradedMap;
use cdglab::homotopy::{
    acyclic_wrt, homotopy_forget_agreement, is_contractible, solve_homotopy, splitting_boundary_test,
    splitting_cocycle_test, strict_iso_check, z2_decompose, HomComplex, HomotopyResult,
};
use cdglab::linalg::{Field, Matrix};
use cdglab::module::{
    check_module_axioms, cone_of_map, reduce_mod_epsilon, restrict_scalars, splitting_cone, totalize_ses, verify_ses,
    Carrier, Splitting,
};
use cdglab::Result;

use crate::report::{Expectation, Provenance};
use crate::Config;

use Provenance::{ByConstruction, IndependentOracle, PublishedClaim};

pub type ScenarioFn = fn(&Config, &mut Ctx) -> Result<()>;

/// Sorted by name.
pub const CATALOG: &[(&str, ScenarioFn)] = &[
    ("axioms-sweep", axioms_sweep),
    ("bar-inverting-5.5", bar_inverting),
    ("bar-lemma-5.6", bar_lemma),
    ("derivedzero-ses", derivedzero_ses),
    ("graded-proj-not-hproj", graded_proj_not_hproj),
    ("homotopy-forget", homotopy_forget),
    ("ku-cocycle", ku_cocycle),
    ("lemindec-random", lemindec_random),
    ("liftgoed-hom", liftgoed_hom),
    ("prop-2.2-sweep", prop_sweep),
    ("prophor-cone", prophor_cone),
    ("splitting-cones-kuu", splitting_cones_kuu),
    ("z2-tautology", z2_tautology),
];

#[derive(Default)]
pub struct Ctx {
    pub expectations: Vec<Expectation>,
    pub witnesses: BTreeMap<String, Value>,
}

impl Ctx {
    pub fn expect(
        &mut self,
        claim: impl Into<String>,
        provenance: Provenance,
        passed: bool,
        counterexample: impl FnOnce() -> String,
    ) {
        let counterexample = (!passed).then(counterexample);
        self.expectations.push(Expectation { claim: claim.into(), provenance, passed, counterexample });
    }

    pub fn witness(&mut self, key: impl Into<String>, value: Value) {
        self.witnesses.insert(key.into(), value);
    }
}

fn map_json(m: &GradedMap) -> Value {
    serde_json::to_value(MapDesc::from_map(m)).expect("descriptors serialize")
}

fn system_json(r: &HomotopyResult) -> Value {
    serde_json::to_value(r.system).expect("summaries serialize")
}

fn axioms_sweep(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let (lo, hi) = cfg.window;
    let mut failed = Vec::new();
    let mut checked = BTreeMap::new();
    for (name, alg) in fixtures::axiom_families(cfg.field)? {
        let rep = check_cdg_axioms(&alg, lo, hi);
        checked.insert(name.clone(), rep.checked);
        if let Some(v) = rep.first_failure() {
            failed.push(format!("{name}: {} at {}", v.identity, v.witness));
        }
    }
    cx.witness("identities_checked", json!(checked));
    cx.expect("every algebra family satisfies the cdg axioms on the window", PublishedClaim, failed.is_empty(), || {
        failed.join("; ")
    });
    Ok(())
}

fn prop_sweep(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let kc = CdgAlgebra::initial_poly(cfg.field);
    let mut wrong = Vec::new();
    let mut silent = Vec::new();
    let mut systems = BTreeMap::new();
    for dim in 1..=3 {
        for n in 1..=10 {
            let r = is_contractible(&fixtures::interval(&kc, dim, n)?);
            if r.homotopy.is_some() != (n % 2 == 0) {
                wrong.push(format!("k^{dim}, n = {n}"));
            }
            if r.homotopy.is_none() {
                systems.insert(format!("k^{dim} n={n}"), system_json(&r));
                if r.system.consistent() {
                    silent.push(format!("k^{dim}, n = {n}"));
                }
            }
        }
    }
    cx.witness("inconsistent_systems", json!(systems));
    cx.expect(
        "X_n is contractible iff n is even, X in {k, k^2, k^3}, n <= 10",
        PublishedClaim,
        wrong.is_empty(),
        || wrong.join("; "),
    );
    cx.expect("every negative verdict comes with an inconsistent system", ByConstruction, silent.is_empty(), || {
        silent.join("; ")
    });
    Ok(())
}

fn homotopy_forget(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let mut rng = fixtures::rng(cfg.seed);
    let kc = CdgAlgebra::initial_poly(cfg.field);
    let kc2 = CdgAlgebra::initial_trunc(cfg.field, 2)?;
    let mut disagree = None;
    let mut contractible = 0;
    for t in 0..30 {
        let (alg, support) = if t % 2 == 0 { (&kc, 5) } else { (&kc2, 4) };
        let p = fixtures::random_precomplex(alg, &mut rng, support, 8)?;
        let (a, k) = homotopy_forget_agreement(&p);
        contractible += a as usize;
        if a != k && disagree.is_none() {
            disagree = Some(format!(
                "case {t} over {}: A-verdict {a}, k-verdict {k}, dims {:?}",
                alg.describe(),
                p.space().dims()
            ));
        }
    }
    cx.witness("contractible_cases", json!(contractible));
    cx.expect(
        "A-homotopy and k-homotopy contractibility agree on 30 random precomplexes",
        PublishedClaim,
        disagree.is_none(),
        || disagree.unwrap_or_default(),
    );
    Ok(())
}

fn derivedzero_ses(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let kc = CdgAlgebra::initial_poly(cfg.field);
    for r in 1..=3 {
        let s = fixtures::derivedzero(&kc, r, false)?;
        let rep = verify_ses(&s);
        cx.expect(
            format!("the sequence with X = k^{r} is exact with strict maps"),
            PublishedClaim,
            rep.exact && rep.strict_maps,
            || rep.problems.join("; "),
        );
        let total = totalize_ses(&s)?;
        let ax = check_module_axioms(&total);
        cx.expect(format!("its totalization with X = k^{r} is a module"), ByConstruction, ax.passed(), || {
            ax.first_failure().map(|v| format!("{} at {}", v.identity, v.witness)).unwrap_or_default()
        });
    }
    let literal = verify_ses(&fixtures::derivedzero(&kc, 1, true)?);
    cx.witness("literal_reading_exact", json!(literal.exact));
    Ok(())
}

fn prophor_cone(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    let p = fixtures::prophor(f)?;
    let h = is_contractible(&p.m_dprime);
    cx.expect("M'' is contractible", PublishedClaim, h.homotopy.is_some(), || format!("{:?}", h.system));
    if let Some(h) = &h.homotopy {
        cx.witness("m_dprime_homotopy", map_json(h));
    }
    let cone = cone_of_map(&p.m_prime, &p.m, &p.phi)?.module;
    let even = Matrix::from_ints(f, &[&[0, 0], &[1, 1]]);
    let odd = Matrix::from_ints(f, &[&[1, 0], &[0, 0]]);
    let (d0, d1) = (cone.d().block(0), cone.d().block(1));
    cx.expect("cone(phi) has blocks [eps eps] and [1 0]^t", PublishedClaim, d0 == even && d1 == odd, || {
        format!("even->odd {d0:?}, odd->even {d1:?}")
    });
    let target = cdglab::module::direct_sum_all(&[cdglab::module::shift_module(&p.m_prime, 1), p.m.clone()])?;
    let iso = strict_iso_check(&cone, &target, &p.witness);
    cx.expect("the witness is a strict isomorphism cone(phi) -> M'[1] + M", IndependentOracle, iso, || {
        format!("{:?}", p.witness)
    });
    cx.witness("cone_iso", map_json(&p.witness));
    Ok(())
}

fn lemindec_random(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let mut rng = fixtures::rng(cfg.seed);
    let mut bad_iso = None;
    let mut bad_count = None;
    let mut counts = Vec::new();
    for t in 0..50 {
        let (m, built) = fixtures::random_z2_complex(cfg.field, &mut rng, 6)?;
        let z = z2_decompose(&m)?;
        let ranks = m.d().block(0).rank() + m.d().block(1).rank();
        counts.push(json!([z.even_strings, z.odd_strings, z.even_bars, z.odd_bars]));
        if !strict_iso_check(&z.canonical, &m, &z.witness) && bad_iso.is_none() {
            bad_iso = Some(format!("case {t}, dims {:?}", m.space().dims()));
        }
        if (z.strings() != ranks || z.strings() != built) && bad_count.is_none() {
            bad_count = Some(format!("case {t}: {} strings, rank sum {ranks}, built with {built}", z.strings()));
        }
    }
    cx.witness("types", json!(counts));
    cx.expect(
        "each random Z/2 complex reassembles strictly isomorphically from the two types",
        PublishedClaim,
        bad_iso.is_none(),
        || bad_iso.unwrap_or_default(),
    );
    cx.expect("string count equals rank d0 + rank d1", IndependentOracle, bad_count.is_none(), || {
        bad_count.unwrap_or_default()
    });
    Ok(())
}

fn z2_tautology(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    let (lo, hi) = cfg.window;
    let mut failed = Vec::new();
    for (ring, rho) in [
        (Ring::K, RingElem::new(f, 0, 0)),
        (Ring::K, RingElem::new(f, 1, 0)),
        (Ring::KEps, RingElem::new(f, 0, 0)),
        (Ring::KEps, RingElem::new(f, 0, 1)),
        (Ring::KEps, RingElem::new(f, 1, 1)),
    ] {
        let z2 = CdgAlgebra::z2_rho(f, ring, rho)?;
        let rep = check_laurent_collapse(&z2, lo, hi)?;
        if let Some(v) = rep.first_failure() {
            failed.push(format!("{}: {} at {}", z2.describe(), v.identity, v.witness));
        }
    }
    cx.expect(
        "Z2Rho structure constants match the parity collapse of R_rho[u, u^-1]",
        PublishedClaim,
        failed.is_empty(),
        || failed.join("; "),
    );
    Ok(())
}

fn splitting_cones_kuu(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    for (name, ring, rho) in
        [("MF(1,1)", Ring::K, RingElem::new(f, 1, 0)), ("MF(eps,1)", Ring::KEps, RingElem::new(f, 0, 1))]
    {
        let mf = fixtures::mf(f, ring, rho)?;
        let h = is_contractible(&mf);
        cx.expect(format!("{name} is contractible"), PublishedClaim, h.homotopy.is_some(), || {
            format!("{:?}", h.system)
        });
        if let Some(h) = &h.homotopy {
            cx.witness(format!("{name} homotopy"), map_json(h));
        }
    }
    let mf = fixtures::mf(f, Ring::KEps, RingElem::new(f, 0, 1))?;
    let acyc = acyclic_wrt(std::slice::from_ref(&mf), &mf)?;
    cx.expect("MF(eps,1) is acyclic with respect to itself", IndependentOracle, acyc.acyclic, || {
        format!("{:?}", acyc.nonzero)
    });
    let k = fixtures::k00(f)?;
    let dims: BTreeMap<i64, usize> = k.space().dims().clone();
    let ok = dims == BTreeMap::from([(0, 1), (1, 1)]) && k.d().is_zero();
    cx.expect("k_{0,0} = k + k[-1] with zero differential", PublishedClaim, ok, || {
        format!("dims {dims:?}, d {:?}", k.d())
    });
    Ok(())
}

fn ku_cocycle(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    // A_{0,u} over R_0[u] on a window: 0 -> R -0-> R -1-> R -0-> ...
    let a = CdgAlgebra::poly_u(f, Ring::K, RingElem::new(f, 0, 0))?;
    let s = Splitting { phi: a.zero(0), psi: a.basis_element(2, 0), offset: 1 };
    let cone = splitting_cone(&a, &s, Carrier::WindowedZ { hi: 8 })?;
    let h = is_contractible(&cone);
    cx.expect("A_{0,u} is not contractible", PublishedClaim, h.homotopy.is_none(), || {
        format!("{:?}", h.homotopy.as_ref().map(MapDesc::from_map))
    });
    let fixtures::Ku { module: m, splitting: s, degree: j, m: mv, n: nv } = fixtures::ku(f)?;
    let cocycle = splitting_cocycle_test(&m, &s, j, &mv, &nv)?;
    cx.expect("(1, eps) is a cocycle for the splitting (0, u)", PublishedClaim, cocycle, || {
        "cocycle equations fail".into()
    });
    let boundary = splitting_boundary_test(&m, &s, j, &mv, &nv)?;
    cx.expect("(1, eps) is not a boundary", PublishedClaim, boundary.is_none(), || {
        let (h, k) = boundary.clone().unwrap_or_default();
        let show = |v: &[cdglab::linalg::Scalar]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        format!("h = ({}), k = ({}) solve the boundary equations", show(&h), show(&k))
    });
    let mf = fixtures::mf(f, Ring::K, RingElem::new(f, 0, 0))?;
    let acyc = acyclic_wrt(std::slice::from_ref(&mf), &m)?;
    cx.witness("acyclic_wrt_splitting_cone", json!(acyc.acyclic));
    Ok(())
}

fn liftgoed_hom(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    let mut rng = fixtures::rng(cfg.seed);
    let mut mismatch = None;
    let mut all = Vec::new();
    for t in 0..10 {
        let (m, n) = fixtures::liftgoed_pair(f, &mut rng)?;
        let nb = restrict_scalars(&StrictMorphism::epsilon_quotient(m.algebra())?, &n)?;
        let red = reduce_mod_epsilon(&m)?.module;
        let mut over_b = HomComplex::new(&m, &nb)?;
        let mut over_a = HomComplex::new(&red, &n)?;
        let mut js = over_b.shift_range();
        js.extend(over_a.shift_range());
        js.sort();
        js.dedup();
        let mut dims = BTreeMap::new();
        for j in js {
            let (b, a) = (over_b.cohomology(j).dim, over_a.cohomology(j).dim);
            if b != a && mismatch.is_none() {
                mismatch = Some(format!("pair {t}, degree {j}: {b} over A_phi[eps], {a} over A"));
            }
            if b + a > 0 {
                dims.insert(j.to_string(), json!([b, a]));
            }
        }
        all.push(json!(dims));
    }
    cx.witness("nonzero_dims", json!(all));
    cx.expect(
        "H^i Hom over A_phi[eps] matches H^i Hom over A after reducing mod eps",
        PublishedClaim,
        mismatch.is_none(),
        || mismatch.unwrap_or_default(),
    );
    Ok(())
}

const LEMMA_P_MAX: usize = 6;
const LEMMA_LETTER_DEGREE: i64 = 8;

fn lemma_algebras(f: Field) -> Result<Vec<(String, std::sync::Arc<CdgAlgebra>)>> {
    Ok(vec![
        ("k[c]".into(), CdgAlgebra::initial_poly(f)),
        ("k[c]/c^2".into(), CdgAlgebra::initial_trunc(f, 2)?),
        ("k[c]/c^3".into(), CdgAlgebra::initial_trunc(f, 3)?),
    ])
}

fn verdict_json(r: &AinfReport) -> Value {
    let failure = r.first_failure().map(|v| json!({"arity": v.arity, "witness": v.witness}));
    json!({"passed": r.passed(), "first_failure": failure})
}

fn bar_window(length: usize) -> BarWindow {
    BarWindow { length, weight: 2 * length as i64 }
}

/// `h0(sc ⊗ m) = m`, the bar-side form of the lemma homotopy.
fn c_functional(bar: &BarModule, f: Field) -> Matrix {
    let mut h0 = Matrix::zeros(f, bar.module_basis().len(), bar.len());
    if let Some(k) = bar.index_of(&BarWord { letters: vec![(2, 0)], module: (0, 0) }) {
        h0.set(0, k, f.one());
    }
    h0
}

fn bar_lemma(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    let conventions = [BarConvention::Strict, BarConvention::Shifted];
    for (name, alg) in lemma_algebras(f)? {
        let m = fixtures::trivial_module(&alg)?;
        let h = lemma_homotopy(&alg, &m)?;
        let reports: Vec<AinfReport> = conventions
            .iter()
            .map(|c| ainf_contraction_check(&alg, &m, &h, LEMMA_P_MAX, LEMMA_LETTER_DEGREE, *c))
            .collect::<Result<_>>()?;
        let passing: Vec<String> = reports.iter().filter(|r| r.passed()).map(|r| r.convention.to_string()).collect();
        let mut verdicts = serde_json::Map::new();
        for r in &reports {
            verdicts.insert(r.convention.to_string(), verdict_json(r));
        }
        cx.witness(format!("{name} passing convention"), json!(passing.first()));
        cx.witness(format!("{name} verdicts"), Value::Object(verdicts));
        cx.expect(
            format!("({name}, k): h_2 satisfies the identity under exactly one convention"),
            PublishedClaim,
            passing.len() == 1,
            || {
                let rs: Vec<String> = reports
                    .iter()
                    .map(|r| match r.first_failure() {
                        Some(v) => format!(
                            "{}: arity {} fails at {}",
                            r.convention,
                            v.arity,
                            v.witness.as_deref().unwrap_or("-")
                        ),
                        None => format!("{}: passes", r.convention),
                    })
                    .collect();
                rs.join("; ")
            },
        );
        let selected = &reports[conventions.iter().position(|c| *c == cfg.bar_convention).expect("listed")];
        cx.expect(
            format!("({name}, k): identity holds for p <= {LEMMA_P_MAX} under {}", cfg.bar_convention),
            PublishedClaim,
            selected.passed(),
            || {
                selected
                    .first_failure()
                    .map(|v| format!("arity {}: {}", v.arity, v.witness.as_deref().unwrap_or("-")))
                    .unwrap_or_default()
            },
        );
        let neg = h.scale(&-f.one());
        let flipped: Vec<String> = conventions
            .iter()
            .map(|c| ainf_contraction_check(&alg, &m, &neg, LEMMA_P_MAX, LEMMA_LETTER_DEGREE, *c))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .filter(|r| r.passed())
            .map(|r| r.convention.to_string())
            .collect();
        cx.witness(format!("{name} conventions passing with -h_2"), json!(flipped));
        let bar = build_bar(&alg, &m, bar_window(4))?;
        let defect = bar.contraction_defect(&c_functional(&bar, f))?;
        cx.expect(
            format!("({name}, k): the bar-side lift of h0(sc|m) = m contracts the interior"),
            IndependentOracle,
            defect.is_none(),
            || defect.clone().unwrap_or_default(),
        );
    }
    Ok(())
}

fn bar_inverting(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let f = cfg.field;
    const L: usize = 4;
    for (name, alg) in lemma_algebras(f)? {
        let m = fixtures::trivial_module(&alg)?;
        let bar = build_bar(&alg, &m, bar_window(L))?;
        let psi = bar.comodule_extension(&c_functional(&bar, f), true)?;
        let decay = filtration_decay_check(&bar, &psi, true)?;
        cx.expect(format!("({name}, k): psi(F_n) in F_(n-1)"), PublishedClaim, decay.lowers_filtration, || {
            "psi keeps the length".into()
        });
        cx.expect(format!("({name}, k): psi^(n+1)(F_n) = 0"), PublishedClaim, decay.nilpotent_on_levels, || {
            "psi is not nilpotent on a level".into()
        });
        let inv = nilpotent_inverse(&bar, &psi, true)?;
        let one = Matrix::identity(f, bar.len());
        let prod = one.sub(&psi)?.mul(&inv)?;
        let cols = bar.filtration(L - 1);
        let bad = cols.iter().find(|&&c| prod.column(c) != one.column(c)).copied();
        cx.expect(
            format!("({name}, k): (1 - psi) sum psi^j = 1 on F_{}", L - 1),
            IndependentOracle,
            bad.is_none(),
            || bad.map(|c| bar.label(&bar.words()[c])).unwrap_or_default(),
        );
        cx.witness(format!("{name} words"), json!({"total": bar.len(), "checked": cols.len()}));
    }
    Ok(())
}

fn graded_proj_not_hproj(cfg: &Config, cx: &mut Ctx) -> Result<()> {
    let m = fixtures::periodic_eps(cfg.field)?;
    let eps = m.action("eps").expect("k[eps] modules carry eps");
    let free = (0..=1).all(|d| m.space().dim(d) == 2 && eps.block(d).rank() == 1);
    cx.expect("the module is graded free of rank 1 over k[eps] in each degree", ByConstruction, free, || {
        format!("{:?}", m.space().dims())
    });
    let h = is_contractible(&m);
    cx.expect("it is not contractible", PublishedClaim, h.homotopy.is_none(), || {
        format!("{:?}", h.homotopy.as_ref().map(MapDesc::from_map))
    });
    cx.witness("system", system_json(&h));
    let id = GradedMap::identity(m.space());
    let k_lin = solve_homotopy(&m, &m, &id, false, None);
    cx.witness("k_linear_homotopy_exists", json!(k_lin.homotopy.is_some()));
    Ok(())
}

pub fn is_known(name: &str) -> bool {
    CATALOG.iter().any(|(n, _)| *n == name)
}

pub fn lookup(name: &str) -> Option<ScenarioFn> {
    CATALOG.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}
