//! Seeded verification drivers for the checkable lemmas: each driver builds
//! its samples deterministically from a seed, evaluates both sides of the
//! relation with exact valuation arithmetic and reports one line per
//! sample with its margin.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{corpus_entry, kstar_field, kstar_relation, DEFAULT_PRECISION};
use crate::diffmod::{
    from_covering, pullback_frobenius, pullback_kstar, pullback_tame, radius_report, DifferentialModule, RadiusReport,
    SpectralConfig,
};
use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::{make_field, Field, FieldDescription, TowerStep};
use crate::gauss::{Exps, GaussPoly};
use crate::newton::roots_in_field;
use crate::radius::check_pth_power;
use crate::thickening::{
    check_approx_hom, default_level, delta_vars, differential_congruence_margin, thickening_vars,
    ThickeningPresentation,
};
use crate::valuation::{qi, Valuation, Q};

/// The lemmas with a verification driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    RadiusPthPower,
    TamePullback,
    FrobeniusPullback,
    PsiApproxHom,
    PsiDiff,
    KstarRotation,
    BasisLemma,
    Monotonicity,
}

impl Lemma {
    pub const ALL: [Lemma; 8] = [
        Lemma::RadiusPthPower,
        Lemma::TamePullback,
        Lemma::FrobeniusPullback,
        Lemma::PsiApproxHom,
        Lemma::PsiDiff,
        Lemma::KstarRotation,
        Lemma::BasisLemma,
        Lemma::Monotonicity,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::RadiusPthPower => "radius-pth-power",
            Lemma::TamePullback => "tame-pullback",
            Lemma::FrobeniusPullback => "frobenius-pullback",
            Lemma::PsiApproxHom => "psi-approx-hom",
            Lemma::PsiDiff => "psi-diff",
            Lemma::KstarRotation => "kstar-rotation",
            Lemma::BasisLemma => "basis-lemma",
            Lemma::Monotonicity => "monotonicity",
        }
    }

    /// Sample count used when none is requested.
    pub fn default_samples(self) -> usize {
        match self {
            Lemma::RadiusPthPower => 10_000,
            Lemma::PsiApproxHom | Lemma::PsiDiff | Lemma::BasisLemma => 200,
            _ => usize::MAX,
        }
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Lemma> {
        Lemma::ALL.iter().copied().find(|l| l.id() == s).ok_or_else(|| Error::UnknownLemma(s.into()))
    }
}

/// Knobs shared by all drivers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Cap on the number of samples; `None` uses the lemma's default.
    pub samples: Option<usize>,
    /// Precision of randomly generated fields (π-digits).
    pub precision: u32,
    /// Truncation order of ψ values and covering modules.
    pub truncation: u32,
    pub spectral: SpectralConfig,
}

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 0x7261_6d6c_6162;

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: DEFAULT_SEED, samples: None, precision: 30, truncation: 16, spectral: SpectralConfig::default() }
    }
}

/// One checked instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub label: String,
    pub ok: bool,
    /// How far inside the bound the sample lies (`None` when the
    /// relation is an equality or the residual vanishes).
    pub margin: Option<Q>,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub samples: Vec<Sample>,
    /// Generated instances outside the lemma's hypotheses.
    pub vacuous: usize,
}

impl LemmaReport {
    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| !s.ok).count()
    }

    pub fn passed(&self) -> bool {
        !self.samples.is_empty() && self.failures() == 0
    }

    pub fn min_margin(&self) -> Option<Q> {
        self.samples.iter().filter_map(|s| s.margin).min()
    }
}

/// Runs one driver.
pub fn verify(lemma: Lemma, cfg: &VerifyConfig) -> Result<LemmaReport> {
    let cap = cfg.samples.unwrap_or(lemma.default_samples());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (samples, vacuous) = match lemma {
        Lemma::RadiusPthPower => radius_pth_power(cfg, cap, &mut rng)?,
        Lemma::TamePullback => (tame_pullback(cfg, cap)?, 0),
        Lemma::FrobeniusPullback => frobenius_pullback(cfg, cap)?,
        Lemma::PsiApproxHom => (psi_approx_hom(cfg, cap, &mut rng)?, 0),
        Lemma::PsiDiff => (psi_diff(cfg, cap, &mut rng)?, 0),
        Lemma::KstarRotation => (kstar_rotation(cfg, cap)?, 0),
        Lemma::BasisLemma => (basis_lemma(cfg, cap, &mut rng)?, 0),
        Lemma::Monotonicity => (monotonicity(cfg, cap)?, 0),
    };
    Ok(LemmaReport { lemma, samples, vacuous })
}

fn ramified(p: u64, precision: u32) -> Result<Field> {
    make_field(&FieldDescription::qp(p, precision).eisenstein_ints("z", &[-(p as i64), 0, 1]))
}

/// `Q_p(t_1..t_m)^∧(s)`, `s^n = p`, so `β = n`.
fn twisted(p: u64, m: usize, n: usize, precision: u32) -> Result<Field> {
    let mut tw = vec![0i64; n + 1];
    tw[0] = -(p as i64);
    tw[n] = 1;
    make_field(&FieldDescription::qp(p, precision).with_step(TowerStep::Transcendentals(m)).eisenstein_ints("s", &tw))
}

/// `Σ_{i<6} c_i π^i` with random digits `c_i ∈ [0, p)`, the first one
/// nonzero when `unit`.
fn random_integral(l: &Field, unit: bool, rng: &mut ChaCha8Rng) -> Elem {
    let p = l.p() as i128;
    let pi = l.pi();
    let mut acc = Elem::zero(l);
    let mut pw = Elem::one(l);
    for i in 0..6 {
        let c = if i == 0 && unit { rng.gen_range(1..p) } else { rng.gen_range(0..p) };
        acc = acc.add(&pw.scale_int(c));
        pw = pw.mul(&pi);
    }
    acc
}

fn radius_pth_power(cfg: &VerifyConfig, cap: usize, rng: &mut ChaCha8Rng) -> Result<(Vec<Sample>, usize)> {
    let mut fields = Vec::new();
    for p in [2u64, 3, 5] {
        fields.push(make_field(&FieldDescription::qp(p, cfg.precision))?);
        fields.push(ramified(p, cfg.precision)?);
    }
    let mut out = Vec::with_capacity(cap.min(100_000));
    let mut vacuous = 0;
    let mut i = 0;
    while out.len() < cap {
        let l = &fields[i % fields.len()];
        i += 1;
        let e = l.e() as i64;
        let vb = rng.gen_range(0..4i64);
        let rho = Q::new(rng.gen_range(0..=4 * e), rng.gen_range(1..=4));
        let b = random_integral(l, true, rng).mul(&l.pi().pow(vb)?);
        // v(b − T) > ρ + v(b) for most draws; a few fall outside
        let d = vb + crate::valuation::floor_q(rho) + rng.gen_range(0..3i64);
        let t = b.add(&random_integral(l, false, rng).mul(&l.pi().pow(d)?));
        let s = check_pth_power(&b, &t, rho)?;
        if !s.hypothesis {
            vacuous += 1;
            continue;
        }
        out.push(Sample {
            label: format!("{} v(b)={} rho={}", l.describe(), vb, rho),
            ok: s.ok,
            margin: s.margin(),
            detail: format!("v(b^p - T^p) = {} >= {}", s.lhs, s.bound),
        });
    }
    Ok((out, vacuous))
}

fn ir_window(r: &RadiusReport) -> Option<(Q, Q)> {
    let est = &r.directions[0];
    match (est.slope, est.window) {
        (Some(_), Some((lo, hi))) => Some(((est.v_f - hi).max(qi(0)), (est.v_f - lo).max(qi(0)))),
        _ => None,
    }
}

/// Equal snapped exponents, and overlapping raw windows where both sides
/// needed a slope.
fn radii_agree(before: &RadiusReport, after: &RadiusReport) -> bool {
    if before.ir_exponent != after.ir_exponent {
        return false;
    }
    match (ir_window(before), ir_window(after)) {
        (Some((a, b)), Some((c, d))) => a <= d && c <= b,
        _ => true,
    }
}

fn constant_rank_one(k: &Field, lam: &Elem, a: Q) -> Result<DifferentialModule> {
    let vars = delta_vars(0);
    let n = GaussPoly::constant(k, &vars, None, lam.clone())?;
    DifferentialModule::rank_one(k, &vars, vec![a], vec![n])
}

fn tame_sample(label: String, m: &DifferentialModule, n: u32, y: &Elem, cfg: &SpectralConfig) -> Result<Sample> {
    let before = radius_report(m, m.radii(), cfg)?;
    let pb = pullback_tame(m, n, y)?;
    let after = radius_report(&pb, pb.radii(), cfg)?;
    Ok(Sample {
        label,
        ok: radii_agree(&before, &after),
        margin: None,
        detail: format!(
            "-log IR: {} on radius {} -> {} on radius {}",
            before.ir_exponent,
            m.radii()[0],
            after.ir_exponent,
            pb.radii()[0]
        ),
    })
}

fn tame_pullback(cfg: &VerifyConfig, cap: usize) -> Result<Vec<Sample>> {
    let sc = &cfg.spectral;
    let mut out = Vec::new();
    // rank one: ∂e = λe on |δ| ≤ θ^4, off-centred at y ∈ {1, p}
    for p in [2u64, 3, 5] {
        let k = make_field(&FieldDescription::qp(p, cfg.precision))?;
        let n = if p == 2 { 3 } else { 2 };
        for v in 3..7u32 {
            let lam = Elem::from_ratio(&k, 1, (p as i128).pow(v))?;
            let m = constant_rank_one(&k, &lam, qi(4))?;
            for y in [Elem::one(&k), Elem::from_int(&k, p as i128)] {
                let label = format!("rank 1, p={} v(lambda)=-{} n={} v(y)={}", p, v, n, y.valuation());
                out.push(tame_sample(label, &m, n, &y, sc)?);
            }
        }
        let lam = Elem::from_ratio(&k, 1, (p as i128).pow(5))?;
        let m = constant_rank_one(&k, &lam, qi(2))?;
        out.push(tame_sample(format!("rank 1, p={} n=1", p), &m, 1, &Elem::from_int(&k, 7), sc)?);
    }
    // rank p: modules of degree-p coverings
    for (label, a) in [
        ("Q2(zeta4)", Q::new(3, 2)),
        ("Q2(sqrt3)", qi(2)),
        ("Q3[T^3+3T^2-3]", qi(2)),
        ("Q3(zeta9)+", Q::new(3, 2)),
        ("Q5[T^5+5T^4-5]", Q::new(3, 2)),
    ] {
        let l = corpus_entry(label).expect("corpus label").field(DEFAULT_PRECISION)?;
        let pres = ThickeningPresentation::eisenstein(&l, cfg.truncation)?;
        let m = from_covering(&pres)?.with_radii(vec![a])?;
        let k = m.field().clone();
        let n = if k.p() == 2 { 3 } else { 2 };
        out.push(tame_sample(format!("rank {}, {} a={} n={}", m.rank(), label, a, n), &m, n, &Elem::one(&k), sc)?);
    }
    out.truncate(cap);
    Ok(out)
}

fn frobenius_pullback(cfg: &VerifyConfig, cap: usize) -> Result<(Vec<Sample>, usize)> {
    let mut out = Vec::new();
    let mut vacuous = 0;
    for (p, n) in [(2u64, 3usize), (3, 2)] {
        let k = twisted(p, 1, n, cfg.precision)?;
        for v in 0..4i64 {
            let lam = k.pi().pow(-v)?;
            for (a, b) in [(2i64, qi(1)), (3, qi(2)), (2, Q::new(3, 2)), (3, Q::new(5, 2))] {
                let m = constant_rank_one(&k, &lam, qi(a))?;
                let pb = match pullback_frobenius(&m, &Elem::one(&k), b) {
                    Ok(x) => x,
                    Err(Error::ParameterOutOfRange(_)) => {
                        vacuous += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let before = radius_report(&m, m.radii(), &cfg.spectral)?.ir_exponent;
                let after = radius_report(&pb, pb.radii(), &cfg.spectral)?.ir_exponent;
                out.push(Sample {
                    label: format!("p={} v(lambda)=-{} a={} b={}", p, v, a, b),
                    ok: after <= before,
                    margin: Some(before - after),
                    detail: format!("-log IR: {} -> {}", before, after),
                });
            }
        }
    }
    out.truncate(cap);
    Ok((out, vacuous))
}

/// Random `c_0(t) + c_1(t)π + c_2(t)π²` with small integer polynomials
/// `c_i`, returned with the `c_i` as `(exponents, coefficient)` lists.
type IntPoly = Vec<(Vec<u32>, i64)>;

fn random_int_poly(m: usize, rng: &mut ChaCha8Rng) -> IntPoly {
    (0..rng.gen_range(1..4))
        .map(|_| ((0..m).map(|_| rng.gen_range(0..4u32)).collect(), rng.gen_range(-6..7i64)))
        .collect()
}

fn int_poly_elem(k: &Field, c: &IntPoly) -> Result<Elem> {
    let mut acc = Elem::zero(k);
    for (e, a) in c {
        let mut mono = Elem::from_int(k, *a as i128);
        for (j, x) in e.iter().enumerate() {
            mono = mono.mul(&Elem::t(k, j).pow(*x as i64)?);
        }
        acc = acc.add(&mono);
    }
    Ok(acc)
}

fn int_poly_derivative(c: &IntPoly, j: usize) -> IntPoly {
    c.iter()
        .filter(|(e, _)| e[j] > 0)
        .map(|(e, a)| {
            let mut e2 = e.clone();
            e2[j] -= 1;
            (e2, a * e[j] as i64)
        })
        .collect()
}

fn random_psi_input(k: &Field, rng: &mut ChaCha8Rng) -> Result<(Elem, Vec<IntPoly>)> {
    let cs: Vec<IntPoly> = (0..3).map(|_| random_int_poly(k.m(), rng)).collect();
    let mut h = Elem::zero(k);
    for (i, c) in cs.iter().enumerate() {
        h = h.add(&int_poly_elem(k, c)?.mul(&k.pi().pow(i as i64)?));
    }
    Ok((h, cs))
}

/// `(β_K, m) = (2, 1)` over `Q_3` and `(3, 2)` over `Q_2`.
fn psi_fields(precision: u32) -> Result<Vec<Field>> {
    Ok(vec![twisted(3, 1, 2, precision)?, twisted(2, 2, 3, precision)?])
}

fn psi_approx_hom(cfg: &VerifyConfig, cap: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Sample>> {
    let fields = psi_fields(cfg.precision.min(24))?;
    let per = cap.div_ceil(fields.len());
    let mut out = Vec::new();
    for k in &fields {
        let r = default_level(k);
        let mut done = 0;
        while done < per && out.len() < cap {
            let (h1, _) = random_psi_input(k, rng)?;
            let (h2, _) = random_psi_input(k, rng)?;
            if h1.is_zero() || h2.is_zero() {
                continue;
            }
            let rep = check_approx_hom(&h1, &h2, r, 4)?;
            // a vanishing residual has no margin; a missing one already failed
            let margin = [rep.mult_margin, rep.add_margin].iter().filter_map(|m| m.and_then(|v| v.finite())).min();
            out.push(Sample {
                label: format!("beta={} m={} pair {}", k.beta(), k.m(), done),
                ok: rep.pass,
                margin,
                detail: format!("a=({}, {}) mult {:?} add {:?}", rep.a1, rep.a2, rep.mult_margin, rep.add_margin),
            });
            done += 1;
        }
    }
    Ok(out)
}

fn psi_diff(cfg: &VerifyConfig, cap: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Sample>> {
    let fields = psi_fields(cfg.precision.min(24))?;
    let per = cap.div_ceil(fields.len());
    let mut out = Vec::new();
    for k in &fields {
        let r = default_level(k);
        let mut done = 0;
        while done < per && out.len() < cap {
            let (h, cs) = random_psi_input(k, rng)?;
            if h.is_zero() {
                continue;
            }
            // dh = c̄_1 dπ + Σ_j ∂c̄_0/∂t_j dt_j in Ω ⊗ k (p ∈ (π²) as β ≥ 2)
            let mut expect = vec![int_poly_elem(k, &cs[1])?.residue()?];
            for j in 0..k.m() {
                expect.push(int_poly_elem(k, &int_poly_derivative(&cs[0], j))?.residue()?);
            }
            let margin = differential_congruence_margin(&h, &expect, r)?;
            out.push(Sample {
                label: format!("beta={} m={} element {}", k.beta(), k.m(), done),
                ok: margin >= Valuation::int(0),
                margin: margin.finite(),
                detail: format!("margin {}", margin),
            });
            done += 1;
        }
    }
    Ok(out)
}

fn kstar_rotation(cfg: &VerifyConfig, cap: usize) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        let l = kstar_field(p)?;
        let k = l.parent().expect("K_* has a parent").clone();
        let m0 = from_covering(&ThickeningPresentation::eisenstein(&l, cfg.truncation)?)?;
        let h = kstar_relation(&k)?.coerce(&l)?;
        let root = roots_in_field(&h)?.into_iter().next().ok_or(Error::DoesNotSplit)?;
        for a in [Q::new(3, 2), qi(2)] {
            if out.len() >= cap {
                return Ok(out);
            }
            let m = m0.with_radii(vec![a + qi(1), a])?;
            let before = radius_report(&m, m.radii(), &cfg.spectral)?;
            let pb = pullback_kstar(&m, &root, cfg.truncation)?;
            let after = radius_report(&pb, pb.radii(), &cfg.spectral)?;
            let e = p as i64;
            let expect = (a - Q::new(p as i64 - 2, p as i64)) * qi(e);
            out.push(Sample {
                label: format!("p={} a={}", p, a),
                ok: before.ir_exponent == qi(0) && after.ir_exponent == qi(0) && pb.radii()[0] == expect,
                margin: None,
                detail: format!(
                    "-log IR {} -> {}, eta0 radius {} (K_* units, expected {})",
                    before.ir_exponent,
                    after.ir_exponent,
                    pb.radii()[0],
                    expect
                ),
            });
        }
    }
    Ok(out)
}

fn basis_lemma(cfg: &VerifyConfig, cap: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Sample>> {
    let fields = vec![ramified(3, cfg.precision.min(24))?, kstar_field(3)?, kstar_field(2)?];
    let mut pres = Vec::new();
    for l in &fields {
        pres.push(ThickeningPresentation::standard(l, 4)?);
    }
    let mut out = Vec::new();
    for i in 0..cap {
        let l = &fields[i % fields.len()];
        let pr = &pres[i % fields.len()];
        let k = l.parent().expect("extension").clone();
        let e = l.e();
        let vars = thickening_vars(k.m(), e);
        let u0 = k.m() + 1;
        let mut h = GaussPoly::zero(&k, &vars, None)?;
        for d in 0..rng.gen_range(1..3 * e + 1) {
            let (c, _) = random_psi_input(&k, rng)?;
            let mut x = Exps::from_elem(0, vars.len());
            x[u0] = d as u16;
            h.add_term(x, c);
        }
        let red = pr.reduce(&h)?;
        let deg_ok = red.degree_in(u0).unwrap_or(0) < e as u16;
        let mut point = vec![Elem::zero(l); vars.len()];
        point[u0] = l.pi();
        let lhs = h.coerce_to(l)?.eval(&point)?;
        let rhs = red.coerce_to(l)?.eval(&point)?;
        let same = lhs.sub(&rhs).valuation() >= Valuation::int(l.cap() / 2);
        let expect = red
            .univariate_coeffs(u0)?
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .filter_map(|(d, c)| c.val_int().map(|v| Valuation::int(v * e as i64 + d as i64)))
            .min()
            .unwrap_or(Valuation::Infinite);
        let orth = expect.is_infinite() || rhs.valuation() == expect;
        out.push(Sample {
            label: format!("{} element {}", l.describe(), i),
            ok: deg_ok && same && orth,
            margin: None,
            detail: format!("v_L = {} (basis minimum {})", rhs.valuation(), expect),
        });
    }
    Ok(out)
}

fn monotonicity(cfg: &VerifyConfig, cap: usize) -> Result<Vec<Sample>> {
    let grid: Vec<Q> = (4..=16).map(|i| Q::new(i, 4)).collect();
    let mut modules: Vec<(String, DifferentialModule)> = Vec::new();
    for label in ["Q2(zeta4)", "Q2(sqrt2)", "Q3(sqrt3)", "Q3(zeta9)+", "Q5[T^5+5T^4-5]"] {
        let l = corpus_entry(label).expect("corpus label").field(DEFAULT_PRECISION)?;
        modules.push((String::from(label), from_covering(&ThickeningPresentation::eisenstein(&l, 12)?)?));
    }
    for p in [2u64, 3, 5] {
        let k = make_field(&FieldDescription::qp(p, cfg.precision))?;
        let lam = Elem::from_ratio(&k, 1, (p as i128).pow(4))?;
        modules.push((format!("rank 1 over Q{}", p), constant_rank_one(&k, &lam, qi(0))?));
    }
    let mut out = Vec::new();
    for (label, m) in &modules {
        let mut prev: Option<(Q, Q)> = None;
        for s in &grid {
            let ir = radius_report(m, &vec![*s; m.directions()], &cfg.spectral)?.ir_exponent;
            if let Some((s0, ir0)) = prev {
                out.push(Sample {
                    label: format!("{} s={}..{}", label, s0, s),
                    ok: ir <= ir0,
                    margin: Some(ir0 - ir),
                    detail: format!("-log IR {} -> {}", ir0, ir),
                });
            }
            prev = Some((*s, ir));
        }
    }
    out.truncate(cap);
    Ok(out)
}
