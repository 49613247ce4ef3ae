//! Acceptance run: one pass/fail line per criterion, with timings.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramlab_core::audit::{analyse_breaks, kstar_report};
use ramlab_core::corpus::{kstar_field, DEFAULT_PRECISION, GALOIS_CORPUS};
use ramlab_core::diffmod::{from_covering, SpectralConfig};
use ramlab_core::field::{make_field, FieldDescription, TowerStep};
use ramlab_core::gauss::{GaussPoly, VarSet};
use ramlab_core::newton::newton_polygon;
use ramlab_core::poly::Poly;
use ramlab_core::ramification::hasse_arf_audit_one;
use ramlab_core::thickening::ThickeningPresentation;
use ramlab_core::valuation::{qi, Q};
use ramlab_core::verify::{verify, Lemma, LemmaReport, VerifyConfig};
use ramlab_core::{Elem, Field};

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(n: usize, title: &str, budget: Duration, f: impl FnOnce() -> Result<Outcome, String>) -> bool {
    let t0 = Instant::now();
    let out = f();
    let dt = t0.elapsed();
    let (pass, detail) = match out {
        Ok(o) => (o.pass && dt <= budget, o.detail),
        Err(e) => (false, format!("error: {}", e)),
    };
    println!(
        "criterion {}: {} - {} [{}] ({:.1} s, budget {} s)",
        n,
        if pass { "PASS" } else { "FAIL" },
        title,
        detail,
        dt.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn lemma(l: Lemma, samples: Option<usize>) -> Result<LemmaReport, String> {
    let cfg = VerifyConfig { samples, ..VerifyConfig::default() };
    verify(l, &cfg).map_err(|e| e.to_string())
}

fn summary(r: &LemmaReport) -> String {
    format!("{}: {} samples, {} failures", r.lemma, r.samples.len(), r.failures())
}

fn kstar_example() -> Result<Outcome, String> {
    let cfg = SpectralConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [2u64, 3, 5] {
        let t0 = Instant::now();
        let l = kstar_field(p).map_err(|e| e.to_string())?;
        let rep = kstar_report(&l, &[Q::new(3, 2), qi(2)], 12, &cfg).map_err(|e| e.to_string())?;
        let dt = t0.elapsed();
        let ok = rep.ok() && dt < Duration::from_secs(30);
        pass &= ok;
        let discs: Vec<String> =
            rep.levels.iter().map(|d| format!("a={}: {} discs r={}", d.a, d.count, d.radii.first().copied().unwrap_or(qi(0)))).collect();
        parts.push(format!(
            "p={} root diffs all 2: {}, b_log={} (differential {}), {}, {:.1} s",
            p,
            rep.roots_ok(),
            rep.profile.b_log,
            rep.differential_b_log,
            discs.join(", "),
            dt.as_secs_f64()
        ));
    }
    Ok(Outcome { pass, detail: parts.join("; ") })
}

fn break_agreement() -> Result<Outcome, String> {
    let cfg = SpectralConfig::default();
    let mut agree = 0;
    let mut bad = Vec::new();
    for e in GALOIS_CORPUS {
        let l = e.field(DEFAULT_PRECISION).map_err(|e| e.to_string())?;
        let a = analyse_breaks(&l, 12, &cfg).map_err(|e| e.to_string())?;
        if a.agreement {
            agree += 1;
        } else {
            bad.push(format!("{} (b={} vs {:?})", e.label, a.b, a.differential_b));
        }
    }
    let pass = GALOIS_CORPUS.len() >= 10 && bad.is_empty();
    Ok(Outcome { pass, detail: format!("{}/{} corpus extensions agree{}", agree, GALOIS_CORPUS.len(), if bad.is_empty() { String::new() } else { format!("; mismatches: {}", bad.join(", ")) }) })
}

fn hasse_arf() -> Result<Outcome, String> {
    let mut chars = 0;
    let mut subq = 0;
    let mut bad = Vec::new();
    let mut fields: Vec<(String, Field)> = Vec::new();
    for e in GALOIS_CORPUS {
        fields.push((e.label.to_string(), e.field(DEFAULT_PRECISION).map_err(|e| e.to_string())?));
    }
    for p in [2u64, 3, 5] {
        fields.push((format!("K*/K p={}", p), kstar_field(p).map_err(|e| e.to_string())?));
    }
    for (label, l) in &fields {
        let row = hasse_arf_audit_one(label, l).map_err(|e| e.to_string())?;
        for (c, _) in &row.characters {
            chars += 1;
            if !(c.art.is_integer() && c.art >= qi(0)) {
                bad.push(format!("{}: Art {}", label, c.art));
            }
        }
        for s in row.subquotients.iter().filter(|s| s.order > 1 && s.upper > qi(0)) {
            subq += 1;
            if !(s.abelian && s.killed_by_p) {
                bad.push(format!("{}: subquotient at {}", label, s.upper));
            }
        }
    }
    Ok(Outcome {
        pass: bad.is_empty() && chars > 0 && subq > 0,
        detail: format!("{} characters integral, {} wild subquotients elementary p-abelian, {} failures", chars, subq, bad.len()),
    })
}

fn radius_bound() -> Result<Outcome, String> {
    let r = lemma(Lemma::RadiusPthPower, Some(10_000))?;
    Ok(Outcome { pass: r.passed() && r.samples.len() == 10_000, detail: summary(&r) })
}

fn pullbacks() -> Result<Outcome, String> {
    let tame = lemma(Lemma::TamePullback, None)?;
    let rank_one = tame.samples.iter().filter(|s| s.label.starts_with("rank 1,")).count();
    let rank_p = tame.samples.len() - rank_one;
    let frob = lemma(Lemma::FrobeniusPullback, None)?;
    Ok(Outcome {
        pass: tame.passed() && frob.passed() && rank_one >= 20 && rank_p >= 5,
        detail: format!("{} ({} rank-1, {} rank-p); {}", summary(&tame), rank_one, rank_p, summary(&frob)),
    })
}

fn psi() -> Result<Outcome, String> {
    let hom = lemma(Lemma::PsiApproxHom, Some(200))?;
    let diff = lemma(Lemma::PsiDiff, Some(200))?;
    Ok(Outcome { pass: hom.passed() && diff.passed(), detail: format!("{}; {}", summary(&hom), summary(&diff)) })
}

/// `Σ c_i π^i` with small integer digits.
fn digits(l: &Field, cs: &[i64]) -> Elem {
    let mut acc = Elem::zero(l);
    let mut pw = Elem::one(l);
    for c in cs {
        acc = acc.add(&pw.scale_int(*c as i128));
        pw = pw.mul(&l.pi());
    }
    acc
}

fn property_suites() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0007);
    let err = |e: ramlab_core::Error| e.to_string();
    let mut failures = Vec::new();
    // ultrametric laws
    let mut ultra = 0;
    for p in [2u64, 3, 5] {
        let l = make_field(&FieldDescription::qp(p, 30).eisenstein_ints("z", &[p as i64, 0, 1])).map_err(err)?;
        for _ in 0..100 {
            let x = digits(&l, &(0..5).map(|_| rng.gen_range(-20..20)).collect::<Vec<_>>());
            let y = digits(&l, &(0..5).map(|_| rng.gen_range(-20..20)).collect::<Vec<_>>());
            let (vx, vy, vs) = (x.valuation(), y.valuation(), x.add(&y).valuation());
            let ok = vs >= vx.min(vy) && (vx == vy || vs == vx.min(vy)) && x.mul(&y).valuation() == vx + vy;
            if !ok {
                failures.push(format!("ultrametric p={}", p));
            }
            ultra += 1;
        }
    }
    // Gauss multiplicativity
    let mut gauss = 0;
    for p in [2u64, 3, 5] {
        let k = make_field(&FieldDescription::qp(p, 30).with_step(TowerStep::Transcendentals(1))).map_err(err)?;
        let vars = VarSet::new(&["x", "y"]);
        let unit = Elem::one(&k).add(&Elem::t(&k, 0));
        for _ in 0..60 {
            let mut build = || -> Result<GaussPoly, ramlab_core::Error> {
                let mut h = GaussPoly::zero(&k, &vars, None)?;
                for _ in 0..rng.gen_range(1..5) {
                    let x = GaussPoly::var(&k, &vars, None, "x")?.pow(rng.gen_range(0..4))?;
                    let y = GaussPoly::var(&k, &vars, None, "y")?.pow(rng.gen_range(0..4))?;
                    let c = Elem::from_int(&k, rng.gen_range(-30..30)).mul(&unit);
                    h = h.add(&x.mul(&y)?.scale(&c))?;
                }
                Ok(h)
            };
            let (f, g) = (build().map_err(err)?, build().map_err(err)?);
            if f.is_zero() || g.is_zero() {
                continue;
            }
            let w = [Q::new(rng.gen_range(0..8), 3), Q::new(rng.gen_range(0..8), 2)];
            if f.mul(&g).map_err(err)?.gauss_valuation_with(&w) != f.gauss_valuation_with(&w) + g.gauss_valuation_with(&w) {
                failures.push(format!("gauss p={}", p));
            }
            gauss += 1;
        }
    }
    // polygon duality on 200 products of linear factors with known roots
    let fields: Vec<Field> = [2u64, 3, 5].iter().map(|p| make_field(&FieldDescription::qp(*p, 30))).collect::<Result<_, _>>().map_err(err)?;
    for i in 0..200 {
        let l = &fields[i % 3];
        let p = l.p() as i64;
        let mut f = Poly::one(l);
        let mut vals = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let k = rng.gen_range(0..4i64);
            let mut u = rng.gen_range(1..200i64);
            while u % p == 0 {
                u += 1;
            }
            let r = l.pi().pow(k).map_err(err)?.mul(&Elem::from_int(l, u as i128));
            f = f.mul(&Poly::new(l, vec![r.neg(), Elem::one(l)]));
            vals.push(qi(k));
        }
        let mut got: Vec<Q> = Vec::new();
        for (v, mult) in newton_polygon(&f).map_err(err)?.root_valuations() {
            got.extend(std::iter::repeat(v).take(mult));
        }
        got.sort();
        vals.sort();
        if got != vals {
            failures.push(format!("polygon sample {}", i));
        }
    }
    // integrability of covering modules
    let mut integ = 0;
    for p in [2u64, 3] {
        let l = kstar_field(p).map_err(err)?;
        let m = from_covering(&ThickeningPresentation::eisenstein(&l, 8).map_err(err)?).map_err(err)?;
        if !m.is_integrable().map_err(err)? {
            failures.push(format!("integrability K_* p={}", p));
        }
        integ += 1;
    }
    // IR monotonicity grid and basis lemma
    let mono = lemma(Lemma::Monotonicity, None)?;
    let basis = lemma(Lemma::BasisLemma, Some(200))?;
    if !mono.passed() {
        failures.push(summary(&mono));
    }
    if !basis.passed() {
        failures.push(summary(&basis));
    }
    Ok(Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "ultrametric {}, gauss {}, polygon 200, integrability {}, monotonicity {} pairs, basis {} elements; {} failures",
            ultra,
            gauss,
            integ,
            mono.samples.len(),
            basis.samples.len(),
            failures.len()
        ),
    })
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let results = [
        run(1, "K_*/K example: root distances, b_log, disc decomposition", secs(90), kstar_example),
        run(2, "differential break search vs classical breaks", secs(300), break_agreement),
        run(3, "Hasse-Arf integrality and elementary abelian subquotients", secs(300), hasse_arf),
        run(4, "radius p-th power bound", secs(10), radius_bound),
        run(5, "tame pullback identity and Frobenius inequality", secs(600), pullbacks),
        run(6, "psi approximate homomorphism and differential congruence", secs(600), psi),
        run(7, "property suites", secs(600), property_suites),
    ];
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {}/{} criteria passed", passed, results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
