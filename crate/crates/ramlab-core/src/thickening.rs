//! The deformation `ψ: O_K → O_K⟦δ_0/π, δ_J⟧` built from `p`-basis digit
//! decompositions, its approximate-homomorphism gauges, standard
//! generators of an Eisenstein step, thickening presentations with their
//! error gauge and basis reduction, and component counting for a single
//! relation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gauss::{Exps, GaussPoly, VarSet};
use crate::newton::root_difference_table;
use crate::poly::Poly;
use crate::residue::{teichmuller_lift, Residue};
use crate::scalar::{Mono, Scalar, TPoly};
use crate::valuation::{floor_q, qi, Valuation, Q};

/// Names of the deformation variables `δ_0..δ_m`.
pub fn delta_names(m: usize) -> Vec<String> {
    (0..=m).map(|j| format!("d{}", j)).collect()
}

/// Names of the generators `u_0..u_m`.
pub fn u_names(m: usize) -> Vec<String> {
    (0..=m).map(|j| format!("u{}", j)).collect()
}

/// The variable set `δ_0..δ_m` (no default weights).
pub fn delta_vars(m: usize) -> Arc<VarSet> {
    let names = delta_names(m);
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    VarSet::new(&refs)
}

/// The variable set `δ_0..δ_m, u_0..u_m` with `u_0` weighted `1/e` and
/// `u_j` weighted 0 (the `N^a` filtration).
pub fn thickening_vars(m: usize, e: usize) -> Arc<VarSet> {
    let mut names = delta_names(m);
    names.extend(u_names(m));
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut w: Vec<Option<Q>> = vec![None; m + 1];
    w.push(Some(Q::new(1, e as i64)));
    w.extend(core::iter::repeat_n(Some(qi(0)), m));
    VarSet::with_weights(&refs, &w)
}

/// One more than the smallest `r` with `p^r > β_K`: ψ is a limit over
/// `r`, and the extra level absorbs the carries of the greedy digit
/// decomposition so that single-level values already agree mod `I_K`.
pub fn default_level(field: &Field) -> u32 {
    let mut r = 1;
    while (field.p() as i64).pow(r) <= field.beta() {
        r += 1;
    }
    r + 1
}

/// One term `b^{e} · α^{p^r} · π^n` of a decomposition.
#[derive(Clone, Debug)]
pub struct PTerm {
    pub e: Vec<u32>,
    pub n: u32,
    pub alpha: Elem,
}

/// An `r`-th `p`-basis decomposition `h = Σ b^{e} α^{p^r} π^n` with
/// exponents `e_j < p^r`, computed greedily digit by digit.
#[derive(Clone, Debug)]
pub struct PBasisDecomposition {
    pub field: Field,
    pub r: u32,
    pub terms: Vec<PTerm>,
    /// Digits `n` below this bound are covered.
    pub digits: i64,
}

fn check_base(field: &Field) -> Result<()> {
    if field.f() > 1 {
        return Err(Error::Unsupported("ψ over a non-prime constant field".into()));
    }
    Ok(())
}

/// Splits a residue `x ∈ F_p(t)` as `Σ_{e<p^r} t^e c_e^{p^r}` and returns
/// the pairs `(e, c_e)`.
fn residue_p_basis(x: &Residue, r: u32) -> Vec<(Vec<u32>, Residue)> {
    let field = x.field().clone();
    let m = field.m();
    let zres = &field.0.zres;
    let q = (field.p() as u32).pow(r);
    let s = &x.coords()[0];
    let (num, den) = (s.numerator(), s.denominator());
    let mut mm = num.clone();
    for _ in 1..q {
        mm = mm.mul(zres, &den);
    }
    // group monomials by exponent residue modulo q
    let mut groups: Vec<(Vec<u32>, Vec<(Mono, u128)>)> = Vec::new();
    for (mono, c) in &mm.0 {
        let e: Vec<u32> = (0..m).map(|j| mono[j] as u32 % q).collect();
        let mut k: Mono = [0; crate::scalar::MAX_VARS];
        for j in 0..m {
            k[j] = (mono[j] as u32 / q) as u16;
        }
        match groups.iter_mut().find(|g| g.0 == e) {
            Some(g) => g.1.push((k, *c)),
            None => groups.push((e, vec![(k, *c)])),
        }
    }
    groups.sort_by(|a, b| b.0.cmp(&a.0));
    groups
        .into_iter()
        .map(|(e, terms)| {
            let mut t = terms;
            t.sort_by(|a, b| a.0.cmp(&b.0));
            let sc = Scalar::normalize(zres, TPoly(t), den.clone());
            (e, Residue::from_coords(&field, vec![sc]).expect("one coordinate"))
        })
        .collect()
}

fn b_power(field: &Field, e: &[u32]) -> Result<Elem> {
    let mut acc = Elem::one(field);
    for (j, x) in e.iter().enumerate() {
        acc = acc.mul(&Elem::t(field, j).pow(*x as i64)?);
    }
    Ok(acc)
}

/// Greedy `r`-th decomposition of an integral element.
pub fn decompose(h: &Elem, r: u32) -> Result<PBasisDecomposition> {
    let field = h.field().clone();
    check_base(&field)?;
    if h.valuation() < Valuation::int(0) {
        return Err(Error::NegativeValuation);
    }
    let digits = h.precision().min(field.cap());
    let pi = field.pi();
    let q = (field.p() as i64).pow(r);
    let mut rest = h.clone();
    let mut terms = Vec::new();
    let mut pin = Elem::one(&field);
    for n in 0..digits.max(0) {
        if rest.is_zero() {
            break;
        }
        let unit = rest.shift(-n);
        let res = unit.residue()?;
        if !res.is_zero() {
            for (e, c) in residue_p_basis(&res, r) {
                if c.is_zero() {
                    continue;
                }
                let alpha = teichmuller_lift(&c);
                let piece = b_power(&field, &e)?.mul(&alpha.pow(q)?).mul(&pin);
                rest = rest.sub(&piece);
                terms.push(PTerm { e, n: n as u32, alpha });
            }
        }
        pin = pin.mul(&pi);
    }
    Ok(PBasisDecomposition { field, r, terms, digits })
}

impl PBasisDecomposition {
    /// `Σ b^e α^{p^r} π^n`.
    pub fn reassemble(&self) -> Result<Elem> {
        let q = (self.field.p() as i64).pow(self.r);
        let pi = self.field.pi();
        let mut acc = Elem::zero(&self.field);
        for t in &self.terms {
            acc = acc.add(&b_power(&self.field, &t.e)?.mul(&t.alpha.pow(q)?).mul(&pi.pow(t.n as i64)?));
        }
        Ok(acc.truncate(self.digits))
    }

    /// `Σ (b+δ_J)^e α^{p^r} (π+δ_0)^n` as a truncated polynomial in `δ`.
    pub fn psi(&self, trunc: u32) -> Result<GaussPoly> {
        let field = &self.field;
        let m = field.m();
        let vars = delta_vars(m);
        let tr = Some(trunc);
        let q = (field.p() as i64).pow(self.r);
        let d0 = GaussPoly::var(field, &vars, tr, "d0")?;
        let base0 = d0.add_const(&field.pi());
        let mut pows0 = vec![GaussPoly::constant(field, &vars, tr, Elem::one(field))?];
        let maxn = self.terms.iter().map(|t| t.n).max().unwrap_or(0);
        for k in 1..=maxn as usize {
            let next = pows0[k - 1].mul(&base0)?;
            pows0.push(next);
        }
        let mut bj: Vec<Vec<GaussPoly>> = Vec::new();
        for j in 0..m {
            let dj = GaussPoly::var(field, &vars, tr, &format!("d{}", j + 1))?;
            let base = dj.add_const(&Elem::t(field, j));
            let maxe = self.terms.iter().map(|t| t.e[j]).max().unwrap_or(0);
            let mut v = vec![GaussPoly::constant(field, &vars, tr, Elem::one(field))?];
            for k in 1..=maxe as usize {
                let next = v[k - 1].mul(&base)?;
                v.push(next);
            }
            bj.push(v);
        }
        let mut out = GaussPoly::zero(field, &vars, tr)?;
        for t in &self.terms {
            let mut piece = pows0[t.n as usize].scale(&t.alpha.pow(q)?);
            for j in 0..m {
                piece = piece.mul(&bj[j][t.e[j] as usize])?;
            }
            out = out.add(&piece)?;
        }
        Ok(out)
    }
}

/// `ψ(h)` at the given decomposition level and truncation order.
pub fn psi(h: &Elem, r: u32, trunc: u32) -> Result<GaussPoly> {
    if h.is_zero() {
        return GaussPoly::zero(h.field(), &delta_vars(h.field().m()), Some(trunc));
    }
    decompose(h, r)?.psi(trunc)
}

/// `min_{α ≠ 0} v(g_α) + α_0`, the order of `g` in the ideal
/// `(δ_0/π, δ_J)`-adic sense measured against powers of `π`; `None` if
/// `g` has a nonzero constant term.
fn ik_order(g: &GaussPoly) -> Option<Valuation> {
    // a constant term at the working precision is rounding, not content
    if g.constant_term().valuation() < Valuation::int(g.field().cap()) {
        return None;
    }
    let m = g.vars().len();
    let mut w = vec![qi(0); m];
    w[0] = qi(1);
    Some(g.gauss_valuation_with(&w))
}

/// Margin of `g ∈ π^c · I_K`, `I_K = p·(δ_0/π, δ_J)`: membership holds
/// iff `g(0) = 0` and `v(g_α) + α_0 ≥ c + β_K` for every term. Returns
/// `None` for a nonzero constant term, `Some(+∞)` for `g = 0`.
pub fn ik_margin(g: &GaussPoly, c: i64) -> Option<Valuation> {
    let beta = g.field().beta();
    ik_order(g).map(|v| match v {
        Valuation::Infinite => Valuation::Infinite,
        Valuation::Finite(x) => Valuation::Finite(x - qi(c + beta)),
    })
}

/// Gauges of `ψ(h_1h_2) − ψ(h_1)ψ(h_2)` and
/// `ψ(h_1+h_2) − ψ(h_1) − ψ(h_2)` against `π^{a_1+a_2}I_K` and
/// `π^{min(a_1,a_2)}I_K`.
#[derive(Clone, Debug)]
pub struct ApproxHomReport {
    pub a1: i64,
    pub a2: i64,
    /// `+∞` when the residual vanishes.
    pub mult_margin: Option<Valuation>,
    pub add_margin: Option<Valuation>,
    pub pass: bool,
}

pub fn check_approx_hom(h1: &Elem, h2: &Elem, r: u32, trunc: u32) -> Result<ApproxHomReport> {
    let a1 = h1.val_int().unwrap_or(h1.field().cap());
    let a2 = h2.val_int().unwrap_or(h2.field().cap());
    if a1 < 0 || a2 < 0 {
        return Err(Error::NegativeValuation);
    }
    let p1 = psi(h1, r, trunc)?;
    let p2 = psi(h2, r, trunc)?;
    let prod = psi(&h1.mul(h2), r, trunc)?;
    let sum = psi(&h1.add(h2), r, trunc)?;
    let mres = prod.sub(&p1.mul(&p2)?)?;
    let ares = sum.sub(&p1.add(&p2)?)?;
    let mult_margin = ik_margin(&mres, a1 + a2);
    let add_margin = ik_margin(&ares, a1.min(a2));
    let ok = |m: &Option<Valuation>| m.is_some_and(|v| v >= Valuation::int(0));
    let pass = ok(&mult_margin) && ok(&add_margin);
    Ok(ApproxHomReport { a1, a2, mult_margin, add_margin, pass })
}

/// Residues of the linear `δ_j` coefficients of `ψ(h)`: the components of
/// `dh` in the basis `dπ, db_1, …, db_m` of `Ω ⊗ k`.
pub fn differential_coefficients(h: &Elem, r: u32) -> Result<Vec<Residue>> {
    let field = h.field();
    let g = psi(h, r, 2)?;
    let m = field.m();
    (0..=m)
        .map(|j| {
            let mut e = Exps::from_elem(0, m + 1);
            e[j] = 1;
            g.coeff(&e).residue()
        })
        .collect()
}

/// Margin of `ψ(h) − h − Σ [c_j] δ_j ∈ (π) + (δ)²` for supplied residues
/// `c_j` (lifted canonically): `min` over the constant and linear
/// coefficients of their valuation minus one.
pub fn differential_congruence_margin(h: &Elem, c: &[Residue], r: u32) -> Result<Valuation> {
    let field = h.field();
    let m = field.m();
    let mut g = psi(h, r, 2)?.sub(&GaussPoly::constant(field, &delta_vars(m), Some(2), h.clone())?)?;
    for (j, cj) in c.iter().enumerate() {
        let dj = GaussPoly::var(field, &delta_vars(m), Some(2), &format!("d{}", j))?;
        g = g.sub(&dj.scale(&teichmuller_lift(cj)))?;
    }
    let mut worst = g.constant_term().valuation();
    for j in 0..=m {
        let mut e = Exps::from_elem(0, m + 1);
        e[j] = 1;
        worst = worst.min(g.coeff(&e).valuation());
    }
    Ok(worst - qi(1))
}

// ---------------------------------------------------------------------------
// Presentations.
// ---------------------------------------------------------------------------

/// A thickening presentation `ψ(p_j) + R_j` over `K` in the variables
/// `δ_0..δ_m, u_0..u_m`. Generators whose relations are absent are unused.
#[derive(Clone, Debug)]
pub struct ThickeningPresentation {
    pub base: Field,
    pub e: usize,
    pub vars: Arc<VarSet>,
    /// `p_j` in the `u`-variables only.
    pub generators: Vec<GaussPoly>,
    /// Leading exponent of each relation: `e` for `u_0`, `p^{r_j}` else.
    pub leading: Vec<(usize, u32)>,
    pub corrections: Vec<GaussPoly>,
    pub trunc: u32,
    pub r: u32,
}

fn shape_error(msg: &str) -> Error {
    Error::BasisReductionFailure(msg.to_string())
}

/// Standard generator `p_0 = E(u_0)` of the top Eisenstein step of `l`
/// over its parent, checked against `u_0^e − π + π·N^{1/e}` (the constant
/// term must be `−π` modulo `π²`).
pub fn standard_generators(l: &Field) -> Result<GaussPoly> {
    let k = l.parent().ok_or_else(|| shape_error("field has no parent"))?;
    let e = l.e();
    let cs = l.eisenstein_coeffs().unwrap();
    let c0 = &cs[0];
    if c0.add(&k.pi()).valuation() < Valuation::int(2) {
        return Err(shape_error("constant term is not −π modulo π² (uniformizers not normalised)"));
    }
    let vars = thickening_vars(k.m(), e);
    let mut g = GaussPoly::zero(k, &vars, None)?;
    let u0 = k.m() + 1;
    for (i, c) in cs.iter().enumerate() {
        let mut x = Exps::from_elem(0, vars.len());
        x[u0] = i as u16;
        g.add_term(x, c.clone());
    }
    let mut x = Exps::from_elem(0, vars.len());
    x[u0] = e as u16;
    g.add_term(x, Elem::one(k));
    Ok(g)
}

/// The Eisenstein relation of the top step of `l` (no normalisation
/// check), as a generator polynomial in `u_0`.
pub fn eisenstein_generator(l: &Field) -> Result<GaussPoly> {
    let k = l.parent().ok_or_else(|| shape_error("field has no parent"))?;
    let e = l.e();
    let cs = l.eisenstein_coeffs().unwrap();
    let vars = thickening_vars(k.m(), e);
    let u0 = k.m() + 1;
    let mut g = GaussPoly::zero(k, &vars, None)?;
    for (i, c) in cs.iter().enumerate() {
        let mut x = Exps::from_elem(0, vars.len());
        x[u0] = i as u16;
        g.add_term(x, c.clone());
    }
    let mut x = Exps::from_elem(0, vars.len());
    x[u0] = e as u16;
    g.add_term(x, Elem::one(k));
    Ok(g)
}

/// Applies `ψ` coefficientwise to a polynomial in the `u`-variables.
pub fn psi_poly(g: &GaussPoly, r: u32, trunc: u32) -> Result<GaussPoly> {
    let k = g.field();
    let vars = g.vars().clone();
    let m = k.m();
    let tr = Some(trunc);
    let dvars: Vec<String> = delta_names(m);
    let mut out = GaussPoly::zero(k, &vars, tr)?;
    for (x, c) in g.terms() {
        let pc = psi(c, r, trunc)?;
        // move ψ(c) (in δ only) into the joint variable set
        let pc = pc.with_vars(&vars)?.with_truncation(tr)?;
        let mut mono = Exps::from_elem(0, vars.len());
        for (i, name) in vars.names.iter().enumerate() {
            if !dvars.contains(name) {
                mono[i] = x[i];
            }
        }
        let mut mterm = GaussPoly::zero(k, &vars, None)?;
        mterm.add_term(mono, Elem::one(k));
        out = out.add(&pc.mul(&mterm.with_truncation(None)?)?.with_truncation(tr)?)?;
    }
    Ok(out)
}

impl ThickeningPresentation {
    /// Presentation with generators `p_j` and corrections `R_j`.
    pub fn new(base: &Field, e: usize, generators: Vec<GaussPoly>, corrections: Vec<GaussPoly>, trunc: u32) -> Result<Self> {
        let m = base.m();
        let vars = thickening_vars(m, e);
        if corrections.len() != generators.len() {
            return Err(Error::InvalidSpec("one correction per generator".into()));
        }
        let mut leading = Vec::new();
        for g in &generators {
            let g = g.with_vars(&vars)?;
            // leading monomial: pure power of one u-variable with unit coefficient
            let mut found = None;
            for (x, c) in g.terms() {
                let nz: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0).collect();
                if nz.len() == 1 && nz[0] > m && c.is_one() {
                    let d = x[nz[0]] as u32;
                    if found.is_none_or(|(_, d0)| d > d0) {
                        found = Some((nz[0] - m - 1, d));
                    }
                }
            }
            leading.push(found.ok_or_else(|| shape_error("relation has no monic leading power of a generator"))?);
        }
        Ok(ThickeningPresentation {
            base: base.clone(),
            e,
            vars: vars.clone(),
            generators: generators.into_iter().map(|g| g.with_vars(&vars)).collect::<Result<_>>()?,
            leading,
            corrections: corrections.into_iter().map(|g| g.with_vars(&vars)).collect::<Result<_>>()?,
            trunc,
            r: default_level(base),
        })
    }

    /// The standard presentation `ψ(p_0)` (no corrections) of an
    /// Eisenstein step.
    pub fn standard(l: &Field, trunc: u32) -> Result<Self> {
        let k = l.parent().unwrap();
        let g = standard_generators(l)?;
        let z = GaussPoly::zero(k, g.vars(), None)?;
        ThickeningPresentation::new(k, l.e(), vec![g], vec![z], trunc)
    }

    /// The presentation `ψ(E(u_0))` of an Eisenstein step for any
    /// Eisenstein polynomial `E` (no normalisation of the constant term).
    pub fn eisenstein(l: &Field, trunc: u32) -> Result<Self> {
        let k = l.parent().ok_or_else(|| shape_error("field has no parent"))?;
        let g = eisenstein_generator(l)?;
        let z = GaussPoly::zero(k, g.vars(), None)?;
        ThickeningPresentation::new(k, l.e(), vec![g], vec![z], trunc)
    }

    /// `ψ(p_j) + R_j`.
    pub fn relations(&self) -> Result<Vec<GaussPoly>> {
        self.generators
            .iter()
            .zip(&self.corrections)
            .map(|(g, r)| psi_poly(g, self.r, self.trunc)?.add(&r.with_truncation(Some(self.trunc))?))
            .collect()
    }

    /// Largest `ω ∈ (1/e)N ∩ [1, β_K]` with `R_0 ∈ (N^ω δ_0, N^{ω+1} δ_J)`
    /// and `R_j ∈ (N^{ω−1} δ_0, N^ω δ_J)`; `NotAdmissible` below 1.
    pub fn error_gauge(&self) -> Result<Q> {
        let m = self.base.m();
        let beta = qi(self.base.beta());
        let mut w = vec![qi(0); self.vars.len()];
        w[0] = qi(1);
        w[m + 1] = Q::new(1, self.e as i64);
        let mut omega = beta;
        for (i, rj) in self.corrections.iter().enumerate() {
            if rj.is_zero() {
                continue;
            }
            let has_delta_free = rj.terms().any(|(x, _)| (0..=m).all(|j| x[j] == 0));
            if has_delta_free {
                return Err(Error::NotAdmissible("correction not in the ideal (δ)".into()));
            }
            let v = rj.gauss_valuation_with(&w).finite().unwrap_or(beta + qi(1));
            let is_zero_gen = self.leading[i].0 == 0;
            let om = if is_zero_gen { v - qi(1) } else { v };
            omega = omega.min(om);
        }
        let e = self.e as i64;
        let omega = Q::new(floor_q(omega * qi(e)), e).min(beta);
        if omega < qi(1) {
            return Err(Error::NotAdmissible(format!("{}", omega)));
        }
        Ok(omega)
    }

    /// Standard monomial exponent bounds `(e, p^{r_j}, …)` per generator.
    pub fn basis_bounds(&self) -> Vec<(usize, u32)> {
        self.leading.clone()
    }

    /// Reduces a polynomial in the `u`-variables (δ-free) modulo the
    /// generators `p_j` to the standard monomial basis.
    pub fn reduce(&self, h: &GaussPoly) -> Result<GaussPoly> {
        let m = self.base.m();
        let mut cur = h.with_vars(&self.vars)?.with_truncation(None)?;
        let cap = 64 * (self.base.cap() as usize + 4);
        for _ in 0..cap {
            let bad = cur.terms().find_map(|(x, c)| {
                self.leading.iter().enumerate().find_map(|(i, (g, d))| {
                    if x[m + 1 + g] as u32 >= *d {
                        Some((x.clone(), c.clone(), i))
                    } else {
                        None
                    }
                })
            });
            let Some((x, c, i)) = bad else { return Ok(cur) };
            let (g, d) = self.leading[i];
            let mut rest = x.clone();
            rest[m + 1 + g] -= d as u16;
            let mut mono = GaussPoly::zero(&self.base, &self.vars, None)?;
            mono.add_term(rest, c);
            // x^lead·rest·c = rest·c·(lead − p_i) + rest·c·p_i
            cur = cur.sub(&mono.mul(&self.generators[i])?)?;
        }
        Err(shape_error("reduction did not terminate at the working precision"))
    }
}

// ---------------------------------------------------------------------------
// Component counting.
// ---------------------------------------------------------------------------

/// Components of `{u : |p_0(u)| ≤ θ^{a'}}` for a single relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentCount {
    pub count: usize,
    /// Log-radius (in `v_K` units) of each component's disc.
    pub radii: Vec<Q>,
    /// Index of a root representing each component.
    pub centers: Vec<usize>,
}

/// Counts the geometric components of the single-relation space at level
/// `a` (shifted to `a + 1` in log mode), using the roots of `p_0` in `l`:
/// around each root `ϖ_γ` the component is the disc `v(u − ϖ_γ) ≥ ρ_γ`,
/// `ρ_γ = max_{i≥1} (a' − v(c_i))/i` for `p_0(ϖ_γ + X) = Σ c_i X^i`.
pub fn count_components_single_relation(p0: &Poly, l: &Field, a: Q, log: bool) -> Result<ComponentCount> {
    let d = p0.degree().ok_or(Error::ZeroPolynomial)?;
    if d == 0 || d > 7 || !p0.is_monic() {
        return Err(Error::UnsupportedRelationShape(format!("degree {} relation (monic, 1..=7 expected)", d)));
    }
    let k = p0.field();
    let e_lk = qi(l.e_over(k).ok_or_else(|| Error::FieldMismatch("relation field below the root field".into()))?);
    let ap = if log { a + qi(1) } else { a };
    let rs = root_difference_table(p0, l)?;
    let fl = p0.coerce(l)?;
    let n = rs.roots.len();
    let mut rho = Vec::with_capacity(n);
    for r in &rs.roots {
        let sh = fl.shift(r);
        let mut best: Option<Q> = None;
        for i in 1..=d {
            if let Some(v) = sh.coeff(i).valuation().finite() {
                let cand = (ap - v / e_lk) / qi(i as i64);
                best = Some(best.map_or(cand, |b: Q| b.max(cand)));
            }
        }
        rho.push(best.ok_or(Error::ZeroPolynomial)?);
    }
    let mut comp: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let same = match rs.diff[i][j] {
                Valuation::Infinite => true,
                Valuation::Finite(v) => v / e_lk >= rho[i],
            };
            if same {
                comp[i] = comp[j];
                break;
            }
        }
    }
    let mut centers: Vec<usize> = comp.clone();
    centers.sort();
    centers.dedup();
    Ok(ComponentCount { count: centers.len(), radii: centers.iter().map(|&c| rho[c]).collect(), centers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription, TowerStep};

    fn k_twisted() -> Field {
        make_field(&FieldDescription::qp(3, 20).with_step(TowerStep::Transcendentals(1)).eisenstein_ints("s", &[-3, 0, 1]))
            .unwrap()
    }

    #[test]
    fn psi_of_one_and_pi_powers() {
        let k = k_twisted();
        let one = psi(&Elem::one(&k), 1, 6).unwrap();
        assert!(one.is_constant() && one.constant_term().is_one());
        let pi2 = psi(&k.pi().pow(2).unwrap(), 1, 6).unwrap();
        let vars = delta_vars(1);
        let d0 = GaussPoly::var(&k, &vars, Some(6), "d0").unwrap();
        let expect = d0.add_const(&k.pi()).pow(2).unwrap();
        assert!(pi2.sub(&expect).unwrap().is_zero());
    }

    #[test]
    fn psi_of_the_p_basis_element() {
        let k = k_twisted();
        let t = Elem::t(&k, 0);
        let g = psi(&t, 1, 6).unwrap();
        let vars = delta_vars(1);
        let expect = GaussPoly::var(&k, &vars, Some(6), "d1").unwrap().add_const(&t);
        assert!(g.sub(&expect).unwrap().is_zero());
    }

    #[test]
    fn decomposition_reassembles() {
        let k = k_twisted();
        let t = Elem::t(&k, 0);
        let h = t.pow(5).unwrap().add(&k.pi().mul(&t.add(&Elem::from_int(&k, 2))).inv().unwrap().pow(0).unwrap());
        let h = h.add(&k.pi().mul(&t.pow(2).unwrap()));
        let dec = decompose(&h, 1).unwrap();
        assert!(dec.reassemble().unwrap().approx_eq(&h));
        assert!(dec.terms.iter().all(|t| t.e[0] < 3));
    }

    #[test]
    fn standard_presentation_has_full_gauge() {
        let desc = FieldDescription::qp(3, 20).eisenstein_ints("s", &[-3, 0, 1]).eisenstein_ints("z", &[-3, 0, 1]);
        // z^2 = 3 over Q_3(√3): constant term −3 = −π² is not Eisenstein
        assert!(make_field(&desc).is_err());
        let l = make_field(&FieldDescription::qp(3, 20).eisenstein_ints("s", &[-3, 0, 1]).eisenstein_text("z", "z^2 - s"))
            .unwrap();
        let pres = ThickeningPresentation::standard(&l, 6).unwrap();
        assert_eq!(pres.error_gauge().unwrap(), qi(2));
    }
}
