//! Differential modules over polydiscs: derivation matrices, spectral
//! valuations and intrinsic radii, modules attached to coverings, break
//! extraction, and the tame / Frobenius / generic `p`-th root / `K_*`
//! rotation pullbacks.
//!
//! All radii are log-radii in the valuation units of the module's field:
//! a weight `s_j` means `|δ_j| = θ^{s_j}`, and an intrinsic radius is
//! reported through its exponent `−log_θ IR_j ≥ 0`.
//!
//! Two routes compute `v(|∂_j|_{sp,V})`:
//!
//! * the matrix route iterates `D_{n+1} = ∂_j D_n + D_n N_j` on the
//!   derivation matrices and reads the asymptotic slope of
//!   `n ↦ v_s(D_n)` off a lower convex hull;
//! * the covering route, for modules pushed forward from a covering
//!   `Q(δ, u) = 0`, expands the root `u` as a Taylor series
//!   `u(x + h) = Σ a_n h^n` around a residually generic rigid point `x`
//!   with `|x_j| = θ^{s_j}` and uses `D_n = n!·a_n`. The point lives in
//!   `K'`, the base change of `K` to an unramified constant field of residue size ≥ 32,
//!   with an extra root of `π_K` when `s` has a denominator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::gauss::{Exps, GaussPoly, VarSet};
use crate::newton::NewtonPolygon;
use crate::poly::Poly;
use crate::residue::teichmuller_lift;
use crate::thickening::ThickeningPresentation;
use crate::valuation::{nearest_with_den, qi, snap, vp_factorial, Valuation, Q};

/// A `d × d` matrix of polynomial (or truncated series) entries.
pub type Matrix = Vec<Vec<GaussPoly>>;

/// Knobs for spectral iterations and break searches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralConfig {
    /// Number of iterates; `None` means the smallest power of `p` that is
    /// at least `4·d` (Taylor valuations of algebraic functions touch
    /// their asymptote at `p`-power indices, so the last hull segment is
    /// then reliable).
    pub n_max: Option<usize>,
    /// Denominator bound for snapped spectral slopes.
    pub snap_den: i64,
    /// Largest admissible width of the raw slope window.
    pub snap_tolerance: Q,
    /// Denominator bound for breaks; `None` means `e·p²`.
    pub break_den: Option<i64>,
    /// Residue degree of the point field of the covering route; `None`
    /// means the smallest `f` with `p^f ≥ 32`.
    pub point_degree: Option<usize>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            n_max: None,
            snap_den: 64,
            snap_tolerance: Q::new(1, 2),
            break_den: None,
            point_degree: None,
        }
    }
}

impl SpectralConfig {
    pub fn n_max_for(&self, rank: usize, p: u64) -> usize {
        self.n_max.unwrap_or_else(|| {
            let target = 4 * rank.max(1);
            let mut n = p as usize;
            while n < target {
                n *= p as usize;
            }
            n
        })
    }

    pub fn point_degree_for(&self, p: u64) -> usize {
        self.point_degree.unwrap_or_else(|| {
            let (mut f, mut q) = (1usize, p);
            while q < 32 {
                f += 1;
                q *= p;
            }
            f.max(2)
        })
    }
}

// ---------------------------------------------------------------------------
// Coverings.
// ---------------------------------------------------------------------------

/// A finite étale covering `Q(δ, u) = Σ_l q_l(δ) u^l = 0`, monic in `u`.
#[derive(Clone, Debug)]
pub struct Covering {
    field: Field,
    vars: Arc<VarSet>,
    coeffs: Vec<GaussPoly>,
}

impl Covering {
    /// `coeffs[l]` is the coefficient of `u^l`; the last one must be 1.
    pub fn new(field: &Field, vars: &Arc<VarSet>, coeffs: Vec<GaussPoly>) -> Result<Covering> {
        let last = coeffs.last().ok_or(Error::ZeroPolynomial)?;
        if coeffs.len() < 2 || !last.is_constant() || !last.constant_term().is_one() {
            return Err(Error::UnsupportedRelationShape("covering relation must be monic of degree ≥ 1".into()));
        }
        let coeffs = coeffs.iter().map(|c| c.with_vars(vars)).collect::<Result<Vec<_>>>()?;
        Ok(Covering { field: field.clone(), vars: vars.clone(), coeffs })
    }

    /// The covering `ψ(p_0)(u) + R_0 = 0` of a single-generator
    /// presentation.
    pub fn from_presentation(pres: &ThickeningPresentation) -> Result<Covering> {
        if pres.generators.len() != 1 || pres.leading[0].0 != 0 {
            return Err(Error::UnsupportedRelationShape("covering route needs a single generator u0".into()));
        }
        let m = pres.base.m();
        let rel = pres.relations()?.remove(0);
        let u0 = m + 1;
        let dvars = crate::thickening::delta_vars(m);
        let mut coeffs = Vec::new();
        for c in rel.collect_in(u0) {
            let mut g = GaussPoly::zero(&pres.base, &dvars, c.truncation())?;
            for (e, x) in c.terms() {
                if e[m + 1..].iter().any(|k| *k > 0) {
                    return Err(Error::UnsupportedRelationShape("relation involves further generators".into()));
                }
                g.add_term(Exps::from_slice(&e[..=m]), x.clone());
            }
            coeffs.push(g);
        }
        Covering::new(&pres.base, &dvars, coeffs)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn coeffs(&self) -> &[GaussPoly] {
        &self.coeffs
    }

    /// Degree `d` in `u` (the rank of the pushed-forward module).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The fibre polynomial over `δ = 0`.
    pub fn fibre_at_zero(&self) -> Poly {
        Poly::new(&self.field, self.coeffs.iter().map(|c| c.constant_term()).collect())
    }

    /// Whether any coefficient depends on `δ_j`.
    pub fn depends_on(&self, j: usize) -> bool {
        self.coeffs.iter().any(|c| c.degree_in(j).is_some_and(|d| d > 0))
    }

    /// Substitutes `δ_j ↦ F_j(η)` in every coefficient.
    pub fn pullback(&self, subst: &[GaussPoly]) -> Result<Covering> {
        let binds: Vec<(&str, &GaussPoly)> = self.vars.names.iter().map(|n| n.as_str()).zip(subst.iter()).collect();
        let coeffs = self.coeffs.iter().map(|c| c.substitute(&binds)).collect::<Result<Vec<_>>>()?;
        Covering::new(subst[0].field(), subst[0].vars(), coeffs)
    }
}

// ---------------------------------------------------------------------------
// Finite algebras K[u]/(P) over a field.
// ---------------------------------------------------------------------------

/// `F[u]/(P)` for a monic `P` of degree `d`, elements as coordinate vectors
/// in `1, u, …, u^{d−1}`.
#[derive(Clone, Debug)]
struct Algebra {
    field: Field,
    /// Non-leading coefficients `c_0..c_{d−1}` of `P`.
    modulus: Vec<Elem>,
}

impl Algebra {
    fn new(field: &Field, monic: &[Elem]) -> Algebra {
        let d = monic.len() - 1;
        Algebra { field: field.clone(), modulus: monic[..d].to_vec() }
    }

    fn d(&self) -> usize {
        self.modulus.len()
    }

    fn zero(&self) -> Vec<Elem> {
        vec![Elem::zero(&self.field); self.d()]
    }

    fn reduce(&self, mut r: Vec<Elem>) -> Vec<Elem> {
        let d = self.d();
        for k in (d..r.len()).rev() {
            let c = r[k].clone();
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                r[k - d + i] = r[k - d + i].sub(&c.mul(&self.modulus[i]));
            }
        }
        r.truncate(d);
        while r.len() < d {
            r.push(Elem::zero(&self.field));
        }
        r
    }

    /// The class of `u^k`.
    fn u_pow(&self, k: usize) -> Vec<Elem> {
        let mut r = vec![Elem::zero(&self.field); k + 1];
        r[k] = Elem::one(&self.field);
        self.reduce(r)
    }

    fn add(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
    }

    fn scale(&self, a: &[Elem], c: &Elem) -> Vec<Elem> {
        a.iter().map(|x| x.mul(c)).collect()
    }

    fn mul(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        let d = self.d();
        let mut r = vec![Elem::zero(&self.field); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    r[i + j] = r[i + j].add(&x.mul(y));
                }
            }
        }
        self.reduce(r)
    }

    /// Matrix of multiplication by `a`: column `i` holds `a·u^i`.
    fn mult_matrix(&self, a: &[Elem]) -> Vec<Vec<Elem>> {
        let d = self.d();
        let mut cols = Vec::with_capacity(d);
        let mut x = a.to_vec();
        for _ in 0..d {
            cols.push(x.clone());
            let mut shifted = vec![Elem::zero(&self.field)];
            shifted.extend(x);
            x = self.reduce(shifted);
        }
        (0..d).map(|r| (0..d).map(|c| cols[c][r].clone()).collect()).collect()
    }

    /// `v(N(a)) / d`, the valuation of `a` when the algebra is a field.
    fn valuation(&self, a: &[Elem]) -> Valuation {
        if a.iter().all(|x| x.is_zero()) {
            return Valuation::Infinite;
        }
        det(self.mult_matrix(a)).valuation().scale(Q::new(1, self.d() as i64))
    }

    fn norm_valuation(&self, a: &[Elem]) -> Valuation {
        det(self.mult_matrix(a)).valuation()
    }

    fn inv(&self, a: &[Elem]) -> Result<Vec<Elem>> {
        let mut rhs = self.zero();
        rhs[0] = Elem::one(&self.field);
        solve(self.mult_matrix(a), rhs)
    }
}

fn pivot_row(m: &[Vec<Elem>], col: usize, from: usize) -> Option<usize> {
    (from..m.len())
        .filter(|&r| !m[r][col].is_zero())
        .min_by(|&a, &b| m[a][col].valuation().cmp(&m[b][col].valuation()))
}

/// Determinant by elimination with minimal-valuation pivots.
fn det(mut m: Vec<Vec<Elem>>) -> Elem {
    let n = m.len();
    let field = m[0][0].field().clone();
    let mut acc = Elem::one(&field);
    for c in 0..n {
        let Some(r) = pivot_row(&m, c, c) else { return Elem::zero(&field) };
        if r != c {
            m.swap(r, c);
            acc = acc.neg();
        }
        let piv = m[c][c].clone();
        let pinv = match piv.inv() {
            Ok(x) => x,
            Err(_) => return Elem::zero(&field),
        };
        acc = acc.mul(&piv);
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].mul(&pinv);
            for k in c..n {
                let t = f.mul(&m[c][k]);
                m[r][k] = m[r][k].sub(&t);
            }
        }
    }
    acc
}

fn solve(mut m: Vec<Vec<Elem>>, mut rhs: Vec<Elem>) -> Result<Vec<Elem>> {
    let n = m.len();
    for c in 0..n {
        let r = pivot_row(&m, c, c).ok_or_else(|| Error::JacobianSingular)?;
        m.swap(r, c);
        rhs.swap(r, c);
        let pinv = m[c][c].inv()?;
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].mul(&pinv);
            for k in c..n {
                let t = f.mul(&m[c][k]);
                m[r][k] = m[r][k].sub(&t);
            }
            let t = f.mul(&rhs[c]);
            rhs[r] = rhs[r].sub(&t);
        }
    }
    (0..n).map(|c| rhs[c].div(&m[c][c])).collect()
}

// ---------------------------------------------------------------------------
// Point fields.
// ---------------------------------------------------------------------------

/// `K' = K ⊗ W(F_{p^f})`, with `ϖ'^{den} = π_K` adjoined when `den > 1`,
/// together with Teichmüller points generating `F_{p^f}`.
#[derive(Clone, Debug)]
pub struct PointField {
    pub base: Field,
    pub field: Field,
    pub den: i64,
    /// Pairs (level of `K`, matching level of the unramified base change).
    levels: Vec<(Field, Field)>,
}

fn unramified_modulus(p: u64, deg: usize, m: usize, digits: u32, requested: u32) -> Result<(Vec<i64>, Field)> {
    for pos in 1..deg {
        for a in 1..p as i64 {
            for b in 1..p as i64 {
                let mut c = vec![0i64; deg + 1];
                c[0] = b;
                c[pos] = a;
                c[deg] = 1;
                match Field::base(p, m, Some(&c), digits, requested) {
                    Ok(f) => return Ok((c, f)),
                    Err(Error::ReducibleUnramifiedStep) => continue,
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Err(Error::Unsupported(format!("no trinomial of degree {} is irreducible mod {}", deg, p)))
}

/// Re-expresses an element of a level of `K` at the matching level of the
/// unramified base change (bodies spread by the residue degree).
fn spread(x: &Elem, target: &Field) -> Elem {
    let f = target.f();
    let body = x.body_raw();
    let mut out: crate::field::Body = smallvec::smallvec![crate::scalar::Scalar::ZERO; body.len() * f];
    for (i, s) in body.iter().enumerate() {
        out[i * f] = s.clone();
    }
    Elem::from_parts(target, x.val_raw(), x.prec_raw(), out)
}

impl PointField {
    pub fn new(k: &Field, den: i64, degree: usize) -> Result<PointField> {
        if k.f() != 1 {
            return Err(Error::Unsupported("rigid points over a base with residue degree > 1".into()));
        }
        if den < 1 {
            return Err(Error::ParameterOutOfRange(format!("denominator {}", den)));
        }
        let mut chain = vec![k.clone()];
        while let Some(par) = chain.last().unwrap().parent().cloned() {
            chain.push(par);
        }
        chain.reverse();
        let base = &chain[0];
        let (_, w) = unramified_modulus(k.p(), degree, k.m(), k.zmod().digits(), base.0.requested)?;
        let mut levels = vec![(base.clone(), w)];
        for lvl in &chain[1..] {
            let parent2 = levels.last().unwrap().1.clone();
            let coeffs: Vec<Elem> = lvl.eisenstein_coeffs().unwrap().iter().map(|c| spread(c, &parent2)).collect();
            let name = lvl.uniformizer_names().last().cloned().unwrap_or_default();
            let next = parent2.adjoin_root(&coeffs, &name)?;
            levels.push((lvl.clone(), next));
        }
        let top = levels.last().unwrap().1.clone();
        let field = if den > 1 {
            let mut c = vec![Elem::zero(&top); den as usize];
            c[0] = top.pi().neg();
            top.adjoin_root(&c, "pt")?
        } else {
            top
        };
        Ok(PointField { base: k.clone(), field, den, levels })
    }

    /// Maps an element of `K` (or of a level below it) into `K'`.
    pub fn embed(&self, x: &Elem) -> Result<Elem> {
        let (_, lvl2) = self
            .levels
            .iter()
            .find(|(l, _)| l == x.field())
            .ok_or_else(|| Error::FieldMismatch("element is not from the base tower".into()))?;
        self.field.coerce(&spread(x, lvl2))
    }

    /// The Teichmüller lift of `w̄ + k`, a generator of the residue field.
    pub fn generic_unit(&self, k: i64) -> Result<Elem> {
        let w0 = &self.levels[0].1;
        let w = w0.constant("w").ok_or_else(|| Error::Unsupported("point field needs residue degree ≥ 2".into()))?;
        let r = w.add(&Elem::from_int(w0, k as i128)).residue()?;
        self.field.coerce(&teichmuller_lift(&r))
    }

    /// `ϖ'^{s·den}·[w̄ + k]`, a point of absolute value `θ^s` (in `K` units).
    pub fn point(&self, s: Q, k: i64) -> Result<Elem> {
        let e = s * qi(self.den);
        if !e.is_integer() {
            return Err(Error::ParameterOutOfRange(format!("radius {} needs a denominator dividing {}", s, self.den)));
        }
        Ok(self.field.pi().pow(e.to_integer())?.mul(&self.generic_unit(k)?))
    }

    /// `e(K'/K)`.
    pub fn scale(&self) -> i64 {
        self.den
    }
}

// ---------------------------------------------------------------------------
// Differential modules.
// ---------------------------------------------------------------------------

/// How a spectral valuation was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Matrix,
    Covering,
}

/// A rank-`d` module on a polydisc with derivation matrices: row `i` of
/// `N_j` lists `∂_j(e_i)` in the basis `e_0..e_{d−1}`.
#[derive(Clone, Debug)]
pub struct DifferentialModule {
    field: Field,
    vars: Arc<VarSet>,
    radii: Vec<Q>,
    matrices: Vec<Matrix>,
    labels: Vec<String>,
    covering: Option<Covering>,
}

fn check_square(m: &Matrix, d: usize) -> Result<()> {
    if m.len() != d || m.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidSpec(format!("derivation matrix is not {}×{}", d, d)));
    }
    Ok(())
}

fn zero_matrix(field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>, d: usize) -> Result<Matrix> {
    let z = GaussPoly::zero(field, vars, trunc)?;
    Ok(vec![vec![z; d]; d])
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let d = a.len();
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = Vec::with_capacity(d);
        for j in 0..d {
            let mut acc = a[i][0].mul(&b[0][j])?;
            for k in 1..d {
                acc = acc.add(&a[i][k].mul(&b[k][j])?)?;
            }
            row.push(acc);
        }
        out.push(row);
    }
    Ok(out)
}

fn mat_add(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.add(y)).collect()).collect()
}

fn mat_sub(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.sub(y)).collect()).collect()
}

fn mat_deriv(a: &Matrix, j: usize) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| x.derivative(j)).collect()).collect()
}

fn mat_scale(a: &Matrix, g: &GaussPoly) -> Result<Matrix> {
    a.iter().map(|r| r.iter().map(|x| x.mul(g)).collect()).collect()
}

impl DifferentialModule {
    pub fn new(field: &Field, vars: &Arc<VarSet>, radii: Vec<Q>, matrices: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        if matrices.len() != vars.len() || radii.len() != vars.len() {
            return Err(Error::InvalidSpec("one matrix and one radius per variable".into()));
        }
        let d = labels.len();
        if d == 0 {
            return Err(Error::InvalidSpec("rank 0 module".into()));
        }
        for m in &matrices {
            check_square(m, d)?;
        }
        let matrices = matrices
            .into_iter()
            .map(|m| m.into_iter().map(|r| r.into_iter().map(|x| x.with_vars(vars)).collect()).collect())
            .collect::<Result<Vec<Matrix>>>()?;
        Ok(DifferentialModule { field: field.clone(), vars: vars.clone(), radii, matrices, labels, covering: None })
    }

    /// `O^d` with the trivial connection.
    pub fn trivial(field: &Field, vars: &Arc<VarSet>, radii: Vec<Q>, rank: usize) -> Result<Self> {
        let mats = (0..vars.len()).map(|_| zero_matrix(field, vars, None, rank)).collect::<Result<Vec<_>>>()?;
        let labels = (0..rank).map(|i| format!("e{}", i)).collect();
        DifferentialModule::new(field, vars, radii, mats, labels)
    }

    /// Rank one with `∂_j e = N_j e`.
    pub fn rank_one(field: &Field, vars: &Arc<VarSet>, radii: Vec<Q>, n: Vec<GaussPoly>) -> Result<Self> {
        let mats = n.into_iter().map(|g| vec![vec![g]]).collect();
        DifferentialModule::new(field, vars, radii, mats, vec!["e".into()])
    }

    /// The same module declared on the polydisc with the given radii.
    pub fn with_radii(&self, radii: Vec<Q>) -> Result<Self> {
        if radii.len() != self.directions() {
            return Err(Error::InvalidSpec("one radius per variable".into()));
        }
        Ok(DifferentialModule { radii, ..self.clone() })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn radii(&self) -> &[Q] {
        &self.radii
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn directions(&self) -> usize {
        self.vars.len()
    }

    pub fn matrix(&self, j: usize) -> &Matrix {
        &self.matrices[j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn covering(&self) -> Option<&Covering> {
        self.covering.as_ref()
    }

    /// Smallest truncation order among the entries (`None` if exact).
    pub fn truncation(&self) -> Option<u32> {
        self.matrices.iter().flatten().flatten().filter_map(|g| g.truncation()).min()
    }

    /// Curvature `∂_iN_j − ∂_jN_i + N_jN_i − N_iN_j` for every pair
    /// `i < j`, with terms beyond the reliable degree discarded.
    pub fn integrability_residuals(&self) -> Result<Vec<(usize, usize, Matrix)>> {
        let mut out = Vec::new();
        let keep = self.truncation().map(|t| t.saturating_sub(1));
        for i in 0..self.directions() {
            for j in i + 1..self.directions() {
                let (ni, nj) = (&self.matrices[i], &self.matrices[j]);
                let a = mat_sub(&mat_deriv(nj, i), &mat_deriv(ni, j))?;
                let b = mat_sub(&mat_mul(nj, ni)?, &mat_mul(ni, nj)?)?;
                let mut r = mat_add(&a, &b)?;
                if let Some(k) = keep {
                    r = r
                        .into_iter()
                        .map(|row| row.into_iter().map(|x| x.filter_terms(|e, _| e.iter().map(|v| *v as u32).sum::<u32>() <= k)).collect())
                        .collect();
                }
                out.push((i, j, r));
            }
        }
        Ok(out)
    }

    pub fn is_integrable(&self) -> Result<bool> {
        Ok(self.integrability_residuals()?.iter().all(|(_, _, r)| r.iter().flatten().all(|x| x.is_zero())))
    }

    /// Text dump: metadata lines followed by one block per direction.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("rank = {}\n", self.rank()));
        let radii: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
        s.push_str(&format!("radii = [{}]\n", radii.join(", ")));
        s.push_str(&format!(
            "truncation = {}\n",
            self.truncation().map(|t| t.to_string()).unwrap_or_else(|| "none".into())
        ));
        s.push_str(&format!("basis = [{}]\n", self.labels.join(", ")));
        for (j, m) in self.matrices.iter().enumerate() {
            s.push_str(&format!("[N_{}]  # d/d{}\n", j, self.vars.names[j]));
            for row in m {
                let cells: Vec<String> = row.iter().map(|x| x.to_text()).collect();
                s.push_str(&cells.join(" ; "));
                s.push('\n');
            }
        }
        s
    }
}

/// The module pushed forward from a single-generator presentation: basis
/// `1, u, …, u^{d−1}` and `∂_j u = −(∂_jQ)/(∂_uQ)`, expanded as truncated
/// power series in `δ`. The covering is kept for the covering route.
pub fn from_covering(pres: &ThickeningPresentation) -> Result<DifferentialModule> {
    let cov = Covering::from_presentation(pres)?;
    let radii = vec![qi(1); cov.vars.len()];
    module_of_covering(&cov, pres.trunc, radii)
}

/// The module of a covering, matrices truncated at total degree `trunc`.
pub fn module_of_covering(cov: &Covering, trunc: u32, radii: Vec<Q>) -> Result<DifferentialModule> {
    let k = &cov.field;
    let vars = &cov.vars;
    let tr = Some(trunc);
    let d = cov.degree();
    let q: Vec<GaussPoly> = cov.coeffs.iter().map(|c| c.with_truncation(tr)).collect::<Result<_>>()?;
    let zero = GaussPoly::zero(k, vars, tr)?;
    // series algebra A[[δ]] = K[[δ]][u]/(Q)
    let smul = |a: &[GaussPoly], b: &[GaussPoly]| -> Result<Vec<GaussPoly>> {
        let mut r = vec![zero.clone(); 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    r[i + j] = r[i + j].add(&x.mul(y)?)?;
                }
            }
        }
        for kk in (d..r.len()).rev() {
            let c = r[kk].clone();
            if c.is_zero() {
                continue;
            }
            for i in 0..d {
                r[kk - d + i] = r[kk - d + i].sub(&c.mul(&q[i])?)?;
            }
        }
        r.truncate(d);
        Ok(r)
    };
    // R = ∂_u Q and its inverse
    let r_ser: Vec<GaussPoly> = (0..d).map(|l| q[l + 1].scale(&Elem::from_int(k, (l + 1) as i128))).collect();
    let alg0 = Algebra::new(k, &q.iter().map(|c| c.constant_term()).collect::<Vec<_>>());
    let r0: Vec<Elem> = r_ser.iter().map(|c| c.constant_term()).collect();
    let r0inv = alg0
        .inv(&r0)
        .map_err(|_| Error::JacobianSingular)?;
    let r0inv_ser: Vec<GaussPoly> =
        r0inv.iter().map(|c| GaussPoly::constant(k, vars, tr, c.clone())).collect::<Result<_>>()?;
    // R·R0^{-1} = 1 − E with E ∈ (δ) in A[[δ]] (the relation itself
    // depends on δ), so R^{-1} = R0^{-1}·Σ_k E^k
    let one = GaussPoly::constant(k, vars, tr, Elem::one(k))?;
    let mut step: Vec<GaussPoly> = smul(&r_ser, &r0inv_ser)?.into_iter().map(|g| g.neg()).collect();
    step[0] = step[0].add(&one)?;
    let mut term = r0inv_ser.clone();
    let mut rinv = r0inv_ser.clone();
    for _ in 0..trunc {
        term = smul(&step, &term)?;
        if term.iter().all(|g| g.is_zero()) {
            break;
        }
        rinv = rinv.iter().zip(&term).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
    }
    let mut mats = Vec::with_capacity(vars.len());
    let mut upow = vec![vec![zero.clone(); d]];
    upow[0][0] = GaussPoly::constant(k, vars, tr, Elem::one(k))?;
    for kk in 1..d {
        let mut x = vec![zero.clone(); d];
        x[kk] = GaussPoly::constant(k, vars, tr, Elem::one(k))?;
        upow.push(x);
    }
    for j in 0..vars.len() {
        let dq: Vec<GaussPoly> = (0..d).map(|l| q[l].derivative(j)).collect();
        let du: Vec<GaussPoly> = smul(&dq, &rinv)?.into_iter().map(|g| g.neg()).collect();
        let mut m = zero_matrix(k, vars, tr, d)?;
        for kk in 1..d {
            let row = smul(&upow[kk - 1], &du)?;
            m[kk] = row.into_iter().map(|g| g.scale(&Elem::from_int(k, kk as i128))).collect();
        }
        mats.push(m);
    }
    let labels = (0..d).map(|i| if i == 0 { "1".to_string() } else { format!("u^{}", i) }).collect();
    let mut module = DifferentialModule::new(k, vars, radii, mats, labels)?;
    module.covering = Some(cov.clone());
    Ok(module)
}

// ---------------------------------------------------------------------------
// Spectral valuations.
// ---------------------------------------------------------------------------

/// One spectral estimate for `∂_j` at weights `s`.
#[derive(Clone, Debug)]
pub struct SpectralEstimate {
    pub direction: usize,
    pub weights: Vec<Q>,
    pub route: Route,
    /// `(n, v_s(D_n))`.
    pub points: Vec<(usize, Valuation)>,
    /// Raw hull-slope window `[lower, upper]`; `None` if the iterates
    /// vanish.
    pub window: Option<(Q, Q)>,
    /// Snapped slope (absent when it is irrelevant or the iterates vanish).
    pub slope: Option<Q>,
    /// `v(|∂_j|_{sp,F}) = β/(p−1) − s_j`.
    pub v_f: Q,
    /// `v(|∂_j|_{sp,V}) = min(v_F, slope)`.
    pub v_sp: Q,
    /// `−log_θ IR_j = v_F − v_sp ≥ 0`.
    pub ir_exponent: Q,
    /// Covering route: whether the fibre discriminant at the point has the
    /// valuation it has at the centre.
    pub etale: Option<bool>,
    /// Covering route: `v(disc_0) − v(disc_x)`.
    pub disc_gap: Option<Q>,
}

impl SpectralEstimate {
    pub fn intrinsic_radius_is_one(&self) -> bool {
        self.ir_exponent == qi(0)
    }
}

/// Window of the asymptotic slope of `n ↦ v_n`: the last hull slope and
/// the hull slope over the midpoint of the range.
fn slope_window(points: &[(usize, Valuation)]) -> Result<Option<(Q, Q)>> {
    let n_max = points.iter().map(|p| p.0).max().unwrap_or(0);
    let fin: Vec<(usize, Q)> = points.iter().filter(|p| p.0 >= 1).filter_map(|(n, v)| v.finite().map(|x| (*n, x))).collect();
    if fin.len() < 2 || fin.iter().all(|p| 2 * p.0 < n_max) {
        return Ok(None);
    }
    let np = NewtonPolygon::from_points(&fin)?;
    let hi = np.slopes.last().map(|s| s.0).unwrap_or(qi(0));
    let mid = n_max / 2;
    let mut lo = hi;
    for w in np.vertices.windows(2) {
        if w[1].0 > mid {
            lo = (w[1].1 - w[0].1) / qi((w[1].0 - w[0].0) as i64);
            break;
        }
    }
    Ok(Some((lo.min(hi), hi)))
}

fn finish_estimate(
    field: &Field,
    j: usize,
    s: &[Q],
    route: Route,
    points: Vec<(usize, Valuation)>,
    cfg: &SpectralConfig,
) -> Result<SpectralEstimate> {
    let p = field.p() as i64;
    let omega = Q::new(field.beta(), p - 1);
    let v_f = omega - s[j];
    // The Taylor coefficients D_n/n! of the horizontal sections have a
    // regular hull (no v_p(n!) staircase); since v(n!) ≈ n·β/(p−1), the
    // spectral slope of D_n is the Taylor slope shifted by β/(p−1).
    let taylor: Vec<(usize, Valuation)> = points
        .iter()
        .map(|(n, v)| (*n, *v - qi(field.beta() * vp_factorial(*n as u64, field.p()))))
        .collect();
    let window = slope_window(&taylor)?.map(|(lo, hi)| (lo + omega, hi + omega));
    let (slope, v_sp) = match window {
        None => (None, v_f),
        Some((lo, _)) if lo >= v_f => (None, v_f),
        Some((lo, hi)) => {
            if hi - lo > cfg.snap_tolerance {
                return Err(Error::NotConverged(format!("slope window [{}, {}] for direction {}", lo, hi, j)));
            }
            let x = snap(lo, hi, cfg.snap_den).unwrap_or_else(|| nearest_with_den(hi, cfg.snap_den));
            (Some(x), v_f.min(x))
        }
    };
    Ok(SpectralEstimate {
        direction: j,
        weights: s.to_vec(),
        route,
        points,
        window,
        slope,
        v_f,
        v_sp,
        ir_exponent: v_f - v_sp,
        etale: None,
        disc_gap: None,
    })
}

fn check_weights(m: &DifferentialModule, s: &[Q]) -> Result<()> {
    if s.len() != m.directions() {
        return Err(Error::ParameterOutOfRange("one weight per direction".into()));
    }
    for (j, (x, a)) in s.iter().zip(&m.radii).enumerate() {
        if x < a {
            return Err(Error::ParameterOutOfRange(format!("s_{} = {} is below the radius {}", j, x, a)));
        }
    }
    Ok(())
}

/// `v_s(D_n)` for `n = 1..n_max` from the derivation matrices.
pub fn matrix_points(m: &DifferentialModule, j: usize, s: &[Q], n_max: usize) -> Result<Vec<(usize, Valuation)>> {
    let d = m.rank();
    let trunc = m.truncation();
    let n = &m.matrices[j];
    let mut dm = zero_matrix(&m.field, &m.vars, trunc, d)?;
    for (i, row) in dm.iter_mut().enumerate() {
        row[i] = GaussPoly::constant(&m.field, &m.vars, trunc, Elem::one(&m.field))?;
    }
    // truncated entries: stop at the largest p-power the truncation
    // still determines (the hull is read up to a p-power index)
    let n_max = match trunc {
        Some(t) => {
            let cap = n_max.min(t as usize);
            let p = m.field.p() as usize;
            let mut q = 1usize;
            while q * p <= cap {
                q *= p;
            }
            if q >= 2 { q } else { cap }
        }
        None => n_max,
    };
    let mut pts = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        dm = mat_add(&mat_deriv(&dm, j), &mat_mul(&dm, n)?)?;
        let reliable = trunc.map(|t| t as i64 - k as i64);
        if reliable.is_some_and(|r| r < 0) {
            break;
        }
        let mut v = Valuation::Infinite;
        for x in dm.iter().flatten() {
            let g = match reliable {
                Some(r) => x.filter_terms(|e, _| e.iter().map(|t| *t as i64).sum::<i64>() <= r),
                None => x.clone(),
            };
            v = v.min(g.gauss_valuation_with(s));
        }
        pts.push((k, v));
    }
    Ok(pts)
}

/// Taylor data of a covering at a rigid point.
#[derive(Clone, Debug)]
pub struct CoveringPoint {
    /// `(n, v(n!·a_n))` in `K` units.
    pub points: Vec<(usize, Valuation)>,
    pub etale: bool,
    pub disc_gap: Q,
}

fn lcm_den(s: &[Q]) -> i64 {
    s.iter().fold(1i64, |acc, x| num_integer::Integer::lcm(&acc, x.denom()))
}

/// Expands the root of the covering along `δ_j` at the point
/// `x_k = ϖ'^{s_k·den}[w̄ + k]` and records `v(n!·a_n)`.
pub fn covering_points(cov: &Covering, j: usize, s: &[Q], n_max: usize, cfg: &SpectralConfig) -> Result<CoveringPoint> {
    let den = lcm_den(s);
    let pf = PointField::new(&cov.field, den, cfg.point_degree_for(cov.field.p()))?;
    let kp = pf.field.clone();
    let d = cov.degree();
    let xs: Vec<Elem> = s.iter().enumerate().map(|(k, sk)| pf.point(*sk, k as i64)).collect::<Result<_>>()?;
    // q_l(x + h e_j) as polynomials in h
    let mut qh: Vec<Poly> = Vec::with_capacity(d + 1);
    for c in &cov.coeffs {
        let mut acc = Poly::zero(&kp);
        for (e, a) in c.terms() {
            let mut coef = pf.embed(a)?;
            for (k, x) in e.iter().enumerate() {
                if k != j && *x > 0 {
                    coef = coef.mul(&xs[k].pow(*x as i64)?);
                }
            }
            let lin = Poly::new(&kp, vec![xs[j].clone(), Elem::one(&kp)]).pow(e[j] as u32);
            acc = acc.add(&lin.scale(&coef));
        }
        qh.push(acc);
    }
    let fibre: Vec<Elem> = qh.iter().map(|p| p.coeff(0)).collect();
    let alg = Algebra::new(&kp, &fibre);
    let centre: Vec<Elem> = cov.coeffs.iter().map(|c| pf.embed(&c.constant_term())).collect::<Result<_>>()?;
    let alg0 = Algebra::new(&kp, &centre);
    let deriv = |a: &Algebra, cs: &[Elem]| -> Vec<Elem> {
        let mut r = a.zero();
        for l in 1..=d {
            let t = a.scale(&a.u_pow(l - 1), &cs[l].scale_int(l as i128));
            r = a.add(&r, &t);
        }
        r
    };
    let scale = qi(pf.scale());
    let to_k = |v: Valuation| v.scale(Q::new(1, pf.scale()));
    let disc0 = alg0.norm_valuation(&deriv(&alg0, &centre));
    let r = deriv(&alg, &fibre);
    let discx = alg.norm_valuation(&r);
    let gap = match (disc0, discx) {
        (Valuation::Finite(a), Valuation::Finite(b)) => (a - b) / scale,
        _ => return Err(Error::JacobianSingular),
    };
    let etale = gap == qi(0);
    let rinv = alg.inv(&r)?;
    // Taylor recurrence
    let u = alg.u_pow(1);
    let upow: Vec<Vec<Elem>> = (0..=d).map(|l| alg.u_pow(l)).collect();
    let mut a: Vec<Vec<Elem>> = vec![u.clone()];
    // pw[l][k] = [h^k] U^l
    let mut pw: Vec<Vec<Vec<Elem>>> = (0..=d).map(|l| vec![upow[l].clone()]).collect();
    let beta_p = kp.beta();
    let p = kp.p();
    let mut pts = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut c: Vec<Vec<Elem>> = vec![alg.zero(); d + 1];
        for l in 2..=d {
            let mut acc = alg.mul(&u, &c[l - 1]);
            for k in 1..n {
                acc = alg.add(&acc, &alg.mul(&a[k], &pw[l - 1][n - k]));
            }
            c[l] = acc;
        }
        let mut sum = alg.zero();
        for l in 0..=d {
            for i in 0..=n.min(qh[l].degree().unwrap_or(0)) {
                let qi_l = qh[l].coeff(i);
                if qi_l.is_zero() {
                    continue;
                }
                let t = if i == 0 { &c[l] } else { &pw[l][n - i] };
                sum = alg.add(&sum, &alg.scale(t, &qi_l));
            }
        }
        let an: Vec<Elem> = alg.mul(&rinv, &sum).iter().map(|x| x.neg()).collect();
        for l in 0..=d {
            let next = if l == 0 {
                alg.zero()
            } else {
                let lin = alg.scale(&alg.mul(&upow[l - 1], &an), &Elem::from_int(&kp, l as i128));
                alg.add(&c[l], &lin)
            };
            pw[l].push(next);
        }
        let va = alg.valuation(&an);
        let vfact = qi(beta_p * vp_factorial(n as u64, p));
        pts.push((n, to_k(match va {
            Valuation::Finite(x) => Valuation::Finite(x + vfact),
            Valuation::Infinite => Valuation::Infinite,
        })));
        a.push(an);
    }
    Ok(CoveringPoint { points: pts, etale, disc_gap: gap })
}

/// Spectral valuation of `∂_j` at weights `s` (covering route when the
/// module carries a covering, matrix route otherwise).
pub fn spectral_valuation(m: &DifferentialModule, j: usize, s: &[Q], cfg: &SpectralConfig) -> Result<SpectralEstimate> {
    let route = if m.covering.is_some() { Route::Covering } else { Route::Matrix };
    spectral_valuation_via(m, j, s, cfg, route)
}

pub fn spectral_valuation_via(
    m: &DifferentialModule,
    j: usize,
    s: &[Q],
    cfg: &SpectralConfig,
    route: Route,
) -> Result<SpectralEstimate> {
    check_weights(m, s)?;
    if j >= m.directions() {
        return Err(Error::ParameterOutOfRange(format!("direction {}", j)));
    }
    let n_max = cfg.n_max_for(m.rank(), m.field.p());
    if n_max < m.rank() {
        return Err(Error::ParameterOutOfRange("n_max below the rank".into()));
    }
    match route {
        Route::Matrix => {
            let pts = matrix_points(m, j, s, n_max)?;
            finish_estimate(&m.field, j, s, Route::Matrix, pts, cfg)
        }
        Route::Covering => {
            let cov = m.covering.as_ref().ok_or_else(|| Error::InvalidSpec("module has no covering".into()))?;
            covering_estimate(cov, j, s, n_max, cfg)
        }
    }
}

fn covering_estimate(cov: &Covering, j: usize, s: &[Q], n_max: usize, cfg: &SpectralConfig) -> Result<SpectralEstimate> {
    if !cov.depends_on(j) {
        let mut est = finish_estimate(&cov.field, j, s, Route::Covering, Vec::new(), cfg)?;
        let cp = covering_points(cov, 0, s, 0, cfg)?;
        est.etale = Some(cp.etale);
        est.disc_gap = Some(cp.disc_gap);
        return Ok(est);
    }
    let cp = covering_points(cov, j, s, n_max, cfg)?;
    let mut est = finish_estimate(&cov.field, j, s, Route::Covering, cp.points, cfg)?;
    est.etale = Some(cp.etale);
    est.disc_gap = Some(cp.disc_gap);
    Ok(est)
}

/// Per-direction estimates at one weight vector; `IR = min_j IR_j`.
#[derive(Clone, Debug)]
pub struct RadiusReport {
    pub weights: Vec<Q>,
    pub directions: Vec<SpectralEstimate>,
    /// `−log_θ IR = max_j (−log_θ IR_j)`.
    pub ir_exponent: Q,
}

pub fn radius_report(m: &DifferentialModule, s: &[Q], cfg: &SpectralConfig) -> Result<RadiusReport> {
    let dirs = (0..m.directions()).map(|j| spectral_valuation(m, j, s, cfg)).collect::<Result<Vec<_>>>()?;
    let ir = dirs.iter().map(|e| e.ir_exponent).max().unwrap_or(qi(0));
    Ok(RadiusReport { weights: s.to_vec(), directions: dirs, ir_exponent: ir })
}

/// Reports on a grid of weight vectors.
pub fn radius_grid(m: &DifferentialModule, grid: &[Vec<Q>], cfg: &SpectralConfig) -> Result<Vec<RadiusReport>> {
    grid.iter().map(|s| radius_report(m, s, cfg)).collect()
}

// ---------------------------------------------------------------------------
// Breaks.
// ---------------------------------------------------------------------------

/// Non-logarithmic (`s_0 = ⋯ = s_m = s`) or logarithmic (`s_0 = s + 1`,
/// `s_j = s`) probing line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakMode {
    NonLog,
    Log,
}

impl BreakMode {
    pub fn weights(self, s: Q, dirs: usize) -> Vec<Q> {
        (0..dirs)
            .map(|j| if j == 0 && self == BreakMode::Log { s + qi(1) } else { s })
            .collect()
    }
}

/// One evaluation on the probing line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BreakProbe {
    pub s: Q,
    pub etale: bool,
    pub disc_gap: Q,
    /// `max_j −log_θ IR_j`.
    pub ir_exponent: Q,
}

impl BreakProbe {
    pub fn ok(&self) -> bool {
        self.etale && self.ir_exponent == qi(0)
    }
}

#[derive(Clone, Debug)]
pub struct BreakResult {
    pub mode: BreakMode,
    pub value: Q,
    pub probes: Vec<BreakProbe>,
}

/// Evaluates étaleness and the intrinsic radius at one point of the line.
pub fn probe_covering(cov: &Covering, mode: BreakMode, s: Q, cfg: &SpectralConfig) -> Result<BreakProbe> {
    let w = mode.weights(s, cov.vars.len());
    let n_max = cfg.n_max_for(cov.degree(), cov.field.p());
    let mut exp = qi(0);
    let mut etale = None;
    let mut gap = qi(0);
    for j in 0..cov.vars.len() {
        if !cov.depends_on(j) {
            continue;
        }
        let est = covering_estimate(cov, j, &w, n_max, cfg)?;
        exp = exp.max(est.ir_exponent);
        etale = est.etale;
        gap = est.disc_gap.unwrap_or(gap);
    }
    let etale = match etale {
        Some(e) => e,
        None => {
            let cp = covering_points(cov, 0, &w, 0, cfg)?;
            gap = cp.disc_gap;
            cp.etale
        }
    };
    Ok(BreakProbe { s, etale, disc_gap: gap, ir_exponent: exp })
}

/// Zero of the line through two positive samples (if it decreases).
fn crossing(a: (Q, Q), b: (Q, Q)) -> Option<Q> {
    let ((x1, y1), (x2, y2)) = if a.0 < b.0 { (a, b) } else { (b, a) };
    if y1 <= y2 || y2 <= qi(0) {
        return None;
    }
    Some(x2 + y2 * (x2 - x1) / (y1 - y2))
}

/// Smallest `s ∈ [lo, hi]` on the probing line where the covering is étale
/// and the intrinsic radius is 1: integer scan, then linear extrapolation
/// of the discriminant gap and of `−log_θ IR` (both piecewise linear in
/// `s`) with snapping to denominators `≤ e·p²`, falling back to bisection.
pub fn break_search(cov: &Covering, mode: BreakMode, range: (Q, Q), cfg: &SpectralConfig) -> Result<BreakResult> {
    let p = cov.field.p() as i64;
    let max_den = cfg.break_den.unwrap_or(cov.degree() as i64 * p * p);
    let mut probes: Vec<BreakProbe> = Vec::new();
    let mut s = qi(crate::valuation::floor_q(range.0));
    let first = probe_covering(cov, mode, s, cfg)?;
    let ok0 = first.ok();
    probes.push(first);
    if ok0 {
        return Ok(BreakResult { mode, value: s, probes });
    }
    loop {
        s += qi(1);
        if s > range.1 {
            return Err(Error::NoThresholdInRange);
        }
        let pr = probe_covering(cov, mode, s, cfg)?;
        let ok = pr.ok();
        probes.push(pr);
        if ok {
            break;
        }
    }
    let mut hi = s;
    let mut lo = s - qi(1);
    for _ in 0..10 {
        let bad: Vec<&BreakProbe> = probes.iter().filter(|b| !b.ok() && b.s >= lo - qi(1)).collect();
        let mut cand: Option<Q> = None;
        if bad.len() >= 2 {
            let (b1, b2) = (bad[bad.len() - 2], bad[bad.len() - 1]);
            let g = crossing((b1.s, b1.disc_gap), (b2.s, b2.disc_gap));
            let r = if b1.etale && b2.etale { crossing((b1.s, b1.ir_exponent), (b2.s, b2.ir_exponent)) } else { None };
            let g_pos = b2.disc_gap > qi(0);
            let r_pos = b2.etale && b2.ir_exponent > qi(0);
            cand = match (g_pos, r_pos) {
                (true, true) => g.zip(r).map(|(x, y)| x.max(y)),
                (true, false) => g,
                (false, true) => r,
                _ => None,
            };
        }
        let (next, extrapolated) = match cand {
            Some(c) if c > lo && c <= hi => {
                let mut x = nearest_with_den(c, max_den);
                if x <= lo || x > hi {
                    x = c;
                }
                (x, true)
            }
            _ => ((lo + hi) / qi(2), false),
        };
        if next == hi {
            return Ok(BreakResult { mode, value: hi, probes });
        }
        if *next.denom() > max_den {
            return Err(Error::NotConverged(format!("break candidate {} exceeds the denominator bound", next)));
        }
        let pr = probe_covering(cov, mode, next, cfg)?;
        let ok = pr.ok();
        probes.push(pr);
        probes.sort_by(|a, b| a.s.cmp(&b.s));
        if ok {
            hi = next;
            if extrapolated {
                return Ok(BreakResult { mode, value: hi, probes });
            }
        } else {
            lo = next;
        }
    }
    Err(Error::NotConverged(format!("break bracket ({}, {}] did not close", lo, hi)))
}

/// Break of the covering attached to a single-generator presentation.
pub fn break_of_presentation(pres: &ThickeningPresentation, mode: BreakMode, cfg: &SpectralConfig) -> Result<BreakResult> {
    let cov = Covering::from_presentation(pres)?;
    let hi = qi(4 * pres.base.beta() * pres.e as i64 + 4);
    break_search(&cov, mode, (qi(0), hi), cfg)
}

// ---------------------------------------------------------------------------
// Pullbacks.
// ---------------------------------------------------------------------------

/// Names `eta0..eta{k-1}` of pulled-back coordinates.
pub fn eta_vars(k: usize) -> Arc<VarSet> {
    let names: Vec<String> = (0..k).map(|j| format!("eta{}", j)).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    VarSet::new(&refs)
}

/// Pulls back along `δ_j ↦ F_j(η)`: `N'_k = Σ_j N_j(F)·∂F_j/∂η_k`.
pub fn pullback(m: &DifferentialModule, subst: &[GaussPoly], radii: Vec<Q>) -> Result<DifferentialModule> {
    if subst.len() != m.directions() {
        return Err(Error::InvalidSpec("one substitution per coordinate".into()));
    }
    let field = subst[0].field().clone();
    let vars = subst[0].vars().clone();
    let binds: Vec<(&str, &GaussPoly)> = m.vars.names.iter().map(|n| n.as_str()).zip(subst.iter()).collect();
    let subbed: Vec<Matrix> = m
        .matrices
        .iter()
        .map(|mat| mat.iter().map(|r| r.iter().map(|x| x.substitute(&binds)).collect()).collect())
        .collect::<Result<_>>()?;
    let trunc = subst.iter().filter_map(|g| g.truncation()).min();
    let mut mats = Vec::with_capacity(vars.len());
    for k in 0..vars.len() {
        let mut acc = zero_matrix(&field, &vars, trunc, m.rank())?;
        for (j, f) in subst.iter().enumerate() {
            let df = f.derivative(k);
            if df.is_zero() {
                continue;
            }
            acc = mat_add(&acc, &mat_scale(&subbed[j], &df)?)?;
        }
        mats.push(acc);
    }
    let mut out = DifferentialModule::new(&field, &vars, radii, mats, m.labels.clone())?;
    if let Some(c) = &m.covering {
        out.covering = Some(c.pullback(subst)?);
    }
    Ok(out)
}

fn identity_subst(field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>, k: usize) -> Result<GaussPoly> {
    GaussPoly::var(field, vars, trunc, &vars.names[k])
}

/// Off-centred tame base change `δ_0 ↦ (y + η_0)^n − y^n` (`x_0 = y^n`),
/// other coordinates unchanged; radius `a − b(n−1)/n` with `b = v(x_0)`.
pub fn pullback_tame(m: &DifferentialModule, n: u32, y: &Elem) -> Result<DifferentialModule> {
    let k = m.field();
    let p = k.p();
    if n == 0 || (n as u64) % p == 0 {
        return Err(Error::ParameterOutOfRange(format!("tame degree {} must be prime to p", n)));
    }
    let a = m.radii[0];
    let vy = y.valuation().finite().ok_or_else(|| Error::ParameterOutOfRange("y = 0".into()))?;
    let b = vy * qi(n as i64);
    if n > 1 && b >= a {
        return Err(Error::ParameterOutOfRange(format!("need v(x_0) = {} < a = {}", b, a)));
    }
    let vars = eta_vars(m.directions());
    let tr = m.truncation();
    let eta0 = GaussPoly::var(k, &vars, tr, "eta0")?;
    let f0 = eta0.add_const(y).pow(n)?.add_const(&y.pow(n as i64)?.neg());
    let mut subst = vec![f0];
    for j in 1..m.directions() {
        subst.push(identity_subst(k, &vars, tr, j)?);
    }
    let mut radii = m.radii.clone();
    radii[0] = a - b * qi(n as i64 - 1) / qi(n as i64);
    pullback(m, &subst, radii)
}

/// Off-centred Frobenius `δ_0 ↦ (β + η_0)^p − β^p + x` with the generic
/// point `x = π^a t_m` (`a` the module's radius, `t_m` the last
/// transcendental of the field), onto the disc of radius `b`.
pub fn pullback_frobenius(m: &DifferentialModule, beta: &Elem, b: Q) -> Result<DifferentialModule> {
    let k = m.field();
    let p = k.p() as i64;
    let a = m.radii[0];
    if k.m() == 0 {
        return Err(Error::ParameterOutOfRange("Frobenius pullback needs a transcendental for the generic point".into()));
    }
    if !a.is_integer() || a <= qi(0) || b <= qi(0) {
        return Err(Error::ParameterOutOfRange(format!("need integral a > 0 and b > 0 (a = {}, b = {})", a, b)));
    }
    if a >= (qi(k.beta()) + b).min(qi(p) * b) {
        return Err(Error::ParameterOutOfRange(format!("need a < min(β + b, p·b) (a = {}, b = {})", a, b)));
    }
    if beta.valuation() != Valuation::int(0) {
        return Err(Error::ParameterOutOfRange("β must be a unit".into()));
    }
    let x = k.pi().pow(a.to_integer())?.mul(&Elem::t(k, k.m() - 1));
    let vars = eta_vars(m.directions());
    let tr = m.truncation();
    let eta0 = GaussPoly::var(k, &vars, tr, "eta0")?;
    let f0 = eta0.add_const(beta).pow(p as u32)?.add_const(&beta.pow(p)?.neg()).add_const(&x);
    let mut subst = vec![f0];
    for j in 1..m.directions() {
        subst.push(identity_subst(k, &vars, tr, j)?);
    }
    let mut radii = m.radii.clone();
    radii[0] = b;
    pullback(m, &subst, radii)
}

/// Adding a generic `p`-th root of `b_{j_0} = β^p − xπ^n`:
/// `δ_{j_0} ↦ (β + η_{j_0})^p − (x + η_{m+1})(π + η_0)^n − b_{j_0}`, the
/// other `δ_j ↦ η_j`, and a new coordinate `η_{m+1}` of radius `a`.
pub fn pullback_generic_pth_root(m: &DifferentialModule, j0: usize, n: u32, beta: &Elem, x: &Elem) -> Result<DifferentialModule> {
    let k = m.field();
    let p = k.p();
    if j0 == 0 || j0 >= m.directions() {
        return Err(Error::ParameterOutOfRange(format!("j0 = {} must index a p-basis direction", j0)));
    }
    if n == 0 || (n as u64) % p == 0 {
        return Err(Error::ParameterOutOfRange(format!("n = {} must be prime to p", n)));
    }
    if m.radii.iter().any(|a| *a <= qi(1)) {
        return Err(Error::ParameterOutOfRange("generic p-th root pullback needs radii a > 1".into()));
    }
    let dirs = m.directions() + 1;
    let vars = eta_vars(dirs);
    let tr = m.truncation();
    let pi = k.pi();
    let b = beta.pow(p as i64)?.sub(&x.mul(&pi.pow(n as i64)?));
    let mut subst = Vec::with_capacity(m.directions());
    for j in 0..m.directions() {
        if j == j0 {
            let ej = GaussPoly::var(k, &vars, tr, &format!("eta{}", j0))?;
            let em = GaussPoly::var(k, &vars, tr, &format!("eta{}", dirs - 1))?;
            let e0 = GaussPoly::var(k, &vars, tr, "eta0")?;
            let lhs = ej.add_const(beta).pow(p as u32)?;
            let rhs = em.add_const(x).mul(&e0.add_const(&pi).pow(n)?)?;
            subst.push(lhs.sub(&rhs)?.add_const(&b.neg()));
        } else {
            subst.push(identity_subst(k, &vars, tr, j)?);
        }
    }
    let mut radii = m.radii.clone();
    radii.push(*m.radii.last().unwrap());
    pullback(m, &subst, radii)
}

/// `f_γ(η) = (ϖ_γ + η)^p / (1 − (ϖ_γ + η)^{p−1}) − π_K` as a truncated
/// series over `K_*`.
pub fn kstar_rotation_series(root: &Elem, vars: &Arc<VarSet>, trunc: u32) -> Result<GaussPoly> {
    let ks = root.field();
    let k = ks.parent().ok_or_else(|| Error::FieldMismatch("root must lie in an extension".into()))?;
    let p = ks.p() as u32;
    let tr = Some(trunc);
    let z = GaussPoly::var(ks, vars, tr, &vars.names[0])?.add_const(root);
    let num = z.pow(p)?;
    let g = GaussPoly::constant(ks, vars, tr, Elem::one(ks))?.sub(&z.pow(p - 1)?)?;
    let c0 = g.constant_term();
    let c0inv = c0.inv()?;
    // g = c0 (1 − r)
    let r = g.scale(&c0inv).neg().add_const(&Elem::one(ks));
    let mut inv = GaussPoly::constant(ks, vars, tr, Elem::one(ks))?;
    let mut term = inv.clone();
    for _ in 0..trunc {
        term = term.mul(&r)?;
        if term.is_zero() {
            break;
        }
        inv = inv.add(&term)?;
    }
    let f = num.mul(&inv.scale(&c0inv))?;
    // the constant term is π_K up to precision; drop it exactly
    let pi = ks.coerce(&k.pi())?;
    if !f.constant_term().sub(&pi).valuation().ge(&Valuation::int(ks.cap() / 2)) {
        return Err(Error::ParameterOutOfRange("root is not a root of T^p + πT^{p−1} − π".into()));
    }
    Ok(f.filter_terms(|e, _| e.iter().any(|x| *x > 0)))
}

/// The `K_*` rotation: a module on `|δ_0| ≤ θ^{a+1}`, `|δ_j| ≤ θ^{a_j}`
/// over `K` becomes a module on `|η_0| ≤ θ^{a−(p−2)/p}`, `|η_j| ≤ θ^{a_j}`
/// over `K_*` (radii converted to `K_*` units).
pub fn pullback_kstar(m: &DifferentialModule, root: &Elem, trunc: u32) -> Result<DifferentialModule> {
    let ks = root.field();
    let p = ks.p() as i64;
    let a = m.radii[0] - qi(1);
    if a <= qi(1) {
        return Err(Error::ParameterOutOfRange(format!("need a > 1 (module radius a + 1 = {})", m.radii[0])));
    }
    let e = ks.e_over(m.field()).ok_or_else(|| Error::FieldMismatch("root field is not over the module field".into()))?;
    let vars = eta_vars(m.directions());
    let f = kstar_rotation_series(root, &vars, trunc)?;
    let mut subst = vec![f];
    for j in 1..m.directions() {
        subst.push(identity_subst(ks, &vars, Some(trunc), j)?);
    }
    let mut radii: Vec<Q> = m.radii.iter().map(|r| *r * qi(e)).collect();
    radii[0] = (a - Q::new(p - 2, p)) * qi(e);
    pullback(m, &subst, radii)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};
    use crate::thickening::delta_vars;

    #[test]
    fn trivial_module_has_radius_one() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let m = DifferentialModule::trivial(&k, &delta_vars(0), vec![qi(0)], 2).unwrap();
        let est = spectral_valuation(&m, 0, &[qi(2)], &SpectralConfig::default()).unwrap();
        assert!(est.intrinsic_radius_is_one());
        assert_eq!(est.v_f, Q::new(1, 2) - qi(2));
    }

    #[test]
    fn constant_rank_one_slope_is_exact() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let vars = delta_vars(0);
        let lam = Elem::from_ratio(&k, 1, 27).unwrap();
        let n = GaussPoly::constant(&k, &vars, None, lam).unwrap();
        let m = DifferentialModule::rank_one(&k, &vars, vec![qi(0)], vec![n]).unwrap();
        let est = spectral_valuation(&m, 0, &[qi(1)], &SpectralConfig::default()).unwrap();
        assert_eq!(est.slope, Some(qi(-3)));
        assert_eq!(est.ir_exponent, Q::new(1, 2) - qi(1) + qi(3));
    }
}
