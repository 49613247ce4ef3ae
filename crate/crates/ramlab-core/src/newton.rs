//! Newton polygons, slope factorisation by Gauss-norm Hensel iteration,
//! residual splitting, root finding in a given field and tables of
//! root-difference valuations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;
use crate::residue::{teichmuller_lift, Residue};
use crate::valuation::{qi, Valuation, Q};

/// Lower convex hull of the points `(i, v(a_i))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Hull vertices, increasing in degree.
    pub vertices: Vec<(usize, Q)>,
    /// `(slope, horizontal length)`, slopes increasing.
    pub slopes: Vec<(Q, usize)>,
}

impl NewtonPolygon {
    /// Hull of an arbitrary finite point set (points with equal abscissa
    /// keep the lowest ordinate).
    pub fn from_points(points: &[(usize, Q)]) -> Result<NewtonPolygon> {
        let mut pts: Vec<(usize, Q)> = points.to_vec();
        pts.sort();
        pts.dedup_by(|b, a| a.0 == b.0);
        if pts.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        let mut hull: Vec<(usize, Q)> = Vec::new();
        for pt in pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // drop b if it lies on or above the segment a → pt
                let lhs = (b.1 - a.1) * qi((pt.0 - a.0) as i64);
                let rhs = (pt.1 - a.1) * qi((b.0 - a.0) as i64);
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        let slopes = hull.windows(2).map(|w| ((w[1].1 - w[0].1) / qi((w[1].0 - w[0].0) as i64), w[1].0 - w[0].0)).collect();
        Ok(NewtonPolygon { vertices: hull, slopes })
    }

    /// Root valuations with multiplicity, largest first (`−slope`).
    pub fn root_valuations(&self) -> Vec<(Q, usize)> {
        self.slopes.iter().map(|(s, m)| (-*s, *m)).collect()
    }

    /// Degree covered by the hull (excludes roots at zero).
    pub fn width(&self) -> usize {
        match (self.vertices.first(), self.vertices.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0,
        }
    }

    /// Ordinate of the hull at abscissa `i` (inside its range).
    pub fn value_at(&self, i: usize) -> Option<Q> {
        for w in self.vertices.windows(2) {
            if w[0].0 <= i && i <= w[1].0 {
                let t = qi((i - w[0].0) as i64);
                return Some(w[0].1 + (w[1].1 - w[0].1) * t / qi((w[1].0 - w[0].0) as i64));
            }
        }
        self.vertices.iter().find(|v| v.0 == i).map(|v| v.1)
    }
}

/// Newton polygon of a nonzero polynomial.
pub fn newton_polygon(f: &Poly) -> Result<NewtonPolygon> {
    let pts: Vec<(usize, Q)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.valuation().finite().map(|v| (i, v)))
        .collect();
    if pts.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    NewtonPolygon::from_points(&pts)
}

/// Weighted Gauss valuation `min v(a_i) + iμ`.
fn weighted(f: &Poly, mu: Q) -> Valuation {
    f.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.valuation() + mu * qi(i as i64))
        .fold(Valuation::Infinite, Valuation::min)
}

/// Iteration cap for linear Hensel iterations.
fn iteration_cap(field: &Field) -> usize {
    8 * field.cap() as usize + 64
}

/// Splits a monic `f` as `g·h` where `g` (monic, degree `k`) carries the
/// roots of valuation `> μ` and `h` those of valuation `< μ`. Requires the
/// hull of `f` to have a vertex at `k` where the slope crosses `−μ`.
fn split_at(f: &Poly, k: usize, mu: Q) -> Result<(Poly, Poly)> {
    let fld = f.field().clone();
    let d = f.degree().ok_or(Error::ZeroPolynomial)?;
    let fk = f.coeff(k);
    let fk_inv = fk.inv()?;
    let mut g = Poly::new(&fld, (0..=k).map(|i| f.coeff(i).mul(&fk_inv)).collect());
    let mut h = Poly::new(&fld, (k..=d).map(|i| f.coeff(i)).collect());
    let mut last = Valuation::Infinite;
    for _ in 0..iteration_cap(&fld) {
        let e = f.sub(&g.mul(&h));
        if e.is_zero() {
            return Ok((g, h));
        }
        let we = weighted(&e, mu);
        if we == last {
            // No further gain is possible at the working precision.
            return Ok((g, h));
        }
        last = we;
        let (q, r) = e.div_rem(&g)?;
        let c_inv = h.coeff(0).inv()?;
        g = g.add(&r.scale(&c_inv));
        h = h.add(&q);
    }
    Err(Error::PrecisionTooSmall(format!("slope splitting did not converge for degree {}", d)))
}

/// Factors a monic polynomial into pure-slope monic factors, ordered by
/// decreasing root valuation. Roots at zero (vanishing low coefficients)
/// contribute factors `x`.
pub fn slope_factor(f: &Poly) -> Result<Vec<Poly>> {
    let f = f.monic()?;
    let fld = f.field().clone();
    let mut out = Vec::new();
    let low = f.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(0);
    for _ in 0..low {
        out.push(Poly::x(&fld));
    }
    let mut rest = Poly::new(&fld, f.coeffs()[low..].to_vec());
    loop {
        let np = newton_polygon(&rest)?;
        if np.slopes.len() <= 1 {
            if rest.degree().unwrap_or(0) > 0 {
                out.push(rest);
            }
            return Ok(out);
        }
        let (s1, _) = np.slopes[0];
        let (s2, _) = np.slopes[1];
        let k = np.vertices[1].0 - np.vertices[0].0;
        let mu = -(s1 + s2) / qi(2);
        let (g, h) = split_at(&rest, k, mu)?;
        out.push(g);
        rest = h;
    }
}

/// Residual polynomial of a pure-slope factor with integral root
/// valuation `λ`: the reduction of `g(ϖ^λ y)/ϖ^{nλ}`.
fn residual_integral(g: &Poly, lambda: i64) -> Result<Vec<Residue>> {
    let n = g.degree().ok_or(Error::ZeroPolynomial)? as i64;
    g.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.shift(lambda * i as i64 - lambda * n).residue())
        .collect()
}

fn residual_eval(r: &[Residue], y: &Residue) -> Residue {
    let mut acc = Residue::zero(y.field());
    for c in r.iter().rev() {
        acc = acc.mul(y).add(c);
    }
    acc
}

fn residual_div_linear(r: &[Residue], c: &Residue) -> Vec<Residue> {
    let n = r.len() - 1;
    let mut q = vec![Residue::zero(c.field()); n];
    let mut carry = Residue::zero(c.field());
    for i in (0..n).rev() {
        carry = r[i + 1].add(&carry.mul(c));
        q[i] = carry.clone();
    }
    q
}

/// Constant residual roots with multiplicities.
fn residual_roots(r: &[Residue], field: &Field) -> Vec<(Residue, usize)> {
    let mut out = Vec::new();
    for c in Residue::enumerate_constants(field) {
        let mut cur = r.to_vec();
        let mut m = 0;
        while cur.len() > 1 && residual_eval(&cur, &c).is_zero() {
            cur = residual_div_linear(&cur, &c);
            m += 1;
        }
        if m > 0 {
            out.push((c, m));
        }
    }
    out
}

/// `f(a + b·x) / (leading coefficient)`: used to move a cluster of roots to
/// the origin.
fn recenter(f: &Poly, a: &Elem, b: &Elem) -> Result<Poly> {
    f.shift(a).scale_var(b).monic()
}

/// Hensel factorisation of a monic polynomial: pure-slope factors, each
/// further split along distinct constant residual roots. A factor of
/// degree `> 1` whose residual polynomial is a power of a single linear
/// factor is reported as `InseparableResidual`; the caller is expected to
/// apply an affine substitution and retry. Factors with non-integral slope
/// are returned unsplit.
pub fn hensel_slope_factor(f: &Poly, target_precision: i64) -> Result<Vec<Poly>> {
    let fld = f.field().clone();
    if target_precision > fld.cap() {
        return Err(Error::PrecisionTooSmall(format!(
            "target precision {} exceeds the field's {} digits",
            target_precision,
            fld.cap()
        )));
    }
    let mut out = Vec::new();
    for g in slope_factor(f)? {
        split_residual(&g, &mut out)?;
    }
    Ok(out)
}

fn split_residual(g: &Poly, out: &mut Vec<Poly>) -> Result<()> {
    let fld = g.field().clone();
    let n = g.degree().unwrap_or(0);
    if n <= 1 {
        out.push(g.clone());
        return Ok(());
    }
    let np = newton_polygon(g)?;
    let lambda = np.root_valuations().first().map(|r| r.0).unwrap_or(qi(0));
    if g.coeff(0).is_zero() {
        out.push(g.clone());
        return Ok(());
    }
    if !lambda.is_integer() {
        out.push(g.clone());
        return Ok(());
    }
    let lam = lambda.to_integer();
    let res = residual_integral(g, lam)?;
    let roots = residual_roots(&res, &fld);
    if roots.len() == 1 && roots[0].1 == n {
        return Err(Error::InseparableResidual(format!(
            "residual polynomial of a degree-{} factor is a {}-th power of a linear factor",
            n, n
        )));
    }
    if roots.is_empty() || (roots.len() == 1 && roots[0].1 == n) {
        out.push(g.clone());
        return Ok(());
    }
    // Split off the cluster of each residual root: in y = (x − [c]ϖ^λ)/ϖ^λ
    // those roots have positive valuation, the others valuation zero.
    let pi_l = fld.pi().pow(lam)?;
    let mut rest = g.clone();
    for (c, m) in roots {
        if rest.degree().unwrap_or(0) == m {
            break;
        }
        let a = teichmuller_lift(&c).mul(&pi_l);
        let moved = recenter(&rest, &a, &pi_l)?;
        let np = newton_polygon(&moved)?;
        let Some(mu) = cluster_weight(&np, m) else { continue };
        let (gm, hm) = split_at(&moved, m, mu)?;
        // back-substitute y = (x − a)/ϖ^λ, renormalise to monic
        let inv = pi_l.inv()?;
        let back = Poly::new(&fld, vec![a.neg().mul(&inv), inv.clone()]);
        let gx = gm.compose(&back).monic()?;
        let hx = hm.compose(&back).monic()?;
        if gx.degree().unwrap_or(0) > 1 {
            // the cluster may still split further
            match split_residual(&gx, out) {
                Ok(()) => {}
                Err(Error::InseparableResidual(_)) => out.push(gx),
                Err(e) => return Err(e),
            }
        } else {
            out.push(gx);
        }
        rest = hx;
    }
    if rest.degree().unwrap_or(0) > 0 {
        match split_residual(&rest, out) {
            Ok(()) => {}
            Err(Error::InseparableResidual(_)) => out.push(rest),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// For a recentred polynomial whose first `m` roots have positive
/// valuation and the rest valuation zero, a weight strictly between.
fn cluster_weight(np: &NewtonPolygon, m: usize) -> Option<Q> {
    let idx = np.vertices.iter().position(|v| v.0 == m)?;
    if idx == 0 || np.vertices[idx].1 != qi(0) {
        return None;
    }
    let (a, b) = (np.vertices[idx - 1], np.vertices[idx]);
    let smallest = (a.1 - b.1) / qi((b.0 - a.0) as i64);
    Some(smallest / qi(2))
}

/// Refines an approximate simple root by Newton's iteration.
fn newton_lift(f: &Poly, x0: &Elem) -> Result<Elem> {
    let df = f.derivative();
    let mut x = x0.clone();
    for _ in 0..iteration_cap(f.field()) {
        let fx = f.eval(&x);
        if fx.is_zero() {
            return Ok(x);
        }
        let step = fx.div(&df.eval(&x))?;
        if step.is_zero() {
            return Ok(x);
        }
        let nx = x.sub(&step);
        if nx.approx_eq(&x) {
            return Ok(nx);
        }
        x = nx;
    }
    Ok(x)
}

/// All roots of `f` lying in the coefficient field of `f` (with
/// multiplicity), found by recursive residual-root refinement. Residual
/// roots are searched in the constant field `F_q` only.
pub fn roots_in_field(f: &Poly) -> Result<Vec<Elem>> {
    let f = f.monic()?;
    let mut out = Vec::new();
    roots_rec(&f, &mut out, 0)?;
    out.sort_by_key(|a| a.sort_key());
    Ok(out)
}

fn roots_rec(f: &Poly, out: &mut Vec<Elem>, depth: usize) -> Result<()> {
    let fld = f.field().clone();
    if depth as i64 > 4 * fld.cap() + 8 {
        return Err(Error::PrecisionTooSmall("root clusters not separated at the working precision".into()));
    }
    let n = match f.degree() {
        None | Some(0) => return Ok(()),
        Some(n) => n,
    };
    if n == 1 {
        out.push(f.coeff(0).neg().div(&f.coeff(1))?);
        return Ok(());
    }
    for g in slope_factor(f)? {
        let d = g.degree().unwrap_or(0);
        if d == 0 {
            continue;
        }
        if g.coeff(0).is_zero() {
            // roots at zero (to precision)
            let z = g.coeffs().iter().position(|c| !c.is_zero()).unwrap_or(d);
            for _ in 0..z {
                out.push(Elem::zero_with_prec(&fld, fld.cap()));
            }
            let rest = Poly::new(&fld, g.coeffs()[z..].to_vec());
            roots_rec(&rest, out, depth + 1)?;
            continue;
        }
        if d == 1 {
            out.push(g.coeff(0).neg());
            continue;
        }
        let lambda = newton_polygon(&g)?.root_valuations()[0].0;
        if !lambda.is_integer() {
            continue; // such roots generate a ramified extension
        }
        let lam = lambda.to_integer();
        let pi_l = fld.pi().pow(lam)?;
        let res = residual_integral(&g, lam)?;
        for (c, m) in residual_roots(&res, &fld) {
            let a = teichmuller_lift(&c).mul(&pi_l);
            if m == 1 {
                out.push(newton_lift(&g, &a)?);
                continue;
            }
            // roots congruent to a: recurse on the positive-valuation part
            let moved = recenter(&g, &a, &pi_l)?;
            let mut sub = Vec::new();
            for h in slope_factor(&moved)? {
                let np = newton_polygon(&h);
                let positive = match np {
                    Ok(np) => np.root_valuations().first().is_some_and(|r| r.0 > qi(0)),
                    Err(_) => false,
                } || h.coeff(0).is_zero();
                if positive {
                    roots_rec(&h, &mut sub, depth + 1)?;
                }
            }
            for z in sub {
                out.push(a.add(&z.mul(&pi_l)));
            }
        }
    }
    Ok(())
}

/// Roots of `f` in an extension `L` together with their pairwise
/// difference valuations (in `v_L`).
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub field: Field,
    pub roots: Vec<Elem>,
    /// `diff[i][j] = v_L(r_i − r_j)`, `+∞` on the diagonal.
    pub diff: Vec<Vec<Valuation>>,
}

impl RootSystem {
    /// Off-diagonal difference valuations.
    pub fn off_diagonal(&self) -> Vec<Valuation> {
        let n = self.roots.len();
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v.push(self.diff[i][j]);
                }
            }
        }
        v
    }
}

/// Finds all roots of `f` (coefficients in a subfield of `L`) in `L` and
/// tabulates their differences. Fails with `DoesNotSplit` if fewer than
/// `deg f` roots are found.
pub fn root_difference_table(f: &Poly, l: &Field) -> Result<RootSystem> {
    let fl = f.coerce(l)?;
    let roots = roots_in_field(&fl)?;
    if roots.len() != fl.degree().unwrap_or(0) {
        return Err(Error::DoesNotSplit);
    }
    let n = roots.len();
    let mut diff = vec![vec![Valuation::Infinite; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                diff[i][j] = roots[i].sub(&roots[j]).valuation();
            }
        }
    }
    Ok(RootSystem { field: l.clone(), roots, diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};
    use crate::valuation::q;

    #[test]
    fn hull_of_eisenstein_points() {
        let np = NewtonPolygon::from_points(&[(0, qi(1)), (2, qi(1)), (3, qi(0))]).unwrap();
        assert_eq!(np.vertices, vec![(0, qi(1)), (3, qi(0))]);
        assert_eq!(np.root_valuations(), vec![(q(1, 3), 3)]);
    }

    #[test]
    fn square_root_of_p_polygon() {
        let k = make_field(&FieldDescription::qp(5, 20)).unwrap();
        let np = newton_polygon(&Poly::from_ints(&k, &[-5, 0, 1])).unwrap();
        assert_eq!(np.root_valuations(), vec![(q(1, 2), 2)]);
    }

    #[test]
    fn two_linear_factors() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let f = Poly::from_ints(&k, &[3, -4, 1]); // (x−1)(x−3)
        let fs = hensel_slope_factor(&f, 10).unwrap();
        assert_eq!(fs.len(), 2);
        let prod = fs.iter().fold(Poly::one(&k), |a, b| a.mul(b));
        assert!(prod.approx_eq(&f));
        let roots = roots_in_field(&f).unwrap();
        assert_eq!(roots.len(), 2);
    }

    #[test]
    fn roots_of_unity_in_q7() {
        let k = make_field(&FieldDescription::qp(7, 20)).unwrap();
        let f = Poly::from_ints(&k, &[-1, 0, 0, 1]); // x^3 − 1 splits in Q_7
        let roots = roots_in_field(&f).unwrap();
        assert_eq!(roots.len(), 3);
        for r in &roots {
            assert!(f.eval(r).is_zero());
        }
    }
}
