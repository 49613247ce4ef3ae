//! Classical ramification filtrations of a single Eisenstein step `L/K`:
//! the Galois group from conjugates of the uniformizer, lower numbering,
//! Herbrand's φ and ψ, upper breaks, the calibrated Abbes–Saito
//! dictionary, Artin/Swan conductors and Hasse–Arf audits.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::newton::root_difference_table;
use crate::poly::Poly;
use crate::valuation::{qi, Valuation, Q};

/// Desk-scale bound on `[L:K]`.
pub const MAX_DEGREE: usize = 64;

/// The Galois group of a totally ramified Galois Eisenstein step, each
/// automorphism recorded by the image of the uniformizer.
#[derive(Clone, Debug)]
pub struct GaloisGroup {
    pub field: Field,
    /// `images[σ] = σ(ϖ)`; index 0 is the identity.
    pub images: Vec<Elem>,
    /// Coordinates of each image over the base field.
    coords: Vec<Vec<Elem>>,
    /// `table[σ][τ] = σ∘τ`.
    pub table: Vec<Vec<usize>>,
    /// `i(σ) = v_L(σϖ − ϖ)`; `+∞` for the identity.
    pub i_values: Vec<Valuation>,
}

impl GaloisGroup {
    /// Enumerates the conjugates of the top uniformizer of `l` over its
    /// parent. Fails with `NotGalois` if they do not all lie in `l`.
    pub fn of(l: &Field) -> Result<GaloisGroup> {
        let k = l.parent().ok_or_else(|| Error::FieldMismatch("field has no parent".into()))?.clone();
        let e = l.e();
        if e > MAX_DEGREE {
            return Err(Error::Unsupported(format!("degree {} above {}", e, MAX_DEGREE)));
        }
        let mut cs = l.eisenstein_coeffs().unwrap();
        cs.push(Elem::one(&k));
        let f = Poly::new(&k, cs);
        let rs = match root_difference_table(&f, l) {
            Ok(rs) => rs,
            Err(Error::DoesNotSplit) => return Err(Error::NotGalois),
            Err(err) => return Err(err),
        };
        let pi = l.pi();
        // identity first, the rest in canonical order
        let id = (0..rs.roots.len())
            .max_by_key(|&i| rs.roots[i].sub(&pi).valuation())
            .ok_or(Error::NotGalois)?;
        let mut images = vec![rs.roots[id].clone()];
        images.extend(rs.roots.iter().enumerate().filter(|(i, _)| *i != id).map(|(_, r)| r.clone()));
        images[0] = pi.clone();
        let coords = images.iter().map(|r| l.parent_coordinates(r)).collect::<Result<Vec<_>>>()?;
        let n = images.len();
        let mut g = GaloisGroup { field: l.clone(), images, coords, table: Vec::new(), i_values: Vec::new() };
        g.i_values = g.images.iter().map(|r| r.sub(&pi).valuation()).collect();
        g.i_values[0] = Valuation::Infinite;
        // distinct conjugates differ by at most the largest i(σ); a
        // composite must sit strictly closer than that to its match
        let sep = g.i_values.iter().skip(1).copied().max().unwrap_or(Valuation::int(0));
        let mut table = vec![vec![0usize; n]; n];
        for s in 0..n {
            for t in 0..n {
                let img = g.apply_coords(s, &g.coords[t])?;
                let (j, v) = g.nearest(&img);
                if v <= sep {
                    return Err(Error::PrecisionTooSmall(format!(
                        "composite of conjugates matched only to valuation {} (separation {})",
                        v, sep
                    )));
                }
                table[s][t] = j;
            }
        }
        // a group table is a Latin square; anything else is lost precision
        let latin = (0..n).all(|s| {
            let mut seen = vec![false; n];
            table[s].iter().all(|&j| !core::mem::replace(&mut seen[j], true))
        });
        if !latin {
            return Err(Error::PrecisionTooSmall("conjugates do not compose to a group table".into()));
        }
        g.table = table;
        Ok(g)
    }

    pub fn order(&self) -> usize {
        self.images.len()
    }

    /// `σ(x) = Σ B_j σ(ϖ)^j` for `x = Σ B_j ϖ^j`.
    fn apply_coords(&self, s: usize, coords: &[Elem]) -> Result<Elem> {
        let r = &self.images[s];
        let mut acc = Elem::zero(&self.field);
        for c in coords.iter().rev() {
            acc = acc.mul(r).add(&self.field.coerce(c)?);
        }
        Ok(acc)
    }

    /// Applies the automorphism with index `s` to an element of `L`.
    pub fn apply(&self, s: usize, x: &Elem) -> Result<Elem> {
        let coords = self.field.parent_coordinates(x)?;
        self.apply_coords(s, &coords)
    }

    /// The conjugate closest to `x` and its distance.
    fn nearest(&self, x: &Elem) -> (usize, Valuation) {
        (0..self.images.len()).map(|i| (i, self.images[i].sub(x).valuation())).max_by_key(|(_, v)| *v).unwrap()
    }

    pub fn inverse(&self, s: usize) -> usize {
        (0..self.order()).find(|&t| self.table[s][t] == 0).unwrap_or(0)
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// `σ^k`.
    pub fn power(&self, s: usize, k: u64) -> usize {
        let mut acc = 0;
        for _ in 0..k {
            acc = self.table[s][acc];
        }
        acc
    }

    /// Members of the lower ramification group `G_t`: `i(σ) ≥ t + 1`.
    pub fn lower_group(&self, t: Q) -> Vec<usize> {
        (0..self.order()).filter(|&s| self.i_values[s] >= Valuation::from(t + qi(1))).collect()
    }
}

/// A continuous piecewise-linear function on `[0, ∞)` given by its
/// breakpoints and the slope after the last one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseLinear {
    /// `(x, f(x))`, starting at `(0, 0)`.
    pub points: Vec<(Q, Q)>,
    pub final_slope: Q,
}

impl PiecewiseLinear {
    pub fn eval(&self, x: Q) -> Q {
        let mut last = self.points[0];
        for w in self.points.windows(2) {
            if x <= w[1].0 {
                let (a, b) = (w[0], w[1]);
                return a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
            }
            last = w[1];
        }
        last.1 + self.final_slope * (x - last.0)
    }

    /// Inverse of an increasing function.
    pub fn inverse(&self) -> PiecewiseLinear {
        PiecewiseLinear {
            points: self.points.iter().map(|(x, y)| (*y, *x)).collect(),
            final_slope: qi(1) / self.final_slope,
        }
    }

    /// Slopes of the successive pieces (last one is the final slope).
    pub fn slopes(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.points.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        v.push(self.final_slope);
        v
    }
}

/// Lower/upper filtration data with the Abbes–Saito breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RamificationProfile {
    pub group_order: usize,
    /// `(t, |G_t|)` at each lower jump `t` (the last `t` with that order).
    pub lower_breaks: Vec<(Q, usize)>,
    pub herbrand_phi: PiecewiseLinear,
    pub upper_breaks: Vec<Q>,
    /// Non-logarithmic break `b = u_max + 1` (0 if unramified).
    pub b: Q,
    /// Logarithmic break `b_log = u_max` (0 if unramified).
    pub b_log: Q,
}

impl RamificationProfile {
    /// Builds φ, upper breaks and the dictionary from lower jump data
    /// `(t, |G_t|)`, `t` increasing, `|G_t|` decreasing.
    pub fn from_lower(group_order: usize, lower_breaks: Vec<(Q, usize)>) -> RamificationProfile {
        let g0 = lower_breaks.first().map_or(1, |b| if b.0 >= qi(0) { group_order } else { b.1 }).max(1);
        let mut points = vec![(qi(0), qi(0))];
        let mut slope = qi(1);
        let mut prev = qi(0);
        let mut upper = Vec::new();
        let mut y = qi(0);
        for (k, (t, gt)) in lower_breaks.iter().enumerate() {
            if *t > prev {
                y += slope * (*t - prev);
                points.push((*t, y));
                prev = *t;
            }
            upper.push(if *t <= qi(0) { *t } else { y });
            let next = lower_breaks.get(k + 1).map_or(1, |b| b.1);
            debug_assert!(*gt >= next);
            slope = Q::new(next as i64, g0 as i64);
        }
        let herbrand_phi = PiecewiseLinear { points, final_slope: slope };
        let (b, b_log) = match upper.last() {
            None => (qi(0), qi(0)),
            Some(u) => (*u + qi(1), *u),
        };
        RamificationProfile { group_order, lower_breaks, herbrand_phi, upper_breaks: upper, b, b_log }
    }

    /// The profile of an unramified extension.
    pub fn unramified(degree: usize) -> RamificationProfile {
        RamificationProfile::from_lower(degree, Vec::new())
    }

    /// `ψ = φ^{-1}`.
    pub fn herbrand_psi(&self) -> PiecewiseLinear {
        self.herbrand_phi.inverse()
    }

    /// `|G^u|` in the upper numbering (`u ≥ 0`).
    pub fn upper_order(&self, u: Q) -> usize {
        let t = self.herbrand_psi().eval(u);
        self.lower_order(t)
    }

    /// `|G_t|` in the lower numbering.
    pub fn lower_order(&self, t: Q) -> usize {
        self.lower_breaks.iter().find(|(b, _)| *b >= t).map_or(1, |(_, g)| *g)
    }
}

/// Computes the lower filtration and derived data of a single Eisenstein
/// Galois step.
pub fn lower_filtration(l: &Field) -> Result<(GaloisGroup, RamificationProfile)> {
    let g = GaloisGroup::of(l)?;
    let jumps: BTreeSet<Q> = g.i_values.iter().filter_map(|v| v.finite()).map(|i| i - qi(1)).collect();
    let lower: Vec<(Q, usize)> = jumps.iter().map(|t| (*t, g.lower_group(*t).len())).collect();
    let prof = RamificationProfile::from_lower(g.order(), lower);
    Ok((g, prof))
}

/// One row of a conductor report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConductorRow {
    pub label: String,
    pub dim: usize,
    pub art: Q,
    pub swan: Q,
    pub art_integral: bool,
    pub swan_integral: bool,
}

/// A representation described by `dim V` and `fixed[i] = dim V^{G^{u_i}}`
/// at each upper break `u_i` (increasing).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedProfile {
    pub label: String,
    pub dim: usize,
    pub fixed: Vec<usize>,
}

/// Artin and Swan conductors `Σ (u_i + 1)·(d_{i+1} − d_i)` and
/// `Σ u_i·(d_{i+1} − d_i)` with `d_{k} = dim V` after the last break.
pub fn conductors(profile: &RamificationProfile, rep: &FixedProfile) -> Result<ConductorRow> {
    let k = profile.upper_breaks.len();
    if rep.fixed.len() != k {
        return Err(Error::InconsistentDims(format!("{} fixed dimensions for {} breaks", rep.fixed.len(), k)));
    }
    let mut d: Vec<usize> = rep.fixed.clone();
    d.push(rep.dim);
    if d.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InconsistentDims("fixed spaces must grow along the filtration".into()));
    }
    let mut art = qi(0);
    let mut swan = qi(0);
    for i in 0..k {
        let jump = qi((d[i + 1] - d[i]) as i64);
        art += (profile.upper_breaks[i] + qi(1)) * jump;
        swan += profile.upper_breaks[i] * jump;
    }
    Ok(ConductorRow {
        label: rep.label.clone(),
        dim: rep.dim,
        art,
        swan,
        art_integral: art.is_integer(),
        swan_integral: swan.is_integer(),
    })
}

/// Fixed-dimension profiles of the characters of an abelian group,
/// grouped by the break at which they stop being trivial: characters
/// trivial on `G^{u_{i+1}}` but not on `G^{u_i}` number
/// `|G/G^{u_{i+1}}| − |G/G^{u_i}|`. Returns `(profile, count)` pairs,
/// including the trivial character.
pub fn abelian_characters(profile: &RamificationProfile) -> Vec<(FixedProfile, usize)> {
    let n = profile.group_order;
    let k = profile.upper_breaks.len();
    let orders: Vec<usize> = profile.lower_breaks.iter().map(|b| b.1).collect();
    let mut out = vec![(FixedProfile { label: String::from("trivial"), dim: 1, fixed: vec![1; k] }, 1)];
    for i in 0..k {
        let next = orders.get(i + 1).copied().unwrap_or(1);
        let count = n / next - n / orders[i];
        let fixed = (0..k).map(|j| usize::from(j > i)).collect();
        out.push((FixedProfile { label: format!("jump at {}", profile.upper_breaks[i]), dim: 1, fixed }, count));
    }
    out
}

/// Structure of one filtration subquotient `G^{u_i}/G^{u_{i+1}}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquotient {
    pub upper: Q,
    pub order: usize,
    pub abelian: bool,
    pub killed_by_p: bool,
}

/// Checks every subquotient of the lower filtration of `g`: commutators
/// and `p`-th powers of the upper group must lie in the next group.
pub fn subquotients(g: &GaloisGroup, profile: &RamificationProfile) -> Vec<Subquotient> {
    let p = g.field.p();
    let mut out = Vec::new();
    let lower = &profile.lower_breaks;
    for (i, (t, order)) in lower.iter().enumerate() {
        let big = g.lower_group(*t);
        let small: BTreeSet<usize> = match lower.get(i + 1) {
            Some((t2, _)) => g.lower_group(*t2).into_iter().collect(),
            None => [0usize].into_iter().collect(),
        };
        let mut abelian = true;
        let mut killed = true;
        for &a in &big {
            if !small.contains(&g.power(a, p)) {
                killed = false;
            }
            for &b in &big {
                let comm = g.table[g.table[a][b]][g.table[g.inverse(a)][g.inverse(b)]];
                if !small.contains(&comm) {
                    abelian = false;
                }
            }
        }
        out.push(Subquotient { upper: profile.upper_breaks[i], order: order / small.len(), abelian, killed_by_p: killed });
    }
    out
}

/// One extension's Hasse–Arf audit.
#[derive(Clone, Debug)]
pub struct AuditRow {
    pub label: String,
    pub profile: RamificationProfile,
    pub characters: Vec<(ConductorRow, usize)>,
    pub subquotients: Vec<Subquotient>,
    /// Every character conductor integral and every wild subquotient
    /// elementary `p`-abelian.
    pub ok: bool,
}

/// Audits a single extension (abelian groups only get character rows).
pub fn hasse_arf_audit_one(label: &str, l: &Field) -> Result<AuditRow> {
    let (g, profile) = lower_filtration(l)?;
    let mut characters = Vec::new();
    if g.is_abelian() {
        for (rep, count) in abelian_characters(&profile) {
            characters.push((conductors(&profile, &rep)?, count));
        }
    }
    let subq = subquotients(&g, &profile);
    let ok = characters.iter().all(|(c, _)| c.art_integral && c.art >= qi(0) && c.swan >= qi(0))
        && subq.iter().filter(|s| s.upper > qi(0)).all(|s| s.abelian && s.killed_by_p);
    Ok(AuditRow { label: String::from(label), profile, characters, subquotients: subq, ok })
}

/// Audits a family of extensions.
pub fn hasse_arf_audit(family: &[(String, Field)]) -> Result<Vec<AuditRow>> {
    family.iter().map(|(label, l)| hasse_arf_audit_one(label, l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_of_single_wild_break() {
        let prof = RamificationProfile::from_lower(3, vec![(qi(1), 3)]);
        assert_eq!(prof.upper_breaks, vec![qi(1)]);
        assert_eq!(prof.herbrand_phi.eval(qi(1)), qi(1));
        assert_eq!(prof.herbrand_phi.eval(qi(4)), qi(2));
        assert_eq!((prof.b, prof.b_log), (qi(2), qi(1)));
    }

    #[test]
    fn phi_of_two_breaks() {
        // |G_t| = 9 up to 1, 3 up to 4
        let prof = RamificationProfile::from_lower(9, vec![(qi(1), 9), (qi(4), 3)]);
        assert_eq!(prof.upper_breaks, vec![qi(1), qi(2)]);
        assert_eq!(prof.herbrand_phi.slopes(), vec![qi(1), Q::new(1, 3), Q::new(1, 9)]);
        let psi = prof.herbrand_psi();
        for x in [Q::new(1, 2), qi(3), Q::new(7, 2), qi(9)] {
            assert_eq!(psi.eval(prof.herbrand_phi.eval(x)), x);
        }
    }

    #[test]
    fn unramified_profile_is_empty() {
        let prof = RamificationProfile::unramified(3);
        assert!(prof.upper_breaks.is_empty());
        assert_eq!((prof.b, prof.b_log), (qi(0), qi(0)));
    }

    #[test]
    fn conductor_rejects_shrinking_fixed_spaces() {
        let prof = RamificationProfile::from_lower(3, vec![(qi(1), 3)]);
        let bad = FixedProfile { label: "bad".into(), dim: 1, fixed: vec![2] };
        assert!(matches!(conductors(&prof, &bad), Err(Error::InconsistentDims(_))));
    }
}
