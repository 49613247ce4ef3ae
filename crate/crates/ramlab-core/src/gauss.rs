//! Sparse multivariate polynomials over a tower field, with weighted Gauss
//! valuations, the `N^a` filtration and substitution.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use smallvec::SmallVec;

use crate::elem::Elem;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::valuation::{qi, Q, Valuation};

/// Exponent vector over the declared variables.
pub type Exps = SmallVec<[u16; 4]>;

/// Default total-degree truncation order.
pub const DEFAULT_TRUNCATION: u32 = 24;

/// Largest truncation order accepted by constructors.
pub const MAX_TRUNCATION: u32 = 4096;

/// Declared variables with optional default weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet {
    pub names: Vec<String>,
    pub weights: Vec<Option<Q>>,
}

impl VarSet {
    pub fn new(names: &[&str]) -> Arc<VarSet> {
        Arc::new(VarSet { names: names.iter().map(|s| s.to_string()).collect(), weights: alloc::vec![None; names.len()] })
    }

    pub fn with_weights(names: &[&str], weights: &[Option<Q>]) -> Arc<VarSet> {
        Arc::new(VarSet { names: names.iter().map(|s| s.to_string()).collect(), weights: weights.to_vec() })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Per-variable weights `s_j` used by the Gauss valuation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightVector(pub Vec<(String, Q)>);

impl WeightVector {
    pub fn new(entries: &[(&str, Q)]) -> Self {
        WeightVector(entries.iter().map(|(n, w)| (n.to_string(), *w)).collect())
    }

    pub fn get(&self, name: &str) -> Option<Q> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, w)| *w)
    }

    pub fn set(&mut self, name: &str, w: Q) {
        match self.0.iter_mut().find(|(n, _)| n == name) {
            Some(e) => e.1 = w,
            None => self.0.push((name.to_string(), w)),
        }
    }
}

/// A polynomial (or truncated power series) over a field.
#[derive(Clone)]
pub struct GaussPoly {
    field: Field,
    vars: Arc<VarSet>,
    terms: BTreeMap<Exps, Elem>,
    trunc: Option<u32>,
}

fn total(e: &Exps) -> u32 {
    e.iter().map(|x| *x as u32).sum()
}

impl GaussPoly {
    /// The zero polynomial in the given variables. `trunc = None` keeps
    /// polynomials exact; `Some(n)` discards terms of total degree `> n`.
    pub fn zero(field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>) -> Result<GaussPoly> {
        if let Some(t) = trunc {
            if t > MAX_TRUNCATION {
                return Err(Error::TruncationOverflow(t));
            }
        }
        Ok(GaussPoly { field: field.clone(), vars: vars.clone(), terms: BTreeMap::new(), trunc })
    }

    fn empty_like(&self) -> GaussPoly {
        GaussPoly { field: self.field.clone(), vars: self.vars.clone(), terms: BTreeMap::new(), trunc: self.trunc }
    }

    pub fn constant(field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>, c: Elem) -> Result<GaussPoly> {
        let mut g = GaussPoly::zero(field, vars, trunc)?;
        g.insert(Exps::from_elem(0, vars.len()), c);
        Ok(g)
    }

    /// The variable `name` (error if undeclared).
    pub fn var(field: &Field, vars: &Arc<VarSet>, trunc: Option<u32>, name: &str) -> Result<GaussPoly> {
        let i = vars.index(name).ok_or_else(|| Error::Parse(format!("undeclared variable `{}`", name)))?;
        let mut e = Exps::from_elem(0, vars.len());
        e[i] = 1;
        let mut g = GaussPoly::zero(field, vars, trunc)?;
        g.insert(e, Elem::one(field));
        Ok(g)
    }

    /// Builds from explicit terms.
    pub fn from_terms(
        field: &Field,
        vars: &Arc<VarSet>,
        trunc: Option<u32>,
        terms: impl IntoIterator<Item = (Exps, Elem)>,
    ) -> Result<GaussPoly> {
        let mut g = GaussPoly::zero(field, vars, trunc)?;
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::Parse("exponent vector length differs from the variable count".into()));
            }
            g.add_term(e, c);
        }
        Ok(g)
    }

    fn insert(&mut self, e: Exps, c: Elem) {
        if c.is_zero() {
            return;
        }
        if let Some(t) = self.trunc {
            if total(&e) > t {
                return;
            }
        }
        self.terms.insert(e, c);
    }

    /// Adds `c · x^e` in place.
    pub fn add_term(&mut self, e: Exps, c: Elem) {
        if c.is_zero() {
            return;
        }
        if let Some(t) = self.trunc {
            if total(&e) > t {
                return;
            }
        }
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = old.add(&c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    // -- accessors ----------------------------------------------------------

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn truncation(&self) -> Option<u32> {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u16]) -> Elem {
        self.terms.get(e).cloned().unwrap_or_else(|| Elem::zero(&self.field))
    }

    /// The constant term.
    pub fn constant_term(&self) -> Elem {
        self.coeff(&Exps::from_elem(0, self.vars.len()))
    }

    /// Whether only the constant term is present.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|x| *x == 0))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(total).max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u16> {
        self.terms.keys().map(|e| e[var]).max()
    }

    fn compatible(&self, other: &GaussPoly) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch("polynomials over different fields".into()));
        }
        if self.vars.names != other.vars.names {
            return Err(Error::FieldMismatch(format!(
                "variable sets differ: {:?} vs {:?}",
                self.vars.names, other.vars.names
            )));
        }
        Ok(())
    }

    fn joint_trunc(&self, other: &GaussPoly) -> Option<u32> {
        match (self.trunc, other.trunc) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        }
    }

    // -- ring operations ------------------------------------------------------

    pub fn add(&self, other: &GaussPoly) -> Result<GaussPoly> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.trunc = self.joint_trunc(other);
        if let Some(t) = out.trunc {
            out.terms.retain(|e, _| total(e) <= t);
        }
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> GaussPoly {
        let mut out = self.empty_like();
        out.terms = self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect();
        out
    }

    pub fn sub(&self, other: &GaussPoly) -> Result<GaussPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &GaussPoly) -> Result<GaussPoly> {
        self.compatible(other)?;
        let mut out = self.empty_like();
        out.trunc = self.joint_trunc(other);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if let Some(t) = out.trunc {
                    if total(&e) > t {
                        continue;
                    }
                }
                out.add_term(e, ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Elem) -> GaussPoly {
        let mut out = self.empty_like();
        for (e, a) in &self.terms {
            out.insert(e.clone(), a.mul(c));
        }
        out
    }

    pub fn add_const(&self, c: &Elem) -> GaussPoly {
        let mut out = self.clone();
        out.add_term(Exps::from_elem(0, self.vars.len()), c.clone());
        out
    }

    pub fn pow(&self, n: u32) -> Result<GaussPoly> {
        let mut acc = GaussPoly::constant(&self.field, &self.vars, self.trunc, Elem::one(&self.field))?;
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> GaussPoly {
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.insert(e2, c.scale_int(e[var] as i128));
        }
        out
    }

    pub fn derivative_by_name(&self, name: &str) -> Result<GaussPoly> {
        let i = self.vars.index(name).ok_or_else(|| Error::Parse(format!("undeclared variable `{}`", name)))?;
        Ok(self.derivative(i))
    }

    /// Changes the truncation order (discarding terms beyond it).
    pub fn with_truncation(&self, trunc: Option<u32>) -> Result<GaussPoly> {
        if let Some(t) = trunc {
            if t > MAX_TRUNCATION {
                return Err(Error::TruncationOverflow(t));
            }
        }
        let mut out = self.clone();
        out.trunc = trunc;
        if let Some(t) = trunc {
            out.terms.retain(|e, _| total(e) <= t);
        }
        Ok(out)
    }

    /// Re-expresses the polynomial over a superset of its variables.
    pub fn with_vars(&self, vars: &Arc<VarSet>) -> Result<GaussPoly> {
        let map: Vec<usize> = self
            .vars
            .names
            .iter()
            .map(|n| vars.index(n).ok_or_else(|| Error::Parse(format!("variable `{}` missing from target", n))))
            .collect::<Result<_>>()?;
        let mut out = GaussPoly::zero(&self.field, vars, self.trunc)?;
        for (e, c) in &self.terms {
            let mut e2 = Exps::from_elem(0, vars.len());
            for (i, x) in e.iter().enumerate() {
                e2[map[i]] = *x;
            }
            out.insert(e2, c.clone());
        }
        Ok(out)
    }

    /// Maps coefficients into an extension field.
    pub fn coerce_to(&self, field: &Field) -> Result<GaussPoly> {
        let mut out = GaussPoly::zero(field, &self.vars, self.trunc)?;
        for (e, c) in &self.terms {
            out.insert(e.clone(), field.coerce(c)?);
        }
        Ok(out)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, mut f: impl FnMut(&Elem) -> Elem) -> GaussPoly {
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            out.insert(e.clone(), f(c));
        }
        out
    }

    /// Keeps the terms for which `keep` holds.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Exps, &Elem) -> bool) -> GaussPoly {
        let mut out = self.empty_like();
        for (e, c) in &self.terms {
            if keep(e, c) {
                out.insert(e.clone(), c.clone());
            }
        }
        out
    }

    // -- valuations -------------------------------------------------------------

    fn weight_list(&self, s: &WeightVector) -> Result<Vec<Q>> {
        self.vars
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                s.get(n)
                    .or(self.vars.weights[i])
                    .ok_or_else(|| Error::MissingWeight(n.clone()))
            })
            .collect()
    }

    /// Weighted Gauss valuation `min_e v(c_e) + Σ e_j s_j` (variables not in
    /// `s` fall back to their declared default weight). Only variables that
    /// actually occur need a weight.
    pub fn gauss_valuation(&self, s: &WeightVector) -> Result<Valuation> {
        let mut used = alloc::vec![false; self.vars.len()];
        for e in self.terms.keys() {
            for (i, x) in e.iter().enumerate() {
                if *x > 0 {
                    used[i] = true;
                }
            }
        }
        let mut w = Vec::with_capacity(self.vars.len());
        for (i, n) in self.vars.names.iter().enumerate() {
            match s.get(n).or(self.vars.weights[i]) {
                Some(x) => w.push(x),
                None if !used[i] => w.push(qi(0)),
                None => return Err(Error::MissingWeight(n.clone())),
            }
        }
        Ok(self.gauss_valuation_with(&w))
    }

    /// Gauss valuation with weights given positionally.
    pub fn gauss_valuation_with(&self, w: &[Q]) -> Valuation {
        let mut best = Valuation::Infinite;
        for (e, c) in &self.terms {
            if let Some(v) = c.val_int() {
                let mut t = qi(v);
                for (x, s) in e.iter().zip(w) {
                    t += *s * qi(*x as i64);
                }
                best = best.min(Valuation::Finite(t));
            }
        }
        best
    }

    /// Membership in `N^a`: every term satisfies `v(c) + Σ e_j w_j ≥ a`, with
    /// the declared default weights (e.g. `u_0 ↦ 1/e`, `u_j ↦ 0`).
    pub fn in_filtration(&self, a: Q) -> Result<bool> {
        let w = self.weight_list(&WeightVector::default())?;
        Ok(match self.gauss_valuation_with(&w) {
            Valuation::Infinite => true,
            Valuation::Finite(v) => v >= a,
        })
    }

    // -- substitution and evaluation ------------------------------------------

    /// Substitutes polynomials for variables. Every variable occurring in
    /// `self` must be bound; all bindings must live over the same field and
    /// variable set, which becomes the variable set of the result.
    pub fn substitute(&self, bindings: &[(&str, &GaussPoly)]) -> Result<GaussPoly> {
        let (_, first) = bindings.first().ok_or_else(|| Error::Parse("empty substitution".into()))?;
        let target_vars = first.vars.clone();
        let field = first.field.clone();
        let mut trunc = first.trunc;
        for (_, b) in bindings {
            first.compatible(b)?;
            trunc = match (trunc, b.trunc) {
                (Some(a), Some(c)) => Some(a.min(c)),
                (a, None) => a,
                (None, c) => c,
            };
        }
        if field != self.field && !field.is_over(&self.field) {
            return Err(Error::FieldMismatch("substitution target is not over the source field".into()));
        }
        let mut slots: Vec<Option<&GaussPoly>> = alloc::vec![None; self.vars.len()];
        for (name, b) in bindings {
            if let Some(i) = self.vars.index(name) {
                slots[i] = Some(b);
            }
        }
        let mut powers: Vec<Vec<GaussPoly>> = Vec::with_capacity(self.vars.len());
        let one = GaussPoly::constant(&field, &target_vars, trunc, Elem::one(&field))?;
        for i in 0..self.vars.len() {
            let maxe = self.degree_in(i).unwrap_or(0);
            let mut v = alloc::vec![one.clone()];
            if maxe > 0 {
                let b = slots[i].ok_or_else(|| Error::Parse(format!("no binding for `{}`", self.vars.names[i])))?;
                let b = b.with_truncation(trunc)?;
                for k in 1..=maxe as usize {
                    let next = v[k - 1].mul(&b)?;
                    v.push(next);
                }
            }
            powers.push(v);
        }
        let mut out = GaussPoly::zero(&field, &target_vars, trunc)?;
        for (e, c) in &self.terms {
            let c = field.coerce(c)?;
            let mut t = GaussPoly::constant(&field, &target_vars, trunc, c)?;
            for (i, x) in e.iter().enumerate() {
                if *x > 0 {
                    t = t.mul(&powers[i][*x as usize])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Evaluates at field elements (one per variable).
    pub fn eval(&self, point: &[Elem]) -> Result<Elem> {
        if point.len() != self.vars.len() {
            return Err(Error::Parse("evaluation point has the wrong length".into()));
        }
        let mut acc = Elem::zero(&self.field);
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in e.iter().enumerate() {
                if *x > 0 {
                    t = t.mul(&point[i].pow(*x as i64)?);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Dense coefficient list in a single variable (constant first); the
    /// polynomial must only involve that variable.
    pub fn univariate_coeffs(&self, var: usize) -> Result<Vec<Elem>> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = alloc::vec![Elem::zero(&self.field); deg + 1];
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, x)| i != var && *x > 0) {
                return Err(Error::Parse("polynomial involves other variables".into()));
            }
            out[e[var] as usize] = c.clone();
        }
        Ok(out)
    }

    /// Collects the polynomial as a polynomial in `var` with coefficients in
    /// the remaining variables (kept in the same variable set).
    pub fn collect_in(&self, var: usize) -> Vec<GaussPoly> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = alloc::vec![self.empty_like(); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[var] as usize;
            e2[var] = 0;
            out[k].insert(e2, c.clone());
        }
        out
    }

    /// Text form in the gauss-poly syntax (coefficients as π-adic expansions).
    pub fn to_text(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0)
                .map(|(i, x)| {
                    if *x == 1 {
                        self.vars.names[i].clone()
                    } else {
                        format!("{}^{}", self.vars.names[i], x)
                    }
                })
                .collect();
            if mono.is_empty() {
                parts.push(format!("[{}]", c.to_text()));
            } else {
                parts.push(format!("[{}]*{}", c.to_text(), mono.join("*")));
            }
        }
        parts.join(" + ")
    }
}

impl fmt::Debug for GaussPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldDescription};
    use crate::valuation::q;

    #[test]
    fn gauss_valuation_of_monomials() {
        let k = make_field(&FieldDescription::qp(3, 20)).unwrap();
        let vars = VarSet::new(&["d0", "d1"]);
        let d1 = GaussPoly::var(&k, &vars, None, "d1").unwrap();
        let h = d1.pow(2).unwrap().scale(&Elem::from_int(&k, 3));
        let s = WeightVector::new(&[("d0", q(1, 2)), ("d1", q(3, 2))]);
        assert_eq!(h.gauss_valuation(&s).unwrap(), Valuation::Finite(qi(4)));
    }
}
