//! Ring backends and their elements.
//!
//! Three backends: plain coefficient rings (Q, F_p, Z, Z/m), finite
//! commutative algebras given by structure constants, and graded polynomial
//! rings over a field with positively weighted variables. Elements are kept
//! in canonical normal form (sorted monomials, no zero coefficients).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedPoly {
    pub field: ScalarKind,
    /// variable name and weight (>= 1)
    pub vars: Vec<(String, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteAlgebra {
    pub field: ScalarKind,
    pub basis: Vec<String>,
    /// mult[i][j] = coordinates of basis_i * basis_j
    pub mult: Vec<Vec<Vec<Scalar>>>,
    pub unit: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseRing {
    Coefficient(ScalarKind),
    FiniteAlgebra(FiniteAlgebra),
    GradedPoly(GradedPoly),
}

impl BaseRing {
    pub fn rational() -> Arc<BaseRing> {
        Arc::new(BaseRing::Coefficient(ScalarKind::Rational))
    }

    pub fn integers() -> Arc<BaseRing> {
        Arc::new(BaseRing::Coefficient(ScalarKind::Integer))
    }

    pub fn integers_mod(m: u64) -> Arc<BaseRing> {
        Arc::new(BaseRing::Coefficient(ScalarKind::IntegerMod(m)))
    }

    pub fn graded_poly(field: ScalarKind, vars: Vec<(&str, i64)>) -> Result<Arc<BaseRing>> {
        if !field.is_field() {
            return Err(Error::UnsupportedScalar(
                "polynomial coefficients must form a field".into(),
            ));
        }
        for (n, w) in &vars {
            if *w < 1 {
                return Err(Error::Invalid(format!("variable {n} has weight {w} < 1")));
            }
        }
        Ok(Arc::new(BaseRing::GradedPoly(GradedPoly {
            field,
            vars: vars.into_iter().map(|(n, w)| (n.to_string(), w)).collect(),
        })))
    }

    pub fn finite_algebra(
        field: ScalarKind,
        basis: Vec<&str>,
        mult: Vec<Vec<Vec<Scalar>>>,
        unit: Vec<Scalar>,
    ) -> Result<Arc<BaseRing>> {
        let alg = FiniteAlgebra {
            field,
            basis: basis.into_iter().map(|s| s.to_string()).collect(),
            mult,
            unit,
        };
        alg.check()?;
        Ok(Arc::new(BaseRing::FiniteAlgebra(alg)))
    }

    /// Q[x]/(x^k) with basis 1, x, ..., x^(k-1). A convenient corpus algebra.
    pub fn truncated_poly_algebra(field: ScalarKind, k: usize) -> Result<Arc<BaseRing>> {
        let zero = field.zero();
        let one = field.one();
        let mut mult = vec![vec![vec![zero.clone(); k]; k]; k];
        for i in 0..k {
            for j in 0..k {
                if i + j < k {
                    mult[i][j][i + j] = one.clone();
                }
            }
        }
        let mut unit = vec![zero; k];
        unit[0] = one;
        let basis: Vec<String> = (0..k)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            })
            .collect();
        let alg = FiniteAlgebra {
            field,
            basis,
            mult,
            unit,
        };
        alg.check()?;
        Ok(Arc::new(BaseRing::FiniteAlgebra(alg)))
    }

    pub fn scalar_kind(&self) -> ScalarKind {
        match self {
            BaseRing::Coefficient(k) => k.clone(),
            BaseRing::FiniteAlgebra(a) => a.field.clone(),
            BaseRing::GradedPoly(p) => p.field.clone(),
        }
    }

    /// The scalar kind used by per-degree linear algebra for this backend.
    pub fn linear_kind(&self) -> ScalarKind {
        self.scalar_kind()
    }

    pub fn is_integral_backend(&self) -> bool {
        matches!(
            self,
            BaseRing::Coefficient(ScalarKind::Integer) | BaseRing::Coefficient(ScalarKind::IntegerMod(_))
        )
    }

    pub fn is_graded(&self) -> bool {
        matches!(self, BaseRing::GradedPoly(_))
    }

    pub fn zero(self: &Arc<Self>) -> RingElement {
        RingElement {
            ring: self.clone(),
            payload: match &**self {
                BaseRing::Coefficient(k) => Payload::Scalar(k.zero()),
                BaseRing::FiniteAlgebra(a) => {
                    Payload::AlgVec(vec![a.field.zero(); a.basis.len()])
                }
                BaseRing::GradedPoly(_) => Payload::Poly(Poly::default()),
            },
        }
    }

    pub fn one(self: &Arc<Self>) -> RingElement {
        match &**self {
            BaseRing::Coefficient(k) => RingElement {
                ring: self.clone(),
                payload: Payload::Scalar(k.one()),
            },
            BaseRing::FiniteAlgebra(a) => RingElement {
                ring: self.clone(),
                payload: Payload::AlgVec(a.unit.clone()),
            },
            BaseRing::GradedPoly(p) => {
                let mut m = Poly::default();
                if !p.field.one().is_zero() {
                    m.terms.insert(Monomial(vec![0; p.vars.len()]), p.field.one());
                }
                RingElement {
                    ring: self.clone(),
                    payload: Payload::Poly(m),
                }
            }
        }
    }

    pub fn from_i64(self: &Arc<Self>, n: i64) -> RingElement {
        let one = self.one();
        match &one.payload {
            Payload::Scalar(_) => RingElement {
                ring: self.clone(),
                payload: Payload::Scalar(self.scalar_kind().from_i64(n)),
            },
            _ => one.scale(&self.scalar_kind().from_i64(n)).expect("same kind"),
        }
    }

    pub fn var(self: &Arc<Self>, idx: usize) -> Result<RingElement> {
        match &**self {
            BaseRing::GradedPoly(p) => {
                if idx >= p.vars.len() {
                    return Err(Error::Invalid(format!("no variable #{idx}")));
                }
                let mut e = vec![0u32; p.vars.len()];
                e[idx] = 1;
                let mut poly = Poly::default();
                poly.terms.insert(Monomial(e), p.field.one());
                Ok(RingElement {
                    ring: self.clone(),
                    payload: Payload::Poly(poly),
                })
            }
            _ => Err(Error::UnsupportedBackend("variables need a polynomial ring".into())),
        }
    }

    pub fn basis_element(self: &Arc<Self>, idx: usize) -> Result<RingElement> {
        match &**self {
            BaseRing::FiniteAlgebra(a) => {
                let mut v = vec![a.field.zero(); a.basis.len()];
                v[idx] = a.field.one();
                Ok(RingElement {
                    ring: self.clone(),
                    payload: Payload::AlgVec(v),
                })
            }
            _ => Err(Error::UnsupportedBackend("basis elements need a finite algebra".into())),
        }
    }

    /// Monomials of exact total weight `w` (graded polynomial backend).
    pub fn monomials_of_weight(&self, w: i64) -> Vec<Monomial> {
        match self {
            BaseRing::GradedPoly(p) => {
                let mut out = Vec::new();
                let mut cur = vec![0u32; p.vars.len()];
                enum_monomials(p, 0, w, &mut cur, &mut out);
                out
            }
            _ => {
                if w == 0 {
                    vec![Monomial(Vec::new())]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

fn enum_monomials(p: &GradedPoly, i: usize, rem: i64, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if rem < 0 {
        return;
    }
    if i == p.vars.len() {
        if rem == 0 {
            out.push(Monomial(cur.clone()));
        }
        return;
    }
    if i + 1 == p.vars.len() {
        let w = p.vars[i].1;
        if rem % w == 0 {
            cur[i] = (rem / w) as u32;
            out.push(Monomial(cur.clone()));
            cur[i] = 0;
        }
        return;
    }
    let w = p.vars[i].1;
    let max = rem / w;
    for e in 0..=max {
        cur[i] = e as u32;
        enum_monomials(p, i + 1, rem - e * w, cur, out);
    }
    cur[i] = 0;
}

impl FiniteAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mul_vec(&self, a: &[Scalar], b: &[Scalar]) -> Result<Vec<Scalar>> {
        let d = self.dim();
        let mut out = vec![self.field.zero(); d];
        for i in 0..d {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if b[j].is_zero() {
                    continue;
                }
                let c = a[i].mul(&b[j])?;
                for (k, s) in self.mult[i][j].iter().enumerate() {
                    if !s.is_zero() {
                        out[k] = out[k].add(&c.mul(s)?)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exhaustive associativity / commutativity / unit check on basis triples.
    pub fn check(&self) -> Result<()> {
        let d = self.dim();
        if self.mult.len() != d || self.unit.len() != d {
            return Err(Error::Invalid("structure tensor shape mismatch".into()));
        }
        let e: Vec<Vec<Scalar>> = (0..d)
            .map(|i| {
                let mut v = vec![self.field.zero(); d];
                v[i] = self.field.one();
                v
            })
            .collect();
        for i in 0..d {
            for j in 0..d {
                if self.mul_vec(&e[i], &e[j])? != self.mul_vec(&e[j], &e[i])? {
                    return Err(Error::Invalid(format!("not commutative at ({i},{j})")));
                }
                for k in 0..d {
                    let l = self.mul_vec(&self.mul_vec(&e[i], &e[j])?, &e[k])?;
                    let r = self.mul_vec(&e[i], &self.mul_vec(&e[j], &e[k])?)?;
                    if l != r {
                        return Err(Error::Invalid(format!("not associative at ({i},{j},{k})")));
                    }
                }
            }
            if self.mul_vec(&self.unit, &e[i])? != e[i] {
                return Err(Error::Invalid(format!("unit fails on basis {i}")));
            }
        }
        Ok(())
    }
}

/// Exponent vector; length equals the ambient variable count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn weight(&self, ring: &GradedPoly) -> i64 {
        self.0
            .iter()
            .zip(&ring.vars)
            .map(|(e, (_, w))| *e as i64 * w)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Scalar>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Scalar(Scalar),
    AlgVec(Vec<Scalar>),
    Poly(Poly),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElement {
    pub ring: Arc<BaseRing>,
    pub payload: Payload,
}

impl RingElement {
    pub fn same_ring(&self, other: &RingElement) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.payload {
            Payload::Scalar(s) => s.is_zero(),
            Payload::AlgVec(v) => v.iter().all(|s| s.is_zero()),
            Payload::Poly(p) => p.terms.is_empty(),
        }
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.same_ring(other)?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Scalar(a), Payload::Scalar(b)) => Payload::Scalar(a.add(b)?),
            (Payload::AlgVec(a), Payload::AlgVec(b)) => {
                let mut out = Vec::with_capacity(a.len());
                for (x, y) in a.iter().zip(b) {
                    out.push(x.add(y)?);
                }
                Payload::AlgVec(out)
            }
            (Payload::Poly(a), Payload::Poly(b)) => {
                let mut out = a.clone();
                for (m, c) in &b.terms {
                    let v = match out.terms.get(m) {
                        Some(x) => x.add(c)?,
                        None => c.clone(),
                    };
                    if v.is_zero() {
                        out.terms.remove(m);
                    } else {
                        out.terms.insert(m.clone(), v);
                    }
                }
                Payload::Poly(out)
            }
            _ => return Err(Error::RingMismatch),
        };
        Ok(RingElement { ring: self.ring.clone(), payload })
    }

    pub fn neg(&self) -> RingElement {
        let payload = match &self.payload {
            Payload::Scalar(a) => Payload::Scalar(a.neg()),
            Payload::AlgVec(a) => Payload::AlgVec(a.iter().map(|s| s.neg()).collect()),
            Payload::Poly(a) => Payload::Poly(Poly {
                terms: a.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
            }),
        };
        RingElement { ring: self.ring.clone(), payload }
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        self.same_ring(other)?;
        let payload = match (&self.payload, &other.payload) {
            (Payload::Scalar(a), Payload::Scalar(b)) => Payload::Scalar(a.mul(b)?),
            (Payload::AlgVec(a), Payload::AlgVec(b)) => {
                let BaseRing::FiniteAlgebra(alg) = &*self.ring else {
                    return Err(Error::RingMismatch);
                };
                Payload::AlgVec(alg.mul_vec(a, b)?)
            }
            (Payload::Poly(a), Payload::Poly(b)) => {
                let mut out = Poly::default();
                for (ma, ca) in &a.terms {
                    for (mb, cb) in &b.terms {
                        let m = ma.mul(mb);
                        let c = ca.mul(cb)?;
                        let v = match out.terms.get(&m) {
                            Some(x) => x.add(&c)?,
                            None => c,
                        };
                        if v.is_zero() {
                            out.terms.remove(&m);
                        } else {
                            out.terms.insert(m, v);
                        }
                    }
                }
                Payload::Poly(out)
            }
            _ => return Err(Error::RingMismatch),
        };
        Ok(RingElement { ring: self.ring.clone(), payload })
    }

    pub fn scale(&self, s: &Scalar) -> Result<RingElement> {
        let payload = match &self.payload {
            Payload::Scalar(a) => Payload::Scalar(a.mul(s)?),
            Payload::AlgVec(a) => {
                let mut out = Vec::with_capacity(a.len());
                for x in a {
                    out.push(x.mul(s)?);
                }
                Payload::AlgVec(out)
            }
            Payload::Poly(a) => {
                let mut terms = BTreeMap::new();
                for (m, c) in &a.terms {
                    let v = c.mul(s)?;
                    if !v.is_zero() {
                        terms.insert(m.clone(), v);
                    }
                }
                Payload::Poly(Poly { terms })
            }
        };
        Ok(RingElement { ring: self.ring.clone(), payload })
    }

    pub fn pow(&self, n: u32) -> Result<RingElement> {
        let mut out = self.ring.one();
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Weight of a homogeneous element; None for zero or inhomogeneous.
    pub fn weight(&self) -> Option<i64> {
        match &self.payload {
            Payload::Poly(p) => {
                let BaseRing::GradedPoly(r) = &*self.ring else { return None };
                let mut w = None;
                for m in p.terms.keys() {
                    let mw = m.weight(r);
                    match w {
                        None => w = Some(mw),
                        Some(x) if x != mw => return None,
                        _ => {}
                    }
                }
                w
            }
            _ => {
                if self.is_zero() {
                    None
                } else {
                    Some(0)
                }
            }
        }
    }

    pub fn is_homogeneous_of(&self, w: i64) -> bool {
        self.is_zero() || self.weight() == Some(w)
    }

    /// Coordinates with respect to the listed monomials (polynomial backend)
    /// or the algebra basis. Errors if a term falls outside the basis.
    pub fn coords(&self, basis: &[Monomial]) -> Result<Vec<Scalar>> {
        let kind = self.ring.scalar_kind();
        match &self.payload {
            Payload::Poly(p) => {
                let mut out = vec![kind.zero(); basis.len()];
                for (m, c) in &p.terms {
                    match basis.iter().position(|b| b == m) {
                        Some(i) => out[i] = c.clone(),
                        None => {
                            return Err(Error::Internal("monomial outside basis".into()));
                        }
                    }
                }
                Ok(out)
            }
            Payload::AlgVec(v) => Ok(v.clone()),
            Payload::Scalar(s) => Ok(vec![s.clone()]),
        }
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Scalar(s) => write!(f, "{s}"),
            Payload::AlgVec(v) => {
                let BaseRing::FiniteAlgebra(a) = &*self.ring else {
                    return write!(f, "?");
                };
                let mut first = true;
                for (i, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}*{}", c, a.basis[i])?;
                    first = false;
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
            Payload::Poly(p) => {
                let BaseRing::GradedPoly(r) = &*self.ring else {
                    return write!(f, "?");
                };
                if p.terms.is_empty() {
                    return write!(f, "0");
                }
                let mut first = true;
                for (m, c) in &p.terms {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "{c}")?;
                    for (e, (name, _)) in m.0.iter().zip(&r.vars) {
                        match e {
                            0 => {}
                            1 => write!(f, "*{name}")?,
                            _ => write!(f, "*{name}^{e}")?,
                        }
                    }
                    first = false;
                }
                Ok(())
            }
        }
    }
}

/// A ring homomorphism determined by where variables (or basis data) go,
/// together with the coefficient coercion Z -> Z/m when needed.
#[derive(Debug, Clone)]
pub struct RingMap {
    pub source: Arc<BaseRing>,
    pub target: Arc<BaseRing>,
    /// images of source polynomial variables; empty for coefficient sources
    pub var_images: Vec<RingElement>,
}

impl RingMap {
    pub fn identity(ring: &Arc<BaseRing>) -> RingMap {
        let var_images = match &**ring {
            BaseRing::GradedPoly(p) => (0..p.vars.len())
                .map(|i| ring.var(i).expect("var"))
                .collect(),
            _ => Vec::new(),
        };
        RingMap {
            source: ring.clone(),
            target: ring.clone(),
            var_images,
        }
    }

    pub fn new(
        source: Arc<BaseRing>,
        target: Arc<BaseRing>,
        var_images: Vec<RingElement>,
    ) -> Result<RingMap> {
        if let BaseRing::GradedPoly(p) = &*source {
            if var_images.len() != p.vars.len() {
                return Err(Error::Invalid("variable image count mismatch".into()));
            }
        }
        for im in &var_images {
            if im.ring != target {
                return Err(Error::RingMismatch);
            }
        }
        Ok(RingMap { source, target, var_images })
    }

    fn map_scalar(&self, s: &Scalar) -> Result<Scalar> {
        let tk = self.target.scalar_kind();
        if s.kind() == tk {
            return Ok(s.clone());
        }
        match (s, &tk) {
            (Scalar::Int(n), ScalarKind::IntegerMod(m)) => Ok(Scalar::Mod {
                m: *m,
                v: num_integer::Integer::mod_floor(n, &num_bigint::BigInt::from(*m)),
            }),
            _ => Err(Error::UnsupportedScalar(format!(
                "no coercion {:?} -> {:?}",
                s.kind(),
                tk
            ))),
        }
    }

    pub fn apply(&self, e: &RingElement) -> Result<RingElement> {
        if e.ring != self.source {
            return Err(Error::RingMismatch);
        }
        match &e.payload {
            Payload::Scalar(s) => {
                let t = self.map_scalar(s)?;
                self.target.one().scale(&t)
            }
            Payload::Poly(p) => {
                let mut out = self.target.zero();
                for (m, c) in &p.terms {
                    let mut term = self.target.one().scale(&self.map_scalar(c)?)?;
                    for (i, ex) in m.0.iter().enumerate() {
                        if *ex > 0 {
                            term = term.mul(&self.var_images[i].pow(*ex)?)?;
                        }
                    }
                    out = out.add(&term)?;
                }
                Ok(out)
            }
            Payload::AlgVec(_) => Err(Error::UnsupportedBackend(
                "ring maps out of finite algebras are not supported".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_arithmetic_normal_form() {
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let p = x.add(&y).unwrap();
        let q = p.mul(&p).unwrap(); // x^2 + 2xy + y^2
        let Payload::Poly(poly) = &q.payload else { panic!() };
        assert_eq!(poly.terms.len(), 3);
        assert!(q.sub(&q).unwrap().is_zero());
        assert_eq!(q.weight(), Some(2));
    }

    #[test]
    fn monomial_enumeration_counts() {
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap();
        // degree d in 2 variables: d+1 monomials
        for d in 0..6 {
            assert_eq!(r.monomials_of_weight(d).len(), (d + 1) as usize);
        }
        // weighted case
        let r2 = BaseRing::graded_poly(ScalarKind::Rational, vec![("u", 2)]).unwrap();
        assert_eq!(r2.monomials_of_weight(3).len(), 0);
        assert_eq!(r2.monomials_of_weight(4).len(), 1);
    }

    #[test]
    fn truncated_algebra_is_a_ring() {
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        let t2 = t.mul(&t).unwrap();
        assert!(!t2.is_zero());
        assert!(t2.mul(&t).unwrap().is_zero());
    }

    #[test]
    fn bad_algebra_rejected() {
        // "multiplication" that is not unital
        let k = ScalarKind::Rational;
        let bad = FiniteAlgebra {
            field: k.clone(),
            basis: vec!["1".into()],
            mult: vec![vec![vec![k.zero()]]],
            unit: vec![k.one()],
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn ring_map_reduction() {
        let z = BaseRing::integers();
        let z12 = BaseRing::integers_mod(12);
        let f = RingMap::new(z.clone(), z12.clone(), vec![]).unwrap();
        let e = z.from_i64(14);
        assert_eq!(f.apply(&e).unwrap(), z12.from_i64(2));
    }
}
