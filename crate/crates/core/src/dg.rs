//! Finitely presented non-positive graded-commutative DG-rings.
//!
//! A DG-ring is a base ring presenting the degree-0 part (base / rel0),
//! finitely many strictly negative generators (exterior in odd degree,
//! polynomial in even degree), and a differential given on generators and
//! extended by the Leibniz rule. d^2 = 0 and the Leibniz rule are checked on
//! generators at construction. Each graded slot A^{-n} is a finitely
//! generated free module over A^0, so the underlying complex is an honest
//! complex of presented modules over the base.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{ChainMap, Complex};
use crate::error::{Error, Result};
use crate::module::{Generator, ModuleMap, PresentedModule};
use crate::ring::{BaseRing, RingElement, RingMap};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgGenerator {
    pub name: String,
    /// cohomological degree, <= -1
    pub degree: i64,
    /// internal weight (0 over ungraded bases)
    pub weight: i64,
}

impl DgGenerator {
    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

/// Monomial in the DG generators: sorted (generator index, exponent) pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DgMonomial(pub Vec<(usize, u32)>);

impl DgMonomial {
    pub fn one() -> DgMonomial {
        DgMonomial(Vec::new())
    }

    pub fn degree(&self, gens: &[DgGenerator]) -> i64 {
        self.0.iter().map(|(i, e)| gens[*i].degree * *e as i64).sum()
    }

    pub fn weight(&self, gens: &[DgGenerator]) -> i64 {
        self.0.iter().map(|(i, e)| gens[*i].weight * *e as i64).sum()
    }

    fn single(i: usize) -> DgMonomial {
        DgMonomial(vec![(i, 1)])
    }
}

/// Element of a DG-ring: base-ring coefficients against DG monomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DgElement {
    pub terms: BTreeMap<DgMonomial, RingElement>,
}

impl DgElement {
    pub fn zero() -> DgElement {
        DgElement::default()
    }

    pub fn from_base(c: RingElement) -> DgElement {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(DgMonomial::one(), c);
        }
        DgElement { terms }
    }

    pub fn generator(i: usize, ring: &DgRing) -> DgElement {
        let mut terms = BTreeMap::new();
        terms.insert(DgMonomial::single(i), ring.base.one());
        DgElement { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &DgElement) -> Result<DgElement> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
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
        Ok(out)
    }

    pub fn neg(&self) -> DgElement {
        DgElement {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &DgElement) -> Result<DgElement> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RingElement) -> Result<DgElement> {
        let mut out = DgElement::zero();
        for (m, x) in &self.terms {
            let v = x.mul(c)?;
            if !v.is_zero() {
                out.terms.insert(m.clone(), v);
            }
        }
        Ok(out)
    }

    /// Common cohomological degree; None for zero or mixed elements.
    pub fn degree(&self, gens: &[DgGenerator]) -> Option<i64> {
        let mut d = None;
        for m in self.terms.keys() {
            let md = m.degree(gens);
            match d {
                None => d = Some(md),
                Some(x) if x != md => return None,
                _ => {}
            }
        }
        d
    }
}

/// Multiply two DG monomials with the Koszul sign.
/// Returns None when an odd generator squares to zero.
fn mul_monomials(
    a: &DgMonomial,
    b: &DgMonomial,
    gens: &[DgGenerator],
) -> Option<(DgMonomial, i32)> {
    // sign: moving each odd factor of b past the odd factors of a with
    // larger generator index
    let mut sign = 1i32;
    let odd_a: Vec<usize> = a
        .0
        .iter()
        .filter(|(i, _)| gens[*i].is_odd())
        .map(|(i, _)| *i)
        .collect();
    for (bi, be) in &b.0 {
        if gens[*bi].is_odd() {
            debug_assert!(*be <= 1);
            let crossings = odd_a.iter().filter(|ai| **ai > *bi).count();
            if crossings % 2 == 1 {
                sign = -sign;
            }
            if odd_a.contains(bi) {
                return None; // odd square
            }
        }
    }
    let mut exps: BTreeMap<usize, u32> = a.0.iter().cloned().collect();
    for (bi, be) in &b.0 {
        *exps.entry(*bi).or_insert(0) += be;
    }
    for (i, e) in &exps {
        if gens[*i].is_odd() && *e > 1 {
            return None;
        }
    }
    Some((DgMonomial(exps.into_iter().collect()), sign))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgRing {
    /// ring presenting the degree-0 part: A^0 = base / rel0
    pub base: Arc<BaseRing>,
    pub rel0: Vec<RingElement>,
    pub gens: Vec<DgGenerator>,
    /// d(gen i), an element of degree gens[i].degree + 1
    pub diff: Vec<DgElement>,
    /// slots are maintained for degrees >= -depth
    pub depth: i64,
}

impl DgRing {
    /// An ordinary ring (base / rel0) viewed as a DG-ring in degree 0.
    pub fn from_ring(base: Arc<BaseRing>, rel0: Vec<RingElement>, depth: i64) -> Result<DgRing> {
        let ring = DgRing { base, rel0, gens: Vec::new(), diff: Vec::new(), depth };
        ring.check()?;
        Ok(ring)
    }

    /// Koszul DG-ring: exterior generators in degree -1 with d(xi_i) = f_i.
    pub fn koszul(base: Arc<BaseRing>, elements: Vec<RingElement>, depth: i64) -> Result<DgRing> {
        let mut gens = Vec::new();
        let mut diff = Vec::new();
        for (i, f) in elements.iter().enumerate() {
            if f.ring != base {
                return Err(Error::RingMismatch);
            }
            gens.push(DgGenerator {
                name: format!("xi{i}"),
                degree: -1,
                weight: f.weight().unwrap_or(0),
            });
            diff.push(DgElement::from_base(f.clone()));
        }
        let ring = DgRing { base, rel0: Vec::new(), gens, diff, depth };
        ring.check()?;
        Ok(ring)
    }

    pub fn add_generator(&mut self, g: DgGenerator, d: DgElement) {
        self.gens.push(g);
        self.diff.push(d);
    }

    pub fn mul(&self, a: &DgElement, b: &DgElement) -> Result<DgElement> {
        let mut out = DgElement::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some((m, sign)) = mul_monomials(ma, mb, &self.gens) {
                    let mut c = ca.mul(cb)?;
                    if sign < 0 {
                        c = c.neg();
                    }
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
        }
        Ok(out)
    }

    /// Differential extended by the Leibniz rule.
    pub fn d(&self, a: &DgElement) -> Result<DgElement> {
        let mut out = DgElement::zero();
        for (m, c) in &a.terms {
            let dm = self.d_monomial(m)?;
            out = out.add(&dm.scale(c)?)?;
        }
        Ok(out)
    }

    fn d_monomial(&self, m: &DgMonomial) -> Result<DgElement> {
        // d(g^e * rest) = e g^{e-1} d(g) rest + (-1)^{e |g|} g^e d(rest)
        if m.0.is_empty() {
            return Ok(DgElement::zero());
        }
        let (i, e) = m.0[0];
        let rest = DgMonomial(m.0[1..].to_vec());
        let g = DgMonomial::single(i);
        let g_pow_less = if e > 1 {
            DgMonomial(vec![(i, e - 1)])
        } else {
            DgMonomial::one()
        };
        // first summand: e * g^{e-1} * d(g) * rest
        let mut first = DgElement::zero();
        {
            let mut lead = DgElement::zero();
            lead.terms.insert(g_pow_less.clone(), self.base.from_i64(e as i64));
            let t = self.mul(&lead, &self.diff[i])?;
            let rest_elem = {
                let mut r = DgElement::zero();
                r.terms.insert(rest.clone(), self.base.one());
                r
            };
            first = first.add(&self.mul(&t, &rest_elem)?)?;
        }
        // second summand: (-1)^{e*|g|} g^e d(rest)
        let mut second = {
            let mut lead = DgElement::zero();
            lead.terms.insert(DgMonomial(vec![(i, e)]), self.base.one());
            self.mul(&lead, &self.d_monomial(&rest)?)?
        };
        let sign = (self.gens[i].degree * e as i64).rem_euclid(2);
        if sign == 1 {
            second = second.neg();
        }
        let _ = g;
        first.add(&second)
    }

    /// Strictly negative monomial basis of the slot A^{-n} over A^0.
    pub fn slot_monomials(&self, n: i64) -> Vec<DgMonomial> {
        assert!(n >= 0);
        if n == 0 {
            return vec![DgMonomial::one()];
        }
        let mut out = Vec::new();
        let mut cur: Vec<(usize, u32)> = Vec::new();
        self.enum_monomials(0, -n, &mut cur, &mut out);
        out.sort();
        out
    }

    fn enum_monomials(
        &self,
        gi: usize,
        remaining: i64,
        cur: &mut Vec<(usize, u32)>,
        out: &mut Vec<DgMonomial>,
    ) {
        if remaining > 0 {
            return;
        }
        if gi == self.gens.len() {
            if remaining == 0 && !cur.is_empty() {
                out.push(DgMonomial(cur.clone()));
            }
            return;
        }
        let g = &self.gens[gi];
        let max_e = if g.is_odd() {
            1
        } else {
            (remaining / g.degree).max(0) as u32
        };
        for e in 0..=max_e {
            if e > 0 {
                cur.push((gi, e));
            }
            self.enum_monomials(gi + 1, remaining - g.degree * e as i64, cur, out);
            if e > 0 {
                cur.pop();
            }
        }
    }

    /// The slot A^{-n} as a presented module over the base ring.
    pub fn slot_module(&self, n: i64) -> PresentedModule {
        let monos = self.slot_monomials(n);
        let gens: Vec<Generator> = monos
            .iter()
            .map(|m| Generator {
                name: format!("[{}]", self.monomial_name(m)),
                weight: m.weight(&self.gens),
            })
            .collect();
        let zero = self.base.zero();
        let mut rels = Vec::new();
        for (gi, _) in monos.iter().enumerate() {
            for r in &self.rel0 {
                let mut col = vec![zero.clone(); monos.len()];
                col[gi] = r.clone();
                rels.push(col);
            }
        }
        PresentedModule { ring: self.base.clone(), gens, rels }
    }

    pub fn monomial_name(&self, m: &DgMonomial) -> String {
        if m.0.is_empty() {
            return "1".into();
        }
        m.0.iter()
            .map(|(i, e)| {
                if *e == 1 {
                    self.gens[*i].name.clone()
                } else {
                    format!("{}^{}", self.gens[*i].name, e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Column of a slot element against the monomial basis of A^{-n}.
    pub fn element_column(&self, e: &DgElement, n: i64) -> Result<Vec<RingElement>> {
        let monos = self.slot_monomials(n);
        let mut out = vec![self.base.zero(); monos.len()];
        for (m, c) in &e.terms {
            if m.degree(&self.gens) != -n {
                return Err(Error::Internal(format!(
                    "element term of degree {} in slot {}",
                    m.degree(&self.gens),
                    -n
                )));
            }
            let pos = monos
                .iter()
                .position(|x| x == m)
                .ok_or_else(|| Error::Internal("monomial outside slot".into()))?;
            out[pos] = out[pos].add(c)?;
        }
        Ok(out)
    }

    pub fn column_to_element(&self, col: &[RingElement], n: i64) -> DgElement {
        let monos = self.slot_monomials(n);
        let mut out = DgElement::zero();
        for (c, m) in col.iter().zip(&monos) {
            if !c.is_zero() {
                out.terms.insert(m.clone(), c.clone());
            }
        }
        out
    }

    /// Slot differential A^{-n} -> A^{-n+1} as a module map.
    pub fn slot_diff(&self, n: i64) -> Result<ModuleMap> {
        let src = self.slot_module(n);
        let tgt = self.slot_module(n - 1);
        let monos = self.slot_monomials(n);
        let mut cols = Vec::with_capacity(monos.len());
        for m in &monos {
            let dm = self.d_monomial(m)?;
            cols.push(self.element_column(&dm, n - 1)?);
        }
        Ok(ModuleMap { source: src, target: tgt, cols })
    }

    /// The underlying complex of A in degrees [-depth, 0].
    pub fn underlying_complex(&self) -> Result<Complex> {
        let mut terms = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for n in 0..=self.depth {
            let m = self.slot_module(n);
            if !m.gens.is_empty() {
                terms.insert(-n, m);
            }
        }
        for n in 1..=self.depth {
            if terms.contains_key(&(-n)) {
                diffs.insert(-n, self.slot_diff(n)?);
            }
        }
        Complex::new(self.base.clone(), terms, diffs)
    }

    /// Presentation of H^0(A) = base / (rel0 + d(degree -1 generators)).
    pub fn h0_presentation(&self) -> PresentedModule {
        let mut rels = self.rel0.clone();
        for (i, g) in self.gens.iter().enumerate() {
            if g.degree == -1 {
                for (m, c) in &self.diff[i].terms {
                    if m.0.is_empty() {
                        rels.push(c.clone());
                    }
                }
            }
        }
        PresentedModule::cyclic(&self.base, rels)
    }

    /// Ideal generators of im(d^{-1}) inside A^0 (base elements).
    pub fn h0_extra_relations(&self) -> Vec<RingElement> {
        let mut out = Vec::new();
        for (i, g) in self.gens.iter().enumerate() {
            if g.degree == -1 {
                for (m, c) in &self.diff[i].terms {
                    if m.0.is_empty() && !c.is_zero() {
                        out.push(c.clone());
                    }
                }
            }
        }
        out
    }

    pub fn h_cohomology(&self, iwindow: Option<Window>) -> Result<crate::complex::CohomTable> {
        self.underlying_complex()?.cohomology_table(iwindow)
    }

    /// d^2 = 0 on generators and the Leibniz rule on generator products, both
    /// exact (zero modulo the slot relations).
    pub fn check(&self) -> Result<()> {
        if self.gens.len() != self.diff.len() {
            return Err(Error::Invalid("generator/differential count mismatch".into()));
        }
        for (i, g) in self.gens.iter().enumerate() {
            if g.degree > -1 {
                return Err(Error::Invalid(format!("generator {} not in negative degree", g.name)));
            }
            if g.degree < -self.depth {
                return Err(Error::Invalid(format!(
                    "generator {} below truncation depth {}",
                    g.name, self.depth
                )));
            }
            // differential degree and weight compatibility
            if let Some(d) = self.diff[i].degree(&self.gens) {
                if d != g.degree + 1 {
                    return Err(Error::Invalid(format!(
                        "d({}) has degree {}, expected {}",
                        g.name,
                        d,
                        g.degree + 1
                    )));
                }
            }
            if self.base.is_graded() {
                for (m, c) in &self.diff[i].terms {
                    let w = m.weight(&self.gens) + c.weight().unwrap_or(0);
                    if !c.is_zero() && w != g.weight {
                        return Err(Error::Invalid(format!(
                            "d({}) not homogeneous of weight {}",
                            g.name, g.weight
                        )));
                    }
                }
            }
            // d^2 = 0
            let dd = self.d(&self.diff[i])?;
            if !self.element_is_zero(&dd, -(g.degree + 2))? {
                return Err(Error::Invalid(format!("d^2 != 0 on generator {}", g.name)));
            }
        }
        // Leibniz on generator pairs
        for i in 0..self.gens.len() {
            for j in 0..self.gens.len() {
                let gi = DgElement::generator(i, self);
                let gj = DgElement::generator(j, self);
                let prod = self.mul(&gi, &gj)?;
                let lhs = self.d(&prod)?;
                let mut rhs = self.mul(&self.diff[i], &gj)?;
                let mut second = self.mul(&gi, &self.diff[j])?;
                if self.gens[i].degree.rem_euclid(2) == 1 {
                    second = second.neg();
                }
                rhs = rhs.add(&second)?;
                let diff = lhs.sub(&rhs)?;
                let n = -(self.gens[i].degree + self.gens[j].degree + 1);
                if n >= 0 && !self.element_is_zero(&diff, n)? {
                    return Err(Error::Invalid(format!(
                        "Leibniz fails on {} * {}",
                        self.gens[i].name, self.gens[j].name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Zero test in the slot A^{-n} (modulo rel0 multiples).
    pub fn element_is_zero(&self, e: &DgElement, n: i64) -> Result<bool> {
        if e.is_zero() {
            return Ok(true);
        }
        if n < 0 {
            // positive degrees vanish identically
            return Ok(true);
        }
        let m = self.slot_module(n);
        let col = self.element_column(e, n)?;
        crate::module::element_is_zero_in(&m, &col)
    }
}

/// Morphism of DG-rings: a base-ring map plus images of the DG generators.
#[derive(Debug, Clone)]
pub struct DgMorphism {
    pub source: DgRing,
    pub target: DgRing,
    pub base_map: RingMap,
    pub gen_images: Vec<DgElement>,
}

impl DgMorphism {
    pub fn new(
        source: DgRing,
        target: DgRing,
        base_map: RingMap,
        gen_images: Vec<DgElement>,
    ) -> Result<DgMorphism> {
        let f = DgMorphism { source, target, base_map, gen_images };
        f.check()?;
        Ok(f)
    }

    pub fn identity(a: &DgRing) -> DgMorphism {
        DgMorphism {
            source: a.clone(),
            target: a.clone(),
            base_map: RingMap::identity(&a.base),
            gen_images: (0..a.gens.len()).map(|i| DgElement::generator(i, a)).collect(),
        }
    }

    pub fn apply(&self, e: &DgElement) -> Result<DgElement> {
        let mut out = DgElement::zero();
        for (m, c) in &e.terms {
            let mut t = DgElement::from_base(self.base_map.apply(c)?);
            for (i, exp) in &m.0 {
                for _ in 0..*exp {
                    t = self.target.mul(&t, &self.gen_images[*i])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        // rel0 of the source must die in the target
        for r in &self.source.rel0 {
            let img = DgElement::from_base(self.base_map.apply(r)?);
            if !self.target.element_is_zero(&img, 0)? {
                return Err(Error::Invalid("morphism does not kill source relations".into()));
            }
        }
        for (i, g) in self.source.gens.iter().enumerate() {
            let img = &self.gen_images[i];
            if let Some(d) = img.degree(&self.target.gens) {
                if d != g.degree {
                    return Err(Error::Invalid(format!(
                        "image of {} has degree {}, expected {}",
                        g.name, d, g.degree
                    )));
                }
            }
            // d-compatibility: phi(d g) = d(phi g)
            let lhs = self.apply(&self.source.diff[i])?;
            let rhs = self.target.d(img)?;
            let diff = lhs.sub(&rhs)?;
            if !self.target.element_is_zero(&diff, -(g.degree + 1))? {
                return Err(Error::Invalid(format!(
                    "morphism does not commute with d on generator {}",
                    g.name
                )));
            }
        }
        Ok(())
    }

    /// The underlying chain map, available when source and target share the
    /// same base ring (e.g. quotient stages of a completion tower).
    pub fn underlying_chain_map(&self) -> Result<ChainMap> {
        let src = self.source.underlying_complex()?;
        let tgt = self.target.underlying_complex()?;
        let mut comps = BTreeMap::new();
        for n in 0..=self.source.depth {
            let sm = src.term(-n);
            if sm.gens.is_empty() {
                continue;
            }
            let tm = tgt.term(-n);
            let monos = self.source.slot_monomials(n);
            let mut cols = Vec::with_capacity(monos.len());
            for m in &monos {
                let e = {
                    let mut x = DgElement::zero();
                    x.terms.insert(m.clone(), self.source.base.one());
                    x
                };
                let img = self.apply(&e)?;
                cols.push(self.target.element_column(&img, n)?);
            }
            comps.insert(-n, ModuleMap { source: sm, target: tm, cols });
        }
        ChainMap::new(src, tgt, comps)
    }

    /// Matrix of the slot map A^{-n}_w -> B^{-n}_w against ambient slot bases
    /// (valid across different base rings).
    pub fn slot_matrix(
        &self,
        n: i64,
        w: i64,
        src_basis: &[(usize, crate::ring::Monomial)],
        tgt_module: &PresentedModule,
        tgt_basis: &[(usize, crate::ring::Monomial)],
    ) -> Result<crate::mat::Mat> {
        let kind = self.target.base.linear_kind();
        let src_monos = self.source.slot_monomials(n);
        let mut cols = Vec::with_capacity(src_basis.len());
        for (gi, base_mono) in src_basis {
            // element: base_mono * dg_mono(gi)
            let coeff = crate::module::monomial_element_for(&self.source.base, base_mono)?;
            let mut e = DgElement::zero();
            e.terms.insert(src_monos[*gi].clone(), coeff);
            let img = self.apply(&e)?;
            let col = self.target.element_column(&img, n)?;
            cols.push(crate::homalg::slot_coords(tgt_module, &col, tgt_basis)?);
        }
        let _ = w;
        Ok(crate::mat::Mat::from_cols(kind, tgt_basis.len(), cols))
    }
}

/// Ideal of definition: finitely many degree-0 representatives generating an
/// ideal of H^0(A).
#[derive(Debug, Clone)]
pub struct IdealOfDefinition {
    pub gens: Vec<RingElement>,
}

impl IdealOfDefinition {
    pub fn new(a: &DgRing, gens: Vec<RingElement>) -> Result<IdealOfDefinition> {
        for g in &gens {
            if g.ring != a.base {
                return Err(Error::RingMismatch);
            }
        }
        Ok(IdealOfDefinition { gens })
    }

    pub fn zero_ideal() -> IdealOfDefinition {
        IdealOfDefinition { gens: Vec::new() }
    }
}

/// A lift of an ideal of definition: degree-0 elements whose classes generate
/// the ideal in H^0(A).
#[derive(Debug, Clone)]
pub struct LiftChoice {
    pub elements: Vec<RingElement>,
}

impl LiftChoice {
    /// Checks x * H^0(A) = ideal (mutual membership), windowed over graded
    /// backends.
    pub fn new(
        a: &DgRing,
        ideal: &IdealOfDefinition,
        elements: Vec<RingElement>,
        iwindow: Option<Window>,
    ) -> Result<LiftChoice> {
        let h0 = a.h0_presentation();
        for e in &elements {
            if !ideal_membership(&h0, &ideal.gens, e, iwindow)? {
                return Err(Error::PreconditionFailed(
                    "lift element does not lie in the ideal of definition".into(),
                ));
            }
        }
        for g in &ideal.gens {
            if !ideal_membership(&h0, &elements, g, iwindow)? {
                return Err(Error::PreconditionFailed(
                    "ideal generator not reachable from the lift".into(),
                ));
            }
        }
        Ok(LiftChoice { elements })
    }
}

/// elem ∈ (gens) inside the cyclic module `h0` (= base / relations)?
pub fn ideal_membership(
    h0: &PresentedModule,
    gens: &[RingElement],
    elem: &RingElement,
    iwindow: Option<Window>,
) -> Result<bool> {
    if elem.is_zero() {
        return Ok(true);
    }
    if gens.is_empty() {
        return crate::module::element_is_zero_in_window(h0, &[elem.clone()], iwindow);
    }
    let ring = h0.ring.clone();
    // map free module on the gens into h0 and ask whether elem factors through
    let weights: Vec<i64> = gens.iter().map(|g| g.weight().unwrap_or(0)).collect();
    let src = PresentedModule {
        ring: ring.clone(),
        gens: weights
            .iter()
            .enumerate()
            .map(|(i, w)| Generator { name: format!("g{i}"), weight: *w })
            .collect(),
        rels: Vec::new(),
    };
    let f = ModuleMap {
        source: src,
        target: h0.clone(),
        cols: gens.iter().map(|g| vec![g.clone()]).collect(),
    };
    let esrc = PresentedModule {
        ring: ring.clone(),
        gens: vec![Generator { name: "e".into(), weight: elem.weight().unwrap_or(0) }],
        rels: Vec::new(),
    };
    let g = ModuleMap { source: esrc, target: h0.clone(), cols: vec![vec![elem.clone()]] };
    crate::tower::factors_through_image_pub(&g, &f, iwindow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::IsoInvariants;
    use crate::scalar::ScalarKind;

    fn qx() -> Arc<BaseRing> {
        BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap()
    }

    fn qxy() -> Arc<BaseRing> {
        BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap()
    }

    #[test]
    fn koszul_dgring_regular() {
        // K(Q[x]; x): H^0 = Q, H^{-1} = 0
        let r = qx();
        let x = r.var(0).unwrap();
        let a = DgRing::koszul(r, vec![x], 3).unwrap();
        let t = a.h_cohomology(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 4), dims: vec![1, 0, 0, 0, 0] })
        );
        assert!(t.get(&-1).is_none());
    }

    #[test]
    fn koszul_dgring_xy() {
        // K(Q[x,y]; xy): H^0 = Q[x,y]/(xy) (dims 1,2,2,2,...), H^{-1} = 0
        let r = qxy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let a = DgRing::koszul(r, vec![x.mul(&y).unwrap()], 3).unwrap();
        let t = a.h_cohomology(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 4), dims: vec![1, 2, 2, 2, 2] })
        );
        assert!(t.get(&-1).is_none());
    }

    #[test]
    fn koszul_dgring_zero_differential() {
        // K(Q[x]; 0): H^{-1} free of rank 1 over Q[x]
        let r = qx();
        let a = DgRing::koszul(r.clone(), vec![r.zero()], 3).unwrap();
        let t = a.h_cohomology(Some(Window::new(0, 3))).unwrap();
        assert_eq!(
            t.get(&-1),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 3), dims: vec![1, 1, 1, 1] })
        );
    }

    #[test]
    fn koszul_regular_pair() {
        // K(Q[x,y]; x, y): H^0 = Q, all higher vanish
        let r = qxy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let a = DgRing::koszul(r, vec![x, y], 3).unwrap();
        let t = a.h_cohomology(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 4), dims: vec![1, 0, 0, 0, 0] })
        );
        assert!(t.get(&-1).is_none());
        assert!(t.get(&-2).is_none());
    }

    #[test]
    fn dd_zero_enforced_on_dg() {
        // d(xi) = x with xi of weight 2 is inhomogeneous -> rejected
        let r = qx();
        let x = r.var(0).unwrap();
        let bad = DgRing {
            base: r.clone(),
            rel0: vec![],
            gens: vec![DgGenerator { name: "xi".into(), degree: -1, weight: 2 }],
            diff: vec![DgElement::from_base(x)],
            depth: 3,
        };
        assert!(bad.check().is_err());
    }

    #[test]
    fn exterior_square_zero() {
        let r = qxy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let a = DgRing::koszul(r, vec![x, y], 3).unwrap();
        let xi0 = DgElement::generator(0, &a);
        let xi1 = DgElement::generator(1, &a);
        assert!(a.mul(&xi0, &xi0).unwrap().is_zero());
        // anticommutativity
        let ab = a.mul(&xi0, &xi1).unwrap();
        let ba = a.mul(&xi1, &xi0).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn h0_of_graded_quotient() {
        // DG-ring Q[x]/(x^3) concentrated in degree 0
        let r = qx();
        let x = r.var(0).unwrap();
        let x3 = x.pow(3).unwrap();
        let a = DgRing::from_ring(r, vec![x3], 2).unwrap();
        let t = a.h_cohomology(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 4), dims: vec![1, 1, 1, 0, 0] })
        );
    }

    #[test]
    fn morphism_identity_and_augmentation() {
        let r = qx();
        let x = r.var(0).unwrap();
        let a = DgRing::koszul(r.clone(), vec![x.clone()], 3).unwrap();
        let id = DgMorphism::identity(&a);
        id.check().unwrap();
        // augmentation K(Q[x]; x) -> Q[x]/(x): xi |-> 0
        let target = DgRing::from_ring(r.clone(), vec![x], 3).unwrap();
        let aug = DgMorphism::new(
            a,
            target,
            RingMap::identity(&r),
            vec![DgElement::zero()],
        )
        .unwrap();
        let cm = aug.underlying_chain_map().unwrap();
        assert!(cm.is_quasi_iso(Some(Window::new(0, 3))).unwrap().quasi_iso);
    }

    #[test]
    fn lift_choice_validation() {
        let r = qxy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let a = DgRing::koszul(r.clone(), vec![x.mul(&y).unwrap()], 3).unwrap();
        let ideal = IdealOfDefinition::new(&a, vec![x.clone()]).unwrap();
        // (x) lifts fine
        assert!(
            LiftChoice::new(&a, &ideal, vec![x.clone()], Some(Window::new(0, 6))).is_ok()
        );
        // (y) does not generate (x) in H^0
        assert!(
            LiftChoice::new(&a, &ideal, vec![y.clone()], Some(Window::new(0, 6))).is_err()
        );
    }
}
