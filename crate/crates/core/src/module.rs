//! Finitely presented modules and module maps over the ring backends.
//!
//! A module is a cokernel presentation: free module on weighted generators
//! modulo the span of relation columns. Over Z and Z/m everything reduces to
//! Smith normal form; over field backends (graded polynomial rings, finite
//! algebras, plain fields) computations run degree by degree inside a window.

use num_bigint::BigInt;
use num_traits::Zero;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat::{self, Mat};
use crate::ring::{BaseRing, Monomial, Payload, RingElement};
use crate::scalar::ScalarKind;
use crate::smith::{self, ZMat};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresentedModule {
    pub ring: Arc<BaseRing>,
    pub gens: Vec<Generator>,
    /// relation columns; each column has one entry per generator
    pub rels: Vec<Vec<RingElement>>,
}

/// Iso-invariant record used to certify "isomorphic on a window" claims.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum IsoInvariants {
    /// invariant factors (>1, in divisibility order) plus free rank
    IntegerFactors { torsion: Vec<BigInt>, rank: usize },
    /// Hilbert function on the window
    Hilbert { window: Window, dims: Vec<usize> },
    /// total dimension over the coefficient field
    TotalDim(usize),
}

impl IsoInvariants {
    pub fn is_zero(&self) -> bool {
        match self {
            IsoInvariants::IntegerFactors { torsion, rank } => torsion.is_empty() && *rank == 0,
            IsoInvariants::Hilbert { dims, .. } => dims.iter().all(|d| *d == 0),
            IsoInvariants::TotalDim(d) => *d == 0,
        }
    }

    /// Total dimension when the record is field-valued, for cross-backend
    /// comparisons between graded and finite-algebra presentations.
    pub fn total_dim(&self) -> Option<usize> {
        match self {
            IsoInvariants::Hilbert { dims, .. } => Some(dims.iter().sum()),
            IsoInvariants::TotalDim(d) => Some(*d),
            IsoInvariants::IntegerFactors { .. } => None,
        }
    }
}

impl PresentedModule {
    pub fn free(ring: &Arc<BaseRing>, gens: Vec<(&str, i64)>) -> PresentedModule {
        PresentedModule {
            ring: ring.clone(),
            gens: gens
                .into_iter()
                .map(|(n, w)| Generator { name: n.to_string(), weight: w })
                .collect(),
            rels: Vec::new(),
        }
    }

    pub fn zero(ring: &Arc<BaseRing>) -> PresentedModule {
        PresentedModule { ring: ring.clone(), gens: Vec::new(), rels: Vec::new() }
    }

    /// Cyclic module ring/(relations).
    pub fn cyclic(ring: &Arc<BaseRing>, rels: Vec<RingElement>) -> PresentedModule {
        PresentedModule {
            ring: ring.clone(),
            gens: vec![Generator { name: "e".into(), weight: 0 }],
            rels: rels.into_iter().map(|r| vec![r]).collect(),
        }
    }

    pub fn with_relations(mut self, rels: Vec<Vec<RingElement>>) -> Result<PresentedModule> {
        for col in &rels {
            if col.len() != self.gens.len() {
                return Err(Error::Invalid("relation column length mismatch".into()));
            }
        }
        self.rels = rels;
        self.check_homogeneous()?;
        Ok(self)
    }

    /// Over graded backends all relations must be homogeneous with respect to
    /// the generator weights.
    pub fn check_homogeneous(&self) -> Result<()> {
        if !self.ring.is_graded() {
            return Ok(());
        }
        for col in &self.rels {
            self.relation_weight(col)?;
        }
        Ok(())
    }

    /// Common weight of a homogeneous relation column.
    pub fn relation_weight(&self, col: &[RingElement]) -> Result<i64> {
        let mut w = None;
        for (i, e) in col.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            let ew = e
                .weight()
                .ok_or_else(|| Error::Invalid("inhomogeneous relation entry".into()))?;
            let total = ew + self.gens[i].weight;
            match w {
                None => w = Some(total),
                Some(x) if x != total => {
                    return Err(Error::Invalid("inhomogeneous relation column".into()))
                }
                _ => {}
            }
        }
        Ok(w.unwrap_or(0))
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    // ----- integer backend -----

    pub fn modulus(&self) -> Option<u64> {
        match &*self.ring {
            BaseRing::Coefficient(ScalarKind::IntegerMod(m)) => Some(*m),
            _ => None,
        }
    }

    /// Relation matrix over Z, with m*I appended for Z/m backends.
    pub fn rel_zmat(&self) -> Result<ZMat> {
        if !self.ring.is_integral_backend() {
            return Err(Error::UnsupportedBackend("integer presentation required".into()));
        }
        let g = self.gens.len();
        let mut cols: Vec<Vec<BigInt>> = Vec::new();
        for col in &self.rels {
            let mut v = Vec::with_capacity(g);
            for e in col {
                v.push(match &e.payload {
                    Payload::Scalar(s) => s.as_bigint()?,
                    _ => return Err(Error::UnsupportedBackend("integer entries required".into())),
                });
            }
            cols.push(v);
        }
        if let Some(m) = self.modulus() {
            for i in 0..g {
                let mut v = vec![BigInt::zero(); g];
                v[i] = BigInt::from(m);
                cols.push(v);
            }
        }
        Ok(ZMat::from_cols(g, cols))
    }

    /// Is the ambient vector zero in the module (i.e. in the relation span)?
    pub fn z_element_is_zero(&self, v: &[BigInt]) -> Result<bool> {
        let r = self.rel_zmat()?;
        Ok(smith::z_solve(&r, v).is_some())
    }

    // ----- field-slot backend -----

    /// Ambient basis of the degree-d part of the free cover.
    pub fn slot_basis(&self, d: i64) -> Result<Vec<(usize, Monomial)>> {
        match &*self.ring {
            BaseRing::GradedPoly(_) => {
                let mut out = Vec::new();
                for (i, g) in self.gens.iter().enumerate() {
                    for m in self.ring.monomials_of_weight(d - g.weight) {
                        out.push((i, m));
                    }
                }
                Ok(out)
            }
            BaseRing::FiniteAlgebra(a) => {
                let mut out = Vec::new();
                if d == 0 {
                    for i in 0..self.gens.len() {
                        for b in 0..a.dim() {
                            // encode algebra basis index as a length-1 exponent vector
                            out.push((i, Monomial(vec![b as u32])));
                        }
                    }
                }
                Ok(out)
            }
            BaseRing::Coefficient(k) if k.is_field() => Ok(self
                .gens
                .iter()
                .enumerate()
                .filter(|(_, g)| g.weight == d)
                .map(|(i, _)| (i, Monomial(Vec::new())))
                .collect()),
            _ => Err(Error::UnsupportedBackend("field backend required".into())),
        }
    }

    fn element_slot_coords(
        &self,
        col: &[RingElement],
        basis: &[(usize, Monomial)],
    ) -> Result<Vec<crate::scalar::Scalar>> {
        let kind = self.ring.linear_kind();
        let mut out = vec![kind.zero(); basis.len()];
        match &*self.ring {
            BaseRing::GradedPoly(_) => {
                for (i, e) in col.iter().enumerate() {
                    if let Payload::Poly(p) = &e.payload {
                        for (m, c) in &p.terms {
                            let pos = basis
                                .iter()
                                .position(|(gi, bm)| *gi == i && bm == m)
                                .ok_or_else(|| {
                                    Error::Internal("term outside slot basis".into())
                                })?;
                            out[pos] = out[pos].add(c)?;
                        }
                    } else if !e.is_zero() {
                        return Err(Error::Internal("non-poly entry".into()));
                    }
                }
            }
            BaseRing::FiniteAlgebra(_) => {
                for (i, e) in col.iter().enumerate() {
                    if let Payload::AlgVec(v) = &e.payload {
                        for (b, c) in v.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            let pos = basis
                                .iter()
                                .position(|(gi, bm)| *gi == i && bm.0 == vec![b as u32])
                                .ok_or_else(|| Error::Internal("entry outside slot".into()))?;
                            out[pos] = out[pos].add(c)?;
                        }
                    } else if !e.is_zero() {
                        return Err(Error::Internal("non-algebra entry".into()));
                    }
                }
            }
            BaseRing::Coefficient(_) => {
                for (i, e) in col.iter().enumerate() {
                    if let Payload::Scalar(s) = &e.payload {
                        if s.is_zero() {
                            continue;
                        }
                        let pos = basis
                            .iter()
                            .position(|(gi, _)| *gi == i)
                            .ok_or_else(|| Error::Internal("entry outside slot".into()))?;
                        out[pos] = out[pos].add(s)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Relation subspace of the degree-d ambient slot, as matrix columns.
    pub fn rel_matrix_slot(&self, d: i64, basis: &[(usize, Monomial)]) -> Result<Mat> {
        let kind = self.ring.linear_kind();
        let mut cols: Vec<Vec<crate::scalar::Scalar>> = Vec::new();
        match &*self.ring {
            BaseRing::GradedPoly(_) => {
                for col in &self.rels {
                    let w = self.relation_weight(col)?;
                    for m in self.ring.monomials_of_weight(d - w) {
                        // multiply the relation column by the monomial
                        let mono = monomial_element(&self.ring, &m)?;
                        let scaled: Result<Vec<RingElement>> =
                            col.iter().map(|e| e.mul(&mono)).collect();
                        cols.push(self.element_slot_coords(&scaled?, basis)?);
                    }
                }
            }
            BaseRing::FiniteAlgebra(a) => {
                if d == 0 {
                    for col in &self.rels {
                        for b in 0..a.dim() {
                            let be = self.ring.basis_element(b)?;
                            let scaled: Result<Vec<RingElement>> =
                                col.iter().map(|e| e.mul(&be)).collect();
                            cols.push(self.element_slot_coords(&scaled?, basis)?);
                        }
                    }
                }
            }
            BaseRing::Coefficient(k) if k.is_field() => {
                for col in &self.rels {
                    let w = self.relation_weight(col)?;
                    if w == d {
                        cols.push(self.element_slot_coords(col, basis)?);
                    }
                }
            }
            _ => return Err(Error::UnsupportedBackend("field backend required".into())),
        }
        Ok(Mat::from_cols(kind, basis.len(), cols))
    }

    /// Dimension of the degree-d piece (field backends).
    pub fn slot_dim(&self, d: i64) -> Result<usize> {
        let basis = self.slot_basis(d)?;
        let rels = self.rel_matrix_slot(d, &basis)?;
        Ok(basis.len() - mat::rank(&rels)?)
    }

    /// Iso-invariants: invariant factors over Z backends, Hilbert function on
    /// the window over graded backends, total dimension over field/algebra
    /// backends.
    pub fn iso_invariants(&self, window: Option<Window>) -> Result<IsoInvariants> {
        match &*self.ring {
            BaseRing::Coefficient(ScalarKind::Integer)
            | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => {
                let (torsion, rank) = smith::cokernel_invariants(&self.rel_zmat()?);
                Ok(IsoInvariants::IntegerFactors { torsion, rank })
            }
            BaseRing::GradedPoly(_) => {
                let w = window
                    .ok_or_else(|| Error::WindowRequired("iso-invariants of a graded module".into()))?;
                let dims: Result<Vec<usize>> = w.iter().map(|d| self.slot_dim(d)).collect();
                Ok(IsoInvariants::Hilbert { window: w, dims: dims? })
            }
            BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => {
                let mut total = 0;
                for d in gen_weight_range(self) {
                    total += self.slot_dim(d)?;
                }
                Ok(IsoInvariants::TotalDim(total))
            }
        }
    }

    pub fn direct_sum(&self, other: &PresentedModule) -> Result<PresentedModule> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let mut gens = self.gens.clone();
        gens.extend(other.gens.clone());
        let zero = self.ring.zero();
        let mut rels = Vec::new();
        for col in &self.rels {
            let mut c = col.clone();
            c.extend(vec![zero.clone(); other.gens.len()]);
            rels.push(c);
        }
        for col in &other.rels {
            let mut c = vec![zero.clone(); self.gens.len()];
            c.extend(col.clone());
            rels.push(c);
        }
        Ok(PresentedModule { ring: self.ring.clone(), gens, rels })
    }

    /// Tensor product over the base ring, at the presentation level.
    pub fn tensor(&self, other: &PresentedModule) -> Result<PresentedModule> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let mut gens = Vec::new();
        for a in &self.gens {
            for b in &other.gens {
                gens.push(Generator {
                    name: format!("{}*{}", a.name, b.name),
                    weight: a.weight + b.weight,
                });
            }
        }
        let n_b = other.gens.len();
        let zero = self.ring.zero();
        let mut rels = Vec::new();
        // rel_M (x) gen_b
        for col in &self.rels {
            for b in 0..n_b {
                let mut c = vec![zero.clone(); gens.len()];
                for (i, e) in col.iter().enumerate() {
                    c[i * n_b + b] = e.clone();
                }
                rels.push(c);
            }
        }
        // gen_a (x) rel_N
        for a in 0..self.gens.len() {
            for col in &other.rels {
                let mut c = vec![zero.clone(); gens.len()];
                for (j, e) in col.iter().enumerate() {
                    c[a * n_b + j] = e.clone();
                }
                rels.push(c);
            }
        }
        Ok(PresentedModule { ring: self.ring.clone(), gens, rels })
    }
}

fn gen_weight_range(m: &PresentedModule) -> std::ops::RangeInclusive<i64> {
    let lo = m.gens.iter().map(|g| g.weight).min().unwrap_or(0);
    let hi = m.gens.iter().map(|g| g.weight).max().unwrap_or(0);
    lo..=hi
}

pub fn monomial_element(ring: &Arc<BaseRing>, m: &Monomial) -> Result<RingElement> {
    let mut e = ring.one();
    for (i, ex) in m.0.iter().enumerate() {
        if *ex > 0 {
            e = e.mul(&ring.var(i)?.pow(*ex)?)?;
        }
    }
    Ok(e)
}

/// Like [`monomial_element`], but decodes the finite-algebra convention where
/// a slot "monomial" is a basis index.
pub fn monomial_element_for(ring: &Arc<BaseRing>, m: &Monomial) -> Result<RingElement> {
    match &**ring {
        BaseRing::FiniteAlgebra(_) => ring.basis_element(m.0[0] as usize),
        _ => monomial_element(ring, m),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    pub source: PresentedModule,
    pub target: PresentedModule,
    /// column j = image of source generator j, in target generator coordinates
    pub cols: Vec<Vec<RingElement>>,
}

impl ModuleMap {
    pub fn new(
        source: PresentedModule,
        target: PresentedModule,
        cols: Vec<Vec<RingElement>>,
    ) -> Result<ModuleMap> {
        if source.ring != target.ring {
            return Err(Error::RingMismatch);
        }
        if cols.len() != source.gens.len() {
            return Err(Error::Invalid("column count mismatch".into()));
        }
        for col in &cols {
            if col.len() != target.gens.len() {
                return Err(Error::Invalid("column length mismatch".into()));
            }
        }
        let map = ModuleMap { source, target, cols };
        map.check_homogeneous()?;
        map.check_respects_relations()?;
        Ok(map)
    }

    /// Over graded backends, maps must preserve internal degree: the (i, j)
    /// entry is homogeneous of weight w(source_j) - w(target_i).
    pub fn check_homogeneous(&self) -> Result<()> {
        if !self.source.ring.is_graded() {
            return Ok(());
        }
        for (j, col) in self.cols.iter().enumerate() {
            for (i, e) in col.iter().enumerate() {
                let want = self.source.gens[j].weight - self.target.gens[i].weight;
                if !e.is_homogeneous_of(want) {
                    return Err(Error::Invalid(format!(
                        "map entry ({i},{j}) not homogeneous of weight {want}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity(m: &PresentedModule) -> ModuleMap {
        let zero = m.ring.zero();
        let one = m.ring.one();
        let n = m.gens.len();
        let cols = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { one.clone() } else { zero.clone() })
                    .collect()
            })
            .collect();
        ModuleMap { source: m.clone(), target: m.clone(), cols }
    }

    pub fn zero(source: &PresentedModule, target: &PresentedModule) -> ModuleMap {
        let zero = source.ring.zero();
        ModuleMap {
            source: source.clone(),
            target: target.clone(),
            cols: vec![vec![zero; target.gens.len()]; source.gens.len()],
        }
    }

    /// Image of an element given in source generator coordinates.
    pub fn apply(&self, v: &[RingElement]) -> Result<Vec<RingElement>> {
        let zero = self.source.ring.zero();
        let mut out = vec![zero; self.target.gens.len()];
        for (j, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..self.target.gens.len() {
                out[i] = out[i].add(&self.cols[j][i].mul(c)?)?;
            }
        }
        Ok(out)
    }

    pub fn compose(&self, then: &ModuleMap) -> Result<ModuleMap> {
        if self.target.gens.len() != then.source.gens.len() {
            return Err(Error::Invalid("composition shape mismatch".into()));
        }
        let mut cols = Vec::with_capacity(self.cols.len());
        for col in &self.cols {
            cols.push(then.apply(col)?);
        }
        Ok(ModuleMap {
            source: self.source.clone(),
            target: then.target.clone(),
            cols,
        })
    }

    pub fn add(&self, other: &ModuleMap) -> Result<ModuleMap> {
        let mut cols = Vec::with_capacity(self.cols.len());
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let mut c = Vec::with_capacity(a.len());
            for (x, y) in a.iter().zip(b) {
                c.push(x.add(y)?);
            }
            cols.push(c);
        }
        Ok(ModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            cols,
        })
    }

    pub fn neg(&self) -> ModuleMap {
        ModuleMap {
            source: self.source.clone(),
            target: self.target.clone(),
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().map(|e| e.neg()).collect())
                .collect(),
        }
    }

    pub fn direct_sum(&self, other: &ModuleMap) -> Result<ModuleMap> {
        let source = self.source.direct_sum(&other.source)?;
        let target = self.target.direct_sum(&other.target)?;
        let zero = source.ring.zero();
        let mut cols = Vec::new();
        for col in &self.cols {
            let mut c = col.clone();
            c.extend(vec![zero.clone(); other.target.gens.len()]);
            cols.push(c);
        }
        for col in &other.cols {
            let mut c = vec![zero.clone(); self.target.gens.len()];
            c.extend(col.clone());
            cols.push(c);
        }
        Ok(ModuleMap { source, target, cols })
    }

    pub fn tensor(&self, other: &ModuleMap) -> Result<ModuleMap> {
        let source = self.source.tensor(&other.source)?;
        let target = self.target.tensor(&other.target)?;
        let nb_t = other.target.gens.len();
        let nb_s = other.source.gens.len();
        let zero = source.ring.zero();
        let mut cols = vec![vec![zero; target.gens.len()]; source.gens.len()];
        for (a, acol) in self.cols.iter().enumerate() {
            for (b, bcol) in other.cols.iter().enumerate() {
                for (i, x) in acol.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    for (j, y) in bcol.iter().enumerate() {
                        if y.is_zero() {
                            continue;
                        }
                        let idx_s = a * nb_s + b;
                        let idx_t = i * nb_t + j;
                        cols[idx_s][idx_t] = cols[idx_s][idx_t].add(&x.mul(y)?)?;
                    }
                }
            }
        }
        Ok(ModuleMap { source, target, cols })
    }

    /// Verifies the image of every source relation lies in the target
    /// relation span (exact, per backend).
    pub fn check_respects_relations(&self) -> Result<()> {
        for col in &self.source.rels {
            let img = self.apply(col)?;
            if !self.target_contains_in_relation_span(&img)? {
                return Err(Error::Invalid(
                    "map does not respect source relations".into(),
                ));
            }
        }
        Ok(())
    }

    fn target_contains_in_relation_span(&self, v: &[RingElement]) -> Result<bool> {
        element_is_zero_in(&self.target, v)
    }

    /// Is this the zero map of modules (all generator images zero in target)?
    pub fn is_zero_map(&self) -> Result<bool> {
        for col in &self.cols {
            if !element_is_zero_in(&self.target, col)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Matrix of the induced map on degree-d ambient slots.
    pub fn slot_matrix(
        &self,
        _d: i64,
        src_basis: &[(usize, Monomial)],
        tgt_basis: &[(usize, Monomial)],
    ) -> Result<Mat> {
        let kind = self.source.ring.linear_kind();
        let mut cols = Vec::with_capacity(src_basis.len());
        for (gi, m) in src_basis {
            let img: Vec<RingElement> = match &*self.source.ring {
                BaseRing::GradedPoly(_) | BaseRing::Coefficient(_) => {
                    let mono = monomial_element(&self.source.ring, m)?;
                    let mut v = Vec::with_capacity(self.target.gens.len());
                    for e in &self.cols[*gi] {
                        v.push(e.mul(&mono)?);
                    }
                    v
                }
                BaseRing::FiniteAlgebra(_) => {
                    let be = self.source.ring.basis_element(m.0[0] as usize)?;
                    let mut v = Vec::with_capacity(self.target.gens.len());
                    for e in &self.cols[*gi] {
                        v.push(e.mul(&be)?);
                    }
                    v
                }
            };
            cols.push(self.target.element_slot_coords(&img, tgt_basis)?);
        }
        Ok(Mat::from_cols(kind, tgt_basis.len(), cols))
    }

    /// Integer matrix of the map (integral backends).
    pub fn zmat(&self) -> Result<ZMat> {
        let g = self.target.gens.len();
        let mut cols = Vec::with_capacity(self.cols.len());
        for col in &self.cols {
            let mut v = Vec::with_capacity(g);
            for e in col {
                v.push(match &e.payload {
                    Payload::Scalar(s) => s.as_bigint()?,
                    _ => return Err(Error::UnsupportedBackend("integer entries required".into())),
                });
            }
            cols.push(v);
        }
        Ok(ZMat::from_cols(g, cols))
    }
}

/// Zero test for an element of a presented module given in ambient generator
/// coordinates: membership in the relation span.
pub fn element_is_zero_in(m: &PresentedModule, v: &[RingElement]) -> Result<bool> {
    if v.iter().all(|e| e.is_zero()) {
        return Ok(true);
    }
    match &*m.ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => {
            let mut vz = Vec::with_capacity(v.len());
            for e in v {
                vz.push(match &e.payload {
                    Payload::Scalar(s) => s.as_bigint()?,
                    _ => return Err(Error::UnsupportedBackend("integer entries required".into())),
                });
            }
            m.z_element_is_zero(&vz)
        }
        BaseRing::GradedPoly(_) => {
            // split into homogeneous pieces and test each slot
            let weights = element_weights(m, v)?;
            for d in weights {
                let basis = m.slot_basis(d)?;
                let rels = m.rel_matrix_slot(d, &basis)?;
                let comp = homogeneous_component(m, v, d)?;
                let coords = m.element_slot_coords(&comp, &basis)?;
                if coords.iter().all(|s| s.is_zero()) {
                    continue;
                }
                if mat::solve(&rels, &coords)?.is_none() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => {
            let basis = m.slot_basis(0)?;
            let rels = m.rel_matrix_slot(0, &basis)?;
            let coords = m.element_slot_coords(v, &basis)?;
            if coords.iter().all(|s| s.is_zero()) {
                return Ok(true);
            }
            Ok(mat::solve(&rels, &coords)?.is_some())
        }
    }
}

/// Windowed zero test: homogeneous components with weight outside the window
/// are ignored (graded backends only; others fall back to the exact test).
pub fn element_is_zero_in_window(
    m: &PresentedModule,
    v: &[RingElement],
    iwindow: Option<Window>,
) -> Result<bool> {
    if !m.ring.is_graded() {
        return element_is_zero_in(m, v);
    }
    let w = iwindow.ok_or_else(|| Error::WindowRequired("windowed zero test".into()))?;
    for d in element_weights(m, v)? {
        if !w.contains(d) {
            continue;
        }
        let basis = m.slot_basis(d)?;
        let rels = m.rel_matrix_slot(d, &basis)?;
        let comp = homogeneous_component(m, v, d)?;
        let coords = m.element_slot_coords(&comp, &basis)?;
        if coords.iter().all(|s| s.is_zero()) {
            continue;
        }
        if crate::mat::solve(&rels, &coords)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn element_weights(m: &PresentedModule, v: &[RingElement]) -> Result<Vec<i64>> {
    let mut ws = std::collections::BTreeSet::new();
    for (i, e) in v.iter().enumerate() {
        if let Payload::Poly(p) = &e.payload {
            let BaseRing::GradedPoly(r) = &*m.ring else {
                return Err(Error::Internal("expected graded ring".into()));
            };
            for mono in p.terms.keys() {
                ws.insert(mono.weight(r) + m.gens[i].weight);
            }
        }
    }
    Ok(ws.into_iter().collect())
}

fn homogeneous_component(
    m: &PresentedModule,
    v: &[RingElement],
    d: i64,
) -> Result<Vec<RingElement>> {
    let BaseRing::GradedPoly(r) = &*m.ring else {
        return Err(Error::Internal("expected graded ring".into()));
    };
    let mut out = Vec::with_capacity(v.len());
    for (i, e) in v.iter().enumerate() {
        let want = d - m.gens[i].weight;
        if let Payload::Poly(p) = &e.payload {
            let mut q = crate::ring::Poly::default();
            for (mono, c) in &p.terms {
                if mono.weight(r) == want {
                    q.terms.insert(mono.clone(), c.clone());
                }
            }
            out.push(RingElement { ring: m.ring.clone(), payload: Payload::Poly(q) });
        } else {
            out.push(m.ring.zero());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z12_presentation_invariants() {
        let z = BaseRing::integers();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        let inv = m.iso_invariants(None).unwrap();
        assert_eq!(
            inv,
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(12)], rank: 0 }
        );
    }

    #[test]
    fn z4_plus_z2_invariants() {
        let z = BaseRing::integers();
        let m = PresentedModule::free(&z, vec![("a", 0), ("b", 0)])
            .with_relations(vec![
                vec![z.from_i64(4), z.from_i64(0)],
                vec![z.from_i64(0), z.from_i64(2)],
            ])
            .unwrap();
        let inv = m.iso_invariants(None).unwrap();
        assert_eq!(
            inv,
            IsoInvariants::IntegerFactors {
                torsion: vec![BigInt::from(2), BigInt::from(4)],
                rank: 0
            }
        );
    }

    #[test]
    fn graded_piece_dims() {
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap();
        // free rank 1: degree 3 has 4 monomials
        let f = PresentedModule::free(&r, vec![("e", 0)]);
        assert_eq!(f.slot_dim(3).unwrap(), 4);
        // Q[x,y]/(x,y): dim 1 in degree 0, 0 in degree 1
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let m = PresentedModule::cyclic(&r, vec![x.clone(), y.clone()]);
        assert_eq!(m.slot_dim(0).unwrap(), 1);
        assert_eq!(m.slot_dim(1).unwrap(), 0);
        // Q[x,y]/(x^2): degree 2 has dim 2 (xy, y^2)
        let m2 = PresentedModule::cyclic(&r, vec![x.mul(&x).unwrap()]);
        assert_eq!(m2.slot_dim(2).unwrap(), 2);
    }

    #[test]
    fn hilbert_on_window() {
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        // Q[x,y]/(x,y)^2 on [0,3] -> (1,2,0,0)
        let m = PresentedModule::cyclic(
            &r,
            vec![
                x.mul(&x).unwrap(),
                x.mul(&y).unwrap(),
                y.mul(&y).unwrap(),
            ],
        );
        let inv = m.iso_invariants(Some(Window::new(0, 3))).unwrap();
        assert_eq!(
            inv,
            IsoInvariants::Hilbert { window: Window::new(0, 3), dims: vec![1, 2, 0, 0] }
        );
    }

    #[test]
    fn zero_module_record() {
        let z = BaseRing::integers();
        let m = PresentedModule::zero(&z);
        assert!(m.iso_invariants(None).unwrap().is_zero());
    }

    #[test]
    fn map_respects_relations_enforced() {
        let z = BaseRing::integers();
        let z2 = PresentedModule::cyclic(&z, vec![z.from_i64(2)]);
        let z4 = PresentedModule::cyclic(&z, vec![z.from_i64(4)]);
        // 1 |-> 1 : Z/2 -> Z/4 does not respect 2*e = 0
        assert!(ModuleMap::new(z2.clone(), z4.clone(), vec![vec![z.from_i64(1)]]).is_err());
        // 1 |-> 2 : fine
        assert!(ModuleMap::new(z2, z4, vec![vec![z.from_i64(2)]]).is_ok());
    }

    #[test]
    fn finite_algebra_module_dims() {
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        // A/(t) has dim 1
        let m = PresentedModule::cyclic(&a, vec![t]);
        assert_eq!(m.iso_invariants(None).unwrap(), IsoInvariants::TotalDim(1));
    }
}
