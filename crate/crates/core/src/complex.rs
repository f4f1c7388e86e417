//! Bounded cochain complexes of presented modules.
//!
//! Cohomological convention: differentials raise degree by one, support is a
//! finite interval. d o d = 0 is asserted exactly at construction. Sign
//! conventions are fixed once here: Koszul sign for tensor products,
//! d(phi) = d o phi - (-1)^{|phi|} phi o d for Hom complexes, and the cone of
//! f : C -> D is C[1] (+) D with d(c, x) = (-d c, f(c) + d x).

use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat::{self, Mat};
use crate::module::{element_is_zero_in, Generator, IsoInvariants, ModuleMap, PresentedModule};
use crate::ring::{BaseRing, Monomial, RingElement};
use crate::scalar::{Scalar, ScalarKind};
use crate::smith::{self, ZMat};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex {
    pub ring: Arc<BaseRing>,
    pub terms: BTreeMap<i64, PresentedModule>,
    /// d^n : terms[n] -> terms[n+1]
    pub diffs: BTreeMap<i64, ModuleMap>,
}

impl Complex {
    pub fn new(
        ring: Arc<BaseRing>,
        terms: BTreeMap<i64, PresentedModule>,
        diffs: BTreeMap<i64, ModuleMap>,
    ) -> Result<Complex> {
        let c = Complex { ring, terms, diffs };
        c.check()?;
        Ok(c)
    }

    pub fn zero(ring: &Arc<BaseRing>) -> Complex {
        Complex { ring: ring.clone(), terms: BTreeMap::new(), diffs: BTreeMap::new() }
    }

    /// A single module placed in one degree.
    pub fn from_module(m: PresentedModule, degree: i64) -> Complex {
        let ring = m.ring.clone();
        let mut terms = BTreeMap::new();
        if !m.gens.is_empty() {
            terms.insert(degree, m);
        }
        Complex { ring, terms, diffs: BTreeMap::new() }
    }

    pub fn term(&self, n: i64) -> PresentedModule {
        self.terms
            .get(&n)
            .cloned()
            .unwrap_or_else(|| PresentedModule::zero(&self.ring))
    }

    pub fn diff(&self, n: i64) -> ModuleMap {
        match self.diffs.get(&n) {
            Some(d) => d.clone(),
            None => ModuleMap::zero(&self.term(n), &self.term(n + 1)),
        }
    }

    pub fn lo(&self) -> i64 {
        self.terms.keys().next().copied().unwrap_or(0)
    }

    pub fn hi(&self) -> i64 {
        self.terms.keys().last().copied().unwrap_or(0)
    }

    pub fn check(&self) -> Result<()> {
        for (n, d) in &self.diffs {
            if let Some(next) = self.diffs.get(&(n + 1)) {
                let dd = d.compose(next)?;
                if !dd.is_zero_map()? {
                    return Err(Error::Invalid(format!("d o d != 0 at degree {n}")));
                }
            }
            d.check_homogeneous()?;
            d.check_respects_relations()?;
        }
        Ok(())
    }

    pub fn shift(&self, k: i64) -> Complex {
        // C[k]^n = C^{n+k}, differential scaled by (-1)^k
        let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
        let mut terms = BTreeMap::new();
        for (n, t) in &self.terms {
            terms.insert(n - k, t.clone());
        }
        let mut diffs = BTreeMap::new();
        for (n, d) in &self.diffs {
            let m = if sign == 1 { d.clone() } else { d.neg() };
            diffs.insert(n - k, m);
        }
        Complex { ring: self.ring.clone(), terms, diffs }
    }

    pub fn direct_sum(&self, other: &Complex) -> Result<Complex> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let lo = self.lo().min(other.lo());
        let hi = self.hi().max(other.hi());
        let mut terms = BTreeMap::new();
        let mut diffs = BTreeMap::new();
        for n in lo..=hi {
            let t = self.term(n).direct_sum(&other.term(n))?;
            if !t.gens.is_empty() {
                terms.insert(n, t);
            }
        }
        for n in lo..=hi {
            let d = self.diff(n).direct_sum(&other.diff(n))?;
            if !d.cols.is_empty() || !d.target.gens.is_empty() {
                if terms.contains_key(&n) {
                    diffs.insert(n, d);
                }
            }
        }
        Complex::new(self.ring.clone(), terms, diffs)
    }

    /// Total tensor product with the Koszul sign rule.
    pub fn tensor(&self, other: &Complex) -> Result<Complex> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch);
        }
        let mut terms: BTreeMap<i64, PresentedModule> = BTreeMap::new();
        let mut blocks: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
        for n in (self.lo() + other.lo())..=(self.hi() + other.hi()) {
            let mut bl = Vec::new();
            for p in self.lo()..=self.hi() {
                let q = n - p;
                if self.terms.contains_key(&p) && other.terms.contains_key(&q) {
                    bl.push((p, q));
                }
            }
            if bl.is_empty() {
                continue;
            }
            let mut t: Option<PresentedModule> = None;
            for (p, q) in &bl {
                let piece = self.term(*p).tensor(&other.term(*q))?;
                t = Some(match t {
                    None => piece,
                    Some(acc) => acc.direct_sum(&piece)?,
                });
            }
            terms.insert(n, t.unwrap());
            blocks.insert(n, bl);
        }
        let mut diffs = BTreeMap::new();
        for (n, bl) in &blocks {
            let Some(tgt_bl) = blocks.get(&(n + 1)) else {
                continue;
            };
            let source = terms.get(n).unwrap().clone();
            let target = terms.get(&(n + 1)).unwrap().clone();
            // build the block matrix
            let mut entries: Vec<Vec<Option<ModuleMap>>> =
                vec![vec![None; bl.len()]; tgt_bl.len()];
            for (si, (p, q)) in bl.iter().enumerate() {
                // d_C (x) id : (p, q) -> (p+1, q)
                if let Some(ti) = tgt_bl.iter().position(|(a, b)| *a == p + 1 && *b == *q) {
                    let m = self.diff(*p).tensor(&ModuleMap::identity(&other.term(*q)))?;
                    entries[ti][si] = Some(m);
                }
                // (-1)^p id (x) d_D : (p, q) -> (p, q+1)
                if let Some(ti) = tgt_bl.iter().position(|(a, b)| *a == *p && *b == q + 1) {
                    let mut m =
                        ModuleMap::identity(&self.term(*p)).tensor(&other.diff(*q))?;
                    if p.rem_euclid(2) == 1 {
                        m = m.neg();
                    }
                    entries[ti][si] = Some(m);
                }
            }
            let d = assemble_block_map(&source, &target, bl, tgt_bl, &entries)?;
            diffs.insert(*n, d);
        }
        Complex::new(self.ring.clone(), terms, diffs)
    }

    /// Hom complex Hom(C, D); requires C degreewise free.
    /// Hom^n = (+)_k Hom(C^k, D^{k+n}).
    pub fn hom_from(&self, other: &Complex) -> Result<Complex> {
        let c = self;
        let d = other;
        if c.ring != d.ring {
            return Err(Error::RingMismatch);
        }
        for t in c.terms.values() {
            if !t.rels.is_empty() {
                return Err(Error::UnsupportedShape(
                    "hom complex requires a degreewise free source".into(),
                ));
            }
        }
        // gens of Hom^n: (k, i, j) with i a C^k generator, j a D^{k+n} generator
        let lo = d.lo() - c.hi();
        let hi = d.hi() - c.lo();
        let mut terms: BTreeMap<i64, PresentedModule> = BTreeMap::new();
        let mut gen_index: BTreeMap<i64, Vec<(i64, usize, usize)>> = BTreeMap::new();
        for n in lo..=hi {
            let mut gens: Vec<Generator> = Vec::new();
            let mut idx = Vec::new();
            let mut rels: Vec<Vec<RingElement>> = Vec::new();
            for k in c.lo()..=c.hi() {
                let ck = c.term(k);
                let dkn = d.term(k + n);
                for (i, cg) in ck.gens.iter().enumerate() {
                    for (j, dg) in dkn.gens.iter().enumerate() {
                        idx.push((k, i, j));
                        gens.push(Generator {
                            name: format!("{}*->{}", cg.name, dg.name),
                            weight: dg.weight - cg.weight,
                        });
                    }
                }
            }
            // relations: e_i^* tensor rel_D
            let zero = c.ring.zero();
            for k in c.lo()..=c.hi() {
                let ck = c.term(k);
                let dkn = d.term(k + n);
                for i in 0..ck.gens.len() {
                    for rel in &dkn.rels {
                        let mut col = vec![zero.clone(); idx.len()];
                        for (j, e) in rel.iter().enumerate() {
                            if e.is_zero() {
                                continue;
                            }
                            let pos = idx
                                .iter()
                                .position(|(kk, ii, jj)| *kk == k && *ii == i && *jj == j)
                                .unwrap();
                            col[pos] = e.clone();
                        }
                        rels.push(col);
                    }
                }
            }
            if gens.is_empty() {
                continue;
            }
            let m = PresentedModule { ring: c.ring.clone(), gens, rels };
            terms.insert(n, m);
            gen_index.insert(n, idx);
        }
        // differentials
        let mut diffs = BTreeMap::new();
        for n in lo..=hi {
            let (Some(src), Some(tgt)) = (terms.get(&n), terms.get(&(n + 1))) else {
                continue;
            };
            let src_idx = gen_index.get(&n).unwrap();
            let tgt_idx = gen_index.get(&(n + 1)).unwrap();
            let zero = c.ring.zero();
            let sign_phi = if n.rem_euclid(2) == 0 { 1 } else { -1 };
            let mut cols = Vec::with_capacity(src_idx.len());
            for (k, i, j) in src_idx {
                let mut col = vec![zero.clone(); tgt_idx.len()];
                // d_D o phi: (k, i, j) -> (k, i, j') with coefficient d_D[(k+n) -> (k+n+1)]_{j', j}
                let dd = d.diff(k + n);
                for (jp, e) in dd.cols[*j].iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    if let Some(pos) = tgt_idx
                        .iter()
                        .position(|(kk, ii, jj)| kk == k && ii == i && *jj == jp)
                    {
                        col[pos] = col[pos].add(e)?;
                    }
                }
                // -(-1)^n phi o d_C: (k, i, j) -> (k-1, l, j) with coefficient d_C[k-1]_{i, l}
                let dc = c.diff(k - 1);
                for l in 0..dc.cols.len() {
                    let e = &dc.cols[l][*i];
                    if e.is_zero() {
                        continue;
                    }
                    if let Some(pos) = tgt_idx
                        .iter()
                        .position(|(kk, ll, jj)| *kk == k - 1 && *ll == l && jj == j)
                    {
                        let signed = if sign_phi == 1 { e.neg() } else { e.clone() };
                        col[pos] = col[pos].add(&signed)?;
                    }
                }
                cols.push(col);
            }
            diffs.insert(
                n,
                ModuleMap { source: src.clone(), target: tgt.clone(), cols },
            );
        }
        Complex::new(c.ring.clone(), terms, diffs)
    }

    /// Exact cohomology invariants on the window (internal degrees for graded
    /// backends; ignored otherwise).
    pub fn cohomology_table(&self, iwindow: Option<Window>) -> Result<CohomTable> {
        let data = self.cohomology(iwindow)?;
        Ok(data.table())
    }

    pub fn cohomology(&self, iwindow: Option<Window>) -> Result<CohomologyData> {
        if self.ring.is_graded() && iwindow.is_none() {
            return Err(Error::WindowRequired("cohomology over a graded backend".into()));
        }
        let lo = self.lo();
        let hi = self.hi();
        let degrees: Vec<i64> = (lo..=hi).collect();
        let per: Vec<(i64, CohomAt)> = crate::par::map_vec(degrees, |n| {
            (n, self.cohomology_at(n, iwindow).expect("cohomology"))
        });
        Ok(CohomologyData {
            iwindow,
            at: per.into_iter().collect(),
        })
    }

    fn cohomology_at(&self, n: i64, iwindow: Option<Window>) -> Result<CohomAt> {
        match &*self.ring {
            BaseRing::Coefficient(ScalarKind::Integer)
            | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => self.cohomology_group(n),
            BaseRing::GradedPoly(_) => {
                let w = iwindow.unwrap();
                let mut slots = BTreeMap::new();
                for dgr in w.iter() {
                    slots.insert(dgr, self.cohomology_slot(n, dgr)?);
                }
                Ok(CohomAt::Slots(slots))
            }
            BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => {
                // all weight slots that carry generators
                let mut ds = std::collections::BTreeSet::new();
                for t in [self.term(n), self.term(n - 1), self.term(n + 1)] {
                    for g in &t.gens {
                        ds.insert(g.weight);
                    }
                }
                if ds.is_empty() {
                    ds.insert(0);
                }
                let mut slots = BTreeMap::new();
                for dgr in ds {
                    slots.insert(dgr, self.cohomology_slot(n, dgr)?);
                }
                Ok(CohomAt::Slots(slots))
            }
        }
    }

    fn cohomology_group(&self, n: i64) -> Result<CohomAt> {
        let t = self.term(n);
        let ambient = t.gens.len();
        let dn = self.diff(n).zmat()?;
        let rels_next = self.term(n + 1).rel_zmat()?;
        // cycles: x with d x in rel span of the next term
        let stacked = dn.hcat(&rels_next);
        let ker = smith::z_kernel(&stacked);
        let mut kgens: Vec<Vec<BigInt>> = Vec::new();
        for j in 0..ker.cols {
            let x: Vec<BigInt> = (0..ambient).map(|i| ker.get(i, j).clone()).collect();
            if x.iter().any(|v| !num_traits::Zero::is_zero(v)) {
                kgens.push(x);
            }
        }
        // boundaries + relations of this term
        let dprev = self.diff(n - 1).zmat()?;
        let rels = t.rel_zmat()?;
        let bmat = dprev.hcat(&rels);
        let kmat = ZMat::from_cols(ambient, kgens.clone());
        // H presentation: gens = kgens, rels = preimage of bmat span
        let relcols = {
            let stacked2 = kmat.hcat(&bmat);
            let k2 = smith::z_kernel(&stacked2);
            let mut cols = Vec::new();
            for j in 0..k2.cols {
                let z: Vec<BigInt> = (0..kgens.len()).map(|i| k2.get(i, j).clone()).collect();
                if z.iter().any(|v| !num_traits::Zero::is_zero(v)) {
                    cols.push(z);
                }
            }
            cols
        };
        let module = PresentedModule {
            ring: self.ring.clone(),
            gens: (0..kgens.len())
                .map(|i| Generator { name: format!("h{i}"), weight: 0 })
                .collect(),
            rels: relcols
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|v| int_element(&self.ring, v))
                        .collect()
                })
                .collect(),
        };
        Ok(CohomAt::Group(GroupCohom { module, reps: kgens, bmat, ambient }))
    }

    fn cohomology_slot(&self, n: i64, dgr: i64) -> Result<SlotCohom> {
        let kind = self.ring.linear_kind();
        let t = self.term(n);
        let basis = t.slot_basis(dgr)?;
        let tnext = self.term(n + 1);
        let basis_next = tnext.slot_basis(dgr)?;
        let tprev = self.term(n - 1);
        let basis_prev = tprev.slot_basis(dgr)?;

        let dn = self.diff(n).slot_matrix(dgr, &basis, &basis_next)?;
        let rels_next = tnext.rel_matrix_slot(dgr, &basis_next)?;
        let stacked = dn.hcat(&rels_next);
        let ker = mat::kernel_basis(&stacked)?;
        // cycle columns in ambient coordinates
        let mut zcols: Vec<Vec<Scalar>> = Vec::new();
        for j in 0..ker.cols {
            let v: Vec<Scalar> = (0..basis.len()).map(|i| ker.get(i, j).clone()).collect();
            if v.iter().any(|s| !s.is_zero()) {
                zcols.push(v);
            }
        }
        let dprev = self.diff(n - 1).slot_matrix(dgr, &basis_prev, &basis)?;
        let rels = t.rel_matrix_slot(dgr, &basis)?;
        let covered = dprev.hcat(&rels);
        // peel representatives
        let mut reps: Vec<Vec<Scalar>> = Vec::new();
        let mut span = covered.clone();
        for z in &zcols {
            if mat::solve(&span, z)?.is_none() {
                span = span.hcat(&Mat::from_cols(kind.clone(), basis.len(), vec![z.clone()]));
                reps.push(z.clone());
            }
        }
        let dim = reps.len();
        Ok(SlotCohom {
            dim,
            reps: Mat::from_cols(kind.clone(), basis.len(), reps),
            covered,
            basis,
        })
    }
}

fn int_element(ring: &Arc<BaseRing>, v: &BigInt) -> RingElement {
    match &**ring {
        BaseRing::Coefficient(ScalarKind::Integer) => RingElement {
            ring: ring.clone(),
            payload: crate::ring::Payload::Scalar(Scalar::Int(v.clone())),
        },
        BaseRing::Coefficient(ScalarKind::IntegerMod(m)) => RingElement {
            ring: ring.clone(),
            payload: crate::ring::Payload::Scalar(Scalar::Mod {
                m: *m,
                v: num_integer::Integer::mod_floor(v, &BigInt::from(*m)),
            }),
        },
        _ => unreachable!(),
    }
}

/// Assemble a map between direct sums from a block matrix.
fn assemble_block_map(
    source: &PresentedModule,
    target: &PresentedModule,
    src_blocks: &[(i64, i64)],
    tgt_blocks: &[(i64, i64)],
    entries: &[Vec<Option<ModuleMap>>],
) -> Result<ModuleMap> {
    let zero = source.ring.zero();
    let mut cols = vec![vec![zero; target.gens.len()]; source.gens.len()];
    // offsets
    let mut soff = vec![0usize; src_blocks.len() + 1];
    for (b, e) in entries[0].iter().enumerate().take(src_blocks.len()) {
        let _ = e;
        let _ = b;
    }
    let mut acc = 0;
    for (b, _) in src_blocks.iter().enumerate() {
        soff[b] = acc;
        // block source module rank: find from any entry row or by recomputing;
        // entries store maps whose source is the block module
        let rank = entries
            .iter()
            .find_map(|row| row[b].as_ref().map(|m| m.source.gens.len()));
        acc += rank.unwrap_or(0);
    }
    soff[src_blocks.len()] = acc;
    let mut toff = vec![0usize; tgt_blocks.len() + 1];
    let mut acc = 0;
    for (b, _) in tgt_blocks.iter().enumerate() {
        toff[b] = acc;
        let rank = entries[b]
            .iter()
            .find_map(|m| m.as_ref().map(|m| m.target.gens.len()));
        acc += rank.unwrap_or(0);
    }
    toff[tgt_blocks.len()] = acc;
    if acc != target.gens.len() || soff[src_blocks.len()] != source.gens.len() {
        // fall back: block ranks must be derivable from module shapes
        return Err(Error::Internal("block map offsets inconsistent".into()));
    }
    for (ti, row) in entries.iter().enumerate() {
        for (si, cell) in row.iter().enumerate() {
            if let Some(m) = cell {
                for (j, col) in m.cols.iter().enumerate() {
                    for (i, e) in col.iter().enumerate() {
                        if !e.is_zero() {
                            cols[soff[si] + j][toff[ti] + i] =
                                cols[soff[si] + j][toff[ti] + i].add(e)?;
                        }
                    }
                }
            }
        }
    }
    Ok(ModuleMap { source: source.clone(), target: target.clone(), cols })
}

// ----- cohomology data -----

pub struct GroupCohom {
    pub module: PresentedModule,
    /// ambient cycle representative for each generator
    pub reps: Vec<Vec<BigInt>>,
    /// boundaries and term relations, as ambient columns
    pub bmat: ZMat,
    pub ambient: usize,
}

pub struct SlotCohom {
    pub dim: usize,
    /// ambient cycle representatives (columns)
    pub reps: Mat,
    /// boundaries and term relations (columns)
    pub covered: Mat,
    pub basis: Vec<(usize, Monomial)>,
}

pub enum CohomAt {
    Group(GroupCohom),
    Slots(BTreeMap<i64, SlotCohom>),
}

pub struct CohomologyData {
    pub iwindow: Option<Window>,
    pub at: BTreeMap<i64, CohomAt>,
}

/// Degree -> iso-invariant record.
pub type CohomTable = BTreeMap<i64, IsoInvariants>;

impl CohomologyData {
    pub fn table(&self) -> CohomTable {
        let mut out = BTreeMap::new();
        for (n, c) in &self.at {
            let inv = match c {
                CohomAt::Group(g) => g
                    .module
                    .iso_invariants(None)
                    .expect("group invariants"),
                CohomAt::Slots(slots) => match self.iwindow {
                    Some(w) => IsoInvariants::Hilbert {
                        window: w,
                        dims: w
                            .iter()
                            .map(|d| slots.get(&d).map_or(0, |s| s.dim))
                            .collect(),
                    },
                    None => IsoInvariants::TotalDim(slots.values().map(|s| s.dim).sum()),
                },
            };
            out.insert(*n, inv);
        }
        // drop zero rows for readability
        out.retain(|_, v| !v.is_zero());
        out
    }
}

// ----- chain maps -----

#[derive(Debug, Clone)]
pub struct ChainMap {
    pub source: Complex,
    pub target: Complex,
    pub comps: BTreeMap<i64, ModuleMap>,
}

impl ChainMap {
    pub fn new(source: Complex, target: Complex, comps: BTreeMap<i64, ModuleMap>) -> Result<ChainMap> {
        let f = ChainMap { source, target, comps };
        f.check()?;
        Ok(f)
    }

    pub fn identity(c: &Complex) -> ChainMap {
        let comps = c
            .terms
            .iter()
            .map(|(n, t)| (*n, ModuleMap::identity(t)))
            .collect();
        ChainMap { source: c.clone(), target: c.clone(), comps }
    }

    pub fn zero(source: &Complex, target: &Complex) -> ChainMap {
        ChainMap { source: source.clone(), target: target.clone(), comps: BTreeMap::new() }
    }

    pub fn comp(&self, n: i64) -> ModuleMap {
        match self.comps.get(&n) {
            Some(m) => m.clone(),
            None => ModuleMap::zero(&self.source.term(n), &self.target.term(n)),
        }
    }

    /// Exact check that every square commutes.
    pub fn check(&self) -> Result<()> {
        let lo = self.source.lo().min(self.target.lo()) - 1;
        let hi = self.source.hi().max(self.target.hi());
        for n in lo..=hi {
            let a = self.comp(n).compose(&self.target.diff(n))?;
            let b = self.source.diff(n).compose(&self.comp(n + 1))?;
            let diff = a.add(&b.neg())?;
            if !diff.is_zero_map()? {
                return Err(Error::Invalid(format!("chain map square fails at degree {n}")));
            }
        }
        Ok(())
    }

    pub fn compose(&self, then: &ChainMap) -> Result<ChainMap> {
        let lo = self.source.lo();
        let hi = self.source.hi();
        let mut comps = BTreeMap::new();
        for n in lo..=hi {
            comps.insert(n, self.comp(n).compose(&then.comp(n))?);
        }
        Ok(ChainMap { source: self.source.clone(), target: then.target.clone(), comps })
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        let mut comps = BTreeMap::new();
        for n in self.source.lo()..=self.source.hi() {
            comps.insert(n, self.comp(n).add(&other.comp(n))?);
        }
        Ok(ChainMap { source: self.source.clone(), target: self.target.clone(), comps })
    }

    pub fn neg(&self) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            comps: self.comps.iter().map(|(n, m)| (*n, m.neg())).collect(),
        }
    }

    /// Tensor of chain maps (with the induced sign-free block structure; signs
    /// enter only through differentials).
    pub fn tensor(&self, other: &ChainMap) -> Result<ChainMap> {
        let source = self.source.tensor(&other.source)?;
        let target = self.target.tensor(&other.target)?;
        let mut comps = BTreeMap::new();
        for n in source.lo()..=source.hi() {
            // block structure follows Complex::tensor ordering
            let src_bl = blocks_of(&self.source, &other.source, n);
            let tgt_bl = blocks_of(&self.target, &other.target, n);
            if src_bl.is_empty() || !target.terms.contains_key(&n) {
                continue;
            }
            let mut entries: Vec<Vec<Option<ModuleMap>>> =
                vec![vec![None; src_bl.len()]; tgt_bl.len()];
            for (si, (p, q)) in src_bl.iter().enumerate() {
                if let Some(ti) = tgt_bl.iter().position(|(a, b)| a == p && b == q) {
                    entries[ti][si] = Some(self.comp(*p).tensor(&other.comp(*q))?);
                }
            }
            let d = assemble_block_map(
                &source.term(n),
                &target.term(n),
                &src_bl,
                &tgt_bl,
                &entries,
            )?;
            comps.insert(n, d);
        }
        ChainMap::new(source, target, comps)
    }

    pub fn cone(&self) -> Result<Complex> {
        let c = &self.source;
        let d = &self.target;
        let lo = (c.lo() - 1).min(d.lo());
        let hi = (c.hi() - 1).max(d.hi());
        let mut terms = BTreeMap::new();
        for n in lo..=hi {
            let t = c.term(n + 1).direct_sum(&d.term(n))?;
            if !t.gens.is_empty() {
                terms.insert(n, t);
            }
        }
        let mut diffs = BTreeMap::new();
        for n in lo..=hi {
            let (Some(src), Some(tgt)) = (terms.get(&n), terms.get(&(n + 1))) else {
                continue;
            };
            // d(c, x) = (-d_C c, f(c) + d_D x)
            let zero = c.ring.zero();
            let mut cols = vec![vec![zero; tgt.gens.len()]; src.gens.len()];
            let c_rank = c.term(n + 1).gens.len();
            let c_rank_t = c.term(n + 2).gens.len();
            let dc = c.diff(n + 1);
            let f = self.comp(n + 1);
            let dd = d.diff(n);
            for j in 0..c_rank {
                // -d_C into the C block
                for (i, e) in dc.cols[j].iter().enumerate() {
                    cols[j][i] = e.neg();
                }
                // f into the D block
                for (i, e) in f.cols[j].iter().enumerate() {
                    cols[j][c_rank_t + i] = e.clone();
                }
            }
            for j in 0..d.term(n).gens.len() {
                for (i, e) in dd.cols[j].iter().enumerate() {
                    cols[c_rank + j][c_rank_t + i] = e.clone();
                }
            }
            diffs.insert(
                n,
                ModuleMap { source: src.clone(), target: tgt.clone(), cols },
            );
        }
        Complex::new(c.ring.clone(), terms, diffs)
    }

    /// Induced map on cohomology; evidence for quasi-isomorphism checks.
    pub fn is_quasi_iso(&self, iwindow: Option<Window>) -> Result<QuasiIsoReport> {
        let hs = self.source.cohomology(iwindow)?;
        let ht = self.target.cohomology(iwindow)?;
        let lo = self.source.lo().min(self.target.lo());
        let hi = self.source.hi().max(self.target.hi());
        let mut degrees = BTreeMap::new();
        let mut ok = true;
        for n in lo..=hi {
            let iso = induced_iso(self, n, &hs, &ht)?;
            ok &= iso.iso;
            degrees.insert(n, iso);
        }
        Ok(QuasiIsoReport { quasi_iso: ok, degrees })
    }
}

fn blocks_of(a: &Complex, b: &Complex, n: i64) -> Vec<(i64, i64)> {
    let mut bl = Vec::new();
    for p in a.lo()..=a.hi() {
        let q = n - p;
        if a.terms.contains_key(&p) && b.terms.contains_key(&q) {
            bl.push((p, q));
        }
    }
    bl
}

pub struct InducedIso {
    pub iso: bool,
    pub source_inv: IsoInvariants,
    pub target_inv: IsoInvariants,
}

pub struct QuasiIsoReport {
    pub quasi_iso: bool,
    pub degrees: BTreeMap<i64, InducedIso>,
}

/// Check the induced map H^n(f) is an isomorphism, with invariant evidence.
fn induced_iso(
    f: &ChainMap,
    n: i64,
    hs: &CohomologyData,
    ht: &CohomologyData,
) -> Result<InducedIso> {
    let empty_group = || IsoInvariants::TotalDim(0);
    let (s_at, t_at) = (hs.at.get(&n), ht.at.get(&n));
    match (s_at, t_at) {
        (None, None) => Ok(InducedIso { iso: true, source_inv: empty_group(), target_inv: empty_group() }),
        (Some(CohomAt::Group(gs)), other) => {
            let source_inv = gs.module.iso_invariants(None)?;
            let target_inv = match other {
                Some(CohomAt::Group(gt)) => gt.module.iso_invariants(None)?,
                _ => IsoInvariants::IntegerFactors { torsion: vec![], rank: 0 },
            };
            if matches!(other, None) {
                return Ok(InducedIso { iso: source_inv.is_zero(), source_inv, target_inv });
            }
            let Some(CohomAt::Group(gt)) = other else {
                return Err(Error::Internal("mixed cohomology kinds".into()));
            };
            // surjectivity: target gens reachable mod boundaries from image
            let fmat = f.comp(n).zmat()?;
            let mut img_cols = Vec::new();
            for rep in &gs.reps {
                let v = ZMat::from_cols(rep.len(), vec![rep.clone()]);
                let img = fmat.mul(&v);
                img_cols.push(img.col(0));
            }
            let img = ZMat::from_cols(gt.ambient, img_cols);
            let span = img.hcat(&gt.bmat);
            let mut surjective = true;
            for rep in &gt.reps {
                if smith::z_solve(&span, rep).is_none() {
                    surjective = false;
                    break;
                }
            }
            let iso = surjective && source_inv == target_inv;
            Ok(InducedIso { iso, source_inv, target_inv })
        }
        (s, t) => {
            // slot world (graded / finite algebra / plain field)
            let empty = BTreeMap::new();
            let slots_s = match s {
                Some(CohomAt::Slots(x)) => x,
                None => &empty,
                _ => return Err(Error::Internal("mixed cohomology kinds".into())),
            };
            let slots_t = match t {
                Some(CohomAt::Slots(x)) => x,
                None => &empty,
                _ => return Err(Error::Internal("mixed cohomology kinds".into())),
            };
            let mut keys: std::collections::BTreeSet<i64> = slots_s.keys().copied().collect();
            keys.extend(slots_t.keys().copied());
            let mut iso = true;
            let mut sdims = BTreeMap::new();
            let mut tdims = BTreeMap::new();
            for d in keys {
                let sd = slots_s.get(&d).map_or(0, |x| x.dim);
                let td = slots_t.get(&d).map_or(0, |x| x.dim);
                sdims.insert(d, sd);
                tdims.insert(d, td);
                if sd != td {
                    iso = false;
                    continue;
                }
                if sd == 0 {
                    continue;
                }
                let (ss, tt) = (slots_s.get(&d).unwrap(), slots_t.get(&d).unwrap());
                // map source reps and test they span H^n(target)
                let fm = f
                    .comp(n)
                    .slot_matrix(d, &ss.basis, &tt.basis)?;
                let img = fm.mul(&ss.reps)?;
                let mut span = tt.covered.clone();
                let mut rank = 0;
                for j in 0..img.cols {
                    let col = img.col(j);
                    if mat::solve(&span, &col)?.is_none() {
                        span = span.hcat(&Mat::from_cols(
                            fm.kind.clone(),
                            col.len(),
                            vec![col],
                        ));
                        rank += 1;
                    }
                }
                if rank != td {
                    iso = false;
                }
            }
            let fold = |m: BTreeMap<i64, usize>| -> IsoInvariants {
                IsoInvariants::TotalDim(m.values().sum())
            };
            Ok(InducedIso { iso, source_inv: fold(sdims), target_inv: fold(tdims) })
        }
    }
}

/// Zero test for a chain map (all components zero as module maps).
pub fn chain_map_is_zero(f: &ChainMap) -> Result<bool> {
    for n in f.source.lo()..=f.source.hi() {
        if !f.comp(n).is_zero_map()? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Equality of chain maps as maps of modules (difference is zero).
pub fn chain_maps_equal(f: &ChainMap, g: &ChainMap) -> Result<bool> {
    chain_map_is_zero(&f.add(&g.neg())?)
}

/// Zero test for an element of a module presented by a complex term.
pub fn element_zero(m: &PresentedModule, v: &[RingElement]) -> Result<bool> {
    element_is_zero_in(m, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn two_term_z(mult: i64, lo: i64) -> Complex {
        let z = BaseRing::integers();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let mut terms = BTreeMap::new();
        terms.insert(lo, m.clone());
        terms.insert(lo + 1, m.clone());
        let mut diffs = BTreeMap::new();
        diffs.insert(
            lo,
            ModuleMap::new(m.clone(), m.clone(), vec![vec![z.from_i64(mult)]]).unwrap(),
        );
        Complex::new(z, terms, diffs).unwrap()
    }

    #[test]
    fn cohomology_of_mult_4() {
        // [Z -*4-> Z] in degrees (-1, 0): H^0 = Z/4, H^-1 = 0
        let c = two_term_z(4, -1);
        let t = c.cohomology_table(None).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(4)], rank: 0 })
        );
        assert_eq!(t.get(&-1), None);
    }

    #[test]
    fn zero_complex_cohomology() {
        let z = BaseRing::integers();
        let c = Complex::zero(&z);
        assert!(c.cohomology_table(None).unwrap().is_empty());
    }

    #[test]
    fn koszul_qx_cohomology() {
        // Kos(Q[x]; x) = [A(1) -x-> A] in degrees (-1, 0): H^0 = Q at weight 0
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap();
        let a1 = PresentedModule::free(&r, vec![("e", 1)]);
        let a0 = PresentedModule::free(&r, vec![("1", 0)]);
        let x = r.var(0).unwrap();
        let mut terms = BTreeMap::new();
        terms.insert(-1, a1.clone());
        terms.insert(0, a0.clone());
        let mut diffs = BTreeMap::new();
        diffs.insert(-1, ModuleMap::new(a1, a0, vec![vec![x]]).unwrap());
        let c = Complex::new(r, terms, diffs).unwrap();
        let t = c.cohomology_table(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert { window: Window::new(0, 4), dims: vec![1, 0, 0, 0, 0] })
        );
        assert_eq!(t.get(&-1), None);
    }

    #[test]
    fn tensor_rank_formula() {
        // [A->A] tensor [A->A]: ranks 1, 2, 1
        let c = two_term_z(2, 0);
        let t = c.tensor(&c).unwrap();
        assert_eq!(t.term(0).rank(), 1);
        assert_eq!(t.term(1).rank(), 2);
        assert_eq!(t.term(2).rank(), 1);
        // d o d = 0 verified in constructor
    }

    #[test]
    fn tensor_with_unit_is_identity_shape() {
        let z = BaseRing::integers();
        let c = two_term_z(3, 0);
        let unit = Complex::from_module(PresentedModule::free(&z, vec![("1", 0)]), 0);
        let t = c.tensor(&unit).unwrap();
        assert_eq!(t.term(0).rank(), 1);
        assert_eq!(t.term(1).rank(), 1);
        let ct = c.cohomology_table(None).unwrap();
        let tt = t.cohomology_table(None).unwrap();
        assert_eq!(ct, tt);
    }

    #[test]
    fn hom_complex_ext_z2_z4() {
        // Hom(Kos(Z;2), Z/4): H^0 = Z/2, H^1 = Z/2
        let z = BaseRing::integers();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let mut terms = BTreeMap::new();
        terms.insert(-1, m.clone());
        terms.insert(0, m.clone());
        let mut diffs = BTreeMap::new();
        diffs.insert(
            -1,
            ModuleMap::new(m.clone(), m.clone(), vec![vec![z.from_i64(2)]]).unwrap(),
        );
        let kos = Complex::new(z.clone(), terms, diffs).unwrap();
        let z4 = Complex::from_module(PresentedModule::cyclic(&z, vec![z.from_i64(4)]), 0);
        let h = kos.hom_from(&z4).unwrap();
        let t = h.cohomology_table(None).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 })
        );
        assert_eq!(
            t.get(&1),
            Some(&IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 })
        );
    }

    #[test]
    fn cone_of_identity_acyclic() {
        let c = two_term_z(6, 0);
        let id = ChainMap::identity(&c);
        let cone = id.cone().unwrap();
        assert!(cone.cohomology_table(None).unwrap().is_empty());
    }

    #[test]
    fn cone_of_mult_2() {
        // cone(Z -2-> Z) has H^0 = Z/2
        let z = BaseRing::integers();
        let m = Complex::from_module(PresentedModule::free(&z, vec![("e", 0)]), 0);
        let f = ChainMap::new(m.clone(), m.clone(), {
            let mut comps = BTreeMap::new();
            comps.insert(
                0,
                ModuleMap::new(m.term(0), m.term(0), vec![vec![z.from_i64(2)]]).unwrap(),
            );
            comps
        })
        .unwrap();
        let cone = f.cone().unwrap();
        let t = cone.cohomology_table(None).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 })
        );
    }

    #[test]
    fn quasi_iso_detection() {
        // identity is a quasi-iso; multiplication by 2 on Z[0] is not
        let z = BaseRing::integers();
        let m = Complex::from_module(PresentedModule::free(&z, vec![("e", 0)]), 0);
        let id = ChainMap::identity(&m);
        assert!(id.is_quasi_iso(None).unwrap().quasi_iso);
        let f = ChainMap {
            source: m.clone(),
            target: m.clone(),
            comps: {
                let mut comps = BTreeMap::new();
                comps.insert(
                    0,
                    ModuleMap::new(m.term(0), m.term(0), vec![vec![z.from_i64(2)]]).unwrap(),
                );
                comps
            },
        };
        assert!(!f.is_quasi_iso(None).unwrap().quasi_iso);
    }

    #[test]
    fn dd_zero_enforced() {
        let z = BaseRing::integers();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let mut terms = BTreeMap::new();
        terms.insert(0, m.clone());
        terms.insert(1, m.clone());
        terms.insert(2, m.clone());
        let one = z.from_i64(1);
        let mut diffs = BTreeMap::new();
        diffs.insert(0, ModuleMap::new(m.clone(), m.clone(), vec![vec![one.clone()]]).unwrap());
        diffs.insert(1, ModuleMap::new(m.clone(), m.clone(), vec![vec![one]]).unwrap());
        assert!(Complex::new(z, terms, diffs).is_err());
    }

    #[test]
    fn cohomology_additive_on_sums() {
        let c = two_term_z(4, 0);
        let d = two_term_z(3, -1);
        let s = c.direct_sum(&d).unwrap();
        let tc = c.cohomology_table(None).unwrap();
        let td = d.cohomology_table(None).unwrap();
        let ts = s.cohomology_table(None).unwrap();
        for (n, inv) in &tc {
            if !td.contains_key(n) {
                assert_eq!(ts.get(n), Some(inv));
            }
        }
        for (n, inv) in &td {
            if !tc.contains_key(n) {
                assert_eq!(ts.get(n), Some(inv));
            }
        }
    }
}
