//! Inverse towers, direct systems, and precision semantics.
//!
//! A finite horizon plus a lag bound is the computable proxy for pro-zero:
//! verdicts always carry (N, L) and never claim anything beyond the horizon.
//! Over graded backends every zero test is a zero-in-window test.
//!
//! The cone-tower machinery at the bottom is the shared verdict engine: a
//! stagewise map of towers of complexes is accepted when the cohomology
//! towers of its cones are pro-zero up to the allowed lag.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::complex::{ChainMap, CohomAt, CohomologyData, Complex};
use crate::error::{Error, Result};
use crate::mat::{self, Mat};
use crate::module::{IsoInvariants, ModuleMap, PresentedModule};
use crate::smith::{self, ZMat};
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Precision {
    pub horizon: usize,
    pub lag: usize,
    pub stabilized: bool,
    pub stable_from: Option<usize>,
}

/// Inverse tower of modules: trans[i] maps stages[i+1] -> stages[i].
#[derive(Debug, Clone)]
pub struct ModuleTower {
    pub stages: Vec<PresentedModule>,
    pub trans: Vec<ModuleMap>,
}

/// Direct system of modules: trans[i] maps stages[i] -> stages[i+1].
#[derive(Debug, Clone)]
pub struct ModuleSystem {
    pub stages: Vec<PresentedModule>,
    pub trans: Vec<ModuleMap>,
}

impl ModuleTower {
    pub fn check(&self) -> Result<()> {
        if self.trans.len() + 1 != self.stages.len() {
            return Err(Error::Invalid("tower shape mismatch".into()));
        }
        Ok(())
    }

    /// Composite stages[m] -> stages[n] for m >= n.
    pub fn composite(&self, m: usize, n: usize) -> Result<ModuleMap> {
        assert!(m >= n && m < self.stages.len());
        let mut f = ModuleMap::identity(&self.stages[m]);
        for i in (n..m).rev() {
            f = f.compose(&self.trans[i])?;
        }
        Ok(f)
    }
}

impl ModuleSystem {
    pub fn composite(&self, n: usize, m: usize) -> Result<ModuleMap> {
        assert!(m >= n && m < self.stages.len());
        let mut f = ModuleMap::identity(&self.stages[n]);
        for i in n..m {
            f = f.compose(&self.trans[i])?;
        }
        Ok(f)
    }
}

/// Exact isomorphism test for a map of presented modules: surjective with
/// equal iso-invariants (f.p. modules are Hopfian, so this is sound).
pub fn map_is_iso(f: &ModuleMap, iwindow: Option<Window>) -> Result<bool> {
    let si = f.source.iso_invariants(iwindow)?;
    let ti = f.target.iso_invariants(iwindow)?;
    if si != ti {
        return Ok(false);
    }
    map_is_surjective(f, iwindow)
}

pub fn map_is_surjective(f: &ModuleMap, iwindow: Option<Window>) -> Result<bool> {
    use crate::ring::BaseRing;
    use crate::scalar::ScalarKind;
    match &*f.source.ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => {
            // every target generator is reachable from image + relations
            let fz = f.zmat()?;
            let span = fz.hcat(&f.target.rel_zmat()?);
            for i in 0..f.target.gens.len() {
                let mut e = vec![num_bigint::BigInt::from(0); f.target.gens.len()];
                e[i] = num_bigint::BigInt::from(1);
                if smith::z_solve(&span, &e).is_none() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => {
            let degrees: Vec<i64> = match iwindow {
                Some(w) => w.iter().collect(),
                None => vec![0],
            };
            for d in degrees {
                let sb = f.source.slot_basis(d)?;
                let tb = f.target.slot_basis(d)?;
                let fm = f.slot_matrix(d, &sb, &tb)?;
                let rel = f.target.rel_matrix_slot(d, &tb)?;
                let span = fm.hcat(&rel);
                let full = rel.hcat(&Mat::identity(rel.kind.clone(), tb.len()));
                // rank of span must equal rank of the full ambient mod rels
                if mat::rank(&span)? != mat::rank(&full)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Zero test for a module map, windowed over graded backends.
pub fn map_is_zero(f: &ModuleMap, iwindow: Option<Window>) -> Result<bool> {
    if f.source.ring.is_graded() {
        let w = iwindow
            .ok_or_else(|| Error::WindowRequired("zero test over a graded backend".into()))?;
        for d in w.iter() {
            let sb = f.source.slot_basis(d)?;
            if sb.is_empty() {
                continue;
            }
            let tb = f.target.slot_basis(d)?;
            let fm = f.slot_matrix(d, &sb, &tb)?;
            let rel = f.target.rel_matrix_slot(d, &tb)?;
            for j in 0..fm.cols {
                let col = fm.col(j);
                if col.iter().all(|s| s.is_zero()) {
                    continue;
                }
                if mat::solve(&rel, &col)?.is_none() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    } else {
        f.is_zero_map()
    }
}

/// Limit of an inverse tower: stabilized when transitions are isomorphisms
/// from some stage onward (checked on invariants and on bijectivity).
pub fn tower_limit(
    t: &ModuleTower,
    iwindow: Option<Window>,
) -> Result<(PresentedModule, Precision)> {
    t.check()?;
    let n = t.stages.len();
    let mut stable_from = None;
    // stabilization must be witnessed by at least one isomorphic transition
    for s in 0..n.saturating_sub(1) {
        let mut all = true;
        for i in s..n - 1 {
            if !map_is_iso(&t.trans[i], iwindow)? {
                all = false;
                break;
            }
        }
        if all {
            stable_from = Some(s);
            break;
        }
    }
    match stable_from {
        Some(s) => Ok((
            t.stages[s].clone(),
            Precision { horizon: n, lag: 0, stabilized: true, stable_from: Some(s) },
        )),
        None => Ok((
            t.stages[n - 1].clone(),
            Precision { horizon: n, lag: 0, stabilized: false, stable_from: None },
        )),
    }
}

/// Colimit of a direct system: stabilized when transitions become
/// isomorphisms, or when composites vanish (ind-zero), in which case the
/// colimit is zero.
pub fn colim_stabilize(
    s: &ModuleSystem,
    iwindow: Option<Window>,
) -> Result<(PresentedModule, Precision)> {
    let n = s.stages.len();
    if n == 0 {
        return Err(Error::Invalid("empty system".into()));
    }
    for start in 0..n.saturating_sub(1) {
        let mut all = true;
        for i in start..n - 1 {
            if !map_is_iso(&s.trans[i], iwindow)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok((
                s.stages[start].clone(),
                Precision { horizon: n, lag: 0, stabilized: true, stable_from: Some(start) },
            ));
        }
    }
    // ind-zero: composites over some lag vanish everywhere
    for lag in 1..n {
        let mut all = true;
        for i in 0..n - lag {
            if !map_is_zero(&s.composite(i, i + lag)?, iwindow)? {
                all = false;
                break;
            }
        }
        if all {
            return Ok((
                PresentedModule::zero(&s.stages[0].ring),
                Precision { horizon: n, lag, stabilized: true, stable_from: Some(0) },
            ));
        }
    }
    Ok((
        s.stages[n - 1].clone(),
        Precision { horizon: n, lag: 0, stabilized: false, stable_from: None },
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ProZeroVerdict {
    ProZeroUpTo {
        horizon: usize,
        lag: usize,
        /// witness lag per checked stage
        witnesses: Vec<usize>,
    },
    NotProZeroUpTo {
        horizon: usize,
        lag: usize,
        witness_stage: usize,
    },
}

impl ProZeroVerdict {
    pub fn is_pro_zero(&self) -> bool {
        matches!(self, ProZeroVerdict::ProZeroUpTo { .. })
    }
}

/// Pro-zero test: for every checked stage n there is m <= n + lag with the
/// composite stages[m] -> stages[n] equal to the zero map (exact, windowed
/// over graded backends). Stages beyond the horizon are never consulted.
pub fn pro_zero(
    t: &ModuleTower,
    n_check: usize,
    lag: usize,
    iwindow: Option<Window>,
) -> Result<ProZeroVerdict> {
    t.check()?;
    let total = t.stages.len();
    let n_check = n_check.min(total);
    let mut witnesses = Vec::with_capacity(n_check);
    for n in 0..n_check {
        let hi = (n + lag).min(total - 1);
        let mut found = None;
        for m in n..=hi {
            if map_is_zero(&t.composite(m, n)?, iwindow)? {
                found = Some(m - n);
                break;
            }
        }
        match found {
            Some(w) => witnesses.push(w),
            None => {
                return Ok(ProZeroVerdict::NotProZeroUpTo {
                    horizon: n_check,
                    lag,
                    witness_stage: n,
                })
            }
        }
    }
    Ok(ProZeroVerdict::ProZeroUpTo { horizon: n_check, lag, witnesses })
}

/// Pro-isomorphism certificate for a stagewise map of towers: the cokernel
/// and kernel towers must be pro-zero up to the lag.
pub fn pro_iso_check(
    t1: &ModuleTower,
    t2: &ModuleTower,
    maps: &[ModuleMap],
    lag: usize,
    iwindow: Option<Window>,
) -> Result<bool> {
    if maps.len() != t1.stages.len() || t1.stages.len() != t2.stages.len() {
        return Err(Error::Invalid("stage count mismatch".into()));
    }
    // maps must commute with transitions, exactly
    for i in 0..t1.trans.len() {
        let a = maps[i + 1].compose(&t2.trans[i])?;
        let b = t1.trans[i].compose(&maps[i])?;
        if !a.add(&b.neg())?.is_zero_map()? {
            return Err(Error::NotATowerMap);
        }
    }
    let n = t1.stages.len();
    for stage in 0..n.saturating_sub(lag) {
        let m = (stage + lag).min(n - 1);
        // cokernel control: the composite of t2 factors through the image of maps[stage]
        let comp2 = t2.composite(m, stage)?;
        if !factors_through_image(&comp2, &maps[stage], iwindow)? {
            return Ok(false);
        }
        // kernel control: kernel generators of maps[m] die under the composite of t1
        let kgens = kernel_gens(&maps[m], iwindow)?;
        let comp1 = t1.composite(m, stage)?;
        for k in kgens {
            let img = comp1.apply(&k)?;
            if !crate::module::element_is_zero_in_window(&t1.stages[stage], &img, iwindow)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn kernel_gens(f: &ModuleMap, iwindow: Option<Window>) -> Result<Vec<Vec<crate::ring::RingElement>>> {
    let kic = crate::homalg::kernel_image_cokernel(f, iwindow)?;
    Ok(kic.kernel_incl.cols)
}

/// Public wrapper used by ideal-membership checks.
pub fn factors_through_image_pub(
    g: &ModuleMap,
    f: &ModuleMap,
    iwindow: Option<Window>,
) -> Result<bool> {
    factors_through_image(g, f, iwindow)
}

/// Do all generator images of `g` land in im(f) + relations?
fn factors_through_image(
    g: &ModuleMap,
    f: &ModuleMap,
    iwindow: Option<Window>,
) -> Result<bool> {
    use crate::ring::BaseRing;
    use crate::scalar::ScalarKind;
    match &*g.source.ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => {
            let span = f.zmat()?.hcat(&f.target.rel_zmat()?);
            let gz = g.zmat()?;
            for j in 0..gz.cols {
                if smith::z_solve(&span, &gz.col(j)).is_none() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => {
            let degrees: Vec<i64> = match iwindow {
                Some(w) => w.iter().collect(),
                None => vec![0],
            };
            for d in degrees {
                let gb = g.source.slot_basis(d)?;
                if gb.is_empty() {
                    continue;
                }
                let tb = g.target.slot_basis(d)?;
                let gm = g.slot_matrix(d, &gb, &tb)?;
                let fb = f.source.slot_basis(d)?;
                let fm = f.slot_matrix(d, &fb, &tb)?;
                let span = fm.hcat(&g.target.rel_matrix_slot(d, &tb)?);
                for j in 0..gm.cols {
                    let col = gm.col(j);
                    if col.iter().all(|s| s.is_zero()) {
                        continue;
                    }
                    if mat::solve(&span, &col)?.is_none() {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

// ----- towers of complexes and the cone-verdict engine -----

/// Inverse tower of complexes: trans[i] : stages[i+1] -> stages[i].
#[derive(Debug, Clone)]
pub struct ComplexTower {
    pub stages: Vec<Complex>,
    pub trans: Vec<ChainMap>,
}

/// Cohomology tower in one (degree, slot) cell.
pub enum HTower {
    Group { stages: Vec<PresentedModule>, trans: Vec<ModuleMap> },
    Slot { dims: Vec<usize>, trans: Vec<Mat> },
}

impl HTower {
    pub fn dims(&self) -> Vec<IsoInvariants> {
        match self {
            HTower::Group { stages, .. } => stages
                .iter()
                .map(|m| m.iso_invariants(None).expect("invariants"))
                .collect(),
            HTower::Slot { dims, .. } => dims.iter().map(|d| IsoInvariants::TotalDim(*d)).collect(),
        }
    }

    fn composite_is_zero(&self, m: usize, n: usize) -> Result<bool> {
        match self {
            HTower::Group { stages, trans } => {
                let mut f = ModuleMap::identity(&stages[m]);
                for i in (n..m).rev() {
                    f = f.compose(&trans[i])?;
                }
                f.is_zero_map()
            }
            HTower::Slot { dims, trans } => {
                if dims[m] == 0 {
                    return Ok(true);
                }
                let mut f = Mat::identity(trans_kind(trans, m), dims[m]);
                for i in (n..m).rev() {
                    f = trans[i].mul(&f)?;
                }
                Ok(f.is_zero())
            }
        }
    }

    fn transition_iso(&self, i: usize) -> Result<bool> {
        match self {
            HTower::Group { trans, .. } => {
                let f = &trans[i];
                Ok(f.source.iso_invariants(None)? == f.target.iso_invariants(None)?
                    && map_is_surjective(f, None)?)
            }
            HTower::Slot { dims, trans } => {
                Ok(dims[i] == dims[i + 1] && mat::rank(&trans[i])? == dims[i])
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            HTower::Group { stages, .. } => stages.len(),
            HTower::Slot { dims, .. } => dims.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pro_zero(&self, n_check: usize, lag: usize) -> Result<ProZeroVerdict> {
        let total = self.len();
        let n_check = n_check.min(total);
        let mut witnesses = Vec::new();
        for n in 0..n_check {
            let hi = (n + lag).min(total - 1);
            let mut found = None;
            for m in n..=hi {
                if self.composite_is_zero(m, n)? {
                    found = Some(m - n);
                    break;
                }
            }
            match found {
                Some(w) => witnesses.push(w),
                None => {
                    return Ok(ProZeroVerdict::NotProZeroUpTo {
                        horizon: n_check,
                        lag,
                        witness_stage: n,
                    })
                }
            }
        }
        Ok(ProZeroVerdict::ProZeroUpTo { horizon: n_check, lag, witnesses })
    }

    /// Classify: stabilized (transitions isomorphisms from some stage),
    /// pro-zero up to the scan lag, or unstabilized.
    pub fn classify(&self, lag_max: usize) -> Result<TowerClass> {
        let n = self.len();
        for s in 0..n.saturating_sub(1) {
            let mut all = true;
            for i in s..n - 1 {
                if !self.transition_iso(i)? {
                    all = false;
                    break;
                }
            }
            if all {
                let inv = self.dims()[s].clone();
                return Ok(TowerClass::Stabilized { from: s, invariants: inv });
            }
        }
        for lag in 1..=lag_max.min(n.saturating_sub(1)) {
            if self.pro_zero(n - lag, lag)?.is_pro_zero() {
                return Ok(TowerClass::ProZero { lag });
            }
        }
        Ok(TowerClass::Unstabilized { stages: self.dims() })
    }
}

fn trans_kind(trans: &[Mat], _m: usize) -> crate::scalar::ScalarKind {
    trans
        .first()
        .map(|t| t.kind.clone())
        .unwrap_or(crate::scalar::ScalarKind::Rational)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TowerClass {
    Stabilized { from: usize, invariants: IsoInvariants },
    ProZero { lag: usize },
    Unstabilized { stages: Vec<IsoInvariants> },
}

impl TowerClass {
    /// The stabilized value, with pro-zero normalized to the zero record.
    pub fn settled(&self) -> Option<IsoInvariants> {
        match self {
            TowerClass::Stabilized { invariants, .. } => Some(invariants.clone()),
            TowerClass::ProZero { .. } => Some(IsoInvariants::TotalDim(0)),
            TowerClass::Unstabilized { .. } => None,
        }
    }

    pub fn settled_equal(&self, other: &TowerClass) -> bool {
        match (self.settled(), other.settled()) {
            (Some(a), Some(b)) => {
                (a.is_zero() && b.is_zero()) || a == b || a.total_dim() == b.total_dim() && a.total_dim().is_some()
            }
            _ => false,
        }
    }
}

/// Induced map on cohomology between two complexes with computed data, in one
/// degree. Group backends produce a ModuleMap on the H presentations; slot
/// backends a matrix per weight.
pub fn induced_h_map(
    f: &ChainMap,
    n: i64,
    hsrc: &CohomologyData,
    htgt: &CohomologyData,
) -> Result<InducedH> {
    match (hsrc.at.get(&n), htgt.at.get(&n)) {
        (Some(CohomAt::Group(gs)), Some(CohomAt::Group(gt))) => {
            let fm = f.comp(n).zmat()?;
            let span = {
                let kmat = ZMat::from_cols(gt.ambient, gt.reps.clone());
                kmat.hcat(&gt.bmat)
            };
            let mut cols = Vec::new();
            for rep in &gs.reps {
                let v = ZMat::from_cols(rep.len(), vec![rep.clone()]);
                let img = fm.mul(&v).col(0);
                let sol = smith::z_solve(&span, &img)
                    .ok_or_else(|| Error::Internal("image not a cycle".into()))?;
                cols.push(sol[..gt.reps.len()].to_vec());
            }
            let src_mod = gs.module.clone();
            let tgt_mod = gt.module.clone();
            let cols_e: Vec<Vec<crate::ring::RingElement>> = cols
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|v| int_elem_of(&src_mod.ring, v))
                        .collect()
                })
                .collect();
            Ok(InducedH::Group(ModuleMap { source: src_mod, target: tgt_mod, cols: cols_e }))
        }
        (s, t) => {
            let empty = BTreeMap::new();
            let slots_s = match s {
                Some(CohomAt::Slots(x)) => x,
                None => &empty,
                Some(CohomAt::Group(g)) => {
                    // source present as group but target absent: zero map
                    let zero_t = PresentedModule::zero(&g.module.ring);
                    return Ok(InducedH::Group(ModuleMap::zero(&g.module, &zero_t)));
                }
            };
            let slots_t = match t {
                Some(CohomAt::Slots(x)) => x,
                None => &empty,
                Some(CohomAt::Group(g)) => {
                    let zero_s = PresentedModule::zero(&g.module.ring);
                    return Ok(InducedH::Group(ModuleMap::zero(&zero_s, &g.module)));
                }
            };
            let mut keys: std::collections::BTreeSet<i64> = slots_s.keys().copied().collect();
            keys.extend(slots_t.keys().copied());
            let mut mats = BTreeMap::new();
            for d in keys {
                let sdim = slots_s.get(&d).map_or(0, |x| x.dim);
                let tdim = slots_t.get(&d).map_or(0, |x| x.dim);
                let kind = f.source.ring.linear_kind();
                if sdim == 0 || tdim == 0 {
                    mats.insert(d, Mat::zero(kind, tdim, sdim));
                    continue;
                }
                let (ss, tt) = (slots_s.get(&d).unwrap(), slots_t.get(&d).unwrap());
                let fm = f.comp(n).slot_matrix(d, &ss.basis, &tt.basis)?;
                let img = fm.mul(&ss.reps)?;
                // coordinates modulo boundaries: solve [reps | covered]
                let span = tt.reps.hcat(&tt.covered);
                let mut cols = Vec::new();
                for j in 0..img.cols {
                    let sol = mat::solve(&span, &img.col(j))?
                        .ok_or_else(|| Error::Internal("image not a cycle".into()))?;
                    cols.push(sol[..tt.dim].to_vec());
                }
                mats.insert(d, Mat::from_cols(kind, tdim, cols));
            }
            Ok(InducedH::Slots(mats))
        }
    }
}

fn int_elem_of(ring: &std::sync::Arc<crate::ring::BaseRing>, v: &num_bigint::BigInt) -> crate::ring::RingElement {
    use crate::ring::{BaseRing, Payload, RingElement};
    use crate::scalar::Scalar;
    match &**ring {
        BaseRing::Coefficient(crate::scalar::ScalarKind::Integer) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Int(v.clone())),
        },
        BaseRing::Coefficient(crate::scalar::ScalarKind::IntegerMod(m)) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Mod {
                m: *m,
                v: num_integer::Integer::mod_floor(v, &num_bigint::BigInt::from(*m)),
            }),
        },
        _ => unreachable!(),
    }
}

pub enum InducedH {
    Group(ModuleMap),
    Slots(BTreeMap<i64, Mat>),
}

/// Cohomology towers of an inverse tower of complexes, per degree (grouped or
/// split into weight slots).
pub fn cohomology_towers(
    t: &ComplexTower,
    iwindow: Option<Window>,
) -> Result<BTreeMap<i64, BTreeMap<i64, HTower>>> {
    let hs: Vec<CohomologyData> = {
        let mut v = Vec::with_capacity(t.stages.len());
        for c in &t.stages {
            v.push(c.cohomology(iwindow)?);
        }
        v
    };
    let lo = t.stages.iter().map(|c| c.lo()).min().unwrap_or(0);
    let hi = t.stages.iter().map(|c| c.hi()).max().unwrap_or(0);
    let mut out: BTreeMap<i64, BTreeMap<i64, HTower>> = BTreeMap::new();
    for n in lo..=hi {
        // group or slots?
        let grouped = hs.iter().any(|h| matches!(h.at.get(&n), Some(CohomAt::Group(_))));
        if grouped {
            let mut stages = Vec::new();
            let mut trans = Vec::new();
            for (k, h) in hs.iter().enumerate() {
                let m = match h.at.get(&n) {
                    Some(CohomAt::Group(g)) => g.module.clone(),
                    _ => PresentedModule::zero(&t.stages[k].ring),
                };
                stages.push(m);
            }
            for i in 0..t.trans.len() {
                // trans[i]: stage i+1 -> stage i
                match induced_h_map(&t.trans[i], n, &hs[i + 1], &hs[i])? {
                    InducedH::Group(m) => trans.push(m),
                    InducedH::Slots(_) => return Err(Error::Internal("mixed backends".into())),
                }
            }
            out.entry(n)
                .or_default()
                .insert(0, HTower::Group { stages, trans });
        } else {
            // collect slot keys
            let mut keys = std::collections::BTreeSet::new();
            for h in &hs {
                if let Some(CohomAt::Slots(slots)) = h.at.get(&n) {
                    keys.extend(slots.keys().copied());
                }
            }
            for d in keys {
                let dims: Vec<usize> = hs
                    .iter()
                    .map(|h| match h.at.get(&n) {
                        Some(CohomAt::Slots(slots)) => slots.get(&d).map_or(0, |s| s.dim),
                        _ => 0,
                    })
                    .collect();
                let mut trans = Vec::new();
                for i in 0..t.trans.len() {
                    match induced_h_map(&t.trans[i], n, &hs[i + 1], &hs[i])? {
                        InducedH::Slots(mats) => {
                            let kind = t.stages[0].ring.linear_kind();
                            trans.push(
                                mats.get(&d)
                                    .cloned()
                                    .unwrap_or_else(|| Mat::zero(kind, dims[i], dims[i + 1])),
                            );
                        }
                        InducedH::Group(_) => return Err(Error::Internal("mixed backends".into())),
                    }
                }
                out.entry(n).or_default().insert(d, HTower::Slot { dims, trans });
            }
        }
    }
    Ok(out)
}

/// Table of tower classifications per cohomological degree (and weight slot).
pub type TowerTable = BTreeMap<i64, BTreeMap<i64, TowerClass>>;

pub fn tower_table(t: &ComplexTower, iwindow: Option<Window>, lag_max: usize) -> Result<TowerTable> {
    let towers = cohomology_towers(t, iwindow)?;
    let mut out = TowerTable::new();
    for (n, slots) in towers {
        for (d, tw) in slots {
            let class = tw.classify(lag_max)?;
            if matches!(&class, TowerClass::Stabilized { invariants, .. } if invariants.is_zero()) {
                continue;
            }
            if matches!(&class, TowerClass::ProZero { .. }) {
                continue;
            }
            out.entry(n).or_default().insert(d, class);
        }
    }
    Ok(out)
}

/// Compare two tower tables: every settled cell must agree (pro-zero counts
/// as zero); unsettled cells fail the comparison.
pub fn tables_settled_equal(a: &TowerTable, b: &TowerTable) -> bool {
    let mut keys: std::collections::BTreeSet<(i64, i64)> = std::collections::BTreeSet::new();
    for (n, slots) in a.iter().chain(b.iter()) {
        for d in slots.keys() {
            keys.insert((*n, *d));
        }
    }
    for (n, d) in keys {
        let ca = a.get(&n).and_then(|s| s.get(&d));
        let cb = b.get(&n).and_then(|s| s.get(&d));
        match (ca, cb) {
            (None, None) => {}
            (Some(x), None) => {
                if x.settled().map_or(true, |i| !i.is_zero()) {
                    return false;
                }
            }
            (None, Some(x)) => {
                if x.settled().map_or(true, |i| !i.is_zero()) {
                    return false;
                }
            }
            (Some(x), Some(y)) => {
                if !x.settled_equal(y) {
                    return false;
                }
            }
        }
    }
    true
}

/// Stagewise mapping cone tower for a stagewise map fx[k] : X_k -> Y_k where
/// both sides carry transitions (tx, ty) commuting with fx exactly.
pub fn cone_tower(
    fx: &[ChainMap],
    tx: &[ChainMap],
    ty: &[ChainMap],
) -> Result<ComplexTower> {
    let n = fx.len();
    if tx.len() + 1 != n || ty.len() + 1 != n {
        return Err(Error::Invalid("cone tower shape mismatch".into()));
    }
    let mut stages = Vec::with_capacity(n);
    for f in fx {
        stages.push(f.cone()?);
    }
    let mut trans = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        // block map on cone^n = X^{n+1} (+) Y^n
        let src = &stages[i + 1];
        let tgt = &stages[i];
        let mut comps = BTreeMap::new();
        for deg in src.lo()..=src.hi() {
            let sterm = src.term(deg);
            let tterm = tgt.term(deg);
            if sterm.gens.is_empty() || tterm.gens.is_empty() {
                continue;
            }
            let zero = sterm.ring.zero();
            let mut cols = vec![vec![zero; tterm.gens.len()]; sterm.gens.len()];
            let xs = fx[i + 1].source.term(deg + 1).gens.len();
            let xt = fx[i].source.term(deg + 1).gens.len();
            let a = tx[i].comp(deg + 1);
            let b = ty[i].comp(deg);
            for j in 0..xs {
                for (r, e) in a.cols[j].iter().enumerate() {
                    cols[j][r] = e.clone();
                }
            }
            for j in 0..fx[i + 1].target.term(deg).gens.len() {
                for (r, e) in b.cols[j].iter().enumerate() {
                    cols[xs + j][xt + r] = e.clone();
                }
            }
            comps.insert(deg, ModuleMap { source: sterm, target: tterm, cols });
        }
        trans.push(ChainMap::new(stages[i + 1].clone(), stages[i].clone(), comps)?);
    }
    Ok(ComplexTower { stages, trans })
}

#[derive(Debug, Clone, Serialize)]
pub enum TowerVerdict {
    Pass {
        /// per-degree witness information
        detail: BTreeMap<i64, BTreeMap<i64, ProZeroVerdict>>,
    },
    Fail {
        degree: i64,
        slot: i64,
        verdict: ProZeroVerdict,
    },
}

impl TowerVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, TowerVerdict::Pass { .. })
    }
}

/// The shared verdict engine: a stagewise map of towers is accepted when all
/// cone cohomology towers are pro-zero up to (n_check, lag).
pub fn map_tower_verdict(
    fx: &[ChainMap],
    tx: &[ChainMap],
    ty: &[ChainMap],
    n_check: usize,
    lag: usize,
    iwindow: Option<Window>,
) -> Result<TowerVerdict> {
    let cones = cone_tower(fx, tx, ty)?;
    let towers = cohomology_towers(&cones, iwindow)?;
    let mut detail: BTreeMap<i64, BTreeMap<i64, ProZeroVerdict>> = BTreeMap::new();
    for (n, slots) in towers {
        for (d, tw) in slots {
            let v = tw.pro_zero(n_check, lag)?;
            if !v.is_pro_zero() {
                return Ok(TowerVerdict::Fail { degree: n, slot: d, verdict: v });
            }
            detail.entry(n).or_default().insert(d, v);
        }
    }
    Ok(TowerVerdict::Pass { detail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::BaseRing;

    fn z_quot(n: i64) -> PresentedModule {
        let z = BaseRing::integers();
        PresentedModule::cyclic(&z, vec![z.from_i64(n)])
    }

    #[test]
    fn tower_limit_z12_mod_powers_of_2() {
        // Z/gcd(12, 2^n): Z/2, Z/4, Z/4, ... stabilizes at stage index 1 (n=2)
        let z = BaseRing::integers();
        let stages = vec![z_quot(2), z_quot(4), z_quot(4), z_quot(4)];
        let mut trans = Vec::new();
        for i in 0..3 {
            trans.push(
                ModuleMap::new(
                    stages[i + 1].clone(),
                    stages[i].clone(),
                    vec![vec![z.from_i64(1)]],
                )
                .unwrap(),
            );
        }
        let t = ModuleTower { stages, trans };
        let (limit, prec) = tower_limit(&t, None).unwrap();
        assert!(prec.stabilized);
        assert_eq!(prec.stable_from, Some(1));
        assert_eq!(
            limit.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![num_bigint::BigInt::from(4)], rank: 0 }
        );
    }

    #[test]
    fn tower_limit_2adic_unstabilized() {
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> = (1..=5).map(|n| z_quot(1 << n)).collect();
        let mut trans = Vec::new();
        for i in 0..4 {
            trans.push(
                ModuleMap::new(
                    stages[i + 1].clone(),
                    stages[i].clone(),
                    vec![vec![z.from_i64(1)]],
                )
                .unwrap(),
            );
        }
        let t = ModuleTower { stages, trans };
        let (_, prec) = tower_limit(&t, None).unwrap();
        assert!(!prec.stabilized);
    }

    #[test]
    fn pro_zero_zero_tower() {
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> =
            (0..4).map(|_| PresentedModule::zero(&z)).collect();
        let trans: Vec<ModuleMap> = (0..3)
            .map(|i| ModuleMap::zero(&stages[i + 1], &stages[i]))
            .collect();
        let t = ModuleTower { stages, trans };
        let v = pro_zero(&t, 3, 0, None).unwrap();
        assert!(v.is_pro_zero());
    }

    #[test]
    fn pro_zero_identity_on_z2_fails() {
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> = (0..4).map(|_| z_quot(2)).collect();
        let trans: Vec<ModuleMap> = (0..3)
            .map(|i| {
                ModuleMap::new(
                    stages[i + 1].clone(),
                    stages[i].clone(),
                    vec![vec![z.from_i64(1)]],
                )
                .unwrap()
            })
            .collect();
        let t = ModuleTower { stages, trans };
        for lag in 0..3 {
            assert!(!pro_zero(&t, 2, lag, None).unwrap().is_pro_zero());
        }
    }

    #[test]
    fn pro_zero_monotone_in_horizon() {
        // multiplication-by-2 transitions on Z/8: composites of 3 vanish
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> = (0..6).map(|_| z_quot(8)).collect();
        let trans: Vec<ModuleMap> = (0..5)
            .map(|i| {
                ModuleMap::new(
                    stages[i + 1].clone(),
                    stages[i].clone(),
                    vec![vec![z.from_i64(2)]],
                )
                .unwrap()
            })
            .collect();
        let t = ModuleTower { stages, trans };
        let v = pro_zero(&t, 3, 3, None).unwrap();
        assert!(v.is_pro_zero());
        // monotonicity: smaller horizon also pro-zero
        let v2 = pro_zero(&t, 2, 3, None).unwrap();
        assert!(v2.is_pro_zero());
        // insufficient lag fails
        assert!(!pro_zero(&t, 3, 2, None).unwrap().is_pro_zero());
    }

    #[test]
    fn colim_gamma_of_z12() {
        // Hom(Z/2^n, Z/12) = Z/2, Z/4, Z/4 ... transitions become isos
        let z = BaseRing::integers();
        let m12 = z_quot(12);
        let mut stages = Vec::new();
        let mut maps: Vec<ModuleMap> = Vec::new();
        let mut homs = Vec::new();
        for n in 1..=4 {
            let q = z_quot(1 << n);
            homs.push(crate::homalg::hom_module(&q, &m12).unwrap());
            stages.push(homs.last().unwrap().module.clone());
        }
        // transitions: precompose with Z/2^{n+1} -> ... -> hom stage maps; for the
        // cyclic case the generator map sends h_i to the matching multiple
        for n in 0..3 {
            // stage n gen is a map Z/2^{n+1} -> Z/12; its transition image is the
            // composite with the projection Z/2^{n+2} -> Z/2^{n+1}
            let src = &homs[n];
            let tgt = &homs[n + 1];
            let proj = ModuleMap::new(
                z_quot(1 << (n + 2)),
                z_quot(1 << (n + 1)),
                vec![vec![z.from_i64(1)]],
            )
            .unwrap();
            let cols: Vec<Vec<crate::ring::RingElement>> = src
                .gen_maps
                .iter()
                .map(|g| {
                    let composed = proj.compose(g).unwrap();
                    crate::homalg::hom_coordinates(tgt, &composed).unwrap()
                })
                .collect();
            maps.push(ModuleMap {
                source: stages[n].clone(),
                target: stages[n + 1].clone(),
                cols,
            });
        }
        let sys = ModuleSystem { stages, trans: maps };
        let (colim, prec) = colim_stabilize(&sys, None).unwrap();
        assert!(prec.stabilized);
        assert_eq!(
            colim.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![num_bigint::BigInt::from(4)], rank: 0 }
        );
    }

    #[test]
    fn pro_iso_identity() {
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> = (1..=4).map(|n| z_quot(1 << n)).collect();
        let trans: Vec<ModuleMap> = (0..3)
            .map(|i| {
                ModuleMap::new(
                    stages[i + 1].clone(),
                    stages[i].clone(),
                    vec![vec![z.from_i64(1)]],
                )
                .unwrap()
            })
            .collect();
        let t = ModuleTower { stages: stages.clone(), trans: trans.clone() };
        let maps: Vec<ModuleMap> = stages.iter().map(ModuleMap::identity).collect();
        assert!(pro_iso_check(&t, &t, &maps, 0, None).unwrap());
    }

    #[test]
    fn pro_iso_zero_vs_constant_fails() {
        let z = BaseRing::integers();
        let c: Vec<PresentedModule> = (0..3).map(|_| z_quot(2)).collect();
        let zero: Vec<PresentedModule> = (0..3).map(|_| PresentedModule::zero(&z)).collect();
        let t1 = ModuleTower {
            stages: c.clone(),
            trans: (0..2)
                .map(|i| {
                    ModuleMap::new(c[i + 1].clone(), c[i].clone(), vec![vec![z.from_i64(1)]])
                        .unwrap()
                })
                .collect(),
        };
        let t2 = ModuleTower {
            stages: zero.clone(),
            trans: (0..2).map(|i| ModuleMap::zero(&zero[i + 1], &zero[i])).collect(),
        };
        let maps: Vec<ModuleMap> = (0..3).map(|i| ModuleMap::zero(&c[i], &zero[i])).collect();
        assert!(!pro_iso_check(&t1, &t2, &maps, 1, None).unwrap());
    }

    #[test]
    fn reindexed_filtration_pro_iso() {
        // T1 = {Z/4^n}, T2 = {Z/2^n} reindexed by doubling = {Z/4^n}: identity-like
        let z = BaseRing::integers();
        let t1_stages: Vec<PresentedModule> = (1..=4).map(|n| z_quot(4i64.pow(n))).collect();
        let t2_stages: Vec<PresentedModule> = (1..=4).map(|n| z_quot(4i64.pow(n))).collect();
        let mk = |stages: &Vec<PresentedModule>| ModuleTower {
            stages: stages.clone(),
            trans: (0..3)
                .map(|i| {
                    ModuleMap::new(
                        stages[i + 1].clone(),
                        stages[i].clone(),
                        vec![vec![z.from_i64(1)]],
                    )
                    .unwrap()
                })
                .collect(),
        };
        let t1 = mk(&t1_stages);
        let t2 = mk(&t2_stages);
        let maps: Vec<ModuleMap> = t1_stages
            .iter()
            .zip(&t2_stages)
            .map(|(a, b)| ModuleMap::new(a.clone(), b.clone(), vec![vec![z.from_i64(1)]]).unwrap())
            .collect();
        assert!(pro_iso_check(&t1, &t2, &maps, 1, None).unwrap());
    }
}
