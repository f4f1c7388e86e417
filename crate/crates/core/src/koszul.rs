//! Koszul complexes on element powers, truncated telescope complexes, the
//! canonical map u, classical torsion/completion on modules, and the
//! weak-proregularity checker.
//!
//! Power convention: stage n uses elementwise powers (a_1^n, ..., a_r^n),
//! cofinal with the ideal powers. Koszul transitions multiply the i-th
//! exterior direction by a_i; telescope stages include into each other by
//! basis inclusion. Localizations are never materialized.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{ChainMap, Complex};
use crate::error::{Error, Result};
use crate::homalg::{hom_coordinates, hom_module};
use crate::module::{Generator, ModuleMap, PresentedModule};
use crate::ring::{BaseRing, RingElement, RingMap};
use crate::tower::{
    colim_stabilize, pro_zero, tower_limit, ComplexTower, ModuleSystem, ModuleTower, Precision,
    ProZeroVerdict,
};
use crate::window::Window;

#[derive(Debug, Clone)]
pub struct SequenceSpec {
    pub ring: Arc<BaseRing>,
    pub elements: Vec<RingElement>,
}

impl SequenceSpec {
    pub fn new(ring: Arc<BaseRing>, elements: Vec<RingElement>) -> Result<SequenceSpec> {
        if elements.is_empty() {
            return Err(Error::Invalid("a sequence needs at least one element".into()));
        }
        for e in &elements {
            if e.ring != ring {
                return Err(Error::RingMismatch);
            }
        }
        Ok(SequenceSpec { ring, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn weight_of(&self, i: usize) -> i64 {
        self.elements[i].weight().unwrap_or(0)
    }
}

/// Koszul complex on (a_1^n, ..., a_r^n) in degrees [-r, 0].
pub fn koszul(s: &SequenceSpec, n: u32) -> Result<Complex> {
    assert!(n >= 1);
    let mut c: Option<Complex> = None;
    for (i, a) in s.elements.iter().enumerate() {
        let single = koszul_single(s, i, a.pow(n)?, n)?;
        c = Some(match c {
            None => single,
            Some(acc) => acc.tensor(&single)?,
        });
    }
    Ok(c.unwrap())
}

fn koszul_single(s: &SequenceSpec, i: usize, power: RingElement, n: u32) -> Result<Complex> {
    let w = s.weight_of(i) * n as i64;
    let top = PresentedModule::free(&s.ring, vec![(&format!("e{i}"), w)]);
    let bot = PresentedModule::free(&s.ring, vec![("1", 0)]);
    let mut terms = BTreeMap::new();
    terms.insert(-1, top.clone());
    terms.insert(0, bot.clone());
    let mut diffs = BTreeMap::new();
    diffs.insert(-1, ModuleMap::new(top, bot, vec![vec![power]])?);
    Complex::new(s.ring.clone(), terms, diffs)
}

/// Koszul tower: stages 1..=horizon with transition maps
/// stage n+1 -> stage n (identity in degree 0, multiplication by a_i on the
/// i-th exterior direction).
pub fn koszul_tower(s: &SequenceSpec, horizon: u32) -> Result<ComplexTower> {
    let stages: Vec<Complex> = {
        let mut v = Vec::new();
        for n in 1..=horizon {
            v.push(koszul(s, n)?);
        }
        v
    };
    let mut trans = Vec::new();
    for n in 1..horizon {
        // stage n+1 -> stage n, built as tensor of single-element transitions
        let mut f: Option<ChainMap> = None;
        for (i, a) in s.elements.iter().enumerate() {
            let src = koszul_single(s, i, a.pow(n + 1)?, n + 1)?;
            let tgt = koszul_single(s, i, a.pow(n)?, n)?;
            let mut comps = BTreeMap::new();
            comps.insert(
                -1,
                ModuleMap::new(src.term(-1), tgt.term(-1), vec![vec![a.clone()]])?,
            );
            comps.insert(0, ModuleMap::identity(&src.term(0)));
            let single = ChainMap::new(src, tgt, comps)?;
            f = Some(match f {
                None => single,
                Some(acc) => acc.tensor(&single)?,
            });
        }
        trans.push(f.unwrap());
    }
    // transitions are indexed stage n+1 -> stage n; reverse into tower order
    Ok(ComplexTower { stages, trans })
}

/// Telescope truncation at stage n, in degrees [0, r].
///
/// Single element: Tel^0 free on e_0..e_n, Tel^1 free on t_0..t_n with
/// d(e_0) = t_0 and d(e_i) = t_{i-1} - a t_i. Multi-element telescopes are
/// tensor products of single-element ones.
pub fn telescope(s: &SequenceSpec, n: u32) -> Result<Complex> {
    let mut c: Option<Complex> = None;
    for i in 0..s.len() {
        let single = telescope_single(s, i, n)?;
        c = Some(match c {
            None => single,
            Some(acc) => acc.tensor(&single)?,
        });
    }
    Ok(c.unwrap())
}

fn telescope_single(s: &SequenceSpec, i: usize, n: u32) -> Result<Complex> {
    let a = &s.elements[i];
    let w = s.weight_of(i);
    let e_gens: Vec<(String, i64)> = (0..=n)
        .map(|k| {
            let weight = if k == 0 { 0 } else { -((k as i64 - 1) * w) };
            (format!("e{i}_{k}"), weight)
        })
        .collect();
    let t_gens: Vec<(String, i64)> = (0..=n)
        .map(|k| (format!("t{i}_{k}"), -(k as i64 * w)))
        .collect();
    let tel0 = PresentedModule::free(
        &s.ring,
        e_gens.iter().map(|(n, w)| (n.as_str(), *w)).collect(),
    );
    let tel1 = PresentedModule::free(
        &s.ring,
        t_gens.iter().map(|(n, w)| (n.as_str(), *w)).collect(),
    );
    let zero = s.ring.zero();
    let one = s.ring.one();
    let mut cols = Vec::new();
    for k in 0..=n as usize {
        let mut col = vec![zero.clone(); (n + 1) as usize];
        if k == 0 {
            col[0] = one.clone();
        } else {
            col[k - 1] = one.clone();
            col[k] = a.neg();
        }
        cols.push(col);
    }
    let mut terms = BTreeMap::new();
    terms.insert(0, tel0.clone());
    terms.insert(1, tel1.clone());
    let mut diffs = BTreeMap::new();
    diffs.insert(0, ModuleMap::new(tel0, tel1, cols)?);
    Complex::new(s.ring.clone(), terms, diffs)
}

/// Stage inclusion telescope(s, n) -> telescope(s, n+1) (basis inclusion).
pub fn telescope_inclusion(s: &SequenceSpec, n: u32) -> Result<ChainMap> {
    let mut f: Option<ChainMap> = None;
    for i in 0..s.len() {
        let src = telescope_single(s, i, n)?;
        let tgt = telescope_single(s, i, n + 1)?;
        let zero = s.ring.zero();
        let one = s.ring.one();
        let mut comps = BTreeMap::new();
        for deg in 0..=1i64 {
            let st = src.term(deg);
            let tt = tgt.term(deg);
            let mut cols = Vec::new();
            for k in 0..st.gens.len() {
                let mut col = vec![zero.clone(); tt.gens.len()];
                col[k] = one.clone();
                cols.push(col);
            }
            comps.insert(deg, ModuleMap::new(st, tt, cols)?);
        }
        let single = ChainMap::new(src, tgt, comps)?;
        f = Some(match f {
            None => single,
            Some(acc) => acc.tensor(&single)?,
        });
    }
    Ok(f.unwrap())
}

/// The canonical map u : telescope(s, n) -> (ring in degree 0),
/// e_0 |-> 1, e_i |-> 0, degree >= 1 |-> 0.
pub fn u_map(s: &SequenceSpec, n: u32) -> Result<ChainMap> {
    let mut f: Option<ChainMap> = None;
    for i in 0..s.len() {
        let src = telescope_single(s, i, n)?;
        let unit = Complex::from_module(PresentedModule::free(&s.ring, vec![("1", 0)]), 0);
        let zero = s.ring.zero();
        let one = s.ring.one();
        let st = src.term(0);
        let mut cols = vec![vec![zero.clone()]; st.gens.len()];
        cols[0] = vec![one.clone()];
        let mut comps = BTreeMap::new();
        comps.insert(0, ModuleMap::new(st, unit.term(0), cols)?);
        let single = ChainMap::new(src, unit, comps)?;
        f = Some(match f {
            None => single,
            Some(acc) => acc.tensor(&single)?,
        });
    }
    Ok(f.unwrap())
}

/// Base change of a complex of free modules along a ring map: generators are
/// kept (weights coerced for ungraded targets), differential entries mapped.
pub fn base_change_free(c: &Complex, f: &RingMap) -> Result<Complex> {
    let graded_target = f.target.is_graded();
    let mut terms = BTreeMap::new();
    for (n, t) in &c.terms {
        if !t.rels.is_empty() {
            return Err(Error::UnsupportedShape("base change needs free terms".into()));
        }
        let gens: Vec<(String, i64)> = t
            .gens
            .iter()
            .map(|g| (g.name.clone(), if graded_target { g.weight } else { 0 }))
            .collect();
        terms.insert(
            *n,
            PresentedModule::free(&f.target, gens.iter().map(|(n, w)| (n.as_str(), *w)).collect()),
        );
    }
    let mut diffs = BTreeMap::new();
    for (n, d) in &c.diffs {
        let src = terms.get(n).unwrap().clone();
        let tgt = terms.get(&(n + 1)).unwrap().clone();
        let mut cols = Vec::new();
        for col in &d.cols {
            let mut v = Vec::new();
            for e in col {
                v.push(f.apply(e)?);
            }
            cols.push(v);
        }
        diffs.insert(*n, ModuleMap::new(src, tgt, cols)?);
    }
    Complex::new(f.target.clone(), terms, diffs)
}

/// Bit-exact telescope base change: Tel(A; a) (x)_A B equals Tel(B; f(a))
/// under the canonical basis identification, at every stage <= horizon.
pub fn tel_base_change_check(s: &SequenceSpec, f: &RingMap, horizon: u32) -> Result<bool> {
    let mut images = Vec::new();
    for a in &s.elements {
        images.push(f.apply(a)?);
    }
    let s2 = SequenceSpec::new(f.target.clone(), images)?;
    for n in 0..=horizon {
        let lhs = base_change_free(&telescope(s, n)?, f)?;
        let rhs = telescope(&s2, n)?;
        for deg in lhs.lo()..=lhs.hi() {
            if lhs.term(deg).gens.len() != rhs.term(deg).gens.len() {
                return Ok(false);
            }
            let dl = lhs.diff(deg);
            let dr = rhs.diff(deg);
            if dl.cols != dr.cols {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Generators of the n-th power of the ideal spanned by the sequence
/// (all degree-n products of the elements).
pub fn ideal_power_products(s: &SequenceSpec, n: u32) -> Result<Vec<RingElement>> {
    if n == 0 {
        return Ok(vec![s.ring.one()]);
    }
    let mut out: Vec<RingElement> = s.elements.clone();
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &out {
            for a in &s.elements {
                next.push(p.mul(a)?);
            }
        }
        // dedupe exact duplicates to keep presentations small
        next.dedup();
        out = next;
    }
    out.dedup();
    Ok(out)
}

/// Quotient module M / a^n M.
pub fn quotient_by_power(s: &SequenceSpec, m: &PresentedModule, n: u32) -> Result<PresentedModule> {
    let prods = ideal_power_products(s, n)?;
    let zero = s.ring.zero();
    let mut rels = m.rels.clone();
    for (gi, _) in m.gens.iter().enumerate() {
        for p in &prods {
            let mut col = vec![zero.clone(); m.gens.len()];
            col[gi] = p.clone();
            rels.push(col);
        }
    }
    Ok(PresentedModule { ring: m.ring.clone(), gens: m.gens.clone(), rels })
}

/// Classical torsion: colimit of Hom(A/a^n, M) over the quotient tower.
pub fn classical_gamma(
    s: &SequenceSpec,
    m: &PresentedModule,
    horizon: u32,
) -> Result<(PresentedModule, Precision)> {
    let ring = s.ring.clone();
    let amod = PresentedModule::cyclic(&ring, vec![]);
    let mut homs = Vec::new();
    let mut stages = Vec::new();
    for n in 1..=horizon {
        let q = quotient_by_power(s, &amod, n)?;
        let h = hom_module(&q, m)?;
        stages.push(h.module.clone());
        homs.push((q, h));
    }
    let mut trans = Vec::new();
    for i in 0..(horizon as usize - 1) {
        let (ref q_next, ref h_next) = homs[i + 1];
        let (ref q_cur, ref h_cur) = homs[i];
        // projection A/a^{n+1} -> A/a^n is the identity on the cyclic generator
        let proj = ModuleMap::new(q_next.clone(), q_cur.clone(), ModuleMap::identity(q_cur).cols)?;
        let cols: Result<Vec<Vec<RingElement>>> = h_cur
            .gen_maps
            .iter()
            .map(|g| hom_coordinates(h_next, &proj.compose(g)?))
            .collect();
        trans.push(ModuleMap {
            source: stages[i].clone(),
            target: stages[i + 1].clone(),
            cols: cols?,
        });
    }
    let sys = ModuleSystem { stages, trans };
    colim_stabilize(&sys, None)
}

/// Classical completion: the tower { M / a^n M } with its stabilized limit
/// when detected.
pub fn classical_lambda(
    s: &SequenceSpec,
    m: &PresentedModule,
    horizon: u32,
) -> Result<(ModuleTower, PresentedModule, Precision)> {
    let mut stages = Vec::new();
    for n in 1..=horizon {
        stages.push(quotient_by_power(s, m, n)?);
    }
    let mut trans = Vec::new();
    for i in 0..(horizon as usize - 1) {
        trans.push(ModuleMap {
            source: stages[i + 1].clone(),
            target: stages[i].clone(),
            cols: ModuleMap::identity(&stages[i]).cols,
        });
    }
    let tower = ModuleTower { stages, trans };
    let (value, prec) = tower_limit(&tower, None)?;
    Ok((tower, value, prec))
}

/// Weak-proregularity verdict per homological index.
#[derive(Debug, Clone, serde::Serialize)]
pub struct WprVerdict {
    pub horizon: usize,
    pub lag: usize,
    pub per_index: BTreeMap<i64, ProZeroVerdict>,
    pub weakly_proregular: bool,
}

/// Runs the pro-zero test on every tower { H^{-i}(Kos(A; a^n)) }, i >= 1.
pub fn wpr_check(
    s: &SequenceSpec,
    horizon: usize,
    lag: usize,
    iwindow: Option<Window>,
) -> Result<WprVerdict> {
    let stages_needed = (horizon + lag) as u32;
    let tower = koszul_tower(s, stages_needed)?;
    let hts = crate::tower::cohomology_towers(&tower, iwindow)?;
    let r = s.len() as i64;
    let mut per_index = BTreeMap::new();
    let mut ok = true;
    for i in 1..=r {
        let n = -i;
        let verdict = match hts.get(&n) {
            None => ProZeroVerdict::ProZeroUpTo {
                horizon,
                lag,
                witnesses: vec![0; horizon],
            },
            Some(slots) => {
                let mut worst: Option<ProZeroVerdict> = None;
                let mut max_witness = vec![0usize; horizon];
                for tw in slots.values() {
                    match tw.pro_zero(horizon, lag)? {
                        ProZeroVerdict::ProZeroUpTo { witnesses, .. } => {
                            for (a, b) in max_witness.iter_mut().zip(witnesses) {
                                *a = (*a).max(b);
                            }
                        }
                        v @ ProZeroVerdict::NotProZeroUpTo { .. } => {
                            worst = Some(v);
                            break;
                        }
                    }
                }
                worst.unwrap_or(ProZeroVerdict::ProZeroUpTo {
                    horizon,
                    lag,
                    witnesses: max_witness,
                })
            }
        };
        ok &= verdict.is_pro_zero();
        per_index.insert(i, verdict);
    }
    Ok(WprVerdict { horizon, lag, per_index, weakly_proregular: ok })
}

/// Pro-zero test on an explicitly supplied module tower (used for engineered
/// counterexamples).
pub fn pro_zero_of_tower(
    t: &ModuleTower,
    horizon: usize,
    lag: usize,
    iwindow: Option<Window>,
) -> Result<ProZeroVerdict> {
    pro_zero(t, horizon, lag, iwindow)
}

/// H^0(Hom(telescope(s, n), M)) as a module tower over n, with the maps
/// induced from the quotient filtration via u. Used to validate the telescope
/// differential against { M / a^{n+1} M }.
pub fn tau_h0_comparison(
    s: &SequenceSpec,
    m: &PresentedModule,
    horizon: u32,
    lag: usize,
) -> Result<bool> {
    use crate::complex::CohomAt;
    let mcx = Complex::from_module(m.clone(), 0);
    let mut h0_stages = Vec::new();
    let mut h0_data = Vec::new();
    let mut tel_stages = Vec::new();
    for n in 0..horizon {
        let tel = telescope(s, n)?;
        let hom = tel.hom_from(&mcx)?;
        let h = hom.cohomology(None)?;
        let module = match h.at.get(&0) {
            Some(CohomAt::Group(g)) => g.module.clone(),
            _ => PresentedModule::zero(&s.ring),
        };
        h0_stages.push(module);
        h0_data.push((tel.clone(), hom, h));
        tel_stages.push(tel);
    }
    // transitions: restriction along the telescope inclusions
    let mut h0_trans = Vec::new();
    for n in 0..(horizon as usize - 1) {
        let incl = telescope_inclusion(s, n as u32)?;
        // Hom(incl, M): Hom(Tel_{n+1}, M) -> Hom(Tel_n, M)
        let hom_map = hom_restriction(&incl, &mcx, &h0_data[n + 1].1, &h0_data[n].1)?;
        let ind = crate::tower::induced_h_map(&hom_map, 0, &h0_data[n + 1].2, &h0_data[n].2)?;
        match ind {
            crate::tower::InducedH::Group(g) => h0_trans.push(g),
            _ => return Err(Error::UnsupportedBackend("integral backends only".into())),
        }
    }
    let t_h0 = ModuleTower { stages: h0_stages.clone(), trans: h0_trans };

    // quotient tower M/a^{n+1}M
    let mut q_stages = Vec::new();
    for n in 0..horizon {
        q_stages.push(quotient_by_power(s, m, n + 1)?);
    }
    let mut q_trans = Vec::new();
    for i in 0..(horizon as usize - 1) {
        q_trans.push(ModuleMap {
            source: q_stages[i + 1].clone(),
            target: q_stages[i].clone(),
            cols: ModuleMap::identity(&q_stages[i]).cols,
        });
    }
    let t_q = ModuleTower { stages: q_stages.clone(), trans: q_trans };

    // maps M/a^{n+1} -> H^0(Hom(Tel_n, M)) induced by u: m |-> (e_0 |-> m)
    let mut maps = Vec::new();
    for n in 0..horizon as usize {
        let (tel, hom, h) = &h0_data[n];
        let CohomAt::Group(g) = h.at.get(&0).ok_or_else(|| Error::Internal("no H0".into()))?
        else {
            return Err(Error::UnsupportedBackend("integral backends only".into()));
        };
        // ambient generators of Hom^0 are indexed by (tel^0 gen, M gen); the
        // map m_j |-> phi with phi(e_0) = m_j picks the (e_0.., j) coordinate
        let hom0 = hom.term(0);
        let _ = tel;
        let mut cols = Vec::new();
        for j in 0..m.gens.len() {
            // the all-e_0 generator of Tel^0 is the first one, so the pair
            // (e_0..e_0, m_j) sits at ambient index j
            let mut v = vec![num_bigint::BigInt::from(0); hom0.gens.len()];
            v[j] = num_bigint::BigInt::from(1);
            // express in H coordinates
            let span = {
                let kmat = crate::smith::ZMat::from_cols(g.ambient, g.reps.clone());
                kmat.hcat(&g.bmat)
            };
            let sol = crate::smith::z_solve(&span, &v)
                .ok_or_else(|| Error::Internal("tau image not a cycle".into()))?;
            let col: Vec<RingElement> = (0..g.reps.len())
                .map(|i| int_elem(&s.ring, &sol[i]))
                .collect();
            cols.push(col);
        }
        maps.push(ModuleMap { source: q_stages[n].clone(), target: h0_stages[n].clone(), cols });
    }
    crate::tower::pro_iso_check(&t_q, &t_h0, &maps, lag, None)
}

fn int_elem(ring: &Arc<BaseRing>, v: &num_bigint::BigInt) -> RingElement {
    use crate::ring::Payload;
    use crate::scalar::{Scalar, ScalarKind};
    match &**ring {
        BaseRing::Coefficient(ScalarKind::Integer) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Int(v.clone())),
        },
        BaseRing::Coefficient(ScalarKind::IntegerMod(m)) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Mod {
                m: *m,
                v: num_integer::Integer::mod_floor(v, &num_bigint::BigInt::from(*m)),
            }),
        },
        _ => unreachable!(),
    }
}

/// Restriction Hom(D, M) -> Hom(C, M) along a map C -> D of complexes of free
/// modules, expressed against already-built Hom complexes.
pub fn hom_restriction(
    f: &ChainMap,
    mcx: &Complex,
    hom_src: &Complex,
    hom_tgt: &Complex,
) -> Result<ChainMap> {
    // generator (k, i, j) of Hom(D, M)^n maps to sum over l of
    // f^k_{i,l} * (k, l, j) in Hom(C, M)^n
    let c = &f.source;
    let d = &f.target;
    let mut comps = BTreeMap::new();
    for n in hom_src.lo()..=hom_src.hi() {
        let src = hom_src.term(n);
        let tgt = hom_tgt.term(n);
        if src.gens.is_empty() {
            continue;
        }
        // rebuild the generator indexing used by hom_from
        let mut src_idx = Vec::new();
        for k in d.lo()..=d.hi() {
            for i in 0..d.term(k).gens.len() {
                for j in 0..mcx.term(k + n).gens.len() {
                    src_idx.push((k, i, j));
                }
            }
        }
        let mut tgt_idx = Vec::new();
        for k in c.lo()..=c.hi() {
            for i in 0..c.term(k).gens.len() {
                for j in 0..mcx.term(k + n).gens.len() {
                    tgt_idx.push((k, i, j));
                }
            }
        }
        let zero = c.ring.zero();
        let mut cols = Vec::new();
        for (k, i, j) in &src_idx {
            let mut col = vec![zero.clone(); tgt_idx.len()];
            let fk = f.comp(*k);
            for l in 0..fk.cols.len() {
                let e = &fk.cols[l][*i];
                if e.is_zero() {
                    continue;
                }
                if let Some(pos) = tgt_idx
                    .iter()
                    .position(|(kk, ll, jj)| kk == k && *ll == l && jj == j)
                {
                    col[pos] = col[pos].add(e)?;
                }
            }
            cols.push(col);
        }
        comps.insert(n, ModuleMap { source: src, target: tgt, cols });
    }
    ChainMap::new(hom_src.clone(), hom_tgt.clone(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::IsoInvariants;
    use crate::scalar::ScalarKind;
    use num_bigint::BigInt;

    fn q_xy() -> Arc<BaseRing> {
        BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1), ("y", 1)]).unwrap()
    }

    #[test]
    fn koszul_ranks_binomial() {
        let r = q_xy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x, y]).unwrap();
        for n in 1..=3 {
            let k = koszul(&s, n).unwrap();
            assert_eq!(k.term(0).rank(), 1);
            assert_eq!(k.term(-1).rank(), 2);
            assert_eq!(k.term(-2).rank(), 1);
        }
    }

    #[test]
    fn koszul_qx_power() {
        // (Q[x]; x), n = 2: H^0 = A/x^2
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap();
        let x = r.var(0).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x]).unwrap();
        let k = koszul(&s, 2).unwrap();
        let t = k.cohomology_table(Some(Window::new(0, 4))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert {
                window: Window::new(0, 4),
                dims: vec![1, 1, 0, 0, 0]
            })
        );
        assert_eq!(t.get(&-1), None);
    }

    #[test]
    fn koszul_z_2_3() {
        // (Z; 2, 3), n = 1: ranks (1, 2, 1), H^0 = Z/(2,3) = 0, H^{-1} = 0
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2), z.from_i64(3)]).unwrap();
        let k = koszul(&s, 1).unwrap();
        assert_eq!(k.term(-2).rank(), 1);
        assert_eq!(k.term(-1).rank(), 2);
        assert_eq!(k.term(0).rank(), 1);
        let t = k.cohomology_table(None).unwrap();
        assert!(t.is_empty(), "regular sequence on Z: all cohomology trivial, got {t:?}");
    }

    #[test]
    fn koszul_nonregular_h_minus_1() {
        // (Q[x,y]; x, xy): H^{-1} nonzero
        let r = q_xy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x.clone(), x.mul(&y).unwrap()]).unwrap();
        let k = koszul(&s, 1).unwrap();
        let t = k.cohomology_table(Some(Window::new(0, 5))).unwrap();
        let h1 = t.get(&-1).expect("H^-1 nonzero");
        assert!(!h1.is_zero());
    }

    #[test]
    fn telescope_shape_and_h1() {
        // (Z; 2), n = 1: ranks (2, 2); H^1 = Z/2
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let tel = telescope(&s, 1).unwrap();
        assert_eq!(tel.term(0).rank(), 2);
        assert_eq!(tel.term(1).rank(), 2);
        let t = tel.cohomology_table(None).unwrap();
        assert_eq!(
            t.get(&1),
            Some(&IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 })
        );
        assert_eq!(t.get(&0), None);
    }

    #[test]
    fn telescope_stage0_acyclic() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let tel = telescope(&s, 0).unwrap();
        assert!(tel.cohomology_table(None).unwrap().is_empty());
    }

    #[test]
    fn telescope_h0_vanishes_over_domain() {
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap();
        let x = r.var(0).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x]).unwrap();
        let tel = telescope(&s, 3).unwrap();
        let t = tel.cohomology_table(Some(Window::new(-4, 2))).unwrap();
        assert!(t.get(&0).is_none());
    }

    #[test]
    fn u_map_commutes_with_inclusion() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        for n in 0..3 {
            let u_n = u_map(&s, n).unwrap();
            let u_next = u_map(&s, n + 1).unwrap();
            let incl = telescope_inclusion(&s, n).unwrap();
            let composed = incl.compose(&u_next).unwrap();
            assert!(crate::complex::chain_maps_equal(&composed, &u_n).unwrap());
        }
    }

    #[test]
    fn tel_base_change_z_to_z12() {
        let z = BaseRing::integers();
        let z12 = BaseRing::integers_mod(12);
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let f = RingMap::new(z.clone(), z12, vec![]).unwrap();
        assert!(tel_base_change_check(&s, &f, 3).unwrap());
        // identity map
        let id = RingMap::identity(&z);
        assert!(tel_base_change_check(&s, &id, 3).unwrap());
    }

    #[test]
    fn classical_gamma_z12_at_2() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        let (g, prec) = classical_gamma(&s, &m, 4).unwrap();
        assert!(prec.stabilized);
        assert_eq!(
            g.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(4)], rank: 0 }
        );
    }

    #[test]
    fn classical_gamma_torsion_free_is_zero() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let (g, prec) = classical_gamma(&s, &m, 4).unwrap();
        assert!(prec.stabilized);
        assert!(g.iso_invariants(None).unwrap().is_zero());
    }

    #[test]
    fn classical_gamma_nilpotent_is_identity() {
        // finite algebra Q[t]/(t^3), a = (t): Gamma = M
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        let s = SequenceSpec::new(a.clone(), vec![t]).unwrap();
        let m = PresentedModule::cyclic(&a, vec![]);
        let (g, prec) = classical_gamma(&s, &m, 4).unwrap();
        assert!(prec.stabilized);
        assert_eq!(g.iso_invariants(None).unwrap(), IsoInvariants::TotalDim(3));
    }

    #[test]
    fn classical_lambda_z12_at_2() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        let (_, v, prec) = classical_lambda(&s, &m, 4).unwrap();
        assert!(prec.stabilized);
        assert_eq!(prec.stable_from, Some(1));
        assert_eq!(
            v.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(4)], rank: 0 }
        );
    }

    #[test]
    fn classical_lambda_z_unstabilized() {
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let (_, _, prec) = classical_lambda(&s, &m, 5).unwrap();
        assert!(!prec.stabilized);
    }

    #[test]
    fn classical_lambda_nilpotent() {
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        let s = SequenceSpec::new(a.clone(), vec![t]).unwrap();
        let m = PresentedModule::cyclic(&a, vec![]);
        let (_, v, prec) = classical_lambda(&s, &m, 5).unwrap();
        assert!(prec.stabilized);
        assert_eq!(prec.stable_from, Some(2));
        assert_eq!(v.iso_invariants(None).unwrap(), IsoInvariants::TotalDim(3));
    }

    #[test]
    fn wpr_regular_sequence_trivial() {
        let r = q_xy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x, y]).unwrap();
        let v = wpr_check(&s, 4, 1, Some(Window::new(0, 8))).unwrap();
        assert!(v.weakly_proregular);
        // all towers identically zero: witnesses all 0
        for verdict in v.per_index.values() {
            match verdict {
                ProZeroVerdict::ProZeroUpTo { witnesses, .. } => {
                    assert!(witnesses.iter().all(|w| *w == 0));
                }
                _ => panic!("expected pro-zero"),
            }
        }
    }

    #[test]
    fn wpr_x_xy_with_window() {
        // (x, xy): H^{-1} stages nonzero but composites vanish in the window
        let r = q_xy();
        let x = r.var(0).unwrap();
        let y = r.var(1).unwrap();
        let s = SequenceSpec::new(r.clone(), vec![x.clone(), x.mul(&y).unwrap()]).unwrap();
        let v = wpr_check(&s, 6, 2, Some(Window::new(0, 8))).unwrap();
        assert!(v.weakly_proregular, "{:?}", v.per_index);
        // at least one nonzero witness lag (the towers are not identically zero)
        let h1 = v.per_index.get(&1).unwrap();
        match h1 {
            ProZeroVerdict::ProZeroUpTo { witnesses, .. } => {
                assert!(witnesses.iter().any(|w| *w > 0));
            }
            _ => panic!("expected pro-zero"),
        }
    }

    #[test]
    fn wpr_engineered_failure() {
        // identity transitions on Z/2 never become zero
        let z = BaseRing::integers();
        let stages: Vec<PresentedModule> = (0..5)
            .map(|_| PresentedModule::cyclic(&z, vec![z.from_i64(2)]))
            .collect();
        let trans: Vec<ModuleMap> = (0..4)
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
        let v = pro_zero_of_tower(&t, 3, 2, None).unwrap();
        assert!(!v.is_pro_zero());
    }

    #[test]
    fn telescope_h0_tower_pro_iso_quotients() {
        // H^0(Hom(Tel_n, M)) is pro-isomorphic to { M / a^{n+1} M }
        let z = BaseRing::integers();
        let s = SequenceSpec::new(z.clone(), vec![z.from_i64(2)]).unwrap();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        assert!(tau_h0_comparison(&s, &m, 4, 1).unwrap());
        let free = PresentedModule::free(&z, vec![("e", 0)]);
        assert!(tau_h0_comparison(&s, &free, 4, 1).unwrap());
    }
}
