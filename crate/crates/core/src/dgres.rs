//! Semi-free (killing cycles) resolutions of DG-rings, lifting along
//! surjective quasi-isomorphisms, derived tensor products and the diagonal.
//!
//! The resolution adjoins degree-0 polynomial cover variables, then degree by
//! degree free graded-commutative generators (exterior in odd, polynomial in
//! even degree, no divided powers): killers for kernel classes one degree up,
//! hitters for missed classes. Obstruction generators are collected from a
//! per-weight linear-algebra generating set inside the window, with
//! deterministic basis order. Resolutions may be non-minimal; the certificate
//! (cohomology comparison in the window) is what counts.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::complex::{CohomAt, CohomologyData, SlotCohom};
use crate::dg::{DgElement, DgGenerator, DgMonomial, DgMorphism, DgRing};
use crate::error::{Error, Result};
use crate::mat::{self, Mat};
use crate::module::PresentedModule;
use crate::ring::{BaseRing, GradedPoly, RingElement, RingMap};
use crate::scalar::Scalar;
use crate::window::Window;

pub struct SemiFreeResolution {
    pub resolution: DgRing,
    /// surjective quasi-isomorphism (within the window) onto the target
    pub map: DgMorphism,
    pub certificate: SfCertificate,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SfCertificate {
    pub depth: i64,
    pub window: Window,
    /// H^i comparison is an isomorphism for i in (-depth, 0]
    pub iso_above_depth: bool,
    /// the comparison at -depth is surjective
    pub surjective_at_depth: bool,
}

impl SfCertificate {
    pub fn holds(&self) -> bool {
        self.iso_above_depth && self.surjective_at_depth
    }
}

/// Builds a semi-free resolution of `target` relative to a polynomial base:
/// base variables land on `base_var_images`. Pass an empty base for absolute
/// resolutions over the coefficient field.
pub fn semi_free_resolve(
    base: &GradedPoly,
    base_var_images: Vec<RingElement>,
    target: &DgRing,
    depth: i64,
    window: Window,
) -> Result<SemiFreeResolution> {
    if base_var_images.len() != base.vars.len() {
        return Err(Error::Invalid("base variable image count mismatch".into()));
    }
    let field = base.field.clone();
    // the target must present its degree-0 part over a graded polynomial ring
    // (or a plain field) so that obstruction generators can be found per weight
    let tgt_vars: Vec<(String, i64)> = match &*target.base {
        BaseRing::GradedPoly(p) => {
            if p.field != field {
                return Err(Error::RingMismatch);
            }
            p.vars.clone()
        }
        BaseRing::Coefficient(k) if k.is_field() => {
            if *k != field {
                return Err(Error::RingMismatch);
            }
            Vec::new()
        }
        _ => {
            return Err(Error::UnsupportedBackend(
                "semi-free resolution needs an internally graded target".into(),
            ))
        }
    };
    // deepen the target so its slots are maintained far enough
    let mut target = target.clone();
    if target.depth < depth + 1 {
        target.depth = depth + 1;
    }

    // resolution base: the given vars plus one cover variable per target var
    let mut vars: Vec<(String, i64)> = base.vars.clone();
    for (name, w) in &tgt_vars {
        vars.push((format!("c_{name}"), *w));
    }
    let s_base = Arc::new(BaseRing::GradedPoly(GradedPoly { field, vars }));
    let mut var_images = base_var_images;
    for i in 0..tgt_vars.len() {
        var_images.push(target.base.var(i)?);
    }
    let base_map = RingMap::new(s_base.clone(), target.base.clone(), var_images)?;

    let mut s = DgRing {
        base: s_base,
        rel0: Vec::new(),
        gens: Vec::new(),
        diff: Vec::new(),
        depth: depth + 1,
    };
    let mut gen_images: Vec<DgElement> = Vec::new();

    let t_h = target.underlying_complex()?.cohomology(Some(window))?;

    for k in 1..=depth {
        // --- killers: erase ker(H^{-k+1}(S) -> H^{-k+1}(T)) ---
        let s_h = s.underlying_complex()?.cohomology(Some(window))?;
        let sigma = DgMorphism {
            source: s.clone(),
            target: target.clone(),
            base_map: base_map.clone(),
            gen_images: gen_images.clone(),
        };
        let deg = -(k - 1);
        let mut accepted: Vec<DgElement> = Vec::new();
        for w in window.iter() {
            let Some(ss) = slot_of(&s_h, deg, w) else { continue };
            if ss.dim == 0 {
                continue;
            }
            let t_module = target.slot_module(k - 1);
            let t_basis = t_module.slot_basis(w)?;
            let phi = sigma.slot_matrix(k - 1, w, &ss.basis, &t_module, &t_basis)?;
            let img = phi.mul(&ss.reps)?;
            // kernel of the induced map: columns c with img*c inside T-covered
            let t_cov = match slot_of(&t_h, deg, w) {
                Some(tt) => tt.covered.clone(),
                None => target
                    .slot_module(k - 1)
                    .rel_matrix_slot(w, &t_basis)?,
            };
            let stacked = img.hcat(&t_cov);
            let ker = mat::kernel_basis(&stacked)?;
            // covered part of the cycle slot: boundaries, relations, and
            // multiples of killers accepted at lower weights
            let mut covered = ss.covered.clone();
            for z in &accepted {
                for mult in s.base.monomials_of_weight(w - dg_weight(&s, z)) {
                    let m = crate::module::monomial_element(&s.base, &mult)?;
                    let scaled = z.scale(&m)?;
                    let col = s.element_column(&scaled, k - 1)?;
                    let coords =
                        crate::homalg::slot_coords(&s.slot_module(k - 1), &col, &ss.basis)?;
                    covered = covered.hcat(&Mat::from_cols(
                        covered.kind.clone(),
                        ss.basis.len(),
                        vec![coords],
                    ));
                }
            }
            for j in 0..ker.cols {
                // cycle representative in ambient slot coordinates
                let hcoords: Vec<Scalar> = (0..ss.dim).map(|i| ker.get(i, j).clone()).collect();
                let amb = ss.reps.apply(&hcoords)?;
                if mat::solve(&covered, &amb)?.is_some() {
                    continue;
                }
                covered = covered.hcat(&Mat::from_cols(
                    covered.kind.clone(),
                    ss.basis.len(),
                    vec![amb.clone()],
                ));
                let col = coords_to_ring_column(&s.slot_module(k - 1), &ss.basis, &amb)?;
                let z = s.column_to_element(&col, k - 1);
                accepted.push(z);
            }
        }
        for (idx, z) in accepted.iter().enumerate() {
            let wz = dg_weight(&s, z);
            // target image: solve d_T t = sigma(z)
            let sigma_now = DgMorphism {
                source: s.clone(),
                target: target.clone(),
                base_map: base_map.clone(),
                gen_images: gen_images.clone(),
            };
            let img = sigma_now.apply(z)?;
            let t = solve_boundary(&target, &img, k, wz)?;
            s.add_generator(
                DgGenerator { name: format!("v{k}_{idx}"), degree: -k, weight: wz },
                z.clone(),
            );
            gen_images.push(t);
        }

        // --- hitters: cover coker(H^{-k}(S) -> H^{-k}(T)) ---
        let s_h = s.underlying_complex()?.cohomology(Some(window))?;
        let sigma = DgMorphism {
            source: s.clone(),
            target: target.clone(),
            base_map: base_map.clone(),
            gen_images: gen_images.clone(),
        };
        let deg = -k;
        let mut hitters: Vec<DgElement> = Vec::new();
        for w in window.iter() {
            let Some(tt) = slot_of(&t_h, deg, w) else { continue };
            if tt.dim == 0 {
                continue;
            }
            let t_module = target.slot_module(k);
            // image of H(S) plus boundaries
            let mut covered = tt.covered.clone();
            if let Some(ss) = slot_of(&s_h, deg, w) {
                if ss.dim > 0 {
                    let phi = sigma.slot_matrix(k, w, &ss.basis, &t_module, &tt.basis)?;
                    let img = phi.mul(&ss.reps)?;
                    covered = covered.hcat(&img);
                }
            }
            // multiples of hitter targets accepted at lower weights
            for t in &hitters {
                for mult in target_monomials(&target, w - dg_weight(&target, t)) {
                    let m = crate::module::monomial_element_for(&target.base, &mult)?;
                    let scaled = t.scale(&m)?;
                    let col = target.element_column(&scaled, k)?;
                    let coords = crate::homalg::slot_coords(&t_module, &col, &tt.basis)?;
                    covered = covered.hcat(&Mat::from_cols(
                        covered.kind.clone(),
                        tt.basis.len(),
                        vec![coords],
                    ));
                }
            }
            for j in 0..tt.dim {
                let rep = tt.reps.col(j);
                if mat::solve(&covered, &rep)?.is_some() {
                    continue;
                }
                covered = covered.hcat(&Mat::from_cols(
                    covered.kind.clone(),
                    tt.basis.len(),
                    vec![rep.clone()],
                ));
                let col = coords_to_ring_column(&t_module, &tt.basis, &rep)?;
                hitters.push(target.column_to_element(&col, k));
            }
        }
        for (idx, t) in hitters.iter().enumerate() {
            let wt = dg_weight(&target, t);
            s.add_generator(
                DgGenerator { name: format!("w{k}_{idx}"), degree: -k, weight: wt },
                DgElement::zero(),
            );
            gen_images.push(t.clone());
        }
    }
    s.depth = depth;
    let mut target_final = target.clone();
    target_final.depth = depth;
    let map = DgMorphism::new(s.clone(), target_final, base_map, gen_images)?;
    let certificate = certify(&map, depth, window)?;
    Ok(SemiFreeResolution { resolution: s, map, certificate })
}

fn target_monomials(t: &DgRing, w: i64) -> Vec<crate::ring::Monomial> {
    match &*t.base {
        BaseRing::FiniteAlgebra(a) => {
            if w == 0 {
                (0..a.dim())
                    .map(|b| crate::ring::Monomial(vec![b as u32]))
                    .collect()
            } else {
                Vec::new()
            }
        }
        _ => t.base.monomials_of_weight(w),
    }
}

fn dg_weight(ring: &DgRing, e: &DgElement) -> i64 {
    for (m, c) in &e.terms {
        return m.weight(&ring.gens) + c.weight().unwrap_or(0);
    }
    0
}

fn slot_of<'a>(h: &'a CohomologyData, degree: i64, w: i64) -> Option<&'a SlotCohom> {
    match h.at.get(&degree) {
        Some(CohomAt::Slots(slots)) => slots.get(&w),
        _ => None,
    }
}

fn coords_to_ring_column(
    module: &PresentedModule,
    basis: &[(usize, crate::ring::Monomial)],
    coords: &[Scalar],
) -> Result<Vec<RingElement>> {
    let ring = &module.ring;
    let mut col = vec![ring.zero(); module.gens.len()];
    for ((gi, m), c) in basis.iter().zip(coords) {
        if c.is_zero() {
            continue;
        }
        let e = crate::module::monomial_element_for(ring, m)?.scale(c)?;
        col[*gi] = col[*gi].add(&e)?;
    }
    Ok(col)
}

/// Solve d_T(t) = e in the slot T^{-k}; `e` must be a boundary (mod rels).
fn solve_boundary(t: &DgRing, e: &DgElement, k: i64, w: i64) -> Result<DgElement> {
    if e.is_zero() {
        return Ok(DgElement::zero());
    }
    let src = t.slot_module(k);
    let tgt = t.slot_module(k - 1);
    let sb = src.slot_basis(w)?;
    let tb = tgt.slot_basis(w)?;
    let d = t.slot_diff(k)?;
    let dm = d.slot_matrix(w, &sb, &tb)?;
    let rels = tgt.rel_matrix_slot(w, &tb)?;
    let col = t.element_column(e, k - 1)?;
    let coords = crate::homalg::slot_coords(&tgt, &col, &tb)?;
    let sys = dm.hcat(&rels);
    let sol = mat::solve(&sys, &coords)?
        .ok_or_else(|| Error::Internal("obstruction image is not a boundary".into()))?;
    let tcoords: Vec<Scalar> = sol[..sb.len()].to_vec();
    let tcol = coords_to_ring_column(&src, &sb, &tcoords)?;
    Ok(t.column_to_element(&tcol, k))
}

/// Certificate: H^i iso for i in (-depth, 0], surjective at -depth.
pub fn certify(map: &DgMorphism, depth: i64, window: Window) -> Result<SfCertificate> {
    let s_h = map.source.underlying_complex()?.cohomology(Some(window))?;
    let t_h = map.target.underlying_complex()?.cohomology(Some(window))?;
    let mut iso_above = true;
    let mut surj_at = true;
    for k in 0..=depth {
        let deg = -k;
        for w in window.iter() {
            let sd = slot_of(&s_h, deg, w).map_or(0, |s| s.dim);
            let td = slot_of(&t_h, deg, w).map_or(0, |s| s.dim);
            // induced map and its rank
            let rank = if sd == 0 || td == 0 {
                0
            } else {
                let ss = slot_of(&s_h, deg, w).unwrap();
                let tt = slot_of(&t_h, deg, w).unwrap();
                let t_module = map.target.slot_module(k);
                let phi = map.slot_matrix(k, w, &ss.basis, &t_module, &tt.basis)?;
                let img = phi.mul(&ss.reps)?;
                // rank of the classes of img modulo covered
                let mut span = tt.covered.clone();
                let mut r = 0;
                for j in 0..img.cols {
                    let c = img.col(j);
                    if mat::solve(&span, &c)?.is_none() {
                        span = span.hcat(&Mat::from_cols(span.kind.clone(), c.len(), vec![c]));
                        r += 1;
                    }
                }
                r
            };
            if k < depth {
                if sd != td || rank != td {
                    iso_above = false;
                }
            } else if rank != td {
                surj_at = false;
            }
        }
    }
    Ok(SfCertificate {
        depth,
        window,
        iso_above_depth: iso_above,
        surjective_at_depth: surj_at,
    })
}

/// Quasi-isomorphism test for a DG morphism (possibly across bases), per
/// degree and weight in the window.
pub fn dg_morphism_is_qis(map: &DgMorphism, window: Window) -> Result<bool> {
    let depth = map.source.depth.min(map.target.depth);
    let c = certify(map, depth, window)?;
    // a quasi-iso must be iso everywhere we look, including the last slot
    if !c.iso_above_depth {
        return Ok(false);
    }
    // re-check iso (not just surjectivity) at -depth
    let s_h = map.source.underlying_complex()?.cohomology(Some(window))?;
    let t_h = map.target.underlying_complex()?.cohomology(Some(window))?;
    for w in window.iter() {
        let sd = slot_of(&s_h, -depth, w).map_or(0, |s| s.dim);
        let td = slot_of(&t_h, -depth, w).map_or(0, |s| s.dim);
        if sd != td {
            return Ok(false);
        }
    }
    Ok(c.surjective_at_depth)
}

/// Is a DG morphism surjective in every degree (slotwise, modulo relations)?
pub fn dg_morphism_is_surjective(map: &DgMorphism, window: Window) -> Result<bool> {
    for k in 0..=map.target.depth {
        let t_module = map.target.slot_module(k);
        let s_module = map.source.slot_module(k);
        for w in window.iter() {
            let tb = t_module.slot_basis(w)?;
            if tb.is_empty() {
                continue;
            }
            let sb = s_module.slot_basis(w)?;
            let phi = map.slot_matrix(k, w, &sb, &t_module, &tb)?;
            let rels = t_module.rel_matrix_slot(w, &tb)?;
            let span = phi.hcat(&rels);
            let full = rels.hcat(&Mat::identity(rels.kind.clone(), tb.len()));
            if mat::rank(&span)? != mat::rank(&full)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Lift h : C -> B through a surjective quasi-isomorphism g : B -> D given
/// bottom : C -> D, with C semi-free. The lift satisfies g o h = bottom
/// exactly; uniqueness is not asserted.
pub fn lift_through_surjective_qis(
    c: &DgRing,
    bottom: &DgMorphism,
    g: &DgMorphism,
    window: Window,
) -> Result<DgMorphism> {
    if !c.rel0.is_empty() {
        return Err(Error::UnsupportedShape("the lifting source must be semi-free".into()));
    }
    if !dg_morphism_is_surjective(g, window)? {
        return Err(Error::NotSurjective(0));
    }
    let b = &g.source;
    let d = &g.target;
    if bottom.target.base != d.base || bottom.target.gens.len() != d.gens.len() {
        return Err(Error::Invalid("bottom map must land in the target of g".into()));
    }
    // base variables first
    let BaseRing::GradedPoly(cp) = &*c.base else {
        return Err(Error::UnsupportedBackend("semi-free source needs a polynomial base".into()));
    };
    let mut var_images: Vec<RingElement> = Vec::new();
    for (vi, (_, w)) in cp.vars.iter().enumerate() {
        let target_elem = bottom.base_map.apply(&c.base.var(vi)?)?;
        let be = preimage_slot(g, &DgElement::from_base(target_elem), 0, *w)?;
        // degree-0 preimages must be base elements
        let base_elem = be
            .terms
            .get(&DgMonomial::one())
            .cloned()
            .unwrap_or_else(|| b.base.zero());
        var_images.push(base_elem);
    }
    let h_base = RingMap::new(c.base.clone(), b.base.clone(), var_images)?;
    // generators by increasing |degree|
    let mut order: Vec<usize> = (0..c.gens.len()).collect();
    order.sort_by_key(|i| -c.gens[*i].degree);
    let mut gen_images: Vec<DgElement> = vec![DgElement::zero(); c.gens.len()];
    for gi in order {
        let gen = &c.gens[gi];
        let k = -gen.degree;
        let w = gen.weight;
        let partial = DgMorphism {
            source: c.clone(),
            target: b.clone(),
            base_map: h_base.clone(),
            gen_images: gen_images.clone(),
        };
        // z0: any preimage of bottom(gen)
        let bottom_img = apply_on_generator(bottom, gi)?;
        let z0 = preimage_slot(g, &bottom_img, k, w)?;
        // correction: e = h(d gen) - d z0, a cycle in ker g
        let hdg = partial.apply(&c.diff[gi])?;
        let e = hdg.sub(&b.d(&z0)?)?;
        if e.is_zero() {
            gen_images[gi] = z0;
            continue;
        }
        // solve d(x) = e with x in ker(g) at slot (k, w)
        let corr = solve_in_kernel(g, &e, k, w)?;
        gen_images[gi] = z0.add(&corr)?;
    }
    DgMorphism::new(c.clone(), b.clone(), h_base, gen_images)
}

fn apply_on_generator(f: &DgMorphism, gi: usize) -> Result<DgElement> {
    Ok(f.gen_images[gi].clone())
}

/// Some preimage of `e` under the slotwise-surjective morphism g, in slot
/// (k, w).
fn preimage_slot(g: &DgMorphism, e: &DgElement, k: i64, w: i64) -> Result<DgElement> {
    if e.is_zero() {
        return Ok(DgElement::zero());
    }
    let b_module = g.source.slot_module(k);
    let d_module = g.target.slot_module(k);
    let bb = b_module.slot_basis(w)?;
    let db = d_module.slot_basis(w)?;
    let phi = g.slot_matrix(k, w, &bb, &d_module, &db)?;
    let rels = d_module.rel_matrix_slot(w, &db)?;
    let col = g.target.element_column(e, k)?;
    let coords = crate::homalg::slot_coords(&d_module, &col, &db)?;
    let sys = phi.hcat(&rels);
    let sol = mat::solve(&sys, &coords)?
        .ok_or_else(|| Error::NotSurjective(-k))?;
    let bcoords: Vec<Scalar> = sol[..bb.len()].to_vec();
    let bcol = coords_to_ring_column(&b_module, &bb, &bcoords)?;
    Ok(g.source.column_to_element(&bcol, k))
}

/// Solve d(x) = e with x in ker(g), slot (k, w) of the source of g.
fn solve_in_kernel(g: &DgMorphism, e: &DgElement, k: i64, w: i64) -> Result<DgElement> {
    let b = &g.source;
    let bk = b.slot_module(k);
    let bk1 = b.slot_module(k - 1);
    let bb = bk.slot_basis(w)?;
    let tb = bk1.slot_basis(w)?;
    // kernel of g at (k, w): ambient vectors with image in the relation span
    let d_module = g.target.slot_module(k);
    let db = d_module.slot_basis(w)?;
    let phi = g.slot_matrix(k, w, &bb, &d_module, &db)?;
    let drels = d_module.rel_matrix_slot(w, &db)?;
    let ker = mat::kernel_basis(&phi.hcat(&drels))?;
    // columns restricted to the B-part
    let mut kcols = Vec::new();
    for j in 0..ker.cols {
        let v: Vec<Scalar> = (0..bb.len()).map(|i| ker.get(i, j).clone()).collect();
        kcols.push(v);
    }
    let kmat = Mat::from_cols(phi.kind.clone(), bb.len(), kcols);
    let dmat = b.slot_diff(k)?.slot_matrix(w, &bb, &tb)?;
    let dk = dmat.mul(&kmat)?;
    let brels = bk1.rel_matrix_slot(w, &tb)?;
    let col = b.element_column(e, k - 1)?;
    let coords = crate::homalg::slot_coords(&bk1, &col, &tb)?;
    let sys = dk.hcat(&brels);
    let sol = mat::solve(&sys, &coords)?.ok_or_else(|| {
        Error::Internal("lifting obstruction not solvable in the kernel".into())
    })?;
    let x: Vec<Scalar> = kmat.apply(&sol[..kmat.cols])?;
    let bcol = coords_to_ring_column(&bk, &bb, &x)?;
    Ok(b.column_to_element(&bcol, k))
}

/// Tensor product of two semi-free DG-rings over their common coefficient
/// field. Returns the product ring and the two inclusion index maps
/// (base variables and generators are those of the factors, left first).
pub fn tensor_semi_free(a: &DgRing, b: &DgRing) -> Result<DgRing> {
    let (BaseRing::GradedPoly(pa), BaseRing::GradedPoly(pb)) = (&*a.base, &*b.base) else {
        return Err(Error::UnsupportedBackend("tensor factors must be semi-free".into()));
    };
    if pa.field != pb.field {
        return Err(Error::RingMismatch);
    }
    if !a.rel0.is_empty() || !b.rel0.is_empty() {
        return Err(Error::UnsupportedShape("tensor factors must be semi-free".into()));
    }
    let mut vars: Vec<(String, i64)> = pa
        .vars
        .iter()
        .map(|(n, w)| (format!("{n}'"), *w))
        .collect();
    vars.extend(pb.vars.iter().map(|(n, w)| (format!("{n}''"), *w)));
    let base = Arc::new(BaseRing::GradedPoly(GradedPoly { field: pa.field.clone(), vars }));
    let mut gens: Vec<DgGenerator> = a
        .gens
        .iter()
        .map(|g| DgGenerator { name: format!("{}'", g.name), degree: g.degree, weight: g.weight })
        .collect();
    gens.extend(
        b.gens
            .iter()
            .map(|g| DgGenerator { name: format!("{}''", g.name), degree: g.degree, weight: g.weight }),
    );
    let n_a_vars = pa.vars.len();
    let n_a_gens = a.gens.len();
    // translate differentials
    let mut diff = Vec::new();
    for d in &a.diff {
        diff.push(translate(d, &a.base, &base, 0, 0)?);
    }
    for d in &b.diff {
        diff.push(translate(d, &b.base, &base, n_a_vars, n_a_gens)?);
    }
    let out = DgRing { base, rel0: Vec::new(), gens, diff, depth: a.depth.min(b.depth) };
    out.check()?;
    Ok(out)
}

/// Re-index an element of a factor into the tensor ring.
pub fn translate(
    e: &DgElement,
    from_base: &Arc<BaseRing>,
    to_base: &Arc<BaseRing>,
    var_offset: usize,
    gen_offset: usize,
) -> Result<DgElement> {
    let BaseRing::GradedPoly(pt) = &**to_base else {
        return Err(Error::Internal("tensor base must be polynomial".into()));
    };
    let var_images: Vec<RingElement> = match &**from_base {
        BaseRing::GradedPoly(pf) => (0..pf.vars.len())
            .map(|i| to_base.var(var_offset + i))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let _ = pt;
    let bm = RingMap::new(from_base.clone(), to_base.clone(), var_images)?;
    let mut out = DgElement::zero();
    for (m, c) in &e.terms {
        let nm = DgMonomial(m.0.iter().map(|(i, e)| (i + gen_offset, *e)).collect());
        out.terms.insert(nm, bm.apply(c)?);
    }
    Ok(out)
}

/// SF of a pair of DG-rings followed by the graded tensor product:
/// the derived tensor A (x)^L_k B.
pub struct DerivedTensor {
    pub product: DgRing,
    pub sf_a: SemiFreeResolution,
    pub sf_b: SemiFreeResolution,
}

pub fn derived_tensor_rings(
    field: crate::scalar::ScalarKind,
    a: &DgRing,
    b: &DgRing,
    depth: i64,
    window: Window,
) -> Result<DerivedTensor> {
    let empty = GradedPoly { field, vars: Vec::new() };
    let sf_a = semi_free_resolve(&empty, Vec::new(), a, depth, window)?;
    let sf_b = semi_free_resolve(&empty, Vec::new(), b, depth, window)?;
    let product = tensor_semi_free(&sf_a.resolution, &sf_b.resolution)?;
    Ok(DerivedTensor { product, sf_a, sf_b })
}

/// The diagonal map A (x)^L_k A -> A: multiplication through SF(A) followed by
/// the augmentation.
pub struct Enveloping {
    pub tensor: DerivedTensor,
    pub diagonal: DgMorphism,
}

pub fn diagonal_map(
    field: crate::scalar::ScalarKind,
    a: &DgRing,
    depth: i64,
    window: Window,
) -> Result<Enveloping> {
    let t = derived_tensor_rings(field, a, a, depth, window)?;
    let e = &t.product;
    // both variable copies map to the SF augmentation images
    let sfa = &t.sf_a;
    let sfb = &t.sf_b;
    let mut var_images = sfa.map.base_map.var_images.clone();
    var_images.extend(sfb.map.base_map.var_images.clone());
    let base_map = RingMap::new(e.base.clone(), a.base.clone(), var_images)?;
    let mut gen_images = sfa.map.gen_images.clone();
    gen_images.extend(sfb.map.gen_images.clone());
    let mut target = a.clone();
    if target.depth < e.depth {
        target.depth = e.depth;
    }
    let diagonal = DgMorphism::new(e.clone(), target, base_map, gen_images)?;
    Ok(Enveloping { tensor: t, diagonal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::IsoInvariants;
    use crate::scalar::ScalarKind;

    fn qx() -> Arc<BaseRing> {
        BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap()
    }

    #[test]
    fn resolve_truncated_polynomial_ring() {
        // target Q[x]/(x^2) over base Q[x]: killing x^2 in degree -1 suffices
        let r = qx();
        let x = r.var(0).unwrap();
        let x2 = x.pow(2).unwrap();
        let target = DgRing::from_ring(r.clone(), vec![x2], 3).unwrap();
        let base = GradedPoly { field: ScalarKind::Rational, vars: vec![("x".into(), 1)] };
        let res = semi_free_resolve(&base, vec![x.clone()], &target, 3, Window::new(0, 8)).unwrap();
        assert!(res.certificate.holds());
        let h0 = res
            .resolution
            .h_cohomology(Some(Window::new(0, 8)))
            .unwrap();
        assert_eq!(
            h0.get(&0),
            Some(&IsoInvariants::Hilbert {
                window: Window::new(0, 8),
                dims: vec![1, 1, 0, 0, 0, 0, 0, 0, 0]
            })
        );
    }

    #[test]
    fn resolve_residue_field_gives_koszul_pattern() {
        // target Q over base Q[x]: S ~ K(Q[x]; x)
        let r = qx();
        let x = r.var(0).unwrap();
        let target = DgRing::from_ring(r.clone(), vec![x.clone()], 3).unwrap();
        let base = GradedPoly { field: ScalarKind::Rational, vars: vec![("x".into(), 1)] };
        let res = semi_free_resolve(&base, vec![x], &target, 3, Window::new(0, 6)).unwrap();
        assert!(res.certificate.holds());
        let t = res.resolution.h_cohomology(Some(Window::new(0, 6))).unwrap();
        assert_eq!(
            t.get(&0),
            Some(&IsoInvariants::Hilbert {
                window: Window::new(0, 6),
                dims: vec![1, 0, 0, 0, 0, 0, 0]
            })
        );
        for k in 1..=2 {
            assert!(t.get(&-k).is_none(), "H^{} should vanish", -k);
        }
    }

    #[test]
    fn resolve_already_semifree_target() {
        // Koszul DG-ring target: the certificate holds with a fresh cover
        let r = qx();
        let x = r.var(0).unwrap();
        let target = DgRing::koszul(r.clone(), vec![x], 3).unwrap();
        let base = GradedPoly { field: ScalarKind::Rational, vars: vec![] };
        let res = semi_free_resolve(&base, vec![], &target, 3, Window::new(0, 6)).unwrap();
        assert!(res.certificate.holds());
    }

    #[test]
    fn resolve_absolute_over_field() {
        // SF_Q(Q[x]/(x^2)): adjoin a cover and a degree -1 killer
        let r = qx();
        let x = r.var(0).unwrap();
        let x2 = x.pow(2).unwrap();
        let target = DgRing::from_ring(r.clone(), vec![x2], 4).unwrap();
        let base = GradedPoly { field: ScalarKind::Rational, vars: vec![] };
        let res = semi_free_resolve(&base, vec![], &target, 4, Window::new(0, 8)).unwrap();
        assert!(res.certificate.holds());
        assert!(dg_morphism_is_qis(&res.map, Window::new(0, 6)).unwrap());
    }

    #[test]
    fn derived_tensor_of_free_is_polynomial() {
        // Q[x] (x)^L_Q Q[y] = Q[x,y]: H^0 dims (1,2,3,...), higher vanish
        let rx = qx();
        let x = rx.var(0).unwrap();
        let _ = x;
        let a = DgRing::from_ring(rx.clone(), vec![], 3).unwrap();
        let t = derived_tensor_rings(ScalarKind::Rational, &a, &a, 3, Window::new(0, 5)).unwrap();
        let h = t.product.h_cohomology(Some(Window::new(0, 5))).unwrap();
        assert_eq!(
            h.get(&0),
            Some(&IsoInvariants::Hilbert {
                window: Window::new(0, 5),
                dims: vec![1, 2, 3, 4, 5, 6]
            })
        );
        assert!(h.get(&-1).is_none());
    }

    #[test]
    fn derived_tensor_dual_numbers() {
        // A = Q[x]/(x^2): H^0(A (x)^L A) = A (x) A (dims 1,2,1), higher nonzero
        let r = qx();
        let x = r.var(0).unwrap();
        let x2 = x.pow(2).unwrap();
        let a = DgRing::from_ring(r.clone(), vec![x2], 4).unwrap();
        let t = derived_tensor_rings(ScalarKind::Rational, &a, &a, 4, Window::new(0, 8)).unwrap();
        let h = t.product.h_cohomology(Some(Window::new(0, 8))).unwrap();
        let IsoInvariants::Hilbert { dims, .. } = h.get(&0).unwrap() else { panic!() };
        assert_eq!(&dims[..3], &[1, 2, 1]);
        assert!(dims[3..].iter().all(|d| *d == 0));
    }

    #[test]
    fn diagonal_map_h0_is_multiplication() {
        let r = qx();
        let x = r.var(0).unwrap();
        let x2 = x.pow(2).unwrap();
        let a = DgRing::from_ring(r.clone(), vec![x2], 3).unwrap();
        let env = diagonal_map(ScalarKind::Rational, &a, 3, Window::new(0, 6)).unwrap();
        env.diagonal.check().unwrap();
        // H^0(Delta)(x (x) 1 - 1 (x) x) = 0
        let e = &env.tensor.product;
        let BaseRing::GradedPoly(p) = &*e.base else { panic!() };
        // locate the two cover variables (one per factor)
        let xs: Vec<usize> = (0..p.vars.len()).collect();
        let mut imgs = Vec::new();
        for i in xs {
            let v = e.base.var(i).unwrap();
            imgs.push(env.diagonal.base_map.apply(&v).unwrap());
        }
        // every cover maps to x, so differences map to zero
        for w in imgs.windows(2) {
            assert_eq!(w[0], w[1]);
        }
    }

    #[test]
    fn lift_through_identity() {
        let r = qx();
        let x = r.var(0).unwrap();
        let c = DgRing::koszul(r.clone(), vec![x.clone()], 3).unwrap();
        let d = DgRing::from_ring(r.clone(), vec![x.clone()], 3).unwrap();
        let aug = DgMorphism::new(
            c.clone(),
            d.clone(),
            RingMap::identity(&r),
            vec![DgElement::zero()],
        )
        .unwrap();
        let g = DgMorphism::identity(&d);
        let h = lift_through_surjective_qis(&c, &aug, &g, Window::new(0, 6)).unwrap();
        // g o h = bottom exactly
        for (i, img) in h.gen_images.iter().enumerate() {
            let lhs = g.apply(img).unwrap();
            let rhs = &aug.gen_images[i];
            let diff = lhs.sub(rhs).unwrap();
            assert!(d.element_is_zero(&diff, 1).unwrap());
        }
    }

    #[test]
    fn lift_through_sf_of_target() {
        // C = K(Q[x]; x) mapping to Q[x]/(x); lift through SF(Q[x]/(x)) -> Q[x]/(x)
        let r = qx();
        let x = r.var(0).unwrap();
        let c = DgRing::koszul(r.clone(), vec![x.clone()], 3).unwrap();
        let dtarget = DgRing::from_ring(r.clone(), vec![x.clone()], 4).unwrap();
        let base = GradedPoly { field: ScalarKind::Rational, vars: vec![] };
        let res = semi_free_resolve(&base, vec![], &dtarget, 4, Window::new(0, 6)).unwrap();
        let bottom = DgMorphism::new(
            c.clone(),
            res.map.target.clone(),
            RingMap::identity(&r),
            vec![DgElement::zero()],
        )
        .unwrap();
        let h = lift_through_surjective_qis(&c, &bottom, &res.map, Window::new(0, 6)).unwrap();
        // verify g o h = bottom on the base variable
        let xv = c.base.var(0).unwrap();
        let via_h = res.map.base_map.apply(&h.base_map.apply(&xv).unwrap()).unwrap();
        let direct = bottom.base_map.apply(&xv).unwrap();
        let diff = DgElement::from_base(via_h.sub(&direct).unwrap());
        assert!(res.map.target.element_is_zero(&diff, 0).unwrap());
    }
}
