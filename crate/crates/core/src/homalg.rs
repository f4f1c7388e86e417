//! Kernels, images, cokernels, Hom modules and truncated free resolutions.
//!
//! Over Z and Z/m these are global Smith-normal-form computations. Over field
//! backends, submodule generators are collected degree by degree inside the
//! requested window, so presentations of kernels carry a window stamp
//! implicitly (they are valid for the degrees the window sees).

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::mat::{self, Mat};
use crate::module::{monomial_element, Generator, ModuleMap, PresentedModule};
use crate::ring::{BaseRing, Monomial, Payload, RingElement};
use crate::scalar::{Scalar, ScalarKind};
use crate::smith::{self, ZMat};
use crate::window::Window;

pub struct Kic {
    pub kernel: PresentedModule,
    /// inclusion kernel -> source
    pub kernel_incl: ModuleMap,
    pub image: PresentedModule,
    pub cokernel: PresentedModule,
    /// projection target -> cokernel
    pub coker_proj: ModuleMap,
}

pub fn kernel_image_cokernel(f: &ModuleMap, window: Option<Window>) -> Result<Kic> {
    let ring = f.source.ring.clone();
    match &*ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => kic_integer(f),
        BaseRing::GradedPoly(_) => {
            let w = window.ok_or_else(|| {
                Error::WindowRequired("kernel/image/cokernel over a graded backend".into())
            })?;
            kic_field(f, field_degrees(&w))
        }
        BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => kic_field(f, vec![0]),
    }
}

fn field_degrees(w: &Window) -> Vec<i64> {
    w.iter().collect()
}

// ----- integer backend -----

fn project_x_part(kernel: &ZMat, xdim: usize) -> Vec<Vec<BigInt>> {
    let mut out = Vec::new();
    for j in 0..kernel.cols {
        let col: Vec<BigInt> = (0..xdim).map(|i| kernel.get(i, j).clone()).collect();
        if col.iter().any(|v| !v.is_zero()) {
            out.push(col);
        }
    }
    out
}

/// Generators of { x : F x in colspan(R) } as an integer lattice.
fn preimage_lattice(f_mat: &ZMat, r: &ZMat) -> Vec<Vec<BigInt>> {
    // kernel of [F | R] projected to the x block
    let stacked = f_mat.hcat(r);
    let k = smith::z_kernel(&stacked);
    let mut gens = project_x_part(&k, f_mat.cols);
    // the x block always contains the kernel of F itself; dedupe is not needed
    // for correctness, presentations may be redundant
    if gens.is_empty() {
        gens.push(vec![BigInt::zero(); f_mat.cols]);
        gens.pop();
    }
    gens
}

fn z_cols_to_elements(ring: &std::sync::Arc<BaseRing>, cols: &[Vec<BigInt>]) -> Vec<Vec<RingElement>> {
    cols.iter()
        .map(|c| {
            c.iter()
                .map(|v| match &**ring {
                    BaseRing::Coefficient(ScalarKind::Integer) => RingElement {
                        ring: ring.clone(),
                        payload: Payload::Scalar(Scalar::Int(v.clone())),
                    },
                    BaseRing::Coefficient(ScalarKind::IntegerMod(m)) => RingElement {
                        ring: ring.clone(),
                        payload: Payload::Scalar(Scalar::Mod {
                            m: *m,
                            v: num_integer::Integer::mod_floor(v, &BigInt::from(*m)),
                        }),
                    },
                    _ => unreachable!(),
                })
                .collect()
        })
        .collect()
}

fn kic_integer(f: &ModuleMap) -> Result<Kic> {
    let ring = f.source.ring.clone();
    let fz = f.zmat()?;
    let rs = f.source.rel_zmat()?;
    let rt = f.target.rel_zmat()?;

    // kernel generators: preimage of target relations
    let kgens = preimage_lattice(&fz, &rt);
    let kernel = PresentedModule {
        ring: ring.clone(),
        gens: (0..kgens.len())
            .map(|i| Generator { name: format!("k{i}"), weight: 0 })
            .collect(),
        rels: {
            // z with K z in span(R_s)
            let kmat = ZMat::from_cols(f.source.gens.len(), kgens.clone());
            let rels_z = preimage_lattice(&kmat, &rs);
            z_cols_to_elements(&ring, &rels_z)
        },
    };
    let kernel_incl = ModuleMap {
        source: kernel.clone(),
        target: f.source.clone(),
        cols: z_cols_to_elements(&ring, &kgens),
    };

    // image = source / kernel
    let mut image_rels = z_cols_to_elements(&ring, &kgens);
    image_rels.extend(f.source.rels.clone());
    let image = PresentedModule {
        ring: ring.clone(),
        gens: f.source.gens.clone(),
        rels: image_rels,
    };

    // cokernel = target / (im f + rels)
    let mut coker_rels = f.cols.clone();
    coker_rels.extend(f.target.rels.clone());
    let cokernel = PresentedModule {
        ring: ring.clone(),
        gens: f.target.gens.clone(),
        rels: coker_rels,
    };
    let coker_proj = ModuleMap {
        source: f.target.clone(),
        target: cokernel.clone(),
        cols: ModuleMap::identity(&f.target).cols,
    };
    Ok(Kic { kernel, kernel_incl, image, cokernel, coker_proj })
}

// ----- field backends -----

/// Multiplier monomials taking a generator of weight `w` into degree `d`.
fn multipliers(ring: &BaseRing, w: i64, d: i64) -> Vec<Monomial> {
    match ring {
        BaseRing::GradedPoly(_) => ring.monomials_of_weight(d - w),
        BaseRing::FiniteAlgebra(a) => {
            if d == 0 {
                (0..a.dim()).map(|b| Monomial(vec![b as u32])).collect()
            } else {
                Vec::new()
            }
        }
        BaseRing::Coefficient(_) => {
            if w == d {
                vec![Monomial(Vec::new())]
            } else {
                Vec::new()
            }
        }
    }
}

fn multiplier_element(
    ring: &std::sync::Arc<BaseRing>,
    m: &Monomial,
) -> Result<RingElement> {
    match &**ring {
        BaseRing::GradedPoly(_) | BaseRing::Coefficient(_) => monomial_element(ring, m),
        BaseRing::FiniteAlgebra(_) => ring.basis_element(m.0[0] as usize),
    }
}

/// Degree-d coordinates of (multiplier * column) inside the slot basis.
fn scaled_column_coords(
    module: &PresentedModule,
    col: &[RingElement],
    mult: &RingElement,
    basis: &[(usize, Monomial)],
) -> Result<Vec<Scalar>> {
    let scaled: Result<Vec<RingElement>> = col.iter().map(|e| e.mul(mult)).collect();
    slot_coords(module, &scaled?, basis)
}

pub(crate) fn slot_coords(
    module: &PresentedModule,
    col: &[RingElement],
    basis: &[(usize, Monomial)],
) -> Result<Vec<Scalar>> {
    // delegate to the module's coordinate extraction
    module_slot_coords(module, col, basis)
}

fn module_slot_coords(
    module: &PresentedModule,
    col: &[RingElement],
    basis: &[(usize, Monomial)],
) -> Result<Vec<Scalar>> {
    // PresentedModule::element_slot_coords is private; re-derive here
    let kind = module.ring.linear_kind();
    let mut out = vec![kind.zero(); basis.len()];
    match &*module.ring {
        BaseRing::GradedPoly(_) => {
            for (i, e) in col.iter().enumerate() {
                if let Payload::Poly(p) = &e.payload {
                    for (m, c) in &p.terms {
                        let pos = basis
                            .iter()
                            .position(|(gi, bm)| *gi == i && bm == m)
                            .ok_or_else(|| Error::Internal("term outside slot basis".into()))?;
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

/// Turn slot coordinates back into generator-column form.
fn coords_to_column(
    module: &PresentedModule,
    basis: &[(usize, Monomial)],
    coords: &[Scalar],
) -> Result<Vec<RingElement>> {
    let ring = &module.ring;
    let mut col = vec![ring.zero(); module.gens.len()];
    for ((gi, m), c) in basis.iter().zip(coords) {
        if c.is_zero() {
            continue;
        }
        let e = multiplier_element(ring, m)?.scale(c)?;
        col[*gi] = col[*gi].add(&e)?;
    }
    Ok(col)
}

/// Generators, found degree by degree, of the submodule of `module` spanned
/// in each degree by the column space described by `slot_span`.
///
/// `slot_span(d, basis)` must return a matrix whose column space is the
/// degree-d part of the submodule (in ambient slot coordinates, containing
/// the degree-d relation span of `module`).
fn submodule_generators(
    module: &PresentedModule,
    degrees: &[i64],
    mut slot_span: impl FnMut(i64, &[(usize, Monomial)]) -> Result<Mat>,
) -> Result<Vec<Vec<RingElement>>> {
    let kind = module.ring.linear_kind();
    let mut gens: Vec<(i64, Vec<RingElement>)> = Vec::new();
    let mut sorted = degrees.to_vec();
    sorted.sort();
    for &d in &sorted {
        let basis = module.slot_basis(d)?;
        if basis.is_empty() {
            continue;
        }
        let span = slot_span(d, &basis)?;
        // already-covered part: relations plus multiples of earlier generators
        let mut covered = module.rel_matrix_slot(d, &basis)?;
        for (gw, gcol) in &gens {
            for m in multipliers(&module.ring, *gw, d) {
                let mult = multiplier_element(&module.ring, &m)?;
                let coords = scaled_column_coords(module, gcol, &mult, &basis)?;
                covered = covered.hcat(&Mat::from_cols(kind.clone(), basis.len(), vec![coords]));
            }
        }
        // peel new generators from span columns not in `covered`
        for j in 0..span.cols {
            let col = span.col(j);
            if mat::solve(&covered, &col)?.is_none() {
                let gcol = coords_to_column(module, &basis, &col)?;
                // cover the whole degree-d orbit of the new generator
                for m in multipliers(&module.ring, d, d) {
                    let mult = multiplier_element(&module.ring, &m)?;
                    let c = scaled_column_coords(module, &gcol, &mult, &basis)?;
                    covered = covered.hcat(&Mat::from_cols(kind.clone(), basis.len(), vec![c]));
                }
                gens.push((d, gcol));
            }
        }
    }
    Ok(gens.into_iter().map(|(_, c)| c).collect())
}

/// Presentation (valid on the listed degrees) of the submodule of `module`
/// generated by `gen_cols`, together with its inclusion map.
fn present_submodule(
    module: &PresentedModule,
    gen_cols: Vec<Vec<RingElement>>,
    degrees: &[i64],
    name_prefix: &str,
) -> Result<(PresentedModule, ModuleMap)> {
    let ring = module.ring.clone();
    let kind = ring.linear_kind();
    let weights: Vec<i64> = gen_cols
        .iter()
        .map(|c| module.relation_weight(c))
        .collect::<Result<_>>()?;
    let sub_gens: Vec<Generator> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| Generator { name: format!("{name_prefix}{i}"), weight: *w })
        .collect();

    // syzygies degree by degree: coefficient tuples sending the generators to zero
    let mut rels: Vec<Vec<RingElement>> = Vec::new();
    let mut sorted = degrees.to_vec();
    sorted.sort();
    for &d in &sorted {
        let basis = module.slot_basis(d)?;
        // unknowns: per generator g, multipliers of weight d - w_g
        let mut unknown_mults: Vec<(usize, Monomial)> = Vec::new();
        for (g, w) in weights.iter().enumerate() {
            for m in multipliers(&ring, *w, d) {
                unknown_mults.push((g, m));
            }
        }
        if unknown_mults.is_empty() {
            continue;
        }
        let mut cols = Vec::with_capacity(unknown_mults.len());
        for (g, m) in &unknown_mults {
            let mult = multiplier_element(&ring, m)?;
            cols.push(scaled_column_coords(module, &gen_cols[*g], &mult, &basis)?);
        }
        let gmat = Mat::from_cols(kind.clone(), basis.len(), cols);
        // quotient by the module's own relations: syzygy iff combination lands in rel span
        let relmat = module.rel_matrix_slot(d, &basis)?;
        let stacked = gmat.hcat(&relmat);
        let ker = mat::kernel_basis(&stacked)?;
        for j in 0..ker.cols {
            // assemble the generator-coefficient part into ring elements
            let mut col = vec![ring.zero(); sub_gens.len()];
            let mut nonzero = false;
            for (idx, (g, m)) in unknown_mults.iter().enumerate() {
                let c = ker.get(idx, j);
                if c.is_zero() {
                    continue;
                }
                nonzero = true;
                let e = multiplier_element(&ring, m)?.scale(c)?;
                col[*g] = col[*g].add(&e)?;
            }
            if nonzero {
                rels.push(col);
            }
        }
    }
    let sub = PresentedModule { ring: ring.clone(), gens: sub_gens, rels };
    let incl = ModuleMap {
        source: sub.clone(),
        target: module.clone(),
        cols: gen_cols,
    };
    Ok((sub, incl))
}

/// Peeled generating set of ker(f) as a submodule of the source, collected
/// degree by degree.
pub fn kernel_generators(f: &ModuleMap, degrees: &[i64]) -> Result<Vec<Vec<RingElement>>> {
    let kind = f.source.ring.linear_kind();
    submodule_generators(&f.source, degrees, |d, basis| {
        let tgt_basis = f.target.slot_basis(d)?;
        let fmat = f.slot_matrix(d, basis, &tgt_basis)?;
        let trel = f.target.rel_matrix_slot(d, &tgt_basis)?;
        // kernel of (quotient o f): vectors v with f v in trel span
        let stacked = fmat.hcat(&trel);
        let ker = mat::kernel_basis(&stacked)?;
        let mut cols = Vec::new();
        for j in 0..ker.cols {
            let v: Vec<Scalar> = (0..basis.len()).map(|i| ker.get(i, j).clone()).collect();
            if v.iter().any(|s| !s.is_zero()) {
                cols.push(v);
            }
        }
        Ok(Mat::from_cols(kind.clone(), basis.len(), cols))
    })
}

fn kic_field(f: &ModuleMap, degrees: Vec<i64>) -> Result<Kic> {
    let ring = f.source.ring.clone();
    let kgen_cols = kernel_generators(f, &degrees)?;
    let (kernel, kernel_incl) = present_submodule(&f.source, kgen_cols.clone(), &degrees, "k")?;

    // image = source / kernel
    let mut image_rels = kgen_cols;
    image_rels.extend(f.source.rels.clone());
    let image = PresentedModule {
        ring: ring.clone(),
        gens: f.source.gens.clone(),
        rels: image_rels,
    };

    let mut coker_rels = f.cols.clone();
    coker_rels.extend(f.target.rels.clone());
    let cokernel = PresentedModule {
        ring: ring.clone(),
        gens: f.target.gens.clone(),
        rels: coker_rels,
    };
    let coker_proj = ModuleMap {
        source: f.target.clone(),
        target: cokernel.clone(),
        cols: ModuleMap::identity(&f.target).cols,
    };
    Ok(Kic { kernel, kernel_incl, image, cokernel, coker_proj })
}

// ----- Hom modules -----

/// Hom(M, N) as a module, with enough data to build induced maps by
/// precomposition. Supported over integral and finite-algebra backends.
pub struct HomModule {
    pub module: PresentedModule,
    /// generator i is the map with this matrix (target gens x source gens),
    /// entries over the base ring
    pub gen_maps: Vec<ModuleMap>,
}

pub fn hom_module(m: &PresentedModule, n: &PresentedModule) -> Result<HomModule> {
    if m.ring != n.ring {
        return Err(Error::RingMismatch);
    }
    match &*m.ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => hom_integer(m, n),
        BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => hom_field(m, n),
        BaseRing::GradedPoly(_) => Err(Error::UnsupportedBackend(
            "Hom modules over graded polynomial backends are only formed against free sources \
             (use hom complexes); internal Hom of graded modules is out of scope"
                .into(),
        )),
    }
}

fn hom_integer(m: &PresentedModule, n: &PresentedModule) -> Result<HomModule> {
    let ring = m.ring.clone();
    let g = m.gens.len();
    let h = n.gens.len();
    let rm = m.rel_zmat()?; // g x r
    let rn = n.rel_zmat()?; // h x s
    let r = rm.cols;
    let s = rn.cols;

    // unknowns: X (h*g), Y (s*r); equations: X * RM - RN * Y = 0 (h*r equations)
    let rows = h * r;
    let cols_x = h * g;
    let cols_y = s * r;
    let mut big = ZMat::zero(rows, cols_x + cols_y);
    for rr in 0..r {
        for hh in 0..h {
            let row = rr * h + hh;
            for gg in 0..g {
                big.set(row, hh * g + gg, rm.get(gg, rr).clone());
            }
            for ss in 0..s {
                let v = -rn.get(hh, ss).clone();
                big.set(row, cols_x + ss * r + rr, v);
            }
        }
    }
    let ker = smith::z_kernel(&big);
    // generators of the solution lattice, projected to X
    let mut xgens: Vec<Vec<BigInt>> = Vec::new();
    for j in 0..ker.cols {
        let x: Vec<BigInt> = (0..cols_x).map(|i| ker.get(i, j).clone()).collect();
        if x.iter().any(|v| !v.is_zero()) {
            xgens.push(x);
        }
    }
    // null maps: every column of X lies in span(RN)
    let mut null_gens: Vec<Vec<BigInt>> = Vec::new();
    for gg in 0..g {
        for ss in 0..s {
            let mut x = vec![BigInt::zero(); cols_x];
            for hh in 0..h {
                x[hh * g + gg] = rn.get(hh, ss).clone();
            }
            null_gens.push(x);
        }
    }
    // also m * anything for Z/m
    if let Some(md) = m.modulus() {
        for i in 0..cols_x {
            let mut x = vec![BigInt::zero(); cols_x];
            x[i] = BigInt::from(md);
            null_gens.push(x);
        }
    }

    // presentation: gens = xgens, relations = { z : sum z_i xgen_i in span(null) }
    let xmat = ZMat::from_cols(cols_x, xgens.clone());
    let nullmat = ZMat::from_cols(cols_x, null_gens);
    let relcols = preimage_lattice(&xmat, &nullmat);
    let module = PresentedModule {
        ring: ring.clone(),
        gens: (0..xgens.len())
            .map(|i| Generator { name: format!("h{i}"), weight: 0 })
            .collect(),
        rels: z_cols_to_elements(&ring, &relcols),
    };
    let mut gen_maps = Vec::with_capacity(xgens.len());
    for x in &xgens {
        let cols: Vec<Vec<RingElement>> = (0..g)
            .map(|gg| {
                (0..h)
                    .map(|hh| int_elem(&ring, &x[hh * g + gg]))
                    .collect()
            })
            .collect();
        gen_maps.push(ModuleMap { source: m.clone(), target: n.clone(), cols });
    }
    Ok(HomModule { module, gen_maps })
}

fn int_elem(ring: &std::sync::Arc<BaseRing>, v: &BigInt) -> RingElement {
    match &**ring {
        BaseRing::Coefficient(ScalarKind::Integer) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Int(v.clone())),
        },
        BaseRing::Coefficient(ScalarKind::IntegerMod(m)) => RingElement {
            ring: ring.clone(),
            payload: Payload::Scalar(Scalar::Mod {
                m: *m,
                v: num_integer::Integer::mod_floor(v, &BigInt::from(*m)),
            }),
        },
        _ => unreachable!(),
    }
}

fn hom_field(m: &PresentedModule, n: &PresentedModule) -> Result<HomModule> {
    let ring = m.ring.clone();
    let kind = ring.linear_kind();
    let mb = m.slot_basis(0)?;
    let nb = n.slot_basis(0)?;
    let mrel = m.rel_matrix_slot(0, &mb)?;
    let nrel = n.rel_matrix_slot(0, &nb)?;

    // A-linear maps M -> N: X (|nb| x |mb|) with
    //   (1) X . mrel ⊆ span(nrel)       (kills relations)
    //   (2) X commutes with every scalar action  (for finite algebras)
    // Unknowns: entries of X plus slack for each relation-column membership.
    let dim_x = nb.len() * mb.len();
    let acts: Vec<(Mat, Mat)> = match &*ring {
        BaseRing::FiniteAlgebra(a) => {
            let mut v = Vec::new();
            for b in 0..a.dim() {
                let be = ring.basis_element(b)?;
                let am = action_matrix(m, &be, &mb)?;
                let an = action_matrix(n, &be, &nb)?;
                v.push((am, an));
            }
            v
        }
        _ => Vec::new(),
    };
    // rows: relation-kill equations + commuting equations
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    let mut row_count = 0usize;
    let slack = mrel.cols * nrel.cols;
    let width = dim_x + slack;
    // (1) for each relation column c of M: X c = nrel * y_c
    for rc in 0..mrel.cols {
        for i in 0..nb.len() {
            let mut row = vec![kind.zero(); width];
            for j in 0..mb.len() {
                row[i * mb.len() + j] = mrel.get(j, rc).clone();
            }
            for sc in 0..nrel.cols {
                row[dim_x + rc * nrel.cols + sc] = nrel.get(i, sc).neg();
            }
            rows.push(row);
            row_count += 1;
        }
    }
    // (2) commuting with actions, modulo the relation span of N:
    // (X am - an X) columns must lie in span(nrel); add slack per (action, col)
    let mut extra_slack = 0usize;
    let mut act_rows: Vec<Vec<Scalar>> = Vec::new();
    for (am, an) in &acts {
        for c in 0..mb.len() {
            for i in 0..nb.len() {
                let mut row = vec![kind.zero(); width];
                // (X am)_{i,c} = sum_j X_{i,j} am_{j,c}
                for j in 0..mb.len() {
                    row[i * mb.len() + j] = am.get(j, c).clone();
                }
                // -(an X)_{i,c} = -sum_k an_{i,k} X_{k,c}
                for k in 0..nb.len() {
                    let cur = row[k * mb.len() + c].clone();
                    row[k * mb.len() + c] = cur.sub(&an.get(i, k).clone())?;
                }
                act_rows.push(row);
            }
            extra_slack += nrel.cols;
        }
    }
    // widen all rows with slack for the commuting equations
    let full_width = width + extra_slack;
    for row in &mut rows {
        row.resize(full_width, kind.zero());
    }
    let mut slack_idx = width;
    let mut ar_iter = act_rows.into_iter();
    for (_, _) in acts.iter().flat_map(|a| std::iter::repeat(a).take(mb.len())) {
        // one column-block of slack per (action, source column)
        let mut block: Vec<Vec<Scalar>> = Vec::new();
        for _ in 0..nb.len() {
            if let Some(mut row) = ar_iter.next() {
                row.resize(full_width, kind.zero());
                block.push(row);
            }
        }
        for (i, mut row) in block.into_iter().enumerate() {
            for sc in 0..nrel.cols {
                row[slack_idx + sc] = nrel.get(i, sc).neg();
            }
            rows.push(row);
            row_count += 1;
        }
        slack_idx += nrel.cols;
    }
    let _ = row_count;
    let sys = Mat::from_rows(kind.clone(), rows);
    let ker = if sys.rows == 0 {
        Mat::identity(kind.clone(), full_width)
    } else {
        mat::kernel_basis(&sys)?
    };
    // solution matrices
    let mut sols: Vec<Mat> = Vec::new();
    for j in 0..ker.cols {
        let mut x = Mat::zero(kind.clone(), nb.len(), mb.len());
        let mut nonzero = false;
        for i in 0..nb.len() {
            for c in 0..mb.len() {
                let v = ker.get(i * mb.len() + c, j).clone();
                if !v.is_zero() {
                    nonzero = true;
                }
                x.set(i, c, v);
            }
        }
        if nonzero {
            sols.push(x);
        }
    }
    // quotient by null maps (image in relation span): X = nrel * W for arbitrary W
    // Build the Hom module as a module over the ring via generator peel.
    hom_field_present(m, n, sols, &mb, &nb, &nrel)
}

fn action_matrix(
    m: &PresentedModule,
    elt: &RingElement,
    basis: &[(usize, Monomial)],
) -> Result<Mat> {
    let kind = m.ring.linear_kind();
    let mut cols = Vec::with_capacity(basis.len());
    for (gi, mono) in basis {
        let be = multiplier_element(&m.ring, mono)?;
        let prod = be.mul(elt)?;
        let mut col = vec![m.ring.zero(); m.gens.len()];
        col[*gi] = prod;
        cols.push(module_slot_coords(m, &col, basis)?);
    }
    Ok(Mat::from_cols(kind, basis.len(), cols))
}

fn hom_field_present(
    m: &PresentedModule,
    n: &PresentedModule,
    sols: Vec<Mat>,
    mb: &[(usize, Monomial)],
    nb: &[(usize, Monomial)],
    nrel: &Mat,
) -> Result<HomModule> {
    let ring = m.ring.clone();
    let kind = ring.linear_kind();
    let dim_x = nb.len() * mb.len();
    // flatten solutions and null maps into vectors
    let flat = |x: &Mat| -> Vec<Scalar> {
        let mut v = Vec::with_capacity(dim_x);
        for i in 0..nb.len() {
            for c in 0..mb.len() {
                v.push(x.get(i, c).clone());
            }
        }
        v
    };
    let mut null_cols: Vec<Vec<Scalar>> = Vec::new();
    for c in 0..mb.len() {
        for sc in 0..nrel.cols {
            let mut x = Mat::zero(kind.clone(), nb.len(), mb.len());
            for i in 0..nb.len() {
                x.set(i, c, nrel.get(i, sc).clone());
            }
            null_cols.push(flat(&x));
        }
    }
    let nullmat = Mat::from_cols(kind.clone(), dim_x, null_cols);
    // peel a generating set over the ring: for finite algebras, account for the
    // module action phi -> a.phi given by postcomposition with the action on N
    let acts: Vec<Mat> = match &*ring {
        BaseRing::FiniteAlgebra(a) => {
            let mut v = Vec::new();
            for b in 0..a.dim() {
                let be = ring.basis_element(b)?;
                v.push(action_matrix(n, &be, nb)?);
            }
            v
        }
        _ => vec![Mat::identity(kind.clone(), nb.len())],
    };
    let mut covered = nullmat.clone();
    let mut gen_flats: Vec<Vec<Scalar>> = Vec::new();
    let mut gen_mats: Vec<Mat> = Vec::new();
    for x in &sols {
        let v = flat(x);
        if mat::solve(&covered, &v)?.is_some() {
            continue;
        }
        gen_flats.push(v);
        gen_mats.push(x.clone());
        // extend covered by the full orbit of x under the action
        for am in &acts {
            let ax = am.mul(x)?;
            covered = covered.hcat(&Mat::from_cols(kind.clone(), dim_x, vec![flat(&ax)]));
        }
    }
    // relations among the generators over the ring: coefficient tuples (a_g)
    // with sum a_g . gen_g a null map. Unknowns per generator: action coords.
    let mut rels: Vec<Vec<RingElement>> = Vec::new();
    if !gen_mats.is_empty() {
        let per = acts.len();
        let mut cols = Vec::new();
        for x in &gen_mats {
            for am in &acts {
                cols.push(flat(&am.mul(x)?));
            }
        }
        let gmat = Mat::from_cols(kind.clone(), dim_x, cols);
        let stacked = gmat.hcat(&nullmat);
        let ker = mat::kernel_basis(&stacked)?;
        for j in 0..ker.cols {
            let mut col = vec![ring.zero(); gen_mats.len()];
            let mut nonzero = false;
            for (g, _) in gen_mats.iter().enumerate() {
                let mut coeff = ring.zero();
                for b in 0..per {
                    let c = ker.get(g * per + b, j);
                    if c.is_zero() {
                        continue;
                    }
                    let be = match &*ring {
                        BaseRing::FiniteAlgebra(_) => ring.basis_element(b)?,
                        _ => ring.one(),
                    };
                    coeff = coeff.add(&be.scale(c)?)?;
                }
                if !coeff.is_zero() {
                    nonzero = true;
                }
                col[g] = coeff;
            }
            if nonzero {
                rels.push(col);
            }
        }
    }
    let module = PresentedModule {
        ring: ring.clone(),
        gens: (0..gen_mats.len())
            .map(|i| Generator { name: format!("h{i}"), weight: 0 })
            .collect(),
        rels,
    };
    // materialize generator maps in generator-column form
    let mut gen_maps = Vec::with_capacity(gen_mats.len());
    for x in &gen_mats {
        // column for source generator j: target coords of the image of gen j
        let mut cols: Vec<Vec<RingElement>> = Vec::new();
        for j in 0..m.gens.len() {
            // find the slot-basis position of (j, unit multiplier)
            let unit = unit_multiplier(&ring);
            let pos = mb
                .iter()
                .position(|(gi, mono)| *gi == j && *mono == unit)
                .ok_or_else(|| Error::Internal("generator missing from slot basis".into()))?;
            let coords: Vec<Scalar> = (0..nb.len()).map(|i| x.get(i, pos).clone()).collect();
            cols.push(coords_to_column(n, nb, &coords)?);
        }
        gen_maps.push(ModuleMap { source: m.clone(), target: n.clone(), cols });
    }
    Ok(HomModule { module, gen_maps })
}

fn unit_multiplier(ring: &BaseRing) -> Monomial {
    match ring {
        BaseRing::FiniteAlgebra(a) => {
            // position of 1 in the basis: assume the unit is a basis vector;
            // fall back to index of the first nonzero unit coordinate
            let idx = a
                .unit
                .iter()
                .position(|c| !c.is_zero())
                .unwrap_or(0);
            Monomial(vec![idx as u32])
        }
        BaseRing::GradedPoly(p) => Monomial(vec![0; p.vars.len()]),
        BaseRing::Coefficient(_) => Monomial(Vec::new()),
    }
}

/// Express a module map as a combination of HomModule generators.
pub fn hom_coordinates(hom: &HomModule, f: &ModuleMap) -> Result<Vec<RingElement>> {
    // subtract generator combinations found by linear solve per backend
    let m = &f.source;
    let n = &f.target;
    let ring = m.ring.clone();
    match &*ring {
        BaseRing::Coefficient(ScalarKind::Integer)
        | BaseRing::Coefficient(ScalarKind::IntegerMod(_)) => {
            let g = m.gens.len();
            let h = n.gens.len();
            let flat = |mm: &ModuleMap| -> Result<Vec<BigInt>> {
                let z = mm.zmat()?;
                let mut v = Vec::with_capacity(g * h);
                for hh in 0..h {
                    for gg in 0..g {
                        v.push(z.get(hh, gg).clone());
                    }
                }
                Ok(v)
            };
            let mut cols = Vec::new();
            for gm in &hom.gen_maps {
                cols.push(flat(gm)?);
            }
            // allow null-map corrections
            let rn = n.rel_zmat()?;
            for gg in 0..g {
                for ss in 0..rn.cols {
                    let mut x = vec![BigInt::zero(); g * h];
                    for hh in 0..h {
                        x[hh * g + gg] = rn.get(hh, ss).clone();
                    }
                    cols.push(x);
                }
            }
            let ncols = hom.gen_maps.len();
            let big = ZMat::from_cols(g * h, cols);
            let target = flat(f)?;
            let sol = smith::z_solve(&big, &target)
                .ok_or_else(|| Error::Internal("map not in Hom span".into()))?;
            Ok((0..ncols).map(|i| int_elem(&ring, &sol[i])).collect())
        }
        BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) => {
            let kind = ring.linear_kind();
            let mb = m.slot_basis(0)?;
            let nb = n.slot_basis(0)?;
            let nrel = n.rel_matrix_slot(0, &nb)?;
            let dim_x = nb.len() * mb.len();
            let flat = |x: &Mat| -> Vec<Scalar> {
                let mut v = Vec::with_capacity(dim_x);
                for i in 0..nb.len() {
                    for c in 0..mb.len() {
                        v.push(x.get(i, c).clone());
                    }
                }
                v
            };
            let acts: Vec<Mat> = match &*ring {
                BaseRing::FiniteAlgebra(a) => {
                    let mut v = Vec::new();
                    for b in 0..a.dim() {
                        let be = ring.basis_element(b)?;
                        v.push(action_matrix(n, &be, &nb)?);
                    }
                    v
                }
                _ => vec![Mat::identity(kind.clone(), nb.len())],
            };
            let per = acts.len();
            let mut cols = Vec::new();
            for gm in &hom.gen_maps {
                let x = gm.slot_matrix(0, &mb, &nb)?;
                for am in &acts {
                    cols.push(flat(&am.mul(&x)?));
                }
            }
            // null-map corrections: columns of the target relation span
            let null_start = cols.len();
            for c in 0..mb.len() {
                for sc in 0..nrel.cols {
                    let mut x = Mat::zero(kind.clone(), nb.len(), mb.len());
                    for i in 0..nb.len() {
                        x.set(i, c, nrel.get(i, sc).clone());
                    }
                    cols.push(flat(&x));
                }
            }
            let big = Mat::from_cols(kind.clone(), dim_x, cols);
            let fx = f.slot_matrix(0, &mb, &nb)?;
            let sol = mat::solve(&big, &flat(&fx))?
                .ok_or_else(|| Error::Internal("map not in Hom span".into()))?;
            let _ = null_start;
            let mut out = Vec::with_capacity(hom.gen_maps.len());
            for g in 0..hom.gen_maps.len() {
                let mut coeff = ring.zero();
                for b in 0..per {
                    let c = &sol[g * per + b];
                    if c.is_zero() {
                        continue;
                    }
                    let be = match &*ring {
                        BaseRing::FiniteAlgebra(_) => ring.basis_element(b)?,
                        _ => ring.one(),
                    };
                    coeff = coeff.add(&be.scale(c)?)?;
                }
                out.push(coeff);
            }
            Ok(out)
        }
        BaseRing::GradedPoly(_) => Err(Error::UnsupportedBackend(
            "hom coordinates over graded backends are not supported".into(),
        )),
    }
}

// ----- free resolutions -----

/// Truncated free resolution F_len -> ... -> F_1 -> F_0 (-> M).
/// Returns the free terms (F_0 first) with the connecting maps
/// d_i : F_i -> F_{i-1} and the augmentation F_0 -> M.
pub struct FreeResolution {
    pub terms: Vec<PresentedModule>,
    pub maps: Vec<ModuleMap>,
    pub augmentation: ModuleMap,
}

pub fn free_resolution(
    m: &PresentedModule,
    len: usize,
    window: Option<Window>,
) -> Result<FreeResolution> {
    let ring = m.ring.clone();
    let f0 = PresentedModule::free(
        &ring,
        m.gens
            .iter()
            .map(|g| (g.name.as_str(), g.weight))
            .collect(),
    );
    let augmentation = ModuleMap {
        source: f0.clone(),
        target: m.clone(),
        cols: ModuleMap::identity(m).cols,
    };
    let mut terms = vec![f0];
    let mut maps: Vec<ModuleMap> = Vec::new();
    // kernel generators of the current presentation, iterated
    let mut current_rels = m.rels.clone();
    for step in 0..len {
        let prev = terms.last().unwrap().clone();
        // relations of the previous stage generate the kernel of F_step -> image
        let gen_cols = current_rels.clone();
        // saturate over Z: use a lattice basis so the next kernel is correct
        let gen_cols = match &*ring {
            BaseRing::Coefficient(ScalarKind::Integer) => {
                let z = ZMat::from_cols(prev.gens.len(), {
                    let mut cols = Vec::new();
                    for c in &gen_cols {
                        let mut v = Vec::new();
                        for e in c {
                            v.push(match &e.payload {
                                Payload::Scalar(s) => s.as_bigint()?,
                                _ => return Err(Error::Internal("int entries".into())),
                            });
                        }
                        cols.push(v);
                    }
                    cols
                });
                let s = smith::snf(&z);
                // lattice basis: nonzero columns of U^{-1} D = M V
                let mv = z.mul(&s.v);
                let mut cols = Vec::new();
                for j in 0..mv.cols {
                    let col = mv.col(j);
                    if col.iter().any(|v| !v.is_zero()) {
                        cols.push(col);
                    }
                }
                z_cols_to_elements(&ring, &cols)
            }
            _ => gen_cols,
        };
        let weights: Vec<i64> = gen_cols
            .iter()
            .map(|c| prev.relation_weight(c))
            .collect::<Result<_>>()?;
        let fi = PresentedModule::free(
            &ring,
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| (Box::leak(format!("s{step}_{i}").into_boxed_str()) as &str, *w))
                .collect(),
        );
        let d = ModuleMap {
            source: fi.clone(),
            target: prev.clone(),
            cols: gen_cols.clone(),
        };
        // next kernel: syzygies of gen_cols inside the free module prev
        current_rels = syzygies_of_free(&prev, &gen_cols, &window)?;
        terms.push(fi);
        maps.push(d);
        if current_rels.is_empty() && step + 1 < len {
            // resolution already exact; pad with zero terms
            for _ in step + 1..len {
                let zero = PresentedModule::zero(&ring);
                let prev2 = terms.last().unwrap().clone();
                maps.push(ModuleMap {
                    source: zero.clone(),
                    target: prev2,
                    cols: Vec::new(),
                });
                terms.push(zero);
            }
            break;
        }
    }
    Ok(FreeResolution { terms, maps, augmentation })
}

/// Syzygies of columns inside a free module: coefficient tuples x with
/// sum x_i col_i = 0.
fn syzygies_of_free(
    free: &PresentedModule,
    cols: &[Vec<RingElement>],
    window: &Option<Window>,
) -> Result<Vec<Vec<RingElement>>> {
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let ring = free.ring.clone();
    match &*ring {
        BaseRing::Coefficient(ScalarKind::Integer) => {
            // columns form a lattice basis here, so there are no syzygies
            Ok(Vec::new())
        }
        BaseRing::Coefficient(ScalarKind::IntegerMod(md)) => {
            let g = free.gens.len();
            let mut zc = Vec::new();
            for c in cols {
                let mut v = Vec::new();
                for e in c {
                    v.push(match &e.payload {
                        Payload::Scalar(s) => s.as_bigint()?,
                        _ => return Err(Error::Internal("int entries".into())),
                    });
                }
                zc.push(v);
            }
            let cm = ZMat::from_cols(g, zc);
            let mut modrels = Vec::new();
            for i in 0..g {
                let mut v = vec![BigInt::zero(); g];
                v[i] = BigInt::from(*md);
                modrels.push(v);
            }
            let mm = ZMat::from_cols(g, modrels);
            let pre = preimage_lattice(&cm, &mm);
            Ok(pre
                .iter()
                .map(|c| c.iter().map(|v| int_elem(&ring, v)).collect())
                .collect())
        }
        BaseRing::FiniteAlgebra(_) | BaseRing::Coefficient(_) | BaseRing::GradedPoly(_) => {
            let degrees: Vec<i64> = match &*ring {
                BaseRing::GradedPoly(_) => {
                    let w = window.ok_or_else(|| {
                        Error::WindowRequired("graded syzygy computation".into())
                    })?;
                    w.iter().collect()
                }
                _ => vec![0],
            };
            // syzygies = kernel of the map (free on the columns) -> free
            let weights: Vec<i64> = cols
                .iter()
                .map(|c| free.relation_weight(c))
                .collect::<Result<_>>()?;
            let fk = PresentedModule {
                ring: ring.clone(),
                gens: weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| Generator { name: format!("c{i}"), weight: *w })
                    .collect(),
                rels: Vec::new(),
            };
            let map = ModuleMap {
                source: fk,
                target: free.clone(),
                cols: cols.to_vec(),
            };
            kernel_generators(&map, &degrees)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::IsoInvariants;

    #[test]
    fn kic_z_times_2() {
        let z = BaseRing::integers();
        let m = PresentedModule::free(&z, vec![("e", 0)]);
        let f = ModuleMap::new(m.clone(), m.clone(), vec![vec![z.from_i64(2)]]).unwrap();
        let kic = kernel_image_cokernel(&f, None).unwrap();
        assert!(kic.kernel.iso_invariants(None).unwrap().is_zero());
        assert_eq!(
            kic.cokernel.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 }
        );
    }

    #[test]
    fn kic_z12_times_2() {
        // Z/12 --*2--> Z/12: ker = Z/2, coker = Z/2
        let z = BaseRing::integers();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        let f = ModuleMap::new(m.clone(), m.clone(), vec![vec![z.from_i64(2)]]).unwrap();
        let kic = kernel_image_cokernel(&f, None).unwrap();
        assert_eq!(
            kic.kernel.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 }
        );
        assert_eq!(
            kic.cokernel.iso_invariants(None).unwrap(),
            IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(2)], rank: 0 }
        );
        // kernel composed with f is zero
        let comp = kic.kernel_incl.compose(&f).unwrap();
        assert!(comp.is_zero_map().unwrap());
    }

    #[test]
    fn kic_graded_times_x() {
        // Q[x](-1) --*x--> Q[x]: kernel 0, coker = Q in degree 0
        let r = BaseRing::graded_poly(ScalarKind::Rational, vec![("x", 1)]).unwrap();
        let src = PresentedModule::free(&r, vec![("e", 1)]);
        let tgt = PresentedModule::free(&r, vec![("e", 0)]);
        let x = r.var(0).unwrap();
        let f = ModuleMap::new(src, tgt, vec![vec![x]]).unwrap();
        let kic = kernel_image_cokernel(&f, Some(Window::new(0, 5))).unwrap();
        let kinv = kic.kernel.iso_invariants(Some(Window::new(0, 5))).unwrap();
        assert!(kinv.is_zero());
        let cinv = kic.cokernel.iso_invariants(Some(Window::new(0, 5))).unwrap();
        assert_eq!(
            cinv,
            IsoInvariants::Hilbert { window: Window::new(0, 5), dims: vec![1, 0, 0, 0, 0, 0] }
        );
    }

    #[test]
    fn hom_z2n_z12_stages() {
        // Hom(Z/2^n, Z/12) = Z/gcd(2^n, 12)
        let z = BaseRing::integers();
        let m12 = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        for (n, expect) in [(1i64, 2i64), (2, 4), (3, 4)] {
            let q = PresentedModule::cyclic(&z, vec![z.from_i64(1 << n)]);
            let h = hom_module(&q, &m12).unwrap();
            let inv = h.module.iso_invariants(None).unwrap();
            assert_eq!(
                inv,
                IsoInvariants::IntegerFactors { torsion: vec![BigInt::from(expect)], rank: 0 },
                "n = {n}"
            );
        }
    }

    #[test]
    fn hom_finite_algebra() {
        // Hom_A(A/(t), A) over A = Q[t]/(t^3) is ann(t) = (t^2), dim 1
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        let mq = PresentedModule::cyclic(&a, vec![t]);
        let ma = PresentedModule::cyclic(&a, vec![]);
        let h = hom_module(&mq, &ma).unwrap();
        assert_eq!(h.module.iso_invariants(None).unwrap(), IsoInvariants::TotalDim(1));
    }

    #[test]
    fn free_resolution_of_z12() {
        let z = BaseRing::integers();
        let m = PresentedModule::cyclic(&z, vec![z.from_i64(12)]);
        let res = free_resolution(&m, 3, None).unwrap();
        assert_eq!(res.terms[0].rank(), 1);
        assert_eq!(res.terms[1].rank(), 1);
        assert_eq!(res.terms[2].rank(), 0);
    }

    #[test]
    fn free_resolution_truncated_algebra() {
        // A = Q[t]/(t^3), M = A/(t): resolution ... A -t^2-> A -t-> A
        let a = BaseRing::truncated_poly_algebra(ScalarKind::Rational, 3).unwrap();
        let t = a.basis_element(1).unwrap();
        let m = PresentedModule::cyclic(&a, vec![t]);
        let res = free_resolution(&m, 4, None).unwrap();
        for term in &res.terms {
            assert_eq!(term.rank(), 1);
        }
        // exactness: d o d = 0 in the middle
        for i in 1..res.maps.len() {
            let comp = res.maps[i].compose(&res.maps[i - 1]).unwrap();
            assert!(comp.is_zero_map().unwrap());
        }
    }
}
