//! Transition data for bundles with nontrivial characteristic class: the
//! fixed point kappa = rho^vee/h, the alcove symmetry lambda_j attached to a
//! minuscule node, the invariant Cartan subalgebra, and reduction to the
//! fundamental domain of the Bernstein-Schwarzman group.

use crate::lie::{RootSystem, WeylElement};
use crate::rat::*;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransitionError {
    #[error("node {0} is not minuscule (n_j != 1)")]
    NotMinuscule(usize),
    #[error("alcove reduction did not terminate")]
    NoConvergence,
    #[error("invariant Cartan construction failed: {0}")]
    InvariantCartan(String),
}

/// kappa = rho^vee / h; lies strictly inside the fundamental alcove.
pub fn compute_kappa(rs: &RootSystem) -> Vec<Rat> {
    let h = Rat::from_integer(rs.coxeter);
    rs.rho_vee.iter().map(|c| c / h).collect()
}

/// Affine transformation x -> w x + t with w in the Weyl group.
#[derive(Debug, Clone)]
pub struct AffineElement {
    pub w: Vec<Vec<Rat>>,
    pub t: Vec<Rat>,
}

impl AffineElement {
    pub fn identity(n: usize) -> Self {
        AffineElement {
            w: rmat_identity(n),
            t: rvec_zero(n),
        }
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        rvec_add(&rmat_vec(&self.w, x), &self.t)
    }

    /// self after other: (self*other)(x) = self(other(x))
    pub fn compose(&self, other: &AffineElement) -> Self {
        AffineElement {
            w: rmat_mul(&self.w, &other.w),
            t: rvec_add(&rmat_vec(&self.w, &other.t), &self.t),
        }
    }
}

/// Reduce x to the closed fundamental alcove of the affine Weyl group
/// W ltimes Q^vee. Returns the reduced point and the affine element such
/// that a.apply(x) = reduced.
pub fn alcove_reduce(rs: &RootSystem, x: &[Rat]) -> Result<(Vec<Rat>, AffineElement), TransitionError> {
    let n = rs.rank;
    let theta = rs.highest_root();
    let mut cur = x.to_vec();
    let mut acc = AffineElement::identity(n);
    for _ in 0..100_000 {
        let mut acted = false;
        for k in 0..n {
            let simple = rs.root_index(&{
                let mut v = vec![0i64; n];
                v[k] = 1;
                v
            }).unwrap();
            if rs.pair_root(&cur, simple) < Rat::zero() {
                let refl = WeylElement::reflection(rs, simple);
                cur = refl.apply(&cur);
                acc = AffineElement { w: refl.matrix.clone(), t: rvec_zero(n) }.compose(&acc);
                acted = true;
                break;
            }
        }
        if acted {
            continue;
        }
        let p = rs.pair_root(&cur, theta);
        if p > Rat::one() {
            // affine reflection in the wall <theta, x> = 1:
            // x -> x - (<theta,x> - 1) theta^vee = s_theta(x) + theta^vee
            let refl = WeylElement::reflection(rs, theta);
            cur = rvec_add(&refl.apply(&cur), &rs.coroot_vec(theta));
            acc = AffineElement {
                w: refl.matrix.clone(),
                t: rs.coroot_vec(theta),
            }
            .compose(&acc);
            continue;
        }
        return Ok((cur, acc));
    }
    Err(TransitionError::NoConvergence)
}

/// The alcove symmetry attached to a minuscule node: the linear Weyl part
/// lambda_j of the alcove-preserving map x -> lambda_j(x) + w^vee_j.
#[derive(Debug, Clone)]
pub struct Lambda {
    /// 1-based minuscule node.
    pub node: usize,
    pub matrix: Vec<Vec<Rat>>,
    /// image root index for each root index under the matrix action.
    pub root_perm: Vec<usize>,
    /// permutation of the extended nodes 0..=n (0 is the affine node).
    pub ext_perm: Vec<usize>,
    /// order l of lambda (= order of the coweight class in P^vee/Q^vee).
    pub order: usize,
}

impl Lambda {
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        rmat_vec(&self.matrix, x)
    }

    pub fn apply_root(&self, i: usize) -> usize {
        self.root_perm[i]
    }

    /// Smallest m > 0 with lambda^m(root) = root.
    pub fn orbit_len(&self, root: usize) -> usize {
        let mut r = self.root_perm[root];
        let mut m = 1;
        while r != root {
            r = self.root_perm[r];
            m += 1;
        }
        m
    }
}

fn root_perm_of_matrix(rs: &RootSystem, w: &[Vec<Rat>]) -> Vec<usize> {
    (0..rs.num_roots())
        .map(|i| {
            let img = rmat_vec(w, &rs.root_vec(i));
            let coeffs: Vec<i64> = img
                .iter()
                .map(|c| {
                    assert!(c.is_integer());
                    c.to_integer()
                })
                .collect();
            rs.root_index(&coeffs).expect("Weyl matrix permutes roots")
        })
        .collect()
}

pub fn find_lambda(rs: &RootSystem, node: usize) -> Result<Lambda, TransitionError> {
    if !rs.minuscule_nodes().contains(&node) {
        return Err(TransitionError::NotMinuscule(node));
    }
    let kappa = compute_kappa(rs);
    let w_vee = &rs.coweights[node - 1];
    let shifted = rvec_add(&kappa, w_vee);
    let (reduced, a) = alcove_reduce(rs, &shifted)?;
    assert_eq!(reduced, kappa, "kappa is fixed by the alcove symmetry");
    // g = a o t_{w^vee}: g(x) = W x + (W w^vee + t); translation part must be
    // w^vee itself for g(x) = lambda(x) + w^vee
    let trans = rvec_add(&rmat_vec(&a.w, w_vee), &a.t);
    assert_eq!(&trans, w_vee, "alcove map has translation part w^vee_j");
    let matrix = a.w.clone();
    // lambda(kappa) = kappa - w^vee_j
    assert_eq!(rmat_vec(&matrix, &kappa), rvec_sub(&kappa, w_vee));
    // the action on roots is contragredient: alpha -> alpha o lambda, which
    // under the form identification is the inverse matrix
    let inv_matrix = rmat_inverse(&matrix).expect("Weyl matrix invertible");
    let root_perm = root_perm_of_matrix(rs, &inv_matrix);

    // extended-node permutation from the action on alcove vertices
    // v_0 = 0, v_k = w^vee_k / n_k
    let n = rs.rank;
    let vertices: Vec<Vec<Rat>> = std::iter::once(rvec_zero(n))
        .chain((0..n).map(|k| {
            rvec_scale(
                &rs.coweights[k],
                Rat::one() / Rat::from_integer(rs.highest_coeffs[k]),
            )
        }))
        .collect();
    // nodes permute contragrediently: node k goes to m when the alcove map
    // sends vertex m to vertex k
    let g_apply = |x: &[Rat]| rvec_add(&rmat_vec(&matrix, x), w_vee);
    let mut ext_perm = vec![0usize; n + 1];
    for (i, v) in vertices.iter().enumerate() {
        let img = g_apply(v);
        let j = vertices
            .iter()
            .position(|u| *u == img)
            .expect("alcove symmetry permutes vertices");
        ext_perm[j] = i;
    }

    // order of lambda = order of the coweight class
    let mut order = 1;
    let mut m = matrix.clone();
    let id = rmat_identity(n);
    while m != id {
        m = rmat_mul(&m, &matrix);
        order += 1;
        assert!(order <= 1000);
    }

    Ok(Lambda {
        node,
        matrix,
        root_perm,
        ext_perm,
        order,
    })
}

/// Kernel of (lambda - 1) and the averaged coroots attached to the lambda
/// orbits on the extended coroot nodes minus the affine orbit.
#[derive(Debug, Clone)]
pub struct InvariantCartan {
    /// basis of ker(lambda - 1), simple-root coordinates.
    pub kernel: Vec<Vec<Rat>>,
    /// orbits of the extended nodes (0..=n), affine orbit first.
    pub ext_orbits: Vec<Vec<usize>>,
    /// one coroot per non-affine orbit, as a vector in ker(lambda - 1).
    pub coroots: Vec<Vec<Rat>>,
    /// Cartan matrix <alpha~_j, alpha~^vee_k> of the invariant subsystem.
    pub cartan: Vec<Vec<i64>>,
    /// true when a coroot needed the projection correction (C/D tails).
    pub corrected: Vec<bool>,
}

/// Coroot vector (in simple-root coordinates) of an extended node; node 0 is
/// alpha_0 = -theta.
fn ext_node_coroot(rs: &RootSystem, node: usize) -> Vec<Rat> {
    if node == 0 {
        let theta = rs.highest_root();
        rvec_scale(&rs.coroot_vec(theta), -Rat::one())
    } else {
        let simple = rs
            .root_index(&{
                let mut v = vec![0i64; rs.rank];
                v[node - 1] = 1;
                v
            })
            .unwrap();
        rs.coroot_vec(simple)
    }
}

pub fn invariant_cartan(rs: &RootSystem, lambda: &Lambda) -> Result<InvariantCartan, TransitionError> {
    let n = rs.rank;
    // ker(lambda - 1)
    let mut m = lambda.matrix.clone();
    for i in 0..n {
        m[i][i] -= Rat::one();
    }
    let kernel = rmat_kernel(&m);

    // orbits of ext_perm
    let mut seen = vec![false; n + 1];
    let mut orbits: Vec<Vec<usize>> = vec![];
    for start in 0..=n {
        if seen[start] {
            continue;
        }
        let mut orb = vec![start];
        seen[start] = true;
        let mut cur = lambda.ext_perm[start];
        while cur != start {
            seen[cur] = true;
            orb.push(cur);
            cur = lambda.ext_perm[cur];
        }
        orbits.push(orb);
    }
    // affine orbit (containing node 0) first
    orbits.sort_by_key(|o| if o.contains(&0) { 0 } else { 1 });
    assert!(orbits[0].contains(&0));

    // candidate coroots: orbit sums over the non-affine orbits
    let mut coroots: Vec<Vec<Rat>> = vec![];
    let mut corrected = vec![];
    for orb in &orbits[1..] {
        let mut sum = rvec_zero(n);
        for &node in orb {
            sum = rvec_add(&sum, &ext_node_coroot(rs, node));
        }
        coroots.push(sum);
        corrected.push(false);
    }

    // all candidates must be lambda-invariant
    for c in &coroots {
        if rmat_vec(&lambda.matrix, c) != *c {
            return Err(TransitionError::InvariantCartan(
                "orbit sum not lambda-invariant".into(),
            ));
        }
    }

    let cartan_of = |coroots: &[Vec<Rat>]| -> Vec<Vec<Rat>> {
        let m = coroots.len();
        let mut c = vec![rvec_zero(m); m];
        for j in 0..m {
            let qj = rs.pair(&coroots[j], &coroots[j]);
            for k in 0..m {
                // <alpha~_j, alpha~^vee_k> = 2 (v_j, v_k)/(v_j, v_j) with
                // v = coroot vectors (alpha~ proportional to its coroot)
                c[j][k] = rat(2, 1) * rs.pair(&coroots[j], &coroots[k]) / qj;
            }
        }
        c
    };

    // validity: integer entries, non-positive off-diagonal
    let valid = |c: &[Vec<Rat>]| -> bool {
        c.iter().enumerate().all(|(j, row)| {
            row.iter().enumerate().all(|(k, v)| {
                v.is_integer() && (j == k || *v <= Rat::zero())
            })
        })
    };

    let mut c = cartan_of(&coroots);
    if !valid(&c) {
        // C/D tails: the orbit-averaged coroot fails the normalization
        // <alpha~, alpha~^vee> = 2 against its neighbours; replacing the
        // orbit sum by the plain projection (half the sum for an order-2
        // orbit collapse) restores integrality.
        for idx in 0..coroots.len() {
            let bad = c[idx].iter().any(|v| !v.is_integer())
                || c.iter().any(|row| !row[idx].is_integer());
            if bad {
                let half = rvec_scale(&coroots[idx], rat(1, 2));
                let mut trial = coroots.clone();
                trial[idx] = half;
                let tc = cartan_of(&trial);
                if valid(&tc) {
                    coroots = trial;
                    corrected[idx] = true;
                    c = tc;
                    break;
                }
            }
        }
    }
    if !valid(&c) {
        return Err(TransitionError::InvariantCartan(format!(
            "no valid invariant Cartan matrix: {c:?}"
        )));
    }
    let cartan: Vec<Vec<i64>> = c
        .iter()
        .map(|row| row.iter().map(|v| v.to_integer()).collect())
        .collect();
    Ok(InvariantCartan {
        kernel,
        ext_orbits: orbits,
        coroots,
        cartan,
        corrected,
    })
}

/// Name the type of a (possibly decomposable) Cartan matrix; components are
/// reported as sorted labels like ["A1", "B2"].
pub fn classify_cartan(c: &[Vec<i64>]) -> Vec<String> {
    let n = c.len();
    // split into connected components
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = ncomp;
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if comp[u] == usize::MAX && c[v][u] != 0 {
                    comp[u] = ncomp;
                    stack.push(u);
                }
            }
        }
        ncomp += 1;
    }
    let mut labels = vec![];
    for k in 0..ncomp {
        let nodes: Vec<usize> = (0..n).filter(|&v| comp[v] == k).collect();
        let sub: Vec<Vec<i64>> = nodes
            .iter()
            .map(|&a| nodes.iter().map(|&b| c[a][b]).collect())
            .collect();
        labels.push(classify_connected(&sub));
    }
    labels.sort();
    labels
}

fn classify_connected(c: &[Vec<i64>]) -> String {
    let n = c.len();
    let candidates: Vec<(String, crate::lie::Family)> = vec![
        (format!("A{n}"), crate::lie::Family::A),
        (format!("B{n}"), crate::lie::Family::B),
        (format!("C{n}"), crate::lie::Family::C),
        (format!("D{n}"), crate::lie::Family::D),
        ("E6".into(), crate::lie::Family::E6),
        ("E7".into(), crate::lie::Family::E7),
    ];
    // also the two small exceptional matrices not otherwise supported
    let g2 = vec![vec![2, -1], vec![-3, 2]];
    let f4 = vec![
        vec![2, -1, 0, 0],
        vec![-1, 2, -2, 0],
        vec![0, -1, 2, -1],
        vec![0, 0, -1, 2],
    ];
    let matches_perm = |target: &Vec<Vec<i64>>| -> bool {
        if target.len() != n {
            return false;
        }
        let mut idx: Vec<usize> = (0..n).collect();
        permute_check(&mut idx, 0, c, target)
    };
    if n == 2 && (matches_perm(&g2) || matches_perm(&transpose_i64(&g2))) {
        return "G2".into();
    }
    if n == 4 && (matches_perm(&f4) || matches_perm(&transpose_i64(&f4))) {
        return "F4".into();
    }
    for (label, fam) in candidates {
        if let Ok(rs) = RootSystem::new(fam, n) {
            if matches_perm(&rs.cartan) {
                return label;
            }
        }
    }
    format!("unknown({n})")
}

fn transpose_i64(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| m[j][i]).collect()).collect()
}

fn permute_check(idx: &mut Vec<usize>, k: usize, c: &[Vec<i64>], target: &[Vec<i64>]) -> bool {
    let n = idx.len();
    if k == n {
        return (0..n).all(|i| (0..n).all(|j| c[i][j] == target[idx[i]][idx[j]]));
    }
    for m in k..n {
        idx.swap(k, m);
        // prune: row k against earlier rows
        let ok = (0..=k).all(|i| {
            c[i][k] == target[idx[i]][idx[k]] && c[k][i] == target[idx[k]][idx[i]]
        });
        if ok && permute_check(idx, k + 1, c, target) {
            return true;
        }
        idx.swap(k, m);
    }
    false
}

/// Reduction of u~ = a + tau b to the fundamental domain of the
/// Bernstein-Schwarzman group W~ ltimes (tau Q~ + Q~) of the invariant
/// subsystem. Both a and b are given in the coordinates of the kernel basis
/// of the invariant Cartan; the coroots define the translation lattice.
#[derive(Debug, Clone)]
pub struct BsReduced {
    pub a: Vec<Rat>,
    pub b: Vec<Rat>,
}

pub struct TildeSystem {
    /// simple coroots of the invariant subsystem, ambient coordinates.
    pub coroots: Vec<Vec<Rat>>,
    /// simple roots alpha~ = 2 v/(v,v), ambient coordinates.
    pub roots: Vec<Vec<Rat>>,
    /// all positive roots of the invariant subsystem (by closure).
    pub pos_roots: Vec<Vec<Rat>>,
}

impl TildeSystem {
    pub fn new(rs: &RootSystem, inv: &InvariantCartan) -> Self {
        let roots: Vec<Vec<Rat>> = inv
            .coroots
            .iter()
            .map(|v| {
                let q = rs.pair(v, v);
                rvec_scale(v, rat(2, 1) / q)
            })
            .collect();
        // closure under simple reflections of the tilde system
        let mut pos: Vec<Vec<Rat>> = roots.clone();
        let mut i = 0;
        while i < pos.len() {
            let x = pos[i].clone();
            for s in &roots {
                let q = rs.pair(s, s);
                let coef = rat(2, 1) * rs.pair(&x, s) / q;
                let img = rvec_sub(&x, &rvec_scale(s, coef));
                if !pos.contains(&img) && rs.pair(&img, &img) > Rat::zero() {
                    // keep only positives: nonnegative tilde-basis coordinates
                    if let Some(coords) = in_basis(rs, &roots, &img) {
                        if coords.iter().all(|c| *c >= Rat::zero()) {
                            pos.push(img);
                        }
                    }
                }
            }
            i += 1;
        }
        TildeSystem {
            coroots: inv.coroots.clone(),
            roots,
            pos_roots: pos,
        }
    }
}

/// Express x as a combination of the given independent vectors, if possible.
fn in_basis(rs: &RootSystem, basis: &[Vec<Rat>], x: &[Rat]) -> Option<Vec<Rat>> {
    // solve via Gram matrix
    
    let gram: Vec<Vec<Rat>> = basis
        .iter()
        .map(|u| basis.iter().map(|v| rs.pair(u, v)).collect())
        .collect();
    let rhs: Vec<Rat> = basis.iter().map(|u| rs.pair(u, x)).collect();
    let inv = rmat_inverse(&gram)?;
    let coords = rmat_vec(&inv, &rhs);
    // verify (x may not lie in the span)
    let mut recon = rvec_zero(x.len());
    for (c, b) in coords.iter().zip(basis) {
        recon = rvec_add(&recon, &rvec_scale(b, *c));
    }
    if recon == x.to_vec() {
        Some(coords)
    } else {
        None
    }
}

/// One affine-Weyl-style reduction step on the invariant subsystem.
pub fn bs_reduce(
    rs: &RootSystem,
    tilde: &TildeSystem,
    a: &[Rat],
    b: &[Rat],
) -> Result<(BsReduced, usize), TransitionError> {
    let mut av = a.to_vec();
    let mut bv = b.to_vec();
    let mut steps = 0usize;
    if tilde.roots.is_empty() {
        return Ok((BsReduced { a: av, b: bv }, 0));
    }
    // highest root of the invariant subsystem: the positive root whose sum
    // with any simple tilde root leaves the system
    let theta = tilde
        .pos_roots
        .iter()
        .find(|x| {
            tilde
                .roots
                .iter()
                .all(|s| !tilde.pos_roots.contains(&rvec_add(x, s)))
        })
        .expect("tilde system has a highest root")
        .clone();
    let theta_sq = rs.pair(&theta, &theta);
    let theta_vee = rvec_scale(&theta, rat(2, 1) / theta_sq);
    // affine Weyl reduction of the tau-part b, mirroring the linear part on a
    for _ in 0..100_000 {
        let mut acted = false;
        for s in &tilde.roots {
            if rs.pair(&bv, s) < Rat::zero() {
                let q = rs.pair(s, s);
                let cb = rat(2, 1) * rs.pair(&bv, s) / q;
                let ca = rat(2, 1) * rs.pair(&av, s) / q;
                bv = rvec_sub(&bv, &rvec_scale(s, cb));
                av = rvec_sub(&av, &rvec_scale(s, ca));
                acted = true;
                steps += 1;
                break;
            }
        }
        if acted {
            continue;
        }
        let p = rat(2, 1) * rs.pair(&bv, &theta) / theta_sq;
        if p > Rat::one() {
            // b -> s_theta(b) + theta^vee, a -> s_theta(a)
            let cb = rat(2, 1) * rs.pair(&bv, &theta) / theta_sq;
            let ca = rat(2, 1) * rs.pair(&av, &theta) / theta_sq;
            bv = rvec_add(&rvec_sub(&bv, &rvec_scale(&theta, cb)), &theta_vee);
            av = rvec_sub(&av, &rvec_scale(&theta, ca));
            steps += 1;
            continue;
        }
        break;
    }
    // z-translations: bring coroot coordinates of a into [0, 1)
    if let Some(ca) = in_basis(rs, &tilde.coroots, &av) {
        for j in 0..tilde.coroots.len() {
            let fa = ca[j].floor();
            if !fa.is_zero() {
                av = rvec_sub(&av, &rvec_scale(&tilde.coroots[j], fa));
                steps += 1;
            }
        }
    }
    Ok((BsReduced { a: av, b: bv }, steps))
}
