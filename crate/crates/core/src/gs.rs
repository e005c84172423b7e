//! Generalized sin basis: Fourier transforms of the Chevalley basis along
//! orbits of a finite-order diagram symmetry, the induced grading, and the
//! invariant subalgebra of grade zero.
//!
//! The symmetry is lifted to an exact algebra automorphism. When a diagonal
//! +-1 regauge makes the structure constants invariant (a GF(2) linear
//! system) the lift is the plain permutation and the textbook orbit formulas
//! apply verbatim. For C-type no such regauge exists; the lift is then built
//! as a product of exponentials and carries -1 signs on some root spaces,
//! which shift the supported Fourier indices on orbits whose wrap sign is
//! negative.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::lie::RootSystem;
use crate::lie::StructureConstants;
use crate::rat::{rat, rat_to_f64, rmat_identity, rmat_mul, rmat_vec, Rat};
use crate::transition::{
    classify_cartan, find_lambda, invariant_cartan, Lambda, TildeSystem, TransitionError,
};

#[derive(Debug, thiserror::Error)]
pub enum GsError {
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error("no consistent sign gauge; witness pair ({0}, {1})")]
    GaugeInconsistent(usize, usize),
    #[error("no finite-order lift of the symmetry found")]
    LiftOrder,
    #[error("invariant subalgebra mismatch: {0}")]
    TableMismatch(String),
}

/// Identity symmetry; makes the GS basis collapse to the Chevalley basis.
pub fn identity_lambda(rs: &RootSystem) -> Lambda {
    Lambda {
        node: 0,
        matrix: rmat_identity(rs.rank),
        root_perm: (0..rs.num_roots()).collect(),
        ext_perm: (0..=rs.rank).collect(),
        order: 1,
    }
}

/// Exact lift of the symmetry to an algebra automorphism of order l:
/// L E_r = sign[r] E_{perm[r]}, plain Weyl action on the Cartan part.
pub struct Lift {
    pub mat: Vec<Vec<Rat>>,
    pub perm: Vec<usize>,
    pub sign: Vec<i64>,
    /// true when all signs were gauged away
    pub gauged: bool,
}

/// adjoint matrix of E_root on the (coroot coords, root spaces) basis
fn ad_root(rs: &RootSystem, sc: &StructureConstants, root: usize) -> Vec<Vec<Rat>> {
    let n = rs.rank;
    let d = n + rs.num_roots();
    let mut m = vec![vec![rat(0, 1); d]; d];
    for i in 0..n {
        let mut s = rat(0, 1);
        for (j, &c) in rs.roots[root].iter().enumerate() {
            s += rat(c, 1) * rs.cartan[j][i];
        }
        // [E_root, H_i] = -<root, alpha_i^vee> E_root
        m[n + root][i] = -s;
    }
    for b in 0..rs.num_roots() {
        if b == rs.neg(root) {
            for (t, cc) in rs.coroot_coords(root).iter().enumerate() {
                m[t][n + b] = rat(*cc, 1);
            }
        } else {
            let mut sum = rs.roots[root].clone();
            for (t, &v) in sum.iter_mut().zip(&rs.roots[b]) {
                *t += v;
            }
            if let Some(k) = rs.root_index(&sum) {
                m[n + k][n + b] = sc.c(root, b);
            }
        }
    }
    m
}

fn exp_nilpotent(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let d = m.len();
    let mut out = rmat_identity(d);
    let mut term = rmat_identity(d);
    for k in 1..32 {
        term = rmat_mul(m, &term);
        for row in &mut term {
            for v in row.iter_mut() {
                *v /= rat(k, 1);
            }
        }
        if term.iter().all(|r| r.iter().all(|v| v.is_zero())) {
            break;
        }
        for (o, t) in out.iter_mut().zip(&term) {
            for (x, y) in o.iter_mut().zip(t) {
                *x += *y;
            }
        }
    }
    out
}

/// Reduced word for a Weyl element given on simple-root coordinates, found
/// by stripping simple reflections from the right.
fn reduced_word(rs: &RootSystem, w: &[Vec<Rat>]) -> Vec<usize> {
    let n = rs.rank;
    let mut w = w.to_vec();
    let mut word = Vec::new();
    let ident = rmat_identity(n);
    let mut guard = 0;
    while w != ident {
        let i = (0..n)
            .find(|&i| {
                let mut e = vec![rat(0, 1); n];
                e[i] = rat(1, 1);
                rmat_vec(&w, &e).iter().all(|v| *v <= rat(0, 1))
            })
            .expect("a non-identity Weyl element sends some simple root negative");
        let mut e = vec![0i64; n];
        e[i] = 1;
        let r = rs.root_index(&e).unwrap();
        let mut refl = rmat_identity(n);
        for j in 0..n {
            let mut ej = vec![rat(0, 1); n];
            ej[j] = rat(1, 1);
            let im = rs.reflect(r, &ej);
            for k in 0..n {
                refl[k][j] = im[k];
            }
        }
        w = rmat_mul(&w, &refl);
        word.push(i);
        guard += 1;
        assert!(guard <= 200);
    }
    word
}

fn perm_sign_of(rs: &RootSystem, m: &[Vec<Rat>]) -> (Vec<usize>, Vec<i64>) {
    let n = rs.rank;
    let nr = rs.num_roots();
    let mut perm = vec![0usize; nr];
    let mut sign = vec![0i64; nr];
    for b in 0..nr {
        let mut hit = false;
        for k in 0..nr {
            let v = m[n + k][n + b];
            if !v.is_zero() {
                assert!(!hit && v.abs() == rat(1, 1));
                hit = true;
                perm[b] = k;
                sign[b] = if v > rat(0, 1) { 1 } else { -1 };
            }
        }
        assert!(hit);
        for i in 0..n {
            assert!(m[i][n + b].is_zero());
        }
    }
    (perm, sign)
}

fn build_lift(
    rs: &RootSystem,
    sc: &StructureConstants,
    lam: &Lambda,
    gauged: bool,
) -> Result<Lift, GsError> {
    let n = rs.rank;
    let d = n + rs.num_roots();
    if gauged {
        // in the regauged basis the bare permutation is an automorphism
        let mut m = vec![vec![rat(0, 1); d]; d];
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            let img = lam.apply_root(rs.root_index(&e).unwrap());
            for (j, cc) in rs.coroot_coords(img).iter().enumerate() {
                m[j][i] = rat(*cc, 1);
            }
        }
        for r in 0..rs.num_roots() {
            m[n + lam.apply_root(r)][n + r] = rat(1, 1);
        }
        return Ok(Lift {
            mat: m,
            perm: lam.root_perm.clone(),
            sign: vec![1; rs.num_roots()],
            gauged: true,
        });
    }

    let word = reduced_word(rs, &lam.matrix);
    let mut a = rmat_identity(d);
    for &i in word.iter().rev() {
        let mut e = vec![0i64; n];
        e[i] = 1;
        let r = rs.root_index(&e).unwrap();
        let ade = ad_root(rs, sc, r);
        let mut adf = ad_root(rs, sc, rs.neg(r));
        for row in &mut adf {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        let ni = rmat_mul(
            &rmat_mul(&exp_nilpotent(&ade), &exp_nilpotent(&adf)),
            &exp_nilpotent(&ade),
        );
        a = rmat_mul(&a, &ni);
    }
    // the lift must close up exactly: A^l = 1
    let mut p = a.clone();
    for _ in 1..lam.order {
        p = rmat_mul(&a, &p);
    }
    if p != rmat_identity(d) {
        return Err(GsError::LiftOrder);
    }
    let (perm, sign) = perm_sign_of(rs, &a);
    assert_eq!(perm, lam.root_perm);
    Ok(Lift { mat: a, perm, sign, gauged: false })
}

#[derive(Debug, Clone)]
pub struct RootOrbit {
    /// root indices, elems[m] is the m-th lift image of elems[0]
    pub elems: Vec<usize>,
    /// l / orbit length
    pub p: usize,
    /// sign picked up after a full walk around the orbit
    pub wrap: i64,
    /// supported Fourier indices are offset + t p; offset = p/2 when wrap = -1
    pub offset: usize,
}

impl RootOrbit {
    pub fn indices(&self, l: usize) -> Vec<usize> {
        (0..l / self.p).map(|t| self.offset + t * self.p).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ExtOrbit {
    /// extended-node indices (0 is the affine node)
    pub elems: Vec<usize>,
    pub p: usize,
    pub affine: bool,
}

#[derive(Debug, Clone)]
pub struct OrbitDecomposition {
    pub l: usize,
    pub root_orbits: Vec<RootOrbit>,
    /// root index -> (orbit id, position within orbit)
    pub orbit_of: Vec<(usize, usize)>,
    pub ext_orbits: Vec<ExtOrbit>,
    pub ext_orbit_of: Vec<(usize, usize)>,
    /// roots generated by the simple nodes outside the affine orbit
    pub in_r1: Vec<bool>,
    /// ids of root orbits lying outside that subsystem
    pub tprime: Vec<usize>,
}

pub fn decompose_orbits(rs: &RootSystem, lam: &Lambda, lift: &Lift) -> OrbitDecomposition {
    let nr = rs.num_roots();
    let l = lam.order;

    let mut orbit_of = vec![(usize::MAX, 0); nr];
    let mut root_orbits = Vec::new();
    for r in 0..nr {
        if orbit_of[r].0 != usize::MAX {
            continue;
        }
        let id = root_orbits.len();
        let mut elems = vec![r];
        orbit_of[r] = (id, 0);
        let mut s = lift.sign[r];
        let mut cur = lift.perm[r];
        while cur != r {
            orbit_of[cur] = (id, elems.len());
            elems.push(cur);
            s *= lift.sign[cur];
            cur = lift.perm[cur];
        }
        assert_eq!(l % elems.len(), 0);
        let p = l / elems.len();
        let wrap = s;
        let offset = if wrap == 1 {
            0
        } else {
            assert_eq!(p % 2, 0, "negative wrap forces an even divisor");
            p / 2
        };
        root_orbits.push(RootOrbit { elems, p, wrap, offset });
    }
    assert_eq!(root_orbits.iter().map(|o| o.elems.len()).sum::<usize>(), nr);

    let mut ext_orbit_of = vec![(usize::MAX, 0); rs.rank + 1];
    let mut ext_orbits = Vec::new();
    for v in 0..=rs.rank {
        if ext_orbit_of[v].0 != usize::MAX {
            continue;
        }
        let id = ext_orbits.len();
        let mut elems = vec![v];
        ext_orbit_of[v] = (id, 0);
        let mut cur = lam.ext_perm[v];
        while cur != v {
            ext_orbit_of[cur] = (id, elems.len());
            elems.push(cur);
            cur = lam.ext_perm[cur];
        }
        let affine = elems.contains(&0);
        let p = l / elems.len();
        ext_orbits.push(ExtOrbit { elems, p, affine });
    }

    // simple nodes surviving after the affine orbit is removed
    let affine_orbit: Vec<usize> = ext_orbits
        .iter()
        .find(|o| o.affine)
        .map(|o| o.elems.clone())
        .unwrap_or_default();
    let mut pi1 = vec![false; rs.rank + 1];
    for v in 1..=rs.rank {
        pi1[v] = !affine_orbit.contains(&v);
    }
    let in_r1: Vec<bool> = (0..nr)
        .map(|r| {
            rs.roots[r]
                .iter()
                .enumerate()
                .all(|(j, &c)| c == 0 || pi1[j + 1])
        })
        .collect();
    // that subsystem is stable under the symmetry
    for r in 0..nr {
        assert_eq!(in_r1[r], in_r1[lift.perm[r]]);
    }
    let tprime: Vec<usize> = (0..root_orbits.len())
        .filter(|&id| !in_r1[root_orbits[id].elems[0]])
        .collect();

    OrbitDecomposition {
        l,
        root_orbits,
        orbit_of,
        ext_orbits,
        ext_orbit_of,
        in_r1,
        tprime,
    }
}

/// Diagonal +-1 rescaling of the root vectors making the structure constants
/// invariant under the symmetry, found as a GF(2) linear system.
pub fn sign_gauge_fix(
    rs: &RootSystem,
    sc: &StructureConstants,
    lam: &Lambda,
) -> Result<Vec<i64>, GsError> {
    let nr = rs.num_roots();
    let words = nr / 64 + 1;
    // row = (bitmask over root variables, rhs bit, witness pair)
    let mut rows: Vec<(Vec<u64>, bool, (usize, usize))> = Vec::new();
    let mut push = |vars: &[usize], rhs: bool, wit: (usize, usize)| {
        let mut mask = vec![0u64; words];
        for &v in vars {
            mask[v / 64] ^= 1 << (v % 64);
        }
        rows.push((mask, rhs, wit));
    };

    for i in 0..nr {
        for j in (i + 1)..nr {
            let c = sc.c(i, j);
            if c == rat(0, 1) {
                continue;
            }
            let mut sum = rs.roots[i].clone();
            for (t, &x) in sum.iter_mut().zip(&rs.roots[j]) {
                *t += x;
            }
            let k = rs.root_index(&sum).unwrap();
            let (li, lj, lk) = (lam.apply_root(i), lam.apply_root(j), lam.apply_root(k));
            let cl = sc.c(li, lj);
            assert_eq!(c.abs(), cl.abs());
            push(&[i, j, k, li, lj, lk], (c < rat(0, 1)) != (cl < rat(0, 1)), (i, j));
        }
    }
    for r in 0..nr {
        if rs.is_positive(r) {
            push(&[r, rs.neg(r)], false, (r, rs.neg(r)));
        }
    }

    // elimination
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut rank = 0;
    for col in 0..nr {
        let Some(pr) = (rank..rows.len()).find(|&r| rows[r].0[col / 64] >> (col % 64) & 1 == 1)
        else {
            continue;
        };
        rows.swap(rank, pr);
        for r in 0..rows.len() {
            if r != rank && rows[r].0[col / 64] >> (col % 64) & 1 == 1 {
                let (head, tail) = rows.split_at_mut(rank.max(r));
                let (a, b) = if r > rank {
                    (&head[rank], &mut tail[0])
                } else {
                    (&tail[0], &mut head[r])
                };
                for w in 0..words {
                    b.0[w] ^= a.0[w];
                }
                b.1 ^= a.1;
            }
        }
        pivots.push((rank, col));
        rank += 1;
    }
    for row in &rows[rank..] {
        if row.1 {
            return Err(GsError::GaugeInconsistent(row.2 .0, row.2 .1));
        }
    }

    let mut x = vec![false; nr];
    for &(r, c) in &pivots {
        // free variables are zero, so the pivot value is just the rhs
        x[c] = rows[r].1;
    }
    let eps: Vec<i64> = x.iter().map(|&b| if b { -1 } else { 1 }).collect();

    // exact invariance of the gauged constants
    for i in 0..nr {
        for j in 0..nr {
            let c = sc.c(i, j);
            if c == rat(0, 1) {
                continue;
            }
            let mut sum = rs.roots[i].clone();
            for (t, &v) in sum.iter_mut().zip(&rs.roots[j]) {
                *t += v;
            }
            let Some(k) = rs.root_index(&sum) else { continue };
            let (li, lj, lk) = (lam.apply_root(i), lam.apply_root(j), lam.apply_root(k));
            let g = c * rat(eps[i] * eps[j] * eps[k], 1);
            let gl = sc.c(li, lj) * rat(eps[li] * eps[lj] * eps[lk], 1);
            if g != gl {
                return Err(GsError::GaugeInconsistent(i, j));
            }
        }
    }
    Ok(eps)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GsGen {
    /// root-orbit generator, Fourier index a
    T { orbit: usize, a: usize },
    /// Cartan-orbit generator, Fourier index c
    H { orbit: usize, c: usize },
}

pub struct GsBasis {
    pub rs: RootSystem,
    pub lam: Lambda,
    pub lift: Lift,
    pub orbits: OrbitDecomposition,
    /// regauge applied to the Chevalley basis (all ones when none exists)
    pub eps: Vec<i64>,
    pub sc: StructureConstants,
    pub l: usize,
    pub dim: usize,
    pub gens: Vec<GsGen>,
    /// columns are GS generators over the gauged Chevalley basis
    pub change: DMatrix<Complex64>,
    pub change_inv: DMatrix<Complex64>,
    /// eigenvalue exponent g of the lift: L v = omega^g v
    pub grades: Vec<usize>,
    /// extended-node coroots as coefficients over the simple coroots
    ext_coroot: Vec<Vec<Rat>>,
    /// Gram matrix (alpha_i^vee, alpha_j^vee) of the simple coroots
    cor_gram: Vec<Vec<Rat>>,
}

pub fn omega_pow(l: usize, k: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / l as f64)
}

impl GsBasis {
    pub fn new(rs: RootSystem, node: usize) -> Result<Self, GsError> {
        let lam = find_lambda(&rs, node)?;
        Self::with_lambda(rs, lam)
    }

    pub fn with_lambda(rs: RootSystem, lam: Lambda) -> Result<Self, GsError> {
        let sc = StructureConstants::new(&rs);
        let (eps, gauged) = match sign_gauge_fix(&rs, &sc, &lam) {
            Ok(e) => (e, true),
            Err(GsError::GaugeInconsistent(..)) => (vec![1; rs.num_roots()], false),
            Err(e) => return Err(e),
        };
        let lift = build_lift(&rs, &sc, &lam, gauged)?;
        let orbits = decompose_orbits(&rs, &lam, &lift);
        let l = lam.order;
        let n = rs.rank;
        let dim = n + rs.num_roots();

        let mut ext_coroot = Vec::with_capacity(n + 1);
        {
            let theta = rs.highest_root();
            let v: Vec<Rat> = rs
                .coroot_coords(theta)
                .iter()
                .map(|&c| rat(-c, 1))
                .collect();
            ext_coroot.push(v);
            for j in 0..n {
                let mut e = vec![rat(0, 1); n];
                e[j] = rat(1, 1);
                ext_coroot.push(e);
            }
        }
        let mut cor_gram = vec![vec![rat(0, 1); n]; n];
        for i in 0..n {
            let mut ei = vec![0i64; n];
            ei[i] = 1;
            let ri = rs.root_index(&ei).unwrap();
            for j in 0..n {
                let mut ej = vec![0i64; n];
                ej[j] = 1;
                let rj = rs.root_index(&ej).unwrap();
                cor_gram[i][j] = rs.pair(&rs.coroot_vec(ri), &rs.coroot_vec(rj));
            }
        }

        let mut gs = GsBasis {
            rs,
            lam,
            lift,
            orbits,
            eps,
            sc,
            l,
            dim,
            gens: Vec::new(),
            change: DMatrix::zeros(dim, dim),
            change_inv: DMatrix::zeros(dim, dim),
            grades: Vec::new(),
            ext_coroot,
            cor_gram,
        };

        let mut cols: Vec<DVector<Complex64>> = Vec::new();
        for (id, orb) in gs.orbits.root_orbits.iter().enumerate() {
            for a in orb.indices(l) {
                gs.gens.push(GsGen::T { orbit: id, a });
                gs.grades.push((l - a) % l);
                cols.push(gs.t_vec(id, a));
            }
        }
        for (id, orb) in gs.orbits.ext_orbits.iter().enumerate() {
            for m in 0..orb.elems.len() {
                let c = m * orb.p;
                if c == 0 && orb.affine {
                    continue;
                }
                gs.gens.push(GsGen::H { orbit: id, c });
                gs.grades.push((l - c) % l);
                cols.push(gs.h_ext_vec(id, c));
            }
        }
        assert_eq!(cols.len(), dim);
        gs.change = DMatrix::from_columns(&cols);
        gs.change_inv = gs
            .change
            .clone()
            .try_inverse()
            .expect("GS change of basis is invertible");
        Ok(gs)
    }

    pub fn n_roots(&self) -> usize {
        self.rs.num_roots()
    }

    /// gauged structure constant
    pub fn c(&self, i: usize, j: usize) -> f64 {
        let mut sum = self.rs.roots[i].clone();
        for (t, &v) in sum.iter_mut().zip(&self.rs.roots[j]) {
            *t += v;
        }
        match self.rs.root_index(&sum) {
            Some(k) => {
                rat_to_f64(self.sc.c(i, j)) * (self.eps[i] * self.eps[j] * self.eps[k]) as f64
            }
            None => 0.0,
        }
    }

    fn cartan_pair(&self, root: usize, i: usize) -> f64 {
        // <gamma, alpha_i^vee>
        let mut s = rat(0, 1);
        for (j, &c) in self.rs.roots[root].iter().enumerate() {
            s += rat(c, 1) * self.rs.cartan[j][i];
        }
        rat_to_f64(s)
    }

    /// bracket of two elements in gauged Chevalley coordinates
    pub fn bracket(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.rs.rank;
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            let xi = x[i];
            if xi.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                let yj = y[j];
                if yj.norm_sqr() == 0.0 {
                    continue;
                }
                let w = xi * yj;
                if i < n && j < n {
                    continue;
                } else if i < n {
                    let r = j - n;
                    out[j] += w * self.cartan_pair(r, i);
                } else if j < n {
                    let r = i - n;
                    out[i] -= w * self.cartan_pair(r, j);
                } else {
                    let (r, s) = (i - n, j - n);
                    if s == self.rs.neg(r) {
                        for (t, cc) in self.rs.coroot_coords(r).iter().enumerate() {
                            out[t] += w * *cc as f64;
                        }
                    } else {
                        let mut sum = self.rs.roots[r].clone();
                        for (t, &v) in sum.iter_mut().zip(&self.rs.roots[s]) {
                            *t += v;
                        }
                        if let Some(k) = self.rs.root_index(&sum) {
                            out[n + k] += w * self.c(r, s);
                        }
                    }
                }
            }
        }
        out
    }

    /// invariant form: (E_a, E_-a) = 2/(a,a), (H_a, H_b) = (a^vee, b^vee)
    pub fn killing_matrix(&self) -> DMatrix<Complex64> {
        let n = self.rs.rank;
        let mut k = DMatrix::zeros(self.dim, self.dim);
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = Complex64::new(rat_to_f64(self.cor_gram[i][j]), 0.0);
            }
        }
        for r in 0..self.rs.num_roots() {
            let v = 2.0 / rat_to_f64(self.rs.root_sq(r));
            k[(n + r, n + self.rs.neg(r))] = Complex64::new(v, 0.0);
        }
        k
    }

    pub fn killing(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> Complex64 {
        let n = self.rs.rank;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if x[i].norm_sqr() > 0.0 && y[j].norm_sqr() > 0.0 {
                    s += x[i] * y[j] * rat_to_f64(self.cor_gram[i][j]);
                }
            }
        }
        for r in 0..self.rs.num_roots() {
            s += x[n + r] * y[n + self.rs.neg(r)] * (2.0 / rat_to_f64(self.rs.root_sq(r)));
        }
        s
    }

    /// form on the Cartan part for coefficient vectors over the simple coroots
    pub fn cartan_form(&self, a: &[Rat], b: &[Rat]) -> Rat {
        let n = self.rs.rank;
        let mut s = rat(0, 1);
        for i in 0..n {
            for j in 0..n {
                s += a[i] * self.cor_gram[i][j] * b[j];
            }
        }
        s
    }

    /// matrix of the lift on the gauged Chevalley basis
    pub fn lambda_lift(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            Complex64::new(rat_to_f64(self.lift.mat[i][j]), 0.0)
        })
    }

    /// t^a on an orbit, taken at the orbit base point
    pub fn t_vec(&self, orbit: usize, a: usize) -> DVector<Complex64> {
        self.t_fourier(a, self.orbits.root_orbits[orbit].elems[0])
    }

    /// Fourier transform (1/sqrt l) sum_m omega^{ma} L^m E_root; vanishes
    /// when a is not supported on the orbit of root
    pub fn t_fourier(&self, a: usize, root: usize) -> DVector<Complex64> {
        let n = self.rs.rank;
        let norm = 1.0 / (self.l as f64).sqrt();
        let mut v = DVector::zeros(self.dim);
        let mut r = root;
        let mut s = 1i64;
        for m in 0..self.l {
            v[n + r] += omega_pow(self.l, (m * a) as i64) * (norm * s as f64);
            s *= self.lift.sign[r];
            r = self.lift.perm[r];
        }
        v
    }

    pub fn h_ext_vec(&self, orbit: usize, c: usize) -> DVector<Complex64> {
        let orb = &self.orbits.ext_orbits[orbit];
        let norm = orb.p as f64 / (self.l as f64).sqrt();
        let mut v = DVector::zeros(self.dim);
        for (m, &node) in orb.elems.iter().enumerate() {
            let w = omega_pow(self.l, (m * c) as i64) * norm;
            for (j, q) in self.ext_coroot[node].iter().enumerate() {
                v[j] += w * rat_to_f64(*q);
            }
        }
        v
    }

    /// Fourier transform of the coroot of an arbitrary root
    pub fn h_root_vec(&self, k: usize, root: usize) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim);
        let norm = 1.0 / (self.l as f64).sqrt();
        let mut r = root;
        for m in 0..self.l {
            let w = omega_pow(self.l, (m * k) as i64) * norm;
            for (j, cc) in self.rs.coroot_coords(r).iter().enumerate() {
                v[j] += w * *cc as f64;
            }
            r = self.lift.perm[r];
        }
        v
    }

    /// normalized Cartan element (alpha,alpha)/2 * h^k_alpha
    pub fn hbar_root_vec(&self, k: usize, root: usize) -> DVector<Complex64> {
        let s = rat_to_f64(self.rs.root_sq(root)) / 2.0;
        self.h_root_vec(k, root) * Complex64::new(s, 0.0)
    }

    /// dual of t^b on the same orbit: t^{-b} at the negated base point
    /// times (alpha,alpha)/(2 p)
    pub fn t_dual_vec(&self, orbit: usize, b: usize) -> DVector<Complex64> {
        let orb = &self.orbits.root_orbits[orbit];
        let base = orb.elems[0];
        let neg = self.rs.neg(base);
        let s = rat_to_f64(self.rs.root_sq(base)) / (2.0 * orb.p as f64);
        self.t_fourier((self.l - b % self.l) % self.l, neg) * Complex64::new(s, 0.0)
    }

    /// pairing <x, alpha> of a Cartan-coordinate point with a root
    pub fn eval_root(&self, x: &[Rat], root: usize) -> Rat {
        self.rs.pair(x, &self.rs.root_vec(root))
    }
}

/// Dual pairs of Cartan bases split by grade: for each grade g a basis of the
/// grade-g Cartan component and a dual family in grade l-g with
/// (dual_s, basis_t) = delta_st under the invariant form.
pub struct GradedCartan {
    pub l: usize,
    /// (grade, basis columns, dual columns), vectors in full algebra coordinates
    pub components: Vec<(usize, Vec<DVector<Complex64>>, Vec<DVector<Complex64>>)>,
}

pub fn graded_cartan(gs: &GsBasis) -> GradedCartan {
    let n = gs.rs.rank;
    let l = gs.l;
    let lift = gs.lambda_lift();
    let lh = lift.view((0, 0), (n, n)).into_owned();

    // raw grade-g bases from the spectral projector
    let mut raw: Vec<Vec<DVector<Complex64>>> = Vec::with_capacity(l);
    for g in 0..l {
        let mut p: DMatrix<Complex64> = DMatrix::zeros(n, n);
        let mut pw: DMatrix<Complex64> = DMatrix::identity(n, n);
        for m in 0..l {
            p += &pw * (omega_pow(l, -((g * m) as i64)) / l as f64);
            pw = &lh * pw;
        }
        // column-reduce to a rank basis
        let mut basis: Vec<DVector<Complex64>> = Vec::new();
        let mut work = p.clone();
        for col in 0..n {
            let c = work.column(col).into_owned();
            let norm = c.norm();
            if norm < 1e-9 {
                continue;
            }
            basis.push(p.column(col).into_owned());
            let c = c / Complex64::new(norm, 0.0);
            for col2 in (col + 1)..n {
                let proj = c.adjoint() * work.column(col2);
                let upd = work.column(col2) - &c * proj[(0, 0)];
                work.set_column(col2, &upd);
            }
        }
        raw.push(basis);
    }

    let embed = |v: &DVector<Complex64>| -> DVector<Complex64> {
        let mut out = DVector::zeros(gs.dim);
        for i in 0..n {
            out[i] = v[i];
        }
        out
    };

    let mut components = Vec::new();
    for g in 0..l {
        let basis = &raw[g];
        let k = basis.len();
        if k == 0 {
            continue;
        }
        let partner = &raw[(l - g) % l];
        assert_eq!(partner.len(), k);
        let bfull: Vec<DVector<Complex64>> = basis.iter().map(&embed).collect();
        let pfull: Vec<DVector<Complex64>> = partner.iter().map(&embed).collect();
        let mut gram = DMatrix::zeros(k, k);
        for s in 0..k {
            for t in 0..k {
                gram[(s, t)] = gs.killing(&pfull[s], &bfull[t]);
            }
        }
        let w = gram
            .transpose()
            .try_inverse()
            .expect("grade pairing is nondegenerate");
        let mut dual = Vec::with_capacity(k);
        for s in 0..k {
            let mut d: DVector<Complex64> = DVector::zeros(gs.dim);
            for u in 0..k {
                d += &pfull[u] * w[(u, s)];
            }
            dual.push(d);
        }
        components.push((g, bfull, dual));
    }
    GradedCartan { l, components }
}

#[derive(Debug)]
pub struct InvariantSubalgebra {
    /// simple component labels of the invariant simple part
    pub tilde_type: Vec<String>,
    pub tilde_rank: usize,
    pub dim_tilde: usize,
    pub dim_v: usize,
    pub dim_g0: usize,
    /// whether any coroot needed the tail correction
    pub corrected: bool,
    /// simple coroots of the invariant part, algebra coordinates
    pub tilde_cartan: Vec<DVector<Complex64>>,
    /// raising generators matched to the simple coroots
    pub tilde_raise: Vec<DVector<Complex64>>,
    pub cartan_matrix: Vec<Vec<i64>>,
}

fn type_dim(label: &str) -> usize {
    let (fam, n) = (label.chars().next().unwrap(), label[1..].parse::<usize>().unwrap());
    match fam {
        'A' => n * (n + 2),
        'B' | 'C' => n * (2 * n + 1),
        'D' => n * (2 * n - 1),
        'G' => 14,
        'F' => 52,
        'E' => match n {
            6 => 78,
            7 => 133,
            _ => 248,
        },
        _ => panic!("unknown type {label}"),
    }
}

/// Expected invariant decomposition: (simple-part label, dim of grade zero).
/// Empty label means the simple part is trivial.
pub fn expected_invariant(rs: &RootSystem, node: usize, l: usize) -> Option<(String, usize)> {
    use crate::lie::Family::*;
    let n = rs.rank;
    match rs.family {
        A => {
            let p = (n + 1) / l;
            let tilde = if p >= 2 { format!("A{}", p - 1) } else { String::new() };
            Some((tilde, (p * p - 1) + (l - 1) * p * p))
        }
        B if node == 1 && l == 2 => Some((format!("B{}", n - 1), n * (2 * n - 1))),
        C if node == rs.rank && l == 2 => {
            let tilde = if n == 3 {
                "A1".into()
            } else if n == 4 {
                "A1+A1".into()
            } else if n % 2 == 0 {
                format!("D{}", n / 2)
            } else {
                format!("B{}", (n - 1) / 2)
            };
            Some((tilde, n * n))
        }
        D if node == 1 && l == 2 => Some((format!("B{}", n - 2), (n - 1) * (2 * n - 3) + 1)),
        D if n % 2 == 0 && node >= n - 1 && l == 2 => {
            let m = n / 2;
            let tilde = if m == 2 { "A1+A1".into() } else { format!("D{m}") };
            Some((tilde, 2 * m * (2 * m - 1)))
        }
        D if n % 2 == 1 && node >= n - 1 && l == 4 => {
            let m = (n - 1) / 2;
            let tilde = if m == 2 { "A1".into() } else { format!("B{}", m - 1) };
            Some((tilde, 2 * m * (2 * m - 1) + 1))
        }
        E6 if l == 3 => Some(("G2".into(), 30)),
        E7 if node == 7 && l == 2 => Some(("F4".into(), 79)),
        _ => None,
    }
}

pub fn identify_invariant_subalgebra(gs: &GsBasis) -> Result<InvariantSubalgebra, GsError> {
    let inv = invariant_cartan(&gs.rs, &gs.lam)?;
    let tilde_type = classify_cartan(&inv.cartan);
    let tilde_rank = inv.coroots.len();
    let ts = TildeSystem::new(&gs.rs, &inv);
    let dim_tilde = tilde_rank + 2 * ts.pos_roots.len();

    // orbits carrying a grade-zero generator
    let grade0 = |ids: &[usize]| -> usize {
        ids.iter()
            .filter(|&&id| gs.orbits.root_orbits[id].offset == 0)
            .count()
    };
    let r1_ids: Vec<usize> = (0..gs.orbits.root_orbits.len())
        .filter(|id| !gs.orbits.tprime.contains(id))
        .collect();
    let n_r1_grade0 = grade0(&r1_ids);
    let dim_v = grade0(&gs.orbits.tprime);
    let dim_g0 = gs.grades.iter().filter(|&&g| g == 0).count();

    let check = |cond: bool, msg: String| -> Result<(), GsError> {
        if cond {
            Ok(())
        } else {
            Err(GsError::TableMismatch(msg))
        }
    };
    check(
        dim_tilde == tilde_rank + n_r1_grade0,
        format!("root count {n_r1_grade0} does not match type {tilde_type:?}"),
    )?;
    check(
        dim_g0 == dim_tilde + dim_v,
        format!("grade-zero dim {dim_g0} != {dim_tilde} + {dim_v}"),
    )?;
    let from_labels: usize = tilde_type.iter().map(|t| type_dim(t)).sum();
    check(
        from_labels == dim_tilde,
        format!("classified dims {from_labels} != {dim_tilde}"),
    )?;
    if let Some((want_tilde, want_g0)) = expected_invariant(&gs.rs, gs.lam.node, gs.l) {
        let mut got: Vec<&str> = tilde_type.iter().map(|s| s.as_str()).collect();
        got.sort();
        let mut want: Vec<&str> = want_tilde.split('+').filter(|s| !s.is_empty()).collect();
        want.sort();
        check(got == want, format!("invariant type {got:?} != expected {want:?}"))?;
        check(dim_g0 == want_g0, format!("dim g0 {dim_g0} != expected {want_g0}"))?;
    }

    // embed the simple coroots: convert from simple-root coordinates to
    // coefficients over the simple coroots
    let n = gs.rs.rank;
    let mut mat: Vec<Vec<Rat>> = vec![vec![rat(0, 1); n]; n];
    for j in 0..n {
        let mut e = vec![0i64; n];
        e[j] = 1;
        let cv = gs.rs.coroot_vec(gs.rs.root_index(&e).unwrap());
        for i in 0..n {
            mat[i][j] = cv[i];
        }
    }
    let minv = crate::rat::rmat_inverse(&mat).expect("coroot basis");
    let mut tilde_cartan = Vec::new();
    for co in &inv.coroots {
        let mut v: DVector<Complex64> = DVector::zeros(gs.dim);
        for (i, row) in minv.iter().enumerate() {
            let mut s = rat(0, 1);
            for (j, m) in row.iter().enumerate() {
                s += *m * co[j];
            }
            v[i] = Complex64::new(rat_to_f64(s), 0.0);
        }
        tilde_cartan.push(v);
    }
    let mut tilde_raise = Vec::new();
    let mut raise_root = Vec::new();
    for orb in inv.ext_orbits.iter().skip(1) {
        let node = orb[0];
        let mut e = vec![0i64; n];
        e[node - 1] = 1;
        let root = gs.rs.root_index(&e).unwrap();
        let (oid, _) = gs.orbits.orbit_of[root];
        check(
            gs.orbits.root_orbits[oid].offset == 0,
            format!("raising orbit of node {node} carries no grade-zero generator"),
        )?;
        raise_root.push(root);
        tilde_raise.push(gs.t_vec(oid, 0));
    }

    // Adjoint eigenvalues of the raising generators: [h_k, e_j] = w_jk e_j
    // with w_jk the pairing of the representative root against the invariant
    // coroot. Each row of (w_jk) is proportional to the matching row of the
    // restricted Cartan matrix; the ratio exceeds one exactly when an orbit
    // folds adjacent nodes together.
    let m = tilde_raise.len();
    let mut w = vec![vec![rat(0, 1); m]; m];
    for j in 0..m {
        for k in 0..m {
            w[j][k] = gs.rs.pair(&inv.coroots[k], &gs.rs.root_vec(raise_root[j]));
        }
    }
    for j in 0..m {
        check(w[j][j] > rat(0, 1), format!("nonpositive diagonal pairing at {j}"))?;
        for k in 0..m {
            check(
                w[j][k] * rat(inv.cartan[j][j], 1) == w[j][j] * rat(inv.cartan[j][k], 1),
                format!("pairing row {j} not proportional to Cartan row"),
            )?;
        }
    }
    for (kx, h) in tilde_cartan.iter().enumerate() {
        for (j, e) in tilde_raise.iter().enumerate() {
            let b = gs.bracket(h, e);
            let want = e * Complex64::new(rat_to_f64(w[j][kx]), 0.0);
            check(
                (b - want).norm() < 1e-9,
                format!("Cartan relation failed at ({kx},{j})"),
            )?;
        }
    }

    // orthogonality of the simple part and the complement under the form
    let mut vmax: f64 = 0.0;
    for &id in &gs.orbits.tprime {
        if gs.orbits.root_orbits[id].offset != 0 {
            continue;
        }
        let tv = gs.t_vec(id, 0);
        for h in &tilde_cartan {
            vmax = vmax.max(gs.killing(h, &tv).norm());
        }
        for e in &tilde_raise {
            vmax = vmax.max(gs.killing(e, &tv).norm());
        }
    }
    check(vmax < 1e-10, format!("complement not orthogonal: {vmax:.2e}"))?;

    Ok(InvariantSubalgebra {
        tilde_type,
        tilde_rank,
        dim_tilde,
        dim_v,
        dim_g0,
        corrected: inv.corrected.iter().any(|&c| c),
        tilde_cartan,
        tilde_raise,
        cartan_matrix: inv.cartan.clone(),
    })
}
