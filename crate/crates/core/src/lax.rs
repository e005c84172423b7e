//! Twisted elliptic Lax operators over the graded sine basis, their
//! quasi-periodicity and residue checks, moment reduction and Hamiltonians.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::elliptic::{e, EllipticContext, EllipticError};
use crate::gs::{omega_pow, GsBasis, GsGen};
use crate::lie::RootSystem;
use crate::rat::{rat, rat_to_f64};

#[derive(Debug, Error)]
pub enum LaxError {
    #[error("phase point within {1:e} of a singular hyperplane ({0})")]
    Singular(String, f64),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// minimal allowed lattice distance of the kernel arguments
/// <u, beta> + tau f_beta/h + a/l
pub const HYPERPLANE_GUARD: f64 = 1e-4;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// <root, alpha_i^vee>
fn root_on_coroot(rs: &RootSystem, root: usize, i: usize) -> f64 {
    let mut s = rat(0, 1);
    for (j, &c) in rs.roots[root].iter().enumerate() {
        s += rat(c, 1) * rs.cartan[j][i];
    }
    rat_to_f64(s)
}

/// pairing <u, root> of a Cartan point given by coefficients over the
/// simple coroots
pub fn pair_u(rs: &RootSystem, u: &DVector<Complex64>, root: usize) -> Complex64 {
    let mut s = zero();
    for i in 0..rs.rank {
        s += u[i] * root_on_coroot(rs, root, i);
    }
    s
}

/// orthonormal basis of the invariant Cartan, built from the grade-0
/// Cartan generators by Gram-Schmidt under the invariant form
pub fn invariant_cartan_basis(gs: &GsBasis) -> Vec<DVector<Complex64>> {
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for (i, g) in gs.gens.iter().enumerate() {
        if let GsGen::H { c: 0, .. } = g {
            let mut v: DVector<Complex64> = gs.change.column(i).clone_owned();
            for b in &basis {
                let p = gs.killing(b, &v);
                v -= b * p;
            }
            let n2 = gs.killing(&v, &v);
            assert!(n2.im.abs() < 1e-12 && n2.re > 1e-18);
            basis.push(v / Complex64::new(n2.re.sqrt(), 0.0));
        }
    }
    basis
}

/// Spin variables: one atom per GS generator on the orbit base point, plus
/// the grade-0 invariant-Cartan sector over an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinConfiguration {
    /// coefficient per GS generator; the slots of grade-0 Cartan
    /// generators are unused (that sector lives in `s_h0`)
    pub sigma: Vec<Complex64>,
    /// invariant-Cartan spins over the orthonormal basis
    pub s_h0: Vec<Complex64>,
    pub reduced: bool,
}

impl SpinConfiguration {
    pub fn zero(gs: &GsBasis) -> Self {
        let tilde = gs
            .gens
            .iter()
            .filter(|g| matches!(g, GsGen::H { c: 0, .. }))
            .count();
        SpinConfiguration {
            sigma: vec![zero(); gs.dim],
            s_h0: vec![zero(); tilde],
            reduced: false,
        }
    }

    /// spin of grade k at an arbitrary orbit point: the base atom
    /// propagated along the orbit, S^k at lam^s(base) picking up
    /// omega^{-ks} times the walk sign
    pub fn spin_at(&self, gs: &GsBasis, k: usize, root: usize) -> Complex64 {
        let (oid, pos) = gs.orbits.orbit_of[root];
        let orb = &gs.orbits.root_orbits[oid];
        let a = (gs.l - k % gs.l) % gs.l;
        let Some(gi) = gs
            .gens
            .iter()
            .position(|g| matches!(g, GsGen::T { orbit, a: ga } if *orbit == oid && *ga == a))
        else {
            return zero();
        };
        let mut sgn = 1i64;
        let mut r = orb.elems[0];
        for _ in 0..pos {
            sgn *= gs.lift.sign[r];
            r = gs.lift.perm[r];
        }
        self.sigma[gi] * omega_pow(gs.l, -((k * pos) as i64)) * sgn as f64
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng)) / 2f64.sqrt()
}

/// complex-Gaussian atoms on the orbit base points, deterministic per seed
pub fn random_spin(gs: &GsBasis, seed: u64) -> SpinConfiguration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma = Vec::with_capacity(gs.dim);
    let mut tilde = 0usize;
    for g in &gs.gens {
        if matches!(g, GsGen::H { c: 0, .. }) {
            sigma.push(zero());
            tilde += 1;
        } else {
            sigma.push(cgauss(&mut rng));
        }
    }
    let s_h0 = (0..tilde).map(|_| cgauss(&mut rng)).collect();
    SpinConfiguration {
        sigma,
        s_h0,
        reduced: false,
    }
}

/// zero out the grade-0 invariant-Cartan spins (moment constraint)
pub fn moment_reduce(spin: &SpinConfiguration) -> SpinConfiguration {
    SpinConfiguration {
        sigma: spin.sigma.clone(),
        s_h0: vec![zero(); spin.s_h0.len()],
        reduced: true,
    }
}

#[derive(Debug, Clone)]
pub struct PhasePoint {
    /// position in the invariant Cartan, coefficients over the simple coroots
    pub u: DVector<Complex64>,
    /// momenta over the orthonormal invariant-Cartan basis
    pub v: Vec<Complex64>,
    pub spin: SpinConfiguration,
}

#[derive(Debug, Clone)]
enum GenInfo {
    Root {
        base: usize,
        a: usize,
        /// <kappa, beta> = f_beta / h
        kb: f64,
        /// <-u, beta>
        x_beta: Complex64,
        tilde: bool,
    },
    Cartan {
        c: usize,
    },
    /// grade-0 Cartan, handled through the orthonormal sector
    Zero,
}

fn gen_info(gs: &GsBasis, u: &DVector<Complex64>) -> Vec<GenInfo> {
    let h = gs.rs.coxeter as f64;
    gs.gens
        .iter()
        .map(|g| match *g {
            GsGen::T { orbit, a } => {
                let base = gs.orbits.root_orbits[orbit].elems[0];
                GenInfo::Root {
                    base,
                    a,
                    kb: gs.rs.height(base) as f64 / h,
                    x_beta: -pair_u(&gs.rs, u, base),
                    tilde: gs.orbits.in_r1[base],
                }
            }
            GsGen::H { c: 0, .. } => GenInfo::Zero,
            GsGen::H { c, .. } => GenInfo::Cartan { c },
        })
        .collect()
}

fn singular_guard(gs: &GsBasis, ell: &EllipticContext, info: &[GenInfo]) -> Result<(), LaxError> {
    let l = gs.l as f64;
    for gi in info {
        if let GenInfo::Root { base, a, kb, x_beta, .. } = gi {
            let w = x_beta + kb * ell.tau + Complex64::new(*a as f64 / l, 0.0);
            let d = ell.lattice_distance(w);
            if d < HYPERPLANE_GUARD {
                return Err(LaxError::Singular(
                    format!("root {} grade index {}", base, a),
                    d,
                ));
            }
        }
    }
    Ok(())
}

/// generic phase point: position in the invariant Cartan away from the
/// singular hyperplanes, Gaussian momenta and spins
pub fn random_phase(
    gs: &GsBasis,
    ell: &EllipticContext,
    seed: u64,
) -> Result<PhasePoint, LaxError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e_basis = invariant_cartan_basis(gs);
    let n = gs.rs.rank;
    let mut u = DVector::zeros(n);
    let mut last = Err(LaxError::Singular("no invariant directions".into(), 0.0));
    for _ in 0..64 {
        let mut cand: DVector<Complex64> = DVector::zeros(n);
        for b in &e_basis {
            let x = rng.gen_range(-0.45..0.45);
            for i in 0..n {
                cand[i] += b[i] * Complex64::new(x, 0.0);
            }
        }
        let info = gen_info(gs, &cand);
        match singular_guard(gs, ell, &info) {
            Ok(()) => {
                u = cand;
                last = Ok(());
                break;
            }
            Err(err) => last = Err(err),
        }
    }
    last?;
    let v = e_basis
        .iter()
        .map(|_| Complex64::new(gauss(&mut rng), 0.0))
        .collect();
    let spin = random_spin(gs, seed ^ 0x5bd1_e995);
    Ok(PhasePoint { u, v, spin })
}

pub struct LaxOperator<'a> {
    pub gs: &'a GsBasis,
    pub ell: &'a EllipticContext,
    pub u: DVector<Complex64>,
    pub v: Vec<Complex64>,
    pub spin: SpinConfiguration,
    pub e_basis: Vec<DVector<Complex64>>,
    info: Vec<GenInfo>,
}

pub fn build_lax<'a>(
    phase: &PhasePoint,
    gs: &'a GsBasis,
    ell: &'a EllipticContext,
) -> Result<LaxOperator<'a>, LaxError> {
    let info = gen_info(gs, &phase.u);
    singular_guard(gs, ell, &info)?;
    let e_basis = invariant_cartan_basis(gs);
    assert_eq!(phase.v.len(), e_basis.len());
    assert_eq!(phase.spin.s_h0.len(), e_basis.len());
    assert_eq!(phase.spin.sigma.len(), gs.dim);
    Ok(LaxOperator {
        gs,
        ell,
        u: phase.u.clone(),
        v: phase.v.clone(),
        spin: phase.spin.clone(),
        e_basis,
        info,
    })
}

impl LaxOperator<'_> {
    fn kernel(&self, i: usize, z: Complex64) -> Result<Complex64, LaxError> {
        let l = self.gs.l as f64;
        match self.info[i] {
            GenInfo::Root { kb, x_beta, a, .. } => {
                Ok(self.ell.phi_twisted(kb, x_beta, a as f64 / l, z)?)
            }
            GenInfo::Cartan { c } => {
                Ok(self.ell.phi(Complex64::new(c as f64 / l, 0.0), z)?)
            }
            GenInfo::Zero => unreachable!(),
        }
    }

    /// coefficient vector of L(z) over the gauged Chevalley basis
    pub fn eval(&self, z: Complex64) -> Result<DVector<Complex64>, LaxError> {
        let mut out: DVector<Complex64> = DVector::zeros(self.gs.dim);
        let e1 = if self.spin.reduced {
            zero()
        } else {
            self.ell.e1(z)?
        };
        for (j, b) in self.e_basis.iter().enumerate() {
            let coeff = self.v[j] + self.spin.s_h0[j] * e1;
            out += b * coeff;
        }
        for i in 0..self.gs.dim {
            if matches!(self.info[i], GenInfo::Zero) {
                continue;
            }
            let s = self.spin.sigma[i];
            if s.norm_sqr() == 0.0 {
                continue;
            }
            let f = self.kernel(i, z)?;
            out += self.gs.change.column(i) * (s * f);
        }
        Ok(out)
    }

    /// graded component L_a(z); the tilde sector counts as a = 0
    pub fn eval_component(&self, a_sel: usize, z: Complex64) -> Result<DVector<Complex64>, LaxError> {
        let mut out: DVector<Complex64> = DVector::zeros(self.gs.dim);
        if a_sel == 0 {
            let e1 = if self.spin.reduced {
                zero()
            } else {
                self.ell.e1(z)?
            };
            for (j, b) in self.e_basis.iter().enumerate() {
                out += b * (self.v[j] + self.spin.s_h0[j] * e1);
            }
        }
        for i in 0..self.gs.dim {
            let keep = match self.info[i] {
                GenInfo::Root { a, .. } => a == a_sel,
                GenInfo::Cartan { c } => c == a_sel,
                GenInfo::Zero => false,
            };
            if !keep || self.spin.sigma[i].norm_sqr() == 0.0 {
                continue;
            }
            let f = self.kernel(i, z)?;
            out += self.gs.change.column(i) * (self.spin.sigma[i] * f);
        }
        Ok(out)
    }

    /// conjugation matrix for z -> z + 1: diagonal e(f_alpha / h)
    pub fn ad_q(&self) -> DMatrix<Complex64> {
        let n = self.gs.rs.rank;
        let h = self.gs.rs.coxeter as f64;
        let mut m = DMatrix::zeros(self.gs.dim, self.gs.dim);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        for r in 0..self.gs.rs.num_roots() {
            m[(n + r, n + r)] = e(Complex64::new(self.gs.rs.height(r) as f64 / h, 0.0));
        }
        m
    }

    /// conjugation matrix for z -> z + tau: the lift composed with the
    /// translation diagonal e(<u, alpha>)
    pub fn ad_lambda(&self) -> DMatrix<Complex64> {
        let n = self.gs.rs.rank;
        let mut d = DMatrix::zeros(self.gs.dim, self.gs.dim);
        for i in 0..n {
            d[(i, i)] = Complex64::new(1.0, 0.0);
        }
        for r in 0..self.gs.rs.num_roots() {
            d[(n + r, n + r)] = e(pair_u(&self.gs.rs, &self.u, r));
        }
        self.gs.lambda_lift() * d
    }

    /// max over samples of the relative defects of
    /// L(z+1) = Ad_Q L(z) and L(z+tau) = Ad_Lambda L(z)
    pub fn quasiperiodicity_residual(
        &self,
        samples: usize,
        seed: u64,
    ) -> Result<(f64, f64), LaxError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let aq = self.ad_q();
        let al = self.ad_lambda();
        let (mut rq, mut rl) = (0.0f64, 0.0f64);
        let mut done = 0;
        while done < samples {
            let z = Complex64::new(rng.gen_range(0.08..0.92), 0.0)
                + self.ell.tau * rng.gen_range(0.08..0.92);
            if self.ell.lattice_distance(z) < 5e-2 {
                continue;
            }
            let l0 = self.eval(z)?;
            let scale = l0.norm().max(1e-30);
            let d1 = (self.eval(z + 1.0)? - &aq * &l0).norm() / scale;
            let dt = (self.eval(z + self.ell.tau)? - &al * &l0).norm() / scale;
            rq = rq.max(d1);
            rl = rl.max(dt);
            done += 1;
        }
        Ok((rq, rl))
    }

    /// contour average (1/2 pi i) oint L(z) dz over |z| = 1e-2, 64 nodes
    pub fn residue(&self) -> Result<DVector<Complex64>, LaxError> {
        let nodes = 64;
        let r = 1e-2;
        let mut out: DVector<Complex64> = DVector::zeros(self.gs.dim);
        for k in 0..nodes {
            let zk = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / nodes as f64);
            out += self.eval(zk)? * zk;
        }
        Ok(out / Complex64::new(nodes as f64, 0.0))
    }

    /// the element S the residue must reproduce
    pub fn constructed_residue(&self) -> DVector<Complex64> {
        let mut out: DVector<Complex64> = DVector::zeros(self.gs.dim);
        for (j, b) in self.e_basis.iter().enumerate() {
            out += b * self.spin.s_h0[j];
        }
        for i in 0..self.gs.dim {
            if matches!(self.info[i], GenInfo::Zero) {
                continue;
            }
            out += self.gs.change.column(i) * self.spin.sigma[i];
        }
        out
    }

    /// Cartan spin component along the grade-0 coroot of a root,
    /// antisymmetric under root negation
    pub fn cartan_spin(&self, root: usize) -> Complex64 {
        let mut c0: DVector<Complex64> = DVector::zeros(self.gs.dim);
        for (j, b) in self.e_basis.iter().enumerate() {
            c0 += b * self.spin.s_h0[j];
        }
        self.gs.killing(&c0, &self.gs.hbar_root_vec(0, root))
    }

    /// least-squares fit of (1/2)(L(z), L(z)) to c0 + c1 E2(z);
    /// returns (c0, c1, max fit residual)
    pub fn invariant_scan(
        &self,
        samples: usize,
        seed: u64,
    ) -> Result<(Complex64, Complex64, f64), LaxError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut zs = Vec::new();
        while zs.len() < samples {
            let z = Complex64::new(rng.gen_range(0.08..0.92), 0.0)
                + self.ell.tau * rng.gen_range(0.08..0.92);
            if self.ell.lattice_distance(z) < 5e-2 {
                continue;
            }
            zs.push(z);
        }
        let mut q = Vec::with_capacity(zs.len());
        let mut e2 = Vec::with_capacity(zs.len());
        for &z in &zs {
            let l = self.eval(z)?;
            q.push(self.gs.killing(&l, &l) * 0.5);
            e2.push(self.ell.e2(z)?);
        }
        // normal equations for the 2-column design [1, E2(z)]
        let (mut a00, mut a01, mut a11) = (zero(), zero(), zero());
        let (mut b0, mut b1) = (zero(), zero());
        for k in 0..zs.len() {
            a00 += Complex64::new(1.0, 0.0);
            a01 += e2[k];
            a11 += e2[k].conj() * e2[k];
            b0 += q[k];
            b1 += e2[k].conj() * q[k];
        }
        let a10 = a01.conj();
        let det = a00 * a11 - a01 * a10;
        let c0 = (b0 * a11 - a01 * b1) / det;
        let c1 = (a00 * b1 - a10 * b0) / det;
        let mut defect = 0.0f64;
        for k in 0..zs.len() {
            defect = defect.max((q[k] - c0 - c1 * e2[k]).norm());
        }
        Ok((c0, c1, defect))
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonians {
    pub h0: Complex64,
    pub hprime: Complex64,
    /// H_a for a = 1..=floor(l/2)
    pub hk: Vec<Complex64>,
    pub total: Complex64,
}

/// closed-form Hamiltonians from the constant part of (1/2)(L(z), L(z)):
/// each dual pair of generators contributes -(1/2) s_i s_j (B_i, B_j) E2(w)
/// with w the kernel argument, split into the tilde, grade-0 complement and
/// graded sectors
pub fn hamiltonians(
    phase: &PhasePoint,
    gs: &GsBasis,
    ell: &EllipticContext,
) -> Result<Hamiltonians, LaxError> {
    let lax = build_lax(phase, gs, ell)?;
    let l = gs.l;
    let m = l / 2;
    let mut h0 = zero();
    let mut hprime = zero();
    let mut hk = vec![zero(); m + 1];
    for vj in &phase.v {
        h0 += 0.5 * vj * vj;
    }
    let cols: Vec<DVector<Complex64>> = (0..gs.dim)
        .map(|i| gs.change.column(i).clone_owned())
        .collect();
    for i in 0..gs.dim {
        if matches!(lax.info[i], GenInfo::Zero) {
            continue;
        }
        let si = phase.spin.sigma[i];
        if si.norm_sqr() == 0.0 {
            continue;
        }
        for j in 0..gs.dim {
            if matches!(lax.info[j], GenInfo::Zero) {
                continue;
            }
            let sj = phase.spin.sigma[j];
            if sj.norm_sqr() == 0.0 {
                continue;
            }
            let g = gs.killing(&cols[i], &cols[j]);
            if g.norm() < 1e-12 {
                continue;
            }
            let (w, sector) = match lax.info[i] {
                GenInfo::Root { kb, x_beta, a, tilde, .. } => {
                    let w = x_beta + kb * ell.tau + Complex64::new(a as f64 / l as f64, 0.0);
                    let sector = if a == 0 {
                        if tilde {
                            0
                        } else {
                            1
                        }
                    } else {
                        1 + a.min(l - a)
                    };
                    (w, sector)
                }
                GenInfo::Cartan { c } => (
                    Complex64::new(c as f64 / l as f64, 0.0),
                    1 + c.min(l - c),
                ),
                GenInfo::Zero => unreachable!(),
            };
            let term = -0.5 * si * sj * g * ell.e2(w)?;
            match sector {
                0 => h0 += term,
                1 => hprime += term,
                s => hk[s - 1] += term,
            }
        }
    }
    let total = h0 + hprime + hk[1..].iter().sum::<Complex64>();
    Ok(Hamiltonians {
        h0,
        hprime,
        hk: hk[1..].to_vec(),
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gs::identity_lambda;
    use crate::lie::RootSystem;

    fn ctx() -> EllipticContext {
        EllipticContext::new(Complex64::new(0.3, 1.5)).unwrap()
    }

    fn basis(label: &str, node: usize) -> GsBasis {
        GsBasis::new(RootSystem::from_label(label).unwrap(), node).unwrap()
    }

    fn reduced_phase(gs: &GsBasis, ell: &EllipticContext, seed: u64) -> PhasePoint {
        let mut p = random_phase(gs, ell, seed).unwrap();
        p.spin = moment_reduce(&p.spin);
        p
    }

    #[test]
    fn seeds_are_repeatable() {
        let gs = basis("A3", 2);
        let a = random_spin(&gs, 11);
        let b = random_spin(&gs, 11);
        let c = random_spin(&gs, 12);
        assert_eq!(a, b);
        assert!(a.sigma != c.sigma);
    }

    #[test]
    fn orbit_extension_rule() {
        let gs = basis("A3", 2);
        let spin = random_spin(&gs, 3);
        let l = gs.l;
        for orb in &gs.orbits.root_orbits {
            if orb.elems.len() < 2 {
                continue;
            }
            for a in orb.indices(l) {
                let k = (l - a) % l;
                let s0 = spin.spin_at(&gs, k, orb.elems[0]);
                let s1 = spin.spin_at(&gs, k, orb.elems[1]);
                let expect = s0 * omega_pow(l, -(k as i64));
                assert!((s1 - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cartan_spin_is_antisymmetric() {
        let gs = basis("B3", 1);
        let ell = ctx();
        let phase = random_phase(&gs, &ell, 5).unwrap();
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        for r in 0..gs.rs.num_roots() {
            let d = lax.cartan_spin(r) + lax.cartan_spin(gs.rs.neg(r));
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn contour_residue_recovers_spin() {
        for (label, node) in [("A3", 2), ("B3", 1), ("A2", 1)] {
            let gs = basis(label, node);
            let ell = ctx();
            let phase = random_phase(&gs, &ell, 7).unwrap();
            let lax = build_lax(&phase, &gs, &ell).unwrap();
            let res = lax.residue().unwrap();
            let s = lax.constructed_residue();
            let rel = (res - &s).norm() / s.norm();
            assert!(rel < 1e-6, "{label}: residue defect {rel:e}");
        }
    }

    #[test]
    fn zero_spin_residue_vanishes() {
        let gs = basis("A3", 2);
        let ell = ctx();
        let mut phase = random_phase(&gs, &ell, 9).unwrap();
        phase.spin = SpinConfiguration::zero(&gs);
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        assert!(lax.residue().unwrap().norm() < 1e-10);
    }

    #[test]
    fn quasiperiodicity_on_reduced_data() {
        for (label, node) in [("A1", 1), ("A2", 1), ("A3", 2), ("B3", 1)] {
            let gs = basis(label, node);
            let ell = ctx();
            let phase = reduced_phase(&gs, &ell, 13);
            let lax = build_lax(&phase, &gs, &ell).unwrap();
            let (rq, rl) = lax.quasiperiodicity_residual(8, 21).unwrap();
            assert!(rq < 1e-9 && rl < 1e-9, "{label}: {rq:e} {rl:e}");
        }
    }

    #[test]
    fn cartan_zero_mode_breaks_tau_period() {
        let rs = RootSystem::from_label("A2").unwrap();
        let lam = identity_lambda(&rs);
        let gs = GsBasis::with_lambda(rs, lam).unwrap();
        let ell = ctx();
        let phase = random_phase(&gs, &ell, 17).unwrap();
        assert!(phase.spin.s_h0.iter().any(|s| s.norm() > 1e-3));
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        let (rq, rl) = lax.quasiperiodicity_residual(8, 23).unwrap();
        assert!(rq < 1e-9, "z+1 stays periodic: {rq:e}");
        assert!(rl > 1e-4, "E1 term must break z+tau: {rl:e}");
        let red = reduced_phase(&gs, &ell, 17);
        let lax = build_lax(&red, &gs, &ell).unwrap();
        let (rq, rl) = lax.quasiperiodicity_residual(8, 23).unwrap();
        assert!(rq < 1e-9 && rl < 1e-9);
    }

    #[test]
    fn graded_components_are_orthogonal() {
        let gs = basis("A2", 1);
        let ell = ctx();
        let phase = reduced_phase(&gs, &ell, 19);
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        let z = Complex64::new(0.21, 0.34);
        let scale = lax.eval(z).unwrap().norm();
        for (a, b) in [(0, 1), (0, 2), (1, 1), (2, 2)] {
            let la = lax.eval_component(a, z).unwrap();
            let lb = lax.eval_component(b, z).unwrap();
            let p = gs.killing(&la, &lb).norm() / (scale * scale);
            assert!(p < 1e-10, "(L_{a}, L_{b}) = {p:e}");
        }
        let l1 = lax.eval_component(1, z).unwrap();
        let l2 = lax.eval_component(2, z).unwrap();
        assert!(gs.killing(&l1, &l2).norm() > 1e-6);
    }

    #[test]
    fn components_sum_to_lax() {
        let gs = basis("B3", 1);
        let ell = ctx();
        let phase = reduced_phase(&gs, &ell, 29);
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        let z = Complex64::new(0.17, 0.52);
        let mut sum: DVector<Complex64> = DVector::zeros(gs.dim);
        for a in 0..gs.l {
            sum += lax.eval_component(a, z).unwrap();
        }
        assert!((sum - lax.eval(z).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn scan_matches_closed_form() {
        for (label, node) in [("A2", 1), ("A3", 2), ("B3", 1)] {
            let gs = basis(label, node);
            let ell = ctx();
            let phase = reduced_phase(&gs, &ell, 31);
            let lax = build_lax(&phase, &gs, &ell).unwrap();
            let (c0, _c1, defect) = lax.invariant_scan(32, 37).unwrap();
            assert!(defect < 1e-8, "{label}: fit defect {defect:e}");
            let h = hamiltonians(&phase, &gs, &ell).unwrap();
            let rel = (c0 - h.total).norm() / h.total.norm();
            assert!(rel < 1e-8, "{label}: c0 defect {rel:e}");
        }
    }

    #[test]
    fn zero_spin_hamiltonian_is_kinetic() {
        let gs = basis("A3", 2);
        let ell = ctx();
        let mut phase = random_phase(&gs, &ell, 41).unwrap();
        phase.spin = moment_reduce(&SpinConfiguration::zero(&gs));
        let h = hamiltonians(&phase, &gs, &ell).unwrap();
        let kin: Complex64 = phase.v.iter().map(|v| 0.5 * v * v).sum();
        assert!((h.total - kin).norm() < 1e-12);
        assert!(h.hprime.norm() < 1e-14 && h.hk.iter().all(|x| x.norm() < 1e-14));
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        let (_, c1, _) = lax.invariant_scan(16, 43).unwrap();
        assert!(c1.norm() < 1e-10);
    }

    #[test]
    fn trivial_class_is_spin_calogero_moser() {
        let rs = RootSystem::from_label("A2").unwrap();
        let lam = identity_lambda(&rs);
        let gs = GsBasis::with_lambda(rs, lam).unwrap();
        let ell = ctx();
        let phase = random_phase(&gs, &ell, 47).unwrap();
        let lax = build_lax(&phase, &gs, &ell).unwrap();
        let h = gs.rs.coxeter as f64;
        for &z in &[
            Complex64::new(0.31, 0.22),
            Complex64::new(0.12, 0.71),
            Complex64::new(0.64, 0.18),
        ] {
            // direct spin Calogero-Moser assembly from the root data alone
            let mut direct: DVector<Complex64> = DVector::zeros(gs.dim);
            let e1 = ell.e1(z).unwrap();
            for (j, b) in lax.e_basis.iter().enumerate() {
                direct += b * (phase.v[j] + phase.spin.s_h0[j] * e1);
            }
            for r in 0..gs.rs.num_roots() {
                let (oid, _) = gs.orbits.orbit_of[r];
                let gi = gs
                    .gens
                    .iter()
                    .position(|g| matches!(g, GsGen::T { orbit, a: 0 } if *orbit == oid))
                    .unwrap();
                let kb = gs.rs.height(r) as f64 / h;
                let x = -pair_u(&gs.rs, &phase.u, r);
                let f = ell.phi_twisted(kb, x, 0.0, z).unwrap();
                direct[gs.rs.rank + r] += phase.spin.sigma[gi] * f;
            }
            let d = (direct - lax.eval(z).unwrap()).norm();
            assert!(d < 1e-12, "direct spin-CM mismatch {d:e}");
        }
        let ham = hamiltonians(&phase, &gs, &ell).unwrap();
        assert!(ham.hk.is_empty());
        assert!(ham.hprime.norm() < 1e-14);
    }

    #[test]
    fn rank_one_class_has_no_zero_modes() {
        let gs = basis("A1", 1);
        let ell = ctx();
        let phase = random_phase(&gs, &ell, 53).unwrap();
        assert!(phase.v.is_empty() && phase.spin.s_h0.is_empty());
        // single Cartan generator at index 1 pairs with itself
        let gi = gs
            .gens
            .iter()
            .position(|g| matches!(g, GsGen::H { c: 1, .. }))
            .unwrap();
        let mut spin = SpinConfiguration::zero(&gs);
        spin.sigma[gi] = Complex64::new(0.7, -0.3);
        spin.reduced = true;
        let phase = PhasePoint {
            u: phase.u.clone(),
            v: vec![],
            spin,
        };
        let h = hamiltonians(&phase, &gs, &ell).unwrap();
        let col = gs.change.column(gi).clone_owned();
        let g = gs.killing(&col, &col);
        let s = phase.spin.sigma[gi];
        let expect = -0.5 * s * s * g * ell.e2(Complex64::new(0.5, 0.0)).unwrap();
        assert!((h.hk[0] - expect).norm() < 1e-12);
        assert!(h.h0.norm() < 1e-14);
        assert_eq!(h.total, h.h0 + h.hprime + h.hk[0]);
    }

    #[test]
    fn singular_positions_are_rejected() {
        let gs = basis("A3", 2);
        let ell = ctx();
        let good = random_phase(&gs, &ell, 59).unwrap();
        // steer the position onto the hyperplane <u,beta> + tau f/h + a/l = 0
        // for the first tilde direction that sees some root
        let e_basis = invariant_cartan_basis(&gs);
        let b0 = &e_basis[0];
        let (mut root, mut pr) = (usize::MAX, zero());
        for r in 0..gs.rs.num_roots() {
            let n = gs.rs.rank;
            let p = pair_u(&gs.rs, &b0.rows(0, n).clone_owned(), r);
            if p.norm() > 1e-6 {
                root = r;
                pr = p;
                break;
            }
        }
        assert!(root != usize::MAX);
        let kb = gs.rs.height(root) as f64 / gs.rs.coxeter as f64;
        let x = (kb * ell.tau) / pr;
        let n = gs.rs.rank;
        let mut u: DVector<Complex64> = DVector::zeros(n);
        for i in 0..n {
            u[i] = b0[i] * x;
        }
        let phase = PhasePoint {
            u,
            v: good.v.clone(),
            spin: good.spin.clone(),
        };
        assert!(matches!(
            build_lax(&phase, &gs, &ell),
            Err(LaxError::Singular(..))
        ));
    }

    #[test]
    fn moment_reduction_is_idempotent() {
        let gs = basis("A3", 2);
        let spin = random_spin(&gs, 61);
        let once = moment_reduce(&spin);
        let twice = moment_reduce(&once);
        assert_eq!(once, twice);
        assert!(once.s_h0.iter().all(|s| s.norm() == 0.0));
        assert_eq!(once.sigma, spin.sigma);
    }
}
