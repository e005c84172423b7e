//! Check records, report documents and the verification suites shared by the
//! command-line front end and the acceptance gate.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::charclass::{characteristic_class, conformal_degree, degree_table};
use crate::elliptic::{e, EllipticContext};
use crate::gs::{
    expected_invariant, identify_invariant_subalgebra, identity_lambda, omega_pow, GsBasis, GsGen,
};
use crate::lax::{
    build_lax, hamiltonians, moment_reduce, pair_u, random_phase, PhasePoint,
};
use crate::lie::StructureConstants;
use crate::lie::{center_data, enumerate_weyl, Family, RootSystem};
use crate::rat::{rat_to_f64, rmat_inverse, rmat_vec, rvec_sub, Rat};
use crate::rmatrix::{cybe_residual, rll_residual, RllOptions};
use crate::transition::{compute_kappa, find_lambda, invariant_cartan};

pub const TAU_DEFAULT: (f64, f64) = (0.3, 1.5);

/// Algebras covered by the exact root-data checks.
pub const ROOT_ALGEBRAS: &[&str] = &[
    "A1", "A2", "A3", "A4", "A5", "B2", "B3", "B4", "C2", "C3", "C4", "D4", "D5", "E6", "E7",
];
/// Rank <= 4 plus E6: full Jacobi sweep stays cheap there.
pub const JACOBI_ALGEBRAS: &[&str] = &[
    "A1", "A2", "A3", "A4", "B2", "B3", "B4", "C2", "C3", "C4", "D4", "E6",
];
/// (algebra, class node) cases for the graded-basis checks.
pub const GS_CASES: &[(&str, usize)] =
    &[("A3", 2), ("A5", 3), ("A5", 2), ("B3", 1), ("C3", 3), ("D5", 1)];
/// Cases for the Lax and Hamiltonian checks.
pub const LAX_CASES: &[(&str, usize)] = &[("A1", 1), ("A2", 1), ("A3", 2), ("B3", 1)];
/// Cases for the r-matrix identities.
pub const RLL_CASES: &[(&str, usize)] = &[("A1", 1), ("A2", 1), ("A3", 2)];

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub gram: f64,
    pub elliptic: f64,
    pub lax_qp: f64,
    pub lax_residue: f64,
    pub ham: f64,
    pub rll: f64,
    pub cybe: f64,
    /// ablated negative controls must stay above this
    pub control_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gram: 1e-12,
            elliptic: 1e-10,
            lax_qp: 1e-9,
            lax_residue: 1e-6,
            ham: 1e-8,
            rll: 1e-8,
            cybe: 1e-8,
            control_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub algebra: Option<String>,
    pub class_node: Option<usize>,
    pub tau: [f64; 2],
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
}

impl Default for ConfigEcho {
    fn default() -> Self {
        ConfigEcho {
            algebra: None,
            class_node: None,
            tau: [TAU_DEFAULT.0, TAU_DEFAULT.1],
            seed: 1,
            samples: 20,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub wall_ms: f64,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn exact_record(name: impl Into<String>, ok: bool, t: Instant) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if ok { "pass" } else { "fail" }.into(),
        residual: None,
        tolerance: None,
        wall_ms: ms(t),
    }
}

pub fn residual_record(name: impl Into<String>, r: f64, tol: f64, t: Instant) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if r.is_finite() && r <= tol { "pass" } else { "fail" }.into(),
        residual: Some(r),
        tolerance: Some(tol),
        wall_ms: ms(t),
    }
}

/// Negative control: passes when the residual stays *above* the floor.
pub fn control_record(name: impl Into<String>, r: f64, floor: f64, t: Instant) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        status: if r.is_finite() && r > floor { "pass" } else { "fail" }.into(),
        residual: Some(r),
        tolerance: Some(floor),
        wall_ms: ms(t),
    }
}

pub fn error_record(name: impl Into<String>, err: impl ToString, t: Instant) -> CheckRecord {
    CheckRecord {
        name: format!("{} [{}]", name.into(), err.to_string()),
        status: "fail".into(),
        residual: None,
        tolerance: None,
        wall_ms: ms(t),
    }
}

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub config: ConfigEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<serde_json::Value>,
    pub checks: Vec<CheckRecord>,
    pub summary: String,
}

impl ReportDocument {
    pub fn new(
        command: impl Into<String>,
        config: ConfigEcho,
        data: Option<serde_json::Value>,
        checks: Vec<CheckRecord>,
    ) -> Self {
        let ok = checks.iter().all(CheckRecord::passed);
        ReportDocument {
            command: command.into(),
            config,
            generated_at: None,
            data,
            checks,
            summary: if ok { "pass" } else { "fail" }.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.summary == "pass"
    }
}

pub fn rat_str(r: Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn expected_center_order(rs: &RootSystem) -> i64 {
    match rs.family {
        Family::A => rs.rank as i64 + 1,
        Family::B | Family::C => 2,
        Family::D => 4,
        Family::E6 => 3,
        Family::E7 => 2,
    }
}

// ---------------------------------------------------------------- criterion 1

pub fn root_data_suite() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for label in ROOT_ALGEBRAS {
        let t = Instant::now();
        let rs = RootSystem::from_label(label).unwrap();
        let from_degrees: i64 = rs.degrees.iter().map(|d| 2 * (d - 1)).sum();
        let ok = rs.num_roots() as i64 == from_degrees
            && rs.cartan_det == expected_center_order(&rs);
        out.push(exact_record(format!("root data {label}"), ok, t));
    }
    out
}

// ---------------------------------------------------------------- criterion 2

enum PairBracket {
    Zero,
    /// H in simple-coroot coordinates
    Cartan(Vec<Rat>),
    Root(usize, Rat),
}

fn pair_bracket_table(rs: &RootSystem, sc: &StructureConstants) -> Vec<PairBracket> {
    let total = rs.num_roots();
    let mut tab = Vec::with_capacity(total * total);
    for y in 0..total {
        for z in 0..total {
            if rs.neg(y) == z {
                let coords = rs
                    .coroot_coords(y)
                    .iter()
                    .map(|&c| Rat::from_integer(c))
                    .collect();
                tab.push(PairBracket::Cartan(coords));
                continue;
            }
            let c = sc.c(y, z);
            if c.is_zero() {
                tab.push(PairBracket::Zero);
                continue;
            }
            let sum: Vec<i64> = (0..rs.rank).map(|t| rs.roots[y][t] + rs.roots[z][t]).collect();
            tab.push(PairBracket::Root(rs.root_index(&sum).unwrap(), c));
        }
    }
    tab
}

/// <alpha_x, H> for H over the simple coroots, exact.
fn root_on_cartan(rs: &RootSystem, x: usize, h: &[Rat]) -> Rat {
    let mut s = Rat::zero();
    for seg in 0..rs.rank {
        if rs.roots[x][seg] == 0 {
            continue;
        }
        for t in 0..rs.rank {
            s += Rat::from_integer(rs.roots[x][seg] * rs.cartan[seg][t]) * h[t];
        }
    }
    s
}

/// Jacobi identity over all root triples, exact in rationals.
pub fn jacobi_holds(rs: &RootSystem) -> bool {
    let sc = StructureConstants::new(rs);
    let tab = pair_bracket_table(rs, &sc);
    let total = rs.num_roots();
    let mut root_part: Vec<(usize, Rat)> = Vec::with_capacity(3);
    for i in 0..total {
        for j in 0..total {
            for k in 0..total {
                root_part.clear();
                let mut cartan_part: Option<Vec<Rat>> = None;
                for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                    match &tab[y * total + z] {
                        PairBracket::Zero => {}
                        PairBracket::Cartan(h) => {
                            // [E_x, H] = -<alpha_x, H> E_x
                            root_part.push((x, -root_on_cartan(rs, x, h)));
                        }
                        PairBracket::Root(w, cyz) => {
                            if rs.neg(x) == *w {
                                let coords = rs.coroot_coords(x);
                                let part =
                                    cartan_part.get_or_insert_with(|| vec![Rat::zero(); rs.rank]);
                                for t in 0..rs.rank {
                                    part[t] += *cyz * Rat::from_integer(coords[t]);
                                }
                            } else {
                                let cxw = sc.c(x, *w);
                                if !cxw.is_zero() {
                                    let sum: Vec<i64> = (0..rs.rank)
                                        .map(|t| rs.roots[x][t] + rs.roots[*w][t])
                                        .collect();
                                    root_part
                                        .push((rs.root_index(&sum).unwrap(), *cyz * cxw));
                                }
                            }
                        }
                    }
                }
                for (idx, _) in &root_part {
                    let s: Rat = root_part
                        .iter()
                        .filter(|(i2, _)| i2 == idx)
                        .map(|(_, v)| *v)
                        .sum();
                    if !s.is_zero() {
                        return false;
                    }
                }
                if let Some(part) = cartan_part {
                    if part.iter().any(|v| !v.is_zero()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn jacobi_suite() -> Vec<CheckRecord> {
    JACOBI_ALGEBRAS
        .iter()
        .map(|label| {
            let t = Instant::now();
            let rs = RootSystem::from_label(label).unwrap();
            exact_record(format!("jacobi {label}"), jacobi_holds(&rs), t)
        })
        .collect()
}

// ---------------------------------------------------------------- criterion 3

pub fn transition_suite() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for label in ROOT_ALGEBRAS {
        let rs = RootSystem::from_label(label).unwrap();
        let kappa = compute_kappa(&rs);
        let center = center_data(&rs);
        let weyl = if rs.rank <= 3 {
            enumerate_weyl(&rs, 1 << 12)
        } else {
            None
        };
        for node in rs.minuscule_nodes() {
            let t = Instant::now();
            let lam = match find_lambda(&rs, node) {
                Ok(l) => l,
                Err(err) => {
                    out.push(error_record(format!("transition {label} node {node}"), err, t));
                    continue;
                }
            };
            let target = rvec_sub(&kappa, &rs.coweights[node - 1]);
            let mut ok = lam.apply(&kappa) == target;
            // <kappa, lambda*(alpha_k)> = <kappa, alpha_k> - delta_{jk}, with
            // lambda* the induced (inverse) action on roots
            let lam_inv = rmat_inverse(&lam.matrix).unwrap();
            for k in 0..rs.rank {
                let mut unit = vec![Rat::zero(); rs.rank];
                unit[k] = Rat::one();
                let mut want = rs.pair(&kappa, &unit);
                if k + 1 == node {
                    want -= Rat::one();
                }
                ok &= rs.pair(&kappa, &rmat_vec(&lam_inv, &unit)) == want;
            }
            ok &= center
                .order_of_node
                .iter()
                .any(|&(n, l)| n == node && l == lam.order as i64);
            out.push(exact_record(format!("transition {label} node {node}"), ok, t));

            if let Some(weyl) = &weyl {
                let t = Instant::now();
                let matches: Vec<_> = weyl
                    .iter()
                    .filter(|w| w.apply(&kappa) == target)
                    .collect();
                let ok = matches.len() == 1 && matches[0].matrix == lam.matrix;
                out.push(exact_record(
                    format!("transition {label} node {node} brute-force Weyl"),
                    ok,
                    t,
                ));
            }
        }
    }
    out
}

// ------------------------------------------------------------ criteria 4 & 5

/// Extended-node coroots (affine node first) over the simple coroots.
fn ext_coroots(rs: &RootSystem) -> Vec<Vec<Rat>> {
    let mut out = Vec::with_capacity(rs.rank + 1);
    out.push(
        rs.coroot_coords(rs.highest_root())
            .iter()
            .map(|&c| Rat::from_integer(-c))
            .collect(),
    );
    for j in 0..rs.rank {
        let mut e = vec![Rat::zero(); rs.rank];
        e[j] = Rat::one();
        out.push(e);
    }
    out
}

/// Closed-form prediction for one Gram entry of the graded basis.
fn gram_pred(g: &GsBasis, ext: &[Vec<Rat>], gi: &GsGen, gj: &GsGen) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    match (gi, gj) {
        (GsGen::T { orbit: o1, a: a1 }, GsGen::T { orbit: o2, a: a2 }) => {
            if (a1 + a2) % g.l != 0 {
                return zero;
            }
            let base1 = g.orbits.root_orbits[*o1].elems[0];
            let base2 = g.orbits.root_orbits[*o2].elems[0];
            let neg1 = g.rs.neg(base1);
            let sq = rat_to_f64(g.rs.root_sq(base1));
            let mut acc = zero;
            let mut r = base2;
            let mut sg = 1i64;
            for s in 0..g.l {
                if r == neg1 {
                    acc += omega_pow(g.l, (s * a2) as i64) * (sg as f64 * 2.0 / sq);
                }
                sg *= g.lift.sign[r];
                r = g.lift.perm[r];
            }
            acc
        }
        (GsGen::H { orbit: o1, c: c1 }, GsGen::H { orbit: o2, c: c2 }) => {
            if (c1 + c2) % g.l != 0 {
                return zero;
            }
            let orb1 = &g.orbits.ext_orbits[*o1];
            let hb = &ext[g.orbits.ext_orbits[*o2].elems[0]];
            let mut acc = zero;
            let mut node = orb1.elems[0];
            for s in 0..orb1.elems.len() {
                acc += omega_pow(g.l, (s * c1) as i64)
                    * rat_to_f64(g.cartan_form(&ext[node], hb));
                node = g.lam.ext_perm[node];
            }
            acc * orb1.p as f64
        }
        _ => zero,
    }
}

fn e2pi(x: f64) -> Complex64 {
    e(Complex64::new(x, 0.0))
}

pub fn gs_suite(label: &str, node: usize, tol: f64, seed: u64) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let t = Instant::now();
    let rs = RootSystem::from_label(label).unwrap();
    let g = match GsBasis::new(rs, node) {
        Ok(g) => g,
        Err(err) => {
            out.push(error_record(format!("gs {label} node {node}"), err, t));
            return out;
        }
    };
    let ext = ext_coroots(&g.rs);

    // Gram matrix against the closed forms
    let k = g.killing_matrix();
    let gram = g.change.transpose() * &k * &g.change;
    let mut worst = 0.0f64;
    for i in 0..g.dim {
        for j in 0..g.dim {
            let want = gram_pred(&g, &ext, &g.gens[i], &g.gens[j]);
            worst = worst.max((gram[(i, j)] - want).norm());
        }
    }
    out.push(residual_record(format!("gs {label} node {node} gram"), worst, tol, t));

    // eigenvectors of the adjoint transition action
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inv = invariant_cartan(&g.rs, &g.lam).unwrap();
    let mut u = vec![0.0f64; g.rs.rank];
    for b in &inv.kernel {
        let c = rng.gen_range(-1.0..1.0);
        for (i, v) in b.iter().enumerate() {
            u[i] += c * rat_to_f64(*v);
        }
    }
    let pair_u_root = |root: usize| -> f64 {
        let rv = g.rs.root_vec(root);
        let mut s = 0.0;
        for i in 0..g.rs.rank {
            for j in 0..g.rs.rank {
                s += u[i] * rat_to_f64(g.rs.form[i][j] * rv[j]);
            }
        }
        s
    };
    let kappa = compute_kappa(&g.rs);
    let mut ad_u: DMatrix<Complex64> = DMatrix::identity(g.dim, g.dim);
    let mut ad_q: DMatrix<Complex64> = DMatrix::identity(g.dim, g.dim);
    for r in 0..g.n_roots() {
        ad_u[(g.rs.rank + r, g.rs.rank + r)] = e2pi(pair_u_root(r));
        ad_q[(g.rs.rank + r, g.rs.rank + r)] =
            e2pi(rat_to_f64(g.rs.pair(&kappa, &g.rs.root_vec(r))));
    }
    let ad_lam = g.lambda_lift() * &ad_u;
    let h = g.rs.coxeter as f64;
    let mut worst = 0.0f64;
    for (i, gen) in g.gens.iter().enumerate() {
        let col = g.change.column(i).into_owned();
        match gen {
            GsGen::T { orbit, a } => {
                let base = g.orbits.root_orbits[*orbit].elems[0];
                let ev = e2pi(pair_u_root(base) - *a as f64 / g.l as f64);
                worst = worst.max((&ad_lam * &col - &col * ev).norm());
                let ev_q = e2pi(g.rs.height(base) as f64 / h);
                worst = worst.max((&ad_q * &col - &col * ev_q).norm());
            }
            GsGen::H { c, .. } => {
                let ev = e2pi(-(*c as f64) / g.l as f64);
                worst = worst.max((&ad_lam * &col - &col * ev).norm());
                worst = worst.max((&ad_q * &col - &col).norm());
            }
        }
    }
    out.push(residual_record(format!("gs {label} node {node} eigen"), worst, tol, t));

    // brackets respect the grading
    let t = Instant::now();
    let cols: Vec<DVector<Complex64>> =
        (0..g.dim).map(|i| g.change.column(i).clone_owned()).collect();
    let mut worst = 0.0f64;
    for i in 0..g.dim {
        for j in 0..g.dim {
            let w = g.bracket(&cols[i], &cols[j]);
            let coords = &g.change_inv * w;
            let target = (g.grades[i] + g.grades[j]) % g.l;
            for s in 0..g.dim {
                if g.grades[s] != target {
                    worst = worst.max(coords[s].norm());
                }
            }
        }
    }
    out.push(residual_record(format!("gs {label} node {node} grading"), worst, tol, t));
    out
}

/// Expected invariant decomposition for the six standard cases:
/// (simple part, dim tilde, dim complement, dim grade zero).
const TABLE4: &[(&str, usize, &str, usize, usize, usize)] = &[
    ("A3", 2, "A1", 3, 4, 7),
    ("A5", 3, "A2", 8, 9, 17),
    ("A5", 2, "A1", 3, 8, 11),
    ("B3", 1, "B2", 10, 5, 15),
    ("C3", 3, "A1", 3, 6, 9),
    ("D5", 1, "B3", 21, 8, 29),
];

pub fn table4_suite() -> Vec<CheckRecord> {
    let mut out = Vec::new();
    for &(label, node, tilde, dt, dv, d0) in TABLE4 {
        let t = Instant::now();
        let rs = RootSystem::from_label(label).unwrap();
        let g = GsBasis::new(rs, node).unwrap();
        let name = format!("invariant subalgebra {label} node {node}");
        match identify_invariant_subalgebra(&g) {
            Ok(sub) => {
                let mut ok = sub.tilde_type.join("+") == tilde
                    && sub.dim_tilde == dt
                    && sub.dim_v == dv
                    && sub.dim_g0 == d0;
                if let Some((want_label, want_d0)) =
                    expected_invariant(&g.rs, node, g.l)
                {
                    ok &= sub.tilde_type.join("+") == want_label && sub.dim_g0 == want_d0;
                }
                out.push(exact_record(name, ok, t));
            }
            Err(err) => out.push(error_record(name, err, t)),
        }
    }
    out
}

// ---------------------------------------------------------------- criterion 6

pub fn elliptic_suite(seed: u64, points: usize, tol: f64) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let taus: Vec<Complex64> = (0..8)
        .map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.0)))
        .collect();
    let per_tau = points.div_ceil(taus.len());
    let (mut fay1, mut fay2, mut qp, mut wp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let t = Instant::now();
    for tau in &taus {
        let ec = EllipticContext::new(*tau).unwrap();
        let mut done = 0;
        while done < per_tau {
            let mut p = || {
                Complex64::new(rng.gen_range(-0.45..0.45), 0.0)
                    + tau * rng.gen_range(-0.45..0.45)
            };
            let (u1, u2, z1, z2) = (p(), p(), p(), p());
            if [u1, u2, z1, z2, u1 + u2, z1 - z2]
                .iter()
                .any(|w| ec.lattice_distance(*w) < 3e-2)
            {
                continue;
            }
            done += 1;
            let (f1, f2) = ec.fay_residuals(u1, u2, z1, z2).unwrap();
            fay1 = fay1.max(f1);
            fay2 = fay2.max(f2);

            let (u, z) = (u1, z1);
            let scale = |c: Complex64| c.norm().max(1.0);
            let th = ec.theta(z);
            qp = qp.max((ec.theta(z + 1.0) + th).norm() / scale(th));
            let q_half = (Complex64::new(0.0, std::f64::consts::PI) * tau).exp();
            let rhs = -th / q_half * e(-z);
            qp = qp.max((ec.theta(z + tau) - rhs).norm() / scale(rhs));
            let ph = ec.phi(u, z).unwrap();
            qp = qp.max((ec.phi(u, z + 1.0).unwrap() - ph).norm() / scale(ph));
            let rhs = e(-u) * ph;
            qp = qp.max((ec.phi(u, z + tau).unwrap() - rhs).norm() / scale(rhs));
            let e1 = ec.e1(z).unwrap();
            qp = qp.max((ec.e1(z + 1.0).unwrap() - e1).norm() / scale(e1));
            let rhs = e1 - Complex64::new(0.0, 2.0 * std::f64::consts::PI);
            qp = qp.max((ec.e1(z + tau).unwrap() - rhs).norm() / scale(rhs));
            let e2v = ec.e2(z).unwrap();
            qp = qp.max((ec.e2(z + 1.0).unwrap() - e2v).norm() / scale(e2v));
            qp = qp.max((ec.e2(z + tau).unwrap() - e2v).norm() / scale(e2v));

            let lhs = ph * ec.phi(-u, z).unwrap();
            let rhs = e2v - ec.e2(u).unwrap();
            wp = wp.max((lhs - rhs).norm() / scale(rhs));
        }
    }
    vec![
        residual_record("fay trilinear identity", fay1, tol, t),
        residual_record("fay derivative identity", fay2, tol, t),
        residual_record("kernel quasi-periodicity", qp, tol, t),
        residual_record("wpphi identity", wp, tol, t),
    ]
}

// ---------------------------------------------------------------- criterion 7

fn reduced_phase(
    gs: &GsBasis,
    ell: &EllipticContext,
    seed: u64,
) -> Result<PhasePoint, crate::lax::LaxError> {
    let mut p = random_phase(gs, ell, seed)?;
    p.spin = moment_reduce(&p.spin);
    Ok(p)
}

pub fn lax_case(
    label: &str,
    node: usize,
    tau: Complex64,
    seed: u64,
    draws: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let t = Instant::now();
    let base = format!("lax {label} node {node}");
    let ell = match EllipticContext::new(tau) {
        Ok(e) => e,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let rs = match RootSystem::from_label(label) {
        Ok(r) => r,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let gs = match GsBasis::new(rs, node) {
        Ok(g) => g,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let (mut qp, mut res_rel) = (0.0f64, 0.0f64);
    let mut failed = None;
    for d in 0..draws {
        let phase = match reduced_phase(&gs, &ell, seed.wrapping_add(d as u64)) {
            Ok(p) => p,
            Err(e) => {
                failed = Some(e);
                break;
            }
        };
        let lax = match build_lax(&phase, &gs, &ell) {
            Ok(l) => l,
            Err(e) => {
                failed = Some(e);
                break;
            }
        };
        match lax.quasiperiodicity_residual(6, seed ^ 0x51ed_2705 ^ d as u64) {
            Ok((rq, rl)) => qp = qp.max(rq).max(rl),
            Err(e) => {
                failed = Some(e);
                break;
            }
        }
        match lax.residue() {
            Ok(res) => {
                let want = lax.constructed_residue();
                res_rel = res_rel.max((res - &want).norm() / want.norm().max(1e-30));
            }
            Err(e) => {
                failed = Some(e);
                break;
            }
        }
    }
    if let Some(e) = failed {
        out.push(error_record(base, e, t));
        return out;
    }
    out.push(residual_record(format!("{base} quasi-periodicity"), qp, tols.lax_qp, t));
    out.push(residual_record(format!("{base} residue"), res_rel, tols.lax_residue, t));
    out
}

pub fn lax_suite(
    tau: Complex64,
    seed: u64,
    draws: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    LAX_CASES
        .iter()
        .flat_map(|&(label, node)| lax_case(label, node, tau, seed, draws, tols))
        .collect()
}

// ---------------------------------------------------------------- criterion 8

pub fn hamiltonian_case(
    label: &str,
    node: usize,
    tau: Complex64,
    seed: u64,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let t = Instant::now();
    let base = format!("hamiltonian {label} node {node}");
    let ell = match EllipticContext::new(tau) {
        Ok(e) => e,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let rs = match RootSystem::from_label(label) {
        Ok(r) => r,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let gs = match GsBasis::new(rs, node) {
        Ok(g) => g,
        Err(e) => return vec![error_record(base, e, t)],
    };
    let run = || -> Result<(f64, f64), crate::lax::LaxError> {
        let phase = reduced_phase(&gs, &ell, seed)?;
        let lax = build_lax(&phase, &gs, &ell)?;
        let (c0, _c1, defect) = lax.invariant_scan(32, seed ^ 0x9e37_79b9)?;
        let h = hamiltonians(&phase, &gs, &ell)?;
        Ok((defect, (c0 - h.total).norm() / h.total.norm().max(1e-30)))
    };
    match run() {
        Ok((defect, rel)) => {
            out.push(residual_record(format!("{base} E2 fit"), defect, tols.ham, t));
            out.push(residual_record(format!("{base} closed form"), rel, tols.ham, t));
        }
        Err(e) => out.push(error_record(base, e, t)),
    }
    out
}

pub fn hamiltonian_suite(tau: Complex64, seed: u64, tols: &Tolerances) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let ell = EllipticContext::new(tau).unwrap();
    for &(label, node) in LAX_CASES {
        out.extend(hamiltonian_case(label, node, tau, seed, tols));
    }

    // trivial class: the constant part is the elliptic spin Calogero-Moser
    // Hamiltonian, assembled here directly from the root data
    let t = Instant::now();
    let name = "hamiltonian A2 trivial class spin-CM";
    let run = || -> Result<f64, crate::lax::LaxError> {
        let rs = RootSystem::from_label("A2").unwrap();
        let lam = identity_lambda(&rs);
        let gs = GsBasis::with_lambda(rs, lam).unwrap();
        let phase = reduced_phase(&gs, &ell, seed ^ 0xada5)?;
        let ham = hamiltonians(&phase, &gs, &ell)?;
        let h = gs.rs.coxeter as f64;
        let mut direct: Complex64 = phase.v.iter().map(|v| 0.5 * v * v).sum();
        for r in 0..gs.rs.num_roots() {
            let (oid, _) = gs.orbits.orbit_of[r];
            let (noid, _) = gs.orbits.orbit_of[gs.rs.neg(r)];
            let find = |o: usize| {
                gs.gens
                    .iter()
                    .position(|g| matches!(g, GsGen::T { orbit, a: 0 } if *orbit == o))
                    .unwrap()
            };
            let sq = rat_to_f64(gs.rs.root_sq(r));
            let w = -pair_u(&gs.rs, &phase.u, r)
                + ell.tau * (gs.rs.height(r) as f64 / h);
            direct -= 0.5
                * phase.spin.sigma[find(oid)]
                * phase.spin.sigma[find(noid)]
                * (2.0 / sq)
                * ell.e2(w)?;
        }
        Ok((direct - ham.total).norm() / ham.total.norm().max(1e-30))
    };
    match run() {
        Ok(rel) => out.push(residual_record(name, rel, 1e-10, t)),
        Err(e) => out.push(error_record(name, e, t)),
    }
    out
}

// ---------------------------------------------------------------- criterion 9

pub fn rll_case(
    label: &str,
    node: usize,
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let t = Instant::now();
    let name = format!("rll {label} node {node}");
    let ell = match EllipticContext::new(tau) {
        Ok(e) => e,
        Err(e) => return vec![error_record(name, e, t)],
    };
    let rs = match RootSystem::from_label(label) {
        Ok(r) => r,
        Err(e) => return vec![error_record(name, e, t)],
    };
    let gs = match GsBasis::new(rs, node) {
        Ok(g) => g,
        Err(e) => return vec![error_record(name, e, t)],
    };
    // A1/A2 have no invariant Cartan; A3 runs unreduced so the anomalous
    // d1-phi term is exercised
    let opts = RllOptions {
        reduced: label != "A3",
        ..RllOptions::default()
    };
    match rll_residual(&gs, &ell, seed, samples, &opts) {
        Ok(r) => vec![residual_record(name, r, tols.rll, t)],
        Err(e) => vec![error_record(name, e, t)],
    }
}

pub fn rll_suite(
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let ell = EllipticContext::new(tau).unwrap();
    for &(label, node) in RLL_CASES {
        out.extend(rll_case(label, node, tau, seed, samples, tols));
    }
    let t = Instant::now();
    let rs = RootSystem::from_label("A3").unwrap();
    let gs = GsBasis::new(rs, 2).unwrap();
    let opts = RllOptions {
        ablate_anomaly: true,
        ..RllOptions::default()
    };
    match rll_residual(&gs, &ell, seed, 4, &opts) {
        Ok(r) => out.push(control_record(
            "rll A3 anomaly ablated (control)",
            r,
            tols.control_floor,
            t,
        )),
        Err(e) => out.push(error_record("rll A3 anomaly ablated (control)", e, t)),
    }
    out
}

pub fn cybe_case(
    label: &str,
    node: usize,
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let t = Instant::now();
    let name = format!("cybe {label} node {node}");
    let ell = match EllipticContext::new(tau) {
        Ok(e) => e,
        Err(e) => return vec![error_record(name, e, t)],
    };
    let rs = match RootSystem::from_label(label) {
        Ok(r) => r,
        Err(e) => return vec![error_record(name, e, t)],
    };
    let gs = match GsBasis::new(rs, node) {
        Ok(g) => g,
        Err(e) => return vec![error_record(name, e, t)],
    };
    match cybe_residual(&gs, &ell, seed, samples, false) {
        Ok(r) => vec![residual_record(name, r, tols.cybe, t)],
        Err(e) => vec![error_record(name, e, t)],
    }
}

pub fn cybe_suite(
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let ell = EllipticContext::new(tau).unwrap();
    for &(label, node) in RLL_CASES {
        out.extend(cybe_case(label, node, tau, seed, samples, tols));
    }
    let t = Instant::now();
    let rs = RootSystem::from_label("A3").unwrap();
    let gs = GsBasis::new(rs, 2).unwrap();
    match cybe_residual(&gs, &ell, seed, 3, true) {
        Ok(r) => out.push(control_record(
            "cybe A3 dynamical terms ablated (control)",
            r,
            tols.control_floor,
            t,
        )),
        Err(e) => out.push(error_record("cybe A3 dynamical terms ablated (control)", e, t)),
    }
    out
}

// --------------------------------------------------------------- criterion 10

pub fn degrees_suite() -> Vec<CheckRecord> {
    degree_table()
        .iter()
        .map(|row| {
            let t = Instant::now();
            let rs = RootSystem::from_label(row.algebra).unwrap();
            let name = format!("degree table {}", row.algebra);
            match conformal_degree(&rs, row.nu_node, row.coweight_node, 0) {
                Ok(rec) => exact_record(name, rec.normalized == row.expected, t),
                Err(e) => error_record(name, e, t),
            }
        })
        .collect()
}

// ------------------------------------------------------------------- plumbing

pub fn degrees_data() -> serde_json::Value {
    let rows: Vec<serde_json::Value> = degree_table()
        .iter()
        .map(|row| {
            let rs = RootSystem::from_label(row.algebra).unwrap();
            let rec = conformal_degree(&rs, row.nu_node, row.coweight_node, 0).unwrap();
            serde_json::json!({
                "group": rec.group,
                "algebra": rec.algebra,
                "nu_node": rec.nu_node,
                "coweight_node": rec.coweight_node,
                "dim_v": rec.dim_v,
                "pairing": rat_str(rec.pairing),
                "degree_k0": rec.degree,
                "residue_mod_dim": rec.residue,
                "normalized": rec.normalized,
            })
        })
        .collect();
    serde_json::json!(rows)
}

pub fn class_data(rs: &RootSystem, gamma: &[Rat]) -> Result<serde_json::Value, crate::charclass::CharError> {
    let c = characteristic_class(rs, gamma)?;
    Ok(serde_json::json!({
        "algebra": c.algebra,
        "gamma": c.gamma.iter().map(|r| rat_str(*r)).collect::<Vec<_>>(),
        "phases": c.phases.iter().map(|r| rat_str(*r)).collect::<Vec<_>>(),
        "order": c.order,
        "trivial": c.is_trivial(),
    }))
}

pub fn info_data(rs: &RootSystem) -> serde_json::Value {
    let center = center_data(rs);
    serde_json::json!({
        "algebra": rs.label(),
        "rank": rs.rank,
        "num_roots": rs.num_roots(),
        "dim": rs.dim(),
        "coxeter": rs.coxeter,
        "det_cartan": rs.cartan_det,
        "degrees": rs.degrees,
        "highest_root_coeffs": rs.highest_coeffs,
        "minuscule_nodes": rs.minuscule_nodes(),
        "center_order": center.order,
        "center_invariants": center.invariants,
        "center_generator_nodes": center.generators,
        "node_class_orders": center.order_of_node,
    })
}

/// Every module-level check restricted to one algebra (CLI `all <algebra>`).
pub fn all_for_algebra(
    label: &str,
    node: usize,
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out: Vec<CheckRecord> = Vec::new();
    let prefix = format!("{label} ");
    out.extend(
        root_data_suite()
            .into_iter()
            .chain(jacobi_suite())
            .chain(transition_suite())
            .chain(table4_suite())
            .chain(degrees_suite())
            .filter(|c| c.name.contains(&prefix) || c.name.ends_with(label)),
    );
    if GS_CASES.iter().any(|&(l, n)| l == label && n == node) || {
        let rs = RootSystem::from_label(label);
        rs.map(|r| r.minuscule_nodes().contains(&node)).unwrap_or(false)
    } {
        out.extend(gs_suite(label, node, tols.gram, seed));
    }
    out.extend(lax_case(label, node, tau, seed, samples.min(5), tols));
    out.extend(hamiltonian_case(label, node, tau, seed, tols));
    if RLL_CASES.iter().any(|&(l, n)| l == label && n == node) {
        out.extend(rll_case(label, node, tau, seed, samples.min(8), tols));
        out.extend(cybe_case(label, node, tau, seed, samples.min(8), tols));
    }
    out
}

/// The full verification battery (CLI `all` without an algebra).
pub fn acceptance_checks(
    tau: Complex64,
    seed: u64,
    samples: usize,
    tols: &Tolerances,
) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    out.extend(root_data_suite());
    out.extend(jacobi_suite());
    out.extend(transition_suite());
    for &(label, node) in GS_CASES {
        out.extend(gs_suite(label, node, tols.gram, seed));
    }
    out.extend(table4_suite());
    out.extend(elliptic_suite(seed, 1000, tols.elliptic));
    out.extend(lax_suite(tau, seed, samples, tols));
    out.extend(hamiltonian_suite(tau, seed, tols));
    out.extend(rll_suite(tau, seed, samples, tols));
    out.extend(cybe_suite(tau, seed, samples, tols));
    out.extend(degrees_suite());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_constructors_set_status() {
        let t = Instant::now();
        assert!(exact_record("x", true, t).passed());
        assert!(!exact_record("x", false, t).passed());
        assert!(residual_record("x", 1e-12, 1e-10, t).passed());
        assert!(!residual_record("x", 1e-8, 1e-10, t).passed());
        assert!(!residual_record("x", f64::NAN, 1e-10, t).passed());
        assert!(control_record("x", 1e-2, 1e-4, t).passed());
        assert!(!control_record("x", 1e-6, 1e-4, t).passed());
    }

    #[test]
    fn report_summary_reflects_checks() {
        let t = Instant::now();
        let doc = ReportDocument::new(
            "test",
            ConfigEcho::default(),
            None,
            vec![exact_record("a", true, t), exact_record("b", true, t)],
        );
        assert!(doc.passed());
        let doc = ReportDocument::new(
            "test",
            ConfigEcho::default(),
            None,
            vec![exact_record("a", true, t), exact_record("b", false, t)],
        );
        assert!(!doc.passed());
    }

    #[test]
    fn rational_serialization() {
        use crate::rat::rat;
        assert_eq!(rat_str(rat(3, 4)), "3/4");
        assert_eq!(rat_str(rat(-1, 2)), "-1/2");
        assert_eq!(rat_str(rat(6, 3)), "2");
    }

    #[test]
    fn root_data_and_degrees_pass() {
        assert!(root_data_suite().iter().all(CheckRecord::passed));
        assert!(degrees_suite().iter().all(CheckRecord::passed));
    }

    #[test]
    fn jacobi_small_cases() {
        for label in ["A2", "B2", "C2"] {
            let rs = RootSystem::from_label(label).unwrap();
            assert!(jacobi_holds(&rs), "{label}");
        }
    }

    #[test]
    fn transition_suite_passes() {
        let checks = transition_suite();
        assert!(!checks.is_empty());
        for c in &checks {
            assert!(c.passed(), "{}", c.name);
        }
    }

    #[test]
    fn gs_suite_one_case() {
        let tols = Tolerances::default();
        for c in gs_suite("A3", 2, tols.gram, 5) {
            assert!(c.passed(), "{}", c.name);
        }
    }

    #[test]
    fn elliptic_suite_small() {
        for c in elliptic_suite(3, 64, 1e-10) {
            assert!(c.passed(), "{}", c.name);
        }
    }
}
