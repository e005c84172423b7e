//! Characteristic classes of G-bundles and conformal dimensions of the
//! associated modification operators.
//!
//! A class is a coweight gamma taken mod the coroot lattice; the phase data
//! records e(-<gamma, chi>) against a fixed generating set of characters of
//! the center, exact in rationals.

use std::collections::{HashSet, VecDeque};

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::lie::{Family, RootSystem};
use crate::rat::{rvec_add, Rat};

#[derive(Debug, Error)]
pub enum CharError {
    #[error("gamma is not in the coweight lattice: <gamma, {0}> is not an integer")]
    NotCoweight(String),
    #[error("gamma is not dominant: <gamma, alpha_{0}> < 0")]
    NotDominant(usize),
    #[error("unsupported representation: node {1} of {0}")]
    UnsupportedRep(String, usize),
    #[error("{0}")]
    BadInput(String),
}

fn frac(r: Rat) -> Rat {
    r - r.floor()
}

/// Coordinates of x (simple-root basis) over the simple coroots.
fn coroot_coords(rs: &RootSystem, x: &[Rat]) -> Vec<Rat> {
    let eps = rs.eps();
    (0..rs.rank).map(|k| x[k] * eps[k]).collect()
}

fn from_coroot_coords(rs: &RootSystem, c: &[Rat]) -> Vec<Rat> {
    let eps = rs.eps();
    (0..rs.rank).map(|k| c[k] / eps[k]).collect()
}

fn check_coweight(rs: &RootSystem, gamma: &[Rat]) -> Result<(), CharError> {
    for j in 0..rs.rank {
        if !rs.pair_root(gamma, j).is_integer() {
            return Err(CharError::NotCoweight(format!("alpha_{}", j + 1)));
        }
    }
    Ok(())
}

/// Nodes whose fundamental weights generate the character group P/Q of the
/// center. One node for a cyclic center, the two spinor nodes for D_even.
pub fn character_nodes(rs: &RootSystem) -> Vec<usize> {
    if rs.family == Family::D && rs.rank % 2 == 0 {
        return vec![rs.rank - 1, rs.rank];
    }
    // order of the class of w_j in P/Q = lcm of coordinate denominators
    let order = |j: usize| -> i64 {
        rs.weights[j - 1]
            .iter()
            .map(|c| *c.denom())
            .fold(1i64, |l, d| l / gcd(l, d) * d)
    };
    let j = (1..=rs.rank).max_by_key(|&j| order(j)).unwrap();
    vec![j]
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A characteristic class: gamma reduced mod the coroot lattice, together
/// with its exact phases against the generating characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharClass {
    pub algebra: String,
    /// Reduced representative, simple-root coordinates.
    pub gamma: Vec<Rat>,
    /// frac(-<gamma, w_c>) for each node in `character_nodes`, in [0, 1).
    pub phases: Vec<Rat>,
    /// Order of the class in P_vee/Q_vee.
    pub order: i64,
}

impl CharClass {
    pub fn is_trivial(&self) -> bool {
        self.phases.iter().all(Rat::is_zero)
    }
}

/// Class of a coweight gamma (simple-root coordinates). Errors if gamma is
/// not in the coweight lattice.
pub fn characteristic_class(rs: &RootSystem, gamma: &[Rat]) -> Result<CharClass, CharError> {
    if gamma.len() != rs.rank {
        return Err(CharError::BadInput(format!(
            "gamma has {} coordinates, rank is {}",
            gamma.len(),
            rs.rank
        )));
    }
    check_coweight(rs, gamma)?;
    let red_c: Vec<Rat> = coroot_coords(rs, gamma).iter().map(|&c| frac(c)).collect();
    let reduced = from_coroot_coords(rs, &red_c);
    let phases: Vec<Rat> = character_nodes(rs)
        .iter()
        .map(|&c| frac(-rs.pair(&reduced, &rs.weights[c - 1])))
        .collect();
    let order = red_c
        .iter()
        .map(|c| *c.denom())
        .fold(1i64, |l, d| l / gcd(l, d) * d);
    Ok(CharClass {
        algebra: rs.label(),
        gamma: reduced,
        phases,
        order,
    })
}

/// Modifications compose additively on classes.
pub fn compose_classes(
    rs: &RootSystem,
    a: &CharClass,
    b: &CharClass,
) -> Result<CharClass, CharError> {
    characteristic_class(rs, &rvec_add(&a.gamma, &b.gamma))
}

/// Weyl orbit of a weight vector (simple-root coordinates).
pub fn weyl_orbit(rs: &RootSystem, w: &[Rat]) -> Vec<Vec<Rat>> {
    let mut seen: HashSet<Vec<Rat>> = HashSet::new();
    let mut queue: VecDeque<Vec<Rat>> = VecDeque::new();
    seen.insert(w.to_vec());
    queue.push_back(w.to_vec());
    while let Some(x) = queue.pop_front() {
        for j in 0..rs.rank {
            let y = rs.reflect(j, &x);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen.into_iter().collect()
}

/// Weight diagram of a fundamental representation. Covered: A-series of rank
/// at most 4 (all nodes; these are minuscule, so the diagram is one orbit).
pub fn fundamental_rep_weights(rs: &RootSystem, node: usize) -> Result<Vec<Vec<Rat>>, CharError> {
    if rs.family != Family::A || rs.rank > 4 || node == 0 || node > rs.rank {
        return Err(CharError::UnsupportedRep(rs.label(), node));
    }
    Ok(weyl_orbit(rs, &rs.weights[node - 1]))
}

/// Weights of the adjoint representation (the roots; zero weights omitted).
pub fn adjoint_weights(rs: &RootSystem) -> Vec<Vec<Rat>> {
    (0..rs.num_roots()).map(|i| rs.root_vec(i)).collect()
}

/// Exponents <gamma, nu_j> governing the local action z^<gamma, nu_j> of a
/// modification of type gamma on the weight lines of a representation.
pub fn hecke_weight_exponents(
    rs: &RootSystem,
    gamma: &[Rat],
    weights: &[Vec<Rat>],
) -> Result<Vec<Rat>, CharError> {
    check_coweight(rs, gamma)?;
    Ok(weights.iter().map(|w| rs.pair(gamma, w)).collect())
}

/// Group naming for reports: simply connected form.
fn group_label(rs: &RootSystem) -> String {
    let n = rs.rank;
    match rs.family {
        Family::A => format!("SL({})", n + 1),
        Family::B => format!("Spin({})", 2 * n + 1),
        Family::C => format!("Sp({})", n),
        Family::D => format!("Spin({})", 2 * n),
        Family::E6 => "E6".into(),
        Family::E7 => "E7".into(),
    }
}

/// Dimensions of the representations entering the degree table.
fn rep_dim(rs: &RootSystem, node: usize) -> Option<i64> {
    let n = rs.rank;
    match rs.family {
        Family::A => {
            // binom(n+1, node)
            let mut d = 1i64;
            for j in 0..node as i64 {
                d = d * (n as i64 + 1 - j) / (j + 1);
            }
            Some(d)
        }
        Family::B if node == n => Some(1i64 << n),
        Family::C if node == 1 => Some(2 * n as i64),
        Family::D if node == n || node == n - 1 => Some(1i64 << (n - 1)),
        Family::D if node == 1 => Some(2 * n as i64),
        Family::E6 if node == 1 || node == 6 => Some(27),
        Family::E7 if node == 7 => Some(56),
        _ => None,
    }
}

/// Conformal dimension data of the modification operator acting in the
/// representation with highest weight w_nu, for the class of w_cow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeRecord {
    pub group: String,
    pub algebra: String,
    pub nu_node: usize,
    pub coweight_node: usize,
    pub dim_v: i64,
    /// <w_cow, w_nu>, exact.
    pub pairing: Rat,
    /// dim_v * (pairing + k) at the requested k; always an integer.
    pub degree: i64,
    pub k: i64,
    /// degree mod dim_v, in [0, dim_v).
    pub residue: i64,
    /// Least-absolute-value representative of the degree family (ties
    /// resolved to the positive one).
    pub normalized: i64,
}

pub fn conformal_degree(
    rs: &RootSystem,
    nu_node: usize,
    coweight_node: usize,
    k: i64,
) -> Result<DegreeRecord, CharError> {
    if nu_node == 0 || nu_node > rs.rank || coweight_node == 0 || coweight_node > rs.rank {
        return Err(CharError::BadInput("node out of range".into()));
    }
    let dim_v =
        rep_dim(rs, nu_node).ok_or_else(|| CharError::UnsupportedRep(rs.label(), nu_node))?;
    let pairing = rs.pair(&rs.coweights[coweight_node - 1], &rs.weights[nu_node - 1]);
    let deg = (pairing + Rat::from_integer(k)) * Rat::from_integer(dim_v);
    if !deg.is_integer() {
        return Err(CharError::BadInput(format!(
            "degree {} is not an integer",
            deg
        )));
    }
    let degree = deg.to_integer();
    let residue = degree.rem_euclid(dim_v);
    let normalized = if 2 * residue > dim_v {
        residue - dim_v
    } else {
        residue
    };
    Ok(DegreeRecord {
        group: group_label(rs),
        algebra: rs.label(),
        nu_node,
        coweight_node,
        dim_v,
        pairing,
        degree,
        k,
        residue,
        normalized,
    })
}

/// A row of the degree table: which algebra and nodes to evaluate and the
/// expected normalized degree at k = 0.
pub struct TableRow {
    pub algebra: &'static str,
    pub nu_node: usize,
    pub coweight_node: usize,
    pub expected: i64,
}

/// Concrete instances of the seven degree-table families. For the D series
/// the pairing of the two spinor nodes depends on rank mod 4; the rows pick
/// the chirality pair with a nontrivial pairing class.
pub fn degree_table() -> Vec<TableRow> {
    vec![
        TableRow { algebra: "A3", nu_node: 1, coweight_node: 1, expected: -1 },
        TableRow { algebra: "B3", nu_node: 3, coweight_node: 1, expected: 4 },
        TableRow { algebra: "C3", nu_node: 1, coweight_node: 3, expected: 3 },
        TableRow { algebra: "D4", nu_node: 3, coweight_node: 4, expected: 4 },
        TableRow { algebra: "D5", nu_node: 5, coweight_node: 5, expected: 4 },
        TableRow { algebra: "E6", nu_node: 1, coweight_node: 1, expected: 9 },
        TableRow { algebra: "E7", nu_node: 7, coweight_node: 7, expected: 28 },
    ]
}

/// Laurent data of one Chevalley component of a Lax operator near z = 0:
/// sum_j coeffs[j] z^(lead + j).
#[derive(Debug, Clone)]
pub struct LaurentSeries {
    pub lead: i64,
    pub coeffs: Vec<Complex64>,
}

/// Root components of a Lax operator near z = 0, indexed like the roots.
#[derive(Debug, Clone)]
pub struct LaxExpansion {
    pub root_parts: Vec<LaurentSeries>,
}

impl LaxExpansion {
    /// Expansion of an operator with a simple pole whose residue has the
    /// given root components (higher-order terms unknown, treated as generic).
    pub fn from_residue(res: &[Complex64]) -> Self {
        LaxExpansion {
            root_parts: res
                .iter()
                .map(|&c| LaurentSeries {
                    lead: -1,
                    coeffs: vec![c],
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeckeScaling {
    pub new_class: CharClass,
    pub admissible: bool,
    /// (root index, exponent) pairs where a scaled coefficient below the
    /// simple pole fails to vanish.
    pub violations: Vec<(usize, i64)>,
    /// Root parts after the scaling z^<gamma, alpha>; Cartan parts are
    /// untouched by the diagonal action.
    pub scaled: Vec<LaurentSeries>,
}

/// Diagonal action of a modification of dominant type gamma on a Lax
/// operator: root components scale by z^<gamma, alpha>, the Cartan part is
/// unchanged, and the class shifts by gamma. Admissible when the result
/// keeps at most a simple pole.
pub fn hecke_lax_scaling(
    rs: &RootSystem,
    class: &CharClass,
    gamma: &[Rat],
    exp: &LaxExpansion,
    tol: f64,
) -> Result<HeckeScaling, CharError> {
    check_coweight(rs, gamma)?;
    for j in 0..rs.rank {
        if rs.pair_root(gamma, j).is_negative() {
            return Err(CharError::NotDominant(j + 1));
        }
    }
    if exp.root_parts.len() != rs.num_roots() {
        return Err(CharError::BadInput("expansion/root count mismatch".into()));
    }
    let mut scaled = Vec::with_capacity(exp.root_parts.len());
    let mut violations = Vec::new();
    for (i, part) in exp.root_parts.iter().enumerate() {
        let e = rs.pair_root(gamma, i);
        assert!(e.is_integer());
        let lead = part.lead + e.to_integer();
        for (j, c) in part.coeffs.iter().enumerate() {
            let ord = lead + j as i64;
            if ord < -1 && c.norm() > tol {
                violations.push((i, ord));
            }
        }
        scaled.push(LaurentSeries {
            lead,
            coeffs: part.coeffs.clone(),
        });
    }
    let new_class = characteristic_class(rs, &rvec_add(&class.gamma, gamma))?;
    Ok(HeckeScaling {
        new_class,
        admissible: violations.is_empty(),
        violations,
        scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::center_data;
    use crate::rat::{rat, rvec_scale};
    use num_traits::One;

    fn rs(label: &str) -> RootSystem {
        RootSystem::from_label(label).unwrap()
    }

    #[test]
    fn coroot_class_is_trivial_and_coweight_class_generates() {
        let a2 = rs("A2");
        let cr = a2.coroot_vec(0);
        assert!(characteristic_class(&a2, &cr).unwrap().is_trivial());

        let c = characteristic_class(&a2, &a2.coweights[0]).unwrap();
        assert!(!c.is_trivial());
        assert_eq!(c.order, 3);
        assert_eq!(c.phases.len(), 1);
        assert_eq!(*c.phases[0].denom(), 3);
        let twice = compose_classes(&a2, &c, &c).unwrap();
        assert!(!twice.is_trivial());
        let thrice = compose_classes(&a2, &twice, &c).unwrap();
        assert!(thrice.is_trivial());
    }

    #[test]
    fn non_coweight_is_rejected() {
        let a2 = rs("A2");
        let bad = vec![rat(1, 5), Rat::zero()];
        assert!(matches!(
            characteristic_class(&a2, &bad),
            Err(CharError::NotCoweight(_))
        ));
    }

    #[test]
    fn phases_add_under_composition() {
        for label in ["A3", "B3", "C3", "D4", "D5", "E6", "E7"] {
            let r = rs(label);
            let g1 = r.coweights[0].clone();
            let g2 = r.coweights[r.rank - 1].clone();
            let c1 = characteristic_class(&r, &g1).unwrap();
            let c2 = characteristic_class(&r, &g2).unwrap();
            let sum = compose_classes(&r, &c1, &c2).unwrap();
            for (i, p) in sum.phases.iter().enumerate() {
                assert_eq!(*p, frac(c1.phases[i] + c2.phases[i]), "{}", label);
            }
        }
    }

    #[test]
    fn phase_denominators_divide_center_order() {
        for label in ["A4", "B3", "C4", "D4", "D5", "E6", "E7"] {
            let r = rs(label);
            let z = center_data(&r).order;
            for j in 0..r.rank {
                let c = characteristic_class(&r, &r.coweights[j]).unwrap();
                for p in &c.phases {
                    assert_eq!(z % p.denom(), 0, "{} node {}", label, j + 1);
                }
                assert_eq!(z % c.order, 0);
            }
        }
    }

    #[test]
    fn d_even_classes_are_separated_by_the_phase_pair() {
        let d4 = rs("D4");
        let v = characteristic_class(&d4, &d4.coweights[0]).unwrap();
        let sl = characteristic_class(&d4, &d4.coweights[2]).unwrap();
        let sr = characteristic_class(&d4, &d4.coweights[3]).unwrap();
        for c in [&v, &sl, &sr] {
            assert!(!c.is_trivial());
            assert_eq!(c.order, 2);
        }
        assert_ne!(v.phases, sl.phases);
        assert_ne!(v.phases, sr.phases);
        assert_ne!(sl.phases, sr.phases);
        // the two spinor classes compose to the vector class
        let sum = compose_classes(&d4, &sl, &sr).unwrap();
        assert_eq!(sum.phases, v.phases);
    }

    #[test]
    fn degree_table_residues_are_exact() {
        for row in degree_table() {
            let r = rs(row.algebra);
            let rec = conformal_degree(&r, row.nu_node, row.coweight_node, 0).unwrap();
            assert_eq!(rec.normalized, row.expected, "{}", row.algebra);
            // degree at any k stays in the same residue class
            for k in [-2i64, 1, 3] {
                let rk = conformal_degree(&r, row.nu_node, row.coweight_node, k).unwrap();
                assert_eq!(rk.residue, rec.residue, "{} k={}", row.algebra, k);
            }
        }
    }

    #[test]
    fn degree_closed_forms_hold_at_other_ranks() {
        // SL(n): -1 + kn
        for n in 3..=6 {
            let r = rs(&format!("A{}", n - 1));
            let rec = conformal_degree(&r, 1, 1, 0).unwrap();
            assert_eq!(rec.normalized, -1, "A{}", n - 1);
            assert_eq!(rec.dim_v, n as i64);
        }
        // SL(2): residue 1 mod 2 (the +-1 representatives tie)
        let a1 = rs("A1");
        assert_eq!(conformal_degree(&a1, 1, 1, 0).unwrap().residue, 1);
        // Spin(2n+1): 2^(n-1) (1 + 2k)
        for n in 2..=5 {
            let r = rs(&format!("B{}", n));
            let rec = conformal_degree(&r, n, 1, 0).unwrap();
            assert_eq!(rec.degree, 1i64 << (n - 1), "B{}", n);
        }
        // Sp(n): n (1 + 2k)
        for n in 2..=5 {
            let r = rs(&format!("C{}", n));
            let rec = conformal_degree(&r, 1, n, 0).unwrap();
            assert_eq!(rec.degree, n as i64, "C{}", n);
        }
        // Spin(4n): 2^(2n-2) (1 + 2k), spinor chirality pair fixed by rank mod 4
        for (label, nu, cow) in [("D4", 3, 4), ("D6", 6, 6)] {
            let r = rs(label);
            let rec = conformal_degree(&r, nu, cow, 0).unwrap();
            let m = r.rank;
            assert_eq!(rec.residue, 1i64 << (m - 2), "{}", label);
        }
        // Spin(4n+2): residue 2^(2n-2) (2n+1 mod 4) on the spinor of dim 2^(2n)
        let d5 = rs("D5");
        let rec = conformal_degree(&d5, 5, 5, 0).unwrap();
        assert_eq!(rec.dim_v, 16);
        assert_eq!(rec.degree, 20);
        assert_eq!(rec.residue, 4);
    }

    #[test]
    fn table_dims_match_weyl_orbit_sizes() {
        for (label, node) in [
            ("A3", 1),
            ("A3", 2),
            ("B3", 3),
            ("C3", 1),
            ("D4", 3),
            ("D4", 4),
            ("D5", 5),
            ("E6", 1),
            ("E7", 7),
        ] {
            let r = rs(label);
            let orbit = weyl_orbit(&r, &r.weights[node - 1]);
            assert_eq!(
                orbit.len() as i64,
                rep_dim(&r, node).unwrap(),
                "{} node {}",
                label,
                node
            );
        }
    }

    #[test]
    fn adjoint_exponents_are_integers() {
        for label in ["A3", "B3", "C3", "D4", "E6", "E7"] {
            let r = rs(label);
            let w = adjoint_weights(&r);
            for j in 0..r.rank {
                let e = hecke_weight_exponents(&r, &r.coweights[j], &w).unwrap();
                assert!(e.iter().all(Rat::is_integer), "{} node {}", label, j + 1);
            }
        }
    }

    #[test]
    fn defining_rep_exponents_are_fractional() {
        let a1 = rs("A1");
        let w = fundamental_rep_weights(&a1, 1).unwrap();
        let mut e = hecke_weight_exponents(&a1, &a1.coweights[0], &w).unwrap();
        e.sort();
        assert_eq!(e, vec![rat(-1, 2), rat(1, 2)]);

        let a3 = rs("A3");
        let w = fundamental_rep_weights(&a3, 1).unwrap();
        let e = hecke_weight_exponents(&a3, &a3.coweights[2], &w).unwrap();
        assert_eq!(e.len(), 4);
        // exponents sum to <gamma, sum of weights> = 0
        assert!(e.iter().copied().sum::<Rat>().is_zero());
        assert!(e.iter().all(|x| *x.denom() == 4));
    }

    #[test]
    fn rep_weights_outside_supported_range_rejected() {
        let b3 = rs("B3");
        assert!(matches!(
            fundamental_rep_weights(&b3, 1),
            Err(CharError::UnsupportedRep(_, _))
        ));
    }

    #[test]
    fn trivial_modification_is_always_admissible() {
        let a2 = rs("A2");
        let zero = vec![Rat::zero(); 2];
        let class = characteristic_class(&a2, &zero).unwrap();
        let res: Vec<Complex64> = (0..a2.num_roots())
            .map(|i| Complex64::new(1.0 + i as f64, 0.3))
            .collect();
        let exp = LaxExpansion::from_residue(&res);
        let out = hecke_lax_scaling(&a2, &class, &zero, &exp, 1e-12).unwrap();
        assert!(out.admissible);
        assert!(out.new_class.is_trivial());
    }

    #[test]
    fn generic_residue_blocks_fundamental_modification() {
        let a2 = rs("A2");
        let zero = vec![Rat::zero(); 2];
        let class = characteristic_class(&a2, &zero).unwrap();
        let gamma = a2.coweights[0].clone();
        let res: Vec<Complex64> = (0..a2.num_roots())
            .map(|i| Complex64::new(0.7, 0.2 * i as f64 + 0.1))
            .collect();
        let exp = LaxExpansion::from_residue(&res);
        let out = hecke_lax_scaling(&a2, &class, &gamma, &exp, 1e-12).unwrap();
        assert!(!out.admissible);
        // every violating component sits at a negative root
        for (i, ord) in &out.violations {
            assert!(!a2.is_positive(*i));
            assert!(*ord < -1);
        }

        // zeroing the residues on the obstructed roots restores admissibility
        let mut res2 = res;
        for (i, _) in &out.violations {
            res2[*i] = Complex64::new(0.0, 0.0);
        }
        let out2 = hecke_lax_scaling(&a2, &class, &gamma, &LaxExpansion::from_residue(&res2), 1e-12)
            .unwrap();
        assert!(out2.admissible);
        // the class moved by gamma
        let expect = characteristic_class(&a2, &gamma).unwrap();
        assert_eq!(out2.new_class.phases, expect.phases);
    }

    #[test]
    fn non_dominant_modification_rejected() {
        let a2 = rs("A2");
        let class = characteristic_class(&a2, &[Rat::zero(), Rat::zero()]).unwrap();
        let gamma = rvec_scale(&a2.coweights[0], -Rat::one());
        let exp = LaxExpansion::from_residue(&vec![Complex64::new(1.0, 0.0); a2.num_roots()]);
        assert!(matches!(
            hecke_lax_scaling(&a2, &class, &gamma, &exp, 1e-12),
            Err(CharError::NotDominant(_))
        ));
    }
}
