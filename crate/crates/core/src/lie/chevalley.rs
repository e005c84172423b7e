//! Chevalley basis structure constants.
//!
//! Signs are fixed by setting C = +(p+1) on extraspecial pairs, with the
//! positive roots totally ordered by height then lexicographically; every
//! other constant follows from the Jacobi identity and the standard
//! antisymmetry/length relations.

use super::RootSystem;
use crate::rat::*;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct StructureConstants {
    /// C[(i, j)] for root indices with roots[i] + roots[j] a root.
    table: HashMap<(usize, usize), Rat>,
}

impl StructureConstants {
    pub fn new(rs: &RootSystem) -> Self {
        let npos = rs.n_pos;
        // positive roots are already stored in (height, lex) order, so the
        // root index itself is the total order.
        let mut special: HashMap<(usize, usize), Rat> = HashMap::new();

        // chain length p: max q with beta - q*alpha a root
        let chain_down = |alpha: usize, beta: usize| -> i64 {
            let mut p = 0i64;
            let mut cur: Vec<i64> = rs.roots[beta].clone();
            loop {
                for k in 0..rs.rank {
                    cur[k] -= rs.roots[alpha][k];
                }
                if cur.iter().all(|&c| c == 0) || rs.root_index(&cur).is_none() {
                    return p;
                }
                p += 1;
            }
        };

        // reduce an arbitrary-sign pair to the stored positive table
        struct Ctx<'a> {
            rs: &'a RootSystem,
        }
        fn lookup(
            ctx: &Ctx,
            special: &HashMap<(usize, usize), Rat>,
            i: usize,
            j: usize,
        ) -> Rat {
            let rs = ctx.rs;
            let sum: Vec<i64> = (0..rs.rank)
                .map(|k| rs.roots[i][k] + rs.roots[j][k])
                .collect();
            if sum.iter().all(|&c| c == 0) || rs.root_index(&sum).is_none() {
                return Rat::zero();
            }
            let z = rs.root_index(&sum).unwrap();
            let (pi, pj) = (rs.is_positive(i), rs.is_positive(j));
            if pi && pj {
                if i < j {
                    *special.get(&(i, j)).expect("special pair computed")
                } else {
                    -*special.get(&(j, i)).expect("special pair computed")
                }
            } else if !pi && !pj {
                -lookup(ctx, special, rs.neg(i), rs.neg(j))
            } else {
                // mixed signs; arrange x positive
                let (x, y) = if pi { (i, j) } else { (j, i) };
                let sign = if pi { Rat::from_integer(1) } else { -Rat::from_integer(1) };
                let val = if rs.is_positive(z) {
                    // N_{x,y} = -(z,z)/(x,x) * N_{-y, z}
                    let c = rs.root_sq(z) / rs.root_sq(x);
                    -c * lookup(ctx, special, rs.neg(y), z)
                } else {
                    // N_{x,y} = -(z,z)/(y,y) * N_{x, -z}
                    let c = rs.root_sq(z) / rs.root_sq(y);
                    -c * lookup(ctx, special, x, rs.neg(z))
                };
                sign * val
            }
        }

        let ctx = Ctx { rs };
        // process sums gamma in increasing order
        for gamma in 0..npos {
            // collect special pairs (i, j), i < j, roots[i]+roots[j] = gamma
            let mut pairs: Vec<(usize, usize)> = vec![];
            for i in 0..npos {
                let diff: Vec<i64> = (0..rs.rank)
                    .map(|k| rs.roots[gamma][k] - rs.roots[i][k])
                    .collect();
                if let Some(j) = rs.root_index(&diff) {
                    if j < npos && i < j {
                        pairs.push((i, j));
                    }
                }
            }
            pairs.sort();
            if pairs.is_empty() {
                continue;
            }
            let (a1, b1) = pairs[0]; // extraspecial: minimal first member
            let p = chain_down(a1, b1);
            special.insert((a1, b1), Rat::from_integer(p + 1));
            for &(a, b) in &pairs[1..] {
                // Jacobi for (-alpha1, alpha, beta), summing to beta1:
                // N_{a,b} N_{-a1,gamma} + N_{b,-a1} N_{a,b-a1}
                //   + N_{-a1,a} N_{b,a-a1} = 0
                let n_ma1_gamma = lookup(&ctx, &special, rs.neg(a1), gamma);
                assert!(!n_ma1_gamma.is_zero());
                let diff_idx = |x: usize| -> Option<usize> {
                    let d: Vec<i64> = (0..rs.rank)
                        .map(|k| rs.roots[x][k] - rs.roots[a1][k])
                        .collect();
                    rs.root_index(&d)
                };
                let t1 = match diff_idx(b) {
                    Some(bma1) => {
                        lookup(&ctx, &special, b, rs.neg(a1))
                            * lookup(&ctx, &special, a, bma1)
                    }
                    None => Rat::zero(),
                };
                let t2 = match diff_idx(a) {
                    Some(ama1) => {
                        lookup(&ctx, &special, rs.neg(a1), a)
                            * lookup(&ctx, &special, b, ama1)
                    }
                    None => Rat::zero(),
                };
                let val = -(t1 + t2) / n_ma1_gamma;
                let pq = chain_down(a, b);
                assert_eq!(
                    val.abs(),
                    Rat::from_integer(pq + 1),
                    "magnitude must equal p+1"
                );
                special.insert((a, b), val);
            }
        }

        // materialize the full antisymmetric table over all root pairs
        let total = rs.num_roots();
        let mut table = HashMap::new();
        for i in 0..total {
            for j in 0..total {
                if i == j || rs.neg(i) == j {
                    continue;
                }
                let sum: Vec<i64> = (0..rs.rank)
                    .map(|k| rs.roots[i][k] + rs.roots[j][k])
                    .collect();
                if rs.root_index(&sum).is_some() {
                    let v = lookup(&ctx, &special, i, j);
                    if !v.is_zero() {
                        table.insert((i, j), v);
                    }
                }
            }
        }
        StructureConstants { table }
    }

    /// C_{alpha,beta} for root indices; zero when alpha+beta is not a root.
    pub fn c(&self, i: usize, j: usize) -> Rat {
        self.table.get(&(i, j)).copied().unwrap_or_else(Rat::zero)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, usize), &Rat)> {
        self.table.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::Family;

    fn check_antisymmetry(rs: &RootSystem, sc: &StructureConstants) {
        for i in 0..rs.num_roots() {
            for j in 0..rs.num_roots() {
                assert_eq!(sc.c(i, j), -sc.c(j, i));
            }
        }
    }

    fn check_magnitudes(rs: &RootSystem, sc: &StructureConstants) {
        for (&(i, j), &v) in sc.pairs() {
            let mut p = 0i64;
            let mut cur = rs.roots[j].clone();
            loop {
                for k in 0..rs.rank {
                    cur[k] -= rs.roots[i][k];
                }
                if cur.iter().all(|&c| c == 0) || rs.root_index(&cur).is_none() {
                    break;
                }
                p += 1;
            }
            assert_eq!(v.abs(), Rat::from_integer(p + 1));
        }
    }

    /// Jacobi over all root triples, with Cartan terms handled exactly.
    fn check_jacobi(rs: &RootSystem, sc: &StructureConstants) {
        let total = rs.num_roots();
        // bracket of two root vectors expanded over (roots, coroot coords)
        // jac(i,j,k): [E_i,[E_j,E_k]] + [E_j,[E_k,E_i]] + [E_k,[E_i,E_j]] = 0
        for i in 0..total {
            for j in 0..total {
                for k in 0..total {
                    let mut root_part: HashMap<usize, Rat> = HashMap::new();
                    let mut cartan_part = rvec_zero(rs.rank);
                    for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                        // inner = [E_y, E_z]
                        if rs.neg(y) == z {
                            // H_y; [E_x, H_y] = -<x, y^vee> E_x
                            let c = rs.pairing_with_coroot(&rs.root_vec(x), y);
                            *root_part.entry(x).or_insert_with(Rat::zero) -= c;
                        } else {
                            let cyz = sc.c(y, z);
                            if cyz.is_zero() {
                                continue;
                            }
                            let sum: Vec<i64> = (0..rs.rank)
                                .map(|t| rs.roots[y][t] + rs.roots[z][t])
                                .collect();
                            let w = rs.root_index(&sum).unwrap();
                            if rs.neg(x) == w {
                                // [E_x, E_{-x}] = H_x
                                let coords = rs.coroot_coords(x);
                                for t in 0..rs.rank {
                                    cartan_part[t] += cyz * Rat::from_integer(coords[t]);
                                }
                            } else {
                                let cxw = sc.c(x, w);
                                if !cxw.is_zero() {
                                    let sum2: Vec<i64> = (0..rs.rank)
                                        .map(|t| rs.roots[x][t] + rs.roots[w][t])
                                        .collect();
                                    let v = rs.root_index(&sum2).unwrap();
                                    *root_part.entry(v).or_insert_with(Rat::zero) +=
                                        cyz * cxw;
                                }
                            }
                        }
                    }
                    for (_, v) in root_part {
                        assert!(v.is_zero(), "jacobi fails at ({i},{j},{k})");
                    }
                    for v in cartan_part {
                        assert!(v.is_zero(), "jacobi cartan fails at ({i},{j},{k})");
                    }
                }
            }
        }
    }

    #[test]
    fn a2_constants() {
        let rs = RootSystem::new(Family::A, 2).unwrap();
        let sc = StructureConstants::new(&rs);
        check_antisymmetry(&rs, &sc);
        check_magnitudes(&rs, &sc);
        check_jacobi(&rs, &sc);
        // simply laced: all constants are +-1
        for (_, v) in sc.pairs() {
            assert_eq!(v.abs(), Rat::from_integer(1));
        }
    }

    #[test]
    fn b2_constants() {
        let rs = RootSystem::new(Family::B, 2).unwrap();
        let sc = StructureConstants::new(&rs);
        check_antisymmetry(&rs, &sc);
        check_magnitudes(&rs, &sc);
        check_jacobi(&rs, &sc);
        // B2 has a chain of length 2: some |C| = 2
        assert!(sc.pairs().any(|(_, v)| v.abs() == Rat::from_integer(2)));
    }

    #[test]
    fn c3_and_d4_jacobi() {
        for label in ["C3", "D4"] {
            let rs = RootSystem::from_label(label).unwrap();
            let sc = StructureConstants::new(&rs);
            check_antisymmetry(&rs, &sc);
            check_magnitudes(&rs, &sc);
            check_jacobi(&rs, &sc);
        }
    }

    #[test]
    fn length_relation() {
        // C_{alpha+beta,-alpha} = (|beta|^2/|alpha+beta|^2) C_{-alpha,-beta}
        let rs = RootSystem::from_label("B3").unwrap();
        let sc = StructureConstants::new(&rs);
        for (&(i, j), &v) in sc.pairs() {
            let _ = v;
            let sum: Vec<i64> = (0..rs.rank)
                .map(|k| rs.roots[i][k] + rs.roots[j][k])
                .collect();
            let g = rs.root_index(&sum).unwrap();
            let lhs = sc.c(g, rs.neg(i));
            let rhs = rs.root_sq(j) / rs.root_sq(g) * sc.c(rs.neg(i), rs.neg(j));
            assert_eq!(lhs, rhs);
        }
    }
}
