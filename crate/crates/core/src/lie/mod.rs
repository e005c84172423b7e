//! Root systems for the classical and exceptional series that admit a
//! nontrivial center (A, B, C, D, E6, E7), built over exact rationals.
//!
//! Roots are stored as integer coefficient vectors in the simple-root basis.
//! The ambient space and its dual are identified through the invariant
//! bilinear form, normalized so long roots have squared length 2.

mod chevalley;

pub use chevalley::StructureConstants;

use crate::rat::*;
use num_traits::{One, Zero};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E6,
    E7,
}

#[derive(Debug, Error)]
pub enum LieError {
    #[error("unsupported algebra: {0}")]
    Unsupported(String),
    #[error("rank {1} out of range for family {0:?}")]
    RankOutOfRange(Family, usize),
    #[error("malformed algebra label: {0}")]
    BadLabel(String),
}

/// Parse labels like "A3", "D5", "E6".
pub fn parse_label(s: &str) -> Result<(Family, usize), LieError> {
    let s = s.trim();
    let (fam, rest) = s.split_at(1);
    let rank: usize = rest
        .parse()
        .map_err(|_| LieError::BadLabel(s.to_string()))?;
    let family = match fam {
        "A" | "a" => Family::A,
        "B" | "b" => Family::B,
        "C" | "c" => Family::C,
        "D" | "d" => Family::D,
        "E" | "e" => match rank {
            6 => Family::E6,
            7 => Family::E7,
            8 => return Err(LieError::Unsupported("E8 has trivial center".into())),
            _ => return Err(LieError::BadLabel(s.to_string())),
        },
        "F" | "f" => return Err(LieError::Unsupported("F4 has trivial center".into())),
        "G" | "g" => return Err(LieError::Unsupported("G2 has trivial center".into())),
        _ => return Err(LieError::BadLabel(s.to_string())),
    };
    Ok((family, rank))
}

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    /// a[j][k] = <alpha_j, alpha_k^vee>
    pub cartan: Vec<Vec<i64>>,
    pub cartan_det: i64,
    /// (alpha_j, alpha_k)
    pub form: Vec<Vec<Rat>>,
    pub form_inv: Vec<Vec<Rat>>,
    /// All roots, positive first ordered by (height, lex), then negatives in
    /// the matching order.
    pub roots: Vec<Vec<i64>>,
    pub n_pos: usize,
    index: HashMap<Vec<i64>, usize>,
    /// Coefficients n_j of the highest root.
    pub highest_coeffs: Vec<i64>,
    /// Coxeter number h = 1 + sum n_j.
    pub coxeter: i64,
    pub degrees: Vec<i64>,
    /// Fundamental coweights as vectors: (w_j, alpha_k) = delta_jk.
    pub coweights: Vec<Vec<Rat>>,
    /// Fundamental weights as vectors: <w_j, alpha_k^vee> = delta_jk.
    pub weights: Vec<Vec<Rat>>,
    /// rho^vee = sum of fundamental coweights.
    pub rho_vee: Vec<Rat>,
}

fn cartan_matrix(family: Family, n: usize) -> Result<Vec<Vec<i64>>, LieError> {
    let chain = |n: usize| -> Vec<Vec<i64>> {
        let mut a = vec![vec![0i64; n]; n];
        for i in 0..n {
            a[i][i] = 2;
            if i + 1 < n {
                a[i][i + 1] = -1;
                a[i + 1][i] = -1;
            }
        }
        a
    };
    match family {
        Family::A => {
            if n < 1 {
                return Err(LieError::RankOutOfRange(family, n));
            }
            Ok(chain(n))
        }
        Family::B => {
            if n < 2 {
                return Err(LieError::RankOutOfRange(family, n));
            }
            let mut a = chain(n);
            // alpha_n short: <alpha_{n-1}, alpha_n^vee> = -2
            a[n - 2][n - 1] = -2;
            a[n - 1][n - 2] = -1;
            Ok(a)
        }
        Family::C => {
            if n < 2 {
                return Err(LieError::RankOutOfRange(family, n));
            }
            let mut a = chain(n);
            // alpha_n long: <alpha_n, alpha_{n-1}^vee> = -2
            a[n - 2][n - 1] = -1;
            a[n - 1][n - 2] = -2;
            Ok(a)
        }
        Family::D => {
            if n < 3 {
                return Err(LieError::RankOutOfRange(family, n));
            }
            let mut a = chain(n - 1);
            a.iter_mut().for_each(|r| r.push(0));
            a.push(vec![0; n]);
            a[n - 1][n - 1] = 2;
            // fork: alpha_n attaches to alpha_{n-2}
            a[n - 3][n - 1] = -1;
            a[n - 1][n - 3] = -1;
            // detach alpha_{n-1} from nothing extra; chain already links n-2,n-1
            Ok(a)
        }
        Family::E6 | Family::E7 => {
            let n = if family == Family::E6 { 6 } else { 7 };
            // Bourbaki: alpha_2 attaches to alpha_4; chain 1-3-4-5-6(-7)
            let mut a = vec![vec![0i64; n]; n];
            for i in 0..n {
                a[i][i] = 2;
            }
            let mut link = |i: usize, j: usize| {
                a[i - 1][j - 1] = -1;
                a[j - 1][i - 1] = -1;
            };
            link(1, 3);
            link(3, 4);
            link(4, 5);
            link(5, 6);
            if n == 7 {
                link(6, 7);
            }
            link(2, 4);
            Ok(a)
        }
    }
}

/// Half squared lengths eps_k = (alpha_k, alpha_k)/2, long roots normalized
/// to squared length 2.
fn half_lengths(family: Family, n: usize) -> Vec<Rat> {
    match family {
        Family::B => {
            let mut v = vec![Rat::one(); n];
            v[n - 1] = rat(1, 2);
            v
        }
        Family::C => {
            let mut v = vec![rat(1, 2); n];
            v[n - 1] = Rat::one();
            v
        }
        _ => vec![Rat::one(); n],
    }
}

fn degree_table(family: Family, n: usize) -> Vec<i64> {
    match family {
        Family::A => (2..=(n as i64 + 1)).collect(),
        Family::B | Family::C => (1..=n as i64).map(|k| 2 * k).collect(),
        Family::D => {
            let mut v: Vec<i64> = (1..n as i64).map(|k| 2 * k).collect();
            v.push(n as i64);
            v.sort_unstable();
            v
        }
        Family::E6 => vec![2, 5, 6, 8, 9, 12],
        Family::E7 => vec![2, 6, 8, 10, 12, 14, 18],
    }
}

impl RootSystem {
    pub fn new(family: Family, rank: usize) -> Result<Self, LieError> {
        if matches!(family, Family::E6) && rank != 6 {
            return Err(LieError::RankOutOfRange(family, rank));
        }
        if matches!(family, Family::E7) && rank != 7 {
            return Err(LieError::RankOutOfRange(family, rank));
        }
        let n = rank;
        let cartan = cartan_matrix(family, n)?;
        let eps = half_lengths(family, n);
        // (alpha_j, alpha_k) = a[j][k] * eps_k
        let mut form = vec![rvec_zero(n); n];
        for j in 0..n {
            for k in 0..n {
                form[j][k] = Rat::from_integer(cartan[j][k]) * eps[k];
            }
        }
        let form_inv = rmat_inverse(&form).expect("form is nondegenerate");
        let cartan_rat: Vec<Vec<Rat>> = cartan
            .iter()
            .map(|r| r.iter().map(|&x| Rat::from_integer(x)).collect())
            .collect();
        let cartan_det = rmat_det(&cartan_rat).to_integer();

        // close the simple roots under simple reflections
        let mut pos: Vec<Vec<i64>> = vec![];
        let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
        let mut queue: Vec<Vec<i64>> = (0..n)
            .map(|j| {
                let mut v = vec![0i64; n];
                v[j] = 1;
                v
            })
            .collect();
        for r in &queue {
            seen.insert(r.clone(), ());
        }
        while let Some(r) = queue.pop() {
            pos.push(r.clone());
            for k in 0..n {
                // <r, alpha_k^vee> = sum_j f_j a[j][k]
                let pairing: i64 = (0..n).map(|j| r[j] * cartan[j][k]).sum();
                let mut img = r.clone();
                img[k] -= pairing;
                if img.iter().all(|&c| c >= 0) && !seen.contains_key(&img) {
                    seen.insert(img.clone(), ());
                    queue.push(img);
                }
            }
        }
        pos.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        let n_pos = pos.len();
        let mut roots = pos.clone();
        roots.extend(pos.iter().map(|r| r.iter().map(|&c| -c).collect::<Vec<_>>()));
        let index: HashMap<Vec<i64>, usize> = roots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect();

        let highest = pos.last().unwrap().clone();
        let coxeter = 1 + highest.iter().sum::<i64>();
        let degrees = degree_table(family, n);
        debug_assert_eq!(
            2 * degrees.iter().map(|d| d - 1).sum::<i64>(),
            2 * n_pos as i64
        );

        // coweights: columns of form_inv
        let coweights: Vec<Vec<Rat>> = (0..n)
            .map(|j| (0..n).map(|i| form_inv[i][j]).collect())
            .collect();
        // weights: G w = eps_j e_j
        let weights: Vec<Vec<Rat>> = (0..n)
            .map(|j| (0..n).map(|i| form_inv[i][j] * eps[j]).collect())
            .collect();
        let mut rho_vee = rvec_zero(n);
        for w in &coweights {
            rho_vee = rvec_add(&rho_vee, w);
        }

        Ok(RootSystem {
            family,
            rank,
            cartan,
            cartan_det,
            form,
            form_inv,
            roots,
            n_pos,
            index,
            highest_coeffs: highest,
            coxeter,
            degrees,
            coweights,
            weights,
            rho_vee,
        })
    }

    pub fn from_label(s: &str) -> Result<Self, LieError> {
        let (f, n) = parse_label(s)?;
        RootSystem::new(f, n)
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::A => format!("A{}", self.rank),
            Family::B => format!("B{}", self.rank),
            Family::C => format!("C{}", self.rank),
            Family::D => format!("D{}", self.rank),
            Family::E6 => "E6".into(),
            Family::E7 => "E7".into(),
        }
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn dim(&self) -> usize {
        self.roots.len() + self.rank
    }

    pub fn root_index(&self, coeffs: &[i64]) -> Option<usize> {
        self.index.get(coeffs).copied()
    }

    pub fn neg(&self, i: usize) -> usize {
        if i < self.n_pos {
            i + self.n_pos
        } else {
            i - self.n_pos
        }
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.n_pos
    }

    pub fn height(&self, i: usize) -> i64 {
        self.roots[i].iter().sum()
    }

    /// Bilinear form on vectors given in simple-root coordinates.
    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for j in 0..self.rank {
            for k in 0..self.rank {
                s += x[j] * self.form[j][k] * y[k];
            }
        }
        s
    }

    pub fn root_vec(&self, i: usize) -> Vec<Rat> {
        self.roots[i].iter().map(|&c| Rat::from_integer(c)).collect()
    }

    pub fn pair_root(&self, x: &[Rat], root: usize) -> Rat {
        let f = &self.roots[root];
        let mut s = Rat::zero();
        for j in 0..self.rank {
            if f[j] != 0 {
                for k in 0..self.rank {
                    s += x[k] * self.form[k][j] * Rat::from_integer(f[j]);
                }
            }
        }
        s
    }

    pub fn root_sq(&self, i: usize) -> Rat {
        let v = self.root_vec(i);
        self.pair(&v, &v)
    }

    /// Coroot alpha^vee = 2 alpha/(alpha,alpha), in simple-root coordinates.
    pub fn coroot_vec(&self, i: usize) -> Vec<Rat> {
        let sq = self.root_sq(i);
        self.root_vec(i)
            .iter()
            .map(|&c| c * rat(2, 1) / sq)
            .collect()
    }

    /// Coroot in the simple-coroot basis; entries are integers.
    pub fn coroot_coords(&self, i: usize) -> Vec<i64> {
        let sq = self.root_sq(i);
        let eps = half_lengths(self.family, self.rank);
        (0..self.rank)
            .map(|j| {
                let c = Rat::from_integer(self.roots[i][j]) * rat(2, 1) * eps[j] / sq;
                assert!(c.is_integer());
                c.to_integer()
            })
            .collect()
    }

    /// <x, alpha_i> pairing of a vector with root index i in Z when x is a
    /// (co)weight-lattice element; returned exact.
    pub fn pairing_with_coroot(&self, x: &[Rat], root: usize) -> Rat {
        let sq = self.root_sq(root);
        self.pair_root(x, root) * rat(2, 1) / sq
    }

    /// Reflection s_alpha acting on a vector (simple-root coordinates).
    pub fn reflect(&self, root: usize, x: &[Rat]) -> Vec<Rat> {
        let c = self.pairing_with_coroot(x, root);
        let a = self.root_vec(root);
        (0..self.rank).map(|j| x[j] - c * a[j]).collect()
    }

    /// Reflection acting on a root, returning the image root index.
    pub fn reflect_root(&self, mirror: usize, root: usize) -> usize {
        let img = self.reflect(mirror, &self.root_vec(root));
        let coeffs: Vec<i64> = img
            .iter()
            .map(|c| {
                assert!(c.is_integer());
                c.to_integer()
            })
            .collect();
        self.root_index(&coeffs).expect("reflection permutes roots")
    }

    /// Highest root index.
    pub fn highest_root(&self) -> usize {
        self.root_index(&self.highest_coeffs).unwrap()
    }

    /// Minuscule nodes: j with n_j = 1 (1-based).
    pub fn minuscule_nodes(&self) -> Vec<usize> {
        self.highest_coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(j, _)| j + 1)
            .collect()
    }

    /// Killing-normalized pairing of Cartan elements given in simple-coroot
    /// coordinates: (H_x, H_y).
    pub fn killing_cartan(&self, x: &[Rat], y: &[Rat]) -> Rat {
        // (H_alpha, H_beta) = <alpha^vee, beta^vee> under the form; coroot
        // coordinate vectors c translate to root-basis vectors via eps.
        let eps = half_lengths(self.family, self.rank);
        let xv: Vec<Rat> = (0..self.rank).map(|j| x[j] / eps[j]).collect();
        let yv: Vec<Rat> = (0..self.rank).map(|j| y[j] / eps[j]).collect();
        self.pair(&xv, &yv)
    }

    pub fn eps(&self) -> Vec<Rat> {
        half_lengths(self.family, self.rank)
    }
}

/// Center of the simply connected group: structure and generator coweights.
#[derive(Debug, Clone)]
pub struct CenterData {
    pub order: i64,
    /// Invariant factors, e.g. [4] for cyclic of order 4, [2, 2] for D_even.
    pub invariants: Vec<i64>,
    /// Generator coweight node (1-based) for each invariant factor.
    pub generators: Vec<usize>,
    /// For each divisor l of the exponent: node whose coweight class has
    /// exact order l (used to pick the characteristic class of G_l bundles).
    pub order_of_node: Vec<(usize, i64)>,
}

pub fn center_data(rs: &RootSystem) -> CenterData {
    let order = rs.cartan_det;
    let n = rs.rank;
    // order of the class of each minuscule coweight in P^vee/Q^vee:
    // smallest l with l*w in Q^vee (integer coordinates in coroot basis).
    let eps = rs.eps();
    let node_order = |j: usize| -> i64 {
        let w = &rs.coweights[j - 1];
        // coroot-basis coordinates of w: c_k = w_k * eps_k
        let coords: Vec<Rat> = (0..n).map(|k| w[k] * eps[k]).collect();
        let mut l = 1i64;
        for c in &coords {
            let d = *c.denom();
            l = l / gcd(l, d) * d;
        }
        l
    };
    let order_of_node: Vec<(usize, i64)> = rs
        .minuscule_nodes()
        .into_iter()
        .map(|j| (j, node_order(j)))
        .collect();
    let (invariants, generators) = match (rs.family, rs.rank % 2) {
        (Family::D, 0) => {
            // mu2 x mu2 generated by the two spinor nodes
            (vec![2, 2], vec![rs.rank - 1, rs.rank])
        }
        _ => {
            // cyclic: pick a node of maximal order
            let &(j, l) = order_of_node
                .iter()
                .max_by_key(|(_, l)| *l)
                .expect("center is nontrivial");
            (vec![l], vec![j])
        }
    };
    CenterData {
        order,
        invariants,
        generators,
        order_of_node,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// A Weyl group element: matrix on the Cartan space plus the induced root
/// permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    pub matrix: Vec<Vec<Rat>>,
    pub perm: Vec<usize>,
}

impl WeylElement {
    pub fn identity(rs: &RootSystem) -> Self {
        WeylElement {
            matrix: rmat_identity(rs.rank),
            perm: (0..rs.num_roots()).collect(),
        }
    }

    pub fn simple_reflection(rs: &RootSystem, k: usize) -> Self {
        let root = rs
            .root_index(&{
                let mut v = vec![0i64; rs.rank];
                v[k] = 1;
                v
            })
            .unwrap();
        WeylElement::reflection(rs, root)
    }

    pub fn reflection(rs: &RootSystem, root: usize) -> Self {
        let n = rs.rank;
        let mut matrix = vec![rvec_zero(n); n];
        for j in 0..n {
            let mut e = rvec_zero(n);
            e[j] = Rat::one();
            let img = rs.reflect(root, &e);
            for i in 0..n {
                matrix[i][j] = img[i];
            }
        }
        let perm = (0..rs.num_roots())
            .map(|r| rs.reflect_root(root, r))
            .collect();
        WeylElement { matrix, perm }
    }

    pub fn compose(&self, rs: &RootSystem, other: &WeylElement) -> Self {
        // (self o other)(x) = self(other(x))
        WeylElement {
            matrix: rmat_mul(&self.matrix, &other.matrix),
            perm: (0..rs.num_roots()).map(|r| self.perm[other.perm[r]]).collect(),
        }
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        rmat_vec(&self.matrix, x)
    }

    pub fn order(&self, rs: &RootSystem) -> usize {
        let id = WeylElement::identity(rs);
        let mut w = self.clone();
        let mut k = 1;
        while w != id {
            w = w.compose(rs, self);
            k += 1;
            assert!(k < 10_000);
        }
        k
    }
}

/// Enumerate the full Weyl group by closure (small ranks only).
pub fn enumerate_weyl(rs: &RootSystem, cap: usize) -> Option<Vec<WeylElement>> {
    let gens: Vec<WeylElement> = (0..rs.rank)
        .map(|k| WeylElement::simple_reflection(rs, k))
        .collect();
    let mut seen: Vec<WeylElement> = vec![WeylElement::identity(rs)];
    let mut frontier = seen.clone();
    while !frontier.is_empty() {
        let mut next = vec![];
        for w in &frontier {
            for g in &gens {
                let c = g.compose(rs, w);
                if !seen.contains(&c) {
                    if seen.len() >= cap {
                        return None;
                    }
                    seen.push(c.clone());
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    Some(seen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a2_basics() {
        let rs = RootSystem::new(Family::A, 2).unwrap();
        assert_eq!(rs.num_roots(), 6);
        assert_eq!(rs.coxeter, 3);
        assert_eq!(rs.cartan_det, 3);
        assert_eq!(rs.degrees, vec![2, 3]);
    }

    #[test]
    fn root_counts_match_degree_sums() {
        for label in ["A1", "A4", "B2", "B4", "C3", "D4", "D5", "E6", "E7"] {
            let rs = RootSystem::from_label(label).unwrap();
            let sum: i64 = rs.degrees.iter().map(|d| d - 1).sum();
            assert_eq!(rs.num_roots() as i64, 2 * sum, "{label}");
        }
    }

    #[test]
    fn long_roots_have_square_two() {
        for label in ["B3", "C3", "D4", "E6"] {
            let rs = RootSystem::from_label(label).unwrap();
            let sq = rs.root_sq(rs.highest_root());
            assert_eq!(sq, rat(2, 1), "{label}");
        }
    }

    #[test]
    fn b2_short_and_long() {
        let rs = RootSystem::from_label("B2").unwrap();
        let squares: Vec<Rat> = (0..rs.n_pos).map(|i| rs.root_sq(i)).collect();
        let longs = squares.iter().filter(|&&s| s == rat(2, 1)).count();
        let shorts = squares.iter().filter(|&&s| s == rat(1, 1)).count();
        assert_eq!((longs, shorts), (2, 2));
    }

    #[test]
    fn center_orders() {
        let cases = [
            ("A3", 4),
            ("B3", 2),
            ("C4", 2),
            ("D4", 4),
            ("D5", 4),
            ("E6", 3),
            ("E7", 2),
        ];
        for (label, order) in cases {
            let rs = RootSystem::from_label(label).unwrap();
            assert_eq!(rs.cartan_det, order, "{label}");
            let cd = center_data(&rs);
            assert_eq!(cd.order, order);
            assert_eq!(cd.invariants.iter().product::<i64>(), order);
        }
        let d4 = RootSystem::from_label("D4").unwrap();
        assert_eq!(center_data(&d4).invariants, vec![2, 2]);
        let d5 = RootSystem::from_label("D5").unwrap();
        assert_eq!(center_data(&d5).invariants, vec![4]);
    }

    #[test]
    fn coweights_are_dual_to_simple_roots() {
        let rs = RootSystem::from_label("C3").unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let mut e = rvec_zero(3);
                e[k] = Rat::one();
                let p = rs.pair(&rs.coweights[j], &e);
                assert_eq!(p, if j == k { rat(1, 1) } else { rat(0, 1) });
            }
        }
    }

    #[test]
    fn weights_dual_to_coroots() {
        let rs = RootSystem::from_label("B3").unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let simple = rs
                    .root_index(&{
                        let mut v = vec![0i64; 3];
                        v[k] = 1;
                        v
                    })
                    .unwrap();
                let p = rs.pairing_with_coroot(&rs.weights[j], simple);
                assert_eq!(p, if j == k { rat(1, 1) } else { rat(0, 1) });
            }
        }
    }

    #[test]
    fn rho_vee_pairs_to_height() {
        let rs = RootSystem::from_label("D4").unwrap();
        for i in 0..rs.num_roots() {
            let h = rs.pair_root(&rs.rho_vee, i);
            assert_eq!(h, Rat::from_integer(rs.height(i)));
        }
    }

    #[test]
    fn weyl_group_b2_has_order_eight() {
        let rs = RootSystem::from_label("B2").unwrap();
        let w = enumerate_weyl(&rs, 100).unwrap();
        assert_eq!(w.len(), 8);
    }

    #[test]
    fn minuscule_nodes_expected() {
        let rs = RootSystem::from_label("D5").unwrap();
        assert_eq!(rs.minuscule_nodes(), vec![1, 4, 5]);
        let rs = RootSystem::from_label("E7").unwrap();
        assert_eq!(rs.minuscule_nodes(), vec![7]);
        let rs = RootSystem::from_label("C4").unwrap();
        assert_eq!(rs.minuscule_nodes(), vec![4]);
        let rs = RootSystem::from_label("B4").unwrap();
        assert_eq!(rs.minuscule_nodes(), vec![1]);
    }
}
