//! Small exact-rational linear algebra helpers used by the algebraic layer.

use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rat = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

pub fn rvec_zero(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

pub fn rvec_add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn rvec_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn rvec_scale(a: &[Rat], c: Rat) -> Vec<Rat> {
    a.iter().map(|x| x * c).collect()
}

pub fn rmat_vec(m: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn rmat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![rvec_zero(m); n];
    for i in 0..n {
        for j in 0..m {
            let mut s = Rat::zero();
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn rmat_identity(n: usize) -> Vec<Vec<Rat>> {
    let mut m = vec![rvec_zero(n); n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    m
}

/// Gaussian elimination; returns None if the matrix is singular.
pub fn rmat_inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut inv = rmat_identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * ac;
                    inv[r][j] -= f * ic;
                }
            }
        }
    }
    Some(inv)
}

pub fn rmat_det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = match (col..n).find(|&r| !a[r][col].is_zero()) {
            Some(p) => p,
            None => return Rat::zero(),
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = a[r][col] / p;
                for j in col..n {
                    let ac = a[col][j];
                    a[r][j] -= f * ac;
                }
            }
        }
    }
    det
}

/// Basis of the kernel of m (rows = equations applied to vectors of len cols).
pub fn rmat_kernel(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    if m.is_empty() {
        return vec![];
    }
    let rows = m.len();
    let cols = m[0].len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut pivot_cols = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        if let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) {
            a.swap(r, p);
            let pv = a[r][c];
            for j in 0..cols {
                a[r][j] /= pv;
            }
            for i in 0..rows {
                if i != r && !a[i][c].is_zero() {
                    let f = a[i][c];
                    for j in 0..cols {
                        let rc = a[r][j];
                        a[i][j] -= f * rc;
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
    }
    let mut basis = vec![];
    for c in 0..cols {
        if !pivot_cols.contains(&c) {
            let mut v = rvec_zero(cols);
            v[c] = Rat::one();
            for (ri, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -a[ri][c];
            }
            basis.push(v);
        }
    }
    basis
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// "p/q" or "p" rendering used in JSON reports.
pub fn rat_string(r: Rat) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = vec![
            vec![rat(2, 1), rat(-1, 1), rat(0, 1)],
            vec![rat(-1, 1), rat(2, 1), rat(-1, 1)],
            vec![rat(0, 1), rat(-1, 1), rat(2, 1)],
        ];
        let inv = rmat_inverse(&m).unwrap();
        let id = rmat_mul(&m, &inv);
        assert_eq!(id, rmat_identity(3));
        assert_eq!(rmat_det(&m), rat(4, 1));
    }

    #[test]
    fn kernel_of_projection() {
        // x + y = 0 has kernel spanned by (-1, 1)
        let m = vec![vec![rat(1, 1), rat(1, 1)]];
        let k = rmat_kernel(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![rat(-1, 1), rat(1, 1)]);
    }
}
