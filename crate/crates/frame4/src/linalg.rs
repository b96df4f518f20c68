//! Fixed-size linear algebra for E^4: vectors, 4x4 matrices, antisymmetric
//! coefficient matrices and 3x3 rotations. Everything lives on the stack.

use crate::error::{FrameError, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

/// Orthogonality defect `||R^T R - I||_inf` guaranteed by [`mat_exp`].
pub const EXP_ORTHO_TOL: f64 = 1e-12;
/// Orthogonality defect guaranteed by [`reorthonormalize`].
pub const REORTH_TOL: f64 = 1e-13;
/// Default Gram-Schmidt pivot threshold below which rows count as dependent.
pub const GS_PIVOT_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Vec4
// ---------------------------------------------------------------------------

/// A vector in R^4.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec4(pub [f64; 4]);

impl Vec4 {
    pub const ZERO: Vec4 = Vec4([0.0; 4]);

    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Vec4([x, y, z, w])
    }

    /// Standard basis vector `e_i`.
    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Vec4(v)
    }

    pub fn dot(&self, other: &Vec4) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, k: f64) -> Vec4 {
        Vec4([self.0[0] * k, self.0[1] * k, self.0[2] * k, self.0[3] * k])
    }

    pub fn normalized(&self) -> Vec4 {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4([self[0] + o[0], self[1] + o[1], self[2] + o[2], self[3] + o[3]])
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        for i in 0..4 {
            self.0[i] += o.0[i];
        }
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4([self[0] - o[0], self[1] - o[1], self[2] - o[2], self[3] - o[3]])
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, k: f64) -> Vec4 {
        self.scale(k)
    }
}

/// Orientation-completing product: the unique `w` with
/// `det(rows a, b, c, w) = |w|^2 > 0`, i.e. the 4D analogue of the cross
/// product via cofactor expansion along the last row.
pub fn cross4(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    let minor = |c0: usize, c1: usize, c2: usize| -> f64 {
        a[c0] * (b[c1] * c[c2] - b[c2] * c[c1]) - a[c1] * (b[c0] * c[c2] - b[c2] * c[c0])
            + a[c2] * (b[c0] * c[c1] - b[c1] * c[c0])
    };
    // cofactors of the last row of [a; b; c; x]
    Vec4([
        -minor(1, 2, 3),
        minor(0, 2, 3),
        -minor(0, 1, 3),
        minor(0, 1, 2),
    ])
}

// ---------------------------------------------------------------------------
// Mat4
// ---------------------------------------------------------------------------

/// A 4x4 matrix, row major. Frames store their vectors as rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    pub fn row(&self, i: usize) -> Vec4 {
        Vec4(self.0[i])
    }

    pub fn set_row(&mut self, i: usize, v: Vec4) {
        self.0[i] = v.0;
    }

    pub fn col(&self, j: usize) -> Vec4 {
        Vec4([self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]])
    }

    pub fn from_rows(r0: Vec4, r1: Vec4, r2: Vec4, r3: Vec4) -> Mat4 {
        Mat4([r0.0, r1.0, r2.0, r3.0])
    }

    pub fn transpose(&self) -> Mat4 {
        let mut t = [[0.0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                t[j][i] = x;
            }
        }
        Mat4(t)
    }

    pub fn scale(&self, k: f64) -> Mat4 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= k;
            }
        }
        m
    }

    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// `||Z^T Z - I||_inf`, the orthogonality defect.
    pub fn ortho_defect(&self) -> f64 {
        let g = self.transpose() * *self;
        let mut d = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                d = d.max((g.0[i][j] - target).abs());
            }
        }
        d
    }

    pub fn det(&self) -> f64 {
        let w = cross4(&self.row(0), &self.row(1), &self.row(2));
        w.dot(&self.row(3))
    }

    /// Apply the matrix to a column vector: `M v`.
    pub fn mul_vec(&self, v: &Vec4) -> Vec4 {
        Vec4([
            self.row(0).dot(v),
            self.row(1).dot(v),
            self.row(2).dot(v),
            self.row(3).dot(v),
        ])
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, o: Mat4) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a != 0.0 {
                    for j in 0..4 {
                        m[i][j] += a * o.0[k][j];
                    }
                }
            }
        }
        Mat4(m)
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, o: Mat4) -> Mat4 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, o: Mat4) -> Mat4 {
        let mut m = self;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] -= o.0[i][j];
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Skew4
// ---------------------------------------------------------------------------

/// An antisymmetric 4x4 matrix; the coefficient-matrix space so(4).
///
/// Stored as the six independent upper-triangle entries in row-major order
/// `(0,1) (0,2) (0,3) (1,2) (1,3) (2,3)` so antisymmetry holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Skew4 {
    pub upper: [f64; 6],
}

/// Upper-triangle index pairs in catalog order.
pub const UPPER_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl Skew4 {
    pub const ZERO: Skew4 = Skew4 { upper: [0.0; 6] };

    pub fn from_upper(upper: [f64; 6]) -> Self {
        Skew4 { upper }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = UPPER_PAIRS.iter().position(|&p| p == (a, b)).unwrap();
        sign * self.upper[k]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i != j);
        let (a, b, val) = if i < j { (i, j, v) } else { (j, i, -v) };
        let k = UPPER_PAIRS.iter().position(|&p| p == (a, b)).unwrap();
        self.upper[k] = val;
    }

    pub fn to_mat(&self) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (k, &(i, j)) in UPPER_PAIRS.iter().enumerate() {
            m[i][j] = self.upper[k];
            m[j][i] = -self.upper[k];
        }
        Mat4(m)
    }

    pub fn scale(&self, k: f64) -> Skew4 {
        let mut u = self.upper;
        for x in u.iter_mut() {
            *x *= k;
        }
        Skew4 { upper: u }
    }

    pub fn norm_inf(&self) -> f64 {
        self.upper.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Conjugate by a permutation of indices 1..3: returns `P X P^T` where
    /// `P` permutes rows so that new row k is old row `perm[k]` (index 0 fixed).
    pub fn permute(&self, perm: &[usize; 3]) -> Skew4 {
        let full = [0, perm[0], perm[1], perm[2]];
        let mut out = Skew4::ZERO;
        for &(i, j) in UPPER_PAIRS.iter() {
            out.set(i, j, self.get(full[i], full[j]));
        }
        out
    }
}

impl Add for Skew4 {
    type Output = Skew4;
    fn add(self, o: Skew4) -> Skew4 {
        let mut u = self.upper;
        for (x, y) in u.iter_mut().zip(o.upper.iter()) {
            *x += y;
        }
        Skew4 { upper: u }
    }
}

/// Project a matrix onto so(4): `(M - M^T)/2`.
pub fn antisymmetrize(m: &Mat4) -> Skew4 {
    let mut s = Skew4::ZERO;
    for (k, &(i, j)) in UPPER_PAIRS.iter().enumerate() {
        s.upper[k] = 0.5 * (m.0[i][j] - m.0[j][i]);
    }
    s
}

// ---------------------------------------------------------------------------
// Mat3
// ---------------------------------------------------------------------------

/// A 3x3 matrix; hosts the O(3) blocks that act on the normal space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let mut t = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[j][i] = self.0[i][j];
            }
        }
        Mat3(t)
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = self.0[i][0] * v[0] + self.0[i][1] * v[1] + self.0[i][2] * v[2];
        }
        out
    }

    pub fn ortho_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut g = 0.0;
                for k in 0..3 {
                    g += self.0[k][i] * self.0[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                d = d.max((g - target).abs());
            }
        }
        d
    }

    /// Embed as the normal-space block: `diag(1, Q)`.
    pub fn embed(&self) -> Mat4 {
        let mut m = Mat4::IDENTITY;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i + 1][j + 1] = self.0[i][j];
            }
        }
        m
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] += self.0[i][k] * o.0[k][j];
                }
            }
        }
        Mat3(m)
    }
}

/// Rotation in SO(3) mapping the unit vector `from` onto the unit vector `to`
/// (Rodrigues construction; falls back to a half-turn for antipodal input).
pub fn rotation_between(from: &[f64; 3], to: &[f64; 3]) -> Mat3 {
    let v = [
        from[1] * to[2] - from[2] * to[1],
        from[2] * to[0] - from[0] * to[2],
        from[0] * to[1] - from[1] * to[0],
    ];
    let s2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let c = from[0] * to[0] + from[1] * to[1] + from[2] * to[2];
    if s2 < 1e-24 {
        if c > 0.0 {
            return Mat3::IDENTITY;
        }
        // antipodal: rotate pi about any axis orthogonal to `from`
        let axis = if from[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let mut u = [
            axis[1] * from[2] - axis[2] * from[1],
            axis[2] * from[0] - axis[0] * from[2],
            axis[0] * from[1] - axis[1] * from[0],
        ];
        let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        for x in u.iter_mut() {
            *x /= n;
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = 2.0 * u[i] * u[j] - if i == j { 1.0 } else { 0.0 };
            }
        }
        return Mat3(m);
    }
    let k = (1.0 - c) / s2;
    let vx = Mat3([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ]);
    let vx2 = vx * vx;
    let mut m = Mat3::IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] += vx.0[i][j] + k * vx2.0[i][j];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

/// `exp(s X)` by scaling and squaring with a Pade(6,6) core.
///
/// For antisymmetric input the diagonal Pade approximant is itself orthogonal,
/// so the result sits in SO(4) to machine precision.
pub fn mat_exp(x: &Skew4, s: f64) -> Mat4 {
    let a0 = x.to_mat().scale(s);
    let norm = a0.norm_inf();
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let a = a0.scale(0.5f64.powi(k as i32));

    // Pade(6,6): b = [1, 1/2, 5/44, 1/66, 1/792, 1/15840, 1/665280]
    const B: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    // U = A (b1 I + b3 A^2 + b5 A^4), V = b0 I + b2 A^2 + b4 A^4 + b6 A^6
    let u_inner = Mat4::IDENTITY.scale(B[1]) + a2.scale(B[3]) + a4.scale(B[5]);
    let u = a * u_inner;
    let v = Mat4::IDENTITY.scale(B[0]) + a2.scale(B[2]) + a4.scale(B[4]) + a6.scale(B[6]);
    // solve (V - U) R = (V + U)
    let mut r = solve4(&(v - u), &(v + u));
    for _ in 0..k {
        r = r * r;
    }
    r
}

/// Solve `A X = B` for 4x4 matrices by Gaussian elimination with partial pivoting.
fn solve4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[0.0f64; 8]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a.0[i]);
        m[i][4..].copy_from_slice(&b.0[i]);
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&r1, &r2| m[r1][col].abs().total_cmp(&m[r2][col].abs()))
            .unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for j in col..8 {
            m[col][j] /= d;
        }
        for row in 0..4 {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for j in col..8 {
                        m[row][j] -= f * m[col][j];
                    }
                }
            }
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        out[i].copy_from_slice(&m[i][4..]);
    }
    Mat4(out)
}

// ---------------------------------------------------------------------------
// Re-orthonormalization
// ---------------------------------------------------------------------------

/// Row-wise modified Gram-Schmidt anchored at row 0, so the first row keeps
/// its direction exactly (it is only rescaled). Two projection passes per row.
pub fn reorthonormalize(z: &Mat4) -> Result<Mat4> {
    reorthonormalize_with(z, GS_PIVOT_TOL)
}

/// Same as [`reorthonormalize`] with an explicit pivot threshold.
pub fn reorthonormalize_with(z: &Mat4, pivot_tol: f64) -> Result<Mat4> {
    let mut rows = [z.row(0), z.row(1), z.row(2), z.row(3)];
    for i in 0..4 {
        for _pass in 0..2 {
            for j in 0..i {
                let p = rows[i].dot(&rows[j]);
                rows[i] = rows[i] - rows[j].scale(p);
            }
        }
        let n = rows[i].norm();
        if n < pivot_tol {
            return Err(FrameError::DegenerateRows { row: i, pivot: n });
        }
        rows[i] = rows[i].scale(1.0 / n);
    }
    Ok(Mat4::from_rows(rows[0], rows[1], rows[2], rows[3]))
}

// ---------------------------------------------------------------------------
// Symmetric 4x4 eigen decomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) and row-stored eigenvectors of a symmetric 4x4
/// matrix via cyclic Jacobi sweeps.
pub fn sym_eigen(m: &Mat4) -> ([f64; 4], Mat4) {
    let mut a = m.0;
    let mut v = Mat4::IDENTITY.0;
    for _sweep in 0..32 {
        let mut off = 0.0f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                off = off.max(a[i][j].abs());
            }
        }
        if off < 1e-15 {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                if a[p][q].abs() < 1e-18 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut vals = [0.0; 4];
    let mut vecs = [[0.0; 4]; 4];
    for (k, &i) in order.iter().enumerate() {
        vals[k] = a[i][i];
        for r in 0..4 {
            vecs[k][r] = v[r][i];
        }
    }
    (vals, Mat4(vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper_type_c() -> Skew4 {
        // upper entries (0,1)=2, (0,2)=1, (1,3)=1
        Skew4::from_upper([2.0, 1.0, 0.0, 0.0, 1.0, 0.0])
    }

    /// Truncated Taylor series oracle, valid for small ||sX||.
    fn exp_taylor(x: &Skew4, s: f64) -> Mat4 {
        let a = x.to_mat().scale(s);
        let mut term = Mat4::IDENTITY;
        let mut sum = Mat4::IDENTITY;
        for k in 1..=30 {
            term = term * a;
            term = term.scale(1.0 / k as f64);
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn exp_zero_is_identity() {
        let r = mat_exp(&Skew4::ZERO, 1.7);
        assert!((r - Mat4::IDENTITY).norm_inf() == 0.0);
    }

    #[test]
    fn exp_matches_taylor_oracle() {
        let x = Skew4::from_upper([0.31, -0.42, 0.11, 0.73, -0.25, 0.57]);
        let r = mat_exp(&x, 0.37);
        let t = exp_taylor(&x, 0.37);
        assert!((r - t).norm_inf() < 1e-12, "defect {}", (r - t).norm_inf());
    }

    #[test]
    fn exp_is_orthogonal_special() {
        let x = paper_type_c();
        for &s in &[0.0, 0.5, 1.0, 2.0, 4.0, -3.0, 11.0] {
            let r = mat_exp(&x, s);
            assert!(r.ortho_defect() <= EXP_ORTHO_TOL, "s={s} defect {}", r.ortho_defect());
            assert!(r.det() > 0.0);
        }
    }

    #[test]
    fn exp_group_law() {
        let x = Skew4::from_upper([1.2, -0.8, 0.44, 0.91, -1.5, 0.33]);
        for &(s, t) in &[(0.3, 0.9), (-1.7, 2.0), (2.0, -2.0), (1.99, 1.99)] {
            let lhs = mat_exp(&x, s) * mat_exp(&x, t);
            let rhs = mat_exp(&x, s + t);
            assert!((lhs - rhs).norm_inf() < 1e-11);
        }
    }

    #[test]
    fn exp_derivative_matches_x_exp() {
        let x = Skew4::from_upper([0.9, 0.2, -0.6, 1.1, 0.05, -0.4]);
        let s0 = 0.77;
        let h = 1e-5;
        let num = (mat_exp(&x, s0 + h) - mat_exp(&x, s0 - h)).scale(1.0 / (2.0 * h));
        let exact = x.to_mat() * mat_exp(&x, s0);
        assert!((num - exact).norm_inf() < 1e-8);
    }

    #[test]
    fn reorth_fixes_orthogonal() {
        let z = mat_exp(&paper_type_c(), 1.3);
        let r = reorthonormalize(&z).unwrap();
        assert!((r - z).norm_inf() < 1e-13);
    }

    #[test]
    fn reorth_idempotent() {
        let mut z = mat_exp(&paper_type_c(), 0.9);
        for i in 0..4 {
            for j in 0..4 {
                z.0[i][j] += 1e-4 * ((i * 4 + j) as f64).sin();
            }
        }
        let r1 = reorthonormalize(&z).unwrap();
        let r2 = reorthonormalize(&r1).unwrap();
        assert!((r1 - r2).norm_inf() < 1e-12);
        assert!(r1.ortho_defect() <= REORTH_TOL);
    }

    #[test]
    fn reorth_near_identity_matches_polar_oracle() {
        // Z = I + 1e-4 * E (all ones)
        let mut z = Mat4::IDENTITY;
        for i in 0..4 {
            for j in 0..4 {
                z.0[i][j] += 1e-4;
            }
        }
        let r = reorthonormalize(&z).unwrap();
        assert!((r - z).norm_inf() < 5e-4);

        // independent polar-decomposition oracle: Q = Z (Z^T Z)^{-1/2}
        // via Newton iteration for the inverse square root.
        let g = z.transpose() * z;
        let mut y = g;
        let mut w = Mat4::IDENTITY;
        for _ in 0..40 {
            // coupled Newton iteration for matrix square root: Y -> sqrt(G), W -> G^{-1/2}
            let y_next = (y + invert4(&w)).scale(0.5);
            let w_next = (w + invert4(&y)).scale(0.5);
            y = y_next;
            w = w_next;
        }
        let q = z * w;
        assert!(q.ortho_defect() < 1e-10);
        // row 0 direction is preserved by our MGS, so compare against the polar
        // factor loosely (both are within O(perturbation) of Z).
        assert!((r - q).norm_inf() < 1e-3);
    }

    fn invert4(m: &Mat4) -> Mat4 {
        super::solve4(m, &Mat4::IDENTITY)
    }

    #[test]
    fn reorth_rejects_identical_rows() {
        let z = Mat4::from_rows(
            Vec4::new(1.0, 0.0, 0.0, 0.0),
            Vec4::new(1.0, 0.0, 0.0, 0.0),
            Vec4::basis(2),
            Vec4::basis(3),
        );
        match reorthonormalize(&z) {
            Err(FrameError::DegenerateRows { .. }) => {}
            other => panic!("expected DegenerateRows, got {other:?}"),
        }
    }

    #[test]
    fn reorth_preserves_row0_direction() {
        let mut z = mat_exp(&paper_type_c(), 2.2);
        z.0[1][2] += 3e-3;
        z.0[3][0] -= 2e-3;
        let r0 = z.row(0).normalized();
        let r = reorthonormalize(&z).unwrap();
        assert!((r.row(0) - r0).norm_inf() < 1e-15);
    }

    #[test]
    fn antisymmetrize_splits_parts() {
        let sym = Mat4([
            [1.0, 2.0, 3.0, 4.0],
            [2.0, 5.0, 6.0, 7.0],
            [3.0, 6.0, 8.0, 9.0],
            [4.0, 7.0, 9.0, 0.5],
        ]);
        let skew = Skew4::from_upper([0.3, -0.7, 1.1, 0.2, -0.9, 0.4]);
        assert_eq!(antisymmetrize(&sym).norm_inf(), 0.0);
        let m = sym + skew.to_mat();
        let a = antisymmetrize(&m);
        for k in 0..6 {
            assert_abs_diff_eq!(a.upper[k], skew.upper[k], epsilon = 1e-15);
        }
        let back = antisymmetrize(&skew.to_mat());
        for k in 0..6 {
            assert_abs_diff_eq!(back.upper[k], skew.upper[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn cross4_orientation() {
        let a = Vec4::basis(0);
        let b = Vec4::basis(1);
        let c = Vec4::basis(2);
        let w = cross4(&a, &b, &c);
        let m = Mat4::from_rows(a, b, c, w);
        assert!(m.det() > 0.0);
        assert_abs_diff_eq!(w.dot(&a), 0.0);
        assert_abs_diff_eq!(w.dot(&b), 0.0);
        assert_abs_diff_eq!(w.dot(&c), 0.0);
    }

    #[test]
    fn sym_eigen_recovers_spectrum() {
        // diag(1, 2, 3, 4) conjugated by a rotation
        let r = mat_exp(&Skew4::from_upper([0.4, -0.2, 0.9, 0.1, 0.6, -0.5]), 1.0);
        let d = Mat4([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 2.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 0.0],
            [0.0, 0.0, 0.0, 4.0],
        ]);
        let m = r.transpose() * d * r;
        let (vals, vecs) = sym_eigen(&m);
        for (k, expect) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_abs_diff_eq!(vals[k], *expect, epsilon = 1e-12);
        }
        // eigenvector property: M v = lambda v
        for k in 0..4 {
            let v = vecs.row(k);
            let mv = m.mul_vec(&v);
            assert!((mv - v.scale(vals[k])).norm_inf() < 1e-10);
        }
    }

    #[test]
    fn rotation_between_maps_vectors() {
        let cases = [
            ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            ([0.0, 0.0, 1.0], [0.0, 1.0, 0.0]),
            ([0.6, 0.8, 0.0], [0.0, 0.0, 1.0]),
            ([0.0, 1.0, 0.0], [0.0, 1.0, 0.0]),
            ([0.0, -1.0, 0.0], [0.0, 1.0, 0.0]),
        ];
        for (from, to) in cases {
            let q = rotation_between(&from, &to);
            assert!(q.ortho_defect() < 1e-14);
            let img = q.mul_vec(&from);
            for i in 0..3 {
                assert_abs_diff_eq!(img[i], to[i], epsilon = 1e-12);
            }
        }
    }
}
