//! Elementary symmetric functions of the shape operator and the Newton
//! transformations.
//!
//! With `det(tI − A) = Σ_k (−1)^k S_k t^{n−k}`, `S_k = σ_k(λ_1, …, λ_n)`.
//! Normalized: `C(n,r) H_r = (−1)^r S_r`. Newton: `P_0 = I`,
//! `P_r = (−1)^r S_r I + A P_{r−1}`; `P_n = 0` by Cayley-Hamilton.

use crate::linalg::{symmetric_eigen, Mat};
use crate::scalar::Scalar;
use serde::Serialize;

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// `b_r = (n − r) C(n, r)`.
pub fn b_r(n: usize, r: usize) -> f64 {
    ((n - r) as u64 * binomial(n, r)) as f64
}

/// Both integer definitions of `b_r` agree: `(n−r)C(n,r) = (r+1)C(n,r+1)`.
pub fn b_r_consistent(n: usize, r: usize) -> bool {
    (n - r) as u64 * binomial(n, r) == (r + 1) as u64 * binomial(n, r + 1)
}

/// `S_0, …, S_n` by Faddeev-LeVerrier.
pub fn elementary<S: Scalar>(a: &Mat<S>) -> Vec<S> {
    let n = a.rows();
    let mut s = vec![S::one()];
    let mut m = Mat::zeros(n, n);
    let mut c_prev = S::one();
    for k in 1..=n {
        // M_k = A M_{k−1} + c_{k−1} I ; c_k = −tr(A M_k)/k
        m = a.matmul(&m).add(&Mat::identity(n).scale(c_prev));
        let c = -a.matmul(&m).trace() / k as f64;
        s.push(if k % 2 == 0 { c } else { -c });
        c_prev = c;
    }
    s
}

/// `H_1, …, H_n` from `S_0, …, S_n` (index 0 holds `H_0 = 1`).
pub fn mean_curvatures<S: Scalar>(s: &[S]) -> Vec<S> {
    let n = s.len() - 1;
    (0..=n)
        .map(|r| {
            let v = s[r] / binomial(n, r) as f64;
            if r % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// `P_0, …, P_n`.
pub fn newton_transforms<S: Scalar>(a: &Mat<S>, s: &[S]) -> Vec<Mat<S>> {
    let n = a.rows();
    let mut p = vec![Mat::identity(n)];
    for r in 1..=n {
        let sign = if r % 2 == 0 { s[r] } else { -s[r] };
        let next = Mat::identity(n).scale(sign).add(&a.matmul(&p[r - 1]));
        p.push(next);
    }
    p
}

/// `σ_r` of a list of numbers (direct subset expansion via the generating
/// polynomial).
pub fn sigma(values: &[f64], r: usize) -> f64 {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e.get(r).copied().unwrap_or(0.0)
}

/// Per-point curvature bundle; matrices are expressed in an orthonormal
/// tangent frame, so `A` is symmetric.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureInvariants {
    pub n: usize,
    #[serde(skip)]
    pub a: Mat<f64>,
    /// `A` in the coordinate frame `dx(∂_i)`.
    #[serde(skip)]
    pub a_coord: Mat<f64>,
    #[serde(skip)]
    pub induced: Mat<f64>,
    pub eigenvalues: Vec<f64>,
    pub s: Vec<f64>,
    pub h: Vec<f64>,
    #[serde(skip)]
    pub p: Vec<Mat<f64>>,
    /// `sup |A − Aᵀ|` before symmetrization (self-adjointness check).
    pub self_adjoint_residual: f64,
}

impl CurvatureInvariants {
    pub fn from_symmetric(a: Mat<f64>, self_adjoint_residual: f64) -> CurvatureInvariants {
        let n = a.rows();
        let s = elementary(&a);
        let h = mean_curvatures(&s);
        let p = newton_transforms(&a, &s);
        let eigenvalues = crate::linalg::symmetric_eigenvalues(&a);
        CurvatureInvariants {
            n,
            a_coord: a.clone(),
            induced: Mat::identity(n),
            a,
            eigenvalues,
            s,
            h,
            p,
            self_adjoint_residual,
        }
    }

    /// `H = H_1`, so `nH = −tr A`.
    pub fn mean_curvature(&self) -> f64 {
        self.h[1]
    }

    /// `|A|² = tr A²`.
    pub fn norm_sq(&self) -> f64 {
        self.a.matmul(&self.a).trace()
    }

    /// `sup |A − (tr A / n) I|`.
    pub fn umbilicity_residual(&self) -> f64 {
        let m = self.a.trace() / self.n as f64;
        let d = self.a.sub(&Mat::identity(self.n).scale(m));
        crate::linalg::max_abs(&d)
    }
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct NewtonReport {
    /// `|S_r − σ_r(λ)|`.
    pub char_poly_vs_sigma: f64,
    pub p_n_zero: f64,
    /// `tr P_r = (−1)^r (n−r) S_r = b_r H_r`.
    pub trace_i: f64,
    /// `tr(A P_r) = (−1)^r (r+1) S_{r+1} = −b_r H_{r+1}`.
    pub trace_ii: f64,
    /// `tr(A² P_r) = (−1)^r (S_1 S_{r+1} − (r+2) S_{r+2})`.
    pub trace_iii: f64,
    /// `P_r e_i = (−1)^r S_r(A_i) e_i` for eigenvectors `e_i`.
    pub eigen: f64,
    pub symmetry: f64,
    pub commute: f64,
    pub b_r_integer_consistent: bool,
}

impl NewtonReport {
    pub fn max(&self) -> f64 {
        [
            self.char_poly_vs_sigma,
            self.p_n_zero,
            self.trace_i,
            self.trace_ii,
            self.trace_iii,
            self.eigen,
            self.symmetry,
            self.commute,
        ]
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b))
    }
}

fn sgn(r: usize) -> f64 {
    if r % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Residuals of the Newton-transformation identities. Relative to the scale
/// `max(1, |A|_max)^{r+2}` so random matrices of any size are comparable.
pub fn newton_identities_check(inv: &CurvatureInvariants) -> NewtonReport {
    let n = inv.n;
    let a = &inv.a;
    let s = &inv.s;
    let h = &inv.h;
    let (lam, vecs) = symmetric_eigen(a);
    let scale = crate::linalg::max_abs(a).max(1.0);
    let mut rep = NewtonReport { b_r_integer_consistent: true, ..Default::default() };
    let s_at = |k: usize| if k <= n { s[k] } else { 0.0 };
    for r in 0..=n {
        let rel = scale.powi(r as i32 + 2);
        rep.char_poly_vs_sigma =
            rep.char_poly_vs_sigma.max((s[r] - sigma(&lam, r)).abs() / scale.powi(r as i32));
        let p = &inv.p[r];
        rep.symmetry = rep.symmetry.max(crate::linalg::max_abs(&p.sub(&p.transpose())) / rel);
        rep.commute =
            rep.commute.max(crate::linalg::max_abs(&p.matmul(a).sub(&a.matmul(p))) / rel);
        if r == n {
            rep.p_n_zero = crate::linalg::max_abs(p) / rel;
            continue;
        }
        let br = b_r(n, r);
        rep.b_r_integer_consistent &= b_r_consistent(n, r);
        let tr_p = p.trace();
        rep.trace_i = rep
            .trace_i
            .max((tr_p - sgn(r) * (n - r) as f64 * s[r]).abs() / rel)
            .max((tr_p - br * h[r]).abs() / rel);
        let tr_ap = a.matmul(p).trace();
        rep.trace_ii = rep
            .trace_ii
            .max((tr_ap - sgn(r) * (r + 1) as f64 * s[r + 1]).abs() / rel)
            .max((tr_ap + br * h[r + 1]).abs() / rel);
        let tr_a2p = a.matmul(a).matmul(p).trace();
        rep.trace_iii = rep
            .trace_iii
            .max((tr_a2p - sgn(r) * (s[1] * s[r + 1] - (r + 2) as f64 * s_at(r + 2))).abs() / rel);
        for i in 0..n {
            let rest: Vec<f64> = lam.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            let want = sgn(r) * sigma(&rest, r);
            let e = vecs.column(i);
            let pe = p.matvec(&e);
            for k in 0..n {
                rep.eigen = rep.eigen.max((pe[k] - want * e[k]).abs() / rel);
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_example() {
        let a = Mat::diag(&[1.0, 2.0]);
        let inv = CurvatureInvariants::from_symmetric(a, 0.0);
        assert_eq!(inv.s, vec![1.0, 3.0, 2.0]);
        assert!((inv.h[1] + 1.5).abs() < 1e-15);
        assert!((inv.h[2] - 2.0).abs() < 1e-15);
        let p1 = &inv.p[1];
        assert!((p1[(0, 0)] + 2.0).abs() < 1e-15 && (p1[(1, 1)] + 1.0).abs() < 1e-15);
        assert!((p1.trace() - b_r(2, 1) * inv.h[1]).abs() < 1e-15);
        assert_eq!(b_r(2, 1), 2.0);
        assert!(crate::linalg::max_abs(&inv.p[2]) < 1e-15);
        assert!(newton_identities_check(&inv).max() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 4), 0);
        for n in 1..12 {
            for r in 0..n {
                assert!(b_r_consistent(n, r));
            }
        }
    }

    #[test]
    fn sigma_matches_subsets() {
        let v = [1.5, -2.0, 0.5];
        assert!((sigma(&v, 1) - 0.0).abs() < 1e-15);
        assert!((sigma(&v, 2) - (1.5 * -2.0 + 1.5 * 0.5 + -2.0 * 0.5)).abs() < 1e-15);
        assert!((sigma(&v, 3) - 1.5 * -2.0 * 0.5).abs() < 1e-15);
    }
}
