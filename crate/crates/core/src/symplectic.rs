//! Symplectic building blocks in the (q_1..q_N, p_1..p_N) ordering.

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

pub type Matrix = DMatrix<f64>;

/// The standard symplectic form J = [[0, I], [-I, 0]].
pub fn symplectic_form(n_modes: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(k, n_modes + k)] = 1.0;
        j[(n_modes + k, k)] = -1.0;
    }
    j
}

/// Phase rotation by `theta` acting on one mode.
pub fn rotation(n_modes: usize, mode: usize, theta: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n_modes, 2 * n_modes);
    let (q, p) = (mode, n_modes + mode);
    let (sn, cs) = theta.sin_cos();
    s[(q, q)] = cs;
    s[(q, p)] = -sn;
    s[(p, q)] = sn;
    s[(p, p)] = cs;
    s
}

/// Single-mode squeezer diag(e^{-r}, e^{r}) on one mode.
pub fn squeezer(n_modes: usize, mode: usize, r: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n_modes, 2 * n_modes);
    s[(mode, mode)] = (-r).exp();
    s[(n_modes + mode, n_modes + mode)] = r.exp();
    s
}

/// Beam splitter with angle `theta` between modes `i` and `j`.
pub fn beam_splitter(n_modes: usize, i: usize, j: usize, theta: f64) -> Matrix {
    let mut s = Matrix::identity(2 * n_modes, 2 * n_modes);
    let (sn, cs) = theta.sin_cos();
    for off in [0, n_modes] {
        let (a, b) = (i + off, j + off);
        s[(a, a)] = cs;
        s[(a, b)] = sn;
        s[(b, a)] = -sn;
        s[(b, b)] = cs;
    }
    s
}

/// Largest entry of |S J S^T - J|.
pub fn symplectic_defect(s: &Matrix) -> f64 {
    let n = s.nrows() / 2;
    let j = symplectic_form(n);
    (s * &j * s.transpose() - j).amax()
}

pub fn is_symplectic(s: &Matrix, tol: f64) -> bool {
    s.is_square() && s.nrows() % 2 == 0 && symplectic_defect(s) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_symplectic() {
        let n = 3;
        let s = rotation(n, 1, 0.7) * squeezer(n, 2, -0.4) * beam_splitter(n, 0, 2, 1.1);
        assert!(is_symplectic(&s, 1e-13));
        assert!((s.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn j_squares_to_minus_identity() {
        let j = symplectic_form(2);
        assert_eq!(&j * &j, -Matrix::identity(4, 4));
    }
}
