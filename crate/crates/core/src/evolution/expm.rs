use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub const EXPM_MAX_DIM: usize = 2000;
/// Largest 1-norm for which the degree-13 Padé approximant meets unit roundoff.
const THETA13: f64 = 5.371920351148152;
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: &DMatrix<Complex64>) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// e^{A} by scaling and squaring with the [13/13] Padé approximant.
pub fn expm(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LabError::ShapeMismatch("matrix must be square".into()));
    }
    if n > EXPM_MAX_DIM {
        return Err(LabError::InvalidParameter(format!("dimension {n} exceeds {EXPM_MAX_DIM}")));
    }
    let nrm = norm1(a);
    if !nrm.is_finite() {
        return Err(LabError::InvalidParameter("matrix has non-finite entries".into()));
    }
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * Complex64::new(2f64.powi(-s), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let c = |k: usize| Complex64::new(B[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9));
    let u = &a * (inner_u + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1));
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| LabError::SingularSystem("Padé denominator is singular".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// e^{t·A}U0.
pub fn matrix_exponential_oracle(gen: &DMatrix<Complex64>, u0: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    if u0.len() != gen.nrows() {
        return Err(LabError::ShapeMismatch("state does not match the generator".into()));
    }
    let e = expm(&(gen * Complex64::new(t, 0.0)))?;
    Ok((e * DVector::from_column_slice(u0)).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_generator_is_identity() {
        let g = DMatrix::<Complex64>::zeros(3, 3);
        let u0 = [c(1.0), c(-2.0), Complex64::new(0.0, 3.0)];
        assert_eq!(matrix_exponential_oracle(&g, &u0, 1.0).unwrap(), u0.to_vec());
    }

    #[test]
    fn diagonal() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-1.0), c(-2.0)]));
        let u = matrix_exponential_oracle(&g, &[c(1.0), c(1.0)], 1.0).unwrap();
        assert!((u[0] - (-1f64).exp()).norm() < 1e-15);
        assert!((u[1] - (-2f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn nilpotent() {
        let g = DMatrix::from_row_slice(2, 2, &[c(0.0), c(3.0), c(0.0), c(0.0)]);
        let e = expm(&g).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(1.0), c(3.0), c(0.0), c(1.0)]);
        assert!((e - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn large_norm_uses_squaring() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![c(-30.0), Complex64::new(-1.0, 20.0)]));
        let e = expm(&g).unwrap();
        assert!((e[(0, 0)] - (-30f64).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - Complex64::new(-1.0, 20.0).exp()).norm() < 1e-12);
    }

    #[test]
    fn dimension_cap() {
        let g = DMatrix::<Complex64>::zeros(EXPM_MAX_DIM + 1, EXPM_MAX_DIM + 1);
        assert!(expm(&g).is_err());
    }
}
