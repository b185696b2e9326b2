//! Matrix exponential by scaling and squaring with the order-13 Padé
//! approximant (Higham 2005). The fixed order keeps the kernel simple;
//! for the matrix sizes used here the extra multiplies are irrelevant and
//! accuracy sits at machine precision after squaring.

use num_complex::Complex;

use super::{eye, lu_solve, norm_1, CMat};
use crate::error::{Result, SchroError};
use crate::float::Real;

/// Padé-13 numerator coefficients.
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Scaling threshold for the order-13 approximant.
const THETA13: f64 = 5.371920351148152;

/// Dense matrix exponential `e^M`.
pub fn expm<T: Real>(m: &CMat<T>) -> Result<CMat<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(SchroError::invalid("expm: matrix must be square"));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SchroError::numerical("expm: non-finite entries"));
    }

    let norm = norm_1(m);
    let mut squarings = 0i32;
    if norm > T::of(THETA13) {
        squarings = (norm / T::of(THETA13)).log2().ceil().to_i32().unwrap_or(i32::MAX);
        if squarings > 60 {
            return Err(SchroError::numerical(format!(
                "expm: norm {norm:e} too large to scale"
            )));
        }
    }
    let scale = Complex::new(T::of(0.5).powi(squarings), T::zero());
    let a = m.mapv(|z| z * scale);

    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let id = eye::<T>(n);

    let c = |k: usize| Complex::new(T::of(B13[k]), T::zero());
    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let u_inner = a6.mapv(|z| z * c(13)) + a4.mapv(|z| z * c(11)) + a2.mapv(|z| z * c(9));
    let u_mid = a6.dot(&u_inner)
        + a6.mapv(|z| z * c(7))
        + a4.mapv(|z| z * c(5))
        + a2.mapv(|z| z * c(3))
        + id.mapv(|z| z * c(1));
    let u = a.dot(&u_mid);
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let v_inner = a6.mapv(|z| z * c(12)) + a4.mapv(|z| z * c(10)) + a2.mapv(|z| z * c(8));
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * c(6))
        + a4.mapv(|z| z * c(4))
        + a2.mapv(|z| z * c(2))
        + id.mapv(|z| z * c(0));

    // Solve (V - U) F = (V + U).
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lu_solve(&lhs, &rhs)?;
    for _ in 0..squarings {
        f = f.dot(&f);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, max_abs};
    use ndarray::array;
    use num_complex::Complex64;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = CMat::<f64>::zeros((3, 3));
        let e = expm(&z).unwrap();
        assert!(max_abs(&(&e - &eye::<f64>(3))) < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let d = array![
            [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.5, 2.0)]
        ];
        let e = expm(&d).unwrap();
        assert!((e[(0, 0)] - Complex64::new(-1.0, 0.0).exp()).norm() < 1e-15);
        assert!((e[(1, 1)] - Complex64::new(0.5, 2.0).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn exp_with_large_norm_scales() {
        // e^(i w t) on a 2x2 rotation generator with a large coefficient.
        let w = 250.0;
        let g = array![
            [Complex64::new(0.0, 0.0), Complex64::new(w, 0.0)],
            [Complex64::new(-w, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let e = expm(&g).unwrap();
        // exp of the antisymmetric generator is a plane rotation by w.
        assert!((e[(0, 0)].re - w.cos()).abs() < 1e-11);
        assert!((e[(0, 1)].re - w.sin()).abs() < 1e-11);
    }

    #[test]
    fn exp_antihermitian_is_unitary() {
        let h = array![
            [Complex64::new(0.3, 0.0), Complex64::new(0.2, -0.7)],
            [Complex64::new(0.2, 0.7), Complex64::new(-1.1, 0.0)]
        ];
        let g = h.mapv(|z| Complex64::new(0.0, -1.0) * z);
        let u = expm(&g).unwrap();
        let gram = adjoint(&u).dot(&u);
        assert!(max_abs(&(&gram - &eye::<f64>(2))) < 1e-14);
    }
}
