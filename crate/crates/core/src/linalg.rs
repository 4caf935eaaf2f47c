//! Jittered Cholesky solves shared by the regression and Fourier fitting code.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

pub const JITTER_START: f64 = 1e-12;
pub const JITTER_MAX: f64 = 1e-6;

/// Cholesky factor of `a + jitter·I` and the jitter that made it succeed.
pub struct Factor<T: ComplexField> {
    pub chol: nalgebra::Cholesky<T, nalgebra::Dyn>,
    pub jitter: f64,
}

/// Tries `a` as is, then adds `1e-12·I`, escalating ×10 up to `1e-6·I`.
pub fn cholesky_with_jitter<T>(a: &DMatrix<T>) -> Result<Factor<T>>
where
    T: ComplexField<RealField = f64>,
{
    if let Some(chol) = a.clone().cholesky() {
        return Ok(Factor { chol, jitter: 0.0 });
    }
    let n = a.nrows();
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] += T::from_real(jitter);
        }
        if let Some(chol) = shifted.cholesky() {
            return Ok(Factor { chol, jitter });
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization(JITTER_MAX))
}

/// Solves `a x = b` for Hermitian positive definite `a`, with two rounds of
/// iterative refinement against the unshifted matrix.
pub fn solve_spd<T>(a: &DMatrix<T>, b: &DVector<T>) -> Result<(DVector<T>, f64)>
where
    T: ComplexField<RealField = f64>,
{
    let f = cholesky_with_jitter(a)?;
    let mut x = f.chol.solve(b);
    if f.jitter == 0.0 {
        for _ in 0..2 {
            let r = b - a * &x;
            x += f.chol.solve(&r);
        }
    }
    Ok((x, f.jitter))
}

/// Ratio of the smallest to the largest squared Cholesky pivot, a cheap
/// lower bound proxy for the reciprocal condition number.
pub fn pivot_ratio<T>(f: &Factor<T>) -> f64
where
    T: ComplexField<RealField = f64>,
{
    let l = f.chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..l.nrows() {
        let p = l[(i, i)].clone().modulus_squared();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}
