use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tomo::Image;

#[derive(Debug, Clone)]
pub struct CgOutcome<T> {
    pub x: Image<T>,
    pub iterations: usize,
    /// Final `||A x - b|| / ||b||` (absolute residual when `b = 0`).
    pub residual: T,
    /// Relative residual before the first and after every iteration.
    pub history: Vec<T>,
}

impl<T: Real> CgOutcome<T> {
    pub fn converged(&self, tol: T) -> bool {
        self.residual <= tol
    }
}

/// Krylov solver for a symmetric positive (semi-)definite operator.
///
/// Uses the conjugate-residual recurrence, which minimises `||b - A x||`
/// over the Krylov space, so the residual history never increases.
/// Stops once `||A x - b|| / ||b|| <= tol` or after `max_iter` iterations.
pub fn cg_solve<T, F>(
    mut apply_a: F,
    b: &Image<T>,
    x0: &Image<T>,
    tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>>
where
    T: Real,
    F: FnMut(&Image<T>) -> Result<Image<T>>,
{
    let b_norm = b.norm();
    let denom = if b_norm > T::zero() { b_norm } else { T::one() };
    let mut x = x0.clone();
    let mut r = b.sub(&apply_a(&x)?);
    let mut res = r.norm();
    let mut history = vec![res / denom];
    if !res.is_finite() {
        return Err(Error::Numerical {
            step: 0,
            what: "non-finite initial residual".into(),
        });
    }
    let mut iterations = 0;
    if max_iter == 0 || res / denom <= tol {
        return Ok(CgOutcome {
            x,
            iterations,
            residual: res / denom,
            history,
        });
    }
    let mut ar = apply_a(&r)?;
    let mut rar = r.dot(&ar);
    let mut p = r.clone();
    let mut ap = ar.clone();
    while iterations < max_iter && res / denom > tol {
        let apap = ap.dot(&ap);
        if rar <= T::zero() || apap <= T::zero() {
            // breakdown: the residual has no component left in the range of A
            break;
        }
        let alpha = rar / apap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        iterations += 1;
        res = r.norm();
        if !res.is_finite() || !alpha.is_finite() {
            return Err(Error::Numerical {
                step: iterations,
                what: "non-finite CG residual".into(),
            });
        }
        history.push(res / denom);
        if res / denom <= tol || iterations == max_iter {
            break;
        }
        ar = apply_a(&r)?;
        let rar_new = r.dot(&ar);
        let beta = rar_new / rar;
        rar = rar_new;
        p = r.zip_map(&p, |ri, pi| ri + beta * pi);
        ap = ar.zip_map(&ap, |a, b| a + beta * b);
    }
    Ok(CgOutcome {
        x,
        iterations,
        residual: res / denom,
        history,
    })
}
