//! Weighted least squares on small dense systems.
//!
//! Systems are whitened (so that `ÃᵀÃ = AᵀWA`), column-equilibrated and solved
//! through a thin SVD. Inverses that appear in the normal-equation formulas
//! are never formed; weights are normally supplied as a covariance factor.

use alloc::format;
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Largest accepted condition number of the equilibrated normal matrix.
pub const MAX_NORMAL_CONDITION: f64 = 1e12;

/// How the weight matrix `W` of `(b − Ay)ᵀ W (b − Ay)` is supplied.
#[derive(Debug, Clone, Copy)]
pub enum Weighting<'a> {
    /// `W = I`.
    Identity,
    /// `W` given explicitly; must be symmetric positive definite.
    Weight(&'a DMatrix<f64>),
    /// `W = C⁻¹` for a symmetric positive definite residual covariance `C`.
    Covariance(&'a DMatrix<f64>),
    /// `W = (F Fᵀ)⁻¹` for a nonsingular square factor `F`.
    CovarianceFactor(&'a DMatrix<f64>),
    /// `W = diag(d)⁻¹` with `d > 0`.
    DiagonalVariance(&'a DVector<f64>),
}

#[derive(Debug, Clone)]
pub struct WlsSolution {
    pub solution: DVector<f64>,
    /// `(AᵀWA)⁻¹`.
    pub covariance: DMatrix<f64>,
    /// `S` with `covariance = S Sᵀ`.
    pub covariance_factor: DMatrix<f64>,
    /// Condition number of the column-equilibrated normal matrix.
    pub condition: f64,
    /// `‖AᵀW(b − Ay)‖ / ‖AᵀWb‖`.
    pub normal_residual: f64,
}

/// Returns `(Ã, b̃)` with `ÃᵀÃ = AᵀWA` and `Ãᵀb̃ = AᵀWb`.
pub fn whiten(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    weighting: Weighting<'_>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let rows = a.nrows();
    if b.len() != rows {
        return Err(Error::validation(
            "wls",
            format!("A has {rows} rows but b has {}", b.len()),
        ));
    }
    let check_square = |m: &DMatrix<f64>, what: &str| {
        if m.nrows() == rows && m.ncols() == rows {
            Ok(())
        } else {
            Err(Error::validation(
                "wls",
                format!("{what} is {}x{}, expected {rows}x{rows}", m.nrows(), m.ncols()),
            ))
        }
    };
    match weighting {
        Weighting::Identity => Ok((a.clone(), b.clone())),
        Weighting::Weight(w) => {
            check_square(w, "weight")?;
            let l = w
                .clone()
                .cholesky()
                .ok_or_else(|| Error::estimation("weight matrix is not positive definite", f64::INFINITY))?
                .unpack();
            Ok((l.transpose() * a, l.transpose() * b))
        }
        Weighting::Covariance(c) => {
            check_square(c, "covariance")?;
            let l = c
                .clone()
                .cholesky()
                .ok_or_else(|| {
                    Error::estimation("residual covariance is not positive definite", f64::INFINITY)
                })?
                .unpack();
            let at = l
                .solve_lower_triangular(a)
                .ok_or_else(|| Error::estimation("singular covariance factor", f64::INFINITY))?;
            let bt = l
                .solve_lower_triangular(b)
                .ok_or_else(|| Error::estimation("singular covariance factor", f64::INFINITY))?;
            Ok((at, bt))
        }
        Weighting::CovarianceFactor(f) => {
            check_square(f, "covariance factor")?;
            let at = solve_square(f, a)?;
            let bt = solve_square(f, &DMatrix::from_column_slice(rows, 1, b.as_slice()))?;
            Ok((at, bt.column(0).into_owned()))
        }
        Weighting::DiagonalVariance(d) => {
            if d.len() != rows {
                return Err(Error::validation(
                    "wls",
                    format!("{} variances for {rows} rows", d.len()),
                ));
            }
            if !d.iter().all(|&v| v.is_finite() && v > 0.0) {
                return Err(Error::estimation("variances must be positive", f64::INFINITY));
            }
            let scale = d.map(|v| 1.0 / libm::sqrt(v));
            let mut at = a.clone();
            for (mut row, s) in at.row_iter_mut().zip(scale.iter()) {
                row *= *s;
            }
            Ok((at, b.component_mul(&scale)))
        }
    }
}

/// Solves `F X = R` for square `F` by LU with partial pivoting.
pub fn solve_square(f: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let x = f
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::estimation("singular square system", f64::INFINITY))?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::estimation("square solve produced non-finite values", f64::INFINITY))
    }
}

/// Minimizes `‖b̃ − Ãy‖²` for an already whitened system.
pub fn solve_whitened(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<WlsSolution> {
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(Error::estimation(
            format!("underdetermined system: {rows} equations, {cols} unknowns"),
            f64::INFINITY,
        ));
    }
    // unit-norm columns
    let scale = DVector::from_iterator(
        cols,
        a.column_iter().map(|c| {
            let n = c.norm();
            if n > 0.0 && n.is_finite() {
                1.0 / n
            } else {
                0.0
            }
        }),
    );
    if let Some(k) = scale.iter().position(|&s| s == 0.0) {
        return Err(Error::estimation(
            format!("column {k} of the design matrix is zero or non-finite"),
            f64::INFINITY,
        ));
    }
    let mut scaled = a.clone();
    for (mut col, s) in scaled.column_iter_mut().zip(scale.iter()) {
        col *= *s;
    }
    let svd = scaled.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::estimation("SVD did not converge", f64::INFINITY)),
    };
    let sv = svd.singular_values;
    let s_max = sv.max();
    let s_min = sv.min();
    let condition = if s_min > 0.0 {
        (s_max / s_min) * (s_max / s_min)
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_NORMAL_CONDITION) {
        return Err(Error::estimation("normal matrix is singular or ill-conditioned", condition));
    }
    let inv_sv = sv.map(|s| 1.0 / s);
    let utb = u.transpose() * b;
    let ys = v_t.transpose() * utb.component_mul(&inv_sv);
    let solution = ys.component_mul(&scale);

    // S = D V Σ⁻¹
    let mut factor = v_t.transpose();
    for (mut col, is) in factor.column_iter_mut().zip(inv_sv.iter()) {
        col *= *is;
    }
    for (mut row, s) in factor.row_iter_mut().zip(scale.iter()) {
        row *= *s;
    }
    let covariance = symmetrize(&(&factor * factor.transpose()));

    let residual = b - a * &solution;
    let atb = a.transpose() * b;
    let atr = a.transpose() * residual;
    let normal_residual = if atb.norm() > 0.0 {
        atr.norm() / atb.norm()
    } else {
        atr.norm()
    };
    Ok(WlsSolution {
        solution,
        covariance,
        covariance_factor: factor,
        condition,
        normal_residual,
    })
}

/// `ỹ = (AᵀWA)⁻¹AᵀWb` together with `(AᵀWA)⁻¹`.
pub fn wls_solve(a: &DMatrix<f64>, b: &DVector<f64>, weighting: Weighting<'_>) -> Result<WlsSolution> {
    let (at, bt) = whiten(a, b, weighting)?;
    solve_whitened(&at, &bt)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric to `tol` (relative to the largest entry) with eigenvalues no
/// smaller than `-tol · trace`.
pub fn is_symmetric_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() || !m.iter().all(|v| v.is_finite()) {
        return false;
    }
    let max_abs = m.amax();
    if max_abs == 0.0 {
        return true;
    }
    if (m - m.transpose()).amax() > tol * max_abs {
        return false;
    }
    let trace = m.trace();
    let eig = symmetrize(m).symmetric_eigenvalues();
    eig.iter().all(|&l| l >= -tol * trace.abs())
}
