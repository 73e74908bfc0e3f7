//! Symmetric eigensolver and eigenspace projectors.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm (relative to `max(1, ‖A‖_F)`) at which Jacobi stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
/// Default tolerance for the eigensolver post-conditions.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Eigenpairs of a real symmetric matrix by cyclic Jacobi rotations, sorted
/// by descending eigenvalue.
///
/// `tol` bounds the accepted asymmetry (relative to `max(1, ‖a‖_max)`), the
/// orthonormality defect of the eigenvectors, and the reconstruction error
/// `‖Σ λ v vᵀ − a‖_max ≤ tol·‖a‖_max·n`.
pub fn eigendecompose(a: &Matrix, tol: f64) -> Result<Vec<EigenPair>> {
    if !a.is_square() {
        return Err(Error::Contract(format!(
            "eigendecompose needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    let scale = a.max_abs();
    let asym = a.asymmetry();
    if asym > tol * scale.max(1.0) {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
        )));
    }

    let n = a.rows();
    let mut w = a.clone();
    // symmetrise exactly so rotations act on a truly symmetric matrix
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (w[(i, j)] + w[(j, i)]);
            w[(i, j)] = m;
            w[(j, i)] = m;
        }
    }
    let mut v = Matrix::identity(n);
    let frob = w.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOL * frob.max(1.0);

    let mut off = off_diagonal_norm(&w);
    let mut sweeps = 0;
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::numerical(
                format!("Jacobi did not converge in {MAX_SWEEPS} sweeps"),
                off,
            ));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&w);
        sweeps += 1;
    }

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let mut vector: Vec<f64> = (0..n).map(|i| v[(i, k)]).collect();
            // deterministic sign: first non-negligible component positive
            if let Some(first) = vector.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    vector.iter_mut().for_each(|x| *x = -*x);
                }
            }
            EigenPair {
                value: w[(k, k)],
                vector,
            }
        })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));

    let (ortho, recon) = postcondition_residuals(a, &pairs);
    if ortho > tol {
        return Err(Error::numerical("eigenvectors are not orthonormal", ortho));
    }
    if recon > tol * scale * n as f64 {
        return Err(Error::numerical("eigen-reconstruction error too large", recon));
    }
    Ok(pairs)
}

fn off_diagonal_norm(w: &Matrix) -> f64 {
    let n = w.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += w[(i, j)] * w[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation zeroing `w[p][q]`, accumulated into `v`.
fn rotate(w: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = w[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = w.rows();
    let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    w[(p, p)] -= t * apq;
    w[(q, q)] += t * apq;
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = w[(r, p)];
        let arq = w[(r, q)];
        let np = c * arp - s * arq;
        let nq = s * arp + c * arq;
        w[(r, p)] = np;
        w[(p, r)] = np;
        w[(r, q)] = nq;
        w[(q, r)] = nq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// `(‖VᵀV − I‖_max, ‖Σ λ v vᵀ − a‖_max)`.
pub fn postcondition_residuals(a: &Matrix, pairs: &[EigenPair]) -> (f64, f64) {
    let n = a.rows();
    let mut ortho: f64 = 0.0;
    for (i, x) in pairs.iter().enumerate() {
        for (j, y) in pairs.iter().enumerate().skip(i) {
            let dot: f64 = x.vector.iter().zip(&y.vector).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((dot - target).abs());
        }
    }
    let mut recon = Matrix::zeros(n, n);
    for pair in pairs {
        for i in 0..n {
            let li = pair.value * pair.vector[i];
            if li == 0.0 {
                continue;
            }
            for j in 0..n {
                recon[(i, j)] += li * pair.vector[j];
            }
        }
    }
    (ortho, recon.max_abs_diff(a))
}

/// Grouping tolerance used when none is given: `1e-8·max(1, ‖A‖_max·n)`.
pub fn default_group_tol(a: &Matrix) -> f64 {
    1e-8 * (a.max_abs() * a.rows() as f64).max(1.0)
}

/// Distinct eigenvalues of a symmetric matrix with the orthogonal projector
/// onto each eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<Matrix>,
    multiplicities: Vec<usize>,
}

/// Worst-case defects of the projector algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorResiduals {
    /// `‖Σ_j P_j − I‖_max`
    pub completeness: f64,
    /// `max_j ‖P_j² − P_j‖_max`
    pub idempotence: f64,
    /// `max_{j≠k} ‖P_j P_k‖_max`
    pub orthogonality: f64,
}

impl ProjectorResiduals {
    pub fn max(&self) -> f64 {
        self.completeness.max(self.idempotence).max(self.orthogonality)
    }
}

impl SpectralDecomposition {
    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Matrix] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn residuals(&self) -> ProjectorResiduals {
        let n = self.dimension();
        let mut sum = Matrix::zeros(n, n);
        let mut idempotence: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        for (j, p) in self.projectors.iter().enumerate() {
            for i in 0..n {
                for k in 0..n {
                    sum[(i, k)] += p[(i, k)];
                }
            }
            idempotence = idempotence.max(p.matmul(p).max_abs_diff(p));
            for other in &self.projectors[j + 1..] {
                orthogonality = orthogonality.max(p.matmul(other).max_abs());
            }
        }
        ProjectorResiduals {
            completeness: sum.max_abs_diff(&Matrix::identity(n)),
            idempotence,
            orthogonality,
        }
    }
}

/// Merges eigenpairs whose consecutive eigenvalue gap is at most `group_tol`
/// into one eigenspace. Input order does not matter.
pub fn group_eigenspaces(pairs: &[EigenPair], group_tol: f64) -> SpectralDecomposition {
    let mut order: Vec<&EigenPair> = pairs.iter().collect();
    order.sort_by(|x, y| y.value.total_cmp(&x.value));
    let n = order.first().map_or(0, |p| p.vector.len());

    let mut groups: Vec<Vec<&EigenPair>> = Vec::new();
    for pair in order {
        match groups.last_mut() {
            Some(g) if g.last().unwrap().value - pair.value <= group_tol => g.push(pair),
            _ => groups.push(vec![pair]),
        }
    }

    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for g in groups {
        let mut p = Matrix::zeros(n, n);
        for pair in &g {
            let x = &pair.vector;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                let row = p.row_mut(i);
                for (dst, xj) in row.iter_mut().zip(x) {
                    *dst += x[i] * xj;
                }
            }
        }
        eigenvalues.push(g.iter().map(|p| p.value).sum::<f64>() / g.len() as f64);
        multiplicities.push(g.len());
        projectors.push(p);
    }
    SpectralDecomposition {
        eigenvalues,
        projectors,
        multiplicities,
    }
}

/// Eigendecomposition plus grouping with the default tolerances.
pub fn spectral_decomposition(a: &Matrix) -> Result<SpectralDecomposition> {
    let pairs = eigendecompose(a, DEFAULT_EIG_TOL)?;
    Ok(group_eigenspaces(&pairs, default_group_tol(a)))
}
