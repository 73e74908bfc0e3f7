//! Continuous-time quantum walks with the adjacency matrix as Hamiltonian:
//! instantaneous and time-averaged mixing matrices, and per-vertex entropies.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::spectral::{spectral_decomposition, SpectralDecomposition};

/// Row/column-sum tolerance for doubly stochastic matrices.
pub const STOCHASTIC_TOL: f64 = 1e-9;
/// Entries in `[-NEGATIVE_CLAMP, 0)` are rounding noise and read as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Time-averaged mixing matrix of the walk. Doubly stochastic and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct AmmMatrix {
    q: Matrix,
}

impl AmmMatrix {
    /// Wraps `q` after checking it is square, non-negative up to
    /// [`NEGATIVE_CLAMP`] and doubly stochastic within [`STOCHASTIC_TOL`].
    pub fn new(q: Matrix) -> Result<Self> {
        check_doubly_stochastic(&q)?;
        Ok(Self { q })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    pub fn into_matrix(self) -> Matrix {
        self.q
    }

    pub fn size(&self) -> usize {
        self.q.rows()
    }
}

/// Fails with a numerical error carrying the worst residual when `q` is not
/// doubly stochastic.
pub fn check_doubly_stochastic(q: &Matrix) -> Result<()> {
    if !q.is_square() {
        return Err(Error::Contract(format!(
            "mixing matrix must be square, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let most_negative = q.as_slice().iter().fold(0.0f64, |m, &v| m.min(v));
    if most_negative < -NEGATIVE_CLAMP || q.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("mixing matrix has a negative entry", most_negative));
    }
    let worst = q
        .row_sums()
        .into_iter()
        .chain(q.col_sums())
        .fold(0.0f64, |m, s| m.max((s - 1.0).abs()));
    if worst > STOCHASTIC_TOL {
        return Err(Error::numerical("mixing matrix is not doubly stochastic", worst));
    }
    Ok(())
}

/// `Q = Σ_j P_j ∘ P_j` over the eigenspace projectors.
pub fn amm_matrix(sd: &SpectralDecomposition) -> Result<AmmMatrix> {
    let n = sd.dimension();
    let mut q = Matrix::zeros(n, n);
    for p in sd.projectors() {
        for i in 0..n {
            let src = p.row(i);
            for (dst, v) in q.row_mut(i).iter_mut().zip(src) {
                *dst += v * v;
            }
        }
    }
    AmmMatrix::new(q)
}

/// Averaged mixing matrix of a graph's walk.
pub fn graph_amm(g: &Graph) -> Result<AmmMatrix> {
    amm_matrix(&spectral_decomposition(&g.adjacency_matrix())?)
}

/// Evaluates `Q_M(t) = U(t) ∘ U(−t)` from a fixed spectral decomposition,
/// using `U(t) = Σ_j e^{iλ_j t} P_j`.
#[derive(Debug, Clone)]
pub struct MixingEvolution {
    sd: SpectralDecomposition,
}

impl MixingEvolution {
    pub fn new(a: &Matrix) -> Result<Self> {
        Ok(Self {
            sd: spectral_decomposition(a)?,
        })
    }

    pub fn from_decomposition(sd: SpectralDecomposition) -> Self {
        Self { sd }
    }

    pub fn size(&self) -> usize {
        self.sd.dimension()
    }

    /// Adds `weight · Q_M(t)` into `acc`.
    fn accumulate(&self, t: f64, weight: f64, acc: &mut Matrix) {
        let n = self.size();
        let phases: Vec<(f64, f64)> = self
            .sd
            .eigenvalues()
            .iter()
            .map(|&l| ((l * t).cos(), (l * t).sin()))
            .collect();
        for i in 0..n {
            for j in 0..n {
                let (mut re, mut im) = (0.0, 0.0);
                for (p, &(c, s)) in self.sd.projectors().iter().zip(&phases) {
                    let x = p[(i, j)];
                    re += c * x;
                    im += s * x;
                }
                acc[(i, j)] += weight * (re * re + im * im);
            }
        }
    }

    pub fn at(&self, t: f64) -> Matrix {
        let n = self.size();
        let mut m = Matrix::zeros(n, n);
        self.accumulate(t, 1.0, &mut m);
        m
    }
}

/// Instantaneous mixing matrix `|U(t)_{uv}|²`.
pub fn mixing_matrix_at(a: &Matrix, t: f64) -> Result<Matrix> {
    Ok(MixingEvolution::new(a)?.at(t))
}

/// Time average `(1/T)∫₀ᵀ Q_M(t) dt` by the midpoint rule over `samples`
/// panels. Converges to the averaged mixing matrix as `T → ∞`.
pub fn cesaro_oracle(a: &Matrix, horizon: f64, samples: usize) -> Result<Matrix> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "cesaro_oracle needs at least 2 samples, got {samples}"
        )));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    let evo = MixingEvolution::new(a)?;
    let n = evo.size();
    let dt = horizon / samples as f64;
    let weight = 1.0 / samples as f64;
    let mut acc = Matrix::zeros(n, n);
    for k in 0..samples {
        evo.accumulate((k as f64 + 0.5) * dt, weight, &mut acc);
    }
    Ok(acc)
}

/// Shannon entropy (nats) of each row of the averaged mixing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexEntropyProfile {
    entropies: Vec<f64>,
}

impl VertexEntropyProfile {
    pub fn new(entropies: Vec<f64>) -> Self {
        Self { entropies }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entropies
    }

    pub fn get(&self, v: usize) -> f64 {
        self.entropies[v]
    }

    pub fn len(&self) -> usize {
        self.entropies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entropies.is_empty()
    }
}

/// `H_Q(v) = −Σ_u Q_vu ln Q_vu` with `0·ln 0 = 0`. Rounding can push the sum
/// an ulp past `[0, ln n]`, so results are clamped into that range.
pub fn vertex_entropies(q: &AmmMatrix) -> Result<VertexEntropyProfile> {
    let m = q.matrix();
    let ceiling = (m.rows() as f64).ln();
    let mut entropies = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut h = 0.0;
        for &x in m.row(i) {
            if x < -NEGATIVE_CLAMP {
                return Err(Error::numerical(
                    format!("negative probability in row {i}"),
                    x,
                ));
            }
            if x > 0.0 {
                h -= x * x.ln();
            }
        }
        entropies.push(h.clamp(0.0, ceiling));
    }
    Ok(VertexEntropyProfile { entropies })
}
