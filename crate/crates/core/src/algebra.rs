//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! An algebra of dimension `d` stores the tensor `c[k][i][j]`, the `k`-th
//! coordinate of `[e_i, e_j]`. Everything downstream (derivations, spectral
//! data, BCH products) is computed in this fixed basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::tolerance::{EPS_ALG, EPS_RANK};

/// Element of the algebra in the fixed basis.
pub type Vector = DVector<f64>;

/// A finite-dimensional real Lie algebra.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    dim: usize,
    structure: Vec<f64>,
    labels: Option<Vec<String>>,
    // Nonzero entries (k, i, j, c) of the tensor; the bracket hot path
    // iterates only these.
    terms: Vec<(usize, usize, usize, f64)>,
}

impl LieAlgebra {
    /// Builds an algebra from a raw tensor laid out as `c[k][i][j]` at index
    /// `k*d*d + i*d + j`. No axioms are enforced; see [`LieAlgebra::validate`].
    pub fn from_tensor(dim: usize, structure: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("algebra dimension must be positive"));
        }
        check_dim(dim * dim * dim, structure.len())?;
        if structure.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("structure constants must be finite"));
        }
        let mut terms = Vec::new();
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    let c = structure[(k * dim + i) * dim + j];
                    if c != 0.0 {
                        terms.push((k, i, j, c));
                    }
                }
            }
        }
        Ok(Self {
            dim,
            structure,
            labels: None,
            terms,
        })
    }

    /// Builds an algebra from the brackets `[e_i, e_j]` for `i < j`
    /// (0-based); the remaining entries follow by antisymmetry.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("algebra dimension must be positive"));
        }
        let mut structure = vec![0.0; dim * dim * dim];
        for (i, j, result) in brackets {
            let (i, j) = (*i, *j);
            if i >= j || j >= dim {
                return Err(Error::invalid(format!(
                    "bracket entry ({}, {}) must satisfy 1 <= i < j <= {dim}",
                    i + 1,
                    j + 1
                )));
            }
            check_dim(dim, result.len())?;
            for (k, &c) in result.iter().enumerate() {
                structure[(k * dim + i) * dim + j] = c;
                structure[(k * dim + j) * dim + i] = -c;
            }
        }
        Self::from_tensor(dim, structure)
    }

    /// The abelian algebra `R^d`.
    pub fn abelian(dim: usize) -> Result<Self> {
        Self::from_tensor(dim, vec![0.0; dim * dim * dim])
    }

    /// The three-dimensional Heisenberg algebra, `[e1, e2] = e3`.
    pub fn heisenberg() -> Self {
        Self::from_brackets(3, &[(0, 1, vec![0.0, 0.0, 1.0])])
            .expect("static Heisenberg data is valid")
            .with_labels(vec!["X".into(), "Y".into(), "Z".into()])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        if labels.len() == self.dim {
            self.labels = Some(labels);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `c[k][i][j]`, 0-based.
    pub fn constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.structure[(k * self.dim + i) * self.dim + j]
    }

    pub fn is_abelian(&self) -> bool {
        self.terms.is_empty()
    }

    /// `[x, y]` written into `out`. Slices must have length `dim`.
    pub fn bracket_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(k, i, j, c) in &self.terms {
            out[k] += c * x[i] * y[j];
        }
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, y.len())?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim);
        self.bracket_into(x.as_slice(), y.as_slice(), out.as_mut_slice());
        out
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = Vector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    /// Checks antisymmetry and the Jacobi identity, reporting worst residuals.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim;
        let mut antisymmetry_residual: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let r = (self.constant(k, i, j) + self.constant(k, j, i)).abs();
                    antisymmetry_residual = antisymmetry_residual.max(r);
                }
            }
        }
        let mut jacobi_residual: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut s = 0.0;
                        for m in 0..d {
                            s += self.constant(m, i, j) * self.constant(l, m, k)
                                + self.constant(m, j, k) * self.constant(l, m, i)
                                + self.constant(m, k, i) * self.constant(l, m, j);
                        }
                        jacobi_residual = jacobi_residual.max(s.abs());
                    }
                }
            }
        }
        ValidationReport {
            antisymmetric: antisymmetry_residual < EPS_ALG,
            jacobi: jacobi_residual < EPS_ALG,
            antisymmetry_residual,
            jacobi_residual,
        }
    }

    /// Leibniz-rule check `D[x,y] = [Dx,y] + [x,Dy]` over basis pairs.
    pub fn is_derivation(&self, d: &DMatrix<f64>) -> Result<DerivationCheck> {
        let n = self.dim;
        if d.nrows() != n || d.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if d.nrows() != n { d.nrows() } else { d.ncols() },
            });
        }
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let ei = self.basis_vector(i);
            let dei = d.column(i).into_owned();
            for j in (i + 1)..n {
                let ej = self.basis_vector(j);
                let dej = d.column(j).into_owned();
                let lhs = d * self.bracket_unchecked(&ei, &ej);
                let rhs = self.bracket_unchecked(&dei, &ej) + self.bracket_unchecked(&ei, &dej);
                residual = residual.max((lhs - rhs).amax());
            }
        }
        Ok(DerivationCheck {
            holds: residual < EPS_ALG,
            residual,
        })
    }

    /// The inner derivation `y -> [x, y]`.
    pub fn ad(&self, x: &Vector) -> Result<Derivation> {
        check_dim(self.dim, x.len())?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.bracket_unchecked(x, &self.basis_vector(j));
            m.set_column(j, &col);
        }
        Ok(Derivation(m))
    }

    /// Returns some `x` with `ad(x) = D`, or `None` when `D` is outer.
    ///
    /// The witness is only determined up to the center.
    pub fn is_inner(&self, d: &Derivation) -> Result<Option<Vector>> {
        let n = self.dim;
        check_dim(n, d.dim())?;
        let mut family = DMatrix::zeros(n * n, n);
        for i in 0..n {
            let ad_i = self.ad(&self.basis_vector(i))?;
            family.set_column(i, &DVector::from_column_slice(ad_i.matrix().as_slice()));
        }
        let target = DVector::from_column_slice(d.matrix().as_slice());
        if family.amax() == 0.0 {
            return Ok((target.amax() < EPS_ALG).then(|| Vector::zeros(n)));
        }
        let svd = family.clone().svd(true, true);
        let coeffs = svd
            .solve(&target, EPS_RANK * svd.singular_values.max().max(1.0))
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let residual = (&family * &coeffs - target).amax();
        Ok((residual < EPS_ALG).then_some(coeffs))
    }

    /// Smallest bracket-closed subspace containing `seeds`.
    pub fn subalgebra_closure(&self, seeds: &[Vector]) -> Result<Subalgebra> {
        self.closure(None, seeds)
    }

    /// Smallest subspace containing `seeds` that is closed under the bracket
    /// and under `D`.
    pub fn d_invariant_closure(&self, d: &Derivation, seeds: &[Vector]) -> Result<Subalgebra> {
        check_dim(self.dim, d.dim())?;
        self.closure(Some(d), seeds)
    }

    fn closure(&self, d: Option<&Derivation>, seeds: &[Vector]) -> Result<Subalgebra> {
        if seeds.is_empty() {
            return Err(Error::invalid("closure needs at least one seed vector"));
        }
        for s in seeds {
            check_dim(self.dim, s.len())?;
        }
        let mut basis = linalg::orthonormal_span(&linalg::from_columns(seeds, self.dim), EPS_RANK);
        // Each round strictly grows the dimension or stops; at most d rounds.
        for _ in 0..=self.dim {
            let cols: Vec<Vector> = basis.column_iter().map(|c| c.into_owned()).collect();
            let mut candidates = cols.clone();
            for a in 0..cols.len() {
                for b in (a + 1)..cols.len() {
                    candidates.push(self.bracket_unchecked(&cols[a], &cols[b]));
                }
                if let Some(d) = d {
                    candidates.push(d.matrix() * &cols[a]);
                }
            }
            let next = linalg::orthonormal_span(&linalg::from_columns(&candidates, self.dim), EPS_RANK);
            let grew = next.ncols() > basis.ncols();
            basis = next;
            if !grew {
                break;
            }
        }
        Ok(Subalgebra { basis })
    }

    /// Number of nonzero terms of the lower central series, or `None` when
    /// the algebra is not nilpotent.
    pub fn nilpotency_class(&self) -> Option<usize> {
        nilpotency_class_of(self, &DMatrix::identity(self.dim, self.dim))
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_class().is_some()
    }

    pub fn is_solvable(&self) -> bool {
        is_solvable_span(self, &DMatrix::identity(self.dim, self.dim))
    }
}

/// Outcome of [`LieAlgebra::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub antisymmetric: bool,
    pub jacobi: bool,
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.antisymmetric && self.jacobi
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivationCheck {
    pub holds: bool,
    pub residual: f64,
}

/// A linear map on the algebra, typically the derivation attached to a
/// linear drift.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation(DMatrix<f64>);

impl Derivation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("derivation matrix must be square"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("derivation matrix must be finite"));
        }
        Ok(Self(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("derivation matrix must be square"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn zero(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self(&self.0 * t)
    }

    /// `e^{tD}` by scaling and squaring.
    pub fn exp(&self, t: f64) -> DMatrix<f64> {
        (&self.0 * t).exp()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

/// A subspace of the ambient algebra with an orthonormal basis (columns).
#[derive(Clone, Debug)]
pub struct Subalgebra {
    basis: DMatrix<f64>,
}

impl Subalgebra {
    /// Wraps an orthonormalized span of `vectors` after checking that it is
    /// closed under the bracket.
    pub fn from_span(algebra: &LieAlgebra, vectors: &DMatrix<f64>) -> Result<Self> {
        check_dim(algebra.dim(), vectors.nrows())?;
        let sub = Self {
            basis: linalg::orthonormal_span(vectors, EPS_RANK),
        };
        let residual = sub.closure_residual(algebra);
        if residual >= EPS_ALG {
            return Err(Error::inconsistent("subspace is not bracket-closed", residual));
        }
        Ok(sub)
    }

    pub(crate) fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn distance(&self, v: &Vector) -> f64 {
        linalg::distance_to_span(v, &self.basis)
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.distance(v) < EPS_ALG * v.amax().max(1.0)
    }

    /// Worst distance of a basis bracket from the subspace.
    pub fn closure_residual(&self, algebra: &LieAlgebra) -> f64 {
        let cols = self.basis_vectors();
        let mut worst: f64 = 0.0;
        for a in 0..cols.len() {
            for b in (a + 1)..cols.len() {
                let z = algebra.bracket_unchecked(&cols[a], &cols[b]);
                worst = worst.max(self.distance(&z));
            }
        }
        worst
    }

    /// Worst distance of `D v` from the subspace over basis vectors `v`.
    pub fn invariance_residual(&self, d: &Derivation) -> f64 {
        self.basis
            .column_iter()
            .map(|c| self.distance(&(d.matrix() * c)))
            .fold(0.0, f64::max)
    }

    pub fn nilpotency_class(&self, algebra: &LieAlgebra) -> Option<usize> {
        nilpotency_class_of(algebra, &self.basis)
    }

    pub fn is_nilpotent(&self, algebra: &LieAlgebra) -> bool {
        self.nilpotency_class(algebra).is_some()
    }

    pub fn is_solvable(&self, algebra: &LieAlgebra) -> bool {
        is_solvable_span(algebra, &self.basis)
    }
}

fn bracket_span(algebra: &LieAlgebra, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut cols = Vec::with_capacity(a.ncols() * b.ncols());
    for x in a.column_iter() {
        for y in b.column_iter() {
            cols.push(algebra.bracket_unchecked(&x.into_owned(), &y.into_owned()));
        }
    }
    linalg::orthonormal_span(&linalg::from_columns(&cols, algebra.dim()), EPS_RANK)
}

fn nilpotency_class_of(algebra: &LieAlgebra, span: &DMatrix<f64>) -> Option<usize> {
    let mut term = linalg::orthonormal_span(span, EPS_RANK);
    let mut class = 0;
    while term.ncols() > 0 {
        let next = bracket_span(algebra, span, &term);
        if next.ncols() >= term.ncols() {
            return None;
        }
        term = next;
        class += 1;
    }
    Some(class)
}

fn is_solvable_span(algebra: &LieAlgebra, span: &DMatrix<f64>) -> bool {
    let mut term = linalg::orthonormal_span(span, EPS_RANK);
    while term.ncols() > 0 {
        let next = bracket_span(algebra, &term, &term);
        if next.ncols() >= term.ncols() {
            return false;
        }
        term = next;
    }
    true
}

/// One `[e_i, e_j]` entry of an algebra file, 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub result: Vec<f64>,
}

/// On-disk algebra description listing only `i < j` brackets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl AlgebraFile {
    pub fn into_algebra(self) -> Result<LieAlgebra> {
        let mut entries = Vec::with_capacity(self.brackets.len());
        for b in self.brackets {
            if b.i == 0 || b.j == 0 {
                return Err(Error::invalid("bracket indices are 1-based"));
            }
            entries.push((b.i - 1, b.j - 1, b.result));
        }
        let alg = LieAlgebra::from_brackets(self.dim, &entries)?;
        Ok(match self.labels {
            Some(l) => alg.with_labels(l),
            None => alg,
        })
    }

    pub fn from_algebra(alg: &LieAlgebra) -> Self {
        let d = alg.dim();
        let mut brackets = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                let result: Vec<f64> = (0..d).map(|k| alg.constant(k, i, j)).collect();
                if result.iter().any(|&c| c != 0.0) {
                    brackets.push(BracketEntry {
                        i: i + 1,
                        j: j + 1,
                        result,
                    });
                }
            }
        }
        Self {
            dim: d,
            brackets,
            labels: alg.labels().map(|l| l.to_vec()),
        }
    }
}
