//! Generalized eigenspaces of a derivation and the splitting of the algebra
//! into expanding, neutral and contracting parts.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::algebra::{Derivation, LieAlgebra, Subalgebra};
use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Relative distance below which computed eigenvalues are merged into one
/// cluster. Defective blocks perturb eigenvalues by roughly
/// `eps^(1/k)`, so this is looser than the real-part threshold; the cluster
/// mean is well conditioned even when the members are not.
const CLUSTER_TOL: f64 = 1e-5;

/// A distinct eigenvalue with its algebraic multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralValue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl SpectralValue {
    pub fn value(&self) -> Complex<f64> {
        Complex::new(self.re, self.im)
    }

    pub fn is_real(&self) -> bool {
        self.im == 0.0
    }
}

/// Sign class of a real part after thresholding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    fn of(re: f64) -> Self {
        if re > 0.0 {
            Sign::Positive
        } else if re < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Real invariant subspace for one real eigenvalue or one conjugate pair.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    /// Representative eigenvalue (`im >= 0`).
    pub value: Complex<f64>,
    /// Algebraic multiplicity of `value` alone.
    pub multiplicity: usize,
    pub basis: DMatrix<f64>,
}

impl SpectralBlock {
    pub fn sign(&self) -> Sign {
        Sign::of(self.value.re)
    }

    /// The eigenvalues carried by this block (one, or a conjugate pair).
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        if self.value.im == 0.0 {
            vec![self.value]
        } else {
            vec![self.value, self.value.conj()]
        }
    }
}

struct Cluster {
    mean: Complex<f64>,
    size: usize,
}

fn scale_of(d: &Derivation) -> f64 {
    d.matrix().amax().max(1.0)
}

fn clusters(d: &Derivation, tol: &Tolerances) -> Result<Vec<Cluster>> {
    let eigs = d.matrix().complex_eigenvalues();
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("eigensolver returned non-finite values".into()));
    }
    let n = eigs.len();
    let ctol = CLUSTER_TOL * scale_of(d);

    // Single-linkage grouping via union-find.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if (eigs[a] - eigs[b]).norm() <= ctol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: Vec<(usize, Complex<f64>, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += eigs[i];
                g.2 += 1;
            }
            None => groups.push((r, eigs[i], 1)),
        }
    }
    let mut out: Vec<Cluster> = groups
        .into_iter()
        .map(|(_, sum, size)| {
            let mut mean = sum / size as f64;
            if mean.im.abs() <= ctol {
                mean.im = 0.0;
            }
            if mean.re.abs() < tol.eps_re {
                mean.re = 0.0;
            }
            Cluster { mean, size }
        })
        .collect();
    out.sort_by(|a, b| {
        b.mean
            .re
            .total_cmp(&a.mean.re)
            .then(b.mean.im.total_cmp(&a.mean.im))
    });
    Ok(out)
}

/// Full complex spectrum with multiplicities; conjugate pairs are adjacent.
///
/// Real parts with magnitude below `eps_re` are reported as exactly zero.
pub fn spectrum(d: &Derivation, tol: &Tolerances) -> Result<Vec<SpectralValue>> {
    Ok(clusters(d, tol)?
        .into_iter()
        .map(|c| SpectralValue {
            re: c.mean.re,
            im: c.mean.im,
            multiplicity: c.size,
        })
        .collect())
}

fn block_for(d: &Derivation, value: Complex<f64>, multiplicity: usize) -> DMatrix<f64> {
    let n = d.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let m = d.matrix();
    // The index of an eigenvalue never exceeds its algebraic multiplicity,
    // so that power already reaches the whole generalized eigenspace.
    if value.im == 0.0 {
        let shifted = m - &id * value.re;
        let power = matrix_power(&shifted, multiplicity);
        linalg::kernel_of_dim(&power, multiplicity)
    } else {
        let quadratic = m * m - m * (2.0 * value.re) + &id * value.norm_sqr();
        let power = matrix_power(&quadratic, multiplicity);
        linalg::kernel_of_dim(&power, 2 * multiplicity)
    }
}

fn matrix_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Real basis of the generalized eigenspace of `alpha`; for a non-real
/// `alpha` this is the real invariant subspace of the pair `alpha, conj(alpha)`.
pub fn generalized_eigenspace(
    d: &Derivation,
    alpha: Complex<f64>,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let target = Complex::new(alpha.re, alpha.im.abs());
    let reach = tol.eps_re.max(CLUSTER_TOL * scale_of(d));
    let cluster = clusters(d, tol)?
        .into_iter()
        .find(|c| (c.mean - target).norm() <= reach)
        .ok_or_else(|| Error::Domain(format!("{alpha} is not an eigenvalue")))?;
    Ok(block_for(d, cluster.mean, cluster.size))
}

/// The splitting `g = g+ (+) g0 (+) g-` of a derivation.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<SpectralValue>,
    pub blocks: Vec<SpectralBlock>,
    pub g_plus: Subalgebra,
    pub g_zero: Subalgebra,
    pub g_minus: Subalgebra,
    pub g_plus_zero: Subalgebra,
    pub g_minus_zero: Subalgebra,
    pub hyperbolic: bool,
}

impl SpectralDecomposition {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.g_plus.dim(), self.g_zero.dim(), self.g_minus.dim())
    }

    pub fn part(&self, sign: Sign) -> &Subalgebra {
        match sign {
            Sign::Positive => &self.g_plus,
            Sign::Zero => &self.g_zero,
            Sign::Negative => &self.g_minus,
        }
    }

    /// True when every eigenvalue satisfies `pred` on its real part.
    pub fn all_real_parts(&self, pred: impl Fn(f64) -> bool) -> bool {
        self.eigenvalues.iter().all(|e| pred(e.re))
    }

    /// Matrix of `D` restricted to one of the invariant parts, in that
    /// part's orthonormal basis.
    pub fn restricted(&self, d: &Derivation, sign: Sign) -> DMatrix<f64> {
        let b = self.part(sign).basis();
        b.transpose() * d.matrix() * b
    }

    pub fn export(&self) -> DecompositionExport {
        let rows = |s: &Subalgebra| -> Vec<Vec<f64>> {
            s.basis()
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect()
        };
        DecompositionExport {
            eigenvalues: self.eigenvalues.clone(),
            dims: [self.g_plus.dim(), self.g_zero.dim(), self.g_minus.dim()],
            g_plus: rows(&self.g_plus),
            g_zero: rows(&self.g_zero),
            g_minus: rows(&self.g_minus),
            g_plus_zero: rows(&self.g_plus_zero),
            g_minus_zero: rows(&self.g_minus_zero),
            hyperbolic: self.hyperbolic,
        }
    }
}

/// JSON view of a decomposition; subspace bases are lists of row vectors.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionExport {
    pub eigenvalues: Vec<SpectralValue>,
    pub dims: [usize; 3],
    pub g_plus: Vec<Vec<f64>>,
    pub g_zero: Vec<Vec<f64>>,
    pub g_minus: Vec<Vec<f64>>,
    pub g_plus_zero: Vec<Vec<f64>>,
    pub g_minus_zero: Vec<Vec<f64>>,
    pub hyperbolic: bool,
}

/// Groups the generalized eigenspaces of `d` by the sign of the real part
/// and checks the structural invariants of the result.
pub fn decompose(
    algebra: &LieAlgebra,
    d: &Derivation,
    tol: &Tolerances,
) -> Result<SpectralDecomposition> {
    let n = algebra.dim();
    check_dim(n, d.dim())?;
    let leibniz = algebra.is_derivation(d.matrix())?;
    if !leibniz.holds {
        return Err(Error::invalid(format!(
            "matrix is not a derivation (Leibniz residual {:e})",
            leibniz.residual
        )));
    }

    let cl = clusters(d, tol)?;
    let mut blocks = Vec::new();
    for c in &cl {
        if c.mean.im < 0.0 {
            continue;
        }
        if c.mean.im > 0.0 {
            let conj = cl
                .iter()
                .find(|o| (o.mean - c.mean.conj()).norm() <= CLUSTER_TOL * scale_of(d));
            match conj {
                Some(o) if o.size == c.size => {}
                _ => {
                    return Err(Error::inconsistent(
                        "complex eigenvalue without matching conjugate",
                        c.mean.im,
                    ))
                }
            }
        }
        blocks.push(SpectralBlock {
            value: c.mean,
            multiplicity: c.size,
            basis: block_for(d, c.mean, c.size),
        });
    }

    let scale = scale_of(d);
    let gather = |signs: &[Sign]| -> Result<Subalgebra> {
        let parts: Vec<&DMatrix<f64>> = blocks
            .iter()
            .filter(|b| signs.contains(&b.sign()))
            .map(|b| &b.basis)
            .collect();
        let expected: usize = parts.iter().map(|p| p.ncols()).sum();
        let span = linalg::orthonormal_span(&linalg::hstack(&parts, n), tol.eps_rank);
        if span.ncols() != expected {
            return Err(Error::inconsistent(
                format!("generalized eigenspaces for {signs:?} are not independent"),
                (expected as f64 - span.ncols() as f64).abs(),
            ));
        }
        let sub = Subalgebra::from_orthonormal(span);
        let inv = sub.invariance_residual(d);
        if inv >= tol.eps_alg * scale {
            return Err(Error::inconsistent(format!("{signs:?} part is not D-invariant"), inv));
        }
        let closed = sub.closure_residual(algebra);
        if closed >= tol.eps_alg * scale {
            return Err(Error::inconsistent(format!("{signs:?} part is not a subalgebra"), closed));
        }
        Ok(sub)
    };

    let g_plus = gather(&[Sign::Positive])?;
    let g_zero = gather(&[Sign::Zero])?;
    let g_minus = gather(&[Sign::Negative])?;
    let g_plus_zero = gather(&[Sign::Positive, Sign::Zero])?;
    let g_minus_zero = gather(&[Sign::Negative, Sign::Zero])?;

    let total = g_plus.dim() + g_zero.dim() + g_minus.dim();
    if total != n {
        return Err(Error::inconsistent(
            "spectral parts do not fill the algebra",
            (n as f64 - total as f64).abs(),
        ));
    }
    for (name, part) in [("g+", &g_plus), ("g-", &g_minus)] {
        if !part.is_nilpotent(algebra) {
            return Err(Error::inconsistent(format!("{name} is not nilpotent"), 1.0));
        }
    }
    let r = tol.eps_rank;
    let checks = [
        ("g+ meets g-", linalg::intersection_dim(g_plus.basis(), g_minus.basis(), r), 0),
        ("g+0 meets g-", linalg::intersection_dim(g_plus_zero.basis(), g_minus.basis(), r), 0),
        ("g-0 meets g+", linalg::intersection_dim(g_minus_zero.basis(), g_plus.basis(), r), 0),
        (
            "g+0 and g-0 meet outside g0",
            linalg::intersection_dim(g_plus_zero.basis(), g_minus_zero.basis(), r),
            g_zero.dim(),
        ),
    ];
    for (what, got, want) in checks {
        if got != want {
            return Err(Error::inconsistent(what, got as f64 - want as f64));
        }
    }

    let hyperbolic = g_zero.dim() == 0;
    Ok(SpectralDecomposition {
        eigenvalues: spectrum(d, tol)?,
        blocks,
        g_plus,
        g_zero,
        g_minus,
        g_plus_zero,
        g_minus_zero,
        hyperbolic,
    })
}

/// Result of checking `[g_a, g_b]` against `g_{a+b}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GradingReport {
    pub passed: bool,
    pub worst_residual: f64,
    pub pairs_checked: usize,
}

/// Checks that the bracket of two generalized eigenspaces lands in the
/// eigenspace of the summed eigenvalue, or vanishes when the sum is not an
/// eigenvalue.
pub fn verify_grading(
    algebra: &LieAlgebra,
    d: &Derivation,
    dec: &SpectralDecomposition,
    tol: &Tolerances,
) -> GradingReport {
    let n = algebra.dim();
    let reach = tol.eps_re.max(CLUSTER_TOL * scale_of(d));
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for a in &dec.blocks {
        for b in &dec.blocks {
            pairs += 1;
            // Target: all blocks carrying some sum of the two eigenvalue sets.
            let sums: Vec<Complex<f64>> = a
                .eigenvalues()
                .iter()
                .flat_map(|x| b.eigenvalues().into_iter().map(move |y| x + y))
                .collect();
            let targets: Vec<&DMatrix<f64>> = dec
                .blocks
                .iter()
                .filter(|t| {
                    t.eigenvalues()
                        .iter()
                        .any(|ev| sums.iter().any(|s| (s - ev).norm() <= reach))
                })
                .map(|t| &t.basis)
                .collect();
            let target = linalg::orthonormal_span(&linalg::hstack(&targets, n), tol.eps_rank);
            for x in a.basis.column_iter() {
                for y in b.basis.column_iter() {
                    let z = algebra.bracket_unchecked(&x.into_owned(), &y.into_owned());
                    worst = worst.max(linalg::distance_to_span(&z, &target));
                }
            }
        }
    }
    GradingReport {
        passed: worst < tol.eps_alg,
        worst_residual: worst,
        pairs_checked: pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Vector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn e(d: usize, i: usize) -> Vector {
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let s = spectrum(&Derivation::diagonal(&[1.0, -1.0, 0.0]), &tol()).unwrap();
        assert_eq!(s.len(), 3);
        let mut re: Vec<f64> = s.iter().map(|v| v.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![-1.0, 0.0, 1.0]);
        assert!(s.iter().all(|v| v.multiplicity == 1 && v.im == 0.0));
    }

    #[test]
    fn rotation_spectrum_is_conjugate_pair() {
        let d = Derivation::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let s = spectrum(&d, &tol()).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0].im - 1.0).abs() < 1e-12 && s[0].re == 0.0);
        assert!((s[1].im + 1.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_eigenvalue_multiplicity() {
        let s = spectrum(&Derivation::diagonal(&[1.0, 1.0, 2.0]), &tol()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].re, 2.0);
        assert_eq!(s[1].multiplicity, 2);
    }

    #[test]
    fn eigenspace_of_diagonal() {
        let d = Derivation::diagonal(&[1.0, -1.0, 0.0]);
        let b = generalized_eigenspace(&d, Complex::new(1.0, 0.0), &tol()).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(0, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenspace_of_jordan_block_is_everything() {
        let d = Derivation::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let b = generalized_eigenspace(&d, Complex::new(1.0, 0.0), &tol()).unwrap();
        assert_eq!(linalg::rank(&b, 1e-8), 2);
    }

    #[test]
    fn eigenspace_of_rotation_pair_is_the_plane() {
        let d = Derivation::from_rows(&[
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let b = generalized_eigenspace(&d, Complex::new(0.0, 1.0), &tol()).unwrap();
        assert_eq!(b.ncols(), 2);
        assert!(linalg::distance_to_span(&e(3, 0), &b) < 1e-12);
        assert!(linalg::distance_to_span(&e(3, 1), &b) < 1e-12);
        // The conjugate names the same real block.
        let c = generalized_eigenspace(&d, Complex::new(0.0, -1.0), &tol()).unwrap();
        assert!(linalg::projector_distance(&b, &c) < 1e-12);
    }

    #[test]
    fn eigenspace_of_non_eigenvalue_is_domain_error() {
        let d = Derivation::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            generalized_eigenspace(&d, Complex::new(0.5, 0.0), &tol()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn heisenberg_split_decomposition() {
        let h = LieAlgebra::heisenberg();
        let d = Derivation::diagonal(&[1.0, -1.0, 0.0]);
        let dec = decompose(&h, &d, &tol()).unwrap();
        assert_eq!(dec.dims(), (1, 1, 1));
        assert!(!dec.hyperbolic);
        assert!(dec.g_plus.contains(&e(3, 0)));
        assert!(dec.g_minus.contains(&e(3, 1)));
        assert!(dec.g_zero.contains(&e(3, 2)));
        assert_eq!(dec.g_plus_zero.dim(), 2);
        let g = verify_grading(&h, &d, &dec, &tol());
        assert!(g.passed, "residual {}", g.worst_residual);
    }

    #[test]
    fn heisenberg_expanding_decomposition() {
        let h = LieAlgebra::heisenberg();
        let d = Derivation::diagonal(&[1.0, 1.0, 2.0]);
        let dec = decompose(&h, &d, &tol()).unwrap();
        assert_eq!(dec.dims(), (3, 0, 0));
        assert!(dec.hyperbolic);
        assert!(verify_grading(&h, &d, &dec, &tol()).passed);
    }

    #[test]
    fn zero_derivation_is_all_neutral() {
        let h = LieAlgebra::heisenberg();
        let dec = decompose(&h, &Derivation::zero(3), &tol()).unwrap();
        assert_eq!(dec.dims(), (0, 3, 0));
        let a = LieAlgebra::abelian(2).unwrap();
        let dec = decompose(&a, &Derivation::zero(2), &tol()).unwrap();
        assert_eq!(dec.dims(), (0, 2, 0));
    }

    #[test]
    fn abelian_grading_trivially_passes() {
        let a = LieAlgebra::abelian(3).unwrap();
        let d = Derivation::from_rows(&[
            vec![0.5, -2.0, 0.0],
            vec![2.0, 0.5, 0.0],
            vec![0.0, 0.0, -3.0],
        ])
        .unwrap();
        let dec = decompose(&a, &d, &tol()).unwrap();
        assert_eq!(dec.dims(), (2, 0, 1));
        let g = verify_grading(&a, &d, &dec, &tol());
        assert!(g.passed);
        assert_eq!(g.worst_residual, 0.0);
    }

    #[test]
    fn defective_nilpotent_derivation() {
        // ad(e1) on Heisenberg: nilpotent single Jordan chain e2 -> e3.
        let h = LieAlgebra::heisenberg();
        let d = h.ad(&e(3, 0)).unwrap();
        let dec = decompose(&h, &d, &tol()).unwrap();
        assert_eq!(dec.dims(), (0, 3, 0));
    }

    #[test]
    fn non_derivation_is_rejected() {
        let h = LieAlgebra::heisenberg();
        assert!(matches!(
            decompose(&h, &Derivation::diagonal(&[1.0, 1.0, 1.0]), &tol()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tiny_real_parts_count_as_zero() {
        let d = Derivation::diagonal(&[1e-9, -2.0]);
        let s = spectrum(&d, &tol()).unwrap();
        assert!(s.iter().any(|v| v.re == 0.0));
    }
}
