//! Random instance generators and the structural checks run on them.

use liectrl::analysis::G0Compact;
use liectrl::{
    check_larc, classify, decompose, spectrum, ControlRange, Derivation, LieAlgebra, LinearSystemSpec,
    SystemFlags, Tolerances, Vector,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instances per randomized suite.
pub const CASES: u32 = 256;

/// A base algebra in its standard basis with a family of derivations.
pub struct Family {
    pub algebra: LieAlgebra,
    /// Draws a derivation of `algebra`, not necessarily inner.
    pub derivation: fn(&mut ChaCha8Rng) -> DMatrix<f64>,
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

pub fn families() -> Vec<Family> {
    let so3 = LieAlgebra::from_brackets(
        3,
        &[(0, 1, vec![0.0, 0.0, 1.0]), (1, 2, vec![1.0, 0.0, 0.0]), (0, 2, vec![0.0, -1.0, 0.0])],
    )
    .unwrap();
    let affine = LieAlgebra::from_brackets(2, &[(0, 1, vec![0.0, 1.0])]).unwrap();
    let filiform = LieAlgebra::from_brackets(
        4,
        &[(0, 1, vec![0.0, 0.0, 1.0, 0.0]), (0, 2, vec![0.0, 0.0, 0.0, 1.0])],
    )
    .unwrap();
    let h5 = LieAlgebra::from_brackets(
        5,
        &[(0, 1, vec![0.0, 0.0, 0.0, 0.0, 1.0]), (2, 3, vec![0.0, 0.0, 0.0, 0.0, 1.0])],
    )
    .unwrap();
    vec![
        Family {
            algebra: LieAlgebra::abelian(3).unwrap(),
            derivation: |r| DMatrix::from_fn(3, 3, |_, _| unit(r)),
        },
        Family {
            algebra: LieAlgebra::abelian(4).unwrap(),
            derivation: |r| DMatrix::from_fn(4, 4, |_, _| unit(r)),
        },
        Family {
            algebra: LieAlgebra::heisenberg(),
            derivation: |r| {
                let (a, b, c, d, e, f) = (unit(r), unit(r), unit(r), unit(r), unit(r), unit(r));
                DMatrix::from_row_slice(3, 3, &[a, b, 0.0, c, d, 0.0, e, f, a + d])
            },
        },
        Family {
            algebra: so3,
            derivation: |r| {
                let (x, y, z) = (unit(r), unit(r), unit(r));
                DMatrix::from_row_slice(3, 3, &[0.0, -z, y, z, 0.0, -x, -y, x, 0.0])
            },
        },
        Family {
            algebra: affine,
            derivation: |r| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, unit(r), unit(r)]),
        },
        Family {
            algebra: filiform,
            derivation: |r| {
                let (a, s) = (unit(r), unit(r));
                let (p, q) = (unit(r), unit(r));
                // Grading plus the inner derivation ad(p e1 + q e2).
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        a, 0.0, 0.0, 0.0,
                        0.0, s, 0.0, 0.0,
                        -q, p, a + s, 0.0,
                        0.0, 0.0, p, 2.0 * a + s,
                    ],
                )
            },
        },
        Family {
            algebra: h5,
            derivation: |r| {
                let (a1, a2, c) = (unit(r), unit(r), unit(r));
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![a1, c - a1, a2, c - a2, c]))
            },
        },
    ]
}

/// The algebra in the basis given by the columns of `p`.
pub fn change_basis(alg: &LieAlgebra, p: &DMatrix<f64>) -> LieAlgebra {
    let d = alg.dim();
    let pinv = p.clone().try_inverse().unwrap();
    let mut t = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let x = Vector::from_column_slice(p.column(i).as_slice());
            let y = Vector::from_column_slice(p.column(j).as_slice());
            let v = &pinv * alg.bracket(&x, &y).unwrap();
            for k in 0..d {
                t[(k * d + i) * d + j] = v[k];
            }
        }
    }
    LieAlgebra::from_tensor(d, t).unwrap()
}

pub struct Instance {
    pub algebra: LieAlgebra,
    pub derivation: Derivation,
    pub rng: ChaCha8Rng,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fams = families();
    let fam = &fams[rng.random_range(0..fams.len())];
    let d = fam.algebra.dim();
    let p = DMatrix::identity(d, d) + DMatrix::from_fn(d, d, |_, _| 0.4 * unit(&mut rng));
    let algebra = change_basis(&fam.algebra, &p);
    let raw = (fam.derivation)(&mut rng);
    let pinv = p.clone().try_inverse().unwrap();
    let derivation = Derivation::new(&pinv * raw * &p).unwrap();
    Instance { algebra, derivation, rng }
}

pub fn spec_of(inst: &mut Instance) -> LinearSystemSpec {
    let d = inst.algebra.dim();
    let m = inst.rng.random_range(1..=2);
    let controls = (0..m)
        .map(|_| Vector::from_fn(d, |_, _| unit(&mut inst.rng)))
        .collect();
    LinearSystemSpec::new(
        inst.algebra.clone(),
        inst.derivation.clone(),
        controls,
        ControlRange::Box(vec![1.0; m]),
        SystemFlags {
            g0_compact: G0Compact::Auto,
            ..SystemFlags::default()
        },
    )
    .unwrap()
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn exact_rank(mut a: Vec<Vec<i128>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for r in 0..rows {
            if r != rank && a[r][col] != 0 {
                let (f, g) = (a[rank][col], a[r][col]);
                for c in 0..cols {
                    a[r][c] = a[r][c] * f - a[rank][c] * g;
                }
                let gcd = a[r].iter().fold(0i128, |acc, &v| gcd(acc, v.abs()));
                if gcd > 1 {
                    a[r].iter_mut().for_each(|v| *v /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn kalman_rank(d: &[Vec<i128>], b: &[Vec<i128>]) -> usize {
    let n = d.len();
    let mut cols: Vec<Vec<i128>> = b.to_vec();
    let mut current = b.to_vec();
    for _ in 1..n {
        current = current
            .iter()
            .map(|v| (0..n).map(|i| (0..n).map(|j| d[i][j] * v[j]).sum()).collect())
            .collect();
        cols.extend(current.iter().cloned());
    }
    // Rank of the column set equals rank of its transpose.
    exact_rank(cols)
}


pub type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond { Ok(()) } else { Err(msg()) }
}

pub fn check_ad_is_derivation(seed: u64) -> Check {
    let mut inst = instance(seed);
    let d = inst.algebra.dim();
    let x = Vector::from_fn(d, |_, _| 2.0 * unit(&mut inst.rng));
    let ad = inst.algebra.ad(&x).map_err(|e| e.to_string())?;
    let check = inst.algebra.is_derivation(ad.matrix()).map_err(|e| e.to_string())?;
    ensure(check.holds, || format!("seed {seed}: Leibniz residual {}", check.residual))
}

pub fn check_sampled_derivation(seed: u64) -> Check {
    let inst = instance(seed);
    let check = inst.algebra.is_derivation(inst.derivation.matrix()).map_err(|e| e.to_string())?;
    ensure(check.holds, || format!("seed {seed}: Leibniz residual {}", check.residual))
}

pub fn check_dims_sum(seed: u64) -> Check {
    let inst = instance(seed);
    let tol = Tolerances::default();
    let dec = decompose(&inst.algebra, &inst.derivation, &tol).map_err(|e| format!("seed {seed}: {e}"))?;
    let (p, z, m) = dec.dims();
    let d = inst.algebra.dim();
    ensure(p + z + m == d, || format!("seed {seed}: dims {p}+{z}+{m} != {d}"))?;
    ensure(dec.g_plus_zero.dim() == p + z && dec.g_minus_zero.dim() == m + z, || {
        format!("seed {seed}: combined parts have wrong dimension")
    })?;
    let mult: usize = spectrum(&inst.derivation, &tol)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|s| s.multiplicity)
        .sum();
    ensure(mult == d, || format!("seed {seed}: multiplicities sum to {mult}"))
}

pub fn check_scale_invariance(seed: u64, t: f64) -> Check {
    let mut inst = instance(seed);
    let spec = spec_of(&mut inst);
    let tol = Tolerances::default();
    let run = |s: &LinearSystemSpec| {
        let dec = decompose(&s.algebra, &s.derivation, &tol).map_err(|e| e.to_string())?;
        classify(s, &dec, None).map_err(|e| e.to_string())
    };
    let base = run(&spec)?;
    let scaled = run(&spec.with_derivation(spec.derivation.scaled(t)).map_err(|e| e.to_string())?)?;
    ensure(base.larc == scaled.larc && base.hyperbolic == scaled.hyperbolic, || {
        format!("seed {seed}: structural flags changed at t = {t}")
    })?;
    for ((name, a), (_, b)) in base.verdicts().iter().zip(scaled.verdicts().iter()) {
        ensure(a.value == b.value, || format!("seed {seed}: {name} changed at t = {t}"))?;
    }
    Ok(())
}

pub fn check_larc_against_kalman(d: usize, m: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Sparse small integers make rank-deficient pairs common.
    let mut draw = |density: f64| -> i128 {
        if rng.random_bool(density) { rng.random_range(-2..=2) } else { 0 }
    };
    let dm: Vec<Vec<i128>> = (0..d).map(|_| (0..d).map(|_| draw(0.4)).collect()).collect();
    let mut b: Vec<Vec<i128>> = (0..m).map(|_| (0..d).map(|_| draw(0.5)).collect()).collect();
    if b.iter().all(|v| v.iter().all(|&x| x == 0)) {
        b[0][0] = 1;
    }
    let kalman = kalman_rank(&dm, &b) == d;
    let rows: Vec<Vec<f64>> = dm.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let spec = LinearSystemSpec::new(
        LieAlgebra::abelian(d).unwrap(),
        Derivation::from_rows(&rows).unwrap(),
        b.iter().map(|v| Vector::from_iterator(d, v.iter().map(|&x| x as f64))).collect(),
        ControlRange::Box(vec![1.0; m]),
        SystemFlags::default(),
    )
    .map_err(|e| e.to_string())?;
    let larc = check_larc(&spec);
    ensure(larc == kalman, || format!("seed {seed}: rank condition {larc}, Kalman {kalman}"))
}
