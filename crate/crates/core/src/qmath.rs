//! Real linear algebra for states in the real span of |0⟩ and |1⟩.
//!
//! Every state used by the protocol lies in the real qubit plane, so a pure
//! qubit is a single angle and a product state is a list of angles. Dense
//! matrices are only built for the brute-force oracles (dimension ≤ 1024).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix dimension the dense routines accept.
pub const MAX_DIM: usize = 1024;

/// Off-diagonal Frobenius norm at which the Jacobi iteration stops.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Minimum eigenvalue tolerated for positive semidefiniteness.
pub const PSD_SLACK: f64 = 1e-10;
/// Entrywise tolerance for `Σ E_k = 1`.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// The pure state `cos(α)|0⟩ + sin(α)|1⟩`, stored as `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    half_angle: f64,
}

impl PureState {
    pub const fn new(half_angle: f64) -> Self {
        Self { half_angle }
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn amplitudes(&self) -> [f64; 2] {
        [self.half_angle.cos(), self.half_angle.sin()]
    }

    /// The state rotated by a quarter turn, orthogonal to `self`.
    pub fn orthogonal(&self) -> Self {
        Self::new(self.half_angle + std::f64::consts::FRAC_PI_2)
    }

    pub fn projector(&self) -> SymMatrix {
        SymMatrix::outer(&self.amplitudes())
    }
}

/// Inner product of two real-plane qubit states.
pub fn overlap(u: PureState, v: PureState) -> f64 {
    (u.half_angle - v.half_angle).cos()
}

/// Tensor product of pure qubit states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    factors: Vec<PureState>,
}

impl ProductState {
    pub fn new(factors: Vec<PureState>) -> Self {
        Self { factors }
    }

    pub fn repeated(state: PureState, count: usize) -> Self {
        Self {
            factors: vec![state; count],
        }
    }

    pub fn factors(&self) -> &[PureState] {
        &self.factors
    }

    /// Particle count.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn push(&mut self, state: PureState) {
        self.factors.push(state);
    }

    /// Explicit `2^n` amplitude vector; factor 0 is the most significant bit.
    pub fn to_vector(&self) -> Result<Vec<f64>> {
        if self.factors.len() > 10 {
            return Err(Error::Resource {
                what: "explicit product-state vector (particles)",
                limit: 10,
            });
        }
        let mut v = vec![1.0];
        for f in &self.factors {
            let [a0, a1] = f.amplitudes();
            v = v.iter().flat_map(|&x| [x * a0, x * a1]).collect();
        }
        Ok(v)
    }
}

/// Product of factor overlaps, accumulated in log space so that long
/// products do not underflow. Exactly zero if any factor overlap is zero.
pub fn product_overlap(p: &ProductState, q: &ProductState) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension {
            expected: p.len(),
            found: q.len(),
        });
    }
    let mut negative = false;
    let mut log_mag = 0.0;
    for (&u, &v) in p.factors.iter().zip(&q.factors) {
        let o = overlap(u, v);
        if o == 0.0 {
            return Ok(0.0);
        }
        negative ^= o < 0.0;
        log_mag += o.abs().ln();
    }
    let mag = log_mag.exp();
    Ok(if negative { -mag } else { mag })
}

/// Probability that `state` passes the rank-1 test projecting onto `target`.
pub fn born_probability(state: &ProductState, target: &ProductState) -> Result<f64> {
    let o = product_overlap(state, target)?;
    Ok((o * o).min(1.0))
}

/// Dense real symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Validates shape, dimension limit and symmetry (to 1e-12 relative).
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Resource {
                what: "matrix dimension",
                limit: MAX_DIM,
            });
        }
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                found: data.len(),
            });
        }
        let m = Self { dim, data };
        let scale = m.max_abs().max(1.0);
        let residual = m.asymmetry();
        if residual > 1e-12 * scale {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m.data[k * diag.len() + k] = d;
        }
        m
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for &a in v {
            data.extend(v.iter().map(|&b| a * b));
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    /// Sets both `(row, col)` and `(col, row)`.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
        self.data[col * self.dim + row] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues in the order the rotations left them on the diagonal.
    pub values: Vec<f64>,
    dim: usize,
    /// Eigenvectors as columns, row-major; absent for values-only solves.
    vectors: Option<Vec<f64>>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `k`-th eigenvector (unit norm), if vectors were accumulated.
    pub fn vector(&self, k: usize) -> Option<Vec<f64>> {
        self.vectors
            .as_ref()
            .map(|v| (0..self.dim).map(|r| v[r * self.dim + k]).collect())
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn spectral_projector(&self, keep: impl Fn(f64) -> bool) -> Option<SymMatrix> {
        let mut p = SymMatrix::zeros(self.dim);
        for (k, &lambda) in self.values.iter().enumerate() {
            if keep(lambda) {
                let v = self.vector(k)?;
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        p.data[r * self.dim + c] += v[r] * v[c];
                    }
                }
            }
        }
        Some(p)
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Full eigen-decomposition by cyclic Jacobi rotations.
pub fn eigen_sym(m: &SymMatrix) -> Result<SymEigen> {
    jacobi(m, true)
}

/// Eigenvalues only; skips eigenvector accumulation.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|e| e.values)
}

fn jacobi(m: &SymMatrix, want_vectors: bool) -> Result<SymEigen> {
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = want_vectors.then(|| SymMatrix::identity(n).data);
    let tol = JACOBI_TOL * frobenius(&a).max(1.0);

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };

    let mut off = off_norm(&a);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        off = off_norm(&a);
    }

    Ok(SymEigen {
        values: (0..n).map(|k| a[k * n + k]).collect(),
        dim: n,
        vectors: v,
    })
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `(1/2) Σ |λ(ρ0 − ρ1)|`.
pub fn trace_distance(rho0: &SymMatrix, rho1: &SymMatrix) -> Result<f64> {
    let diff = rho0.sub(rho1)?;
    let values = eigenvalues_sym(&diff)?;
    Ok(0.5 * values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Outcome labels carried by POVM elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PovmLabel {
    Zero,
    One,
    /// The `⊥` outcome of a commitment test.
    Reject,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<(PovmLabel, SymMatrix)>,
}

impl Povm {
    pub fn new(elements: Vec<(PovmLabel, SymMatrix)>) -> Result<Self> {
        if let Some((_, first)) = elements.first() {
            for (_, e) in &elements {
                first.check_same_dim(e)?;
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[(PovmLabel, SymMatrix)] {
        &self.elements
    }

    pub fn element(&self, label: PovmLabel) -> Option<&SymMatrix> {
        self.elements
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, e)| e)
    }

    /// Outcome probability `⟨v|E|v⟩` for a normalized state vector.
    pub fn probability(&self, label: PovmLabel, state: &[f64]) -> Option<f64> {
        self.element(label).map(|e| e.quadratic_form(state))
    }

    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |(_, e)| e.dim)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PovmViolation {
    Positivity {
        index: usize,
        label: PovmLabel,
        min_eigenvalue: f64,
    },
    Completeness {
        max_residual: f64,
    },
    Empty,
    Numerical(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PovmReport {
    pub violations: Vec<PovmViolation>,
}

impl PovmReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity of every element and completeness of the sum.
pub fn validate_povm(p: &Povm) -> PovmReport {
    let mut report = PovmReport::default();
    let Some((_, first)) = p.elements.first() else {
        report.violations.push(PovmViolation::Empty);
        return report;
    };
    let mut sum = SymMatrix::zeros(first.dim);
    for (index, (label, e)) in p.elements.iter().enumerate() {
        match eigenvalues_sym(e) {
            Ok(values) => {
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                if min < -PSD_SLACK {
                    report.violations.push(PovmViolation::Positivity {
                        index,
                        label: *label,
                        min_eigenvalue: min,
                    });
                }
            }
            Err(err) => report
                .violations
                .push(PovmViolation::Numerical(err.to_string())),
        }
        // dims were checked at construction
        sum = sum.add(e).expect("equal dimensions");
    }
    let residual = sum
        .max_abs_diff(&SymMatrix::identity(first.dim))
        .expect("equal dimensions");
    if residual > COMPLETENESS_TOL {
        report.violations.push(PovmViolation::Completeness {
            max_residual: residual,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn psi(bit: u8, theta: f64) -> PureState {
        PureState::new(if bit == 0 { theta / 2.0 } else { -theta / 2.0 })
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(PureState::new(0.0), PureState::new(0.0)), 1.0);
        assert!(overlap(PureState::new(0.0), PureState::new(FRAC_PI_2)).abs() < 1e-16);
        let o = overlap(psi(0, FRAC_PI_3), psi(1, FRAC_PI_3));
        assert!((o - 0.5).abs() < 1e-15);
    }

    #[test]
    fn product_overlap_examples() {
        let t = FRAC_PI_3;
        let single = product_overlap(
            &ProductState::repeated(psi(0, t), 1),
            &ProductState::repeated(psi(1, t), 1),
        )
        .unwrap();
        assert!((single - overlap(psi(0, t), psi(1, t))).abs() < 1e-15);

        let three = product_overlap(
            &ProductState::repeated(psi(0, t), 3),
            &ProductState::repeated(psi(1, t), 3),
        )
        .unwrap();
        assert!((three - 0.125).abs() < 1e-14);

        let p = ProductState::new(vec![psi(0, 0.3), psi(1, 0.7), PureState::new(1.1)]);
        assert!((product_overlap(&p, &p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_overlap_rejects_length_mismatch() {
        let p = ProductState::repeated(PureState::new(0.1), 2);
        let q = ProductState::repeated(PureState::new(0.1), 3);
        assert!(matches!(
            product_overlap(&p, &q),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn product_overlap_matches_power_without_underflow() {
        let theta = PI / 9.0;
        for n in 1..=60 {
            let got = product_overlap(
                &ProductState::repeated(psi(0, theta), n),
                &ProductState::repeated(psi(1, theta), n),
            )
            .unwrap();
            assert!((got - theta.cos().powi(n as i32)).abs() < 1e-12, "n={n}");
        }
        // far below f64::MIN_POSITIVE the log-space product still reports a
        // tiny positive number instead of a spurious sign or NaN.
        let tiny = product_overlap(
            &ProductState::repeated(PureState::new(0.0), 4000),
            &ProductState::repeated(PureState::new(1.5), 4000),
        )
        .unwrap();
        assert!((0.0..1e-300).contains(&tiny));
        let zero = product_overlap(
            &ProductState::new(vec![PureState::new(0.0), PureState::new(0.2)]),
            &ProductState::new(vec![PureState::new(0.0).orthogonal(), PureState::new(0.2)]),
        )
        .unwrap();
        assert!(zero.abs() < 1e-16);
    }

    #[test]
    fn born_probability_examples() {
        let theta = PI / 9.0;
        let target = ProductState::repeated(psi(1, theta), 6);
        assert!((born_probability(&target, &target).unwrap() - 1.0).abs() < 1e-15);

        let a = ProductState::repeated(PureState::new(0.0), 3);
        let b = ProductState::repeated(PureState::new(FRAC_PI_2), 3);
        assert!(born_probability(&a, &b).unwrap() < 1e-30);

        // two old factors, four new ones, tested against the new bit
        let mut held = ProductState::repeated(psi(0, theta), 2);
        for _ in 0..4 {
            held.push(psi(1, theta));
        }
        let p = born_probability(&held, &target).unwrap();
        assert!((p - theta.cos().powi(4)).abs() < 1e-12);
        assert!((p - 0.779_73).abs() < 1e-5);

        // explicit 2^n vectors
        let v = held.to_vector().unwrap();
        let w = target.to_vector().unwrap();
        let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((dot * dot - p).abs() < 1e-12);
    }

    #[test]
    fn born_probability_explicit_vectors_up_to_ten() {
        let theta = PI / 9.0;
        for n in 1..=10 {
            for old in 0..n {
                let mut held = ProductState::repeated(psi(0, theta), old);
                for _ in old..n {
                    held.push(psi(1, theta));
                }
                let target = ProductState::repeated(psi(1, theta), n);
                let v = held.to_vector().unwrap();
                let w = target.to_vector().unwrap();
                let dot: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                let p = born_probability(&held, &target).unwrap();
                assert!((dot * dot - p).abs() < 1e-12);
                assert!((p - theta.cos().powi(2 * old as i32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_examples() {
        let mut vals = eigenvalues_sym(&SymMatrix::identity(4)).unwrap();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![1.0; 4]);

        let e = eigen_sym(&SymMatrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.sorted_values(), vec![1.0, 3.0]);

        let x = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = eigen_sym(&x).unwrap().sorted_values();
        assert!((s[0] + 1.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_symmetric() {
        assert!(matches!(
            SymMatrix::new(2, vec![0.0, 1.0, 0.5, 0.0]),
            Err(Error::NotSymmetric { .. })
        ));
    }

    fn random_symmetric(dim: usize, seed: u64) -> SymMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = SymMatrix::zeros(dim);
        for r in 0..dim {
            for c in r..dim {
                m.set(r, c, rng.random_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn eigen_residuals_on_random_matrices() {
        for seed in 0..200u64 {
            let dim = 1 + (seed as usize * 7) % 64;
            let m = random_symmetric(dim, seed);
            let e = eigen_sym(&m).unwrap();
            let trace_err = (e.values.iter().sum::<f64>() - m.trace()).abs();
            assert!(trace_err < 1e-9, "seed {seed}");
            let mut recon = SymMatrix::zeros(dim);
            for (k, &lambda) in e.values.iter().enumerate() {
                let v = e.vector(k).unwrap();
                let mv = m.mul_vec(&v);
                let resid = mv
                    .iter()
                    .zip(&v)
                    .fold(0.0f64, |acc, (a, b)| acc.max((a - lambda * b).abs()));
                assert!(resid < 1e-8, "seed {seed} k {k}: {resid}");
                for r in 0..dim {
                    for c in 0..dim {
                        recon.data[r * dim + c] += lambda * v[r] * v[c];
                    }
                }
            }
            assert!(recon.max_abs_diff(&m).unwrap() < 1e-8);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let rho = PureState::new(0.4).projector();
        assert!(trace_distance(&rho, &rho).unwrap().abs() < 1e-15);

        let a = PureState::new(0.0).projector();
        let b = PureState::new(FRAC_PI_2).projector();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);

        // pure states at angle π/4 (half-angles ±π/8)
        let a = PureState::new(FRAC_PI_4 / 2.0).projector();
        let b = PureState::new(-FRAC_PI_4 / 2.0).projector();
        let d = trace_distance(&a, &b).unwrap();
        assert!((d - FRAC_PI_4.sin()).abs() < 1e-12);

        assert!(matches!(
            trace_distance(&SymMatrix::identity(2), &SymMatrix::identity(4)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn trace_distance_of_pure_pair_is_sine() {
        for k in 0..50 {
            let omega = FRAC_PI_2 * k as f64 / 49.0;
            let a = PureState::new(omega / 2.0).projector();
            let b = PureState::new(-omega / 2.0).projector();
            let d = trace_distance(&a, &b).unwrap();
            assert!((d - omega.sin()).abs() < 1e-9, "omega {omega}");
        }
    }

    #[test]
    fn validate_povm_examples() {
        let theta = PI / 9.0;
        let phi0 = ProductState::repeated(psi(0, theta), 3)
            .to_vector()
            .unwrap();
        let e0 = SymMatrix::outer(&phi0);
        let e0_perp = SymMatrix::identity(8).sub(&e0).unwrap();
        let ok = Povm::new(vec![(PovmLabel::Zero, e0), (PovmLabel::Reject, e0_perp)]).unwrap();
        assert!(validate_povm(&ok).is_ok());

        let twice = Povm::new(vec![
            (PovmLabel::Zero, SymMatrix::identity(2)),
            (PovmLabel::One, SymMatrix::identity(2)),
        ])
        .unwrap();
        let report = validate_povm(&twice);
        assert!(matches!(
            report.violations.as_slice(),
            [PovmViolation::Completeness { max_residual }] if (*max_residual - 1.0).abs() < 1e-12
        ));

        let negative = Povm::new(vec![
            (PovmLabel::Zero, SymMatrix::from_diagonal(&[1.1, 0.0])),
            (PovmLabel::One, SymMatrix::from_diagonal(&[-0.1, 1.0])),
        ])
        .unwrap();
        let report = validate_povm(&negative);
        assert!(matches!(
            report.violations.as_slice(),
            [PovmViolation::Positivity { index: 1, label: PovmLabel::One, min_eigenvalue }]
                if (*min_eigenvalue + 0.1).abs() < 1e-12
        ));
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_bounded(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (u, v) = (PureState::new(a), PureState::new(b));
            prop_assert_eq!(overlap(u, v), overlap(v, u));
            prop_assert!(overlap(u, v).abs() <= 1.0);
            prop_assert!((overlap(u, u) - 1.0).abs() < 1e-15);
            prop_assert!((overlap(u, v) - (a - b).cos()).abs() < 1e-12);
        }

        #[test]
        fn product_overlap_is_product_of_factors(
            pairs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..40)
        ) {
            let p = ProductState::new(pairs.iter().map(|&(a, _)| PureState::new(a)).collect());
            let q = ProductState::new(pairs.iter().map(|&(_, b)| PureState::new(b)).collect());
            let direct: f64 = pairs.iter().map(|&(a, b)| (a - b).cos()).product();
            let got = product_overlap(&p, &q).unwrap();
            prop_assert!((got - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300);
        }
    }
}
