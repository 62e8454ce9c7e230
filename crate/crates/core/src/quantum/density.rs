//! Dense density-matrix state with in-place single-qubit kernels.
//!
//! Basis index bit `q` is qubit `q` (little-endian), bit value 1 meaning the
//! excited state. All unitaries and channels update 2x2 index blocks in
//! place; nothing allocates after construction.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

type Gate = [[Complex64; 2]; 2];

/// Single-qubit rotation about Y: Ry(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
pub fn ry(theta: f64) -> Gate {
    let (s, c) = (0.5 * theta).sin_cos();
    let z = |re: f64| Complex64::new(re, 0.0);
    [[z(c), z(-s)], [z(s), z(c)]]
}

/// Single-qubit rotation about X: Rx(t) = [[cos(t/2), -i sin(t/2)], [-i sin(t/2), cos(t/2)]].
pub fn rx(theta: f64) -> Gate {
    let (s, c) = (0.5 * theta).sin_cos();
    let c = Complex64::new(c, 0.0);
    let mis = Complex64::new(0.0, -s);
    [[c, mis], [mis, c]]
}

/// n-qubit density matrix, row-major `dim x dim` with `dim = 2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    elems: Vec<Complex64>,
}

/// `i` interpreted as an index over the remaining qubits; returns the full
/// index with a 0 bit spliced in at position `q`.
#[inline]
fn insert_zero_bit(i: usize, q: usize) -> usize {
    ((i >> q) << (q + 1)) | (i & ((1 << q) - 1))
}

#[inline]
fn zsign(m: usize, q: usize) -> f64 {
    if m & (1 << q) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl DensityMatrix {
    /// |0...0><0...0|.
    pub fn ground(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 10 {
            return Err(Error::invalid("n_qubits", n_qubits, "supported range is 1..=10"));
        }
        let dim = 1 << n_qubits;
        let mut elems = vec![Complex64::ZERO; dim * dim];
        elems[0] = Complex64::ONE;
        Ok(DensityMatrix { n_qubits, dim, elems })
    }

    /// Builds a state from explicit elements; intended for tests and
    /// diagnostics. Elements are taken as given and not projected.
    pub fn from_elems(n_qubits: usize, elems: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if elems.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} elements for {} qubits, got {}",
                dim * dim,
                n_qubits,
                elems.len()
            )));
        }
        Ok(DensityMatrix { n_qubits, dim, elems })
    }

    /// Random full-rank mixed state rho = A A^dag / tr(A A^dag) with A a
    /// complex Ginibre matrix. Hermitian and positive by construction.
    pub fn random_mixed(n_qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || n_qubits > 10 {
            return Err(Error::invalid("n_qubits", n_qubits, "supported range is 1..=10"));
        }
        let mut a = vec![Complex64::ZERO; dim * dim];
        for v in a.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *v = Complex64::new(re, im);
        }
        let mut elems = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut s = Complex64::ZERO;
                for k in 0..dim {
                    s += a[i * dim + k] * a[j * dim + k].conj();
                }
                elems[i * dim + j] = s;
            }
        }
        let tr: f64 = (0..dim).map(|i| elems[i * dim + i].re).sum();
        for v in elems.iter_mut() {
            *v /= tr;
        }
        Ok(DensityMatrix { n_qubits, dim, elems })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.elems[i * self.dim + j]
    }

    pub fn elems(&self) -> &[Complex64] {
        &self.elems
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// |tr(rho) - 1|.
    pub fn trace_error(&self) -> f64 {
        (self.trace() - Complex64::ONE).norm()
    }

    /// max_ij |rho_ij - conj(rho_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// tr(rho^2), real for Hermitian states; 1 iff pure.
    pub fn purity(&self) -> f64 {
        self.elems.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Real parts of the diagonal (basis populations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    /// rho <- U rho U^dag for a single-qubit unitary on `q`. Each disjoint
    /// 2x2 index block transforms as B' = U B U^dag.
    pub fn apply_single_qubit(&mut self, q: usize, u: &Gate) {
        debug_assert!(q < self.n_qubits);
        let half = self.dim >> 1;
        let mask = 1usize << q;
        let d = self.dim;
        for bi in 0..half {
            let r0 = insert_zero_bit(bi, q);
            let r1 = r0 | mask;
            for bj in 0..half {
                let c0 = insert_zero_bit(bj, q);
                let c1 = c0 | mask;
                let b00 = self.elems[r0 * d + c0];
                let b01 = self.elems[r0 * d + c1];
                let b10 = self.elems[r1 * d + c0];
                let b11 = self.elems[r1 * d + c1];
                let t00 = u[0][0] * b00 + u[0][1] * b10;
                let t01 = u[0][0] * b01 + u[0][1] * b11;
                let t10 = u[1][0] * b00 + u[1][1] * b10;
                let t11 = u[1][0] * b01 + u[1][1] * b11;
                self.elems[r0 * d + c0] = t00 * u[0][0].conj() + t01 * u[0][1].conj();
                self.elems[r0 * d + c1] = t00 * u[1][0].conj() + t01 * u[1][1].conj();
                self.elems[r1 * d + c0] = t10 * u[0][0].conj() + t11 * u[0][1].conj();
                self.elems[r1 * d + c1] = t10 * u[1][0].conj() + t11 * u[1][1].conj();
            }
        }
    }

    /// rho <- U rho U^dag with U = exp(-i (j/2) Z_q1 Z_q2), a diagonal
    /// unitary: entry (m, n) picks up exp(-i (j/2) (s_m - s_n)) where
    /// s_m = sign(q1, m) sign(q2, m).
    pub fn apply_zz_phase(&mut self, q1: usize, q2: usize, j: f64) {
        debug_assert!(q1 < self.n_qubits && q2 < self.n_qubits && q1 != q2);
        let d = self.dim;
        let phases: Vec<Complex64> = (0..d)
            .map(|m| {
                let s = zsign(m, q1) * zsign(m, q2);
                Complex64::from_polar(1.0, -0.5 * j * s)
            })
            .collect();
        for i in 0..d {
            for jdx in 0..d {
                self.elems[i * d + jdx] *= phases[i] * phases[jdx].conj();
            }
        }
    }

    /// Amplitude damping on qubit `q` with decay probability `p`:
    /// K0 = [[1, 0], [0, sqrt(1-p)]], K1 = [[0, sqrt(p)], [0, 0]].
    pub fn apply_amplitude_damping(&mut self, q: usize, p: f64) {
        assert!((0.0..=1.0).contains(&p), "damping probability {p} outside [0, 1]");
        let s = (1.0 - p).sqrt();
        let half = self.dim >> 1;
        let mask = 1usize << q;
        let d = self.dim;
        for bi in 0..half {
            let r0 = insert_zero_bit(bi, q);
            let r1 = r0 | mask;
            for bj in 0..half {
                let c0 = insert_zero_bit(bj, q);
                let c1 = c0 | mask;
                let b11 = self.elems[r1 * d + c1];
                self.elems[r0 * d + c0] += p * b11;
                self.elems[r0 * d + c1] *= s;
                self.elems[r1 * d + c0] *= s;
                self.elems[r1 * d + c1] = (1.0 - p) * b11;
            }
        }
    }

    /// Pure dephasing on qubit `q` as a phase-flip channel,
    /// K0 = sqrt(1 - p/2) I, K1 = sqrt(p/2) Z: coherences in `q` scale by
    /// exactly (1 - p), populations are untouched.
    pub fn apply_dephasing(&mut self, q: usize, p: f64) {
        assert!((0.0..=1.0).contains(&p), "dephasing probability {p} outside [0, 1]");
        let f = 1.0 - p;
        let d = self.dim;
        let mask = 1usize << q;
        for i in 0..d {
            for j in 0..d {
                if (i ^ j) & mask != 0 {
                    self.elems[i * d + j] *= f;
                }
            }
        }
    }

    /// Scales every off-diagonal element by `f`, leaving populations fixed.
    pub fn scale_off_diagonal(&mut self, f: f64) {
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    self.elems[i * d + j] *= f;
                }
            }
        }
    }

    /// <Z_q>, from populations only.
    pub fn z_expectation(&self, q: usize) -> f64 {
        (0..self.dim).map(|m| self.get(m, m).re * zsign(m, q)).sum()
    }

    /// <Z_q1 Z_q2>, from populations only.
    pub fn zz_expectation(&self, q1: usize, q2: usize) -> f64 {
        (0..self.dim)
            .map(|m| self.get(m, m).re * zsign(m, q1) * zsign(m, q2))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x_expectation(rho: &DensityMatrix, q: usize) -> f64 {
        // tr(rho X_q) = sum_m rho[m][m ^ mask]
        let mask = 1usize << q;
        (0..rho.dim()).map(|m| rho.get(m, m ^ mask).re).sum()
    }

    #[test]
    fn ground_state_is_valid_and_polarized() {
        let rho = DensityMatrix::ground(3).unwrap();
        assert_eq!(rho.trace_error(), 0.0);
        assert_eq!(rho.hermiticity_error(), 0.0);
        assert_eq!(rho.purity(), 1.0);
        for q in 0..3 {
            assert_eq!(rho.z_expectation(q), 1.0);
        }
        assert_eq!(rho.zz_expectation(0, 2), 1.0);
    }

    #[test]
    fn ry_pi_flips_to_excited() {
        let mut rho = DensityMatrix::ground(2).unwrap();
        rho.apply_single_qubit(1, &ry(std::f64::consts::PI));
        assert_abs_diff_eq!(rho.z_expectation(1), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.z_expectation(0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.zz_expectation(0, 1), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn ry_half_pi_equalizes_populations() {
        let mut rho = DensityMatrix::ground(1).unwrap();
        rho.apply_single_qubit(0, &ry(std::f64::consts::FRAC_PI_2));
        assert_abs_diff_eq!(rho.z_expectation(0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x_expectation(&rho, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unitaries_preserve_trace_hermiticity_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let mut rho = DensityMatrix::random_mixed(3, &mut rng).unwrap();
            let purity = rho.purity();
            rho.apply_single_qubit(1, &ry(0.7));
            rho.apply_single_qubit(2, &rx(1.3));
            rho.apply_zz_phase(0, 2, 0.9);
            assert!(rho.trace_error() < 1e-13);
            assert!(rho.hermiticity_error() < 1e-13);
            assert_abs_diff_eq!(rho.purity(), purity, epsilon = 1e-12);
        }
    }

    // ZZ with angle pi on |++> lands on (a phase times) |-->.
    #[test]
    fn zz_pi_on_plus_plus_gives_minus_minus() {
        let mut rho = DensityMatrix::ground(2).unwrap();
        rho.apply_single_qubit(0, &ry(std::f64::consts::FRAC_PI_2));
        rho.apply_single_qubit(1, &ry(std::f64::consts::FRAC_PI_2));
        assert_abs_diff_eq!(x_expectation(&rho, 0), 1.0, epsilon = 1e-14);
        rho.apply_zz_phase(0, 1, std::f64::consts::PI);
        assert_abs_diff_eq!(x_expectation(&rho, 0), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x_expectation(&rho, 1), -1.0, epsilon = 1e-14);
        assert!(rho.trace_error() < 1e-15);
    }

    #[test]
    fn zz_leaves_populations_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rho = DensityMatrix::random_mixed(3, &mut rng).unwrap();
        let diag = rho.diagonal();
        rho.apply_zz_phase(0, 2, 1.234);
        let after = rho.diagonal();
        for (a, b) in diag.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn amplitude_damping_depletes_excited_population() {
        let mut rho = DensityMatrix::ground(1).unwrap();
        rho.apply_single_qubit(0, &ry(std::f64::consts::PI));
        rho.apply_amplitude_damping(0, 0.3);
        // <Z> = p - (1 - p) = 2p - 1.
        assert_abs_diff_eq!(rho.z_expectation(0), -0.4, epsilon = 1e-15);
        assert!(rho.trace_error() < 1e-15);
        rho.apply_amplitude_damping(0, 1.0);
        assert_abs_diff_eq!(rho.z_expectation(0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn amplitude_damping_scales_coherence_by_sqrt() {
        let mut rho = DensityMatrix::ground(1).unwrap();
        rho.apply_single_qubit(0, &ry(std::f64::consts::FRAC_PI_2));
        let before = rho.get(0, 1).norm();
        rho.apply_amplitude_damping(0, 0.36);
        assert_abs_diff_eq!(rho.get(0, 1).norm(), before * 0.8, epsilon = 1e-15);
    }

    #[test]
    fn dephasing_scales_coherence_leaves_populations() {
        let mut rho = DensityMatrix::ground(1).unwrap();
        rho.apply_single_qubit(0, &ry(std::f64::consts::FRAC_PI_2));
        let diag = rho.diagonal();
        let before = rho.get(0, 1);
        rho.apply_dephasing(0, 0.25);
        assert_eq!(rho.diagonal(), diag);
        assert_abs_diff_eq!((rho.get(0, 1) / before).re, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn channels_preserve_trace_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let mut rho = DensityMatrix::random_mixed(4, &mut rng).unwrap();
            rho.apply_amplitude_damping(2, 0.17);
            rho.apply_dephasing(1, 0.4);
            rho.scale_off_diagonal(0.5);
            assert!(rho.trace_error() < 1e-13);
            assert!(rho.hermiticity_error() < 1e-13);
        }
    }

    #[test]
    fn random_mixed_is_reproducible() {
        let a = DensityMatrix::random_mixed(3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = DensityMatrix::random_mixed(3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }
}
