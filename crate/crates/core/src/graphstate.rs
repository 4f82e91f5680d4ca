//! Stabilizer simulation of graph and cluster states.
//!
//! A state on `n` qubits is held as `n` independent, commuting Pauli
//! generators in binary-symplectic form (an X bit row, a Z bit row and a
//! phase). Only generators are kept, no destabilizers; membership of a Pauli
//! operator in the stabilizer group is decided by Gaussian elimination over
//! GF(2), with phases tracked through every row product.
//!
//! Qubit `q` corresponds to bit `q` of a computational-basis index in the
//! dense statevector routines.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliBasis {
    X,
    Y,
    Z,
}

impl PauliBasis {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliBasis::X => (true, false),
            PauliBasis::Y => (true, true),
            PauliBasis::Z => (false, true),
        }
    }
}

/// A Pauli operator `i^phase · ⊗ σ(x_q, z_q)` with `σ(1,1) = Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn single(n: usize, qubit: usize, basis: PauliBasis) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, basis);
        p
    }

    /// `X_a · ∏_{b ∈ N(a)} Z_b`.
    pub fn cluster_stabilizer(n: usize, a: usize, edges: &EdgeSet) -> Self {
        let mut p = Self::single(n, a, PauliBasis::X);
        for b in edges.neighbors(a) {
            p.set_z(b, true);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, qubit: usize, basis: PauliBasis) {
        let (x, z) = basis.bits();
        self.set_x(qubit, x);
        self.set_z(qubit, z);
    }

    pub fn set_x(&mut self, qubit: usize, on: bool) {
        set_bit(&mut self.x, qubit, on);
    }

    pub fn set_z(&mut self, qubit: usize, on: bool) {
        set_bit(&mut self.z, qubit, on);
    }

    pub fn x(&self, qubit: usize) -> bool {
        get_bit(&self.x, qubit)
    }

    pub fn z(&self, qubit: usize) -> bool {
        get_bit(&self.z, qubit)
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn is_negative(&self) -> bool {
        self.phase == 2
    }

    /// Power of `i` in front of the tensor product.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for k in 0..self.x.len() {
            parity ^= ((self.x[k] & other.z[k]) ^ (self.z[k] & other.x[k])).count_ones() & 1;
        }
        parity == 0
    }

    /// `self ← self · other`.
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        let mut plus = 0u32;
        let mut minus = 0u32;
        for k in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[k], self.z[k], other.x[k], other.z[k]);
            plus += ((x1 & z1 & !x2 & z2) | (x1 & !z1 & x2 & z2) | (!x1 & z1 & x2 & !z2)).count_ones();
            minus += ((x1 & z1 & x2 & !z2) | (x1 & !z1 & !x2 & z2) | (!x1 & z1 & x2 & z2)).count_ones();
            self.x[k] = x1 ^ x2;
            self.z[k] = z1 ^ z2;
        }
        let g = (plus % 4 + 4 - minus % 4) % 4;
        self.phase = ((self.phase as u32 + other.phase as u32 + g) % 4) as u8;
    }

    /// `+XZI`-style label, qubit 0 first.
    pub fn label(&self) -> String {
        let sign = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        let body: String = (0..self.n)
            .map(|q| match (self.x(q), self.z(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect();
        format!("{sign}{body}")
    }

    fn bit(&self, col: usize) -> bool {
        if col < self.n {
            self.x(col)
        } else {
            self.z(col - self.n)
        }
    }
}

fn get_bit(v: &[u64], q: usize) -> bool {
    (v[q / 64] >> (q % 64)) & 1 == 1
}

fn set_bit(v: &mut [u64], q: usize, on: bool) {
    if on {
        v[q / 64] |= 1 << (q % 64);
    } else {
        v[q / 64] &= !(1 << (q % 64));
    }
}

/// Row-echelon form of a generator set, reusable for many membership tests.
struct Echelon {
    rows: Vec<PauliString>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(generators: &[PauliString], n: usize) -> Self {
        let mut rows = generators.to_vec();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..2 * n {
            if rank == rows.len() {
                break;
            }
            let Some(found) = (rank..rows.len()).find(|&r| rows[r].bit(col)) else {
                continue;
            };
            rows.swap(rank, found);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail.iter_mut().filter(|r| r.bit(col)) {
                row.mul_assign_right(pivot);
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Self { rows, pivots }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `Some(true)` if `+p` is in the group, `Some(false)` if `-p` is, `None`
    /// otherwise.
    fn sign_of(&self, p: &PauliString) -> Option<bool> {
        let mut rest = p.clone();
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if rest.bit(col) {
                rest.mul_assign_right(row);
            }
        }
        if !rest.is_identity_up_to_phase() {
            return None;
        }
        // p · g₁ ⋯ g_k = i^phase · I, so p = i^phase · ∏g.
        match rest.phase {
            0 => Some(true),
            2 => Some(false),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    generators: Vec<PauliString>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableauDump {
    pub n_qubits: usize,
    pub generators: Vec<String>,
}

/// `|+⟩^⊗n`, stabilized by `X_q` on every qubit.
pub fn new_plus_state(n: usize) -> Result<StabilizerTableau> {
    if n == 0 {
        return Err(Error::InvalidArgument("tableau needs at least one qubit".into()));
    }
    Ok(StabilizerTableau {
        n,
        generators: (0..n).map(|q| PauliString::single(n, q, PauliBasis::X)).collect(),
    })
}

impl StabilizerTableau {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::InvalidArgument(format!("qubit {q} outside 0..{}", self.n)))
        } else {
            Ok(())
        }
    }

    /// Conjugates every generator by `CZ(a, b)`.
    pub fn apply_cphase(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!("CPHASE needs two distinct qubits, got {a} twice")));
        }
        for g in &mut self.generators {
            let (xa, za, xb, zb) = (g.x(a), g.z(a), g.x(b), g.z(b));
            if xa && xb && (za ^ zb) {
                g.negate();
            }
            g.set_z(b, zb ^ xa);
            g.set_z(a, za ^ xb);
        }
        Ok(())
    }

    /// Applies one CZ per edge.
    pub fn apply_edges(&mut self, edges: &EdgeSet) -> Result<()> {
        for (a, b) in edges.iter() {
            self.apply_cphase(a, b)?;
        }
        Ok(())
    }

    /// Whether `+p` (`Some(true)`) or `-p` (`Some(false)`) stabilizes the state.
    pub fn stabilizer_sign(&self, p: &PauliString) -> Option<bool> {
        Echelon::new(&self.generators, self.n).sign_of(p)
    }

    /// True iff every `K_a = X_a ∏ Z_b` of the graph `edges` stabilizes the
    /// state with sign `+`.
    pub fn verify_cluster(&self, edges: &EdgeSet) -> bool {
        if edges.check_bound(self.n).is_err() {
            return false;
        }
        let echelon = Echelon::new(&self.generators, self.n);
        let adj = edges.adjacency(self.n);
        (0..self.n).all(|a| {
            let mut k = PauliString::single(self.n, a, PauliBasis::X);
            for &b in &adj[a] {
                k.set_z(b, true);
            }
            echelon.sign_of(&k) == Some(true)
        })
    }

    /// Rank `n` over GF(2) and pairwise commuting generators.
    pub fn is_valid(&self) -> bool {
        let commuting = self.generators.iter().enumerate().all(|(i, g)| {
            self.generators[i + 1..].iter().all(|h| g.commutes_with(h))
        });
        let hermitian = self.generators.iter().all(|g| g.phase % 2 == 0);
        commuting && hermitian && Echelon::new(&self.generators, self.n).rank() == self.n
    }

    /// Probability of `outcome` (±1) for a Pauli measurement of `qubit`.
    pub fn outcome_probability(&self, qubit: usize, basis: PauliBasis, outcome: i8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let p = PauliString::single(self.n, qubit, basis);
        if self.generators.iter().any(|g| !g.commutes_with(&p)) {
            return Ok(0.5);
        }
        let sign = self.stabilizer_sign(&p).expect("commuting single-qubit Pauli lies in the group");
        Ok(if (outcome > 0) == sign { 1.0 } else { 0.0 })
    }

    /// Projects onto the given outcome and returns its probability. The
    /// tableau is left unchanged when the probability is zero.
    pub fn measure_pauli_forced(&mut self, qubit: usize, basis: PauliBasis, outcome: i8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mut p = PauliString::single(self.n, qubit, basis);
        let anti: Vec<usize> = (0..self.n).filter(|&k| !self.generators[k].commutes_with(&p)).collect();
        match anti.split_first() {
            Some((&pivot, others)) => {
                let pivot_row = self.generators[pivot].clone();
                for &k in others {
                    self.generators[k].mul_assign_right(&pivot_row);
                }
                if outcome < 0 {
                    p.negate();
                }
                self.generators[pivot] = p;
                Ok(0.5)
            }
            None => {
                let sign = self.stabilizer_sign(&p).expect("commuting single-qubit Pauli lies in the group");
                Ok(if (outcome > 0) == sign { 1.0 } else { 0.0 })
            }
        }
    }

    /// Measures `basis` on `qubit`, drawing random outcomes from `rng`.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, qubit: usize, basis: PauliBasis, rng: &mut R) -> Result<i8> {
        let plus = self.outcome_probability(qubit, basis, 1)?;
        let outcome = if plus == 1.0 {
            1
        } else if plus == 0.0 {
            -1
        } else if rng.random_bool(0.5) {
            1
        } else {
            -1
        };
        self.measure_pauli_forced(qubit, basis, outcome)?;
        Ok(outcome)
    }

    pub fn dump(&self) -> TableauDump {
        TableauDump {
            n_qubits: self.n,
            generators: self.generators.iter().map(PauliString::label).collect(),
        }
    }
}

/// Largest register accepted by [`statevector_oracle`].
pub const ORACLE_MAX_QUBITS: usize = 16;

/// Dense amplitudes of `∏_{(a,b)} CZ_ab |+⟩^⊗n`.
pub fn statevector_oracle(edges: &EdgeSet, n: usize) -> Result<Vec<Complex64>> {
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::Capacity(format!("oracle handles at most {ORACLE_MAX_QUBITS} qubits, got {n}")));
    }
    edges.check_bound(n)?;
    let amp = (0.5f64).powf(n as f64 / 2.0);
    let masks: Vec<usize> = edges.iter().map(|(a, b)| (1 << a) | (1 << b)).collect();
    Ok((0..1usize << n)
        .map(|idx| {
            let flips = masks.iter().filter(|&&m| idx & m == m).count();
            Complex64::new(if flips % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect())
}

/// `⟨ψ|P|ψ⟩` for a register of at most 64 qubits.
pub fn pauli_expectation(state: &[Complex64], p: &PauliString) -> Complex64 {
    let (x, z) = (p.x.first().copied().unwrap_or(0) as usize, p.z.first().copied().unwrap_or(0) as usize);
    let y_count = (x & z).count_ones();
    let prefactor = Complex64::i().powu(p.phase as u32 + y_count);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, amp) in state.iter().enumerate() {
        let sign = if (b & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        // P|b⟩ = prefactor · sign · |b ⊕ x⟩
        acc += state[b ^ x].conj() * amp * sign;
    }
    acc * prefactor
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn labels(t: &StabilizerTableau) -> Vec<String> {
        t.dump().generators
    }

    /// Statevector of qubits after explicit CZ on a product of |+⟩.
    fn direct_cz_state(n: usize, pairs: &[(usize, usize)]) -> Vec<Complex64> {
        let amp = (0.5f64).powf(n as f64 / 2.0);
        let mut v = vec![Complex64::new(amp, 0.0); 1 << n];
        for &(a, b) in pairs {
            for (idx, c) in v.iter_mut().enumerate() {
                if (idx >> a) & 1 == 1 && (idx >> b) & 1 == 1 {
                    *c = -*c;
                }
            }
        }
        v
    }

    #[test]
    fn plus_state_generators() {
        assert_eq!(labels(&new_plus_state(1).unwrap()), ["+X"]);
        assert_eq!(labels(&new_plus_state(3).unwrap()), ["+XII", "+IXI", "+IIX"]);
        assert!(matches!(new_plus_state(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn x_on_plus_is_deterministic() {
        let mut t = new_plus_state(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            assert_eq!(t.measure_pauli(0, PauliBasis::X, &mut rng).unwrap(), 1);
        }
        assert_eq!(labels(&t), ["+X"]);
    }

    #[test]
    fn cphase_on_two_plus_states() {
        let mut t = new_plus_state(2).unwrap();
        t.apply_cphase(0, 1).unwrap();
        assert_eq!(labels(&t), ["+XZ", "+ZX"]);
        // statevector check of both generators
        let psi = direct_cz_state(2, &[(0, 1)]);
        for g in t.generators() {
            let e = pauli_expectation(&psi, g);
            assert!((e.re - 1.0).abs() < 1e-12 && e.im.abs() < 1e-12);
        }
    }

    #[test]
    fn cphase_is_an_involution() {
        let mut t = new_plus_state(4).unwrap();
        t.apply_cphase(0, 2).unwrap();
        t.apply_cphase(1, 3).unwrap();
        let before = t.clone();
        t.apply_cphase(2, 3).unwrap();
        t.apply_cphase(2, 3).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn cphase_argument_errors() {
        let mut t = new_plus_state(2).unwrap();
        assert!(t.apply_cphase(1, 1).is_err());
        assert!(t.apply_cphase(0, 2).is_err());
    }

    #[test]
    fn chain_middle_stabilizer() {
        let mut t = new_plus_state(3).unwrap();
        t.apply_cphase(0, 1).unwrap();
        t.apply_cphase(1, 2).unwrap();
        let mut k = PauliString::single(3, 1, PauliBasis::X);
        k.set_z(0, true);
        k.set_z(2, true);
        assert_eq!(t.stabilizer_sign(&k), Some(true));
        let psi = direct_cz_state(3, &[(0, 1), (1, 2)]);
        assert!((pauli_expectation(&psi, &k).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn verify_cluster_examples() {
        let t = new_plus_state(3).unwrap();
        assert!(t.verify_cluster(&EdgeSet::new()));
        let mut t2 = new_plus_state(2).unwrap();
        t2.apply_cphase(0, 1).unwrap();
        assert!(t2.verify_cluster(&EdgeSet::from_pairs([(0, 1)]).unwrap()));
        assert!(!t2.verify_cluster(&EdgeSet::new()));
        assert!(!t2.verify_cluster(&EdgeSet::from_pairs([(0, 5)]).unwrap()));
    }

    #[test]
    fn z_on_plus_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let shots = 10_000;
        let ups = (0..shots)
            .filter(|_| {
                let mut t = new_plus_state(1).unwrap();
                t.measure_pauli(0, PauliBasis::Z, &mut rng).unwrap() == 1
            })
            .count() as f64;
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((ups - shots as f64 / 2.0).abs() < 5.0 * sigma, "{ups}");
    }

    #[test]
    fn z_on_cluster_leaves_partner_in_x_eigenstate() {
        for outcome in [1i8, -1] {
            let mut t = new_plus_state(2).unwrap();
            t.apply_cphase(0, 1).unwrap();
            assert_eq!(t.measure_pauli_forced(0, PauliBasis::Z, outcome).unwrap(), 0.5);
            let x1 = PauliString::single(2, 1, PauliBasis::X);
            assert_eq!(t.stabilizer_sign(&x1), Some(outcome > 0));
            assert!(t.is_valid());

            // oracle: project the dense state on Z₀ = outcome and check X₁
            let psi = direct_cz_state(2, &[(0, 1)]);
            let bit = if outcome > 0 { 0 } else { 1 };
            let mut proj: Vec<Complex64> =
                psi.iter().enumerate().map(|(i, a)| if i & 1 == bit { *a } else { Complex64::new(0.0, 0.0) }).collect();
            let norm = proj.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            proj.iter_mut().for_each(|a| *a /= norm);
            let e = pauli_expectation(&proj, &x1).re;
            assert!((e - outcome as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_small_cases() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let one = statevector_oracle(&EdgeSet::new(), 1).unwrap();
        assert!((one[0].re - s).abs() < 1e-15 && (one[1].re - s).abs() < 1e-15);
        let two = statevector_oracle(&EdgeSet::from_pairs([(0, 1)]).unwrap(), 2).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in two.iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
        assert!(matches!(statevector_oracle(&EdgeSet::new(), 17), Err(Error::Capacity(_))));
    }

    #[test]
    fn ring_stabilizers_have_unit_expectation() {
        let ring = EdgeSet::from_pairs([(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let psi = statevector_oracle(&ring, 4).unwrap();
        for a in 0..4 {
            let k = PauliString::cluster_stabilizer(4, a, &ring);
            assert!((pauli_expectation(&psi, &k).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_products_track_phase() {
        // X·Z = -iY
        let mut p = PauliString::single(1, 0, PauliBasis::X);
        p.mul_assign_right(&PauliString::single(1, 0, PauliBasis::Z));
        assert_eq!(p.label(), "-iY");
        // Z·X = iY
        let mut q = PauliString::single(1, 0, PauliBasis::Z);
        q.mul_assign_right(&PauliString::single(1, 0, PauliBasis::X));
        assert_eq!(q.label(), "+iY");
        // Y·Y = I
        let mut y = PauliString::single(1, 0, PauliBasis::Y);
        y.mul_assign_right(&PauliString::single(1, 0, PauliBasis::Y));
        assert_eq!(y.label(), "+I");
    }

    #[test]
    fn dump_serializes() {
        let mut t = new_plus_state(2).unwrap();
        t.apply_cphase(0, 1).unwrap();
        let json = serde_json::to_string(&t.dump()).unwrap();
        assert_eq!(json, r#"{"n_qubits":2,"generators":["+XZ","+ZX"]}"#);
    }
}
