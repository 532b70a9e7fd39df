use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{pair_count, pair_index, Determinant, DeterminantBasis, StateVector};
use crate::error::{Error, Result};

#[inline]
fn spin(p: usize) -> usize {
    p & 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rank {
    One,
    Two,
}

impl Rank {
    pub fn as_number(self) -> u8 {
        match self {
            Rank::One => 1,
            Rank::Two => 2,
        }
    }
}

/// A single normal-ordered operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorString {
    /// a†_i a_k
    OneBody { i: usize, k: usize },
    /// a†_i a†_j a_l a_k with i < j and k < l
    TwoBody { i: usize, j: usize, k: usize, l: usize },
}

impl OperatorString {
    #[inline]
    pub fn apply(self, det: Determinant) -> Option<(Determinant, f64)> {
        match self {
            OperatorString::OneBody { i, k } => det.apply_excitation(i, k),
            OperatorString::TwoBody { i, j, k, l } => det.apply_pair_string(i, j, l, k),
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            OperatorString::OneBody { i, k } => OperatorString::OneBody { i: k, k: i },
            OperatorString::TwoBody { i, j, k, l } => OperatorString::TwoBody { i: k, j: l, k: i, l: j },
        }
    }
}

/// Coefficients of a general one- or two-body operator.
///
/// Rank two stores `F[(i<j), (k<l)]` for `Σ F a†_i a†_j a_l a_k`, indexed by
/// [`pair_index`]; rank one stores `F[i, k]` for `Σ F a†_i a_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyCoefficients {
    rank: Rank,
    n_so: usize,
    matrix: DMatrix<f64>,
}

impl TwoBodyCoefficients {
    pub fn zeros(rank: Rank, n_so: usize) -> Self {
        let dim = match rank {
            Rank::One => n_so,
            Rank::Two => pair_count(n_so),
        };
        Self {
            rank,
            n_so,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_matrix(rank: Rank, n_so: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let expected = Self::zeros(rank, n_so).matrix.nrows();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.nrows(),
            });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("operator coefficients must be finite".into()));
        }
        Ok(Self { rank, n_so, matrix })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn n_so(&self) -> usize {
        self.n_so
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// F for the two-body string a†_i a†_j a_l a_k, antisymmetric in i↔j and k↔l.
    pub fn two_body(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        assert_eq!(self.rank, Rank::Two);
        if i == j || k == l {
            return 0.0;
        }
        let (a, sa) = if i < j { (pair_index(self.n_so, i, j), 1.0) } else { (pair_index(self.n_so, j, i), -1.0) };
        let (b, sb) = if k < l { (pair_index(self.n_so, k, l), 1.0) } else { (pair_index(self.n_so, l, k), -1.0) };
        sa * sb * self.matrix[(a, b)]
    }

    /// Sets the coefficient of a†_i a†_j a_l a_k for i < j, k < l.
    pub fn set_two_body(&mut self, i: usize, j: usize, k: usize, l: usize, value: f64) {
        assert_eq!(self.rank, Rank::Two);
        assert!(i < j && k < l, "pairs must be ordered");
        self.matrix[(pair_index(self.n_so, i, j), pair_index(self.n_so, k, l))] = value;
    }

    pub fn one_body(&self, i: usize, k: usize) -> f64 {
        assert_eq!(self.rank, Rank::One);
        self.matrix[(i, k)]
    }

    pub fn set_one_body(&mut self, i: usize, k: usize, value: f64) {
        assert_eq!(self.rank, Rank::One);
        self.matrix[(i, k)] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }
}

/// The S_z-conserving operator strings of a given rank; one parameter per string.
#[derive(Debug, Clone)]
pub struct OperatorSpace {
    rank: Rank,
    n_so: usize,
    terms: Vec<OperatorString>,
}

impl OperatorSpace {
    pub fn sz_conserving(rank: Rank, n_so: usize) -> Self {
        let mut terms = Vec::new();
        match rank {
            Rank::One => {
                for i in 0..n_so {
                    for k in 0..n_so {
                        if spin(i) == spin(k) {
                            terms.push(OperatorString::OneBody { i, k });
                        }
                    }
                }
            }
            Rank::Two => {
                let pairs = super::pairs(n_so);
                for &(i, j) in &pairs {
                    for &(k, l) in &pairs {
                        if spin(i) + spin(j) == spin(k) + spin(l) {
                            terms.push(OperatorString::TwoBody { i, j, k, l });
                        }
                    }
                }
            }
        }
        Self { rank, n_so, terms }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn n_so(&self) -> usize {
        self.n_so
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[OperatorString] {
        &self.terms
    }

    pub fn to_coefficients(&self, params: &[f64]) -> Result<TwoBodyCoefficients> {
        if params.len() != self.terms.len() {
            return Err(Error::DimensionMismatch {
                expected: self.terms.len(),
                found: params.len(),
            });
        }
        let mut f = TwoBodyCoefficients::zeros(self.rank, self.n_so);
        for (&t, &x) in self.terms.iter().zip(params) {
            match t {
                OperatorString::OneBody { i, k } => f.set_one_body(i, k, x),
                OperatorString::TwoBody { i, j, k, l } => f.set_two_body(i, j, k, l, x),
            }
        }
        Ok(f)
    }

    /// The entries of `f` covered by this space; other entries are dropped.
    pub fn parameters_of(&self, f: &TwoBodyCoefficients) -> Result<Vec<f64>> {
        if f.rank() != self.rank || f.n_so() != self.n_so {
            return Err(Error::DimensionMismatch {
                expected: self.n_so,
                found: f.n_so(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|&t| match t {
                OperatorString::OneBody { i, k } => f.one_body(i, k),
                OperatorString::TwoBody { i, j, k, l } => f.two_body(i, j, k, l),
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    term: u32,
    col: u32,
    row: u32,
    sign: f64,
}

/// Every nonzero `⟨row| string |col⟩` of an operator space inside one sector.
///
/// Once built, applying any operator of the space, its adjoint, or contracting
/// two states against all strings costs one pass over the table.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    n_terms: usize,
    dim: usize,
    entries: Vec<Transition>,
}

impl TransitionTable {
    pub fn new(space: &OperatorSpace, basis: &DeterminantBasis) -> Self {
        let mut entries = Vec::new();
        for (col, &det) in basis.determinants().iter().enumerate() {
            for (term, &op) in space.terms().iter().enumerate() {
                if let Some((out, sign)) = op.apply(det) {
                    if let Some(row) = basis.index_of(out) {
                        entries.push(Transition {
                            term: term as u32,
                            col: col as u32,
                            row: row as u32,
                            sign,
                        });
                    }
                }
            }
        }
        Self {
            n_terms: space.len(),
            dim: basis.len(),
            entries,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    /// out += Σ_t params[t] · string_t · v
    pub fn apply_into(&self, params: &[f64], v: &DVector<f64>, out: &mut DVector<f64>) {
        for e in &self.entries {
            out[e.row as usize] += params[e.term as usize] * e.sign * v[e.col as usize];
        }
    }

    pub fn apply(&self, params: &[f64], v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        self.apply_into(params, v, &mut out);
        out
    }

    /// out += Σ_t params[t] · string_t† · v
    pub fn apply_adjoint_into(&self, params: &[f64], v: &DVector<f64>, out: &mut DVector<f64>) {
        for e in &self.entries {
            out[e.col as usize] += params[e.term as usize] * e.sign * v[e.row as usize];
        }
    }

    pub fn apply_adjoint(&self, params: &[f64], v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        self.apply_adjoint_into(params, v, &mut out);
        out
    }

    /// out[t] += ⟨left| string_t |right⟩
    pub fn contract_into(&self, left: &DVector<f64>, right: &DVector<f64>, out: &mut [f64]) {
        for e in &self.entries {
            out[e.term as usize] += e.sign * left[e.row as usize] * right[e.col as usize];
        }
    }

    pub fn contract(&self, left: &DVector<f64>, right: &DVector<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.n_terms];
        self.contract_into(left, right, &mut out);
        out
    }

    /// Matrix whose column t is string_t · v.
    pub fn images(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.n_terms);
        for e in &self.entries {
            out[(e.row as usize, e.term as usize)] += e.sign * v[e.col as usize];
        }
        out
    }

    /// Matrix whose column t is string_t† · v.
    pub fn adjoint_images(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.n_terms);
        for e in &self.entries {
            out[(e.col as usize, e.term as usize)] += e.sign * v[e.row as usize];
        }
        out
    }
}

/// F̂|ψ⟩ restricted to S_z-conserving strings, so the result stays in the sector of ψ.
pub fn apply_two_body(f: &TwoBodyCoefficients, psi: &StateVector) -> Result<StateVector> {
    let basis = psi.basis();
    if basis.n_so() != f.n_so() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_so(),
            found: f.n_so(),
        });
    }
    let n_so = f.n_so();
    let mut out = DVector::zeros(basis.len());
    let mut push = |det: Determinant, coeff: f64| {
        if let Some(row) = basis.index_of(det) {
            out[row] += coeff;
        }
    };
    for (col, &det) in basis.determinants().iter().enumerate() {
        let c = psi.coefficients()[col];
        if c == 0.0 {
            continue;
        }
        match f.rank() {
            Rank::One => {
                for k in det.occupied() {
                    for i in (spin(k)..n_so).step_by(2) {
                        let x = f.one_body(i, k);
                        if x != 0.0 {
                            if let Some((d, s)) = det.apply_excitation(i, k) {
                                push(d, x * s * c);
                            }
                        }
                    }
                }
            }
            Rank::Two => {
                let occ: Vec<usize> = det.occupied().collect();
                for (a, &k) in occ.iter().enumerate() {
                    for &l in &occ[a + 1..] {
                        let Some((removed, s1)) = det.annihilate(k).and_then(|(d, s)| d.annihilate(l).map(|(d2, s2)| (d2, s * s2))) else {
                            continue;
                        };
                        let col_pair = pair_index(n_so, k, l);
                        let target_spin = spin(k) + spin(l);
                        for i in 0..n_so {
                            if removed.is_occupied(i) {
                                continue;
                            }
                            for j in i + 1..n_so {
                                if removed.is_occupied(j) || spin(i) + spin(j) != target_spin {
                                    continue;
                                }
                                let x = f.matrix()[(pair_index(n_so, i, j), col_pair)];
                                if x == 0.0 {
                                    continue;
                                }
                                let (d, s3) = removed.create(j).expect("j empty");
                                let (d, s4) = d.create(i).expect("i empty");
                                push(d, x * s1 * s3 * s4 * c);
                            }
                        }
                    }
                }
            }
        }
    }
    StateVector::new(basis.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::enumerate_basis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    #[test]
    fn space_sizes() {
        assert_eq!(OperatorSpace::sz_conserving(Rank::Two, 8).len(), 36 + 36 + 256);
        assert_eq!(OperatorSpace::sz_conserving(Rank::One, 8).len(), 32);
        assert_eq!(OperatorSpace::sz_conserving(Rank::Two, 10).len(), 100 + 100 + 625);
    }

    #[test]
    fn zero_operator_gives_zero_vector() {
        let basis = Arc::new(enumerate_basis(8, 4, 0.0).unwrap());
        let psi = StateVector::new(basis.clone(), DVector::from_element(basis.len(), 0.3)).unwrap();
        let out = apply_two_body(&TwoBodyCoefficients::zeros(Rank::Two, 8), &psi).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn number_operator_pair() {
        let basis = Arc::new(enumerate_basis(8, 4, 0.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::new(basis.clone(), DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0))).unwrap();
        let mut f = TwoBodyCoefficients::zeros(Rank::Two, 8);
        f.set_two_body(0, 1, 0, 1, 2.5);
        let out = apply_two_body(&f, &psi).unwrap();
        for (idx, &det) in basis.determinants().iter().enumerate() {
            let occ = if det.is_occupied(0) && det.is_occupied(1) { 1.0 } else { 0.0 };
            assert!((out.coefficients()[idx] - 2.5 * occ * psi.coefficients()[idx]).abs() < 1e-14);
        }
    }

    #[test]
    fn table_matches_direct_application() {
        let basis = Arc::new(enumerate_basis(8, 4, 0.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rank in [Rank::One, Rank::Two] {
            let space = OperatorSpace::sz_conserving(rank, 8);
            let table = TransitionTable::new(&space, &basis);
            let x: Vec<f64> = (0..space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v = DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0));
            let f = space.to_coefficients(&x).unwrap();
            let direct = apply_two_body(&f, &StateVector::new(basis.clone(), v.clone()).unwrap()).unwrap();
            assert!((direct.coefficients() - table.apply(&x, &v)).amax() < 1e-12);
            assert_eq!(space.parameters_of(&f).unwrap(), x);

            // adjoint consistency ⟨w|F v⟩ = ⟨F† w|v⟩ and contraction
            let w = DVector::from_fn(basis.len(), |_, _| rng.gen_range(-1.0..1.0));
            let lhs = w.dot(&table.apply(&x, &v));
            let rhs = table.apply_adjoint(&x, &w).dot(&v);
            let via_contract: f64 = table.contract(&w, &v).iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12);
            assert!((lhs - via_contract).abs() < 1e-12);
        }
    }

    #[test]
    fn antisymmetric_accessor() {
        let mut f = TwoBodyCoefficients::zeros(Rank::Two, 6);
        f.set_two_body(0, 3, 1, 4, 0.7);
        assert_eq!(f.two_body(3, 0, 1, 4), -0.7);
        assert_eq!(f.two_body(3, 0, 4, 1), 0.7);
        assert_eq!(f.two_body(1, 1, 4, 1), 0.0);
    }

    #[test]
    fn dimension_checks() {
        let space = OperatorSpace::sz_conserving(Rank::Two, 6);
        assert!(space.to_coefficients(&[0.0; 3]).is_err());
        assert!(TwoBodyCoefficients::from_matrix(Rank::Two, 6, DMatrix::zeros(3, 3)).is_err());
        let basis = Arc::new(enumerate_basis(8, 4, 0.0).unwrap());
        let psi = StateVector::zeros(basis);
        assert!(apply_two_body(&TwoBodyCoefficients::zeros(Rank::Two, 6), &psi).is_err());
    }
}
