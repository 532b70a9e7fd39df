//! Determinant-basis Fock space and sign-correct second-quantized operators.
//!
//! Spin orbital `p` is spatial orbital `p / 2` with spin `p % 2` (0 = α, 1 = β), and
//! bit `p` of a [`Determinant`] is set when `p` is occupied. Operator strings act
//! right to left; each creator or annihilator on orbital `p` contributes the parity
//! of the occupied orbitals below `p` at the moment it acts. For example
//! `a†_2 a†_3 a_1 a_0 |0,1⟩ = +|2,3⟩` and `a†_0 a†_1 a_1 a_0 |0,1⟩ = +|0,1⟩`.

mod basis;
mod determinant;
mod hamiltonian;
mod operator;
mod spin;
mod state;

pub use basis::{enumerate_basis, DeterminantBasis};
pub use determinant::Determinant;
pub use hamiltonian::{apply_hamiltonian, hamiltonian_matrix};
pub use operator::{apply_two_body, OperatorSpace, OperatorString, Rank, TransitionTable, TwoBodyCoefficients};
pub use spin::{multiplicity, s_squared_expectation};
pub use state::StateVector;

/// Index of the ordered pair `i < j` in the lexicographic enumeration
/// (0,1), (0,2), …, (0,n−1), (1,2), …
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Inverse of [`pair_index`].
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indexing_is_bijective() {
        for n in 2..9 {
            let list = pairs(n);
            assert_eq!(list.len(), pair_count(n));
            for (idx, &(i, j)) in list.iter().enumerate() {
                assert_eq!(pair_index(n, i, j), idx);
            }
        }
    }
}
