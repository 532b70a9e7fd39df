use std::fmt;

use serde::Serialize;

/// Occupation bitstring over at most 64 spin orbitals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Determinant(u64);

#[inline]
fn parity_below(bits: u64, p: usize) -> f64 {
    if (bits & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Determinant {
    pub const VACUUM: Determinant = Determinant(0);

    pub const fn from_bits(bits: u64) -> Self {
        Self(bits)
    }

    pub fn from_orbitals(occupied: &[usize]) -> Self {
        Self(occupied.iter().fold(0u64, |acc, &p| acc | (1u64 << p)))
    }

    /// α electrons in the lowest `n_alpha` spatial orbitals, β in the lowest `n_beta`.
    pub fn aufbau(n_alpha: usize, n_beta: usize) -> Self {
        let alpha = (0..n_alpha).map(|k| 2 * k);
        let beta = (0..n_beta).map(|k| 2 * k + 1);
        Self::from_orbitals(&alpha.chain(beta).collect::<Vec<_>>())
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_occupied(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn n_electrons(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn n_alpha(self) -> usize {
        (self.0 & 0x5555_5555_5555_5555).count_ones() as usize
    }

    pub fn n_beta(self) -> usize {
        (self.0 & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as usize
    }

    /// 2·S_z.
    pub fn twice_sz(self) -> i32 {
        self.n_alpha() as i32 - self.n_beta() as i32
    }

    pub fn occupied(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let p = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(p)
            }
        })
    }

    #[inline]
    pub fn annihilate(self, p: usize) -> Option<(Self, f64)> {
        if self.is_occupied(p) {
            Some((Self(self.0 & !(1u64 << p)), parity_below(self.0, p)))
        } else {
            None
        }
    }

    #[inline]
    pub fn create(self, p: usize) -> Option<(Self, f64)> {
        if self.is_occupied(p) {
            None
        } else {
            Some((Self(self.0 | (1u64 << p)), parity_below(self.0, p)))
        }
    }

    /// a†_p a_q.
    #[inline]
    pub fn apply_excitation(self, p: usize, q: usize) -> Option<(Self, f64)> {
        let (d, s1) = self.annihilate(q)?;
        let (d, s2) = d.create(p)?;
        Some((d, s1 * s2))
    }

    /// a†_i a†_j a_l a_k, applied right to left. `None` when the string annihilates
    /// the determinant (including `i == j` or `k == l`).
    #[inline]
    pub fn apply_pair_string(self, i: usize, j: usize, l: usize, k: usize) -> Option<(Self, f64)> {
        let (d, s1) = self.annihilate(k)?;
        let (d, s2) = d.annihilate(l)?;
        let (d, s3) = d.create(j)?;
        let (d, s4) = d.create(i)?;
        Some((d, s1 * s2 * s3 * s4))
    }

    /// Occupation string with orbital 0 leftmost.
    pub fn to_occupation_string(self, n_so: usize) -> String {
        (0..n_so).map(|p| if self.is_occupied(p) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for Determinant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Determinant({:?})", self.occupied().collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_string_double_excitation() {
        let d = Determinant::from_orbitals(&[0, 1]);
        let (out, sign) = d.apply_pair_string(2, 3, 1, 0).unwrap();
        assert_eq!(out, Determinant::from_orbitals(&[2, 3]));
        assert_eq!(sign, 1.0);
        assert_eq!(out.to_occupation_string(4), "0011");
    }

    #[test]
    fn pair_string_number_operator() {
        let d = Determinant::from_orbitals(&[0, 1, 4]);
        let (out, sign) = d.apply_pair_string(0, 1, 1, 0).unwrap();
        assert_eq!(out, d);
        assert_eq!(sign, 1.0);
        // swapping the creators flips the sign
        assert_eq!(d.apply_pair_string(1, 0, 1, 0).unwrap().1, -1.0);
    }

    #[test]
    fn pair_string_annihilates() {
        let d = Determinant::from_orbitals(&[0, 1]);
        assert!(d.apply_pair_string(2, 3, 1, 2).is_none());
        assert!(d.apply_pair_string(0, 3, 1, 0).is_some());
        assert!(d.apply_pair_string(1, 3, 0, 2).is_none());
        assert!(d.apply_pair_string(2, 2, 1, 0).is_none());
    }

    #[test]
    fn sign_counts_orbitals_below() {
        // a_2 on |0,1,2⟩ passes two occupied orbitals
        let d = Determinant::from_orbitals(&[0, 1, 2]);
        assert_eq!(d.annihilate(2).unwrap().1, 1.0);
        assert_eq!(d.annihilate(1).unwrap().1, -1.0);
        assert_eq!(Determinant::from_orbitals(&[0]).create(3).unwrap().1, -1.0);
    }

    #[test]
    fn spin_counts() {
        let d = Determinant::aufbau(3, 2);
        assert_eq!(d, Determinant::from_orbitals(&[0, 1, 2, 3, 4]));
        assert_eq!(d.n_alpha(), 3);
        assert_eq!(d.n_beta(), 2);
        assert_eq!(d.twice_sz(), 1);
        assert_eq!(d.occupied().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }
}
