use std::collections::HashMap;

use super::Determinant;
use crate::error::{Error, Result};

/// All determinants with fixed electron count and S_z, in increasing bit order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantBasis {
    n_so: usize,
    n_electrons: usize,
    twice_sz: i32,
    dets: Vec<Determinant>,
    index: HashMap<Determinant, usize>,
}

impl DeterminantBasis {
    pub fn n_so(&self) -> usize {
        self.n_so
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn sz(&self) -> f64 {
        f64::from(self.twice_sz) / 2.0
    }

    pub fn twice_sz(&self) -> i32 {
        self.twice_sz
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    pub fn determinants(&self) -> &[Determinant] {
        &self.dets
    }

    pub fn get(&self, i: usize) -> Determinant {
        self.dets[i]
    }

    #[inline]
    pub fn index_of(&self, det: Determinant) -> Option<usize> {
        self.index.get(&det).copied()
    }

    pub fn contains(&self, det: Determinant) -> bool {
        self.index.contains_key(&det)
    }
}

/// Enumerates the complete (N, S_z) sector over `n_so` spin orbitals.
pub fn enumerate_basis(n_so: usize, n_electrons: usize, sz: f64) -> Result<DeterminantBasis> {
    if n_so > 64 {
        return Err(Error::Domain(format!("at most 64 spin orbitals are supported, got {n_so}")));
    }
    if n_electrons > n_so {
        return Err(Error::Domain(format!("{n_electrons} electrons exceed {n_so} spin orbitals")));
    }
    let twice = 2.0 * sz;
    if twice.fract() != 0.0 || !twice.is_finite() {
        return Err(Error::Domain(format!("S_z = {sz} is not a half-integer")));
    }
    let twice_sz = twice as i32;
    if (n_electrons as i32 + twice_sz) % 2 != 0 || twice_sz.unsigned_abs() as usize > n_electrons {
        return Err(Error::Domain(format!("S_z = {sz} is inconsistent with {n_electrons} electrons")));
    }
    let n_alpha = (n_electrons as i32 + twice_sz) as usize / 2;
    let n_beta = n_electrons - n_alpha;
    let (alpha_orbitals, beta_orbitals) = ((n_so + 1) / 2, n_so / 2);
    if n_alpha > alpha_orbitals || n_beta > beta_orbitals {
        return Err(Error::Domain(format!(
            "{n_alpha} α and {n_beta} β electrons do not fit in {n_so} spin orbitals"
        )));
    }

    let mut dets = Vec::new();
    if n_electrons == 0 {
        dets.push(Determinant::VACUUM);
    } else {
        // Gosper's hack: successive bit patterns with fixed popcount in increasing order.
        let limit = if n_so == 64 { u64::MAX } else { (1u64 << n_so) - 1 };
        let mut v: u64 = if n_electrons == 64 { u64::MAX } else { (1u64 << n_electrons) - 1 };
        loop {
            let det = Determinant::from_bits(v);
            if det.twice_sz() == twice_sz {
                dets.push(det);
            }
            let t = v | (v - 1);
            let next = (t.wrapping_add(1)) | (((!t & t.wrapping_add(1)) - 1) >> (v.trailing_zeros() + 1));
            if next > limit || next <= v {
                break;
            }
            v = next;
        }
    }
    let index = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    Ok(DeterminantBasis {
        n_so,
        n_electrons,
        twice_sz,
        dets,
        index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes() {
        assert_eq!(enumerate_basis(8, 4, 0.0).unwrap().len(), 36);
        assert_eq!(enumerate_basis(10, 5, 0.5).unwrap().len(), 100);
        assert_eq!(enumerate_basis(10, 5, 1.5).unwrap().len(), 25);
        let vac = enumerate_basis(4, 0, 0.0).unwrap();
        assert_eq!(vac.len(), 1);
        assert_eq!(vac.get(0), Determinant::VACUUM);
    }

    #[test]
    fn ordering_and_lookup() {
        let b = enumerate_basis(8, 4, 0.0).unwrap();
        assert!(b.determinants().windows(2).all(|w| w[0] < w[1]));
        for (i, &d) in b.determinants().iter().enumerate() {
            assert_eq!(b.index_of(d), Some(i));
            assert_eq!(d.n_electrons(), 4);
            assert_eq!(d.twice_sz(), 0);
        }
        assert!(!b.contains(Determinant::from_orbitals(&[0, 2, 4, 6])));
    }

    #[test]
    fn inconsistent_sz_rejected() {
        assert!(enumerate_basis(8, 4, 0.5).is_err());
        assert!(enumerate_basis(8, 4, 0.3).is_err());
        assert!(enumerate_basis(8, 4, 3.0).is_err());
        assert!(enumerate_basis(4, 6, 0.0).is_err());
        assert!(enumerate_basis(4, 4, 2.0).is_err());
    }
}
