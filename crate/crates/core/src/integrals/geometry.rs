use crate::error::{Error, Result};

/// Bohr per angstrom.
pub const ANGSTROM_TO_BOHR: f64 = 1.8897261254578281;

const MIN_SEPARATION: f64 = 1e-10;

/// Nuclear framework in bohr.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    centers: Vec<[f64; 3]>,
    charges: Vec<f64>,
    label: String,
}

impl Geometry {
    pub fn new(centers: Vec<[f64; 3]>, charges: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if centers.len() != charges.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                found: charges.len(),
            });
        }
        if let Some(z) = charges.iter().find(|&&z| !(z > 0.0)) {
            return Err(Error::Geometry(format!("nuclear charge {z} is not positive")));
        }
        for a in 0..centers.len() {
            for b in 0..a {
                let d = distance(&centers[a], &centers[b]);
                if d <= MIN_SEPARATION {
                    return Err(Error::Geometry(format!(
                        "centers {b} and {a} coincide (separation {d:.3e} bohr)"
                    )));
                }
            }
        }
        Ok(Self {
            centers,
            charges,
            label: label.into(),
        })
    }

    pub fn centers(&self) -> &[[f64; 3]] {
        &self.centers
    }

    pub fn charges(&self) -> &[f64] {
        &self.charges
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn total_charge(&self) -> f64 {
        self.charges.iter().sum()
    }

    /// Rigidly shifted copy.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let centers = self
            .centers
            .iter()
            .map(|c| [c[0] + shift[0], c[1] + shift[1], c[2] + shift[2]])
            .collect();
        Self {
            centers,
            charges: self.charges.clone(),
            label: self.label.clone(),
        }
    }

    /// Σ_{A<B} Z_A Z_B / |R_A − R_B|
    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for a in 0..self.centers.len() {
            for b in 0..a {
                e += self.charges[a] * self.charges[b] / distance(&self.centers[a], &self.centers[b]);
            }
        }
        e
    }
}

pub(crate) fn distance_squared(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    distance_squared(a, b).sqrt()
}

/// Linear chain of `n` hydrogen atoms along z with uniform spacing given in angstrom.
pub fn hydrogen_chain(n: usize, r_angstrom: f64) -> Result<Geometry> {
    if n < 2 {
        return Err(Error::Domain(format!("a hydrogen chain needs at least 2 atoms, got {n}")));
    }
    if !(r_angstrom > 0.0) || !r_angstrom.is_finite() {
        return Err(Error::Domain(format!("bond length {r_angstrom} must be positive")));
    }
    let spacing = r_angstrom * ANGSTROM_TO_BOHR;
    let centers = (0..n).map(|i| [0.0, 0.0, i as f64 * spacing]).collect();
    Geometry::new(centers, vec![1.0; n], format!("H{n} R={r_angstrom} A"))
}
