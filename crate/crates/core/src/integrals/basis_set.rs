use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Text of the bundled STO-6G hydrogen basis file.
pub const STO6G_BASIS_TEXT: &str = include_str!("../../data/sto-6g.basis");

/// A contracted s shell not yet attached to a center.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellTemplate {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl ShellTemplate {
    pub fn place(&self, center: usize) -> Result<ContractedShell> {
        ContractedShell::new(center, self.exponents.clone(), self.coefficients.clone())
    }
}

/// Parses the plain-text basis format: one `exponent coefficient` pair per line,
/// blank lines between shells, `#` starting a comment line.
pub fn parse_basis_file(text: &str) -> Result<Vec<ShellTemplate>> {
    let mut shells = Vec::new();
    let mut current = ShellTemplate {
        exponents: Vec::new(),
        coefficients: Vec::new(),
    };
    let flush = |current: &mut ShellTemplate, shells: &mut Vec<ShellTemplate>| {
        if !current.exponents.is_empty() {
            shells.push(std::mem::replace(
                current,
                ShellTemplate {
                    exponents: Vec::new(),
                    coefficients: Vec::new(),
                },
            ));
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut current, &mut shells);
            continue;
        }
        let bad = |message: String| Error::BasisFile { line: idx + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(bad(format!("expected `exponent coefficient`, found {} fields", fields.len())));
        }
        let parse = |s: &str| {
            s.replace(['D', 'd'], "E")
                .parse::<f64>()
                .map_err(|e| bad(format!("cannot parse `{s}`: {e}")))
        };
        let exponent = parse(fields[0])?;
        let coefficient = parse(fields[1])?;
        if !(exponent > 0.0) {
            return Err(bad(format!("exponent {exponent} is not positive")));
        }
        current.exponents.push(exponent);
        current.coefficients.push(coefficient);
    }
    flush(&mut current, &mut shells);

    if shells.is_empty() {
        return Err(Error::BasisFile {
            line: 0,
            message: "no shells found".into(),
        });
    }
    Ok(shells)
}

/// The bundled STO-6G hydrogen 1s shell.
pub fn sto6g_hydrogen() -> ShellTemplate {
    parse_basis_file(STO6G_BASIS_TEXT)
        .expect("bundled basis file parses")
        .remove(0)
}

/// Normalized contracted s-type Gaussian on one center.
///
/// `coefficients` multiply normalized primitives; construction rescales them so the
/// contracted function has unit self-overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedShell {
    center: usize,
    exponents: Vec<f64>,
    coefficients: Vec<f64>,
}

/// Normalization of exp(-a r²).
pub(crate) fn primitive_norm(a: f64) -> f64 {
    (2.0 * a / PI).powf(0.75)
}

impl ContractedShell {
    pub fn new(center: usize, exponents: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() || exponents.len() != coefficients.len() {
            return Err(Error::Domain(format!(
                "shell needs matching non-empty exponent/coefficient lists ({} vs {})",
                exponents.len(),
                coefficients.len()
            )));
        }
        if exponents.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::Domain("shell exponents must be positive".into()));
        }
        let mut prims: Vec<(f64, f64)> = exponents.into_iter().zip(coefficients).collect();
        prims.sort_by(|x, y| y.0.total_cmp(&x.0));
        if prims.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("shell exponents must be distinct".into()));
        }

        let mut self_overlap = 0.0;
        for &(a, ca) in &prims {
            for &(b, cb) in &prims {
                // <g_a|g_b> for normalized primitives on a common center
                self_overlap += ca * cb * (2.0 * (a * b).sqrt() / (a + b)).powf(1.5);
            }
        }
        if !(self_overlap > 0.0) {
            return Err(Error::Domain("contracted shell has zero norm".into()));
        }
        let scale = self_overlap.sqrt().recip();
        let (exponents, coefficients) = prims.into_iter().map(|(a, c)| (a, c * scale)).unzip();
        Ok(Self {
            center,
            exponents,
            coefficients,
        })
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// (exponent, coefficient × primitive normalization) pairs.
    pub fn primitives(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.exponents
            .iter()
            .zip(&self.coefficients)
            .map(|(&a, &c)| (a, c * primitive_norm(a)))
    }

    /// Value of the contracted function at `r` given its center position.
    pub fn value_at(&self, origin: &[f64; 3], r: &[f64; 3]) -> f64 {
        let d2 = super::geometry::distance_squared(origin, r);
        self.primitives().map(|(a, w)| w * (-a * d2).exp()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_basis_has_six_primitives() {
        let shell = sto6g_hydrogen();
        assert_eq!(shell.exponents.len(), 6);
        assert!((shell.exponents[0] - 35.52322122).abs() < 1e-12);
    }

    #[test]
    fn contracted_shell_is_normalized_and_sorted() {
        let shell = ContractedShell::new(0, vec![0.5, 3.0, 1.2], vec![0.3, 0.2, 0.6]).unwrap();
        assert!(shell.exponents().windows(2).all(|w| w[0] > w[1]));
        let mut s = 0.0;
        for (a, wa) in shell.primitives() {
            for (b, wb) in shell.primitives() {
                s += wa * wb * (PI / (a + b)).powf(1.5);
            }
        }
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parse_multiple_shells_and_comments() {
        let text = "# comment\n1.0 0.5\n0.2 0.5\n\n\n3.0 1.0\n";
        let shells = parse_basis_file(text).unwrap();
        assert_eq!(shells.len(), 2);
        assert_eq!(shells[0].exponents, vec![1.0, 0.2]);
        assert_eq!(shells[1].coefficients, vec![1.0]);
    }

    #[test]
    fn parse_errors_report_line() {
        match parse_basis_file("1.0 0.5\n2.0\n") {
            Err(Error::BasisFile { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_basis_file("-1.0 0.5\n").is_err());
        assert!(parse_basis_file("# only comments\n").is_err());
    }

    #[test]
    fn rejects_malformed_shells() {
        assert!(ContractedShell::new(0, vec![], vec![]).is_err());
        assert!(ContractedShell::new(0, vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(ContractedShell::new(0, vec![1.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(ContractedShell::new(0, vec![0.0], vec![1.0]).is_err());
    }
}
