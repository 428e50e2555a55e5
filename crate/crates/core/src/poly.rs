//! Univariate complex polynomials with a companion-matrix root solver.
//!
//! Roots come from the eigenvalues of the companion matrix followed by one
//! Newton polishing step, which is robust at the degrees used here (d ≤ 8
//! for the dynamics, a few dozen for linearization work). Roots closer
//! than the clustering threshold are merged and reported with
//! multiplicity.

use crate::error::{Error, Result};
use crate::scalar::{r, Real};
use nalgebra::DMatrix;
use num_complex::Complex;

/// Two roots closer than this are considered one root of higher
/// multiplicity.
const CLUSTER_THRESHOLD: f64 = 1e-7;

/// Dense univariate polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T: Real> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> Poly<T> {
    /// Build from ascending coefficients; trailing (leading-degree) zeros
    /// are trimmed.
    pub fn new(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |z| z.norm_sqr() == T::zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex::new(T::zero(), T::zero()));
        }
        Poly { coeffs }
    }

    pub fn from_f64_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(pairs.iter().map(|&(re, im)| crate::scalar::c(re, im)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex<T> {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly<T> {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![Complex::new(T::zero(), T::zero())]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * r::<T>(k as f64))
                .collect(),
        )
    }

    /// All roots with multiplicity; the multiplicities sum to the degree.
    pub fn roots(&self) -> Result<Vec<(Complex<T>, usize)>> {
        let d = self.degree();
        if d == 0 {
            return Err(Error::RootFindingFailure(
                "constant polynomial has no roots".into(),
            ));
        }
        let lead = self.leading();
        if lead.norm_sqr() == T::zero() {
            return Err(Error::RootFindingFailure("zero leading coefficient".into()));
        }

        // companion matrix of the monic normalization
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let mut companion = DMatrix::<Complex<T>>::from_element(d, d, zero);
        for i in 1..d {
            companion[(i, i - 1)] = one;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let eigen = companion
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::RootFindingFailure("Schur iteration did not converge".into()))?;

        let deriv = self.derivative();
        let mut roots: Vec<Complex<T>> = eigen
            .iter()
            .map(|&root| {
                // one Newton step, guarded against vanishing derivative
                let dp = deriv.eval(root);
                if dp.norm_sqr() > r::<T>(1e-30) {
                    let polished = root - self.eval(root) / dp;
                    if num_traits::Float::is_finite(polished.re)
                        && num_traits::Float::is_finite(polished.im)
                    {
                        return polished;
                    }
                }
                root
            })
            .collect();

        // deterministic ordering, then cluster by proximity
        roots.sort_by(|x, y| {
            (x.re, x.im)
                .partial_cmp(&(y.re, y.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut clustered: Vec<(Complex<T>, usize)> = Vec::new();
        let threshold = r::<T>(CLUSTER_THRESHOLD);
        'outer: for root in roots {
            for (center, mult) in clustered.iter_mut() {
                if (root - *center).norm() < threshold {
                    // running mean keeps the cluster center stable
                    let k = r::<T>(*mult as f64);
                    *center = (*center * k + root) / (k + T::one());
                    *mult += 1;
                    continue 'outer;
                }
            }
            clustered.push((root, 1));
        }
        debug_assert_eq!(clustered.iter().map(|&(_, m)| m).sum::<usize>(), d);
        Ok(clustered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn eval_and_derivative() {
        // p(z) = 1 + 2z + 3z^2
        let p = Poly::<f64>::from_f64_pairs(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let z = c::<f64>(0.5, -1.0);
        assert!((p.eval(z) - (c::<f64>(1.0, 0.0) + z * 2.0 + z * z * 3.0)).norm() < 1e-14);
        let dp = p.derivative();
        assert_eq!(dp.degree(), 1);
        assert!((dp.eval(z) - (c::<f64>(2.0, 0.0) + z * 6.0)).norm() < 1e-14);
    }

    #[test]
    fn quadratic_roots_exact() {
        // z^2 - 1
        let p = Poly::<f64>::from_f64_pairs(&[(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let roots = p.roots().unwrap();
        assert_eq!(roots.len(), 2);
        for (root, mult) in roots {
            assert_eq!(mult, 1);
            assert!((root.norm() - 1.0).abs() < 1e-12);
            assert!(root.im.abs() < 1e-12);
        }
    }

    #[test]
    fn double_root_multiplicity() {
        // (z - 2)^2 = 4 - 4z + z^2
        let p = Poly::<f64>::from_f64_pairs(&[(4.0, 0.0), (-4.0, 0.0), (1.0, 0.0)]);
        let roots = p.roots().unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].1, 2);
        assert!((roots[0].0 - c::<f64>(2.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn known_complex_roots_polished() {
        let targets = [
            c::<f64>(1.0, 0.0),
            c(-2.0, 0.0),
            c(0.0, 1.0),
            c(0.0, -1.0),
            c(0.5, 0.25),
            c(-0.3, 0.7),
        ];
        let mut coeffs = vec![c::<f64>(1.0, 0.0)];
        for &root in &targets {
            let mut next = vec![c::<f64>(0.0, 0.0); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * root;
            }
            coeffs = next;
        }
        let p = Poly::new(coeffs);
        let roots = p.roots().unwrap();
        assert_eq!(roots.iter().map(|&(_, m)| m).sum::<usize>(), targets.len());
        for &target in &targets {
            let hit = roots
                .iter()
                .any(|&(root, _)| (root - target).norm() < 1e-10);
            assert!(hit, "missing root {target}");
        }
    }
}
