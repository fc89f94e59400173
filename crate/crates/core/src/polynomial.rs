use serde::{Deserialize, Serialize};

use crate::C64;

/// Complex polynomial, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn one() -> Self {
        Polynomial::from_real(&[1.0])
    }

    /// `Xⁿ`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        c[n] = C64::new(1.0, 0.0);
        Polynomial::new(c)
    }

    /// `(1 − X)^m`, whose hereditary value is the bracket `B_m(T)`.
    pub fn one_minus_x_pow(m: usize) -> Self {
        let base = Polynomial::from_real(&[1.0, -1.0]);
        (0..m).fold(Polynomial::one(), |acc, _| acc.mul(&base))
    }

    /// `Π (X − z_k)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Polynomial::one(), |acc, &z| {
            acc.mul(&Polynomial::new(vec![-z, C64::new(1.0, 0.0)]))
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero)
                        + other.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `X·p`.
    pub fn shift_up(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(C64::new(0.0, 0.0));
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    /// The involution `p*`: conjugated coefficients.
    pub fn conj(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> C64 {
        self.eval(C64::new(x, 0.0))
    }
}

/// Elementary symmetric functions `s_0 = 1, s_1, …, s_n` of `z`.
pub fn elementary_symmetric(z: &[C64]) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); z.len() + 1];
    s[0] = C64::new(1.0, 0.0);
    for (k, &zk) in z.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            let prev = s[j - 1];
            s[j] += prev * zk;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn binomial_expansion() {
        let p = Polynomial::one_minus_x_pow(3);
        assert_eq!(p.coeffs(), &[c(1.0), c(-3.0), c(3.0), c(-1.0)]);
        assert_eq!(Polynomial::one_minus_x_pow(0), Polynomial::one());
    }

    #[test]
    fn roots_and_symmetric_functions() {
        let z = [c(1.0), c(2.0), C64::new(0.0, 1.0)];
        let p = Polynomial::from_roots(&z);
        for &r in &z {
            assert!(p.eval(r).norm() < 1e-12);
        }
        let s = elementary_symmetric(&z);
        // p = Σ (−1)^{n−j} s_{n−j} X^j
        let n = z.len();
        for j in 0..=n {
            let sign = if (n - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            assert!((p.coeffs()[j] - s[n - j] * sign).norm() < 1e-12);
        }
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Polynomial::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(Polynomial::from_real(&[]).degree(), 0);
    }
}
