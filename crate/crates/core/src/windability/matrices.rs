//! The pairing-count matrices `A_m` and their column-scaled form `B_m`.
//!
//! For `n = floor(m/2)`, entry `a[i][j]` of `A_m` counts the pairings of `m`
//! objects, `i` of one colour and `m - i` of the other, with exactly `j`
//! mixed pairs (one object is left single when `m` is odd).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::WindabilityError;

/// Dense matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> BigRational {
        self.row(i).iter().sum()
    }

    /// Square, zero above the diagonal, strictly positive on it.
    pub fn is_lower_triangular_with_positive_diagonal(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                self.get(i, i).is_positive() && (i + 1..self.cols).all(|j| self.get(i, j).is_zero())
            })
    }

    pub fn mul_vec(&self, x: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(rational_to_f64).collect())
            .collect()
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// `x!! = x (x-2) (x-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(x: i64) -> Result<BigUint, WindabilityError> {
    if x < -1 {
        return Err(WindabilityError::DoubleFactorialDomain(x));
    }
    let mut acc = BigUint::one();
    let mut k = x;
    while k > 1 {
        acc *= k as u64;
        k -= 2;
    }
    Ok(acc)
}

fn df(x: i64) -> BigUint {
    double_factorial(x).expect("double factorial argument checked by caller")
}

fn factorial(x: u64) -> BigUint {
    (1..=x).fold(BigUint::one(), |acc, k| acc * k)
}

/// `C(n, k)`, zero when `k < 0`, `n < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

/// Common row sum of `A_m`: `(2n-1)!!` for even `m`, `(2n+1)!!` for odd `m`.
pub fn row_sum_constant(m: usize) -> BigUint {
    let n = (m / 2) as i64;
    if m % 2 == 0 {
        df(2 * n - 1)
    } else {
        df(2 * n + 1)
    }
}

fn check_arity(m: usize) -> Result<(), WindabilityError> {
    if m < 1 {
        Err(WindabilityError::ArityTooSmall(m))
    } else {
        Ok(())
    }
}

/// Entry `a^{(m)}_{i,j}` as an integer.
pub fn a_entry(m: usize, i: usize, j: usize) -> BigUint {
    if j > i {
        return BigUint::zero();
    }
    let (m, i, j) = (m as i64, i as i64, j as i64);
    let common = binomial(i, j) * binomial(m - i, j) * factorial(j as u64);
    let same_parity = (i - j) % 2 == 0;
    if m % 2 == 0 {
        if !same_parity {
            return BigUint::zero();
        }
        common * df(i - j - 1) * df(m - i - j - 1)
    } else if same_parity {
        common * df(i - j - 1) * df(m - i - j)
    } else {
        common * df(i - j) * df(m - 1 - i - j)
    }
}

/// Entry `b^{(m)}_{i,j}`; defined for every `m >= 0` so that the shift
/// identity can reach `B_0 = [1]`.
pub fn b_entry(m: usize, i: usize, j: usize) -> BigUint {
    let n = (m / 2) as i64;
    let diff = i as i64 - j as i64;
    if m % 2 == 0 && diff.rem_euclid(2) != 0 {
        return BigUint::zero();
    }
    binomial(n - j as i64, diff.div_euclid(2))
}

/// The `(n+1) x (n+1)` matrix `A_m`.
pub fn matrix_a(m: usize) -> Result<RationalMatrix, WindabilityError> {
    check_arity(m)?;
    let n = m / 2;
    Ok(RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        BigRational::from_integer(BigInt::from(a_entry(m, i, j)))
    }))
}

/// The `(n+1) x (n+1)` matrix `B_m`.
pub fn matrix_b(m: usize) -> Result<RationalMatrix, WindabilityError> {
    check_arity(m)?;
    let n = m / 2;
    Ok(RationalMatrix::from_fn(n + 1, n + 1, |i, j| {
        BigRational::from_integer(BigInt::from(b_entry(m, i, j)))
    }))
}

/// Every row of `A_m` sums to the number of pairings of `m` objects.
pub fn verify_row_sums(m: usize) -> Result<bool, WindabilityError> {
    let a = matrix_a(m)?;
    let s = BigRational::from_integer(BigInt::from(row_sum_constant(m)));
    Ok((0..a.rows()).all(|i| a.row_sum(i) == s))
}

/// `a_{ij} = s_m C(m,i)^{-1} 2^j C(n,j) b_{ij}` for every entry.
pub fn verify_a_b_relation(m: usize) -> Result<bool, WindabilityError> {
    let a = matrix_a(m)?;
    let b = matrix_b(m)?;
    let n = m / 2;
    let s = BigInt::from(row_sum_constant(m));
    for i in 0..=n {
        let cmi = BigInt::from(binomial(m as i64, i as i64));
        for j in 0..=n {
            let scale = BigRational::new(
                &s * BigInt::from(binomial(n as i64, j as i64)) * (BigInt::one() << j),
                cmi.clone(),
            );
            if *a.get(i, j) != scale * b.get(i, j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `b^{(m)}_{i,j} = b^{(m-2k)}_{i-k,j-k}` for all `k <= min(i, j)`.
pub fn verify_shift_identity(m: usize) -> Result<bool, WindabilityError> {
    check_arity(m)?;
    let n = m / 2;
    for i in 0..=n {
        for j in 0..=n {
            let here = b_entry(m, i, j);
            for k in 0..=i.min(j) {
                if b_entry(m - 2 * k, i - k, j - k) != here {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
