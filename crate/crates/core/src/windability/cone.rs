//! Binomial generators of the sub-cone `D_n` of the column cone of `B_m`, and
//! the recurrence that keeps `D_n` closed under `u_i -> i (m - i) u_i`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::matrices::{b_entry, binomial, double_factorial, matrix_a};
use super::WindabilityError;

/// Entry `i` of `v_k = [C(m - 2k, i - k)]`, zero outside the binomial range.
pub fn generator_entry(m: usize, k: usize, i: usize) -> BigInt {
    BigInt::from(binomial(m as i64 - 2 * k as i64, i as i64 - k as i64))
}

/// `v_0, ..., v_n` for `n = floor(m/2)`, each of length `n + 1`.
pub fn cone_generators(m: usize) -> Result<Vec<Vec<BigInt>>, WindabilityError> {
    if m < 1 {
        return Err(WindabilityError::ArityTooSmall(m));
    }
    let n = m / 2;
    Ok((0..=n)
        .map(|k| (0..=n).map(|i| generator_entry(m, k, i)).collect())
        .collect())
}

/// Checks, exactly, that
/// `i (m-i) v_{i,k} = (m-2k)(m-2k-1) v_{i,k+1} + k (m-k) v_{i,k}`
/// for all `i, k` in `[0, n]`, and that each scalar is nonnegative whenever
/// the generator it multiplies is nonzero.
pub fn verify_recurrence(m: usize) -> bool {
    if m < 1 {
        return false;
    }
    let n = m / 2;
    let mi = m as i64;
    for k in 0..=n {
        let ki = k as i64;
        let up = BigInt::from((mi - 2 * ki) * (mi - 2 * ki - 1));
        let stay = BigInt::from(ki * (mi - ki));
        let next_nonzero = (0..=n).any(|i| !generator_entry(m, k + 1, i).is_zero());
        if (up.is_negative() && next_nonzero) || stay.is_negative() {
            return false;
        }
        for i in 0..=n {
            let ii = i as i64;
            let lhs = BigInt::from(ii * (mi - ii)) * generator_entry(m, k, i);
            let rhs = &up * generator_entry(m, k + 1, i) + &stay * generator_entry(m, k, i);
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Nonnegative `ŷ` with `B_m ŷ = v_k / s_{m-2k}`, built by shifting the
/// all-ones witness of arity `m - 2k` down by `k` places. `None` if the
/// shifted vector fails the exact check.
pub fn generator_witness(m: usize, k: usize) -> Result<Option<Vec<BigRational>>, WindabilityError> {
    if m < 1 {
        return Err(WindabilityError::ArityTooSmall(m));
    }
    let n = m / 2;
    if k > n {
        return Ok(None);
    }
    let reduced = m - 2 * k;
    let rn = reduced / 2;
    // y solves B_{m-2k} y = z(1) / s_{m-2k}
    let y: Vec<BigRational> = if reduced == 0 {
        vec![BigRational::one()]
    } else {
        let a = matrix_a(reduced)?;
        let ones = vec![BigRational::one(); rn + 1];
        let x = super::forward_substitute_exact(&a, &ones);
        x.into_iter()
            .enumerate()
            .map(|(j, xj)| {
                xj * BigRational::from_integer(
                    BigInt::from(binomial(rn as i64, j as i64)) * (BigInt::one() << j),
                )
            })
            .collect()
    };
    let mut hat = vec![BigRational::zero(); n + 1];
    for (j, yj) in y.into_iter().enumerate() {
        hat[j + k] = yj;
    }
    let s = if reduced % 2 == 0 {
        double_factorial(2 * rn as i64 - 1)?
    } else {
        double_factorial(2 * rn as i64 + 1)?
    };
    let s = BigRational::from_integer(BigInt::from(s));
    for i in 0..=n {
        let lhs: BigRational = (0..=n)
            .map(|j| BigRational::from_integer(BigInt::from(b_entry(m, i, j))) * &hat[j])
            .sum();
        let rhs = BigRational::from_integer(generator_entry(m, k, i)) / &s;
        if lhs != rhs {
            return Ok(None);
        }
    }
    if hat.iter().any(|v| v.is_negative()) {
        return Ok(None);
    }
    Ok(Some(hat))
}

/// Outcome of expanding `z(h)_i = C(m,i) exp(beta i (m-i))` over the
/// generators through a truncated Taylor series.
#[derive(Debug, Clone, Serialize)]
pub struct ConeMembership {
    pub beta: f64,
    pub m: usize,
    pub order: usize,
    /// Coefficient of `v_k` in the truncated expansion.
    pub coefficients: Vec<f64>,
    /// Every term of every order had nonnegative generator coefficients.
    pub nonnegative: bool,
    /// Largest relative gap between the reconstruction and `z(h)`.
    pub max_rel_error: f64,
}

impl ConeMembership {
    pub fn holds(&self) -> bool {
        self.nonnegative
    }
}

/// Expands the order-`order` truncation of `z(h)` (with `h` the half-vector
/// of the zero-field signature at interaction `beta`, arity `m`) as a
/// combination of `v_0..v_n`. The `j`-th Taylor term is reached from `v_0` by
/// applying the recurrence `j` times with exact integer coefficients.
pub fn verify_cone_membership(
    beta: f64,
    m: usize,
    order: usize,
) -> Result<ConeMembership, WindabilityError> {
    let gens = cone_generators(m)?;
    let n = m / 2;
    let mi = m as i64;
    let mut term = vec![BigInt::zero(); n + 1];
    term[0] = BigInt::one();
    let mut nonnegative = true;
    let mut total = vec![0.0f64; n + 1];
    let mut weight = 1.0f64; // beta^j / j!
    for j in 0..=order {
        for (acc, c) in total.iter_mut().zip(&term) {
            *acc += weight * c.to_f64().unwrap_or(f64::INFINITY);
        }
        if j == order {
            break;
        }
        let mut next = vec![BigInt::zero(); n + 1];
        for k in 0..=n {
            if term[k].is_zero() {
                continue;
            }
            let ki = k as i64;
            next[k] += BigInt::from(ki * (mi - ki)) * &term[k];
            if k < n {
                next[k + 1] += BigInt::from((mi - 2 * ki) * (mi - 2 * ki - 1)) * &term[k];
            }
        }
        nonnegative &= next.iter().all(|c| !c.is_negative());
        term = next;
        weight *= beta / (j + 1) as f64;
    }
    let mut max_rel_error = 0.0f64;
    for i in 0..=n {
        let rebuilt: f64 = (0..=n)
            .map(|k| total[k] * gens[k][i].to_f64().unwrap_or(f64::NAN))
            .sum();
        let direct = binomial(mi, i as i64).to_f64().unwrap_or(f64::NAN)
            * (beta * (i * (m - i)) as f64).exp();
        max_rel_error = max_rel_error.max((rebuilt - direct).abs() / direct.abs());
    }
    let nonnegative = nonnegative && total.iter().all(|&c| c >= 0.0);
    Ok(ConeMembership {
        beta,
        m,
        order,
        coefficients: total,
        nonnegative,
        max_rel_error,
    })
}
