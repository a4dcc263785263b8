//! Counting integers with few prime factors.

use super::WatkinsError;

/// Default largest `x` accepted by [`count_omega_at_most`].
pub const OMEGA_COUNT_LIMIT: u64 = 10_000_000;

/// `#{1 <= n <= x : ω(n) <= a}`, by sieve.
pub fn count_omega_at_most(x: u64, a: u32) -> Result<u64, WatkinsError> {
    count_omega_at_most_with_limit(x, a, OMEGA_COUNT_LIMIT)
}

pub fn count_omega_at_most_with_limit(x: u64, a: u32, limit: u64) -> Result<u64, WatkinsError> {
    if x > limit {
        return Err(WatkinsError::BudgetExceeded { x, limit });
    }
    let omega = omega_table(x as usize);
    Ok(omega[1..].iter().filter(|&&w| w as u32 <= a).count() as u64)
}

/// ω(n) for `0 <= n <= x`.
pub(crate) fn omega_table(x: usize) -> Vec<u8> {
    let mut omega = vec![0u8; x + 1];
    for p in 2..=x {
        if omega[p] != 0 {
            continue;
        }
        for m in (p..=x).step_by(p) {
            omega[m] += 1;
        }
    }
    omega
}

/// `count / (x / ln x · (ln ln x)^(a-1))`, the ratio against the classical
/// asymptotic shape; `None` for `x < 16` where `ln ln x` is too small to mean
/// anything.
pub fn density_ratio(count: u64, x: u64, a: u32) -> Option<f64> {
    if x < 16 {
        return None;
    }
    let xf = x as f64;
    let shape = xf / xf.ln() * xf.ln().ln().powi(a as i32 - 1);
    Some(count as f64 / shape)
}
