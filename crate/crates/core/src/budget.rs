//! Work caps for dynamic-programming batches.

use crate::error::{PinError, Result};

/// Default cap in kernel multiply-adds.
pub const DEFAULT_BUDGET: u128 = 4_000_000_000_000;

/// Environment override for the cap.
pub const BUDGET_ENV: &str = "PIN_BUDGET";

/// Multiply-adds for `replicas` DP passes over `n` sites.
pub fn dp_units(n: usize, replicas: usize) -> u128 {
    let n = n as u128;
    n * (n + 1) / 2 * replicas as u128
}

pub fn check(required: u128, cap: u128) -> Result<()> {
    if required > cap {
        Err(PinError::Budget { required, cap })
    } else {
        Ok(())
    }
}

/// Cap from `PIN_BUDGET` if set, else `fallback`.
pub fn from_env(fallback: u128) -> Result<u128> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| *x > 0.0 && x.is_finite())
            .map(|x| x as u128)
            .ok_or_else(|| PinError::Parse(format!("{BUDGET_ENV}={v} is not a positive number"))),
        Err(_) => Ok(fallback),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_and_cap() {
        assert_eq!(dp_units(4, 3), 30);
        assert!(check(10, 10).is_ok());
        assert!(matches!(
            check(11, 10),
            Err(PinError::Budget {
                required: 11,
                cap: 10
            })
        ));
    }
}
