use crate::error::CoreError;
use crate::Coins;

/// Per-warden collateral for a channel of balance `v` with fault tolerance
/// `f`: `ceil(v / f)`, the smallest integer that is at least `v / f`. It also
/// satisfies `(f + 1) * c > v`, so `f + 1` slashed wardens cover the channel.
pub fn required_collateral(v: Coins, f: u32) -> Result<Coins, CoreError> {
    if f == 0 {
        return Err(CoreError::ZeroFaultTolerance);
    }
    if v == 0 {
        return Err(CoreError::ZeroBalance);
    }
    Ok(v.div_ceil(f as u64))
}

/// Size of a quorum certificate for a committee of `3f + 1`.
pub fn quorum_size(f: u32) -> usize {
    2 * f as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_collateral_when_v_equals_f() {
        for f in 1..20 {
            assert_eq!(required_collateral(f as u64, f).unwrap(), 1);
        }
    }

    #[test]
    fn zero_f_rejected() {
        assert_eq!(required_collateral(10, 0), Err(CoreError::ZeroFaultTolerance));
    }

    #[test]
    fn quorum_sizes() {
        assert_eq!(quorum_size(1), 3);
        assert_eq!(quorum_size(3), 7);
    }
}
