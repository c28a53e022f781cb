use crate::error::{CliError, Result};

/// Parses a seed list such as `1..20`, `3,5,8` or `1..4,10`.
/// Ranges include both ends.
pub fn parse_seed_spec(spec: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(CliError::Usage(format!("empty entry in seed list `{spec}`")));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad seed `{s}` in `{spec}`")))
        };
        match part.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi)?);
                if lo > hi {
                    return Err(CliError::Usage(format!("empty seed range `{part}`")));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(num(part)?),
        }
    }
    Ok(seeds)
}

/// Adds `offset` to every seed, wrapping on overflow.
pub fn apply_offset(seeds: &[u64], offset: u64) -> Vec<u64> {
    seeds.iter().map(|s| s.wrapping_add(offset)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_seed_spec("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seed_spec("7").unwrap(), vec![7]);
        assert_eq!(parse_seed_spec("1..2, 9,4").unwrap(), vec![1, 2, 9, 4]);
        assert_eq!(parse_seed_spec("1..20").unwrap().len(), 20);
    }

    #[test]
    fn malformed() {
        for bad in ["", "a", "3..1", "1,,2", "1..", "-1"] {
            assert!(parse_seed_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn offset_wraps() {
        assert_eq!(apply_offset(&[1, u64::MAX], 2), vec![3, 1]);
    }
}
