use crate::error::StructureError;

fn check_generation(l: u32, k: u32) -> Result<(), StructureError> {
    if k == 0 || k > l || l > super::MAX_L {
        return Err(StructureError::GenerationOutOfRange { l, k });
    }
    Ok(())
}

/// Number of daughter cells in generation `k`, `2^(k-1)`.
pub fn generation_size(l: u32, k: u32) -> Result<u64, StructureError> {
    check_generation(l, k)?;
    Ok(1u64 << (k - 1))
}

/// Strict descendants a generation-`i` cell produces before its lineage is
/// swept: `2^(l-i+1) - 2`.
pub fn total_descendants(l: u32, i: u32) -> Result<u64, StructureError> {
    check_generation(l, i)?;
    Ok((1u64 << (l - i + 1)) - 2)
}

/// Generation and within-generation index of daughter number `d` when the
/// `N - 1` daughters are numbered breadth-first from 0.
pub fn generation_of_daughter(d: u64) -> (u32, u64) {
    let generation = 64 - (d + 1).leading_zeros();
    (generation, d + 1 - (1u64 << (generation - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_sizes() {
        assert_eq!(generation_size(4, 1), Ok(1));
        assert_eq!(generation_size(4, 3), Ok(4));
        assert_eq!(generation_size(20, 20), Ok(524_288));
        assert!(generation_size(4, 0).is_err());
        assert!(generation_size(4, 5).is_err());
    }

    #[test]
    fn descendants() {
        assert_eq!(total_descendants(4, 1), Ok(14));
        assert_eq!(total_descendants(4, 4), Ok(0));
        assert_eq!(total_descendants(3, 2), Ok(2));
        assert!(total_descendants(3, 4).is_err());
    }

    #[test]
    fn generations_fill_the_crypt() {
        for l in 1..=30 {
            let total: u64 = (1..=l).map(|k| generation_size(l, k).unwrap()).sum();
            assert_eq!(total, (1u64 << l) - 1);
        }
    }

    #[test]
    fn descendant_recursion() {
        for l in 1..=30 {
            for i in 1..l {
                let d = total_descendants(l, i).unwrap();
                assert_eq!(d, 2 * (1 + total_descendants(l, i + 1).unwrap()));
            }
        }
    }

    #[test]
    fn breadth_first_numbering() {
        assert_eq!(generation_of_daughter(0), (1, 0));
        assert_eq!(generation_of_daughter(1), (2, 0));
        assert_eq!(generation_of_daughter(2), (2, 1));
        assert_eq!(generation_of_daughter(6), (3, 3));
        assert_eq!(generation_of_daughter(7), (4, 0));
    }
}
