use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used by every sampler. ChaCha is counter based, so each derived
/// stream is independent of how many draws other streams have made.
pub type SampleRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a path of labels (experiment id, n, trial, ...) into a stream id.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master ^ GOLDEN), |acc, &p| mix(acc.wrapping_add(GOLDEN) ^ mix(p)))
}

/// The generator for `path` under `master`: the master key with a stream
/// number derived from the path.
pub fn derive_rng(master: u64, path: &[u64]) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(derive_seed(master, path));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut r = derive_rng(7, &[1, 128, 0]);
                move |_| r.random()
            })
            .collect();
        let b: Vec<u64> = (0..4)
            .map({
                let mut r = derive_rng(7, &[1, 128, 0]);
                move |_| r.random()
            })
            .collect();
        let c: Vec<u64> = (0..4)
            .map({
                let mut r = derive_rng(7, &[1, 128, 1]);
                move |_| r.random()
            })
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
    }
}
