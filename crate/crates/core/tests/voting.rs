use dpcnn_core::majority_vote;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_force(sets: &[Vec<u32>], i: usize) -> u32 {
    let mut hist = std::collections::BTreeMap::new();
    for s in sets {
        *hist.entry(s[i]).or_insert(0) += 1;
    }
    let top = *hist.values().max().unwrap();
    *hist.iter().find(|(_, &c)| c == top).unwrap().0
}

#[test]
fn matches_histogram_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let k = rng.gen_range(1..=9);
        let n = rng.gen_range(1..=100);
        let classes = rng.gen_range(2..=10);
        let sets: Vec<Vec<u32>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..classes)).collect()).collect();
        let out = majority_vote(&sets).unwrap();
        for i in 0..n {
            assert_eq!(out[i], brute_force(&sets, i));
        }
    }
}

#[test]
fn four_of_seven() {
    for ones in 0..=7 {
        let sets: Vec<Vec<u32>> = (0..7).map(|t| vec![(t < ones) as u32]).collect();
        assert_eq!(majority_vote(&sets).unwrap()[0], (ones >= 4) as u32);
    }
}
