use crate::error::{invalid, CoreError, Result};

/// Per-example modal class over K prediction sets; ties go to the lowest class
/// index. For binary labels and K = 7 this is the 4-of-7 rule.
pub fn majority_vote(sets: &[Vec<u32>]) -> Result<Vec<u32>> {
    let first = sets.first().ok_or(CoreError::Empty("prediction sets"))?;
    let n = first.len();
    if sets.iter().any(|s| s.len() != n) {
        return invalid("prediction sets differ in length");
    }
    let classes = sets.iter().flatten().max().map_or(0, |&m| m as usize + 1);
    let mut counts = vec![0u32; classes];
    Ok((0..n)
        .map(|i| {
            counts.iter_mut().for_each(|c| *c = 0);
            for s in sets {
                counts[s[i] as usize] += 1;
            }
            let mut best = 0;
            for (c, &k) in counts.iter().enumerate() {
                if k > counts[best] {
                    best = c;
                }
            }
            best as u32
        })
        .collect())
}
