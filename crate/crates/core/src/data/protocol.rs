use super::dataset::Dataset;
use super::rng::SeededRng;
use crate::error::{HfaError, Result};

/// Draws `per_class` training samples per class without replacement.
///
/// Classes are visited in ascending order with one generator seeded by `seed`;
/// within a class, a partial Fisher-Yates shuffle over the class's indices (in
/// file order) picks the sample. Both outputs keep the original file order.
pub fn sample_protocol(d: &Dataset, per_class: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let indices = split_indices(d, per_class, seed)?;
    Ok((d.subset(&indices.0), d.subset(&indices.1)))
}

/// Index form of [`sample_protocol`]: `(train, rest)`, both ascending.
pub fn split_indices(d: &Dataset, per_class: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_feasible(d, per_class)?;
    let mut rng = SeededRng::new(seed);
    let mut chosen = vec![false; d.len()];
    for class in d.classes() {
        let mut members: Vec<usize> = (0..d.len()).filter(|&i| d.labels()[i] == class).collect();
        rng.partial_shuffle(&mut members, per_class);
        for &i in &members[..per_class] {
            chosen[i] = true;
        }
    }
    let (train, rest): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| chosen[i]);
    Ok((train, rest))
}

/// Fails, naming the first short class, unless every class has `per_class` samples.
pub fn check_feasible(d: &Dataset, per_class: usize) -> Result<()> {
    if per_class == 0 {
        return Err(HfaError::input("per-class sample count must be positive"));
    }
    if d.is_empty() {
        return Err(HfaError::Infeasible(format!(
            "{} dataset is empty",
            d.domain()
        )));
    }
    for (class, count) in d.class_counts() {
        if count < per_class {
            return Err(HfaError::Infeasible(format!(
                "class {class} in the {} data has {count} samples, {per_class} required",
                d.domain()
            )));
        }
    }
    Ok(())
}
