//! Reference inference: a collapsed Gibbs sampler and brute-force
//! enumeration of all partitions for very small datasets.

mod enumerate;
mod gibbs;

pub use enumerate::{enumerate_exact, ExactPosterior, ENUMERATION_CAP};
pub use gibbs::{
    collapsed_gibbs, collapsed_gibbs_chains, gibbs_predictive, GibbsConfig, GibbsDraw,
    GibbsPredictive, PosteriorSamples,
};

/// Relabels `labels` so that clusters are numbered in order of first
/// appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = Vec::new();
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if l >= map.len() {
                map.resize(l + 1, None);
            }
            *map[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relabeling() {
        assert_eq!(canonical_labels(&[3, 3, 0, 5, 0]), vec![0, 0, 1, 2, 1]);
        assert_eq!(canonical_labels(&[]), Vec::<usize>::new());
    }
}
