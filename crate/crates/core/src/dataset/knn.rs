use super::{DatasetError, Result};

/// k-nearest-neighbour classifier over flattened feature vectors.
#[derive(Debug, Clone)]
pub struct Knn {
    pub k: usize,
    points: Vec<Vec<f32>>,
    labels: Vec<usize>,
    num_classes: usize,
}

fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

impl Knn {
    pub fn fit(points: Vec<Vec<f32>>, labels: Vec<usize>, k: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(DatasetError::EmptyTrainSet);
        }
        if k == 0 {
            return Err(DatasetError::InvalidConfig("k must be at least 1".into()));
        }
        if points.len() != labels.len() {
            return Err(DatasetError::InvalidConfig("one label per point required".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(DatasetError::InvalidConfig("points differ in length".into()));
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Knn {
            k,
            points,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Majority vote of the `k` nearest points (Euclidean; equal distances
    /// ordered by training index). A tied vote goes to the tied class that
    /// owns the nearest neighbour.
    pub fn classify(&self, query: &[f32]) -> usize {
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (sq_dist(p, query), i))
            .collect();
        let k = self.k.min(order.len());
        order.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &mut order[..k];
        nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut votes = vec![0usize; self.num_classes];
        for &(_, i) in nearest.iter() {
            votes[self.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        nearest
            .iter()
            .map(|&(_, i)| self.labels[i])
            .find(|&c| votes[c] == top)
            .expect("a top class appears among the neighbours")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_with_k1() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let knn = Knn::fit(pts, vec![0, 1, 2], 1).unwrap();
        assert_eq!(knn.classify(&[1.0, 1.0]), 1);
        assert_eq!(knn.classify(&[4.0, 4.5]), 2);
    }

    #[test]
    fn k_equals_n_is_global_majority() {
        let pts: Vec<Vec<f32>> = (0..7).map(|i| vec![i as f32]).collect();
        let labels = vec![1, 1, 0, 1, 0, 2, 1];
        let knn = Knn::fit(pts, labels, 7).unwrap();
        for q in [-10.0, 3.0, 100.0] {
            assert_eq!(knn.classify(&[q]), 1);
        }
    }

    #[test]
    fn tie_goes_to_nearest() {
        let pts = vec![vec![0.0], vec![3.0]];
        let knn = Knn::fit(pts, vec![0, 1], 2).unwrap();
        assert_eq!(knn.classify(&[2.0]), 1);
        assert_eq!(knn.classify(&[1.0]), 0);
    }

    #[test]
    fn errors() {
        assert!(matches!(Knn::fit(vec![], vec![], 1), Err(DatasetError::EmptyTrainSet)));
        assert!(Knn::fit(vec![vec![0.0]], vec![0], 0).is_err());
    }
}
