use crate::error::{Error, Result};

/// Weighted histogram over half-open bins `[e_i, e_{i+1})`; the last bin is
/// closed on the right. Weight falling outside the edges is kept in
/// `out_of_range_weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedHistogram {
    edges: Vec<f64>,
    weighted_counts: Vec<f64>,
    sum_sq_weights: Vec<f64>,
    entries: Vec<u64>,
    total_weight: f64,
    out_of_range_weight: f64,
}

impl WeightedHistogram {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Config("a histogram needs at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "histogram edges must be finite and strictly ascending".into(),
            ));
        }
        let bins = edges.len() - 1;
        Ok(WeightedHistogram {
            edges,
            weighted_counts: vec![0.0; bins],
            sum_sq_weights: vec![0.0; bins],
            entries: vec![0; bins],
            total_weight: 0.0,
            out_of_range_weight: 0.0,
        })
    }

    /// `bins` equal-width bins over `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(lo < hi) {
            return Err(Error::Config(format!(
                "uniform histogram needs bins >= 1 and lo < hi (got {bins} bins over [{lo}, {hi}])"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
        edges.push(hi);
        Self::new(edges)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bins(&self) -> usize {
        self.weighted_counts.len()
    }

    pub fn weighted_counts(&self) -> &[f64] {
        &self.weighted_counts
    }

    pub fn sum_sq_weights(&self) -> &[f64] {
        &self.sum_sq_weights
    }

    /// Raw number of samples that landed in each bin.
    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn out_of_range_weight(&self) -> f64 {
        self.out_of_range_weight
    }

    pub fn bin_of(&self, value: f64) -> Option<usize> {
        let lo = self.edges[0];
        let hi = *self.edges.last().unwrap();
        if !(value >= lo && value <= hi) {
            return None;
        }
        if value == hi {
            return Some(self.bins() - 1);
        }
        // first edge strictly greater than value, minus one
        Some(self.edges.partition_point(|&e| e <= value) - 1)
    }

    pub fn fill(&mut self, value: f64, weight: f64) -> Result<()> {
        if value.is_nan() || weight.is_nan() {
            return Err(Error::Data("NaN sample rejected".into()));
        }
        if !(weight >= 0.0) || weight.is_infinite() {
            return Err(Error::Data(format!(
                "weights must be finite and non-negative (got {weight})"
            )));
        }
        match self.bin_of(value) {
            Some(i) => {
                self.weighted_counts[i] += weight;
                self.sum_sq_weights[i] += weight * weight;
                self.entries[i] += 1;
            }
            None => self.out_of_range_weight += weight,
        }
        self.total_weight += weight;
        Ok(())
    }

    /// Add a batch of `(value, weight)` samples. On error the histogram is
    /// left untouched.
    pub fn accumulate<I>(&mut self, samples: I) -> Result<()>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut staged = self.clone();
        for (value, weight) in samples {
            staged.fill(value, weight)?;
        }
        *self = staged;
        Ok(())
    }

    /// Add another histogram with identical edges.
    pub fn merge(&mut self, other: &WeightedHistogram) -> Result<()> {
        if self.edges != other.edges {
            return Err(Error::Data(
                "cannot merge histograms with different edges".into(),
            ));
        }
        for i in 0..self.bins() {
            self.weighted_counts[i] += other.weighted_counts[i];
            self.sum_sq_weights[i] += other.sum_sq_weights[i];
            self.entries[i] += other.entries[i];
        }
        self.total_weight += other.total_weight;
        self.out_of_range_weight += other.out_of_range_weight;
        Ok(())
    }

    /// Build a histogram directly from per-bin weights; used to wrap
    /// tabulated bin integrals.
    pub fn from_bin_weights(edges: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let mut h = Self::new(edges)?;
        if weights.len() != h.bins() {
            return Err(Error::Data("weight count does not match bin count".into()));
        }
        for (i, w) in weights.into_iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Data(format!(
                    "bin weight {w} is not a finite non-negative value"
                )));
            }
            h.weighted_counts[i] = w;
            h.sum_sq_weights[i] = w * w;
            h.entries[i] = u64::from(w > 0.0);
            h.total_weight += w;
        }
        Ok(h)
    }
}

/// Functional form of [`WeightedHistogram::accumulate`].
pub fn histogram_accumulate<I>(mut h: WeightedHistogram, samples: I) -> Result<WeightedHistogram>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    h.accumulate(samples)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::uniform_stream;
    use proptest::prelude::*;

    #[test]
    fn empty_batch_is_identity() {
        let h = WeightedHistogram::uniform(0.0, 1.0, 4).unwrap();
        let same = histogram_accumulate(h.clone(), std::iter::empty()).unwrap();
        assert_eq!(h, same);
    }

    #[test]
    fn interior_edge_goes_right() {
        let mut h = WeightedHistogram::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        h.fill(1.0, 2.5).unwrap();
        assert_eq!(h.weighted_counts(), &[0.0, 2.5, 0.0]);
        h.fill(3.0, 1.0).unwrap();
        assert_eq!(h.weighted_counts(), &[0.0, 2.5, 1.0]);
        h.fill(0.0, 1.0).unwrap();
        assert_eq!(h.weighted_counts()[0], 1.0);
    }

    #[test]
    fn out_of_range_is_tracked() {
        let mut h = WeightedHistogram::uniform(0.0, 1.0, 2).unwrap();
        h.fill(-0.1, 1.0).unwrap();
        h.fill(1.5, 2.0).unwrap();
        assert_eq!(h.out_of_range_weight(), 3.0);
        assert_eq!(h.total_weight(), 3.0);
        assert_eq!(h.weighted_counts(), &[0.0, 0.0]);
    }

    #[test]
    fn nan_and_negative_rejected() {
        let mut h = WeightedHistogram::uniform(0.0, 1.0, 2).unwrap();
        assert!(matches!(h.fill(f64::NAN, 1.0), Err(Error::Data(_))));
        assert!(matches!(h.fill(0.5, f64::NAN), Err(Error::Data(_))));
        assert!(h.fill(0.5, -1.0).is_err());
        let before = h.clone();
        assert!(h.accumulate(vec![(0.2, 1.0), (f64::NAN, 1.0)]).is_err());
        assert_eq!(h, before);
    }

    #[test]
    fn bad_edges_rejected() {
        assert!(WeightedHistogram::new(vec![0.0]).is_err());
        assert!(WeightedHistogram::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(WeightedHistogram::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn uniform_samples_fill_bins_evenly() {
        let n = 10_000;
        let mut h = WeightedHistogram::uniform(0.0, 1.0, 10).unwrap();
        h.accumulate(uniform_stream(5, 0).take(n).map(|u| (u, 1.0)))
            .unwrap();
        // binomial(n, 0.1): sigma = sqrt(n p (1-p)) = 30
        for &c in h.weighted_counts() {
            assert!((c - 1000.0).abs() < 5.0 * 30.0, "bin count {c}");
        }
        assert_eq!(h.out_of_range_weight(), 0.0);
    }

    proptest! {
        #[test]
        fn mass_is_conserved(samples in prop::collection::vec((-1.0f64..3.0, 0.0f64..10.0), 0..200)) {
            let mut h = WeightedHistogram::uniform(0.0, 2.0, 7).unwrap();
            h.accumulate(samples.iter().copied()).unwrap();
            let inside: f64 = h.weighted_counts().iter().sum();
            let total: f64 = samples.iter().map(|s| s.1).sum();
            prop_assert!((inside + h.out_of_range_weight() - h.total_weight()).abs() <= 1e-9 * total.max(1.0));
            prop_assert!((h.total_weight() - total).abs() <= 1e-9 * total.max(1.0));
            prop_assert!(h.sum_sq_weights().iter().all(|&s| s >= 0.0));
        }

        #[test]
        fn merge_equals_single_pass(a in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..50),
                                    b in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..50)) {
            let empty = WeightedHistogram::uniform(0.0, 1.0, 5).unwrap();
            let mut left = histogram_accumulate(empty.clone(), a.iter().copied()).unwrap();
            let right = histogram_accumulate(empty.clone(), b.iter().copied()).unwrap();
            left.merge(&right).unwrap();
            let both = histogram_accumulate(empty, a.iter().chain(b.iter()).copied()).unwrap();
            prop_assert_eq!(left.entries(), both.entries());
            for (x, y) in left.weighted_counts().iter().zip(both.weighted_counts()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
