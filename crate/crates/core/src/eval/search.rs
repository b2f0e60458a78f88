use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Dataset;
use crate::model::Hyperparameters;

use super::{cross_validate, split, GroupGapSplit};

/// Inclusive sampling ranges. Row and feature subsampling draw independently
/// from `subsample`; the learning rate is drawn log-uniformly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpace {
    pub n_trees: (usize, usize),
    pub max_depth: (usize, usize),
    pub learning_rate: (f64, f64),
    pub subsample: (f64, f64),
    pub l2_leaf_penalty: (f64, f64),
    pub min_child_cover: (f64, f64),
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            n_trees: (100, 1500),
            max_depth: (3, 10),
            learning_rate: (0.01, 0.3),
            subsample: (0.5, 1.0),
            l2_leaf_penalty: (0.0, 10.0),
            min_child_cover: (1.0, 50.0),
        }
    }
}

impl SearchSpace {
    /// The space holding only `hp`.
    pub fn point(hp: &Hyperparameters) -> Self {
        SearchSpace {
            n_trees: (hp.n_trees, hp.n_trees),
            max_depth: (hp.max_depth, hp.max_depth),
            learning_rate: (hp.learning_rate, hp.learning_rate),
            subsample: (hp.subsample_rows, hp.subsample_rows),
            l2_leaf_penalty: (hp.l2_leaf_penalty, hp.l2_leaf_penalty),
            min_child_cover: (hp.min_child_cover, hp.min_child_cover),
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check<T: PartialOrd + std::fmt::Debug>(name: &str, (lo, hi): (T, T)) -> Result<()> {
            if lo <= hi {
                Ok(())
            } else {
                Err(Error::invalid(format!("search range for {name} is empty: {lo:?}..={hi:?}")))
            }
        }
        check("n_trees", self.n_trees)?;
        check("max_depth", self.max_depth)?;
        check("learning_rate", self.learning_rate)?;
        check("subsample", self.subsample)?;
        check("l2_leaf_penalty", self.l2_leaf_penalty)?;
        check("min_child_cover", self.min_child_cover)?;
        if self.learning_rate.0 <= 0.0 {
            return Err(Error::invalid("learning-rate range must be positive"));
        }
        Ok(())
    }

    fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    }

    /// Draws one configuration; fields outside the space come from `template`.
    pub fn sample(&self, rng: &mut ChaCha8Rng, template: &Hyperparameters) -> Hyperparameters {
        let (lr_lo, lr_hi) = self.learning_rate;
        Hyperparameters {
            n_trees: rng.random_range(self.n_trees.0..=self.n_trees.1),
            max_depth: rng.random_range(self.max_depth.0..=self.max_depth.1),
            learning_rate: Self::uniform(rng, (lr_lo.ln(), lr_hi.ln())).exp().clamp(lr_lo, lr_hi),
            subsample_rows: Self::uniform(rng, self.subsample),
            subsample_features: Self::uniform(rng, self.subsample),
            l2_leaf_penalty: Self::uniform(rng, self.l2_leaf_penalty),
            min_child_cover: Self::uniform(rng, self.min_child_cover),
            ..template.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: usize,
    pub hyperparameters: Hyperparameters,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_trial: usize,
    pub best: Hyperparameters,
    pub trials: Vec<Trial>,
}

impl SearchResult {
    pub fn best_score(&self) -> f64 {
        self.trials[self.best_trial].mean_score
    }
}

/// Random search scored by mean cross-validated R².
///
/// Configurations are drawn up front from `seed`, so the trial list does not
/// depend on evaluation order. The first trial reaching the top score wins.
pub fn random_search(
    data: &Dataset,
    space: &SearchSpace,
    n_trials: usize,
    template: &Hyperparameters,
    cv: &GroupGapSplit,
    seed: u64,
) -> Result<SearchResult> {
    space.validate()?;
    if n_trials == 0 {
        return Err(Error::invalid("random search needs at least one trial"));
    }
    let folds = split(data.hours(), cv)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let configs: Vec<Hyperparameters> = (0..n_trials).map(|_| space.sample(&mut rng, template)).collect();
    let mut trials = Vec::with_capacity(n_trials);
    for (id, hp) in configs.into_iter().enumerate() {
        hp.validate()?;
        let s = cross_validate(data, &hp, &folds)?;
        trials.push(Trial {
            id,
            hyperparameters: hp,
            fold_scores: s.fold_scores,
            mean_score: s.mean,
        });
    }
    let mut best = 0;
    for t in &trials {
        if t.mean_score > trials[best].mean_score {
            best = t.id;
        }
    }
    Ok(SearchResult {
        best_trial: best,
        best: trials[best].hyperparameters.clone(),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_range() {
        let space = SearchSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let hp = space.sample(&mut rng, &Hyperparameters::default());
            hp.validate().unwrap();
            assert!((100..=1500).contains(&hp.n_trees));
            assert!((3..=10).contains(&hp.max_depth));
            assert!((0.01..=0.3).contains(&hp.learning_rate));
            assert!((0.5..=1.0).contains(&hp.subsample_rows));
            assert!((0.0..=10.0).contains(&hp.l2_leaf_penalty));
            assert!((1.0..=50.0).contains(&hp.min_child_cover));
        }
    }

    #[test]
    fn point_space_samples_its_point() {
        let hp = Hyperparameters { n_trees: 17, learning_rate: 0.07, subsample_features: 0.9, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = SearchSpace::point(&hp).sample(&mut rng, &hp);
        assert_eq!(s, Hyperparameters { subsample_features: hp.subsample_rows, ..hp });
    }

    #[test]
    fn inverted_range_rejected() {
        let space = SearchSpace { max_depth: (5, 4), ..Default::default() };
        assert!(matches!(space.validate(), Err(Error::InvalidInput(_))));
    }
}
