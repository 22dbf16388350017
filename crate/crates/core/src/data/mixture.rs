use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::{Error, Result};
use crate::posterior::ClassPosterior;
use crate::seed::rng_from_seed;

/// One isotropic 2-D Gaussian kernel of the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: [f64; 2],
    /// Per-axis variance; the covariance is `variance · I`.
    pub variance: f64,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    pub components: Vec<GaussianComponent>,
}

impl GaussianMixtureSpec {
    pub fn num_classes(&self) -> usize {
        self.components.iter().map(|c| c.class + 1).max().unwrap_or(0)
    }

    /// Total mixing weight per class.
    pub fn class_priors(&self) -> Vec<f64> {
        let mut priors = vec![0.0; self.num_classes()];
        for c in &self.components {
            priors[c.class] += c.weight;
        }
        priors
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::Config("mixture has no components".into()));
        }
        let total: f64 = self.components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("mixture weights sum to {total}")));
        }
        if self
            .components
            .iter()
            .any(|c| !(c.weight > 0.0 && c.weight < 1.0) || c.variance.is_nan() || c.variance <= 0.0)
        {
            return Err(Error::Config(
                "weights must lie in (0,1) and variances be positive".into(),
            ));
        }
        if self.num_classes() < 2 {
            return Err(Error::TooFewClasses(self.num_classes()));
        }
        Ok(())
    }
}

/// The five-kernel benchmark: three kernels for class 0, two for class 1, all
/// with variance 0.03 per axis.
pub fn make_paper_mixture() -> GaussianMixtureSpec {
    let kernel = |weight, mean, class| GaussianComponent {
        weight,
        mean,
        variance: 0.03,
        class,
    };
    GaussianMixtureSpec {
        components: vec![
            kernel(0.16, [1.0, 1.0], 0),
            kernel(0.17, [0.7, 0.3], 0),
            kernel(0.17, [0.3, 0.3], 0),
            kernel(0.25, [-0.3, 0.7], 1),
            kernel(0.25, [0.4, 0.7], 1),
        ],
    }
}

/// Draws `n` labelled points. Each point picks a component with probability
/// equal to its weight, then adds `σ·(z₁, z₂)` with standard-normal `z` to
/// its mean.
pub fn sample_mixture(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = rng_from_seed(seed);
    let picker = WeightedIndex::new(spec.components.iter().map(|c| c.weight))
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let comp = &spec.components[picker.sample(&mut rng)];
        let sd = comp.variance.sqrt();
        let z0: f64 = StandardNormal.sample(&mut rng);
        let z1: f64 = StandardNormal.sample(&mut rng);
        features.push(comp.mean[0] + sd * z0);
        features.push(comp.mean[1] + sd * z1);
        labels.push(comp.class);
    }
    Dataset::from_flat(
        features,
        labels,
        spec.num_classes(),
        vec!["x1".into(), "x2".into()],
    )
}

/// True class posterior under the mixture. Falls back to the class priors
/// when every kernel density underflows.
pub fn bayes_posterior(spec: &GaussianMixtureSpec, x: [f64; 2]) -> ClassPosterior {
    let mut weights = vec![0.0; spec.num_classes()];
    for c in &spec.components {
        let d2 = (x[0] - c.mean[0]).powi(2) + (x[1] - c.mean[1]).powi(2);
        let density =
            (-d2 / (2.0 * c.variance)).exp() / (2.0 * std::f64::consts::PI * c.variance);
        weights[c.class] += c.weight * density;
    }
    ClassPosterior::from_weights(&weights)
        .or_else(|| ClassPosterior::from_weights(&spec.class_priors()))
        .unwrap_or_else(|| ClassPosterior::uniform(spec.num_classes()))
}

/// Monte-Carlo error rate of the Bayes-optimal rule on `n` fresh draws.
pub fn estimate_bayes_error(spec: &GaussianMixtureSpec, n: usize, seed: u64) -> Result<f64> {
    let data = sample_mixture(spec, n, seed)?;
    let errors = data
        .rows()
        .zip(data.labels())
        .filter(|(x, &y)| bayes_posterior(spec, [x[0], x[1]]).argmax() != y)
        .count();
    Ok(errors as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class(mean_a: [f64; 2], mean_b: [f64; 2], variance: f64) -> GaussianMixtureSpec {
        GaussianMixtureSpec {
            components: vec![
                GaussianComponent {
                    weight: 0.5,
                    mean: mean_a,
                    variance,
                    class: 0,
                },
                GaussianComponent {
                    weight: 0.5,
                    mean: mean_b,
                    variance,
                    class: 1,
                },
            ],
        }
    }

    #[test]
    fn paper_mixture_parameters() {
        let spec = make_paper_mixture();
        spec.validate().unwrap();
        assert_eq!(spec.components.len(), 5);
        let total: f64 = spec.components.iter().map(|c| c.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let priors = spec.class_priors();
        assert!((priors[0] - 0.5).abs() < 1e-12);
        assert!(spec.components.iter().all(|c| c.variance == 0.03));
        assert_eq!(spec.components[3].mean, [-0.3, 0.7]);
    }

    #[test]
    fn sampling_shape_and_determinism() {
        let spec = make_paper_mixture();
        let a = sample_mixture(&spec, 250, 11).unwrap();
        assert_eq!((a.len(), a.n_features(), a.num_classes()), (250, 2, 2));
        assert_eq!(a, sample_mixture(&spec, 250, 11).unwrap());
        assert_ne!(a, sample_mixture(&spec, 250, 12).unwrap());
    }

    #[test]
    fn posterior_at_class_zero_centre() {
        // Densities at (1,1): only the (1,1) kernel is non-negligible for class 0;
        // the nearest class-1 kernel (0.4,0.7) is at squared distance 0.45, i.e.
        // a factor exp(-7.5) smaller before weighting.
        let p = bayes_posterior(&make_paper_mixture(), [1.0, 1.0]);
        assert!(p[0] > 0.5);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_point_is_even() {
        let spec = two_class([-1.0, 0.0], [1.0, 0.0], 0.5);
        let p = bayes_posterior(&spec, [0.0, 3.0]);
        assert!((p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn underflow_falls_back_to_priors() {
        let mut spec = two_class([0.0, 0.0], [1.0, 0.0], 1e-6);
        spec.components[0].weight = 0.3;
        spec.components[1].weight = 0.7;
        let p = bayes_posterior(&spec, [500.0, 500.0]);
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn weight_scaling_does_not_change_posterior() {
        let spec = make_paper_mixture();
        let mut scaled = spec.clone();
        for c in &mut scaled.components {
            c.weight *= 7.25;
        }
        for x in [[0.5, 0.5], [-0.2, 0.9], [1.3, 0.1]] {
            let (a, b) = (bayes_posterior(&spec, x), bayes_posterior(&scaled, x));
            assert_eq!(a.argmax(), b.argmax());
            for (pa, pb) in a.probs().iter().zip(b.probs()) {
                assert!((pa - pb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bayes_error_extremes() {
        let separable = two_class([-10.0, 0.0], [10.0, 0.0], 1e-6);
        assert_eq!(estimate_bayes_error(&separable, 20_000, 1).unwrap(), 0.0);
        let identical = two_class([0.0, 0.0], [0.0, 0.0], 1.0);
        let e = estimate_bayes_error(&identical, 20_000, 1).unwrap();
        assert!((e - 0.5).abs() < 0.02, "{e}");
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = make_paper_mixture();
        spec.components[0].weight = 0.2;
        assert!(spec.validate().is_err());
        let mut spec = make_paper_mixture();
        spec.components[0].variance = 0.0;
        assert!(spec.validate().is_err());
    }
}
