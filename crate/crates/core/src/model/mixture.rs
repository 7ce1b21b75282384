use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{logsumexp, Conjugate, Density};

/// A finite mixture of conjugate posterior predictives, `Σ_j w_j t_j(y)`.
#[derive(Debug, Clone)]
pub struct MixturePredictive<C: Conjugate> {
    weights: Vec<f64>,
    components: Vec<C>,
    kernels: Vec<C::Predictive>,
}

impl<C: Conjugate> MixturePredictive<C> {
    pub fn new(weights: Vec<f64>, components: Vec<C>) -> Self {
        assert_eq!(weights.len(), components.len());
        let kernels = components.iter().map(Conjugate::predictive).collect();
        Self {
            weights,
            components,
            kernels,
        }
    }

    /// Flattens a weighted set of mixtures into one.
    pub fn pooled<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a MixturePredictive<C>)>,
        C: 'a,
    {
        let mut weights = Vec::new();
        let mut components = Vec::new();
        let mut kernels = Vec::new();
        for (scale, m) in parts {
            weights.extend(m.weights.iter().map(|w| w * scale));
            components.extend(m.components.iter().cloned());
            kernels.extend(m.kernels.iter().cloned());
        }
        Self {
            weights,
            components,
            kernels,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[C] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(1, Conjugate::dim)
    }

    pub fn ln_density(&self, y: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.kernels)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, k)| w.ln() + k.ln_density(y))
            .collect();
        logsumexp(&terms)
    }

    pub fn density(&self, y: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.kernels)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, k)| w * k.density(y))
            .sum()
    }
}

#[derive(Serialize)]
struct MixtureRef<'a, C> {
    weights: &'a [f64],
    components: &'a [C],
}

#[derive(Deserialize)]
struct MixtureOwned<C> {
    weights: Vec<f64>,
    components: Vec<C>,
}

impl<C: Conjugate> Serialize for MixturePredictive<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MixtureRef {
            weights: &self.weights,
            components: &self.components,
        }
        .serialize(s)
    }
}

impl<'de, C: Conjugate + DeserializeOwned> Deserialize<'de> for MixturePredictive<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MixtureOwned::<C>::deserialize(d)?;
        if raw.weights.len() != raw.components.len() {
            return Err(serde::de::Error::custom(
                "weights and components differ in length",
            ));
        }
        Ok(Self::new(raw.weights, raw.components))
    }
}
