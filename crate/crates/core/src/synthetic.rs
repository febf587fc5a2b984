//! Seeded synthetic tasks used by tests, benchmarks and demos.

use rand::Rng;

use crate::dataset::Dataset;
use crate::rng;

/// Two overlapping isotropic Gaussians in two dimensions, class means
/// `(-separation/2, 0)` and `(+separation/2, 0)`, unit variance,
/// `n_per_class` rows each. Small separations give heavy class overlap.
pub fn two_gaussians(n_per_class: usize, separation: f64, seed: u64) -> Dataset {
    let mut r = rng::stream(seed);
    let mut features = Vec::with_capacity(n_per_class * 4);
    let mut labels = Vec::with_capacity(n_per_class * 2);
    for class in [0u8, 1u8] {
        let mean = if class == 1 { separation / 2.0 } else { -separation / 2.0 };
        for _ in 0..n_per_class {
            let (z0, z1) = gaussian_pair(&mut r);
            features.push(mean + z0);
            features.push(z1);
            labels.push(class);
        }
    }
    Dataset::from_parts(features, 2, labels, format!("two_gaussians_{seed}"))
        .expect("valid synthetic data")
}

/// Additive logistic task: features uniform on `[-1, 1]`, true probability
/// `sigmoid(sum coefs[j] * x[j])`, labels Bernoulli. Returns the dataset and
/// the true probabilities.
pub fn additive_logistic(n: usize, coefs: &[f64], seed: u64) -> (Dataset, Vec<f64>) {
    let mut r = rng::stream(seed);
    let width = coefs.len();
    let mut features = Vec::with_capacity(n * width);
    let mut labels = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    for _ in 0..n {
        let mut logit = 0.0;
        for &c in coefs {
            let x: f64 = r.gen_range(-1.0..1.0);
            features.push(x);
            logit += c * x;
        }
        let p = 1.0 / (1.0 + (-logit).exp());
        probs.push(p);
        let u: f64 = r.gen();
        labels.push(u8::from(u < p));
    }
    let d = Dataset::from_parts(features, width, labels, format!("additive_{seed}"))
        .expect("valid synthetic data");
    (d, probs)
}

/// Box-Muller transform over the seeded stream.
fn gaussian_pair<R: Rng>(r: &mut R) -> (f64, f64) {
    let u1: f64 = loop {
        let u: f64 = r.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = r.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    (radius * angle.cos(), radius * angle.sin())
}
