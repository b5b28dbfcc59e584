use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::CaseData;

/// Applies a seeded Gaussian perturbation to every positive bus load.
///
/// `P_d` becomes `max(0, P_d + N(mu_frac P_d, (sigma_frac P_d)^2))`; `Q_d` is
/// scaled by the same factor. One normal deviate is drawn per bus in file
/// order whether or not the bus carries load, so a seed always maps buses to
/// the same stream positions.
pub fn perturb_loads(case: &CaseData, seed: u64, mu_frac: f64, sigma_frac: f64) -> CaseData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = case.clone();
    for bus in &mut out.buses {
        let z: f64 = StandardNormal.sample(&mut rng);
        let p = bus.p_load;
        if p <= 0.0 {
            continue;
        }
        let perturbed = (p + mu_frac * p + sigma_frac * p * z).max(0.0);
        let factor = perturbed / p;
        bus.p_load = perturbed;
        bus.q_load *= factor;
    }
    out
}
