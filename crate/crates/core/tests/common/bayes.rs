//! Brute-force Bayes over the full joint table of (state, next state,
//! signal, observation).

use rand::Rng;

pub struct RandomModel {
    /// `[action][s][s']`
    pub t: Vec<Vec<Vec<f64>>>,
    /// `[s'][signal][obs]`
    pub omega: Vec<Vec<Vec<f64>>>,
    pub prior: Vec<f64>,
    pub signal_prior: Vec<f64>,
}

fn simplex<R: Rng>(rng: &mut R, n: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                if sparse && rng.random::<f64>() < 0.3 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let total: f64 = v.iter().sum();
        if total > 1e-3 {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}

pub fn random_model<R: Rng>(rng: &mut R, n_states: usize, n_obs: usize) -> RandomModel {
    let t = (0..3)
        .map(|_| {
            (0..n_states)
                .map(|_| simplex(rng, n_states, true))
                .collect()
        })
        .collect();
    let omega = (0..n_states)
        .map(|_| (0..3).map(|_| simplex(rng, n_obs, true)).collect())
        .collect();
    RandomModel {
        t,
        omega,
        prior: simplex(rng, n_states, false),
        signal_prior: simplex(rng, 3, false),
    }
}

/// Posterior over next states, or `None` when the observation is impossible.
pub fn posterior(m: &RandomModel, action: usize, obs: usize) -> Option<Vec<f64>> {
    let n = m.prior.len();
    let mut joint = vec![vec![vec![0.0f64; 3]; n]; n];
    for s in 0..n {
        for s2 in 0..n {
            for iota in 0..3 {
                joint[s][s2][iota] =
                    m.prior[s] * m.t[action][s][s2] * m.signal_prior[iota] * m.omega[s2][iota][obs];
            }
        }
    }
    let evidence: f64 = joint.iter().flatten().flatten().sum();
    if evidence <= 0.0 {
        return None;
    }
    Some(
        (0..n)
            .map(|s2| {
                (0..n)
                    .map(|s| joint[s][s2].iter().sum::<f64>())
                    .sum::<f64>()
                    / evidence
            })
            .collect(),
    )
}
