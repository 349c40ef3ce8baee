//! Peer availability models: permanent fail-stop departures and an
//! alternating online/offline model with heavy-tailed session durations.

use rand::Rng;
use rand_distr::{Distribution, Exp};

/// Pareto Type II (Shifted Pareto) distribution with location `mu`, scale
/// `beta` and shape `alpha`: `F(x) = 1 - (1 + (x - mu)/beta)^(-alpha)` for
/// `x >= mu`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedPareto {
    pub mu: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl ShiftedPareto {
    pub fn new(mu: f64, beta: f64, alpha: f64) -> Self {
        assert!(beta > 0.0 && alpha > 0.0);
        ShiftedPareto { mu, beta, alpha }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.mu {
            0.0
        } else {
            1.0 - (1.0 + (x - self.mu) / self.beta).powf(-self.alpha)
        }
    }

    /// Inverse-transform sampling: `x = mu + beta ((1 - u)^(-1/alpha) - 1)`.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }

    /// Value at cumulative probability `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.mu + self.beta * ((1.0 - u).powf(-1.0 / self.alpha) - 1.0)
    }

    /// `mu + beta / (alpha - 1)`, finite for `alpha > 1`.
    pub fn mean(&self) -> f64 {
        self.mu + self.beta / (self.alpha - 1.0)
    }
}

/// Which family the per-peer lifetime distributions come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifetimeKind {
    Pareto,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChurnModel {
    /// Everybody stays online forever.
    None,
    /// Each online peer dies independently with `fail_prob` at the start of
    /// every round; death is permanent.
    FailStop { fail_prob: f64 },
    /// Peers alternate online and offline sessions. Each peer draws an
    /// average lifetime `l` ~ ShiftedPareto(mu 1.01, beta 1, alpha 3) and an
    /// average offline duration `d` ~ ShiftedPareto(mu 1.01, beta 2, alpha 3)
    /// once; online sessions then come from ShiftedPareto(beta 2, alpha 2l)
    /// or Exponential(1/l), offline sessions from
    /// ShiftedPareto(beta 3, alpha 2d).
    Yao { lifetime: LifetimeKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeerStatus {
    Online,
    Offline,
    Dead,
}

#[derive(Debug, Clone)]
enum SessionDist {
    Pareto(ShiftedPareto),
    Exponential(Exp<f64>),
}

impl SessionDist {
    fn sample_rounds(&self, rng: &mut impl Rng) -> u32 {
        let raw = match self {
            SessionDist::Pareto(p) => p.sample(rng),
            SessionDist::Exponential(e) => e.sample(rng),
        };
        (raw.ceil().max(1.0)) as u32
    }
}

/// Per-peer availability schedule.
#[derive(Debug, Clone)]
pub struct ChurnState {
    model: ChurnModel,
    status: Vec<PeerStatus>,
    /// Yao only: full rounds remaining in the current session.
    remaining: Vec<u32>,
    online_dist: Vec<SessionDist>,
    offline_dist: Vec<SessionDist>,
}

impl ChurnState {
    /// All peers start online; under the alternating model the first online
    /// session of each peer is drawn immediately.
    pub fn init(model: &ChurnModel, peers: usize, rng: &mut impl Rng) -> ChurnState {
        let mut state = ChurnState {
            model: *model,
            status: vec![PeerStatus::Online; peers],
            remaining: Vec::new(),
            online_dist: Vec::new(),
            offline_dist: Vec::new(),
        };
        if let ChurnModel::Yao { lifetime } = model {
            let avg_lifetime = ShiftedPareto::new(1.01, 1.0, 3.0);
            let avg_offline = ShiftedPareto::new(1.01, 2.0, 3.0);
            for _ in 0..peers {
                let l = avg_lifetime.sample(rng);
                let d = avg_offline.sample(rng);
                let online = match lifetime {
                    LifetimeKind::Pareto => {
                        SessionDist::Pareto(ShiftedPareto::new(1.01, 2.0, 2.0 * l))
                    }
                    LifetimeKind::Exponential => {
                        SessionDist::Exponential(Exp::new(1.0 / l).expect("positive rate"))
                    }
                };
                state.online_dist.push(online);
                state
                    .offline_dist
                    .push(SessionDist::Pareto(ShiftedPareto::new(1.01, 3.0, 2.0 * d)));
            }
            state.remaining = (0..peers)
                .map(|i| state.online_dist[i].sample_rounds(rng))
                .collect();
        }
        state
    }

    /// Advances availability by one round. Call once per round, before any
    /// gossip exchange.
    pub fn step(&mut self, rng: &mut impl Rng) {
        match self.model {
            ChurnModel::None => {}
            ChurnModel::FailStop { fail_prob } => {
                for status in self.status.iter_mut() {
                    if *status == PeerStatus::Online && rng.random::<f64>() < fail_prob {
                        *status = PeerStatus::Dead;
                    }
                }
            }
            ChurnModel::Yao { .. } => {
                for peer in 0..self.status.len() {
                    if self.remaining[peer] == 0 {
                        let (next, dist) = match self.status[peer] {
                            PeerStatus::Online => (PeerStatus::Offline, &self.offline_dist[peer]),
                            PeerStatus::Offline => (PeerStatus::Online, &self.online_dist[peer]),
                            PeerStatus::Dead => unreachable!("alternating peers never die"),
                        };
                        self.status[peer] = next;
                        self.remaining[peer] = dist.sample_rounds(rng);
                    }
                    self.remaining[peer] -= 1;
                }
            }
        }
    }

    pub fn status(&self, peer: u32) -> PeerStatus {
        self.status[peer as usize]
    }

    pub fn is_online(&self, peer: u32) -> bool {
        self.status[peer as usize] == PeerStatus::Online
    }

    pub fn online_peers(&self) -> Vec<u32> {
        (0..self.status.len() as u32)
            .filter(|&p| self.is_online(p))
            .collect()
    }

    pub fn online_count(&self) -> usize {
        self.status
            .iter()
            .filter(|&&s| s == PeerStatus::Online)
            .count()
    }

    pub fn peer_count(&self) -> usize {
        self.status.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantile_at_zero_is_location() {
        let sp = ShiftedPareto::new(1.01, 1.0, 3.0);
        assert_eq!(sp.quantile(0.0), 1.01);
    }

    #[test]
    fn median_reference_value() {
        // mu + beta (2^(1/3) - 1), cross-checked at 50 digits.
        let sp = ShiftedPareto::new(1.01, 1.0, 3.0);
        let x = sp.quantile(0.5);
        assert!((x - 1.2699210498948732).abs() < 1e-12);
        assert!((sp.cdf(x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empirical_cdf_matches_analytic() {
        let sp = ShiftedPareto::new(1.01, 1.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n).map(|_| sp.sample(&mut rng)).collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        // Kolmogorov-Smirnov distance against the analytic CDF.
        let mut ks: f64 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let analytic = sp.cdf(x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((analytic - lo).abs()).max((analytic - hi).abs());
        }
        assert!(ks < 0.01, "KS distance {ks}");
        for &x in &samples {
            assert!(x >= sp.mu);
        }
    }

    #[test]
    fn no_churn_keeps_everyone_online() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut state = ChurnState::init(&ChurnModel::None, 10, &mut rng);
        for _ in 0..100 {
            state.step(&mut rng);
        }
        assert_eq!(state.online_count(), 10);
    }

    #[test]
    fn fail_stop_zero_probability_never_kills() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = ChurnState::init(&ChurnModel::FailStop { fail_prob: 0.0 }, 50, &mut rng);
        for _ in 0..200 {
            state.step(&mut rng);
        }
        assert_eq!(state.online_count(), 50);
    }

    #[test]
    fn fail_stop_certain_failure_kills_everyone() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = ChurnState::init(&ChurnModel::FailStop { fail_prob: 1.0 }, 20, &mut rng);
        state.step(&mut rng);
        assert_eq!(state.online_count(), 0);
        assert!((0..20).all(|p| state.status(p) == PeerStatus::Dead));
    }

    #[test]
    fn fail_stop_one_step_binomial() {
        // p = 10^4, fail 0.1: expect 9000 online within 3 sigma = 90.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut state =
            ChurnState::init(&ChurnModel::FailStop { fail_prob: 0.1 }, 10_000, &mut rng);
        state.step(&mut rng);
        let online = state.online_count() as f64;
        assert!((online - 9_000.0).abs() <= 90.0, "online {online}");
    }

    #[test]
    fn fail_stop_online_set_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut state =
            ChurnState::init(&ChurnModel::FailStop { fail_prob: 0.05 }, 500, &mut rng);
        let mut prev = state.online_peers();
        for _ in 0..50 {
            state.step(&mut rng);
            let now = state.online_peers();
            assert!(now.iter().all(|p| prev.contains(p)));
            prev = now;
        }
    }

    #[test]
    fn yao_session_lasts_its_full_duration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut state = ChurnState::init(
            &ChurnModel::Yao {
                lifetime: LifetimeKind::Pareto,
            },
            1,
            &mut rng,
        );
        state.remaining[0] = 3;
        for _ in 0..3 {
            state.step(&mut rng);
            assert_eq!(state.status(0), PeerStatus::Online);
        }
        state.step(&mut rng);
        assert_eq!(state.status(0), PeerStatus::Offline);
    }

    #[test]
    fn yao_average_lifetime_parameters() {
        // Mean of ShiftedPareto(1.01, 1, 3) is 1.51; check the sampled
        // per-peer averages against it.
        let dist = ShiftedPareto::new(1.01, 1.0, 3.0);
        assert!((dist.mean() - 1.51).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000;
        let mean: f64 = (0..n).map(|_| dist.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.51).abs() <= 0.05, "sampled mean {mean}");
    }

    #[test]
    fn yao_peers_never_die_and_cycle_offline() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let peers = 300;
        let mut state = ChurnState::init(
            &ChurnModel::Yao {
                lifetime: LifetimeKind::Exponential,
            },
            peers,
            &mut rng,
        );
        let mut saw_offline = vec![false; peers];
        for _ in 0..10_000 {
            state.step(&mut rng);
            for p in 0..peers {
                assert_ne!(state.status(p as u32), PeerStatus::Dead);
                if state.status(p as u32) == PeerStatus::Offline {
                    saw_offline[p] = true;
                }
            }
        }
        let cycled = saw_offline.iter().filter(|&&b| b).count();
        assert!(cycled * 100 >= peers * 99, "only {cycled}/{peers} cycled");
    }
}
