//! Monte-Carlo IND-CPA game.
//!
//! Each trial: the challenger samples fresh keys and a bit `b`; the
//! adversary submits query tuples and gets their encryptions; it then
//! submits two challenge tuples, distinct from each other and from every
//! query, receives the encryption of tuple `b`, and guesses `b`.

use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mkmr::{decrypt_all, encrypt, keygen, Ciphertext, MessageMatrix, SchemeParams};
use crate::prm::SecretKeyMatrix;
use crate::sampler::{Generator, Seed};

/// Query tuples and their encryptions, in submission order.
pub type OracleLog = [(MessageMatrix, Ciphertext)];

pub trait Adversary {
    fn name(&self) -> &str;

    /// Tuples sent to the encryption oracle.
    fn queries(&mut self, params: &SchemeParams, l: usize, rng: &mut Generator) -> Vec<MessageMatrix>;

    /// The two challenge tuples.
    fn challenge(
        &mut self,
        params: &SchemeParams,
        l: usize,
        log: &OracleLog,
        rng: &mut Generator,
    ) -> (MessageMatrix, MessageMatrix);

    /// Guess for `b`. `leaked_key` is only provided in the harness-validity
    /// configuration.
    fn guess(
        &mut self,
        log: &OracleLog,
        challenge: &Ciphertext,
        leaked_key: Option<&SecretKeyMatrix>,
        rng: &mut Generator,
    ) -> bool;
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    pub trials: usize,
    /// Message length of every tuple.
    pub l: usize,
    /// Hand the key matrix to the adversary (sanity check of the harness).
    pub leak_key: bool,
    pub seed: Seed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndCpaOutcome {
    pub adversary: String,
    pub trials: usize,
    pub correct: usize,
    /// `|Pr[correct] - 1/2|`.
    pub advantage: f64,
    /// Binomial standard deviation of the success rate under a fair coin.
    pub sigma: f64,
}

impl IndCpaOutcome {
    pub fn success_rate(&self) -> f64 {
        self.correct as f64 / self.trials as f64
    }

    /// `true` when the advantage is within `k` standard deviations of zero.
    pub fn within_sigmas(&self, k: f64) -> bool {
        self.advantage <= k * self.sigma
    }

    /// Confidence interval of half-width `k * sigma` around the success rate.
    pub fn interval(&self, k: f64) -> (f64, f64) {
        let p = self.success_rate();
        (p - k * self.sigma, p + k * self.sigma)
    }
}

fn run_trial<A: Adversary>(
    params: &SchemeParams,
    cfg: &GameConfig,
    adversary: &mut A,
    rng: &mut Generator,
) -> Result<bool> {
    // Initialize
    let keys = keygen(params, rng);
    let b: bool = rng.gen();

    // Query the encryption oracle
    let queries = adversary.queries(params, cfg.l, rng);
    let mut log = Vec::with_capacity(queries.len());
    for q in queries {
        let c = encrypt(&keys, &q, &params.noise, rng)?;
        log.push((q, c));
    }

    // Challenge
    let (m0, m1) = adversary.challenge(params, cfg.l, &log, rng);
    if m0 == m1 {
        return Err(Error::GameRule("challenge tuples are identical".into()));
    }
    if log.iter().any(|(q, _)| *q == m0 || *q == m1) {
        return Err(Error::GameRule("challenge tuple repeats a queried tuple".into()));
    }
    let challenge = encrypt(&keys, if b { &m1 } else { &m0 }, &params.noise, rng)?;

    // Guess
    let guess = adversary.guess(&log, &challenge, cfg.leak_key.then_some(&keys), rng);
    Ok(guess == b)
}

/// Plays `cfg.trials` independent games. Trial `i` uses worker stream `i`
/// of `cfg.seed` and a fresh adversary from `make`.
pub fn ind_cpa_game<A, F>(params: &SchemeParams, cfg: &GameConfig, make: F) -> Result<IndCpaOutcome>
where
    A: Adversary,
    F: Fn() -> A + Sync,
{
    let name = make().name().to_string();
    let correct = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = cfg.seed.worker_generator(i as u64);
            let mut adv = make();
            run_trial(params, cfg, &mut adv, &mut rng).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let rate = correct as f64 / cfg.trials as f64;
    Ok(IndCpaOutcome {
        adversary: name,
        trials: cfg.trials,
        correct,
        advantage: (rate - 0.5).abs(),
        sigma: 0.5 / (cfg.trials as f64).sqrt(),
    })
}

fn random_message(params: &SchemeParams, l: usize, rng: &mut impl RngCore) -> MessageMatrix {
    MessageMatrix::random(params.field, params.m, l, rng)
}

/// Sum of absolute centered differences between two columns.
fn column_distance(params: &SchemeParams, a: &[crate::field::FieldElement], b: &[crate::field::FieldElement]) -> u64 {
    let f = params.field;
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f.centered(f.sub(x, y)).unsigned_abs())
        .sum()
}

/// Ignores everything and flips a coin.
#[derive(Default)]
pub struct RandomGuesser;

impl Adversary for RandomGuesser {
    fn name(&self) -> &str {
        "random-guesser"
    }

    fn queries(&mut self, _: &SchemeParams, _: usize, _: &mut Generator) -> Vec<MessageMatrix> {
        Vec::new()
    }

    fn challenge(
        &mut self,
        params: &SchemeParams,
        l: usize,
        _: &OracleLog,
        rng: &mut Generator,
    ) -> (MessageMatrix, MessageMatrix) {
        (random_message(params, l, rng), random_message(params, l, rng))
    }

    fn guess(&mut self, _: &OracleLog, _: &Ciphertext, _: Option<&SecretKeyMatrix>, rng: &mut Generator) -> bool {
        rng.gen()
    }
}

/// Queries near-copies of both challenge tuples (identical except for the
/// final entry) and guesses the tuple whose reference encryption has the
/// closer first message column `v_1`.
#[derive(Default)]
pub struct FirstColumnComparator {
    pair: Option<(MessageMatrix, MessageMatrix)>,
    params: Option<SchemeParams>,
}

impl FirstColumnComparator {
    fn perturbed(params: &SchemeParams, msg: &MessageMatrix) -> MessageMatrix {
        let f = params.field;
        let cols: Vec<Vec<_>> = (0..msg.cols())
            .map(|i| {
                let mut c = msg.column(i).to_vec();
                if i + 1 == msg.cols() {
                    let last = c.len() - 1;
                    c[last] = f.add(c[last], f.reduce(1));
                }
                c
            })
            .collect();
        MessageMatrix::from_columns(f, cols).expect("same shape")
    }
}

impl Adversary for FirstColumnComparator {
    fn name(&self) -> &str {
        "first-column-comparator"
    }

    fn queries(&mut self, params: &SchemeParams, l: usize, rng: &mut Generator) -> Vec<MessageMatrix> {
        let m0 = random_message(params, l, rng);
        let m1 = random_message(params, l, rng);
        let refs = vec![Self::perturbed(params, &m0), Self::perturbed(params, &m1)];
        self.pair = Some((m0, m1));
        self.params = Some(params.clone());
        refs
    }

    fn challenge(
        &mut self,
        _: &SchemeParams,
        _: usize,
        _: &OracleLog,
        _: &mut Generator,
    ) -> (MessageMatrix, MessageMatrix) {
        self.pair.clone().expect("queries ran first")
    }

    fn guess(
        &mut self,
        log: &OracleLog,
        challenge: &Ciphertext,
        _: Option<&SecretKeyMatrix>,
        _: &mut Generator,
    ) -> bool {
        let params = self.params.as_ref().expect("queries ran first");
        let d0 = column_distance(params, challenge.column(1), log[0].1.column(1));
        let d1 = column_distance(params, challenge.column(1), log[1].1.column(1));
        d1 < d0
    }
}

/// Uses the leaked key matrix to decrypt the challenge and picks the closer
/// tuple. Only meaningful with `GameConfig::leak_key`.
#[derive(Default)]
pub struct KeyHoldingCheater {
    pair: Option<(MessageMatrix, MessageMatrix)>,
    params: Option<SchemeParams>,
}

impl Adversary for KeyHoldingCheater {
    fn name(&self) -> &str {
        "key-holding-cheater"
    }

    fn queries(&mut self, params: &SchemeParams, _: usize, _: &mut Generator) -> Vec<MessageMatrix> {
        self.params = Some(params.clone());
        Vec::new()
    }

    fn challenge(
        &mut self,
        params: &SchemeParams,
        l: usize,
        _: &OracleLog,
        rng: &mut Generator,
    ) -> (MessageMatrix, MessageMatrix) {
        let pair = (random_message(params, l, rng), random_message(params, l, rng));
        self.pair = Some(pair.clone());
        pair
    }

    fn guess(
        &mut self,
        _: &OracleLog,
        challenge: &Ciphertext,
        leaked_key: Option<&SecretKeyMatrix>,
        rng: &mut Generator,
    ) -> bool {
        let (Some(keys), Some((m0, m1)), Some(params)) = (leaked_key, &self.pair, &self.params) else {
            return rng.gen();
        };
        let Ok(plain) = decrypt_all(keys, challenge) else {
            return rng.gen();
        };
        let dist = |m: &MessageMatrix| -> u64 {
            (0..m.cols())
                .map(|i| column_distance(params, plain.column(i), m.column(i)))
                .sum()
        };
        dist(m1) < dist(m0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mkmr::{setup_with, Overrides};

    fn params() -> SchemeParams {
        setup_with(
            0,
            &Overrides {
                m: Some(16),
                q: Some((1 << 31) - 1),
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn cfg(trials: usize, leak_key: bool) -> GameConfig {
        GameConfig {
            trials,
            l: 8,
            leak_key,
            seed: Seed::from_u64(2024),
        }
    }

    #[test]
    fn random_guesser_has_no_advantage() {
        let out = ind_cpa_game(&params(), &cfg(10_000, false), RandomGuesser::default).unwrap();
        assert!(out.within_sigmas(3.0), "{out:?}");
    }

    #[test]
    fn comparator_has_no_advantage() {
        let out = ind_cpa_game(&params(), &cfg(4000, false), FirstColumnComparator::default).unwrap();
        assert!(out.within_sigmas(3.0), "{out:?}");
    }

    #[test]
    fn cheater_wins() {
        let out = ind_cpa_game(&params(), &cfg(500, true), KeyHoldingCheater::default).unwrap();
        assert_eq!(out.correct, 500);
        assert!((out.advantage - 0.5).abs() < 1e-12);
        // without the key it degrades to coin flipping
        let blind = ind_cpa_game(&params(), &cfg(4000, false), KeyHoldingCheater::default).unwrap();
        assert!(blind.within_sigmas(3.0));
    }

    struct Repeater;

    impl Adversary for Repeater {
        fn name(&self) -> &str {
            "repeater"
        }
        fn queries(&mut self, p: &SchemeParams, l: usize, _: &mut Generator) -> Vec<MessageMatrix> {
            vec![MessageMatrix::zeros(p.field, p.m, l)]
        }
        fn challenge(
            &mut self,
            p: &SchemeParams,
            l: usize,
            _: &OracleLog,
            rng: &mut Generator,
        ) -> (MessageMatrix, MessageMatrix) {
            (MessageMatrix::zeros(p.field, p.m, l), random_message(p, l, rng))
        }
        fn guess(&mut self, _: &OracleLog, _: &Ciphertext, _: Option<&SecretKeyMatrix>, _: &mut Generator) -> bool {
            false
        }
    }

    struct Twins;

    impl Adversary for Twins {
        fn name(&self) -> &str {
            "twins"
        }
        fn queries(&mut self, _: &SchemeParams, _: usize, _: &mut Generator) -> Vec<MessageMatrix> {
            Vec::new()
        }
        fn challenge(
            &mut self,
            p: &SchemeParams,
            l: usize,
            _: &OracleLog,
            _: &mut Generator,
        ) -> (MessageMatrix, MessageMatrix) {
            (
                MessageMatrix::zeros(p.field, p.m, l),
                MessageMatrix::zeros(p.field, p.m, l),
            )
        }
        fn guess(&mut self, _: &OracleLog, _: &Ciphertext, _: Option<&SecretKeyMatrix>, _: &mut Generator) -> bool {
            false
        }
    }

    #[test]
    fn game_rules_enforced() {
        assert!(matches!(
            ind_cpa_game(&params(), &cfg(3, false), || Repeater),
            Err(Error::GameRule(_))
        ));
        assert!(matches!(
            ind_cpa_game(&params(), &cfg(3, false), || Twins),
            Err(Error::GameRule(_))
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let a = ind_cpa_game(&params(), &cfg(200, false), FirstColumnComparator::default).unwrap();
        let b = ind_cpa_game(&params(), &cfg(200, false), FirstColumnComparator::default).unwrap();
        assert_eq!(a, b);
    }
}
