//! Named experiment suites, shared by the `stats` command and the
//! acceptance tests. Dimensions are fixed at desk scale.

use rand::RngCore;

use crate::codec::{encode_image, synthetic_image, window_width};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldParams};
use crate::mkmr::{decrypt_recipient, encrypt, keygen, setup_with, MessageMatrix, Overrides, SchemeParams};
use crate::prm::SecretKeyMatrix;
use crate::sampler::{sample_uniform_vector, GaussianSpec, Seed};

use super::{
    chi_square_uniform, collusion_residuals, gen_lwe_samples, gen_uniform_decoys, ind_cpa_game, solve_noiseless,
    FirstColumnComparator, GameConfig, KeyHoldingCheater, LeakedKnowledge, RandomGuesser, TestRecord, DEFAULT_ALPHA,
    DEFAULT_BUCKETS,
};

pub const SUITES: &[&str] = &["sampler", "lwe", "ciphertext", "wrong-key", "ind-cpa", "collusion"];

/// Scheme parameters with the default field and noise at dimension `m`.
pub fn desk_params(m: usize) -> SchemeParams {
    setup_with(
        0,
        &Overrides {
            m: Some(m),
            q: Some(crate::field::MERSENNE_31),
            ..Default::default()
        },
    )
    .expect("default field and noise are valid")
}

/// `m` rows, each the window stream of a distinct `side x side` synthetic
/// image (so `l = side * side`).
pub fn image_plaintext(field: &FieldParams, m: usize, side: usize, seed: u64) -> Result<MessageMatrix> {
    let t = window_width(field)?;
    let rows: Vec<Vec<FieldElement>> = (0..m)
        .map(|j| {
            let img = synthetic_image(j, side, side, seed.wrapping_add(j as u64))?;
            Ok(encode_image(&img, t, field)?.into_elements())
        })
        .collect::<Result<_>>()?;
    MessageMatrix::from_rows(*field, &rows)
}

fn uniform_record(name: &str, xs: &[FieldElement], field: &FieldParams, expect_uniform: bool) -> Result<TestRecord> {
    let r = chi_square_uniform(xs, field, DEFAULT_BUCKETS, DEFAULT_ALPHA)?;
    Ok(TestRecord::from_uniformity(name, &r, expect_uniform))
}

fn sampler_suite(seed: Seed) -> Result<Vec<TestRecord>> {
    let field = FieldParams::mersenne31();
    let noise = GaussianSpec::default_for(&field)?;
    let mut rng = seed.worker_generator(100);
    let n = 1_000_000;
    let draws: Vec<i64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    let mean = draws.iter().sum::<i64>() as f64 / n as f64;
    let var = draws.iter().map(|&e| (e * e) as f64).sum::<f64>() / n as f64 - mean * mean;
    let s2 = noise.sigma() * noise.sigma();
    let in_support = draws.iter().all(|e| e.abs() <= noise.bound());
    let mut out = vec![
        TestRecord {
            name: "gaussian-mean".into(),
            n,
            statistic: mean,
            dof: None,
            alpha: None,
            pass: mean.abs() <= 0.02,
            detail: "bound |mean| <= 0.02".into(),
        },
        TestRecord {
            name: "gaussian-variance".into(),
            n,
            statistic: var,
            dof: None,
            alpha: None,
            pass: var >= 0.95 * s2 && var <= 1.05 * s2 && in_support,
            detail: format!(
                "bound [{:.3}, {:.3}], support within +-{}",
                0.95 * s2,
                1.05 * s2,
                noise.bound()
            ),
        },
    ];
    let uniform = sample_uniform_vector(&field, n, &mut rng);
    out.push(uniform_record("uniform-sampler", &uniform, &field, true)?);
    Ok(out)
}

fn lwe_suite(seed: Seed) -> Result<Vec<TestRecord>> {
    let field = FieldParams::mersenne31();
    let noise = GaussianSpec::default_for(&field)?;
    let mut rng = seed.worker_generator(200);
    let dim = 32;
    let secret = sample_uniform_vector(&field, dim, &mut rng);

    let exact = gen_lwe_samples(&field, &secret, dim + 8, &GaussianSpec::degenerate(), &mut rng);
    let recovered = solve_noiseless(&exact);
    let noisy = gen_lwe_samples(&field, &secret, dim, &noise, &mut rng);
    let attacked = solve_noiseless(&noisy);

    let lwe_b = gen_lwe_samples(&field, &secret, 200_000, &noise, &mut rng).b_values();
    let decoy_b = gen_uniform_decoys(&field, 200_000, dim, &mut rng).b_values();
    Ok(vec![
        TestRecord {
            name: "lwe-noiseless-solvable".into(),
            n: exact.len(),
            statistic: 0.0,
            dof: None,
            alpha: None,
            pass: recovered.as_deref() == Some(&secret[..]),
            detail: "gaussian elimination recovers s".into(),
        },
        TestRecord {
            name: "lwe-noisy-elimination-fails".into(),
            n: noisy.len(),
            statistic: 0.0,
            dof: None,
            alpha: None,
            pass: attacked.as_deref() != Some(&secret[..]),
            detail: format!("dimension {dim}"),
        },
        uniform_record("lwe-samples-b-uniform", &lwe_b, &field, true)?,
        uniform_record("decoy-samples-b-uniform", &decoy_b, &field, true)?,
    ])
}

/// Image plaintext in every row, `m = 64`, `l = 4096`.
fn image_ciphertext(
    seed: Seed,
    stream: u64,
) -> Result<(SchemeParams, SecretKeyMatrix, MessageMatrix, crate::mkmr::Ciphertext)> {
    let params = desk_params(64);
    let mut rng = seed.worker_generator(stream);
    let keys = keygen(&params, &mut rng);
    let msg = image_plaintext(&params.field, 64, 64, rng.next_u64())?;
    let c = encrypt(&keys, &msg, &params.noise, &mut rng)?;
    Ok((params, keys, msg, c))
}

fn ciphertext_suite(seed: Seed) -> Result<Vec<TestRecord>> {
    let (params, _, msg, c) = image_ciphertext(seed, 300)?;
    let plain: Vec<FieldElement> = (0..msg.cols()).flat_map(|i| msg.column(i).to_vec()).collect();
    Ok(vec![
        uniform_record("ciphertext-entries-uniform", c.entries(), &params.field, true)?,
        uniform_record("image-plaintext-nonuniform", &plain, &params.field, false)?,
    ])
}

fn wrong_key_suite(seed: Seed) -> Result<Vec<TestRecord>> {
    let (params, keys, _, c) = image_ciphertext(seed, 400)?;
    let m = params.m;
    let mut wrong = Vec::new();
    for j in 1..=m {
        // row j read through recipient k's key
        let k = j % m + 1;
        let key = crate::mkmr::RecipientKey::new(params.field, j, keys.row(k - 1).to_vec())?;
        wrong.extend(decrypt_recipient(&key, &c)?);
    }
    let right = decrypt_recipient(&keys.recipient_key(1)?, &c)?;
    Ok(vec![
        uniform_record("wrong-key-streams-uniform", &wrong, &params.field, true)?,
        uniform_record("right-key-stream-nonuniform", &right, &params.field, false)?,
    ])
}

/// IND-CPA suite with `trials` games per adversary.
pub fn ind_cpa_records(seed: Seed, trials: usize) -> Result<Vec<TestRecord>> {
    let params = desk_params(16);
    let cfg = |leak_key: bool, stream: u8| GameConfig {
        trials,
        l: 8,
        leak_key,
        seed: {
            let mut s = seed;
            s.0[31] ^= stream;
            s
        },
    };
    let random = ind_cpa_game(&params, &cfg(false, 1), RandomGuesser::default)?;
    let naive = ind_cpa_game(&params, &cfg(false, 2), FirstColumnComparator::default)?;
    let cheat = ind_cpa_game(&params, &cfg(true, 3), KeyHoldingCheater::default)?;
    let rec = |o: &super::IndCpaOutcome, pass: bool, rule: &str| TestRecord {
        name: format!("ind-cpa-{}", o.adversary),
        n: o.trials,
        statistic: o.advantage,
        dof: None,
        alpha: None,
        pass,
        detail: format!("correct={} sigma={:.5} {rule}", o.correct, o.sigma),
    };
    Ok(vec![
        rec(&random, random.within_sigmas(3.0), "advantage <= 3 sigma"),
        rec(&naive, naive.within_sigmas(3.0), "advantage <= 3 sigma"),
        rec(&cheat, cheat.advantage >= 0.45, "advantage >= 0.45"),
    ])
}

fn collusion_suite(seed: Seed) -> Result<Vec<TestRecord>> {
    let (params, keys, _, c) = image_ciphertext(seed, 500)?;
    let k = params.m / 2;
    let mut knowledge = LeakedKnowledge::from_keys(&keys, k)?;
    let targets: Vec<usize> = knowledge.unleaked_rows().collect();
    let leaked = collusion_residuals(&c, &knowledge, &targets, DEFAULT_BUCKETS, DEFAULT_ALPHA)?;
    knowledge.reveal_row(&keys, 1)?;
    let full = collusion_residuals(&c, &knowledge, &[1], DEFAULT_BUCKETS, DEFAULT_ALPHA)?;
    Ok(vec![
        TestRecord::from_uniformity(format!("collusion-k{k}-residuals-uniform"), &leaked, true),
        TestRecord::from_uniformity("collusion-full-key-residual-nonuniform", &full, false),
    ])
}

/// Runs one named suite, or every suite for `"all"`.
pub fn run(name: &str, seed: Seed) -> Result<Vec<TestRecord>> {
    match name {
        "sampler" => sampler_suite(seed),
        "lwe" => lwe_suite(seed),
        "ciphertext" => ciphertext_suite(seed),
        "wrong-key" => wrong_key_suite(seed),
        "ind-cpa" => ind_cpa_records(seed, 10_000),
        "collusion" => collusion_suite(seed),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run(s, seed)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidParams(format!(
            "unknown suite {other:?}; expected one of {} or all",
            SUITES.join(", ")
        ))),
    }
}

/// Uniformity test of an arbitrary stream, e.g. a decrypted row.
pub fn stream_records(name: &str, field: &FieldParams, xs: &[FieldElement]) -> Result<Vec<TestRecord>> {
    Ok(vec![uniform_record(name, xs, field, true)?])
}
