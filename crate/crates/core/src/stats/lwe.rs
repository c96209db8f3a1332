use rand::RngCore;

use crate::field::{FieldElement, FieldParams};
use crate::sampler::{sample_uniform_element, sample_uniform_vector, GaussianSpec};

/// A batch of `(a, b)` pairs, either LWE samples under a secret or uniform
/// decoys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LweSampleSet {
    pub field: FieldParams,
    pub pairs: Vec<(Vec<FieldElement>, FieldElement)>,
    /// The secret, kept for fixtures; `None` for decoys.
    pub secret: Option<Vec<FieldElement>>,
}

impl LweSampleSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pairs.first().map_or(0, |(a, _)| a.len())
    }

    pub fn b_values(&self) -> Vec<FieldElement> {
        self.pairs.iter().map(|(_, b)| *b).collect()
    }
}

/// `n` samples `b_i = <s, a_i> + e_i` with uniform `a_i` and `e_i` from the
/// error distribution. Per sample, `a_i` is drawn before `e_i`.
pub fn gen_lwe_samples<R: RngCore + ?Sized>(
    field: &FieldParams,
    secret: &[FieldElement],
    n: usize,
    noise: &GaussianSpec,
    rng: &mut R,
) -> LweSampleSet {
    let pairs = (0..n)
        .map(|_| {
            let a = sample_uniform_vector(field, secret.len(), rng);
            let e = noise.sample(rng);
            let b = field.add(field.dot(&a, secret), field.lift_small(e));
            (a, b)
        })
        .collect();
    LweSampleSet {
        field: *field,
        pairs,
        secret: Some(secret.to_vec()),
    }
}

/// `n` uniform pairs in `F_q^dim x F_q`.
pub fn gen_uniform_decoys<R: RngCore + ?Sized>(field: &FieldParams, n: usize, dim: usize, rng: &mut R) -> LweSampleSet {
    let pairs = (0..n)
        .map(|_| {
            (
                sample_uniform_vector(field, dim, rng),
                sample_uniform_element(field, rng),
            )
        })
        .collect();
    LweSampleSet {
        field: *field,
        pairs,
        secret: None,
    }
}

/// Treats the samples as exact linear equations `<a_i, s> = b_i` and solves
/// by Gaussian elimination. Exact when the noise is zero; with real noise
/// the errors are amplified and the answer is garbage. `None` if the `a_i`
/// do not have full rank.
pub fn solve_noiseless(set: &LweSampleSet) -> Option<Vec<FieldElement>> {
    let f = set.field;
    let dim = set.dim();
    let mut rows: Vec<Vec<FieldElement>> = set
        .pairs
        .iter()
        .map(|(a, b)| {
            let mut r = a.clone();
            r.push(*b);
            r
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..dim {
        let p = (pivot_row..rows.len()).find(|&r| rows[r][col] != FieldElement::ZERO)?;
        rows.swap(pivot_row, p);
        let inv = f.inv(rows[pivot_row][col])?;
        for x in rows[pivot_row].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == pivot_row || row[col] == FieldElement::ZERO {
                continue;
            }
            let factor = row[col];
            for (x, &p) in row.iter_mut().zip(&pivot) {
                *x = f.sub(*x, f.mul(factor, p));
            }
        }
        pivot_row += 1;
    }
    Some((0..dim).map(|i| rows[i][dim]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Seed;
    use crate::stats::chi_square_uniform;

    fn f31() -> FieldParams {
        FieldParams::mersenne31()
    }

    #[test]
    fn zero_secret_degenerate_noise() {
        let f = f31();
        let s = vec![FieldElement::ZERO; 4];
        let set = gen_lwe_samples(
            &f,
            &s,
            20,
            &GaussianSpec::degenerate(),
            &mut Seed::from_u64(1).generator(),
        );
        assert!(set.pairs.iter().all(|(_, b)| *b == FieldElement::ZERO));
    }

    #[test]
    fn samples_match_schoolbook_oracle() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        let s = sample_uniform_vector(&f, 4, &mut Seed::from_u64(2).generator());
        let set = gen_lwe_samples(&f, &s, 8, &noise, &mut Seed::from_u64(3).generator());
        assert_eq!(set.len(), 8);
        let mut replay = Seed::from_u64(3).generator();
        let q = f.modulus() as u128;
        for (a, b) in &set.pairs {
            let a2 = sample_uniform_vector(&f, 4, &mut replay);
            let e = noise.sample(&mut replay);
            assert_eq!(&a2, a);
            let mut acc = 0u128;
            for (x, y) in a.iter().zip(&s) {
                acc = (acc + x.value() as u128 * y.value() as u128) % q;
            }
            let expected = ((acc as i128 + e as i128).rem_euclid(q as i128)) as u64;
            assert_eq!(b.value(), expected);
        }
    }

    #[test]
    fn noiseless_system_is_solvable() {
        let f = f31();
        for m in [4, 16, 32] {
            let s = sample_uniform_vector(&f, m, &mut Seed::from_u64(m as u64).generator());
            let set = gen_lwe_samples(
                &f,
                &s,
                m + 4,
                &GaussianSpec::degenerate(),
                &mut Seed::from_u64(9).generator(),
            );
            assert_eq!(solve_noiseless(&set), Some(s));
        }
    }

    #[test]
    fn noisy_system_defeats_elimination() {
        let f = f31();
        let noise = GaussianSpec::default_for(&f).unwrap();
        for m in [32, 64] {
            let s = sample_uniform_vector(&f, m, &mut Seed::from_u64(m as u64).generator());
            let set = gen_lwe_samples(&f, &s, m, &noise, &mut Seed::from_u64(10).generator());
            let got = solve_noiseless(&set).expect("full rank");
            assert_ne!(got, s);
        }
    }

    #[test]
    fn decoys() {
        let f = f31();
        let a = gen_uniform_decoys(&f, 5, 3, &mut Seed::from_u64(1).generator());
        let b = gen_uniform_decoys(&f, 5, 3, &mut Seed::from_u64(2).generator());
        assert_eq!((a.len(), a.dim()), (5, 3));
        assert!(a.secret.is_none());
        assert_ne!(a, b);
        let big = gen_uniform_decoys(&f, 1_000_000, 1, &mut Seed::from_u64(3).generator());
        assert!(chi_square_uniform(&big.b_values(), &f, 256, 0.01).unwrap().pass);
    }

    #[test]
    fn rank_deficient_returns_none() {
        let f = f31();
        let set = LweSampleSet {
            field: f,
            pairs: vec![
                (vec![f.reduce(1), f.reduce(2)], f.reduce(3)),
                (vec![f.reduce(2), f.reduce(4)], f.reduce(6)),
            ],
            secret: None,
        };
        assert_eq!(solve_noiseless(&set), None);
    }
}
