//! Random point mutations over molecular strings and the resulting
//! validity-rate measurement for each language.

use super::{decode_selfies, parse_smiles, Alphabet, LangError, Token, TokenSeq};
use crate::graph::validate;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Language {
    Selfies,
    Smiles,
}

/// The 28-character replacement set for SMILES mutations: element letters
/// used by the supported set (including the `l`/`r` of Cl/Br), ring digits,
/// structure symbols, and lowercase aromatics.
pub const SMILES_MUTATION_CHARS: [char; 28] = [
    'B', 'C', 'N', 'O', 'S', 'P', 'F', 'I', 'l', 'r', '1', '2', '3', '4', '5', '6', '7', '8', '9',
    '(', ')', '=', '#', '-', 'c', 'n', 'o', 's',
];

/// Replace exactly `count` token positions (chosen uniformly without
/// replacement) with uniformly random *different* non-special tokens from the
/// alphabet.
pub fn mutate_tokens<R: Rng>(
    seq: &TokenSeq,
    count: usize,
    alphabet: &Alphabet,
    rng: &mut R,
) -> Result<TokenSeq, LangError> {
    if count > seq.len() {
        return Err(LangError::MutationCount {
            count,
            len: seq.len(),
        });
    }
    let pool: Vec<Token> = alphabet.non_special();
    let mut positions: Vec<usize> = (0..seq.len()).collect();
    positions.shuffle(rng);
    positions.truncate(count);
    let mut tokens = seq.tokens().to_vec();
    for p in positions {
        let current = tokens[p];
        loop {
            let candidate = pool[rng.gen_range(0..pool.len())];
            if candidate != current || pool.len() == 1 {
                tokens[p] = candidate;
                break;
            }
        }
    }
    Ok(TokenSeq(tokens))
}

/// Replace exactly `count` character positions of a SMILES string with
/// uniformly random different characters from [`SMILES_MUTATION_CHARS`].
pub fn mutate_smiles<R: Rng>(
    text: &str,
    count: usize,
    rng: &mut R,
) -> Result<String, LangError> {
    let mut chars: Vec<char> = text.chars().collect();
    if count > chars.len() {
        return Err(LangError::MutationCount {
            count,
            len: chars.len(),
        });
    }
    let mut positions: Vec<usize> = (0..chars.len()).collect();
    positions.shuffle(rng);
    positions.truncate(count);
    for p in positions {
        let current = chars[p];
        loop {
            let candidate = SMILES_MUTATION_CHARS[rng.gen_range(0..SMILES_MUTATION_CHARS.len())];
            if candidate != current {
                chars[p] = candidate;
                break;
            }
        }
    }
    Ok(chars.into_iter().collect())
}

/// Fraction of mutated strings that still describe valid connected molecules.
///
/// For SELFIES every mutation decodes by construction, so the measured rate
/// is exactly one; for SMILES the rate reflects the notation's syntactic
/// fragility.
pub fn mutation_validity_rate<R: Rng>(
    corpus: &[String],
    language: Language,
    trials_per_molecule: usize,
    count: usize,
    rng: &mut R,
) -> f64 {
    let mut total = 0usize;
    let mut ok = 0usize;
    match language {
        Language::Selfies => {
            let seqs: Vec<TokenSeq> = corpus
                .iter()
                .filter_map(|line| super::tokenize_selfies(line).ok())
                .filter(|s| !s.is_empty())
                .collect();
            let alphabet = Alphabet::full();
            for seq in &seqs {
                for _ in 0..trials_per_molecule {
                    let c = count.min(seq.len());
                    let mutated =
                        mutate_tokens(seq, c, &alphabet, rng).expect("count clamped to length");
                    let g = decode_selfies(&mutated);
                    total += 1;
                    if validate(&g).valid && g.is_connected() {
                        ok += 1;
                    }
                }
            }
        }
        Language::Smiles => {
            for line in corpus {
                if line.is_empty() {
                    continue;
                }
                for _ in 0..trials_per_molecule {
                    let c = count.min(line.chars().count());
                    let mutated = mutate_smiles(line, c, rng).expect("count clamped to length");
                    total += 1;
                    if let Ok(g) = parse_smiles(&mutated) {
                        if validate(&g).valid && g.is_connected() {
                            ok += 1;
                        }
                    }
                }
            }
        }
    }
    if total == 0 {
        return 0.0;
    }
    ok as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::tokenize_selfies;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_count_is_identity() {
        let seq = tokenize_selfies("[C][C][O]").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = mutate_tokens(&seq, 0, &Alphabet::full(), &mut rng).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn exact_positions_differ() {
        let seq = tokenize_selfies("[C][C][C][C][C][C][C][C][C][C]").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = mutate_tokens(&seq, 2, &Alphabet::full(), &mut rng).unwrap();
        let diff = seq
            .tokens()
            .iter()
            .zip(out.tokens())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(diff, 2);
    }

    #[test]
    fn seeded_mutation_is_reproducible() {
        let seq = tokenize_selfies("[C][=C][O][N][C]").unwrap();
        let a = mutate_tokens(&seq, 3, &Alphabet::full(), &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let b = mutate_tokens(&seq, 3, &Alphabet::full(), &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn count_over_length_errors() {
        let seq = tokenize_selfies("[C]").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(mutate_tokens(&seq, 2, &Alphabet::full(), &mut rng).is_err());
        assert!(mutate_smiles("C", 2, &mut rng).is_err());
    }

    #[test]
    fn selfies_mutations_always_valid() {
        let corpus: Vec<String> = vec![
            "[C][C][O]".into(),
            "[C][=C][C][=C][C][=C][Ring1][5]".into(),
            "[N][C][C][Branch1][1][O][C]".into(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rate = mutation_validity_rate(&corpus, Language::Selfies, 50, 2, &mut rng);
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn smiles_zero_count_rate_is_one() {
        let corpus: Vec<String> = vec!["CCO".into(), "c1ccccc1".into()];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rate = mutation_validity_rate(&corpus, Language::Smiles, 5, 0, &mut rng);
        assert_eq!(rate, 1.0);
    }

    #[test]
    fn smiles_mutations_are_fragile() {
        let corpus: Vec<String> = vec![
            "CC(C)Cc1ccc(C(C)C(=O)O)cc1".into(),
            "c1ccc2ccccc2c1".into(),
            "CC(=O)Oc1ccccc1C(=O)O".into(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rate = mutation_validity_rate(&corpus, Language::Smiles, 100, 1, &mut rng);
        assert!(rate < 0.5, "smiles should break often, got {rate}");
    }
}
