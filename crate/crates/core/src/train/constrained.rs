//! Constrained molecular optimization: improve a property while staying
//! within a Tanimoto similarity radius of the input.

use super::TrainError;
use crate::descriptors::{morgan_default, tanimoto, PropertyFunction};
use crate::graph::{validate, MolecularGraph};
use crate::lang::{decode_selfies, encode_selfies, Alphabet, TokenSeq};
use crate::model::{sample, Parameters, SamplerConfig};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct OptimizedMolecule {
    pub tokens: TokenSeq,
    pub graph: MolecularGraph,
    pub score: f64,
    pub similarity: f64,
}

/// Result of one constrained-optimization run. `best` is `None` when no
/// sampled candidate met the constraint: a molecule violating it is never
/// returned.
#[derive(Debug, Clone)]
pub struct OptimizeOutcome {
    pub input_score: f64,
    pub best: Option<OptimizedMolecule>,
    /// PS(out) − PS(in) when a qualifying molecule was found.
    pub improvement: Option<f64>,
    pub candidates_evaluated: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizeConfig {
    /// Similarity constraint δ in [0, 1].
    pub delta: f64,
    /// Sampling budget.
    pub budget: usize,
    pub sampler: SamplerConfig,
    /// Seed the candidate pool with the input molecule itself, making the
    /// improvement non-negative whenever the input is valid.
    pub include_input: bool,
}

pub fn constrained_optimize<R: Rng>(
    params: &Parameters<f32>,
    alphabet: &Alphabet,
    molecule: &MolecularGraph,
    property: &PropertyFunction,
    cfg: OptimizeConfig,
    rng: &mut R,
) -> Result<OptimizeOutcome, TrainError> {
    if !(0.0..=1.0).contains(&cfg.delta) {
        return Err(TrainError::Config(format!(
            "delta {} outside [0, 1]",
            cfg.delta
        )));
    }
    if !validate(molecule).valid || !molecule.is_connected() {
        return Err(TrainError::InvalidInput(
            "input molecule fails validity".into(),
        ));
    }
    let source = encode_selfies(molecule).map_err(|e| TrainError::InvalidInput(e.to_string()))?;
    let input_fp = morgan_default(molecule);
    let input_score = property.score(molecule);

    let mut best: Option<OptimizedMolecule> = None;
    if cfg.include_input {
        best = Some(OptimizedMolecule {
            tokens: source.clone(),
            graph: molecule.clone(),
            score: input_score,
            similarity: 1.0,
        });
    }
    let mut evaluated = 0usize;
    for _ in 0..cfg.budget {
        let tokens = sample(params, alphabet, &source, cfg.sampler, rng)
            .map_err(TrainError::Model)?;
        if tokens.is_empty() {
            continue;
        }
        let graph = decode_selfies(&tokens);
        evaluated += 1;
        let similarity = tanimoto(&input_fp, &morgan_default(&graph))
            .expect("fingerprints share nbits");
        if similarity < cfg.delta {
            continue;
        }
        let score = property.score(&graph);
        if !score.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|b| score > b.score) {
            best = Some(OptimizedMolecule {
                tokens,
                graph,
                score,
                similarity,
            });
        }
    }
    let improvement = best.as_ref().map(|b| b.score - input_score);
    Ok(OptimizeOutcome {
        input_score,
        best,
        improvement,
        candidates_evaluated: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Alphabet, Parameters<f32>, MolecularGraph) {
        let corpus: Vec<TokenSeq> = ["[C][C][O][N][C][C][C][Branch1][1][C][O]"]
            .iter()
            .map(|t| crate::lang::tokenize_selfies(t).unwrap())
            .collect();
        let alphabet = Alphabet::build(corpus.iter()).unwrap();
        let params = Parameters::init(
            ModelConfig::toy(alphabet.len()),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        let input = crate::lang::parse_smiles("CCO").unwrap();
        (alphabet, params, input)
    }

    #[test]
    fn constraint_is_never_violated() {
        let (alphabet, params, input) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for delta in [0.0, 0.4, 0.6, 1.0] {
            let out = constrained_optimize(
                &params,
                &alphabet,
                &input,
                &PropertyFunction::qed(),
                OptimizeConfig {
                    delta,
                    budget: 20,
                    sampler: SamplerConfig {
                        max_tokens: 10,
                        ..Default::default()
                    },
                    include_input: false,
                },
                &mut rng,
            )
            .unwrap();
            if let Some(best) = out.best {
                assert!(best.similarity >= delta);
            }
        }
    }

    #[test]
    fn include_input_guarantees_nonnegative_improvement() {
        let (alphabet, params, input) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = constrained_optimize(
            &params,
            &alphabet,
            &input,
            &PropertyFunction::qed(),
            OptimizeConfig {
                delta: 1.0,
                budget: 10,
                sampler: SamplerConfig {
                    max_tokens: 10,
                    ..Default::default()
                },
                include_input: true,
            },
            &mut rng,
        )
        .unwrap();
        assert!(out.improvement.unwrap() >= 0.0);
        assert!(out.best.unwrap().similarity >= 1.0 - 1e-12);
    }

    #[test]
    fn invalid_input_rejected() {
        let (alphabet, params, _) = setup();
        let bad = MolecularGraph::new(
            vec![
                crate::graph::Atom::new(crate::graph::Element::C, 4),
                crate::graph::Atom::new(crate::graph::Element::C, 4),
            ],
            vec![],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            constrained_optimize(
                &params,
                &alphabet,
                &bad,
                &PropertyFunction::qed(),
                OptimizeConfig {
                    delta: 0.4,
                    budget: 2,
                    sampler: SamplerConfig::default(),
                    include_input: false,
                },
                &mut rng,
            ),
            Err(TrainError::InvalidInput(_))
        ));
    }

    #[test]
    fn delta_out_of_range_rejected() {
        let (alphabet, params, input) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            constrained_optimize(
                &params,
                &alphabet,
                &input,
                &PropertyFunction::qed(),
                OptimizeConfig {
                    delta: 1.5,
                    budget: 2,
                    sampler: SamplerConfig::default(),
                    include_input: false,
                },
                &mut rng,
            ),
            Err(TrainError::Config(_))
        ));
    }
}
