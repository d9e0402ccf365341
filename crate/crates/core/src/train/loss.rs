//! Training objectives: smoothed cross-entropy, the pairwise rank loss over
//! property-ordered candidates, and their combination.

use super::candidates::CandidateSet;
use crate::nn::{Real, Tape, Tensor, Var};

/// A per-position target distribution with mass `1−β` on the true token and
/// `β/(N−1)` on every other token.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedTarget {
    pub dist: Vec<f64>,
}

impl SmoothedTarget {
    pub fn new(vocab: usize, true_token: usize, beta: f64) -> SmoothedTarget {
        assert!(vocab >= 2 && true_token < vocab);
        let off = beta / (vocab - 1) as f64;
        let mut dist = vec![off; vocab];
        dist[true_token] = 1.0 - beta;
        SmoothedTarget { dist }
    }

    pub fn sum(&self) -> f64 {
        self.dist.iter().sum()
    }
}

/// Mean cross-entropy between smoothed targets and row softmaxes, as a plain
/// value (the tape op `ce_smoothed` is the differentiable twin).
pub fn ce_loss_value<T: Real>(logits: &Tensor<T>, targets: &[usize], beta: f64) -> f64 {
    let mut tape: Tape<T> = Tape::new();
    let l = tape.input(logits.clone());
    let v = tape.ce_smoothed(l, targets.to_vec(), T::from_f64(beta));
    tape.value(v).item().to_f64()
}

/// Rank loss over a property-ordered candidate set:
/// sum over pairs i<j with PS(i) > PS(j) of max(0, f_j − f_i + (j−i)·γ).
/// Ties in PS contribute nothing. Zero when every ordered pair already has
/// its margin satisfied.
pub fn rank_loss(cands: &CandidateSet, gamma: f64) -> f64 {
    let scores: Vec<f64> = cands.candidates.iter().map(|c| c.score).collect();
    let f: Vec<f64> = cands.candidates.iter().map(|c| c.log_prob).collect();
    rank_loss_from(&scores, &f, gamma)
}

/// Rank loss from parallel score/log-prob arrays already sorted by score
/// descending.
pub fn rank_loss_from(scores_desc: &[f64], f: &[f64], gamma: f64) -> f64 {
    let n = scores_desc.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if scores_desc[i] <= scores_desc[j] {
                continue; // ties (and misordered equals) are skipped
            }
            let margin = (j - i) as f64 * gamma;
            total += (f[j] - f[i] + margin).max(0.0);
        }
    }
    total
}

/// Differentiable rank loss over per-candidate log-prob vars.
pub fn rank_loss_var<T: Real>(
    tape: &mut Tape<T>,
    f_vars: &[Var],
    scores_desc: &[f64],
    gamma: f64,
) -> Var {
    let mut total = tape.input(Tensor::scalar(T::ZERO));
    let n = f_vars.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if scores_desc[i] <= scores_desc[j] {
                continue;
            }
            let margin = T::from_f64((j - i) as f64 * gamma);
            let diff = tape.sub(f_vars[j], f_vars[i]);
            let shifted = tape.add_scalar(diff, margin);
            let hinge = tape.relu(shifted);
            total = tape.add(total, hinge);
        }
    }
    total
}

/// L = L_ce + α·L_rank.
pub fn combined_loss(ce: f64, rank: f64, alpha: f64) -> f64 {
    ce + alpha * rank
}

pub fn combined_loss_var<T: Real>(tape: &mut Tape<T>, ce: Var, rank: Var, alpha: f64) -> Var {
    let scaled = tape.scale(rank, T::from_f64(alpha));
    tape.add(ce, scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::candidates::Candidate;

    fn set_with(f: &[f64]) -> CandidateSet {
        // candidates already in PS-descending order with distinct scores
        CandidateSet {
            source: crate::lang::TokenSeq::default(),
            candidates: f
                .iter()
                .enumerate()
                .map(|(i, &lp)| Candidate {
                    tokens: crate::lang::TokenSeq::default(),
                    key: format!("k{i}"),
                    score: 10.0 - i as f64,
                    log_prob: lp,
                })
                .collect(),
            degenerate: false,
        }
    }

    #[test]
    fn rank_loss_spec_values() {
        // well-ordered pair: margin satisfied
        assert_eq!(rank_loss(&set_with(&[-1.0, -2.0]), 0.1), 0.0);
        // inverted pair
        let v = rank_loss(&set_with(&[-2.0, -1.0]), 0.1);
        assert!((v - 1.1).abs() < 1e-12);
        // three equal log-probs: margins (1,2,1)*gamma
        let v = rank_loss(&set_with(&[-1.0, -1.0, -1.0]), 0.1);
        assert!((v - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ties_in_score_contribute_nothing() {
        let mut set = set_with(&[-5.0, -1.0]);
        set.candidates[1].score = set.candidates[0].score;
        assert_eq!(rank_loss(&set, 0.5), 0.0);
    }

    #[test]
    fn shift_invariance_when_order_unchanged() {
        let base = rank_loss(&set_with(&[-1.0, -2.5, -0.5]), 0.2);
        let shifted = rank_loss(&set_with(&[-11.0, -12.5, -10.5]), 0.2);
        assert!((base - shifted).abs() < 1e-12);
    }

    #[test]
    fn rank_loss_nonnegative_random() {
        let mut state = 99u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for _ in 0..200 {
            let f: Vec<f64> = (0..5).map(|_| next() * 10.0).collect();
            assert!(rank_loss(&set_with(&f), 0.01) >= 0.0);
        }
    }

    #[test]
    fn var_route_matches_value_route() {
        let f = [-1.3, -0.2, -4.0, -2.2];
        let scores: Vec<f64> = (0..4).map(|i| 5.0 - i as f64).collect();
        let value = rank_loss_from(&scores, &f, 0.05);
        let mut tape: Tape<f64> = Tape::new();
        let f_vars: Vec<Var> = f.iter().map(|&x| tape.input(Tensor::scalar(x))).collect();
        let v = rank_loss_var(&mut tape, &f_vars, &scores, 0.05);
        assert!((tape.value(v).item() - value).abs() < 1e-12);
    }

    #[test]
    fn smoothed_target_sums_to_one() {
        for beta in [0.0, 0.1, 0.5] {
            let t = SmoothedTarget::new(185, 7, beta);
            assert!((t.sum() - 1.0).abs() < 1e-12);
            if beta == 0.0 {
                assert_eq!(t.dist[7], 1.0);
            }
        }
        // the paper-scale arithmetic: N=185, beta=0.1
        let t = SmoothedTarget::new(185, 0, 0.1);
        assert!((t.dist[0] - 0.9).abs() < 1e-12);
        assert!((t.dist[1] - 0.1 / 184.0).abs() < 1e-15);
    }

    #[test]
    fn combined_loss_linear_in_alpha() {
        assert_eq!(combined_loss(1.2, 0.4, 0.0), 1.2);
        assert!((combined_loss(1.2, 0.4, 3.0) - 2.4).abs() < 1e-12);
        assert_eq!(combined_loss(0.7, 0.0, 5.0), 0.7);
        let at = |a: f64| combined_loss(0.3, 0.9, a);
        let slope1 = at(2.0) - at(1.0);
        let slope2 = at(7.0) - at(6.0);
        assert!((slope1 - slope2).abs() < 1e-12);
    }

    #[test]
    fn ce_uniform_logits_is_log_n() {
        let logits: Tensor<f64> = Tensor::zeros(4, 9);
        for beta in [0.0, 0.1] {
            let v = ce_loss_value(&logits, &[1, 2, 3, 4], beta);
            assert!((v - (9.0f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn ce_confident_correct_logits_near_zero() {
        let mut logits: Tensor<f64> = Tensor::zeros(2, 5);
        logits.set(0, 2, 50.0);
        logits.set(1, 4, 50.0);
        let v = ce_loss_value(&logits, &[2, 4], 0.0);
        assert!(v < 1e-9, "{v}");
    }
}
