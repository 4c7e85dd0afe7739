//! Deterministic reference-based metrics: BLEU-4, ROUGE-L, and Spearman
//! rank correlation.
//!
//! Tokenization is shared by BLEU and ROUGE-L: lowercase, punctuation split
//! into separate tokens, then whitespace split. BLEU uses clipped n-gram
//! counts with uniform weights and no smoothing, so a candidate missing any
//! n-gram order scores zero; the brevity penalty is reported separately in
//! [`BleuScore`] so third-party implementations can be reconciled.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_NGRAM: usize = 4;

/// Lowercases, splits punctuation characters into standalone tokens, and
/// splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.to_lowercase().chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(ch.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Longest common subsequence length over arbitrary comparable slices.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut row = vec![0usize; b.len() + 1];
    for item_a in a {
        for (j, item_b) in b.iter().enumerate() {
            row[j + 1] = if item_a == item_b {
                prev[j] + 1
            } else {
                prev[j + 1].max(row[j])
            };
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: [f64; MAX_NGRAM],
    pub brevity_penalty: f64,
    pub candidate_len: usize,
    pub reference_len: usize,
}

/// BLEU-4 for a single candidate against one or more references.
pub fn bleu(candidate: &str, references: &[&str]) -> f64 {
    bleu_detailed(candidate, references).score
}

/// BLEU-4 with per-order modified precisions and the brevity penalty.
pub fn bleu_detailed(candidate: &str, references: &[&str]) -> BleuScore {
    let cand = tokenize(candidate);
    let refs: Vec<Vec<String>> = references.iter().map(|r| tokenize(r)).collect();
    let refs: Vec<&[String]> = refs.iter().map(|r| r.as_slice()).collect();

    // Effective reference length: closest to the candidate, shorter on ties.
    let reference_len = refs
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| {
            let diff = (len as i64 - cand.len() as i64).abs();
            (diff, len)
        })
        .unwrap_or(0);

    let mut precisions = [0.0f64; MAX_NGRAM];
    if cand.is_empty() || refs.iter().all(|r| r.is_empty()) {
        return BleuScore {
            score: 0.0,
            precisions,
            brevity_penalty: 0.0,
            candidate_len: cand.len(),
            reference_len,
        };
    }

    for (n, precision) in precisions.iter_mut().enumerate() {
        let n = n + 1;
        let cand_counts = ngram_counts(&cand, n);
        let total: usize = cand_counts.values().sum();
        if total == 0 {
            // Candidate too short for this order: undefined precision,
            // treated as zero under the no-smoothing convention.
            *precision = 0.0;
            continue;
        }
        let mut clipped = 0usize;
        for (gram, &count) in &cand_counts {
            let max_ref = refs
                .iter()
                .map(|r| *ngram_counts(r, n).get(gram).unwrap_or(&0))
                .max()
                .unwrap_or(0);
            clipped += count.min(max_ref);
        }
        *precision = clipped as f64 / total as f64;
    }

    let brevity_penalty = if cand.len() >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / cand.len() as f64).exp()
    };

    let score = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_NGRAM as f64;
        brevity_penalty * log_mean.exp()
    };

    BleuScore {
        score,
        precisions,
        brevity_penalty,
        candidate_len: cand.len(),
        reference_len,
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// ROUGE-L: LCS-based precision against the candidate length and recall
/// against the reference length. Empty inputs score all zeros.
pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    if cand.is_empty() || refr.is_empty() {
        return RougeScore {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        };
    }
    let lcs = lcs_length(&cand, &refr) as f64;
    let precision = lcs / cand.len() as f64;
    let recall = lcs / refr.len() as f64;
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    RougeScore {
        precision,
        recall,
        f1,
    }
}

/// Paired automatic and human score lists for rank-correlation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    automatic: Vec<f64>,
    human: Vec<f64>,
}

impl ScorePair {
    pub fn new(automatic: Vec<f64>, human: Vec<f64>) -> Result<Self> {
        if automatic.len() != human.len() {
            return Err(Error::validation(
                "human",
                format!(
                    "score lists must have equal length ({} vs {})",
                    automatic.len(),
                    human.len()
                ),
            ));
        }
        if automatic.len() < 2 {
            return Err(Error::validation(
                "automatic",
                "at least 2 score pairs are required",
            ));
        }
        Ok(ScorePair { automatic, human })
    }

    pub fn automatic(&self) -> &[f64] {
        &self.automatic
    }

    pub fn human(&self) -> &[f64] {
        &self.human
    }
}

/// Spearman rank correlation: Pearson correlation of fractional ranks, with
/// ties receiving the average of their rank positions. Returns `None` when
/// either list is constant (the correlation is undefined).
pub fn spearman(pairs: &ScorePair) -> Option<f64> {
    let rx = fractional_ranks(pairs.automatic());
    let ry = fractional_ranks(pairs.human());
    pearson(&rx, &ry)
}

fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; ties share the average of positions i..=j.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mean_x) * (b - mean_y);
        var_x += (a - mean_x) * (a - mean_x);
        var_y += (b - mean_y) * (b - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(cov / (var_x * var_y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("The cat, sat."),
            vec!["the", "cat", ",", "sat", "."]
        );
        assert_eq!(tokenize("A  b\tc "), vec!["a", "b", "c"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        assert!((bleu("the cat sat on the mat here", &["the cat sat on the mat here"]) - 1.0)
            .abs()
            < 1e-12);
        assert_eq!(bleu("alpha beta gamma delta", &["epsilon zeta eta theta"]), 0.0);
        assert_eq!(bleu("", &["anything at all"]), 0.0);
    }

    #[test]
    fn bleu_short_candidate_scores_zero_with_brevity_reported() {
        // p1=p2=p3=1, no 4-gram in the candidate, BP = exp(1 - 4/3).
        let detail = bleu_detailed("the cat sat", &["the cat sat down"]);
        assert_eq!(detail.score, 0.0);
        assert_eq!(detail.precisions[0], 1.0);
        assert_eq!(detail.precisions[1], 1.0);
        assert_eq!(detail.precisions[2], 1.0);
        assert_eq!(detail.precisions[3], 0.0);
        assert!((detail.brevity_penalty - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-9);
        assert!((detail.brevity_penalty - 0.7165).abs() < 1e-4);
    }

    #[test]
    fn bleu_is_case_and_trailing_whitespace_insensitive() {
        let a = bleu("The Cat sat on the mat today", &["the cat sat on the mat today"]);
        let b = bleu("the cat sat on the mat today  ", &["the cat sat on the mat today"]);
        assert_eq!(a, b);
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_hand_example() {
        let r = rouge_l("a b c d", "a c d e");
        assert!((r.precision - 0.75).abs() < 1e-12);
        assert!((r.recall - 0.75).abs() < 1e-12);
        assert!((r.f1 - 0.75).abs() < 1e-12);

        let identical = rouge_l("same words here", "same words here");
        assert_eq!(
            identical,
            RougeScore {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(rouge_l("x y", "p q").f1, 0.0);
        assert_eq!(rouge_l("", "p q").f1, 0.0);
    }

    #[test]
    fn spearman_hand_formula() {
        let pair = ScorePair::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((spearman(&pair).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_extremes_and_undefined() {
        let up = ScorePair::new(vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0]).unwrap();
        assert!((spearman(&up).unwrap() - 1.0).abs() < 1e-12);
        let down = ScorePair::new(vec![1.0, 2.0, 3.0], vec![5.0, 4.0, 3.0]).unwrap();
        assert!((spearman(&down).unwrap() + 1.0).abs() < 1e-12);
        let constant = ScorePair::new(vec![1.0, 2.0, 3.0], vec![7.0, 7.0, 7.0]).unwrap();
        assert_eq!(spearman(&constant), None);
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        assert_eq!(fractional_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
        let pair = ScorePair::new(vec![1.0, 2.0, 2.0, 3.0], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let rho = spearman(&pair).unwrap();
        assert!(rho > 0.9 && rho <= 1.0);
    }

    #[test]
    fn score_pair_validates_shape() {
        assert!(ScorePair::new(vec![1.0], vec![1.0]).is_err());
        assert!(ScorePair::new(vec![1.0, 2.0], vec![1.0]).is_err());
    }
}
