//! Token-sequence similarity between a reference and a candidate plan.
//!
//! Plans are tokenized one token per action name and per argument, see
//! [`PlanDocument::tokens`](super::PlanDocument::tokens).

use std::collections::HashMap;

fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// LCS-based F1. Two empty sequences score 1, one empty sequence 0.
pub fn rouge_l<T: PartialEq>(reference: &[T], candidate: &[T]) -> f64 {
    if reference.is_empty() && candidate.is_empty() {
        return 1.0;
    }
    let lcs = lcs_len(reference, candidate);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    2.0 * p * r / (p + r)
}

fn ngram_counts<T: Eq + std::hash::Hash>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Unsmoothed BLEU against one reference.
///
/// Orders for which the reference has no n-grams are left out of the
/// geometric mean; any remaining order with zero clipped matches makes the
/// score 0. Two empty sequences score 1.
pub fn bleu<T: Eq + std::hash::Hash>(reference: &[T], candidate: &[T], max_n: usize) -> f64 {
    if reference.is_empty() && candidate.is_empty() {
        return 1.0;
    }
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 1..=max_n.max(1) {
        if reference.len() < n {
            continue;
        }
        let total = candidate.len().saturating_sub(n - 1);
        if total == 0 {
            return 0.0;
        }
        let ref_counts = ngram_counts(reference, n);
        let clipped: usize = ngram_counts(candidate, n)
            .into_iter()
            .map(|(g, c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        if clipped == 0 {
            return 0.0;
        }
        log_sum += (clipped as f64 / total as f64).ln();
        orders += 1;
    }
    if orders == 0 {
        return 0.0;
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    bp * (log_sum / orders as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn rouge_hand_example() {
        // LCS [a,c]: precision 2/2, recall 2/4
        let f = rouge_l(&toks("a b c d"), &toks("a c"));
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_and_disjoint() {
        let plan = toks("move d1 peg1 peg3 move d2 peg1 peg2");
        assert_eq!(rouge_l(&plan, &plan), 1.0);
        assert_eq!(bleu(&plan, &plan, 4), 1.0);
        let other = toks("x y z w");
        assert_eq!(rouge_l(&plan, &other), 0.0);
        assert_eq!(bleu(&plan, &other, 4), 0.0);
    }

    #[test]
    fn bleu_hand_example() {
        // unigrams 5/5, bigrams 3/4 (the cat, on the, the mat), trigrams 1/3
        // (on the mat); candidate 5 vs reference 6 gives BP = e^(1 - 6/5)
        let got = bleu(&toks("the cat sat on the mat"), &toks("the cat on the mat"), 3);
        let want = 0.25f64.powf(1.0 / 3.0) * (-0.2f64).exp();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn bleu_skips_orders_missing_from_reference() {
        // reference has no trigram or 4-gram; unigrams 2/3, bigrams 1/2
        let got = bleu(&toks("a b"), &toks("a b c"), 4);
        assert!((got - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bleu_zero_order_without_smoothing() {
        // every unigram matches but no bigram does
        assert_eq!(bleu(&toks("a b c"), &toks("c b a"), 2), 0.0);
    }

    #[test]
    fn empty_conventions() {
        let e: Vec<&str> = vec![];
        assert_eq!(bleu(&toks("a"), &e, 4), 0.0);
        assert_eq!(bleu(&e, &e, 4), 1.0);
        assert_eq!(rouge_l(&e, &e), 1.0);
        assert_eq!(rouge_l(&toks("a"), &e), 0.0);
    }

    #[test]
    fn clipping_limits_repeats() {
        // "the" appears twice in the reference, seven times in the candidate
        let got = bleu(&toks("the cat the"), &toks("the the the the the the the"), 1);
        assert!((got - 2.0 / 7.0).abs() < 1e-12);
    }
}
