//! Reference implementations, written for clarity rather than speed.

use std::collections::HashMap;

/// Minimum edit distance by plain recursion over the three edit choices.
pub fn edit_distance(a: &[&str], b: &[&str]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = edit_distance(ra, rb) + usize::from(x != y);
            let del = edit_distance(ra, b) + 1;
            let ins = edit_distance(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// Table-driven edit distance, for sequences too long for the recursion.
pub fn edit_distance_table(a: &[String], b: &[String]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Longest common contiguous run, by checking every start pair.
pub fn longest_common_run<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            best = best.max(k);
        }
    }
    best
}

/// Largest copied run a candidate may keep: 2 for sources of at most six
/// tokens, otherwise strictly less than "more than half".
pub fn overlap_bound(source_len: usize) -> usize {
    if source_len <= 6 {
        2
    } else {
        source_len / 2
    }
}

pub fn has_repeated_ngram<T: PartialEq>(tokens: &[T], n: usize) -> bool {
    if tokens.len() < n {
        return false;
    }
    let grams: Vec<&[T]> = tokens.windows(n).collect();
    (0..grams.len()).any(|i| (i + 1..grams.len()).any(|j| grams[i] == grams[j]))
}

pub fn passes_constraints(source: &[String], candidate: &[String]) -> bool {
    longest_common_run(source, candidate) <= overlap_bound(source.len()) && !has_repeated_ngram(candidate, 3)
}

pub fn stage_size(n: usize, cap: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let k = std::cmp::min(cap, n / 2);
    k.max(1).min(n)
}

/// Sentence BLEU-4 with exponential smoothing, single reference, on 0..100.
pub fn bleu(cand: &[&str], reference: &[&str]) -> f64 {
    fn counts<'a>(t: &[&'a str], n: usize) -> HashMap<Vec<&'a str>, usize> {
        let mut m = HashMap::new();
        if t.len() >= n {
            for w in t.windows(n) {
                *m.entry(w.to_vec()).or_insert(0) += 1;
            }
        }
        m
    }
    let mut log_p = 0.0;
    let mut smooth = 1.0;
    for n in 1..=4 {
        let c = counts(cand, n);
        let r = counts(reference, n);
        let total: usize = c.values().sum();
        let matched: usize = c.iter().map(|(g, k)| (*k).min(*r.get(g).unwrap_or(&0))).sum();
        let p = if matched == 0 {
            smooth *= 2.0;
            1.0 / (smooth * total as f64)
        } else {
            matched as f64 / total as f64
        };
        log_p += p.ln() / 4.0;
    }
    let (c, r) = (cand.len() as f64, reference.len() as f64);
    let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    100.0 * bp * log_p.exp()
}
