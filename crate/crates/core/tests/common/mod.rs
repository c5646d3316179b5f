//! Shared helpers for the integration suites: independent brute-force
//! oracles and small statistical utilities. Everything here is deliberately
//! written against first principles rather than the library's closed forms,
//! so it can serve as an independent check of them.

/// Exhaustive expected-inference-error oracle over full intent vectors.
///
/// Enumerates every `(true vector, report)` pair under the factorized prior
/// and a randomized-response channel, applies the vector-level Bayes
/// estimator by scoring *all* candidate vectors (via posterior marginals,
/// which is an exact linearity identity for weighted Hamming distance, not
/// an optimality assumption), and accumulates the realized error of the
/// minimizing candidate.
pub fn brute_force_inference_error(prior: &[f64], eps: f64, weights: &[f64]) -> f64 {
    let s = prior.len();
    assert!(s <= 12, "oracle is exponential; keep instances small");
    let size = 1usize << s;
    let keep = eps.exp() / (eps.exp() + 1.0);
    let flip = 1.0 - keep;

    let prior_of = |mask: usize| -> f64 {
        (0..s).map(|i| if mask >> i & 1 == 1 { prior[i] } else { 1.0 - prior[i] }).product()
    };

    let mut total = 0.0;
    let mut joint = vec![0.0f64; size];
    for report in 0..size {
        // joint mass of (truth, this report)
        for (truth, slot) in joint.iter_mut().enumerate() {
            let like: f64 = (0..s)
                .map(|i| if (report >> i & 1) == (truth >> i & 1) { keep } else { flip })
                .product();
            *slot = prior_of(truth) * like;
        }
        // posterior marginals of each entry being 1
        let mut mass = 0.0;
        let mut marginal = vec![0.0f64; s];
        for (truth, w) in joint.iter().enumerate() {
            mass += w;
            for (i, m) in marginal.iter_mut().enumerate() {
                if truth >> i & 1 == 1 {
                    *m += w;
                }
            }
        }
        // exhaustive candidate minimization of the expected weighted-Hamming
        // loss; E[d(cand, truth)] = sum_i w_i * (cand_i ? mass - m_i : m_i)
        let mut best = f64::INFINITY;
        for cand in 0..size {
            let mut loss = 0.0;
            for i in 0..s {
                loss += weights[i]
                    * if cand >> i & 1 == 1 { mass - marginal[i] } else { marginal[i] };
            }
            if loss < best {
                best = loss;
            }
        }
        total += best;
    }
    total
}

/// Exhaustive 0/1 knapsack: maximum value under the budget, ties broken by
/// the lexicographically smallest id set.
pub fn brute_force_knapsack(items: &[(usize, f64, f64)], budget: f64) -> Vec<usize> {
    let n = items.len();
    assert!(n <= 20);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for mask in 0u32..(1 << n) {
        let mut price = 0.0;
        let mut value = 0.0;
        let mut set = Vec::new();
        for (idx, (id, p, v)) in items.iter().enumerate() {
            if mask >> idx & 1 == 1 {
                price += p;
                value += v;
                set.push(*id);
            }
        }
        if price > budget {
            continue;
        }
        set.sort_unstable();
        let better = match &best {
            None => true,
            Some((bv, bs)) => value > *bv || (value == *bv && set < *bs),
        };
        if better {
            best = Some((value, set));
        }
    }
    best.map(|(_, s)| s).unwrap_or_default()
}

/// One-sided exact sign test: probability of at least `wins` successes in
/// `trials` fair coin flips.
pub fn sign_test_p_value(wins: u64, trials: u64) -> f64 {
    let mut ln_fact = vec![0.0f64; trials as usize + 1];
    for k in 1..=trials as usize {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let ln2 = std::f64::consts::LN_2;
    let mut p = 0.0;
    for k in wins..=trials {
        let ln_term = ln_fact[trials as usize]
            - ln_fact[k as usize]
            - ln_fact[(trials - k) as usize]
            - trials as f64 * ln2;
        p += ln_term.exp();
    }
    p.min(1.0)
}

/// Mean of a slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
