use super::{order_stats, sum_stats, MetricError, MetricScore, OrderStats, SentencePair};

pub const CHRF_CHAR_ORDER: usize = 6;
pub const CHRF_WORD_ORDER: usize = 2;
pub const CHRF_BETA: f64 = 2.0;

fn f_beta(s: &OrderStats) -> f64 {
    if s.matched == 0 {
        return 0.0;
    }
    let p = s.matched as f64 / s.hyp as f64;
    let r = s.matched as f64 / s.reference as f64;
    let b2 = CHRF_BETA * CHRF_BETA;
    (1.0 + b2) * p * r / (b2 * p + r)
}

/// chrF++: the mean F-beta over character 1..6-grams (whitespace removed)
/// and word 1..2-grams. Counts are summed over the corpus per order; orders
/// with no n-grams on either side are skipped.
///
/// sacrebleu 2.x averages precision and recall over orders before taking
/// F-beta, so its corpus scores can differ slightly from these.
pub fn chrf_pp(pairs: &[SentencePair]) -> Result<MetricScore, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let orders = CHRF_CHAR_ORDER + CHRF_WORD_ORDER;
    let stats = sum_stats(
        pairs.iter().map(|p| {
            let hyp_chars: Vec<char> = p.hypothesis.iter().flat_map(|t| t.chars()).filter(|c| !c.is_whitespace()).collect();
            let ref_chars: Vec<char> = p.reference.iter().flat_map(|t| t.chars()).filter(|c| !c.is_whitespace()).collect();
            (1..=CHRF_CHAR_ORDER)
                .map(|n| order_stats(&hyp_chars, &ref_chars, n))
                .chain((1..=CHRF_WORD_ORDER).map(|n| order_stats(&p.hypothesis, &p.reference, n)))
                .collect()
        }),
        orders,
    );
    let components: Vec<f64> = stats
        .iter()
        .filter(|s| s.hyp > 0 && s.reference > 0)
        .map(f_beta)
        .collect();
    let value = if components.is_empty() {
        0.0
    } else {
        100.0 * components.iter().sum::<f64>() / components.len() as f64
    };
    Ok(MetricScore {
        value,
        components,
        brevity_penalty: None,
    })
}
