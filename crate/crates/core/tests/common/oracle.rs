//! Independent reference computations for the text metrics. N-grams are
//! counted by comparing every pair of windows, with no hashing.

/// Constructed (hypothesis, reference) corpora. The first is an identity
/// corpus and the second has no characters in common.
pub const CORPORA: &[&[(&str, &str)]] = &[
    &[("the cat sat on the mat", "the cat sat on the mat")],
    &[("abc", "xyz")],
    &[("the the the the", "the cat")],
    &[("a b c d", "a b c d e f")],
    &[("the cat sat on the mat", "the cat is on the mat"), ("a dog", "the dog")],
    &[("kitten", "sitting")],
    &[("He said, \"no.\"", "he said no ."), ("(maybe)", "maybe not")],
    &[("one two three four five", "five four three two one")],
    &[("x", "x"), ("y y y", "y"), ("z w", "w z")],
    &[("the boy wants to go", "the boy wants to go ."), ("dogs bark", "a dog barks loudly")],
    &[("ünïcödé wörds", "unicode wörds"), ("日本 語", "日本語")],
    &[("a", "b"), ("c", "d")],
];

/// (hypothesis n-grams, reference n-grams, clipped matches) for one order.
pub fn brute_counts<T: PartialEq>(hyp: &[T], reference: &[T], n: usize) -> (usize, usize, usize) {
    let windows = |s: &[T]| if s.len() >= n { s.len() - n + 1 } else { 0 };
    let (h, r) = (windows(hyp), windows(reference));
    let mut matched = 0;
    for i in 0..h {
        let g = &hyp[i..i + n];
        // Count each distinct n-gram once, at its first occurrence.
        if (0..i).any(|j| &hyp[j..j + n] == g) {
            continue;
        }
        let in_hyp = (0..h).filter(|&j| &hyp[j..j + n] == g).count();
        let in_ref = (0..r).filter(|&j| &reference[j..j + n] == g).count();
        matched += in_hyp.min(in_ref);
    }
    (h, r, matched)
}

/// Corpus BLEU, 0..=100: orders up to the first one with no hypothesis
/// n-grams, zero-match orders smoothed to 1/(2^k * total).
pub fn bleu(corpus: &[(Vec<String>, Vec<String>)]) -> f64 {
    let mut totals = [(0usize, 0usize, 0usize); 4];
    let (mut c, mut r) = (0, 0);
    for (hyp, reference) in corpus {
        c += hyp.len();
        r += reference.len();
        for (n, t) in totals.iter_mut().enumerate() {
            let (h, rr, m) = brute_counts(hyp, reference, n + 1);
            t.0 += h;
            t.1 += rr;
            t.2 += m;
        }
    }
    let mut logs = Vec::new();
    let mut k = 0;
    for &(h, _, m) in &totals {
        if h == 0 {
            break;
        }
        let p = if m > 0 {
            m as f64 / h as f64
        } else {
            k += 1;
            1.0 / (2f64.powi(k) * h as f64)
        };
        logs.push(p.ln());
    }
    if logs.is_empty() {
        return 0.0;
    }
    let bp = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    100.0 * bp * (logs.iter().sum::<f64>() / logs.len() as f64).exp()
}

/// chrF++, 0..=100: mean F2 over character 1..6-grams (no whitespace) and
/// word 1..2-grams, skipping orders empty on either side.
pub fn chrf_pp(corpus: &[(Vec<String>, Vec<String>)]) -> f64 {
    let mut totals = vec![(0usize, 0usize, 0usize); 8];
    for (hyp, reference) in corpus {
        let hc: Vec<char> = hyp.concat().chars().filter(|c| !c.is_whitespace()).collect();
        let rc: Vec<char> = reference.concat().chars().filter(|c| !c.is_whitespace()).collect();
        for n in 1..=6 {
            let (h, r, m) = brute_counts(&hc, &rc, n);
            totals[n - 1].0 += h;
            totals[n - 1].1 += r;
            totals[n - 1].2 += m;
        }
        for n in 1..=2 {
            let (h, r, m) = brute_counts(hyp, reference, n);
            totals[5 + n].0 += h;
            totals[5 + n].1 += r;
            totals[5 + n].2 += m;
        }
    }
    let mut f = Vec::new();
    for &(h, r, m) in &totals {
        if h == 0 || r == 0 {
            continue;
        }
        if m == 0 {
            f.push(0.0);
            continue;
        }
        let (p, rec) = (m as f64 / h as f64, m as f64 / r as f64);
        f.push(5.0 * p * rec / (4.0 * p + rec));
    }
    if f.is_empty() {
        0.0
    } else {
        100.0 * f.iter().sum::<f64>() / f.len() as f64
    }
}
