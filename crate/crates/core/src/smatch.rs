//! Smatch: F1 over semantic triples under the best one-to-one variable
//! alignment between two AMR graphs.
//!
//! Each graph is decomposed into instance triples, relation triples (with
//! `-of` roles turned around), attribute triples and one root marker. The
//! alignment is searched by hill climbing with restarts
//! ([`smatch_hillclimb`]); [`smatch_bruteforce`] enumerates every injective
//! alignment and serves as an exact reference on small graphs.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{inverse_base, AmrGraph, Target};

/// Label of the synthetic root marker triple.
pub const ROOT_TRIPLE_LABEL: &str = "TOP";
const ROOT_TRIPLE_VALUE: &str = "top";

/// Restart count used when none is given.
pub const DEFAULT_RESTARTS: usize = 4;

/// Largest `min(|gold vars|, |pred vars|)` the brute-force search accepts.
pub const BRUTEFORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmatchError {
    #[error("restarts must be at least 1")]
    NoRestarts,
    #[error("brute force needs min(|gold|, |pred|) <= {BRUTEFORCE_LIMIT} variables, got {0}")]
    TooLarge(usize),
    #[error("mapping is not injective: `{0}` is used twice")]
    NotInjective(String),
    #[error("mapping refers to unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Triples of one graph. Variables are referred to by index into
/// [`TripleSet::variables`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    variables: Vec<String>,
    instances: Vec<(usize, String)>,
    relations: Vec<(String, usize, usize)>,
    attributes: Vec<(String, usize, String)>,
}

impl TripleSet {
    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// `(var, concept)` pairs.
    pub fn instances(&self) -> &[(usize, String)] {
        &self.instances
    }

    /// `(label, source, target)` with inverse roles canonicalized.
    pub fn relations(&self) -> &[(String, usize, usize)] {
        &self.relations
    }

    /// `(label, var, constant)`, including the root marker.
    pub fn attributes(&self) -> &[(String, usize, String)] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.instances.len() + self.relations.len() + self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

pub fn extract_triples(g: &AmrGraph) -> TripleSet {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut variables = Vec::new();
    // Variables used without an instance still get an index so the triples
    // stay well formed.
    let mut lookup = |v: &str, variables: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(v) {
            return i;
        }
        variables.push(v.to_string());
        index.insert(v.to_string(), variables.len() - 1);
        variables.len() - 1
    };
    let mut instances = Vec::new();
    for inst in g.instances() {
        let id = lookup(&inst.var, &mut variables);
        instances.push((id, inst.concept.clone()));
    }

    let mut relations = Vec::new();
    let mut attributes = Vec::new();
    for e in g.edges() {
        let src = lookup(&e.source, &mut variables);
        match &e.target {
            Target::Var(t) => {
                let tgt = lookup(t, &mut variables);
                match inverse_base(&e.role) {
                    Some(base) => relations.push((base.to_string(), tgt, src)),
                    None => relations.push((e.role.clone(), src, tgt)),
                }
            }
            Target::Const(c) => attributes.push((e.role.clone(), src, unquote(c).to_string())),
        }
    }
    let root = lookup(g.root(), &mut variables);
    attributes.push((ROOT_TRIPLE_LABEL.to_string(), root, ROOT_TRIPLE_VALUE.to_string()));

    TripleSet {
        variables,
        instances,
        relations,
        attributes,
    }
}

/// A partial injective map from gold variable names to predicted ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VariableMapping(pub BTreeMap<String, String>);

impl VariableMapping {
    pub fn get(&self, gold: &str) -> Option<&str> {
        self.0.get(gold).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn identity(triples: &TripleSet) -> Self {
        VariableMapping(
            triples
                .variables
                .iter()
                .map(|v| (v.clone(), v.clone()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmatchScore {
    pub matched: usize,
    pub gold_total: usize,
    pub pred_total: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub best_mapping: VariableMapping,
}

impl SmatchScore {
    pub fn from_counts(matched: usize, gold_total: usize, pred_total: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, pred_total);
        let recall = ratio(matched, gold_total);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        SmatchScore {
            matched,
            gold_total,
            pred_total,
            precision,
            recall,
            f1,
            best_mapping: VariableMapping::default(),
        }
    }
}

/// Consecutive zero-gain moves allowed before a climb stops.
const SIDEWAYS_LIMIT: usize = 8;

/// gold index -> pred index.
type Alignment = Vec<Option<usize>>;

/// Precomputed match weights between two triple sets.
///
/// Identical triples are merged with their multiplicity; a distinct gold
/// triple matches at most one distinct predicted triple, contributing
/// `min(gold multiplicity, pred multiplicity)`.
struct Scorer {
    gold_vars: usize,
    pred_vars: usize,
    /// `unary[g * pred_vars + p]`: weight of gold unary triples on `g`
    /// matched when `g -> p`.
    unary: Vec<usize>,
    /// `(g1, g2, p1, p2, weight)` matched when `g1 -> p1` and `g2 -> p2`.
    binary: Vec<(usize, usize, usize, usize, usize)>,
    binary_by_var: Vec<Vec<usize>>,
    /// `useful[g * pred_vars + p]`: some triple on `g` can match with `g -> p`.
    /// Moving `g` anywhere else cannot gain.
    useful: Vec<bool>,
}

fn multiset<K: std::hash::Hash + Eq + Clone + Ord>(items: impl Iterator<Item = K>) -> Vec<(K, usize)> {
    let mut m: BTreeMap<K, usize> = BTreeMap::new();
    for k in items {
        *m.entry(k).or_default() += 1;
    }
    m.into_iter().collect()
}

impl Scorer {
    fn new(gold: &TripleSet, pred: &TripleSet) -> Self {
        let gv = gold.variables.len();
        let pv = pred.variables.len();
        let mut unary = vec![0; gv * pv];

        // Unary triples keyed by (kind, label, value); kind 0 instance, 1 attribute.
        let unary_key = |kind: u8, label: &str, value: &str, var: usize| {
            ((kind, label.to_string(), value.to_string()), var)
        };
        let gold_unary = multiset(
            gold.instances
                .iter()
                .map(|(v, c)| unary_key(0, "", c, *v))
                .chain(gold.attributes.iter().map(|(l, v, c)| unary_key(1, l, c, *v))),
        );
        let pred_unary = multiset(
            pred.instances
                .iter()
                .map(|(v, c)| unary_key(0, "", c, *v))
                .chain(pred.attributes.iter().map(|(l, v, c)| unary_key(1, l, c, *v))),
        );
        let mut pred_by_key: HashMap<&(u8, String, String), Vec<(usize, usize)>> = HashMap::new();
        for ((key, var), n) in &pred_unary {
            pred_by_key.entry(key).or_default().push((*var, *n));
        }
        for ((key, g), n) in &gold_unary {
            if let Some(cands) = pred_by_key.get(key) {
                for &(p, m) in cands {
                    unary[g * pv + p] += (*n).min(m);
                }
            }
        }

        let gold_rel = multiset(gold.relations.iter().cloned());
        let pred_rel = multiset(pred.relations.iter().cloned());
        let mut pred_by_label: HashMap<&str, Vec<(usize, usize, usize)>> = HashMap::new();
        for ((l, p1, p2), m) in &pred_rel {
            pred_by_label.entry(l.as_str()).or_default().push((*p1, *p2, *m));
        }
        let mut binary = Vec::new();
        let mut binary_by_var = vec![Vec::new(); gv];
        for ((l, g1, g2), n) in &gold_rel {
            let Some(cands) = pred_by_label.get(l.as_str()) else { continue };
            for &(p1, p2, m) in cands {
                // A self-loop only aligns with a self-loop under an injective map.
                if (g1 == g2) != (p1 == p2) {
                    continue;
                }
                let idx = binary.len();
                binary.push((*g1, *g2, p1, p2, (*n).min(m)));
                binary_by_var[*g1].push(idx);
                if g2 != g1 {
                    binary_by_var[*g2].push(idx);
                }
            }
        }
        let mut useful: Vec<bool> = unary.iter().map(|&w| w > 0).collect();
        for &(g1, g2, p1, p2, _) in &binary {
            useful[g1 * pv + p1] = true;
            useful[g2 * pv + p2] = true;
        }
        Scorer {
            gold_vars: gv,
            pred_vars: pv,
            unary,
            binary,
            binary_by_var,
            useful,
        }
    }

    fn unary_gain(&self, g: usize, p: Option<usize>) -> usize {
        p.map_or(0, |p| self.unary[g * self.pred_vars + p])
    }

    fn is_useful(&self, g: usize, p: Option<usize>) -> bool {
        p.is_some_and(|p| self.useful[g * self.pred_vars + p])
    }

    fn binary_hit(&self, idx: usize, a: &Alignment) -> usize {
        let (g1, g2, p1, p2, w) = self.binary[idx];
        if a[g1] == Some(p1) && a[g2] == Some(p2) {
            w
        } else {
            0
        }
    }

    fn count(&self, a: &Alignment) -> usize {
        let unary: usize = (0..self.gold_vars).map(|g| self.unary_gain(g, a[g])).sum();
        let binary: usize = (0..self.binary.len()).map(|i| self.binary_hit(i, a)).sum();
        unary + binary
    }

    /// Score contribution of every triple touching `vars` (each counted once).
    fn local(&self, a: &Alignment, vars: &[usize]) -> usize {
        let mut total = 0;
        for (k, &g) in vars.iter().enumerate() {
            total += self.unary_gain(g, a[g]);
            for &idx in &self.binary_by_var[g] {
                let (g1, g2, ..) = self.binary[idx];
                // Skip entries already counted through an earlier var.
                if vars[..k].iter().any(|&v| v == g1 || v == g2) {
                    continue;
                }
                total += self.binary_hit(idx, a);
            }
        }
        total
    }

    /// Change in matched count if `changes` were applied to `a`.
    fn delta(&self, a: &mut Alignment, changes: &[(usize, Option<usize>)]) -> i64 {
        // Moves touch at most four variables.
        let mut vars = [0usize; 4];
        let mut saved = [None; 4];
        let k = changes.len();
        for (i, &(g, _)) in changes.iter().enumerate() {
            vars[i] = g;
            saved[i] = a[g];
        }
        let before = self.local(a, &vars[..k]) as i64;
        for &(g, p) in changes {
            a[g] = p;
        }
        let after = self.local(a, &vars[..k]) as i64;
        for i in 0..k {
            a[vars[i]] = saved[i];
        }
        after - before
    }

    /// Changes that make binary entry `idx` match: both gold endpoints move
    /// to its pred endpoints and displaced gold variables take over whatever
    /// the endpoints released.
    fn edge_move(&self, a: &Alignment, holder: &[Option<usize>], idx: usize) -> Option<Vec<(usize, Option<usize>)>> {
        let (g1, g2, p1, p2, _) = self.binary[idx];
        if a[g1] == Some(p1) && a[g2] == Some(p2) {
            return None;
        }
        let mut changes = vec![(g1, Some(p1))];
        if g2 != g1 {
            changes.push((g2, Some(p2)));
        }
        let mut freed = [a[g1], a[g2]]
            .into_iter()
            .flatten()
            .filter(|&p| p != p1 && p != p2);
        for p in [p1, p2] {
            if let Some(h) = holder[p] {
                if h != g1 && h != g2 && !changes.iter().any(|c| c.0 == h) {
                    changes.push((h, freed.next()));
                }
            }
        }
        Some(changes)
    }

    fn climb(&self, mut a: Alignment) -> (usize, Alignment) {
        let mut holder: Vec<Option<usize>> = vec![None; self.pred_vars];
        for (g, p) in a.iter().enumerate() {
            if let Some(p) = p {
                holder[*p] = Some(g);
            }
        }
        let mut visited = HashSet::from([a.clone()]);
        let mut sideways = 0;
        loop {
            let mut best: Option<(i64, Vec<(usize, Option<usize>)>)> = None;
            let mut consider = |d: i64, changes: &[(usize, Option<usize>)]| {
                if d > 0 && best.as_ref().is_none_or(|(bd, _)| d > *bd) {
                    best = Some((d, changes.to_vec()));
                }
            };
            for g in 0..self.gold_vars {
                for p in 0..self.pred_vars {
                    if holder[p].is_some() || !self.is_useful(g, Some(p)) {
                        continue;
                    }
                    let changes = [(g, Some(p))];
                    let d = self.delta(&mut a, &changes);
                    consider(d, &changes);
                }
            }
            for g1 in 0..self.gold_vars {
                for g2 in g1 + 1..self.gold_vars {
                    if a[g1] == a[g2] || !(self.is_useful(g1, a[g2]) || self.is_useful(g2, a[g1])) {
                        continue;
                    }
                    let changes = [(g1, a[g2]), (g2, a[g1])];
                    let d = self.delta(&mut a, &changes);
                    consider(d, &changes);
                }
            }
            let mut level = Vec::new();
            for idx in 0..self.binary.len() {
                if let Some(changes) = self.edge_move(&a, &holder, idx) {
                    let d = self.delta(&mut a, &changes);
                    if d == 0 {
                        level.push(changes);
                    } else {
                        consider(d, &changes);
                    }
                }
            }
            let changes = match best {
                Some((_, changes)) => {
                    sideways = 0;
                    changes
                }
                None if sideways < SIDEWAYS_LIMIT => {
                    // On a plateau, take the first edge move to an unseen state.
                    let Some(changes) = level.into_iter().find(|c| {
                        let mut next = a.clone();
                        for &(g, p) in c {
                            next[g] = p;
                        }
                        !visited.contains(&next)
                    }) else {
                        break;
                    };
                    sideways += 1;
                    changes
                }
                None => break,
            };
            for &(g, _) in &changes {
                if let Some(p) = a[g] {
                    holder[p] = None;
                }
            }
            for &(g, p) in &changes {
                a[g] = p;
            }
            for &(g, _) in &changes {
                if let Some(p) = a[g] {
                    holder[p] = Some(g);
                }
            }
            visited.insert(a.clone());
        }
        debug_assert!(
            a.iter().flatten().collect::<HashSet<_>>().len() == a.iter().flatten().count(),
            "alignment lost injectivity"
        );
        (self.count(&a), a)
    }
}

/// Map each gold variable to the first unused predicted variable with the
/// same concept, then fill the rest in index order.
fn concept_seeded(gold: &TripleSet, pred: &TripleSet) -> Alignment {
    let gv = gold.variables.len();
    let mut a: Alignment = vec![None; gv];
    let mut used = vec![false; pred.variables.len()];
    for (g, concept) in &gold.instances {
        if a[*g].is_some() {
            continue;
        }
        if let Some((p, _)) = pred
            .instances
            .iter()
            .find(|(p, c)| c == concept && !used[*p])
        {
            a[*g] = Some(*p);
            used[*p] = true;
        }
    }
    let mut free = (0..pred.variables.len()).filter(|p| !used[*p]);
    for slot in a.iter_mut().filter(|s| s.is_none()) {
        match free.next() {
            Some(p) => *slot = Some(p),
            None => break,
        }
    }
    a
}

fn random_alignment(gold_vars: usize, pred_vars: usize, rng: &mut ChaCha8Rng) -> Alignment {
    let mut targets: Vec<Option<usize>> = (0..pred_vars).map(Some).collect();
    targets.resize(targets.len().max(gold_vars), None);
    targets.shuffle(rng);
    targets.truncate(gold_vars);
    targets
}

fn to_mapping(gold: &TripleSet, pred: &TripleSet, a: &Alignment) -> VariableMapping {
    VariableMapping(
        a.iter()
            .enumerate()
            .filter_map(|(g, p)| p.map(|p| (gold.variables[g].clone(), pred.variables[p].clone())))
            .collect(),
    )
}

fn from_mapping(gold: &TripleSet, pred: &TripleSet, m: &VariableMapping) -> Result<Alignment, SmatchError> {
    let mut a = vec![None; gold.variables.len()];
    let mut used = vec![false; pred.variables.len()];
    for (g, p) in &m.0 {
        let gi = gold
            .var_index(g)
            .ok_or_else(|| SmatchError::UnknownVariable(g.clone()))?;
        let pi = pred
            .var_index(p)
            .ok_or_else(|| SmatchError::UnknownVariable(p.clone()))?;
        if used[pi] {
            return Err(SmatchError::NotInjective(p.clone()));
        }
        used[pi] = true;
        a[gi] = Some(pi);
    }
    Ok(a)
}

/// Number of gold triples whose image under `m` occurs in `pred`.
pub fn matched_count(gold: &TripleSet, pred: &TripleSet, m: &VariableMapping) -> Result<usize, SmatchError> {
    let a = from_mapping(gold, pred, m)?;
    Ok(Scorer::new(gold, pred).count(&a))
}

fn finish(gold: &TripleSet, pred: &TripleSet, matched: usize, a: &Alignment) -> SmatchScore {
    let mut s = SmatchScore::from_counts(matched, gold.len(), pred.len());
    s.best_mapping = to_mapping(gold, pred, a);
    s
}

fn better(count: usize, a: &Alignment, best: &Option<(usize, Alignment)>) -> bool {
    match best {
        None => true,
        Some((bc, ba)) => count > *bc || (count == *bc && a < ba),
    }
}

/// Hill climbing over alignments. Restart 0 starts from a concept-matched
/// seeding, the others from random alignments drawn from a stream derived
/// from `(seed, restart index)`, so adding restarts never lowers the score.
pub fn smatch_hillclimb(
    gold: &AmrGraph,
    pred: &AmrGraph,
    restarts: usize,
    seed: u64,
) -> Result<SmatchScore, SmatchError> {
    if restarts == 0 {
        return Err(SmatchError::NoRestarts);
    }
    let gt = extract_triples(gold);
    let pt = extract_triples(pred);
    let scorer = Scorer::new(&gt, &pt);
    let runs: Vec<(usize, Alignment)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                concept_seeded(&gt, &pt)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                random_alignment(gt.variables.len(), pt.variables.len(), &mut rng)
            };
            scorer.climb(start)
        })
        .collect();
    let mut best: Option<(usize, Alignment)> = None;
    for (count, a) in runs {
        if better(count, &a, &best) {
            best = Some((count, a));
        }
    }
    let (count, a) = best.expect("at least one restart");
    Ok(finish(&gt, &pt, count, &a))
}

/// Exact Smatch by enumerating every injective alignment.
pub fn smatch_bruteforce(gold: &AmrGraph, pred: &AmrGraph) -> Result<SmatchScore, SmatchError> {
    let gt = extract_triples(gold);
    let pt = extract_triples(pred);
    let (gv, pv) = (gt.variables.len(), pt.variables.len());
    if gv.min(pv) > BRUTEFORCE_LIMIT {
        return Err(SmatchError::TooLarge(gv.min(pv)));
    }
    let scorer = Scorer::new(&gt, &pt);
    let mut best: Option<(usize, Alignment)> = None;
    let mut a: Alignment = vec![None; gv];

    if gv <= pv {
        // Every gold variable gets a distinct pred variable.
        fn assign(g: usize, a: &mut Alignment, used: &mut [bool], s: &Scorer, best: &mut Option<(usize, Alignment)>) {
            if g == a.len() {
                let c = s.count(a);
                if better(c, a, best) {
                    *best = Some((c, a.clone()));
                }
                return;
            }
            for p in 0..used.len() {
                if !used[p] {
                    used[p] = true;
                    a[g] = Some(p);
                    assign(g + 1, a, used, s, best);
                    used[p] = false;
                }
            }
            a[g] = None;
        }
        assign(0, &mut a, &mut vec![false; pv], &scorer, &mut best);
    } else {
        // Every pred variable is claimed by a distinct gold variable.
        fn claim(p: usize, pv: usize, a: &mut Alignment, s: &Scorer, best: &mut Option<(usize, Alignment)>) {
            if p == pv {
                let c = s.count(a);
                if better(c, a, best) {
                    *best = Some((c, a.clone()));
                }
                return;
            }
            for g in 0..a.len() {
                if a[g].is_none() {
                    a[g] = Some(p);
                    claim(p + 1, pv, a, s, best);
                    a[g] = None;
                }
            }
        }
        claim(0, pv, &mut a, &scorer, &mut best);
    }
    let (count, a) = best.expect("at least one alignment");
    Ok(finish(&gt, &pt, count, &a))
}
