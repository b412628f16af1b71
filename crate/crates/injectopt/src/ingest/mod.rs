//! Corpus ingestion: follower edges and hashtag-tagged tweet records in,
//! typed instances out. Types come from clustering the hashtag
//! co-occurrence network; probabilities from per-user retweet counts.

mod louvain;

pub use louvain::{assignment_to_csv, louvain_communities, modularity, TypeAssignment};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::Deserialize;
use thiserror::Error;

use crate::net::{sanitize_edges, InputWarning, Instance, InstanceError};
use crate::PROBABILITY_CAP;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("tweet record on line {line} is not valid JSON: {source}")]
    TweetJson { line: usize, source: serde_json::Error },
    #[error("edge row on line {line} is not \"follower<TAB>followee\"")]
    BadEdgeRow { line: usize },
    #[error("top hashtag count must be at least 1")]
    ZeroTopCount,
    #[error("hashtag network has no nodes")]
    EmptyNetwork,
    #[error("count matrices must share one rectangular shape")]
    CountShape,
    #[error("beta prior needs positive finite parameters, got a = {a}, b = {b}")]
    InvalidPrior { a: f64, b: f64 },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// One tweet. Hashtags are lowercased, stripped of a leading '#',
/// deduplicated, and sorted; empty tags are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    user: String,
    hashtags: Vec<String>,
    retweet: bool,
}

impl TweetRecord {
    pub fn new(
        user: impl Into<String>,
        hashtags: impl IntoIterator<Item = impl AsRef<str>>,
        retweet: bool,
    ) -> Self {
        let tags: BTreeSet<String> = hashtags
            .into_iter()
            .filter_map(|raw| {
                let raw = raw.as_ref();
                let tag = raw.strip_prefix('#').unwrap_or(raw).to_lowercase();
                if tag.is_empty() {
                    None
                } else {
                    Some(tag)
                }
            })
            .collect();
        TweetRecord { user: user.into(), hashtags: tags.into_iter().collect(), retweet }
    }

    pub fn user(&self) -> &str {
        &self.user
    }

    pub fn hashtags(&self) -> &[String] {
        &self.hashtags
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet
    }
}

#[derive(Deserialize)]
struct RawTweet {
    user: String,
    hashtags: Vec<String>,
    retweet: bool,
}

/// Parses one JSON tweet record per line. Blank lines are skipped; errors
/// carry 1-based line numbers. Extra JSON fields are ignored.
pub fn parse_tweets_jsonl(text: &str) -> Result<Vec<TweetRecord>, IngestError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTweet = serde_json::from_str(line)
            .map_err(|source| IngestError::TweetJson { line: idx + 1, source })?;
        records.push(TweetRecord::new(raw.user, raw.hashtags, raw.retweet));
    }
    Ok(records)
}

/// Parses "follower<TAB>followee" rows verbatim. Blank lines are skipped;
/// duplicates and self-loops survive here and are dropped with warnings
/// when the graph is built.
pub fn parse_edges_tsv(text: &str) -> Result<Vec<(String, String)>, IngestError> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                edges.push((a.to_string(), b.to_string()));
            }
            _ => return Err(IngestError::BadEdgeRow { line: idx + 1 }),
        }
    }
    Ok(edges)
}

/// The user universe and sanitized follower edges over user indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowerGraph {
    /// Sorted user ids; position is the user index.
    users: Vec<String>,
    /// `(follower, followee)` pairs, self-loops and duplicates removed.
    edges: Vec<(usize, usize)>,
}

impl FollowerGraph {
    pub fn n(&self) -> usize {
        self.users.len()
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, user: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(user)).ok()
    }
}

/// Builds the user universe (edge endpoints plus record authors, sorted)
/// and maps edges onto indices.
pub fn build_follower_graph(
    edges: &[(String, String)],
    records: &[TweetRecord],
) -> (FollowerGraph, Vec<InputWarning>) {
    let mut names: BTreeSet<&str> = BTreeSet::new();
    for (a, b) in edges {
        names.insert(a);
        names.insert(b);
    }
    for r in records {
        names.insert(r.user());
    }
    let users: Vec<String> = names.into_iter().map(str::to_string).collect();
    let index: HashMap<&str, usize> =
        users.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
    let raw: Vec<(usize, usize)> =
        edges.iter().map(|(a, b)| (index[a.as_str()], index[b.as_str()])).collect();
    let (clean, warnings) = sanitize_edges(raw);
    (FollowerGraph { users, edges: clean }, warnings)
}

/// The `h` hashtags appearing in the most records, most frequent first,
/// ties to the lexicographically smaller tag.
pub fn top_hashtags(records: &[TweetRecord], h: usize) -> Result<Vec<String>, IngestError> {
    if h == 0 {
        return Err(IngestError::ZeroTopCount);
    }
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        for tag in r.hashtags() {
            *counts.entry(tag).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|(ta, ca), (tb, cb)| cb.cmp(ca).then_with(|| ta.cmp(tb)));
    Ok(ranked.into_iter().take(h).map(|(t, _)| t.to_string()).collect())
}

/// Undirected hashtag co-occurrence network with integer edge weights and
/// no self-edges. Nodes are sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashtagNetwork {
    nodes: Vec<String>,
    /// Keyed `(a, b)` with `a < b`.
    edges: BTreeMap<(usize, usize), u64>,
}

impl HashtagNetwork {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Co-occurrence count of two tags, 0 when never paired or unknown.
    pub fn weight(&self, a: &str, b: &str) -> u64 {
        let pos = |t: &str| self.nodes.binary_search_by(|n| n.as_str().cmp(t)).ok();
        match (pos(a), pos(b)) {
            (Some(i), Some(j)) if i != j => {
                let key = if i < j { (i, j) } else { (j, i) };
                self.edges.get(&key).copied().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Edges as `((a, b), weight)` with `a < b`, in key order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.edges.iter().map(|(&k, &w)| (k, w))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }
}

/// Every unordered pair of retained hashtags inside one record adds 1 to
/// that pair's edge.
pub fn cooccurrence_network(records: &[TweetRecord], retained: &[String]) -> HashtagNetwork {
    let mut nodes: Vec<String> = retained.to_vec();
    nodes.sort();
    nodes.dedup();
    let index: HashMap<&str, usize> =
        nodes.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut edges: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for r in records {
        let present: Vec<usize> = r
            .hashtags()
            .iter()
            .filter_map(|t| index.get(t.as_str()).copied())
            .collect();
        for (i, &a) in present.iter().enumerate() {
            for &b in &present[i + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                *edges.entry(key).or_insert(0) += 1;
            }
        }
    }
    HashtagNetwork { nodes, edges }
}

/// Per-user, per-type counts: `s` is retained-hashtag occurrences in
/// followees' records, `r` the occurrences in the user's own retweets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCounts {
    r: Vec<Vec<u64>>,
    s: Vec<Vec<u64>>,
}

impl TypeCounts {
    pub fn new(r: Vec<Vec<u64>>, s: Vec<Vec<u64>>) -> Result<Self, IngestError> {
        let n = r.first().map_or(0, Vec::len);
        let rectangular =
            r.len() == s.len() && r.iter().chain(&s).all(|row| row.len() == n);
        if rectangular {
            Ok(TypeCounts { r, s })
        } else {
            Err(IngestError::CountShape)
        }
    }

    pub fn num_types(&self) -> usize {
        self.r.len()
    }

    pub fn n(&self) -> usize {
        self.r.first().map_or(0, Vec::len)
    }

    pub fn r(&self) -> &[Vec<u64>] {
        &self.r
    }

    pub fn s(&self) -> &[Vec<u64>] {
        &self.s
    }
}

/// Tallies exposure and retweet counts. A record with k hashtags of type t
/// contributes k to every count it enters; authors missing from the graph
/// are skipped.
pub fn count_types(
    records: &[TweetRecord],
    graph: &FollowerGraph,
    assignment: &TypeAssignment,
) -> TypeCounts {
    let num_types = assignment.num_types();
    let n = graph.n();
    let mut r = vec![vec![0u64; n]; num_types];
    let mut authored = vec![vec![0u64; n]; num_types];
    for rec in records {
        let Some(i) = graph.index_of(rec.user()) else {
            continue;
        };
        for tag in rec.hashtags() {
            let Some(t) = assignment.type_of(tag) else {
                continue;
            };
            authored[t][i] += 1;
            if rec.is_retweet() {
                r[t][i] += 1;
            }
        }
    }
    let mut s = vec![vec![0u64; n]; num_types];
    for &(follower, followee) in graph.edges() {
        for t in 0..num_types {
            s[t][follower] += authored[t][followee];
        }
    }
    TypeCounts { r, s }
}

/// Point estimates `r/s`, 0 where nothing was seen, capped at 0.99.
pub fn infer_mode(counts: &TypeCounts) -> Vec<Vec<f64>> {
    counts
        .r
        .iter()
        .zip(&counts.s)
        .map(|(rr, ss)| {
            rr.iter()
                .zip(ss)
                .map(|(&r, &s)| {
                    if s == 0 {
                        0.0
                    } else {
                        (r as f64 / s as f64).min(PROBABILITY_CAP)
                    }
                })
                .collect()
        })
        .collect()
}

/// Beta prior and sampling plan for posterior draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub a: f64,
    pub b: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig { a: 1.0, b: 100.0, samples: 2, seed: 0 }
    }
}

impl PriorConfig {
    fn validate(&self) -> Result<(), IngestError> {
        if self.a.is_finite() && self.a > 0.0 && self.b.is_finite() && self.b > 0.0 {
            Ok(())
        } else {
            Err(IngestError::InvalidPrior { a: self.a, b: self.b })
        }
    }
}

/// Posterior draws from Beta(a + r, b + s), one matrix per sample, clamped
/// to [0, 0.99]. Draw order is sample-major, then type, then user, so a
/// seed pins the output exactly.
pub fn infer_beta_samples(
    counts: &TypeCounts,
    prior: &PriorConfig,
) -> Result<Vec<Vec<Vec<f64>>>, IngestError> {
    prior.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(prior.seed);
    let mut out = Vec::with_capacity(prior.samples);
    for _ in 0..prior.samples {
        let mut matrix = Vec::with_capacity(counts.num_types());
        for (rr, ss) in counts.r.iter().zip(&counts.s) {
            let mut row = Vec::with_capacity(rr.len());
            for (&r, &s) in rr.iter().zip(ss) {
                let dist = Beta::new(prior.a + r as f64, prior.b + s as f64)
                    .expect("posterior parameters are positive and finite");
                row.push(dist.sample(&mut rng).clamp(0.0, PROBABILITY_CAP));
            }
            matrix.push(row);
        }
        out.push(matrix);
    }
    Ok(out)
}

/// Knobs for the end-to-end corpus pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub top_hashtags: usize,
    pub louvain_seed: u64,
    pub prior: PriorConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { top_hashtags: 2000, louvain_seed: 0, prior: PriorConfig::default() }
    }
}

/// Everything the pipeline extracts from one corpus.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Sorted user universe, index-aligned with the instances.
    pub users: Vec<String>,
    pub assignment: TypeAssignment,
    pub counts: TypeCounts,
    pub instance_mode: Instance,
    pub instance_samples: Vec<Instance>,
    pub warnings: Vec<InputWarning>,
}

/// Runs records and edges through graph building, hashtag clustering,
/// count tallies, and both inference modes.
pub fn run_pipeline(
    records: &[TweetRecord],
    edges: &[(String, String)],
    config: &PipelineConfig,
) -> Result<PipelineOutput, IngestError> {
    let (graph, warnings) = build_follower_graph(edges, records);
    let retained = top_hashtags(records, config.top_hashtags)?;
    let network = cooccurrence_network(records, &retained);
    let assignment = louvain_communities(&network, config.louvain_seed)?;
    let counts = count_types(records, &graph, &assignment);
    let instance_mode = Instance::new(
        graph.n(),
        assignment.num_types(),
        graph.edges().to_vec(),
        infer_mode(&counts),
    )?;
    let instance_samples = infer_beta_samples(&counts, &config.prior)?
        .into_iter()
        .map(|p| instance_mode.with_probabilities(p))
        .collect::<Result<_, _>>()?;
    Ok(PipelineOutput {
        users: graph.users,
        assignment,
        counts,
        instance_mode,
        instance_samples,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(tags: &[&str]) -> Vec<String> {
        tags.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn record_normalizes_hashtags() {
        let rec = TweetRecord::new("U1", ["#Foo", "FOO", "bar", "#", ""], false);
        assert_eq!(rec.user(), "U1");
        assert_eq!(rec.hashtags(), &["bar".to_string(), "foo".to_string()]);
        assert!(!rec.is_retweet());
    }

    #[test]
    fn jsonl_parses_and_skips_blanks() {
        let text = concat!(
            "{\"user\":\"alice\",\"hashtags\":[\"#A\",\"b\"],\"retweet\":true}\n",
            "\n",
            "{\"user\":\"bob\",\"hashtags\":[],\"retweet\":false,\"lang\":\"en\"}\n",
        );
        let records = parse_tweets_jsonl(text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].hashtags(), &["a".to_string(), "b".to_string()]);
        assert!(records[0].is_retweet());
        assert_eq!(records[1].user(), "bob");
    }

    #[test]
    fn jsonl_errors_carry_line_numbers() {
        let text = "{\"user\":\"a\",\"hashtags\":[],\"retweet\":false}\nnot json\n";
        match parse_tweets_jsonl(text) {
            Err(IngestError::TweetJson { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edges_tsv_parses_and_rejects_bad_rows() {
        let edges = parse_edges_tsv("a\tb\n\nb\tc\n").unwrap();
        assert_eq!(edges, vec![("a".into(), "b".into()), ("b".into(), "c".into())]);

        for (text, line) in [("a b\n", 1), ("a\tb\tc\n", 1), ("a\tb\nx\t\n", 2)] {
            match parse_edges_tsv(text) {
                Err(IngestError::BadEdgeRow { line: l }) => assert_eq!(l, line),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn graph_universe_includes_authors() {
        let edges = vec![("b".to_string(), "c".to_string())];
        let records = vec![TweetRecord::new("a", ["x"], false)];
        let (graph, warnings) = build_follower_graph(&edges, &records);
        assert_eq!(graph.users(), &["a".to_string(), "b".to_string(), "c".to_string()]);
        assert_eq!(graph.edges(), &[(1, 2)]);
        assert_eq!(graph.index_of("c"), Some(2));
        assert_eq!(graph.index_of("zz"), None);
        assert!(warnings.is_empty());
    }

    #[test]
    fn graph_drops_duplicates_and_self_loops_with_warnings() {
        let edges = vec![
            ("a".to_string(), "b".to_string()),
            ("a".to_string(), "b".to_string()),
            ("a".to_string(), "a".to_string()),
        ];
        let (graph, warnings) = build_follower_graph(&edges, &[]);
        assert_eq!(graph.edges(), &[(0, 1)]);
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn top_hashtags_ranks_by_record_count() {
        let records = vec![
            TweetRecord::new("u", ["a", "b"], false),
            TweetRecord::new("u", ["a", "b"], false),
            TweetRecord::new("u", ["a", "c"], false),
        ];
        assert_eq!(top_hashtags(&records, 2).unwrap(), strings(&["a", "b"]));
        assert_eq!(top_hashtags(&records, 10).unwrap(), strings(&["a", "b", "c"]));
        assert!(matches!(top_hashtags(&records, 0), Err(IngestError::ZeroTopCount)));
    }

    #[test]
    fn top_hashtags_breaks_ties_lexicographically() {
        let records = vec![
            TweetRecord::new("u", ["z", "m"], false),
            TweetRecord::new("u", ["z", "b"], false),
        ];
        // b and m tie at 1 record; the boundary slot goes to b.
        assert_eq!(top_hashtags(&records, 2).unwrap(), strings(&["z", "b"]));
    }

    #[test]
    fn cooccurrence_counts_pairs_per_record() {
        let records = vec![
            TweetRecord::new("u", ["a", "b", "c"], false),
            TweetRecord::new("u", ["a", "b"], false),
            TweetRecord::new("u", ["c"], false),
            TweetRecord::new("u", ["c", "ignored"], false),
        ];
        let net = cooccurrence_network(&records, &strings(&["a", "b", "c"]));
        assert_eq!(net.num_nodes(), 3);
        assert_eq!(net.weight("a", "b"), 2);
        assert_eq!(net.weight("a", "c"), 1);
        assert_eq!(net.weight("b", "c"), 1);
        assert_eq!(net.weight("c", "ignored"), 0);
        assert_eq!(net.total_weight(), 4);
    }

    /// Singleton assignment over tags that never co-occur: h0 -> 0, h1 -> 1, ...
    fn singleton_assignment(tags: &[&str]) -> TypeAssignment {
        louvain_communities(&cooccurrence_network(&[], &strings(tags)), 0).unwrap()
    }

    #[test]
    fn counts_follow_the_follow_edges() {
        // i follows j; j authored one record tagged h (type 0 of two).
        let assignment = singleton_assignment(&["g", "h"]);
        let edges = vec![("i".to_string(), "j".to_string())];
        let records = vec![TweetRecord::new("j", ["h"], false)];
        let (graph, _) = build_follower_graph(&edges, &records);
        let counts = count_types(&records, &graph, &assignment);
        let i = graph.index_of("i").unwrap();
        let j = graph.index_of("j").unwrap();
        assert_eq!(counts.s()[1][i], 1);
        assert_eq!(counts.s()[0][i], 0);
        // j follows nobody, so j's exposure row is zero.
        assert_eq!(counts.s()[0][j], 0);
        assert_eq!(counts.s()[1][j], 0);
        assert_eq!(counts.r()[1][i], 0);
    }

    #[test]
    fn retweet_with_two_same_type_tags_counts_twice() {
        // x and y co-occur, so they merge into one type.
        let records = vec![
            TweetRecord::new("i", ["x", "y"], true),
            TweetRecord::new("i", ["x", "y"], false),
        ];
        let net = cooccurrence_network(&records, &strings(&["x", "y"]));
        let assignment = louvain_communities(&net, 0).unwrap();
        assert_eq!(assignment.num_types(), 1);
        let (graph, _) = build_follower_graph(&[], &records);
        let counts = count_types(&records, &graph, &assignment);
        let i = graph.index_of("i").unwrap();
        assert_eq!(counts.r()[0][i], 2);
    }

    #[test]
    fn retweet_counts_are_conserved() {
        let assignment = singleton_assignment(&["a", "b", "c"]);
        let records = vec![
            TweetRecord::new("u", ["a", "b"], true),
            TweetRecord::new("u", ["c"], true),
            TweetRecord::new("u", ["a"], false),
            TweetRecord::new("u", ["untracked"], true),
        ];
        let (graph, _) = build_follower_graph(&[], &records);
        let counts = count_types(&records, &graph, &assignment);
        let u = graph.index_of("u").unwrap();
        let total: u64 = (0..counts.num_types()).map(|t| counts.r()[t][u]).sum();
        // Retained-tag occurrences in u's retweets: a, b, c.
        assert_eq!(total, 3);
    }

    #[test]
    fn mode_inference_examples() {
        let counts = TypeCounts::new(
            vec![vec![2], vec![0], vec![10]],
            vec![vec![50], vec![0], vec![10]],
        )
        .unwrap();
        let p = infer_mode(&counts);
        assert_eq!(p[0][0], 0.04);
        assert_eq!(p[1][0], 0.0);
        assert_eq!(p[2][0], 0.99);
    }

    #[test]
    fn count_shape_is_validated() {
        let bad = TypeCounts::new(vec![vec![1, 2]], vec![vec![1]]);
        assert!(matches!(bad, Err(IngestError::CountShape)));
    }

    #[test]
    fn beta_samples_are_reproducible_and_bounded() {
        let counts = TypeCounts::new(vec![vec![2, 0]], vec![vec![50, 0]]).unwrap();
        let prior = PriorConfig { seed: 11, ..PriorConfig::default() };
        let first = infer_beta_samples(&counts, &prior).unwrap();
        let second = infer_beta_samples(&counts, &prior).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.len(), 2);
        for matrix in &first {
            for v in matrix.iter().flatten() {
                assert!((0.0..=0.99).contains(v));
            }
        }
        let other = infer_beta_samples(&counts, &PriorConfig { seed: 12, ..prior }).unwrap();
        assert_ne!(first, other);
    }

    #[test]
    fn beta_sample_mean_matches_posterior() {
        let counts = TypeCounts::new(vec![vec![2]], vec![vec![50]]).unwrap();
        let prior = PriorConfig { samples: 4000, seed: 5, ..PriorConfig::default() };
        let draws = infer_beta_samples(&counts, &prior).unwrap();
        let mean: f64 = draws.iter().map(|m| m[0][0]).sum::<f64>() / draws.len() as f64;
        // Posterior Beta(3, 150) has mean 3/153.
        assert!((mean - 3.0 / 153.0).abs() < 2e-3);
    }

    #[test]
    fn prior_must_be_positive() {
        let counts = TypeCounts::new(vec![vec![0]], vec![vec![0]]).unwrap();
        let bad = PriorConfig { a: 0.0, ..PriorConfig::default() };
        assert!(matches!(
            infer_beta_samples(&counts, &bad),
            Err(IngestError::InvalidPrior { .. })
        ));
    }

    fn planted_corpus() -> (Vec<TweetRecord>, Vec<(String, String)>) {
        // Two hashtag groups that never cross: {a1, a2} and {b1, b2}.
        // u0 follows u1 and u2; u1 follows u2.
        let mut records = Vec::new();
        for _ in 0..3 {
            records.push(TweetRecord::new("u1", ["a1", "a2"], false));
            records.push(TweetRecord::new("u2", ["b1", "b2"], false));
        }
        records.push(TweetRecord::new("u0", ["a1"], true));
        records.push(TweetRecord::new("u0", ["b1"], true));
        records.push(TweetRecord::new("u0", ["b2"], true));
        let edges = vec![
            ("u0".to_string(), "u1".to_string()),
            ("u0".to_string(), "u2".to_string()),
            ("u1".to_string(), "u2".to_string()),
        ];
        (records, edges)
    }

    #[test]
    fn pipeline_recovers_planted_structure() {
        let (records, edges) = planted_corpus();
        let config = PipelineConfig::default();
        let out = run_pipeline(&records, &edges, &config).unwrap();

        assert_eq!(out.users, strings(&["u0", "u1", "u2"]));
        assert_eq!(out.assignment.num_types(), 2);
        // Group A is type 0 (smallest member a1), group B type 1.
        assert_eq!(out.assignment.type_of("a1"), Some(0));
        assert_eq!(out.assignment.type_of("a2"), Some(0));
        assert_eq!(out.assignment.type_of("b1"), Some(1));
        assert_eq!(out.assignment.type_of("b2"), Some(1));

        let u0 = 0;
        // u0 sees 6 type-0 tags from u1 and 6 type-1 tags from u2, and
        // retweeted one type-0 and two type-1 tags.
        assert_eq!(out.counts.s()[0][u0], 6);
        assert_eq!(out.counts.s()[1][u0], 6);
        assert_eq!(out.counts.r()[0][u0], 1);
        assert_eq!(out.counts.r()[1][u0], 2);
        assert_eq!(out.instance_mode.p()[0][u0], 1.0 / 6.0);
        assert_eq!(out.instance_mode.p()[1][u0], 2.0 / 6.0);

        assert_eq!(out.instance_samples.len(), 2);
        for sample in &out.instance_samples {
            assert_eq!(sample.edges(), out.instance_mode.edges());
        }
        assert!(out.warnings.is_empty());

        // The whole pipeline is deterministic for fixed seeds.
        let again = run_pipeline(&records, &edges, &config).unwrap();
        assert_eq!(again.instance_mode, out.instance_mode);
        assert_eq!(again.instance_samples, out.instance_samples);
    }
}
