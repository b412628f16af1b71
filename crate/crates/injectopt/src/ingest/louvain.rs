//! Deterministic weighted Louvain community detection for hashtag networks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HashtagNetwork, IngestError};

/// Hashtag-to-community assignment. Community ids are dense from 0 and
/// ordered by each community's lexicographically smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeAssignment {
    by_hashtag: BTreeMap<String, usize>,
    num_types: usize,
}

impl TypeAssignment {
    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn type_of(&self, hashtag: &str) -> Option<usize> {
        self.by_hashtag.get(hashtag).copied()
    }

    /// `(hashtag, community)` pairs in hashtag order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.by_hashtag.iter().map(|(h, &c)| (h.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.by_hashtag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hashtag.is_empty()
    }
}

/// CSV rendering, one `hashtag,community` row per tag in lexicographic order.
pub fn assignment_to_csv(assignment: &TypeAssignment) -> String {
    let mut out = String::from("hashtag,community\n");
    for (h, c) in assignment.iter() {
        out.push_str(&format!("{h},{c}\n"));
    }
    out
}

/// Weighted modularity of an assignment over the network. Zero-weight
/// networks score 0 by convention.
pub fn modularity(network: &HashtagNetwork, assignment: &TypeAssignment) -> f64 {
    let m2 = 2.0 * network.total_weight() as f64;
    if m2 == 0.0 {
        return 0.0;
    }
    let com: Vec<usize> = network
        .nodes()
        .iter()
        .map(|h| assignment.type_of(h).expect("assignment covers the network"))
        .collect();
    let mut internal = vec![0.0; assignment.num_types()];
    let mut tot = vec![0.0; assignment.num_types()];
    for ((a, b), w) in network.edges() {
        let w = w as f64;
        tot[com[a]] += w;
        tot[com[b]] += w;
        if com[a] == com[b] {
            internal[com[a]] += w;
        }
    }
    internal
        .iter()
        .zip(&tot)
        .map(|(&i, &t)| 2.0 * i / m2 - (t / m2) * (t / m2))
        .sum()
}

struct LevelGraph {
    /// Neighbor lists for distinct endpoints, each edge stored both ways.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight per node, counted once.
    self_w: Vec<f64>,
    /// Weighted degree, self-loops counted twice.
    k: Vec<f64>,
    /// Sum of all degrees, i.e. twice the total weight.
    m2: f64,
}

impl LevelGraph {
    fn len(&self) -> usize {
        self.adj.len()
    }
}

const GAIN_TOL: f64 = 1e-9;

fn build_level(n: usize, self_w: Vec<f64>, between: BTreeMap<(usize, usize), f64>) -> LevelGraph {
    let mut adj = vec![Vec::new(); n];
    for (&(a, b), &w) in &between {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut k = vec![0.0; n];
    for u in 0..n {
        k[u] = adj[u].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self_w[u];
    }
    let m2 = k.iter().sum();
    LevelGraph { adj, self_w, k, m2 }
}

/// Greedy local moves until no single relocation raises modularity. Nodes
/// are scanned in index order; the rng only breaks exact score ties, and a
/// tie with staying put always stays.
fn one_level(g: &LevelGraph, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = g.len();
    let mut com: Vec<usize> = (0..n).collect();
    let mut tot = g.k.clone();
    let mut moved_any = false;
    loop {
        let mut moves = 0usize;
        for u in 0..n {
            let a = com[u];
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for &(v, w) in &g.adj[u] {
                *links.entry(com[v]).or_insert(0.0) += w;
            }
            tot[a] -= g.k[u];
            // Insert gain into c is l_uc/m - tot_c*k_u/(2m^2); comparing
            // 2m*l_uc - tot_c*k_u ranks candidates identically.
            let score = |c: usize, l: f64| g.m2 * l - tot[c] * g.k[u];
            let stay = score(a, links.get(&a).copied().unwrap_or(0.0));
            let mut best_score = stay;
            let mut ties: Vec<usize> = Vec::new();
            for (&c, &l) in &links {
                if c == a {
                    continue;
                }
                let s = score(c, l);
                if s > best_score + GAIN_TOL {
                    best_score = s;
                    ties.clear();
                    ties.push(c);
                } else if !ties.is_empty() && (s - best_score).abs() <= GAIN_TOL {
                    ties.push(c);
                }
            }
            let target = match ties.len() {
                0 => a,
                1 => ties[0],
                len => ties[rng.random_range(0..len)],
            };
            tot[target] += g.k[u];
            if target != a {
                com[u] = target;
                moves += 1;
            }
        }
        if moves == 0 {
            break;
        }
        moved_any = true;
    }
    (com, moved_any)
}

/// Renumbers labels densely by first occurrence; returns the per-node ids
/// and the community count.
fn dense_relabel(com: &[usize]) -> (Vec<usize>, usize) {
    let mut map: Vec<Option<usize>> = vec![None; com.len()];
    let mut next = 0usize;
    let mut out = Vec::with_capacity(com.len());
    for &c in com {
        let id = *map[c].get_or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
        out.push(id);
    }
    (out, next)
}

/// Collapses each community into one node; internal weight becomes a
/// self-loop, cross-community weights are summed.
fn aggregate(g: &LevelGraph, com: &[usize], num: usize) -> LevelGraph {
    let mut self_w = vec![0.0; num];
    let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for u in 0..g.len() {
        self_w[com[u]] += g.self_w[u];
        for &(v, w) in &g.adj[u] {
            if v < u {
                continue;
            }
            let (a, b) = (com[u], com[v]);
            if a == b {
                self_w[a] += w;
            } else {
                let key = if a < b { (a, b) } else { (b, a) };
                *between.entry(key).or_insert(0.0) += w;
            }
        }
    }
    build_level(num, self_w, between)
}

/// Two-phase Louvain over the co-occurrence network. Deterministic for a
/// fixed seed; a zero-weight network keeps every node in its own community.
pub fn louvain_communities(
    network: &HashtagNetwork,
    seed: u64,
) -> Result<TypeAssignment, IngestError> {
    let nodes = network.nodes();
    let n = nodes.len();
    if n == 0 {
        return Err(IngestError::EmptyNetwork);
    }
    let mut membership: Vec<usize> = (0..n).collect();
    if network.total_weight() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let between = network
            .edges()
            .map(|((a, b), w)| ((a, b), w as f64))
            .collect();
        let mut level = build_level(n, vec![0.0; n], between);
        loop {
            let (com, moved) = one_level(&level, &mut rng);
            if !moved {
                break;
            }
            let (dense, num) = dense_relabel(&com);
            for slot in membership.iter_mut() {
                *slot = dense[*slot];
            }
            if num == level.len() {
                break;
            }
            level = aggregate(&level, &dense, num);
        }
    }
    // Nodes are lexicographically sorted, so first-occurrence renumbering
    // orders communities by their smallest member hashtag.
    let (ids, num_types) = dense_relabel(&membership);
    let by_hashtag = nodes.iter().cloned().zip(ids).collect();
    Ok(TypeAssignment { by_hashtag, num_types })
}
