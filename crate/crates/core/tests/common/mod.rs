//! Random fixtures and brute-force reference implementations shared by the
//! integration and acceptance tests. Nothing here calls into the scoring code
//! under test.
#![allow(dead_code, clippy::approx_constant)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use clir_core::analysis::{AnalyzerConfig, Language, Stemmer};
use clir_core::dense::DenseVector;
use clir_core::sparse::SparseVector;
use clir_core::{Document, Qrels, Run, RunEntry};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Descending score, ascending doc id, cut at `k`.
pub fn sort_hits(mut hits: Vec<(String, f64)>, k: usize) -> Vec<(String, f64)> {
    hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    hits.truncate(k);
    hits
}

/// Analyzer that only splits and lowercases, so the oracle can see the same tokens.
pub fn plain_analyzer() -> AnalyzerConfig {
    AnalyzerConfig::for_language(Language::En).with_stopwords(HashSet::new()).with_stemmer(Stemmer::None).unwrap()
}

/// Documents over a skewed vocabulary `t0..t{vocab}`, returned as token lists.
pub fn random_token_docs(r: &mut impl Rng, n: usize, vocab: usize, max_len: usize) -> Vec<(String, Vec<String>)> {
    (0..n)
        .map(|i| {
            let len = r.gen_range(1..=max_len);
            let toks = (0..len).map(|_| skewed_term(r, vocab)).collect();
            (format!("d{i:06}"), toks)
        })
        .collect()
}

pub fn skewed_term(r: &mut impl Rng, vocab: usize) -> String {
    let u: f64 = r.gen();
    format!("t{}", ((u * u * u) * vocab as f64) as usize)
}

pub fn to_documents(docs: &[(String, Vec<String>)]) -> Vec<Document> {
    docs.iter().map(|(id, toks)| Document::new(id.clone(), toks.join(" "))).collect()
}

/// Exhaustive BM25 with `ln(1 + (N - df + 0.5) / (df + 0.5))`, query terms
/// weighted by multiplicity and summed in sorted term order.
pub fn bm25_oracle(docs: &[(String, Vec<String>)], query: &[String], k1: f64, b: f64, k: usize) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n;
    let mut qtf: BTreeMap<&str, f64> = BTreeMap::new();
    for t in query {
        *qtf.entry(t).or_default() += 1.0;
    }
    let df: HashMap<&str, f64> =
        qtf.keys().map(|t| (*t, docs.iter().filter(|(_, toks)| toks.iter().any(|x| x == t)).count() as f64)).collect();
    let mut hits = Vec::new();
    for (id, toks) in docs {
        let dl = toks.len() as f64;
        let mut score = 0.0;
        let mut matched = false;
        for (t, w) in &qtf {
            let tf = toks.iter().filter(|x| x == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            matched = true;
            let idf = (1.0 + (n - df[t] + 0.5) / (df[t] + 0.5)).ln();
            score += w * idf * tf / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if matched {
            hits.push((id.clone(), score));
        }
    }
    sort_hits(hits, k)
}

pub fn random_sparse(r: &mut impl Rng, vocab: usize, nnz: usize) -> SparseVector {
    let mut v = SparseVector::new();
    for _ in 0..nnz {
        let w = f64::from(r.gen_range(0..400u32)) / 100.0 + r.gen_range(0.0..0.01);
        v.insert(format!("w{}", r.gen_range(0..vocab)), w).unwrap();
    }
    v
}

pub fn round_half_up(w: f64, scale: u32) -> u64 {
    (w * f64::from(scale) + 0.5).floor() as u64
}

/// Inner products of quantized weights, computed doc by doc.
pub fn impact_oracle(
    docs: &[(String, SparseVector)],
    query: &SparseVector,
    scale: u32,
    k: usize,
) -> Vec<(String, f64)> {
    let hits = docs
        .iter()
        .map(|(id, d)| {
            let s: u64 = query.iter().map(|(t, w)| round_half_up(w, scale) * round_half_up(d.get(t), scale)).sum();
            (id.clone(), s as f64)
        })
        .filter(|(_, s)| *s > 0.0)
        .collect();
    sort_hits(hits, k)
}

pub fn random_dense(r: &mut impl Rng, dim: usize) -> DenseVector {
    DenseVector::new((0..dim).map(|_| r.gen_range(-1.0f32..1.0)).collect()).unwrap()
}

pub fn dense_oracle(docs: &[(String, DenseVector)], q: &DenseVector, k: usize) -> Vec<(String, f64)> {
    let hits = docs
        .iter()
        .map(|(id, v)| {
            let mut s = 0.0f64;
            for (a, b) in q.values().iter().zip(v.values()) {
                s += f64::from(*a) * f64::from(*b);
            }
            (id.clone(), s)
        })
        .collect();
    sort_hits(hits, k)
}

/// A run whose topics each hold a random subset of `pool` documents, scored
/// by strictly decreasing values with occasional ties.
pub fn random_run(r: &mut impl Rng, tag: &str, topics: &[String], pool: usize, max_depth: usize) -> Run {
    let mut run = Run::new(tag);
    for t in topics {
        let mut ids: Vec<usize> = (0..pool).collect();
        ids.shuffle(r);
        ids.truncate(r.gen_range(1..=max_depth.min(pool)));
        let mut score = 100.0;
        let mut entries: Vec<RunEntry> = Vec::new();
        for id in ids {
            if r.gen_bool(0.8) {
                score -= r.gen_range(0.01..1.0);
            }
            entries.push(RunEntry { doc_id: format!("doc{id:04}"), score });
        }
        // Order equal scores by doc id so the list is already in canonical order.
        entries.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap().then_with(|| a.doc_id.cmp(&b.doc_id)));
        run.insert_topic(t.clone(), entries).unwrap();
    }
    run
}

pub fn topic_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{}", 100 + i)).collect()
}

/// Judgments over the same document pool used by [`random_run`].
pub fn random_qrels(r: &mut impl Rng, topics: &[String], pool: usize, judged: usize) -> Qrels {
    let mut q = Qrels::new();
    for t in topics {
        let mut ids: Vec<usize> = (0..pool).collect();
        ids.shuffle(r);
        for id in ids.into_iter().take(r.gen_range(1..=judged)) {
            q.insert(t.clone(), format!("doc{id:04}"), r.gen_range(0..=3));
        }
    }
    q
}

pub fn reference_ndcg(ranking: &[&str], judged: &HashMap<String, u32>, k: usize) -> f64 {
    let mut dcg = 0.0;
    for (i, d) in ranking.iter().enumerate() {
        if i >= k {
            break;
        }
        let g = judged.get(*d).copied().unwrap_or(0) as f64;
        dcg += g / (2.0 + i as f64).log2();
    }
    let mut ideal: Vec<u32> = judged.values().copied().collect();
    ideal.sort_by(|a, b| b.cmp(a));
    let mut idcg = 0.0;
    for (i, g) in ideal.iter().enumerate() {
        if i >= k {
            break;
        }
        idcg += *g as f64 / (2.0 + i as f64).log2();
    }
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

pub fn reference_recall(ranking: &[&str], judged: &HashMap<String, u32>, k: usize) -> f64 {
    let rel: BTreeSet<&str> = judged.iter().filter(|(_, g)| **g > 0).map(|(d, _)| d.as_str()).collect();
    if rel.is_empty() {
        return 0.0;
    }
    let got = ranking.iter().take(k).filter(|d| rel.contains(*d)).count();
    got as f64 / rel.len() as f64
}

pub fn reference_ap(ranking: &[&str], judged: &HashMap<String, u32>) -> f64 {
    let rel: BTreeSet<&str> = judged.iter().filter(|(_, g)| **g > 0).map(|(d, _)| d.as_str()).collect();
    if rel.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, d) in ranking.iter().enumerate() {
        if rel.contains(d) {
            let upto = ranking[..=i].iter().filter(|x| rel.contains(*x)).count();
            total += upto as f64 / (i + 1) as f64;
        }
    }
    total / rel.len() as f64
}

/// `Σ 1/(k + rank)` straight from the definition.
pub fn reference_rrf(runs: &[Run], topic: &str, k_rrf: f64, depth: usize) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for run in runs {
        for (i, d) in run.ranking(topic).into_iter().take(depth).enumerate() {
            *out.entry(d.to_string()).or_default() += 1.0 / (k_rrf + (i + 1) as f64);
        }
    }
    out
}

/// Corpus where one relevant document sits near rank 900 for query `q` and
/// shares term `z` with the ten best-ranked documents; a second relevant
/// document contains `z` but not `q`.
pub struct PrfFixture {
    pub docs: Vec<Document>,
    pub query: Vec<String>,
    pub deep_relevant: String,
    pub unreachable_relevant: String,
}

pub fn prf_fixture() -> PrfFixture {
    let mut docs = Vec::new();
    for i in 0..10 {
        docs.push(Document::new(format!("top{i:02}"), "q q q z"));
    }
    for i in 0..950 {
        docs.push(Document::new(format!("mid{i:04}"), format!("q{}", " pad".repeat(i + 1))));
    }
    docs.push(Document::new("rel-deep", format!("q z{}", " pad".repeat(897))));
    docs.push(Document::new("rel-z", "z other words here"));
    PrfFixture {
        docs,
        query: vec!["q".to_string()],
        deep_relevant: "rel-deep".into(),
        unreachable_relevant: "rel-z".into(),
    }
}

/// Paired samples of 45 topics with scipy.stats.ttest_rel(system, baseline)
/// results `(t, p)`.
pub struct TTestFixture {
    pub baseline: [f64; 45],
    pub system: [f64; 45],
    pub t: f64,
    pub p: f64,
}

pub const TTEST_FIXTURES: [TTestFixture; 3] = [
    TTestFixture {
        baseline: [
            0.4798, 0.4464, 0.6227, 0.6588, 0.4327, 0.6345, 0.6471, 0.4961, 0.3564, 0.5535, 0.5206, 0.6801, 0.5931,
            0.4468, 0.7730, 0.4016, 0.6583, 0.6990, 0.5224, 0.0852, 0.0912, 0.1399, 0.5767, 0.0831, 0.5752, 0.3649,
            0.3270, 0.1654, 0.1298, 0.1440, 0.6334, 0.1809, 0.5823, 0.5764, 0.4422, 0.7703, 0.3300, 0.0766, 0.4216,
            0.2019, 0.1432, 0.7944, 0.3188, 0.5691, 0.2077,
        ],
        system: [
            0.5179, 0.3180, 0.6135, 0.6133, 0.4822, 0.7467, 0.7187, 0.4332, 0.4395, 0.5740, 0.6198, 0.6760, 0.6286,
            0.4610, 0.7742, 0.5410, 0.7483, 0.7512, 0.4298, 0.0476, 0.1104, 0.2042, 0.4571, 0.1665, 0.5020, 0.2840,
            0.4269, 0.1328, 0.1723, 0.2389, 0.6966, 0.1077, 0.5490, 0.5408, 0.4863, 0.8100, 0.4319, 0.1307, 0.5118,
            0.2000, 0.1313, 0.6849, 0.2799, 0.4477, 0.1555,
        ],
        t: 0.9140870524534882,
        p: 0.3656532211526766,
    },
    TTestFixture {
        baseline: [
            0.2063, 0.5249, 0.0500, 0.3479, 0.2701, 0.6277, 0.3823, 0.7404, 0.6803, 0.1950, 0.7412, 0.4913, 0.1379,
            0.1408, 0.3875, 0.4067, 0.7846, 0.1893, 0.1614, 0.5739, 0.4781, 0.1538, 0.2747, 0.2210, 0.4302, 0.2015,
            0.5955, 0.4225, 0.1073, 0.4204, 0.4936, 0.4313, 0.2188, 0.7538, 0.2122, 0.2016, 0.3695, 0.2879, 0.6354,
            0.1311, 0.6658, 0.5064, 0.6638, 0.1575, 0.3878,
        ],
        system: [
            0.3173, 0.6207, 0.1985, 0.4668, 0.3851, 0.7333, 0.5510, 0.9213, 0.6570, 0.3896, 0.8777, 0.5718, 0.2793,
            0.1643, 0.5001, 0.5644, 0.8668, 0.1686, 0.2654, 0.6606, 0.6500, 0.2988, 0.4746, 0.3260, 0.5675, 0.3348,
            0.6652, 0.5393, 0.3392, 0.4939, 0.6243, 0.5282, 0.3617, 0.8138, 0.3850, 0.2981, 0.4587, 0.3633, 0.7580,
            0.1864, 0.8105, 0.5747, 0.7568, 0.3219, 0.5620,
        ],
        t: 14.79475114592588,
        p: 1.0883440852579723e-18,
    },
    TTestFixture {
        baseline: [
            0.7212, 0.2647, 0.5219, 0.7514, 0.0561, 0.4753, 0.6520, 0.1162, 0.4305, 0.4335, 0.7355, 0.7769, 0.1171,
            0.0649, 0.3980, 0.4245, 0.1989, 0.6185, 0.2287, 0.6338, 0.1995, 0.7114, 0.1434, 0.5352, 0.4045, 0.1784,
            0.2083, 0.5152, 0.5229, 0.5743, 0.6473, 0.7179, 0.7896, 0.7330, 0.7568, 0.4844, 0.3814, 0.7838, 0.2085,
            0.1724, 0.5342, 0.7983, 0.5441, 0.6960, 0.5174,
        ],
        system: [
            0.5856, 0.3223, 0.4866, 0.8639, 0.0321, 0.5144, 0.6251, 0.1352, 0.4772, 0.3886, 0.7111, 0.9221, 0.1109,
            0.3031, 0.3963, 0.2722, 0.0118, 0.7554, 0.1834, 0.5242, 0.3646, 0.6855, 0.0928, 0.6078, 0.3999, 0.2106,
            0.2177, 0.4346, 0.4155, 0.6532, 0.6819, 0.6942, 0.5066, 0.6579, 0.7390, 0.6044, 0.4250, 0.9590, 0.0000,
            0.0932, 0.5500, 0.6569, 0.5414, 0.7324, 0.5625,
        ],
        t: -0.384863867451895,
        p: 0.702192378312503,
    },
];

pub fn per_topic(values: &[f64]) -> BTreeMap<String, f64> {
    values.iter().enumerate().map(|(i, v)| (format!("topic{i:03}"), *v)).collect()
}
