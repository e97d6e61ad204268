//! Corpus curation: MinHash deduplication, compile filtering, quality filtering.
//!
//! Raw entries go through three passes, in order: near-duplicate removal
//! (greedy first-keeper scan over MinHash signatures), a standalone compile
//! check, and a metadata quality gate. The output pool is what problem
//! augmentation consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Harness;

/// Difficulty label carried by the raw corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Complexity {
    Basic,
    Intermediate,
    Advanced,
    Expert,
}

/// One raw corpus entry, as read from the input JSONL.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEntry {
    pub id: String,
    pub description: String,
    #[serde(rename = "code")]
    pub reference_code: String,
    pub rank_score: i64,
    pub complexity: Complexity,
}

/// MinHash signature over token shingles of a source text.
#[derive(Debug, Clone, PartialEq)]
pub struct MinHashSignature {
    pub hashes: Vec<u64>,
    pub num_hashes: usize,
    pub shingle_width: usize,
    pub seed: u64,
}

/// Counts for one curation run. `input_count` always equals
/// `kept + dedup_removed + compile_removed + quality_removed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurationReport {
    pub input_count: usize,
    pub dedup_removed: usize,
    pub compile_removed: usize,
    pub quality_removed: usize,
    pub kept: usize,
    pub kept_ids: Vec<String>,
}

/// One removal from the dedup pass: which kept entry shadowed it and at what
/// estimated similarity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DedupRemoval {
    pub removed_id: String,
    pub kept_id: String,
    pub estimated_similarity: f64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_bytes(bytes: &[u8], seed: u64) -> u64 {
    let mut h = splitmix64(seed);
    for &b in bytes {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
        h ^= h >> 29;
    }
    splitmix64(h)
}

/// Strip `//` line comments and `/* */` block comments, leaving string
/// literals intact.
pub fn strip_verilog_comments(src: &str) -> String {
    let bytes = src.as_bytes();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => {
                // copy string literal verbatim
                out.push('"');
                i += 1;
                while i < bytes.len() {
                    let c = bytes[i];
                    out.push(c as char);
                    i += 1;
                    if c == b'\\' && i < bytes.len() {
                        out.push(bytes[i] as char);
                        i += 1;
                    } else if c == b'"' {
                        break;
                    }
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                    i += 1;
                }
                i = (i + 2).min(bytes.len());
                out.push(' ');
            }
            c => {
                out.push(c as char);
                i += 1;
            }
        }
    }
    out
}

/// Tokenize for shingling: comments stripped, lowercased, split on whitespace.
pub fn shingle_tokens(text: &str) -> Vec<String> {
    strip_verilog_comments(text)
        .to_lowercase()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// The set of shingle hashes for a token stream. Texts shorter than the
/// shingle width contribute a single shingle covering all tokens.
fn shingle_set(tokens: &[String], width: usize) -> Vec<u64> {
    let mut set = std::collections::BTreeSet::new();
    if tokens.len() < width {
        let joined = tokens.join(" ");
        set.insert(hash_bytes(joined.as_bytes(), 0));
    } else {
        for window in tokens.windows(width) {
            let joined = window.join(" ");
            set.insert(hash_bytes(joined.as_bytes(), 0));
        }
    }
    set.into_iter().collect()
}

/// Compute a MinHash signature over token shingles.
///
/// Deterministic under `(text, num_hashes, shingle_width, seed)`; texts with
/// identical shingle sets yield identical signatures regardless of order.
pub fn shingle_signature(
    text: &str,
    num_hashes: usize,
    shingle_width: usize,
    seed: u64,
) -> Result<MinHashSignature> {
    assert!(num_hashes >= 1, "num_hashes must be >= 1");
    assert!(shingle_width >= 1, "shingle_width must be >= 1");
    let tokens = shingle_tokens(text);
    if tokens.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let shingles = shingle_set(&tokens, shingle_width);
    let mixers: Vec<u64> = (0..num_hashes as u64)
        .map(|i| splitmix64(seed ^ GOLDEN.wrapping_mul(i + 1)))
        .collect();
    let mut hashes = vec![u64::MAX; num_hashes];
    for &s in &shingles {
        for (slot, &mixer) in hashes.iter_mut().zip(mixers.iter()) {
            let h = splitmix64(s ^ mixer);
            if h < *slot {
                *slot = h;
            }
        }
    }
    Ok(MinHashSignature {
        hashes,
        num_hashes,
        shingle_width,
        seed,
    })
}

/// Estimated Jaccard similarity: fraction of matching signature positions.
pub fn estimate_similarity(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64> {
    if a.num_hashes != b.num_hashes || a.shingle_width != b.shingle_width || a.seed != b.seed {
        return Err(Error::IncompatibleSignatures(format!(
            "({}, w={}, seed={}) vs ({}, w={}, seed={})",
            a.num_hashes, a.shingle_width, a.seed, b.num_hashes, b.shingle_width, b.seed
        )));
    }
    let matching = a
        .hashes
        .iter()
        .zip(b.hashes.iter())
        .filter(|(x, y)| x == y)
        .count();
    Ok(matching as f64 / a.num_hashes as f64)
}

/// Exact Jaccard similarity over shingle sets. Test oracle and audit tool;
/// not on the dedup hot path.
pub fn exact_jaccard(a: &str, b: &str, shingle_width: usize) -> f64 {
    let ta = shingle_tokens(a);
    let tb = shingle_tokens(b);
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let sa: std::collections::BTreeSet<u64> = shingle_set(&ta, shingle_width).into_iter().collect();
    let sb: std::collections::BTreeSet<u64> = shingle_set(&tb, shingle_width).into_iter().collect();
    let inter = sa.intersection(&sb).count();
    let union = sa.union(&sb).count();
    if union == 0 {
        return 1.0;
    }
    inter as f64 / union as f64
}

/// Tunables for the dedup pass.
#[derive(Debug, Clone)]
pub struct DedupParams {
    pub threshold: f64,
    pub num_hashes: usize,
    pub shingle_width: usize,
    pub seed: u64,
}

impl Default for DedupParams {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            num_hashes: 256,
            shingle_width: 5,
            seed: 0,
        }
    }
}

/// Greedy first-keeper dedup over input order.
///
/// The earliest entry of each duplicate group is kept; every removed entry
/// records the kept entry it matched and the estimated similarity. Entries
/// with empty token streams are kept untouched (nothing to compare).
pub fn deduplicate(
    entries: &[RawEntry],
    params: &DedupParams,
) -> Result<(Vec<RawEntry>, Vec<DedupRemoval>)> {
    assert!(
        params.threshold > 0.0 && params.threshold <= 1.0,
        "threshold must be in (0, 1]"
    );
    // Signatures are independent per entry; compute in parallel, merge in
    // input order so the scan below is scheduling-independent.
    use rayon::prelude::*;
    let sigs: Vec<Option<MinHashSignature>> = entries
        .par_iter()
        .map(|e| {
            shingle_signature(
                &e.reference_code,
                params.num_hashes,
                params.shingle_width,
                params.seed,
            )
            .ok()
        })
        .collect();

    let mut kept_idx: Vec<usize> = Vec::new();
    let mut removed = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let mut shadowed_by: Option<(usize, f64)> = None;
        if let Some(sig) = sigs[i].as_ref() {
            for &ki in &kept_idx {
                if let Some(ksig) = sigs[ki].as_ref() {
                    let est = estimate_similarity(sig, ksig)?;
                    if est >= params.threshold {
                        shadowed_by = Some((ki, est));
                        break;
                    }
                }
            }
        }
        match shadowed_by {
            Some((ki, est)) => removed.push(DedupRemoval {
                removed_id: entry.id.clone(),
                kept_id: entries[ki].id.clone(),
                estimated_similarity: est,
            }),
            None => kept_idx.push(i),
        }
    }
    let kept = kept_idx.into_iter().map(|i| entries[i].clone()).collect();
    Ok((kept, removed))
}

/// Quality gate: rank score at least `min_score` and complexity above Basic.
pub fn quality_filter(entry: &RawEntry, min_score: i64) -> bool {
    entry.rank_score >= min_score && entry.complexity != Complexity::Basic
}

/// Standalone compile check of the reference code (no testbench attached).
pub fn compile_filter(entry: &RawEntry, harness: &Harness, workdir: &std::path::Path) -> Result<bool> {
    let compiled = harness.compile(&entry.reference_code, "", workdir)?;
    Ok(compiled.result.ok)
}

/// Full curation pass: dedup, then compile, then quality.
pub fn curate(
    entries: &[RawEntry],
    params: &DedupParams,
    min_score: i64,
    harness: &Harness,
    workdir: &std::path::Path,
) -> Result<(Vec<RawEntry>, CurationReport, Vec<DedupRemoval>)> {
    let input_count = entries.len();
    let (deduped, removals) = deduplicate(entries, params)?;
    let dedup_removed = removals.len();

    // Compile checks run in parallel; verdicts are merged in input order.
    use rayon::prelude::*;
    let verdicts: Vec<Result<bool>> = deduped
        .par_iter()
        .map(|e| {
            let dir = tempfile::tempdir_in(workdir)?;
            compile_filter(e, harness, dir.path())
        })
        .collect();
    let mut compiled = Vec::new();
    for (entry, verdict) in deduped.into_iter().zip(verdicts) {
        if verdict? {
            compiled.push(entry);
        }
    }
    let compile_removed = input_count - dedup_removed - compiled.len();

    let kept: Vec<RawEntry> = compiled
        .into_iter()
        .filter(|e| quality_filter(e, min_score))
        .collect();
    let quality_removed = input_count - dedup_removed - compile_removed - kept.len();

    let report = CurationReport {
        input_count,
        dedup_removed,
        compile_removed,
        quality_removed,
        kept: kept.len(),
        kept_ids: kept.iter().map(|e| e.id.clone()).collect(),
    };
    Ok((kept, report, removals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, code: &str) -> RawEntry {
        RawEntry {
            id: id.to_string(),
            description: String::new(),
            reference_code: code.to_string(),
            rank_score: 15,
            complexity: Complexity::Intermediate,
        }
    }

    fn random_doc(rng: &mut impl rand::Rng, len: usize, vocab: usize) -> String {
        (0..len)
            .map(|_| format!("tok{}", rng.gen_range(0..vocab)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn signature_deterministic() {
        let text = "module m; assign y = a & b; endmodule";
        let a = shingle_signature(text, 64, 5, 7).unwrap();
        let b = shingle_signature(text, 64, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = shingle_signature(text, 64, 5, 8).unwrap();
        assert_ne!(a.hashes, c.hashes);
    }

    #[test]
    fn comment_stripping_and_case() {
        // Same token stream after stripping comments and lowercasing.
        let a = "module M; // a comment\nassign Y = A; endmodule";
        let b = "module m; /* block */ assign y = a; endmodule";
        let sa = shingle_signature(a, 64, 3, 1).unwrap();
        let sb = shingle_signature(b, 64, 3, 1).unwrap();
        assert_eq!(sa.hashes, sb.hashes);
    }

    #[test]
    fn empty_document_rejected() {
        assert!(matches!(
            shingle_signature("// only a comment\n", 16, 5, 0),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn disjoint_sets_estimate_near_zero() {
        let a: String = (0..100).map(|i| format!("a{i} ")).collect();
        let b: String = (0..100).map(|i| format!("b{i} ")).collect();
        let sa = shingle_signature(&a, 256, 5, 3).unwrap();
        let sb = shingle_signature(&b, 256, 5, 3).unwrap();
        let est = estimate_similarity(&sa, &sb).unwrap();
        assert!(est < 0.05, "disjoint estimate {est}");
    }

    #[test]
    fn similarity_identity_and_ratio() {
        let s = shingle_signature("a b c d e f g h", 256, 5, 0).unwrap();
        assert_eq!(estimate_similarity(&s, &s).unwrap(), 1.0);

        let mut other = s.clone();
        // Force exactly 230 of 256 matching positions.
        for slot in other.hashes.iter_mut().take(26) {
            *slot = slot.wrapping_add(1);
        }
        assert_eq!(estimate_similarity(&s, &other).unwrap(), 0.8984375);
    }

    #[test]
    fn incompatible_signatures_rejected() {
        let a = shingle_signature("a b c d e", 64, 5, 0).unwrap();
        let b = shingle_signature("a b c d e", 64, 5, 1).unwrap();
        assert!(matches!(
            estimate_similarity(&a, &b),
            Err(Error::IncompatibleSignatures(_))
        ));
    }

    #[test]
    fn estimate_tracks_exact_jaccard() {
        // Signature estimate within 3*sqrt(J(1-J)/256) of the exact value.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let base = random_doc(&mut rng, 120, 40);
            let suffix = random_doc(&mut rng, 30, 40);
            let other = format!("{base} {suffix}");
            let j = exact_jaccard(&base, &other, 5);
            let sa = shingle_signature(&base, 256, 5, 5).unwrap();
            let sb = shingle_signature(&other, 256, 5, 5).unwrap();
            let est = estimate_similarity(&sa, &sb).unwrap();
            let tol = 3.0 * (j * (1.0 - j) / 256.0).sqrt();
            assert!(
                (est - j).abs() <= tol.max(0.02),
                "est {est} vs exact {j} (tol {tol})"
            );
        }
    }

    #[test]
    fn estimator_mean_absolute_error_bounded() {
        // Over 1000 random pairs with known exact Jaccard, MAE < 0.04.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(97);
        let mut abs_err = 0.0;
        let n_pairs = 1000;
        for _ in 0..n_pairs {
            let base = random_doc(&mut rng, 80, 30);
            let extra = random_doc(&mut rng, rng.gen_range(5..60), 30);
            let other = format!("{base} {extra}");
            let j = exact_jaccard(&base, &other, 5);
            let sa = shingle_signature(&base, 256, 5, 13).unwrap();
            let sb = shingle_signature(&other, 256, 5, 13).unwrap();
            abs_err += (estimate_similarity(&sa, &sb).unwrap() - j).abs();
        }
        let mae = abs_err / n_pairs as f64;
        assert!(mae < 0.04, "mean absolute error {mae}");
    }

    #[test]
    fn dedup_removes_identical_second_entry() {
        let code = "module m(output y); assign y = 1'b1; endmodule";
        let entries = vec![entry("a", code), entry("b", code)];
        let (kept, removed) = deduplicate(&entries, &DedupParams::default()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "a");
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].removed_id, "b");
        assert_eq!(removed[0].kept_id, "a");
    }

    #[test]
    fn dedup_keeps_dissimilar_entries() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let docs: Vec<String> = (0..3).map(|_| random_doc(&mut rng, 60, 500)).collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(exact_jaccard(&docs[i], &docs[j], 5) < 0.5);
            }
        }
        let entries: Vec<RawEntry> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| entry(&format!("e{i}"), d))
            .collect();
        let (kept, removed) = deduplicate(&entries, &DedupParams::default()).unwrap();
        assert_eq!(kept.len(), 3);
        assert!(removed.is_empty());
    }

    #[test]
    fn dedup_removes_planted_near_duplicate() {
        // 100 distinct tokens -> 96 shingles; 5 appended tokens -> 101
        // shingles sharing all 96: exact Jaccard 96/101 ~ 0.9505.
        let base: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let near: Vec<String> = base
            .iter()
            .cloned()
            .chain((0..5).map(|i| format!("extra{i}")))
            .collect();
        let a = base.join(" ");
        let b = near.join(" ");
        let j = exact_jaccard(&a, &b, 5);
        assert!((j - 96.0 / 101.0).abs() < 1e-12);
        let entries = vec![entry("orig", &a), entry("near", &b)];
        let (kept, removed) = deduplicate(&entries, &DedupParams::default()).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(removed[0].removed_id, "near");
    }

    #[test]
    fn dedup_idempotent() {
        let code = "module m(output y); assign y = 1'b1; endmodule";
        let mut entries = vec![entry("a", code), entry("b", code)];
        entries.push(entry("c", "module n(input x, output y); assign y = ~x; endmodule"));
        let params = DedupParams::default();
        let (kept, _) = deduplicate(&entries, &params).unwrap();
        let (kept2, removed2) = deduplicate(&kept, &params).unwrap();
        assert_eq!(kept.len(), kept2.len());
        assert!(removed2.is_empty());
    }

    #[test]
    fn quality_filter_thresholds() {
        let mut e = entry("q", "module m; endmodule");
        e.rank_score = 12;
        e.complexity = Complexity::Intermediate;
        assert!(quality_filter(&e, 12));
        e.rank_score = 15;
        e.complexity = Complexity::Basic;
        assert!(!quality_filter(&e, 12));
        e.rank_score = 11;
        e.complexity = Complexity::Expert;
        assert!(!quality_filter(&e, 12));
    }
}
