//! Bag-of-words feature construction from review text.
//!
//! Tokens are lowercased maximal alphabetic runs. The vocabulary drops
//! stopwords and terms whose document frequency falls below `min_df`, and
//! orders the surviving terms lexicographically so the feature indexing is
//! deterministic.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;

use crate::data::sbm::SparseBinaryMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    stopwords: HashSet<String>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// The stopword set this vocabulary was built with.
    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }
}

/// Splits `text` into lowercased maximal alphabetic runs.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            run.extend(ch.to_lowercase());
        } else if !run.is_empty() {
            tokens.push(std::mem::take(&mut run));
        }
    }
    if !run.is_empty() {
        tokens.push(run);
    }
    tokens
}

/// One stopword per line; blank lines skipped, tokens lowercased.
pub fn load_stopwords<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut set = HashSet::new();
    for line in reader.lines() {
        let word = line?.trim().to_lowercase();
        if !word.is_empty() {
            set.insert(word);
        }
    }
    Ok(set)
}

/// Builds the term list from per-item texts.
///
/// `corpus[i]` is the concatenated review text of item `i` (possibly empty).
/// A term survives if it is not a stopword and occurs in at least `min_df`
/// distinct items.
pub fn build_vocabulary(
    corpus: &[String],
    stopwords: &HashSet<String>,
    min_df: usize,
) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    for text in corpus {
        let mut seen: HashSet<String> = HashSet::new();
        for token in tokenize(text) {
            if stopwords.contains(&token) {
                continue;
            }
            if seen.insert(token.clone()) {
                *doc_freq.entry(token).or_insert(0) += 1;
            }
        }
    }
    let min_df = min_df.max(1);
    let terms: Vec<String> = doc_freq
        .into_iter()
        .filter(|(_, df)| *df >= min_df)
        .map(|(term, _)| term)
        .collect();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let index = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        terms,
        index,
        stopwords: stopwords.clone(),
    })
}

/// Binary presence matrix X (items x terms): `X[i, j] = 1` iff term `j`
/// occurs in item `i`'s text. Items with no text get all-zero rows.
pub fn vectorize_items(corpus: &[String], vocab: &Vocabulary) -> Result<SparseBinaryMatrix> {
    let mut rows = Vec::with_capacity(corpus.len());
    for text in corpus {
        let cols: Vec<usize> = tokenize(text)
            .into_iter()
            .filter_map(|t| vocab.index_of(&t))
            .collect();
        rows.push(cols);
    }
    SparseBinaryMatrix::from_row_lists(vocab.len(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn tokenizer_lowercases_alphabetic_runs() {
        assert_eq!(tokenize("Good game!"), vec!["good", "game"]);
        assert_eq!(tokenize("x2y"), vec!["x", "y"]);
        assert_eq!(tokenize("  123 "), Vec::<String>::new());
    }

    #[test]
    fn vocabulary_is_sorted_and_deduplicated() {
        let c = corpus(&["Good game", "good fun"]);
        let v = build_vocabulary(&c, &HashSet::new(), 1).unwrap();
        assert_eq!(v.terms(), &["fun", "game", "good"]);
        assert_eq!(v.index_of("game"), Some(1));
    }

    #[test]
    fn stopwords_are_removed() {
        let c = corpus(&["Good game", "good fun"]);
        let stop: HashSet<String> = ["good".to_string()].into_iter().collect();
        let v = build_vocabulary(&c, &stop, 1).unwrap();
        assert_eq!(v.terms(), &["fun", "game"]);
        assert!(v.stopwords().contains("good"));
    }

    #[test]
    fn min_df_filters_rare_terms() {
        let c = corpus(&["Good game", "good fun"]);
        let v = build_vocabulary(&c, &HashSet::new(), 2).unwrap();
        assert_eq!(v.terms(), &["good"]);
    }

    #[test]
    fn empty_corpus_or_empty_result_is_an_error() {
        assert!(matches!(
            build_vocabulary(&[], &HashSet::new(), 1),
            Err(Error::EmptyVocabulary)
        ));
        let c = corpus(&["123 456"]);
        assert!(matches!(
            build_vocabulary(&c, &HashSet::new(), 1),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn vectorize_matches_hand_result() {
        let c = corpus(&["good game", "good fun"]);
        let v = build_vocabulary(&c, &HashSet::new(), 1).unwrap();
        let x = vectorize_items(&c, &v).unwrap();
        // vocab [fun, game, good] -> rows [0,1,1], [1,0,1]
        assert_eq!(x.row(0), &[1, 2]);
        assert_eq!(x.row(1), &[0, 2]);
    }

    #[test]
    fn empty_text_gives_zero_row() {
        let c = corpus(&["good game", ""]);
        let v = build_vocabulary(&c, &HashSet::new(), 1).unwrap();
        let x = vectorize_items(&c, &v).unwrap();
        assert!(x.row(1).is_empty());
    }

    #[test]
    fn determinism_same_inputs_same_terms() {
        let c = corpus(&["zeta alpha", "beta alpha", "beta zeta"]);
        let a = build_vocabulary(&c, &HashSet::new(), 1).unwrap();
        let b = build_vocabulary(&c, &HashSet::new(), 1).unwrap();
        assert_eq!(a.terms(), b.terms());
    }

    #[test]
    fn stopwords_loader_normalizes() {
        let set = load_stopwords("The\n\n  and \n".as_bytes()).unwrap();
        assert!(set.contains("the"));
        assert!(set.contains("and"));
        assert_eq!(set.len(), 2);
    }
}
