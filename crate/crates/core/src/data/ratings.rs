//! Raw interaction ingestion.
//!
//! The ratings file is TSV with one interaction per line,
//! `user<TAB>item[<TAB>extra fields ignored]`. Lines starting with `#` are
//! comments. Users and items are reindexed densely in first-appearance
//! order; the token tables are kept so outputs can refer back to the
//! original ids.

use std::collections::HashMap;
use std::io::BufRead;

use crate::data::sbm::SparseBinaryMatrix;
use crate::error::{Error, Result};

/// Parsed interactions before binarization. `pairs` keeps duplicates.
#[derive(Debug, Clone)]
pub struct RatingsTable {
    pub user_tokens: Vec<String>,
    pub item_tokens: Vec<String>,
    pub pairs: Vec<(usize, usize)>,
}

impl RatingsTable {
    pub fn num_users(&self) -> usize {
        self.user_tokens.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_tokens.len()
    }

    /// Binarized users x items matrix; duplicate interactions collapse.
    pub fn binarized_matrix(&self) -> Result<SparseBinaryMatrix> {
        SparseBinaryMatrix::from_pairs(
            self.num_users(),
            self.num_items(),
            self.pairs.iter().copied(),
        )
    }
}

pub fn parse_ratings<R: BufRead>(reader: R) -> Result<RatingsTable> {
    let mut user_index: HashMap<String, usize> = HashMap::new();
    let mut item_index: HashMap<String, usize> = HashMap::new();
    let mut user_tokens = Vec::new();
    let mut item_tokens = Vec::new();
    let mut pairs = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.starts_with('#') {
            continue;
        }
        let mut it = line.split('\t');
        let user = it.next().unwrap_or("");
        let item = it.next().unwrap_or("");
        if user.is_empty() || item.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 'user<TAB>item', got {line:?}"),
            });
        }
        let u = *user_index.entry(user.to_string()).or_insert_with(|| {
            user_tokens.push(user.to_string());
            user_tokens.len() - 1
        });
        let i = *item_index.entry(item.to_string()).or_insert_with(|| {
            item_tokens.push(item.to_string());
            item_tokens.len() - 1
        });
        pairs.push((u, i));
    }

    if pairs.is_empty() {
        return Err(Error::EmptyDataset("ratings file has no interactions".into()));
    }
    Ok(RatingsTable {
        user_tokens,
        item_tokens,
        pairs,
    })
}

/// Parses the reviews file (`item<TAB>text`, text free of tabs). Multiple
/// lines for the same item are concatenated with a single space.
pub fn parse_reviews<R: BufRead>(reader: R) -> Result<HashMap<String, String>> {
    let mut texts: HashMap<String, String> = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let (item, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("expected 'item<TAB>text', got {line:?}"),
        })?;
        if item.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty item token".into(),
            });
        }
        let entry = texts.entry(item.to_string()).or_default();
        if !entry.is_empty() {
            entry.push(' ');
        }
        entry.push_str(text);
    }
    Ok(texts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_interactions_one_user() {
        let t = parse_ratings("u1\ti1\nu1\ti2\n".as_bytes()).unwrap();
        assert_eq!(t.num_users(), 1);
        assert_eq!(t.num_items(), 2);
        let y = t.binarized_matrix().unwrap();
        assert_eq!((y.rows(), y.cols(), y.nnz()), (1, 2, 2));
    }

    #[test]
    fn duplicate_interaction_binarizes_to_one_entry() {
        let t = parse_ratings("u1\ti1\nu1\ti1\n".as_bytes()).unwrap();
        assert_eq!(t.pairs.len(), 2);
        let y = t.binarized_matrix().unwrap();
        assert_eq!(y.nnz(), 1);
    }

    #[test]
    fn first_appearance_order_indexing() {
        let t = parse_ratings("b\tz\na\ty\nb\ty\n".as_bytes()).unwrap();
        assert_eq!(t.user_tokens, vec!["b", "a"]);
        assert_eq!(t.item_tokens, vec!["z", "y"]);
        assert_eq!(t.pairs, vec![(0, 0), (1, 1), (0, 1)]);
    }

    #[test]
    fn comments_skipped_extra_fields_ignored() {
        let t = parse_ratings("# header\nu1\ti1\t5.0\t1234\n".as_bytes()).unwrap();
        assert_eq!(t.pairs, vec![(0, 0)]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_ratings("u1\ti1\nbroken-line\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_ratings("".as_bytes()),
            Err(Error::EmptyDataset(_))
        ));
        assert!(matches!(
            parse_ratings("# only a comment\n".as_bytes()),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn reviews_concatenate_per_item() {
        let m = parse_reviews("i1\tgood game\ni2\tfun\ni1\treally good\n".as_bytes()).unwrap();
        assert_eq!(m["i1"], "good game really good");
        assert_eq!(m["i2"], "fun");
    }

    #[test]
    fn reviews_require_tab() {
        assert!(matches!(
            parse_reviews("no tab here\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
