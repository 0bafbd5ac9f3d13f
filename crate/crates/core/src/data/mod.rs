//! Dataset ingestion: ratings and review text in, binary matrices and the
//! per-user split out.

mod ratings;
mod sbm;
mod split;
mod text;

pub use ratings::{parse_ratings, parse_reviews, RatingsTable};
pub use sbm::{column_samples, SparseBinaryMatrix};
pub use split::{split_per_user, SplitDataset, HOLDOUT_FRACTION, MIN_SPLIT_DEGREE};
pub use text::{build_vocabulary, load_stopwords, tokenize, vectorize_items, Vocabulary};
