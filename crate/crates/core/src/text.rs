//! Tokenization and string normalization shared by the lexical components.
//!
//! Tokens are Unicode-lowercased maximal runs of alphanumeric characters.
//! Everything else (whitespace, hyphens, slashes, punctuation) separates
//! tokens. There is no stemming.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Splits `text` into lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |t| out.push(t.to_owned()));
    out
}

/// Calls `f` with every token of `text` without allocating a vector.
pub fn for_each_token(text: &str, mut f: impl FnMut(&str)) {
    let mut buf = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                buf.push(lc);
            }
        } else if !buf.is_empty() {
            f(&buf);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        f(&buf);
    }
}

/// Lowercases, strips punctuation and collapses whitespace.
///
/// Used for dedup keys, where "Deep  Learning!" and "deep learning" must
/// compare equal.
pub fn normalize_key_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else if ch.is_alphanumeric() {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(ch.to_lowercase());
        }
        // anything else is punctuation and dropped
    }
    out
}

/// True if `token` is in the built-in English stopword list.
pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// The built-in English stopword list.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.iter().copied().collect())
}

/// Tokens of `text` that are not stopwords, in order.
pub fn content_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |t| {
        if !is_stopword(t) {
            out.push(t.to_owned());
        }
    });
    out
}

const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "across",
    "after",
    "afterwards",
    "again",
    "against",
    "all",
    "almost",
    "alone",
    "along",
    "already",
    "also",
    "although",
    "always",
    "am",
    "among",
    "amongst",
    "an",
    "and",
    "another",
    "any",
    "anyhow",
    "anyone",
    "anything",
    "anyway",
    "anywhere",
    "are",
    "around",
    "as",
    "at",
    "back",
    "be",
    "became",
    "because",
    "become",
    "becomes",
    "becoming",
    "been",
    "before",
    "beforehand",
    "behind",
    "being",
    "below",
    "beside",
    "besides",
    "between",
    "beyond",
    "both",
    "but",
    "by",
    "can",
    "cannot",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "done",
    "down",
    "due",
    "during",
    "each",
    "eg",
    "eight",
    "either",
    "eleven",
    "else",
    "elsewhere",
    "enough",
    "etc",
    "even",
    "ever",
    "every",
    "everyone",
    "everything",
    "everywhere",
    "except",
    "few",
    "fifteen",
    "fifty",
    "first",
    "five",
    "for",
    "former",
    "formerly",
    "forty",
    "four",
    "from",
    "further",
    "get",
    "give",
    "given",
    "go",
    "had",
    "has",
    "have",
    "having",
    "he",
    "hence",
    "her",
    "here",
    "hereafter",
    "hereby",
    "herein",
    "hereupon",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "however",
    "hundred",
    "i",
    "ie",
    "if",
    "in",
    "indeed",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "keep",
    "last",
    "latter",
    "latterly",
    "least",
    "less",
    "made",
    "make",
    "many",
    "may",
    "me",
    "meanwhile",
    "might",
    "mine",
    "more",
    "moreover",
    "most",
    "mostly",
    "much",
    "must",
    "my",
    "myself",
    "namely",
    "neither",
    "never",
    "nevertheless",
    "next",
    "nine",
    "no",
    "nobody",
    "none",
    "noone",
    "nor",
    "not",
    "nothing",
    "now",
    "nowhere",
    "of",
    "off",
    "often",
    "on",
    "once",
    "one",
    "only",
    "onto",
    "or",
    "other",
    "others",
    "otherwise",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "per",
    "perhaps",
    "please",
    "put",
    "rather",
    "re",
    "same",
    "see",
    "seem",
    "seemed",
    "seeming",
    "seems",
    "several",
    "she",
    "should",
    "show",
    "shown",
    "shows",
    "since",
    "six",
    "sixty",
    "so",
    "some",
    "somehow",
    "someone",
    "something",
    "sometime",
    "sometimes",
    "somewhere",
    "still",
    "such",
    "take",
    "ten",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "thence",
    "there",
    "thereafter",
    "thereby",
    "therefore",
    "therein",
    "thereupon",
    "these",
    "they",
    "third",
    "this",
    "those",
    "though",
    "three",
    "through",
    "throughout",
    "thru",
    "thus",
    "to",
    "together",
    "too",
    "toward",
    "towards",
    "twelve",
    "twenty",
    "two",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "use",
    "used",
    "using",
    "various",
    "very",
    "via",
    "was",
    "we",
    "well",
    "were",
    "what",
    "whatever",
    "when",
    "whence",
    "whenever",
    "where",
    "whereafter",
    "whereas",
    "whereby",
    "wherein",
    "whereupon",
    "wherever",
    "whether",
    "which",
    "while",
    "whither",
    "who",
    "whoever",
    "whole",
    "whom",
    "whose",
    "why",
    "will",
    "with",
    "within",
    "without",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
    "based",
    "new",
    "study",
    "paper",
    "results",
    "result",
    "method",
    "methods",
    "approach",
    "proposed",
    "present",
    "presents",
    "show",
    "showed",
    "found",
    "however",
    "can",
    "et",
    "al",
    "vs",
    "thereof",
    "within",
    "overall",
    "among",
    "upon",
    "towards",
    "provide",
    "provides",
    "observed",
    "obtained",
    "significant",
    "significantly",
    "including",
    "respectively",
    "compared",
    "related",
    "important",
    "high",
    "higher",
    "low",
    "lower",
    "large",
    "small",
    "different",
    "similar",
    "effect",
    "effects",
    "associated",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_hyphens_and_punctuation() {
        assert_eq!(
            tokenize("Hydrogel-based Tissue (collagen/fibrin)"),
            vec!["hydrogel", "based", "tissue", "collagen", "fibrin"]
        );
    }

    #[test]
    fn unicode_lowercasing() {
        assert_eq!(tokenize("ÉCOLE Straße"), vec!["école", "straße"]);
    }

    #[test]
    fn key_text_normalization() {
        assert_eq!(
            normalize_key_text("  Deep   Learning!  for\tX. "),
            "deep learning for x"
        );
        assert_eq!(normalize_key_text("A-B"), "ab");
    }

    #[test]
    fn stopword_list_size() {
        assert!(stopwords().len() >= 300, "got {}", stopwords().len());
        assert!(is_stopword("the"));
        assert!(!is_stopword("perovskite"));
    }
}
