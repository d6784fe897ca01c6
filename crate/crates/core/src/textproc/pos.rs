use std::collections::HashMap;

/// Supplies part-of-speech tags for words lacking ingested annotations.
pub trait PosTagger: Send + Sync {
    fn tag(&self, word: &str) -> String;
}

/// Dictionary tagger: each known word maps to its most frequent tag,
/// everything else is tagged `noun`.
#[derive(Clone, Debug)]
pub struct LookupTagger {
    lexicon: HashMap<String, String>,
    default_tag: String,
}

const LEXICON: &[(&str, &[&str])] = &[
    ("det", &["a", "an", "the", "this", "that", "these", "those", "each", "every", "some", "any", "no"]),
    ("prep", &["of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "during", "after", "before", "between", "among", "through", "without", "under", "over", "about", "against"]),
    ("conj", &["and", "or", "but", "nor", "whereas", "while", "although", "because", "if"]),
    ("aux", &["is", "are", "was", "were", "be", "been", "being", "has", "have", "had", "do", "does", "did", "can", "could", "may", "might", "must", "shall", "should", "will", "would"]),
    ("pron", &["it", "its", "they", "them", "their", "we", "our", "he", "she", "his", "her", "who", "which", "what"]),
    ("adv", &["not", "also", "very", "more", "most", "only", "however", "thus", "then", "here", "there", "significantly"]),
    ("verb", &["increased", "decreased", "showed", "found", "used", "reported", "observed", "varies", "needs", "suggest", "indicate"]),
    ("adj", &["high", "low", "new", "clinical", "significant", "different", "several", "many", "other", "such"]),
];

impl Default for LookupTagger {
    fn default() -> Self {
        let lexicon = LEXICON
            .iter()
            .flat_map(|(tag, words)| words.iter().map(move |w| (w.to_string(), tag.to_string())))
            .collect();
        LookupTagger {
            lexicon,
            default_tag: "noun".to_string(),
        }
    }
}

impl LookupTagger {
    pub fn with_entries<I, S, T>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut tagger = LookupTagger::default();
        for (w, t) in entries {
            tagger.lexicon.insert(w.into().to_lowercase(), t.into());
        }
        tagger
    }
}

impl PosTagger for LookupTagger {
    fn tag(&self, word: &str) -> String {
        self.lexicon
            .get(&word.to_lowercase())
            .cloned()
            .unwrap_or_else(|| self.default_tag.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_and_default() {
        let t = LookupTagger::default();
        assert_eq!(t.tag("with"), "prep");
        assert_eq!(t.tag("Are"), "aux");
        assert_eq!(t.tag("nutrition"), "noun");
        let t = LookupTagger::with_entries([("nutrition", "adj")]);
        assert_eq!(t.tag("nutrition"), "adj");
    }
}
