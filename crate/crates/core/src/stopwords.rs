//! Embedded English stopword list shared by tokenization and concept
//! extraction. Articles, prepositions, conjunctions and pronouns; 50 entries.

pub const STOPWORDS: [&str; 50] = [
    // articles
    "a", "an", "the",
    // prepositions
    "about", "above", "after", "at", "before", "by", "for", "from", "in", "into", "of",
    "on", "over", "through", "to", "under", "with", "without",
    // conjunctions
    "and", "as", "because", "but", "if", "nor", "or", "so", "than", "that", "while", "yet",
    // pronouns
    "he", "her", "him", "his", "i", "it", "its", "me", "my", "our", "she", "their", "them",
    "they", "we", "you", "your",
];

/// `word` must already be lowercase.
pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}
