//! Turning raw completions into task answers.

use super::LlmError;

/// Finds a label in `raw` by case-insensitive substring search. Longer labels
/// are tried first so that a label contained in another cannot shadow it.
pub fn parse_label(raw: &str, labels: &[String]) -> Result<String, LlmError> {
    let mut ordered: Vec<&String> = labels.iter().filter(|l| !l.is_empty()).collect();
    ordered.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b)));
    let haystack = raw.to_lowercase();
    ordered
        .into_iter()
        .find(|label| haystack.contains(&label.to_lowercase()))
        .cloned()
        .ok_or_else(|| LlmError::ParseFailure(format!("no known label in {raw:?}")))
}

/// First integer token of `raw`, scanning left to right, that lies in `[lo, hi]`.
pub fn parse_rating(raw: &str, lo: i64, hi: i64) -> Result<i64, LlmError> {
    if lo <= hi {
        for token in raw.split(|c: char| !c.is_ascii_digit()).filter(|t| !t.is_empty()) {
            if let Ok(value) = token.parse::<i64>() {
                if (lo..=hi).contains(&value) {
                    return Ok(value);
                }
            }
        }
    }
    Err(LlmError::ParseFailure(format!("no rating in [{lo}, {hi}] in {raw:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(l: &[&str]) -> Vec<String> {
        l.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn label_examples() {
        let l = labels(&["politics", "women"]);
        assert_eq!(parse_label("politics", &l).unwrap(), "politics");
        assert_eq!(parse_label("The category is: Politics.", &l).unwrap(), "politics");
        assert!(matches!(parse_label("no idea", &l), Err(LlmError::ParseFailure(_))));
        assert!(parse_label("politics", &[]).is_err());
    }

    #[test]
    fn longest_label_first() {
        let l = labels(&["art", "culture & arts"]);
        assert_eq!(parse_label("Culture & Arts", &l).unwrap(), "culture & arts");
    }

    #[test]
    fn rating_examples() {
        assert_eq!(parse_rating("4", 1, 5).unwrap(), 4);
        assert_eq!(parse_rating("I'd rate it 4 out of 5", 1, 5).unwrap(), 4);
        assert!(parse_rating("great product", 1, 5).is_err());
        assert_eq!(parse_rating("10/10, so 5", 1, 5).unwrap(), 5);
        assert_eq!(parse_rating("rating: 0 or 3", 1, 5).unwrap(), 3);
        assert!(parse_rating("99999999999999999999999", 1, 5).is_err());
    }

    proptest! {
        #[test]
        fn label_result_is_member(raw in ".{0,40}", pick in 0usize..4) {
            let l = labels(&["politics", "sports", "women", "style & beauty"]);
            let text = format!("{raw}{}", if pick < 4 { l[pick].to_uppercase() } else { String::new() });
            if let Ok(label) = parse_label(&text, &l) {
                prop_assert!(l.contains(&label));
            }
        }

        #[test]
        fn rating_within_bounds(raw in "[a-z0-9 ]{0,30}", lo in 0i64..5, span in 0i64..6) {
            let hi = lo + span;
            if let Ok(r) = parse_rating(&raw, lo, hi) {
                prop_assert!(lo <= r && r <= hi);
            }
        }
    }
}
