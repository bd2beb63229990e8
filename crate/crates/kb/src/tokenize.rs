/// Lowercases, splits on non-alphanumeric characters and drops tokens
/// shorter than two characters. No stemming, no stop words.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules() {
        assert_eq!(tokenize("Pu'er Tea (NIR)"), ["pu", "er", "tea", "nir"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("COD COD cod"), ["cod", "cod", "cod"]);
        assert_eq!(tokenize("900-1700 nm, a b"), ["900", "1700", "nm"]);
    }
}
