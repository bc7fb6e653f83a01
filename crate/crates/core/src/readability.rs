//! Flesch-Kincaid Grade Level and Dale-Chall readability for single CQs.
//!
//! FKGL: `11.8 * (syllables / words) + 0.39 * (words / sentences) - 15.59`
//!
//! DCR: `0.1579 * (difficult / words * 100) + 0.0496 * (words / sentences)`
//! (no adjustment constant is added for texts with many difficult words).
//!
//! Scores depend on the tokenizer, the syllable heuristic and the familiar
//! word list in this module; they are comparable with each other but not with
//! numbers produced by other tools.

use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DALE_CHALL_LIST: &str = include_str!("../data/dale_chall_3000.txt");

/// Identifies the rule set behind the scores, echoed into report footers.
pub const RULES_ID: &str = "compcq-readability/1 (vowel-group syllables, dale-chall 2941-word list)";

static BUNDLED: LazyLock<FamiliarWords> = LazyLock::new(|| FamiliarWords::from_list(DALE_CHALL_LIST));

/// Words produced by [`tokenize`] plus the sentence count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokens {
    pub words: Vec<String>,
    pub sentences: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '-' || c == '\'' || c == '\u{2019}'
}

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn words_in(segment: &str) -> impl Iterator<Item = &str> {
    segment
        .split(|c: char| !is_word_char(c))
        .map(|w| w.trim_matches(|c: char| !c.is_alphabetic()))
        .filter(|w| !w.is_empty())
}

/// Splits text into words and counts sentences.
///
/// Words are maximal runs of letters, hyphens and apostrophes, trimmed of
/// leading and trailing punctuation. A sentence is a segment between terminal
/// marks (`.`, `?`, `!`) that contains at least one word; there is always at
/// least one.
pub fn tokenize(text: &str) -> Result<Tokens> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut words = Vec::new();
    let mut sentences = 0;
    for segment in text.split(is_terminal) {
        let before = words.len();
        words.extend(words_in(segment).map(str::to_owned));
        if words.len() > before {
            sentences += 1;
        }
    }
    Ok(Tokens {
        words,
        sentences: sentences.max(1),
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn count_part_syllables(part: &str) -> usize {
    let w: Vec<char> = part
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if w.is_empty() {
        return 0;
    }
    let n = w.len();
    let vowel_at = |i: usize| -> bool {
        // A leading y is a consonant ("year", "yes").
        is_vowel(w[i]) && !(i == 0 && w[i] == 'y')
    };

    let mut count = 0usize;
    let mut prev_vowel = false;
    for i in 0..n {
        let v = vowel_at(i);
        if v && !prev_vowel {
            count += 1;
        }
        // Hiatus: "ia" splits unless after c/s/t/g/x ("trial", "bias" vs "special").
        if v && prev_vowel && w[i] == 'a' && w[i - 1] == 'i' {
            let soft = i >= 2 && matches!(w[i - 2], 'c' | 's' | 't' | 'g' | 'x');
            if !soft {
                count += 1;
            }
        }
        prev_vowel = v;
    }

    let ends = |suffix: &str| {
        let s: Vec<char> = suffix.chars().collect();
        n >= s.len() && w[n - s.len()..] == s[..]
    };
    let consonant_at = |i: usize| !is_vowel(w[i]);

    if ends("ium") || ends("eum") || (ends("io") && n > 3) {
        count += 1;
    }

    if count > 1 {
        if ends("e") && n >= 2 {
            let le_restored = ends("le") && n >= 3 && consonant_at(n - 3);
            if !le_restored && !is_vowel(w[n - 2]) {
                count -= 1;
            }
        } else if ends("es") && n >= 3 {
            let before = w[n - 3];
            let sibilant = matches!(before, 's' | 'c' | 'g' | 'z' | 'x')
                || (n >= 4 && (ends("shes") || ends("ches")));
            let les_restored = ends("les") && n >= 4 && consonant_at(n - 4);
            if !sibilant && !les_restored && !is_vowel(before) {
                count -= 1;
            }
        } else if ends("ed") && n >= 3 {
            let before = w[n - 3];
            if before != 't' && before != 'd' && !is_vowel(before) {
                count -= 1;
            }
        }
    }
    count.max(1)
}

/// Heuristic syllable count, at least 1.
///
/// Counts vowel groups, subtracts a silent final `-e`, `-es` or `-ed`, keeps
/// the vowel of a consonant + `-le`/`-les` ending, and splits the `ia`, `-ium`
/// and final `io` hiatuses. Hyphenated compounds sum over their parts.
pub fn count_syllables(word: &str) -> usize {
    word.split('-')
        .map(count_part_syllables)
        .sum::<usize>()
        .max(1)
}

/// Familiar-word list used to decide which words are difficult for DCR.
#[derive(Debug, Clone)]
pub struct FamiliarWords {
    words: HashSet<String>,
}

impl FamiliarWords {
    /// Parses a list with one word per line; blank lines and `#` comments are ignored.
    pub fn from_list(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self { words }
    }

    /// The bundled Dale-Chall list, loaded once.
    pub fn bundled() -> &'static Self {
        &BUNDLED
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn contains_inflected(&self, w: &str) -> bool {
        if self.words.contains(w) {
            return true;
        }
        let strip = |suffix: &str| w.strip_suffix(suffix).filter(|s| !s.is_empty());
        let mut candidates: Vec<String> = Vec::new();
        if let Some(s) = strip("'s").or_else(|| strip("\u{2019}s")) {
            candidates.push(s.to_owned());
        }
        if let Some(s) = strip("ies") {
            candidates.push(format!("{s}y"));
        }
        if let Some(s) = strip("es") {
            candidates.push(s.to_owned());
        }
        if let Some(s) = strip("s") {
            candidates.push(s.to_owned());
        }
        if let Some(s) = strip("ing") {
            candidates.push(s.to_owned());
            candidates.push(format!("{s}e"));
        }
        if let Some(s) = strip("ed") {
            candidates.push(s.to_owned());
            candidates.push(format!("{s}e"));
        }
        if let Some(s) = strip("ied") {
            candidates.push(format!("{s}y"));
        }
        candidates.iter().any(|c| self.words.contains(c.as_str()))
    }

    /// Case-insensitive lookup with lenient inflection stripping.
    ///
    /// A hyphenated compound is familiar if it is listed as a whole or every
    /// part is familiar.
    pub fn is_familiar(&self, word: &str) -> bool {
        let w = word.to_lowercase().replace('\u{2019}', "'");
        if self.contains_inflected(&w) {
            return true;
        }
        w.contains('-')
            && w
                .split('-')
                .filter(|p| !p.is_empty())
                .all(|p| self.contains_inflected(p))
    }
}

/// Counts the readability formulas are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStats {
    pub n_sentences: usize,
    pub n_words: usize,
    pub n_syllables: usize,
    pub n_difficult_words: usize,
}

impl TokenStats {
    pub fn from_text(text: &str, familiar: &FamiliarWords) -> Result<Self> {
        let tokens = tokenize(text)?;
        if tokens.words.is_empty() {
            return Err(Error::Domain(format!("no words in {text:?}")));
        }
        let n_syllables = tokens.words.iter().map(|w| count_syllables(w)).sum();
        let n_difficult_words = tokens
            .words
            .iter()
            .filter(|w| !familiar.is_familiar(w))
            .count();
        Ok(Self {
            n_sentences: tokens.sentences,
            n_words: tokens.words.len(),
            n_syllables,
            n_difficult_words,
        })
    }

    fn check(&self) -> Result<()> {
        if self.n_words == 0 || self.n_sentences == 0 {
            return Err(Error::Domain(format!(
                "readability needs at least one word and one sentence, got {} words and {} sentences",
                self.n_words, self.n_sentences
            )));
        }
        Ok(())
    }
}

pub fn fkgl(stats: &TokenStats) -> Result<f64> {
    stats.check()?;
    let w = stats.n_words as f64;
    Ok(11.8 * (stats.n_syllables as f64 / w) + 0.39 * (w / stats.n_sentences as f64) - 15.59)
}

pub fn dcr(stats: &TokenStats) -> Result<f64> {
    stats.check()?;
    let w = stats.n_words as f64;
    Ok(0.1579 * (stats.n_difficult_words as f64 / w * 100.0)
        + 0.0496 * (w / stats.n_sentences as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub fkgl: f64,
    pub dcr: f64,
}

/// Scores one text as a unit against the bundled word list.
pub fn score(text: &str) -> Result<ReadabilityScores> {
    let stats = TokenStats::from_text(text, FamiliarWords::bundled())?;
    Ok(ReadabilityScores {
        fkgl: fkgl(&stats)?,
        dcr: dcr(&stats)?,
    })
}
