//! The original Porter suffix-stripping stemmer, five steps, over `[a-z]` words.

/// Stem a lowercase word. Words containing anything outside `a-z` come back
/// unchanged.
///
/// Every rule applies regardless of word length, so short words can shrink
/// ("as" -> "a") and a lone "s" stems to the empty string.
pub fn porter_stem(word: &str) -> String {
    if !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = Word(word.as_bytes().to_vec());
    w.step1a();
    w.step1b();
    w.step1c();
    w.step2();
    w.step3();
    w.step4();
    w.step5a();
    w.step5b();
    String::from_utf8(w.0).expect("ascii in, ascii out")
}

struct Word(Vec<u8>);

impl Word {
    fn is_consonant(&self, i: usize) -> bool {
        match self.0[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in the first `len` letters.
    fn measure(&self, len: usize) -> usize {
        let mut m = 0;
        let mut i = 0;
        while i < len && self.is_consonant(i) {
            i += 1;
        }
        loop {
            while i < len && !self.is_consonant(i) {
                i += 1;
            }
            if i >= len {
                return m;
            }
            while i < len && self.is_consonant(i) {
                i += 1;
            }
            m += 1;
        }
    }

    fn has_vowel(&self, len: usize) -> bool {
        (0..len).any(|i| !self.is_consonant(i))
    }

    fn double_consonant(&self, len: usize) -> bool {
        len >= 2 && self.0[len - 1] == self.0[len - 2] && self.is_consonant(len - 1)
    }

    /// consonant-vowel-consonant ending, last consonant not w, x or y.
    fn cvc(&self, len: usize) -> bool {
        len >= 3
            && self.is_consonant(len - 3)
            && !self.is_consonant(len - 2)
            && self.is_consonant(len - 1)
            && !matches!(self.0[len - 1], b'w' | b'x' | b'y')
    }

    fn ends_with(&self, suffix: &str) -> bool {
        self.0.ends_with(suffix.as_bytes())
    }

    fn stem_len(&self, suffix: &str) -> usize {
        self.0.len() - suffix.len()
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let n = self.stem_len(suffix);
        self.0.truncate(n);
        self.0.extend_from_slice(with.as_bytes());
    }

    /// Longest-suffix rule list: the first matching suffix decides, applied
    /// only if the stem measure exceeds `min_measure`.
    fn apply_rules(&mut self, rules: &[(&str, &str)], min_measure: usize) {
        for &(suffix, with) in rules {
            if self.ends_with(suffix) {
                if self.measure(self.stem_len(suffix)) > min_measure {
                    self.replace(suffix, with);
                }
                return;
            }
        }
    }

    fn step1a(&mut self) {
        if self.ends_with("sses") {
            self.replace("sses", "ss");
        } else if self.ends_with("ies") {
            self.replace("ies", "i");
        } else if self.ends_with("ss") {
        } else if self.ends_with("s") {
            self.replace("s", "");
        }
    }

    fn step1b(&mut self) {
        if self.ends_with("eed") {
            if self.measure(self.stem_len("eed")) > 0 {
                self.replace("eed", "ee");
            }
            return;
        }
        let removed = ["ed", "ing"]
            .into_iter()
            .find(|s| self.ends_with(s) && self.has_vowel(self.stem_len(s)));
        let Some(suffix) = removed else { return };
        self.replace(suffix, "");
        if self.ends_with("at") || self.ends_with("bl") || self.ends_with("iz") {
            self.0.push(b'e');
        } else if self.double_consonant(self.0.len())
            && !matches!(self.0.last(), Some(b'l' | b's' | b'z'))
        {
            self.0.pop();
        } else if self.measure(self.0.len()) == 1 && self.cvc(self.0.len()) {
            self.0.push(b'e');
        }
    }

    fn step1c(&mut self) {
        if self.ends_with("y") && self.has_vowel(self.stem_len("y")) {
            self.replace("y", "i");
        }
    }

    fn step2(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        self.apply_rules(&longest_first(RULES), 0);
    }

    fn step3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        self.apply_rules(&longest_first(RULES), 0);
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion",
            "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        let mut ordered: Vec<&str> = SUFFIXES.to_vec();
        ordered.sort_by_key(|s| std::cmp::Reverse(s.len()));
        let Some(&suffix) = ordered.iter().find(|s| self.ends_with(s)) else {
            return;
        };
        let n = self.stem_len(suffix);
        if self.measure(n) <= 1 {
            return;
        }
        if suffix == "ion" && !(n > 0 && matches!(self.0[n - 1], b's' | b't')) {
            return;
        }
        self.0.truncate(n);
    }

    fn step5a(&mut self) {
        if !self.ends_with("e") {
            return;
        }
        let n = self.0.len() - 1;
        let m = self.measure(n);
        if m > 1 || (m == 1 && !self.cvc(n)) {
            self.0.truncate(n);
        }
    }

    fn step5b(&mut self) {
        let n = self.0.len();
        if self.measure(n) > 1 && self.double_consonant(n) && self.0[n - 1] == b'l' {
            self.0.pop();
        }
    }
}

/// Stable sort by suffix length, longest first, so the first match is the longest.
fn longest_first<'a>(rules: &[(&'a str, &'a str)]) -> Vec<(&'a str, &'a str)> {
    let mut v = rules.to_vec();
    v.sort_by_key(|(s, _)| std::cmp::Reverse(s.len()));
    v
}
