//! The original (1980) Porter suffix-stripping stemmer.
//!
//! Operates on lowercase ASCII words. Anything containing other characters
//! (digits, accented letters) is returned unchanged, as are words of one or
//! two letters.

struct Stemmer {
    b: Vec<u8>,
    // length of the stem preceding the most recently matched suffix
    j: usize,
}

impl Stemmer {
    fn cons(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of VC sequences in `b[..j]`.
    fn m(&self) -> usize {
        let j = self.j;
        let mut n = 0;
        let mut i = 0;
        while i < j && self.cons(i) {
            i += 1;
        }
        loop {
            while i < j && !self.cons(i) {
                i += 1;
            }
            if i >= j {
                return n;
            }
            while i < j && self.cons(i) {
                i += 1;
            }
            n += 1;
            if i >= j {
                return n;
            }
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..self.j).any(|i| !self.cons(i))
    }

    /// Word ending at `e` (exclusive) ends in a double consonant.
    fn double_c(&self, e: usize) -> bool {
        e >= 2 && self.b[e - 1] == self.b[e - 2] && self.cons(e - 1)
    }

    /// consonant-vowel-consonant ending at `e` (exclusive), last not w, x or y.
    fn cvc(&self, e: usize) -> bool {
        if e < 3 || !self.cons(e - 1) || self.cons(e - 2) || !self.cons(e - 3) {
            return false;
        }
        !matches!(self.b[e - 1], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &str) -> bool {
        let s = s.as_bytes();
        if s.len() > self.b.len() || !self.b.ends_with(s) {
            return false;
        }
        self.j = self.b.len() - s.len();
        true
    }

    fn set_to(&mut self, s: &str) {
        self.b.truncate(self.j);
        self.b.extend_from_slice(s.as_bytes());
    }

    /// Longest matching suffix among `rules`, replaced when the stem measure is positive.
    fn replace_longest(&mut self, rules: &[(&str, &str)], min_m: usize) {
        let mut best: Option<(&str, &str)> = None;
        for &(suffix, repl) in rules {
            if self.b.ends_with(suffix.as_bytes()) && best.is_none_or(|(s, _)| suffix.len() > s.len()) {
                best = Some((suffix, repl));
            }
        }
        if let Some((suffix, repl)) = best {
            self.ends(suffix);
            if self.m() > min_m {
                self.set_to(repl);
            }
        }
    }

    fn step1ab(&mut self) {
        if self.b.last() == Some(&b's') {
            if self.ends("sses") {
                self.b.truncate(self.b.len() - 2);
            } else if self.ends("ies") {
                self.set_to("i");
            } else if self.b.len() >= 2 && self.b[self.b.len() - 2] != b's' {
                self.b.pop();
            }
        }
        if self.ends("eed") {
            if self.m() > 0 {
                self.b.pop();
            }
        } else if (self.ends("ed") || self.ends("ing")) && self.vowel_in_stem() {
            self.b.truncate(self.j);
            if self.ends("at") {
                self.set_to("ate");
            } else if self.ends("bl") {
                self.set_to("ble");
            } else if self.ends("iz") {
                self.set_to("ize");
            } else if self.double_c(self.b.len()) {
                if !matches!(self.b.last(), Some(b'l' | b's' | b'z')) {
                    self.b.pop();
                }
            } else {
                self.j = self.b.len();
                if self.m() == 1 && self.cvc(self.b.len()) {
                    self.b.push(b'e');
                }
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends("y") && self.vowel_in_stem() {
            let last = self.b.len() - 1;
            self.b[last] = b'i';
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
        self.replace_longest(RULES, 0);
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
        self.replace_longest(RULES, 0);
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion",
            "ou", "ism", "ate", "iti", "ous", "ive", "ize",
        ];
        let mut best: Option<&str> = None;
        for &s in SUFFIXES {
            if !self.b.ends_with(s.as_bytes()) {
                continue;
            }
            if s == "ion" {
                let n = self.b.len() - 3;
                if n == 0 || !matches!(self.b[n - 1], b's' | b't') {
                    continue;
                }
            }
            if best.is_none_or(|b| s.len() > b.len()) {
                best = Some(s);
            }
        }
        if let Some(s) = best {
            self.ends(s);
            if self.m() > 1 {
                self.b.truncate(self.j);
            }
        }
    }

    fn step5(&mut self) {
        if self.ends("e") {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.b.len() - 1)) {
                self.b.pop();
            }
        }
        self.j = self.b.len();
        if self.b.last() == Some(&b'l') && self.double_c(self.b.len()) && self.m() > 1 {
            self.b.pop();
        }
    }
}

/// Stem a single lowercase word.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut s = Stemmer {
        b: word.as_bytes().to_vec(),
        j: 0,
    };
    s.step1ab();
    if s.b.len() > 1 {
        s.step1c();
        s.step2();
        s.step3();
        s.step4();
        s.step5();
    }
    // only ASCII bytes were ever written
    String::from_utf8(s.b).expect("ascii")
}
