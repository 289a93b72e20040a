//! Porter's suffix-stripping stemmer.
//!
//! This follows Martin Porter's reference C implementation, including its two
//! documented departures from the original 1980 algorithm (`-bli` → `-ble` in place of
//! `-abli` → `-able`, and the extra `-logi` → `-log` rule), so that output
//! matches the published vocabulary/output test pair exactly.

use alloc::string::String;
use alloc::vec::Vec;

/// (suffix, replacement) pairs sharing a penultimate letter.
type Suffixes = [(&'static [u8], &'static [u8])];

/// Stems a single lowercase token.
///
/// Tokens of one or two letters and tokens containing anything other than
/// ASCII lowercase letters are returned unchanged.
pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return String::from(token);
    }
    let mut s = Stemmer::new(token.as_bytes());
    s.run();
    let end = (s.k + 1) as usize;
    s.b.truncate(end);
    // Only ASCII bytes were ever written.
    String::from_utf8(s.b).expect("ascii")
}

struct Stemmer {
    b: Vec<u8>,
    // Index of the last letter of the current word.
    k: isize,
    // General offset into the word, set by `ends`.
    j: isize,
}

impl Stemmer {
    fn new(word: &[u8]) -> Self {
        Stemmer {
            b: word.to_vec(),
            k: word.len() as isize - 1,
            j: 0,
        }
    }

    fn run(&mut self) {
        self.step1ab();
        if self.k > 0 {
            self.step1c();
            self.step2();
            self.step3();
            self.step4();
            self.step5();
        }
    }

    fn at(&self, i: isize) -> u8 {
        self.b[i as usize]
    }

    fn cons(&self, i: isize) -> bool {
        match self.at(i) {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.cons(i - 1),
            _ => true,
        }
    }

    /// Number of consonant-vowel sequences in b[0..=j].
    fn m(&self) -> usize {
        let mut n = 0;
        let mut i = 0;
        loop {
            if i > self.j {
                return n;
            }
            if !self.cons(i) {
                break;
            }
            i += 1;
        }
        i += 1;
        loop {
            loop {
                if i > self.j {
                    return n;
                }
                if self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
            n += 1;
            loop {
                if i > self.j {
                    return n;
                }
                if !self.cons(i) {
                    break;
                }
                i += 1;
            }
            i += 1;
        }
    }

    fn vowel_in_stem(&self) -> bool {
        (0..=self.j).any(|i| !self.cons(i))
    }

    fn double_cons(&self, j: isize) -> bool {
        j >= 1 && self.at(j) == self.at(j - 1) && self.cons(j)
    }

    /// consonant-vowel-consonant ending at i, last consonant not w, x or y.
    fn cvc(&self, i: isize) -> bool {
        if i < 2 || !self.cons(i) || self.cons(i - 1) || !self.cons(i - 2) {
            return false;
        }
        !matches!(self.at(i), b'w' | b'x' | b'y')
    }

    fn ends(&mut self, suffix: &[u8]) -> bool {
        let len = suffix.len() as isize;
        if len > self.k + 1 {
            return false;
        }
        let start = (self.k + 1 - len) as usize;
        if &self.b[start..=self.k as usize] != suffix {
            return false;
        }
        self.j = self.k - len;
        true
    }

    fn set_to(&mut self, replacement: &[u8]) {
        let start = (self.j + 1) as usize;
        self.b.truncate(start);
        self.b.extend_from_slice(replacement);
        self.k = self.j + replacement.len() as isize;
    }

    fn replace_if_measured(&mut self, replacement: &[u8]) {
        if self.m() > 0 {
            self.set_to(replacement);
        }
    }

    /// Plurals and -ed / -ing.
    fn step1ab(&mut self) {
        if self.at(self.k) == b's' {
            if self.ends(b"sses") {
                self.k -= 2;
            } else if self.ends(b"ies") {
                self.set_to(b"i");
            } else if self.at(self.k - 1) != b's' {
                self.k -= 1;
            }
        }
        if self.ends(b"eed") {
            if self.m() > 0 {
                self.k -= 1;
            }
        } else if (self.ends(b"ed") || self.ends(b"ing")) && self.vowel_in_stem() {
            self.k = self.j;
            if self.ends(b"at") {
                self.set_to(b"ate");
            } else if self.ends(b"bl") {
                self.set_to(b"ble");
            } else if self.ends(b"iz") {
                self.set_to(b"ize");
            } else if self.double_cons(self.k) {
                self.k -= 1;
                if matches!(self.at(self.k), b'l' | b's' | b'z') {
                    self.k += 1;
                }
            } else if self.m() == 1 && self.cvc(self.k) {
                self.set_to(b"e");
            }
        }
        // Keep the buffer in step with k after in-place shortening.
        self.b.truncate((self.k + 1) as usize);
    }

    fn step1c(&mut self) {
        if self.ends(b"y") && self.vowel_in_stem() {
            let k = self.k as usize;
            self.b[k] = b'i';
        }
    }

    fn step2(&mut self) {
        const RULES: &[(u8, &Suffixes)] = &[
            (b'a', &[(b"ational", b"ate"), (b"tional", b"tion")]),
            (b'c', &[(b"enci", b"ence"), (b"anci", b"ance")]),
            (b'e', &[(b"izer", b"ize")]),
            (
                b'l',
                &[
                    (b"bli", b"ble"),
                    (b"alli", b"al"),
                    (b"entli", b"ent"),
                    (b"eli", b"e"),
                    (b"ousli", b"ous"),
                ],
            ),
            (
                b'o',
                &[(b"ization", b"ize"), (b"ation", b"ate"), (b"ator", b"ate")],
            ),
            (
                b's',
                &[
                    (b"alism", b"al"),
                    (b"iveness", b"ive"),
                    (b"fulness", b"ful"),
                    (b"ousness", b"ous"),
                ],
            ),
            (
                b't',
                &[(b"aliti", b"al"), (b"iviti", b"ive"), (b"biliti", b"ble")],
            ),
            (b'g', &[(b"logi", b"log")]),
        ];
        self.apply_rules(self.at(self.k - 1), RULES);
    }

    fn step3(&mut self) {
        const RULES: &[(u8, &Suffixes)] = &[
            (
                b'e',
                &[(b"icate", b"ic"), (b"ative", b""), (b"alize", b"al")],
            ),
            (b'i', &[(b"iciti", b"ic")]),
            (b'l', &[(b"ical", b"ic"), (b"ful", b"")]),
            (b's', &[(b"ness", b"")]),
        ];
        self.apply_rules(self.at(self.k), RULES);
    }

    /// First matching suffix wins, whether or not the measure allows the
    /// replacement.
    fn apply_rules(&mut self, key: u8, rules: &[(u8, &Suffixes)]) {
        let Some((_, group)) = rules.iter().find(|(c, _)| *c == key) else {
            return;
        };
        for (suffix, replacement) in group.iter() {
            if self.ends(suffix) {
                self.replace_if_measured(replacement);
                return;
            }
        }
    }

    fn step4(&mut self) {
        let matched = match self.at(self.k - 1) {
            b'a' => self.ends(b"al"),
            b'c' => self.ends(b"ance") || self.ends(b"ence"),
            b'e' => self.ends(b"er"),
            b'i' => self.ends(b"ic"),
            b'l' => self.ends(b"able") || self.ends(b"ible"),
            b'n' => {
                self.ends(b"ant") || self.ends(b"ement") || self.ends(b"ment") || self.ends(b"ent")
            }
            b'o' => {
                (self.ends(b"ion") && self.j >= 0 && matches!(self.at(self.j), b's' | b't'))
                    || self.ends(b"ou")
            }
            b's' => self.ends(b"ism"),
            b't' => self.ends(b"ate") || self.ends(b"iti"),
            b'u' => self.ends(b"ous"),
            b'v' => self.ends(b"ive"),
            b'z' => self.ends(b"ize"),
            _ => false,
        };
        if matched && self.m() > 1 {
            self.k = self.j;
        }
    }

    fn step5(&mut self) {
        self.j = self.k;
        if self.at(self.k) == b'e' {
            let a = self.m();
            if a > 1 || (a == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.at(self.k) == b'l' && self.double_cons(self.k) && self.m() > 1 {
            self.k -= 1;
        }
    }
}
