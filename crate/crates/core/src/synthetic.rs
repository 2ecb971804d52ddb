//! Synthetic product catalogs with planted matches.
//!
//! The left dataset holds `left_size` distinct products. `matches` of them are
//! copied into the right dataset with character typos, swapped values and
//! deleted cells; the remaining right rows are fresh products. A share of
//! products (`variant_rate`) are variants of an earlier one (same brand,
//! category and product noun), which makes for realistic near-misses.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Tuple};
use crate::{Error, Result};

pub const ATTRIBUTES: [&str; 4] = ["title", "manufacturer", "category", "price"];

const BRANDS: &[&str] = &[
    "aspyr media", "adobe", "microsoft", "electronic arts", "ubisoft", "sony", "nintendo", "logitech",
    "corel", "intuit", "symantec", "mcafee", "autodesk", "broderbund", "activision", "take two",
    "sega", "capcom", "konami", "atari", "thq", "eidos", "vivendi", "nero", "roxio", "avanquest",
    "encore", "topics entertainment", "individual software", "punch software", "smith micro",
    "cyberlink", "sonic foundry", "magix", "pinnacle", "kaspersky", "trend micro", "panda security",
    "apple", "riverdeep",
];

const ADJECTIVES: &[&str] = &[
    "deluxe", "premium", "ultimate", "complete", "essential", "advanced", "professional", "classic",
    "platinum", "gold", "home", "small business", "academic", "family", "digital", "interactive",
    "portable", "extreme", "super", "mega", "legendary", "original", "expanded", "limited", "special",
    "standard", "express", "plus", "elite", "master",
];

const NOUNS: &[&str] = &[
    "sims", "photoshop", "office", "quicken", "norton", "racing", "soccer", "chess", "flight",
    "typing", "math", "reading", "spanish", "french", "garden", "kitchen", "studio", "movie", "music",
    "photo", "drawing", "poker", "golf", "tennis", "baseball", "hockey", "pinball", "puzzle",
    "trivia", "mystery", "pirates", "dragons", "zoo", "farm", "city", "railroad", "airport", "hotel",
    "castle", "galaxy", "ocean", "jungle", "desert", "island", "arena", "tycoon", "legends", "heroes",
    "knights", "ninjas", "robots", "wizards", "detective", "explorer", "builder", "designer",
    "planner", "tutor", "encyclopedia", "atlas",
];

const KINDS: &[&str] = &[
    "suite", "collection", "pack", "edition", "bundle", "toolkit", "manager", "creator", "simulator",
    "trainer", "workshop", "adventure", "challenge", "tournament", "expansion", "deluxe set",
    "starter kit", "anthology", "studio", "essentials",
];

const CATEGORIES: &[&str] = &[
    "pc games", "mac games", "education", "business software", "security", "photo editing",
    "video editing", "music software", "utilities", "reference", "kids software", "language learning",
];

const TYPO_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub left_size: usize,
    pub right_size: usize,
    pub matches: usize,
    /// Per-character probability of a typo (substitution, deletion or
    /// insertion) in matched right rows.
    pub char_noise: f64,
    /// Per-row probability of swapping two attribute values.
    pub swap_rate: f64,
    /// Per-cell probability of deleting a value.
    pub deletion_rate: f64,
    /// Probability that a new product is a variant of an earlier one, sharing
    /// brand, category and the title apart from adjective and model code.
    pub variant_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            left_size: 500,
            right_size: 500,
            matches: 300,
            char_noise: 0.1,
            swap_rate: 0.0,
            deletion_rate: 0.05,
            variant_rate: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub left: Dataset,
    pub right: Dataset,
    /// `(left index, right index)` of planted matches, sorted by left index.
    pub truth: Vec<(usize, usize)>,
}

type Row = [String; 4];

struct Generator {
    rng: ChaCha8Rng,
    seen: BTreeSet<Row>,
    made: Vec<Row>,
}

impl Generator {
    fn pick(&mut self, list: &[&str]) -> String {
        String::from(*list.choose(&mut self.rng).expect("non-empty word list"))
    }

    fn model(&mut self) -> String {
        let letter = char::from(b'a' + self.rng.random_range(0..26u8));
        format!("{letter}{}", self.rng.random_range(10..1000))
    }

    fn price(&mut self) -> String {
        format!("{}.{:02}", self.rng.random_range(5..500), self.rng.random_range(0..100))
    }

    fn product(&mut self, variant_rate: f64) -> Row {
        loop {
            let row = match self.made.is_empty() || !self.rng.random_bool(variant_rate) {
                true => {
                    let brand = self.pick(BRANDS);
                    let title = format!(
                        "{} {} {} {}",
                        self.pick(ADJECTIVES),
                        self.pick(NOUNS),
                        self.pick(KINDS),
                        self.model()
                    );
                    [title, brand, self.pick(CATEGORIES), self.price()]
                }
                false => {
                    // variant of an earlier product
                    let base = self.made.choose(&mut self.rng).expect("non-empty").clone();
                    let words: Vec<&str> = base[0].split(' ').collect();
                    let title = format!(
                        "{} {} {}",
                        self.pick(ADJECTIVES),
                        words[1..words.len() - 1].join(" "),
                        self.model()
                    );
                    [title, base[1].clone(), base[2].clone(), self.price()]
                }
            };
            if self.seen.insert(row.clone()) {
                self.made.push(row.clone());
                return row;
            }
        }
    }

    fn typos(&mut self, s: &str, rate: f64) -> String {
        let mut out = String::with_capacity(s.len() + 4);
        for c in s.chars() {
            if rate <= 0.0 || !self.rng.random_bool(rate) {
                out.push(c);
                continue;
            }
            match self.rng.random_range(0..3) {
                0 => {
                    let mut r = c;
                    while r == c {
                        r = char::from(*TYPO_ALPHABET.choose(&mut self.rng).expect("alphabet"));
                    }
                    out.push(r);
                }
                1 => {}
                _ => {
                    out.push(char::from(*TYPO_ALPHABET.choose(&mut self.rng).expect("alphabet")));
                    out.push(c);
                }
            }
        }
        out
    }
}

fn check_rate(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Infeasible(format!("{name} must lie in [0, 1]")));
    }
    Ok(())
}

pub fn make_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.matches > spec.left_size.min(spec.right_size) {
        return Err(Error::Infeasible(format!(
            "{} matches exceed the smaller dataset size {}",
            spec.matches,
            spec.left_size.min(spec.right_size)
        )));
    }
    check_rate("char_noise", spec.char_noise)?;
    check_rate("swap_rate", spec.swap_rate)?;
    check_rate("deletion_rate", spec.deletion_rate)?;
    check_rate("variant_rate", spec.variant_rate)?;
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        seen: BTreeSet::new(),
        made: Vec::new(),
    };
    let left_rows: Vec<Row> = (0..spec.left_size).map(|_| g.product(spec.variant_rate)).collect();
    let mut matched: Vec<usize> = (0..spec.left_size).collect();
    matched.shuffle(&mut g.rng);
    matched.truncate(spec.matches);
    matched.sort_unstable();

    // (row cells, source left index)
    let mut right_rows: Vec<(Vec<Option<String>>, Option<usize>)> = Vec::with_capacity(spec.right_size);
    for &l in &matched {
        let mut cells: Vec<Option<String>> = left_rows[l]
            .iter()
            .map(|v| Some(g.typos(v, spec.char_noise)))
            .collect();
        if spec.swap_rate > 0.0 && g.rng.random_bool(spec.swap_rate) {
            let a = g.rng.random_range(0..cells.len());
            let b = (a + g.rng.random_range(1..cells.len())) % cells.len();
            cells.swap(a, b);
        }
        for c in cells.iter_mut() {
            if spec.deletion_rate > 0.0 && g.rng.random_bool(spec.deletion_rate) {
                *c = None;
            }
        }
        right_rows.push((cells, Some(l)));
    }
    while right_rows.len() < spec.right_size {
        let row = g.product(spec.variant_rate);
        right_rows.push((row.into_iter().map(Some).collect(), None));
    }
    right_rows.shuffle(&mut g.rng);

    let attributes: Vec<String> = ATTRIBUTES.iter().map(|a| String::from(*a)).collect();
    let left_tuples = left_rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| Tuple::new(format!("l{i}"), row.into_iter().map(Some).collect()))
        .collect();
    let mut truth = Vec::with_capacity(spec.matches);
    let mut right_tuples = Vec::with_capacity(spec.right_size);
    for (j, (cells, source)) in right_rows.into_iter().enumerate() {
        // typos can empty a cell or make it read like a sentinel
        let cells: Vec<Option<String>> = cells
            .into_iter()
            .map(|c| c.filter(|v| !crate::text::is_missing_cell(v)))
            .collect();
        right_tuples.push(Tuple::new(format!("r{j}"), cells));
        if let Some(l) = source {
            truth.push((l, j));
        }
    }
    truth.sort_unstable();
    Ok(SyntheticData {
        left: Dataset::new("left", attributes.clone(), left_tuples)?,
        right: Dataset::new("right", attributes, right_tuples)?,
        truth,
    })
}
