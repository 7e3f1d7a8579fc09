//! Deterministic synthetic corpus with planted topical structure.
//!
//! Words belong to topics, topics to domains. Documents pick a domain and a
//! pair of its topics, sentences draw content words from the active topic's
//! Zipf distribution mixed with domain words and function words. A
//! geography domain adds relational structure (country, capital, adjective)
//! so analogy probes have something to find. The matching
//! [`similarity_dataset`](Lexicon::similarity_dataset) scores pairs from the
//! same latent memberships the generator samples from.
//!
//! The lexicon is fixed; only sampling depends on the seed.

use std::io::Write;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::corpus::TokenStream;
use crate::eval::SimilarityDataset;
use crate::Result;

pub const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "to", "a", "in", "is", "was", "that", "for", "it", "with", "as", "on", "by", "he", "at",
    "from", "his", "an", "were", "are", "which", "this", "be", "or", "has", "had", "not", "but", "its", "they", "also",
    "their", "one", "been", "after", "first", "who", "her", "have", "more", "other", "into", "all", "when", "there",
    "she", "two", "during",
];

const COMPUTING: &[&str] = &[
    "computer",
    "computers",
    "software",
    "hardware",
    "program",
    "programs",
    "systems",
    "game",
    "data",
    "network",
    "memory",
    "processor",
    "code",
    "user",
    "digital",
    "internet",
    "machine",
    "electronic",
    "keyboard",
    "screen",
];
const PHYSICS: &[&str] = &[
    "physics",
    "mathematics",
    "chemistry",
    "astronomy",
    "theory",
    "study",
    "mechanics",
    "quantum",
    "particle",
    "energy",
    "relativity",
    "electron",
    "equations",
    "scientist",
    "laboratory",
    "experiment",
    "atoms",
    "gravity",
    "optics",
    "research",
];
const ROYALTY: &[&str] = &[
    "king", "kings", "emperor", "queen", "prince", "princess", "throne", "crown", "reign", "henry", "charles", "james",
    "son", "iii", "ii", "england", "dynasty", "royal", "duke", "heir",
];
const WAR: &[&str] = &[
    "wounded",
    "killed",
    "injured",
    "captured",
    "defeated",
    "soldiers",
    "battle",
    "army",
    "troops",
    "attack",
    "dead",
    "mortally",
    "casualties",
    "enemy",
    "fighting",
    "siege",
    "regiment",
    "officers",
    "surrendered",
    "artillery",
];
const CHURCH: &[&str] = &[
    "anglican",
    "lutheran",
    "episcopal",
    "orthodox",
    "presbyterian",
    "catholic",
    "communion",
    "churches",
    "church",
    "bishop",
    "diocese",
    "clergy",
    "parish",
    "protestant",
    "congregation",
    "cathedral",
    "priest",
    "worship",
    "denomination",
    "methodist",
];
const FARM: &[&str] = &[
    "cow",
    "milk",
    "pig",
    "meat",
    "horse",
    "horses",
    "cattle",
    "sheep",
    "barn",
    "farmer",
    "pasture",
    "grain",
    "hay",
    "cows",
    "pigs",
    "dairy",
    "livestock",
    "plough",
    "harvest",
    "goats",
];
const HOUSEHOLD: &[&str] = &[
    "glass", "glasses", "plate", "cup", "table", "kitchen", "bottle", "spoon", "window", "chair", "bowl", "knife",
    "drawer", "shelf", "jug", "kettle", "oven", "towel", "bucket", "lamp",
];
const ADJECTIVES: &[&str] = &[
    "nice",
    "ugly",
    "small",
    "large",
    "big",
    "tiny",
    "beautiful",
    "pretty",
    "huge",
    "little",
    "tall",
    "short",
    "old",
    "young",
    "lovely",
    "enormous",
    "narrow",
    "wide",
    "clean",
    "dirty",
];

const COUNTRIES: &[(&str, &str, &str)] = &[
    ("italy", "rome", "italian"),
    ("france", "paris", "french"),
    ("germany", "berlin", "german"),
    ("spain", "madrid", "spanish"),
    ("switzerland", "bern", "swiss"),
    ("russia", "moscow", "russian"),
    ("greece", "athens", "greek"),
    ("portugal", "lisbon", "portuguese"),
    ("austria", "vienna", "austrian"),
    ("poland", "warsaw", "polish"),
    ("sweden", "stockholm", "swedish"),
    ("egypt", "cairo", "egyptian"),
    ("japan", "tokyo", "japanese"),
    ("china", "beijing", "chinese"),
];
const ROLE_WORDS: [&[&str]; 3] = [
    &[
        "nation",
        "border",
        "government",
        "population",
        "territory",
        "republic",
        "economy",
        "province",
    ],
    &[
        "city", "streets", "mayor", "downtown", "harbor", "avenue", "district", "suburbs",
    ],
    &[
        "language",
        "people",
        "cuisine",
        "culture",
        "dialect",
        "literature",
        "cinema",
        "music",
    ],
];
const GEO_GENERAL: &[&str] = &[
    "travel",
    "region",
    "north",
    "south",
    "coast",
    "river",
    "mountains",
    "east",
    "west",
    "island",
];

/// Generic content words that turn up in every domain.
const BACKGROUND: &[&str] = &[
    "time",
    "year",
    "years",
    "work",
    "place",
    "way",
    "part",
    "made",
    "new",
    "many",
    "later",
    "known",
    "called",
    "number",
    "life",
    "day",
    "world",
    "state",
    "form",
    "end",
    "house",
    "name",
    "group",
    "found",
    "became",
    "used",
    "century",
    "well",
    "great",
    "long",
    "early",
    "high",
    "began",
    "left",
    "home",
    "major",
    "several",
    "however",
    "including",
    "since",
    "three",
    "four",
    "second",
    "last",
    "given",
    "modern",
    "best",
    "important",
    "often",
    "among",
    "took",
    "general",
    "line",
    "order",
    "area",
    "local",
    "public",
    "national",
    "main",
    "based",
];
const BACKGROUND_PSEUDO: usize = 60;
const PSEUDO_PER_TOPIC: usize = 24;
const DOMAIN_WORDS: usize = 10;
const PRIVATE_PER_COUNTRY: usize = 3;
const LEXICON_SEED: u64 = 0x5EED_1E81_C0DE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TopicKind {
    Plain,
    Country(usize),
    Role(usize),
    GeoGeneral,
}

#[derive(Debug, Clone)]
struct Topic {
    domain: usize,
    kind: TopicKind,
    /// Share of tokens in this topic's sentences drawn from the background vocabulary.
    background_rate: f64,
}

/// The fixed vocabulary with latent topic memberships.
#[derive(Debug, Clone)]
pub struct Lexicon {
    words: Vec<Box<str>>,
    index: FxHashMap<Box<str>, usize>,
    /// Sparse `(topic, weight)` memberships per word.
    membership: Vec<Vec<(usize, f64)>>,
    topics: Vec<Topic>,
    domains: usize,
    domain_words: Vec<Vec<usize>>,
    /// Per topic: member words and Zipf-scaled emission weights.
    emission: Vec<(Vec<usize>, Vec<f64>)>,
    /// Per country: entity word ids (country, capital, adjective) and private ids.
    countries: Vec<([usize; 3], Vec<usize>)>,
    background: Vec<usize>,
    /// Per domain: Zipf weights over a domain-specific ordering of the background words.
    background_emitters: Vec<WeightedIndex<f64>>,
}

fn pseudo_words(count: usize, taken: &FxHashSet<String>, rng: &mut ChaCha8Rng) -> Vec<String> {
    const ONSETS: &[&str] = &[
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr", "st", "gl",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    const CODAS: &[&str] = &["", "", "", "n", "r", "s", "l", "x"];
    let mut out = Vec::with_capacity(count);
    let mut seen = taken.clone();
    while out.len() < count {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

impl Lexicon {
    pub fn new() -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(LEXICON_SEED);
        let mut taken: FxHashSet<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
        let real: [&[&str]; 8] = [COMPUTING, PHYSICS, ROYALTY, WAR, CHURCH, FARM, HOUSEHOLD, ADJECTIVES];
        for list in real.iter().chain(ROLE_WORDS.iter()).chain([GEO_GENERAL].iter()) {
            taken.extend(list.iter().map(|w| w.to_string()));
        }
        for (a, b, c) in COUNTRIES {
            taken.extend([a, b, c].map(|w| w.to_string()));
        }
        taken.extend(BACKGROUND.iter().map(|w| w.to_string()));

        let mut lex = Lexicon {
            words: Vec::new(),
            index: FxHashMap::default(),
            membership: Vec::new(),
            topics: Vec::new(),
            domains: 0,
            domain_words: Vec::new(),
            emission: Vec::new(),
            countries: Vec::new(),
            background: Vec::new(),
            background_emitters: Vec::new(),
        };
        // domain layout: tech, history, daily, geography, then six pseudo domains
        let real_domain = [0, 0, 1, 1, 1, 2, 2, 2];
        let pseudo_topics_per_domain = [6, 5, 5, 0, 8, 8, 8, 8, 8, 8];
        lex.domains = pseudo_topics_per_domain.len();
        let geography = 3;

        for (list, &domain) in real.iter().zip(&real_domain) {
            let t = lex.add_topic(domain, TopicKind::Plain);
            for w in *list {
                let id = lex.add_word(w);
                lex.membership[id].push((t, 1.0));
            }
        }
        let mut plain_pseudo = Vec::new();
        for (domain, &count) in pseudo_topics_per_domain.iter().enumerate() {
            for _ in 0..count {
                let t = lex.add_topic(domain, TopicKind::Plain);
                for w in pseudo_words(PSEUDO_PER_TOPIC, &taken, &mut rng) {
                    taken.insert(w.clone());
                    let id = lex.add_word(&w);
                    lex.membership[id].push((t, 1.0));
                    plain_pseudo.push(id);
                }
            }
        }
        // a quarter of pseudo words also lean towards a second topic, usually in the same domain
        for &id in &plain_pseudo {
            if rng.gen_bool(0.25) {
                let primary = lex.membership[id][0].0;
                let domain = lex.topics[primary].domain;
                let pool: Vec<usize> = if rng.gen_bool(0.7) {
                    (0..lex.topics.len())
                        .filter(|&t| {
                            t != primary && lex.topics[t].domain == domain && lex.topics[t].kind == TopicKind::Plain
                        })
                        .collect()
                } else {
                    (0..lex.topics.len())
                        .filter(|&t| t != primary && lex.topics[t].kind == TopicKind::Plain)
                        .collect()
                };
                if let Some(&t) = pool.choose(&mut rng) {
                    lex.membership[id].push((t, 0.4));
                }
            }
        }

        let roles: Vec<usize> = (0..3).map(|r| lex.add_topic(geography, TopicKind::Role(r))).collect();
        let general = lex.add_topic(geography, TopicKind::GeoGeneral);
        for (r, list) in ROLE_WORDS.iter().enumerate() {
            for w in *list {
                let id = lex.add_word(w);
                lex.membership[id].push((roles[r], 1.0));
            }
        }
        for w in GEO_GENERAL {
            let id = lex.add_word(w);
            lex.membership[id].push((general, 1.0));
        }
        for (c, (country, capital, adjective)) in COUNTRIES.iter().enumerate() {
            let t = lex.add_topic(geography, TopicKind::Country(c));
            let mut entities = [0; 3];
            for (r, w) in [country, capital, adjective].into_iter().enumerate() {
                let id = lex.add_word(w);
                lex.membership[id].extend([(t, 1.0), (roles[r], 0.5)]);
                entities[r] = id;
            }
            let private: Vec<usize> = pseudo_words(PRIVATE_PER_COUNTRY, &taken, &mut rng)
                .into_iter()
                .map(|w| {
                    taken.insert(w.clone());
                    let id = lex.add_word(&w);
                    lex.membership[id].push((t, 1.0));
                    id
                })
                .collect();
            lex.countries.push((entities, private));
        }

        for _ in 0..lex.domains {
            let ids = pseudo_words(DOMAIN_WORDS, &taken, &mut rng)
                .into_iter()
                .map(|w| {
                    taken.insert(w.clone());
                    lex.add_word(&w)
                })
                .collect();
            lex.domain_words.push(ids);
        }

        let mut background: Vec<String> = BACKGROUND.iter().map(|w| w.to_string()).collect();
        background.extend(pseudo_words(BACKGROUND_PSEUDO, &taken, &mut rng));
        background.shuffle(&mut rng);
        lex.background = background.iter().map(|w| lex.add_word(w)).collect();
        // each domain reorders a shared global ranking by a random jitter
        let count = lex.background.len();
        lex.background_emitters = (0..lex.domains)
            .map(|_| {
                let mut order: Vec<(f64, usize)> = (0..count)
                    .map(|i| (i as f64 + rng.gen_range(0.0..count as f64 / 2.0), i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut weights = vec![0.0; count];
                for (rank, &(_, i)) in order.iter().enumerate() {
                    weights[i] = 1.0 / (rank as f64 + 2.0);
                }
                WeightedIndex::new(weights).unwrap()
            })
            .collect();
        for t in &mut lex.topics {
            t.background_rate = match t.kind {
                TopicKind::Plain => rng.gen_range(0.04..0.24),
                _ => 0.12,
            };
        }

        lex.emission = (0..lex.topics.len())
            .map(|t| {
                let mut members: Vec<(usize, f64)> = lex
                    .membership
                    .iter()
                    .enumerate()
                    .filter_map(|(id, m)| m.iter().find(|&&(tt, _)| tt == t).map(|&(_, w)| (id, w)))
                    .collect();
                // primary members first so their Zipf ranks come before secondary ones
                members.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let weights = members
                    .iter()
                    .enumerate()
                    .map(|(rank, &(_, m))| m / (rank as f64 + 2.0).powf(0.9))
                    .collect();
                (members.into_iter().map(|(id, _)| id).collect(), weights)
            })
            .collect();
        lex
    }

    fn add_topic(&mut self, domain: usize, kind: TopicKind) -> usize {
        self.topics.push(Topic {
            domain,
            kind,
            background_rate: 0.0,
        });
        self.topics.len() - 1
    }

    fn add_word(&mut self, word: &str) -> usize {
        let id = self.words.len();
        let prev = self.index.insert(word.into(), id);
        assert!(prev.is_none(), "duplicate lexicon word {word}");
        self.words.push(word.into());
        self.membership.push(Vec::new());
        id
    }

    /// Content words (everything except [`FUNCTION_WORDS`]).
    pub fn words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.words.iter().map(|w| &**w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Latent similarity in [0, 1]: mostly shared topic membership, partly shared domain.
    pub fn latent_similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (&ia, &ib) = (self.index.get(a)?, self.index.get(b)?);
        Some(0.75 * self.topic_cosine(ia, ib) + 0.25 * self.domain_cosine(ia, ib))
    }

    fn topic_cosine(&self, a: usize, b: usize) -> f64 {
        let (ma, mb) = (&self.membership[a], &self.membership[b]);
        let dot: f64 = ma
            .iter()
            .filter_map(|(t, x)| mb.iter().find(|(u, _)| u == t).map(|(_, y)| x * y))
            .sum();
        let norm = |m: &Vec<(usize, f64)>| m.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if dot == 0.0 {
            0.0
        } else {
            dot / (norm(ma) * norm(mb))
        }
    }

    fn domain_vector(&self, id: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.domains];
        for &(t, x) in &self.membership[id] {
            v[self.topics[t].domain] += x;
        }
        if let Some(d) = self.domain_words.iter().position(|ws| ws.contains(&id)) {
            v[d] += 1.0;
        }
        v
    }

    fn domain_cosine(&self, a: usize, b: usize) -> f64 {
        let (va, vb) = (self.domain_vector(a), self.domain_vector(b));
        let dot: f64 = va.iter().zip(&vb).map(|(x, y)| x * y).sum();
        let na = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if dot == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }

    /// A wordsim-style dataset of `pairs` distinct pairs scored 0 to 10.
    ///
    /// Roughly a third of the pairs share a topic, a third share a domain and
    /// the rest are unrelated. Scores are ten times the latent similarity plus
    /// Gaussian rater noise, clamped to [0, 10] and rounded to two decimals.
    pub fn similarity_dataset(&self, pairs: usize, noise: f64, seed: u64) -> Result<SimilarityDataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = FxHashSet::default();
        let mut out = Vec::with_capacity(pairs);
        let candidates: Vec<usize> = (0..self.words.len())
            .filter(|id| !self.background.contains(id))
            .collect();
        let word_domain = |id: usize| -> usize {
            match self.membership[id].first() {
                Some(&(t, _)) => self.topics[t].domain,
                None => self.domain_words.iter().position(|ws| ws.contains(&id)).unwrap_or(0),
            }
        };
        let mut attempts = 0;
        while out.len() < pairs && attempts < pairs * 1000 {
            attempts += 1;
            let a = *candidates.choose(&mut rng).unwrap();
            let b = match out.len() % 3 {
                0 => match self.membership[a].first() {
                    Some(&(t, _)) => *self.emission[t].0.choose(&mut rng).unwrap(),
                    None => continue,
                },
                1 => {
                    let d = word_domain(a);
                    let pool: Vec<usize> = candidates.iter().copied().filter(|&w| word_domain(w) == d).collect();
                    *pool.choose(&mut rng).unwrap()
                }
                _ => *candidates.choose(&mut rng).unwrap(),
            };
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            let latent = 0.75 * self.topic_cosine(a, b) + 0.25 * self.domain_cosine(a, b);
            let gauss: f64 = (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0;
            let score = (10.0 * (latent + noise * gauss)).clamp(0.0, 10.0);
            out.push((
                self.words[a].to_string(),
                self.words[b].to_string(),
                (score * 100.0).round() / 100.0,
            ));
        }
        SimilarityDataset::new(out)
    }

    /// Sentence generator; see the module docs.
    pub fn sentences(&self, seed: u64) -> Sentences<'_> {
        let plain: Vec<Vec<usize>> = (0..self.domains)
            .map(|d| {
                (0..self.topics.len())
                    .filter(|&t| self.topics[t].domain == d && self.topics[t].kind == TopicKind::Plain)
                    .collect()
            })
            .collect();
        let emitters = self
            .emission
            .iter()
            .map(|(_, w)| WeightedIndex::new(w).expect("topic has members"))
            .collect();
        let function = WeightedIndex::new((0..FUNCTION_WORDS.len()).map(|r| 1.0 / (r as f64 + 1.0))).unwrap();
        Sentences {
            lex: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
            plain,
            emitters,
            function,
            doc: Document::Plain {
                domain: 0,
                topics: (0, 0),
            },
            left: 0,
        }
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy)]
enum Document {
    Plain { domain: usize, topics: (usize, usize) },
    Geography { country: usize },
}

/// Endless iterator of generated sentences.
pub struct Sentences<'a> {
    lex: &'a Lexicon,
    rng: ChaCha8Rng,
    plain: Vec<Vec<usize>>,
    emitters: Vec<WeightedIndex<f64>>,
    function: WeightedIndex<f64>,
    doc: Document,
    left: usize,
}

impl<'a> Sentences<'a> {
    fn new_document(&mut self) {
        self.left = self.rng.gen_range(4..=12);
        let domain = self.rng.gen_range(0..self.lex.domains);
        let topics = &self.plain[domain];
        self.doc = if topics.is_empty() {
            Document::Geography {
                country: self.rng.gen_range(0..self.lex.countries.len()),
            }
        } else {
            Document::Plain {
                domain,
                topics: (
                    *topics.choose(&mut self.rng).unwrap(),
                    *topics.choose(&mut self.rng).unwrap(),
                ),
            }
        };
    }

    fn topic_word(&mut self, topic: usize) -> usize {
        self.lex.emission[topic].0[self.emitters[topic].sample(&mut self.rng)]
    }

    fn background_word(&mut self, domain: usize) -> &'a str {
        &self.lex.words[self.lex.background[self.lex.background_emitters[domain].sample(&mut self.rng)]]
    }

    fn function_word(&mut self) -> &'static str {
        FUNCTION_WORDS[self.function.sample(&mut self.rng)]
    }

    fn geography_topic(&self, kind: TopicKind) -> usize {
        self.lex
            .topics
            .iter()
            .position(|t| t.kind == kind)
            .expect("geography topic")
    }
}

impl<'a> Iterator for Sentences<'a> {
    type Item = Vec<&'a str>;

    fn next(&mut self) -> Option<Vec<&'a str>> {
        if self.left == 0 {
            self.new_document();
        }
        self.left -= 1;
        let len = self.rng.gen_range(6..=18);
        let lex = self.lex;
        let mut out: Vec<&'a str> = Vec::with_capacity(len);
        match self.doc {
            Document::Plain { domain, topics } => {
                let topic = if self.rng.gen_bool(0.75) { topics.0 } else { topics.1 };
                for _ in 0..len {
                    let u: f64 = self.rng.gen();
                    let bg = 0.3 + lex.topics[topic].background_rate;
                    if u < 0.3 {
                        out.push(self.function_word());
                    } else if u < bg {
                        out.push(self.background_word(domain));
                    } else if u < bg + 0.08 {
                        let id = *lex.domain_words[domain].choose(&mut self.rng).unwrap();
                        out.push(&lex.words[id]);
                    } else {
                        let id = self.topic_word(topic);
                        out.push(&lex.words[id]);
                    }
                }
            }
            Document::Geography { country } => {
                let role = self.rng.gen_range(0..3);
                let (entities, ref private) = lex.countries[country];
                let role_topic = self.geography_topic(TopicKind::Role(role));
                let general = self.geography_topic(TopicKind::GeoGeneral);
                let anchor = self.rng.gen_range(0..len);
                for i in 0..len {
                    let u: f64 = self.rng.gen();
                    let id = if i == anchor {
                        entities[role]
                    } else if u < 0.3 {
                        out.push(self.function_word());
                        continue;
                    } else if u < 0.42 {
                        out.push(self.background_word(3));
                        continue;
                    } else if u < 0.5 {
                        let other = self.rng.gen_range(0..lex.countries.len());
                        lex.countries[other].0[role]
                    } else if u < 0.58 {
                        if self.rng.gen_bool(0.7) {
                            entities[self.rng.gen_range(0..3)]
                        } else {
                            *private.choose(&mut self.rng).unwrap()
                        }
                    } else if u < 0.78 {
                        self.topic_word(role_topic)
                    } else if u < 0.9 {
                        self.topic_word(general)
                    } else {
                        *lex.domain_words[3].choose(&mut self.rng).unwrap()
                    };
                    out.push(&lex.words[id]);
                }
            }
        }
        Some(out)
    }
}

/// Generates sentences until at least `tokens` tokens, as a stream.
pub fn stream(lexicon: &Lexicon, tokens: usize, seed: u64) -> TokenStream {
    let mut s = TokenStream::new();
    for sentence in lexicon.sentences(seed) {
        if s.token_count() >= tokens {
            break;
        }
        s.push_sentence(&sentence).expect("generated tokens are clean");
    }
    s
}

/// Renders sentences as plain text: capitalized, period-terminated, one document per line.
pub fn write_text<W: Write>(lexicon: &Lexicon, tokens: usize, seed: u64, mut out: W) -> std::io::Result<()> {
    let mut written = 0;
    let mut sentences = lexicon.sentences(seed);
    let mut line = String::new();
    while written < tokens {
        let doc_left = sentences.left;
        let sentence = sentences.next().expect("endless");
        if doc_left == 0 && !line.is_empty() {
            line.pop();
            writeln!(out, "{line}")?;
            line.clear();
        }
        written += sentence.len();
        for (i, w) in sentence.iter().enumerate() {
            if i == 0 {
                let mut chars = w.chars();
                let first = chars.next().expect("non-empty");
                line.extend(first.to_uppercase());
                line.push_str(chars.as_str());
            } else {
                line.push(' ');
                line.push_str(w);
            }
        }
        line.push_str(". ");
    }
    if !line.is_empty() {
        line.pop();
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    #[test]
    fn lexicon_shape() {
        let lex = Lexicon::new();
        assert!((1900..2100).contains(&lex.len()), "{}", lex.len());
        let words: FxHashSet<&str> = lex.words().collect();
        assert_eq!(words.len(), lex.len());
        assert!(FUNCTION_WORDS.iter().all(|w| !words.contains(w)));
        for probe in [
            "computer", "physics", "italy", "king", "paris", "cow", "glasses", "ugly",
        ] {
            assert!(words.contains(probe), "{probe}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let lex = Lexicon::new();
        let a: Vec<_> = lex.sentences(4).take(50).collect();
        let b: Vec<_> = lex.sentences(4).take(50).collect();
        let c: Vec<_> = lex.sentences(5).take(50).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|s| (6..=18).contains(&s.len())));
    }

    #[test]
    fn text_tokenizes_back() {
        let lex = Lexicon::new();
        let mut buf = Vec::new();
        write_text(&lex, 2000, 9, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(tokenize(&text), stream(&lex, 2000, 9));
    }

    #[test]
    fn latent_similarity_orders_relations() {
        let lex = Lexicon::new();
        let s = |a, b| lex.latent_similarity(a, b).unwrap();
        assert_eq!(s("computer", "software"), 1.0);
        assert!(s("computer", "physics") > s("computer", "cow"));
        assert_eq!(s("computer", "cow"), 0.0);
        assert!(s("italy", "rome") > s("italy", "france"));
        assert!(s("italy", "france") > 0.0);
        assert!(lex.latent_similarity("computer", "nope").is_none());
    }

    #[test]
    fn dataset_is_valid_and_mixed() {
        let lex = Lexicon::new();
        let d = lex.similarity_dataset(300, 0.05, 1).unwrap();
        assert_eq!(d.len(), 300);
        let high = d.pairs().iter().filter(|p| p.2 > 6.0).count();
        let low = d.pairs().iter().filter(|p| p.2 < 2.0).count();
        assert!(high > 50 && low > 50, "high {high} low {low}");
        assert_eq!(d, lex.similarity_dataset(300, 0.05, 1).unwrap());
    }
}
