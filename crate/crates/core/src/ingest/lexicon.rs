//! Hashtag stance lexicons and high-precision tweet tagging.

use std::borrow::Cow;
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::error::IngestError;
use crate::model::{Stance, StanceSpace, NO_STANCE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconStance {
    pub id: String,
    #[serde(default)]
    pub label: Option<String>,
    pub hashtags: Vec<String>,
}

/// On-disk lexicon layout: `{topic, stances: [{id, label, hashtags}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconFile {
    pub topic: String,
    pub stances: Vec<LexiconStance>,
}

/// A validated lexicon: every normalized hashtag maps to exactly one stance.
#[derive(Debug, Clone)]
pub struct StanceLexicon {
    topic: String,
    space: Arc<StanceSpace>,
    tags: HashMap<String, usize>,
}

/// Outcome of tagging one tweet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StanceTag {
    /// Hashtags matched exactly one stance.
    Stance(usize),
    /// No lexicon hashtag present.
    NoStance,
    /// Hashtags from two or more conflicting stances; treated as no stance.
    Ambiguous,
}

impl StanceTag {
    /// Stance index, with both abstentions mapped to the sentinel.
    pub fn index(self) -> usize {
        match self {
            StanceTag::Stance(i) => i,
            StanceTag::NoStance | StanceTag::Ambiguous => NO_STANCE,
        }
    }
}

/// Strip a leading `#`, case-fold and NFC-normalize.
pub fn normalize_hashtag(tag: &str) -> Cow<'_, str> {
    let tag = tag.strip_prefix('#').unwrap_or(tag).trim();
    if tag.is_ascii() {
        if tag.bytes().any(|b| b.is_ascii_uppercase()) {
            Cow::Owned(tag.to_ascii_lowercase())
        } else {
            Cow::Borrowed(tag)
        }
    } else {
        let lower: String = tag.nfc().collect::<String>().to_lowercase();
        if is_nfc(&lower) {
            Cow::Owned(lower)
        } else {
            Cow::Owned(lower.nfc().collect())
        }
    }
}

impl StanceLexicon {
    pub fn from_file(file: LexiconFile) -> Result<Self, IngestError> {
        let invalid = |msg: String| IngestError::InvalidLexicon(msg);
        let stances: Vec<Stance> = file
            .stances
            .iter()
            .map(|s| Stance::new(s.id.clone(), s.label.clone().unwrap_or_else(|| s.id.clone())))
            .collect();
        let space = Arc::new(StanceSpace::exclusive(stances).map_err(|e| invalid(e.to_string()))?);
        let mut tags = HashMap::new();
        let mut populated = 0;
        for (i, stance) in file.stances.iter().enumerate() {
            let index = i + 1;
            let mut any = false;
            for raw in &stance.hashtags {
                let tag = normalize_hashtag(raw).into_owned();
                if tag.is_empty() {
                    return Err(invalid(format!("empty hashtag under stance {:?}", stance.id)));
                }
                match tags.insert(tag.clone(), index) {
                    Some(prev) if prev != index => {
                        return Err(invalid(format!(
                            "hashtag #{tag} listed under both {:?} and {:?}",
                            file.stances[prev - 1].id, stance.id
                        )));
                    }
                    _ => any = true,
                }
            }
            if any {
                populated += 1;
            }
        }
        if populated < 2 {
            return Err(invalid("need at least two stances with hashtags".into()));
        }
        Ok(Self {
            topic: file.topic,
            space,
            tags,
        })
    }

    pub fn from_json(json: &str) -> Result<Self, IngestError> {
        Self::from_file(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn space(&self) -> &Arc<StanceSpace> {
        &self.space
    }

    /// Stance of a single hashtag, if listed.
    pub fn lookup(&self, hashtag: &str) -> Option<usize> {
        self.tags.get(normalize_hashtag(hashtag).as_ref()).copied()
    }

    /// Tag a bag of hashtags: a stance only on unambiguous evidence.
    pub fn tag<I, S>(&self, hashtags: I) -> StanceTag
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut found: Option<usize> = None;
        for tag in hashtags {
            if let Some(stance) = self.lookup(tag.as_ref()) {
                match found {
                    None => found = Some(stance),
                    Some(prev) if prev != stance && self.space.conflicts(prev, stance) => return StanceTag::Ambiguous,
                    Some(_) => {}
                }
            }
        }
        found.map_or(StanceTag::NoStance, StanceTag::Stance)
    }
}
