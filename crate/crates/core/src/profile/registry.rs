use super::is_name_token;

const SHIPPED_TOPICS: &str = include_str!("../../../../config/topics.txt");

/// Declared knowledge topics. Every profile carries a level for each of them
/// (`none` when the teacher gave nothing).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicRegistry {
    topics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("line {line}: {topic:?} is not a valid topic name")]
    InvalidTopic { line: usize, topic: String },
    #[error("line {line}: topic {topic:?} declared twice")]
    Duplicate { line: usize, topic: String },
}

impl TopicRegistry {
    /// One topic per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut topics: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !is_name_token(line) {
                return Err(RegistryError::InvalidTopic { line: idx + 1, topic: line.to_string() });
            }
            if topics.iter().any(|t| t == line) {
                return Err(RegistryError::Duplicate { line: idx + 1, topic: line.to_string() });
            }
            topics.push(line.to_string());
        }
        Ok(TopicRegistry { topics })
    }

    /// The registry shipped in `config/topics.txt`.
    pub fn shipped() -> Self {
        Self::parse(SHIPPED_TOPICS).expect("shipped topic registry parses")
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    pub fn contains(&self, topic: &str) -> bool {
        self.topics.iter().any(|t| t == topic)
    }
}
