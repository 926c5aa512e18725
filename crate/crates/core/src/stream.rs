//! The classified-stream record: an input record plus `posteriors` and `positives`.

use std::io::BufRead;

use serde::Serialize;
use serde_json::Value;

use crate::classify::Classification;
use crate::geo::GeoTweet;
use crate::ingest::{parse_tweet_object, Tweet, TweetRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedTweet {
    pub tweet: Tweet,
    pub classification: Classification,
}

#[derive(Serialize)]
struct ClassifiedRecord<'a> {
    #[serde(flatten)]
    record: TweetRecord<'a>,
    #[serde(flatten)]
    classification: &'a Classification,
}

impl ClassifiedTweet {
    pub fn to_line(&self) -> String {
        serde_json::to_string(&ClassifiedRecord {
            record: self.tweet.to_record(),
            classification: &self.classification,
        })
        .expect("classified record serializes")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(line).map_err(|e| Error::json("classified record", e))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidInput("classified record is not an object".into()))?;
        let tweet = parse_tweet_object(obj).map_err(|r| Error::InvalidInput(r.to_string()))?;
        let classification = serde_json::from_value(value)
            .map_err(|e| Error::json("classified record posteriors/positives", e))?;
        Ok(ClassifiedTweet {
            tweet,
            classification,
        })
    }

    pub fn geo(&self) -> GeoTweet {
        GeoTweet {
            id: self.tweet.id.clone(),
            timestamp: self.tweet.timestamp,
            point: self.tweet.point(),
            posteriors: self.classification.posteriors.clone(),
        }
    }
}

/// Reads a whole classified stream; any bad line is an error naming its line number.
pub fn read_classified<R: BufRead>(reader: R) -> Result<Vec<ClassifiedTweet>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<classified stream>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = ClassifiedTweet::parse_line(&line)
            .map_err(|e| Error::InvalidInput(format!("classified stream line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
