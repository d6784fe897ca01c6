//! Line format for extracted features:
//! `instance-id TAB sense TAB key:value key:value ...` with sorted keys.

use super::SparseFeatures;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureLine {
    pub instance_id: String,
    pub sense: String,
    pub features: SparseFeatures,
}

pub fn write_feature_line(instance_id: &str, sense: &str, features: &SparseFeatures) -> String {
    let body: Vec<String> = features
        .iter()
        .map(|(k, v)| format!("{}:{v}", k.replace(char::is_whitespace, "_")))
        .collect();
    format!("{instance_id}\t{sense}\t{}", body.join(" "))
}

/// Parse one line; keys may themselves contain `:`, the value follows the last one.
pub fn parse_feature_line(line: &str, line_no: usize) -> Result<FeatureLine> {
    let err = |message: String| Error::Parse { line: line_no, message };
    let mut parts = line.splitn(3, '\t');
    let (Some(id), Some(sense), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(err("expected three tab-separated fields".into()));
    };
    let mut features = SparseFeatures::new();
    for item in body.split(' ').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .rsplit_once(':')
            .ok_or_else(|| err(format!("feature `{item}` lacks a value")))?;
        let v: f64 = v.parse().map_err(|_| err(format!("bad value in `{item}`")))?;
        features.set(k, v);
    }
    Ok(FeatureLine {
        instance_id: id.to_string(),
        sense: sense.to_string(),
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let f: SparseFeatures = [
            ("uni:b".to_string(), 2.0),
            ("col:-1,+1:with_education".to_string(), 1.0),
            ("we:0".to_string(), -0.125),
        ]
        .into_iter()
        .collect();
        let line = write_feature_line("9336574:nutrition:12", "M1", &f);
        assert_eq!(line, "9336574:nutrition:12\tM1\tcol:-1,+1:with_education:1 uni:b:2 we:0:-0.125");
        let back = parse_feature_line(&line, 1).unwrap();
        assert_eq!(back.features, f);
        assert_eq!(back.sense, "M1");
    }

    #[test]
    fn malformed_lines() {
        assert!(parse_feature_line("only-id", 3).is_err());
        assert!(matches!(parse_feature_line("a\tb\tnovalue", 4), Err(Error::Parse { line: 4, .. })));
    }
}
