//! JSON instance files.
//!
//! ```json
//! {
//!   "n": 4,
//!   "requests": [
//!     { "items": [1, 3], "k": 1 },
//!     { "items": [2, 3, 4], "k": 2 }
//!   ]
//! }
//! ```
//!
//! Items are 1-based. `k` is the covering requirement and must lie in
//! `1..=items.len()`. Serialization always writes `n` before `requests`,
//! and `items` (ascending) before `k`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Request};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    n: usize,
    requests: Vec<RequestDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestDoc {
    items: Vec<usize>,
    k: usize,
}

pub fn parse_instance(bytes: &[u8]) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        request: None,
        message: e.to_string(),
    })?;
    if doc.n == 0 {
        return Err(Error::Parse {
            request: None,
            message: "n must be positive".into(),
        });
    }
    let mut requests = Vec::with_capacity(doc.requests.len());
    for (idx, r) in doc.requests.into_iter().enumerate() {
        let parsed = Request::from_one_based(&r.items, r.k)
            .and_then(|req| req.check_universe(doc.n).map(|_| req))
            .map_err(|e| Error::Parse {
                request: Some(idx),
                message: e.to_string(),
            })?;
        requests.push(parsed);
    }
    Instance::new(doc.n, requests)
}

pub fn serialize_instance(inst: &Instance) -> Vec<u8> {
    let doc = InstanceDoc {
        n: inst.n(),
        requests: inst
            .requests()
            .iter()
            .map(|r| RequestDoc {
                items: r.items().iter().map(|x| x + 1).collect(),
                k: r.demand(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("instance documents always serialize");
    out.push(b'\n');
    out
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&bytes)
}

pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    std::fs::write(path, serialize_instance(inst)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_request_list() {
        let inst = parse_instance(br#"{"n": 3, "requests": []}"#).unwrap();
        assert_eq!(inst.n(), 3);
        assert!(inst.is_empty());
    }

    #[test]
    fn zero_demand_names_request() {
        let doc = br#"{"n": 3, "requests": [{"items": [1], "k": 1}, {"items": [2, 3], "k": 0}]}"#;
        match parse_instance(doc) {
            Err(Error::Parse {
                request: Some(1), ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_range_errors() {
        let dup = br#"{"n": 3, "requests": [{"items": [2, 2], "k": 1}]}"#;
        assert!(matches!(
            parse_instance(dup),
            Err(Error::Parse {
                request: Some(0),
                ..
            })
        ));
        let out = br#"{"n": 3, "requests": [{"items": [1], "k": 1}, {"items": [4], "k": 1}]}"#;
        assert!(matches!(
            parse_instance(out),
            Err(Error::Parse {
                request: Some(1),
                ..
            })
        ));
        let big_k = br#"{"n": 3, "requests": [{"items": [1, 2], "k": 3}]}"#;
        assert!(parse_instance(big_k).is_err());
        assert!(parse_instance(b"{\"n\": 3}").is_err());
        assert!(parse_instance(b"not json").is_err());
    }

    #[test]
    fn serialized_field_order() {
        let inst = Instance::new(
            3,
            vec![Request::from_one_based(&[3, 1], 2).unwrap()],
        )
        .unwrap();
        let text = String::from_utf8(serialize_instance(&inst)).unwrap();
        let n_at = text.find("\"n\"").unwrap();
        let req_at = text.find("\"requests\"").unwrap();
        let items_at = text.find("\"items\"").unwrap();
        let k_at = text.find("\"k\"").unwrap();
        assert!(n_at < req_at && items_at < k_at);
        assert_eq!(parse_instance(text.as_bytes()).unwrap(), inst);
    }
}
