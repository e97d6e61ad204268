//! `<TAG>...</TAG>` block extraction from completion text.

use crate::error::{Error, Result};

/// Block names used across prompts and responses.
pub const TAG_QUESTION: &str = "question";
pub const TAG_TESTBENCH: &str = "testbench";
pub const TAG_REASON: &str = "REASON";
pub const TAG_SOLUTION: &str = "SOLUTION";

/// Content of the first well-formed `<tag>...</tag>` block, trimmed. When the
/// block contains another opening tag, the innermost block wins.
pub fn extract_tagged(text: &str, tag: &str) -> Result<String> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = text
        .find(&open)
        .ok_or_else(|| Error::TagNotFound(tag.to_string()))?;
    let after_open = start + open.len();
    let end_rel = text[after_open..]
        .find(&close)
        .ok_or_else(|| Error::TagNotFound(tag.to_string()))?;
    let mut body = &text[after_open..after_open + end_rel];
    // nested opener: keep the innermost block
    while let Some(inner) = body.find(&open) {
        body = &body[inner + open.len()..];
    }
    Ok(body.trim().to_string())
}

/// Wrap `body` in a tag block (inverse of `extract_tagged` for bodies that do
/// not contain the closing tag).
pub fn compose_tagged(tag: &str, body: &str) -> String {
    format!("<{tag}>\n{body}\n</{tag}>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn extracts_solution_block() {
        let text = "<SOLUTION>module m; endmodule</SOLUTION>";
        assert_eq!(
            extract_tagged(text, TAG_SOLUTION).unwrap(),
            "module m; endmodule"
        );
    }

    #[test]
    fn missing_tag_is_error() {
        assert!(matches!(
            extract_tagged("no tags here", TAG_SOLUTION),
            Err(Error::TagNotFound(_))
        ));
        assert!(matches!(
            extract_tagged("<SOLUTION>unclosed", TAG_SOLUTION),
            Err(Error::TagNotFound(_))
        ));
    }

    #[test]
    fn surrounding_prose_ignored() {
        let text = "Sure! Here's the testbench you asked for:\n<testbench>\nmodule tb;\nendmodule\n</testbench>\nLet me know if it helps.";
        assert_eq!(
            extract_tagged(text, TAG_TESTBENCH).unwrap(),
            "module tb;\nendmodule"
        );
    }

    #[test]
    fn innermost_block_wins() {
        let text = "<q>outer <q>inner</q>";
        assert_eq!(extract_tagged(text, "q").unwrap(), "inner");
    }

    proptest! {
        #[test]
        fn roundtrip(body in "[a-zA-Z0-9 \\n;=()\\[\\]{}]{0,200}") {
            let text = compose_tagged(TAG_SOLUTION, &body);
            prop_assert_eq!(extract_tagged(&text, TAG_SOLUTION).unwrap(), body.trim());
        }
    }
}
