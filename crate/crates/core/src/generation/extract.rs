// SPDX-License-Identifier: Apache-2.0

const VERILOG_TAGS: &[&str] = &["verilog", "systemverilog", "v"];

struct Fence<'a> {
    info: &'a str,
    body: Vec<&'a str>,
}

fn fence_marker(line: &str) -> Option<&str> {
    line.trim_start().strip_prefix("```")
}

/// Body of the first Verilog code fence in a model response.
///
/// Preference order: the first fence tagged `verilog`, `systemverilog` or `v`
/// (case-insensitive), then the first untagged fence, then, when the text has
/// no fence at all, the whole text if it mentions `module`. A fence left open
/// at the end of the response runs to the end of the text. Any line starting
/// with three backticks inside a fence closes it.
pub fn extract_first_fenced_block(text: &str) -> Option<String> {
    let mut fences: Vec<Fence<'_>> = Vec::new();
    let mut open: Option<Fence<'_>> = None;
    for line in text.lines() {
        match (&mut open, fence_marker(line)) {
            (None, Some(info)) => {
                let info = info.split_whitespace().next().unwrap_or("");
                open = Some(Fence { info, body: Vec::new() });
            }
            (Some(_), Some(_)) => fences.push(open.take().expect("fence is open")),
            (Some(f), None) => f.body.push(line),
            (None, None) => {}
        }
    }
    if let Some(f) = open {
        fences.push(f);
    }

    if fences.is_empty() {
        return text.contains("module").then(|| text.to_string());
    }
    fences
        .iter()
        .find(|f| VERILOG_TAGS.iter().any(|t| f.info.eq_ignore_ascii_case(t)))
        .or_else(|| fences.iter().find(|f| f.info.is_empty()))
        .map(|f| f.body.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fence() {
        assert_eq!(
            extract_first_fenced_block("intro\n```verilog\nmodule m; endmodule\n```\nmore").as_deref(),
            Some("module m; endmodule")
        );
    }

    #[test]
    fn skips_other_languages() {
        let text = "```python\nprint(1)\n```\ntext\n```verilog\nmodule a; endmodule\n```";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some("module a; endmodule"));
    }

    #[test]
    fn tag_is_case_insensitive() {
        let text = "```SystemVerilog\nmodule s; endmodule\n```";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some("module s; endmodule"));
        assert_eq!(extract_first_fenced_block("```V\nx\n```").as_deref(), Some("x"));
    }

    #[test]
    fn untagged_fallback_and_tagged_preference() {
        let text = "```\nuntagged\n```\n```verilog\ntagged\n```";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some("tagged"));
        assert_eq!(extract_first_fenced_block("```\nplain\n```").as_deref(), Some("plain"));
    }

    #[test]
    fn no_code() {
        assert_eq!(extract_first_fenced_block("no code here"), None);
        assert_eq!(extract_first_fenced_block("```python\nx\n```"), None);
    }

    #[test]
    fn bare_module_text() {
        let text = "module m(input a); endmodule";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some(text));
    }

    #[test]
    fn unclosed_fence_runs_to_end() {
        let text = "Here:\n```verilog\nmodule t;\n  wire a;";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some("module t;\n  wire a;"));
    }

    #[test]
    fn indented_fences() {
        let text = "  ```verilog\n  module i; endmodule\n  ```";
        assert_eq!(extract_first_fenced_block(text).as_deref(), Some("  module i; endmodule"));
    }
}
