//! Tokenizer for the supported Verilog subset.

use super::eval::Val;
use super::CompileError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Sys(String),
    Number(Val),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub line: u32,
}

const PUNCTS: &[&str] = &[
    // longest first so greedy matching works
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~&", "~|", "~^",
    "^~", "+:", "-:", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".", "#", "@", "=", "+", "-",
    "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "?",
];

pub fn lex(src: &str) -> Result<Vec<SpannedTok>, CompileError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line: u32 = 1;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'`' => {
                // compiler directives are ignored wholesale
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                i += 2;
                while i + 1 < bytes.len() && !(bytes[i] == b'*' && bytes[i + 1] == b'/') {
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
                if i + 1 >= bytes.len() {
                    return Err(CompileError::at(line, "unterminated block comment"));
                }
                i += 2;
            }
            b'"' => {
                i += 1;
                let mut s = String::new();
                loop {
                    if i >= bytes.len() {
                        return Err(CompileError::at(line, "unterminated string"));
                    }
                    match bytes[i] {
                        b'"' => {
                            i += 1;
                            break;
                        }
                        b'\\' if i + 1 < bytes.len() => {
                            s.push(match bytes[i + 1] {
                                b'n' => '\n',
                                b't' => '\t',
                                other => other as char,
                            });
                            i += 2;
                        }
                        b'\n' => return Err(CompileError::at(line, "newline in string")),
                        other => {
                            s.push(other as char);
                            i += 1;
                        }
                    }
                }
                toks.push(SpannedTok {
                    tok: Tok::Str(s),
                    line,
                });
            }
            b'$' => {
                let start = i + 1;
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                if i == start {
                    return Err(CompileError::at(line, "stray '$'"));
                }
                toks.push(SpannedTok {
                    tok: Tok::Sys(src[start..i].to_string()),
                    line,
                });
            }
            b'\'' => {
                // unsized based literal like 'b1 / 'hFF
                let (val, next) = lex_based(src, i, None, line)?;
                toks.push(SpannedTok {
                    tok: Tok::Number(val),
                    line,
                });
                i = next;
            }
            b'0'..=b'9' => {
                // decimal run, possibly the size prefix of a based literal
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
                let digits: String = src[start..i].chars().filter(|c| *c != '_').collect();
                // skip whitespace between size and base marker
                let mut j = i;
                while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'\'' {
                    let width: u32 = digits
                        .parse()
                        .map_err(|_| CompileError::at(line, "bad literal size"))?;
                    if width == 0 || width > 64 {
                        return Err(CompileError::at(line, "literal width must be 1..=64"));
                    }
                    let (val, next) = lex_based(src, j, Some(width), line)?;
                    toks.push(SpannedTok {
                        tok: Tok::Number(val),
                        line,
                    });
                    i = next;
                } else {
                    let v: u64 = digits
                        .parse()
                        .map_err(|_| CompileError::at(line, "integer literal too large"))?;
                    toks.push(SpannedTok {
                        tok: Tok::Number(Val::new(32, v)),
                        line,
                    });
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$')
                {
                    i += 1;
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(src[start..i].to_string()),
                    line,
                });
            }
            _ => {
                let rest = &src[i..];
                let mut matched = false;
                for p in PUNCTS {
                    if rest.starts_with(p) {
                        toks.push(SpannedTok {
                            tok: Tok::Punct(p),
                            line,
                        });
                        i += p.len();
                        matched = true;
                        break;
                    }
                }
                if !matched {
                    return Err(CompileError::at(
                        line,
                        &format!("unexpected character '{}'", c as char),
                    ));
                }
            }
        }
    }
    toks.push(SpannedTok {
        tok: Tok::Eof,
        line,
    });
    Ok(toks)
}

/// Lex a based literal starting at the `'` in `src[at..]`.
fn lex_based(
    src: &str,
    at: usize,
    width: Option<u32>,
    line: u32,
) -> Result<(Val, usize), CompileError> {
    let bytes = src.as_bytes();
    let mut i = at + 1; // past '
    if i < bytes.len() && (bytes[i] == b's' || bytes[i] == b'S') {
        i += 1; // signedness is parsed and ignored
    }
    if i >= bytes.len() {
        return Err(CompileError::at(line, "truncated literal"));
    }
    let base: u32 = match bytes[i] {
        b'b' | b'B' => 2,
        b'o' | b'O' => 8,
        b'd' | b'D' => 10,
        b'h' | b'H' => 16,
        _ => return Err(CompileError::at(line, "bad literal base")),
    };
    i += 1;
    while i < bytes.len() && (bytes[i] == b' ' || bytes[i] == b'\t') {
        i += 1;
    }
    let bits_per = match base {
        2 => 1,
        8 => 3,
        16 => 4,
        _ => 0,
    };
    let mut bits: u64 = 0;
    let mut xz: u64 = 0;
    let mut ndigits = 0u32;
    let mut dec = String::new();
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '_' {
            i += 1;
            continue;
        }
        let is_digit = if base == 10 {
            c.is_ascii_digit() || matches!(c, 'x' | 'X' | 'z' | 'Z')
        } else {
            c.is_digit(base) || matches!(c, 'x' | 'X' | 'z' | 'Z' | '?')
        };
        if !is_digit {
            break;
        }
        if base == 10 {
            if matches!(c, 'x' | 'X' | 'z' | 'Z') {
                let w = width.unwrap_or(32);
                return Ok((Val::all_x(w), i + 1));
            }
            dec.push(c);
        } else {
            let (dbits, dxz) = match c {
                'x' | 'X' | 'z' | 'Z' | '?' => (0u64, (1u64 << bits_per) - 1),
                _ => (c.to_digit(base).unwrap() as u64, 0u64),
            };
            if ndigits * bits_per >= 64 {
                return Err(CompileError::at(line, "literal wider than 64 bits"));
            }
            bits = (bits << bits_per) | dbits;
            xz = (xz << bits_per) | dxz;
        }
        ndigits += 1;
        i += 1;
    }
    if ndigits == 0 {
        return Err(CompileError::at(line, "literal has no digits"));
    }
    if base == 10 {
        bits = dec
            .parse()
            .map_err(|_| CompileError::at(line, "decimal literal too large"))?;
    }
    let w = width.unwrap_or(32);
    Ok((Val::with_xz(w, bits, xz), i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("42"), vec![Tok::Number(Val::new(32, 42)), Tok::Eof]);
        assert_eq!(
            toks("4'b1010"),
            vec![Tok::Number(Val::new(4, 0b1010)), Tok::Eof]
        );
        assert_eq!(
            toks("8'hFF"),
            vec![Tok::Number(Val::new(8, 0xff)), Tok::Eof]
        );
        assert_eq!(toks("3'd5"), vec![Tok::Number(Val::new(3, 5)), Tok::Eof]);
        let t = toks("4'b1x0z");
        match &t[0] {
            Tok::Number(v) => {
                assert_eq!(v.width, 4);
                assert_eq!(v.xz, 0b0101);
                assert_eq!(v.bits, 0b1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn operators_and_idents() {
        assert_eq!(
            toks("a <= b !== c"),
            vec![
                Tok::Ident("a".into()),
                Tok::Punct("<="),
                Tok::Ident("b".into()),
                Tok::Punct("!=="),
                Tok::Ident("c".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_directives_skipped() {
        assert_eq!(
            toks("`timescale 1ns/1ps\n// c\n/* d */ x"),
            vec![Tok::Ident("x".into()), Tok::Eof]
        );
    }

    #[test]
    fn strings_and_sys() {
        assert_eq!(
            toks("$display(\"hi %d\\n\")"),
            vec![
                Tok::Sys("display".into()),
                Tok::Punct("("),
                Tok::Str("hi %d\n".into()),
                Tok::Punct(")"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn unterminated_comment_is_error() {
        assert!(lex("/*?").is_err());
    }
}
