//! Minimal S-expression reader shared by the term, formula and script syntaxes.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp], ParseError> {
        self.list()
            .ok_or_else(|| ParseError::at(self.pos(), format!("expected {what}")))
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str, ParseError> {
        self.atom()
            .ok_or_else(|| ParseError::at(self.pos(), format!("expected {what}")))
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::at(self.pos(), message)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => f.write_str(s),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Option<Sexp>, ParseError> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Ok(None),
            Some(')') => Err(ParseError::at(start, "unexpected ')'")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(ParseError::at(start, "unclosed '('")),
                        Some(')') => {
                            self.bump();
                            return Ok(Some(Sexp::List(items, start)));
                        }
                        Some(_) => {
                            let item = self.read()?.expect("peeked a character");
                            items.push(item);
                        }
                    }
                }
            }
            Some('"') => {
                let mut s = String::from(self.bump().unwrap());
                loop {
                    match self.bump() {
                        None => return Err(ParseError::at(start, "unclosed string")),
                        Some('"') => break,
                        Some(c) => s.push(c),
                    }
                }
                s.push('"');
                Ok(Some(Sexp::Atom(s, start)))
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Some(Sexp::Atom(s, start)))
            }
        }
    }
}

/// Read every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, column: 1 },
    };
    let mut out = Vec::new();
    while let Some(s) = r.read()? {
        out.push(s);
    }
    Ok(out)
}

/// Read exactly one expression.
pub fn parse_one(text: &str) -> Result<Sexp, ParseError> {
    let mut all = parse_all(text)?;
    match all.len() {
        0 => Err(ParseError {
            line: 1,
            column: 1,
            message: "empty input".into(),
        }),
        1 => Ok(all.pop().unwrap()),
        _ => Err(ParseError::at(
            all[1].pos(),
            "trailing input after expression",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let s = parse_one("(a (b c) ; note\n d)").unwrap();
        assert_eq!(s.to_string(), "(a (b c) d)");
    }

    #[test]
    fn strings_keep_spaces() {
        let s = parse_one("(cite \"a (b) c\")").unwrap();
        assert_eq!(s.list().unwrap()[1].atom(), Some("\"a (b) c\""));
        assert!(parse_one("(\"open").is_err());
    }

    #[test]
    fn error_positions() {
        let e = parse_one("(a\n  (b").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_one("a )").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }
}
